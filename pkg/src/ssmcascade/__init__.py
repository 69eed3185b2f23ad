"""Cascade application of linear time-invariant state-space models.

The transfer function ``C (I - Abar/z)^-1 Bbar + D`` is applied in the time
domain through ``S`` stages that each use one power ``Abar**(2**s)``,
instead of ``L`` sequential state updates.
"""

from .cascade import (
    ApplyStats,
    CascadePlan,
    PlanningError,
    apply,
    bound,
    frequency_check,
    plan,
    plan_stages,
)
from .io import FormatError, ResultRow, load_model, read_matrix, save_model, write_matrix
from .linalg import (
    ContractError,
    MatvecCounter,
    NumericalError,
    SignalBlock,
    SingularityError,
    block_svd,
    deterministic,
    mat_mul,
    mat_vec,
    repeated_squares,
    spectral_norm,
)
from .lti import (
    ContinuousLTI,
    DiscreteLTI,
    discretize_bilinear,
    discretize_exponential,
    hippo_matrix,
    hippo_system,
    transfer_eval,
    truncated_transfer_eval,
)
from .oracles import Kernel, conv_apply, kernel_materialize, recurrence_apply
from .plr import PLRMatrix, plr_build, plr_matvec, plr_power_build

__version__ = "0.1.0"
