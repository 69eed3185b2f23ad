"""Reference implementations used to check the cascade.

Both compute ``y[l] = sum_{k<=l} C Abar**(l-k) Bbar u[k] + D u[l]``: one by
running the state recurrence, one by materializing the impulse response and
convolving directly.  Neither shares code with the cascade.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import ContractError, SignalBlock, as_matrix, as_signal
from .lti import DiscreteLTI


@dataclass(frozen=True)
class Kernel:
    """Impulse response taps ``h[k] = C Abar**k Bbar`` (shape ``K x q x p``) and feedthrough."""

    taps: np.ndarray
    D: np.ndarray

    @property
    def length(self) -> int:
        return self.taps.shape[0]

    @property
    def p(self) -> int:
        return self.taps.shape[2]


def recurrence_apply(sys: DiscreteLTI, u) -> SignalBlock:
    """Run ``x[n] = Abar x[n-1] + Bbar u[n]``, ``y[n] = C x[n] + D u[n]`` from ``x[-1] = 0``."""
    U = as_signal(u, sys.p, "input")
    L = U.shape[1]
    drive = sys.Bbar @ U
    X = np.empty((sys.m, L))
    x = np.zeros(sys.m)
    A = sys.Abar
    for n in range(L):
        x = A @ x + drive[:, n]
        X[:, n] = x
    return SignalBlock(sys.C @ X + sys.D @ U)


def kernel_materialize(sys: DiscreteLTI, length: int) -> Kernel:
    """Taps ``C Abar**k Bbar`` for ``k < length``, by propagating the columns of ``Bbar``."""
    if length < 1:
        raise ContractError("kernel length must be >= 1")
    taps = np.empty((length, sys.q, sys.p))
    state = sys.Bbar.copy()
    for k in range(length):
        taps[k] = sys.C @ state
        if k + 1 < length:
            state = sys.Abar @ state
    return Kernel(taps, sys.D.copy())


def conv_apply(kernel: Kernel, u) -> SignalBlock:
    """Direct causal convolution ``y[l] = sum_{k <= min(l, K-1)} h[k] u[l-k] + D u[l]``."""
    U = as_signal(u, kernel.p, "input")
    D = as_matrix(kernel.D, "D")
    L = U.shape[1]
    Y = D @ U
    for k in range(min(kernel.length, L)):
        Y[:, k:] += kernel.taps[k] @ U[:, :L - k]
    return SignalBlock(Y)


def truncated_conv_apply(sys: DiscreteLTI, u, stages: int) -> SignalBlock:
    """Convolution with the kernel cut after ``2**stages`` taps (degree ``2**stages - 1``)."""
    U = as_signal(u, sys.p, "input")
    length = min(2 ** stages, U.shape[1])
    return conv_apply(kernel_materialize(sys, length), U)
