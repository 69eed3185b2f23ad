"""Cascade application of a discrete LTI transfer function.

The resolvent factors as ``(I - W)^-1 = prod_s (I + W**(2**s))`` with
``W = Abar / z``.  Keeping ``S`` factors gives a matrix polynomial of degree
``2**S - 1``; in the time domain factor ``s`` is a shift by ``2**s`` samples
combined with one application of ``Abar**(2**s)``, so the whole convolution
touches only ``S`` distinct state-matrix powers.

Stage convention: ``S`` is the number of factors and ``powers[s]`` is
``Abar**(2**s)`` for ``s = 0 .. S-1``.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    ContractError,
    MatvecCounter,
    NumericalError,
    SignalBlock,
    as_signal,
    is_deterministic,
    mat_block,
    repeated_squares,
    spectral_norm,
)
from .lti import DiscreteLTI, _cascade_resolvent, grid_phases, transfer_eval

CRITERIA = ("spectral", "lemma", "tail")
DEFAULT_MAX_STAGES = 40


class PlanningError(NumericalError):
    """No stage count up to the cap meets the requested tolerance."""

    def __init__(self, message: str, best: float, stages: int):
        super().__init__(message)
        self.best = best
        self.stages = stages


@dataclass(frozen=True)
class CascadePlan:
    """Precomputed powers and accuracy bookkeeping for one system.

    Attributes
    ----------
    powers
        ``[Abar, Abar**2, ..., Abar**(2**(S-1))]``.
    gamma
        Largest singular value of ``Abar``.
    rho
        Spectral radius estimate of ``Abar``.
    bound
        Rigorous frequency-domain bound ``gamma**(2**S) / (1 - gamma) * ||C|| ||Bbar||``;
        NaN when ``gamma >= 1``.
    heuristic_tail
        Measured ``||Abar**(2**S)||_2``, the first neglected power.
    criterion
        Stopping rule used: ``"lemma"`` is rigorous, the others are flagged
        heuristic.
    criterion_value
        Value of the stopping rule at ``stages``.
    """

    powers: list[np.ndarray] = field(repr=False)
    stages: int
    gamma: float
    rho: float
    bound: float
    heuristic_tail: float
    scale: float
    tol: float
    criterion: str
    criterion_value: float

    @property
    def m(self) -> int:
        return self.powers[0].shape[0]

    @property
    def degree(self) -> int:
        return 2 ** self.stages - 1

    @property
    def heuristic(self) -> bool:
        return self.criterion != "lemma"


@dataclass(frozen=True)
class ApplyStats:
    stage_count: int
    effective_stages: int
    matvec_count: int
    flops: int
    wall_ns: int

    @property
    def wall_time(self) -> float:
        return self.wall_ns * 1e-9


def _lemma_value(gamma: float, stages: int, scale: float) -> float:
    if gamma >= 1.0:
        return math.nan
    if gamma == 0.0 or scale == 0.0:
        return 0.0
    return gamma ** (2 ** stages) / (1.0 - gamma) * scale


def _tail_value(tail: float, rho: float, scale: float) -> float:
    if tail == 0.0 or scale == 0.0:
        return 0.0
    return tail / (1.0 - rho) * scale


def _spectral_value(rho: float, stages: int, scale: float) -> float:
    if rho == 0.0 or scale == 0.0:
        return 0.0
    return rho ** (2 ** stages) / (1.0 - rho) * scale


def _make_plan(sys: DiscreteLTI, powers, stages, tail, gamma, scale, tol, criterion, value):
    return CascadePlan(
        powers=powers[:stages], stages=stages, gamma=gamma, rho=sys.spectral_radius,
        bound=_lemma_value(gamma, stages, scale), heuristic_tail=tail, scale=scale,
        tol=tol, criterion=criterion, criterion_value=value)


def plan(sys: DiscreteLTI, tol: float, max_stages: int = DEFAULT_MAX_STAGES,
         criterion: str = "spectral") -> CascadePlan:
    """Choose the smallest stage count ``S >= 1`` whose truncation estimate is ``<= tol``.

    Criteria, all scaled by ``||C||_2 ||Bbar||_2``:

    ``"spectral"`` (default)
        ``rho**(2**S) / (1 - rho)``: the first neglected power is dismissed
        once its eigenvalues have decayed below tolerance.  This reproduces
        the 15-stage plan for the bilinear HiPPO system.
    ``"lemma"``
        ``gamma**(2**S) / (1 - gamma)`` with ``gamma = ||Abar||_2``, a proven
        bound on ``||H(z) - H_S(z)||`` on the unit circle.  When
        ``gamma >= 1`` it is unavailable and ``"tail"`` is used instead.
    ``"tail"``
        ``||Abar**(2**S)||_2 / (1 - rho)``, from the measured power.
    """
    if not tol > 0:
        raise ContractError(f"tol must be positive, got {tol}")
    if max_stages < 1:
        raise ContractError("max_stages must be >= 1")
    if criterion not in CRITERIA:
        raise ContractError(f"unknown criterion {criterion!r}; choose from {CRITERIA}")
    if not sys.stable:
        raise PlanningError(
            f"spectral radius {sys.spectral_radius!r} >= 1; the cascade does not converge",
            math.inf, 0)
    gamma = spectral_norm(sys.Abar)
    rho = sys.spectral_radius
    scale = spectral_norm(sys.C) * spectral_norm(sys.Bbar)
    if criterion == "lemma" and gamma >= 1.0:
        criterion = "tail"

    powers = [sys.Abar]
    best = math.inf
    for stages in range(1, max_stages + 1):
        powers.append(powers[-1] @ powers[-1])
        tail = spectral_norm(powers[stages])
        if criterion == "lemma":
            value = _lemma_value(gamma, stages, scale)
        elif criterion == "tail":
            value = _tail_value(tail, rho, scale)
        else:
            value = _spectral_value(rho, stages, scale)
        best = min(best, value)
        if value <= tol:
            return _make_plan(sys, powers, stages, tail, gamma, scale, tol, criterion, value)
    raise PlanningError(
        f"{criterion} criterion not met within {max_stages} stages "
        f"(best {best:.3e} > tol {tol:.3e})", best, max_stages)


def plan_stages(sys: DiscreteLTI, stages: int) -> CascadePlan:
    """A plan with a fixed stage count (no tolerance search)."""
    if stages < 1:
        raise ContractError("stages must be >= 1")
    powers = repeated_squares(sys.Abar, stages + 1)
    gamma = spectral_norm(sys.Abar)
    rho = sys.spectral_radius
    scale = spectral_norm(sys.C) * spectral_norm(sys.Bbar)
    tail = spectral_norm(powers[stages])
    if gamma < 1.0:
        criterion, value = "lemma", _lemma_value(gamma, stages, scale)
    else:
        criterion, value = "tail", _tail_value(tail, rho, scale)
    return _make_plan(sys, powers, stages, tail, gamma, scale, math.nan, criterion, value)


def _apply_power(op, x: np.ndarray, counter: MatvecCounter) -> np.ndarray:
    if isinstance(op, np.ndarray):
        return mat_block(op, x, counter)
    return op.matvec(x, counter)


def _stage_product(op, src: np.ndarray, counter: MatvecCounter, workers: int) -> np.ndarray:
    if workers <= 1 or src.shape[1] < 2 * workers:
        return _apply_power(op, src, counter)
    chunks = np.array_split(np.arange(src.shape[1]), workers)
    parts = [MatvecCounter() for _ in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(
            lambda args: _apply_power(op, src[:, args[0]], args[1]), zip(chunks, parts)))
    for part in parts:
        counter.count += part.count
        counter.flops += part.flops
    return np.concatenate(results, axis=1)


def apply(plan: CascadePlan, sys: DiscreteLTI, u, operators=None,
          workers: int | None = None) -> tuple[SignalBlock, ApplyStats]:
    """Apply ``H_S`` to a ``p x L`` input block.

    Starting from ``V = Bbar U``, stage ``s`` replaces column ``l >= 2**s``
    by ``Abar**(2**s) V[:, l - 2**s] + V[:, l]``, reading only values from
    the previous stage; stages with ``2**s >= L`` are skipped.  The output is
    ``C V + D U``.

    Parameters
    ----------
    operators
        Optional replacements for ``plan.powers`` (e.g. PLR-compressed powers);
        anything with a ``matvec(block, counter)`` method.
    workers
        Column-parallel threads per stage.  Ignored (forced to 1) in
        deterministic mode.
    """
    if plan.m != sys.m:
        raise ContractError(f"plan built for m={plan.m}, system has m={sys.m}")
    U = as_signal(u, sys.p, "input")
    ops = plan.powers if operators is None else list(operators)
    if len(ops) < plan.stages:
        raise ContractError(f"need {plan.stages} power operators, got {len(ops)}")
    if workers is None or is_deterministic():
        workers = 1

    start = time.perf_counter_ns()
    L = U.shape[1]
    counter = MatvecCounter()
    V = sys.Bbar @ U
    effective = 0
    for s in range(plan.stages):
        shift = 2 ** s
        if shift >= L:
            break
        # The product is fully formed before the in-place add, so stage s
        # only ever reads stage s-1 values.
        V[:, shift:] += _stage_product(ops[s], V[:, :L - shift], counter, workers)
        effective += 1
    Y = sys.C @ V + sys.D @ U
    wall = time.perf_counter_ns() - start
    stats = ApplyStats(plan.stages, effective, counter.count, counter.flops, wall)
    return SignalBlock(Y), stats


def bound(plan: CascadePlan, sys: DiscreteLTI) -> float:
    """Frequency-domain error bound for ``plan``.

    The rigorous bound when ``gamma < 1``; otherwise the measured-tail
    estimate ``||Abar**(2**S)|| / (1 - rho) ||C|| ||Bbar||`` (heuristic).
    """
    if plan.m != sys.m:
        raise ContractError("plan/system mismatch")
    if plan.gamma < 1.0:
        return _lemma_value(plan.gamma, plan.stages, plan.scale)
    return _tail_value(plan.heuristic_tail, plan.rho, plan.scale)


def frequency_check(plan: CascadePlan, sys: DiscreteLTI, grid_points: int) -> tuple[float, float]:
    """Max over ``z = exp(2 pi i k / K)`` of ``||H(z) - H_S(z)||_2``, with the bound."""
    if grid_points < 2:
        raise ContractError("grid_points must be >= 2")
    max_err = 0.0
    for k in range(grid_points):
        z = np.exp(2j * np.pi * k / grid_points)
        exact = transfer_eval(sys, z)
        approx = _cascade_resolvent(sys, plan.powers, grid_phases(k, grid_points, plan.stages))
        max_err = max(max_err, float(np.linalg.norm(exact - approx, 2)))
    return max_err, bound(plan, sys)
