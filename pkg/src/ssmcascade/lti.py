"""State-space models, discretization and z-domain transfer functions."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as spla

from .linalg import (
    ContractError,
    NumericalError,
    SingularityError,
    as_matrix,
    is_lower_triangular,
    is_upper_triangular,
    repeated_squares,
    spectral_radius_estimate,
)

SCHEMES = ("bilinear", "exponential")


def _check_dims(A, B, C, D):
    m = A.shape[0]
    if A.shape != (m, m):
        raise ContractError(f"state matrix must be square, got {A.shape}")
    p = B.shape[1]
    q = C.shape[0]
    if B.shape[0] != m:
        raise ContractError(f"B must have {m} rows, got {B.shape}")
    if C.shape[1] != m:
        raise ContractError(f"C must have {m} columns, got {C.shape}")
    if D.shape != (q, p):
        raise ContractError(f"D must be {q}x{p}, got {D.shape}")
    if not (1 <= p <= m and 1 <= q <= m):
        raise ContractError(f"need 1 <= p, q <= m; got m={m}, p={p}, q={q}")
    return m, p, q


@dataclass(frozen=True)
class ContinuousLTI:
    """``x' = A x + B u``, ``y = C x + D u``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        for name in "ABCD":
            object.__setattr__(self, name, as_matrix(getattr(self, name), name))
        _check_dims(self.A, self.B, self.C, self.D)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def p(self) -> int:
        return self.B.shape[1]

    @property
    def q(self) -> int:
        return self.C.shape[0]


@dataclass(frozen=True)
class DiscreteLTI:
    """``x[n] = Abar x[n-1] + Bbar u[n]``, ``y[n] = C x[n] + D u[n]``.

    ``spectral_radius`` is estimated at construction and ``stable`` records
    whether it is below one; cascade planning refuses unstable systems.
    """

    Abar: np.ndarray
    Bbar: np.ndarray
    C: np.ndarray
    D: np.ndarray
    delta: float = 1.0
    scheme: str = "bilinear"
    spectral_radius: float = field(init=False)
    stable: bool = field(init=False)

    def __post_init__(self):
        for name in ("Abar", "Bbar", "C", "D"):
            object.__setattr__(self, name, as_matrix(getattr(self, name), name))
        _check_dims(self.Abar, self.Bbar, self.C, self.D)
        if not self.delta > 0:
            raise ContractError(f"delta must be positive, got {self.delta}")
        if self.scheme not in SCHEMES:
            raise ContractError(f"unknown scheme {self.scheme!r}")
        rho = spectral_radius_estimate(self.Abar)
        object.__setattr__(self, "spectral_radius", rho)
        object.__setattr__(self, "stable", rho < 1.0)

    @property
    def m(self) -> int:
        return self.Abar.shape[0]

    @property
    def p(self) -> int:
        return self.Bbar.shape[1]

    @property
    def q(self) -> int:
        return self.C.shape[0]


def hippo_matrix(m: int) -> np.ndarray:
    """The lower-triangular HiPPO matrix with 1-based indices ``n, k``.

    ``A[n, k] = -sqrt(2n+1) sqrt(2k+1)`` below the diagonal and
    ``A[n, n] = -(n+1)``, so the diagonal reads ``-2, -3, ..., -(m+1)``.
    """
    if m < 1:
        raise ContractError("m must be >= 1")
    n = np.arange(1, m + 1, dtype=np.float64)
    r = np.sqrt(2.0 * n + 1.0)
    a = -np.tril(np.outer(r, r), -1)
    a[np.diag_indices(m)] = -(n + 1.0)
    return a


def _solve(M: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve ``M X = rhs`` without forming an inverse."""
    lower, upper = is_lower_triangular(M), is_upper_triangular(M)
    if (lower or upper) and np.any(np.diag(M) == 0):
        raise SingularityError("triangular system has a zero pivot")
    if lower:
        return spla.solve_triangular(M, rhs, lower=True)
    if upper:
        return spla.solve_triangular(M, rhs, lower=False)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", spla.LinAlgWarning)
            lu = spla.lu_factor(M, check_finite=False)
    except (np.linalg.LinAlgError, spla.LinAlgWarning, ValueError) as exc:
        raise SingularityError(f"singular system: {exc}") from exc
    if np.any(np.diag(lu[0]) == 0):
        raise SingularityError("singular system: zero pivot in LU factorization")
    return spla.lu_solve(lu, rhs, check_finite=False)


def discretize_bilinear(sys: ContinuousLTI, delta: float) -> DiscreteLTI:
    """Trapezoidal rule: ``Abar = (I - dA/2)^-1 (I + dA/2)``, ``Bbar = d (I - dA/2)^-1 B``."""
    if not delta > 0:
        raise ContractError(f"delta must be positive, got {delta}")
    m = sys.m
    eye = np.eye(m)
    half = 0.5 * delta * sys.A
    lhs = eye - half
    rhs = np.hstack([eye + half, delta * sys.B])
    sol = _solve(lhs, rhs)
    return DiscreteLTI(sol[:, :m], sol[:, m:], sys.C.copy(), sys.D.copy(), delta, "bilinear")


def discretize_exponential(sys: ContinuousLTI, delta: float) -> DiscreteLTI:
    """Zero-order hold: ``Abar = exp(dA)``, ``Bbar = A^-1 (exp(dA) - I) B``.

    ``Bbar`` is read off the exponential of the block matrix
    ``d [[A, B], [0, 0]]``, which equals the formula above when ``A`` is
    invertible and its continuous limit (e.g. ``d B`` for ``A = 0``)
    otherwise.
    """
    if not delta > 0:
        raise ContractError(f"delta must be positive, got {delta}")
    m, p = sys.m, sys.p
    block = np.zeros((m + p, m + p))
    block[:m, :m] = sys.A
    block[:m, m:] = sys.B
    e = spla.expm(delta * block)
    if not np.all(np.isfinite(e)):
        raise NumericalError("matrix exponential overflowed")
    return DiscreteLTI(e[:m, :m], e[:m, m:], sys.C.copy(), sys.D.copy(), delta, "exponential")


def discretize(sys: ContinuousLTI, delta: float, scheme: str = "bilinear") -> DiscreteLTI:
    if scheme == "bilinear":
        return discretize_bilinear(sys, delta)
    if scheme == "exponential":
        return discretize_exponential(sys, delta)
    raise ContractError(f"unknown scheme {scheme!r}")


def _check_unit(z: complex) -> complex:
    z = complex(z)
    if abs(abs(z) - 1.0) > 1e-14:
        raise ContractError(f"z must lie on the unit circle, |z| = {abs(z)!r}")
    return z


def transfer_eval(sys: DiscreteLTI, z: complex) -> np.ndarray:
    """``H(z) = C (I - Abar/z)^-1 Bbar + D`` as a complex q x p array."""
    z = _check_unit(z)
    resolvent = np.eye(sys.m) - sys.Abar / z
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", spla.LinAlgWarning)
            lu = spla.lu_factor(resolvent, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SingularityError(f"singular resolvent at z={z}") from exc
    if np.any(np.diag(lu[0]) == 0):
        raise SingularityError(f"singular resolvent at z={z}")
    x = spla.lu_solve(lu, sys.Bbar.astype(complex), check_finite=False)
    return sys.C @ x + sys.D


def truncated_transfer_eval(sys: DiscreteLTI, z: complex, stages: int,
                            powers: list[np.ndarray] | None = None) -> np.ndarray:
    """Transfer function with the resolvent replaced by ``stages`` cascade factors.

    The resolvent becomes ``prod_{s<stages} (I + (Abar/z)**(2**s))``, a
    matrix polynomial of degree ``2**stages - 1`` in ``1/z``.  Pass the
    precomputed ``powers`` (``Abar**(2**s)``) to avoid recomputing them.
    """
    z = _check_unit(z)
    if stages < 1:
        raise ContractError("stages must be >= 1")
    if powers is None:
        powers = repeated_squares(sys.Abar, stages)
    if len(powers) < stages:
        raise ContractError(f"need {stages} powers, got {len(powers)}")
    factors = []
    w = 1.0 / z
    for _ in range(stages):
        factors.append(w)
        w = w * w
        w = w / abs(w)
    return _cascade_resolvent(sys, powers, factors)


def grid_phases(k: int, grid_points: int, stages: int) -> list[complex]:
    """``z**(-2**s)`` for ``z = exp(2 pi i k / K)``, reduced exactly in integers."""
    return [np.exp(-2j * np.pi * ((k * pow(2, s, grid_points)) % grid_points) / grid_points)
            for s in range(stages)]


def _cascade_resolvent(sys: DiscreteLTI, powers, factors) -> np.ndarray:
    x = sys.Bbar.astype(complex)
    for power, w in zip(powers, factors):
        x = x + w * (power @ x)
    return sys.C @ x + sys.D


def default_io(m: int, p: int = 1, q: int = 1):
    """``B = ones``, ``C = ones / m``, ``D = 0``: the SISO setup used throughout the tests."""
    return np.ones((m, p)), np.ones((q, m)) / m, np.zeros((q, p))


def hippo_system(m: int = 100, delta: float = 5e-4, scheme: str = "bilinear") -> DiscreteLTI:
    B, C, D = default_io(m)
    return discretize(ContinuousLTI(hippo_matrix(m), B, C, D), delta, scheme)


def random_discrete(rng: np.random.Generator, m: int, p: int = 1, q: int = 1,
                    sigma_max: float = 0.9, triangular: bool = False) -> DiscreteLTI:
    """Random system whose state matrix has largest singular value exactly ``sigma_max``."""
    a = rng.uniform(-1.0, 1.0, size=(m, m))
    if triangular:
        a = np.tril(a)
    s = np.linalg.norm(a, 2)
    a = a * (sigma_max / s) if s > 0 else a
    return DiscreteLTI(a, rng.uniform(-1, 1, (m, p)), rng.uniform(-1, 1, (q, m)),
                       rng.uniform(-1, 1, (q, p)))
