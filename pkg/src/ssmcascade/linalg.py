"""Dense binary64 kernels shared by every other module.

Matrices and vectors are plain :class:`numpy.ndarray` objects of dtype
``float64``.  The helpers here validate shape and finiteness at the
boundaries and keep a small amount of instrumentation (matvec counting) so
that the cascade can report how many state-matrix applications it really
performed.
"""

from __future__ import annotations

import contextlib
import threading
from dataclasses import dataclass

import numpy as np


class ContractError(ValueError):
    """Raised when an operation is called with inconsistent dimensions."""


class NumericalError(ArithmeticError):
    """Raised when a numerical procedure fails (non-convergence, overflow)."""


class SingularityError(NumericalError):
    """Raised when a linear system that must be solved is singular."""


_state = threading.local()


def is_deterministic() -> bool:
    return getattr(_state, "deterministic", True)


@contextlib.contextmanager
def deterministic(enabled: bool = True):
    """Toggle deterministic mode for the current thread.

    In deterministic mode the cascade and the convolution oracle run on a
    single thread with a fixed evaluation order, so repeated runs are
    bit-identical.  Outside it they may split column work across threads.
    """
    previous = is_deterministic()
    _state.deterministic = enabled
    try:
        yield
    finally:
        _state.deterministic = previous


@dataclass
class MatvecCounter:
    """Counts single-column applications of a state-matrix power.

    ``flops`` accumulates the multiply-add work of those applications
    (two flops per multiply-add), so dense and structured backends can be
    compared on the same footing.
    """

    count: int = 0
    flops: int = 0

    def add(self, columns: int, flops_per_column: int = 0) -> None:
        self.count += int(columns)
        self.flops += int(columns) * int(flops_per_column)


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Return `a` as a finite 2-D float64 array."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise ContractError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ContractError(f"{name} must have at least one row and column")
    if not np.all(np.isfinite(arr)):
        raise ContractError(f"{name} contains NaN or Inf entries")
    return arr


def as_vector(x, name: str = "vector") -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] < 1:
        raise ContractError(f"{name} must be a non-empty 1-D array")
    if not np.all(np.isfinite(arr)):
        raise ContractError(f"{name} contains NaN or Inf entries")
    return arr


def is_square(a: np.ndarray) -> bool:
    return a.ndim == 2 and a.shape[0] == a.shape[1]


def mat_mul(a, b) -> np.ndarray:
    """Dense product ``a @ b``."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ContractError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def mat_vec(a, x, counter: MatvecCounter | None = None) -> np.ndarray:
    """Dense matrix-vector product, optionally counted."""
    a = np.asarray(a, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if a.ndim != 2 or x.ndim != 1 or a.shape[1] != x.shape[0]:
        raise ContractError(f"cannot apply {a.shape} matrix to vector of shape {x.shape}")
    if counter is not None:
        counter.add(1, 2 * a.shape[0] * a.shape[1])
    return a @ x


def mat_block(a, x, counter: MatvecCounter | None = None) -> np.ndarray:
    """Apply `a` to every column of `x`; counts one matvec per column."""
    if a.shape[1] != x.shape[0]:
        raise ContractError(f"cannot apply {a.shape} matrix to block of shape {x.shape}")
    if counter is not None:
        counter.add(x.shape[1], 2 * a.shape[0] * a.shape[1])
    return a @ x


def repeated_squares(a, count: int) -> list[np.ndarray]:
    """Return ``[a, a**2, a**4, ..., a**(2**(count-1))]`` by successive squaring."""
    a = as_matrix(a)
    if not is_square(a):
        raise ContractError(f"repeated squaring needs a square matrix, got {a.shape}")
    if count < 1:
        raise ContractError("count must be >= 1")
    powers = [a]
    for _ in range(count - 1):
        prev = powers[-1]
        powers.append(prev @ prev)
    return powers


def spectral_norm(a) -> float:
    """Largest singular value of `a`."""
    a = np.asarray(a)
    if a.size == 0:
        raise ContractError("spectral norm of an empty matrix")
    if not np.any(a):
        return 0.0
    try:
        s = np.linalg.svd(a, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge: {exc}") from exc
    return float(s[0])


def block_svd(a, tol: float):
    """Truncated SVD of a block.

    Keeps the singular values strictly greater than ``tol * s_max``.

    Returns
    -------
    U, S, V, rank
        ``a ~= U @ np.diag(S) @ V.T`` with ``U`` of shape (rows, rank) and
        ``V`` of shape (cols, rank).
    """
    a = np.asarray(a, dtype=np.float64)
    if tol < 0:
        raise ContractError("tol must be >= 0")
    rows, cols = a.shape
    if not np.any(a):
        return np.zeros((rows, 0)), np.zeros(0), np.zeros((cols, 0)), 0
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge: {exc}") from exc
    rank = int(np.count_nonzero(s > tol * s[0]))
    return u[:, :rank], s[:rank], vt[:rank].T, rank


def is_lower_triangular(a: np.ndarray) -> bool:
    return bool(np.all(np.triu(a, 1) == 0.0))


def is_upper_triangular(a: np.ndarray) -> bool:
    return bool(np.all(np.tril(a, -1) == 0.0))


def spectral_radius_estimate(a) -> float:
    """Largest eigenvalue magnitude.

    Exact (the diagonal) for triangular input; otherwise taken from the
    eigenvalues, which is adequate as an estimate even when the eigenvectors
    are badly conditioned.
    """
    a = as_matrix(a)
    if not is_square(a):
        raise ContractError("spectral radius needs a square matrix")
    if is_lower_triangular(a) or is_upper_triangular(a):
        return float(np.max(np.abs(np.diag(a))))
    return float(np.max(np.abs(np.linalg.eigvals(a))))


@dataclass(frozen=True)
class SignalBlock:
    """A ``dim x L`` block of samples; column ``l`` is the sample at time ``l``."""

    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", as_matrix(self.data, "signal block"))

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def length(self) -> int:
        return self.data.shape[1]

    def column(self, index: int) -> np.ndarray:
        return self.data[:, index]


def as_signal(x, dim: int | None = None, name: str = "signal") -> np.ndarray:
    """Return the ``dim x L`` array behind `x`.

    Accepts a :class:`SignalBlock`, a 2-D array, or a 1-D array (treated as
    a single channel).
    """
    if isinstance(x, SignalBlock):
        arr = x.data
    else:
        arr = np.asarray(x, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[np.newaxis, :]
        arr = as_matrix(arr, name)
    if dim is not None and arr.shape[0] != dim:
        raise ContractError(f"{name} has dimension {arr.shape[0]}, expected {dim}")
    return arr
