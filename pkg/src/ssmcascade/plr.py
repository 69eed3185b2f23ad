"""Partitioned low rank (PLR) matrices.

A square matrix is split at its midpoint into four blocks.  The two
off-diagonal blocks are stored as truncated SVD factors and the two diagonal
blocks are split again, until they are no larger than ``leaf_size`` and are
kept dense.  For matrices whose off-diagonal blocks have small numerical
rank (the bilinear HiPPO state matrix has rank one) the matvec costs
``O(r m log m)`` instead of ``2 m**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import ContractError, MatvecCounter, as_matrix, block_svd, is_square, repeated_squares


@dataclass(frozen=True)
class LowRank:
    """``U @ V.T`` with ``U`` (rows x r) and ``V`` (cols x r)."""

    U: np.ndarray
    V: np.ndarray

    @property
    def rank(self) -> int:
        return self.U.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.U.shape[0], self.V.shape[0]

    def apply(self, x: np.ndarray) -> np.ndarray:
        if self.rank == 0:
            return np.zeros((self.U.shape[0],) + x.shape[1:])
        return self.U @ (self.V.T @ x)

    def dense(self) -> np.ndarray:
        return self.U @ self.V.T

    def flops(self) -> int:
        rows, cols = self.shape
        return 2 * self.rank * (rows + cols)


@dataclass(frozen=True)
class Leaf:
    block: np.ndarray

    @property
    def size(self) -> int:
        return self.block.shape[0]


@dataclass(frozen=True)
class Split:
    """Node covering ``[0, size)`` split at ``mid``.

    ``lower`` approximates the block rows ``mid:``, cols ``:mid``; ``upper``
    the block rows ``:mid``, cols ``mid:``.
    """

    mid: int
    first: Leaf | Split
    second: Leaf | Split
    lower: LowRank
    upper: LowRank

    @property
    def size(self) -> int:
        return self.first.size + self.second.size


def _build(a: np.ndarray, eps: float, leaf_size: int) -> Leaf | Split:
    n = a.shape[0]
    if n <= leaf_size:
        return Leaf(a.copy())
    mid = (n + 1) // 2
    factors = []
    for blk in (a[mid:, :mid], a[:mid, mid:]):
        u, s, v, _ = block_svd(blk, eps)
        factors.append(LowRank(u * s, v))
    return Split(mid, _build(a[:mid, :mid], eps, leaf_size),
                 _build(a[mid:, mid:], eps, leaf_size), *factors)


def _apply(node: Leaf | Split, x: np.ndarray) -> np.ndarray:
    if isinstance(node, Leaf):
        return node.block @ x
    mid = node.mid
    top, bottom = x[:mid], x[mid:]
    out = np.empty((node.size,) + x.shape[1:])
    out[:mid] = _apply(node.first, top) + node.upper.apply(bottom)
    out[mid:] = _apply(node.second, bottom) + node.lower.apply(top)
    return out


def _dense(node: Leaf | Split) -> np.ndarray:
    if isinstance(node, Leaf):
        return node.block.copy()
    mid, n = node.mid, node.size
    out = np.empty((n, n))
    out[:mid, :mid] = _dense(node.first)
    out[mid:, mid:] = _dense(node.second)
    out[mid:, :mid] = node.lower.dense()
    out[:mid, mid:] = node.upper.dense()
    return out


def _walk(node: Leaf | Split):
    if isinstance(node, Split):
        yield node
        yield from _walk(node.first)
        yield from _walk(node.second)


def _flops(node: Leaf | Split) -> int:
    if isinstance(node, Leaf):
        return 2 * node.size * node.size
    return _flops(node.first) + _flops(node.second) + node.lower.flops() + node.upper.flops()


def _depth(node: Leaf | Split) -> int:
    if isinstance(node, Leaf):
        return 0
    return 1 + max(_depth(node.first), _depth(node.second))


@dataclass(frozen=True)
class PLRMatrix:
    size: int
    leaf_size: int
    eps: float
    root: Leaf | Split = field(repr=False)

    @property
    def offdiag_ranks(self) -> list[int]:
        """Ranks of all off-diagonal blocks, in pre-order (lower, upper per node)."""
        ranks = []
        for node in _walk(self.root):
            ranks.extend((node.lower.rank, node.upper.rank))
        return ranks

    @property
    def max_offdiag_rank(self) -> int:
        return max(self.offdiag_ranks, default=0)

    @property
    def depth(self) -> int:
        return _depth(self.root)

    @property
    def flops_per_matvec(self) -> int:
        return _flops(self.root)

    @property
    def error_constant(self) -> float:
        """Constant ``c`` in ``||PLR - A||_2 <= c * eps * ||A||_2``."""
        return 2.0 * math.log2(max(self.size / self.leaf_size, 1.0)) + 1.0

    def to_dense(self) -> np.ndarray:
        return _dense(self.root)

    def matvec(self, x, counter: MatvecCounter | None = None) -> np.ndarray:
        return plr_matvec(self, x, counter)


def plr_build(a, eps: float, leaf_size: int = 16) -> PLRMatrix:
    """Compress a square matrix into PLR form.

    Off-diagonal blocks keep the singular values above ``eps`` times the
    block's own largest singular value.
    """
    a = as_matrix(a)
    if not is_square(a):
        raise ContractError(f"PLR needs a square matrix, got {a.shape}")
    if eps < 0:
        raise ContractError("eps must be >= 0")
    if leaf_size < 1:
        raise ContractError("leaf_size must be >= 1")
    return PLRMatrix(a.shape[0], leaf_size, float(eps), _build(a, eps, leaf_size))


def plr_matvec(a: PLRMatrix, x, counter: MatvecCounter | None = None) -> np.ndarray:
    """Apply a PLR matrix to a vector or to every column of a block."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim not in (1, 2) or x.shape[0] != a.size:
        raise ContractError(f"cannot apply {a.size}x{a.size} PLR matrix to shape {x.shape}")
    if counter is not None:
        counter.add(1 if x.ndim == 1 else x.shape[1], a.flops_per_matvec)
    return _apply(a.root, x)


def plr_power_build(sys, stages: int, eps: float, leaf_size: int = 16,
                    powers: list[np.ndarray] | None = None) -> list[PLRMatrix]:
    """Compress each ``Abar**(2**s)``, ``s < stages``, independently."""
    if stages < 1:
        raise ContractError("stages must be >= 1")
    if powers is None:
        powers = repeated_squares(sys.Abar, stages)
    return [plr_build(p, eps, leaf_size) for p in powers[:stages]]
