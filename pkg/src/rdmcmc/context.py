"""Empirical count matrices and conditional empirical entropy.

A sequence ``y`` over ``{0, ..., A-1}`` is summarised by the counts of
(context, symbol) pairs, where the context of a position is read through a
:class:`ContextTable`.  ``H_k`` is the entropy of the next symbol given its
context under those empirical counts, in bits.

Contexts are packed into integers as ``sum_j y[ctx[p, j]] * A**j`` with
``j = 0`` the nearest neighbour.  In 1-D that means the tuple
``(y[p-k], ..., y[p-1])`` packs with ``y[p-1]`` as the least significant
digit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels

LINEAR = "linear"
CYCLIC = "cyclic"

#: Largest dense count matrix we are willing to allocate (cells).
MAX_CELLS = 1 << 24


class ContextTable:
    """Where each counted position reads its context from.

    Attributes
    ----------
    ctx : (n, k) int64 array, ``-1`` means "outside, read as 0"
    counted : (n,) bool array, positions that contribute a count
    aff_ptr, aff_idx : CSR lists; ``aff_idx[aff_ptr[i]:aff_ptr[i+1]]`` are the
        counted positions whose cell changes when ``y[i]`` changes
        (``i`` itself included when counted).
    """

    def __init__(self, ctx: np.ndarray, counted: np.ndarray, mode: str = "custom"):
        ctx = np.ascontiguousarray(ctx, dtype=np.int64)
        if ctx.ndim != 2:
            raise ValueError("context table must be 2-D (n, k)")
        n = ctx.shape[0]
        counted = np.ascontiguousarray(counted, dtype=bool)
        if counted.shape != (n,):
            raise ValueError("counted mask must have one entry per position")
        if ctx.size and (ctx.max() >= n or ctx.min() < -1):
            raise ValueError("context index out of range")
        self.ctx = ctx
        self.counted = counted
        self.mode = mode
        self.aff_ptr, self.aff_idx = self._affected(ctx, counted)

    @staticmethod
    def _affected(ctx, counted):
        n, k = ctx.shape
        rows = np.flatnonzero(counted)
        src = [rows]
        dst = [rows]
        for j in range(k):
            q = ctx[rows, j]
            ok = q >= 0
            src.append(q[ok])
            dst.append(rows[ok])
        src = np.concatenate(src)
        dst = np.concatenate(dst)
        pairs = np.unique(np.stack([src, dst], axis=1), axis=0) if src.size else np.empty((0, 2), np.int64)
        ptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(ptr, pairs[:, 0] + 1, 1)
        return np.cumsum(ptr), np.ascontiguousarray(pairs[:, 1], dtype=np.int64)

    @property
    def n(self) -> int:
        return self.ctx.shape[0]

    @property
    def k(self) -> int:
        return self.ctx.shape[1]

    @property
    def total(self) -> int:
        return int(self.counted.sum())

    def affected(self, i: int) -> np.ndarray:
        return self.aff_idx[self.aff_ptr[i]:self.aff_ptr[i + 1]]

    @classmethod
    def linear(cls, n: int, k: int) -> "ContextTable":
        """Previous ``k`` symbols; only positions ``k..n-1`` are counted."""
        if n <= k:
            raise ValueError(f"sequence of length {n} is too short for order k={k}")
        p = np.arange(n)[:, None]
        ctx = p - 1 - np.arange(k)[None, :]
        ctx[ctx < 0] = -1
        counted = np.arange(n) >= k
        return cls(ctx.reshape(n, k), counted, LINEAR)

    @classmethod
    def cyclic(cls, n: int, k: int) -> "ContextTable":
        """Previous ``k`` symbols with ``y[i] = y[i+n]``; every position counted."""
        if n < 1:
            raise ValueError("empty sequence")
        p = np.arange(n)[:, None]
        ctx = (p - 1 - np.arange(k)[None, :]) % n
        return cls(ctx.reshape(n, k), np.ones(n, dtype=bool), CYCLIC)

    @classmethod
    def raster(cls, height: int, width: int,
               offsets: Sequence[tuple[int, int]]) -> "ContextTable":
        """2-D context from (row, col) offsets; pixels off the image read as 0."""
        for dr, dc in offsets:
            if not (dr < 0 or (dr == 0 and dc < 0)):
                raise ValueError(f"offset {(dr, dc)} is not causal in raster order")
        rr, cc = np.divmod(np.arange(height * width), width)
        cols = []
        for dr, dc in offsets:
            r2, c2 = rr + dr, cc + dc
            inside = (r2 >= 0) & (r2 < height) & (c2 >= 0) & (c2 < width)
            cols.append(np.where(inside, r2 * width + c2, -1))
        ctx = np.stack(cols, axis=1) if cols else np.empty((height * width, 0), np.int64)
        return cls(ctx, np.ones(height * width, dtype=bool), "raster")

    @classmethod
    def for_mode(cls, n: int, k: int, mode: str) -> "ContextTable":
        if mode == LINEAR:
            return cls.linear(n, k)
        if mode == CYCLIC:
            return cls.cyclic(n, k)
        raise ValueError(f"unknown boundary mode {mode!r}")


def _xlogx_table(total: int) -> np.ndarray:
    c = np.arange(total + 2, dtype=np.float64)
    out = np.zeros_like(c)
    out[1:] = c[1:] * np.log2(c[1:])
    return out


def packed_codes(y: np.ndarray, table: ContextTable, base: int) -> np.ndarray:
    """Packed context of every counted position (vectorised)."""
    rows = np.flatnonzero(table.counted)
    code = np.zeros(rows.size, dtype=np.int64)
    mult = 1
    ypad = np.append(y, 0)  # index -1 reads the trailing 0
    for j in range(table.k):
        code += ypad[table.ctx[rows, j]] * mult
        mult *= base
    return code


@dataclass
class CountMatrix:
    """(context, symbol) counts of a sequence under a context table.

    ``counts[b, s]`` is the number of counted positions with packed context
    ``b`` and symbol ``s``.  Mutated only through :meth:`apply_flip` (or the
    sliding-block batch update), which keep ``counts`` consistent with the
    sequence they were built from.
    """

    k: int
    alphabet_size: int
    counts: np.ndarray
    total: int
    boundary_mode: str
    table: ContextTable = field(repr=False)
    coltot: np.ndarray = field(init=False, repr=False)
    xl: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.coltot = self.counts.sum(axis=1)
        self.xl = _xlogx_table(self.total)

    def copy(self) -> "CountMatrix":
        return CountMatrix(self.k, self.alphabet_size, self.counts.copy(),
                           self.total, self.boundary_mode, self.table)

    def as_dict(self) -> dict:
        """Non-zero cells keyed by ``(context tuple, symbol)``.

        The context tuple is in reading order, farthest neighbour first:
        ``(y[p-k], ..., y[p-1])`` for 1-D tables.
        """
        out = {}
        a = self.alphabet_size
        for b, s in zip(*np.nonzero(self.counts)):
            digits = []
            v = int(b)
            for _ in range(self.k):
                digits.append(v % a)
                v //= a
            out[(tuple(reversed(digits)), int(s))] = int(self.counts[b, s])
        return out

    def code_length(self) -> float:
        """Total ``total * H_k`` in bits, evaluated from the integer counts."""
        c = self.counts[self.counts > 0].astype(np.float64)
        col = self.coltot[self.coltot > 0].astype(np.float64)
        return float(np.sum(col * np.log2(col)) - np.sum(c * np.log2(c)))

    def entropy(self) -> float:
        return conditional_entropy(self)

    def apply_flip(self, y: np.ndarray, i: int, b: int) -> float:
        """Replace ``y[i]`` by ``b`` in place, update counts, return the change of H_k."""
        if not 0 <= b < self.alphabet_size:
            raise ValueError(f"symbol {b} outside alphabet of size {self.alphabet_size}")
        if y[i] == b:
            return 0.0
        t = self.table
        df = _kernels.flip(y, self.counts, self.coltot, self.xl, t.ctx,
                           t.aff_ptr, t.aff_idx, int(i), int(b), self.alphabet_size)
        return df / self.total


def infer_alphabet(*seqs) -> int:
    return max(2, max(int(np.max(s)) + 1 for s in seqs if len(s)))


def as_symbols(y, alphabet_size: int | None = None) -> np.ndarray:
    arr = np.ascontiguousarray(y, dtype=np.int64)
    if arr.ndim != 1:
        raise ValueError("expected a 1-D symbol sequence")
    if arr.size and arr.min() < 0:
        raise ValueError("symbols must be non-negative")
    if alphabet_size is not None and arr.size and arr.max() >= alphabet_size:
        raise ValueError(f"symbol {arr.max()} outside alphabet of size {alphabet_size}")
    return arr


def build_counts(y, k: int = 0, mode: str = LINEAR, alphabet_size: int | None = None,
                 table: ContextTable | None = None) -> CountMatrix:
    """Count matrix of ``y`` from scratch.

    ``mode`` is ``"linear"`` (positions ``k..n-1`` counted, total ``n-k``) or
    ``"cyclic"`` (all positions, wrap-around contexts).  Passing ``table``
    overrides both ``k`` and ``mode``.
    """
    y = as_symbols(y)
    if alphabet_size is None:
        alphabet_size = infer_alphabet(y)
    y = as_symbols(y, alphabet_size)
    if table is None:
        table = ContextTable.for_mode(len(y), k, mode)
    elif table.n != len(y):
        raise ValueError("context table does not match the sequence length")
    k = table.k
    n_ctx = alphabet_size ** k
    if n_ctx * alphabet_size > MAX_CELLS:
        raise ValueError(f"alphabet {alphabet_size} with order {k} needs too many cells")
    codes = packed_codes(y, table, alphabet_size)
    cells = codes * alphabet_size + y[table.counted]
    counts = np.bincount(cells, minlength=n_ctx * alphabet_size)
    counts = counts.reshape(n_ctx, alphabet_size).astype(np.int64)
    return CountMatrix(k, alphabet_size, counts, table.total, table.mode, table)


def entropy_functional(v) -> float:
    """Entropy in bits of the pmf proportional to a non-negative vector."""
    v = np.asarray(v, dtype=np.float64)
    if np.any(v < 0):
        raise ValueError("entropy functional needs non-negative components")
    s = v.sum()
    if s == 0:
        return 0.0
    p = v[v > 0] / s
    return float(-np.sum(p * np.log2(p)))


def conditional_entropy(cm: CountMatrix) -> float:
    if cm.total <= 0:
        raise ValueError("conditional entropy of an empty count matrix")
    return cm.code_length() / cm.total


@dataclass(frozen=True)
class CellMove:
    position: int
    old: tuple  # (context tuple, symbol)
    new: tuple


@dataclass(frozen=True)
class ContextDelta:
    moves: tuple[CellMove, ...] = ()

    @property
    def cell_changes(self) -> int:
        return 2 * len(self.moves)

    def __len__(self):
        return len(self.moves)


def _context_tuple(y, table: ContextTable, p: int) -> tuple:
    vals = [int(y[q]) if q >= 0 else 0 for q in table.ctx[p]]
    return tuple(reversed(vals))


def affected_contexts(cm: CountMatrix, y, i: int, b: int) -> ContextDelta:
    """Count moves that replacing ``y[i]`` by ``b`` would cause."""
    if y[i] == b:
        return ContextDelta()
    table = cm.table
    after = np.array(y, copy=True)
    after[i] = b
    moves = []
    for p in table.affected(i):
        p = int(p)
        moves.append(CellMove(p, (_context_tuple(y, table, p), int(y[p])),
                              (_context_tuple(after, table, p), int(after[p]))))
    return ContextDelta(tuple(moves))


def apply_flip(cm: CountMatrix, y: np.ndarray, i: int, b: int) -> tuple[CountMatrix, float]:
    """Functional form of :meth:`CountMatrix.apply_flip` (mutates ``cm`` and ``y``)."""
    dh = cm.apply_flip(y, i, b)
    return cm, dh
