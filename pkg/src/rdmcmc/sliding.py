"""Sliding-block codes found by annealing over the code table.

A code of half-window ``k_f`` maps every window ``x[i-k_f .. i+k_f]``
(cyclic) to a reconstruction symbol.  Windows are packed as
``sum_j b_j * A**j`` with ``b_0 = x[i-k_f]``, so the code is a vector ``f``
of length ``K_f = A**(2k_f+1)`` and ``y_i = f[label_i]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .annealer import CHUNK, Schedule, delta_bound, random_streams
from .context import CYCLIC, ContextTable, CountMatrix, as_symbols, build_counts, infer_alphabet
from .energy import check_distortion, hamming


@dataclass
class SBCode:
    k_f: int
    alphabet_size: int
    f: np.ndarray

    def __post_init__(self):
        self.f = np.ascontiguousarray(self.f, dtype=np.int64)
        if self.f.shape != (self.K_f,):
            raise ValueError(f"code table must have {self.K_f} entries")

    @property
    def K_f(self) -> int:
        return self.alphabet_size ** (2 * self.k_f + 1)

    @classmethod
    def identity(cls, k_f: int, alphabet_size: int = 2) -> "SBCode":
        idx = np.arange(alphabet_size ** (2 * k_f + 1))
        return cls(k_f, alphabet_size, (idx // alphabet_size ** k_f) % alphabet_size)

    @classmethod
    def constant(cls, k_f: int, symbol: int, alphabet_size: int = 2) -> "SBCode":
        return cls(k_f, alphabet_size, np.full(alphabet_size ** (2 * k_f + 1), symbol))

    def copy(self) -> "SBCode":
        return SBCode(self.k_f, self.alphabet_size, self.f.copy())


@dataclass
class LabelSequence:
    k_f: int
    alphabet_size: int
    labels: np.ndarray
    mem_ptr: np.ndarray
    mem_idx: np.ndarray

    @property
    def K_f(self) -> int:
        return self.alphabet_size ** (2 * self.k_f + 1)

    def positions(self, label: int) -> np.ndarray:
        return self.mem_idx[self.mem_ptr[label]:self.mem_ptr[label + 1]]

    def histogram(self) -> np.ndarray:
        return np.diff(self.mem_ptr)


def label_sequence(x, k_f: int, alphabet_size: int | None = None) -> LabelSequence:
    x = as_symbols(x)
    if x.size < 1:
        raise ValueError("empty sequence")
    a = alphabet_size or infer_alphabet(x)
    labels = np.zeros(x.size, dtype=np.int64)
    for j in range(2 * k_f + 1):
        labels += np.roll(x, k_f - j) * a ** j
    K = a ** (2 * k_f + 1)
    order = np.argsort(labels, kind="stable")
    ptr = np.zeros(K + 1, dtype=np.int64)
    ptr[1:] = np.cumsum(np.bincount(labels, minlength=K))
    return LabelSequence(k_f, a, labels, ptr, np.ascontiguousarray(order, dtype=np.int64))


def apply_sb(x, code: SBCode, labels: LabelSequence | None = None) -> np.ndarray:
    if labels is None:
        labels = label_sequence(x, code.k_f, code.alphabet_size)
    return code.f[labels.labels]


def sb_flip_update(cm: CountMatrix, y: np.ndarray, labels: LabelSequence, code: SBCode,
                   i: int, theta: int) -> np.ndarray:
    """Set ``f[i] = theta``: rewrite every position labelled ``i`` in ``y`` and
    move the affected counts in one batch.  Returns the rewritten positions.
    """
    pos = labels.positions(i)
    if code.f[i] == theta or pos.size == 0:
        code.f[i] = theta
        return pos[:0]
    t = cm.table
    stamp = np.zeros(len(y), dtype=np.int64)
    buf = np.empty(len(y), dtype=np.int64)
    _kernels.sb_flip(y, cm.counts, cm.coltot, cm.xl, t.ctx, t.aff_ptr, t.aff_idx,
                     labels.mem_ptr, labels.mem_idx, int(i), int(theta),
                     cm.alphabet_size, stamp, buf, 1)
    code.f[i] = theta
    return pos


def sb_energy(x, code: SBCode, k: int, alpha: float, d=None) -> float:
    """``n * H_k(y) + alpha * sum d(x_i, y_i)`` for ``y = apply_sb(x, code)`` (cyclic counts)."""
    x = as_symbols(x)
    d = hamming(code.alphabet_size) if d is None else check_distortion(d)
    y = apply_sb(x, code)
    cm = build_counts(y, k, CYCLIC, d.shape[1])
    return cm.code_length() + alpha * float(d[x, y].sum())


def sb_delta_bound(x, k_f: int, k: int, alpha: float, alphabet_size: int = 2, d=None) -> float:
    """Per-coordinate energy-change bound: largest label class times the
    single-symbol bound."""
    labels = label_sequence(x, k_f, alphabet_size)
    return int(labels.histogram().max()) * delta_bound(len(x), k, alpha, alphabet_size, d)


def sb_anneal(x, k_f: int, k: int, alpha: float, schedule: Schedule, r: int, seed: int = 0,
              d=None, init: SBCode | None = None) -> SBCode:
    """Heat-bath sampler over code entries.

    Each iteration draws an entry uniformly from ``0..K_f-1``, evaluates the
    energy of every replacement value (batch count update, then undo) and
    samples the new value at inverse temperature ``beta_t``.  The default
    sweep length of ``schedule`` is ``K_f``.
    """
    x = as_symbols(x)
    if r < 0:
        raise ValueError("iteration count r must be non-negative")
    if d is None:
        base = infer_alphabet(x)
        d = hamming(base)
    d = check_distortion(d)
    a_in, base = d.shape
    labels = label_sequence(x, k_f, a_in)
    code = SBCode.identity(k_f, a_in) if init is None else init.copy()
    if code.alphabet_size != a_in or code.k_f != k_f:
        raise ValueError("initial code does not match k_f / alphabet")
    if code.f.max() >= base:
        raise ValueError("initial code uses symbols outside the reconstruction alphabet")
    if r == 0:
        return code
    n = x.size
    y = code.f[labels.labels].copy()
    table = ContextTable.cyclic(n, k)
    cm = build_counts(y, k, alphabet_size=base, table=table)
    K = labels.K_f
    # class_dist[l, th] = sum over positions labelled l of d(x_j, th)
    class_dist = np.zeros((K, base))
    for th in range(base):
        np.add.at(class_dist[:, th], labels.labels, d[x, th])
    stamp = np.zeros(n, dtype=np.int64)
    buf = np.empty(n, dtype=np.int64)
    label_rng, sym_rng = random_streams(seed)
    tick = 0
    t = 0
    while t < r:
        step = min(CHUNK, r - t)
        drawn = label_rng.integers(0, K, size=step, dtype=np.int64)
        uniforms = sym_rng.random(step)
        betas = schedule.betas(np.arange(t + 1, t + step + 1), K)
        tick = _kernels.anneal_sb(code.f, y, cm.counts, cm.coltot, cm.xl, table.ctx,
                                  table.aff_ptr, table.aff_idx, labels.mem_ptr,
                                  labels.mem_idx, class_dist, float(alpha), 1.0, base,
                                  drawn, uniforms, betas, stamp, buf, tick)
        t += step
    return code


def enumerate_sb_codes(x, k_f: int, k: int, alpha: float, d=None,
                       max_bits: float = 20.0) -> tuple[SBCode, float]:
    """Minimum-energy code by brute force over all ``|Y|**K_f`` tables.

    Only entries whose label occurs in ``x`` influence the energy, so the
    search runs over those and fills the rest from the identity code.
    """
    x = as_symbols(x)
    d = hamming(infer_alphabet(x)) if d is None else check_distortion(d)
    a_in, base = d.shape
    labels = label_sequence(x, k_f, a_in)
    present = np.flatnonzero(labels.histogram())
    if present.size * math.log2(base) > max_bits:
        raise ValueError("too many code tables to enumerate")
    best = None
    best_e = math.inf
    code = SBCode.identity(k_f, a_in)
    for idx in range(base ** present.size):
        v = idx
        for lab in present[::-1]:
            code.f[lab] = v % base
            v //= base
        e = sb_energy(x, code, k, alpha, d)
        if e < best_e - 1e-9:
            best_e, best = e, code.copy()
    return best, best_e
