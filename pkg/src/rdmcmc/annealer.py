"""Simulated-annealing Gibbs sampler over reconstruction sequences.

Randomness comes from two independent PCG64 streams spawned from
``numpy.random.SeedSequence(seed)``: stream 0 draws positions, stream 1 the
uniforms used for inverse-CDF symbol sampling.  Draws are generated in
fixed-size chunks, so a run is a pure function of (seed, config, x).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from . import _kernels
from .context import LINEAR, ContextTable, CountMatrix, as_symbols, build_counts, infer_alphabet
from .energy import EnergySpec, check_distortion, hamming

CHUNK = 1 << 16
BETA_CAP = 1e12


@dataclass(frozen=True)
class Schedule:
    """Inverse-temperature law ``beta_t`` for ``t = 1, 2, ...``.

    logarithmic: ``log(floor(t / L) + 1) / T0``
    geometric:   ``beta0 * (1/gamma) ** ceil(t / L)``

    ``L`` is the sweep length; ``None`` means "the length of the sequence
    being annealed" (``K_f`` for sliding-block codes).
    """

    kind: str
    T0: float = 1.0
    beta0: float = 1.0
    gamma: float = 0.75
    sweep_length: int | None = None

    def __post_init__(self):
        if self.kind == "logarithmic":
            if not self.T0 > 0:
                raise ValueError("T0 must be positive")
        elif self.kind == "geometric":
            if not 0 < self.gamma < 1:
                raise ValueError("gamma must lie in (0, 1)")
            if self.beta0 < 0:
                raise ValueError("beta0 must be non-negative")
        else:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.sweep_length is not None and self.sweep_length < 1:
            raise ValueError("sweep length must be positive")

    @classmethod
    def logarithmic(cls, T0: float, sweep_length: int | None = None) -> "Schedule":
        return cls("logarithmic", T0=T0, sweep_length=sweep_length)

    @classmethod
    def geometric(cls, gamma: float = 0.75, beta0: float = 1.0,
                  sweep_length: int | None = None) -> "Schedule":
        return cls("geometric", beta0=beta0, gamma=gamma, sweep_length=sweep_length)

    def betas(self, t: np.ndarray, n: int) -> np.ndarray:
        L = self.sweep_length or n
        t = np.asarray(t, dtype=np.int64)
        if self.kind == "logarithmic":
            out = np.log(t // L + 1.0) / self.T0
        else:
            sweeps = -(-t // L)
            with np.errstate(over="ignore"):
                out = self.beta0 * np.power(1.0 / self.gamma, sweeps.astype(np.float64))
        return np.minimum(out, BETA_CAP)


def delta_bound(n: int, k: int, alpha: float, alphabet_size: int = 2, d=None) -> float:
    """Upper bound on ``|Delta E|`` for any single-symbol change."""
    dmax = 1.0 if d is None else float(np.max(d))
    return alpha * dmax + 2 * (k + 1) * (math.log2(max(n, 1)) + math.log2(alphabet_size))


def default_T0(n: int, k: int, alpha: float, alphabet_size: int = 2, d=None,
               c: float = 1.1) -> float:
    return c * n * delta_bound(n, k, alpha, alphabet_size, d)


@dataclass
class AnnealerConfig:
    k: int
    alpha: float
    r: int
    seed: int = 0
    schedule: Schedule = field(default_factory=Schedule.geometric)
    init: str = "source"
    init_sequence: np.ndarray | None = None
    distortion: np.ndarray | None = None
    alphabet_size: int | None = None
    table: ContextTable | None = None
    boundary: str = LINEAR
    trace_stride: int | None = None

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("iteration count r must be non-negative")
        if self.init not in ("source", "given"):
            raise ValueError("init must be 'source' or 'given'")
        if self.init == "given" and self.init_sequence is None:
            raise ValueError("init='given' needs init_sequence")


@dataclass
class RunTrace:
    alpha: float
    n: int
    stride: int
    t: list = field(default_factory=list)
    hk: list = field(default_factory=list)
    dn: list = field(default_factory=list)
    energy: list = field(default_factory=list)

    def record(self, t: int, hk: float, dn: float):
        self.t.append(int(t))
        self.hk.append(hk)
        self.dn.append(dn)
        self.energy.append(self.n * (hk + self.alpha * dn))

    def rows(self) -> Iterator[tuple]:
        return zip(self.t, self.hk, self.dn, self.energy)

    def write_csv(self, path_or_file):
        header = ("iteration", "Hk_bits", "distortion", "energy")
        if hasattr(path_or_file, "write"):
            w = csv.writer(path_or_file)
            w.writerow(header)
            w.writerows(self.rows())
            return
        with open(path_or_file, "w", newline="") as fh:
            self.write_csv(fh)


def random_streams(seed: int, n_streams: int = 2) -> list[np.random.Generator]:
    return [np.random.Generator(np.random.PCG64(s))
            for s in np.random.SeedSequence(seed).spawn(n_streams)]


class _BlockState:
    """Reconstruction, its counts and the energy parameters for one chain."""

    def __init__(self, x, y, k, alpha, d, base, table):
        self.x = x
        self.y = y
        self.cm = build_counts(y, k, alphabet_size=base, table=table)
        self.d = d
        self.alpha = float(alpha)
        self.base = base
        self.n = len(y)
        self.scale = self.n / self.cm.total

    def hk(self) -> float:
        return self.cm.code_length() / self.cm.total

    def dn(self) -> float:
        return float(self.d[self.x, self.y].mean())

    def run(self, positions, uniforms, betas):
        cm, t = self.cm, self.cm.table
        _kernels.anneal_block(self.y, self.x, cm.counts, cm.coltot, cm.xl, t.ctx,
                              t.aff_ptr, t.aff_idx, self.d, self.alpha, self.scale,
                              self.base, positions, uniforms, betas)


def _setup(x, config: AnnealerConfig):
    x = as_symbols(x)
    if config.distortion is not None:
        d = check_distortion(config.distortion)
        base = d.shape[1]
    else:
        base = config.alphabet_size or infer_alphabet(x)
        d = hamming(base)
    if x.size and x.max() >= d.shape[0]:
        raise ValueError("source symbol outside the distortion matrix")
    if config.init == "given":
        y = as_symbols(config.init_sequence, base).copy()
        if y.shape != x.shape:
            raise ValueError("initial sequence length differs from the source")
    else:
        if x.size and x.max() >= base:
            raise ValueError("source-copy init needs source symbols in the reconstruction alphabet")
        y = x.copy()
    table = config.table
    if table is None:
        table = ContextTable.for_mode(len(x), config.k, config.boundary)
    return _BlockState(x, y, config.k, config.alpha, d, base, table)


def anneal(x, config: AnnealerConfig) -> tuple[np.ndarray, RunTrace]:
    """Run the heat-bath chain for ``config.r`` iterations.

    Each iteration draws a position uniformly, resamples it from its exact
    conditional under ``exp(-beta_t * E)`` and updates the counts in place.
    Returns the final reconstruction and a trace sampled every
    ``config.trace_stride`` iterations (default: once per sweep of n).
    """
    st = _setup(x, config)
    n = st.n
    stride = config.trace_stride or n
    trace = RunTrace(config.alpha, n, stride)
    trace.record(0, st.hk(), st.dn())
    pos_rng, sym_rng = random_streams(config.seed)
    t = 0
    while t < config.r:
        step = min(CHUNK, config.r - t, stride - t % stride)
        positions = pos_rng.integers(0, n, size=step, dtype=np.int64)
        uniforms = sym_rng.random(step)
        betas = config.schedule.betas(np.arange(t + 1, t + step + 1), n)
        st.run(positions, uniforms, betas)
        t += step
        if t % stride == 0 or t == config.r:
            trace.record(t, st.hk(), st.dn())
    return st.y, trace


def gibbs_conditional(cm: CountMatrix, y: np.ndarray, i: int, beta: float, x,
                      spec: EnergySpec) -> np.ndarray:
    """Conditional pmf of ``y[i]`` given the rest under ``exp(-beta * E)``."""
    if beta < 0:
        raise ValueError("beta must be non-negative")
    x = as_symbols(x)
    t = cm.table
    de = np.empty(cm.alphabet_size)
    _kernels.block_deltas(y, x, cm.counts, cm.coltot, cm.xl, t.ctx, t.aff_ptr,
                          t.aff_idx, spec.d, float(spec.alpha), len(y) / cm.total,
                          int(i), cm.alphabet_size, de)
    logits = -beta * de
    logits -= logits.max()
    w = np.exp(logits)
    return w / w.sum()


class SearchTooLarge(ValueError):
    pass


def exhaustive_search(x, k: int, alpha: float, d=None, alphabet_size: int | None = None,
                      boundary: str = LINEAR, table: ContextTable | None = None,
                      max_bits: float = 24.0) -> tuple[np.ndarray, float]:
    """Global minimiser of ``n * (H_k(y) + alpha * d_n(x, y))`` by enumeration.

    Candidates are visited in lexicographic order (position 0 most
    significant) and the first one within 1e-9 of the minimum wins.
    """
    x = as_symbols(x)
    n = x.size
    if d is None:
        base = alphabet_size or infer_alphabet(x)
        d = hamming(base)
    d = check_distortion(d)
    base = d.shape[1]
    if n * math.log2(base) > max_bits:
        raise SearchTooLarge(f"|alphabet|^n = {base}^{n} is too many candidates")
    if table is None:
        table = ContextTable.for_mode(n, k, boundary)
    rows = np.flatnonzero(table.counted)
    n_ctx = base ** table.k
    n_cells = n_ctx * base
    weights = base ** np.arange(n - 1, -1, -1, dtype=np.int64)
    scale = n / table.total
    best_e, best_idx = math.inf, -1
    total = base ** n
    step = max(1, min(total, (1 << 22) // max(n_cells, 1)))
    for start in range(0, total, step):
        idx = np.arange(start, min(total, start + step), dtype=np.int64)
        Y = (idx[:, None] // weights[None, :]) % base
        Ypad = np.concatenate([Y, np.zeros((Y.shape[0], 1), np.int64)], axis=1)
        code = np.zeros((Y.shape[0], rows.size), dtype=np.int64)
        mult = 1
        for j in range(table.k):
            code += Ypad[:, table.ctx[rows, j]] * mult
            mult *= base
        cells = code * base + Y[:, rows]
        flat = cells + (np.arange(Y.shape[0]) * n_cells)[:, None]
        counts = np.bincount(flat.ravel(), minlength=Y.shape[0] * n_cells)
        counts = counts.reshape(Y.shape[0], n_ctx, base).astype(np.float64)
        col = counts.sum(axis=2)
        with np.errstate(divide="ignore", invalid="ignore"):
            fc = np.where(counts > 0, counts * np.log2(counts), 0.0).sum(axis=(1, 2))
            fn = np.where(col > 0, col * np.log2(col), 0.0).sum(axis=1)
        e = scale * (fn - fc) + alpha * d[x[None, :], Y].sum(axis=1)
        j = int(np.argmin(e))
        if e[j] < best_e - 1e-9:
            best_e = float(e[j])
            best_idx = int(idx[np.flatnonzero(e <= e[j] + 1e-9)[0]])
    y_star = (best_idx // weights) % base
    return y_star.astype(np.int64), best_e

