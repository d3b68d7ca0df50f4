"""Distortion measures and the fixed-slope energy ``n * (H_k + alpha * d_n)``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .context import LINEAR, ContextTable, CountMatrix, as_symbols, build_counts


def hamming(m: int = 2) -> np.ndarray:
    return 1.0 - np.eye(m)


def check_distortion(d) -> np.ndarray:
    d = np.ascontiguousarray(d, dtype=np.float64)
    if d.ndim != 2:
        raise ValueError("distortion must be a (source, reconstruction) matrix")
    if np.any(d < 0) or not np.all(np.isfinite(d)):
        raise ValueError("distortion entries must be finite and non-negative")
    return d


@dataclass(frozen=True)
class EnergySpec:
    """Slope (bits per unit distortion), context order and loss matrix."""

    alpha: float
    k: int
    d: np.ndarray
    boundary: str = LINEAR

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("slope alpha must be non-negative")
        if self.k < 0:
            raise ValueError("context order must be non-negative")
        object.__setattr__(self, "d", check_distortion(self.d))

    @property
    def alphabet_size(self) -> int:
        return self.d.shape[1]


def distortion(x, y, d=None) -> float:
    """Per-symbol average loss ``(1/n) sum d(x_i, y_i)``."""
    x = as_symbols(x)
    y = as_symbols(y)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    if d is None:
        d = hamming(max(2, int(max(x.max(), y.max())) + 1))
    d = check_distortion(d)
    return float(d[x, y].mean())


def energy(y, x, spec: EnergySpec, table: ContextTable | None = None) -> float:
    """Full recompute of ``n * H_k(y) + alpha * sum d(x_i, y_i)``."""
    x = as_symbols(x)
    y = as_symbols(y)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    cm = build_counts(y, spec.k, spec.boundary, spec.alphabet_size, table)
    n = y.size
    return n * cm.code_length() / cm.total + spec.alpha * float(spec.d[x, y].sum())


def delta_energy(cm: CountMatrix, y: np.ndarray, i: int, b: int, x, spec: EnergySpec) -> float:
    """Energy change of setting ``y[i] = b``; ``cm`` and ``y`` are left unchanged."""
    cur = int(y[i])
    if b == cur:
        return 0.0
    t = cm.table
    args = (cm.counts, cm.coltot, cm.xl, t.ctx, t.aff_ptr, t.aff_idx)
    df = _kernels.flip(y, *args, int(i), int(b), cm.alphabet_size)
    _kernels.flip(y, *args, int(i), cur, cm.alphabet_size)
    n = len(y)
    return n * df / cm.total + spec.alpha * (spec.d[x[i], b] - spec.d[x[i], cur])
