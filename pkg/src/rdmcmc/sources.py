"""Synthetic binary sources, the binary symmetric channel, and reference R(D) curves."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SourceSpec:
    kind: str  # "bernoulli" or "bsms"
    p: float
    n: int
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("bernoulli", "bsms"):
            raise ValueError(f"unknown source kind {self.kind!r}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if self.n < 0:
            raise ValueError("n must be non-negative")


def generate(spec: SourceSpec) -> np.ndarray:
    """Draw ``spec.n`` symbols.  A BSMS starts from its uniform stationary law."""
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "bernoulli":
        return (rng.random(spec.n) < spec.p).astype(np.int64)
    if spec.n == 0:
        return np.zeros(0, dtype=np.int64)
    x0 = rng.integers(0, 2)
    flips = (rng.random(spec.n - 1) < spec.p).astype(np.int64)
    return (x0 + np.concatenate([[0], np.cumsum(flips)])) % 2


def bernoulli(p: float, n: int, seed: int = 0) -> np.ndarray:
    return generate(SourceSpec("bernoulli", p, n, seed))


def bsms(p: float, n: int, seed: int = 0) -> np.ndarray:
    return generate(SourceSpec("bsms", p, n, seed))


def bsc(x, delta: float, seed: int = 0) -> np.ndarray:
    """Flip each bit independently with probability ``delta``."""
    if not 0.0 <= delta <= 1.0:
        raise ValueError("crossover probability must lie in [0, 1]")
    x = np.asarray(x, dtype=np.int64)
    rng = np.random.default_rng(seed)
    return x ^ (rng.random(x.shape) < delta).astype(np.int64)


def h2(p: float) -> float:
    """Binary entropy in bits."""
    if p < 0 or p > 1:
        raise ValueError("probability outside [0, 1]")
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def rd_bernoulli(p: float, D: float) -> float:
    """R(D) of a Bern(p) source under Hamming loss."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    if D < 0:
        raise ValueError("distortion must be non-negative")
    if D >= min(p, 1 - p):
        return 0.0
    return max(h2(p) - h2(D), 0.0)


def slb_bsms(p: float, D: float) -> float:
    """Shannon lower bound ``h(p) - h(D)`` for a BSMS(p), clamped at 0."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    if not 0 <= D <= 0.5:
        raise ValueError("distortion must lie in [0, 1/2]")
    return max(h2(p) - h2(D), 0.0)


def critical_distortion(p: float) -> float:
    """Largest D for which the Shannon lower bound of a BSMS(p) is tight."""
    if not 0 < p < 0.5:
        raise ValueError("critical distortion needs 0 < p < 1/2")
    q = 1 - p
    return 0.5 * (1 - math.sqrt(1 - (p / q) ** 2))


def min_cost_bernoulli(p: float, alpha: float, grid: int = 20001) -> float:
    """``min_D [R(D) + alpha D]`` for Bern(p), evaluated on a fine grid of D."""
    Ds = np.linspace(0.0, min(p, 1 - p), grid)
    return float(min(rd_bernoulli(p, D) + alpha * D for D in Ds))
