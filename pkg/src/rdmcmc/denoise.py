"""Compression-based denoising for additive modulo-M noise.

The noisy signal is quantised by the block annealer under the difference
distortion ``rho(z, y) = log2 1/P_V(z - y)`` at distortion level ``H(V)``;
each output symbol is then chosen by a Bayes decision against the joint
counts of (noisy window, quantised symbol).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .annealer import AnnealerConfig, Schedule, anneal
from .context import as_symbols, infer_alphabet
from .energy import check_distortion, hamming

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class NoiseModel:
    """Additive noise ``Z = X + V mod M`` with ``P(V = a) = pmf[a]``."""

    pmf: tuple

    def __post_init__(self):
        pmf = tuple(float(p) for p in self.pmf)
        if len(pmf) < 2:
            raise ValueError("noise alphabet needs at least two symbols")
        if min(pmf) <= 0:
            raise ValueError("every noise symbol needs positive probability")
        if abs(sum(pmf) - 1.0) > 1e-9:
            raise ValueError("noise pmf must sum to 1")
        object.__setattr__(self, "pmf", pmf)

    @classmethod
    def bsc(cls, delta: float) -> "NoiseModel":
        return cls((1.0 - delta, delta))

    @property
    def M(self) -> int:
        return len(self.pmf)

    @property
    def entropy(self) -> float:
        return -sum(p * math.log2(p) for p in self.pmf)


def difference_distortion(noise: NoiseModel | tuple) -> np.ndarray:
    """``rho[z, y] = log2(1 / P_V((z - y) mod M))``."""
    if not isinstance(noise, NoiseModel):
        noise = NoiseModel(tuple(noise))
    m = noise.M
    diff = (np.arange(m)[:, None] - np.arange(m)[None, :]) % m
    return -np.log2(np.asarray(noise.pmf))[diff]


@dataclass
class SlopeSearchResult:
    alpha: float
    distortion: float
    target: float
    converged: bool
    probes: list = field(default_factory=list)  # (alpha, distortion) in probe order
    monotonicity_violations: int = 0


def _quantize(z, alpha, k, schedule, seed, r, d, table=None):
    cfg = AnnealerConfig(k=k, alpha=alpha, r=r, seed=seed, schedule=schedule, distortion=d,
                         table=table)
    y, _ = anneal(z, cfg)
    return y


def slope_search(z, noise: NoiseModel, k: int, schedule: Schedule, seed: int = 0,
                 tol: float = 0.05, alphas: tuple = (0.5, 1.5), max_probes: int = 8,
                 prefix: int = 10_000, r_per_symbol: int = 10,
                 table_for=None) -> SlopeSearchResult:
    """Secant search for the slope whose quantisation distortion is ``H(V)``.

    Every probe anneals the first ``prefix`` symbols of ``z`` from scratch
    with the same seed, measures the difference distortion against ``z`` and
    updates the linear model of distortion versus slope.  ``table_for(m)``,
    if given, returns ``(table, m')``: a context table for a prefix of about
    ``m`` symbols and the prefix length it actually covers (whole image rows).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    z = as_symbols(z)
    table = None
    if table_for is not None:
        table, prefix = table_for(min(prefix, z.size))
    z = z[:prefix]
    d = difference_distortion(noise)
    target = noise.entropy
    r = int(round(r_per_symbol * z.size))
    probes = []

    def probe(alpha):
        y = _quantize(z, alpha, k, schedule, seed, r, d, table)
        dist = float(d[z, y].mean())
        probes.append((alpha, dist))
        log.debug("slope probe alpha=%.4f distortion=%.4f target=%.4f", alpha, dist, target)
        return dist

    def done(dist):
        return abs(dist - target) <= tol * target

    a_prev, a_cur = alphas
    d_prev = probe(a_prev)
    if not done(d_prev) and max_probes > 1:
        d_cur = probe(a_cur)
        while not done(d_cur) and len(probes) < max_probes:
            if d_cur == d_prev:
                a_next = a_cur * (2.0 if d_cur > target else 0.5)
            else:
                a_next = a_cur + (target - d_cur) * (a_cur - a_prev) / (d_cur - d_prev)
            a_next = min(max(a_next, 0.25 * a_cur, 1e-3), 4.0 * a_cur + 1.0)
            a_prev, d_prev = a_cur, d_cur
            a_cur, d_cur = a_next, probe(a_next)

    order = sorted(probes)
    violations = sum(1 for (a1, d1), (a2, d2) in zip(order, order[1:]) if a2 > a1 and d2 > d1 + 1e-12)
    if violations:
        log.info("distortion increased with slope in %d probe pair(s)", violations)
    best_alpha, best_dist = min(probes, key=lambda p: abs(p[1] - target))
    converged = done(best_dist)
    if not converged:
        log.warning("slope search did not reach tolerance; best alpha=%.4f", best_alpha)
    return SlopeSearchResult(best_alpha, best_dist, target, converged, probes, violations)


def window_table(n: int, m: int) -> np.ndarray:
    """Cyclic window ``z[i-m .. i+m]`` indices, shape (n, 2m+1)."""
    return (np.arange(n)[:, None] + np.arange(-m, m + 1)[None, :]) % n


def derandomize(z, y, m: int = 4, loss=None, window: np.ndarray | None = None,
                alphabet_size: int | None = None) -> np.ndarray:
    """Bayes decision per position against window/quantised-symbol counts.

    ``x_hat[i] = argmin_a sum_y Q[window(z, i), y] * loss[a, y]``; ties go to
    the smallest symbol.  ``window`` overrides the 1-D cyclic window with an
    arbitrary (n, w) index table (``-1`` reads as 0).
    """
    z = as_symbols(z)
    y = as_symbols(y)
    if z.shape != y.shape:
        raise ValueError("noisy and quantised sequences differ in length")
    a = alphabet_size or infer_alphabet(z, y)
    loss = hamming(a) if loss is None else check_distortion(loss)
    if window is None:
        window = window_table(z.size, m)
    zpad = np.append(z, 0)
    code = np.zeros(z.size, dtype=np.int64)
    for j in range(window.shape[1]):
        code = code * a + zpad[window[:, j]]
    uniq, ctx = np.unique(code, return_inverse=True)
    Q = np.zeros((uniq.size, a))
    np.add.at(Q, (ctx, y), 1.0)
    score = Q @ loss.T  # score[c, xhat] = sum_y Q[c, y] * loss[xhat, y]
    return np.argmin(score, axis=1)[ctx].astype(np.int64)


def bayes_fb(z, p: float, delta: float) -> np.ndarray:
    """Symbol-wise MAP estimate for a BSMS(p) observed through a BSC(delta).

    Normalised forward-backward recursions; the prior starts from the
    uniform stationary law.  Posterior ties go to 0.
    """
    z = as_symbols(z, 2)
    n = z.size
    if n == 0:
        return z.copy()
    T = np.array([[1 - p, p], [p, 1 - p]])
    emit = np.array([[1 - delta, delta], [delta, 1 - delta]])  # emit[x, z]
    fwd = np.empty((n, 2))
    f = 0.5 * emit[:, z[0]]
    fwd[0] = f / f.sum()
    for i in range(1, n):
        f = (fwd[i - 1] @ T) * emit[:, z[i]]
        fwd[i] = f / f.sum()
    bwd = np.empty((n, 2))
    bwd[-1] = 0.5
    for i in range(n - 2, -1, -1):
        b = T @ (emit[:, z[i + 1]] * bwd[i + 1])
        bwd[i] = b / b.sum()
    post = fwd * bwd
    post /= post.sum(axis=1, keepdims=True)
    return (post[:, 1] > post[:, 0] + 1e-12).astype(np.int64)


@dataclass
class DenoiseResult:
    x_hat: np.ndarray
    quantized: np.ndarray
    search: SlopeSearchResult | None
    alpha: float


def denoise(z, noise: NoiseModel, k: int = 7, schedule: Schedule | None = None, seed: int = 0,
            m: int = 4, alpha: float | None = None, r_per_symbol: int = 10,
            loss=None, tol: float = 0.05, prefix: int = 10_000, table=None,
            window: np.ndarray | None = None, table_for=None) -> DenoiseResult:
    """Quantise ``z`` at distortion level ``H(V)`` and de-randomise.

    ``alpha=None`` runs :func:`slope_search` first.  ``table`` and ``window``
    switch the context model and de-randomisation window (2-D images);
    ``table_for`` supplies prefix tables to the slope search in that case.
    """
    z = as_symbols(z)
    schedule = schedule or Schedule.logarithmic(2.0, sweep_length=1)
    d = difference_distortion(noise)
    search = None
    if alpha is None:
        if table is not None and table_for is None:
            raise ValueError("slope search on a custom context table needs table_for")
        search = slope_search(z, noise, k, schedule, seed, tol=tol, prefix=prefix,
                              r_per_symbol=r_per_symbol, table_for=table_for)
        alpha = search.alpha
    cfg = AnnealerConfig(k=k, alpha=alpha, r=int(round(r_per_symbol * z.size)), seed=seed,
                         schedule=schedule, distortion=d, table=table)
    y, _ = anneal(z, cfg)
    x_hat = derandomize(z, y, m, loss, window, noise.M)
    return DenoiseResult(x_hat, y, search, alpha)
