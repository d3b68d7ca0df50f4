"""Compiled inner loops shared by the block and sliding-block annealers.

All kernels work on a flat reconstruction ``y`` plus a *context table*
``ctx`` of shape (n, k): ``ctx[p, j]`` is the index of the j-th context
symbol of position ``p`` (``-1`` reads as symbol 0).  Counts live in a dense
``(base**k, base)`` int64 matrix together with its column totals.

The quantity tracked incrementally is the total code length in bits

    F = sum_b f(N_b) - sum_{b,s} f(c_{b,s}),   f(c) = c*log2(c),

so that ``H_k = F / total``.  ``xl`` is a lookup table ``xl[c] = f(c)``.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def pack(y, ctx, p, base):
    code = 0
    mult = 1
    for j in range(ctx.shape[1]):
        q = ctx[p, j]
        if q >= 0:
            code += y[q] * mult
        mult *= base
    return code


@njit(cache=True, nogil=True)
def unit_move(counts, coltot, xl, code, sym, step):
    c = counts[code, sym]
    n_col = coltot[code]
    if step < 0:
        if c <= 0:
            raise RuntimeError("count matrix inconsistent with sequence")
        d = (xl[n_col - 1] - xl[n_col]) - (xl[c - 1] - xl[c])
    else:
        d = (xl[n_col + 1] - xl[n_col]) - (xl[c + 1] - xl[c])
    counts[code, sym] = c + step
    coltot[code] = n_col + step
    return d


@njit(cache=True, nogil=True)
def flip(y, counts, coltot, xl, ctx, aff_ptr, aff_idx, i, b, base):
    """Set ``y[i] = b`` and return the change of F."""
    df = 0.0
    for a in range(aff_ptr[i], aff_ptr[i + 1]):
        p = aff_idx[a]
        df += unit_move(counts, coltot, xl, pack(y, ctx, p, base), y[p], -1)
    y[i] = b
    for a in range(aff_ptr[i], aff_ptr[i + 1]):
        p = aff_idx[a]
        df += unit_move(counts, coltot, xl, pack(y, ctx, p, base), y[p], 1)
    return df


@njit(cache=True, nogil=True)
def sample_index(neg_energy, beta, u, weights):
    # log-domain with max subtraction, then inverse CDF
    m = -np.inf
    for b in range(neg_energy.shape[0]):
        v = beta * neg_energy[b]
        weights[b] = v
        if v > m:
            m = v
    tot = 0.0
    for b in range(neg_energy.shape[0]):
        w = np.exp(weights[b] - m)
        weights[b] = w
        tot += w
    target = u * tot
    acc = 0.0
    last = neg_energy.shape[0] - 1
    for b in range(neg_energy.shape[0]):
        acc += weights[b]
        if target < acc:
            return b
    return last


@njit(cache=True, nogil=True)
def block_deltas(y, x, counts, coltot, xl, ctx, aff_ptr, aff_idx, dist, alpha,
                 scale, i, base, de):
    """Fill ``de[b]`` with E(y with y_i=b) - E(y); counts are left intact."""
    cur = y[i]
    for b in range(base):
        if b == cur:
            de[b] = 0.0
            continue
        df = flip(y, counts, coltot, xl, ctx, aff_ptr, aff_idx, i, b, base)
        flip(y, counts, coltot, xl, ctx, aff_ptr, aff_idx, i, cur, base)
        de[b] = scale * df + alpha * (dist[x[i], b] - dist[x[i], cur])


@njit(cache=True, nogil=True)
def anneal_block(y, x, counts, coltot, xl, ctx, aff_ptr, aff_idx, dist, alpha,
                 scale, base, positions, uniforms, betas):
    de = np.empty(base)
    neg = np.empty(base)
    w = np.empty(base)
    for t in range(positions.shape[0]):
        i = positions[t]
        block_deltas(y, x, counts, coltot, xl, ctx, aff_ptr, aff_idx, dist,
                     alpha, scale, i, base, de)
        for b in range(base):
            neg[b] = -de[b]
        b = sample_index(neg, betas[t], uniforms[t], w)
        if b != y[i]:
            flip(y, counts, coltot, xl, ctx, aff_ptr, aff_idx, i, b, base)


@njit(cache=True, nogil=True)
def sb_flip(y, counts, coltot, xl, ctx, aff_ptr, aff_idx, mem_ptr, mem_idx,
            label, theta, base, stamp, buf, tick):
    """Set y[j] = theta for every position j carrying ``label``.

    Positions whose counted cell changes are collected once each (``stamp``
    marks them with ``tick``), removed under the old y and re-added under
    the new one.  Returns the change of F.
    """
    m = 0
    for a in range(mem_ptr[label], mem_ptr[label + 1]):
        j = mem_idx[a]
        for e in range(aff_ptr[j], aff_ptr[j + 1]):
            p = aff_idx[e]
            if stamp[p] != tick:
                stamp[p] = tick
                buf[m] = p
                m += 1
    df = 0.0
    for e in range(m):
        p = buf[e]
        df += unit_move(counts, coltot, xl, pack(y, ctx, p, base), y[p], -1)
    for a in range(mem_ptr[label], mem_ptr[label + 1]):
        y[mem_idx[a]] = theta
    for e in range(m):
        p = buf[e]
        df += unit_move(counts, coltot, xl, pack(y, ctx, p, base), y[p], 1)
    return df


@njit(cache=True, nogil=True)
def anneal_sb(f, y, counts, coltot, xl, ctx, aff_ptr, aff_idx, mem_ptr,
              mem_idx, class_dist, alpha, scale, base, labels_drawn, uniforms,
              betas, stamp, buf, tick0):
    de = np.empty(base)
    w = np.empty(base)
    tick = tick0
    for t in range(labels_drawn.shape[0]):
        i = labels_drawn[t]
        cur = f[i]
        for th in range(base):
            if th == cur:
                de[th] = 0.0
                continue
            tick += 1
            df = sb_flip(y, counts, coltot, xl, ctx, aff_ptr, aff_idx,
                         mem_ptr, mem_idx, i, th, base, stamp, buf, tick)
            tick += 1
            sb_flip(y, counts, coltot, xl, ctx, aff_ptr, aff_idx, mem_ptr,
                    mem_idx, i, cur, base, stamp, buf, tick)
            de[th] = -(scale * df + alpha * (class_dist[i, th] - class_dist[i, cur]))
        th = sample_index(de, betas[t], uniforms[t], w)
        if th != cur:
            tick += 1
            sb_flip(y, counts, coltot, xl, ctx, aff_ptr, aff_idx, mem_ptr,
                    mem_idx, i, th, base, stamp, buf, tick)
            f[i] = th
    return tick
