"""Shared oscillatory-quadrature machinery for vertical-line means.

Composite Gauss-Legendre with 8 nodes per panel and an oscillation-aware
panel width: the integrands |f(sigma+it)|^p are band-limited in t with
top frequency ln(N^2), so panels of width min(0.25, pi/(4 ln N)) keep
the per-panel phase below pi/2 where 8-node GL is exact to roundoff.

Work is split into fixed-shape blocks of whole panels; blocks may be
evaluated by a thread pool but are always reduced in block order with
numpy's pairwise summation, so results are bit-identical for any worker
count (including 1).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, Sequence

import numpy as np

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)
_PANELS_PER_BLOCK = 4096


def thread_count(explicit: Optional[int] = None) -> int:
    """Worker count: explicit argument, then BHT_THREADS, then cpu count."""
    if explicit is not None and explicit >= 1:
        return int(explicit)
    env = os.environ.get("BHT_THREADS", "")
    if env.strip():
        try:
            n = int(env)
            if n >= 1:
                return n
        except ValueError:
            pass
    return os.cpu_count() or 1


def map_blocks(fn: Callable[[int], np.ndarray], n_blocks: int, threads: int) -> list:
    """Evaluate fn(block_index) for all blocks, results in index order.

    The block decomposition is fixed by the caller, never by the worker
    count, which is what makes threaded runs reproducible.
    """
    if threads <= 1 or n_blocks <= 1:
        return [fn(i) for i in range(n_blocks)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n_blocks)))


def panel_width(max_index: int) -> float:
    """Oscillation-aware panel width for a polynomial of top index N."""
    if max_index <= 1:
        return 0.25
    return min(0.25, math.pi / (4.0 * math.log(max_index)))


def _line_values(
    logs: np.ndarray, coeffs: np.ndarray, t: np.ndarray
) -> np.ndarray:
    """f-values at sigma+it with sigma already absorbed into coeffs."""
    return np.exp(np.outer(t, -1j * logs)) @ coeffs


def _mean_once(
    logs: np.ndarray,
    coeffs: np.ndarray,
    t0: float,
    t1: float,
    p: float,
    width: float,
    threads: int,
) -> float:
    n_panels = max(1, math.ceil((t1 - t0) / width))
    h = (t1 - t0) / n_panels
    half = 0.5 * h
    n_blocks = math.ceil(n_panels / _PANELS_PER_BLOCK)

    def block(i: int) -> np.ndarray:
        lo = i * _PANELS_PER_BLOCK
        hi = min(lo + _PANELS_PER_BLOCK, n_panels)
        mids = t0 + (np.arange(lo, hi) + 0.5) * h
        t = (mids[:, None] + half * _GL_NODES[None, :]).ravel()
        vals = np.abs(_line_values(logs, coeffs, t))
        integrand = vals**p if p != 2.0 else vals * vals
        return integrand.reshape(-1, 8) @ _GL_WEIGHTS

    parts = map_blocks(block, n_blocks, threads)
    panel_integrals = np.concatenate(parts) * half
    return float(np.sum(panel_integrals)) / (t1 - t0)


def line_mean(
    logs: Sequence[float],
    coeffs: Sequence[complex],
    t0: float,
    t1: float,
    p: float,
    max_index: int,
    threads: Optional[int] = None,
) -> tuple[float, float]:
    """Mean of |f(sigma+it)|^p over [t0, t1] and a refinement-halving error.

    ``logs`` and ``coeffs`` are ln(n) and a_n n^(-sigma) for the support;
    returns (value at the finer level, |coarse - fine|).
    """
    if t1 <= t0:
        raise ValueError("empty integration window")
    logs = np.asarray(logs, dtype=float)
    coeffs = np.asarray(coeffs, dtype=complex)
    if logs.size == 0:
        return 0.0, 0.0
    nthreads = thread_count(threads)
    w = panel_width(max_index)
    coarse = _mean_once(logs, coeffs, t0, t1, p, w, nthreads)
    fine = _mean_once(logs, coeffs, t0, t1, p, 0.5 * w, nthreads)
    return fine, abs(fine - coarse)


def cross_term_bound(coeffs: dict[int, complex], sigma: float, T: float) -> float:
    """Rigorous deviation bound for the finite-T quadratic mean.

    (2/T) * sum_{m != n} |a_m||a_n| (mn)^(-sigma) / |ln(m/n)| bounds the
    distance between (1/T) int_0^T |f(sigma+it)|^2 dt and the coefficient
    target sum |a_n|^2 n^(-2 sigma); each off-diagonal phase integrates
    to at most 2/|ln(m/n)| in absolute value.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    ns = np.array(sorted(coeffs), dtype=float)
    if ns.size < 2:
        return 0.0
    a = np.array([abs(coeffs[int(n)]) for n in ns]) * ns ** (-sigma)
    logn = np.log(ns)
    gaps = np.abs(logn[:, None] - logn[None, :])
    np.fill_diagonal(gaps, np.inf)
    weights = np.outer(a, a) / gaps
    return 2.0 / T * float(np.sum(weights))


def pairwise_sum(values: np.ndarray) -> float:
    """Deterministic pairwise reduction (layout-fixed numpy sum)."""
    return float(np.sum(np.asarray(values, dtype=float)))
