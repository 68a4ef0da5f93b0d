"""Finite-truncation builds of the bidisc boundary counterexamples.

The pipeline: cover the boundary curve (2^{-it}, 3^{-it}) with a thin
union of dyadic squares, decompose the lower-semicontinuous target
chi_U + (eps/2) chi_{U^c} into non-negative trig polynomials, cancel the
mixed-quadrant spectrum with diagonal ring measures, complete to an
analytic H, and exponentiate: G = exp(K (H - 1)).

Finite truncation forces one deviation from the idealized recipe: a hard
cutoff of the ring-copy sum oscillates and destroys the pointwise bound
Re H <= 1, so the demos weight the kept copies with a Fejer window in
the copy index.  The weighted ring object is a non-negative density, the
bound Re H <= max target stays rigorous, and the weighted copies
converge to the singular measure as the window widens.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .bidisc import (
    TWO_PI,
    BidiscAnalytic,
    DyadicSquareSet,
    FourierDatum2,
    curve_trace,
    exp_series,
    h2_norm_bidisc,
    pluriharmonic_complete,
    rudin_datum,
)
from .errors import CapacityError, ConstructionError, DomainError

LN2 = math.log(2.0)
LN3 = math.log(3.0)
CURVE_SPEED = math.hypot(LN2, LN3)


def curve_angles(t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Angles of (2^{-it}, 3^{-it}) on [0, 2 pi)^2."""
    t = np.asarray(t, dtype=float)
    return np.mod(-t * LN2, TWO_PI), np.mod(-t * LN3, TWO_PI)


# ---------------------------------------------------------------------------
# Thin strip cover
# ---------------------------------------------------------------------------


def _ball_radius(t: np.ndarray, eps: float, min_half_width: float) -> np.ndarray:
    return np.maximum(eps / (100.0 * (1.0 + np.abs(t)) ** 2), min_half_width)


def _mark_squares(
    t: np.ndarray, rad: np.ndarray, level: np.ndarray
) -> dict[int, np.ndarray]:
    """Dyadic squares (per level) touching the sup-ball around each curve point."""
    th1, th2 = curve_angles(t)
    out: dict[int, np.ndarray] = {}
    for l in np.unique(level).tolist():
        sel = level == l
        side = TWO_PI * 0.5**l
        cells = 1 << int(l)
        i_lo = np.floor((th1[sel] - rad[sel]) / side).astype(np.int64)
        i_hi = np.floor((th1[sel] + rad[sel]) / side).astype(np.int64)
        j_lo = np.floor((th2[sel] - rad[sel]) / side).astype(np.int64)
        j_hi = np.floor((th2[sel] + rad[sel]) / side).astype(np.int64)
        span_i = int(np.max(i_hi - i_lo)) + 1 if np.any(sel) else 0
        span_j = int(np.max(j_hi - j_lo)) + 1 if np.any(sel) else 0
        keys = []
        for di in range(span_i):
            ii = i_lo + di
            ok_i = ii <= i_hi
            for dj in range(span_j):
                jj = j_lo + dj
                ok = ok_i & (jj <= j_hi)
                keys.append(
                    ((ii[ok] % cells) << 31) + (jj[ok] % cells)
                )
        merged = np.unique(np.concatenate(keys)) if keys else np.empty(0, np.int64)
        out[int(l)] = merged
    return out


def _drop_nested(per_level: dict[int, np.ndarray]) -> dict[int, np.ndarray]:
    levels = sorted(per_level)
    for hi_idx, lb in enumerate(levels):
        for la in levels[:hi_idx]:
            shallow = per_level[la]
            if shallow.size == 0:
                continue
            deep = per_level[lb]
            shift = lb - la
            anc = (((deep >> 31) >> shift) << 31) + ((deep & ((1 << 31) - 1)) >> shift)
            per_level[lb] = deep[~np.isin(anc, shallow)]
    return per_level


def strip_cover(
    eps: float,
    t_max: float,
    level: int,
    min_half_width: float = 0.0,
    area_budget: Optional[float] = None,
    start_level: int = 5,
    verify_samples: int = 10_000,
) -> DyadicSquareSet:
    """Dyadic-square cover of the curve segment t in [0, t_max].

    Every covering square has half-width at least eps/(100 (1+t)^2) (or
    the explicit ``min_half_width`` floor, whichever is larger) at the
    parameters it covers.  The per-point dyadic depth starts shallow and
    is raised until the raw covered area drops below the budget
    (default eps/2); the ``level`` argument is the depth budget, which
    must be fine enough to resolve the thinnest covering balls.
    """
    if eps <= 0 or t_max <= 0:
        raise DomainError("eps and t_max must be positive")
    budget = 0.5 * eps if area_budget is None else float(area_budget)
    r_min = float(_ball_radius(np.array(t_max), eps, min_half_width))
    if math.sqrt(2.0) * TWO_PI * 0.5**level > r_min:
        raise CapacityError(
            f"depth budget {level} too shallow: square diameter exceeds the "
            f"minimum covering radius {r_min:.3e}"
        )

    for g in range(start_level, level + 1):
        # per-point level: deepest dyadic scale whose half-side covers the ball
        def point_levels(t: np.ndarray) -> np.ndarray:
            r = _ball_radius(t, eps, min_half_width)
            deepest = np.floor(np.log2(math.pi / r)).astype(np.int64)
            return np.minimum(deepest, g)

        # sample the curve finely enough that consecutive marks overlap
        pieces = []
        t0 = 0.0
        while t0 < t_max:
            l_here = int(point_levels(np.array([t0]))[0])
            side = TWO_PI * 0.5**l_here
            step = side / (4.0 * CURVE_SPEED)
            t1 = min(t_max, t0 + 4096 * step)
            n = max(2, int(math.ceil((t1 - t0) / step)) + 1)
            pieces.append(np.linspace(t0, t1, n))
            t0 = t1
        t = np.unique(np.concatenate(pieces))
        lv = point_levels(t)
        side = TWO_PI * 0.5 ** lv.astype(float)
        rad = np.maximum(_ball_radius(t, eps, min_half_width), 1.01 * side / 4.0)
        per_level = _drop_nested(_mark_squares(t, rad, lv))
        area = sum(
            keys.size * (TWO_PI * 0.5**l) ** 2 for l, keys in per_level.items()
        )
        if area > budget:
            continue
        levels, iis, jjs = [], [], []
        for l, keys in sorted(per_level.items()):
            if keys.size == 0:
                continue
            levels.append(np.full(keys.size, l, dtype=np.int64))
            iis.append(keys >> 31)
            jjs.append(keys & ((1 << 31) - 1))
        cover = DyadicSquareSet(
            np.concatenate(levels), np.concatenate(iis), np.concatenate(jjs)
        )
        probe = np.linspace(0.0, t_max, verify_samples)
        th1, th2 = curve_angles(probe)
        if not bool(np.all(cover.contains(th1, th2))):
            raise ConstructionError("cover misses sampled curve points")
        return cover
    raise CapacityError(
        f"area budget {budget:.3e} unreachable within depth budget {level}"
    )


# ---------------------------------------------------------------------------
# Decomposition of the boundary target
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecompositionResult:
    """Non-negative pieces p_j summing to the smoothed boundary target."""

    pieces: list[FourierDatum2]
    masses: list[float]
    l1_defect: float
    smoothed_target: FourierDatum2
    share: list[float]  # scalar split weights c_j (sum to 1)


def decompose_lsc(
    U: DyadicSquareSet,
    eps: float,
    J: int,
    M: int,
    grid: int = 2048,
) -> DecompositionResult:
    """Split chi_U + (eps/2) chi_{U^c} into J non-negative trig polynomials.

    The indicator is truncated to order M and convolved with the 2-D
    Fejer kernel (coefficient-side triangular weights); the uniform
    eps/2 floor is added afterwards, keeping the smoothed target bounded
    below by eps/2 and above by 1.  Pieces are scalar shares of the
    smoothed target, with the share schedule chosen so the masses obey
    int p_j <= j^{-2} for j >= 2.  The L^1 distance between the smoothed
    and raw targets on the verification grid is reported.
    """
    if J < 1:
        raise DomainError("need at least one piece")
    if eps <= 0 or eps > 2:
        raise DomainError("eps must lie in (0, 2]")
    ind = U.indicator_coefficients(M)
    w = 1.0 - np.abs(np.arange(-M, M + 1)) / (M + 1.0)
    smooth = ind.data * np.outer(w, w)
    smooth = smooth * (1.0 - eps / 2.0)
    smooth[M, M] += eps / 2.0
    target = FourierDatum2(smooth, real=True)

    grid = max(grid, 2 * M + 2)
    vals = target.grid_values(grid)
    min_val = float(np.min(vals))
    if min_val < -1e-9:
        raise ConstructionError(
            f"smoothed target negative on verification grid: {min_val:.3e}"
        )
    ang = TWO_PI * np.arange(grid) / grid
    raw = np.where(
        U.contains(*np.meshgrid(ang, ang, indexing="ij")), 1.0, eps / 2.0
    )
    l1_defect = float(np.mean(np.abs(vals - raw)))

    m0 = float(np.real(target.coefficient(0, 0)))
    if J == 1:
        share = [1.0]
    else:
        tail = sum(1.0 / j**2 for j in range(2, J + 1))
        beta = min(1.0 / m0, 0.5 / tail)
        share = [beta / j**2 for j in range(2, J + 1)]
        share.insert(0, 1.0 - sum(share))
    pieces = [target.scaled(c) for c in share]
    masses = [c * m0 for c in share]
    for j, mass in enumerate(masses[1:], start=2):
        if mass > 1.0 / j**2 + 1e-12:
            raise ConstructionError(f"mass schedule violated at piece {j}")
    return DecompositionResult(
        pieces=pieces,
        masses=masses,
        l1_defect=l1_defect,
        smoothed_target=target,
        share=share,
    )


def ring_orders(pieces: Sequence[FourierDatum2]) -> list[int]:
    """Ring frequencies k_j = max(deg p_j + 1, 2^j): strictly clear of the
    density spectrum (so all shifted copies stay off the low box exactly)
    and geometrically spaced."""
    return [
        max(p.degree() + 1, 2 ** (j + 1)) for j, p in enumerate(pieces)
    ]


def truncate_total_degree(datum: FourierDatum2, D: int) -> FourierDatum2:
    """Zero all coefficients with |a| + |b| > D (box shrunk to D)."""
    m1, m2 = datum.box
    a = np.arange(-m1, m1 + 1)
    b = np.arange(-m2, m2 + 1)
    keep = (np.abs(a)[:, None] + np.abs(b)[None, :]) <= D
    data = np.where(keep, datum.data, 0.0)
    d = min(D, max(m1, m2))
    sl1 = slice(m1 - min(d, m1), m1 + min(d, m1) + 1)
    sl2 = slice(m2 - min(d, m2), m2 + min(d, m2) + 1)
    return FourierDatum2(data[sl1, sl2], real=datum.real)


# ---------------------------------------------------------------------------
# Exact extensions for the scalar-split construction
# ---------------------------------------------------------------------------


def _signed_power_contraction(
    data: np.ndarray, box: tuple[int, int], r: float, th1: np.ndarray,
    th2: np.ndarray, signed: bool,
) -> np.ndarray:
    """sum c(m,n) r^(pm m) r^(pm n) e^{i(m th1 + n th2)} at common radius r.

    signed=False uses r^(|m|+|n|) (harmonic extension); signed=True uses
    r^(m+n) (the analytic shift that multiplies diagonal ring copies).
    """
    m1, m2 = box
    m = np.arange(-m1, m1 + 1, dtype=float)
    n = np.arange(-m2, m2 + 1, dtype=float)
    rm = r**m if signed else r ** np.abs(m)
    rn = r**n if signed else r ** np.abs(n)
    U = np.exp(1j * np.outer(th1, m)) * rm[None, :]
    V = np.exp(1j * np.outer(th2, n)) * rn[None, :]
    return np.einsum("tm,mn,tn->t", U, data, V, optimize=True)


def exact_real_part(
    target: FourierDatum2,
    share: Sequence[float],
    k_list: Sequence[int],
    copies: int,
    r: float,
    th1: np.ndarray,
    th2: np.ndarray,
) -> np.ndarray:
    """Re H at radius (r, r) through the exact shift/geometric formulas.

    H is the completion of the scalar-split construction: target minus
    the Fejer-weighted ring products.  Because every piece is a scalar
    share of the same density, one signed and one harmonic contraction of
    the target serve all rings:

        Re H = P(target) - sum_j c_j [ P(target) + 2 Re sum_{l=1}^{L}
               w_L(l) ((r^2 e^{i(th1+th2)})^{k_j l}) A(z) ]
             = -2 Re [ A(z) * sum_j c_j sum_l w_L(l) w_j^l ]

    with A the signed-power contraction and w_L the Fejer window.
    """
    th1 = np.asarray(th1, dtype=float).ravel()
    th2 = np.asarray(th2, dtype=float).ravel()
    A = _signed_power_contraction(target.data, target.box, r, th1, th2, True)
    phi = th1 + th2
    acc = np.zeros(th1.shape, dtype=complex)
    for c, k in zip(share, k_list):
        w = (r * r) ** k * np.exp(1j * k * phi)
        ring = np.zeros_like(acc)
        wl = np.ones_like(acc)
        for l in range(1, copies + 1):
            wl = wl * w
            ring += (1.0 - l / (copies + 1.0)) * wl
        acc += c * ring
    return -2.0 * np.real(A * acc)


# ---------------------------------------------------------------------------
# Theorem demos
# ---------------------------------------------------------------------------


def _normalization_shift(datum: FourierDatum2, grid: int = 0) -> float:
    """Safe upper bound for the boundary sup of the datum's extension.

    Grid max inflated by the 1-D trigonometric oversampling bound
    1/cos(pi d / (2 N)) per axis; the harmonic extension of a boundary
    function attains its sup on the distinguished boundary, so this also
    bounds Re H on the closed bidisc.
    """
    deg = datum.degree()
    if grid <= 0:
        grid = max(1024, 8 * max(deg, 1))
    vals = datum.grid_values(grid)
    factor = 1.0 / math.cos(math.pi * deg / (2.0 * grid)) ** 2
    top = float(np.max(vals))
    return top * factor if top > 0 else top


def _shifted(H: BidiscAnalytic, shift: float) -> BidiscAnalytic:
    arr = H.coeffs.copy()
    arr[0, 0] += shift
    return BidiscAnalytic(arr, tail_estimate=H.tail_estimate)


@dataclass
class Demo2Report:
    """Everything the singular-inner-function build produced."""

    eps: float
    t_max: float
    J: int
    M: int
    D: int
    copies: int
    delta: float
    n_squares: int
    raw_area: float
    measure: float
    k_list: list[int]
    datum_order: int
    normalization: float
    K_init: float
    K_final: float
    converged: bool
    h2_norm: float
    tail_estimate: float
    sup_interior: float
    trace_t: np.ndarray
    trace_values: np.ndarray
    trace_exact: np.ndarray
    trace_threshold: float
    frac_above: float
    frac_above_exact: float
    runtime_seconds: float
    notes: str = ""

    def summary(self) -> dict:
        return {
            "eps": self.eps, "t_max": self.t_max, "J": self.J, "M": self.M,
            "D": self.D, "copies": self.copies, "delta": self.delta,
            "n_squares": self.n_squares, "raw_area": self.raw_area,
            "measure": self.measure, "k_list": self.k_list,
            "datum_order": self.datum_order,
            "normalization": self.normalization, "K_final": self.K_final,
            "converged": self.converged, "h2_norm": self.h2_norm,
            "tail_estimate": self.tail_estimate,
            "sup_interior": self.sup_interior,
            "trace_threshold": self.trace_threshold,
            "frac_above": self.frac_above,
            "frac_above_exact": self.frac_above_exact,
            "runtime_seconds": self.runtime_seconds,
            "notes": self.notes,
        }


def theorem1_ii_demo(
    eps: float,
    t_max: float,
    J: int,
    M: int,
    D: int,
    K_init: float = 0.5,
    copies: int = 6,
    delta: float = 1e-4,
    level: Optional[int] = None,
    min_half_width: float = 0.0,
    trace_samples: int = 4001,
    trace_threshold: float = 0.8,
    max_doublings: int = 12,
    interior_radii: Sequence[float] = (0.3, 0.7, 0.95),
    interior_grid: int = 181,
) -> Demo2Report:
    """Build a small-2-norm function with near-unimodular curve trace.

    Pipeline: strip cover -> non-negative decomposition -> ring
    cancellation (Fejer-weighted copies) -> analytic completion ->
    exponential with K doubled from K_init until the bidisc 2-norm drops
    below eps.  The trace is reported twice: through the truncated
    Taylor series (``trace_values``) and through the exact modulus law
    |G| = exp(K (Re H - shift)) with Re H evaluated by closed formulas
    (``trace_exact``); the two diverge when D is far below the natural
    spectral size k_1 * copies + M of the construction.
    """
    started = time.time()
    if level is None:
        r_min = eps / (100.0 * (1.0 + t_max) ** 2)
        r_min = max(r_min, min_half_width)
        level = int(math.ceil(math.log2(math.sqrt(2.0) * TWO_PI / r_min)))
    U = strip_cover(eps, t_max, level, min_half_width=min_half_width)
    dec = decompose_lsc(U, eps, J, M)
    k_list = ring_orders(dec.pieces)
    natural = k_list[0] * copies + M
    order = min(natural, max(D, M))
    datum = rudin_datum(dec.pieces, k_list, order=order, mollify_copies=copies)
    datum = truncate_total_degree(datum, D)
    H = pluriharmonic_complete(datum)
    shift = _normalization_shift(datum)
    c_norm = max(1.0, shift)
    H = _shifted(H, 1.0 - c_norm)

    K = float(K_init)
    converged = False
    G = exp_series(H, K, D)
    h2 = h2_norm_bidisc(G)
    for _ in range(max_doublings):
        if h2 <= eps:
            converged = True
            break
        K *= 2.0
        G = exp_series(H, K, D)
        h2 = h2_norm_bidisc(G)
    else:
        converged = h2 <= eps

    ang = np.linspace(0.0, TWO_PI, interior_grid, endpoint=False)
    sup = 0.0
    for r in interior_radii:
        z1 = r * np.exp(1j * ang)
        Z1, Z2 = np.meshgrid(z1, z1, indexing="ij")
        sup = max(sup, float(np.max(np.abs(
            G.evaluate_batch(Z1.ravel(), Z2.ravel())
        ))))

    t, vals = curve_trace(G, 0.0, (0.0, t_max), trace_samples, delta=delta)
    th1, th2 = curve_angles(t)
    re_h = exact_real_part(
        dec.smoothed_target, dec.share, k_list, copies, 1.0 - delta, th1, th2
    )
    exact = np.exp(K * (re_h - c_norm))
    report = Demo2Report(
        eps=eps, t_max=t_max, J=J, M=M, D=D, copies=copies, delta=delta,
        n_squares=len(U), raw_area=U.total_area(), measure=U.measure(),
        k_list=k_list, datum_order=order, normalization=c_norm,
        K_init=K_init, K_final=K, converged=converged, h2_norm=h2,
        tail_estimate=G.tail_estimate, sup_interior=sup,
        trace_t=t, trace_values=vals, trace_exact=exact,
        trace_threshold=trace_threshold,
        frac_above=float(np.mean(vals >= trace_threshold)),
        frac_above_exact=float(np.mean(exact >= trace_threshold)),
        runtime_seconds=time.time() - started,
        notes="" if converged else "K-doubling budget exhausted",
    )
    return report


# -------------------------- part (i): oscillation --------------------------


def _stage_cover(
    t_lo: float,
    t_hi: float,
    level: int,
    half_width: float,
    exclude: Optional[DyadicSquareSet],
    margin: float,
) -> DyadicSquareSet:
    """Cover of the curve on [t_lo, t_hi], skipping points within ``margin``
    of the excluded closed union (sup metric)."""
    side = TWO_PI * 0.5**level
    step = min(side / 4.0, half_width) / CURVE_SPEED
    n = max(2, int(math.ceil((t_hi - t_lo) / step)) + 1)
    t = np.linspace(t_lo, t_hi, n)
    if exclude is not None and len(exclude):
        th1, th2 = curve_angles(t)
        dist = _distance_to_squares(th1, th2, exclude)
        t = t[dist > margin]
    if t.size == 0:
        raise ConstructionError("stage cover is empty after exclusions")
    lv = np.full(t.size, level, dtype=np.int64)
    rad = np.full(t.size, max(half_width, 1.01 * side / 4.0))
    per_level = _mark_squares(t, rad, lv)
    keys = per_level[level]
    return DyadicSquareSet(
        np.full(keys.size, level, dtype=np.int64),
        keys >> 31,
        keys & ((1 << 31) - 1),
    )


def _distance_to_squares(
    th1: np.ndarray, th2: np.ndarray, squares: DyadicSquareSet
) -> np.ndarray:
    """Sup-metric torus distance from each point to the closed union."""
    boxes = squares._boxes()
    out = np.full(th1.shape, np.inf)
    chunk = 2048
    for lo in range(0, len(boxes), chunk):
        part = boxes[lo : lo + chunk]
        d1 = _arc_distance(th1[:, None], part[None, :, 0], part[None, :, 1])
        d2 = _arc_distance(th2[:, None], part[None, :, 2], part[None, :, 3])
        out = np.minimum(out, np.min(np.maximum(d1, d2), axis=1))
    return out


def _arc_distance(x: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    best = None
    for shift in (-TWO_PI, 0.0, TWO_PI):
        g = np.maximum(np.maximum(lo - (x + shift), (x + shift) - hi), 0.0)
        best = g if best is None else np.minimum(best, g)
    return best


@dataclass
class Demo1Report:
    """Two-coverings oscillation build: means at the stage times."""

    eps: float
    n_stages: int
    M: int
    D: int
    K: float
    copies: int
    stage_times: list[float]
    stage_measures: list[float]
    min_gap: float
    occupancies: list[float]
    means: list[float]
    normalization: float
    h2_norm: float
    datum_order: int
    delta: float
    runtime_seconds: float

    def summary(self) -> dict:
        return {
            "eps": self.eps, "n_stages": self.n_stages, "M": self.M,
            "D": self.D, "K": self.K, "copies": self.copies,
            "stage_times": self.stage_times,
            "stage_measures": self.stage_measures, "min_gap": self.min_gap,
            "occupancies": self.occupancies, "means": self.means,
            "normalization": self.normalization, "h2_norm": self.h2_norm,
            "datum_order": self.datum_order, "delta": self.delta,
            "runtime_seconds": self.runtime_seconds,
        }


def theorem1_i_demo(
    eps: float = 0.3,
    n_stages: int = 2,
    M: int = 144,
    J: int = 8,
    K: float = 1.5,
    copies: int = 6,
    D: Optional[int] = None,
    half_width: Optional[float] = None,
    gap: Optional[float] = None,
    delta: float = 1e-4,
    t2_max: float = 60.0,
    occupancy_samples: int = 40_000,
    mean_samples_per_unit: int = 600,
) -> Demo1Report:
    """Alternating covers whose finite-T quadratic means oscillate.

    Odd stages join the high set U (boundary target 1), even stages the
    low set V (target eps/2).  Stage times are selected by sampled curve
    occupancy: t_1 = 1, and each later stage time t_n >= n is the first
    at which the fraction of [0, t_n] the curve spends near the earlier
    closures falls below eps/2, so the new stage can cover at least a
    (1 - eps/2) share of its window.  Closures stay disjoint through an
    explicit gap.  The reported means are (1/T) int_0^T |g(it)|^2 dt at
    each stage time, sampled quasi-radially at 1 - delta.
    """
    started = time.time()
    if n_stages < 2:
        raise DomainError("need at least two stages")
    lobe = math.pi / (M + 1.0)
    hw = half_width if half_width is not None else 5.0 * lobe
    gp = gap if gap is not None else 2.5 * lobe
    level = max(2, int(round(math.log2(TWO_PI / (2.2 * hw)))))

    stage_sets: list[DyadicSquareSet] = []
    stage_times: list[float] = []
    occupancies: list[float] = []
    budget_half = eps / 2.0  # normalized measure per parity family

    t_n = 1.0
    for n in range(1, n_stages + 1):
        prior = _union(stage_sets) if stage_sets else None
        stage_hw, stage_level = hw, level
        if n > 1:
            # only stage 1 needs smoothing-resolvable width; later windows
            # grow, so thin the squares to meet the budget
            stage_hw = hw / 4.0
            stage_level = level + 2
        side = TWO_PI * 0.5**stage_level
        margin = gp + stage_hw + side
        if n > 1:
            t_n = _select_stage_time(
                prior, margin, max(float(n), stage_times[-1] + 1.0),
                t2_max, 0.8 * eps, occupancy_samples,
            )
        cover = _stage_cover(0.0, t_n, stage_level, stage_hw, prior, margin)
        parity = [s for i, s in enumerate(stage_sets) if i % 2 == (n - 1) % 2]
        used = sum(s.measure() for s in parity)
        if used + cover.measure() >= budget_half:
            raise ConstructionError(
                f"stage {n} measure {cover.measure():.4f} exceeds family budget"
            )
        probe = np.linspace(0.0, t_n, occupancy_samples)
        th1, th2 = curve_angles(probe)
        occ = float(np.mean(cover.contains(th1, th2)))
        if occ <= 1.0 - eps / 2.0:
            raise ConstructionError(
                f"stage {n} occupancy {occ:.4f} below 1 - eps/2"
            )
        stage_sets.append(cover)
        stage_times.append(t_n)
        occupancies.append(occ)

    min_gap = min(
        stage_sets[i].min_gap_to(stage_sets[j])
        for i in range(len(stage_sets))
        for j in range(i + 1, len(stage_sets))
    )
    if min_gap <= 0:
        raise ConstructionError("stage closures are not disjoint")

    U = _union(stage_sets[0::2])
    dec = decompose_lsc(U, eps, J, M)
    k_list = ring_orders(dec.pieces)
    order = k_list[0] * copies + M
    degree = D if D is not None else 2 * order
    datum = rudin_datum(dec.pieces, k_list, order=order, mollify_copies=copies)
    datum = truncate_total_degree(datum, degree)
    H = pluriharmonic_complete(datum)
    c_norm = max(1.0, _normalization_shift(datum))
    H = _shifted(H, 1.0 - c_norm)
    G = exp_series(H, K, degree)

    T_final = stage_times[-1]
    n_pts = max(512, int(mean_samples_per_unit * T_final) + 1)
    t, vals = curve_trace(G, 0.0, (0.0, T_final), n_pts, delta=delta)
    sq = vals * vals
    means = []
    for T in stage_times:
        sel = t <= T
        means.append(float(np.trapezoid(sq[sel], t[sel]) / t[sel][-1]))

    return Demo1Report(
        eps=eps, n_stages=n_stages, M=M, D=degree, K=K, copies=copies,
        stage_times=stage_times,
        stage_measures=[s.measure() for s in stage_sets],
        min_gap=min_gap, occupancies=occupancies, means=means,
        normalization=c_norm, h2_norm=h2_norm_bidisc(G), datum_order=order,
        delta=delta, runtime_seconds=time.time() - started,
    )


def _union(sets: Sequence[DyadicSquareSet]) -> DyadicSquareSet:
    levels = np.concatenate([s.levels for s in sets])
    iis = np.concatenate([s.is_ for s in sets])
    jjs = np.concatenate([s.js for s in sets])
    return DyadicSquareSet(levels, iis, jjs)


def _select_stage_time(
    prior: Optional[DyadicSquareSet],
    gap: float,
    t_min: float,
    t_max: float,
    eps: float,
    n_samples: int,
) -> float:
    """First time >= t_min at which the curve's dwell fraction near the
    prior closures drops below eps/2 (sampled occupancy)."""
    if prior is None:
        return t_min
    t = np.linspace(0.0, t_max, n_samples)
    th1, th2 = curve_angles(t)
    near = _distance_to_squares(th1, th2, prior) <= gap
    frac = np.cumsum(near) / np.arange(1, n_samples + 1)
    ok = (t >= t_min) & (frac < eps / 2.0)
    if not np.any(ok):
        raise ConstructionError(
            f"no stage time in [{t_min}, {t_max}] clears the occupancy target"
        )
    return float(t[np.argmax(ok)])
