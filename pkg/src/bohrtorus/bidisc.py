"""Poisson kernels, ring measures and pluriharmonic completion on the bidisc.

Boundary data live as truncated Fourier coefficient maps on Z^2; singular
ring measures are never discretized spatially -- their extensions use the
exact shift/geometric-series formulas.  The cancellation at the core of
the construction (products with the diagonal ring measure wiping out all
mixed-sign Fourier modes) is exact integer-shift arithmetic, so those
coefficients are identically zero, not merely small.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .errors import CapacityError, ConstructionError, DomainError

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# Fourier data on Z^2
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FourierDatum2:
    """Finite Fourier coefficient map on Z^2, stored on a centered box.

    ``data[m + M1, n + M2]`` is the coefficient of exp(i(m t1 + n t2)),
    |m| <= M1, |n| <= M2.  ``real=True`` asserts conjugate symmetry
    (coeff(-m,-n) = conj(coeff(m,n))), which makes the represented
    function real-valued.
    """

    data: np.ndarray
    real: bool = False

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] % 2 == 0 or arr.shape[1] % 2 == 0:
            raise DomainError("coefficient box must have odd dimensions")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)
        if self.real:
            flipped = np.conj(arr[::-1, ::-1])
            scale = max(float(np.max(np.abs(arr))), 1.0)
            if float(np.max(np.abs(arr - flipped))) > 1e-12 * scale:
                raise DomainError("real datum lacks conjugate symmetry")

    @property
    def box(self) -> tuple[int, int]:
        return (self.data.shape[0] // 2, self.data.shape[1] // 2)

    @classmethod
    def zeros(cls, m1: int, m2: int, real: bool = False) -> "FourierDatum2":
        return cls(np.zeros((2 * m1 + 1, 2 * m2 + 1), dtype=complex), real=real)

    @classmethod
    def from_items(
        cls,
        items: Iterable[tuple[int, int, complex]],
        real: bool = False,
        box: Optional[tuple[int, int]] = None,
    ) -> "FourierDatum2":
        items = list(items)
        if box is None:
            m1 = max((abs(m) for m, _, _ in items), default=0)
            m2 = max((abs(n) for _, n, _ in items), default=0)
        else:
            m1, m2 = box
        data = np.zeros((2 * m1 + 1, 2 * m2 + 1), dtype=complex)
        for m, n, v in items:
            if abs(m) > m1 or abs(n) > m2:
                raise DomainError(f"coefficient ({m},{n}) outside box {box}")
            data[m + m1, n + m2] += v
        return cls(data, real=real)

    def coefficient(self, m: int, n: int) -> complex:
        m1, m2 = self.box
        if abs(m) > m1 or abs(n) > m2:
            return 0j
        return complex(self.data[m + m1, n + m2])

    def items(self) -> Iterator[tuple[int, int, complex]]:
        m1, m2 = self.box
        ms, ns = np.nonzero(self.data)
        for i, j in zip(ms.tolist(), ns.tolist()):
            yield (i - m1, j - m2, complex(self.data[i, j]))

    def degree(self) -> int:
        """max over the support of max(|m|, |n|); 0 for the zero datum."""
        m1, m2 = self.box
        ms, ns = np.nonzero(self.data)
        if ms.size == 0:
            return 0
        return int(max(np.max(np.abs(ms - m1)), np.max(np.abs(ns - m2))))

    def scaled(self, c: complex) -> "FourierDatum2":
        real = self.real and float(np.imag(complex(c))) == 0.0
        return FourierDatum2(self.data * c, real=real)

    def plus(self, other: "FourierDatum2") -> "FourierDatum2":
        m1 = max(self.box[0], other.box[0])
        m2 = max(self.box[1], other.box[1])
        data = np.zeros((2 * m1 + 1, 2 * m2 + 1), dtype=complex)
        for d in (self, other):
            a1, a2 = d.box
            data[m1 - a1 : m1 + a1 + 1, m2 - a2 : m2 + a2 + 1] += d.data
        return FourierDatum2(data, real=self.real and other.real)

    def grid_values(self, grid: int = 2048) -> np.ndarray:
        """Values on the uniform grid (2 pi i/grid, 2 pi j/grid) via FFT."""
        m1, m2 = self.box
        if grid < 2 * m1 + 1 or grid < 2 * m2 + 1:
            raise DomainError("grid too coarse for the coefficient box")
        spec = np.zeros((grid, grid), dtype=complex)
        ms = np.arange(-m1, m1 + 1)
        ns = np.arange(-m2, m2 + 1)
        spec[np.ix_(ms % grid, ns % grid)] = self.data
        vals = np.fft.ifft2(spec) * grid * grid
        return vals.real if self.real else vals

    def mass(self) -> complex:
        """Integral against normalized Lebesgue measure = (0,0) coefficient."""
        return self.coefficient(0, 0)


# ---------------------------------------------------------------------------
# Kernels and extensions
# ---------------------------------------------------------------------------


def poisson_kernel2(r: float, tau: Sequence[complex]) -> float:
    """Product Poisson kernel (1-r^2)^2 / (|1-r tau1|^2 |1-r tau2|^2)."""
    if not 0.0 <= r < 1.0:
        raise DomainError(f"radius must lie in [0,1), got {r}")
    t1, t2 = complex(tau[0]), complex(tau[1])
    num = (1.0 - r * r) ** 2
    den = abs(1.0 - r * t1) ** 2 * abs(1.0 - r * t2) ** 2
    return num / den


def boundary_distance(tau: Sequence[complex], w: Sequence[complex]) -> float:
    """Max-coordinate distance on the torus: max_j |tau_j - w_j|."""
    return max(abs(complex(tau[0]) - complex(w[0])),
               abs(complex(tau[1]) - complex(w[1])))


def poisson_extend(
    datum: FourierDatum2, z: Sequence[float]
) -> complex | float:
    """Extension sum of coeff(m,n) r1^|m| r2^|n| e^{i(m t1 + n t2)}.

    ``z`` is (r1, theta1, r2, theta2) with independent radii < 1.  Real
    data return a float (imaginary part asserted <= 1e-12 relative).
    """
    r1, th1, r2, th2 = (float(x) for x in z)
    if not (0.0 <= r1 < 1.0 and 0.0 <= r2 < 1.0):
        raise DomainError("radii must lie in [0,1)")
    m1, m2 = datum.box
    m = np.arange(-m1, m1 + 1)
    n = np.arange(-m2, m2 + 1)
    u = (r1 ** np.abs(m)) * np.exp(1j * m * th1)
    v = (r2 ** np.abs(n)) * np.exp(1j * n * th2)
    total = complex(u @ datum.data @ v)
    if datum.real:
        scale = max(abs(total), 1.0)
        if abs(total.imag) > 1e-12 * scale:
            raise AssertionError("real datum extended to a non-real value")
        return total.real
    return total


def lambda_extend(k: int, r1: float, r2: float, phi: float) -> float:
    """Harmonic extension of the diagonal ring measure, closed form.

    With rho = (r1 r2)^k this is the geometric series
    sum_j rho^|j| e^{i k j phi} = (1 - rho^2) / (1 - 2 rho cos(k phi) + rho^2),
    strictly positive for radii < 1.
    """
    if k < 1:
        raise DomainError("ring order k must be >= 1")
    if not (0.0 <= r1 < 1.0 and 0.0 <= r2 < 1.0):
        raise DomainError("radii must lie in [0,1)")
    rho = (r1 * r2) ** k
    return (1.0 - rho * rho) / (1.0 - 2.0 * rho * math.cos(k * phi) + rho * rho)


@dataclass(frozen=True)
class RingMeasure:
    """The positive measure (density) x (diagonal ring measure of order k).

    The density is a non-negative real trigonometric polynomial; the
    product measure has Fourier coefficient sum_j density_hat(a-kj, b-kj)
    at (a, b).
    """

    k: int
    density: FourierDatum2
    validate: bool = True

    def __post_init__(self):
        if self.k < 1:
            raise DomainError("ring order k must be >= 1")
        if not self.density.real:
            raise DomainError("ring density must be a real datum")
        if self.validate:
            vals = self.density.grid_values(
                max(2048, 2 * self.density.box[0] + 2)
            )
            if float(np.min(vals)) < -1e-9:
                raise DomainError(
                    f"ring density negative on grid: min {float(np.min(vals)):.3e}"
                )

    def fourier_coefficient(self, a: int, b: int) -> complex:
        total = 0j
        m1, _ = self.density.box
        lo = math.ceil((a - m1) / self.k)
        hi = math.floor((a + m1) / self.k)
        for l in range(lo, hi + 1):
            total += self.density.coefficient(a - self.k * l, b - self.k * l)
        return total

    def truncated(self, order: int) -> FourierDatum2:
        """Fourier data of the measure on the box |a|,|b| <= order."""
        return shifted_diagonal_sum(self.density, self.k, order)

    def mass(self) -> float:
        """Total mass; for k > deg(density) equals the density's mean."""
        return complex(self.fourier_coefficient(0, 0)).real


def shifted_diagonal_sum(p: FourierDatum2, k: int, order: int) -> FourierDatum2:
    """Coefficients of (density p) x (ring measure of order k), boxed.

    out(a,b) = sum_l p_hat(a - k l, b - k l) for |a|,|b| <= order.
    """
    m1, m2 = p.box
    out = np.zeros((2 * order + 1, 2 * order + 1), dtype=complex)
    l_max = (order + max(m1, m2)) // k + 1
    for l in range(-l_max, l_max + 1):
        s = k * l
        # overlap of the shifted box [s-m1, s+m1] x [s-m2, s+m2] with out
        a_lo, a_hi = max(-order, s - m1), min(order, s + m1)
        b_lo, b_hi = max(-order, s - m2), min(order, s + m2)
        if a_lo > a_hi or b_lo > b_hi:
            continue
        out[a_lo + order : a_hi + order + 1, b_lo + order : b_hi + order + 1] += (
            p.data[a_lo - s + m1 : a_hi - s + m1 + 1,
                   b_lo - s + m2 : b_hi - s + m2 + 1]
        )
    return FourierDatum2(out, real=p.real)


# ---------------------------------------------------------------------------
# Rectangles and dyadic squares
# ---------------------------------------------------------------------------


def dyadic_square_bounds(level: int, i: int, j: int) -> tuple[float, float, float, float]:
    """(t1_lo, t1_hi, t2_lo, t2_hi) of the dyadic square at the given level."""
    side = TWO_PI * 0.5**level
    return (i * side, (i + 1) * side, j * side, (j + 1) * side)


def _interval_coefficients(lo: float, hi: float, order: int) -> np.ndarray:
    """1-D Fourier coefficients of the indicator of [lo, hi) on [0, 2 pi)."""
    m = np.arange(-order, order + 1)
    out = np.empty(2 * order + 1, dtype=complex)
    nz = m != 0
    mm = m[nz]
    out[nz] = (np.exp(-1j * mm * lo) - np.exp(-1j * mm * hi)) / (TWO_PI * 1j * mm)
    out[~nz] = (hi - lo) / TWO_PI
    return out


def rectangle_coefficients(
    rect: Sequence[float] | tuple[int, int, int], order: int
) -> FourierDatum2:
    """Truncated Fourier coefficients of an axis-aligned rectangle indicator.

    ``rect`` is either a dyadic square (level, i, j) or raw bounds
    (t1_lo, t1_hi, t2_lo, t2_hi).  The (0,0) coefficient is exactly
    area / (4 pi^2).
    """
    if len(rect) == 3:
        lo1, hi1, lo2, hi2 = dyadic_square_bounds(*(int(x) for x in rect))
    elif len(rect) == 4:
        lo1, hi1, lo2, hi2 = (float(x) for x in rect)
    else:
        raise DomainError("rect must be (level,i,j) or (lo1,hi1,lo2,hi2)")
    if hi1 < lo1 or hi2 < lo2:
        raise DomainError("rectangle bounds are reversed")
    u = _interval_coefficients(lo1, hi1, order)
    v = _interval_coefficients(lo2, hi2, order)
    return FourierDatum2(np.outer(u, v), real=True)


@dataclass(frozen=True)
class DyadicSquareSet:
    """Pairwise-disjoint dyadic squares of [0, 2 pi)^2, possibly mixed levels."""

    levels: np.ndarray
    is_: np.ndarray
    js: np.ndarray

    def __post_init__(self):
        lv = np.asarray(self.levels, dtype=np.int64).copy()
        ii = np.asarray(self.is_, dtype=np.int64).copy()
        jj = np.asarray(self.js, dtype=np.int64).copy()
        if not (lv.shape == ii.shape == jj.shape) or lv.ndim != 1:
            raise DomainError("levels/is/js must be matching 1-D arrays")
        if lv.size and (np.any(lv < 0) or np.any(lv > 30)):
            raise DomainError("dyadic levels must lie in [0, 30]")
        for arr in (ii, jj):
            if arr.size and np.any((arr < 0) | (arr >= 2**lv)):
                raise DomainError("square index outside [0, 2^level)")
        order = np.lexsort((jj, ii, lv))
        lv, ii, jj = lv[order], ii[order], jj[order]
        self._check_disjoint(lv, ii, jj)
        for a in (lv, ii, jj):
            a.setflags(write=False)
        object.__setattr__(self, "levels", lv)
        object.__setattr__(self, "is_", ii)
        object.__setattr__(self, "js", jj)

    @staticmethod
    def _check_disjoint(lv: np.ndarray, ii: np.ndarray, jj: np.ndarray) -> None:
        # dyadic squares are disjoint iff no duplicates and no ancestry
        seen: dict[int, set[int]] = {}
        for l in np.unique(lv).tolist():
            mask = lv == l
            keys = (ii[mask] << 31) + jj[mask]
            ks = set(keys.tolist())
            if len(ks) != int(np.sum(mask)):
                raise DomainError("duplicate dyadic squares")
            seen[l] = ks
        levels_present = sorted(seen)
        for a_idx, la in enumerate(levels_present):
            for lb in levels_present[a_idx + 1 :]:
                shift = lb - la
                mask = lv == lb
                anc = ((ii[mask] >> shift) << 31) + (jj[mask] >> shift)
                if any(int(k) in seen[la] for k in anc):
                    raise DomainError("nested dyadic squares are not disjoint")

    def __len__(self) -> int:
        return int(self.levels.size)

    def total_area(self) -> float:
        """Raw area in [0, 2 pi)^2: sum of 4 pi^2 4^(-level)."""
        return float(np.sum((TWO_PI * 0.5 ** self.levels.astype(float)) ** 2))

    def measure(self) -> float:
        """Normalized (Haar) measure: total_area / (4 pi^2)."""
        return self.total_area() / (TWO_PI * TWO_PI)

    def contains(self, t1: np.ndarray, t2: np.ndarray) -> np.ndarray:
        """Boolean membership of angle points (vectorized)."""
        t1 = np.mod(np.asarray(t1, dtype=float), TWO_PI)
        t2 = np.mod(np.asarray(t2, dtype=float), TWO_PI)
        out = np.zeros(t1.shape, dtype=bool)
        for l in np.unique(self.levels).tolist():
            mask = self.levels == l
            keys = np.sort((self.is_[mask] << 31) + self.js[mask])
            scale = 2**l / TWO_PI
            ci = np.minimum(np.floor(t1 * scale).astype(np.int64), 2**l - 1)
            cj = np.minimum(np.floor(t2 * scale).astype(np.int64), 2**l - 1)
            probe = (ci << 31) + cj
            pos = np.searchsorted(keys, probe)
            pos = np.minimum(pos, keys.size - 1)
            out |= keys[pos] == probe
        return out

    def min_gap_to(self, other: "DyadicSquareSet") -> float:
        """Smallest torus sup-distance between closures of the two unions."""
        c1 = self._boxes()
        c2 = other._boxes()
        best = float("inf")
        for lo1, hi1, lo2, hi2 in c1:
            d1 = _torus_interval_gap(lo1, hi1, c2[:, 0], c2[:, 1])
            d2 = _torus_interval_gap(lo2, hi2, c2[:, 2], c2[:, 3])
            gap = np.maximum(d1, d2)
            best = min(best, float(np.min(gap)))
        return best

    def _boxes(self) -> np.ndarray:
        side = TWO_PI * 0.5 ** self.levels.astype(float)
        lo1 = self.is_ * side
        lo2 = self.js * side
        return np.stack([lo1, lo1 + side, lo2, lo2 + side], axis=1)

    def indicator_coefficients(self, order: int) -> FourierDatum2:
        """Truncated Fourier coefficients of the union's indicator."""
        m = np.arange(-order, order + 1)
        total = np.zeros((2 * order + 1, 2 * order + 1), dtype=complex)
        chunk = 20_000
        boxes = self._boxes()
        for lo in range(0, len(boxes), chunk):
            part = boxes[lo : lo + chunk]
            u = _interval_coefficients_batch(part[:, 0], part[:, 1], m)
            v = _interval_coefficients_batch(part[:, 2], part[:, 3], m)
            total += u.T @ v
        return FourierDatum2(total, real=True)


def _interval_coefficients_batch(
    lo: np.ndarray, hi: np.ndarray, m: np.ndarray
) -> np.ndarray:
    """Rows: intervals; columns: Fourier modes m."""
    out = np.empty((lo.size, m.size), dtype=complex)
    nz = m != 0
    mm = m[nz]
    out[:, nz] = (
        np.exp(-1j * np.outer(lo, mm)) - np.exp(-1j * np.outer(hi, mm))
    ) / (TWO_PI * 1j * mm[None, :])
    out[:, ~nz] = ((hi - lo) / TWO_PI)[:, None]
    return out


def _torus_interval_gap(
    lo: float, hi: float, los: np.ndarray, his: np.ndarray
) -> np.ndarray:
    """Distance between closed arcs [lo,hi] and [los,his] on R mod 2 pi."""
    best = None
    for shift in (-TWO_PI, 0.0, TWO_PI):
        g = np.maximum(np.maximum(los - (hi + shift), (lo + shift) - his), 0.0)
        best = g if best is None else np.minimum(best, g)
    return best


# ---------------------------------------------------------------------------
# Rudin cancellation and analytic completion
# ---------------------------------------------------------------------------


def rudin_datum(
    p_list: Sequence[FourierDatum2],
    k_list: Sequence[int],
    order: Optional[int] = None,
    mollify_copies: Optional[int] = None,
) -> FourierDatum2:
    """Fourier data of sum_j (p_j - p_j x ring_{k_j}), boxed to ``order``.

    Requires k_j >= deg(p_j).  The p_j term cancels the l = 0 copy of the
    shifted sum structurally, so the output is assembled as
    -sum_{l != 0} w(l) p_hat_j(a - k_j l, b - k_j l); mixed-quadrant
    coefficients (a*b < 0) are therefore identically zero, which is
    asserted before returning.

    ``mollify_copies`` switches the copy weights w(l) from the hard sum
    (w = 1 on every overlapping l) to the Fejer window
    w(l) = max(0, 1 - |l|/(L+1)).  The windowed object is the product of
    the density with a non-negative kernel concentrating on the rings,
    so the real part of the completed function keeps the pointwise upper
    bound of the boundary target; the hard sum does not.
    """
    if len(p_list) != len(k_list):
        raise DomainError("p_list and k_list lengths differ")
    for p, k in zip(p_list, k_list):
        if k < p.degree():
            raise DomainError(
                f"ring order {k} below density degree {p.degree()}"
            )
        if not p.real:
            raise DomainError("densities must be real data")
    if order is None:
        order = max((p.degree() for p in p_list), default=0)
    out = np.zeros((2 * order + 1, 2 * order + 1), dtype=complex)
    for p, k in zip(p_list, k_list):
        m1, m2 = p.box
        l_max = (order + max(m1, m2)) // k + 1
        if mollify_copies is not None:
            l_max = min(l_max, mollify_copies)
        for l in range(-l_max, l_max + 1):
            if l == 0:
                continue
            weight = 1.0
            if mollify_copies is not None:
                weight = 1.0 - abs(l) / (mollify_copies + 1.0)
            s = k * l
            a_lo, a_hi = max(-order, s - m1), min(order, s + m1)
            b_lo, b_hi = max(-order, s - m2), min(order, s + m2)
            if a_lo > a_hi or b_lo > b_hi:
                continue
            out[a_lo + order : a_hi + order + 1,
                b_lo + order : b_hi + order + 1] -= weight * p.data[
                a_lo - s + m1 : a_hi - s + m1 + 1,
                b_lo - s + m2 : b_hi - s + m2 + 1,
            ]
    a_idx = np.arange(-order, order + 1)
    mixed = (a_idx[:, None] * a_idx[None, :]) < 0
    if np.any(out[mixed] != 0):
        raise AssertionError("mixed-quadrant coefficients must vanish exactly")
    return FourierDatum2(out, real=True)


@dataclass(frozen=True)
class BidiscAnalytic:
    """Truncated Taylor series on the bidisc, support in m, n >= 0.

    ``coeffs[m, n]`` multiplies z1^m z2^n; entries with m + n above the
    total-degree bound are zero.  ``tail_estimate`` carries the energy of
    the last retained total degree when the object came from a series
    operation.
    """

    coeffs: np.ndarray
    tail_estimate: float = 0.0

    def __post_init__(self):
        arr = np.asarray(self.coeffs, dtype=complex).copy()
        if arr.ndim != 2:
            raise DomainError("Taylor coefficients must form a 2-D array")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @classmethod
    def from_items(
        cls, items: Iterable[tuple[int, int, complex]]
    ) -> "BidiscAnalytic":
        items = list(items)
        d1 = max((m for m, _, _ in items), default=0)
        d2 = max((n for _, n, _ in items), default=0)
        arr = np.zeros((d1 + 1, d2 + 1), dtype=complex)
        for m, n, v in items:
            if m < 0 or n < 0:
                raise DomainError("Taylor support must sit in the closed quadrant")
            arr[m, n] += v
        return cls(arr)

    def coefficient(self, m: int, n: int) -> complex:
        if m < 0 or n < 0 or m >= self.coeffs.shape[0] or n >= self.coeffs.shape[1]:
            return 0j
        return complex(self.coeffs[m, n])

    def total_degree(self) -> int:
        ms, ns = np.nonzero(self.coeffs)
        if ms.size == 0:
            return 0
        return int(np.max(ms + ns))

    def evaluate(self, z1: complex, z2: complex) -> complex:
        d1, d2 = self.coeffs.shape
        w1 = z1 ** np.arange(d1)
        w2 = z2 ** np.arange(d2)
        return complex(w1 @ self.coeffs @ w2)

    def evaluate_batch(self, z1: np.ndarray, z2: np.ndarray) -> np.ndarray:
        """Values at paired points (vectorized Horner-free contraction)."""
        d1, d2 = self.coeffs.shape
        z1 = np.asarray(z1, dtype=complex).ravel()
        z2 = np.asarray(z2, dtype=complex).ravel()
        w2 = np.power(z2[:, None], np.arange(d2)[None, :])  # (npts, d2)
        inner = w2 @ self.coeffs.T  # (npts, d1)
        w1 = np.power(z1[:, None], np.arange(d1)[None, :])
        return np.sum(w1 * inner, axis=1)


def pluriharmonic_complete(datum: FourierDatum2) -> BidiscAnalytic:
    """Analytic H with Re H equal to the extension of the datum.

    Requires a real datum whose mixed-quadrant energy is <= 1e-12 (the
    pluriharmonicity certificate).  H doubles the open positive-quadrant
    coefficients and keeps the mean: H_hat(0,0) = datum(0,0),
    H_hat(m,n) = 2 datum(m,n) otherwise (m, n >= 0).
    """
    if not datum.real:
        raise DomainError("completion needs a real boundary datum")
    m1, m2 = datum.box
    a_idx = np.arange(-m1, m1 + 1)
    b_idx = np.arange(-m2, m2 + 1)
    mixed = (a_idx[:, None] * b_idx[None, :]) < 0
    energy = float(np.sum(np.abs(datum.data[mixed]) ** 2))
    if energy > 1e-12:
        raise DomainError(
            f"datum is not pluriharmonic: mixed-quadrant energy {energy:.3e}"
        )
    pos = datum.data[m1:, m2:].copy()  # (m,n) >= 0 block
    pos *= 2.0
    pos[0, 0] *= 0.5
    return BidiscAnalytic(pos)


def exp_series(H: BidiscAnalytic, K: float, D: int) -> BidiscAnalytic:
    """Taylor series of exp(K (H - 1)) truncated to total degree D.

    Uses the differential recurrence m G_{m,.} = K sum_a a H_{a,.} * G_{m-a,.}
    (convolution in the second index, FFT-accelerated), with the first row
    seeded by the 1-D exponential recurrence.  The energy at total degree
    exactly D is kept as the tail estimate.
    """
    if K <= 0:
        raise DomainError("exponent gain K must be positive")
    dH = H.total_degree()
    if D < dH:
        raise DomainError(f"degree budget {D} below degree of H ({dH})")
    A = np.zeros((D + 1, D + 1), dtype=complex)
    src = H.coeffs
    A[: src.shape[0], : src.shape[1]] = K * src
    A[0, 0] -= K  # exp(K(H-1))
    # zero out anything beyond total degree D in A (defensive; dH <= D)
    tri = np.add.outer(np.arange(D + 1), np.arange(D + 1)) > D
    A[tri] = 0.0

    G = np.zeros((D + 1, D + 1), dtype=complex)
    # first row: 1-D exponential of A[0, :]
    g0 = np.zeros(D + 1, dtype=complex)
    g0[0] = np.exp(A[0, 0])
    b = A[0, :]
    nb = np.arange(D + 1) * b  # n * b_n
    for n in range(1, D + 1):
        g0[n] = np.dot(nb[1 : n + 1], g0[n - 1 :: -1][: n]) / n
    G[0, :] = g0

    P = 1
    while P < 2 * (D + 1):
        P *= 2
    H_rows = np.fft.fft(
        A[1:, :] * np.arange(1, D + 1)[:, None], n=P, axis=1
    )  # row a holds FFT of a * A[a, :]
    G_rows_fft = np.zeros((D + 1, P), dtype=complex)
    G_rows_fft[0] = np.fft.fft(g0, n=P)
    for m in range(1, D + 1):
        a_max = min(m, D)
        acc = np.einsum(
            "ij,ij->j", H_rows[:a_max, :], G_rows_fft[m - 1 :: -1][:a_max, :]
        )
        row = np.fft.ifft(acc)[: D + 1] / m
        row[D + 1 - m :] = 0.0  # enforce total degree
        G[m, :] = row
        G_rows_fft[m] = np.fft.fft(row, n=P)
    tail = math.sqrt(
        float(np.sum(np.abs(G[np.add.outer(np.arange(D + 1), np.arange(D + 1)) == D]) ** 2))
    )
    return BidiscAnalytic(G, tail_estimate=tail)


def h2_norm_bidisc(G: BidiscAnalytic) -> float:
    """Coefficient-energy square root = the Hardy 2-norm on the bidisc."""
    return math.sqrt(float(np.sum(np.abs(G.coeffs) ** 2)))


_LOG2 = math.log(2.0)
_LOG3 = math.log(3.0)


def curve_trace(
    G: BidiscAnalytic,
    sigma: float,
    t_range: tuple[float, float],
    n_samples: int,
    delta: float = 1e-4,
) -> tuple[np.ndarray, np.ndarray]:
    """|G(2^(-sigma-it), 3^(-sigma-it))| sampled along a vertical line.

    For sigma = 0 the boundary values are approached quasi-radially at
    radii 1 - delta on both coordinates.
    """
    if sigma < 0:
        raise DomainError("sigma must be >= 0")
    if n_samples < 2:
        raise DomainError("need at least two samples")
    t0, t1 = (float(x) for x in t_range)
    t = np.linspace(t0, t1, n_samples)
    if sigma > 0:
        r1, r2 = 2.0**-sigma, 3.0**-sigma
    else:
        r1 = r2 = 1.0 - delta
    z1 = r1 * np.exp(-1j * t * _LOG2)
    z2 = r2 * np.exp(-1j * t * _LOG3)
    vals = np.abs(G.evaluate_batch(z1, z2))
    return t, vals
