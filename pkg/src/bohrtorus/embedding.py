"""Numerical laboratory for the critical-line embedding problem.

The central quantity is the ratio of the local critical-line energy
int_0^1 |f(1/2+it)|^p dt to the torus norm ||f||^p.  For even p the
denominator is exact; otherwise it is Monte-Carlo with a confidence
interval that the search machinery respects (a candidate step is kept
only if the lower confidence bound improves, which stops the optimizer
from chasing estimator noise).

All outputs are experimental probes with error bars, not resolutions of
the underlying open problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _quad
from .arith import PrimeTable, default_table
from .errors import DomainError
from .poly import DirichletPolynomial, hp_norm_even, hp_norm_mc

COEFFICIENT_BOX = 8.0  # search-space cap on |a_n|


@dataclass(frozen=True)
class EmbeddingResult:
    """One embedding-ratio probe with both error bars."""

    p: float
    numerator: float
    denominator: float
    ratio: float
    denominator_method: str
    numerator_error: float = 0.0
    denominator_error: float = 0.0

    @property
    def ratio_lower(self) -> float:
        den = self.denominator + self.denominator_error
        num = max(self.numerator - self.numerator_error, 0.0)
        return num / den if den > 0 else 0.0

    @property
    def ratio_upper(self) -> float:
        den = max(self.denominator - self.denominator_error, 0.0)
        num = self.numerator + self.numerator_error
        return num / den if den > 0 else math.inf


@dataclass
class SearchTrace:
    """Improvement history of an extremal search (best ratio nondecreasing)."""

    seed: int
    strategy: str
    iterations: list[tuple[int, float, dict[int, complex]]] = field(
        default_factory=list
    )

    def record(self, step: int, best_ratio: float, coeffs: dict[int, complex]):
        if self.iterations and best_ratio < self.iterations[-1][1]:
            raise AssertionError("search trace must be nondecreasing")
        self.iterations.append((step, best_ratio, dict(coeffs)))


def embedding_ratio(
    f: DirichletPolynomial,
    p: float,
    mc_samples: int = 200_000,
    seed: int = 0,
    threads: Optional[int] = None,
) -> EmbeddingResult:
    """Local critical-line energy over the torus norm, both to the power p.

    Numerator: quadrature of |f(1/2+it)|^p over [0, 1].  Denominator:
    exact convolution-power norm for even p, Monte-Carlo otherwise.
    """
    if p <= 0:
        raise DomainError("p must be positive")
    if not f.coefficients:
        raise DomainError("embedding ratio needs a nonzero polynomial")
    logs, coeffs = f.line_data(0.5)
    num, num_err = _quad.line_mean(
        logs, coeffs, 0.0, 1.0, p, f.max_index, threads=threads
    )
    k = int(round(p / 2.0))
    if p == 2.0 * k and k >= 1:
        est = hp_norm_even(f, k)
        den = est.value**p
        den_err = 0.0
        method = est.method
    else:
        est = hp_norm_mc(f, p, mc_samples, seed, threads=threads)
        den = est.value**p
        den_err = float(est.meta.get("mean_error", 0.0))
        method = est.method
    return EmbeddingResult(
        p=p,
        numerator=num,
        denominator=den,
        ratio=num / den,
        denominator_method=method,
        numerator_error=num_err,
        denominator_error=den_err,
    )


def _unit_disc_sample(rng: np.random.Generator, size: int) -> np.ndarray:
    radius = np.sqrt(rng.uniform(0.0, 1.0, size))
    angle = rng.uniform(0.0, 2.0 * math.pi, size)
    return radius * np.exp(1j * angle)


def embedding_search(
    p: float,
    N: int,
    n_restarts: int = 4,
    n_steps: int = 200,
    seed: int = 0,
    mc_samples: int = 20_000,
    threads: Optional[int] = None,
) -> tuple[DirichletPolynomial, SearchTrace]:
    """Maximize the embedding ratio over coefficients on support {1..N}.

    Random restarts (stream r is seeded with seed XOR r) start from
    unit-disc coefficients; each step perturbs one coefficient, projects
    back into the |a_n| <= 8 box and keeps the step only if the lower
    confidence bound of the ratio improves.  Restarts are merged by best
    ratio with ties resolved toward the lower restart index.
    """
    if N < 1:
        raise DomainError("support bound N must be >= 1")
    best_result: Optional[tuple[float, int, dict, SearchTrace]] = None
    for r in range(n_restarts):
        rng = np.random.default_rng(seed ^ r)
        coeffs = {
            n: complex(c)
            for n, c in zip(range(1, N + 1), _unit_disc_sample(rng, N))
        }
        trace = SearchTrace(seed=seed, strategy=f"restart-{r}/coordinate-ascent")
        current = embedding_ratio(
            DirichletPolynomial(coeffs), p, mc_samples, seed ^ r, threads
        )
        best_lcb = current.ratio_lower
        best_ratio = current.ratio
        trace.record(0, best_ratio, coeffs)
        scale = 0.5
        for step in range(1, n_steps + 1):
            n = int(rng.integers(1, N + 1))
            delta = complex(rng.normal(0.0, scale), rng.normal(0.0, scale))
            cand = dict(coeffs)
            value = cand.get(n, 0j) + delta
            if abs(value) > COEFFICIENT_BOX:
                value *= COEFFICIENT_BOX / abs(value)
            if value == 0 and len(cand) == 1 and n in cand:
                continue  # never step onto the zero polynomial
            cand[n] = value
            poly = DirichletPolynomial(cand)
            if not poly.coefficients:
                continue
            result = embedding_ratio(poly, p, mc_samples, seed ^ r, threads)
            if result.ratio_lower > best_lcb:
                coeffs = {k: v for k, v in cand.items() if v != 0}
                best_lcb = result.ratio_lower
                best_ratio = result.ratio
                trace.record(step, best_ratio, coeffs)
            scale *= 0.995
        if best_result is None or best_ratio > best_result[0]:
            best_result = (best_ratio, r, coeffs, trace)
    assert best_result is not None
    _, _, coeffs, trace = best_result
    return DirichletPolynomial(coeffs), trace


def montgomery_ratio(
    f: DirichletPolynomial,
    p: float,
    T: float,
    eps: float,
    threads: Optional[int] = None,
) -> float:
    """int_0^T |f(it)|^p dt over N^(p/2+eps) (T + N^(p/2)).

    Coefficients are required to satisfy |a_n| <= 1; the conjectured
    inequality bounds this ratio for p strictly between 2 and 4, and it
    is known at the even endpoints.
    """
    if not 2.0 <= p <= 4.0:
        raise DomainError("exponent p must lie in [2, 4]")
    if T <= 1.0:
        raise DomainError("T must exceed 1")
    if eps <= 0:
        raise DomainError("eps must be positive")
    if not f.coefficients:
        raise DomainError("montgomery ratio needs a nonzero polynomial")
    tol = 1e-12
    for n, a in f.coefficients.items():
        if abs(a) > 1.0 + tol:
            raise DomainError(f"|a_{n}| = {abs(a):.6f} exceeds 1")
    logs, coeffs = f.line_data(0.0)
    mean, _ = _quad.line_mean(logs, coeffs, 0.0, T, p, f.max_index, threads=threads)
    numerator = mean * T
    N = float(f.max_index)
    return numerator / (N ** (p / 2.0 + eps) * (T + N ** (p / 2.0)))


def _midpoints(M: int) -> np.ndarray:
    return (np.arange(M) + 0.5) / M


def adjoint_A(
    g_samples: Sequence[complex],
    N: int,
    table: Optional[PrimeTable] = None,
) -> DirichletPolynomial:
    """Coefficients n^(-1/2) g_hat(ln n) from midpoint samples of g on [0,1].

    The transform convention is g_hat(xi) = int_0^1 g(t) exp(-i xi t) dt,
    discretized by the midpoint rule on the given uniform samples; the
    pairing in duality_probe uses the same rule, which makes the
    adjointness identity exact in exact arithmetic.
    """
    g = np.asarray([complex(x) for x in g_samples], dtype=complex)
    if g.size < 16:
        raise DomainError("need at least 16 samples of g")
    if N < 1:
        raise DomainError("N must be >= 1")
    t = _midpoints(g.size)
    n = np.arange(1, N + 1, dtype=float)
    phases = np.exp(-1j * np.outer(np.log(n), t))  # (N, M)
    ghat = phases @ g / g.size
    coeffs = ghat / np.sqrt(n)
    return DirichletPolynomial(
        {i + 1: complex(c) for i, c in enumerate(coeffs.tolist())}
    )


@dataclass(frozen=True)
class DualityReport:
    """Both sides of the adjointness identity and their difference."""

    pairing_integral: complex
    pairing_coefficients: complex

    @property
    def difference(self) -> complex:
        return self.pairing_integral - self.pairing_coefficients


def duality_probe(
    f: DirichletPolynomial,
    g_samples: Sequence[complex],
    table: Optional[PrimeTable] = None,
) -> DualityReport:
    """Critical-line pairing of f against g versus the coefficient pairing.

    Integral side: (1/M) sum_k f(1/2 - i t_k) conj(g(t_k)) over midpoint
    samples (the window is oriented to match the transform convention of
    adjoint_A).  Coefficient side: sum_n a_n conj(b_n) with b the
    adjoint coefficients of g.  The two agree to roundoff by
    construction; the residual difference measures nothing but floating
    error.
    """
    g = np.asarray([complex(x) for x in g_samples], dtype=complex)
    if g.size < 16:
        raise DomainError("need at least 16 samples of g")
    if not f.coefficients:
        raise DomainError("duality probe needs a nonzero polynomial")
    t = _midpoints(g.size)
    ns = np.array(f.support(), dtype=float)
    a = np.array([f.coefficients[int(n)] for n in ns], dtype=complex)
    line = np.exp(1j * np.outer(t, np.log(ns))) @ (a / np.sqrt(ns))
    left = complex(np.sum(line * np.conj(g)) / g.size)
    b = adjoint_A(g_samples, f.max_index, table)
    right = complex(
        sum(
            f.coefficients[n] * np.conj(b.coefficients.get(n, 0j))
            for n in f.support()
        )
    )
    return DualityReport(pairing_integral=left, pairing_coefficients=right)
