"""File formats: polynomials, Fourier data, mean reports, search results.

Polynomial files are JSON arrays of {"n": int, "re": float, "im": float};
unknown fields and duplicate indices are rejected.  Fourier data use
{"m", "n", "re", "im"} the same way.  Mean reports serialize as CSV with
the fixed column order (T, sigma, p, value, target, error_bound, flag)
or as JSON objects with the same keys.
"""

from __future__ import annotations

import csv
import io as _io
import json
from typing import Iterable, Sequence, TextIO

from .bidisc import FourierDatum2
from .errors import DomainError
from .means import MeanReport
from .poly import DirichletPolynomial

MEAN_REPORT_COLUMNS = ("T", "sigma", "p", "value", "target", "error_bound", "flag")


def polynomial_to_obj(f: DirichletPolynomial) -> list[dict]:
    return [
        {"n": n, "re": float(a.real), "im": float(a.imag)}
        for n, a in sorted(f.coefficients.items())
    ]


def polynomial_from_obj(obj) -> DirichletPolynomial:
    if not isinstance(obj, list):
        raise DomainError("polynomial file must be a JSON array")
    coeffs: dict[int, complex] = {}
    for row in obj:
        if not isinstance(row, dict):
            raise DomainError("polynomial entries must be objects")
        extra = set(row) - {"n", "re", "im"}
        if extra:
            raise DomainError(f"unknown polynomial fields: {sorted(extra)}")
        if "n" not in row:
            raise DomainError("polynomial entry lacks the index field n")
        n = row["n"]
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise DomainError(f"bad polynomial index {n!r}")
        if n in coeffs:
            raise DomainError(f"duplicate polynomial index {n}")
        coeffs[n] = complex(float(row.get("re", 0.0)), float(row.get("im", 0.0)))
    return DirichletPolynomial(coeffs)


def write_polynomial(f: DirichletPolynomial, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(polynomial_to_obj(f), fh, indent=1)
        fh.write("\n")


def read_polynomial(path: str) -> DirichletPolynomial:
    with open(path, "r", encoding="utf-8") as fh:
        return polynomial_from_obj(json.load(fh))


def datum_to_obj(d: FourierDatum2) -> list[dict]:
    return [
        {"m": m, "n": n, "re": float(v.real), "im": float(v.imag)}
        for m, n, v in sorted(d.items())
    ]


def datum_from_obj(obj) -> FourierDatum2:
    if not isinstance(obj, list):
        raise DomainError("datum file must be a JSON array")
    items = []
    seen = set()
    for row in obj:
        extra = set(row) - {"m", "n", "re", "im"}
        if extra:
            raise DomainError(f"unknown datum fields: {sorted(extra)}")
        key = (row["m"], row["n"])
        if key in seen:
            raise DomainError(f"duplicate datum index {key}")
        seen.add(key)
        items.append(
            (int(row["m"]), int(row["n"]),
             complex(float(row.get("re", 0.0)), float(row.get("im", 0.0))))
        )
    return FourierDatum2.from_items(items)


def mean_report_row(r: MeanReport) -> list:
    return [
        r.T, r.sigma, r.p, r.value,
        "" if r.target is None else r.target,
        r.error_bound,
        "" if r.consistent is None else str(bool(r.consistent)).lower(),
    ]


def write_mean_reports_csv(reports: Sequence[MeanReport], fh: TextIO) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(MEAN_REPORT_COLUMNS)
    for r in reports:
        writer.writerow(mean_report_row(r))


def mean_reports_csv(reports: Sequence[MeanReport]) -> str:
    buf = _io.StringIO()
    write_mean_reports_csv(reports, buf)
    return buf.getvalue()


def mean_reports_json(reports: Sequence[MeanReport]) -> list[dict]:
    out = []
    for r in reports:
        out.append(
            {
                "T": r.T, "sigma": r.sigma, "p": r.p, "value": r.value,
                "target": r.target, "error_bound": r.error_bound,
                "flag": r.consistent, "heuristic": r.heuristic,
                "notes": r.notes,
            }
        )
    return out


def search_result_obj(
    p: float,
    N: int,
    seed: int,
    best_ratio: float,
    f: DirichletPolynomial,
    trace_iterations: Iterable[tuple[int, float, dict[int, complex]]],
) -> dict:
    return {
        "p": p,
        "N": N,
        "seed": seed,
        "best_ratio": best_ratio,
        "coefficients": polynomial_to_obj(f),
        "trace": [
            {
                "step": step,
                "best_ratio": ratio,
                "coefficients": polynomial_to_obj(DirichletPolynomial(snap)),
            }
            for step, ratio, snap in trace_iterations
        ],
    }


def trace_csv(trace_iterations: Iterable[tuple[int, float, dict]]) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("step", "best_ratio"))
    for step, ratio, _ in trace_iterations:
        writer.writerow((step, ratio))
    return buf.getvalue()


def trace_points_csv(t, values) -> str:
    """(t, modulus) trace as CSV."""
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("t", "modulus"))
    for a, b in zip(t, values):
        writer.writerow((float(a), float(b)))
    return buf.getvalue()
