"""Exact integer, prime and multi-index arithmetic.

Everything the Bohr correspondence needs: a sieved prime table, prime
factorization as exponent multi-indices, and Dirichlet convolution of
sparse coefficient maps.  All values are immutable after construction
and safe to share between threads.

Index arithmetic is 64-bit checked: convolution and multi-index
reconstruction reject any product above 2**63 - 1 instead of silently
wrapping, see MAX_INDEX.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Optional, Sequence

import numpy as np

from .errors import CapacityError, DomainError

MAX_INDEX = 2**63 - 1

_DEFAULT_PRIME_COUNT = 10_000


def _sieve_upto(limit: int) -> np.ndarray:
    """All primes <= limit as an int64 array (Eratosthenes)."""
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, int(limit**0.5) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return np.nonzero(mask)[0].astype(np.int64)


def _upper_bound_for_nth_prime(n: int) -> int:
    # Rosser-type bound, valid for n >= 6; padded for small n.
    if n < 6:
        return 15
    x = float(n)
    return int(x * (np.log(x) + np.log(np.log(x)))) + 10


class PrimeTable:
    """The first ``count`` primes, sieved once at construction.

    Optionally carries a smallest-prime-factor table up to ``spf_limit``
    which makes ``factorize`` run in O(number of prime factors) per call;
    without it factorization falls back to trial division over the table.
    """

    def __init__(self, count: int = _DEFAULT_PRIME_COUNT, spf_limit: int = 0):
        if count < 1:
            raise DomainError("prime table needs at least one prime")
        bound = _upper_bound_for_nth_prime(count)
        primes = _sieve_upto(bound)
        while primes.size < count:  # bound is safe; loop is a guard
            bound *= 2
            primes = _sieve_upto(bound)
        self.primes: np.ndarray = primes[:count]
        self.primes.setflags(write=False)
        self._largest = int(self.primes[-1])
        self._primes_list: Optional[list[int]] = None
        self._spf: Optional[list[int]] = None
        self._slot_of_prime: Optional[dict[int, int]] = None
        if spf_limit:
            self.build_spf(spf_limit)

    def _as_list(self) -> list[int]:
        if self._primes_list is None:
            self._primes_list = self.primes.tolist()
        return self._primes_list

    def __len__(self) -> int:
        return int(self.primes.size)

    @classmethod
    def up_to(cls, limit: int, spf_limit: int = 0) -> "PrimeTable":
        """Table holding every prime <= limit."""
        n = int(_sieve_upto(limit).size)
        return cls(max(n, 1), spf_limit=spf_limit)

    def build_spf(self, limit: int) -> None:
        """Precompute smallest prime factors for 2..limit."""
        limit = int(limit)
        spf = np.zeros(limit + 1, dtype=np.int64)
        spf[2::2] = 2
        for p in range(3, int(limit**0.5) + 1, 2):
            if spf[p] == 0:
                spf[p * p :: 2 * p] = np.where(
                    spf[p * p :: 2 * p] == 0, p, spf[p * p :: 2 * p]
                )
        rest = np.nonzero(spf == 0)[0]
        spf[rest] = rest  # remaining entries are prime (or 0, 1)
        self._spf = spf.tolist()
        self._slot_of_prime = {
            int(p): j for j, p in enumerate(self.primes.tolist(), start=1)
        }

    def nth(self, j: int) -> int:
        """The j-th prime, 1-based: nth(1) == 2."""
        if j < 1:
            raise DomainError(f"prime index must be >= 1, got {j}")
        if j > len(self):
            raise CapacityError(
                f"prime table holds {len(self)} primes, index {j} requested"
            )
        return int(self.primes[j - 1])

    def slot(self, p: int) -> int:
        """1-based slot of the prime p in this table."""
        if self._slot_of_prime is not None:
            j = self._slot_of_prime.get(p)
            if j is not None:
                return j
            raise CapacityError(f"prime {p} beyond table (largest {self._largest})")
        j = int(np.searchsorted(self.primes, p))
        if j >= len(self) or int(self.primes[j]) != p:
            raise CapacityError(f"prime {p} beyond table (largest {self._largest})")
        return j + 1


_default_table: Optional[PrimeTable] = None


def default_table() -> PrimeTable:
    global _default_table
    if _default_table is None:
        _default_table = PrimeTable()
    return _default_table


class MultiIndex:
    """Exponent vector of a prime factorization (the Bohr coordinate).

    Semantically a finite sequence (b1, b2, ..., bk) of non-negative
    integers with bk > 0 (canonical trimming); the empty sequence is the
    integer 1.  Stored sparsely as (slot, exponent) pairs so that indices
    with one huge prime factor stay cheap.
    """

    __slots__ = ("_pairs",)

    def __init__(self, exponents: Iterable[int] = ()):
        pairs = []
        for j, e in enumerate(exponents, start=1):
            e = int(e)
            if e < 0:
                raise DomainError("multi-index exponents must be >= 0")
            if e:
                pairs.append((j, e))
        self._pairs = tuple(pairs)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> "MultiIndex":
        """Build from 1-based (slot, exponent) pairs; zeros are dropped."""
        self = cls.__new__(cls)
        clean = sorted((int(j), int(e)) for j, e in pairs if int(e) != 0)
        for idx, (j, e) in enumerate(clean):
            if j < 1 or e < 0:
                raise DomainError(f"bad multi-index pair ({j}, {e})")
            if idx and clean[idx - 1][0] == j:
                raise DomainError(f"duplicate multi-index slot {j}")
        self._pairs = tuple(clean)
        return self

    @property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        return self._pairs

    @property
    def exponents(self) -> tuple[int, ...]:
        """Dense exponent tuple; O(largest slot), intended for small indices."""
        if not self._pairs:
            return ()
        dense = [0] * self._pairs[-1][0]
        for j, e in self._pairs:
            dense[j - 1] = e
        return tuple(dense)

    def __len__(self) -> int:
        """Support length = position of the last nonzero exponent."""
        return self._pairs[-1][0] if self._pairs else 0

    def __iter__(self) -> Iterator[int]:
        return iter(self.exponents)

    def exponent(self, j: int) -> int:
        """Exponent at 1-based slot j."""
        for slot, e in self._pairs:
            if slot == j:
                return e
        return 0

    def __add__(self, other: "MultiIndex") -> "MultiIndex":
        acc = dict(self._pairs)
        for j, e in other._pairs:
            acc[j] = acc.get(j, 0) + e
        return MultiIndex.from_pairs(acc.items())

    def __eq__(self, other: object) -> bool:
        return isinstance(other, MultiIndex) and self._pairs == other._pairs

    def __hash__(self) -> int:
        return hash(self._pairs)

    def __repr__(self) -> str:
        if len(self) <= 12:
            return f"MultiIndex{self.exponents!r}"
        return f"MultiIndex.from_pairs({list(self._pairs)!r})"

    def degree(self) -> int:
        """Total degree: sum of exponents."""
        return sum(e for _, e in self._pairs)


def nth_prime(j: int, table: Optional[PrimeTable] = None) -> int:
    """The j-th prime (1-based), from the shared table by default."""
    return (table or default_table()).nth(j)


def factorize(n: int, table: Optional[PrimeTable] = None) -> MultiIndex:
    """Prime-exponent multi-index of n >= 1; inverse of multiindex_to_integer."""
    n = int(n)
    if n < 1:
        raise DomainError(f"factorize expects n >= 1, got {n}")
    if n == 1:
        return MultiIndex()
    t = table or default_table()
    if t._spf is not None and n < len(t._spf):
        spf = t._spf
        slot_of = t._slot_of_prime
        pairs = []
        m = n
        while m > 1:
            p = spf[m]
            e = 0
            while True:
                m, r = divmod(m, p)
                if r:
                    m = m * p + r
                    break
                e += 1
            j = slot_of.get(p)
            if j is None:
                raise CapacityError(f"prime factor {p} of {n} beyond table")
            pairs.append((j, e))
        return MultiIndex.from_pairs(pairs)
    # Trial division over the table.
    pairs = []
    m = n
    for j, p in enumerate(t._as_list(), start=1):
        if p * p > m:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            pairs.append((j, e))
        if m == 1:
            break
    if m > 1:
        # cofactor is certified prime only when every prime <= sqrt(m)
        # was available for trial division
        if m > t._largest * t._largest:
            raise CapacityError(
                f"cannot certify factorization of {n}: cofactor {m} beyond table"
            )
        pairs.append((t.slot(m), 1))
    return MultiIndex.from_pairs(pairs)


def multiindex_to_integer(beta: MultiIndex, table: Optional[PrimeTable] = None) -> int:
    """Product of p_j**b_j; 64-bit checked."""
    t = table or default_table()
    n = 1
    for j, e in beta.pairs:
        p = t.nth(j)
        for _ in range(e):
            n *= p
            if n > MAX_INDEX:
                raise CapacityError(f"index {beta!r} exceeds 2**63-1")
    return n


def dirichlet_convolve(
    a: Mapping[int, complex], b: Mapping[int, complex]
) -> dict[int, complex]:
    """Coefficient convolution c_n = sum_{d*e=n} a_d b_e (series product).

    Exact complex arithmetic on the stored values; the result is canonical
    (no explicitly stored zeros).  Raises CapacityError if any product
    index would exceed 2**63 - 1.
    """
    out: dict[int, complex] = {}
    for m, am in a.items():
        if m < 1:
            raise DomainError(f"coefficient index {m} < 1")
        for n, bn in b.items():
            if m > MAX_INDEX // n:
                raise CapacityError(f"convolution index {m}*{n} exceeds 2**63-1")
            k = m * n
            v = out.get(k, 0j) + am * bn
            if v == 0:
                out.pop(k, None)
            else:
                out[k] = v
    return out


def canonical_map(entries: Mapping[int, complex]) -> dict[int, complex]:
    """Validated sparse coefficient map: integer keys >= 1, no stored zeros."""
    out: dict[int, complex] = {}
    for n, v in entries.items():
        n = int(n)
        if n < 1:
            raise DomainError(f"coefficient index {n} < 1")
        v = complex(v)
        if v != 0:
            out[n] = v
    return out


def primes_needed(ns: Sequence[int], table: Optional[PrimeTable] = None) -> int:
    """Largest prime slot used by any index in ns (0 for all-ones)."""
    t = table or default_table()
    d = 0
    for n in ns:
        beta = factorize(n, t)
        if len(beta) > d:
            d = len(beta)
    return d
