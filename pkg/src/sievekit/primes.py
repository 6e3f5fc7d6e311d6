"""Prime tables, factor counting and the elementary sums over primes.

Everything here is pure given an immutable :class:`PrimeTable`; tables can be
shared between worker processes once built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .errors import PreconditionError

# odd numbers per sieve segment
DEFAULT_SEGMENT = 1 << 20

INT64_SAFE = 1 << 62


def _small_primes(limit: int) -> np.ndarray:
    """Plain sieve of Eratosthenes, used for base primes only."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for p in range(3, math.isqrt(limit) + 1, 2):
        if flags[p]:
            flags[p * p :: 2 * p] = False
    return np.flatnonzero(flags).astype(np.int64)


def prime_segments(lo: int, hi: int, segment: int = DEFAULT_SEGMENT) -> Iterator[np.ndarray]:
    """Yield the primes in ``[lo, hi]`` segment by segment, in increasing order.

    Each segment covers ``segment`` odd numbers (a bool per odd number), so a
    segment of the default size stays cache resident.
    """
    lo = max(lo, 2)
    if hi < lo:
        return
    if lo == 2:
        yield np.array([2], dtype=np.int64)
        lo = 3
    if hi < 3:
        return
    base = _small_primes(math.isqrt(hi))[1:]  # odd base primes
    start = lo | 1  # first odd number >= lo
    while start <= hi:
        stop = min(start + 2 * segment, hi + 1)  # exclusive
        n = (stop - start + 1) // 2
        flags = np.ones(n, dtype=bool)
        top = math.isqrt(stop - 1)
        for p in base:
            p = int(p)
            if p > top:
                break
            first = max(p * p, ((start + p - 1) // p) * p)
            if first % 2 == 0:
                first += p
            if first >= stop:
                continue
            flags[(first - start) // 2 :: p] = False
        found = start + 2 * np.flatnonzero(flags).astype(np.int64)
        if found.size:
            yield found
        start = stop if stop % 2 else stop + 1


def next_prime(n: int) -> int:
    """Smallest prime strictly greater than ``n``."""
    width = 256
    lo = n + 1
    while True:
        for seg in prime_segments(lo, lo + width):
            return int(seg[0])
        lo += width + 1
        width *= 2


@dataclass(frozen=True)
class PrimeTable:
    """All primes up to ``limit`` in increasing order."""

    limit: int
    primes: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return int(self.primes.size)

    def __iter__(self):
        return iter(self.primes.tolist())

    def pi(self, x: float) -> int:
        """Number of tabled primes ``<= x``."""
        return int(np.searchsorted(self.primes, math.floor(x), side="right"))

    def below(self, x: float) -> np.ndarray:
        """Primes strictly below ``x``."""
        return self.primes[: int(np.searchsorted(self.primes, math.ceil(x), side="left"))]

    def upto(self, x: float) -> np.ndarray:
        return self.primes[: self.pi(x)]

    def between(self, a: float, b: float) -> np.ndarray:
        """Primes ``p`` with ``a <= p < b``."""
        i = int(np.searchsorted(self.primes, math.ceil(a), side="left"))
        j = int(np.searchsorted(self.primes, math.ceil(b), side="left"))
        return self.primes[i:j]


def primes_up_to(limit: int, segment: int = DEFAULT_SEGMENT) -> PrimeTable:
    """Build a :class:`PrimeTable` with a segmented odd-only sieve."""
    limit = int(limit)
    if limit < 2:
        raise PreconditionError(f"prime table needs limit >= 2, got {limit}")
    parts = list(prime_segments(2, limit, segment))
    primes = np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
    primes.setflags(write=False)
    return PrimeTable(limit, primes)


# ---------------------------------------------------------------------------
# factor counting
# ---------------------------------------------------------------------------

_CACHE: dict = {"table": None}


def _trial_table(bound: int) -> PrimeTable:
    table = _CACHE["table"]
    if table is None or table.limit < bound:
        table = primes_up_to(max(bound, 1 << 16))
        _CACHE["table"] = table
    return table


def factorize(a: int, table: Optional[PrimeTable] = None) -> List[Tuple[int, int]]:
    """Prime factorisation of ``a`` as ``[(p, e), ...]`` by trial division.

    Trial division runs over tabled primes up to ``sqrt(a)``; whatever is
    left afterwards is a single prime. If the table is too short to certify
    that, a :class:`PreconditionError` is raised.
    """
    a = int(a)
    if a < 1:
        raise PreconditionError(f"factorize needs a positive integer, got {a}")
    root = math.isqrt(a)
    if table is None:
        if root > 10**8:
            raise PreconditionError(f"{a} is too large for trial division")
        table = _trial_table(root)
    out: List[Tuple[int, int]] = []
    r = a
    if a < INT64_SAFE:
        cand = table.upto(root)
        divisors = cand[a % cand == 0] if cand.size else cand
        for p in divisors.tolist():
            e = 0
            while r % p == 0:
                r //= p
                e += 1
            out.append((p, e))
        if r > 1:
            if root > table.limit:
                raise PreconditionError(f"prime table (limit {table.limit}) cannot certify {a}")
            out.append((r, 1))
        return out
    for p in table.primes.tolist():
        if p * p > r:
            break
        if r % p == 0:
            e = 0
            while r % p == 0:
                r //= p
                e += 1
            out.append((p, e))
    if r > 1:
        if math.isqrt(r) > table.limit:
            raise PreconditionError(f"prime table (limit {table.limit}) cannot certify {a}")
        out.append((r, 1))
    return out


def big_omega(a: int, table: Optional[PrimeTable] = None) -> int:
    """Number of prime factors of ``a`` counted with multiplicity."""
    if int(a) < 1:
        raise PreconditionError("big_omega is undefined at 0 and negative integers")
    return sum(e for _, e in factorize(a, table))


# ---------------------------------------------------------------------------
# interval factorisation
# ---------------------------------------------------------------------------


def interval_max(N: int) -> int:
    """Largest integer strictly below ``N + 2*sqrt(N)``."""
    N = int(N)
    m = math.isqrt(4 * N)
    if m * m == 4 * N:
        m -= 1
    return N + m


@dataclass(frozen=True)
class FactoredInterval:
    """The integers ``N < a < N + 2 sqrt(N)`` with their factorisations.

    Prime-power factors are stored flat: member ``hit_index[j]`` is divisible
    exactly by ``hit_prime[j] ** hit_exp[j]``. Entries are grouped by member
    and increasing in the prime within a member.
    """

    N: int
    lo: int
    hi: int
    omega: np.ndarray = field(repr=False)
    hit_index: np.ndarray = field(repr=False)
    hit_prime: np.ndarray = field(repr=False)
    hit_exp: np.ndarray = field(repr=False)

    @property
    def X(self) -> int:
        return self.hi

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1

    def members(self) -> range:
        return range(self.lo, self.hi + 1)

    def factorization(self, i: int) -> List[Tuple[int, int]]:
        a = np.searchsorted(self.hit_index, i, side="left")
        b = np.searchsorted(self.hit_index, i, side="right")
        return [(int(p), int(e)) for p, e in zip(self.hit_prime[a:b], self.hit_exp[a:b])]


def sieve_factor_range(lo: int, hi: int, primes: np.ndarray):
    """Factor every integer in ``[lo, hi]`` using ``primes`` (all primes <= sqrt(hi)).

    Returns ``(omega, hit_index, hit_prime, hit_exp)`` as described on
    :class:`FactoredInterval`.
    """
    m = hi - lo + 1
    dtype = np.int64 if hi < INT64_SAFE else object
    if dtype is object:
        resid = np.array(range(lo, hi + 1), dtype=object)
    else:
        resid = np.arange(lo, hi + 1, dtype=np.int64)
    omega = np.zeros(m, dtype=np.int64)
    idx_parts, prime_parts, exp_parts = [], [], []
    for p in primes.tolist():
        if p * p > hi:
            break
        off = (-lo) % p
        if off >= m:
            continue
        idx = np.arange(off, m, p)
        e = np.ones(idx.size, dtype=np.int64)
        pk = p * p
        while pk <= hi:
            offk = (-lo) % pk
            if offk >= m:
                break
            e[(np.arange(offk, m, pk) - off) // p] += 1
            pk *= p
        omega[idx] += e
        if dtype is object:
            resid[idx] = resid[idx] // np.array([p**int(k) for k in e], dtype=object)
        else:
            resid[idx] //= np.power(p, e)
        idx_parts.append(idx)
        prime_parts.append(np.full(idx.size, p, dtype=dtype))
        exp_parts.append(e)
    rest = np.flatnonzero(resid > 1)
    omega[rest] += 1
    idx_parts.append(rest)
    prime_parts.append(resid[rest].astype(dtype))
    exp_parts.append(np.ones(rest.size, dtype=np.int64))
    hit_index = np.concatenate(idx_parts)
    hit_prime = np.concatenate(prime_parts)
    hit_exp = np.concatenate(exp_parts)
    order = np.argsort(hit_index, kind="stable")
    return omega, hit_index[order], hit_prime[order], hit_exp[order]


def factor_interval(N: int, table: PrimeTable) -> FactoredInterval:
    """Factor every member of ``A(N) = Z ∩ (N, N + 2 sqrt(N))``."""
    N = int(N)
    if N < 1:
        raise PreconditionError("factor_interval needs N >= 1")
    lo, hi = N + 1, interval_max(N)
    if table.limit < math.isqrt(hi):
        raise PreconditionError(
            f"prime table limit {table.limit} < isqrt(max A) = {math.isqrt(hi)}"
        )
    omega, hi_idx, hi_p, hi_e = sieve_factor_range(lo, hi, table.primes)
    return FactoredInterval(N, lo, hi, omega, hi_idx, hi_p, hi_e)


# ---------------------------------------------------------------------------
# sums and products over primes
# ---------------------------------------------------------------------------


def squarefree_count(x: float) -> int:
    """Exact number of squarefree ``n <= x``, via ``sum_d mu(d) floor(x/d^2)``."""
    n = math.floor(x)
    if n < 1:
        return 0
    r = math.isqrt(n)
    mu = np.ones(r + 1, dtype=np.int64)
    mu[0] = 0
    for p in _small_primes(r).tolist():
        mu[p::p] *= -1
        mu[p * p :: p * p] = 0
    d = np.arange(1, r + 1, dtype=np.int64)
    if n < INT64_SAFE:
        return int(np.sum(mu[1:] * (n // (d * d))))
    return sum(int(m) * (n // (k * k)) for k, m in enumerate(mu.tolist()) if m)


def neg_log_terms(primes: np.ndarray) -> np.ndarray:
    """``-log(1 - 1/p)`` elementwise."""
    return -np.log1p(-1.0 / primes.astype(np.float64))


def two_sum(a: float, b: float) -> Tuple[float, float]:
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def dd_add(x: Tuple[float, float], y: Tuple[float, float]) -> Tuple[float, float]:
    """Add two double-double numbers ``(hi, lo)``."""
    s, e = two_sum(x[0], y[0])
    e += x[1] + y[1]
    return two_sum(s, e)


def dd_fsum(values: Sequence[float]) -> Tuple[float, float]:
    """Exact-to-double-double sum of a float array."""
    hi = math.fsum(values)
    lo = math.fsum(np.append(values, -hi)) if len(values) else 0.0
    return hi, lo


def log_mertens_prefix(primes: np.ndarray, block: int = 1 << 16) -> np.ndarray:
    """``log I(p_n)`` for every ``p_n`` in ``primes`` (which must start at 2).

    Block totals are accumulated in double-double, only in-block partial sums
    use plain ``cumsum``.
    """
    terms = neg_log_terms(primes)
    out = np.empty_like(terms)
    acc = (0.0, 0.0)
    for i in range(0, terms.size, block):
        t = terms[i : i + block]
        out[i : i + block] = acc[0] + (acc[1] + np.cumsum(t))
        acc = dd_add(acc, dd_fsum(t))
    return out


def mertens_product(x: float, table: PrimeTable) -> float:
    """``I(x) = prod_{p <= x} (1 - 1/p)^(-1)``."""
    if x < 2:
        raise PreconditionError("mertens_product needs x >= 2")
    if table.limit < math.floor(x):
        raise PreconditionError(f"prime table limit {table.limit} < x = {x}")
    return math.exp(math.fsum(neg_log_terms(table.upto(x))))


def prime_reciprocal_sum(a: float, b: float, table: PrimeTable) -> float:
    """``sum_{a <= p < b} 1/p`` with correctly rounded summation."""
    if not 2 <= a < b:
        raise PreconditionError(f"need 2 <= a < b, got a={a}, b={b}")
    if b > table.limit:
        raise PreconditionError(f"prime table limit {table.limit} < b = {b}")
    return math.fsum(1.0 / table.between(a, b).astype(np.float64))
