"""Exhaustive finite computations: the Mertens band scan, the small-z
epsilon scan, and almost-prime searches between consecutive squares.

All scans are deterministic: work is split into fixed chunks whose results
are merged in order, so the worker count never changes a report.
"""

from __future__ import annotations

import functools
import math
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import mpmath
import numpy as np

from . import bounds, kuhn
from ._pool import pmap
from .bounds import EULER_GAMMA
from .checkpoint import SegmentRecord, read_checkpoint, write_checkpoint
from .errors import DomainError, PreconditionError
from .primes import (
    DEFAULT_SEGMENT,
    dd_add,
    dd_fsum,
    log_mertens_prefix,
    neg_log_terms,
    next_prime,
    prime_segments,
    primes_up_to,
)

NEAR_TOL = 1e-9
EPSILON = 1.97e-3
CASE1_Z = (3024, 12000)
COUNTEREXAMPLE_CAP = 1000
REPORT_WITNESS_CAP = 10_000


@dataclass
class ScanReport:
    scan_id: str
    range: Tuple[int, int]
    max_value: float
    argmax: Tuple[int, ...]
    counterexamples: List[Any] = field(default_factory=list)
    checked_count: int = 0
    near_boundary: List[Any] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.counterexamples


# ---------------------------------------------------------------------------
# Mertens band
# ---------------------------------------------------------------------------


@dataclass
class _ChunkResult:
    index: int
    total: Tuple[float, float]
    checked: int = 0
    last_prime: int = 0
    max_diff: float = -math.inf
    argmax_prime: int = 0
    lower_min_margin: float = math.inf
    upper_min_margin: float = math.inf
    counterexamples: List[dict] = field(default_factory=list)
    counterexample_count: int = 0
    near: List[dict] = field(default_factory=list)


def _escalate(p: int, p_next: int, approx_sum: float) -> dict:
    """Re-decide both Mertens inequalities at ``p`` with 50-digit arithmetic."""
    with mpmath.workdps(50):
        g = mpmath.euler
        if p <= 10**7:
            ps = primes_up_to(p).primes.tolist()
            S = mpmath.fsum(-mpmath.log1p(-mpmath.mpf(1) / q) for q in ps)
            err = mpmath.mpf(0)
        else:
            S = mpmath.mpf(approx_sum)
            err = mpmath.mpf(1e-12) * S
        lower = g + mpmath.log(mpmath.log(p_next)) - S
        upper = S - g - mpmath.log(mpmath.log(p) + 2 / mpmath.sqrt(p))
    resolved = abs(lower) > err and abs(upper) > err
    return {
        "prime": p,
        "lower_diff": float(lower),
        "upper_diff": float(upper),
        "resolved": bool(resolved),
        "holds": bool(resolved and lower < 0 and upper < 0),
    }


def _mertens_chunk(task, check: bool = True) -> _ChunkResult:
    """Scan primes in ``[lo, hi]`` given the running sum ``offset`` before ``lo``."""
    index, lo, hi, offset, block = task
    res = _ChunkResult(index, (0.0, 0.0))
    local = (0.0, 0.0)

    def consume(P: np.ndarray, nxt: int):
        nonlocal local
        terms = neg_log_terms(P)
        if check:
            base = dd_add(offset, local)
            S = base[0] + (base[1] + np.cumsum(terms))
            p_next = np.append(P[1:], nxt).astype(np.float64)
            Pf = P.astype(np.float64)
            lower = EULER_GAMMA + np.log(np.log(p_next)) - S
            upper = S - (EULER_GAMMA + np.log(np.log(Pf) + 2.0 / np.sqrt(Pf)))
            worst = np.maximum(lower, upper)
            i = int(np.argmax(worst))
            if worst[i] > res.max_diff:
                res.max_diff, res.argmax_prime = float(worst[i]), int(P[i])
            res.lower_min_margin = min(res.lower_min_margin, float(-lower.max()))
            res.upper_min_margin = min(res.upper_min_margin, float(-upper.max()))
            bad = set(np.flatnonzero(worst >= 0).tolist())
            for j in np.flatnonzero(np.abs(worst) < NEAR_TOL).tolist():
                entry = _escalate(int(P[j]), int(p_next[j]), float(S[j]))
                res.near.append(entry)
                if entry["holds"]:
                    bad.discard(j)
                else:
                    bad.add(j)
            for j in sorted(bad):
                res.counterexample_count += 1
                if len(res.counterexamples) < COUNTEREXAMPLE_CAP:
                    res.counterexamples.append(
                        {"prime": int(P[j]), "lower_diff": float(lower[j]), "upper_diff": float(upper[j])}
                    )
            res.checked += int(P.size)
        local = dd_add(local, dd_fsum(terms))
        res.last_prime = int(P[-1])

    pending = None
    for seg in prime_segments(lo, hi, block):
        if pending is not None:
            consume(pending, int(seg[0]))
        pending = seg
    if pending is not None:
        consume(pending, next_prime(int(pending[-1])))
    res.total = local
    return res


def verify_mertens(
    limit: int,
    checkpoint: Optional[str] = None,
    workers: int = 1,
    segment_width: int = 10**8,
    block: int = DEFAULT_SEGMENT,
) -> ScanReport:
    """Check ``e^γ log p_{n+1} < I(p_n) < e^γ log p_n + 2e^γ/sqrt(p_n)`` for all ``p_n <= limit``.

    The last tabled prime is paired with the first prime beyond ``limit``.
    With ``checkpoint`` each finished segment is recorded, and a later call
    with the same settings resumes after the last recorded segment.
    Counterexample details are kept for segments scanned in this call;
    resumed segments contribute their counts.
    """
    limit = int(limit)
    if limit < 3:
        raise PreconditionError(f"verify_mertens needs limit >= 3, got {limit}")
    n_seg = (limit + segment_width - 1) // segment_width
    chunks = [
        (k, max(2, k * segment_width + 1), min((k + 1) * segment_width, limit))
        for k in range(n_seg)
    ]
    records: List[SegmentRecord] = []
    if checkpoint and os.path.exists(checkpoint):
        records = read_checkpoint(checkpoint, limit, segment_width)
    offset = records[-1].running_sum if records else (0.0, 0.0)
    todo = chunks[len(records):]

    results: List[_ChunkResult] = []

    def record(res: _ChunkResult, running):
        prev = records[-1] if records else None
        best = res.max_diff
        argp = res.argmax_prime
        if prev is not None and prev.max_log_ratio >= best:
            best, argp = prev.max_log_ratio, prev.argmax_prime
        records.append(
            SegmentRecord(
                res.index,
                res.last_prime,
                running,
                (prev.checked_count if prev else 0) + res.checked,
                best,
                argp,
                (prev.counterexample_count if prev else 0) + res.counterexample_count,
            )
        )
        if checkpoint:
            write_checkpoint(checkpoint, limit, segment_width, records)

    if workers <= 1:
        for k, lo, hi in todo:
            res = _mertens_chunk((k, lo, hi, offset, block))
            offset = dd_add(offset, res.total)
            results.append(res)
            record(res, offset)
    else:
        sums = pmap(
            functools.partial(_mertens_chunk, check=False),
            [(k, lo, hi, (0.0, 0.0), block) for k, lo, hi in todo],
            workers,
        )
        tasks = []
        for (k, lo, hi), s in zip(todo, sums):
            tasks.append((k, lo, hi, offset, block))
            offset = dd_add(offset, s.total)
        running = tasks[0][3] if tasks else offset
        for res, s in zip(pmap(_mertens_chunk, tasks, workers), sums):
            # the checking pass must reproduce the summing pass
            assert abs(res.total[0] - s.total[0]) <= 1e-12 * max(1.0, abs(s.total[0]))
            running = dd_add(running, res.total)
            results.append(res)
            record(res, running)

    last = records[-1]
    counterexamples = [c for r in results for c in r.counterexamples]
    near = [c for r in results for c in r.near]
    details = {
        "lower_min_log_margin": min((r.lower_min_margin for r in results), default=None),
        "upper_min_log_margin": min((r.upper_min_margin for r in results), default=None),
        "counterexample_count": last.counterexample_count,
        "final_log_product": last.running_sum[0],
        "segments": len(records),
        "resumed_segments": len(records) - len(results),
    }
    if last.counterexample_count and not counterexamples:
        counterexamples = [{"resumed_count": last.counterexample_count}]
    return ScanReport(
        scan_id="mertens-band",
        range=(2, limit),
        max_value=math.exp(last.max_log_ratio),
        argmax=(last.argmax_prime,),
        counterexamples=counterexamples,
        checked_count=last.checked_count,
        near_boundary=near,
        details=details,
    )


# ---------------------------------------------------------------------------
# epsilon for 3024 <= z < 12000
# ---------------------------------------------------------------------------


def log_mertens_by_integer(limit: int) -> np.ndarray:
    """``log I(m)`` for every integer ``0 <= m <= limit`` (0 below 2)."""
    table = primes_up_to(limit)
    pref = log_mertens_prefix(table.primes)
    counts = np.searchsorted(table.primes, np.arange(limit + 1), side="right")
    out = np.zeros(limit + 1)
    out[counts > 0] = pref[counts[counts > 0] - 1]
    return out


def _loglog(limit: int) -> np.ndarray:
    out = np.full(limit + 1, -np.inf)
    m = np.arange(2, limit + 1, dtype=np.float64)
    out[2:] = np.log(np.log(m))
    return out


def _case1_chunk(task):
    z_lo, z_hi, logI, ll, is_prime, thr = task
    comp_best = (-math.inf, 0, 0)
    prime_best = (-math.inf, 0, 0)
    comp_bad: List[Tuple[int, int]] = []
    prime_bad: List[Tuple[int, int]] = []
    comp_n = prime_n = 0
    comp_near: List[Tuple[int, int]] = []
    prime_near: List[Tuple[int, int]] = []
    for zf in range(z_lo, z_hi):
        uc = np.arange(4, zf + 1)
        v = logI[zf] - logI[uc] + ll[uc] - ll[zf]
        i = int(np.argmax(v))
        if v[i] > comp_best[0]:
            comp_best = (float(v[i]), int(uc[i]), zf)
        comp_n += uc.size
        comp_bad += [(int(u), zf) for u in uc[v >= thr]]
        comp_near += [(int(u), zf) for u in uc[np.abs(np.expm1(v - thr)) < NEAR_TOL]]

        up = np.flatnonzero(is_prime[3:zf]) + 3
        w = logI[zf] - logI[up - 1] + ll[up] - ll[zf]
        j = int(np.argmax(w))
        if w[j] > prime_best[0]:
            prime_best = (float(w[j]), int(up[j]), zf)
        prime_n += up.size
        prime_bad += [(int(u), zf) for u in up[w >= thr]]
        prime_near += [(int(u), zf) for u in up[np.abs(np.expm1(w - thr)) < NEAR_TOL]]
    return comp_best, prime_best, comp_bad, prime_bad, comp_n, prime_n, comp_near, prime_near


def _better(a, b):
    """Larger value wins; equal values go to the smaller (u, z)."""
    if a[0] != b[0]:
        return a if a[0] > b[0] else b
    return a if (a[1], a[2]) <= (b[1], b[2]) else b


def scan_epsilon_case1(
    z_lo: int = CASE1_Z[0], z_hi: int = CASE1_Z[1], workers: int = 1, chunk: int = 500
) -> Tuple[ScanReport, ScanReport]:
    """Maximise the two ratios bounding ``prod_{u<=p<z}(1-1/p)^(-1) log u / log z``.

    Composite ``u``: ``I(⌊z⌋)/I(⌈u⌉) · log⌈u⌉/log⌊z⌋`` over ``4 <= ⌈u⌉ <= ⌊z⌋``.
    Prime ``u``: ``I(⌊z⌋)/I(u-1) · log u/log⌊z⌋`` over primes ``3 <= u < ⌊z⌋``.
    """
    logI = log_mertens_by_integer(z_hi)
    ll = _loglog(z_hi)
    is_prime = np.zeros(z_hi + 1, dtype=bool)
    is_prime[primes_up_to(z_hi).primes] = True
    thr = math.log1p(EPSILON)
    tasks = [
        (a, min(a + chunk, z_hi), logI, ll, is_prime, thr) for a in range(z_lo, z_hi, chunk)
    ]
    parts = pmap(_case1_chunk, tasks, workers)
    comp_best = prime_best = (-math.inf, 0, 0)
    for part in parts:
        comp_best = _better(comp_best, part[0])
        prime_best = _better(prime_best, part[1])

    def _resolve(near, prime_case):
        out = []
        with mpmath.workdps(50):
            table = primes_up_to(z_hi).primes.tolist()

            def I(x):
                return mpmath.fprod(1 / (1 - mpmath.mpf(1) / p) for p in table if p <= x)

            for u, zf in near:
                den = I(u - 1) if prime_case else I(u)
                val = I(zf) / den * mpmath.log(u) / mpmath.log(zf)
                out.append({"u": u, "z": zf, "ratio": float(val), "holds": bool(val < 1 + mpmath.mpf("1.97e-3"))})
        return out

    reports = []
    for label, best, bad_i, n_i, near_i, prime_case in (
        ("composite", comp_best, 2, 4, 6, False),
        ("prime", prime_best, 3, 5, 7, True),
    ):
        near = _resolve([x for p in parts for x in p[near_i]], prime_case)
        flagged = {(e["u"], e["z"]) for e in near if not e["holds"]}
        cleared = {(e["u"], e["z"]) for e in near if e["holds"]}
        bad = sorted({x for p in parts for x in p[bad_i]} - cleared | flagged)
        reports.append(
            ScanReport(
                scan_id=f"epsilon-case1-{label}",
                range=(z_lo, z_hi),
                max_value=math.exp(best[0]),
                argmax=(best[1], best[2]),
                counterexamples=[list(x) for x in bad],
                checked_count=sum(p[n_i] for p in parts),
                near_boundary=near,
                details={"max_minus_one": math.expm1(best[0]), "threshold": 1 + EPSILON},
            )
        )
    return reports[0], reports[1]


@dataclass
class MarginReport:
    case: int
    factor: float  # at the given (z, u)
    case_cap: float  # worst case over the whole range
    bound: float
    ok: bool


def check_epsilon_large_z(z: float, u: float) -> MarginReport:
    """Margins for ``z >= 12000`` derived from the Mertens bands."""
    if z < CASE1_Z[1]:
        raise DomainError("z < 12000 is covered by scan_epsilon_case1")
    if z < bounds.COMPUTED_LIMIT:
        factor = 1 + 2 / (math.sqrt(z) * math.log(z))
        cap = 1 + 2 / (math.sqrt(CASE1_Z[1]) * math.log(CASE1_Z[1]))
        bound = 1 + 1.95e-3
        return MarginReport(2, factor, cap, bound, factor < bound and cap < bound)
    t22 = bounds.MERTENS_ASYM_CONST / 22**3
    tz = bounds.MERTENS_ASYM_CONST / math.log(z) ** 3
    if u <= bounds.COMPUTED_LIMIT:
        factor = 1 / (1 - tz)
        cap = 1 / (1 - t22)
        bound = 1 + 1e-4
    else:
        factor = (1 + bounds.MERTENS_ASYM_CONST / math.log(u) ** 3) / (1 - tz)
        cap = (1 + t22) / (1 - t22)
        bound = 1 + 1.6e-4
    return MarginReport(3, factor, cap, bound, factor <= cap < bound)


# ---------------------------------------------------------------------------
# almost primes between squares
# ---------------------------------------------------------------------------


def omega_matrix(vals: np.ndarray, primes: np.ndarray) -> np.ndarray:
    """``Omega`` of every entry of a 2-D array of consecutive rows ``vals[i, 0] + j``.

    ``primes`` must contain every prime up to ``sqrt(vals.max())``.
    """
    B, W = vals.shape
    resid = vals.copy()
    om = np.zeros_like(vals)
    base = vals[:, 0]
    top = int(vals.max())
    cols_all = np.arange(W)
    for p in primes.tolist():
        if p * p > top:
            break
        off = (-base) % p
        if p >= W:
            rows = np.flatnonzero(off < W)
            cols = off[rows]
        else:
            c = off[:, None] + cols_all[None, : (W + p - 1) // p] * p
            mask = c < W
            rows = np.nonzero(mask)[0]
            cols = c[mask]
        while rows.size:
            om[rows, cols] += 1
            resid[rows, cols] //= p
            keep = resid[rows, cols] % p == 0
            rows, cols = rows[keep], cols[keep]
    om += resid > 1
    return om


def least_almost_primes(
    lows: np.ndarray, highs: np.ndarray, k: int, primes: np.ndarray, width: int = 16
) -> Tuple[np.ndarray, np.ndarray]:
    """Least ``a`` with ``low < a < high`` and ``Omega(a) <= k``, per row.

    Returns ``(a, omega)``; rows without such ``a`` get ``a = 0``.
    """
    n = lows.size
    found_a = np.zeros(n, dtype=np.int64)
    found_om = np.zeros(n, dtype=np.int64)
    start = lows.astype(np.int64) + 1
    pending = np.arange(n)
    w = width
    while pending.size:
        st = start[pending]
        hi = highs[pending]
        vals = st[:, None] + np.arange(w, dtype=np.int64)[None, :]
        om = omega_matrix(vals, primes)
        good = (vals < hi[:, None]) & (om <= k)
        hit = good.any(axis=1)
        first = good.argmax(axis=1)
        rows = np.flatnonzero(hit)
        found_a[pending[rows]] = vals[rows, first[rows]]
        found_om[pending[rows]] = om[rows, first[rows]]
        done = hit | (st + w >= hi)
        start[pending] += w
        pending = pending[~done]
        w *= 2
    return found_a, found_om


@dataclass
class Witnesses:
    n: np.ndarray
    a: np.ndarray
    omega: np.ndarray


def _interval_chunk(task):
    n_lo, n_hi, k, primes = task
    n = np.arange(n_lo, n_hi + 1, dtype=np.int64)
    a, om = least_almost_primes(n * n, (n + 1) * (n + 1), k, primes)
    return n, a, om


def _chunks(lo: int, hi: int, size: int):
    return [(a, min(a + size - 1, hi)) for a in range(lo, hi + 1, size)]


MAX_N = 10**8


def verify_interval(
    n_lo: int, n_hi: int, k: int, workers: int = 1, chunk: int = 8192
) -> Tuple[ScanReport, Witnesses]:
    """Least ``a`` in ``(n^2, (n+1)^2)`` with ``Omega(a) <= k`` for each ``n``."""
    if not 1 <= n_lo <= n_hi:
        raise PreconditionError(f"need 1 <= n_lo <= n_hi, got {n_lo}, {n_hi}")
    if n_hi > MAX_N:
        raise PreconditionError(f"n_hi = {n_hi} exceeds the factorable range (<= {MAX_N})")
    primes = primes_up_to(n_hi + 1).primes
    parts = pmap(_interval_chunk, [(a, b, k, primes) for a, b in _chunks(n_lo, n_hi, chunk)], workers)
    n = np.concatenate([p[0] for p in parts])
    a = np.concatenate([p[1] for p in parts])
    om = np.concatenate([p[2] for p in parts])
    missing = a == 0
    gap = np.where(missing, -1, a - n * n)
    i = int(np.argmax(gap))
    report = ScanReport(
        scan_id=f"interval-omega<={k}",
        range=(n_lo, n_hi),
        max_value=float(gap[i]),
        argmax=(int(n[i]),),
        counterexamples=n[missing].tolist(),
        checked_count=int(n.size),
        details={"k": k, "max_omega": int(om[~missing].max()) if (~missing).any() else None},
    )
    keep = ~missing
    return report, Witnesses(n[keep], a[keep], om[keep])


def _fourp_chunk(task):
    n_lo, n_hi, primes = task
    n = np.arange(n_lo, n_hi + 1, dtype=np.int64)
    even = n % 2 == 0
    m = np.where(even, n // 2, (n + 1) // 2)
    lows = np.where(even, m * m, (m - 1) * m)
    highs = np.where(even, m * (m + 1), m * m)
    p, _ = least_almost_primes(lows, highs, 1, primes)
    return n, p


def verify_4p(n_lo: int, n_hi: int, workers: int = 1, chunk: int = 8192) -> Tuple[ScanReport, Witnesses]:
    """Find a prime ``p`` with ``n^2 < 4p < (n+1)^2`` from the half-interval construction."""
    if not 1 <= n_lo <= n_hi:
        raise PreconditionError(f"need 1 <= n_lo <= n_hi, got {n_lo}, {n_hi}")
    if n_hi > MAX_N:
        raise PreconditionError(f"n_hi = {n_hi} exceeds the factorable range (<= {MAX_N})")
    primes = primes_up_to(n_hi // 2 + 2).primes
    parts = pmap(_fourp_chunk, [(a, b, primes) for a, b in _chunks(n_lo, n_hi, chunk)], workers)
    n = np.concatenate([x[0] for x in parts])
    p = np.concatenate([x[1] for x in parts])
    four = 4 * p
    ok = (p > 1) & (four > n * n) & (four < (n + 1) * (n + 1)) & (four != n * n)
    gap = np.where(ok, four - n * n, -1)
    i = int(np.argmax(gap))
    report = ScanReport(
        scan_id="four-p",
        range=(n_lo, n_hi),
        max_value=float(gap[i]),
        argmax=(int(n[i]),),
        counterexamples=n[~ok].tolist(),
        checked_count=int(n.size),
        details={"omega_4p": 3},
    )
    return report, Witnesses(n[ok], four[ok], np.full(int(ok.sum()), 3, dtype=np.int64))


# ---------------------------------------------------------------------------
# weighted-sieve property suite
# ---------------------------------------------------------------------------


def random_instance(seed: int, n_max: int = 10**10) -> Tuple[int, int, int]:
    """``(N, k1, k2)`` drawn from a per-instance seed, ``N`` log-uniform in ``[10^3, n_max]``."""
    rng = np.random.default_rng(seed)
    N = int(round(10 ** rng.uniform(3.0, math.log10(n_max))))
    return N, int(rng.integers(5, 9)), int(rng.integers(2, 5))


def _kuhn_case(seed: int) -> dict:
    N, k1, k2 = random_instance(seed)
    inst = kuhn.SiftingInstance.from_interval(N, k1, k2)
    prof = kuhn.kuhn_profile(inst, k2)
    lower = prof.kuhn_lower_exact
    return {
        "seed": seed,
        "N": N,
        "k1": k1,
        "k2": k2,
        "size": prof.size,
        "rk": prof.rk,
        "weight_sum": str(prof.weight_sum),
        "kuhn_lower": str(lower),
        "slack": float(prof.weight_sum - prof.rk),
        "ok": bool(prof.rk >= prof.weight_sum >= lower and prof.positive_weight_max_omega <= k2),
    }


def kuhn_property_suite(count: int = 100, seed: int = 0, workers: int = 1) -> ScanReport:
    """Check ``r_k2(A) >= sum w(a) >= kuhn_lower(exact_q2)`` on seeded random ``A(N)``.

    Instance ``i`` uses seed ``seed + i``, so results do not depend on
    how the instances are spread over workers.
    """
    rows = pmap(_kuhn_case, list(range(seed, seed + count)), workers)
    worst = max(rows, key=lambda r: (r["slack"], -r["seed"]))
    return ScanReport(
        scan_id="kuhn-inequality",
        range=(seed, seed + count - 1),
        max_value=worst["slack"],
        argmax=(worst["seed"],),
        counterexamples=[r for r in rows if not r["ok"]],
        checked_count=count,
        details={"instances": rows},
    )
