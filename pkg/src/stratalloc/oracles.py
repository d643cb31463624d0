"""Independent checks for the recursive solvers.

Four ways to cross-examine an allocation that share no code with the solvers:
exhaustive subset search, a KKT certificate, a Lagrange-multiplier bisection,
and an exact greedy solver for the integer-valued variant of the problem.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .model import (
    AllocationProblem,
    AllocationResult,
    Label,
    s_of,
)

__all__ = [
    "KktCertificate",
    "brute_force_subset",
    "kkt_verify",
    "bisection_multiplier",
    "greedy_integer_optimal",
]

_BRUTE_FORCE_MAX = 20


@dataclass(frozen=True)
class KktCertificate:
    """Checkable first-order optimality certificate.

    mu is the multiplier of the sum constraint; lam maps each label to the
    multiplier of its upper-bound constraint. For the two-regime optimum with
    scale s, stationarity forces mu = s**(-2) and lam_w = c_w**2 - mu on the
    take-all set, 0 elsewhere. residuals holds the worst relative violation of
    each condition ("stationarity", "primal", "complementary"); each is scaled
    by the magnitude of the terms it compares, so the certificate reads the
    same whether mu is 1e-3 or 1e39. valid is True when all residuals are
    within tol and lam is nonnegative up to tol times the scale of mu.
    """

    mu: float
    lam: dict[Label, float]
    residuals: dict[str, float]
    tol: float
    valid: bool


def brute_force_subset(problem: AllocationProblem, *, max_size: int = _BRUTE_FORCE_MAX) -> frozenset:
    """Exhaustively find the take-all subset satisfying the fixed-point test.

    Checks every subset V of the strata for membership consistency:
    w in V exactly when c_w * s(V) >= 1, with s(V) > 0. Intended for small
    instances (refuses more than ``max_size`` strata). Returns the first
    satisfying subset ordered by cardinality, then by stratum position;
    in tie-free problems the subset is unique.
    """
    K = problem.size
    if K > max_size:
        raise ValueError(f"exhaustive search limited to {max_size} strata, got {K}")
    if problem.is_census:
        return frozenset(problem.labels)
    a = np.array([st.a for st in problem.strata])
    b = np.array([st.b for st in problem.strata])
    c = a / b
    # subset sums via doubling: index bit i set <=> stratum i in the subset
    sum_a = np.zeros(1)
    sum_b = np.zeros(1)
    for i in range(K):
        sum_a = np.concatenate([sum_a, sum_a + a[i]])
        sum_b = np.concatenate([sum_b, sum_b + b[i]])
    denom = a.sum() - sum_a
    full = (1 << K) - 1
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (problem.n - sum_b) / denom
    shifts = np.arange(K)
    candidates: list[int] = []
    for start in range(0, full + 1, 1 << 16):
        masks = np.arange(start, min(start + (1 << 16), full + 1), dtype=np.int64)
        bits = ((masks[:, None] >> shifts) & 1).astype(bool)
        member = (c[None, :] * s[masks][:, None]) >= 1.0
        ok = (bits == member).all(axis=1) & (s[masks] > 0) & (masks != full)
        candidates.extend(int(m) for m in masks[ok])
    if not candidates:
        raise RuntimeError("no subset satisfies the fixed-point condition")

    def key(m: int) -> tuple:
        # smallest cardinality first, then earliest strata
        idx = tuple(i for i in range(K) if m >> i & 1)
        return (len(idx), idx)

    best = min(candidates, key=key)
    return frozenset(problem.strata[i].label for i in range(K) if best >> i & 1)


def kkt_verify(
    problem: AllocationProblem,
    result: AllocationResult,
    tol: float = 1e-8,
) -> KktCertificate:
    """Build and evaluate the KKT certificate for a claimed optimum.

    Never raises on a bad allocation; an invalid certificate is the answer.
    The multiplier construction: mu = s(V)**(-2) from the claimed take-all
    set V, except in the census case where any mu up to min c_w**2 keeps the
    bound multipliers nonnegative and min c_w**2 is used. Conditions checked:
    stationarity -a_w**2/x_w**2 + lam_w + mu = 0, primal feasibility
    (sum x = n, 0 < x_w <= b_w), complementary slackness lam_w (x_w - b_w) = 0,
    and dual feasibility lam_w >= 0.

    Residuals are relative. mu scales with a**2 and ranges over dozens of
    orders of magnitude across realistic inputs, so an allocation exact to
    machine precision still carries an absolute stationarity gap of a few
    ulps of its own terms; a fixed absolute tol would reject it whenever
    those terms are large. Each stratum's stationarity gap is measured
    against the largest term in its equation, max(1, mu, (a_w/x_w)**2,
    |lam_w|); the dual margin against max(1, mu); the sum constraint
    against max(1, n); bound overshoot against max(1, b_w); complementary
    slackness against 1 + |lam_w| b_w.
    """
    if not (math.isfinite(tol) and tol > 0):
        raise ValueError(f"tol must be positive, got {tol!r}")
    if set(result.x) != set(problem.labels):
        raise ValueError("result labels do not match the problem")
    v = result.take_all
    cs = [st.c for st in problem.strata]
    if len(v) == problem.size:
        mu = min(c * c for c in cs)
    else:
        s = s_of(problem, v)
        if s <= 0:
            lam = {lb: 0.0 for lb in problem.labels}
            residuals = {"stationarity": math.inf, "primal": math.inf, "complementary": math.inf}
            return KktCertificate(mu=math.inf, lam=lam, residuals=residuals, tol=tol, valid=False)
        mu = 1.0 / (s * s)
    lam = {
        st.label: (st.c * st.c - mu if st.label in v else 0.0)
        for st in problem.strata
    }
    mu_scale = max(1.0, mu)
    stat = 0.0
    comp = 0.0
    bound = 0.0
    for st in problem.strata:
        xw = result.x[st.label]
        if not (xw > 0):
            lam_min_bad = {lb: 0.0 for lb in problem.labels}
            residuals = {"stationarity": math.inf, "primal": math.inf, "complementary": math.inf}
            return KktCertificate(mu=mu, lam=lam_min_bad, residuals=residuals, tol=tol, valid=False)
        g = st.a / xw
        lw = lam[st.label]
        # scale by the largest term in this stratum's equation: take-all
        # strata have g**2 = c_w**2 far above mu, and their lam is formed
        # by cancellation at that magnitude
        stat_scale = max(1.0, mu, g * g, abs(lw))
        stat = max(stat, abs(-(g * g) + lw + mu) / stat_scale)
        comp = max(comp, abs(lw * (xw - st.b)) / (1.0 + abs(lw) * st.b))
        bound = max(bound, (xw - st.b) / max(1.0, st.b))
    primal = max(abs(math.fsum(result.x.values()) - problem.n) / max(1.0, problem.n), bound)
    residuals = {"stationarity": stat, "primal": primal, "complementary": comp}
    lam_min = min(lam.values())
    valid = (
        stat <= tol
        and primal <= tol
        and comp <= tol
        and lam_min >= -tol * mu_scale
        and mu > 0
    )
    return KktCertificate(mu=mu, lam=lam, residuals=residuals, tol=tol, valid=valid)


def bisection_multiplier(problem: AllocationProblem, tol: float = 1e-12) -> AllocationResult:
    """Solve by bisecting the multiplier mu of the sum constraint.

    The optimum has x_w(mu) = min(a_w / sqrt(mu), b_w) with total n;
    the total is continuous and nonincreasing in mu, so mu is bracketed
    and bisected. Start: mu_hi = 2 (sum a / n)**2 guarantees the low side
    (sum of x <= n there); the high side is found by geometric expansion
    downward, which is necessary when take-all strata carry most of n.
    Returns an allocation whose total is within tol * n of n; the trace
    is empty (the probe sequence has no monotone scale).
    """
    if not (math.isfinite(tol) and tol > 0):
        raise ValueError(f"tol must be positive, got {tol!r}")
    if problem.is_census:
        x = {st.label: st.b for st in problem.strata}
        return AllocationResult(
            x=x,
            take_all=frozenset(problem.labels),
            s_final=0.0,
            iterations=1,
            trace=(),
            algorithm="bisection",
        )
    strata = problem.strata

    def total(mu: float) -> float:
        root = math.sqrt(mu)
        return math.fsum(min(st.a / root, st.b) for st in strata)

    hi = 2.0 * (problem.sum_a / problem.n) ** 2
    lo = hi / 4.0
    probes = 1
    while total(lo) < problem.n:
        hi = lo
        lo /= 4.0
        probes += 1
        if probes > 2000:
            raise RuntimeError("failed to bracket the multiplier")
    # invariant: total(lo) >= n >= total(hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:  # interval exhausted in floating point
            break
        probes += 1
        if total(mid) >= problem.n:
            lo = mid
        else:
            hi = mid
    mu = 0.5 * (lo + hi)
    s = 1.0 / math.sqrt(mu)
    x: dict[Label, float] = {}
    take_all = []
    for st in strata:
        xv = st.a * s
        if xv >= st.b:
            x[st.label] = st.b
            take_all.append(st.label)
        else:
            x[st.label] = xv
    achieved = math.fsum(x.values())
    if abs(achieved - problem.n) > tol * problem.n:
        raise RuntimeError(
            f"bisection stalled: |total - n| = {abs(achieved - problem.n):.3e} > tol * n"
        )
    return AllocationResult(
        x=x,
        take_all=frozenset(take_all),
        s_final=s,
        iterations=probes,
        trace=(),
        algorithm="bisection",
    )


def greedy_integer_optimal(problem: AllocationProblem) -> AllocationResult:
    """Exact integer-valued optimum by marginal-gain greedy.

    Requires integer n and bounds with n >= K (every stratum must receive at
    least one unit for the objective to be finite). Seeds x_w = 1, then grants
    the remaining n - K units one at a time to the stratum with the largest
    objective decrease a_w**2/x_w - a_w**2/(x_w + 1), skipping strata at
    their bounds. Exchange-optimal because the per-stratum gains are strictly
    decreasing in x_w. Ties resolve to the earliest stratum, so the result
    is deterministic. s_final is reported as 0.0: an integer allocation has
    no continuous scale.
    """
    K = problem.size
    n = problem.n
    if n != int(n):
        raise ValueError(f"integer allocation needs integer n, got {n!r}")
    for st in problem.strata:
        if st.b != int(st.b):
            raise ValueError(f"stratum {st.label!r}: integer allocation needs integer bounds")
    n = int(n)
    if n < K:
        raise ValueError(f"integer allocation needs n >= K, got n={n}, K={K}")
    strata = problem.strata
    counts = [1] * K
    heap: list[tuple[float, int]] = []
    for i, st in enumerate(strata):
        if counts[i] < st.b:
            heapq.heappush(heap, (-(st.a * st.a) / (counts[i] * (counts[i] + 1.0)), i))
    for _ in range(n - K):
        if not heap:
            raise RuntimeError("ran out of capacity with units left to grant")
        _, i = heapq.heappop(heap)
        counts[i] += 1
        st = strata[i]
        if counts[i] < st.b:
            heapq.heappush(heap, (-(st.a * st.a) / (counts[i] * (counts[i] + 1.0)), i))
    x = {st.label: float(counts[i]) for i, st in enumerate(strata)}
    take_all = frozenset(st.label for i, st in enumerate(strata) if counts[i] == int(st.b))
    return AllocationResult(
        x=x,
        take_all=take_all,
        s_final=0.0,
        iterations=1,
        trace=(),
        algorithm="greedy_integer",
    )
