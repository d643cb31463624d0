"""Three exact solvers for the box-constrained allocation problem.

All three find the same optimal take-all set V and return identical
allocations; they differ in how V is discovered and in per-iteration cost.

rna   grows V by whole batches: every stratum failing the threshold test
      joins at once, and the scale s is recomputed. Needs no sorting.
sga   sorts strata by descending priority c = a/b once, then admits them
      one at a time while the threshold test holds.
coma  uses the same sorted order but stops at the first decrease of the
      scale sequence s(V_1), s(V_2), ...

Each iteration appends an :class:`~stratalloc.model.IterationRecord`; the
final record has an empty ``added`` tuple. The number of iterations r* equals
``len(trace)``. The recorded s values are non-decreasing.

The final allocation is rebuilt from the discovered V with compensated sums
(:func:`~stratalloc.model.v_allocation`), so results are bit-identical across
the three solvers and across input permutations of the same strata. During
discovery the running numerator and denominator of s are updated with
compensated subtraction: when the a_w span many orders of magnitude, plain
running differences erase the small strata that decide the last iterations.
"""

from __future__ import annotations

import math

from .model import (
    AllocationProblem,
    AllocationResult,
    IterationRecord,
    v_allocation,
)

__all__ = ["rna", "sga", "coma"]


def _drop(total: float, comp: float, v: float) -> tuple[float, float]:
    # one compensated (Kahan-Babuska-Neumaier) subtraction step; the pair
    # carries total + comp with the rounding leftover in comp
    t = total - v
    if abs(total) >= abs(v):
        comp += (total - t) - v
    else:
        comp += total - (t + v)
    return t, comp


def _pair_sum(values) -> tuple[float, float]:
    # compensated accumulation into a (total, comp) pair; a single rounded
    # grand total loses the low-order mass that the last iterations run on
    total = 0.0
    comp = 0.0
    for v in values:
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
    return total, comp


def _census_result(problem: AllocationProblem, algorithm: str) -> AllocationResult:
    # n == sum(b): the bounds are the only feasible point
    x = {st.label: st.b for st in problem.strata}
    trace = (IterationRecord(1, 0.0, problem.labels),)
    return AllocationResult(
        x=x,
        take_all=frozenset(problem.labels),
        s_final=0.0,
        iterations=1,
        trace=trace,
        algorithm=algorithm,
    )


def rna(problem: AllocationProblem) -> AllocationResult:
    """Recursive batch solver.

    Starting from V = emptyset, each iteration computes s(V) and moves every
    remaining stratum with c_w * s(V) >= 1 into V. Stops at the first
    iteration that moves nothing.
    """
    if problem.is_census:
        return _census_result(problem, "rna")
    strata = problem.strata
    free = list(range(len(strata)))
    budget, budget_c = problem.n, 0.0
    denom, denom_c = _pair_sum(st.a for st in strata)
    trace: list[IterationRecord] = []
    taken: list[int] = []
    r = 0
    while True:
        r += 1
        if r > len(strata) + 1:  # each pass before the last moves >= 1 stratum
            raise RuntimeError("batch solver failed to terminate")
        s = (budget + budget_c) / (denom + denom_c)
        picked = [i for i in free if strata[i].c * s >= 1.0]
        trace.append(IterationRecord(r, s, tuple(strata[i].label for i in picked)))
        if not picked:
            break
        for i in picked:
            budget, budget_c = _drop(budget, budget_c, strata[i].b)
            denom, denom_c = _drop(denom, denom_c, strata[i].a)
        picked_set = set(picked)
        free = [i for i in free if i not in picked_set]
        taken.extend(picked)
        if not free:
            raise RuntimeError("all strata hit their bounds with n < sum(b)")
    v = frozenset(strata[i].label for i in taken)
    return v_allocation(problem, v, algorithm="rna", iterations=r, trace=tuple(trace))


def _priority_order(problem: AllocationProblem) -> list[int]:
    # stable: ties keep input order
    return sorted(range(problem.size), key=lambda i: -problem.strata[i].c)


def sga(problem: AllocationProblem) -> AllocationResult:
    """Sequential solver over the descending-priority order.

    With strata sorted by c = a/b descending, iteration r tests the r-th
    stratum against s(V_r) where V_r holds the first r - 1 strata; it is
    admitted while c * s(V_r) >= 1. Stops at the first failure.
    """
    if problem.is_census:
        return _census_result(problem, "sga")
    strata = problem.strata
    order = _priority_order(problem)
    budget, budget_c = problem.n, 0.0
    denom, denom_c = _pair_sum(st.a for st in strata)
    trace: list[IterationRecord] = []
    taken: list[int] = []
    r = 0
    while True:
        r += 1
        if r > len(order):
            raise RuntimeError("all strata hit their bounds with n < sum(b)")
        s = (budget + budget_c) / (denom + denom_c)
        i = order[r - 1]
        if strata[i].c * s < 1.0:
            trace.append(IterationRecord(r, s, ()))
            break
        trace.append(IterationRecord(r, s, (strata[i].label,)))
        taken.append(i)
        budget, budget_c = _drop(budget, budget_c, strata[i].b)
        denom, denom_c = _drop(denom, denom_c, strata[i].a)
    v = frozenset(strata[i].label for i in taken)
    return v_allocation(problem, v, algorithm="sga", iterations=r, trace=tuple(trace))


def coma(problem: AllocationProblem) -> AllocationResult:
    """Change-of-monotonicity solver over the descending-priority order.

    Walks the same sorted order as :func:`sga` but compares consecutive
    scale values instead of thresholds: it stops at the first r with
    s(V_r) > s(V_{r+1}), using s(W) = 0 so the comparison at r = K is
    defined. The two stopping rules select the same V.
    """
    if problem.is_census:
        return _census_result(problem, "coma")
    strata = problem.strata
    order = _priority_order(problem)
    K = len(order)
    budget, budget_c = problem.n, 0.0
    denom, denom_c = _pair_sum(st.a for st in strata)
    trace: list[IterationRecord] = []
    taken: list[int] = []
    r = 0
    while True:
        r += 1
        if r > K:
            raise RuntimeError("all strata hit their bounds with n < sum(b)")
        s = (budget + budget_c) / (denom + denom_c)
        if r == K:
            s_next = 0.0  # s of the full set
        else:
            i = order[r - 1]
            s_next = ((budget + budget_c) - strata[i].b) / ((denom + denom_c) - strata[i].a)
        if s > s_next:
            trace.append(IterationRecord(r, s, ()))
            break
        i = order[r - 1]
        trace.append(IterationRecord(r, s, (strata[i].label,)))
        taken.append(i)
        budget, budget_c = _drop(budget, budget_c, strata[i].b)
        denom, denom_c = _drop(denom, denom_c, strata[i].a)
    v = frozenset(strata[i].label for i in taken)
    return v_allocation(problem, v, algorithm="coma", iterations=r, trace=tuple(trace))
