"""Deterministic synthetic populations for tests and benchmarks.

Three designs:

``table1``
    A fixed 20-stratum benchmark problem with equal bounds b_w = 1000 and
    n = 8000, a worked example that exercises the take-all recursion.
``power``
    20 strata with N_w = 1000 and S_w = 10**w, an extreme-spread design
    where the take-all set grows one stratum per unit of log-range.
``lognormal_blocks``
    block_count independent blocks of 10000 lognormal values (log-mean 0,
    log-sd log(1 + i) for block i), each split into up to 10 strata by
    geometric boundaries, concatenated and randomly permuted.

Randomness is NumPy's PCG64 behind ``default_rng``; per-block generators get
child seeds from ``SeedSequence(seed).spawn``, so populations only depend on
(seed, block_count), not on generation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Hashable, Sequence

import numpy as np

from .model import AllocationProblem, Stratum

__all__ = [
    "PopulationSpec",
    "StratumSummary",
    "StratifiedPopulation",
    "table1_problem",
    "power_problem",
    "lognormal_population",
    "geometric_strata",
    "stratum_sd",
]

POPULATION_KINDS = ("table1", "lognormal_blocks", "power")

# priority column c_w = a_w / b_w of the fixed 20-stratum benchmark problem
# (a_w = 1000 c_w, b_w = 1000, n = 8000)
_TABLE1_C = (
    0.33, 2.56, 0.15, 0.66, 0.15, 15.45, 1.49, 1.74, 0.30, 0.93,
    2.37, 0.36, 0.14, 0.37, 4.25, 0.39, 10.21, 0.10, 0.23, 0.51,
)


@dataclass(frozen=True)
class PopulationSpec:
    """Parameters of a synthetic population.

    target_cv is recorded for provenance only; the splitter used here is the
    plain geometric rule, which takes no precision target.
    """

    kind: str
    seed: int = 0
    block_count: int = 100
    block_size: int = 10000
    strata_per_block: int = 10
    target_cv: float = 0.05

    def __post_init__(self) -> None:
        if self.kind not in POPULATION_KINDS:
            raise ValueError(f"unknown population kind {self.kind!r}")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.block_count < 1 or self.block_size < 2 or self.strata_per_block < 1:
            raise ValueError("block_count, block_size and strata_per_block must be positive")


@dataclass(frozen=True)
class StratumSummary:
    """Summary statistics of one population stratum."""

    label: Hashable
    N: int
    S: float


@dataclass(frozen=True)
class StratifiedPopulation:
    """A stratified population reduced to per-stratum (N, S) summaries."""

    strata: tuple[StratumSummary, ...]

    @cached_property
    def N(self) -> dict:
        return {st.label: st.N for st in self.strata}

    @cached_property
    def S(self) -> dict:
        return {st.label: st.S for st in self.strata}

    @property
    def size(self) -> int:
        return len(self.strata)

    @property
    def total_units(self) -> int:
        return sum(st.N for st in self.strata)

    def problem(self, n: float) -> AllocationProblem:
        """The allocation problem with a = N * S and b = N."""
        strata = tuple(
            Stratum(label=st.label, a=st.N * st.S, b=float(st.N)) for st in self.strata
        )
        return AllocationProblem(strata=strata, n=n)


def table1_problem() -> AllocationProblem:
    """The fixed 20-stratum benchmark problem (n = 8000, all bounds 1000)."""
    strata = tuple(
        Stratum(label=w + 1, a=1000.0 * c, b=1000.0) for w, c in enumerate(_TABLE1_C)
    )
    return AllocationProblem(strata=strata, n=8000.0)


def power_problem(n: float) -> AllocationProblem:
    """The power-spread problem: 20 strata, N_w = 1000, S_w = 10**w."""
    strata = tuple(
        Stratum(label=w, a=1000.0 * 10.0**w, b=1000.0) for w in range(1, 21)
    )
    return AllocationProblem(strata=strata, n=n)


def geometric_strata(values: Sequence[float], num_strata: int) -> list[float]:
    """Geometric stratum boundaries over sorted positive values.

    Returns the interior boundaries k_h = min * (max/min)**(h/L) for
    h = 1..L-1, after dropping boundaries that would close an empty stratum
    (the empty stratum merges into its right neighbor). Stratum h is the
    half-open interval [k_{h-1}, k_h); the last stratum includes the max.
    Equal min and max degenerate to a single stratum (no boundaries).
    """
    if num_strata < 1:
        raise ValueError("num_strata must be positive")
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("values must be nonempty")
    lo = float(arr[0])
    hi = float(arr[-1])
    if lo <= 0:
        raise ValueError("values must be positive")
    if lo > hi:
        raise ValueError("values must be sorted ascending")
    if lo == hi:
        return []
    ratio = hi / lo
    kept: list[float] = []
    closed = 0
    for h in range(1, num_strata):
        bnd = lo * ratio ** (h / num_strata)
        idx = int(np.searchsorted(arr, bnd, side="left"))
        if idx > closed:  # at least one value falls below bnd and above the last kept boundary
            kept.append(bnd)
            closed = idx
    return kept


def stratum_sd(values: Sequence[float]) -> float:
    """Sample standard deviation (ddof = 1), two-pass for stability."""
    arr = np.asarray(values, dtype=float)
    if arr.size < 2:
        raise ValueError("standard deviation needs at least 2 values")
    return float(arr.std(ddof=1))


def _split_block(values: np.ndarray, num_strata: int) -> list[np.ndarray]:
    """Split sorted values at geometric boundaries, merging thin strata.

    Strata with fewer than 2 members, or with zero spread, cannot enter an
    allocation problem (their SD is undefined or their weight a would be 0);
    they merge into the right neighbor, the rightmost one into the left.
    """
    bounds = geometric_strata(values, num_strata)
    cuts = [0] + [int(np.searchsorted(values, b, side="left")) for b in bounds] + [len(values)]
    parts = [values[cuts[j]:cuts[j + 1]] for j in range(len(cuts) - 1)]
    j = 0
    while j < len(parts):
        part = parts[j]
        degenerate = len(part) < 2 or float(part.std(ddof=1)) == 0.0
        if not degenerate:
            j += 1
            continue
        if j + 1 < len(parts):
            parts[j + 1] = np.concatenate([part, parts[j + 1]])
            del parts[j]
        elif j > 0:
            parts[j - 1] = np.concatenate([parts[j - 1], part])
            del parts[j]
            j -= 1
        else:
            raise ValueError("block is constant; cannot form a stratum with positive spread")
    return parts


def lognormal_population(spec: PopulationSpec) -> StratifiedPopulation:
    """Generate the lognormal-blocks population described in the module doc.

    Deterministic in spec.seed. Stratum labels encode block and slot
    ("b017s3"); the final stratum order is a seed-derived permutation.
    """
    if spec.kind != "lognormal_blocks":
        raise ValueError(f"expected kind 'lognormal_blocks', got {spec.kind!r}")
    seq = np.random.SeedSequence(spec.seed)
    children = seq.spawn(spec.block_count + 1)
    summaries: list[StratumSummary] = []
    for i in range(1, spec.block_count + 1):
        rng = np.random.default_rng(children[i - 1])
        values = np.sort(rng.lognormal(mean=0.0, sigma=math.log(1 + i), size=spec.block_size))
        for k, part in enumerate(_split_block(values, spec.strata_per_block)):
            summaries.append(
                StratumSummary(label=f"b{i:03d}s{k}", N=len(part), S=float(part.std(ddof=1)))
            )
    perm_rng = np.random.default_rng(children[-1])
    order = perm_rng.permutation(len(summaries))
    return StratifiedPopulation(strata=tuple(summaries[int(k)] for k in order))
