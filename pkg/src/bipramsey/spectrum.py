"""Induced-subgraph size spectra: the set of e(H) over induced subgraphs H.

Sizes include 0 (the empty subgraph), so ``phi`` here is one more than the
count that excludes the empty subgraph; ``phi_positive`` gives the latter.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .graph import BipartiteGraph, induced_edge_count, Selection
from .numtheory import BudgetError, SizeSet

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 2**24
ORACLE_MAX_VERTICES = 22


@dataclass(frozen=True)
class SpectrumReport:
    sizes: SizeSet
    method: str  # "exact" | "sampled"
    budget_used: int

    @property
    def phi(self) -> int:
        return self.sizes.cardinality

    @property
    def phi_positive(self) -> int:
        """Count without the empty subgraph."""
        return self.phi - (1 if 0 in self.sizes else 0)

    def to_json(self, window: int | None = None) -> dict:
        out = {
            "phi": self.phi,
            "phi_excluding_empty": self.phi_positive,
            "includes_zero": True,
            "method": self.method,
            "max_value": self.sizes.max_value,
            "budget_used": self.budget_used,
        }
        if window:
            cov = interval_coverage(self.sizes, window)
            out["window_stats"] = {
                "window": window,
                "min_distinct": min(c for _, c in cov),
                "windows": [list(w) for w in cov],
            }
        return out


def _sums_for_histogram(hist: tuple[int, ...]) -> int:
    """Achievable subset sums of a multiset given as value -> multiplicity."""
    bits = 1
    for value, count in enumerate(hist):
        if not count or not value:
            continue
        # binary splitting: chunks 1, 2, 4, ... cover every multiplicity 0..count
        k = 1
        while count > 0:
            take = min(k, count)
            bits |= bits << (value * take)
            count -= take
            k <<= 1
    return bits


def _gray_chunk(args) -> int:
    adj, start, stop = args
    x_size, y_size = adj.shape
    g0 = start ^ (start >> 1)
    sel = np.array([(g0 >> i) & 1 for i in range(x_size)], dtype=np.int64)
    deg = sel @ adj
    memo: dict[tuple, int] = {}
    acc = 0
    minlength = x_size + 1
    for t in range(start, stop):
        if t > start:
            flip = (t & -t).bit_length() - 1
            if sel[flip]:
                deg -= adj[flip]
            else:
                deg += adj[flip]
            sel[flip] ^= 1
        key = tuple(np.bincount(deg, minlength=minlength).tolist())
        bits = memo.get(key)
        if bits is None:
            bits = memo[key] = _sums_for_histogram(key)
            acc |= bits
    return acc


def phi_exact(g: BipartiteGraph, budget: int = DEFAULT_BUDGET, jobs: int = 1) -> SpectrumReport:
    """Exact spectrum by enumerating subsets of the smaller side.

    For each subset S of X the Y-degrees into S are fixed, and the sizes
    reachable by adding Y-vertices are the subset sums of that degree
    multiset, computed by shift-or on an int bitmask.
    """
    h = g.oriented()
    work = 1 << h.x_size
    if work > budget:
        raise BudgetError(f"exact spectrum needs 2^{h.x_size} subsets, budget {budget}")
    adj = h.to_array().astype(np.int64)
    chunks = max(1, min(jobs, work))
    bounds = [work * i // chunks for i in range(chunks + 1)]
    tasks = [(adj, bounds[i], bounds[i + 1]) for i in range(chunks) if bounds[i] < bounds[i + 1]]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(_gray_chunk, tasks))
    else:
        parts = [_gray_chunk(t) for t in tasks]
    bits = 0
    for p in parts:
        bits |= p
    return SpectrumReport(SizeSet(g.edge_count, bits), "exact", work)


def phi_exact_oracle(g: BipartiteGraph) -> SpectrumReport:
    """Brute force over every (X-subset, Y-subset) pair; independent of phi_exact."""
    if g.x_size + g.y_size > ORACLE_MAX_VERTICES:
        raise BudgetError(f"oracle limited to {ORACLE_MAX_VERTICES} vertices")
    a = g.to_array().astype(np.int64)
    xs = (np.arange(1 << g.x_size)[:, None] >> np.arange(g.x_size)) & 1
    ys = (np.arange(1 << g.y_size)[:, None] >> np.arange(g.y_size)) & 1
    counts = xs @ a @ ys.T
    present = np.zeros(g.edge_count + 1, dtype=bool)
    present[np.unique(counts)] = True
    return SpectrumReport(SizeSet.from_bool_array(present), "exact", counts.size)


def phi_sampled(g: BipartiteGraph, trials: int, seed: int, x_subsets: int = 64) -> SpectrumReport:
    """Lower bound on the spectrum from random selections.

    Adds ``trials`` uniformly random selections plus, for ``x_subsets``
    random subsets S of the smaller side, every size reachable with S fixed.
    """
    if trials < 1:
        log.warning("phi_sampled called with trials=%d; returning {0}", trials)
        return SpectrumReport(SizeSet(g.edge_count, 1), "sampled", 0)
    rng = np.random.default_rng(seed)
    bits = 1 | (1 << g.edge_count)
    for _ in range(trials):
        xm = int(rng.integers(0, 1 << g.x_size)) if g.x_size else 0
        ym = int(rng.integers(0, 1 << g.y_size)) if g.y_size else 0
        bits |= 1 << induced_edge_count(g, Selection(xm, ym))
    h = g.oriented()
    adj = h.to_array().astype(np.int64)
    for _ in range(x_subsets):
        sel = rng.integers(0, 2, size=h.x_size)
        deg = sel @ adj
        bits |= _sums_for_histogram(tuple(np.bincount(deg, minlength=h.x_size + 1).tolist()))
    return SpectrumReport(SizeSet(g.edge_count, bits), "sampled", trials + x_subsets)


def interval_coverage(sizes: SizeSet, window: int) -> list[tuple[int, int]]:
    """Distinct sizes in each window [s, s + window) covering [0, max_value]."""
    if window < 1:
        raise ValueError("window must be positive")
    arr = sizes.to_bool_array()
    out = []
    for start in range(0, sizes.max_value + 1, window):
        out.append((start, int(np.count_nonzero(arr[start : start + window]))))
    return out
