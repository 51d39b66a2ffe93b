"""Biclique search, the C-Bipartite-Ramsey verdict, diversity and richness checks.

Thresholds written as C*log use natural logs and ceilings. Ties on equal
degrees or counts always go to the lowest index.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np

from .graph import BipartiteGraph, bits_of, full_mask, popcount

COMPLETE, EMPTY = "complete", "empty"
DEFAULT_NODE_BUDGET = 2_000_000
DEFAULT_PAIR_BUDGET = 20_000_000
RICHNESS_EXACT_MAX = 20


class SearchBudgetExceeded(RuntimeError):
    """Branch-and-bound ran out of nodes before settling the question."""


@dataclass(frozen=True)
class BicliqueWitness:
    x_set: tuple[int, ...]
    y_set: tuple[int, ...]
    kind: str

    def verify(self, g: BipartiteGraph) -> bool:
        if not self.x_set or not self.y_set:
            return False
        ym = sum(1 << j for j in self.y_set)
        want = ym if self.kind == COMPLETE else 0
        return all(g.rows[i] & ym == want for i in self.x_set)


@dataclass
class RamseyVerdict:
    C: float
    a_threshold: int
    b_threshold: int
    is_ramsey: bool
    witness: Optional[BicliqueWitness]
    search_exhaustive: bool
    nodes: int = 0
    log_base: str = "e"
    threshold_rule: str = "min(side, max(1, ceil(C * ln side)))"

    def to_json(self) -> dict:
        d = asdict(self)
        d["exhaustive"] = self.search_exhaustive
        return d


def _kind_rows(g: BipartiteGraph, kind: str) -> list[int]:
    if kind == COMPLETE:
        return list(g.rows)
    full = full_mask(g.y_size)
    return [full & ~r for r in g.rows]


def _search(g: BipartiteGraph, a: int, b: int, kind: str, budget: int):
    """Return (witness or None, exhaustive, nodes)."""
    if kind not in (COMPLETE, EMPTY):
        raise ValueError(f"unknown kind {kind!r}")
    if a < 1 or b < 1:
        raise ValueError("a and b must be positive")
    if a > g.x_size or b > g.y_size:
        return None, True, 0
    rows = _kind_rows(g, kind)
    # rows measured in the transformed graph, so descending here is descending
    # degree for complete-kind and ascending degree for empty-kind
    cand = [i for i in range(g.x_size) if popcount(rows[i]) >= b]
    cand.sort(key=lambda i: (-popcount(rows[i]), i))
    crow = [rows[i] for i in cand]
    n = len(cand)
    nodes = 0
    chosen: list[int] = []
    exhausted = False

    def dfs(start: int, common: int) -> Optional[int]:
        nonlocal nodes, exhausted
        need = a - len(chosen)
        if need == 0:
            return common
        for k in range(start, n - need + 1):
            if nodes >= budget:
                exhausted = True
                return None
            nodes += 1
            nxt = common & crow[k]
            if popcount(nxt) < b:
                continue
            chosen.append(k)
            found = dfs(k + 1, nxt)
            if found is not None:
                return found
            chosen.pop()
            if exhausted:
                return None
        return None

    common = dfs(0, full_mask(g.y_size))
    if common is None:
        return None, not exhausted, nodes
    w = BicliqueWitness(tuple(sorted(cand[k] for k in chosen)), tuple(bits_of(common)), kind)
    return w, True, nodes


def find_induced_biclique(g: BipartiteGraph, a: int, b: int, kind: str = COMPLETE,
                          budget: int = DEFAULT_NODE_BUDGET) -> Optional[BicliqueWitness]:
    """Induced K_{a,b} (kind='complete') or its bipartite complement (kind='empty').

    Raises SearchBudgetExceeded rather than report a false negative.
    """
    w, exhaustive, _ = _search(g, a, b, kind, budget)
    if w is None and not exhaustive:
        raise SearchBudgetExceeded(f"no {kind} K_{{{a},{b}}} found within {budget} nodes")
    return w


def biclique_oracle(g: BipartiteGraph, a: int, b: int, kind: str) -> bool:
    """Full enumeration of X-subsets; each subset's common neighbourhood is the
    largest Y-set it can pair with."""
    rows = _kind_rows(g, kind)
    full = full_mask(g.y_size)
    for s in range(1, 1 << g.x_size):
        if popcount(s) < a:
            continue
        common = full
        for i in bits_of(s):
            common &= rows[i]
        if popcount(common) >= b:
            return True
    return False


def ramsey_thresholds(g: BipartiteGraph, C: float) -> tuple[int, int]:
    def one(n: int) -> int:
        if n <= 1:
            return max(n, 1)
        return min(n, max(1, math.ceil(C * math.log(n))))

    return one(g.x_size), one(g.y_size)


def is_c_bipartite_ramsey(g: BipartiteGraph, C: float, budget: int = DEFAULT_NODE_BUDGET) -> RamseyVerdict:
    if C <= 0:
        raise ValueError("C must be positive")
    a, b = ramsey_thresholds(g, C)
    exhaustive = True
    nodes = 0
    for kind in (COMPLETE, EMPTY):
        w, ex, nd = _search(g, a, b, kind, budget)
        nodes += nd
        exhaustive &= ex
        if w is not None:
            return RamseyVerdict(C, a, b, False, w, True, nodes)
    return RamseyVerdict(C, a, b, True, None, exhaustive, nodes)


def max_balanced_biclique(g: BipartiteGraph, kind: str = COMPLETE,
                          budget: int = DEFAULT_NODE_BUDGET) -> tuple[int, bool]:
    """Largest a with an induced K_{a,a} of the given kind, and whether that is exact.

    When the budget runs out the value is a certified lower bound.
    """
    lo, hi = 0, min(g.x_size, g.y_size)
    exact = True
    while lo < hi:
        mid = (lo + hi + 1) // 2
        w, ex, _ = _search(g, mid, mid, kind, budget)
        if w is not None:
            lo = mid
        else:
            if not ex:
                exact = False
            hi = mid - 1
    return lo, exact


# -- diversity -----------------------------------------------------------------


@dataclass
class SideReport:
    side: str
    coefficient: float
    delta: float
    max_bad_count: int
    threshold: float
    passes: bool
    worst_offender: Optional[tuple[int, ...]]
    audited: int = 0


@dataclass
class DiversityReport:
    kind: str  # "single" | "pair"
    x: SideReport
    y: SideReport
    sampled: bool = False
    notes: list[str] = field(default_factory=list)

    @property
    def passes(self) -> bool:
        return self.x.passes and self.y.passes

    def to_json(self) -> dict:
        d = asdict(self)
        d["passes"] = self.passes
        d["exhaustive"] = not self.sampled
        return d


def _oriented_arrays(g: BipartiteGraph):
    a = g.to_array().astype(np.int64)
    return {"X": a, "Y": a.T.copy()}


def _single_side(a: np.ndarray, side: str, c: float, delta: float) -> SideReport:
    n, other = a.shape
    deg = a.sum(axis=1)
    sym = deg[:, None] + deg[None, :] - 2 * (a @ a.T)
    close = sym < c * other
    np.fill_diagonal(close, False)
    bad = close.sum(axis=1)
    threshold = n**delta
    worst = int(np.argmax(bad)) if n else None
    mx = int(bad.max()) if n else 0
    return SideReport(side, c, delta, mx, threshold, mx <= threshold,
                      (worst,) if worst is not None else None, n)


def diversity_check(g: BipartiteGraph, c: float, delta: float) -> DiversityReport:
    """(c, delta)-bipartite-diversity: few near-twins for every vertex."""
    if not 0 < c <= 2 or delta <= 0:
        raise ValueError("need 0 < c <= 2 and delta > 0")
    arrs = _oriented_arrays(g)
    return DiversityReport("single", _single_side(arrs["X"], "X", c, delta),
                           _single_side(arrs["Y"], "Y", c, delta))


def _pairs(n: int) -> np.ndarray:
    if n < 2:
        return np.zeros((0, 2), dtype=np.int64)
    return np.array(list(combinations(range(n), 2)), dtype=np.int64)


def _pair_side(a: np.ndarray, side: str, alpha: float, delta: float, eps: float,
               budget: int, rng: np.random.Generator) -> tuple[SideReport, bool]:
    n, other = a.shape
    pairs = _pairs(n)
    threshold = n**delta
    if len(pairs) == 0:
        return SideReport(side, eps, delta, 0, threshold, True, None, 0), False
    a1, a2 = a[pairs[:, 0]], a[pairs[:, 1]]
    # N(x1) △ (comp N(x2)) = vertices where both or neither are adjacent
    agree = (a1 == a2).sum(axis=1)
    filt = np.flatnonzero(agree >= alpha * other)
    mult = (a1 + a2).astype(np.int16)
    sampled = False
    audit = filt
    if len(filt) * len(pairs) > budget:
        k = max(1, budget // len(pairs))
        audit = np.sort(rng.choice(filt, size=min(k, len(filt)), replace=False))
        sampled = True
    mx, worst = 0, None
    limit = eps * other
    for idx in audit:
        p = pairs[idx]
        dist = np.abs(mult - mult[idx]).sum(axis=1)
        disjoint = ((pairs[:, 0] != p[0]) & (pairs[:, 0] != p[1])
                    & (pairs[:, 1] != p[0]) & (pairs[:, 1] != p[1]))
        cnt = int(np.count_nonzero((dist < limit) & disjoint))
        if cnt > mx:
            mx, worst = cnt, (int(p[0]), int(p[1]))
    if worst is None and len(audit):
        p = pairs[audit[0]]
        worst = (int(p[0]), int(p[1]))
    return SideReport(side, eps, delta, mx, threshold, mx <= threshold, worst, len(audit)), sampled


def pair_diversity_check(g: BipartiteGraph, alpha: float, delta: float, eps: float,
                         budget: int = DEFAULT_PAIR_BUDGET, seed: int = 0) -> DiversityReport:
    """(alpha, delta, eps)_2-bipartite-diversity over vertex pairs.

    A pair x = {x1, x2} is audited when |N(x1) △ (comp N(x2))| >= alpha*|Y|;
    it is bad-counted against every pair x' vertex-disjoint from x whose
    multiset neighbourhood differs from N(x) in fewer than eps*|Y| places.
    """
    if not (0 < alpha < 2 and 0 < eps < 2 and delta > 0):
        raise ValueError("need alpha, eps in (0, 2) and delta > 0")
    rng = np.random.default_rng(seed)
    arrs = _oriented_arrays(g)
    xr, xs = _pair_side(arrs["X"], "X", alpha, delta, eps, budget, rng)
    yr, ys = _pair_side(arrs["Y"], "Y", alpha, delta, eps, budget, rng)
    notes = ["counted pairs are vertex-disjoint from the audited pair"]
    return DiversityReport("pair", xr, yr, sampled=xs or ys, notes=notes)


def near_complement_pairs(g: BipartiteGraph, side: str, limit: float) -> int:
    """Number of 2-subsets {v1, v2} of ``side`` with |N(v1) △ comp N(v2)| < limit."""
    a = _oriented_arrays(g)[side]
    n = a.shape[0]
    if n < 2:
        return 0
    agree = a @ a.T + (1 - a) @ (1 - a).T
    iu = np.triu_indices(n, k=1)
    return int(np.count_nonzero(agree[iu] < limit))


# -- richness ------------------------------------------------------------------


@dataclass
class RichnessReport:
    gamma: float
    delta: float
    eps: float
    mode: str  # "exact" | "sampled"
    worst_W: Optional[tuple[str, tuple[int, ...]]]
    max_bad_vertices: int
    passes: bool
    per_side: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        d = asdict(self)
        d["exhaustive"] = self.mode == "exact"
        return d


def _subset_matrix(n: int) -> np.ndarray:
    return ((np.arange(1 << n)[:, None] >> np.arange(n)) & 1).astype(np.int64)


def _bad_counts(a: np.ndarray, w: np.ndarray, eps: float) -> np.ndarray:
    """For ground side rows ``a`` (ground x other) and subsets ``w`` (k x ground):
    number of other-side vertices bad for each subset."""
    ground = a.shape[0]
    inside = w @ a  # |N(v) ∩ W| per subset, per other-side vertex
    size = w.sum(axis=1)[:, None]
    limit = eps * ground
    return ((inside < limit) | (size - inside < limit)).sum(axis=1)


def _rich_side_exact(a: np.ndarray, side: str, gamma: float, delta: float, eps: float):
    ground, other = a.shape
    threshold = other**delta
    w = _subset_matrix(ground)
    w = w[w.sum(axis=1) >= gamma * ground]
    if len(w) == 0:
        return 0, None, True, threshold, 0
    bad = _bad_counts(a, w, eps)
    k = int(np.argmax(bad))
    mx = int(bad[k])
    return mx, tuple(int(i) for i in np.flatnonzero(w[k])), mx <= threshold, threshold, len(w)


def richness_check_exact(g: BipartiteGraph, gamma: float, delta: float, eps: float) -> RichnessReport:
    """(gamma, delta, eps)-bipartite-richness by enumerating every large W.

    A vertex y is bad for W_X when |N(y) ∩ W_X| or |comp N(y) ∩ W_X| falls
    below eps*|X| (the ground side's size, not |W_X|).
    """
    if max(g.x_size, g.y_size) > RICHNESS_EXACT_MAX:
        raise ValueError(f"exact richness needs both sides <= {RICHNESS_EXACT_MAX}; use richness_check_sampled")
    arrs = _oriented_arrays(g)
    # W_X ⊆ X, bad vertices in Y: ground rows are X-rows seen from Y, i.e. arrs["X"]
    res = {}
    for side in ("X", "Y"):
        res[side] = _rich_side_exact(arrs[side], side, gamma, delta, eps)
    return _richness_report(gamma, delta, eps, "exact", res)


def _richness_report(gamma, delta, eps, mode, res) -> RichnessReport:
    worst_side = max(res, key=lambda s: (res[s][0], s == "X"))
    mx, wW, _, _, _ = res[worst_side]
    per_side = {s: {"max_bad_vertices": r[0], "worst_W": r[1], "passes": r[2],
                    "threshold": r[3], "audited": r[4]} for s, r in res.items()}
    return RichnessReport(gamma, delta, eps, mode,
                          (worst_side, wW) if wW is not None else None,
                          mx, all(r[2] for r in res.values()), per_side)


def richness_check_sampled(g: BipartiteGraph, gamma: float, delta: float, eps: float,
                           trials: int, seed: int) -> RichnessReport:
    """Audit random qualifying W; a failure is a certified counterexample."""
    if trials < 1:
        raise ValueError("trials must be positive")
    rng = np.random.default_rng(seed)
    arrs = _oriented_arrays(g)
    res = {}
    for side in ("X", "Y"):
        a = arrs[side]
        ground, other = a.shape
        threshold = other**delta
        kmin = max(0, math.ceil(gamma * ground - 1e-12))
        if kmin > ground:
            res[side] = (0, None, True, threshold, 0)
            continue
        sizes = np.arange(kmin, ground + 1)
        logw = np.array([math.lgamma(ground + 1) - math.lgamma(k + 1) - math.lgamma(ground - k + 1) for k in sizes])
        prob = np.exp(logw - logw.max())
        prob /= prob.sum()
        w = np.zeros((trials, ground), dtype=np.int64)
        for t, k in enumerate(rng.choice(sizes, size=trials, p=prob)):
            w[t, rng.choice(ground, size=k, replace=False)] = 1
        bad = _bad_counts(a, w, eps)
        k = int(np.argmax(bad))
        mx = int(bad[k])
        res[side] = (mx, tuple(int(i) for i in np.flatnonzero(w[k])), mx <= threshold, threshold, trials)
    return _richness_report(gamma, delta, eps, "sampled", res)


def richness_bad_count(g: BipartiteGraph, side: str, W: tuple[int, ...], eps: float) -> int:
    """Bad-vertex count for one explicit W on ``side`` (used to replay witnesses)."""
    a = _oriented_arrays(g)[side]
    w = np.zeros((1, a.shape[0]), dtype=np.int64)
    w[0, list(W)] = 1
    return int(_bad_counts(a, w, eps)[0])


# -- richness implications and Turán ----------------------------------------


@dataclass
class ImplicationReport:
    hypothesis_met: bool
    diverse: Optional[bool] = None
    pair_diverse: Optional[bool] = None
    near_complement_ok: Optional[bool] = None
    counts: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        """True unless the hypothesis holds and some conclusion fails."""
        if not self.hypothesis_met:
            return True
        return bool(self.diverse and self.pair_diverse and self.near_complement_ok)

    def to_json(self) -> dict:
        d = asdict(self)
        d["holds"] = self.holds
        if not self.hypothesis_met:
            d["status"] = "hypothesis unmet"
        return d


def lemma46_implications(g: BipartiteGraph, gamma: float, delta: float, eps: float,
                         rich: Optional[RichnessReport] = None) -> ImplicationReport:
    """Check what richness should imply: single diversity at eps/2, pair
    diversity with filter 2*gamma and closeness gamma*eps, and few
    near-complementary pairs."""
    if not gamma < 0.5:
        raise ValueError("needs gamma < 1/2")
    rich = rich or richness_check_exact(g, gamma, delta, eps)
    if not rich.passes:
        return ImplicationReport(False)
    alpha = 2 * gamma
    div = diversity_check(g, eps / 2, delta)
    pdiv = pair_diversity_check(g, alpha, delta, alpha * eps / 2)
    ny = near_complement_pairs(g, "Y", eps * g.x_size / 2)
    nx = near_complement_pairs(g, "X", eps * g.y_size / 2)
    ok3 = ny <= g.y_size ** (1 + delta) and nx <= g.x_size ** (1 + delta)
    counts = {
        "diversity_max_bad": [div.x.max_bad_count, div.y.max_bad_count],
        "pair_diversity_max_bad": [pdiv.x.max_bad_count, pdiv.y.max_bad_count],
        "near_complement_pairs": {"X": nx, "Y": ny},
    }
    return ImplicationReport(True, div.passes, pdiv.passes, ok3, counts)


def turan_bounds(n: int, max_deg: int, edges: int) -> tuple[int, int]:
    """Independent-set guarantees n/(1+Δ) and n²/(2e+n), rounded up."""
    if n < 1:
        raise ValueError("n must be positive")
    return -(-n // (1 + max_deg)), -(-n * n // (2 * edges + n))


def greedy_independent_set(adj: list[set[int]]) -> list[int]:
    """Min-degree greedy independent set (lowest index on ties).

    Attains both Turán bounds: n/(1+Δ) and n²/(2e+n).
    """
    alive = set(range(len(adj)))
    deg = {v: len(adj[v]) for v in alive}
    out = []
    while alive:
        v = min(alive, key=lambda u: (deg[u], u))
        out.append(v)
        gone = {v} | (adj[v] & alive)
        alive -= gone
        for u in gone:
            for w in adj[u] & alive:
                deg[w] -= 1
    return sorted(out)
