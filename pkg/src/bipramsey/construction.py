"""Randomised construction of many induced subgraphs with distinct edge counts.

Pipeline (all packs live on the larger side Y, so no pack-pack edges exist):

1. bucket Y-pairs by degree sum, prune near-identical pairs, take a star or
   a matching of what is left, thin to a diverse independent set A;
2. sample a random core U and measure the five claim quantities;
3. split the good packs of A into a low-degree set S, a high-degree set T
   and a set Z of packs with pairwise distinct degrees into U;
4. walk the ladder Q_{k,i} (first k-i packs of one set, first i of the
   other) and add one Z-pack at a time, keeping only well-separated bases so
   every resulting size is distinct.

Every size produced is re-counted on the realised vertex selection.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import numpy as np

from .config import load_defaults
from .graph import (BipartiteGraph, Selection, VertexPack, X, Y, induced_edge_count,
                    multiset_symdiff, pack_union_inter, popcount, sub_seed)
from .numtheory import SizeSet
from .ramsey import greedy_independent_set, turan_bounds
from .spectrum import interval_coverage


class ConstructionError(RuntimeError):
    """Base class for pipeline failures."""


class ParameterError(ConstructionError, ValueError):
    pass


class StageFailure(ConstructionError):
    def __init__(self, stage: str, reason: str, diagnostics: Optional[dict] = None):
        super().__init__(f"{stage}: {reason}")
        self.stage = stage
        self.reason = reason
        self.diagnostics = diagnostics or {}


class InternalConsistencyError(ConstructionError):
    """A guarantee that holds by construction was violated (likely a mis-set constant)."""


@dataclass
class ConstructionParams:
    C: float = 5.0
    alpha: float = 0.5
    c: float = 0.00055
    c1: float = 1.0
    c2: float = 0.01
    Q_window: float = 0.25
    delta: Optional[float] = None
    gamma: float = 0.05
    eps: Optional[float] = None
    K1: float = 1.0
    K2: float = 1.0
    K3: float = 0.0
    K4: float = 10.0
    K5: float = 0.125
    A_cap: Optional[float] = 5.0
    retries: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.delta is None:
            self.delta = self.alpha / 5
        if self.eps is None:
            self.eps = 4 * self.gamma
        if self.c <= 0:
            raise ParameterError("c must be positive")

    @classmethod
    def defaults(cls, **overrides) -> "ConstructionParams":
        base = load_defaults()["construction"]
        base.update(overrides)
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in base.items() if k in names})

    def to_json(self) -> dict:
        return asdict(self)


# -- structural stages (no randomness) -----------------------------------------


def _y_packs(pairs) -> list[VertexPack]:
    return [VertexPack.of(Y, *p) for p in pairs]


def build_candidate_pairs(g: BipartiteGraph) -> tuple[float, list[tuple[int, int]]]:
    """Most populated degree-sum window of Y-pairs.

    Windows have width ceil(sqrt(f(m))); returns the window centre d' and its
    pairs (ascending). Ties go to the lowest window.
    """
    if g.y_size < 4:
        raise StageFailure("build_candidate_pairs", "need |Y| >= 4")
    w = math.ceil(math.sqrt(g.f))
    deg = np.array(g.y_degrees())
    i, j = np.triu_indices(g.y_size, k=1)
    bucket = (deg[i] + deg[j]) // w
    counts = np.bincount(bucket)
    best = int(np.argmax(counts))
    sel = bucket == best
    pairs = list(zip(i[sel].tolist(), j[sel].tolist()))
    return best * w + (w - 1) / 2, pairs


@dataclass
class PruneResult:
    kept: list[tuple[int, int]]
    removed: int
    bound: float

    @property
    def within_bound(self) -> bool:
        return self.removed <= self.bound


def prune_non_diverse_pairs(g: BipartiteGraph, W, gamma: float, delta: float = 0.1) -> PruneResult:
    """Drop pairs where either member has fewer than 2*gamma*|X| private neighbours."""
    limit = 2 * gamma * g.x_size
    cols = g.cols
    kept = []
    for a, b in W:
        na, nb = cols[a], cols[b]
        if popcount(na & ~nb) >= limit and popcount(nb & ~na) >= limit:
            kept.append((a, b))
    res = PruneResult(kept, len(W) - len(kept), g.y_size ** (1 + delta))
    if not kept:
        raise StageFailure("prune_non_diverse_pairs", "no candidate pair survives pruning",
                           {"removed": res.removed, "bound": res.bound})
    return res


def greedy_matching(edges) -> list[tuple[int, int]]:
    used = set()
    out = []
    for a, b in edges:
        if a not in used and b not in used:
            out.append((a, b))
            used.update((a, b))
    return out


def star_or_matching(g: BipartiteGraph, W_prime, d_prime: float) -> tuple[str, list[VertexPack], float]:
    """Star around the max-degree vertex of W' if it beats the greedy matching."""
    if not W_prime:
        raise StageFailure("star_or_matching", "empty pair list")
    nbrs: dict[int, list[int]] = {}
    for a, b in W_prime:
        nbrs.setdefault(a, []).append(b)
        nbrs.setdefault(b, []).append(a)
    centre = min(nbrs, key=lambda v: (-len(nbrs[v]), v))
    matching = greedy_matching(W_prime)
    if len(nbrs[centre]) >= len(matching):
        leaves = sorted(nbrs[centre])
        return "star", [VertexPack.of(Y, v) for v in leaves], d_prime - popcount(g.cols[centre])
    return "matching", _y_packs(matching), d_prime


def conflict_graph(items, close) -> list[set[int]]:
    adj = [set() for _ in items]
    for a in range(len(items)):
        for b in range(a + 1, len(items)):
            if close(items[a], items[b]):
                adj[a].add(b)
                adj[b].add(a)
    return adj


def diversify(g: BipartiteGraph, L: list[VertexPack], gamma: float) -> tuple[list[VertexPack], dict]:
    """Greedy independent set in the 'multiset neighbourhoods too close' graph."""
    if not L:
        raise StageFailure("diversify", "empty pack list")
    limit = 4 * gamma * gamma * g.x_size
    nb = [pack_union_inter(g, p) for p in L]
    adj = conflict_graph(list(range(len(L))), lambda a, b: multiset_symdiff(nb[a], nb[b]) < limit)
    chosen = greedy_independent_set(adj)
    max_deg = max((len(s) for s in adj), default=0)
    edges = sum(len(s) for s in adj) // 2
    by_deg, by_edges = turan_bounds(len(L), max_deg, edges)
    if len(chosen) < max(by_deg, by_edges):
        raise InternalConsistencyError("greedy independent set below the Turán bound")
    return [L[i] for i in chosen], {"conflict_max_degree": max_deg, "conflict_edges": edges,
                                    "turan_by_degree": by_deg, "turan_by_edges": by_edges}


# -- random core and claims ----------------------------------------------------


def edge_probability(g: BipartiteGraph, l: float) -> float:
    return math.sqrt(4 * l / g.edge_count) if g.edge_count else math.inf


def sample_u(g: BipartiteGraph, l: float, seed: int, c: Optional[float] = None) -> tuple[Selection, float]:
    """Random core: every vertex independently with probability sqrt(4l/e(G))."""
    if c is not None and not (c * g.m <= l <= 2 * c * g.m):
        raise ParameterError(f"l={l} outside [c*m, 2c*m] = [{c * g.m}, {2 * c * g.m}]")
    p = edge_probability(g, l)
    if not p > 0:
        raise ParameterError(f"p={p} violates p > 0")
    if not p < 0.1:
        raise ParameterError(f"p={p} violates p < 0.1")
    rng = np.random.default_rng(seed)
    xm = rng.random(g.x_size) < p
    ym = rng.random(g.y_size) < p
    to_int = lambda a: int.from_bytes(np.packbits(a, bitorder="little").tobytes(), "little")
    return Selection(to_int(xm), to_int(ym)), p


def d_u(g: BipartiteGraph, U: Selection, pack: VertexPack) -> int:
    return sum(popcount(g.cols[i] & U.x_mask) for i in pack.indices)


@dataclass
class ClaimDiagnostics:
    edge_deviation: float
    edge_bound: float
    untouched_fraction: float
    window_fraction: float
    window_halfwidth: float
    min_symdiff: Optional[int]
    symdiff_bound: float
    equal_pairs: int
    equal_bound: float
    ok: list[bool] = field(default_factory=list)

    @property
    def all_ok(self) -> bool:
        return all(self.ok)


def verify_claims(g: BipartiteGraph, U: Selection, A: list[VertexPack], l: float, p: float,
                  d_dprime: float, params: ConstructionParams) -> ClaimDiagnostics:
    m, f = g.m, g.f
    sf = math.sqrt(f)
    dev = abs(induced_edge_count(g, U) - 4 * l)
    b1 = params.K1 * m / sf
    n = len(A)
    untouched = sum(1 for a in A if not any(U.y_mask >> i & 1 for i in a.indices))
    du = [d_u(g, U, a) for a in A]
    half = params.K2 * sf
    in_window = sum(1 for v in du if abs(v - p * d_dprime) <= half)
    nb = [pack_union_inter(g, a) for a in A]
    min_sd = None
    equal = 0
    for i in range(n):
        for j in range(i + 1, n):
            sd = multiset_symdiff(nb[i], nb[j], U.x_mask)
            min_sd = sd if min_sd is None else min(min_sd, sd)
            equal += du[i] == du[j]
    b4 = params.K3 * f
    b5 = params.K4 * m * m / f**3.5
    frac2 = untouched / n if n else 1.0
    frac3 = in_window / n if n else 1.0
    ok = [dev <= b1, frac2 >= 2 / 3, frac3 >= 2 / 3,
          min_sd is None or min_sd >= b4, equal <= b5]
    return ClaimDiagnostics(dev, b1, frac2, frac3, half, min_sd, b4, equal, b5, ok)


# -- S, T, Z and the ladder ----------------------------------------------------


@dataclass
class Split:
    S: list[VertexPack]
    T: list[VertexPack]
    Z: list[VertexPack]
    B: list[VertexPack]
    branch: str
    separation: int


def _distinct_degree_set(packs, deg) -> list[int]:
    """Indices of an independent set in the equal-degree graph (one per degree)."""
    adj = conflict_graph(list(range(len(packs))), lambda a, b: deg[a] == deg[b])
    chosen = greedy_independent_set(adj)
    edges = sum(len(s) for s in adj) // 2
    if len(packs) and len(chosen) < turan_bounds(len(packs), 0, edges)[1]:
        raise InternalConsistencyError("equal-degree independent set below the Turán bound")
    return chosen


def split_and_order(g: BipartiteGraph, U: Selection, RQ: list[VertexPack]) -> Split:
    """Alternate RQ into H and P; B and Z are distinct-degree subsets of each.

    T is the high-degree side and S the low-degree side; whichever half of B
    has more same-degree company in H absorbs it.
    """
    H, P = RQ[0::2], RQ[1::2]
    dh = [d_u(g, U, x) for x in H]
    dp = [d_u(g, U, x) for x in P]
    b_idx = _distinct_degree_set(H, dh)
    z_idx = _distinct_degree_set(P, dp)
    B = sorted(b_idx, key=lambda i: (dh[i], i))
    r = len(B)
    if r < 6:
        raise StageFailure("split_and_order", f"|B| = {r} < 6")
    half, third = r // 2, r // 3
    in_b = set(B)

    def company(block):
        degs = {dh[i] for i in block}
        return [i for i in range(len(H)) if i not in in_b and dh[i] in degs]

    up, low = B[r - half:], B[:half]
    up_c, low_c = company(up), company(low)
    key = lambda i: (dh[i], i)
    if len(up_c) >= len(low_c):
        branch = "T-large"
        T = sorted(up + up_c, key=key)
        S = sorted(B[:third], key=key)
    else:
        branch = "S-large"
        S = sorted(low + low_c, key=key)
        T = sorted(B[r - third:], key=key)
    sep = min(dh[i] for i in T) - max(dh[i] for i in S)
    if sep * 6 < r:
        raise InternalConsistencyError(f"separation {sep} below |B|/6")
    Z = sorted(z_idx, key=lambda i: (dp[i], i))
    return Split([H[i] for i in S], [H[i] for i in T], [P[i] for i in Z],
                 [H[i] for i in B], branch, sep)


@dataclass
class QFamily:
    base: list[VertexPack]
    swap: list[VertexPack]
    ladder: str  # "S-base" (grow S, swap from T) or "T-base"
    k_range: tuple[int, int]
    i_max: int
    nominal_k: tuple[int, int]
    nominal_i: int
    sub_nominal: bool
    base_deg: list[int]
    swap_deg: list[int]

    def index_set(self) -> list[tuple[int, int]]:
        out = []
        for k in range(self.k_range[0], self.k_range[1] + 1):
            for i in range(0, min(self.i_max, k) + 1):
                if k - i <= len(self.base):
                    out.append((k, i))
        return out

    def selection(self, U: Selection, k: int, i: int) -> Selection:
        sel = U
        for pk in self.base[: k - i] + self.swap[:i]:
            sel = sel.with_pack(pk)
        return sel


def build_q_family(g: BipartiteGraph, U: Selection, S, T, params: ConstructionParams) -> QFamily:
    """Index ranges for Q_{k,i}, clipped to what S and T can supply."""
    m, f = g.m, g.f
    if len(S) >= len(T):
        base, swap, ladder = S, T, "S-base"
    else:
        base, swap, ladder = T, S, "T-base"
    scale = m / f**1.5
    k_lo = math.ceil(params.c1 * scale)
    k_hi = math.floor(2 * params.c1 * scale)
    i_hi = math.floor(params.c1 * math.sqrt(f))
    # k+1 must exist for the separation filter
    k_hi_eff = min(k_hi, len(base) - 1)
    k_lo_eff = min(k_lo, k_hi_eff)
    i_eff = min(i_hi, len(swap))
    if k_hi_eff < 0:
        raise StageFailure("build_q_family", "empty index set after clipping")
    sub = (k_hi_eff, k_lo_eff, i_eff) != (k_hi, k_lo, i_hi)
    return QFamily(list(base), list(swap), ladder, (k_lo_eff, k_hi_eff), i_eff, (k_lo, k_hi), i_hi,
                   sub, [d_u(g, U, x) for x in base], [d_u(g, U, x) for x in swap])


@dataclass
class SizeFamily:
    raw: list[tuple[int, int, int]]
    kept: list[tuple[int, int, int]]
    q: int
    gap: float
    final_sizes: SizeSet
    certificates: dict = field(default_factory=dict)  # size -> (k, i, z index or -1)

    @property
    def distinct_count(self) -> int:
        return self.final_sizes.cardinality


def _every_qth(values: list[int], gap: float) -> int:
    for q in range(1, len(values) + 1):
        kept = values[::q]
        if all(b - a > gap for a, b in zip(kept, kept[1:])):
            return q
    return max(1, len(values))


def enumerate_sizes(g: BipartiteGraph, U: Selection, fam: QFamily, Z: list[VertexPack],
                    d: float, params: ConstructionParams, verify: bool = True) -> SizeFamily:
    """Well-separated ladder sizes, each shifted by every distinct Z-degree."""
    f = g.f
    sf = math.sqrt(f)
    e_u = induced_edge_count(g, U)
    pb = np.concatenate([[0], np.cumsum(fam.base_deg)]).astype(int).tolist()
    ps = np.concatenate([[0], np.cumsum(fam.swap_deg)]).astype(int).tolist()

    def e_of(k, i):
        # no edges inside Y, so each added pack contributes exactly its degree into U
        return e_u + pb[k - i] + ps[i]

    raw = [(k, i, e_of(k, i)) for k, i in fam.index_set()]
    margin = params.K5 * sf
    filtered = [(k, i, e) for k, i, e in raw if k + 1 <= len(fam.base) and e_of(k + 1, 0) - e >= margin]
    first = {}
    for k, i, e in sorted(filtered, key=lambda t: (t[2], t[0], t[1])):
        first.setdefault(e, (k, i, e))
    distinct = sorted(first)
    dz = [d_u(g, U, z) for z in Z]
    half = max(params.Q_window * sf, max((abs(v - d) for v in dz), default=0.0))
    gap = 2 * half if Z else 0.0
    q = _every_qth(distinct, gap)
    kept = [first[v] for v in distinct[::q]]
    certs = {}
    for k, i, e in kept:
        if Z:
            for zi, dv in enumerate(dz):
                s = e + dv
                if s in certs:
                    raise InternalConsistencyError(f"size {s} produced twice")
                certs[s] = (k, i, zi)
        else:
            certs[e] = (k, i, -1)
    if verify:
        for s, (k, i, zi) in certs.items():
            sel = fam.selection(U, k, i)
            if zi >= 0:
                sel = sel.with_pack(Z[zi])
            if induced_edge_count(g, sel) != s:
                raise InternalConsistencyError(f"recount mismatch for size {s}")
    final = SizeSet.from_values(certs, max_value=g.edge_count)
    return SizeFamily(raw, kept, q, gap, final, certs)


# -- orchestration ------------------------------------------------------------


@dataclass
class ConstructionWitness:
    l: float
    p: float
    U: Selection
    attempt: int
    u_seed: int
    d_prime: float
    d_dprime: float
    d: float
    mode: str
    A: list[VertexPack]
    S: list[VertexPack]
    T: list[VertexPack]
    Z: list[VertexPack]
    B: list[VertexPack]
    branch: str
    separation: int
    c2_effective: float
    family: QFamily
    diagnostics: ClaimDiagnostics
    prune: dict
    diversify: dict
    timings: dict
    transposed: bool  # input sides were swapped so that |X| <= |Y|
    params: ConstructionParams

    @property
    def W(self) -> list[VertexPack]:
        return self.S + self.T + self.Z

    def realise(self, k: int, i: int, z: int) -> Selection:
        """Selection (in the oriented graph) certifying one reported size."""
        sel = self.family.selection(self.U, k, i)
        return sel.with_pack(self.Z[z]) if z >= 0 else sel

    def to_json(self, family: Optional[SizeFamily] = None) -> dict:
        out = {
            "params": self.params.to_json(),
            "seed": self.params.seed,
            "u_seed": self.u_seed,
            "attempt": self.attempt,
            "l": self.l,
            "p": self.p,
            "transposed": self.transposed,
            "mode": self.mode,
            "d_prime": self.d_prime,
            "d_dprime": self.d_dprime,
            "d": self.d,
            "sizes": {"U": self.U.size(), "A": len(self.A), "S": len(self.S), "T": len(self.T),
                      "Z": len(self.Z), "B": len(self.B)},
            "branch": self.branch,
            "ladder": self.family.ladder,
            "sub_nominal": self.family.sub_nominal,
            "k_range": list(self.family.k_range),
            "i_max": self.family.i_max,
            "separation": self.separation,
            "c2_effective": self.c2_effective,
            "claims": asdict(self.diagnostics),
            "prune": self.prune,
            "diversify": self.diversify,
            "stage_timings": self.timings,
        }
        if family is not None:
            out["distinct_count"] = family.distinct_count
            out["thinning_step_q"] = family.q
            out["thinning_gap"] = family.gap
        return out


class PipelineFailure(ConstructionError):
    def __init__(self, stage: str, reason: str, attempts: int = 0, last: Optional[dict] = None):
        super().__init__(f"pipeline failed at {stage}: {reason}")
        self.stage = stage
        self.reason = reason
        self.attempts = attempts
        self.last = last or {}


@dataclass
class Structure:
    """Seed-independent part of the pipeline, reusable across l and U draws."""

    graph: BipartiteGraph
    d_prime: float
    mode: str
    d_dprime: float
    A: list[VertexPack]
    prune: dict
    diversify: dict
    timings: dict
    swapped: bool = False


def prepare_structure(g: BipartiteGraph, params: ConstructionParams) -> Structure:
    h = g.oriented()
    timings = {}
    t = time.perf_counter()
    d_prime, W = build_candidate_pairs(h)
    timings["candidate_pairs"] = time.perf_counter() - t
    t = time.perf_counter()
    pr = prune_non_diverse_pairs(h, W, params.gamma, params.delta)
    timings["prune"] = time.perf_counter() - t
    t = time.perf_counter()
    mode, L, d_dprime = star_or_matching(h, pr.kept, d_prime)
    timings["star_or_matching"] = time.perf_counter() - t
    t = time.perf_counter()
    A, div = diversify(h, L, params.gamma)
    div["independent"] = len(A)
    if params.A_cap is not None:
        # the size argument needs |A| = Theta(m/f^1.5); keep the first picks
        A = A[: max(1, math.ceil(params.A_cap * h.m / h.f**1.5))]
    timings["diversify"] = time.perf_counter() - t
    prune = {"candidates": len(W), "removed": pr.removed, "bound": pr.bound, "within_bound": pr.within_bound}
    div["L"] = len(L)
    return Structure(h, d_prime, mode, d_dprime, A, prune, div, timings, g.x_size > g.y_size)


def attempt_with_u(st: Structure, l: float, params: ConstructionParams, attempt: int,
                   u_seed: int, verify: bool = True):
    h = st.graph
    timings = dict(st.timings)
    t = time.perf_counter()
    U, p = sample_u(h, l, u_seed, params.c)
    diag = verify_claims(h, U, st.A, l, p, st.d_dprime, params)
    timings["claims"] = time.perf_counter() - t
    if not diag.all_ok:
        failed = [i + 1 for i, ok in enumerate(diag.ok) if not ok]
        raise StageFailure("verify_claims", f"claims {failed} failed", asdict(diag))
    t = time.perf_counter()
    sf = math.sqrt(h.f)
    RQ = [a for a in st.A
          if not any(U.y_mask >> i & 1 for i in a.indices)
          and abs(d_u(h, U, a) - p * st.d_dprime) <= diag.window_halfwidth]
    sp = split_and_order(h, U, RQ)
    timings["split_and_order"] = time.perf_counter() - t
    t = time.perf_counter()
    fam = build_q_family(h, U, sp.S, sp.T, params)
    timings["build_q_family"] = time.perf_counter() - t
    t = time.perf_counter()
    d = p * st.d_dprime
    sizes = enumerate_sizes(h, U, fam, sp.Z, d, params, verify=verify)
    timings["enumerate_sizes"] = time.perf_counter() - t
    if not sizes.kept:
        raise StageFailure("enumerate_sizes", "no index survives the separation filter")
    c2_eff = min(params.c2, sp.separation / (8 * sf))
    wit = ConstructionWitness(l, p, U, attempt, u_seed, st.d_prime, st.d_dprime, d, st.mode, st.A,
                              sp.S, sp.T, sp.Z, sp.B, sp.branch, sp.separation, c2_eff, fam, diag,
                              st.prune, st.diversify, timings, st.swapped, params)
    return wit, sizes


def run_pipeline(g: BipartiteGraph, l: float, params: ConstructionParams,
                 structure: Optional[Structure] = None, verify: bool = True):
    """Full construction for one target l, resampling U on post-core failures.

    Returns (ConstructionWitness, SizeFamily). Structural failures (before U)
    are raised immediately; otherwise up to ``params.retries`` extra draws.
    """
    try:
        st = structure or prepare_structure(g, params)
    except StageFailure as e:
        raise PipelineFailure(e.stage, e.reason, 0, e.diagnostics) from e
    last = None
    for attempt in range(params.retries + 1):
        u_seed = sub_seed(params.seed, attempt)
        try:
            return attempt_with_u(st, l, params, attempt, u_seed, verify=verify)
        except StageFailure as e:
            last = e
    raise PipelineFailure(last.stage, f"retries exhausted ({last.reason})", params.retries + 1,
                          last.diagnostics)


@dataclass
class HarnessResult:
    sizes: SizeSet
    runs: list[dict]
    failed: int
    witnesses: list = field(default_factory=list)
    families: list = field(default_factory=list)

    @property
    def distinct_count(self) -> int:
        return self.sizes.cardinality

    def coverage(self, window: int) -> list[tuple[int, int]]:
        return interval_coverage(self.sizes, window)


def l_range(g: BipartiteGraph, params: ConstructionParams) -> tuple[float, float]:
    m = g.m
    return params.c * m, 2 * params.c * m


def default_l(g: BipartiteGraph, params: ConstructionParams) -> float:
    """Upper end of the l range: the largest p, hence the widest spread of d_U."""
    return l_range(g, params)[1]


def theorem_harness(g: BipartiteGraph, params: ConstructionParams, verify: bool = True) -> HarnessResult:
    """Union of size families over a spread of l in [c*m, 2c*m].

    Consecutive l values are spaced by a quarter of the previous run's size
    span (e(U) tracks 4l), and never by less than (c*m)/ceil(sqrt(f)).
    """
    lo, hi = l_range(g, params)
    min_step = lo / math.ceil(math.sqrt(g.f))
    try:
        st = prepare_structure(g, params)
    except StageFailure as e:
        return HarnessResult(SizeSet(g.edge_count, 0), [{"l": lo, "error": str(e)}], 1)
    total = 0
    runs, wits, fams = [], [], []
    failed = 0
    l = lo
    j = 0
    while l <= hi * (1 + 1e-12):
        run_params = ConstructionParams(**{**params.to_json(), "seed": sub_seed(params.seed, 1_000_003, j)})
        step = min_step
        try:
            wit, fam = run_pipeline(g, min(l, hi), run_params, structure=st, verify=verify)
            vals = fam.final_sizes.values()
            span = vals[-1] - vals[0] if vals else 0
            step = max(step, span / 4)
            total |= fam.final_sizes.bits
            runs.append({"l": l, "distinct": fam.distinct_count, "span": span, "attempt": wit.attempt})
            wits.append(wit)
            fams.append(fam)
        except PipelineFailure as e:
            failed += 1
            runs.append({"l": l, "error": str(e)})
        l += step
        j += 1
    return HarnessResult(SizeSet(g.edge_count, total), runs, failed, wits, fams)
