import itertools
import json
import math

import numpy as np
import pytest

from bipramsey.construction import (ConstructionParams, InternalConsistencyError, ParameterError,
                                    PipelineFailure, StageFailure, build_candidate_pairs, build_q_family,
                                    d_u, default_l, diversify, enumerate_sizes, greedy_matching, l_range,
                                    prepare_structure, prune_non_diverse_pairs, run_pipeline, sample_u,
                                    split_and_order, star_or_matching, theorem_harness, verify_claims)
from bipramsey.graph import (BipartiteGraph, Selection, VertexPack, Y, build_graph, complete_bipartite,
                             induced_edge_count, pack_symdiff_size, random_bipartite, sub_seed)


def recount(g: BipartiteGraph, sel: Selection) -> int:
    a = g.to_array().astype(int)
    xi = [i for i in range(g.x_size) if sel.x_mask >> i & 1]
    yi = [j for j in range(g.y_size) if sel.y_mask >> j & 1]
    return int(a[np.ix_(xi, yi)].sum())


@pytest.fixture(scope="module")
def params():
    return ConstructionParams.defaults()


@pytest.fixture(scope="module")
def g64():
    return random_bipartite(64, 64, 0.5, sub_seed(7, 3))


def test_params_defaults():
    p = ConstructionParams.defaults()
    assert p.delta == pytest.approx(p.alpha / 5)
    assert p.eps == pytest.approx(4 * p.gamma)
    assert ConstructionParams.defaults(K1=2.0).K1 == 2.0
    with pytest.raises(ParameterError):
        ConstructionParams(c=0)


# -- sample_u


def test_sample_u_rejects_boundary_p(g64):
    with pytest.raises(ParameterError, match="p < 0.1"):
        sample_u(g64, g64.edge_count / 400, 0)
    with pytest.raises(ParameterError, match="p > 0"):
        sample_u(g64, 0, 0)


def test_sample_u_l_range(g64, params):
    lo, hi = l_range(g64, params)
    with pytest.raises(ParameterError, match="outside"):
        sample_u(g64, hi * 1.01, 0, params.c)
    sample_u(g64, lo, 0, params.c)


def test_sample_u_mean_and_determinism(g64):
    l = 0.05**2 * g64.edge_count / 4
    sizes = []
    for s in range(1000):
        U, p = sample_u(g64, l, s)
        sizes.append(U.size())
    assert p == pytest.approx(0.05)
    # sd of the mean is about 0.087
    assert abs(np.mean(sizes) - 0.05 * 128) < 0.35
    assert sample_u(g64, l, 9) == sample_u(g64, l, 9)


# -- candidate pairs and pruning


@pytest.mark.parametrize("n", [4, 6, 9])
def test_candidate_pairs_complete(n):
    d, W = build_candidate_pairs(complete_bipartite(n, n))
    assert len(W) == math.comb(n, 2)
    assert abs(d - 2 * n) <= math.ceil(math.sqrt(n)) / 2


def test_candidate_pairs_histogram_oracle():
    for s in range(10):
        g = random_bipartite(16, 16, 0.5, sub_seed(9, s))
        w = math.ceil(math.sqrt(g.f))
        deg = g.y_degrees()
        buckets = {}
        for a, b in itertools.combinations(range(16), 2):
            buckets.setdefault((deg[a] + deg[b]) // w, []).append((a, b))
        best = min(buckets, key=lambda k: (-len(buckets[k]), k))
        d, W = build_candidate_pairs(g)
        assert sorted(W) == sorted(buckets[best])
        assert best * w <= d < (best + 1) * w


def test_candidate_pairs_tie_lowest():
    # degrees 0,0,2,2: sums 0 (1 pair), 2 (4 pairs), 4 (1 pair); width 2 makes 2 and 3 one bucket
    g = build_graph(2, 4, [(0, 2), (1, 2), (0, 3), (1, 3)])
    d, W = build_candidate_pairs(g)
    assert sorted(W) == [(0, 2), (0, 3), (1, 2), (1, 3)]
    # all four degree sums equal -> one bucket at the bottom
    h = build_graph(2, 4, [])
    assert build_candidate_pairs(h)[0] == 0.5


def test_candidate_pairs_small():
    with pytest.raises(StageFailure):
        build_candidate_pairs(complete_bipartite(3, 3))


def test_prune_complete_fails():
    g = complete_bipartite(6, 6)
    _, W = build_candidate_pairs(g)
    with pytest.raises(StageFailure) as e:
        prune_non_diverse_pairs(g, W, 0.1)
    assert e.value.stage == "prune_non_diverse_pairs"


def test_prune_complementary_rows_keeps_everything():
    # Y-vertices j and j+4 have complementary neighbourhoods over X
    edges = [(i, j) for j in range(4) for i in range(8) if (i >> (j % 3)) & 1]
    edges += [(i, j + 4) for j in range(4) for i in range(8) if not (i >> (j % 3)) & 1]
    g = build_graph(8, 8, edges)
    W = [(j, j + 4) for j in range(4)]
    res = prune_non_diverse_pairs(g, W, 0.1)
    assert res.kept == W and res.removed == 0


def test_prune_removed_within_bound_on_ramsey_graphs(params):
    for s in range(10):
        g = random_bipartite(64, 64, 0.5, sub_seed(10, s))
        _, W = build_candidate_pairs(g)
        res = prune_non_diverse_pairs(g, W, params.gamma, params.delta)
        assert res.within_bound


# -- star or matching


def test_star_mode():
    g = random_bipartite(8, 8, 0.5, 1)
    W = [(0, j) for j in range(1, 6)]
    mode, L, dd = star_or_matching(g, W, 10.0)
    assert mode == "star" and len(L) == 5
    assert dd == 10.0 - g.y_degrees()[0]


def test_matching_mode():
    g = random_bipartite(8, 8, 0.5, 1)
    W = [(0, 1), (2, 3), (4, 5), (6, 7)]
    mode, L, dd = star_or_matching(g, W, 10.0)
    assert mode == "matching" and [p.indices for p in L] == W and dd == 10.0


def test_star_or_matching_size_bound():
    rng = np.random.default_rng(3)
    g = random_bipartite(4, 30, 0.5, 0)
    for _ in range(20):
        pairs = [p for p in itertools.combinations(range(30), 2) if rng.random() < 0.05]
        if not pairs:
            continue
        deg = np.bincount(np.array(pairs).ravel(), minlength=30)
        _, L, _ = star_or_matching(g, pairs, 0.0)
        assert len(L) >= len(pairs) / (2 * deg.max())
        m = greedy_matching(pairs)
        assert len({v for p in m for v in p}) == 2 * len(m)


# -- diversify


def test_diversify_keeps_distinct():
    g = build_graph(8, 3, [(i, 0) for i in range(0, 4)] + [(i, 1) for i in range(4, 8)] + [(0, 2), (7, 2)])
    L = [VertexPack.of(Y, 0), VertexPack.of(Y, 1)]
    A, _ = diversify(g, L, 0.4)
    assert A == L


def test_diversify_identical_collapses():
    g = build_graph(4, 5, [(i, j) for i in range(2) for j in range(5)])
    L = [VertexPack.of(Y, j) for j in range(5)]
    A, _ = diversify(g, L, 0.2)
    assert len(A) == 1


def test_diversify_turan_and_independence():
    for s in range(100):
        g = random_bipartite(12, 14, 0.5, sub_seed(11, s))
        L = [VertexPack.of(Y, j) for j in range(14)]
        A, info = diversify(g, L, 0.3)
        assert len(A) >= max(info["turan_by_degree"], info["turan_by_edges"])
        for a, b in itertools.combinations(A, 2):
            assert pack_symdiff_size(g, a, b) >= 4 * 0.09 * 12


# -- claims


def test_claim1_exact_with_full_u(g64, params):
    st = prepare_structure(g64, params)
    U = Selection.full(g64)
    d = verify_claims(g64, U, st.A, g64.edge_count / 4, 1.0, st.d_dprime, params)
    assert d.edge_deviation == 0 and d.ok[0]


def test_claims_vacuous_for_single_pack(g64, params):
    U, p = sample_u(g64, default_l(g64, params), 1, params.c)
    d = verify_claims(g64, U, [VertexPack.of(Y, 0)], default_l(g64, params), p, 30.0, params)
    assert d.min_symdiff is None and d.equal_pairs == 0 and d.ok[3] and d.ok[4]


def test_claims_are_pure(g64, params):
    st = prepare_structure(g64, params)
    l = default_l(g64, params)
    U, p = sample_u(g64, l, 5, params.c)
    a = verify_claims(g64, U, st.A, l, p, st.d_dprime, params)
    b = verify_claims(g64, U, st.A, l, p, st.d_dprime, params)
    assert a == b


# -- split


def _degree_graph(degrees):
    """Y-vertex j adjacent to the first degrees[j] X-vertices; U = all of X."""
    n = max(degrees) + 1
    g = build_graph(n, len(degrees), [(i, j) for j, d in enumerate(degrees) for i in range(d)])
    return g, Selection((1 << n) - 1, 0)


def test_split_all_distinct_h():
    # H takes even positions: degrees 1..6, P takes odd positions
    degrees = [1, 9, 2, 9, 3, 8, 4, 7, 5, 7, 6, 6]
    g, U = _degree_graph(degrees)
    RQ = [VertexPack.of(Y, j) for j in range(12)]
    sp = split_and_order(g, U, RQ)
    assert [p.indices[0] for p in sp.B] == [0, 2, 4, 6, 8, 10]
    assert sp.branch == "T-large"
    assert [d_u(g, U, p) for p in sp.T] == [4, 5, 6]
    assert [d_u(g, U, p) for p in sp.S] == [1, 2]
    assert sp.separation == 2 >= len(sp.B) / 6
    zd = [d_u(g, U, p) for p in sp.Z]
    assert len(set(zd)) == len(zd) == 4


def test_split_s_large_branch():
    # low degrees have same-degree company in H, high ones do not
    h_deg = [1, 2, 3, 4, 5, 6, 1, 1, 2]
    degrees = []
    for d in h_deg:
        degrees += [d, 3]
    g, U = _degree_graph(degrees)
    RQ = [VertexPack.of(Y, j) for j in range(len(degrees))]
    sp = split_and_order(g, U, RQ)
    assert sp.branch == "S-large"
    assert sorted(d_u(g, U, p) for p in sp.S) == [1, 1, 1, 2, 2, 3]
    assert [d_u(g, U, p) for p in sp.T] == [5, 6]


def test_split_too_few():
    g, U = _degree_graph([1, 1, 2, 2, 3, 3, 4, 4, 5, 5])
    with pytest.raises(StageFailure, match="< 6"):
        split_and_order(g, U, [VertexPack.of(Y, j) for j in range(10)])


# -- ladder and sizes


@pytest.fixture(scope="module")
def run64(g64, params):
    return run_pipeline(g64, default_l(g64, params), params)


def test_q_family_definition(g64, run64):
    wit, fam = run64
    q = wit.family
    U = wit.U
    k = q.k_range[0]
    sel = q.selection(U, k, 0)
    expect = U
    for p in q.base[:k]:
        expect = expect.with_pack(p)
    assert sel == expect
    i = min(q.i_max, len(q.swap))
    sel = q.selection(U, i, i)
    expect = U
    for p in q.swap[:i]:
        expect = expect.with_pack(p)
    assert sel == expect


def test_incremental_bookkeeping(g64, params):
    for s in range(20):
        p = ConstructionParams(**{**params.to_json(), "seed": s})
        try:
            wit, fam = run_pipeline(g64, default_l(g64, p), p)
        except PipelineFailure:
            continue
        for k, i, e in fam.raw:
            assert recount(g64, wit.family.selection(wit.U, k, i)) == e


def test_sizes_certified_and_distinct(g64, run64):
    wit, fam = run64
    assert fam.distinct_count == len(fam.certificates)
    for s, (k, i, z) in fam.certificates.items():
        assert recount(g64, wit.realise(k, i, z)) == s


def test_witness_invariants(g64, run64, params):
    wit, _ = run64
    ys = [p.indices for p in wit.S + wit.T + wit.Z]
    flat = [v for t in ys for v in t]
    assert len(flat) == len(set(flat))
    assert all(p.side == Y for p in wit.W)
    assert not any(wit.U.y_mask >> v & 1 for v in flat)
    zd = [d_u(g64, wit.U, z) for z in wit.Z]
    assert len(zd) == len(set(zd))
    lo = max(d_u(g64, wit.U, p) for p in wit.S)
    hi = min(d_u(g64, wit.U, p) for p in wit.T)
    assert hi - lo >= len(wit.B) / 6
    assert hi - lo >= 8 * params.c2 * math.sqrt(g64.f)


def test_thinning_gap(g64, run64):
    wit, fam = run64
    bases = [e for _, _, e in fam.kept]
    assert all(b - a > fam.gap for a, b in zip(bases, bases[1:]))


def test_monotone_ladder(g64, run64):
    wit, fam = run64
    q = wit.family
    if all(d > 0 for d in q.base_deg):
        e0 = {k: e for k, i, e in fam.raw if i == 0}
        ks = sorted(e0)
        assert all(e0[b] > e0[a] for a, b in zip(ks, ks[1:]))


def test_enumerate_without_z(g64, run64, params):
    wit, _ = run64
    fam = enumerate_sizes(g64, wit.U, wit.family, [], wit.d, params)
    assert set(fam.final_sizes.values()) == {e for _, _, e in fam.kept}
    assert fam.q == 1


def test_enumerate_detects_collisions(g64, run64, params):
    wit, _ = run64
    # duplicating a Z-pack forces a repeated size
    with pytest.raises(InternalConsistencyError):
        enumerate_sizes(g64, wit.U, wit.family, wit.Z + wit.Z[:1], wit.d, params)


def test_pipeline_deterministic(g64, params):
    a = run_pipeline(g64, default_l(g64, params), params)
    b = run_pipeline(g64, default_l(g64, params), params)
    assert a[1].final_sizes == b[1].final_sizes
    assert a[0].to_json(a[1])["u_seed"] == b[0].to_json(b[1])["u_seed"]


def test_pipeline_complete_graph_fails_at_prune(params):
    with pytest.raises(PipelineFailure) as e:
        run_pipeline(complete_bipartite(10, 10), 0.05, params)
    assert e.value.stage == "prune_non_diverse_pairs"


def test_witness_json(g64, run64):
    wit, fam = run64
    d = json.loads(json.dumps(wit.to_json(fam)))
    for key in ("params", "seed", "stage_timings", "claims", "sizes", "distinct_count", "thinning_step_q"):
        assert key in d
    assert d["sizes"]["S"] == len(wit.S) and d["distinct_count"] == fam.distinct_count


def test_transposed_input_is_oriented(params):
    g = random_bipartite(60, 64, 0.5, 4)
    tall = g.transpose()
    assert prepare_structure(tall, params).graph == g
    assert not prepare_structure(g, params).swapped
    wit, fam = run_pipeline(tall, default_l(g, params), params)
    assert wit.transposed
    for s, (k, i, z) in fam.certificates.items():
        assert induced_edge_count(g, wit.realise(k, i, z)) == s


def test_harness_union(g64, params):
    res = theorem_harness(g64, params)
    assert res.failed < len(res.runs)
    assert res.distinct_count >= max(f.distinct_count for f in res.families)
    for wit, fam in zip(res.witnesses, res.families):
        assert fam.final_sizes.issubset(res.sizes)
        for s, (k, i, z) in fam.certificates.items():
            assert recount(g64, wit.realise(k, i, z)) == s
    lo, hi = l_range(g64, params)
    assert all(lo <= r["l"] <= hi * (1 + 1e-9) for r in res.runs)
