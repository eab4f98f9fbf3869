import itertools
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multidendro import (
    ClusterState,
    EmptyInput,
    FusionFallbackWarning,
    MethodSpec,
    PolicyUnavailable,
    ProximityMatrix,
    TooManySolutions,
    cluster_pair_group,
    cluster_variable_group,
    cophenetic_matrix,
    detect_reversals,
    enumerate_pair_group,
    fusion_value,
    internal,
    pg_distance,
    tie_groups,
    to_newick_extended,
    tree_equal,
)
from multidendro.tree import Leaf, MultivaluedTree


def condensed(square):
    n = len(square)
    return tuple(square[i][j] for i in range(n) for j in range(i + 1, n))


def matrix_from_square(square, labels=None, precision=None):
    n = len(square)
    labels = labels or tuple(f"x{i + 1}" for i in range(n))
    return ProximityMatrix(labels=tuple(labels), values=condensed(square),
                           precision=precision)


# ---- tie detection ----

def test_tie_groups_toy(toy):
    state = ClusterState.from_matrix(toy)
    low_raw, low_key, edges = state.shortest()
    assert low_raw == 2.0
    assert sorted(edges) == [(0, 1), (1, 2)]
    assert tie_groups(state, low_key) == ((0, 1, 2), (3,))


def test_tie_groups_many_components():
    # unit edges: 1-2, 3-4, 4-5, 3-5, 6-7, 7-8 (0 stays alone)
    unit = {(1, 2), (3, 4), (4, 5), (3, 5), (6, 7), (7, 8)}
    square = [[0.0] * 9 for _ in range(9)]
    for i in range(9):
        for j in range(i + 1, 9):
            square[i][j] = square[j][i] = 1.0 if (i, j) in unit else 5.0
    state = ClusterState.from_matrix(matrix_from_square(square))
    _, low_key, _ = state.shortest()
    assert tie_groups(state, low_key) == ((0,), (1, 2), (3, 4, 5), (6, 7, 8))


def test_tie_groups_respect_precision():
    square = [
        [0.0, 1.04, 9.0],
        [1.04, 0.0, 0.96],
        [9.0, 0.96, 0.0],
    ]
    # raw values differ, one-decimal comparison makes them tie at 1.0
    rounded = matrix_from_square(square, precision=1)
    state = ClusterState.from_matrix(rounded)
    low_raw, low_key, edges = state.shortest()
    assert low_key == 1.0
    assert low_raw == 0.96
    assert tie_groups(state, low_key) == ((0, 1, 2),)

    raw = matrix_from_square(square)
    state = ClusterState.from_matrix(raw)
    _, low_key, _ = state.shortest()
    assert tie_groups(state, low_key) == ((0,), (1, 2))


# ---- fusion values ----

TRIPLE_WITHIN = ((0.0, 2.0, 3.0), (2.0, 0.0, 4.0), (3.0, 4.0, 0.0))


def test_fusion_interval_policy_has_no_value():
    with pytest.raises(PolicyUnavailable):
        fusion_value((1, 1, 1), TRIPLE_WITHIN, MethodSpec("single"),
                     "interval")


def test_fusion_shortest_is_group_minimum():
    got = fusion_value((1, 1, 1), TRIPLE_WITHIN, MethodSpec("complete"),
                       "shortest")
    assert got == 2.0


@pytest.mark.parametrize("kind,expected", [
    ("single", 2.0),
    ("complete", 4.0),
    ("weighted_average", 3.0),
])
def test_fusion_natural_summaries(kind, expected):
    got = fusion_value((1, 1, 1), TRIPLE_WITHIN, MethodSpec(kind), "natural")
    assert got == expected


def test_fusion_natural_weights_by_size():
    got = fusion_value((1, 1, 2), TRIPLE_WITHIN,
                       MethodSpec("unweighted_average"), "natural")
    # (1*1*2 + 1*2*3 + 1*2*4) / (1 + 2 + 2)
    assert got == 16.0 / 5.0


def test_fusion_natural_falls_back_with_warning():
    with pytest.warns(FusionFallbackWarning):
        got = fusion_value((1, 1, 1), TRIPLE_WITHIN,
                           MethodSpec("unweighted_centroid"), "natural")
    assert got == 2.0


# ---- variable-group engine ----

def test_vg_toy_tree_and_trace(toy):
    tree, trace = cluster_variable_group(toy, "unweighted_average")
    want = "((x1,x2,x3)[2.000,4.000],x4)[5.000,5.000];"
    assert to_newick_extended(tree) == want

    assert trace.n_items == 4
    assert len(trace.iterations) == 2
    first, second = trace.iterations
    assert first.d_lower == 2.0
    assert first.d_next == 5.0
    assert first.reversal is False
    merged = first.groups[0]
    assert merged.member_ids == (0, 1, 2)
    assert merged.leaves == (0, 1, 2)
    assert (merged.h_lower, merged.h_upper) == (2.0, 4.0)
    passthrough = first.groups[1]
    assert passthrough.h_lower is None
    assert second.d_lower == 5.0
    assert second.d_next is None


def test_vg_natural_fusion_toy(toy):
    tree, _ = cluster_variable_group(toy, "unweighted_average",
                                     policy="natural")
    root_child = tree.root.children[0]
    assert root_child.fusion == 8.0 / 3.0
    assert tree.root.fusion == 5.0


def test_vg_shortest_fusion_toy(toy):
    tree, _ = cluster_variable_group(toy, "unweighted_average",
                                     policy="shortest")
    assert tree.root.children[0].fusion == 2.0


def test_vg_natural_fallback_notes_once(toy):
    with warnings.catch_warnings():
        warnings.simplefilter("error")  # no warning may escape
        tree, trace = cluster_variable_group(toy, "unweighted_centroid",
                                             policy="natural")
    assert any("shortest" in note for note in trace.notes)
    assert len(trace.notes) == 1
    node = tree.root.children[0]
    assert node.fusion == node.h_lower


@pytest.mark.filterwarnings("ignore::multidendro.ZeroDistanceWarning")
def test_vg_d_next_chains_to_next_d_lower():
    rng = np.random.default_rng(7)
    for _ in range(10):
        n = int(rng.integers(4, 10))
        pts = rng.integers(0, 6, size=(n, 2)).astype(float)
        square = np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1))
        matrix = matrix_from_square(square.tolist(), precision=1)
        _, trace = cluster_variable_group(matrix, "single")
        for here, there in itertools.pairwise(trace.iterations):
            assert here.d_next == there.d_lower
        assert trace.iterations[-1].d_next is None


def test_vg_empty_and_singleton():
    with pytest.raises(EmptyInput):
        cluster_variable_group(ProximityMatrix(labels=(), values=()),
                               "single")
    one = ProximityMatrix(labels=("only",), values=())
    tree, trace = cluster_variable_group(one, "single")
    assert tree.labels == ("only",)
    assert tree.root.is_leaf
    assert trace.iterations == ()


def test_vg_two_items():
    two = matrix_from_square([[0.0, 3.0], [3.0, 0.0]], labels=("a", "b"))
    tree, trace = cluster_variable_group(two, "complete")
    assert to_newick_extended(tree) == "(a,b)[3.000,3.000];"
    assert trace.iterations[0].d_lower == 3.0


def test_vg_reversal_flagged_on_toy_single(toy):
    tree, trace = cluster_variable_group(toy, "single", policy="shortest")
    assert trace.iterations[-1].reversal is True
    reports = detect_reversals(trace)
    kinds = sorted(r.kind for r in reports)
    assert "interval" in kinds
    hit = next(r for r in reports if r.kind == "interval")
    assert hit.child == ("x1", "x2", "x3")
    assert hit.child_value == 4.0
    assert hit.parent_value == 3.0
    # the finished tree shows the same inversion
    tree_reports = detect_reversals(tree)
    assert any(r.kind == "interval" for r in tree_reports)


def is_tie_free(trace):
    """True when every iteration merged exactly one pair."""
    for it in trace.iterations:
        multi = [g for g in it.groups if len(g.member_ids) > 1]
        if len(multi) != 1 or len(multi[0].member_ids) != 2:
            return False
    return True


def test_vg_without_ties_matches_pair_group():
    rng = np.random.default_rng(21)
    for _ in range(5):
        n = int(rng.integers(4, 9))
        pts = rng.uniform(0, 10, size=(n, 3))
        square = np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1))
        matrix = matrix_from_square(square.tolist())
        for kind in ("single", "complete", "unweighted_average"):
            vg, trace = cluster_variable_group(matrix, kind)
            assert is_tie_free(trace)  # continuous draws should never tie
            pg = cluster_pair_group(matrix, kind)
            assert tree_equal(vg, pg)


# ---- pair-group engine ----

def test_pg_first_and_last_goldens(toy):
    first = cluster_pair_group(toy, "unweighted_average", tiebreak="first")
    want_first = ("((x1,x2)[2.000,2.000],(x3,x4)[3.000,3.000])"
                  "[4.500,4.500];")
    assert to_newick_extended(first) == want_first

    last = cluster_pair_group(toy, "unweighted_average", tiebreak="last")
    want_last = ("((x1,(x2,x3)[2.000,2.000])[3.000,3.000],x4)"
                 "[5.000,5.000];")
    assert to_newick_extended(last) == want_last


def test_pg_trees_are_binary_and_valued(toy):
    tree = cluster_pair_group(toy, "unweighted_average")
    assert tree.is_valued
    for node in tree.internal_nodes():
        assert len(node.children) == 2
        assert node.fusion == node.h_lower == node.h_upper


def test_pg_random_needs_seedable_rule(toy):
    a = cluster_pair_group(toy, "unweighted_average", tiebreak="random",
                           seed=5)
    b = cluster_pair_group(toy, "unweighted_average", tiebreak="random",
                           seed=5)
    assert tree_equal(a, b)
    newicks = {to_newick_extended(t) for t in
               enumerate_pair_group(toy, "unweighted_average")}
    for seed in range(8):
        got = cluster_pair_group(toy, "unweighted_average",
                                 tiebreak="random", seed=seed)
        assert to_newick_extended(got) in newicks


# ---- enumeration ----

def test_enumerate_toy_has_three_outcomes(toy):
    trees = enumerate_pair_group(toy, "unweighted_average")
    texts = [to_newick_extended(t) for t in trees]
    assert texts == [
        "(((x1,x2)[2.000,2.000],x3)[3.000,3.000],x4)[5.000,5.000];",
        "((x1,(x2,x3)[2.000,2.000])[3.000,3.000],x4)[5.000,5.000];",
        "((x1,x2)[2.000,2.000],(x3,x4)[3.000,3.000])[4.500,4.500];",
    ]
    assert texts == sorted(texts)


def test_enumerate_collapses_commuting_merges():
    square = [
        [0.0, 1.0, 9.0, 9.0],
        [1.0, 0.0, 9.0, 9.0],
        [9.0, 9.0, 0.0, 1.0],
        [9.0, 9.0, 1.0, 0.0],
    ]
    trees = enumerate_pair_group(matrix_from_square(square),
                                 "unweighted_average")
    assert len(trees) == 1
    want = "((x1,x2)[1.000,1.000],(x3,x4)[1.000,1.000])[9.000,9.000];"
    assert to_newick_extended(trees[0]) == want


def test_enumerate_limit_guard():
    n = 7
    square = [[0.0 if i == j else 1.0 for j in range(n)] for i in range(n)]
    with pytest.raises(TooManySolutions):
        enumerate_pair_group(matrix_from_square(square),
                             "unweighted_average", limit=5)


def brute_force_outcomes(matrix, kind):
    """Reference enumeration: plain recursion, no memo, no early collapse."""
    method = MethodSpec(kind)
    n = matrix.n
    init = {}
    for i, j, v in matrix.pairs():
        init[(i, j)] = v
    seen = {}

    def look(table, a, b):
        return table[(a, b) if a < b else (b, a)]

    def rec(nodes, sizes, table):
        if len(nodes) == 1:
            (node,) = nodes.values()
            tree = MultivaluedTree(root=node, labels=matrix.labels)
            seen[to_newick_extended(tree)] = tree
            return
        low = min(table.values())
        ties = [pair for pair, v in table.items() if v == low]
        for a, b in ties:
            d = look(table, a, b)
            merged = internal((nodes[a], nodes[b]), d, d, fusion=d)
            keep = [c for c in nodes if c not in (a, b)]
            nodes2 = {c: nodes[c] for c in keep}
            sizes2 = {c: sizes[c] for c in keep}
            new = max(nodes) + 1
            nodes2[new] = merged
            sizes2[new] = sizes[a] + sizes[b]
            table2 = {}
            for c1, c2 in itertools.combinations(sorted(keep), 2):
                table2[(c1, c2)] = look(table, c1, c2)
            for c in keep:
                table2[(c, new)] = pg_distance(
                    method, (sizes[a], sizes[b], sizes[c]),
                    d, look(table, a, c), look(table, b, c))
            rec(nodes2, sizes2, table2)

    rec({i: Leaf(i, matrix.labels[i]) for i in range(n)},
        {i: 1 for i in range(n)}, init)
    return tuple(sorted(seen))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10 ** 6),
       kind=st.sampled_from(["single", "complete", "unweighted_average",
                             "weighted_average"]))
def test_enumerate_matches_brute_force(seed, kind):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 7))
    square = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            square[i][j] = square[j][i] = float(rng.integers(1, 5))
    matrix = matrix_from_square(square.tolist())
    got = tuple(to_newick_extended(t)
                for t in enumerate_pair_group(matrix, kind, limit=200000))
    assert got == brute_force_outcomes(matrix, kind)


def test_enumerated_outcomes_share_leaf_set(toy):
    for tree in enumerate_pair_group(toy, "single"):
        assert tree.labels == ("x1", "x2", "x3", "x4")
        coph = cophenetic_matrix(tree)
        assert coph.n == 4
