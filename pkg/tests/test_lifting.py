import itertools

import pytest

from cspdigraph import lifting
from cspdigraph.builder import build_digraph
from cspdigraph.errors import (
    ArityMismatch,
    NotAPolymorphism,
    NotEndomorphism,
    ShapeViolation,
    ZigzagWitnessFails,
)
from cspdigraph.identities import (
    Identity,
    IdentitySet,
    OpTable,
    Term,
    majority_identities,
    maltsev_identities,
    wnu_identities,
)
from cspdigraph.lifting import (
    classify,
    delta_bfs,
    in_delta,
    lift_all,
    lift_endomorphism,
    lift_op,
    order_key,
    order_less,
    restrict_endomorphism,
    zigzag,
    zz_allmin,
    zz_join,
    zz_median,
    zz_meet,
    zz_p1,
    zz_p2,
)
from cspdigraph.solver import endomorphisms, enumerate_homs, is_hom, is_polymorphism

Z = {"00": 0, "01": 1, "10": 2, "11": 3}


def _maj_bool():
    return OpTable(
        "maj", 3, 2, tuple(sorted(t)[1] for t in itertools.product(range(2), repeat=3))
    )


def _xor3():
    return OpTable(
        "xor3", 3, 2,
        tuple((a + b + c) % 2 for a, b, c in itertools.product(range(2), repeat=3)),
    )


# ---------------------------------------------------------------------------
# Zigzag witnesses


def test_median_values():
    med = zz_median()
    assert med((Z["00"], Z["01"], Z["10"])) == Z["01"]
    assert med((Z["11"], Z["01"], Z["11"])) == Z["11"]


def test_p1_case_split():
    p1 = zz_p1()
    for x, y in itertools.product(range(4), repeat=2):
        assert p1((x, y, y)) == x
    assert p1((Z["01"], Z["00"], Z["11"])) == Z["01"]
    assert p1((Z["00"], Z["10"], Z["11"])) == Z["10"]


def test_p2_case_split():
    p2 = zz_p2()
    for x, y in itertools.product(range(4), repeat=2):
        assert p2((x, x, y)) == y
    assert p2((Z["00"], Z["11"], Z["00"])) == Z["00"]


def test_allmin_is_minimum():
    assert zz_allmin(3)((Z["10"], Z["11"], Z["01"])) == Z["01"]


def test_meet_join_form_a_lattice():
    meet, join = zz_meet(), zz_join()
    for x, y in itertools.product(range(4), repeat=2):
        assert meet((x, y)) == min(x, y)
        assert join((x, y)) == max(x, y)


def test_witnesses_preserve_the_degree_classes():
    for op in (zz_meet(), zz_join(), zz_median(), zz_allmin(3), zz_p1(), zz_p2()):
        assert lifting.zigzag_witness_problem(op) is None


def test_permutability_identities_hold_everywhere():
    p1, p2 = zz_p1(), zz_p2()
    for x, y in itertools.product(range(4), repeat=2):
        assert p1((x, y, y)) == x
        assert p2((x, x, y)) == y
        assert p1((x, x, y)) == p2((x, y, y))


# ---------------------------------------------------------------------------
# Orders


def test_orders_are_strict_and_total(two_cycle):
    meta = build_digraph(two_cycle)
    n = len(meta.digraph.vertices)
    for variant in ("ar", "ra"):
        key = order_key(meta, variant)
        keys = [key(v) for v in range(n)]
        assert len(set(keys)) == n
        for x, y in itertools.product(range(n), repeat=2):
            assert order_less(meta, x, y, variant) == (key(x) < key(y))


def test_level_decides_across_categories(two_cycle):
    meta = build_digraph(two_cycle)
    level2 = next(v for v in range(len(meta.lvl)) if meta.lvl[v] == 2)
    assert order_less(meta, meta.elem_vid[0], level2)
    assert order_less(meta, level2, meta.tuple_vid[(0, 1)])


def test_same_path_orders_by_distance_from_the_element(two_cycle):
    meta = build_digraph(two_cycle)
    e = (0, (1, 0))  # all-zigzag connecting path of the two-cycle
    vids = meta.path_vids[e]
    spec = meta.path_specs[e]
    assert spec.singles == {2}
    seg = meta.segment_vids(e, 1)  # zigzag: two level-1 vertices
    assert meta.lvl[seg[0]] == 1 and meta.lvl[seg[2]] == 1
    assert order_less(meta, seg[0], seg[2])


def test_variants_disagree_on_some_pair(two_cycle):
    meta = build_digraph(two_cycle)
    n = len(meta.digraph.vertices)
    disagree = [
        (x, y)
        for x, y in itertools.product(range(n), repeat=2)
        if order_less(meta, x, y, "ar") != order_less(meta, x, y, "ra")
    ]
    assert disagree
    x, y = disagree[0]
    assert meta.lvl[x] == meta.lvl[y]
    assert meta.v_path[x] != meta.v_path[y]


# ---------------------------------------------------------------------------
# The diagonal component


def test_diagonal_and_mixed_levels(two_cycle):
    meta = build_digraph(two_cycle)
    for v in range(len(meta.digraph.vertices)):
        assert in_delta(meta, (v, v))
    a = meta.elem_vid[0]
    r = meta.tuple_vid[(0, 1)]
    assert not in_delta(meta, (a, r))
    assert in_delta(meta, (meta.elem_vid[0], meta.elem_vid[1]))


def test_in_delta_matches_explicit_search(two_cycle, edge_template, unit_template):
    for template in (two_cycle, edge_template, unit_template):
        meta = build_digraph(template)
        oracle = delta_bfs(meta, 2)
        n = len(meta.digraph.vertices)
        for u, v in itertools.product(range(n), repeat=2):
            if meta.lvl[u] == meta.lvl[v]:
                assert in_delta(meta, (u, v)) == ((u, v) in oracle)


def test_peak_and_source_on_one_path_are_isolated(parity4):
    """Same level, same path, but no shared direction: a singleton component."""
    meta = build_digraph(parity4)
    e = (0, (0, 1, 1, 1))  # single edge only at position 1: zigzags at 2,3,4
    assert meta.path_specs[e].singles == {1}
    seg2 = meta.segment_vids(e, 2)
    seg3 = meta.segment_vids(e, 3)
    peak = seg2[1]   # level 3, no outgoing edge
    mid = seg3[2]    # level 3, no incoming edge
    assert meta.lvl[peak] == meta.lvl[mid] == 3
    pair = (peak, mid)
    assert not in_delta(meta, pair)
    assert pair not in delta_bfs(meta, 2)


# ---------------------------------------------------------------------------
# Classification


def test_classify_cases(two_cycle):
    meta = build_digraph(two_cycle)
    maj = _maj_bool()
    a0, a1 = meta.elem_vid
    r0 = meta.tuple_vid[(0, 1)]
    assert classify(meta, (a0, a1, a0), maj).tag == "1a"
    assert classify(meta, (r0, r0, r0), maj).tag == "1b"
    # three distinct levels
    lvl1 = next(v for v in range(len(meta.lvl)) if meta.lvl[v] == 1)
    lvl2 = next(v for v in range(len(meta.lvl)) if meta.lvl[v] == 2)
    lvl3 = next(v for v in range(len(meta.lvl)) if meta.lvl[v] == 3)
    assert classify(meta, (lvl1, lvl2, lvl3), maj).tag == "3c"
    assert classify(meta, (a0, lvl1, a0), maj).tag == "3b"


def test_classify_case2_on_one_path(two_cycle):
    meta = build_digraph(two_cycle)
    maj = _maj_bool()
    e = (0, (1, 0))
    seg = meta.segment_vids(e, 1)
    case = classify(meta, (seg[0], seg[2], seg[0]), maj)
    assert case.tag in ("2b", "2c")
    assert case.l == 1


def test_classify_3a_needs_two_paths_same_level(two_cycle):
    meta = build_digraph(two_cycle)
    maj = _maj_bool()
    e1, e2 = (0, (0, 1)), (0, (1, 0))
    assert meta.path_specs[e1].singles == {1}
    assert meta.path_specs[e2].singles == {2}
    peak = meta.segment_vids(e2, 1)[1]  # level 2, incoming edges only
    mid = meta.segment_vids(e1, 2)[2]   # level 2, outgoing edges only
    tup = (peak, mid, peak)
    assert not in_delta(meta, tup)
    assert classify(meta, tup, maj).tag == "3a"


def test_case2c_agrees_with_zigzag_minimum(two_cycle):
    """Picking the order-least candidate equals mapping the zigzag minimum back."""
    meta = build_digraph(two_cycle)
    maj = _maj_bool()
    op = lift_op(meta, maj, zz_median())
    n = len(meta.digraph.vertices)
    seen = 0
    for c in itertools.product(range(n), repeat=2):
        pair = (c[0], c[1], c[0])
        case = classify(meta, pair, maj)
        if case.tag != "2c":
            continue
        seen += 1
        seg = meta.segment_vids(case.e, case.l)
        offsets = [
            op._segment_offset(v, ei, case.l) if zig else None
            for v, ei, zig in zip(pair, case.paths, case.labels)
        ]
        z_min = min(o for o in offsets if o is not None)
        assert op(pair) == seg[z_min]
    assert seen > 0


# ---------------------------------------------------------------------------
# Lifting


def test_lift_restricted_to_elements_is_the_original(edge_template):
    meta = build_digraph(edge_template)
    op = lift_op(meta, _maj_bool(), zz_median())
    for t in itertools.product(range(2), repeat=3):
        got = op(tuple(meta.elem_vid[x] for x in t))
        assert got == meta.elem_vid[_maj_bool()(t)]


def test_lift_majority_on_single_edge_template(edge_template):
    meta = build_digraph(edge_template)
    report = lift_all(meta, majority_identities(), {"m": _maj_bool()})
    assert report.ok


def test_lift_permutability_on_single_edge_template(edge_template):
    from cspdigraph.identities import perm3_identities
    from cspdigraph.solver import find_operations

    sigma = perm3_identities()
    found = find_operations(edge_template, sigma)
    assert found is not None
    report = lift_all(meta := build_digraph(edge_template), sigma, found,
                      {"p1": zz_p1(), "p2": zz_p2()})
    assert report.ok


def test_lift_rejects_non_polymorphism(two_cycle):
    meta = build_digraph(two_cycle)
    const = OpTable("const", 3, 2, (0,) * 8)
    with pytest.raises(NotAPolymorphism):
        lift_op(meta, const, zz_median())


def test_lift_rejects_arity_mismatch(two_cycle):
    meta = build_digraph(two_cycle)
    with pytest.raises(ArityMismatch):
        lift_op(meta, _maj_bool(), zz_meet())


def test_lift_all_rejects_unbalanced_three_variable_identity(two_cycle):
    meta = build_digraph(two_cycle)
    bad = IdentitySet(
        (("f", 3),),
        (
            Identity(Term("f", ("x", "x", "x")), Term(None, ("x",))),
            Identity(Term("f", ("x", "y", "z")), Term(None, ("x",))),
        ),
    )
    with pytest.raises(ShapeViolation):
        lift_all(meta, bad, {"f": OpTable("f", 3, 2, tuple(t[0] for t in itertools.product(range(2), repeat=3)))})


def test_lift_all_requires_idempotency_identities(two_cycle):
    meta = build_digraph(two_cycle)
    sigma = IdentitySet(
        (("f", 2),),
        (Identity(Term("f", ("x", "y")), Term("f", ("y", "x"))),),
    )
    with pytest.raises(ShapeViolation):
        lift_all(meta, sigma, {"f": zz_meet()})


def test_lift_all_fails_on_maltsev_zigzag_side(two_cycle):
    meta = build_digraph(two_cycle)
    xor = _xor3()
    assert is_polymorphism(xor, two_cycle)
    with pytest.raises(ZigzagWitnessFails):
        lift_all(meta, maltsev_identities(), {"p": xor})


def test_lifted_wnu_smoke_on_two_cycle(two_cycle):
    meta = build_digraph(two_cycle)
    report = lift_all(meta, wnu_identities(3), {"w": _xor3()}, {"w": zz_allmin(3)})
    assert report.ok
    assert "polymorphism w: ok" in report.lines[0]


# ---------------------------------------------------------------------------
# Endomorphism transfer


def test_identity_lifts_to_identity(two_cycle):
    meta = build_digraph(two_cycle)
    lifted = lift_endomorphism(meta, {"0": "0", "1": "1"})
    assert all(v == w for v, w in lifted.items())


def test_swap_lifts_to_a_bundle_swap(two_cycle):
    meta = build_digraph(two_cycle)
    lifted = lift_endomorphism(meta, {"0": "1", "1": "0"})
    assert is_hom(meta.digraph, meta.digraph, lifted)
    assert lifted["a:0"] == "a:1"
    assert lifted["r:0,1"] == "r:1,0"
    assert set(lifted.values()) == set(meta.digraph.vertices)


def test_transfer_is_a_bijection(two_cycle):
    meta = build_digraph(two_cycle)
    small = endomorphisms(two_cycle)
    big = list(enumerate_homs(meta.digraph, meta.digraph))
    assert len(small) == len(big) == 2
    lifted = {tuple(sorted(lift_endomorphism(meta, phi).items())) for phi in small}
    assert lifted == {tuple(sorted(b.items())) for b in big}
    for phi in small:
        assert restrict_endomorphism(meta, lift_endomorphism(meta, phi)) == phi
    for big_phi in big:
        again = lift_endomorphism(meta, restrict_endomorphism(meta, big_phi))
        assert again == big_phi


def test_surjective_map_lifts_surjectively(parity4):
    meta = build_digraph(parity4)
    lifted = lift_endomorphism(meta, {"0": "0", "1": "1"})
    assert set(lifted.values()) == set(meta.digraph.vertices)


def test_non_endomorphism_rejected(two_cycle):
    meta = build_digraph(two_cycle)
    with pytest.raises(NotEndomorphism):
        lift_endomorphism(meta, {"0": "0", "1": "0"})
