import pytest

from cspdigraph.builder import build_digraph, build_path, path_spec
from cspdigraph.errors import TrivialTemplate, Unbalanced
from cspdigraph.forward import forward_instance
from cspdigraph.reverse import (
    assign_levels,
    build_objects,
    components,
    fixed_no,
    fixed_yes,
    gamma,
    gamma_fast,
    internal_components,
    reverse_instance,
    sim_closure,
    stage2_decide,
    stage2_decide_fans,
    assemble_instance,
)
from cspdigraph.rng import Lcg64
from cspdigraph.solver import enumerate_homs, find_hom, interpretable_at_levels
from cspdigraph.structures import make_digraph, make_structure
from cspdigraph.verify import random_digraph_instance, random_single_template
from worked_example import EXPECTED_GAMMAS, worked_digraph


def _levels(g):
    comp = components(g)[0]
    return comp, assign_levels(g, comp)


# ---------------------------------------------------------------------------
# Stage 1


def test_directed_two_cycle_is_unbalanced():
    g = make_digraph("c2", ["u", "v"], [(0, 1), (1, 0)])
    with pytest.raises(Unbalanced) as err:
        assign_levels(g, components(g)[0])
    witness = err.value.witness
    assert witness[0] == witness[-1]
    net = 0
    edges = set(g.edges)
    for a, b in zip(witness, witness[1:]):
        ia, ib = g.vertices.index(a), g.vertices.index(b)
        net += 1 if (ia, ib) in edges else -1
    assert net != 0


def test_self_loop_is_unbalanced():
    g = make_digraph("loop", ["u"], [(0, 0)])
    with pytest.raises(Unbalanced):
        assign_levels(g, components(g)[0])


def test_zigzag_levels():
    g = make_digraph("z", ["a", "b", "c", "d"], [(0, 1), (2, 1), (2, 3)])
    comp, assignment = _levels(g)
    assert assignment.height == 1
    assert [assignment.levels[v] for v in comp] == [0, 1, 0, 1]


def test_path_height_reaches_the_encoding():
    g = build_path(path_spec(3, [3]))
    _, assignment = _levels(g)
    assert assignment.height == 5


# ---------------------------------------------------------------------------
# Stage 2


def test_single_vertex_is_yes(two_cycle):
    meta = build_digraph(two_cycle)
    dot = make_digraph("dot", ["v"], [])
    assert stage2_decide(dot, meta)
    assert stage2_decide_fans(dot, meta)


def test_zigzag_component_is_yes(two_cycle):
    meta = build_digraph(two_cycle)
    z = make_digraph("z", ["a", "b", "c", "d"], [(0, 1), (2, 1), (2, 3)])
    assert stage2_decide(z, meta)
    assert stage2_decide_fans(z, meta)


def test_fan_variant_agrees_with_direct_decision():
    """Dual-method agreement on 100 random low components."""
    rng = Lcg64(23)
    done = 0
    while done < 100:
        template = random_single_template(rng, nontrivial=True)
        meta = build_digraph(template)
        g = random_digraph_instance(rng, n_levels=meta.k + 1)
        for comp in components(g):
            try:
                assignment = assign_levels(g, comp)
            except Unbalanced:
                continue
            if assignment.height >= meta.k + 2:
                continue
            sub = g.induced(comp, name="part")
            assert stage2_decide(sub, meta) == stage2_decide_fans(sub, meta)
            done += 1
            if done >= 100:
                break


# ---------------------------------------------------------------------------
# Stage 3A


def test_path_instance_has_one_internal_component():
    g = build_path(path_spec(2, [1]))
    comp, assignment = _levels(g)
    parts = internal_components(g, comp, assignment.levels, assignment.height)
    assert len(parts) == 1
    (c,) = parts
    assert [g.vertices[v] for v in c.base] == ["q0"]
    assert [g.vertices[v] for v in c.top] == [g.vertices[len(g.vertices) - 1]]


def test_encoding_of_two_cycle_has_four_internal_components(two_cycle):
    meta = build_digraph(two_cycle)
    comp, assignment = _levels(meta.digraph)
    parts = internal_components(meta.digraph, comp, assignment.levels, assignment.height)
    assert len(parts) == 4
    for c in parts:
        assert len(c.base) == 1 and len(c.top) == 1
        # each interior pins exactly the positions of its connecting path
        want = meta.path_specs[
            (
                meta.digraph.provenance[c.base[0]].elem,
                meta.digraph.provenance[c.top[0]].tup,
            )
        ].singles
        assert gamma(meta.digraph, c, assignment.levels, meta.k) == want


def test_component_with_base_only():
    # a level-1 vertex with one base neighbour and no top, inside a
    # height-4 graph held up by an unrelated chain
    g = make_digraph(
        "g",
        ["b", "v", "c1", "c2", "c3", "e"],
        [(0, 1), (0, 2), (2, 3), (3, 4), (4, 5)],
    )
    comp = components(g)[0]
    assignment = assign_levels(g, comp)
    parts = internal_components(g, comp, assignment.levels, 4)
    slack = next(c for c in parts if c.vertices == (1,))
    assert [g.vertices[x] for x in slack.base] == ["b"]
    assert slack.top == ()


@pytest.mark.parametrize("singles", [set(), {1}, {2}, {1, 2}, {1, 3}, {1, 2, 3}])
def test_gamma_of_path_interior_is_its_single_set(singles):
    k = max(singles) if singles else 2
    k = max(k, 2)
    g = build_path(path_spec(k, singles))
    comp, assignment = _levels(g)
    (c,) = internal_components(g, comp, assignment.levels, assignment.height)
    assert gamma(g, c, assignment.levels, k) == frozenset(singles)
    assert gamma_fast(g, c, assignment.levels, k) == frozenset(singles)


def test_gamma_of_slack_vertex_is_empty():
    g = make_digraph("g", ["b", "v", "w", "x", "e"], [(0, 1), (2, 3), (3, 4)])
    # make height n=4 via a second chain so the slack vertex is internal
    g = make_digraph(
        "g",
        ["b", "v", "c1", "c2", "c3", "e"],
        [(0, 1), (0, 2), (2, 3), (3, 4), (4, 5)],
    )
    comp, assignment = _levels(g)
    assert assignment.height == 4
    parts = internal_components(g, comp, assignment.levels, 4)
    slack = [c for c in parts if c.vertices == (1,)]
    assert len(slack) == 1
    assert gamma(g, slack[0], assignment.levels, 2) == frozenset()


def test_gamma_matches_fast_criterion_on_random_components():
    rng = Lcg64(37)
    checked = 0
    while checked < 60:
        k = rng.randint(2, 3)
        g = random_digraph_instance(rng, n_levels=k + 2)
        for comp in components(g):
            try:
                assignment = assign_levels(g, comp)
            except Unbalanced:
                continue
            if assignment.height != k + 2:
                continue
            for c in internal_components(g, comp, assignment.levels, k + 2):
                assert gamma(g, c, assignment.levels, k) == gamma_fast(
                    g, c, assignment.levels, k
                )
                checked += 1


def test_forced_positions_remain_interpretable_at_their_minimum():
    """Each component maps into the path whose singles are exactly gamma."""
    g = worked_digraph()
    comp, assignment = _levels(g)
    from cspdigraph.reverse import boundary_subgraph

    for c in internal_components(g, comp, assignment.levels, 4):
        gm = gamma(g, c, assignment.levels, 2)
        sub, level_of = boundary_subgraph(g, c, assignment.levels)
        assert interpretable_at_levels(sub, level_of, path_spec(2, gm))


def test_objects_for_a_bare_path():
    k = 3
    g = build_path(path_spec(k, {1, 3}))
    comp, assignment = _levels(g)
    parts = internal_components(g, comp, assignment.levels, assignment.height)
    for c in parts:
        c.gamma = gamma(g, c, assignment.levels, k)
    obj = build_objects(g, comp, assignment.levels, parts, k)
    assert len(obj.type1) == 1
    (t1,) = obj.type1
    top_name = g.vertices[t1.e]
    assert t1.sets == (("q0",), (f"xg:{top_name}:2",), ("q0",))
    assert obj.type2 == []
    assert obj.edges3 == [] and obj.edges4 == []
    partition = sim_closure(obj)
    assert all(len(m) == 1 for m in partition.classes.values())
    out = assemble_instance(obj, partition, make_structure(
        "t", ["0", "1"], [("R", 3, [(0, 0, 1)])]
    ))
    assert len(out.domain) == 1 + (k - 2)
    assert out.relations[0].tuples == ((0, 1, 0),)


def test_shared_base_merges_position_sets():
    # two tops above one base vertex pinning position 1 each
    g = worked_digraph()
    res = reverse_instance(g, make_structure("t", ["0", "1"], [("R", 2, [(0, 1), (1, 0)])]))
    rep = res.reports[0]
    blocks = [m for m in rep.partition.classes.values() if len(m) > 1]
    assert sorted(blocks) == [
        ("b2", "b4", "b5", "b6", "xg:e1:1"),
        ("b3", "xg:e1:2"),
    ]


# ---------------------------------------------------------------------------
# The worked fixture, frozen


def test_worked_fixture_objects(two_cycle):
    g = worked_digraph()
    comp, assignment = _levels(g)
    assert assignment.height == 4
    parts = internal_components(g, comp, assignment.levels, 4)
    assert len(parts) == len(EXPECTED_GAMMAS)
    for c in parts:
        first = g.vertices[c.vertices[0]]
        c.gamma = gamma(g, c, assignment.levels, 2)
        assert c.gamma == frozenset(EXPECTED_GAMMAS[first]), first
        assert gamma_fast(g, c, assignment.levels, 2) == c.gamma

    obj = build_objects(g, comp, assignment.levels, parts, 2)
    by_top = {g.vertices[o.e]: o.sets for o in obj.type1}
    assert by_top["e1"] == (("xg:e1:1",), ("xg:e1:2",))
    assert by_top["e2"] == (("b2",), ("b3",))
    assert by_top["e3"] == (("b2", "b4"), ("xg:e3:2",))
    assert by_top["e4"] == (("b4",), ("xb:6:e4:2",))

    type2 = [(g.vertices[o.b], o.sets) for o in obj.type2]
    assert type2 == [
        ("b1", (("b1",), ("xa:7:b1:2",))),
        ("b4", (("xa:8:b4:1",), ("xa:8:b4:2",))),
        ("b5", (("xa:8:b5:1",), ("xa:8:b5:2",))),
        ("b5", (("b5",), ("xa:9:b5:2",))),
        ("b6", (("b6",), ("xa:9:b6:2",))),
    ]

    assert [(g.vertices[e], g.vertices[f]) for e, f in obj.edges3] == [("e1", "e2")]
    assert [(g.vertices[b], g.vertices[d]) for b, d in obj.edges4] == [
        ("b4", "b5"),
        ("b5", "b6"),
    ]


def test_worked_fixture_instance(two_cycle):
    g = worked_digraph()
    res = reverse_instance(g, two_cycle)
    assert res.mode == "assembled"
    out = res.instance
    named = [tuple(out.domain[i] for i in t) for t in out.relations[0].tuples]
    assert named == [
        ("b2", "b3"),
        ("b2", "xg:e3:2"),
        ("b2", "xb:6:e4:2"),
        ("b1", "xa:7:b1:2"),
        ("xa:8:b4:1", "xa:8:b4:2"),
        ("xa:8:b5:1", "xa:8:b5:2"),
        ("b2", "xa:9:b5:2"),
        ("b2", "xa:9:b6:2"),
    ]


def test_worked_fixture_equivalence_across_templates():
    g = worked_digraph()
    for name, dom, tuples in [
        ("2cycle", ["0", "1"], [(0, 1), (1, 0)]),
        ("edge", ["0", "1"], [(0, 1)]),
        ("tri", ["0", "1", "2"], [(0, 1), (1, 2), (2, 0)]),
    ]:
        t = make_structure(name, dom, [("R", 2, tuples)])
        meta = build_digraph(t)
        res = reverse_instance(g, t)
        assert (find_hom(g, meta.digraph) is not None) == (
            find_hom(res.instance, t) is not None
        )


def test_worked_fixture_maps_into_its_own_encoding(two_cycle):
    g = worked_digraph()
    res = reverse_instance(g, two_cycle)
    as_template = make_structure(
        "b", res.instance.domain, [("R", 2, res.instance.relations[0].tuples)]
    )
    assert find_hom(g, build_digraph(as_template).digraph) is not None


# ---------------------------------------------------------------------------
# Pipeline


def test_forward_then_reverse_round_trip(two_cycle):
    x = make_structure("x", ["u", "v", "w"], [("R", 2, [(0, 1), (1, 2)])], role="instance")
    g = forward_instance(x, 2)
    res = reverse_instance(g, two_cycle)
    assert res.mode == "assembled"
    named = {tuple(res.instance.domain[i] for i in t) for t in res.instance.relations[0].tuples}
    assert named == {("u", "v"), ("v", "w")}


def test_unbalanced_gives_fixed_no(two_cycle):
    g = make_digraph("c2", ["u", "v"], [(0, 1), (1, 0)])
    res = reverse_instance(g, two_cycle)
    assert res.mode == "fixed-no"
    assert find_hom(res.instance, two_cycle) is None


def test_too_tall_gives_fixed_no(two_cycle):
    g = build_path(path_spec(3, [1, 2, 3]))  # height 5 > 4
    res = reverse_instance(g, two_cycle)
    assert res.mode == "fixed-no"


def test_single_vertex_gives_fixed_yes(two_cycle):
    g = make_digraph("dot", ["v"], [])
    res = reverse_instance(g, two_cycle)
    assert res.mode == "fixed-yes"
    assert find_hom(res.instance, two_cycle) is not None
    assert res.instance.domain == ("y1", "y2")


def test_trivial_template_raises():
    t = make_structure("t", ["0", "1"], [("R", 2, [(0, 0), (0, 1)])])
    with pytest.raises(TrivialTemplate):
        reverse_instance(make_digraph("dot", ["v"], []), t)


def test_fixed_instances(two_cycle):
    assert find_hom(fixed_no(two_cycle), two_cycle) is None
    assert find_hom(fixed_yes(two_cycle), two_cycle) is not None


def test_multi_component_union(two_cycle):
    meta = build_digraph(two_cycle)
    p1 = build_path(path_spec(2, [1]))
    n = len(p1.vertices)
    vertices = list(p1.vertices) + [f"s{i}" for i in range(n)]
    edges = list(p1.edges) + [(u + n, v + n) for u, v in p1.edges]
    g = make_digraph("two", vertices, edges)
    res = reverse_instance(g, two_cycle)
    assert res.mode == "assembled"
    assert len(res.instance.relations[0].tuples) == 2
    assert (find_hom(g, meta.digraph) is not None) == (
        find_hom(res.instance, two_cycle) is not None
    )


def test_identified_base_vertices_agree_under_every_hom(two_cycle):
    """Vertices a ~ b at the base level are forced together by any hom."""
    g = worked_digraph()
    meta = build_digraph(two_cycle)
    res = reverse_instance(g, two_cycle)
    rep = res.reports[0]
    base_classes = [
        [m for m in members if not m.startswith(("xa:", "xb:", "xg:"))]
        for members in rep.partition.classes.values()
    ]
    homs = list(enumerate_homs(g, meta.digraph))
    assert homs
    for hom in homs:
        for members in base_classes:
            assert len({hom[v] for v in members if v in hom}) <= 1


def test_reverse_equivalence_smoke():
    rng = Lcg64(19)
    for _ in range(60):
        template = random_single_template(rng, nontrivial=True)
        meta = build_digraph(template)
        g = random_digraph_instance(rng, n_levels=meta.k + 2)
        res = reverse_instance(g, template)
        assert (find_hom(g, meta.digraph) is not None) == (
            find_hom(res.instance, template) is not None
        )


def test_full_directed_path_forces_a_constant_tuple(two_cycle):
    """The all-singles path compiles to a constant hyperedge: NO without one."""
    g = build_path(path_spec(2, [1, 2]))
    res = reverse_instance(g, two_cycle)
    assert res.mode == "assembled"
    named = [tuple(res.instance.domain[i] for i in t) for t in res.instance.relations[0].tuples]
    assert named == [("q0", "q0")]
    meta = build_digraph(two_cycle)
    assert find_hom(g, meta.digraph) is None
    assert find_hom(res.instance, two_cycle) is None


def test_subgraphs_of_the_encoding_stay_yes():
    """Edge-subgraphs of an encoding map into it, so the output must be YES."""
    rng = Lcg64(77)
    for _ in range(25):
        template = random_single_template(rng, nontrivial=True)
        meta = build_digraph(template)
        edges = [e for e in meta.digraph.edges if rng.chance(4, 5)]
        g = make_digraph("sub", meta.digraph.vertices, edges)
        res = reverse_instance(g, template)
        assert find_hom(res.instance, template) is not None


def test_assembled_instances_receive_their_source():
    """Every full-height input maps into the encoding of its own output."""
    rng = Lcg64(47)
    seen = 0
    while seen < 25:
        template = random_single_template(rng, nontrivial=True)
        g = random_digraph_instance(rng, n_levels=template.relations[0].arity + 2)
        res = reverse_instance(g, template)
        if res.mode != "assembled":
            continue
        rel = res.instance.relations[0]
        as_template = make_structure("b", res.instance.domain, [(rel.name, rel.arity, rel.tuples)])
        assert find_hom(g, build_digraph(as_template).digraph) is not None
        seen += 1
