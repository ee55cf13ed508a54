"""Translate a digraph instance back into an instance of the template side.

The pipeline, per connected component of the input digraph:

  stage 1   assign levels; anything unbalanced or taller than the
            encoding's height means a fixed NO instance overall.
  stage 2   components strictly lower than the encoding are decided
            directly against the encoded digraph; a NO again yields the
            fixed NO instance, a YES constrains nothing further.
  stage 3   full-height components are compiled into hyperedges: the
            induced subgraph between the extreme levels splits into
            internal components, each of which pins a set of tuple
            positions (gamma); objects of four kinds record who must
            share those positions, an equivalence closure identifies
            vertices, and class representatives become the elements of
            the output instance.

The output is homomorphism-equivalent to the input by construction;
it only exists when the template is not trivially satisfiable, hence
the TrivialTemplate precondition.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .builder import TemplateDigraph, build_digraph, path_spec
from .errors import InternalInvariantViolation, TrivialTemplate, Unbalanced
from .solver import find_hom, interpretable_at_levels
from .structures import Digraph, RelStructure, make_digraph, make_structure


# ---------------------------------------------------------------------------
# Stage 1: components and levels


def components(g: Digraph) -> list[list[int]]:
    """Connected components (ignoring orientation), ordered by least vertex."""
    n = len(g.vertices)
    nbr: list[list[int]] = [[] for _ in range(n)]
    for u, v in g.edges:
        nbr[u].append(v)
        nbr[v].append(u)
    seen = [False] * n
    out = []
    for root in range(n):
        if seen[root]:
            continue
        comp = [root]
        seen[root] = True
        stack = [root]
        while stack:
            u = stack.pop()
            for w in nbr[u]:
                if not seen[w]:
                    seen[w] = True
                    comp.append(w)
                    stack.append(w)
        out.append(sorted(comp))
    return out


@dataclass
class LevelAssignment:
    levels: dict[int, int]
    height: int


def assign_levels(g: Digraph, comp: list[int]) -> LevelAssignment:
    """Propagate levels from the least vertex; raise Unbalanced on conflict.

    The witness is a closed walk with nonzero net orientation, built
    from the propagation tree plus the offending edge.
    """
    adj: dict[int, list[tuple[int, int]]] = {v: [] for v in comp}
    in_comp = set(comp)
    for u, v in g.edges:
        if u in in_comp and v in in_comp:
            adj[u].append((v, 1))
            adj[v].append((u, -1))
    root = comp[0]
    level = {root: 0}
    parent: dict[int, int] = {root: root}
    stack = [root]
    while stack:
        u = stack.pop()
        for w, delta in adj[u]:
            want = level[u] + delta
            if w not in level:
                level[w] = want
                parent[w] = u
                stack.append(w)
            elif level[w] != want:
                def back(x):
                    trail = [x]
                    while parent[x] != x:
                        x = parent[x]
                        trail.append(x)
                    return trail

                up = back(u)
                down = back(w)
                witness = [g.vertices[i] for i in up[::-1] + down]
                raise Unbalanced(
                    f"component of {g.vertices[root]} admits no level function",
                    witness,
                )
    low = min(level.values())
    normal = {v: l - low for v, l in level.items()}
    return LevelAssignment(normal, max(normal.values()))


# ---------------------------------------------------------------------------
# Stage 2: low components against the encoded digraph


def stage2_decide(component: Digraph, meta: TemplateDigraph) -> bool:
    return find_hom(component, meta.digraph) is not None


def fan_at_element(meta: TemplateDigraph, a: int) -> Digraph:
    keep = [meta.elem_vid[a]]
    keep.extend(meta.tuple_vid[r] for r in meta.tuples)
    for r in meta.tuples:
        keep.extend(meta.path_vids[(a, r)][1:-1])
    return meta.digraph.induced(keep, name=f"fan:a:{a}")


def fan_at_tuple(meta: TemplateDigraph, r: tuple[int, ...]) -> Digraph:
    keep = [meta.tuple_vid[r]]
    keep.extend(meta.elem_vid)
    for a in range(len(meta.template.domain)):
        keep.extend(meta.path_vids[(a, r)][1:-1])
    return meta.digraph.induced(keep, name="fan:r")


def stage2_decide_fans(component: Digraph, meta: TemplateDigraph) -> bool:
    """Cross-check variant: a low component maps into the encoding iff it
    maps into some fan of paths sharing an element or sharing a tuple."""
    for a in range(len(meta.template.domain)):
        if find_hom(component, fan_at_element(meta, a)) is not None:
            return True
    for r in meta.tuples:
        if find_hom(component, fan_at_tuple(meta, r)) is not None:
            return True
    return False


# ---------------------------------------------------------------------------
# Stage 3A: internal components, gamma, and the four object kinds


@dataclass
class InternalComponent:
    cid: int
    vertices: tuple[int, ...]
    base: tuple[int, ...]
    top: tuple[int, ...]
    height: int
    gamma: frozenset[int] = frozenset()


def internal_components(
    g: Digraph, comp: list[int], levels: dict[int, int], height: int
) -> list[InternalComponent]:
    internal = [v for v in comp if 0 < levels[v] < height]
    member = set(internal)
    nbr: dict[int, list[int]] = {v: [] for v in internal}
    for u, v in g.edges:
        if u in member and v in member:
            nbr[u].append(v)
            nbr[v].append(u)
    out_n = g.out_neighbours()
    in_n = g.in_neighbours()
    seen: set[int] = set()
    result = []
    for root in internal:
        if root in seen:
            continue
        comp_vs = [root]
        seen.add(root)
        stack = [root]
        while stack:
            u = stack.pop()
            for w in nbr[u]:
                if w not in seen:
                    seen.add(w)
                    comp_vs.append(w)
                    stack.append(w)
        comp_vs.sort()
        base = sorted(
            {u for v in comp_vs for u in in_n[v] if levels[u] == 0}
        )
        top = sorted(
            {u for v in comp_vs for u in out_n[v] if levels[u] == height}
        )
        lv = [levels[v] for v in comp_vs]
        result.append(
            InternalComponent(
                cid=len(result),
                vertices=tuple(comp_vs),
                base=tuple(base),
                top=tuple(top),
                height=max(lv) - min(lv),
            )
        )
    return result


def boundary_subgraph(
    g: Digraph, c: InternalComponent, levels: dict[int, int]
) -> tuple[Digraph, dict[str, int]]:
    """The component plus its base and top, with only its own edges."""
    member = set(c.vertices)
    keep = sorted(member | set(c.base) | set(c.top))
    names = [g.vertices[v] for v in keep]
    remap = {v: i for i, v in enumerate(keep)}
    edges = [
        (remap[u], remap[v])
        for u, v in g.edges
        if (u in member or v in member) and u in remap and v in remap
    ]
    sub = make_digraph(f"around:{names[0]}", names, edges)
    level_of = {g.vertices[v]: levels[v] for v in keep}
    return sub, level_of


def gamma(
    g: Digraph, c: InternalComponent, levels: dict[int, int], k: int
) -> frozenset[int]:
    """Positions whose segment the component forces to be a single edge.

    Position j is forced exactly when the component (with its base and
    top attached at their true levels) does not map into the path that
    is single everywhere except a zigzag at j.
    """
    sub, level_of = boundary_subgraph(g, c, levels)
    forced = []
    for j in range(1, k + 1):
        spec = path_spec(k, set(range(1, k + 1)) - {j})
        if not interpretable_at_levels(sub, level_of, spec):
            forced.append(j)
    return frozenset(forced)


def gamma_fast(
    g: Digraph, c: InternalComponent, levels: dict[int, int], k: int
) -> frozenset[int]:
    """Equivalent criterion: a directed three-edge walk crossing levels
    j-1..j+2 is the one obstruction to folding position j into a zigzag."""
    sub, level_of = boundary_subgraph(g, c, levels)
    has_in = [False] * len(sub.vertices)
    has_out = [False] * len(sub.vertices)
    for u, v in sub.edges:
        has_out[u] = True
        has_in[v] = True
    forced = set()
    for u, v in sub.edges:
        j = level_of[sub.vertices[u]]
        if 1 <= j <= k and has_in[u] and has_out[v]:
            forced.add(j)
    return frozenset(forced)


@dataclass
class TypeIObject:
    e: int
    sets: tuple[tuple[str, ...], ...]


@dataclass
class TypeIIObject:
    b: int
    cid: int
    sets: tuple[tuple[str, ...], ...]


@dataclass
class ReverseObjects:
    g: Digraph
    k: int
    internals: list[InternalComponent]
    x_order: tuple[str, ...]
    type1: list[TypeIObject]
    type2: list[TypeIIObject]
    edges3: list[tuple[int, int]]
    edges4: list[tuple[int, int]]


def build_objects(
    g: Digraph,
    comp: list[int],
    levels: dict[int, int],
    internals: list[InternalComponent],
    k: int,
) -> ReverseObjects:
    g0 = [v for v in comp if levels[v] == 0]
    height = max(levels[v] for v in comp)
    gn = [v for v in comp if levels[v] == height]
    name = g.vertices.__getitem__

    # Fresh vertices: alpha for baseless positions of top-free components,
    # beta for base-free components, gamma-kind for positions nobody pins.
    alpha: list[str] = []
    beta: list[str] = []
    for c in internals:
        if not c.top:
            for b in c.base:
                alpha.extend(
                    f"xa:{c.cid}:{name(b)}:{i}"
                    for i in range(1, k + 1)
                    if i not in c.gamma
                )
        if not c.base:
            beta.extend(
                f"xb:{c.cid}:{name(e)}:{i}" for e in c.top for i in sorted(c.gamma)
            )

    tops_pinning: dict[tuple[int, int], list[InternalComponent]] = {}
    for c in internals:
        for e in c.top:
            for i in c.gamma:
                tops_pinning.setdefault((e, i), []).append(c)

    gamma_names: list[str] = []
    for e in gn:
        for i in range(1, k + 1):
            if (e, i) not in tops_pinning:
                gamma_names.append(f"xg:{name(e)}:{i}")

    x_order = tuple([name(v) for v in g0] + alpha + beta + gamma_names)

    type1: list[TypeIObject] = []
    for e in gn:
        sets = []
        for i in range(1, k + 1):
            pinning = tops_pinning.get((e, i), [])
            members: list[str] = []
            for c in pinning:
                if c.base:
                    members.extend(name(b) for b in c.base)
                else:
                    members.append(f"xb:{c.cid}:{name(e)}:{i}")
            if not members:
                members = [f"xg:{name(e)}:{i}"]
            sets.append(tuple(dict.fromkeys(members)))
        type1.append(TypeIObject(e, tuple(sets)))

    type2: list[TypeIIObject] = []
    for b in g0:
        for c in internals:
            if b in c.base and not c.top:
                sets = tuple(
                    (name(b),) if i in c.gamma else (f"xa:{c.cid}:{name(b)}:{i}",)
                    for i in range(1, k + 1)
                )
                type2.append(TypeIIObject(b, c.cid, sets))

    edges3 = sorted(
        {
            (e, f)
            for c in internals
            for e in c.top
            for f in c.top
            if e < f
        }
    )
    edges4 = sorted(
        {
            (b, d)
            for c in internals
            for b in c.base
            for d in c.base
            if b < d
        }
    )
    return ReverseObjects(g, k, internals, x_order, type1, type2, edges3, edges4)


# ---------------------------------------------------------------------------
# Stage 3B: equivalence closure and assembly


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


@dataclass
class SimPartition:
    x_order: tuple[str, ...]
    rep: dict[str, str]
    classes: dict[str, tuple[str, ...]]


def sim_closure(objects: ReverseObjects) -> SimPartition:
    """One equivalence closure over the statically generated pair set.

    Pairs come from (1) per-position overlaps between any two objects,
    including an object with itself, (2) shared-base edges, (3) shared-top
    edges propagated through the two objects' position sets.
    """
    rank = {x: i for i, x in enumerate(objects.x_order)}
    uf = UnionFind(len(objects.x_order))

    def unite(names):
        it = iter(names)
        first = rank[next(it)]
        for x in it:
            uf.union(first, rank[x])

    name = objects.g.vertices.__getitem__
    all_sets = [o.sets for o in objects.type1] + [o.sets for o in objects.type2]
    for sets in all_sets:
        for members in sets:
            unite(members)
    for a_idx in range(len(all_sets)):
        for b_idx in range(a_idx + 1, len(all_sets)):
            for i in range(objects.k):
                va, vb = all_sets[a_idx][i], all_sets[b_idx][i]
                if set(va) & set(vb):
                    unite(va + vb)
    for b, d in objects.edges4:
        uf.union(rank[name(b)], rank[name(d)])
    by_top = {o.e: o for o in objects.type1}
    for e, f in objects.edges3:
        for i in range(objects.k):
            unite(by_top[e].sets[i] + by_top[f].sets[i])

    classes: dict[int, list[str]] = {}
    for x in objects.x_order:
        classes.setdefault(uf.find(rank[x]), []).append(x)
    rep = {}
    out_classes = {}
    for members in classes.values():
        head = min(members, key=rank.__getitem__)
        out_classes[head] = tuple(sorted(members, key=rank.__getitem__))
        for x in members:
            rep[x] = head

    for sets in all_sets:
        for members in sets:
            if len({rep[x] for x in members}) != 1:
                raise InternalInvariantViolation(
                    f"object set {members} straddles classes after closure"
                )
    return SimPartition(objects.x_order, rep, out_classes)


def assemble_instance(
    objects: ReverseObjects, partition: SimPartition, template: RelStructure
) -> RelStructure:
    """Hyperedges of representatives, one per type-I and type-II object."""
    rel = template.relations[0]
    domain = [x for x in objects.x_order if partition.rep[x] == x]
    index = {x: i for i, x in enumerate(domain)}
    rows = []
    for o in objects.type1:
        rows.append(tuple(index[partition.rep[s[0]]] for s in o.sets))
    for o in objects.type2:
        rows.append(tuple(index[partition.rep[s[0]]] for s in o.sets))
    return make_structure(
        f"rev:{objects.g.name}",
        domain,
        [(rel.name, rel.arity, rows)],
        role="instance",
    )


# ---------------------------------------------------------------------------
# Fixed instances and the full pipeline


def template_is_trivial(template: RelStructure) -> bool:
    rel = template.relations[0]
    return any(len(set(t)) == 1 for t in rel.tuples)


def fixed_no(template: RelStructure) -> RelStructure:
    """One element with a loop tuple; unsatisfiable without a constant tuple."""
    rel = template.relations[0]
    return make_structure(
        "fixed-no", ["x"], [(rel.name, rel.arity, [(0,) * rel.arity])], role="instance"
    )


def fixed_yes(template: RelStructure) -> RelStructure:
    rel = template.relations[0]
    k = rel.arity
    return make_structure(
        "fixed-yes",
        [f"y{i}" for i in range(1, k + 1)],
        [(rel.name, k, [tuple(range(k))])],
        role="instance",
    )


@dataclass
class ComponentReport:
    vertices: tuple[str, ...]
    stage: str
    detail: str = ""
    objects: ReverseObjects | None = None
    partition: SimPartition | None = None


@dataclass
class ReverseResult:
    instance: RelStructure
    mode: str  # "assembled" | "fixed-no" | "fixed-yes"
    reports: list[ComponentReport] = field(default_factory=list)


def reverse_instance(g: Digraph, template: RelStructure) -> ReverseResult:
    """Full pipeline; the output is hom-equivalent to the input.

    Raises TrivialTemplate when the template admits a constant tuple, in
    which case no fixed NO instance can exist.
    """
    if len(template.relations) != 1:
        raise TrivialTemplate("reverse translation expects a single-relation template")
    if template_is_trivial(template):
        raise TrivialTemplate(
            f"template {template.name!r} has a constant tuple; every instance maps"
        )
    k = template.relations[0].arity
    n = k + 2
    meta = build_digraph(template)

    reports: list[ComponentReport] = []
    stage3: list[tuple[list[int], dict[int, int]]] = []
    for comp in components(g):
        names = tuple(g.vertices[v] for v in comp)
        try:
            assignment = assign_levels(g, comp)
        except Unbalanced as exc:
            reports.append(
                ComponentReport(names, "fixed-no", f"unbalanced: {' '.join(exc.witness)}")
            )
            return ReverseResult(fixed_no(template), "fixed-no", reports)
        if assignment.height > n:
            reports.append(
                ComponentReport(names, "fixed-no", f"height {assignment.height} > {n}")
            )
            return ReverseResult(fixed_no(template), "fixed-no", reports)
        if assignment.height < n:
            sub = g.induced(comp, name=f"part:{names[0]}")
            if not stage2_decide(sub, meta):
                reports.append(ComponentReport(names, "fixed-no", "low component, no map"))
                return ReverseResult(fixed_no(template), "fixed-no", reports)
            reports.append(ComponentReport(names, "low-yes"))
        else:
            stage3.append((comp, assignment.levels))

    if not stage3:
        reports.append(ComponentReport((), "fixed-yes", "no full-height component"))
        return ReverseResult(fixed_yes(template), "fixed-yes", reports)

    domains: list[str] = []
    rows: list[tuple[int, ...]] = []
    rel = template.relations[0]
    cid_offset = 0
    for comp, levels in stage3:
        internals = internal_components(g, comp, levels, n)
        for c in internals:
            c.cid += cid_offset
            c.gamma = gamma(g, c, levels, k)
        cid_offset += len(internals)
        objects = build_objects(g, comp, levels, internals, k)
        partition = sim_closure(objects)
        part = assemble_instance(objects, partition, template)
        offset = len(domains)
        domains.extend(part.domain)
        rows.extend(
            tuple(i + offset for i in t) for t in part.relations[0].tuples
        )
        reports.append(
            ComponentReport(
                tuple(g.vertices[v] for v in comp),
                "assembled",
                objects=objects,
                partition=partition,
            )
        )
    out = make_structure(
        f"rev:{g.name}", domains, [(rel.name, rel.arity, rows)], role="instance"
    )
    return ReverseResult(out, "assembled", reports)
