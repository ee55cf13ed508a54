"""Construction of connecting paths and the balanced digraph of a template.

A single-relation template (A; R) with R of arity k is encoded as a
balanced digraph of height k+2: one vertex per element, one per tuple,
and for every (element, tuple) pair an oriented connecting path between
them.  The path has k middle segments; segment i is a single edge when
the element sits at position i of the tuple and a zigzag otherwise.

Vertex naming is exact and stable:

    elements   a:<name>
    tuples     r:<name1>,...,<namek>
    interiors  p:<aname>|<name1>,...,<namek>|<j>

with j counted from the element end starting at 1.  Vertex order is all
elements (declaration order), all tuples (tuple-lex), then interiors by
(element, tuple) pair and distance from the element end.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import NotInterior, ParseError, PreconditionError
from .structures import Digraph, DVertex, RelStructure, make_digraph, make_structure

ZIGZAG = (1, -1, 1)
SINGLE = (1,)


@dataclass(frozen=True)
class PathSpec:
    """Arity k and the subset of [k] whose segment is a single edge."""

    k: int
    singles: frozenset[int]

    def __post_init__(self):
        if self.k < 1:
            raise PreconditionError("path spec needs k >= 1")
        if not all(1 <= i <= self.k for i in self.singles):
            raise PreconditionError(f"singles {set(self.singles)} not within [1..{self.k}]")

    def orientations(self) -> tuple[int, ...]:
        """Edge directions from the element end: +1 up, -1 down."""
        steps: list[int] = [1]
        for l in range(1, self.k + 1):
            steps.extend(SINGLE if l in self.singles else ZIGZAG)
        steps.append(1)
        return tuple(steps)

    def segment_positions(self, l: int) -> range:
        """Vertex positions (inclusive) covered by segment l."""
        if not 1 <= l <= self.k:
            raise PreconditionError(f"segment {l} out of range")
        start = 1
        for j in range(1, l):
            start += 1 if j in self.singles else 3
        width = 1 if l in self.singles else 3
        return range(start, start + width + 1)

    def length(self) -> int:
        """Number of edges; the path has length()+1 vertices."""
        return 2 + self.k + 2 * (self.k - len(self.singles))


def path_spec(k: int, singles: Iterable[int] = ()) -> PathSpec:
    return PathSpec(k, frozenset(singles))


def build_path(spec: PathSpec, name: str | None = None) -> Digraph:
    """The oriented path of a spec, with levels; q0 is the initial vertex."""
    steps = spec.orientations()
    n = len(steps) + 1
    vertices = [f"q{i}" for i in range(n)]
    levels = [0]
    for s in steps:
        levels.append(levels[-1] + s)
    edges = []
    for i, s in enumerate(steps):
        edges.append((i, i + 1) if s == 1 else (i + 1, i))
    return make_digraph(
        name or f"path:k{spec.k}:" + ",".join(map(str, sorted(spec.singles))),
        vertices,
        edges,
        levels=levels,
    )


def index_set(a: int, r: Sequence[int]) -> frozenset[int]:
    """Positions (1-based) of the tuple holding the given element index."""
    return frozenset(i + 1 for i, ri in enumerate(r) if ri == a)


def segments_at_position(spec: PathSpec, pos: int) -> frozenset[int]:
    """Segments of the path containing the vertex at the given position."""
    return frozenset(
        l for l in range(1, spec.k + 1) if pos in spec.segment_positions(l)
    )


@dataclass
class TemplateDigraph:
    """The built digraph plus everything needed to navigate it.

    All fields are populated by build_digraph and must be treated as
    read-only; sharing an instance across threads is safe.
    """

    template: RelStructure
    digraph: Digraph
    k: int
    tuples: tuple[tuple[int, ...], ...]  # tuple-lex order
    elem_vid: tuple[int, ...]
    tuple_vid: dict[tuple[int, ...], int]
    path_specs: dict[tuple[int, tuple[int, ...]], PathSpec]
    path_vids: dict[tuple[int, tuple[int, ...]], tuple[int, ...]]
    # per-vertex arrays
    lvl: tuple[int, ...]
    v_path: tuple[tuple[int, tuple[int, ...]] | None, ...]
    v_pos: tuple[int | None, ...]
    out_nbrs: list[list[int]] = field(default_factory=list)
    in_nbrs: list[list[int]] = field(default_factory=list)

    @property
    def height(self) -> int:
        return self.k + 2

    def kind(self, vid: int) -> str:
        return self.digraph.provenance[vid].kind

    def index_set_of(self, e: tuple[int, tuple[int, ...]]) -> frozenset[int]:
        return self.path_specs[e].singles

    def path_of(self, vid: int) -> tuple[int, tuple[int, ...]]:
        e = self.v_path[vid]
        if e is None:
            raise NotInterior(f"vertex {self.digraph.vertices[vid]} is not interior")
        return e

    def segment_indices(self, vid: int) -> frozenset[int]:
        e = self.path_of(vid)
        return segments_at_position(self.path_specs[e], self.v_pos[vid])

    def segment_vids(self, e: tuple[int, tuple[int, ...]], l: int) -> tuple[int, ...]:
        rng = self.path_specs[e].segment_positions(l)
        path = self.path_vids[e]
        return tuple(path[p] for p in rng)

    def stats(self) -> tuple[int, int, int, bool]:
        """(vertices, edges, height, counts-match-the-closed-formulas)."""
        na, nr, k = len(self.template.domain), len(self.tuples), self.k
        want_v = (3 * k + 1) * nr * na + (1 - 2 * k) * nr + na
        want_e = (3 * k + 2) * nr * na - 2 * k * nr
        nv, ne = len(self.digraph.vertices), len(self.digraph.edges)
        height = max(self.lvl) if self.lvl else 0
        return nv, ne, height, (nv, ne, height) == (want_v, want_e, k + 2)


def _tuple_name(template: RelStructure, r: tuple[int, ...]) -> str:
    return ",".join(template.domain[i] for i in r)


def build_digraph(template: RelStructure) -> TemplateDigraph:
    """Encode a single-relation template as its balanced digraph."""
    if len(template.relations) != 1:
        raise PreconditionError(
            f"template {template.name!r} must have a single relation; merge first"
        )
    rel = template.relations[0]
    k = rel.arity
    tuples = tuple(sorted(rel.tuples))

    vertices: list[str] = []
    levels: list[int] = []
    prov: list[DVertex] = []

    def add(name: str, lvl: int, tag: DVertex) -> int:
        vertices.append(name)
        levels.append(lvl)
        prov.append(tag)
        return len(vertices) - 1

    elem_vid = tuple(
        add(f"a:{name}", 0, DVertex("element", elem=i))
        for i, name in enumerate(template.domain)
    )
    tuple_vid = {
        r: add(f"r:{_tuple_name(template, r)}", k + 2, DVertex("tuple", tup=r))
        for r in tuples
    }

    edges: list[tuple[int, int]] = []
    path_specs: dict[tuple[int, tuple[int, ...]], PathSpec] = {}
    path_vids: dict[tuple[int, tuple[int, ...]], tuple[int, ...]] = {}
    v_path: list[tuple[int, tuple[int, ...]] | None] = [None] * len(vertices)
    v_pos: list[int | None] = [None] * len(vertices)

    for a in range(len(template.domain)):
        aname = template.domain[a]
        for r in tuples:
            e = (a, r)
            spec = PathSpec(k, index_set(a, r))
            path_specs[e] = spec
            steps = spec.orientations()
            vids = [elem_vid[a]]
            level = 0
            for j, s in enumerate(steps[:-1], start=1):
                level += s
                vid = add(
                    f"p:{aname}|{_tuple_name(template, r)}|{j}",
                    level,
                    DVertex("internal", elem=a, tup=r, j=j),
                )
                v_path.append(e)
                v_pos.append(j)
                vids.append(vid)
            vids.append(tuple_vid[r])
            path_vids[e] = tuple(vids)
            for p, s in enumerate(steps):
                u, v = vids[p], vids[p + 1]
                edges.append((u, v) if s == 1 else (v, u))

    g = make_digraph(f"dg:{template.name}", vertices, edges, levels, prov)
    meta = TemplateDigraph(
        template=template,
        digraph=g,
        k=k,
        tuples=tuples,
        elem_vid=elem_vid,
        tuple_vid=tuple_vid,
        path_specs=path_specs,
        path_vids=path_vids,
        lvl=tuple(levels),
        v_path=tuple(v_path),
        v_pos=tuple(v_pos),
    )
    meta.out_nbrs = g.out_neighbours()
    meta.in_nbrs = g.in_neighbours()
    return meta


# ---------------------------------------------------------------------------
# Digraph file with provenance comments, so tools can reload the metadata.


def dmeta_to_text(meta: TemplateDigraph) -> str:
    g = meta.digraph
    out = [f"digraph {g.name}"]
    out.append(f"# template {meta.template.name}")
    out.append("# relation " + meta.template.relations[0].name)
    for i, v in enumerate(g.vertices):
        tag = g.provenance[i]
        if tag.kind == "element":
            note = f"element {meta.template.domain[tag.elem]}"
        elif tag.kind == "tuple":
            note = "tuple " + _tuple_name(meta.template, tag.tup)
        else:
            note = (
                f"internal {meta.template.domain[tag.elem]} "
                f"{_tuple_name(meta.template, tag.tup)} {tag.j}"
            )
        out.append(f"# provenance {v} level {g.levels[i]} {note}")
    for v in g.vertices:
        out.append(f"vertex {v}")
    for u, v in g.edges:
        out.append(f"edge {g.vertices[u]} {g.vertices[v]}")
    out.append("end")
    return "\n".join(out) + "\n"


def dmeta_from_text(text: str) -> TemplateDigraph:
    """Rebuild the full metadata from a provenance-annotated digraph file."""
    template_name = None
    relation_name = None
    elements: list[str] = []
    tuples: list[tuple[str, ...]] = []
    for raw in text.splitlines():
        body = raw.strip()
        if body.startswith("# template "):
            template_name = body.split(maxsplit=2)[2]
        elif body.startswith("# relation "):
            relation_name = body.split(maxsplit=2)[2]
        elif body.startswith("# provenance "):
            toks = body.split()
            note = toks[5:]
            if note[0] == "element" and note[1] not in elements:
                elements.append(note[1])
            elif note[0] == "tuple":
                t = tuple(note[1].split(","))
                if t not in tuples:
                    tuples.append(t)
    if template_name is None or relation_name is None or not tuples:
        raise ParseError("file carries no provenance metadata")
    k = len(tuples[0])
    template = make_structure(
        template_name,
        elements,
        [(relation_name, k, [tuple(elements.index(n) for n in t) for t in tuples])],
    )
    return build_digraph(template)
