"""Relational structures, digraphs, and their file formats.

Structure files are line oriented; ``#`` starts a comment, tokens are
whitespace separated::

    structure <name>          (or: instance <name>)
    blocks <k1> <k2> ...      (optional, written by the merge step)
    domain <e1> ... <em>
    relation <Rname> <arity>
    tuple <e_i1> ... <e_ik>
    ...
    end

Digraph files::

    digraph <name>
    vertex <v>
    edge <u> <v>
    end

All models are immutable after construction.  Element order in a file is
the canonical order used everywhere downstream, so parsing and
serialization are exact inverses.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Literal, Sequence

from .errors import NonemptyRelationRequired, ParseError

Role = Literal["template", "instance"]


@dataclass(frozen=True)
class Relation:
    name: str
    arity: int
    tuples: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class RelStructure:
    """A finite relational structure over named elements.

    ``role`` distinguishes templates (all relations must be nonempty)
    from instances (empty relations are fine).  ``block_arities``
    remembers the original signature after a merge so that the merged
    file is self-contained.
    """

    name: str
    domain: tuple[str, ...]
    relations: tuple[Relation, ...]
    role: Role = "template"
    block_arities: tuple[int, ...] | None = None

    def __post_init__(self):
        if len(set(self.domain)) != len(self.domain):
            raise ParseError(f"duplicate element name in {self.name!r}")
        if not self.domain:
            raise ParseError(f"empty domain in {self.name!r}")
        names = [r.name for r in self.relations]
        if len(set(names)) != len(names):
            raise ParseError(f"duplicate relation name in {self.name!r}")
        if not self.relations:
            raise ParseError(f"empty signature in {self.name!r}")
        m = len(self.domain)
        for rel in self.relations:
            for t in rel.tuples:
                if len(t) != rel.arity:
                    raise ParseError(
                        f"tuple {t} has length {len(t)}, relation "
                        f"{rel.name!r} has arity {rel.arity}"
                    )
                if any(i < 0 or i >= m for i in t):
                    raise ParseError(f"tuple {t} out of range in {rel.name!r}")
            if self.role == "template" and not rel.tuples:
                raise NonemptyRelationRequired(
                    f"relation {rel.name!r} of template {self.name!r} is empty"
                )

    @property
    def is_instance(self) -> bool:
        return self.role == "instance"

    def element_index(self, name: str) -> int:
        try:
            return self.domain.index(name)
        except ValueError:
            raise ParseError(f"unknown element name {name!r}") from None

    def signature(self) -> tuple[tuple[str, int], ...]:
        return tuple((r.name, r.arity) for r in self.relations)

    def relation(self, name: str) -> Relation:
        for r in self.relations:
            if r.name == name:
                return r
        raise ParseError(f"unknown relation {name!r}")


def make_structure(
    name: str,
    domain: Sequence[str],
    relations: Iterable[tuple[str, int, Iterable[Sequence[int]]]],
    role: Role = "template",
    block_arities: Sequence[int] | None = None,
) -> RelStructure:
    """Build a structure from index tuples, deduplicating silently."""
    rels = []
    for rname, arity, tuples in relations:
        seen: dict[tuple[int, ...], None] = {}
        for t in tuples:
            seen.setdefault(tuple(t), None)
        rels.append(Relation(rname, arity, tuple(seen)))
    return RelStructure(
        name,
        tuple(domain),
        tuple(rels),
        role,
        tuple(block_arities) if block_arities is not None else None,
    )


@dataclass(frozen=True)
class DVertex:
    """Provenance tag for a vertex of a built digraph.

    kind is "element", "tuple" or "internal"; internal vertices carry
    the element index, the tuple, and the 1-based distance from the
    element end of their connecting path.
    """

    kind: str
    elem: int | None = None
    tup: tuple[int, ...] | None = None
    j: int | None = None


@dataclass(frozen=True)
class Digraph:
    name: str
    vertices: tuple[str, ...]
    edges: tuple[tuple[int, int], ...]
    levels: tuple[int, ...] | None = None
    provenance: tuple[DVertex, ...] | None = None

    def __post_init__(self):
        if len(set(self.vertices)) != len(self.vertices):
            raise ParseError(f"duplicate vertex name in {self.name!r}")
        n = len(self.vertices)
        seen = set()
        for u, v in self.edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ParseError(f"edge ({u},{v}) out of range in {self.name!r}")
            if (u, v) in seen:
                raise ParseError(f"duplicate edge ({u},{v}) in {self.name!r}")
            seen.add((u, v))
        if self.levels is not None:
            if len(self.levels) != n:
                raise ParseError("level map does not cover all vertices")
            for u, v in self.edges:
                if self.levels[v] != self.levels[u] + 1:
                    raise ParseError(
                        f"edge {self.vertices[u]}->{self.vertices[v]} does not "
                        "increment the level by one"
                    )
        if self.provenance is not None and len(self.provenance) != n:
            raise ParseError("provenance does not cover all vertices")

    def vertex_index(self, name: str) -> int:
        try:
            return self.vertices.index(name)
        except ValueError:
            raise ParseError(f"unknown vertex {name!r}") from None

    def out_neighbours(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in self.vertices]
        for u, v in self.edges:
            out[u].append(v)
        return out

    def in_neighbours(self) -> list[list[int]]:
        inn: list[list[int]] = [[] for _ in self.vertices]
        for u, v in self.edges:
            inn[v].append(u)
        return inn

    def induced(self, vertex_ids: Sequence[int], name: str | None = None) -> "Digraph":
        """Induced subgraph, keeping vertex names and relative order."""
        ids = sorted(set(vertex_ids))
        remap = {v: i for i, v in enumerate(ids)}
        return Digraph(
            name or self.name,
            tuple(self.vertices[v] for v in ids),
            tuple(
                (remap[u], remap[v])
                for u, v in self.edges
                if u in remap and v in remap
            ),
            levels=tuple(self.levels[v] for v in ids) if self.levels else None,
        )

    def as_structure(self, role: Role = "instance") -> RelStructure:
        """View the digraph as a structure with one binary relation E."""
        return make_structure(
            self.name, self.vertices, [("E", 2, self.edges)], role=role
        )


def make_digraph(
    name: str,
    vertices: Sequence[str],
    edges: Iterable[tuple[int, int]],
    levels: Sequence[int] | None = None,
    provenance: Sequence[DVertex] | None = None,
) -> Digraph:
    """Build a digraph from index edges, deduplicating silently."""
    seen: dict[tuple[int, int], None] = {}
    for e in edges:
        seen.setdefault((e[0], e[1]), None)
    return Digraph(
        name,
        tuple(vertices),
        tuple(seen),
        tuple(levels) if levels is not None else None,
        tuple(provenance) if provenance is not None else None,
    )


# ---------------------------------------------------------------------------
# Parsing


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            yield lineno, body.split()


def parse_structure(text: str) -> RelStructure:
    lines = list(_lines(text))
    if not lines:
        raise ParseError("empty structure file")
    lineno, head = lines[0]
    if head[0] not in ("structure", "instance") or len(head) != 2:
        raise ParseError("expected 'structure <name>' or 'instance <name>'", lineno)
    role: Role = "template" if head[0] == "structure" else "instance"
    name = head[1]

    domain: list[str] | None = None
    blocks: list[int] | None = None
    relations: list[tuple[str, int, list[tuple[int, ...]]]] = []
    ended = False
    for lineno, toks in lines[1:]:
        if ended:
            raise ParseError("content after 'end'", lineno)
        kw = toks[0]
        if kw == "domain":
            if domain is not None:
                raise ParseError("second 'domain' line", lineno)
            if len(toks) < 2:
                raise ParseError("empty domain", lineno)
            domain = toks[1:]
        elif kw == "blocks":
            try:
                blocks = [int(t) for t in toks[1:]]
            except ValueError:
                raise ParseError("blocks line must list arities", lineno) from None
        elif kw == "relation":
            if len(toks) != 3:
                raise ParseError("expected 'relation <name> <arity>'", lineno)
            try:
                arity = int(toks[2])
            except ValueError:
                raise ParseError(f"bad arity {toks[2]!r}", lineno) from None
            if arity < 1:
                raise ParseError("arity must be positive", lineno)
            relations.append((toks[1], arity, []))
        elif kw == "tuple":
            if not relations:
                raise ParseError("'tuple' before any 'relation'", lineno)
            if domain is None:
                raise ParseError("'tuple' before 'domain'", lineno)
            rname, arity, tuples = relations[-1]
            if len(toks) - 1 != arity:
                raise ParseError(
                    f"tuple has {len(toks) - 1} entries, relation {rname!r} "
                    f"has arity {arity}",
                    lineno,
                )
            idx = []
            for t in toks[1:]:
                if t not in domain:
                    raise ParseError(f"unknown element name {t!r}", lineno)
                idx.append(domain.index(t))
            tuples.append(tuple(idx))
        elif kw == "end":
            ended = True
        else:
            raise ParseError(f"unknown keyword {kw!r}", lineno)
    if not ended:
        raise ParseError("missing 'end'")
    if domain is None:
        raise ParseError("missing 'domain'")
    return make_structure(name, domain, relations, role=role, block_arities=blocks)


def serialize_structure(s: RelStructure) -> str:
    out = [f"{'structure' if s.role == 'template' else 'instance'} {s.name}"]
    if s.block_arities is not None:
        out.append("blocks " + " ".join(str(k) for k in s.block_arities))
    out.append("domain " + " ".join(s.domain))
    for rel in s.relations:
        out.append(f"relation {rel.name} {rel.arity}")
        for t in rel.tuples:
            out.append("tuple " + " ".join(s.domain[i] for i in t))
    out.append("end")
    return "\n".join(out) + "\n"


def parse_digraph(text: str) -> Digraph:
    lines = list(_lines(text))
    if not lines:
        raise ParseError("empty digraph file")
    lineno, head = lines[0]
    if head[0] != "digraph" or len(head) != 2:
        raise ParseError("expected 'digraph <name>'", lineno)
    name = head[1]
    vertices: list[str] = []
    index: dict[str, int] = {}
    edges: list[tuple[int, int]] = []
    ended = False
    for lineno, toks in lines[1:]:
        if ended:
            raise ParseError("content after 'end'", lineno)
        kw = toks[0]
        if kw == "vertex":
            if len(toks) != 2:
                raise ParseError("expected 'vertex <v>'", lineno)
            if toks[1] in index:
                raise ParseError(f"duplicate vertex {toks[1]!r}", lineno)
            index[toks[1]] = len(vertices)
            vertices.append(toks[1])
        elif kw == "edge":
            if len(toks) != 3:
                raise ParseError("expected 'edge <u> <v>'", lineno)
            for t in toks[1:]:
                if t not in index:
                    raise ParseError(f"unknown vertex {t!r}", lineno)
            edges.append((index[toks[1]], index[toks[2]]))
        elif kw == "end":
            ended = True
        else:
            raise ParseError(f"unknown keyword {kw!r}", lineno)
    if not ended:
        raise ParseError("missing 'end'")
    return make_digraph(name, vertices, edges)


def serialize_digraph(g: Digraph) -> str:
    out = [f"digraph {g.name}"]
    for v in g.vertices:
        out.append(f"vertex {v}")
    for u, v in g.edges:
        out.append(f"edge {g.vertices[u]} {g.vertices[v]}")
    out.append("end")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Canonical comparisons

CompareKind = Literal["element", "tuple-lex", "A×R-lex", "R×A-lex"]


def canonical_compare(s: RelStructure, x, y, kind: str) -> int:
    """Strict total comparison; returns -1, 0 or 1.

    element: element names in declaration order.
    tuple-lex: tuples of element names, lexicographic by element index.
    A×R-lex: (element, tuple) pairs, element first.
    R×A-lex: (tuple, element) pairs, tuple first.
    """

    def elem_key(name):
        return s.element_index(name)

    def tup_key(t):
        return tuple(s.element_index(n) for n in t)

    if kind == "element":
        kx, ky = elem_key(x), elem_key(y)
    elif kind == "tuple-lex":
        kx, ky = tup_key(x), tup_key(y)
    elif kind == "A×R-lex":
        kx = (elem_key(x[0]), tup_key(x[1]))
        ky = (elem_key(y[0]), tup_key(y[1]))
    elif kind == "R×A-lex":
        kx = (tup_key(x[0]), elem_key(x[1]))
        ky = (tup_key(y[0]), elem_key(y[1]))
    else:
        raise ParseError(f"unknown comparison kind {kind!r}")
    return (kx > ky) - (kx < ky)


# ---------------------------------------------------------------------------
# DOT export


def export_dot(g: Digraph) -> str:
    """One DOT digraph; vertices grouped by level when levels exist."""
    out = [f'digraph "{g.name}" {{']
    if g.levels is not None:
        by_level: dict[int, list[str]] = {}
        for i, v in enumerate(g.vertices):
            by_level.setdefault(g.levels[i], []).append(v)
        for lvl in sorted(by_level):
            members = " ".join(f'"{v}";' for v in by_level[lvl])
            out.append(f"  {{ rank=same; {members} }}")
    for v in g.vertices:
        out.append(f'  "{v}";')
    for u, v in g.edges:
        out.append(f'  "{g.vertices[u]}" -> "{g.vertices[v]}";')
    out.append("}")
    return "\n".join(out) + "\n"
