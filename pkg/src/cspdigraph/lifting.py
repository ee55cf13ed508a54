"""Zigzag witnesses and the lifting of polymorphisms to the encoded digraph.

The zigzag 00->01<-10->11 carries a distributive lattice under the
order 00 < 01 < 10 < 11, which supplies witnesses for most identity
sets: meet/join, the median, the all-minimum operation for balanced
sets, and the pair p1/p2 chaining three congruence permutations.

An m-ary polymorphism of the template combines with an m-ary zigzag
witness into an m-ary polymorphism of the encoded digraph.  Inputs
split by the connected component of the m-th power they live in: on the
diagonal component the template operation dictates the target path and
the zigzag witness picks within a zigzag segment; everywhere else two
linear orders on the vertices make a uniform choice.  Both orders put
elements before interiors before tuples by level; they differ only in
how same-level interiors on different paths compare, element-major
versus tuple-major.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .builder import TemplateDigraph, segments_at_position
from .errors import (
    ArityMismatch,
    InternalInvariantViolation,
    NotAPolymorphism,
    NotEndomorphism,
    PreconditionError,
    ShapeViolation,
    ZigzagWitnessFails,
)
from .identities import IdentitySet, OpTable
from .solver import find_operations, is_hom, is_polymorphism, satisfies
from .structures import Digraph, make_digraph

Z_VERTICES = ("00", "01", "10", "11")
Z_EDGES = ((0, 1), (2, 1), (2, 3))
_LOW = (0, 2)  # vertices with an outgoing edge
_HIGH = (1, 3)


def zigzag() -> Digraph:
    return make_digraph("zigzag", Z_VERTICES, Z_EDGES)


def _zz_table(name: str, arity: int, fn) -> OpTable:
    values = tuple(
        fn(args) for args in itertools.product(range(4), repeat=arity)
    )
    table = OpTable(name, arity, 4, values)
    problem = zigzag_witness_problem(table)
    if problem:
        raise InternalInvariantViolation(f"{name}: {problem}")
    return table


def zigzag_witness_problem(op) -> str | None:
    """Why a table cannot serve as a zigzag witness, or None if it can.

    Idempotency is part of the contract: segment boundaries of a lifted
    operation are fixed points of constant tuples, so a non-idempotent
    witness would break the edge-preservation argument.
    """
    if not is_polymorphism(op, zigzag()):
        return "not a polymorphism of the zigzag"
    if any(op((x,) * op.arity) != x for x in range(4)):
        return "not idempotent"
    for block in (_LOW, _HIGH):
        for args in itertools.product(block, repeat=op.arity):
            if op(args) not in block:
                return "does not preserve the out-degree/in-degree classes"
    return None


def zz_meet() -> OpTable:
    return _zz_table("meet", 2, lambda a: min(a))


def zz_join() -> OpTable:
    return _zz_table("join", 2, lambda a: max(a))


def zz_median() -> OpTable:
    return _zz_table("median", 3, lambda a: sorted(a)[1])


def zz_allmin(arity: int) -> OpTable:
    return _zz_table("allmin", arity, lambda a: min(a))


def _p1(a):
    x, y, z = a
    if y != z and 1 in a:
        return 1
    if y != z and 2 in a:
        return 2
    return x


def _p2(a):
    x, y, z = a
    if x != y and 1 in a:
        return 1
    if x != y and 2 in a:
        return 2
    if x == y:
        return z
    return x


def zz_p1() -> OpTable:
    return _zz_table("p1", 3, _p1)


def zz_p2() -> OpTable:
    return _zz_table("p2", 3, _p2)


# ---------------------------------------------------------------------------
# The two linear orders


def order_key(meta: TemplateDigraph, variant: str = "ar"):
    """Total-order key on vertices; variant 'ar' is element-major on
    interior paths, 'ra' is tuple-major (the starred order)."""
    if variant not in ("ar", "ra"):
        raise PreconditionError(f"unknown order variant {variant!r}")
    tuple_rank = {r: i for i, r in enumerate(meta.tuples)}
    nr, na = len(meta.tuples), len(meta.template.domain)
    prov = meta.digraph.provenance

    def key(vid: int):
        tag = prov[vid]
        if tag.kind == "element":
            return (0, tag.elem, 0)
        if tag.kind == "tuple":
            return (meta.k + 2, tuple_rank[tag.tup], 0)
        a, r = meta.v_path[vid]
        if variant == "ar":
            path = a * nr + tuple_rank[r]
        else:
            path = tuple_rank[r] * na + a
        return (meta.lvl[vid], path, meta.v_pos[vid])

    return key


def order_less(meta: TemplateDigraph, x, y, variant: str = "ar") -> bool:
    """Strict comparison; accepts vertex names or indices."""
    key = order_key(meta, variant)
    vx = meta.digraph.vertex_index(x) if isinstance(x, str) else x
    vy = meta.digraph.vertex_index(y) if isinstance(y, str) else y
    return key(vx) < key(vy)


# ---------------------------------------------------------------------------
# The diagonal component of a power


def in_delta(meta: TemplateDigraph, c: tuple[int, ...]) -> bool:
    """Membership in the connected component of the diagonal of the power.

    Equal-level tuples sit there exactly when they have a common
    out-neighbour or a common in-neighbour direction; every other
    equal-level tuple is isolated in its power.
    """
    if len({meta.lvl[v] for v in c}) != 1:
        return False
    if all(meta.out_nbrs[v] for v in c):
        return True
    return all(meta.in_nbrs[v] for v in c)


def delta_bfs(meta: TemplateDigraph, m: int) -> set[tuple[int, ...]]:
    """Oracle: explicit search of the power from the diagonal."""
    nbr: dict[tuple[int, ...], list[tuple[int, ...]]] = {}
    start = [tuple([v] * m) for v in range(len(meta.digraph.vertices))]
    seen = set(start)
    stack = list(start)
    while stack:
        cur = stack.pop()
        steps = [meta.out_nbrs[v] for v in cur]
        for nxt in itertools.product(*steps):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
        steps = [meta.in_nbrs[v] for v in cur]
        for nxt in itertools.product(*steps):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


# ---------------------------------------------------------------------------
# Case analysis and the lifted operation


@dataclass
class CaseData:
    tag: str
    paths: tuple | None = None
    e: tuple | None = None
    l: int | None = None
    labels: tuple | None = None
    candidates: tuple | None = None


def _coordinatewise(meta: TemplateDigraph, f_a: OpTable, tuples):
    return tuple(
        f_a(tuple(t[j] for t in tuples)) for j in range(meta.k)
    )


def classify(
    meta: TemplateDigraph, c: tuple[int, ...], f_a: OpTable
) -> CaseData:
    prov = meta.digraph.provenance
    kinds = {prov[v].kind for v in c}
    if kinds == {"element"}:
        return CaseData("1a")
    if kinds == {"tuple"}:
        return CaseData("1b")
    if in_delta(meta, c):
        es = tuple(meta.v_path[v] for v in c)
        e_a = f_a(tuple(e[0] for e in es))
        e_r = _coordinatewise(meta, f_a, [e[1] for e in es])
        e = (e_a, e_r)
        common = None
        for v, ei in zip(c, es):
            segs = segments_at_position(meta.path_specs[ei], meta.v_pos[v])
            common = segs if common is None else common & segs
        if not common:
            raise InternalInvariantViolation(
                f"diagonal-component tuple {c} has no common segment"
            )
        l = min(common)
        if l in meta.path_specs[e].singles:
            return CaseData("2a", paths=es, e=e, l=l)
        zig = tuple(l not in meta.path_specs[ei].singles for ei in es)
        return CaseData("2b" if all(zig) else "2c", paths=es, e=e, l=l, labels=zig)
    levels = {meta.lvl[v] for v in c}
    if len(levels) == 1:
        carriers = {meta.v_path[v] for v in c}
        if len(carriers) == 2:
            return CaseData("3a", paths=tuple(sorted(carriers)))
        return CaseData("3c")
    if len(levels) == 2:
        return CaseData("3b", labels=tuple(sorted(levels)))
    return CaseData("3c")


class LiftedOp:
    """Sparse lifted operation over the encoded digraph's vertices.

    Values are computed per call from the case analysis; nothing the
    size of |D|^m is ever materialized.
    """

    def __init__(self, meta: TemplateDigraph, f_a: OpTable, f_z: OpTable):
        if f_a.arity != f_z.arity:
            raise ArityMismatch(
                f"template witness is {f_a.arity}-ary, zigzag witness {f_z.arity}-ary"
            )
        if f_a.size != len(meta.template.domain):
            raise ArityMismatch("template witness is over the wrong domain")
        if not is_polymorphism(f_a, meta.template):
            raise NotAPolymorphism(f"{f_a.name!r} does not preserve the relation")
        problem = zigzag_witness_problem(f_z)
        if problem:
            raise NotAPolymorphism(f"{f_z.name!r}: {problem}")
        self.meta = meta
        self.f_a = f_a
        self.f_z = f_z
        self.name = f"lift:{f_a.name}"
        self.arity = f_a.arity
        self.size = len(meta.digraph.vertices)
        self._key = order_key(meta, "ar")
        self._key_star = order_key(meta, "ra")

    def _segment_offset(self, vid: int, e, l: int) -> int:
        start = self.meta.path_specs[e].segment_positions(l)[0]
        return self.meta.v_pos[vid] - start

    def __call__(self, c: tuple[int, ...]) -> int:
        meta = self.meta
        case = classify(meta, c, self.f_a)
        if case.tag == "1a":
            elems = tuple(meta.digraph.provenance[v].elem for v in c)
            return meta.elem_vid[self.f_a(elems)]
        if case.tag == "1b":
            rows = [meta.digraph.provenance[v].tup for v in c]
            return meta.tuple_vid[_coordinatewise(meta, self.f_a, rows)]
        if case.tag in ("2a", "2b", "2c"):
            seg = meta.segment_vids(case.e, case.l)
            level = meta.lvl[c[0]]
            if case.tag == "2a":
                return seg[0] if meta.lvl[seg[0]] == level else seg[1]
            offsets = [
                self._segment_offset(v, ei, case.l) if zig else None
                for v, ei, zig in zip(c, case.paths, case.labels)
            ]
            if case.tag == "2b":
                return seg[self.f_z(tuple(offsets))]
            candidates = {seg[o] for o in offsets if o is not None}
            return min(candidates, key=self._key)
        if case.tag == "3a":
            low, high = case.paths
            labels = tuple(0 if meta.v_path[v] == low else 2 for v in c)
            z = self.f_z(labels)
            chosen = {v for v, lab in zip(c, labels) if lab == z}
            return min(chosen, key=self._key)
        if case.tag == "3b":
            lo, hi = case.labels
            labels = tuple(0 if meta.lvl[v] == lo else 2 for v in c)
            z = self.f_z(labels)
            chosen = {v for v, lab in zip(c, labels) if lab == z}
            if z == 0:
                return min(chosen, key=self._key)
            return max(chosen, key=self._key_star)
        return min(set(c), key=self._key)


def lift_op(meta: TemplateDigraph, f_a: OpTable, f_z: OpTable) -> LiftedOp:
    """Lift a template polymorphism along a zigzag witness of equal arity."""
    return LiftedOp(meta, f_a, f_z)


# ---------------------------------------------------------------------------
# Whole identity sets, with exhaustive verification


@dataclass
class LiftReport:
    tables: dict[str, LiftedOp]
    lines: list[str] = field(default_factory=list)
    ok: bool = True

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def lift_all(
    meta: TemplateDigraph,
    sigma: IdentitySet,
    witnesses_a: dict[str, OpTable],
    witnesses_z: dict[str, OpTable] | None = None,
) -> LiftReport:
    """Lift witnesses for a whole identity set and verify the results.

    The set must be linear and explicitly idempotent, with every
    identity balanced or in at most two variables.  Zigzag witnesses are
    searched for automatically when not supplied.
    """
    sigma.ensure_linear()
    problem = sigma.liftable_shape()
    if problem:
        raise ShapeViolation(problem)
    arity = dict(sigma.symbols)
    for name in arity:
        if name not in witnesses_a:
            raise PreconditionError(f"missing template witness for {name!r}")
    if not satisfies(witnesses_a, sigma, len(meta.template.domain)):
        raise PreconditionError("template witnesses do not satisfy the identity set")

    if witnesses_z is None:
        witnesses_z = find_operations(zigzag(), sigma)
        if witnesses_z is None:
            raise ZigzagWitnessFails("the zigzag does not satisfy this identity set")
    for name, op in witnesses_z.items():
        bad = zigzag_witness_problem(op)
        if bad:
            raise ZigzagWitnessFails(f"{name!r}: {bad}")
    if not satisfies(witnesses_z, sigma, 4):
        raise ZigzagWitnessFails("zigzag witnesses do not satisfy the identity set")

    report = LiftReport({})
    for name in arity:
        report.tables[name] = lift_op(meta, witnesses_a[name], witnesses_z[name])
    target = meta.digraph.as_structure("template")
    for name, op in report.tables.items():
        good = is_polymorphism(op, target)
        report.lines.append(
            f"polymorphism {name}: {'ok' if good else 'FAIL'} "
            f"({len(meta.digraph.edges)}^{op.arity} edge tuples)"
        )
        report.ok = report.ok and good
    for ident in sigma.identities:
        good = satisfies(
            report.tables,
            IdentitySet(sigma.symbols, (ident,)),
            len(meta.digraph.vertices),
        )
        report.lines.append(f"identity {ident}: {'ok' if good else 'FAIL'}")
        report.ok = report.ok and good
    return report


# ---------------------------------------------------------------------------
# Endomorphism transfer


def _path_position_map(meta: TemplateDigraph, e, e_target) -> dict[int, int]:
    """Positions of one connecting path onto another with more singles."""
    spec_s = meta.path_specs[e]
    spec_t = meta.path_specs[e_target]
    if not spec_s.singles <= spec_t.singles:
        raise NotEndomorphism("image path misses a single edge of the source")
    mapping = {0: 0, 1: 1}
    ps, pt = 1, 1
    for l in range(1, meta.k + 1):
        ws = 1 if l in spec_s.singles else 3
        wt = 1 if l in spec_t.singles else 3
        if ws == wt:
            offsets = {o: o for o in range(ws + 1)}
        else:  # zigzag folds onto a single edge
            offsets = {0: 0, 1: 1, 2: 0, 3: 1}
        for o_s, o_t in offsets.items():
            mapping[ps + o_s] = pt + o_t
        ps += ws
        pt += wt
    mapping[ps + 1] = pt + 1
    return mapping


def lift_endomorphism(meta: TemplateDigraph, phi: dict[str, str]) -> dict[str, str]:
    """Extend an endomorphism of the template over the whole digraph."""
    if not is_hom(meta.template, meta.template, phi):
        raise NotEndomorphism("the map does not preserve the relation")
    dom = meta.template.domain
    fi = {dom.index(a): dom.index(b) for a, b in phi.items()}
    names = meta.digraph.vertices
    out: dict[str, str] = {}
    for a in range(len(dom)):
        out[names[meta.elem_vid[a]]] = names[meta.elem_vid[fi[a]]]
    for r in meta.tuples:
        image = tuple(fi[x] for x in r)
        out[names[meta.tuple_vid[r]]] = names[meta.tuple_vid[image]]
    for (a, r), vids in meta.path_vids.items():
        target = (fi[a], tuple(fi[x] for x in r))
        pos_map = _path_position_map(meta, (a, r), target)
        target_vids = meta.path_vids[target]
        for pos in range(1, len(vids) - 1):
            out[names[vids[pos]]] = names[target_vids[pos_map[pos]]]
    return out


def restrict_endomorphism(meta: TemplateDigraph, big: dict[str, str]) -> dict[str, str]:
    """Restrict an endomorphism of the digraph to the element vertices."""
    if not is_hom(meta.digraph, meta.digraph, big):
        raise NotEndomorphism("the map does not preserve the edges")
    out = {}
    for a, name in enumerate(meta.template.domain):
        image = big[meta.digraph.vertices[meta.elem_vid[a]]]
        if not image.startswith("a:"):
            raise NotEndomorphism("an element vertex leaves the element level")
        out[name] = image[2:]
    return out
