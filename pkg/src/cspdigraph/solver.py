"""Complete homomorphism search between finite relational structures.

Backtracking over a smallest-domain-first variable order with
generalized arc consistency maintained on every relation constraint.
Domains are bitmasks over target elements, so propagation is cheap even
for a few hundred candidate values.  The search is deterministic: ties
break on variable index and values are tried in target declaration
order, which keeps every downstream artifact byte-reproducible.

Each search owns its mutable state; structures themselves are never
modified, so concurrent searches over shared inputs are safe.
"""

from __future__ import annotations

import itertools
from typing import Iterator, Mapping, Sequence

from .builder import PathSpec, build_path
from .errors import (
    ArityMismatch,
    NonlinearIdentity,
    SignatureMismatch,
    UnbalancedInput,
)
from .identities import IdentitySet, OpTable
from .structures import Digraph, RelStructure, make_structure

Hom = dict[str, str]
Restriction = Mapping[str, Sequence[str]]


def _as_structure(x, role):
    return x.as_structure(role) if isinstance(x, Digraph) else x


class _Constraint:
    __slots__ = ("scope", "tuples")

    def __init__(self, scope: tuple[int, ...], tuples: Sequence[tuple[int, ...]]):
        self.scope = scope
        self.tuples = tuples


class _Search:
    def __init__(
        self,
        source: RelStructure,
        target: RelStructure,
        restriction: Restriction | None = None,
        propagate: bool = True,
    ):
        if dict(source.signature()) != dict(target.signature()):
            raise SignatureMismatch(
                f"signatures differ: {source.signature()} vs {target.signature()}"
            )
        self.source = source
        self.target = target
        self.propagate = propagate
        self.n_vars = len(source.domain)
        self.n_vals = len(target.domain)
        full = (1 << self.n_vals) - 1

        self.domains = [full] * self.n_vars
        if restriction:
            for name, allowed in restriction.items():
                mask = 0
                for el in allowed:
                    mask |= 1 << target.element_index(el)
                self.domains[source.element_index(name)] = mask

        self.constraints: list[_Constraint] = []
        for rel in source.relations:
            targets = target.relation(rel.name).tuples
            for t in rel.tuples:
                self.constraints.append(_Constraint(t, targets))
        self.by_var: list[list[int]] = [[] for _ in range(self.n_vars)]
        for ci, c in enumerate(self.constraints):
            for v in set(c.scope):
                self.by_var[v].append(ci)
        self.degree = [len(self.by_var[v]) for v in range(self.n_vars)]

    # -- propagation ------------------------------------------------------

    def _revise(self, c: _Constraint) -> list[int] | None:
        """Prune unsupported values; returns changed vars or None on wipeout."""
        doms = self.domains
        support = [0] * len(c.scope)
        for t in c.tuples:
            for pos, val in zip(c.scope, t):
                if not doms[pos] >> val & 1:
                    break
            else:
                for i, val in enumerate(t):
                    support[i] |= 1 << val
        changed = []
        for i, var in enumerate(c.scope):
            new = doms[var] & support[i]
            if new != doms[var]:
                if new == 0:
                    return None
                doms[var] = new
                changed.append(var)
        return changed

    def _achieve_gac(self, queue: list[int]) -> bool:
        pending = set(queue)
        while pending:
            ci = pending.pop()
            changed = self._revise(self.constraints[ci])
            if changed is None:
                return False
            # re-enqueue the constraint itself too: supports were computed
            # against pre-revision domains, so its own pruning can
            # invalidate them (repeated variables make this visible)
            for var in changed:
                pending.update(self.by_var[var])
        return True

    def _check_assigned(self) -> bool:
        """Plain consistency check used when propagation is disabled."""
        doms = self.domains
        for c in self.constraints:
            if any(doms[v].bit_count() != 1 for v in c.scope):
                continue
            vals = tuple(doms[v].bit_length() - 1 for v in c.scope)
            if vals not in set(c.tuples):
                return False
        return True

    # -- search -----------------------------------------------------------

    def _pick(self) -> int | None:
        best = None
        best_key = None
        for v in range(self.n_vars):
            size = self.domains[v].bit_count()
            if size > 1:
                key = (size, -self.degree[v], v)
                if best_key is None or key < best_key:
                    best, best_key = v, key
        return best

    def _values(self, mask: int) -> Iterator[int]:
        while mask:
            low = mask & -mask
            yield low.bit_length() - 1
            mask ^= low

    def solutions(self) -> Iterator[Hom]:
        if any(d == 0 for d in self.domains):
            return
        if self.propagate:
            if not self._achieve_gac(list(range(len(self.constraints)))):
                return
        yield from self._dfs()

    def _dfs(self) -> Iterator[Hom]:
        var = self._pick()
        if var is None:
            if self.propagate or self._check_assigned():
                yield self._extract()
            return
        saved = list(self.domains)
        for val in self._values(saved[var]):
            self.domains[var] = 1 << val
            ok = True
            if self.propagate:
                ok = self._achieve_gac(list(self.by_var[var]))
            elif not self._check_assigned():
                ok = False
            if ok:
                yield from self._dfs()
            self.domains[:] = saved

    def _extract(self) -> Hom:
        return {
            self.source.domain[v]: self.target.domain[self.domains[v].bit_length() - 1]
            for v in range(self.n_vars)
        }


# ---------------------------------------------------------------------------
# Public operations


def _is_empty(source) -> bool:
    return isinstance(source, Digraph) and not source.vertices


def find_hom(source, target, restriction=None, propagate=True) -> Hom | None:
    """One homomorphism respecting the restriction, or None if none exists."""
    if _is_empty(source):
        return {}
    s = _as_structure(source, "instance")
    t = _as_structure(target, "template")
    for hom in _Search(s, t, restriction, propagate).solutions():
        return hom
    return None


def enumerate_homs(source, target, restriction=None) -> Iterator[Hom]:
    """All homomorphisms, duplicate-free, in deterministic order."""
    if _is_empty(source):
        return iter([{}])
    s = _as_structure(source, "instance")
    t = _as_structure(target, "template")
    return _Search(s, t, restriction).solutions()


def is_hom(source, target, mapping: Mapping[str, str]) -> bool:
    """Check a candidate map against the raw preservation definition."""
    s = _as_structure(source, "instance")
    t = _as_structure(target, "template")
    img = {s.element_index(a): t.element_index(b) for a, b in mapping.items()}
    if len(img) != len(s.domain):
        return False
    for rel in s.relations:
        allowed = set(t.relation(rel.name).tuples)
        for tup in rel.tuples:
            if tuple(img[i] for i in tup) not in allowed:
                return False
    return True


def endomorphisms(structure) -> list[Hom]:
    s = _as_structure(structure, "template")
    return list(enumerate_homs(s, s))


def is_core(structure) -> bool:
    """True iff every endomorphism is surjective (complete search)."""
    s = _as_structure(structure, "template")
    for avoided in s.domain:
        rest = {x: [y for y in s.domain if y != avoided] for x in s.domain}
        if find_hom(s, s, rest) is not None:
            return False
    return True


def _idempotent_power(mapping: Hom) -> Hom:
    power = dict(mapping)
    while any(power[power[x]] != power[x] for x in power):
        power = {x: mapping[power[x]] for x in power}
    return power


def _induced_on(s: RelStructure, keep: list[str]) -> RelStructure:
    idx = [s.element_index(x) for x in keep]
    remap = {old: new for new, old in enumerate(idx)}
    rels = []
    for rel in s.relations:
        rels.append(
            (
                rel.name,
                rel.arity,
                [
                    tuple(remap[i] for i in t)
                    for t in rel.tuples
                    if all(i in remap for i in t)
                ],
            )
        )
    return make_structure(s.name, keep, rels, role=s.role)


def core_of(structure) -> RelStructure:
    """The induced substructure of minimum size that the input retracts onto."""
    s = _as_structure(structure, "template")
    while True:
        witness = None
        for avoided in s.domain:
            rest = {x: [y for y in s.domain if y != avoided] for x in s.domain}
            witness = find_hom(s, s, rest)
            if witness is not None:
                break
        if witness is None:
            return s
        retraction = _idempotent_power(witness)
        image = [x for x in s.domain if retraction[x] == x]
        s = _induced_on(s, image)


# ---------------------------------------------------------------------------
# Operation search (the indicator construction)


def _cells(symbols: Sequence[tuple[str, int]], n: int):
    order = []
    for name, arity in symbols:
        for args in itertools.product(range(n), repeat=arity):
            order.append((name, args))
    return order


def find_operations(
    structure,
    sigma: IdentitySet,
    arities: Mapping[str, int] | None = None,
) -> dict[str, OpTable] | None:
    """Search for operation tables witnessing a linear identity set.

    Every table cell is a variable of one big instance: identities merge
    cells (or pin them to constants), and preservation of each relation
    contributes one constraint per choice of input tuples.  Solving that
    instance against the structure itself yields the tables, and a None
    answer is a proof that no witnesses exist.
    """
    s = _as_structure(structure, "template")
    sigma.ensure_linear()
    n = len(s.domain)
    symbols = tuple(
        (name, arities[name] if arities else ar) for name, ar in sigma.symbols
    )
    sym_arity = dict(symbols)

    cells = _cells(symbols, n)
    cell_id = {c: i for i, c in enumerate(cells)}

    parent = list(range(len(cells)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i, j):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    constant: dict[int, int] = {}

    def eval_side(term, env):
        if term.symbol is None:
            return ("const", env[term.args[0]])
        if term.symbol not in sym_arity:
            raise NonlinearIdentity(f"unknown symbol {term.symbol!r}")
        if len(term.args) != sym_arity[term.symbol]:
            raise ArityMismatch(f"{term.symbol!r} used with wrong arity")
        return ("cell", cell_id[(term.symbol, tuple(env[v] for v in term.args))])

    pending_consts: list[tuple[int, int]] = []
    for ident in sigma.identities:
        variables = sorted(ident.variables())
        for values in itertools.product(range(n), repeat=len(variables)):
            env = dict(zip(variables, values))
            lhs = eval_side(ident.lhs, env)
            rhs = eval_side(ident.rhs, env)
            if lhs[0] == "cell" and rhs[0] == "cell":
                union(lhs[1], rhs[1])
            elif lhs[0] == "cell":
                pending_consts.append((lhs[1], rhs[1]))
            elif rhs[0] == "cell":
                pending_consts.append((rhs[1], lhs[1]))
            elif lhs[1] != rhs[1]:
                return None
    for cell, value in pending_consts:
        root = find(cell)
        if constant.setdefault(root, value) != value:
            return None

    reps = sorted({find(i) for i in range(len(cells))})
    var_name = {r: f"c{r}" for r in reps}
    rel_tuples: dict[str, list[tuple[int, ...]]] = {r.name: [] for r in s.relations}
    rep_pos = {r: i for i, r in enumerate(reps)}
    for rel in s.relations:
        for name, arity in symbols:
            for combo in itertools.product(rel.tuples, repeat=arity):
                row = tuple(
                    rep_pos[find(cell_id[(name, tuple(t[j] for t in combo))])]
                    for j in range(rel.arity)
                )
                rel_tuples[rel.name].append(row)

    indicator = make_structure(
        "indicator",
        [var_name[r] for r in reps],
        [(rn, s.relation(rn).arity, rows) for rn, rows in rel_tuples.items()],
        role="instance",
    )
    restriction = {
        var_name[root]: [s.domain[value]] for root, value in constant.items()
    }
    hom = find_hom(indicator, s, restriction)
    if hom is None:
        return None

    tables: dict[str, OpTable] = {}
    for name, arity in symbols:
        values = []
        for args in itertools.product(range(n), repeat=arity):
            rep = find(cell_id[(name, args)])
            values.append(s.element_index(hom[var_name[rep]]))
        tables[name] = OpTable(name, arity, n, tuple(values))
    return tables


def is_polymorphism(op, structure) -> bool:
    """Exhaustive preservation check over all tuple combinations."""
    s = _as_structure(structure, "template")
    if op.size != len(s.domain):
        raise ArityMismatch("operation domain does not match the structure")
    for rel in s.relations:
        allowed = set(rel.tuples)
        for combo in itertools.product(rel.tuples, repeat=op.arity):
            image = tuple(
                op(tuple(t[j] for t in combo)) for j in range(rel.arity)
            )
            if image not in allowed:
                return False
    return True


def satisfies(tables: Mapping[str, OpTable], sigma: IdentitySet, size: int) -> bool:
    """Check every identity of the set over all evaluations."""

    def eval_side(term, env):
        if term.symbol is None:
            return env[term.args[0]]
        return tables[term.symbol](tuple(env[v] for v in term.args))

    for ident in sigma.identities:
        variables = sorted(ident.variables())
        for values in itertools.product(range(size), repeat=len(variables)):
            env = dict(zip(variables, values))
            if eval_side(ident.lhs, env) != eval_side(ident.rhs, env):
                return False
    return True


# ---------------------------------------------------------------------------
# Level-restricted interpretability into connecting paths


def interpretable_at_levels(
    h: Digraph,
    level_of: Mapping[str, int],
    spec: PathSpec,
    anchors: Mapping[str, str] | None = None,
) -> bool:
    """Is there a hom into the spec's path sending each vertex to its level?

    Anchors pin vertices to named path vertices ("iota"/"tau" or a
    concrete q<i> name) on top of the level restriction.
    """
    for u, v in h.edges:
        if level_of[h.vertices[v]] != level_of[h.vertices[u]] + 1:
            raise UnbalancedInput(
                f"edge {h.vertices[u]}->{h.vertices[v]} violates the level map"
            )
    path = build_path(spec)
    by_level: dict[int, list[str]] = {}
    for i, name in enumerate(path.vertices):
        by_level.setdefault(path.levels[i], []).append(name)
    last = len(path.vertices) - 1
    named = {"iota": path.vertices[0], "tau": path.vertices[last]}
    restriction: dict[str, list[str]] = {}
    for v in h.vertices:
        restriction[v] = by_level.get(level_of[v], [])
    if anchors:
        for v, target in anchors.items():
            restriction[v] = [named.get(target, target)]
    return find_hom(h, path, restriction) is not None
