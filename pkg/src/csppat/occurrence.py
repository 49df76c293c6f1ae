"""Renamings, contextual homomorphisms, and the occurrence relation between patterns."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .errors import (
    IllegalMerge,
    IncomparableMerge,
    IncompatibleContext,
    NotHomomorphic,
    ValidationError,
)
from .model import (
    FALSE,
    TRUE,
    UNDEFINED,
    ConstraintPattern,
    Context,
    CspInstance,
    CspPattern,
    TruthValue,
    canonical_scope,
    truth_join,
    truth_leq,
)


@dataclass(frozen=True)
class Renaming:
    """A variable map s plus a point map t: (source variable, source value) -> target value."""

    var_map: tuple
    point_map: dict = field(hash=False)

    def image_point(self, var: int, val: int) -> tuple:
        return (self.var_map[var], self.point_map[(var, val)])


@dataclass(frozen=True)
class TargetSpace:
    """The (variables, value sets, context) triple a renaming maps into."""

    num_variables: int
    values_per_variable: tuple
    context: Context

    @classmethod
    def of(cls, pattern: CspPattern) -> "TargetSpace":
        return cls(pattern.num_variables, pattern.values_per_variable, pattern.context)


@dataclass(frozen=True)
class Occurrence:
    """A witness renaming plus the scope correspondence it induces."""

    renaming: Renaming
    target_scopes: dict = field(hash=False)


@dataclass(frozen=True)
class ForbidsResult:
    """Outcome of a forbids() check; falsy when some pattern occurs."""

    forbids: bool
    pattern_index: Optional[int] = None
    witness: Optional[Occurrence] = None

    def __bool__(self) -> bool:
        return self.forbids


def _constraint_needs(c: ConstraintPattern) -> tuple:
    tvs = {tv for _, tv in c.entries}
    return (FALSE in tvs, TRUE in tvs)


class _PatternView:
    """Target adapter exposing a pattern's structure to the search."""

    def __init__(self, pat: CspPattern) -> None:
        self.num_variables = pat.num_variables
        self._scope_map = {c.scope: c for c in pat.constraints}
        self._values = tuple(tuple(range(k)) for k in pat.values_per_variable)
        ctx = pat.context
        self.var_pos = (
            {v: i for i, v in enumerate(ctx.var_order)} if ctx.var_order is not None else None
        )
        self.value_ordered = ctx.value_order
        f_adj = {v: set() for v in range(pat.num_variables)}
        t_adj = {v: set() for v in range(pat.num_variables)}
        for c in pat.constraints:
            u, v = c.scope
            has_f, has_t = _constraint_needs(c)
            if has_f:
                f_adj[u].add(v)
                f_adj[v].add(u)
            if has_t:
                t_adj[u].add(v)
                t_adj[v].add(u)
        self._f_adj = {v: frozenset(ws) for v, ws in f_adj.items()}
        self._t_adj = {v: frozenset(ws) for v, ws in t_adj.items()}

    def candidate_values(self, w: int) -> tuple:
        return self._values[w]

    def value_rank(self, w: int, val: int) -> int:
        return val

    def f_neighbors(self, w: int) -> frozenset:
        return self._f_adj[w]

    def t_neighbors(self, w: int) -> Optional[frozenset]:
        return self._t_adj[w]

    def scope_avail(self, wu: int, wv: int) -> tuple:
        c = self._scope_map.get(canonical_scope(wu, wv))
        if c is None:
            return (False, False)
        return _constraint_needs(c)

    def entry_between(self, w1: int, a1: int, w2: int, a2: int) -> TruthValue:
        if w1 > w2:
            w1, a1, w2, a2 = w2, a2, w1, a1
        c = self._scope_map.get((w1, w2))
        return c.value_at((a1, a2)) if c is not None else UNDEFINED


class _InstanceView:
    """Target adapter treating an instance as a totally defined, value-ordered target."""

    def __init__(self, p: CspInstance, var_order: Optional[Sequence] = None) -> None:
        self.num_variables = p.num_variables
        self._p = p
        self._values = tuple(tuple(sorted(d)) for d in p.domains)
        self.var_pos = (
            {v: i for i, v in enumerate(var_order)} if var_order is not None else None
        )
        self.value_ordered = True
        f_adj = {v: set() for v in range(p.num_variables)}
        for u, v in p.disallowed:
            f_adj[u].add(v)
            f_adj[v].add(u)
        self._f_adj = {v: frozenset(ws) for v, ws in f_adj.items()}

    def candidate_values(self, w: int) -> tuple:
        return self._values[w]

    def value_rank(self, w: int, val: int) -> int:
        return val

    def f_neighbors(self, w: int) -> frozenset:
        return self._f_adj[w]

    def t_neighbors(self, w: int) -> Optional[frozenset]:
        return None  # nearly every scope allows something; checked per candidate

    def scope_avail(self, wu: int, wv: int) -> tuple:
        bad = self._p.disallowed.get(canonical_scope(wu, wv), frozenset())
        full = len(self._values[wu]) * len(self._values[wv])
        return (bool(bad), len(bad) < full)

    def entry_between(self, w1: int, a1: int, w2: int, a2: int) -> TruthValue:
        if w1 > w2:
            w1, a1, w2, a2 = w2, a2, w1, a1
        bad = self._p.disallowed.get((w1, w2), frozenset())
        return FALSE if (a1, a2) in bad else TRUE


class _Search:
    """Deterministic backtracking search for a witness renaming.

    Variables are mapped in source index order over ascending target
    candidates, then points in (variable, value) order over ascending values,
    so the first witness found is the lexicographically least.
    """

    def __init__(self, chi: CspPattern, view) -> None:
        self.chi = chi
        self.view = view
        n = chi.num_variables
        self.partners = [[] for _ in range(n)]  # (earlier var, constraint, needs)
        for c in chi.constraints:
            x, y = c.scope
            self.partners[y].append((x, c, _constraint_needs(c)))
        ctx = chi.context
        self.diseq_earlier = [
            [y for y in range(x) if ctx.requires_distinct(x, y)] for x in range(n)
        ]
        self.src_pos = (
            {v: i for i, v in enumerate(ctx.var_order)} if ctx.var_order is not None else None
        )
        self.points = [(x, a) for x in range(n) for a in range(chi.values_per_variable[x])]
        self.entry_checks = {pt: [] for pt in self.points}
        for c in chi.constraints:
            x, y = c.scope
            for (a, b), tv in c.entries:
                self.entry_checks[(y, b)].append((x, a, tv))
        self.vdiseq_earlier = {pt: [] for pt in self.points}
        for (p1, p2) in ctx.value_diseqs:
            var, lo = p1
            hi = p2[1]
            self.vdiseq_earlier[(var, hi)].append(lo)
        self.value_ordered = ctx.value_order
        self.s = [0] * n
        self.t = {}

    def run(self) -> Optional[tuple]:
        if self._assign_var(0):
            return (tuple(self.s), dict(self.t))
        return None

    def _var_candidates(self, x: int):
        pool = None
        for y, _, (need_f, need_t) in self.partners[x]:
            if need_f:
                nb = self.view.f_neighbors(self.s[y])
                pool = nb if pool is None else pool & nb
            if need_t:
                nb = self.view.t_neighbors(self.s[y])
                if nb is not None:
                    pool = nb if pool is None else pool & nb
        if pool is None:
            return range(self.view.num_variables)
        return sorted(pool)

    def _var_ok(self, x: int, w: int) -> bool:
        s = self.s
        for y in self.diseq_earlier[x]:
            if s[y] == w:
                return False
        for y, _, needs in self.partners[x]:
            if s[y] == w:  # merging co-scoped variables is never legal
                return False
            have_f, have_t = self.view.scope_avail(s[y], w)
            if (needs[0] and not have_f) or (needs[1] and not have_t):
                return False
        if self.src_pos is not None:
            px, pos = self.src_pos[x], self.view.var_pos
            for y in range(x):
                if (self.src_pos[y] < px) != (pos[s[y]] < pos[w]):
                    return False
        return True

    def _assign_var(self, x: int) -> bool:
        if x == self.chi.num_variables:
            return self._assign_point(0)
        for w in self._var_candidates(x):
            if self._var_ok(x, w):
                self.s[x] = w
                if self._assign_var(x + 1):
                    return True
        return False

    def _point_ok(self, x: int, a: int, val: int) -> bool:
        t, s, view = self.t, self.s, self.view
        for lo in self.vdiseq_earlier[(x, a)]:
            if t[(x, lo)] == val:
                return False
        if self.value_ordered and a > 0:
            w = s[x]
            if not view.value_rank(w, t[(x, a - 1)]) < view.value_rank(w, val):
                return False
        for y, b, tv in self.entry_checks[(x, a)]:
            if view.entry_between(s[y], t[(y, b)], s[x], val) is not tv:
                return False
        return True

    def _assign_point(self, i: int) -> bool:
        if i == len(self.points):
            return True
        x, a = self.points[i]
        for val in self.view.candidate_values(self.s[x]):
            if self._point_ok(x, a, val):
                self.t[(x, a)] = val
                if self._assign_point(i + 1):
                    return True
                del self.t[(x, a)]
        return False


def _make_occurrence(chi: CspPattern, found: tuple) -> Occurrence:
    var_map, point_map = found
    scopes = {
        c.scope: canonical_scope(var_map[c.scope[0]], var_map[c.scope[1]])
        for c in chi.constraints
    }
    return Occurrence(Renaming(var_map, point_map), scopes)


def occurs(chi: CspPattern, target: CspPattern) -> Optional[Occurrence]:
    """Search for a witness that chi occurs in the target pattern; None if there is none."""
    if chi.context.var_order is not None and target.context.var_order is None:
        raise IncompatibleContext("source has a variable order but the target is unordered")
    if chi.context.value_order and not target.context.value_order:
        raise IncompatibleContext("source has a value order but the target declares none")
    found = _Search(chi, _PatternView(target)).run()
    return _make_occurrence(chi, found) if found else None


def occurs_in_instance(
    chi: CspPattern, p: CspInstance, var_order: Optional[Sequence] = None
) -> Optional[Occurrence]:
    """Search for chi inside an instance (absent scopes read as all allowed).

    Instances are value-ordered and hold distinct values apart by construction;
    a source variable order needs an explicit var_order over p's variables.
    """
    if chi.context.var_order is not None and var_order is None:
        raise IncompatibleContext("source has a variable order; supply one for the instance")
    found = _Search(chi, _InstanceView(p, var_order)).run()
    return _make_occurrence(chi, found) if found else None


def forbids(p: CspInstance, xs: Iterable) -> ForbidsResult:
    """True iff none of the given patterns occurs in p; otherwise carries the first witness."""
    for i, chi in enumerate(xs):
        occ = occurs_in_instance(chi, p)
        if occ is not None:
            return ForbidsResult(False, pattern_index=i, witness=occ)
    return ForbidsResult(True)


def apply_renaming(chi: CspPattern, r: Renaming, target: TargetSpace) -> CspPattern:
    """Carry chi through a renaming into the target space, merging entries by join.

    Raises IllegalMerge when co-scoped variables collapse, NotHomomorphic when
    the source context is not preserved, IncomparableMerge when identified
    labellings carry TRUE and FALSE.
    """
    n = chi.num_variables
    if len(r.var_map) != n:
        raise ValidationError(f"variable map covers {len(r.var_map)} of {n} variables")
    for pt in chi.points():
        if pt not in r.point_map:
            raise ValidationError(f"point map misses the point {pt}")
    s, t = r.var_map, r.point_map
    for w in s:
        if not 0 <= w < target.num_variables:
            raise ValidationError(f"image variable {w} outside the target space")

    for c in chi.constraints:
        x, y = c.scope
        if s[x] == s[y]:
            raise IllegalMerge(f"variables {x} and {y} share scope {c.scope} but merge onto {s[x]}")

    ctx, tctx = chi.context, target.context
    for u, v in ctx.var_diseqs:
        if s[u] == s[v]:
            raise NotHomomorphic(f"distinct variables {u}, {v} merge onto {s[u]}")
    if ctx.var_order is not None:
        if tctx.var_order is None:
            raise NotHomomorphic("source variable order cannot map into an unordered target")
        tpos = {v: i for i, v in enumerate(tctx.var_order)}
        spos = {v: i for i, v in enumerate(ctx.var_order)}
        for u, v in itertools.combinations(range(n), 2):
            if (spos[u] < spos[v]) != (tpos[s[u]] < tpos[s[v]]):
                raise NotHomomorphic(f"variable order inverted between {u} and {v}")
    for p1, p2 in ctx.value_diseqs:
        if t[p1] == t[p2]:
            raise NotHomomorphic(f"distinct points {p1}, {p2} map to the same value")
    if ctx.value_order:
        if not tctx.value_order:
            raise NotHomomorphic("source value order cannot map into an unordered target")
        for x in range(n):
            ranks = [t[(x, a)] for a in range(chi.values_per_variable[x])]
            if any(ranks[i] >= ranks[i + 1] for i in range(len(ranks) - 1)):
                raise NotHomomorphic(f"value order not preserved on variable {x}")

    merged = {}
    for c in chi.constraints:
        x, y = c.scope
        for (a, b), tv in c.entries:
            w1, v1 = s[x], t[(x, a)]
            w2, v2 = s[y], t[(y, b)]
            if w1 > w2:
                w1, v1, w2, v2 = w2, v2, w1, v1
            key = ((w1, w2), (v1, v2))
            prev = merged.get(key, UNDEFINED)
            joined = truth_join(prev, tv)
            if joined is None:
                raise IncomparableMerge(f"labellings at {key} carry both TRUE and FALSE")
            merged[key] = joined

    by_scope = {}
    for (scope, pair), tv in merged.items():
        by_scope.setdefault(scope, {})[pair] = tv
    constraints = tuple(
        ConstraintPattern(scope, tuple(pairs.items())) for scope, pairs in sorted(by_scope.items())
    )
    return CspPattern(target.num_variables, target.values_per_variable, constraints, tctx)


def _renaming_violation(chi: CspPattern, occ: Occurrence, view) -> Optional[str]:
    s, t = occ.renaming.var_map, occ.renaming.point_map
    n = chi.num_variables
    if len(s) != n:
        return "variable map has the wrong length"
    for pt in chi.points():
        if pt not in t:
            return f"point map misses {pt}"
    for w in s:
        if not 0 <= w < view.num_variables:
            return f"image variable {w} out of range"
    for x, a in chi.points():
        if t[(x, a)] not in view.candidate_values(s[x]):
            return f"point ({x}, {a}) maps outside the image domain"
    for c in chi.constraints:
        x, y = c.scope
        if s[x] == s[y]:
            return f"co-scoped variables {x}, {y} merged"
    ctx = chi.context
    for u, v in ctx.var_diseqs:
        if s[u] == s[v]:
            return f"declared-distinct variables {u}, {v} merged"
    if ctx.var_order is not None:
        if view.var_pos is None:
            return "source variable order has no target order to land in"
        spos = {v: i for i, v in enumerate(ctx.var_order)}
        for u, v in itertools.combinations(range(n), 2):
            if (spos[u] < spos[v]) != (view.var_pos[s[u]] < view.var_pos[s[v]]):
                return f"variable order inverted between {u} and {v}"
    for p1, p2 in ctx.value_diseqs:
        if t[p1] == t[p2]:
            return f"declared-distinct points {p1}, {p2} identified"
    if ctx.value_order:
        if not view.value_ordered:
            return "source value order has no target order to land in"
        for x in range(n):
            ranks = [view.value_rank(s[x], t[(x, a)]) for a in range(chi.values_per_variable[x])]
            if any(ranks[i] >= ranks[i + 1] for i in range(len(ranks) - 1)):
                return f"value order not preserved on variable {x}"
    for c in chi.constraints:
        x, y = c.scope
        expect = occ.target_scopes.get(c.scope)
        if expect is not None and expect != canonical_scope(s[x], s[y]):
            return f"scope correspondence wrong for {c.scope}"
        for (a, b), tv in c.entries:
            if view.entry_between(s[x], t[(x, a)], s[y], t[(y, b)]) is not tv:
                return f"entry {c.scope}/{(a, b)} not realised by the image"
    return None


def occurrence_valid_in_pattern(chi: CspPattern, occ: Occurrence, target: CspPattern) -> bool:
    """Recheck a claimed pattern-to-pattern witness condition by condition."""
    return _renaming_violation(chi, occ, _PatternView(target)) is None


def occurrence_valid_in_instance(
    chi: CspPattern, occ: Occurrence, p: CspInstance, var_order: Optional[Sequence] = None
) -> bool:
    """Recheck a claimed pattern-to-instance witness condition by condition."""
    return _renaming_violation(chi, occ, _InstanceView(p, var_order)) is None
