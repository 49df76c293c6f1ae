"""Binary CSP instances, three-valued patterns, contexts, and the basic algebra on them."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .errors import (
    IncompatibleContext,
    PartialAssignment,
    ScopeMismatch,
    ValidationError,
)

Scope = tuple[int, int]  # (u, v) with u < v, canonical orientation
Pair = tuple[int, int]  # (a, b) value pair aligned to the scope orientation
Point = tuple[int, int]  # (variable, value)
Assignment = dict[int, int]


class TruthValue(Enum):
    """Three-valued constraint entry: allowed, disallowed, or not yet determined."""

    UNDEFINED = "U"
    TRUE = "T"
    FALSE = "F"

    def __repr__(self) -> str:
        return f"TruthValue.{self.name}"


UNDEFINED = TruthValue.UNDEFINED
TRUE = TruthValue.TRUE
FALSE = TruthValue.FALSE


def truth_leq(a: TruthValue, b: TruthValue) -> bool:
    """Partial order on truth values: UNDEFINED below both others, TRUE and FALSE incomparable."""
    return a is b or a is UNDEFINED


def truth_join(a: TruthValue, b: TruthValue) -> Optional[TruthValue]:
    """Least upper bound of two truth values, or None when they are incomparable."""
    if a is b:
        return a
    if a is UNDEFINED:
        return b
    if b is UNDEFINED:
        return a
    return None


def canonical_scope(u: int, v: int) -> Scope:
    if u == v:
        raise ValidationError(f"scope variables must be distinct, got ({u}, {v})")
    return (u, v) if u < v else (v, u)


def _canonical_value_diseq(p: Point, q: Point) -> tuple:
    if p[0] != q[0]:
        raise ValidationError(f"value disequality points must share a variable: {p}, {q}")
    if p[1] == q[1]:
        raise ValidationError(f"value disequality points must differ in value: {p}, {q}")
    return (p, q) if p[1] < q[1] else (q, p)


@dataclass(frozen=True)
class ConstraintPattern:
    """Three-valued labelling of the value pairs on one scope.

    Entries are stored against the canonical (low, high) scope orientation and
    hold only TRUE/FALSE; absent pairs read as UNDEFINED.
    """

    scope: Scope
    entries: tuple
    _map: dict = field(init=False, compare=False, repr=False, hash=False)

    def __post_init__(self) -> None:
        u, v = self.scope
        flipped = u > v
        if u == v:
            raise ValidationError(f"scope variables must be distinct, got ({u}, {v})")
        raw = dict(self.entries)
        norm = {}
        for pair, tv in raw.items():
            if not isinstance(tv, TruthValue):
                raise ValidationError(f"entry value must be a TruthValue, got {tv!r}")
            if tv is UNDEFINED:
                continue
            a, b = pair
            key = (b, a) if flipped else (a, b)
            if key in norm and norm[key] is not tv:
                raise ValidationError(f"conflicting entries for pair {key} on scope {self.scope}")
            norm[key] = tv
        object.__setattr__(self, "scope", (v, u) if flipped else (u, v))
        object.__setattr__(self, "entries", tuple(sorted(norm.items())))
        object.__setattr__(self, "_map", norm)

    def value_at(self, pair: Pair) -> TruthValue:
        return self._map.get(pair, UNDEFINED)

    @property
    def false_pairs(self) -> tuple:
        return tuple(p for p, tv in self.entries if tv is FALSE)

    @property
    def true_pairs(self) -> tuple:
        return tuple(p for p, tv in self.entries if tv is TRUE)

    @property
    def is_trivial(self) -> bool:
        """True when every pair is UNDEFINED."""
        return not self.entries


def realises(rho: ConstraintPattern, rho_prime: ConstraintPattern) -> bool:
    """True iff rho dominates rho_prime pointwise (rho(x) >= rho_prime(x) for every pair x)."""
    if rho.scope != rho_prime.scope:
        raise ScopeMismatch(f"cannot compare labellings on {rho.scope} and {rho_prime.scope}")
    return all(truth_leq(tv, rho.value_at(pair)) for pair, tv in rho_prime.entries)


@dataclass(frozen=True)
class Context:
    """Structural side conditions carried by a pattern.

    var_order, when present, is a total order (a permutation of the variables)
    and makes every variable pair distinct. value_order declares the natural
    order on each variable's value indices.
    """

    var_diseqs: frozenset = frozenset()
    var_order: Optional[tuple] = None
    value_diseqs: frozenset = frozenset()
    value_order: bool = False

    def __post_init__(self) -> None:
        diseqs = frozenset(canonical_scope(u, v) for u, v in self.var_diseqs)
        vdiseqs = frozenset(_canonical_value_diseq(p, q) for p, q in self.value_diseqs)
        order = tuple(self.var_order) if self.var_order is not None else None
        object.__setattr__(self, "var_diseqs", diseqs)
        object.__setattr__(self, "value_diseqs", vdiseqs)
        object.__setattr__(self, "var_order", order)
        object.__setattr__(self, "value_order", bool(self.value_order))

    @property
    def is_flat(self) -> bool:
        """True when the context consists of variable disequalities only."""
        return self.var_order is None and not self.value_diseqs and not self.value_order

    def requires_distinct(self, u: int, v: int) -> bool:
        if u == v:
            return False
        if self.var_order is not None:
            return True
        return canonical_scope(u, v) in self.var_diseqs

    @classmethod
    def all_distinct(cls, num_variables: int, **kwargs) -> "Context":
        pairs = frozenset(itertools.combinations(range(num_variables), 2))
        return cls(var_diseqs=pairs, **kwargs)


@dataclass(frozen=True)
class CspPattern:
    """A set of three-valued binary constraints over per-variable value sets, plus a context."""

    num_variables: int
    values_per_variable: tuple
    constraints: tuple
    context: Context = Context()
    _scope_map: dict = field(init=False, compare=False, repr=False, hash=False)

    def __post_init__(self) -> None:
        n = self.num_variables
        if not isinstance(n, int) or n < 0:
            raise ValidationError(f"variable count must be a nonnegative int, got {n!r}")
        values = tuple(self.values_per_variable)
        if len(values) != n:
            raise ValidationError(f"expected {n} value-set sizes, got {len(values)}")
        for v, k in enumerate(values):
            if not isinstance(k, int) or k < 1:
                raise ValidationError(f"variable {v} needs a positive value count, got {k!r}")

        scope_map = {}
        for c in self.constraints:
            if not isinstance(c, ConstraintPattern):
                raise ValidationError(f"constraints must be ConstraintPattern, got {c!r}")
            if c.is_trivial:
                continue
            u, v = c.scope
            if not (0 <= u < v < n):
                raise ValidationError(f"scope {c.scope} out of range for {n} variables")
            if c.scope in scope_map:
                raise ValidationError(f"two constraint patterns share the scope {c.scope}")
            for (a, b), _ in c.entries:
                if not (0 <= a < values[u] and 0 <= b < values[v]):
                    raise ValidationError(f"entry pair ({a}, {b}) out of range on scope {c.scope}")
            scope_map[c.scope] = c

        ctx = self.context
        for u, v in ctx.var_diseqs:
            if not (0 <= u < v < n):
                raise ValidationError(f"disequality ({u}, {v}) out of range")
        if ctx.var_order is not None and sorted(ctx.var_order) != list(range(n)):
            raise ValidationError(f"variable order {ctx.var_order} is not a permutation of 0..{n - 1}")
        for p, q in ctx.value_diseqs:
            for var, val in (p, q):
                if not (0 <= var < n and 0 <= val < values[var]):
                    raise ValidationError(f"value disequality point {(var, val)} out of range")

        object.__setattr__(self, "values_per_variable", values)
        object.__setattr__(self, "constraints", tuple(scope_map[s] for s in sorted(scope_map)))
        object.__setattr__(self, "_scope_map", scope_map)

    @classmethod
    def build(
        cls,
        values: Sequence,
        entries: Mapping,
        neq_vars: Iterable = (),
        var_order: Optional[Sequence] = None,
        neq_values: Iterable = (),
        value_order: bool = False,
    ) -> "CspPattern":
        """Construct a pattern from {scope: {pair: TruthValue}} plus context pieces."""
        constraints = tuple(
            ConstraintPattern(scope=tuple(scope), entries=tuple(dict(pairs).items()))
            for scope, pairs in entries.items()
        )
        ctx = Context(
            var_diseqs=frozenset(tuple(p) for p in neq_vars),
            var_order=tuple(var_order) if var_order is not None else None,
            value_diseqs=frozenset((tuple(p), tuple(q)) for p, q in neq_values),
            value_order=value_order,
        )
        return cls(len(values), tuple(values), constraints, ctx)

    def constraint_on(self, scope: Scope) -> Optional[ConstraintPattern]:
        return self._scope_map.get(scope)

    @property
    def nontrivial_scopes(self) -> tuple:
        return tuple(c.scope for c in self.constraints)

    @property
    def is_negative(self) -> bool:
        """True when no entry anywhere is TRUE."""
        return all(not c.true_pairs for c in self.constraints)

    @property
    def is_flat(self) -> bool:
        return self.context.is_flat

    def points(self) -> Iterator:
        for var, k in enumerate(self.values_per_variable):
            for val in range(k):
                yield (var, val)


@dataclass(frozen=True)
class CspInstance:
    """Variables with finite domains and sparse per-scope sets of disallowed value pairs.

    Scopes absent from `disallowed` carry the complete relation. Unary
    restrictions live in the domains.
    """

    num_variables: int
    domains: tuple
    disallowed: dict = field(hash=False)

    def __post_init__(self) -> None:
        n = self.num_variables
        if not isinstance(n, int) or n < 0:
            raise ValidationError(f"variable count must be a nonnegative int, got {n!r}")
        if len(self.domains) != n:
            raise ValidationError(f"expected {n} domains, got {len(self.domains)}")
        domains = tuple(frozenset(d) for d in self.domains)
        for v, dom in enumerate(domains):
            for a in dom:
                if not isinstance(a, int):
                    raise ValidationError(f"domain of variable {v} holds a non-int value {a!r}")

        norm = {}
        checked = set()
        for scope in sorted(self.disallowed):
            u, v = scope
            if not (0 <= u < v < n):
                raise ValidationError(f"scope {scope} is not canonical for {n} variables")
            pairs = self.disallowed[scope]
            if not isinstance(pairs, frozenset):
                pairs = frozenset(pairs)
            if not pairs:
                continue
            # Shared pair sets (alldiff-style instances) are validated once.
            key = (id(pairs), id(domains[u]), id(domains[v]))
            if key not in checked:
                for a, b in pairs:
                    if a not in domains[u] or b not in domains[v]:
                        raise ValidationError(
                            f"disallowed pair ({a}, {b}) on scope {scope} leaves the domains"
                        )
                checked.add(key)
            norm[scope] = pairs

        object.__setattr__(self, "domains", domains)
        object.__setattr__(self, "disallowed", norm)

    @classmethod
    def build(cls, domains: Sequence, disallowed: Optional[Mapping] = None) -> "CspInstance":
        """Construct an instance, accepting scopes in either orientation."""
        norm = {}
        for scope, pairs in (disallowed or {}).items():
            u, v = scope
            key = canonical_scope(u, v)
            flipped = key != tuple(scope)
            bucket = norm.setdefault(key, set())
            for a, b in pairs:
                bucket.add((b, a) if flipped else (a, b))
        return cls(
            len(domains),
            tuple(frozenset(d) for d in domains),
            {scope: frozenset(pairs) for scope, pairs in norm.items()},
        )

    def domain(self, v: int) -> frozenset:
        return self.domains[v]

    def disallowed_on(self, u: int, v: int) -> frozenset:
        """Disallowed pairs for two distinct variables, aligned to the (u, v) argument order."""
        if u < v:
            return self.disallowed.get((u, v), frozenset())
        pairs = self.disallowed.get((v, u), frozenset())
        return frozenset((b, a) for a, b in pairs)

    def allows(self, u: int, a: int, v: int, b: int) -> bool:
        if u < v:
            return (a, b) not in self.disallowed.get((u, v), frozenset())
        return (b, a) not in self.disallowed.get((v, u), frozenset())

    @property
    def scopes(self) -> tuple:
        return tuple(self.disallowed)


def is_solution(p: CspInstance, s: Mapping) -> bool:
    """True iff the total assignment s stays inside every domain and hits no disallowed pair."""
    missing = [v for v in range(p.num_variables) if v not in s]
    if missing:
        raise PartialAssignment(f"assignment misses variables {missing}")
    if any(s[v] not in p.domains[v] for v in range(p.num_variables)):
        return False
    return all((s[u], s[v]) not in pairs for (u, v), pairs in p.disallowed.items())


def neg(chi: CspPattern) -> CspPattern:
    """Drop every TRUE entry and flatten the context to variable disequalities.

    Disequalities retained: the declared ones, every pair when a variable
    order was present, and the endpoints of each originally nontrivial scope
    (merging those is impossible anyway, so negation must not enable it).
    """
    diseqs = set(chi.context.var_diseqs)
    if chi.context.var_order is not None:
        diseqs.update(itertools.combinations(range(chi.num_variables), 2))
    constraints = []
    for c in chi.constraints:
        diseqs.add(c.scope)
        falses = tuple((pair, FALSE) for pair in c.false_pairs)
        if falses:
            constraints.append(ConstraintPattern(c.scope, falses))
    return CspPattern(
        chi.num_variables,
        chi.values_per_variable,
        tuple(constraints),
        Context(var_diseqs=frozenset(diseqs)),
    )


def disjoint_union(chi: CspPattern, tau: CspPattern) -> CspPattern:
    """Place two order-free patterns side by side; all cross pairs stay UNDEFINED."""
    for name, part in (("left", chi), ("right", tau)):
        if part.context.var_order is not None or part.context.value_order:
            raise IncompatibleContext(f"{name} pattern carries an order; union is not defined")
    shift = chi.num_variables

    def shift_scope(scope):
        return (scope[0] + shift, scope[1] + shift)

    constraints = list(chi.constraints) + [
        ConstraintPattern(shift_scope(c.scope), c.entries) for c in tau.constraints
    ]
    ctx = Context(
        var_diseqs=chi.context.var_diseqs
        | frozenset(shift_scope(s) for s in tau.context.var_diseqs),
        value_diseqs=chi.context.value_diseqs
        | frozenset(
            ((p[0] + shift, p[1]), (q[0] + shift, q[1]))
            for p, q in tau.context.value_diseqs
        ),
    )
    return CspPattern(
        chi.num_variables + tau.num_variables,
        chi.values_per_variable + tau.values_per_variable,
        tuple(constraints),
        ctx,
    )


def instance_as_pattern(p: CspInstance) -> CspPattern:
    """View an instance as a totally defined pattern.

    Every scope gets an explicit constraint (TRUE unless disallowed), domains are
    reindexed densely in sorted order, and the context carries what instance
    semantics implies: all variables distinct, all values of a variable distinct,
    and the natural value order.
    """
    n = p.num_variables
    sorted_domains = [sorted(p.domains[v]) for v in range(n)]
    rank = [{a: i for i, a in enumerate(dom)} for dom in sorted_domains]
    constraints = []
    for u, v in itertools.combinations(range(n), 2):
        bad = p.disallowed.get((u, v), frozenset())
        entries = tuple(
            (
                (rank[u][a], rank[v][b]),
                FALSE if (a, b) in bad else TRUE,
            )
            for a in sorted_domains[u]
            for b in sorted_domains[v]
        )
        if entries:
            constraints.append(ConstraintPattern((u, v), entries))
    value_diseqs = frozenset(
        ((v, i), (v, j))
        for v in range(n)
        for i, j in itertools.combinations(range(len(sorted_domains[v])), 2)
    )
    ctx = Context.all_distinct(n, value_diseqs=value_diseqs, value_order=True)
    return CspPattern(n, tuple(len(d) for d in sorted_domains), tuple(constraints), ctx)


def pattern_as_instance(chi: CspPattern) -> CspInstance:
    """Strip a totally defined pattern back to domains and disallowed sets.

    Inverse of instance_as_pattern for instances whose domains are already the
    dense prefixes 0..k-1. The context is discarded.
    """
    values = chi.values_per_variable
    for u, v in itertools.combinations(range(chi.num_variables), 2):
        c = chi.constraint_on((u, v))
        defined = len(c.entries) if c is not None else 0
        if defined != values[u] * values[v]:
            raise ValidationError(f"pattern is not totally defined on scope ({u}, {v})")
    disallowed = {
        c.scope: frozenset(c.false_pairs) for c in chi.constraints if c.false_pairs
    }
    return CspInstance(
        chi.num_variables,
        tuple(frozenset(range(k)) for k in values),
        disallowed,
    )
