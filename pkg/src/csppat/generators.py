"""Instance families: the 3SAT gadget reduction, P_n, AllDifferent+unary, and seeded random generators."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .errors import BadParameter, InternalInvariantViolation, ParseError, SamplingExhausted
from .model import FALSE, TRUE, CspInstance, CspPattern, canonical_scope
from .occurrence import occurs_in_instance


@dataclass(frozen=True)
class Formula3Sat:
    """A CNF formula with exactly three (possibly repeated) literals per clause."""

    num_variables: int
    clauses: tuple

    def __post_init__(self):
        if self.num_variables < 1:
            raise BadParameter("a formula needs at least one propositional variable")
        clauses = tuple(tuple(c) for c in self.clauses)
        object.__setattr__(self, "clauses", clauses)
        for c in clauses:
            if len(c) != 3:
                raise BadParameter(f"clause {c} does not have exactly three literals")
            for lit in c:
                if not isinstance(lit, int) or lit == 0 or abs(lit) > self.num_variables:
                    raise BadParameter(f"literal {lit} is out of range in clause {c}")

    def evaluate(self, truth: Sequence) -> bool:
        """truth[i] is the value of propositional variable i+1."""
        return all(
            any(truth[abs(lit) - 1] == (lit > 0) for lit in clause)
            for clause in self.clauses
        )


@dataclass(frozen=True)
class ReductionArtifact:
    """Reduction output plus the index maps needed to trace gadget variables back."""

    instance: CspInstance
    ell: int
    cycle_variable_index: Mapping  # (propositional var, cycle position) -> variable
    clause_variable_index: Mapping  # (clause index, literal slot) -> line port variable
    clause_selector_index: Mapping  # clause index -> three-valued selector variable


def formula_from_dimacs(text: str) -> Formula3Sat:
    """Parse DIMACS-CNF text; clauses shorter than three literals are padded by repetition."""
    num_vars = None
    literals: list = []
    clauses: list = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("c"):
            continue
        if stripped.startswith("p"):
            parts = stripped.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError(f"line {lineno}: malformed problem line {stripped!r}")
            try:
                num_vars = int(parts[2])
                int(parts[3])
            except ValueError:
                raise ParseError(f"line {lineno}: non-numeric problem line {stripped!r}")
            continue
        for tok in stripped.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"line {lineno}: unexpected token {tok!r}")
            if lit == 0:
                if not literals:
                    raise BadParameter(f"line {lineno}: empty clause")
                if len(literals) > 3:
                    raise BadParameter(f"clause {literals} has more than three literals")
                while len(literals) < 3:
                    literals.append(literals[-1])
                clauses.append(tuple(literals))
                literals = []
            else:
                literals.append(lit)
    if literals:
        raise ParseError("trailing clause without terminating 0")
    if num_vars is None:
        raise ParseError("missing 'p cnf' problem line")
    if not clauses:
        raise BadParameter("formula has no clauses")
    return Formula3Sat(num_vars, tuple(clauses))


def _add_pair(constraints: dict, u: int, v: int, pair: tuple) -> None:
    scope = canonical_scope(u, v)
    if scope != (u, v):
        pair = (pair[1], pair[0])
    if scope in constraints:
        raise InternalInvariantViolation(f"gadget scope {scope} written twice")
    constraints[scope] = frozenset({pair})


def gen_3sat_instance(f: Formula3Sat, ell: int) -> ReductionArtifact:
    """Boolean cycle gadgets tied through implication lines to three-valued clause selectors.

    Cycle edges disallow (0, 1) so every cycle is constant; a selector picking
    slot i forces that slot's port, which propagates along the line to (for a
    positive literal) or from (negative) the cycle attachment at index
    w * (ell + 1) for clause w.
    """
    if ell < 1:
        raise BadParameter("line length parameter must be at least 1")
    m = len(f.clauses)
    if m < 1:
        raise BadParameter("the reduction needs at least one clause")
    cycle_len = m * (ell + 1)
    if cycle_len < 3:
        raise BadParameter(
            f"cycle length {cycle_len} would duplicate a scope; use a larger formula or ell"
        )

    domains: list = []
    cycle_index: dict = {}
    for i in range(1, f.num_variables + 1):
        for j in range(cycle_len):
            cycle_index[(i, j)] = len(domains)
            domains.append(frozenset({0, 1}))

    constraints: dict = {}
    for i in range(1, f.num_variables + 1):
        for j in range(cycle_len):
            _add_pair(constraints, cycle_index[(i, j)], cycle_index[(i, (j + 1) % cycle_len)], (0, 1))

    port_index: dict = {}
    selector_index: dict = {}
    for w, clause in enumerate(f.clauses):
        selector = len(domains)
        selector_index[w] = selector
        domains.append(frozenset({1, 2, 3}))
        for slot, lit in enumerate(clause, start=1):
            site = cycle_index[(abs(lit), w * (ell + 1))]
            fresh = list(range(len(domains), len(domains) + ell))
            domains.extend([frozenset({0, 1})] * ell)
            port = fresh[-1]
            port_index[(w, slot)] = port
            line = [site] + fresh  # path in the constraint graph
            chain = list(reversed(line)) if lit > 0 else line
            for a, b in zip(chain, chain[1:]):  # a implies b
                _add_pair(constraints, a, b, (1, 0))
            _add_pair(constraints, port, selector, (1, slot) if lit < 0 else (0, slot))

    instance = CspInstance(len(domains), tuple(domains), constraints)
    return ReductionArtifact(instance, ell, cycle_index, port_index, selector_index)


def gen_pn_family(n: int) -> CspInstance:
    """Complete graph on n variables over {1..n}; scope (i, j) disallows only (j+1, i+1)."""
    if n < 2:
        raise BadParameter("the family starts at two variables")
    domain = frozenset(range(1, n + 1))
    constraints = {
        (i, j): frozenset({(j + 1, i + 1)})
        for i in range(n)
        for j in range(i + 1, n)
    }
    return CspInstance(n, (domain,) * n, constraints)


def gen_alldiff_unary(n: int, unary_domains: Sequence) -> CspInstance:
    """Pairwise disequality over the given per-variable domains."""
    if len(unary_domains) != n:
        raise BadParameter(f"expected {n} domains, got {len(unary_domains)}")
    domains = tuple(frozenset(d) for d in unary_domains)
    by_domain_pair: dict = {}
    constraints = {}
    for u in range(n):
        for v in range(u + 1, n):
            key = (domains[u], domains[v])
            if key not in by_domain_pair:
                by_domain_pair[key] = frozenset((a, a) for a in domains[u] & domains[v])
            pairs = by_domain_pair[key]
            if pairs:
                constraints[(u, v)] = pairs
    return CspInstance(n, domains, constraints)


def gen_random_instance(
    n: int, d: int, constraint_density: float, disallowed_density: float, seed: int
) -> CspInstance:
    """Seeded random instance; the stream is Python's Mersenne Twister, so output is
    bit-stable across platforms for a fixed seed."""
    if n < 1 or d < 1:
        raise BadParameter("need at least one variable and one value")
    if not (0 <= constraint_density <= 1 and 0 <= disallowed_density <= 1):
        raise BadParameter("densities must lie in [0, 1]")
    rng = random.Random(seed)
    constraints = {}
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() >= constraint_density:
                continue
            pairs = frozenset(
                (a, b)
                for a in range(d)
                for b in range(d)
                if rng.random() < disallowed_density
            )
            if pairs:
                constraints[(u, v)] = pairs
    return CspInstance(n, (frozenset(range(d)),) * n, constraints)


def gen_random_pattern(
    n: int, max_values: int, scope_density: float, entry_density: float, seed: int
) -> CspPattern:
    """Seeded flat random pattern with all variables pairwise distinct."""
    if n < 1 or max_values < 1:
        raise BadParameter("need at least one variable and one value")
    if not (0 <= scope_density <= 1 and 0 <= entry_density <= 1):
        raise BadParameter("densities must lie in [0, 1]")
    rng = random.Random(seed)
    values = [rng.randint(1, max_values) for _ in range(n)]
    entries: dict = {}
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() >= scope_density:
                continue
            scope_entries = {}
            for a in range(values[u]):
                for b in range(values[v]):
                    if rng.random() < entry_density:
                        scope_entries[(a, b)] = rng.choice((TRUE, FALSE))
            if scope_entries:
                entries[(u, v)] = scope_entries
    return CspPattern.build(
        values,
        entries,
        neq_vars=itertools.combinations(range(n), 2),
    )


def gen_instance_forbidding(
    patterns: Iterable,
    n: int,
    d: int,
    constraint_density: float,
    disallowed_density: float,
    seed: int,
    var_order: Optional[Sequence] = None,
    max_tries: int = 500,
) -> CspInstance:
    """Rejection-sample a random instance in which none of the patterns occur."""
    patterns = tuple(patterns)
    rng = random.Random(seed)
    for _ in range(max_tries):
        inst = gen_random_instance(
            n, d, constraint_density, disallowed_density, rng.getrandbits(32)
        )
        if all(
            occurs_in_instance(
                chi, inst, var_order=var_order if chi.context.var_order is not None else None
            )
            is None
            for chi in patterns
        ):
            return inst
    raise SamplingExhausted(
        f"no instance forbidding all {len(patterns)} patterns in {max_tries} draws"
    )
