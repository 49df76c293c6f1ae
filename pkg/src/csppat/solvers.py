"""Arc consistency, a backtracking oracle, per-class polynomial solvers, and the union combinator."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .analysis import (
    InconsistencyClique,
    InconsistencyGraph,
    TwoVariable,
    Violation,
    classify_component,
    constraint_cycle,
)
from .catalog import btp_pattern, max2_pattern, pivot_pattern, simple_pattern
from .errors import BadParameter, InternalInvariantViolation
from .model import CspInstance, CspPattern, canonical_scope, disjoint_union, is_solution
from .occurrence import Occurrence, occurs_in_instance


class SolveStatus(Enum):
    SOLUTION = "solution"
    UNSATISFIABLE = "unsatisfiable"
    NOT_IN_CLASS = "not-in-class"


@dataclass(frozen=True)
class SolveOutcome:
    """Result of a solver run: a checked solution, unsatisfiability, or a class rejection."""

    status: SolveStatus
    assignment: Optional[dict] = field(default=None, hash=False)
    witness: Optional[object] = None

    @classmethod
    def solution(cls, assignment: dict) -> "SolveOutcome":
        return cls(SolveStatus.SOLUTION, assignment=dict(assignment))

    @classmethod
    def unsatisfiable(cls) -> "SolveOutcome":
        return cls(SolveStatus.UNSATISFIABLE)

    @classmethod
    def not_in_class(cls, witness) -> "SolveOutcome":
        return cls(SolveStatus.NOT_IN_CLASS, witness=witness)

    @property
    def is_solution(self) -> bool:
        return self.status is SolveStatus.SOLUTION


@dataclass(frozen=True)
class MaxClosureViolation:
    """Two allowed pairs whose componentwise maximum is disallowed on one scope."""

    scope: tuple
    allowed: tuple  # the two allowed pairs
    disallowed_max: tuple


def _rebuild(p: CspInstance, domains: Sequence) -> CspInstance:
    """New instance over shrunk domains, disallowed pairs filtered accordingly."""
    doms = tuple(frozenset(d) for d in domains)
    kept = {}
    for (u, v), pairs in p.disallowed.items():
        filtered = frozenset((a, b) for a, b in pairs if a in doms[u] and b in doms[v])
        if filtered:
            kept[(u, v)] = filtered
    return CspInstance(p.num_variables, doms, kept)


def _certify(p: CspInstance, assignment: Mapping) -> SolveOutcome:
    if not is_solution(p, assignment):
        raise InternalInvariantViolation("solver produced an assignment that is not a solution")
    return SolveOutcome.solution(dict(assignment))


def enforce_arc_consistency(p: CspInstance) -> CspInstance:
    """Largest arc-consistent subinstance; empty domains stay in the result."""
    domains = [set(p.domains[v]) for v in range(p.num_variables)]
    neighbors = {v: set() for v in range(p.num_variables)}
    for u, v in p.disallowed:
        neighbors[u].add(v)
        neighbors[v].add(u)
    queue = deque(
        arc for scope in sorted(p.disallowed) for arc in (scope, scope[::-1])
    )
    enqueued = set(queue)
    while queue:
        u, v = queue.popleft()
        enqueued.discard((u, v))
        bad = p.disallowed_on(u, v)
        removed = False
        for a in sorted(domains[u]):
            if all((a, b) in bad for b in domains[v]):
                domains[u].discard(a)
                removed = True
        if removed:
            for w in sorted(neighbors[u]):
                if w != v and (w, u) not in enqueued:
                    queue.append((w, u))
                    enqueued.add((w, u))
    return _rebuild(p, domains)


def solve_backtracking(p: CspInstance) -> SolveOutcome:
    """Complete search: arc consistency, then forward checking over smallest domains."""
    q = enforce_arc_consistency(p)
    domains = [sorted(q.domains[v]) for v in range(q.num_variables)]
    if any(not d for d in domains):
        return SolveOutcome.unsatisfiable()
    neighbors = {v: set() for v in range(q.num_variables)}
    for u, v in q.disallowed:
        neighbors[u].add(v)
        neighbors[v].add(u)
    assignment: dict = {}

    def search() -> bool:
        if len(assignment) == q.num_variables:
            return True
        var = min(
            (v for v in range(q.num_variables) if v not in assignment),
            key=lambda v: (len(domains[v]), v),
        )
        for val in list(domains[var]):
            assignment[var] = val
            pruned = []
            dead = False
            for w in sorted(neighbors[var]):
                if w in assignment:
                    if not q.allows(var, val, w, assignment[w]):
                        dead = True
                        break
                    continue
                for b in list(domains[w]):
                    if not q.allows(var, val, w, b):
                        domains[w].remove(b)
                        pruned.append((w, b))
                if not domains[w]:
                    dead = True
                    break
            if not dead and search():
                return True
            for w, b in pruned:
                domains[w].append(b)
                domains[w].sort()
            del assignment[var]
        return False

    if search():
        return _certify(p, assignment)
    return SolveOutcome.unsatisfiable()


def solve_tree(p: CspInstance, check_class: bool = True) -> SolveOutcome:
    """Directional arc consistency and a greedy top-down pass over a forest."""
    if check_class:
        cycle = constraint_cycle(p)
        if cycle is not None:
            return SolveOutcome.not_in_class(tuple(cycle))
    domains = [set(p.domains[v]) for v in range(p.num_variables)]
    adjacency = {v: set() for v in range(p.num_variables)}
    for u, v in p.disallowed:
        adjacency[u].add(v)
        adjacency[v].add(u)

    seen: set = set()
    assignment: dict = {}
    for root in range(p.num_variables):
        if root in seen:
            continue
        order, parent = [root], {root: None}
        seen.add(root)
        for v in order:
            for w in sorted(adjacency[v]):
                if w not in seen:
                    seen.add(w)
                    parent[w] = v
                    order.append(w)
        # bottom-up: keep only parent values supported in each child
        for child in reversed(order[1:]):
            par = parent[child]
            bad = p.disallowed_on(par, child)
            for a in sorted(domains[par]):
                if all((a, b) in bad for b in domains[child]):
                    domains[par].discard(a)
        if not domains[root]:
            return SolveOutcome.unsatisfiable()
        assignment[root] = min(domains[root])
        for child in order[1:]:
            par = parent[child]
            choice = next(
                (b for b in sorted(domains[child]) if p.allows(par, assignment[par], child, b)),
                None,
            )
            if choice is None:
                return SolveOutcome.unsatisfiable()
            assignment[child] = choice
    return _certify(p, assignment)


def _value_rank(p: CspInstance, value_order: Optional[Sequence]) -> Callable:
    if value_order is None:
        return lambda v: v
    rank = {v: i for i, v in enumerate(value_order)}
    missing = set().union(*p.domains) - set(rank) if p.num_variables else set()
    if missing:
        raise BadParameter(f"value order misses domain values {sorted(missing)}")
    return lambda v: rank[v]


def max_closure_violation(
    p: CspInstance, value_order: Optional[Sequence] = None
) -> Optional[MaxClosureViolation]:
    """First constraint whose allowed pairs are not closed under componentwise maximum."""
    rank = _value_rank(p, value_order)
    for (u, v), bad in sorted(p.disallowed.items()):
        allowed = sorted(
            (a, b)
            for a in p.domains[u]
            for b in p.domains[v]
            if (a, b) not in bad
        )
        for p1, p2 in itertools.combinations(allowed, 2):
            top = (
                max(p1[0], p2[0], key=rank),
                max(p1[1], p2[1], key=rank),
            )
            if top in bad:
                return MaxClosureViolation((u, v), (p1, p2), top)
    return None


def solve_max_closed(
    p: CspInstance, value_order: Optional[Sequence] = None, check_class: bool = True
) -> SolveOutcome:
    """Assign every variable its largest arc-consistent value, for max-closed constraints."""
    rank = _value_rank(p, value_order)
    if check_class:
        violation = max_closure_violation(p, value_order)
        if violation is not None:
            return SolveOutcome.not_in_class(violation)
    q = enforce_arc_consistency(p)
    if any(not d for d in q.domains):
        return SolveOutcome.unsatisfiable()
    return _certify(p, {v: max(q.domains[v], key=rank) for v in range(q.num_variables)})


def solve_btp(p: CspInstance, var_order: Sequence, check_class: bool = True) -> SolveOutcome:
    """Greedy assignment along var_order after arc consistency, for broken-triangle-free instances."""
    order = list(var_order)
    if sorted(order) != list(range(p.num_variables)):
        raise BadParameter("var_order must be a permutation of the instance's variables")
    if check_class:
        occ = occurs_in_instance(btp_pattern(), p, var_order=order)
        if occ is not None:
            return SolveOutcome.not_in_class(occ)
    q = enforce_arc_consistency(p)
    if any(not d for d in q.domains):
        return SolveOutcome.unsatisfiable()
    assignment: dict = {}
    for v in order:
        choice = next(
            (
                b
                for b in sorted(q.domains[v])
                if all(q.allows(v, b, w, assignment[w]) for w in assignment)
            ),
            None,
        )
        if choice is None:
            raise InternalInvariantViolation(
                f"greedy extension failed at variable {v} on a broken-triangle-free instance"
            )
        assignment[v] = choice
    return _certify(p, assignment)


def solve_simple(p: CspInstance, check_class: bool = True) -> SolveOutcome:
    """Eliminate universally supported values, then finish the two-variable leftovers."""
    if check_class:
        occ = occurs_in_instance(simple_pattern(), p)
        if occ is not None:
            return SolveOutcome.not_in_class(occ)
    q = enforce_arc_consistency(p)
    if any(not d for d in q.domains):
        return SolveOutcome.unsatisfiable()

    active = set(range(q.num_variables))
    assignment: dict = {}
    scopes_of = {v: set() for v in range(q.num_variables)}
    for scope in q.disallowed:
        scopes_of[scope[0]].add(scope)
        scopes_of[scope[1]].add(scope)

    def universal_value(v: int) -> Optional[int]:
        for c in sorted(q.domains[v]):
            ok = True
            for scope in scopes_of[v]:
                w = scope[1] if scope[0] == v else scope[0]
                if w not in active:
                    continue
                if any(not q.allows(v, c, w, b) for b in q.domains[w]):
                    ok = False
                    break
            if ok:
                return c
        return None

    changed = True
    while changed:
        changed = False
        for v in sorted(active):
            c = universal_value(v)
            if c is not None:
                assignment[v] = c
                active.discard(v)
                changed = True

    # Leftover constraint graph must split into parts of at most two variables.
    comp_of: dict = {}
    for v in sorted(active):
        if v in comp_of:
            continue
        comp = [v]
        comp_of[v] = comp
        stack = [v]
        while stack:
            x = stack.pop()
            for scope in scopes_of[x]:
                w = scope[1] if scope[0] == x else scope[0]
                if w in active and w not in comp_of:
                    comp_of[w] = comp
                    comp.append(w)
                    stack.append(w)
    components = {id(c): sorted(c) for c in comp_of.values()}
    for comp in sorted(components.values()):
        if len(comp) > 2:
            raise InternalInvariantViolation(
                f"residual variables {comp} stay connected beyond pairs"
            )
        if len(comp) == 1:
            assignment[comp[0]] = min(q.domains[comp[0]])
            continue
        u, v = comp
        choice = next(
            (
                (a, b)
                for a in sorted(q.domains[u])
                for b in sorted(q.domains[v])
                if q.allows(u, a, v, b)
            ),
            None,
        )
        if choice is None:
            return SolveOutcome.unsatisfiable()
        assignment[u], assignment[v] = choice
    return _certify(p, assignment)


def solve_negtrans(p: CspInstance, check_class: bool = True) -> SolveOutcome:
    """Classify inconsistency-graph components, fix free pairs, then match variables to cliques.

    The class check is part of the algorithm here: a component that is neither
    a clique nor two-variable yields the rejection witness.
    """
    if any(not d for d in p.domains):
        return SolveOutcome.unsatisfiable()
    g = InconsistencyGraph(p)
    comps = g.components()
    classified = [classify_component(g, comp) for comp in comps]
    for cls in classified:
        if isinstance(cls, Violation):
            return SolveOutcome.not_in_class(cls.witness)

    assignment: dict = {}
    removed: set = set()
    for cls in classified:
        if not isinstance(cls, TwoVariable):
            continue
        (v, a), (w, b) = cls.free_pair
        if v in removed or w in removed:
            continue  # an earlier fixed pair already consumed one of its variables
        assignment[v], assignment[w] = a, b
        removed.update((v, w))

    residual = [v for v in range(p.num_variables) if v not in removed]
    if residual:
        # variable -> component incidence over the residual points
        comp_index: dict = {}
        rows, cols = [], []
        var_pos = {v: i for i, v in enumerate(residual)}
        comp_points: list = []
        for ci, comp in enumerate(comps):
            live = [i for i in comp.tolist() if g.points[i][0] not in removed]
            if not live:
                continue
            cid = len(comp_points)
            comp_points.append(live)
            for i in live:
                rows.append(var_pos[g.points[i][0]])
                cols.append(cid)
        graph = csr_matrix(
            (np.ones(len(rows), dtype=bool), (rows, cols)),
            shape=(len(residual), max(len(comp_points), 1)),
        )
        match = maximum_bipartite_matching(graph, perm_type="column")
        if (match < 0).any():
            return SolveOutcome.unsatisfiable()
        for pos, v in enumerate(residual):
            values = [
                g.points[i][1] for i in comp_points[match[pos]] if g.points[i][0] == v
            ]
            if not values:
                raise InternalInvariantViolation(
                    f"matched component holds no value of variable {v}"
                )
            assignment[v] = min(values)
    return _certify(p, assignment)


def _find_middle_point(q: CspInstance) -> Optional[tuple]:
    """Smallest point with two conflict partners on distinct variables that allow each other."""
    conflicts: dict = {}
    for (u, v), pairs in sorted(q.disallowed.items()):
        for a, b in sorted(pairs):
            conflicts.setdefault((u, a), []).append((v, b))
            conflicts.setdefault((v, b), []).append((u, a))
    for m in sorted(conflicts):
        partners = sorted(conflicts[m])
        for (u, a), (v, b) in itertools.combinations(partners, 2):
            if u != v and q.allows(u, a, v, b):
                return (m, (u, a), (v, b))
    return None


def solve_pivot1(
    p: CspInstance, check_class: bool = True, step_hook: Optional[Callable] = None
) -> SolveOutcome:
    """Repeatedly eliminate the middle variable of a two-clash point, then finish without it.

    A middle variable is joined onto its two neighbours by disallowing every
    neighbour pair it cannot extend; step_hook, when given, receives each
    reduced instance (used by tests to re-check class preservation).
    """
    if check_class:
        occ = occurs_in_instance(pivot_pattern(1), p)
        if occ is not None:
            return SolveOutcome.not_in_class(occ)
    q = enforce_arc_consistency(p)
    eliminations = []
    while True:
        if any(not d for d in q.domains):
            return SolveOutcome.unsatisfiable()
        found = _find_middle_point(q)
        if found is None:
            break
        (mid, c), (u, a), (v, b) = found
        neighbors = {
            scope[1] if scope[0] == mid else scope[0]
            for scope in q.disallowed
            if mid in scope
        }
        if not neighbors <= {u, v}:
            raise InternalInvariantViolation(
                f"middle variable {mid} touches {sorted(neighbors)} beyond {u}, {v}"
            )
        dom_mid = sorted(q.domains[mid])
        bad_u = q.disallowed_on(mid, u)
        bad_v = q.disallowed_on(mid, v)
        eliminations.append((mid, dom_mid, u, bad_u, v, bad_v))

        joined = set(q.disallowed_on(u, v))
        for x in sorted(q.domains[u]):
            for y in sorted(q.domains[v]):
                if all((c2, x) in bad_u or (c2, y) in bad_v for c2 in dom_mid):
                    joined.add((x, y))
        domains = list(q.domains)
        domains[mid] = frozenset({dom_mid[0]})  # placeholder; rewritten on extension
        disallowed = {
            scope: pairs for scope, pairs in q.disallowed.items() if mid not in scope
        }
        key = canonical_scope(u, v)
        oriented = joined if key == (u, v) else {(y, x) for x, y in joined}
        if oriented:
            disallowed[key] = frozenset(oriented)
        else:
            disallowed.pop(key, None)
        q = enforce_arc_consistency(CspInstance(q.num_variables, tuple(domains), disallowed))
        if step_hook is not None:
            step_hook(q)

    outcome = solve_negtrans(q, check_class=check_class)
    if outcome.status is not SolveStatus.SOLUTION:
        if outcome.status is SolveStatus.NOT_IN_CLASS:
            raise InternalInvariantViolation("eliminations left a component violation behind")
        return outcome
    assignment = dict(outcome.assignment)
    for mid, dom_mid, u, bad_u, v, bad_v in reversed(eliminations):
        choice = next(
            (
                c2
                for c2 in dom_mid
                if (c2, assignment[u]) not in bad_u and (c2, assignment[v]) not in bad_v
            ),
            None,
        )
        if choice is None:
            raise InternalInvariantViolation(
                f"eliminated variable {mid} cannot be restored; the join was wrong"
            )
        assignment[mid] = choice
    return _certify(p, assignment)


def solve_disjoint_union(
    p: CspInstance,
    chi: CspPattern,
    solve_chi: Callable,
    tau: CspPattern,
    solve_tau: Callable,
    check_class: bool = True,
) -> SolveOutcome:
    """Fix one occurrence of chi, branch over its variables' values, solve the rest with solve_tau."""
    if check_class:
        occ = occurs_in_instance(disjoint_union(chi, tau), p)
        if occ is not None:
            return SolveOutcome.not_in_class(occ)
    occ_chi = occurs_in_instance(chi, p)
    if occ_chi is None:
        return solve_chi(p)
    sigma = sorted(set(occ_chi.renaming.var_map))
    for values in itertools.product(*(sorted(p.domains[v]) for v in sigma)):
        domains = list(p.domains)
        for v, val in zip(sigma, values):
            domains[v] = frozenset({val})
        restricted = enforce_arc_consistency(_rebuild(p, domains))
        if any(not d for d in restricted.domains):
            continue
        outcome = solve_tau(restricted)
        if outcome.status is SolveStatus.SOLUTION:
            return _certify(p, outcome.assignment)
        if outcome.status is SolveStatus.NOT_IN_CLASS:
            raise InternalInvariantViolation(
                "restricting a union-free instance left the branch outside its class"
            )
    return SolveOutcome.unsatisfiable()


_AUTO_ORDER = ("tree", "negtrans", "maxclosed", "simple", "btp", "pivot1", "generic")


def solve_auto(p: CspInstance) -> tuple:
    """Try each class solver cheapest-first; fall back to the complete search.

    Returns (class name, outcome). The broken-triangle attempt uses the natural
    variable order.
    """
    attempts = (
        ("tree", lambda: solve_tree(p)),
        ("negtrans", lambda: solve_negtrans(p)),
        ("maxclosed", lambda: solve_max_closed(p)),
        ("simple", lambda: solve_simple(p)),
        ("btp", lambda: solve_btp(p, range(p.num_variables))),
        ("pivot1", lambda: solve_pivot1(p)),
    )
    for name, run in attempts:
        outcome = run()
        if outcome.status is not SolveStatus.NOT_IN_CLASS:
            return name, outcome
    return "generic", solve_backtracking(p)
