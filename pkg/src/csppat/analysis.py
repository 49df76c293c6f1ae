"""Structural analyses: graphs over patterns and instances, and the tractability classifier."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components as _cc

from .catalog import build as build_named
from .errors import (
    InternalInvariantViolation,
    NotConnected,
    NotFlat,
    NotNegative,
)
from .model import FALSE, CspInstance, CspPattern, canonical_scope
from .occurrence import Occurrence, Renaming, occurs, occurs_in_instance


@dataclass(frozen=True)
class NegativeStructureGraph:
    """Variables of a pattern, joined wherever a constraint holds a FALSE entry."""

    num_vertices: int
    edges: frozenset

    @property
    def adjacency(self) -> dict:
        adj = {v: set() for v in range(self.num_vertices)}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def degree(self, v: int) -> int:
        return sum(1 for e in self.edges if v in e)

    def components(self) -> list:
        adj = self.adjacency
        seen, comps = set(), []
        for start in range(self.num_vertices):
            if start in seen:
                continue
            stack, comp = [start], []
            seen.add(start)
            while stack:
                v = stack.pop()
                comp.append(v)
                for w in sorted(adj[v]):
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            comps.append(sorted(comp))
        return comps

    @property
    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    def shortest_cycle(self) -> Optional[list]:
        """Vertices of a minimum-length cycle, or None when the graph is acyclic."""
        adj = self.adjacency
        best = None
        for root in range(self.num_vertices):
            # BFS from root; a non-tree edge closes a cycle through root's tree.
            dist, parent = {root: 0}, {root: None}
            queue = [root]
            for v in queue:
                for w in sorted(adj[v]):
                    if w not in dist:
                        dist[w] = dist[v] + 1
                        parent[w] = v
                        queue.append(w)
                    elif parent[v] != w and dist[w] >= dist[v]:
                        path_v = _ancestry(v, parent)
                        path_w = _ancestry(w, parent)
                        shared = set(path_v) & set(path_w)
                        top = max(shared, key=lambda x: dist[x])
                        cycle = (
                            path_v[: path_v.index(top) + 1][::-1]
                            + path_w[: path_w.index(top)]
                        )
                        if len(cycle) >= 3 and (best is None or len(cycle) < len(best)):
                            best = cycle
        return best


def _ancestry(v, parent) -> list:
    out = [v]
    while parent[out[-1]] is not None:
        out.append(parent[out[-1]])
    return out


def negative_structure_graph(chi: CspPattern) -> NegativeStructureGraph:
    """Graph over chi's variables with an edge per scope holding a FALSE entry."""
    if not chi.is_negative:
        raise NotNegative("pattern has a TRUE entry; the negative structure graph is undefined")
    edges = frozenset(c.scope for c in chi.constraints if c.false_pairs)
    return NegativeStructureGraph(chi.num_variables, edges)


def valency(chi: CspPattern, v: int) -> int:
    """Number of distinct variables sharing a nontrivial constraint with v."""
    return sum(1 for c in chi.constraints if v in c.scope)


class InconsistencyGraph:
    """Points of an instance joined by its disallowed pairs.

    Points are indexed in (variable, ascending value) order; adjacency lives in
    a sparse boolean matrix so large instances stay cheap to classify.
    """

    def __init__(self, p: CspInstance) -> None:
        self.instance = p
        sorted_domains = [np.array(sorted(p.domains[v]), dtype=np.int64) for v in range(p.num_variables)]
        offsets = np.concatenate(([0], np.cumsum([len(d) for d in sorted_domains]))).astype(np.int64)
        self.points = [
            (v, int(a)) for v in range(p.num_variables) for a in sorted_domains[v]
        ]
        self.index = {pt: i for i, pt in enumerate(self.points)}
        self.var_of = np.array([pt[0] for pt in self.points], dtype=np.int64)
        # Shared pair sets (alldiff-style instances) are converted to ranks once.
        rank_cache: dict = {}
        rows, cols = [], []
        for (u, v), pairs in p.disallowed.items():
            key = (id(pairs), id(p.domains[u]), id(p.domains[v]))
            ranks = rank_cache.get(key)
            if ranks is None:
                arr = np.array(sorted(pairs), dtype=np.int64)
                ranks = (
                    np.searchsorted(sorted_domains[u], arr[:, 0]),
                    np.searchsorted(sorted_domains[v], arr[:, 1]),
                )
                rank_cache[key] = ranks
            rows.append(offsets[u] + ranks[0])
            cols.append(offsets[v] + ranks[1])
        n = len(self.points)
        if rows:
            i = np.concatenate(rows)
            j = np.concatenate(cols)
            data = np.ones(2 * len(i), dtype=bool)
            self.adj = csr_matrix(
                (data, (np.concatenate([i, j]), np.concatenate([j, i]))),
                shape=(n, n),
                dtype=bool,
            )
            self.adj.sum_duplicates()
        else:
            self.adj = csr_matrix((n, n), dtype=bool)

    @property
    def num_edges(self) -> int:
        return self.adj.nnz // 2

    def adjacent(self, i: int, j: int) -> bool:
        row = self.adj.indices[self.adj.indptr[i] : self.adj.indptr[i + 1]]
        pos = np.searchsorted(row, j)
        return bool(pos < len(row) and row[pos] == j)

    def neighbors(self, i: int) -> np.ndarray:
        return self.adj.indices[self.adj.indptr[i] : self.adj.indptr[i + 1]]

    def components(self) -> list:
        """Connected components as sorted index arrays, ordered by first point."""
        if not self.points:
            return []
        _, labels = _cc(self.adj, directed=False)
        order = np.argsort(labels, kind="stable")
        splits = np.searchsorted(labels[order], np.arange(labels.max() + 1))
        comps = np.split(order, splits[1:])
        return [np.sort(c) for c in comps]


def inconsistency_graph(p: CspInstance) -> InconsistencyGraph:
    """Graph over p's points with an edge per disallowed pair."""
    return InconsistencyGraph(p)


@dataclass(frozen=True)
class InconsistencyClique:
    """Every cross-variable point pair inside the component is disallowed."""

    points: tuple


@dataclass(frozen=True)
class TwoVariable:
    """Component on exactly two variables with at least one allowed cross pair."""

    points: tuple
    free_pair: tuple  # ((v, a), (w, b)) with (a, b) allowed


@dataclass(frozen=True)
class Violation:
    """Component showing two disallowed edges through a middle point whose ends are allowed."""

    points: tuple
    witness: Occurrence


def classify_component(g: InconsistencyGraph, comp) -> object:
    """Sort one connected component into clique / two-variable / violation."""
    comp = np.asarray(sorted(comp), dtype=np.int64)
    pts = tuple(g.points[i] for i in comp)
    comp_vars = g.var_of[comp]
    _, counts = np.unique(comp_vars, return_counts=True)
    cross_pairs = (len(comp) * len(comp) - int((counts * counts).sum())) // 2
    sub = g.adj[comp][:, comp]
    if sub.nnz // 2 == cross_pairs:
        return InconsistencyClique(pts)

    if len(counts) == 2:
        lo = comp[comp_vars == comp_vars.min()]
        hi = comp[comp_vars == comp_vars.max()]
        for i in lo:
            row = set(g.neighbors(i).tolist())
            for j in hi:
                if int(j) not in row:
                    return TwoVariable(pts, (g.points[i], g.points[j]))
        raise InternalInvariantViolation("two-variable component with no allowed cross pair")

    comp_set = set(comp.tolist())
    for m in comp:
        nbrs = [i for i in g.neighbors(m).tolist() if i in comp_set]
        for i, j in itertools.combinations(nbrs, 2):
            vi, vj, vm = g.var_of[i], g.var_of[j], g.var_of[m]
            if vi == vj or vi == vm or vj == vm:
                continue
            if not g.adjacent(i, j):
                return Violation(pts, _negtrans_witness(g.points[i], g.points[j], g.points[m]))
    raise InternalInvariantViolation(
        "component meets 3+ variables, is not a clique, yet shows no violation"
    )


def _negtrans_witness(p: tuple, q: tuple, m: tuple) -> Occurrence:
    """Occurrence of the negative-transitivity pattern at an allowed cherry p - m - q."""
    var_map = (p[0], q[0], m[0])
    point_map = {(0, 0): p[1], (1, 0): q[1], (2, 0): m[1]}
    scopes = {
        (0, 1): canonical_scope(p[0], q[0]),
        (0, 2): canonical_scope(p[0], m[0]),
        (1, 2): canonical_scope(q[0], m[0]),
    }
    return Occurrence(Renaming(var_map, point_map), scopes)


def is_forest(p: CspInstance) -> bool:
    """True iff the scopes carrying disallowed pairs form an acyclic graph."""
    parent = list(range(p.num_variables))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in p.disallowed:
        ru, rv = find(u), find(v)
        if ru == rv:
            return False
        parent[ru] = rv
    return True


def constraint_cycle(p: CspInstance) -> Optional[list]:
    """A cycle of variables in the constraint graph, or None when it is a forest."""
    g = NegativeStructureGraph(p.num_variables, frozenset(p.disallowed))
    return g.shortest_cycle()


@dataclass(frozen=True)
class Intractable:
    """The pattern hosts one of the hardness shapes, so its class is NP-hard."""

    name: str
    parameter: Optional[int]
    occurrence: Occurrence  # the named hardness pattern into the classified one


@dataclass(frozen=True)
class PivotEmbeddable:
    """The pattern occurs in a pivot of the recorded size."""

    r: int
    occurrence: Occurrence  # the classified pattern into pivot_pattern(r)


def _intersection_count(chi: CspPattern) -> tuple:
    """Count pairs of FALSE entries meeting at a point; also return the site variables."""
    incident = {}
    for c in chi.constraints:
        u, v = c.scope
        for a, b in c.false_pairs:
            incident[(u, a)] = incident.get((u, a), 0) + 1
            incident[(v, b)] = incident.get((v, b), 0) + 1
    total = sum(k * (k - 1) // 2 for k in incident.values())
    site_vars = sorted({pt[0] for pt, k in incident.items() if k >= 2})
    return total, site_vars


def classify_negative_pattern(chi: CspPattern) -> object:
    """Decide whether a connected flat negative pattern is hard or pivot-embeddable.

    Case order follows the structure of the shapes: a doubled scope, a cycle,
    too much valency, two meeting points, one meeting point away from the
    valency-3 variable, and otherwise an embedding into a pivot. Every verdict
    carries a witness found by the occurrence engine.
    """
    if not chi.is_negative:
        raise NotNegative("classification is defined for negative patterns only")
    if not chi.is_flat:
        raise NotFlat("classification is defined for flat patterns only")
    nsg = negative_structure_graph(chi)
    if not nsg.is_connected:
        raise NotConnected("classification is defined for connected patterns only")

    def found(name, parameter=None) -> Intractable:
        occ = occurs(build_named(name, parameter), chi)
        if occ is None:
            raise InternalInvariantViolation(
                f"{name}:{parameter} should occur per the case analysis but was not found"
            )
        return Intractable(name, parameter, occ)

    if any(len(c.false_pairs) >= 2 for c in chi.constraints):
        return found("cycle", 2)

    cycle = nsg.shortest_cycle()
    if cycle is not None:
        return found("cycle", len(cycle))

    degrees = [nsg.degree(v) for v in range(chi.num_variables)]
    three = [v for v, d in enumerate(degrees) if d == 3]
    if any(d >= 4 for d in degrees) or len(three) >= 2:
        return found("valency")

    meetings, site_vars = _intersection_count(chi)
    if meetings >= 2:
        return found("path")
    if meetings == 1 and three and site_vars[0] != three[0]:
        return found("valencypath")

    for r in range(1, max(chi.num_variables, 1) + 1):
        occ = occurs(chi, build_named("pivot", r))
        if occ is not None:
            return PivotEmbeddable(r, occ)
    raise InternalInvariantViolation(
        "pattern survived every hardness case yet embeds in no pivot of its size"
    )


def canonical_form(chi: CspPattern) -> tuple:
    """Smallest encoding of chi's constraints over all variable and value relabellings.

    Exponential in size, meant for small patterns. The context is not encoded;
    callers comparing patterns must hold it fixed (e.g. all variables distinct).
    """
    n = chi.num_variables
    best = None
    value_perm_space = [
        list(itertools.permutations(range(k))) for k in chi.values_per_variable
    ]
    for perm in itertools.permutations(range(n)):
        # perm maps old variable -> new variable
        new_values = [0] * n
        for old, new in enumerate(perm):
            new_values[new] = chi.values_per_variable[old]
        for vperms in itertools.product(*value_perm_space):
            encoded = []
            for c in chi.constraints:
                u, v = c.scope
                nu, nv = perm[u], perm[v]
                flip = nu > nv
                entries = []
                for (a, b), tv in c.entries:
                    na, nb = vperms[u][a], vperms[v][b]
                    pair = (nb, na) if flip else (na, nb)
                    entries.append((pair, tv.value))
                scope = (nv, nu) if flip else (nu, nv)
                encoded.append((scope, tuple(sorted(entries))))
            key = (tuple(new_values), tuple(sorted(encoded)))
            if best is None or key < best:
                best = key
    return best if best is not None else (tuple(chi.values_per_variable), ())
