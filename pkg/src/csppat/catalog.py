"""Builders for the named patterns and for pattern sets derived from polymorphisms."""

from __future__ import annotations

import itertools
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

from .errors import BadParameter, BoundExceeded
from .model import FALSE, TRUE, Context, CspPattern

_F, _T = FALSE, TRUE


def simple_pattern() -> CspPattern:
    """Two single-valued variables each clashing with one value of a third variable."""
    return CspPattern.build(
        [1, 1, 2],
        {(0, 2): {(0, 0): _F}, (1, 2): {(0, 1): _F}},
        neq_vars=[(0, 1), (0, 2), (1, 2)],
        neq_values=[((2, 0), (2, 1))],
    )


def max2_pattern() -> CspPattern:
    """Two allowed pairs whose componentwise maximum is disallowed, on ordered values."""
    return CspPattern.build(
        [2, 2],
        {(0, 1): {(0, 1): _T, (1, 0): _T, (1, 1): _F}},
        neq_vars=[(0, 1)],
        value_order=True,
    )


def tree_pattern() -> CspPattern:
    """Two earlier variables each clashing with a different value of a later one."""
    return CspPattern.build(
        [1, 1, 2],
        {(0, 2): {(0, 1): _F}, (1, 2): {(0, 0): _F}},
        var_order=(0, 1, 2),
    )


def btp_pattern() -> CspPattern:
    """The broken-triangle shape on three ordered variables."""
    return CspPattern.build(
        [1, 1, 2],
        {
            (0, 1): {(0, 0): _T},
            (0, 2): {(0, 0): _T, (0, 1): _F},
            (1, 2): {(0, 1): _T, (0, 0): _F},
        },
        var_order=(0, 1, 2),
    )


def negtrans_pattern() -> CspPattern:
    """One allowed edge and two disallowed edges meeting at a middle variable."""
    return CspPattern.build(
        [1, 1, 1],
        {(0, 1): {(0, 0): _T}, (0, 2): {(0, 0): _F}, (1, 2): {(0, 0): _F}},
        neq_vars=[(0, 1), (0, 2), (1, 2)],
    )


def cycle_pattern(k: int) -> CspPattern:
    """A directed cycle of k disallowed pairs over k pairwise-distinct variables.

    For k = 2 both pairs share one scope and the first variable's two values
    are held apart so the pairs cannot collapse into one.
    """
    if k < 2:
        raise BadParameter(f"cycle needs k >= 2, got {k}")
    if k == 2:
        return CspPattern.build(
            [2, 2],
            {(0, 1): {(0, 1): _F, (1, 0): _F}},
            neq_vars=[(0, 1)],
            neq_values=[((0, 0), (0, 1))],
        )
    entries = {(i, i + 1): {(0, 1): _F} for i in range(k - 1)}
    entries[(0, k - 1)] = {(1, 0): _F}
    return CspPattern.build(
        [2] * k,
        entries,
        neq_vars=itertools.combinations(range(k), 2),
    )


def valency_pattern() -> CspPattern:
    """Two three-leaf stars; the centers are left mergeable, the leaves are not.

    Variables: 0 and 1 are the centers (three values each), 2..4 the left
    leaves, 5..7 the right leaves. Each center value clashes with one leaf.
    """
    entries = {
        (0, 2): {(0, 0): _F},
        (0, 3): {(1, 0): _F},
        (0, 4): {(2, 0): _F},
        (1, 5): {(0, 0): _F},
        (1, 6): {(1, 0): _F},
        (1, 7): {(2, 0): _F},
    }
    neq = list(itertools.combinations([2, 3, 4, 5], 2)) + list(
        itertools.combinations([5, 6, 7], 2)
    )
    return CspPattern.build([3, 3, 1, 1, 1, 1, 1, 1], entries, neq_vars=neq)


def path_pattern() -> CspPattern:
    """Two two-edge paths of disallowed pairs over single-valued variables.

    Variables 0..2 form the first path and 3..5 the second; the first path's
    variables are also held apart from the second path's start.
    """
    entries = {
        (0, 1): {(0, 0): _F},
        (1, 2): {(0, 0): _F},
        (3, 4): {(0, 0): _F},
        (4, 5): {(0, 0): _F},
    }
    neq = list(itertools.combinations([0, 1, 2, 3], 2)) + list(
        itertools.combinations([3, 4, 5], 2)
    )
    return CspPattern.build([1] * 6, entries, neq_vars=neq)


def valency_path_pattern() -> CspPattern:
    """A three-leaf star next to a two-edge path, sharing no scope.

    Variable 0 is the star center (three values, one clash per leaf 1..3);
    variables 4..6 form the path. The center is held apart from the path's
    middle variable.
    """
    entries = {
        (0, 1): {(0, 0): _F},
        (0, 2): {(1, 0): _F},
        (0, 3): {(2, 0): _F},
        (4, 5): {(0, 0): _F},
        (5, 6): {(0, 0): _F},
    }
    neq = (
        list(itertools.combinations([1, 2, 3], 2))
        + list(itertools.combinations([4, 5, 6], 2))
        + [(0, 5)]
    )
    return CspPattern.build([3, 1, 1, 1, 1, 1, 1], entries, neq_vars=neq)


def _chain_entries(base: int, length: int) -> dict:
    return {(base + i, base + i + 1): {(0, 1): _F} for i in range(length - 1)}


def pivot_pattern(r: int) -> CspPattern:
    """A two-valued pivot joined to three length-r chains of disallowed pairs.

    Variable 0 is the pivot; arms occupy 1..r, r+1..2r and 2r+1..3r. The
    pivot's first value clashes with the first two arms, its second with the
    third. All variables are pairwise distinct.
    """
    if r < 1:
        raise BadParameter(f"pivot needs r >= 1, got {r}")
    n = 3 * r + 1
    entries = {
        (0, 1): {(0, 1): _F},
        (0, r + 1): {(0, 1): _F},
        (0, 2 * r + 1): {(1, 1): _F},
    }
    for base in (1, r + 1, 2 * r + 1):
        entries.update(_chain_entries(base, r))
    return CspPattern.build(
        [2] * n,
        entries,
        neq_vars=itertools.combinations(range(n), 2),
    )


def seppivot_pattern(r: int) -> CspPattern:
    """Like pivot_pattern but each arm clashes with its own pivot value."""
    if r < 1:
        raise BadParameter(f"seppivot needs r >= 1, got {r}")
    n = 3 * r + 1
    entries = {
        (0, 1): {(0, 1): _F},
        (0, r + 1): {(1, 1): _F},
        (0, 2 * r + 1): {(2, 1): _F},
    }
    for base in (1, r + 1, 2 * r + 1):
        entries.update(_chain_entries(base, r))
    return CspPattern.build(
        [3] + [2] * (n - 1),
        entries,
        neq_vars=itertools.combinations(range(n), 2),
    )


_PARAMETERLESS = {
    "simple": simple_pattern,
    "max2": max2_pattern,
    "tree": tree_pattern,
    "btp": btp_pattern,
    "negtrans": negtrans_pattern,
    "valency": valency_pattern,
    "path": path_pattern,
    "valencypath": valency_path_pattern,
}

_PARAMETRIC = {
    "cycle": cycle_pattern,
    "pivot": pivot_pattern,
    "seppivot": seppivot_pattern,
}

PATTERN_NAMES = tuple(sorted(_PARAMETERLESS)) + tuple(sorted(_PARAMETRIC))


def build(name: str, parameter: Optional[int] = None) -> CspPattern:
    """Build a named pattern; cycle/pivot/seppivot take a size parameter."""
    key = name.strip().lower().replace("-", "").replace("_", "")
    if key in _PARAMETERLESS:
        if parameter is not None:
            raise BadParameter(f"{name} takes no parameter")
        return _PARAMETERLESS[key]()
    if key in _PARAMETRIC:
        if parameter is None:
            raise BadParameter(f"{name} needs an integer parameter")
        return _PARAMETRIC[key](parameter)
    raise BadParameter(f"unknown pattern name {name!r}; known: {', '.join(PATTERN_NAMES)}")


def patterns_from_polymorphism(
    f: Union[Callable, Mapping],
    values: Sequence,
    arity: int,
    bound: int = 1_000_000,
) -> tuple:
    """Two-variable patterns whose absence makes every constraint closed under f.

    For each choice of `arity` value pairs, the chosen pairs are allowed and
    their componentwise f-image is disallowed; choices whose image equals one
    of the chosen pairs can never occur and are skipped. Values are relabelled
    densely per variable, order preserved, and duplicates dropped.
    """
    d = len(values)
    if arity < 1:
        raise BadParameter(f"arity must be positive, got {arity}")
    if (d * d) ** arity > bound:
        raise BoundExceeded(f"{(d * d) ** arity} choices exceed the bound {bound}")
    apply_f = f if callable(f) else (lambda *args, _table=dict(f): _table[args])

    out = []
    seen = set()
    pairs = list(itertools.product(values, repeat=2))
    for chosen in itertools.product(pairs, repeat=arity):
        image = (
            apply_f(*(p[0] for p in chosen)),
            apply_f(*(p[1] for p in chosen)),
        )
        if image in chosen:
            continue
        used0 = sorted({p[0] for p in chosen} | {image[0]})
        used1 = sorted({p[1] for p in chosen} | {image[1]})
        rank0 = {v: i for i, v in enumerate(used0)}
        rank1 = {v: i for i, v in enumerate(used1)}
        entries = {(rank0[a], rank1[b]): _T for a, b in chosen}
        entries[(rank0[image[0]], rank1[image[1]])] = _F
        pat = CspPattern.build(
            [len(used0), len(used1)],
            {(0, 1): entries},
            neq_vars=[(0, 1)],
            value_order=True,
        )
        key = (pat.values_per_variable, pat.constraints)
        if key not in seen:
            seen.add(key)
            out.append(pat)
    out.sort(key=lambda p: (p.values_per_variable, tuple(c.entries for c in p.constraints)))
    return tuple(out)
