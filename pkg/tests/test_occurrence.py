"""Occurrence search: witnesses, merging, contexts, and agreement with brute force."""

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_occurrence, renaming_is_witness
from csppat.catalog import btp_pattern, cycle_pattern, negtrans_pattern, tree_pattern
from csppat.errors import (
    IllegalMerge,
    IncomparableMerge,
    IncompatibleContext,
    NotHomomorphic,
)
from csppat.generators import (
    gen_alldiff_unary,
    gen_pn_family,
    gen_random_instance,
    gen_random_pattern,
)
from csppat.model import (
    FALSE,
    TRUE,
    CspInstance,
    CspPattern,
    instance_as_pattern,
)
from csppat.occurrence import (
    Renaming,
    TargetSpace,
    apply_renaming,
    forbids,
    occurrence_valid_in_instance,
    occurrence_valid_in_pattern,
    occurs,
    occurs_in_instance,
)

# Two-variable target: x has values a=0, b=1; y has c=0, d=1.
# Entries (a,d) -> T, (b,c) -> T, (b,d) -> F.
def two_var_target():
    return CspPattern.build(
        [2, 2], {(0, 1): {(0, 1): TRUE, (1, 0): TRUE, (1, 1): FALSE}}
    )


def crossing_source():
    # Same as the target minus the F entry; embeds by the identity bijection.
    return CspPattern.build([2, 2], {(0, 1): {(0, 1): TRUE, (1, 0): TRUE}})


def value_merge_source():
    # y carries three values d=0, c=1, d'=2; d and d' behave identically.
    return CspPattern.build(
        [2, 3],
        {
            (0, 1): {
                (0, 0): TRUE,
                (0, 2): TRUE,
                (1, 0): FALSE,
                (1, 1): TRUE,
                (1, 2): FALSE,
            }
        },
    )


def variable_merge_source():
    # Single-valued x and z play the roles of the target's two x-values.
    return CspPattern.build(
        [1, 1, 2],
        {(0, 2): {(0, 1): TRUE}, (1, 2): {(0, 0): TRUE, (0, 1): FALSE}},
    )


def test_bijective_containment():
    chi, tau = crossing_source(), two_var_target()
    assert occurs(chi, tau) is not None
    identity = ((0, 1), {(0, 0): 0, (0, 1): 1, (1, 0): 0, (1, 1): 1})
    assert renaming_is_witness(chi, tau, *identity)


def test_value_merge_containment():
    chi, tau = value_merge_source(), two_var_target()
    assert occurs(chi, tau) is not None
    # d and d' collapse onto the target's d; the rest map across by name.
    merge = ((0, 1), {(0, 0): 0, (0, 1): 1, (1, 0): 1, (1, 1): 0, (1, 2): 1})
    assert renaming_is_witness(chi, tau, *merge)


def test_variable_merge_containment():
    chi, tau = variable_merge_source(), two_var_target()
    assert occurs(chi, tau) is not None
    # x and z collapse onto the target's x; their points become a and b.
    merge = ((0, 0, 1), {(0, 0): 0, (1, 0): 1, (2, 0): 0, (2, 1): 1})
    assert renaming_is_witness(chi, tau, *merge)


def test_occurs_in_self_identity():
    for chi in (two_var_target(), negtrans_pattern(), cycle_pattern(3)):
        occ = occurs(chi, chi)
        assert occ is not None
        assert tuple(occ.renaming.var_map) == tuple(range(chi.num_variables))
        assert all(occ.renaming.point_map[(x, a)] == a for x, a in chi.points())


def test_engine_witnesses_validate():
    chi, tau = value_merge_source(), two_var_target()
    occ = occurs(chi, tau)
    assert occurrence_valid_in_pattern(chi, occ, tau)
    assert renaming_is_witness(chi, tau, occ.renaming.var_map, occ.renaming.point_map)


def test_co_scoped_variables_never_merge():
    # Both patterns are a single F edge; the only 1-variable target fails.
    edge = CspPattern.build([1, 1], {(0, 1): {(0, 0): FALSE}})
    loop = CspPattern.build([2], {})
    assert occurs(edge, loop) is None


def test_ordered_source_needs_ordered_target():
    with pytest.raises(IncompatibleContext):
        occurs(tree_pattern(), two_var_target())
    with pytest.raises(IncompatibleContext):
        occurs_in_instance(tree_pattern(), gen_pn_family(3))


def test_value_ordered_source_needs_value_ordered_target():
    chi = CspPattern.build([2, 1], {(0, 1): {(0, 0): FALSE}}, value_order=True)
    with pytest.raises(IncompatibleContext):
        occurs(chi, two_var_target())


def test_ordered_containment_tree_in_btp():
    occ = occurs(tree_pattern(), btp_pattern())
    assert occ is not None
    assert occurrence_valid_in_pattern(tree_pattern(), occ, btp_pattern())


def test_negtrans_occurs_in_documented_three_variable_instance():
    # One allowed edge u-v plus disallowed pairs on u-p and p-v.
    p = CspInstance.build(
        [{0}, {0}, {0}], {(0, 1): {(0, 0)}, (1, 2): {(0, 0)}}
    )
    occ = occurs_in_instance(negtrans_pattern(), p)
    assert occ is not None
    assert tuple(occ.renaming.var_map) == (0, 2, 1)
    assert occurrence_valid_in_instance(negtrans_pattern(), occ, p)


def test_two_entry_cycle_needs_a_two_pair_scope():
    chi = cycle_pattern(2)
    assert occurs_in_instance(chi, gen_pn_family(3)) is None
    assert brute_occurrence(chi, gen_pn_family(3)) is None
    rich = CspInstance.build([{0, 1}, {0, 1}], {(0, 1): {(0, 1), (1, 0)}})
    assert occurs_in_instance(chi, rich) is not None


def test_forbids_alldiff_negtrans():
    p = gen_alldiff_unary(4, [{0, 1, 2}, {0, 1, 2, 3}, {1, 2}, {0, 3}])
    assert forbids(p, [negtrans_pattern()])


def test_forbids_vacuous_and_witness():
    p = CspInstance.build([{0}, {0}, {0}], {(0, 1): {(0, 0)}, (1, 2): {(0, 0)}})
    assert forbids(p, [])
    res = forbids(p, [cycle_pattern(2), negtrans_pattern()])
    assert not res
    assert res.pattern_index == 1
    assert occurrence_valid_in_instance(negtrans_pattern(), res.witness, p)


def test_apply_renaming_identity():
    chi = two_var_target()
    ident = Renaming((0, 1), {pt: pt[1] for pt in chi.points()})
    out = apply_renaming(chi, ident, TargetSpace.of(chi))
    assert out.constraints == chi.constraints


def test_apply_renaming_value_merge():
    chi, tau = value_merge_source(), two_var_target()
    r = Renaming((0, 1), {(0, 0): 0, (0, 1): 1, (1, 0): 1, (1, 1): 0, (1, 2): 1})
    out = apply_renaming(chi, r, TargetSpace.of(tau))
    assert out.constraints == tau.constraints


def test_apply_renaming_incomparable_merge():
    chi = CspPattern.build([1, 2], {(0, 1): {(0, 0): TRUE, (0, 1): FALSE}})
    r = Renaming((0, 1), {(0, 0): 0, (1, 0): 0, (1, 1): 0})
    with pytest.raises(IncomparableMerge):
        apply_renaming(chi, r, TargetSpace(2, (1, 1), chi.context))


def test_apply_renaming_illegal_merge():
    chi = CspPattern.build([1, 1], {(0, 1): {(0, 0): FALSE}})
    r = Renaming((0, 0), {(0, 0): 0, (1, 0): 0})
    with pytest.raises(IllegalMerge):
        apply_renaming(chi, r, TargetSpace(1, (1,), chi.context))


def test_apply_renaming_not_homomorphic():
    chi = CspPattern.build([1, 1], {}, neq_vars=[(0, 1)])
    r = Renaming((0, 0), {(0, 0): 0, (1, 0): 0})
    with pytest.raises(NotHomomorphic):
        apply_renaming(chi, r, TargetSpace(1, (1,), chi.context))


def _random_pattern(seed, n=None, values=3):
    n = n if n is not None else 2 + seed % 3
    return gen_random_pattern(n, values, 0.8, 0.6, seed)


@given(st.integers(0, 10_000), st.integers(0, 10_000))
@settings(max_examples=120, deadline=None)
def test_agrees_with_brute_force_on_patterns(seed_a, seed_b):
    chi = _random_pattern(seed_a)
    tau = _random_pattern(seed_b, n=2 + seed_b % 3)
    eng = occurs(chi, tau)
    bru = brute_occurrence(chi, tau)
    assert (eng is None) == (bru is None)
    if eng is not None:
        assert tuple(eng.renaming.var_map) == bru[0]
        assert dict(eng.renaming.point_map) == bru[1]


@given(st.integers(0, 10_000), st.integers(0, 10_000))
@settings(max_examples=120, deadline=None)
def test_agrees_with_brute_force_on_instances(seed_a, seed_b):
    chi = _random_pattern(seed_a, values=2)
    p = gen_random_instance(4, 3, 0.6, 0.3, seed_b)
    eng = occurs_in_instance(chi, p)
    bru = brute_occurrence(chi, p)
    assert (eng is None) == (bru is None)
    if eng is not None:
        assert tuple(eng.renaming.var_map) == bru[0]
        assert dict(eng.renaming.point_map) == bru[1]


@given(st.integers(0, 10_000))
@settings(max_examples=60, deadline=None)
def test_instance_route_matches_pattern_route(seed):
    chi = _random_pattern(seed, values=2)
    p = gen_random_instance(4, 2, 0.7, 0.4, seed + 1)
    via_instance = occurs_in_instance(chi, p)
    via_pattern = occurs(chi, instance_as_pattern(p))
    assert (via_instance is None) == (via_pattern is None)


def test_transitivity_composes():
    # Sparse sources embed into denser, larger targets often enough that a
    # fixed seed range yields plenty of composable chains; uniform random
    # pairs almost never compose.
    composed_checked = 0
    for seed in range(400):
        chi = gen_random_pattern(2, 2, 1.0, 0.5, seed)
        tau = gen_random_pattern(3, 3, 1.0, 0.7, seed + 20_000)
        target = gen_random_pattern(4, 3, 1.0, 0.9, seed + 40_000)
        first = occurs(chi, tau)
        second = occurs(tau, target) if first is not None else None
        if first is None or second is None:
            continue
        s1, t1 = first.renaming.var_map, first.renaming.point_map
        s2, t2 = second.renaming.var_map, second.renaming.point_map
        s = tuple(s2[w] for w in s1)
        t = {
            (x, a): t2[(s1[x], t1[(x, a)])]
            for x, a in chi.points()
        }
        assert renaming_is_witness(chi, target, s, t)
        assert occurs(chi, target) is not None
        composed_checked += 1
    assert composed_checked >= 25


def test_realisation_monotonicity():
    # Upgrading Undefined target entries never destroys an occurrence.
    upgraded_checked = 0
    for seed in itertools.count():
        chi = _random_pattern(seed)
        tau = _random_pattern(seed + 60_000)
        if occurs(chi, tau) is None:
            continue
        entries = {}
        for c in tau.constraints:
            entries[c.scope] = dict(c.entries)
        scope = tau.nontrivial_scopes[0]
        u, v = scope
        grid = itertools.product(
            range(tau.values_per_variable[u]), range(tau.values_per_variable[v])
        )
        for pair in grid:
            if pair not in entries[scope]:
                entries[scope][pair] = TRUE if pair[0] % 2 else FALSE
        richer = CspPattern.build(
            list(tau.values_per_variable),
            entries,
            neq_vars=tau.context.var_diseqs,
        )
        assert occurs(chi, richer) is not None
        upgraded_checked += 1
        if upgraded_checked >= 20:
            break


def test_monotonicity_lemma_small():
    # chi occurring in tau makes every chi-forbidding instance tau-forbidding.
    pairs_checked = 0
    for seed in itertools.count():
        chi = _random_pattern(seed, values=2)
        tau = _random_pattern(seed + 80_000, values=2)
        if occurs(chi, tau) is None:
            continue
        for inner in range(6):
            p = gen_random_instance(4, 3, 0.5, 0.35, seed * 31 + inner)
            if forbids(p, [chi]):
                assert forbids(p, [tau]), (seed, inner)
        pairs_checked += 1
        if pairs_checked >= 25:
            break
