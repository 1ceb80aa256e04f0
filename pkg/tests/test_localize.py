from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles as O
from finloc.errors import NotNilpotent, PredicateFailsOnBase, SearchCapExceeded
from finloc.families import (
    alternating,
    catalog,
    cyclic,
    dihedral,
    heisenberg,
    inversion_action,
    product,
    quaternion,
    symmetric,
)
from finloc.group import (
    GroupAction,
    GroupHom,
    center,
    conjugation_action,
    identity_hom,
    is_nilpotent,
    nilpotency_class,
    normal_subgroups,
    quotient,
    semidirect_product,
    trivial_hom,
)
from finloc.levine import EquationSystem, reduce, solve
from finloc.localize import (
    NO_ORDER_2,
    NO_ORDER_4,
    PrimeSet,
    baumslag_localize,
    check_power_identity,
    graded_lie_ring,
    harness_lemma31,
    harness_prop81,
    harness_section4,
    harness_theorem35,
    is_equivariantly_local,
    is_ns_map,
    is_p_local,
    is_uniquely_p_divisible,
    localize_hom,
    p_local,
    power_map,
    satisfies_system,
    translate_system,
    universality_counterexample,
)

NILPOTENT = [G for G in catalog(200) if is_nilpotent(G)]
SMALL_NILPOTENT = [G for G in NILPOTENT if G.order <= 32]
PRIME_SETS = [(2,), (3,), (2, 3), (5,)]


def subgroup_of_order(G, n):
    return next(N for N in normal_subgroups(G) if N.order == n)


def root_system(p):
    """x^p a = 1: one parameter a, one unknown x."""
    return EquationSystem(("x",), (reduce([("x", "x", 1)] * p + [("a", "a", 1)]),), parameters=("a",))


# -- prime sets and divisibility -------------------------------------------------------

def test_prime_set_normalizes():
    assert PrimeSet.of([5, 2, 2]).primes == (2, 5)
    assert str(PrimeSet.of([3, 2])) == "{2,3}"
    with pytest.raises(ValueError):
        PrimeSet.of([4])
    with pytest.raises(ValueError):
        PrimeSet.of([1])


def test_divisibility_examples():
    assert is_uniquely_p_divisible(cyclic(3), 2)
    assert not is_uniquely_p_divisible(cyclic(2), 2)
    assert is_p_local(cyclic(3), PrimeSet.of([2]))
    assert not is_p_local(cyclic(6), PrimeSet.of([2]))
    assert is_p_local(symmetric(3), PrimeSet.of([]))


@pytest.mark.parametrize("G", catalog(200), ids=lambda G: G.name)
def test_divisibility_matches_coprime_order(G):
    T = O.table(G)
    for p in (2, 3, 5, 7):
        naive = O.is_uniquely_p_divisible(T, p)
        assert is_uniquely_p_divisible(G, p) == naive == O.coprime(G.order, [p])


def test_power_map_matches_repeated_multiplication():
    G = dihedral(5)
    T = O.table(G)
    for k in range(7):
        expect = []
        for x in range(G.order):
            y = 0
            for _ in range(k):
                y = T[y][x]
            expect.append(y)
        assert power_map(G, k).tolist() == expect


def test_builtin_predicates():
    assert NO_ORDER_2(cyclic(9)) and not NO_ORDER_2(cyclic(6))
    assert NO_ORDER_4(cyclic(6)) and NO_ORDER_4(product(cyclic(2), cyclic(2)))
    assert not NO_ORDER_4(cyclic(8)) and not NO_ORDER_4(quaternion(8))
    assert p_local([2])(cyclic(15)) and not p_local([3])(cyclic(15))


# -- Baumslag localization -------------------------------------------------------------

def test_localization_examples():
    LG, eta = baumslag_localize(cyclic(6), PrimeSet.of([2]))
    assert LG.order == 3 and eta.is_surjective()
    LG, eta = baumslag_localize(quaternion(8), [2])
    assert LG.order == 1
    G = heisenberg(3)
    LG, eta = baumslag_localize(G, [2])
    assert LG.order == 27 and eta.is_isomorphism()
    with pytest.raises(NotNilpotent):
        baumslag_localize(symmetric(3), [2])


@pytest.mark.parametrize("P", PRIME_SETS, ids=str)
def test_localization_properties(P):
    for G in NILPOTENT:
        LG, eta = baumslag_localize(G, P)
        T = O.table(LG)
        assert all(O.is_uniquely_p_divisible(T, p) for p in P)
        assert eta.is_surjective()
        # LG keeps exactly the Sylow parts outside P
        kept = 1
        for q in {q for q in range(2, G.order + 1) if G.order % q == 0 and all(q % r for r in range(2, q))}:
            if q not in P:
                while G.order % (kept * q) == 0 and (G.order // kept) % q == 0:
                    kept *= q
        assert LG.order == kept
        assert nilpotency_class(LG) <= nilpotency_class(G)
        assert eta.image_of(center(G)) <= center(LG)
        assert is_ns_map(eta)


@pytest.mark.parametrize("P", PRIME_SETS, ids=str)
def test_universality_against_local_groups(P):
    """Every hom from G to a P-local group of the catalog factors through eta."""
    targets = [L for L in catalog(24) if is_p_local(L, P) and L.order > 1]
    assert targets
    for G in [G for G in SMALL_NILPOTENT if G.order <= 24]:
        _, eta = baumslag_localize(G, P)
        for L in targets:
            for images in O.all_homs(O.table(G), O.table(L)):
                f = GroupHom(G, L, images)
                assert universality_counterexample(eta, f) is None


def test_universality_detects_non_factoring_maps():
    G = cyclic(6)
    _, eta = baumslag_localize(G, [2])
    f = GroupHom(G, cyclic(2), [x % 2 for x in range(6)])
    bad = universality_counterexample(eta, f)
    assert bad is not None and eta.images[bad] == 0 and f.images[bad] != 0


def test_localize_hom_commutes():
    G, H = cyclic(12), cyclic(6)
    f = GroupHom(G, H, [x % 6 for x in range(12)])
    LG, eta_g = baumslag_localize(G, [2])
    LH, eta_h = baumslag_localize(H, [2])
    Lf = localize_hom(f, [2], (LG, eta_g), (LH, eta_h))
    assert np.array_equal(Lf.images[eta_g.images], eta_h.images[f.images])


# -- semidirect products and locality --------------------------------------------------

def _naive_power_identity(S, A, Ug, inc, n):
    """Check (a,u)^n = (a^n, a^-n (a u)^n) by repeated multiplication in S."""
    TS, TA = O.table(S.group), O.table(A)
    pos = {int(v): i for i, v in enumerate(inc.images)}
    for g in range(A.order):
        for u in range(Ug.order):
            x = g * Ug.order + u
            y = 0
            for _ in range(n):
                y = TS[y][x]
            au = TA[g][int(inc.images[u])]
            an, aun = 0, 0
            for _ in range(n):
                an, aun = TA[an][g], TA[aun][au]
            second = TA[O.inverse(TA, an)][aun]
            if y != an * Ug.order + pos[second]:
                return False
    return True


def test_power_identity_examples():
    S3 = symmetric(3)
    U = subgroup_of_order(S3, 3)
    assert check_power_identity(S3, U, 1) == (True, None)
    assert check_power_identity(S3, U, 2) == (True, None)
    with pytest.raises(ValueError):
        check_power_identity(S3, U, 0)


@given(st.sampled_from([G for G in catalog(40) if G.order > 1]), st.data(), st.integers(1, 6))
def test_power_identity_matches_direct_multiplication(A, data, n):
    U = data.draw(st.sampled_from(normal_subgroups(A)))
    assert check_power_identity(A, U, n) == (True, None)
    Ug, inc = U.as_group()
    S = semidirect_product(A, Ug, conjugation_action(A, U), order_cap=4096)
    assert _naive_power_identity(S, A, Ug, inc, n)


def test_equivariant_locality_examples():
    pred = p_local([2])
    C3, C5, C2, C1 = cyclic(3), cyclic(5), cyclic(2), cyclic(1)
    assert is_equivariantly_local(C3, C1, GroupAction.trivial(C3, C1), pred)
    assert is_equivariantly_local(C3, C5, GroupAction.trivial(C3, C5), pred)
    assert not is_equivariantly_local(C3, C2, GroupAction.trivial(C3, C2), pred)
    with pytest.raises(PredicateFailsOnBase):
        is_equivariantly_local(C2, C3, inversion_action(C2, C3), pred)


def test_quotient_harness_examples():
    pred = p_local([2])
    C15 = cyclic(15)
    rep = harness_theorem35(pred, [(C15, subgroup_of_order(C15, 3)), (C15, C15.trivial())])
    assert rep.ok and rep.instances == 2


def test_shear_map_examples():
    pred = p_local([2])
    C15, C5 = cyclic(15), cyclic(5)
    f = GroupHom(C15, C5, [x % 5 for x in range(15)])
    assert harness_lemma31(f, pred) == (True, None)
    assert harness_lemma31(identity_hom(C15), pred) == (True, None)
    with pytest.raises(PredicateFailsOnBase):
        harness_lemma31(identity_hom(cyclic(4)), pred)


@pytest.mark.parametrize("P", PRIME_SETS, ids=str)
def test_quotients_of_local_groups_are_local(P):
    pred = p_local(P)
    inst = [(A, U) for A in catalog(60) for U in normal_subgroups(A) if A.order * U.order <= 2000]
    rep = harness_theorem35(pred, inst)
    assert rep.ok
    # instances actually checked: A and A ⋉ U both of order coprime to P
    eligible = sum(1 for A, U in inst if O.coprime(A.order * U.order, P))
    assert rep.instances == eligible


# -- central extensions and NS-maps ------------------------------------------------------

@pytest.mark.parametrize("P", PRIME_SETS, ids=str)
def test_section4_harness(P):
    rep = harness_section4(P, SMALL_NILPOTENT)
    assert rep.ok and rep.instances >= 4 * len(SMALL_NILPOTENT)


def test_section4_examples():
    Q8 = quaternion(8)
    assert harness_section4([3], [Q8]).ok
    assert baumslag_localize(Q8, [3])[0].order == 8
    assert harness_section4([2], [Q8]).ok
    H = heisenberg(3)
    LG, _ = baumslag_localize(H, [2])
    assert nilpotency_class(LG) == nilpotency_class(H) == 2


def test_ns_map_examples():
    S3 = symmetric(3)
    assert is_ns_map(identity_hom(S3))
    assert is_ns_map(trivial_hom(cyclic(1), cyclic(6)))
    assert not is_ns_map(trivial_hom(cyclic(1), S3))


def test_commutator_equalities_examples():
    assert harness_prop81(cyclic(6), [2]).ok
    assert harness_prop81(product(cyclic(9), cyclic(7)), [2]).ok
    assert harness_prop81(heisenberg(3), [5]).ok


@pytest.mark.parametrize("P", PRIME_SETS, ids=str)
def test_commutator_equalities_all_nilpotent(P):
    for G in SMALL_NILPOTENT:
        assert harness_prop81(G, P).ok


# -- equation systems ------------------------------------------------------------------

def test_root_system_examples():
    assert satisfies_system(cyclic(3), root_system(2))
    assert not satisfies_system(cyclic(2), root_system(2))
    empty = EquationSystem(("x",), ())
    assert not satisfies_system(cyclic(3), empty)
    with pytest.raises(SearchCapExceeded):
        satisfies_system(cyclic(20), EquationSystem(("x", "y", "z"), ()), cap=1000)


@pytest.mark.parametrize("G", [G for G in catalog(60)], ids=lambda G: G.name)
def test_root_system_matches_divisibility(G):
    T = O.table(G)
    for p in (2, 3):
        assert satisfies_system(G, root_system(p)) == O.is_uniquely_p_divisible(T, p)


def test_root_system_solution_is_the_root():
    G = cyclic(5)
    sols = solve(G, root_system(2), parameters={"a": 1})
    # x^2 = a^-1 = 4 in Z/5 has the single root 2
    assert sols == [{"x": 2}]


def test_translate_system_examples():
    data = translate_system(root_system(2))
    assert data.source_generators == ("a",)
    assert data.target_generators == ("a", "x")
    assert len(data.relators) == 1 and "x" in data.relators[0] and "a" in data.relators[0]
    empty = translate_system(EquationSystem((), ()))
    assert empty.source_generators == empty.target_generators == () and empty.relators == ()
    trivial = translate_system(EquationSystem(("x",), (reduce([("x", "x", 1)]),)))
    assert trivial.source_generators == () and trivial.target_generators == ("x",)


# -- graded Lie ring -------------------------------------------------------------------

def test_graded_lie_ring_examples():
    R = graded_lie_ring(cyclic(12))
    assert R.degree == 1 and R.brackets[(1, 1)] is None
    R = graded_lie_ring(quaternion(8))
    assert [L.torsion for L in R.layers] == [(2, 2), (2,)]
    x, y = R.generators[0][:2]
    assert R.bracket(1, x, 1, y) != 0
    assert R.check_axioms() == (True, None)
    R = graded_lie_ring(heisenberg(3))
    assert [L.torsion for L in R.layers] == [(3, 3), (3,)]
    t = R.brackets[(1, 1)]
    # nondegenerate: only the zero class pairs trivially with everything
    assert [i for i in range(9) if (t[i] == 0).all()] == [0]
    with pytest.raises(NotNilpotent):
        graded_lie_ring(alternating(4))


@pytest.mark.parametrize("G", [G for G in NILPOTENT if G.order <= 64], ids=lambda G: G.name)
def test_graded_lie_ring_layers_and_axioms(G):
    R = graded_lie_ring(G)
    assert R.check_axioms() == (True, None)
    assert R.degree == O.nilpotency_class(O.table(G)) or G.order == 1
    terms = O.lower_central(O.table(G))
    for n, layer in enumerate(R.layer_groups):
        assert layer.order == len(terms[n]) // len(terms[n + 1])
