from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles as O
from finloc.errors import TargetMismatch
from finloc.families import catalog, cyclic, inversion_action, quaternion, symmetric
from finloc.group import (
    GroupHom,
    identity_hom,
    normal_subgroups,
    power_subgroup,
    quotient,
    trivial_hom,
)
from finloc.keune import (
    EndofunctorOracle,
    SplitCoupleEpi,
    builtin_functors,
    c_translate,
    check_right_exact,
    coequalizer_of_couple,
    i_of,
    identity_functor,
    abelianization_functor,
    k_of,
    kernel_pair_couple,
    n_translate,
    pairs_as_subgroup,
    phi_pcr,
    phi_sub_g,
    square_functor,
    test_right_exact_condition3 as condition3,
    test_right_exact_condition5 as condition5,
    test_right_exact_condition6 as condition6,
)
from finloc.simplicial import inclusion_module, nerve, pi1_of_precrossed, trivial_module

SMALL = [G for G in catalog(200) if G.order <= 24]


def z2_in_z4():
    C4 = cyclic(4)
    return C4, next(N for N in normal_subgroups(C4) if N.order == 2)


def identity_couple(G):
    ident = identity_hom(G)
    return SplitCoupleEpi(ident, ident, ident)


# -- pair sets ---------------------------------------------------------------------

def test_i_of_examples():
    G = quaternion(8)
    assert i_of(identity_couple(G)) == frozenset((h, h) for h in range(8))
    C4, N = z2_in_z4()
    I = i_of(c_translate(inclusion_module(C4, N)))
    assert len(I) == 8
    assert pairs_as_subgroup(I, C4).order == 8
    C1 = cyclic(1)
    assert i_of(identity_couple(C1)) == frozenset({(0, 0)})


def test_k_of_examples():
    G = symmetric(3)
    assert k_of(identity_hom(G)) == frozenset((g, g) for g in range(6))
    C4, C2 = cyclic(4), cyclic(2)
    assert len(k_of(GroupHom(C4, C2, [0, 1, 0, 1]))) == 8
    assert len(k_of(trivial_hom(G, cyclic(1)))) == 36


# -- coequalizers and translations ----------------------------------------------------

def test_coequalizer_examples():
    G = symmetric(3)
    Q, _ = coequalizer_of_couple(identity_couple(G))
    assert Q.order == 6
    C4, N = z2_in_z4()
    Q, _ = coequalizer_of_couple(c_translate(inclusion_module(C4, N)))
    assert Q.order == 2
    Q, _ = coequalizer_of_couple(c_translate(inclusion_module(G, G.whole())))
    assert Q.order == 1


def test_translation_examples():
    G = symmetric(3)
    c = c_translate(trivial_module(G))
    assert c.source.order == 6
    assert np.array_equal(c.alpha0.images, c.alpha1.images)
    C4, N = z2_in_z4()
    c = c_translate(inclusion_module(C4, N))
    assert c.source.order == 8
    m = n_translate(c)
    assert m.source.order == 2 and m.target is C4


@given(st.sampled_from([G for G in SMALL if G.order <= 16]), st.data())
def test_coequalizer_is_pi1_of_translation(G, data):
    N = data.draw(st.sampled_from(normal_subgroups(G)))
    _, psi = quotient(G, N)
    c = kernel_pair_couple(psi, order_cap=4096)
    Q, _ = coequalizer_of_couple(c)
    P = pi1_of_precrossed(n_translate(c))
    assert O.isomorphic_small(O.table(Q), O.table(P))
    assert Q.order * N.order == G.order


# -- the four right-exactness conditions --------------------------------------

def test_right_exact_examples():
    C4, N = z2_in_z4()
    c = c_translate(inclusion_module(C4, N))
    _, proj = quotient(C4, N)
    assert check_right_exact(c, proj).values == (True, True, True, True)
    res = check_right_exact(c, identity_hom(C4))
    assert res.values == (False, False, False, False)
    assert res.agree and set(res.witnesses) == {"equal_pairs", "exact_sequence", "coequalizer", "onto_pullback"}
    C1 = cyclic(1)
    assert check_right_exact(identity_couple(C1), identity_hom(C1)).holds


def test_right_exact_rejects_mismatch():
    C4, N = z2_in_z4()
    c = c_translate(inclusion_module(C4, N))
    with pytest.raises(TargetMismatch):
        check_right_exact(c, identity_hom(cyclic(4)))
    with pytest.raises(ValueError):
        check_right_exact(c, GroupHom(C4, C4, [0, 2, 0, 2]))


def _naive_conditions(c, phi):
    """The four conditions with Python sets on the tables."""
    T = O.table(c.target)
    a0, a1 = c.alpha0.images.tolist(), c.alpha1.images.tolist()
    f = phi.images.tolist()
    n = len(T)
    I = set(zip(a0, a1))
    K = {(x, y) for x in range(n) for y in range(n) if f[x] == f[y]}
    ker = {x for x in range(n) if f[x] == 0}
    im = {a0[x] for x in range(len(a0)) if a1[x] == 0}
    coeq = all(f[x] == f[y] for x, y in zip(a0, a1))
    diffs = {T[x][O.inverse(T, y)] for x, y in zip(a0, a1)}
    return (I == K, im == ker, coeq and O.normal_closure(T, diffs) == ker, coeq and I == K)


@given(st.sampled_from([G for G in SMALL if G.order <= 16]), st.data())
def test_four_conditions_agree_and_match_naive(G, data):
    normals = normal_subgroups(G)
    N = data.draw(st.sampled_from(normals))
    W = data.draw(st.sampled_from(normals))
    c = c_translate(inclusion_module(G, N))
    _, phi = quotient(G, W)
    res = check_right_exact(c, phi)
    assert res.agree
    assert res.holds == (N == W)
    assert res.values == _naive_conditions(c, phi)


# -- endofunctors ------------------------------------------------------------------------

def squares_functor() -> EndofunctorOracle:
    """G -> subgroup generated by squares, with the trivial coaugmentation.

    A functor, but not right exact: on Z/2 in Z/4 the square subgroup of
    Z/4 x Z/2 misses the kernel of Z/4 -> Z/2.
    """
    incl = {}

    def on_group(G, cap):
        H = power_subgroup(G, G.whole(), 2)
        FG, inc = H.as_group()
        incl[id(FG)] = inc
        return FG, trivial_hom(G, FG)

    def on_hom(F, f):
        src, tgt = F.apply_group(f.source), F.apply_group(f.target)
        s_inc, t_inc = incl[id(src)], incl[id(tgt)]
        pos = np.full(f.target.order, -1, dtype=np.int64)
        pos[t_inc.images] = np.arange(tgt.order)
        return pos[f.images[s_inc.images]]

    return EndofunctorOracle("squares", on_group, on_hom)


def test_phi_sub_examples():
    C2, C3 = cyclic(2), cyclic(3)
    a = inversion_action(C2, C3)
    sub = phi_sub_g(identity_functor(), C2, C3, a)
    assert sub.group.order == 3
    assert phi_sub_g(abelianization_functor(), C2, C3, a).group.order == 1
    assert phi_sub_g(square_functor(), C2, C3, a).group.order == 9


def test_phi_sub_identity_keeps_the_action():
    C2, C3 = cyclic(2), cyclic(3)
    a = inversion_action(C2, C3)
    sub = phi_sub_g(identity_functor(), C2, C3, a)
    # the kernel of the projection C2 ⋉ C3 -> C2 is {(1, u)}; index u
    assert sub.inclusion.images.tolist() == [0, 1, 2]
    assert np.array_equal(sub.action.act, a.act)


def test_phi_pcr_examples():
    C4, N = z2_in_z4()
    m = inclusion_module(C4, N)
    same = phi_pcr(identity_functor(), m)
    assert same.source.order == 2 and same.boundary.images.tolist() == m.boundary.images.tolist()
    ab = phi_pcr(abelianization_functor(), m)
    assert ab.source.order == 2 and ab.target.order == 4
    assert sorted(ab.boundary.images.tolist()) == sorted(m.boundary.images.tolist())
    G = symmetric(3)
    assert phi_pcr(abelianization_functor(), trivial_module(G)).source.order == 1


@pytest.mark.parametrize("name", ["abelianization", "G/gamma2", "G/gamma3", "square", "identity"])
def test_builtin_functors_pass_on_q8(name):
    F = builtin_functors()[name]
    F.order_cap = 4096
    G = quaternion(8)
    for U in normal_subgroups(G):
        assert condition3(F, U)
        _, phi = quotient(G, U)
        assert condition6(F, phi)
    C4, N = z2_in_z4()
    assert condition5(F, nerve(inclusion_module(C4, N), 2))


def test_condition6_examples():
    F = abelianization_functor()
    G = quaternion(8)
    assert condition6(F, identity_hom(G))
    Z = next(N for N in normal_subgroups(G) if N.order == 2)
    _, phi = quotient(G, Z)
    assert phi.target.order == 4 and condition6(F, phi)


def test_testers_reject_a_non_right_exact_functor():
    F = squares_functor()
    C4, N = z2_in_z4()
    v = condition3(F, N)
    assert not v.holds and v.witness[0] == "kernel"
    _, phi = quotient(C4, N)
    assert not condition6(F, phi).holds
    assert not condition5(F, nerve(inclusion_module(C4, N), 2)).holds


def test_naturality_violations_are_caught():
    def on_group(G, cap):
        return G, identity_hom(G)

    def bad_hom(F, f):  # send everything to the identity
        return np.zeros(f.source.order, dtype=np.int64)

    F = EndofunctorOracle("broken", on_group, bad_hom)
    C4, C2 = cyclic(4), cyclic(2)
    with pytest.raises(AssertionError):
        F.apply_hom(GroupHom(C4, C2, [0, 1, 0, 1]))
    assert F.violations and F.violations[0][0] == "naturality"


@given(st.sampled_from([G for G in SMALL if G.order <= 12]), st.data())
def test_functors_compose(G, data):
    N = data.draw(st.sampled_from(normal_subgroups(G)))
    M = data.draw(st.sampled_from([M for M in normal_subgroups(G) if N <= M]))
    Q1, p1 = quotient(G, N)
    Q2, p2 = quotient(G, M)
    reps = Q1.coset_representatives
    f2 = GroupHom(Q1, Q2, p2.images[list(reps)])
    for F in builtin_functors().values():
        assert F.check_composition(p1, f2)
