"""Locality predicates, Baumslag P-localization of finite nilpotent groups,
equational locality, and checks built on them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .abelian import FGAbelian, invariants_of
from .errors import NotNilpotent, PredicateFailsOnBase, WellDefinednessFailure
from .group import (
    ORDER_CAP,
    FiniteGroup,
    GroupAction,
    GroupHom,
    Subgroup,
    center,
    commutator_subgroup,
    conjugation_action,
    hom_image,
    lower_central_series,
    nilpotency_class,
    normal_subgroups,
    prime_factors,
    pullback,
    quotient,
    semidirect_product,
    subgroup_generated,
    sylow_decomposition,
)
from .levine import EquationSystem, HarnessReport, count_solutions_per_parameter, format_word, SEARCH_CAP


def _is_prime(p: int) -> bool:
    return p >= 2 and prime_factors(p) == [p]


@dataclass(frozen=True)
class PrimeSet:
    primes: tuple[int, ...]

    def __post_init__(self):
        ps = tuple(sorted(set(int(p) for p in self.primes)))
        for p in ps:
            if not _is_prime(p):
                raise ValueError(f"{p} is not prime")
        object.__setattr__(self, "primes", ps)

    @classmethod
    def of(cls, primes: Iterable[int]) -> "PrimeSet":
        return cls(tuple(primes))

    def __iter__(self):
        return iter(self.primes)

    def __contains__(self, p: int) -> bool:
        return p in self.primes

    def __str__(self) -> str:
        return "{" + ",".join(map(str, self.primes)) + "}"


# -- divisibility ------------------------------------------------------------

def power_map(G: FiniteGroup, k: int) -> np.ndarray:
    """x -> x^k for every element (k >= 0), by repeated squaring."""
    result = np.zeros(G.order, dtype=np.int64)
    base = np.arange(G.order)
    while k:
        if k & 1:
            result = G.mul[result, base]
        base = G.mul[base, base]
        k >>= 1
    return result


def is_uniquely_p_divisible(G: FiniteGroup, p: int) -> bool:
    """x -> x^p is a bijection (injective suffices on a finite set)."""
    return np.unique(power_map(G, p)).size == G.order


def is_p_local(G: FiniteGroup, P: PrimeSet | Iterable[int]) -> bool:
    return all(is_uniquely_p_divisible(G, p) for p in P)


@dataclass(frozen=True)
class LocalityPredicate:
    name: str
    test: Callable[[FiniteGroup], bool] = field(compare=False)

    def __call__(self, G: FiniteGroup) -> bool:
        return bool(self.test(G))


def p_local(P: PrimeSet | Iterable[int]) -> LocalityPredicate:
    P = P if isinstance(P, PrimeSet) else PrimeSet.of(P)
    return LocalityPredicate(f"P-local{P}", lambda G: is_p_local(G, P))


def _no_order_2(G: FiniteGroup) -> bool:
    return not (G.element_orders == 2).any()


def _no_order_4(G: FiniteGroup) -> bool:
    # an element of order divisible by 4 has a power of order exactly 4
    return not (G.element_orders % 4 == 0).any()


NO_ORDER_2 = LocalityPredicate("no-order-2", _no_order_2)
NO_ORDER_4 = LocalityPredicate("no-order-4", _no_order_4)


# -- Baumslag localization ---------------------------------------------------

def baumslag_localize(G: FiniteGroup, P: PrimeSet | Iterable[int]) -> tuple[FiniteGroup, GroupHom]:
    """G modulo the Sylow p-subgroups for p in P (G finite nilpotent)."""
    P = P if isinstance(P, PrimeSet) else PrimeSet.of(P)
    sylow = sylow_decomposition(G)  # raises NotNilpotent
    gens: list[int] = []
    for p, S in sylow.items():
        if p in P:
            gens += S.generators
    N = subgroup_generated(G, gens)
    LG, eta = quotient(G, N)
    LG.name = f"L{P}({G.name})" if G.name else None
    if not is_p_local(LG, P):
        raise AssertionError("localization is not P-local")
    return LG, eta


def localize_hom(f: GroupHom, P: PrimeSet | Iterable[int],
                 source: tuple[FiniteGroup, GroupHom] | None = None,
                 target: tuple[FiniteGroup, GroupHom] | None = None) -> GroupHom:
    """Lf: LG -> LH with Lf eta_G = eta_H f."""
    LG, eta_g = source if source is not None else baumslag_localize(f.source, P)
    LH, eta_h = target if target is not None else baumslag_localize(f.target, P)
    reps = np.asarray(LG.coset_representatives)
    return GroupHom(LG, LH, eta_h.images[f.images[reps]])


def universality_counterexample(eta: GroupHom, f: GroupHom):
    """None if f factors through the (surjective) eta, else an element of
    Ker eta not killed by f. Uniqueness of the factorization is automatic."""
    if f.source is not eta.source:
        raise ValueError("f must start where eta starts")
    bad = np.flatnonzero((eta.images == 0) & (f.images != 0))
    return int(bad[0]) if bad.size else None


# -- semidirect products -----------------------------------------------------

def power_identity_product(A: FiniteGroup, U: Subgroup):
    """A ⋉ U with A acting by conjugation, plus the realization of U."""
    Ug, inc = U.as_group()
    S = semidirect_product(A, Ug, conjugation_action(A, U), order_cap=max(ORDER_CAP, A.order * Ug.order))
    return S, Ug, inc


def check_power_identity(A: FiniteGroup, U: Subgroup, n: int, product=None):
    """(a,u)^n = (a^n, a^-n (a u)^n) on A ⋉ U (U normal, A acting by
    conjugation), for every pair. Returns (True, None) or (False, (a, u)).

    ``product`` may pass a prebuilt ``power_identity_product(A, U)``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    S, Ug, inc = product if product is not None else power_identity_product(A, U)
    lhs = power_map(S.group, n)
    g = np.repeat(np.arange(A.order), Ug.order)
    u = np.tile(np.arange(Ug.order), A.order)
    an = power_map(A, n)
    au_n = an[A.mul[g, inc.images[u]]]
    second = A.mul[A.inv[an[g]], au_n]
    pos = np.full(A.order, -1, dtype=np.int64)
    pos[inc.images] = np.arange(Ug.order)
    if (pos[second] < 0).any():
        i = int(np.flatnonzero(pos[second] < 0)[0])
        return False, (int(g[i]), int(u[i]))
    rhs = an[g] * Ug.order + pos[second]
    if not np.array_equal(lhs, rhs):
        i = int(np.flatnonzero(lhs != rhs)[0])
        return False, (int(g[i]), int(u[i]))
    return True, None


def is_equivariantly_local(A: FiniteGroup, U: FiniteGroup, action: GroupAction,
                           pred: LocalityPredicate, order_cap: int = ORDER_CAP) -> bool:
    """pred(A ⋉ U), given pred(A)."""
    if not pred(A):
        raise PredicateFailsOnBase(f"{pred.name} fails on the acting group", witness=A.order)
    return pred(semidirect_product(A, U, action, order_cap=order_cap).group)


def harness_theorem35(pred: LocalityPredicate, instances: Iterable[tuple[FiniteGroup, Subgroup]],
                      order_cap: int = ORDER_CAP) -> HarnessReport:
    """pred(A) and pred(A ⋉ U) imply pred(A/U), for normal U with conjugation."""
    rep = HarnessReport(f"theorem35:{pred.name}")
    for A, U in instances:
        Ug, _ = U.as_group()
        if not pred(A):
            rep.notes.append({"skipped": A.name, "reason": "base not local"})
            continue
        if not is_equivariantly_local(A, Ug, conjugation_action(A, U), pred, order_cap):
            rep.notes.append({"skipped": A.name, "reason": "U not equivariantly local"})
            continue
        Q, _ = quotient(A, U)
        rep.record(pred(Q), {"A": A.name, "U": U.order})
    return rep


def harness_lemma31(f: GroupHom, pred: LocalityPredicate, order_cap: int = ORDER_CAP):
    """(a1, a2) -> (a1, a1^-1 a2) is an isomorphism A x_B A -> A ⋉ Ker f, and
    A ⋉ Ker f is local. Returns (ok, detail)."""
    A = f.source
    if not (pred(A) and pred(f.target)):
        raise PredicateFailsOnBase("source and target must be local")
    P = pullback(f, f, order_cap=max(order_cap, A.order * A.order))
    K = f.kernel()
    a = conjugation_action(A, K)
    Kg, inc = K.as_group()
    S = semidirect_product(A, Kg, a, order_cap=max(order_cap, A.order * Kg.order))
    pos = np.full(A.order, -1, dtype=np.int64)
    pos[inc.images] = np.arange(Kg.order)
    a1, a2 = P.left.images, P.right.images
    images = a1 * Kg.order + pos[A.mul[A.inv[a1], a2]]
    try:
        phi = GroupHom(P.group, S.group, images)
    except Exception as e:  # not a homomorphism
        return False, ("not a homomorphism", getattr(e, "witness", None))
    if not phi.is_isomorphism():
        return False, ("not bijective",)
    if not pred(S.group):
        return False, ("semidirect product not local",)
    return True, None


def _central_subgroups(G: FiniteGroup) -> list[Subgroup]:
    Z = center(G)
    return [N for N in normal_subgroups(G) if N <= Z]


def harness_section4(P: PrimeSet | Iterable[int], groups: Iterable[FiniteGroup],
                     localizer=baumslag_localize) -> HarnessReport:
    """eta(Z(G)) in Z(LG); central extensions localize to central extensions
    with LK -> LG -> LH -> 1 exact; class(LG) <= class(G); eta onto."""
    P = P if isinstance(P, PrimeSet) else PrimeSet.of(P)
    rep = HarnessReport(f"section4:{P}")
    for G in groups:
        LG, eta = localizer(G, P)
        cls_g = nilpotency_class(G)
        inst = {"G": G.name, "P": str(P)}
        rep.record(is_p_local(LG, P), {**inst, "check": "LG local"})
        rep.record(eta.image_of(center(G)) <= center(LG), {**inst, "check": "center"})
        rep.record(nilpotency_class(LG) <= cls_g, {**inst, "check": "class"})
        rep.record(eta.is_surjective(), {**inst, "check": "eta onto"})
        for K in _central_subgroups(G):
            if K.is_trivial:
                continue
            H, q = quotient(G, K)
            LH, eta_h = localizer(H, P)
            Lq = localize_hom(q, P, (LG, eta), (LH, eta_h))
            Kg, inc = K.as_group()
            LK, eta_k = localizer(Kg, P)
            Li = localize_hom(inc, P, (LK, eta_k), (LG, eta))
            ker = Lq.kernel()
            ok = Lq.is_surjective() and ker <= center(LG) and hom_image(Li) == ker
            rep.record(ok, {**inst, "check": "central extension", "K": K.order})
    return rep


def is_ns_map(f: GroupHom) -> bool:
    """[G, G] = [G, Im f]."""
    G = f.target
    whole = G.whole()
    return commutator_subgroup(G, whole, whole) == commutator_subgroup(G, hom_image(f), whole)


def harness_prop81(N: FiniteGroup, P: PrimeSet | Iterable[int]) -> HarnessReport:
    """[U,_n LN] = [U,_n Im eta] for P-local normal U of LN, n <= class + 1;
    and eta is an NS-map."""
    P = P if isinstance(P, PrimeSet) else PrimeSet.of(P)
    rep = HarnessReport(f"prop81:{P}")
    LN, eta = baumslag_localize(N, P)
    im = hom_image(eta)
    whole = LN.whole()
    top = nilpotency_class(LN) + 1
    for U in normal_subgroups(LN):
        if not all(U.order % p for p in P):
            continue
        for n in range(1, top + 1):
            ok = commutator_subgroup(LN, U, whole, n) == commutator_subgroup(LN, U, im, n)
            rep.record(ok, {"N": N.name, "P": str(P), "U": U.order, "n": n})
    rep.record(is_ns_map(eta), {"N": N.name, "P": str(P), "check": "NS-map"})
    return rep


# -- parameterized equation systems --------------------------------------------

def satisfies_system(G: FiniteGroup, sys: EquationSystem, cap: int = SEARCH_CAP) -> bool:
    """Every parameter assignment admits exactly one solution."""
    counts = count_solutions_per_parameter(G, sys, cap)
    return bool((counts == 1).all())


@dataclass(frozen=True)
class PresentationData:
    """F(A) -> (F(A) * F(X)) / <<E>>, kept symbolic."""
    source_generators: tuple[str, ...]
    target_generators: tuple[str, ...]
    relators: tuple[str, ...]


def translate_system(sys: EquationSystem) -> PresentationData:
    return PresentationData(tuple(sys.parameters), tuple(sys.parameters) + tuple(sys.variables),
                            tuple(format_word(r) for r in sys.relators))


# -- graded Lie ring -----------------------------------------------------------

@dataclass(eq=False)
class GradedLieRing:
    """Layers gamma_n / gamma_(n+1), n = 1..c, with the commutator bracket.

    ``brackets[(m, n)]`` is a |L_m| x |L_n| table into L_(m+n), or None when
    m + n > c (the bracket is zero there).
    """
    layers: list[FGAbelian]
    layer_groups: list[FiniteGroup]
    generators: list[tuple[int, ...]]
    brackets: dict

    @property
    def degree(self) -> int:
        return len(self.layers)

    def bracket(self, m: int, x: int, n: int, y: int) -> int:
        t = self.brackets.get((m, n))
        return 0 if t is None else int(t[x, y])

    def check_axioms(self):
        """Bilinearity, antisymmetry and Jacobi. Returns (True, None) or
        (False, (axiom, data))."""
        c = self.degree
        L = self.layer_groups
        for (m, n), t in self.brackets.items():
            if t is None:
                continue
            T = L[m + n - 1]
            # additive in the first slot: B(x g, y) = B(x, y) + B(g, y)
            for g in self.generators[m - 1]:
                lhs = t[L[m - 1].mul[:, g], :]
                rhs = T.mul[t, t[g][None, :]]
                if not np.array_equal(lhs, rhs):
                    return False, ("bilinear-left", m, n, g)
            for g in self.generators[n - 1]:
                lhs = t[:, L[n - 1].mul[:, g]]
                rhs = T.mul[t, t[:, g][:, None]]
                if not np.array_equal(lhs, rhs):
                    return False, ("bilinear-right", m, n, g)
            if m == n and (np.diagonal(t) != 0).any():
                return False, ("alternating", m)
            if not np.array_equal(self.brackets[(n, m)].T, T.inv[t]):
                return False, ("antisymmetric", m, n)
        for a in range(1, c + 1):
            for b in range(1, c + 1):
                for d in range(1, c + 1):
                    if a + b + d > c:
                        continue
                    T = L[a + b + d - 1]
                    for x in self.generators[a - 1]:
                        for y in self.generators[b - 1]:
                            for z in self.generators[d - 1]:
                                s1 = self.bracket(a + b, self.bracket(a, x, b, y), d, z)
                                s2 = self.bracket(b + d, self.bracket(b, y, d, z), a, x)
                                s3 = self.bracket(d + a, self.bracket(d, z, a, x), b, y)
                                if T.mul[T.mul[s1, s2], s3] != 0:
                                    return False, ("jacobi", (a, x), (b, y), (d, z))
        return True, None


def graded_lie_ring(G: FiniteGroup) -> GradedLieRing:
    series = lower_central_series(G)
    if not series.nilpotent:
        raise NotNilpotent(f"{G!r} is not nilpotent", witness=series.stable_term.order)
    terms = series.terms
    c = len(terms) - 1
    layer_groups, coset = [], []
    for n in range(1, c + 1):
        Gn, inc = terms[n - 1].as_group()
        nxt = Subgroup(Gn, terms[n].mask[inc.images])
        Q, proj = quotient(Gn, nxt)
        idx = np.full(G.order, -1, dtype=np.int64)
        idx[inc.images] = proj.images
        layer_groups.append(Q)
        coset.append(idx)
    brackets: dict = {}
    for m in range(1, c + 1):
        xs = np.asarray(terms[m - 1].elements)
        for n in range(1, c + 1):
            ys = np.asarray(terms[n - 1].elements)
            comm = G.mul[G.mul[G.inv[xs][:, None], G.inv[ys][None, :]], G.mul[xs[:, None], ys[None, :]]]
            k = m + n
            if k > c:
                if (comm != 0).any():
                    raise WellDefinednessFailure(f"[gamma_{m}, gamma_{n}] is not trivial")
                brackets[(m, n)] = None
                continue
            vals = coset[k - 1][comm]
            if (vals < 0).any():
                raise WellDefinednessFailure(f"[gamma_{m}, gamma_{n}] is not inside gamma_{k}")
            table = np.full((layer_groups[m - 1].order, layer_groups[n - 1].order), -1, dtype=np.int64)
            cx, cy = coset[m - 1][xs], coset[n - 1][ys]
            table[cx[:, None], cy[None, :]] = vals
            # every representative pair must give the same class
            if not np.array_equal(table[cx[:, None], cy[None, :]], vals):
                i, j = np.argwhere(table[cx[:, None], cy[None, :]] != vals)[0]
                raise WellDefinednessFailure("bracket depends on representatives",
                                             witness=(int(xs[i]), int(ys[j])))
            brackets[(m, n)] = table
    layers = [invariants_of(Q) for Q in layer_groups]
    gens = [tuple(Q.generators) for Q in layer_groups]
    return GradedLieRing(layers, layer_groups, gens, brackets)
