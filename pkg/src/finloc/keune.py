"""Split couples of epimorphisms, right exact diagrams, and finite-instance
right-exactness testers for concrete endofunctors of groups."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NonNormalImage, OrderCapExceeded, TargetMismatch
from .group import (
    ORDER_CAP,
    FiniteGroup,
    GroupAction,
    GroupHom,
    Subgroup,
    conjugation_action,
    derived_subgroup,
    direct_product,
    hom_image,
    identity_hom,
    lower_central_series,
    normal_closure,
    pullback,
    quotient,
    semidirect_product,
)
from .simplicial import PrecrossedModule, TruncatedSimplicialGroup, homotopy_data, modules_isomorphic_via


@dataclass(eq=False)
class SplitCoupleEpi:
    """alpha0, alpha1: source -> target with a common section."""
    alpha0: GroupHom
    alpha1: GroupHom
    section: GroupHom

    def __post_init__(self):
        a0, a1, s = self.alpha0, self.alpha1, self.section
        if not (a0.source is a1.source is s.target and a0.target is a1.target is s.source):
            raise ValueError("couple maps do not fit together")
        ident = np.arange(self.target.order)
        if not np.array_equal(a0.images[s.images], ident):
            raise ValueError("section is not a section of alpha0")
        if not np.array_equal(a1.images[s.images], ident):
            raise ValueError("section is not a section of alpha1")

    @property
    def source(self) -> FiniteGroup:
        return self.alpha0.source

    @property
    def target(self) -> FiniteGroup:
        return self.alpha0.target


def kernel_pair_couple(phi: GroupHom, order_cap: int = ORDER_CAP) -> SplitCoupleEpi:
    """The two projections G x_H G -> G with the diagonal as section."""
    P = pullback(phi, phi, order_cap=order_cap)
    G = phi.source
    pos = {pair: i for i, pair in enumerate(P.pairs)}
    diag = GroupHom(G, P.group, [pos[(g, g)] for g in range(G.order)], check=False)
    return SplitCoupleEpi(P.left, P.right, diag)


# -- right-exactness conditions ---------------------------------------------

def i_of(c: SplitCoupleEpi) -> frozenset[tuple[int, int]]:
    """Image of (alpha0, alpha1) in target x target, as a set of pairs."""
    return frozenset(zip(c.alpha0.images.tolist(), c.alpha1.images.tolist()))


def k_of(phi: GroupHom) -> frozenset[tuple[int, int]]:
    """Pairs (g0, g1) with phi(g0) = phi(g1)."""
    xs, ys = np.nonzero(phi.images[:, None] == phi.images[None, :])
    return frozenset(zip(xs.tolist(), ys.tolist()))


def pairs_as_subgroup(pairs: frozenset, G: FiniteGroup, order_cap: int = ORDER_CAP) -> Subgroup:
    """Materialize a set of pairs as a subgroup of G x G."""
    D = direct_product(G, G, order_cap=order_cap)
    mask = np.zeros(D.group.order, dtype=bool)
    for a, b in pairs:
        mask[D.pair(a, b)] = True
    return Subgroup(D.group, mask, check=True)


def coequalizer_of_couple(c: SplitCoupleEpi) -> tuple[FiniteGroup, GroupHom]:
    """target / alpha0(Ker alpha1)."""
    H = c.target
    N = c.alpha1.kernel()
    img = c.alpha0.image_of(N)
    if not img.is_normal():
        raise NonNormalImage("alpha0(Ker alpha1) is not normal", witness=img.normality_witness())
    return quotient(H, img)


@dataclass(frozen=True)
class RightExactness:
    """The four conditions, each evaluated on its own."""
    equal_pairs: bool
    exact_sequence: bool
    coequalizer: bool
    onto_pullback: bool
    witnesses: dict = field(default_factory=dict, compare=False)

    @property
    def values(self) -> tuple[bool, bool, bool, bool]:
        return (self.equal_pairs, self.exact_sequence, self.coequalizer, self.onto_pullback)

    @property
    def agree(self) -> bool:
        return len(set(self.values)) == 1

    @property
    def holds(self) -> bool:
        return all(self.values)


def check_right_exact(c: SplitCoupleEpi, phi: GroupHom, order_cap: int | None = None) -> RightExactness:
    if phi.source is not c.target:
        raise TargetMismatch("phi must start at the target of the couple")
    if not phi.is_surjective():
        raise ValueError("phi must be surjective")
    G = c.target
    a0, a1 = c.alpha0.images, c.alpha1.images
    w: dict = {}

    # (1) I(alpha) = K(phi)
    I, K = i_of(c), k_of(phi)
    c1 = I == K
    if not c1:
        w["equal_pairs"] = min(I ^ K)

    # (2) alpha0(Ker alpha1) = Ker phi
    im = c.alpha0.image_of(c.alpha1.kernel())
    ker = phi.kernel()
    c2 = im == ker
    if not c2:
        w["exact_sequence"] = int(np.flatnonzero(im.mask != ker.mask)[0])

    # (3) phi coequalizes, and Ker phi is the normal closure of the differences
    coeq = bool(np.array_equal(phi.images[a0], phi.images[a1]))
    diffs = np.unique(G.mul[a0, G.inv[a1]])
    ncl = normal_closure(G, diffs.tolist())
    c3 = coeq and ncl == ker
    if not c3:
        w["coequalizer"] = ("phi a0 != phi a1",) if not coeq else ("kernel", ncl.order, ker.order)

    # (4) phi coequalizes and G' -> G x_G'' G is onto
    cap = order_cap if order_cap is not None else max(ORDER_CAP, G.order * G.order)
    P = pullback(phi, phi, order_cap=cap)
    c4 = False
    if coeq:
        pos = np.full((G.order, G.order), -1, dtype=np.int64)
        xs, ys = P.left.images, P.right.images
        pos[xs, ys] = np.arange(P.group.order)
        f = GroupHom(c.source, P.group, pos[a0, a1])
        c4 = f.is_surjective()
        if not c4:
            w["onto_pullback"] = int(np.flatnonzero(~np.isin(np.arange(P.group.order), f.images))[0])
    else:
        w["onto_pullback"] = ("phi a0 != phi a1",)
    return RightExactness(c1, c2, c3, c4, w)


# -- couples and precrossed modules -------------------------------------------

def _c_translate(m: PrecrossedModule) -> SplitCoupleEpi:
    H, N = m.target, m.source
    S = semidirect_product(H, N, m.action, order_cap=max(ORDER_CAP, H.order * N.order))
    d = m.boundary.images
    h = np.repeat(np.arange(H.order), N.order)
    n = np.tile(np.arange(N.order), H.order)
    a0 = GroupHom(S.group, H, H.mul[h, d[n]])
    return SplitCoupleEpi(a0, S.projection, S.embed_base)


def _n_translate(c: SplitCoupleEpi) -> tuple[PrecrossedModule, GroupHom]:
    """Returns the module and the inclusion Ker alpha1 -> source."""
    Gp, H = c.source, c.target
    N, inc = c.alpha1.kernel().as_group()
    els = inc.images
    pos = np.full(Gp.order, -1, dtype=np.int64)
    pos[els] = np.arange(N.order)
    s = c.section.images[:, None]
    act = GroupAction(H, N, pos[Gp.mul[Gp.mul[Gp.inv[s], els[None, :]], s]], check=False)
    return PrecrossedModule(GroupHom(N, H, c.alpha0.images[els]), act), inc


def c_translate(m: PrecrossedModule) -> SplitCoupleEpi:
    """(h, n) -> h d(n) and (h, n) -> h on H ⋉ N, with section h -> (h, 1)."""
    c = _c_translate(m)
    back, inc = _n_translate(c)
    # Ker alpha1 = {(1, n)}; n -> (1, n) is the canonical identification
    phi = GroupHom(m.source, back.source, np.argsort(inc.images), check=False)
    if not modules_isomorphic_via(m, back, phi, identity_hom(m.target)):
        raise AssertionError("round trip through the couple is not canonically isomorphic")
    return c


def n_translate(c: SplitCoupleEpi) -> PrecrossedModule:
    """alpha0 restricted to Ker alpha1, with n^h = n^section(h)."""
    m, inc = _n_translate(c)
    c2 = _c_translate(m)
    # (h, n) -> section(h) n is an isomorphism commuting with both maps
    nN = m.source.order
    h = np.repeat(np.arange(c.target.order), nN)
    n = np.tile(np.arange(nN), c.target.order)
    Gp = c.source
    iso = GroupHom(c2.source, Gp, Gp.mul[c.section.images[h], inc.images[n]])
    if not (iso.is_isomorphism()
            and np.array_equal(c.alpha0.images[iso.images], c2.alpha0.images)
            and np.array_equal(c.alpha1.images[iso.images], c2.alpha1.images)):
        raise AssertionError("round trip through the precrossed module is not canonically isomorphic")
    return m


# -- endofunctors ------------------------------------------------------------

class EndofunctorOracle:
    """A functor on finite groups given by its action on groups and homs.

    Results are cached per group object so that composable homs stay
    composable. Every hom passed through ``apply_hom`` is checked to map to a
    homomorphism and to commute with the coaugmentation; failures are recorded
    in ``violations`` and raised.
    """

    def __init__(self, name: str,
                 on_group: Callable[[FiniteGroup, int], tuple[FiniteGroup, GroupHom]],
                 on_hom: Callable[["EndofunctorOracle", GroupHom], np.ndarray],
                 size: Callable[[int], int] = lambda n: n):
        self.name = name
        self._on_group = on_group
        self._on_hom = on_hom
        self._size = size
        self._cache: dict[int, tuple[FiniteGroup, FiniteGroup, GroupHom]] = {}
        self.violations: list[tuple] = []
        self.order_cap = ORDER_CAP

    def output_order_bound(self, n: int) -> int:
        """An upper bound for |F(G)| when |G| = n."""
        return self._size(n)

    def _entry(self, G: FiniteGroup) -> tuple[FiniteGroup, GroupHom]:
        hit = self._cache.get(id(G))
        if hit is None or hit[0] is not G:
            if self._size(G.order) > self.order_cap:
                raise OrderCapExceeded(f"{self.name} of a group of order {G.order} exceeds the cap",
                                       witness=self._size(G.order))
            FG, eta = self._on_group(G, self.order_cap)
            hit = (G, FG, eta)
            self._cache[id(G)] = hit
        return hit[1], hit[2]

    def apply_group(self, G: FiniteGroup) -> FiniteGroup:
        return self._entry(G)[0]

    def coaugmentation(self, G: FiniteGroup) -> GroupHom:
        return self._entry(G)[1]

    def apply_hom(self, f: GroupHom) -> GroupHom:
        FS, FT = self.apply_group(f.source), self.apply_group(f.target)
        Ff = GroupHom(FS, FT, self._on_hom(self, f))
        lhs = self.coaugmentation(f.target).images[f.images]
        rhs = Ff.images[self.coaugmentation(f.source).images]
        if not np.array_equal(lhs, rhs):
            x = int(np.flatnonzero(lhs != rhs)[0])
            self.violations.append(("naturality", x))
            raise AssertionError(f"{self.name}: coaugmentation is not natural at {x}")
        return Ff

    def check_composition(self, f: GroupHom, g: GroupHom) -> bool:
        """F(g after f) = F(g) after F(f); recorded on failure."""
        ok = self.apply_hom(f.then(g)) == self.apply_hom(f).then(self.apply_hom(g))
        if not ok:
            self.violations.append(("composition", f, g))
        return ok

    def clear(self) -> None:
        self._cache.clear()

    def __repr__(self) -> str:
        return f"<EndofunctorOracle {self.name}>"


def _quotient_functor(name: str, normal: Callable[[FiniteGroup], Subgroup]) -> EndofunctorOracle:
    def on_group(G, cap):
        Q, proj = quotient(G, normal(G))
        return Q, proj

    def on_hom(F, f):
        # image of the coset of r is the coset of f(r)
        reps = np.asarray(F.apply_group(f.source).coset_representatives)
        return F.coaugmentation(f.target).images[f.images[reps]]

    return EndofunctorOracle(name, on_group, on_hom)


def abelianization_functor() -> EndofunctorOracle:
    return _quotient_functor("abelianization", derived_subgroup)


def nilpotent_quotient_functor(c: int) -> EndofunctorOracle:
    """G -> G / gamma_(c+1) G."""
    if c < 1:
        raise ValueError("class must be at least 1")

    def gamma(G):
        terms = lower_central_series(G).terms
        return terms[min(c, len(terms) - 1)]

    return _quotient_functor(f"G/gamma{c + 1}", gamma)


def square_functor() -> EndofunctorOracle:
    """G -> G x G with the diagonal as coaugmentation."""
    def on_group(G, cap):
        D = direct_product(G, G, order_cap=cap)
        g = np.arange(G.order)
        return D.group, GroupHom(G, D.group, g * G.order + g, check=False)

    def on_hom(F, f):
        m = f.target.order
        return (f.images[:, None] * m + f.images[None, :]).ravel()

    return EndofunctorOracle("square", on_group, on_hom, size=lambda n: n * n)


def identity_functor() -> EndofunctorOracle:
    return EndofunctorOracle("identity", lambda G, cap: (G, identity_hom(G)), lambda F, f: f.images)


def builtin_functors() -> dict[str, EndofunctorOracle]:
    return {
        "abelianization": abelianization_functor(),
        "G/gamma2": nilpotent_quotient_functor(1),
        "G/gamma3": nilpotent_quotient_functor(2),
        "square": square_functor(),
        "identity": identity_functor(),
    }


# -- Phi_G and Phi^PCr --------------------------------------------------------

@dataclass(eq=False)
class PhiSub:
    group: FiniteGroup
    action: GroupAction
    inclusion: GroupHom      # Phi_G U -> F(G ⋉ U)
    semidirect: object       # the Semidirect G ⋉ U


def phi_sub_g(F: EndofunctorOracle, G: FiniteGroup, U: FiniteGroup, a: GroupAction) -> PhiSub:
    """Ker(F(G ⋉ U) -> F(G)) with F(G) acting by conjugation through F(G) -> F(G ⋉ U)."""
    S = semidirect_product(G, U, a, order_cap=max(F.order_cap, G.order * U.order))
    FS = F.apply_group(S.group)
    Fp = F.apply_hom(S.projection)
    Fe = F.apply_hom(S.embed_base)
    K, inc = Fp.kernel().as_group()
    els = inc.images
    # F(G ⋉ U) splits as F(G) ⋉ K
    if not (Fe.is_injective() and FS.order == Fe.source.order * K.order
            and not np.isin(Fe.images[1:], els).any()):
        raise AssertionError(f"{F.name}: F(G ⋉ U) does not split over the kernel")
    pos = np.full(FS.order, -1, dtype=np.int64)
    pos[els] = np.arange(K.order)
    e = Fe.images[:, None]
    act = GroupAction(Fe.source, K, pos[FS.mul[FS.mul[FS.inv[e], els[None, :]], e]], check=False)
    return PhiSub(K, act, inc, S)


def phi_pcr(F: EndofunctorOracle, m: PrecrossedModule) -> PrecrossedModule:
    """F(mu) restricted to Phi_G U, where mu(g, u) = g d(u)."""
    G, U = m.target, m.source
    sub = phi_sub_g(F, G, U, m.action)
    S = sub.semidirect
    g = np.repeat(np.arange(G.order), U.order)
    u = np.tile(np.arange(U.order), G.order)
    mu = GroupHom(S.group, G, G.mul[g, m.boundary.images[u]])
    Fmu = F.apply_hom(mu)
    return PrecrossedModule(GroupHom(sub.group, Fmu.target, Fmu.images[sub.inclusion.images]), sub.action)


# -- right-exactness testers ----------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    holds: bool
    witness: object = None

    def __bool__(self) -> bool:
        return self.holds


def _kernel_matches(Fq: GroupHom, expected: Subgroup) -> Verdict:
    if not Fq.is_surjective():
        missing = int(np.flatnonzero(~np.isin(np.arange(Fq.target.order), Fq.images))[0])
        return Verdict(False, ("not onto", missing))
    ker = Fq.kernel()
    if ker != expected:
        x = int(np.flatnonzero(ker.mask != expected.mask)[0])
        return Verdict(False, ("kernel", x))
    return Verdict(True)


def test_right_exact_condition3(F: EndofunctorOracle, U: Subgroup) -> Verdict:
    """Phi_G U -> F(G) -> F(G/U) -> 1 is exact."""
    G = U.parent
    a = conjugation_action(G, U)
    Ug, inc = U.as_group()
    m = PrecrossedModule(GroupHom(Ug, G, inc.images, check=False), a)
    pc = phi_pcr(F, m)
    _, proj = quotient(G, U)
    Fq = F.apply_hom(proj)
    return _kernel_matches(Fq, hom_image(pc.boundary))


test_right_exact_condition3.__test__ = False


def test_right_exact_condition6(F: EndofunctorOracle, phi: GroupHom) -> Verdict:
    """F(G x_H G) => F(G) -> F(H) is a coequalizer diagram."""
    if not phi.is_surjective():
        raise ValueError("phi must be surjective")
    G = phi.source
    P = pullback(phi, phi, order_cap=max(F.order_cap, G.order * G.order))
    p0, p1 = F.apply_hom(P.left), F.apply_hom(P.right)
    FG = p0.target
    diffs = np.unique(FG.mul[p0.images, FG.inv[p1.images]])
    return _kernel_matches(F.apply_hom(phi), normal_closure(FG, diffs.tolist()))


test_right_exact_condition6.__test__ = False


def test_right_exact_condition5(F: EndofunctorOracle, K: TruncatedSimplicialGroup) -> Verdict:
    """pi_0(F K) -> F(pi_0 K) is an isomorphism, using levels 0 and 1."""
    B = homotopy_data(K, 0).boundaries
    _, proj = quotient(K.groups[0], B)
    Fd0, Fd1 = F.apply_hom(K.d(1, 0)), F.apply_hom(K.d(1, 1))
    FB = Fd0.image_of(Fd1.kernel())
    if not FB.is_normal():
        return Verdict(False, ("boundaries not normal", FB.normality_witness()))
    return _kernel_matches(F.apply_hom(proj), FB)


test_right_exact_condition5.__test__ = False
