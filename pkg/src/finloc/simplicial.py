"""Truncated simplicial groups, Moore complexes, homotopy groups, and the
nerve of a crossed module."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonNormalImage, NotAHomomorphism, PeifferViolated, TruncationTooShallow
from .group import (
    ORDER_CAP,
    FiniteGroup,
    GroupAction,
    GroupHom,
    Subgroup,
    conjugation_action,
    hom_image,
    identity_hom,
    quotient,
    semidirect_product,
)


class PrecrossedModule:
    """An equivariant map boundary: U -> G, with G acting on U on the right.

    Equivariance ``d(u^g) = g^-1 d(u) g`` is checked on construction; the
    Peiffer flag records whether ``u1^d(u2) = u1^u2`` holds for all pairs.
    """

    def __init__(self, boundary: GroupHom, action: GroupAction):
        if action.group is not boundary.target or action.space is not boundary.source:
            raise ValueError("action and boundary do not fit together")
        self.boundary = boundary
        self.action = action
        G, U = boundary.target, boundary.source
        d = boundary.images
        g = np.arange(G.order)[:, None]
        lhs = d[action.act]  # d(u^g), shape |G| x |U|
        rhs = G.mul[G.mul[G.inv[g], d[None, :]], g]
        if not np.array_equal(lhs, rhs):
            gi, ui = np.argwhere(lhs != rhs)[0]
            raise ValueError(f"boundary is not equivariant at (u={ui}, g={gi})")
        self.peiffer_witness = _peiffer_witness(boundary, action)
        self.peiffer = self.peiffer_witness is None

    @property
    def source(self) -> FiniteGroup:
        return self.boundary.source

    @property
    def target(self) -> FiniteGroup:
        return self.boundary.target

    def __repr__(self) -> str:
        kind = "crossed" if self.peiffer else "precrossed"
        return f"<{kind} module {self.source.order} -> {self.target.order}>"


def _peiffer_witness(boundary: GroupHom, action: GroupAction):
    U = boundary.source
    u = np.arange(U.order)
    lhs = action.act[boundary.images][:, u].T  # [u1, u2] -> u1^d(u2)
    rhs = U.mul[U.mul[U.inv[None, :], u[:, None]], u[None, :]]  # u2^-1 u1 u2
    if np.array_equal(lhs, rhs):
        return None
    u1, u2 = np.argwhere(lhs != rhs)[0]
    return (int(u1), int(u2))


def inclusion_module(G: FiniteGroup, N: Subgroup) -> PrecrossedModule:
    """The crossed module N -> G for a normal subgroup, acting by conjugation."""
    a = conjugation_action(G, N)
    _, inc = N.as_group()
    return PrecrossedModule(GroupHom(a.space, G, inc.images, check=False), a)


def trivial_module(G: FiniteGroup) -> PrecrossedModule:
    return inclusion_module(G, G.trivial())


def pi1_of_precrossed(m: PrecrossedModule) -> FiniteGroup:
    """G / Im(boundary)."""
    Q, _ = quotient(m.target, hom_image(m.boundary))
    return Q


@dataclass(eq=False)
class TruncatedSimplicialGroup:
    """Levels G_0..G_N with faces[k][i]: G_k -> G_(k-1) and degeneracies
    degeneracies[k][i]: G_k -> G_(k+1). ``faces[0]`` is empty."""
    groups: list[FiniteGroup]
    faces: list[list[GroupHom]]
    degeneracies: list[list[GroupHom]]
    meta: dict = field(default_factory=dict)

    @property
    def depth(self) -> int:
        return len(self.groups) - 1

    def d(self, k: int, i: int) -> GroupHom:
        return self.faces[k][i]

    def s(self, k: int, i: int) -> GroupHom:
        return self.degeneracies[k][i]


def constant_simplicial(G: FiniteGroup, depth: int = 3) -> TruncatedSimplicialGroup:
    ident = identity_hom(G)
    faces = [[]] + [[ident] * (k + 1) for k in range(1, depth + 1)]
    degs = [[ident] * (k + 1) for k in range(depth)]
    return TruncatedSimplicialGroup([G] * (depth + 1), faces, degs)


def _first_mismatch(a: np.ndarray, b: np.ndarray):
    diff = np.flatnonzero(a != b)
    return int(diff[0]) if diff.size else None


def verify_simplicial(K: TruncatedSimplicialGroup) -> tuple[bool, tuple | None]:
    """Check every simplicial identity element-wise.

    Returns (True, None) or (False, (identity, level, element)).
    """
    N = K.depth
    for k in range(2, N + 1):
        for j in range(k + 1):
            for i in range(j):
                # d_i d_j = d_(j-1) d_i on G_k
                lhs = K.d(k - 1, i).images[K.d(k, j).images]
                rhs = K.d(k - 1, j - 1).images[K.d(k, i).images]
                x = _first_mismatch(lhs, rhs)
                if x is not None:
                    return False, (f"d{i} d{j} = d{j - 1} d{i}", k, x)
    for k in range(N - 1):
        for j in range(k + 1):
            for i in range(j + 1):
                # s_i s_j = s_(j+1) s_i on G_k
                lhs = K.s(k + 1, i).images[K.s(k, j).images]
                rhs = K.s(k + 1, j + 1).images[K.s(k, i).images]
                x = _first_mismatch(lhs, rhs)
                if x is not None:
                    return False, (f"s{i} s{j} = s{j + 1} s{i}", k, x)
    for k in range(N):
        ident = np.arange(K.groups[k].order)
        for j in range(k + 1):
            sj = K.s(k, j).images
            for i in range(k + 2):
                lhs = K.d(k + 1, i).images[sj]
                if i == j or i == j + 1:
                    rhs, name = ident, f"d{i} s{j} = id"
                elif i < j:
                    if k == 0:
                        continue
                    rhs, name = K.s(k - 1, j - 1).images[K.d(k, i).images], f"d{i} s{j} = s{j - 1} d{i}"
                else:
                    if k == 0:
                        continue
                    rhs, name = K.s(k - 1, j).images[K.d(k, i - 1).images], f"d{i} s{j} = s{j} d{i - 1}"
                x = _first_mismatch(lhs, rhs)
                if x is not None:
                    return False, (name, k, x)
    return True, None


@dataclass(eq=False)
class MooreComplex:
    levels: list[Subgroup]
    differentials: list[GroupHom | None]  # differentials[n]: NK_n -> G_(n-1), restricted d_0


def moore_complex(K: TruncatedSimplicialGroup) -> MooreComplex:
    """NK_n = intersection of Ker d_i for i = 1..n, with differential d_0."""
    levels = [K.groups[0].whole()]
    diffs: list[GroupHom | None] = [None]
    for n in range(1, K.depth + 1):
        mask = np.ones(K.groups[n].order, dtype=bool)
        for i in range(1, n + 1):
            mask &= K.d(n, i).images == 0
        NK = Subgroup(K.groups[n], mask)
        levels.append(NK)
        diffs.append(K.d(n, 0))
        # the differential must land in NK_(n-1), and d o d must vanish
        img = K.d(n, 0).images[list(NK.elements)]
        if not levels[n - 1].mask[img].all():
            raise NonNormalImage(f"d0(NK_{n}) is not inside NK_{n - 1}")
        if n >= 2 and (K.d(n - 1, 0).images[img] != 0).any():
            raise NonNormalImage(f"d o d does not vanish at level {n}")
    return MooreComplex(levels, diffs)


@dataclass(eq=False)
class HomotopyData:
    group: FiniteGroup
    cycles: Subgroup
    boundaries: Subgroup


def homotopy_data(K: TruncatedSimplicialGroup, n: int, moore: MooreComplex | None = None) -> HomotopyData:
    if not 0 <= n < K.depth:
        raise TruncationTooShallow(f"pi_{n} needs depth > {n}, have {K.depth}")
    M = moore if moore is not None else moore_complex(K)
    Gn = K.groups[n]
    if n == 0:
        cycles = Gn.whole()
    else:
        cycles = Subgroup(Gn, M.levels[n].mask & (K.d(n, 0).images == 0))
    bmask = np.zeros(Gn.order, dtype=bool)
    bmask[K.d(n + 1, 0).images[list(M.levels[n + 1].elements)]] = True
    boundaries = Subgroup(Gn, bmask, check=True)
    if not boundaries <= cycles:
        raise NonNormalImage(f"boundaries are not cycles at level {n}")
    Z, inc = cycles.as_group()
    pos = np.full(Gn.order, -1, dtype=np.int64)
    pos[inc.images] = np.arange(Z.order)
    B = Subgroup(Z, np.isin(np.arange(Z.order), pos[list(boundaries.elements)]))
    if not B.is_normal():
        raise NonNormalImage(f"boundary subgroup is not normal in the cycles at level {n}",
                             witness=B.normality_witness())
    Q, _ = quotient(Z, B)
    return HomotopyData(Q, cycles, boundaries)


def homotopy_group(K: TruncatedSimplicialGroup, n: int) -> FiniteGroup:
    """pi_n = Ker(d: NK_n -> NK_(n-1)) / d(NK_(n+1))."""
    return homotopy_data(K, n).group


def _decode(idx: np.ndarray, n: int, m: int) -> list[np.ndarray]:
    """Index at level n -> columns [g, u_1, ..., u_n]."""
    cols = []
    rest = idx.astype(np.int64)
    for _ in range(n):
        rest, u = np.divmod(rest, m)
        cols.append(u)
    cols.append(rest)
    return cols[::-1]


def _encode(cols: list[np.ndarray], m: int) -> np.ndarray:
    out = cols[0].astype(np.int64)
    for c in cols[1:]:
        out = out * m + c
    return out


def nerve(m: PrecrossedModule, depth: int = 3, order_cap: int = ORDER_CAP) -> TruncatedSimplicialGroup:
    """Nerve E_0 = G, E_(n+1) = E_n ⋉ U of a crossed module.

    E_n acts on the new U factor through (g, u_1..u_n) -> g d(u_1)...d(u_n).
    Every face and degeneracy is checked to be a homomorphism and all
    simplicial identities are verified before returning.
    """
    if depth < 1:
        raise ValueError("nerve depth must be at least 1")
    if not m.peiffer:
        raise PeifferViolated("boundary is not a crossed module", witness=m.peiffer_witness)
    G, U = m.target, m.source
    mU = U.order
    dU = m.boundary.images
    groups = [G]
    totals = [identity_hom(G)]
    for n in range(depth):
        E = groups[-1]
        act = m.action.pullback(totals[-1])
        S = semidirect_product(E, U, act, order_cap=order_cap)
        groups.append(S.group)
        tot = G.mul[np.repeat(totals[-1].images, mU), np.tile(dU, E.order)]
        totals.append(GroupHom(S.group, G, tot, check=False))

    faces: list[list[GroupHom]] = [[]]
    for n in range(1, depth + 1):
        cols = _decode(np.arange(groups[n].order), n, mU)
        g, us = cols[0], cols[1:]
        row = []
        for i in range(n + 1):
            if i == 0:
                new = [G.mul[g, dU[us[0]]]] + us[1:]
            elif i < n:
                new = [g] + us[:i - 1] + [U.mul[us[i - 1], us[i]]] + us[i + 1:]
            else:
                new = [g] + us[:-1]
            row.append(_checked_hom(groups[n], groups[n - 1], _encode(new, mU), f"d{i} at level {n}"))
        faces.append(row)
    degs: list[list[GroupHom]] = []
    for n in range(depth):
        cols = _decode(np.arange(groups[n].order), n, mU)
        g, us = cols[0], cols[1:]
        one = np.zeros_like(g)
        row = []
        for i in range(n + 1):
            # s_i inserts the identity in slot i (after u_(i-1))
            new = [g] + us[:i] + [one] + us[i:]
            row.append(_checked_hom(groups[n], groups[n + 1], _encode(new, mU), f"s{i} at level {n}"))
        degs.append(row)
    K = TruncatedSimplicialGroup(groups, faces, degs, meta={"module": m})
    ok, w = verify_simplicial(K)
    if not ok:
        raise NotAHomomorphism("nerve violates a simplicial identity", witness=w)
    return K


def _checked_hom(src: FiniteGroup, tgt: FiniteGroup, images: np.ndarray, what: str) -> GroupHom:
    try:
        return GroupHom(src, tgt, images)
    except NotAHomomorphism as e:
        raise NotAHomomorphism(f"{what} is not a homomorphism", witness=e.witness) from None


def truncate_to_precrossed(K: TruncatedSimplicialGroup) -> PrecrossedModule:
    """(d_0 restricted to N_1 = Ker d_1) : N_1 -> G_0, with G_0 acting by
    n^h = s_0(h)^-1 n s_0(h)."""
    if K.depth < 1:
        raise TruncationTooShallow("truncation needs depth >= 1")
    G0, G1 = K.groups[0], K.groups[1]
    N1 = Subgroup(G1, K.d(1, 1).images == 0)
    N, inc = N1.as_group()
    els = inc.images
    pos = np.full(G1.order, -1, dtype=np.int64)
    pos[els] = np.arange(N.order)
    s0 = K.s(0, 0).images
    h = s0[:, None]
    conj = G1.mul[G1.mul[G1.inv[h], els[None, :]], h]
    act = GroupAction(G0, N, pos[conj])
    boundary = GroupHom(N, G0, K.d(1, 0).images[els])
    m = PrecrossedModule(boundary, act)
    # pi_1 of the truncation is pi_0 of K: same subgroup of G_0
    b0 = homotopy_data(K, 0).boundaries if K.depth >= 1 else None
    if b0 is not None and hom_image(boundary) != b0:
        raise NonNormalImage("pi_1 of the truncation differs from pi_0")
    return m


def modules_isomorphic_via(m1: PrecrossedModule, m2: PrecrossedModule, phi: GroupHom, psi: GroupHom) -> bool:
    """Whether (phi: U1 -> U2, psi: G1 -> G2), both isomorphisms, commute with
    the boundaries and the actions."""
    if not (phi.is_isomorphism() and psi.is_isomorphism()):
        return False
    if not np.array_equal(psi.images[m1.boundary.images], m2.boundary.images[phi.images]):
        return False
    # phi(u^g) = phi(u)^psi(g)
    lhs = phi.images[m1.action.act]
    rhs = m2.action.act[psi.images][:, phi.images]
    return bool(np.array_equal(lhs, rhs))
