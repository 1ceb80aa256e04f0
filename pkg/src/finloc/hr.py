"""HR-closed and HR-A-closed subgroups, and the R-lower central series for
R = Z and Z/p."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .abelian import CoefficientRing, Zmod, induced_coinvariants_is_epi, induced_h1_is_epi
from .errors import Unsupported
from .group import (
    LATTICE_CAP,
    ORDER_CAP,
    FiniteGroup,
    GroupAction,
    GroupHom,
    Semidirect,
    Subgroup,
    all_subgroups,
    commutator_subgroup,
    conjugation_action,
    normal_subgroups,
    power_subgroup,
    prime_factors,
    product_subgroup,
    quotient,
    semidirect_product,
)
from .levine import HarnessReport


@dataclass(frozen=True, eq=False)
class HRContext:
    ambient: FiniteGroup
    R: CoefficientRing
    lattice_cap: int = LATTICE_CAP


def _inclusion(B: Subgroup, C: Subgroup) -> GroupHom:
    """B -> C between the realizations of two nested subgroups."""
    Bg, bi = B.as_group()
    Cg, ci = C.as_group()
    pos = np.full(C.parent.order, -1, dtype=np.int64)
    pos[ci.images] = np.arange(Cg.order)
    return GroupHom(Bg, Cg, pos[bi.images], check=False)


def is_hr_closed(ctx: HRContext, B: Subgroup):
    """H_1(B; R) -> H_1(B'; R) fails to be onto for every B' strictly above B.

    Returns (True, None) or (False, B')."""
    for C in all_subgroups(ctx.ambient, containing=B, lattice_cap=ctx.lattice_cap):
        if C == B:
            continue
        if induced_h1_is_epi(_inclusion(B, C), ctx.R):
            return False, C
    return True, None


@dataclass(frozen=True)
class HRAClosure:
    closed: bool
    witness: Subgroup | None
    semidirect: bool | None  # the definition through A ⋉ V inside A ⋉ U, when computed


def is_hr_a_closed(ctx: HRContext, U: FiniteGroup, a: GroupAction, V: Subgroup,
                   cross_check: bool = True, order_cap: int = ORDER_CAP,
                   semidirect: Semidirect | None = None) -> HRAClosure:
    """Coinvariants criterion over the A-stable V' with V < V' <= U, optionally
    compared with HR-closedness of A ⋉ V in A ⋉ U (``semidirect`` may pass a
    prebuilt A ⋉ U)."""
    if a.space is not U or a.group is not ctx.ambient or V.parent is not U:
        raise ValueError("action, group and subgroup do not fit together")
    if not a.is_stable(V):
        raise ValueError("V is not stable under the action")
    closed, witness = True, None
    for W in all_subgroups(U, containing=V, lattice_cap=ctx.lattice_cap):
        if W == V or not a.is_stable(W):
            continue
        inc = _inclusion(V, W)
        if induced_coinvariants_is_epi(inc, a.restrict(W), ctx.R):
            closed, witness = False, W
            break
    semi = None
    if cross_check and ctx.ambient.order * U.order <= order_cap:
        S = semidirect if semidirect is not None else semidirect_product(ctx.ambient, U, a, order_cap=order_cap)
        inner = HRContext(S.group, ctx.R, ctx.lattice_cap)
        semi, _ = is_hr_closed(inner, S.fiber_part(V))
    return HRAClosure(closed, witness, semi)


def r_lower_central_series(G: FiniteGroup, R: CoefficientRing) -> list[Subgroup]:
    """gamma_1 = G and gamma_(n+1) = [G, gamma_n] (R = Z) or
    [G, gamma_n] gamma_n^p (R = Z/p), until it stabilizes."""
    if R.tag == "Z":
        p = None
    elif R.tag == "Zmod" and prime_factors(R.n) == [R.n]:
        p = R.n
    else:
        raise Unsupported(f"R-lower central series over {R} is not implemented")
    whole = G.whole()
    terms = [whole]
    while True:
        cur = terms[-1]
        nxt = commutator_subgroup(G, cur, whole)
        if p is not None:
            nxt = product_subgroup(nxt, power_subgroup(G, cur, p))
        if nxt == cur:
            return terms
        terms.append(nxt)


def harness_lemma54(A: FiniteGroup, p: int, lattice_cap: int = LATTICE_CAP,
                    order_cap: int = ORDER_CAP) -> HarnessReport:
    """Every normal U of the p-group A is HZ/p-A-closed, and the Z/p-lower
    central series of A/U reaches 1."""
    if prime_factors(A.order) not in ([], [p]):
        raise ValueError(f"{A!r} is not a {p}-group")
    R = Zmod(p)
    ctx = HRContext(A, R, lattice_cap)
    a = conjugation_action(A, A.whole())
    # the realization of A.whole() is a copy of A with the same indices
    U_space = a.space
    rep = HarnessReport(f"lemma54:{A.name or A.order}:p={p}")
    S = None
    if A.order * A.order <= order_cap:
        S = semidirect_product(A, U_space, a, order_cap=order_cap)
    for U in normal_subgroups(A):
        V = Subgroup(U_space, U.mask)
        res = is_hr_a_closed(ctx, U_space, a, V, cross_check=S is not None, order_cap=order_cap, semidirect=S)
        inst = {"A": A.name, "U": U.order}
        rep.record(res.closed, {**inst, "check": "HR-A-closed"})
        if res.semidirect is not None:
            rep.record(res.semidirect == res.closed, {**inst, "check": "coinvariants vs semidirect"})
        Q, _ = quotient(A, U)
        rep.record(r_lower_central_series(Q, R)[-1].is_trivial, {**inst, "check": "series reaches 1"})
    return rep
