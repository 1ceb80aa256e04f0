"""Exact finite groups as validated Cayley tables.

Elements are dense indices ``0 .. order-1`` and the identity is always index 0.
Everything here is immutable after construction; tables are read-only numpy
arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    NotAGroup,
    NotAHomomorphism,
    NotNilpotent,
    NotNormal,
    OrderCapExceeded,
)

ORDER_CAP = 2000
LATTICE_CAP = 64

_INDEX = np.int32


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=_INDEX)
    a.setflags(write=False)
    return a


def _close(mul: np.ndarray, gens: Sequence[int], start: np.ndarray | None = None) -> np.ndarray:
    """Membership mask of everything reachable from ``start`` by right
    multiplication with ``gens`` (the identity if no start is given)."""
    n = mul.shape[0]
    mask = np.zeros(n, dtype=bool)
    if start is None:
        frontier = np.array([0], dtype=_INDEX)
    else:
        frontier = np.flatnonzero(start).astype(_INDEX)
    mask[frontier] = True
    g = np.asarray(list(gens), dtype=_INDEX)
    if g.size == 0:
        return mask
    while frontier.size:
        nxt = mul[frontier[:, None], g[None, :]].ravel()
        nxt = np.unique(nxt[~mask[nxt]])
        mask[nxt] = True
        frontier = nxt
    return mask


def _greedy_generators(mul: np.ndarray, candidates: Iterable[int]) -> tuple[list[int], np.ndarray]:
    """Pick candidates in order, keeping only those not yet generated."""
    n = mul.shape[0]
    mask = np.zeros(n, dtype=bool)
    mask[0] = True
    gens: list[int] = []
    for x in candidates:
        x = int(x)
        if not mask[x]:
            gens.append(x)
            mask = _extend(mul, mask, gens)
    return gens, mask


def _extend(mul: np.ndarray, mask: np.ndarray, gens: Sequence[int]) -> np.ndarray:
    """Subgroup generated by the subgroup ``mask`` (closed under gens[:-1])
    and gens[-1]. Leaving the old subgroup needs the new generator first, so
    the search starts from the coset H x."""
    H = np.flatnonzero(mask).astype(_INDEX)
    out = mask.copy()
    frontier = np.unique(mul[H, gens[-1]])
    frontier = frontier[~out[frontier]]
    out[frontier] = True
    g = np.asarray(list(gens), dtype=_INDEX)
    while frontier.size:
        nxt = mul[frontier[:, None], g[None, :]].ravel()
        nxt = np.unique(nxt[~out[nxt]])
        out[nxt] = True
        frontier = nxt
    return out


def _mask_to_bits(mask: np.ndarray) -> int:
    return int.from_bytes(np.packbits(mask, bitorder="little").tobytes(), "little")


class FiniteGroup:
    """A finite group given by its multiplication table.

    ``validate=True`` runs the full axiom check: identity at index 0, two-sided
    inverses, and associativity by Light's test over a generating set (exact,
    not sampled). ``validation`` records which check was run.
    """

    def __init__(self, mul, inv=None, labels=None, name: str | None = None,
                 validate: bool = True, order_cap: int | None = ORDER_CAP):
        table = np.asarray(mul)
        if table.ndim != 2 or table.shape[0] != table.shape[1] or table.shape[0] == 0:
            raise NotAGroup("multiplication table must be a non-empty square matrix")
        n = table.shape[0]
        if order_cap is not None and n > order_cap:
            raise OrderCapExceeded(f"group of order {n} exceeds order cap {order_cap}", witness=n)
        self.order = n
        self.mul = _frozen(table)
        self.name = name
        self.labels = tuple(labels) if labels is not None else None
        if validate:
            self.inv = _frozen(self._check_axioms())
            self.validation = "exact"
        else:
            if inv is None:
                inv = np.argmax(self.mul == 0, axis=1)
            self.inv = _frozen(inv)
            self.validation = "trusted"

    def _check_axioms(self) -> np.ndarray:
        mul, n = self.mul, self.order
        if mul.min() < 0 or mul.max() >= n:
            bad = np.argwhere((mul < 0) | (mul >= n))[0]
            raise NotAGroup("table entry out of range", witness=tuple(int(v) for v in bad))
        ar = np.arange(n)
        if not (np.array_equal(mul[0], ar) and np.array_equal(mul[:, 0], ar)):
            x = int(np.flatnonzero((mul[0] != ar) | (mul[:, 0] != ar))[0])
            raise NotAGroup("index 0 is not a two-sided identity", witness=("identity", x))
        has_right = (mul == 0).any(axis=1)
        if not has_right.all():
            x = int(np.flatnonzero(~has_right)[0])
            raise NotAGroup(f"element {x} has no inverse", witness=("inverse", x))
        inv = np.argmax(mul == 0, axis=1)
        left_ok = mul[inv, ar] == 0
        if not left_ok.all():
            x = int(np.flatnonzero(~left_ok)[0])
            raise NotAGroup(f"element {x} has no two-sided inverse", witness=("inverse", x))
        gens, mask = _greedy_generators(mul, range(n))
        # Light's associativity test: (x g) y == x (g y) for generators g suffices.
        for g in gens:
            lhs = mul[mul[:, g]]
            rhs = mul[:, mul[g]]
            if not np.array_equal(lhs, rhs):
                x, y = (int(v) for v in np.argwhere(lhs != rhs)[0])
                raise NotAGroup("multiplication is not associative", witness=("assoc", x, g, y))
        return inv

    # -- element arithmetic -------------------------------------------------

    def op(self, a: int, b: int) -> int:
        return int(self.mul[a, b])

    def inverse(self, a: int) -> int:
        return int(self.inv[a])

    def product(self, xs: Iterable[int]) -> int:
        acc = 0
        for x in xs:
            acc = int(self.mul[acc, x])
        return acc

    def power(self, a: int, k: int) -> int:
        if k < 0:
            a, k = int(self.inv[a]), -k
        acc, base = 0, int(a)
        while k:
            if k & 1:
                acc = int(self.mul[acc, base])
            base = int(self.mul[base, base])
            k >>= 1
        return acc

    def commutator(self, a: int, b: int) -> int:
        """[a, b] = a^-1 b^-1 a b."""
        inv, mul = self.inv, self.mul
        return int(mul[mul[inv[a], inv[b]], mul[a, b]])

    def conj(self, a: int, g: int) -> int:
        """a^g = g^-1 a g."""
        return int(self.mul[self.mul[self.inv[g], a], g])

    def label(self, x: int) -> str:
        return self.labels[x] if self.labels is not None else str(x)

    @cached_property
    def element_orders(self) -> np.ndarray:
        n = self.order
        orders = np.zeros(n, dtype=np.int64)
        cur = np.arange(n, dtype=_INDEX)
        base = cur.copy()
        k = 1
        while True:
            done = (cur == 0) & (orders == 0)
            orders[done] = k
            if (orders > 0).all():
                break
            cur = self.mul[cur, base]
            k += 1
        orders.setflags(write=False)
        return orders

    @cached_property
    def exponent(self) -> int:
        return int(np.lcm.reduce(self.element_orders))

    @cached_property
    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.mul, self.mul.T))

    @cached_property
    def generators(self) -> tuple[int, ...]:
        """Small generating set, chosen greedily by largest element order first."""
        cands = sorted(range(self.order), key=lambda x: (-int(self.element_orders[x]), x))
        gens, _ = _greedy_generators(self.mul, cands)
        return tuple(gens)

    def whole(self) -> "Subgroup":
        return Subgroup(self, np.ones(self.order, dtype=bool))

    def trivial(self) -> "Subgroup":
        m = np.zeros(self.order, dtype=bool)
        m[0] = True
        return Subgroup(self, m)

    def __repr__(self) -> str:
        name = f" {self.name}" if self.name else ""
        return f"<FiniteGroup{name} of order {self.order}>"


class Subgroup:
    """A subgroup of ``parent``, stored as a membership bitset."""

    def __init__(self, parent: FiniteGroup, mask: np.ndarray, check: bool = False):
        mask = np.asarray(mask, dtype=bool).copy()
        mask.setflags(write=False)
        self.parent = parent
        self.mask = mask
        self.bits = _mask_to_bits(mask)
        if check:
            els = np.flatnonzero(mask)
            mul = parent.mul
            if not mask[0] or not mask[parent.inv[els]].all() or not mask[mul[np.ix_(els, els)]].all():
                raise ValueError("subset is not a subgroup")

    @cached_property
    def elements(self) -> tuple[int, ...]:
        return tuple(int(x) for x in np.flatnonzero(self.mask))

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def index(self) -> int:
        return self.parent.order // self.order

    def __contains__(self, x: int) -> bool:
        return bool(self.mask[x])

    def __eq__(self, other) -> bool:
        return isinstance(other, Subgroup) and other.parent is self.parent and other.bits == self.bits

    def __hash__(self) -> int:
        return hash((id(self.parent), self.bits))

    def __le__(self, other: "Subgroup") -> bool:
        return self.bits & ~other.bits == 0

    def __lt__(self, other: "Subgroup") -> bool:
        return self <= other and self.bits != other.bits

    def __repr__(self) -> str:
        return f"<Subgroup of order {self.order} in {self.parent!r}>"

    @property
    def is_trivial(self) -> bool:
        return self.bits == 1

    @property
    def is_whole(self) -> bool:
        return self.order == self.parent.order

    @cached_property
    def generators(self) -> tuple[int, ...]:
        orders = self.parent.element_orders
        cands = sorted(self.elements, key=lambda x: (-int(orders[x]), x))
        gens, _ = _greedy_generators(self.parent.mul, cands)
        return tuple(gens)

    def normality_witness(self, within: "Subgroup | None" = None):
        """First (n, g) with n^g outside the subgroup, or None if normal.

        ``within`` restricts the conjugating elements (default: the parent).
        """
        G = self.parent
        conj_gens = G.generators if within is None else within.generators
        for g in conj_gens:
            for n in self.generators:
                if not self.mask[G.conj(n, g)]:
                    return (n, g)
        return None

    def is_normal(self, within: "Subgroup | None" = None) -> bool:
        return self.normality_witness(within) is None

    def intersection(self, other: "Subgroup") -> "Subgroup":
        return Subgroup(self.parent, self.mask & other.mask)

    def join(self, other: "Subgroup") -> "Subgroup":
        return subgroup_generated(self.parent, self.generators + other.generators)

    def is_central(self) -> bool:
        return self <= center(self.parent)

    @cached_property
    def _realization(self) -> tuple[FiniteGroup, "GroupHom"]:
        els = np.asarray(self.elements, dtype=_INDEX)
        pos = np.full(self.parent.order, -1, dtype=_INDEX)
        pos[els] = np.arange(len(els), dtype=_INDEX)
        table = pos[self.parent.mul[np.ix_(els, els)]]
        labels = None
        if self.parent.labels is not None:
            labels = [self.parent.labels[x] for x in els]
        # a subgroup's table needs no revalidation
        H = FiniteGroup(table, inv=pos[self.parent.inv[els]], labels=labels, validate=False, order_cap=None)
        return H, GroupHom(H, self.parent, els, check=False)

    def as_group(self) -> tuple[FiniteGroup, "GroupHom"]:
        """The subgroup as a group in its own right, with the inclusion."""
        return self._realization


class GroupHom:
    """A homomorphism, stored as the full table of images."""

    def __init__(self, source: FiniteGroup, target: FiniteGroup, images, check: bool = True):
        self.source = source
        self.target = target
        self.images = _frozen(np.asarray(images))
        if self.images.shape != (source.order,):
            raise ValueError("images must have one entry per source element")
        if check:
            w = self._witness()
            if w is not None:
                raise NotAHomomorphism("map does not respect multiplication", witness=w)

    def _witness(self):
        im, s, t = self.images, self.source, self.target
        if im.min() < 0 or im.max() >= t.order:
            return ("range",)
        if im[0] != 0:
            return (0, 0)
        gens = np.asarray(s.generators, dtype=_INDEX)
        if gens.size == 0:
            return None
        lhs = im[s.mul[:, gens]]
        rhs = t.mul[im[:, None], im[gens][None, :]]
        if not np.array_equal(lhs, rhs):
            x, j = np.argwhere(lhs != rhs)[0]
            return (int(x), int(gens[j]))
        return None

    def __call__(self, x: int) -> int:
        return int(self.images[x])

    def then(self, other: "GroupHom") -> "GroupHom":
        """``other`` after ``self``."""
        if other.source is not self.target:
            raise ValueError("composition of non-composable homomorphisms")
        return GroupHom(self.source, other.target, other.images[self.images], check=False)

    def image(self) -> Subgroup:
        return hom_image(self)

    def kernel(self) -> Subgroup:
        return hom_kernel(self)

    def is_injective(self) -> bool:
        return int(np.count_nonzero(self.images == 0)) == 1

    def is_surjective(self) -> bool:
        return np.unique(self.images).size == self.target.order

    def is_isomorphism(self) -> bool:
        return self.source.order == self.target.order and self.is_injective()

    def image_of(self, H: Subgroup) -> Subgroup:
        m = np.zeros(self.target.order, dtype=bool)
        m[self.images[list(H.elements)]] = True
        return Subgroup(self.target, m)

    def preimage(self, K: Subgroup) -> Subgroup:
        return Subgroup(self.source, K.mask[self.images])

    def __eq__(self, other) -> bool:
        return (isinstance(other, GroupHom) and other.source is self.source
                and other.target is self.target and np.array_equal(self.images, other.images))

    __hash__ = None

    def __repr__(self) -> str:
        return f"<GroupHom {self.source!r} -> {self.target!r}>"


def identity_hom(G: FiniteGroup) -> GroupHom:
    return GroupHom(G, G, np.arange(G.order), check=False)


def trivial_hom(source: FiniteGroup, target: FiniteGroup) -> GroupHom:
    return GroupHom(source, target, np.zeros(source.order), check=False)


class GroupAction:
    """Right action of ``group`` on ``space`` by automorphisms.

    ``act[g, u]`` is ``u^g``; the law is ``u^(gh) = (u^g)^h``.
    """

    def __init__(self, group: FiniteGroup, space: FiniteGroup, act, check: bool = True):
        self.group = group
        self.space = space
        self.act = _frozen(np.asarray(act))
        if self.act.shape != (group.order, space.order):
            raise ValueError("action table must be |G| x |U|")
        if check:
            w = self._witness()
            if w is not None:
                raise ValueError(f"not an action by automorphisms: {w}")

    def _witness(self):
        G, U, act = self.group, self.space, self.act
        if not np.array_equal(act[0], np.arange(U.order)):
            return ("identity acts nontrivially",)
        for s in G.generators:
            a = act[s]
            if np.unique(a).size != U.order:
                return ("not bijective", s)
            if not np.array_equal(a[U.mul], U.mul[a[:, None], a[None, :]]):
                return ("not a homomorphism", s)
            # u^(g s) == (u^g)^s for every g
            if not np.array_equal(act[G.mul[:, s]], a[act]):
                return ("action law fails", s)
        return None

    def __call__(self, u: int, g: int) -> int:
        return int(self.act[g, u])

    @classmethod
    def from_generators(cls, group: FiniteGroup, space: FiniteGroup, generator_actions: dict) -> "GroupAction":
        """Extend automorphisms given on generators of ``group`` to a full action."""
        n = group.order
        act = np.full((n, space.order), -1, dtype=_INDEX)
        act[0] = np.arange(space.order)
        gens = {int(g): np.asarray(p, dtype=_INDEX) for g, p in generator_actions.items()}
        queue = [0]
        seen = np.zeros(n, dtype=bool)
        seen[0] = True
        for x in queue:
            for s, p in gens.items():
                y = int(group.mul[x, s])
                img = p[act[x]]
                if seen[y]:
                    if not np.array_equal(act[y], img):
                        raise ValueError(f"generator actions are inconsistent at ({x}, {s})")
                else:
                    seen[y] = True
                    act[y] = img
                    queue.append(y)
        if not seen.all():
            raise ValueError("given elements do not generate the acting group")
        return cls(group, space, act)

    @classmethod
    def trivial(cls, group: FiniteGroup, space: FiniteGroup) -> "GroupAction":
        return cls(group, space, np.tile(np.arange(space.order), (group.order, 1)), check=False)

    def pullback(self, f: GroupHom) -> "GroupAction":
        """The action of ``f.source`` through ``f``."""
        return GroupAction(f.source, self.space, self.act[f.images], check=False)

    def is_stable(self, V: Subgroup) -> bool:
        return bool(V.mask[self.act[:, list(V.elements)]].all())

    def restrict(self, V: Subgroup) -> "GroupAction":
        """Restriction to an invariant subgroup ``V`` (realized as a group)."""
        H, inc = V.as_group()
        pos = np.full(self.space.order, -1, dtype=_INDEX)
        pos[inc.images] = np.arange(H.order)
        return GroupAction(self.group, H, pos[self.act[:, inc.images]], check=False)


def conjugation_action(G: FiniteGroup, N: Subgroup) -> GroupAction:
    """G acting on the normal subgroup N (realized as a group) by u^g = g^-1 u g."""
    H, inc = N.as_group()
    els = inc.images
    pos = np.full(G.order, -1, dtype=_INDEX)
    pos[els] = np.arange(H.order)
    conj = G.mul[G.mul[G.inv[:, None], els[None, :]], np.arange(G.order)[:, None]]
    act = pos[conj]
    if (act < 0).any():
        raise NotNormal("subgroup is not normal", witness=N.normality_witness())
    return GroupAction(G, H, act, check=False)


# -- construction ------------------------------------------------------------

def _perm_label(p: Sequence[int]) -> str:
    seen, out = set(), []
    for i in range(len(p)):
        if i in seen or p[i] == i:
            continue
        cyc, j = [i], p[i]
        seen.add(i)
        while j != i:
            seen.add(j)
            cyc.append(j)
            j = p[j]
        out.append("(" + " ".join(map(str, cyc)) + ")")
    return "".join(out) or "()"


def from_permutations(degree: int, generators: Sequence[Sequence[int]], order_cap: int = ORDER_CAP,
                      name: str | None = None) -> FiniteGroup:
    """Group generated by permutations of ``range(degree)``.

    Products compose left to right: ``(p q)(i) = q[p[i]]``. Elements are
    numbered in breadth-first order from the identity, generators tried in
    the given order.
    """
    if degree < 1:
        raise ValueError("degree must be positive")
    gens = []
    for g in generators:
        g = tuple(int(v) for v in g)
        if sorted(g) != list(range(degree)):
            raise ValueError(f"{g} is not a permutation of range({degree})")
        gens.append(g)
    ident = tuple(range(degree))
    index = {ident: 0}
    perms = [ident]
    for p in perms:
        for g in gens:
            q = tuple(g[i] for i in p)
            if q not in index:
                index[q] = len(perms)
                perms.append(q)
                if len(perms) > order_cap:
                    raise OrderCapExceeded(f"closure exceeds order cap {order_cap}", witness=order_cap)
    P = np.asarray(perms, dtype=np.int64)
    n = len(perms)
    weights = degree ** np.arange(degree, dtype=np.int64)
    codes = P @ weights
    sorter = np.argsort(codes)
    sorted_codes = codes[sorter]
    table = np.empty((n, n), dtype=_INDEX)
    for j in range(n):
        composed = P[j][P]  # row i is perms[i] followed by perms[j]
        c = composed @ weights
        table[:, j] = sorter[np.searchsorted(sorted_codes, c)]
    return FiniteGroup(table, labels=[_perm_label(p) for p in perms], name=name, order_cap=order_cap)


def from_table(table, name: str | None = None, order_cap: int = ORDER_CAP) -> FiniteGroup:
    """Validate a Cayley table. If the identity is not at index 0 it is swapped there."""
    t = np.asarray(table, dtype=np.int64)
    if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] == 0:
        raise NotAGroup("table must be a non-empty square matrix")
    n = t.shape[0]
    if t.min() < 0 or t.max() >= n:
        bad = np.argwhere((t < 0) | (t >= n))[0]
        raise NotAGroup("table entry out of range", witness=tuple(int(v) for v in bad))
    ar = np.arange(n)
    ids = [e for e in range(n) if np.array_equal(t[e], ar) and np.array_equal(t[:, e], ar)]
    labels = None
    if ids and ids[0] != 0:
        e = ids[0]
        perm = ar.copy()
        perm[0], perm[e] = e, 0  # new index -> old index
        old_to_new = np.argsort(perm)
        t = old_to_new[t[np.ix_(perm, perm)]]
        labels = [str(int(perm[i])) for i in range(n)]
    return FiniteGroup(t, labels=labels, name=name, order_cap=order_cap)


# -- subgroup calculus ---------------------------------------------------------

def subgroup_generated(G: FiniteGroup, S: Iterable[int]) -> Subgroup:
    _, mask = _greedy_generators(G.mul, sorted(set(int(s) for s in S)))
    return Subgroup(G, mask)


def normal_closure(G: FiniteGroup, S: Iterable[int]) -> Subgroup:
    """Smallest normal subgroup containing S."""
    gens, mask = _greedy_generators(G.mul, sorted(set(int(s) for s in S)))
    changed = True
    while changed:
        changed = False
        for g in G.generators:
            for n in list(gens):
                c = G.conj(n, g)
                if not mask[c]:
                    gens.append(c)
                    mask = _close(G.mul, gens, start=mask)
                    changed = True
    return Subgroup(G, mask)


def _commutator_values(G: FiniteGroup, H: Subgroup, K: Subgroup) -> np.ndarray:
    h = np.asarray(H.elements, dtype=_INDEX)[:, None]
    k = np.asarray(K.elements, dtype=_INDEX)[None, :]
    mul, inv = G.mul, G.inv
    return np.unique(mul[mul[inv[h], inv[k]], mul[h, k]])


def commutator_subgroup(G: FiniteGroup, H: Subgroup, K: Subgroup, n: int = 1) -> Subgroup:
    """[H, _n K]: [H,_0 K] = H and [H,_(n+1) K] = [[H,_n K], K]."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    cur = H
    for _ in range(n):
        cur = subgroup_generated(G, _commutator_values(G, cur, K))
    return cur


@dataclass(frozen=True)
class LowerCentralSeries:
    terms: tuple[Subgroup, ...]
    nilpotent: bool
    nilpotency_class: int | None

    @property
    def stable_term(self) -> Subgroup:
        return self.terms[-1]


def lower_central_series(G: FiniteGroup) -> LowerCentralSeries:
    """gamma_1 = G, gamma_(n+1) = [gamma_n, G], until the series stabilizes."""
    whole = G.whole()
    terms = [whole]
    while not terms[-1].is_trivial:
        nxt = commutator_subgroup(G, terms[-1], whole, 1)
        if nxt == terms[-1]:
            return LowerCentralSeries(tuple(terms), False, None)
        terms.append(nxt)
    return LowerCentralSeries(tuple(terms), True, len(terms) - 1)


def nilpotency_class(G: FiniteGroup) -> int:
    s = lower_central_series(G)
    if not s.nilpotent:
        raise NotNilpotent(f"{G!r} is not nilpotent", witness=s.stable_term.order)
    return s.nilpotency_class


def is_nilpotent(G: FiniteGroup) -> bool:
    return lower_central_series(G).nilpotent


def derived_subgroup(G: FiniteGroup) -> Subgroup:
    return commutator_subgroup(G, G.whole(), G.whole(), 1)


def center(G: FiniteGroup) -> Subgroup:
    gens = np.asarray(G.generators, dtype=_INDEX)
    if gens.size == 0:
        return G.whole()
    mask = (G.mul[:, gens] == G.mul[gens, :].T).all(axis=1)
    return Subgroup(G, mask)


def centralizer(G: FiniteGroup, H: Subgroup) -> Subgroup:
    gens = np.asarray(H.generators, dtype=_INDEX)
    if gens.size == 0:
        return G.whole()
    return Subgroup(G, (G.mul[:, gens] == G.mul[gens, :].T).all(axis=1))


def quotient(G: FiniteGroup, N: Subgroup) -> tuple[FiniteGroup, GroupHom]:
    """G/N on cosets, each represented by its smallest element."""
    if N.parent is not G:
        raise ValueError("subgroup of a different group")
    w = N.normality_witness()
    if w is not None:
        raise NotNormal("subgroup is not normal", witness=w)
    n = G.order
    coset = np.full(n, -1, dtype=_INDEX)
    reps: list[int] = []
    els = np.asarray(N.elements, dtype=_INDEX)
    for x in range(n):
        if coset[x] < 0:
            coset[G.mul[x, els]] = len(reps)
            reps.append(x)
    r = np.asarray(reps, dtype=_INDEX)
    table = coset[G.mul[np.ix_(r, r)]]
    labels = [G.label(x) + "N" if N.order > 1 else G.label(x) for x in reps]
    # a quotient by a verified normal subgroup is a group by construction
    Q = FiniteGroup(table, inv=coset[G.inv[r]], labels=labels, validate=False, order_cap=None)
    Q.coset_representatives = tuple(reps)
    return Q, GroupHom(G, Q, coset, check=False)


@dataclass(frozen=True, eq=False)
class Semidirect:
    """G ⋉ U on pairs (g, u) with (g,u)(g',u') = (gg', u^g' u').

    The pair (g, u) has index ``g * |U| + u``.
    """
    group: FiniteGroup
    base: FiniteGroup
    fiber: FiniteGroup
    action: GroupAction
    embed_base: GroupHom
    embed_fiber: GroupHom
    projection: GroupHom

    def pair(self, g: int, u: int) -> int:
        return int(g) * self.fiber.order + int(u)

    def split(self, x: int) -> tuple[int, int]:
        return divmod(int(x), self.fiber.order)

    def fiber_part(self, V: Subgroup, base: Subgroup | None = None) -> Subgroup:
        """The subgroup base ⋉ V (base defaults to all of G)."""
        bmask = np.ones(self.base.order, dtype=bool) if base is None else base.mask
        return Subgroup(self.group, np.outer(bmask, V.mask).ravel())

    def __iter__(self):
        return iter((self.group, self.embed_base, self.embed_fiber, self.projection))


def semidirect_product(G: FiniteGroup, U: FiniteGroup, a: GroupAction | None = None,
                       order_cap: int = ORDER_CAP) -> Semidirect:
    if a is None:
        a = GroupAction.trivial(G, U)
    if a.group is not G or a.space is not U:
        raise ValueError("action does not match the given groups")
    n, m = G.order, U.order
    if n * m > order_cap:
        raise OrderCapExceeded(f"semidirect product of order {n * m} exceeds cap {order_cap}", witness=n * m)
    gpart = G.mul[:, None, :, None].astype(np.int64) * m
    upart = U.mul[a.act.T[:, :, None], np.arange(m)[None, None, :]]  # [u, g', u']
    table = (gpart + upart[None, :, :, :]).reshape(n * m, n * m)
    # trusted: the action was verified when it was built.
    # (g, u)^-1 = (g^-1, (u^(g^-1))^-1)
    ginv = np.repeat(G.inv, m)
    uinv = U.inv[a.act[ginv, np.tile(np.arange(m), n)]]
    S = FiniteGroup(table, inv=ginv * m + uinv, validate=False, order_cap=None)
    ar_n, ar_m = np.arange(n), np.arange(m)
    return Semidirect(
        group=S, base=G, fiber=U, action=a,
        embed_base=GroupHom(G, S, ar_n * m, check=False),
        embed_fiber=GroupHom(U, S, ar_m, check=False),
        projection=GroupHom(S, G, np.repeat(ar_n, m), check=False),
    )


def direct_product(G: FiniteGroup, H: FiniteGroup, order_cap: int = ORDER_CAP) -> Semidirect:
    return semidirect_product(G, H, GroupAction.trivial(G, H), order_cap=order_cap)


@dataclass(frozen=True, eq=False)
class Pullback:
    """G x_H K as a group of pairs, with its two projections."""
    group: FiniteGroup
    left: GroupHom
    right: GroupHom
    pairs: tuple[tuple[int, int], ...]

    def __iter__(self):
        return iter((self.group, self.left, self.right))


def pullback(f: GroupHom, g: GroupHom, order_cap: int = ORDER_CAP) -> Pullback:
    if f.target is not g.target:
        raise ValueError("pullback needs a common target")
    G, K = f.source, g.source
    match = f.images[:, None] == g.images[None, :]
    xs, ys = np.nonzero(match)  # lexicographic, so (0, 0) comes first
    n = xs.size
    if n > order_cap:
        raise OrderCapExceeded(f"pullback of order {n} exceeds cap {order_cap}", witness=n)
    pos = np.full((G.order, K.order), -1, dtype=_INDEX)
    pos[xs, ys] = np.arange(n)
    table = pos[G.mul[np.ix_(xs, xs)], K.mul[np.ix_(ys, ys)]]
    P = FiniteGroup(table, order_cap=None)
    pairs = tuple(zip(xs.tolist(), ys.tolist()))
    return Pullback(P, GroupHom(P, G, xs), GroupHom(P, K, ys), pairs)


def hom_from_generators(source: FiniteGroup, target: FiniteGroup, generator_images: dict) -> GroupHom:
    """Extend images given on generators of ``source`` to a homomorphism.

    Raises NotAHomomorphism with a witness ``(x, s)`` where the forced value
    of ``x*s`` disagrees with the value already assigned.
    """
    imgs = {int(k): int(v) for k, v in generator_images.items()}
    n = source.order
    out = np.full(n, -1, dtype=_INDEX)
    out[0] = 0
    queue = [0]
    for x in queue:
        for s, t in imgs.items():
            y = int(source.mul[x, s])
            v = int(target.mul[out[x], t])
            if out[y] < 0:
                out[y] = v
                queue.append(y)
            elif out[y] != v:
                raise NotAHomomorphism("generator images do not extend to a homomorphism", witness=(x, s))
    if (out < 0).any():
        raise ValueError("the given elements do not generate the source group")
    return GroupHom(source, target, out, check=False)


def hom_image(f: GroupHom) -> Subgroup:
    m = np.zeros(f.target.order, dtype=bool)
    m[f.images] = True
    return Subgroup(f.target, m)


def hom_kernel(f: GroupHom) -> Subgroup:
    return Subgroup(f.source, f.images == 0)


def prime_factors(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def is_p_power(n: int, p: int) -> bool:
    while n % p == 0:
        n //= p
    return n == 1


def sylow_decomposition(G: FiniteGroup) -> dict[int, Subgroup]:
    """For nilpotent G: prime p -> subgroup of elements of p-power order."""
    if not is_nilpotent(G):
        raise NotNilpotent(f"{G!r} is not nilpotent")
    orders = G.element_orders
    out = {}
    for p in prime_factors(G.order):
        mask = np.array([is_p_power(int(o), p) for o in orders])
        S = Subgroup(G, mask, check=True)
        out[p] = S
    total = math.prod(S.order for S in out.values())
    assert total == G.order, "Sylow subgroups do not multiply to the whole group"
    return out


def _power_masks(G: FiniteGroup) -> np.ndarray:
    """Row x is the membership mask of the cyclic subgroup <x>."""
    n = G.order
    masks = np.zeros((n, n), dtype=bool)
    rows = np.arange(n)
    cur = np.zeros(n, dtype=_INDEX)
    for _ in range(int(G.exponent)):
        masks[rows, cur] = True
        cur = G.mul[cur, rows]
    return masks


def cyclic_subgroups(G: FiniteGroup) -> list[Subgroup]:
    cached = G.__dict__.get("_cyclic_subgroups")
    if cached is None:
        uniq = np.unique(_power_masks(G), axis=0)
        cached = sorted((Subgroup(G, m) for m in uniq), key=lambda S: (S.order, S.elements))
        G.__dict__["_cyclic_subgroups"] = cached
    return list(cached)


def all_subgroups(G: FiniteGroup, containing: Subgroup | None = None,
                  lattice_cap: int = LATTICE_CAP) -> list[Subgroup]:
    """Every subgroup of G (or every overgroup of ``containing``).

    The cap bounds |G| for the full lattice and the index [G : containing]
    for overgroup enumeration.
    """
    start = containing if containing is not None else G.trivial()
    size = G.order // start.order
    if size > lattice_cap:
        raise OrderCapExceeded(f"lattice enumeration over {size} > cap {lattice_cap}", witness=size)
    cyclics = [(C, C.generators[-1]) for C in cyclic_subgroups(G) if not C <= start]
    found = {start.bits: start}
    queue = [start]
    for S in queue:
        s_gens = list(S.generators)
        for C, c in cyclics:
            if S.mask[c]:
                continue
            J = Subgroup(G, _extend(G.mul, S.mask, s_gens + [c]))
            if J.bits not in found:
                found[J.bits] = J
                queue.append(J)
    return sorted(found.values(), key=lambda S: (S.order, S.elements))


def conjugacy_classes(G: FiniteGroup) -> list[tuple[int, ...]]:
    seen = np.zeros(G.order, dtype=bool)
    out = []
    g = np.arange(G.order)
    for x in range(G.order):
        if not seen[x]:
            cls = np.unique(G.mul[G.mul[G.inv[g], x], g])
            seen[cls] = True
            out.append(tuple(int(c) for c in cls))
    return out


def normal_subgroups(G: FiniteGroup) -> list[Subgroup]:
    """All normal subgroups: products of normal closures of cyclic subgroups."""
    closures: dict[int, Subgroup] = {}
    for C in cyclic_subgroups(G):
        N = C if G.is_abelian else normal_closure(G, C.generators)
        closures.setdefault(N.bits, N)
    minimal = list(closures.values())
    found = {G.trivial().bits: G.trivial()}
    queue = [G.trivial()]
    for S in queue:
        s_els = np.asarray(S.elements, dtype=_INDEX)
        for C in minimal:
            if C <= S:
                continue
            mask = np.zeros(G.order, dtype=bool)
            mask[G.mul[np.ix_(s_els, np.asarray(C.elements, dtype=_INDEX))]] = True
            J = Subgroup(G, mask)
            if J.bits not in found:
                found[J.bits] = J
                queue.append(J)
    return sorted(found.values(), key=lambda S: (S.order, S.elements))


def product_subgroup(U: Subgroup, V: Subgroup) -> Subgroup:
    """UV for subgroups whose product is a subgroup (e.g. one of them normal)."""
    G = U.parent
    prods = G.mul[np.ix_(np.asarray(U.elements), np.asarray(V.elements))]
    m = np.zeros(G.order, dtype=bool)
    m[prods.ravel()] = True
    return Subgroup(G, m, check=True)


def power_subgroup(G: FiniteGroup, H: Subgroup, p: int) -> Subgroup:
    """Subgroup generated by p-th powers of elements of H."""
    cur = np.asarray(H.elements, dtype=_INDEX)
    base = cur.copy()
    for _ in range(p - 1):
        cur = G.mul[cur, base]
    return subgroup_generated(G, cur.tolist())


def find_isomorphism(G: FiniteGroup, H: FiniteGroup) -> GroupHom | None:
    """An isomorphism G -> H by backtracking over generator images, or None."""
    if G.order != H.order:
        return None
    if G.is_abelian != H.is_abelian:
        return None
    og, oh = G.element_orders, H.element_orders
    if sorted(og.tolist()) != sorted(oh.tolist()):
        return None
    gens = list(G.generators)
    cands = [[int(y) for y in np.flatnonzero(oh == og[g])] for g in gens]

    def extend(i: int, chosen: list[int]):
        if i == len(gens):
            try:
                f = hom_from_generators(G, H, dict(zip(gens, chosen)))
            except NotAHomomorphism:
                return None
            return f if f.is_injective() else None
        if i >= 1:
            # prune: the partial assignment must extend on the generated subgroup
            sub = subgroup_generated(G, gens[:i])
            img = subgroup_generated(H, chosen)
            if sub.order != img.order:
                return None
        for y in cands[i]:
            r = extend(i + 1, chosen + [y])
            if r is not None:
                return r
        return None

    return extend(0, [])


def are_isomorphic(G: FiniteGroup, H: FiniteGroup) -> bool:
    return find_isomorphism(G, H) is not None
