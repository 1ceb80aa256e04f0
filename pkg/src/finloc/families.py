"""Named families of finite groups and a deterministic catalog of instances."""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from .group import (
    ORDER_CAP,
    FiniteGroup,
    GroupAction,
    direct_product,
    from_permutations,
    semidirect_product,
)


def cyclic(n: int) -> FiniteGroup:
    if n < 1:
        raise ValueError("cyclic group needs n >= 1")
    a = np.arange(n)
    return FiniteGroup((a[:, None] + a[None, :]) % n, name=f"C{n}")


def dihedral(n: int) -> FiniteGroup:
    """Symmetries of the n-gon, order 2n."""
    if n < 1:
        raise ValueError("dihedral group needs n >= 1")
    if n == 1:
        G = cyclic(2)
    elif n == 2:
        G = direct_product(cyclic(2), cyclic(2)).group
    else:
        rot = [(i + 1) % n for i in range(n)]
        ref = [(-i) % n for i in range(n)]
        G = from_permutations(n, [rot, ref])
    G.name = f"D{n}"
    return G


def symmetric(n: int, order_cap: int = ORDER_CAP) -> FiniteGroup:
    if n < 1:
        raise ValueError("symmetric group needs n >= 1")
    gens = []
    if n >= 2:
        gens.append([1, 0] + list(range(2, n)))
    if n >= 3:
        gens.append(list(range(1, n)) + [0])
    G = from_permutations(n, gens, order_cap=order_cap)
    G.name = f"S{n}"
    return G


def alternating(n: int, order_cap: int = ORDER_CAP) -> FiniteGroup:
    if n < 1:
        raise ValueError("alternating group needs n >= 1")
    gens = []
    for k in range(2, n):
        p = list(range(n))
        p[0], p[1], p[k] = 1, k, 0  # the 3-cycle (0 1 k)
        gens.append(p)
    G = from_permutations(n, gens, order_cap=order_cap)
    G.name = f"A{n}"
    return G


def dicyclic(m: int) -> FiniteGroup:
    """<a, x | a^(2m), x^2 = a^m, x^-1 a x = a^-1>, order 4m; m=2 gives Q8."""
    if m < 1:
        raise ValueError("dicyclic group needs m >= 1")
    n2 = 2 * m
    # element (i, j) = a^i x^j has index j * 2m + i
    i = np.arange(n2)
    table = np.empty((2 * n2, 2 * n2), dtype=np.int64)
    for j in (0, 1):
        for l in (0, 1):
            ii = i[:, None]
            kk = i[None, :]
            if j == 0:
                e, jj = ii + kk, l
            elif l == 0:
                e, jj = ii - kk, 1
            else:
                e, jj = ii - kk + m, 0
            table[j * n2:(j + 1) * n2, l * n2:(l + 1) * n2] = jj * n2 + e % n2
    return FiniteGroup(table, name=f"Dic{m}")


def quaternion(order: int = 8) -> FiniteGroup:
    """Generalized quaternion group of order 2^k (k >= 3)."""
    if order < 8 or order & (order - 1):
        raise ValueError("quaternion order must be a power of 2, at least 8")
    G = dicyclic(order // 4)
    G.name = f"Q{order}"
    return G


def heisenberg(p: int) -> FiniteGroup:
    """Unitriangular 3x3 matrices over Z/p: (a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')."""
    if p < 2:
        raise ValueError("heisenberg group needs a prime p")
    r = np.arange(p)
    a, b, c = np.meshgrid(r, r, r, indexing="ij")
    a, b, c = a.ravel(), b.ravel(), c.ravel()
    A = (a[:, None] + a[None, :]) % p
    B = (b[:, None] + b[None, :]) % p
    C = (c[:, None] + c[None, :] + a[:, None] * b[None, :]) % p
    return FiniteGroup(A * p * p + B * p + C, name=f"Heis{p}")


def product(*factors: FiniteGroup, order_cap: int = ORDER_CAP) -> FiniteGroup:
    G = factors[0]
    for H in factors[1:]:
        G = direct_product(G, H, order_cap=order_cap).group
    G.name = "x".join(f.name or "?" for f in factors)
    return G


def metacyclic(m: int, n: int, r: int) -> FiniteGroup:
    """C_m ⋉ C_n with the generator of C_m acting by u -> r*u."""
    if pow(r, m, n) != 1 % n:
        raise ValueError(f"r={r} does not have order dividing {m} modulo {n}")
    Cm, Cn = cyclic(m), cyclic(n)
    act = GroupAction.from_generators(Cm, Cn, {1: (np.arange(n) * r) % n} if m > 1 else {})
    G = semidirect_product(Cm, Cn, act).group
    G.name = f"C{m}:C{n}[{r}]"
    return G


def inversion_action(G: FiniteGroup, U: FiniteGroup) -> GroupAction:
    """C2 = G acting on abelian U by u -> u^-1."""
    if G.order != 2 or not U.is_abelian:
        raise ValueError("inversion action needs G of order 2 and abelian U")
    return GroupAction.from_generators(G, U, {1: U.inv})


BUILDERS = {
    "cyclic": lambda p: cyclic(int(p["n"])),
    "dihedral": lambda p: dihedral(int(p["n"])),
    "symmetric": lambda p: symmetric(int(p["n"])),
    "alternating": lambda p: alternating(int(p["n"])),
    "quaternion": lambda p: quaternion(int(p.get("order", 8))),
    "heisenberg_p": lambda p: heisenberg(int(p["p"])),
}


@lru_cache(maxsize=None)
def catalog(max_order: int = 200) -> tuple[FiniteGroup, ...]:
    """Deterministic list of family instances of order at most ``max_order``.

    Cyclic groups of every order, dihedral, quaternion, Heisenberg, small
    symmetric and alternating groups, a few metacyclic groups, and direct
    products of small factors. Sorted by (order, name).
    """
    out: dict[str, FiniteGroup] = {}

    def add(G: FiniteGroup):
        if G.order <= max_order and G.name not in out:
            out[G.name] = G

    for n in range(1, max_order + 1):
        add(cyclic(n))
    for n in range(2, max_order // 2 + 1):
        add(dihedral(n))
    k = 8
    while k <= max_order:
        add(quaternion(k))
        k *= 2
    for p in (2, 3, 5):
        if p ** 3 <= max_order:
            add(heisenberg(p))
    for n in range(2, 6):
        if _fact(n) <= max_order:
            add(symmetric(n))
        if _fact(n) // 2 <= max_order and n >= 3:
            add(alternating(n))
    for m, n, r in ((3, 7, 2), (4, 5, 2), (3, 9, 4), (5, 11, 3), (2, 9, 8), (3, 13, 3)):
        if m * n <= max_order:
            add(metacyclic(m, n, r))
    base = [cyclic(2), cyclic(3), cyclic(4), cyclic(5), symmetric(3), quaternion(8), dihedral(4), cyclic(9)]
    if max_order >= 27:
        base.append(heisenberg(3))
    for X, Y in itertools.combinations_with_replacement(base, 2):
        if X.order * Y.order <= max_order:
            add(product(X, Y))
    for X, Y, Z in itertools.combinations_with_replacement(base[:3], 3):
        if X.order * Y.order * Z.order <= max_order:
            add(product(X, Y, Z))
    return tuple(sorted(out.values(), key=lambda G: (G.order, G.name)))


def _fact(n: int) -> int:
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out
