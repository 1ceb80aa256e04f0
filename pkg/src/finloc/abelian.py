"""Finitely generated abelian groups through integer relation matrices.

Finite abelian groups coming from Cayley tables are presented as Z^k modulo
a relation lattice; invariant factors come from the Smith normal form of
that lattice. Modules over Z[1/P] are never enumerated, only described by
their invariants.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np

from .group import FiniteGroup, GroupAction, GroupHom, derived_subgroup, prime_factors, quotient


def smith_normal_form(M) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
    """Return (S, U, V) with S = U M V, U and V unimodular, S diagonal with
    nonnegative entries d1 | d2 | ..."""
    A = [[int(v) for v in row] for row in M]
    m = len(A)
    n = len(A[0]) if m else 0
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):  # row_dst += q * row_src
        A[dst] = [a + q * b for a, b in zip(A[dst], A[src])]
        U[dst] = [a + q * b for a, b in zip(U[dst], U[src])]

    def add_col(dst, src, q):
        for row in A:
            row[dst] += q * row[src]
        for row in V:
            row[dst] += q * row[src]

    for t in range(min(m, n)):
        while True:
            best = None
            for i in range(t, m):
                for j in range(t, n):
                    if A[i][j] and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                return A, U, V
            swap_rows(t, best[0])
            swap_cols(t, best[1])
            p = A[t][t]
            clean = True
            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // p))
                    clean = clean and A[i][t] == 0
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // p))
                    clean = clean and A[t][j] == 0
            if not clean:
                continue
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if A[i][j] % p), None)
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if A[t][t] < 0:
            A[t] = [-v for v in A[t]]
            U[t] = [-v for v in U[t]]
    return A, U, V


def _hermite_rows(rows, k: int) -> list[list[int]]:
    """Row-echelon basis of the lattice spanned by ``rows`` (at most k rows)."""
    basis: dict[int, list[int]] = {}  # pivot column -> row with positive pivot
    for r in rows:
        v = [int(x) for x in r]
        col = 0
        while True:
            while col < k and v[col] == 0:
                col += 1
            if col == k:
                break
            if col not in basis:
                if v[col] < 0:
                    v = [-x for x in v]
                basis[col] = v
                break
            b = basis[col]
            # extended gcd combination of v and b on column col
            a0, b0 = b[col], v[col]
            g, x, y = _xgcd(a0, b0)
            new_b = [x * p + y * q for p, q in zip(b, v)]
            v = [(a0 // g) * q - (b0 // g) * p for p, q in zip(b, v)]
            if new_b[col] < 0:
                new_b = [-t for t in new_b]
            basis[col] = new_b
    # reduce entries above pivots to keep numbers small
    cols = sorted(basis)
    for i, c in enumerate(cols):
        piv = basis[c]
        for c2 in cols[:i]:
            row = basis[c2]
            q = row[c] // piv[c]
            if q:
                basis[c2] = [a - q * b for a, b in zip(row, piv)]
    return [basis[c] for c in cols]


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def _prime_power_parts(d: int) -> dict[int, int]:
    out = {}
    for p in prime_factors(d):
        e = 0
        while d % p == 0:
            d //= p
            e += 1
        out[p] = p ** e
    return out


def canonical_invariants(orders) -> tuple[int, ...]:
    """Invariant factors d1 | d2 | ... (each >= 2) of a sum of cyclic groups
    of the given finite orders."""
    by_prime: dict[int, list[int]] = {}
    for d in orders:
        d = abs(int(d))
        if d <= 1:
            continue
        for p, q in _prime_power_parts(d).items():
            by_prime.setdefault(p, []).append(q)
    length = max((len(v) for v in by_prime.values()), default=0)
    factors = [1] * length
    for qs in by_prime.values():
        qs.sort(reverse=True)
        for i, q in enumerate(qs):
            factors[i] *= q
    return tuple(sorted(factors))


@dataclass(frozen=True)
class FGAbelian:
    """Z^rank ⊕ Z/d1 ⊕ ... with d1 | d2 | ..., every d >= 2."""
    rank: int = 0
    torsion: tuple[int, ...] = ()

    def __post_init__(self):
        if self.rank < 0:
            raise ValueError("rank must be nonnegative")
        t = tuple(int(d) for d in self.torsion)
        if any(d < 2 for d in t) or any(b % a for a, b in zip(t, t[1:])):
            raise ValueError(f"{t} is not an invariant factor chain")
        object.__setattr__(self, "torsion", t)

    @classmethod
    def from_cyclic(cls, orders, rank: int = 0) -> "FGAbelian":
        """Canonical form of Z^rank ⊕ (⊕ Z/d); entries 0 count as free summands."""
        orders = list(orders)
        free = rank + sum(1 for d in orders if d == 0)
        return cls(free, canonical_invariants([d for d in orders if d != 0]))

    @property
    def is_trivial(self) -> bool:
        return self.rank == 0 and not self.torsion

    @property
    def order(self) -> int | None:
        if self.rank:
            return None
        out = 1
        for d in self.torsion:
            out *= d
        return out

    def direct_sum(self, other: "FGAbelian") -> "FGAbelian":
        return FGAbelian.from_cyclic(self.torsion + other.torsion, self.rank + other.rank)

    def __str__(self) -> str:
        parts = (["Z"] * self.rank) + [f"Z/{d}" for d in self.torsion]
        return " + ".join(parts) if parts else "0"


def invariants_from_relations(rows, k: int) -> FGAbelian:
    """Z^k modulo the row lattice, in canonical form."""
    basis = _hermite_rows(rows, k)
    if not basis:
        return FGAbelian(k, ())
    S, _, _ = smith_normal_form(basis)
    diag = [abs(S[i][i]) for i in range(min(len(S), k))]
    nonzero = [d for d in diag if d]
    return FGAbelian(k - len(nonzero), canonical_invariants(nonzero))


@dataclass(frozen=True)
class CoefficientRing:
    """Z, Z/n (n >= 2) or Z[1/P] for a finite set of primes P."""
    tag: str
    n: int = 0
    primes: tuple[int, ...] = ()

    def __post_init__(self):
        if self.tag not in ("Z", "Zmod", "ZinvP"):
            raise ValueError(f"unknown coefficient ring {self.tag!r}")
        if self.tag == "Zmod" and self.n < 2:
            raise ValueError("Z/n needs n >= 2")
        if self.tag == "ZinvP":
            ps = tuple(sorted(set(int(p) for p in self.primes)))
            if any(prime_factors(p) != [p] for p in ps):
                raise ValueError(f"{ps} contains a non-prime")
            object.__setattr__(self, "primes", ps)

    def __str__(self) -> str:
        if self.tag == "Z":
            return "Z"
        if self.tag == "Zmod":
            return f"Z/{self.n}"
        return "Z[1/{" + ",".join(map(str, self.primes)) + "}]"


Z = CoefficientRing("Z")


def Zmod(n: int) -> CoefficientRing:
    return CoefficientRing("Zmod", n=n)


def ZinvP(primes) -> CoefficientRing:
    return CoefficientRing("ZinvP", primes=tuple(primes))


def _strip_primes(d: int, primes) -> int:
    for p in primes:
        while d % p == 0:
            d //= p
    return d


def tensor(A: FGAbelian, R: CoefficientRing) -> FGAbelian:
    """A ⊗ R. Over Z[1/P] the rank stands for copies of Z[1/P]."""
    if R.tag == "Z":
        return A
    if R.tag == "Zmod":
        return FGAbelian.from_cyclic([gcd(d, R.n) for d in A.torsion] + [R.n] * A.rank)
    return FGAbelian(A.rank, canonical_invariants(_strip_primes(d, R.primes) for d in A.torsion))


@dataclass(frozen=True)
class LocalizedAbelian:
    primes: tuple[int, ...]
    rank: int
    torsion: tuple[int, ...]

    def __post_init__(self):
        for d in self.torsion:
            for p in self.primes:
                if d % p == 0:
                    raise ValueError(f"torsion factor {d} is divisible by inverted prime {p}")


def localize_abelian(A: FGAbelian, P) -> LocalizedAbelian:
    """A ⊗ Z[1/P]: keep the rank, drop every p-part of the torsion for p in P."""
    ps = tuple(sorted(set(int(p) for p in P)))
    return LocalizedAbelian(ps, A.rank, canonical_invariants(_strip_primes(d, ps) for d in A.torsion))


@dataclass(frozen=True, eq=False)
class AbelianPresentation:
    """Coordinates for a finite abelian group Q = Z^k / relations.

    ``vectors[x]`` is one coordinate vector of element x in terms of
    ``generators``.
    """
    group: FiniteGroup
    generators: tuple[int, ...]
    vectors: np.ndarray
    relations: tuple[tuple[int, ...], ...]

    @property
    def k(self) -> int:
        return len(self.generators)

    def invariants(self, extra_rows=()) -> FGAbelian:
        return invariants_from_relations(list(self.relations) + [list(r) for r in extra_rows], self.k)


def present_abelian(Q: FiniteGroup) -> AbelianPresentation:
    if not Q.is_abelian:
        raise ValueError("presentation needs an abelian group")
    gens = Q.generators
    k = len(gens)
    vec = np.zeros((Q.order, k), dtype=np.int64)
    seen = np.zeros(Q.order, dtype=bool)
    seen[0] = True
    queue = [0]
    rels = set()
    for x in queue:
        for i, g in enumerate(gens):
            y = int(Q.mul[x, g])
            v = vec[x].copy()
            v[i] += 1
            if not seen[y]:
                seen[y] = True
                vec[y] = v
                queue.append(y)
            else:
                d = tuple(int(t) for t in (v - vec[y]))
                if any(d):
                    rels.add(d)
    e = Q.exponent
    for i in range(k):
        rels.add(tuple(e * int(i == j) for j in range(k)))
    vec.setflags(write=False)
    return AbelianPresentation(Q, tuple(gens), vec, tuple(sorted(rels)))


def abelianization(G: FiniteGroup) -> tuple[FGAbelian, GroupHom]:
    """G/[G,G] as invariants, plus the projection onto a realization."""
    Q, proj = quotient(G, derived_subgroup(G))
    return present_abelian(Q).invariants(), proj


def invariants_of(Q: FiniteGroup) -> FGAbelian:
    """Invariant factors of a finite abelian group given by its table."""
    return present_abelian(Q).invariants()


def h1(G: FiniteGroup, R: CoefficientRing = Z) -> FGAbelian:
    """H_1(G; R) = G_ab ⊗ R."""
    A, _ = abelianization(G)
    return tensor(A, R)


def _abelianized(G: FiniteGroup) -> tuple[AbelianPresentation, GroupHom]:
    Q, proj = quotient(G, derived_subgroup(G))
    return present_abelian(Q), proj


def coinvariants(U: FiniteGroup, a: GroupAction, R: CoefficientRing = Z) -> FGAbelian:
    """(U_ab ⊗ R) modulo u - u^g for all u and g."""
    if a.space is not U:
        raise ValueError("action is not on the given group")
    pres, proj = _abelianized(U)
    return tensor(pres.invariants(_action_rows(pres, proj, a)), R)


def _action_rows(pres: AbelianPresentation, proj: GroupHom, a: GroupAction):
    reps = pres.group.coset_representatives
    rows = []
    for i, q in enumerate(pres.generators):
        u = reps[q]
        for s in a.group.generators:
            v = pres.vectors[proj(a(u, s))].copy()
            v[i] -= 1
            rows.append(v)
    return rows


def _cokernel(f: GroupHom, a: GroupAction | None = None) -> FGAbelian:
    """Cokernel of f_ab : source_ab -> target_ab (optionally on coinvariants
    of an action on the target)."""
    pres, proj = _abelianized(f.target)
    rows = [pres.vectors[proj(f(b))] for b in f.source.generators]
    if a is not None:
        rows += _action_rows(pres, proj, a)
    return pres.invariants(rows)


def induced_h1_is_epi(incl: GroupHom, R: CoefficientRing = Z) -> bool:
    """Whether H_1(B; R) -> H_1(B'; R) is onto.

    Tensoring is right exact, so the map is onto exactly when the cokernel of
    B_ab -> B'_ab dies after tensoring with R.
    """
    return tensor(_cokernel(incl), R).is_trivial


def induced_coinvariants_is_epi(incl: GroupHom, a: GroupAction, R: CoefficientRing = Z) -> bool:
    """Whether H_1(V; R)_A -> H_1(V'; R)_A is onto, where ``incl`` is V -> V'
    and ``a`` is the action of A on V'."""
    return tensor(_cokernel(incl, a), R).is_trivial
