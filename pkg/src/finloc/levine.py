"""Words in G * F(X), equation systems over finite groups, brute-force
solving, invisible subgroups, and the witness construction for groups with
non-unique solutions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import ExpressionSearchExceeded, SearchCapExceeded
from .group import (
    FiniteGroup,
    Subgroup,
    commutator_subgroup,
    conjugation_action,
    is_nilpotent,
    normal_closure,
    normal_subgroups,
    product_subgroup,
    quotient,
    semidirect_product,
)
from .rng import SplitMix64

SEARCH_CAP = 10 ** 7
FACTOR_BOUND = 8

# A syllable is one of
#   ("c", g)          constant: a non-identity element index of the coefficient group
#   ("x", name, e)    variable letter with exponent e = +1 or -1
#   ("a", name, e)    parameter letter (used by parameterized systems)
Syllable = tuple


@dataclass(frozen=True)
class FreeProductWord:
    """A reduced word: no identity constants, no two adjacent constants,
    no adjacent cancelling letters. Build with ``reduce``."""
    syllables: tuple[Syllable, ...] = ()

    def __len__(self) -> int:
        return len(self.syllables)

    def letters(self) -> tuple[Syllable, ...]:
        return tuple(s for s in self.syllables if s[0] != "c")

    def names(self, kind: str = "x") -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for s in self.syllables:
            if s[0] == kind:
                seen.setdefault(s[1], None)
        return tuple(seen)

    def __str__(self) -> str:
        return format_word(self)


EMPTY = FreeProductWord()


def _free_reduce(letters: Iterable[Syllable]) -> list[Syllable]:
    out: list[Syllable] = []
    for s in letters:
        if out and out[-1][:2] == s[:2] and out[-1][2] == -s[2]:
            out.pop()
        else:
            out.append(s)
    return out


def reduce(raw: Iterable[Syllable], G: FiniteGroup | None = None) -> FreeProductWord:
    """Normal form: multiply adjacent constants in G and cancel x x^-1.

    ``G`` may be omitted when no two constants ever become adjacent.
    """
    out: list[Syllable] = []
    for s in raw:
        kind = s[0]
        if kind == "c":
            g = int(s[1])
            if out and out[-1][0] == "c":
                if G is None:
                    raise ValueError("reducing adjacent constants needs the coefficient group")
                g = G.op(out.pop()[1], g)
            if g != 0:
                out.append(("c", g))
        elif kind in ("x", "a"):
            e = int(s[2])
            if e not in (1, -1):
                raise ValueError(f"letter exponent must be +1 or -1, got {e}")
            if out and out[-1][0] == kind and out[-1][1] == s[1] and out[-1][2] == -e:
                out.pop()
            else:
                out.append((kind, s[1], e))
        else:
            raise ValueError(f"unknown syllable {s!r}")
    return FreeProductWord(tuple(out))


def word_mul(u: FreeProductWord, v: FreeProductWord, G: FiniteGroup | None = None) -> FreeProductWord:
    return reduce(u.syllables + v.syllables, G)


def word_inverse(w: FreeProductWord, G: FiniteGroup | None = None) -> FreeProductWord:
    out = []
    for s in reversed(w.syllables):
        if s[0] == "c":
            if G is None:
                raise ValueError("inverting constants needs the coefficient group")
            out.append(("c", int(G.inv[s[1]])))
        else:
            out.append((s[0], s[1], -s[2]))
    return FreeProductWord(tuple(out))


def constant(g: int) -> FreeProductWord:
    return reduce([("c", g)])


def variable(name: str, e: int = 1) -> FreeProductWord:
    return FreeProductWord((("x", name, e),))


def commutator_word(u: FreeProductWord, v: FreeProductWord, G: FiniteGroup) -> FreeProductWord:
    """[u, v] = u^-1 v^-1 u v."""
    return reduce(word_inverse(u, G).syllables + word_inverse(v, G).syllables
                  + u.syllables + v.syllables, G)


def is_contractible(w: FreeProductWord) -> bool:
    """Trivial image in F(X) after deleting constants and parameters."""
    return not _free_reduce(s for s in w.syllables if s[0] == "x")


def is_acyclic(w: FreeProductWord) -> bool:
    """Every variable has exponent sum zero."""
    sums: dict[str, int] = {}
    for s in w.syllables:
        if s[0] == "x":
            sums[s[1]] = sums.get(s[1], 0) + s[2]
    return all(v == 0 for v in sums.values())


def evaluate(w: FreeProductWord, G: FiniteGroup, assignment: Mapping[str, object]):
    """Left-to-right product in G. Assignment values may be ints or arrays
    (all of one shape), which evaluates many assignments at once."""
    acc = 0
    for s in w.syllables:
        if s[0] == "c":
            val = s[1]
        else:
            val = assignment[s[1]]
            if s[2] == -1:
                val = G.inv[val]
        acc = G.mul[acc, val]
    if isinstance(acc, np.ndarray):
        return acc
    return int(acc)


# -- systems -----------------------------------------------------------------

@dataclass(frozen=True)
class EquationSystem:
    """Relators in (G or parameters) * F(X); a solution sends every relator to 1.

    For the Levine and nullhomologous flavors ``words`` holds w_i and the
    relators are x_i w_i^-1.
    """
    variables: tuple[str, ...]
    relators: tuple[FreeProductWord, ...]
    parameters: tuple[str, ...] = ()
    flavor: str = "general"
    words: tuple[FreeProductWord, ...] = ()
    parameter_values: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("repeated variable name")
        if set(self.variables) & set(self.parameters):
            raise ValueError("a name is both a variable and a parameter")
        for r in self.relators:
            for s in r.syllables:
                if s[0] == "x" and s[1] not in self.variables:
                    raise ValueError(f"unknown variable {s[1]!r}")
                if s[0] == "a" and s[1] not in self.parameters:
                    raise ValueError(f"unknown parameter {s[1]!r}")
        if self.flavor in ("levine", "nullhomologous"):
            if len(self.words) != len(self.variables):
                raise ValueError("need one word per variable")
            test = is_contractible if self.flavor == "levine" else is_acyclic
            for name, w in zip(self.variables, self.words):
                if not test(w):
                    raise ValueError(f"word for {name} is not {'contractible' if self.flavor == 'levine' else 'acyclic'}")


def levine_system(G: FiniteGroup, variables: Iterable[str], words: Iterable[FreeProductWord],
                  flavor: str = "levine") -> EquationSystem:
    """The system x_i = w_i, as relators x_i w_i^-1."""
    variables, words = tuple(variables), tuple(words)
    relators = tuple(word_mul(variable(x), word_inverse(w, G), G) for x, w in zip(variables, words))
    return EquationSystem(variables, relators, flavor=flavor, words=words)


def _grid(order: int, k: int, cap: int) -> list[np.ndarray]:
    total = order ** k
    if total > cap:
        raise SearchCapExceeded(f"{order}^{k} = {total} assignments exceeds the search cap {cap}", witness=total)
    if k == 0:
        return []
    idx = np.arange(total, dtype=np.int64)
    cols = []
    for _ in range(k):
        idx, r = np.divmod(idx, order)
        cols.append(r)
    return cols[::-1]  # first variable varies slowest


def solve(G: FiniteGroup, sys: EquationSystem, cap: int = SEARCH_CAP,
          parameters: Mapping[str, int] | None = None) -> list[dict[str, int]]:
    """All solutions in lexicographic order of (x_1, ..., x_n)."""
    params = dict(sys.parameter_values)
    if parameters:
        params.update(parameters)
    missing = [a for a in sys.parameters if a not in params]
    if missing:
        raise ValueError(f"no value for parameters {missing}")
    cols = _grid(G.order, len(sys.variables), cap)
    if not sys.variables:
        ok = all(evaluate(r, G, params) == 0 for r in sys.relators)
        return [{}] if ok else []
    assignment = dict(params)
    assignment.update(zip(sys.variables, cols))
    good = np.ones(cols[0].shape, dtype=bool)
    for r in sys.relators:
        val = evaluate(r, G, assignment)
        good &= np.asarray(val) == 0
    hits = np.flatnonzero(good)
    return [{x: int(c[i]) for x, c in zip(sys.variables, cols)} for i in hits]


def count_solutions_per_parameter(G: FiniteGroup, sys: EquationSystem, cap: int = SEARCH_CAP) -> np.ndarray:
    """Solution counts for every parameter assignment (parameters vary in
    lexicographic order)."""
    _grid(G.order, len(sys.variables), cap)
    k = len(sys.parameters) + len(sys.variables)
    cols = _grid(G.order, k, max(cap, G.order ** k))
    np_ = len(sys.parameters)
    if k == 0:
        return np.array([int(all(evaluate(r, G, {}) == 0 for r in sys.relators))])
    assignment = dict(zip(sys.parameters + sys.variables, cols))
    good = np.ones(cols[0].shape, dtype=bool)
    for r in sys.relators:
        good &= np.asarray(evaluate(r, G, assignment)) == 0
    per = G.order ** len(sys.variables)
    return good.reshape(G.order ** np_, per).sum(axis=1)


# -- random systems ----------------------------------------------------------

def _random_constant(G: FiniteGroup, rng: SplitMix64) -> list[Syllable]:
    g = rng.below(G.order)
    return [("c", g)] if g else []


def random_contractible_word(G: FiniteGroup, variables: tuple[str, ...], rng: SplitMix64,
                             max_syllables: int = 8) -> FreeProductWord:
    """c0 L1 c1 ... Lk ck Lk^-1 ... L1^-1 c2k, trimmed to the syllable budget."""
    while True:
        k = 1 + rng.below(2)
        letters = [("x", rng.choice(variables), 1 if rng.below(2) else -1) for _ in range(k)]
        raw: list[Syllable] = _random_constant(G, rng)
        for L in letters:
            raw += [L] + _random_constant(G, rng)
        for L in reversed(letters):
            raw += [(L[0], L[1], -L[2])] + _random_constant(G, rng)
        w = reduce(raw, G)
        if len(w) <= max_syllables:
            return w


def random_acyclic_word(G: FiniteGroup, variables: tuple[str, ...], rng: SplitMix64,
                        max_syllables: int = 8) -> FreeProductWord:
    """Shuffled balanced letters with constants between them."""
    while True:
        pairs = 1 + rng.below(2)
        letters: list[Syllable] = []
        for _ in range(pairs):
            x = rng.choice(variables)
            letters += [("x", x, 1), ("x", x, -1)]
        rng.shuffle(letters)
        raw: list[Syllable] = _random_constant(G, rng)
        for L in letters:
            raw += [L] + _random_constant(G, rng)
        w = reduce(raw, G)
        if len(w) <= max_syllables:
            return w


def random_levine_system(G: FiniteGroup, rng: SplitMix64, max_variables: int = 3,
                         flavor: str = "levine", cap: int = SEARCH_CAP) -> EquationSystem:
    n = 1 + rng.below(max_variables)
    while n > 1 and G.order ** n > cap:
        n -= 1
    names = tuple(f"x{i + 1}" for i in range(n))
    make = random_contractible_word if flavor == "levine" else random_acyclic_word
    words = [make(G, names, rng) for _ in names]
    return levine_system(G, names, words, flavor=flavor)


# -- invisible subgroups -----------------------------------------------------

def invisible_subgroups(G: FiniteGroup) -> list[Subgroup]:
    """Nontrivial normal H with [H, G] = H.

    Every normal subgroup of a finite group is the normal closure of finitely
    many elements, so only the commutator condition is tested.
    """
    whole = G.whole()
    return [H for H in normal_subgroups(G)
            if not H.is_trivial and commutator_subgroup(G, H, whole) == H]


@dataclass(frozen=True)
class TwoSolutionWitness:
    system: EquationSystem
    solutions: tuple[dict, dict]
    generators: tuple[int, ...]
    factorizations: tuple[tuple[tuple[int, int, int], ...], ...]  # (a, g, eps) per factor


def _factor_search(G: FiniteGroup, target: int, factors: dict[int, tuple[int, int, int]], bound: int):
    """Shortest product of factor values equal to target (BFS over G)."""
    parent = {0: None}
    frontier = [0]
    for _ in range(bound):
        if target in parent:
            break
        nxt = []
        for x in frontier:
            for v, data in factors.items():
                y = G.op(x, v)
                if y not in parent:
                    parent[y] = (x, data)
                    nxt.append(y)
        frontier = nxt
    if target not in parent:
        return None
    path = []
    y = target
    while parent[y] is not None:
        x, data = parent[y]
        path.append(data)
        y = x
    return path[::-1]


def build_two_solution_witness(G: FiniteGroup, H: Subgroup, bound: int = FACTOR_BOUND) -> TwoSolutionWitness:
    """A Levine system over G solved by both x_i -> h_i and x_i -> 1."""
    if H.parent is not G or H.is_trivial or not H.is_normal():
        raise ValueError("need a nontrivial normal subgroup")
    if commutator_subgroup(G, H, G.whole()) != H:
        raise ValueError("subgroup is not invisible: [H, G] != H")
    gens = H.generators
    names = tuple(f"x{i + 1}" for i in range(len(gens)))
    # conjugates g^-1 h_k^e g, each remembered with a lift g^-1 x_k^e g
    lifts: dict[int, FreeProductWord] = {}
    for k, h in enumerate(gens):
        for e in (1, -1):
            he = h if e == 1 else int(G.inv[h])
            for g in range(G.order):
                a = G.conj(he, g)
                if a not in lifts:
                    lifts[a] = reduce([("c", int(G.inv[g])), ("x", names[k], e), ("c", g)], G)
    factors: dict[int, tuple[int, int, int]] = {}
    for a in sorted(lifts):
        for g in range(G.order):
            c = G.commutator(a, g)
            for eps in (1, -1):
                v = c if eps == 1 else int(G.inv[c])
                factors.setdefault(v, (a, g, eps))
    words, facts = [], []
    for h in gens:
        path = _factor_search(G, h, factors, bound)
        if path is None:
            raise ExpressionSearchExceeded(f"no commutator expression of length <= {bound} for {h}", witness=h)
        w = EMPTY
        for a, g, eps in path:
            c = commutator_word(lifts[a], constant(g), G)
            w = word_mul(w, c if eps == 1 else word_inverse(c, G), G)
        words.append(w)
        facts.append(tuple(path))
    sys = levine_system(G, names, words)
    one = {x: 0 for x in names}
    hs = dict(zip(names, gens))
    for sol in (hs, one):
        if any(evaluate(r, G, sol) != 0 for r in sys.relators):
            raise AssertionError("constructed witness is not a solution")
    return TwoSolutionWitness(sys, (hs, one), tuple(gens), tuple(facts))


# -- harnesses ---------------------------------------------------------------

@dataclass
class HarnessReport:
    name: str
    instances: int = 0
    passed: int = 0
    counterexamples: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def record(self, ok: bool, instance) -> None:
        self.instances += 1
        if ok:
            self.passed += 1
        else:
            self.counterexamples.append(instance)

    @property
    def ok(self) -> bool:
        return not self.counterexamples

    def merge(self, other: "HarnessReport") -> None:
        self.instances += other.instances
        self.passed += other.passed
        self.counterexamples += other.counterexamples
        self.notes += other.notes


def harness_prop58(G: FiniteGroup, rng: SplitMix64, systems: int = 100, cap: int = SEARCH_CAP) -> HarnessReport:
    """No invisible subgroups => nullhomologous systems have at most one
    solution; otherwise a two-solution Levine system exists."""
    rep = HarnessReport(f"prop58:{G.name or G.order}")
    inv = invisible_subgroups(G)
    if not inv:
        for _ in range(systems):
            sys = random_levine_system(G, rng, flavor="nullhomologous", cap=cap)
            n = len(solve(G, sys, cap))
            rep.record(n <= 1, {"system": format_system(sys), "solutions": n})
    else:
        for H in inv:
            w = build_two_solution_witness(G, H)
            n = len(solve(G, w.system, cap))
            rep.record(n >= 2, {"system": format_system(w.system), "solutions": n})
            rep.notes.append({"witness": format_system(w.system), "invisible_order": H.order})
    return rep


def harness_prop510(A: FiniteGroup, U: Subgroup) -> HarnessReport:
    """For normal V containing U: V = U[V, A] forces V = U; and this matches
    A/U having no invisible subgroups."""
    if not is_nilpotent(A):
        raise ValueError("A must be nilpotent")
    rep = HarnessReport(f"prop510:{A.name or A.order}:{U.order}")
    whole = A.whole()
    proper = 0
    for V in normal_subgroups(A):
        if not U <= V:
            continue
        absorbed = product_subgroup(U, commutator_subgroup(A, V, whole)) == V
        if absorbed and V != U:
            proper += 1
        rep.record(not absorbed or V == U, {"U": U.order, "V": V.order})
    Q, _ = quotient(A, U)
    rep.record((not invisible_subgroups(Q)) == (proper == 0), {"U": U.order, "cross_check": True})
    return rep


def check_lemma511(G: FiniteGroup, U: Subgroup, V: Subgroup, order_cap: int | None = None) -> bool:
    """Normal closure of G ⋉ U in G ⋉ V equals G ⋉ U[V, G]."""
    if not (U <= V and U.is_normal() and V.is_normal()):
        raise ValueError("need normal U contained in normal V")
    kwargs = {} if order_cap is None else {"order_cap": order_cap}
    a = conjugation_action(G, V)
    Vg, inc = V.as_group()
    S = semidirect_product(G, Vg, a, **kwargs)
    U_in_V = Subgroup(Vg, U.mask[inc.images])
    lhs_gens = list(S.fiber_part(U_in_V).generators)
    lhs = normal_closure(S.group, lhs_gens)
    W = product_subgroup(U, commutator_subgroup(G, V, G.whole()))
    rhs = S.fiber_part(Subgroup(Vg, W.mask[inc.images]))
    return lhs == rhs


# -- text format -------------------------------------------------------------

def format_word(w: FreeProductWord) -> str:
    if not w.syllables:
        return "1"
    parts = []
    for s in w.syllables:
        if s[0] == "c":
            parts.append(f"#{s[1]}")
        else:
            parts.append(s[1] if s[2] == 1 else f"{s[1]}^-1")
    return " ".join(parts)


def format_system(sys: EquationSystem) -> str:
    return "; ".join(format_word(r) for r in sys.relators)
