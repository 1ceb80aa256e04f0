"""Named verification suites with deterministic reports."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import __version__
from .abelian import Zmod, invariants_of
from .errors import OrderCapExceeded, UnknownSuite
from .families import alternating, catalog, cyclic, dihedral, heisenberg, product, quaternion, symmetric
from .group import (
    LATTICE_CAP,
    ORDER_CAP,
    FiniteGroup,
    GroupAction,
    GroupHom,
    Subgroup,
    are_isomorphic,
    center,
    conjugation_action,
    identity_hom,
    is_nilpotent,
    is_p_power,
    nilpotency_class,
    normal_subgroups,
    prime_factors,
    quotient,
    trivial_hom,
)
from .hr import harness_lemma54
from .keune import (
    builtin_functors,
    c_translate,
    check_right_exact,
    coequalizer_of_couple,
    kernel_pair_couple,
    n_translate,
    test_right_exact_condition3,
    test_right_exact_condition5,
    test_right_exact_condition6,
)
from .levine import (
    build_two_solution_witness,
    check_lemma511,
    format_system,
    harness_prop58,
    harness_prop510,
    invisible_subgroups,
    random_levine_system,
    reduce,
    solve,
    EquationSystem,
)
from .localize import (
    PrimeSet,
    baumslag_localize,
    check_power_identity,
    power_identity_product,
    graded_lie_ring,
    harness_lemma31,
    harness_prop81,
    harness_section4,
    harness_theorem35,
    is_ns_map,
    is_p_local,
    is_uniquely_p_divisible,
    p_local,
    satisfies_system,
)
from .rng import SplitMix64
from .simplicial import (
    PrecrossedModule,
    homotopy_data,
    homotopy_group,
    inclusion_module,
    modules_isomorphic_via,
    pi1_of_precrossed,
    moore_complex,
    nerve,
    truncate_to_precrossed,
    verify_simplicial,
)

NERVE_LEVEL_CAP = 4096
PRIME_SETS = ((2,), (3,), (2, 3), (5,))


@dataclass
class SuiteReport:
    suite: str
    seed: int
    caps: dict
    version: str = __version__
    sections: dict = field(default_factory=dict)  # name -> [instances, passed]
    counterexamples: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    wall_time: float = 0.0

    def check(self, section: str, ok: bool, instance) -> bool:
        counts = self.sections.setdefault(section, [0, 0])
        counts[0] += 1
        if ok:
            counts[1] += 1
        else:
            self.counterexamples.append({"check": section, "instance": instance})
        return ok

    def absorb(self, section: str, harness) -> None:
        counts = self.sections.setdefault(section, [0, 0])
        counts[0] += harness.instances
        counts[1] += harness.passed
        for c in harness.counterexamples:
            self.counterexamples.append({"check": section, "instance": c})
        self.notes += harness.notes

    @property
    def instances(self) -> int:
        return sum(c[0] for c in self.sections.values())

    @property
    def passed(self) -> int:
        return sum(c[1] for c in self.sections.values())

    @property
    def ok(self) -> bool:
        return not self.counterexamples

    def to_dict(self, timing: bool = False) -> dict:
        d = {
            "suite": self.suite,
            "seed": self.seed,
            "caps": dict(sorted(self.caps.items())),
            "version": self.version,
            "status": "pass" if self.ok else "fail",
            "instances": self.instances,
            "passed": self.passed,
            "sections": {k: {"instances": v[0], "passed": v[1]} for k, v in self.sections.items()},
            "counterexamples": self.counterexamples,
            "notes": self.notes,
        }
        if timing:
            d["wall_time"] = round(self.wall_time, 3)
        return d

    def render_json(self, timing: bool = False) -> str:
        return json.dumps(self.to_dict(timing), indent=2, sort_keys=False, default=str) + "\n"

    def render_text(self, timing: bool = False) -> str:
        d = self.to_dict(timing)
        lines = [
            f"suite: {d['suite']}",
            f"seed: {d['seed']}",
            "caps: " + " ".join(f"{k}={v}" for k, v in d["caps"].items()),
            f"version: {d['version']}",
            f"status: {d['status']}",
            f"instances: {d['instances']}",
            f"passed: {d['passed']}",
            f"counterexamples: {len(d['counterexamples'])}",
            "sections:",
        ]
        for name, s in d["sections"].items():
            lines.append(f"  {name}: {s['passed']}/{s['instances']}")
        for c in d["counterexamples"]:
            lines.append("counterexample: " + json.dumps(c, sort_keys=True, default=str))
        for n in d["notes"]:
            lines.append("note: " + json.dumps(n, sort_keys=True, default=str))
        if timing:
            lines.append(f"wall_time: {d['wall_time']}")
        return "\n".join(lines) + "\n"


def _gname(G: FiniteGroup) -> str:
    return G.name or f"order-{G.order}"


def _isomorphic_exact(A: FiniteGroup, B: FiniteGroup) -> bool:
    """Canonical invariants for abelian groups, order plus isomorphism search otherwise."""
    if A.order != B.order or A.is_abelian != B.is_abelian:
        return False
    if A.is_abelian:
        return invariants_of(A) == invariants_of(B)
    return are_isomorphic(A, B)


def _small_groups(max_order: int) -> list[FiniteGroup]:
    return [G for G in catalog(200) if G.order <= max_order]


_normal_cache: dict[int, tuple[FiniteGroup, list[Subgroup]]] = {}


def _normals(G: FiniteGroup) -> list[Subgroup]:
    hit = _normal_cache.get(id(G))
    if hit is None or hit[0] is not G:
        hit = (G, normal_subgroups(G))
        _normal_cache[id(G)] = hit
    return hit[1]


# -- nerve ---------------------------------------------------------------------

def nerve_instances() -> list[tuple[str, FiniteGroup, Subgroup]]:
    C4 = cyclic(4)
    Q8 = quaternion(8)
    out = [("Z/2 in Z/4", C4, next(N for N in normal_subgroups(C4) if N.order == 2)),
           ("center in Q8", Q8, center(Q8))]
    for V in normal_subgroups(Q8):
        out.append((f"V{V.order}:{','.join(map(str, V.elements))} in Q8", Q8, V))
    return out


def suite_nerve(rep: SuiteReport, rng: SplitMix64, caps: dict) -> None:
    cap = max(caps["order_cap"], NERVE_LEVEL_CAP)
    rep.caps["nerve_level_cap"] = cap
    for label, G, U in nerve_instances():
        m = inclusion_module(G, U)
        K = nerve(m, 3, order_cap=cap)
        ok, w = verify_simplicial(K)
        rep.check("simplicial identities", ok, {"module": label, "witness": w})
        orders = [H.order for H in K.groups]
        rep.check("level orders", orders == [G.order * U.order ** n for n in range(4)],
                  {"module": label, "orders": orders})
        M = moore_complex(K)
        rep.check("Moore complex of length one",
                  M.levels[1].order == U.order and all(L.is_trivial for L in M.levels[2:]),
                  {"module": label})
        p0 = homotopy_data(K, 0, M)
        Q, _ = quotient(G, U)
        rep.check("pi0 = G/U", np.array_equal(p0.boundaries.mask, U.mask)
                  and _isomorphic_exact(p0.group, Q), {"module": label})
        for n in (1, 2):
            rep.check(f"pi{n} trivial", homotopy_data(K, n, M).group.order == 1, {"module": label})
        back = truncate_to_precrossed(K)
        phi = GroupHom(m.source, back.source, list(range(U.order)), check=False) \
            if back.source.order == U.order else None
        rep.check("truncation round trip",
                  phi is not None and modules_isomorphic_via(m, back, phi, identity_hom(G)),
                  {"module": label})


# -- right-exactness conditions ---------------------------------------------------

def _random_couple(G: FiniteGroup, rng: SplitMix64, order_cap: int):
    """A split couple over G together with its expected coequalizer kernel."""
    normals = _normals(G)
    kind = rng.below(4)
    if kind == 0:
        N = rng.choice(normals)
        return "normal inclusion", c_translate(inclusion_module(G, N)), N
    if kind == 1:
        return "identity module", c_translate(inclusion_module(G, G.whole())), G.whole()
    if kind == 2:
        U = cyclic(2 + rng.below(3))
        m = PrecrossedModule(trivial_hom(U, G), GroupAction.trivial(G, U))
        return f"trivial module C{U.order}", c_translate(m), G.trivial()
    M = rng.choice(normals)
    _, psi = quotient(G, M)
    return "kernel pair", kernel_pair_couple(psi, order_cap=max(order_cap, G.order * G.order)), M


def suite_keune(rep: SuiteReport, rng: SplitMix64, caps: dict, count: int = 200) -> None:
    groups = _small_groups(48)
    holds = 0
    for i in range(count):
        G = rng.choice(groups)
        kind, c, expected = _random_couple(G, rng, caps["order_cap"])
        W = expected if rng.below(2) else rng.choice(_normals(G))
        _, phi = quotient(G, W)
        res = check_right_exact(c, phi)
        inst = {"id": i, "G": _gname(G), "couple": kind, "phi_kernel": W.order}
        rep.check("four right-exactness conditions agree", res.agree, {**inst, "values": list(res.values)})
        rep.check("conditions match the coequalizer", res.holds == (W == expected), inst)
        holds += res.holds
        m = n_translate(c)
        Q, _ = coequalizer_of_couple(c)
        rep.check("coequalizer = pi1 of N(couple)", _isomorphic_exact(Q, pi1_of_precrossed(m)), inst)
    rep.notes.append({"right_exact_instances": holds, "not_right_exact_instances": count - holds})


# -- endofunctor testers -----------------------------------------------------------

def suite_theorem23(rep: SuiteReport, rng: SplitMix64, caps: dict, count: int = 100) -> None:
    groups = _small_groups(48)
    functors = builtin_functors()
    for name, F in functors.items():
        F.order_cap = caps["order_cap"]
        done = {3: 0, 6: 0}
        attempts = 0
        while min(done.values()) < count and attempts < 20 * count:
            attempts += 1
            G = rng.choice(groups)
            U = rng.choice(_normals(G))
            inst = {"functor": name, "G": _gname(G), "U": U.order}
            try:
                if done[3] < count:
                    v = test_right_exact_condition3(F, U)
                    rep.check(f"condition 3 [{name}]", v.holds, {**inst, "witness": v.witness})
                    done[3] += 1
            except OrderCapExceeded:
                pass
            try:
                if done[6] < count:
                    _, phi = quotient(G, U)
                    v = test_right_exact_condition6(F, phi)
                    rep.check(f"condition 6 [{name}]", v.holds, {**inst, "witness": v.witness})
                    done[6] += 1
            except OrderCapExceeded:
                pass
            F.clear()
        if min(done.values()) < count:
            rep.check(f"enough instances [{name}]", False, {"functor": name, "accepted": dict(done)})
    cap = max(caps["order_cap"], NERVE_LEVEL_CAP)
    for label, G, U in nerve_instances():
        K = nerve(inclusion_module(G, U), 3, order_cap=cap)
        for name, F in functors.items():
            F.order_cap = cap
            v = test_right_exact_condition5(F, K)
            rep.check(f"condition 5 [{name}]", v.holds, {"functor": name, "module": label, "witness": v.witness})
            F.clear()


# -- Baumslag localization ---------------------------------------------------------

def _nilpotent_groups(max_order: int) -> list[FiniteGroup]:
    return [G for G in _small_groups(max_order) if is_nilpotent(G)]


def suite_power_identity(rep: SuiteReport, rng: SplitMix64, caps: dict) -> None:
    for G in _nilpotent_groups(200):
        normals = [U for U in _normals(G) if G.order * U.order <= caps["order_cap"]]
        picks = {0, len(normals) - 1, rng.below(len(normals))}
        for k in sorted(picks):
            U = normals[k]
            prod = power_identity_product(G, U)
            for n in range(1, 7):
                ok, w = check_power_identity(G, U, n, prod)
                rep.check("power identity", ok, {"A": _gname(G), "U": U.order, "n": n, "witness": w})


def suite_baumslag(rep: SuiteReport, rng: SplitMix64, caps: dict) -> None:
    for G in _nilpotent_groups(200):
        cls = nilpotency_class(G)
        for ps in PRIME_SETS:
            P = PrimeSet.of(ps)
            LG, eta = baumslag_localize(G, P)
            inst = {"G": _gname(G), "P": str(P)}
            rep.check("LG is P-local", is_p_local(LG, P), inst)
            rep.check("P-local iff order coprime", is_p_local(G, P) == all(G.order % p for p in P), inst)
            rep.check("eta onto", eta.is_surjective(), inst)
            rep.check("class(LG) <= class(G)", nilpotency_class(LG) <= cls, inst)
            rep.check("eta(Z(G)) in Z(LG)", eta.image_of(center(G)) <= center(LG), inst)
            rep.check("eta is an NS-map", is_ns_map(eta), inst)
            rep.absorb("iterated commutators with LN and Im eta agree", harness_prop81(G, P))
    suite_power_identity(rep, rng, caps)


def suite_section4(rep: SuiteReport, rng: SplitMix64, caps: dict) -> None:
    groups = _nilpotent_groups(200)
    for ps in PRIME_SETS:
        rep.absorb("section 4", harness_section4(ps, groups))


def suite_ns(rep: SuiteReport, rng: SplitMix64, caps: dict) -> None:
    for G in _nilpotent_groups(200):
        for ps in PRIME_SETS:
            _, eta = baumslag_localize(G, ps)
            rep.check("eta is an NS-map", is_ns_map(eta), {"G": _gname(G), "P": str(PrimeSet.of(ps))})
    S3 = symmetric(3)
    rep.check("1 -> S3 is not an NS-map", not is_ns_map(trivial_hom(cyclic(1), S3)), {"G": "S3"})


# -- quotients of local groups ------------------------------------------------------

def suite_theorem35(rep: SuiteReport, rng: SplitMix64, caps: dict, count: int = 500, lemma31: bool = True,
                    theorem35: bool = True) -> None:
    groups = _small_groups(200)
    local = {ps: [G for G in groups if all(G.order % p for p in ps)] for ps in PRIME_SETS}
    done35 = done31 = 0
    while (theorem35 and done35 < count) or (lemma31 and done31 < count):
        ps = rng.choice(PRIME_SETS)
        pred = p_local(ps)
        A = rng.choice(local[ps])
        U = rng.choice(_normals(A))
        if theorem35 and done35 < count:
            if A.order * U.order <= caps["order_cap"]:
                rep.absorb("quotient of local by local is local", harness_theorem35(pred, [(A, U)], caps["order_cap"]))
                done35 += 1
        if lemma31 and done31 < count:
            if rng.below(2):
                Q, f = quotient(A, U)
            else:
                _, f = U.as_group()
            K = f.kernel()
            if A.order * K.order <= caps["order_cap"]:
                ok, w = harness_lemma31(f, pred, caps["order_cap"])
                rep.check("shear map A x A -> A ⋉ A is an isomorphism", ok,
                          {"A": _gname(A), "P": str(PrimeSet.of(ps)), "kernel": K.order, "witness": w})
                done31 += 1


def suite_lemma31(rep: SuiteReport, rng: SplitMix64, caps: dict) -> None:
    suite_theorem35(rep, rng, caps, theorem35=False)


# -- Levine -----------------------------------------------------------------------

LEVINE_GROUPS = (("Heis3", lambda: heisenberg(3)), ("Q8", lambda: quaternion(8)),
                 ("C4xC2", lambda: product(cyclic(4), cyclic(2))), ("D4", lambda: dihedral(4)))


def suite_levine_systems(rep: SuiteReport, rng: SplitMix64, caps: dict, count: int = 100) -> None:
    for name, make in LEVINE_GROUPS:
        G = make()
        for i in range(count):
            sys = random_levine_system(G, rng)
            n = len(solve(G, sys))
            rep.check("Levine system has one solution", n == 1,
                      {"G": name, "id": i, "system": format_system(sys), "solutions": n})


def suite_invisible(rep: SuiteReport, rng: SplitMix64, caps: dict) -> None:
    for G in _nilpotent_groups(64):
        rep.check("no invisible subgroups in nilpotent groups", not invisible_subgroups(G), {"G": _gname(G)})
    A5, S3 = alternating(5), symmetric(3)
    inv = invisible_subgroups(A5)
    rep.check("A5 is its only invisible subgroup", [H.order for H in inv] == [60], {"G": "A5"})
    inv = invisible_subgroups(S3)
    rep.check("S3 has the 3-subgroup as only invisible subgroup", [H.order for H in inv] == [3], {"G": "S3"})


def suite_levine_witness(rep: SuiteReport, rng: SplitMix64, caps: dict) -> None:
    for name, G in (("S3", symmetric(3)), ("A5", alternating(5))):
        for H in invisible_subgroups(G):
            w = build_two_solution_witness(G, H)
            n = len(solve(G, w.system))
            rep.check("witness system has two solutions", n >= 2,
                      {"G": name, "H": H.order, "solutions": n})
            rep.notes.append({"G": name, "H": H.order, "variables": list(w.system.variables),
                              "system": format_system(w.system), "solutions": n,
                              "generators": list(w.generators)})


def suite_lemma511(rep: SuiteReport, rng: SplitMix64, caps: dict, count: int = 200) -> None:
    groups = _small_groups(48)
    done = 0
    while done < count:
        G = rng.choice(groups)
        normals = _normals(G)
        V = rng.choice(normals)
        below = [U for U in normals if U <= V]
        U = rng.choice(below)
        if G.order * V.order > caps["order_cap"]:
            continue
        rep.check("normal closure of G ⋉ U in G ⋉ V is G ⋉ U[V, G]", check_lemma511(G, U, V, caps["order_cap"]),
                  {"G": _gname(G), "U": U.order, "V": V.order})
        done += 1


def suite_prop510(rep: SuiteReport, rng: SplitMix64, caps: dict) -> None:
    for A in _nilpotent_groups(64):
        for U in _normals(A):
            rep.absorb("V = U[V, A] forces V = U", harness_prop510(A, U))


def suite_prop58(rep: SuiteReport, rng: SplitMix64, caps: dict) -> None:
    for name, G in (("Heis3", heisenberg(3)), ("Q8", quaternion(8)), ("D4", dihedral(4)),
                    ("S3", symmetric(3)), ("A5", alternating(5)), ("trivial", cyclic(1))):
        h = harness_prop58(G, rng, systems=100)
        h.notes = [{"G": name, **n} for n in h.notes]
        rep.absorb("solution counts match invisible subgroups", h)


def suite_levine(rep: SuiteReport, rng: SplitMix64, caps: dict) -> None:
    suite_levine_systems(rep, rng, caps)
    suite_invisible(rep, rng, caps)
    suite_levine_witness(rep, rng, caps)
    suite_lemma511(rep, rng, caps)
    suite_prop510(rep, rng, caps)


# -- HR, equations, gr ------------------------------------------------------------

def suite_hr(rep: SuiteReport, rng: SplitMix64, caps: dict) -> None:
    for G in _small_groups(32):
        for p in (2, 3):
            if G.order > 1 and is_p_power(G.order, p):
                rep.absorb("normal subgroups are HR-closed", harness_lemma54(G, p, caps["lattice_cap"], caps["order_cap"]))


def _divisibility_system(p: int) -> EquationSystem:
    w = reduce([("x", "x", 1)] * p + [("a", "a", 1)])
    return EquationSystem(("x",), (w,), parameters=("a",))


def suite_equations(rep: SuiteReport, rng: SplitMix64, caps: dict) -> None:
    for p in (2, 3, 5):
        sys = _divisibility_system(p)
        for G in _small_groups(60):
            a, b = satisfies_system(G, sys), is_uniquely_p_divisible(G, p)
            rep.check("equations agree with divisibility", a == b, {"G": _gname(G), "p": p})


def suite_gr(rep: SuiteReport, rng: SplitMix64, caps: dict) -> None:
    for G in _nilpotent_groups(128):
        L = graded_lie_ring(G)  # raises if a bracket is not well defined
        rep.check("bracket well defined", True, {"G": _gname(G)})
        ok, w = L.check_axioms()
        rep.check("Lie axioms", ok, {"G": _gname(G), "witness": w})


SUITES: dict[str, Callable] = {
    "nerve": suite_nerve,
    "keune": suite_keune,
    "lemma21": suite_keune,
    "theorem23": suite_theorem23,
    "baumslag": suite_baumslag,
    "section4": suite_section4,
    "ns": suite_ns,
    "power-identity": suite_power_identity,
    "theorem35": suite_theorem35,
    "lemma31": suite_lemma31,
    "levine": suite_levine,
    "levine-systems": suite_levine_systems,
    "invisible": suite_invisible,
    "levine-witness": suite_levine_witness,
    "lemma511": suite_lemma511,
    "prop510": suite_prop510,
    "prop58": suite_prop58,
    "hr": suite_hr,
    "equations": suite_equations,
    "gr": suite_gr,
}


def run_suite(name: str, seed: int = 1, order_cap: int = ORDER_CAP, lattice_cap: int = LATTICE_CAP) -> SuiteReport:
    if name not in SUITES:
        raise UnknownSuite(f"unknown suite {name!r}; known: {', '.join(sorted(SUITES))}")
    caps = {"order_cap": order_cap, "lattice_cap": lattice_cap}
    rep = SuiteReport(name, seed, dict(caps))
    start = time.perf_counter()
    SUITES[name](rep, SplitMix64(seed), caps)
    rep.wall_time = time.perf_counter() - start
    return rep
