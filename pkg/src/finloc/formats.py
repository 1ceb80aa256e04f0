"""Group and equation-system documents.

Both are JSON objects with an optional ``format_version`` (only 1 is
accepted). See the README for the full grammar.
"""

from __future__ import annotations

import json
import math
import re
from typing import Any

import numpy as np

from .errors import NotAGroup, OrderCapExceeded, ParseError
from .families import BUILDERS, alternating, symmetric
from .group import (
    ORDER_CAP,
    FiniteGroup,
    GroupAction,
    direct_product,
    from_permutations,
    from_table,
    prime_factors,
    semidirect_product,
)
from .levine import EquationSystem, FreeProductWord, reduce

FORMAT_VERSION = 1


def _load(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", position=e.pos) from None


def _version(doc: dict, where: str) -> None:
    v = doc.get("format_version", FORMAT_VERSION)
    if v != FORMAT_VERSION:
        raise ParseError(f"unsupported format_version {v!r}", position=where)


def _int(doc: dict, key: str, where: str, minimum: int = 1) -> int:
    if key not in doc:
        raise ParseError(f"missing parameter {key!r}", position=where)
    v = doc[key]
    if not isinstance(v, int) or isinstance(v, bool) or v < minimum:
        raise ParseError(f"parameter {key!r} must be an integer >= {minimum}", position=f"{where}.{key}")
    return v


_FAMILY_PARAMS = {
    "cyclic": ("n",), "dihedral": ("n",), "symmetric": ("n",), "alternating": ("n",),
    "quaternion": ("order",), "heisenberg_p": ("p",),
}


def _family_order(name: str, params: dict) -> int:
    if name == "cyclic":
        return params["n"]
    if name == "dihedral":
        return 2 * params["n"]
    if name in ("symmetric", "alternating"):
        n = params["n"]
        return max(1, math.factorial(n) // (2 if name == "alternating" and n > 1 else 1))
    if name == "quaternion":
        return params.get("order", 8)
    return params["p"] ** 3


def group_from_spec(doc: Any, order_cap: int = ORDER_CAP, where: str = "$") -> FiniteGroup:
    """Build a group from an already-decoded spec document."""
    if not isinstance(doc, dict):
        raise ParseError("group spec must be an object", position=where)
    _version(doc, where)
    kinds = [k for k in ("family", "permutation", "table") if k in doc]
    if len(kinds) != 1:
        raise ParseError("group spec needs exactly one of 'family', 'permutation', 'table'", position=where)
    kind = kinds[0]
    try:
        if kind == "family":
            G = _family(doc, order_cap, where)
        elif kind == "permutation":
            p = doc["permutation"]
            if not isinstance(p, dict):
                raise ParseError("'permutation' must be an object", position=f"{where}.permutation")
            deg = _int(p, "degree", f"{where}.permutation")
            gens = p.get("generators")
            if not isinstance(gens, list):
                raise ParseError("'generators' must be a list", position=f"{where}.permutation.generators")
            for i, g in enumerate(gens):
                if (not isinstance(g, list) or len(g) != deg
                        or sorted(g) != list(range(deg))):
                    raise ParseError(f"generator {i} is not a permutation of 0..{deg - 1}",
                                     position=f"{where}.permutation.generators[{i}]")
            G = from_permutations(deg, gens, order_cap=order_cap)
        else:
            rows = doc["table"]
            if (not isinstance(rows, list) or not rows
                    or not all(isinstance(r, list) and len(r) == len(rows) for r in rows)
                    or not all(isinstance(x, int) for r in rows for x in r)):
                raise ParseError("'table' must be a square list of integer rows", position=f"{where}.table")
            try:
                G = from_table(np.asarray(rows), order_cap=order_cap)
            except NotAGroup as e:
                raise ParseError(f"table is not a group: {e}", position=f"{where}.table") from None
    except ParseError:
        raise
    except (ValueError, TypeError) as e:
        raise ParseError(str(e), position=where) from None
    if "name" in doc:
        G.name = str(doc["name"])
    return G


def _family(doc: dict, order_cap: int, where: str) -> FiniteGroup:
    name = doc["family"]
    if name in _FAMILY_PARAMS:
        params = {k: _int(doc, k, where) for k in _FAMILY_PARAMS[name] if k in doc or name != "quaternion"}
        if name == "heisenberg_p" and prime_factors(params["p"]) != [params["p"]]:
            raise ParseError("heisenberg_p needs a prime p", position=f"{where}.p")
        expected = _family_order(name, params)
        if expected > order_cap:
            raise OrderCapExceeded(f"group of order {expected} exceeds order cap {order_cap}", witness=expected)
        if name in ("symmetric", "alternating"):
            build = symmetric if name == "symmetric" else alternating
            G = build(params["n"], order_cap=max(order_cap, expected))
        else:
            G = BUILDERS[name](params)
    elif name == "direct_product":
        factors = doc.get("factors")
        if not isinstance(factors, list) or not factors:
            raise ParseError("'factors' must be a non-empty list", position=f"{where}.factors")
        G = group_from_spec(factors[0], order_cap, f"{where}.factors[0]")
        for i, f in enumerate(factors[1:], start=1):
            H = group_from_spec(f, order_cap, f"{where}.factors[{i}]")
            G = direct_product(G, H, order_cap=order_cap).group
    elif name == "semidirect":
        base = group_from_spec(doc.get("base"), order_cap, f"{where}.base")
        fiber = group_from_spec(doc.get("fiber"), order_cap, f"{where}.fiber")
        acts = doc.get("action", [])
        if not isinstance(acts, list):
            raise ParseError("'action' must be a list of [element, image list] pairs", position=f"{where}.action")
        gen_actions = {}
        for i, item in enumerate(acts):
            if (not isinstance(item, list) or len(item) != 2 or not isinstance(item[0], int)
                    or not isinstance(item[1], list) or len(item[1]) != fiber.order):
                raise ParseError("action entries are [base element, images of every fiber element]",
                                 position=f"{where}.action[{i}]")
            gen_actions[item[0]] = item[1]
        a = GroupAction.from_generators(base, fiber, gen_actions) if gen_actions else None
        G = semidirect_product(base, fiber, a, order_cap=order_cap).group
    else:
        raise ParseError(f"unknown family {name!r}", position=f"{where}.family")
    if G.order > order_cap:
        raise OrderCapExceeded(f"group of order {G.order} exceeds order cap {order_cap}", witness=G.order)
    return G


def parse_group_spec(text: str, order_cap: int = ORDER_CAP) -> FiniteGroup:
    return group_from_spec(_load(text), order_cap)


# -- equation systems ----------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(#)(\d+)|([A-Za-z_][A-Za-z0-9_]*))(?:\^(-?\d+))?")


def parse_word(text: str, variables: tuple[str, ...], parameters: tuple[str, ...],
               G: FiniteGroup | None, where: str = "$") -> FreeProductWord:
    """Tokens separated by spaces: ``name``, ``name^k``, ``#i`` (element
    index i of the group) or ``#i^k``; ``1`` alone is the empty word."""
    if text.strip() == "1":
        return FreeProductWord()
    raw = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        while text[pos].isspace():
            pos += 1
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"cannot read token at offset {pos}", position=f"{where}@{pos}")
        k = int(m.group(4)) if m.group(4) is not None else 1
        if m.group(1):
            if G is None:
                raise ParseError("constants need a group", position=f"{where}@{pos}")
            g = int(m.group(2))
            if g >= G.order:
                raise ParseError(f"element index {g} out of range", position=f"{where}@{pos}")
            raw.append(("c", G.power(g, k % max(1, int(G.element_orders[g])))))
        else:
            name = m.group(3)
            if name in variables:
                kind = "x"
            elif name in parameters:
                kind = "a"
            else:
                raise ParseError(f"unknown symbol {name!r}", position=f"{where}@{pos}")
            e = 1 if k > 0 else -1
            raw += [(kind, name, e)] * abs(k)
        pos = m.end()
    return reduce(raw, G)


def system_from_doc(doc: Any, G: FiniteGroup | None = None) -> EquationSystem:
    if not isinstance(doc, dict):
        raise ParseError("system must be an object", position="$")
    _version(doc, "$")
    params = doc.get("parameters", [])
    variables = doc.get("variables", [])
    relators = doc.get("relators", [])
    for key, val in (("parameters", params), ("variables", variables), ("relators", relators)):
        if not isinstance(val, list) or not all(isinstance(v, str) for v in val):
            raise ParseError(f"'{key}' must be a list of strings", position=f"$.{key}")
    params, variables = tuple(params), tuple(variables)
    words = tuple(parse_word(r, variables, params, G, f"$.relators[{i}]") for i, r in enumerate(relators))
    values = doc.get("parameter_values", {})
    if not isinstance(values, dict):
        raise ParseError("'parameter_values' must be an object", position="$.parameter_values")
    pv = []
    for name, v in sorted(values.items()):
        if name not in params:
            raise ParseError(f"value for unknown parameter {name!r}", position=f"$.parameter_values.{name}")
        if not isinstance(v, int) or (G is not None and not 0 <= v < G.order):
            raise ParseError(f"bad value for parameter {name!r}", position=f"$.parameter_values.{name}")
        pv.append((name, v))
    try:
        return EquationSystem(variables, words, parameters=params, parameter_values=tuple(pv))
    except ValueError as e:
        raise ParseError(str(e), position="$") from None


def parse_system(text: str, G: FiniteGroup | None = None) -> EquationSystem:
    return system_from_doc(_load(text), G)
