#############################################################################
##
## Copyright (C) 2025 Killian-W.
## All rights reserved.
##
## This file is part of the Qtraj project.
##
## Licensed under the MIT License.
## You may obtain a copy of the License at:
##     https://opensource.org/licenses/MIT
##
## This software is provided "as is," without warranty of any kind.
##
#############################################################################

"""
String identifiers for catalog states, as used in scenario files.

    ho:k=0,omega=1,mass=1
    box:k=1,L=3.14
    const:n=1,value=1,V=0
    sup:levels=0|1,weights=1|1,omega=1,mass=1
    rot(ho:k=0)
    product(ho:k=0,ho:k=0)
    compose(sup:levels=0|1,sup:levels=0|1)
"""

from typing import Dict, List, Tuple

from core.exceptions import StateError, StateSpecError

from .states import (
    RealStationaryState,
    State,
    TwoVectorState,
    box_state,
    compose_states,
    constant_state,
    ho_eigenstate,
    ho_superposition,
    product,
    rotating_eigenstate,
)

# Allowed parameters per leaf kind, with their defaults
LEAF_PARAMETERS: Dict[str, Dict[str, object]] = {
    "ho": {"k": 0, "omega": 1.0, "mass": 1.0},
    "box": {"k": 1, "L": 1.0, "mass": 1.0},
    "const": {"n": 1, "value": 1.0, "V": 0.0},
    "sup": {"levels": "0|1", "weights": None, "omega": 1.0, "mass": 1.0},
}
COMBINATORS = ("rot", "product", "compose")


def _split_top_level(text: str) -> List[str]:
    parts, depth, current = [], 0, ""
    for char in text:
        if char == "(":
            depth += 1
        elif char == ")":
            depth -= 1
            if depth < 0:
                raise StateSpecError(f"Unbalanced parentheses in '{text}'")
        if char == "," and depth == 0:
            parts.append(current)
            current = ""
        else:
            current += char
    if depth != 0:
        raise StateSpecError(f"Unbalanced parentheses in '{text}'")
    parts.append(current)
    return [p.strip() for p in parts]


def _group_arguments(text: str) -> List[str]:
    """Re-join parameter tokens onto the state they belong to."""
    arguments: List[str] = []
    for token in _split_top_level(text):
        if not token:
            raise StateSpecError(f"Empty argument in '{text}'")
        starts_state = ":" in token.split("=")[0] or "(" in token or token in LEAF_PARAMETERS
        if starts_state or not arguments:
            arguments.append(token)
        else:
            arguments[-1] += "," + token
    return arguments


def _number(text: str, key: str):
    try:
        value = complex(text) if "j" in text else float(text)
    except ValueError as e:
        raise StateSpecError(f"Parameter '{key}' expects a number, got '{text}'") from e
    if isinstance(value, float) and value.is_integer() and key in ("k", "n"):
        return int(value)
    return value


def _parse_leaf(kind: str, body: str, hbar: float) -> State:
    if kind not in LEAF_PARAMETERS:
        raise StateSpecError(f"Unknown state kind '{kind}'")
    params = dict(LEAF_PARAMETERS[kind])
    if body:
        for item in body.split(","):
            key, sep, value = item.partition("=")
            key = key.strip()
            if not sep or key not in params:
                raise StateSpecError(f"Unknown parameter '{item}' for state kind '{kind}'")
            params[key] = value.strip()

    try:
        if kind == "ho":
            return ho_eigenstate(
                _number(str(params["k"]), "k"),
                float(_number(str(params["omega"]), "omega")),
                float(_number(str(params["mass"]), "mass")),
                hbar,
            )
        if kind == "box":
            return box_state(
                _number(str(params["k"]), "k"),
                float(_number(str(params["L"]), "L")),
                hbar,
                float(_number(str(params["mass"]), "mass")),
            )
        if kind == "const":
            return constant_state(
                n=_number(str(params["n"]), "n"),
                value=float(_number(str(params["value"]), "value")),
                potential=float(_number(str(params["V"]), "V")),
                hbar=hbar,
            )
        levels = [_number(v, "k") for v in str(params["levels"]).split("|")]
        weights = (
            [_number(v, "weights") for v in str(params["weights"]).split("|")]
            if params["weights"] is not None
            else None
        )
        return ho_superposition(
            levels,
            weights,
            float(_number(str(params["omega"]), "omega")),
            float(_number(str(params["mass"]), "mass")),
            hbar,
        )
    except StateSpecError:
        raise
    except (StateError, TypeError) as e:
        raise StateSpecError(f"Invalid '{kind}' state: {e}") from e


def _split_call(spec: str) -> Tuple[str, str]:
    name, _, rest = spec.partition("(")
    if not rest.endswith(")"):
        raise StateSpecError(f"Expected a closing ')' in '{spec}'")
    return name.strip(), rest[:-1]


def parse_state_spec(spec: str, hbar: float = 1.0) -> State:
    spec = spec.strip()
    if not spec:
        raise StateSpecError("State specification is empty")

    head = spec.split("(")[0].split(":")[0].strip()
    if head in COMBINATORS and "(" in spec:
        name, inner = _split_call(spec)
        arguments = [parse_state_spec(a, hbar) for a in _group_arguments(inner)]
        if name == "rot":
            if len(arguments) != 1 or not isinstance(arguments[0], RealStationaryState):
                raise StateSpecError("rot(...) takes exactly one real stationary state")
            return rotating_eigenstate(arguments[0])
        if len(arguments) < 2:
            raise StateSpecError(f"{name}(...) needs at least two states")
        if name == "product":
            if not all(isinstance(a, RealStationaryState) for a in arguments):
                raise StateSpecError("product(...) combines real stationary states")
            combined = arguments[0]
            for other in arguments[1:]:
                combined = product(combined, other)
            return combined
        if not all(isinstance(a, TwoVectorState) for a in arguments):
            raise StateSpecError("compose(...) combines two-vector states")
        composed = arguments[0]
        for other in arguments[1:]:
            composed = compose_states(composed, other)
        return composed

    kind, _, body = spec.partition(":")
    return _parse_leaf(kind.strip(), body.strip(), hbar)
