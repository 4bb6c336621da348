"""JSON encoding of functions, operators and results.

Complex numbers are ``[re, im]`` pairs, non-finite floats are the strings
``"inf"``, ``"-inf"`` and ``"nan"``. Floats are written with ``repr`` so a
double survives the round trip unchanged.
"""

from __future__ import annotations

import json
import math
from enum import Enum

import numpy as np

from .complexfn import (
    EntireFunction,
    ExpQuadratic,
    PolyTimesExpQuad,
    TaylorSeries,
    expm1_quadratic_over_z,
)
from .errors import ConfigInvalid
from .fockspace import Flavor, FockContext
from .wcomp import AffineSymbol, WeightedCompOp

__all__ = [
    "to_jsonable",
    "dumps",
    "parse_complex",
    "parse_p",
    "function_from_json",
    "function_to_json",
    "context_from_json",
    "operator_from_json",
    "operator_to_json",
]

BUILTINS = {"expm1_quadratic_over_z"}


def _float(x: float):
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(x)


def to_jsonable(obj):
    if hasattr(obj, "to_json"):
        return to_jsonable(obj.to_json())
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return [_float(obj.real), _float(obj.imag)]
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [to_jsonable(v) for v in obj]
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent: int | None = 2) -> str:
    return json.dumps(to_jsonable(obj), indent=indent, allow_nan=False)


def parse_complex(v, name: str = "value") -> complex:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in v
    ):
        return complex(float(v[0]), float(v[1]))
    raise ConfigInvalid(f"{name}: expected a number or [re, im], got {v!r}")


def parse_p(v) -> float:
    if isinstance(v, str):
        if v.lower() in ("inf", "infinity", "∞"):
            return math.inf
        try:
            v = float(v)
        except ValueError as e:
            raise ConfigInvalid(f"p: cannot parse {v!r}") from e
    if not isinstance(v, (int, float)) or isinstance(v, bool) or not v >= 1:
        raise ConfigInvalid(f"p must be a number >= 1 or 'inf', got {v!r}")
    return float(v)


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigInvalid(f"{where}: missing field {key!r}")
    return d[key]


def function_from_json(d: dict) -> EntireFunction:
    if not isinstance(d, dict):
        raise ConfigInvalid("function description must be a JSON object")
    kind = _require(d, "kind", "function")
    try:
        if kind == "exp_quadratic":
            return ExpQuadratic(*(parse_complex(d.get(k, 0), k) for k in ("a0", "a1", "a2")))
        if kind == "poly_exp_quadratic":
            poly = _require(d, "poly", "poly_exp_quadratic")
            if not isinstance(poly, list) or not poly:
                raise ConfigInvalid("poly must be a non-empty list")
            core = d.get("core", {})
            core_f = ExpQuadratic(*(parse_complex(core.get(k, 0), k) for k in ("a0", "a1", "a2")))
            return PolyTimesExpQuad(tuple(parse_complex(c, "poly") for c in poly), core_f)
        if kind == "taylor":
            if "builtin" in d:
                name = d["builtin"]
                if name not in BUILTINS:
                    raise ConfigInvalid(f"unknown builtin {name!r}")
                c = parse_complex(_require(d, "c", "builtin"), "c")
                terms = int(d.get("terms", 200))
                return expm1_quadratic_over_z(c, terms)
            coeffs = _require(d, "coeffs", "taylor")
            env = _require(d, "envelope", "taylor")
            return TaylorSeries(
                tuple(parse_complex(c, "coeffs") for c in coeffs),
                float(_require(env, "C", "envelope")),
                float(_require(env, "gamma", "envelope")),
                float(d.get("rtol", 1e-13)),
            )
    except ConfigInvalid:
        raise
    except (ValueError, TypeError) as e:
        raise ConfigInvalid(f"invalid {kind} function: {e}") from e
    raise ConfigInvalid(f"unknown function kind {kind!r}")


def function_to_json(f: EntireFunction) -> dict:
    if isinstance(f, ExpQuadratic):
        return {"kind": "exp_quadratic", "a0": f.a0, "a1": f.a1, "a2": f.a2}
    if isinstance(f, PolyTimesExpQuad):
        return {
            "kind": "poly_exp_quadratic",
            "poly": list(f.poly),
            "core": {"a0": f.core.a0, "a1": f.core.a1, "a2": f.core.a2},
        }
    if isinstance(f, TaylorSeries):
        return {
            "kind": "taylor",
            "coeffs": list(f.coeffs),
            "envelope": {"C": f.envelope_c, "gamma": f.envelope_gamma},
            "rtol": f.rtol,
        }
    raise TypeError(f"cannot serialise {type(f).__name__}")


def context_from_json(d: dict) -> FockContext:
    p = parse_p(d.get("p", 2))
    alpha = d.get("alpha", 1.0)
    if not isinstance(alpha, (int, float)) or isinstance(alpha, bool) or not alpha > 0:
        raise ConfigInvalid(f"alpha must be a positive number, got {alpha!r}")
    flavor = d.get("flavor")
    if flavor is None:
        flavor = Flavor.FP if math.isfinite(p) else Flavor.FINFTY
    try:
        return FockContext(p, float(alpha), Flavor(flavor))
    except ValueError as e:
        raise ConfigInvalid(str(e)) from e


def operator_from_json(d: dict) -> WeightedCompOp:
    if not isinstance(d, dict):
        raise ConfigInvalid("operator description must be a JSON object")
    psi = function_from_json(_require(d, "psi", "operator"))
    a = parse_complex(d.get("a", 0), "a")
    lam = parse_complex(_require(d, "lambda", "operator"), "lambda")
    return WeightedCompOp(psi, AffineSymbol(a, lam), context_from_json(d))


def operator_to_json(W: WeightedCompOp) -> dict:
    return {
        "psi": function_to_json(W.psi),
        "a": W.a,
        "lambda": W.lam,
        "p": "inf" if math.isinf(W.ctx.p) else W.ctx.p,
        "alpha": W.ctx.alpha,
        "flavor": W.ctx.flavor.value,
    }
