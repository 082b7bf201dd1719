"""Line-oriented JSON records and the space config file format.

Rationals are written as "p/q" strings so they round-trip exactly.

Space config (INI):

    [space]
    kind = cantor            # real-window | cantor | hyperbolic-boundary | tree-boundary
    lo = 0
    hi = 1
    nu = 1/3
    depth = 10
    branching = 2
    delta = 0.881373587
    visual_C = 2
    visual_a = 2.718281828
"""

from __future__ import annotations

import configparser
import json
import math
from dataclasses import asdict, is_dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, TextIO

from .hyperbolic import Horoball
from .metric import (
    HALF_PLANE_DELTA,
    Ball,
    SpaceDescriptor,
    cantor_space,
    hyperbolic_boundary,
    real_window,
    tree_boundary,
)


def encode(value: Any) -> Any:
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        return value if math.isfinite(value) else str(value)
    if isinstance(value, Ball):
        return {"center": encode(value.center), "radius": encode(value.radius)}
    if isinstance(value, SpaceDescriptor):
        return {"kind": value.kind, "lo": encode(value.lo), "hi": encode(value.hi)}
    if is_dataclass(value):
        return {k: encode(v) for k, v in asdict(value).items()}
    if isinstance(value, dict):
        return {str(k): encode(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set)):
        return [encode(v) for v in value]
    return str(value)


def write_records(records: Iterable[dict], out: TextIO) -> int:
    n = 0
    for r in records:
        out.write(json.dumps(encode(r), sort_keys=True) + "\n")
        n += 1
    return n


def read_records(lines: Iterable[str]) -> list[dict]:
    return [json.loads(line) for line in lines if line.strip()]


def horoball_record(h: Horoball) -> dict:
    return {"base": h.base, "level": h.level, "shadow_radius": h.shadow_radius,
            "euclidean_diameter": h.euclidean_diameter}


_FIELDS = {"lo": Fraction, "hi": Fraction, "nu": Fraction, "depth": int, "branching": int,
           "delta": float, "visual_C": float, "visual_a": float}


def space_from_config(text: str) -> SpaceDescriptor:
    """Parse a ``[space]`` section into a SpaceDescriptor."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    cp.read_string(text)
    if "space" not in cp:
        raise ValueError("config needs a [space] section")
    sec = cp["space"]
    kind = sec.get("kind")
    unknown = set(sec) - set(_FIELDS) - {"kind"}
    if unknown:
        raise ValueError(f"unknown keys {sorted(unknown)}")
    kw = {k: _FIELDS[k](sec[k]) for k in sec if k in _FIELDS}
    if kind == "real-window":
        return real_window(kw.pop("lo", 0), kw.pop("hi", 1), **kw)
    if kind == "cantor":
        return cantor_space(kw.pop("nu", Fraction(1, 3)), kw.pop("depth", 10), **kw)
    if kind == "hyperbolic-boundary":
        kw.setdefault("delta", HALF_PLANE_DELTA)
        return hyperbolic_boundary(kw.pop("lo", 0), kw.pop("hi", 1), **kw)
    if kind == "tree-boundary":
        return tree_boundary(kw.pop("branching", 2), kw.pop("depth", 8),
                             kw.pop("visual_a", math.e), **kw)
    raise ValueError(f"unknown space kind {kind!r}")


def load_space(path) -> SpaceDescriptor:
    return space_from_config(Path(path).read_text())
