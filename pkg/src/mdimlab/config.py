"""Experiment configuration: JSON parsing, validation, content hashing.

Configs are JSON documents with rationals as "p/q" strings so that exact
arithmetic survives serialization. The resolved configuration (defaults
filled, CLI overrides applied) is canonicalized and hashed; the hash is
embedded in every output row and report for traceability.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

from .errors import ValidationError
from .systems import (
    Potential,
    SystemSpec,
    SymbolicShift,
    FiniteSystem,
    canonical_word,
    constant_potential,
    coordinate_projection,
    distance_to_point,
    load_system,
    table_potential,
    validate_point,
)
from .util import parse_rational

DEFAULTS = {
    "mode": "auto",
    "window": [2, 6],
    "block_window": [0, 2],
    "n_trunc": 4,
    "n_grid": [2, 3, 4],
    "s_bracket": ["-4", "4"],
    "seed": 0,
    "budget": 10 ** 6,
    "tolerance": 0.2,
}


def load_config(source) -> dict:
    if isinstance(source, dict):
        return dict(source)
    try:
        with open(source, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config {source}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {source} is not valid JSON: {exc}") from exc


def _canonical(obj):
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in sorted(obj.items())}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


def config_hash(resolved: dict) -> str:
    blob = json.dumps(_canonical(resolved), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:12]


def parse_ladder(spec) -> Tuple[Fraction, ...]:
    """A ladder is either an explicit list of rationals or {start, rungs}."""
    if isinstance(spec, dict):
        start = parse_rational(spec["start"])
        rungs = int(spec["rungs"])
        return tuple(start / (2 ** i) for i in range(rungs))
    if isinstance(spec, (list, tuple)):
        return tuple(parse_rational(v) for v in spec)
    raise ValidationError(f"cannot parse ladder from {spec!r}")


def parse_point(system: SystemSpec, raw):
    if isinstance(system, SymbolicShift):
        if not isinstance(raw, (list, tuple)):
            raise ValidationError("shift points are written as symbol lists")
        return validate_point(system, canonical_word(raw))
    if isinstance(system, FiniteSystem):
        return validate_point(system, int(raw))
    if isinstance(raw, str):
        return validate_point(system, float(parse_rational(raw)))
    return validate_point(system, float(raw))


def parse_potential(system: SystemSpec, spec: Optional[dict]) -> Potential:
    if spec is None:
        return constant_potential(0)
    kind = spec.get("kind", "constant")
    if kind == "constant":
        return constant_potential(parse_rational(spec.get("value", 0)))
    if kind == "coordinate_projection":
        return coordinate_projection()
    if kind == "distance_to_point":
        return distance_to_point(parse_point(system, spec["anchor"]))
    if kind == "table":
        return table_potential(spec["values"])
    raise ValidationError(f"unknown potential kind {kind!r}")


@dataclass(frozen=True)
class ResolvedConfig:
    raw: dict
    system: SystemSpec
    seed: int
    hash: str

    def get(self, key, default=None):
        return self.raw.get(key, default)

    def require(self, key):
        if key not in self.raw:
            raise ValidationError(f"config is missing required field {key!r}")
        return self.raw[key]


def resolve_config(source, overrides: Optional[dict] = None) -> ResolvedConfig:
    raw = load_config(source)
    for key, value in DEFAULTS.items():
        raw.setdefault(key, value)
    if overrides:
        for key, value in overrides.items():
            if value is not None:
                raw[key] = value
    if "system" not in raw:
        raise ValidationError("config needs a 'system' entry (inline object or file path)")
    system_spec = raw["system"]
    system = load_system(system_spec)
    seed = int(raw.get("seed", 0))
    digest = config_hash(raw)
    return ResolvedConfig(raw=raw, system=system, seed=seed, hash=digest)
