"""Reading ``.toric`` input files (YAML with exact integer entries)."""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

import yaml

from .toric import ToricSuperspace

__all__ = ["InputError", "ToricInput", "load_input", "parse_input", "parse_cutoff",
           "fixture_path", "FIXTURES"]

FIXTURES = ("p1", "p2", "f1", "f1_super", "p1_negdeg")


class InputError(ValueError):
    pass


@dataclass
class ToricInput:
    rays: list
    max_cones: list
    m: list
    l: list
    cutoff: tuple[int, ...] | None
    lambda_mode: str
    name: str

    def superspace(self) -> ToricSuperspace:
        return ToricSuperspace(self.rays, self.max_cones, self.m, self.l, self.name)


def _int_matrix(value, key: str, allow_empty: bool = False) -> list[list[int]]:
    if value is None and allow_empty:
        return []
    if not isinstance(value, list) or (not value and not allow_empty):
        raise InputError(f"{key} must be a nonempty list of integer lists")
    out = []
    for row in value:
        if not isinstance(row, list):
            raise InputError(f"{key}: each row must be a list")
        for x in row:
            if isinstance(x, bool) or not isinstance(x, int):
                raise InputError(f"{key}: entries must be integers, got {x!r}")
        out.append(list(row))
    return out


def parse_input(text: str) -> ToricInput:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise InputError(f"malformed input: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError("input must be a mapping")
    unknown = set(data) - {"name", "rays", "max_cones", "m", "l", "cutoff", "lambda_mode"}
    if unknown:
        raise InputError(f"unknown keys {sorted(unknown)}")
    for key in ("rays", "max_cones", "m"):
        if key not in data:
            raise InputError(f"missing key {key!r}")
    cutoff = data.get("cutoff")
    if cutoff is not None:
        if not isinstance(cutoff, list) or not all(
                isinstance(c, int) and not isinstance(c, bool) and c >= 0 for c in cutoff):
            raise InputError("cutoff must be a list of nonnegative integers")
        cutoff = tuple(cutoff)
    mode = data.get("lambda_mode", "zero")
    if mode not in ("zero", "symbolic"):
        raise InputError("lambda_mode must be 'zero' or 'symbolic'")
    return ToricInput(
        rays=_int_matrix(data["rays"], "rays"),
        max_cones=_int_matrix(data["max_cones"], "max_cones"),
        m=_int_matrix(data["m"], "m"),
        l=_int_matrix(data.get("l"), "l", allow_empty=True),
        cutoff=cutoff,
        lambda_mode=mode,
        name=str(data.get("name", "")),
    )


def load_input(path: str | Path) -> ToricInput:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    return parse_input(text)


def fixture_path(name: str) -> Path:
    """Path of a bundled example input (p1, p2, f1, f1_super, p1_negdeg)."""
    return Path(str(resources.files("qdm") / "data" / f"{name}.toric"))


def parse_cutoff(text: str, r: int) -> tuple[int, ...]:
    """'3,4', 'q1=3,q2=4' or 'a=3,b=4'."""
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise InputError("empty cutoff")
    if all("=" not in p for p in parts):
        try:
            vals = [int(p) for p in parts]
        except ValueError as exc:
            raise InputError(f"bad cutoff {text!r}") from exc
    else:
        vals = [None] * r
        for p in parts:
            if "=" not in p:
                raise InputError(f"bad cutoff {text!r}")
            key, val = (s.strip() for s in p.split("=", 1))
            if key.startswith("q") and key[1:].isdigit():
                idx = int(key[1:]) - 1
            elif len(key) == 1 and key.isalpha():
                idx = ord(key.lower()) - ord("a")
            else:
                raise InputError(f"unknown cutoff variable {key!r}")
            if not 0 <= idx < r:
                raise InputError(f"cutoff variable {key!r} out of range")
            try:
                vals[idx] = int(val)
            except ValueError as exc:
                raise InputError(f"bad cutoff {text!r}") from exc
        if any(v is None for v in vals):
            raise InputError(f"cutoff {text!r} does not cover all {r} variables")
    if len(vals) != r:
        raise InputError(f"cutoff needs {r} entries, got {len(vals)}")
    if any(v < 0 for v in vals):
        raise InputError("cutoff entries must be >= 0")
    return tuple(vals)
