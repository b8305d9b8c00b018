"""Newline-delimited dataset records: ``{"id", "kind", "points"}`` per line."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterable

from .errors import InputError
from .metrics import PointSet, Trajectory

KINDS = {"trajectory": Trajectory, "pointset": PointSet}


def element_record(el) -> dict:
    return {"id": el.id, "kind": el.kind, "points": el.points.tolist()}


def parse_record(line: str, lineno: int):
    try:
        rec = json.loads(line)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON ({exc.msg})", lineno) from None
    if not isinstance(rec, dict):
        raise InputError("record must be a JSON object", lineno)
    missing = [k for k in ("id", "kind", "points") if k not in rec]
    if missing:
        raise InputError(f"record missing field(s) {', '.join(missing)}", lineno)
    rid, kind, pts = rec["id"], rec["kind"], rec["points"]
    if not isinstance(rid, str):
        raise InputError("id must be a string", lineno)
    if kind not in KINDS:
        raise InputError(f"record {rid!r}: kind must be 'trajectory' or 'pointset', got {kind!r}", lineno)
    if not isinstance(pts, list) or not pts:
        raise InputError(f"record {rid!r}: points must be a non-empty list", lineno)
    for p in pts:
        if (
            not isinstance(p, list)
            or not p
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in p)
        ):
            raise InputError(f"record {rid!r}: every point must be a non-empty list of numbers", lineno)
        if not all(math.isfinite(x) for x in p):
            raise InputError(f"record {rid!r}: coordinates must be finite", lineno)
    if len({len(p) for p in pts}) != 1:
        raise InputError(f"record {rid!r}: points have mixed dimensions", lineno)
    return KINDS[kind](pts, rid)


def read_dataset(path: str | Path) -> list:
    """Parse and validate a dataset file.

    Raises :class:`InputError` carrying the 1-based line number of the first
    offending record.  Blank lines are ignored.
    """
    elements, seen = [], {}
    kind = dim = None
    with Path(path).open() as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            el = parse_record(line, lineno)
            if kind is None:
                kind, dim = el.kind, el.dim
            elif el.kind != kind:
                raise InputError(f"record {el.id!r}: kind {el.kind!r} differs from {kind!r} of earlier records", lineno)
            elif el.dim != dim:
                raise InputError(f"record {el.id!r}: dimension {el.dim} differs from {dim} of earlier records", lineno)
            if el.id in seen:
                raise InputError(f"duplicate id {el.id!r} (first seen on line {seen[el.id]})", lineno)
            seen[el.id] = lineno
            elements.append(el)
    if not elements:
        raise InputError("dataset contains no records", 1)
    return elements


def write_dataset(path: str | Path, elements: Iterable) -> None:
    with Path(path).open("w") as fh:
        for el in elements:
            fh.write(json.dumps(element_record(el)) + "\n")
