"""JSON inputs and CSV/JSON outputs.

Lattice points are written as comma-joined integer keys ("1" in d = 1,
"0,1" in d = 2).  A key given without its mirror image is mirrored; an
explicit pair with different values is an error.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Mapping

from .lattice import (
    ClusterSpec,
    CorrelationSpec,
    MayerFunction,
    PairPotential,
    Point,
    correlation_to_cluster,
    format_key,
    mayer_from_potential,
    neg,
    parse_key,
)

ZERO_TRIM = 1e-12


class InputError(ValueError):
    """Malformed input file content; the message names the field."""


def fmt(v: float) -> str:
    return f"{v:.17g}"


def read_json(path: str | Path) -> dict:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise InputError(f"{path}: top level must be an object")
    return data


def _points(raw, field: str, dim: int | None) -> dict[Point, float]:
    if not isinstance(raw, Mapping):
        raise InputError(f"field '{field}' must be an object of point -> value")
    out: dict[Point, float] = {}
    for key, value in raw.items():
        try:
            x = parse_key(str(key))
            v = float(value)
        except (TypeError, ValueError):
            raise InputError(f"field '{field}': bad entry {key!r}: {value!r}") from None
        if dim is not None and len(x) != dim:
            raise InputError(f"field '{field}': key {key!r} is not a {dim}-dimensional point")
        out[x] = v
    for x, v in list(out.items()):
        out.setdefault(neg(x), v)
    return out


def _dim(data: dict, dim: int | None) -> int:
    file_dim = data.get("dim")
    if file_dim is None and dim is None:
        raise InputError("field 'dim' is missing")
    if file_dim is not None and dim is not None and int(file_dim) != dim:
        raise InputError(f"field 'dim': file says {file_dim}, --dim says {dim}")
    return int(file_dim if file_dim is not None else dim)


def parse_target(data: dict, r: float, dim: int | None = None) -> ClusterSpec:
    """ClusterSpec from {dim, rho1|omega1, rho2|omega2}."""
    dim = _dim(data, dim)
    if "omega1" in data:
        try:
            omega1 = float(data["omega1"])
        except (TypeError, ValueError):
            raise InputError("field 'omega1' must be a number") from None
        omega2 = _points(data.get("omega2", {}), "omega2", dim)
        return ClusterSpec(dim, omega1, {x: v for x, v in omega2.items() if any(x)}, r)
    if "rho1" in data:
        try:
            rho1 = float(data["rho1"])
        except (TypeError, ValueError):
            raise InputError("field 'rho1' must be a number") from None
        rho2 = _points(data.get("rho2", {}), "rho2", dim)
        return correlation_to_cluster(CorrelationSpec(dim, rho1, rho2), r)
    raise InputError("target needs 'omega1' or 'rho1'")


def parse_potential(data: dict, dim: int | None = None) -> MayerFunction:
    """Mayer function from {dim, g: {...}} or {dim, phi: {...}}."""
    dim = _dim(data, dim)
    if "g" in data:
        values = _points(data["g"], "g", dim)
        try:
            return MayerFunction(dim, values)
        except ValueError as exc:
            raise InputError(f"field 'g': {exc}") from None
    if "phi" in data:
        values = _points(data["phi"], "phi", dim)
        try:
            return mayer_from_potential(PairPotential(dim, values))
        except ValueError as exc:
            raise InputError(f"field 'phi': {exc}") from None
    raise InputError("potential needs 'g' or 'phi'")


def _coord_header(dim: int) -> list[str]:
    return [f"x{i + 1}" for i in range(dim)]


def write_csv(path: Path, header: list[str], rows: Iterable[list[str]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_potential_csv(path: Path, g: MayerFunction) -> None:
    rows = []
    for x, v in g.items():
        if abs(v) <= ZERO_TRIM:
            continue
        phi = -math.log1p(v) if v > -1 else math.inf
        rows.append([str(u) for u in x] + [fmt(phi), fmt(v)])
    write_csv(path, _coord_header(g.dim) + ["phi", "g"], rows)


def write_correlation_csv(path: Path, dim: int, omega1: float, omega2: Mapping[Point, float]) -> None:
    rows = []
    for x in sorted(omega2):
        w = omega2[x]
        rows.append([str(u) for u in x] + [fmt(w + omega1**2), fmt(w)])
    write_csv(path, _coord_header(dim) + ["rho2", "omega2"], rows)


def write_sweep_csv(path: Path, dim: int, rows, probes: list[Point]) -> None:
    header = ["k", "sites", "rho1"] + [f"rho2@{format_key(x)}" for x in probes]
    out = [[str(r.k), str(r.sites), fmt(r.rho1)] + [fmt(r.rho2[x]) for x in probes] for r in rows]
    write_csv(path, header, out)


def write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def mayer_to_json(g: MayerFunction) -> dict:
    return {"dim": g.dim, "g": {format_key(x): v for x, v in g.items()}}


def spec_to_json(spec: ClusterSpec) -> dict:
    return {
        "dim": spec.dim,
        "omega1": spec.omega1,
        "omega2": {format_key(x): v for x, v in sorted(spec.omega2.items())},
    }
