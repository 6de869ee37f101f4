"""Plain-text configs, CSV tables and JSON reports.

Config files are ``key = value`` lines ('#' starts a comment).  Per-axis
values are comma separated.  Grid functions export to CSV with one row per
node, coordinate columns first.  JSON reports are written with sorted keys
and round-trip-exact floats, so identical runs produce identical bytes.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .grid import GridDomain, GridFunction, build_box_domain, named_mask

_AXIS_NAMES = ("x", "y", "t")


def parse_config_text(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def load_config(path) -> dict:
    return parse_config_text(Path(path).read_text())


def _floats(s: str):
    return tuple(float(v) for v in s.split(","))


def _ints(s: str):
    return tuple(int(v) for v in s.split(","))


def domain_from_config(cfg: dict) -> GridDomain:
    try:
        lower = _floats(cfg.get("lower", "0"))
        upper = _floats(cfg.get("upper", "1"))
        points = _ints(cfg["points"])
    except KeyError as e:
        raise ConfigError(f"missing domain key: {e}") from None
    except ValueError as e:
        raise ConfigError(f"bad domain value: {e}") from None
    box = build_box_domain(lower, upper, points)
    mask = cfg.get("mask", "box")
    params = {}
    for key in ("center",):
        if f"mask_{key}" in cfg:
            params[key] = _floats(cfg[f"mask_{key}"])
    for key in ("radius", "radius_inner", "radius_outer"):
        if f"mask_{key}" in cfg:
            params[key] = float(cfg[f"mask_{key}"])
    return named_mask(mask, box, params)


def write_grid_csv(path, f: GridFunction):
    """One row per node: coordinates, then the value."""
    dim = f.domain.dim
    coords = f.domain.meshgrid()
    header = list(_AXIS_NAMES[:dim]) + ["value"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        flat = [c.ravel() for c in coords] + [f.values.ravel()]
        for row in zip(*flat):
            writer.writerow([format(v, ".17g") for v in row])


def read_grid_csv(path, domain: GridDomain) -> GridFunction:
    vals = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)  # header
        for row in reader:
            vals.append(float(row[-1]))
    arr = np.asarray(vals).reshape(domain.shape)
    return GridFunction(domain, arr)


def read_family_csv(domain: GridDomain, paths) -> list:
    """Coefficient tables, one CSV per field: coords then a_1..a_dim columns."""
    tables = []
    for path in paths:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            n_coeff = len(header) - domain.dim
            if n_coeff != domain.dim:
                raise ConfigError(
                    f"{path}: expected {domain.dim} coefficient columns, got {n_coeff}"
                )
            cols = [[] for _ in range(n_coeff)]
            for row in reader:
                for i in range(n_coeff):
                    cols[i].append(float(row[domain.dim + i]))
        arrays = []
        for col in cols:
            arr = np.asarray(col).reshape(domain.shape)
            arrays.append(None if not arr.any() else arr)
        tables.append(tuple(arrays))
    return tables


def write_json(path, payload: dict):
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_convergence_csv(path, records):
    """Sweep table: spacing, residual norm, observed order (blank on level 0)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["h", "residual_norm", "observed_order"])
        for rec in records:
            order = "" if rec.observed_order is None else format(rec.observed_order, ".17g")
            writer.writerow(
                [format(rec.h, ".17g"), format(rec.residual_norm, ".17g"), order]
            )
