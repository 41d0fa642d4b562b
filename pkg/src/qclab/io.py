"""File formats: complex-field CSV, strict JSON schemas for motions and
currents, canonical JSON reports, and binary PGM heatmaps with sidecars.

All writers are deterministic: identical inputs give byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .currents import FreeGraph, LaminarCurrent, WeightedCurrent
from .errors import ValidationError
from .expr import evaluate as expr_evaluate
from .expr import parse as expr_parse
from .field_ops import ComplexField, GridSpec
from .lamination import Lamination
from .motion import FormulaMotion, HolomorphicMotion, SampledMotion

FIELD_HEADER = "# qclab-field"


# ---------------------------------------------------------------------------
# complex-field CSV (row-major, re/im column pairs)
# ---------------------------------------------------------------------------

def write_field_csv(field: ComplexField, path) -> None:
    spec = field.spec
    lines = [f"{FIELD_HEADER} n={spec.n} half_width={spec.half_width!r}"]
    for row in field.values:
        parts = []
        for v in row:
            parts.append(repr(float(v.real)))
            parts.append(repr(float(v.imag)))
        lines.append(",".join(parts))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_field_csv(path) -> ComplexField:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text or not text[0].startswith(FIELD_HEADER):
        raise ValidationError(f"line 1: missing '{FIELD_HEADER}' header")
    header = text[0][len(FIELD_HEADER):].split()
    meta = {}
    for item in header:
        key, _, val = item.partition("=")
        meta[key] = val
    try:
        n = int(meta["n"])
        half_width = float(meta["half_width"])
    except (KeyError, ValueError) as exc:
        raise ValidationError(f"line 1: malformed header ({exc})") from exc
    spec = GridSpec(half_width, n)
    rows = []
    for ln, line in enumerate(text[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2 * n:
            raise ValidationError(
                f"line {ln}: expected {2 * n} values (re/im pairs), got {len(parts)}")
        try:
            nums = np.array([float(p) for p in parts])
        except ValueError as exc:
            raise ValidationError(f"line {ln}: {exc}") from exc
        rows.append(nums[0::2] + 1j * nums[1::2])
    if len(rows) != n:
        raise ValidationError(f"line {len(text) + 1}: expected {n} rows, got {len(rows)}")
    return ComplexField(spec, np.vstack(rows))


def write_leaf_function_csv(f, path) -> None:
    """LeafFunction as a (z-grid x tau) table: one row per z sample, one
    re/im column pair per leaf."""
    tau = f.lam.tau
    header = ["z_re", "z_im"]
    for a in tau:
        header.append(f"leaf_{a.real!r}_{a.imag!r}_re")
        header.append(f"leaf_{a.real!r}_{a.imag!r}_im")
    lines = [",".join(header)]
    zs = f.z_points.ravel()
    vals = f.values.reshape(-1, tau.size)
    for z, row in zip(zs, vals):
        parts = [repr(float(z.real)), repr(float(z.imag))]
        for v in row:
            parts.append(repr(float(v.real)))
            parts.append(repr(float(v.imag)))
        lines.append(",".join(parts))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# canonical JSON
# ---------------------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, float) and (obj != obj or obj in (float("inf"), float("-inf"))):
        return repr(obj)
    return obj


def write_json(obj, path) -> None:
    Path(path).write_text(
        json.dumps(_jsonable(obj), sort_keys=True, indent=1) + "\n",
        encoding="utf-8")


# ---------------------------------------------------------------------------
# PGM heatmaps (binary P5, 8 bit, linear min-max scaling in a sidecar)
# ---------------------------------------------------------------------------

def write_pgm(values, path) -> None:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValidationError("PGM writer needs a 2-d array")
    lo = float(arr.min())
    hi = float(arr.max())
    scale = hi - lo
    if scale <= 0:
        data = np.zeros(arr.shape, dtype=np.uint8)
    else:
        data = np.clip(np.round((arr - lo) / scale * 255.0), 0, 255).astype(np.uint8)
    header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode("ascii")
    Path(path).write_bytes(header + data.tobytes())
    write_json({"min": lo, "max": hi, "scaling": "linear-minmax",
                "rows": arr.shape[0], "cols": arr.shape[1]},
               str(path) + ".json")


# ---------------------------------------------------------------------------
# motion and current JSON schemas
# ---------------------------------------------------------------------------

def _complex_from_json(item, what: str) -> complex:
    if isinstance(item, (int, float)):
        return complex(item)
    if (isinstance(item, (list, tuple)) and len(item) == 2
            and all(isinstance(t, (int, float)) for t in item)):
        return complex(item[0], item[1])
    raise ValidationError(f"{what}: expected a number or [re, im] pair, got {item!r}")


def motion_from_dict(data: dict) -> HolomorphicMotion:
    """Schema: { "formula": str | "leaves": [...], "tau": [complex],
    "epsilon_bound": real, "global": bool }; unknown keys rejected."""
    if not isinstance(data, dict):
        raise ValidationError("motion JSON must be an object")
    allowed = {"formula", "leaves", "z_samples", "tau", "epsilon_bound", "global"}
    unknown = set(data) - allowed
    if unknown:
        raise ValidationError(f"unknown motion keys {sorted(unknown)}")
    if "tau" not in data or "epsilon_bound" not in data:
        raise ValidationError("motion JSON needs 'tau' and 'epsilon_bound'")
    tau = [_complex_from_json(t, "tau entry") for t in data["tau"]]
    eps = data["epsilon_bound"]
    if ("formula" in data) == ("leaves" in data):
        raise ValidationError("motion JSON needs exactly one of 'formula' or 'leaves'")
    if "formula" in data:
        return FormulaMotion(data["formula"], tau, eps,
                             global_flag=bool(data.get("global", True)))
    if "z_samples" in data:
        zs = [_complex_from_json(t, "z sample") for t in data["z_samples"]]
        w = [[_complex_from_json(t, "leaf sample") for t in leaf]
             for leaf in data["leaves"]]
    else:
        # leaves given as [[z, w], ...] pair lists sharing a common z set
        leaves = data["leaves"]
        if not leaves:
            raise ValidationError("empty 'leaves' list")
        zs = [_complex_from_json(pair[0], "z sample") for pair in leaves[0]]
        w = []
        for li, leaf in enumerate(leaves):
            if len(leaf) != len(zs):
                raise ValidationError(f"leaf {li}: inconsistent sample count")
            row = []
            for si, pair in enumerate(leaf):
                zv = _complex_from_json(pair[0], "z sample")
                if abs(zv - zs[si]) > 1e-12:
                    raise ValidationError(
                        f"leaf {li}, sample {si}: z samples must be shared across leaves")
                row.append(_complex_from_json(pair[1], "leaf sample"))
            w.append(row)
    if bool(data.get("global", False)):
        raise ValidationError("sampled motions cannot be global")
    return SampledMotion(tau, zs, np.array(w), eps)


def load_motion_json(path) -> HolomorphicMotion:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from exc
    return motion_from_dict(data)


def current_from_dict(data: dict, fiber_step: float = 0.05) -> LaminarCurrent:
    """Schema: { "motion": {...} | "family": str, "tau": [complex]?,
    "weights": [real], "density": [real]?, "graphs": [{formula, weight}]? }."""
    if not isinstance(data, dict):
        raise ValidationError("current JSON must be an object")
    allowed = {"motion", "family", "tau", "weights", "density", "graphs",
               "integrability_p"}
    unknown = set(data) - allowed
    if unknown:
        raise ValidationError(f"unknown current keys {sorted(unknown)}")
    if "weights" not in data:
        raise ValidationError("current JSON needs 'weights'")
    if ("motion" in data) == ("family" in data):
        raise ValidationError("current JSON needs exactly one of 'motion' or 'family'")
    if "motion" in data:
        motion = motion_from_dict(data["motion"])
    else:
        from .families import motion_by_name
        motion = motion_by_name(data["family"])
    if "tau" in data:
        tau = [_complex_from_json(t, "tau entry") for t in data["tau"]]
        motion = _with_tau(motion, tau)
    lam = Lamination(motion, fiber_step)
    weights = [float(x) for x in data["weights"]]
    graphs = []
    for gi, g in enumerate(data.get("graphs", [])):
        if set(g) - {"formula", "weight", "label"}:
            raise ValidationError(f"graph {gi}: unknown keys")
        ast = expr_parse(g["formula"])
        graphs.append(FreeGraph(
            g=lambda Z, _ast=ast: expr_evaluate(_ast, 0j, Z),
            weight=float(g.get("weight", 1.0)),
            label=g.get("label", g["formula"])))
    if "density" in data:
        dens = [float(x) for x in data["density"]]
        return WeightedCurrent(lam, weights, dens,
                               float(data.get("integrability_p", 2.0)), graphs)
    return LaminarCurrent(lam, weights, graphs)


def _with_tau(motion: HolomorphicMotion, tau) -> HolomorphicMotion:
    if isinstance(motion, FormulaMotion):
        return FormulaMotion(motion.ast, tau, motion.epsilon_bound, motion.global_flag)
    cls = type(motion)
    if hasattr(motion, "fiber_profile"):
        return cls(motion.fiber_profile, tau, motion.epsilon_bound)
    raise ValidationError("cannot re-index this motion with a new transversal")


def load_current_json(path) -> LaminarCurrent:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from exc
    return current_from_dict(data)
