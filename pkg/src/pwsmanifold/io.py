"""JSON/CSV encodings of profiles, perturbations, polynomials, loci and trajectories."""
from __future__ import annotations

import ast
import csv
import json
import math
import operator
from pathlib import Path
from typing import Any

from .averaging import AveragedPoly, PerturbationSpec
from .locus import LocusCurve, ManifoldClass, RevolutionMesh
from .simulator import Trajectory
from .trig import CircleProfile


class ConfigError(ValueError):
    pass


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNOPS = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_NAMES = {"pi": math.pi}


def number(value: Any, where: str = "value") -> float:
    """A float from a JSON number or a small arithmetic string such as "-1/pi"."""
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a number, got a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(_eval(ast.parse(value, mode="eval").body))
        except (SyntaxError, ValueError, ZeroDivisionError, KeyError) as exc:
            raise ConfigError(f"{where}: cannot read {value!r} as a number ({exc})") from None
    raise ConfigError(f"{where}: expected a number, got {type(value).__name__}")


def _eval(node):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return node.value
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval(node.left), _eval(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
        return _UNOPS[type(node.op)](_eval(node.operand))
    raise ValueError("only numbers, pi and + - * / ** are allowed")


def _index(entry: dict, key: str, where: str) -> int:
    if key not in entry:
        raise ConfigError(f"{where}: missing key {key!r}")
    v = entry[key]
    if isinstance(v, bool) or not isinstance(v, int) or v < 0:
        raise ConfigError(f"{where}.{key}: expected a non-negative integer, got {v!r}")
    return v


# -- profile ---------------------------------------------------------------------

def profile_from_json(obj: dict, where: str = "profile") -> CircleProfile:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object")
    if "preset" in obj:
        name = obj["preset"]
        if name == "cos":
            return CircleProfile.cos()
        if name == "zero":
            return CircleProfile.zero()
        raise ConfigError(f"{where}.preset: unknown preset {name!r} (known: 'cos', 'zero')")
    terms = obj.get("terms")
    if not isinstance(terms, list):
        raise ConfigError(f"{where}: need 'terms' list or 'preset'")
    out = []
    for n, t in enumerate(terms):
        w = f"{where}.terms[{n}]"
        if not isinstance(t, dict):
            raise ConfigError(f"{w}: expected an object")
        out.append((_index(t, "cos", w), _index(t, "sin", w), number(t.get("coeff"), f"{w}.coeff")))
    return CircleProfile(tuple(out))


def profile_to_json(profile: CircleProfile) -> dict:
    return {"terms": [{"cos": p, "sin": q, "coeff": c} for p, q, c in profile.terms]}


# -- perturbation ----------------------------------------------------------------

def perturbation_from_json(obj: dict, where: str = "perturbation") -> PerturbationSpec:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object")
    if "degree" not in obj:
        raise ConfigError(f"{where}: missing 'degree'")
    sides = {}
    for side in ("plus", "minus"):
        items = obj.get(side, [])
        if not isinstance(items, list):
            raise ConfigError(f"{where}.{side}: expected a list")
        coeffs: dict[tuple[int, int, int], float] = {}
        for n, e in enumerate(items):
            w = f"{where}.{side}[{n}]"
            if not isinstance(e, dict):
                raise ConfigError(f"{w}: expected an object")
            key = (_index(e, "i", w), _index(e, "j", w), _index(e, "k", w))
            coeffs[key] = coeffs.get(key, 0.0) + number(e.get("a"), f"{w}.a")
        sides[side] = coeffs
    try:
        return PerturbationSpec(obj["degree"], sides["plus"], sides["minus"])
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def perturbation_to_json(pert: PerturbationSpec) -> dict:
    def side(d):
        return [{"i": i, "j": j, "k": k, "a": a} for (i, j, k), a in sorted(d.items())]

    return {"degree": pert.degree, "plus": side(pert.plus), "minus": side(pert.minus)}


# -- averaged polynomial ---------------------------------------------------------

def poly_from_json(obj: dict, where: str = "target") -> AveragedPoly:
    if not isinstance(obj, dict) or "degree" not in obj:
        raise ConfigError(f"{where}: expected an object with 'degree'")
    mapping: dict[tuple[int, int], float] = {}
    for n, e in enumerate(obj.get("coeffs", [])):
        w = f"{where}.coeffs[{n}]"
        key = (_index(e, "i", w), _index(e, "j", w))
        mapping[key] = mapping.get(key, 0.0) + number(e.get("C"), f"{w}.C")
    try:
        return AveragedPoly.from_mapping(int(obj["degree"]), mapping)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def poly_to_json(poly: AveragedPoly) -> dict:
    return {"degree": poly.degree, "coeffs": [{"i": i, "j": j, "C": c} for i, j, c in poly.items()]}


# -- files -----------------------------------------------------------------------

def fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_json(path: Path, obj: Any) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=False, allow_nan=True) + "\n")


def locus_to_json(curve: LocusCurve) -> dict:
    return {
        "classification": curve.classification.to_json(),
        "branches": [
            [{"z0": p.z0, "r0": p.r0, "dpsi_dr": p.dpsi_dr, "sign": p.brouwer_sign} for p in branch]
            for branch in curve.branches
        ],
        "folds": [{"z0": f.z0, "r0": f.r0, "dpsi_dr": f.dpsi_dr, "branches": list(f.branches)} for f in curve.folds],
    }


def manifold_to_json(cls: ManifoldClass) -> dict:
    return cls.to_json()


def write_locus_csv(path: Path, curve: LocusCurve) -> None:
    rows = sorted(curve.points(), key=lambda bp: (bp[1].z0, bp[1].r0))
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["z0", "r0", "dpsi_dr", "sign", "branch"])
        for b, p in rows:
            w.writerow([fmt(p.z0), fmt(p.r0), fmt(p.dpsi_dr), p.brouwer_sign, b])


def write_mesh_csv(path: Path, mesh: RevolutionMesh) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "z", "branch"])
        for (x, y, z), b in zip(mesh.points, mesh.branch):
            w.writerow([fmt(x), fmt(y), fmt(z), int(b)])


def write_trajectory_csv(path: Path, traj: Trajectory) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "x", "y", "z", "side", "event"])
        for t, (x, y, z), s, e in zip(traj.t, traj.states, traj.side, traj.is_event):
            w.writerow([fmt(t), fmt(x), fmt(y), fmt(z), int(s), int(bool(e))])


def read_locus_csv(path: Path) -> list[dict[str, float]]:
    with path.open() as fh:
        return [
            {"z0": float(r["z0"]), "r0": float(r["r0"]), "dpsi_dr": float(r["dpsi_dr"]),
             "sign": int(r["sign"]), "branch": int(r["branch"])}
            for r in csv.DictReader(fh)
        ]
