"""Command-line front end: ``pwsmanifold <averaged|locus|realize|simulate|verify> --config FILE``."""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from . import io
from .averaging import AveragedPoly, PerturbationSpec, averaged_closed_form, averaged_generic, eval_psi
from .locus import (
    DEGENERACY_THRESHOLD,
    ROOT_RESIDUAL,
    IdenticallyZeroError,
    cauchy_bound,
    revolve,
    slice_roots,
    trace_locus,
)
from .quadrature import QUAD_TOL, integrate
from .realization import realize_roundtrip_check
from .simulator import (
    DEFAULT_EPSILONS,
    CartState,
    IntegrationError,
    SystemSpec,
    TangencyError,
    cartesian_flow,
    verify_prediction,
)
from .trig import CircleProfile, NonPeriodicProfileError, integral_I_h

log = logging.getLogger("pwsmanifold")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NOT_APPLICABLE = 3
EXIT_DEGENERATE = 4
EXIT_INTEGRATION = 5

BUNDLED = ("example1", "example2")


@dataclass
class RunConfig:
    command: str
    raw: dict[str, Any]
    profile: CircleProfile
    out: Path
    pert: PerturbationSpec | None = None
    target: AveragedPoly | None = None
    tol_quadrature: float = QUAD_TOL
    tol_root: float = ROOT_RESIDUAL
    degeneracy: float = DEGENERACY_THRESHOLD
    seed: int = 0
    params: dict[str, Any] = field(default_factory=dict)


def _load_text(spec: str) -> tuple[str, str]:
    path = Path(spec)
    if path.exists():
        return path.read_text(), str(path)
    name = path.stem if path.suffix == ".json" else spec
    if name in BUNDLED:
        res = resources.files("pwsmanifold.configs").joinpath(f"{name}.json")
        return res.read_text(), f"<bundled {name}.json>"
    raise io.ConfigError(f"{spec}: no such file (bundled configs: {', '.join(BUNDLED)})")


def load_config(args: argparse.Namespace) -> RunConfig:
    text, label = _load_text(args.config)
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise io.ConfigError(f"{label}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise io.ConfigError(f"{label}: top level must be an object")
    variant = args.variant or raw.get("default_variant")
    if variant:
        variants = raw.get("variants", {})
        if variant not in variants:
            raise io.ConfigError(f"{label}: unknown variant {variant!r} (have: {', '.join(variants) or 'none'})")
        raw = {**raw, **{k: v for k, v in variants[variant].items() if k != "note"}}
    tols = raw.get("tolerances", {})
    cfg = RunConfig(
        command=args.command,
        raw=raw,
        profile=io.profile_from_json(raw.get("profile", {"preset": "zero"})),
        out=Path(args.out),
        tol_quadrature=args.tol_quadrature or io.number(tols.get("quadrature", QUAD_TOL), "tolerances.quadrature"),
        tol_root=args.tol_root or io.number(tols.get("root", ROOT_RESIDUAL), "tolerances.root"),
        degeneracy=args.degeneracy_threshold
        or io.number(tols.get("degeneracy", DEGENERACY_THRESHOLD), "tolerances.degeneracy"),
        seed=args.seed if args.seed is not None else int(raw.get("seed", 0)),
    )
    for name in ("tol_quadrature", "tol_root", "degeneracy"):
        if not getattr(cfg, name) > 0:
            raise io.ConfigError(f"{label}: tolerance {name} must be positive")
    if args.command == "realize":
        if "target" not in raw:
            raise io.ConfigError(f"{label}: 'realize' needs a 'target' polynomial")
        cfg.target = io.poly_from_json(raw["target"])
    else:
        if "perturbation" not in raw:
            raise io.ConfigError(f"{label}: '{args.command}' needs a 'perturbation'")
        cfg.pert = io.perturbation_from_json(raw["perturbation"])
    cfg.params = dict(raw.get(args.command, {}))
    if args.command == "verify":
        cfg.params.setdefault("locus", raw.get("locus", {}))
    return cfg


def _direct_psi(pert: PerturbationSpec, profile: CircleProfile, r: float, z0: float, tol: float) -> float:
    def side(which):
        def f(t):
            # + 0*t keeps constant-only sides array-valued
            return pert.psi(which, r * np.cos(t), r * np.sin(t), z0 + integral_I_h(profile, t)) + 0.0 * t
        return f

    return r * (integrate(side("+"), 0.0, math.pi, tol=tol) + integrate(side("-"), math.pi, 2 * math.pi, tol=tol))


# -- commands --------------------------------------------------------------------

def cmd_averaged(cfg: RunConfig) -> int:
    poly = averaged_generic(cfg.pert, cfg.profile, cfg.tol_quadrature)
    doc = io.poly_to_json(poly)
    diag: dict[str, Any] = {"route": "generic"}
    if poly.degree in (2, 3):
        closed = averaged_closed_form(cfg.pert, cfg.profile, cfg.tol_quadrature)
        diag["closed_form"] = io.poly_to_json(closed)
        diag["dual_path_max_deviation"] = poly.max_abs_diff(closed)
    rng = np.random.default_rng(cfg.seed)
    samples = int(cfg.params.get("spot_checks", 5))
    worst = 0.0
    for _ in range(samples):
        r, z0 = float(rng.uniform(0.1, 3.0)), float(rng.uniform(-3.0, 3.0))
        worst = max(worst, abs(eval_psi(poly, r, z0) - _direct_psi(cfg.pert, cfg.profile, r, z0, cfg.tol_quadrature)))
    diag["direct_quadrature_max_deviation"] = worst
    diag["spot_checks"] = samples
    doc["diagnostics"] = diag
    io.write_json(cfg.out / "averaged.json", doc)
    print(f"psi_{poly.degree}: " + ", ".join(f"C{i}{j}={c:.12g}" for i, j, c in poly.items()))
    if "dual_path_max_deviation" in diag:
        print(f"dual-path max deviation: {diag['dual_path_max_deviation']:.3e}")
    return EXIT_OK


def _poly_of(cfg: RunConfig) -> AveragedPoly:
    return averaged_generic(cfg.pert, cfg.profile, cfg.tol_quadrature)


def cmd_locus(cfg: RunConfig) -> int:
    poly = _poly_of(cfg)
    p = cfg.params
    try:
        curve = trace_locus(
            poly,
            io.number(p.get("z0_min", -5.0), "locus.z0_min"),
            io.number(p.get("z0_max", 5.0), "locus.z0_max"),
            io.number(p.get("step", 0.05), "locus.step"),
            r_max=io.number(p["r_max"], "locus.r_max") if "r_max" in p else None,
            degeneracy=cfg.degeneracy,
            residual=cfg.tol_root,
        )
    except IdenticallyZeroError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_NOT_APPLICABLE
    io.write_json(cfg.out / "manifold.json", io.manifold_to_json(curve.classification))
    io.write_json(cfg.out / "locus.json", io.locus_to_json(curve))
    io.write_locus_csv(cfg.out / "locus.csv", curve)
    cls = curve.classification
    print(f"classification: {cls.kind}" + (f" ({cls.subtype})" if cls.subtype else ""))
    print(f"branches: {len(curve.branches)}, points: {len(curve)}, folds: {len(curve.folds)}")
    if not cls.applicable:
        print(f"method does not apply: {cls.note}", file=sys.stderr)
        return EXIT_NOT_APPLICABLE
    samples = int(p.get("angular_samples", 48))
    if samples and len(curve):
        io.write_mesh_csv(cfg.out / "mesh.csv", revolve(curve, samples))
    return EXIT_OK


def cmd_realize(cfg: RunConfig) -> int:
    rep = realize_roundtrip_check(cfg.target, cfg.profile, cfg.tol_quadrature)
    io.write_json(cfg.out / "realization.json", {
        "perturbation": io.perturbation_to_json(rep.perturbation),
        "residual": {"max_deviation": rep.max_deviation, "achieved": io.poly_to_json(rep.achieved)},
    })
    print(f"realized degree-{rep.perturbation.degree} perturbation; max coefficient deviation {rep.max_deviation:.3e}")
    return EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    p = cfg.params
    eps = io.number(p.get("epsilon", 0.0), "simulate.epsilon")
    start = p.get("start", [1.0, 0.0, 0.0])
    if not (isinstance(start, list) and len(start) == 3):
        raise io.ConfigError("simulate.start: expected [x, y, z]")
    x, y, z = (io.number(v, f"simulate.start[{n}]") for n, v in enumerate(start))
    spec = SystemSpec(cfg.profile, cfg.pert, eps)
    kwargs = {}
    for key in ("rtol", "atol", "max_step"):
        if key in p:
            kwargs[key] = io.number(p[key], f"simulate.{key}")
    t_end = io.number(p.get("t_end", 2 * math.pi), "simulate.t_end")
    try:
        traj = cartesian_flow(spec, CartState(x, y, z), t_end, **kwargs)
    except TangencyError as exc:
        if exc.trajectory is not None:
            io.write_trajectory_csv(cfg.out / "trajectory.csv", exc.trajectory)
        print(f"integration halted: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    io.write_trajectory_csv(cfg.out / "trajectory.csv", traj)
    fx, fy, fz = traj.states[-1]
    print(f"t_end={t_end:.17g} final=({fx:.17g}, {fy:.17g}, {fz:.17g}) crossings={len(traj.events)}")
    if traj.crossing_violations:
        print(f"{traj.crossing_violations} non-crossing contacts with y = 0", file=sys.stderr)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    poly = _poly_of(cfg)
    p = cfg.params
    eps = [io.number(e, "verify.epsilons") for e in p.get("epsilons", DEFAULT_EPSILONS)]
    z_list = p.get("z0")
    if z_list is None:
        raise io.ConfigError("verify.z0: list of z0 slices to verify is required")
    r_max = p.get("r_max", p.get("locus", {}).get("r_max"))
    reports = []
    degenerate_only = []
    for z in sorted(io.number(v, "verify.z0") for v in z_list):
        bound = io.number(r_max, "verify.r_max") if r_max is not None else cauchy_bound(poly, z)
        pts, degen = slice_roots(poly, z, bound, degeneracy=cfg.degeneracy, residual=cfg.tol_root)
        if not pts:
            degenerate_only.append(z)
            continue
        for pt in pts:
            reports.append(verify_prediction(cfg.profile, cfg.pert, pt, eps, degeneracy=cfg.degeneracy))
    reports.sort(key=lambda r: (r.z0, r.predicted_r0))
    io.write_json(cfg.out / "verification.json", {
        "epsilons": eps,
        "reports": [r.to_json() for r in reports],
        "without_nondegenerate_zero": degenerate_only,
    })
    for r in reports:
        errs = ", ".join("fail" if e is None else f"{e:.3e}" for e in r.errors)
        order = "n/a" if r.convergence_order is None else f"{r.convergence_order:.3f}"
        print(f"z0={r.z0:+.6g} r0={r.predicted_r0:.12g} errors=[{errs}] order={order}")
    if degenerate_only:
        print(f"no nondegenerate zero at z0 = {degenerate_only}", file=sys.stderr)
        return EXIT_DEGENERATE
    if any(r.failures for r in reports):
        return EXIT_INTEGRATION
    return EXIT_OK


COMMANDS = {
    "averaged": cmd_averaged,
    "locus": cmd_locus,
    "realize": cmd_realize,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON config file, or a bundled name: example1, example2")
    common.add_argument("--out", default=".", help="output directory (created if missing)")
    common.add_argument("--variant", default=None, help="named variant inside the config")
    common.add_argument("--tol-quadrature", type=float, default=None)
    common.add_argument("--tol-root", type=float, default=None)
    common.add_argument("--degeneracy-threshold", type=float, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("-v", "--verbose", action="store_true")
    parser = argparse.ArgumentParser(prog="pwsmanifold", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "averaged": "averaged polynomial psi_n (generic route, plus closed form for n = 2, 3)",
        "locus": "trace and classify psi_n^{-1}(0); write the revolution mesh",
        "realize": "perturbation realizing a target polynomial",
        "simulate": "Cartesian simulation with switching on y = 0",
        "verify": "return-map fixed points versus averaging predictions",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args)
        cfg.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg)
    except (io.ConfigError, NonPeriodicProfileError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationError as exc:
        print(f"integration failure: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
