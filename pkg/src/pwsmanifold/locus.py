"""Zero set of psi_n in the (r, z0) half-plane and the revolution manifold it generates."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .averaging import AveragedPoly, eval_dpsi_dr, eval_psi

DEGENERACY_THRESHOLD = 1e-6
ROOT_RESIDUAL = 1e-10
SCAN_POINTS = 512
FOLD_BISECTIONS = 10


class IdenticallyZeroError(ValueError):
    """psi vanishes identically, so no zero is isolated."""


@dataclass(frozen=True)
class LocusPoint:
    z0: float
    r0: float
    dpsi_dr: float
    brouwer_sign: int


@dataclass(frozen=True)
class FoldPoint:
    """Where two branches merge: psi = 0 and d(psi)/dr = 0 simultaneously."""

    z0: float
    r0: float
    dpsi_dr: float
    branches: tuple[int, ...] = ()


@dataclass
class ManifoldClass:
    kind: str
    subtype: str | None = None
    applicable: bool = True
    parameters: dict[str, object] = field(default_factory=dict)
    note: str = ""

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "subtype": self.subtype,
            "applicable": self.applicable,
            "parameters": self.parameters,
            "note": self.note,
        }


@dataclass
class LocusCurve:
    branches: list[list[LocusPoint]]
    classification: ManifoldClass
    folds: list[FoldPoint] = field(default_factory=list)

    def points(self) -> list[tuple[int, LocusPoint]]:
        return [(b, p) for b, branch in enumerate(self.branches) for p in branch]

    def __len__(self) -> int:
        return sum(len(b) for b in self.branches)


# -- polynomial helpers ---------------------------------------------------------

def _trim(c: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(c)
    return c[: nz[-1] + 1] if nz.size else c[:0]


def _p_r(poly: AveragedPoly, r: float, z0: float) -> float:
    """d/dr of psi / r."""
    c = poly.r_coeffs(z0)
    return float(np.polynomial.polynomial.polyval(r, np.polynomial.polynomial.polyder(c))) if c.size > 1 else 0.0


def _p_z(poly: AveragedPoly, r: float, z0: float) -> float:
    n = poly.degree
    acc = 0.0
    for i in range(n):
        for j in range(1, n - i):
            acc += poly.coeffs[i, j] * j * r**i * z0 ** (j - 1)
    return acc


def _p_rr(poly: AveragedPoly, r: float, z0: float) -> float:
    c = poly.r_coeffs(z0)
    return float(np.polynomial.polynomial.polyval(r, np.polynomial.polynomial.polyder(c, 2))) if c.size > 2 else 0.0


def _p_rz(poly: AveragedPoly, r: float, z0: float) -> float:
    n = poly.degree
    acc = 0.0
    for i in range(1, n):
        for j in range(1, n - i):
            acc += poly.coeffs[i, j] * i * j * r ** (i - 1) * z0 ** (j - 1)
    return acc


def cauchy_bound(poly: AveragedPoly, z0: float) -> float:
    """Upper bound on |r| for every root of psi(., z0) / r."""
    c = _trim(poly.r_coeffs(z0))
    if c.size <= 1:
        return 1.0
    return 1.0 + float(np.max(np.abs(c[:-1] / c[-1])))


# -- slices ---------------------------------------------------------------------

def _polish(c: np.ndarray, r: float) -> float:
    dc = np.polynomial.polynomial.polyder(c)
    for _ in range(8):
        d = np.polynomial.polynomial.polyval(r, dc)
        if d == 0.0:
            break
        step = np.polynomial.polynomial.polyval(r, c) / d
        r -= step
        if abs(step) <= 4e-16 * max(1.0, abs(r)):
            break
    return float(r)


def slice_roots(
    poly: AveragedPoly,
    z0: float,
    r_max: float,
    *,
    scan: int = SCAN_POINTS,
    degeneracy: float = DEGENERACY_THRESHOLD,
    residual: float = ROOT_RESIDUAL,
) -> tuple[list[LocusPoint], list[float]]:
    """Nondegenerate zeros in (0, r_max] plus the radii of degenerate ones."""
    if r_max <= 0:
        raise ValueError("r_max must be positive")
    c = _trim(poly.r_coeffs(z0))
    if c.size == 0 or c.size == 1:
        return [], []
    P = np.polynomial.polynomial.Polynomial(c)
    grid = np.linspace(0.0, r_max, scan + 1)
    vals = P(grid)
    found: list[float] = []
    for k in range(scan):
        a, b = grid[k], grid[k + 1]
        fa, fb = vals[k], vals[k + 1]
        if fb == 0.0 and b > 0.0:
            found.append(float(b))
        elif fa * fb < 0.0:
            found.append(brentq(P, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps))
    # Companion-matrix candidates catch root pairs closer than one scan cell.
    for z in P.roots():
        if abs(z.imag) <= 1e-7 * max(1.0, abs(z.real)) and 0.0 < z.real <= r_max:
            found.append(float(z.real))
    found = sorted(_polish(c, r) for r in found)
    roots: list[float] = []
    for r in found:
        if not (0.0 < r <= r_max * (1 + 1e-12)):
            continue
        if roots and abs(r - roots[-1]) <= 1e-9 * max(1.0, r):
            continue
        roots.append(r)
    points: list[LocusPoint] = []
    degenerate: list[float] = []
    n = poly.degree
    for r in roots:
        val = eval_psi(poly, r, z0)
        d = eval_dpsi_dr(poly, r, z0)
        if abs(val) > residual * (1.0 + abs(r) ** n) or abs(d) <= degeneracy:
            degenerate.append(r)
            continue
        points.append(LocusPoint(float(z0), r, float(d), 1 if d > 0 else -1))
    return points, degenerate


def roots_at_slice(poly: AveragedPoly, z0: float, r_max: float, **kwargs) -> list[LocusPoint]:
    return slice_roots(poly, z0, r_max, **kwargs)[0]


# -- tracing --------------------------------------------------------------------

def _solve_fold(poly: AveragedPoly, r: float, z: float, iters: int = 40) -> tuple[float, float] | None:
    """Newton on (P, P_r) = 0 from (r, z)."""
    c = poly.r_coeffs
    for _ in range(iters):
        cz = c(z)
        f1 = float(np.polynomial.polynomial.polyval(r, cz))
        f2 = _p_r(poly, r, z)
        j11, j12 = f2, _p_z(poly, r, z)
        j21, j22 = _p_rr(poly, r, z), _p_rz(poly, r, z)
        det = j11 * j22 - j12 * j21
        if det == 0.0 or not math.isfinite(det):
            return None
        dr = (f1 * j22 - j12 * f2) / det
        dz = (j11 * f2 - j21 * f1) / det
        r -= dr
        z -= dz
        if abs(dr) <= 1e-15 * max(1.0, abs(r)) and abs(dz) <= 1e-15 * max(1.0, abs(z)):
            break
    if not (math.isfinite(r) and math.isfinite(z)):
        return None
    return r, z


def trace_locus(
    poly: AveragedPoly,
    z0_min: float,
    z0_max: float,
    step: float,
    *,
    r_max: float | None = None,
    scan: int = SCAN_POINTS,
    degeneracy: float = DEGENERACY_THRESHOLD,
    residual: float = ROOT_RESIDUAL,
) -> LocusCurve:
    """Slice z0 over [z0_min, z0_max], link roots into branches, refine fold endpoints.

    With ``r_max`` unset each slice is scanned up to its Cauchy root bound.
    """
    if not z0_min < z0_max:
        raise ValueError("need z0_min < z0_max")
    if step <= 0:
        raise ValueError("step must be positive")
    if poly.is_zero():
        raise IdenticallyZeroError("identically-zero psi: no isolated zeros to trace")

    def bound(z):
        return r_max if r_max is not None else cauchy_bound(poly, z)

    def roots(z):
        return slice_roots(poly, z, bound(z), scan=scan, degeneracy=degeneracy, residual=residual)[0]

    count = max(1, math.ceil((z0_max - z0_min) / step - 1e-9))
    zs = np.linspace(z0_min, z0_max, count + 1)
    h = zs[1] - zs[0]

    branches: list[list[LocusPoint]] = []
    active: list[int] = []
    transitions: list[tuple[float, float, list[int]]] = []
    prev_z = None
    for z in zs:
        pts = roots(float(z))
        pairs = []
        for b in active:
            last = branches[b][-1]
            pz = _p_z(poly, last.r0, last.z0)
            pr = last.dpsi_dr / last.r0
            slope = abs(pz / pr) if pr != 0.0 else math.inf
            thr = 5.0 * h * max(1.0, slope)
            for idx, p in enumerate(pts):
                dist = abs(p.r0 - last.r0)
                if dist <= thr:
                    pairs.append((dist, b, idx))
        pairs.sort()
        used_b: set[int] = set()
        used_p: set[int] = set()
        for _, b, idx in pairs:
            if b in used_b or idx in used_p:
                continue
            branches[b].append(pts[idx])
            used_b.add(b)
            used_p.add(idx)
        ended = [b for b in active if b not in used_b]
        started = []
        for idx, p in enumerate(pts):
            if idx not in used_p:
                branches.append([p])
                started.append(len(branches) - 1)
        if prev_z is not None and (ended or started):
            transitions.append((prev_z, float(z), ended + started))
        active = [b for b in active if b in used_b] + started
        prev_z = float(z)

    folds: list[FoldPoint] = []
    for za, zb, touched in transitions:
        na = len(roots(za))
        lo, hi = za, zb
        for _ in range(FOLD_BISECTIONS):
            mid = 0.5 * (lo + hi)
            if len(roots(mid)) == na:
                lo = mid
            else:
                hi = mid
        for b in touched:
            branch = branches[b]
            anchor = branch[-1] if branch[-1].z0 <= za else branch[0]
            zseed = lo if anchor is branch[-1] else hi
            near = [p for p in roots(zseed)]
            if near:
                seed_r = min(near, key=lambda p: abs(p.r0 - anchor.r0)).r0
            else:
                seed_r = anchor.r0
            sol = _solve_fold(poly, seed_r, zseed)
            if sol is None:
                continue
            rf, zf = float(sol[0]), float(sol[1])
            if not (0.0 < rf and za - h <= zf <= zb + h):
                continue
            c = poly.r_coeffs(zf)
            if abs(np.polynomial.polynomial.polyval(rf, c)) > 1e-8 * (1.0 + abs(rf) ** poly.degree):
                continue
            d = float(eval_dpsi_dr(poly, rf, zf))
            for k, f in enumerate(folds):
                if abs(f.z0 - zf) <= 1e-8 * max(1.0, abs(zf)) and abs(f.r0 - rf) <= 1e-6 * max(1.0, rf):
                    if b not in f.branches:
                        folds[k] = FoldPoint(f.z0, f.r0, f.dpsi_dr, f.branches + (b,))
                    break
            else:
                folds.append(FoldPoint(zf, rf, d, (b,)))

    folds.sort(key=lambda f: (f.z0, f.r0))
    return LocusCurve(branches=branches, classification=classify(poly), folds=folds)


# -- classification -------------------------------------------------------------

def classify(poly: AveragedPoly, rel_tol: float = 1e-12) -> ManifoldClass:
    n = poly.degree
    scale = float(np.max(np.abs(poly.coeffs))) if poly.coeffs.size else 0.0
    if scale == 0.0:
        return ManifoldClass("empty", applicable=False, note="identically-zero psi")
    tol = rel_tol * scale
    C = poly.coeff
    if n == 1:
        return ManifoldClass("empty", note="psi = r * const has no zero with r > 0")
    if n == 2:
        c10, c01, c00 = C(1, 0), C(0, 1), C(0, 0)
        if abs(c10) <= tol:
            return ManifoldClass(
                "line-segment", applicable=False,
                parameters={"C10": c10, "C01": c01, "C00": c00},
                note="C10 = 0: the method does not apply",
            )
        # r = slope * z0 + intercept
        return ManifoldClass(
            "line-segment",
            subtype="cone" if c01 != 0.0 and abs(c01) > tol else "cylinder",
            parameters={"slope": -c01 / c10, "intercept": -c00 / c10},
        )
    if n == 3:
        return _classify_conic(C(2, 0), C(1, 1), C(0, 2), C(1, 0), C(0, 1), C(0, 0), scale, rel_tol)
    return ManifoldClass("algebraic-curve", parameters={"degree": n - 1})


def _classify_conic(a, b, c, d, e, f, scale, rel_tol) -> ManifoldClass:
    # a r^2 + b r z + c z^2 + d r + e z + f = 0
    disc = b * b - 4.0 * a * c
    M = np.array([[a, b / 2, d / 2], [b / 2, c, e / 2], [d / 2, e / 2, f]])
    det = float(np.linalg.det(M))
    params: dict[str, object] = {"discriminant": disc, "determinant": det}
    tol = rel_tol * scale
    if max(abs(a), abs(b), abs(c)) <= tol:
        return ManifoldClass("conic", "degenerate", parameters=params, note="no quadratic part")
    if abs(disc) <= rel_tol * scale * scale:
        subtype = "parabola"
    elif disc < 0:
        subtype = "ellipse"
    else:
        subtype = "hyperbola"
    if subtype != "parabola":
        rc, zc = np.linalg.solve(np.array([[2 * a, b], [b, 2 * c]]), -np.array([d, e]))
        params["center"] = [float(rc), float(zc)]
        f_c = f + 0.5 * (d * rc + e * zc)
        params["centered_constant"] = float(f_c)
        if subtype == "ellipse":
            lam = np.linalg.eigvalsh(np.array([[a, b / 2], [b / 2, c]]))
            ratio = -f_c / lam
            if np.all(ratio > 0):
                params["semi_axes"] = [float(v) for v in np.sqrt(ratio)]
            else:
                params["semi_axes"] = []
    if abs(det) <= 1e-10 * scale**3:
        subtype = "degenerate"
    return ManifoldClass("conic", subtype, parameters=params)


# -- revolution -----------------------------------------------------------------

@dataclass
class RevolutionMesh:
    points: np.ndarray  # (N, 3)
    branch: np.ndarray  # (N,)
    ring: np.ndarray  # (N,) index of the locus point within its branch


def revolve(curve: LocusCurve, angular_samples: int) -> RevolutionMesh:
    """Rotate every locus point about the z axis on a uniform theta grid."""
    if angular_samples < 3:
        raise ValueError("angular_samples must be at least 3")
    if len(curve) == 0:
        raise ValueError("cannot revolve an empty locus")
    theta = 2.0 * math.pi * np.arange(angular_samples) / angular_samples
    c, s = np.cos(theta), np.sin(theta)
    pts, br, ring = [], [], []
    for b, branch in enumerate(curve.branches):
        for k, p in enumerate(branch):
            pts.append(np.column_stack([p.r0 * c, p.r0 * s, np.full(angular_samples, p.z0)]))
            br.append(np.full(angular_samples, b))
            ring.append(np.full(angular_samples, k))
    return RevolutionMesh(np.vstack(pts), np.concatenate(br), np.concatenate(ring))
