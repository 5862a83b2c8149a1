"""Direct simulation of the perturbed piecewise-smooth flow.

Two independent routes:

* the reduced theta-flow ``d(log r)/dtheta = eps * Psi^{+/-}`` with z slaved to
  z0 + I_h(theta) and the switching angle pi handled by splitting the interval;
* the Cartesian flow ``X' = f(X) + eps * g^{+/-}(X)`` with genuine event
  detection on y = 0.

The return map on theta = 0 and its fixed points come from the reduced route.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernels as K
from .averaging import PerturbationSpec
from .locus import DEGENERACY_THRESHOLD, LocusPoint
from .quadrature import gauss_legendre
from .trig import MINUS, PANEL_ORDER, PLUS, CircleProfile, require_periodic

log = logging.getLogger(__name__)

REDUCED_RTOL = 1e-12
REDUCED_ATOL = 1e-14
CART_RTOL = 1e-12
CART_ATOL = 1e-12
GUARD_RADIUS = 1e-6
R_BOUND = 1e6
MAX_STEPS = 200_000
DEFAULT_EPSILONS = (1e-2, 1e-3, 1e-4)

# Order-4 continuous extension of Dormand-Prince 5(4).
DENSE_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])


class IntegrationError(RuntimeError):
    pass


class TangencyError(IntegrationError):
    """Trajectory came within the guard radius of the z axis."""

    def __init__(self, message: str, trajectory: "Trajectory | None" = None):
        super().__init__(message)
        self.trajectory = trajectory


class FixedPointError(RuntimeError):
    pass


class DegeneracyError(ValueError):
    pass


@dataclass(frozen=True)
class CartState:
    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    def to_cyl(self) -> "CylState":
        return CylState(math.hypot(self.x, self.y), math.atan2(self.y, self.x), self.z)


@dataclass(frozen=True)
class CylState:
    r: float
    theta: float
    z: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("r must be positive; the z axis is excluded")

    def to_cart(self) -> CartState:
        return CartState(self.r * math.cos(self.theta), self.r * math.sin(self.theta), self.z)


@dataclass
class SystemSpec:
    profile: CircleProfile
    pert: PerturbationSpec
    epsilon: float
    max_epsilon: float = 1.0

    def __post_init__(self):
        require_periodic(self.profile)
        self.epsilon = float(self.epsilon)
        if not abs(self.epsilon) < self.max_epsilon:
            raise ValueError(f"|epsilon| = {abs(self.epsilon)} is outside the perturbative range (< {self.max_epsilon})")

    def with_epsilon(self, epsilon: float) -> "SystemSpec":
        return SystemSpec(self.profile, self.pert, epsilon, self.max_epsilon)

    @cached_property
    def _arrays(self):
        pq, hc = self.profile.arrays
        glx, glw = gauss_legendre(PANEL_ORDER)
        return {
            PLUS: self.pert.side_arrays(PLUS),
            MINUS: self.pert.side_arrays(MINUS),
            "pq": pq,
            "hc": hc,
            "grid": np.ascontiguousarray(self.profile.ih_grid),
            "glx": np.ascontiguousarray(glx),
            "glw": np.ascontiguousarray(glw),
        }


# -- reduced theta-flow ---------------------------------------------------------

def log_increment(spec: SystemSpec, r: float, z0: float, *, rtol: float = REDUCED_RTOL,
                  atol: float = REDUCED_ATOL, r_bound: float = R_BOUND) -> float:
    """log(r(2*pi) / r) along the reduced flow started at (r, z0)."""
    if not r > 0:
        raise ValueError("r must be positive")
    if spec.epsilon == 0.0:
        return 0.0
    arr = spec._arrays
    total = 0.0
    for side, (a, b) in ((PLUS, (0.0, math.pi)), (MINUS, (math.pi, 2.0 * math.pi))):
        exps, coeffs = arr[side]
        r_here = r * math.exp(total)
        u, status, _ = K.reduced_log_increment(
            r_here, z0, spec.epsilon, a, b, exps, coeffs, arr["grid"], arr["pq"], arr["hc"],
            arr["glx"], arr["glw"], rtol, atol, MAX_STEPS,
            math.log(1e-300 / r_here) if r_here > 1e-300 else -1.0, math.log(r_bound / r_here),
        )
        if status == K.STATUS_BOUND:
            raise IntegrationError(f"r left (0, {r_bound:g}) while integrating side {side}")
        if status != K.STATUS_OK:
            raise IntegrationError(f"reduced flow failed on side {side} (status {status})")
        total += u
    return total


def reduced_flow(spec: SystemSpec, r_start: float, z0: float, **kwargs) -> float:
    """r(2*pi) of dr/dtheta = eps * r * Psi^{+/-}(r cos, r sin, z0 + I_h)."""
    return r_start * math.exp(log_increment(spec, r_start, z0, **kwargs))


def return_displacement(spec: SystemSpec, r: float, z0: float, **kwargs) -> float:
    """P(r) - r, computed without cancellation."""
    return r * math.expm1(log_increment(spec, r, z0, **kwargs))


def poincare_map(spec: SystemSpec, r: float, z0: float, **kwargs) -> tuple[float, float]:
    # z returns to z0 exactly because I_h(2*pi) = 0 on a periodic profile.
    return reduced_flow(spec, r, z0, **kwargs), z0


def find_fixed_point(spec: SystemSpec, z0: float, r_guess: float, *, r_bound: float = R_BOUND,
                     max_iter: int = 50, **kwargs) -> float:
    """Secant iteration on P(r) - r = 0 seeded at r_guess and r_guess * (1 + 1e-3)."""
    if not r_guess > 0:
        raise ValueError("r_guess must be positive")
    if spec.epsilon == 0.0:
        raise FixedPointError("epsilon = 0: the return map is the identity, every r is fixed")
    r0, r1 = r_guess, r_guess * (1.0 + 1e-3)
    d0 = return_displacement(spec, r0, z0, **kwargs)
    if abs(d0) <= 1e-12 * max(1.0, r0):
        return r0
    d1 = return_displacement(spec, r1, z0, **kwargs)
    for _ in range(max_iter):
        if abs(d1) <= 1e-12 * max(1.0, r1):
            return r1
        if d1 == d0:
            raise FixedPointError(f"secant stalled at r = {r1!r} (flat displacement)")
        r2 = r1 - d1 * (r1 - r0) / (d1 - d0)
        if not (0.0 < r2 < r_bound):
            raise FixedPointError(f"secant iterate {r2!r} left (0, {r_bound:g})")
        r0, d0 = r1, d1
        r1 = r2
        d1 = return_displacement(spec, r1, z0, **kwargs)
    raise FixedPointError(f"no convergence in {max_iter} secant iterations (last r = {r1!r})")


def return_map_derivative(spec: SystemSpec, r: float, z0: float, rel_step: float = 1e-4, **kwargs) -> float:
    """P'(r) by central differences of the displacement."""
    h = rel_step * r
    dp = return_displacement(spec, r + h, z0, **kwargs)
    dm = return_displacement(spec, r - h, z0, **kwargs)
    return 1.0 + (dp - dm) / (2.0 * h)


@dataclass
class VerificationReport:
    z0: float
    predicted_r0: float
    epsilons: list[float]
    fixed_points: list[float | None]
    errors: list[float | None]
    convergence_order: float | None
    multipliers: list[float | None] = field(default_factory=list)
    brouwer_sign: int = 0
    failures: dict[str, str] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "z0": self.z0,
            "predicted_r0": self.predicted_r0,
            "brouwer_sign": self.brouwer_sign,
            "convergence_order": self.convergence_order,
            "records": [
                {"epsilon": e, "fixed_point": fp, "error": err, "multiplier": mu}
                for e, fp, err, mu in zip(self.epsilons, self.fixed_points, self.errors, self.multipliers)
            ],
            "failures": self.failures,
        }


def verify_prediction(profile: CircleProfile, pert: PerturbationSpec, point: LocusPoint,
                      epsilons=DEFAULT_EPSILONS, *, degeneracy: float = DEGENERACY_THRESHOLD,
                      **kwargs) -> VerificationReport:
    """Fixed points of the return map for each eps versus the averaged zero r0(z0)."""
    if abs(point.dpsi_dr) <= degeneracy:
        raise DegeneracyError(
            f"locus point (r0={point.r0}, z0={point.z0}) is degenerate: |dpsi/dr| = {abs(point.dpsi_dr):.3e}"
        )
    eps = [float(e) for e in epsilons]
    if any(e == 0.0 for e in eps):
        raise ValueError("epsilons must be nonzero")
    if any(abs(a) < abs(b) for a, b in zip(eps, eps[1:])):
        raise ValueError("epsilons must be sorted by decreasing magnitude")
    fixed: list[float | None] = []
    errors: list[float | None] = []
    mults: list[float | None] = []
    failures: dict[str, str] = {}
    for e in eps:
        spec = SystemSpec(profile, pert, e)
        try:
            r_star = find_fixed_point(spec, point.z0, point.r0, **kwargs)
            mu = return_map_derivative(spec, r_star, point.z0)
        except (FixedPointError, IntegrationError) as exc:
            log.warning("eps=%g: %s", e, exc)
            failures[repr(e)] = str(exc)
            fixed.append(None)
            errors.append(None)
            mults.append(None)
            continue
        fixed.append(r_star)
        errors.append(abs(r_star - point.r0))
        mults.append(mu)
    ok = [(abs(e), err) for e, err in zip(eps, errors) if err is not None and err > 0.0]
    order = None
    if len(ok) >= 2:
        x = np.log([a for a, _ in ok])
        y = np.log([b for _, b in ok])
        order = float(np.polyfit(x, y, 1)[0])
    return VerificationReport(point.z0, point.r0, eps, fixed, errors, order, mults, point.brouwer_sign, failures)


# -- Cartesian flow with switching ----------------------------------------------

@dataclass
class CrossingEvent:
    t: float
    x: float
    y: float
    z: float
    from_side: int
    to_side: int
    ydot_plus: float
    ydot_minus: float

    @property
    def is_crossing(self) -> bool:
        return self.ydot_plus * self.ydot_minus > 0.0


@dataclass
class Trajectory:
    t: np.ndarray
    states: np.ndarray
    side: np.ndarray
    is_event: np.ndarray
    events: list[CrossingEvent]
    crossing_violations: int = 0

    @property
    def final(self) -> CartState:
        x, y, z = self.states[-1]
        return CartState(float(x), float(y), float(z))


def _dense_y(K_stages: np.ndarray, y_old: float, h: float, sigma: float) -> float:
    q = K_stages[:, 1] @ DENSE_P
    return y_old + h * sigma * (q[0] + sigma * (q[1] + sigma * (q[2] + sigma * q[3])))


def cartesian_flow(spec: SystemSpec, start: CartState, t_end: float, *, rtol: float = CART_RTOL,
                   atol: float = CART_ATOL, guard: float = GUARD_RADIUS, max_step: float | None = None,
                   max_steps: int = MAX_STEPS) -> Trajectory:
    """Integrate X' = f + eps*g^{sign y} over [0, t_end] with crossings located on y = 0."""
    arr = spec._arrays
    pq, hc = arr["pq"], arr["hc"]
    fields = {1: arr[PLUS], -1: arr[MINUS]}
    eps = spec.epsilon
    X = start.as_array()
    if math.hypot(X[0], X[1]) <= guard:
        raise TangencyError("start lies within the guard radius of the z axis")
    if X[1] > 0:
        side = 1
    elif X[1] < 0:
        side = -1
    else:
        side = 1 if X[0] > 0 else -1

    t = 0.0
    ts, xs, sides, flags = [t], [X.copy()], [side], [False]
    events: list[CrossingEvent] = []
    violations = 0
    Kst = np.empty((7, 3))
    h = min(0.1, t_end / 10.0) if t_end > 0 else 0.0
    hmax = max_step if max_step is not None else math.inf
    t_snap = 1e-13 * max(1.0, abs(t_end))
    steps = 0

    def traj():
        return Trajectory(np.array(ts), np.array(xs), np.array(sides), np.array(flags), events, violations)

    while t_end - t > t_snap:
        if steps >= max_steps:
            raise IntegrationError(f"step budget exhausted at t = {t}")
        h = min(h, hmax, t_end - t)
        exps, coeffs = fields[side]
        Xn, err = K.cart_step(X, h, eps, exps, coeffs, pq, hc, Kst)
        scale = atol + rtol * np.maximum(np.abs(X), np.abs(Xn))
        errnorm = float(np.max(np.abs(err) / scale))
        if not errnorm <= 1.0:
            h *= max(K.MIN_FACTOR, K.SAFETY * errnorm ** -0.2) if math.isfinite(errnorm) else K.MIN_FACTOR
            if h <= 1e-15 * max(1.0, t):
                raise IntegrationError(f"step size underflow at t = {t}")
            continue
        steps += 1
        factor = K.MAX_FACTOR if errnorm == 0.0 else min(K.MAX_FACTOR, K.SAFETY * errnorm ** -0.2)
        yn = side * Xn[1]
        ytol = 1e-12 * max(1.0, abs(X[0]))
        if yn < 0.0 or (yn <= ytol and t + h >= t_end - t_snap):
            # Switching plane reached inside (t, t + h]: bisect the interpolant.
            if yn < 0.0:
                lo, hi = 0.0, 1.0
                while (hi - lo) * h > 1e-12 * max(1.0, t + h):
                    mid = 0.5 * (lo + hi)
                    if side * _dense_y(Kst, X[1], h, mid) > 0.0:
                        lo = mid
                    else:
                        hi = mid
                tau = 0.5 * (lo + hi) * h
            else:
                tau = h
            Kev = np.empty((7, 3))
            Xe, _ = K.cart_step(X, tau, eps, exps, coeffs, pq, hc, Kev)
            for _ in range(2):
                ydot = Xe[0] + eps * Xe[1] * K.poly3(Xe[0], Xe[1], Xe[2], exps, coeffs)
                if ydot == 0.0:
                    break
                tau -= Xe[1] / ydot
                Xe, _ = K.cart_step(X, tau, eps, exps, coeffs, pq, hc, Kev)
            t_ev = t + tau
            rho = math.hypot(Xe[0], Xe[1])
            ydp = Xe[0] + eps * Xe[1] * K.poly3(Xe[0], Xe[1], Xe[2], *fields[1])
            ydm = Xe[0] + eps * Xe[1] * K.poly3(Xe[0], Xe[1], Xe[2], *fields[-1])
            ev = CrossingEvent(float(t_ev), float(Xe[0]), float(Xe[1]), float(Xe[2]), side, -side, float(ydp), float(ydm))
            if abs(Xe[0]) <= guard or rho <= guard:
                ts.append(t_ev); xs.append(Xe.copy()); sides.append(0); flags.append(True)
                events.append(ev)
                raise TangencyError(f"tangency with the z axis at t = {t_ev}", traj())
            if not ev.is_crossing:
                violations += 1
                log.warning("non-crossing contact with y = 0 at t = %.17g", t_ev)
            events.append(ev)
            side = -side
            t, X = t_ev, Xe
            ts.append(t); xs.append(X.copy()); sides.append(0); flags.append(True)
            h = max(h * factor, 1e-3)
            continue
        t += h
        X = Xn
        if math.hypot(X[0], X[1]) <= guard:
            ts.append(t); xs.append(X.copy()); sides.append(side); flags.append(False)
            raise TangencyError(f"entered the guard radius of the z axis at t = {t}", traj())
        ts.append(t); xs.append(X.copy()); sides.append(side); flags.append(False)
        h *= factor
    return traj()


def one_revolution_radius(spec: SystemSpec, r: float, z0: float, **kwargs) -> float:
    """hypot(x, y) after t = 2*pi from (r, 0, z0); theta' = 1 exactly for radial perturbations."""
    traj = cartesian_flow(spec, CartState(r, 0.0, z0), 2.0 * math.pi, **kwargs)
    x, y, _ = traj.states[-1]
    return math.hypot(x, y)
