"""The nonlinearity h on the unit circle and the theta-integrals built from it."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Mapping

import numpy as np

from .quadrature import QUAD_TOL, composite_nodes, gauss_legendre, integrate

PERIODIC_TOL = 1e-9
GRID_PANELS = 4096
PANEL_ORDER = 16

PLUS = "+"
MINUS = "-"
_HALVES = {PLUS: (0.0, math.pi), MINUS: (math.pi, 2.0 * math.pi)}


class NonPeriodicProfileError(ValueError):
    """h integrates to a nonzero value over a full turn, so z(theta) drifts."""


@dataclass(frozen=True)
class CircleProfile:
    """h(cos t, sin t) as a finite sum of coeff * cos^p t * sin^q t.

    ``terms`` is a canonical tuple of ``(p, q, coeff)`` sorted by exponent,
    with duplicates merged and zero coefficients dropped.
    """

    terms: tuple[tuple[int, int, float], ...] = ()

    def __post_init__(self):
        merged: dict[tuple[int, int], float] = {}
        for p, q, c in self.terms:
            if int(p) != p or int(q) != q or p < 0 or q < 0:
                raise ValueError(f"exponents must be non-negative integers, got ({p}, {q})")
            key = (int(p), int(q))
            merged[key] = merged.get(key, 0.0) + float(c)
        canon = tuple((p, q, c) for (p, q), c in sorted(merged.items()) if c != 0.0)
        object.__setattr__(self, "terms", canon)

    @classmethod
    def from_mapping(cls, mapping: Mapping[tuple[int, int], float]) -> "CircleProfile":
        return cls(tuple((p, q, c) for (p, q), c in mapping.items()))

    @classmethod
    def zero(cls) -> "CircleProfile":
        return cls()

    @classmethod
    def cos(cls) -> "CircleProfile":
        return cls(((1, 0, 1.0),))

    @classmethod
    def constant(cls, k: float) -> "CircleProfile":
        return cls(((0, 0, k),))

    def __add__(self, other: "CircleProfile") -> "CircleProfile":
        return CircleProfile(self.terms + other.terms)

    def scaled(self, alpha: float) -> "CircleProfile":
        return CircleProfile(tuple((p, q, alpha * c) for p, q, c in self.terms))

    @cached_property
    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(pq, coeffs) as contiguous int64 / float64 arrays for the kernels."""
        pq = np.array([(p, q) for p, q, _ in self.terms], dtype=np.int64).reshape(-1, 2)
        hc = np.array([c for _, _, c in self.terms], dtype=np.float64)
        return pq, hc

    @cached_property
    def ih_grid(self) -> np.ndarray:
        """I_h at theta_k = 2*pi*k/GRID_PANELS, k = 0..GRID_PANELS."""
        nodes, weights = composite_nodes(0.0, 2.0 * math.pi, GRID_PANELS, PANEL_ORDER)
        vals = (weights * eval_h(self, nodes)).reshape(GRID_PANELS, PANEL_ORDER).sum(axis=1)
        grid = np.empty(GRID_PANELS + 1)
        grid[0] = 0.0
        np.cumsum(vals, out=grid[1:])
        return grid


def eval_h(profile: CircleProfile, theta):
    """h(cos theta, sin theta); scalar in, scalar out; array in, array out."""
    th = np.asarray(theta, dtype=float)
    c = np.cos(th)
    s = np.sin(th)
    out = np.zeros_like(th)
    for p, q, coeff in profile.terms:
        out = out + coeff * c**p * s**q
    return float(out) if out.ndim == 0 else out


def integral_I_h(profile: CircleProfile, theta):
    """I_h(theta) = integral of h(cos s, sin s) over [0, theta].

    Grid value at the panel edge below theta plus a 16-point correction on the
    remainder; I_h(0) is exactly 0.
    """
    th = np.asarray(theta, dtype=float)
    flat = np.atleast_1d(th).ravel()
    grid = profile.ih_grid
    n = grid.size - 1
    period = 2.0 * math.pi
    dth = period / n
    turns = np.floor(flat / period)
    phi = flat - turns * period
    k = np.clip((phi / dth).astype(np.int64), 0, n - 1)
    a = k * dth
    half = 0.5 * (phi - a)
    mid = 0.5 * (phi + a)
    x, w = gauss_legendre(PANEL_ORDER)
    s = mid[:, None] + half[:, None] * x[None, :]
    corr = half * (eval_h(profile, s) @ w)
    out = turns * grid[n] + grid[k] + corr
    out = out.reshape(th.shape)
    return float(out) if out.ndim == 0 else out


def validate_periodic(profile: CircleProfile, tol: float = PERIODIC_TOL) -> bool:
    return abs(integral_I_h(profile, 2.0 * math.pi)) <= tol


def require_periodic(profile: CircleProfile, tol: float = PERIODIC_TOL) -> None:
    full = integral_I_h(profile, 2.0 * math.pi)
    if abs(full) > tol:
        raise NonPeriodicProfileError(
            f"I_h(2*pi) = {full:.3e} exceeds {tol:.1e}; trajectories on the cylinders are not closed"
        )


@lru_cache(maxsize=4096)
def trig_moment(profile: CircleProfile, i: int, j: int, m: int, half: str, tol: float = QUAD_TOL) -> float:
    """Integral of cos^i * sin^j * I_h^m over [0, pi] ("+") or [pi, 2*pi] ("-")."""
    a, b = _HALVES[half]
    if m > 0 and not profile.terms:
        return 0.0

    def f(t):
        val = np.cos(t) ** i * np.sin(t) ** j
        if m:
            val = val * integral_I_h(profile, t) ** m
        return val

    return integrate(f, a, b, tol=tol)


@dataclass(frozen=True)
class CConstantTable:
    c0_10: float
    c0_01: float
    c1_11: float
    c1_12: float
    c1_21: float
    c1_22: float
    c2_10: float
    c2_01: float

    def as_dict(self) -> dict[str, float]:
        return dict(self.__dict__)


def c_constants(profile: CircleProfile, tol: float = QUAD_TOL) -> CConstantTable:
    require_periodic(profile)
    return CConstantTable(
        c0_10=trig_moment(profile, 0, 0, 1, PLUS, tol),
        c0_01=trig_moment(profile, 0, 0, 1, MINUS, tol),
        c1_11=trig_moment(profile, 1, 0, 1, PLUS, tol),
        c1_12=trig_moment(profile, 1, 0, 1, MINUS, tol),
        c1_21=trig_moment(profile, 0, 1, 1, PLUS, tol),
        c1_22=trig_moment(profile, 0, 1, 1, MINUS, tol),
        c2_10=trig_moment(profile, 0, 0, 2, PLUS, tol),
        c2_01=trig_moment(profile, 0, 0, 2, MINUS, tol),
    )


def delta(profile: CircleProfile, n: int, i: int, j: int, tol: float = QUAD_TOL) -> float:
    """Averaged weight of z0^j r^i produced by the "+"-side monomial y^i z^(n-1-i).

    Equals binom(n-1-i, j) * integral over [0, pi] of sin^i * I_h^(n-1-i-j).
    """
    if i < 0 or j < 0 or i + j > n - 1:
        raise IndexError(f"delta index ({i}, {j}) outside 0 <= i + j <= {n - 1}")
    k = n - 1 - i
    return math.comb(k, j) * trig_moment(profile, 0, i, k - j, PLUS, tol)

