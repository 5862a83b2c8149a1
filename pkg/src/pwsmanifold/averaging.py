"""First-order averaged function psi_n(r, z0) of a radial-cylindrical perturbation.

Two independent routes build the same coefficient grid: ``averaged_generic``
expands every monomial of Psi^{+/-} against the trig/I_h moments (any degree),
and ``averaged_closed_form`` plugs the c-constants into the explicit degree-2
and degree-3 coefficient formulas.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .quadrature import QUAD_TOL
from .trig import MINUS, PLUS, CircleProfile, c_constants, require_periodic, trig_moment

Key3 = tuple[int, int, int]


class UnsupportedDegreeError(ValueError):
    pass


def _clean_side(coeffs: Mapping[Key3, float], degree: int, label: str) -> dict[Key3, float]:
    out: dict[Key3, float] = {}
    for key, a in coeffs.items():
        i, j, k = (int(v) for v in key)
        if min(i, j, k) < 0 or i + j + k > degree - 1:
            raise ValueError(
                f"{label} coefficient a_{i}{j}{k} violates 0 <= i+j+k <= {degree - 1} for degree {degree}"
            )
        out[(i, j, k)] = out.get((i, j, k), 0.0) + float(a)
    return out


@dataclass
class PerturbationSpec:
    """Coefficients a^{+/-}_{ijk} of Psi^{+/-}(x, y, z) = sum a x^i y^j z^k."""

    degree: int
    plus: dict[Key3, float] = field(default_factory=dict)
    minus: dict[Key3, float] = field(default_factory=dict)

    def __post_init__(self):
        if int(self.degree) != self.degree or self.degree < 1:
            raise ValueError(f"degree must be a positive integer, got {self.degree!r}")
        self.degree = int(self.degree)
        self.plus = _clean_side(self.plus, self.degree, "plus")
        self.minus = _clean_side(self.minus, self.degree, "minus")

    def side(self, which: str) -> dict[Key3, float]:
        return self.plus if which == PLUS else self.minus

    def side_arrays(self, which: str) -> tuple[np.ndarray, np.ndarray]:
        items = sorted(self.side(which).items())
        exps = np.array([k for k, _ in items], dtype=np.int64).reshape(-1, 3)
        coeffs = np.array([a for _, a in items], dtype=np.float64)
        return exps, coeffs

    def psi(self, which: str, x, y, z):
        """Psi^{+} or Psi^{-} at (x, y, z); broadcasts over arrays."""
        out = 0.0
        for (i, j, k), a in self.side(which).items():
            out = out + a * x**i * y**j * z**k
        return out

    def combine(self, other: "PerturbationSpec", alpha: float = 1.0) -> "PerturbationSpec":
        """self + alpha * other, at the larger of the two degrees."""
        plus = dict(self.plus)
        minus = dict(self.minus)
        for src, dst in ((other.plus, plus), (other.minus, minus)):
            for key, a in src.items():
                dst[key] = dst.get(key, 0.0) + alpha * a
        return PerturbationSpec(max(self.degree, other.degree), plus, minus)

    def scaled(self, alpha: float) -> "PerturbationSpec":
        return PerturbationSpec(
            self.degree,
            {k: alpha * a for k, a in self.plus.items()},
            {k: alpha * a for k, a in self.minus.items()},
        )

    def coeff(self, which: str, i: int, j: int, k: int) -> float:
        return self.side(which).get((i, j, k), 0.0)


@dataclass
class AveragedPoly:
    """psi_n(r, z0) = r * sum_{i+j<=n-1} C[i, j] r^i z0^j on a dense n x n grid.

    Entries with i + j > n - 1 are kept at zero.
    """

    degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        n = int(self.degree)
        if n < 1:
            raise ValueError("degree must be positive")
        self.degree = n
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (n, n):
            raise ValueError(f"coefficient grid must be {n}x{n}, got {c.shape}")
        i, j = np.indices((n, n))
        if np.any(c[i + j > n - 1] != 0.0):
            raise ValueError(f"coefficients outside i + j <= {n - 1}")
        self.coeffs = c

    @classmethod
    def zeros(cls, degree: int) -> "AveragedPoly":
        return cls(degree, np.zeros((degree, degree)))

    @classmethod
    def from_mapping(cls, degree: int, mapping: Mapping[tuple[int, int], float]) -> "AveragedPoly":
        c = np.zeros((degree, degree))
        for (i, j), v in mapping.items():
            if i < 0 or j < 0 or i + j > degree - 1:
                raise ValueError(f"C_{i}{j} outside 0 <= i + j <= {degree - 1}")
            c[i, j] += v
        return cls(degree, c)

    def coeff(self, i: int, j: int) -> float:
        if i + j > self.degree - 1 or i < 0 or j < 0:
            return 0.0
        return float(self.coeffs[i, j])

    def items(self):
        """(i, j, C_ij) over the triangle, row-major."""
        n = self.degree
        for i in range(n):
            for j in range(n - i):
                yield i, j, float(self.coeffs[i, j])

    def scaled(self, alpha: float) -> "AveragedPoly":
        return AveragedPoly(self.degree, alpha * self.coeffs)

    def max_abs_diff(self, other: "AveragedPoly") -> float:
        n = max(self.degree, other.degree)
        a = np.zeros((n, n))
        b = np.zeros((n, n))
        a[: self.degree, : self.degree] = self.coeffs
        b[: other.degree, : other.degree] = other.coeffs
        return float(np.max(np.abs(a - b))) if n else 0.0

    def r_coeffs(self, z0: float) -> np.ndarray:
        """Coefficients (ascending in r) of psi(r, z0) / r at fixed z0."""
        n = self.degree
        out = np.zeros(n)
        for i in range(n):
            acc = 0.0
            for j in range(n - 1 - i, -1, -1):
                acc = acc * z0 + self.coeffs[i, j]
            out[i] = acc
        return out

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)


def averaged_generic(pert: PerturbationSpec, profile: CircleProfile, tol: float = QUAD_TOL) -> AveragedPoly:
    """Averaged polynomial for any degree, monomial by monomial.

    a x^i y^j z^k on side s contributes a * binom(k, m) * M_s(i, j, k - m) to
    C[i + j, m], where M_s is the half-period moment of cos^i sin^j I_h^(k-m).
    """
    require_periodic(profile)
    n = pert.degree
    C = np.zeros((n, n))
    for side in (PLUS, MINUS):
        for (i, j, k), a in pert.side(side).items():
            if a == 0.0:
                continue
            for m in range(k + 1):
                C[i + j, m] += a * math.comb(k, m) * trig_moment(profile, i, j, k - m, side, tol)
    return AveragedPoly(n, C)


def averaged_closed_form(pert: PerturbationSpec, profile: CircleProfile, tol: float = QUAD_TOL) -> AveragedPoly:
    """Explicit coefficient formulas for degrees 2 and 3."""
    n = pert.degree
    if n not in (2, 3):
        raise UnsupportedDegreeError(
            f"closed-form coefficients exist only for degree 2 and 3 (got {n}); use averaged_generic"
        )
    cc = c_constants(profile, tol)
    p = lambda i, j, k: pert.coeff(PLUS, i, j, k)  # noqa: E731
    q = lambda i, j, k: pert.coeff(MINUS, i, j, k)  # noqa: E731
    pi = math.pi
    if n == 2:
        return AveragedPoly.from_mapping(2, {
            (1, 0): 2.0 * (p(0, 1, 0) - q(0, 1, 0)),
            (0, 1): pi * (p(0, 0, 1) + q(0, 0, 1)),
            (0, 0): pi * (p(0, 0, 0) + q(0, 0, 0)) + cc.c0_10 * p(0, 0, 1) + cc.c0_01 * q(0, 0, 1),
        })
    return AveragedPoly.from_mapping(3, {
        (2, 0): 0.5 * pi * (p(2, 0, 0) + p(0, 2, 0) + q(2, 0, 0) + q(0, 2, 0)),
        (1, 1): 2.0 * (p(0, 1, 1) - q(0, 1, 1)),
        (0, 2): pi * (p(0, 0, 2) + q(0, 0, 2)),
        (1, 0): (p(1, 0, 1) * cc.c1_11 + p(0, 1, 1) * cc.c1_21 + 2.0 * (p(0, 1, 0) - q(0, 1, 0))
                 + q(1, 0, 1) * cc.c1_12 + q(0, 1, 1) * cc.c1_22),
        (0, 1): 2.0 * p(0, 0, 2) * cc.c0_10 + pi * p(0, 0, 1) + 2.0 * q(0, 0, 2) * cc.c0_01 + pi * q(0, 0, 1),
        (0, 0): (p(0, 0, 2) * cc.c2_10 + p(0, 0, 1) * cc.c0_10 + pi * (p(0, 0, 0) + q(0, 0, 0))
                 + q(0, 0, 2) * cc.c2_01 + q(0, 0, 1) * cc.c0_01),
    })


def _check_radius(r) -> None:
    if np.any(np.asarray(r) <= 0):
        raise ValueError("psi is defined for r > 0 only")


def _inner(poly: AveragedPoly, r, z0, weights: np.ndarray):
    # Horner in z0 for each power of r, then Horner in r.
    n = poly.degree
    acc = 0.0
    for i in range(n - 1, -1, -1):
        row = 0.0
        for j in range(n - 1 - i, -1, -1):
            row = row * z0 + poly.coeffs[i, j]
        acc = acc * r + weights[i] * row
    return acc


def eval_psi(poly: AveragedPoly, r, z0):
    _check_radius(r)
    return r * _inner(poly, r, z0, np.ones(poly.degree))


def eval_dpsi_dr(poly: AveragedPoly, r, z0):
    _check_radius(r)
    return _inner(poly, r, z0, np.arange(1.0, poly.degree + 1.0))
