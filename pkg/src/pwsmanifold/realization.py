"""Build a perturbation whose averaged function is a prescribed polynomial."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .averaging import AveragedPoly, PerturbationSpec, averaged_generic
from .quadrature import QUAD_TOL
from .trig import CircleProfile, delta, require_periodic


class RealizationError(ArithmeticError):
    pass


def realize(target: AveragedPoly, profile: CircleProfile, tol: float = QUAD_TOL) -> PerturbationSpec:
    """Perturbation of the same degree, "+" side only, realizing ``target``.

    Peels the top anti-diagonal i + j = m - 1 for m = n, ..., 1. Each added
    monomial a * y^i * z^(m-1-i) feeds the whole column C[i, 0..m-1-i] through
    the binomial expansion of (z0 + I_h)^(m-1-i), so that column is subtracted
    from the remainder before descending.
    """
    if not isinstance(target, AveragedPoly):
        raise TypeError("target must be an AveragedPoly")
    require_periodic(profile)
    n = target.degree
    rest = np.array(target.coeffs, dtype=float)
    plus: dict[tuple[int, int, int], float] = {}
    for m in range(n, 0, -1):
        for i in range(m):
            top = m - 1 - i
            c = rest[i, top]
            if c == 0.0:
                continue
            d = delta(profile, m, i, top, tol)
            if d == 0.0:
                raise RealizationError(f"vanishing leading weight delta({m}, {i}, {top})")
            a = c / d
            plus[(0, i, top)] = plus.get((0, i, top), 0.0) + a
            for j in range(top + 1):
                rest[i, j] -= a * delta(profile, m, i, j, tol)
            rest[i, top] = 0.0
    return PerturbationSpec(n, plus, {})


@dataclass
class RoundtripReport:
    perturbation: PerturbationSpec
    achieved: AveragedPoly
    max_deviation: float


def realize_roundtrip_check(target: AveragedPoly, profile: CircleProfile, tol: float = QUAD_TOL) -> RoundtripReport:
    pert = realize(target, profile, tol)
    achieved = averaged_generic(pert, profile, tol)
    return RoundtripReport(pert, achieved, target.max_abs_diff(achieved))

