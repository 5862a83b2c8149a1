import math

import numpy as np
import pytest

import oracles
from conftest import EX2_C00_ORACLE, random_pert
from pwsmanifold import (
    AveragedPoly,
    CircleProfile,
    PerturbationSpec,
    UnsupportedDegreeError,
    averaged_closed_form,
    averaged_generic,
    eval_dpsi_dr,
    eval_psi,
)


def test_degree_one_is_pi_times_sum():
    alpha, beta = 0.3, -1.7
    pert = PerturbationSpec(1, {(0, 0, 0): alpha}, {(0, 0, 0): beta})
    for prof in (CircleProfile.zero(), CircleProfile.cos()):
        poly = averaged_generic(pert, prof)
        assert poly.coeff(0, 0) == pytest.approx(math.pi * (alpha + beta), abs=1e-13)


def test_example1(ex1_pert, ex1_poly):
    assert ex1_poly.coeff(1, 0) == pytest.approx(1.0, abs=1e-12)
    assert ex1_poly.coeff(0, 1) == pytest.approx(-1.0, abs=1e-12)
    assert abs(ex1_poly.coeff(0, 0)) <= 1e-12
    closed = averaged_closed_form(ex1_pert, CircleProfile.zero())
    assert closed.max_abs_diff(ex1_poly) <= 1e-12


def test_example2(ex2_pert, ex2_poly):
    expect = {(2, 0): 1.0, (1, 1): 0.0, (0, 2): 1.0, (1, 0): -6.0, (0, 1): 0.0, (0, 0): EX2_C00_ORACLE}
    for (i, j), v in expect.items():
        assert ex2_poly.coeff(i, j) == pytest.approx(v, abs=1e-10), (i, j)
    closed = averaged_closed_form(ex2_pert, CircleProfile.cos())
    assert closed.max_abs_diff(ex2_poly) <= 1e-10


def test_zero_and_antisymmetric():
    prof = CircleProfile.zero()
    assert averaged_generic(PerturbationSpec(2), prof).is_zero()
    assert averaged_closed_form(PerturbationSpec(3), CircleProfile.cos()).is_zero()
    s = 0.8
    sym = PerturbationSpec(2, {(0, 1, 0): s}, {(0, 1, 0): s})
    assert averaged_closed_form(sym, prof).is_zero()
    assert averaged_generic(sym, prof).max_abs_diff(AveragedPoly.zeros(2)) <= 1e-14


@pytest.mark.parametrize("degree", [2, 3])
def test_dual_path_random(profile, degree):
    rng = np.random.default_rng(100 + degree)
    for _ in range(25):
        pert = random_pert(rng, degree)
        assert averaged_generic(pert, profile).max_abs_diff(averaged_closed_form(pert, profile)) <= 1e-9


def test_closed_form_degree_guard():
    with pytest.raises(UnsupportedDegreeError):
        averaged_closed_form(PerturbationSpec(4), CircleProfile.zero())


@pytest.mark.parametrize("degree", [1, 2, 3, 4])
def test_linearity(profile, degree):
    rng = np.random.default_rng(7 * degree)
    p1, p2 = random_pert(rng, degree), random_pert(rng, degree)
    alpha = -1.3
    lhs = averaged_generic(p1.combine(p2, alpha), profile)
    rhs = AveragedPoly(degree, averaged_generic(p1, profile).coeffs + alpha * averaged_generic(p2, profile).coeffs)
    assert lhs.max_abs_diff(rhs) <= 1e-11


@pytest.mark.parametrize("degree", [2, 3, 4])
def test_quadrature_oracle_equivalence(degree):
    rng = np.random.default_rng(11 + degree)
    terms = ((1, 0, 1.0), (0, 1, -0.4))
    prof = CircleProfile(terms)
    pert = random_pert(rng, degree)
    poly = averaged_generic(pert, prof)
    for _ in range(4):
        r, z0 = rng.uniform(0.1, 2.5), rng.uniform(-2.0, 2.0)
        ref = oracles.psi(terms, pert.plus, pert.minus, r, z0)
        assert eval_psi(poly, r, z0) == pytest.approx(ref, abs=1e-8)


@pytest.mark.parametrize("degree", [1, 2, 3, 5])
def test_degree_bound(profile, degree):
    poly = averaged_generic(random_pert(np.random.default_rng(degree), degree), profile)
    i, j = np.indices(poly.coeffs.shape)
    assert not np.any(poly.coeffs[i + j > degree - 1])


def test_spec_validation():
    with pytest.raises(ValueError):
        PerturbationSpec(2, {(1, 1, 0): 1.0})
    with pytest.raises(ValueError):
        PerturbationSpec(0)
    with pytest.raises(ValueError):
        AveragedPoly(2, np.ones((2, 2)))


def test_eval_examples(ex1_poly, ex2_poly):
    assert abs(eval_psi(ex1_poly, 2.0, 2.0)) < 1e-12
    assert eval_psi(ex1_poly, 3.0, 1.0) == pytest.approx(6.0, abs=1e-12)
    assert eval_dpsi_dr(ex1_poly, 2.0, 2.0) == pytest.approx(2.0, abs=1e-12)
    assert abs(eval_psi(ex2_poly, 1e-12, 0.3)) < 1e-10
    only_const = AveragedPoly.from_mapping(3, {(0, 0): 2.5})
    for r, z in [(0.1, 0.0), (4.0, -3.0)]:
        assert eval_dpsi_dr(only_const, r, z) == 2.5
    with pytest.raises(ValueError):
        eval_psi(ex1_poly, 0.0, 1.0)


def test_dpsi_sign_on_example2_circle(ex2_poly):
    rho = math.sqrt(EX2_C00_ORACLE - 8.0)
    for z in (-0.5, 0.0, 0.3):
        w = math.sqrt(rho**2 - z**2)
        inner, outer = 3.0 - w, 3.0 + w
        assert abs(eval_psi(ex2_poly, inner, z)) < 1e-10
        assert eval_dpsi_dr(ex2_poly, inner, z) == pytest.approx(-2.0 * inner * w, abs=1e-10)
        assert eval_dpsi_dr(ex2_poly, outer, z) == pytest.approx(2.0 * outer * w, abs=1e-10)


def test_eval_vectorized(ex2_poly):
    r = np.linspace(0.5, 4.0, 9)
    z = np.linspace(-1.0, 1.0, 9)
    scalar = [eval_psi(ex2_poly, a, b) for a, b in zip(r, z)]
    np.testing.assert_allclose(eval_psi(ex2_poly, r, z), scalar, rtol=1e-15)
