import math

import numpy as np
import pytest

import oracles
from pwsmanifold import CircleProfile, NonPeriodicProfileError, c_constants, delta, eval_h, integral_I_h, validate_periodic
from pwsmanifold.trig import require_periodic

THETAS = np.linspace(0.0, 2 * math.pi, 37)


def test_eval_h_examples():
    cos = CircleProfile.cos()
    assert eval_h(cos, 0.0) == 1.0
    assert eval_h(CircleProfile.zero(), 1.234) == 0.0
    assert abs(eval_h(cos, math.pi / 2)) < 1e-16
    assert eval_h(cos, np.array([0.0, math.pi])).tolist() == [1.0, -1.0]


def test_ih_cos():
    cos = CircleProfile.cos()
    assert integral_I_h(cos, math.pi / 2) == pytest.approx(1.0, abs=1e-13)
    assert abs(integral_I_h(cos, 2 * math.pi)) < 1e-13
    assert integral_I_h(cos, 0.0) == 0.0
    np.testing.assert_allclose(integral_I_h(cos, THETAS), np.sin(THETAS), atol=1e-13)


def test_ih_against_quad_for_mixed_profile():
    terms = ((1, 0, 0.7), (1, 2, -1.3), (0, 3, 2.0), (2, 1, 0.4))
    prof = CircleProfile(terms)
    for t in (0.1, 1.9, 3.3, 6.0):
        assert integral_I_h(prof, t) == pytest.approx(oracles.I_h(terms, t), abs=1e-12)


def test_ih_periodic_shift():
    prof = CircleProfile(((1, 0, 1.0), (0, 1, 0.5), (1, 1, 2.0)))
    assert validate_periodic(prof)
    np.testing.assert_allclose(integral_I_h(prof, THETAS + 2 * math.pi), integral_I_h(prof, THETAS), atol=1e-12)


def test_ih_linearity():
    p = CircleProfile(((1, 0, 1.0),))
    q = CircleProfile(((0, 1, 1.0), (2, 1, -0.5)))
    alpha = -2.5
    lhs = integral_I_h(p + q.scaled(alpha), THETAS)
    rhs = integral_I_h(p, THETAS) + alpha * integral_I_h(q, THETAS)
    np.testing.assert_allclose(lhs, rhs, atol=2e-12)


def test_validate_periodic():
    assert validate_periodic(CircleProfile.cos())
    assert validate_periodic(CircleProfile.zero())
    assert not validate_periodic(CircleProfile.constant(1.0))
    assert not validate_periodic(CircleProfile(((0, 2, 1.0),)))  # sin^2 has mean 1/2
    with pytest.raises(NonPeriodicProfileError):
        require_periodic(CircleProfile.constant(0.3))


def test_profile_canonical_form():
    a = CircleProfile(((1, 0, 1.0), (0, 1, 2.0), (1, 0, 0.5), (2, 2, 0.0)))
    b = CircleProfile(((0, 1, 2.0), (1, 0, 1.5)))
    assert a == b and hash(a) == hash(b)
    with pytest.raises(ValueError):
        CircleProfile(((-1, 0, 1.0),))


def test_c_constants_cos():
    c = c_constants(CircleProfile.cos())
    assert c.c0_10 == pytest.approx(2.0, abs=1e-12)
    assert c.c0_01 == pytest.approx(-2.0, abs=1e-12)
    assert c.c2_10 == pytest.approx(math.pi / 2, abs=1e-12)
    assert c.c2_01 == pytest.approx(math.pi / 2, abs=1e-12)


def test_c_constants_zero_profile():
    assert all(v == 0.0 for v in c_constants(CircleProfile.zero()).as_dict().values())


def test_c_constants_against_oracle_and_split_identities():
    terms = ((1, 0, 1.0), (0, 1, -0.6), (1, 1, 0.9))
    c = c_constants(CircleProfile(terms)).as_dict()
    ref = oracles.c_constants(terms)
    for k, v in ref.items():
        assert c[k] == pytest.approx(v, abs=1e-11), k
    full = oracles.moment(terms, 0, 0, 1, 0.0, 2 * math.pi)
    assert c["c0_10"] + c["c0_01"] == pytest.approx(full, abs=1e-11)
    full_cos = oracles.moment(terms, 1, 0, 1, 0.0, 2 * math.pi)
    assert c["c1_11"] + c["c1_12"] == pytest.approx(full_cos, abs=1e-11)
    full_sq = oracles.moment(terms, 0, 0, 2, 0.0, 2 * math.pi)
    assert c["c2_10"] + c["c2_01"] == pytest.approx(full_sq, abs=1e-11)


def test_c_constants_reject_nonperiodic():
    with pytest.raises(NonPeriodicProfileError):
        c_constants(CircleProfile.constant(1.0))


def test_delta_examples():
    cos = CircleProfile.cos()
    assert delta(cos, 3, 1, 1) == pytest.approx(2.0, abs=1e-12)
    assert delta(CircleProfile.zero(), 2, 0, 1) == pytest.approx(math.pi, abs=1e-12)
    assert delta(cos, 2, 0, 1) == pytest.approx(math.pi, abs=1e-12)
    assert delta(cos, 3, 0, 0) == pytest.approx(math.pi / 2, abs=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_delta_positive_on_top_diagonal(profile, n):
    for i in range(n):
        assert delta(profile, n, i, n - 1 - i) > 0


def test_delta_against_oracle():
    terms = ((1, 0, 1.0), (0, 1, 0.3))
    prof = CircleProfile(terms)
    for n, i, j in [(4, 0, 1), (4, 1, 0), (5, 2, 1), (3, 0, 0)]:
        assert delta(prof, n, i, j) == pytest.approx(oracles.delta(terms, n, i, j), abs=1e-11)


def test_delta_index_range():
    with pytest.raises(IndexError):
        delta(CircleProfile.cos(), 2, 1, 1)
