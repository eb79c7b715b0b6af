import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from analysis.specfun import (arcsin_p, build_gensine, eval_sp, get_gensine, pi_p,
                              pi_p_quadrature, quarter_pi_p)
from utils.errors import BuildError, DomainError


def test_pi_2_is_pi():
    assert pi_p(2.0) == pytest.approx(math.pi, rel=1e-15)


@pytest.mark.parametrize("p", [1.5, 3.0, 4.0, 7.5])
def test_closed_form_period_matches_quadrature(p):
    assert pi_p_quadrature(p) == pytest.approx(pi_p(p), rel=1e-10)


def test_p_must_exceed_one():
    with pytest.raises(DomainError):
        pi_p(1.0)
    with pytest.raises(DomainError):
        build_gensine(0.5)


def test_sine_for_p_equal_two(sine2):
    psi = np.linspace(-7.0, 7.0, 301)
    s, ds = eval_sp(sine2, psi)
    assert s == pytest.approx(np.sin(psi), abs=1e-8)
    assert ds == pytest.approx(np.cos(psi), abs=1e-4)


def test_scalar_evaluation(sine2):
    s, ds = sine2(math.pi / 6)
    assert isinstance(s, float)
    assert s == pytest.approx(0.5, abs=1e-9)
    assert ds == pytest.approx(math.sqrt(3) / 2, abs=1e-6)


def test_quarter_angle_for_p_equal_two(sine2):
    quarter, complement = quarter_pi_p(sine2)
    assert quarter == pytest.approx(math.pi / 4, abs=1e-8)
    assert complement == pytest.approx(3 * math.pi / 4, abs=1e-8)


def test_table_is_shared():
    assert get_gensine(3.0) is get_gensine(3.0)


def test_table_build_fails_when_tolerance_unreachable():
    with pytest.raises(BuildError):
        build_gensine(3.0, tol=1e-15, n_nodes=16)


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=1.3, max_value=5.0))
def test_symmetries_and_amplitude(p):
    gs = build_gensine(p)
    H = gs.half_period
    psi = np.linspace(0.05, 1.9, 13) * H
    s, _ = eval_sp(gs, psi)
    s_neg, _ = eval_sp(gs, -psi)
    s_shift, _ = eval_sp(gs, psi + 2 * gs.pi_p)
    s_mirror, _ = eval_sp(gs, gs.pi_p - psi)
    assert s_neg == pytest.approx(-s, abs=1e-9)
    assert s_shift == pytest.approx(s, abs=1e-9)
    assert s_mirror == pytest.approx(s, abs=1e-9)
    assert eval_sp(gs, H)[0] == pytest.approx((p - 1) ** (1 / p), rel=1e-9)


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=1.3, max_value=5.0), st.floats(min_value=0.05, max_value=0.6))
def test_derivative_matches_difference_quotient(p, frac):
    gs = build_gensine(p)
    psi, h = frac * gs.half_period, 1e-5
    _, ds = eval_sp(gs, psi)
    fd = (eval_sp(gs, psi + h)[0] - eval_sp(gs, psi - h)[0]) / (2 * h)
    assert ds == pytest.approx(fd, abs=1e-5)


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=1.3, max_value=5.0), st.floats(min_value=0.0, max_value=0.8))
def test_arcsin_inverts_first_quarter(p, frac):
    gs = build_gensine(p)
    psi = frac * gs.half_period
    assert arcsin_p(gs, gs.quarter(psi)) == pytest.approx(psi, abs=1e-7)
