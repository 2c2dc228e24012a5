import math

import pytest
from hypothesis import given, strategies as st

from casimir_babinet.errors import DomainError
from casimir_babinet.feasibility import (
    CONSTANTS,
    GOLD_CONDUCTIVITY,
    ConductorSpec,
    check_conductor,
    skin_depth,
    thickness_window,
)


def test_gold_value_from_formula():
    # direct evaluation: sqrt(2 / (mu0 * omega * sigma)) with omega = 2 pi c / d
    omega = 2 * math.pi * CONSTANTS["c"] / 1e-6
    expected = math.sqrt(2 / (CONSTANTS["mu0"] * omega * GOLD_CONDUCTIVITY))
    assert skin_depth(GOLD_CONDUCTIVITY, 1e-6) == pytest.approx(expected, rel=1e-14)
    assert skin_depth(GOLD_CONDUCTIVITY, 1e-6) == pytest.approx(4.33e-9, rel=1e-3)


def test_perfect_conductor():
    assert skin_depth(math.inf, 1e-6) == 0.0
    w = thickness_window(math.inf, 1e-6, t=1e-12)
    assert w.t_min == 0.0 and w.t_max == pytest.approx(2e-7) and w.verdict == "valid"


@given(st.floats(1e3, 1e9), st.floats(1e-9, 1e-3))
def test_sqrt_scaling(sigma, d):
    assert skin_depth(sigma, 4 * d) == pytest.approx(2 * skin_depth(sigma, d), rel=1e-14)


@given(st.floats(1e3, 1e9), st.floats(1e-9, 1e-3), st.floats(1.01, 10))
def test_monotonicity(sigma, d, factor):
    assert skin_depth(sigma, d * factor) > skin_depth(sigma, d)
    assert skin_depth(sigma * factor, d) < skin_depth(sigma, d)
    a, b = thickness_window(sigma, d), thickness_window(sigma * factor, d)
    assert b.t_min < a.t_min and b.t_max == a.t_max


@pytest.mark.parametrize("d, t", [(0.75e-6, 100e-9), (0.3e-6, 30e-9)])
def test_worked_examples_valid(d, t):
    w = thickness_window(GOLD_CONDUCTIVITY, d, t=t)
    assert w.verdict == "valid"
    assert w.margin == 5.0


def test_verdicts():
    assert thickness_window(GOLD_CONDUCTIVITY, 1e-6, t=1e-9).verdict == "invalid"
    assert thickness_window(GOLD_CONDUCTIVITY, 1e-6).verdict == "feasible"
    # a poor conductor at tiny separation leaves no room
    assert thickness_window(1e3, 1e-7, t=1e-9).verdict == "infeasible"


@pytest.mark.parametrize("args", [(0.0, 1e-6), (1e7, 0.0), (-1.0, 1e-6)])
def test_domain_errors(args):
    with pytest.raises(DomainError):
        skin_depth(*args)


def test_margin_and_thickness_checked():
    with pytest.raises(DomainError):
        thickness_window(1e7, 1e-6, margin=1.0)
    with pytest.raises(DomainError):
        thickness_window(1e7, 1e-6, t=-1.0)
    with pytest.raises(DomainError):
        ConductorSpec(1e7, 0.0, 1e-6)
    assert check_conductor(ConductorSpec(GOLD_CONDUCTIVITY, 100e-9, 0.75e-6)).verdict == "valid"
