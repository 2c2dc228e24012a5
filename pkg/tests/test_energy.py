import math

import numpy as np
import pytest
from scipy.integrate import quad as scipy_quad

from casimir_babinet.energy import (
    PLATE_EM,
    PLATE_FIRST_EM,
    PLATE_FIRST_SCALAR,
    PLATE_SCALAR,
    EdgeFit,
    EnergyResult,
    QuadratureSpec,
    _trace_terms,
    casimir_energy,
    energy_first_reflection,
    energy_full,
    fit_edge_coefficients,
    pfa_energy,
    plate_energy,
    roundtrip,
)
from casimir_babinet.errors import ConvergenceError, DomainError, InvariantViolation
from casimir_babinet.grating import SolverParams, StripScreen, solve_reflection, suggest_params
from casimir_babinet.wavemodes import OrderBasis, ReflectionBlock, mirror_amplitudes, translation_diagonal, Channel

PLATES = StripScreen(1.0, 1.0)
HALF = StripScreen.from_fill(1.0, 0.5)


def _scalar_plate_oracle(log=True):
    """Independent radial integral (1/4 pi^2) int_0^inf q^2 f(exp(-2q)) dq at d = 1."""
    f = (lambda u: math.log1p(-u)) if log else (lambda u: -u)
    val, _ = scipy_quad(lambda q: q * q * f(math.exp(-2 * q)), 0, math.inf, epsabs=1e-14, epsrel=1e-12)
    return val / (4 * math.pi**2)


def test_closed_forms_against_radial_oracle():
    assert PLATE_SCALAR == pytest.approx(_scalar_plate_oracle(True), rel=1e-10)
    assert PLATE_FIRST_SCALAR == pytest.approx(_scalar_plate_oracle(False), rel=1e-10)
    assert PLATE_EM == pytest.approx(-math.pi**2 / 720)
    assert PLATE_FIRST_EM / PLATE_EM == pytest.approx(90 / math.pi**4)


def test_plate_energy_lookup():
    assert plate_energy("em", "first") == PLATE_FIRST_EM
    assert plate_energy("D", "full") == PLATE_SCALAR
    with pytest.raises(DomainError):
        plate_energy("em", "second")


def test_roundtrip_examples():
    b = OrderBasis(1.0, 3, 0.8, 0.2)
    U = translation_diagonal(b, 0.7)
    R0, _ = mirror_amplitudes("D", b)
    M = roundtrip(R0, U, R0)
    np.testing.assert_allclose(M, np.diag(np.exp(-2 * b.q * 0.7)), rtol=1e-15)
    zero = ReflectionBlock(Channel.D, Channel.D, np.zeros((7, 7)), b)
    assert not roundtrip(R0, U, zero).any()


def test_roundtrip_strips_bounded_by_mirror():
    b = OrderBasis(1.0, 4, 1.0, 0.3, 0.4)
    U = translation_diagonal(b, 1.0)
    R0, _ = mirror_amplitudes("D", b)
    R = solve_reflection(HALF, "D", b.kappa, (b.kx, b.ky), SolverParams(24, 4))
    tr = np.trace(roundtrip(R0, U, R))
    assert 0 < tr < np.sum(np.exp(-2 * b.q))


@pytest.mark.parametrize("channel, full, first", [("em", PLATE_EM, PLATE_FIRST_EM), ("D", PLATE_SCALAR, PLATE_FIRST_SCALAR), ("N", PLATE_SCALAR, PLATE_FIRST_SCALAR)])
def test_plates(channel, full, first):
    res = casimir_energy(PLATES, 1.0, channel)
    assert res["full"].value == pytest.approx(full, rel=1e-5)
    assert res["first"].value == pytest.approx(first, rel=1e-5)
    assert res["full"].quad_error >= 0


def test_null_screen():
    res = casimir_energy(StripScreen(1.0, 0.0), 1.0, "em")
    assert res["full"].value == 0.0 and res["first"].value == 0.0


def test_energy_is_independent_of_separation_unit():
    # the coefficient of A/d^3 for plates does not depend on d
    a = energy_full(PLATES, 0.3, "D")
    b = energy_full(PLATES, 3.0, "D")
    assert a.value == pytest.approx(b.value, rel=max(a.quad_error, b.quad_error))
    assert a.value == pytest.approx(PLATE_SCALAR, rel=a.quad_error)


def test_truncation_ordering():
    q = QuadratureSpec(n_radial=6, n_bloch=4)
    for screen in (PLATES, HALF):
        res = casimir_energy(screen, 1.0, "em", q, suggest_params(screen, 1.0, tol=1e-7))
        assert res["full"].value < res["first"].value < 0


def test_quadrature_invariance_under_doubling():
    q = QuadratureSpec(n_radial=6, n_bloch=4)
    params = suggest_params(HALF, 1.0, tol=1e-8)
    base = casimir_energy(HALF, 1.0, "em", q, params)
    fine = casimir_energy(HALF, 1.0, "em", q.refined(), params)
    for order in ("first", "full"):
        change = abs(fine[order].value - base[order].value) / abs(base[order].value)
        assert change < base[order].quad_error


def test_one_half_scalar_pair():
    q = QuadratureSpec(n_radial=6, n_bloch=6)
    params = suggest_params(HALF, 1.0, tol=1e-8)
    d = energy_first_reflection(HALF, 1.0, "D", q, params).value
    n = energy_first_reflection(HALF, 1.0, "N", q, params).value
    assert d + n == pytest.approx(PLATE_FIRST_EM / 2, rel=1e-4)


def test_worker_count_does_not_change_results():
    q = QuadratureSpec(n_radial=4, n_bloch=3)
    params = SolverParams(n_basis=16, orders=3)
    one = casimir_energy(HALF, 1.0, "em", q, params, workers=1)
    two = casimir_energy(HALF, 1.0, "em", q, params, workers=2)
    assert one["full"].value == two["full"].value
    assert one["first"].value == two["first"].value


def test_nonpositive_separation():
    with pytest.raises(DomainError):
        casimir_energy(PLATES, 0.0)


def test_non_positive_definite_roundtrip_is_an_error():
    R = np.diag([0.5, 1.2])
    with pytest.raises(InvariantViolation) as info:
        _trace_terms(1.0, np.ones(2), R, {"K": 1.0})
    assert info.value.diagnostics["max_eigenvalue"] == pytest.approx(1.2)


def test_pfa():
    assert pfa_energy(PLATES).value == pytest.approx(-math.pi**2 / 720)
    assert pfa_energy(StripScreen(1.0, 0.0)).value == 0.0
    assert pfa_energy(HALF).value == pytest.approx(-math.pi**2 / 1440)


def test_energy_result_conversions():
    r = EnergyResult(-0.5, "full", 1e-6)
    assert r.energy_per_area(2.0) == pytest.approx(-0.5 / 8)
    assert r.total_energy(3.0, 2.0, hbar_c=2.0) == pytest.approx(-0.375)
    assert r.to_dict()["reflection_order"] == "full"


def test_quadrature_spec_validation():
    with pytest.raises(DomainError):
        QuadratureSpec(n_radial=1)
    with pytest.raises(DomainError):
        QuadratureSpec(tol=0)
    assert QuadratureSpec().coarse().n_radial == 6


# --- edge fit -----------------------------------------------------------------


def _synthetic(screen, aA, aP, c, ds, noise=0.0, seed=0):
    rng = np.random.default_rng(seed)
    p = screen.perimeter_per_area()
    out = []
    for d in ds:
        y = aA * screen.fill + aP * p * d + c * d * d
        val = -y * (1 + noise * rng.standard_normal())
        out.append((d, EnergyResult(val, "first", max(noise, 1e-12))))
    return out


def test_edge_fit_recovers_exact_model():
    s = StripScreen.from_fill(1.0, 0.5)
    fit = fit_edge_coefficients(_synthetic(s, 0.0137, 0.0025, -0.002, [0.04, 0.05, 0.06, 0.08, 0.1]), s)
    assert isinstance(fit, EdgeFit)
    assert fit.alpha_A == pytest.approx(0.0137, rel=1e-8)
    assert fit.alpha_P == pytest.approx(0.0025, rel=1e-6)
    assert fit.c == pytest.approx(-0.002, rel=1e-4)


def test_edge_fit_uncertainty_covers_noise():
    s = StripScreen.from_fill(1.0, 0.5)
    fit = fit_edge_coefficients(_synthetic(s, 0.0137, 0.0, 0.0, np.linspace(0.04, 0.1, 8), noise=1e-5, seed=3), s)
    assert abs(fit.alpha_P) < 4 * fit.sigma_P
    assert fit.sigma_P > 0


def test_edge_fit_needs_three_separations():
    s = StripScreen.from_fill(1.0, 0.5)
    with pytest.raises(DomainError):
        fit_edge_coefficients(_synthetic(s, 1, 1, 1, [0.1, 0.1, 0.2]), s)


def test_edge_fit_reports_ill_conditioning():
    s = StripScreen.from_fill(1.0, 0.5)
    data = _synthetic(s, 1, 1, 1, [0.1, 0.1 + 1e-9, 0.1 + 2e-9])
    with pytest.raises(ConvergenceError):
        fit_edge_coefficients(data, s)
