
import numpy as np
import pytest

from casimir_babinet.quadrature import composite, gauss_legendre, graded_breaks, semi_infinite_breaks


def test_gauss_legendre_exact_for_polynomials():
    x, w = gauss_legendre(5, -1.0, 3.0)
    for k in range(10):
        assert np.sum(w * x**k) == pytest.approx((3.0 ** (k + 1) - (-1.0) ** (k + 1)) / (k + 1), rel=1e-13)


def test_composite_rejects_unsorted_breaks():
    with pytest.raises(ValueError):
        composite([0.0, 1.0, 1.0], 4)


def test_graded_rule_handles_log_endpoint():
    # int_0^1 x log x dx = -1/4
    errs = []
    for n in (4, 8, 12):
        x, w = composite(graded_breaks(1.0, 10), n)
        assert x.min() > 0
        errs.append(abs(np.sum(w * x * np.log(x)) + 0.25))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-11


def test_semi_infinite_exponential():
    x, w = composite(semi_infinite_breaks(1.0, 50.0, 3), 8)
    assert np.sum(w * x**2 * np.exp(-x)) == pytest.approx(2.0, rel=1e-12)


def test_graded_breaks_levels():
    b = graded_breaks(2.0, 2, 0.5)
    np.testing.assert_allclose(b, [0.0, 0.5, 1.0, 2.0])
    with pytest.raises(ValueError):
        graded_breaks(1.0, -1)
