import numpy as np
import pytest

from returnmap.hardening import LinearHardening, SaturatingHardening, ZeroHardening

CURVES = [ZeroHardening(), LinearHardening(250.0), SaturatingHardening(50.0, 40.0, 10000.0)]


@pytest.mark.parametrize("H", CURVES, ids=lambda h: type(h).__name__)
def test_zero_at_origin_monotone_nonnegative_slope(H):
    x = np.linspace(0.0, 0.01, 2001)
    assert H(0.0) == 0.0
    assert np.all(np.diff(H(x)) >= -1e-15)
    assert np.all(H.left_derivative(x) >= 0.0)


@pytest.mark.parametrize("H", CURVES, ids=lambda h: type(h).__name__)
def test_left_derivative_matches_backward_difference(H):
    x = np.array([1e-4, 5e-4, 1.5e-3, 1.9e-3, 2.0e-3, 3e-3])
    h = 1e-9
    fd = (H(x) - H(x - h)) / h
    np.testing.assert_allclose(H.left_derivative(x), fd, rtol=1e-5, atol=1e-2)


def test_saturating_curve_values():
    H = SaturatingHardening(50.0, 40.0, 10000.0)
    # parabola reaches c - c0 = 10 at x = 2 (c - c0) / Ht = 0.002 and stays there
    assert H(0.002) == pytest.approx(10.0)
    assert H(0.001) == pytest.approx(10.0 - 2.5)
    assert H(0.5) == pytest.approx(10.0)
    assert H.left_derivative(0.0) == pytest.approx(10000.0)
    assert H.left_derivative(0.002) == pytest.approx(0.0, abs=1e-9)
    assert H.left_derivative(0.003) == 0.0
    assert not H.is_linear


def test_invalid_parameters():
    with pytest.raises(ValueError):
        LinearHardening(-1.0)
    with pytest.raises(ValueError):
        SaturatingHardening(40.0, 50.0, 1.0)
