"""
Tests for the cap-kernel fractional p-Laplacian and the fractional infinity Laplacian
"""
import numpy as np
import pytest

from app.exceptions import DomainError
from app.schemas import LimitOptions, SweepOptions, VariantEnum
from app.services import grad_frac
from app.services.asymptotics import r_sweep, s_sweep
from app.services.fields import ConstantField, LinearField, OffsetField, make_cone, make_windowed_poly
from app.services.local_ops import (
    infinity_laplacian,
    local_grad_p_mean,
    local_infinity_mean,
    normalized_p_laplacian,
)


class TestCapKernelMean:
    def test_constant_is_fixed(self, quick_spec):
        """Test the cap mean of a constant returns the constant"""
        value = grad_frac.grad_frac_p_mean(ConstantField(2, 1.75), np.array([0.2, -0.4]), 0.75, 3.0, 0.1,
                                           spec=quick_spec)
        assert value == pytest.approx(1.75, abs=1e-9)

    def test_linear_is_fixed(self, quick_spec):
        """Test second differences of an affine field vanish, so the mean is u(x)"""
        u = LinearField(np.array([0.3, -0.2]), constant=1.0)
        x = np.array([0.5, 0.5])
        value = grad_frac.grad_frac_p_mean(u, x, 0.75, 3.0, 0.1, spec=quick_spec)
        assert value == pytest.approx(float(u.value(x)), abs=1e-8)

    def test_variants_agree_off_critical_points(self, gaussian_2d, regular_point_2d, quick_spec):
        """Test plus and minus coincide where the gradient fixes the cap axis"""
        plus = grad_frac.grad_frac_p_laplacian(gaussian_2d, regular_point_2d, 0.75, 3.0, VariantEnum.plus,
                                               quick_spec)
        minus = grad_frac.grad_frac_p_laplacian(gaussian_2d, regular_point_2d, 0.75, 3.0, VariantEnum.minus,
                                                quick_spec)
        assert plus == minus

    @pytest.mark.parametrize("s", [0.3, 0.5])
    def test_order_domain(self, gaussian_2d, regular_point_2d, s):
        """Test s <= 1/2 is rejected"""
        with pytest.raises(DomainError, match=r"\(1/2,1\)"):
            grad_frac.grad_frac_p_laplacian(gaussian_2d, regular_point_2d, s, 3.0)

    def test_line_has_no_cap(self, gaussian_1d):
        """Test n = 1 is rejected"""
        with pytest.raises(DomainError):
            grad_frac.grad_frac_p_mean(gaussian_1d, np.array([0.4]), 0.75, 3.0, 0.1)

    def test_radius_positive(self, gaussian_2d, regular_point_2d):
        """Test r <= 0 is rejected"""
        with pytest.raises(DomainError):
            grad_frac.grad_frac_p_mean(gaussian_2d, regular_point_2d, 0.75, 3.0, 0.0)


class TestInfinityFractional:
    def test_linear_is_harmonic(self, quick_spec):
        """Test the second difference of an affine field integrates to zero"""
        u = LinearField(np.array([1.0, 0.5]))
        assert grad_frac.infinity_frac_laplacian(u, np.array([0.1, 0.2]), 0.75, quick_spec) == pytest.approx(
            0.0, abs=1e-8)

    def test_mean_of_linear(self, quick_spec):
        """Test the two-ray mean of an affine field returns u(x)"""
        u = LinearField(np.array([1.0, 0.5]), constant=-0.25)
        x = np.array([0.1, 0.2])
        assert grad_frac.infinity_frac_mean(u, x, 0.75, 0.05, quick_spec) == pytest.approx(
            float(u.value(x)), abs=1e-8)

    def test_order_domain(self, gaussian_2d, regular_point_2d):
        """Test s must exceed 1/2"""
        with pytest.raises(DomainError, match=r"s must lie in \(1/2,1\)"):
            grad_frac.infinity_frac_laplacian(gaussian_2d, regular_point_2d, 0.3)

    def test_cone_pole_guard(self, cone_2d):
        """Test the operator refuses to evaluate at the cone pole"""
        with pytest.raises(DomainError):
            grad_frac.infinity_frac_laplacian(cone_2d, np.zeros(2), 0.75)


@pytest.fixture
def saddle():
    """u = x^2/2 + y^2 near the origin: a critical point with Hessian diag(1, 2)"""
    return make_windowed_poly({"constant": 0.0, "linear": [0.0, 0.0], "quadratic": [[1.0, 0.0], [0.0, 2.0]]},
                              (1.0, 2.0))


class TestCriticalPoints:
    """Sup/inf variants at the saddle's critical point"""

    def test_cap_operator_ordering(self, saddle, quick_spec):
        """Test the inf variant of the cap operator stays below the sup variant"""
        plus = grad_frac.grad_frac_p_laplacian(saddle, np.zeros(2), 0.75, 3.0, VariantEnum.plus, quick_spec)
        minus = grad_frac.grad_frac_p_laplacian(saddle, np.zeros(2), 0.75, 3.0, VariantEnum.minus, quick_spec)
        assert minus <= plus

    def test_cap_mean_ordering(self, saddle, quick_spec):
        """Test the inf variant of the cap mean stays below the sup variant"""
        plus = grad_frac.grad_frac_p_mean(saddle, np.zeros(2), 0.75, 3.0, 0.1, VariantEnum.plus, quick_spec)
        minus = grad_frac.grad_frac_p_mean(saddle, np.zeros(2), 0.75, 3.0, 0.1, VariantEnum.minus, quick_spec)
        assert minus <= plus

    def test_cap_operator_odd(self, saddle, quick_spec):
        """Test L_+(-u) = -L_-(u)"""
        flipped = OffsetField(saddle, scale=-1.0)
        plus = grad_frac.grad_frac_p_laplacian(flipped, np.zeros(2), 0.75, 3.0, VariantEnum.plus, quick_spec)
        minus = grad_frac.grad_frac_p_laplacian(saddle, np.zeros(2), 0.75, 3.0, VariantEnum.minus, quick_spec)
        assert plus == pytest.approx(-minus, abs=1e-10)

    def test_infinity_operator_odd(self, saddle, quick_spec):
        """Test the sup + inf split of the infinity operator is odd in u"""
        flipped = OffsetField(saddle, scale=-1.0)
        value = grad_frac.infinity_frac_laplacian(saddle, np.zeros(2), 0.75, quick_spec)
        assert grad_frac.infinity_frac_laplacian(flipped, np.zeros(2), 0.75, quick_spec) == pytest.approx(
            -value, abs=1e-10)


@pytest.mark.slow
class TestConeHarmonicity:
    """The cone |x|^{2s-1} is fractional infinity-harmonic away from its pole"""

    @pytest.mark.parametrize("s", [0.6, 0.75])
    @pytest.mark.parametrize("distance", [0.5, 1.0, 2.0])
    def test_vanishes_off_pole(self, s, distance):
        """Test |L_inf cone| < 1e-3 at |x| in {0.5, 1, 2}"""
        cone = make_cone(1.0, 0.0, np.zeros(2), s)
        x = distance * np.array([0.6, 0.8])
        assert abs(grad_frac.infinity_frac_laplacian(cone, x, s)) < 1e-3


@pytest.mark.slow
class TestGradFracAsymptotics:
    """Residual orders and s -> 1 limits"""

    def test_cap_residual_rate(self, gaussian_2d, regular_point_2d):
        """Test the cap mean residual decays at least like r^{1.7}"""
        s, p = 0.75, 3.0

        def residual(u, x, r):
            return grad_frac.grad_frac_residual(u, x, s, p, r)

        report = r_sweep(residual, gaussian_2d, regular_point_2d,
                         SweepOptions(label="gf-residual", expected_slope=2.0))
        assert report.passed, (report.fitted_slope, report.residuals)

    def test_infinity_residual_rate(self, gaussian_2d, regular_point_2d):
        """Test the two-ray mean residual decays at least like r^{1.7}"""
        s = 0.75
        report = r_sweep(lambda u, x, r: grad_frac.infinity_frac_residual(u, x, s, r), gaussian_2d,
                         regular_point_2d, SweepOptions(label="inf-residual", expected_slope=2.0))
        assert report.passed, (report.fitted_slope, report.residuals)

    def test_cap_operator_limit(self, gaussian_2d, regular_point_2d):
        """Test (1-s) L_cap -> -Delta^N_p u"""
        p = 3.0
        target = -normalized_p_laplacian(gaussian_2d, regular_point_2d, p, grad_frac.OPPOSITE[VariantEnum.auto])
        report = s_sweep(lambda u, x, s: grad_frac.grad_frac_p_laplacian(u, x, s, p), target,
                         gaussian_2d, regular_point_2d, [0.9, 0.99, 0.999],
                         LimitOptions(label="gfplap", tolerance=0.05))
        assert report.passed, report.relative_errors

    def test_cap_mean_limit(self, gaussian_2d, regular_point_2d):
        """Test the cap mean at s = 0.999 matches the local cap mean"""
        p, r = 3.0, 0.1
        mean = grad_frac.grad_frac_p_mean(gaussian_2d, regular_point_2d, 0.999, p, r)
        assert mean == pytest.approx(local_grad_p_mean(gaussian_2d, regular_point_2d, r, p), abs=1e-3)

    def test_infinity_mean_limit(self, gaussian_2d, regular_point_2d):
        """Test the two-ray mean at s = 0.999 matches (u(x+rz) + u(x-rz))/2"""
        r = 0.1
        x = regular_point_2d
        z = gaussian_2d.gradient(x) / np.linalg.norm(gaussian_2d.gradient(x))
        target = 0.5 * float(gaussian_2d.value(x + r * z) + gaussian_2d.value(x - r * z))
        assert grad_frac.infinity_frac_mean(gaussian_2d, x, 0.999, r) == pytest.approx(target, abs=1e-3)
        assert target == pytest.approx(local_infinity_mean(gaussian_2d, x, r), abs=1e-12)

    def test_infinity_operator_limit(self, gaussian_2d, regular_point_2d):
        """Test (1-s) L_inf -> -Delta_inf u / 2"""
        target = -0.5 * infinity_laplacian(gaussian_2d, regular_point_2d)
        report = s_sweep(lambda u, x, s: grad_frac.infinity_frac_laplacian(u, x, s), target,
                         gaussian_2d, regular_point_2d, [0.9, 0.99, 0.999],
                         LimitOptions(label="inffrac", tolerance=0.05))
        assert report.passed, report.relative_errors
