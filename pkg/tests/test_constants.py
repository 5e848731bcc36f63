"""
Tests for kernel constants
"""
import numpy as np
import pytest
from scipy.integrate import quad

from app.exceptions import DomainError
from app.schemas import QuadratureSpec
from app.services.constants import (
    cap_moments,
    directional_moments,
    fractional_laplacian_constant,
    get_constants,
    mean_kernel_constant,
    radial_tail_constant,
    solve_cap_threshold,
    sphere_measure,
    sphere_p_moment,
)
from app.services.quadrature import cap_rule, sphere_integral
from app.utils.linalg import random_rotation


def radial_tail_integral(s: float) -> float:
    """int_1^inf dt / (t (t^2-1)^s), endpoint singularity through quad's algebraic weight"""
    near, _ = quad(lambda t: (t + 1.0) ** (-s) / t, 1.0, 2.0, weight="alg", wvar=(-s, 0.0),
                   epsabs=1e-14, epsrel=1e-13)
    far, _ = quad(lambda t: 1.0 / (t * (t * t - 1.0) ** s), 2.0, np.inf, epsabs=1e-14, epsrel=1e-13)
    return near + far


class TestMeanKernelConstant:
    """c(n,s) normalizes the exterior kernel r^{2s} (|y|^2-r^2)^{-s} |y|^{-n}"""

    def test_closed_form_values(self):
        """Test the tabulated values at s = 1/2"""
        assert mean_kernel_constant(1, 0.5) == pytest.approx(1.0 / np.pi, rel=1e-14)
        assert mean_kernel_constant(2, 0.5) == pytest.approx(1.0 / np.pi ** 2, rel=1e-14)

    @pytest.mark.parametrize("n", [1, 2, 3])
    @pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
    def test_inverts_defining_integral(self, n, s):
        """Test c(n,s) against the numerically integrated kernel mass"""
        mass = sphere_measure(n) * radial_tail_integral(s)
        assert mean_kernel_constant(n, s) == pytest.approx(1.0 / mass, rel=1e-8)

    def test_vanishes_at_endpoints(self):
        """Test the sine factor drives c(n,s) to zero as s approaches 0 or 1"""
        assert mean_kernel_constant(2, 1e-9) < 1e-8
        assert mean_kernel_constant(2, 1.0 - 1e-9) < 1e-8

    def test_rejects_order_outside_unit_interval(self):
        """Test the domain check on s"""
        with pytest.raises(DomainError):
            mean_kernel_constant(2, 1.0)


class TestRadialTailConstant:
    """c_s = (int_1^inf dt / (t (t^2-1)^s))^{-1}"""

    def test_closed_form_values(self):
        """Test s = 1/2 and s = 1/4"""
        assert radial_tail_constant(0.5) == pytest.approx(2.0 / np.pi, rel=1e-14)
        assert radial_tail_constant(0.25) == pytest.approx(np.sqrt(2.0) / np.pi, rel=1e-14)

    @pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
    def test_inverts_defining_integral(self, s):
        """Test c_s against quadrature of its defining integral"""
        assert radial_tail_constant(s) == pytest.approx(1.0 / radial_tail_integral(s), rel=1e-8)

    def test_infinity_normalizer_is_half(self):
        """Test the infinity mean kernel uses half the radial constant"""
        c = get_constants(2, 0.75)
        assert c.c_s_infinity == pytest.approx(0.5 * c.c_s, rel=1e-15)


class TestFractionalLaplacianConstant:
    def test_half_order_in_one_dimension(self):
        """Test C(1,1/2) = 1/pi"""
        assert fractional_laplacian_constant(1, 0.5) == pytest.approx(1.0 / np.pi, rel=1e-14)


class TestDirectionalMoments:
    """gamma_p and gamma'_p moments of the unit sphere"""

    def test_circle_at_p2(self):
        """Test gamma_2 = gamma'_2 = pi on the circle"""
        gamma_p, gamma_p_prime = directional_moments(2, 2.0)
        assert gamma_p == pytest.approx(np.pi, rel=1e-14)
        assert gamma_p_prime == pytest.approx(np.pi, rel=1e-14)

    def test_sphere_at_p2(self):
        """Test gamma_2 = 4 pi / 3 on S^2"""
        gamma_p, _ = directional_moments(3, 2.0)
        assert gamma_p == pytest.approx(4.0 * np.pi / 3.0, rel=1e-14)

    @pytest.mark.parametrize("n", [1, 2, 3])
    @pytest.mark.parametrize("p", [2.0, 2.5, 3.0, 4.0])
    def test_ratio_is_p_minus_one(self, n, p):
        """Test gamma'_p / gamma_p = p - 1"""
        gamma_p, gamma_p_prime = directional_moments(n, p)
        assert abs(gamma_p_prime / gamma_p - (p - 1.0)) < 1e-12

    @pytest.mark.parametrize("p", [3.0, 4.0])
    def test_matches_sphere_quadrature(self, p):
        """Test the Gamma-ratio form against a product rule split at the kink"""
        gamma_p, _ = directional_moments(3, p)
        numeric = sphere_integral(
            lambda w: np.abs(w[:, 0]) ** (p - 2.0) * w[:, 1] ** 2, 3,
            QuadratureSpec(sphere_order=64), axis=np.array([1.0, 0.0, 0.0]),
        )
        assert numeric == pytest.approx(gamma_p, rel=1e-10)

    def test_rejects_small_exponent(self):
        """Test p < 2 is rejected"""
        with pytest.raises(DomainError):
            directional_moments(2, 1.5)


class TestSpherePMoment:
    @pytest.mark.parametrize("n,p,expected", [
        (1, 2.0, 2.0),
        (2, 2.0, 2.0 * np.pi),
        (2, 4.0, np.pi),
        (3, 2.0, 4.0 * np.pi),
    ])
    def test_values(self, n, p, expected):
        """Test C_{n,p} on the two-point sphere, the circle and S^2"""
        assert sphere_p_moment(n, p) == pytest.approx(expected, rel=1e-14)


class TestCapMoments:
    """Cap moments and the threshold equation beta/alpha = p - 2"""

    def test_half_circle(self):
        """Test the half circle: alpha = pi/4, beta = 0, gamma_cap = 1/pi"""
        alpha, beta, gamma_cap = cap_moments(0.0, 2)
        assert alpha == pytest.approx(np.pi / 4.0, rel=1e-14)
        assert beta == pytest.approx(0.0, abs=1e-15)
        assert gamma_cap == pytest.approx(1.0 / np.pi, rel=1e-14)

    def test_cap_shrinks_to_nothing(self):
        """Test gamma_cap blows up as the threshold approaches 1"""
        _, _, gamma_cap = cap_moments(1.0 - 1e-10, 2)
        assert gamma_cap > 1e4

    def test_empty_cap_rejected(self):
        """Test cp = 1 is rejected"""
        with pytest.raises(DomainError):
            cap_moments(1.0, 2)

    @pytest.mark.parametrize("n", [2, 3])
    def test_threshold_zero_at_p2(self, n):
        """Test c_2 = 0"""
        assert solve_cap_threshold(2.0, n) == pytest.approx(0.0, abs=1e-8)

    @pytest.mark.parametrize("n", [2, 3])
    @pytest.mark.parametrize("p", [2.0, 3.0, 4.0])
    def test_threshold_solves_ratio_equation(self, n, p):
        """Test |beta/alpha - (p-2)| < 1e-10 at the solved threshold"""
        cp = solve_cap_threshold(p, n)
        alpha, beta, _ = cap_moments(cp, n)
        assert 0.0 <= cp < 1.0
        assert abs(beta / alpha - (p - 2.0)) < 1e-10

    def test_threshold_grows_with_p(self):
        """Test larger p needs a narrower cap"""
        assert solve_cap_threshold(3.0, 2) < solve_cap_threshold(4.0, 2)

    @pytest.mark.parametrize("n", [2, 3])
    def test_rotation_invariance(self, n):
        """Test the moments of a randomly rotated cap match the e_1 closed forms"""
        rng = np.random.default_rng(11)
        cp = solve_cap_threshold(3.0, n)
        alpha, beta, gamma_cap = cap_moments(cp, n)
        for _ in range(5):
            frame = random_rotation(n, rng)
            dirs, weights = cap_rule(n, cp, frame[:, 0], QuadratureSpec.default())
            rotated_alpha = 0.5 * float(weights @ (dirs @ frame[:, 1]) ** 2)
            rotated_beta = 0.5 * float(weights @ (dirs @ frame[:, 0]) ** 2) - rotated_alpha
            assert rotated_alpha == pytest.approx(alpha, rel=1e-8)
            assert rotated_beta == pytest.approx(beta, rel=1e-8)
            assert 1.0 / weights.sum() == pytest.approx(gamma_cap, rel=1e-8)

    def test_one_dimension_rejected(self):
        """Test the two-point sphere has no cap kernel"""
        with pytest.raises(DomainError):
            solve_cap_threshold(3.0, 1)


class TestGetConstants:
    def test_bundle_for_plane(self):
        """Test the bundle carries cap data and C_sp for n = 2"""
        c = get_constants(2, 0.5, 3.0)
        assert c.c_p is not None and c.alpha_p is not None
        assert c.C_sp == pytest.approx(c.c_s * c.gamma_cap, rel=1e-15)
        assert c.c_ns == pytest.approx(mean_kernel_constant(2, 0.5), rel=1e-15)

    def test_no_cap_data_on_the_line(self):
        """Test n = 1 leaves cap fields empty"""
        c = get_constants(1, 0.5, 3.0)
        assert c.c_p is None
        assert c.C_sp is None

    def test_printed_local_constant_differs_at_p3(self):
        """Test the printed closed form vanishes at p = 3 while the derived constant does not"""
        c = get_constants(2, 0.5, 3.0)
        assert c.tilde_c_np_printed == pytest.approx(0.0, abs=1e-15)
        assert c.tilde_c_np > 0.0

    def test_local_constant_at_p2(self):
        """Test tilde c_{n,2} = 1/(2n)"""
        for n in (1, 2, 3):
            assert get_constants(n, 0.5, 2.0).tilde_c_np == pytest.approx(1.0 / (2.0 * n), rel=1e-13)

    @pytest.mark.parametrize("n,s,p", [(4, 0.5, 2.0), (2, 0.0, 2.0), (2, 0.5, 1.0)])
    def test_invalid_arguments(self, n, s, p):
        """Test domain errors for bad n, s or p"""
        with pytest.raises(DomainError):
            get_constants(n, s, p)
