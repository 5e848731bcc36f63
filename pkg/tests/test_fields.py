"""
Tests for the field corpus
"""
import numpy as np
import pytest
from hypothesis import given, settings as hypothesis_settings, strategies as st

from app.exceptions import ConfigError, DomainError
from app.schemas import FieldKindEnum
from app.services.fields import (
    ConstantField,
    LinearField,
    OffsetField,
    TranslatedField,
    field_corpus,
    make_bump,
    make_cone,
    make_gaussian,
    validate_derivatives,
)

coordinates = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)


class TestDerivatives:
    """Analytic derivatives against central differences"""

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_default_members(self, n):
        """Test every default corpus member inside its length scale"""
        rng = np.random.default_rng(7)
        for field in field_corpus.default_members(n):
            scale = field.length_scale
            points = rng.uniform(-scale, scale, size=(20, n))
            report = validate_derivatives(field, points)
            assert report.passed, report.to_dict()

    def test_cone_away_from_pole(self, cone_2d):
        """Test the cone field on an annulus around its pole"""
        angles = np.linspace(0.0, 2.0 * np.pi, 12, endpoint=False)
        points = np.stack([np.cos(angles), np.sin(angles)], axis=1) * 0.8
        assert validate_derivatives(cone_2d, points).passed

    def test_bump_near_boundary(self):
        """Test the bump field close to (but inside) its support"""
        bump = make_bump(np.zeros(2), 1.0)
        points = np.array([[0.3, 0.2], [0.6, -0.1], [-0.2, 0.7]])
        assert validate_derivatives(bump, points).passed


class TestGaussianField:
    def test_value_and_gradient(self, gaussian_2d):
        """Test u(0) = 1 with zero gradient"""
        assert gaussian_2d.value(np.zeros(2)) == pytest.approx(1.0)
        assert np.allclose(gaussian_2d.gradient(np.zeros(2)), 0.0)
        assert gaussian_2d.is_critical(np.zeros(2))

    def test_batched_shapes(self, gaussian_2d):
        """Test (..., n) batches map to (...), (..., n) and (..., n, n)"""
        points = np.zeros((4, 5, 2))
        assert gaussian_2d.value(points).shape == (4, 5)
        assert gaussian_2d.gradient(points).shape == (4, 5, 2)
        assert gaussian_2d.hessian(points).shape == (4, 5, 2, 2)

    @given(coordinates, coordinates)
    @hypothesis_settings(max_examples=50, deadline=None)
    def test_bounded_by_sup_norm(self, a, b):
        """Test |u| <= sup_norm everywhere"""
        u = make_gaussian(np.zeros(2), 0.7)
        assert abs(float(u.value(np.array([a, b])))) <= u.sup_norm


class TestConeField:
    def test_guard_around_pole(self, cone_2d):
        """Test derivatives are refused at the pole"""
        with pytest.raises(DomainError):
            cone_2d.check_point(np.zeros(2))
        with pytest.raises(DomainError):
            cone_2d.gradient(np.zeros(2))

    def test_value_at_pole(self, cone_2d):
        """Test the profile itself is defined at the pole"""
        assert float(cone_2d.value(np.zeros(2))) == 0.0

    def test_order_domain(self):
        """Test s <= 1/2 is rejected"""
        with pytest.raises(DomainError):
            make_cone(1.0, 0.0, np.zeros(2), 0.5)

    def test_breakpoints(self, cone_2d):
        """Test the pole distance is a radial breakpoint and a ray breakpoint toward it"""
        x = np.array([1.0, 0.0])
        assert cone_2d.radial_breakpoints(x) == (1.0,)
        assert cone_2d.ray_breakpoints(x, np.array([-1.0, 0.0])) == (1.0,)
        assert cone_2d.ray_breakpoints(x, np.array([1.0, 0.0])) == ()


class TestDerivedFields:
    @given(coordinates, coordinates)
    @hypothesis_settings(max_examples=30, deadline=None)
    def test_translation(self, a, b):
        """Test TranslatedField(u, h)(x + h) = u(x)"""
        base = make_gaussian(np.array([0.2, -0.1]), 1.3)
        h = np.array([0.7, -1.1])
        shifted = TranslatedField(base, h)
        x = np.array([a, b])
        assert float(shifted.value(x + h)) == pytest.approx(float(base.value(x)), rel=1e-12, abs=1e-300)

    def test_offset(self, gaussian_2d):
        """Test OffsetField scales derivatives and the difference bound"""
        field = OffsetField(gaussian_2d, scale=-2.0, shift=3.0)
        x = np.array([0.4, 0.1])
        assert float(field.value(x)) == pytest.approx(-2.0 * float(gaussian_2d.value(x)) + 3.0)
        assert np.allclose(field.hessian(x), -2.0 * gaussian_2d.hessian(x))
        assert field.difference_bound(x)[0] == pytest.approx(4.0)

    def test_nonconstant_witness(self, gaussian_2d, regular_point_2d):
        """Test the witness ball excludes x and u differs from u(x) at its center"""
        z, radius = gaussian_2d.nonconstant_witness(regular_point_2d)
        assert np.linalg.norm(z - regular_point_2d) > radius
        assert abs(float(gaussian_2d.value(z) - gaussian_2d.value(regular_point_2d))) > 0.1

    def test_linear_and_constant(self):
        """Test the linear field's growth bound and the constant field's flatness"""
        linear = LinearField(np.array([1.0, 2.0]))
        assert linear.difference_bound(np.zeros(2)) == (0.0, pytest.approx(np.sqrt(5.0)), 1.0)
        constant = ConstantField(2, 3.0)
        assert constant.is_critical(np.ones(2))
        assert float(constant.value(np.ones(2))) == 3.0


class TestFieldCorpus:
    def test_kinds(self):
        """Test every field kind is addressable"""
        assert set(field_corpus.kinds()) == {k.value for k in FieldKindEnum}

    def test_build_with_params(self):
        """Test parameters reach the constructed field"""
        field = field_corpus.build("gaussian", 2, params={"center": [1.0, 2.0], "width": 0.5})
        assert field.params() == {"center": [1.0, 2.0], "width": 0.5}

    def test_unknown_kind(self):
        """Test an unknown kind is a config error naming the field"""
        with pytest.raises(ConfigError) as info:
            field_corpus.build("sawtooth", 1)
        assert info.value.field == "field.kind"

    def test_bad_params(self):
        """Test malformed parameters are a config error"""
        with pytest.raises(ConfigError):
            field_corpus.build("gaussian", 2, params={"center": [1.0, 2.0, 3.0]})

    def test_cone_order_forwarded(self):
        """Test the run order s reaches the cone exponent"""
        field = field_corpus.build("cone", 2, 0.75)
        assert field.exponent == pytest.approx(0.5)
