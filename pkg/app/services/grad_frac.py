"""
MeanLab Gradient-Dependent Fractional Operators Service
Cap-kernel fractional p-Laplacian, the fractional infinity Laplacian and their mean kernels
"""
import logging
from typing import Callable, Optional, Tuple

import numpy as np

from app.exceptions import DomainError
from app.schemas import QuadratureSpec, VariantEnum
from app.services.constants import get_constants
from app.services.fields import ScalarField
from app.services.optimizer import DirectionResult, DirectionSearch
from app.services.quadrature import annulus_integrals, cap_rule, growth_tail, ray_integrals, self_checked
from app.utils.linalg import unit

logger = logging.getLogger(__name__)

OPPOSITE = {
    VariantEnum.plus: VariantEnum.minus,
    VariantEnum.minus: VariantEnum.plus,
    VariantEnum.auto: VariantEnum.auto,
}


def _check_order(s: float) -> None:
    if not 0.5 < s < 1.0:
        raise DomainError(f"s must lie in (1/2,1), got {s}", {"s": s})


def _check_cap_dimension(n: int) -> None:
    if n not in (2, 3):
        raise DomainError(f"The cap kernel needs n in {{2,3}}, got n={n}", {"n": n})


class _Probe:
    """Field data at x shared by every direction evaluated in one call"""

    def __init__(self, u: ScalarField, x, s: float, spec: QuadratureSpec):
        self.u = u
        self.x = u.check_point(x)
        self.s = s
        self.spec = spec
        self.ux = float(u.value(self.x))
        self.eta = u.smooth_radius(self.x)
        grad = u.gradient(self.x)
        self.z = None if u.is_critical(self.x) else unit(grad)
        self.bound, self.decay = growth_tail(*u.difference_bound(self.x), 1.0, 2.0 * s)
        self.breakpoints = tuple(u.radial_breakpoints(self.x))

    @property
    def epsilon(self) -> float:
        return self.spec.inner_cutoff or 0.25 * self.eta

    def along(self, rho: np.ndarray, omega: np.ndarray, sign: float) -> np.ndarray:
        return self.u.value(self.x + sign * rho[..., None] * omega[:, None, :])

    def second_difference(self, rho, omega):
        return 2.0 * self.ux - self.along(rho, omega, 1.0) - self.along(rho, omega, -1.0)

    def first_difference(self, rho, omega):
        return self.ux - self.along(rho, omega, 1.0)

    def ray_breaks(self, direction: np.ndarray) -> Tuple[float, ...]:
        forward = self.u.ray_breakpoints(self.x, direction)
        backward = self.u.ray_breakpoints(self.x, -direction)
        return tuple(sorted(set(self.breakpoints + tuple(forward) + tuple(backward))))

    def rays(self, integrand, directions: np.ndarray, scale: float, breakpoints=None) -> np.ndarray:
        """Per-direction int_0^inf h rho^{-1-2s}; h vanishes to second order at 0"""
        return ray_integrals(
            integrand, directions, 2.0 * self.s, 2.0, self.spec, self.epsilon,
            self.decay, scale * self.bound,
            self.breakpoints if breakpoints is None else breakpoints,
            self.u.ray_periods(directions), self.u.wavelength,
        )

    def annuli(self, integrand, directions: np.ndarray, r: float, scale: float, breakpoints=None) -> np.ndarray:
        """Per-direction int_r^inf f (rho^2 - r^2)^{-s} with f = h / rho"""
        return annulus_integrals(
            lambda rho, omega: integrand(rho, omega) / rho, directions, r, self.s, self.spec,
            self.decay, scale * self.bound,
            self.breakpoints if breakpoints is None else breakpoints,
            self.u.ray_periods(directions), self.u.wavelength,
        )


def _optimize(n: int, objective: Callable[[np.ndarray], float], variant: VariantEnum,
              symmetric: bool = True) -> float:
    search = DirectionSearch(n, symmetric=symmetric)
    if variant == VariantEnum.plus:
        return search.maximize(objective).value
    if variant == VariantEnum.minus:
        return search.minimize(objective).value
    return 0.5 * (search.maximize(objective).value + search.minimize(objective).value)


# ============ Cap-kernel operators ============

def _cap_operator(probe: _Probe, axis: np.ndarray, const) -> float:
    dirs, weights = cap_rule(probe.u.n, const.c_p, axis, probe.spec)
    values = probe.rays(probe.second_difference, dirs, 2.0)
    return float(values @ weights) / const.alpha_p


def _cap_mean_gap(probe: _Probe, axis: np.ndarray, r: float, const) -> float:
    """u(x) - M for the cap axis, from the second-difference integrand"""
    dirs, weights = cap_rule(probe.u.n, const.c_p, axis, probe.spec)
    values = probe.annuli(probe.second_difference, dirs, r, 2.0)
    return 0.5 * const.C_sp * r ** (2.0 * probe.s) * float(values @ weights)


def _cap_setup(u: ScalarField, s: float, p: float):
    _check_order(s)
    _check_cap_dimension(u.n)
    return get_constants(u.n, s, p)


def grad_frac_p_laplacian(u: ScalarField, x, s: float, p: float, variant=VariantEnum.auto,
                          spec: Optional[QuadratureSpec] = None) -> float:
    """
    (1/alpha_p) int (2u(x) - u(x+y) - u(x-y)) |y|^{-n-2s} chi_cap(y/|y| . xi) dy

    with xi = z(x) away from critical points; otherwise the sup (plus) or inf
    (minus) over xi, or their average (auto).
    """
    const = _cap_setup(u, s, p)
    variant = VariantEnum(variant)

    def compute(sp: QuadratureSpec) -> float:
        probe = _Probe(u, x, s, sp)
        if probe.z is not None:
            return _cap_operator(probe, probe.z, const)
        return _optimize(u.n, lambda xi: _cap_operator(probe, xi, const), variant)

    return self_checked(compute, spec or QuadratureSpec.default(), "grad_frac_p_laplacian")


def grad_frac_p_mean(u: ScalarField, x, s: float, p: float, r: float, variant=VariantEnum.auto,
                     spec: Optional[QuadratureSpec] = None) -> float:
    """(C_{s,p} r^{2s}/2) int_{|y|>r} (u(x+y)+u(x-y)) |y|^{-n} (|y|^2-r^2)^{-s} chi_cap dy"""
    const = _cap_setup(u, s, p)
    if r <= 0:
        raise DomainError(f"r must be positive, got {r}")
    variant = VariantEnum(variant)

    def compute(sp: QuadratureSpec) -> float:
        probe = _Probe(u, x, s, sp)
        if probe.z is not None:
            return probe.ux - _cap_mean_gap(probe, probe.z, r, const)
        return _optimize(u.n, lambda xi: probe.ux - _cap_mean_gap(probe, xi, r, const), variant)

    return self_checked(compute, spec or QuadratureSpec.default(), "grad_frac_p_mean")


def grad_frac_residual(u: ScalarField, x, s: float, p: float, r: float, variant=VariantEnum.auto,
                       spec: Optional[QuadratureSpec] = None) -> float:
    """
    u(x) - M - (C_{s,p} alpha_p / 2) r^{2s} L, expected O(r^2).

    At a critical point the sup of the mean pairs with the inf of the operator
    (u - sup M = inf (u - M)), so the operator takes the opposite variant.
    """
    const = _cap_setup(u, s, p)
    variant = VariantEnum(variant)
    spec = spec or QuadratureSpec.default()
    probe = _Probe(u, x, s, spec)
    coefficient = 0.5 * const.C_sp * const.alpha_p * r ** (2.0 * s)
    if probe.z is not None:
        gap = _cap_mean_gap(probe, probe.z, r, const)
        operator = _cap_operator(probe, probe.z, const)
    else:
        gap = probe.ux - grad_frac_p_mean(u, x, s, p, r, variant, spec)
        operator = grad_frac_p_laplacian(u, x, s, p, OPPOSITE[variant], spec)
    return gap - coefficient * operator


# ============ Fractional infinity Laplacian ============

def _critical_extremes(probe: _Probe, ray_value: Callable[[np.ndarray], float],
                       batch: Callable[[np.ndarray], np.ndarray]) -> Tuple[DirectionResult, DirectionResult]:
    search = DirectionSearch(probe.u.n, symmetric=False)
    return search.maximize(ray_value, batch), search.minimize(ray_value, batch)


def infinity_frac_laplacian(u: ScalarField, x, s: float, spec: Optional[QuadratureSpec] = None) -> float:
    """
    int_0^inf (2u(x) - u(x+rho z) - u(x-rho z)) rho^{-1-2s} d rho for grad u != 0.

    At a critical point the sup over w of the inf over zeta of the mixed ray
    integral splits into max + min of int (u(x) - u(x+rho w)) rho^{-1-2s}.
    """
    _check_order(s)

    def compute(sp: QuadratureSpec) -> float:
        probe = _Probe(u, x, s, sp)
        if probe.z is not None:
            z = probe.z[None, :]
            return float(probe.rays(probe.second_difference, z, 2.0, probe.ray_breaks(probe.z))[0])

        def single(direction: np.ndarray) -> float:
            return float(probe.rays(probe.first_difference, direction[None, :], 1.0,
                                    probe.ray_breaks(direction))[0])

        high, low = _critical_extremes(probe, single, lambda dirs: probe.rays(probe.first_difference, dirs, 1.0))
        return high.value + low.value

    return self_checked(compute, spec or QuadratureSpec.default(), "infinity_frac_laplacian")


def _infinity_mean_gap(probe: _Probe, r: float) -> float:
    """u(x) - M, from the second (or max+min of first) difference integrals"""
    scale = get_constants(probe.u.n, probe.s).c_s_infinity * r ** (2.0 * probe.s)
    if probe.z is not None:
        z = probe.z[None, :]
        return scale * float(probe.annuli(probe.second_difference, z, r, 2.0, probe.ray_breaks(probe.z))[0])

    def single(direction: np.ndarray) -> float:
        return float(probe.annuli(probe.first_difference, direction[None, :], r, 1.0,
                                  probe.ray_breaks(direction))[0])

    high, low = _critical_extremes(probe, single, lambda dirs: probe.annuli(probe.first_difference, dirs, r, 1.0))
    return scale * (high.value + low.value)


def infinity_frac_mean(u: ScalarField, x, s: float, r: float, spec: Optional[QuadratureSpec] = None) -> float:
    """c_s r^{2s} int_r^inf (u(x+rho w) + u(x-rho zeta)) (rho^2-r^2)^{-s} rho^{-1} d rho, c_s = sin(pi s)/pi"""
    _check_order(s)
    if r <= 0:
        raise DomainError(f"r must be positive, got {r}")

    def compute(sp: QuadratureSpec) -> float:
        probe = _Probe(u, x, s, sp)
        return probe.ux - _infinity_mean_gap(probe, r)

    return self_checked(compute, spec or QuadratureSpec.default(), "infinity_frac_mean")


def infinity_frac_residual(u: ScalarField, x, s: float, r: float, spec: Optional[QuadratureSpec] = None) -> float:
    """u(x) - M - c_s r^{2s} L_inf, expected O(r^2)"""
    _check_order(s)
    spec = spec or QuadratureSpec.default()
    probe = _Probe(u, x, s, spec)
    coefficient = get_constants(u.n, s).c_s_infinity * r ** (2.0 * s)
    return _infinity_mean_gap(probe, r) - coefficient * infinity_frac_laplacian(u, x, s, spec)
