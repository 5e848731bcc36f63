"""
MeanLab Fractional p-Laplacian Service
The variational fractional p-Laplacian and the (s,p)-mean kernel with its normalizing weight
"""
import logging
from typing import Optional, Tuple

import numpy as np

from app.exceptions import DegenerateKernelError, DomainError
from app.schemas import OperatorParams, QuadratureSpec
from app.services.constants import mean_kernel_constant
from app.services.fields import ScalarField
from app.services.local_ops import signed_power
from app.services.quadrature import (
    annulus_integrals,
    ball_rule,
    directions_for,
    growth_tail,
    ray_integrals,
    self_checked,
)

logger = logging.getLogger(__name__)

DEGENERATE_WEIGHT = 1e-14


class RayContext:
    """Evaluation point, sphere rule and tail data shared by the radial integrals of one call"""

    def __init__(self, u: ScalarField, x, spec: QuadratureSpec, axis: Optional[np.ndarray] = None):
        self.u = u
        self.x = u.check_point(x)
        self.spec = spec
        self.ux = float(u.value(self.x))
        self.eta = u.smooth_radius(self.x)
        self.difference_bound = u.difference_bound(self.x)
        self.breakpoints = tuple(u.radial_breakpoints(self.x))
        self.wavelength = u.wavelength
        self.directions, self.weights = directions_for(
            u.n, spec, u.gradient(self.x) if axis is None else axis
        )
        self.periods = u.ray_periods(self.directions)

    def shifted(self, rho: np.ndarray, omega: np.ndarray, sign: float = 1.0) -> np.ndarray:
        """u(x + sign * rho * omega) for rho of shape (m, K) and omega of shape (m, n)"""
        return self.u.value(self.x + sign * rho[..., None] * omega[:, None, :])

    def tail(self, power: float, kappa: float) -> Tuple[float, float]:
        return growth_tail(*self.difference_bound, power, kappa)

    def inner_cutoff(self, r: Optional[float]) -> float:
        if r is not None:
            return min(r, 0.25 * self.eta)
        return self.spec.inner_cutoff or 0.25 * self.eta

    def sphere_sum(self, values: np.ndarray) -> float:
        return float(np.asarray(values) @ self.weights)


def _validate(u: ScalarField, params: OperatorParams, need_r: bool = False) -> None:
    if params.n != u.n:
        raise DomainError(f"Field dimension {u.n} does not match n={params.n}")
    if need_r and params.r is None:
        raise DomainError("This operator needs a kernel radius r")


def _spec(spec: Optional[QuadratureSpec]) -> QuadratureSpec:
    return spec or QuadratureSpec.default()


# ============ Fractional p-Laplacian ============

def _symmetrized_difference(ctx: RayContext, p: float):
    def integrand(rho, omega):
        ahead = ctx.ux - ctx.shifted(rho, omega, -1.0)
        behind = ctx.ux - ctx.shifted(rho, omega, 1.0)
        return 0.5 * (signed_power(ahead, p) + signed_power(behind, p))
    return integrand


def _frac_p_rays(ctx: RayContext, s: float, p: float, r: Optional[float], mask=None) -> np.ndarray:
    sigma = s * p
    bound, decay = ctx.tail(p - 1.0, sigma)
    base = _symmetrized_difference(ctx, p)
    breakpoints = ctx.breakpoints
    integrand = base
    if mask is not None:
        breakpoints = breakpoints + (r,)

        def integrand(rho, omega):
            return np.where(mask(rho), base(rho, omega), 0.0)

    return ray_integrals(
        integrand, ctx.directions, sigma, p, ctx.spec, ctx.inner_cutoff(r),
        decay, bound, breakpoints, ctx.periods, ctx.wavelength,
    )


def frac_p_laplacian(u: ScalarField, params: OperatorParams, spec: Optional[QuadratureSpec] = None) -> float:
    """
    lim_{eps -> 0} int_{|y|>eps} |u(x)-u(x-y)|^{p-2} (u(x)-u(x-y)) |y|^{-n-sp} dy.

    The integrand is symmetrized in y so that it vanishes like |y|^p at the
    origin; no principal value is needed after that.
    """
    _validate(u, params)

    def compute(sp: QuadratureSpec) -> float:
        ctx = RayContext(u, params.x, sp)
        return ctx.sphere_sum(_frac_p_rays(ctx, params.s, params.p, params.r))

    value = self_checked(compute, _spec(spec), "frac_p_laplacian")
    logger.debug(f"frac_p_laplacian(s={params.s}, p={params.p}, x={params.x}) = {value:.12e}")
    return value


def frac_p_split(u: ScalarField, params: OperatorParams,
                 spec: Optional[QuadratureSpec] = None) -> Tuple[float, float]:
    """(L_r u(x), lim_eps (L_eps - L_r) u(x)): the far field beyond r and the near ball"""
    _validate(u, params, need_r=True)
    r = params.r
    ctx = RayContext(u, params.x, _spec(spec))
    far = ctx.sphere_sum(_frac_p_rays(ctx, params.s, params.p, r, mask=lambda rho: rho >= r))
    near = ctx.sphere_sum(_frac_p_rays(ctx, params.s, params.p, r, mask=lambda rho: rho < r))
    return far, near


# ============ (s,p)-mean kernel ============

def _annulus_sum(ctx: RayContext, f, r: float, s: float, power: float, kappa: float) -> float:
    bound, decay = ctx.tail(power, kappa)
    values = annulus_integrals(
        f, ctx.directions, r, s, ctx.spec, decay, bound,
        ctx.breakpoints, ctx.periods, ctx.wavelength,
    )
    return ctx.sphere_sum(values)


def _weight_integral(ctx: RayContext, s: float, p: float, r: float) -> float:
    def f(rho, omega):
        diff = ctx.ux - ctx.shifted(rho, omega, -1.0)
        return np.abs(diff) ** (p - 2.0) * rho ** (-s * (p - 2.0) - 1.0)
    return _annulus_sum(ctx, f, r, s, p - 2.0, s * p)


def _difference_integral(ctx: RayContext, s: float, p: float, r: float) -> float:
    """int_{|y|>r} phi_p(u(x)-u(x-y)) |y|^{-n-s(p-2)} (|y|^2-r^2)^{-s} dy"""
    def f(rho, omega):
        diff = ctx.ux - ctx.shifted(rho, omega, -1.0)
        return signed_power(diff, p) * rho ** (-s * (p - 2.0) - 1.0)
    return _annulus_sum(ctx, f, r, s, p - 1.0, s * p)


def d_rsp(u: ScalarField, params: OperatorParams, spec: Optional[QuadratureSpec] = None) -> float:
    """int_{|y|>r} (|u(x)-u(x-y)|/|y|^s)^{p-2} |y|^{-n} (|y|^2-r^2)^{-s} dy"""
    _validate(u, params, need_r=True)

    def compute(sp: QuadratureSpec) -> float:
        ctx = RayContext(u, params.x, sp)
        return _weight_integral(ctx, params.s, params.p, params.r)

    return self_checked(compute, _spec(spec), "d_rsp")


def _mean_parts(u: ScalarField, params: OperatorParams, spec: QuadratureSpec) -> Tuple[float, float, float]:
    ctx = RayContext(u, params.x, spec)
    weight = _weight_integral(ctx, params.s, params.p, params.r)
    if weight < DEGENERATE_WEIGHT:
        raise DegenerateKernelError(
            f"Weight integral {weight:.3e} below {DEGENERATE_WEIGHT:g}",
            {"r": params.r, "s": params.s, "p": params.p},
        )
    return ctx.ux, weight, _difference_integral(ctx, params.s, params.p, params.r)


def m_rsp(u: ScalarField, params: OperatorParams, spec: Optional[QuadratureSpec] = None) -> float:
    """
    Weighted average of u(x-y) over |y| > r, normalized by d_rsp.
    Computed as u(x) - (difference integral) / d_rsp.
    """
    _validate(u, params, need_r=True)

    def compute(sp: QuadratureSpec) -> float:
        ux, weight, difference = _mean_parts(u, params, sp)
        return ux - difference / weight

    return self_checked(compute, _spec(spec), "m_rsp")


def frac_p_residual(u: ScalarField, params: OperatorParams, spec: Optional[QuadratureSpec] = None) -> float:
    """d_rsp * (u(x) - m_rsp) - frac_p_laplacian, with the first term as one integral"""
    _validate(u, params, need_r=True)

    def compute(sp: QuadratureSpec) -> float:
        ctx = RayContext(u, params.x, sp)
        scaled_gap = _difference_integral(ctx, params.s, params.p, params.r)
        return scaled_gap - ctx.sphere_sum(_frac_p_rays(ctx, params.s, params.p, params.r))

    return self_checked(compute, _spec(spec), "frac_p_residual")


def scaled_mean_gap(u: ScalarField, params: OperatorParams, spec: Optional[QuadratureSpec] = None) -> Tuple[float, float]:
    """(d_rsp * (u(x) - m_rsp) from the two separate quadratures, the same from one integral)"""
    _validate(u, params, need_r=True)
    ux, weight, difference = _mean_parts(u, params, _spec(spec))
    mean = ux - difference / weight
    return weight * (ux - mean), difference


def linear_frac_mean(u: ScalarField, x, n: int, s: float, r: float,
                     spec: Optional[QuadratureSpec] = None) -> float:
    """c(n,s) r^{2s} int_{|y|>r} u(x-y) (|y|^2-r^2)^{-s} |y|^{-n} dy"""
    if n != u.n:
        raise DomainError(f"Field dimension {u.n} does not match n={n}")
    if r <= 0:
        raise DomainError(f"r must be positive, got {r}")
    ctx = RayContext(u, x, _spec(spec))
    d0, d1, gamma = ctx.difference_bound
    bound, decay = growth_tail(abs(ctx.ux) + d0, d1, gamma, 1.0, 2.0 * s)

    def f(rho, omega):
        return ctx.shifted(rho, omega, -1.0) / rho

    values = annulus_integrals(f, ctx.directions, r, s, ctx.spec, decay, bound,
                               ctx.breakpoints, ctx.periods, ctx.wavelength)
    return mean_kernel_constant(n, s) * r ** (2.0 * s) * ctx.sphere_sum(values)


def witness_lower_bound(u: ScalarField, x, s: float, p: float, z_x, r_x: float,
                        spec: Optional[QuadratureSpec] = None) -> float:
    """c_x = int_{B_{r_x}(z_x)} |u(x)-u(y)|^{p-2} |x-y|^{-n-sp} dy; d_rsp >= c_x for r < r_x/2"""
    spec = _spec(spec)
    x = u.check_point(x)
    z_x = np.asarray(z_x, dtype=float)
    if np.linalg.norm(z_x - x) <= r_x:
        raise DomainError("The witness ball must not contain x", {"z_x": z_x.tolist(), "r_x": r_x})
    offsets, weights = ball_rule(u.n, r_x, spec)
    y = z_x + offsets
    gap = np.abs(float(u.value(x)) - u.value(y)) ** (p - 2.0)
    dist = np.linalg.norm(y - x, axis=-1)
    return float((gap * dist ** (-u.n - s * p)) @ weights)
