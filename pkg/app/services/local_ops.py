"""
MeanLab Local Operators Service
Classical (s = 1) operators and local mean kernels: limit targets and expansion baselines
"""
import logging
from typing import Optional

import numpy as np
from pydantic import ValidationError

from app.exceptions import DegenerateKernelError, DomainError
from app.schemas import LocalMeanParams, QuadratureSpec, VariantEnum
from app.services.constants import cap_moments, solve_cap_threshold
from app.services.fields import ScalarField
from app.services.optimizer import DirectionSearch
from app.services.quadrature import cap_rule, directions_for
from app.utils.linalg import hessian_extremes, unit

logger = logging.getLogger(__name__)

DEGENERATE_WEIGHT = 1e-14


def signed_power(a: np.ndarray, q: float) -> np.ndarray:
    """phi(a) = |a|^(q-1) a, the (q-1)-power with sign"""
    return np.abs(a) ** (q - 1.0) * np.sign(a)


def _variant(variant) -> VariantEnum:
    return VariantEnum(variant) if variant is not None else VariantEnum.auto


def _gradient_direction(u: ScalarField, x: np.ndarray) -> Optional[np.ndarray]:
    """z(x) = grad u / |grad u|, or None at a critical point"""
    if u.is_critical(x):
        return None
    return unit(u.gradient(x))


# ============ Pointwise operators ============

def laplacian(u: ScalarField, x) -> float:
    x = u.check_point(x)
    return float(np.trace(u.hessian(x)))


def infinity_laplacian(u: ScalarField, x, variant=VariantEnum.auto) -> float:
    """
    <D^2u z, z> with z the normalized gradient. At a critical point the plus
    (minus) variant is the largest (smallest) Hessian eigenvalue; auto averages them.
    """
    x = u.check_point(x)
    hess = u.hessian(x)
    z = _gradient_direction(u, x)
    if z is not None:
        return float(z @ hess @ z)
    lowest, highest = hessian_extremes(hess)
    variant = _variant(variant)
    if variant == VariantEnum.plus:
        return highest
    if variant == VariantEnum.minus:
        return lowest
    return 0.5 * (lowest + highest)


def normalized_p_laplacian(u: ScalarField, x, p: float, variant=VariantEnum.auto) -> float:
    """Delta u + (p-2) Delta_inf u"""
    if p < 2:
        raise DomainError(f"p must be at least 2, got {p}")
    return laplacian(u, x) + (p - 2.0) * infinity_laplacian(u, x, variant)


def p_laplacian(u: ScalarField, x, p: float) -> float:
    """div(|grad u|^{p-2} grad u) = |grad u|^{p-2} (Delta u + (p-2) Delta_inf u)"""
    if p < 2:
        raise DomainError(f"p must be at least 2, got {p}")
    x = u.check_point(x)
    if p == 2.0:
        return laplacian(u, x)
    if u.is_critical(x):
        raise DomainError(
            "The p-Laplacian is not defined through z(x) at a critical point; "
            "use normalized_p_laplacian with a plus/minus variant",
            {"x": x.tolist(), "p": p},
        )
    grad_norm = float(np.linalg.norm(u.gradient(x)))
    return grad_norm ** (p - 2.0) * normalized_p_laplacian(u, x, p)


# ============ Local mean kernels ============

def local_mean_params(u: ScalarField, x: np.ndarray, r: float, p: float = 2.0, variant=None) -> LocalMeanParams:
    """Validated kernel parameters; r must stay below half the smoothness radius at x"""
    try:
        params = LocalMeanParams(r=r, p=p, variant=_variant(variant))
    except ValidationError as e:
        raise DomainError(f"Invalid local mean parameters: {e.errors()[0]['msg']}", {"r": r, "p": p})
    eta = u.smooth_radius(x)
    if params.r >= 0.5 * eta:
        raise DomainError(f"r={r:g} must lie below half the smoothness radius {eta:g}", {"r": r, "eta": eta})
    return params


def local_p_sphere_integral(u: ScalarField, x, r: float, p: float,
                            spec: Optional[QuadratureSpec] = None) -> float:
    """int_{S^{n-1}} |u(x)-u(x-r w)|^{p-2} (u(x)-u(x-r w)) dw; leading order r^p"""
    spec = spec or QuadratureSpec.default()
    x = u.check_point(x)
    dirs, weights = directions_for(u.n, spec, u.gradient(x))
    diff = u.value(x) - u.value(x - r * dirs)
    return float(signed_power(diff, p) @ weights)


def local_p_mean(u: ScalarField, x, r: float, p: float,
                 spec: Optional[QuadratureSpec] = None) -> float:
    """
    Sphere average of u(x - r w) with weights |u(x) - u(x - r w)|^{p-2}.

    Evaluated as u(x) minus the weighted average of the differences so that
    small-r residuals keep their digits.
    """
    spec = spec or QuadratureSpec.default()
    x = u.check_point(x)
    local_mean_params(u, x, r, p)
    dirs, weights = directions_for(u.n, spec, u.gradient(x))
    ux = float(u.value(x))
    diff = ux - u.value(x - r * dirs)
    kernel = np.abs(diff) ** (p - 2.0)
    denominator = float(kernel @ weights)
    if denominator < DEGENERATE_WEIGHT:
        raise DegenerateKernelError(
            f"Weight integral {denominator:.3e} below {DEGENERATE_WEIGHT:g}: u is locally constant on the sphere",
            {"r": r, "p": p, "x": x.tolist()},
        )
    return ux - float((kernel * diff) @ weights) / denominator


def _cap_mean(u: ScalarField, x: np.ndarray, r: float, axis: np.ndarray, p: float,
              spec: QuadratureSpec) -> float:
    threshold = solve_cap_threshold(p, u.n)
    _, _, gamma_cap = cap_moments(threshold, u.n)
    dirs, weights = cap_rule(u.n, threshold, axis, spec)
    ux = float(u.value(x))
    second = u.value(x + r * dirs) + u.value(x - r * dirs) - 2.0 * ux
    return ux + 0.5 * gamma_cap * float(second @ weights)


def _extremize(u: ScalarField, objective, variant: VariantEnum) -> float:
    search = DirectionSearch(u.n, symmetric=True)
    if variant == VariantEnum.plus:
        return search.maximize(objective).value
    if variant == VariantEnum.minus:
        return search.minimize(objective).value
    return 0.5 * (search.maximize(objective).value + search.minimize(objective).value)


def local_grad_p_mean(u: ScalarField, x, r: float, p: float, variant=VariantEnum.auto,
                      spec: Optional[QuadratureSpec] = None) -> float:
    """
    (gamma_cap/2) int over the cap {w . z >= c_p} of u(x + r w) + u(x - r w).
    At a critical point the cap axis is optimized (sup for plus, inf for minus).
    """
    if u.n not in (2, 3):
        raise DomainError(f"The cap kernel needs n in {{2,3}}, got n={u.n}")
    spec = spec or QuadratureSpec.default()
    x = u.check_point(x)
    params = local_mean_params(u, x, r, p, variant)
    z = _gradient_direction(u, x)
    if z is not None:
        return _cap_mean(u, x, r, z, p, spec)
    return _extremize(u, lambda xi: _cap_mean(u, x, r, xi, p, spec), params.variant)


def local_infinity_mean(u: ScalarField, x, r: float, variant=VariantEnum.auto) -> float:
    """(u(x + r z) + u(x - r z)) / 2; at a critical point the sup/inf over z"""
    x = u.check_point(x)
    params = local_mean_params(u, x, r, variant=variant)

    def two_point(direction: np.ndarray) -> float:
        return 0.5 * float(u.value(x + r * direction) + u.value(x - r * direction))

    z = _gradient_direction(u, x)
    if z is not None:
        return two_point(z)
    return _extremize(u, two_point, params.variant)
