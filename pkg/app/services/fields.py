"""
MeanLab Fields Service
Smooth bounded test fields with analytic derivatives, and the corpus registry
"""
import logging
from abc import ABC, abstractmethod
from typing import Any, Callable, Dict, Iterable, List, Optional, Tuple

import numpy as np

from app.config import settings
from app.exceptions import ConfigError, DomainError
from app.schemas import FieldKindEnum
from app.utils.linalg import as_point

logger = logging.getLogger(__name__)


class DerivativeReport:
    """Outcome of comparing analytic derivatives with central differences"""
    def __init__(
        self,
        field: str,
        gradient_error: float,
        hessian_error: float,
        threshold: float,
        points: int,
    ):
        self.field = field
        self.gradient_error = gradient_error
        self.hessian_error = hessian_error
        self.threshold = threshold
        self.points = points
        self.passed = max(gradient_error, hessian_error) <= threshold

    def to_dict(self) -> Dict[str, Any]:
        return {
            "field": self.field,
            "gradient_error": self.gradient_error,
            "hessian_error": self.hessian_error,
            "threshold": self.threshold,
            "points": self.points,
            "pass": self.passed,
        }


class ScalarField(ABC):
    """
    A C^2 field on R^n. value/gradient/hessian accept points of shape (..., n)
    and return shapes (...), (..., n) and (..., n, n).
    """

    kind: FieldKindEnum

    def __init__(self, n: int):
        if n not in (1, 2, 3):
            raise DomainError(f"Fields are supported for n in {{1,2,3}}, got n={n}")
        self.n = n

    @abstractmethod
    def value(self, points: np.ndarray) -> np.ndarray:
        pass

    @abstractmethod
    def gradient(self, points: np.ndarray) -> np.ndarray:
        pass

    @abstractmethod
    def hessian(self, points: np.ndarray) -> np.ndarray:
        pass

    @property
    @abstractmethod
    def sup_norm(self) -> float:
        pass

    @property
    @abstractmethod
    def length_scale(self) -> float:
        """Characteristic length over which the field varies"""
        pass

    @abstractmethod
    def params(self) -> Dict[str, Any]:
        pass

    def smooth_radius(self, x: np.ndarray) -> float:
        """Radius eta of a ball around x on which Taylor expansions are trusted"""
        return 2.0 * self.length_scale

    def check_point(self, x: np.ndarray) -> np.ndarray:
        return as_point(x, self.n)

    def difference_bound(self, x: np.ndarray) -> Tuple[float, float, float]:
        """(d0, d1, gamma) with |u(x+y) - u(x)| <= d0 + d1 |y|^gamma"""
        return 2.0 * self.sup_norm, 0.0, 0.0

    def radial_breakpoints(self, x: np.ndarray) -> Tuple[float, ...]:
        """Distances from x at which rays may cross a non-smooth feature"""
        return ()

    def ray_breakpoints(self, x: np.ndarray, direction: np.ndarray) -> Tuple[float, ...]:
        """Positions rho > 0 along x + rho*direction where the profile is non-smooth"""
        return ()

    @property
    def wavelength(self) -> Optional[float]:
        return None

    def ray_periods(self, directions: np.ndarray) -> Optional[np.ndarray]:
        """Period of u(x + rho*omega) in rho per direction, for oscillatory fields"""
        return None

    def nonconstant_witness(self, x: np.ndarray) -> Tuple[np.ndarray, float]:
        """
        A ball B_{r_x}(z_x) away from x on which u differs from u(x).
        Picks the probe point with the largest |u(z) - u(x)|.
        """
        x = as_point(x, self.n)
        scale = self.length_scale
        best, best_gap = None, -1.0
        for k in range(self.n):
            for factor in (1.0, -1.0, 2.0, -2.0):
                z = x.copy()
                z[k] += factor * scale
                gap = abs(float(self.value(z)) - float(self.value(x)))
                if gap > best_gap:
                    best, best_gap = z, gap
        return best, 0.25 * scale

    def is_critical(self, x: np.ndarray) -> bool:
        grad = self.gradient(as_point(x, self.n))
        return bool(np.linalg.norm(grad) < settings.CRITICAL_GRADIENT_RTOL * (1.0 + self.sup_norm))

    def describe(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "n": self.n, **self.params()}


class GaussianField(ScalarField):
    """u(x) = exp(-|x - center|^2 / width^2)"""

    kind = FieldKindEnum.gaussian

    def __init__(self, center, width: float = 1.0):
        self.center = as_point(center)
        super().__init__(self.center.shape[0])
        if width <= 0:
            raise DomainError(f"Gaussian width must be positive, got {width}")
        self.width = float(width)

    def value(self, points):
        d = np.asarray(points, dtype=float) - self.center
        return np.exp(-np.sum(d * d, axis=-1) / self.width ** 2)

    def gradient(self, points):
        d = np.asarray(points, dtype=float) - self.center
        u = self.value(points)
        return (-2.0 / self.width ** 2) * u[..., None] * d

    def hessian(self, points):
        d = np.asarray(points, dtype=float) - self.center
        u = self.value(points)[..., None, None]
        w2 = self.width ** 2
        outer = d[..., :, None] * d[..., None, :]
        return u * (4.0 * outer / w2 ** 2 - 2.0 * np.eye(self.n) / w2)

    @property
    def sup_norm(self) -> float:
        return 1.0

    @property
    def length_scale(self) -> float:
        return self.width

    def params(self):
        return {"center": self.center.tolist(), "width": self.width}


class ConeField(ScalarField):
    """
    u(x) = A |x - pole|^(2s-1) + B, the infinity-harmonic profile.
    Unbounded; its sup norm is taken over a ball of radius box_radius around the pole.
    """

    kind = FieldKindEnum.cone

    def __init__(self, amplitude: float, offset: float, pole, s: float,
                 box_radius: float = 10.0, guard_radius: float = 1e-6):
        self.pole = as_point(pole)
        super().__init__(self.pole.shape[0])
        if not 0.5 < s < 1.0:
            raise DomainError(f"s must lie in (1/2,1) for the cone field, got {s}")
        self.amplitude = float(amplitude)
        self.offset = float(offset)
        self.s = float(s)
        self.exponent = 2.0 * s - 1.0
        self.box_radius = float(box_radius)
        self.guard_radius = float(guard_radius)

    def _distance(self, points):
        d = np.asarray(points, dtype=float) - self.pole
        return d, np.sqrt(np.sum(d * d, axis=-1))

    def _guard(self, dist):
        if np.any(dist < self.guard_radius):
            raise DomainError(
                f"Cone derivatives requested within {self.guard_radius:g} of the pole",
                {"pole": self.pole.tolist()},
            )

    def value(self, points):
        _, dist = self._distance(points)
        return self.amplitude * dist ** self.exponent + self.offset

    def gradient(self, points):
        d, dist = self._distance(points)
        self._guard(dist)
        factor = self.amplitude * self.exponent * dist ** (self.exponent - 2.0)
        return factor[..., None] * d

    def hessian(self, points):
        d, dist = self._distance(points)
        self._guard(dist)
        e = d / dist[..., None]
        factor = (self.amplitude * self.exponent * dist ** (self.exponent - 2.0))[..., None, None]
        outer = e[..., :, None] * e[..., None, :]
        return factor * (np.eye(self.n) + (self.exponent - 2.0) * outer)

    def check_point(self, x):
        x = as_point(x, self.n)
        self._guard(np.linalg.norm(x - self.pole))
        return x

    @property
    def sup_norm(self) -> float:
        return abs(self.amplitude) * self.box_radius ** self.exponent + abs(self.offset)

    @property
    def length_scale(self) -> float:
        return 1.0

    def smooth_radius(self, x):
        return 0.5 * float(np.linalg.norm(as_point(x, self.n) - self.pole))

    def difference_bound(self, x):
        # |a^g - b^g| <= |a - b|^g for g in (0,1)
        return 0.0, abs(self.amplitude), self.exponent

    def radial_breakpoints(self, x):
        return (float(np.linalg.norm(as_point(x, self.n) - self.pole)),)

    def ray_breakpoints(self, x, direction):
        t = float(np.dot(self.pole - as_point(x, self.n), direction))
        return (t,) if t > 0 else ()

    def nonconstant_witness(self, x):
        x = as_point(x, self.n)
        z = self.pole + 2.0 * (x - self.pole)
        return z, 0.25 * float(np.linalg.norm(x - self.pole))

    def params(self):
        return {"amplitude": self.amplitude, "offset": self.offset, "pole": self.pole.tolist(),
                "s": self.s, "box_radius": self.box_radius}


class BumpField(ScalarField):
    """u(x) = exp(1 - 1/(1 - |x-c|^2/R^2)) inside B_R(c), 0 outside"""

    kind = FieldKindEnum.bump

    def __init__(self, center, radius: float = 1.0):
        self.center = as_point(center)
        super().__init__(self.center.shape[0])
        if radius <= 0:
            raise DomainError(f"Bump radius must be positive, got {radius}")
        self.radius = float(radius)

    def _parts(self, points):
        d = np.asarray(points, dtype=float) - self.center
        t = 1.0 - np.sum(d * d, axis=-1) / self.radius ** 2
        inside = t > 1e-3
        safe_t = np.where(inside, t, 1.0)
        u = np.where(inside, np.exp(1.0 - 1.0 / safe_t), 0.0)
        return d, safe_t, u

    def value(self, points):
        return self._parts(points)[2]

    def gradient(self, points):
        d, t, u = self._parts(points)
        return (-2.0 * u / (self.radius ** 2 * t ** 2))[..., None] * d

    def hessian(self, points):
        d, t, u = self._parts(points)
        r2 = self.radius ** 2
        iso = (-2.0 * u / (r2 * t ** 2))[..., None, None] * np.eye(self.n)
        radial = (u * (4.0 / (r2 ** 2 * t ** 4) - 8.0 / (r2 ** 2 * t ** 3)))[..., None, None]
        return iso + radial * (d[..., :, None] * d[..., None, :])

    @property
    def sup_norm(self) -> float:
        return 1.0

    @property
    def length_scale(self) -> float:
        return 0.5 * self.radius

    def radial_breakpoints(self, x):
        dist = float(np.linalg.norm(as_point(x, self.n) - self.center))
        return tuple(b for b in (abs(self.radius - dist), self.radius + dist) if b > 0)

    def params(self):
        return {"center": self.center.tolist(), "radius": self.radius}


def _smooth_step(t: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """C^infinity step psi(t) = f(t)/(f(t)+f(1-t)), f(t) = exp(-1/t), with psi' and psi''"""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    a = np.clip(t, 1e-12, None)
    b = np.clip(1.0 - t, 1e-12, None)
    fa, fb = np.exp(-1.0 / a), np.exp(-1.0 / b)
    dfa, dfb = fa / a ** 2, fb / b ** 2
    d2fa, d2fb = fa * (1.0 / a ** 4 - 2.0 / a ** 3), fb * (1.0 / b ** 4 - 2.0 / b ** 3)
    total = fa + fb
    d_total = dfa - dfb
    d2_total = d2fa + d2fb
    psi = fa / total
    dpsi = (dfa * total - fa * d_total) / total ** 2
    d2psi = (d2fa * total - fa * d2_total) / total ** 2 - 2.0 * d_total * (dfa * total - fa * d_total) / total ** 3
    return psi, dpsi, d2psi


class WindowedPolyField(ScalarField):
    """
    u(x) = P(x) W(|x - center|) with P a quadratic polynomial around center and W a
    C^infinity window equal to 1 on B_inner and 0 outside B_outer.
    """

    kind = FieldKindEnum.windowed_poly

    def __init__(self, center, constant: float = 0.0, linear=None, quadratic=None,
                 inner: float = 1.0, outer: float = 2.0):
        self.center = as_point(center)
        super().__init__(self.center.shape[0])
        if not 0 < inner < outer:
            raise DomainError(f"Window needs 0 < inner < outer, got ({inner}, {outer})")
        self.constant = float(constant)
        self.linear = np.zeros(self.n) if linear is None else as_point(linear, self.n)
        q = np.zeros((self.n, self.n)) if quadratic is None else np.asarray(quadratic, dtype=float).reshape(self.n, self.n)
        self.quadratic = 0.5 * (q + q.T)
        self.inner = float(inner)
        self.outer = float(outer)

    def _poly(self, d):
        qd = d @ self.quadratic
        p = self.constant + d @ self.linear + 0.5 * np.sum(qd * d, axis=-1)
        return p, self.linear + qd

    def _window(self, d):
        dist = np.sqrt(np.sum(d * d, axis=-1))
        width = self.outer - self.inner
        psi, dpsi, d2psi = _smooth_step((self.outer - dist) / width)
        return dist, psi, -dpsi / width, d2psi / width ** 2

    def value(self, points):
        d = np.asarray(points, dtype=float) - self.center
        p, _ = self._poly(d)
        return p * self._window(d)[1]

    def gradient(self, points):
        d = np.asarray(points, dtype=float) - self.center
        p, grad_p = self._poly(d)
        dist, w, dw, _ = self._window(d)
        e = d / np.where(dist > 0, dist, 1.0)[..., None]
        return grad_p * w[..., None] + (p * dw)[..., None] * e

    def hessian(self, points):
        d = np.asarray(points, dtype=float) - self.center
        p, grad_p = self._poly(d)
        dist, w, dw, d2w = self._window(d)
        safe = np.where(dist > 0, dist, 1.0)
        e = d / safe[..., None]
        outer_e = e[..., :, None] * e[..., None, :]
        eye = np.eye(self.n)
        # Window Hessian: W'' e e^T + (W'/r)(I - e e^T); W' vanishes near the center
        hess_w = d2w[..., None, None] * outer_e + (dw / safe)[..., None, None] * (eye - outer_e)
        grad_w = dw[..., None] * e
        cross = grad_p[..., :, None] * grad_w[..., None, :]
        return (w[..., None, None] * self.quadratic + cross + np.swapaxes(cross, -1, -2)
                + p[..., None, None] * hess_w)

    @property
    def sup_norm(self) -> float:
        return (abs(self.constant) + float(np.linalg.norm(self.linear)) * self.outer
                + 0.5 * float(np.linalg.norm(self.quadratic, 2)) * self.outer ** 2)

    @property
    def length_scale(self) -> float:
        return 0.5 * self.inner

    def smooth_radius(self, x):
        dist = float(np.linalg.norm(as_point(x, self.n) - self.center))
        return max(self.inner - dist, 0.25 * (self.outer - self.inner))

    def radial_breakpoints(self, x):
        dist = float(np.linalg.norm(as_point(x, self.n) - self.center))
        candidates = (abs(self.inner - dist), self.inner + dist, abs(self.outer - dist), self.outer + dist)
        return tuple(sorted(b for b in candidates if b > 0))

    def params(self):
        return {"center": self.center.tolist(), "constant": self.constant, "linear": self.linear.tolist(),
                "quadratic": self.quadratic.tolist(), "inner": self.inner, "outer": self.outer}


class CosineField(ScalarField):
    """u(x) = cos(k . x + phase); the Fourier-multiplier oracle for p = 2"""

    kind = FieldKindEnum.cosine

    def __init__(self, wave_vector, phase: float = 0.0):
        self.k = as_point(wave_vector)
        super().__init__(self.k.shape[0])
        if not np.any(self.k):
            raise DomainError("Wave vector must be nonzero")
        self.phase = float(phase)

    def _arg(self, points):
        return np.asarray(points, dtype=float) @ self.k + self.phase

    def value(self, points):
        return np.cos(self._arg(points))

    def gradient(self, points):
        return -np.sin(self._arg(points))[..., None] * self.k

    def hessian(self, points):
        return -np.cos(self._arg(points))[..., None, None] * np.outer(self.k, self.k)

    @property
    def sup_norm(self) -> float:
        return 1.0

    @property
    def length_scale(self) -> float:
        return 1.0 / float(np.linalg.norm(self.k))

    @property
    def wavelength(self) -> Optional[float]:
        return 2.0 * np.pi / float(np.linalg.norm(self.k))

    def ray_periods(self, directions):
        speed = np.abs(np.atleast_2d(directions) @ self.k)
        with np.errstate(divide="ignore"):
            return np.where(speed > 1e-12 * np.linalg.norm(self.k), 2.0 * np.pi / speed, np.inf)

    def params(self):
        return {"wave_vector": self.k.tolist(), "phase": self.phase}


class LinearField(ScalarField):
    """u(x) = c + b . x; the sup norm is taken over a box of radius box_radius"""

    kind = FieldKindEnum.linear

    def __init__(self, slope, constant: float = 0.0, box_radius: float = 10.0):
        self.slope = as_point(slope)
        super().__init__(self.slope.shape[0])
        self.constant = float(constant)
        self.box_radius = float(box_radius)

    def value(self, points):
        return self.constant + np.asarray(points, dtype=float) @ self.slope

    def gradient(self, points):
        return np.broadcast_to(self.slope, np.asarray(points, dtype=float).shape).copy()

    def hessian(self, points):
        shape = np.asarray(points, dtype=float).shape
        return np.zeros(shape + (self.n,))

    @property
    def sup_norm(self) -> float:
        return abs(self.constant) + float(np.linalg.norm(self.slope)) * self.box_radius

    @property
    def length_scale(self) -> float:
        return 1.0

    def difference_bound(self, x):
        return 0.0, float(np.linalg.norm(self.slope)), 1.0

    def params(self):
        return {"slope": self.slope.tolist(), "constant": self.constant}


class ConstantField(ScalarField):
    kind = FieldKindEnum.constant

    def __init__(self, n: int, level: float = 1.0):
        super().__init__(n)
        self.level = float(level)

    def value(self, points):
        return np.full(np.asarray(points, dtype=float).shape[:-1], self.level)

    def gradient(self, points):
        return np.zeros(np.asarray(points, dtype=float).shape)

    def hessian(self, points):
        shape = np.asarray(points, dtype=float).shape
        return np.zeros(shape + (self.n,))

    @property
    def sup_norm(self) -> float:
        return max(abs(self.level), np.finfo(float).tiny)

    @property
    def length_scale(self) -> float:
        return 1.0

    def difference_bound(self, x):
        return 0.0, 0.0, 0.0

    def params(self):
        return {"level": self.level}


class OffsetField(ScalarField):
    """a * u + b for a base field u"""

    def __init__(self, base: ScalarField, scale: float = 1.0, shift: float = 0.0):
        super().__init__(base.n)
        self.base = base
        self.scale = float(scale)
        self.shift = float(shift)
        self.kind = base.kind

    def value(self, points):
        return self.scale * self.base.value(points) + self.shift

    def gradient(self, points):
        return self.scale * self.base.gradient(points)

    def hessian(self, points):
        return self.scale * self.base.hessian(points)

    @property
    def sup_norm(self) -> float:
        return abs(self.scale) * self.base.sup_norm + abs(self.shift)

    @property
    def length_scale(self) -> float:
        return self.base.length_scale

    def smooth_radius(self, x):
        return self.base.smooth_radius(x)

    def check_point(self, x):
        return self.base.check_point(x)

    def difference_bound(self, x):
        d0, d1, g = self.base.difference_bound(x)
        return abs(self.scale) * d0, abs(self.scale) * d1, g

    def radial_breakpoints(self, x):
        return self.base.radial_breakpoints(x)

    def ray_breakpoints(self, x, direction):
        return self.base.ray_breakpoints(x, direction)

    @property
    def wavelength(self):
        return self.base.wavelength

    def ray_periods(self, directions):
        return self.base.ray_periods(directions)

    def nonconstant_witness(self, x):
        return self.base.nonconstant_witness(x)

    def params(self):
        return {"base": self.base.describe(), "scale": self.scale, "shift": self.shift}


class TranslatedField(ScalarField):
    """u(x - h) for a base field u"""

    def __init__(self, base: ScalarField, shift):
        super().__init__(base.n)
        self.base = base
        self.shift = as_point(shift, base.n)
        self.kind = base.kind

    def value(self, points):
        return self.base.value(np.asarray(points, dtype=float) - self.shift)

    def gradient(self, points):
        return self.base.gradient(np.asarray(points, dtype=float) - self.shift)

    def hessian(self, points):
        return self.base.hessian(np.asarray(points, dtype=float) - self.shift)

    @property
    def sup_norm(self) -> float:
        return self.base.sup_norm

    @property
    def length_scale(self) -> float:
        return self.base.length_scale

    def smooth_radius(self, x):
        return self.base.smooth_radius(as_point(x, self.n) - self.shift)

    def check_point(self, x):
        self.base.check_point(as_point(x, self.n) - self.shift)
        return as_point(x, self.n)

    def difference_bound(self, x):
        return self.base.difference_bound(as_point(x, self.n) - self.shift)

    def radial_breakpoints(self, x):
        return self.base.radial_breakpoints(as_point(x, self.n) - self.shift)

    def ray_breakpoints(self, x, direction):
        return self.base.ray_breakpoints(as_point(x, self.n) - self.shift, direction)

    @property
    def wavelength(self):
        return self.base.wavelength

    def ray_periods(self, directions):
        return self.base.ray_periods(directions)

    def nonconstant_witness(self, x):
        z, radius = self.base.nonconstant_witness(as_point(x, self.n) - self.shift)
        return z + self.shift, radius

    def params(self):
        return {"base": self.base.describe(), "shift": self.shift.tolist()}


# ============ Factories ============

def make_gaussian(center, width: float = 1.0) -> GaussianField:
    return GaussianField(center, width)


def make_cone(amplitude: float, offset: float, pole, s: float, **kwargs) -> ConeField:
    return ConeField(amplitude, offset, pole, s, **kwargs)


def make_bump(center, radius: float = 1.0) -> BumpField:
    return BumpField(center, radius)


def make_windowed_poly(coeffs: Dict[str, Any], window: Tuple[float, float], center=None) -> WindowedPolyField:
    """coeffs holds 'constant', 'linear' and 'quadratic' (Hessian) entries"""
    linear = coeffs.get("linear")
    quadratic = coeffs.get("quadratic")
    n = len(linear) if linear is not None else (len(quadratic) if quadratic is not None else 1)
    center = np.zeros(n) if center is None else center
    return WindowedPolyField(center, coeffs.get("constant", 0.0), linear, quadratic, window[0], window[1])


def make_cosine(wave_vector, phase: float = 0.0) -> CosineField:
    return CosineField(wave_vector, phase)


def validate_derivatives(
    field: ScalarField,
    points: Iterable,
    h: float = 1e-4,
    threshold: float = 1e-5,
) -> DerivativeReport:
    """
    Max relative error of the analytic gradient and Hessian against central
    differences with step h scaled by the field's length scale.
    """
    step = h * field.length_scale
    eye = np.eye(field.n)
    grad_err, hess_err, count = 0.0, 0.0, 0
    for x in points:
        x = as_point(x, field.n)
        grad = field.gradient(x)
        hess = field.hessian(x)
        fd_grad = np.array([(field.value(x + step * e) - field.value(x - step * e)) / (2 * step) for e in eye])
        fd_hess = np.array([(field.gradient(x + step * e) - field.gradient(x - step * e)) / (2 * step) for e in eye])
        grad_scale = max(float(np.abs(grad).max()), float(np.abs(field.value(x))), 1.0 / field.length_scale) + 1e-300
        hess_scale = max(float(np.abs(hess).max()), grad_scale / field.length_scale) + 1e-300
        grad_err = max(grad_err, float(np.abs(fd_grad - grad).max()) / grad_scale)
        hess_err = max(hess_err, float(np.abs(fd_hess - hess).max()) / hess_scale)
        count += 1
    report = DerivativeReport(type(field).__name__, grad_err, hess_err, threshold, count)
    if not report.passed:
        logger.warning(f"Derivative check failed for {report.field}: grad {grad_err:.2e}, hess {hess_err:.2e}")
    return report


# ============ Corpus registry ============

class FieldCorpus:
    """Corpus members addressable by kind + parameters"""

    def __init__(self):
        self.factories: Dict[FieldKindEnum, Callable[..., ScalarField]] = {
            FieldKindEnum.gaussian: self._gaussian,
            FieldKindEnum.cone: self._cone,
            FieldKindEnum.bump: self._bump,
            FieldKindEnum.windowed_poly: self._windowed_poly,
            FieldKindEnum.cosine: self._cosine,
            FieldKindEnum.linear: self._linear,
            FieldKindEnum.constant: self._constant,
        }

    @staticmethod
    def _point(params: Dict[str, Any], key: str, n: int, default: float = 0.0) -> np.ndarray:
        value = params.get(key)
        if value is None:
            return np.full(n, default)
        return as_point(value, n)

    def _gaussian(self, n: int, s: float, params):
        return make_gaussian(self._point(params, "center", n), params.get("width", 1.0))

    def _cone(self, n: int, s: float, params):
        pole = self._point(params, "pole", n)
        return make_cone(params.get("amplitude", 1.0), params.get("offset", 0.0), pole,
                         params.get("s", s), box_radius=params.get("box_radius", 10.0))

    def _bump(self, n: int, s: float, params):
        return make_bump(self._point(params, "center", n), params.get("radius", 1.0))

    def _windowed_poly(self, n: int, s: float, params):
        coeffs = {
            "constant": params.get("constant", 0.0),
            "linear": params.get("linear", [1.0] + [0.0] * (n - 1)),
            "quadratic": params.get("quadratic", np.eye(n).tolist()),
        }
        window = (params.get("inner", 1.0), params.get("outer", 2.0))
        return make_windowed_poly(coeffs, window, self._point(params, "center", n))

    def _cosine(self, n: int, s: float, params):
        return make_cosine(self._point(params, "wave_vector", n, 1.0), params.get("phase", 0.0))

    def _linear(self, n: int, s: float, params):
        return LinearField(self._point(params, "slope", n, 1.0), params.get("constant", 0.0))

    def _constant(self, n: int, s: float, params):
        return ConstantField(n, params.get("level", 1.0))

    def kinds(self) -> List[str]:
        return [k.value for k in self.factories]

    def build(self, kind, n: int, s: float = 0.75, params: Optional[Dict[str, Any]] = None) -> ScalarField:
        try:
            kind = FieldKindEnum(kind)
        except ValueError:
            raise ConfigError(f"Unknown field kind: {kind}", field="field.kind")
        try:
            return self.factories[kind](n, s, dict(params or {}))
        except (TypeError, ValueError) as e:
            if isinstance(e, DomainError):
                raise
            raise ConfigError(f"Invalid parameters for field {kind.value}: {e}", field="field.params")

    def default_members(self, n: int, s: float = 0.75) -> List[ScalarField]:
        """One representative per bounded kind, used by corpus-wide checks"""
        return [
            make_gaussian(np.zeros(n), 1.0),
            make_bump(np.zeros(n), 1.5),
            make_windowed_poly({"constant": 0.5, "linear": [1.0] + [0.0] * (n - 1),
                                "quadratic": np.diag(np.arange(1.0, n + 1.0)).tolist()}, (1.0, 2.0)),
            make_cosine([1.0] + [0.5] * (n - 1)),
        ]


# Global instance
field_corpus = FieldCorpus()
