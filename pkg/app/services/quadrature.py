"""
MeanLab Quadrature Service
Gauss-Jacobi, Gauss-Legendre and sphere rules for the singular radial integrals
"""
import logging
from functools import lru_cache
from typing import Callable, Iterable, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

from app.exceptions import DomainError, NearOriginError, SelfConvergenceError, TailConvergenceError
from app.schemas import QuadratureSpec
from app.utils.linalg import orthonormal_frame, unit

logger = logging.getLogger(__name__)

# Phase samples used to average oscillatory integrands over one period in the tail
TAIL_PHASES = 16
# Upper bound on points evaluated per vectorized chunk
MAX_CHUNK_POINTS = 1_000_000
# Panels adjacent to a breakpoint keep this fraction of the distance to the next edge
GRADING_RATIO = 0.5

# integrand(rho, omega) -> values; rho has shape (m, K), omega has shape (m, n)
RayIntegrand = Callable[[np.ndarray, np.ndarray], np.ndarray]


# ============ Base rules ============

@lru_cache(maxsize=64)
def gauss_legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1]"""
    x, w = leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=512)
def gauss_jacobi(order: int, alpha: float, beta: float) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Jacobi nodes and weights for the weight (1-x)^alpha (1+x)^beta on [-1, 1]"""
    if alpha <= -1.0 or beta <= -1.0:
        raise DomainError(f"Jacobi exponents must exceed -1, got ({alpha}, {beta})")
    x, w = roots_jacobi(order, alpha, beta)
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


class Truncation(NamedTuple):
    radius: float
    capped: bool


def truncation_radius(
    tol: float,
    sup_bound: float,
    exponent: float,
    max_radius_cap: Optional[float] = None,
) -> Truncation:
    """Smallest R with sup_bound * R^-exponent / exponent < tol, optionally capped"""
    if tol <= 0 or sup_bound <= 0 or exponent <= 0:
        raise DomainError(
            "truncation_radius needs positive arguments",
            {"tol": tol, "sup_bound": sup_bound, "exponent": exponent},
        )
    radius = (sup_bound / (exponent * tol)) ** (1.0 / exponent)
    if max_radius_cap is not None and radius > max_radius_cap:
        logger.debug(f"Truncation radius {radius:.3e} capped at {max_radius_cap:.3e}")
        return Truncation(float(max_radius_cap), True)
    return Truncation(float(radius), False)


def growth_tail(d0: float, d1: float, gamma: float, power: float, kappa: float) -> Tuple[float, float]:
    """
    Tail constants for an integrand |u(x+y) - u(x)|^power * rho^(-1-kappa)
    when the field obeys |u(x+y) - u(x)| <= d0 + d1 |y|^gamma.

    Returns (bound, decay) with |integrand| <= bound * rho^(-1-decay) for rho >= 1.
    """
    decay = kappa - gamma * power
    if decay <= 0:
        raise TailConvergenceError(
            f"Integrand does not decay: kappa={kappa} against growth {gamma}^{power}",
            {"kappa": kappa, "gamma": gamma, "power": power},
        )
    bound = max(d0 + d1, np.finfo(float).tiny) ** power if power > 0 else 1.0
    return float(bound), float(decay)


# ============ Panels ============

def panel_edges(
    start: float,
    stop: float,
    breakpoints: Iterable[float] = (),
    grading: int = 0,
    max_length: Optional[float] = None,
) -> np.ndarray:
    """Dyadic edges on [start, stop], split at breakpoints and graded toward them"""
    edges = [start]
    e = start
    while 2.0 * e < stop:
        e *= 2.0
        edges.append(e)
    edges.append(stop)

    inner = sorted(b for b in breakpoints if start < b < stop)
    for b in inner:
        edges.append(b)
        below = b - max(x for x in edges if x < b)
        above = min(x for x in edges if x > b) - b
        for j in range(1, grading + 1):
            if b - below * GRADING_RATIO ** j > start:
                edges.append(b - below * GRADING_RATIO ** j)
            if b + above * GRADING_RATIO ** j < stop:
                edges.append(b + above * GRADING_RATIO ** j)

    edges = np.unique(np.asarray(edges, dtype=float))
    if max_length is not None and max_length > 0:
        refined = [edges[0]]
        for a, b in zip(edges[:-1], edges[1:]):
            pieces = int(np.ceil((b - a) / max_length))
            refined.extend(np.linspace(a, b, pieces + 1)[1:])
        edges = np.asarray(refined)
    return edges


def _legendre_panels(edges: np.ndarray, order: int) -> Tuple[np.ndarray, np.ndarray]:
    if len(edges) < 2:
        return np.empty(0), np.empty(0)
    x, w = gauss_legendre(order)
    a = edges[:-1, None]
    b = edges[1:, None]
    half = 0.5 * (b - a)
    nodes = (a + half * (1.0 + x)).ravel()
    weights = (half * w).ravel()
    return nodes, weights


# ============ Radial rules ============

class RadialRule:
    """
    Quadrature for int f(rho) K(rho) d rho where K is a singular radial kernel.

    Body weights already contain K. The tail beyond `radius` (present only when the
    truncation radius was capped) is a Gauss-Jacobi rule in tau = radius / rho whose
    weight carries the declared decay, and is re-weighted per evaluation so that
    oscillatory integrands can be phase-averaged.
    """

    def __init__(
        self,
        kernel: Callable[[np.ndarray], np.ndarray],
        body_nodes: np.ndarray,
        body_weights: np.ndarray,
        radius: float,
        capped: bool,
        decay: float,
        bound: float,
        jacobi_nodes: int,
        near_nodes: int = 0,
        near_coarse: Optional[Tuple[np.ndarray, np.ndarray]] = None,
    ):
        self.kernel = kernel
        self.body_nodes = body_nodes
        self.body_weights = body_weights
        self.radius = radius
        self.capped = capped
        self.decay = decay
        self.bound = bound
        self.near_nodes = near_nodes
        self.near_coarse = near_coarse
        self.last_near_gap = np.empty(0)
        if capped:
            x, w = gauss_jacobi(jacobi_nodes, 0.0, decay - 1.0)
            tau = 0.5 * (1.0 + x)
            self.tail_nodes = radius / tau
            # int_R^inf F = int_0^1 F(R/tau) (R/tau)^(1+k) R^-k tau^(k-1) d tau
            self.tail_base = w * 0.5 ** decay * radius ** (-decay)
        else:
            self.tail_nodes = np.empty(0)
            self.tail_base = np.empty(0)

    @property
    def size(self) -> int:
        return len(self.body_nodes) + len(self.tail_nodes)

    def _tail_points(self, periods: Optional[np.ndarray], m: int) -> Tuple[np.ndarray, np.ndarray]:
        """Tail nodes (m, K*J) and weights including the kernel, phase-averaged per direction"""
        if not self.capped:
            return np.empty((m, 0)), np.empty((m, 0))
        if periods is None:
            shifts = np.zeros((m, 1))
        else:
            periods = np.asarray(periods, dtype=float).reshape(m)
            usable = np.isfinite(periods) & (periods < self.radius)
            step = np.where(usable, periods, 0.0)[:, None]
            shifts = step * (np.arange(TAIL_PHASES) / TAIL_PHASES)[None, :]
        phases = shifts.shape[1]
        rho = self.tail_nodes[None, :, None] + shifts[:, None, :]
        weights = (self.tail_base[None, :, None] * rho ** (1.0 + self.decay) * self.kernel(rho)) / phases
        return rho.reshape(m, -1), weights.reshape(m, -1)

    def integrate_rays(
        self,
        integrand: RayIntegrand,
        directions: np.ndarray,
        periods: Optional[np.ndarray] = None,
    ) -> np.ndarray:
        """Per-direction radial integrals, shape (m,)"""
        directions = np.atleast_2d(np.asarray(directions, dtype=float))
        m, n = directions.shape
        result = np.empty(m)
        self.last_near_gap = np.zeros(m)
        per_direction = max(1, self.size * (TAIL_PHASES if periods is not None else 1) * n)
        chunk = max(1, MAX_CHUNK_POINTS // per_direction)
        for lo in range(0, m, chunk):
            hi = min(m, lo + chunk)
            omega = directions[lo:hi]
            result[lo:hi], self.last_near_gap[lo:hi] = self._integrate_chunk(
                integrand, omega, None if periods is None else np.asarray(periods)[lo:hi]
            )
        return result

    def _integrate_chunk(self, integrand: RayIntegrand, omega: np.ndarray, periods) -> Tuple[np.ndarray, np.ndarray]:
        m = omega.shape[0]
        body_rho = np.broadcast_to(self.body_nodes, (m, len(self.body_nodes)))
        body_values = np.asarray(integrand(body_rho, omega), dtype=float)
        total = body_values @ self.body_weights
        gap = np.zeros(m)

        if self.near_coarse is not None and self.near_nodes:
            fine = body_values[:, : self.near_nodes] @ self.body_weights[: self.near_nodes]
            c_nodes, c_weights = self.near_coarse
            coarse_values = np.asarray(integrand(np.broadcast_to(c_nodes, (m, len(c_nodes))), omega), dtype=float)
            gap = np.abs(fine - coarse_values @ c_weights)
        if self.capped:
            tail_rho, tail_weights = self._tail_points(periods, m)
            tail_values = np.asarray(integrand(tail_rho, omega), dtype=float)
            envelope = np.abs(tail_values * self.kernel(tail_rho)) * tail_rho ** (1.0 + self.decay)
            if np.any(envelope > 2.0 * self.bound * (1.0 + 1e-9)):
                raise TailConvergenceError(
                    "Integrand exceeds its declared tail bound",
                    {"bound": self.bound, "observed": float(envelope.max()), "radius": self.radius},
                )
            total = total + np.sum(tail_values * tail_weights, axis=1)
        return total, gap


def annulus_rule(
    r: float,
    s: float,
    spec: QuadratureSpec,
    decay: float,
    bound: float,
    breakpoints: Iterable[float] = (),
    wavelength: Optional[float] = None,
) -> RadialRule:
    """Rule for int_r^inf f(rho) (rho^2 - r^2)^-s d rho"""
    if r <= 0 or not 0 < s < 1:
        raise DomainError(f"annulus rule needs r > 0 and s in (0,1), got r={r}, s={s}")
    breakpoints = sorted(b for b in breakpoints if b > r)

    # Endpoint panel (r, r + h]; (rho - r)^-s absorbed by Gauss-Jacobi
    h = r
    close = [b - r for b in breakpoints if b < 2.0 * r]
    if close:
        h = min(close)
    x, w = gauss_jacobi(spec.jacobi_nodes, 0.0, -s)
    rho = r + 0.5 * h * (1.0 + x)
    jac_weights = w * (0.5 * h) ** (1.0 - s) * (rho + r) ** (-s)

    kernel_bound = bound * (4.0 / 3.0) ** s
    needed = truncation_radius(spec.truncation_tol, kernel_bound, decay, spec.max_radius_cap)
    floor = 4.0 * max([2.0 * r] + breakpoints)
    radius = max(needed.radius, floor)
    capped = needed.capped

    edges = panel_edges(r + h, radius, breakpoints, spec.breakpoint_grading,
                        None if wavelength is None else 4.0 * wavelength)
    gl_nodes, gl_weights = _legendre_panels(edges, spec.smooth_nodes)

    def kernel(p: np.ndarray) -> np.ndarray:
        return (p * p - r * r) ** (-s)

    nodes = np.concatenate([rho, gl_nodes])
    weights = np.concatenate([jac_weights, gl_weights * kernel(gl_nodes)])
    return RadialRule(kernel, nodes, weights, radius, capped, decay, kernel_bound, spec.jacobi_nodes)


def ray_rule(
    sigma: float,
    origin_order: float,
    spec: QuadratureSpec,
    epsilon: float,
    decay: float,
    bound: float,
    breakpoints: Iterable[float] = (),
    wavelength: Optional[float] = None,
) -> RadialRule:
    """
    Rule for int_0^inf h(rho) rho^(-1-sigma) d rho with h = O(rho^origin_order) at 0.

    The near panel (0, epsilon] is a Gauss-Jacobi rule for the weight
    rho^(origin_order - 1 - sigma) applied to h / rho^origin_order.
    """
    if origin_order <= sigma:
        raise DomainError(f"origin order {origin_order} must exceed the kernel exponent {sigma}")
    if epsilon <= 0:
        raise DomainError(f"inner cutoff must be positive, got {epsilon}")
    power = origin_order - 1.0 - sigma

    def near(order: int) -> Tuple[np.ndarray, np.ndarray]:
        x, w = gauss_jacobi(order, 0.0, power)
        rho = 0.5 * epsilon * (1.0 + x)
        return rho, w * (0.5 * epsilon) ** (origin_order - sigma) * rho ** (-origin_order)

    near_nodes, near_weights = near(spec.jacobi_nodes)
    coarse = near(max(2, spec.jacobi_nodes // 2))

    breakpoints = sorted(b for b in breakpoints if b > epsilon)
    needed = truncation_radius(spec.truncation_tol, bound, decay, spec.max_radius_cap)
    floor = 4.0 * max([epsilon] + breakpoints)
    radius = max(needed.radius, floor)
    capped = needed.capped
    if capped:
        radius = max(spec.max_radius_cap, floor)

    edges = panel_edges(epsilon, radius, breakpoints, spec.breakpoint_grading,
                        None if wavelength is None else 4.0 * wavelength)
    gl_nodes, gl_weights = _legendre_panels(edges, spec.smooth_nodes)

    def kernel(p: np.ndarray) -> np.ndarray:
        return p ** (-1.0 - sigma)

    nodes = np.concatenate([near_nodes, gl_nodes])
    weights = np.concatenate([near_weights, gl_weights * kernel(gl_nodes)])
    return RadialRule(kernel, nodes, weights, radius, capped, decay, bound, spec.jacobi_nodes,
                      near_nodes=len(near_nodes), near_coarse=coarse)


# ============ Sphere rules ============

def _check_sphere_dimension(n: int) -> None:
    if n not in (1, 2, 3):
        raise DomainError(f"Unsupported dimension n={n}; sphere rules exist for n in {{1,2,3}}")


def sphere_rule(n: int, spec: QuadratureSpec, axis: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Directions and weights on S^{n-1}, symmetric under omega -> -omega.
    With an axis, nodes are split at the great circle orthogonal to it so that
    integrands with a kink there keep spectral accuracy.
    """
    _check_sphere_dimension(n)
    if n == 1:
        return np.array([[-1.0], [1.0]]), np.array([1.0, 1.0])

    order = spec.sphere_order + spec.sphere_order % 2
    if n == 2:
        if axis is None:
            theta = 2.0 * np.pi * (np.arange(order) + 0.5) / order
            dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
            return dirs, np.full(order, 2.0 * np.pi / order)
        frame = orthonormal_frame(axis)
        x, w = gauss_legendre(max(2, order // 2))
        theta = 0.5 * np.pi * x
        half = np.cos(theta)[:, None] * frame[0] + np.sin(theta)[:, None] * frame[1]
        weights = 0.5 * np.pi * w
        return np.concatenate([half, -half]), np.concatenate([weights, weights])

    phi = 2.0 * np.pi * np.arange(order) / order
    if axis is None:
        t, wt = gauss_legendre(spec.polar_order)
        frame = np.eye(3)[[2, 0, 1]]
    else:
        x, w = gauss_legendre(max(2, spec.polar_order // 2))
        upper = 0.5 * (1.0 + x)
        t = np.concatenate([upper, -upper])
        wt = np.concatenate([0.5 * w, 0.5 * w])
        frame = orthonormal_frame(axis)
    return _polar_product(t, wt, phi, frame)


def _polar_product(t: np.ndarray, wt: np.ndarray, phi: np.ndarray, frame: np.ndarray):
    sin_t = np.sqrt(np.clip(1.0 - t * t, 0.0, None))
    cos_p, sin_p = np.cos(phi), np.sin(phi)
    dirs = (
        t[:, None, None] * frame[0]
        + (sin_t[:, None] * cos_p[None, :])[..., None] * frame[1]
        + (sin_t[:, None] * sin_p[None, :])[..., None] * frame[2]
    ).reshape(-1, 3)
    weights = (wt[:, None] * np.full(len(phi), 2.0 * np.pi / len(phi))[None, :]).ravel()
    return dirs, weights


def cap_rule(n: int, threshold: float, axis: np.ndarray, spec: QuadratureSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Directions and weights on the cap {omega : omega . axis >= threshold}"""
    if n not in (2, 3):
        raise DomainError(f"Cap kernels need n in {{2,3}}, got n={n}")
    if not -1.0 <= threshold < 1.0:
        raise DomainError(f"Cap threshold must lie in [-1,1), got {threshold}")
    frame = orthonormal_frame(np.asarray(axis, dtype=float))
    x, w = gauss_legendre(spec.polar_order)
    if n == 2:
        a = float(np.arccos(threshold))
        theta = a * x
        dirs = np.cos(theta)[:, None] * frame[0] + np.sin(theta)[:, None] * frame[1]
        return dirs, a * w
    t = threshold + 0.5 * (1.0 - threshold) * (1.0 + x)
    wt = 0.5 * (1.0 - threshold) * w
    order = spec.sphere_order + spec.sphere_order % 2
    phi = 2.0 * np.pi * np.arange(order) / order
    return _polar_product(t, wt, phi, frame)


def ball_rule(n: int, radius: float, spec: QuadratureSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Offsets and weights filling the ball of the given radius around the origin"""
    dirs, dir_weights = sphere_rule(n, spec)
    x, w = gauss_legendre(max(4, spec.smooth_nodes // 4))
    rho = 0.5 * radius * (1.0 + x)
    rho_weights = 0.5 * radius * w * rho ** (n - 1)
    offsets = (rho[:, None, None] * dirs[None, :, :]).reshape(-1, n)
    weights = (rho_weights[:, None] * dir_weights[None, :]).ravel()
    return offsets, weights


def sphere_integral(
    h: Callable[[np.ndarray], np.ndarray],
    n: int,
    spec: Optional[QuadratureSpec] = None,
    axis: Optional[np.ndarray] = None,
) -> float:
    """int_{S^{n-1}} h(omega) d omega; h receives directions of shape (m, n)"""
    spec = spec or QuadratureSpec.default()
    dirs, weights = sphere_rule(n, spec, axis)
    return float(np.asarray(h(dirs), dtype=float) @ weights)


# ============ Integral drivers ============

def annulus_integrals(
    integrand: RayIntegrand,
    directions: np.ndarray,
    r: float,
    s: float,
    spec: QuadratureSpec,
    decay: float,
    bound: float,
    breakpoints: Iterable[float] = (),
    periods: Optional[np.ndarray] = None,
    wavelength: Optional[float] = None,
) -> np.ndarray:
    """Per-direction int_r^inf f(rho, omega) (rho^2 - r^2)^-s d rho"""
    rule = annulus_rule(r, s, spec, decay, bound, breakpoints, wavelength)
    return rule.integrate_rays(integrand, directions, periods)


def ray_integrals(
    integrand: RayIntegrand,
    directions: np.ndarray,
    sigma: float,
    origin_order: float,
    spec: QuadratureSpec,
    epsilon: float,
    decay: float,
    bound: float,
    breakpoints: Iterable[float] = (),
    periods: Optional[np.ndarray] = None,
    wavelength: Optional[float] = None,
) -> np.ndarray:
    """
    Per-direction int_0^inf h(rho, omega) rho^(-1-sigma) d rho.

    The near panel is integrated at two resolutions; while they disagree the
    cutoff is halved, up to spec.near_origin_refinements times.
    """
    breakpoints = tuple(breakpoints)
    eps = epsilon
    for attempt in range(spec.near_origin_refinements + 1):
        rule = ray_rule(sigma, origin_order, spec, eps, decay, bound, breakpoints, wavelength)
        values = rule.integrate_rays(integrand, directions, periods)
        gap = rule.last_near_gap
        scale = np.maximum(1.0, np.abs(values))
        if np.all(gap <= spec.truncation_tol * scale):
            if attempt:
                logger.debug(f"Near-origin panel resolved after {attempt} halvings (eps={eps:.3e})")
            return values
        eps *= 0.5

    near_dirs = np.atleast_2d(directions)
    probe = np.asarray(integrand(np.broadcast_to(rule.near_coarse[0], (len(near_dirs), len(rule.near_coarse[0]))),
                                 near_dirs), dtype=float)
    ratio = np.abs(probe) / rule.near_coarse[0] ** origin_order
    estimate = float(ratio.max()) * eps ** (origin_order - sigma) / (origin_order - sigma)
    raise NearOriginError(
        f"Near-origin contribution unresolved down to eps={eps:.3e}",
        {"epsilon": eps, "near_bound": estimate, "gap": float(np.max(gap))},
    )


def near_origin_bound(h: Callable[[np.ndarray], np.ndarray], epsilon: float, sigma: float,
                      origin_order: float = 2.0, samples: int = 64) -> float:
    """sup|h(rho)/rho^m| * eps^(m-sigma) / (m-sigma) over a sample of (0, eps]"""
    rho = epsilon * (np.arange(1, samples + 1) / samples)
    ratio = np.abs(np.asarray(h(rho), dtype=float)) / rho ** origin_order
    return float(ratio.max() * epsilon ** (origin_order - sigma) / (origin_order - sigma))


def _estimate_bound(f: Callable[[np.ndarray], np.ndarray], start: float, decay: float,
                    kernel: Callable[[np.ndarray], np.ndarray]) -> float:
    rho = start * 2.0 ** np.arange(1, 48)
    values = np.abs(np.asarray(f(rho), dtype=float) * kernel(rho)) * rho ** (1.0 + decay)
    return float(max(2.0 * values.max(), np.finfo(float).tiny))


def annulus_integral(
    g: Callable[[np.ndarray], np.ndarray],
    r: float,
    s: float,
    spec: Optional[QuadratureSpec] = None,
    decay: Optional[float] = None,
    bound: Optional[float] = None,
    breakpoints: Sequence[float] = (),
) -> float:
    """
    int_r^inf g(rho) (rho^2 - r^2)^-s d rho.

    decay is the exponent k with |g(rho)| (rho^2-r^2)^-s <= bound * rho^(-1-k);
    by default g is assumed to decay like 1/rho (k = 2s) and the bound is sampled.
    """
    spec = spec or QuadratureSpec.default()
    decay = 2.0 * s if decay is None else decay
    if bound is None:
        bound = _estimate_bound(g, r, decay, lambda p: (p * p - r * r) ** (-s)) / (4.0 / 3.0) ** s
    values = annulus_integrals(lambda rho, omega: g(rho), np.ones((1, 1)), r, s, spec, decay, bound, breakpoints)
    return float(values[0])


def ray_pv_integral(
    h: Callable[[np.ndarray], np.ndarray],
    s: float,
    decay_hint: Optional[float] = None,
    spec: Optional[QuadratureSpec] = None,
    origin_order: float = 2.0,
    bound: Optional[float] = None,
    epsilon: Optional[float] = None,
    breakpoints: Sequence[float] = (),
) -> float:
    """
    int_0^inf h(rho) rho^(-1-2s) d rho for h = O(rho^origin_order) near 0.

    decay_hint is the tail exponent k with |h(rho) rho^(-1-2s)| <= bound * rho^(-1-k);
    bounded h gives k = 2s, the default.
    """
    spec = spec or QuadratureSpec.default()
    sigma = 2.0 * s
    decay = sigma if decay_hint is None else decay_hint
    eps = epsilon or spec.inner_cutoff or 0.25
    if bound is None:
        bound = _estimate_bound(h, eps, decay, lambda p: p ** (-1.0 - sigma))
    if logger.isEnabledFor(logging.DEBUG):
        logger.debug(f"ray_pv_integral near bound {near_origin_bound(h, eps, sigma, origin_order):.3e}")
    values = ray_integrals(lambda rho, omega: h(rho), np.ones((1, 1)), sigma, origin_order, spec,
                           eps, decay, bound, breakpoints)
    return float(values[0])


def self_checked(compute: Callable[[QuadratureSpec], float], spec: QuadratureSpec, label: str) -> float:
    """Evaluate at spec and, when spec.self_check is set, compare against half resolution"""
    value = compute(spec)
    if spec.self_check:
        coarse = compute(spec.scaled(0.5))
        gap = abs(value - coarse)
        if gap > 10.0 * spec.truncation_tol * max(1.0, abs(value)):
            raise SelfConvergenceError(
                f"{label}: resolutions disagree by {gap:.3e}", coarse=coarse, fine=value
            )
        logger.debug(f"{label}: self-convergence gap {gap:.3e}")
    return value


def directions_for(n: int, spec: QuadratureSpec, axis: Optional[np.ndarray] = None):
    """Sphere rule aligned with axis when it is a usable nonzero vector"""
    if axis is not None and n > 1 and np.linalg.norm(axis) > 0:
        return sphere_rule(n, spec, unit(axis))
    return sphere_rule(n, spec)
