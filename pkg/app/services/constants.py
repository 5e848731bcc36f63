"""
MeanLab Constants Service
Closed-form and root-solved normalizers for every kernel and limit
"""
import logging
from functools import lru_cache
from typing import Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import gamma

from app.config import settings
from app.exceptions import DomainError, RootSearchError
from app.schemas import Constants

logger = logging.getLogger(__name__)


def _check_order(s: float, lower: float = 0.0) -> None:
    if not lower < s < 1.0:
        raise DomainError(f"s must lie in ({lower:g},1), got {s}", {"s": s})


def _check_dimension(n: int, allowed=(1, 2, 3)) -> None:
    if n not in allowed:
        raise DomainError(f"n must be one of {tuple(allowed)}, got {n}", {"n": n})


def _check_exponent(p: float) -> None:
    if not p >= 2.0:
        raise DomainError(f"p must be at least 2, got {p}", {"p": p})


def sphere_measure(n: int) -> float:
    """|S^{n-1}| = 2 pi^{n/2} / Gamma(n/2); 2 for the two-point sphere"""
    _check_dimension(n)
    return float(2.0 * np.pi ** (n / 2.0) / gamma(n / 2.0))


def fractional_laplacian_constant(n: int, s: float) -> float:
    """C(n,s) = 4^s s Gamma(n/2+s) / (pi^{n/2} Gamma(1-s))"""
    _check_dimension(n)
    _check_order(s)
    return float(4.0 ** s * s * gamma(n / 2.0 + s) / (np.pi ** (n / 2.0) * gamma(1.0 - s)))


def mean_kernel_constant(n: int, s: float) -> float:
    """c(n,s) = Gamma(n/2) sin(pi s) / pi^{n/2+1}"""
    _check_dimension(n)
    _check_order(s)
    return float(gamma(n / 2.0) * np.sin(np.pi * s) / np.pi ** (n / 2.0 + 1.0))


def radial_tail_constant(s: float) -> float:
    """(int_1^inf d rho / (rho (rho^2-1)^s))^{-1} = 2 sin(pi s) / pi"""
    _check_order(s)
    return float(2.0 * np.sin(np.pi * s) / np.pi)


def infinity_tail_constant(s: float) -> float:
    """Half the radial tail constant, the normalizer of the infinity mean kernel"""
    return 0.5 * radial_tail_constant(s)


def directional_moments(n: int, p: float) -> Tuple[float, float]:
    """
    gamma_p = int |omega_1|^{p-2} omega_2^2 and gamma'_p = int |omega_1|^p over S^{n-1}.

    For n = 1 the same Gamma ratios give 2/(p-1) and 2, which keeps the
    identity gamma'_p / gamma_p = p - 1 and the one-dimensional limits exact.
    """
    _check_dimension(n)
    _check_exponent(p)
    half = gamma(0.5)
    denominator = gamma((p + n) / 2.0)
    gamma_p = 2.0 * gamma((p - 1.0) / 2.0) * half ** (n - 2) * gamma(1.5) / denominator
    gamma_p_prime = 2.0 * gamma((p + 1.0) / 2.0) * half ** (n - 1) / denominator
    return float(gamma_p), float(gamma_p_prime)


def sphere_p_moment(n: int, p: float) -> float:
    """C_{n,p} = int_{S^{n-1}} |e . omega|^{p-2} d omega"""
    _check_dimension(n)
    _check_exponent(p)
    return float(2.0 * np.pi ** ((n - 1) / 2.0) * gamma((p - 1.0) / 2.0) / gamma((p + n - 2.0) / 2.0))


def cap_measure(cp: float, n: int) -> float:
    """Surface measure of the cap {omega . e_1 >= cp}"""
    if n == 2:
        return float(2.0 * np.arccos(cp))
    return float(2.0 * np.pi * (1.0 - cp))


def cap_moments(cp: float, n: int) -> Tuple[float, float, float]:
    """
    (alpha, beta, gamma_cap) for the cap {omega . e_1 >= cp}:
    alpha = 1/2 int (omega.e_2)^2, beta = 1/2 int (omega.e_1)^2 - alpha,
    gamma_cap = 1 / |cap|.
    """
    _check_dimension(n, (2, 3))
    if not 0.0 <= cp < 1.0:
        raise DomainError(f"Cap threshold must lie in [0,1), got {cp}", {"cp": cp})
    if n == 2:
        a = np.arccos(cp)
        sc = np.sin(a) * cp
        alpha = 0.5 * (a - sc)
        beta = sc
    else:
        alpha = 0.5 * np.pi * ((1.0 - cp) - (1.0 - cp ** 3) / 3.0)
        beta = np.pi * (1.0 - cp ** 3) / 3.0 - alpha
    return float(alpha), float(beta), 1.0 / cap_measure(cp, n)


def _ratio_gap(cp: float, n: int, p: float) -> float:
    alpha, beta, _ = cap_moments(cp, n)
    return beta / alpha - (p - 2.0)


@lru_cache(maxsize=128)
def solve_cap_threshold(p: float, n: int) -> float:
    """c_p in [0,1) with beta(c_p)/alpha(c_p) = p - 2, by bracketed root search"""
    _check_exponent(p)
    if n == 1:
        raise DomainError("The cap kernel is undefined on the two-point sphere; use n in {2,3}", {"n": n})
    _check_dimension(n, (2, 3))
    upper = 1.0 - settings.CAP_ROOT_DELTA
    low_gap = _ratio_gap(0.0, n, p)
    high_gap = _ratio_gap(upper, n, p)
    if abs(low_gap) < settings.CAP_ROOT_TOL:
        return 0.0
    if low_gap * high_gap > 0:
        raise RootSearchError(
            f"beta/alpha - (p-2) has no sign change on [0, {upper}]",
            {"p": p, "n": n, "ratio_range": [low_gap + p - 2.0, high_gap + p - 2.0]},
        )
    cp = brentq(_ratio_gap, 0.0, upper, args=(n, p), xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    residual = abs(_ratio_gap(cp, n, p))
    if residual >= settings.CAP_ROOT_TOL:
        raise RootSearchError(
            f"Cap threshold residual {residual:.3e} above tolerance",
            {"p": p, "n": n, "cp": cp, "residual": residual},
        )
    logger.debug(f"Cap threshold c_p={cp:.12f} for p={p}, n={n}")
    return float(cp)


@lru_cache(maxsize=256)
def get_constants(n: int, s: float, p: float = 2.0) -> Constants:
    """All constants for one (n, s, p); cap quantities only for n in {2,3}"""
    _check_dimension(n)
    _check_order(s)
    _check_exponent(p)
    gamma_p, gamma_p_prime = directional_moments(n, p)
    c_np = sphere_p_moment(n, p)
    cap = {}
    if n >= 2:
        cp = solve_cap_threshold(p, n)
        alpha, beta, gamma_cap = cap_moments(cp, n)
        cap = {"c_p": cp, "alpha_p": alpha, "beta_p": beta, "gamma_cap": gamma_cap}
    return Constants(
        n=n,
        s=s,
        p=p,
        C_ns=fractional_laplacian_constant(n, s),
        c_ns=mean_kernel_constant(n, s),
        c_s=radial_tail_constant(s),
        c_s_infinity=infinity_tail_constant(s),
        gamma_p=gamma_p,
        gamma_p_prime=gamma_p_prime,
        C_np=c_np,
        tilde_c_np=(p - 1.0) * gamma_p / (2.0 * c_np),
        tilde_c_np_printed=(p - 1.0) * (p - 3.0) / (2.0 * p * (p + n - 2.0)),
        **cap,
    )
