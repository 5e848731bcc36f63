"""
MeanLab Operator Registry Service
Maps CLI operator names to evaluators, expansion residuals and s-limit targets
"""
import logging
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from app.config import settings
from app.exceptions import ConfigError, DomainError
from app.schemas import ExperimentConfig, OperatorParams, QuadratureSpec, VariantEnum
from app.services import asymptotics, frac_p, grad_frac, local_ops
from app.services.constants import directional_moments
from app.services.fields import ScalarField
from app.services.quadrature import sphere_integral

logger = logging.getLogger(__name__)

VARIANT_SUFFIXES = {"+": VariantEnum.plus, "-": VariantEnum.minus}


class RunContext:
    """Parameters of one evaluation, resolved from an experiment config"""
    def __init__(
        self,
        n: int,
        s: float,
        p: float = 2.0,
        r: Optional[float] = None,
        variant: VariantEnum = VariantEnum.auto,
        spec: Optional[QuadratureSpec] = None,
    ):
        self.n = n
        self.s = s
        self.p = p
        self.r = r
        self.variant = VariantEnum(variant)
        self.spec = spec or QuadratureSpec.default()

    @classmethod
    def from_config(cls, config: ExperimentConfig, variant: Optional[VariantEnum] = None) -> "RunContext":
        return cls(config.n, config.s, config.p, config.r, variant or config.variant, config.quadrature_spec())

    def params(self, x, r: Optional[float] = None, s: Optional[float] = None) -> OperatorParams:
        return OperatorParams(n=self.n, s=self.s if s is None else s, p=self.p,
                              x=[float(v) for v in np.atleast_1d(x)], r=self.r if r is None else r)

    def radius(self) -> float:
        if self.r is None:
            raise DomainError("This operator needs a kernel radius r")
        return self.r


class Expansion:
    """Residual whose decay in r is checked, with its expected order"""
    def __init__(
        self,
        residual: Callable[[RunContext], asymptotics.ResidualOp],
        expected: Callable[[RunContext], float],
        two_sided: bool = False,
        tolerance: Optional[float] = None,
    ):
        self.residual = residual
        self.expected = expected
        self.two_sided = two_sided
        self.tolerance = tolerance or settings.NONLOCAL_SLOPE_TOL


class Limit:
    """s -> 1 behaviour: (1-s)-scaled or raw operator against a local target"""
    def __init__(
        self,
        operator: Callable[[RunContext], asymptotics.LimitOp],
        target: Callable[[RunContext], Callable[[ScalarField, np.ndarray], float]],
        target_name: str,
        scaled: bool,
        tolerance: float,
        diagnostics: Optional[Callable[[RunContext], Dict[str, asymptotics.LimitOp]]] = None,
    ):
        self.operator = operator
        self.target = target
        self.target_name = target_name
        self.scaled = scaled
        self.tolerance = tolerance
        self.diagnostics = diagnostics


def _bound(value: float) -> str:
    return "1/2" if value == 0.5 else f"{value:g}"


class OperatorEntry:
    def __init__(
        self,
        name: str,
        evaluate: Callable[[ScalarField, np.ndarray, RunContext], float],
        kind: str = "nonlocal",
        needs_r: bool = False,
        variant_aware: bool = False,
        s_domain: Tuple[float, float] = (0.0, 1.0),
        dimensions: Tuple[int, ...] = (1, 2, 3),
        expansion: Optional[Expansion] = None,
        limit: Optional[Limit] = None,
        description: str = "",
    ):
        self.name = name
        self.evaluate = evaluate
        self.kind = kind
        self.needs_r = needs_r
        self.variant_aware = variant_aware
        self.s_domain = s_domain
        self.dimensions = dimensions
        self.expansion = expansion
        self.limit = limit
        self.description = description

    def validate(self, ctx: RunContext, need_r: bool = True) -> None:
        lo, hi = self.s_domain
        if self.kind == "nonlocal" and not lo < ctx.s < hi:
            raise DomainError(f"s must lie in ({_bound(lo)},{_bound(hi)}) for {self.name}, got {ctx.s}", {"s": ctx.s})
        if ctx.n not in self.dimensions:
            raise DomainError(f"{self.name} needs n in {self.dimensions}, got n={ctx.n}", {"n": ctx.n})
        if need_r and self.needs_r and ctx.r is None:
            raise DomainError(f"{self.name} needs a kernel radius r")

    def metadata(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "kind": self.kind,
            "needs_r": self.needs_r,
            "variants": self.variant_aware,
            "s_domain": list(self.s_domain),
            "dimensions": list(self.dimensions),
            "expected_order": self.expansion is not None,
            "limit_target": self.limit.target_name if self.limit else None,
            "description": self.description,
        }


# ============ Shared targets ============

def _half_sphere_weight(ctx: RunContext) -> Callable[[ScalarField, np.ndarray], float]:
    """(1/(2 r^p)) int_{S^{n-1}} |u(x)-u(x-r w)|^{p-2} dw"""
    def target(u, x):
        r = ctx.radius()
        ux = float(u.value(x))
        integral = sphere_integral(lambda w: np.abs(ux - u.value(x - r * w)) ** (ctx.p - 2.0), u.n, ctx.spec)
        return integral / (2.0 * r ** ctx.p)
    return target


def _frac_p_target(ctx: RunContext):
    def target(u, x):
        gamma_p, _ = directional_moments(ctx.n, ctx.p)
        return -gamma_p * (ctx.p - 1.0) / (2.0 * ctx.p) * local_ops.p_laplacian(u, x, ctx.p)
    return target


def _fplap_split(ctx: RunContext) -> Dict[str, asymptotics.LimitOp]:
    if ctx.r is None:
        return {}
    return {"far_scaled": lambda u, x, s: (1.0 - s) * frac_p.frac_p_split(u, ctx.params(x, s=s), ctx.spec)[0]}


class OperatorRegistry:
    """Named operators addressable from the command line"""

    def __init__(self):
        entries = [
            # Local operators
            OperatorEntry("lap", lambda u, x, c: local_ops.laplacian(u, x), kind="local"),
            OperatorEntry("plap", lambda u, x, c: local_ops.p_laplacian(u, x, c.p), kind="local"),
            OperatorEntry("nplap", lambda u, x, c: local_ops.normalized_p_laplacian(u, x, c.p, c.variant),
                          kind="local", variant_aware=True),
            OperatorEntry("inflap", lambda u, x, c: local_ops.infinity_laplacian(u, x, c.variant),
                          kind="local", variant_aware=True),
            OperatorEntry(
                "pmean", lambda u, x, c: local_ops.local_p_mean(u, x, c.radius(), c.p, c.spec),
                kind="local", needs_r=True,
                expansion=Expansion(
                    lambda c: lambda u, x, r: asymptotics.local_p_expansion_residual(u, x, r, c.p, c.spec),
                    lambda c: c.p, two_sided=True, tolerance=0.4,
                ),
            ),
            OperatorEntry(
                "gpmean", lambda u, x, c: local_ops.local_grad_p_mean(u, x, c.radius(), c.p, c.variant, c.spec),
                kind="local", needs_r=True, variant_aware=True, dimensions=(2, 3),
                expansion=Expansion(
                    lambda c: lambda u, x, r: asymptotics.local_grad_p_gap(u, x, r, c.p, c.variant, c.spec),
                    lambda c: 2.0, two_sided=True, tolerance=settings.LOCAL_SLOPE_TOL,
                ),
            ),
            OperatorEntry(
                "infmean", lambda u, x, c: local_ops.local_infinity_mean(u, x, c.radius(), c.variant),
                kind="local", needs_r=True, variant_aware=True,
                expansion=Expansion(
                    lambda c: lambda u, x, r: asymptotics.local_infinity_gap(u, x, r, c.variant),
                    lambda c: 2.0, two_sided=True, tolerance=settings.LOCAL_SLOPE_TOL,
                ),
            ),
        ]

        fp_expansion = Expansion(
            lambda c: lambda u, x, r: frac_p.frac_p_residual(u, c.params(x, r=r), c.spec),
            lambda c: 2.0 - 2.0 * c.s,
        )
        entries += [
            OperatorEntry(
                "fplap", lambda u, x, c: frac_p.frac_p_laplacian(u, c.params(x), c.spec),
                expansion=fp_expansion,
                limit=Limit(
                    lambda c: lambda u, x, s: frac_p.frac_p_laplacian(u, c.params(x, s=s), c.spec),
                    _frac_p_target, "-gamma_p(p-1)/(2p) p_laplacian", scaled=True, tolerance=0.05,
                    diagnostics=_fplap_split,
                ),
            ),
            OperatorEntry(
                "Drsp", lambda u, x, c: frac_p.d_rsp(u, c.params(x), c.spec), needs_r=True,
                expansion=fp_expansion,
                limit=Limit(
                    lambda c: lambda u, x, s: frac_p.d_rsp(u, c.params(x, s=s), c.spec),
                    _half_sphere_weight, "sphere weight / (2 r^p)", scaled=True, tolerance=0.02,
                ),
            ),
            OperatorEntry(
                "Mrsp", lambda u, x, c: frac_p.m_rsp(u, c.params(x), c.spec), needs_r=True,
                expansion=fp_expansion,
                limit=Limit(
                    lambda c: lambda u, x, s: frac_p.m_rsp(u, c.params(x, s=s), c.spec),
                    lambda c: lambda u, x: local_ops.local_p_mean(u, x, c.radius(), c.p, c.spec),
                    "local_p_mean", scaled=False, tolerance=0.02,
                ),
            ),
            OperatorEntry(
                "fp-residual", lambda u, x, c: frac_p.frac_p_residual(u, c.params(x), c.spec), needs_r=True,
                expansion=fp_expansion,
            ),
            OperatorEntry(
                "lfmean", lambda u, x, c: frac_p.linear_frac_mean(u, x, c.n, c.s, c.radius(), c.spec),
                needs_r=True,
                limit=Limit(
                    lambda c: lambda u, x, s: frac_p.linear_frac_mean(u, x, c.n, s, c.radius(), c.spec),
                    lambda c: lambda u, x: local_ops.local_p_mean(u, x, c.radius(), 2.0, c.spec),
                    "sphere_average", scaled=False, tolerance=0.02,
                ),
            ),
        ]

        gf_expansion = Expansion(
            lambda c: lambda u, x, r: grad_frac.grad_frac_residual(u, x, c.s, c.p, r, c.variant, c.spec),
            lambda c: 2.0,
        )
        inf_expansion = Expansion(
            lambda c: lambda u, x, r: grad_frac.infinity_frac_residual(u, x, c.s, r, c.spec),
            lambda c: 2.0,
        )
        upper_half = (0.5, 1.0)
        entries += [
            OperatorEntry(
                "gfplap", lambda u, x, c: grad_frac.grad_frac_p_laplacian(u, x, c.s, c.p, c.variant, c.spec),
                variant_aware=True, s_domain=upper_half, dimensions=(2, 3), expansion=gf_expansion,
                limit=Limit(
                    lambda c: lambda u, x, s: grad_frac.grad_frac_p_laplacian(u, x, s, c.p, c.variant, c.spec),
                    # sup over the cap axis of -Delta^N_xi is -(inf Delta^N_xi)
                    lambda c: lambda u, x: -local_ops.normalized_p_laplacian(
                        u, x, c.p, grad_frac.OPPOSITE[c.variant]),
                    "-normalized_p_laplacian", scaled=True, tolerance=0.05,
                ),
            ),
            OperatorEntry(
                "gfpmean",
                lambda u, x, c: grad_frac.grad_frac_p_mean(u, x, c.s, c.p, c.radius(), c.variant, c.spec),
                needs_r=True, variant_aware=True, s_domain=upper_half, dimensions=(2, 3), expansion=gf_expansion,
                limit=Limit(
                    lambda c: lambda u, x, s: grad_frac.grad_frac_p_mean(u, x, s, c.p, c.radius(), c.variant, c.spec),
                    lambda c: lambda u, x: local_ops.local_grad_p_mean(u, x, c.radius(), c.p, c.variant, c.spec),
                    "local_grad_p_mean", scaled=False, tolerance=0.02,
                ),
            ),
            OperatorEntry(
                "gf-residual",
                lambda u, x, c: grad_frac.grad_frac_residual(u, x, c.s, c.p, c.radius(), c.variant, c.spec),
                needs_r=True, variant_aware=True, s_domain=upper_half, dimensions=(2, 3), expansion=gf_expansion,
            ),
            OperatorEntry(
                "inffrac", lambda u, x, c: grad_frac.infinity_frac_laplacian(u, x, c.s, c.spec),
                s_domain=upper_half, expansion=inf_expansion,
                limit=Limit(
                    lambda c: lambda u, x, s: grad_frac.infinity_frac_laplacian(u, x, s, c.spec),
                    lambda c: lambda u, x: -0.5 * local_ops.infinity_laplacian(u, x, VariantEnum.auto),
                    "-infinity_laplacian/2", scaled=True, tolerance=0.05,
                ),
            ),
            OperatorEntry(
                "inffracmean", lambda u, x, c: grad_frac.infinity_frac_mean(u, x, c.s, c.radius(), c.spec),
                needs_r=True, s_domain=upper_half, expansion=inf_expansion,
                limit=Limit(
                    lambda c: lambda u, x, s: grad_frac.infinity_frac_mean(u, x, s, c.radius(), c.spec),
                    lambda c: lambda u, x: local_ops.local_infinity_mean(u, x, c.radius(), VariantEnum.auto),
                    "local_infinity_mean", scaled=False, tolerance=1e-3,
                ),
            ),
            OperatorEntry(
                "inf-residual", lambda u, x, c: grad_frac.infinity_frac_residual(u, x, c.s, c.radius(), c.spec),
                needs_r=True, s_domain=upper_half, expansion=inf_expansion,
            ),
        ]
        self.operators: Dict[str, OperatorEntry] = {entry.name: entry for entry in entries}

    def names(self) -> List[str]:
        """CLI names, with +/- forms for operators that branch at critical points"""
        result = []
        for name, entry in self.operators.items():
            result.append(name)
            if entry.variant_aware:
                result.extend([f"{name}+", f"{name}-"])
        return result

    def resolve(self, name: str) -> Tuple[OperatorEntry, Optional[VariantEnum]]:
        variant = None
        base = name
        if name and name[-1] in VARIANT_SUFFIXES:
            base, variant = name[:-1], VARIANT_SUFFIXES[name[-1]]
        entry = self.operators.get(base)
        if entry is None or (variant is not None and not entry.variant_aware):
            raise ConfigError(f"Unknown operator: {name}", field="operator")
        return entry, variant

    def evaluate(self, name: str, u: ScalarField, x, ctx: RunContext) -> float:
        entry, variant = self.resolve(name)
        if variant is not None:
            ctx = RunContext(ctx.n, ctx.s, ctx.p, ctx.r, variant, ctx.spec)
        entry.validate(ctx)
        value = float(entry.evaluate(u, u.check_point(x), ctx))
        logger.debug(f"{name} at x={list(np.atleast_1d(x))}: {value:.12e}")
        return value


# Global instance
operator_registry = OperatorRegistry()
