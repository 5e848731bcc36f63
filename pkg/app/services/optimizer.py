"""
MeanLab Direction Search Service
Sup/inf of a scalar objective over the unit sphere: coarse grid, then local refinement
"""
import logging
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from app.config import settings
from app.exceptions import DomainError, OptimizerError
from app.utils.linalg import angles_from_direction, direction_from_angles

logger = logging.getLogger(__name__)

Objective = Callable[[np.ndarray], float]
BatchObjective = Callable[[np.ndarray], np.ndarray]


class DirectionResult:
    """Extremal value, the direction attaining it and whether refinement converged"""
    def __init__(
        self,
        value: float,
        direction: np.ndarray,
        converged: bool,
        grid_values: Optional[np.ndarray] = None,
        evaluations: int = 0,
    ):
        self.value = value
        self.direction = direction
        self.converged = converged
        self.grid_values = grid_values
        self.evaluations = evaluations

    def to_dict(self):
        return {
            "value": self.value,
            "direction": self.direction.tolist(),
            "converged": self.converged,
            "evaluations": self.evaluations,
        }


def fibonacci_sphere(count: int, hemisphere: bool = False) -> np.ndarray:
    """Nearly uniform points on S^2; the upper hemisphere only when requested"""
    k = np.arange(count) + 0.5
    z = 1.0 - k / count if hemisphere else 1.0 - 2.0 * k / count
    radius = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = np.pi * (1.0 + 5.0 ** 0.5) * k
    return np.stack([radius * np.cos(phi), radius * np.sin(phi), z], axis=1)


class DirectionSearch:
    """
    Extremize an objective F(xi) over xi in S^{n-1}.

    The grid is a uniform angle grid for n = 2 and a Fibonacci grid for n = 3.
    The best `refinements` grid candidates are polished with bounded golden
    section (n = 2) or Nelder-Mead in spherical angles (n = 3). With
    symmetric=True the objective is assumed even and only a half-sphere is searched.
    """

    def __init__(
        self,
        n: int,
        symmetric: bool = False,
        grid_size: Optional[int] = None,
        refinements: Optional[int] = None,
        xtol: Optional[float] = None,
    ):
        if n not in (1, 2, 3):
            raise DomainError(f"Direction search needs n in {{1,2,3}}, got n={n}")
        self.n = n
        self.symmetric = symmetric
        self.grid_size = grid_size or settings.DIRECTION_GRID
        self.refinements = settings.DIRECTION_REFINEMENTS if refinements is None else refinements
        self.xtol = xtol or settings.DIRECTION_XTOL

    def grid(self) -> np.ndarray:
        if self.n == 1:
            return np.array([[1.0]]) if self.symmetric else np.array([[1.0], [-1.0]])
        if self.n == 2:
            span = np.pi if self.symmetric else 2.0 * np.pi
            theta = span * np.arange(self.grid_size) / self.grid_size
            return np.stack([np.cos(theta), np.sin(theta)], axis=1)
        # n = 3: roughly grid_size points per great circle
        count = max(8, self.grid_size ** 2 // (4 if self.symmetric else 2))
        return fibonacci_sphere(count, hemisphere=self.symmetric)

    def _spacing(self) -> float:
        if self.n == 2:
            return (np.pi if self.symmetric else 2.0 * np.pi) / self.grid_size
        return 2.0 * np.pi / self.grid_size

    def maximize(self, objective: Objective, batch: Optional[BatchObjective] = None) -> DirectionResult:
        return self._search(objective, batch, sign=1.0)

    def minimize(self, objective: Objective, batch: Optional[BatchObjective] = None) -> DirectionResult:
        return self._search(objective, batch, sign=-1.0)

    def _search(self, objective: Objective, batch: Optional[BatchObjective], sign: float) -> DirectionResult:
        directions = self.grid()
        if batch is not None:
            values = np.asarray(batch(directions), dtype=float)
        else:
            values = np.array([objective(d) for d in directions])
        evaluations = len(directions)
        if not np.any(np.isfinite(values)):
            raise OptimizerError("Objective is not finite anywhere on the direction grid",
                                 {"grid_size": len(directions)})
        scored = np.where(np.isfinite(values), sign * values, -np.inf)
        best_index = int(np.argmax(scored))
        best_value, best_dir = float(values[best_index]), directions[best_index]
        if self.n == 1 or self.refinements == 0:
            return DirectionResult(best_value, best_dir, True, values, evaluations)

        converged_any = False
        for index in np.argsort(-scored)[: self.refinements]:
            value, direction, converged, calls = self._refine(objective, directions[index], sign)
            evaluations += calls
            converged_any = converged_any or converged
            if sign * value > sign * best_value:
                best_value, best_dir = value, direction
        if not converged_any:
            logger.warning(f"Direction refinement did not converge; keeping best value {best_value:.6e}")
        return DirectionResult(best_value, best_dir, converged_any, values, evaluations)

    def _refine(self, objective: Objective, start: np.ndarray, sign: float):
        angles = angles_from_direction(start)
        half = self._spacing()

        def negated(a) -> float:
            return -sign * objective(direction_from_angles(a, self.n))

        if self.n == 2:
            theta = float(angles[0])
            result = minimize_scalar(
                lambda t: negated(np.array([t])),
                bounds=(theta - half, theta + half),
                method="bounded",
                options={"xatol": self.xtol},
            )
            best = direction_from_angles(np.array([result.x]), 2)
            return -sign * float(result.fun), best, bool(result.success), int(result.nfev)

        simplex = np.array([angles, angles + [half, 0.0], angles + [0.0, half]])
        result = minimize(
            negated,
            angles,
            method="Nelder-Mead",
            options={"xatol": self.xtol, "fatol": 1e-13, "initial_simplex": simplex, "maxiter": 400},
        )
        best = direction_from_angles(result.x, 3)
        return -sign * float(result.fun), best, bool(result.success), int(result.nfev)
