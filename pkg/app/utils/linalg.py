"""
MeanLab Linear Algebra Utilities
Unit vectors, orthonormal frames and Hessian extremes
"""
from typing import Tuple

import numpy as np


def as_point(x, n: int = None) -> np.ndarray:
    """Coerce a point to a float vector, checking its dimension when given"""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise ValueError(f"Point must be a vector, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"Point has dimension {arr.shape[0]}, expected {n}")
    return arr


def unit(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise ValueError("Cannot normalize the zero vector")
    return v / norm


def orthonormal_frame(axis: np.ndarray) -> np.ndarray:
    """
    Rows form an orthonormal basis whose first row is `axis`.
    Deterministic: the completion uses the coordinate vector least aligned with axis.
    """
    e = unit(axis)
    n = e.shape[0]
    if n == 1:
        return e.reshape(1, 1)
    basis = [e]
    for k in np.argsort(np.abs(e)):
        if len(basis) == n:
            break
        v = np.zeros(n)
        v[k] = 1.0
        for b in basis:
            v = v - np.dot(v, b) * b
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            basis.append(v / norm)
    return np.array(basis)


def hessian_extremes(hessian: np.ndarray) -> Tuple[float, float]:
    """(min, max) of <H xi, xi> over the unit sphere: the extreme eigenvalues"""
    eigenvalues = np.linalg.eigvalsh(np.asarray(hessian, dtype=float))
    return float(eigenvalues[0]), float(eigenvalues[-1])


def direction_from_angles(angles: np.ndarray, n: int) -> np.ndarray:
    """Angle parametrization of S^{n-1}: theta for n=2, (theta, phi) for n=3"""
    angles = np.atleast_1d(angles)
    if n == 2:
        return np.array([np.cos(angles[0]), np.sin(angles[0])])
    if n == 3:
        theta, phi = angles[0], angles[1]
        return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
    raise ValueError(f"No angle parametrization for n={n}")


def angles_from_direction(direction: np.ndarray) -> np.ndarray:
    d = unit(direction)
    if d.shape[0] == 2:
        return np.array([np.arctan2(d[1], d[0])])
    if d.shape[0] == 3:
        return np.array([np.arccos(np.clip(d[2], -1.0, 1.0)), np.arctan2(d[1], d[0])])
    raise ValueError(f"No angle parametrization for n={d.shape[0]}")


def random_rotation(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix via QR with sign correction"""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))
