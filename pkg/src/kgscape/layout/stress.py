"""Global type arrangement by stress majorization.

Type centers are embedded in the plane so Euclidean distances approximate the
ontological hop distances scaled by a spacing constant. Weights are the usual
inverse squared targets, which makes the objective the summed squared relative
error; majorization sweeps run from a deterministic circular start.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

from ..model import DistanceMatrix

MAX_SWEEPS = 200
REL_TOL = 1e-6


def _stress_value(X: np.ndarray, targets: np.ndarray) -> float:
    diff = X[:, None, :] - X[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=2))
    iu = np.triu_indices(len(X), k=1)
    t = targets[iu]
    d = dist[iu]
    mask = t > 0
    return float((((d[mask] - t[mask]) / t[mask]) ** 2).sum())


def normalized_stress(
    positions: Mapping[str, tuple[float, float]],
    dm: DistanceMatrix,
    spacing: float,
) -> float:
    """Scale-adjusted mean squared relative error over type pairs.

    The layout is allowed its best uniform rescaling before scoring, so the
    value measures shape mismatch rather than unit choice.
    """
    order = dm.order
    X = np.array([positions[t] for t in order])
    targets = dm.d * spacing
    iu = np.triu_indices(len(order), k=1)
    t = targets[iu]
    diff = X[:, None, :] - X[None, :, :]
    d = np.sqrt((diff ** 2).sum(axis=2))[iu]
    mask = t > 0
    if not mask.any():
        return 0.0
    r = d[mask] / t[mask]
    denom = float((r ** 2).sum())
    alpha = float(r.sum()) / denom if denom > 0 else 1.0
    return float(((alpha * r - 1.0) ** 2).mean())


def _classical_scaling(targets: np.ndarray) -> np.ndarray:
    """Torgerson double-centering start; deterministic sign convention."""
    n = len(targets)
    sq = targets ** 2
    centering = np.eye(n) - np.ones((n, n)) / n
    b = -0.5 * centering @ sq @ centering
    eigvals, eigvecs = np.linalg.eigh(b)
    idx = np.argsort(eigvals)[::-1][:2]
    coords = eigvecs[:, idx] * np.sqrt(np.maximum(eigvals[idx], 0.0))
    for col in range(coords.shape[1]):
        column = coords[:, col]
        nonzero = column[np.abs(column) > 1e-12]
        if nonzero.size and nonzero[0] < 0:
            coords[:, col] = -column
    return coords


def _majorize(X: np.ndarray, targets: np.ndarray, weights: np.ndarray) -> np.ndarray:
    row_sums = weights.sum(axis=1)
    prev = _stress_value(X, targets)
    for _ in range(MAX_SWEEPS):
        diff = X[:, None, :] - X[None, :, :]
        dist = np.sqrt((diff ** 2).sum(axis=2))
        np.fill_diagonal(dist, 1.0)
        ratio = weights * targets / np.maximum(dist, 1e-12)
        np.fill_diagonal(ratio, 0.0)
        X = (weights @ X + X * ratio.sum(axis=1)[:, None] - ratio @ X) / row_sums[:, None]
        current = _stress_value(X, targets)
        if prev > 0 and (prev - current) / prev < REL_TOL:
            return X
        prev = current
    return X


def arrange_ontology(dm: DistanceMatrix, spacing: float) -> dict[str, tuple[float, float]]:
    """Embed type centers by majorization; centroid translated to the origin.

    Majorization runs from a classical-scaling start and a circular start (the
    landscape has poor local minima for hub-heavy ontologies); the lower-stress
    result wins, so output stays deterministic.
    """
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    order = dm.order
    n = len(order)
    if n == 1:
        return {order[0]: (0.0, 0.0)}

    targets = dm.d * spacing
    with np.errstate(divide="ignore"):
        weights = np.where(targets > 0, 1.0 / np.maximum(targets, 1e-12) ** 2, 0.0)
    np.fill_diagonal(weights, 0.0)

    starts = [_classical_scaling(targets)]
    radius = spacing * float(dm.d.max()) / 2.0
    angles = 2.0 * np.pi * np.arange(n) / n
    starts.append(np.column_stack([radius * np.cos(angles), radius * np.sin(angles)]))

    best_X, best_stress = None, np.inf
    for start in starts:
        X = _majorize(start.copy(), targets, weights)
        value = _stress_value(X, targets)
        if value < best_stress - 1e-12:
            best_X, best_stress = X, value

    best_X = best_X - best_X.mean(axis=0)
    return {t: (float(x), float(y)) for t, (x, y) in zip(order, best_X)}
