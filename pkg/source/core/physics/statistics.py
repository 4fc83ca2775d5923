#############################################################################
##
## Copyright (C) 2025 Killian-W.
## All rights reserved.
##
## This file is part of the Qtraj project.
##
## Licensed under the MIT License.
## You may obtain a copy of the License at:
##     https://opensource.org/licenses/MIT
##
## This software is provided "as is," without warranty of any kind.
##
#############################################################################

"""Histogram statistics for ensemble positions against a target density."""

import logging
import math
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from core.constants import HISTOGRAM_QUANTILES
from core.models import ChiSquareSummary
from numpy.polynomial.legendre import leggauss
from scipy.integrate import cumulative_trapezoid
from scipy.stats import chi2

logger = logging.getLogger("Statistics")

Density = Callable[[np.ndarray], np.ndarray]


def target_cdf(density: Density, domain: Tuple[float, float], points: int = 4001):
    """Normalised cumulative distribution of `density` on a uniform grid."""
    lo, hi = domain
    grid = np.linspace(lo, hi, points)
    values = np.clip(density(grid), 0.0, None)
    cdf = cumulative_trapezoid(values, grid, initial=0.0)
    if cdf[-1] <= 0.0:
        raise ValueError(f"Target density has no weight on [{lo:g}, {hi:g}]")
    return grid, cdf / cdf[-1]


def quantile_range(
    density: Density, domain: Tuple[float, float], quantiles: Sequence[float] = HISTOGRAM_QUANTILES
) -> Tuple[float, float]:
    grid, cdf = target_cdf(density, domain)
    low, high = np.interp(quantiles, cdf, grid)
    return float(low), float(high)


def bin_probabilities(density: Density, edges: np.ndarray, order: int = 16) -> np.ndarray:
    """Integral of the density over each bin by Gauss-Legendre quadrature."""
    nodes, weights = leggauss(order)
    edges = np.asarray(edges, dtype=float)
    left, half = edges[:-1], 0.5 * np.diff(edges)
    points = left[:, None] + half[:, None] * (nodes + 1.0)
    return np.sum(half[:, None] * weights * np.clip(density(points), 0.0, None), axis=1)


def chi_square_summary(
    samples,
    density: Density,
    domain: Tuple[float, float],
    bins: int = 20,
    edges: Optional[np.ndarray] = None,
    lost: int = 0,
    notes: Optional[str] = None,
) -> ChiSquareSummary:
    """
    Pearson chi-square of a histogram of `samples` against `density`.

    Bins are equal-width over the central quantile range of the target
    unless `edges` are given. Expected counts are conditioned on the number
    of samples inside the binned range, so dof = bins - 1.
    """
    if bins < 1:
        raise ValueError(f"bins must be at least 1, got {bins}")
    samples = np.asarray(samples, dtype=float).ravel()
    if edges is None:
        low, high = quantile_range(density, domain)
        edges = np.linspace(low, high, bins + 1)
    edges = np.asarray(edges, dtype=float)

    inside = (samples >= edges[0]) & (samples <= edges[-1])
    counts, _ = np.histogram(samples[inside], edges)
    total = int(np.sum(counts))
    probabilities = bin_probabilities(density, edges)
    expected = total * probabilities / np.sum(probabilities)

    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(expected > 0.0, (counts - expected) ** 2 / expected, 0.0)
    statistic = float(np.sum(terms))
    dof = counts.size - 1
    if dof > 0:
        z_score = (statistic - dof) / math.sqrt(2.0 * dof)
        p_value = float(chi2.sf(statistic, dof))
    else:
        z_score, p_value = 0.0, 1.0

    logger.debug(f"chi2 = {statistic:.3f} on {dof} dof (z = {z_score:.2f}), {total} samples binned")
    return ChiSquareSummary(
        edges=edges,
        counts=counts,
        expected=expected,
        statistic=statistic,
        dof=dof,
        z_score=float(z_score),
        p_value=p_value,
        samples=total,
        excluded=int(samples.size - total),
        lost=int(lost),
        notes=notes,
    )
