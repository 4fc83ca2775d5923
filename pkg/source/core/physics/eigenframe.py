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

"""
Principal directions of a symmetric tensor relative to a metric.

Solves T A = lambda g A by Cholesky reduction g = L L^T followed by a
cyclic Jacobi sweep on L^-1 T L^-T. Stacked inputs (..., n, n) are solved
together; `principal_directions` is the single-point entry that raises on
degenerate spectra.
"""

import logging
from typing import Optional, Sequence, Tuple

import numpy as np
from core.constants import (
    BLOCK_TOLERANCE,
    DEGENERACY_TOLERANCE,
    JACOBI_MAX_SWEEPS,
    MATCH_THRESHOLD,
    SINGULAR_CONDITION,
)
from core.exceptions import AmbiguousMatch, DegenerateSpectrum, SingularMetric
from core.models import PrincipalFrame

logger = logging.getLogger("Eigenframe")

Blocks = Sequence[Sequence[int]]


def jacobi_eigh(
    matrices: np.ndarray, max_sweeps: int = JACOBI_MAX_SWEEPS, tolerance: float = 1e-14
) -> Tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi for stacked symmetric matrices; returns unsorted (values, vectors)."""
    a = np.array(matrices, dtype=float, copy=True)
    n = a.shape[-1]
    v = np.array(np.broadcast_to(np.eye(n), a.shape), copy=True)
    if n < 2:
        return np.diagonal(a, axis1=-2, axis2=-1).copy(), v

    diagonal_mask = np.eye(n, dtype=bool)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(max_sweeps):
            squares = a**2
            off = np.sum(np.where(diagonal_mask, 0.0, squares), axis=(-2, -1))
            if np.all(off <= tolerance**2 * np.sum(squares, axis=(-2, -1))):
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[..., p, q]
                    active = apq != 0.0
                    theta = (a[..., q, q] - a[..., p, p]) / (2.0 * np.where(active, apq, 1.0))
                    t = np.where(theta >= 0.0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(theta**2 + 1.0))
                    t = np.where(active & np.isfinite(t), t, 0.0)
                    c = 1.0 / np.sqrt(t**2 + 1.0)
                    s = t * c
                    cc, sc = c[..., None], s[..., None]

                    col_p, col_q = a[..., :, p].copy(), a[..., :, q].copy()
                    a[..., :, p] = cc * col_p - sc * col_q
                    a[..., :, q] = sc * col_p + cc * col_q
                    row_p, row_q = a[..., p, :].copy(), a[..., q, :].copy()
                    a[..., p, :] = cc * row_p - sc * row_q
                    a[..., q, :] = sc * row_p + cc * row_q
                    vec_p, vec_q = v[..., :, p].copy(), v[..., :, q].copy()
                    v[..., :, p] = cc * vec_p - sc * vec_q
                    v[..., :, q] = sc * vec_p + cc * vec_q
    return np.diagonal(a, axis1=-2, axis2=-1).copy(), v


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Make the first largest-magnitude component of each column positive."""
    magnitude = np.abs(vectors)
    largest = np.max(magnitude, axis=-2, keepdims=True)
    candidates = magnitude >= largest * (1.0 - 1e-12)
    index = np.argmax(candidates, axis=-2)[..., None, :]
    leading = np.take_along_axis(vectors, index, axis=-2)
    return vectors * np.where(leading < 0.0, -1.0, 1.0)


def _degenerate(values: np.ndarray) -> np.ndarray:
    """Sorted spectra whose smallest gap is below the relative tolerance."""
    if values.shape[-1] < 2:
        return np.zeros(values.shape[:-1], dtype=bool)
    spread = values[..., -1] - values[..., 0]
    scale = np.maximum(np.max(np.abs(values), axis=-1), spread)
    gaps = np.min(np.diff(values, axis=-1), axis=-1)
    return (scale == 0.0) | (gaps < DEGENERACY_TOLERANCE * scale)


def _sorted(values: np.ndarray, vectors: np.ndarray):
    order = np.argsort(values, axis=-1, kind="stable")
    values = np.take_along_axis(values, order, axis=-1)
    vectors = np.take_along_axis(vectors, order[..., None, :], axis=-1)
    return values, vectors


def _reduced_solve(T: np.ndarray, g: np.ndarray):
    try:
        lower = np.linalg.cholesky(g)
    except np.linalg.LinAlgError as e:
        raise SingularMetric("Metric is not positive definite") from e
    lower_inv = np.linalg.inv(lower)
    reduced = lower_inv @ T @ np.swapaxes(lower_inv, -1, -2)
    reduced = 0.5 * (reduced + np.swapaxes(reduced, -1, -2))
    values, y = jacobi_eigh(reduced)
    vectors = np.swapaxes(lower_inv, -1, -2) @ y
    return _sorted(values, vectors)


def _separable(matrix: np.ndarray, blocks: Blocks) -> np.ndarray:
    n = matrix.shape[-1]
    owner = np.empty(n, dtype=int)
    for b, block in enumerate(blocks):
        owner[list(block)] = b
    off_block = owner[:, None] != owner[None, :]
    scale = np.max(np.abs(matrix), axis=(-2, -1))
    off = np.max(np.where(off_block, np.abs(matrix), 0.0), axis=(-2, -1))
    return off <= BLOCK_TOLERANCE * scale


def spectrum(T, g, blocks: Optional[Blocks] = None):
    """
    Stacked generalized eigen-solve.

    Returns (values, vectors, degenerate) with ascending eigenvalues,
    g-orthonormal eigenvector columns and a per-item degeneracy mask. When
    `blocks` partitions the coordinates and both T and g are block-diagonal
    for an item, each block is solved on its own and degeneracy is only
    tested inside a block.
    """
    T = 0.5 * (np.asarray(T, dtype=float) + np.swapaxes(np.asarray(T, dtype=float), -1, -2))
    g = np.asarray(g, dtype=float)
    g = np.array(np.broadcast_to(g, T.shape))
    condition = np.linalg.cond(g) if g.shape[-1] else np.ones(g.shape[:-2])
    if np.any(~np.isfinite(condition)) or np.any(condition > SINGULAR_CONDITION):
        raise SingularMetric(f"Metric condition number {np.max(condition):.3e} exceeds limit")

    values, vectors = _reduced_solve(T, g)
    degenerate = _degenerate(values)

    if blocks is not None and len(blocks) > 1:
        split = _separable(T, blocks) & _separable(g, blocks)
        if np.any(split):
            n = T.shape[-1]
            block_values, block_vectors, block_degenerate = [], [], []
            for block in blocks:
                index = np.asarray(block, dtype=int)
                sub_t = T[..., index[:, None], index[None, :]]
                sub_g = g[..., index[:, None], index[None, :]]
                sub_values, sub_vectors = _reduced_solve(sub_t, sub_g)
                embedded = np.zeros(T.shape[:-2] + (n, index.size))
                embedded[..., index, :] = sub_vectors
                block_values.append(sub_values)
                block_vectors.append(embedded)
                block_degenerate.append(_degenerate(sub_values))
            joined_values, joined_vectors = _sorted(
                np.concatenate(block_values, axis=-1), np.concatenate(block_vectors, axis=-1)
            )
            values = np.where(split[..., None], joined_values, values)
            vectors = np.where(split[..., None, None], joined_vectors, vectors)
            degenerate = np.where(split, np.any(block_degenerate, axis=0), degenerate)

    return values, _fix_signs(vectors), degenerate


def principal_directions(T, g, q, blocks: Optional[Blocks] = None) -> PrincipalFrame:
    """Full spectrum of det(T - lambda g) = 0 at one point."""
    T = np.asarray(T, dtype=float)
    g = np.asarray(g, dtype=float)
    values, vectors, degenerate = spectrum(T, g, blocks)
    if bool(degenerate):
        raise DegenerateSpectrum(
            f"Eigenvalues {np.array2string(values, precision=6)} are not simple "
            f"at q = {np.array2string(np.asarray(q), precision=6)}"
        )
    return PrincipalFrame(eigenvalues=values, vectors=vectors, point=np.asarray(q, dtype=float), metric=g)


def match_frames(previous: PrincipalFrame, current: PrincipalFrame):
    """
    Greedy overlap matching of current's eigenvectors to previous'.

    Returns (order, flips): previous mode a continues as current column
    order[a], multiplied by flips[a].
    """
    if previous.dimension != current.dimension:
        raise ValueError("Frames must have the same dimension")
    overlaps = previous.overlaps(current)
    magnitude = np.abs(overlaps)
    n = previous.dimension
    order = np.full(n, -1, dtype=int)
    rows_used = np.zeros(n, dtype=bool)
    cols_used = np.zeros(n, dtype=bool)
    for _ in range(n):
        masked = np.where(rows_used[:, None] | cols_used[None, :], -1.0, magnitude)
        a, b = np.unravel_index(np.argmax(masked), masked.shape)
        order[a] = b
        rows_used[a] = True
        cols_used[b] = True

    best = magnitude[np.arange(n), order]
    if np.any(best < MATCH_THRESHOLD):
        raise AmbiguousMatch(
            f"Frame rotated too far between steps (weakest overlap {np.min(best):.3f})"
        )
    flips = np.where(overlaps[np.arange(n), order] < 0.0, -1.0, 1.0)
    return order, flips


def align_frame(previous: PrincipalFrame, current: PrincipalFrame) -> PrincipalFrame:
    order, flips = match_frames(previous, current)
    return PrincipalFrame(
        eigenvalues=current.eigenvalues[order],
        vectors=current.vectors[:, order] * flips,
        point=current.point,
        metric=current.metric,
    )
