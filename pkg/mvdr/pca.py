#!/usr/bin/python3

"""Module containing correlation-matrix principal component analysis"""
# The pca module is part of MVDR
# Copyright (C) 2026  MVDR contributors

# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, version 3.

# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.
# SPDX-License-Identifier: GPL-3.0-only

from __future__ import annotations
import logging
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union
import numpy as np
from .fusion import FeatureMatrix
from .errors import ConvergenceError, DegenerateInputError, ShapeError


__all__ = (
    "DEFAULT_THRESHOLD",
    "JACOBI_TOLERANCE",
    "JACOBI_MAX_SWEEPS",
    "GRAM_CUTOFF",
    "Standardization",
    "CorrelationMatrix",
    "EigenPair",
    "PcaModel",
    "standardize",
    "correlation",
    "eigen_symmetric",
    "sort_eigenpairs",
    "select_components",
    "fit",
    "project"
)

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.85

JACOBI_TOLERANCE = 1e-10

JACOBI_MAX_SWEEPS = 100

# gram eigenvalues below this fraction of the largest one belong to the null space
GRAM_CUTOFF = 1e-8

# columns whose spread is below this (relative to their mean) count as constant
ZERO_VARIANCE = 1e-12

MatrixLike = Union[FeatureMatrix, np.ndarray]


def _matrix(x: MatrixLike) -> np.ndarray:
    data = x.data if isinstance(x, FeatureMatrix) else np.asarray(x, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] == 0 or data.shape[1] == 0:
        raise ShapeError(f"expected a non-empty 2-D matrix, got shape {data.shape}")
    return data


class Standardization:
    """column means, population standard deviations and the mask of constant columns"""
    __slots__ = ("means", "stds", "zero_variance_mask", "__weakref__")

    means: np.ndarray

    stds: np.ndarray

    zero_variance_mask: np.ndarray

    def __init__(self, means: np.ndarray, stds: np.ndarray, zero_variance_mask: np.ndarray) -> None:
        means = np.array(means, dtype=np.float64)
        stds = np.array(stds, dtype=np.float64)
        mask = np.array(zero_variance_mask, dtype=bool)
        if not (means.ndim == 1 and means.shape == stds.shape == mask.shape):
            raise ShapeError("means, stds and mask expected to be vectors of equal length")
        if np.any(stds < 0.0) or np.any(stds[mask] != 0.0):
            raise ValueError("stds expected to be non-negative and zero for masked columns")
        for array in (means, stds, mask):
            array.setflags(write=False)
        self.means = means
        self.stds = stds
        self.zero_variance_mask = mask

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Standardization):
            return np.array_equal(self.means, other.means) \
                and np.array_equal(self.stds, other.stds) \
                and np.array_equal(self.zero_variance_mask, other.zero_variance_mask)
        return NotImplemented

    @property
    def n(self) -> int:
        return int(self.means.shape[0])

    def apply(self, x: np.ndarray) -> np.ndarray:
        """standardize rows with the stored statistics, masked columns become 0"""
        divisor = np.where(self.zero_variance_mask, 1.0, self.stds)
        return np.where(self.zero_variance_mask, 0.0, (x - self.means) / divisor)


class CorrelationMatrix:
    """symmetric matrix of pairwise feature correlations"""
    __slots__ = ("entries", "__weakref__")

    entries: np.ndarray

    def __init__(self, entries: np.ndarray) -> None:
        entries = np.array(entries, dtype=np.float64)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ShapeError(f"correlation matrix expected to be square, got shape {entries.shape}")
        upper = np.triu(entries)
        entries = upper + np.triu(entries, 1).T     # mirror the upper triangle
        entries.setflags(write=False)
        self.entries = entries

    def __eq__(self, other: object) -> bool:
        if isinstance(other, CorrelationMatrix):
            return np.array_equal(self.entries, other.entries)
        return NotImplemented

    @property
    def n(self) -> int:
        return int(self.entries.shape[0])


class EigenPair(NamedTuple):
    """eigenvalue with its unit eigenvector"""
    value: float
    vector: np.ndarray


class PcaModel:
    """standardization statistics, sorted eigenpairs and the retained component count"""
    __slots__ = ("standardization", "eigenvalues", "eigenvectors", "w", "threshold", "__weakref__")

    standardization: Standardization

    eigenvalues: np.ndarray

    eigenvectors: np.ndarray

    w: int

    threshold: float

    def __init__(self, standardization: Standardization, eigenvalues: np.ndarray, eigenvectors: np.ndarray, w: int, threshold: float) -> None:
        eigenvalues = np.array(eigenvalues, dtype=np.float64)
        eigenvectors = np.array(eigenvectors, dtype=np.float64)
        if eigenvectors.shape != (standardization.n, eigenvalues.shape[0]):
            raise ShapeError(
                f"eigenvectors expected to have shape {(standardization.n, eigenvalues.shape[0])}, got {eigenvectors.shape}"
            )
        if not 1 <= w <= eigenvalues.shape[0]:
            raise ValueError(f"retained component count {w} out of range")
        eigenvalues.setflags(write=False)
        eigenvectors.setflags(write=False)
        self.standardization = standardization
        self.eigenvalues = eigenvalues
        self.eigenvectors = eigenvectors
        self.w = w
        self.threshold = threshold

    def __eq__(self, other: object) -> bool:
        if isinstance(other, PcaModel):
            return self.standardization == other.standardization \
                and np.array_equal(self.eigenvalues, other.eigenvalues) \
                and np.array_equal(self.eigenvectors, other.eigenvectors) \
                and self.w == other.w \
                and self.threshold == other.threshold
        return NotImplemented

    @property
    def n(self) -> int:
        """input width"""
        return self.standardization.n

    @property
    def eigenpairs(self) -> List[EigenPair]:
        return [EigenPair(float(value), self.eigenvectors[:, index]) for index, value in enumerate(self.eigenvalues)]

    def basis(self) -> np.ndarray:
        """the retained (n, w) projection basis"""
        return self.eigenvectors[:, :self.w]

    def explained_ratio(self) -> np.ndarray:
        """cumulative fraction of the eigenvalue mass per component count"""
        cumulative = np.cumsum(self.eigenvalues)
        return cumulative / cumulative[-1]


def standardize(x: MatrixLike) -> Tuple[np.ndarray, Standardization]:
    """z-score every column with its mean and population standard deviation"""
    data = _matrix(x)
    means = data.mean(axis=0)
    centered = data - means
    stds = np.sqrt(np.mean(centered * centered, axis=0))
    mask = stds <= ZERO_VARIANCE * np.maximum(1.0, np.abs(means))
    stds = np.where(mask, 0.0, stds)
    standardization = Standardization(means, stds, mask)
    return standardization.apply(data), standardization


def correlation(a: np.ndarray, mask: Optional[np.ndarray] = None) -> CorrelationMatrix:
    """pearson correlation between the columns of a standardized matrix"""
    data = _matrix(a)
    centered = data - data.mean(axis=0)
    products = centered.T @ centered
    squares = np.diag(products).copy()
    if mask is None:
        mask = squares == 0.0
    else:
        mask = np.asarray(mask, dtype=bool) | (squares == 0.0)
    norms = np.sqrt(np.where(mask, 1.0, squares))
    entries = products / np.outer(norms, norms)
    entries[mask, :] = 0.0
    entries[:, mask] = 0.0
    np.fill_diagonal(entries, 1.0)
    return CorrelationMatrix(entries)


def _rounds(n: int) -> List[Tuple[np.ndarray, np.ndarray]]:
    """round-robin schedule visiting every index pair once, with disjoint pairs per round"""
    size = n + (n % 2)
    players = list(range(size))
    rounds = []
    for _ in range(size - 1):
        pairs = sorted(
            (min(players[i], players[size - 1 - i]), max(players[i], players[size - 1 - i]))
            for i in range(size // 2)
        )
        pairs = [pair for pair in pairs if pair[1] < n]     # drop the padding index
        if pairs:
            rounds.append((
                np.array([pair[0] for pair in pairs], dtype=np.intp),
                np.array([pair[1] for pair in pairs], dtype=np.intp)
            ))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _off_norm(a: np.ndarray) -> float:
    upper = np.triu(a, 1)
    return float(np.sqrt(2.0 * np.sum(upper * upper)))


def eigen_symmetric(r: Union[CorrelationMatrix, np.ndarray], tolerance: float = JACOBI_TOLERANCE, max_sweeps: int = JACOBI_MAX_SWEEPS) -> List[EigenPair]:
    """all eigenpairs of a symmetric matrix by cyclic Jacobi rotations"""
    entries = r.entries if isinstance(r, CorrelationMatrix) else np.asarray(r, dtype=np.float64)
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1] or entries.shape[0] == 0:
        raise ShapeError(f"expected a non-empty square matrix, got shape {entries.shape}")
    a = np.triu(entries) + np.triu(entries, 1).T
    n = a.shape[0]
    v = np.eye(n)
    norm = float(np.linalg.norm(a))
    rounds = _rounds(n)
    sweep = 0
    while True:
        off = _off_norm(a)
        if off <= tolerance * norm:
            break
        if sweep == max_sweeps:
            raise ConvergenceError(f"jacobi rotations did not converge after {max_sweeps} sweeps", off)
        sweep += 1
        # pairs of one round are disjoint, so their rotations commute and apply at once
        for p, q in rounds:
            apq = a[p, q]
            active = apq != 0.0
            if not np.any(active):
                continue
            p, q, apq = p[active], q[active], apq[active]
            theta = (a[q, q] - a[p, p]) / (2.0 * apq)
            t = np.where(theta >= 0.0, 1.0, -1.0) / (np.abs(theta) + np.hypot(theta, 1.0))
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            ap, aq = a[:, p], a[:, q]
            a[:, p] = ap * c - aq * s
            a[:, q] = ap * s + aq * c
            ap, aq = a[p, :], a[q, :]
            a[p, :] = c[:, np.newaxis] * ap - s[:, np.newaxis] * aq
            a[q, :] = s[:, np.newaxis] * ap + c[:, np.newaxis] * aq
            a[p, q] = 0.0
            a[q, p] = 0.0
            vp, vq = v[:, p], v[:, q]
            v[:, p] = vp * c - vq * s
            v[:, q] = vp * s + vq * c
    logger.debug("jacobi converged after %d sweeps (n=%d)", sweep, n)
    pairs = []
    for index in range(n):
        vector = v[:, index].copy()
        if vector[np.argmax(np.abs(vector))] < 0.0:     # largest component positive
            vector = -vector
        vector.setflags(write=False)
        pairs.append(EigenPair(float(a[index, index]), vector))
    return pairs


def sort_eigenpairs(pairs: Sequence[EigenPair]) -> List[EigenPair]:
    """sort descending by eigenvalue, ties keep their original order"""
    return sorted(pairs, key=lambda pair: -pair.value)


def select_components(eigenvalues: Sequence[float], threshold: float = DEFAULT_THRESHOLD) -> int:
    """smallest w whose leading eigenvalues reach the threshold fraction of the total"""
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold expected to lie in (0, 1], got {threshold}")
    values = np.asarray(eigenvalues, dtype=np.float64)
    if values.ndim != 1 or values.shape[0] == 0:
        raise ShapeError("expected a non-empty list of eigenvalues")
    cumulative = np.cumsum(values)
    total = cumulative[-1]
    if not total > 0.0:
        raise DegenerateInputError("eigenvalue spectrum carries no variance")
    reached = np.nonzero(cumulative / total >= threshold)[0]
    return int(reached[0]) + 1 if reached.shape[0] else int(values.shape[0])


def _gram_eigenpairs(b: np.ndarray) -> List[EigenPair]:
    """sorted nonzero eigenpairs of b.T @ b, solved on the smaller b @ b.T"""
    pairs = sort_eigenpairs(eigen_symmetric(b @ b.T))
    cutoff = GRAM_CUTOFF * pairs[0].value
    result = []
    for pair in pairs:
        if pair.value <= cutoff:
            break
        vector = b.T @ pair.vector
        vector /= np.linalg.norm(vector)
        if vector[np.argmax(np.abs(vector))] < 0.0:
            vector = -vector
        vector.setflags(write=False)
        result.append(EigenPair(pair.value, vector))
    return result


def fit(x: MatrixLike, threshold: float = DEFAULT_THRESHOLD) -> PcaModel:
    """standardize, correlate, eigendecompose and select the retained components"""
    a, standardization = standardize(x)
    keep = ~standardization.zero_variance_mask
    if not np.any(keep):
        raise DegenerateInputError("every feature column has zero variance")
    m = a.shape[0]
    # constant columns are left out of the eigenproblem entirely
    if m < np.count_nonzero(keep):
        # the correlation matrix has rank below m, its nonzero spectrum is the gram spectrum
        centered = a[:, keep] - a[:, keep].mean(axis=0)
        b = centered / np.sqrt(np.sum(centered * centered, axis=0))
        pairs = _gram_eigenpairs(b)
        logger.debug("pca solved the %dx%d gram matrix instead of the correlation matrix", m, m)
    else:
        r = correlation(a, standardization.zero_variance_mask)
        pairs = sort_eigenpairs(eigen_symmetric(r.entries[np.ix_(keep, keep)]))
    eigenvalues = np.array([pair.value for pair in pairs])
    eigenvectors = np.zeros((standardization.n, len(pairs)))
    eigenvectors[keep, :] = np.stack([pair.vector for pair in pairs], axis=1)
    w = select_components(eigenvalues, threshold)
    logger.info(
        "pca retained %d of %d components (%d constant columns masked)",
        w,
        len(pairs),
        int(standardization.zero_variance_mask.sum())
    )
    return PcaModel(standardization, eigenvalues, eigenvectors, w, threshold)


def project(model: PcaModel, x: np.ndarray) -> np.ndarray:
    """standardize a row or matrix with the model statistics and project it onto the retained basis"""
    data = np.asarray(x, dtype=np.float64)
    if data.ndim not in (1, 2) or data.shape[-1] != model.n:
        raise ShapeError(f"input has width {data.shape[-1] if data.ndim else 0}, model expects {model.n}")
    return model.standardization.apply(data) @ model.basis()
