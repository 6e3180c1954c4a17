#!/usr/bin/python3

"""Module containing the linear soft-margin support vector machine"""
# The svm module is part of MVDR
# Copyright (C) 2026  MVDR contributors

# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, version 3.

# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.
# SPDX-License-Identifier: GPL-3.0-only

from __future__ import annotations
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, List, Mapping, NamedTuple, Optional, Sequence, Tuple
import numpy as np
from .errors import DataError, ShapeError, TrainingError


__all__ = (
    "DEFAULT_C",
    "DEFAULT_TOLERANCE",
    "DEFAULT_MAX_EPOCHS",
    "SolverSettings",
    "BinaryProblem",
    "BinarySolution",
    "SvmModel",
    "train_binary",
    "decision",
    "train_multiclass",
    "predict"
)

logger = logging.getLogger(__name__)

DEFAULT_C = 1.0

DEFAULT_TOLERANCE = 1e-4

DEFAULT_MAX_EPOCHS = 10000


class SolverSettings(NamedTuple):
    """penalty and stopping rule of the dual solver"""
    c: float = DEFAULT_C
    tolerance: float = DEFAULT_TOLERANCE
    max_epochs: int = DEFAULT_MAX_EPOCHS

    @classmethod
    def from_config(cls, config: Mapping[str, Any]) -> SolverSettings:
        """create an instance from configuration data containing c, tolerance and max_epochs"""
        c = config.get("c", DEFAULT_C)
        if isinstance(c, bool) or not isinstance(c, (int, float)) or not c > 0:
            raise ValueError("value of key 'c' expected to be a positive number")
        tolerance = config.get("tolerance", DEFAULT_TOLERANCE)
        if isinstance(tolerance, bool) or not isinstance(tolerance, (int, float)) or not tolerance > 0:
            raise ValueError("value of key 'tolerance' expected to be a positive number")
        max_epochs = config.get("max_epochs", DEFAULT_MAX_EPOCHS)
        if isinstance(max_epochs, bool) or not isinstance(max_epochs, int) or max_epochs < 1:
            raise ValueError("value of key 'max_epochs' expected to be a positive int")
        return cls(float(c), float(tolerance), max_epochs)


class BinaryProblem:
    """training vectors with labels in {+1, -1} and the soft-margin penalty"""
    __slots__ = ("rows", "labels", "c", "__weakref__")

    rows: np.ndarray

    labels: np.ndarray

    c: float

    def __init__(self, rows: np.ndarray, labels: Sequence[int], c: float = DEFAULT_C) -> None:
        rows = np.array(rows, dtype=np.float64)
        labels = np.array(labels, dtype=np.float64)
        if rows.ndim != 2 or labels.shape != (rows.shape[0],):
            raise ShapeError(f"expected an (m, d) matrix with m labels, got {rows.shape} and {labels.shape}")
        if not np.all(np.isfinite(rows)):
            raise DataError("training vectors contain non-finite features")
        if not np.all(np.abs(labels) == 1.0):
            raise ValueError("labels expected to be +1 or -1")
        if not (np.any(labels > 0) and np.any(labels < 0)):
            raise TrainingError("training needs at least one sample of each sign")
        if not c > 0:
            raise ValueError(f"penalty C expected to be positive, got {c}")
        self.rows = rows
        self.labels = labels
        self.c = float(c)


class BinarySolution(NamedTuple):
    """hyperplane (weights, bias) with the dual coefficients that produced it"""
    weights: np.ndarray
    bias: float
    alphas: np.ndarray
    epochs: int
    objectives: List[float]
    converged: bool


def _violation(alphas: np.ndarray, gradient: np.ndarray, labels: np.ndarray, c: float) -> float:
    """largest KKT violation over index pairs"""
    scores = -labels * gradient
    up = ((labels > 0) & (alphas < c)) | ((labels < 0) & (alphas > 0.0))
    low = ((labels > 0) & (alphas > 0.0)) | ((labels < 0) & (alphas < c))
    if not (np.any(up) and np.any(low)):
        return 0.0
    return float(np.max(scores[up]) - np.min(scores[low]))


def _bias(weights: np.ndarray, alphas: np.ndarray, rows: np.ndarray, labels: np.ndarray, c: float) -> float:
    margin = 1e-12 * max(1.0, c)
    outputs = rows @ weights
    free = (alphas > margin) & (alphas < c - margin)
    if np.any(free):
        return float(np.mean(labels[free] - outputs[free]))
    # no free support vector, place the hyperplane between the class extremes
    return float(-(np.min(outputs[labels > 0]) + np.max(outputs[labels < 0])) / 2.0)


def _polish(kernel: np.ndarray, labels: np.ndarray, alphas: np.ndarray, c: float) -> Optional[np.ndarray]:
    """solve the KKT equations with the current support vector roles fixed, None if no point of the box does"""
    margin = 1e-12 * max(1.0, c)
    free = (alphas > margin) & (alphas < c - margin)
    bounded = np.where(alphas >= c - margin, c, 0.0)
    while np.any(free):
        index = np.flatnonzero(free)
        k = index.shape[0]
        y = labels[index]
        # y_i (w.x_i + b) = 1 for free vectors and sum(a y) = 0
        system = np.zeros((k + 1, k + 1))
        system[:k, :k] = np.outer(y, y) * kernel[np.ix_(index, index)]
        system[:k, k] = y
        system[k, :k] = y
        rhs = np.empty(k + 1)
        rhs[:k] = 1.0 - y * (kernel[index] @ (labels * bounded))
        rhs[k] = -float(labels @ bounded)
        values = np.linalg.lstsq(system, rhs, rcond=None)[0][:k]
        if np.any(values > c):
            return None
        if np.all(values >= 0.0):
            polished = bounded.copy()
            polished[index] = values
            return polished
        free[index[np.argmin(values)]] = False      # leaves the support
    return None


def train_binary(problem: BinaryProblem, tolerance: float = DEFAULT_TOLERANCE, max_epochs: int = DEFAULT_MAX_EPOCHS) -> BinarySolution:
    """solve the soft-margin dual by coordinate descent over index pairs in cyclic order"""
    rows, labels, c = problem.rows, problem.labels, problem.c
    m = rows.shape[0]
    kernel = rows @ rows.T
    entries = kernel.tolist()
    signs = labels.tolist()
    alpha = [0.0] * m
    gradient = -np.ones(m)      # of 1/2 a'Qa - sum(a), Q_ij = y_i y_j x_i.x_j
    objectives = []
    converged = False
    epoch = 0
    while epoch < max_epochs:
        if _violation(np.array(alpha), gradient, labels, c) <= tolerance:
            converged = True
            break
        epoch += 1
        for i in range(m):
            yi = signs[i]
            row_i = entries[i]
            for j in range(i + 1, m):
                yj = signs[j]
                a_i = alpha[i]
                a_j = alpha[j]
                # move along a_i += y_i d, a_j -= y_j d which keeps sum(a y) fixed
                if yi > 0:
                    low, high = -a_i, c - a_i
                else:
                    low, high = a_i - c, a_i
                if yj > 0:
                    low, high = max(low, a_j - c), min(high, a_j)
                else:
                    low, high = max(low, -a_j), min(high, c - a_j)
                if low >= high:
                    continue
                slope = yi * gradient.item(i) - yj * gradient.item(j)
                curvature = row_i[i] + entries[j][j] - 2.0 * row_i[j]
                if curvature > 1e-12:
                    step = min(max(-slope / curvature, low), high)
                elif slope < 0.0:
                    step = high
                elif slope > 0.0:
                    step = low
                else:
                    continue
                if step == 0.0:
                    continue
                alpha[i] = min(max(a_i + yi * step, 0.0), c)
                alpha[j] = min(max(a_j - yj * step, 0.0), c)
                gradient += step * labels * (kernel[i] - kernel[j])     # kernel is symmetric
        alphas = np.array(alpha)
        objectives.append(float(np.sum(alphas) - 0.5 * alphas @ (gradient + 1.0)))
    alphas = np.array(alpha)
    if not converged:
        converged = _violation(alphas, gradient, labels, c) <= tolerance
    if converged:
        polished = _polish(kernel, labels, alphas, c)
        if polished is not None:
            polished_gradient = labels * (kernel @ (labels * polished)) - 1.0
            if _violation(polished, polished_gradient, labels, c) <= _violation(alphas, gradient, labels, c):
                alphas, gradient = polished, polished_gradient
    else:
        logger.warning(
            "dual coordinate descent stopped after %d epochs with violation %.3e",
            epoch,
            _violation(alphas, gradient, labels, c)
        )
    weights = rows.T @ (alphas * labels)
    bias = _bias(weights, alphas, rows, labels, c)
    return BinarySolution(weights, bias, alphas, epoch, objectives, converged)


def decision(weights: np.ndarray, bias: float, x: np.ndarray) -> float:
    """signed hyperplane value w.x + b"""
    weights = np.asarray(weights, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if weights.shape != x.shape:
        raise ShapeError(f"input has width {x.shape[-1] if x.ndim else 0}, hyperplane expects {weights.shape[0]}")
    return float(weights @ x + bias)


class SvmModel:
    """one-vs-rest hyperplanes, one per class"""
    __slots__ = ("classes", "weights", "biases", "c", "__weakref__")

    classes: Tuple[str, ...]

    weights: np.ndarray

    biases: np.ndarray

    c: float

    def __init__(self, classes: Sequence[str], weights: np.ndarray, biases: np.ndarray, c: float) -> None:
        weights = np.array(weights, dtype=np.float64)
        biases = np.array(biases, dtype=np.float64)
        if weights.ndim != 2 or weights.shape[0] != len(classes) or biases.shape != (len(classes),):
            raise ShapeError(
                f"expected {len(classes)} weight vectors and biases, got shapes {weights.shape} and {biases.shape}"
            )
        weights.setflags(write=False)
        biases.setflags(write=False)
        self.classes = tuple(classes)
        self.weights = weights
        self.biases = biases
        self.c = float(c)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, SvmModel):
            return self.classes == other.classes \
                and np.array_equal(self.weights, other.weights) \
                and np.array_equal(self.biases, other.biases) \
                and self.c == other.c
        return NotImplemented

    @property
    def width(self) -> int:
        return int(self.weights.shape[1])

    def decisions(self, x: np.ndarray) -> np.ndarray:
        """decision values of every class for a row (or every row of a matrix)"""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim not in (1, 2) or x.shape[-1] != self.width:
            raise ShapeError(f"input has width {x.shape[-1] if x.ndim else 0}, model expects {self.width}")
        return x @ self.weights.T + self.biases


def train_multiclass(x: np.ndarray, labels: Sequence[int], classes: Sequence[str], settings: SolverSettings = SolverSettings(), threads: Optional[int] = None) -> SvmModel:
    """train one binary machine per class against all others"""
    x = np.asarray(x, dtype=np.float64)
    labels = np.asarray(labels)
    if len(classes) < 2:
        raise TrainingError("training needs at least two classes")
    for index, name in enumerate(classes):
        if not np.any(labels == index):
            raise TrainingError(f"class '{name}' has no training samples")

    def train(index: int) -> BinarySolution:
        problem = BinaryProblem(x, np.where(labels == index, 1, -1), settings.c)
        solution = train_binary(problem, settings.tolerance, settings.max_epochs)
        logger.info("class '%s' trained in %d epochs", classes[index], solution.epochs)
        return solution

    if threads == 1:
        solutions = [train(index) for index in range(len(classes))]
    else:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            solutions = list(executor.map(train, range(len(classes))))
    return SvmModel(
        classes,
        np.stack([solution.weights for solution in solutions]),
        np.array([solution.bias for solution in solutions]),
        settings.c
    )


def predict(model: SvmModel, x: np.ndarray) -> int:
    """class index with the largest decision value, ties go to the lowest index"""
    return int(np.argmax(model.decisions(x)))
