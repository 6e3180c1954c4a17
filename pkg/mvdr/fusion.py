#!/usr/bin/python3

"""Module containing the splicing of per-view features into the data matrix"""
# The fusion module is part of MVDR
# Copyright (C) 2026  MVDR contributors

# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, version 3.

# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.
# SPDX-License-Identifier: GPL-3.0-only

from __future__ import annotations
import csv
from typing import NamedTuple, Optional, Sequence, TextIO, Tuple
import numpy as np
from .convnet import FeatureVector
from .errors import FusionError, ShapeError
from .imageio import VIEW_NAMES


__all__ = (
    "Layout",
    "SplicedRow",
    "FeatureMatrix",
    "order_views",
    "splice",
    "assemble",
    "write_csv"
)

Layout = Tuple[Tuple[str, int], ...]


class SplicedRow(NamedTuple):
    """concatenated features of one sample"""
    values: np.ndarray
    label: int
    layout: Layout


class FeatureMatrix:
    """row-per-sample data matrix X with labels and the view segments of its columns"""
    __slots__ = ("data", "labels", "view_layout", "__weakref__")

    data: np.ndarray

    labels: np.ndarray

    view_layout: Layout

    def __init__(self, data: np.ndarray, labels: Sequence[int], view_layout: Layout) -> None:
        data = np.array(data, dtype=np.float64)
        labels = np.array(labels, dtype=np.int64)
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise ShapeError(f"data matrix expected to be at least 1x1, got shape {data.shape}")
        if labels.shape != (data.shape[0],):
            raise ShapeError(f"expected {data.shape[0]} labels, got {labels.shape[0]}")
        if sum(length for _, length in view_layout) != data.shape[1]:
            raise ShapeError("view layout does not cover the columns of the data matrix")
        data.setflags(write=False)
        labels.setflags(write=False)
        self.data = data
        self.labels = labels
        self.view_layout = tuple(view_layout)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, FeatureMatrix):
            return np.array_equal(self.data, other.data) \
                and np.array_equal(self.labels, other.labels) \
                and self.view_layout == other.view_layout
        return NotImplemented

    @property
    def rows(self) -> int:
        return int(self.data.shape[0])

    @property
    def cols(self) -> int:
        return int(self.data.shape[1])

    def row(self, index: int) -> SplicedRow:
        """read back a row with its label"""
        return SplicedRow(self.data[index], int(self.labels[index]), self.view_layout)

    def segment(self, index: int, view: str) -> np.ndarray:
        """slice the features of one view out of a row"""
        start = 0
        for name, length in self.view_layout:
            if name == view:
                return self.data[index, start:start + length]
            start += length
        raise KeyError(f"view '{view}' is not part of the layout")


def order_views(views: Sequence[str]) -> Tuple[str, ...]:
    """validate view names and bring them into splicing order"""
    unknown = [view for view in views if view not in VIEW_NAMES]
    if unknown:
        raise ValueError(f"unknown views: {', '.join(unknown)}")
    ordered = tuple(view for view in VIEW_NAMES if view in views)
    if not ordered:
        raise ValueError("at least one view has to be enabled")
    return ordered


def splice(vectors: Sequence[FeatureVector], label: int, views: Optional[Sequence[str]] = None, source: str = "<sample>") -> SplicedRow:
    """concatenate per-view feature vectors in the configured view order"""
    by_view = {vector.view: vector for vector in vectors}
    if views is None:
        views = [vector.view for vector in vectors]
    for view in views:
        if view not in by_view:
            raise FusionError(f"sample '{source}' lacks the configured view '{view}'", source, view)
    extra = [vector.view for vector in vectors if vector.view not in views]
    if extra:
        raise FusionError(f"sample '{source}' has views outside the layout: {', '.join(extra)}", source, extra[0])
    layout = tuple((view, by_view[view].length) for view in views)
    values = np.concatenate([by_view[view].values for view in views])
    return SplicedRow(values, label, layout)


def assemble(rows: Sequence[SplicedRow]) -> FeatureMatrix:
    """stack spliced rows into a feature matrix, preserving their order"""
    if len(rows) == 0:
        raise ShapeError("at least one row is needed to build a feature matrix")
    layout = rows[0].layout
    for index, row in enumerate(rows):
        if row.layout != layout or row.values.shape != rows[0].values.shape:
            raise ShapeError(
                f"row {index} has {row.values.shape[0]} features in layout {row.layout}, "
                f"expected {rows[0].values.shape[0]} in layout {layout}"
            )
    return FeatureMatrix(
        np.stack([row.values for row in rows]),
        [row.label for row in rows],
        layout
    )


def write_csv(matrix: FeatureMatrix, file: TextIO) -> None:
    """dump the matrix as CSV with header label,f0,f1,..."""
    writer = csv.writer(file, lineterminator="\n")
    writer.writerow(["label"] + [f"f{index}" for index in range(matrix.cols)])
    for label, values in zip(matrix.labels, matrix.data):
        writer.writerow([int(label)] + [repr(float(value)) for value in values])
