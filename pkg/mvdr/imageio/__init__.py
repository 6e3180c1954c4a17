#!/usr/bin/python3

"""Package containing image decoding, view decomposition and dataset loading"""
# The imageio package is part of MVDR
# Copyright (C) 2026  MVDR contributors

# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, version 3.

# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.
# SPDX-License-Identifier: GPL-3.0-only

from __future__ import annotations
from typing import Iterator, NamedTuple, Optional, Sequence, Tuple, Union
import numpy as np
from ..errors import ShapeError


__all__ = (
    "VIEW_NAMES",
    "ImagePlane",
    "RGBImage",
    "ViewSet",
    "LabeledSample",
    "as_array",
    "decoding",     # pylint: disable=E0603
    "views",        # pylint: disable=E0603
    "datasets"      # pylint: disable=E0603
)

# fixed splicing order of the views
VIEW_NAMES = ("r", "g", "b", "gray", "depth")


def as_array(plane: Union[ImagePlane, np.ndarray]) -> np.ndarray:
    """retrieve the 2-D float array behind a plane or array"""
    if isinstance(plane, ImagePlane):
        return plane.data
    array = np.asarray(plane, dtype=np.float64)
    if array.ndim != 2:
        raise ShapeError(f"expected a 2-D array, got {array.ndim} dimensions")
    return array


class ImagePlane:
    """single-channel raster of intensities in [0, 1], stored as a read-only (height, width) array"""
    __slots__ = ("data", "__weakref__")

    data: np.ndarray

    def __init__(self, data: np.ndarray) -> None:
        array = np.array(data, dtype=np.float64)    # private copy
        if array.ndim != 2 or array.size == 0:
            raise ShapeError(f"plane data expected to be a non-empty 2-D array, got shape {array.shape}")
        if not np.all(np.isfinite(array)) or array.min() < 0.0 or array.max() > 1.0:
            raise ValueError("plane intensities expected to lie in [0, 1]")
        array.setflags(write=False)
        self.data = array

    def __eq__(self, other: object) -> bool:
        if isinstance(other, ImagePlane):
            return np.array_equal(self.data, other.data)
        return NotImplemented

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(width={self.width}, height={self.height})"

    @classmethod
    def from_values(cls, width: int, height: int, values: Sequence[float]) -> ImagePlane:
        """create an instance from row-major values"""
        if len(values) != width * height:
            raise ShapeError(f"expected {width * height} values, got {len(values)}")
        return cls(np.reshape(np.asarray(values, dtype=np.float64), (height, width)))

    @classmethod
    def constant(cls, width: int, height: int, value: float) -> ImagePlane:
        """create a plane with every pixel set to value"""
        return cls(np.full((height, width), value, dtype=np.float64))

    @property
    def width(self) -> int:
        return int(self.data.shape[1])

    @property
    def height(self) -> int:
        return int(self.data.shape[0])

    @property
    def shape(self) -> Tuple[int, int]:
        """(width, height) of the plane"""
        return self.width, self.height

    def values(self) -> np.ndarray:
        """retrieve the row-major intensities"""
        return self.data.ravel()


class RGBImage(NamedTuple):
    """decoded image as a (height, width, 3) array of intensities in [0, 1]"""
    width: int
    height: int
    pixels: np.ndarray

    def channel(self, index: int) -> ImagePlane:
        """extract one channel as a plane"""
        return ImagePlane(self.pixels[:, :, index])


class ViewSet:
    """per-image bundle of view planes sharing one size"""
    __slots__ = ("r", "g", "b", "gray", "depth", "__weakref__")

    r: ImagePlane

    g: ImagePlane

    b: ImagePlane

    gray: ImagePlane

    depth: Optional[ImagePlane]

    def __init__(self, r: ImagePlane, g: ImagePlane, b: ImagePlane, gray: ImagePlane, depth: Optional[ImagePlane] = None) -> None:
        shape = r.shape
        for name, plane in (("g", g), ("b", b), ("gray", gray), ("depth", depth)):
            if plane is not None and plane.shape != shape:
                raise ShapeError(f"view '{name}' has size {plane.shape}, expected {shape}")
        self.r = r
        self.g = g
        self.b = b
        self.gray = gray
        self.depth = depth

    def __eq__(self, other: object) -> bool:
        if isinstance(other, ViewSet):
            return self.r == other.r \
                and self.g == other.g \
                and self.b == other.b \
                and self.gray == other.gray \
                and self.depth == other.depth
        return NotImplemented

    def __iter__(self) -> Iterator[Tuple[str, ImagePlane]]:
        """iterate over the present views in splicing order"""
        for name in VIEW_NAMES:
            plane = getattr(self, name)
            if plane is not None:
                yield name, plane

    @property
    def shape(self) -> Tuple[int, int]:
        """(width, height) shared by all planes"""
        return self.r.shape

    def get(self, name: str) -> Optional[ImagePlane]:
        """retrieve a view by name, None if it is absent"""
        if name not in VIEW_NAMES:
            raise KeyError(f"unknown view '{name}'")
        return getattr(self, name)


class LabeledSample(NamedTuple):
    """views of one image together with its class index and origin"""
    views: ViewSet
    label: int
    source: str
