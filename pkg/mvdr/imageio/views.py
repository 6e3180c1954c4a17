#!/usr/bin/python3

"""Module containing resizing and the decomposition of images into views"""
# The imageio.views module is part of MVDR
# Copyright (C) 2026  MVDR contributors

# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, version 3.

# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.
# SPDX-License-Identifier: GPL-3.0-only

from typing import Optional, Tuple
import numpy as np
from . import ImagePlane, RGBImage, ViewSet
from ..errors import ShapeError


__all__ = (
    "LUMA_WEIGHTS",
    "luminance",
    "resize_bilinear",
    "resize_image",
    "split_views",
    "prepare_views"
)

# ITU-R BT.601
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def luminance(r: np.ndarray, g: np.ndarray, b: np.ndarray) -> np.ndarray:
    """weighted sum of the color channels"""
    return LUMA_WEIGHTS[0] * r + LUMA_WEIGHTS[1] * g + LUMA_WEIGHTS[2] * b


def _sample_positions(size_in: int, size_out: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """source indices and weights for one axis with pixel centers at (i + 0.5) / n"""
    positions = (np.arange(size_out, dtype=np.float64) + 0.5) * (size_in / size_out) - 0.5
    positions = np.clip(positions, 0.0, size_in - 1)
    lower = np.floor(positions).astype(np.intp)
    upper = np.minimum(lower + 1, size_in - 1)
    return lower, upper, positions - lower


def resize_bilinear(plane: ImagePlane, width: int, height: int) -> ImagePlane:
    """resize a plane to (width, height) by bilinear interpolation"""
    if width < 1 or height < 1:
        raise ValueError(f"target size expected to be at least 1x1, got {width}x{height}")
    if plane.shape == (width, height):
        return plane
    x0, x1, fx = _sample_positions(plane.width, width)
    y0, y1, fy = _sample_positions(plane.height, height)
    data = plane.data
    top = data[y0][:, x0] * (1.0 - fx) + data[y0][:, x1] * fx
    bottom = data[y1][:, x0] * (1.0 - fx) + data[y1][:, x1] * fx
    result = top * (1.0 - fy)[:, np.newaxis] + bottom * fy[:, np.newaxis]
    return ImagePlane(np.clip(result, 0.0, 1.0))


def resize_image(image: RGBImage, width: int, height: int) -> RGBImage:
    """resize every channel of an image"""
    if (image.width, image.height) == (width, height):
        return image
    channels = [resize_bilinear(image.channel(index), width, height).data for index in range(3)]
    pixels = np.stack(channels, axis=2)
    pixels.setflags(write=False)
    return RGBImage(width, height, pixels)


def split_views(image: RGBImage, depth: Optional[ImagePlane] = None) -> ViewSet:
    """separate an image into its R, G, B and grayscale views, passing depth through"""
    if depth is not None and depth.shape != (image.width, image.height):
        raise ShapeError(
            f"depth plane has size {depth.shape}, expected {(image.width, image.height)} to match the image"
        )
    r, g, b = (image.pixels[:, :, index] for index in range(3))
    return ViewSet(
        ImagePlane(r),
        ImagePlane(g),
        ImagePlane(b),
        ImagePlane(np.clip(luminance(r, g, b), 0.0, 1.0)),
        depth
    )


def prepare_views(image: RGBImage, depth: Optional[ImagePlane], width: int, height: int) -> ViewSet:
    """resize an image and its depth plane to the working resolution and split it into views"""
    # depth arrives either at the raw image size or already at the working size
    if depth is not None and depth.shape != (width, height):
        if depth.shape != (image.width, image.height):
            raise ShapeError(
                f"depth plane has size {depth.shape}, expected {(image.width, image.height)} or {(width, height)}"
            )
        depth = resize_bilinear(depth, width, height)
    return split_views(resize_image(image, width, height), depth)
