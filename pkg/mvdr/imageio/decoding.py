#!/usr/bin/python3

"""Module containing PNG and JPEG decoding"""
# The imageio.decoding module is part of MVDR
# Copyright (C) 2026  MVDR contributors

# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, version 3.

# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.
# SPDX-License-Identifier: GPL-3.0-only

import io
import numpy as np
from PIL import Image, UnidentifiedImageError
from . import RGBImage, ImagePlane
from ..errors import DecodeError, UnsupportedFormatError


__all__ = (
    "SUPPORTED_FORMATS",
    "decode_image",
    "decode_depth",
    "decode_file",
    "decode_depth_file"
)

SUPPORTED_FORMATS = frozenset(("PNG", "JPEG"))

# modes Pillow uses for 16 bit single-channel sources
WIDE_MODES = frozenset(("I;16", "I;16B", "I;16L", "I;16N", "I"))


def _open(data: bytes, path: str) -> Image.Image:
    try:
        image = Image.open(io.BytesIO(data))
    except UnidentifiedImageError as e:
        raise UnsupportedFormatError("not a PNG or JPEG file", path) from e
    if image.format not in SUPPORTED_FORMATS:
        raise UnsupportedFormatError(f"unsupported image format '{image.format}'", path)
    try:
        image.load()
    except (OSError, SyntaxError, ValueError) as e:     # truncated or corrupted payload
        raise DecodeError(f"failed to decode image: {e}", path) from e
    return image


def _wide_plane(image: Image.Image) -> np.ndarray:
    """rescale a 16 bit single-channel image to [0, 1]"""
    return np.clip(np.asarray(image, dtype=np.float64) / 65535.0, 0.0, 1.0)


def decode_image(data: bytes, path: str = "<bytes>") -> RGBImage:
    """decode a PNG or JPEG payload into RGB intensities in [0, 1]"""
    with _open(data, path) as image:
        if image.mode in WIDE_MODES:
            plane = _wide_plane(image)
            pixels = np.repeat(plane[:, :, np.newaxis], 3, axis=2)
        else:
            pixels = np.asarray(image.convert("RGB"), dtype=np.float64) / 255.0
        width, height = image.size
    pixels.setflags(write=False)
    return RGBImage(width, height, pixels)


def decode_depth(data: bytes, path: str = "<bytes>") -> ImagePlane:
    """decode an 8 or 16 bit grayscale depth map"""
    with _open(data, path) as image:
        if image.mode in WIDE_MODES:
            return ImagePlane(_wide_plane(image))
        return ImagePlane(np.asarray(image.convert("L"), dtype=np.float64) / 255.0)


def _read(path: str) -> bytes:
    try:
        with open(path, "rb") as fd:
            return fd.read()
    except OSError as e:
        raise DecodeError(f"failed to read file: {e.strerror}", path) from e


def decode_file(path: str) -> RGBImage:
    """decode the image file at path"""
    return decode_image(_read(path), path)


def decode_depth_file(path: str) -> ImagePlane:
    """decode the depth file at path"""
    return decode_depth(_read(path), path)
