#!/usr/bin/python3

"""Module generating a labeled RGB-D dataset whose classes differ only in their depth maps"""
# The synthetic module is part of MVDR
# Copyright (C) 2026  MVDR contributors

# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, version 3.

# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.
# SPDX-License-Identifier: GPL-3.0-only

from __future__ import annotations
import os
import os.path
import logging
from typing import Callable, Dict, NamedTuple
import numpy as np
from PIL import Image
from .imageio.datasets import DEPTH_SUFFIX, MANIFEST_NAME


__all__ = (
    "PATTERNS",
    "TEXTURES",
    "Roots",
    "depth_pattern",
    "texture_pool",
    "generate"
)

logger = logging.getLogger(__name__)

# number of RGB textures shared by every class
TEXTURES = 6

RGB_NOISE = 0.05

DEPTH_NOISE = 0.01


def _horizontal(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return x


def _vertical(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return y


def _radial(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.exp(-((x - 0.5) ** 2 + (y - 0.5) ** 2) / 0.08)


# class name -> depth shape on the unit square
PATTERNS: Dict[str, Callable[[np.ndarray, np.ndarray], np.ndarray]] = {
    "horizontal": _horizontal,
    "vertical": _vertical,
    "radial": _radial
}


class Roots(NamedTuple):
    """paths of the generated datasets"""
    train: str
    test: str


def _grid(size: int) -> np.ndarray:
    return (np.arange(size) + 0.5) / size


def depth_pattern(name: str, size: int, generator: np.random.Generator) -> np.ndarray:
    """depth map of a class with random amplitude, offset and noise"""
    x, y = np.meshgrid(_grid(size), _grid(size))
    amplitude = generator.uniform(0.7, 1.0)
    offset = generator.uniform(0.0, 0.05)
    noise = generator.normal(0.0, DEPTH_NOISE, size=(size, size))
    return np.clip(offset + amplitude * PATTERNS[name](x, y) + noise, 0.0, 1.0)


def texture_pool(size: int, generator: np.random.Generator, count: int = TEXTURES) -> np.ndarray:
    """(count, size, size, 3) striped color textures"""
    x, y = np.meshgrid(_grid(size), _grid(size))
    textures = np.empty((count, size, size, 3))
    for index in range(count):
        base = generator.uniform(0.2, 0.8, size=3)
        frequency = generator.uniform(1.0, 4.0, size=(3, 2))
        phase = generator.uniform(0.0, 2.0 * np.pi, size=3)
        for channel in range(3):
            stripes = np.sin(2.0 * np.pi * (frequency[channel, 0] * x + frequency[channel, 1] * y) + phase[channel])
            textures[index, :, :, channel] = base[channel] + 0.2 * stripes
    return np.clip(textures, 0.0, 1.0)


def _save(values: np.ndarray, path: str) -> None:
    """write intensities as 8 bit PNG, RGB for (h, w, 3) and L for (h, w) arrays"""
    Image.fromarray(np.round(values * 255.0).astype(np.uint8)).save(path, format="PNG")


def _write_split(root: str, count: int, size: int, textures: np.ndarray, generator: np.random.Generator) -> None:
    os.makedirs(root, exist_ok=True)
    with open(os.path.join(root, MANIFEST_NAME), "w") as fd:
        fd.write("".join(f"{name}\n" for name in PATTERNS))
    for name in PATTERNS:
        directory = os.path.join(root, name)
        os.makedirs(directory, exist_ok=True)
        for index in range(count):
            texture = textures[generator.integers(textures.shape[0])]
            rgb = np.clip(texture + generator.normal(0.0, RGB_NOISE, size=texture.shape), 0.0, 1.0)
            depth = depth_pattern(name, size, generator)
            _save(rgb, os.path.join(directory, f"{index:03d}.png"))
            _save(depth, os.path.join(directory, f"{index:03d}{DEPTH_SUFFIX}"))


def generate(root: str, seed: int = 0, train: int = 60, test: int = 40, size: int = 32) -> Roots:
    """write train/ and test/ datasets below root, fully determined by seed"""
    if train < 1 or test < 1:
        raise ValueError("every class needs at least one training and one test image")
    if size < 1:
        raise ValueError(f"image size expected to be positive, got {size}")
    generator = np.random.default_rng(seed)
    textures = texture_pool(size, generator)
    roots = Roots(os.path.join(root, "train"), os.path.join(root, "test"))
    _write_split(roots.train, train, size, textures, generator)
    _write_split(roots.test, test, size, textures, generator)
    logger.info("generated %d training and %d test images per class in '%s'", train, test, root)
    return roots
