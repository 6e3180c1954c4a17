#!/usr/bin/python3

"""Module containing the forward-only convolutional feature extractor"""
# The convnet module is part of MVDR
# Copyright (C) 2026  MVDR contributors

# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, version 3.

# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.
# SPDX-License-Identifier: GPL-3.0-only

from __future__ import annotations
import math
from typing import Any, List, Mapping, NamedTuple, Sequence, Tuple, Union, overload
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from .imageio import ImagePlane, as_array
from .errors import NetworkConfigError, ShapeError


__all__ = (
    "KERNEL_SIZE",
    "WEIGHT_BOUND",
    "DEFAULT_STAGES",
    "ConvLayerParams",
    "Stage",
    "NetworkConfig",
    "FeatureVector",
    "conv2d_valid",
    "sigmoid",
    "pool_mean",
    "init_weights",
    "output_shape",
    "extract_features"
)

KERNEL_SIZE = 3

# fan-based bound for 3x3 kernels
WEIGHT_BOUND = math.sqrt(6.0 / 18.0)

# (feature maps, pooling window) per C/S stage
DEFAULT_STAGES = ((8, 2), (8, 2))

# sigmoid outputs stay within these, inside the open interval (0, 1)
_SIGMOID_FLOOR = float(np.finfo(np.float64).tiny)
_SIGMOID_CEILING = float(np.nextafter(1.0, 0.0))

PlaneLike = Union[ImagePlane, np.ndarray]


class ConvLayerParams:
    """kernels W and biases b of one convolution layer"""
    __slots__ = ("kernels", "biases", "__weakref__")

    kernels: np.ndarray

    biases: np.ndarray

    def __init__(self, kernels: np.ndarray, biases: np.ndarray) -> None:
        kernels = np.array(kernels, dtype=np.float64)
        biases = np.array(biases, dtype=np.float64)
        if kernels.ndim != 3 or kernels.shape[1:] != (KERNEL_SIZE, KERNEL_SIZE) or kernels.shape[0] == 0:
            raise ShapeError(f"kernels expected to have shape (N, 3, 3), got {kernels.shape}")
        if biases.shape != (kernels.shape[0],):
            raise ShapeError(f"expected {kernels.shape[0]} biases, got shape {biases.shape}")
        kernels.setflags(write=False)
        biases.setflags(write=False)
        self.kernels = kernels
        self.biases = biases

    def __eq__(self, other: object) -> bool:
        if isinstance(other, ConvLayerParams):
            return np.array_equal(self.kernels, other.kernels) \
                and np.array_equal(self.biases, other.biases)
        return NotImplemented

    @property
    def maps(self) -> int:
        """number of feature maps N"""
        return int(self.kernels.shape[0])


class Stage(NamedTuple):
    """one C layer followed by one S layer"""
    params: ConvLayerParams
    pool: int


class NetworkConfig:
    """ordered C/S stages and the seed their weights were drawn with"""
    __slots__ = ("stages", "seed", "__weakref__")

    stages: Tuple[Stage, ...]

    seed: int

    def __init__(self, stages: Sequence[Stage], seed: int) -> None:
        if len(stages) == 0:
            raise ValueError("network expected to have at least one stage")
        for index, stage in enumerate(stages):
            if stage.pool < 1:
                raise ValueError(f"pooling window of stage {index + 1} expected to be at least 1")
        self.stages = tuple(stages)
        self.seed = seed

    def __eq__(self, other: object) -> bool:
        if isinstance(other, NetworkConfig):
            return self.stages == other.stages and self.seed == other.seed
        return NotImplemented

    @classmethod
    def from_config(cls, config: Mapping[str, Any]) -> NetworkConfig:
        """create an instance from configuration data containing seed and stages"""
        seed = config.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ValueError("value of key 'seed' expected to be an int")
        try:
            stages = config["stages"]
        except KeyError:
            shape = DEFAULT_STAGES  # type: Sequence[Tuple[int, int]]
        else:
            if not isinstance(stages, Sequence) or isinstance(stages, str):
                raise ValueError("value of key 'stages' expected to be an array of tables")
            shape = []
            for stage in stages:
                if not isinstance(stage, Mapping):
                    raise ValueError("value of key 'stages' expected to be an array of tables")
                maps = stage.get("maps", 8)
                pool = stage.get("pool", 2)
                if not isinstance(maps, int) or maps < 1:
                    raise ValueError("value of key 'maps' expected to be a positive int")
                if not isinstance(pool, int) or pool < 1:
                    raise ValueError("value of key 'pool' expected to be a positive int")
                shape.append((maps, pool))
        return init_weights(seed, shape)

    def shape(self) -> Tuple[Tuple[int, int], ...]:
        """(feature maps, pooling window) per stage"""
        return tuple((stage.params.maps, stage.pool) for stage in self.stages)


class FeatureVector(NamedTuple):
    """flattened network output for one view"""
    view: str
    values: np.ndarray

    @property
    def length(self) -> int:
        return int(self.values.shape[0])


def conv2d_valid(plane: PlaneLike, kernel: np.ndarray, bias: float) -> np.ndarray:
    """valid cross-correlation of a plane with a 3x3 kernel plus bias (the pre-activation)"""
    data = as_array(plane)
    kernel = np.asarray(kernel, dtype=np.float64)
    if kernel.shape != (KERNEL_SIZE, KERNEL_SIZE):
        raise ShapeError(f"kernel expected to be 3x3, got shape {kernel.shape}")
    if data.shape[0] < KERNEL_SIZE or data.shape[1] < KERNEL_SIZE:
        raise ShapeError(f"plane of size {data.shape[1]}x{data.shape[0]} is smaller than the 3x3 kernel")
    windows = sliding_window_view(data, (KERNEL_SIZE, KERNEL_SIZE))
    return np.einsum("ijuv,uv->ij", windows, kernel) + bias


@overload
def sigmoid(x: float) -> float: ...
@overload
def sigmoid(x: np.ndarray) -> np.ndarray: ...


def sigmoid(x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """logistic function 1 / (1 + e^-x), evaluated without overflow and never reaching 0 or 1"""
    values = np.asarray(x, dtype=np.float64)
    exp = np.exp(-np.abs(values))
    result = np.where(values >= 0.0, 1.0 / (1.0 + exp), exp / (1.0 + exp))
    result = np.clip(result, _SIGMOID_FLOOR, _SIGMOID_CEILING)
    if np.ndim(x) == 0:
        return float(result)
    return result


@overload
def pool_mean(plane: ImagePlane, window: int) -> ImagePlane: ...
@overload
def pool_mean(plane: np.ndarray, window: int) -> np.ndarray: ...


def pool_mean(plane: PlaneLike, window: int) -> PlaneLike:
    """non-overlapping mean pooling, dropping rows and columns which do not fill a window"""
    if window < 1:
        raise ValueError(f"pooling window expected to be at least 1, got {window}")
    data = as_array(plane)
    height, width = data.shape[0] // window, data.shape[1] // window
    if height == 0 or width == 0:
        raise ShapeError(f"plane of size {data.shape[1]}x{data.shape[0]} is smaller than the pooling window {window}")
    if window == 1:
        pooled = data
    else:
        pooled = data[:height * window, :width * window] \
            .reshape(height, window, width, window) \
            .mean(axis=(1, 3))
    if isinstance(plane, ImagePlane):
        return plane if window == 1 else ImagePlane(pooled)
    return pooled


def init_weights(seed: int, shape: Sequence[Tuple[int, int]] = DEFAULT_STAGES) -> NetworkConfig:
    """draw every kernel weight and bias uniformly from [-sqrt(6/18), sqrt(6/18)]"""
    generator = np.random.default_rng(seed)
    stages = []
    for maps, pool in shape:
        kernels = generator.uniform(-WEIGHT_BOUND, WEIGHT_BOUND, size=(maps, KERNEL_SIZE, KERNEL_SIZE))
        biases = generator.uniform(-WEIGHT_BOUND, WEIGHT_BOUND, size=maps)
        stages.append(Stage(ConvLayerParams(kernels, biases), pool))
    return NetworkConfig(stages, seed)


def output_shape(net: NetworkConfig, width: int, height: int) -> Tuple[List[Tuple[int, int, int]], int]:
    """trace (maps, width, height) after every stage and the final feature length"""
    trace = []
    maps = 1
    for index, stage in enumerate(net.stages):
        if width < KERNEL_SIZE or height < KERNEL_SIZE:
            raise NetworkConfigError(
                f"stage {index + 1}: plane of size {width}x{height} is smaller than the 3x3 kernel",
                index + 1
            )
        width, height = width - (KERNEL_SIZE - 1), height - (KERNEL_SIZE - 1)
        width, height = width // stage.pool, height // stage.pool
        if width == 0 or height == 0:
            raise NetworkConfigError(
                f"stage {index + 1}: pooling window {stage.pool} exhausts the plane",
                index + 1
            )
        maps = stage.params.maps
        trace.append((maps, width, height))
    return trace, maps * width * height


def extract_features(view: PlaneLike, net: NetworkConfig, name: str = "view") -> FeatureVector:
    """run a plane through every C/S stage and flatten the surviving maps"""
    data = as_array(view)
    _, length = output_shape(net, data.shape[1], data.shape[0])
    maps = data[np.newaxis]     # (input maps, height, width)
    for stage in net.stages:
        windows = sliding_window_view(maps, (KERNEL_SIZE, KERNEL_SIZE), axis=(1, 2))
        # full connection table: every input map feeds every kernel
        responses = np.einsum("cijuv,nuv->nij", windows, stage.params.kernels) \
            + stage.params.biases[:, np.newaxis, np.newaxis]
        activations = sigmoid(responses)
        maps = np.stack([pool_mean(activation, stage.pool) for activation in activations])
    values = maps.ravel()
    if values.shape[0] != length:
        raise ShapeError(f"feature length {values.shape[0]} differs from the traced length {length}")
    values.setflags(write=False)
    return FeatureVector(name, values)
