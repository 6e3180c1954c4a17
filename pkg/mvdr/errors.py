#!/usr/bin/python3

"""Module containing the exceptions raised by MVDR"""
# The errors module is part of MVDR
# Copyright (C) 2026  MVDR contributors

# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, version 3.

# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.
# SPDX-License-Identifier: GPL-3.0-only

from typing import Optional

__all__ = (
    "DataError",
    "NumericalError",
    "ShapeError",
    "DecodeError",
    "UnsupportedFormatError",
    "DatasetError",
    "FusionError",
    "NetworkConfigError",
    "TrainingError",
    "ConfigMismatchError",
    "ModelFormatError",
    "ModelVersionError",
    "ModelIntegrityError",
    "ConvergenceError",
    "DegenerateInputError"
)


class DataError(Exception):
    """Exception raised when input data violates a contract (cli exit code 2)"""


class NumericalError(ArithmeticError):
    """Exception raised when a numerical procedure fails (cli exit code 3)"""


class ShapeError(DataError, ValueError):
    """Exception raised when array dimensions do not fit together"""


class DecodeError(DataError):
    """Exception raised when an image file can not be decoded"""

    path: str

    def __init__(self, message: str, path: str = "<bytes>") -> None:
        super().__init__(f"{path}: {message}")
        self.path = path


class UnsupportedFormatError(DecodeError):
    """Exception raised when an image file is neither PNG nor JPEG"""


class DatasetError(DataError):
    """Exception raised when a dataset does not follow the expected layout"""


class FusionError(DataError):
    """Exception raised when a sample misses a configured view"""

    source: str

    view: str

    def __init__(self, message: str, source: str, view: str) -> None:
        super().__init__(message)
        self.source = source
        self.view = view


class NetworkConfigError(DataError):
    """Exception raised when a plane does not survive every network stage"""

    stage: Optional[int]

    def __init__(self, message: str, stage: Optional[int] = None) -> None:
        super().__init__(message)
        self.stage = stage


class TrainingError(DataError):
    """Exception raised when training data can not produce a classifier"""


class ConfigMismatchError(ShapeError):
    """Exception raised when inputs do not match the configuration of a trained model"""


class ModelFormatError(DataError):
    """Exception raised when a model file can not be read"""


class ModelVersionError(ModelFormatError):
    """Exception raised when a model file has an unknown format version"""


class ModelIntegrityError(ModelFormatError):
    """Exception raised when a model file is truncated or corrupted"""


class ConvergenceError(NumericalError):
    """Exception raised when an iterative solver fails to converge"""

    residual: float

    def __init__(self, message: str, residual: float) -> None:
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class DegenerateInputError(NumericalError):
    """Exception raised when the input carries no usable variance"""
