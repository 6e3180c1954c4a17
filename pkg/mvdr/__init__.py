#!/usr/bin/python3

"""Package for image classification by PCA of multi-view convolutional features"""
# Copyright (C) 2026  MVDR contributors

# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, version 3.

# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.
# SPDX-License-Identifier: GPL-3.0-only

# package metadata
# needs to be defined before .main is imported
__version__ = "1.0"
__license__ = "GPLv3"

__all__ = (
    "errors",
    "config",
    "imageio",
    "convnet",
    "fusion",
    "pca",
    "svm",
    "modelfile",
    "pipeline",
    "synthetic",
    "main"
)
