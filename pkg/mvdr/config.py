#!/usr/bin/python3

"""Module containing configuration utilities"""
# The config module is part of MVDR
# Copyright (C) 2026  MVDR contributors

# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, version 3.

# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.
# SPDX-License-Identifier: GPL-3.0-only

import os
import os.path
import logging
from typing import Any, Iterable, MutableMapping, Optional, Mapping
import toml

__all__ = (
    "CONFIG_LOCATIONS",
    "ENVIRONMENT_VARIABLE",
    "load_config",
    "config_or_defaults",
    "section"
)

logger = logging.getLogger(__name__)

ENVIRONMENT_VARIABLE = "MVDRCONFIG"

CONFIG_LOCATIONS = (
    os.path.expanduser("~/.config/mvdr.toml"),
    "/etc/mvdr.toml"
)


def load_config(search_paths: Iterable[str] = CONFIG_LOCATIONS) -> MutableMapping[str, Any]:
    """locate and parse the config file"""
    try:
        path = os.environ[ENVIRONMENT_VARIABLE]
    except KeyError:
        pass
    else:
        return toml.load(path)
    for path in search_paths:
        try:
            return toml.load(path)
        except FileNotFoundError:
            pass
    raise RuntimeError("failed to locate the config file")


def config_or_defaults(path: Optional[str] = None, search_paths: Iterable[str] = CONFIG_LOCATIONS) -> MutableMapping[str, Any]:
    """parse the config file at path or a located one, falling back to the built-in defaults"""
    if path is not None:    # user specified the config location
        return toml.load(path)
    try:
        return load_config(search_paths)
    except RuntimeError:
        logger.debug("no config file found, using built-in defaults")
        return {}


def section(config: Mapping[str, Any], name: str) -> Mapping[str, Any]:
    """retrieve a table of the config data, treating a missing table as empty"""
    try:
        value = config[name]
    except KeyError:
        return {}
    if isinstance(value, Mapping):
        return value
    raise ValueError(f"value of key '{name}' expected to be a table")
