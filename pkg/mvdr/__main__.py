#!/usr/bin/python3

"""Script to support python3 -m mvdr"""
# This script is part of MVDR
# Copyright (C) 2026  MVDR contributors

# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, version 3.

# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.
# SPDX-License-Identifier: GPL-3.0-only

import sys
from .main import main

sys.exit(main())
