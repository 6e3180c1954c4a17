#!/usr/bin/python3

"""file to allow non PEP 517 builds"""

import setuptools

setuptools.setup()
