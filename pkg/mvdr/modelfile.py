#!/usr/bin/python3

"""Module containing the binary container used for model files"""
# The modelfile module is part of MVDR
# Copyright (C) 2026  MVDR contributors

# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, version 3.

# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.
# SPDX-License-Identifier: GPL-3.0-only

# layout (little endian):
#   magic        8 bytes  b"MVDRMODL"
#   version      u32
#   body:
#     sections   u32 count, then per section u32 length + payload
#   checksum     u32 CRC32 of the body

from __future__ import annotations
import struct
import zlib
from typing import List, Sequence, Tuple
import numpy as np
from .errors import ModelFormatError, ModelIntegrityError, ModelVersionError


__all__ = (
    "MAGIC",
    "FORMAT_VERSION",
    "SectionWriter",
    "SectionReader",
    "write_container",
    "read_container"
)

MAGIC = b"MVDRMODL"

FORMAT_VERSION = 1

U32 = struct.Struct("<I")

F64 = struct.Struct("<d")


class SectionWriter:
    """builder for the payload of one section"""
    __slots__ = ("parts",)

    parts: List[bytes]

    def __init__(self) -> None:
        self.parts = []

    def u32(self, value: int) -> None:
        self.parts.append(U32.pack(value))

    def f64(self, value: float) -> None:
        self.parts.append(F64.pack(value))

    def text(self, value: str) -> None:
        """length-prefixed UTF-8 text"""
        data = value.encode("utf8")
        self.u32(len(data))
        self.parts.append(data)

    def array(self, values: np.ndarray, dtype: str = "<f8") -> None:
        """raw array data, the shape has to be written separately"""
        self.parts.append(np.ascontiguousarray(values, dtype=dtype).tobytes())

    def payload(self) -> bytes:
        return b"".join(self.parts)


class SectionReader:
    """length-checked reader for the payload of one section"""
    __slots__ = ("data", "offset", "name")

    data: bytes

    offset: int

    name: str

    def __init__(self, data: bytes, name: str) -> None:
        self.data = data
        self.offset = 0
        self.name = name

    def take(self, size: int) -> bytes:
        if size < 0 or self.offset + size > len(self.data):
            raise ModelIntegrityError(f"section '{self.name}' is truncated")
        chunk = self.data[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def u32(self) -> int:
        return int(U32.unpack(self.take(U32.size))[0])

    def f64(self) -> float:
        return float(F64.unpack(self.take(F64.size))[0])

    def text(self) -> str:
        try:
            return self.take(self.u32()).decode("utf8")
        except UnicodeDecodeError as e:
            raise ModelIntegrityError(f"section '{self.name}' contains invalid text") from e

    def array(self, shape: Tuple[int, ...], dtype: str = "<f8") -> np.ndarray:
        kind = np.dtype(dtype)
        count = int(np.prod(shape, dtype=np.int64))
        values = np.frombuffer(self.take(count * kind.itemsize), dtype=kind).reshape(shape)
        return values.astype(kind.newbyteorder("="))

    def finish(self) -> None:
        """ensure the whole payload was consumed"""
        if self.offset != len(self.data):
            raise ModelIntegrityError(f"section '{self.name}' has {len(self.data) - self.offset} trailing bytes")


def write_container(sections: Sequence[bytes], version: int = FORMAT_VERSION) -> bytes:
    """frame sections with magic, version and checksum"""
    body = [U32.pack(len(sections))]
    for section in sections:
        body.append(U32.pack(len(section)))
        body.append(section)
    data = b"".join(body)
    return MAGIC + U32.pack(version) + data + U32.pack(zlib.crc32(data))


def read_container(data: bytes, version: int = FORMAT_VERSION) -> List[bytes]:
    """check magic, version and checksum and split the body into sections"""
    if data[:len(MAGIC)] != MAGIC:
        raise ModelFormatError("not a model file (bad magic)")
    header = len(MAGIC) + U32.size
    if len(data) < header + 2 * U32.size:
        raise ModelIntegrityError("model file is truncated")
    found = U32.unpack(data[len(MAGIC):header])[0]
    if found != version:
        raise ModelVersionError(f"model file has format version {found}, expected {version}")
    body = data[header:-U32.size]
    checksum = U32.unpack(data[-U32.size:])[0]
    if zlib.crc32(body) != checksum:
        raise ModelIntegrityError("model file checksum mismatch")
    reader = SectionReader(body, "container")
    sections = [reader.take(reader.u32()) for _ in range(reader.u32())]
    reader.finish()
    return sections
