#!/usr/bin/python3

"""Module containing dataset containers for directories and zip archives"""
# The imageio.datasets module is part of MVDR
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
import zipfile
from abc import ABCMeta, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from types import TracebackType
from typing import (
    Dict,
    Iterable,
    Iterator,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Type,
    TypeVar
)
from . import LabeledSample
from .decoding import decode_image, decode_depth
from .views import prepare_views
from ..errors import DatasetError, DecodeError, ShapeError


__all__ = (
    "MANIFEST_NAME",
    "IMAGE_SUFFIXES",
    "DEPTH_SUFFIX",
    "parse_manifest",
    "SampleSource",
    "Dataset",
    "Directory",
    "ZIPDataset",
    "open_dataset",
    "load_dataset"
)

logger = logging.getLogger(__name__)

MANIFEST_NAME = "classes.txt"

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")

DEPTH_SUFFIX = ".depth.png"

D = TypeVar("D", bound="Dataset")


def parse_manifest(text: str) -> Tuple[str, ...]:
    """parse the class manifest, line index = label"""
    lines = text.splitlines()
    while lines and not lines[-1].strip():     # tolerate trailing blank lines
        lines.pop()
    classes = tuple(line.strip() for line in lines)
    if not classes:
        raise DatasetError(f"manifest '{MANIFEST_NAME}' declares no classes")
    for index, name in enumerate(classes):
        if not name:
            raise DatasetError(f"manifest '{MANIFEST_NAME}' has an empty class name on line {index + 1}")
        if "/" in name or "\\" in name:
            raise DatasetError(f"class name '{name}' must not contain path separators")
    duplicates = sorted({name for name in classes if classes.count(name) > 1})
    if duplicates:
        raise DatasetError(f"manifest '{MANIFEST_NAME}' repeats classes: {', '.join(duplicates)}")
    return classes


def is_image(name: str) -> bool:
    """check if a file name denotes an RGB image of the dataset"""
    lowered = name.lower()
    return lowered.endswith(IMAGE_SUFFIXES) and not lowered.endswith(DEPTH_SUFFIX)


def depth_name(name: str) -> str:
    """name of the depth file belonging to an image file"""
    return os.path.splitext(name)[0] + DEPTH_SUFFIX


class SampleSource(metaclass=ABCMeta):
    """abc for one image of a dataset together with its optional depth file"""
    __slots__ = ("name", "label", "__weakref__")

    name: str

    label: int

    def __init__(self, name: str, label: int) -> None:
        self.name = name
        self.label = label

    @property
    @abstractmethod
    def origin(self) -> str:
        """path naming the image in error messages"""
        raise NotImplementedError

    @property
    @abstractmethod
    def depth_origin(self) -> str:
        """path naming the (possibly missing) depth file"""
        raise NotImplementedError

    @abstractmethod
    def image_bytes(self) -> bytes:
        """retrieve the encoded image"""
        raise NotImplementedError

    @abstractmethod
    def depth_bytes(self) -> Optional[bytes]:
        """retrieve the encoded depth map, None if the image has none"""
        raise NotImplementedError

    def load(self, width: int, height: int) -> LabeledSample:
        """decode the image and depth map and split them into views at the working resolution"""
        image = decode_image(self.image_bytes(), self.origin)
        depth_data = self.depth_bytes()
        depth = None if depth_data is None else decode_depth(depth_data, self.depth_origin)
        try:
            views = prepare_views(image, depth, width, height)
        except ShapeError as e:
            raise ShapeError(f"{self.origin}: {e}") from e
        return LabeledSample(views, self.label, self.origin)


class Dataset(Mapping[str, SampleSource]):
    """abc for a labeled image collection, mapping relative paths to sample sources in lexicographic order"""
    __slots__ = ("classes", "entries", "__weakref__")

    classes: Tuple[str, ...]

    entries: Dict[str, Tuple[int, bool]]

    def __enter__(self: D) -> D:
        return self

    def __exit__(self, type: Optional[Type[BaseException]], value: Optional[BaseException], traceback: Optional[TracebackType]) -> Optional[bool]:  # type: ignore
        self.close()
        return False    # dont swallow exceptions

    def __getitem__(self, name: str) -> SampleSource:
        label, has_depth = self.entries[name]
        return self.source(name, label, has_depth)

    def __iter__(self) -> Iterator[str]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    @abstractmethod
    def source(self, name: str, label: int, has_depth: bool) -> SampleSource:
        """create the sample source for an indexed entry"""
        raise NotImplementedError

    def index(self, classes: Sequence[str], files: Iterable[str], directories: Iterable[str]) -> None:
        """build the entries from the manifest and the relative paths found in the dataset"""
        unknown = sorted(set(directories) - set(classes))
        if unknown:
            raise DatasetError(f"unknown class directories not named in '{MANIFEST_NAME}': {', '.join(unknown)}")
        files_by_class: Dict[str, List[str]] = {name: [] for name in classes}
        for path in files:
            directory, _, name = path.partition("/")
            if directory in files_by_class and "/" not in name:
                files_by_class[directory].append(name)
        entries: Dict[str, Tuple[int, bool]] = {}
        empty = []
        for label, directory in enumerate(classes):
            names = set(files_by_class[directory])
            images = [name for name in names if is_image(name)]
            if not images:
                empty.append(directory)
            for name in images:
                entries[f"{directory}/{name}"] = (label, depth_name(name) in names)
        if empty:
            raise DatasetError(f"classes without images: {', '.join(empty)}")
        self.classes = tuple(classes)
        self.entries = dict(sorted(entries.items()))

    def has_depth(self, name: str) -> bool:
        """check if the entry has a sibling depth file"""
        return self.entries[name][1]

    def load(self, width: int, height: int, threads: Optional[int] = None) -> List[LabeledSample]:
        """decode every sample in order, optionally with multiple workers"""
        sources = list(self.values())
        if threads == 1 or len(sources) < 2:
            return [source.load(width, height) for source in sources]
        with ThreadPoolExecutor(max_workers=threads) as executor:
            return list(executor.map(lambda source: source.load(width, height), sources))

    def close(self) -> None:
        """perform cleanup actions"""
        pass


class FileSample(SampleSource):
    """sample stored as files in a directory"""
    __slots__ = ("path", "depth_path", "has_depth")

    path: str

    depth_path: str

    has_depth: bool

    def __init__(self, name: str, label: int, path: str, has_depth: bool) -> None:
        super().__init__(name, label)
        self.path = path
        self.depth_path = depth_name(path)
        self.has_depth = has_depth

    @property
    def origin(self) -> str:
        return self.path

    @property
    def depth_origin(self) -> str:
        return self.depth_path

    @staticmethod
    def _read(path: str) -> bytes:
        try:
            with open(path, "rb") as fd:
                return fd.read()
        except OSError as e:
            raise DecodeError(f"failed to read file: {e.strerror}", path) from e

    def image_bytes(self) -> bytes:
        return self._read(self.path)

    def depth_bytes(self) -> Optional[bytes]:
        if self.has_depth:
            return self._read(self.depth_path)
        return None


class Directory(Dataset):
    """dataset stored as root/<class>/<image> with root/classes.txt"""
    __slots__ = ("directory_path",)

    directory_path: str

    def __init__(self, path: str) -> None:
        self.directory_path = os.path.normpath(path)
        try:
            with open(os.path.join(self.directory_path, MANIFEST_NAME), "r", encoding="utf8") as fd:
                classes = parse_manifest(fd.read())
        except FileNotFoundError as e:
            raise DatasetError(f"dataset '{path}' has no manifest '{MANIFEST_NAME}'") from e
        try:
            directories = sorted(
                entry.name for entry in os.scandir(self.directory_path) if entry.is_dir()
            )
        except OSError as e:
            raise DatasetError(f"failed to list dataset '{path}': {e.strerror}") from e
        missing = [name for name in classes if name not in directories]
        if missing:
            raise DatasetError(f"dataset '{path}' lacks class directories: {', '.join(missing)}")
        files = []
        for directory in classes:
            for entry in os.scandir(os.path.join(self.directory_path, directory)):
                if entry.is_file():
                    files.append(f"{directory}/{entry.name}")
        self.index(classes, files, directories)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Directory):
            return self.directory_path == other.directory_path
        return NotImplemented

    def source(self, name: str, label: int, has_depth: bool) -> FileSample:
        return FileSample(
            name,
            label,
            os.path.join(self.directory_path, *name.split("/")),
            has_depth
        )


class ZIPSample(SampleSource):
    """sample stored as zip archive entries"""
    __slots__ = ("file", "has_depth")

    file: zipfile.ZipFile

    has_depth: bool

    def __init__(self, name: str, label: int, file: zipfile.ZipFile, has_depth: bool) -> None:
        super().__init__(name, label)
        self.file = file
        self.has_depth = has_depth

    @property
    def origin(self) -> str:
        return os.path.join(str(self.file.filename), self.name)

    @property
    def depth_origin(self) -> str:
        return os.path.join(str(self.file.filename), depth_name(self.name))

    def _read(self, name: str, origin: str) -> bytes:
        try:
            return self.file.read(name)
        except (KeyError, zipfile.BadZipFile, OSError) as e:
            raise DecodeError(f"failed to read archive entry: {e}", origin) from e

    def image_bytes(self) -> bytes:
        return self._read(self.name, self.origin)

    def depth_bytes(self) -> Optional[bytes]:
        if self.has_depth:
            return self._read(depth_name(self.name), self.depth_origin)
        return None


class ZIPDataset(Dataset):
    """dataset stored inside a zip archive with the directory layout at its root"""
    __slots__ = ("file",)

    file: zipfile.ZipFile

    def __init__(self, path: str) -> None:
        try:
            self.file = zipfile.ZipFile(path, "r")
        except (OSError, zipfile.BadZipFile) as e:
            raise DatasetError(f"failed to open dataset archive '{path}': {e}") from e
        try:
            try:
                classes = parse_manifest(self.file.read(MANIFEST_NAME).decode("utf8"))
            except KeyError as e:
                raise DatasetError(f"dataset '{path}' has no manifest '{MANIFEST_NAME}'") from e
            names = [name for name in self.file.namelist() if not name.endswith("/")]
            directories = {name.partition("/")[0] for name in self.file.namelist() if "/" in name}
            missing = [name for name in classes if name not in directories]
            if missing:
                raise DatasetError(f"dataset '{path}' lacks class directories: {', '.join(missing)}")
            self.index(classes, names, directories)
        except BaseException:
            self.file.close()
            raise

    def __eq__(self, other: object) -> bool:
        if isinstance(other, ZIPDataset):
            return self.file.filename == other.file.filename
        return NotImplemented

    def source(self, name: str, label: int, has_depth: bool) -> ZIPSample:
        return ZIPSample(name, label, self.file, has_depth)

    def load(self, width: int, height: int, threads: Optional[int] = None) -> List[LabeledSample]:
        """decode every sample in order (sequentially, zip members share one file handle)"""
        return super().load(width, height, 1)

    def close(self) -> None:
        """close the archive"""
        self.file.close()


def open_dataset(path: str) -> Dataset:
    """open a dataset directory or zip archive"""
    if os.path.isdir(path):
        return Directory(path)
    if zipfile.is_zipfile(path):
        return ZIPDataset(path)
    raise DatasetError(f"dataset '{path}' is neither a directory nor a zip archive")


def load_dataset(path: str, width: int = 32, height: int = 32, threads: Optional[int] = None) -> List[LabeledSample]:
    """load every sample of a dataset in lexicographic path order"""
    with open_dataset(path) as dataset:
        samples = dataset.load(width, height, threads)
    logger.info("loaded %d samples of %d classes from '%s'", len(samples), len(dataset.classes), path)
    return samples
