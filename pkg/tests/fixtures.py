#!/usr/bin/python3

"""Helpers writing small image datasets for tests"""

import io
import os
import os.path
import zipfile
from typing import Mapping, Optional, Sequence, Tuple
import numpy as np
from PIL import Image

Sample = Tuple[np.ndarray, Optional[np.ndarray]]


def encode_png(values: np.ndarray) -> bytes:
    """encode intensities in [0, 1] as 8 bit PNG"""
    buffer = io.BytesIO()
    Image.fromarray(np.round(np.asarray(values) * 255.0).astype(np.uint8)).save(buffer, format="PNG")
    return buffer.getvalue()


def dataset_files(classes: Mapping[str, Sequence[Sample]]) -> Mapping[str, bytes]:
    """relative paths and contents of a dataset, depth maps are written when not None"""
    files = {"classes.txt": "".join(f"{name}\n" for name in classes).encode("utf8")}
    for name, samples in classes.items():
        for index, (rgb, depth) in enumerate(samples):
            files[f"{name}/{index:03d}.png"] = encode_png(rgb)
            if depth is not None:
                files[f"{name}/{index:03d}.depth.png"] = encode_png(depth)
    return files


def write_directory(root: str, classes: Mapping[str, Sequence[Sample]]) -> str:
    """write a dataset directory"""
    for name in classes:
        os.makedirs(os.path.join(root, name), exist_ok=True)
    for path, data in dataset_files(classes).items():
        with open(os.path.join(root, *path.split("/")), "wb") as fd:
            fd.write(data)
    return root


def write_zip(path: str, classes: Mapping[str, Sequence[Sample]]) -> str:
    """write a dataset archive"""
    with zipfile.ZipFile(path, "w") as file:
        for name, data in dataset_files(classes).items():
            file.writestr(name, data)
    return path


def random_samples(generator: np.random.Generator, count: int, size: int = 8, depth: bool = True) -> Sequence[Sample]:
    """noise images with optional noise depth maps"""
    return [
        (
            generator.uniform(size=(size, size, 3)),
            generator.uniform(size=(size, size)) if depth else None
        )
        for _ in range(count)
    ]
