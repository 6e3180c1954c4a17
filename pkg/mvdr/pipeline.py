#!/usr/bin/python3

"""Module composing decoding, feature extraction, fusion, PCA and SVM into training and inference"""
# The pipeline module is part of MVDR
# Copyright (C) 2026  MVDR contributors

# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, version 3.

# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.
# SPDX-License-Identifier: GPL-3.0-only

from __future__ import annotations
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple
import numpy as np
from . import pca, svm
from .config import section
from .convnet import DEFAULT_STAGES, ConvLayerParams, NetworkConfig, Stage, extract_features, init_weights, output_shape
from .errors import ConfigMismatchError, DataError, DatasetError, FusionError, ModelIntegrityError, ShapeError
from .fusion import FeatureMatrix, SplicedRow, assemble, order_views, splice
from .imageio import LabeledSample, ViewSet
from .imageio.datasets import Dataset, open_dataset
from .imageio.decoding import decode_depth_file, decode_file
from .imageio.views import prepare_views
from .modelfile import FORMAT_VERSION, SectionReader, SectionWriter, read_container, write_container


__all__ = (
    "DEFAULT_RESOLUTION",
    "DEFAULT_VIEWS",
    "PipelineConfig",
    "TrainedModel",
    "Prediction",
    "EvalReport",
    "AblationResult",
    "sample_row",
    "extract_matrix",
    "train",
    "train_samples",
    "load_features",
    "predict_views",
    "predict_file",
    "evaluate",
    "evaluate_samples",
    "evaluate_predictions",
    "encode_model",
    "decode_model",
    "save_model",
    "load_model",
    "ablation",
    "format_ablation"
)

logger = logging.getLogger(__name__)

DEFAULT_RESOLUTION = 32

DEFAULT_VIEWS = ("r", "g", "b", "gray")


class PipelineConfig(NamedTuple):
    """everything that determines a trained model besides the training data"""
    width: int = DEFAULT_RESOLUTION
    height: int = DEFAULT_RESOLUTION
    views: Tuple[str, ...] = DEFAULT_VIEWS
    stages: Tuple[Tuple[int, int], ...] = DEFAULT_STAGES
    seed: int = 0
    threshold: float = pca.DEFAULT_THRESHOLD
    svm: svm.SolverSettings = svm.SolverSettings()
    classes: Tuple[str, ...] = ()

    @classmethod
    def from_config(cls, config: Mapping[str, Any]) -> PipelineConfig:
        """create an instance from configuration data with the tables input, network, pca and svm"""
        inputs = section(config, "input")
        resolution = inputs.get("resolution", DEFAULT_RESOLUTION)
        if isinstance(resolution, int) and not isinstance(resolution, bool):
            width = height = resolution
        elif isinstance(resolution, Sequence) and len(resolution) == 2 \
                and all(isinstance(value, int) and not isinstance(value, bool) for value in resolution):
            width, height = resolution
        else:
            raise ValueError("value of key 'resolution' expected to be an int or an array of two ints")
        views = inputs.get("views", list(DEFAULT_VIEWS))
        if isinstance(views, str) or not isinstance(views, Sequence) \
                or not all(isinstance(view, str) for view in views):
            raise ValueError("value of key 'views' expected to be an array of strings")
        net = NetworkConfig.from_config(section(config, "network"))
        threshold = section(config, "pca").get("threshold", pca.DEFAULT_THRESHOLD)
        if isinstance(threshold, bool) or not isinstance(threshold, (int, float)):
            raise ValueError("value of key 'threshold' expected to be a number")
        return cls(
            width=width,
            height=height,
            views=order_views(views),
            stages=net.shape(),
            seed=net.seed,
            threshold=float(threshold),
            svm=svm.SolverSettings.from_config(section(config, "svm"))
        ).check()

    def check(self) -> PipelineConfig:
        """validate the invariants and return self"""
        if self.width < 1 or self.height < 1:
            raise ValueError(f"resolution expected to be positive, got {self.width}x{self.height}")
        if order_views(self.views) != self.views:
            raise ValueError(f"views expected in splicing order, got {', '.join(self.views)}")
        if not 0.0 < self.threshold <= 1.0:
            raise ValueError(f"pca threshold expected to lie in (0, 1], got {self.threshold}")
        return self

    def network(self) -> NetworkConfig:
        """draw the network weights"""
        return init_weights(self.seed, self.stages)

    def to_text(self) -> str:
        """serialize as sorted key=value lines with JSON values"""
        fields = {
            "width": self.width,
            "height": self.height,
            "views": list(self.views),
            "stages": [list(stage) for stage in self.stages],
            "seed": self.seed,
            "threshold": self.threshold,
            "c": self.svm.c,
            "tolerance": self.svm.tolerance,
            "max_epochs": self.svm.max_epochs,
            "classes": list(self.classes)
        }
        return "".join(f"{key}={json.dumps(value)}\n" for key, value in sorted(fields.items()))

    @classmethod
    def from_text(cls, text: str) -> PipelineConfig:
        """parse the output of to_text"""
        fields = {}
        for line in text.splitlines():
            key, separator, value = line.partition("=")
            if not separator:
                raise ValueError(f"malformed config line '{line}'")
            fields[key] = json.loads(value)
        return cls(
            width=int(fields["width"]),
            height=int(fields["height"]),
            views=tuple(fields["views"]),
            stages=tuple((int(maps), int(pool)) for maps, pool in fields["stages"]),
            seed=int(fields["seed"]),
            threshold=float(fields["threshold"]),
            svm=svm.SolverSettings(float(fields["c"]), float(fields["tolerance"]), int(fields["max_epochs"])),
            classes=tuple(fields["classes"])
        ).check()


class TrainedModel:
    """network weights, PCA model and SVM hyperplanes produced by one training run"""
    __slots__ = ("config", "net", "pca", "svm", "format_version", "__weakref__")

    config: PipelineConfig

    net: NetworkConfig

    pca: pca.PcaModel

    svm: svm.SvmModel

    format_version: int

    def __init__(self, config: PipelineConfig, net: NetworkConfig, pca_model: pca.PcaModel, svm_model: svm.SvmModel, format_version: int = FORMAT_VERSION) -> None:
        if net.shape() != config.stages or net.seed != config.seed:
            raise ShapeError("network does not match the configured stages and seed")
        _, length = output_shape(net, config.width, config.height)
        if pca_model.n != length * len(config.views):
            raise ShapeError(
                f"pca expects {pca_model.n} features, the fusion layout yields {length * len(config.views)}"
            )
        if svm_model.width != pca_model.w:
            raise ShapeError(f"svm expects width {svm_model.width}, pca retains {pca_model.w} components")
        if svm_model.classes != config.classes:
            raise ShapeError("svm classes differ from the class manifest")
        self.config = config
        self.net = net
        self.pca = pca_model
        self.svm = svm_model
        self.format_version = format_version

    def __eq__(self, other: object) -> bool:
        if isinstance(other, TrainedModel):
            return self.config == other.config \
                and self.net == other.net \
                and self.pca == other.pca \
                and self.svm == other.svm \
                and self.format_version == other.format_version
        return NotImplemented

    @property
    def classes(self) -> Tuple[str, ...]:
        return self.config.classes


class Prediction(NamedTuple):
    """winning class and the decision values of every class"""
    label: int
    name: str
    decisions: np.ndarray


class EvalReport(NamedTuple):
    """per-class and mean-of-class accuracy together with the confusion matrix"""
    classes: Tuple[str, ...]
    per_class_accuracy: Tuple[Optional[float], ...]
    mean_class_accuracy: float
    confusion: np.ndarray
    accuracy: float

    def to_json(self) -> Dict[str, Any]:
        """report as JSON-compatible data, classes without test samples have a null accuracy"""
        return {
            "classes": list(self.classes),
            "per_class_accuracy": list(self.per_class_accuracy),
            "mean_class_accuracy": self.mean_class_accuracy,
            "confusion": self.confusion.tolist(),
            "accuracy": self.accuracy
        }

    def format(self) -> str:
        """human readable report"""
        width = max(len(name) for name in self.classes)
        lines = [f"mean_class_accuracy: {self.mean_class_accuracy:.4f}", f"accuracy: {self.accuracy:.4f}"]
        for name, value, row in zip(self.classes, self.per_class_accuracy, self.confusion.tolist()):
            rate = "n/a" if value is None else f"{value:.4f}"
            lines.append(f"{name:<{width}}  {rate:>6}  {' '.join(str(count) for count in row)}")
        return "\n".join(lines) + "\n"


class AblationResult(NamedTuple):
    """mean-of-class accuracies of one view set over several seeds"""
    views: Tuple[str, ...]
    accuracies: Tuple[float, ...]
    mean: float
    std: float


def sample_row(views: ViewSet, net: NetworkConfig, enabled: Sequence[str], label: int = 0, source: str = "<sample>") -> SplicedRow:
    """extract the features of every enabled view and splice them"""
    vectors = []
    for name in enabled:
        plane = views.get(name)
        if plane is None:
            raise FusionError(f"sample '{source}' lacks the configured view '{name}'", source, name)
        vectors.append(extract_features(plane, net, name))
    return splice(vectors, label, enabled, source)


def extract_matrix(samples: Sequence[LabeledSample], net: NetworkConfig, enabled: Sequence[str], threads: Optional[int] = None) -> FeatureMatrix:
    """build the feature matrix of samples, rows in sample order"""
    def row(sample: LabeledSample) -> SplicedRow:
        return sample_row(sample.views, net, enabled, sample.label, sample.source)

    if threads == 1 or len(samples) < 2:
        rows = [row(sample) for sample in samples]
    else:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            rows = list(executor.map(row, samples))
    return assemble(rows)


def _check_depth(dataset: Dataset, enabled: Sequence[str]) -> None:
    """fail before decoding if the depth view is enabled and a depth file is missing"""
    if "depth" not in enabled:
        return
    for name in dataset:
        if not dataset.has_depth(name):
            source = dataset[name]
            raise FusionError(
                f"sample '{source.origin}' lacks the configured view 'depth' (missing '{source.depth_origin}')",
                source.origin,
                "depth"
            )


class _Timer:
    """log the duration of pipeline stages"""
    __slots__ = ("started",)

    started: float

    def __init__(self) -> None:
        self.started = time.perf_counter()

    def lap(self, stage: str) -> None:
        now = time.perf_counter()
        logger.info("%s took %.3fs", stage, now - self.started)
        self.started = now


def train(root: str, config: PipelineConfig = PipelineConfig(), threads: Optional[int] = None) -> TrainedModel:
    """train a model on the dataset at root"""
    timer = _Timer()
    with open_dataset(root) as dataset:
        _check_depth(dataset, config.views)
        samples = dataset.load(config.width, config.height, threads)
        classes = dataset.classes
    timer.lap("decoding")
    return train_samples(samples, classes, config, threads)


def train_samples(samples: Sequence[LabeledSample], classes: Sequence[str], config: PipelineConfig = PipelineConfig(), threads: Optional[int] = None) -> TrainedModel:
    """train a model on already decoded samples"""
    config = config._replace(classes=tuple(classes)).check()
    timer = _Timer()
    net = config.network()
    trace, length = output_shape(net, config.width, config.height)
    logger.debug("network trace %s, %d features per view", trace, length)
    matrix = extract_matrix(samples, net, config.views, threads)
    timer.lap("feature extraction")
    pca_model = pca.fit(matrix, config.threshold)
    timer.lap("pca")
    projected = pca.project(pca_model, matrix.data)
    svm_model = svm.train_multiclass(projected, matrix.labels, classes, config.svm, threads)
    timer.lap("svm")
    logger.info("trained on %d samples: n=%d, w=%d", matrix.rows, pca_model.n, pca_model.w)
    return TrainedModel(config, net, pca_model, svm_model)


def load_features(root: str, config: PipelineConfig = PipelineConfig(), threads: Optional[int] = None) -> Tuple[FeatureMatrix, Tuple[str, ...]]:
    """feature matrix and classes of the dataset at root"""
    config.check()
    with open_dataset(root) as dataset:
        _check_depth(dataset, config.views)
        samples = dataset.load(config.width, config.height, threads)
        classes = dataset.classes
    return extract_matrix(samples, config.network(), config.views, threads), classes


def predict_views(model: TrainedModel, views: ViewSet, source: str = "<sample>") -> Prediction:
    """classify one prepared view set"""
    if views.shape != (model.config.width, model.config.height):
        raise ConfigMismatchError(
            f"views of '{source}' have size {views.shape}, the model expects {(model.config.width, model.config.height)}"
        )
    row = sample_row(views, model.net, model.config.views, 0, source)
    decisions = model.svm.decisions(pca.project(model.pca, row.values))
    label = int(np.argmax(decisions))
    return Prediction(label, model.classes[label], decisions)


def predict_file(model: TrainedModel, image: str, depth: Optional[str] = None) -> Prediction:
    """classify an image file with its optional depth file"""
    if depth is not None and "depth" not in model.config.views:
        _, length = output_shape(model.net, model.config.width, model.config.height)
        raise ConfigMismatchError(
            f"depth file '{depth}' supplied but the model was trained without the depth view "
            f"(feature width would be {model.pca.n + length} instead of {model.pca.n})"
        )
    if depth is None and "depth" in model.config.views:
        raise FusionError(f"sample '{image}' lacks the configured view 'depth'", image, "depth")
    rgb = decode_file(image)
    plane = None if depth is None else decode_depth_file(depth)
    try:
        views = prepare_views(rgb, plane, model.config.width, model.config.height)
    except ShapeError as e:
        raise ShapeError(f"{image}: {e}") from e
    return predict_views(model, views, image)


def evaluate_predictions(labels: Sequence[int], predictions: Sequence[int], classes: Sequence[str]) -> EvalReport:
    """compute accuracies and the confusion matrix (rows: true class, columns: predicted class)"""
    labels = np.asarray(labels, dtype=np.int64)
    predictions = np.asarray(predictions, dtype=np.int64)
    if labels.shape != predictions.shape or labels.ndim != 1:
        raise ShapeError(f"got {labels.shape} labels but {predictions.shape} predictions")
    if labels.shape[0] == 0:
        raise DataError("evaluation needs at least one sample")
    k = len(classes)
    if np.any((labels < 0) | (labels >= k)) or np.any((predictions < 0) | (predictions >= k)):
        raise ValueError(f"labels expected to lie in [0, {k})")
    confusion = np.zeros((k, k), dtype=np.int64)
    np.add.at(confusion, (labels, predictions), 1)
    counts = confusion.sum(axis=1)
    per_class = tuple(
        None if count == 0 else float(confusion[index, index] / count)
        for index, count in enumerate(counts.tolist())
    )
    # classes without test samples do not enter the mean
    present = [value for value in per_class if value is not None]
    return EvalReport(
        tuple(classes),
        per_class,
        float(np.mean(present)),
        confusion,
        float(np.trace(confusion) / labels.shape[0])
    )


def evaluate_samples(model: TrainedModel, samples: Sequence[LabeledSample], threads: Optional[int] = None) -> EvalReport:
    """evaluate a model on already decoded samples"""
    matrix = extract_matrix(samples, model.net, model.config.views, threads)
    decisions = model.svm.decisions(pca.project(model.pca, matrix.data))
    return evaluate_predictions(matrix.labels, np.argmax(decisions, axis=1), model.classes)


def evaluate(model: TrainedModel, root: str, threads: Optional[int] = None) -> EvalReport:
    """evaluate a model on the dataset at root, which needs the same class manifest"""
    with open_dataset(root) as dataset:
        if dataset.classes != model.classes:
            raise DatasetError(
                f"classes of '{root}' ({', '.join(dataset.classes)}) "
                f"differ from the model classes ({', '.join(model.classes)})"
            )
        _check_depth(dataset, model.config.views)
        samples = dataset.load(model.config.width, model.config.height, threads)
    return evaluate_samples(model, samples, threads)


def _encode_net(net: NetworkConfig) -> bytes:
    writer = SectionWriter()
    writer.u32(len(net.stages))
    for stage in net.stages:
        writer.u32(stage.params.maps)
        writer.u32(stage.pool)
        writer.array(stage.params.kernels)
        writer.array(stage.params.biases)
    return writer.payload()


def _decode_net(data: bytes, seed: int) -> NetworkConfig:
    reader = SectionReader(data, "network")
    stages = []
    for _ in range(reader.u32()):
        maps = reader.u32()
        pool = reader.u32()
        kernels = reader.array((maps, 3, 3))
        biases = reader.array((maps,))
        stages.append(Stage(ConvLayerParams(kernels, biases), pool))
    reader.finish()
    return NetworkConfig(stages, seed)


def _encode_pca(model: pca.PcaModel) -> bytes:
    writer = SectionWriter()
    n, k = model.eigenvectors.shape
    writer.u32(n)
    writer.u32(k)
    writer.u32(model.w)
    writer.f64(model.threshold)
    writer.array(model.standardization.means)
    writer.array(model.standardization.stds)
    writer.array(model.standardization.zero_variance_mask, "u1")
    writer.array(model.eigenvalues)
    writer.array(model.eigenvectors)
    return writer.payload()


def _decode_pca(data: bytes) -> pca.PcaModel:
    reader = SectionReader(data, "pca")
    n = reader.u32()
    k = reader.u32()
    w = reader.u32()
    threshold = reader.f64()
    means = reader.array((n,))
    stds = reader.array((n,))
    mask = reader.array((n,), "u1").astype(bool)
    eigenvalues = reader.array((k,))
    eigenvectors = reader.array((n, k))
    reader.finish()
    return pca.PcaModel(pca.Standardization(means, stds, mask), eigenvalues, eigenvectors, w, threshold)


def _encode_svm(model: svm.SvmModel) -> bytes:
    writer = SectionWriter()
    writer.u32(len(model.classes))
    for name in model.classes:
        writer.text(name)
    writer.u32(model.width)
    writer.f64(model.c)
    writer.array(model.weights)
    writer.array(model.biases)
    return writer.payload()


def _decode_svm(data: bytes) -> svm.SvmModel:
    reader = SectionReader(data, "svm")
    classes = [reader.text() for _ in range(reader.u32())]
    width = reader.u32()
    c = reader.f64()
    weights = reader.array((len(classes), width))
    biases = reader.array((len(classes),))
    reader.finish()
    return svm.SvmModel(classes, weights, biases, c)


def encode_model(model: TrainedModel) -> bytes:
    """serialize a model into the versioned container"""
    return write_container(
        (
            model.config.to_text().encode("utf8"),
            _encode_net(model.net),
            _encode_pca(model.pca),
            _encode_svm(model.svm)
        ),
        model.format_version
    )


def decode_model(data: bytes) -> TrainedModel:
    """parse a model serialized by encode_model"""
    sections = read_container(data)
    if len(sections) != 4:
        raise ModelIntegrityError(f"model file has {len(sections)} sections, expected 4")
    try:
        config = PipelineConfig.from_text(sections[0].decode("utf8"))
        net = _decode_net(sections[1], config.seed)
        return TrainedModel(config, net, _decode_pca(sections[2]), _decode_svm(sections[3]))
    except ModelIntegrityError:
        raise
    except (DataError, ValueError, KeyError, TypeError) as e:
        raise ModelIntegrityError(f"model file is inconsistent: {e}") from e


def save_model(model: TrainedModel, path: str) -> None:
    """write a model file"""
    with open(path, "wb") as fd:
        fd.write(encode_model(model))
    logger.info("saved model to '%s'", path)


def load_model(path: str) -> TrainedModel:
    """read a model file"""
    with open(path, "rb") as fd:
        data = fd.read()
    try:
        return decode_model(data)
    except ModelIntegrityError as e:
        raise ModelIntegrityError(f"{path}: {e}") from e


def _views_label(views: Sequence[str]) -> str:
    return ",".join(views)


def ablation(train_root: str, test_root: str, config: PipelineConfig, view_sets: Sequence[Sequence[str]], seeds: Sequence[int] = (0,), threads: Optional[int] = None) -> List[AblationResult]:
    """train and evaluate every view set with every network seed"""
    if not view_sets or not seeds:
        raise ValueError("ablation needs at least one view set and one seed")
    ordered = [order_views(views) for views in view_sets]
    with open_dataset(train_root) as dataset:
        if any("depth" in views for views in ordered):
            _check_depth(dataset, ("depth",))
        train_set = dataset.load(config.width, config.height, threads)
        classes = dataset.classes
    with open_dataset(test_root) as dataset:
        if dataset.classes != classes:
            raise DatasetError(f"classes of '{test_root}' differ from the classes of '{train_root}'")
        if any("depth" in views for views in ordered):
            _check_depth(dataset, ("depth",))
        test_set = dataset.load(config.width, config.height, threads)
    results = []
    for views in ordered:
        accuracies = []
        for seed in seeds:
            model = train_samples(train_set, classes, config._replace(views=views, seed=seed), threads)
            report = evaluate_samples(model, test_set, threads)
            logger.info("views %s, seed %d: %.4f", _views_label(views), seed, report.mean_class_accuracy)
            accuracies.append(report.mean_class_accuracy)
        values = np.array(accuracies)
        results.append(AblationResult(views, tuple(accuracies), float(values.mean()), float(values.std())))
    return results


def format_ablation(results: Sequence[AblationResult]) -> str:
    """one line with mean and standard deviation per view set"""
    width = max(len(_views_label(result.views)) for result in results)
    return "".join(
        f"{_views_label(result.views):<{width}}  {result.mean:.4f} +- {result.std:.4f}\n"
        for result in results
    )
