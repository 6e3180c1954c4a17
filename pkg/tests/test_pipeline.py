#!/usr/bin/python3

"""Unit tests for mvdr.pipeline"""

import os.path
import tempfile
import unittest
import numpy as np
import toml
from mvdr import pipeline, pca, svm, synthetic
from mvdr.convnet import output_shape
from mvdr.errors import ConfigMismatchError, DataError, DatasetError, FusionError, ModelFormatError, \
    ModelIntegrityError, ModelVersionError, ShapeError
from mvdr.imageio.datasets import load_dataset
from tests.fixtures import random_samples, write_directory


DEPTH_ONLY = pipeline.PipelineConfig(width=16, height=16, views=("depth",), threshold=0.99)


def random_model(generator: np.random.Generator) -> pipeline.TrainedModel:
    """consistent model built from random components"""
    size = int(generator.integers(12, 21))
    views = tuple(view for view in ("r", "g", "b", "gray", "depth") if generator.uniform() < 0.5) or ("gray",)
    classes = tuple(f"class{index}" for index in range(int(generator.integers(1, 5))))
    config = pipeline.PipelineConfig(
        width=size,
        height=size + int(generator.integers(0, 3)),
        views=views,
        seed=int(generator.integers(0, 2**31)),
        threshold=float(generator.uniform(0.1, 1.0)),
        svm=svm.SolverSettings(float(generator.uniform(0.1, 10.0)), 1e-3, int(generator.integers(1, 100))),
        classes=classes
    )
    net = config.network()
    _, length = output_shape(net, config.width, config.height)
    n = length * len(views)
    mask = generator.uniform(size=n) < 0.2
    mask[0] = False
    stds = np.where(mask, 0.0, generator.uniform(0.1, 2.0, size=n))
    k = int(np.count_nonzero(~mask))
    w = int(generator.integers(1, k + 1))
    model = pca.PcaModel(
        pca.Standardization(generator.normal(size=n), stds, mask),
        np.sort(generator.uniform(0.0, 5.0, size=k))[::-1],
        generator.normal(size=(n, k)),
        w,
        config.threshold
    )
    machines = svm.SvmModel(classes, generator.normal(size=(len(classes), w)), generator.normal(size=len(classes)), config.svm.c)
    return pipeline.TrainedModel(config, net, model, machines)


class TestPipelineConfig(unittest.TestCase):
    """test PipelineConfig"""

    def test_from_config(self) -> None:
        """test PipelineConfig.from_config"""
        self.assertEqual(pipeline.PipelineConfig.from_config({}), pipeline.PipelineConfig())
        self.assertEqual(pipeline.PipelineConfig.from_config(toml.load("mvdr.toml")), pipeline.PipelineConfig())
        config = pipeline.PipelineConfig.from_config({
            "input": {"resolution": [20, 12], "views": ["depth", "gray"]},
            "network": {"seed": 3},
            "pca": {"threshold": 0.5},
            "svm": {"c": 2.0}
        })
        self.assertEqual((config.width, config.height), (20, 12))
        self.assertEqual(config.views, ("gray", "depth"))
        self.assertEqual(config.seed, 3)
        self.assertEqual(config.threshold, 0.5)
        self.assertEqual(config.svm.c, 2.0)
        for data in (
            {"input": {"resolution": "32"}},
            {"input": {"resolution": [32]}},
            {"input": {"resolution": True}},
            {"input": {"resolution": 0}},
            {"input": {"views": "rgb"}},
            {"input": {"views": ["infrared"]}},
            {"input": 1},
            {"pca": {"threshold": 0.0}},
            {"pca": {"threshold": 1.5}},
            {"pca": {"threshold": "high"}}
        ):
            with self.subTest(data=data), self.assertRaises(ValueError):
                pipeline.PipelineConfig.from_config(data)

    def test_check(self) -> None:
        """test PipelineConfig.check"""
        config = pipeline.PipelineConfig()
        self.assertIs(config.check(), config)
        for changes in ({"views": ("gray", "r")}, {"width": 0}, {"threshold": -0.1}):
            with self.subTest(changes=changes), self.assertRaises(ValueError):
                config._replace(**changes).check()

    def test_text(self) -> None:
        """test PipelineConfig.to_text and PipelineConfig.from_text"""
        config = pipeline.PipelineConfig(width=24, views=("g", "depth"), seed=9, classes=("a b", "ü"))
        text = config.to_text()
        self.assertEqual(text.splitlines()[0].split("=")[0], "c")
        self.assertEqual(pipeline.PipelineConfig.from_text(text), config)
        with self.assertRaises(ValueError):
            pipeline.PipelineConfig.from_text("width 24")


class TestEvaluatePredictions(unittest.TestCase):
    """test evaluate_predictions"""

    def test_constant(self) -> None:
        """test a predictor which always answers the first class"""
        labels = [0, 1, 2] * 4
        report = pipeline.evaluate_predictions(labels, [0] * 12, ("a", "b", "c"))
        self.assertEqual(report.per_class_accuracy, (1.0, 0.0, 0.0))
        self.assertAlmostEqual(report.mean_class_accuracy, 1 / 3, places=12)
        self.assertEqual(report.confusion.tolist(), [[4, 0, 0], [4, 0, 0], [4, 0, 0]])
        self.assertAlmostEqual(report.accuracy, 1 / 3, places=12)

    def test_unbalanced(self) -> None:
        """test that the mean weights every class equally"""
        report = pipeline.evaluate_predictions([0] * 9 + [1], [0] * 9 + [0], ("a", "b"))
        self.assertEqual(report.mean_class_accuracy, 0.5)
        self.assertEqual(report.accuracy, 0.9)
        self.assertTrue(np.all(report.confusion.sum(axis=1) == [9, 1]))

    def test_empty_class(self) -> None:
        """test classes without test samples"""
        report = pipeline.evaluate_predictions([0, 0, 2], [0, 1, 2], ("a", "b", "c"))
        self.assertEqual(report.per_class_accuracy, (0.5, None, 1.0))
        self.assertEqual(report.mean_class_accuracy, 0.75)
        data = report.to_json()
        self.assertEqual(data["per_class_accuracy"], [0.5, None, 1.0])
        self.assertEqual(data["confusion"], [[1, 1, 0], [0, 0, 0], [0, 0, 1]])
        self.assertIn("n/a", report.format())
        self.assertTrue(report.format().startswith("mean_class_accuracy: 0.7500\n"))

    def test_errors(self) -> None:
        """test invalid input"""
        with self.assertRaises(DataError):
            pipeline.evaluate_predictions([], [], ("a",))
        with self.assertRaises(ShapeError):
            pipeline.evaluate_predictions([0, 0], [0], ("a",))
        with self.assertRaises(ValueError):
            pipeline.evaluate_predictions([0, 1], [0, 2], ("a", "b"))


class TestModelFile(unittest.TestCase):
    """test encode_model, decode_model, save_model and load_model"""

    def test_random(self) -> None:
        """test that random models survive serialization"""
        generator = np.random.default_rng(30)
        for _ in range(20):
            model = random_model(generator)
            self.assertEqual(pipeline.decode_model(pipeline.encode_model(model)), model)

    def test_corruption(self) -> None:
        """test that damaged files are rejected"""
        data = pipeline.encode_model(random_model(np.random.default_rng(31)))
        damaged = bytearray(data)
        damaged[len(data) // 2] ^= 0x10
        with self.assertRaises(ModelIntegrityError):
            pipeline.decode_model(bytes(damaged))
        damaged = bytearray(data)
        damaged[8] += 1
        with self.assertRaises(ModelVersionError):
            pipeline.decode_model(bytes(damaged))
        with self.assertRaises(ModelFormatError):
            pipeline.decode_model(b"\x89PNG\r\n\x1a\n" + data[8:])
        with self.assertRaises(ModelIntegrityError):
            pipeline.decode_model(data[:-8])

    def test_files(self) -> None:
        """test save_model and load_model"""
        model = random_model(np.random.default_rng(32))
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, "model.bin")
            pipeline.save_model(model, path)
            self.assertEqual(pipeline.load_model(path), model)
            with open(path, "r+b") as fd:
                fd.seek(30)
                byte = fd.read(1)
                fd.seek(30)
                fd.write(bytes((byte[0] ^ 0xFF,)))
            with self.assertRaises(ModelIntegrityError) as context:
                pipeline.load_model(path)
            self.assertIn(path, str(context.exception))
            with self.assertRaises(FileNotFoundError):
                pipeline.load_model(os.path.join(directory, "missing.bin"))

    def test_consistency(self) -> None:
        """test that TrainedModel rejects mismatched components"""
        model = random_model(np.random.default_rng(33))
        with self.assertRaises(ShapeError):
            pipeline.TrainedModel(model.config._replace(seed=model.config.seed + 1), model.net, model.pca, model.svm)
        with self.assertRaises(ShapeError):
            pipeline.TrainedModel(model.config._replace(width=model.config.width + 8), model.net, model.pca, model.svm)
        with self.assertRaises(ShapeError):
            pipeline.TrainedModel(model.config._replace(classes=("other",)), model.net, model.pca, model.svm)
        machines = svm.SvmModel(model.classes, np.zeros((len(model.classes), model.pca.w + 1)), np.zeros(len(model.classes)), 1.0)
        with self.assertRaises(ShapeError):
            pipeline.TrainedModel(model.config, model.net, model.pca, machines)


class TestTraining(unittest.TestCase):
    """test training, prediction and evaluation on generated datasets"""

    @classmethod
    def setUpClass(cls) -> None:
        cls.directory = tempfile.TemporaryDirectory()
        cls.roots = synthetic.generate(cls.directory.name, seed=5, train=10, test=5, size=16)
        cls.model = pipeline.train(cls.roots.train, DEPTH_ONLY, 1)

    @classmethod
    def tearDownClass(cls) -> None:
        cls.directory.cleanup()

    def test_train(self) -> None:
        """test the trained model"""
        self.assertEqual(self.model.classes, tuple(synthetic.PATTERNS))
        self.assertEqual(self.model.config, DEPTH_ONLY._replace(classes=self.model.classes))
        self.assertEqual(self.model.pca.n, 32)
        report = pipeline.evaluate(self.model, self.roots.train)
        self.assertEqual(report.mean_class_accuracy, 1.0)
        self.assertEqual(report.confusion.tolist(), [[10, 0, 0], [0, 10, 0], [0, 0, 10]])

    def test_threads(self) -> None:
        """test that the worker count does not change the model"""
        model = pipeline.train(self.roots.train, DEPTH_ONLY, 4)
        self.assertEqual(pipeline.encode_model(model), pipeline.encode_model(self.model))

    def test_load_features(self) -> None:
        """test load_features"""
        matrix, classes = pipeline.load_features(self.roots.test, DEPTH_ONLY)
        self.assertEqual(classes, tuple(synthetic.PATTERNS))
        self.assertEqual((matrix.rows, matrix.cols), (15, 32))
        self.assertEqual(matrix.labels.tolist(), [0] * 5 + [2] * 5 + [1] * 5)
        self.assertEqual(tuple(view for view, _ in matrix.view_layout), ("depth",))

    def test_predict_file(self) -> None:
        """test predict_file"""
        for label, name in enumerate(synthetic.PATTERNS):
            image = os.path.join(self.roots.train, name, "003.png")
            prediction = pipeline.predict_file(self.model, image, os.path.join(self.roots.train, name, "003.depth.png"))
            self.assertEqual(prediction.label, label)
            self.assertEqual(prediction.name, name)
            self.assertEqual(prediction.decisions.shape, (3,))
            self.assertEqual(int(np.argmax(prediction.decisions)), label)
            with self.assertRaises(FusionError):
                pipeline.predict_file(self.model, image)

    def test_predict_views(self) -> None:
        """test that views at the wrong size are rejected"""
        sample = load_dataset(self.roots.test, 16, 16)[0]
        self.assertEqual(pipeline.predict_views(self.model, sample.views).decisions.shape, (3,))
        sample = load_dataset(self.roots.test, 20, 16)[0]
        with self.assertRaises(ConfigMismatchError):
            pipeline.predict_views(self.model, sample.views)

    def test_depth_mismatch(self) -> None:
        """test supplying a depth map to a model trained without depth"""
        model = pipeline.train(self.roots.train, DEPTH_ONLY._replace(views=("gray",), threshold=0.85))
        image = os.path.join(self.roots.test, "radial", "000.png")
        self.assertIn(pipeline.predict_file(model, image).name, synthetic.PATTERNS)
        with self.assertRaises(ConfigMismatchError) as context:
            pipeline.predict_file(model, image, os.path.join(self.roots.test, "radial", "000.depth.png"))
        self.assertIn("64 instead of 32", str(context.exception))

    def test_evaluate(self) -> None:
        """test evaluate on the held out split"""
        report = pipeline.evaluate(self.model, self.roots.test)
        self.assertEqual(report.classes, tuple(synthetic.PATTERNS))
        self.assertEqual(int(report.confusion.sum()), 15)
        self.assertGreaterEqual(report.mean_class_accuracy, 0.0)
        self.assertLessEqual(report.mean_class_accuracy, 1.0)
        with tempfile.TemporaryDirectory() as root:
            generator = np.random.default_rng(34)
            write_directory(root, {"circle": random_samples(generator, 2), "square": random_samples(generator, 2)})
            with self.assertRaises(DatasetError):
                pipeline.evaluate(self.model, root)

    def test_missing_depth(self) -> None:
        """test training with the depth view on images without depth maps"""
        with tempfile.TemporaryDirectory() as root:
            generator = np.random.default_rng(35)
            write_directory(root, {"a": random_samples(generator, 2, 16, False), "b": random_samples(generator, 2, 16, False)})
            with self.assertRaises(FusionError) as context:
                pipeline.train(root, DEPTH_ONLY._replace(views=("gray", "depth")))
            self.assertEqual(context.exception.view, "depth")
            self.assertIn("000.depth.png", str(context.exception))

    def test_ablation(self) -> None:
        """test ablation and format_ablation"""
        config = DEPTH_ONLY._replace(threshold=0.85)
        results = pipeline.ablation(
            self.roots.train,
            self.roots.test,
            config,
            (("gray", "r"), ("depth",)),
            (0, 1)
        )
        self.assertEqual([result.views for result in results], [("r", "gray"), ("depth",)])
        for result in results:
            self.assertEqual(len(result.accuracies), 2)
            self.assertAlmostEqual(result.mean, float(np.mean(result.accuracies)))
            self.assertAlmostEqual(result.std, float(np.std(result.accuracies)))
        lines = pipeline.format_ablation(results).splitlines()
        self.assertEqual(len(lines), 2)
        self.assertTrue(lines[0].startswith("r,gray "))
        self.assertIn(" +- ", lines[1])
        with self.assertRaises(ValueError):
            pipeline.ablation(self.roots.train, self.roots.test, config, ())

    def test_reload(self) -> None:
        """test that a reloaded model predicts exactly like the original"""
        image = os.path.join(self.roots.test, "horizontal", "001.png")
        depth = os.path.join(self.roots.test, "horizontal", "001.depth.png")
        prediction = pipeline.predict_file(self.model, image, depth)
        np.testing.assert_array_equal(pipeline.predict_file(self.model, image, depth).decisions, prediction.decisions)
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, "model.bin")
            pipeline.save_model(self.model, path)
            model = pipeline.load_model(path)
        self.assertEqual(model, self.model)
        reloaded = pipeline.predict_file(model, image, depth)
        self.assertEqual(reloaded.name, prediction.name)
        np.testing.assert_array_equal(reloaded.decisions, prediction.decisions)
