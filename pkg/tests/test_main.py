#!/usr/bin/python3

"""Unit tests for the MVDR cli"""

import io
import os.path
import sys
import csv
import json
import tempfile
import unittest
import unittest.mock
from argparse import ArgumentTypeError
import subprocess
import numpy as np
from mvdr import __version__, main, synthetic
from tests.fixtures import random_samples, write_directory


class TestArguments(unittest.TestCase):
    """test argument types"""

    def test_view_list(self) -> None:
        """test view_list"""
        self.assertEqual(main.view_list("depth, r,gray"), ("r", "gray", "depth"))
        with self.assertRaises(ArgumentTypeError):
            main.view_list("r,infrared")
        with self.assertRaises(ArgumentTypeError):
            main.view_list(",")

    def test_seed_list(self) -> None:
        """test seed_list"""
        self.assertEqual(main.seed_list("3,1,2"), (3, 1, 2))
        with self.assertRaises(ArgumentTypeError):
            main.seed_list("1,,2")

    def test_positive_int(self) -> None:
        """test positive_int"""
        self.assertEqual(main.positive_int("4"), 4)
        for value in ("0", "-1", "four"):
            with self.subTest(value=value), self.assertRaises(ArgumentTypeError):
                main.positive_int(value)

    def test_pipeline_config(self) -> None:
        """test flags overriding the configuration"""
        args = main.argparser.parse_args(
            ["train", "--data", "d", "--model-out", "m", "--views", "gray", "--resolution", "20", "--svm-c", "5"]
        )
        config = main.pipeline_config({"network": {"seed": 4}}, args)
        self.assertEqual((config.views, config.width, config.height, config.seed), (("gray",), 20, 20, 4))
        self.assertEqual(config.svm.c, 5.0)
        args = main.argparser.parse_args(["train", "--data", "d", "--model-out", "m", "--svm-c", "0"])
        with self.assertRaises(ValueError):
            main.pipeline_config({}, args)

    def test_threads(self) -> None:
        """test the worker count"""
        args = main.argparser.parse_args(["eval", "--model", "m", "--data", "d"])
        self.assertIsNone(main.threads({}, args))
        self.assertEqual(main.threads({"runtime": {"threads": 3}}, args), 3)
        with self.assertRaises(ValueError):
            main.threads({"runtime": {"threads": 0}}, args)
        args = main.argparser.parse_args(["--threads", "2", "eval", "--model", "m", "--data", "d"])
        self.assertEqual(main.threads({"runtime": {"threads": 3}}, args), 2)
        args = main.argparser.parse_args(["eval", "--model", "m", "--data", "d", "--threads", "4"])
        self.assertEqual(main.threads({"runtime": {"threads": 3}}, args), 4)
        args = main.argparser.parse_args(["--threads", "2", "train", "--data", "d", "--model-out", "m", "--threads", "5"])
        self.assertEqual(main.threads({}, args), 5)
        args = main.argparser.parse_args(["--threads", "2", "generate", "--out", "o"])
        self.assertEqual(main.threads({}, args), 2)


class TestCli(unittest.TestCase):
    """test the subcommands in process"""

    @classmethod
    def setUpClass(cls) -> None:
        cls.directory = tempfile.TemporaryDirectory()
        cls.roots = synthetic.generate(cls.directory.name, seed=7, train=4, test=2, size=16)
        cls.model = os.path.join(cls.directory.name, "model.bin")
        code, output, _ = cls.run_main(["train", "--data", cls.roots.train, "--model-out", cls.model, "--resolution", "16"])
        assert code == 0, output

    @classmethod
    def tearDownClass(cls) -> None:
        cls.directory.cleanup()

    @staticmethod
    def run_main(argv: list) -> tuple:
        """exit code, stdout and stderr of main"""
        stdout = io.StringIO()
        with unittest.mock.patch("sys.stderr", new_callable=io.StringIO) as stderr:
            code = main.main(argv, stdout)
        return code, stdout.getvalue(), stderr.getvalue()

    def test_train(self) -> None:
        """test the train subcommand"""
        path = os.path.join(self.directory.name, "other.bin")
        code, output, _ = self.run_main(
            ["--threads", "2", "train", "--data", self.roots.train, "--model-out", path, "--resolution", "16", "--pca-threshold", "0.5"]
        )
        self.assertEqual(code, 0)
        self.assertTrue(output.startswith("trained 3 classes, n=128, w="))
        self.assertTrue(os.path.isfile(path))
        code, _, _ = self.run_main(["train", "--data", self.roots.train, "--model-out", path, "--resolution", "16"])
        self.assertEqual(code, 0)
        with open(path, "rb") as first, open(self.model, "rb") as second:
            self.assertEqual(first.read(), second.read())

    def test_eval(self) -> None:
        """test the eval subcommand"""
        path = os.path.join(self.directory.name, "report.json")
        code, output, _ = self.run_main(
            ["eval", "--model", self.model, "--data", self.roots.test, "--report-json", path, "--threads", "1"]
        )
        self.assertEqual(code, 0)
        self.assertTrue(output.startswith("mean_class_accuracy: "))
        with open(path, "r", encoding="utf-8") as fd:
            report = json.load(fd)
        self.assertEqual(report["classes"], list(synthetic.PATTERNS))
        self.assertEqual(len(report["per_class_accuracy"]), 3)
        self.assertEqual(np.sum(report["confusion"]), 6)
        self.assertAlmostEqual(report["mean_class_accuracy"], np.mean(report["per_class_accuracy"]))

    def test_predict(self) -> None:
        """test the predict subcommand"""
        image = os.path.join(self.roots.test, "vertical", "001.png")
        code, output, _ = self.run_main(["predict", "--model", self.model, "--image", image])
        self.assertEqual(code, 0)
        lines = output.splitlines()
        self.assertIn(lines[0], synthetic.PATTERNS)
        self.assertEqual([line.split("\t")[0] for line in lines[1:]], list(synthetic.PATTERNS))
        values = [float(line.split("\t")[1]) for line in lines[1:]]
        self.assertEqual(lines[0], list(synthetic.PATTERNS)[int(np.argmax(values))])
        code, _, error = self.run_main(
            ["predict", "--model", self.model, "--image", image, "--depth", os.path.join(self.roots.test, "vertical", "001.depth.png")]
        )
        self.assertEqual(code, main.EXIT_DATA)
        self.assertTrue(error.startswith("Error: "))

    def test_dump_features(self) -> None:
        """test the dump-features subcommand"""
        path = os.path.join(self.directory.name, "features.csv")
        code, _, _ = self.run_main(["dump-features", "--data", self.roots.test, "--out", path, "--views", "depth", "--resolution", "16"])
        self.assertEqual(code, 0)
        with open(path, "r", newline="") as fd:
            rows = list(csv.reader(fd))
        self.assertEqual(rows[0][:3], ["label", "f0", "f1"])
        self.assertEqual(len(rows), 7)
        self.assertEqual(len(rows[1]), 33)
        self.assertEqual([row[0] for row in rows[1:]], ["0", "0", "2", "2", "1", "1"])

    def test_generate(self) -> None:
        """test the generate subcommand"""
        root = os.path.join(self.directory.name, "generated")
        code, output, _ = self.run_main(["generate", "--out", root, "--train", "1", "--test", "1", "--size", "8"])
        self.assertEqual(code, 0)
        self.assertEqual(output.splitlines(), [os.path.join(root, "train"), os.path.join(root, "test")])
        self.assertTrue(os.path.isfile(os.path.join(root, "test", "radial", "000.depth.png")))

    def test_ablation(self) -> None:
        """test the ablation subcommand"""
        code, output, _ = self.run_main(
            ["ablation", "--train", self.roots.train, "--test", self.roots.test, "--views", "gray", "--resolution", "16", "--seeds", "0,1"]
        )
        self.assertEqual(code, 0)
        lines = output.splitlines()
        self.assertEqual(len(lines), 2)
        self.assertTrue(lines[0].startswith("gray "))
        self.assertTrue(lines[1].startswith("gray,depth "))

    def test_usage_errors(self) -> None:
        """test exit code 1 on invalid invocations"""
        for argv in (
            [],
            ["predict", "--image", "image.png"],
            ["train", "--data", self.roots.train],
            ["train", "--data", self.roots.train, "--model-out", "m", "--views", "infrared"],
            ["--threads", "0", "eval", "--model", self.model, "--data", self.roots.test],
            ["eval", "--model", self.model, "--data", self.roots.test, "--threads", "0"],
            ["train", "--data", self.roots.train, "--model-out", "m", "--pca-threshold", "1.5"]
        ):
            with self.subTest(argv=argv):
                self.assertEqual(self.run_main(argv)[0], main.EXIT_USAGE)

    def test_data_errors(self) -> None:
        """test exit code 2 on unusable input"""
        root = os.path.join(self.directory.name, "flat")
        generator = np.random.default_rng(50)
        write_directory(root, {"a": random_samples(generator, 2, 16, False), "b": random_samples(generator, 2, 16, False)})
        model = os.path.join(self.directory.name, "depth.bin")
        code, _, error = self.run_main(["train", "--data", root, "--model-out", model, "--views", "gray,depth", "--resolution", "16"])
        self.assertEqual(code, main.EXIT_DATA)
        self.assertIn("000.depth.png", error)
        self.assertFalse(os.path.exists(model))
        code, _, _ = self.run_main(["eval", "--model", self.model, "--data", root])
        self.assertEqual(code, main.EXIT_DATA)
        code, _, _ = self.run_main(["eval", "--model", os.path.join(root, "missing.bin"), "--data", root])
        self.assertEqual(code, main.EXIT_DATA)
        code, _, _ = self.run_main(["--config", os.path.join(root, "missing.toml"), "eval", "--model", self.model, "--data", root])
        self.assertEqual(code, main.EXIT_DATA)

    def test_version(self) -> None:
        """test the version flag in a separate interpreter"""
        output = subprocess.run(    # nosec -> inmutable input
            [sys.executable, "-m", "mvdr", "--version"],
            check=True,
            stdout=subprocess.PIPE
        ).stdout
        self.assertIn(__version__.encode("ascii"), output)
