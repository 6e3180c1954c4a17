#!/usr/bin/python3

"""Module containing the command line interface"""
# The main module is part of MVDR
# Copyright (C) 2026  MVDR contributors

# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, version 3.

# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.
# SPDX-License-Identifier: GPL-3.0-only

import sys
import json
import logging
from argparse import SUPPRESS, ArgumentParser, ArgumentTypeError, Namespace
from typing import Any, List, Mapping, NoReturn, Optional, TextIO, Tuple
from . import __version__
from . import pipeline, synthetic
from .config import config_or_defaults, section
from .errors import DataError, NumericalError
from .fusion import order_views, write_csv

__all__ = (
    "EXIT_USAGE",
    "EXIT_DATA",
    "EXIT_NUMERICAL",
    "main",
    "argparser"
)

logger = logging.getLogger(__name__)

EXIT_USAGE = 1

EXIT_DATA = 2

EXIT_NUMERICAL = 3


class UsageArgumentParser(ArgumentParser):
    """ArgumentParser which reports usage errors with exit code 1"""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def view_list(value: str) -> Tuple[str, ...]:
    """parse a comma separated list of views"""
    try:
        return order_views([view.strip() for view in value.split(",") if view.strip()])
    except ValueError as e:
        raise ArgumentTypeError(str(e)) from e


def seed_list(value: str) -> Tuple[int, ...]:
    """parse a comma separated list of seeds"""
    try:
        seeds = tuple(int(seed) for seed in value.split(","))
    except ValueError as e:
        raise ArgumentTypeError(f"invalid seed list '{value}'") from e
    if not seeds:
        raise ArgumentTypeError("at least one seed is required")
    return seeds


def positive_int(value: str) -> int:
    try:
        number = int(value)
    except ValueError as e:
        raise ArgumentTypeError(f"invalid int value '{value}'") from e
    if number < 1:
        raise ArgumentTypeError(f"value expected to be positive, got {number}")
    return number


def add_threads_flag(parser: ArgumentParser, default: Any = SUPPRESS) -> None:
    """--threads, the subcommand parsers only set it when it is given"""
    parser.add_argument(
        "--threads",
        type=positive_int,
        default=default,
        help="maximum number of workers, defaults to the machine parallelism"
    )


def pipeline_config(config: Mapping[str, Any], args: Namespace) -> pipeline.PipelineConfig:
    """apply the flags of a subcommand on top of the configuration data"""
    result = pipeline.PipelineConfig.from_config(config)
    if getattr(args, "views", None) is not None:
        result = result._replace(views=args.views)
    if getattr(args, "resolution", None) is not None:
        result = result._replace(width=args.resolution, height=args.resolution)
    if getattr(args, "seed", None) is not None:
        result = result._replace(seed=args.seed)
    if getattr(args, "pca_threshold", None) is not None:
        result = result._replace(threshold=args.pca_threshold)
    if getattr(args, "svm_c", None) is not None:
        if not args.svm_c > 0:
            raise ValueError(f"flag '--svm-c' expected to be positive, got {args.svm_c}")
        result = result._replace(svm=result.svm._replace(c=args.svm_c))
    return result.check()


def threads(config: Mapping[str, Any], args: Namespace) -> Optional[int]:
    """worker count from the flag or the runtime table, None means machine parallelism"""
    if args.threads is not None:
        return int(args.threads)
    value = section(config, "runtime").get("threads")
    if value is not None and (isinstance(value, bool) or not isinstance(value, int) or value < 1):
        raise ValueError("value of key 'threads' expected to be a positive int")
    return value


def main_train(config: Mapping[str, Any], args: Namespace, stdout: TextIO = sys.stdout) -> int:
    """implementation of the train subcommand"""
    model = pipeline.train(args.data, pipeline_config(config, args), threads(config, args))
    pipeline.save_model(model, args.model_out)
    print(f"trained {len(model.classes)} classes, n={model.pca.n}, w={model.pca.w}", file=stdout)
    return 0


def main_predict(config: Mapping[str, Any], args: Namespace, stdout: TextIO = sys.stdout) -> int:
    """implementation of the predict subcommand"""
    model = pipeline.load_model(args.model)
    prediction = pipeline.predict_file(model, args.image, args.depth)
    print(prediction.name, file=stdout)
    for name, value in zip(model.classes, prediction.decisions.tolist()):
        print(f"{name}\t{value!r}", file=stdout)
    return 0


def main_eval(config: Mapping[str, Any], args: Namespace, stdout: TextIO = sys.stdout) -> int:
    """implementation of the eval subcommand"""
    model = pipeline.load_model(args.model)
    report = pipeline.evaluate(model, args.data, threads(config, args))
    if args.report_json is not None:
        with open(args.report_json, "w", encoding="utf-8") as fd:
            json.dump(report.to_json(), fd, indent=2)
            fd.write("\n")
    stdout.write(report.format())
    return 0


def main_dump_features(config: Mapping[str, Any], args: Namespace, stdout: TextIO = sys.stdout) -> int:
    """implementation of the dump-features subcommand"""
    matrix, _ = pipeline.load_features(args.data, pipeline_config(config, args), threads(config, args))
    with open(args.out, "w", encoding="utf-8", newline="") as fd:
        write_csv(matrix, fd)
    print(f"wrote {matrix.rows}x{matrix.cols} features to '{args.out}'", file=stdout)
    return 0


def main_generate(config: Mapping[str, Any], args: Namespace, stdout: TextIO = sys.stdout) -> int:
    """implementation of the generate subcommand"""
    roots = synthetic.generate(args.out, args.seed, args.train, args.test, args.size)
    print(roots.train, file=stdout)
    print(roots.test, file=stdout)
    return 0


def main_ablation(config: Mapping[str, Any], args: Namespace, stdout: TextIO = sys.stdout) -> int:
    """implementation of the ablation subcommand"""
    base = pipeline_config(config, args)
    without_depth = tuple(view for view in base.views if view != "depth")
    view_sets = [order_views(without_depth + ("depth",))]
    if without_depth:
        view_sets.insert(0, without_depth)
    seeds = args.seeds if args.seeds is not None else (base.seed,)
    results = pipeline.ablation(args.train, args.test, base, view_sets, seeds, threads(config, args))
    stdout.write(pipeline.format_ablation(results))
    return 0


argparser = UsageArgumentParser(
    description="Image classification by PCA of multi-view convolutional features"
)
argparser.add_argument(
    "-V",
    "--version",
    help="display version number",
    action="version",
    version=f"%(prog)s {__version__}"
)
argparser.add_argument(
    "-c",
    "--config",
    type=str,
    default=None,
    help="path to custom config file"
)
argparser.add_argument(
    "--log-level",
    choices=("DEBUG", "INFO", "WARNING", "ERROR"),
    default="WARNING",
    help="verbosity of the diagnostics on stderr, defaults to WARNING"
)
add_threads_flag(argparser, None)


def add_model_flags(parser: ArgumentParser) -> None:
    """flags overriding the [input] and [network] configuration"""
    parser.add_argument(
        "--views",
        type=view_list,
        default=None,
        help="comma separated views out of r,g,b,gray,depth, defaults to r,g,b,gray"
    )
    parser.add_argument(
        "--resolution",
        type=positive_int,
        default=None,
        help="working resolution N (NxN), defaults to 32"
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help="seed of the network weights, defaults to 0"
    )


# not setting dest triggers an error when the subcommand is missing from the cli
subcommands = argparser.add_subparsers(required=True, dest="subcommand", parser_class=UsageArgumentParser)
train_parser = subcommands.add_parser(
    "train",
    description="train a model on a dataset",
    help="train a model on a dataset"
)
train_parser.add_argument("--data", type=str, required=True, help="dataset directory or zip archive")
train_parser.add_argument("--model-out", type=str, required=True, help="path of the model file to write")
add_model_flags(train_parser)
train_parser.add_argument(
    "--pca-threshold",
    type=float,
    default=None,
    help="retained eigenvalue fraction in (0, 1], defaults to 0.85"
)
train_parser.add_argument("--svm-c", type=float, default=None, help="soft margin penalty, defaults to 1.0")
add_threads_flag(train_parser)
train_parser.set_defaults(function=main_train)

predict_parser = subcommands.add_parser(
    "predict",
    description="classify one image",
    help="classify one image"
)
predict_parser.add_argument("--model", type=str, required=True, help="model file")
predict_parser.add_argument("--image", type=str, required=True, help="PNG or JPEG image")
predict_parser.add_argument("--depth", type=str, default=None, help="depth map of the image")
add_threads_flag(predict_parser)
predict_parser.set_defaults(function=main_predict)

eval_parser = subcommands.add_parser(
    "eval",
    description="evaluate a model on a dataset",
    help="evaluate a model on a dataset"
)
eval_parser.add_argument("--model", type=str, required=True, help="model file")
eval_parser.add_argument("--data", type=str, required=True, help="dataset directory or zip archive")
eval_parser.add_argument("--report-json", type=str, default=None, help="path to write the report as JSON to")
add_threads_flag(eval_parser)
eval_parser.set_defaults(function=main_eval)

dump_parser = subcommands.add_parser(
    "dump-features",
    description="write the spliced feature matrix of a dataset as CSV",
    help="write the spliced feature matrix of a dataset as CSV"
)
dump_parser.add_argument("--data", type=str, required=True, help="dataset directory or zip archive")
dump_parser.add_argument("--out", type=str, required=True, help="path of the CSV file")
add_model_flags(dump_parser)
add_threads_flag(dump_parser)
dump_parser.set_defaults(function=main_dump_features)

generate_parser = subcommands.add_parser(
    "generate",
    description="write a synthetic RGB-D dataset whose classes differ only in depth",
    help="write a synthetic RGB-D dataset"
)
generate_parser.add_argument("--out", type=str, required=True, help="directory receiving train/ and test/")
generate_parser.add_argument("--seed", type=int, default=0, help="random seed, defaults to 0")
generate_parser.add_argument("--train", type=positive_int, default=60, help="training images per class, defaults to 60")
generate_parser.add_argument("--test", type=positive_int, default=40, help="test images per class, defaults to 40")
generate_parser.add_argument("--size", type=positive_int, default=32, help="image size, defaults to 32")
add_threads_flag(generate_parser)
generate_parser.set_defaults(function=main_generate)

ablation_parser = subcommands.add_parser(
    "ablation",
    description="compare the configured views with and without the depth view",
    help="compare the configured views with and without the depth view"
)
ablation_parser.add_argument("--train", type=str, required=True, help="training dataset")
ablation_parser.add_argument("--test", type=str, required=True, help="test dataset")
ablation_parser.add_argument(
    "--seeds",
    type=seed_list,
    default=None,
    help="comma separated network seeds, defaults to the configured seed"
)
add_model_flags(ablation_parser)
add_threads_flag(ablation_parser)
ablation_parser.set_defaults(function=main_ablation)


def main(argv: Optional[List[str]] = None, stdout: TextIO = sys.stdout) -> int:
    """cli entry point"""
    try:
        args = argparser.parse_args(argv)   # behaves differently when argv == sys.argv
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    logging.basicConfig(
        stream=sys.stderr,
        level=args.log_level,
        format="%(levelname)s:%(name)s: %(message)s"
    )
    try:
        config = config_or_defaults(args.config)
        return args.function(config, args, stdout)
    except NumericalError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DataError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_DATA
    except OSError as e:
        print(f"Error: {e.filename}: {e.strerror}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as e:     # invalid configuration
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE
