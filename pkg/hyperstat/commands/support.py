# SPDX-License-Identifier: BSD-3-Clause

"""Shared helpers for the command modules."""

import json
import sys
from pathlib import Path

import numpy as np

from hyperstat import configuration
from hyperstat.problems import ProblemSpec


EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2
EXIT_PROPERTY = 3


# Make sure stdout stream is always Unicode; reports contain φ, ρ and friends
if hasattr(sys.stdout, "reconfigure"):
    sys.stdout.reconfigure(encoding="utf-8")


# Piggyback the library config and add some extra command-specific things
command_defaults = {
    "check_samples": 10_000,
    "certify_samples": 10_000,
    "goldstein_samples": 200,
    "clarke_eps": 0.01,
    "seed": 0,
}
for k, v in command_defaults.items():
    if k not in configuration.config:
        configuration.config[k] = v


def parse_point(text: str) -> np.ndarray:
    """`1.5,-2` -> array([1.5, -2.])"""
    try:
        return np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError:
        raise ValueError(f"Could not read a point from {text!r}") from None


def setting(value, key: str):
    """An explicit command-line value, or the configured default when none was given."""
    return value if value is not None else configuration.config[key]


def output_dir(args, p: ProblemSpec) -> Path:
    if getattr(args, "output_dir", None):
        return Path(args.output_dir)
    return configuration.runs_dir() / p.name


def print_json(obj: dict | list):
    print(json.dumps(obj, indent=2, ensure_ascii=False))
