# SPDX-License-Identifier: BSD-3-Clause

"""Inexact zeroth-order minimization of bilevel hyper-objectives, with checks of the
structure the method relies on."""

from hyperstat.configuration import DATA_DIR, HYPERSTAT_VERSION, config, save_config
from hyperstat.errors import HyperstatError
from hyperstat.inner import HyperOracle, inner_argopt, inner_value
from hyperstat.problems import Mode, ProblemSpec, list_problems, registry_get
from hyperstat.rng import make_rng

__version__ = HYPERSTAT_VERSION

__all__ = [
    "DATA_DIR",
    "HyperOracle",
    "HyperstatError",
    "Mode",
    "ProblemSpec",
    "config",
    "inner_argopt",
    "inner_value",
    "list_problems",
    "make_rng",
    "registry_get",
    "save_config",
]
