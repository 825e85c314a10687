# SPDX-License-Identifier: BSD-3-Clause

"""Flat-file output of traces, reports and certificates.

Floats are written with 17 significant digits so they read back exactly, and nothing
time-dependent goes into these files: writing the same object twice gives the same
bytes.
"""

import csv
import json
import logging
from functools import singledispatch
from pathlib import Path

import numpy as np

from hyperstat.errors import ArtifactError
from hyperstat.stationarity import Certificate
from hyperstat.structure import PropertyReport
from hyperstat.zeroth_order import RunTrace


logger = logging.getLogger(__name__)


def fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_text(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    except OSError as err:
        raise ArtifactError(path, err) from err
    logger.debug(f"Wrote {path}")
    return path


def write_json(path: Path, obj: dict) -> Path:
    return write_text(path, json.dumps(obj, indent=2) + "\n")


def write_rows(path: Path, header: list[str], rows, delimiter: str = ",") -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, delimiter=delimiter, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as err:
        raise ArtifactError(path, err) from err
    logger.debug(f"Wrote {path}")
    return path


def trace_filename(trace: RunTrace) -> str:
    return f"trace_{trace.problem}_{trace.config.seed}_{trace.config.T}.csv"


@singledispatch
def emit_artifacts(obj, directory) -> list[Path]:
    """Write `obj` into `directory`, overwriting earlier output; returns the paths."""
    raise TypeError(f"Don't know how to write a {type(obj).__name__}")


@emit_artifacts.register
def _(trace: RunTrace, directory) -> list[Path]:
    cfg = trace.config
    rows = []
    for t, x in enumerate(trace.iterates):
        phi = "" if trace.values is None else fmt(trace.values[t])
        rows.append([t, ";".join(fmt(c) for c in x), phi, fmt(cfg.eta), fmt(cfg.eps), fmt(cfg.w)])
    path = Path(directory) / trace_filename(trace)
    return [write_rows(path, ["t", "x", "phi_tilde", "eta", "eps", "w"], rows)]


@emit_artifacts.register
def _(report: PropertyReport, directory) -> list[Path]:
    return [write_json(Path(directory) / f"check_{report.property}.json", report.to_dict())]


@emit_artifacts.register
def _(cert: Certificate, directory) -> list[Path]:
    return [write_json(Path(directory) / f"certificate_{cert.kind.value}.json", cert.to_dict())]


def write_measure_series(path: Path, steps, measures) -> Path:
    """(t, measure) pairs for plotting a single run."""
    rows = [[int(t), fmt(v)] for t, v in zip(steps, np.asarray(measures))]
    return write_rows(path, ["t", "measure"], rows, delimiter="\t")
