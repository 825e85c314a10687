import json

import numpy as np
import pytest

from hyperstat.artifacts import emit_artifacts, fmt, write_json, write_measure_series
from hyperstat.errors import ArtifactError
from hyperstat.stationarity import Certificate, CertificateKind
from hyperstat.structure import PropertyReport, Verdict
from hyperstat.zeroth_order import IzomConfig, izom_run


def test_floats_are_written_exactly():
    assert float(fmt(0.1)) == 0.1
    assert fmt(1.0) == "1"
    assert float(fmt(np.float64(1 / 3))) == 1 / 3


def test_trace_rows(p5, tmp_path):
    cfg = IzomConfig(T=3, eta=0.1, eps=0.1, w=1e-3, seed=9, x0=[1.0, -1.0], mode="pessimistic")
    trace = izom_run(p5, cfg)
    (path,) = emit_artifacts(trace, tmp_path)
    assert path.name == "trace_P5-plane-coercive_9_3.csv"
    lines = path.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 5
    t, x, phi, eta, eps, w = lines[1].split(",")
    assert t == "0"
    assert x == "1;-1"
    assert phi == ""
    assert float(eta) == 0.1


def test_report_and_certificate_files(tmp_path):
    report = PropertyReport("lipschitz", 10, 0.5, 1.5, {"x1": np.array([0.0])}, Verdict.SATISFIED)
    (path,) = emit_artifacts(report, tmp_path)
    assert json.loads(path.read_text(encoding="utf-8"))["worst_case"] == {"x1": [0.0]}

    cert = Certificate(CertificateKind.GOLDSTEIN, 0.25, 0.1, np.array([1.0]))
    (path,) = emit_artifacts(cert, tmp_path)
    assert path.name == "certificate_Goldstein.json"


def test_unsupported_object():
    with pytest.raises(TypeError):
        emit_artifacts(object(), ".")


def test_unwritable_location(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("", encoding="utf-8")
    with pytest.raises(ArtifactError) as info:
        write_json(blocker / "report.json", {})
    assert info.value.path == blocker / "report.json"


def test_measure_series(tmp_path):
    path = write_measure_series(tmp_path / "m.tsv", [0, 5], [0.25, 0.125])
    assert path.read_text(encoding="utf-8") == "t\tmeasure\n0\t0.25\n5\t0.125\n"
