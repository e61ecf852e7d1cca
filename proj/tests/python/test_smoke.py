import json
import math
from pathlib import Path

import jsonschema
import numpy as np
import pytest

import mafl

ROOT = Path(__file__).resolve().parents[2]
SCHEMA = json.loads((ROOT / "schema" / "report.schema.json").read_text())


def test_zero_scenario_report_matches_schema(tmp_path):
    report = mafl.run_scenario(ROOT / "scenarios" / "zero.json", tmp_path)
    jsonschema.validate(report, SCHEMA)
    assert report["pass"]
    assert report["scenario_hash"] == mafl.scenario_hash(ROOT / "scenarios" / "zero.json")
    on_disk = json.loads((tmp_path / "report.json").read_text())
    assert on_disk == report


def test_constant_report_is_deterministic(tmp_path):
    a = mafl.run_scenario(ROOT / "scenarios" / "constant.json", tmp_path / "a")
    b = mafl.run_scenario(ROOT / "scenarios" / "constant.json", tmp_path / "b")
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()
    assert a == b


def test_hessian_of_cosine():
    N, a = 32, 0.01
    x = np.arange(N) / N
    X, _ = np.meshgrid(x, x, indexing="ij")
    ev = mafl.hessian_eigenvalues(1, a * np.cos(2 * np.pi * X))
    expected = 1.0 - a * np.pi**2 * np.cos(2 * np.pi * X).ravel()
    assert np.max(np.abs(ev[:, 0] - expected)) < 1e-12


def test_entropy_of_constant():
    assert mafl.entropy_p(1, np.ones((16, 16)), 2.0) == pytest.approx(math.e, rel=1e-14)


def test_degiorgi_and_abp():
    s = np.linspace(0.0, 1.5, 301)
    phi = np.maximum(0.0, 1.0 - s) ** 2
    r = mafl.degiorgi(s, phi, b0=10.0, delta0=0.5)
    assert r["pass"] and r["violation"] is None
    assert r["S_infinity"] == pytest.approx(1.0) and r["S_infinity"] <= r["bound"]
    assert not mafl.degiorgi(s, phi, b0=1.0, delta0=1.0)["pass"]
    res = mafl.abp({"example": "quadratic"})
    assert res["pass"]


def test_schema_rejection():
    with pytest.raises(mafl.MaflError):
        mafl.scenario_hash({"schema_version": 1, "name": "x", "F": {"kind": "zero"}, "colour": 1})
