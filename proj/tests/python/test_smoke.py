import json
import math
import os

import numpy as np
import pytest

import flagcd


def test_szego_values():
    k = flagcd.make_generalized_szego(1.0)
    assert k.jet(0.5, 0.5) == pytest.approx(4 / 3)
    assert flagcd.curvature(k, 0.5) == pytest.approx(-16 / 9, rel=1e-12)
    assert flagcd.make_generalized_szego(2.0).coefficients[:3] == pytest.approx([1, 2, 3])


def test_flag_kernel_and_sff():
    k0 = flagcd.make_generalized_szego(2.0)
    k1 = flagcd.make_generalized_szego(4.0)
    fk = flagcd.build_flag_kernel(k0, k1)
    assert np.allclose(fk(0, 0), [[1, 0], [0, 3]])
    assert flagcd.second_fundamental_form_coeff(k0, k1, 0) == pytest.approx(-2 / math.sqrt(3), abs=1e-10)
    assert np.allclose(flagcd.jet_action_matrix([0, 1], 0, 2), [[0, 0], [2, 0]])


def test_equivalence_verdicts():
    a = [flagcd.make_generalized_szego(2.0), flagcd.make_generalized_szego(4.0)]
    b = [flagcd.make_generalized_szego(2.0), flagcd.make_generalized_szego(4.0, 1.5)]
    assert flagcd.equivalent_fbn(a, a)
    v = flagcd.equivalent_fbn(a, b)
    assert not v.equivalent
    assert v.max_ratio_gap[0] == pytest.approx(0.5)


def test_matrix_models():
    ks = [flagcd.make_generalized_szego(2.0 + 2 * i) for i in range(3)]
    m = flagcd.kernel_chain_model(ks, 24)
    assert m.shape == "fbn_tridiagonal"
    assert m.matrix().shape == (72, 72)
    assert flagcd.eigenframe_dimension(m, 0.2) == 3
    assert flagcd.intertwining_residual(m) < 1e-12
    s = np.diag(np.ones(4), 1)
    assert flagcd.commutant_dimension([s, s.T]) == 1
    assert flagcd.commutant_dimension([s]) == 5


def test_errors_map_to_exceptions():
    with pytest.raises(flagcd.DomainError):
        flagcd.make_generalized_szego(-1.0)
    with pytest.raises(flagcd.ConfigError, match="mu must be positive"):
        flagcd.run_job('{"models": {"A": {"family": "generalized_szego", "lambda": 2, "mu": -1}}}')


def test_run_job(tmp_path):
    cfg = {
        "models": {"A": {"family": "generalized_szego", "lambda": 2, "mu": 1}},
        "tasks": [{"type": "invariants", "model": "A", "name": "inv"}],
        "output": {"format": "csv"},
    }
    report = flagcd.run_job(json.dumps(cfg))
    assert report["tasks"][0]["data"]["origin"]["curvature_K0"] == pytest.approx(-2.0)
    files = flagcd.run_job_to(json.dumps(cfg), tmp_path)
    assert (tmp_path / "report.json").exists()
    assert (tmp_path / "inv.curvature_K0.csv").read_text().startswith("re,im,value\n")
    assert len(files) > 1


def test_example_config_runs():
    path = os.environ.get("FLAGCD_EXAMPLE_CONFIG")
    if not path:
        pytest.skip("example config path not provided")
    with open(path) as fh:
        report = flagcd.run_job(fh.read())
    assert all(t["ok"] for t in report["tasks"])
