"""Smoke tests for the python bindings."""

import json
import math
import os
import subprocess
import tempfile

import _rpcsde as rpc


def test_example_registry():
    names = rpc.example_names()
    assert "ex41" in names and "lorenz96" in names
    model = rpc.build_example("ex41")
    assert model.dim == 2
    assert model.noise_dim == 2
    assert abs(model.default_h - 0.012) < 1e-15


def test_mrpc_single_step_ou():
    model = rpc.model_from_json(json.dumps({
        "name": "custom",
        "dimension": 1,
        "noise_dimension": 1,
        "drift": [[{"exponents": [1], "coeff": -1.0}]],
        "diffusion": [[[{"exponents": [0], "coeff": 1.0}]]],
        "initial": [{"type": "gaussian", "mean": 0.0, "variance": 1.0}],
    }))
    h = 0.01
    out = rpc.run_mrpc(model, L=2, S=2, h=h, T=h)
    assert out["status"] == 0
    cols = out["columns"]
    m2 = out["moments"][-1][cols.index("m_2")]
    assert abs(m2 - (1.0 - h)) < 1e-13


def test_prpc_matches_mrpc_on_one_step():
    model = rpc.build_example("ex41")
    a = rpc.run_mrpc(model, L=2, S=2, h=0.012, T=0.012)
    b = rpc.run_prpc(model, L=2, S=2, h=0.012, T=0.012)
    cols = a["columns"]
    for name in ("m_1_0", "m_0_1", "m_2_0", "m_0_2", "m_1_1"):
        i = cols.index(name)
        assert abs(a["moments"][-1][i] - b["moments"][-1][i]) < 1e-10


def test_mc_matches_stationary_variance():
    model = rpc.model_from_json(json.dumps({
        "name": "custom",
        "dimension": 1,
        "noise_dimension": 1,
        "drift": [[{"exponents": [1], "coeff": -1.0}]],
        "diffusion": [[[{"exponents": [0], "coeff": math.sqrt(2.0)}]]],
        "initial": [{"type": "gaussian", "mean": 0.0, "variance": 1.0}],
    }))
    out = rpc.run_mc(model, T=1.0, paths=20000, seed=3, antithetic=True,
                     h_ref=0.01, record_every=100, moment_order=2)
    m2 = out["moments"][-1][out["columns"].index("m_2")]
    se = out["se"][-1][out["columns"].index("m_2")]
    assert abs(m2 - 1.0) < 4.0 * se + 0.03


def test_metric_and_bound():
    # single differing order-2 entry: 0.1 / 2! = 0.05
    a = [1.0, 0.0, 1.0]
    b = [1.0, 0.0, 1.1]
    assert abs(rpc.moment_metric(a, b, dimension=1, order=2) - 0.05) < 1e-14
    assert abs(rpc.w1_moment_bound(a, a, dimension=1, order=2,
                                   box_half_width=1.0, q=2) - 18.0) < 1e-12


def test_run_experiment_roundtrip():
    with tempfile.TemporaryDirectory() as tmp:
        cfg = {
            "method": "mrpc",
            "model": {"name": "ex41"},
            "mrpc": {"L": 2, "S": 2, "h": 0.012, "T": 0.12},
            "output": os.path.join(tmp, "out"),
        }
        path = os.path.join(tmp, "run.json")
        with open(path, "w") as f:
            json.dump(cfg, f)
        assert rpc.run_experiment(path) == 0
        with open(os.path.join(tmp, "out", "moments.csv")) as f:
            header = f.readline().strip().split(",")
        assert header[0] == "t" and "m_2_0" in header


def test_cli_selftest():
    cli = os.environ.get("RPCSDE_CLI")
    if not cli:
        assert rpc.selftest() == 0
        return
    proc = subprocess.run([cli, "selftest"], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stdout + proc.stderr
