import math

import numpy as np
import pytest

import plap


def test_eigenvalue_interval():
    mesh = plap.build_interval(0.0, 1.0, 256)
    e = plap.principal_eigenpair(mesh, 1.0, 2.0)
    assert abs(e["lam"] - math.pi**2) < 1e-2
    assert e["phi"].shape == (mesh.num_vertices,)
    assert e["phi"].min() >= 0.0
    assert abs(e["phi"].max() - 1.0) < 1e-12


def test_solve_below_and_above_lam1():
    mesh = plap.build_interval(0.0, 1.0, 128)
    below = plap.solve(mesh, p=2.0, q=1.5, lam=5.0)
    assert below and all(o["converged"] and o["sign_class"] == "positive" for o in below)
    above = plap.solve(mesh, p=2.0, q=1.5, lam=15.0)
    assert all(o["sign_class"] == "negative" for o in above if o["converged"])
    x = mesh.x
    lam = 15.0
    exact = (np.cos(math.sqrt(lam) * (x - 0.5)) / math.cos(math.sqrt(lam) / 2) - 1) / lam
    assert np.max(np.abs(above[0]["u"] - exact)) < 1e-2 * np.max(np.abs(exact))


def test_critical_values_and_picone():
    mesh = plap.build_interval(0.0, 1.0, 64)
    r = plap.eta_star(mesh, lam=0.5 * math.pi**2, starts=4)
    assert r["lower_bound"] is not None
    assert r["lower_bound"] <= r["value"] < math.inf
    assert plap.picone_polynomial_check(2.0, 1.5)["holds"]
    bad = plap.picone_polynomial_check(3.0, 1.5)
    assert not bad["holds"] and bad["value_at_zero"] == -0.5


def test_errors_map_to_python_exceptions():
    mesh = plap.build_interval(0.0, 1.0, 16)
    with pytest.raises(ValueError):
        plap.solve(mesh, p=2.0, q=3.0)
    with pytest.raises(ValueError):
        plap.Weight.expression("1 + sinh(x)")
    with pytest.raises(plap.InvalidConfig):
        plap.run_sweep('{"q": 4}')


def test_sweep_from_config(tmp_path):
    cfg = """{"domain": {"n": 32}, "solver": {"random_starts": 1, "t_grid": [1]},
              "sweep": {"lam_grid": [1, 5, 12], "eta_grid": [0], "eta_bar": 1, "compute_eta_star": false}}"""
    a = plap.run_sweep(cfg, str(tmp_path / "a.csv"))
    b = plap.run_sweep(cfg, str(tmp_path / "b.csv"))
    assert a["counterexamples"] == 0
    assert a["cells"] == 3
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
