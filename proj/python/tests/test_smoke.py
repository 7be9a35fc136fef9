import math

import numpy as np
import pytest

import platelab as pl


def test_reduced_tensor():
    lame = pl.LameParams(1.0, 1.0, 2)
    assert pl.reduced_modulus_1d(lame) == pytest.approx(8.0 / 3.0)
    e = np.array([[0.4]])
    assert pl.reduced_min_oracle(lame, e) == pytest.approx(pl.quadratic_form_c0(lame, e))
    lame3 = pl.LameParams(0.7, 1.3, 3)
    e3 = np.array([[0.1, -0.3], [-0.3, 0.5]])
    assert pl.reduced_min_oracle(lame3, e3) == pytest.approx(pl.quadratic_form_c0(lame3, e3), rel=1e-9)


def test_invalid_lame():
    with pytest.raises(ValueError):
        pl.LameParams(1.0, -1.0, 2)


def test_phi_rho():
    assert pl.phi_rho(0.1, np.array([1.0, 0.0])) == pytest.approx(1.0)
    assert pl.phi_rho(0.1, np.array([0.0, 1.0])) == pytest.approx(10.0)


def test_griffith_bar_limit():
    lame = pl.LameParams(1.0, 1.0, 2)
    elastic = pl.minimize_limit("stretch:0.5", lame, 64)
    assert elastic["energy"].total == pytest.approx(1.0 / 3.0)
    cracked = pl.minimize_limit("stretch:1.2", lame, 64)
    assert cracked["energy"].total == pytest.approx(1.0)
    assert cracked["totals"][0] == pytest.approx(4.0 / 3.0 * 1.44)


def test_plate_minimization():
    lame = pl.LameParams(1.0, 1.0, 2)
    r = pl.alternate_minimize("stretch:1.2", lame, 0.1, cells=16, layers=4)
    assert r["energy"].total == pytest.approx(1.0, rel=1e-6)
    assert r["monotone"]
    assert all(b <= a + 1e-12 for a, b in zip(r["totals"], r["totals"][1:]))


def test_solver_failure():
    cfg = pl.SolverConfig()
    cfg.linear = "cg"
    cfg.cg_max_iter = 1
    with pytest.raises(pl.SolverFailure):
        pl.alternate_minimize("stretch:1.0", pl.LameParams(1.0, 1.0, 2), 0.1, cells=8, layers=2, config=cfg)


def test_recovery_and_lattice():
    lame = pl.LameParams(1.0, 1.0, 2)
    state = pl.make_state("crack:1:0.5:0.25", 2, [64])
    assert pl.limit_energy(state, lame).total == pytest.approx(4.0 / 3.0 + 1.0)
    csv = pl.recovery_sweep(state, lame, [0.1, 0.01])
    lines = csv.strip().splitlines()
    assert len(lines) == 3
    mean, oracle = pl.jump_energy_study([0.5, 0.0], [0.5, 1.0], 1.0 / 32, samples=40, seed=3)
    assert oracle == pytest.approx(1.0 + 3.0 / math.sqrt(2.0))
    assert abs(mean - oracle) / oracle < 0.05


def test_cli_exit_codes(tmp_path):
    assert pl.run_cli(["recover", "--out", str(tmp_path / "r.csv")]) == 0
    assert (tmp_path / "r.csv").read_text().startswith("rho,")
    assert pl.run_cli(["classify", "--out", str(tmp_path / "c.csv")]) == 1
