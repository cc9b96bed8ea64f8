import csv
import io
import math

import numpy as np
import pytest

import ringtransport as rt


def test_chain_levels():
    levels = rt.chain_levels(5, 1.0)
    expected = [-math.cos(math.pi * n / 6) for n in range(1, 6)]
    assert np.allclose(np.sort(levels), expected, atol=1e-12)


def test_methods_agree_at_large_gamma():
    full = rt.stationary("full", gamma=10.0)
    markov = rt.stationary("markov", gamma=10.0)
    nonmarkov = rt.stationary("nonmarkov", gamma=10.0)
    assert full["current"] > 0
    assert abs(markov["current"] / full["current"] - 1) < 0.05
    assert abs(nonmarkov["current"] / full["current"] - 1) < 0.05


def test_full_state_is_hermitian_and_uniform():
    r = rt.stationary("full", L=3, M=30, gamma=0.5, mu=0.1, delta_mu=0.05, beta=10.0)
    rho = r["rho_s"]
    assert rho.shape == (3, 3)
    assert np.abs(rho - rho.conj().T).max() < 1e-10
    assert np.ptp(r["bond_currents"]) < 1e-8


def test_zero_bias_carries_no_current():
    assert abs(rt.stationary("full", M=40, delta_mu=0.0)["current"]) < 1e-10


def test_purity_higher_on_resonance():
    assert rt.transporting_purity(mu=0.0) > rt.transporting_purity(mu=0.25)


def test_sweep_csv_is_deterministic():
    cfg = "model.M = 40\nsweep.methods = full,markov\nsweep.gamma = 0.1,1\nsweep.kappa_F = lin:0.2:0.8:4\n"
    a = rt.sweep_csv(cfg, 1)
    assert a == rt.sweep_csv(cfg, 3)
    rows = [r for r in csv.DictReader(io.StringIO("\n".join(l for l in a.splitlines() if not l.startswith("#"))))]
    assert len(rows) == 2 * 2 * 4
    assert all(r["converged"] == "true" for r in rows)


def test_peaks_and_grid():
    x = rt.parse_grid("lin:0:1:5")
    assert x == [0.0, 0.25, 0.5, 0.75, 1.0]
    peaks = rt.find_peaks([0, 1, 2, 3, 4, 5, 6], [0, 1, 0, 0, 3, 0, 0])
    assert [p[0] for p in peaks] == [1, 4]


def test_bad_config_raises():
    with pytest.raises(rt.ConfigError):
        rt.sweep_csv("model.nope = 1\n")
    with pytest.raises(ValueError):
        rt.stationary("full", gamma=-1.0)
