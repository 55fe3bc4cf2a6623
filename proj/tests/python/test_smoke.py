# Smoke tests for the python bindings: closed forms at gamma = 0, determinism,
# measure normalization, the duality product, and one tiny experiment run.

import math

import numpy as np
import pytest

import gffnet


def test_gamma_zero_closed_form():
    # 4 x 3 cells of unit resistors: R_LR = W / (H + 1) = 1
    box = (0.0, 0.0, 0.5, 0.375)
    f = gffnet.sample_field(2, box, seed=1, zeta=2)
    net = gffnet.build_network(f, 0.0, box, zeta=2)
    assert gffnet.effective_resistance(net, "lr") == pytest.approx(1.0, abs=1e-9)
    assert gffnet.effective_resistance(net, "ud") == pytest.approx(
        3.0 / 5.0, abs=1e-9
    )


def test_field_determinism():
    box = (0.0, 0.0, 0.25, 0.25)
    a = gffnet.sample_field(3, box, seed=7, zeta=2)
    b = gffnet.sample_field(3, box, seed=7, zeta=2)
    c = gffnet.sample_field(3, box, seed=8, zeta=2)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)
    assert a.values.shape == (a.ny, a.nx)


def test_analytic_covariance_variance():
    # C_{0,n}(x, x) = n log 2
    got = gffnet.analytic_covariance(0.1, 0.1, 0.1, 0.1, 0, 3)
    assert got == pytest.approx(3.0 * math.log(2.0), rel=1e-12)


def test_eta_normalization_at_gamma_zero():
    box = (0.0, 0.0, 0.5, 0.5)
    f = gffnet.sample_field(2, box, seed=3, zeta=2)
    rep = gffnet.eta_measure(f, 0.0, box, zeta=2)
    assert rep.raw == 25.0
    assert rep.normalized == 1.0
    assert rep.expectation == 25.0


def test_duality_product():
    box = (0.0, 0.0, 0.3125, 0.25)  # 5 x 4 cells at n=3, zeta=2 (spacing 1/16)
    f = gffnet.sample_field(3, box, seed=11, zeta=2)
    net = gffnet.build_network(f, 0.2, box, zeta=2)
    r_lr = gffnet.effective_resistance(net, "lr")
    r_ud_dual = gffnet.effective_resistance(gffnet.dual_network(net), "ud")
    assert r_lr * r_ud_dual == pytest.approx(1.0, abs=1e-8)


def test_walk_reaches_the_boundary():
    box = (0.0, 0.0, 0.5, 0.5)  # 8 x 8 cells at n=3, zeta=2
    f = gffnet.sample_field(3, box, seed=5, zeta=2)
    net = gffnet.build_network(f, 0.2, box, zeta=2)
    coords = net.coords
    eps = 1e-12
    interior = [
        v
        for v in range(net.vertex_count())
        if eps < coords[v][0] < 0.5 - eps and eps < coords[v][1] < 0.5 - eps
    ]
    start = min(
        interior,
        key=lambda v: (coords[v][0] - 0.25) ** 2 + (coords[v][1] - 0.25) ** 2,
    )
    expected_steps = gffnet.exact_exit_expectation(net, interior, start)
    assert expected_steps > 1.0

    trace = gffnet.walk_trace(net, interior, start, seed=9)
    assert trace.shape[1] == 2
    assert trace.shape[0] >= 2
    x, y = trace[-1]
    on_boundary = (
        x <= eps or y <= eps or x >= 0.5 - eps or y >= 0.5 - eps
    )
    assert on_boundary
    # every step moves to a nearest neighbor
    steps = np.abs(np.diff(trace, axis=0)).sum(axis=1)
    assert np.allclose(steps, 1.0 / 16.0)


def test_mix_seed_and_chi():
    assert gffnet.mix_seed(1, 2) != gffnet.mix_seed(1, 3)
    assert gffnet.chi_factor(4, 2, 0.0) == pytest.approx(1024.0)
    assert gffnet.default_zeta(5) == 3


def test_run_experiment_smoke():
    out = gffnet.run_experiment(
        "duality-median", seed=5, replicas=4, extra={"n": "2", "zeta": "2"}
    )
    assert out["experiment"] == "duality-median"
    assert len(out["assertions"]) >= 1
    assert "p_le_one" in out["summary"]
    names = {a["name"] for a in out["assertions"]}
    assert "median-half" in names


def test_errors_are_mapped():
    with pytest.raises(gffnet.GffnetError):
        gffnet.sample_field(4, (0.0, 0.0, 0.25, 0.25), seed=1, zeta=1)
