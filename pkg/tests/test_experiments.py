from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qwsearch.experiments import (
    ExperimentError,
    audit_bounds,
    default_r_grid,
    expected_exponents,
    fit_exponent,
    hitting_bracket,
    hitting_time_exact,
    hitting_times,
    rook_block,
    rook_dims,
    rook_sweep,
    run_instance,
    size_sweep_fit,
    spectrum_for,
    sweep_r,
    trotter_error_audit,
)
from qwsearch.graphs import GraphSpec, build_graph
from qwsearch.spectra import GroupedSpectrum, analytic_spectrum, initial_state, s_params


def test_run_instance_complete():
    rec = run_instance(GraphSpec("complete", n=1024))
    assert rec.D == 1 and rec.prediction.regime == "standard"
    assert rec.agreement["nu_rel_error"] < 0.01
    assert rec.agreement["T_rel_error"] < 0.01
    d = rec.to_dict()
    assert d["measured_peak"]["abs"] == pytest.approx(np.sqrt(1023 / 1024), rel=0.01)
    assert d["cost"]["ht_lower"] == pytest.approx(1024)


def test_run_instance_rook_small_needs_block():
    rec = run_instance(GraphSpec("rook", n1=4, n2=64), D_policy=4)
    assert rec.D == 4
    assert rec.agreement["T_rel_error"] < 0.10


def test_run_instance_quasi_degenerate_auto():
    rec = run_instance(GraphSpec("joined_complete", n=1024), marked=1)
    assert rec.D == 2
    assert rec.prediction.regime == "quasi_degenerate"
    assert rec.agreement["nu_rel_error"] < 0.05
    assert rec.cost.t_quasi_degenerate is not None


def test_run_instance_lattice_out_of_validity():
    rec = run_instance(GraphSpec("lattice", sides=(32, 32)))
    assert rec.prediction.regime == "out_of_validity"


def test_run_instance_bound_checks():
    rec = run_instance(GraphSpec("complete", n=4096), bound_factors=(0.25, 0.5, 2.0, 4.0))
    assert len(rec.bound_checks) == 4
    assert all(b.passed for b in rec.bound_checks)
    assert all(b.measured_sup <= b.triangle + 1e-12 for b in rec.bound_checks)


def test_sweep_r_complete():
    gs = analytic_spectrum(GraphSpec("complete", n=1024))
    sp = s_params(gs, 1)
    grid = default_r_grid(sp, 21)
    assert sp.s1 in grid
    rows = sweep_r(gs, grid)
    best = max(rows, key=lambda row: row.sup_amp)
    assert best.in_window
    assert best.r == pytest.approx(sp.s1)
    for row in rows:
        if row.r > sp.s1 and not row.in_window:
            assert row.sup_amp <= row.bound
        if row.in_window:
            assert np.isnan(row.bound)


def test_sweep_r_rejects_empty_grid():
    gs = analytic_spectrum(GraphSpec("complete", n=64))
    with pytest.raises(ValueError):
        sweep_r(gs, [])
    with pytest.raises(ValueError):
        sweep_r(gs, [0.5, -1.0])


def test_fit_exponent_exact_power():
    n = 2.0 ** np.arange(10, 16)
    fit = fit_exponent(n, 3.0 * n**0.5)
    assert fit.slope == pytest.approx(0.5, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0)


@pytest.mark.parametrize(
    "sizes, values",
    [([1, 2, 3], [1, 2, 3]), ([1, 2, 3, 4], [1, 0, 1, 1]), ([1, 2, 3, 4], [1, -2, 3, 4])],
)
def test_fit_exponent_errors(sizes, values):
    with pytest.raises(ValueError):
        fit_exponent(sizes, values)


@settings(max_examples=30)
@given(st.floats(-2, 2), st.floats(0.1, 10))
def test_fit_exponent_recovers_slope(slope, scale):
    n = 2.0 ** np.arange(8, 14)
    assert fit_exponent(n, scale * n**slope).slope == pytest.approx(slope, abs=1e-9)


def test_rook_schedule():
    assert rook_dims(0.5, 2**10) == (32, 32)
    assert rook_dims(0.0, 2**10) == (2, 512)
    n1, n2 = rook_dims(0.28, 2**14)
    assert abs(n1 * n2 - 2**14) <= n1
    assert rook_block(0.2) == "n1" and rook_block(0.3) == 1
    assert expected_exponents(0.4) == {"T": 0.5, "nu": 0.0}
    assert expected_exponents(0.28)["T"] == pytest.approx(0.58)
    assert expected_exponents(0.28)["nu"] == pytest.approx(-0.08)
    assert expected_exponents(0.2) == pytest.approx({"T": 0.4, "nu": -0.1})


def test_rook_sweep_requires_four_sizes():
    with pytest.raises(ValueError):
        rook_sweep(0.4, exponents=range(10, 13))


def test_rook_sweep_sigma_04():
    sw = rook_sweep(0.4, exponents=range(10, 19))
    assert abs(sw.fit_T.slope - 0.5) <= 0.05
    assert abs(sw.fit_nu.slope) <= 0.05
    assert sw.achieved_sigma == pytest.approx(0.4, abs=0.02)


def test_size_sweep_fit_rejects_quantity():
    with pytest.raises(ValueError):
        size_sweep_fit(0.4, range(10, 14), quantity="gap")


def test_trotter_audit_joined():
    gs, _ = spectrum_for(GraphSpec("joined_complete", n=512), 1)
    au = trotter_error_audit(gs, 2)
    assert au.passed
    assert au.constant <= 10


def test_trotter_audit_exact_degeneracy():
    gs = GroupedSpectrum([0.0, 0.5, 1.0], [500, 10, 2], [0.9, 0.09, 0.01])
    au = trotter_error_audit(gs, 2)
    assert au.scale == 0.0
    assert au.max_error <= 1e-10
    assert au.constant == 0.0


def test_trotter_audit_bridged_small_against_amplitude():
    gs, _ = spectrum_for(GraphSpec("bridged_complete", n=1024), 1)
    au = trotter_error_audit(gs, 2)
    st_ = initial_state(gs, 2)
    from qwsearch.predictor import predict_critical

    nu = predict_critical(s_params(gs, 2, st_.epsilon)).nu_pred
    assert au.max_error < 0.02 * nu


def test_trotter_constant_stable_across_sizes():
    consts = [
        trotter_error_audit(spectrum_for(GraphSpec("bridged_complete", n=n), 1)[0], 2).constant
        for n in (256, 512, 1024)
    ]
    assert max(consts) / min(consts) < 2


@pytest.mark.parametrize("n", [4, 9, 50])
def test_hitting_time_complete_simple_walk(n):
    a = build_graph(GraphSpec("complete", n=n))
    h = hitting_times(a, 0, lazy=False)
    assert h[0] == 0
    np.testing.assert_allclose(h[1:], n - 1, rtol=1e-12)
    # lazy walk doubles every step count
    np.testing.assert_allclose(hitting_times(a, 0)[1:], 2 * (n - 1), rtol=1e-12)


@pytest.mark.parametrize(
    "spec",
    [
        GraphSpec("complete", n=32),
        GraphSpec("complete_bipartite", n1=5, n2=9),
        GraphSpec("hypercube", dim=6),
        GraphSpec("lattice", sides=(5, 7), periodic=False),
        GraphSpec("lattice", sides=(6, 6), periodic=True),
        GraphSpec("erdos_renyi", n=60, p=0.2, seed=3),
        GraphSpec("joined_complete", n=64),
        GraphSpec("bridged_complete", n=64),
        GraphSpec("rook", n1=4, n2=16),
    ],
    ids=lambda s: s.family,
)
def test_hitting_bracket_dense(spec):
    a = build_graph(spec)
    for marked in (0, a.shape[0] - 1):
        b = hitting_bracket(a, marked)
        assert b.inside, b


def test_hitting_time_rook_linear():
    ns, hts = [], []
    for n2 in (64, 128, 256, 512, 1024):
        a = build_graph(GraphSpec("rook", n1=4, n2=n2))
        ns.append(a.shape[0])
        hts.append(hitting_time_exact(a, 0))
    assert abs(fit_exponent(ns, hts).slope - 1.0) <= 0.05


def test_hitting_time_size_cap():
    with pytest.raises(ExperimentError):
        hitting_times(np.ones((5000, 5000)) - np.eye(5000), 0)


def test_audit_bounds_rook_r_above():
    gs = analytic_spectrum(GraphSpec("rook", n1=16, n2=256))
    sp = s_params(gs, 1)
    checks = audit_bounds(gs, sp, (2.0, 4.0))
    assert all(c.passed for c in checks)
