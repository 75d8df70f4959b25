from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qwsearch.graphs import GraphSpec, Hamiltonian, build_graph, hamiltonian_for, normalize
from qwsearch.spectra import (
    GroupedSpectrum,
    SpectrumError,
    analytic_spectrum,
    collapse,
    decompose,
    detect_quasi_degenerate,
    initial_state,
    rotated_overlap,
    s_params,
    s_sums,
)

DENSE_SPECS = [
    GraphSpec("complete", n=16),
    GraphSpec("complete_bipartite", n1=4, n2=7),
    GraphSpec("hypercube", dim=5),
    GraphSpec("lattice", sides=(6, 6)),
    GraphSpec("lattice", sides=(5, 7), periodic=False),
    GraphSpec("erdos_renyi", n=60, p=0.15, seed=11),
    GraphSpec("joined_complete", n=40),
    GraphSpec("bridged_complete", n=40),
    GraphSpec("rook", n1=4, n2=9),
]
CLOSED_FORM_SPECS = [
    GraphSpec("complete", n=12),
    GraphSpec("hypercube", dim=5),
    GraphSpec("lattice", sides=(6, 5)),
    GraphSpec("lattice", sides=(2, 4, 3)),
    GraphSpec("rook", n1=4, n2=16),
    GraphSpec("rook", n1=5, n2=5),
    GraphSpec("bridged_complete", n=24),
]


def test_k4_decompose():
    gs = decompose(hamiltonian_for(GraphSpec("complete", n=4), "degree"), marked=2)
    np.testing.assert_allclose(gs.values, [-1 / 3, 1.0], atol=1e-14)
    np.testing.assert_array_equal(gs.multiplicities, [3, 1])
    np.testing.assert_allclose(gs.weights, [3 / 4, 1 / 4], atol=1e-14)


@pytest.mark.parametrize("marked", [0, 17, 63])
def test_rook_4x16_decompose(marked):
    gs = decompose(hamiltonian_for(GraphSpec("rook", n1=4, n2=16)), marked)
    np.testing.assert_allclose(gs.values, [-1 / 9, 1 / 9, 7 / 9, 1.0], atol=1e-12)
    np.testing.assert_allclose(gs.weights, [45 / 64, 15 / 64, 3 / 64, 1 / 64], atol=1e-12)


def test_single_node():
    gs = decompose(Hamiltonian(np.array([[1.0]]), "degree"), 0)
    assert gs.num_groups == 1 and gs.weights[0] == 1.0 and gs.values[0] == 1.0


def test_marked_out_of_range():
    with pytest.raises(SpectrumError):
        decompose(hamiltonian_for(GraphSpec("complete", n=4)), 4)


@pytest.mark.parametrize("spec", DENSE_SPECS, ids=lambda s: s.family)
def test_weights_complete_and_reconstruction(spec):
    h = hamiltonian_for(spec)
    for marked in (0, spec.num_nodes // 2, spec.num_nodes - 1):
        gs = decompose(h, marked)
        assert abs(gs.weights.sum() - 1.0) <= 1e-12
        assert gs.multiplicities.sum() == h.n
        assert gs.values[-1] == 1.0
        assert np.all(np.diff(gs.values) > 1e-9)
    lam = np.linalg.eigvalsh(h.matrix)
    v = gs.full_basis
    assert np.max(np.abs(v @ np.diag(lam) @ v.T - h.matrix)) <= 1e-9


@pytest.mark.parametrize("spec", CLOSED_FORM_SPECS, ids=lambda s: s.family)
@pytest.mark.parametrize("mode", ["degree", "affine_to_unit_interval"])
def test_closed_form_matches_dense(spec, mode):
    dense = decompose(hamiltonian_for(spec, mode), 0)
    closed = analytic_spectrum(spec, mode)
    np.testing.assert_allclose(closed.values, dense.values, atol=1e-10)
    np.testing.assert_array_equal(closed.multiplicities, dense.multiplicities)
    np.testing.assert_allclose(closed.weights, dense.weights, atol=1e-10)


@pytest.mark.parametrize("n", [4, 10, 128, 1024])
def test_complete_sparams_closed_form(n):
    sp = s_params(analytic_spectrum(GraphSpec("complete", n=n)), 1)
    assert sp.s1 == pytest.approx((n - 1) ** 2 / n**2, rel=1e-14)
    assert sp.s2 == pytest.approx((n - 1) ** 3 / n**3, rel=1e-14)
    assert sp.ratio == pytest.approx(np.sqrt(1 - 1 / n), rel=1e-14)
    assert sp.epsilon == sp.epsilon_D == pytest.approx(1 / n)


def test_sparams_errors():
    gs = analytic_spectrum(GraphSpec("complete", n=8))
    with pytest.raises(SpectrumError):
        s_params(gs, 8)
    with pytest.raises(SpectrumError, match="respect eigenvalue groups"):
        s_params(gs, 3)
    degenerate_top = GroupedSpectrum([0.0, 1.0], [2, 2], [0.5, 0.5])
    with pytest.raises(SpectrumError, match="respect eigenvalue groups"):
        s_params(degenerate_top, 1, epsilon=0.25)


def test_rook_d1_scaling():
    sigma = 0.28
    ns, s1, s2 = [], [], []
    for m in range(12, 31, 3):
        n1 = round(2 ** (m * sigma))
        n2 = round(2**m / n1)
        sp = s_params(analytic_spectrum(GraphSpec("rook", n1=n1, n2=n2)), 1)
        ns.append(n1 * n2)
        s1.append(sp.s1)
        s2.append(sp.s2)
    assert 0.5 < min(s1) and max(s1) < 1.5
    slope = np.polyfit(np.log(ns), np.log(s2), 1)[0]
    assert slope == pytest.approx(1 - 3 * sigma, abs=0.05)


def test_rook_block_sums_near_one():
    for n1 in (8, 32, 128, 512):
        sp = s_params(analytic_spectrum(GraphSpec("rook", n1=n1, n2=64 * n1)), n1)
        for k in range(6):
            # negative eigenvalues put some 1 - lambda above 1, so the sign varies with k
            assert abs(sp.s[k] - 1.0) * n1 <= 10.0


def test_detect_joined_complete():
    gs = decompose(hamiltonian_for(GraphSpec("joined_complete", n=1024)), 1, keep_basis=False)
    assert detect_quasi_degenerate(gs) == 2


def test_detect_complete_and_bridged():
    assert detect_quasi_degenerate(analytic_spectrum(GraphSpec("complete", n=512))) == 1
    assert detect_quasi_degenerate(analytic_spectrum(GraphSpec("bridged_complete", n=2048))) == 2
    assert detect_quasi_degenerate(analytic_spectrum(GraphSpec("lattice", sides=(16, 16)))) == 1


def test_detect_explicit_split():
    gs = analytic_spectrum(GraphSpec("rook", n1=4, n2=16))
    assert detect_quasi_degenerate(gs, 4) == 4
    with pytest.raises(SpectrumError, match="D must respect eigenvalue groups"):
        detect_quasi_degenerate(gs, 2)


def test_rotated_overlap_d1():
    gs = decompose(hamiltonian_for(GraphSpec("erdos_renyi", n=50, p=0.2, seed=3)), 5)
    eps, eps_d = rotated_overlap(gs, 1)
    assert eps == eps_d == gs.weights[-1]


@pytest.mark.parametrize("n1,n2", [(4, 16), (8, 8), (2, 32)])
def test_vertex_transitive_eps_d(n1, n2):
    gs = analytic_spectrum(GraphSpec("rook", n1=n1, n2=n2))
    for D in gs.top_counts()[:-1]:
        assert rotated_overlap(gs, int(D))[1] == pytest.approx(D / (n1 * n2), rel=1e-12)


def test_joined_complete_overlap():
    n = 1024
    gs = decompose(hamiltonian_for(GraphSpec("joined_complete", n=n)), 1)
    eps, eps_d = rotated_overlap(gs, 2)
    assert eps == pytest.approx(1 / n, rel=0.1)
    assert eps_d == pytest.approx(2 / n, rel=0.1)


def test_uniform_in_d_mean_overlap():
    gs = decompose(hamiltonian_for(GraphSpec("rook", n1=3, n2=4)), 0)
    D = 3
    ratios = [np.divide(*rotated_overlap(gs, D, "uniform_in_D", seed)) for seed in range(2000)]
    assert np.mean(ratios) == pytest.approx(1 / D, abs=0.03)


def test_uniform_in_d_vector_consistent():
    gs = decompose(hamiltonian_for(GraphSpec("joined_complete", n=16)), 3)
    st_ = initial_state(gs, 2, "uniform_in_D", seed=4)
    assert abs(np.linalg.norm(st_.vector) - 1.0) < 1e-12
    assert st_.vector[3] == pytest.approx(sum(st_.group_amplitudes.values()), abs=1e-12)
    assert st_.epsilon <= st_.epsilon_D + 1e-15


def test_orthogonal_block():
    gs = GroupedSpectrum([0.0, 0.5, 1.0], [1, 1, 1], [1.0, 0.0, 0.0])
    with pytest.raises(SpectrumError, match="orthogonal"):
        initial_state(gs, 1)


def test_collapse():
    gs = analytic_spectrum(GraphSpec("rook", n1=4, n2=16))
    c = collapse(gs, 4)
    np.testing.assert_allclose(c.values, [-1 / 9, 1 / 9, 1.0])
    np.testing.assert_array_equal(c.multiplicities, [45, 15, 4])
    assert c.weights[-1] == pytest.approx(4 / 64)


def _instances():
    for spec in DENSE_SPECS:
        for mode in (None, "affine_to_unit_interval"):
            a = build_graph(spec)
            h = normalize(a, mode)
            yield spec, mode, h, decompose(h, 0)


def test_ratio_bracket_upper_bound_and_gap_relation():
    for _, _, _, gs in _instances():
        sp = s_params(gs, 1)
        assert sp.ratio <= 1 + 1e-12
        assert sp.gap * sp.s3 <= sp.s2 * (1 + 1e-12)
        assert sp.epsilon <= sp.epsilon_D <= 1


def test_ratio_bracket_lower_bound_on_unit_interval_spectra():
    for _, mode, _, gs in _instances():
        if mode == "affine_to_unit_interval":
            sp = s_params(gs, 1)
            assert np.sqrt(sp.gap * (1 - sp.epsilon)) <= sp.ratio * (1 + 1e-12)


def test_ratio_bracket_generalized_lower_bound():
    for _, _, _, gs in _instances():
        sp = s_params(gs, 1)
        spread = 1.0 - gs.values[0]
        assert np.sqrt(sp.gap * (1 - sp.epsilon) / spread) <= sp.ratio * (1 + 1e-12)


def test_ratio_bracket_literal_lower_bound_needs_unit_interval():
    # the unshifted 4-cycle violates the [0,1]-spectrum form of the bound
    sp = s_params(analytic_spectrum(GraphSpec("lattice", sides=(4,))), 1)
    assert np.sqrt(sp.gap * (1 - sp.epsilon)) > sp.ratio


weights_st = st.lists(st.floats(1e-6, 1.0), min_size=1, max_size=12)


@given(weights=weights_st, data=st.data(), c=st.floats(1e-3, 1e3))
def test_ratio_scaling_identity(weights, data, c):
    k = len(weights)
    vals = np.sort(data.draw(st.lists(st.floats(-1.0, 0.999), min_size=k, max_size=k, unique=True)))
    w = np.array(weights)
    s = s_sums(vals, w)
    sc = s_sums(vals, c * w)
    assert sc[0] / np.sqrt(sc[1]) == pytest.approx(np.sqrt(c) * s[0] / np.sqrt(s[1]), rel=1e-12)


@given(data=st.data(), k=st.integers(1, 10))
def test_cauchy_schwarz_upper_bound(data, k):
    vals = np.sort(data.draw(st.lists(st.floats(-1.0, 0.99), min_size=k, max_size=k, unique=True)))
    raw = np.array(data.draw(st.lists(st.floats(1e-4, 1.0), min_size=k + 1, max_size=k + 1)))
    w = raw / raw.sum()
    gs = GroupedSpectrum(np.append(vals, 1.0), np.ones(k + 1, dtype=int), w)
    sp = s_params(gs, 1)
    assert sp.ratio <= 1 + 1e-12
    assert np.sqrt(sp.gap * (1 - sp.epsilon) / (1 - vals[0])) <= sp.ratio * (1 + 1e-12)
