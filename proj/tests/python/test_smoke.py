"""Smoke tests for the Python bindings: each main operation runs end to
end and returns sane, reproducible values."""

import numpy as np
import pytest

import qmpemba
from qmpemba import dot, obs, scan, twosite


def dot_params(mu_left=3.0, mu_right=3.0):
    return dot.DotParams(
        epsilon0=2.0,
        u=1.25,
        gamma=1.0,
        baths=dot.BathPair(mu_left=mu_left, mu_right=mu_right),
    )


def pair_params(delta=0.2, mu1=3.0, mu2=3.0, t1=1.0, t2=1.0):
    return twosite.TwoSiteParams(
        omega1=1.0,
        omega2=1.0,
        delta=delta,
        gamma1=0.05,
        gamma2=0.05,
        bath1=twosite.Bath(temperature=t1, mu=mu1),
        bath2=twosite.Bath(temperature=t2, mu=mu2),
    )


def test_version_string():
    assert qmpemba.__version__ == "1.0.0"


def test_dot_generator_conserves_probability():
    gen = dot.generator(dot_params())
    np.testing.assert_allclose(gen.sum(axis=0), np.zeros(4), atol=1e-12)


def test_dot_spectral_data_is_biorthonormal():
    data = dot.spectral_data(dot_params())
    np.testing.assert_allclose(
        data["left"] @ data["right"], np.eye(4), atol=1e-12
    )
    assert data["eigenvalues"][0] == 0.0


def test_dot_occupations_match_reference():
    f0, f1 = dot.occupation_factors(dot_params())
    assert f0 == pytest.approx(1.4621171572600098, abs=1e-14)
    assert f1 == pytest.approx(0.8756469982284039, abs=1e-14)


def test_dot_evolution_relaxes_to_steady_state():
    params = dot_params(5.0, 1.0)
    rho0 = dot.prepare_initial_state(
        params, dot.BathPair(mu_left=2.0, mu_right=2.0)
    )
    times = np.linspace(0.0, 40.0, 81)
    traj = dot.evolve(params, rho0, list(times))
    assert traj.shape == (81, 4)
    np.testing.assert_allclose(traj.sum(axis=1), np.ones(81), atol=1e-9)
    np.testing.assert_allclose(
        traj[-1], dot.steady_state(params), atol=1e-12
    )


def test_dot_criterion_frozen_value():
    # Strongly biased relaxation baths (7, -1): the frozen ratio belongs to
    # this half-splitting-4 configuration.
    params = dot_params(7.0, -1.0)
    rho_i = dot.prepare_initial_state(
        params, dot.BathPair(mu_left=2.0, mu_right=2.0)
    )
    rho_ii = dot.prepare_initial_state(
        params, dot.BathPair(mu_left=1.0, mu_right=6.0)
    )
    value, in_window = dot.mpemba_criterion(params, rho_i, rho_ii, 2)
    assert value == pytest.approx(0.09703475325005119, abs=1e-10)
    assert not in_window
    assert dot.crossing_time(params, rho_i, rho_ii, 2) is None


def test_dot_degenerate_difference_raises():
    params = dot_params()
    rho = dot.steady_state(params)
    with pytest.raises(qmpemba.DegenerateDifferenceError):
        dot.mpemba_criterion(params, rho, rho, 2)


def test_twosite_steady_state_frozen():
    state = twosite.steady_state(pair_params(), twosite.GeneratorMode.LINDBLAD)
    np.testing.assert_allclose(
        state.populations,
        [0.0141497131059718, 0.1277013517945159, 0.0856007760137133,
         0.7725481590857990],
        atol=1e-12,
    )
    assert state.coherence == 0.0


def test_twosite_redfield_evolution_and_observables():
    params = pair_params(delta=0.05, mu1=0.1, mu2=3.0)
    state = twosite.TwoSiteState(
        populations=np.array([0.1, 0.25, 0.65, 0.0]), coherence=0.2 + 0.0j
    )
    times = list(np.linspace(0.0, 40.0, 41))
    result = twosite.evolve(
        params, twosite.GeneratorMode.REDFIELD, state, times
    )
    assert result["populations"].shape == (41, 4)
    np.testing.assert_allclose(
        result["populations"].sum(axis=1), np.ones(41), atol=1e-9
    )
    assert not result["coherence_ignored"]
    assert result["worst_population_violation"] < 1e-4

    local = twosite.global_to_local(
        params,
        twosite.TwoSiteState(populations=np.array([0.1, 0.1, 0.7, 0.1])),
    )
    assert obs.quantum_mutual_information(local) == pytest.approx(
        0.643220350553, abs=1e-9
    )
    assert obs.von_neumann_entropy(np.eye(2) / 2.0) == pytest.approx(1.0)


def test_concurrence_routes_agree():
    state = twosite.TwoSiteState(populations=np.array([0.1, 0.6, 0.2, 0.1]))
    direct = obs.concurrence_eigenbasis(state)
    local = twosite.global_to_local(pair_params(), state)
    assert direct == pytest.approx(obs.concurrence_local(local), abs=1e-12)
    assert direct == pytest.approx(0.2, abs=1e-12)


def test_detect_crossings_refines_transversal_root():
    times = list(np.linspace(0.0, 1.0, 11))
    a = list(times)
    b = [1.0 - t for t in times]
    crossings = scan.detect_crossings(
        times, a, b, lambda t: t - (1.0 - t)
    )
    assert len(crossings) == 1
    time, direction = crossings[0]
    assert time == pytest.approx(0.5, abs=1e-9)
    assert direction == 1


def test_entanglement_crossing_frozen():
    params = pair_params()
    state_i = twosite.TwoSiteState(populations=np.array([0.0, 0.2, 0.7, 0.1]))
    state_ii = twosite.TwoSiteState(populations=np.array([0.1, 0.7, 0.1, 0.1]))
    t_star = scan.entanglement_crossing_time(
        params, state_i, state_ii, bias=0.0, mean=3.0
    )
    assert t_star == pytest.approx(4.614598932, abs=1e-6)


def test_boundary_trace_small_grid():
    config = scan.BoundaryConfig()
    config.params = dot_params()
    config.mu_bar = 3.0
    config.bias = 0.0
    config.mu2_lo = 0.6
    config.mu2_hi = 1.8
    config.mu2_samples = 4
    curve = scan.trace_boundary(config, 0.0)
    assert curve["points"].shape[0] == 4
    mu2 = curve["points"][:, 0]
    mu4 = curve["points"][:, 1]
    assert mu2[0] == pytest.approx(0.6)
    assert mu4[0] == pytest.approx(1.735320485795624, abs=1e-6)
    assert curve["diverged_beyond"] is None


def test_region_map_shapes_and_determinism():
    base = pair_params(delta=0.05, mu1=0.0, mu2=0.0)
    state_i = twosite.TwoSiteState(
        populations=np.array([0.1, 0.25, 0.65, 0.0]), coherence=0.2 + 0.0j
    )
    state_ii = twosite.TwoSiteState(
        populations=np.array([0.1, 0.2, 0.6, 0.1]), coherence=-0.1 + 0.0j
    )
    grid = scan.RegionGrid()
    grid.bias_lo = 0.0
    grid.bias_hi = 1.0
    grid.bias_samples = 5
    grid.mean_lo = 1.0
    grid.mean_hi = 3.0
    grid.mean_samples = 3
    grid.threads = 2
    first = scan.coherence_region_map(base, grid, state_i, state_ii)
    assert len(first["bias_axis"]) == 5
    assert len(first["redfield"]) == 5
    assert len(first["redfield"][0]) == 3
    grid.threads = 1
    second = scan.coherence_region_map(base, grid, state_i, state_ii)
    assert first["redfield"] == second["redfield"]
    assert first["lindblad"] == second["lindblad"]


def test_error_hierarchy():
    with pytest.raises(qmpemba.NonPositiveTemperatureError):
        dot.occupation_factors(
            dot.DotParams(
                epsilon0=2.0,
                u=1.25,
                gamma=1.0,
                baths=dot.BathPair(mu_left=3.0, mu_right=3.0, t_left=-1.0),
            )
        )
    with pytest.raises(qmpemba.EngineError):
        twosite.delta_matrix(
            pair_params(), twosite.GeneratorMode.REDFIELD
        )
    with pytest.raises(qmpemba.GridMismatchError):
        scan.detect_crossings([0.0, 1.0], [0.0], [0.0, 1.0])
