import numpy as np
import pytest

from nlqcorr import beams, hamfun, qstate
from _util import random_hermitian, random_state

I2 = np.eye(2, dtype=complex)


def quad_pair(a=8.0, b=0.5):
    return (hamfun.quadratic_average(qstate.sigma_z, a),
            hamfun.quadratic_average(qstate.sigma_z, b))


def brute_force_frequency_average(pair_obs, pair_states):
    # full 4^N construction of (1/N) sum_i O_i, N small
    n = len(pair_states)
    dim = 4**n
    big = np.zeros((dim, dim), dtype=complex)
    for i in range(n):
        term = np.eye(1, dtype=complex)
        for j in range(n):
            term = np.kron(term, pair_obs if j == i else np.eye(4))
        big += term
    big /= n
    product = np.ones(1, dtype=complex)
    for s in pair_states:
        product = np.kron(product, s)
    return float(np.vdot(product, big @ product).real)


def test_frequency_average_identical_states(rng):
    obs = random_hermitian(rng, 4)
    psi = random_state(rng, 4)
    single = qstate.expectation(psi, obs)
    assert beams.frequency_average(obs, [psi] * 7) == pytest.approx(single, abs=1e-13)


def test_frequency_average_balanced_pair():
    zz = np.kron(qstate.sigma_z, qstate.sigma_z)
    up_up = np.kron([1, 0], [1, 0]).astype(complex)      # <zz> = +1
    up_down = np.kron([1, 0], [0, 1]).astype(complex)    # <zz> = -1
    assert beams.frequency_average(zz, [up_up, up_down]) == pytest.approx(0.0, abs=1e-14)


def test_frequency_average_matches_brute_force_n3(rng):
    obs = random_hermitian(rng, 4)
    states = [random_state(rng, 4) for _ in range(3)]
    fast = beams.frequency_average(obs, states)
    slow = brute_force_frequency_average(obs, states)
    assert abs(fast - slow) <= 1e-12


def test_frequency_average_requires_states():
    with pytest.raises(ValueError):
        beams.frequency_average(np.eye(4), [])


def test_beam_spec_validation():
    h1, h2 = quad_pair()
    beams.BeamSpec(qstate.singlet_state(), h1, h2, [[0.0, 1.0, 2.0]])
    with pytest.raises(ValueError):
        beams.BeamSpec(qstate.singlet_state(), h1, h2, [[1.0, 0.5, 2.0]])
    with pytest.raises(ValueError):
        beams.BeamSpec(qstate.singlet_state(), h1, h2, [[0.0, 1.0]])


def test_beam_spec_flight_time_parametrization():
    h1, h2 = quad_pair()
    spec = beams.BeamSpec.from_flight_times(
        qstate.tilted_pair_state(), h1, h2, [0.0, 1.5, 4.0], 3.5, 8.0)
    assert spec.n_pairs == 3
    assert np.allclose(spec.times[:, 1] - spec.times[:, 0], 3.5)
    assert np.allclose(spec.times[:, 2] - spec.times[:, 0], 8.0)
    direct = beams.BeamSpec(
        qstate.tilted_pair_state(), h1, h2,
        [[0.0, 3.5, 8.0], [1.5, 5.0, 9.5], [4.0, 7.5, 12.0]])
    assert np.allclose(spec.times, direct.times)


def test_sub_beam_singlet_is_maximally_mixed():
    h1, h2 = quad_pair()
    spec = beams.BeamSpec(qstate.singlet_state(), h1, h2,
                          [[0.0, 3.5, 8.0], [1.0, 4.5, 9.0]])
    for rho in beams.sub_beam_state(spec, 0.0):
        assert np.max(np.abs(rho - I2 / 2)) <= 1e-13


def test_sub_beam_independent_of_second_detection_times():
    h1, h2 = quad_pair()
    psi0 = qstate.tilted_pair_state()
    results = []
    for t2 in (5.0, 8.0, 20.0):
        spec = beams.BeamSpec(psi0, h1, h2, [[0.0, 3.5, t2], [1.0, 4.5, t2 + 1.0]])
        results.append(beams.sub_beam_state(spec, 6.0))
    for later in results[1:]:
        for a, b in zip(results[0], later):
            assert np.max(np.abs(a - b)) <= 1e-12


def test_sub_beam_staggered_births_shift_trajectories():
    h1, h2 = quad_pair()
    psi0 = qstate.tilted_pair_state()
    spec = beams.BeamSpec(psi0, h1, h2, [[0.0, 3.5, 8.0], [1.0, 4.5, 9.0]])
    at_3 = beams.sub_beam_state(spec, 3.0)
    at_2 = beams.sub_beam_state(
        beams.BeamSpec(psi0, h1, h2, [[0.0, 3.5, 8.0]]), 2.0)
    # the pair born at t0=1 observed at t=3 matches the t0=0 pair at t=2
    assert np.max(np.abs(at_3[1] - at_2[0])) <= 1e-13
    # a pair not yet born sits in its initial reduced state
    early = beams.sub_beam_state(spec, 0.5)
    rho0 = qstate.partial_trace(np.outer(psi0, psi0.conj()), (2, 2), 1)
    assert np.max(np.abs(early[1] - rho0)) <= 1e-14


def test_sample_variance_concentrates_like_one_over_n(rng):
    # synthetic Bernoulli outcomes: var of the beam mean scales as 1/N
    p = 0.3
    m_runs = 3000
    variances = {}
    for n in (8, 32):
        means = rng.binomial(n, p, size=m_runs) / n
        variances[n] = means.var()
    ratio = variances[8] / variances[32]
    assert 2.5 <= ratio <= 6.5   # ideal 4, generous sampling window
