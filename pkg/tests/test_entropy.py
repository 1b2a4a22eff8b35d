import math

import numpy as np
import pytest

from nlqcorr import entropy, qstate
from _util import random_density, random_hermitian


# --- Shannon ---

def test_shannon_uniform_two_is_one_bit():
    assert entropy.shannon_entropy([0.5, 0.5], base=2) == pytest.approx(1.0, abs=1e-14)


def test_shannon_deterministic_is_zero():
    assert entropy.shannon_entropy([1.0], base=2) == 0.0
    assert entropy.shannon_entropy([1.0, 0.0, 0.0], base=2) == 0.0


def test_shannon_two_term_direct_sum():
    p = [1 / 3, 2 / 3]
    direct = (1 / 3) * math.log2(3) + (2 / 3) * math.log2(3 / 2)
    assert entropy.shannon_entropy(p, base=2) == pytest.approx(direct, abs=1e-14)


def test_shannon_hartley_special_case():
    # equal counts: information log2(N / N_k) recovered from the count distribution
    counts = np.array([4, 4, 4, 4]) / 16
    assert entropy.shannon_entropy(counts, base=2) == pytest.approx(math.log2(4), abs=1e-14)


def test_distribution_validation():
    with pytest.raises(ValueError):
        entropy.shannon_entropy([0.5, 0.6])
    with pytest.raises(ValueError):
        entropy.shannon_entropy([1.5, -0.5])
    # tiny negative roundoff within tolerance is clipped, not rejected
    entropy.shannon_entropy([1.0 + 5e-15, -5e-15])


# --- KN averages ---

def test_kn_linear_is_arithmetic_mean(rng):
    p = np.array([0.2, 0.3, 0.5])
    x = rng.normal(size=3)
    assert entropy.kn_average(x, p, entropy.kn_linear()) == pytest.approx(float(p @ x), abs=1e-12)


def test_kn_sqrt_two_point_closed_form():
    for p_plus in (0.0, 0.25, 0.5, 0.9, 1.0):
        got = entropy.kn_average([9.0, 1.0], [p_plus, 1 - p_plus], entropy.kn_sqrt())
        assert got == pytest.approx((3 * p_plus + (1 - p_plus)) ** 2, abs=1e-12)


def test_kn_affine_invariance(rng):
    phi = entropy.kn_sqrt()
    for _ in range(20):
        x = rng.uniform(0.1, 30.0, size=4)
        p = rng.uniform(0.1, 1.0, size=4)
        p /= p.sum()
        base = entropy.kn_average(x, p, phi)
        shifted = entropy.kn_average(x, p, entropy.kn_affine(phi, 2.0, 3.0))
        assert abs(base - shifted) <= 1e-10


def test_kn_exponential_reproduces_renyi(rng):
    for alpha in (0.5, 2.0, 3.5):
        for _ in range(10):
            p = rng.uniform(0.05, 1.0, size=5)
            p /= p.sum()
            info = np.log2(1 / p)
            via_kn = entropy.kn_average(info, p, entropy.kn_exponential(alpha, base=2))
            assert abs(via_kn - entropy.renyi_entropy(p, alpha, base=2)) <= 1e-10


def test_kn_function_rejects_broken_inverse():
    with pytest.raises(ValueError):
        entropy.KNFunction(lambda x: x**3, lambda y: y, "broken")


def test_kn_average_domain_violation():
    with pytest.raises(ValueError):
        entropy.kn_average([-1.0, 4.0], [0.5, 0.5], entropy.kn_sqrt())


# --- Renyi ---

def test_renyi_uniform_collapses_alpha():
    p = np.full(8, 1 / 8)
    for alpha in (0.3, 0.9, 2.0, 5.0):
        assert entropy.renyi_entropy(p, alpha, base=2) == pytest.approx(3.0, abs=1e-12)


def test_renyi_symmetric_two_point():
    assert entropy.renyi_entropy([0.5, 0.5], 2.0, base=2) == pytest.approx(1.0, abs=1e-14)


def test_renyi_limit_approaches_shannon(rng):
    p = rng.uniform(0.05, 1.0, size=6)
    p /= p.sum()
    shannon = entropy.shannon_entropy(p, base=2)
    for alpha in (1 - 1e-4, 1 + 1e-4):
        assert abs(entropy.renyi_entropy(p, alpha, base=2) - shannon) <= 1e-3


def test_renyi_strict_and_limit_modes():
    with pytest.raises(ValueError):
        entropy.renyi_entropy([0.5, 0.5], 1.0)
    got = entropy.renyi_entropy([0.25, 0.75], 1.0, limit=True)
    assert got == pytest.approx(entropy.shannon_entropy([0.25, 0.75], base=2), abs=1e-14)


def test_renyi_additive_over_products(rng):
    for alpha in (0.5, 2.0, 3.0):
        a = rng.uniform(0.1, 1.0, size=3)
        a /= a.sum()
        b = rng.uniform(0.1, 1.0, size=4)
        b /= b.sum()
        joint = np.outer(a, b).ravel()
        lhs = entropy.renyi_entropy(joint, alpha, base=2)
        rhs = entropy.renyi_entropy(a, alpha, base=2) + entropy.renyi_entropy(b, alpha, base=2)
        assert abs(lhs - rhs) <= 1e-10


# --- quantum KN averages ---

def test_kn_quantum_linear_is_trace(rng):
    rho = random_density(rng, 3)
    obs = random_hermitian(rng, 3)
    got = entropy.kn_quantum_average(rho, obs, entropy.kn_linear())
    assert got == pytest.approx(np.trace(rho @ obs).real, abs=1e-12)


def test_kn_quantum_eigenstate_is_dispersion_free(rng):
    obs = random_hermitian(rng, 3) + 5.0 * np.eye(3)  # shift spectrum into sqrt domain
    w, v = qstate.eigh(obs)
    rho = np.outer(v[:, 1], v[:, 1].conj())
    got = entropy.kn_quantum_average(rho, obs, entropy.kn_sqrt())
    assert got == pytest.approx(w[1], abs=1e-10)


def test_kn_quantum_factor_observable_reduces(rng):
    # <phi(X) (x) I> equals the KN average against the reduced state
    rho = random_density(rng, 4)
    x = random_hermitian(rng, 2) + 4.0 * np.eye(2)
    phi = entropy.kn_sqrt()
    lifted = np.kron(x, np.eye(2))
    full = entropy.kn_quantum_average(rho, lifted, phi)
    rho1 = qstate.partial_trace(rho, (2, 2), 1)
    reduced = entropy.kn_quantum_average(rho1, x, phi)
    assert abs(full - reduced) <= 1e-10


def test_kn_quantum_domain_violation(rng):
    rho = random_density(rng, 2)
    with pytest.raises(ValueError):
        entropy.kn_quantum_average(rho, qstate.sigma_z, entropy.kn_sqrt())


# --- the decomposition identity ---

def test_kn_decomposition_endpoints():
    lhs, rhs = entropy.kn_decomposition_check(1.0)
    assert lhs == pytest.approx(1.0, abs=1e-14)
    assert rhs == pytest.approx(1.0, abs=1e-12)
    lhs, rhs = entropy.kn_decomposition_check(0.5)
    assert lhs == pytest.approx(0.0, abs=1e-14)
    assert abs(rhs) <= 1e-12


def test_kn_decomposition_random_sweep(rng):
    worst = 0.0
    for p_plus in rng.uniform(0, 1, size=1000):
        lhs, rhs = entropy.kn_decomposition_check(float(p_plus))
        worst = max(worst, abs(lhs - rhs))
    assert worst <= 1e-12


# --- Tsallis ---

def test_tsallis_uniform_two_q2():
    assert entropy.tsallis_entropy([0.5, 0.5], 2.0) == pytest.approx(0.5, abs=1e-14)


def test_tsallis_deterministic_zero():
    for q in (0.5, 2.0, 3.7):
        assert entropy.tsallis_entropy([1.0, 0.0], q) == 0.0


def test_tsallis_pseudo_additivity(rng):
    for q in (0.5, 2.0, 3.0):
        a = rng.uniform(0.1, 1.0, size=3)
        a /= a.sum()
        b = rng.uniform(0.1, 1.0, size=3)
        b /= b.sum()
        joint = np.outer(a, b).ravel()
        sa = entropy.tsallis_entropy(a, q)
        sb = entropy.tsallis_entropy(b, q)
        lhs = entropy.tsallis_entropy(joint, q)
        assert abs(lhs - (sa + sb + (1 - q) * sa * sb)) <= 1e-12


def test_tsallis_limit_is_natural_log_shannon(rng):
    p = rng.uniform(0.05, 1.0, size=5)
    p /= p.sum()
    nat = entropy.shannon_entropy(p, base=math.e)
    assert entropy.tsallis_entropy(p, 1.0, limit=True) == pytest.approx(nat, abs=1e-14)
    for q in (1 - 1e-4, 1 + 1e-4):
        assert abs(entropy.tsallis_entropy(p, q) - nat) <= 1e-3
    with pytest.raises(ValueError):
        entropy.tsallis_entropy(p, 1.0)


def test_q_deformation_linearization_error_is_second_order():
    # p^q - p = (q-1) p ln p + O((q-1)^2), so the residual shrinks 4x when
    # the offset halves
    grid = np.linspace(1e-4, 1.0, 500)

    def max_residual(q):
        return np.max(np.abs(grid**q - grid - (q - 1) * grid * np.log(grid)))

    for delta in (1e-2, 1e-3):
        big, small = max_residual(1 + delta), max_residual(1 + delta / 2)
        assert big / small == pytest.approx(4.0, rel=0.15)


# --- escort distributions ---

def test_escort_identity_at_q1(rng):
    p = rng.uniform(0.1, 1.0, size=4)
    p /= p.sum()
    assert np.max(np.abs(entropy.escort_distribution(p, 1.0) - p)) <= 1e-14


def test_escort_concentrates_at_large_q():
    esc = entropy.escort_distribution([0.7, 0.3], 20.0)
    assert esc[0] > 0.99


def test_escort_uniform_fixed_point():
    p = np.full(5, 0.2)
    for q in (0.5, 3.0, 10.0):
        assert np.max(np.abs(entropy.escort_distribution(p, q) - p)) <= 1e-12


def test_escort_sums_to_one(rng):
    for _ in range(20):
        p = rng.uniform(0, 1, size=6)
        p /= p.sum()
        q = rng.uniform(0.2, 8.0)
        assert entropy.escort_distribution(p, q).sum() == pytest.approx(1.0, abs=1e-12)


# --- q internal energy ---

def test_q_internal_energy_reduces_to_mean_at_q1(rng):
    p = rng.uniform(0.1, 1.0, size=4)
    p /= p.sum()
    e = rng.normal(size=4)
    assert entropy.q_internal_energy(p, e, 1.0) == pytest.approx(float(p @ e), abs=1e-12)


def test_q_internal_energy_constant_energies():
    assert entropy.q_internal_energy([0.2, 0.8], [3.0, 3.0], 2.7) == pytest.approx(3.0, abs=1e-12)


def test_q_internal_energy_two_term_value():
    got = entropy.q_internal_energy([0.7, 0.3], [0.0, 1.0], 2.0)
    assert got == pytest.approx(0.09 / 0.58, abs=1e-12)


def test_q_internal_energy_length_mismatch():
    with pytest.raises(ValueError):
        entropy.q_internal_energy([0.5, 0.5], [1.0], 2.0)
