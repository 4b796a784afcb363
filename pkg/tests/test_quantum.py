import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qemcmc.errors import MismatchedDimensions
from qemcmc.model import MarkedStateHamiltonian
from qemcmc.proposal import validate_kernel
from qemcmc.quantum import (
    GROVER,
    TRANSVERSE,
    MixerSpec,
    PropagatorConfig,
    apply_hamiltonian,
    basis_state,
    dense_hamiltonian,
    evolve,
    grover_closed_form,
    quantum_kernel,
    quantum_proposal_column,
    resonance_field,
    structured_grover_kernel,
)

DENSE = PropagatorConfig(method="dense")
KRYLOV = PropagatorConfig(method="krylov")


def _rng(seed=7):
    return np.random.Generator(np.random.Philox(seed))


def _random_state(rng, dim):
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return psi / np.linalg.norm(psi)


# ---------------------------------------------------------------------------
# Hamiltonian application

def test_marked_state_is_eigenstate_without_mixing():
    h_c = MarkedStateHamiltonian(4, 1.5, marked=6)
    psi = basis_state(4, 6)
    out = apply_hamiltonian(h_c, MixerSpec(GROVER, 0.0), psi)
    assert np.allclose(out, -1.5 * 4 * psi)


def test_transverse_action_on_basis_state():
    h_c = MarkedStateHamiltonian(3, 1.0, marked=5)   # alpha term absent at x=0
    out = apply_hamiltonian(h_c, MixerSpec(TRANSVERSE, 0.7), basis_state(3, 0))
    expected = np.zeros(8)
    for i in range(3):
        expected[1 << i] = 0.7
    assert np.allclose(out, expected)


def test_grover_uniform_state_eigenstate():
    n = 4
    h_c = MarkedStateHamiltonian(n, 1.0, marked=3)
    s = np.full(1 << n, 2.0 ** (-n / 2), dtype=complex)
    out = apply_hamiltonian(MarkedStateHamiltonian(n, 1e-300), MixerSpec(GROVER, 0.9), s)
    # alpha ~ 0: |s> is an eigenstate with eigenvalue h*N
    assert np.allclose(out, 0.9 * n * s, atol=1e-12)


def test_apply_matches_dense_matrix():
    rng = _rng()
    for variant in (GROVER, TRANSVERSE):
        h_c = MarkedStateHamiltonian(4, 1.2, marked=9)
        mixer = MixerSpec(variant, -0.8)
        ham = dense_hamiltonian(h_c, mixer)
        psi = _random_state(rng, 16)
        assert np.allclose(apply_hamiltonian(h_c, mixer, psi), ham @ psi)


def test_apply_dimension_mismatch():
    with pytest.raises(MismatchedDimensions):
        apply_hamiltonian(MarkedStateHamiltonian(3, 1.0),
                          MixerSpec(GROVER, 1.0), np.zeros(4, dtype=complex))


# ---------------------------------------------------------------------------
# propagators

def test_evolve_t0_identity():
    psi = basis_state(4, 11)
    out = evolve(MarkedStateHamiltonian(4, 1.0), MixerSpec(GROVER, 1.0), psi, 0.0)
    assert np.allclose(out, psi)


def test_evolve_norm_preserved():
    rng = _rng(11)
    h_c = MarkedStateHamiltonian(6, 1.0, marked=17)
    for variant, cfg in ((GROVER, DENSE), (TRANSVERSE, KRYLOV)):
        psi = _random_state(rng, 64)
        out = evolve(h_c, MixerSpec(variant, 1.3), psi, 2.7, cfg)
        assert abs(np.linalg.norm(out) - 1.0) < 1e-10


def test_evolve_composition():
    rng = _rng(13)
    h_c = MarkedStateHamiltonian(5, 0.9, marked=2)
    mixer = MixerSpec(TRANSVERSE, 0.6)
    psi = _random_state(rng, 32)
    whole = evolve(h_c, mixer, psi, 1.9, KRYLOV)
    parts = evolve(h_c, mixer, evolve(h_c, mixer, psi, 0.8, KRYLOV), 1.1, KRYLOV)
    assert np.max(np.abs(whole - parts)) < 1e-9


def test_krylov_matches_dense():
    rng = _rng(17)
    for n in (4, 7, 9):
        h_c = MarkedStateHamiltonian(n, 1.1, marked=1)
        for variant in (GROVER, TRANSVERSE):
            mixer = MixerSpec(variant, rng.uniform(-2, 2))
            psi = _random_state(rng, 1 << n)
            t = rng.uniform(0.1, 3.0)
            a = evolve(h_c, mixer, psi, t, DENSE)
            b = evolve(h_c, mixer, psi, t, KRYLOV)
            assert 1.0 - abs(np.vdot(a, b)) < 1e-10


def test_evolve_rejects_unnormalized():
    psi = np.ones(16, dtype=complex)
    with pytest.raises(ValueError):
        evolve(MarkedStateHamiltonian(4, 1.0), MixerSpec(GROVER, 1.0), psi, 1.0)


def test_grover_two_level_closure():
    # from an unmarked start, all other unmarked states carry equal probability
    h_c = MarkedStateHamiltonian(5, 1.0, marked=0)
    out = evolve(h_c, MixerSpec(GROVER, 0.7), basis_state(5, 9), 1.4, DENSE)
    probs = np.abs(out) ** 2
    rest = np.delete(probs, [0, 9])
    assert np.ptp(rest) < 1e-12


# ---------------------------------------------------------------------------
# kernels

def test_kernel_t0_identity():
    kern = quantum_kernel(MarkedStateHamiltonian(3, 1.0),
                          MixerSpec(TRANSVERSE, 1.0), 0.0, DENSE)
    assert np.allclose(kern.dense(), np.eye(8), atol=1e-12)


def test_grover_kernel_matches_closed_form():
    h_c = MarkedStateHamiltonian(4, 1.0)
    kern = quantum_kernel(h_c, MixerSpec(GROVER, 1.0), 1.0, DENSE)
    cf = grover_closed_form(4, 1.0, 1.0, 1.0)
    q = kern.dense()
    assert q[0, 5] == pytest.approx(cf.q_marked, abs=1e-10)
    assert q[7, 5] == pytest.approx(cf.q_unmarked, abs=1e-10)
    assert q[0, 0] == pytest.approx(cf.q_marked_stay, abs=1e-10)
    assert q[5, 5] == pytest.approx(cf.q_unmarked_stay, abs=1e-10)


def test_structured_kernel_matches_simulation():
    h_c = MarkedStateHamiltonian(6, 1.3, marked=40)
    sim = quantum_kernel(h_c, MixerSpec(GROVER, -0.9), 2.1, DENSE).dense()
    structured = structured_grover_kernel(h_c, -0.9, 2.1).dense()
    assert np.max(np.abs(sim - structured)) < 1e-12


def test_rank2_fast_path_matches_dense():
    h_c = MarkedStateHamiltonian(5, 0.8, marked=3)
    auto = quantum_kernel(h_c, MixerSpec(GROVER, 1.7), 0.9)     # rank-2 path
    sim = quantum_kernel(h_c, MixerSpec(GROVER, 1.7), 0.9, DENSE)
    assert np.max(np.abs(auto.dense() - sim.dense())) < 1e-12


def test_transverse_kernel_symmetric_doubly_stochastic():
    kern = quantum_kernel(MarkedStateHamiltonian(4, 1.0),
                          MixerSpec(TRANSVERSE, 1.0), 1.0, DENSE)
    cert = validate_kernel(kern)
    assert cert.max_asymmetry < 1e-10
    assert cert.max_column_deviation < 1e-10
    assert cert.max_row_deviation < 1e-10


def test_proposal_column_point_mass_at_t0():
    col = quantum_proposal_column(MarkedStateHamiltonian(4, 1.0),
                                  MixerSpec(TRANSVERSE, 1.0), 0.0, 6, DENSE)
    expected = np.zeros(16)
    expected[6] = 1.0
    assert np.allclose(col, expected)


def test_proposal_column_normalized():
    col = quantum_proposal_column(MarkedStateHamiltonian(12, 1.0),
                                  MixerSpec(TRANSVERSE, 1.0), 1.0, 0)
    assert abs(col.sum() - 1.0) < 1e-10
    assert np.delete(col, 0).sum() == pytest.approx(1.0 - col[0], abs=1e-12)


def test_grover_column_uniform_off_marked():
    col = quantum_proposal_column(MarkedStateHamiltonian(8, 1.0),
                                  MixerSpec(GROVER, -1.0), 3.0, 0)
    assert np.ptp(col[1:]) < 1e-15


# ---------------------------------------------------------------------------
# closed form

def test_closed_form_t0():
    cf = grover_closed_form(5, 1.0, 1.0, 0.0)
    assert cf.q_marked == 0.0
    assert cf.k_factor == pytest.approx(0.0, abs=1e-15)


def test_closed_form_no_mixing():
    cf = grover_closed_form(5, 1.0, 0.0, 2.0)
    assert cf.q_marked == 0.0


def test_closed_form_bloch_vector_normalized():
    for h in (-1.5, -0.3, 0.4, 2.0):
        cf = grover_closed_form(6, 1.0, h, 1.0)
        assert cf.n_z ** 2 + cf.n_x ** 2 == pytest.approx(1.0, abs=1e-12)


def test_closed_form_column_normalization():
    cf = grover_closed_form(6, 1.0, 1.0, 1.0)
    assert (2 ** 6 - 1) * cf.q_marked + cf.q_marked_stay == pytest.approx(1.0, abs=1e-12)
    assert cf.q_marked + (2 ** 6 - 2) * cf.q_unmarked + cf.q_unmarked_stay \
        == pytest.approx(1.0, abs=1e-12)


def test_small_gamma_limit_is_removable():
    # near-degenerate gamma: q_marked ~ (N h t / 2^N)^2, no 0/0 blowup
    n, alpha = 20, 1.0
    h = resonance_field(alpha, n)
    cf = grover_closed_form(n, alpha, h, 1e-6)
    approx = (n * h * 1e-6 / 2.0 ** n) ** 2
    assert cf.q_marked == pytest.approx(approx, rel=1e-6)


def test_resonance_field_values():
    assert resonance_field(1.0, 1) == pytest.approx(-2.0)
    assert resonance_field(1.0, 30) == pytest.approx(-1.0, abs=1e-8)


def test_resonance_slows_two_level_frequency():
    on = grover_closed_form(10, 1.0, resonance_field(1.0, 10), 1.0).omega
    off = grover_closed_form(10, 1.0, 1.0, 1.0).omega
    assert on <= off / 16.0


@settings(max_examples=20, deadline=None)
@given(
    h=st.floats(min_value=-2.0, max_value=2.0),
    t=st.floats(min_value=0.0, max_value=4.0),
)
def test_closed_form_probabilities_valid(h, t):
    cf = grover_closed_form(5, 1.0, h, t)
    for q in (cf.q_marked, cf.q_unmarked, cf.q_marked_stay, cf.q_unmarked_stay):
        assert -1e-12 <= q <= 1.0 + 1e-12
