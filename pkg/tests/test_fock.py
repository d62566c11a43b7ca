import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from su11dpso import fock
from su11dpso.fock import (
    AnnihilatedStateError,
    CutoffInadequateError,
    StateEnsemble,
    TwoModeDensity,
    TwoModeState,
    apply_loss_channel,
    apply_phase_shift,
    apply_photon_subtraction,
    apply_two_mode_squeeze,
    converged,
    expectation,
    prepare_input,
)
from su11dpso.observables import phase_sensitivity
from su11dpso.params import InterferometerParams as P
from su11dpso.qfi import qfi_ideal


def fock_state(cutoff, **amps):
    a = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    for key, c in amps.items():
        na, nb = int(key[1]), int(key[2])
        a[na, nb] = c
    return TwoModeState(cutoff, a)


def density(state):
    v = state.amps.ravel()
    return TwoModeDensity(state.cutoff, np.outer(v, v.conj()))


def normalized(x, obj):
    return (expectation(obj, x) / expectation(obj, (0, 0, 0, 0))).real


# ---- input ----

def test_vacuum_input():
    s = prepare_input(0, 10)
    assert s.amps[0, 0] == 1 and np.count_nonzero(s.amps) == 1


def test_coherent_mean():
    assert expectation(prepare_input(1.0, 30), "na").real == pytest.approx(1.0, abs=1e-12)


def test_coherent_variance():
    s = prepare_input(2.0, 40)
    n = expectation(s, "na").real
    assert expectation(s, "na2").real + n - n * n == pytest.approx(4.0, rel=1e-12)


def test_coherent_tail_too_heavy():
    with pytest.raises(CutoffInadequateError):
        prepare_input(3.0, 12)


# ---- squeezer ----

def test_zero_gain_is_identity():
    s = prepare_input(1.2, 30)
    assert np.allclose(apply_two_mode_squeeze(s, 0.0, 0.0).amps, s.amps, atol=1e-15)


def test_squeezed_vacuum_photon_number():
    s = apply_two_mode_squeeze(prepare_input(0, 80), 1.0, 0.0)
    assert expectation(s, "na").real == pytest.approx(math.sinh(1.0) ** 2, rel=1e-12)
    assert s.norm2 == pytest.approx(1.0, abs=1e-12)


def test_squeezer_edge_check():
    with pytest.raises(CutoffInadequateError):
        apply_two_mode_squeeze(prepare_input(0, 10), 1.5, 0.0)


@st.composite
def low_states(draw):
    re = draw(st.lists(st.floats(-1, 1), min_size=16, max_size=16))
    im = draw(st.lists(st.floats(-1, 1), min_size=16, max_size=16))
    amps = np.zeros((61, 61), dtype=complex)
    amps[:4, :4] = (np.array(re) + 1j * np.array(im)).reshape(4, 4)
    nrm = np.linalg.norm(amps)
    if nrm < 1e-3:
        amps[0, 0] = 1.0
        nrm = np.linalg.norm(amps)
    return TwoModeState(60, amps / nrm)


@given(low_states(), st.floats(0.0, 0.6))
def test_balanced_squeezers_cancel(state, g):
    out = apply_two_mode_squeeze(apply_two_mode_squeeze(state, g, 0.0), g, math.pi)
    assert np.max(np.abs(out.amps - state.amps)) < 1e-10


@given(low_states(), st.floats(0.0, 0.6), st.floats(0, 2 * math.pi))
def test_squeezer_preserves_norm(state, g, theta):
    assert apply_two_mode_squeeze(state, g, theta).norm2 == pytest.approx(1.0, abs=1e-12)


# ---- subtraction ----

def test_subtraction_order_zero_is_identity():
    s = prepare_input(1.0, 20)
    assert apply_photon_subtraction(s, 0.3, 0.7, 0).amps is s.amps


def test_subtraction_lowers_single_photon():
    out = apply_photon_subtraction(fock_state(4, n10=1.0), 1.0, 0.0, 1)
    assert out.amps[0, 0] == pytest.approx(1.0) and out.norm2 == pytest.approx(1.0)


def test_subtraction_on_coherent_input():
    out = apply_photon_subtraction(prepare_input(1.5, 40), 0.3, 0.7, 1)
    assert out.norm2 == pytest.approx(0.09 * 2.25, rel=1e-12)


def test_subtraction_of_vacuum_annihilates():
    with pytest.raises(AnnihilatedStateError):
        apply_photon_subtraction(prepare_input(0, 6), 0.5, 0.5, 1)


# ---- loss ----

def test_full_transmission_is_identity():
    s = prepare_input(1.0, 20)
    out = apply_loss_channel(s, 1.0, "a")
    assert len(out.branches) == 1 and np.allclose(out.branches[0], s.amps)
    rho = density(s)
    assert np.allclose(apply_loss_channel(rho, 1.0, "b").rho, rho.rho)


def test_zero_transmission_empties_mode():
    s = apply_two_mode_squeeze(prepare_input(1.0, 40), 0.5, 0.0)
    rho = apply_loss_channel(s, 0.0, "a").to_density()
    diag = np.real(np.diag(rho.rho)).reshape(41, 41)
    assert diag[0].sum() == pytest.approx(1.0, abs=1e-12)


def test_coherent_amplitude_damped():
    out = apply_loss_channel(prepare_input(1.3, 40), 0.6, "a")
    assert expectation(out, (0, 1, 0, 0)) == pytest.approx(math.sqrt(0.6) * 1.3, rel=1e-12)


@pytest.mark.parametrize("mode", ["a", "b"])
def test_loss_preserves_trace(mode):
    s = apply_two_mode_squeeze(prepare_input(1.0, 40), 0.4, 0.0)
    assert apply_loss_channel(s, 0.55, mode).trace == pytest.approx(1.0, abs=1e-12)
    small = apply_two_mode_squeeze(prepare_input(0.5, 12), 0.2, 0.0, tail_tol=1.0)
    assert apply_loss_channel(density(small), 0.55, mode).trace == pytest.approx(small.norm2, abs=1e-12)


def test_kraus_matches_beam_splitter_with_environment():
    # two photons shared between the modes; cutoff 2 holds everything
    state = fock_state(2, n20=1.0, n11=1.0j, n02=-0.5)
    state = TwoModeState(2, state.amps / math.sqrt(state.norm2))
    T = 0.37
    kraus = apply_loss_channel(density(state), T, "a").as_tensor()

    d = 3
    low = np.diag(np.sqrt(np.arange(1, d)), 1)
    eye = np.eye(d)
    a, e = np.kron(low, eye), np.kron(eye, low)  # mode a (x) environment
    theta = math.acos(math.sqrt(T))
    u = expm(theta * (a.conj().T @ e - a @ e.conj().T))
    # psi[n_a, n_b] -> psi[n_a, n_env, n_b] with the environment in vacuum
    ext = np.zeros((d, d, d), dtype=complex)
    ext[:, 0, :] = state.amps
    out = np.einsum("ij,jb->ib", u, ext.reshape(d * d, d)).reshape(d, d, d)
    explicit = np.einsum("aeb,ced->abcd", out, out.conj())
    assert np.max(np.abs(explicit - kraus)) < 1e-14


def test_ensemble_and_density_paths_agree():
    # same truncation on both paths, so the edge check is switched off
    s = apply_photon_subtraction(apply_two_mode_squeeze(prepare_input(0.8, 14), 0.3, 0.0, tail_tol=1.0),
                                 0.4, 0.6, 1)
    ens = apply_loss_channel(apply_loss_channel(s, 0.6, "a"), 0.6, "b")
    rho = apply_loss_channel(apply_loss_channel(density(s), 0.6, "a"), 0.6, "b")
    assert np.max(np.abs(ens.to_density().rho - rho.rho)) < 1e-14


def test_banded_moments_match_density_path():
    p = P(m=1, s=0.4, t=0.6, g=0.3, alpha=0.7, T=0.6)
    n = 28
    s = apply_photon_subtraction(apply_two_mode_squeeze(prepare_input(p.alpha, n), p.g, 0.0), p.s, p.t, 1)
    rho = apply_loss_channel(apply_loss_channel(density(s), p.T, "a"), p.T, "b")
    idx = [(0, 0, 0, 0), (1, 1, 0, 0), (2, 1, 0, 1), (0, 2, 1, 0), (1, 1, 1, 1), (2, 2, 2, 2)]
    banded = fock.oracle_q_moments(p, idx, cutoff=n)
    for i, b in zip(idx, banded):
        assert expectation(rho, i) == pytest.approx(b, rel=1e-9, abs=1e-12)


# ---- phase and expectation ----

def test_phase_shift_identities():
    s = apply_two_mode_squeeze(prepare_input(1.0, 30), 0.3, 0.0)
    assert np.array_equal(apply_phase_shift(s, 0.0).amps, s.amps)
    assert np.max(np.abs(apply_phase_shift(s, 2 * math.pi).amps - s.amps)) < 1e-12
    for phi in (0.3, 1.7, -2.2):
        assert expectation(apply_phase_shift(s, phi), "na").real == pytest.approx(
            expectation(s, "na").real, rel=1e-13)


def test_phase_shift_on_mixed_states():
    s = apply_loss_channel(apply_two_mode_squeeze(prepare_input(0.6, 10), 0.2, 0.0, tail_tol=1.0), 0.5, "a")
    ens = apply_phase_shift(s, 0.9)
    rho = apply_phase_shift(s.to_density(), 0.9)
    assert np.allclose(ens.to_density().rho, rho.rho, atol=1e-15)


def test_vacuum_expectations_vanish():
    vac = prepare_input(0, 5)
    for obs in [(1, 1, 0, 0), (0, 2, 0, 0), (1, 0, 0, 1), (1, 1, 1, 1), "X", "nanb"]:
        assert expectation(vac, obs) == 0


def test_coherent_number():
    assert expectation(prepare_input(1.4, 40), (1, 1, 0, 0)).real == pytest.approx(1.96, rel=1e-12)


# ---- convergence ----

def test_converged_stops_when_values_settle():
    seen = []

    def compute(n):
        seen.append(n)
        return np.array([1.0 + math.exp(-n)])

    value, n = converged(compute, 10)
    assert value[0] == pytest.approx(1.0, abs=1e-9)
    assert n - 8 in seen and n in seen


def test_converged_gives_up():
    with pytest.raises(CutoffInadequateError):
        converged(lambda n: np.array([float(n)]), 10, max_cutoff=40)


# ---- oracle summaries ----

def test_oracle_sensitivity_examples():
    p = P(m=0, g=1.0, alpha=1.0, T=1.0, phi=1.0)
    assert fock.oracle_sensitivity(p) == pytest.approx(phase_sensitivity(p), rel=1e-6)
    assert fock.oracle_sensitivity(p.replace(phi=0.0)) > 1e3


def test_oracle_qfi_routes():
    p = P(m=1, s=0.3, t=0.7, g=1.0, alpha=1.0)
    var_route, overlap_route = fock.oracle_qfi_pure(p, both=True)
    assert overlap_route == pytest.approx(var_route, rel=1e-3)
    assert qfi_ideal(p) == pytest.approx(var_route, rel=1e-8)


def test_oracle_qfi_coherent_only():
    assert fock.oracle_qfi_pure(P(m=0, g=0.0, alpha=1.5)) == pytest.approx(4 * 2.25, rel=1e-10)
