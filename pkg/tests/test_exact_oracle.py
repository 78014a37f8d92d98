import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qchaos.boson_game import Angle, BosonConfig, roots_of_unity
from qchaos.errors import InvalidConfig, ResourceLimit
from qchaos.exact_oracle import (
    StateVector,
    boson_annihilator,
    boson_operators,
    boson_simulate,
    coherent_state,
    fermion_operators,
    fermion_simulate,
    partial_trace_system,
    purity,
    required_truncation,
    step_hamiltonian,
    truncation_tail,
    von_neumann_entropy,
)
from qchaos.fermion_game import QuantumConfig, entropy


def dense(a):
    return a.toarray() if hasattr(a, "toarray") else np.asarray(a)


# --- operator algebra ----------------------------------------------------------

@pytest.mark.parametrize("L", [1, 2, 4])
def test_fermion_anticommutators(L):
    ops = [dense(f) for f in fermion_operators(L)]
    eye = np.eye(2**L)
    for i, fi in enumerate(ops):
        for j, fj in enumerate(ops):
            assert np.abs(fi @ fj.conj().T + fj.conj().T @ fi - (i == j) * eye).max() <= 1e-12
            assert np.abs(fi @ fj + fj @ fi).max() <= 1e-12


def test_boson_commutators_on_untruncated_block():
    d, L = 6, 2
    ops = [dense(b) for b in boson_operators(L, d)]
    # basis states with every occupation below d-1
    keep = [k for k in range(d**L) if all(o < d - 1 for o in np.unravel_index(k, (d,) * L))]
    for i, bi in enumerate(ops):
        for j, bj in enumerate(ops):
            c = (bi @ bj.conj().T - bj.conj().T @ bi)[np.ix_(keep, keep)]
            assert np.abs(c - (i == j) * np.eye(len(keep))).max() <= 1e-12


def test_step_hamiltonian_is_hermitian():
    ann = fermion_operators(4)
    H = dense(step_hamiltonian(ann, [0.3, 1.0, 0.5, 0.2], 0.8, 2))
    assert np.abs(H - H.conj().T).max() == 0


# --- partial trace and entropy ---------------------------------------------------

def test_partial_trace_product_state():
    phi = np.array([0.6, 0.8j])
    psi = np.array([1, 1, 1, 1]) / 2
    rho = partial_trace_system(StateVector(np.kron(phi, psi), (2, 2, 2)))
    np.testing.assert_allclose(rho, np.outer(phi, phi.conj()), atol=1e-15)
    assert purity(rho) == pytest.approx(1.0, abs=1e-14)
    assert von_neumann_entropy(rho) == pytest.approx(0.0, abs=1e-12)


def test_partial_trace_bell_like():
    psi = np.array([0, 1, 1, 0]) / math.sqrt(2)
    rho = partial_trace_system(StateVector(psi, (2, 2)))
    np.testing.assert_allclose(rho, np.eye(2) / 2, atol=1e-15)
    assert von_neumann_entropy(rho) == pytest.approx(math.log(2), abs=1e-14)


@given(seed=st.integers(0, 2**32), dims=st.lists(st.integers(2, 4), min_size=2, max_size=4))
@settings(max_examples=30)
def test_partial_trace_has_unit_trace(seed, dims):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=math.prod(dims)) + 1j * rng.normal(size=math.prod(dims))
    rho = partial_trace_system(StateVector(v / np.linalg.norm(v), tuple(dims)))
    assert abs(np.trace(rho) - 1) <= 1e-12
    assert np.abs(rho - rho.conj().T).max() <= 1e-14
    assert np.linalg.eigvalsh(rho).min() >= -1e-12


def test_von_neumann_examples():
    assert von_neumann_entropy(np.diag([0.35, 0.65])) == pytest.approx(entropy(0.65), abs=1e-10)
    with pytest.raises(InvalidConfig):
        von_neumann_entropy(np.diag([1.1, -0.1]))
    with pytest.raises(InvalidConfig):
        von_neumann_entropy(np.array([[0.5, 0.2], [0.0, 0.5]]))


def test_state_vector_rejects_bad_dims():
    with pytest.raises(InvalidConfig):
        StateVector(np.ones(6) / math.sqrt(6), (2, 2))


# --- fermion oracle ----------------------------------------------------------------

def test_fermion_full_swap():
    rep = fermion_simulate(QuantumConfig(0, math.pi / 2), [1, 0, 1])
    np.testing.assert_allclose([r.occupation for r in rep.records], [1, 0, 1], atol=1e-12)


@pytest.mark.parametrize("omega", [0.0, 1.0])
@pytest.mark.parametrize("lt", [math.pi / 6, math.pi / 4, math.pi / 3])
def test_fermion_oracle_agreement(omega, lt):
    rng = np.random.default_rng(17)
    gammas = rng.integers(0, 2, size=6).tolist()
    rep = fermion_simulate(QuantumConfig(omega, lt), gammas)
    assert rep.max_delta <= 1e-10
    assert rep.max_abs_a0 <= 1e-12
    for r in rep.records:
        assert r.offdiag <= 1e-10
        assert abs(r.norm - 1) <= 1e-10
        assert r.idle_fidelity >= 1 - 1e-10
        assert r.entropy == pytest.approx(entropy(r.occupation), abs=1e-10)


def test_fermion_oracle_with_tau():
    rep = fermion_simulate(QuantumConfig(0.4, 0.5, tau=1.7), [1, 1, 0, 1])
    assert rep.max_delta <= 1e-10


def test_fermion_inhomogeneous_omegas_leave_occupation_unchanged():
    # occupations do not depend on the mode frequencies when they are all equal
    gammas = [1, 0, 1, 1]
    a = fermion_simulate(QuantumConfig(0.7, 0.9, omegas=(0.7,) * 5), gammas)
    assert a.max_delta <= 1e-10


def test_fermion_oracle_errors():
    with pytest.raises(ResourceLimit):
        fermion_simulate(QuantumConfig(0, 1), [0] * 11)
    with pytest.raises(InvalidConfig):
        fermion_simulate(QuantumConfig(0, 1), [0, 2])
    with pytest.raises(InvalidConfig):
        fermion_simulate(QuantumConfig(0, 1), [0, 1], m=3)


def test_report_json_round_trip():
    rep = fermion_simulate(QuantumConfig(0, 0.6), [1, 0])
    data = json.loads(rep.to_json())
    assert data["kind"] == "fermion" and len(data["steps"]) == 2
    rec = data["steps"][0]
    assert {"n", "expect_a0", "occupation", "entropy", "purity", "delta_vs_closed_form"} <= rec.keys()
    assert len(rec["expect_a0"]) == 2


# --- boson oracle -------------------------------------------------------------------

def bcfg(omega, lam, betas=roots_of_unity(3), chi0=0.5 + 0.3j):
    return BosonConfig(Angle.parse(omega), Angle.parse(lam), tuple(betas), chi0=chi0)


def test_coherent_state_is_eigenvector():
    d, alpha = 30, 0.8 - 0.4j
    v = coherent_state(alpha, d)
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-15)
    b = boson_annihilator(d)
    np.testing.assert_allclose((b @ v)[: d - 5], alpha * v[: d - 5], atol=1e-12)
    np.testing.assert_allclose(coherent_state(0, 4), [1, 0, 0, 0])


def test_truncation_tail_and_requirement():
    assert truncation_tail(1.0, 24) < 1e-8
    assert truncation_tail(4.0, 5) > 0.1
    d = required_truncation(2.0)
    assert truncation_tail(2.0, d) <= 1e-8 < truncation_tail(2.0, d - 1)


def test_boson_free_evolution():
    c = bcfg("0.7", "0:pi", chi0=0.6 + 0.2j)
    rep = boson_simulate(c, [0, 1], d=20)
    for r in rep.records:
        assert r.fidelity >= 1 - 1e-8
        assert abs(r.expect_a0 - np.exp(-0.7j * r.n) * c.chi0) <= 1e-8


def test_boson_full_swap():
    c = bcfg("0:pi", "1/2:pi")
    rep = boson_simulate(c, [2], d=20)
    assert abs(rep.records[0].expect_a0 - 1j * c.betas[2]) <= 1e-6


@pytest.mark.parametrize("omega, lam", [("2:pi", "1/3:pi"), ("3/5:pi", "1/3:pi"), ("1.0", "0.4")])
def test_boson_full_engine_two_bath_modes(omega, lam):
    rep = boson_simulate(bcfg(omega, lam), [0, 2], d=16, engine="full")
    assert rep.max_delta <= 1e-6 and rep.min_purity >= 1 - 1e-6
    for r in rep.records:
        assert r.fidelity >= 1 - 1e-6 and abs(r.norm - 1) <= 1e-10 and r.idle_fidelity >= 1 - 1e-10


def test_full_and_sequential_engines_agree():
    c = bcfg("3/5:pi", "1/4:pi")
    a = boson_simulate(c, [1, 0], d=16, engine="full")
    b = boson_simulate(c, [1, 0], d=16, engine="sequential")
    for ra, rb in zip(a.records, b.records):
        np.testing.assert_allclose(ra.rho, rb.rho, atol=1e-10)


def test_boson_sequential_five_steps():
    rep = boson_simulate(bcfg("2:pi", "1/3:pi"), [0, 1, 2, 1, 0], d=24)
    assert rep.config["engine"] == "sequential"
    assert rep.max_delta <= 1e-6 and rep.min_purity >= 1 - 1e-6


def test_boson_oracle_errors():
    c = bcfg("2:pi", "1/3:pi", chi0=2.5)
    with pytest.raises(ResourceLimit, match="need d >="):
        boson_simulate(c, [0], d=8)
    with pytest.raises(ResourceLimit):
        boson_simulate(bcfg("2:pi", "1/3:pi"), [0, 1, 2, 0], d=24, engine="full")
    with pytest.raises(InvalidConfig):
        boson_simulate(bcfg("2:pi", "1/3:pi"), [0, 3], d=16)
    with pytest.raises(InvalidConfig):
        boson_simulate(bcfg("2:pi", "1/3:pi"), [0], d=16, engine="gpu")
