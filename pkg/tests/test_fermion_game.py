import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy.linalg import expm
from scipy.optimize import brentq

from qchaos.errors import InvalidConfig
from qchaos.exact_oracle import von_neumann_entropy
from qchaos.fermion_game import (
    QuantumConfig,
    coupling_weight,
    entropy,
    gaussian_parameter,
    interaction_unitary,
    reduced_density,
    run_fermion,
    step_occupation,
)
from qchaos.ifs_core import ClassicalConfig, VertexSet, run_game

angles = st.floats(-10, 10)


def test_unitary_examples():
    np.testing.assert_allclose(interaction_unitary(QuantumConfig(0, 0)), np.eye(2), atol=1e-15)
    np.testing.assert_allclose(
        interaction_unitary(QuantumConfig(0, math.pi / 2)), [[0, 1j], [1j, 0]], atol=1e-15
    )
    U = interaction_unitary(QuantumConfig(2 * math.pi, math.pi / 3))
    s = math.sqrt(3) / 2
    np.testing.assert_allclose(U, [[0.5, 1j * s], [1j * s, 0.5]], atol=1e-14)


@given(omega=angles, lam=angles, tau=st.floats(0.01, 5))
def test_unitary_is_unitary_and_matches_expm(omega, lam, tau):
    cfg = QuantumConfig(omega, lam, tau)
    U = interaction_unitary(cfg)
    assert np.abs(U.conj().T @ U - np.eye(2)).max() <= 1e-12
    T = np.array([[omega, -lam], [-lam, omega]])
    np.testing.assert_allclose(U, expm(-1j * tau * T), atol=1e-9)
    assert coupling_weight(cfg) == pytest.approx(abs(U[0, 1]) ** 2, abs=1e-12)


@pytest.mark.parametrize("lt, w", [(math.pi / 4, 0.5), (math.pi / 3, 0.75)])
def test_coupling_weight(lt, w):
    assert coupling_weight(QuantumConfig(0.3, lt)) == pytest.approx(w, abs=1e-15)


@given(lt=st.floats(math.pi / 4 + 1e-6, 3 * math.pi / 4 - 1e-6))
def test_fractal_regime(lt):
    assert coupling_weight(QuantumConfig(0, lt)) > 0.5


def test_step_occupation():
    assert step_occupation(0.3, 1, 0.5) == pytest.approx(0.65)
    assert step_occupation(0.0, 0, 0.3) == 0.0
    assert step_occupation(1.0, 1, 0.3) == 1.0
    assert step_occupation(0.42, 1, 1.0) == 1.0
    with pytest.raises(InvalidConfig):
        step_occupation(1.5, 1, 0.3)


def test_run_fermion_swap_chain():
    traj = run_fermion(QuantumConfig(0, math.pi / 2), 3, forced_gammas=[1, 0, 1])
    np.testing.assert_allclose(traj.values, [0, 1, 0, 1], atol=1e-15)


@given(w_angle=st.floats(0.05, 1.5))
def test_all_ones_geometric(w_angle):
    cfg = QuantumConfig(0, w_angle)
    n = 30
    traj = run_fermion(cfg, n, forced_gammas=[1] * n)
    np.testing.assert_allclose(traj.values, 1 - (1 - cfg.w) ** np.arange(n + 1), atol=1e-12)


def test_fermion_gap():
    cfg = QuantumConfig(0, 1.2, seed=4)
    assert cfg.w > 0.5
    N = run_fermion(cfg, 10_000).values[1:]
    assert not np.any((N > 1 - cfg.w) & (N < cfg.w))


@given(seed=st.integers(0, 2**63), lam=st.floats(0.05, 3.0))
def test_map_equivalence_with_classical_game(seed, lam):
    cfg = QuantumConfig(0.7, lam, seed=seed, stream=3)
    assume(0 < cfg.w < 1)
    N = run_fermion(cfg, 2000).values
    x = run_game(ClassicalConfig(VertexSet.interval(), cfg.w, x0=0.0, seed=seed, stream=3), 2000).values[:, 0]
    assert np.abs(N - x).max() <= 1e-12


@pytest.mark.parametrize("N", [0.0, 0.5, 0.65])
def test_reduced_density(N):
    rho = reduced_density(N)
    np.testing.assert_allclose(rho, np.diag([1 - N, N]))
    assert np.trace(rho).real == pytest.approx(1.0)
    np.testing.assert_allclose(np.linalg.eigvalsh(rho), sorted([1 - N, N]))


def test_gaussian_parameter():
    assert gaussian_parameter(0.5) == 0.0
    assert gaussian_parameter(math.exp(-1) / (1 + math.exp(-1))) == pytest.approx(1.0, abs=1e-12)
    g_ref = brentq(lambda g: math.exp(-g) / (1 + math.exp(-g)) - 0.65, -10, 10, xtol=1e-15)
    assert gaussian_parameter(0.65) == pytest.approx(g_ref, abs=1e-12)
    assert gaussian_parameter(0.65) == pytest.approx(-0.61904, abs=1e-5)
    assert gaussian_parameter(0.0) == math.inf and gaussian_parameter(1.0) == -math.inf


@given(N=st.floats(1e-6, 1 - 1e-6))
def test_gaussian_parameter_round_trip(N):
    g = gaussian_parameter(N)
    assert math.exp(-g) / (1 + math.exp(-g)) == pytest.approx(N, rel=1e-12, abs=1e-15)


def test_entropy_examples():
    assert entropy(0.0) == 0.0 and entropy(1.0) == 0.0
    assert entropy(0.5) == pytest.approx(math.log(2), abs=1e-15)
    assert entropy(0.25) == pytest.approx(von_neumann_entropy(reduced_density(0.25)), abs=1e-14)
    assert entropy(0.25) == pytest.approx(0.562335, abs=1e-6)


@given(N=st.floats(0, 1))
def test_entropy_symmetry_and_range(N):
    assume(1 - (1 - N) == N)
    assert entropy(N) == entropy(1 - N)
    assert 0.0 <= entropy(N) <= math.log(2) + 1e-15
