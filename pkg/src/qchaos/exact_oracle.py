"""Brute-force Hilbert-space realization of the repeated-interaction model.

Nothing here uses the closed-form recursions: the step Hamiltonian
``H_(n) = sum_k w_k a_k^+ a_k - l (a_0^+ a_n + a_n^+ a_0)`` is built as a matrix on
the tensor-product space and exponentiated numerically. The closed forms enter
only afterwards, as the values the oracle is compared against.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply
from scipy.stats import poisson

from qchaos.boson_game import BosonConfig, run_boson
from qchaos.errors import InvalidConfig, ResourceLimit
from qchaos.fermion_game import QuantumConfig, run_fermion

FERMION_MAX_MODES = 11
BOSON_MAX_DIM = 200_000
DENSE_MAX_DIM = 2048
TAIL_MAX = 1e-8


@dataclass
class StateVector:
    amplitudes: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        self.dims = tuple(int(d) for d in self.dims)
        if self.amplitudes.shape != (math.prod(self.dims),):
            raise InvalidConfig("amplitude vector does not match mode dimensions")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def reduced(self, k: int) -> np.ndarray:
        """Reduced density matrix of mode ``k`` (computational-basis partial trace)."""
        psi = np.moveaxis(self.amplitudes.reshape(self.dims), k, 0).reshape(self.dims[k], -1)
        return psi @ psi.conj().T


def partial_trace_system(state: StateVector) -> np.ndarray:
    return state.reduced(0)


def von_neumann_entropy(rho: np.ndarray) -> float:
    rho = np.asarray(rho, dtype=complex)
    if np.abs(rho - rho.conj().T).max() > 1e-10:
        raise InvalidConfig("density matrix is not Hermitian")
    lam = np.linalg.eigvalsh(rho)
    if lam.min() < -1e-10:
        raise InvalidConfig(f"density matrix has negative eigenvalue {lam.min():.3e}")
    lam = lam[lam > 0]
    return float(-np.sum(lam * np.log(lam)))


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.trace(rho @ rho)))


def _kron_all(mats):
    return reduce(lambda a, b: sp.kron(a, b, format="csr"), mats)


def fermion_operators(n_modes: int) -> list[sp.csr_matrix]:
    """Annihilators with a parity string over the preceding modes (mode 0 first)."""
    a = sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))
    z = sp.csr_matrix(np.diag([1.0, -1.0]))
    eye = sp.identity(2, format="csr")
    return [_kron_all([z] * k + [a] + [eye] * (n_modes - k - 1)) for k in range(n_modes)]


def boson_annihilator(d: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, d, dtype=float)), k=1)


def boson_operators(n_modes: int, d: int) -> list[sp.csr_matrix]:
    b = sp.csr_matrix(boson_annihilator(d))
    eye = sp.identity(d, format="csr")
    return [_kron_all([eye] * k + [b] + [eye] * (n_modes - k - 1)) for k in range(n_modes)]


def step_hamiltonian(ann: Sequence[sp.spmatrix], omegas: Sequence[float], lam: float, n: int) -> sp.csr_matrix:
    """Full Hamiltonian while bath mode ``n`` interacts, idle modes included."""
    H = sum(w * (a.conj().T @ a) for w, a in zip(omegas, ann))
    hop = ann[0].conj().T @ ann[n]
    return sp.csr_matrix(H - lam * (hop + hop.conj().T))


def evolve(psi: np.ndarray, H: sp.spmatrix, tau: float) -> np.ndarray:
    """Apply ``exp(-i tau H)``: dense eigendecomposition for small H, Krylov action otherwise."""
    if H.shape[0] <= DENSE_MAX_DIM:
        Hd = H.toarray()
        if np.abs(Hd - Hd.conj().T).max() > 1e-12:
            raise InvalidConfig("step Hamiltonian is not Hermitian")
        E, V = np.linalg.eigh(Hd)
        return V @ (np.exp(-1j * tau * E) * (V.conj().T @ psi))
    return expm_multiply(-1j * tau * H.tocsc(), psi)


def unitary(H: np.ndarray, tau: float) -> np.ndarray:
    if np.abs(H - H.conj().T).max() > 1e-12:
        raise InvalidConfig("step Hamiltonian is not Hermitian")
    E, V = np.linalg.eigh(H)
    return (V * np.exp(-1j * tau * E)) @ V.conj().T


@dataclass
class StepRecord:
    n: int
    expect_a0: complex
    occupation: float
    entropy: float
    purity: float
    delta_vs_closed_form: float
    norm: float = 1.0
    fidelity: float | None = None
    idle_fidelity: float | None = None
    offdiag: float | None = None
    rho: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        d = {
            "n": self.n,
            "expect_a0": [self.expect_a0.real, self.expect_a0.imag],
            "occupation": self.occupation,
            "entropy": self.entropy,
            "purity": self.purity,
            "delta_vs_closed_form": self.delta_vs_closed_form,
            "norm": self.norm,
        }
        for key in ("fidelity", "idle_fidelity", "offdiag"):
            if getattr(self, key) is not None:
                d[key] = getattr(self, key)
        return d


@dataclass
class OracleReport:
    kind: str
    config: dict
    records: list[StepRecord]
    truncation_tail: float = 0.0

    @property
    def max_delta(self) -> float:
        return max((r.delta_vs_closed_form for r in self.records), default=0.0)

    @property
    def max_abs_a0(self) -> float:
        return max((abs(r.expect_a0) for r in self.records), default=0.0)

    @property
    def min_purity(self) -> float:
        return min((r.purity for r in self.records), default=1.0)

    def to_json(self) -> str:
        body = {
            "kind": self.kind,
            "config": self.config,
            "truncation_tail": self.truncation_tail,
            "steps": [r.to_dict() for r in self.records],
        }
        return json.dumps(body, indent=2, default=_json_default)


def _json_default(o):
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(type(o))


def fermion_simulate(cfg: QuantumConfig, gammas: Sequence[int], m: int | None = None) -> OracleReport:
    """Evolve |0> x |gamma_1> x ... x |gamma_m> through m interactions."""
    gammas = [int(g) for g in gammas]
    m = len(gammas) if m is None else m
    if m != len(gammas):
        raise InvalidConfig("one bath label per bath mode is required")
    if any(g not in (0, 1) for g in gammas):
        raise InvalidConfig("fermionic bath labels must be 0 or 1")
    L = m + 1
    if L > FERMION_MAX_MODES:
        raise ResourceLimit(f"{L} fermionic modes need dimension 2**{L}; cap is {FERMION_MAX_MODES} modes")
    ann = fermion_operators(L)
    omegas = [cfg.mode_omega(k) for k in range(L)]
    occ = [0] + gammas
    psi = np.zeros(2**L, dtype=complex)
    psi[int("".join(map(str, occ)), 2)] = 1.0
    closed = run_fermion(cfg, m, forced_gammas=gammas).values
    n0 = (ann[0].conj().T @ ann[0]).tocsr()
    records = []
    for n in range(1, m + 1):
        psi = evolve(psi, step_hamiltonian(ann, omegas, cfg.lam, n), cfg.tau)
        state = StateVector(psi, (2,) * L)
        rho = partial_trace_system(state)
        N = float(np.real(np.vdot(psi, n0 @ psi)))
        idle = [state.reduced(j)[occ[j], occ[j]].real for j in range(n + 1, L)]
        records.append(StepRecord(
            n=n,
            expect_a0=complex(np.vdot(psi, ann[0] @ psi)),
            occupation=N,
            entropy=von_neumann_entropy(rho),
            purity=purity(rho),
            delta_vs_closed_form=abs(N - closed[n]),
            norm=state.norm,
            idle_fidelity=min(idle, default=1.0),
            offdiag=float(max(abs(rho[0, 1]), abs(rho[0, 0] - (1 - closed[n])), abs(rho[1, 1] - closed[n]))),
            rho=rho,
        ))
    config = {"omega": cfg.omega, "lambda": cfg.lam, "tau": cfg.tau, "w": cfg.w,
              "omegas": list(cfg.omegas) if cfg.omegas else None, "gammas": gammas}
    return OracleReport(kind="fermion", config=config, records=records)


def coherent_state(alpha: complex, d: int) -> np.ndarray:
    """Truncated coherent state, renormalized."""
    k = np.arange(d)
    logfact = np.array([math.lgamma(i + 1) for i in k])
    with np.errstate(divide="ignore"):
        mag = np.exp(k * np.log(abs(alpha)) - 0.5 * logfact) if alpha != 0 else (k == 0).astype(float)
    v = mag * np.exp(1j * k * np.angle(alpha))
    return v / np.linalg.norm(v)


def truncation_tail(mean_number: float, d: int) -> float:
    """Probability that a Poisson photon number with this mean reaches ``d``."""
    return float(poisson.sf(d - 1, mean_number))


def required_truncation(mean_number: float, tail: float = TAIL_MAX) -> int:
    d = 1
    while truncation_tail(mean_number, d) > tail:
        d += 1
    return d


def _pair_hamiltonian(d: int, w0: float, wn: float, lam: float) -> np.ndarray:
    b = boson_annihilator(d)
    eye = np.eye(d)
    b0, bn = np.kron(b, eye), np.kron(eye, b)
    hop = b0.conj().T @ bn
    return w0 * b0.conj().T @ b0 + wn * bn.conj().T @ bn - lam * (hop + hop.conj().T)


def boson_simulate(cfg: BosonConfig, gammas: Sequence[int], m: int | None = None, d: int = 24,
                   engine: str = "auto", omegas: Sequence[float] | None = None) -> OracleReport:
    """Coherent-state repeated interactions in a Fock space truncated at ``d`` per mode.

    ``engine="full"`` keeps the state vector of the system and all ``m`` bath modes
    (dimension d**(m+1), capped). ``engine="sequential"`` keeps the joint density
    matrix of the system and the bath mode currently interacting, tracing each bath
    mode out once its interaction is over; this is exact because a used mode only
    evolves freely afterwards and never couples again. ``"auto"`` picks ``full``
    when it fits under the cap.
    """
    gammas = [int(g) for g in gammas]
    m = len(gammas) if m is None else m
    if m != len(gammas):
        raise InvalidConfig("one bath label per bath mode is required")
    if any(not 0 <= g < cfg.M for g in gammas):
        raise InvalidConfig("bath label out of range")
    L = m + 1
    full_dim = d**L
    if engine == "auto":
        engine = "full" if full_dim <= BOSON_MAX_DIM else "sequential"
    if engine == "full" and full_dim > BOSON_MAX_DIM:
        raise ResourceLimit(f"full boson state needs d**(m+1) = {full_dim} > {BOSON_MAX_DIM}")
    if engine not in ("full", "sequential"):
        raise InvalidConfig(f"unknown engine {engine!r}")

    closed = run_boson(cfg, m, forced_gammas=gammas).values
    amp_max = max([abs(cfg.chi0)] + [abs(b) for b in cfg.betas] + [abs(c) for c in closed])
    beta_max = max(abs(b) for b in cfg.betas)
    # photon number of the interacting pair: Poisson with mean |chi|^2 + |beta|^2
    mean = amp_max**2 + beta_max**2
    tail = truncation_tail(mean, d)
    if tail > TAIL_MAX:
        raise ResourceLimit(f"truncation tail {tail:.2e} exceeds {TAIL_MAX:g}; need d >= {required_truncation(mean)}")

    omega, lam, tau = cfg.Omega.rad, cfg.Lambda.rad, 1.0
    ws = list(omegas) if omegas is not None else [omega] * L
    if len(ws) != L:
        raise InvalidConfig("need one frequency per mode")
    bath0 = [coherent_state(cfg.betas[g], d) for g in gammas]
    b = boson_annihilator(d)
    num = np.diag(np.arange(d, dtype=float))
    records = []

    def record(n, rho, norm, idle=None):
        chi = closed[n]
        coh = coherent_state(chi, d)
        a0 = complex(np.trace(rho @ b))
        records.append(StepRecord(
            n=n,
            expect_a0=a0,
            occupation=float(np.real(np.trace(rho @ num))),
            entropy=von_neumann_entropy(rho),
            purity=purity(rho),
            delta_vs_closed_form=abs(a0 - chi),
            norm=norm,
            fidelity=float(np.real(coh.conj() @ rho @ coh)),
            idle_fidelity=idle,
            rho=rho,
        ))

    if engine == "full":
        ann = boson_operators(L, d)
        psi = reduce(np.kron, [coherent_state(cfg.chi0, d)] + bath0)
        for n in range(1, m + 1):
            psi = evolve(psi, step_hamiltonian(ann, ws, lam, n), tau)
            state = StateVector(psi, (d,) * L)
            idle = []
            for j in range(n + 1, L):
                # untouched mode j has evolved freely for n steps
                ref = bath0[j - 1] * np.exp(-1j * ws[j] * tau * n * np.arange(d))
                idle.append(float(np.real(ref.conj() @ state.reduced(j) @ ref)))
            record(n, partial_trace_system(state), state.norm, min(idle, default=1.0))
    else:
        rho_s = np.outer(coherent_state(cfg.chi0, d), coherent_state(cfg.chi0, d).conj())
        for n in range(1, m + 1):
            # bath mode n has evolved freely for n-1 steps before its turn
            phi = bath0[n - 1] * np.exp(-1j * ws[n] * tau * (n - 1) * np.arange(d))
            U = unitary(_pair_hamiltonian(d, ws[0], ws[n], lam), tau)
            joint = U @ np.kron(rho_s, np.outer(phi, phi.conj())) @ U.conj().T
            rho_s = np.einsum("ikjk->ij", joint.reshape(d, d, d, d))
            record(n, rho_s, float(np.sqrt(np.real(np.trace(joint)))))

    config = {"Omega": str(cfg.Omega), "Lambda": str(cfg.Lambda), "chi0": cfg.chi0,
              "betas": list(cfg.betas), "gammas": gammas, "d": d, "engine": engine}
    return OracleReport(kind="boson", config=config, records=records, truncation_tail=tail)
