"""Coherent-state eigenvalue dynamics and the bosonic regimes.

With the system and every bath mode in coherent states, the annihilation
eigenvalue of the system evolves as

    chi_{n+1} = cos(L) e^{-iO} chi_n + i e^{-iO(n+1)} sin(L) beta_{gamma_{n+1}},

with O = omega*tau and L = lambda*tau. Angles that are rational multiples of pi
are kept exact (``Fraction``) so that regime classification and long-run
phases never depend on floating-point luck.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from qchaos.errors import InvalidConfig, PureOrbitRegime
from qchaos.ifs_core import NO_LABEL, Trajectory, linear_orbit, vertex_stream

DEDUP_TOL = 1e-9
ORBIT_CONTINUOUS = "continuous"
_PHASE_TABLE_MAX = 1 << 20


@dataclass(frozen=True)
class Angle:
    """An angle given either as an exact multiple of pi or as plain radians.

    Plain radians are always treated as an irrational multiple of pi.
    """

    pi_multiple: Fraction | None = None
    value: float | None = None

    def __post_init__(self):
        if (self.pi_multiple is None) == (self.value is None):
            raise InvalidConfig("an angle is either an exact multiple of pi or a float")
        if self.value is not None and not math.isfinite(self.value):
            raise InvalidConfig("angle must be finite")

    @classmethod
    def pi(cls, num: int, den: int = 1) -> "Angle":
        return cls(pi_multiple=Fraction(num, den))

    @classmethod
    def radians(cls, x: float) -> "Angle":
        return cls(value=float(x))

    @classmethod
    def parse(cls, text: str) -> "Angle":
        """``"r/s:pi"`` or ``"p:pi"`` for exact multiples of pi; anything else is a float."""
        text = str(text).strip()
        if text.endswith(":pi"):
            body = text[: -len(":pi")]
            try:
                num, _, den = body.partition("/")
                return cls.pi(int(num), int(den) if den else 1)
            except (ValueError, ZeroDivisionError) as exc:
                raise InvalidConfig(f"bad pi-multiple {text!r}") from exc
        try:
            return cls.radians(float(text))
        except ValueError as exc:
            raise InvalidConfig(f"bad angle {text!r}") from exc

    @property
    def exact(self) -> bool:
        return self.pi_multiple is not None

    @property
    def rad(self) -> float:
        return math.pi * self.pi_multiple if self.exact else self.value

    def __str__(self) -> str:
        if self.exact:
            f = self.pi_multiple
            return f"{f.numerator}:pi" if f.denominator == 1 else f"{f.numerator}/{f.denominator}:pi"
        return repr(self.value)


def exp_i_pi(f: Fraction) -> complex:
    """``exp(i*pi*f)`` with exact values at multiples of pi/2."""
    f = f % 2
    exact = {Fraction(0): 1 + 0j, Fraction(1, 2): 1j, Fraction(1): -1 + 0j, Fraction(3, 2): -1j}
    if f in exact:
        return exact[f]
    return cmath.exp(1j * math.pi * float(f))


def _cos_sin(a: Angle) -> tuple[float, float]:
    if a.exact:
        z = exp_i_pi(a.pi_multiple)
        return z.real, z.imag
    return math.cos(a.value), math.sin(a.value)


def _cplx(z) -> complex:
    return complex(z)


@dataclass(frozen=True)
class BosonConfig:
    Omega: Angle
    Lambda: Angle
    betas: tuple[complex, ...]
    chi0: complex = 0j
    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        betas = tuple(_cplx(b) for b in self.betas)
        if len(betas) < 1:
            raise InvalidConfig("need at least one bath coherent state")
        if not all(cmath.isfinite(b) for b in betas) or not cmath.isfinite(_cplx(self.chi0)):
            raise InvalidConfig("amplitudes must be finite")
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "chi0", _cplx(self.chi0))

    @property
    def M(self) -> int:
        return len(self.betas)

    @property
    def contraction(self) -> complex:
        """cos(L) e^{-iO}: the multiplier of chi in one step."""
        c, _ = _cos_sin(self.Lambda)
        return c * phase(self, 1)


def phase(cfg: BosonConfig, k: int) -> complex:
    """``exp(-i k Omega)``; for rational Omega the residue of k r mod 2s is taken first."""
    if cfg.Omega.exact:
        f = cfg.Omega.pi_multiple
        res = (-k * f.numerator) % (2 * f.denominator)
        return exp_i_pi(Fraction(res, f.denominator))
    return cmath.exp(-1j * cfg.Omega.value * k)


def phases(cfg: BosonConfig, ks: np.ndarray) -> np.ndarray:
    ks = np.asarray(ks, dtype=np.int64)
    if cfg.Omega.exact:
        f = cfg.Omega.pi_multiple
        period = 2 * f.denominator
        res = (-ks * (f.numerator % period)) % period
        if period <= _PHASE_TABLE_MAX:
            table = np.array([exp_i_pi(Fraction(r, f.denominator)) for r in range(period)])
            return table[res]
        return np.exp(1j * np.pi * res / f.denominator)
    return np.exp(-1j * cfg.Omega.value * ks.astype(float))


def _drive(cfg: BosonConfig, k, beta):
    _, s = _cos_sin(cfg.Lambda)
    return 1j * k * s * beta


def step_chi(chi: complex, gamma: int, n: int, cfg: BosonConfig) -> complex:
    """One interaction: chi_n -> chi_{n+1}, with the bath mode labelled ``gamma``."""
    if not 0 <= gamma < cfg.M:
        raise InvalidConfig(f"label {gamma} out of range for M={cfg.M}")
    return cfg.contraction * chi + _drive(cfg, phase(cfg, n + 1), cfg.betas[gamma])


def _pure_orbit_factors(cfg: BosonConfig, p: int, n: int) -> np.ndarray:
    """``(-1)**(p k) exp(-i k Omega)`` for k = 0..n.

    For rational Omega the sign is folded into a single residue mod 2s, so equal
    orbit points are bitwise equal.
    """
    ks = np.arange(n + 1, dtype=np.int64)
    if not cfg.Omega.exact:
        return np.where((p * ks) % 2 == 0, 1, -1) * np.exp(-1j * cfg.Omega.value * ks)
    f = cfg.Omega.pi_multiple
    s_, period = f.denominator, 2 * f.denominator
    step_res = (p * s_ - f.numerator) % period
    table = np.array([exp_i_pi(Fraction(r, s_)) for r in range(period)])
    return table[(ks % period) * step_res % period]


def run_boson(cfg: BosonConfig, n: int, forced_gammas: Sequence[int] | None = None) -> Trajectory:
    if forced_gammas is None:
        labels = vertex_stream(cfg.seed, cfg.stream, cfg.M, n)
    else:
        labels = np.asarray(forced_gammas, dtype=np.int64)
        if len(labels) != n:
            raise InvalidConfig(f"forced label sequence has length {len(labels)}, expected {n}")
        if len(labels) and (labels.min() < 0 or labels.max() >= cfg.M):
            raise InvalidConfig("forced labels out of range")
    p = _lambda_multiple_of_pi(cfg)
    if p is not None:
        # pure orbit: closed form from exact phases, so |chi_n| never drifts
        values = _pure_orbit_factors(cfg, p, n) * cfg.chi0
    else:
        betas = np.asarray(cfg.betas)[labels]
        drive = _drive(cfg, phases(cfg, np.arange(1, n + 1)), betas)
        values = linear_orbit(cfg.chi0, drive.astype(complex), cfg.contraction)
    return Trajectory(
        gammas=np.concatenate([[NO_LABEL], labels]),
        values=values,
        meta={"Omega": str(cfg.Omega), "Lambda": str(cfg.Lambda), "seed": cfg.seed, "stream": cfg.stream},
    )


@dataclass(frozen=True)
class EffectiveTransform:
    cfg: BosonConfig
    W: complex

    def beta_tilde(self, n: int, j: int) -> complex:
        return _drive(self.cfg, phase(self.cfg, n + 1), self.cfg.betas[j]) / self.W

    def apply(self, chi: complex, gamma: int, n: int) -> complex:
        return (1 - self.W) * chi + self.W * self.beta_tilde(n, gamma)


def _lambda_multiple_of_pi(cfg: BosonConfig) -> int | None:
    L = cfg.Lambda
    if L.exact and L.pi_multiple.denominator == 1:
        return L.pi_multiple.numerator
    return None


def effective_transform(cfg: BosonConfig) -> EffectiveTransform:
    if _lambda_multiple_of_pi(cfg) is not None:
        raise PureOrbitRegime("sin(Lambda) = 0: the bath has no effect and chi orbits a circle")
    W = 1 - cfg.contraction
    if W == 0:
        raise PureOrbitRegime("W = 0: no effective chaos game")
    return EffectiveTransform(cfg=cfg, W=W)


class RegimeTag(str, Enum):
    PERFECT_GAME = "PerfectGame"
    MIRROR_DOUBLED = "MirrorDoubled"
    RATIONAL_ROTATION = "RationalRotation"
    IRRATIONAL_ROTATION = "IrrationalRotation"
    PURE_ORBIT_DISCRETE = "PureOrbitDiscrete"
    PURE_ORBIT_CONTINUOUS = "PureOrbitContinuous"


@dataclass(frozen=True)
class Regime:
    tag: RegimeTag
    payload: int | None = None

    @property
    def vertex_count(self) -> int | None:
        if self.tag in (RegimeTag.MIRROR_DOUBLED, RegimeTag.RATIONAL_ROTATION):
            return self.payload
        return None

    @property
    def orbit_cardinality(self) -> int | None:
        return self.payload if self.tag is RegimeTag.PURE_ORBIT_DISCRETE else None


def _omega_period(cfg: BosonConfig) -> int:
    # Period in n of exp(-i n Omega) for Omega = pi r/s.
    f = cfg.Omega.pi_multiple
    return 2 * f.denominator // math.gcd(f.numerator, 2 * f.denominator)


def classify_regime(cfg: BosonConfig) -> Regime:
    p = _lambda_multiple_of_pi(cfg)
    if p is not None:
        if not cfg.Omega.exact:
            return Regime(RegimeTag.PURE_ORBIT_CONTINUOUS)
        return Regime(RegimeTag.PURE_ORBIT_DISCRETE, orbit_cardinality(cfg))
    if not cfg.Omega.exact:
        return Regime(RegimeTag.IRRATIONAL_ROTATION)
    f = cfg.Omega.pi_multiple
    r, s = f.numerator, f.denominator
    if s == 1 and r % 2 == 0:
        return Regime(RegimeTag.PERFECT_GAME)
    if s == 1:
        return Regime(RegimeTag.MIRROR_DOUBLED, 2 * cfg.M)
    return Regime(RegimeTag.RATIONAL_ROTATION, (s if r % 2 == 0 else 2 * s) * cfg.M)


def distinct_points(z, tol: float = DEDUP_TOL) -> np.ndarray:
    """Greedy deduplication: representatives of clusters of radius ``tol``."""
    z = np.asarray(z, dtype=complex).ravel()
    if z.size == 0:
        return z
    pts = np.column_stack([z.real, z.imag])
    tree = cKDTree(pts)
    taken = np.zeros(len(z), dtype=bool)
    reps = []
    for i in range(len(z)):
        if taken[i]:
            continue
        reps.append(z[i])
        taken[tree.query_ball_point(pts[i], tol)] = True
    return np.array(reps)


def effective_vertices(cfg: BosonConfig, tol: float = DEDUP_TOL) -> np.ndarray:
    regime = classify_regime(cfg)
    allowed = (RegimeTag.PERFECT_GAME, RegimeTag.MIRROR_DOUBLED, RegimeTag.RATIONAL_ROTATION)
    if regime.tag not in allowed:
        raise InvalidConfig(f"no finite effective vertex set in regime {regime.tag.value}")
    T = effective_transform(cfg)
    raw = [T.beta_tilde(n, j) for n in range(_omega_period(cfg)) for j in range(cfg.M)]
    return distinct_points(raw, tol)


def orbit_cardinality(cfg: BosonConfig):
    """Size of ``{chi_n}`` when Lambda = p*pi: s or 2s by parity of p*s + r."""
    p = _lambda_multiple_of_pi(cfg)
    if p is None:
        raise InvalidConfig("orbit cardinality needs Lambda to be an exact integer multiple of pi")
    if not cfg.Omega.exact:
        return ORBIT_CONTINUOUS
    f = cfg.Omega.pi_multiple
    r, s = f.numerator, f.denominator
    return s if (p * s + r) % 2 == 0 else 2 * s


def regime_report(cfg: BosonConfig) -> dict:
    regime = classify_regime(cfg)
    W = 1 - cfg.contraction
    out = {"tag": regime.tag.value}
    if regime.tag is RegimeTag.PERFECT_GAME:
        out["vertex_count"] = cfg.M
    elif regime.vertex_count is not None:
        out["vertex_count"] = regime.vertex_count
    if regime.tag is RegimeTag.PURE_ORBIT_DISCRETE:
        out["orbit_cardinality"] = regime.payload
    elif regime.tag is RegimeTag.PURE_ORBIT_CONTINUOUS:
        out["orbit_cardinality"] = ORBIT_CONTINUOUS
    out["W_re"], out["W_im"] = W.real, W.imag
    return out


def roots_of_unity(M: int, shift: complex = 0j) -> tuple[complex, ...]:
    return tuple(cmath.exp(2j * math.pi * j / M) + shift for j in range(M))
