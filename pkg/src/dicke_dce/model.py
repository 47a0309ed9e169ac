"""Closed-form quantities of the linearized (two-oscillator) driven Dicke model.

Units: every frequency is a multiple of the cavity frequency ``omega_a``,
which is normally 1.
"""
from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import PhaseViolation

#: couplings within this distance of g_c are treated as exactly critical
CRITICAL_TOL = 1e-12


@dataclass(frozen=True)
class SystemParams:
    """Physical constants of the modulated Dicke model.

    ``lam`` is the modulation amplitude of the atomic splitting (``lambda``
    in serialized configs), so that ``omega_b(t) = omega_0 + lam*sin(eta*t)``.
    """

    omega_a: float = 1.0
    omega_0: float = 1.0
    lam: float = 0.0
    eta: float = 1.0
    g: float = 0.0
    gamma0: float = 0.0
    n_atoms: int = 100_000
    tau0: float = 1.0

    def __post_init__(self):
        checks = [
            ("omega_a", self.omega_a > 0),
            ("omega_0", self.omega_0 > 0),
            ("eta", self.eta > 0),
            ("lambda", self.lam >= 0),
            ("g", self.g >= 0),
            ("gamma0", self.gamma0 >= 0),
            ("n_atoms", int(self.n_atoms) == self.n_atoms and self.n_atoms >= 1),
            ("tau0", self.tau0 > 0),
        ]
        for name, ok in checks:
            if not ok:
                raise ValueError(f"invalid value for {name}")
        if self.lam >= self.omega_0:
            raise ValueError("lambda must be smaller than omega_0")

    @property
    def period(self) -> float:
        return 2 * np.pi / self.eta

    def replace(self, **changes) -> SystemParams:
        d = asdict(self)
        d.update(changes)
        return SystemParams(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> SystemParams:
        d = dict(d)
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        return cls(**d)


@dataclass(frozen=True)
class NormalModes:
    eps_minus: float
    eps_plus: float
    evaluated_at: float


def omega_b(params: SystemParams, t):
    return params.omega_0 + params.lam * np.sin(params.eta * np.asarray(t, dtype=float))


def critical_coupling(params: SystemParams, t):
    return np.sqrt(params.omega_a * omega_b(params, t)) / 2


def min_critical_coupling(params: SystemParams) -> float:
    """Smallest g_c(t) over a period, reached where omega_b = omega_0 - lambda."""
    return float(np.sqrt(params.omega_a * (params.omega_0 - params.lam)) / 2)


def normal_phase_check(params: SystemParams) -> None:
    """Raise PhaseViolation unless g < g_c(t) for every t in the drive period."""
    gc = min_critical_coupling(params)
    if params.g > gc + CRITICAL_TOL:
        raise PhaseViolation(f"g={params.g} exceeds min_t g_c(t)={gc:.12g}")


def eigenfrequencies_squared(omega_a, omb, g):
    """Return (eps_minus**2, eps_plus**2) for bare frequencies ``omega_a``, ``omb``.

    The lower root is obtained from the determinant identity
    eps_-^2 eps_+^2 = omega_a omega_b (omega_a omega_b - 4 g^2) so that it stays
    accurate close to the gap closure, where the textbook difference formula
    loses all significant digits.
    """
    omb = np.asarray(omb, dtype=float)
    disc = np.sqrt((omb**2 - omega_a**2) ** 2 + 16 * g**2 * omega_a * omb)
    ep2 = 0.5 * (omega_a**2 + omb**2 + disc)
    em2 = omega_a * omb * (omega_a * omb - 4 * g**2) / ep2
    return em2, ep2


def _soft_mode_sq(params: SystemParams, t):
    omb = omega_b(params, t)
    em2, ep2 = eigenfrequencies_squared(params.omega_a, omb, params.g)
    gc = np.sqrt(params.omega_a * omb) / 2
    near = np.abs(params.g - gc) <= CRITICAL_TOL
    em2 = np.where(near, 0.0, em2)
    if np.any(em2 < 0):
        raise PhaseViolation(f"g={params.g} above g_c(t) somewhere in the requested times")
    return em2, ep2


def normal_mode_frequencies(params: SystemParams, t: float = 0.0) -> NormalModes:
    em2, ep2 = _soft_mode_sq(params, t)
    return NormalModes(float(np.sqrt(em2)), float(np.sqrt(ep2)), float(t))


def soft_mode_frequency(params: SystemParams, t):
    """Vectorized eps_-(t), the critical mode frequency."""
    em2, _ = _soft_mode_sq(params, t)
    return np.sqrt(em2)


def static_gap(params: SystemParams) -> float:
    """eps_0: soft-mode frequency of the unmodulated system (omega_b = omega_0)."""
    return normal_mode_frequencies(params.replace(lam=0.0)).eps_minus


def gap_minimum(params: SystemParams, samples: int = 4096) -> tuple[float, float]:
    """Minimum of eps_-(t) over one drive period and the time where it occurs.

    A uniform scan brackets the minimum, then a golden-section search refines
    it.  With lambda = 0 the gap is constant and t_min = 0 is returned.
    """
    normal_phase_check(params)
    if params.lam == 0:
        return float(soft_mode_frequency(params, 0.0)), 0.0
    T = params.period
    ts = np.arange(samples) * (T / samples)
    eps = soft_mode_frequency(params, ts)
    k = int(np.argmin(eps))
    dt = T / samples

    def f(t):
        return float(soft_mode_frequency(params, t))

    res = minimize_scalar(
        f,
        bracket=(ts[k] - dt, ts[k], ts[k] + dt),
        method="golden",
        options={"xtol": 1e-12},
    )
    t_min = float(res.x) % T
    return min(float(res.fun), float(eps[k])), t_min


def hp_validity_check(excitation_number: float, params: SystemParams,
                      threshold: float = 0.01) -> tuple[bool, float]:
    """Check that atomic excitations stay a small fraction of the atom count.

    Advisory only: returns ``(ok, ratio)`` and never raises.
    """
    ratio = float(excitation_number) / params.n_atoms
    return ratio < threshold, ratio
