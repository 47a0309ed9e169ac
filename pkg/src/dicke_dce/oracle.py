"""Time-domain Gaussian moment integration, used to cross-check the Floquet solver.

The Hamiltonian is quadratic and the dissipators are linear, so the second
moments N_ij = <u_i u_j> of u = (a, b, a^dag, b^dag) obey the closed equation

    dN/dt = K(t) N + N K(t)^T + D

and integrating them is exact up to time-stepping error.

Two dissipators are available.  ``"dressed"`` (default) lets each normal mode
q_s of the static model decay through its cavity content,
L_s = sqrt(2 gamma0) A_s q_s with a = sum_s (A_s q_s + B_s q_s^dag).  This is the
Markov limit of the one-sided bath: processes that would need negative bath
frequencies are absent, and at lambda = 0 the steady state is the ground state.
``"bare"`` is the textbook L = sqrt(2 gamma0) a, which with counter-rotating
couplings keeps pumping the system and leaks photons even without a drive.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NotConverged, StiffnessFailure
from .floquet import DampingModel, build_m0, build_m1
from .model import SystemParams, normal_phase_check

# [u_k, u_i]
COMM = np.zeros((4, 4))
COMM[0, 2] = COMM[1, 3] = 1.0
COMM[2, 0] = COMM[3, 1] = -1.0
# u^dag = SWAP u
SWAP = np.zeros((4, 4))
SWAP[0, 2] = SWAP[2, 0] = SWAP[1, 3] = SWAP[3, 1] = 1.0
VACUUM = np.zeros((4, 4), dtype=complex)
VACUUM[0, 2] = VACUUM[1, 3] = 1.0


@dataclass(frozen=True)
class NormalModeBasis:
    """Bogoliubov decomposition of the static model.

    ``rows[s]`` gives q_s = rows[s] . u for s = 0 (soft) and 1 (stiff);
    ``a_coeff[s]`` and ``a_conj_coeff[s]`` are A_s and B_s in
    a = sum_s (A_s q_s + B_s q_s^dag).
    """

    freqs: np.ndarray
    rows: np.ndarray
    a_coeff: np.ndarray
    a_conj_coeff: np.ndarray

    def occupations(self, moments: np.ndarray) -> np.ndarray:
        """<q_s^dag q_s> for a moment matrix N."""
        out = []
        for w in self.rows:
            wbar = np.conj(w) @ SWAP
            out.append(np.real(wbar @ moments @ w))
        return np.array(out)

    def ground_state_moments(self) -> np.ndarray:
        """Moment matrix of the normal-mode vacuum."""
        t = np.linalg.inv(self._transform())
        # <Q_i Q_j> is 1 for (q_s, q_s^dag) and 0 otherwise
        qq = np.zeros((4, 4), dtype=complex)
        qq[0, 2] = qq[1, 3] = 1.0
        return t @ qq @ t.T

    def _transform(self):
        return np.vstack([self.rows, np.conj(self.rows) @ SWAP])


def normal_mode_basis(params: SystemParams) -> NormalModeBasis:
    m0 = build_m0(params)
    vals, left = np.linalg.eig(m0.T)
    # left eigenvectors with positive eigenvalue define annihilation operators
    order = np.argsort(-vals.real)
    pos = [k for k in order if vals[k].real > 0][:2]
    pos.sort(key=lambda k: vals[k].real)
    rows, freqs = [], []
    jmat = np.diag([1.0, 1.0, -1.0, -1.0])
    for k in pos:
        w = left[:, k].astype(complex)
        norm = np.real(w @ jmat @ np.conj(w))
        if norm <= 0:
            raise ValueError("normal mode with non-positive symplectic norm (not in normal phase)")
        rows.append(w / np.sqrt(norm))
        freqs.append(vals[k].real)
    rows = np.array(rows)
    t = np.vstack([rows, np.conj(rows) @ SWAP])
    tinv = np.linalg.inv(t)
    return NormalModeBasis(np.array(freqs), rows, tinv[0, :2], tinv[0, 2:])


def ground_state_photons(params: SystemParams) -> float:
    """<a^dag a> in the ground state of the static two-oscillator model."""
    return float(np.sum(np.abs(normal_mode_basis(params).a_conj_coeff) ** 2))


def jump_vectors(params: SystemParams, damping: DampingModel, dissipator: str = "dressed"):
    """Coefficient rows l with L = l . u for every jump operator."""
    g0 = damping.gamma0
    if g0 == 0:
        return []
    if dissipator == "bare":
        return [np.sqrt(2 * g0) * np.array([1, 0, 0, 0], dtype=complex)]
    if dissipator != "dressed":
        raise ValueError(f"unknown dissipator {dissipator!r}")
    basis = normal_mode_basis(params)
    return [np.sqrt(2 * g0) * basis.a_coeff[s] * basis.rows[s] for s in range(2)]


def _dissipative_terms(jumps):
    drift = np.zeros((4, 4), dtype=complex)
    diff = np.zeros((4, 4), dtype=complex)
    for l in jumps:
        lbar = np.conj(l) @ SWAP
        cl = COMM @ l
        lbc = lbar @ COMM
        drift += 0.5 * (np.outer(cl, lbar) + np.outer(lbc, l))
        diff += np.outer(lbc, cl)
    return drift, diff


@dataclass(frozen=True)
class GaussianState:
    moments: np.ndarray
    t: float

    @property
    def photons(self) -> float:
        return float(np.real(self.moments[2, 0]))

    @property
    def atomic_excitations(self) -> float:
        return float(np.real(self.moments[3, 1]))

    def commutator_defect(self) -> float:
        """Deviation of <a a^dag> - <a^dag a> and <b b^dag> - <b^dag b> from 1."""
        n = self.moments
        return float(max(abs(n[0, 2] - n[2, 0] - 1), abs(n[1, 3] - n[3, 1] - 1)))


@dataclass
class Trajectory:
    t: np.ndarray
    moments: np.ndarray
    params: SystemParams
    damping: DampingModel
    dissipator: str = "dressed"

    @property
    def photons(self) -> np.ndarray:
        return np.real(self.moments[:, 2, 0])

    def state(self, k: int = -1) -> GaussianState:
        return GaussianState(self.moments[k], float(self.t[k]))

    def emission_rate(self) -> np.ndarray:
        """Photons leaving per unit time: sum over jump operators of <L^dag L>."""
        out = np.zeros(len(self.t))
        for l in jump_vectors(self.params, self.damping, self.dissipator):
            lbar = np.conj(l) @ SWAP
            out += np.real(np.einsum("i,nij,j->n", lbar, self.moments, l))
        return out


class MomentEquations:
    def __init__(self, params: SystemParams, damping: DampingModel, dissipator: str = "dressed"):
        self.params = params
        self.m0 = build_m0(params)
        self.m1 = build_m1(params)
        self.drift_d, self.diff = _dissipative_terms(jump_vectors(params, damping, dissipator))

    def drift(self, t):
        return -1j * (self.m0 + self.m1 * np.sin(self.params.eta * t)) + self.drift_d

    def rhs(self, t, y):
        n = (y[:16] + 1j * y[16:]).reshape(4, 4)
        k = self.drift(t)
        dn = k @ n + n @ k.T + self.diff
        dn = dn.ravel()
        return np.concatenate([dn.real, dn.imag])


def _pack(n):
    n = np.asarray(n, dtype=complex).ravel()
    return np.concatenate([n.real, n.imag])


def evolve(params: SystemParams, damping: DampingModel, t_final: float,
           dt_control: float = 1e-9, samples_per_period: int = 64,
           initial: np.ndarray | None = None, t0: float = 0.0,
           dissipator: str = "dressed") -> Trajectory:
    """Integrate the second moments from ``t0`` to ``t_final``.

    The default initial state is the bare vacuum of a and b.  Samples are
    stored on a uniform grid commensurate with the drive period.
    """
    normal_phase_check(params)
    eqs = MomentEquations(params, damping, dissipator)
    n0 = VACUUM if initial is None else initial
    dt = params.period / samples_per_period
    n_steps = int(round((t_final - t0) / dt))
    t_eval = t0 + dt * np.arange(n_steps + 1)
    sol = solve_ivp(eqs.rhs, (t0, t_eval[-1]), _pack(n0), method="DOP853",
                    t_eval=t_eval, rtol=dt_control, atol=dt_control * 1e-2)
    if not sol.success:
        raise StiffnessFailure(sol.message)
    y = sol.y.T
    moments = (y[:, :16] + 1j * y[:, 16:]).reshape(-1, 4, 4)
    return Trajectory(sol.t, moments, params, damping, dissipator)


def steady_cycle_average(traj: Trajectory, rel_tol: float = 1e-3) -> tuple[float, float]:
    """Average <a^dag a> and emission rate over the final drive period.

    Raises NotConverged if the last two periods differ by more than ``rel_tol``.
    """
    spp = int(round(traj.params.period / (traj.t[1] - traj.t[0])))
    if len(traj.t) < 2 * spp + 1:
        raise NotConverged("trajectory shorter than two drive periods")
    n = traj.photons
    last = np.mean(n[-spp - 1:-1])
    prev = np.mean(n[-2 * spp - 1:-spp - 1])
    if abs(last - prev) > rel_tol * abs(last) + 1e-14:
        raise NotConverged(f"cycle averages {prev:.6g} and {last:.6g} differ")
    rate = np.mean(traj.emission_rate()[-spp - 1:-1])
    return float(last), float(rate)


def slowest_decay_rate(params: SystemParams, damping: DampingModel,
                       dissipator: str = "dressed") -> float:
    if dissipator == "bare":
        return damping.gamma0
    basis = normal_mode_basis(params)
    return float(damping.gamma0 * np.min(np.abs(basis.a_coeff) ** 2))


def cycle_averaged_photons(params: SystemParams, damping: DampingModel,
                           dt_control: float = 1e-9, rel_tol: float = 1e-3,
                           transient_decays: float = 10.0, dissipator: str = "dressed",
                           samples_per_period: int = 64) -> tuple[float, float]:
    """Run from vacuum until the periodic steady state is reached.

    Discards ``transient_decays`` slowest-decay times (at least 5/gamma0), then
    extends period by period until successive averages agree; gives up at
    50/gamma0 beyond the transient.
    """
    if damping.gamma0 <= 0:
        raise NotConverged("no steady state without damping")
    rate = slowest_decay_rate(params, damping, dissipator)
    t_tr = max(5 / damping.gamma0, transient_decays / rate)
    T = params.period
    t_tr = T * np.ceil(t_tr / T)
    t_cap = t_tr + 50 / damping.gamma0
    traj = evolve(params, damping, t_tr + 2 * T, dt_control, samples_per_period,
                  dissipator=dissipator)
    while True:
        try:
            return steady_cycle_average(traj, rel_tol)
        except NotConverged:
            if traj.t[-1] > t_cap:
                raise
        more = evolve(params, damping, traj.t[-1] + 4 * T, dt_control, samples_per_period,
                      initial=traj.moments[-1], t0=traj.t[-1], dissipator=dissipator)
        traj = Trajectory(np.concatenate([traj.t, more.t[1:]]),
                          np.concatenate([traj.moments, more.moments[1:]]),
                          params, damping, dissipator)


def floquet_multipliers(params: SystemParams, damping: DampingModel,
                        dissipator: str = "dressed") -> np.ndarray:
    """Eigenvalues of the one-period map of the mean amplitudes <u>.

    The periodic steady state exists only if all have modulus below one;
    otherwise the drive is above the parametric threshold.
    """
    normal_phase_check(params)
    eqs = MomentEquations(params, damping, dissipator)

    def rhs(t, y):
        x = (y[:16] + 1j * y[16:]).reshape(4, 4)
        dx = (eqs.drift(t) @ x).ravel()
        return np.concatenate([dx.real, dx.imag])

    sol = solve_ivp(rhs, (0.0, params.period), _pack(np.eye(4)), method="DOP853",
                    rtol=1e-10, atol=1e-12)
    y = sol.y[:, -1]
    mono = (y[:16] + 1j * y[16:]).reshape(4, 4)
    return np.linalg.eigvals(mono)
