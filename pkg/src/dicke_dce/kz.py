"""Adiabatic-impulse (Kibble-Zurek) estimate of ground-state depletion per drive period.

Only the soft normal mode eps(t) = eps_-(t) is kept.  The distance from
criticality is T(t) = g_c(t)/g - 1 and the relaxation time is tau0/eps(t).
Evolution is adiabatic while T(t) > |dT/dt| tau(t) and frozen otherwise, so
the freeze-out times are the zeros of

    h(t) = tau(t) |dT/dt| - T(t),

which is continuous and periodic (h < 0: adiabatic, h > 0: impulse).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy import sparse
from scipy.sparse.linalg import expm_multiply
from scipy.optimize import brentq

from .errors import NoFreezeOut, OddRootCount, TruncationError
from .model import (SystemParams, critical_coupling, gap_minimum, normal_mode_frequencies,
                    normal_phase_check, omega_b, soft_mode_frequency)


@dataclass(frozen=True)
class KzSchedule:
    params: SystemParams

    def __post_init__(self):
        normal_phase_check(self.params)
        if self.params.g <= 0:
            raise ValueError("relative temperature needs g > 0")

    @property
    def period(self) -> float:
        return self.params.period

    def relative_temperature(self, t):
        return critical_coupling(self.params, t) / self.params.g - 1

    def temperature_rate(self, t):
        p = self.params
        t = np.asarray(t, dtype=float)
        dwb = p.lam * p.eta * np.cos(p.eta * t)
        return p.omega_a * dwb / (4 * np.sqrt(p.omega_a * omega_b(p, t))) / p.g

    def gap(self, t):
        return soft_mode_frequency(self.params, t)

    def relaxation_time(self, t):
        return self.params.tau0 / self.gap(t)

    def freeze_function(self, t):
        """h(t); positive inside impulse windows."""
        return self.relaxation_time(t) * np.abs(self.temperature_rate(t)) - self.relative_temperature(t)

    def default_start(self) -> float:
        """Gap minimum (eta t = 3 pi/2): dT/dt = 0 there, so always adiabatic."""
        return 1.5 * np.pi / self.params.eta


@dataclass(frozen=True)
class FreezeOutTimes:
    times: tuple
    t_start: float
    period: float

    def __len__(self):
        return len(self.times)

    def windows(self) -> list[tuple[float, float]]:
        """(enter, exit) pairs of the impulse windows."""
        ts = self.times
        return [(ts[k], ts[k + 1]) for k in range(0, len(ts), 2)]


def freeze_out_times(schedule: KzSchedule, samples: int = 16384, t_start: float | None = None,
                     xtol: float = 1e-12) -> FreezeOutTimes:
    """All zeros of the freeze function in [t_start, t_start + period)."""
    if t_start is None:
        t_start = schedule.default_start()
    T = schedule.period
    for n in (samples, 4 * samples):
        ts = t_start + T * np.arange(n + 1) / n
        h = schedule.freeze_function(ts)
        idx = np.nonzero(np.sign(h[:-1]) * np.sign(h[1:]) < 0)[0]
        if len(idx) % 2 == 0:
            break
    else:
        raise OddRootCount(f"{len(idx)} sign changes in one period")
    if len(idx) == 0:
        raise NoFreezeOut("freeze-out equation has no solution; evolution is adiabatic")
    if h[0] > 0:
        raise OddRootCount("period start lies inside an impulse window")
    roots = tuple(brentq(schedule.freeze_function, ts[k], ts[k + 1], xtol=xtol, rtol=1e-15)
                  for k in idx)
    return FreezeOutTimes(roots, float(t_start), T)


def root_residuals(schedule: KzSchedule, times: FreezeOutTimes) -> np.ndarray:
    """|T/|dT/dt| - tau| at each freeze-out time."""
    t = np.asarray(times.times)
    ratio = schedule.relative_temperature(t) / np.abs(schedule.temperature_rate(t))
    return np.abs(ratio - schedule.relaxation_time(t))


@dataclass(frozen=True)
class OverlapTable:
    """c[n, m] = <phi_n(eps1) | phi_m(eps2)> for oscillators of unit mass."""

    coefficients: np.ndarray = field(repr=False)
    eps1: float
    eps2: float

    @property
    def n_max(self) -> int:
        return self.coefficients.shape[0] - 1

    def __getitem__(self, idx):
        return self.coefficients[idx]


def overlap_coefficients(eps1: float, eps2: float, n_max: int = 40,
                         check: bool = True) -> OverlapTable:
    """Fock-state overlaps between oscillators of frequencies ``eps1`` and ``eps2``.

    Uses a2 = mu a1 + nu a1^dag with mu, nu = (s +- 1/s)/2, s = sqrt(eps2/eps1),
    which gives a three-term recurrence down each column starting from
    c[0, 0] = mu**-1/2.  The recurrence across columns loses accuracy for large
    frequency ratios; there the table comes from the squeeze operator instead.
    """
    if eps1 <= 0 or eps2 <= 0:
        raise ValueError("frequencies must be positive")
    s = np.sqrt(eps2 / eps1)
    mu, nu = 0.5 * (s + 1 / s), 0.5 * (s - 1 / s)
    size = 2 * n_max + 2
    c = np.zeros((size, n_max + 1))
    c[:, 0] = vacuum_overlaps(eps1, eps2, size - 1)
    if check:
        weight = np.sum(c[:n_max + 1, 0] ** 2)
        if weight < 1 - 1e-6:
            raise TruncationError(f"sum |c_n0|^2 = {weight:.9f} at n_max={n_max}")
    # rounding errors in the column recurrence grow roughly like s**m
    if max(s, 1 / s) ** n_max < 1e4:
        sq = np.sqrt(np.arange(size + 1))
        for m in range(n_max):
            col = c[:, m]
            nxt = np.zeros(size)
            nxt[:-1] += nu * sq[1:size] * col[1:]
            nxt[1:] += mu * sq[1:size] * col[:-1]
            c[:, m + 1] = nxt / np.sqrt(m + 1)
        coeffs = c[:n_max + 1, :]
    else:
        coeffs = _squeeze_overlaps(np.log(s), n_max)
        coeffs[:, 0] = c[:n_max + 1, 0]
    return OverlapTable(coeffs, float(eps1), float(eps2))


def vacuum_overlaps(eps1: float, eps2: float, n_max: int) -> np.ndarray:
    """First column c[n, 0], n = 0..n_max (only even n are nonzero)."""
    s = np.sqrt(eps2 / eps1)
    mu, nu = 0.5 * (s + 1 / s), 0.5 * (s - 1 / s)
    c = np.zeros(n_max + 1)
    c[0] = mu ** -0.5
    for n in range(1, n_max, 2):
        c[n + 1] = -(nu / mu) * np.sqrt(n / (n + 1)) * c[n - 1]
    return c


def _squeeze_overlaps(r: float, n_max: int, cap: int = 20000) -> np.ndarray:
    """Same table as <n| exp(r (a^2 - a^dag^2)/2) |m>, in an enlarged Fock basis.

    The basis is doubled until the leading block stops changing.
    """
    size = int(min(cap, 2 * (n_max + 20) * np.exp(2 * abs(r)) + 50))
    prev = None
    while True:
        a = sparse.diags(np.sqrt(np.arange(1, size)), 1, format="csr")
        gen = 0.5 * r * (a @ a - a.T @ a.T)
        u = expm_multiply(gen, np.eye(size, n_max + 1))[:n_max + 1]
        if prev is not None and np.max(np.abs(u - prev)) < 1e-13:
            return u
        if size >= cap:
            raise TruncationError(f"overlap table unresolved in a {cap}-state basis")
        prev, size = u, min(cap, 2 * size)


def dynamical_phases(schedule: KzSchedule, t2: float, t3: float, n_max: int) -> np.ndarray:
    """theta_n = (n + 1/2) * integral of eps(t) over [t2, t3]."""
    if not t2 < t3:
        raise ValueError("need t2 < t3")
    area, _ = quad(lambda t: float(schedule.gap(t)), t2, t3, epsabs=0, epsrel=1e-12, limit=200)
    return (np.arange(n_max + 1) + 0.5) * area


@dataclass
class KzResult:
    times: FreezeOutTimes | None
    probability: float
    raw_probability: float = 0.0
    n_max: int = 0
    phases: np.ndarray | None = None
    tables: list = field(default_factory=list)


def _needed_n_max(eps_a, eps_b, tol=1e-8, start=40, cap=400):
    n = start
    while n <= cap:
        c = vacuum_overlaps(eps_a, eps_b, n)
        if abs(c[-1]) < tol and abs(c[-2]) < tol and 1 - np.sum(c**2) < 1e-12:
            return n
        n *= 2
    raise TruncationError("overlap expansion did not converge")


def excitation_probability(params: SystemParams, n_max: int | None = None,
                           t_start: float | None = None) -> KzResult:
    """P = 1 - |<phi_0(t4)|Psi(t4)>|^2 under the adiabatic-impulse approximation.

    Starting from the instantaneous ground state, each impulse window
    re-expands the frozen state in the eigenbasis at its exit, and each
    adiabatic stretch between windows multiplies level n by exp(-i theta_n).
    With four freeze-out times this is
    P = 1 - |sum_n c_0n(t4, t3) c_n0(t2, t1) exp(-i theta_n)|^2.
    """
    sched = KzSchedule(params)
    nm = normal_mode_frequencies(params.replace(lam=0.0))
    if nm.eps_plus < 5 * max(nm.eps_minus, params.eta):
        warnings.warn("stiff mode is not well separated from the soft mode and the drive; "
                      "single-mode reduction is questionable", RuntimeWarning, stacklevel=2)
    try:
        times = freeze_out_times(sched, t_start=t_start)
    except NoFreezeOut:
        return KzResult(None, 0.0)
    wins = times.windows()
    eps = [(float(sched.gap(a)), float(sched.gap(b))) for a, b in wins]
    if n_max is None:
        n_max = max(_needed_n_max(e_exit, e_enter) for e_enter, e_exit in eps)
    state = np.zeros(n_max + 1, dtype=complex)
    state[0] = 1.0
    tables, phases = [], None
    for k, ((t_in, t_out), (e_in, e_out)) in enumerate(zip(wins, eps)):
        if k > 0:
            phases = dynamical_phases(sched, wins[k - 1][1], t_in, n_max)
            state = state * np.exp(-1j * phases)
        tab = overlap_coefficients(e_out, e_in, n_max)
        tables.append(tab)
        state = tab.coefficients @ state
    raw = 1.0 - abs(state[0]) ** 2
    return KzResult(times, float(min(max(raw, 0.0), 1.0)), float(raw), n_max, phases, tables)


def adiabatic_threshold(params: SystemParams) -> float:
    """Drive frequency below which photon production is adiabatically suppressed."""
    return gap_minimum(params)[0]


def exact_excitation_probability(params: SystemParams, t_start: float | None = None,
                                 periods: int = 1, rtol: float = 1e-10) -> float:
    """Exact depletion of the soft-mode ground state under H = (p^2 + eps(t)^2 x^2)/2.

    The state stays a Gaussian exp(-z x^2 / 2) with z = -i y'/y, where y solves
    the classical equation y'' = -eps(t)^2 y.
    """
    sched = KzSchedule(params)
    if t_start is None:
        t_start = sched.default_start()
    t_end = t_start + periods * params.period
    e_i = float(sched.gap(t_start))

    def rhs(t, y):
        e2 = float(sched.gap(t)) ** 2
        return [y[2], y[3], -e2 * y[0], -e2 * y[1]]

    # y = y0 + i y1, y(0) = 1, y'(0) = i eps_i
    sol = solve_ivp(rhs, (t_start, t_end), [1.0, 0.0, 0.0, e_i], method="DOP853",
                    rtol=rtol, atol=rtol * 1e-2)
    y = sol.y[0, -1] + 1j * sol.y[1, -1]
    dy = sol.y[2, -1] + 1j * sol.y[3, -1]
    z = -1j * dy / y
    e_f = float(sched.gap(t_end))
    return float(1 - 2 * np.sqrt(e_f * z.real) / abs(e_f + z))
