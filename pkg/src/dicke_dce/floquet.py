r"""Frequency-domain Floquet-Langevin solver for the damped, modulated model.

The operator vector u = (a, b, a^dag, b^dag) obeys

    du/dt = -i M(t) u - (Gamma * u)(t) + F(t),
    M(t)  = M0 + V (e^{i eta t} - e^{-i eta t}),   V = M1 / (2i),

where M1 = diag(0, lambda, 0, -lambda) is the modulation amplitude, so that
the b/b^dag diagonal of M(t) is exactly +-omega_b(t).  With the transform
u(t) = \int dw/2pi e^{-iwt} u(w), sidebands u(w + j eta), |j| <= m, are stacked
into one vector and the Langevin equation becomes i M(w) u(w) = -F(w) with

    M_jj     = (w + j eta) I - M0 + i D(w + j eta)
    M_j,j+1  = -V,    M_j,j-1 = +V
    D(nu)    = diag(gt(nu), 0, conj(gt(-nu)), 0)

and gt the bath damping kernel, Re gt(nu) = gamma0 for nu > 0 and 0 otherwise.
G(w) = [i M(w)]^-1.  Rows and columns are ordered (sideband j, component c)
-> 4 (j + m) + c with c = 0, 1, 2, 3 for a, b, a^dag, b^dag.

Vacuum input, flat one-sided bath.  Normalizations:

    <a^dag a>  = (gamma0/pi) sum_j \int_{j eta}^inf dw |G_{a0, a^dag j}(-w)|^2
    S(w)       = (2 gamma0^2/pi) sum_{j<0, w<|j| eta} |G_{a0, a^dag j}(w)|^2
    flux       = \int_0^inf S(w) dw        (photons per unit time)

S(w) = (gamma0/pi) P(w) with P the intracavity spectrum normalized as
<a^dag a> = (1/2pi) \int P(w) dw.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import (AssemblyError, NoConvergence, QuadratureFailure,
                     SingularMatrix, UndampedError)
from .model import SystemParams, normal_mode_frequencies, normal_phase_check

A, B, AD, BD = 0, 1, 2, 3


class GridTooCoarse(UserWarning):
    """Spectrum grid does not resolve gamma0-wide features near a predicted peak."""


@dataclass(frozen=True)
class DampingModel:
    """One-sided flat bath coupled to the cavity.

    ``bandwidth`` is the upper edge of the bath spectrum and only enters the
    (optional) Lamb-shift term, whose principal-value integral diverges
    logarithmically without it.
    """

    gamma0: float
    include_lamb_shift: bool = False
    bandwidth: float = 100.0

    def __post_init__(self):
        if self.gamma0 < 0:
            raise ValueError("gamma0 must be nonnegative")

    def lamb_shift(self, nu):
        """Im gt(nu) = -(1/pi) PV \\int Re gt(w') / (w' - nu) dw'."""
        nu = np.atleast_1d(np.asarray(nu, dtype=float))
        out = np.empty_like(nu)
        lam_max = self.bandwidth
        for k, x in enumerate(nu):
            if 0 < x < lam_max:
                val, _ = integrate.quad(lambda w: 1.0, 0.0, lam_max, weight="cauchy", wvar=x)
            else:
                val, _ = integrate.quad(lambda w: 1.0 / (w - x), 0.0, lam_max)
            out[k] = -self.gamma0 / np.pi * val
        return out

    def rate(self, nu):
        """Complex damping kernel gt(nu)."""
        nu = np.asarray(nu, dtype=float)
        re = np.where(nu > 0, self.gamma0, 0.0)
        if not self.include_lamb_shift or self.gamma0 == 0:
            return re.astype(complex)
        return re + 1j * self.lamb_shift(nu).reshape(nu.shape)


def build_m0(params: SystemParams) -> np.ndarray:
    wa, w0, g = params.omega_a, params.omega_0, params.g
    return np.array([
        [wa, g, 0, g],
        [g, w0, g, 0],
        [0, -g, -wa, -g],
        [-g, 0, -g, -w0],
    ], dtype=float)


def build_m1(params: SystemParams) -> np.ndarray:
    return np.diag([0.0, params.lam, 0.0, -params.lam])


def dimension(m: int) -> int:
    return 4 * (2 * m + 1)


def index(m: int, j: int, comp: int) -> int:
    """Row/column of component ``comp`` in sideband ``j`` (0-based)."""
    if abs(j) > m:
        raise IndexError(f"sideband {j} outside truncation {m}")
    return 4 * (j + m) + comp


def _static_part(params: SystemParams, m: int) -> np.ndarray:
    """Frequency-independent part: -M0 on the diagonal blocks, -+V off the diagonal."""
    n = 2 * m + 1
    m0 = build_m0(params)
    v = build_m1(params) / 2j
    out = np.zeros((4 * n, 4 * n), dtype=complex)
    for p in range(n):
        s = slice(4 * p, 4 * p + 4)
        out[s, s] = -m0
        if p + 1 < n:
            out[s, 4 * (p + 1):4 * (p + 2)] = -v
            out[4 * (p + 1):4 * (p + 2), s] = v
    return out


def _diagonal(damping: DampingModel, omegas: np.ndarray, m: int, eta: float) -> np.ndarray:
    """Frequency-dependent diagonal, shape (len(omegas), dim)."""
    j = np.arange(-m, m + 1)
    nu = omegas[:, None] + j[None, :] * eta
    diag = np.repeat(nu, 4, axis=1).astype(complex)
    diag[:, A::4] += 1j * damping.rate(nu)
    diag[:, AD::4] += 1j * np.conj(damping.rate(-nu))
    return diag


def assemble(params: SystemParams, damping: DampingModel, omega: float, m: int) -> np.ndarray:
    """Sideband Langevin matrix M(omega), complex, dimension 4(2m+1)."""
    if m < 1 or int(m) != m:
        raise AssemblyError(f"truncation order must be a positive integer, got {m}")
    if not np.isfinite(omega):
        raise AssemblyError("probe frequency must be finite")
    mat = _static_part(params, m)
    mat[np.diag_indices_from(mat)] += _diagonal(damping, np.array([float(omega)]), m, params.eta)[0]
    return mat


@dataclass(frozen=True)
class SidebandGreenFunction:
    m: int
    omega: float
    blocks: np.ndarray = field(repr=False)

    def element(self, j_row: int, c_row: int, j_col: int, c_col: int) -> complex:
        return self.blocks[index(self.m, j_row, c_row), index(self.m, j_col, c_col)]

    def pair_element(self, j: int) -> complex:
        """G between the central a row and the a^dag column of sideband j."""
        return self.element(0, A, j, AD)


def green_function(mat: np.ndarray, m: int | None = None, omega: float = float("nan"),
                   tol: float = 1e-10) -> SidebandGreenFunction:
    """Invert i*M and verify the residual."""
    if not np.all(np.isfinite(mat)):
        raise SingularMatrix("matrix has non-finite entries")
    im = 1j * mat
    try:
        gmat = np.linalg.inv(im)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix(str(exc)) from exc
    resid = np.max(np.abs(im @ gmat - np.eye(len(mat))))
    if not np.isfinite(resid) or resid > tol:
        raise SingularMatrix(f"inversion residual {resid:.3e} exceeds {tol:.0e}")
    if m is None:
        m = (len(mat) // 4 - 1) // 2
    return SidebandGreenFunction(m, omega, gmat)


class SidebandSolver:
    """Batched evaluation of the central a-row of G(omega).

    Only the row <a, j=0| of G enters the observables, so each frequency
    needs one linear solve with the transposed matrix instead of a full
    inverse.
    """

    def __init__(self, params: SystemParams, damping: DampingModel, m: int):
        if m < 1 or int(m) != m:
            raise AssemblyError(f"truncation order must be a positive integer, got {m}")
        self.params = params
        self.damping = damping
        self.m = int(m)
        self.dim = dimension(self.m)
        self._static_t = 1j * _static_part(params, self.m).T
        self._row = index(self.m, 0, A)
        self._cols = [index(self.m, j, AD) for j in range(-self.m, self.m + 1)]

    def central_row(self, omegas) -> np.ndarray:
        """Row G[a0, :] at each frequency, shape (n, dim)."""
        omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
        mats = np.repeat(self._static_t[None], len(omegas), axis=0)
        idx = np.arange(self.dim)
        mats[:, idx, idx] += 1j * _diagonal(self.damping, omegas, self.m, self.params.eta)
        rhs = np.zeros((len(omegas), self.dim, 1), dtype=complex)
        rhs[:, self._row, 0] = 1.0
        try:
            return np.linalg.solve(mats, rhs)[:, :, 0]
        except np.linalg.LinAlgError as exc:
            raise SingularMatrix(str(exc)) from exc

    def pair_weights(self, omegas) -> np.ndarray:
        """|G_{a0, a^dag j}(omega)|^2 for j = -m..m, shape (n, 2m+1)."""
        row = self.central_row(omegas)
        return np.abs(row[:, self._cols]) ** 2

    def sideband_frequencies(self) -> list[float]:
        """Frequencies where some sideband block is resonant or the bath switches on."""
        p = self.params
        lam0 = p.replace(lam=0.0)
        nm = normal_mode_frequencies(lam0)
        eps = [e for e in (nm.eps_minus, nm.eps_plus) if e > 0]
        pts = set()
        for k in range(-self.m, self.m + 1):
            pts.add(-k * p.eta)
            for e in eps:
                pts.add(e - k * p.eta)
                pts.add(-e - k * p.eta)
        return sorted(pts)


def _integrate_panels(f, edges, rtol):
    """Adaptive quadrature of scalar ``f`` over consecutive panels."""
    total, err = 0.0, 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for a, b in zip(edges[:-1], edges[1:]):
            if b <= a:
                continue
            val, e = integrate.quad(f, a, b, epsabs=0.0, epsrel=0.1 * rtol, limit=400)
            total += val
            err += e
    return total, err


def _panel_edges(lo, hi, points, max_width):
    pts = [x for x in points if lo < x < hi]
    edges = sorted(set([lo, hi] + pts))
    out = [edges[0]]
    for b in edges[1:]:
        a = out[-1]
        n = max(1, math.ceil((b - a) / max_width))
        out.extend(np.linspace(a, b, n + 1)[1:].tolist())
    return out


def _require_damping(damping: DampingModel):
    if damping.gamma0 <= 0:
        raise UndampedError("frequency integrals need gamma0 > 0")


def output_flux(params: SystemParams, damping: DampingModel, m: int = 2,
                rtol: float = 1e-6, return_error: bool = False):
    """Steady-state photon flux leaving the cavity (photons per unit time)."""
    _require_damping(damping)
    normal_phase_check(params)
    solver = SidebandSolver(params, damping, m)
    pts = solver.sideband_frequencies()
    pref = 2 * damping.gamma0**2 / np.pi
    total, err = 0.0, 0.0
    for jj, j in enumerate(range(-solver.m, 0)):
        col = jj

        def f(w, col=col):
            return solver.pair_weights(w)[0, col]

        hi = -j * params.eta
        v, e = _integrate_panels(f, _panel_edges(0.0, hi, pts, 0.25), rtol)
        total += v
        err += e
    total *= pref
    err *= pref
    if err > rtol * abs(total) + 1e-300:
        raise QuadratureFailure(f"flux error estimate {err:.2e} above tolerance")
    return (total, err) if return_error else total


def _power_tail(f, x0):
    """Estimate \\int_{x0}^inf f assuming power-law decay fitted at x0 and 2 x0."""
    f1, f2 = f(x0), f(2 * x0)
    if f1 <= 0 or f2 <= 0:
        return 0.0
    p = math.log(f1 / f2) / math.log(2.0)
    if p <= 1.5:
        raise QuadratureFailure(f"integrand tail decays too slowly (exponent {p:.2f})")
    return f1 * x0 / (p - 1)


def intracavity_photons(params: SystemParams, damping: DampingModel, m: int = 2,
                        rtol: float = 1e-6, return_error: bool = False):
    """Cycle-averaged steady-state <a^dag a> for vacuum bath input."""
    _require_damping(damping)
    normal_phase_check(params)
    solver = SidebandSolver(params, damping, m)
    nm = normal_mode_frequencies(params.replace(lam=0.0))
    w_max = max(nm.eps_plus, params.eta * (solver.m + 1)) + 50 * damping.gamma0 + 5
    # substitute nu = -w: integrate |G(nu)|^2 over nu < -j eta
    pts = solver.sideband_frequencies()
    total, err = 0.0, 0.0
    for col, j in enumerate(range(-solver.m, solver.m + 1)):

        def f(nu, col=col):
            return solver.pair_weights(nu)[0, col]

        hi = -j * params.eta
        v, e = _integrate_panels(f, _panel_edges(-w_max, hi, pts, 0.25), rtol)
        tail = _power_tail(lambda x: f(-x), w_max)
        total += v + tail
        err += e + tail
    pref = damping.gamma0 / np.pi
    total *= pref
    err *= pref
    if err > rtol * abs(total) + 1e-300:
        raise QuadratureFailure(f"photon-number error estimate {err:.2e} above tolerance")
    return (total, err) if return_error else total


def predicted_peaks(params: SystemParams) -> list[float]:
    """Positive frequencies where emission features are expected."""
    nm = normal_mode_frequencies(params.replace(lam=0.0))
    e0, eta = nm.eps_minus, params.eta
    cand = [e0, eta - e0, eta + e0, eta + 2 * e0, 2 * eta - e0]
    return sorted(x for x in cand if x > 0)


def check_grid(omega_grid, params: SystemParams, damping: DampingModel) -> bool:
    """Warn (GridTooCoarse) if spacing exceeds gamma0/5 within 3 gamma0 of a peak."""
    w = np.sort(np.asarray(omega_grid, dtype=float))
    g0 = damping.gamma0
    ok = True
    for peak in predicted_peaks(params):
        lo, hi = peak - 3 * g0, peak + 3 * g0
        if hi < w[0] or lo > w[-1]:
            continue
        k0 = max(np.searchsorted(w, lo) - 1, 0)
        k1 = min(np.searchsorted(w, hi) + 1, len(w))
        local = w[k0:k1]
        if len(local) < 2 or np.max(np.diff(local)) > g0 / 5 * (1 + 1e-9):
            ok = False
            warnings.warn(f"grid too coarse near predicted peak at omega={peak:.6g}",
                          GridTooCoarse, stacklevel=3)
    return ok


def spectral_density(params: SystemParams, damping: DampingModel, m: int, omega_grid,
                     check: bool = True) -> list[tuple[float, float]]:
    """Output spectrum S(omega) sampled on ``omega_grid`` (all points > 0)."""
    _require_damping(damping)
    normal_phase_check(params)
    w = np.asarray(omega_grid, dtype=float)
    if np.any(w <= 0):
        raise ValueError("spectrum grid must lie in (0, inf)")
    if check:
        check_grid(w, params, damping)
    s = spectral_values(params, damping, m, w)
    return list(zip(w.tolist(), s.tolist()))


def spectral_values(params: SystemParams, damping: DampingModel, m: int, w) -> np.ndarray:
    solver = SidebandSolver(params, damping, m)
    w = np.asarray(w, dtype=float)
    out = np.zeros_like(w)
    chunk = 4096
    for s in range(0, len(w), chunk):
        ws = w[s:s + chunk]
        weights = solver.pair_weights(ws)
        j = np.arange(-solver.m, solver.m + 1)
        mask = (j[None, :] < 0) & (ws[:, None] < -j[None, :] * params.eta)
        out[s:s + chunk] = np.sum(weights * mask, axis=1)
    return 2 * damping.gamma0**2 / np.pi * out


def intracavity_spectrum(params: SystemParams, damping: DampingModel, m: int, w) -> np.ndarray:
    """P(omega) with <a^dag a> = (1/2pi) \\int P over the real line."""
    solver = SidebandSolver(params, damping, m)
    w = np.asarray(w, dtype=float)
    j = np.arange(-solver.m, solver.m + 1)
    out = np.zeros_like(w)
    for s in range(0, len(w), 4096):
        ws = w[s:s + 4096]
        mask = ws[:, None] + j[None, :] * params.eta < 0
        out[s:s + 4096] = np.sum(solver.pair_weights(ws) * mask, axis=1)
    return 2 * damping.gamma0 * out


@dataclass
class SteadyStateObservables:
    intracavity_photons: float
    output_flux: float
    spectrum: list = field(default_factory=list)


def steady_state(params: SystemParams, damping: DampingModel, m: int = 2,
                 omega_grid=None, rtol: float = 1e-6) -> SteadyStateObservables:
    spec = [] if omega_grid is None else spectral_density(params, damping, m, omega_grid)
    return SteadyStateObservables(
        intracavity_photons(params, damping, m, rtol),
        output_flux(params, damping, m, rtol),
        spec,
    )


def choose_truncation(params: SystemParams, damping: DampingModel, tol: float = 1e-3,
                      cap: int = 8, rtol: float = 1e-8) -> int:
    """Smallest m whose flux agrees with the m+1 result to relative ``tol``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    prev = output_flux(params, damping, 1, rtol)
    for m in range(1, cap):
        nxt = output_flux(params, damping, m + 1, rtol)
        if abs(nxt - prev) <= tol * abs(nxt):
            return m
        prev = nxt
    raise NoConvergence(f"flux not converged in sideband order up to {cap}")
