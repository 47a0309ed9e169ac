"""Acceptance gate: one test per release criterion, each at its stated tolerance.

Every test records a PASS/FAIL line (shown in the terminal summary and printed
immediately with ``-s``) before asserting.
"""
import json
import shutil
import subprocess
import sys
import time
import timeit

import numpy as np
import pytest
from scipy.signal import find_peaks

from conftest import ACCEPTANCE
from _oracles import quadrature_overlaps
from dicke_dce import DampingModel, NoFreezeOut, SystemParams, intracavity_photons, output_flux
from dicke_dce.floquet import spectral_values
from dicke_dce.kz import KzSchedule, freeze_out_times, overlap_coefficients, root_residuals
from dicke_dce.model import eigenfrequencies_squared, normal_mode_frequencies, static_gap
from dicke_dce.oracle import cycle_averaged_photons
from dicke_dce.sweeps import FIG2_RATIOS, FIG3B_LAMBDAS, FIG4_RATIOS, run_figure

GAMMA = 0.005
REF = SystemParams(g=0.45, lam=0.005, gamma0=GAMMA)


def report(num, ok, detail):
    line = f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE.append(line)
    print(line)
    assert ok, line


def read_csv(path):
    return np.genfromtxt(path, delimiter=",", names=True, dtype=None, encoding=None)


def sim_command():
    exe = shutil.which("sim")
    return [exe] if exe else [sys.executable, "-m", "dicke_dce.cli"]


@pytest.fixture(scope="module")
def fig1a_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("fig1a_first")
    start = time.perf_counter()
    proc = subprocess.run(sim_command() + ["figure", "fig1a", "--out", str(out), "--jobs", "8"],
                          capture_output=True, text=True)
    return out / "fig1a", proc.returncode, time.perf_counter() - start


def test_criterion_01_normal_mode_value():
    p = SystemParams(g=0.45)
    eps0 = static_gap(p)
    runtime = min(timeit.repeat(lambda: static_gap(p), number=1, repeat=20))
    ok = 0.312 <= eps0 <= 0.319 and abs(eps0 / 0.315 - 1) <= 0.015 and runtime < 1e-3
    report(1, ok, f"eps0 = {eps0:.6f} (target 0.315 +- 1.5%), {runtime * 1e3:.3f} ms")


def test_criterion_02_gap_closure():
    rng = np.random.default_rng(2)
    start = time.perf_counter()
    worst_gap, worst_id = 0.0, 0.0
    for wa, w0 in rng.uniform(0.05, 10.0, size=(100, 2)):
        gc = np.sqrt(wa * w0) / 2
        worst_gap = max(worst_gap, normal_mode_frequencies(SystemParams(omega_a=wa, omega_0=w0, g=gc)).eps_minus)
        g = rng.uniform(0, gc)
        em2, ep2 = eigenfrequencies_squared(wa, w0, g)
        scale = max(wa, w0) ** 2
        worst_id = max(worst_id, abs(em2 + ep2 - wa**2 - w0**2) / scale,
                       abs(em2 * ep2 - (wa**2 * w0**2 - 4 * g**2 * wa * w0)) / scale**2)
    runtime = time.perf_counter() - start
    ok = worst_gap <= 1e-10 and worst_id <= 1e-12 and runtime < 1
    report(2, ok, f"max eps_-(g_c) = {worst_gap:.1e}, max identity error = {worst_id:.1e}, "
                  f"{runtime:.2f} s")


def test_criterion_03_resonance_location(fig1a_run):
    out, code, runtime = fig1a_run
    data = read_csv(out / "fig1a.csv")
    eta_peak = data["eta"][np.argmax(data["flux"])]
    ok = code == 0 and len(data) == 200 and abs(eta_peak - 0.632) <= 0.01 and runtime < 120
    report(3, ok, f"flux maximum at eta = {eta_peak:.5f} (target 0.632 +- 0.01), "
                  f"200 points in {runtime:.1f} s")


def test_criterion_04_zero_drive_nullity():
    rng = np.random.default_rng(4)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(20):
        wa, w0 = rng.uniform(0.5, 2.0, 2)
        p = SystemParams(omega_a=wa, omega_0=w0, g=rng.uniform(0, 0.99) * np.sqrt(wa * w0) / 2,
                         eta=rng.uniform(0.1, 2.0), gamma0=rng.uniform(0.001, 0.05))
        d = DampingModel(p.gamma0)
        s = spectral_values(p, d, 2, np.linspace(1e-3, 3.0, 600))
        worst = max(worst, output_flux(p, d), np.max(np.abs(s)))
    runtime = time.perf_counter() - start
    ok = worst <= 1e-12 and runtime < 60
    report(4, ok, f"max |flux|, |S| at lambda = 0: {worst:.1e} over 20 sets, {runtime:.1f} s")


def _dominant_peaks(w, s, frac=0.1):
    idx, _ = find_peaks(s)
    idx = idx[s[idx] >= frac * s.max()]
    return w[idx]


def _has_feature(w, s, x, tol):
    """Local maximum within tol of x standing above the median within +-10 tol."""
    idx, _ = find_peaks(s)
    near = idx[np.abs(w[idx] - x) <= tol]
    if len(near) == 0:
        return False
    background = np.median(s[np.abs(w - x) <= 10 * tol])
    return bool(s[near].max() > 2 * background)


def test_criterion_05_spectral_structure(tmp_path):
    start = time.perf_counter()
    rep = run_figure("fig2", tmp_path)
    eps0 = static_gap(REF)
    results = []
    for r in FIG2_RATIOS:
        data = read_csv(tmp_path / "fig2" / f"fig2_eta_ratio_{r:.1f}.csv")
        w, s = data["omega"], data["S"]
        eta = 2 * eps0 * r
        dom = _dominant_peaks(w, s)
        if r == 1.0:
            ok = len(dom) == 1 and abs(dom[0] - eps0) <= GAMMA
            results.append((ok, f"eta=2eps0: dominant {np.round(dom, 4).tolist()}"))
        else:
            targets = (eta - eps0, eta + eps0)
            at_targets = all(np.any(np.abs(dom - x) <= 2 * GAMMA) for x in targets)
            only_targets = all(min(abs(x - t) for t in targets) <= 2 * GAMMA for x in dom)
            feature = _has_feature(w, s, eta + 2 * eps0, 2 * GAMMA)
            ok = at_targets and only_targets and feature
            results.append((ok, f"eta/2eps0={r}: dominant {np.round(dom, 4).tolist()} vs eta-+eps0 "
                                f"{np.round(targets, 4).tolist()}, feature at eta+2eps0: {feature}"))
    runtime = time.perf_counter() - start
    ok = rep.exit_code == 0 and all(x for x, _ in results) and runtime < 300
    report(5, ok, "; ".join(d for _, d in results) + f"; {runtime:.1f} s")


def test_criterion_06_ridge(tmp_path):
    start = time.perf_counter()
    rep = run_figure("fig1b", tmp_path)
    data = read_csv(tmp_path / "fig1b" / "fig1b.csv")
    gs = np.unique(data["g"])
    etas = np.unique(data["eta"])
    cell = etas[1] - etas[0]
    misses = []
    for g in gs:
        rows = data[data["g"] == g]
        best = rows["eta"][np.argmax(rows["flux"])]
        target = 2 * static_gap(REF.replace(g=float(g)))
        if abs(best - target) > cell * (1 + 1e-9):
            misses.append(f"g={g:.3f}: {best:.3f} vs {target:.3f}")
    runtime = time.perf_counter() - start
    ok = rep.exit_code == 0 and len(gs) == 20 and len(etas) == 20 and not misses and runtime < 900
    report(6, ok, f"{len(gs) - len(misses)}/{len(gs)} rows peak within one cell of 2 eps0(g)"
                  + (f" (misses: {', '.join(misses)})" if misses else "") + f", {runtime:.1f} s")


def test_criterion_07_oracle_equivalence():
    start = time.perf_counter()
    eps0 = static_gap(REF)
    d = DampingModel(GAMMA)
    parts, worst = [], 0.0
    for r in (1.0, 0.7, 1.3):
        p = REF.replace(eta=2 * eps0 * r)
        n_fd = intracavity_photons(p, d, 2)
        n_td, _ = cycle_averaged_photons(p, d)
        rel = abs(n_td - n_fd) / n_fd
        worst = max(worst, rel)
        parts.append(f"eta/2eps0={r}: {n_fd:.6f} vs {n_td:.6f}")
    runtime = time.perf_counter() - start
    ok = worst <= 0.05 and runtime < 600
    report(7, ok, "; ".join(parts) + f"; max rel diff {worst:.1e}, {runtime:.1f} s")


def test_criterion_08_kz_roots():
    start = time.perf_counter()
    sched = KzSchedule(SystemParams(g=0.49, lam=0.005, eta=2.0))
    times = freeze_out_times(sched)
    resid = float(np.max(root_residuals(sched, times)))
    runtime = time.perf_counter() - start
    ok = len(times) == 4 and resid < 1e-9 and runtime < 1
    phases = [round(t * sched.params.eta / np.pi, 4) for t in times.times]
    report(8, ok, f"{len(times)} roots at eta t/pi = {phases}, max residual {resid:.1e}, "
                  f"{runtime * 1e3:.0f} ms")


def test_criterion_09_overlap_table():
    rng = np.random.default_rng(9)
    start = time.perf_counter()
    worst_q, worst_w, parity = 0.0, 0.0, True
    for _ in range(50):
        # pairs up to a frequency ratio of 6, beyond the range met at freeze-out
        e1 = rng.uniform(0.05, 1.5)
        e2 = e1 * np.exp(rng.uniform(-np.log(6), np.log(6)))
        c = overlap_coefficients(e1, e2, 40, check=False).coefficients
        n, m = np.indices(c.shape)
        parity &= bool(np.all(c[(n + m) % 2 == 1] == 0))
        worst_w = max(worst_w, 1 - np.sum(c[:, 0] ** 2))
        worst_q = max(worst_q, np.max(np.abs(c - quadrature_overlaps(e1, e2, 40))))
    runtime = time.perf_counter() - start
    ok = worst_w <= 1e-6 and parity and worst_q <= 1e-8 and runtime < 30
    report(9, ok, f"min sum|c_n0|^2 = 1 - {worst_w:.1e}, odd entries zero: {parity}, "
                  f"max |closed form - quadrature| = {worst_q:.1e}, {runtime:.1f} s")


def test_criterion_10_kz_probability(tmp_path):
    start = time.perf_counter()
    rep = run_figure("fig3b", tmp_path)
    curves = [read_csv(tmp_path / "fig3b" / f"fig3b_lambda_{lam:g}.csv") for lam in FIG3B_LAMBDAS]
    eps0 = static_gap(SystemParams(g=0.49))
    bounded = all(np.all((c["P"] >= 0) & (c["P"] <= 1)) for c in curves)
    frozen_zero, n_adiabatic = True, 0
    for lam, c in zip(FIG3B_LAMBDAS, curves):
        for ratio, prob in zip(c["eta_over_eps0"], c["P"]):
            try:
                freeze_out_times(KzSchedule(SystemParams(g=0.49, lam=lam, eta=ratio * eps0)))
            except NoFreezeOut:
                n_adiabatic += 1
                frozen_zero &= prob == 0
    p = np.array([c["P"] for c in curves])
    ordered = bool(np.all(np.diff(p, axis=0) >= 0))
    # where the weaker drive already freezes out, the stronger one must excite more
    strict = bool(all(np.all(p[k + 1][p[k] > 0] > p[k][p[k] > 0]) for k in range(len(p) - 1)))
    runtime = time.perf_counter() - start
    ok = rep.exit_code == 0 and bounded and frozen_zero and ordered and strict and runtime < 120
    report(10, ok, f"bounded: {bounded}, zero in {n_adiabatic} adiabatic points: {frozen_zero}, "
                   f"ordered in lambda: {ordered} (strict where the weaker curve is nonzero: {strict}), "
                   f"max P = {p.max():.3g}, {runtime:.1f} s")


def test_criterion_11_adiabatic_step(tmp_path):
    start = time.perf_counter()
    rep = run_figure("fig4", tmp_path)
    manifest = json.loads((tmp_path / "fig4" / "manifest.json").read_text())["config"]["curves"]
    d = DampingModel(GAMMA)
    ratios, locations, parts = [], [], []
    for r in FIG4_RATIOS:
        name = f"fig4_g_over_gc_{r:g}.csv"
        info = manifest[name]
        p = SystemParams.from_dict(info["params"])
        e_min, e0 = info["eps_min"], info["eps0"]
        drop = output_flux(p.replace(eta=1.1 * e_min), d) / output_flux(p.replace(eta=0.9 * e_min), d)
        data = read_csv(tmp_path / "fig4" / name)
        slope = np.gradient(np.log(data["flux"]), data["eta"])
        below = data["eta"] < 1.5 * e0
        loc = data["eta"][np.argmax(np.where(below, slope, -np.inf))]
        ratios.append(drop)
        locations.append(loc)
        parts.append(f"g/gc={r}: drop x{drop:.1f}, step at eta={loc:.4f} (eps_min={e_min:.4f})")
    shifts_down = bool(np.all(np.diff(locations) < 0))
    runtime = time.perf_counter() - start
    ok = rep.exit_code == 0 and min(ratios) >= 10 and shifts_down and runtime < 600
    report(11, ok, "; ".join(parts) + f"; shifts lower: {shifts_down}; {runtime:.1f} s")


def test_criterion_12_lambda_squared():
    start = time.perf_counter()
    d = DampingModel(GAMMA)
    p = REF.replace(eta=0.45)
    ratios = [output_flux(p.replace(lam=2 * lam), d) / output_flux(p.replace(lam=lam), d)
              for lam in (0.001, 0.0025)]
    runtime = time.perf_counter() - start
    ok = all(abs(x / 4 - 1) <= 0.01 for x in ratios) and runtime < 120
    report(12, ok, f"flux(2 lambda)/flux(lambda) = {', '.join(f'{x:.4f}' for x in ratios)} "
                   f"at eta = 0.45, {runtime:.1f} s")


def test_criterion_13_determinism(fig1a_run, tmp_path):
    first, code1, t1 = fig1a_run
    start = time.perf_counter()
    proc = subprocess.run(sim_command() + ["figure", "fig1a", "--out", str(tmp_path), "--jobs", "8"],
                          capture_output=True, text=True)
    t2 = time.perf_counter() - start
    same = (first / "fig1a.csv").read_bytes() == (tmp_path / "fig1a" / "fig1a.csv").read_bytes()
    ok = code1 == 0 and proc.returncode == 0 and same and t1 + t2 < 300
    report(13, ok, f"two --jobs 8 runs byte-identical: {same}, {t1 + t2:.1f} s total")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-s"]))
