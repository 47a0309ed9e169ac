"""Command line entry point ``sim``.

    sim figure <preset> [--out DIR] [--jobs N]
    sim sweep --config FILE [--out DIR] [--jobs N]
    sim validate --config FILE

Exit codes: 0 success, 1 config error, 2 solver error (all points failed or a
validation check failed), 3 partial failure.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from .errors import ConfigError, DickeError
from .sweeps import PRESETS, load_config, run_custom, run_figure


def validate_point(config) -> list[tuple[str, bool, str]]:
    """Run the invariant checks at the config's base parameter point."""
    from .floquet import (DampingModel, assemble, green_function, output_flux,
                          spectral_values, intracavity_photons)
    from .kz import KzSchedule, freeze_out_times
    from .model import eigenfrequencies_squared, normal_phase_check, omega_b
    from .oracle import floquet_multipliers

    p = config.params
    damping = DampingModel(p.gamma0, config.solver.include_lamb_shift)
    m = config.solver.m if config.solver.m != "auto" else 2
    checks = []

    def record(name, fn):
        try:
            ok, detail = fn()
        except (DickeError, ValueError, np.linalg.LinAlgError) as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        checks.append((name, bool(ok), detail))

    record("normal phase", lambda: (normal_phase_check(p) is None, "g below g_c(t) over the period"))
    if not checks[-1][1]:
        # nothing else is defined outside the normal phase
        return checks

    def trace_det():
        ts = np.linspace(0, p.period, 64)
        wb = omega_b(p, ts)
        em2, ep2 = eigenfrequencies_squared(p.omega_a, wb, p.g)
        e1 = np.max(np.abs(em2 + ep2 - p.omega_a**2 - wb**2))
        e2 = np.max(np.abs(em2 * ep2 - (p.omega_a**2 * wb**2 - 4 * p.g**2 * p.omega_a * wb)))
        return max(e1, e2) < 1e-12, f"max deviation {max(e1, e2):.1e}"

    record("trace/determinant identities", trace_det)

    def residual():
        worst = 0.0
        for w in np.linspace(0.05, 2.0, 7):
            mat = assemble(p, damping, w, m)
            gf = green_function(mat, m, w)
            worst = max(worst, np.max(np.abs(1j * mat @ gf.blocks - np.eye(len(mat)))))
        return worst <= 1e-10, f"max residual {worst:.1e}"

    record("Green-function residual", residual)

    if p.gamma0 > 0:
        def stable():
            mult = np.max(np.abs(floquet_multipliers(p, damping)))
            return mult < 1, f"largest Floquet multiplier {mult:.6f}"

        def null():
            q = p.replace(lam=0.0)
            f = output_flux(q, damping, m)
            s = np.max(spectral_values(q, damping, m, np.linspace(0.01, 2, 200)))
            return max(f, s) <= 1e-12, f"flux {f:.1e}, max S {s:.1e}"

        def consistency():
            f = output_flux(p, damping, m, 1e-8)
            if f == 0:
                return True, "flux is zero"
            w = np.linspace(0, m * p.eta, 400001)[1:]
            s = spectral_values(p, damping, m, w)
            integ = np.trapezoid(s, w)
            rel = abs(integ - f) / f
            return rel < 1e-3, f"relative mismatch {rel:.1e}"

        def positivity():
            n = intracavity_photons(p, damping, m)
            return n >= 0, f"<a^dag a> = {n:.6g}"

        record("steady state exists", stable)
        record("zero-drive nullity", null)
        record("flux/spectrum consistency", consistency)
        record("photon number positive", positivity)

    if p.g > 0 and p.lam > 0:
        def roots():
            try:
                n = len(freeze_out_times(KzSchedule(p)))
            except DickeError as exc:
                if type(exc).__name__ == "NoFreezeOut":
                    return True, "0 freeze-out times"
                raise
            return n % 2 == 0, f"{n} freeze-out times"

        record("freeze-out root parity", roots)
    return checks


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="sim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    fig = sub.add_parser("figure", help="reproduce the data of one figure")
    fig.add_argument("preset", choices=PRESETS)
    fig.add_argument("--out", default="figures")
    fig.add_argument("--jobs", type=int, default=1)

    sw = sub.add_parser("sweep", help="run a custom sweep from a config file")
    sw.add_argument("--config", required=True)
    sw.add_argument("--out", default=None)
    sw.add_argument("--jobs", type=int, default=1)

    va = sub.add_parser("validate", help="check invariants at the config point")
    va.add_argument("--config", required=True)

    args = parser.parse_args(argv)
    try:
        if args.command == "figure":
            report = run_figure(args.preset, args.out, args.jobs)
        elif args.command == "sweep":
            report = run_custom(load_config(args.config), args.out, args.jobs)
        else:
            checks = validate_point(load_config(args.config))
            for name, ok, detail in checks:
                print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
            return 0 if all(ok for _, ok, _ in checks) else 2
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {', '.join(report.files)} to {report.out_dir} "
          f"({report.n_points} points, {report.n_failed} failed)")
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
