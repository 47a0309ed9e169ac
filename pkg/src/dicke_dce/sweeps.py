"""Parameter sweeps, figure presets and deterministic CSV/manifest output."""
from __future__ import annotations

import itertools
import json
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .errors import ConfigError, DickeError
from .floquet import DampingModel, choose_truncation, intracavity_photons, output_flux, spectral_values
from .kz import excitation_probability
from .model import SystemParams, eigenfrequencies_squared, gap_minimum, static_gap

PARAM_NAMES = ("omega_a", "omega_0", "lambda", "eta", "g", "gamma0", "tau0", "n_atoms")
OBSERVABLES = ("flux", "photons", "kz_probability", "eps_min")


@dataclass(frozen=True)
class Axis:
    name: str
    min: float
    max: float
    count: int
    spacing: str = "linear"

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([float(self.min)])
        if self.spacing == "log":
            return np.geomspace(self.min, self.max, self.count)
        return np.linspace(self.min, self.max, self.count)


@dataclass
class SolverOptions:
    m: int | str = 2
    rtol: float = 1e-6
    truncation_tol: float = 1e-3
    n_max: int | None = None
    include_lamb_shift: bool = False


@dataclass
class RunConfig:
    params: SystemParams
    axes: list = field(default_factory=list)
    solver: SolverOptions = field(default_factory=SolverOptions)
    observables: tuple = ("flux", "photons")
    out_dir: str = "runs"
    job_id: str = "sweep"

    def resolved(self) -> dict:
        """Fully explicit, JSON-serializable form (recorded in the manifest)."""
        return {
            "job_id": self.job_id,
            "out_dir": str(self.out_dir),
            "params": self.params.to_dict(),
            "axes": [asdict(a) for a in self.axes],
            "solver": asdict(self.solver),
            "observables": list(self.observables),
        }


def _num(path, value, kind=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    if kind is int and int(value) != value:
        raise ConfigError(path, f"expected an integer, got {value!r}")
    return kind(value)


def parse_config(raw: dict) -> RunConfig:
    """Validate a nested mapping (as loaded from YAML/JSON) into a RunConfig."""
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a mapping")
    known = {"params", "sweep", "solver", "observables", "output", "job_id"}
    for key in raw:
        if key not in known:
            raise ConfigError(key, "unknown section")

    praw = raw.get("params", {}) or {}
    if not isinstance(praw, dict):
        raise ConfigError("params", "must be a mapping")
    pvals = {}
    for key, val in praw.items():
        if key not in PARAM_NAMES:
            raise ConfigError(f"params.{key}", "unknown parameter")
        pvals[key] = _num(f"params.{key}", val, int if key == "n_atoms" else float)
    try:
        params = SystemParams.from_dict(pvals)
    except (TypeError, ValueError) as exc:
        raise ConfigError("params", str(exc)) from exc

    axes = []
    sraw = raw.get("sweep", {}) or {}
    if not isinstance(sraw, dict):
        raise ConfigError("sweep", "must be a mapping with an 'axes' list")
    if not isinstance(sraw.get("axes", []) or [], list):
        raise ConfigError("sweep.axes", "must be a list")
    for k, ax in enumerate(sraw.get("axes", []) or []):
        path = f"sweep.axes[{k}]"
        if not isinstance(ax, dict):
            raise ConfigError(path, "must be a mapping")
        name = ax.get("name")
        if name not in PARAM_NAMES:
            raise ConfigError(f"{path}.name", f"unknown parameter {name!r}")
        lo = _num(f"{path}.min", ax.get("min"))
        hi = _num(f"{path}.max", ax.get("max"))
        count = _num(f"{path}.count", ax.get("count", 1), int)
        spacing = ax.get("spacing", "linear")
        if count < 1:
            raise ConfigError(f"{path}.count", "must be >= 1")
        if lo > hi:
            raise ConfigError(path, "min must not exceed max")
        if spacing not in ("linear", "log"):
            raise ConfigError(f"{path}.spacing", "must be 'linear' or 'log'")
        if spacing == "log" and lo <= 0:
            raise ConfigError(f"{path}.min", "log spacing needs a positive minimum")
        axes.append(Axis(name, lo, hi, count, spacing))

    sol_raw = raw.get("solver", {}) or {}
    if not isinstance(sol_raw, dict):
        raise ConfigError("solver", "must be a mapping")
    solver = SolverOptions()
    for key, val in sol_raw.items():
        path = f"solver.{key}"
        if key == "m":
            if val != "auto":
                val = _num(path, val, int)
                if val < 1:
                    raise ConfigError(path, "must be >= 1 or 'auto'")
        elif key in ("rtol", "truncation_tol"):
            val = _num(path, val)
            if val <= 0:
                raise ConfigError(path, "must be positive")
        elif key == "n_max":
            val = None if val is None else _num(path, val, int)
        elif key == "include_lamb_shift":
            if not isinstance(val, bool):
                raise ConfigError(path, "must be true or false")
        else:
            raise ConfigError(path, "unknown solver option")
        setattr(solver, key, val)

    obs = raw.get("observables", ["flux", "photons"])
    if isinstance(obs, str):
        obs = [obs]
    for k, name in enumerate(obs):
        if name not in OBSERVABLES:
            raise ConfigError(f"observables[{k}]", f"unknown observable {name!r}")

    out = raw.get("output", {}) or {}
    if not isinstance(out, dict):
        raise ConfigError("output", "must be a mapping")
    return RunConfig(params, axes, solver, tuple(obs), str(out.get("dir", "runs")),
                     str(raw.get("job_id", "sweep")))


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(str(path), str(exc)) from exc
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(str(path), f"parse error: {exc}") from exc
    return parse_config(raw or {})


def format_number(x) -> str:
    if x is None or (isinstance(x, float) and np.isnan(x)):
        return "nan"
    return f"{float(x):.12g}"


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else format_number(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def _solve_point(task: dict) -> dict:
    """Evaluate the requested observables at one grid point; never raises."""
    out = {name: float("nan") for name in task["observables"]}
    errors = []
    try:
        params = SystemParams.from_dict(task["params"])
        damping = DampingModel(params.gamma0, task["include_lamb_shift"])
        m = task["m"]
        if m == "auto" and ({"flux", "photons"} & set(task["observables"])):
            m = choose_truncation(params, damping, task["truncation_tol"])
        out["m"] = m
        for name in task["observables"]:
            try:
                if name == "flux":
                    out[name] = output_flux(params, damping, m, task["rtol"])
                elif name == "photons":
                    out[name] = intracavity_photons(params, damping, m, task["rtol"])
                elif name == "kz_probability":
                    with warnings.catch_warnings():
                        # stiff-mode separation warning; noted in the manifest instead
                        warnings.simplefilter("ignore", RuntimeWarning)
                        out[name] = excitation_probability(params, task["n_max"]).probability
                elif name == "eps_min":
                    out[name] = gap_minimum(params)[0]
            except (DickeError, ValueError, np.linalg.LinAlgError) as exc:
                errors.append(f"{name}:{type(exc).__name__}")
    except (DickeError, ValueError, np.linalg.LinAlgError) as exc:
        errors.append(type(exc).__name__)
    out["errors"] = ";".join(errors)
    return out


def run_tasks(tasks: list, jobs: int = 1) -> list:
    """Evaluate tasks, returning results in task order whatever the worker count."""
    if jobs <= 1 or len(tasks) <= 1:
        return [_solve_point(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_solve_point, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def _task(params: SystemParams, observables, solver: SolverOptions) -> dict:
    return {
        "params": params.to_dict(),
        "observables": tuple(observables),
        "m": solver.m,
        "rtol": solver.rtol,
        "truncation_tol": solver.truncation_tol,
        "n_max": solver.n_max,
        "include_lamb_shift": solver.include_lamb_shift,
    }


@dataclass
class RunReport:
    out_dir: Path
    files: list
    n_points: int
    n_failed: int

    @property
    def exit_code(self) -> int:
        if self.n_points and self.n_failed == self.n_points:
            return 2
        return 3 if self.n_failed else 0


def _write_manifest(out_dir: Path, resolved: dict, files: list, started: float,
                    n_points: int, n_failed: int, extra: dict | None = None) -> None:
    manifest = {
        "code_version": __version__,
        "config": resolved,
        "files": files,
        "points": n_points,
        "failed_points": n_failed,
        "wall_time_s": round(time.time() - started, 3),
    }
    if extra:
        manifest.update(extra)
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def run_custom(config: RunConfig, out_dir=None, jobs: int = 1) -> RunReport:
    """Cartesian sweep over the config axes, rows in lexicographic axis order."""
    started = time.time()
    out = Path(out_dir or config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = [a.name for a in config.axes]
    grids = [a.values() for a in config.axes]
    points = list(itertools.product(*grids)) if grids else [()]
    tasks = []
    base = config.params.to_dict()
    for pt in points:
        d = dict(base)
        d.update({n: (int(v) if n == "n_atoms" else float(v)) for n, v in zip(names, pt)})
        try:
            params = SystemParams.from_dict(d)
        except ValueError as exc:
            raise ConfigError("sweep.axes", f"grid point {dict(zip(names, pt))}: {exc}") from exc
        tasks.append(_task(params, config.observables, config.solver))
    results = run_tasks(tasks, jobs)
    header = names + list(config.observables) + ["errors"]
    rows = [list(pt) + [r[o] for o in config.observables] + [r["errors"]]
            for pt, r in zip(points, results)]
    fname = f"{config.job_id}.csv"
    write_csv(out / fname, header, rows)
    n_failed = sum(1 for r in results if r["errors"])
    resolved = config.resolved()
    resolved["out_dir"] = str(out)
    ms = sorted({str(r.get("m")) for r in results if "m" in r})
    _write_manifest(out, resolved, [fname], started, len(points), n_failed,
                    {"truncation_m": ms})
    return RunReport(out, [fname], len(points), n_failed)


# ---------------------------------------------------------------- presets

REFERENCE = dict(omega_a=1.0, omega_0=1.0, lam=0.005, gamma0=0.005)
PRESETS = ("fig1a", "fig1b", "fig2", "fig3b", "fig4")


def _flux_curve(params_list, solver, jobs):
    tasks = [_task(p, ("flux",), solver) for p in params_list]
    return run_tasks(tasks, jobs)


def _fig1a(out, jobs, solver):
    base = SystemParams(g=0.45, **REFERENCE)
    etas = np.linspace(0.1, 1.2, 200)
    res = _flux_curve([base.replace(eta=float(e)) for e in etas], solver, jobs)
    rows = [[e, r["flux"], r["errors"]] for e, r in zip(etas, res)]
    write_csv(out / "fig1a.csv", ["eta", "flux", "errors"], rows)
    eps0 = static_gap(base)
    return ["fig1a.csv"], res, {"params": base.to_dict(), "axes": {"eta": [0.1, 1.2, 200]},
                                "annotations": {"eps0": eps0, "resonance_2eps0": 2 * eps0}}


def _fig1b(out, jobs, solver):
    base = SystemParams(g=0.45, **REFERENCE)
    gs = np.linspace(0.2, 0.48, 20)
    etas = np.linspace(0.2, 1.8, 20)
    grid = list(itertools.product(gs, etas))
    res = _flux_curve([base.replace(g=float(g), eta=float(e)) for g, e in grid], solver, jobs)
    rows = [[g, e, r["flux"], r["errors"]] for (g, e), r in zip(grid, res)]
    write_csv(out / "fig1b.csv", ["g", "eta", "flux", "errors"], rows)
    return ["fig1b.csv"], res, {"params": base.to_dict(),
                                "axes": {"g": [0.2, 0.48, 20], "eta": [0.2, 1.8, 20]}}


def _spectrum_task(task):
    params = SystemParams.from_dict(task["params"])
    damping = DampingModel(params.gamma0, task["include_lamb_shift"])
    w = np.asarray(task["omega"])
    try:
        return {"S": spectral_values(params, damping, task["m"], w), "errors": ""}
    except (DickeError, ValueError) as exc:
        return {"S": np.full(len(w), np.nan), "errors": type(exc).__name__}


FIG2_RATIOS = (1.0, 0.7, 1.3)
FIG2_M = 3


def _fig2(out, jobs, solver):
    base = SystemParams(g=0.45, **REFERENCE)
    eps0 = static_gap(base)
    omega = np.arange(1, 4001) * (base.gamma0 / 10)
    tasks = [{"params": base.replace(eta=2 * eps0 * r).to_dict(), "omega": omega,
              "m": FIG2_M, "include_lamb_shift": solver.include_lamb_shift} for r in FIG2_RATIOS]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            res = list(pool.map(_spectrum_task, tasks))
    else:
        res = [_spectrum_task(t) for t in tasks]
    files = []
    for r, rr in zip(FIG2_RATIOS, res):
        name = f"fig2_eta_ratio_{r:.1f}.csv"
        write_csv(out / name, ["omega", "S"], [[w, s] for w, s in zip(omega, rr["S"])])
        files.append(name)
    res = [{"errors": rr["errors"]} for rr in res]
    return files, res, {"params": base.to_dict(), "sideband_order": FIG2_M,
                        "eta_over_2eps0": list(FIG2_RATIOS),
                        "omega_grid": [float(omega[0]), float(omega[-1]), len(omega)],
                        "annotations": {"eps0": eps0}}


FIG3B_LAMBDAS = (0.005, 0.01, 0.02)


def _fig3b(out, jobs, solver):
    base = SystemParams(g=0.49, omega_a=1.0, omega_0=1.0, lam=0.005, gamma0=0.0)
    eps0 = static_gap(base)
    ratios = np.linspace(0.5, 40.0, 200)
    files, all_res = [], []
    for lam in FIG3B_LAMBDAS:
        tasks = [_task(base.replace(lam=lam, eta=float(r * eps0)), ("kz_probability",), solver)
                 for r in ratios]
        res = run_tasks(tasks, jobs)
        name = f"fig3b_lambda_{lam:g}.csv"
        write_csv(out / name, ["eta_over_eps0", "P", "errors"],
                  [[r, x["kz_probability"], x["errors"]] for r, x in zip(ratios, res)])
        files.append(name)
        all_res.extend(res)
    return files, all_res, {"params": base.to_dict(), "lambdas": list(FIG3B_LAMBDAS),
                            "axes": {"eta_over_eps0": [0.5, 40.0, 200]},
                            "annotations": {"eps0": eps0, "eps_plus": float(np.sqrt(
                                eigenfrequencies_squared(1.0, 1.0, base.g)[1]))},
                            "notes": "single soft-mode reduction; drives with eta > eps_plus/5 "
                                     "approach the stiff mode"}


FIG4_RATIOS = (0.9, 0.96, 0.99)


def _fig4(out, jobs, solver):
    files, all_res, notes = [], [], {}
    for r in FIG4_RATIOS:
        base = SystemParams(g=0.5 * r, **REFERENCE)
        eps_min = gap_minimum(base)[0]
        eps0 = static_gap(base)
        etas = np.linspace(0.5 * eps_min, 2.5 * eps0, 150)
        res = _flux_curve([base.replace(eta=float(e)) for e in etas], solver, jobs)
        name = f"fig4_g_over_gc_{r:g}.csv"
        write_csv(out / name, ["eta", "flux", "errors"],
                  [[e, x["flux"], x["errors"]] for e, x in zip(etas, res)])
        files.append(name)
        all_res.extend(res)
        notes[name] = {"params": base.to_dict(), "eps_min": eps_min, "eps0": eps0}
    return files, all_res, {"curves": notes}


_PRESET_FUNCS = {"fig1a": _fig1a, "fig1b": _fig1b, "fig2": _fig2, "fig3b": _fig3b, "fig4": _fig4}


def run_figure(preset: str, out_dir="figures", jobs: int = 1,
               solver: SolverOptions | None = None) -> RunReport:
    """Write the CSV data behind one of the reproduced figures plus a manifest."""
    if preset not in _PRESET_FUNCS:
        raise ConfigError("preset", f"unknown preset {preset!r}; choose from {', '.join(PRESETS)}")
    started = time.time()
    solver = solver or SolverOptions()
    out = Path(out_dir) / preset
    out.mkdir(parents=True, exist_ok=True)
    files, res, extra = _PRESET_FUNCS[preset](out, jobs, solver)
    n_failed = sum(1 for r in res if r["errors"])
    resolved = {"preset": preset, "solver": asdict(solver), "out_dir": str(out)}
    resolved.update(extra)
    _write_manifest(out, resolved, files, started, len(res), n_failed)
    return RunReport(out, files, len(res), n_failed)
