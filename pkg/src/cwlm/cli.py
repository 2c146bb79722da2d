"""Command-line front end.

Subcommands: trajectory | conditioned | decision | feedback | oracle.
Every run resolves its parameters from built-in defaults, then an optional
config file of flat dotted keys (``detector.theta = 0.03``), then flags
(flags win), and writes its artifacts plus a JSON manifest that records the
fully resolved configuration.  Re-running from a manifest reproduces the
artifacts bit-exactly; see FORMATS.md for every file schema.

The default output directory is taken from $CWLM_OUTDIR when set.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__, oracle, stats
from .detector import ConfigurationError, DetectorParams
from .feedback import FeedbackConfig, mc_objective, optimize, run_feedback, sweep, sweep_to_csv
from .qstate import QubitState
from .stats import (
    conditioned_averages,
    conditioned_to_csv,
    decision_ensemble,
    decision_histogram,
    distribution_moments,
    fit_decision_density,
    fit_report,
    write_json,
)
from .trajectory import SimulationConfig, ensemble_to_csv, ensemble_to_npz, run_ensemble

_FMT = ".17g"
_DEFAULT_WORKERS = max(1, os.cpu_count() or 1)


# -- small helpers -------------------------------------------------------------

def _atomic_write(path: str, writer) -> None:
    tmp = path + ".tmp"
    writer(tmp)
    os.replace(tmp, path)


def _parse_grid(text: str) -> list[float]:
    """Comma list '0,0.5,1' or range 'start:stop:step' (stop inclusive)."""
    if ":" in text:
        start, stop, step = (float(x) for x in text.split(":"))
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [start + i * step for i in range(n)]
    return [float(x) for x in text.split(",")]


def load_config_file(path: str) -> dict:
    """Flat dotted-key config: 'key = value' lines, # comments, JSON values."""
    out = {}
    with open(path) as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            try:
                out[key.strip()] = json.loads(value.strip())
            except json.JSONDecodeError:
                out[key.strip()] = value.strip()
    return out


def _resolve(defaults: dict, args: argparse.Namespace, flag_map: dict[str, str]) -> dict:
    params = dict(defaults)
    if getattr(args, "config", None):
        file_cfg = load_config_file(args.config)
        unknown = set(file_cfg) - set(defaults)
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        params.update(file_cfg)
    for dest, key in flag_map.items():
        val = getattr(args, dest, None)
        if val is not None:
            params[key] = val
    return params


def _outdir(args) -> str:
    out = getattr(args, "out", None) or os.environ.get("CWLM_OUTDIR") or "."
    os.makedirs(out, exist_ok=True)
    return out


def _write_manifest(outdir: str, name: str, subcommand: str, params: dict,
                    outputs: list[str], t0: float, warnings_: list[str] | None = None) -> str:
    manifest = {
        "subcommand": subcommand,
        "config": params,
        "seed": params.get("seed"),
        "outputs": outputs,
        "code_version": __version__,
        "duration_seconds": time.time() - t0,
        "created_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    if warnings_:
        manifest["warnings"] = warnings_
    path = os.path.join(outdir, name)
    _atomic_write(path, lambda tmp: write_json(manifest, tmp))
    return path


def _csv_writer(header: str, rows):
    def write(path):
        with open(path, "w") as f:
            f.write(header + "\n")
            for row in rows:
                f.write(",".join(format(x, _FMT) if isinstance(x, float) else str(x)
                                 for x in row) + "\n")
    return write


def _sim_config(params: dict) -> SimulationConfig:
    ham = None
    if params.get("hamiltonian.omega_y") is not None:
        ham = ("y", float(params["hamiltonian.omega_y"]))
    return SimulationConfig(
        detector=DetectorParams(theta=float(params["detector.theta"])),
        total_time=float(params["total_time"]),
        sampling_interval=float(params["sampling_interval"]),
        hamiltonian=ham,
        output_noise_extra=float(params.get("output_noise_extra", 0.0)),
        seed=int(params["seed"]),
        n_trajectories=int(params["n_trajectories"]),
        store_full_grid=bool(params["store_full_grid"]),
    )


# -- subcommand runners ----------------------------------------------------------

TRAJECTORY_DEFAULTS = {
    "detector.theta": 0.03,
    "total_time": 5.0,
    "sampling_interval": 0.1,
    "n_trajectories": 1,
    "seed": 0,
    "hamiltonian.omega_y": None,
    "output_noise_extra": 0.0,
    "store_full_grid": None,   # None: full grid iff a single trajectory
    "write_npz": False,
    "workers": _DEFAULT_WORKERS,
}


def run_cmd_trajectory(params: dict, outdir: str) -> list[str]:
    t0 = time.time()
    params = dict(params)
    if params.get("store_full_grid") is None:
        params["store_full_grid"] = int(params["n_trajectories"]) == 1
    cfg = _sim_config(params)
    ens = run_ensemble(cfg, QubitState(1.0, 0.0, 0.0), workers=int(params["workers"]))
    outputs = []
    csv_path = os.path.join(outdir, "trajectory.csv")
    _atomic_write(csv_path, lambda tmp: ensemble_to_csv(ens, tmp))
    outputs.append(csv_path)
    if params["write_npz"]:
        npz_path = os.path.join(outdir, "trajectory.npz")
        ensemble_to_npz(ens, npz_path)
        outputs.append(npz_path)
        outputs.append(os.path.splitext(npz_path)[0] + ".json")
    outputs.append(_write_manifest(outdir, "trajectory_manifest.json", "trajectory",
                                   params, [os.path.basename(p) for p in outputs], t0))
    return outputs


CONDITIONED_DEFAULTS = {
    "detector.theta": 0.03,
    "total_time": 3.0,
    "sampling_interval": 0.1,
    "n_trajectories": 500,
    "seed": 0,
    "workers": _DEFAULT_WORKERS,
}

# empirical fit for the post-selected mean of Sigma_z, reported for comparison
_COND_FIT = (1.15, 2.8, 4.2)


def conditioned_fit_curve(t):
    """tanh(t (1.15 + 2.8/(1 + 4.2 t))), the reference curve for <Sigma_z>_c."""
    t = np.asarray(t, dtype=float)
    p, q, r = _COND_FIT
    return np.tanh(t * (p + q / (1.0 + r * t)))


def run_cmd_conditioned(params: dict, outdir: str) -> list[str]:
    t0 = time.time()
    params = {**params, "hamiltonian.omega_y": None, "output_noise_extra": 0.0,
              "store_full_grid": False}
    cfg = _sim_config(params)
    ens = run_ensemble(cfg, QubitState(1.0, 0.0, 0.0), workers=int(params["workers"]))
    cond = conditioned_averages(ens)
    warnings_ = []
    if len(ens) < 100:
        warnings_.append(f"only {len(ens)} trajectories: statistics are indicative only")

    csv_path = os.path.join(outdir, "conditioned.csv")
    _atomic_write(csv_path, lambda tmp: conditioned_to_csv(cond, tmp))

    fitcurve = conditioned_fit_curve(cond.times)
    rms = float(np.sqrt(np.mean((cond.mean_sigma_z_c - fitcurve) ** 2)))
    vdev = np.abs(cond.mean_v_c - 1.0) / cond.stderr_v_c
    report = {
        "n_plus": cond.n_plus,
        "n_minus": cond.n_minus,
        "n_excluded": cond.n_excluded,
        "rms_sigma_z_vs_tanh_fit": rms,
        "max_reading_deviation_in_stderr": float(vdev.max()),
        "tanh_fit_constants": list(_COND_FIT),
    }
    report_path = os.path.join(outdir, "conditioned_report.json")
    _atomic_write(report_path, lambda tmp: write_json(report, tmp))

    for key in ("hamiltonian.omega_y", "output_noise_extra", "store_full_grid"):
        params.pop(key)
    manifest = _write_manifest(outdir, "conditioned_manifest.json", "conditioned", params,
                               [os.path.basename(csv_path), os.path.basename(report_path)],
                               t0, warnings_)
    return [csv_path, report_path, manifest]


DECISION_DEFAULTS = {
    "detector.theta": 0.03,
    "total_time": 12.0,
    "n_trajectories": 10_000,
    "seed": 0,
    "h_values": [1e-3],
    "bins": None,
    "workers": _DEFAULT_WORKERS,
}


def _h_tag(h: float) -> str:
    return format(h, ".0e").replace("-0", "-").replace("+0", "+")


def run_cmd_decision(params: dict, outdir: str) -> list[str]:
    t0 = time.time()
    h_values = [float(h) for h in params["h_values"]]
    for h in h_values:
        if not 0.0 < h < 1.0:
            raise ConfigurationError(f"h must be in (0, 1), got {h}")
    cfg = SimulationConfig(
        detector=DetectorParams(theta=float(params["detector.theta"])),
        total_time=float(params["total_time"]),
        sampling_interval=0.1,
        seed=int(params["seed"]),
        n_trajectories=int(params["n_trajectories"]),
    )
    sets = decision_ensemble(cfg, h_values, workers=int(params["workers"]))
    outputs = []
    fits = []
    for dset in sets:
        tag = _h_tag(dset.h)
        hist = decision_histogram(dset.times, bins=params["bins"])
        hist_path = os.path.join(outdir, f"decision_h{tag}_hist.csv")
        _atomic_write(hist_path, lambda tmp, h=hist: stats.histogram_to_csv(h, tmp))
        fit = fit_decision_density(dset, bins=params["bins"])
        fits.append((dset.h, fit))
        report = fit_report(fit, dset, distribution_moments(dset))
        fit_path = os.path.join(outdir, f"decision_h{tag}_fit.json")
        _atomic_write(fit_path, lambda tmp, r=report: write_json(r, tmp))
        outputs += [hist_path, fit_path]
    fits_path = os.path.join(outdir, "decision_fits.csv")
    _atomic_write(fits_path, lambda tmp: stats.fits_to_csv(fits, tmp))
    outputs.append(fits_path)
    outputs.append(_write_manifest(outdir, "decision_manifest.json", "decision", params,
                                   [os.path.basename(p) for p in outputs], t0))
    return outputs


FEEDBACK_DEFAULTS = {
    "detector.theta": 0.03,
    "mode": "single",
    "threshold": 0.0,
    "collection_time": 1.0,
    "n_cycles": 100,
    "burn_in_cycles": 10,
    "n_trajectories": 1,
    "seed": 0,
    "rotation_magnitude": math.pi / 4,
    "I_grid": [0.0, 0.5, 1.0, 1.5, 2.0],
    "Tf_grid": [0.125, 0.25, 0.5, 1.0],
    "oracle_objective": False,
    "workers": _DEFAULT_WORKERS,
}


def _feedback_config(params: dict) -> FeedbackConfig:
    base = SimulationConfig(
        detector=DetectorParams(theta=float(params["detector.theta"])),
        total_time=max(2.0, float(params["n_cycles"]) * float(params["collection_time"])),
        sampling_interval=float(params["collection_time"]),
        seed=int(params["seed"]),
        n_trajectories=int(params["n_trajectories"]),
        store_full_grid=bool(params.get("store_full_grid", False)),
    )
    return FeedbackConfig(
        base=base,
        threshold=float(params["threshold"]),
        collection_time=float(params["collection_time"]),
        n_cycles=int(params["n_cycles"]),
        burn_in_cycles=int(params["burn_in_cycles"]),
        rotation_magnitude=float(params["rotation_magnitude"]),
    )


def run_cmd_feedback(params: dict, outdir: str) -> list[str]:
    t0 = time.time()
    mode = params["mode"]
    outputs = []
    if mode == "single":
        cfg = _feedback_config({**params, "store_full_grid": True})
        res = run_feedback(cfg, workers=int(params["workers"]), keep_ensemble=True)
        ens = res.ensemble
        trace_path = os.path.join(outdir, "feedback_trace.csv")
        rows = zip(ens.times.tolist(), ens.sigma_x.mean(axis=0).tolist(),
                   ens.sigma_z.mean(axis=0).tolist())
        _atomic_write(trace_path, _csv_writer("t,mean_sigma_x,mean_sigma_z", rows))
        summary = {
            "sigma_bar_x": res.sigma_bar_x, "stderr": res.stderr,
            "sigma_x_after_correction": res.sigma_x_after_correction,
            "correction_rate": res.correction_rate,
            "n_trajectories": res.n_trajectories, "n_cycles_used": res.n_cycles_used,
            "per_cycle_trace": res.per_cycle_trace.tolist(),
        }
        sum_path = os.path.join(outdir, "feedback_single.json")
        _atomic_write(sum_path, lambda tmp: write_json(summary, tmp))
        outputs += [trace_path, sum_path]
    elif mode == "sweep":
        template = _feedback_config(params)
        rows = sweep([float(x) for x in params["I_grid"]],
                     [float(x) for x in params["Tf_grid"]],
                     template, workers=int(params["workers"]))
        sweep_path = os.path.join(outdir, "feedback_sweep.csv")
        _atomic_write(sweep_path, lambda tmp: sweep_to_csv(rows, tmp))
        oracle_path = os.path.join(outdir, "feedback_sweep_oracle.csv")
        orows = []
        for I in params["I_grid"]:
            for Tf in params["Tf_grid"]:
                fa = oracle.feedback_efficiency(float(I), float(Tf))
                orows.append((float(I), float(Tf), fa.A, fa.B, fa.rho_x, fa.sigma_bar_x))
        _atomic_write(oracle_path, _csv_writer("I,T_f,A,B,rho_x,sigma_bar_x", orows))
        outputs += [sweep_path, oracle_path]
    elif mode == "optimize":
        x0 = (float(params["threshold"]), float(params["collection_time"]))
        if params["oracle_objective"]:
            objective = lambda I, Tf: oracle.feedback_efficiency(I, Tf).sigma_bar_x
        else:
            objective = mc_objective(_feedback_config(params), workers=int(params["workers"]))
        res = optimize(objective, x0)
        report = {
            "initial": list(x0),
            "threshold": res.threshold, "collection_time": res.collection_time,
            "value": res.value, "n_evaluations": res.n_evaluations,
            "converged": res.converged, "oracle_objective": bool(params["oracle_objective"]),
            "trace": [list(p) for p in res.trace],
        }
        opt_path = os.path.join(outdir, "feedback_optimize.json")
        _atomic_write(opt_path, lambda tmp: write_json(report, tmp))
        outputs.append(opt_path)
    else:
        raise ConfigurationError(f"unknown feedback mode {mode!r}")
    outputs.append(_write_manifest(outdir, "feedback_manifest.json", "feedback", params,
                                   [os.path.basename(p) for p in outputs], t0))
    return outputs


ORACLE_DEFAULTS = {
    "kind": "decay",
    "t_max": 5.0,
    "n_points": 201,
    "t1": 0.25,
    "v_max": 3.0,
    "omega": 1.0,
    "I_grid": [0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0],
    "Tf_grid": [1 / 3, 1 / 4, 1 / 5, 1 / 6, 1 / 7, 1 / 8],
}


def run_cmd_oracle(params: dict, outdir: str) -> list[str]:
    t0 = time.time()
    kind = params["kind"]
    if kind == "decay":
        if params["t_max"] <= 0:
            raise ConfigurationError("t_max must be positive")
        t = np.linspace(0.0, float(params["t_max"]), int(params["n_points"]))
        rows = ((float(ti), float(np.exp(-2.0 * ti))) for ti in t)
        path = os.path.join(outdir, "oracle_decay.csv")
        _atomic_write(path, _csv_writer("t,sigma_x", rows))
    elif kind == "conditional":
        v = np.linspace(1.0 - float(params["v_max"]), 1.0 + float(params["v_max"]),
                        int(params["n_points"]))
        dens = oracle.conditional_output_density(float(params["t1"]), v)
        rows = zip(v.tolist(), dens.tolist())
        path = os.path.join(outdir, "oracle_conditional.csv")
        _atomic_write(path, _csv_writer("v,density", rows))
    elif kind == "landscape":
        rows = []
        for I in params["I_grid"]:
            for Tf in params["Tf_grid"]:
                fa = oracle.feedback_efficiency(float(I), float(Tf))
                rows.append((float(I), float(Tf), fa.A, fa.B, fa.rho_x, fa.sigma_bar_x))
        path = os.path.join(outdir, "oracle_landscape.csv")
        _atomic_write(path, _csv_writer("I,T_f,A,B,rho_x,sigma_bar_x", rows))
    elif kind == "precession":
        t = np.linspace(0.0, float(params["t_max"]), int(params["n_points"]))
        x, z = oracle.damped_precession(t, float(params["omega"]))
        rows = zip(t.tolist(), x.tolist(), z.tolist())
        path = os.path.join(outdir, "oracle_precession.csv")
        _atomic_write(path, _csv_writer("t,sigma_x,sigma_z", rows))
    else:
        raise ConfigurationError(f"unknown oracle kind {kind!r}")
    manifest = _write_manifest(outdir, f"oracle_{kind}_manifest.json", "oracle", params,
                               [os.path.basename(path)], t0)
    return [path, manifest]


RUNNERS = {
    "trajectory": run_cmd_trajectory,
    "conditioned": run_cmd_conditioned,
    "decision": run_cmd_decision,
    "feedback": run_cmd_feedback,
    "oracle": run_cmd_oracle,
}

DEFAULTS = {
    "trajectory": TRAJECTORY_DEFAULTS,
    "conditioned": CONDITIONED_DEFAULTS,
    "decision": DECISION_DEFAULTS,
    "feedback": FEEDBACK_DEFAULTS,
    "oracle": ORACLE_DEFAULTS,
}


def rerun_manifest(manifest_path: str, outdir: str) -> list[str]:
    """Re-execute a run from its manifest; outputs are bit-identical."""
    with open(manifest_path) as f:
        manifest = json.load(f)
    os.makedirs(outdir, exist_ok=True)
    return RUNNERS[manifest["subcommand"]](manifest["config"], outdir)


# -- argument parsing ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cwlm",
                                description="continuous weak linear measurement simulator")
    p.add_argument("--version", action="version", version=f"cwlm {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="flat dotted-key config file")
        sp.add_argument("--out", help="output directory (default $CWLM_OUTDIR or .)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--theta", type=float, help="measurement strength per step")
        sp.add_argument("--workers", type=int, help="concurrent trajectory workers")

    sp = sub.add_parser("trajectory", help="single or ensemble quantum trajectories")
    common(sp)
    sp.add_argument("--n", type=int, help="number of trajectories")
    sp.add_argument("--T", type=float, help="total time (T_c units)")
    sp.add_argument("--sampling", type=float, help="sampling interval (T_c units)")
    sp.add_argument("--hamiltonian-y", type=float, dest="hamiltonian_y",
                    help="free evolution rate omega about y")
    sp.add_argument("--noise", type=float, help="extra white output-noise power")
    grid = sp.add_mutually_exclusive_group()
    grid.add_argument("--full-grid", action="store_true", default=None, dest="full_grid")
    grid.add_argument("--no-full-grid", action="store_false", default=None, dest="full_grid")
    sp.add_argument("--npz", action="store_true", default=None, help="also write binary container")

    sp = sub.add_parser("conditioned", help="final-state conditioned averages")
    common(sp)
    sp.add_argument("--n", type=int)
    sp.add_argument("--T", type=float)
    sp.add_argument("--sampling", type=float)

    sp = sub.add_parser("decision", help="decision-time statistics and fits")
    common(sp)
    sp.add_argument("--h", type=float, action="append", dest="h_values",
                    help="threshold h (repeatable)")
    sp.add_argument("--n", type=int)
    sp.add_argument("--T", type=float)
    sp.add_argument("--bins", type=int)

    sp = sub.add_parser("feedback", help="threshold feedback loop")
    common(sp)
    sp.add_argument("mode", choices=["single", "sweep", "optimize"])
    sp.add_argument("--I", type=float, dest="threshold", help="reaction threshold")
    sp.add_argument("--Tf", type=float, dest="collection_time", help="collection time")
    sp.add_argument("--n", type=int)
    sp.add_argument("--cycles", type=int)
    sp.add_argument("--burn-in", type=int, dest="burn_in")
    sp.add_argument("--I-grid", type=_parse_grid, dest="I_grid",
                    help="comma list or start:stop:step")
    sp.add_argument("--Tf-grid", type=_parse_grid, dest="Tf_grid")
    sp.add_argument("--oracle", action="store_true", default=None, dest="oracle_objective",
                    help="optimize the analytic objective instead of Monte Carlo")

    sp = sub.add_parser("oracle", help="tabulated closed-form curves")
    common(sp)
    sp.add_argument("kind", choices=["decay", "conditional", "landscape", "precession"])
    sp.add_argument("--t-max", type=float, dest="t_max")
    sp.add_argument("--points", type=int, dest="n_points")
    sp.add_argument("--t1", type=float)
    sp.add_argument("--v-max", type=float, dest="v_max")
    sp.add_argument("--omega", type=float)
    sp.add_argument("--I-grid", type=_parse_grid, dest="I_grid")
    sp.add_argument("--Tf-grid", type=_parse_grid, dest="Tf_grid")
    return p


_FLAG_MAPS = {
    "trajectory": {"seed": "seed", "theta": "detector.theta", "n": "n_trajectories",
                   "T": "total_time", "sampling": "sampling_interval",
                   "hamiltonian_y": "hamiltonian.omega_y", "noise": "output_noise_extra",
                   "full_grid": "store_full_grid", "npz": "write_npz", "workers": "workers"},
    "conditioned": {"seed": "seed", "theta": "detector.theta", "n": "n_trajectories",
                    "T": "total_time", "sampling": "sampling_interval", "workers": "workers"},
    "decision": {"seed": "seed", "theta": "detector.theta", "n": "n_trajectories",
                 "T": "total_time", "h_values": "h_values", "bins": "bins",
                 "workers": "workers"},
    "feedback": {"seed": "seed", "theta": "detector.theta", "n": "n_trajectories",
                 "mode": "mode", "threshold": "threshold",
                 "collection_time": "collection_time", "cycles": "n_cycles",
                 "burn_in": "burn_in_cycles", "I_grid": "I_grid", "Tf_grid": "Tf_grid",
                 "oracle_objective": "oracle_objective", "workers": "workers"},
    "oracle": {"kind": "kind", "t_max": "t_max", "n_points": "n_points", "t1": "t1",
               "v_max": "v_max", "omega": "omega", "I_grid": "I_grid", "Tf_grid": "Tf_grid"},
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        params = _resolve(DEFAULTS[args.command], args, _FLAG_MAPS[args.command])
        outdir = _outdir(args)
        RUNNERS[args.command](params, outdir)
    except (ConfigurationError, ValueError, OSError) as exc:
        print(f"cwlm: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
