"""Quantum-trajectory engine: repeated detector steps, records, detector output.

A run consists of N = T/dt elementary steps.  Each step optionally applies
free Hamiltonian evolution, then one weak-measurement step.  Raw +-1 readings
are averaged over sampling windows of K = round(sampling/dt) steps and
normalized by sin(2 theta) so that a frozen z = +-1 eigenstate gives readings
with mean +-1 and variance 1/(4 * sampling) in T_c units.

Randomness: every trajectory owns a counter-based Philox stream derived from
(seed, stream_id), so a trajectory is a pure function of (config, initial
state, stream_id).  Ensembles are computed in vectorized chunks; chunking and
the number of workers never change per-trajectory results (all inner
arithmetic is elementwise), which makes parallel and serial runs bit-identical.

The engine has two modes: recording runs (decimated to the sampling grid by
default, full step grid optionally) and streaming decision runs that track
first-crossing times of |Sigma_z| thresholds without storing trajectories.
"""

from __future__ import annotations

import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from . import __version__
from .detector import ConfigurationError, DetectorParams, apply_readings
from .qstate import QubitState, Rotation, _rotate

_CHUNK = 8192            # trajectories per vectorized chunk
_DECISION_BLOCK = 512    # steps per uniform-buffer refill in decision mode
_FREEZE_EPS = 1e-12      # |z| >= 1 - eps counts as frozen onto a pole

# engine-internal controller protocol: fn(t, v_window, x, y, z) mutates the
# state arrays in place at a window boundary
_VecController = Callable[[float, np.ndarray, np.ndarray, np.ndarray, np.ndarray], None]


@dataclass(frozen=True)
class SimulationConfig:
    """Full specification of a trajectory run (times in T_c units)."""

    detector: DetectorParams
    total_time: float
    sampling_interval: float
    hamiltonian: Optional[tuple[str, float]] = None  # (axis, omega)
    output_noise_extra: float = 0.0
    seed: int = 0
    n_trajectories: int = 1
    store_full_grid: bool = False

    def __post_init__(self):
        dt = self.detector.dt
        if self.sampling_interval < 10.0 * dt - 1e-12:
            raise ConfigurationError(
                f"sampling_interval {self.sampling_interval} < 10*dt = {10 * dt}"
            )
        if self.total_time < 2.0 * self.sampling_interval:
            raise ConfigurationError(
                f"total_time {self.total_time} < 2*sampling_interval"
            )
        if self.n_trajectories < 1:
            raise ConfigurationError("n_trajectories must be >= 1")
        if self.output_noise_extra < 0:
            raise ConfigurationError("output_noise_extra must be nonnegative")
        if self.hamiltonian is not None:
            axis, _ = self.hamiltonian
            if axis not in ("x", "y", "z"):
                raise ConfigurationError(f"hamiltonian axis must be x, y or z, got {axis!r}")

    # -- derived grid quantities (K rounded, window-aligned durations) -------

    @property
    def readings_per_window(self) -> int:
        return int(round(self.sampling_interval / self.detector.dt))

    @property
    def sampling_interval_eff(self) -> float:
        return self.readings_per_window * self.detector.dt

    @property
    def n_windows(self) -> int:
        return max(2, int(round(self.total_time / self.sampling_interval_eff)))

    @property
    def total_time_eff(self) -> float:
        return self.n_windows * self.sampling_interval_eff

    @property
    def n_steps(self) -> int:
        return self.n_windows * self.readings_per_window

    def to_flat_dict(self) -> dict:
        d = {
            "detector.theta": self.detector.theta,
            "detector.dt": self.detector.dt,
            "total_time": self.total_time,
            "sampling_interval": self.sampling_interval,
            "output_noise_extra": self.output_noise_extra,
            "seed": self.seed,
            "n_trajectories": self.n_trajectories,
            "store_full_grid": self.store_full_grid,
            "sampling_interval_eff": self.sampling_interval_eff,
            "total_time_eff": self.total_time_eff,
            "readings_per_window": self.readings_per_window,
        }
        if self.hamiltonian is not None:
            d["hamiltonian.axis"] = self.hamiltonian[0]
            d["hamiltonian.omega"] = self.hamiltonian[1]
        return d

    @staticmethod
    def from_flat_dict(d: dict) -> "SimulationConfig":
        ham = None
        if "hamiltonian.axis" in d:
            ham = (d["hamiltonian.axis"], float(d["hamiltonian.omega"]))
        return SimulationConfig(
            detector=DetectorParams(theta=float(d["detector.theta"])),
            total_time=float(d["total_time"]),
            sampling_interval=float(d["sampling_interval"]),
            hamiltonian=ham,
            output_noise_extra=float(d.get("output_noise_extra", 0.0)),
            seed=int(d.get("seed", 0)),
            n_trajectories=int(d.get("n_trajectories", 1)),
            store_full_grid=bool(d.get("store_full_grid", False)),
        )


@dataclass(frozen=True)
class Trajectory:
    """One recorded quantum trajectory with its normalized detector readings."""

    times: np.ndarray          # state grid (window boundaries, or every step)
    sigma_x: np.ndarray
    sigma_y: np.ndarray
    sigma_z: np.ndarray
    window_end_times: np.ndarray  # one per sampling window
    sampled_v: np.ndarray         # normalized reading of each window
    final_sign: int
    stream_id: int
    raw_outcomes: Optional[np.ndarray] = None  # +-1 per step (full grid only)


@dataclass(frozen=True)
class Ensemble:
    """Stacked trajectory records plus the configuration that produced them."""

    config: SimulationConfig
    times: np.ndarray              # (G,)
    window_end_times: np.ndarray   # (W,)
    sigma_x: np.ndarray            # (n, G)
    sigma_y: np.ndarray
    sigma_z: np.ndarray
    sampled_v: np.ndarray          # (n, W)
    final_sign: np.ndarray         # (n,)
    stream_ids: np.ndarray         # (n,)
    raw_outcomes: Optional[np.ndarray] = None   # (n, N) int8, full grid only
    window_x_mean: Optional[np.ndarray] = None  # (n, W), feedback bookkeeping

    def __len__(self) -> int:
        return self.sigma_z.shape[0]

    def trajectory(self, i: int) -> Trajectory:
        raw = None if self.raw_outcomes is None else self.raw_outcomes[i]
        return Trajectory(
            times=self.times,
            sigma_x=self.sigma_x[i],
            sigma_y=self.sigma_y[i],
            sigma_z=self.sigma_z[i],
            window_end_times=self.window_end_times,
            sampled_v=self.sampled_v[i],
            final_sign=int(self.final_sign[i]),
            stream_id=int(self.stream_ids[i]),
            raw_outcomes=raw,
        )

    def __iter__(self) -> Iterator[Trajectory]:
        return (self.trajectory(i) for i in range(len(self)))


def stream_generator(seed: int, stream_id: int, tag: int | None = None) -> np.random.Generator:
    """Independent counter-based random stream for one trajectory.

    `tag` selects a parallel purpose-specific stream (e.g. output noise)
    that never collides with the measurement stream.
    """
    key = (stream_id,) if tag is None else (stream_id, np.uint32(0x6E0F5E00 + tag))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=key)))


def _hamiltonian_step(cfg: SimulationConfig):
    """Per-step Bloch rotation constants for the optional free evolution."""
    axis, omega = cfg.hamiltonian
    phi = 2.0 * omega * cfg.detector.dt
    return axis, math.cos(phi), math.sin(phi)


_AXIS_PAIR = {"x": ("y", "z"), "y": ("z", "x"), "z": ("x", "y")}


def _rotate_arrays(axis, c, s, x, y, z):
    comps = {"x": x, "y": y, "z": z}
    b, cc = _AXIS_PAIR[axis]
    vb, vc = comps[b], comps[cc]
    comps[b] = c * vb - s * vc
    comps[cc] = c * vc + s * vb
    return comps["x"], comps["y"], comps["z"]


def _simulate_chunk(cfg: SimulationConfig, initial: QubitState, ids: np.ndarray,
                    controller: Optional[_VecController], window_x_mean: bool):
    """Run one vectorized chunk of trajectories; returns stacked record arrays."""
    m = len(ids)
    K = cfg.readings_per_window
    W = cfg.n_windows
    dt = cfg.detector.dt
    s2, c2 = cfg.detector.sin2theta, cfg.detector.cos2theta
    full = cfg.store_full_grid
    ham = _hamiltonian_step(cfg) if cfg.hamiltonian else None

    gens = [stream_generator(cfg.seed, int(sid)) for sid in ids]
    x = np.full(m, initial.bloch_x)
    y = np.full(m, initial.bloch_y)
    z = np.full(m, initial.bloch_z)

    n_grid = cfg.n_steps + 1 if full else W + 1
    rec_x = np.empty((m, n_grid)); rec_y = np.empty((m, n_grid)); rec_z = np.empty((m, n_grid))
    rec_x[:, 0], rec_y[:, 0], rec_z[:, 0] = x, y, z
    v = np.empty((m, W))
    raw = np.empty((m, cfg.n_steps), dtype=np.int8) if full else None
    wxm = np.empty((m, W)) if window_x_mean else None

    step = 0
    for w in range(W):
        u = np.empty((m, K))
        for j in range(m):
            u[j] = gens[j].random(K)
        vsum = np.zeros(m)
        xsum = np.zeros(m) if window_x_mean else None
        for k in range(K):
            if ham is not None:
                x, y, z = _rotate_arrays(ham[0], ham[1], ham[2], x, y, z)
            sigma = np.where(u[:, k] < 0.5 * (1.0 + z * s2), 1.0, -1.0)
            x, y, z = apply_readings(x, y, z, sigma, s2, c2)
            vsum += sigma
            step += 1
            if window_x_mean:
                xsum += x
            if full:
                raw[:, step - 1] = sigma
                rec_x[:, step], rec_y[:, step], rec_z[:, step] = x, y, z
        v[:, w] = vsum / (K * s2)
        if window_x_mean:
            wxm[:, w] = xsum / K
        if controller is not None:
            controller((w + 1) * K * dt, v[:, w], x, y, z)
            if full:
                rec_x[:, step], rec_y[:, step], rec_z[:, step] = x, y, z
        if not full:
            rec_x[:, w + 1], rec_y[:, w + 1], rec_z[:, w + 1] = x, y, z

    final_sign = np.sign(z).astype(np.int8)
    return rec_x, rec_y, rec_z, v, raw, wxm, final_sign


def _noise_arrays(cfg: SimulationConfig, ids: np.ndarray, n_windows: int) -> np.ndarray:
    """Per-trajectory Gaussian output noise, variance extra/sampling per reading."""
    scale = math.sqrt(cfg.output_noise_extra / cfg.sampling_interval_eff)
    out = np.empty((len(ids), n_windows))
    for j, sid in enumerate(ids):
        out[j] = scale * stream_generator(cfg.seed, int(sid), tag=1).standard_normal(n_windows)
    return out


def run_ensemble(cfg: SimulationConfig, initial: QubitState,
                 controller: Optional[Callable[[float, float], Optional[Rotation]]] = None,
                 *, vec_controller: Optional[_VecController] = None,
                 window_x_mean: bool = False, workers: int = 1,
                 stream_ids: Optional[Sequence[int]] = None) -> Ensemble:
    """Simulate cfg.n_trajectories independent trajectories.

    `controller`, if given, is called at every sampling-window boundary with
    (time, latest normalized reading) per trajectory and may return a Rotation
    to apply at that boundary.  `vec_controller` is the vectorized equivalent
    used internally by the feedback loop.  Results do not depend on `workers`.
    """
    if controller is not None and vec_controller is not None:
        raise ValueError("pass either controller or vec_controller, not both")
    if controller is not None:
        vec_controller = _adapt_scalar_controller(controller)
    if stream_ids is None:
        stream_ids = np.arange(cfg.n_trajectories)
    ids = np.asarray(stream_ids)
    if len(ids) != cfg.n_trajectories:
        raise ConfigurationError("stream_ids length must equal n_trajectories")

    chunks = [ids[lo:lo + _CHUNK] for lo in range(0, len(ids), _CHUNK)]
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_simulate_chunk, *zip(*(
                (cfg, initial, ch, vec_controller, window_x_mean) for ch in chunks))))
    else:
        parts = [_simulate_chunk(cfg, initial, ch, vec_controller, window_x_mean)
                 for ch in chunks]

    rec_x, rec_y, rec_z, v, raw, wxm, fsign = (
        (np.concatenate([p[i] for p in parts]) if parts[0][i] is not None else None)
        for i in range(7))

    if cfg.output_noise_extra > 0:
        v = v + np.concatenate([_noise_arrays(cfg, ch, cfg.n_windows) for ch in chunks])

    dt = cfg.detector.dt
    K = cfg.readings_per_window
    if cfg.store_full_grid:
        times = np.arange(cfg.n_steps + 1) * dt
    else:
        times = np.arange(cfg.n_windows + 1) * (K * dt)
    window_end_times = (np.arange(cfg.n_windows) + 1) * (K * dt)

    return Ensemble(config=cfg, times=times, window_end_times=window_end_times,
                    sigma_x=rec_x, sigma_y=rec_y, sigma_z=rec_z, sampled_v=v,
                    final_sign=fsign, stream_ids=ids,
                    raw_outcomes=raw, window_x_mean=wxm)


def run_trajectory(cfg: SimulationConfig, initial: QubitState,
                   controller: Optional[Callable[[float, float], Optional[Rotation]]] = None,
                   stream_id: int = 0) -> Trajectory:
    """Single trajectory; bit-identical to the same stream_id in an ensemble."""
    one = replace(cfg, n_trajectories=1)
    ens = run_ensemble(one, initial, controller=controller, stream_ids=[stream_id])
    return ens.trajectory(0)


class _adapt_scalar_controller:
    """Wrap a per-trajectory Rotation-returning controller for the engine."""

    def __init__(self, controller):
        self.controller = controller

    def __call__(self, t, v, x, y, z):
        for i in range(v.shape[0]):
            rot = self.controller(t, float(v[i]))
            if rot is not None:
                x[i], y[i], z[i] = _rotate((x[i], y[i], z[i]), rot.axis, 2.0 * rot.angle)


def add_output_noise(traj: Trajectory, extra_power: float, rng: np.random.Generator) -> Trajectory:
    """Emulate a non-ideal detector by adding white noise to the readings.

    Each sampled reading receives independent zero-mean Gaussian noise of
    variance extra_power / sampling_interval; the quantum trajectory itself
    is untouched.
    """
    if extra_power < 0:
        raise ConfigurationError("extra_power must be nonnegative")
    if extra_power == 0:
        return traj
    window = traj.window_end_times[0] if len(traj.window_end_times) else None
    if window is None:
        return traj
    noisy = traj.sampled_v + rng.normal(0.0, math.sqrt(extra_power / window), traj.sampled_v.shape)
    return replace(traj, sampled_v=noisy)


# -- streaming decision mode -------------------------------------------------

def _decision_chunk(cfg: SimulationConfig, ids: np.ndarray, h_values: Sequence[float]):
    m = len(ids)
    dt = cfg.detector.dt
    s2, c2 = cfg.detector.sin2theta, cfg.detector.cos2theta
    n_steps = int(round(cfg.total_time / dt))
    thresholds = [1.0 - h for h in h_values]

    gens = [stream_generator(cfg.seed, int(sid)) for sid in ids]
    z = np.zeros(m)
    tcross = [np.full(m, -1.0) for _ in h_values]
    scross = [np.zeros(m, dtype=np.int8) for _ in h_values]
    frozen = np.zeros(m, dtype=bool)
    fsign = np.zeros(m, dtype=np.int8)

    i = 0
    while i < n_steps and not frozen.all():
        nb = min(_DECISION_BLOCK, n_steps - i)
        act = ~frozen
        u = np.empty((m, nb))
        for j in np.flatnonzero(act):
            u[j] = gens[j].random(nb)
        for k in range(nb):
            i += 1
            za = z[act]
            sigma = np.where(u[act, k] < 0.5 * (1.0 + za * s2), 1.0, -1.0)
            z[act] = (za + sigma * s2) / (1.0 + sigma * za * s2)
            absz = np.abs(z)
            for q, thr in enumerate(thresholds):
                newly = (tcross[q] < 0) & (absz >= thr)
                if newly.any():
                    tcross[q][newly] = i * dt
                    scross[q][newly] = np.sign(z[newly])
            newf = act & (absz >= 1.0 - _FREEZE_EPS)
            if newf.any():
                frozen |= newf
                fsign[newf] = np.sign(z[newf])
                act = ~frozen
                if frozen.all():
                    break
    fsign[~frozen] = np.sign(z[~frozen])
    return tcross, scross, fsign, np.abs(z)


def run_decisions(cfg: SimulationConfig, h_values: Sequence[float], *, workers: int = 1):
    """First-crossing times of |Sigma_z| >= 1-h for each h, without storing
    trajectories.

    Starts every trajectory from the equal-weight superposition (crossings of
    a symmetric start are the quantity of interest; Hamiltonian evolution and
    sampling windows play no role here).  Once a trajectory is within 1e-12 of
    a pole all remaining thresholds have been crossed and its final sign is
    fixed, so it is dropped from the active set.

    Returns (times, signs, final_sign, final_absz): `times` and `signs` are
    lists over h_values of per-trajectory arrays, with time -1 marking
    trajectories that never crossed within total_time.
    """
    for h in h_values:
        if not 0.0 < h < 1.0:
            raise ConfigurationError(f"threshold h must be in (0, 1), got {h}")
    ids = np.arange(cfg.n_trajectories)
    chunks = [ids[lo:lo + 50_000] for lo in range(0, len(ids), 50_000)]
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_decision_chunk, *zip(*((cfg, ch, tuple(h_values)) for ch in chunks))))
    else:
        parts = [_decision_chunk(cfg, ch, tuple(h_values)) for ch in chunks]
    times = [np.concatenate([p[0][q] for p in parts]) for q in range(len(h_values))]
    signs = [np.concatenate([p[1][q] for p in parts]) for q in range(len(h_values))]
    final_sign = np.concatenate([p[2] for p in parts])
    final_absz = np.concatenate([p[3] for p in parts])
    return times, signs, final_sign, final_absz


# -- serialization ------------------------------------------------------------

_CSV_HEADER = "trajectory_id,t,sigma_x,sigma_y,sigma_z,v_bar"


def _fmt(x: float) -> str:
    return format(x, ".17g")


def ensemble_to_csv(ens: Ensemble, path: str) -> None:
    """One row per stored grid point; v_bar filled on window-boundary rows.

    Full 17-significant-digit decimals so files round-trip bit-exactly.
    """
    K = ens.config.readings_per_window
    full = ens.config.store_full_grid
    buf = io.StringIO()
    buf.write(_CSV_HEADER + "\n")
    for i in range(len(ens)):
        sid = int(ens.stream_ids[i])
        for g, t in enumerate(ens.times):
            if g == 0:
                vtxt = ""
            elif full:
                vtxt = _fmt(ens.sampled_v[i, g // K - 1]) if g % K == 0 else ""
            else:
                vtxt = _fmt(ens.sampled_v[i, g - 1])
            buf.write(f"{sid},{_fmt(t)},{_fmt(ens.sigma_x[i, g])},{_fmt(ens.sigma_y[i, g])},"
                      f"{_fmt(ens.sigma_z[i, g])},{vtxt}\n")
    with open(path, "w") as f:
        f.write(buf.getvalue())


def ensemble_to_npz(ens: Ensemble, path: str) -> None:
    """Compact binary container; a JSON sidecar carries config and versions."""
    arrays = dict(times=ens.times, window_end_times=ens.window_end_times,
                  sigma_x=ens.sigma_x, sigma_y=ens.sigma_y, sigma_z=ens.sigma_z,
                  sampled_v=ens.sampled_v, final_sign=ens.final_sign,
                  stream_ids=ens.stream_ids)
    if ens.raw_outcomes is not None:
        arrays["raw_outcomes"] = ens.raw_outcomes
    np.savez_compressed(path, **arrays)
    sidecar = {"config": ens.config.to_flat_dict(), "code_version": __version__,
               "format": "cwlm-ensemble-npz-1"}
    with open(_sidecar_path(path), "w") as f:
        json.dump(sidecar, f, indent=2, sort_keys=True)
        f.write("\n")


def ensemble_from_npz(path: str) -> Ensemble:
    with open(_sidecar_path(path)) as f:
        sidecar = json.load(f)
    cfg = SimulationConfig.from_flat_dict(sidecar["config"])
    d = np.load(path)
    return Ensemble(config=cfg, times=d["times"], window_end_times=d["window_end_times"],
                    sigma_x=d["sigma_x"], sigma_y=d["sigma_y"], sigma_z=d["sigma_z"],
                    sampled_v=d["sampled_v"], final_sign=d["final_sign"],
                    stream_ids=d["stream_ids"],
                    raw_outcomes=d["raw_outcomes"] if "raw_outcomes" in d else None)


def _sidecar_path(path: str) -> str:
    root, _ = os.path.splitext(path)
    return root + ".json"
