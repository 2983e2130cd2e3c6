"""Monte Carlo campaign runner with deterministic, paired noise streams.

Every random draw comes from a counter-keyed Philox stream derived from
the master seed and a (trial, purpose[, block]) spawn key, so any trial
is reproducible in isolation and all schemes and sweep points replay the
same trajectory, the same sensor errors, and the same pilot-noise draws
for shared measurement indices. Outputs are flat CSVs written atomically
with a fixed float format, so identical configurations produce byte-
identical files.
"""

from __future__ import annotations

import csv
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .beamforming import build_precoder, steer_weights
from .channel import effective_channel
from .config import ConfigError, ScenarioConfig
from .geometry import Position3, SpatialAngles, arrival_angles, departure_angle
from .metrics import normalized_gain, predict_from_mae, realized_gain, spectral_efficiency
from .mobility import sample_initial, step
from .sensors import derive_velocity, egi_measure, ground_gps_measure
from .tracking import (
    RefineResult,
    TrackState,
    baseline_codebook,
    baseline_gps_only,
    baseline_perturbation,
    fuse_position,
    predict_position,
    refine_analog,
    refine_hybrid,
)

__all__ = [
    "SCHEMA_VERSION",
    "TraceRow",
    "CampaignResult",
    "stream",
    "simulate_truth",
    "simulate_readings",
    "run_campaign",
    "write_trace_csv",
    "write_summary_csv",
    "read_summary_csv",
    "emit_figure_tables",
]

SCHEMA_VERSION = 1

# purpose tags for the per-trial random streams
_TRAJ, _GPS, _EGI, _PILOT, _MU = 0, 1, 2, 3, 4

TRACE_HEADER = [
    "schema_version",
    "trial",
    "block",
    "scheme",
    "snr_db",
    "phase_bits",
    "true_x",
    "true_y",
    "true_u",
    "true_v",
    "true_ua",
    "est_u",
    "est_v",
    "est_x",
    "est_y",
    "gain",
    "norm_gain",
    "se_bits",
    "iterations",
    "measurements",
]

SUMMARY_HEADER = [
    "schema_version",
    "scheme",
    "snr_db",
    "phase_bits",
    "block",
    "n",
    "mse_u",
    "mse_v",
    "mse_angle",
    "mae_u",
    "mae_v",
    "mae_angle",
    "rmse_pos_m",
    "mean_gain",
    "mean_norm_gain",
    "mean_se",
    "pred_gain_at_mae",
    "pred_se_at_mae",
    "mean_iterations",
    "mean_measurements",
]


def stream(seed: int, *key: int) -> np.random.Generator:
    """Philox generator keyed by the master seed and a stable spawn key."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


@dataclass(frozen=True)
class TraceRow:
    trial: int
    block: int
    scheme: str
    snr_db: float
    phase_bits: int
    true_x: float
    true_y: float
    true_u: float
    true_v: float
    true_ua: float
    est_u: float
    est_v: float
    est_x: float
    est_y: float
    gain: float
    norm_gain: float
    se_bits: float
    iterations: int
    measurements: int


@dataclass(frozen=True)
class CampaignResult:
    config: ScenarioConfig
    rows: tuple[TraceRow, ...]

    def summary_rows(self) -> list[dict]:
        return summarize(self.rows, self.config)


def simulate_truth(cfg: ScenarioConfig, trial: int):
    """Trajectory states and per-block fading phases for one trial."""
    mob = cfg.mobility()
    rng = stream(cfg.run_seed, trial, _TRAJ)
    states = [sample_initial(mob, rng)]
    for _ in range(cfg.run_blocks - 1):
        states.append(step(states[-1], mob, rng))
    mu_rng = stream(cfg.run_seed, trial, _MU)
    mus = np.exp(2j * np.pi * mu_rng.uniform(0.0, 1.0, size=cfg.run_blocks))
    return states, mus


def simulate_readings(cfg: ScenarioConfig, trial: int, states):
    """Sensor readings on their schedules, shared by all schemes."""
    sched = cfg.schedule()
    noise = cfg.sensors()
    gps_rng = stream(cfg.run_seed, trial, _GPS)
    egi_rng = stream(cfg.run_seed, trial, _EGI)
    gps = {}
    egi = {}
    for k, state in enumerate(states):
        if sched.gps_due(k):
            gps[k] = ground_gps_measure(state, noise, gps_rng, block=k)
        if sched.ins_due(k):
            egi[k] = egi_measure(state, noise, egi_rng, block=k)
    return gps, egi


def _refine(scheme: str, heff, seed: SpatialAngles, arr, budget, est, rng) -> RefineResult:
    if scheme == "hybrid_gpr":
        return refine_hybrid(heff, seed, arr, budget, est, rng)
    if scheme == "analog_gpr":
        return refine_analog(heff, seed, arr, budget, est, rng)
    if scheme == "perturbation":
        return baseline_perturbation(heff, seed, arr, budget, est, rng)
    if scheme == "codebook_max":
        return baseline_codebook(heff, seed, arr, budget, est, rng)
    if scheme == "gps_only":
        return baseline_gps_only(seed)
    raise ConfigError(f"unknown scheme {scheme!r}")


def _run_scheme_trial(
    cfg: ScenarioConfig,
    trial: int,
    scheme: str,
    snr_db: float,
    phase_bits: int,
    states,
    mus,
    gps_readings,
    egi_readings,
) -> list[TraceRow]:
    arr = cfg.arrays()
    sched = cfg.schedule()
    budget = cfg.budget(snr_db)
    est = cfg.estimator(phase_bits)
    gs_pos = Position3(cfg.scenario_gs_x, cfg.scenario_gs_y, cfg.scenario_gs_height)
    delta_h = cfg.scenario_uav_height - cfg.scenario_gs_height
    quantize_data = phase_bits if scheme in ("analog_gpr", "codebook_max") else None

    track = TrackState(estimate=states[0].position)
    rows = []
    for k, state in enumerate(states):
        gps = gps_readings.get(k)
        if gps is not None:
            vel = track.velocity
            if track.last_fix is not None:
                vel = derive_velocity(track.last_fix, gps, sched.t_gps)
            track = TrackState(
                estimate=track.estimate, velocity=vel, last_fix=gps, last_egi=track.last_egi
            )
        if (egi := egi_readings.get(k)) is not None:
            track = TrackState(
                estimate=track.estimate,
                velocity=track.velocity,
                last_fix=track.last_fix,
                last_egi=egi,
            )
        prior = predict_position(track, gps, sched.t_block)

        true_angles = arrival_angles(state.position, gs_pos)
        g_u = Position3(
            gs_pos.x - state.position.x,
            gs_pos.y - state.position.y,
            gs_pos.h - state.position.h,
        )
        true_ua = departure_angle(g_u, state.heading, state.attitude)
        precoder = build_precoder(track.last_egi, gs_pos, arr)
        heff = effective_channel(
            SpatialAngles(true_angles.u, true_angles.v, true_ua),
            precoder.vector,
            complex(mus[k]),
            arr,
        )

        seed = arrival_angles(prior, gs_pos)
        pilot_rng = stream(cfg.run_seed, trial, _PILOT, k)
        res = _refine(scheme, heff, seed, arr, budget, est, pilot_rng)

        est_angles = SpatialAngles(res.u, res.v)
        fused = fuse_position(est_angles, gs_pos, delta_h)
        track = TrackState(
            estimate=fused, velocity=track.velocity, last_fix=track.last_fix, last_egi=track.last_egi
        )

        w_data = steer_weights(res.u, res.v, arr, quantize_data)
        gain = realized_gain(w_data, heff)
        rows.append(
            TraceRow(
                trial=trial,
                block=k,
                scheme=scheme,
                snr_db=snr_db,
                phase_bits=phase_bits,
                true_x=state.position.x,
                true_y=state.position.y,
                true_u=true_angles.u,
                true_v=true_angles.v,
                true_ua=true_ua,
                est_u=res.u,
                est_v=res.v,
                est_x=fused.x,
                est_y=fused.y,
                gain=gain,
                norm_gain=normalized_gain(gain, arr),
                se_bits=spectral_efficiency(gain, budget),
                iterations=res.iterations,
                measurements=res.measurements,
            )
        )
    return rows


def run_campaign(cfg: ScenarioConfig) -> CampaignResult:
    """Run trials x sweep x schemes with paired noise, in a fixed order."""
    rows: list[TraceRow] = []
    for trial in range(cfg.run_trials):
        states, mus = simulate_truth(cfg, trial)
        gps_readings, egi_readings = simulate_readings(cfg, trial, states)
        for snr_db in cfg.link_snr_db:
            for phase_bits in cfg.estimator_phase_bits:
                for scheme in cfg.run_schemes:
                    rows.extend(
                        _run_scheme_trial(
                            cfg,
                            trial,
                            scheme,
                            snr_db,
                            phase_bits,
                            states,
                            mus,
                            gps_readings,
                            egi_readings,
                        )
                    )
    return CampaignResult(config=cfg, rows=tuple(rows))


# aggregation ---------------------------------------------------------------


def _agg(rows: list[TraceRow], cfg: ScenarioConfig, scheme, snr_db, phase_bits, block) -> dict:
    arr = cfg.arrays()
    budget = cfg.budget(snr_db)
    du = np.array([r.est_u - r.true_u for r in rows])
    dv = np.array([r.est_v - r.true_v for r in rows])
    pos2 = np.array([(r.est_x - r.true_x) ** 2 + (r.est_y - r.true_y) ** 2 for r in rows])
    mae_u = float(np.mean(np.abs(du)))
    mae_v = float(np.mean(np.abs(dv)))
    mae = 0.5 * (mae_u + mae_v)
    out = {
        "schema_version": SCHEMA_VERSION,
        "scheme": scheme,
        "snr_db": snr_db,
        "phase_bits": phase_bits,
        "block": block,
        "n": len(rows),
        "mse_u": float(np.mean(du**2)),
        "mse_v": float(np.mean(dv**2)),
        "mse_angle": float(0.5 * (np.mean(du**2) + np.mean(dv**2))),
        "mae_u": mae_u,
        "mae_v": mae_v,
        "mae_angle": mae,
        "rmse_pos_m": float(np.sqrt(np.mean(pos2))),
        "mean_gain": float(np.mean([r.gain for r in rows])),
        "mean_norm_gain": float(np.mean([r.norm_gain for r in rows])),
        "mean_se": float(np.mean([r.se_bits for r in rows])),
        "mean_iterations": float(np.mean([r.iterations for r in rows])),
        "mean_measurements": float(np.mean([r.measurements for r in rows])),
    }
    try:
        pred = predict_from_mae(mae, arr, budget)
        out["pred_gain_at_mae"] = pred.gain
        out["pred_se_at_mae"] = pred.se
    except ValueError:
        out["pred_gain_at_mae"] = ""
        out["pred_se_at_mae"] = ""
    return out


def summarize(rows, cfg: ScenarioConfig) -> list[dict]:
    """Per-block rows for every group, plus campaign rows under block -1."""
    groups: dict[tuple, list[TraceRow]] = {}
    for r in rows:
        groups.setdefault((r.scheme, r.snr_db, r.phase_bits), []).append(r)
    out = []
    for (scheme, snr_db, phase_bits), grp in groups.items():
        by_block: dict[int, list[TraceRow]] = {}
        for r in grp:
            by_block.setdefault(r.block, []).append(r)
        for block in sorted(by_block):
            out.append(_agg(by_block[block], cfg, scheme, snr_db, phase_bits, block))
        out.append(_agg(grp, cfg, scheme, snr_db, phase_bits, -1))
    return out


# CSV I/O --------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _write_atomic(path: str, header: list[str], rows) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_trace_csv(path: str, result: CampaignResult) -> None:
    rows = (
        [SCHEMA_VERSION, r.trial, r.block, r.scheme, _fmt(r.snr_db), r.phase_bits]
        + [_fmt(v) for v in (r.true_x, r.true_y, r.true_u, r.true_v, r.true_ua)]
        + [_fmt(v) for v in (r.est_u, r.est_v, r.est_x, r.est_y)]
        + [_fmt(v) for v in (r.gain, r.norm_gain, r.se_bits)]
        + [r.iterations, r.measurements]
        for r in result.rows
    )
    _write_atomic(path, TRACE_HEADER, rows)


def write_summary_csv(path: str, summary_rows: list[dict]) -> None:
    rows = ([_fmt(row[col]) for col in SUMMARY_HEADER] for row in summary_rows)
    _write_atomic(path, SUMMARY_HEADER, rows)


def read_summary_csv(path: str) -> list[dict]:
    with open(path, "r", newline="") as f:
        reader = csv.DictReader(f)
        missing = set(SUMMARY_HEADER) - set(reader.fieldnames or ())
        if missing:
            raise ConfigError(f"summary file lacks columns: {sorted(missing)}")
        out = []
        for raw in reader:
            row = dict(raw)
            for col in ("snr_db", "mse_angle", "mse_u", "mse_v", "mae_angle", "mean_norm_gain",
                        "mean_se", "mean_iterations", "rmse_pos_m"):
                row[col] = float(row[col]) if row[col] != "" else float("nan")
            for col in ("schema_version", "phase_bits", "block", "n"):
                row[col] = int(row[col])
            out.append(row)
        return out


# figure tables ---------------------------------------------------------------

_FIG_FAMILIES = {
    "fig7": ("hybrid_gpr", "perturbation", "gps_only"),
    "fig9": ("analog_gpr", "codebook_max"),
}


def emit_figure_tables(summary_rows: list[dict], figure: str) -> tuple[list[str], list[list]]:
    """Tidy per-figure tables from a summary; errors name any missing axis.

    fig5/fig6 need per-block rows of a multi-block run; fig7/fig9 need an
    snr_db sweep over their scheme family; fig8 needs a phase_bits sweep.
    """
    fig = figure.lower()
    if fig in ("fig5", "fig6"):
        rows = [r for r in summary_rows if r["block"] >= 0]
        if len({r["block"] for r in rows}) < 2:
            raise ConfigError(f"{fig} needs per-block rows from a run with blocks >= 2")
        rows.sort(key=lambda r: (r["scheme"], r["snr_db"], r["phase_bits"], r["block"]))
        if fig == "fig5":
            header = ["scheme", "snr_db", "phase_bits", "block", "rmse_pos_m"]
            return header, [
                [r["scheme"], _fmt(r["snr_db"]), r["phase_bits"], r["block"], _fmt(r["rmse_pos_m"])]
                for r in rows
            ]
        header = ["scheme", "snr_db", "phase_bits", "block", "mean_norm_gain", "mean_se"]
        return header, [
            [r["scheme"], _fmt(r["snr_db"]), r["phase_bits"], r["block"],
             _fmt(r["mean_norm_gain"]), _fmt(r["mean_se"])]
            for r in rows
        ]
    if fig in ("fig7", "fig9"):
        family = _FIG_FAMILIES[fig]
        rows = [r for r in summary_rows if r["block"] == -1 and r["scheme"] in family]
        if not rows:
            raise ConfigError(f"{fig} needs schemes from {family} in the summary")
        if len({r["snr_db"] for r in rows}) < 2:
            raise ConfigError(f"{fig} needs an snr_db sweep (at least two SNR points)")
        rows.sort(key=lambda r: (r["scheme"], r["snr_db"], r["phase_bits"]))
        header = ["scheme", "snr_db", "phase_bits", "mse_angle", "mean_iterations", "mean_se"]
        return header, [
            [r["scheme"], _fmt(r["snr_db"]), r["phase_bits"], _fmt(r["mse_angle"]),
             _fmt(r["mean_iterations"]), _fmt(r["mean_se"])]
            for r in rows
        ]
    if fig == "fig8":
        rows = [r for r in summary_rows if r["block"] == -1]
        if len({r["phase_bits"] for r in rows}) < 2:
            raise ConfigError("fig8 needs a phase_bits sweep (at least two values)")
        rows.sort(key=lambda r: (r["scheme"], r["phase_bits"], r["snr_db"]))
        header = ["scheme", "phase_bits", "snr_db", "mse_angle"]
        return header, [
            [r["scheme"], r["phase_bits"], _fmt(r["snr_db"]), _fmt(r["mse_angle"])] for r in rows
        ]
    raise ConfigError(f"unknown figure {figure!r}; expected fig5..fig9")
