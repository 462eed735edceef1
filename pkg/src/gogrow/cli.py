"""Command-line front end: config parsing, run orchestration, chi sweeps,
and deterministic CSV/JSON emission.

Config files are a TOML-subset of `[section]` headers and `key = value`
lines (numbers, booleans, quoted or bare strings).  Unknown sections or
keys are rejected with the offending line number.  All CSV numbers are
written with 12 significant digits and newline line endings so identical
configs produce byte-identical outputs.

Exit codes: 0 ok, 1 validation error, 2 runtime abort, 3 check failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import asymptotics, solver
from .diagnostics import FrontTrace, TraceRecorder
from .profiles import minimal_speed, traveling_wave, eta_local, eta_nonlocal
from .solver import Model, SimConfig, make_config


def _fmt(v: float) -> str:
    if isinstance(v, float) and math.isnan(v):
        return "nan"
    return format(v, ".12g")


_SCHEMA = {
    "model": {"kind", "chi", "flux", "epsilon_mode", "epsilon"},
    "grid": {"x_left", "dx", "width"},
    "run": {
        "t_end",
        "cfl_sigma",
        "frame",
        "frame_r",
        "frame_t0",
        "init",
        "init_file",
        "amplitude",
        "left_pad",
        "right_pad",
        "front_theta",
        "gaussian_center",
        "gaussian_width",
    },
    "output": {"trace_every", "snapshot_every"},
}

_DEFAULTS = {
    ("model", "kind"): "local_u",
    ("model", "chi"): 1.0,
    ("model", "flux"): "auto",
    ("model", "epsilon_mode"): "grid_tied",
    ("model", "epsilon"): 2.0,
    ("grid", "x_left"): -40.0,
    ("grid", "dx"): 0.05,
    ("grid", "width"): 80.0,
    ("run", "t_end"): 50.0,
    ("run", "cfl_sigma"): 0.4,
    ("run", "frame"): "lab",
    ("run", "frame_r"): 0.5,
    ("run", "frame_t0"): 100.0,
    ("run", "init"): "heaviside",
    ("run", "init_file"): None,
    ("run", "amplitude"): 1.0,
    ("run", "left_pad"): 15.0,
    ("run", "right_pad"): 25.0,
    ("run", "front_theta"): 1e-6,
    ("run", "gaussian_center"): 0.0,
    ("run", "gaussian_width"): 1.0,
    ("output", "trace_every"): 0.5,
    ("output", "snapshot_every"): None,
}


@dataclass(frozen=True)
class RunConfig:
    """Solver config plus output cadence settings."""

    sim: SimConfig
    trace_every: float = 0.5
    snapshot_every: float | None = None
    raw: dict | None = None

    def __post_init__(self):
        if self.trace_every <= 0.0:
            raise ValueError("trace_every must be positive")
        if self.snapshot_every is not None and self.snapshot_every <= 0.0:
            raise ValueError("snapshot_every must be positive")


def _parse_value(text: str, lineno: int):
    text = text.strip()
    if text.startswith('"') and text.endswith('"') and len(text) >= 2:
        return text[1:-1]
    if text in ("true", "false"):
        return text == "true"
    if text == "none":
        return None
    try:
        return int(text) if text.lstrip("+-").isdigit() else float(text)
    except ValueError:
        if text and all(c.isalnum() or c in "_-." for c in text):
            return text
        raise ValueError(f"line {lineno}: cannot parse value {text!r}") from None


def parse_config(text: str) -> RunConfig:
    """Parse the key-value config format; unknown keys are rejected."""
    values: dict = dict(_DEFAULTS)
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                raise ValueError(f"line {lineno}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value, got {raw!r}")
        if section is None:
            raise ValueError(f"line {lineno}: key outside of any section")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in _SCHEMA[section]:
            raise ValueError(f"line {lineno}: unknown key `{key}` in [{section}]")
        values[(section, key)] = _parse_value(val, lineno)

    chi = float(values[("model", "chi")])
    if chi < 0.0 or not math.isfinite(chi):
        raise ValueError("validation error on `chi`: must be finite and >= 0")
    flux_name = values[("model", "flux")]
    flux = None
    if flux_name != "auto":
        if flux_name == "heaviside":
            flux = solver.FluxSpec.local_heaviside()
        elif flux_name == "ramp":
            flux = solver.FluxSpec.nonlocal_ramp()
        elif flux_name == "regularized":
            flux = solver.FluxSpec.regularized(float(values[("model", "epsilon")]))
        else:
            raise ValueError(f"validation error on `flux`: unknown kind {flux_name!r}")
    init: str | solver.InitPreset = str(values[("run", "init")])
    if init == "file_table":
        path = values[("run", "init_file")]
        if not path:
            raise ValueError("validation error on `init_file`: required for file_table init")
        table = np.genfromtxt(path, delimiter=",", skip_header=1)
        if table.ndim != 2 or table.shape[1] < 2:
            raise ValueError("validation error on `init_file`: need two CSV columns x,v")
        init = solver.InitPreset.file_table(table[:, 0], table[:, 1])
    try:
        sim = make_config(
            model=str(values[("model", "kind")]),
            chi=chi,
            dx=float(values[("grid", "dx")]),
            t_end=float(values[("run", "t_end")]),
            x_left=float(values[("grid", "x_left")]),
            width=float(values[("grid", "width")]),
            frame=str(values[("run", "frame")]),
            init=init,
            amplitude=float(values[("run", "amplitude")]),
            cfl_sigma=float(values[("run", "cfl_sigma")]),
            flux=flux,
            epsilon_mode=str(values[("model", "epsilon_mode")]),
            epsilon=float(values[("model", "epsilon")]),
            left_pad=float(values[("run", "left_pad")]),
            right_pad=float(values[("run", "right_pad")]),
            front_theta=float(values[("run", "front_theta")]),
            frame_r=float(values[("run", "frame_r")]),
            frame_t0=float(values[("run", "frame_t0")]),
            gaussian_center=float(values[("run", "gaussian_center")]),
            gaussian_width=float(values[("run", "gaussian_width")]),
        )
    except ValueError as err:
        raise ValueError(f"validation error: {err}") from err
    snap = values[("output", "snapshot_every")]
    return RunConfig(
        sim=sim,
        trace_every=float(values[("output", "trace_every")]),
        snapshot_every=None if snap is None else float(snap),
        raw={k: v for k, v in values.items()},
    )


def emit_config(cfg: RunConfig) -> str:
    """Canonical config text; parse(emit(parse(text))) is the identity."""
    out = []
    vals = dict(_DEFAULTS)
    if cfg.raw:
        vals.update(cfg.raw)
    vals[("output", "trace_every")] = cfg.trace_every
    vals[("output", "snapshot_every")] = cfg.snapshot_every
    for section in ("model", "grid", "run", "output"):
        out.append(f"[{section}]")
        for key in sorted(_SCHEMA[section]):
            v = vals[(section, key)]
            if v is None:
                rep = "none"
            elif isinstance(v, bool):
                rep = "true" if v else "false"
            elif isinstance(v, (int, float)):
                rep = _fmt(float(v))
            else:
                rep = f'"{v}"'
            out.append(f"{key} = {rep}")
        out.append("")
    return "\n".join(out)


def _write_csv(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(_fmt(float(v)) for v in row) + "\n")


class _SnapshotWriter:
    def __init__(self, out_dir: Path, every: float):
        self.out_dir = out_dir
        self.every = every
        self.next_t = 0.0

    def __call__(self, state, cfg) -> None:
        if state.t < self.next_t - 1e-9:
            return
        self.next_t = max(self.next_t + self.every, state.t + self.every * 0.5)
        x = cfg.grid.nodes(state.x_left)
        name = f"snapshot_{state.t:.6g}.csv"
        if cfg.model in (Model.LOCAL_U, Model.FKPP):
            _write_csv(self.out_dir / name, ["x", "u"], [x, state.field])
        else:
            rho = solver.derived_rho(state, cfg)
            p = solver.derived_P(state, cfg)
            _write_csv(self.out_dir / name, ["x", "rho", "P"], [x, rho, p])


def cmd_run(cfg: RunConfig, out_dir: Path) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    rec = TraceRecorder()
    observers = [rec]
    if cfg.snapshot_every is not None:
        observers.append(_SnapshotWriter(out_dir, cfg.snapshot_every))
    try:
        final = solver.run(cfg.sim, observers=observers, trace_every=cfg.trace_every)
    except RuntimeError as err:
        _flush_trace(out_dir, rec)
        print(f"runtime abort: {err}", file=sys.stderr)
        return 2
    _flush_trace(out_dir, rec)

    moments = np.asarray(rec.moment)
    finite = np.isfinite(moments)
    drift = math.nan
    worst = math.nan
    i0 = rec.moment_initial
    if finite.any() and not math.isnan(i0) and i0 > 0:
        drift = float(np.max(np.abs(moments[finite] - i0)) / abs(i0))
        report = asymptotics.check_envelopes(
            rec.front_trace(),
            cfg.sim.chi_params,
            i0,
            cfg.sim.grid.dx,
            local_model=cfg.sim.model is Model.LOCAL_U,
        )
        worst = report.upper_margin_min
    defects = np.asarray(rec.min_defect)
    min_defect = float(np.nanmin(defects)) if np.isfinite(defects).any() else math.nan
    summary = {
        "final_t": final.t,
        "final_x_front": rec.x_front[-1] if rec.x_front else math.nan,
        "moment_drift": drift,
        "min_shape_defect": min_defect,
        "worst_envelope_margin": worst,
        "undershoot_clips": final.clip_count,
    }
    with open(out_dir / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


def _flush_trace(out_dir: Path, rec: TraceRecorder) -> None:
    _write_csv(
        out_dir / "trace.csv",
        ["t", "x_front", "I", "min_shape_defect", "weighted_defect_sup", "rh_residual"],
        [
            np.asarray(rec.t),
            np.asarray(rec.x_front),
            np.asarray(rec.moment),
            np.asarray(rec.min_defect),
            np.asarray(rec.weighted_sup),
            np.asarray(rec.rh_residual),
        ],
    )


def _sweep_job(args: tuple) -> dict:
    chi, base_raw, trace_every, snapshot_every, job_dir = args
    raw = dict(base_raw) if base_raw else {}
    raw[("model", "chi")] = chi
    text_cfg = RunConfig(
        sim=_rebuild_sim(raw),
        trace_every=trace_every,
        snapshot_every=snapshot_every,
        raw=raw,
    )
    status = cmd_run(text_cfg, Path(job_dir))
    row = {"chi": chi, "c_star": minimal_speed(chi).c_star, "status": status}
    trace_path = Path(job_dir) / "trace.csv"
    r_fit = math.nan
    drift = math.nan
    if trace_path.exists():
        t, x = _read_trace(trace_path)
        try:
            fit = asymptotics.fit_front_delay(
                FrontTrace(t=t, x_front=x), minimal_speed(chi).c_star
            )
            r_fit = fit.r
        except ValueError:
            pass
        summary_path = Path(job_dir) / "summary.json"
        if summary_path.exists():
            with open(summary_path) as fh:
                drift = json.load(fh).get("moment_drift", math.nan)
    row["r_fit"] = r_fit
    row["r_theory"] = asymptotics.theoretical_delay(chi)
    row["moment_drift"] = drift
    fit_ok = not math.isnan(r_fit) and abs(r_fit - row["r_theory"]) <= 0.25
    row["pass"] = 1.0 if (status == 0 and fit_ok) else 0.0
    return row


def _rebuild_sim(raw: dict) -> SimConfig:
    lines = []
    by_section: dict[str, list[str]] = {s: [] for s in _SCHEMA}
    for (section, key), v in raw.items():
        if v is None:
            rep = "none"
        elif isinstance(v, bool):
            rep = "true" if v else "false"
        elif isinstance(v, (int, float)):
            rep = _fmt(float(v))
        else:
            rep = f'"{v}"'
        by_section[section].append(f"{key} = {rep}")
    for section, entries in by_section.items():
        lines.append(f"[{section}]")
        lines.extend(entries)
    return parse_config("\n".join(lines)).sim


def _read_trace(path: Path) -> tuple[np.ndarray, np.ndarray]:
    data = np.genfromtxt(path, delimiter=",", names=True)
    t = np.atleast_1d(data["t"])
    x = np.atleast_1d(data["x_front"])
    return t, x


def cmd_sweep(chi_list: list[float], cfg: RunConfig, out_dir: Path, jobs: int = 1) -> int:
    if not chi_list or any(c < 0 for c in chi_list):
        raise ValueError("validation error on `chi`: sweep needs nonnegative values")
    out_dir.mkdir(parents=True, exist_ok=True)
    names: list[str] = []
    seen: dict[str, int] = {}
    for chi in chi_list:
        base = f"chi_{_fmt(float(chi))}"
        if base in seen:
            seen[base] += 1
            names.append(f"{base}_{seen[base]}")
        else:
            seen[base] = 0
            names.append(base)
    args = [
        (float(chi), cfg.raw, cfg.trace_every, cfg.snapshot_every, str(out_dir / name))
        for chi, name in zip(chi_list, names)
    ]
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_job, args))
    else:
        rows = [_sweep_job(a) for a in args]
    header = ["chi", "c_star", "r_fit", "r_theory", "moment_drift", "pass"]
    with open(out_dir / "sweep_summary.csv", "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(float(row[k])) for k in header) + "\n")
    return 0 if all(r["status"] == 0 for r in rows) else 2


def cmd_wave(chi: float, model: str, x_min: float, x_max: float, dx: float, out_path: Path | None) -> int:
    if not (x_min < x_max and dx > 0):
        raise ValueError("validation error on wave range: need xmin < xmax and dx > 0")
    x = np.arange(x_min, x_max + dx * 0.5, dx)
    u = traveling_wave("u", chi, x)
    rho = traveling_wave("rho", chi, x)
    p = traveling_wave("p", chi, x)
    key = model.lower()
    if key == "u":
        wave, eta_vals = u, eta_local(chi, np.clip(u, 0.0, 1.0))
    elif key in ("p", "rho"):
        # the density model's defect lives on its cumulative mass
        wave, eta_vals = p, eta_nonlocal(chi, p)
    else:
        raise ValueError(f"validation error on `model`: {model!r}")
    h = 1e-5
    slope = (np.asarray(traveling_wave(key if key != "rho" else "p", chi, x + h))
             - np.asarray(traveling_wave(key if key != "rho" else "p", chi, x - h))) / (2.0 * h)
    defect = np.abs(-slope - eta_vals)
    header = ["x", "u_tw", "rho_tw", "P_tw", "eta_of_value", "shape_defect_check"]
    cols = [x, u, rho, p, eta_vals, defect]
    if out_path is None:
        sys.stdout.write(",".join(header) + "\n")
        for row in zip(*cols):
            sys.stdout.write(",".join(_fmt(float(v)) for v in row) + "\n")
    else:
        _write_csv(out_path, header, cols)
    return 0


def cmd_fit(trace_path: Path, c: float, t_min: float | None, t_max: float | None, chi: float | None) -> int:
    t, x = _read_trace(trace_path)
    window = None
    if t_min is not None or t_max is not None:
        window = (t_min if t_min is not None else 1.0, t_max if t_max is not None else float(t[-1]))
    fit = asymptotics.fit_front_delay(FrontTrace(t=t, x_front=x), c, window)
    out = {"r": fit.r, "b": fit.b, "stderr_r": fit.stderr_r}
    if chi is not None:
        out["r_theory"] = asymptotics.theoretical_delay(chi)
        out["pass"] = bool(abs(fit.r - out["r_theory"]) <= 0.25)
    else:
        out["r_theory"] = None
        out["pass"] = None
    print(json.dumps(out, sort_keys=True))
    if out["pass"] is False:
        return 3
    return 0


def cmd_check(trace_path: Path, chi: float, i0: float, dx: float) -> int:
    t, x = _read_trace(trace_path)
    report = asymptotics.check_envelopes(
        FrontTrace(t=t, x_front=x), minimal_speed(chi), i0, dx
    )
    print(
        json.dumps(
            {
                "upper_margin_min": report.upper_margin_min,
                "fitted_B": report.fitted_B,
                "n_skipped": report.n_skipped,
                "pass": report.upper_ok,
            },
            sort_keys=True,
        )
    )
    return 0 if report.upper_ok else 3


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gogrow", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    p_run = sub.add_parser("run", help="run one simulation")
    p_run.add_argument("--config", required=True, type=Path)
    p_run.add_argument("--out", required=True, type=Path)

    p_sweep = sub.add_parser("sweep", help="run a chi sweep")
    p_sweep.add_argument("--chi", required=True, help="comma-separated chi values")
    p_sweep.add_argument("--config", required=True, type=Path)
    p_sweep.add_argument("--out", required=True, type=Path)
    p_sweep.add_argument("--jobs", type=int, default=1)

    p_wave = sub.add_parser("wave", help="dump sampled traveling waves")
    p_wave.add_argument("--chi", required=True, type=float)
    p_wave.add_argument("--model", required=True, choices=["u", "p", "rho"])
    p_wave.add_argument("--xmin", required=True, type=float)
    p_wave.add_argument("--xmax", required=True, type=float)
    p_wave.add_argument("--dx", required=True, type=float)
    p_wave.add_argument("--out", type=Path, default=None)

    p_fit = sub.add_parser("fit", help="fit the log-delay coefficient of a trace")
    p_fit.add_argument("--trace", required=True, type=Path)
    p_fit.add_argument("--c", required=True, type=float)
    p_fit.add_argument("--tmin", type=float, default=None)
    p_fit.add_argument("--tmax", type=float, default=None)
    p_fit.add_argument("--chi", type=float, default=None)

    p_check = sub.add_parser("check", help="check envelope bounds on a trace")
    p_check.add_argument("--trace", required=True, type=Path)
    p_check.add_argument("--chi", required=True, type=float)
    p_check.add_argument("--i0", required=True, type=float)
    p_check.add_argument("--dx", type=float, default=0.05)

    return ap


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.cmd == "run":
            cfg = parse_config(args.config.read_text())
            return cmd_run(cfg, args.out)
        if args.cmd == "sweep":
            cfg = parse_config(args.config.read_text())
            chi_list = [float(v) for v in str(args.chi).split(",") if v.strip()]
            return cmd_sweep(chi_list, cfg, args.out, jobs=max(1, args.jobs))
        if args.cmd == "wave":
            return cmd_wave(args.chi, args.model, args.xmin, args.xmax, args.dx, args.out)
        if args.cmd == "fit":
            return cmd_fit(args.trace, args.c, args.tmin, args.tmax, args.chi)
        if args.cmd == "check":
            return cmd_check(args.trace, args.chi, args.i0, args.dx)
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except RuntimeError as err:
        print(f"runtime abort: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
