"""Command-line front end: experiment orchestration and CSV emission.

Every experiment writes CSV artifacts whose `#`-prefixed header records the
fully resolved configuration and seed, so reruns with the same seed are
byte-identical and the files are self-describing.  Exit codes: 0 success,
1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import pde
from .channel import absorb_prob
from .codebook import generate_codebook, min_hamming, save_codebook
from .config import ConfigError, ExperimentConfig, load_config
from .montecarlo import TrialPlan, codebook_seed, evaluate, sweep_blocklength, sweep_time

#: experiment kind -> figure ids the secondary package can render from its CSV
FIGURES_BY_KIND = {
    "diffusion-profile": (2,),
    "absorption-rate": (3,),
    "rmse": (4,),
    "sweep-n": (5, 6),
    "sweep-time": (7,),
}


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (tuple, list)):
        return " ".join(_fmt(v) for v in value)
    return str(value)


def write_csv(path: Path, metadata: dict, columns: list[tuple[str, list]]) -> Path:
    """CSV with a `# key = value` metadata header; deterministic formatting."""
    lines = [f"# {key} = {_fmt(value)}" for key, value in metadata.items()]
    lines.append(",".join(name for name, _ in columns))
    n_rows = len(columns[0][1])
    for name, col in columns:
        if len(col) != n_rows:
            raise RuntimeError(f"column {name} has {len(col)} rows, expected {n_rows}")
    for row in range(n_rows):
        lines.append(",".join(_fmt(col[row]) for _, col in columns))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
    return path


def _report_columns(key_name: str, keys, reports) -> list[tuple[str, list]]:
    return [
        (key_name, list(keys)),
        ("lam_tilde", [r.lam for r in reports]),
        ("avg_type1", [r.avg_type1 for r in reports]),
        ("max_type1", [r.max_type1 for r in reports]),
        ("avg_type2", [r.avg_type2 for r in reports]),
        ("max_type2", [r.max_type2 for r in reports]),
        ("bound_type1", [r.bound_type1 for r in reports]),
        ("bound_type2", [r.bound_type2 for r in reports]),
        ("ci_max_type1", [r.ci_max_type1 for r in reports]),
        ("ci_max_type2", [r.ci_max_type2 for r in reports]),
        ("argmax_i", [r.argmax_pair[0] for r in reports]),
        ("argmax_j", [r.argmax_pair[1] for r in reports]),
        ("achieved_N", [r.n_codewords for r in reports]),
        ("seed", [r.seed for r in reports]),
        ("warnings", ["|".join(r.warnings) if r.warnings else "none" for r in reports]),
    ]


def _ms_label(t: float) -> str:
    return f"{t * 1e3:g}ms"


def _um_label(lr: float) -> str:
    return f"{lr * 1e6:g}um"


def run_experiment(cfg: ExperimentConfig, figures: bool = False) -> list[Path]:
    out_dir = Path(cfg[("experiment", "out_dir")])
    chan = cfg.channel_params()
    written: list[Path] = []
    summary = ""

    if cfg.kind == "diffusion-profile":
        times = cfg[("experiment", "snapshot_times")]
        grid_cfg = cfg.grid_config(horizon=max(times))
        pos, snaps = pde.profile_snapshots(grid_cfg, times)
        cols = [("position_m", list(pos))]
        cols += [(f"conc_{_ms_label(t)}", list(snaps[t])) for t in sorted(snaps)]
        written.append(write_csv(out_dir / "diffusion_profile.csv", cfg.metadata(), cols))
        summary = f"{len(snaps)} concentration snapshots over {pos.size} cells"

    elif cfg.kind == "absorption-rate":
        horizon = cfg[("experiment", "rate_horizon")]
        stride = cfg[("grid", "sample_stride")]
        cols = []
        peaks = []
        for lr in cfg[("experiment", "receiver_positions")]:
            chan_lr = replace(chan, receiver_pos=lr)
            grid_cfg = pde.GridConfig.for_horizon(
                chan_lr, horizon, space_step=cfg[("grid", "space_step")],
                time_step=cfg[("grid", "time_step")],
                release_count=cfg[("grid", "release_count")])
            series = pde.run(grid_cfg, horizon, stride=stride)
            if not cols:
                cols.append(("time_s", list(series.times)))
            cols.append((f"rate_{_um_label(lr)}", list(series.rate)))
            peaks.append(series.times[int(np.argmax(series.rate))])
        written.append(write_csv(out_dir / "absorption_rate.csv", cfg.metadata(), cols))
        summary = "rate peaks at " + ", ".join(f"{p * 1e3:.1f}ms" for p in peaks)

    elif cfg.kind == "rmse":
        horizon = cfg[("grid", "horizon")]
        grid_cfg = cfg.grid_config(horizon=horizon)
        grid = pde.init_grid(grid_cfg)
        times = [0.0]
        errors = [0.0]
        n_steps = int(round(horizon / grid_cfg.time_step))
        for _ in range(n_steps):
            grid = pde.step(grid)
            times.append(grid.elapsed)
            errors.append(pde.rmse(grid))
        written.append(write_csv(out_dir / "rmse.csv", cfg.metadata(),
                                 [("time_s", times), ("rmse", errors)]))
        summary = (f"RMSE peak {max(errors):.3g} at t={times[int(np.argmax(errors))] * 1e3:.1f}ms, "
                   f"final {errors[-1]:.3g}")

    elif cfg.kind == "build-codebook":
        params = cfg.code_params()
        cb = generate_codebook(params, codebook_seed(cfg.seed, params.block_length))
        path = out_dir / f"codebook_n{params.block_length}.txt"
        path.parent.mkdir(parents=True, exist_ok=True)
        save_codebook(cb, path)
        written.append(path)
        summary = (f"{cb.achieved_size}/{cb.target_size} codewords, r0={cb.r0:.4g}, "
                   f"min Hamming {min_hamming(cb.r0, params.amplitude)}"
                   + (" [PARTIAL]" if cb.is_partial else ""))

    elif cfg.kind == "eval-errors":
        params = cfg.code_params()
        lam = absorb_prob(chan.slot_time, chan).value
        plan = TrialPlan(iter1=cfg.iter1, iter2=cfg.iter2, master_seed=cfg.seed, lam=lam)
        cb = generate_codebook(params, codebook_seed(cfg.seed, params.block_length))
        report = evaluate(cb, plan, workers=cfg.workers)
        cols = _report_columns("n", [report.n], [report])
        written.append(write_csv(out_dir / "eval_errors.csv", cfg.metadata(), cols))
        summary = (f"n={report.n} N={report.n_codewords}: max Type I {report.max_type1:.4g}, "
                   f"max Type II {report.max_type2:.4g}")

    elif cfg.kind == "sweep-n":
        lam = absorb_prob(chan.slot_time, chan).value
        plan = TrialPlan(iter1=cfg.iter1, iter2=cfg.iter2, master_seed=cfg.seed, lam=lam)
        n_values = range(cfg[("experiment", "n_min")], cfg[("experiment", "n_max")] + 1)
        reports = sweep_blocklength(n_values, cfg.code_params(cfg[("experiment", "n_min")]),
                                    plan, workers=cfg.workers)
        cols = _report_columns("n", [r.n for r in reports], reports)
        written.append(write_csv(out_dir / "sweep_n.csv", cfg.metadata(), cols))
        summary = (f"n={reports[0].n}..{reports[-1].n}: max Type I "
                   f"{reports[0].max_type1:.3g}->{reports[-1].max_type1:.3g}")

    elif cfg.kind == "sweep-time":
        params = cfg.code_params()
        plan = TrialPlan(iter1=cfg.iter1, iter2=cfg.iter2, master_seed=cfg.seed, lam=0.5)
        times = cfg.time_grid()
        reports = sweep_time(params, chan, times, plan, workers=cfg.workers)
        cols = [("time_s", list(times))] + _report_columns("n", [r.n for r in reports], reports)
        written.append(write_csv(out_dir / "sweep_time.csv", cfg.metadata(), cols))
        summary = (f"t={times[0] * 1e3:g}..{times[-1] * 1e3:g}ms: max Type II "
                   f"{reports[0].max_type2:.3g}->{reports[-1].max_type2:.3g}")

    elif cfg.kind == "particle-check":
        n_particles = cfg[("experiment", "n_particles")]
        horizon = chan.slot_time
        rng = np.random.default_rng((cfg.seed, 0xBB))
        fraction = pde.simulate_particles(n_particles, chan, horizon, rng,
                                          n_steps=cfg[("experiment", "particle_steps")])
        expected = absorb_prob(horizon, chan).value
        sigma = float(np.sqrt(expected * (1.0 - expected) / n_particles))
        z = (fraction - expected) / sigma
        cols = [("n_particles", [n_particles]), ("horizon_s", [horizon]),
                ("fraction_absorbed", [fraction]), ("erfc_value", [expected]),
                ("binomial_sigma", [sigma]), ("z_score", [z])]
        written.append(write_csv(out_dir / "particle_check.csv", cfg.metadata(), cols))
        summary = (f"{n_particles} walkers: absorbed fraction {fraction:.5f} vs "
                   f"erfc {expected:.5f} (z = {z:+.2f})")

    else:  # pragma: no cover - kinds are validated upstream
        raise ConfigError(f"unknown experiment kind {cfg.kind!r}")

    if figures:
        written += _render_figures(cfg, written, out_dir)

    print(f"{cfg.kind}: {summary}; wrote " + ", ".join(str(p) for p in written))
    return written


def _render_figures(cfg: ExperimentConfig, artifacts: list[Path], out_dir: Path) -> list[Path]:
    fig_ids = FIGURES_BY_KIND.get(cfg.kind)
    if not fig_ids:
        raise RuntimeError(f"--figures is not available for {cfg.kind!r}")
    try:
        from diffid_figures import render_figure
    except ImportError as exc:
        raise RuntimeError(
            "--figures requires the diffid-figures package (pip install ./figures)") from exc
    csv_path = artifacts[0]
    produced = []
    for fig_id in fig_ids:
        produced += [Path(p) for p in render_figure(fig_id, csv_path, out_dir)]
    return produced


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("config", nargs="?", default=None,
                     help="optional key = value config file")
    sub.add_argument("--seed", type=int, help="master seed")
    sub.add_argument("--out-dir", help="artifact directory (default: out)")
    sub.add_argument("--workers", type=int, help="worker processes (0 = machine)")
    sub.add_argument("--paper-scale", action="store_true",
                     help="use the reference trial counts (1e5 / 2000) instead of desk scale")
    sub.add_argument("--figures", action="store_true",
                     help="also render the matching figure(s) via diffid-figures")


_FLAG_KEYS = {
    "seed": ("trials", "seed"),
    "out_dir": ("experiment", "out_dir"),
    "workers": ("trials", "workers"),
    "n": ("code", "n"),
    "n_min": ("experiment", "n_min"),
    "n_max": ("experiment", "n_max"),
    "iter1": ("trials", "iter1"),
    "iter2": ("trials", "iter2"),
    "horizon": ("grid", "horizon"),
    "rate_horizon": ("experiment", "rate_horizon"),
    "times": ("experiment", "snapshot_times"),
    "receivers": ("experiment", "receiver_positions"),
    "t_start": ("experiment", "time_grid_start"),
    "t_stop": ("experiment", "time_grid_stop"),
    "t_step": ("experiment", "time_grid_step"),
    "particles": ("experiment", "n_particles"),
    "receiver_pos": ("channel", "receiver_pos"),
    "slot_time": ("channel", "slot_time"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diffid",
        description="Deterministic identification over a 1D diffusion Poisson channel")
    subs = parser.add_subparsers(dest="kind", required=True)

    sp = subs.add_parser("diffusion-profile", help="concentration snapshots vs position")
    sp.add_argument("--times", nargs="+", type=float, help="snapshot times, s")
    sp = subs.add_parser("absorption-rate", help="absorption rate vs time per receiver distance")
    sp.add_argument("--receivers", nargs="+", type=float, help="receiver positions, m")
    sp.add_argument("--rate-horizon", type=float, help="simulated horizon, s")
    sp = subs.add_parser("rmse", help="FDM vs analytical profile RMSE over time")
    sp.add_argument("--horizon", type=float, help="simulated horizon, s")
    sp = subs.add_parser("build-codebook", help="construct and store a codebook")
    sp.add_argument("--n", type=int, help="block length")
    sp = subs.add_parser("eval-errors", help="Type I/II Monte Carlo for one block length")
    sp.add_argument("--n", type=int, help="block length")
    sp.add_argument("--iter1", type=int)
    sp.add_argument("--iter2", type=int)
    sp = subs.add_parser("sweep-n", help="errors and bounds versus block length")
    sp.add_argument("--n-min", type=int)
    sp.add_argument("--n-max", type=int)
    sp.add_argument("--iter1", type=int)
    sp.add_argument("--iter2", type=int)
    sp = subs.add_parser("sweep-time", help="errors versus diffusion time at fixed n")
    sp.add_argument("--n", type=int)
    sp.add_argument("--t-start", type=float)
    sp.add_argument("--t-stop", type=float)
    sp.add_argument("--t-step", type=float)
    sp.add_argument("--receiver-pos", type=float, help="receiver position, m")
    sp.add_argument("--iter1", type=int)
    sp.add_argument("--iter2", type=int)
    sp = subs.add_parser("particle-check", help="microscopic walkers vs erfc absorbing probability")
    sp.add_argument("--particles", type=int)
    sp.add_argument("--slot-time", type=float, help="horizon for the check, s")

    for sub in subs.choices.values():
        _add_common(sub)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {}
    for flag, section_key in _FLAG_KEYS.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides[section_key] = tuple(value) if isinstance(value, list) else value
    try:
        cfg = load_config(args.config, kind=args.kind, overrides=overrides,
                          paper_scale=args.paper_scale)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    try:
        run_experiment(cfg, figures=args.figures)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - report and exit nonzero
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
