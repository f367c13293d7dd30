"""Render figures from diffid CSV artifacts.

Each figure is regenerated purely from a CSV file written by the simulation
CLI — nothing is recomputed here.  The CSV metadata header is checked
against the experiment kind the figure expects, so plotting a mismatched
artifact fails loudly instead of producing a misleading image.

Output is deterministic: fixed style, a fixed SVG hash salt and no embedded
timestamps, so rerendering the same CSV is byte-identical.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

matplotlib.rcParams.update({
    "figure.figsize": (6.4, 4.2),
    "figure.dpi": 120,
    "savefig.dpi": 120,
    "axes.grid": True,
    "grid.alpha": 0.35,
    "lines.linewidth": 1.6,
    "svg.hashsalt": "diffid-figures",
})

#: figure id -> experiment kind whose CSV it consumes
EXPECTED_KIND = {
    2: "diffusion-profile",
    3: "absorption-rate",
    4: "rmse",
    5: "sweep-n",
    6: "sweep-n",
    7: "sweep-time",
}


class FigureError(ValueError):
    """CSV does not match what the requested figure needs."""


@dataclass(frozen=True)
class FigureSpec:
    figure_id: int
    csv_path: Path
    out_base: Path  # extension-less; .png and .svg are appended

    def __post_init__(self):
        if self.figure_id not in EXPECTED_KIND:
            raise FigureError(f"unknown figure id {self.figure_id}; expected 2..7")


@dataclass
class Artifact:
    metadata: dict
    columns: dict  # name -> numpy array (float) or list of strings
    path: Path

    def numeric(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise FigureError(f"{self.path}: missing required column {name!r}")
        col = self.columns[name]
        if not isinstance(col, np.ndarray):
            raise FigureError(f"{self.path}: column {name!r} is not numeric")
        return col

    def prefixed(self, prefix: str) -> list[str]:
        names = [c for c in self.columns if c.startswith(prefix)]
        if not names:
            raise FigureError(f"{self.path}: no {prefix}* columns found")
        return names


def read_artifact(path) -> Artifact:
    path = Path(path)
    metadata: dict[str, str] = {}
    header: list[str] | None = None
    rows: list[list[str]] = []
    for line in path.read_text().splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            key, _, value = line.lstrip("# ").partition("=")
            metadata[key.strip()] = value.strip()
        elif header is None:
            header = line.split(",")
        else:
            rows.append(line.split(","))
    if header is None or not rows:
        raise FigureError(f"{path}: no data rows to plot")
    for k, row in enumerate(rows):
        if len(row) != len(header):
            raise FigureError(f"{path}: row {k + 1} has {len(row)} fields, "
                              f"header has {len(header)}")
    columns: dict[str, object] = {}
    for idx, name in enumerate(header):
        raw = [row[idx] for row in rows]
        try:
            columns[name] = np.array([float(v) for v in raw])
        except ValueError:
            columns[name] = raw
    return Artifact(metadata=metadata, columns=columns, path=path)


def _check_kind(art: Artifact, fig_id: int) -> None:
    expected = EXPECTED_KIND[fig_id]
    got = art.metadata.get("experiment")
    if got != expected:
        raise FigureError(
            f"{art.path}: figure {fig_id} renders {expected!r} artifacts, "
            f"but this CSV is from {got!r}")


def _plot_profile(ax, art: Artifact) -> None:
    pos = art.numeric("position_m")
    for name in art.prefixed("conc_"):
        ax.plot(pos * 1e6, art.numeric(name), label=name.removeprefix("conc_"))
    ax.set_xlabel("position (um)")
    ax.set_ylabel("molecules per cell")
    ax.set_title("Concentration profiles")
    ax.legend(title="time")


def _plot_rates(ax, art: Artifact) -> None:
    t = art.numeric("time_s")
    for name in art.prefixed("rate_"):
        ax.plot(t * 1e3, art.numeric(name), label=name.removeprefix("rate_"))
    ax.set_xlabel("time (ms)")
    ax.set_ylabel("absorption rate (molecules/s)")
    ax.set_title("Absorption rate by receiver distance")
    ax.legend(title="receiver")


def _plot_rmse(ax, art: Artifact) -> None:
    ax.plot(art.numeric("time_s") * 1e3, art.numeric("rmse"))
    ax.set_xlabel("time (ms)")
    ax.set_ylabel("RMSE (molecules per cell)")
    ax.set_title("Finite-difference vs analytical profile")


_ERROR_SERIES = (("avg_type1", "avg Type I", "-"),
                 ("max_type1", "max Type I", "-"),
                 ("avg_type2", "avg Type II", "-"),
                 ("max_type2", "max Type II", "-"),
                 ("bound_type1", "Type I bound", "--"),
                 ("bound_type2", "Type II bound", "--"))


def _plot_error_curves(ax, art: Artifact, x_name, x_label, series) -> None:
    x = art.numeric(x_name)
    for name, label, style in series:
        y = art.numeric(name)
        shown = np.where(y > 0, y, np.nan)  # log axis cannot carry zeros
        ax.plot(x, shown, style, marker="o" if "-" == style else None,
                markersize=3.5, label=label)
    ax.set_yscale("log")
    ax.set_xlabel(x_label)
    ax.set_ylabel("error probability")
    ax.legend()


def _plot_sweep_n_full(ax, art: Artifact) -> None:
    _plot_error_curves(ax, art, "n", "block length n", _ERROR_SERIES)
    ax.set_title("Identification errors vs block length")


def _plot_sweep_n_type2(ax, art: Artifact) -> None:
    series = [s for s in _ERROR_SERIES if "type2" in s[0] and "avg" not in s[0]]
    _plot_error_curves(ax, art, "n", "block length n", series)
    ax.set_title("Maximum Type II error vs block length")


def _plot_sweep_time(ax, art: Artifact) -> None:
    x = art.numeric("time_s") * 1e3
    for name, label, style in _ERROR_SERIES[:4]:
        y = art.numeric(name)
        ax.plot(x, np.where(y > 0, y, np.nan), style, marker="o", markersize=3.5,
                label=label)
    ax.set_yscale("log")
    ax.set_xlabel("diffusion time (ms)")
    ax.set_ylabel("error probability")
    ax.set_title("Identification errors vs diffusion time")
    ax.legend()


_PLOTTERS = {
    2: _plot_profile,
    3: _plot_rates,
    4: _plot_rmse,
    5: _plot_sweep_n_full,
    6: _plot_sweep_n_type2,
    7: _plot_sweep_time,
}


def render(spec: FigureSpec) -> list[Path]:
    """Render one figure to PNG and SVG next to `out_base`."""
    art = read_artifact(spec.csv_path)
    _check_kind(art, spec.figure_id)
    fig, ax = plt.subplots(constrained_layout=True)
    try:
        _PLOTTERS[spec.figure_id](ax, art)
        spec.out_base.parent.mkdir(parents=True, exist_ok=True)
        png = spec.out_base.with_suffix(".png")
        svg = spec.out_base.with_suffix(".svg")
        fig.savefig(png, metadata={"Software": "diffid-figures"})
        fig.savefig(svg, metadata={"Date": None})
    finally:
        plt.close(fig)
    return [png, svg]


def render_figure(figure_id: int, csv_path, out_dir) -> list[Path]:
    """Convenience wrapper: render figure `figure_id` from `csv_path` into
    `out_dir` as fig<N>.png / fig<N>.svg."""
    spec = FigureSpec(figure_id=int(figure_id), csv_path=Path(csv_path),
                      out_base=Path(out_dir) / f"fig{int(figure_id)}")
    return render(spec)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="diffid-figures",
        description="Render figures from diffid CSV artifacts (PNG + SVG)")
    parser.add_argument("--figure", type=int, required=True, choices=sorted(EXPECTED_KIND),
                        help="figure id")
    parser.add_argument("csv", help="input CSV artifact")
    parser.add_argument("--out-dir", default="figs", help="output directory")
    args = parser.parse_args(argv)
    try:
        paths = render_figure(args.figure, args.csv, args.out_dir)
    except (FigureError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"figure {args.figure}: wrote " + ", ".join(str(p) for p in paths))
    return 0


if __name__ == "__main__":
    sys.exit(main())
