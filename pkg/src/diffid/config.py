"""Experiment configuration: line-oriented `key = value` files with sections.

An empty file (or no file) reproduces the reference parameter tables:
macroscopic simulation (10,000 molecules, D = 4e-9 m^2/s, receiver at 40 um,
dt = 1e-4 s, dl = 1e-6 m) and identification code (A = 100, n = 10..26,
R = 0.1, a = 500, b = 0.99, c = 1.5).  Trial counts default to desk scale
(iter1 = 10^4, iter2 = 500); `paper_scale` restores 10^5 / 2000.

Unknown sections or keys are rejected by name, as are out-of-range values
and unstable grid settings.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field

from .channel import ChannelParams
from .codebook import CodeParams
from .pde import GridConfig

EXPERIMENT_KINDS = (
    "diffusion-profile", "absorption-rate", "rmse", "build-codebook",
    "eval-errors", "sweep-n", "sweep-time", "particle-check",
)

PAPER_ITER1 = 100_000
PAPER_ITER2 = 2_000
DESK_ITER1 = 10_000
DESK_ITER2 = 500


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the offending key."""


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.replace(",", " ").split())


# (section, key) -> (parser, default)
_SCHEMA = {
    ("channel", "diffusion_coeff"): (float, 4e-9),
    ("channel", "receiver_pos"): (float, 40e-6),
    ("channel", "amplitude"): (float, 100.0),
    ("channel", "slot_time"): (float, None),  # None -> peak rate time L_R^2/(6D)
    ("grid", "space_step"): (float, 1e-6),
    ("grid", "time_step"): (float, 1e-4),
    ("grid", "release_count"): (float, 10_000.0),
    ("grid", "domain_length"): (float, None),  # None -> sized from the horizon
    ("grid", "horizon"): (float, 0.2),
    ("grid", "sample_stride"): (int, 10),
    ("code", "n"): (int, 16),
    ("code", "rate"): (float, 0.1),
    ("code", "a"): (float, 500.0),
    ("code", "b"): (float, 0.99),
    ("code", "c"): (float, 1.5),
    ("trials", "iter1"): (int, DESK_ITER1),
    ("trials", "iter2"): (int, DESK_ITER2),
    ("trials", "seed"): (int, 1234),
    ("trials", "workers"): (int, 0),  # 0 -> machine parallelism
    ("experiment", "out_dir"): (str, "out"),
    ("experiment", "snapshot_times"): (_float_list, (0.013, 0.05, 0.1, 0.2)),
    ("experiment", "receiver_positions"): (_float_list, (20e-6, 40e-6, 60e-6, 80e-6)),
    ("experiment", "n_min"): (int, 10),
    ("experiment", "n_max"): (int, 26),
    ("experiment", "time_grid_start"): (float, 0.01),
    ("experiment", "time_grid_stop"): (float, 0.15),
    ("experiment", "time_grid_step"): (float, 0.01),
    ("experiment", "rate_horizon"): (float, 0.5),
    ("experiment", "n_particles"): (int, 100_000),
    ("experiment", "particle_steps"): (int, 256),
}


@dataclass
class ExperimentConfig:
    """Fully resolved experiment settings."""

    kind: str
    values: dict = field(default_factory=dict)  # (section, key) -> resolved value
    paper_scale: bool = False

    def __getitem__(self, section_key):
        return self.values[section_key]

    def channel_params(self) -> ChannelParams:
        slot = self[("channel", "slot_time")]
        if slot is None:
            lr = self[("channel", "receiver_pos")]
            slot = lr**2 / (6.0 * self[("channel", "diffusion_coeff")])
        return ChannelParams(
            diffusion_coeff=self[("channel", "diffusion_coeff")],
            receiver_pos=self[("channel", "receiver_pos")],
            peak_amplitude=self[("channel", "amplitude")],
            slot_time=slot)

    def code_params(self, n: int | None = None) -> CodeParams:
        return CodeParams(
            block_length=self[("code", "n")] if n is None else int(n),
            rate=self[("code", "rate")],
            radius_coeff=self[("code", "a")],
            radius_exp=self[("code", "b")],
            decode_coeff=self[("code", "c")],
            amplitude=self[("channel", "amplitude")])

    def grid_config(self, horizon: float | None = None) -> GridConfig:
        horizon = self[("grid", "horizon")] if horizon is None else horizon
        explicit = self[("grid", "domain_length")]
        if explicit is None:
            return GridConfig.for_horizon(
                self.channel_params(), horizon,
                space_step=self[("grid", "space_step")],
                time_step=self[("grid", "time_step")],
                release_count=self[("grid", "release_count")])
        return GridConfig(
            space_step=self[("grid", "space_step")],
            time_step=self[("grid", "time_step")],
            domain_length=explicit,
            release_count=self[("grid", "release_count")],
            params=self.channel_params())

    @property
    def iter1(self) -> int:
        return PAPER_ITER1 if self.paper_scale else self[("trials", "iter1")]

    @property
    def iter2(self) -> int:
        return PAPER_ITER2 if self.paper_scale else self[("trials", "iter2")]

    @property
    def seed(self) -> int:
        return self[("trials", "seed")]

    @property
    def workers(self) -> int:
        w = self[("trials", "workers")]
        return w if w > 0 else (os.cpu_count() or 1)

    def time_grid(self) -> tuple[float, ...]:
        start = self[("experiment", "time_grid_start")]
        stop = self[("experiment", "time_grid_stop")]
        step = self[("experiment", "time_grid_step")]
        out = []
        k = 0
        while True:
            t = start + k * step
            if t > stop + 1e-12:
                break
            out.append(round(t, 12))
            k += 1
        return tuple(out)

    def metadata(self) -> dict[str, object]:
        """Flat `section.key -> value` view of the resolved config for CSV headers.

        The output directory is where the artifact lives, not part of the
        experiment, so it is omitted to keep artifacts byte-identical across
        relocated reruns.
        """
        meta = {"experiment": self.kind, "paper_scale": self.paper_scale,
                "iter1": self.iter1, "iter2": self.iter2}
        for (section, key), value in sorted(self.values.items()):
            if (section, key) == ("experiment", "out_dir"):
                continue
            if (section, key) == ("channel", "slot_time") and value is None:
                value = self.channel_params().slot_time
            meta[f"{section}.{key}"] = value
        return meta


def _validate(cfg: ExperimentConfig) -> None:
    get = cfg.values.__getitem__
    positive = [("channel", "diffusion_coeff"), ("channel", "receiver_pos"),
                ("channel", "amplitude"), ("grid", "space_step"),
                ("grid", "time_step"), ("grid", "release_count"),
                ("grid", "horizon"), ("code", "rate"), ("code", "a"),
                ("experiment", "time_grid_start"), ("experiment", "time_grid_step")]
    for sk in positive:
        if get(sk) <= 0:
            raise ConfigError(f"{sk[0]}.{sk[1]} must be > 0, got {get(sk)}")
    slot = get(("channel", "slot_time"))
    if slot is not None and slot <= 0:
        raise ConfigError(f"channel.slot_time must be > 0, got {slot}")
    c = get(("code", "c"))
    if not 0.0 < c < 2.0:
        raise ConfigError(f"code.c = {c} outside the valid range (0, 2)")
    b = get(("code", "b"))
    if not 0.0 <= b <= 1.0:
        raise ConfigError(f"code.b = {b} outside the valid range [0, 1]")
    if get(("code", "n")) < 2:
        raise ConfigError(f"code.n must be >= 2, got {get(('code', 'n'))}")
    n_min, n_max = get(("experiment", "n_min")), get(("experiment", "n_max"))
    if not 2 <= n_min <= n_max:
        raise ConfigError(f"experiment.n_min..n_max invalid: {n_min}..{n_max}")
    for sk in [("trials", "iter1"), ("trials", "iter2"),
               ("experiment", "n_particles"), ("experiment", "particle_steps"),
               ("grid", "sample_stride")]:
        if get(sk) < 1:
            raise ConfigError(f"{sk[0]}.{sk[1]} must be >= 1, got {get(sk)}")
    if get(("trials", "seed")) < 0 or get(("trials", "workers")) < 0:
        raise ConfigError("trials.seed and trials.workers must be >= 0")
    if get(("experiment", "time_grid_stop")) < get(("experiment", "time_grid_start")):
        raise ConfigError("experiment.time_grid_stop must be >= time_grid_start")
    # explicit stability check so bad grids are named at parse time
    factor = (get(("channel", "diffusion_coeff")) * get(("grid", "time_step"))
              / get(("grid", "space_step")) ** 2)
    if factor >= 0.5:
        raise ConfigError(
            f"grid.time_step rejected: stability factor D*dt/dl^2 = {factor:.4g} >= 0.5")
    if get(("experiment", "rate_horizon")) <= 0:
        raise ConfigError("experiment.rate_horizon must be > 0")
    for t in get(("experiment", "snapshot_times")):
        if t <= 0:
            raise ConfigError(f"experiment.snapshot_times entries must be > 0, got {t}")
    for lr in get(("experiment", "receiver_positions")):
        if lr <= 0:
            raise ConfigError(f"experiment.receiver_positions entries must be > 0, got {lr}")


def parse_config(text: str, kind: str = "eval-errors", overrides=None,
                 paper_scale: bool = False) -> ExperimentConfig:
    """Parse config text, apply overrides, fill defaults, validate.

    `overrides` maps (section, key) to already-typed or string values and
    takes precedence over the file, mirroring command-line flags.
    """
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError(f"unknown experiment kind {kind!r}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc

    values = {}
    for section in parser.sections():
        if section == "experiment" and parser.has_option(section, "kind"):
            file_kind = parser.get(section, "kind")
            if file_kind not in EXPERIMENT_KINDS:
                raise ConfigError(f"unknown experiment kind {file_kind!r}")
        for key in parser.options(section):
            if section == "experiment" and key == "kind":
                continue
            if (section, key) not in _SCHEMA:
                raise ConfigError(f"unknown configuration key: [{section}] {key}")
            cast = _SCHEMA[(section, key)][0]
            raw = parser.get(section, key)
            try:
                values[(section, key)] = cast(raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for [{section}] {key}: {raw!r}") from exc
    for sk, value in (overrides or {}).items():
        if sk not in _SCHEMA:
            raise ConfigError(f"unknown configuration key: [{sk[0]}] {sk[1]}")
        cast = _SCHEMA[sk][0]
        values[sk] = cast(value) if isinstance(value, str) else value
    for sk, (_, default) in _SCHEMA.items():
        values.setdefault(sk, default)

    cfg = ExperimentConfig(kind=kind, values=values, paper_scale=paper_scale)
    _validate(cfg)
    return cfg


def load_config(path: str | None, kind: str, overrides=None,
                paper_scale: bool = False) -> ExperimentConfig:
    if path is None:
        return parse_config("", kind=kind, overrides=overrides, paper_scale=paper_scale)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config(text, kind=kind, overrides=overrides, paper_scale=paper_scale)
