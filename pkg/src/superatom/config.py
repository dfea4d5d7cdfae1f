"""Run configuration: INI-style files with [params], [trajectory], [run].

Frequencies in the file are in MHz and mean ``2 pi x value`` rad/us; times
are in microseconds.  Unknown keys are rejected.
"""

from __future__ import annotations

import configparser
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping

from .dynamics.mcwf import TrajectoryConfig
from .errors import ConfigurationError
from .models import TWO_PI, PhysicalParams, effective_coupling

MODES = ("spectrum", "trajectory", "ensemble", "master", "ladder-spectrum")

# preset -> (drive amplitude in MHz, photon order of the targeted resonance)
PRESETS: dict[str, tuple[float, int]] = {
    "fig3": (0.15, 1),
    "fig4": (1.5, 2),
    "fig5": (1.25, 3),
    "fig6": (2.0, 3),
}

FREQUENCY_KEYS = ("g0", "Omega", "Delta", "kappa", "gamma", "alpha", "delta_probe",
                  "dispersive_shift")
PARAM_KEYS = {f.name for f in fields(PhysicalParams)}
TRAJECTORY_KEYS = {f.name for f in fields(TrajectoryConfig)}


@dataclass(frozen=True)
class RunSettings:
    """Mode-specific knobs; detunings in rad/us, times in microseconds."""

    trajectories: int = 1
    branch: int = 1
    quench: bool = False
    spectrum_min: float | None = None
    spectrum_max: float | None = None
    spectrum_points: int = 201
    n_exc_max: int = 2
    master_dt: float = 0.05
    burst_window: float | None = None

    def __post_init__(self):
        if self.trajectories < 1:
            raise ConfigurationError("ensemble size must be >= 1", "trajectories")
        if self.branch not in (1, -1):
            raise ConfigurationError("branch must be +1 or -1", "branch")
        if self.spectrum_points < 1:
            raise ConfigurationError("must be >= 1", "spectrum_points")
        if self.master_dt <= 0:
            raise ConfigurationError("must be > 0", "master_dt")
        if self.n_exc_max < 0:
            raise ConfigurationError("must be >= 0", "n_exc_max")
        if self.burst_window is not None and self.burst_window <= 0:
            raise ConfigurationError("must be > 0", "burst_window")


RUN_KEYS = {f.name for f in fields(RunSettings)} | {"mode", "preset", "output_dir", "workers"}
RUN_FREQUENCY_KEYS = ("spectrum_min", "spectrum_max")


@dataclass(frozen=True)
class RunConfig:
    params: PhysicalParams = field(default_factory=PhysicalParams)
    trajectory: TrajectoryConfig = field(default_factory=TrajectoryConfig)
    mode: str = "trajectory"
    preset: str | None = None
    output_dir: str = "out"
    workers: int = 1
    run: RunSettings = field(default_factory=RunSettings)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigurationError(f"unknown mode {self.mode!r}", "mode")
        if self.preset is not None and self.preset not in PRESETS:
            raise ConfigurationError(f"unknown preset {self.preset!r}", "preset")
        if self.workers < 1:
            raise ConfigurationError("must be >= 1", "workers")


def apply_preset(params: PhysicalParams, preset: str, branch: int = 1) -> PhysicalParams:
    """Set the drive amplitude and the ``n``-photon resonant detuning of a figure preset."""
    if preset not in PRESETS:
        raise ConfigurationError(f"unknown preset {preset!r}", "preset")
    alpha_mhz, order = PRESETS[preset]
    delta = branch * effective_coupling(params) / math.sqrt(order)
    return params.replace(alpha=TWO_PI * alpha_mhz, delta_probe=delta)


def _coerce(value: Any, target: type, key: str):
    if isinstance(value, str):
        value = value.strip()
    try:
        if target is bool:
            if isinstance(value, bool):
                return value
            low = str(value).lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(value)
        if target is int:
            f = float(value)
            if f != int(f):
                raise ValueError(value)
            return int(f)
        if target is float:
            return float(value)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"cannot read {value!r} as {target.__name__}", key) from None


_PARAM_TYPES = {"n_b": int, "n_max": int}
_TRAJ_TYPES = {"seed": int, "lookahead": int, "store_states": bool, "integrator": str}
_RUN_TYPES = {"trajectories": int, "branch": int, "quench": bool, "spectrum_points": int,
              "n_exc_max": int, "workers": int, "mode": str, "preset": str, "output_dir": str}


def _check_keys(section: str, given: Mapping[str, Any], allowed: set[str]):
    for key in given:
        if key not in allowed:
            raise ConfigurationError(f"unknown key in [{section}]", f"{section}.{key}")


def config_from_sections(sections: Mapping[str, Mapping[str, Any]],
                         internal_units: bool = False) -> RunConfig:
    """Build a validated :class:`RunConfig` from section dictionaries.

    With ``internal_units`` the frequencies are already in rad/us (manifest
    round-trip); otherwise they are MHz.
    """
    for name in sections:
        if name not in ("params", "trajectory", "run"):
            raise ConfigurationError("unknown section", name)
    scale = 1.0 if internal_units else TWO_PI
    raw_p = dict(sections.get("params", {}))
    raw_t = dict(sections.get("trajectory", {}))
    raw_r = dict(sections.get("run", {}))
    _check_keys("params", raw_p, PARAM_KEYS)
    _check_keys("trajectory", raw_t, TRAJECTORY_KEYS)
    _check_keys("run", raw_r, RUN_KEYS)

    pkw = {}
    for k, v in raw_p.items():
        val = _coerce(v, _PARAM_TYPES.get(k, float), k)
        pkw[k] = val * scale if k in FREQUENCY_KEYS else val
    tkw = {k: _coerce(v, _TRAJ_TYPES.get(k, float), k) for k, v in raw_t.items()}
    rkw = {}
    for k, v in raw_r.items():
        if v is None or (isinstance(v, str) and v.strip().lower() in ("", "none")):
            rkw[k] = None
            continue
        val = _coerce(v, _RUN_TYPES.get(k, float), k)
        rkw[k] = val * scale if k in RUN_FREQUENCY_KEYS else val
    params = PhysicalParams(**pkw)
    traj = TrajectoryConfig(**tkw)
    top = {k: rkw.pop(k) for k in ("mode", "preset", "output_dir", "workers") if k in rkw}
    run = RunSettings(**rkw)
    preset = top.get("preset")
    if preset is not None and not internal_units:
        params = apply_preset(params, preset, run.branch)
    return RunConfig(params=params, trajectory=traj, run=run,
                     mode=top.get("mode", "trajectory"), preset=preset,
                     output_dir=top.get("output_dir", "out"), workers=top.get("workers", 1))


def read_sections(path: str | Path) -> tuple[dict[str, dict[str, Any]], bool]:
    """Sections of an INI config, or of the ``resolved`` block of a manifest JSON."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        data = json.loads(text)
        return data["resolved"], True
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    parser.read_string(text)
    return {s: dict(parser[s]) for s in parser.sections()}, False


def parse_config(path: str | Path | None = None, overrides: Mapping[str, Any] | None = None,
                 ) -> RunConfig:
    """Parse a config file (or nothing) plus ``section.key -> value`` overrides."""
    sections: dict[str, dict[str, Any]] = {}
    internal = False
    if path is not None:
        sections, internal = read_sections(path)
    for dotted, value in (overrides or {}).items():
        if "." not in dotted:
            raise ConfigurationError("override keys look like section.key", dotted)
        sec, key = dotted.split(".", 1)
        if internal and key in FREQUENCY_KEYS + RUN_FREQUENCY_KEYS and value is not None:
            value = TWO_PI * _coerce(value, float, key)
        sections.setdefault(sec, {})[key] = value
    return config_from_sections(sections, internal_units=internal)


def resolved_sections(cfg: RunConfig) -> dict[str, dict[str, Any]]:
    """Exact internal-unit representation used for the manifest round-trip."""
    run = asdict(cfg.run)
    run.update(mode=cfg.mode, preset=cfg.preset, output_dir=cfg.output_dir, workers=cfg.workers)
    return {"params": asdict(cfg.params), "trajectory": asdict(cfg.trajectory), "run": run}


def display_sections(cfg: RunConfig) -> dict[str, dict[str, Any]]:
    """Human-facing view with frequencies converted back to MHz."""
    out = resolved_sections(cfg)
    for k in FREQUENCY_KEYS:
        out["params"][k] = out["params"][k] / TWO_PI
    for k in RUN_FREQUENCY_KEYS:
        if out["run"][k] is not None:
            out["run"][k] = out["run"][k] / TWO_PI
    return out
