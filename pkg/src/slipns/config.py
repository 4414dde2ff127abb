"""Run configuration: flat key-value sections, validated en bloc.

The format is INI-style with one section level ([grid], [eos], [step],
[run], [weights]); every key has a default and unknown keys are hard
errors so typos cannot silently fall back to defaults.
"""

import configparser
import hashlib
import io
from dataclasses import dataclass, field

from .diagnostics import LyapunovWeights
from .errors import ConfigurationError
from .grid import PRESETS, EosParams, build_grid
from .solver import StepControl

_SCHEMA = {
    "grid": {
        "lx": ("float", 1.0),
        "ly": ("float", 1.0),
        "lz": ("float", 1.0),
        "nx": ("int", 32),
        "ny": ("int", 32),
        "nz": ("int", 32),
    },
    "eos": {
        "a": ("float", 1.0),
        "gamma": ("float", 2.0),
        "mu": ("float", 1.0),
        "lambda": ("float", 0.0),
        "rho_bar": ("float", 1.0),
    },
    "step": {
        "cfl_advective": ("float", 0.4),
        "cfl_viscous": ("float", 0.18),
        "dt_min": ("float", 1e-10),
        "dt_max": ("float", 0.1),
        "t_end": ("float", 8.0),
        "max_steps": ("int", 10_000_000),
        "eps_floor": ("optfloat", None),
    },
    "run": {
        "preset": ("str", "smooth-perturbation"),
        "amplitude": ("float", 0.05),
        "rho_star": ("float", 0.5),
        "sample_cadence": ("int", 20),
        "checkpoint_cadence": ("int", 0),  # 0 disables periodic checkpoints
        "seed": ("int", 0),
        "probe_trials": ("int", 50),
        "plots": ("bool", False),
        "out_dir": ("str", "out"),
    },
    "weights": {
        "d1": ("float", 20.0),
        "d2": ("float", 10.0),
        "d3": ("float", 20.0),
        "d4": ("float", 10.0),
        "d5": ("float", 20.0),
    },
}


@dataclass
class RunConfig:
    grid: object
    eos: EosParams
    step: StepControl
    weights: LyapunovWeights
    preset: str = "smooth-perturbation"
    amplitude: float = 0.05
    rho_star: float = 0.5
    sample_cadence: int = 20
    checkpoint_cadence: int = 0
    seed: int = 0
    probe_trials: int = 50
    plots: bool = False
    out_dir: str = "out"
    raw: dict = field(default_factory=dict)


def _convert(section, key, kind, text):
    path = f"[{section}] {key}"
    try:
        if kind == "float":
            return float(text)
        if kind == "optfloat":
            if text.strip().lower() in ("", "none", "auto"):
                return None
            return float(text)
        if kind == "int":
            v = int(text)
            return v
        if kind == "bool":
            t = text.strip().lower()
            if t in ("1", "true", "yes", "on"):
                return True
            if t in ("0", "false", "no", "off"):
                return False
            raise ValueError(t)
        return text.strip()
    except ValueError:
        raise ConfigurationError(f"{path}: cannot parse {text!r} as {kind}") from None


def parse_config(text: str) -> RunConfig:
    """Parse and validate a config document; defaults fill in every gap."""
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as err:
        raise ConfigurationError(f"malformed config: {err}") from None

    values = {sec: {k: d for k, (_, d) in keys.items()} for sec, keys in _SCHEMA.items()}
    for sec in cp.sections():
        if sec not in _SCHEMA:
            raise ConfigurationError(f"unknown config section [{sec}]")
        for key, raw in cp.items(sec):
            if key not in _SCHEMA[sec]:
                raise ConfigurationError(f"unknown key [{sec}] {key}")
            kind = _SCHEMA[sec][key][0]
            values[sec][key] = _convert(sec, key, kind, raw)

    g = values["grid"]
    e = values["eos"]
    s = values["step"]
    r = values["run"]
    w = values["weights"]
    if r["preset"] not in PRESETS:
        raise ConfigurationError(
            f"[run] preset: unknown preset {r['preset']!r}; choose from {PRESETS}"
        )
    grid = build_grid((g["lx"], g["ly"], g["lz"]), (g["nx"], g["ny"], g["nz"]))
    eos = EosParams(e["a"], e["gamma"], e["mu"], e["lambda"], e["rho_bar"])
    step = StepControl(
        cfl_advective=s["cfl_advective"],
        cfl_viscous=s["cfl_viscous"],
        dt_min=s["dt_min"],
        dt_max=s["dt_max"],
        t_end=s["t_end"],
        max_steps=s["max_steps"],
        eps_floor=s["eps_floor"],
    )
    weights = LyapunovWeights(w["d1"], w["d2"], w["d3"], w["d4"], w["d5"])
    if r["sample_cadence"] < 1:
        raise ConfigurationError("[run] sample_cadence must be >= 1")
    if r["checkpoint_cadence"] < 0:
        raise ConfigurationError("[run] checkpoint_cadence must be >= 0")
    if r["probe_trials"] < 10:
        raise ConfigurationError("[run] probe_trials must be >= 10")
    return RunConfig(
        grid=grid,
        eos=eos,
        step=step,
        weights=weights,
        preset=r["preset"],
        amplitude=r["amplitude"],
        rho_star=r["rho_star"],
        sample_cadence=r["sample_cadence"],
        checkpoint_cadence=r["checkpoint_cadence"],
        seed=r["seed"],
        probe_trials=r["probe_trials"],
        plots=r["plots"],
        out_dir=r["out_dir"],
        raw=values,
    )


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def config_to_text(cfg: RunConfig) -> str:
    """Echo of the effective configuration, every key explicit."""
    buf = io.StringIO()
    for sec in _SCHEMA:
        buf.write(f"[{sec}]\n")
        for key in _SCHEMA[sec]:
            v = cfg.raw[sec][key]
            if v is None:
                v = "auto"
            elif isinstance(v, bool):
                v = "true" if v else "false"
            elif isinstance(v, float):
                v = f"{v:.17g}"
            buf.write(f"{key} = {v}\n")
        buf.write("\n")
    return buf.getvalue()


def config_hash(cfg: RunConfig) -> bytes:
    """sha256 of the effective config text; stored in checkpoints so a
    resume against a different setup is caught."""
    return hashlib.sha256(config_to_text(cfg).encode("utf-8")).digest()
