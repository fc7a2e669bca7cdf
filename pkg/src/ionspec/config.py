"""Experiment configuration: one JSON document per run, unknown keys rejected.

Frequencies in the file are Hz and times are seconds; everything is
converted to rad/s on the way in.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

TWO_PI = 2.0 * math.pi


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


@dataclass(frozen=True)
class PowerLawModel:
    n: int
    j0_hz: float
    alpha: float


@dataclass(frozen=True)
class TrapModel:
    n_ions: int
    axial_freq_hz: float
    transverse_freq_hz: float
    rabi_hz: tuple
    lamb_dicke: float
    detuning_hz: float | None = None
    target_alpha: float | None = None
    mass_scaling: bool = True


@dataclass(frozen=True)
class Analysis:
    zero_pad: int = 8
    window: str = "none"
    threshold: float = 0.1
    min_sep_hz: float | None = None
    mirror: bool = True


@dataclass(frozen=True)
class Sampling:
    mode: str = "exact"
    shots: int = 1000
    seed: int = 0


@dataclass(frozen=True)
class ExperimentConfig:
    model: PowerLawModel | TrapModel
    b_over_j: float = 50.0
    gamma: float = 0.05
    modes: tuple = (1, 7)
    t_max: float | None = None
    t_j: float | None = None
    n_samples: int = 256
    sampling: Sampling = field(default_factory=Sampling)
    analysis: Analysis = field(default_factory=Analysis)
    frame_convention: str = "supplement"
    ansatz: str = "sine"
    m2b_form: str = "corrected"

    @property
    def n_spins(self) -> int:
        return self.model.n if isinstance(self.model, PowerLawModel) else self.model.n_ions


def _take(d: dict, allowed: dict, where: str) -> dict:
    if not isinstance(d, dict):
        raise ConfigError(f"{where or 'config'}: expected an object")
    for key in d:
        if key not in allowed:
            raise ConfigError(f"unknown key '{where + '.' if where else ''}{key}'")
    out = {}
    for key, (kind, required) in allowed.items():
        path = f"{where}.{key}" if where else key
        if key not in d:
            if required:
                raise ConfigError(f"missing required key '{path}'")
            continue
        out[key] = _coerce(d[key], kind, path)
    return out


def _coerce(value, kind, path):
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"'{path}' must be an integer")
        return value
    if kind == "float":
        if isinstance(value, str) and value.lower() in ("inf", "infinity"):
            return math.inf
        if isinstance(value, bool) or not isinstance(value, (int, float)) or math.isnan(value):
            raise ConfigError(f"'{path}' must be a number")
        return float(value)
    if kind == "optfloat":
        return None if value is None else _coerce(value, "float", path)
    if kind == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"'{path}' must be true or false")
        return value
    if kind == "str":
        if not isinstance(value, str):
            raise ConfigError(f"'{path}' must be a string")
        return value
    return value


def _choice(value, options, path):
    if value not in options:
        raise ConfigError(f"'{path}' must be one of {', '.join(options)}; got {value!r}")
    return value


def _positive(value, path, strict=True):
    if value is not None and (value <= 0 if strict else value < 0):
        raise ConfigError(f"'{path}' must be {'positive' if strict else 'non-negative'}")
    return value


def parse_config(doc: dict) -> ExperimentConfig:
    top = _take(doc, {
        "model": ("raw", True),
        "b_over_j": ("float", False),
        "gamma": ("float", False),
        "modes": ("raw", False),
        "time": ("raw", False),
        "sampling": ("raw", False),
        "analysis": ("raw", False),
        "frame_convention": ("str", False),
        "ansatz": ("str", False),
        "m2b_form": ("str", False),
    }, "")

    model_doc = top["model"]
    if not isinstance(model_doc, dict) or len(model_doc) != 1:
        raise ConfigError("'model' must contain exactly one of 'power_law' or 'trap'")
    (kind, body), = model_doc.items()
    if kind == "power_law":
        p = _take(body, {"n": ("int", True), "j0_hz": ("float", True), "alpha": ("float", True)},
                  "model.power_law")
        _positive(p["n"], "model.power_law.n")
        _positive(p["alpha"], "model.power_law.alpha", strict=False)
        if not math.isfinite(p["j0_hz"]) or p["j0_hz"] == 0:
            raise ConfigError("'model.power_law.j0_hz' must be finite and nonzero")
        model = PowerLawModel(**p)
    elif kind == "trap":
        p = _take(body, {
            "n_ions": ("int", True),
            "axial_freq_hz": ("float", True),
            "transverse_freq_hz": ("float", True),
            "rabi_hz": ("raw", True),
            "lamb_dicke": ("float", True),
            "detuning_hz": ("optfloat", False),
            "target_alpha": ("optfloat", False),
            "mass_scaling": ("bool", False),
        }, "model.trap")
        _positive(p["n_ions"], "model.trap.n_ions")
        for key in ("axial_freq_hz", "transverse_freq_hz", "lamb_dicke"):
            _positive(p[key], f"model.trap.{key}")
        rabi = p["rabi_hz"]
        rabi = [rabi] * p["n_ions"] if not isinstance(rabi, list) else rabi
        if len(rabi) != p["n_ions"]:
            raise ConfigError("'model.trap.rabi_hz' needs one entry per ion")
        p["rabi_hz"] = tuple(_positive(_coerce(r, "float", "model.trap.rabi_hz"),
                                       "model.trap.rabi_hz", strict=False) for r in rabi)
        if (p.get("detuning_hz") is None) == (p.get("target_alpha") is None):
            raise ConfigError("'model.trap' needs exactly one of 'detuning_hz' or 'target_alpha'")
        _positive(p.get("detuning_hz"), "model.trap.detuning_hz")
        model = TrapModel(**p)
    else:
        raise ConfigError(f"unknown key 'model.{kind}'")

    kw = {"model": model}
    if "b_over_j" in top:
        kw["b_over_j"] = _positive(top["b_over_j"], "b_over_j", strict=False)
    if "gamma" in top:
        if not math.isfinite(top["gamma"]):
            raise ConfigError("'gamma' must be finite")
        kw["gamma"] = top["gamma"]
    n = model.n if kind == "power_law" else model.n_ions

    if "modes" in top:
        modes = top["modes"]
        modes = [modes] if isinstance(modes, int) and not isinstance(modes, bool) else modes
        if not isinstance(modes, list) or not 1 <= len(modes) <= 2:
            raise ConfigError("'modes' must be a mode index or a pair [k, k']")
        for k in modes:
            if isinstance(k, bool) or not isinstance(k, int) or not 1 <= k <= n:
                raise ConfigError(f"'modes' entry {k!r} outside 1..{n}")
        kw["modes"] = tuple(modes)

    if "time" in top:
        t = _take(top["time"], {"t_max": ("float", False), "t_j": ("float", False),
                                "n_samples": ("int", False)}, "time")
        if ("t_max" in t) == ("t_j" in t):
            raise ConfigError("'time' needs exactly one of 't_max' (seconds) or 't_j' (T times J)")
        if "t_max" in t:
            kw["t_max"] = _positive(t["t_max"], "time.t_max")
        else:
            kw["t_j"] = _positive(t["t_j"], "time.t_j")
        if "n_samples" in t:
            if t["n_samples"] < 8:
                raise ConfigError("'time.n_samples' must be at least 8")
            kw["n_samples"] = t["n_samples"]
    else:
        kw["t_j"] = 40.0

    if "sampling" in top:
        s = _take(top["sampling"], {"mode": ("str", True), "shots": ("int", False),
                                    "seed": ("int", False)}, "sampling")
        _choice(s["mode"], ("exact", "shots"), "sampling.mode")
        if s.get("shots", 1) < 1:
            raise ConfigError("'sampling.shots' must be >= 1")
        kw["sampling"] = Sampling(**s)

    if "analysis" in top:
        a = _take(top["analysis"], {"zero_pad": ("int", False), "window": ("str", False),
                                    "threshold": ("float", False), "min_sep_hz": ("optfloat", False),
                                    "mirror": ("bool", False)}, "analysis")
        if "window" in a:
            _choice(a["window"], ("none", "hann"), "analysis.window")
        if a.get("zero_pad", 1) < 1:
            raise ConfigError("'analysis.zero_pad' must be >= 1")
        if not 0 <= a.get("threshold", 0.1) <= 1:
            raise ConfigError("'analysis.threshold' must lie in [0, 1]")
        kw["analysis"] = Analysis(**a)

    if "frame_convention" in top:
        kw["frame_convention"] = _choice(top["frame_convention"], ("main", "supplement"),
                                         "frame_convention")
    if "ansatz" in top:
        kw["ansatz"] = _choice(top["ansatz"], ("sine", "exact"), "ansatz")
    if "m2b_form" in top:
        kw["m2b_form"] = _choice(top["m2b_form"], ("corrected", "printed"), "m2b_form")
    return ExperimentConfig(**kw)


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
    return parse_config(doc)
