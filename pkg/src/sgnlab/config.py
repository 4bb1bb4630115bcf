"""Flat INI-style configuration files, one section per module.

Example::

    [params]
    g = 9.81
    gamma = 9.81
    hbar = 1.0
    epsilon = 0.0

    [grid]
    n = 1024
    length = 40.0
    x_left = -20.0
    mode = periodic

    [scenario]
    kind = gaussian
    amplitude = 0.05
    width = 1.0

    [step]
    cfl = 0.3
    t_end = 5.0
    output_dt = 0.5

    [checks]
    energy = true

Unknown sections or keys are rejected (configuration typos must not silently
change a run).  ``--override section.key=value`` entries are applied before
parsing.  The echo written into every artifact contains every key with its
effective value, so an echo alone reproduces the run.
"""

from __future__ import annotations

import configparser
import io

from .diagnostics import Box
from .dynamics import BlowupThresholds, StepControl
from .errors import ConfigError
from .grid import Grid
from .kinematics import Params
from .scenarios import ScenarioConfig

__all__ = ["parse_config", "parse_config_text", "config_echo"]

_KNOWN = {
    "params": {"g", "gamma", "hbar", "epsilon"},
    "grid": {"n", "length", "dx", "x_left", "mode"},
    "scenario": {"kind", "amplitude", "width", "center", "wavenumber", "plateau",
                 "mollifier_epsilon", "target_energy", "file", "expect_blowup"},
    "step": {"cfl", "dt_max", "t_end", "output_every", "output_dt", "dt_fixed", "farfield_rtol"},
    "checks": {"energy", "bounds", "oleinik", "blowup", "dispersion",
               "energy_rtol", "dispersion_rtol", "oleinik_c",
               "ux_threshold", "hx_threshold", "depth_threshold"},
    "sweep": {"box_t1", "box_t2", "box_a", "box_b", "tie_mollifier"},
}


def _validate_sections(cp: configparser.ConfigParser) -> None:
    for section in cp.sections():
        if section not in _KNOWN:
            raise ConfigError(f"unknown config section [{section}]")
        unknown = set(cp[section]) - _KNOWN[section]
        if unknown:
            raise ConfigError(f"unknown keys in [{section}]: {sorted(unknown)}")


def _getfloat(sec, key, default=None):
    raw = sec.get(key, None)
    if raw is None or raw.strip() == "":
        return default
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"key {key} = {raw!r} is not a number") from exc


def _getbool(sec, key, default=False):
    raw = sec.get(key, None)
    if raw is None or raw.strip() == "":
        return default
    lowered = raw.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"key {key} = {raw!r} is not a boolean")


def parse_config_text(text: str, overrides: list[str] | None = None) -> ScenarioConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    for entry in overrides or []:
        if "=" not in entry or "." not in entry.split("=", 1)[0]:
            raise ConfigError(f"override {entry!r} must look like section.key=value")
        target, value = entry.split("=", 1)
        section, key = target.split(".", 1)
        section, key = section.strip(), key.strip()
        if not cp.has_section(section):
            cp.add_section(section)
        cp[section][key] = value.strip()
    _validate_sections(cp)

    sec = cp["params"] if cp.has_section("params") else {}
    params = Params(
        g=_getfloat(sec, "g", 9.81),
        gamma=_getfloat(sec, "gamma", 9.81),
        hbar=_getfloat(sec, "hbar", 1.0),
        epsilon=_getfloat(sec, "epsilon", 0.0),
    )

    if not cp.has_section("grid"):
        raise ConfigError("config needs a [grid] section")
    sec = cp["grid"]
    n = int(_getfloat(sec, "n", 0) or 0)
    mode = sec.get("mode", "periodic").strip()
    x_left = _getfloat(sec, "x_left", 0.0)
    length = _getfloat(sec, "length", None)
    dx = _getfloat(sec, "dx", None)
    if (length is None) == (dx is None):
        raise ConfigError("[grid] needs exactly one of length or dx")
    grid = Grid(n=n, dx=dx if dx is not None else length / n, x_left=x_left, mode=mode)

    sec = cp["step"] if cp.has_section("step") else {}
    out_every = _getfloat(sec, "output_every", 0)
    step = StepControl(
        cfl=_getfloat(sec, "cfl", 0.5),
        dt_max=_getfloat(sec, "dt_max", 0.1),
        t_end=_getfloat(sec, "t_end", 1.0),
        output_every=int(out_every) if out_every else 0,
        output_dt=_getfloat(sec, "output_dt", None),
        dt_fixed=_getfloat(sec, "dt_fixed", None),
        farfield_rtol=_getfloat(sec, "farfield_rtol", 1e-6),
    )

    sec = cp["checks"] if cp.has_section("checks") else {}
    checks = tuple(name for name in ("energy", "bounds", "oleinik", "blowup", "dispersion")
                   if _getbool(sec, name, name == "energy"))
    blowup = None
    if _getbool(sec, "blowup", False):
        blowup = BlowupThresholds(
            ux=_getfloat(sec, "ux_threshold", 1e3),
            hx=_getfloat(sec, "hx_threshold", 1e3),
            depth=_getfloat(sec, "depth_threshold", None),
        )

    box = None
    if cp.has_section("sweep"):
        sec = cp["sweep"]
        vals = [_getfloat(sec, k, None) for k in ("box_t1", "box_t2", "box_a", "box_b")]
        if all(v is not None for v in vals):
            box = Box(*vals)
    tie = _getbool(cp["sweep"], "tie_mollifier", True) if cp.has_section("sweep") else True

    sec = cp["scenario"] if cp.has_section("scenario") else {}
    raw_file = sec.get("file", None) if hasattr(sec, "get") else None
    raw_k = sec.get("wavenumber", "1.0") if hasattr(sec, "get") else "1.0"
    try:
        wavenumbers = tuple(float(tok) for tok in raw_k.replace(" ", "").split(",") if tok)
    except ValueError as exc:
        raise ConfigError(f"wavenumber = {raw_k!r} is not a number list") from exc
    checks_sec = cp["checks"] if cp.has_section("checks") else {}
    return ScenarioConfig(
        params=params,
        grid=grid,
        step=step,
        kind=(sec.get("kind", "flat") or "flat").strip(),
        amplitude=_getfloat(sec, "amplitude", 0.0),
        width=_getfloat(sec, "width", 1.0),
        center=_getfloat(sec, "center", 0.0),
        wavenumbers=wavenumbers or (1.0,),
        plateau=_getfloat(sec, "plateau", None),
        mollifier_epsilon=_getfloat(sec, "mollifier_epsilon", 0.0),
        target_energy=_getfloat(sec, "target_energy", None),
        file=raw_file.strip() if raw_file else None,
        expect_blowup=_getbool(sec, "expect_blowup", False),
        checks=checks,
        energy_rtol=_getfloat(checks_sec, "energy_rtol", 1e-6),
        dispersion_rtol=_getfloat(checks_sec, "dispersion_rtol", 1e-2),
        oleinik_C=_getfloat(checks_sec, "oleinik_c", None),
        blowup=blowup,
        box=box,
        sweep_mollifier_tied=tie,
    )


def parse_config(path: str, overrides: list[str] | None = None) -> ScenarioConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, overrides)


def config_echo(cfg: ScenarioConfig) -> str:
    """Canonical INI text with every effective value materialized."""
    cp = configparser.ConfigParser()
    f = lambda v: f"{v:.17g}"  # noqa: E731
    cp["params"] = {
        "g": f(cfg.params.g), "gamma": f(cfg.params.gamma),
        "hbar": f(cfg.params.hbar), "epsilon": f(cfg.params.epsilon),
    }
    cp["grid"] = {
        "n": str(cfg.grid.n), "dx": f(cfg.grid.dx),
        "x_left": f(cfg.grid.x_left), "mode": cfg.grid.mode,
    }
    cp["scenario"] = {
        "kind": cfg.kind, "amplitude": f(cfg.amplitude), "width": f(cfg.width),
        "center": f(cfg.center),
        "wavenumber": ",".join(f(k) for k in cfg.wavenumbers),
        "mollifier_epsilon": f(cfg.mollifier_epsilon),
        "expect_blowup": str(cfg.expect_blowup).lower(),
    }
    if cfg.plateau is not None:
        cp["scenario"]["plateau"] = f(cfg.plateau)
    if cfg.target_energy is not None:
        cp["scenario"]["target_energy"] = f(cfg.target_energy)
    if cfg.file:
        cp["scenario"]["file"] = cfg.file
    cp["step"] = {
        "cfl": f(cfg.step.cfl), "dt_max": f(cfg.step.dt_max), "t_end": f(cfg.step.t_end),
        "output_every": str(cfg.step.output_every),
        "farfield_rtol": f(cfg.step.farfield_rtol),
    }
    if cfg.step.output_dt is not None:
        cp["step"]["output_dt"] = f(cfg.step.output_dt)
    if cfg.step.dt_fixed is not None:
        cp["step"]["dt_fixed"] = f(cfg.step.dt_fixed)
    cp["checks"] = {name: str(name in cfg.checks).lower()
                    for name in ("energy", "bounds", "oleinik", "blowup", "dispersion")}
    cp["checks"]["energy_rtol"] = f(cfg.energy_rtol)
    cp["checks"]["dispersion_rtol"] = f(cfg.dispersion_rtol)
    if cfg.oleinik_C is not None:
        cp["checks"]["oleinik_c"] = f(cfg.oleinik_C)
    if cfg.blowup is not None:
        cp["checks"]["ux_threshold"] = f(cfg.blowup.ux)
        cp["checks"]["hx_threshold"] = f(cfg.blowup.hx)
        if cfg.blowup.depth is not None:
            cp["checks"]["depth_threshold"] = f(cfg.blowup.depth)
    if cfg.box is not None:
        cp["sweep"] = {
            "box_t1": f(cfg.box.t1), "box_t2": f(cfg.box.t2),
            "box_a": f(cfg.box.a), "box_b": f(cfg.box.b),
            "tie_mollifier": str(cfg.sweep_mollifier_tied).lower(),
        }
    out = io.StringIO()
    cp.write(out)
    return out.getvalue()
