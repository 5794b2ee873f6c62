"""Sweep configuration files.

The format is flat INI text: one ``[sweep]`` section for the grid and cutoff
settings, and one ``[curve:NAME]`` section per curve.  Unknown sections or
keys are rejected rather than ignored, so a typo cannot silently change what
gets computed.  Two presets ship with the package and can be named in place
of a config path on the command line.

Example::

    [sweep]
    steps = 101

    [curve:boson-vacuum]
    species = boson
    state = vacuum
    modes = 1, 4
"""

from __future__ import annotations

import configparser
from importlib import resources

from .sweep import ConfigError, CurveSpec, SweepRequest, config_digest

SWEEP_KEYS = {"u_start", "u_stop", "steps", "n_max", "h", "template"}
CURVE_KEYS = {"species", "state", "modes", "excite"}
PRESETS = ("fig1a", "fig1b")


def _parse_modes(raw: str, where: str) -> tuple[int, int]:
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != 2:
        raise ConfigError(f"{where}: modes wants two comma-separated labels, got {raw!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise ConfigError(f"{where}: bad mode label in {raw!r}") from exc


def _get(section, key: str, cast, default, where: str):
    if key not in section:
        return default
    try:
        return cast(section[key])
    except ValueError as exc:
        raise ConfigError(f"{where}: bad value for {key}: {section[key]!r}") from exc


def parse_config(text: str) -> SweepRequest:
    """Parse and validate config text into a sweep request."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc

    sweep_kwargs = {}
    curves = []
    for section in parser.sections():
        body = parser[section]
        if section == "sweep":
            unknown = set(body) - SWEEP_KEYS
            if unknown:
                raise ConfigError(f"[sweep]: unknown keys {sorted(unknown)}")
            sweep_kwargs = {
                "u_start": _get(body, "u_start", float, 0.0, "[sweep]"),
                "u_stop": _get(body, "u_stop", float, 1.0, "[sweep]"),
                "steps": _get(body, "steps", int, 101, "[sweep]"),
                "n_max": _get(body, "n_max", int, 40, "[sweep]"),
                "h": _get(body, "h", float, 0.01, "[sweep]"),
                "template": body.get("template", "single-arc"),
            }
        elif section.startswith("curve:"):
            name = section[len("curve:"):].strip()
            if not name:
                raise ConfigError("curve sections need a name: [curve:NAME]")
            unknown = set(body) - CURVE_KEYS
            if unknown:
                raise ConfigError(f"[{section}]: unknown keys {sorted(unknown)}")
            for key in ("species", "state", "modes"):
                if key not in body:
                    raise ConfigError(f"[{section}]: missing required key {key}")
            curves.append(
                CurveSpec(
                    name=name,
                    species=body["species"].strip(),
                    state=body["state"].strip(),
                    modes=_parse_modes(body["modes"], f"[{section}]"),
                    excite=_get(body, "excite", int, None, f"[{section}]"),
                )
            )
        else:
            raise ConfigError(f"unknown section [{section}]")

    return SweepRequest(
        curves=tuple(curves), config_sha256=config_digest(text), **sweep_kwargs
    )


def preset_text(name: str) -> str:
    """Raw config text of a shipped preset."""
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r} (have {', '.join(PRESETS)})")
    return resources.files("cavityent").joinpath("presets", f"{name}.cfg").read_text()


def load_config(source: str) -> SweepRequest:
    """Load a config from a file path or a preset name."""
    if source in PRESETS:
        return parse_config(preset_text(source))
    try:
        with open(source) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {source!r}: {exc}") from exc
    return parse_config(text)
