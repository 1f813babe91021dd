"""Sectioned key=value run configuration (a TOML-compatible subset).

Files look like

    [pulse]
    e0 = 0.06        # a.u.
    omega = 0.057

Unknown keys are rejected (typo safety), every physical parameter has a
schema type, and defaults applied during parsing are recorded so output
metadata can distinguish chosen from defaulted values.  Values written
by emit_config are quoted where TOML requires it, so emitted files are
valid TOML; the parser additionally tolerates bare-word strings.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .correlation import TimeGrid
from .errors import ConfigError
from .grid import PotentialSpec, RadialGrid
from .model import RateProvider
from .pulse import PulseParams

__all__ = ["RunConfig", "parse_config", "parse_config_text", "emit_config",
           "apply_overrides", "validate_required"]

_REQUIRED = object()

# key -> (type tag, default); type tags: float, int, bool, str, c-or-fit
_SCHEMA = {
    "pulse.e0": ("float", 0.06),
    "pulse.omega": ("float", _REQUIRED),
    "pulse.cycles": ("float", 1.0),
    "grid.dr": ("float", 0.05),
    "grid.rmax": ("float", 240.0),
    "grid.lmax": ("int", 16),
    "grid.absorber": ("float", 0.2),
    "time.dt": ("float", 0.02),
    "time.n_t": ("int", 64),
    "time.t_total": ("float", 0.0),  # 0 = full pulse duration
    "potential.kind": ("str", "coulomb"),
    "potential.charge": ("float", 1.0),
    "potential.freq": ("float", 1.0),
    "model.rate": ("str", "quasistatic"),
    "model.rate_file": ("str", ""),
    "model.c": ("cfit", "fit"),
    "output.dir": ("str", "out"),
    "run.jobs": ("int", 1),
    "run.both_triangles": ("bool", False),
    "run.norm_loss_max": ("float", 0.2),
    "run.mask": ("bool", True),
}


@dataclass
class RunConfig:
    """Validated flat view of a run configuration.

    values maps dotted keys to typed values; defaulted lists the keys
    that were not present in the source and took schema defaults.
    """

    values: dict
    defaulted: tuple = ()
    source: str = ""

    def __getitem__(self, key):
        return self.values[key]

    def pulse(self) -> PulseParams:
        return PulseParams(self["pulse.e0"], self["pulse.omega"],
                           self["pulse.cycles"])

    def radial_grid(self) -> RadialGrid:
        return RadialGrid.from_rmax(self["grid.dr"], self["grid.rmax"],
                                    self["grid.absorber"])

    def time_grid(self) -> TimeGrid:
        t_total = self["time.t_total"]
        if t_total == 0.0:
            t_total = self.pulse().duration
        return TimeGrid(self["time.n_t"], t_total)

    def potential(self) -> PotentialSpec:
        kind = self["potential.kind"]
        if kind == "coulomb":
            return PotentialSpec.coulomb(self["potential.charge"])
        if kind == "harmonic":
            return PotentialSpec.harmonic(self["potential.freq"])
        if kind == "free":
            return PotentialSpec.free()
        raise ConfigError(f"unknown potential.kind {kind!r}")

    def rate_provider(self) -> RateProvider:
        variant = self["model.rate"]
        if variant == "table":
            path = self["model.rate_file"]
            if not path:
                raise ConfigError("model.rate = table requires model.rate_file")
            return RateProvider.from_table(path)
        return RateProvider(variant)


def _convert(key: str, raw, line: int | None):
    """Coerce a parsed raw value to the schema type of key."""
    where = f" (line {line})" if line is not None else ""
    tag = _SCHEMA[key][0]
    if tag == "cfit":
        if raw == "fit":
            return "fit"
        tag = "float"
    if tag == "str":
        if not isinstance(raw, str):
            raise ConfigError(f"{key}: expected a string, got {raw!r}{where}")
        return raw
    if tag == "bool":
        if isinstance(raw, bool):
            return raw
        raise ConfigError(f"{key}: expected true/false, got {raw!r}{where}")
    if tag == "int":
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise ConfigError(f"{key}: expected an integer, got {raw!r}{where}")
        return raw
    # float
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {raw!r}{where}")
    return float(raw)


def _parse_scalar(text: str, line: int):
    """One value: int, float, true/false, quoted string or bare word."""
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "'\"":
        return text[1:-1]
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    if text and all(c.isalnum() or c in "_-./" for c in text):
        return text
    raise ConfigError(f"cannot parse value {text!r} (line {line})")


def parse_config_text(text: str, source: str = "<string>",
                      partial: bool = False) -> RunConfig:
    """Parse config text; partial=True defers required-key enforcement
    (used when command-line overrides may still supply them)."""
    values = {}
    seen = {}
    section = None
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if not section:
                raise ConfigError(f"empty section header (line {lineno})")
            continue
        if "=" not in line:
            raise ConfigError(f"expected key = value, got {line!r} (line {lineno})")
        key, _, val = line.partition("=")
        key = key.strip()
        if section is None:
            raise ConfigError(f"key {key!r} outside any section (line {lineno})")
        dotted = f"{section}.{key}"
        if dotted not in _SCHEMA:
            raise ConfigError(f"unknown key {dotted!r} (line {lineno})")
        if dotted in seen:
            raise ConfigError(
                f"duplicate key {dotted!r} (line {lineno}, first at line {seen[dotted]})"
            )
        seen[dotted] = lineno
        values[dotted] = _convert(dotted, _parse_scalar(val.strip(), lineno), lineno)
    defaulted = []
    for key, (_, default) in _SCHEMA.items():
        if key in values:
            continue
        if default is _REQUIRED:
            if partial:
                continue
            raise ConfigError(f"missing required key {key!r}")
        values[key] = default
        defaulted.append(key)
    return RunConfig(values, tuple(sorted(defaulted)), source)


def validate_required(cfg: RunConfig) -> RunConfig:
    """Check that every required key is present (after overrides)."""
    for key, (_, default) in _SCHEMA.items():
        if default is _REQUIRED and key not in cfg.values:
            raise ConfigError(f"missing required key {key!r}")
    return cfg


def parse_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, source=str(path))


def apply_overrides(cfg: RunConfig, overrides: dict) -> RunConfig:
    """New config with dotted-key overrides; values may be raw strings."""
    values = dict(cfg.values)
    defaulted = set(cfg.defaulted)
    for key, raw in overrides.items():
        if key not in _SCHEMA:
            raise ConfigError(f"unknown key {key!r}")
        if isinstance(raw, str):
            raw = _parse_scalar(raw, 0)
        values[key] = _convert(key, raw, None)
        defaulted.discard(key)
    return RunConfig(values, tuple(sorted(defaulted)), cfg.source)


def emit_config(cfg: RunConfig) -> str:
    """Render a config back to parseable (and TOML-valid) text."""
    sections = {}
    for dotted, value in cfg.values.items():
        sec, _, key = dotted.partition(".")
        sections.setdefault(sec, []).append((key, value))
    out = []
    for sec in sorted(sections):
        out.append(f"[{sec}]")
        for key, value in sorted(sections[sec]):
            if isinstance(value, bool):
                rendered = "true" if value else "false"
            elif isinstance(value, str):
                rendered = f'"{value}"'
            elif isinstance(value, float):
                rendered = repr(value)
            else:
                rendered = str(value)
            out.append(f"{key} = {rendered}")
        out.append("")
    return "\n".join(out)
