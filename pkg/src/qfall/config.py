"""INI-style experiment configuration: parsing, validation, defaults.

The config file is flat sectioned key-value text, chosen for
diff-friendliness: configs are the experiment record, and sweeps are
usually prepared by hand-editing copies. The parser tracks line numbers
so every complaint can name the offending key and line, and strict mode
rejects unknown keys with a nearest-name suggestion.
"""

from __future__ import annotations

import difflib
import re

from .core import MassPair, UnitSystem
from .errors import ConfigurationError, ParseError
from .experiments import (
    STATE_FAMILIES,
    ExperimentConfig,
    GridSettings,
    Particle,
    SolverSettings,
    SweepSettings,
)
from .states import WavepacketSpec

__all__ = ["parse_config", "parse_config_text", "DEFAULT_CONFIG_TEXT"]

# Default experiment: an even cat against a width-matched Gaussian released
# from the same height at rest; matched trivially, with distinguishable
# arrival spreads. Works for every subcommand.
DEFAULT_CONFIG_TEXT = """\
[units]
hbar = 1.0
g = 1.0
m_ref = 1.0
delta0_ref = 1.0

[particle1]
kind = male
z0 = 2.0
delta = 1.0
delta0 = 1.0
m_inertial = 1.0
m_gravitational = 1.0

[particle2]
kind = gaussian
z0 = 2.0
delta0 = 1.0
m_inertial = 1.0
m_gravitational = 1.0

[grid]
auto = true

[solver]
time_steps = 4096
record_stride = 1
snapshot_stride = 0
window_sigmas = 8.0

[experiment]
z_detector = 0.0
field_strength = 1.0
accel_factor = 2.0
auto_match = false
match_tol = 1e-6

[sweep]
m_g_values = 1, 2, 4, 8, 16
ratio_values = 1, 1.78, 3.16, 5.62, 10
state_kinds = gaussian, male, female, yurke_stoler

[output]
dir = out
seed = 0
threads = 1
"""

_SECTION_RE = re.compile(r"^\[([A-Za-z0-9_]+)\]$")
_PARTICLE_RE = re.compile(r"^particle(\d+)$")

_KNOWN_KEYS = {
    "units": {"hbar", "g", "m_ref", "delta0_ref"},
    "particle": {"kind", "z0", "delta", "delta0", "c_plus_re", "c_plus_im",
                 "c_minus_re", "c_minus_im", "m_inertial", "m_gravitational"},
    "grid": {"auto", "z_min", "z_max", "n_points", "max_points"},
    "solver": {"time_steps", "record_stride", "snapshot_stride",
               "window_sigmas"},
    "experiment": {"z_detector", "field_strength", "accel_factor",
                   "auto_match", "match_tol"},
    "sweep": {"m_g_values", "ratio_values", "state_kinds"},
    "output": {"dir", "seed", "threads"},
}

_KNOWN_KINDS = ("gaussian", "cat") + tuple(k for k in STATE_FAMILIES
                                           if k != "gaussian")


class _Raw:
    """Parsed key-value store remembering source lines."""

    def __init__(self):
        self.sections: dict[str, dict[str, tuple[str, int]]] = {}

    def get(self, section, key, default=None):
        entry = self.sections.get(section, {}).get(key)
        return default if entry is None else entry[0]

    def line(self, section, key):
        entry = self.sections.get(section, {}).get(key)
        return None if entry is None else entry[1]


def _scan(text: str, strict: bool) -> _Raw:
    raw = _Raw()
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].split(";", 1)[0].strip()
        if not stripped:
            continue
        header = _SECTION_RE.match(stripped)
        if header:
            section = header.group(1)
            family = "particle" if _PARTICLE_RE.match(section) else section
            if family not in _KNOWN_KEYS and strict:
                hint = difflib.get_close_matches(section, _KNOWN_KEYS, n=1)
                extra = f"; did you mean '[{hint[0]}]'?" if hint else ""
                raise ParseError(f"unknown section '{section}'{extra}",
                                 line=lineno)
            raw.sections.setdefault(section, {})
            continue
        if "=" not in stripped:
            raise ParseError(f"expected 'key = value', got {stripped!r}",
                             line=lineno)
        if section is None:
            raise ParseError("key before any [section] header", line=lineno)
        key, value = (part.strip() for part in stripped.split("=", 1))
        family = "particle" if _PARTICLE_RE.match(section) else section
        known = _KNOWN_KEYS.get(family)
        if known is not None and key not in known:
            if strict:
                hint = difflib.get_close_matches(key, known, n=1)
                extra = f"; did you mean '{hint[0]}'?" if hint else ""
                raise ParseError(f"unknown key '{key}'{extra}",
                                 key=key, line=lineno)
            continue  # tolerated outside strict mode
        raw.sections[section][key] = (value, lineno)
    return raw


def _float(raw: _Raw, section, key, default):
    value = raw.get(section, key)
    if value is None:
        return default
    try:
        return float(value)
    except ValueError:
        raise ParseError(f"expected a number, got {value!r}",
                         key=key, line=raw.line(section, key)) from None


def _int(raw: _Raw, section, key, default):
    value = raw.get(section, key)
    if value is None:
        return default
    try:
        return int(value)
    except ValueError:
        raise ParseError(f"expected an integer, got {value!r}",
                         key=key, line=raw.line(section, key)) from None


def _bool(raw: _Raw, section, key, default):
    value = raw.get(section, key)
    if value is None:
        return default
    lowered = value.lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ParseError(f"expected a boolean, got {value!r}",
                     key=key, line=raw.line(section, key))


def _float_list(raw: _Raw, section, key, default):
    value = raw.get(section, key)
    if value is None:
        return default
    try:
        return tuple(float(v) for v in value.split(","))
    except ValueError:
        raise ParseError(f"expected comma-separated numbers, got {value!r}",
                         key=key, line=raw.line(section, key)) from None


def _word_list(raw: _Raw, section, key, default):
    value = raw.get(section, key)
    if value is None:
        return default
    return tuple(word.strip() for word in value.split(",") if word.strip())


def _particle(raw: _Raw, section: str) -> Particle:
    kind = raw.get(section, "kind", "gaussian").lower()
    if kind not in _KNOWN_KINDS:
        hint = difflib.get_close_matches(kind, _KNOWN_KINDS, n=1)
        extra = f"; did you mean '{hint[0]}'?" if hint else ""
        raise ParseError(f"unknown state kind '{kind}'{extra}",
                         key="kind", line=raw.line(section, "kind"))
    z0 = _float(raw, section, "z0", 2.0)
    delta = _float(raw, section, "delta", 0.0 if kind == "gaussian" else 1.0)
    delta0 = _float(raw, section, "delta0", 1.0)
    if delta0 <= 0:
        raise ParseError("delta0 must be positive",
                         key="delta0", line=raw.line(section, "delta0"))
    try:
        if kind == "cat":
            c_plus = complex(_float(raw, section, "c_plus_re", 1.0),
                             _float(raw, section, "c_plus_im", 0.0))
            c_minus = complex(_float(raw, section, "c_minus_re", 1.0),
                              _float(raw, section, "c_minus_im", 0.0))
            spec = WavepacketSpec.cat(z0, delta, delta0, c_plus, c_minus)
        elif kind == "gaussian":
            spec = WavepacketSpec.gaussian(z0, delta0)
        else:
            spec = STATE_FAMILIES[kind](z0, delta, delta0)
        mass = MassPair(_float(raw, section, "m_inertial", 1.0),
                        _float(raw, section, "m_gravitational", 1.0))
    except ConfigurationError as exc:
        raise ParseError(str(exc), key=section) from exc
    return Particle(spec, mass)


def parse_config_text(text: str, strict: bool = False) -> ExperimentConfig:
    """Parse config text into a validated :class:`ExperimentConfig`.

    Missing keys take their documented defaults; the effective values are
    echoed into the experiment manifest via the config's canonical record.
    """
    raw = _scan(text, strict)

    try:
        unit = UnitSystem(
            hbar=_float(raw, "units", "hbar", 1.0),
            g=_float(raw, "units", "g", 1.0),
            m_ref=_float(raw, "units", "m_ref", 1.0),
            delta0_ref=_float(raw, "units", "delta0_ref", 1.0),
        )
    except ConfigurationError as exc:
        raise ParseError(str(exc), key="units") from exc

    labels = sorted((s for s in raw.sections if _PARTICLE_RE.match(s)),
                    key=lambda s: int(_PARTICLE_RE.match(s).group(1)))
    if labels:
        particles = tuple(_particle(raw, label) for label in labels)
    else:
        particles = (Particle(WavepacketSpec.gaussian(2.0, 1.0),
                              MassPair(1.0, 1.0)),)

    grid = GridSettings(
        auto=_bool(raw, "grid", "auto", True),
        z_min=_float(raw, "grid", "z_min", -80.0),
        z_max=_float(raw, "grid", "z_max", 20.0),
        n_points=_int(raw, "grid", "n_points", 8192),
        max_points=_int(raw, "grid", "max_points", 2**16),
    )
    try:
        solver = SolverSettings(
            time_steps=_int(raw, "solver", "time_steps", 4096),
            record_stride=_int(raw, "solver", "record_stride", 1),
            snapshot_stride=_int(raw, "solver", "snapshot_stride", 0),
            window_sigmas=_float(raw, "solver", "window_sigmas", 8.0),
        )
    except ConfigurationError as exc:
        raise ParseError(str(exc), key="solver") from exc
    sweep = SweepSettings(
        m_g_values=_float_list(raw, "sweep", "m_g_values",
                               (1.0, 2.0, 4.0, 8.0, 16.0)),
        ratio_values=_float_list(raw, "sweep", "ratio_values",
                                 (1.0, 1.78, 3.16, 5.62, 10.0)),
        state_kinds=_word_list(raw, "sweep", "state_kinds",
                               ("gaussian", "male", "female", "yurke_stoler")),
    )
    for kind in sweep.state_kinds:
        if kind not in STATE_FAMILIES:
            raise ParseError(f"unknown sweep state kind '{kind}'",
                             key="state_kinds",
                             line=raw.line("sweep", "state_kinds"))

    try:
        return ExperimentConfig(
            particles=particles,
            unit=unit,
            field_strength=_float(raw, "experiment", "field_strength", unit.g),
            accel_factor=_float(raw, "experiment", "accel_factor", 2.0),
            z_detector=_float(raw, "experiment", "z_detector", 0.0),
            grid=grid,
            solver=solver,
            sweep=sweep,
            auto_match=_bool(raw, "experiment", "auto_match", False),
            match_tol=_float(raw, "experiment", "match_tol", 1e-6),
            threads=_int(raw, "output", "threads", 1),
            seed=_int(raw, "output", "seed", 0),
            output_dir=raw.get("output", "dir", "out"),
        )
    except ConfigurationError as exc:
        raise ParseError(str(exc)) from exc


def parse_config(path, strict: bool = False) -> ExperimentConfig:
    """Read and parse a config file; see :func:`parse_config_text`."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text, strict)
