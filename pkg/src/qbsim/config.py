"""Scenario configuration: schema, unit parsing and validation.

A config is a JSON object::

    {
      "scenario": "charge",
      "parameters": {"omega_a": "5 GHz ordinary", "lambda_ab": "0.1 MHz angular", ...},
      "numerics": {"dim": "auto", ...},
      "output": {"path": "charge.csv", "format": "csv"}
    }

Frequencies are strings ``"<value> <unit> <convention>"`` where the unit is
Hz/kHz/MHz/GHz and the convention is ``ordinary`` (value is f, stored as
2 pi f) or ``angular`` (value is already an angular rate). ``rad/s`` needs no
convention. Everything is stored internally in SI, frequencies in rad/s.
"""

from __future__ import annotations

import copy
import json
import math
import re
from dataclasses import dataclass, field
from typing import Any

from .errors import ConfigError

SCENARIOS = ("charge", "age", "ergotropy", "ratio-sweep", "readout", "squid-levels", "flux-sweep", "reproduce")
FIGURES = ("fig2a", "fig2b", "fig3", "fig5a", "fig5b")
FORMATS = ("csv", "json")
TOP_LEVEL_KEYS = {"scenario", "figure", "parameters", "numerics", "output"}

_FREQ_UNITS = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}
_TIME_UNITS = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9}
_CURRENT_UNITS = {"a": 1.0, "ma": 1e-3, "ua": 1e-6, "na": 1e-9}
_CAP_UNITS = {"f": 1.0, "nf": 1e-9, "pf": 1e-12, "ff": 1e-15}
_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_QUANTITY = re.compile(rf"^\s*({_NUMBER})\s*(\S+)?\s*(\S+)?\s*$")


def parse_frequency(key: str, value: Any) -> float:
    if not isinstance(value, str):
        raise ConfigError(
            f"{key}: frequency needs a unit suffix and convention, e.g. \"5 GHz ordinary\" or \"1e5 rad/s\""
        )
    m = _QUANTITY.match(value)
    if not m or m.group(2) is None:
        raise ConfigError(f"{key}: missing unit suffix in {value!r}")
    number, unit, convention = float(m.group(1)), m.group(2), m.group(3)
    if unit.lower() == "rad/s":
        if convention is not None:
            raise ConfigError(f"{key}: rad/s is already angular; drop {convention!r}")
        return number
    scale = _FREQ_UNITS.get(unit.lower())
    if scale is None:
        raise ConfigError(f"{key}: unknown frequency unit {unit!r}")
    if convention is None:
        raise ConfigError(
            f"{key}: {value!r} lacks the angular/ordinary flag; write \"{value} ordinary\" "
            f"for 2*pi*f or \"{value} angular\" for a rate already in rad/s"
        )
    if convention == "ordinary":
        return 2.0 * math.pi * number * scale
    if convention == "angular":
        return number * scale
    raise ConfigError(f"{key}: convention must be 'angular' or 'ordinary', got {convention!r}")


def _parse_scaled(key: str, value: Any, units: dict[str, float], what: str) -> float:
    if not isinstance(value, str):
        raise ConfigError(f"{key}: {what} needs a unit suffix ({', '.join(units)})")
    m = _QUANTITY.match(value)
    if not m or m.group(2) is None:
        raise ConfigError(f"{key}: missing unit suffix in {value!r}")
    if m.group(3) is not None:
        raise ConfigError(f"{key}: unexpected trailing token {m.group(3)!r}")
    scale = units.get(m.group(2).lower())
    if scale is None:
        raise ConfigError(f"{key}: unknown {what} unit {m.group(2)!r}")
    return float(m.group(1)) * scale


def parse_flux(key: str, value: Any) -> float:
    """Flux in units of Phi0."""
    if not isinstance(value, str):
        raise ConfigError(f"{key}: flux needs the Phi0 suffix, e.g. \"1.977 Phi0\"")
    m = _QUANTITY.match(value)
    if not m or m.group(2) != "Phi0" or m.group(3) is not None:
        raise ConfigError(f"{key}: expected \"<value> Phi0\", got {value!r}")
    return float(m.group(1))


def parse_angle(key: str, value: Any) -> float:
    if not isinstance(value, str):
        raise ConfigError(f"{key}: angle needs a unit suffix (rad or deg)")
    m = _QUANTITY.match(value)
    if not m or m.group(2) not in ("rad", "deg") or m.group(3) is not None:
        raise ConfigError(f"{key}: expected \"<value> rad\" or \"<value> deg\", got {value!r}")
    x = float(m.group(1))
    return math.radians(x) if m.group(2) == "deg" else x


def parse_dimensionless(key: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        if isinstance(value, str) and value.strip() in ("inf", "infinity"):
            return math.inf
        raise ConfigError(f"{key}: expected a plain number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{key}: must be finite")
    return float(value)


def parse_number_list(key: str, value: Any) -> list[float]:
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{key}: expected a non-empty list of numbers")
    return [parse_dimensionless(f"{key}[{i}]", v) for i, v in enumerate(value)]


PARSERS = {
    "frequency": parse_frequency,
    "time": lambda k, v: _parse_scaled(k, v, _TIME_UNITS, "time"),
    "current": lambda k, v: _parse_scaled(k, v, _CURRENT_UNITS, "current"),
    "capacitance": lambda k, v: _parse_scaled(k, v, _CAP_UNITS, "capacitance"),
    "flux": parse_flux,
    "angle": parse_angle,
    "dimensionless": parse_dimensionless,
    "list": parse_number_list,
}

# resolved-parameter suffix recorded in manifests
UNIT_SUFFIX = {
    "frequency": "rad_s",
    "time": "s",
    "current": "A",
    "capacitance": "F",
    "flux": "Phi0",
    "angle": "rad",
    "dimensionless": "",
    "list": "",
}

_CHARGE_PARAMS = {
    "omega_a": ("frequency", "5 GHz ordinary"),
    "lambda_ab": ("frequency", "0.1 MHz angular"),
    "beta_mag": ("dimensionless", 0.4),
    "theta_b": ("angle", "0 rad"),
    "gamma": ("frequency", "0.01 MHz angular"),
    "gamma_t_end": ("dimensionless", 15),
}

_SQUID_PARAMS = {
    "I_c": ("current", "0.9794 uA"),
    "C_total": ("capacitance", "3.663 pF"),
    "phi_a_tilde": ("flux", "0.01 Phi0"),
    "phi_b_tilde": ("flux", "0.01 Phi0"),
}

# key -> (kind, default); numerics: key -> default
SCHEMA: dict[str, dict[str, dict[str, Any]]] = {
    "charge": {
        "parameters": dict(_CHARGE_PARAMS),
        "numerics": {"dim": "auto", "dt": "auto", "snapshot_stride": 100, "rows": 301},
    },
    "age": {
        "parameters": {
            "omega_a": ("frequency", "5 GHz ordinary"),
            "gamma": ("frequency", "0.01 MHz angular"),
            "n_max": ("dimensionless", 64),
            "gamma_tau_end": ("dimensionless", 15),
        },
        "numerics": {"dim": "auto", "dt": "auto", "snapshot_stride": 100, "rows": 301},
    },
    "ergotropy": {
        "parameters": dict(_CHARGE_PARAMS),
        "numerics": {"dim": "auto", "samples": 301},
    },
    "ratio-sweep": {
        "parameters": {
            "omega_a": ("frequency", "5 GHz ordinary"),
            "lambda_ab": ("frequency", "0.1 MHz angular"),
            "gamma": ("frequency", "0.01 MHz angular"),
            "beta_min": ("dimensionless", 0.05),
            "beta_max": ("dimensionless", 1.5),
        },
        "numerics": {"samples": 59},
    },
    "readout": {
        "parameters": {
            "omega_a": ("frequency", "5 GHz ordinary"),
            "omega_q": ("frequency", "4.5 GHz ordinary"),
            # inferred drive centre: places the switch-off point at omega_q = 2 pi x 4.5 GHz
            "omega_b": ("frequency", "4 GHz ordinary"),
            "g_a": ("frequency", "10 MHz angular"),
            "g_b": ("frequency", "0 MHz angular"),
            # Gamma = g_l^2/v_g is a free parameter (v_g unknown); kept narrow against the dip spacing
            "line_rate": ("frequency", "0.02 MHz angular"),
            "gamma": ("frequency", "0.01 MHz angular"),
            "n_max": ("dimensionless", 64),
            "gamma_tau": ("list", [0, 1, 2, "inf"]),
        },
        "numerics": {"spacing_fraction": 0.2, "margin_linewidths": 25, "validity_threshold": 0.1},
    },
    "squid-levels": {
        "parameters": {**_SQUID_PARAMS, "phi_d": ("flux", "1.977 Phi0")},
        "numerics": {"n_states": 4, "grid_size": 32768, "boundary": "periodic", "include_tilde_in_bias": False},
    },
    "flux-sweep": {
        "parameters": {**_SQUID_PARAMS, "phi_min": ("flux", "1.95 Phi0"), "phi_max": ("flux", "2.0 Phi0")},
        "numerics": {"samples": 51, "grid_size": 32768, "include_tilde_in_bias": False},
    },
}

# physical rates and circuit constants that must be strictly positive
_POSITIVE = {"omega_a", "omega_q", "omega_b", "gamma", "line_rate", "I_c", "C_total", "beta_min", "beta_max"}
_NON_NEGATIVE = {"beta_mag", "n_max", "gamma_t_end", "gamma_tau_end"}

FIGURE_SCENARIO = {
    "fig2a": "ergotropy",
    "fig2b": "ratio-sweep",
    "fig3": "readout",
    "fig5a": "squid-levels",
    "fig5b": "flux-sweep",
}


@dataclass
class ScenarioConfig:
    scenario: str
    parameters: dict[str, float | list[float]]
    numerics: dict[str, Any]
    output_path: str
    output_format: str
    raw: dict[str, Any]
    figure: str | None = None
    warnings: list[str] = field(default_factory=list)

    @property
    def kernel(self) -> str:
        """Scenario whose physics actually runs (reproduce maps a figure onto one)."""
        return FIGURE_SCENARIO[self.figure] if self.scenario == "reproduce" else self.scenario

    def resolved(self) -> dict[str, Any]:
        schema = SCHEMA[self.kernel]["parameters"]
        out = {}
        for key, value in self.parameters.items():
            suffix = UNIT_SUFFIX[schema[key][0]]
            name = f"{key}_{suffix}" if suffix else key
            out[name] = [_json_number(v) for v in value] if isinstance(value, list) else _json_number(value)
        return out


def _json_number(x: float):
    return "inf" if x == math.inf else x


def default_config(scenario: str, figure: str | None = None) -> dict[str, Any]:
    if scenario == "reproduce":
        if figure not in FIGURES:
            raise ConfigError(f"figure must be one of {', '.join(FIGURES)}")
        base = default_config(FIGURE_SCENARIO[figure])
        base["scenario"] = "reproduce"
        base["figure"] = figure
        base["output"]["path"] = f"{figure}.csv"
        return base
    if scenario not in SCHEMA:
        raise ConfigError(f"unknown scenario {scenario!r}; choose from {', '.join(SCENARIOS)}")
    spec = SCHEMA[scenario]
    return {
        "scenario": scenario,
        "parameters": {k: copy.deepcopy(v[1]) for k, v in spec["parameters"].items()},
        "numerics": copy.deepcopy(spec["numerics"]),
        "output": {"path": f"{scenario}.csv", "format": "csv"},
    }


def _check_keys(where: str, given: dict, allowed) -> list[str]:
    return [f"unknown key {where}.{k}" if where else f"unknown key {k}" for k in given if k not in allowed]


def _numeric_ok(key: str, value: Any, default: Any) -> str | None:
    if isinstance(default, bool):
        return None if isinstance(value, bool) else f"numerics.{key}: expected true/false"
    if key == "boundary":
        return None if value in ("periodic", "dirichlet") else "numerics.boundary: periodic or dirichlet"
    if default == "auto" and value == "auto":
        return None
    if key == "dt":
        if isinstance(value, str):
            try:
                if PARSERS["time"](key, value) > 0:
                    return None
            except ConfigError as exc:
                return str(exc)
        return "numerics.dt: 'auto' or a positive time such as \"1e-7 s\""
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
        return f"numerics.{key}: expected a positive number{' or auto' if default == 'auto' else ''}"
    if isinstance(default, int) and default != "auto" and int(value) != value:
        return f"numerics.{key}: expected an integer"
    return None


def parse_config(raw: dict[str, Any]) -> ScenarioConfig:
    """Validate a raw config dict. Raises ConfigError listing every problem found."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    errors = _check_keys("", raw, TOP_LEVEL_KEYS)
    scenario = raw.get("scenario")
    if scenario not in SCENARIOS:
        raise ConfigError("; ".join(errors + [f"scenario must be one of {', '.join(SCENARIOS)}"]))
    figure = raw.get("figure")
    if scenario == "reproduce":
        if figure not in FIGURES:
            raise ConfigError("; ".join(errors + [f"reproduce needs figure in {', '.join(FIGURES)}"]))
        kernel = FIGURE_SCENARIO[figure]
    else:
        if figure is not None:
            errors.append("figure is only valid with scenario 'reproduce'")
        kernel = scenario
    spec = SCHEMA[kernel]

    params_raw = raw.get("parameters", {})
    numerics_raw = raw.get("numerics", {})
    output_raw = raw.get("output", {})
    for name, block in (("parameters", params_raw), ("numerics", numerics_raw), ("output", output_raw)):
        if not isinstance(block, dict):
            raise ConfigError(f"{name} must be an object")
    errors += _check_keys("parameters", params_raw, spec["parameters"])
    errors += _check_keys("numerics", numerics_raw, spec["numerics"])
    errors += _check_keys("output", output_raw, {"path", "format"})

    parameters: dict[str, Any] = {}
    for key, (kind, default) in spec["parameters"].items():
        value = params_raw.get(key, default)
        try:
            parameters[key] = PARSERS[kind](f"parameters.{key}", value)
        except ConfigError as exc:
            errors.append(str(exc))
            continue
        if key in _POSITIVE and not parameters[key] > 0:
            errors.append(f"parameters.{key} must be positive")
        elif key in _NON_NEGATIVE and not parameters[key] >= 0:
            errors.append(f"parameters.{key} must be non-negative")

    numerics = dict(spec["numerics"])
    for key, value in numerics_raw.items():
        if key in numerics:
            problem = _numeric_ok(key, value, numerics[key])
            if problem:
                errors.append(problem)
            else:
                numerics[key] = value

    fmt = output_raw.get("format", "csv")
    if fmt not in FORMATS:
        errors.append(f"output.format must be one of {', '.join(FORMATS)}")
    path = output_raw.get("path", f"{figure or scenario}.{fmt}")
    if not isinstance(path, str) or not path:
        errors.append("output.path must be a non-empty string")

    if errors:
        raise ConfigError("; ".join(errors))
    return ScenarioConfig(scenario, parameters, numerics, path, fmt, copy.deepcopy(raw), figure)


def apply_overrides(raw: dict[str, Any], overrides: list[str]) -> dict[str, Any]:
    """Apply ``section.key=value`` overrides; values are parsed as JSON when possible."""
    out = copy.deepcopy(raw)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        path, text = item.split("=", 1)
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text
        parts = path.strip().split(".")
        node = out
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"--set {path}: {part} is not a section")
        node[parts[-1]] = value
    return out


def load_config_file(path: str) -> dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    # a run manifest embeds the config it was produced from
    if isinstance(data, dict) and "manifest_version" in data:
        return data["config"]
    return data


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))
