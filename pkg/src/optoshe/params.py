"""System parameters for the bilayer-graphene optomechanical cavity.

All rates are angular frequencies in rad/s. Lengths are in meters, powers in
watts, mass in kg. Config files may give any rate in Hz through a ``<name>_hz``
key; those values are multiplied by 2*pi on load.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Mapping

from .errors import ConfigError

HBAR = 1.054571817e-34  # J s
C_LIGHT = 299792458.0  # m / s
TWO_PI = 2.0 * math.pi

_WB = TWO_PI * 10e6

RATE_FIELDS = (
    "omega_b",
    "gamma_m",
    "kappa",
    "gamma_1",
    "gamma_2",
    "delta_c",
    "delta_n",
    "delta_ex",
    "g_mc",
    "g_cp",
    "lambda_k",
)
COUPLING_FIELDS = ("g_mc", "g_cp", "lambda_k")
POSITIVE_FIELDS = (
    "omega_b",
    "gamma_m",
    "kappa",
    "gamma_1",
    "gamma_2",
    "delta_c",
    "delta_n",
    "delta_ex",
    "mass",
    "cavity_length",
    "power_probe",
    "wavelength",
    "d1",
    "d2",
    "d3",
    "waist",
)
PERMITTIVITY_FIELDS = ("eps_ambient", "eps_wall1", "eps_wall3")

CHOICES = {
    "delta2_correction": ("on", "off"),
    "output_field_convention": ("kappa", "sqrt2kappa", "2kappa"),
    "k1_mode": ("wall", "vacuum"),
    "derivative_angle_unit": ("deg", "rad"),
}


@dataclass(frozen=True)
class SystemParams:
    omega_b: float = _WB
    gamma_m: float = TWO_PI * 140.0
    kappa: float = _WB / 30.0
    gamma_1: float = TWO_PI * 2e3
    gamma_2: float = TWO_PI * 2e3
    delta_c: float = _WB
    delta_n: float = _WB / 2.0
    delta_ex: float = _WB
    g_mc: float = TWO_PI * 29e3
    g_cp: float = 0.0
    lambda_k: float = 0.0
    mass: float = 78e-12
    cavity_length: float = 1e-6
    power_pump: float = 200e-9
    power_probe: float = 1e-9
    wavelength: float = 1064e-9
    eps_ambient: float = 1.0
    eps_wall1: float = 2.22
    eps_wall3: float = 2.22
    d1: float = 0.1e-6
    d2: float = 1e-6
    d3: float = 0.1e-6
    # None -> 60 wavelengths
    waist: float | None = None
    delta2_correction: str = "on"
    output_field_convention: str = "kappa"
    k1_mode: str = "wall"
    derivative_angle_unit: str = "deg"

    def __post_init__(self):
        if self.waist is None:
            object.__setattr__(self, "waist", 60.0 * self.wavelength)

    def with_couplings(self, gcp=None, lk=None) -> "SystemParams":
        """Return a copy with g_cp / lambda_k given in units of g_mc."""
        upd = {}
        if gcp is not None:
            upd["g_cp"] = gcp * self.g_mc
        if lk is not None:
            upd["lambda_k"] = lk * self.g_mc
        return replace(self, **upd)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


def validate(raw: SystemParams) -> SystemParams:
    """Check every invariant and return ``raw`` unchanged.

    Raises ConfigError naming the first offending field, in declaration order.
    """
    for f in fields(raw):
        name = f.name
        value = getattr(raw, name)
        if name in CHOICES:
            if value not in CHOICES[name]:
                raise ConfigError(name, f"{name}: expected one of {CHOICES[name]}, got {value!r}")
            continue
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(name, f"{name}: expected a real number, got {value!r}")
        if not math.isfinite(value):
            raise ConfigError(name, f"{name}: must be finite")
        if name in POSITIVE_FIELDS and not value > 0:
            raise ConfigError(name, f"{name}: must be strictly positive")
        if name in COUPLING_FIELDS and value < 0:
            raise ConfigError(name, f"{name}: must be non-negative")
        if name == "power_pump" and value < 0:
            raise ConfigError(name, f"{name}: must be non-negative")
        if name in PERMITTIVITY_FIELDS and value < 1:
            raise ConfigError(name, f"{name}: permittivity must be >= 1")
    return raw


def optical_frequency(p: SystemParams) -> float:
    """Angular frequency 2*pi*c/lambda, used for both pump and probe."""
    return TWO_PI * C_LIGHT / p.wavelength


def drive_amplitudes(p: SystemParams) -> tuple[float, float]:
    """Pump and probe drive rates E_l, E_p in 1/s."""
    hw = HBAR * optical_frequency(p)
    e_l = math.sqrt(2.0 * p.kappa * p.power_pump / hw)
    e_p = math.sqrt(2.0 * p.kappa * p.power_probe / hw)
    return e_l, e_p


def gmc_from_geometry(p: SystemParams) -> float:
    # g_mc = (omega_c / L) * sqrt(hbar / (2 m omega_b))
    return optical_frequency(p) / p.cavity_length * math.sqrt(HBAR / (2.0 * p.mass * p.omega_b))


# -- config loading ---------------------------------------------------------

_FIELD_NAMES = tuple(f.name for f in fields(SystemParams))


def params_from_mapping(data: Mapping[str, Any], base: SystemParams | None = None) -> SystemParams:
    """Build validated params from a flat mapping of config keys.

    Rate fields may be given as ``name`` (rad/s) or ``name_hz`` (Hz), never both.
    """
    values: dict[str, Any] = {}
    for key, value in data.items():
        if key in _FIELD_NAMES:
            name = key
        elif key.endswith("_hz") and key[:-3] in RATE_FIELDS:
            name = key[:-3]
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(name, f"{key}: expected a number, got {value!r}")
            value = TWO_PI * float(value)
        else:
            raise ConfigError(key, f"unknown config key {key!r}")
        if name in values:
            raise ConfigError(name, f"{name} given more than once (plain and _hz forms)")
        if isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        values[name] = value
    base = base or SystemParams()
    if "wavelength" in values and "waist" not in values and base.waist == 60.0 * base.wavelength:
        values["waist"] = None
    try:
        params = replace(base, **values)
    except TypeError as exc:  # pragma: no cover - guarded by key check above
        raise ConfigError("config", str(exc)) from exc
    return validate(params)


def load_config(path: str | Path) -> SystemParams:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError("config", f"{path}: top level must be a JSON object")
    return params_from_mapping(data)
