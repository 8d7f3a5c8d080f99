"""Application configuration: one INI file covering every tunable.

Sections map onto the parameter dataclasses of the other modules, so a
config file is just a way to construct them without code. Every value has
a default; a missing file or section falls back cleanly, but unknown
sections or keys are rejected loudly since a typo that silently reverts
to defaults is the worst failure mode a tuning file can have.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from pathlib import Path

from .assessment import Thresholds
from .deformation import KernelParams
from .errors import SchemaError
from .forcemap import ConeScale
from .materials import MaterialRange


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8765
    publish_hz: float = 60.0
    preset: str = "healthy"

    def __post_init__(self):
        if not 1.0 <= self.publish_hz <= 120.0:
            raise SchemaError("publish_hz must be in [1, 120]")
        if not 0 < self.port < 65536:
            raise SchemaError("port out of range")


@dataclass(frozen=True)
class AppConfig:
    material: MaterialRange
    kernel: KernelParams
    assessment: Thresholds
    forcemap: ConeScale
    service: ServiceConfig


_SCHEMA = {
    "material": {"k_min": float, "k_max": float, "b_min": float, "b_max": float},
    "kernel": {"a": float, "w": float, "cutoff_eps": float},
    "assessment": {"f_on": float, "f_off": float, "min_samples": int,
                   "force_cv_max": float, "speed_cv_max": float,
                   "band_low": float, "band_high": float,
                   "band_fraction_min": float},
    "forcemap": {"height_per_newton": float, "radius_per_newton": float},
    "service": {"host": str, "port": int, "publish_hz": float, "preset": str},
}

_TARGETS = {
    "material": MaterialRange,
    "kernel": KernelParams,
    "assessment": Thresholds,
    "forcemap": ConeScale,
    "service": ServiceConfig,
}


def default_config() -> AppConfig:
    return AppConfig(material=MaterialRange(), kernel=KernelParams(),
                     assessment=Thresholds(), forcemap=ConeScale(),
                     service=ServiceConfig())


def load_config(path=None) -> AppConfig:
    """Read an INI config; None or a missing optional path means defaults."""
    if path is None:
        return default_config()
    path = Path(path)
    parser = configparser.ConfigParser()
    try:
        with path.open("r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise SchemaError(f"{path}: {exc}") from exc

    unknown = set(parser.sections()) - set(_SCHEMA)
    if unknown:
        raise SchemaError(f"{path}: unknown config sections {sorted(unknown)}")

    built = {}
    for section, fields in _SCHEMA.items():
        kwargs = {}
        if parser.has_section(section):
            extras = set(parser[section]) - set(fields)
            if extras:
                raise SchemaError(
                    f"{path}: [{section}] has unknown keys {sorted(extras)}")
            for key, cast in fields.items():
                if key not in parser[section]:
                    continue
                raw = parser[section][key]
                try:
                    kwargs[key] = cast(raw)
                except ValueError as exc:
                    raise SchemaError(
                        f"{path}: [{section}] {key} = {raw!r}: {exc}") from exc
        try:
            built[section] = _TARGETS[section](**kwargs)
        except Exception as exc:
            raise SchemaError(f"{path}: [{section}]: {exc}") from exc
    return AppConfig(material=built["material"], kernel=built["kernel"],
                     assessment=built["assessment"], forcemap=built["forcemap"],
                     service=built["service"])
