"""Organ presets: named material scenarios over the bundled meshes.

A preset names a mesh and a recipe for painting its material channels:
uniform tissue, a soft spot blended into healthy surroundings, or a field
of stiff nodules from seeded lattice noise. Each preset may also pin its
own stiffness/damping mapping range and deformation kernel. The table
lives in presets.cfg next to the meshes, so alternate asset roots can ship
their own scenarios. One mesh serves every preset; only the painted
channels differ.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

import numpy as np

from .assets import PRESETS_FILE, find_asset, load_asset_mesh
from .deformation import KernelParams
from .errors import SchemaError, UnknownPreset
from .materials import (MaterialRange, bake_nodular, bake_radial_spot,
                        bake_uniform)
from .mesh import TriMesh

KINDS = ("uniform", "spot", "nodular")

_RANGE_KEYS = ("k_min", "k_max", "b_min", "b_max")
_KERNEL_KEYS = ("a", "w", "cutoff_eps")
_KIND_KEYS = {
    "uniform": {"r", "g"},
    "spot": {"base_r", "base_g", "spot_center", "spot_radius", "spot_r", "spot_g"},
    "nodular": {"base_r", "base_g", "noise_amp", "noise_scale", "seed"},
}
_COMMON_KEYS = {"mesh", "kind", "description", *_RANGE_KEYS, *_KERNEL_KEYS}


@dataclass(frozen=True)
class Preset:
    name: str
    mesh_name: str
    kind: str
    material_range: MaterialRange
    kernel: KernelParams
    description: str = ""
    params: dict = field(default_factory=dict)


def _parse_preset(name: str, section) -> Preset:
    try:
        kind = section["kind"]
        if kind not in KINDS:
            raise SchemaError(f"preset {name!r}: unknown kind {kind!r}")
        allowed = _COMMON_KEYS | _KIND_KEYS[kind]
        extras = set(section) - allowed
        if extras:
            raise SchemaError(f"preset {name!r}: unexpected keys {sorted(extras)}")
        missing = _KIND_KEYS[kind] - set(section)
        if missing:
            raise SchemaError(f"preset {name!r}: missing keys {sorted(missing)}")
        range_defaults = MaterialRange()
        rng = MaterialRange(
            k_min=section.getfloat("k_min", range_defaults.k_min),
            k_max=section.getfloat("k_max", range_defaults.k_max),
            b_min=section.getfloat("b_min", range_defaults.b_min),
            b_max=section.getfloat("b_max", range_defaults.b_max),
        )
        kernel_defaults = KernelParams()
        kernel = KernelParams(
            a=section.getfloat("a", kernel_defaults.a),
            w=section.getfloat("w", kernel_defaults.w),
            cutoff_eps=section.getfloat("cutoff_eps", kernel_defaults.cutoff_eps),
        )
        if kind == "uniform":
            params = {"r": section.getfloat("r"), "g": section.getfloat("g")}
        elif kind == "spot":
            center = [float(x) for x in section["spot_center"].split()]
            if len(center) != 3:
                raise SchemaError(f"preset {name!r}: spot_center needs 3 numbers")
            params = {
                "base_r": section.getfloat("base_r"),
                "base_g": section.getfloat("base_g"),
                "spot_center": np.array(center),
                "spot_radius": section.getfloat("spot_radius"),
                "spot_r": section.getfloat("spot_r"),
                "spot_g": section.getfloat("spot_g"),
            }
        else:
            params = {
                "base_r": section.getfloat("base_r"),
                "base_g": section.getfloat("base_g"),
                "noise_amp": section.getfloat("noise_amp"),
                "noise_scale": section.getfloat("noise_scale"),
                "seed": section.getint("seed"),
            }
        return Preset(name=name, mesh_name=section["mesh"], kind=kind,
                      material_range=rng, kernel=kernel,
                      description=section.get("description", ""), params=params)
    except ValueError as exc:
        raise SchemaError(f"preset {name!r}: bad value: {exc}") from exc


def _read_table(root=None) -> configparser.ConfigParser:
    path = find_asset(PRESETS_FILE, root)
    parser = configparser.ConfigParser()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise SchemaError(f"{path}: {exc}") from exc
    return parser


def list_presets(root=None) -> list[str]:
    return sorted(_read_table(root).sections())


def load_preset(name: str, root=None) -> Preset:
    parser = _read_table(root)
    if not parser.has_section(name):
        known = ", ".join(sorted(parser.sections()))
        raise UnknownPreset(f"no preset named {name!r} (have: {known})")
    return _parse_preset(name, parser[name])


def instantiate(name_or_preset, root=None) -> tuple[TriMesh, MaterialRange, KernelParams]:
    """Bake a preset: load its mesh and paint the material channels.

    Accepts a preset name or an already-parsed Preset. Re-baking is
    deterministic: the same preset always yields identical channels.
    """
    preset = (name_or_preset if isinstance(name_or_preset, Preset)
              else load_preset(name_or_preset, root))
    mesh = load_asset_mesh(preset.mesh_name, root)
    p = preset.params
    if preset.kind == "uniform":
        mesh = bake_uniform(mesh, p["r"], p["g"])
    elif preset.kind == "spot":
        mesh = bake_uniform(mesh, p["base_r"], p["base_g"])
        mesh = bake_radial_spot(mesh, p["spot_center"], p["spot_radius"],
                                p["spot_r"], p["spot_g"])
    else:
        mesh = bake_uniform(mesh, p["base_r"], p["base_g"])
        mesh = bake_nodular(mesh, p["base_r"], p["noise_amp"],
                            p["noise_scale"], p["seed"])
    return mesh, preset.material_range, preset.kernel


def load_scene(name: str, root=None) -> tuple[Preset, TriMesh, MaterialRange, KernelParams]:
    preset = load_preset(name, root)
    mesh, rng, kernel = instantiate(preset, root)
    return preset, mesh, rng, kernel
