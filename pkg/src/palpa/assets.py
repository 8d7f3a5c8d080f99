"""Locating bundled assets (meshes, preset tables, default config).

Assets ship inside the package under palpa/assets. The PALPA_ASSETS
environment variable, or an explicit root argument, points lookups at a
different directory instead; files are resolved by bare name with .obj
then .ply probed for meshes.
"""

from __future__ import annotations

import os
from pathlib import Path

from .errors import AssetError
from .mesh import TriMesh, load_mesh

ASSET_ENV = "PALPA_ASSETS"
_BUNDLED = Path(__file__).resolve().parent / "assets"

PRESETS_FILE = "presets.cfg"
DEFAULT_CONFIG_FILE = "default.cfg"


def asset_root(override=None) -> Path:
    if override is not None:
        return Path(override)
    env = os.environ.get(ASSET_ENV)
    if env:
        return Path(env)
    return _BUNDLED


def find_asset(name: str, root=None, suffixes: tuple = ()) -> Path:
    """Resolve a bare asset name to a file, trying each suffix in order."""
    base = asset_root(root)
    candidates = [base / name]
    candidates += [base / f"{name}{suffix}" for suffix in suffixes]
    for cand in candidates:
        if cand.is_file():
            return cand
    raise AssetError(f"no asset named {name!r} under {base}")


def find_mesh(name: str, root=None) -> Path:
    return find_asset(name, root, suffixes=(".obj", ".ply"))


def load_asset_mesh(name: str, root=None) -> TriMesh:
    return load_mesh(find_mesh(name, root))
