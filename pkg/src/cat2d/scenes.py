"""Scene files (JSON, ``"schema": 1``) and the built-in scenes.

Three kinds are recognised:

plane-domain
    ``{"schema": 1, "kind": "plane-domain", "kappa": 0, "outer": [[x, y], ...],
    "holes": [[[x, y], ...], ...], "curve": [[x, y], ...]}``.  ``holes`` and
    ``curve`` are optional; without a curve the outer ring of a hole-free
    domain serves as the Jordan curve.
complex
    ``{"schema": 1, "kind": "complex", "kappa": k, "vertices": [[x, y], ...] or n,
    "triangles": [[i, j, k], ...], "lengths": [[a, b, c], ...]}``; lengths are
    per triangle (v0v1, v1v2, v2v0) and may be omitted when coordinates are given.
sphere-cap
    ``{"schema": 1, "kind": "sphere-cap", "kappa": 1, "radius": r}``: the closed
    ball of radius r in the unit sphere with its intrinsic metric.

Every kind accepts optional ``name`` and ``seed`` fields.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import Cat2dError, InputError
from .flat_complex import TriComplex, grid_complex
from .jordan import JordanPolygon, rectangle, zigzag_strip
from .polydomain import PolygonDomain
from .verifier import SphereCap

SCHEMA = 1
KINDS = ("plane-domain", "complex", "sphere-cap")


@dataclass
class Scene:
    kind: str
    payload: object
    kappa: float = 0.0
    name: str = ""
    seed: int = 0
    curve: np.ndarray | None = None
    extra: dict = field(default_factory=dict)

    def jordan_curve(self, curve=None) -> JordanPolygon:
        """The Jordan curve for cut/majorize: explicit, from the file, or the outer ring."""
        pts = curve if curve is not None else self.curve
        if pts is None:
            if self.kind != "plane-domain" or self.payload.holes:
                raise InputError("scene has no curve; pass one with --curve")
            pts = self.payload.outer
        return JordanPolygon(pts, self.kappa)

    def to_json(self) -> dict:
        d = {"schema": SCHEMA, "kind": self.kind, "kappa": self.kappa, "name": self.name, "seed": self.seed}
        if self.kind == "plane-domain":
            d["outer"] = self.payload.outer.tolist()
            d["holes"] = [h.tolist() for h in self.payload.holes]
        elif self.kind == "complex":
            c = self.payload.to_json()
            d.update({k: c[k] for k in ("vertices", "triangles", "lengths")})
        else:
            d["radius"] = self.payload.R
        if self.curve is not None:
            d["curve"] = np.asarray(self.curve).tolist()
        return d


def scene_from_json(d) -> Scene:
    if not isinstance(d, dict):
        raise InputError("scene JSON must be an object")
    if d.get("schema", SCHEMA) != SCHEMA:
        raise InputError(f"unsupported schema {d.get('schema')!r}; expected {SCHEMA}")
    kind = d.get("kind")
    if kind is None:
        kind = "complex" if "triangles" in d else "plane-domain" if "outer" in d else None
    if kind not in KINDS:
        raise InputError(f"unknown scene kind {kind!r}")
    try:
        kappa = float(d.get("kappa", 1.0 if kind == "sphere-cap" else 0.0))
        name, seed = str(d.get("name", "")), int(d.get("seed", 0))
        curve = np.asarray(d["curve"], dtype=float).reshape(-1, 2) if d.get("curve") is not None else None
        if kind == "plane-domain":
            payload = PolygonDomain(d["outer"], d.get("holes", []))
        elif kind == "complex":
            payload = TriComplex.from_json(d)
            kappa = payload.kappa.value
        else:
            r = float(d["radius"])
            if not 0 < r < math.pi:
                raise InputError("cap radius must lie in (0, pi)")
            payload = SphereCap(r)
    except InputError:
        raise
    except Cat2dError as exc:
        raise InputError(str(exc)) from None
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed {kind} scene: {exc!r}") from None
    return Scene(kind, payload, kappa, name, seed, curve)


def load_scene(path) -> Scene:
    p = Path(path)
    try:
        d = json.loads(p.read_text())
    except FileNotFoundError:
        raise InputError(f"{p}: no such file") from None
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InputError(f"{p}: {exc}") from None
    if isinstance(d, dict) and not d.get("name"):
        d["name"] = p.stem
    return scene_from_json(d)


def load_curve(path) -> np.ndarray:
    """A curve file is either a bare list of points or an object with ``curve``."""
    try:
        d = json.loads(Path(path).read_text())
        pts = d["curve"] if isinstance(d, dict) else d
        return np.asarray(pts, dtype=float).reshape(-1, 2)
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: bad curve file ({exc})") from None


def dump_json(obj) -> str:
    """Canonical JSON: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=1, separators=(",", ": ")) + "\n"


# -- built-ins ------------------------------------------------------------------------------

def random_simple_polygon(rng: np.random.Generator, max_vertices: int = 12) -> np.ndarray:
    """Star-shaped random polygon: sorted random angles with random radii."""
    n = int(rng.integers(3, max_vertices + 1))
    while True:
        t = np.sort(rng.uniform(0, 2 * math.pi, n))
        if np.min(np.diff(np.r_[t, t[0] + 2 * math.pi])) > 0.05:
            break
    r = rng.uniform(0.3, 1.0, n)
    return np.round(np.stack([r * np.cos(t), r * np.sin(t)], axis=1), 6)


def random_polygons(count: int = 20, seed: int = 0, max_vertices: int = 12) -> list:
    rng = np.random.Generator(np.random.Philox(seed))
    return [random_simple_polygon(rng, max_vertices) for _ in range(count)]


L_DOMAIN = [[0, 0], [2, 0], [2, 1], [1, 1], [1, 2], [0, 2]]
JORDAN_POLYGON = [[0, 0], [4, 0], [4, 3], [2.5, 1.2], [1.5, 3.2], [0, 2.5], [1, 1.5]]


def _domain(name, outer, holes=(), kappa=0.0) -> Scene:
    return Scene("plane-domain", PolygonDomain(outer, holes), kappa, name)


def builtin(name: str) -> Scene:
    if name == "annulus":
        return _domain(name, rectangle(3, 3), [rectangle(1, 1, (1, 1))])
    if name == "cap":
        return Scene("sphere-cap", SphereCap(2.0), 1.0, name)
    if name == "convex-cap":
        return Scene("sphere-cap", SphereCap(1.4), 1.0, name)
    if name == "jordan_polygon":
        return _domain(name, JORDAN_POLYGON)
    if name == "l_domain":
        return _domain(name, L_DOMAIN)
    if name == "unit_square":
        return _domain(name, rectangle(1, 1))
    if name == "thin_rectangle":
        return _domain(name, rectangle(1, 0.01))
    if name == "zigzag":
        return _domain(name, zigzag_strip(20))
    if name == "slit_grid":
        mask = np.ones((8, 8), dtype=bool)
        mask[3, 0:5] = False
        return Scene("complex", grid_complex(8, 8, mask=mask), 0.0, name)
    raise InputError(f"unknown built-in scene {name!r}")


BUILTINS = ("annulus", "cap", "convex-cap", "jordan_polygon", "l_domain", "unit_square",
            "thin_rectangle", "zigzag", "slit_grid")


def write_builtins(directory) -> list:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name in BUILTINS:
        p = out / f"{name.replace('-', '_')}.json"
        p.write_text(dump_json(builtin(name).to_json()))
        paths.append(p)
    return paths
