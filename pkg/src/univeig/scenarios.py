"""Scenario configs, built-in scenarios, and the batch runner.

A scenario is a YAML mapping; see ``CONFIG_KEYS`` and the README for the
grammar.  ``run_scenario`` evaluates every variant (the product of listed
geometries, dimensions and potential values) and writes ``report.json``,
``report.csv``, ``plot.dat`` and ``manifest.json`` into ``<out>/<name>/``.
"""

from __future__ import annotations

import copy
import hashlib
import itertools
import json
import os
import platform
import shutil
import tempfile
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .estimators import POTENTIALS, KohnSpectrum, MeshSpectrum
from .exact_spectra import ModelSpectrum, gap_index, saturation_sides, spectrum_prefix
from .heisenberg import SCHEMES, HeisenbergGrid
from .inequalities import AMBIENT_KINDS, THEOREMS, InequalityReport, ReportRow, SpectrumSample, build_report
from .mesh import (
    EigenmapData,
    make_clifford_torus,
    make_disk,
    make_ellipsoid,
    make_flat_torus,
    make_icosphere,
    make_spherical_cap,
    read_mesh,
    validate_eigenmap,
)
from .report import dump_csv, dump_json, dump_plot_data, report_document

__all__ = [
    "ConfigError",
    "ScenarioError",
    "RunManifest",
    "BUILTIN_SCENARIOS",
    "list_scenarios",
    "load_config",
    "validate_config",
    "resolve_scenario",
    "apply_overrides",
    "run_scenario",
]

SCENARIO_THEOREMS = tuple(THEOREMS) + ("saturation",)
GEOMETRY_KINDS = ("model-space", "mesh", "mesh-file", "heisenberg")
MODEL_SPACES = ("sphere", "flat-torus")
GENERATORS = {
    "icosphere": (make_icosphere, "subdivisions"),
    "ellipsoid": (make_ellipsoid, "subdivisions"),
    "clifford-torus": (make_clifford_torus, "resolution"),
    "flat-torus": (make_flat_torus, "resolution"),
    "disk": (make_disk, "resolution"),
    "spherical-cap": (make_spherical_cap, "resolution"),
}
CONFIG_KEYS = {
    "name", "description", "geometry", "ambient", "potential", "theorems", "k_min", "k_max",
    "k_values", "gaps", "eigenmap", "solver", "tolerance", "resolution",
}
MESH_TOLERANCE = 1e-3


class ConfigError(ValueError):
    """Invalid scenario config; ``diagnostics`` lists ``line N: field: message`` strings."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(self.diagnostics))


class ScenarioError(RuntimeError):
    def __init__(self, scenario: str, stage: str, cause: BaseException):
        self.scenario = scenario
        self.stage = stage
        self.cause = cause
        super().__init__(f"scenario {scenario!r} failed in stage {stage!r}: {type(cause).__name__}: {cause}")


@dataclass
class RunManifest:
    scenario: dict
    version: str
    seed: int
    started: str
    wall_clock: float
    timings: dict
    files: dict
    satisfied: bool
    output_dir: str
    reports: list = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        return {
            "scenario": self.scenario,
            "version": self.version,
            "seed": self.seed,
            "started": self.started,
            "wall_clock_seconds": round(self.wall_clock, 6),
            "timings_seconds": {k: round(v, 6) for k, v in self.timings.items()},
            "files": self.files,
            "satisfied": self.satisfied,
            "python": platform.python_version(),
        }


# --------------------------------------------------------------------------
# built-ins

BUILTIN_SCENARIOS: dict[str, dict] = {
    "sphere-exact": {
        "description": "exact sphere spectra S^2..S^6, Yang inequality and bounds (all margins 0 or positive)",
        "geometry": {"kind": "model-space", "space": "sphere", "n": [2, 3, 4, 5, 6]},
        "theorems": ["yang", "yang-bounds", "yang-simple"],
        "k_max": 9,
        "tolerance": 0,
    },
    "sphere-saturation": {
        "description": "exact saturation of the Yang inequality at sphere gap indices, with geometric potentials",
        "geometry": {"kind": "model-space", "space": "sphere", "n": [1, 2, 3, 4, 5, 6]},
        "potential": {"kind": "geometric", "value": [0, "1/4", -3, "17/5"]},
        "theorems": ["saturation", "yang"],
        "k_values": "gaps",
        "gaps": 4,
        "tolerance": 0,
    },
    "icosphere-yang": {
        "description": "mesh unit sphere, q = 0",
        "geometry": {"kind": "mesh", "generator": "icosphere", "params": {"subdivisions": 4}},
        "theorems": ["yang", "yang-bounds", "yang-simple", "reilly"],
        "k_max": 20,
        "tolerance": MESH_TOLERANCE,
    },
    "icosphere-geometric-potential": {
        "description": "mesh unit sphere with q = g |h|^2",
        "geometry": {"kind": "mesh", "generator": "icosphere", "params": {"subdivisions": 4}},
        "potential": {"kind": "geometric", "value": [0, "1/4", 1]},
        "theorems": ["yang", "yang-bounds"],
        "k_max": 20,
        "tolerance": MESH_TOLERANCE,
    },
    "ellipsoid-yang": {
        "description": "mesh ellipsoid with semi-axes (1, 1, 1.5)",
        "geometry": {"kind": "mesh", "generator": "ellipsoid", "params": {"a": 1, "b": 1, "c": 1.5, "subdivisions": 4}},
        "potential": {"kind": "geometric", "value": [0, "1/4", 1]},
        "theorems": ["yang", "yang-bounds"],
        "k_max": 20,
        "tolerance": MESH_TOLERANCE,
    },
    "clifford-torus-reilly": {
        "description": "mesh Clifford torus in R^4, an equality case of the Reilly bound",
        "geometry": {"kind": "mesh", "generator": "clifford-torus", "params": {"resolution": 64}},
        "theorems": ["reilly", "yang", "yang-bounds"],
        "k_max": 20,
        "tolerance": MESH_TOLERANCE,
    },
    "flat-torus-eigenmap": {
        "description": "exact flat 2pi x 2pi torus spectrum with the circle-product eigenmap (lambda = 1)",
        "geometry": {"kind": "model-space", "space": "flat-torus", "periods": [1, 1]},
        "eigenmap": {"lambda": 1, "resolution": 64},
        "theorems": ["eigenmap", "eigenmap-bounds", "yang"],
        "k_max": 20,
        "tolerance": 0,
    },
    "disk-dirichlet": {
        "description": "planar unit disk with Dirichlet boundary",
        "geometry": {"kind": "mesh", "generator": "disk", "params": {"resolution": 24}},
        "theorems": ["yang", "yang-bounds", "yang-simple"],
        "k_max": 20,
        "tolerance": MESH_TOLERANCE,
    },
    "heisenberg-box": {
        "description": "Kohn Laplacian on the box [0,1]^3 in H^1",
        "geometry": {"kind": "heisenberg", "n": 1, "extent": [0, 1], "resolution": 16},
        "theorems": ["kohn", "kohn-bounds"],
        "k_max": 10,
        "tolerance": MESH_TOLERANCE,
    },
    "immersibility-audit": {
        "description": "spectral lower bound on sup |h|^2 over several meshes",
        "geometry": [
            {"kind": "mesh", "generator": "icosphere", "params": {"subdivisions": 4}},
            {"kind": "mesh", "generator": "ellipsoid", "params": {"a": 1, "b": 1, "c": 1.5, "subdivisions": 4}},
            {"kind": "mesh", "generator": "clifford-torus", "params": {"resolution": 64}},
        ],
        "theorems": ["immersibility"],
        "k_max": 20,
        "tolerance": MESH_TOLERANCE,
    },
    "reilly-chain": {
        "description": "chain bound lambda_k <= 3^(k-1) lambda_1 + C_R ||h||^2 on the mesh sphere",
        "geometry": {"kind": "mesh", "generator": "icosphere", "params": {"subdivisions": 4}},
        "theorems": ["reilly-chain", "reilly"],
        "k_max": 10,
        "tolerance": MESH_TOLERANCE,
    },
}


def list_scenarios() -> list[tuple[str, str]]:
    return [(name, cfg["description"]) for name, cfg in BUILTIN_SCENARIOS.items()]


# --------------------------------------------------------------------------
# config loading and validation


class _Locator:
    """Maps key paths of a YAML document to 1-based line numbers."""

    def __init__(self, node):
        self.lines: dict[tuple, int] = {}
        if node is not None:
            self._walk(node, ())

    def _walk(self, node, path):
        self.lines[path] = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            for key, value in node.value:
                sub = path + (key.value,)
                self.lines[sub] = key.start_mark.line + 1
                self._walk_child(value, sub)
        elif isinstance(node, yaml.SequenceNode):
            for i, item in enumerate(node.value):
                self._walk(item, path + (i,))

    def _walk_child(self, node, path):
        line = self.lines[path]
        self._walk(node, path)
        self.lines[path] = line

    def line(self, path) -> int | None:
        path = tuple(path)
        while path not in self.lines and path:
            path = path[:-1]
        return self.lines.get(path)


def load_config(path) -> tuple[dict, _Locator]:
    path = Path(path)
    text = path.read_text()
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}" if mark else "config"
        raise ConfigError([f"{where}: yaml: {getattr(exc, 'problem', exc)}"]) from exc
    if not isinstance(raw, dict):
        raise ConfigError(["line 1: <root>: config must be a mapping"])
    raw = dict(raw)
    raw.setdefault("name", path.stem)
    raw["_base_dir"] = str(path.resolve().parent)
    return raw, _Locator(node)


def _as_fraction(value):
    if isinstance(value, bool):
        raise ValueError("expected a number")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise ValueError(f"expected a number or 'p/q', got {value!r}")


def _listify(value):
    return list(value) if isinstance(value, (list, tuple)) else [value]


class _Checker:
    def __init__(self, locator: _Locator | None):
        self.locator = locator or _Locator(None)
        self.errors: list[str] = []

    def fail(self, path, message):
        line = self.locator.line(path)
        where = f"line {line}" if line else "config"
        name = ".".join(str(p) for p in path) or "<root>"
        self.errors.append(f"{where}: {name}: {message}")

    def int_field(self, cfg, key, path, minimum=0, default=None, required=False):
        if key not in cfg:
            if required:
                self.fail(path, f"missing required field '{key}'")
            return default
        value = cfg[key]
        if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
            self.fail(path + (key,), f"expected an integer >= {minimum}, got {value!r}")
            return default
        return value

    def number_field(self, cfg, key, path, default=None, positive=False):
        if key not in cfg:
            return default
        try:
            value = float(_as_fraction(cfg[key]))
        except (ValueError, ZeroDivisionError):
            self.fail(path + (key,), f"expected a number, got {cfg[key]!r}")
            return default
        if positive and value <= 0:
            self.fail(path + (key,), f"must be positive, got {value}")
        return value


def _normalize_geometry(geo, path, chk: _Checker, base_dir):
    if not isinstance(geo, dict):
        chk.fail(path, "geometry must be a mapping")
        return None
    kind = geo.get("kind")
    if kind not in GEOMETRY_KINDS:
        chk.fail(path + ("kind",), f"expected one of {list(GEOMETRY_KINDS)}, got {kind!r}")
        return None
    out = {"kind": kind}
    if kind == "model-space":
        space = geo.get("space")
        if space not in MODEL_SPACES:
            chk.fail(path + ("space",), f"expected one of {list(MODEL_SPACES)}, got {space!r}")
            return None
        out["space"] = space
        if space == "sphere":
            ns = _listify(geo.get("n", 2))
            for i, n in enumerate(ns):
                if isinstance(n, bool) or not isinstance(n, int) or n < 1:
                    chk.fail(path + ("n",), f"sphere dimension must be an integer >= 1, got {n!r}")
            out["n"] = ns
        else:
            periods = geo.get("periods", [1, 1])
            try:
                periods = [str(_as_fraction(p)) for p in _listify(periods)]
                if any(Fraction(p) <= 0 for p in periods):
                    raise ValueError
            except (ValueError, ZeroDivisionError):
                chk.fail(path + ("periods",), "periods must be positive rationals")
                return None
            out["periods"] = periods
    elif kind == "mesh":
        gen = geo.get("generator")
        if gen not in GENERATORS:
            chk.fail(path + ("generator",), f"expected one of {sorted(GENERATORS)}, got {gen!r}")
            return None
        params = geo.get("params", {}) or {}
        if not isinstance(params, dict):
            chk.fail(path + ("params",), "params must be a mapping")
            return None
        out["generator"] = gen
        out["params"] = dict(params)
    elif kind == "mesh-file":
        if not isinstance(geo.get("path"), str):
            chk.fail(path + ("path",), "mesh-file geometry needs a 'path' string")
            return None
        p = Path(geo["path"])
        if not p.is_absolute() and base_dir:
            p = Path(base_dir) / p
        out["path"] = str(p)
    else:
        n = chk.int_field(geo, "n", path, minimum=1, default=1)
        out["n"] = n
        extent = geo.get("extent", [0, 1])
        if not (isinstance(extent, list) and len(extent) == 2):
            chk.fail(path + ("extent",), "extent must be a [lower, upper] pair")
            extent = [0, 1]
        else:
            try:
                extent = [float(_as_fraction(e)) for e in extent]
                if extent[1] <= extent[0]:
                    raise ValueError
            except (ValueError, ZeroDivisionError):
                chk.fail(path + ("extent",), "extent must be numbers with lower < upper")
        out["extent"] = extent
        out["resolution"] = chk.int_field(geo, "resolution", path, minimum=2, default=16)
        scheme = geo.get("scheme", "forward-backward")
        if scheme not in SCHEMES:
            chk.fail(path + ("scheme",), f"expected one of {list(SCHEMES)}, got {scheme!r}")
        out["scheme"] = scheme
    return out


def validate_config(raw: dict, locator: _Locator | None = None) -> dict:
    """Check a raw config mapping and return its normalized form.

    Never runs a solve.  Raises :class:`ConfigError` with one diagnostic per
    problem found.
    """
    chk = _Checker(locator)
    if not isinstance(raw, dict):
        raise ConfigError(["config: <root>: config must be a mapping"])
    base_dir = raw.get("_base_dir")
    for key in raw:
        if key not in CONFIG_KEYS and key != "_base_dir":
            chk.fail((key,), f"unknown field; allowed: {sorted(CONFIG_KEYS)}")
    cfg: dict = {}
    name = raw.get("name")
    if not isinstance(name, str) or not name or "/" in name:
        chk.fail(("name",), "scenario needs a non-empty 'name' without '/'")
    cfg["name"] = name
    cfg["description"] = str(raw.get("description", ""))

    geos = raw.get("geometry")
    if geos is None:
        chk.fail(("geometry",), "missing required field 'geometry'")
        geos = []
    if isinstance(geos, dict):
        cfg["geometry"] = [_normalize_geometry(geos, ("geometry",), chk, base_dir)]
    elif isinstance(geos, list) and geos:
        cfg["geometry"] = [_normalize_geometry(g, ("geometry", i), chk, base_dir) for i, g in enumerate(geos)]
    else:
        if geos != []:
            chk.fail(("geometry",), "geometry must be a mapping or a non-empty list of mappings")
        cfg["geometry"] = []
    kinds = {g["kind"] for g in cfg["geometry"] if g}

    ambient = raw.get("ambient", "euclidean")
    if ambient not in AMBIENT_KINDS:
        chk.fail(("ambient",), f"expected one of {list(AMBIENT_KINDS)}, got {ambient!r}")
    cfg["ambient"] = ambient

    pot = raw.get("potential", {"kind": "zero"})
    if isinstance(pot, str):
        pot = {"kind": pot}
    if not isinstance(pot, dict) or pot.get("kind", "zero") not in POTENTIALS:
        chk.fail(("potential",), f"potential kind must be one of {list(POTENTIALS)}")
        pot = {"kind": "zero"}
    pkind = pot.get("kind", "zero")
    npot = {"kind": pkind}
    if pkind in ("constant", "geometric"):
        try:
            npot["value"] = [str(_as_fraction(v)) for v in _listify(pot.get("value", 0))]
        except (ValueError, ZeroDivisionError):
            chk.fail(("potential", "value"), "values must be numbers or 'p/q' strings")
            npot["value"] = ["0"]
    elif pkind == "tabulated":
        if "table" in pot:
            if not isinstance(pot["table"], list):
                chk.fail(("potential", "table"), "table must be a list of per-vertex values")
            npot["table"] = pot.get("table")
        elif isinstance(pot.get("path"), str):
            p = Path(pot["path"])
            npot["path"] = str(p if p.is_absolute() or not base_dir else Path(base_dir) / p)
        else:
            chk.fail(("potential",), "tabulated potential needs 'table' or 'path'")
        if kinds - {"mesh", "mesh-file"}:
            chk.fail(("potential", "kind"), "tabulated potentials need mesh geometries")
    if pkind != "zero" and "heisenberg" in kinds:
        chk.fail(("potential", "kind"), "the Kohn Laplacian takes no potential")
    cfg["potential"] = npot

    theorems = raw.get("theorems")
    if not isinstance(theorems, list) or not theorems:
        chk.fail(("theorems",), "theorem list must be a non-empty list")
        theorems = []
    for i, t in enumerate(theorems):
        if t not in SCENARIO_THEOREMS:
            chk.fail(("theorems", i), f"unknown theorem {t!r}; expected one of {list(SCENARIO_THEOREMS)}")
    cfg["theorems"] = list(theorems)
    kohn = {"kohn", "kohn-bounds"} & set(theorems)
    if kohn and kinds != {"heisenberg"}:
        chk.fail(("theorems",), "kohn theorems need heisenberg geometries only")
    if "heisenberg" in kinds and set(theorems) - {"kohn", "kohn-bounds"}:
        chk.fail(("theorems",), "heisenberg geometries support only the kohn theorems")
    if "saturation" in theorems and any(not g or g["kind"] != "model-space" or g["space"] != "sphere" for g in cfg["geometry"]):
        chk.fail(("theorems",), "the saturation theorem needs model-space sphere geometries")

    cfg["k_min"] = chk.int_field(raw, "k_min", (), minimum=1, default=1)
    cfg["k_max"] = chk.int_field(raw, "k_max", (), minimum=1, default=10)
    if cfg["k_min"] and cfg["k_max"] and cfg["k_min"] > cfg["k_max"]:
        chk.fail(("k_min",), "k_min exceeds k_max")
    k_values = raw.get("k_values", "range")
    if k_values not in ("range", "gaps"):
        chk.fail(("k_values",), "expected 'range' or 'gaps'")
    cfg["k_values"] = k_values
    cfg["gaps"] = chk.int_field(raw, "gaps", (), minimum=1, default=4)
    if (k_values == "gaps" or "saturation" in theorems) and any(
        g and g["kind"] != "model-space" for g in cfg["geometry"]
    ):
        chk.fail(("k_values",), "gap indices are defined for model-space spheres only")

    em = raw.get("eigenmap")
    if em is not None:
        if not isinstance(em, dict):
            chk.fail(("eigenmap",), "eigenmap must be a mapping")
            em = {}
        cfg["eigenmap"] = {
            "lambda": str(_as_fraction(em.get("lambda", 1))) if _is_number(em.get("lambda", 1)) else None,
            "resolution": chk.int_field(em, "resolution", ("eigenmap",), minimum=3, default=64),
            "energy_tol": chk.number_field(em, "energy_tol", ("eigenmap",), default=1e-2, positive=True),
        }
        if cfg["eigenmap"]["lambda"] is None:
            chk.fail(("eigenmap", "lambda"), "lambda must be a number")
    elif {"eigenmap", "eigenmap-bounds"} & set(theorems):
        chk.fail(("eigenmap",), "eigenmap theorems need an 'eigenmap' section")
    if "eigenmap" in cfg and any(not _has_torus_map(g) for g in cfg["geometry"] if g):
        chk.fail(("eigenmap",), "eigenmaps are built for flat-torus and clifford-torus geometries only")

    solver = raw.get("solver", {}) or {}
    if not isinstance(solver, dict):
        chk.fail(("solver",), "solver must be a mapping")
        solver = {}
    cfg["solver"] = {
        "tol": chk.number_field(solver, "tol", ("solver",), default=1e-8, positive=True),
        "seed": chk.int_field(solver, "seed", ("solver",), minimum=0, default=0),
    }
    exact_only = all(g and g["kind"] == "model-space" for g in cfg["geometry"])
    tol = chk.number_field(raw, "tolerance", (), default=0.0 if exact_only else MESH_TOLERANCE)
    if tol is not None and tol < 0:
        chk.fail(("tolerance",), "tolerance must be >= 0")
    cfg["tolerance"] = tol
    cfg["resolution"] = chk.int_field(raw, "resolution", (), minimum=1, default=None)
    if chk.errors:
        raise ConfigError(chk.errors)
    return cfg


def _is_number(x) -> bool:
    try:
        _as_fraction(x)
        return True
    except (ValueError, ZeroDivisionError):
        return False


def _has_torus_map(geo) -> bool:
    if geo["kind"] == "model-space":
        return geo["space"] == "flat-torus" and len(geo["periods"]) == 2
    return geo["kind"] == "mesh" and geo["generator"] in ("flat-torus", "clifford-torus")


def resolve_scenario(target: str) -> dict:
    """Normalized config for a built-in name or a YAML path."""
    if target in BUILTIN_SCENARIOS:
        raw = copy.deepcopy(BUILTIN_SCENARIOS[target])
        raw["name"] = target
        return validate_config(raw)
    if os.path.exists(target):
        raw, locator = load_config(target)
        return validate_config(raw, locator)
    raise ConfigError([f"config: <target>: {target!r} is neither a built-in scenario nor a config file"])


def apply_overrides(cfg: dict, k_max=None, tol=None, seed=None, resolution=None) -> dict:
    """CLI flags win over config keys."""
    cfg = copy.deepcopy(cfg)
    if k_max is not None:
        cfg["k_max"] = int(k_max)
        if cfg["k_min"] > cfg["k_max"]:
            raise ConfigError([f"config: k_max: override {k_max} is below k_min {cfg['k_min']}"])
    if tol is not None:
        if tol < 0:
            raise ConfigError(["config: tolerance: must be >= 0"])
        cfg["tolerance"] = float(tol)
    if seed is not None:
        cfg["solver"]["seed"] = int(seed)
    if resolution is not None:
        if resolution < 1:
            raise ConfigError(["config: resolution: must be >= 1"])
        cfg["resolution"] = int(resolution)
    return cfg


# --------------------------------------------------------------------------
# evaluation


def _potential_values(cfg) -> list:
    pot = cfg["potential"]
    if pot["kind"] in ("constant", "geometric"):
        return [Fraction(v) for v in pot["value"]]
    return [None]


def _label(geo, extra: str) -> str:
    if geo["kind"] == "model-space":
        base = f"S^{extra}" if geo["space"] == "sphere" else "T(" + ",".join(geo["periods"]) + ")"
        return base
    if geo["kind"] == "mesh":
        return geo["generator"]
    if geo["kind"] == "mesh-file":
        return Path(geo["path"]).name
    return f"H^{geo['n']}"


def _k_list(cfg, n=None) -> list[int]:
    if cfg["k_values"] == "gaps":
        return [gap_index(n, m) for m in range(1, cfg["gaps"] + 1)]
    return list(range(cfg["k_min"], cfg["k_max"] + 1))


def _reports_for(cfg, inputs, ks, source) -> list[InequalityReport]:
    out = []
    tol = cfg["tolerance"]
    for theorem in cfg["theorems"]:
        if theorem == "saturation":
            continue
        use = [k for k in ks if k >= 2] if theorem == "reilly-chain" else ks
        out.append(build_report(theorem, inputs, use, tol, source))
    return out


def _saturation_report(n: int, g: Fraction, gaps: int, source: str) -> InequalityReport:
    rows = []
    for m in range(1, gaps + 1):
        lhs, rhs = saturation_sides(n, m, g)
        rows.append(ReportRow(gap_index(n, m), lhs, rhs, rhs - lhs, rhs - lhs == 0))
    return InequalityReport("saturation", rows, 0, source, {"n": n, "g": str(g)})


def _torus_eigenmap(periods) -> tuple[Fraction, callable]:
    """Eigenvalue and components of the normalized circle-product map into a sphere."""
    radii = [Fraction(p) for p in periods]
    d = len(radii)
    lam = sum(1 / (r * r) for r in radii) / d

    def components(params):
        cols = []
        for a, r in enumerate(radii):
            ang = params[:, a] / float(r)
            cols += [np.cos(ang), np.sin(ang)]
        return np.stack(cols, axis=1) / np.sqrt(d)

    return lam, components


def _check_eigenmap(cfg, geo, mesh=None, stage_meta=None):
    """Validate the torus eigenmap on a mesh; returns its eigenvalue."""
    em = cfg["eigenmap"]
    if geo["kind"] == "model-space":
        periods = geo["periods"]
        side = [2 * np.pi * float(Fraction(p)) for p in periods]
        mesh = make_flat_torus(side[0], side[1], cfg["resolution"] or em["resolution"])
    else:
        r = [np.linalg.norm(mesh.vertices[0, 0:2]), np.linalg.norm(mesh.vertices[0, 2:4])]
        periods = [Fraction(x).limit_denominator(10**12) for x in r]
    lam, components = _torus_eigenmap(periods)
    configured = Fraction(em["lambda"])
    if geo["kind"] == "model-space" and lam != configured:
        raise ValueError(f"the circle-product map has eigenvalue {lam}, config says {configured}")
    result = validate_eigenmap(mesh, EigenmapData(components(mesh.parameters), float(lam)), energy_tol=em["energy_tol"])
    if stage_meta is not None:
        stage_meta.update(
            {"eigenmap_norm_deviation": result.norm_deviation, "eigenmap_energy_deviation": result.energy_deviation}
        )
    if not result.passed:
        raise ValueError(
            f"eigenmap validation failed: norm deviation {result.norm_deviation:.3g}, "
            f"energy deviation {result.energy_deviation:.3g}"
        )
    return configured if geo["kind"] == "model-space" else float(lam)


def _model_variant(cfg, geo, g, timings):
    t0 = time.perf_counter()
    pkind = cfg["potential"]["kind"]
    reports = []
    ns = geo["n"] if geo["space"] == "sphere" else [len(geo["periods"])]
    for n in ns:
        ks = _k_list(cfg, n)
        count = max(ks) + 1
        if geo["space"] == "sphere":
            spectrum = ModelSpectrum.sphere(n)
            h_sq = Fraction(n * n)
        else:
            spectrum = ModelSpectrum.flat_torus([Fraction(p) for p in geo["periods"]])
            # product of circles of radius r_a: |h|^2 = sum 1/r_a^2
            h_sq = sum(1 / Fraction(p) ** 2 for p in geo["periods"])
        q = Fraction(0)
        if pkind == "constant":
            q = g
        elif pkind == "geometric":
            q = g * h_sq
        lams = [x + q for x in spectrum_prefix(spectrum, count)]
        delta = h_sq / 4 - q
        sample = SpectrumSample(
            n=n, eigenvalues=lams, delta_terms=[delta] * count, delta_sup=delta, q_integrals=[q] * count
        )
        inputs = {"sample": sample, "h_sup_sq": h_sq, "mean_h_sq": h_sq}
        meta = {}
        if "eigenmap" in cfg:
            inputs["lambda_map"] = _check_eigenmap(cfg, geo, stage_meta=meta)
        source = _label(geo, str(n)) + (f" q={pkind}:{g}" if g is not None else "")
        reps = _reports_for(cfg, inputs, ks, source)
        if "saturation" in cfg["theorems"]:
            reps.insert(0, _saturation_report(n, g if pkind == "geometric" else Fraction(0), cfg["gaps"], source))
        for r in reps:
            r.metadata.update(meta)
        reports += reps
    timings["exact"] = timings.get("exact", 0.0) + time.perf_counter() - t0
    return reports


def _build_mesh(cfg, geo):
    if geo["kind"] == "mesh-file":
        return read_mesh(geo["path"])
    fn, res_key = GENERATORS[geo["generator"]]
    params = dict(geo["params"])
    if cfg["resolution"] is not None:
        params[res_key] = cfg["resolution"]
    return fn(**params)


def _mesh_variant(cfg, geo, g, timings, stage):
    stage[0] = "geometry"
    t0 = time.perf_counter()
    mesh = _build_mesh(cfg, geo)
    timings["geometry"] = timings.get("geometry", 0.0) + time.perf_counter() - t0

    stage[0] = "solve"
    t0 = time.perf_counter()
    pot = cfg["potential"]
    table = None
    if pot["kind"] == "tabulated":
        table = pot["table"] if "table" in pot else np.loadtxt(pot["path"], ndmin=1)
    est = MeshSpectrum(
        n_eigenvalues=max(cfg["k_max"] + 1, 2),
        potential=pot["kind"],
        coefficient=float(g) if g is not None else 0.0,
        table=table,
        tol=cfg["solver"]["tol"],
        seed=cfg["solver"]["seed"],
    ).fit(mesh)
    timings["solve"] = timings.get("solve", 0.0) + time.perf_counter() - t0

    stage[0] = "inequalities"
    t0 = time.perf_counter()
    inputs = {"sample": est.to_sample(cfg["ambient"]), **est.geometry_inputs()}
    meta = {
        "mesh": mesh.name,
        "vertices": mesh.n_vertices,
        "h_sup_sq": est.curvature_.sup_sq,
        "mean_h_sq": est.curvature_.mean_sq,
        "max_residual": float(np.max(est.residuals_)),
    }
    if "eigenmap" in cfg:
        stage[0] = "eigenmap"
        inputs["lambda_map"] = _check_eigenmap(cfg, geo, mesh, meta)
        stage[0] = "inequalities"
    source = _label(geo, "") + (f" q={pot['kind']}:{g}" if g is not None else "")
    reports = _reports_for(cfg, inputs, _k_list(cfg), source)
    for r in reports:
        r.metadata.update(meta)
    timings["inequalities"] = timings.get("inequalities", 0.0) + time.perf_counter() - t0
    return reports


def _heisenberg_variant(cfg, geo, timings, stage):
    stage[0] = "solve"
    t0 = time.perf_counter()
    res = cfg["resolution"] or geo["resolution"]
    grid = HeisenbergGrid.box(geo["n"], geo["extent"], res)
    est = KohnSpectrum(
        n_eigenvalues=cfg["k_max"] + 1, scheme=geo["scheme"], tol=cfg["solver"]["tol"], seed=cfg["solver"]["seed"]
    ).fit(grid)
    timings["solve"] = timings.get("solve", 0.0) + time.perf_counter() - t0
    stage[0] = "inequalities"
    t0 = time.perf_counter()
    inputs = {"eigenvalues": [float(x) for x in est.eigenvalues_], "n": geo["n"]}
    reports = _reports_for(cfg, inputs, _k_list(cfg), f"H^{geo['n']} box {res}^{grid.dim}")
    for r in reports:
        r.metadata.update({"resolution": res, "lambda_1": float(est.eigenvalues_[0])})
    timings["inequalities"] = timings.get("inequalities", 0.0) + time.perf_counter() - t0
    return reports


def evaluate(cfg: dict, timings: dict | None = None, stage: list | None = None) -> list[InequalityReport]:
    """All reports of a normalized config, without writing files."""
    timings = {} if timings is None else timings
    stage = stage or ["evaluate"]
    reports = []
    for geo, g in itertools.product(cfg["geometry"], _potential_values(cfg)):
        if geo["kind"] == "model-space":
            stage[0] = "exact"
            reports += _model_variant(cfg, geo, g, timings)
        elif geo["kind"] == "heisenberg":
            reports += _heisenberg_variant(cfg, geo, timings, stage)
        else:
            reports += _mesh_variant(cfg, geo, g, timings, stage)
    return reports


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run_scenario(cfg: dict, out_dir) -> RunManifest:
    """Evaluate a normalized config and write its outputs atomically.

    Files land in ``<out_dir>/<name>/``.  On any failure the partial output
    is removed and :class:`ScenarioError` names the failing stage.
    """
    name = cfg["name"]
    out_dir = Path(out_dir)
    stage = ["setup"]
    timings: dict[str, float] = {}
    started = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    t_start = time.perf_counter()
    tmp = None
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        reports = evaluate(cfg, timings, stage)
        stage[0] = "write"
        t0 = time.perf_counter()
        tmp = Path(tempfile.mkdtemp(prefix=f".{name}.", dir=out_dir))
        doc = report_document(name, __version__, reports)
        files = {
            "report.json": dump_json(doc),
            "report.csv": dump_csv(reports),
            "plot.dat": dump_plot_data(reports),
        }
        for fname, text in files.items():
            (tmp / fname).write_text(text)
        timings["write"] = time.perf_counter() - t0
        echo = {k: v for k, v in cfg.items() if not k.startswith("_")}
        manifest = RunManifest(
            scenario=echo,
            version=__version__,
            seed=cfg["solver"]["seed"],
            started=started,
            wall_clock=time.perf_counter() - t_start,
            timings=timings,
            files={f: _sha256(tmp / f) for f in files},
            satisfied=doc["satisfied"],
            output_dir=str(out_dir / name),
            reports=reports,
        )
        (tmp / "manifest.json").write_text(json.dumps(manifest.to_json(), indent=2) + "\n")
        final = out_dir / name
        if final.exists():
            shutil.rmtree(final)
        os.replace(tmp, final)
        tmp = None
        return manifest
    except Exception as exc:
        raise ScenarioError(name, stage[0], exc) from exc
    finally:
        if tmp is not None and tmp.exists():
            shutil.rmtree(tmp, ignore_errors=True)
