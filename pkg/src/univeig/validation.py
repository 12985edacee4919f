"""Input checks shared by the estimators."""

from __future__ import annotations

import numbers

import numpy as np

from .heisenberg import HeisenbergGrid
from .inequalities import SpectrumSample
from .mesh import ImmersedMesh

__all__ = ["check_mesh", "check_grid", "check_sample", "check_positive_int", "check_potential_table"]


def check_mesh(mesh) -> ImmersedMesh:
    if not isinstance(mesh, ImmersedMesh):
        raise TypeError(f"expected an ImmersedMesh, got {type(mesh).__name__}")
    return mesh


def check_grid(grid) -> HeisenbergGrid:
    if not isinstance(grid, HeisenbergGrid):
        raise TypeError(f"expected a HeisenbergGrid, got {type(grid).__name__}")
    return grid


def check_sample(sample) -> SpectrumSample:
    if not isinstance(sample, SpectrumSample):
        raise TypeError(f"expected a SpectrumSample, got {type(sample).__name__}")
    return sample


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def check_potential_table(table, n_vertices: int) -> np.ndarray:
    q = np.asarray(table, dtype=float)
    if q.shape != (n_vertices,):
        raise ValueError(f"tabulated potential needs {n_vertices} values, got shape {q.shape}")
    if not np.all(np.isfinite(q)):
        raise ValueError("tabulated potential must be finite")
    return q
