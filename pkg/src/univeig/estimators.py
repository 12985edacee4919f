"""Estimator-style wrappers: configure in ``__init__``, compute in ``fit``.

Hyperparameters are plain constructor arguments (so ``get_params`` and
``set_params`` work and ``clone`` reproduces a run); fitted state lives in
trailing-underscore attributes.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .heisenberg import SCHEMES, assemble_kohn, solve_kohn
from .inequalities import THEOREMS, AmbientContext, SpectrumSample, build_report
from .mesh import apply_dirichlet, assemble_laplacian, assemble_schrodinger, delta_integrals, mean_curvature
from .solver import SolveConfig, solve_smallest
from .validation import check_grid, check_mesh, check_positive_int, check_potential_table, check_sample

__all__ = ["MeshSpectrum", "KohnSpectrum", "InequalityAudit", "POTENTIALS"]

POTENTIALS = ("zero", "constant", "geometric", "tabulated")


class MeshSpectrum(BaseEstimator):
    """Lowest eigenpairs of ``-Laplacian + q`` on a triangle mesh.

    ``potential`` picks ``q``: ``"zero"``, ``"constant"`` (``q = coefficient``),
    ``"geometric"`` (``q = coefficient * |h|^2``) or ``"tabulated"`` (per-vertex
    values in ``table``).  Meshes with boundary get Dirichlet conditions.
    """

    def __init__(self, n_eigenvalues=20, potential="zero", coefficient=0.0, table=None, tol=1e-8, seed=0):
        self.n_eigenvalues = n_eigenvalues
        self.potential = potential
        self.coefficient = coefficient
        self.table = table
        self.tol = tol
        self.seed = seed

    def _potential_values(self, mesh, curvature):
        if self.potential == "zero":
            return np.zeros(mesh.n_vertices)
        if self.potential == "constant":
            return np.full(mesh.n_vertices, float(self.coefficient))
        if self.potential == "geometric":
            return curvature.potential(float(self.coefficient))
        if self.potential == "tabulated":
            if self.table is None:
                raise ValueError("tabulated potential needs a table")
            return check_potential_table(self.table, mesh.n_vertices)
        raise ValueError(f"unknown potential {self.potential!r}; expected one of {POTENTIALS}")

    def fit(self, mesh, y=None):
        mesh = check_mesh(mesh)
        count = check_positive_int(self.n_eigenvalues, "n_eigenvalues", 2)
        op = assemble_laplacian(mesh)
        curvature = mean_curvature(mesh, op)
        q = self._potential_values(mesh, curvature)
        H, mass, idx = apply_dirichlet(op, assemble_schrodinger(op, q))
        if count >= len(idx):
            raise ValueError(f"n_eigenvalues={count} must be below the {len(idx)} free vertices")
        sol = solve_smallest(H, mass, SolveConfig(count=count, tol=self.tol, seed=self.seed))
        U = sol.eigenvectors
        self.operator_ = op
        self.curvature_ = curvature
        self.potential_values_ = q
        self.interior_ = idx
        self.eigenvalues_ = sol.eigenvalues
        self.eigenvectors_ = U
        self.residuals_ = sol.residuals
        self.deltas_ = delta_integrals(U, curvature.squared[idx], q[idx], mass)
        self.q_integrals_ = np.einsum("ij,ij,i->j", U, U, q[idx] * mass)
        self.mesh_name_ = mesh.name
        return self

    def transform(self, mesh=None):
        """Eigenvalues as a 1-row array (the fitted mesh is the only sample)."""
        check_is_fitted(self, "eigenvalues_")
        return self.eigenvalues_[None, :]

    def to_sample(self, ambient: str = "euclidean") -> SpectrumSample:
        check_is_fitted(self, "eigenvalues_")
        lams = np.sort(self.eigenvalues_)
        # same vertex set as the sup of |h|^2 (regular vertices only)
        mask = self.curvature_.mask
        local = self.curvature_.squared[mask] / 4 - self.potential_values_[mask]
        return SpectrumSample(
            n=2,
            eigenvalues=[float(x) for x in lams],
            delta_terms=[float(x) for x in self.deltas_],
            delta_sup=float(np.max(local)),
            ambient=AmbientContext(ambient, 2),
            q_integrals=[float(x) for x in self.q_integrals_],
        )

    def geometry_inputs(self) -> dict:
        check_is_fitted(self, "eigenvalues_")
        return {"h_sup_sq": self.curvature_.sup_sq, "mean_h_sq": self.curvature_.mean_sq}


class KohnSpectrum(BaseEstimator):
    """Lowest Dirichlet eigenvalues of the Kohn Laplacian on a Heisenberg box grid."""

    def __init__(self, n_eigenvalues=10, scheme="forward-backward", tol=1e-8, seed=0):
        self.n_eigenvalues = n_eigenvalues
        self.scheme = scheme
        self.tol = tol
        self.seed = seed

    def fit(self, grid, y=None):
        grid = check_grid(grid)
        count = check_positive_int(self.n_eigenvalues, "n_eigenvalues", 2)
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        op = assemble_kohn(grid, self.scheme)
        sol = solve_kohn(grid, count, SolveConfig(count=count, tol=self.tol, seed=self.seed), operator=op)
        self.operator_ = op
        self.n_ = grid.n
        self.eigenvalues_ = sol.eigenvalues
        self.residuals_ = sol.residuals
        return self

    def transform(self, grid=None):
        check_is_fitted(self, "eigenvalues_")
        return self.eigenvalues_[None, :]


class InequalityAudit(BaseEstimator):
    """Evaluate a list of inequalities for ``k = k_min..k_max``.

    ``fit(sample, **inputs)`` forwards ``inputs`` (``h_sup_sq``, ``mean_h_sq``,
    ``lambda_map``, or ``eigenvalues`` and ``n`` for the Kohn family) to
    :func:`univeig.inequalities.build_report`.
    """

    def __init__(self, theorems=("yang",), k_max=10, k_min=1, tolerance=0.0, source=""):
        self.theorems = theorems
        self.k_max = k_max
        self.k_min = k_min
        self.tolerance = tolerance
        self.source = source

    def fit(self, sample=None, y=None, **inputs):
        theorems = list(self.theorems)
        if not theorems:
            raise ValueError("theorem list is empty")
        unknown = [t for t in theorems if t not in THEOREMS]
        if unknown:
            raise ValueError(f"unknown theorem tags {unknown}; expected from {sorted(THEOREMS)}")
        k_max = check_positive_int(self.k_max, "k_max")
        k_min = check_positive_int(self.k_min, "k_min")
        if sample is not None:
            inputs["sample"] = check_sample(sample)
        reports = []
        for theorem in theorems:
            # the chain bound compares lambda_k itself, starting at k = 2
            lo = max(k_min, 2) if theorem == "reilly-chain" else k_min
            reports.append(build_report(theorem, inputs, range(lo, k_max + 1), self.tolerance, self.source))
        self.reports_ = reports
        self.satisfied_ = all(r.satisfied for r in reports)
        return self

    def transform(self, sample=None):
        """Margins as a ragged list, one array per theorem."""
        check_is_fitted(self, "reports_")
        return [np.array([float(r.margin) for r in rep.rows]) for rep in self.reports_]
