"""Smallest eigenpairs of sparse symmetric generalized problems ``H u = lam M u``.

``M`` is a positive diagonal (lumped) mass matrix, so the problem is reduced
to the standard symmetric problem for ``M^{-1/2} H M^{-1/2}``.  Small problems
go to LAPACK; large ones to ARPACK in shift-invert mode with a seeded
starting vector, which makes every solve deterministic.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

logger = logging.getLogger(__name__)

__all__ = [
    "ConvergenceError",
    "SolveConfig",
    "EigenSolution",
    "solve_smallest",
    "residual_report",
    "commutator_lemma_check",
]

DENSE_LIMIT = 1500


class ConvergenceError(RuntimeError):
    """The eigensolver did not meet the residual contract."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


@dataclass(frozen=True)
class SolveConfig:
    count: int = 10
    tol: float = 1e-8
    max_iter: int = 5000
    seed: int = 0

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


@dataclass
class EigenSolution:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    info: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.eigenvalues)


def _mass_diagonal(M, size: int) -> np.ndarray:
    if M is None:
        return np.ones(size)
    if sp.issparse(M):
        if (M - sp.diags(M.diagonal())).count_nonzero():
            raise ValueError("mass matrix must be diagonal")
        diag = np.asarray(M.diagonal(), dtype=float)
    else:
        M = np.asarray(M, dtype=float)
        diag = M.copy() if M.ndim == 1 else np.diag(M).copy()
        if M.ndim == 2 and np.any(M - np.diag(diag)):
            raise ValueError("mass matrix must be diagonal")
    if diag.shape != (size,) or np.any(diag <= 0) or not np.all(np.isfinite(diag)):
        raise ValueError("mass matrix must be a positive diagonal of matching size")
    return diag


def _asymmetry(H) -> tuple[float, float]:
    if sp.issparse(H):
        diff = abs(H - H.T).max()
        scale = abs(H).max()
    else:
        diff = np.abs(H - H.T).max()
        scale = np.abs(H).max()
    return float(diff), float(scale)


def solve_smallest(H, M=None, config: SolveConfig | None = None) -> EigenSolution:
    """The ``config.count`` smallest eigenpairs of ``H u = lam M u``.

    Eigenvectors are returned as columns, ``M``-orthonormal.  Raises
    ``ValueError`` for an asymmetric ``H`` or a non-positive-diagonal ``M``
    and :class:`ConvergenceError` when the residual contract fails.
    """
    config = config or SolveConfig()
    size = H.shape[0]
    if H.shape != (size, size):
        raise ValueError("H must be square")
    diff, scale = _asymmetry(H)
    if diff > 1e-12 * max(scale, 1.0):
        raise ValueError(f"H is not symmetric (max asymmetry {diff:.3e})")
    if config.count > size:
        raise ValueError(f"requested {config.count} eigenpairs of a {size}x{size} problem")
    mass = _mass_diagonal(M, size)
    scaling = 1.0 / np.sqrt(mass)

    if size <= DENSE_LIMIT or config.count >= size // 2:
        A = H.toarray() if sp.issparse(H) else np.asarray(H, dtype=float)
        A = scaling[:, None] * A * scaling[None, :]
        A = 0.5 * (A + A.T)
        values, vectors = scipy.linalg.eigh(A, subset_by_index=[0, config.count - 1])
        method = "dense"
    else:
        A = sp.diags(scaling) @ sp.csc_matrix(H) @ sp.diags(scaling)
        A = (0.5 * (A + A.T)).tocsc()
        values, vectors, certified = _sparse_smallest(A, config)
        method = "arpack-shift-invert"
    order = np.argsort(values, kind="stable")
    values = values[order]
    vectors = vectors[:, order]
    # fix the sign so repeated solves agree bit-for-bit on the output
    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivots, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    vectors = vectors * signs
    u = scaling[:, None] * vectors
    solution = EigenSolution(values, u, np.zeros(len(values)), {"method": method, "size": size})
    solution.info["count_certified"] = method == "dense" or certified
    report = residual_report(H, mass, solution)
    solution.residuals = report["residuals"]
    solution.info["orthonormality_defect"] = report["orthonormality_defect"]
    limits = config.tol * np.maximum(1.0, np.abs(values))
    if np.any(solution.residuals > limits) or report["orthonormality_defect"] > 1e-6:
        raise ConvergenceError(
            f"residual contract violated (max residual {solution.residuals.max():.3e})",
            residuals=solution.residuals,
        )
    logger.debug("solved %d pairs of size %d via %s", len(values), size, method)
    return solution


def _inertia_below(A, tau: float) -> int | None:
    """Number of eigenvalues of symmetric ``A`` below ``tau`` (Sylvester's law).

    Uses an LDL^T-like factorization (SuperLU restricted to diagonal pivots);
    returns None when the factorization had to pivot off the diagonal.
    """
    shifted = (A - tau * sp.eye(A.shape[0], format="csc")).tocsc()
    try:
        lu = spla.splu(
            shifted, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0, options={"SymmetricMode": True}
        )
    except RuntimeError:
        return None
    pivots = lu.U.diagonal()
    if not np.array_equal(lu.perm_r, lu.perm_c) or np.any(pivots == 0):
        return None
    return int(np.count_nonzero(pivots < 0))


def _sparse_smallest(A, config: SolveConfig):
    """Shift-invert Lanczos with an inertia check for missed multiplicities.

    Single-vector Lanczos can return fewer copies of an exactly repeated
    eigenvalue than its multiplicity.  After each pass the number of computed
    eigenvalues below a point in a spectral gap is compared with the exact
    count from the inertia of ``A - tau I``; missing pairs are then sought in
    the orthogonal complement of the pairs already found.
    """
    size = A.shape[0]
    count = config.count
    sigma = -1e-4 * float(A.diagonal().mean())
    lu = spla.splu((A - sigma * sp.eye(size, format="csc")).tocsc())
    rng = np.random.default_rng(config.seed)
    v0 = rng.standard_normal(size)
    extra = max(4, count // 4)

    def lanczos(k, basis):
        if basis is None:
            op = spla.LinearOperator((size, size), matvec=lu.solve, dtype=float)
            start = v0
        else:
            def project(x):
                return x - basis @ (basis.T @ x)

            op = spla.LinearOperator((size, size), matvec=lambda x: project(lu.solve(project(x))), dtype=float)
            start = project(v0)
        try:
            return spla.eigsh(
                A, k=min(k, size - 1), sigma=sigma, which="LM", OPinv=op, v0=start,
                tol=config.tol * 1e-2, maxiter=config.max_iter,
            )
        except spla.ArpackNoConvergence as exc:
            raise ConvergenceError(
                f"ARPACK did not converge: {len(exc.eigenvalues)} of {k} pairs",
            ) from exc

    values, vectors = lanczos(count + extra, None)
    for _ in range(8):
        order = np.argsort(values, kind="stable")
        values, vectors = values[order], vectors[:, order]
        tau = _gap_point(values, count)
        exact = _inertia_below(A, tau)
        if exact is None:
            logger.warning("inertia check unavailable; multiplicities not certified")
            return values[:count], vectors[:, :count], False
        found = int(np.count_nonzero(values < tau))
        if exact == found:
            return values[:count], vectors[:, :count], True
        if exact < found:
            raise ConvergenceError(f"{found} eigenvalues computed below {tau:.6g} but only {exact} exist")
        logger.debug("recovering %d missed eigenpairs below %.6g", exact - found, tau)
        more_vals, more_vecs = lanczos(exact - found + extra, vectors)
        values = np.concatenate([values, more_vals])
        vectors = np.concatenate([vectors, more_vecs], axis=1)
    raise ConvergenceError("could not recover every repeated eigenvalue")


def _gap_point(values: np.ndarray, count: int) -> float:
    """A point strictly between clusters, at or above the ``count``-th value."""
    for j in range(count - 1, len(values) - 1):
        lo, hi = values[j], values[j + 1]
        if hi - lo > 1e-6 * max(1.0, abs(lo)):
            return 0.5 * (lo + hi)
    top = values[-1]
    return top + 1e-6 * max(1.0, abs(top))


def residual_report(H, M, solution: EigenSolution) -> dict:
    """Recompute residuals ``||H u - lam M u||_{M^-1}`` and ``M``-orthonormality.

    The residual norm is measured in the ``M^{-1}`` norm, which equals the
    Euclidean residual of the scaled standard problem.
    """
    mass = _mass_diagonal(M, H.shape[0])
    U = solution.eigenvectors
    HU = H @ U
    R = HU - (mass[:, None] * U) * solution.eigenvalues[None, :]
    residuals = np.sqrt(np.sum(R * R / mass[:, None], axis=0))
    gram = U.T @ (mass[:, None] * U)
    defect = float(np.abs(gram - np.eye(U.shape[1])).max()) if U.size else 0.0
    return {"residuals": np.asarray(residuals), "orthonormality_defect": defect, "gram": gram}


def commutator_lemma_check(H, G, k: int) -> float:
    """Margin of the commutator gap lemma for a symmetric matrix.

    With ``C = HG - GH`` and eigenpairs ``(lam_i, u_i)`` of ``H``::

        sum_{i<=k} (lam_{k+1} - lam_i)^2 <C u_i, G u_i>
            <= sum_{i<=k} (lam_{k+1} - lam_i) ||C u_i||^2

    Returns ``RHS - LHS``, computed from a dense eigendecomposition.
    """
    H = np.asarray(H.toarray() if sp.issparse(H) else H, dtype=float)
    G = np.asarray(G.toarray() if sp.issparse(G) else G, dtype=float)
    if G.ndim == 1:
        G = np.diag(G)
    dim = H.shape[0]
    if not 1 <= k < dim:
        raise ValueError(f"k must satisfy 1 <= k < {dim}")
    values, vectors = np.linalg.eigh(0.5 * (H + H.T))
    C = H @ G - G @ H
    U = vectors[:, :k]
    CU = C @ U
    gaps = values[k] - values[:k]
    lhs = np.sum(gaps**2 * np.einsum("ij,ij->j", CU, G @ U))
    rhs = np.sum(gaps * np.einsum("ij,ij->j", CU, CU))
    return float(rhs - lhs)
