import numpy as np
import pytest
import scipy.linalg
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from univeig.solver import (
    ConvergenceError,
    SolveConfig,
    commutator_lemma_check,
    residual_report,
    solve_smallest,
)


def grid_laplacian(nx, ny, h=1.0):
    d = sp.diags([-np.ones(nx - 1), 2 * np.ones(nx), -np.ones(nx - 1)], [-1, 0, 1]) / h**2
    e = sp.diags([-np.ones(ny - 1), 2 * np.ones(ny), -np.ones(ny - 1)], [-1, 0, 1]) / h**2
    return (sp.kron(d, sp.eye(ny)) + sp.kron(sp.eye(nx), e)).tocsr()


def grid_eigenvalues(nx, ny, count, h=1.0):
    lx = 4 / h**2 * np.sin(np.arange(1, nx + 1) * np.pi / (2 * (nx + 1))) ** 2
    ly = 4 / h**2 * np.sin(np.arange(1, ny + 1) * np.pi / (2 * (ny + 1))) ** 2
    return np.sort(np.add.outer(lx, ly).ravel())[:count]


def random_problem(rng, size):
    A = rng.standard_normal((size, size))
    H = A @ A.T + size * np.eye(size)
    m = rng.uniform(0.5, 2.0, size)
    return H, m


def test_dense_path_matches_lapack_generalized_solver():
    rng = np.random.default_rng(1)
    H, m = random_problem(rng, 40)
    sol = solve_smallest(H, m, SolveConfig(count=6))
    expected = scipy.linalg.eigh(H, np.diag(m), eigvals_only=True)[:6]
    np.testing.assert_allclose(sol.eigenvalues, expected, rtol=1e-12)
    assert sol.info["method"] == "dense"
    gram = sol.eigenvectors.T @ (m[:, None] * sol.eigenvectors)
    np.testing.assert_allclose(gram, np.eye(6), atol=1e-10)


def test_sparse_path_matches_closed_form_grid_spectrum():
    H = grid_laplacian(50, 45)
    sol = solve_smallest(H, None, SolveConfig(count=8, seed=3))
    assert sol.info["method"] == "arpack-shift-invert"
    np.testing.assert_allclose(sol.eigenvalues, grid_eigenvalues(50, 45, 8), rtol=1e-9)
    assert sol.residuals.max() <= 1e-8 * max(1, sol.eigenvalues.max())


def test_sparse_path_returns_every_copy_of_repeated_eigenvalues():
    block = grid_laplacian(30, 30)
    H = sp.block_diag([block] * 3, format="csr")
    sol = solve_smallest(H, None, SolveConfig(count=12))
    expected = np.repeat(grid_eigenvalues(30, 30, 4), 3)
    np.testing.assert_allclose(sol.eigenvalues, expected, rtol=1e-9)
    assert sol.info["count_certified"]


def test_sparse_path_with_mass_matches_scaled_problem():
    H = grid_laplacian(40, 40)
    m = np.full(1600, 0.25)
    sol = solve_smallest(H, sp.diags(m), SolveConfig(count=5))
    np.testing.assert_allclose(sol.eigenvalues, 4 * grid_eigenvalues(40, 40, 5), rtol=1e-9)


def test_repeated_solves_are_bitwise_identical():
    H = grid_laplacian(45, 40)
    a = solve_smallest(H, None, SolveConfig(count=6, seed=7))
    b = solve_smallest(H, None, SolveConfig(count=6, seed=7))
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
    assert np.array_equal(a.eigenvectors, b.eigenvectors)


@pytest.mark.parametrize("size", [30, 1700])
def test_symmetric_permutation_leaves_eigenvalues_unchanged(size):
    rng = np.random.default_rng(size)
    if size > 100:
        H = grid_laplacian(size // 34, 34)
        m = rng.uniform(0.5, 2.0, H.shape[0])
    else:
        H, m = random_problem(rng, size)
        H = sp.csr_matrix(H)
    p = rng.permutation(H.shape[0])
    a = solve_smallest(H, m, SolveConfig(count=5))
    b = solve_smallest(H[p][:, p], m[p], SolveConfig(count=5))
    np.testing.assert_allclose(a.eigenvalues, b.eigenvalues, rtol=1e-8)


@given(c=st.floats(-5.0, 50.0), seed=st.integers(0, 2**16))
def test_mass_shift_moves_every_eigenvalue_by_c(c, seed):
    rng = np.random.default_rng(seed)
    H, m = random_problem(rng, 25)
    a = solve_smallest(H, m, SolveConfig(count=5))
    b = solve_smallest(H + c * np.diag(m), m, SolveConfig(count=5))
    np.testing.assert_allclose(b.eigenvalues, a.eigenvalues + c, rtol=1e-9, atol=1e-9)


def test_eigenvalues_are_nondecreasing():
    sol = solve_smallest(grid_laplacian(12, 12), None, SolveConfig(count=20))
    assert np.all(np.diff(sol.eigenvalues) >= 0)


def test_residual_report_recomputes_contract():
    rng = np.random.default_rng(0)
    H, m = random_problem(rng, 20)
    sol = solve_smallest(H, m, SolveConfig(count=4))
    rep = residual_report(H, m, sol)
    assert rep["residuals"].max() < 1e-10 * sol.eigenvalues.max()
    assert rep["orthonormality_defect"] < 1e-12


def test_contract_violation_raises_convergence_error():
    rng = np.random.default_rng(0)
    H, m = random_problem(rng, 20)
    with pytest.raises(ConvergenceError) as info:
        solve_smallest(H * 1e6, m, SolveConfig(count=4, tol=1e-300))
    assert info.value.residuals is not None


def test_input_validation():
    with pytest.raises(ValueError, match="symmetric"):
        solve_smallest(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ValueError, match="diagonal"):
        solve_smallest(np.eye(3), np.ones((3, 3)), SolveConfig(count=1))
    with pytest.raises(ValueError):
        solve_smallest(np.eye(3), -np.ones(3), SolveConfig(count=1))
    with pytest.raises(ValueError):
        solve_smallest(np.eye(3), None, SolveConfig(count=4))
    with pytest.raises(ValueError):
        SolveConfig(count=0)
    with pytest.raises(ValueError):
        SolveConfig(tol=0)


symmetric = st.integers(2, 24).flatmap(
    lambda d: st.tuples(
        arrays(np.float64, (d, d), elements=st.floats(-10, 10)),
        arrays(np.float64, (d,), elements=st.floats(-10, 10)),
    )
)


@given(data=symmetric)
def test_commutator_gap_lemma_holds_for_every_k(data):
    A, g = data
    H = A + A.T
    scale = max(np.linalg.norm(H, 2), 1e-300) ** 3 * max(np.abs(g).max(), 1.0) ** 2
    for k in range(1, H.shape[0]):
        assert commutator_lemma_check(H, g, k) >= -1e-10 * scale


def test_commutator_lemma_rejects_bad_k():
    with pytest.raises(ValueError):
        commutator_lemma_check(np.eye(3), np.ones(3), 3)
