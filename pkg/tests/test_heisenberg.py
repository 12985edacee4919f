import numpy as np
import pytest

from univeig.heisenberg import HeisenbergGrid, assemble_kohn, check_kohn_inequalities, solve_kohn
from univeig.solver import SolveConfig, solve_smallest


def dense_spectrum(op, count=None):
    L = op.matrix.toarray() / op.mass[:, None]
    vals = np.linalg.eigvalsh(0.5 * (L + L.T))
    return vals if count is None else vals[:count]


def dirichlet_1d(count, length):
    h = length / (count + 1)
    p = np.arange(1, count + 1)
    return 4 / h**2 * np.sin(p * np.pi * h / (2 * length)) ** 2


def test_frozen_coefficients_give_five_point_laplacian_in_xy():
    grid = HeisenbergGrid(1, (0.0, 0.0, 0.0), (1.0, 2.0, 1.0), (9, 11, 4))
    vals = dense_spectrum(assemble_kohn(grid, frozen=True))
    expected = np.sort(np.add.outer(dirichlet_1d(9, 1.0), dirichlet_1d(11, 2.0)).ravel())
    np.testing.assert_allclose(vals, np.repeat(expected, 4), rtol=1e-10)


def test_frozen_spectrum_approaches_separable_continuum():
    grid = HeisenbergGrid(1, (0.0, 0.0, 0.0), (1.0, 2.0, 1.0), (31, 63, 2))
    vals = solve_smallest_frozen(grid, 6)
    cont = np.sort([np.pi**2 * (p**2 + q**2 / 4) for p in range(1, 4) for q in range(1, 5)])
    # each continuum level appears once per t-node
    np.testing.assert_allclose(vals[::2], cont[:3], rtol=3e-3)


def solve_smallest_frozen(grid, count):
    op = assemble_kohn(grid, frozen=True)
    return solve_smallest(op.matrix, op.mass, SolveConfig(count=count)).eigenvalues


@pytest.mark.parametrize("scheme", ["forward-backward", "centered"])
@pytest.mark.parametrize("n", [1, 2])
def test_operator_is_exactly_symmetric_and_positive_definite(scheme, n):
    grid = HeisenbergGrid.box(n, (-0.5, 0.7), 3 if n == 2 else 5)
    op = assemble_kohn(grid, scheme)
    assert (op.matrix != op.matrix.T).nnz == 0
    assert dense_spectrum(op, 1)[0] > 0


def test_matrix_is_the_weighted_gram_sum_of_field_operators():
    grid = HeisenbergGrid.box(1, (0.0, 1.0), 4)
    op = assemble_kohn(grid)
    gram = sum(0.5 * (A.T @ A) for A in op.fields.values())
    np.testing.assert_allclose(op.matrix.toarray(), grid.cell_volume * gram.toarray(), atol=1e-9)
    assert set(op.fields) == {"X1:forward", "Y1:forward", "X1:backward", "Y1:backward"}


def test_field_operator_applies_vector_field_to_linear_functions():
    # X = d/dx + (y/2) d/dt on u = t gives y/2 at nodes away from the boundary
    grid = HeisenbergGrid.box(1, (0.0, 1.0), 6)
    op = assemble_kohn(grid)
    x, y, t = np.meshgrid(*(grid.axis_coordinates(a) for a in range(3)), indexing="ij")
    out = (op.fields["X1:forward"] @ t.ravel()).reshape(7, 7, 7)
    yo = grid.axis_coordinates(1, 0, 6)
    np.testing.assert_allclose(out[2:5, 2:5, 2:5], np.broadcast_to(yo[2:5][None, :, None] / 2, (3, 3, 3)))


def test_spectrum_is_invariant_under_t_translation():
    grid = HeisenbergGrid.box(1, (0.0, 1.0), 6)
    a = dense_spectrum(assemble_kohn(grid), 10)
    b = dense_spectrum(assemble_kohn(grid.shifted(2, 3.7)), 10)
    np.testing.assert_allclose(a, b, rtol=1e-10)


def test_dirichlet_monotonicity_on_nested_boxes():
    # same spacing, so the small grid's operator is a principal submatrix of the large one
    small = HeisenbergGrid(1, (0.0, 0.0, 0.0), (1.0, 1.0, 1.0), (7, 7, 7))
    large = HeisenbergGrid(1, (0.0, 0.0, 0.0), (1.25, 1.25, 1.25), (9, 9, 9))
    np.testing.assert_allclose(small.spacings, large.spacings)
    a = dense_spectrum(assemble_kohn(small), 12)
    b = dense_spectrum(assemble_kohn(large), 12)
    assert np.all(b <= a + 1e-9)
    assert b[0] < a[0]


def test_centered_scheme_pairs_modes_and_misses_the_continuum():
    grid = HeisenbergGrid(1, (0.0, 0.0, 0.0), (1.0, 2.0, 1.0), (12, 12, 1))
    vals = dense_spectrum(assemble_kohn(grid, "centered", frozen=True), 4)
    good = dense_spectrum(assemble_kohn(grid, frozen=True), 1)
    assert vals[0] < 0.6 * np.pi**2 * 1.25
    assert good[0] == pytest.approx(np.pi**2 * 1.25, rel=2e-2)


def test_solve_kohn_orders_positive_eigenvalues():
    grid = HeisenbergGrid.box(1, (0.0, 1.0), 8)
    sol = solve_kohn(grid, 6)
    assert sol.eigenvalues[0] > 0
    assert np.all(np.diff(sol.eigenvalues) >= 0)
    np.testing.assert_allclose(sol.eigenvalues, dense_spectrum(assemble_kohn(grid), 6), rtol=1e-9)


def test_theorem_check_on_grid_spectrum_and_equal_spectrum():
    sol = solve_kohn(HeisenbergGrid.box(1, (0.0, 1.0), 8), 11)
    gap, bounds = check_kohn_inequalities(sol.eigenvalues, 1, range(1, 11))
    assert gap.satisfied and bounds.satisfied
    flat, _ = check_kohn_inequalities([3.0] * 6, 1, range(1, 6))
    assert all(row.margin == 0 for row in flat.rows)


def test_invalid_grids_and_requests():
    with pytest.raises(ValueError):
        HeisenbergGrid(0, (), (), ())
    with pytest.raises(ValueError):
        HeisenbergGrid(1, (0, 0, 0), (1, 1, 1), (3, 0, 3))
    with pytest.raises(ValueError):
        HeisenbergGrid(1, (0, 0, 1), (1, 1, 1), (3, 3, 3))
    with pytest.raises(ValueError):
        HeisenbergGrid(1, (0, 0), (1, 1), (3, 3))
    grid = HeisenbergGrid.box(1, (0.0, 1.0), 2)
    with pytest.raises(ValueError):
        solve_kohn(grid, 8)
    with pytest.raises(ValueError):
        assemble_kohn(grid, "upwind")
