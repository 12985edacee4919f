import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from univeig.estimators import InequalityAudit, KohnSpectrum, MeshSpectrum
from univeig.heisenberg import HeisenbergGrid
from univeig.mesh import make_disk, make_icosphere


def test_params_roundtrip_and_clone():
    est = MeshSpectrum(n_eigenvalues=7, potential="geometric", coefficient=0.25)
    assert est.get_params()["coefficient"] == 0.25
    twin = clone(est)
    assert twin.get_params() == est.get_params()
    est.set_params(n_eigenvalues=9)
    assert est.n_eigenvalues == 9


def test_unfitted_estimators_refuse_to_report():
    with pytest.raises(NotFittedError):
        MeshSpectrum().to_sample()
    with pytest.raises(NotFittedError):
        KohnSpectrum().transform()
    with pytest.raises(NotFittedError):
        InequalityAudit().transform()


def test_mesh_spectrum_fit_and_sample():
    est = MeshSpectrum(n_eigenvalues=10).fit(make_icosphere(3))
    assert est.transform().shape == (1, 10)
    sample = est.to_sample()
    assert sample.n == 2 and sample.size == 10
    assert sample.delta_sup == pytest.approx(1.0, rel=3e-2)
    np.testing.assert_allclose(est.deltas_, 1.0, rtol=2e-2)
    assert np.all(est.q_integrals_ == 0)


def test_quarter_geometric_potential_zeroes_every_delta():
    est = MeshSpectrum(n_eigenvalues=12, potential="geometric", coefficient=0.25).fit(make_icosphere(3))
    assert np.all(est.deltas_ == 0.0)
    assert est.to_sample().delta_sup == 0.0


def test_dirichlet_disk_drops_boundary_vertices():
    mesh = make_disk(8)
    est = MeshSpectrum(n_eigenvalues=4).fit(mesh)
    assert len(est.interior_) == mesh.n_vertices - len(mesh.boundary_vertices)
    assert est.eigenvectors_.shape == (len(est.interior_), 4)


def test_tabulated_potential_matches_constant():
    mesh = make_icosphere(2)
    a = MeshSpectrum(n_eigenvalues=5, potential="constant", coefficient=2.0).fit(mesh)
    b = MeshSpectrum(n_eigenvalues=5, potential="tabulated", table=np.full(mesh.n_vertices, 2.0)).fit(mesh)
    np.testing.assert_allclose(a.eigenvalues_, b.eigenvalues_, rtol=1e-12)


@pytest.mark.parametrize(
    "kwargs,exc",
    [
        ({"potential": "cubic"}, ValueError),
        ({"potential": "tabulated"}, ValueError),
        ({"potential": "tabulated", "table": [1.0, 2.0]}, ValueError),
        ({"n_eigenvalues": 1}, ValueError),
        ({"n_eigenvalues": 10**6}, ValueError),
    ],
)
def test_mesh_spectrum_rejects_bad_settings(kwargs, exc):
    with pytest.raises(exc):
        MeshSpectrum(**kwargs).fit(make_icosphere(1))


def test_mesh_spectrum_rejects_non_mesh_input():
    with pytest.raises(TypeError):
        MeshSpectrum().fit(np.zeros((3, 3)))


def test_kohn_spectrum():
    est = KohnSpectrum(n_eigenvalues=5).fit(HeisenbergGrid.box(1, (0.0, 1.0), 6))
    assert est.eigenvalues_[0] > 0
    with pytest.raises(ValueError):
        KohnSpectrum(scheme="upwind").fit(HeisenbergGrid.box(1, (0.0, 1.0), 4))


def test_audit_runs_every_theorem():
    est = MeshSpectrum(n_eigenvalues=12).fit(make_icosphere(3))
    audit = InequalityAudit(theorems=["yang", "reilly", "reilly-chain"], k_max=10, tolerance=1e-3)
    audit.fit(est.to_sample(), **est.geometry_inputs())
    assert audit.satisfied_
    assert [len(r.rows) for r in audit.reports_] == [10, 1, 9]
    assert audit.reports_[2].rows[0].k == 2
    assert len(audit.transform()) == 3


def test_audit_rejects_empty_and_unknown_theorems():
    with pytest.raises(ValueError, match="empty"):
        InequalityAudit(theorems=[]).fit()
    with pytest.raises(ValueError, match="unknown"):
        InequalityAudit(theorems=["ppw"]).fit()
