import numpy as np
import pytest

from conftest import complete_graph, metropolis, path_graph
from subspacenet.graph import laplacian_eigenbasis
from subspacenet.subspace import (build_subspace, check_conditions, off_neighborhood_mask,
                                  power_convergence, projector, spectral_radius)


def test_build_subspace_semi_unitary(small_eig):
    basis = build_subspace(small_eig, 3, 2)
    assert basis.u.shape == (24, 6)
    assert (basis.dim, basis.rank) == (24, 6)
    np.testing.assert_allclose(basis.u.T @ basis.u, np.eye(6), atol=1e-12)
    np.testing.assert_allclose(basis.u, np.kron(small_eig.eigenvectors[:, :3], np.eye(2)))


@pytest.mark.parametrize("p", [0, 13])
def test_build_subspace_rank_out_of_range(small_eig, p):
    with pytest.raises(ValueError):
        build_subspace(small_eig, p, 2)


def test_projector(small_basis):
    p_u = projector(small_basis)
    np.testing.assert_allclose(p_u @ p_u, p_u, atol=1e-12)
    np.testing.assert_allclose(p_u, p_u.T, atol=1e-14)
    assert np.trace(p_u) == pytest.approx(small_basis.rank)
    np.testing.assert_array_equal(small_basis.projector, p_u)


def test_off_neighborhood_mask(path3):
    off = off_neighborhood_mask(path3.adjacency, 2)
    assert off.shape == (6, 6)
    assert off[0:2, 4:6].all() and off[4:6, 0:2].all()
    assert off.sum() == 8


def test_spectral_radius():
    assert spectral_radius(np.diag([0.5, -0.9])) == pytest.approx(0.9)
    # asymmetric: largest singular value bounds the eigenvalues
    a = np.array([[0.0, 2.0], [0.0, 0.0]])
    assert spectral_radius(a) == pytest.approx(2.0)


def test_projector_feasible_on_complete_graph(small_basis):
    topo = complete_graph(12)
    rep = check_conditions(projector(small_basis), small_basis, topo, eps=0.01)
    assert rep.feasible
    assert rep.contraction == pytest.approx(0, abs=1e-12)
    assert rep.sparsity_violation == 0


def test_consensus_projector_violates_path_topology():
    topo = path_graph(3)
    basis = build_subspace(laplacian_eigenbasis(topo), 1, 1)
    rep = check_conditions(projector(basis), basis, topo, eps=0.1)
    assert not rep.feasible
    assert rep.sparsity_violation == pytest.approx(2/3)
    assert rep.right_eig_residual < 1e-12


def test_metropolis_on_path():
    topo = path_graph(3)
    basis = build_subspace(laplacian_eigenbasis(topo), 1, 1)
    a = metropolis(topo)
    rep = check_conditions(a, basis, topo, eps=0.1)
    assert rep.feasible
    assert rep.contraction == pytest.approx(2/3)
    assert rep.to_dict()["feasible"] is True


def test_contraction_too_large():
    topo = path_graph(3)
    basis = build_subspace(laplacian_eigenbasis(topo), 1, 1)
    rep = check_conditions(metropolis(topo), basis, topo, eps=0.5)
    assert not rep.feasible


def test_check_conditions_dimension_mismatch(small_basis):
    with pytest.raises(ValueError):
        check_conditions(np.eye(5), small_basis, complete_graph(12), eps=0.01)
    with pytest.raises(ValueError):
        check_conditions(np.eye(24), small_basis, complete_graph(5), eps=0.01)


def test_power_convergence_rate():
    topo = path_graph(3)
    basis = build_subspace(laplacian_eigenbasis(topo), 1, 1)
    decay = power_convergence(metropolis(topo), basis, 50)
    i = np.arange(1, 51)
    np.testing.assert_allclose(decay.norms, (2/3)**i, rtol=1e-8, atol=1e-15)
    assert decay.rate == pytest.approx(2/3)
    assert decay.constant == pytest.approx(1.0, rel=1e-6)
    assert decay.final <= decay.constant*decay.rate**50*(1 + 1e-9)


def test_power_convergence_fixed_points():
    topo = path_graph(4)
    basis = build_subspace(laplacian_eigenbasis(topo), 1, 2)
    fixed = power_convergence(projector(basis), basis, 20)
    np.testing.assert_allclose(fixed.norms, 0.0, atol=1e-12)
    still = power_convergence(np.eye(8), basis, 20)
    np.testing.assert_allclose(still.norms, 1.0)
    assert still.rate == pytest.approx(1.0)
    assert still.constant == pytest.approx(1.0)


def test_projector_deflates_unit_eigenvalues():
    gen = np.random.default_rng(8)
    topo = path_graph(5)
    basis = build_subspace(laplacian_eigenbasis(topo), 2, 2)
    p_u = projector(basis)
    u = basis.u
    q = np.eye(10) - p_u
    s = gen.standard_normal((10, 10))
    a = q @ (s + s.T) @ q/10 + p_u
    dev = a - p_u
    np.testing.assert_allclose(dev @ u, 0.0, atol=1e-10)
    np.testing.assert_allclose(u.T @ dev, 0.0, atol=1e-10)
    for i in (2, 3):
        np.testing.assert_allclose(np.linalg.matrix_power(a, i) - p_u,
                                   np.linalg.matrix_power(dev, i), atol=1e-8)
