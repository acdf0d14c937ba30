# -*- coding: utf-8 -*-
"""Galerkin assembly against independently coded reference integrals.

The reference implementations in :mod:`oracles` build every form with
explicit loops over cells and closed-form 1D element matrices, so any
indexing or scaling slip in the vectorized production assembly shows up
as a disagreement here.
"""

import numpy as np
import pytest

from thermofsi.assembly import (LoadAssembler, assemble_system, build_basis,
                                eval_scalar, eval_vector, korn_constant,
                                solid_vector_dofs, with_params)
from thermofsi.geometry import FluidInclusion, SolidSlab, build_geometry
from thermofsi.params import nondimensionalize, reference_physical

import oracles

GEOMETRIES = [
    pytest.param(build_geometry(1, 3, SolidSlab(index=1)), id="1d-slab"),
    pytest.param(build_geometry(2, 3, SolidSlab(index=2)), id="2d-slab"),
    pytest.param(build_geometry(2, 4, FluidInclusion.central(1, 3, 2)),
                 id="2d-inclusion"),
    pytest.param(build_geometry(3, 2, SolidSlab(index=1)), id="3d-slab"),
]

PARAMS = nondimensionalize(reference_physical())


def _system(geometry, quad_points=2):
    return assemble_system(geometry, PARAMS, quad_points=quad_points)


def _max_diff(sparse_mat, dense_mat):
    return float(np.abs(sparse_mat.toarray() - dense_mat).max())


@pytest.mark.parametrize("geometry", GEOMETRIES)
def test_probes_match_reference_assembly(geometry):
    system = _system(geometry)
    p = system.probes
    chi = geometry.chi
    solid = 1.0 - chi
    pairs = [
        (p.M_th_f, oracles.scalar_form(geometry, chi)),
        (p.M_th_s, oracles.scalar_form(geometry, solid)),
        (p.K_th_f, oracles.scalar_gradient_form(geometry, chi)),
        (p.K_th_s, oracles.scalar_gradient_form(geometry, solid)),
        (p.M_w_f, oracles.vector_mass(geometry, chi)),
        (p.M_w_s, oracles.vector_mass(geometry, solid)),
        (p.Dv_f, oracles.div_div_form(geometry, chi)),
        (p.Dv_s, oracles.div_div_form(geometry, solid)),
        (p.DD_f, oracles.sym_grad_form(geometry, chi)),
        (p.DD_s, oracles.sym_grad_form(geometry, solid)),
        (p.A3_f, oracles.coupling_form(geometry, chi)),
        (p.A3_s, oracles.coupling_form(geometry, solid)),
        (p.cell_div, oracles.cell_average_divergence(geometry)),
    ]
    for mat, ref in pairs:
        assert _max_diff(mat, ref) < 1e-14


@pytest.mark.parametrize("geometry", GEOMETRIES)
def test_vector_stiffness_is_componentwise_scalar_stiffness(geometry):
    probes = _system(geometry).probes
    dim = geometry.dim
    for K_w, K_th in ((probes.K_w_f, oracles.scalar_gradient_form(geometry, geometry.chi)),
                      (probes.K_w_s, oracles.scalar_gradient_form(geometry, 1.0 - geometry.chi))):
        dense = K_w.toarray()
        n_th = K_th.shape[0]
        for c in range(dim):
            block = dense[c::dim, c::dim]
            assert float(np.abs(block - K_th).max()) < 1e-14
        # off-component blocks vanish: the form has no cross terms
        for c in range(dim):
            for d in range(dim):
                if c != d:
                    assert float(np.abs(dense[c::dim, d::dim]).max()) == 0.0


@pytest.mark.parametrize("geometry", GEOMETRIES)
def test_system_matrices_are_probe_combinations(geometry):
    system = _system(geometry)
    p, prm = system.probes, PARAMS
    combos = [
        (system.A, prm.alpha_tau * (prm.rho_f * p.M_w_f + prm.rho_s * p.M_w_s)),
        (system.A1, prm.alpha_nu * p.Dv_f + prm.alpha_mu * p.DD_f),
        (system.A2, prm.alpha_p * p.Dv_f + prm.alpha_eta * p.Dv_s
                    + prm.alpha_lambda * p.DD_s),
        (system.A3, prm.alpha_theta_f * p.A3_f + prm.alpha_theta_s * p.A3_s),
        (system.B, prm.c_pf * p.M_th_f + prm.c_ps * p.M_th_s),
        (system.B1, prm.kappa_f * p.K_th_f + prm.kappa_s * p.K_th_s),
        (system.B2, prm.alpha_theta_f * p.B2_f + prm.alpha_theta_s * p.B2_s),
    ]
    for mat, expected in combos:
        scale = max(float(np.abs(expected.toarray()).max()), 1.0)
        assert _max_diff(mat, expected.toarray()) < 1e-15 * scale


@pytest.mark.parametrize("geometry", GEOMETRIES)
def test_heat_coupling_blocks_are_transposes(geometry):
    system = _system(geometry)
    gap = (system.B2 - system.A3.T).tocoo()
    worst = float(np.abs(gap.data).max()) if gap.nnz else 0.0
    assert worst <= 2.5e-15


@pytest.mark.parametrize("geometry", GEOMETRIES)
def test_spectral_signs(geometry):
    system = _system(geometry)
    for name in ("A", "B", "B1"):
        w = np.linalg.eigvalsh(getattr(system, name).toarray())
        assert w.min() > 0.0, f"{name} must be positive definite"
    for name in ("A1", "A2"):
        w = np.linalg.eigvalsh(getattr(system, name).toarray())
        assert w.min() > -1e-13 * max(w.max(), 1.0), \
            f"{name} must be positive semidefinite"


@pytest.mark.parametrize("geometry", GEOMETRIES)
def test_quadrature_order_invariance(geometry):
    # every form is a polynomial a two-point Gauss rule already integrates
    # exactly, so raising the rule must not change any matrix
    coarse = _system(geometry, quad_points=2)
    fine = _system(geometry, quad_points=3)
    for name in ("A", "A1", "A2", "A3", "B", "B1", "B2"):
        a = getattr(coarse, name).toarray()
        b = getattr(fine, name).toarray()
        scale = max(float(np.abs(a).max()), 1e-30)
        assert float(np.abs(a - b).max()) < 1e-13 * scale


def test_with_params_matches_fresh_assembly():
    import dataclasses
    geometry = build_geometry(2, 3, SolidSlab(index=1))
    system = _system(geometry)
    other = dataclasses.replace(PARAMS, alpha_p=3.5, kappa_s=0.125)
    reweighted = with_params(system, other)
    fresh = assemble_system(geometry, other)
    for name in ("A", "A1", "A2", "A3", "B", "B1", "B2"):
        assert _max_diff(getattr(reweighted, name),
                         getattr(fresh, name).toarray()) == 0.0
    assert reweighted.probes is system.probes


@pytest.mark.parametrize("geometry", GEOMETRIES)
def test_constant_scalar_load(geometry):
    basis = build_basis(geometry)
    loads = LoadAssembler(geometry, basis)
    nq = loads.points.shape[1]
    ones = np.ones((geometry.n_cells, nq))
    got = loads.scalar_load(ones)
    ref = oracles.scalar_load(geometry, np.ones(geometry.n_cells))
    np.testing.assert_allclose(got, ref, atol=1e-15)
    # every interior node gathers (h/2)^dim from each of its 2^dim cells
    np.testing.assert_allclose(got, geometry.cell_volume, rtol=1e-13)


@pytest.mark.parametrize("geometry", GEOMETRIES)
def test_constant_vector_load_components(geometry):
    basis = build_basis(geometry)
    loads = LoadAssembler(geometry, basis)
    nq = loads.points.shape[1]
    values = np.zeros((geometry.n_cells, nq, geometry.dim))
    values[..., geometry.dim - 1] = 2.0
    got = loads.vector_load(values)
    for c in range(geometry.dim):
        expected = 2.0 * geometry.cell_volume if c == geometry.dim - 1 else 0.0
        np.testing.assert_allclose(got[c::geometry.dim], expected, atol=1e-15)


@pytest.mark.parametrize("geometry", GEOMETRIES)
def test_divergence_load_of_constant_vanishes(geometry):
    # zero-trace test functions: a globally constant scalar integrates to
    # zero against every divergence
    basis = build_basis(geometry)
    loads = LoadAssembler(geometry, basis)
    nq = loads.points.shape[1]
    got = loads.divergence_load(np.ones((geometry.n_cells, nq)))
    np.testing.assert_allclose(got, 0.0, atol=1e-14)


@pytest.mark.parametrize("geometry", GEOMETRIES)
def test_divergence_load_matches_cell_div_probe(geometry):
    # a cellwise-constant scalar c integrates against div(phi) as
    # sum_k c_k |cell| (cell average of div phi on cell k)
    rng = np.random.default_rng(7)
    system = _system(geometry)
    loads = LoadAssembler(geometry, system.basis)
    nq = loads.points.shape[1]
    c = rng.standard_normal(geometry.n_cells)
    got = loads.divergence_load(np.repeat(c[:, None], nq, axis=1))
    expected = geometry.cell_volume * (system.probes.cell_div.T @ c)
    np.testing.assert_allclose(got, expected, atol=1e-13)


def test_integrate_scalar_weighted():
    geometry = build_geometry(2, 4, SolidSlab(index=2))
    basis = build_basis(geometry)
    loads = LoadAssembler(geometry, basis)
    nq = loads.points.shape[1]
    ones = np.ones((geometry.n_cells, nq))
    assert loads.integrate_scalar(ones) == pytest.approx(1.0)
    assert loads.integrate_scalar(ones, cell_weight=geometry.chi) == pytest.approx(0.5)
    # linear integrand x_0 integrates to 1/2 with a 2-point rule
    x0 = loads.points[..., 0]
    assert loads.integrate_scalar(x0) == pytest.approx(0.5)


@pytest.mark.parametrize("geometry", GEOMETRIES)
def test_eval_scalar_reproduces_nodal_values(geometry):
    rng = np.random.default_rng(3)
    basis = build_basis(geometry)
    coeffs = rng.standard_normal(basis.n_th)
    maps = basis.maps
    interior_nodes = maps.nodes_of_interior
    pts = maps.node_coords[interior_nodes]
    got = eval_scalar(geometry, basis, coeffs, pts)
    np.testing.assert_allclose(got, coeffs, atol=1e-13)
    # boundary nodes evaluate to zero
    boundary = np.nonzero(maps.interior_of_node < 0)[0]
    got_b = eval_scalar(geometry, basis, coeffs, maps.node_coords[boundary])
    np.testing.assert_allclose(got_b, 0.0, atol=1e-13)


def test_eval_scalar_is_multilinear_within_cells():
    # inside one cell a Q1 expansion is linear along each axis, so the
    # value at the cell centre is the mean of the corner values
    geometry = build_geometry(2, 3, SolidSlab(index=1))
    basis = build_basis(geometry)
    rng = np.random.default_rng(11)
    coeffs = rng.standard_normal(basis.n_th)
    maps = basis.maps
    centers = geometry.cell_centers()
    got = eval_scalar(geometry, basis, coeffs, centers)
    corner_vals = np.where(
        maps.interior_of_node[maps.corners] >= 0,
        coeffs[np.clip(maps.interior_of_node[maps.corners], 0, None)], 0.0)
    np.testing.assert_allclose(got, corner_vals.mean(axis=1), atol=1e-13)


def test_eval_vector_component_layout():
    geometry = build_geometry(2, 3, SolidSlab(index=1))
    basis = build_basis(geometry)
    rng = np.random.default_rng(5)
    coeffs = rng.standard_normal(basis.n_w)
    pts = rng.uniform(0.2, 0.8, size=(6, 2))
    vec = eval_vector(geometry, basis, coeffs, pts)
    for c in range(2):
        np.testing.assert_allclose(
            vec[:, c], eval_scalar(geometry, basis, coeffs[c::2], pts))


def test_solid_vector_dofs_slab():
    geometry = build_geometry(1, 4, SolidSlab(index=2))
    basis = build_basis(geometry)
    idx = solid_vector_dofs(geometry, basis)
    # interior nodes at x=1/4, 1/2 touch solid cells; x=3/4 does not
    assert idx.tolist() == [0, 1]


def test_korn_constant_frozen_values():
    cases = [
        (build_geometry(1, 4, SolidSlab(index=2)), 1.04703271541891),
        (build_geometry(2, 4, SolidSlab(index=2)), 1.55999685498705),
        (build_geometry(2, 4, FluidInclusion.central(1, 3, 2)), 1.48873858158955),
        (build_geometry(3, 2, SolidSlab(index=1)), 1.24163870214594),
    ]
    for geometry, expected in cases:
        assert korn_constant(geometry) == pytest.approx(expected, rel=1e-10)


def test_korn_constant_exceeds_one():
    # D(phi) drops the skew part, so it never dominates the full seminorm
    for n in (3, 4, 5):
        assert korn_constant(build_geometry(2, n, SolidSlab(index=1))) > 1.0
