# -*- coding: utf-8 -*-
"""Mesh construction, phase indicators, and coefficient blending."""

import numpy as np
import pytest

from thermofsi.errors import GeometryError
from thermofsi.geometry import (FluidInclusion, SolidSlab, build_geometry,
                                coefficient_fields, refine)
from thermofsi.params import nondimensionalize, reference_physical


def test_slab_indicator_1d():
    g = build_geometry(1, 4, SolidSlab(index=2))
    assert g.chi.tolist() == [0.0, 0.0, 1.0, 1.0]
    assert g.h == 0.25
    assert g.meas_fluid == pytest.approx(0.5)
    assert g.meas_solid == pytest.approx(0.5)
    assert g.satisfies_rigid_support


def test_slab_indicator_2d_rows():
    g = build_geometry(2, 4, SolidSlab(index=1))
    chi = g.chi.reshape(4, 4)
    # first axis is the slab axis: row 0 solid, rows 1..3 fluid
    assert chi[0].tolist() == [0.0] * 4
    assert chi[1:].min() == 1.0
    assert g.meas_fluid == pytest.approx(0.75)


def test_inclusion_indicator_2d():
    g = build_geometry(2, 4, FluidInclusion.central(1, 3, 2))
    chi = g.chi.reshape(4, 4)
    expected = np.zeros((4, 4))
    expected[1:3, 1:3] = 1.0
    np.testing.assert_array_equal(chi, expected)
    assert g.n_fluid_cells == 4
    assert not g.satisfies_rigid_support


def test_inclusion_anisotropic_bounds():
    g = build_geometry(2, 5, FluidInclusion(bounds=((1, 2), (2, 4))))
    chi = g.chi.reshape(5, 5)
    assert chi.sum() == 2.0
    assert chi[1, 2] == 1.0 and chi[1, 3] == 1.0


def test_measures_partition_unit_volume():
    for dim, n in ((1, 5), (2, 3), (3, 2)):
        g = build_geometry(dim, n, SolidSlab(index=1))
        assert g.meas_fluid + g.meas_solid == pytest.approx(1.0)
        assert g.n_cells == n ** dim
        assert g.cell_volume == pytest.approx((1.0 / n) ** dim)


def test_build_geometry_rejections():
    with pytest.raises(GeometryError, match="dim"):
        build_geometry(4, 4, SolidSlab(index=2))
    with pytest.raises(GeometryError, match="at least 2"):
        build_geometry(2, 1, SolidSlab(index=1))
    with pytest.raises(GeometryError, match="strictly interior"):
        build_geometry(2, 4, SolidSlab(index=0))
    with pytest.raises(GeometryError, match="strictly interior"):
        build_geometry(2, 4, SolidSlab(index=4))
    with pytest.raises(GeometryError, match="bounds"):
        build_geometry(2, 4, FluidInclusion(bounds=((1, 3),)))
    with pytest.raises(GeometryError, match="0 < lo < hi < n"):
        build_geometry(2, 4, FluidInclusion(bounds=((0, 3), (1, 3))))
    with pytest.raises(GeometryError, match="0 < lo < hi < n"):
        build_geometry(2, 4, FluidInclusion(bounds=((1, 4), (1, 3))))


def test_refine_preserves_phase_measures():
    coarse = build_geometry(2, 4, FluidInclusion.central(1, 3, 2))
    fine = refine(coarse, factor=3)
    assert fine.n == 12
    assert fine.meas_fluid == pytest.approx(coarse.meas_fluid)
    assert fine.meas_solid == pytest.approx(coarse.meas_solid)
    # indicator refines cell-by-cell: block-expand the coarse one
    expanded = np.kron(coarse.chi.reshape(4, 4), np.ones((3, 3)))
    np.testing.assert_array_equal(fine.chi.reshape(12, 12), expanded)


def test_refine_slab_keeps_interface_position():
    coarse = build_geometry(1, 4, SolidSlab(index=2))
    fine = refine(coarse)
    assert isinstance(fine.layout, SolidSlab) and fine.layout.index == 4
    assert fine.meas_solid == pytest.approx(0.5)


def test_cell_centers_c_order():
    g = build_geometry(2, 2, SolidSlab(index=1))
    np.testing.assert_allclose(
        g.cell_centers(),
        [[0.25, 0.25], [0.25, 0.75], [0.75, 0.25], [0.75, 0.75]])


def test_coefficient_fields_blend():
    g = build_geometry(1, 4, SolidSlab(index=2))
    params = nondimensionalize(reference_physical())
    fields = coefficient_fields(g, params)
    np.testing.assert_allclose(
        fields.rho_bar,
        [params.rho_s, params.rho_s, params.rho_f, params.rho_f])
    np.testing.assert_allclose(
        fields.kappa_bar,
        [params.kappa_s, params.kappa_s, params.kappa_f, params.kappa_f])
    avg = fields.volume_average(g, "c_p_bar")
    assert avg == pytest.approx(0.5 * (params.c_ps + params.c_pf))
