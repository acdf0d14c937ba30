# -*- coding: utf-8 -*-
"""Interface-aligned structured meshes of the unit box and phase indicators.

The domain is the open unit cube ``(0,1)^dim`` split into ``n`` equal cells
per axis.  Each cell is entirely solid or entirely fluid; the piecewise
constant indicator ``chi`` (1 = fluid) is the only geometric input the
assembly needs, so interfaces always run along cell faces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeometryError
from .params import DimensionlessParams


@dataclass(frozen=True)
class SolidSlab:
    """Solid occupies the cells with first-axis index below ``index``.

    The interface is the hyperplane ``x_1 = index/n``.  The solid part
    stays connected and touches the outer boundary on a set of positive
    measure in every dimension, so the rigid-support hypothesis required
    by the solidification estimates holds.
    """

    index: int


@dataclass(frozen=True)
class FluidInclusion:
    """Fluid occupies an axis-aligned box of cells strictly inside the domain.

    ``bounds[k] = (lo, hi)`` selects cell indices ``lo <= i < hi`` along
    axis ``k``.  Treated as violating the rigid-support hypothesis, so the
    solidification-mode diagnostics reject it.
    """

    bounds: tuple[tuple[int, int], ...]

    @classmethod
    def central(cls, lo: int, hi: int, dim: int) -> "FluidInclusion":
        """Same index range on every axis."""
        return cls(bounds=tuple((lo, hi) for _ in range(dim)))


Layout = SolidSlab | FluidInclusion


@dataclass(frozen=True)
class MediumGeometry:
    """Structured mesh of ``(0,1)^dim`` with a per-cell fluid indicator.

    Attributes
    ----------
    dim : int
        Space dimension, 1 to 3.
    n : int
        Cells per axis; the mesh step is ``h = 1/n``.
    layout : SolidSlab or FluidInclusion
        Phase arrangement the indicator was built from.
    chi : numpy.ndarray
        Flat (C-order) array of length ``n**dim`` with 1.0 on fluid cells.
    """

    dim: int
    n: int
    layout: Layout
    chi: np.ndarray

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def n_cells(self) -> int:
        return self.n ** self.dim

    @property
    def cell_volume(self) -> float:
        return self.h ** self.dim

    @property
    def n_fluid_cells(self) -> int:
        return int(round(float(self.chi.sum())))

    @property
    def n_solid_cells(self) -> int:
        return self.n_cells - self.n_fluid_cells

    @property
    def meas_fluid(self) -> float:
        """Volume of the fluid part."""
        return self.n_fluid_cells * self.cell_volume

    @property
    def meas_solid(self) -> float:
        return self.n_solid_cells * self.cell_volume

    @property
    def satisfies_rigid_support(self) -> bool:
        """Whether the solid part counts as rigidly supported (connected,
        with positive contact on the outer boundary)."""
        return isinstance(self.layout, SolidSlab)

    def cell_centers(self) -> np.ndarray:
        """(n_cells, dim) array of cell centres, C-order."""
        axes = [np.arange(self.n) for _ in range(self.dim)]
        grids = np.meshgrid(*axes, indexing="ij")
        idx = np.stack([g.ravel() for g in grids], axis=1)
        return (idx + 0.5) * self.h


def build_geometry(dim: int, n: int, layout: Layout) -> MediumGeometry:
    """Construct the mesh and phase indicator for a layout.

    Parameters
    ----------
    dim : int
        Space dimension, 1 to 3.
    n : int
        Cells per axis, at least 2.
    layout : SolidSlab or FluidInclusion
        Phase arrangement; index ranges must keep both phases nonempty
        and the slab interface / inclusion box strictly interior.

    Returns
    -------
    MediumGeometry
    """
    if dim not in (1, 2, 3):
        raise GeometryError(f"dim must be 1, 2 or 3 (got {dim})")
    if n < 2:
        raise GeometryError(f"n must be at least 2 (got {n})")

    shape = (n,) * dim
    if isinstance(layout, SolidSlab):
        k = layout.index
        if not 1 <= k <= n - 1:
            raise GeometryError(
                f"slab index must be strictly interior: 1 <= index <= n-1 "
                f"(got index={k}, n={n})")
        first_axis = np.arange(n).reshape((n,) + (1,) * (dim - 1))
        chi = np.broadcast_to(first_axis >= k, shape).astype(float)
    elif isinstance(layout, FluidInclusion):
        if len(layout.bounds) != dim:
            raise GeometryError(
                f"inclusion needs {dim} per-axis bounds "
                f"(got {len(layout.bounds)})")
        mask = np.ones(shape, dtype=bool)
        for axis, (lo, hi) in enumerate(layout.bounds):
            if not (0 < lo < hi < n):
                raise GeometryError(
                    f"inclusion bounds must satisfy 0 < lo < hi < n on every "
                    f"axis (axis {axis}: lo={lo}, hi={hi}, n={n})")
            coord = np.arange(n).reshape((1,) * axis + (n,) + (1,) * (dim - 1 - axis))
            mask &= (coord >= lo) & (coord < hi)
        chi = mask.astype(float)
    else:
        raise GeometryError(f"unknown layout {layout!r}")

    chi = chi.ravel()
    chi.setflags(write=False)
    return MediumGeometry(dim=dim, n=n, layout=layout, chi=chi)


def refine(geometry: MediumGeometry, factor: int = 2) -> MediumGeometry:
    """Split every cell ``factor`` times per axis, preserving the layout."""
    if factor < 1:
        raise GeometryError(f"refinement factor must be >= 1 (got {factor})")
    layout = geometry.layout
    if isinstance(layout, SolidSlab):
        fine = SolidSlab(index=layout.index * factor)
    else:
        fine = FluidInclusion(
            bounds=tuple((lo * factor, hi * factor) for lo, hi in layout.bounds))
    return build_geometry(geometry.dim, geometry.n * factor, fine)


@dataclass(frozen=True)
class CoefficientFields:
    """Per-cell piecewise-constant coefficient fields of the coupled system."""

    rho_bar: np.ndarray          # density
    alpha_theta_bar: np.ndarray  # thermomechanical coupling
    c_p_bar: np.ndarray          # heat capacity
    kappa_bar: np.ndarray        # conductivity

    def volume_average(self, geometry: MediumGeometry, name: str) -> float:
        field = getattr(self, name)
        return float(field.sum()) * geometry.cell_volume


def coefficient_fields(geometry: MediumGeometry,
                       params: DimensionlessParams) -> CoefficientFields:
    """Blend the phase constants through the indicator.

    Each field equals ``chi*fluid_value + (1-chi)*solid_value`` cell by cell.
    """
    chi = geometry.chi
    blend = lambda f, s: chi * f + (1.0 - chi) * s  # noqa: E731
    return CoefficientFields(
        rho_bar=blend(params.rho_f, params.rho_s),
        alpha_theta_bar=blend(params.alpha_theta_f, params.alpha_theta_s),
        c_p_bar=blend(params.c_pf, params.c_ps),
        kappa_bar=blend(params.kappa_f, params.kappa_s),
    )
