# -*- coding: utf-8 -*-
"""Conforming Galerkin assembly on the structured interface-aligned mesh.

Both unknown fields use continuous piecewise d-linear nodal elements
vanishing on the boundary of the unit box: a scalar basis for the
temperature and its d-fold vector version for the displacement.  All
integrands are polynomials of fixed degree per cell (the coefficient
fields are constant per cell), so tensorized Gauss quadrature with two
points per axis evaluates every matrix entry exactly.

The assembled operators follow the naming A, A1, A2, A3, B, B1, B2:

=====  =============================================================
A      weighted mass            ``alpha_tau * rho_bar * (phi, phi)``
A1     fluid dissipation        ``chi*(alpha_nu div:div + alpha_mu D:D)``
A2     stiffness                ``chi*alpha_p div:div + (1-chi)*(alpha_eta
                                div:div + alpha_lambda D:D)``
A3     coupling (n_th x n_w)    ``alpha_theta_bar * (psi, div phi)``
B      heat mass                ``c_p_bar * (psi, psi)``
B1     conduction               ``kappa_bar * (grad psi, grad psi)``
B2     coupling (n_w x n_th)    ``alpha_theta_bar * (div phi, psi)``
=====  =============================================================

B2 is assembled from its own integrand loop, never copied from A3; the
exact transpose relation between the two is what makes the coupling
terms cancel in the discrete energy identity, and is asserted in tests
rather than assumed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from numpy.polynomial.legendre import leggauss
from scipy.linalg import eigh

from .geometry import CoefficientFields, MediumGeometry, coefficient_fields
from .params import DimensionlessParams

__all__ = [
    "Basis",
    "DofMaps",
    "AssembledSystem",
    "LoadAssembler",
    "build_basis",
    "dof_maps",
    "assemble_system",
    "with_params",
    "korn_constant",
    "dump_matrix_triplets",
]


# ---------------------------------------------------------------------------
# reference cell
# ---------------------------------------------------------------------------

def _gauss_rule(npts: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre points and weights on [0, 1]."""
    x, w = leggauss(npts)
    return 0.5 * (x + 1.0), 0.5 * w


def _tensor_rule(dim: int, npts: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensorized rule on the unit reference cell: (nq, dim) points, (nq,) weights."""
    p1, w1 = _gauss_rule(npts)
    grids = np.meshgrid(*([p1] * dim), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    wgrids = np.meshgrid(*([w1] * dim), indexing="ij")
    wq = np.ones(pts.shape[0])
    for g in wgrids:
        wq = wq * g.ravel()
    return pts, wq


def _local_offsets(dim: int) -> np.ndarray:
    """Corner offsets of the reference cell in C order, shape (2**dim, dim)."""
    return np.array(list(itertools.product((0, 1), repeat=dim)), dtype=np.int64)


def _reference_basis(dim: int, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Shape functions and gradients at reference points.

    Returns
    -------
    N : (ldof, nq) values
    dN : (ldof, dim, nq) gradients
    """
    offsets = _local_offsets(dim)
    # one_d[a, q, k] = factor of shape function a along axis k at point q
    one_d = np.where(offsets[:, None, :] == 1, pts[None, :, :], 1.0 - pts[None, :, :])
    N = one_d.prod(axis=2)
    sign = np.where(offsets == 1, 1.0, -1.0)
    ldof, nq = N.shape
    dN = np.empty((ldof, dim, nq))
    for k in range(dim):
        rest = np.ones((ldof, nq))
        for j in range(dim):
            if j != k:
                rest = rest * one_d[:, :, j]
        dN[:, k, :] = sign[:, k][:, None] * rest
    return N, dN


@dataclass(frozen=True)
class _LocalForms:
    """Exact integrals over the unit reference cell (h-scaling applied later)."""

    M: np.ndarray     # (ldof, ldof)            int N_a N_b
    G: np.ndarray     # (ldof, dim, ldof, dim)  int dN_a/dx_p dN_b/dx_q
    C: np.ndarray     # (ldof, ldof, dim)       int N_a dN_b/dx_j
    CT: np.ndarray    # (ldof, ldof, dim)       int dN_a/dx_i N_b
    div: np.ndarray   # (ldof, dim)             int dN_a/dx_j


def _local_forms(dim: int, quad_points: int) -> _LocalForms:
    pts, wq = _tensor_rule(dim, quad_points)
    N, dN = _reference_basis(dim, pts)
    M = np.einsum("q,aq,bq->ab", wq, N, N)
    G = np.einsum("q,apq,bsq->apbs", wq, dN, dN)
    C = np.einsum("q,aq,bjq->abj", wq, N, dN)
    # same integral as C transposed, but from its own integrand expression
    CT = np.einsum("q,aiq,bq->abi", wq, dN, N)
    div = np.einsum("q,ajq->aj", wq, dN)
    return _LocalForms(M=M, G=G, C=C, CT=CT, div=div)


# ---------------------------------------------------------------------------
# degrees of freedom
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DofMaps:
    """Index plumbing between nodes, cells and interior degrees of freedom."""

    corners: np.ndarray            # (n_cells, 2**dim) flat node id of cell corners
    interior_of_node: np.ndarray   # ((n+1)**dim,) interior index, -1 on boundary
    nodes_of_interior: np.ndarray  # (n_th,) flat node ids of the interior nodes
    node_coords: np.ndarray        # ((n+1)**dim, dim) node coordinates


def dof_maps(geometry: MediumGeometry) -> DofMaps:
    dim, n = geometry.dim, geometry.n
    grids = np.meshgrid(*([np.arange(n + 1)] * dim), indexing="ij")
    multi = np.stack([g.ravel() for g in grids], axis=1)
    interior_mask = np.all((multi >= 1) & (multi <= n - 1), axis=1)
    interior_of_node = np.full(multi.shape[0], -1, dtype=np.int64)
    interior_of_node[interior_mask] = np.arange(int(interior_mask.sum()))
    cgrids = np.meshgrid(*([np.arange(n)] * dim), indexing="ij")
    cmulti = np.stack([g.ravel() for g in cgrids], axis=1)
    strides = np.array([(n + 1) ** (dim - 1 - k) for k in range(dim)])
    corners = (cmulti[:, None, :] + _local_offsets(dim)[None, :, :]) @ strides
    return DofMaps(
        corners=corners,
        interior_of_node=interior_of_node,
        nodes_of_interior=np.nonzero(interior_mask)[0],
        node_coords=multi / float(n),
    )


@dataclass(frozen=True)
class Basis:
    """Nodal hat bases for displacement (vector) and temperature (scalar).

    Every basis function is continuous, piecewise d-linear, and vanishes
    on the domain boundary.  Displacement dof ``l*dim + i`` is the scalar
    hat of interior node ``l`` times the i-th coordinate vector.
    """

    dim: int
    n: int
    n_w: int
    n_th: int
    maps: DofMaps


def build_basis(geometry: MediumGeometry) -> Basis:
    maps = dof_maps(geometry)
    n_th = (geometry.n - 1) ** geometry.dim
    return Basis(dim=geometry.dim, n=geometry.n, n_w=geometry.dim * n_th,
                 n_th=n_th, maps=maps)


def eval_scalar(geometry: MediumGeometry, basis: Basis, coeffs: np.ndarray,
                points: np.ndarray) -> np.ndarray:
    """Evaluate a scalar basis expansion at arbitrary points, shape (npts,)."""
    pts = np.atleast_2d(points)
    n, dim = geometry.n, geometry.dim
    cell = np.clip((pts * n).astype(np.int64), 0, n - 1)
    local = pts * n - cell
    strides = np.array([(n + 1) ** (dim - 1 - k) for k in range(dim)])
    offsets = _local_offsets(dim)
    out = np.zeros(pts.shape[0])
    for a, off in enumerate(offsets):
        shape = np.ones(pts.shape[0])
        for k in range(dim):
            shape = shape * (local[:, k] if off[k] == 1 else 1.0 - local[:, k])
        node = (cell + off[None, :]) @ strides
        dof = basis.maps.interior_of_node[node]
        valid = dof >= 0
        out[valid] += coeffs[dof[valid]] * shape[valid]
    return out


def eval_vector(geometry: MediumGeometry, basis: Basis, coeffs: np.ndarray,
                points: np.ndarray) -> np.ndarray:
    """Evaluate a displacement expansion at arbitrary points, shape (npts, dim)."""
    comps = [eval_scalar(geometry, basis, coeffs[i::geometry.dim], points)
             for i in range(geometry.dim)]
    return np.stack(comps, axis=1)


# ---------------------------------------------------------------------------
# global assembly
# ---------------------------------------------------------------------------

def _assemble_scalar(loc: np.ndarray, cell_weight: np.ndarray, maps: DofMaps,
                     n_th: int) -> sp.csr_matrix:
    """Scatter ``cell_weight[c] * loc[a, b]`` into an interior-dof CSR matrix."""
    ldof = loc.shape[0]
    rows, cols, vals = [], [], []
    dof = maps.interior_of_node[maps.corners]  # (n_cells, ldof)
    for a in range(ldof):
        for b in range(ldof):
            if loc[a, b] == 0.0:
                continue
            mask = (dof[:, a] >= 0) & (dof[:, b] >= 0)
            rows.append(dof[mask, a])
            cols.append(dof[mask, b])
            vals.append(cell_weight[mask] * loc[a, b])
    return sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_th, n_th)).tocsr()


def _unit_block(d: int, p: int, q: int) -> sp.csr_matrix:
    e = np.zeros((d, d))
    e[p, q] = 1.0
    return sp.csr_matrix(e)


@dataclass(frozen=True)
class ProbeMatrices:
    """Parameter-free building blocks, one per phase and quadratic form.

    The seven system matrices are cheap linear combinations of these, so a
    parameter sweep re-weights probes instead of re-integrating; they also
    evaluate the individual norms of the energy budget (each energy term is
    a quadratic form in exactly one probe).
    """

    M_th_f: sp.csr_matrix   # scalar mass over the fluid part
    M_th_s: sp.csr_matrix   # scalar mass over the solid part
    K_th_f: sp.csr_matrix   # scalar stiffness over the fluid part
    K_th_s: sp.csr_matrix   # scalar stiffness over the solid part
    M_w_f: sp.csr_matrix    # vector mass over the fluid part
    M_w_s: sp.csr_matrix    # vector mass over the solid part
    K_w_f: sp.csr_matrix    # vector full-gradient stiffness, fluid part
    K_w_s: sp.csr_matrix    # vector full-gradient stiffness, solid part
    Dv_f: sp.csr_matrix     # div-div form over the fluid part
    Dv_s: sp.csr_matrix     # div-div form over the solid part
    DD_f: sp.csr_matrix     # symmetric-gradient form over the fluid part
    DD_s: sp.csr_matrix     # symmetric-gradient form over the solid part
    A3_f: sp.csr_matrix     # (psi, div phi) over the fluid part, n_th x n_w
    A3_s: sp.csr_matrix     # (psi, div phi) over the solid part
    B2_f: sp.csr_matrix     # (div phi, psi) over the fluid part, n_w x n_th
    B2_s: sp.csr_matrix     # (div phi, psi) over the solid part
    cell_div: sp.csr_matrix  # per-cell average divergence, n_cells x n_w


@dataclass(frozen=True)
class AssembledSystem:
    """The seven Galerkin matrices plus the probe blocks they combine."""

    geometry: MediumGeometry
    params: DimensionlessParams
    basis: Basis
    fields: CoefficientFields
    probes: ProbeMatrices
    A: sp.csr_matrix
    A1: sp.csr_matrix
    A2: sp.csr_matrix
    A3: sp.csr_matrix
    B: sp.csr_matrix
    B1: sp.csr_matrix
    B2: sp.csr_matrix

    @property
    def n_w(self) -> int:
        return self.basis.n_w

    @property
    def n_th(self) -> int:
        return self.basis.n_th


def _assemble_probes(geometry: MediumGeometry, basis: Basis,
                     quad_points: int) -> ProbeMatrices:
    dim, n_th, n_w = geometry.dim, basis.n_th, basis.n_w
    h = geometry.h
    loc = _local_forms(dim, quad_points)
    sM, sG, sC = h ** dim, h ** (dim - 2), h ** (dim - 1)
    chi = geometry.chi
    one_m_chi = 1.0 - chi
    maps = basis.maps

    def scalar(l, w):
        return _assemble_scalar(l, w, maps, n_th)

    K_loc = sum(loc.G[:, p, :, p] for p in range(dim))
    out = {}
    for tag, w in (("f", chi), ("s", one_m_chi)):
        M_sc = scalar(loc.M * sM, w)
        K_sc = scalar(K_loc * sG, w)
        G_blk = [[scalar(loc.G[:, p, :, q] * sG, w) for q in range(dim)]
                 for p in range(dim)]
        I_d = sp.identity(dim, format="csr")
        Dv = sum(sp.kron(G_blk[p][q], _unit_block(dim, p, q), format="csr")
                 for p in range(dim) for q in range(dim))
        DD = 0.5 * (sp.kron(K_sc, I_d, format="csr")
                    + sum(sp.kron(G_blk[p][q], _unit_block(dim, q, p), format="csr")
                          for p in range(dim) for q in range(dim)))
        A3 = sum(sp.kron(scalar(loc.C[:, :, j] * sC, w),
                         sp.csr_matrix(np.eye(dim)[j:j + 1, :]), format="csr")
                 for j in range(dim))
        B2 = sum(sp.kron(scalar(loc.CT[:, :, i] * sC, w),
                         sp.csr_matrix(np.eye(dim)[:, i:i + 1]), format="csr")
                 for i in range(dim))
        out[tag] = dict(M=M_sc, K=K_sc,
                        M_w=sp.kron(M_sc, I_d, format="csr"),
                        K_w=sp.kron(K_sc, I_d, format="csr"),
                        Dv=sp.csr_matrix(Dv), DD=sp.csr_matrix(DD),
                        A3=sp.csr_matrix(A3), B2=sp.csr_matrix(B2))

    # per-cell average divergence operator (pressure reconstruction)
    div_loc = loc.div * sC / (h ** dim)
    n_cells = geometry.n_cells
    rows, cols, vals = [], [], []
    dof = maps.interior_of_node[maps.corners]
    cells = np.arange(n_cells)
    for a in range(2 ** dim):
        mask = dof[:, a] >= 0
        for j in range(dim):
            rows.append(cells[mask])
            cols.append(dof[mask, a] * dim + j)
            vals.append(np.full(int(mask.sum()), div_loc[a, j]))
    cell_div = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_cells, n_w)).tocsr()

    return ProbeMatrices(
        M_th_f=out["f"]["M"], M_th_s=out["s"]["M"],
        K_th_f=out["f"]["K"], K_th_s=out["s"]["K"],
        M_w_f=out["f"]["M_w"], M_w_s=out["s"]["M_w"],
        K_w_f=out["f"]["K_w"], K_w_s=out["s"]["K_w"],
        Dv_f=out["f"]["Dv"], Dv_s=out["s"]["Dv"],
        DD_f=out["f"]["DD"], DD_s=out["s"]["DD"],
        A3_f=out["f"]["A3"], A3_s=out["s"]["A3"],
        B2_f=out["f"]["B2"], B2_s=out["s"]["B2"],
        cell_div=cell_div,
    )


def _combine(geometry: MediumGeometry, params: DimensionlessParams, basis: Basis,
             probes: ProbeMatrices) -> AssembledSystem:
    p = params
    pr = probes
    return AssembledSystem(
        geometry=geometry, params=params, basis=basis,
        fields=coefficient_fields(geometry, params), probes=probes,
        A=sp.csr_matrix(p.alpha_tau * (p.rho_f * pr.M_w_f + p.rho_s * pr.M_w_s)),
        A1=sp.csr_matrix(p.alpha_nu * pr.Dv_f + p.alpha_mu * pr.DD_f),
        A2=sp.csr_matrix(p.alpha_p * pr.Dv_f + p.alpha_eta * pr.Dv_s
                         + p.alpha_lambda * pr.DD_s),
        A3=sp.csr_matrix(p.alpha_theta_f * pr.A3_f + p.alpha_theta_s * pr.A3_s),
        B=sp.csr_matrix(p.c_pf * pr.M_th_f + p.c_ps * pr.M_th_s),
        B1=sp.csr_matrix(p.kappa_f * pr.K_th_f + p.kappa_s * pr.K_th_s),
        B2=sp.csr_matrix(p.alpha_theta_f * pr.B2_f + p.alpha_theta_s * pr.B2_s),
    )


def assemble_system(geometry: MediumGeometry, params: DimensionlessParams,
                    quad_points: int = 2) -> AssembledSystem:
    """Assemble the coupled system for one geometry/parameter pair.

    Parameters
    ----------
    geometry : MediumGeometry
    params : DimensionlessParams
    quad_points : int, optional
        Gauss points per axis; 2 already integrates every form exactly,
        higher orders exist to let tests assert quadrature invariance.

    Returns
    -------
    AssembledSystem
    """
    basis = build_basis(geometry)
    probes = _assemble_probes(geometry, basis, quad_points)
    return _combine(geometry, params, basis, probes)


def with_params(system: AssembledSystem,
                params: DimensionlessParams) -> AssembledSystem:
    """Re-weight an assembled system for new parameters without re-integrating."""
    return _combine(system.geometry, params, system.basis, system.probes)


# ---------------------------------------------------------------------------
# load vectors
# ---------------------------------------------------------------------------

class LoadAssembler:
    """Quadrature of right-hand sides against the two bases.

    Holds the physical quadrature points of every cell plus the shape
    values there, so repeated load assembly (time stepping with a
    non-separable forcing) only costs the evaluation of the data.
    """

    def __init__(self, geometry: MediumGeometry, basis: Basis,
                 quad_points: int = 2):
        self.geometry = geometry
        self.basis = basis
        pts, wq = _tensor_rule(geometry.dim, quad_points)
        N, dN = _reference_basis(geometry.dim, pts)
        self.N = N
        self.dN = dN
        self.wq = wq
        cgrids = np.meshgrid(*([np.arange(geometry.n)] * geometry.dim),
                             indexing="ij")
        lower = np.stack([g.ravel() for g in cgrids], axis=1) * geometry.h
        # (n_cells, nq, dim) physical quadrature points
        self.points = lower[:, None, :] + pts[None, :, :] * geometry.h
        self._dof = basis.maps.interior_of_node[basis.maps.corners]

    def vector_load(self, values: np.ndarray,
                    cell_weight: np.ndarray | None = None) -> np.ndarray:
        """Integrate ``values`` (n_cells, nq, dim) against the vector basis."""
        g = self.geometry
        contrib = np.einsum("q,cqi,aq->cai", self.wq, values, self.N) * g.cell_volume
        if cell_weight is not None:
            contrib = contrib * cell_weight[:, None, None]
        out = np.zeros(self.basis.n_w)
        dofs = self._dof[:, :, None] * g.dim + np.arange(g.dim)[None, None, :]
        valid = np.broadcast_to((self._dof >= 0)[:, :, None], dofs.shape)
        np.add.at(out, dofs[valid], contrib[valid])
        return out

    def scalar_load(self, values: np.ndarray,
                    cell_weight: np.ndarray | None = None) -> np.ndarray:
        """Integrate ``values`` (n_cells, nq) against the scalar basis."""
        g = self.geometry
        contrib = np.einsum("q,cq,aq->ca", self.wq, values, self.N) * g.cell_volume
        if cell_weight is not None:
            contrib = contrib * cell_weight[:, None]
        out = np.zeros(self.basis.n_th)
        valid = self._dof >= 0
        np.add.at(out, self._dof[valid], contrib[valid])
        return out

    def divergence_load(self, values: np.ndarray,
                        cell_weight: np.ndarray | None = None) -> np.ndarray:
        """Integrate a scalar sample (n_cells, nq) against div of the vector basis."""
        g = self.geometry
        scale = g.cell_volume / g.h  # reference gradients carry a 1/h
        contrib = np.einsum("q,cq,aiq->cai", self.wq, values, self.dN) * scale
        if cell_weight is not None:
            contrib = contrib * cell_weight[:, None, None]
        out = np.zeros(self.basis.n_w)
        dofs = self._dof[:, :, None] * g.dim + np.arange(g.dim)[None, None, :]
        valid = np.broadcast_to((self._dof >= 0)[:, :, None], dofs.shape)
        np.add.at(out, dofs[valid], contrib[valid])
        return out

    def integrate_scalar(self, values: np.ndarray,
                         cell_weight: np.ndarray | None = None) -> float:
        """Plain quadrature of a scalar sample array over the domain."""
        g = self.geometry
        cellwise = np.einsum("q,cq->c", self.wq, values) * g.cell_volume
        if cell_weight is not None:
            cellwise = cellwise * cell_weight
        return float(cellwise.sum())


# ---------------------------------------------------------------------------
# discrete Korn constant
# ---------------------------------------------------------------------------

def solid_vector_dofs(geometry: MediumGeometry, basis: Basis) -> np.ndarray:
    """Displacement dofs of interior nodes adjacent to at least one solid cell."""
    maps = basis.maps
    solid_cells = geometry.chi < 0.5
    touched = np.zeros((geometry.n + 1) ** geometry.dim, dtype=bool)
    touched[maps.corners[solid_cells].ravel()] = True
    nodes = np.nonzero(touched & (maps.interior_of_node >= 0))[0]
    idx = maps.interior_of_node[nodes]
    return (idx[:, None] * geometry.dim
            + np.arange(geometry.dim)[None, :]).ravel()


def korn_constant(geometry: MediumGeometry, quad_points: int = 2) -> float:
    """Discrete Korn constant of the solid part.

    Smallest generalized eigenvalue ``lam`` of the symmetric-gradient form
    against the full first-order form, over displacement fields supported
    on the closed solid part and vanishing on the domain boundary; returns
    ``1/sqrt(lam)``, the constant in ``|phi|_{1,2} <= C_k |D(x,phi)|_2``.
    """
    basis = build_basis(geometry)
    probes = _assemble_probes(geometry, basis, quad_points)
    idx = solid_vector_dofs(geometry, basis)
    a = probes.DD_s[idx][:, idx].toarray()
    b = (probes.M_w_s + probes.K_w_s)[idx][:, idx].toarray()
    lam = eigh(a, b, eigvals_only=True)
    return float(1.0 / np.sqrt(lam[0]))


# ---------------------------------------------------------------------------
# triplet dump
# ---------------------------------------------------------------------------

def dump_matrix_triplets(matrix: sp.spmatrix, path: str,
                         header_lines: tuple[str, ...] = ()) -> None:
    """Write ``row col value`` triplet lines with 17 significant digits.

    Entries appear in row-major order; ``header_lines`` are prepended as
    ``#``-prefixed comments so triplet consumers can skip them.
    """
    coo = sp.coo_matrix(matrix)
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        for k in order:
            fh.write(f"{coo.row[k]} {coo.col[k]} {coo.data[k]:.17g}\n")
