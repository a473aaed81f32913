"""Weak-form assembly for the coupled pressure/transport system.

The scheme discretizes, on a triangulated disk with no-flux walls,

    -div( (k(x)/mu(c)) grad p ) = q_I - q_P + f,
    gamma dc/dt - div( D(u) grad c ) + u . grad c
        + (optionally) reaction from q_I + q_P                 = chat q_I + g,
    u = -(k(x)/mu(c)) grad p,

with pressure in quadratic Lagrange elements (determined up to a constant,
fixed weakly through its mean) and concentration in linear elements.
Convection can enter either in skew-symmetric split form

    1/2 (u . grad c, w) - 1/2 (u c, grad w) + 1/2 ((q_I + q_P) c, w)
        + 1/2 boundary correction (u.n c, w),

which preserves the discrete L2 budget exactly, or in plain "direct" form
(u . grad c, w), which is the right choice when manufactured sources make
div u differ from q_I - q_P.  A problem may also carry no advective term
at all (``velocity_coupling="none"``): the velocity then enters transport
only through the dispersion coefficient, and no convection matrix is
assembled.

A ``Discretization`` bundles everything reusable across time steps:
dof maps, quadrature tabulations, per-triangle affine geometry, scatter
index patterns, the (time-independent) linear mass matrix and the
quadratic load vector of basis integrals.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from .dispersion import dispersion_matrices
from .elements import (DofMap, build_dofmap, edge_quadrature, quadrature_rule,
                       reference_basis, triangle_geometry)
from .meshing import Mesh
from .solvers import from_triplets


class CoefficientBlowupError(RuntimeError):
    """Viscosity left its admissible band: the transported concentration
    has overshot far enough that the coefficient model is meaningless."""


@dataclass(frozen=True)
class ProblemCoefficients:
    """Physical data of one displacement problem.

    Callables take numpy arrays; time-dependent fields take (x, y, t).
    ``None`` for a source/flux means identically zero (and is skipped in
    assembly).  ``viscosity_bounds = (mu_min, mu_max)`` is the physical
    band of mu; assembly fails with :class:`CoefficientBlowupError` when
    evaluated viscosities leave [mu_min/2, 2*mu_max].
    """

    permeability: Callable          # k(x, y) > 0
    viscosity: Callable             # mu(c) > 0
    viscosity_bounds: tuple
    porosity: float                 # gamma > 0
    dispersion: object              # DispersionParams or ScalarDispersionParams
    initial_concentration: Callable  # c0(x, y)
    injection: Optional[Callable] = None          # q_I(x, y, t) >= 0
    production: Optional[Callable] = None         # q_P(x, y, t) >= 0
    injected_concentration: Optional[Callable] = None  # chat(x, y, t)
    pressure_source: Optional[Callable] = None    # f(x, y, t)
    concentration_source: Optional[Callable] = None    # g(x, y, t)
    # wall data take the outward unit normal of the discrete boundary as
    # two extra arguments: flux(x, y, t, nx, ny).  Evaluating against the
    # mesh's own normals keeps the Neumann datum exactly compatible with
    # the divergence theorem on the polygonal domain.
    pressure_flux: Optional[Callable] = None      # u.n on the wall
    concentration_flux: Optional[Callable] = None  # D grad c . n on the wall
    # How the transport equation couples to the Darcy velocity:
    # "advection" gives the u . grad c term of the displacement model;
    # "none" drops the advective term entirely, leaving the velocity to
    # act only through the dispersion coefficient D(u) (and through
    # mu(c) on the pressure side).
    velocity_coupling: str = "advection"

    def __post_init__(self):
        if self.porosity <= 0:
            raise ValueError("porosity must be positive")
        lo, hi = self.viscosity_bounds
        if not (0 < lo <= hi):
            raise ValueError("viscosity bounds must satisfy 0 < lo <= hi")
        if self.velocity_coupling not in ("advection", "none"):
            raise ValueError(
                f"unknown velocity coupling {self.velocity_coupling!r}")


@dataclass(frozen=True)
class VelocityField:
    """Darcy velocity sampled where assembly and error norms need it:
    at the volume quadrature points of every cell and at the boundary-edge
    quadrature points (with the outward normal trace)."""

    cell_values: np.ndarray        # (T, Q, 2)
    edge_values: np.ndarray        # (B, Qe, 2)
    edge_normal_trace: np.ndarray  # (B, Qe)


@dataclass(frozen=True)
class PressureSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    mass_vector: np.ndarray        # integrals of the quadratic basis
    compatibility_defect: float    # |sum(rhs)|, zero for compatible data


@dataclass(frozen=True)
class ConcentrationSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray


@dataclass(frozen=True)
class Discretization:
    """Geometry- and space-dependent data reused across all time steps."""

    mesh: Mesh
    p1: DofMap
    p2: DofMap
    quad_degree: int
    cell_weights: np.ndarray       # (T, Q) quadrature weight * |det J|
    quad_points: np.ndarray        # (T, Q, 2) physical coordinates
    p1_values: np.ndarray          # (Q, 3)
    p2_values: np.ndarray          # (Q, 6)
    p1_grads: np.ndarray           # (T, 3, 2) physical gradients (constant in q)
    p2_grads: np.ndarray           # (T, Q, 6, 2)
    mass_local: np.ndarray         # (T, 3, 3) linear element mass blocks
    mass_p1: sp.csr_matrix
    p2_basis_integrals: np.ndarray
    rows1: np.ndarray
    cols1: np.ndarray
    rows2: np.ndarray
    cols2: np.ndarray
    edge_weights: np.ndarray       # (B, Qe) arc weight * edge length
    edge_points: np.ndarray        # (B, Qe, 2)
    edge_p1_values: np.ndarray     # (B, Qe, 3) traces of the owner's basis
    edge_p2_values: np.ndarray     # (B, Qe, 6)
    edge_p2_grads: np.ndarray      # (B, Qe, 6, 2)
    edge_rows1: np.ndarray
    edge_cols1: np.ndarray


def build_discretization(mesh: Mesh, quad_degree: int = 4) -> Discretization:
    """Tabulate bases, geometry and scatter patterns for a mesh."""
    p1 = build_dofmap(mesh, 1)
    p2 = build_dofmap(mesh, 2)
    rule = quadrature_rule(quad_degree)

    p1_values, p1_ref_grads = reference_basis(1, rule.points)
    p2_values, p2_ref_grads = reference_basis(2, rule.points)
    detJ, invJT = triangle_geometry(mesh)

    cell_weights = rule.weights[None, :] * detJ[:, None]
    corners = mesh.vertices[mesh.triangles]
    quad_points = np.einsum("qi,tid->tqd", rule.points, corners)
    p1_grads = np.einsum("tab,ib->tia", invJT, p1_ref_grads[0])
    p2_grads = np.einsum("tab,qib->tqia", invJT, p2_ref_grads)

    mass_local = np.einsum("tq,qi,qj->tij", cell_weights, p1_values, p1_values)

    T = mesh.num_triangles
    cell1, cell2 = p1.cell_dofs, p2.cell_dofs
    rows1 = np.broadcast_to(cell1[:, :, None], (T, 3, 3)).ravel()
    cols1 = np.broadcast_to(cell1[:, None, :], (T, 3, 3)).ravel()
    rows2 = np.broadcast_to(cell2[:, :, None], (T, 6, 6)).ravel()
    cols2 = np.broadcast_to(cell2[:, None, :], (T, 6, 6)).ravel()

    mass_p1 = from_triplets(p1.dof_count, p1.dof_count, rows1, cols1,
                            mass_local.ravel())
    p2_basis_integrals = np.bincount(
        cell2.ravel(),
        weights=np.einsum("tq,qi->ti", cell_weights, p2_values).ravel(),
        minlength=p2.dof_count)

    # boundary-edge tabulations in the owning triangle's reference frame
    s, ws = edge_quadrature()
    B = mesh.num_boundary_edges
    Qe = s.size
    btris = mesh.boundary_tris
    bary = np.zeros((B, Qe, 3))
    for b in range(B):
        va, vb = mesh.boundary_edges[b]
        tri = mesh.triangles[btris[b]]
        ia = int(np.where(tri == va)[0][0])
        ib = int(np.where(tri == vb)[0][0])
        bary[b, :, ia] = 1.0 - s
        bary[b, :, ib] = s
    edge_p1_values, _ = reference_basis(1, bary)
    edge_p2_values, e2_ref_grads = reference_basis(2, bary)
    edge_p2_grads = np.einsum("bac,bqic->bqia", invJT[btris], e2_ref_grads)

    pa = mesh.vertices[mesh.boundary_edges[:, 0]]
    pb = mesh.vertices[mesh.boundary_edges[:, 1]]
    lengths = np.hypot(*(pb - pa).T)
    edge_weights = ws[None, :] * lengths[:, None]
    edge_points = pa[:, None, :] + s[None, :, None] * (pb - pa)[:, None, :]

    ecell1 = cell1[btris]
    edge_rows1 = np.broadcast_to(ecell1[:, :, None], (B, 3, 3)).ravel()
    edge_cols1 = np.broadcast_to(ecell1[:, None, :], (B, 3, 3)).ravel()

    return Discretization(
        mesh=mesh, p1=p1, p2=p2, quad_degree=quad_degree,
        cell_weights=cell_weights, quad_points=quad_points,
        p1_values=p1_values, p2_values=p2_values,
        p1_grads=p1_grads, p2_grads=p2_grads,
        mass_local=mass_local, mass_p1=mass_p1,
        p2_basis_integrals=p2_basis_integrals,
        rows1=rows1, cols1=cols1, rows2=rows2, cols2=cols2,
        edge_weights=edge_weights, edge_points=edge_points,
        edge_p1_values=edge_p1_values, edge_p2_values=edge_p2_values,
        edge_p2_grads=edge_p2_grads,
        edge_rows1=edge_rows1, edge_cols1=edge_cols1)


def _eval_field(func, x, y, t=None):
    out = func(x, y) if t is None else func(x, y, t)
    return np.broadcast_to(np.asarray(out, dtype=np.float64), x.shape)


def _eval_wall_flux(disc, func, t):
    """Evaluate a wall-flux field at the edge quadrature points, feeding it
    the outward normals of the owning boundary edges."""
    ex, ey = disc.edge_points[..., 0], disc.edge_points[..., 1]
    n = disc.mesh.boundary_normals
    out = func(ex, ey, t, n[:, None, 0], n[:, None, 1])
    return np.broadcast_to(np.asarray(out, dtype=np.float64), ex.shape)


def _viscosity_at(disc, coeffs, c_prev, values, cell_dofs):
    """Viscosity at quadrature points from nodal concentrations (with the
    blow-up guard) together with the concentration samples themselves."""
    c_local = c_prev[cell_dofs]
    if values.ndim == 2:                       # shared tabulation (Q, 3)
        c_q = np.einsum("qi,ti->tq", values, c_local)
    else:                                      # per-edge tabulation (B, Qe, 3)
        c_q = np.einsum("bqi,bi->bq", values, c_local)
    mu = np.asarray(coeffs.viscosity(c_q), dtype=np.float64)
    lo, hi = coeffs.viscosity_bounds
    if mu.min() < 0.5 * lo or mu.max() > 2.0 * hi:
        raise CoefficientBlowupError(
            f"viscosity range [{mu.min():.6g}, {mu.max():.6g}] left the "
            f"admissible band [{0.5 * lo:.6g}, {2.0 * hi:.6g}]")
    return mu, c_q


def assemble_pressure(disc: Discretization, coeffs: ProblemCoefficients,
                      c_prev: np.ndarray, t: float) -> PressureSystem:
    """Stiffness system for the mean-constrained pressure at time t.

    Weak form: ( (k/mu(c_prev)) grad p, grad v ) = ( q_I - q_P + f, v )
    - boundary term from the prescribed wall flux u.n.  The right-hand
    side must be compatible (sum ~ 0); a warning is emitted when the
    defect exceeds 1e-2 of the right-hand side norm.
    """
    x, y = disc.quad_points[..., 0], disc.quad_points[..., 1]
    mu, _ = _viscosity_at(disc, coeffs, c_prev, disc.p1_values,
                          disc.p1.cell_dofs)
    mobility = _eval_field(coeffs.permeability, x, y) / mu
    scaled = (mobility * disc.cell_weights)[:, :, None, None] * disc.p2_grads
    local = np.einsum("tqia,tqja->tij", scaled, disc.p2_grads)
    n2 = disc.p2.dof_count
    A = from_triplets(n2, n2, disc.rows2, disc.cols2, local.ravel())

    source = np.zeros(x.shape)
    for func, sign in ((coeffs.injection, 1.0), (coeffs.production, -1.0),
                       (coeffs.pressure_source, 1.0)):
        if func is not None:
            source += sign * _eval_field(func, x, y, t)
    rhs = np.bincount(
        disc.p2.cell_dofs.ravel(),
        weights=np.einsum("tq,qi->ti", source * disc.cell_weights,
                          disc.p2_values).ravel(),
        minlength=n2)

    if coeffs.pressure_flux is not None:
        flux = _eval_wall_flux(disc, coeffs.pressure_flux, t)
        rhs -= np.bincount(
            disc.p2.cell_dofs[disc.mesh.boundary_tris].ravel(),
            weights=np.einsum("bq,bqi->bi", flux * disc.edge_weights,
                              disc.edge_p2_values).ravel(),
            minlength=n2)

    defect = abs(float(rhs.sum()))
    rhs_norm = float(np.linalg.norm(rhs))
    if rhs_norm > 0 and defect > 1e-2 * rhs_norm:
        warnings.warn(f"pressure data incompatible: defect {defect:.3e} "
                      f"exceeds 1e-2 * ||rhs|| = {1e-2 * rhs_norm:.3e}",
                      stacklevel=2)
    return PressureSystem(matrix=A, rhs=rhs,
                          mass_vector=disc.p2_basis_integrals,
                          compatibility_defect=defect)


def compute_velocity(disc: Discretization, coeffs: ProblemCoefficients,
                     c_prev: np.ndarray, p_coeffs: np.ndarray) -> VelocityField:
    """Darcy velocity -(k/mu(c_prev)) grad p at the quadrature points."""
    x, y = disc.quad_points[..., 0], disc.quad_points[..., 1]
    mu, _ = _viscosity_at(disc, coeffs, c_prev, disc.p1_values,
                          disc.p1.cell_dofs)
    mobility = _eval_field(coeffs.permeability, x, y) / mu
    grad_p = np.einsum("tqia,ti->tqa", disc.p2_grads,
                       p_coeffs[disc.p2.cell_dofs])
    cell_values = -mobility[:, :, None] * grad_p

    btris = disc.mesh.boundary_tris
    ex, ey = disc.edge_points[..., 0], disc.edge_points[..., 1]
    mu_e, _ = _viscosity_at(disc, coeffs, c_prev, disc.edge_p1_values,
                            disc.p1.cell_dofs[btris])
    mobility_e = _eval_field(coeffs.permeability, ex, ey) / mu_e
    grad_p_e = np.einsum("bqia,bi->bqa", disc.edge_p2_grads,
                         p_coeffs[disc.p2.cell_dofs[btris]])
    edge_values = -mobility_e[:, :, None] * grad_p_e
    trace = np.einsum("bqa,ba->bq", edge_values,
                      disc.mesh.boundary_normals)
    return VelocityField(cell_values=cell_values, edge_values=edge_values,
                         edge_normal_trace=trace)


def assemble_concentration(disc: Discretization, coeffs: ProblemCoefficients,
                           c_prev: np.ndarray, velocity: VelocityField,
                           tau: float, t: float,
                           mode: str = "skew") -> ConcentrationSystem:
    """Backward-Euler transport system at time level t with step tau.

    The unknown is the new concentration; diffusion uses the dispersion
    model evaluated at the lagged velocity, convection enters in the
    chosen form (see module docstring), and the right-hand side carries
    (gamma/tau) M c_prev plus sources chat*q_I + g and the wall flux.
    """
    if tau <= 0:
        raise ValueError(f"time step must be positive, got {tau}")
    if mode not in ("skew", "direct"):
        raise ValueError(f"unknown convection mode {mode!r}")

    gamma = coeffs.porosity
    U = velocity.cell_values
    x, y = disc.quad_points[..., 0], disc.quad_points[..., 1]

    D = dispersion_matrices(U, coeffs.dispersion)
    DG = np.einsum("tqab,tjb->tqja", D, disc.p1_grads)
    local = np.einsum("tq,tia,tqja->tij", disc.cell_weights,
                      disc.p1_grads, DG)

    if coeffs.velocity_coupling == "advection":
        u_dot_grad = np.einsum("tqa,tja->tqj", U, disc.p1_grads)
        n1 = np.einsum("tq,qi,tqj->tij", disc.cell_weights, disc.p1_values,
                       u_dot_grad)
        if mode == "skew":
            local += 0.5 * (n1 - n1.transpose(0, 2, 1))
            q_total = np.zeros(x.shape)
            for func in (coeffs.injection, coeffs.production):
                if func is not None:
                    q_total += _eval_field(func, x, y, t)
            if q_total.any():
                local += np.einsum("tq,qi,qj->tij",
                                   0.5 * q_total * disc.cell_weights,
                                   disc.p1_values, disc.p1_values)
        else:
            local += n1
    local += (gamma / tau) * disc.mass_local

    rows, cols, vals = disc.rows1, disc.cols1, local.ravel()
    if (mode == "skew" and coeffs.velocity_coupling == "advection"
            and coeffs.pressure_flux is not None):
        flux = _eval_wall_flux(disc, coeffs.pressure_flux, t)
        edge_local = np.einsum("bq,bqi,bqj->bij",
                               0.5 * flux * disc.edge_weights,
                               disc.edge_p1_values, disc.edge_p1_values)
        rows = np.concatenate([rows, disc.edge_rows1])
        cols = np.concatenate([cols, disc.edge_cols1])
        vals = np.concatenate([vals, edge_local.ravel()])
    n = disc.p1.dof_count
    A = from_triplets(n, n, rows, cols, vals)

    rhs = (gamma / tau) * (disc.mass_p1 @ c_prev)
    source = np.zeros(x.shape)
    if coeffs.injection is not None and coeffs.injected_concentration is not None:
        source += (_eval_field(coeffs.injected_concentration, x, y, t)
                   * _eval_field(coeffs.injection, x, y, t))
    if coeffs.concentration_source is not None:
        source += _eval_field(coeffs.concentration_source, x, y, t)
    if source.any():
        rhs += np.bincount(
            disc.p1.cell_dofs.ravel(),
            weights=np.einsum("tq,qi->ti", source * disc.cell_weights,
                              disc.p1_values).ravel(),
            minlength=n)
    if coeffs.concentration_flux is not None:
        gflux = _eval_wall_flux(disc, coeffs.concentration_flux, t)
        rhs += np.bincount(
            disc.p1.cell_dofs[disc.mesh.boundary_tris].ravel(),
            weights=np.einsum("bq,bqi->bi", gflux * disc.edge_weights,
                              disc.edge_p1_values).ravel(),
            minlength=n)
    return ConcentrationSystem(matrix=A, rhs=rhs)
