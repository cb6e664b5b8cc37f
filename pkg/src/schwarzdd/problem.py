"""Coefficient scenarios and P1 finite element assembly for the
reaction-convection-diffusion problem in conservative form

    c0 u + div(a u) - div(nu grad u) = f.

The assembled bilinear form is the skew-symmetrized variational one,

    a(u,v) = int( ctilde u v + 1/2 a.grad(u) v - 1/2 u a.grad(v)
                  + nu grad(u).grad(v) ) + int_{Gamma_R} alpha u v,

with ctilde = c0 + div(a)/2, together with the weighted inner product

    (u,v)_{1,c} = int( ctilde u v + nu grad(u).grad(v) ).

Coefficients are frozen at element barycenters (one-point rule); the P1 basis
integrals themselves are exact.  This keeps the discrete symmetric-part
identity (A+A^T)/2 = F_global exact up to roundoff when Gamma_R is empty and
SUPG is off.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .mesh import DIRICHLET, ROBIN, build_dof_map

# |a| below this at the barycenter: the SUPG term for that element is dropped
SUPG_ZERO_VELOCITY_GUARD = 1e-14


@dataclass
class ProblemDefinition:
    """Coefficient fields as vectorized callables of (x, y) arrays.

    `a` returns an array of shape (..., 2); `div_a` is the analytic
    divergence of `a`.  `supg_theta` = 0 disables streamline-upwind
    stabilization.  `g` is the Robin boundary datum, used only when the mesh
    has Robin-marked edges.
    """

    c0: callable
    a: callable
    div_a: callable
    nu: callable
    f: callable
    g: callable = None
    supg_theta: float = 0.0
    name: str = "custom"


def _const(value):
    def fun(x, y):
        return np.full_like(np.asarray(x, dtype=float), value)

    return fun


def _vec_field(fx, fy):
    def fun(x, y):
        x = np.asarray(x, dtype=float)
        return np.stack([fx(x, y), fy(x, y)], axis=-1)

    return fun


SCENARIOS = {
    # name -> (a, div_a)
    "rotating": (
        _vec_field(lambda x, y: 2 * np.pi * (-(y - 0.1)), lambda x, y: 2 * np.pi * (x - 0.5)),
        _const(0.0),
    ),
    "contracting": (
        _vec_field(lambda x, y: -x, lambda x, y: -y),
        _const(-2.0),
    ),
    "horizontal": (
        _vec_field(lambda x, y: np.ones_like(x), lambda x, y: np.zeros_like(x)),
        _const(0.0),
    ),
}

FORCINGS = {
    "center": lambda x, y: 100.0 * np.exp(-10.0 * ((x - 0.5) ** 2 + (y - 0.1) ** 2)),
    "left": lambda x, y: 100.0 * np.exp(-10.0 * ((x - 0.1) ** 2 + (y - 0.1) ** 2)),
}


def build_scenario(name, c0, nu, forcing="center", supg_theta=0.0):
    """Preset coefficient scenario matching the experiment tables."""
    if name not in SCENARIOS:
        raise ValueError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}")
    if forcing not in FORCINGS:
        raise ValueError(f"unknown forcing {forcing!r}; choose from {sorted(FORCINGS)}")
    a, div_a = SCENARIOS[name]
    return ProblemDefinition(
        c0=_const(c0),
        a=a,
        div_a=div_a,
        nu=_const(nu),
        f=FORCINGS[forcing],
        supg_theta=supg_theta,
        name=name,
    )


def ctilde(pd, point):
    """Effective reaction coefficient ctilde = c0 + div(a)/2 at a point."""
    x, y = point
    return float(pd.c0(np.asarray(x), np.asarray(y)) + 0.5 * pd.div_a(np.asarray(x), np.asarray(y)))


def robin_alpha(pd, point, n):
    """Zeroth-order absorbing coefficient alpha = sqrt((a.n)^2 + 4 c0 nu)/2.

    `n` must be a unit vector.  A negative radicand (possible when c0 < 0) is
    clamped to zero with a warning.
    """
    x, y = point
    an = float(pd.a(np.asarray(x), np.asarray(y)) @ np.asarray(n, dtype=float))
    rad = an * an + 4.0 * float(pd.c0(np.asarray(x), np.asarray(y))) * float(
        pd.nu(np.asarray(x), np.asarray(y))
    )
    if rad < 0.0:
        warnings.warn("negative radicand in robin_alpha clamped to 0", stacklevel=2)
        rad = 0.0
    return 0.5 * np.sqrt(rad)


def _alpha_on_edges(pd, mids, normals):
    """Vectorized robin_alpha on edge midpoints with given unit normals."""
    an = np.einsum("ij,ij->i", pd.a(mids[:, 0], mids[:, 1]), normals)
    rad = an * an + 4.0 * pd.c0(mids[:, 0], mids[:, 1]) * pd.nu(mids[:, 0], mids[:, 1])
    if np.any(rad < 0):
        warnings.warn("negative radicand in robin_alpha clamped to 0", stacklevel=2)
        rad = np.maximum(rad, 0.0)
    return 0.5 * np.sqrt(rad)


def check_div_consistency(pd, points, tol=1e-4, eps=1e-6):
    """Spot-check div_a against central finite differences of a."""
    x = points[:, 0]
    y = points[:, 1]
    div_fd = (pd.a(x + eps, y)[:, 0] - pd.a(x - eps, y)[:, 0]) / (2 * eps) + (
        pd.a(x, y + eps)[:, 1] - pd.a(x, y - eps)[:, 1]
    ) / (2 * eps)
    return np.abs(div_fd - pd.div_a(x, y)).max() <= tol


# reference mass matrix scaled by area/12
_MASS12 = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]])


def element_kernels(mesh, pd, elems=None):
    """Per-element contributions on a subset of triangles.

    Returns (A_e, F_e, b_e): stacked (m,3,3), (m,3,3), (m,3) arrays holding
    the problem form (with SUPG folded in when pd.supg_theta > 0), the
    weighted inner product, and the load vector.
    """
    tris = mesh.triangles if elems is None else mesh.triangles[elems]
    p = mesh.vertices[tris]  # (m, 3, 2)
    m = len(tris)

    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    area = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    # constant P1 gradients: g_i = perp(p_{i+1} - p_{i+2}) / (2A)
    g = np.empty((m, 3, 2))
    for i in range(3):
        pa = p[:, (i + 1) % 3]
        pb = p[:, (i + 2) % 3]
        g[:, i, 0] = pa[:, 1] - pb[:, 1]
        g[:, i, 1] = pb[:, 0] - pa[:, 0]
    g /= (2.0 * area)[:, None, None]

    xc = p.mean(axis=1)
    c0c = pd.c0(xc[:, 0], xc[:, 1])
    dac = pd.div_a(xc[:, 0], xc[:, 1])
    ctc = c0c + 0.5 * dac
    nuc = pd.nu(xc[:, 0], xc[:, 1])
    ac = pd.a(xc[:, 0], xc[:, 1])  # (m, 2)
    fc = pd.f(xc[:, 0], xc[:, 1])

    mass = (area / 12.0)[:, None, None] * _MASS12
    stiff = nuc[:, None, None] * area[:, None, None] * np.einsum("mik,mjk->mij", g, g)
    ag = np.einsum("mk,mik->mi", ac, g)  # a.grad(phi_i) per element
    # 1/2 (a.grad u) v - 1/2 u (a.grad v):  antisymmetric in (i, j)
    conv = (area / 6.0)[:, None, None] * (ag[:, None, :] - ag[:, :, None])

    A_e = ctc[:, None, None] * mass + conv + stiff
    F_e = ctc[:, None, None] * mass + stiff
    b_e = np.repeat((fc * area / 3.0)[:, None], 3, axis=1)

    if pd.supg_theta > 0.0:
        anorm = np.linalg.norm(ac, axis=1)
        active = anorm > SUPG_ZERO_VELOCITY_GUARD
        # h_tau = longest edge
        e0 = np.linalg.norm(p[:, 1] - p[:, 2], axis=1)
        e1 = np.linalg.norm(p[:, 2] - p[:, 0], axis=1)
        e2 = np.linalg.norm(p[:, 0] - p[:, 1], axis=1)
        h_tau = np.maximum(np.maximum(e0, e1), e2)
        coef = np.zeros(m)
        coef[active] = pd.supg_theta * h_tau[active] / anorm[active]
        # On P1, L u = (c0 + div a) u + a.grad(u);  L_SS v = (div a)/2 v + a.grad(v)
        lu0 = c0c + dac  # coefficient of phi_j in L u
        lss0 = 0.5 * dac  # coefficient of phi_i in L_SS v
        # four products, test index i (rows), trial index j (columns)
        supg = (lu0 * lss0)[:, None, None] * mass
        supg += (lu0 * area / 3.0)[:, None, None] * ag[:, :, None]  # int (lu0 phi_j)(a.g_i)
        supg += (lss0 * area / 3.0)[:, None, None] * ag[:, None, :]  # int (a.g_j)(lss0 phi_i)
        supg += area[:, None, None] * ag[:, :, None] * ag[:, None, :]
        A_e = A_e + coef[:, None, None] * supg
        b_supg = coef[:, None] * fc[:, None] * (
            lss0[:, None] * (area / 3.0)[:, None] + ag * area[:, None]
        )
        b_e = b_e + b_supg

    return A_e, F_e, b_e


def edge_mass_kernels(lengths, alphas):
    """P1 boundary mass matrices int_e alpha u v, alpha frozen at midpoints."""
    base = np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0
    return (alphas * lengths)[:, None, None] * base


def scatter_triplets(local_mats, dof_triples):
    """Flatten stacked (m,k,k) element matrices into COO triplets using the
    (m,k) dof numbering."""
    m, k, _ = local_mats.shape
    rows = np.repeat(dof_triples, k, axis=1).ravel()
    cols = np.tile(dof_triples, (1, k)).ravel()
    return rows, cols, local_mats.ravel()


def eliminate_dirichlet(rows, cols, vals, dirichlet_mask):
    """Symmetric elimination with unit diagonal at the triplet level: drop all
    couplings to Dirichlet dofs, then pin the diagonal."""
    keep = ~(dirichlet_mask[rows] | dirichlet_mask[cols])
    dir_dofs = np.flatnonzero(dirichlet_mask)
    rows = np.concatenate([rows[keep], dir_dofs])
    cols = np.concatenate([cols[keep], dir_dofs])
    vals = np.concatenate([vals[keep], np.ones(len(dir_dofs))])
    return rows, cols, vals


@dataclass
class AssembledSystem:
    A: object
    F_global: object
    rhs: np.ndarray
    dof_map: object
    weighted_norm_valid: bool
    ctilde_min: float
    mesh: object = None
    pd: object = None


def assemble_global(mesh, pd):
    """Assemble A (problem form + optional SUPG + Robin boundary term),
    F_global (weighted inner product) and the load vector, with Dirichlet
    dofs eliminated symmetrically to a unit diagonal."""
    n = mesh.num_vertices
    dof_map = build_dof_map(mesh)
    dir_mask = dof_map.dirichlet_mask

    A_e, F_e, b_e = element_kernels(mesh, pd)
    tris = mesh.triangles
    ra, ca, va = scatter_triplets(A_e, tris)
    rf, cf, vf = scatter_triplets(F_e, tris)
    rhs = np.zeros(n)
    np.add.at(rhs, tris.ravel(), b_e.ravel())

    robin = [i for i, mk in enumerate(mesh.boundary_markers) if mk == ROBIN]
    if robin:
        edges = mesh.boundary_edges[robin]
        mids, normals, lengths = _boundary_edge_geometry(mesh, edges)
        alphas = _alpha_on_edges(pd, mids, normals)
        E = edge_mass_kernels(lengths, alphas)
        re, ce, ve = scatter_triplets(E, edges)
        ra = np.concatenate([ra, re])
        ca = np.concatenate([ca, ce])
        va = np.concatenate([va, ve])
        if pd.g is not None:
            gv = pd.g(mids[:, 0], mids[:, 1])
            np.add.at(rhs, edges.ravel(), np.repeat(0.5 * gv * lengths, 2))

    ra, ca, va = eliminate_dirichlet(ra, ca, va, dir_mask)
    rf, cf, vf = eliminate_dirichlet(rf, cf, vf, dir_mask)
    rhs[dir_mask] = 0.0

    A = linalg.sparse_from_triplets(n, n, (ra, ca, va))
    F = linalg.sparse_from_triplets(n, n, (rf, cf, vf))

    ct_min = _sampled_ctilde_min(mesh, pd)
    return AssembledSystem(
        A=A,
        F_global=F,
        rhs=rhs,
        dof_map=dof_map,
        weighted_norm_valid=bool(ct_min > 0.0),
        ctilde_min=float(ct_min),
        mesh=mesh,
        pd=pd,
    )


def assemble_supg(mesh, pd):
    """SUPG contribution alone, as (matrix, rhs) on the full dof set without
    Dirichlet elimination.  assemble_global folds the same term in when
    pd.supg_theta > 0; this entry point exists for inspection and tests."""
    n = mesh.num_vertices
    if pd.supg_theta <= 0.0:
        return linalg.sparse_from_triplets(n, n, ()), np.zeros(n)
    from dataclasses import replace

    A1, _, b1 = element_kernels(mesh, pd)
    A0, _, b0 = element_kernels(mesh, replace(pd, supg_theta=0.0))
    rows, cols, vals = scatter_triplets(A1 - A0, mesh.triangles)
    rhs = np.zeros(n)
    np.add.at(rhs, mesh.triangles.ravel(), (b1 - b0).ravel())
    return linalg.sparse_from_triplets(n, n, (rows, cols, vals)), rhs


def _boundary_edge_geometry(mesh, edges):
    """Midpoints, outward unit normals and lengths for outer-boundary edges.

    The normal is oriented away from the adjacent triangle (found through a
    sorted-edge lookup).
    """
    opposite = {}
    for t in mesh.triangles:
        for i in range(3):
            key = (min(t[i], t[(i + 1) % 3]), max(t[i], t[(i + 1) % 3]))
            opposite[key] = t[(i + 2) % 3]
    p0 = mesh.vertices[edges[:, 0]]
    p1 = mesh.vertices[edges[:, 1]]
    mids = 0.5 * (p0 + p1)
    tang = p1 - p0
    lengths = np.linalg.norm(tang, axis=1)
    normals = np.column_stack([tang[:, 1], -tang[:, 0]]) / lengths[:, None]
    for k, (a, b) in enumerate(edges):
        third = opposite[(min(a, b), max(a, b))]
        if normals[k] @ (mesh.vertices[third] - mids[k]) > 0:
            normals[k] = -normals[k]
    return mids, normals, lengths


def _sampled_ctilde_min(mesh, pd):
    xc = mesh.barycenters()
    v = mesh.vertices
    ct_c = pd.c0(xc[:, 0], xc[:, 1]) + 0.5 * pd.div_a(xc[:, 0], xc[:, 1])
    ct_v = pd.c0(v[:, 0], v[:, 1]) + 0.5 * pd.div_a(v[:, 0], v[:, 1])
    return min(ct_c.min(), ct_v.min())
