"""Numerical verification of the convergence theory for the one-level
Schwarz preconditioners.

Pieces: geometric overlap constants (Lambda0, Lambda1), per-subdomain
coefficient bounds, the closed-form theoretical constants (C_err, C_D, C_DF,
C_DB, C_cont, C_stab=1), the two theorem bounds (an upper bound on the
weighted operator norm of M^{-1}A and a lower bound on the distance of its
field of values from the origin), identity checks for the assumptions behind
the theorem, empirical (operator-norm) counterparts of the constants, and
the weighted norm / field-of-values sweep itself.
"""

import itertools
import json
import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, lobpcg

from . import linalg, preconditioner
from .decomposition import pu_identity_defect
from .mesh import DIRICHLET


@dataclass
class GenericConstants:
    """Constants the theory leaves symbolic.  C_inv defaults to the classical
    P1 inverse-inequality constant, C_tr to a generous trace constant; C_dPU
    is normally overwritten by the empirical value measured on the built
    partition of unity.  r is the interpolation order (2 for P1), d the
    dimension."""

    C_Pi: float = 1.0
    C_inv: float = 12.0
    C_tr: float = 2.0
    C_dPU: float = 1.0
    r: int = 2
    d: int = 2


@dataclass
class GeometricConstants:
    lambda0: int  # max number of overlapping neighbors, self included
    lambda0_exclusive: int
    lambda1: int  # max multiplicity of element membership


@dataclass
class CoefficientBounds:
    ctilde_plus: float
    ctilde_minus: float
    nu_plus: float
    nu_minus: float
    a_inf: float
    alpha_inf: float
    H_sub: float
    valid: bool


@dataclass
class ConstantsEntry:
    C_stab: float
    C_err: float
    C_D: float
    C_DF: float
    C_DB: float
    C_cont: float
    valid: bool = True


@dataclass
class ConstantsReport:
    lambda0: int
    lambda1: int
    c_rd: int
    per_subdomain: list  # of ConstantsEntry


@dataclass
class EmpiricalEntry:
    C_D: float
    C_DB: float
    C_DF: float
    C_dPU: float
    C_stab: float


@dataclass
class AssumptionsReport:
    pu_defect: float
    pu_pass: bool
    row_identity_B_rel: float  # max relative row defect of R_jA vs B_jR_j on D-nonzero rows
    row_identity_B_pass: bool
    row_identity_F_rel: float
    row_identity_F_pass: bool
    coercivity_min_eig: float  # min over j of lambda_min(sym(B_j) - F_j), scaled
    coercivity_pass: bool
    sym_part_rel: float  # entrywise |sym(A) - F| / max|F|; NaN when not applicable
    sym_part_pass: bool
    all_pass: bool


@dataclass
class WeightedSpectrumReport:
    norm_F: float
    fov_distance: float
    origin_possibly_enclosed: bool
    n_angles: int


@dataclass
class BoundsReport:
    upper: float
    lower: float
    empirical_norm: float = math.nan
    empirical_fov_distance: float = math.nan


def geometric_constants(dec):
    """Lambda0 = max_j #{i : dofs(Omega_j) meets dofs(Omega_i)} (self counts;
    the exclusive variant is also reported); Lambda1 = max over elements of
    the number of subdomains containing it."""
    n = dec.mesh.num_vertices
    N = dec.N
    rows = np.concatenate([np.full(len(sd.dofs), sd.index) for sd in dec.subdomains])
    cols = np.concatenate([sd.dofs for sd in dec.subdomains])
    S = sp.csr_matrix((np.ones(len(rows), dtype=np.int64), (rows, cols)), shape=(N, n))
    inter = (S @ S.T).toarray() > 0
    neighbor_counts = inter.sum(axis=1)
    lambda0 = int(neighbor_counts.max())

    mult = np.zeros(dec.mesh.num_triangles, dtype=int)
    for sd in dec.subdomains:
        mult[sd.elements] += 1
    return GeometricConstants(
        lambda0=lambda0, lambda0_exclusive=lambda0 - 1, lambda1=int(mult.max())
    )


def c_of_rd(r, d):
    """max over multi-indices gamma with |gamma| = r (length d) of
    sum_{0 < beta <= gamma} prod_i binom(gamma_i, beta_i), by enumeration."""
    if r < 1 or d < 1:
        raise ValueError("need r >= 1 and d >= 1")
    best = 0
    for gamma in itertools.product(range(r + 1), repeat=d):
        if sum(gamma) != r:
            continue
        total = 0
        for beta in itertools.product(*[range(g + 1) for g in gamma]):
            if sum(beta) == 0:
                continue
            total += math.prod(math.comb(g, b) for g, b in zip(gamma, beta))
        best = max(best, total)
    return best


def _point_set_diameter(points):
    pts = np.unique(points, axis=0)
    if len(pts) < 2:
        return 0.0
    try:
        from scipy.spatial import ConvexHull

        hull = pts[ConvexHull(pts).vertices]
    except Exception:  # degenerate (collinear) point sets
        hull = pts
    d2 = ((hull[:, None, :] - hull[None, :, :]) ** 2).sum(axis=2)
    return float(np.sqrt(d2.max()))


def coefficient_bounds(mesh, pd, dec, j):
    """Coefficient sup/inf over the subdomain's sample points (element
    barycenters and vertices), applied Robin-alpha sup, and the subdomain
    diameter."""
    sd = dec.subdomains[j]
    bc = mesh.barycenters()[sd.elements]
    vx = mesh.vertices[sd.dofs]
    px = np.concatenate([bc[:, 0], vx[:, 0]])
    py = np.concatenate([bc[:, 1], vx[:, 1]])
    ct = pd.c0(px, py) + 0.5 * pd.div_a(px, py)
    nu = pd.nu(px, py)
    a_norm = np.linalg.norm(pd.a(px, py), axis=-1)
    if sd.local is not None and len(sd.local.robin_alphas):
        alpha_inf = float(sd.local.robin_alphas.max())
    else:
        alpha_inf = 0.0
    return CoefficientBounds(
        ctilde_plus=float(ct.max()),
        ctilde_minus=float(ct.min()),
        nu_plus=float(nu.max()),
        nu_minus=float(nu.min()),
        a_inf=float(a_norm.max()),
        alpha_inf=alpha_inf,
        H_sub=_point_set_diameter(vx),
        valid=bool(ct.min() > 0.0),
    )


def theoretical_constants(gb, cb, h, delta):
    """Evaluate the closed-form constants for one subdomain.  Invalid
    coefficient bounds (ctilde_minus <= 0) yield NaN constants flagged
    invalid."""
    if not cb.valid:
        nan = math.nan
        return ConstantsEntry(1.0, nan, nan, nan, nan, nan, valid=False)
    crd = c_of_rd(gb.r, gb.d)
    ctp, ctm = cb.ctilde_plus, cb.ctilde_minus
    nup, num_ = cb.nu_plus, cb.nu_minus
    C_err = (
        gb.C_Pi
        * crd
        * gb.C_dPU
        * math.sqrt(gb.C_inv)
        * (math.sqrt(nup / num_) + math.sqrt(ctp / num_) * h)
        * (h / delta)
    )
    C_cont = (
        (ctp / ctm) * (nup / num_)
        + 0.5 * cb.a_inf / math.sqrt(ctm * num_)
        + cb.alpha_inf
        * gb.C_tr
        / math.sqrt(ctm)
        * (1.0 / (cb.H_sub * math.sqrt(ctm)) + 1.0 / (2.0 * math.sqrt(num_)))
    )
    C_D = math.sqrt(2.0) * (1.0 + gb.C_dPU * math.sqrt(nup / ctm) / delta) + C_err
    C_DF = gb.C_dPU * nup / (math.sqrt(ctm * num_) * delta) + 2.0 * C_err
    C_DB = (
        gb.C_dPU * (nup / math.sqrt(ctm * num_) + cb.a_inf / ctm) / delta
        + 2.0 * C_cont * C_err
    )
    return ConstantsEntry(
        C_stab=1.0, C_err=C_err, C_D=C_D, C_DF=C_DF, C_DB=C_DB, C_cont=C_cont
    )


def theorem_bounds(cr):
    """(upper, lower): upper bound on the weighted norm of M^{-1}A and lower
    bound on the field-of-values distance from the origin,

        upper = sqrt(L0 L1) * max_j C_D (C_stab C_DB + C_D)
        lower = 1/L0 - L1 max_j C_D C_stab C_DB
                     - L1 max_j C_DF (C_stab C_DB + C_D).
    """
    l0, l1 = cr.lambda0, cr.lambda1
    upper_term = max(e.C_D * (e.C_stab * e.C_DB + e.C_D) for e in cr.per_subdomain)
    mid_term = max(e.C_D * e.C_stab * e.C_DB for e in cr.per_subdomain)
    low_term = max(e.C_DF * (e.C_stab * e.C_DB + e.C_D) for e in cr.per_subdomain)
    upper = math.sqrt(l0 * l1) * upper_term
    lower = 1.0 / l0 - l1 * mid_term - l1 * low_term
    return upper, lower


def _restriction(sd, n):
    nloc = len(sd.dofs)
    return sp.csr_matrix(
        (np.ones(nloc), (np.arange(nloc), sd.dofs)), shape=(nloc, n)
    )


def _row_identity_defect(G, local_mat, sd):
    """max over D-nonzero rows of ||row(R_j G) - row(local R_j)||_inf
    relative to ||row(R_j G)||_inf."""
    n = G.shape[0]
    R = _restriction(sd, n)
    lhs = G[sd.dofs, :].tocsr()
    rhs = (local_mat @ R).tocsr()
    idx = np.flatnonzero(sd.weights > 0)
    if len(idx) == 0:
        return 0.0
    diff = abs((lhs - rhs)[idx])
    ref = abs(lhs[idx])
    # per-row infinity norms via the sparse row max of absolute values
    diff_rows = diff.max(axis=1).toarray().ravel() if diff.nnz else np.zeros(len(idx))
    ref_rows = ref.max(axis=1).toarray().ravel() if ref.nnz else np.zeros(len(idx))
    return float((diff_rows / np.maximum(ref_rows, 1e-300)).max())


def check_assumptions(sys, dec, dense_cap=5000, rel_tol=1e-12, pu_tol=1e-15):
    """Verify the identities the convergence theorem relies on:
    the partition-of-unity identity, the row identities between R_jA and
    B_jR_j (and between R_jF and F_jR_j) on D-nonzero rows, local coercivity
    sym(B_j) >= F_j (PSD check, densified when small enough), and — when SUPG
    is off and the boundary is all-Dirichlet — sym(A) = F_global entrywise."""
    pu = pu_identity_defect(dec)

    rel_B = 0.0
    rel_F = 0.0
    coer_min = math.inf
    fscale = max(abs(sys.F_global).max(), 1e-300)
    for sd in dec.subdomains:
        rel_B = max(rel_B, _row_identity_defect(sys.A, sd.local.B, sd))
        rel_F = max(rel_F, _row_identity_defect(sys.F_global, sd.local.F, sd))
        if sd.num_dofs <= dense_cap:
            Bd = sd.local.B.toarray()
            Fd = sd.local.F.toarray()
            w = np.linalg.eigvalsh(0.5 * (Bd + Bd.T) - Fd)
            coer_min = min(coer_min, w[0] / fscale)

    supg_off = sys.pd is None or sys.pd.supg_theta == 0.0
    all_dirichlet = all(mk == DIRICHLET for mk in sys.mesh.boundary_markers)
    if supg_off and all_dirichlet:
        symA = 0.5 * (sys.A + sys.A.T)
        sym_rel = float(abs(symA - sys.F_global).max() / fscale)
        sym_pass = sym_rel <= rel_tol
    else:
        sym_rel = math.nan
        sym_pass = True

    coer_pass = coer_min >= -1e-10
    rep = AssumptionsReport(
        pu_defect=float(pu),
        pu_pass=pu <= pu_tol,
        row_identity_B_rel=rel_B,
        row_identity_B_pass=rel_B <= rel_tol,
        row_identity_F_rel=rel_F,
        row_identity_F_pass=rel_F <= rel_tol,
        coercivity_min_eig=float(coer_min),
        coercivity_pass=bool(coer_pass),
        sym_part_rel=sym_rel,
        sym_part_pass=bool(sym_pass),
        all_pass=False,
    )
    rep.all_pass = (
        rep.pu_pass
        and rep.row_identity_B_pass
        and rep.row_identity_F_pass
        and rep.coercivity_pass
        and rep.sym_part_pass
    )
    return rep


def _chi_gradient_max(mesh, sd):
    """max over all elements of |grad chi_j| for the P1 function with nodal
    values sd.weights on sd.dofs and 0 elsewhere."""
    vals = np.zeros(mesh.num_vertices)
    vals[sd.dofs] = sd.weights
    tris = mesh.triangles
    p = mesh.vertices[tris]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    area2 = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    g = np.empty((len(tris), 3, 2))
    for i in range(3):
        pa = p[:, (i + 1) % 3]
        pb = p[:, (i + 2) % 3]
        g[:, i, 0] = pa[:, 1] - pb[:, 1]
        g[:, i, 1] = pb[:, 0] - pa[:, 0]
    g /= area2[:, None, None]
    grad = np.einsum("mi,mik->mk", vals[tris], g)
    return float(np.linalg.norm(grad, axis=1).max())


def empirical_constants(sys, dec, dense_cap=5000):
    """Operator-norm counterparts of the constants, one entry per subdomain:
    C_D = ||L^T D L^{-T}||_2, C_DB = ||L^{-1}[D,B]L^{-T}||_2,
    C_DF = ||L^{-1}[D,F]L^{-T}||_2 with the local F = L L^T,
    C_stab = ||B^{-1}||_F = 1/sigma_min(L^{-1} B L^{-T}),
    C_dPU = max(1, delta * max|grad chi_j|)."""
    entries = []
    delta = dec.delta
    for sd in dec.subdomains:
        nloc = sd.num_dofs
        if nloc > dense_cap:
            raise ValueError(f"subdomain {sd.index}: {nloc} dofs exceeds dense cap")
        Fd = sd.local.F.toarray()
        Bd = sd.local.B.toarray()
        L = scipy.linalg.cholesky(0.5 * (Fd + Fd.T), lower=True)
        Linv = scipy.linalg.solve_triangular(L, np.eye(nloc), lower=True)
        D = sd.weights
        C_D = np.linalg.norm(L.T @ (D[:, None] * Linv.T), 2)
        comm_B = D[:, None] * Bd - Bd * D[None, :]
        comm_F = D[:, None] * Fd - Fd * D[None, :]
        C_DB = np.linalg.norm(Linv @ comm_B @ Linv.T, 2)
        C_DF = np.linalg.norm(Linv @ comm_F @ Linv.T, 2)
        sv = np.linalg.svd(Linv @ Bd @ Linv.T, compute_uv=False)
        C_stab = 1.0 / sv[-1]
        C_dPU = max(1.0, delta * _chi_gradient_max(dec.mesh, sd))
        entries.append(
            EmpiricalEntry(C_D=float(C_D), C_DB=float(C_DB), C_DF=float(C_DF),
                           C_dPU=float(C_dPU), C_stab=float(C_stab))
        )
    return entries


def weighted_norm_and_fov(sys, prec, dense_cap=5000, n_angles=360):
    """||M^{-1}A||_F and the distance of the field of values
    W_F(M^{-1}A) = {(v, M^{-1}A v)_F : ||v||_F = 1} from the origin.

    Forms C = L^T (M^{-1}A) L^{-T} with F_global = L L^T, takes ||C||_2, and
    sweeps theta over a uniform angle grid: each supporting half-plane gives
    lambda_min of the Hermitian part of e^{i theta} C, realized as a real
    symmetric 2n x 2n block operator [[cos S, -sin K], [sin K, cos S]].
    The reported distance max_theta lambda_min never exceeds the true
    distance; if no angle gives a positive bound the origin may be enclosed
    and 0 is reported with a flag."""
    n = sys.A.shape[0]
    if n > dense_cap:
        raise ValueError(f"{n} dofs exceeds dense cap {dense_cap}")
    spd = linalg.spd_factorize(sys.F_global, dense_cap=dense_cap)
    L = spd.L
    MinvA = preconditioner.materialize(prec, sys.A, cap=dense_cap)
    W = L.T @ MinvA
    C = scipy.linalg.solve_triangular(L, W.T, lower=True).T
    norm_F = float(np.linalg.norm(C, 2))

    S = 0.5 * (C + C.T)
    K = 0.5 * (C - C.T)
    thetas = np.linspace(0.0, 2.0 * np.pi, n_angles, endpoint=False)
    if n <= 200:
        lam = np.empty(n_angles)
        for i, th in enumerate(thetas):
            H = np.cos(th) * S + 1j * np.sin(th) * K
            lam[i] = scipy.linalg.eigvalsh(H)[0]
        best = float(lam.max())
    else:
        lam = _fov_sweep_lobpcg(S, K, thetas)
        # the sweep is approximate; certify the winning angles exactly
        best = -np.inf
        for i in np.argsort(lam)[-5:]:
            H = np.cos(thetas[i]) * S + 1j * np.sin(thetas[i]) * K
            best = max(best, float(scipy.linalg.eigvalsh(H)[0]))
    if best > 0.0:
        return WeightedSpectrumReport(norm_F, best, False, n_angles)
    return WeightedSpectrumReport(norm_F, 0.0, True, n_angles)


def _fov_sweep_lobpcg(S, K, thetas, block=2):
    """Approximate lambda_min of the Hermitian part of e^{i theta} C at each
    angle with a warm-started block iteration on the equivalent real
    symmetric 2n x 2n operator [[cos S, -sin K], [sin K, cos S]] (real
    embedding of cos*S + i sin*K; eigenvalues appear doubled).  Each angle
    starts from the previous block, so a handful of iterations suffices.
    Angles that fail fall back to an exact dense solve."""
    n = S.shape[0]
    rng = np.random.default_rng(0)
    X = rng.standard_normal((2 * n, block))
    lam = np.empty(len(thetas))
    for i, th in enumerate(thetas):
        c, s = np.cos(th), np.sin(th)
        cS, sK = c * S, s * K

        def mv(x, cS=cS, sK=sK):
            u, v = x[:n], x[n:]
            return np.concatenate([cS @ u - sK @ v, sK @ u + cS @ v])

        op = LinearOperator((2 * n, 2 * n), matvec=mv, matmat=mv, dtype=float)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                w, V = lobpcg(op, X, largest=False, tol=1e-7, maxiter=25)
            if not np.all(np.isfinite(w)):
                raise ValueError("non-finite Ritz values")
            lam[i] = w.min()
            X = V
        except Exception:
            H = c * S + 1j * s * K
            lam[i] = scipy.linalg.eigvalsh(H)[0]
            X = rng.standard_normal((2 * n, block))
    return lam


def _to_jsonable(obj):
    if isinstance(obj, dict):
        return {k: _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if hasattr(obj, "__dataclass_fields__"):
        return {k: _to_jsonable(getattr(obj, k)) for k in obj.__dataclass_fields__}
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, float) and math.isnan(obj):
        return "nan"
    return obj


def analysis_report(sys, dec, prec=None, gb=None, dense_cap=5000, n_angles=360):
    """Assemble the full report: geometry, coefficient bounds, theoretical
    constants (generic C_dPU replaced by the empirical maximum), assumption
    checks, empirical constants, theorem bounds with both constant families,
    and — when a preconditioner is given and the size permits — the weighted
    norm and field-of-values distance."""
    gb = gb or GenericConstants()
    geo = geometric_constants(dec)
    h = dec.mesh.h
    delta = dec.delta
    cbs = [coefficient_bounds(dec.mesh, sys.pd, dec, j) for j in range(dec.N)]
    assumptions = check_assumptions(sys, dec, dense_cap=dense_cap)

    report = {
        "geometry": geo,
        "h": h,
        "delta": delta,
        "coefficient_bounds": cbs,
        "assumptions": assumptions,
        "weighted_norm_valid": sys.weighted_norm_valid,
    }

    small_enough = all(sd.num_dofs <= dense_cap for sd in dec.subdomains)
    emp = None
    if small_enough and sys.weighted_norm_valid:
        emp = empirical_constants(sys, dec, dense_cap=dense_cap)
        report["empirical_constants"] = emp
        gb_used = GenericConstants(
            C_Pi=gb.C_Pi, C_inv=gb.C_inv, C_tr=gb.C_tr,
            C_dPU=max(e.C_dPU for e in emp), r=gb.r, d=gb.d,
        )
    else:
        gb_used = gb
    report["generic_constants"] = gb_used

    entries = [theoretical_constants(gb_used, cb, h, delta) for cb in cbs]
    cr = ConstantsReport(
        lambda0=geo.lambda0, lambda1=geo.lambda1, c_rd=c_of_rd(gb_used.r, gb_used.d),
        per_subdomain=entries,
    )
    report["theoretical_constants"] = cr
    if all(e.valid for e in entries):
        up, lo = theorem_bounds(cr)
        report["theoretical_bounds"] = {"upper": up, "lower": lo}
    if emp is not None:
        cr_emp = ConstantsReport(
            lambda0=geo.lambda0, lambda1=geo.lambda1, c_rd=cr.c_rd,
            per_subdomain=[
                ConstantsEntry(
                    C_stab=e.C_stab, C_err=math.nan, C_D=e.C_D,
                    C_DF=e.C_DF, C_DB=e.C_DB, C_cont=math.nan,
                )
                for e in emp
            ],
        )
        up_e, lo_e = theorem_bounds(cr_emp)
        report["empirical_bounds"] = {"upper": up_e, "lower": lo_e}

    if prec is not None and sys.A.shape[0] <= dense_cap and sys.weighted_norm_valid:
        spec_rep = weighted_norm_and_fov(sys, prec, dense_cap=dense_cap, n_angles=n_angles)
        report["weighted_spectrum"] = spec_rep
    return report


def write_analysis_json(report, path):
    """Deterministic JSON serialization of an analysis report."""
    with open(path, "w") as fh:
        json.dump(_to_jsonable(report), fh, indent=2, sort_keys=True)
        fh.write("\n")
