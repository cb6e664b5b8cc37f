"""Analysis-layer properties: combinatorial constants by independent
enumeration, geometric overlap constants by brute-force set computation,
closed-form constant formulas, assumption checks, and the weighted-norm /
field-of-values machinery against exact small-case oracles."""

import itertools
import json
import math

import numpy as np
import pytest
import scipy.linalg

from schwarzdd import analysis, linalg, preconditioner
from schwarzdd.decomposition import build_decomposition, build_geometry
from schwarzdd.mesh import build_rect_mesh
from schwarzdd.problem import assemble_global, build_scenario


def _pipeline(N=3, cells=8, name="rotating", c0=1.0, nu=0.1, k=1, theta=0.0,
              partition="strips"):
    mesh = build_rect_mesh(0.2 * N, 0.2, cells * N, cells)
    pd = build_scenario(name, c0, nu, supg_theta=theta)
    sys_ = assemble_global(mesh, pd)
    dec = build_decomposition(mesh, pd, N, grow_layers=k, partition=partition)
    return mesh, pd, sys_, dec


# --------------------------------------------------------------- constants


def _c_of_rd_reference(r, d):
    # independent enumeration: for each gamma with |gamma| = r, count the
    # nonzero beta <= gamma weighted by products of binomials, via explicit
    # sets of lattice points
    best = 0
    for gamma in itertools.product(range(r + 1), repeat=d):
        if sum(gamma) != r:
            continue
        total = 0
        ranges = [list(range(g + 1)) for g in gamma]
        for beta in itertools.product(*ranges):
            if all(b == 0 for b in beta):
                continue
            prod = 1
            for g, b in zip(gamma, beta):
                prod *= math.comb(g, b)
            total += prod
        best = max(best, total)
    return best


def test_c_rd_enumeration():
    assert analysis.c_of_rd(2, 2) == 3
    for r, d in ((1, 1), (1, 2), (2, 2), (3, 2), (2, 3)):
        assert analysis.c_of_rd(r, d) == _c_of_rd_reference(r, d)
    with pytest.raises(ValueError):
        analysis.c_of_rd(0, 2)


def test_geometric_constants_brute_force():
    # strip decomposition with small overlap: interior strips meet both
    # neighbors (Lambda0 = 3 counting self), elements lie in at most 2;
    # tall enough that neighboring strips share well over 127 dofs, so a
    # narrow-integer overflow in the intersection counts would show up
    mesh = build_rect_mesh(1.0, 0.2, 40, 70)
    dec = build_geometry(mesh, 5, grow_layers=1)
    geo = analysis.geometric_constants(dec)

    dof_sets = [set(sd.dofs.tolist()) for sd in dec.subdomains]
    brute0 = max(
        sum(1 for other in dof_sets if mine & other) for mine in dof_sets
    )
    elem_sets = [set(sd.elements.tolist()) for sd in dec.subdomains]
    mult = {}
    for es in elem_sets:
        for e in es:
            mult[e] = mult.get(e, 0) + 1
    brute1 = max(mult.values())

    assert geo.lambda0 == brute0 == 3
    assert geo.lambda0_exclusive == 2
    assert geo.lambda1 == brute1 == 2


def test_geometric_constants_single_subdomain():
    mesh = build_rect_mesh(0.2, 0.2, 6, 6)
    dec = build_geometry(mesh, 1, grow_layers=1)
    geo = analysis.geometric_constants(dec)
    assert geo.lambda0 == 1 and geo.lambda1 == 1


def test_coefficient_bounds_constant_fields():
    mesh, pd, sys_, dec = _pipeline(N=2, cells=6, c0=2.0, nu=0.5)
    cb = analysis.coefficient_bounds(mesh, pd, dec, 0)
    assert cb.ctilde_plus == cb.ctilde_minus == 2.0
    assert cb.nu_plus == cb.nu_minus == 0.5
    assert cb.valid
    assert cb.a_inf > 0
    assert cb.alpha_inf > 0  # interface Robin edges carry positive alpha
    # diameter against brute force over this subdomain's vertices
    pts = mesh.vertices[dec.subdomains[0].dofs]
    d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
    assert cb.H_sub == pytest.approx(float(np.sqrt(d2.max())), rel=1e-12)


def test_coefficient_bounds_flag_violated_hypothesis():
    mesh, pd, sys_, dec = _pipeline(N=2, cells=6, name="contracting", c0=0.001, nu=1.0)
    cb = analysis.coefficient_bounds(mesh, pd, dec, 0)
    assert not cb.valid
    assert cb.ctilde_minus == pytest.approx(-0.999)
    assert cb.ctilde_minus <= cb.ctilde_plus


def test_theoretical_constants_positive_when_valid():
    gb = analysis.GenericConstants()
    cb = analysis.CoefficientBounds(
        ctilde_plus=1.0, ctilde_minus=0.5, nu_plus=1.0, nu_minus=0.1,
        a_inf=2.0, alpha_inf=1.0, H_sub=0.3, valid=True,
    )
    e = analysis.theoretical_constants(gb, cb, h=0.01, delta=0.04)
    assert e.valid
    for val in (e.C_stab, e.C_err, e.C_D, e.C_DF, e.C_DB, e.C_cont):
        assert math.isfinite(val) and val > 0


def test_theoretical_constants_nan_when_invalid():
    gb = analysis.GenericConstants()
    cb = analysis.CoefficientBounds(1.0, -0.1, 1.0, 0.1, 2.0, 1.0, 0.3, valid=False)
    e = analysis.theoretical_constants(gb, cb, h=0.01, delta=0.04)
    assert not e.valid
    assert math.isnan(e.C_err) and math.isnan(e.C_D)


def test_theorem_bounds_formula():
    e1 = analysis.ConstantsEntry(C_stab=1.0, C_err=0.1, C_D=2.0, C_DF=3.0,
                                 C_DB=4.0, C_cont=5.0)
    e2 = analysis.ConstantsEntry(C_stab=1.0, C_err=0.2, C_D=3.0, C_DF=1.0,
                                 C_DB=2.0, C_cont=5.0)
    cr = analysis.ConstantsReport(lambda0=3, lambda1=2, c_rd=3,
                                  per_subdomain=[e1, e2])
    upper, lower = analysis.theorem_bounds(cr)
    # upper = sqrt(L0 L1) max_j C_D (C_stab C_DB + C_D):
    #   j=1: 2(4+2)=12, j=2: 3(2+3)=15
    assert upper == pytest.approx(math.sqrt(6.0) * 15.0)
    # lower = 1/L0 - L1 max C_D C_stab C_DB - L1 max C_DF (C_stab C_DB + C_D):
    #   mid: max(8, 6) = 8; low: max(3*6, 1*5) = 18
    assert lower == pytest.approx(1.0 / 3.0 - 2.0 * 8.0 - 2.0 * 18.0)


# --------------------------------------------------------------- assumptions


@pytest.mark.parametrize("theta", [0.0, 0.15])
@pytest.mark.parametrize("name", ["rotating", "contracting", "horizontal"])
def test_assumptions_hold_by_construction(name, theta):
    mesh, pd, sys_, dec = _pipeline(N=3, cells=8, name=name, theta=theta)
    rep = analysis.check_assumptions(sys_, dec)
    assert rep.pu_defect <= 1e-15
    assert rep.row_identity_B_rel <= 1e-12
    assert rep.row_identity_F_rel <= 1e-12
    assert rep.coercivity_pass
    if theta == 0.0:
        assert rep.sym_part_rel <= 1e-12
    else:
        assert math.isnan(rep.sym_part_rel)  # identity not applicable
    assert rep.all_pass


def test_empirical_constants_sane():
    mesh, pd, sys_, dec = _pipeline(N=3, cells=8, nu=0.5)
    entries = analysis.empirical_constants(sys_, dec)
    assert len(entries) == 3
    for e in entries:
        for val in (e.C_D, e.C_DB, e.C_DF, e.C_stab):
            assert math.isfinite(val) and val >= 0
        assert e.C_dPU >= 1.0
        assert e.C_D >= 1.0  # D has a unit entry somewhere


# ------------------------------------------------- weighted norm and fov


def test_single_subdomain_preconditioned_matrix_is_identity():
    # N = 1 all-Dirichlet: M^{-1}A = I, so the weighted norm and the
    # field-of-values distance are both exactly 1
    mesh, pd, sys_, dec = _pipeline(N=1, cells=8)
    prec = preconditioner.SchwarzPreconditioner("soras", dec)
    rep = analysis.weighted_norm_and_fov(sys_, prec, n_angles=16)
    assert rep.norm_F == pytest.approx(1.0, abs=1e-9)
    assert rep.fov_distance == pytest.approx(1.0, abs=1e-9)
    assert not rep.origin_possibly_enclosed


def test_fov_iterative_path_matches_dense_sweep():
    # above 200 dofs the sweep runs the iterative path with exact
    # certification; brute-force the same angle grid densely and compare
    mesh, pd, sys_, dec = _pipeline(N=2, cells=10, nu=0.05)
    assert mesh.num_vertices > 200
    prec = preconditioner.SchwarzPreconditioner("soras", dec)
    n_angles = 24
    rep = analysis.weighted_norm_and_fov(sys_, prec, n_angles=n_angles)

    spd = linalg.spd_factorize(sys_.F_global)
    L = spd.L
    MinvA = preconditioner.materialize(prec, sys_.A)
    C = scipy.linalg.solve_triangular(L, (L.T @ MinvA).T, lower=True).T
    S, K = 0.5 * (C + C.T), 0.5 * (C - C.T)
    best = -np.inf
    for th in np.linspace(0.0, 2 * np.pi, n_angles, endpoint=False):
        H = np.cos(th) * S + 1j * np.sin(th) * K
        best = max(best, scipy.linalg.eigvalsh(H)[0])
    assert rep.norm_F == pytest.approx(np.linalg.norm(C, 2), rel=1e-9)
    assert rep.fov_distance == pytest.approx(max(best, 0.0), abs=1e-6)


def test_weighted_norm_respects_dense_cap():
    mesh, pd, sys_, dec = _pipeline(N=2, cells=10)
    prec = preconditioner.SchwarzPreconditioner("soras", dec)
    with pytest.raises(ValueError):
        analysis.weighted_norm_and_fov(sys_, prec, dense_cap=50)


# ------------------------------------------------------------------ reports


def test_analysis_report_structure_and_theorem_consistency():
    mesh, pd, sys_, dec = _pipeline(N=3, cells=8, nu=0.5)
    prec = preconditioner.SchwarzPreconditioner("soras", dec)
    rep = analysis.analysis_report(sys_, dec, prec=prec, n_angles=16)
    for key in ("geometry", "assumptions", "coefficient_bounds",
                "theoretical_constants", "theoretical_bounds",
                "empirical_constants", "empirical_bounds", "weighted_spectrum"):
        assert key in rep
    assert rep["assumptions"].all_pass
    # empirical-constant bounds must dominate the measured norm
    assert rep["weighted_spectrum"].norm_F <= rep["empirical_bounds"]["upper"]
    lo = rep["empirical_bounds"]["lower"]
    if lo > 0:
        assert rep["weighted_spectrum"].fov_distance >= lo


def test_analysis_report_invalid_case_omits_bounds():
    mesh, pd, sys_, dec = _pipeline(N=2, cells=6, name="contracting", c0=1.0)
    rep = analysis.analysis_report(sys_, dec)
    assert not rep["weighted_norm_valid"]
    assert "theoretical_bounds" not in rep
    assert "empirical_constants" not in rep


def test_json_serialization(tmp_path):
    # invalid scenario so the constants carry NaNs: they must encode as the
    # string "nan", never as bare NaN tokens
    mesh, pd, sys_, dec = _pipeline(N=2, cells=6, name="contracting", c0=0.001)
    rep = analysis.analysis_report(sys_, dec)
    path = tmp_path / "report.json"
    analysis.write_analysis_json(rep, path)
    text = path.read_text()
    back = json.loads(text)
    assert back["geometry"]["lambda0"] == 2
    assert isinstance(back["h"], float)
    assert back["theoretical_constants"]["per_subdomain"][0]["C_err"] == "nan"
    assert "NaN" not in text
