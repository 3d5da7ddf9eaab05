import json
import math

import numpy as np
import pytest

from jacobipoly.driver import default_grid
from jacobipoly.families import dnsq_values, family_ids, get_family, phi0sq_values, validate_parameters
from jacobipoly.hamiltonian import build_hamiltonian
from jacobipoly.spectral import (
    METHODS,
    BreakdownError,
    DualConstructionError,
    SpectrumMethodError,
    build_dual_hamiltonian,
    build_P_table,
    build_Q_table,
    duality_check,
    eigenvector_check,
    lattice_BD,
    normalization_dn,
    orthogonality_check,
    partner_duality_check,
    recurrence_coeffs_from_closure,
    solve_spectrum,
    spectral_window,
)

FINITE = family_ids("finite")


def kraw(p=0.5, N=2):
    return get_family("krawtchouk"), validate_parameters("krawtchouk", p=p, N=N)


def charlier(a=1.0):
    return get_family("charlier"), validate_parameters("charlier", a=a)


def test_krawtchouk_numeric_spectrum():
    f, p = kraw()
    b, d = lattice_BD(f, p, 2)
    sol = solve_spectrum((b, d))
    assert np.allclose(sol.eigenvalues, [0, 1, 2], atol=1e-14)
    H = build_hamiltonian(b, d, 2)
    assert np.allclose(solve_spectrum(H).eigenvalues, [0, 1, 2], atol=1e-14)


def test_charlier_alpha_iteration():
    f, p = charlier()
    E = solve_spectrum(None, "alpha_iteration", f, p, n_max=12).eigenvalues
    assert np.allclose(E, np.arange(13), rtol=1e-14, atol=1e-14)


@pytest.mark.parametrize("method", ["closed_form", "shape_invariance", "alpha_iteration", "characteristic_roots"])
def test_methods_agree_on_krawtchouk(method):
    f, p = kraw(0.3, 7)
    sol = solve_spectrum(None, method, f, p)
    assert np.allclose(sol.eigenvalues, np.arange(8), rtol=1e-12, atol=1e-12)
    if method == "characteristic_roots":
        assert sol.residuals.max() <= 1e-12


def test_unknown_method_and_missing_inputs():
    assert "numeric" in METHODS
    with pytest.raises(SpectrumMethodError, match="unknown method"):
        solve_spectrum(None, "bisection")
    with pytest.raises(SpectrumMethodError, match="needs the family"):
        solve_spectrum(None, "closed_form")
    f, p = charlier()
    with pytest.raises(SpectrumMethodError, match="n_max"):
        solve_spectrum(None, "closed_form", f, p)


def test_charlier_recurrence_polynomial():
    f, p = charlier()
    x = np.arange(10)
    P = build_P_table(f, p, 9, route="recurrence", n_max=3)
    assert np.allclose(P.values[2], x**2 - 3 * x + 1, atol=1e-12)
    cf = build_P_table(f, p, 9, n_max=3)
    assert np.allclose(P.values, cf.values, atol=1e-12)


def test_krawtchouk_tables_and_dual_column():
    f, p = kraw()
    P = build_P_table(f, p, 2)
    assert np.allclose(P.values[1], [1, 0, -1], atol=1e-15)
    assert P.anchor_deviation() == 0.0
    b, d = lattice_BD(f, p, 2)
    Q = build_Q_table(b, d, [0, 1, 2], 2)
    assert np.allclose(Q.values[:, 1], [1, 0, -1], atol=1e-15)
    assert np.all(Q.values[0] == 1) and np.all(Q.values[:, 0] == 1)
    assert Q.characteristic_residual.max() <= 1e-12
    assert duality_check(P, Q, tol=1e-10).residual <= 1e-10


def test_krawtchouk_sums():
    f, p = kraw()
    w = phi0sq_values(f, p, np.arange(3))
    P1 = build_P_table(f, p, 2).values[1]
    assert math.isclose(float(np.sum(w * P1 * P1)), 2.0, rel_tol=1e-14)
    norm = normalization_dn(f, p, 2)
    assert math.isclose(norm.d0sq, 0.25, rel_tol=1e-14)
    assert math.isclose(norm.product[1] / norm.product[0], 2.0, rel_tol=1e-14)
    assert norm.deviation <= 1e-9


def test_charlier_measure_sums_to_e():
    f, p = charlier()
    norm = normalization_dn(f, p, 3)
    assert abs(1 / norm.d0sq - math.e) <= 1e-10 * math.e


def test_charlier_recurrence_coefficients_from_closure():
    f, p = charlier()
    rc = recurrence_coeffs_from_closure(f, p, 8)
    assert math.isclose(rc.A[0], -1.0, rel_tol=1e-14)
    assert rc.C[0] == 0.0
    assert rc.a0_relation <= 1e-12
    assert rc.deviation <= 1e-10


def test_krawtchouk_dual_hamiltonian_is_self():
    f, p = kraw(0.5, 6)
    n = np.arange(7)
    Hd = build_dual_hamiltonian(f.A(n, p), f.C(n, p))
    b, d = lattice_BD(f, p, 6)
    H = build_hamiltonian(b, d, 6)
    assert np.abs(Hd.dense() - H.dense()).max() <= 1e-14


def test_dual_hamiltonian_sign_guard():
    with pytest.raises(DualConstructionError):
        build_dual_hamiltonian([1.0, -1.0], [0.0, -1.0])


def test_q_table_breakdown_on_zero_B():
    with pytest.raises(BreakdownError):
        build_Q_table(np.array([1.0, 0.0, 1.0, 1.0]), np.array([0.0, 1.0, 1.0, 1.0]), [0.5], 3)


def test_hahn_partner_duality():
    f = get_family("hahn")
    p = validate_parameters("hahn", a=2, b=3, N=10)
    res = partner_duality_check(f, p)
    assert res["partner"] == "dual_hahn"
    assert res["polynomial"].checked > 0 and res["polynomial"].residual <= 1e-9
    assert res["coordinate"] <= 1e-12


@pytest.mark.parametrize("fid", FINITE)
def test_finite_family_spectral_identities(fid):
    f = get_family(fid)
    for values in default_grid(fid):
        p = validate_parameters(fid, values)
        plan = spectral_window(f, p)
        E = np.asarray(f.E(np.arange(p.N + 1), p), dtype=float)
        lam = plan.eigenvalues
        scale = np.maximum(np.abs(E), abs(E[1]))
        assert np.max(np.abs(lam - E) / scale) <= 1e-8
        P = build_P_table(f, p, p.N)
        b, d = lattice_BD(f, p, p.N)
        Q = build_Q_table(b, d, E, p.N)
        dual = duality_check(P, Q)
        assert dual.checked > 0 and dual.residual <= 1e-9
        w = phi0sq_values(f, p, np.arange(p.N + 1))
        dn = dnsq_values(f, p, np.arange(p.N + 1))
        rows = orthogonality_check(P, w, dn)
        assert rows.checked > 0 and rows.residual <= 1e-8
        cols = orthogonality_check(P, w, dn, mode="completeness")
        assert cols.checked > 0 and cols.residual <= 1e-8
        vec = eigenvector_check(plan.eigenvectors, P, w, dn)
        assert vec.checked > 0 and vec.residual <= 1e-8


def test_infinite_window_plan_charlier():
    f, p = charlier(2.0)
    plan = spectral_window(f, p)
    assert plan.applicable and plan.n_max >= 10
    assert np.allclose(plan.eigenvalues, np.arange(plan.n_max + 1), atol=1e-8)


def test_table_exports():
    f, p = kraw()
    P = build_P_table(f, p, 2)
    lines = P.to_csv().splitlines()
    assert lines[0] == "x,P0,P1,P2"
    assert lines[3].startswith("2,1,-1,")
    doc = json.loads(P.to_json())
    assert doc["meta"]["family"] == "krawtchouk"
    assert np.array_equal(np.array(doc["data"]["values"]), P.values)
