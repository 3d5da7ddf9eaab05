import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from jacobipoly.families import ClosureCoefficients, get_family, validate_parameters
from jacobipoly.hamiltonian import build_hamiltonian, factorization_residual, factorize, ground_state
from jacobipoly.reconstruction import classify_eta, dual_R0, eta_product_identity, roundtrip_catalog
from jacobipoly.spectral import (
    alpha_pm,
    build_P_table,
    build_Q_table,
    duality_check,
    lattice_BD,
    numeric_spectrum,
    partner_duality_check,
    spectral_window,
)
from jacobipoly.symmetry import build_ladder_operators, closure_residual, eta_steps

SETTINGS = settings(max_examples=40, deadline=None)
unit = st.floats(0.05, 0.95)


@st.composite
def finite_BD(draw):
    N = draw(st.integers(2, 25))
    b = draw(st.lists(st.floats(0.01, 100.0), min_size=N, max_size=N))
    d = draw(st.lists(st.floats(0.01, 100.0), min_size=N, max_size=N))
    return np.array(b + [0.0]), np.array([0.0] + d)


@SETTINGS
@given(finite_BD())
def test_factorization_and_ground_state(bd):
    b, d = bd
    W = len(b) - 1
    H = build_hamiltonian(b, d, W)
    A, _ = factorize(b, d, W)
    res, hmax = factorization_residual(H, A)
    assert res <= 1e-13 * max(1.0, hmax)
    phi0 = ground_state(b, d, W).values
    assert phi0[0] == 1.0
    ratio = phi0[1:] / phi0[:-1]
    assert np.allclose(ratio, np.sqrt(b[:-1] / d[1:]), rtol=1e-12)
    scale = np.abs(H.dense()) @ np.abs(phi0)
    assert np.all(np.abs(H.matvec(phi0)) <= 1e-12 * scale)


@SETTINGS
@given(finite_BD())
def test_spectrum_psd_simple_and_anchored(bd):
    b, d = bd
    sol = numeric_spectrum(b, d)
    lam, V = sol.eigenvalues, sol.eigenvectors
    hmax = build_hamiltonian(b, d, len(b) - 1).max_norm()
    assert lam[0] >= -1e-10 * hmax
    assert np.all(np.diff(lam) > 0)
    assert np.all(np.abs(V[0]) > 0)
    Q = build_Q_table(b, d, lam, len(b) - 1)
    assert np.all(Q.values[0] == 1)


@SETTINGS
@given(st.floats(0, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_alpha_sum_and_product(r11, r10, r00, z):
    cc = ClosureCoefficients(r11, r10, r11, 2 * r10, r00, 0.0, 0.0, 0.0)
    R1, R0 = float(cc.R1(z)), float(cc.R0(z))
    assume(R1 * R1 + 4 * R0 > 1e-6 * max(1.0, R1 * R1))
    up, down = alpha_pm(cc, z)
    scale = max(1.0, abs(up), abs(down))
    assert abs(up + down - R1) <= 1e-12 * scale
    assert abs(up * down + R0) <= 1e-12 * scale * scale
    assert up >= down


@SETTINGS
@given(st.floats(0.0, 2.0), st.floats(-3.0, 3.0), st.floats(0.1, 3.0))
def test_eta_identity_all_classes(r11, rm12, eta1):
    cc = ClosureCoefficients(r11, 0.0, r11, 0.0, 0.0, rm12, 0.0, 0.0)
    cls = classify_eta(cc, eta1)
    assert cls.tag in ("linear", "quadratic", "q_geometric", "q_inverse_geometric", "q_quadratic")
    assert eta_product_identity(cc, eta1, 15) <= 1e-10


@SETTINGS
@given(st.floats(0.01, 2.0), st.floats(-3.0, 3.0), st.floats(0.1, 3.0))
def test_dual_alpha_gives_lattice_steps(r11, rm12, eta1):
    # alpha_dual(eta(x)) are the roots of t^2 - R1d t - R0d
    cc = ClosureCoefficients(r11, 0.0, r11, 0.0, 0.0, rm12, 0.0, 0.0)
    cls = classify_eta(cc, eta1)
    x = np.arange(12)
    eta = cls.values(x)
    up, up_size = cls.steps_with_size(x)
    down, down_size = cls.steps_with_size(x - 1)
    down = -down
    R1d = r11 * eta + rm12
    R0d = dual_R0(cc, eta1, eta)
    s = up_size + down_size + np.abs(r11 * eta) + abs(rm12)
    assert np.all(np.abs(up + down - R1d) <= 1e-10 * s)
    p = (np.abs(up) * down_size + np.abs(down) * up_size + np.abs(r11 * eta * eta)
         + np.abs(2 * rm12 * eta) + abs(eta1 * (rm12 - eta1)))
    assert np.all(np.abs(up * down + R0d) <= 1e-10 * p)


@SETTINGS
@given(unit, st.integers(1, 20))
def test_krawtchouk_duality_and_closure(p_, N):
    f = get_family("krawtchouk")
    p = validate_parameters("krawtchouk", p=p_, N=N)
    P = build_P_table(f, p, N)
    b, d = lattice_BD(f, p, N)
    Q = build_Q_table(b, d, f.E(np.arange(N + 1), p), N)
    m = duality_check(P, Q)
    assert m.checked > 0 and m.residual <= 1e-9
    H = build_hamiltonian(b, d, N)
    eta = np.asarray(f.eta(np.arange(N + 1), p), dtype=float)
    assert closure_residual(H, eta, f.closure(p), margin=0).residual <= 1e-9


@SETTINGS
@given(st.floats(0.1, 5.0), st.floats(0.1, 5.0), st.integers(2, 12))
def test_hahn_partner_duality(a, b, N):
    f = get_family("hahn")
    p = validate_parameters("hahn", a=a, b=b, N=N)
    res = partner_duality_check(f, p)
    assert res["polynomial"].checked > 0 and res["polynomial"].residual <= 1e-9


@SETTINGS
@given(unit, st.integers(2, 15))
def test_ladder_hermiticity(p_, N):
    f = get_family("krawtchouk")
    p = validate_parameters("krawtchouk", p=p_, N=N)
    plan = spectral_window(f, p)
    b, d = lattice_BD(f, p, N)
    x = np.arange(N + 1)
    ops = build_ladder_operators(build_hamiltonian(b, d, N), f.eta(x, p), f.closure(p),
                                 spectrum=(plan.eigenvalues, plan.eigenvectors),
                                 eta_step=eta_steps(f, p, x[:-1]), solver=plan.solver)
    assert ops.hermiticity_defect() <= 1e-10


@SETTINGS
@given(st.floats(0.1, 20.0))
def test_charlier_roundtrip(a):
    f = get_family("charlier")
    rt = roundtrip_catalog(f, validate_parameters("charlier", a=a))
    assert rt.deviation <= 1e-9 and abs(rt.ri0cond) <= 1e-10 and rt.positive


@SETTINGS
@given(st.floats(0.2, 5.0), unit)
def test_meixner_roundtrip(beta, c):
    f = get_family("meixner")
    rt = roundtrip_catalog(f, validate_parameters("meixner", beta=beta, c=c))
    assert rt.deviation <= 1e-9 and rt.positive
