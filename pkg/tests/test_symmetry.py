import numpy as np
import pytest

from jacobipoly.families import get_family, phi0sq_values, validate_parameters
from jacobipoly.hamiltonian import build_hamiltonian
from jacobipoly.spectral import alpha_pm, lattice_BD, spectral_window
from jacobipoly.symmetry import (
    ShiftRangeError,
    SingularR0Error,
    _reference_P,
    build_ladder_operators,
    closure_residual,
    dual_closure_check,
    dual_polynomials,
    eta_steps,
    heisenberg_check,
    ladder_action_check,
    rodrigues_generate,
    shape_invariance_check,
    shift_operator_action,
    structure_relation_check,
)


def setup(fid, W=None, **values):
    f = get_family(fid)
    p = validate_parameters(fid, values)
    W = p.N if f.finite else W
    b, d = lattice_BD(f, p, W)
    x = np.arange(W + 1)
    return f, p, build_hamiltonian(b, d, W), np.asarray(f.eta(x, p), dtype=float)


def test_charlier_closure():
    f, p, H, eta = setup("charlier", 20, a=1)
    assert closure_residual(H, eta, f.closure(p), margin=2).residual <= 1e-10


def test_krawtchouk_closure_and_zero_control():
    f, p, H, eta = setup("krawtchouk", p=0.4, N=8)
    cc = f.closure(p)
    assert closure_residual(H, eta, cc, margin=0).residual <= 1e-12
    zero = cc.replace(**{k: 0.0 for k in cc.as_dict() if k != "shifted_argument_offset"})
    assert closure_residual(H, eta, zero, margin=0).residual >= 1e-3


def test_charlier_alpha_roots():
    f = get_family("charlier")
    p = validate_parameters("charlier", a=1)
    up, down = alpha_pm(f.closure(p), np.arange(6.0))
    assert np.allclose(up, 1) and np.allclose(down, -1)


def test_alpha_sum_and_product_krawtchouk():
    f = get_family("krawtchouk")
    p = validate_parameters("krawtchouk", p=0.3, N=6)
    cc = f.closure(p)
    z = np.asarray(f.E(np.arange(7), p), dtype=float)
    up, down = alpha_pm(cc, z)
    assert np.allclose(up, 1, rtol=1e-14)
    assert np.allclose(up + down, cc.R1(z), atol=1e-14)
    assert np.allclose(up * down, -cc.R0(z), atol=1e-14)


def ladder(fid, W=None, **values):
    f, p, H, eta = setup(fid, W, **values)
    plan = spectral_window(f, p)
    if not f.finite:
        # build on the window the plan converged on
        f, p, H, eta = setup(fid, plan.x_max, **values)
    x = np.arange(len(eta))
    ops = build_ladder_operators(H, eta, f.closure(p), spectrum=(plan.eigenvalues, plan.eigenvectors),
                                 eta_step=eta_steps(f, p, x[:-1]), solver=plan.solver)
    return f, p, H, eta, plan, ops


def test_krawtchouk_ladder():
    f, p, H, eta, plan, ops = ladder("krawtchouk", p=0.5, N=2)
    n = np.arange(4)
    assert float(f.A(0, p)) == pytest.approx(-1.0)
    psi0 = plan.eigenvectors[:, 0]
    assert np.abs(ops.a_minus @ psi0).max() <= 1e-13
    plus, minus = ladder_action_check(ops, f.A(n, p), f.C(n, p))
    assert plus.max() <= 1e-8 and minus.max() <= 1e-8
    assert ops.hermiticity_defect() <= 1e-10
    assert np.abs(ops.a_plus.T - ops.a_minus).max() <= 1e-10


def test_krawtchouk_heisenberg():
    f, p, H, eta, plan, ops = ladder("krawtchouk", p=0.3, N=7)
    r = heisenberg_check(H, eta, f.closure(p), t_samples=(0.0, 0.3, 1.7), ops=ops)
    assert r[0] <= 1e-10
    assert r.max() <= 1e-8


def test_charlier_heisenberg_on_converged_subspace():
    f, p, H, eta, plan, ops = ladder("charlier", 15, a=1)
    r = heisenberg_check(H, eta, f.closure(p), t_samples=(0.0, 0.5), ops=ops)
    assert r.max() <= 1e-7
    n = np.arange(plan.n_max + 2)
    plus, minus = ladder_action_check(ops, f.A(n, p), f.C(n, p))
    assert max(plus.max(), minus.max()) <= 1e-8


def test_structure_relation_hahn():
    f, p, H, eta, plan, ops = ladder("hahn", a=2, b=3, N=10)
    x = np.arange(p.N + 1)
    P, Pe = _reference_P(f, p, np.arange(p.N + 1), x)
    n = np.arange(p.N + 2)
    m = structure_relation_check(ops, np.sqrt(phi0sq_values(f, p, x)), P, f.A(n, p), f.C(n, p), Pe)
    assert m.checked > 0 and m.residual <= 1e-8


def test_singular_R0_detected():
    # Hahn with a + b = 2 has R0(0) = 0
    f, p, H, eta = setup("hahn", a=1.5, b=0.5, N=6)
    with pytest.raises(SingularR0Error):
        build_ladder_operators(H, eta, f.closure(p))


def test_racah_phi():
    f = get_family("racah")
    p = validate_parameters("racah", a=8, b=0.7, d=0.5, N=6)
    x = np.arange(7)
    assert np.allclose(f.phi(x, p), (2 * x + p.d + 1) / (p.d + 1), rtol=1e-14)
    assert float(f.phi(0, p)) == 1.0


@pytest.mark.parametrize("fid,values", [
    ("krawtchouk", dict(p=0.3, N=6)),
    ("charlier", dict(a=1.5)),
    ("meixner", dict(beta=1.5, c=0.4)),
    ("q_hahn", dict(a=0.5, b=0.4, N=8, q=0.7)),
    ("racah", dict(a=8, b=0.7, d=0.5, N=6)),
])
def test_shape_invariance(fid, values):
    f = get_family(fid)
    p = validate_parameters(fid, values)
    assert shape_invariance_check(f, p).worst <= 1e-10
    fw, bw, zero = shift_operator_action(f, p)
    assert zero <= 1e-14
    assert fw.checked > 0 and fw.residual <= 1e-9
    assert bw.checked > 0 and bw.residual <= 1e-9


def test_shift_unavailable_without_shift_data():
    f = get_family("dual_q_charlier")
    p = validate_parameters("dual_q_charlier", a=0.5, q=0.7)
    with pytest.raises(ShiftRangeError):
        rodrigues_generate(f, p, 1)


def test_rodrigues_examples():
    f = get_family("charlier")
    p = validate_parameters("charlier", a=1)
    gen, m = rodrigues_generate(f, p, 0)
    assert np.allclose(gen, np.sqrt(phi0sq_values(f, p, np.arange(21))))
    gen, m = rodrigues_generate(f, p, 2)
    assert m.residual <= 1e-9
    f = get_family("krawtchouk")
    p = validate_parameters("krawtchouk", p=0.5, N=2)
    gen, m = rodrigues_generate(f, p, 1)
    assert m.residual <= 1e-12
    assert np.allclose(gen, [1, 0, -1], atol=1e-15)


def test_charlier_dual_closure():
    f = get_family("charlier")
    p = validate_parameters("charlier", a=1)
    R1d, R0d, _ = dual_polynomials(f.closure(p), 1.0)
    assert np.allclose(R1d(np.arange(5.0)), 0.0)
    assert np.allclose(R0d(np.arange(5.0)), 1.0)
    assert dual_closure_check(f, p).worst <= 1e-12
