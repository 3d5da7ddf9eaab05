import numpy as np
import pytest

from jacobipoly.driver import default_grid
from jacobipoly.families import ClosureCoefficients, family_ids, get_family, validate_parameters
from jacobipoly.reconstruction import (
    UnsupportedRegime,
    characteristic_q,
    classify_eta,
    eta_product_identity,
    iterate_eta,
    reconstruct,
    roundtrip_catalog,
    solve_eta,
)


def coeffs(r11=0.0, r10=0.0, r00=0.0, rm12=0.0, rm11=0.0, rm10=0.0):
    return ClosureCoefficients(r11, r10, r11, 2 * r10, r00, rm12, rm11, rm10)


def charlier_state(a=1.0, x_max=10, **changes):
    f = get_family("charlier")
    p = validate_parameters("charlier", a=a)
    cc = f.closure(p)
    if changes:
        cc = cc.replace(**changes)
    return reconstruct(cc, float(f.eta(1, p)), float(f.B(0, p)), x_max)


def test_eta_linear():
    cls = classify_eta(coeffs(), 1.0)
    assert cls.tag == "linear"
    assert np.array_equal(solve_eta(coeffs(), 1.0, 5)[0][1:-1], np.arange(6.0))


def test_eta_quadratic():
    cls = classify_eta(coeffs(rm12=2.0), 1.0)
    assert cls.tag == "quadratic"
    x = np.arange(8)
    assert np.allclose(cls.values(x), x**2)


def test_eta_q_geometric():
    assert characteristic_q(0.5) == pytest.approx(0.5)
    cls = classify_eta(coeffs(r11=0.5, rm12=-0.5), 0.5)
    assert cls.tag == "q_geometric" and cls.q == pytest.approx(0.5)
    x = np.arange(10)
    assert np.allclose(cls.values(x), 1 - 0.5**x, rtol=1e-15)
    # the class form and the raw recurrence agree while the latter is still accurate
    assert np.allclose(iterate_eta(coeffs(r11=0.5, rm12=-0.5), 0.5, 9), 1 - 0.5**x, atol=1e-14)


def test_negative_r11_unsupported():
    with pytest.raises(UnsupportedRegime, match="complex"):
        classify_eta(coeffs(r11=-0.5), 1.0)


def test_charlier_intermediates():
    st = charlier_state()
    x = np.arange(11)
    assert st.eta_class.tag == "linear"
    assert np.allclose(st.a_values, x + 1)
    assert st.ri0cond == pytest.approx(0.0, abs=1e-15)
    assert st.route == "simple"
    assert np.allclose(st.B_tilde, 2.0)
    assert np.allclose(st.D_tilde, 2 * x)
    assert np.allclose(st.B_values, 1.0) and np.allclose(st.D_values, x)
    assert st.D_values[0] == 0.0


def test_krawtchouk_sum_is_constant():
    f = get_family("krawtchouk")
    p = validate_parameters("krawtchouk", p=0.5, N=2)
    st = reconstruct(f.closure(p), float(f.eta(1, p)), float(f.B(0, p)), 2)
    assert np.allclose(st.a_values, 1.0)
    assert np.allclose(st.B_values, [1, 0.5, 0]) and np.allclose(st.D_values, [0, 0.5, 1])


def test_perturbed_r00_switches_route():
    base = charlier_state()
    st = charlier_state(r0_0=base.coeffs.r0_0 + 0.3)
    assert abs(st.ri0cond) > 1e-3
    assert st.route == "general"
    with pytest.raises(UnsupportedRegime, match="ri0cond"):
        reconstruct(st.coeffs, 1.0, 1.0, 5, route="simple")


@pytest.mark.parametrize("fid,values", [
    ("charlier", dict(a=1)),
    ("krawtchouk", dict(p=0.3, N=6)),
    ("q_racah", None),
])
def test_roundtrip_examples(fid, values):
    f = get_family(fid)
    p = validate_parameters(fid, values or default_grid(fid)[0])
    rt = roundtrip_catalog(f, p)
    assert rt.deviation <= 1e-9 and rt.coverage > 0.5
    assert abs(rt.ri0cond) <= 1e-10
    assert rt.positive
    if rt.q_mismatch is not None:
        assert rt.q_mismatch <= 1e-12


@pytest.mark.parametrize("fid", family_ids())
def test_roundtrip_some_point_per_family(fid):
    f = get_family(fid)
    devs = [roundtrip_catalog(f, validate_parameters(fid, v)).deviation for v in default_grid(fid)]
    assert min(devs) <= 1e-9


@pytest.mark.parametrize("fid", family_ids())
def test_eta_identity_over_catalog(fid):
    f = get_family(fid)
    for v in default_grid(fid):
        p = validate_parameters(fid, v)
        assert eta_product_identity(f.closure(p), float(f.eta(1, p)), 20) <= 1e-10


def test_all_five_classes_reachable():
    tags = set()
    for fid in family_ids():
        f = get_family(fid)
        for v in default_grid(fid):
            p = validate_parameters(fid, v)
            tags.add(classify_eta(f.closure(p), float(f.eta(1, p))).tag)
    assert tags == {"linear", "quadratic", "q_geometric", "q_inverse_geometric", "q_quadratic"}
