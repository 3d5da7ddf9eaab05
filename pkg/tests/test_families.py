import json
import math

import numpy as np
import pytest

from jacobipoly.driver import default_grid
from jacobipoly.families import (
    LatticeError,
    ParameterError,
    UnknownFamilyError,
    catalog_metadata,
    custom_family,
    eval_family,
    eval_polynomial_closed_form,
    family_ids,
    get_family,
    validate_parameters,
)

SELF_DUAL = ["krawtchouk", "charlier", "meixner", "affine_q_krawtchouk", "alternative_affine_q_krawtchouk"]


def grid_points():
    for fid in family_ids():
        for values in default_grid(fid):
            yield fid, values


def test_krawtchouk_descriptor():
    f = get_family("krawtchouk")
    p = f.params(p=0.3, N=5)
    x = np.arange(6)
    assert np.allclose(f.B(x, p), 0.3 * (5 - x))
    assert np.allclose(f.D(x, p), 0.7 * x)


def test_charlier_descriptor():
    f = get_family("charlier")
    p = f.params(a=2.5)
    x = np.arange(8)
    assert np.allclose(f.B(x, p), 2.5)
    assert np.allclose(f.D(x, p), x)


def test_racah_carries_sign_markers_and_dt():
    p = validate_parameters("racah", a=8, b=0.7, d=0.5, N=6)
    assert (p.eps, p.epsp) == (1, 1)
    assert p.c == -6
    assert p.dt == pytest.approx(8 + 0.7 - 6 - 0.5 - 1)


def test_racah_quadrants_resolve_distinct_signs():
    signs = {(validate_parameters("racah", v).eps, validate_parameters("racah", v).epsp)
             for v in default_grid("racah")}
    assert signs == {(1, 1), (1, -1), (-1, 1), (-1, -1)}


def test_krawtchouk_range_violation_named():
    with pytest.raises(ParameterError, match="0<p<1 violated"):
        validate_parameters("krawtchouk", p=1.2, N=4)


def test_meixner_accepts_interior_point():
    p = validate_parameters("meixner", beta=1, c=0.5)
    assert p.beta == 1 and p.c == 0.5


def test_unknown_family_and_parameter():
    with pytest.raises(UnknownFamilyError):
        get_family("jacobi")
    with pytest.raises(ParameterError, match="unknown parameter"):
        validate_parameters("charlier", a=1, q=0.5)
    with pytest.raises(ParameterError, match="missing"):
        validate_parameters("meixner", beta=1)


def test_q_outside_unit_interval_rejected():
    with pytest.raises(ParameterError, match="0<q<1"):
        validate_parameters("q_charlier", a=1, q=1.5)


def test_eval_krawtchouk_B():
    assert np.allclose(eval_family("krawtchouk", {"p": 0.5, "N": 2}, "B", np.arange(3)), [1, 0.5, 0])


def test_eval_charlier_d0sq():
    assert eval_family("charlier", {"a": 1}, "dnsq", np.array([0]))[0] == pytest.approx(math.exp(-1), rel=1e-15)


def test_eval_rejects_index_outside_lattice():
    with pytest.raises(LatticeError):
        eval_family("krawtchouk", {"p": 0.5, "N": 2}, "B", np.arange(4))


@pytest.mark.parametrize("fid,values", list(grid_points()))
def test_eta_and_energy_vanish_at_origin(fid, values):
    f = get_family(fid)
    p = f.params(values)
    assert eval_family(fid, p, "eta", np.array([0]))[0] == 0
    assert eval_family(fid, p, "E", np.array([0]))[0] == 0
    assert eval_family(fid, p, "phi0sq", np.array([0]))[0] == pytest.approx(1.0, abs=1e-15)


def test_closed_form_polynomial_examples():
    assert eval_polynomial_closed_form("charlier", {"a": 1}, 1, 2) == pytest.approx(-1)
    assert eval_polynomial_closed_form("krawtchouk", {"p": 0.5, "N": 2}, 1, 1) == pytest.approx(0, abs=1e-15)


@pytest.mark.parametrize("fid", family_ids())
def test_degree_zero_polynomial_is_one(fid):
    f = get_family(fid)
    if f.P is None:
        pytest.skip("no closed-form polynomial")
    p = f.params(default_grid(fid)[0])
    x = np.arange((p.N if f.finite else 10) + 1)
    assert np.all(eval_polynomial_closed_form(fid, p, 0, x) == 1)


@pytest.mark.parametrize("fid,values", list(grid_points()))
def test_positivity_and_boundaries(fid, values):
    f = get_family(fid)
    p = f.params(values)
    top = p.N if f.finite else 60
    x = np.arange(top + 1)
    B = np.asarray(f.B(x, p), dtype=float)
    D = np.asarray(f.D(x, p), dtype=float)
    assert D[0] == 0
    assert np.all(D[1:] > 0)
    if f.finite:
        assert B[-1] == 0
        assert np.all(B[:-1] > 0)
    else:
        assert np.all(B > 0)
    n = np.arange(min(p.N, 50) + 1 if f.finite else 51)
    E = np.asarray(f.E(n, p), dtype=float)
    # bounded spectra (1 - q^n) round to their limit before n = 50, so a zero
    # step is accepted only on that final floating-point plateau
    step = np.diff(E)
    assert np.all(step >= 0)
    assert np.all((step > 0) | (E[1:] == E[-1]))
    assert np.all(step[: 10] > 0)


@pytest.mark.parametrize("fam,dual", [("hahn", "dual_hahn"), ("q_hahn", "dual_q_hahn")])
def test_dual_correspondence(fam, dual):
    f, g = get_family(fam), get_family(dual)
    for values in default_grid(fam):
        p, pd = f.params(values), g.params(values)
        x = np.arange(p.N + 1)
        assert np.allclose(g.B(x, pd), -np.asarray(f.A(x, p)), rtol=1e-13, atol=0)
        assert np.allclose(g.D(x, pd), -np.asarray(f.C(x, p)), rtol=1e-13, atol=0)
        assert np.allclose(f.B(x, p), -np.asarray(g.A(x, pd)), rtol=1e-13, atol=0)


@pytest.mark.parametrize("fid", SELF_DUAL)
def test_self_dual_families(fid):
    f = get_family(fid)
    for values in default_grid(fid):
        p = f.params(values)
        n = np.arange((p.N if f.finite else 10) + 1)
        P = eval_polynomial_closed_form(fid, p, n[:, None], n[None, :])
        assert np.allclose(P, P.T, rtol=1e-12, atol=1e-12)


def test_alternative_q_hahn_reflection():
    f, g = get_family("q_hahn"), get_family("alternative_q_hahn")
    for values in default_grid("q_hahn"):
        p, pa = f.params(values), g.params(values)
        x = np.arange(p.N + 1)
        assert np.allclose(g.B(x, pa), f.D(p.N - x, p), rtol=1e-14, atol=0)
        assert np.allclose(g.D(x, pa), f.B(p.N - x, p), rtol=1e-14, atol=0)


def test_catalog_metadata_json():
    meta = json.loads(catalog_metadata(as_json=True))
    assert len(meta) == len(family_ids())
    kraw = next(m for m in meta if m["id"] == "krawtchouk")
    assert kraw["parameters"] == ["p", "N"]
    assert kraw["partner"] == "self"


def test_every_family_has_a_default_grid_of_three_or_more():
    for fid in family_ids():
        pts = default_grid(fid)
        assert 3 <= len(pts) <= 5
        for v in pts:
            validate_parameters(fid, v)


def test_meixner_grid_points():
    pts = {(v["beta"], v["c"]) for v in default_grid("meixner")}
    assert {(0.5, 0.3), (1, 0.5), (4, 0.9)} <= pts


def test_q_families_use_two_q_values():
    qs = {v["q"] for fid in family_ids() if get_family(fid).q_type for v in default_grid(fid)}
    assert qs == {0.3, 0.7}


def test_custom_family_checks_boundaries():
    f = custom_family([1.0, 2.0, 0.0], [0.0, 1.0, 3.0])
    p = f.params(N=2)
    assert np.allclose(f.B(np.arange(3), p), [1, 2, 0])
    with pytest.raises(ParameterError, match="B\\(N\\)=0"):
        custom_family([1.0, 2.0, 1.0], [0.0, 1.0, 3.0])
    with pytest.raises(ParameterError, match="D\\(x\\)>0"):
        custom_family([1.0, 2.0, 0.0], [0.0, -1.0, 3.0])
