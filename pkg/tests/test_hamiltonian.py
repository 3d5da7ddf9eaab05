import math

import numpy as np
import pytest
import scipy.io

from jacobipoly.driver import default_grid
from jacobipoly.families import family_ids, get_family, validate_parameters
from jacobipoly.hamiltonian import (
    DivergentMeasureError,
    InvalidFamilyError,
    build_hamiltonian,
    conjugate,
    factorization_residual,
    factorize,
    ground_state,
    similarity_transform,
    sqrt_product,
)


def family_BD(fid, values, window=None):
    f = get_family(fid)
    p = validate_parameters(fid, values)
    W = p.N if f.finite else (window or 30)
    return (lambda x: f.B(x, p)), (lambda x: f.D(x, p)), W


def test_krawtchouk_half_matrix():
    B, D, W = family_BD("krawtchouk", dict(p=0.5, N=2))
    H = build_hamiltonian(B, D, W)
    assert np.allclose(H.diagonal, [1, 1, 1], atol=1e-15)
    assert np.allclose(H.off_diagonal, [-1 / math.sqrt(2)] * 2, atol=1e-15)


def test_charlier_window_matrix():
    B, D, _ = family_BD("charlier", dict(a=1))
    H = build_hamiltonian(B, D, 3)
    assert np.allclose(H.diagonal, [1, 2, 3, 4])
    assert np.allclose(H.off_diagonal, [-1, -math.sqrt(2), -math.sqrt(3)])


def test_ground_state_annihilated():
    B, D, W = family_BD("krawtchouk", dict(p=0.5, N=2))
    H = build_hamiltonian(B, D, W)
    A, _ = factorize(B, D, W)
    phi0 = ground_state(B, D, W).values
    assert np.abs(H.matvec(phi0)).max() <= 1e-13
    assert np.abs(A.apply(phi0)).max() <= 1e-13
    assert np.allclose(A.main, np.sqrt(B(np.arange(3))))


def test_ground_state_squares():
    B, D, W = family_BD("krawtchouk", dict(p=0.5, N=2))
    assert np.allclose(ground_state(B, D, W).squared, [1, 2, 1])
    B, D, _ = family_BD("charlier", dict(a=1))
    gs = ground_state(B, D, 12)
    want = [1 / math.factorial(k) for k in range(13)]
    assert np.allclose(gs.squared, want, rtol=1e-14)


def test_infinite_ground_state_tail_rule():
    B, D, _ = family_BD("charlier", dict(a=1))
    gs = ground_state(B, D)
    assert gs.tail_estimate < 1e-16 * gs.squared_norm
    assert abs(gs.squared_norm - math.e) <= 1e-10 * math.e


def test_divergent_measure_detected():
    # B/D -> 2: phi0^2 grows geometrically
    with pytest.raises(DivergentMeasureError):
        ground_state(lambda x: 2.0 * (x + 1), lambda x: 1.0 * x)


def test_invalid_sign_rejected():
    with pytest.raises(InvalidFamilyError):
        build_hamiltonian(np.array([1.0, -1.0, 1.0]), np.array([0.0, 1.0, 1.0]), 2)
    with pytest.raises(InvalidFamilyError, match="D\\(0\\)"):
        build_hamiltonian(np.ones(3), np.ones(3), 2)


def test_sqrt_product_avoids_overflow():
    big = np.array([1e200, 1e300])
    assert np.allclose(sqrt_product(big, big), big, rtol=1e-14)
    assert sqrt_product(np.array([0.0]), np.array([5.0]))[0] == 0.0


def test_similarity_transform_kills_constants():
    B, D, W = family_BD("krawtchouk", dict(p=0.3, N=6))
    T = similarity_transform(B, D, W)
    assert np.abs(T.matvec(np.ones(W + 1))).max() <= 1e-14


def test_conjugation_matches_similarity_transform():
    B, D, W = family_BD("meixner", dict(beta=1.5, c=0.4), window=25)
    H = build_hamiltonian(B, D, W)
    phi0 = ground_state(B, D, W).values
    got = conjugate(H, phi0).dense()
    want = similarity_transform(B, D, W).dense()
    assert np.abs(got - want).max() <= 1e-12 * np.abs(want).max()


@pytest.mark.parametrize("fid", family_ids())
def test_factorization_over_grid(fid):
    for values in default_grid(fid):
        B, D, W = family_BD(fid, values)
        H = build_hamiltonian(B, D, W)
        A, _ = factorize(B, D, W)
        res, hmax = factorization_residual(H, A)
        assert res <= 1e-13 * max(1.0, hmax)
        # independent oracle: assemble A by hand and form A^T A densely
        x = np.arange(W + 1)
        b = np.asarray(B(x), dtype=float)
        d = np.asarray(D(x), dtype=float)
        Ad = np.diag(np.sqrt(b)) - np.diag(np.sqrt(d[1:]), 1)
        assert np.abs(H.dense() - Ad.T @ Ad).max() <= 1e-13 * max(1.0, hmax)


def test_matrix_market_export_round_trip(tmp_path):
    B, D, W = family_BD("krawtchouk", dict(p=0.5, N=2))
    H = build_hamiltonian(B, D, W)
    path = tmp_path / "h.mtx"
    H.to_matrix_market(path)
    M = scipy.io.mmread(str(path)).toarray()
    assert np.array_equal(M, H.dense())


def test_csv_export_triplets():
    B, D, W = family_BD("krawtchouk", dict(p=0.5, N=2))
    text = build_hamiltonian(B, D, W).to_csv()
    lines = text.splitlines()
    assert lines[0] == "x,y,value"
    assert "0,0,1" in lines
    assert "0,1,-0.707106781187" in lines
    assert len(lines) == 1 + 7
