"""Closure relation, ladder operators, Heisenberg solution and shape invariance.

Matrix identities are checked on dense matrices over a lattice window.
Functions of ``H`` come from a spectral decomposition ``(lam, V)``.  On a
finite lattice ``V`` is complete and the operators are exact.  On a
truncated infinite lattice ``V`` holds only the converged low-lying
eigenvectors, and operators are compressed to their span.
Truncation-sensitive eigenvalues never enter that span.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eigen import eigenvalue_uncertainty
from .families import get_family, phi0sq_values
from .hamiltonian import TridiagonalOperator
from .spectral import (
    EPS,
    BreakdownError,
    SpectrumMethodError,
    _closed_form_P,
    alpha_pm,
    build_P_table,
    masked_max,
    shape_invariance_spectrum,
)

CLOSURE_MARGIN = 2
#: R0(lambda) within this many uncertainties of zero counts as singular
SINGULAR_FACTOR = 100


class SingularR0Error(ArithmeticError):
    """``R_0`` or ``alpha_+ - alpha_-`` vanishes at an eigenvalue of ``H``."""


class ShiftRangeError(ValueError):
    """Shifted parameters leave the valid range."""


def _dense(M):
    return M.dense() if isinstance(M, TridiagonalOperator) else np.asarray(M, dtype=float)


def _poly(coefs, H, I):
    # ascending coefficients evaluated at a matrix
    out = np.zeros_like(H)
    power = I
    for c in coefs:
        out = out + c * power
        power = power @ H
    return out


@dataclass(frozen=True)
class ClosureResult:
    residual: float
    rows: tuple
    window: int


def closure_residual(H, eta_diag, coeffs, margin=CLOSURE_MARGIN):
    """Scale-normalized ``[H,[H,eta]] - eta R0(H) - [H,eta] R1(H) - R-1(H)``.

    Each entry is divided by the sum of the absolute values of the terms
    that produce it, so the figure is a relative cancellation error.  Rows
    within ``margin`` of the bottom edge are left out when ``margin > 0``.
    ``H`` may be symmetric or the similarity-transformed three-band matrix.
    """
    H = _dense(H)
    eta = np.diag(np.asarray(eta_diag, dtype=float))
    n = len(H)
    I = np.eye(n)
    aH, aE = np.abs(H), np.abs(eta)
    with np.errstate(over="ignore", invalid="ignore"):
        C1 = H @ eta - eta @ H
        C2 = H @ C1 - C1 @ H
        R0 = _poly([coeffs.r0_0, coeffs.r0_1, coeffs.r0_2], H, I)
        R1 = _poly([coeffs.r1_0, coeffs.r1_1], H, I)
        Rm = _poly([coeffs.rm1_0, coeffs.rm1_1, coeffs.rm1_2], H, I)
        M = C2 - eta @ R0 - C1 @ R1 - Rm
        aR0 = _poly([abs(coeffs.r0_0), abs(coeffs.r0_1), abs(coeffs.r0_2)], aH, I)
        aR1 = _poly([abs(coeffs.r1_0), abs(coeffs.r1_1)], aH, I)
        aRm = _poly([abs(coeffs.rm1_0), abs(coeffs.rm1_1), abs(coeffs.rm1_2)], aH, I)
        aC1 = aH @ aE + aE @ aH
        scale = aH @ aC1 + aC1 @ aH + aE @ aR0 + aC1 @ aR1 + aRm
        rel = np.abs(M) / np.where(scale > 0, scale, 1.0)
    rows = slice(0, n - margin if margin else n)
    block = rel[rows]
    resid = float(np.max(block)) if np.all(np.isfinite(block)) else float("inf")
    return ClosureResult(resid, (0, n - margin - 1 if margin else n - 1), n - 1)


# ---------------------------------------------------------------------------
# ladder operators and the Heisenberg solution
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LadderOperators:
    """Creation and annihilation operators in lattice coordinates.

    ``plus_eigen``/``minus_eigen`` are the same operators in the basis of
    the columns of ``basis``; ``eta_eigen`` is ``V^T eta V``.
    """

    a_plus: np.ndarray
    a_minus: np.ndarray
    plus_eigen: np.ndarray
    minus_eigen: np.ndarray
    eta_eigen: np.ndarray
    eigenvalues: np.ndarray
    basis: np.ndarray
    alpha_plus: np.ndarray
    alpha_minus: np.ndarray
    constant: np.ndarray
    plus_scale: np.ndarray | None = None
    minus_scale: np.ndarray | None = None

    def hermiticity_defect(self):
        """``|a+^T - a-|`` in the eigenbasis.

        Each entry is compared with the largest term magnitude in its row
        and column: graded spectra make a single global scale meaningless.
        """
        diff = np.abs(self.plus_eigen.T - self.minus_eigen)
        if self.plus_scale is None:
            return float(diff.max() / max(np.abs(self.plus_eigen).max(), 1e-300))
        S = self.plus_scale.T + self.minus_scale
        ref = np.maximum(S.max(axis=1)[:, None], S.max(axis=0)[None, :])
        with np.errstate(invalid="ignore", divide="ignore"):
            rel = np.where(ref > 0, diff / ref, 0.0)
        return float(rel.max())


def _spectral_pairs(H, spectrum):
    if spectrum is not None:
        lam, V = spectrum
        return np.asarray(lam, dtype=float), np.asarray(V, dtype=float)
    lam, V = np.linalg.eigh(_dense(H))
    return lam, V * np.where(V[0] < 0, -1.0, 1.0)


def _compress(eta, V):
    """``V^T eta V`` with a constant split off first.

    When ``eta`` saturates (``eta = 1 - q^x``) the small off-diagonal entries
    would cancel out of ``O(1)`` sums.  Orthonormal columns make
    ``V^T (eta - c) V + c I`` exact for any ``c``, so ``c`` is taken as the
    value (0 or the window edge) closest to ``eta`` where the vectors live.
    """
    weight = V * V
    best = None
    with np.errstate(over="ignore", invalid="ignore"):
        for c in (0.0, float(eta[-1])):
            spread = float(np.max(np.abs(eta - c) @ weight))
            if best is None or spread < best[0]:
                best = (spread, c)
        c = best[1]
        Y = V.T @ ((eta - c)[:, None] * V)
    return Y + c * np.eye(V.shape[1])


def _r0_uncertainty(coeffs, lam, dz=None):
    """How far ``R0(lambda)`` can sit from its exact value.

    ``dz`` is the absolute eigenvalue error (default: the LAPACK bound
    ``size * eps * max|lambda|``); it is multiplied by ``|R0'|`` and the
    rounding of the evaluation itself is added.
    """
    if dz is None:
        dz = eigenvalue_uncertainty(lam, "stev")
    if coeffs.shifted_form is None:
        c, z = (coeffs.r0_0, coeffs.r0_1, coeffs.r0_2), np.abs(lam)
    else:
        c, z = coeffs.shifted_form[1], np.abs(lam + coeffs.shifted_argument_offset)
    size = sum(abs(ck) * z**k for k, ck in enumerate(c))
    slope = sum(k * abs(ck) * z ** (k - 1) for k, ck in enumerate(c) if k)
    return slope * dz + 4 * EPS * size


def build_ladder_operators(H, eta_diag, coeffs, spectrum=None, eta_step=None, solver=None):
    """``a(+-) = +-(alpha_+ - alpha_-)(H)^-1 ([H, eta] + alpha_+-(H)(eta + R-1(H) R0(H)^-1))``.

    ``spectrum=(lam, V)`` supplies eigenpairs of ``H`` (possibly only the
    low-lying ones); by default the dense symmetric solver is used.
    ``eta_step[x] = eta(x+1) - eta(x)`` may be given when the lattice
    differences are known more accurately than differences of ``eta_diag``
    (for ``eta = 1 - q^x`` they are ``eta(1) q^x``).  The commutator is
    then formed from the steps and ``V^T eta V`` off the diagonal follows
    from it through the eigenvalue gaps.  ``solver`` names the eigensolver
    that produced ``spectrum`` and sets how close to zero ``R0`` may come
    before it counts as singular.
    """
    lam, V = _spectral_pairs(H, spectrum)
    R0 = coeffs.R0(lam)
    dz = eigenvalue_uncertainty(lam, solver or "stev")
    if np.any(np.abs(R0) <= SINGULAR_FACTOR * _r0_uncertainty(coeffs, lam, dz)):
        raise SingularR0Error("R0(H) is singular on the window")
    up, down = alpha_pm(coeffs, lam)
    gap = up - down
    if np.any(gap == 0):
        raise SingularR0Error("alpha_+ = alpha_- at an eigenvalue")
    K = coeffs.Rm1(lam) / R0
    eta = np.asarray(eta_diag, dtype=float)
    Y = _compress(eta, V)
    diff = lam[:, None] - lam[None, :]
    if eta_step is not None and H is not None:
        off = _off_diagonal(H)
        step = np.asarray(eta_step, dtype=float)[: len(off)]
        with np.errstate(over="ignore", invalid="ignore"):
            P = (V[:-1] * (off * step)[:, None]).T @ V[1:]
        commutator = P - P.T
        with np.errstate(divide="ignore", invalid="ignore"):
            Y = np.where(diff != 0, commutator / np.where(diff != 0, diff, 1.0), Y)
    else:
        commutator = diff * Y
    shifted = Y + np.diag(K)
    plus = (commutator + up[:, None] * shifted) / gap[:, None]
    minus = -(commutator + down[:, None] * shifted) / gap[:, None]
    # size of the terms that cancel in each entry, for rounding-aware residuals
    size = np.abs(Y) + np.diag(np.abs(K))
    plus_scale = (np.abs(commutator) + np.abs(up)[:, None] * size) / np.abs(gap)[:, None]
    minus_scale = (np.abs(commutator) + np.abs(down)[:, None] * size) / np.abs(gap)[:, None]
    return LadderOperators(
        V @ plus @ V.T, V @ minus @ V.T, plus, minus, Y, lam, V, up, down, K, plus_scale, minus_scale
    )


def _off_diagonal(H):
    if isinstance(H, TridiagonalOperator):
        return np.asarray(H.upper, dtype=float)
    return np.diag(np.asarray(H, dtype=float), 1)


def eta_steps(family, p, x):
    """``eta(x+1) - eta(x)``, from ``eta(1) phi(x)`` when the family records ``phi``."""
    family = get_family(family)
    x = np.asarray(x)
    if family.phi is not None:
        return float(family.eta(1, p)) * np.asarray(family.phi(x, p), dtype=float)
    return np.asarray(family.eta(x + 1, p), dtype=float) - np.asarray(family.eta(x, p), dtype=float)


def ladder_action_check(ops, A, C):
    """Residuals of ``a+ phi_n = A_n phi_{n+1}`` and ``a- phi_n = C_n phi_{n-1}``.

    With ``phi_n(0) = 1`` these are the unit-vector statements
    ``a+ psi_n = -sqrt(A_n C_{n+1}) psi_{n+1}`` and
    ``a- psi_n = -sqrt(A_{n-1} C_n) psi_{n-1}``, which is how they are
    measured: dividing by ``psi_n(0)``, which falls below 1e-100 for large
    ``n`` on q-lattices, would only amplify rounding.

    Each entry of the column error is divided by the larger of the expected
    coefficient and the size of the terms that cancel in that entry (for
    spectra with ``A_n -> 0`` the diagonal is a difference of two numbers
    near one).  ``a- psi_0`` is measured against ``sqrt(A_0 C_1)``.
    """
    k = ops.basis.shape[1]
    A = np.asarray(A, dtype=float)
    C = np.asarray(C, dtype=float)
    coef = -np.sqrt(A[: k - 1] * C[1:k]) if k > 1 else np.zeros(0)
    ps = ops.plus_scale if ops.plus_scale is not None else np.zeros((k, k))
    ms = ops.minus_scale if ops.minus_scale is not None else np.zeros((k, k))
    plus_res = np.empty(max(k - 1, 0))
    minus_res = np.empty(k)
    for n in range(k - 1):
        want = np.zeros(k)
        want[n + 1] = coef[n]
        denom = np.maximum(abs(coef[n]), ps[:, n])
        plus_res[n] = np.max(np.abs(ops.plus_eigen[:, n] - want) / denom)
    for n in range(k):
        want = np.zeros(k)
        ref = abs(coef[n - 1]) if n else (abs(coef[0]) if k > 1 else 1.0)
        if n:
            want[n - 1] = coef[n - 1]
        denom = np.maximum(ref, ms[:, n])
        minus_res[n] = np.max(np.abs(ops.minus_eigen[:, n] - want) / denom)
    return plus_res, minus_res


def heisenberg_check(H, eta_diag, coeffs, t_samples=(0.0, 0.3, 1.7), spectrum=None, ops=None):
    """Largest ``|e^{itH} eta e^{-itH} - a+ e^{i alpha_+(H) t} - a- e^{i alpha_-(H) t} + R-1 R0^-1|``.

    Evaluated in the eigenbasis (a unitary change of coordinates), relative
    to ``max |eta_mn|``.  Returns one residual per time sample.
    """
    if ops is None:
        ops = build_ladder_operators(H, eta_diag, coeffs, spectrum)
    lam = ops.eigenvalues
    Y = ops.eta_eigen
    scale = max(np.abs(Y).max(), 1e-300)
    out = []
    for t in t_samples:
        phase = np.exp(1j * t * lam)
        lhs = phase[:, None] * Y * phase.conj()[None, :]
        rhs = (
            ops.plus_eigen * np.exp(1j * t * ops.alpha_plus)[None, :]
            + ops.minus_eigen * np.exp(1j * t * ops.alpha_minus)[None, :]
            - np.diag(ops.constant)
        )
        out.append(float(np.abs(lhs - rhs).max() / scale))
    return np.array(out)


def structure_relation_check(ops, phi0, P_values, A, C, P_error=None, tol=1e-8):
    """Conjugated ladders on polynomial rows: ``a~+ P_n = A_n P_{n+1}``, ``a~- P_n = C_n P_{n-1}``.

    ``a~ = phi0^-1 a phi0`` needs complete operators, so this is for finite
    lattices.  Each entry is compared relative to the larger of the
    expected value and the size of the terms summed to produce it; entries
    whose propagated table error is too large for a verdict are skipped.
    """
    phi0 = np.asarray(phi0, dtype=float)
    P = np.asarray(P_values, dtype=float)
    err = np.zeros_like(P) if P_error is None else np.asarray(P_error, dtype=float)
    rows = P.shape[0]
    diffs, errs, scales = [], [], []
    for op, coef, step in ((ops.a_plus, A, 1), (ops.a_minus, C, -1)):
        t = op * phi0[None, :] / phi0[:, None]
        at = np.abs(t)
        for n in range(rows):
            m = n + step
            if not 0 <= m < rows:
                continue
            want = coef[n] * P[m]
            diffs.append(t @ P[n] - want)
            errs.append(at @ err[n] + abs(coef[n]) * err[m])
            scales.append(np.maximum(np.abs(want), at @ np.abs(P[n])))
    if not diffs:
        return masked_max(np.zeros(1), np.zeros(1), np.ones(1), tol)
    return masked_max(np.array(diffs), np.array(errs), np.array(scales), tol)


# ---------------------------------------------------------------------------
# shape invariance, shift operators and Rodrigues generation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ShapeInvarianceReport:
    upper: float
    lower: float
    diagonal: float
    phi_form: float
    phi_origin: float
    kappa: float
    E1: float
    spectrum: float

    def as_dict(self):
        return dict(self.__dict__)

    @property
    def worst(self):
        return max(self.upper, self.lower, self.diagonal, self.phi_form, self.phi_origin, self.spectrum)


def _shift_once(family, p):
    if family.shift is None or family.kappa is None:
        raise ShiftRangeError(f"{family.id}: no shape-invariance data")
    try:
        return family.shifted(p)
    except ValueError as exc:
        raise ShiftRangeError(str(exc)) from exc


def _rel(lhs, rhs):
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    scale = np.maximum(np.abs(lhs), np.abs(rhs))
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(scale > 0, np.abs(lhs - rhs) / scale, 0.0)
    return float(np.max(r)) if r.size else 0.0


def shape_invariance_check(family, p, window=20, n_max=10):
    """Pointwise residuals of the three shape-invariance conditions and ``phi(x)``.

    ``B(x+1; l) phi(x+1; l) = kappa B(x; l+d) phi(x; l)``,
    ``D(x; l) phi(x-1; l) = kappa D(x; l+d) phi(x; l)`` and
    ``B(x; l) + D(x+1; l) = kappa (B(x; l+d) + D(x; l+d)) + E(1; l)``;
    ``phi`` is compared with ``(eta(x+1) - eta(x)) / eta(1)``.  The
    composed spectrum is compared with ``E(n)`` for ``n <= n_max``.
    """
    family = get_family(family)
    ps = _shift_once(family, p)
    kappa = family.kappa_value(p)
    top = p.N - 1 if family.finite else window
    x = np.arange(top + 1)
    B, D, phi = family.B, family.D, family.phi
    upper = _rel(B(x + 1, p) * phi(x + 1, p), kappa * B(x, ps) * phi(x, p))
    xl = x[1:]
    lower = _rel(D(xl, p) * phi(xl - 1, p), kappa * D(xl, ps) * phi(xl, p))
    E1 = float(family.E(1, p))
    diag_l = B(x, p) + D(x + 1, p)
    diag_r = kappa * (B(x, ps) + D(x, ps)) + E1
    diagonal = _rel(diag_l, diag_r)
    xe = np.arange((p.N if family.finite else window) + 1)
    eta = family.eta
    e0, e1, eta1 = eta(xe, p), eta(xe + 1, p), eta(1, p)
    # the difference cancels once eta saturates, so scale by the operands
    phi_form = _rel_terms(phi(xe, p) - (e1 - e0) / eta1, [phi(xe, p), e1 / eta1, e0 / eta1])
    phi_origin = abs(float(phi(0, p)) - 1.0)
    nm = min(n_max, p.N) if family.finite else n_max
    composed = shape_invariance_spectrum(family, p, nm)
    spec = _rel(composed, family.E(np.arange(nm + 1), p))
    return ShapeInvarianceReport(upper, lower, diagonal, phi_form, phi_origin, float(kappa), E1, spec)


def _reference_P(family, p, n, x):
    """Closed-form and recurrence tables merged entrywise by the smaller error estimate."""
    n = np.atleast_1d(n)
    vals, err = _closed_form_P(family, p, np.arange(int(n.max()) + 1), x)
    try:
        rec = build_P_table(family, p, int(x[-1]), route="recurrence", n_max=int(n.max()))
    except (BreakdownError, SpectrumMethodError):
        return vals[n], err[n]
    better = rec.error < err
    vals = np.where(better, rec.values, vals)
    err = np.where(better, rec.error, err)
    return vals[n], err[n]


def shift_operator_action(family, p, n_max=10, window=20, tol=1e-9):
    """Residuals of ``F P_n(l) = f_n P_{n-1}(l+d)`` and ``Bs P_n(l+d) = b_n P_{n+1}(l)``.

    ``F = B(0) phi(x)^-1 (1 - e^d)`` and ``Bs = B(0)^-1 (B(x) - D(x) e^-d) phi(x)``
    with ``f_n = E(n)`` and ``b_n = 1``.  Entries whose reference error
    estimate is too large for a verdict are skipped.  Returns
    ``(forward, backward, zero_row)``; ``zero_row`` is ``|F P_0|`` relative
    to ``B(0)``.
    """
    family = get_family(family)
    ps = _shift_once(family, p)
    if family.finite:
        top_n = min(n_max, ps.N)
        top_x, top_xs = p.N, ps.N
    else:
        top_n, top_x, top_xs = n_max, window, window
    x = np.arange(top_x + 1)
    xs = np.arange(top_xs + 1)
    P, Perr = _reference_P(family, p, np.arange(top_n + 2), np.arange(top_x + 2) if not family.finite else x)
    Ps, Pserr = _reference_P(family, ps, np.arange(top_n + 1), xs)
    B0 = float(family.B(0, p))
    phi = np.asarray(family.phi(x, p), dtype=float)
    f = np.asarray(family.E(np.arange(top_n + 1), p), dtype=float)

    # forward, evaluated on the shifted lattice
    xf = xs
    lhs = B0 / phi[xf] * (P[:, xf] - P[:, xf + 1])
    lerr = np.abs(B0 / phi[xf]) * (Perr[:, xf] + Perr[:, xf + 1])
    rows = np.arange(1, top_n + 1)
    rhs = f[rows, None] * Ps[rows - 1]
    rerr = np.abs(f[rows, None]) * Pserr[rows - 1]
    scale = np.maximum(np.abs(rhs), np.abs(f[rows, None]) * np.abs(P[rows][:, xf]))
    forward = masked_max(lhs[rows] - rhs, lerr[rows] + rerr, scale, tol)
    zero_row = float(np.max(np.abs(lhs[0])) / max(abs(B0), 1e-300))

    # backward, with g = P(l+d) padded by zero outside the shifted lattice
    m = min(len(xs), top_x + 1)
    g = np.zeros((top_n + 1, top_x + 1))
    gerr = np.zeros_like(g)
    g[:, :m] = Ps[:, :m]
    gerr[:, :m] = Pserr[:, :m]
    Bx = np.asarray(family.B(x, p), dtype=float)
    Dx = np.asarray(family.D(x, p), dtype=float)
    phim = np.concatenate([[0.0], phi[:-1]])
    pad = np.zeros((top_n + 1, 1))
    gm = np.concatenate([pad, g[:, :-1]], axis=1)
    gmerr = np.concatenate([pad, gerr[:, :-1]], axis=1)
    blhs = (Bx * phi * g - Dx * phim * gm) / B0
    berr = (np.abs(Bx * phi) * gerr + np.abs(Dx * phim) * gmerr) / abs(B0)
    bscale = (np.abs(Bx * phi * g) + np.abs(Dx * phim * gm)) / abs(B0)
    brhs = P[1: top_n + 2, : top_x + 1]
    brerr = Perr[1: top_n + 2, : top_x + 1]
    if not family.finite:
        # g(top_x + 1) is outside the table, so the last column is incomplete
        blhs, berr, brhs, brerr, bscale = (a[:, :-1] for a in (blhs, berr, brhs, brerr, bscale))
    backward = masked_max(blhs - brhs, berr + brerr, np.maximum(bscale, np.abs(brhs)), tol)
    return forward, backward, zero_row


def rodrigues_generate(family, p, n, window=20, tol=1e-8):
    """``A^dag(l) ... A^dag(l+(n-1)d) phi0(l+n d)`` against ``phi0 P_n`` after ``x = 0`` rescaling.

    Returns ``(vector, MaskedResidual)``.  The residual is relative to
    ``max |phi0 P_n|``; entries whose reference error estimate is too
    large for a verdict at ``tol`` are skipped and counted.
    """
    family = get_family(family)
    if family.shift is None:
        raise ShiftRangeError(f"{family.id}: no parameter shift recorded")
    chain = [p]
    for k in range(n):
        if family.finite and k == n - 1 and chain[-1].N == 1:
            # the last shift leaves a one-point lattice where phi0 = 1
            chain.append(None)
            break
        try:
            chain.append(family.shifted(chain[-1]))
        except ValueError as exc:
            raise ShiftRangeError(str(exc)) from exc
    top = p.N if family.finite else window

    def size(pp):
        return pp.N + 1 if family.finite else top + 1

    last = chain[-1]
    v = np.ones(1) if last is None else np.sqrt(phi0sq_values(family, last, np.arange(size(last))))
    for k in range(n - 1, -1, -1):
        pk = chain[k]
        m = size(pk)
        u = np.zeros(m)
        u[: min(len(v), m)] = v[:m]
        xb = np.arange(m)
        sb = np.sqrt(np.asarray(family.B(xb, pk), dtype=float))
        sd = np.sqrt(np.asarray(family.D(xb, pk), dtype=float))
        w = sb * u
        w[1:] -= sd[1:] * u[:-1]
        v = w
    gen = v / v[0]
    x = np.arange(top + 1)
    phi0 = np.sqrt(phi0sq_values(family, p, x))
    ref, err = _reference_P(family, p, np.array([n]), x)
    target = phi0 * ref[0]
    scale = np.full(len(x), max(np.abs(target).max(), 1e-300))
    return gen, masked_max(gen - target, phi0 * err[0], scale, tol)


# ---------------------------------------------------------------------------
# dual closure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DualClosureReport:
    R1: float
    R0: float
    Rm1: float
    eta_minus1: float

    @property
    def worst(self):
        return max(self.R1, self.R0, self.Rm1, self.eta_minus1)


def dual_polynomials(coeffs, eta1):
    """``(R1d, R0d, Rm1d)`` callables built from the closure coefficients and ``eta(1)``."""
    em1 = coeffs.rm1_2 - eta1

    def R1d(z):
        return coeffs.r1_1 * z + coeffs.rm1_2

    def R0d(z):
        return coeffs.r1_1 * z * z + 2 * coeffs.rm1_2 * z - eta1 * em1

    def Rm1d(z, B0):
        return coeffs.r1_0 * z * z + coeffs.rm1_1 * z + eta1 * em1 * B0

    return R1d, R0d, Rm1d


def dual_closure_check(family, p, window=20):
    """Pointwise dual closure data against the polynomial forms on interior points.

    ``R1d(eta(x)) = (eta(x+1) - eta) + (eta(x-1) - eta)``,
    ``R0d(eta(x)) = -(eta(x+1) - eta)(eta(x-1) - eta)`` and
    ``Rm1d(eta(x)) = -(B(x) + D(x)) R0d(eta(x))``, for ``1 <= x <= top - 1``.
    """
    family = get_family(family)
    cc = family.closure(p)
    if cc is None:
        raise SpectrumMethodError(f"{family.id}: no closure data")
    top = p.N if family.finite else window
    x = np.arange(1, top)
    eta = lambda y: np.asarray(family.eta(y, p), dtype=float)  # noqa: E731
    e, ep, em = eta(x), eta(x + 1), eta(x - 1)
    eta1 = float(eta(1))
    B0 = float(family.B(0, p))
    R1d, R0d, Rm1d = dual_polynomials(cc, eta1)
    up, down = ep - e, em - e
    # magnitudes of the operands of the lattice differences
    aup, adown = np.abs(ep) + np.abs(e), np.abs(em) + np.abs(e)
    r1 = _rel_terms(R1d(e) - (up + down), [cc.r1_1 * e, cc.rm1_2 + 0 * e, aup, adown])
    r0 = _rel_terms(R0d(e) + up * down, [cc.r1_1 * e * e, 2 * cc.rm1_2 * e, eta1 * (cc.rm1_2 - eta1) + 0 * e, aup * adown])
    a = np.asarray(family.B(x, p), dtype=float) + np.asarray(family.D(x, p), dtype=float)
    lhs = Rm1d(e, B0)
    rm = _rel_terms(lhs + a * R0d(e), [cc.r1_0 * e * e, cc.rm1_1 * e, eta1 * (cc.rm1_2 - eta1) * B0 + 0 * e, a * aup * adown])
    em1 = abs(float(eta(-1)) - (cc.rm1_2 - eta1)) / max(abs(eta1), 1e-300)
    return DualClosureReport(r1, r0, rm, em1)


def _rel_terms(diff, terms):
    scale = sum(np.abs(t) for t in terms)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(scale > 0, np.abs(diff) / scale, np.abs(diff))
    return float(np.max(r)) if np.size(r) else 0.0
