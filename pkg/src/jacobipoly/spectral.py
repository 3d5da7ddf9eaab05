"""Spectrum routes, polynomial tables, duality and orthogonality checks.

Tables carry an estimate of their own absolute rounding error.  Identity
checks compare two tables only at entries where the combined estimate is a
small fraction of the tolerance; the remaining entries are reported as
skipped so that coverage is visible rather than silently lost.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import export
from .eigen import EPS, largest_eigenvalue, tridiagonal_eigen
from .families import get_family, measure_window, phi0sq_values
from .hamiltonian import TridiagonalOperator, sqrt_product
from .special import series_condition

#: an entry is compared only if its estimated error is below this fraction of the tolerance
MASK_FRACTION = 0.1
#: relative size of the coefficient perturbation used to estimate recurrence error
PERTURBATION = 1e-10
PERTURBATION_SAFETY = 10.0
#: largest eigen-index examined on infinite lattices
N_CAP = 40
#: infinite-lattice windows start here and double up to the limit
WINDOW_START = 50
WINDOW_LIMIT = 1600
#: entries of B and D above this are treated as overflow for window purposes
MAGNITUDE_LIMIT = 1e250
CONVERGED_RTOL = 1e-12
#: largest admissible ground-state leak through the truncation edge
DEFECT_TOL = 1e-12
SPECTRAL_FRACTION = 0.9
#: smallest relative eigenvalue gap kept in the converged prefix
GAP_RTOL = 1e-6

DUALITY_TOL = 1e-9
ORTHOGONALITY_TOL = 1e-8


class BreakdownError(ArithmeticError):
    """A recurrence divisor vanished before the requested degree."""


class DegenerateSpectrumError(ArithmeticError):
    pass


class DualConstructionError(ValueError):
    """``A_n`` or ``C_n`` has the wrong sign for the dual Hamiltonian."""


class SpectrumMethodError(ValueError):
    pass


# ---------------------------------------------------------------------------
# spectrum
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralSolution:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None
    method: str = "numeric"
    solver: str = ""
    residuals: np.ndarray | None = None


METHODS = ("numeric", "closed_form", "shape_invariance", "alpha_iteration", "characteristic_roots")


def lattice_BD(family, p, window):
    x = np.arange(int(window) + 1)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        return np.asarray(family.B(x, p), dtype=float), np.asarray(family.D(x, p), dtype=float)


def numeric_spectrum(B_values, D_values, count=None, vectors=True, accurate=None):
    lam, vec, solver = tridiagonal_eigen(B_values, D_values, count, vectors, accurate)
    return SpectralSolution(np.asarray(lam), vec, "numeric", solver)


def alpha_pm(coeffs, z):
    """``(alpha_+, alpha_-)`` at ``z``; raises on a negative discriminant."""
    z = np.asarray(z, dtype=float)
    R1 = coeffs.R1(z)
    disc = R1 * R1 + 4 * coeffs.R0(z)
    scale = np.maximum(R1 * R1, np.abs(4 * coeffs.R0(z)))
    if np.any(disc < -1e-12 * np.maximum(scale, 1e-300)):
        raise SpectrumMethodError("negative discriminant R1^2 + 4 R0: closure coefficients inconsistent")
    root = np.sqrt(np.maximum(disc, 0.0))
    R0 = coeffs.R0(z)
    # the root of larger magnitude directly, the other from alpha_+ alpha_- = -R0
    big = 0.5 * (R1 + np.where(R1 >= 0, root, -root))
    with np.errstate(divide="ignore", invalid="ignore"):
        small = np.where(big != 0, -R0 / np.where(big != 0, big, 1.0), 0.0)
    up = np.where(R1 >= 0, big, small)
    down = np.where(R1 >= 0, small, big)
    return up, down


def shape_invariance_spectrum(family, p, n_max):
    """``E(n) = sum_{s<n} kappa^s E(1; lambda + s delta)``."""
    if family.shift is None or family.kappa is None:
        raise SpectrumMethodError(f"{family.id}: no shape-invariance data")
    kappa = family.kappa_value(p)
    steps = []
    for s in range(n_max):
        ps = family.shifted(p, s)
        steps.append(kappa**s * float(family.E(1, ps)))
    return np.concatenate([[0.0], np.cumsum(steps)])


def alpha_iteration_spectrum(coeffs, n_max):
    """``E(0) = 0`` and ``E(n+1) = E(n) + alpha_+(E(n))``."""
    E = [0.0]
    for _ in range(n_max):
        up, _ = alpha_pm(coeffs, E[-1])
        E.append(E[-1] + float(up))
    return np.array(E)


def characteristic_residual(B_values, D_values, energies):
    """Scaled ``E Q_N - D(N)(Q_N - Q_{N-1})`` for a finite lattice ``0..N``."""
    energies = np.atleast_1d(np.asarray(energies, dtype=float))
    N = len(B_values) - 1
    Q = _Q_values(B_values, D_values, energies, N)
    qN = Q[N]
    qm = Q[N - 1] if N >= 1 else np.zeros_like(qN)
    dN = D_values[N]
    r = energies * qN - dN * (qN - qm)
    scale = np.abs(energies * qN) + dN * (np.abs(qN) + np.abs(qm))
    return np.abs(r) / np.where(scale > 0, scale, 1.0)


def solve_spectrum(H, method="numeric", family=None, params=None, n_max=None):
    """Eigenvalues by one of :data:`METHODS`.

    ``H`` is a :class:`TridiagonalOperator` or a ``(B_values, D_values)``
    pair.  Only the pair form can use the graded solver, so the numeric
    route prefers it.  Family-based methods need ``family`` and ``params``.
    """
    if method not in METHODS:
        raise SpectrumMethodError(f"unknown method {method!r}; expected one of {METHODS}")
    if method == "numeric":
        if isinstance(H, TridiagonalOperator):
            from scipy.linalg import eigh_tridiagonal

            count = H.size if n_max is None else min(H.size, n_max + 1)
            lam, vec = eigh_tridiagonal(
                H.diagonal, H.off_diagonal, select="i", select_range=(0, count - 1)
            )
            vec = vec * np.where(vec[0] < 0, -1.0, 1.0)
            return SpectralSolution(lam, vec, "numeric", "stebz")
        b, d = H
        count = None if n_max is None else n_max + 1
        return numeric_spectrum(b, d, count)
    if family is None or params is None:
        raise SpectrumMethodError(f"method {method!r} needs the family and its parameters")
    family = get_family(family)
    if n_max is None:
        if not family.finite:
            raise SpectrumMethodError("n_max is required on an infinite lattice")
        n_max = params.N
    n = np.arange(n_max + 1)
    if method == "closed_form":
        return SpectralSolution(np.asarray(family.E(n, params), dtype=float), method=method)
    if method == "shape_invariance":
        return SpectralSolution(shape_invariance_spectrum(family, params, n_max), method=method)
    if method == "alpha_iteration":
        cc = family.closure(params)
        if cc is None:
            raise SpectrumMethodError(f"{family.id}: no closure data")
        return SpectralSolution(alpha_iteration_spectrum(cc, n_max), method=method)
    if not family.finite:
        raise SpectrumMethodError("characteristic_roots needs a finite lattice")
    b, d = lattice_BD(family, params, params.N)
    E = np.asarray(family.E(np.arange(params.N + 1), params), dtype=float)
    return SpectralSolution(E, method=method, residuals=characteristic_residual(b, d, E))


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------

def _sign_patterns(shape, count=2):
    """Deterministic +-1 arrays standing in for random rounding directions."""
    idx = np.arange(int(np.prod(shape))).reshape(shape)
    for r in range(count):
        yield np.where(((idx * (2 * r + 3) + r) // (r + 1)) % 2 == 0, 1.0, -1.0)


def _propagated_error(run, inputs):
    """Rounding-error estimate of ``run(*inputs)`` from perturbed replicas."""
    with np.errstate(all="ignore"):
        base = run(*inputs)
        spread = np.zeros_like(base)
        for j, arr in enumerate(inputs):
            for pattern in _sign_patterns(np.shape(arr)):
                trial = list(inputs)
                trial[j] = arr * (1 + PERTURBATION * pattern)
                spread = np.maximum(spread, np.abs(run(*trial) - base))
        err = spread * (EPS / PERTURBATION) * PERTURBATION_SAFETY + 4 * EPS * np.abs(base)
    return base, np.where(np.isfinite(base), err, np.inf)


@dataclass(frozen=True)
class PolynomialTable:
    """``values[n, x] = P_n(eta(x))`` with an absolute error estimate per entry."""

    values: np.ndarray
    error: np.ndarray
    route: str
    family: str = ""
    params: dict = field(default_factory=dict)

    @property
    def n_max(self):
        return self.values.shape[0] - 1

    @property
    def x_max(self):
        return self.values.shape[1] - 1

    def anchor_deviation(self):
        """Largest departure of row ``n = 0`` and column ``x = 0`` from one."""
        return float(max(np.abs(self.values[0] - 1).max(), np.abs(self.values[:, 0] - 1).max()))

    def to_csv(self):
        rows = [[x] + list(self.values[:, x]) for x in range(self.x_max + 1)]
        return export.csv_text(["x"] + [f"P{n}" for n in range(self.n_max + 1)], rows)

    def to_json(self, extra_meta=None):
        meta = {"family": self.family, "params": self.params, "route": self.route,
                "layout": "values[n][x]", "n_max": self.n_max, "x_max": self.x_max}
        meta.update(extra_meta or {})
        return export.dumps(meta, {"values": self.values, "error_estimate": self.error})


@dataclass(frozen=True)
class DualTable:
    """``values[x, n] = Q_x(E(n))``."""

    values: np.ndarray
    error: np.ndarray
    energies: np.ndarray
    weights: np.ndarray | None = None
    characteristic_residual: np.ndarray | None = None

    @property
    def x_max(self):
        return self.values.shape[0] - 1

    def to_csv(self):
        rows = [[x] + list(self.values[x]) for x in range(self.x_max + 1)]
        return export.csv_text(["x"] + [f"Q(E{n})" for n in range(len(self.energies))], rows)

    def to_json(self, extra_meta=None):
        meta = {"layout": "values[x][n]", "energies": self.energies}
        meta.update(extra_meta or {})
        data = {"values": self.values, "error_estimate": self.error}
        if self.characteristic_residual is not None:
            data["characteristic_residual"] = self.characteristic_residual
        return export.dumps(meta, data)


def _closed_form_P(family, p, n, x):
    with series_condition() as log:
        vals = np.asarray(family.P(n[:, None], x[None, :], p), dtype=float)
    vals = np.broadcast_to(vals, (len(n), len(x))).copy()
    err = np.zeros_like(vals)
    with np.errstate(all="ignore"):
        for series, abssum, terms in log:
            series = np.broadcast_to(series, vals.shape)
            abssum = np.broadcast_to(abssum, vals.shape)
            factor = np.where(series != 0, np.abs(vals / series), 1.0)
            err = np.maximum(err, EPS * (terms + 4) * abssum * factor)
        err = err + 4 * EPS * np.abs(vals)
    # the n = 0 row and x = 0 column are pinned to one
    err[(n[:, None] == 0) | (x[None, :] == 0)] = 0.0
    return vals, np.where(np.isfinite(vals) & np.isfinite(err), err, np.inf)


def _P_recurrence(eta, A, C, n_max, jitter=None):
    # jitter[k] scales the two terms of step k, standing in for their rounding
    P = np.empty((n_max + 1, len(eta)))
    P[0] = 1.0
    prev = np.zeros(len(eta))
    for k in range(n_max):
        t1 = (eta + A[k] + C[k]) * P[k]
        t2 = C[k] * prev
        if jitter is not None:
            t1, t2 = t1 * jitter[k, 0], t2 * jitter[k, 1]
        P[k + 1] = (t1 - t2) / A[k]
        prev = P[k]
    return P


def build_P_table(family, p, window, route="closed_form", n_max=None):
    """``P_n(eta(x))`` for ``n <= n_max`` and ``x <= window``.

    ``route="recurrence"`` iterates ``P_{n+1} = ((eta + A_n + C_n) P_n -
    C_n P_{n-1}) / A_n`` from the catalog ``A_n``, ``C_n``.
    """
    family = get_family(family)
    if n_max is None:
        n_max = p.N if family.finite else min(int(window), N_CAP)
    x = np.arange(int(window) + 1)
    n = np.arange(int(n_max) + 1)
    meta = dict(family=family.id, params=family.user_values(p))
    if route == "closed_form":
        if family.P is None:
            raise SpectrumMethodError(f"{family.id}: no closed-form polynomial")
        vals, err = _closed_form_P(family, p, n, x)
        return PolynomialTable(vals, err, route, **meta)
    if route != "recurrence":
        raise SpectrumMethodError(f"unknown route {route!r}")
    m = np.arange(max(n_max, 1))
    A = np.asarray(family.A(m, p), dtype=float)
    C = np.asarray(family.C(m, p), dtype=float)
    zero = np.flatnonzero(A[:n_max] == 0)
    if zero.size:
        raise BreakdownError(f"{family.id}: A_{int(zero[0])} = 0 stops the recurrence before n={n_max}")
    eta = np.asarray(family.eta(x, p), dtype=float)
    jitter = np.ones((n_max, 2, len(eta)))
    vals, err = _propagated_error(lambda e, a, c, j: _P_recurrence(e, a, c, n_max, j), [eta, A, C, jitter])
    return PolynomialTable(vals, err, route, **meta)


def _Q_values(b, d, energies, window, jitter=None):
    Q = np.empty((window + 1, len(energies)))
    Q[0] = 1.0
    prev = np.zeros(len(energies))
    for x in range(window):
        t1 = (b[x] + d[x] - energies) * Q[x]
        t2 = d[x] * prev
        if jitter is not None:
            t1, t2 = t1 * jitter[x, 0], t2 * jitter[x, 1]
        Q[x + 1] = (t1 - t2) / b[x]
        prev = Q[x]
    return Q


def build_Q_table(B, D, eigenvalues, window, weights=None):
    """``Q_x(E)`` for ``x <= window`` from ``Q_0 = 1`` by the dual recurrence.

    ``B`` and ``D`` are callables or arrays covering ``0..window``.  When
    ``B(window) = 0`` (the top of a finite lattice) the last equation is
    also evaluated and stored as ``characteristic_residual``.
    """
    x = np.arange(int(window) + 1)
    b = np.asarray(B(x) if callable(B) else np.asarray(B, dtype=float)[x], dtype=float)
    d = np.asarray(D(x) if callable(D) else np.asarray(D, dtype=float)[x], dtype=float)
    if d[0] != 0:
        raise BreakdownError("D(0) must vanish")
    zero = np.flatnonzero(b[: int(window)] == 0)
    if zero.size:
        raise BreakdownError(f"B({int(zero[0])}) = 0 stops the dual recurrence before x={window}")
    E = np.asarray(eigenvalues, dtype=float)
    jitter = np.ones((int(window), 2, len(E)))
    vals, err = _propagated_error(lambda bb, dd, ee, j: _Q_values(bb, dd, ee, int(window), j), [b, d, E, jitter])
    resid = characteristic_residual(b, d, E) if b[-1] == 0 else None
    return DualTable(vals, err, E, weights, resid)


# ---------------------------------------------------------------------------
# identity checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MaskedResidual:
    """Largest residual over the entries whose error estimate allowed a verdict."""

    residual: float
    checked: int
    skipped: int
    raw_residual: float = float("nan")

    @property
    def coverage(self):
        total = self.checked + self.skipped
        return self.checked / total if total else 0.0

    def as_dict(self):
        return {"residual": self.residual, "checked": self.checked, "skipped": self.skipped,
                "coverage": self.coverage, "raw_residual": self.raw_residual}


def masked_max(diff, error, scale, tol):
    with np.errstate(all="ignore"):
        rel = np.abs(diff) / scale
        ok = (error <= MASK_FRACTION * tol * scale) & np.isfinite(rel)
    checked = int(ok.sum())
    raw = float(np.nanmax(rel)) if np.any(np.isfinite(rel)) else float("nan")
    res = float(rel[ok].max()) if checked else float("nan")
    return MaskedResidual(res, checked, int(ok.size - checked), raw)


def duality_check(P, Q, tol=DUALITY_TOL, rows=None, cols=None):
    """``|P_n(eta(x)) - Q_x(E(n))| / max(1, |P_n(eta(x))|)`` over the common block.

    ``rows``/``cols`` restrict to ``n < rows`` and ``x < cols``.
    """
    n_count = min(P.values.shape[0], Q.values.shape[1])
    x_count = min(P.values.shape[1], Q.values.shape[0])
    if rows is not None:
        n_count = min(n_count, rows)
    if cols is not None:
        x_count = min(x_count, cols)
    pv = P.values[:n_count, :x_count]
    qv = Q.values[:x_count, :n_count].T
    err = P.error[:n_count, :x_count] + Q.error[:x_count, :n_count].T
    with np.errstate(invalid="ignore"):
        scale = np.maximum(1.0, np.abs(pv))
    return masked_max(pv - qv, err, scale, tol)


def orthogonality_check(P, phi0sq, dnsq, mode="rows", tol=ORTHOGONALITY_TOL):
    """Deviation of the normalized Gram matrix from the identity.

    ``rows``: ``d_n d_m sum_x phi0^2 P_n P_m`` against ``delta_nm``.
    ``completeness``: ``phi0(x) phi0(y) sum_n d_n^2 P_n(x) P_n(y)`` against
    ``delta_xy``; this needs the whole lattice.  Both are the entrywise
    forms of the two identities scaled by their diagonals.
    """
    w = np.asarray(phi0sq, dtype=float)[: P.values.shape[1]]
    dn = np.asarray(dnsq, dtype=float)[: P.values.shape[0]]
    vals, err = P.values[:, : len(w)][: len(dn)], P.error[:, : len(w)][: len(dn)]
    with np.errstate(all="ignore"):
        if mode == "rows":
            U = np.sqrt(dn)[:, None] * vals * np.sqrt(w)[None, :]
            dU = np.sqrt(dn)[:, None] * err * np.sqrt(w)[None, :]
            U = np.where(w[None, :] == 0, 0.0, U)
            dU = np.where(w[None, :] == 0, 0.0, dU)
            G = U @ U.T
            bound = dU @ np.abs(U).T + np.abs(U) @ dU.T + EPS * U.shape[1] * (np.abs(U) @ np.abs(U).T)
        elif mode == "completeness":
            U = np.sqrt(w)[None, :] * vals * np.sqrt(dn)[:, None]
            dU = np.sqrt(w)[None, :] * err * np.sqrt(dn)[:, None]
            G = U.T @ U
            bound = dU.T @ np.abs(U) + np.abs(U).T @ dU + EPS * U.shape[0] * (np.abs(U).T @ np.abs(U))
        else:
            raise ValueError(f"unknown mode {mode!r}")
    bound = np.where(np.isfinite(bound), bound, np.inf)
    return masked_max(G - np.eye(len(G)), bound, np.ones_like(G), tol)


def eigenvector_check(vectors, P, phi0sq, dnsq, tol=1e-8):
    """Numeric unit eigenvectors against ``d_n phi0 P_n``, both with positive ``x = 0`` entry."""
    k = min(vectors.shape[1], P.values.shape[0])
    x = min(vectors.shape[0], P.values.shape[1])
    w = np.asarray(phi0sq, dtype=float)[:x]
    dn = np.asarray(dnsq, dtype=float)[:k]
    with np.errstate(all="ignore"):
        amp = np.sqrt(dn)[:, None] * np.sqrt(w)[None, :]
        ref = amp * P.values[:k, :x]
        err = amp * P.error[:k, :x] + 4 * EPS * np.abs(ref)
        # an underflowed weight says nothing about the size of the vector entry
        lost = (w < np.finfo(float).tiny)[None, :] | (dn < np.finfo(float).tiny)[:, None]
        err = np.where(lost | ~np.isfinite(ref), np.inf, err)
    return masked_max(vectors[:x, :k].T - ref, err, np.ones_like(ref), tol)


# ---------------------------------------------------------------------------
# recurrence coefficients, normalization and the dual Hamiltonian
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RecurrenceFromClosure:
    A: np.ndarray
    C: np.ndarray
    catalog_A: np.ndarray | None
    catalog_C: np.ndarray | None
    deviation: float
    a0_relation: float
    a0_source: str = "closure"


def recurrence_coeffs_from_closure(family, p, n_max):
    """``A_n``, ``C_n`` for ``n <= n_max`` from the closure coefficients.

    With ``K_n = R_-1(E_n) / R_0(E_n)``::

        A_n = [K_n (E_n - E_{n-1}) + eta(1)(E_n - B(0))] / (E_{n+1} - E_{n-1})
        C_n = [K_n (E_n - E_{n+1}) + eta(1)(E_n - B(0))] / (E_{n-1} - E_{n+1})

    for ``n >= 1``, ``A_0 = r_-1^(0) / r_0^(0)`` and ``C_0 = 0``.  Also
    reports the scaled residual of ``A_0 E(1) + B(0) eta(1) = 0``.
    """
    family = get_family(family)
    cc = family.closure(p)
    if cc is None:
        raise SpectrumMethodError(f"{family.id}: no closure data")
    n = np.arange(n_max + 2)
    E = np.asarray(family.E(n, p), dtype=float)
    eta1 = float(family.eta(1, p))
    B0 = float(family.B(0, p))
    A = np.zeros(n_max + 1)
    C = np.zeros(n_max + 1)
    # R0(0) = 0 (Hahn with a + b = 2, say) leaves A_0 undetermined by the closure
    A[0] = cc.rm1_0 / cc.r0_0 if cc.r0_0 != 0 else np.nan
    for k in range(1, n_max + 1):
        gap = E[k + 1] - E[k - 1]
        if gap == 0:
            raise DegenerateSpectrumError(f"{family.id}: E({k + 1}) = E({k - 1})")
        K = float(cc.Rm1(E[k]) / cc.R0(E[k]))
        base = eta1 * (E[k] - B0)
        A[k] = (K * (E[k] - E[k - 1]) + base) / gap
        C[k] = (K * (E[k] - E[k + 1]) + base) / -gap
    catA = catC = None
    dev = float("nan")
    if family.A is not None and family.C is not None:
        catA = np.asarray(family.A(n[:-1], p), dtype=float)
        catC = np.asarray(family.C(n[:-1], p), dtype=float)
        scale = np.maximum(np.abs(catA) + np.abs(catC), 1e-300)
        dev = float(max(np.nanmax(np.abs(A - catA) / scale), np.nanmax(np.abs(C - catC) / scale)))
    source = "closure"
    a0 = A[0]
    if np.isnan(a0) and catA is not None:
        a0, source = catA[0], "catalog"
    a0_rel = abs(a0 * E[1] + B0 * eta1) / max(abs(a0 * E[1]), abs(B0 * eta1))
    return RecurrenceFromClosure(A, C, catA, catC, dev, float(a0_rel), source)


@dataclass(frozen=True)
class NormalizationResult:
    product: np.ndarray
    closed_form: np.ndarray | None
    deviation: float
    d0sq: float


def normalization_dn(family, p, n_max):
    """``d_n^2 = d_0^2 prod_{m<n} A_m / C_{m+1}`` with ``d_0^2 = 1 / sum phi0^2``."""
    family = get_family(family)
    m = np.arange(n_max)
    A = np.asarray(family.A(m, p), dtype=float)
    C = np.asarray(family.C(m + 1, p), dtype=float)
    if np.any(C == 0):
        raise BreakdownError(f"{family.id}: C_{int(np.flatnonzero(C == 0)[0]) + 1} = 0")
    window = measure_window(family, p)
    d0sq = 1.0 / float(np.sum(phi0sq_values(family, p, np.arange(window + 1))))
    logratio = np.concatenate([[0.0], np.cumsum(np.log(A / C))])
    product = d0sq * np.exp(logratio)
    closed = None
    dev = float("nan")
    if family.dnsq is not None:
        closed = np.asarray(family.dnsq(np.arange(n_max + 1), p), dtype=float)
        dev = float(np.max(np.abs(product / closed - 1)))
    return NormalizationResult(product, closed, dev, d0sq)


def build_dual_hamiltonian(A, C, n_max=None):
    """Diagonal ``-(A_n + C_n)``, off-diagonal ``-sqrt(A_n C_{n+1})`` for ``n <= n_max``."""
    A = np.asarray(A, dtype=float)
    C = np.asarray(C, dtype=float)
    if n_max is None:
        n_max = len(A) - 1
    a = A[: n_max + 1]
    c = C[: n_max + 1]
    if np.any(a[:n_max] >= 0) or np.any(c[1:] >= 0):
        raise DualConstructionError("A_n < 0 and C_n < 0 are required on the range")
    if c[0] != 0:
        raise DualConstructionError("C_0 must vanish")
    off = -sqrt_product(-a[:n_max], -c[1:])
    return TridiagonalOperator.symmetric_from(-(a + c), off)


# ---------------------------------------------------------------------------
# windows
# ---------------------------------------------------------------------------

def usable_window(family, p, limit=WINDOW_LIMIT):
    """Largest window ``<= limit`` on which ``B`` and ``D`` stay finite and moderate."""
    b, d = lattice_BD(family, p, limit + 1)
    bad = ~np.isfinite(b) | ~np.isfinite(d) | (np.abs(b) > MAGNITUDE_LIMIT) | (np.abs(d) > MAGNITUDE_LIMIT)
    if not bad.any():
        return limit
    return max(int(np.flatnonzero(bad)[0]) - 2, 2)


@dataclass(frozen=True)
class SpectralPlan:
    """Where spectrum-level checks are meaningful for one parameter point.

    ``eigenvalues``/``eigenvectors`` are the numeric pairs on the final
    window, restricted to ``n <= n_max``.
    """

    x_max: int
    n_max: int
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    solver: str
    windows: tuple
    defect: float
    applicable: bool
    reason: str = ""

    def as_dict(self):
        return {"x_max": self.x_max, "n_max": self.n_max, "solver": self.solver,
                "windows": list(self.windows), "defect": self.defect,
                "applicable": self.applicable, "reason": self.reason}


def ground_state_defect(b, d):
    """``B(W) phi0(W)^2 / sum phi0^2``: weight pushed through the truncation edge."""
    from .hamiltonian import log_ground_state

    logsq = log_ground_state(b, d, len(b) - 1)
    top = logsq.max()
    total = np.sum(np.exp(logsq - top))
    with np.errstate(divide="ignore"):
        return float(np.exp(np.log(b[-1]) + logsq[-1] - top) / total) if b[-1] > 0 else 0.0


def resolved_prefix(lam):
    """Length of the leading run of eigenvalues separated by at least :data:`GAP_RTOL` relatively.

    Eigenvectors are accurate to about ``eps / relative gap``; spectra that
    accumulate at a finite point lose their upper levels to this.
    """
    lam = np.asarray(lam, dtype=float)
    if len(lam) < 2:
        return len(lam)
    gap = np.diff(lam)
    left = np.concatenate([[np.inf], gap])
    right = np.concatenate([gap, [np.inf]])
    rel = np.minimum(left, right) / np.maximum(np.abs(lam), np.finfo(float).tiny)
    bad = np.flatnonzero(rel[1:] < GAP_RTOL)
    # the ground state is isolated from below by construction
    return int(bad[0] + 1) if bad.size else len(lam)


def spectral_window(family, p, n_cap=N_CAP):
    """Window and eigen-range on which truncated spectra represent the family.

    Finite lattices use the whole lattice.  Infinite ones start from the
    larger of :data:`WINDOW_START` and the measure window, and double until
    the lowest ``n_cap + 1`` eigenvalues repeat to :data:`CONVERGED_RTOL`
    (or the usable limit is reached).  ``n_max`` is the length of the
    converged prefix, further limited to eigenvalues below
    :data:`SPECTRAL_FRACTION` of the top of the truncated spectrum.  When the
    ground state leaks through the edge (the truncation then selects a
    different self-adjoint problem) the plan is marked not applicable.
    """
    family = get_family(family)
    if family.finite:
        b, d = lattice_BD(family, p, p.N)
        sol = numeric_spectrum(b, d)
        return SpectralPlan(p.N, p.N, sol.eigenvalues, sol.eigenvectors, sol.solver, (p.N,), 0.0, True)
    limit = usable_window(family, p)
    try:
        start = measure_window(family, p)
    except ArithmeticError:
        start = limit
    W = int(min(max(WINDOW_START, start), limit))
    windows = []
    prev = None
    count = n_cap + 1
    while True:
        b, d = lattice_BD(family, p, W)
        sol = numeric_spectrum(b, d, count)
        windows.append(W)
        lam = sol.eigenvalues
        if prev is not None:
            k = min(len(prev), len(lam))
            ref = max(abs(lam[1]), 1e-300) if len(lam) > 1 else 1.0
            scale = np.maximum(np.abs(lam[:k]), ref)
            good = np.abs(lam[:k] - prev[:k]) <= CONVERGED_RTOL * scale
            conv = int(np.argmin(good)) if not good.all() else k
            if conv >= count or W >= limit:
                break
        elif W >= limit:
            conv = 0
            break
        prev = lam
        W = min(2 * W, limit)
    top = largest_eigenvalue(b, d)
    defect = ground_state_defect(b, d)
    below = int(np.sum(lam[:conv] < SPECTRAL_FRACTION * top))
    n_max = min(conv, below, resolved_prefix(lam[:conv]), n_cap + 1) - 1
    applicable = defect <= DEFECT_TOL and n_max >= 1
    reason = ""
    if defect > DEFECT_TOL:
        reason = f"ground-state weight leaks through the window edge (defect {defect:.1e})"
        n_max = -1
    elif n_max < 1:
        reason = "no converged excitations on the usable window"
    keep = max(n_max + 1, 0)
    vec = sol.eigenvectors[:, :keep] if sol.eigenvectors is not None else None
    return SpectralPlan(W, n_max, lam[:keep], vec, sol.solver, tuple(windows), defect, applicable, reason)


# ---------------------------------------------------------------------------
# partner duality
# ---------------------------------------------------------------------------

#: parameter maps taking a family to its dual partner; identity unless listed
PARTNER_MAPS = {
    "racah": lambda v, p: dict(v, d=p.dt),
    "q_racah": lambda v, p: dict(v, d=p.dt),
    # the coordinate q^-x - 1 - c q^-N + c q^(x-N) is the q-Krawtchouk spectrum at p = -c q^-N
    "dual_q_krawtchouk": lambda v, p: {"p": -v["c"] * v["q"] ** -v["N"], "N": v["N"], "q": v["q"]},
}


def partner_duality_check(family, p, size=12, tol=DUALITY_TOL):
    """``P_n(eta(x); lambda) = P'_x(eta'(n); lambda')`` against the catalog partner.

    Also checks that the partner's coordinate reproduces the spectrum,
    ``eta'(n) = E(n)``.  Returns ``None`` for families without a partner.
    """
    family = get_family(family)
    if not family.partner:
        return None
    partner = family if family.partner == "self" else get_family(family.partner)
    v = family.user_values(p)
    mapper = PARTNER_MAPS.get(family.id, lambda vv, pp: vv)
    pp = partner.params(mapper(v, p))
    top = min(p.N, size) if family.finite else size
    n = np.arange(top + 1)
    mine_vals, mine_err = _closed_form_P(family, p, n, n)
    theirs_vals, theirs_err = _closed_form_P(partner, pp, n, n)
    with np.errstate(invalid="ignore"):
        scale = np.maximum(1.0, np.abs(mine_vals))
    poly = masked_max(mine_vals - theirs_vals.T, mine_err + theirs_err.T, scale, tol)
    E = np.asarray(family.E(n, p), dtype=float)
    eta_dual = np.asarray(partner.eta(n, pp), dtype=float)
    coord = float(np.max(np.abs(E - eta_dual) / np.maximum(1.0, np.abs(E))))
    return {"partner": partner.id, "partner_params": partner.user_values(pp),
            "polynomial": poly, "coordinate": coord}
