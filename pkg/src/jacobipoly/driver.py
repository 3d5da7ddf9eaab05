"""Run the identity checks over a family x parameter grid and collect a report.

Each suite is a group of checks; every check yields one record with a
residual, the tolerance it is held to and a status (``pass``, ``fail``,
``not_applicable`` or ``error``).  Nothing raised inside a check stops the
run.  Records are sorted before the report is assembled, and nothing in
the pipeline is random, so a rerun reproduces the report exactly.
"""
from __future__ import annotations

import dataclasses
import os
import time
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import export
from .eigen import tridiagonal_eigen
from .families import (
    ClosureCoefficients,
    ParameterError,
    dnsq_values,
    family_ids,
    get_family,
    measure_window,
    phi0sq_values,
)
from .hamiltonian import build_hamiltonian, conjugate, factorization_residual, factorize, similarity_transform
from .reconstruction import eta_product_identity, roundtrip_catalog
from .spectral import (
    DUALITY_TOL,
    alpha_iteration_spectrum,
    alpha_pm,
    build_dual_hamiltonian,
    build_P_table,
    build_Q_table,
    duality_check,
    eigenvector_check,
    lattice_BD,
    masked_max,
    normalization_dn,
    orthogonality_check,
    partner_duality_check,
    recurrence_coeffs_from_closure,
    shape_invariance_spectrum,
    spectral_window,
)
from .symmetry import (
    SINGULAR_FACTOR,
    ShiftRangeError,
    SingularR0Error,
    _r0_uncertainty,
    _reference_P,
    build_ladder_operators,
    closure_residual,
    dual_closure_check,
    eta_steps,
    heisenberg_check,
    ladder_action_check,
    rodrigues_generate,
    shape_invariance_check,
    shift_operator_action,
    structure_relation_check,
)

SUITES = (
    "factorization", "spectrum", "duality", "orthogonality", "completeness", "closure",
    "dual_closure", "shape", "ladder", "heisenberg", "rodrigues", "reconstruction",
)

#: check name -> (suite, default tolerance, comparison)
CHECKS = {
    "factorization": ("factorization", 1e-13, "<="),
    "ground_state": ("factorization", 1e-13, "<="),
    "similarity_transform": ("factorization", 1e-12, "<="),
    "eigen_closed_form": ("spectrum", 1e-8, "<="),
    "shape_spectrum": ("spectrum", 1e-10, "<="),
    "alpha_spectrum": ("spectrum", 1e-10, "<="),
    "semi_definite": ("spectrum", 1e-10, "<="),
    "simple_spectrum": ("spectrum", 1e-8, ">="),
    "psi0_nonzero": ("spectrum", 1e-6, "<="),
    "eigenvectors": ("spectrum", 1e-8, "<="),
    "dual_hamiltonian": ("spectrum", 1e-8, "<="),
    "duality": ("duality", DUALITY_TOL, "<="),
    "P_routes": ("duality", 1e-9, "<="),
    "partner_duality": ("duality", 1e-9, "<="),
    "orthogonality": ("orthogonality", 1e-8, "<="),
    "normalization": ("orthogonality", 1e-9, "<="),
    "completeness": ("completeness", 1e-8, "<="),
    "closure": ("closure", 1e-9, "<="),
    "closure_negative_control": ("closure", 1e-3, ">="),
    "alpha_roots": ("closure", 1e-12, "<="),
    "Bn_identity": ("closure", 1e-9, "<="),
    "recurrence_from_closure": ("closure", 1e-10, "<="),
    "a0_relation": ("closure", 1e-12, "<="),
    "dual_closure": ("dual_closure", 1e-10, "<="),
    "shape_invariance": ("shape", 1e-10, "<="),
    "shift_forward": ("shape", 1e-9, "<="),
    "shift_backward": ("shape", 1e-9, "<="),
    "ladder_plus": ("ladder", 1e-8, "<="),
    "ladder_minus": ("ladder", 1e-8, "<="),
    "ladder_hermiticity": ("ladder", 1e-10, "<="),
    "structure_relation": ("ladder", 1e-8, "<="),
    "heisenberg": ("heisenberg", 1e-7, "<="),
    "rodrigues": ("rodrigues", 1e-8, "<="),
    "roundtrip": ("reconstruction", 1e-9, "<="),
    "ri0cond": ("reconstruction", 1e-10, "<="),
    "reconstructed_sum": ("reconstruction", 1e-10, "<="),
    "eta_class_q": ("reconstruction", 1e-12, "<="),
    "eta_identity": ("reconstruction", 1e-10, "<="),
    "positivity": ("reconstruction", 0.0, "<="),
}

#: environment variable holding a tolerance that replaces every upper-bound default
TOLERANCE_ENV = "JACOBIPOLY_RTOL"
#: window for lattice-level checks on infinite families (factorization, closure)
INFINITE_WINDOW = 60
#: relative perturbation applied to closure coefficients in the negative control
NEGATIVE_CONTROL = 0.1
#: highest degree used by the Rodrigues and shift checks
RODRIGUES_MAX = 5
#: highest degree for orthogonality on infinite lattices
ORTHOGONALITY_MAX = 10
DUALITY_N_MAX = 40
CLOSURE_N_MAX = 20
STATUSES = ("pass", "fail", "not_applicable", "error")

# Default parameter points: 3-5 per family, q fixed at 0.3 and 0.7, and at
# least one point 10% inside a boundary where the range has one (e.g.
# p = 1.1 q^-N for the quantum q-Krawtchouk range p > q^-N).  Racah and
# q-Racah have one point per sign quadrant.
_Q_HAHN = [dict(a=0.5, b=0.4, N=8, q=0.7), dict(a=0.2, b=0.7, N=6, q=0.3), dict(a=7, b=8, N=6, q=0.7)]
_QQK = [dict(p=10, N=6, q=0.7), dict(p=500, N=5, q=0.3), dict(p=4.6, N=4, q=0.7)]
_QK = [dict(p=0.5, N=8, q=0.7), dict(p=2, N=6, q=0.3), dict(p=0.1, N=5, q=0.7)]
_LQJ = [dict(a=0.5, b=0.3, q=0.7), dict(a=1.2, b=-0.5, q=0.7), dict(a=0.3, b=0.5, q=0.3)]
_QM = [dict(b=0.5, c=1, q=0.7), dict(b=0.2, c=0.3, q=0.3), dict(b=1.2, c=2, q=0.7)]
_LQL = [dict(a=0.5, q=0.7), dict(a=1.2, q=0.7), dict(a=0.3, q=0.3)]
_QC = [dict(a=0.5, q=0.7), dict(a=2, q=0.7), dict(a=1, q=0.3)]
_HAHN = [dict(a=0.5, b=1.5, N=8), dict(a=2, b=3, N=10), dict(a=-9.5, b=-8.7, N=8)]
DEFAULT_GRID = {
    "racah": [dict(a=8, b=0.7, d=0.5, N=6), dict(a=0.8, b=-6.2, d=-13.5, N=6),
              dict(a=1.1, b=-7.4, d=1.3, N=6), dict(a=-6.3, b=-15, d=-14.5, N=6)],
    "hahn": _HAHN,
    "dual_hahn": _HAHN,
    "krawtchouk": [dict(p=0.5, N=2), dict(p=0.3, N=10), dict(p=0.8, N=8)],
    "q_racah": [dict(a=0.05, b=0.6, d=0.5, N=5, q=0.7), dict(a=0.6, b=5, d=0.5, N=5, q=0.7),
                dict(a=0.5, b=6, d=50, N=5, q=0.7), dict(a=6, b=40, d=50, N=5, q=0.7),
                dict(a=0.002, b=0.5, d=0.5, N=4, q=0.3)],
    "q_hahn": _Q_HAHN,
    "dual_q_hahn": _Q_HAHN,
    "alternative_q_hahn": _Q_HAHN,
    "quantum_q_krawtchouk": _QQK,
    "dual_quantum_q_krawtchouk": _QQK,
    "alternative_affine_q_krawtchouk": _QQK,
    "q_krawtchouk": _QK,
    "dual_q_krawtchouk_p": _QK,
    "alternative_q_krawtchouk": _QK,
    "dual_q_krawtchouk": [dict(c=-0.5, N=8, q=0.7), dict(c=-2, N=6, q=0.3), dict(c=-0.1, N=5, q=0.7)],
    "affine_q_krawtchouk": [dict(p=0.5, N=8, q=0.7), dict(p=1.2, N=6, q=0.7), dict(p=2, N=6, q=0.3)],
    "meixner": [dict(beta=0.5, c=0.3), dict(beta=1, c=0.5), dict(beta=4, c=0.9)],
    "charlier": [dict(a=0.5), dict(a=1), dict(a=3)],
    "little_q_jacobi": _LQJ,
    "dual_little_q_jacobi": _LQJ,
    "q_meixner": _QM,
    "dual_q_meixner": _QM,
    "little_q_laguerre": _LQL,
    "al_salam_carlitz_ii": [dict(a=0.5, q=0.7), dict(a=1.2, q=0.7), dict(a=0.3, q=0.3)],
    "alternative_q_charlier": _QC,
    "dual_alternative_q_charlier": _QC,
    "q_charlier": _QC,
    "dual_q_charlier": _QC,
}


class ConfigError(ValueError):
    pass


class NotApplicable(Exception):
    """Raised inside a check when the identity has nothing to act on."""


def default_grid(family):
    fid = get_family(family).id
    if fid not in DEFAULT_GRID:
        raise ConfigError(f"no default grid for {fid!r}")
    return [dict(v) for v in DEFAULT_GRID[fid]]


def env_tolerance():
    raw = os.environ.get(TOLERANCE_ENV)
    if raw is None or raw == "":
        return None
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"{TOLERANCE_ENV}={raw!r} is not a number") from None
    if not value > 0:
        raise ConfigError(f"{TOLERANCE_ENV} must be positive")
    return value


@dataclass
class SuiteConfig:
    """What to run.

    ``grid`` maps family id to parameter dicts (defaults from
    :func:`default_grid`).  ``rtol`` replaces the default of every
    upper-bound check; ``tolerances`` overrides single checks; ``atol`` is
    added to every upper bound.  ``perturb_closure`` scales the closure
    coefficients used by the ``closure`` check (a negative control).
    """

    families: list | None = None
    grid: dict | None = None
    suites: tuple = SUITES
    rtol: float | None = None
    atol: float = 0.0
    tolerances: dict = field(default_factory=dict)
    perturb_closure: float = 0.0
    custom: dict = field(default_factory=dict)

    def __post_init__(self):
        self.suites = tuple(self.suites)
        unknown = set(self.suites) - set(SUITES)
        if unknown:
            raise ConfigError(f"unknown suite(s) {sorted(unknown)}; expected a subset of {list(SUITES)}")
        bad = set(self.tolerances) - set(CHECKS)
        if bad:
            raise ConfigError(f"unknown check(s) in tolerances: {sorted(bad)}")
        for name, tol in list(self.tolerances.items()) + [("rtol", self.rtol)]:
            if tol is not None and not tol > 0:
                raise ConfigError(f"tolerance {name} must be positive")
        if self.atol < 0:
            raise ConfigError("atol must be non-negative")
        if self.families is None:
            self.families = list(self.grid) if self.grid else family_ids()
        for fid in self.families:
            if fid not in self.custom:
                get_family(fid)
        if self.grid is None:
            self.grid = {}
        for fid in self.families:
            if fid in self.custom:
                self.grid.setdefault(fid, [{"N": len(self.custom[fid].custom_data[0]) - 1}])
            elif fid not in self.grid:
                self.grid[fid] = default_grid(fid)
            if not self.grid[fid]:
                raise ConfigError(f"{fid}: empty parameter list")

    def tolerance(self, check):
        suite, tol, cmp = CHECKS[check]
        if check in self.tolerances:
            return self.tolerances[check]
        if cmp == "<=" and self.rtol is not None and tol > 0:
            return self.rtol
        return tol


@dataclass(frozen=True)
class CheckRecord:
    family: str
    params: tuple
    suite: str
    check: str
    residual: float
    tolerance: float
    comparison: str
    status: str
    coverage: float | None = None
    detail: str = ""

    @property
    def passed(self):
        return self.status in ("pass", "not_applicable")

    def sort_key(self):
        return (self.family, self.params, SUITES.index(self.suite), self.check)

    def as_dict(self):
        d = dataclasses.asdict(self)
        d["params"] = dict(self.params)
        return d


@dataclass
class SuiteReport:
    records: list
    config: dict
    elapsed: float = 0.0

    @property
    def counts(self):
        out = {s: 0 for s in STATUSES}
        for r in self.records:
            out[r.status] += 1
        return out

    @property
    def ok(self):
        return all(r.passed for r in self.records)

    def failures(self):
        return [r for r in self.records if not r.passed]

    def worst(self, k=10):
        """Upper-bound checks with the largest residual-to-tolerance ratio."""
        def ratio(r):
            if r.comparison != "<=" or r.status in ("not_applicable", "error") or not np.isfinite(r.residual):
                return -1.0
            return r.residual / r.tolerance if r.tolerance > 0 else (np.inf if r.residual > 0 else 0.0)
        ranked = sorted(self.records, key=lambda r: (-ratio(r), r.sort_key()))
        return [r for r in ranked[:k] if ratio(r) >= 0]

    def select(self, family=None, suite=None, check=None):
        return [r for r in self.records
                if (family is None or r.family == family) and (suite is None or r.suite == suite)
                and (check is None or r.check == check)]

    def to_json(self):
        # elapsed time is left out so reruns emit identical text
        meta = {"config": self.config, "counts": self.counts, "ok": self.ok}
        data = {"records": [r.as_dict() for r in self.records],
                "worst": [r.as_dict() for r in self.worst()]}
        return export.dumps(meta, data)

    def to_table(self, failures_only=False):
        rows = self.failures() if failures_only else self.records
        head = f"{'family':32s} {'params':44s} {'check':26s} {'residual':>10s} {'tol':>9s}  status"
        lines = [head, "-" * len(head)]
        for r in rows:
            par = ",".join(f"{k}={v:g}" for k, v in r.params)
            res = f"{r.residual:10.2e}" if np.isfinite(r.residual) else f"{'-':>10s}"
            tol = f"{r.comparison}{r.tolerance:.0e}"
            note = f" ({r.detail})" if r.detail and r.status != "pass" else ""
            lines.append(f"{r.family:32s} {par[:44]:44s} {r.check:26s} {res} {tol:>9s}  {r.status}{note}")
        c = self.counts
        lines.append(f"{len(self.records)} checks: {c['pass']} pass, {c['fail']} fail, "
                     f"{c['not_applicable']} not applicable, {c['error']} error")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# one parameter point
# ---------------------------------------------------------------------------

class _Point:
    """Shared, lazily built data for one (family, parameters) pair."""

    def __init__(self, family, values, config):
        self.family = family
        self.values = values
        self.config = config
        self.p = family.params(values)
        self.records = []
        self.key = tuple(sorted((k, float(v)) for k, v in family.user_values(self.p).items()))

    @property
    def custom(self):
        return self.family.custom_data is not None

    @cached_property
    def window(self):
        if self.family.finite:
            return self.p.N
        return int(min(max(measure_window(self.family, self.p), 10), INFINITE_WINDOW))

    @cached_property
    def plan(self):
        return spectral_window(self.family, self.p)

    @cached_property
    def coeffs(self):
        if self.custom or self.family.closure_shifted is None:
            raise NotApplicable("no closure coefficients")
        return self.family.closure(self.p)

    def need(self, *names):
        missing = [n for n in names if getattr(self.family, n) is None]
        if missing:
            raise NotApplicable("closed form unavailable: " + ", ".join(missing))

    def need_plan(self):
        if not self.plan.applicable:
            raise NotApplicable(self.plan.reason)
        return self.plan

    def add(self, check, residual, coverage=None, detail=""):
        suite, _, cmp = CHECKS[check]
        tol = self.config.tolerance(check)
        residual = float(residual)
        if not np.isfinite(residual):
            status = "fail"
            detail = detail or "no entry resolvable at this tolerance"
        elif cmp == "<=":
            status = "pass" if residual <= tol + self.config.atol else "fail"
        else:
            status = "pass" if residual >= tol else "fail"
        self.records.append(CheckRecord(self.family.id, self.key, suite, check, residual, tol, cmp,
                                        status, coverage, detail))

    def skip(self, check, reason, status="not_applicable"):
        suite, _, cmp = CHECKS[check]
        self.records.append(CheckRecord(self.family.id, self.key, suite, check, float("nan"),
                                        self.config.tolerance(check), cmp, status, None, str(reason)))

    def run(self, check, fn):
        try:
            fn()
        except NotApplicable as exc:
            self.skip(check, exc)
        except ShiftRangeError as exc:
            self.skip(check, exc)
        except SingularR0Error as exc:
            self.skip(check, f"R0 singular on the spectrum: {exc}")
        except Exception as exc:  # noqa: BLE001 - a survey records every failure
            self.skip(check, f"{type(exc).__name__}: {exc}", status="error")


def _masked(pt, check, m, detail=""):
    pt.add(check, m.residual, m.coverage, detail)


# ------------------------------------------------------------- factorization

def _suite_factorization(pt):
    f, p, W = pt.family, pt.p, pt.window
    b, d = lattice_BD(f, p, W)

    def fact():
        H = build_hamiltonian(b, d, W)
        A, _ = factorize(b, d, W)
        res, norm = factorization_residual(H, A)
        pt.add("factorization", res / max(1.0, norm))

    def ground():
        A, _ = factorize(b, d, W)
        phi0 = np.sqrt(phi0sq_values(f, p, np.arange(W + 1)))
        out = A.apply(phi0)
        terms = np.abs(A.main * phi0)
        terms[:-1] += np.abs(A.offset * phi0[1:])
        # the last row of a truncated infinite lattice misses its neighbour
        rows = W + 1 if f.finite else W
        with np.errstate(invalid="ignore", divide="ignore"):
            rel = np.where(terms[:rows] > 0, np.abs(out[:rows]) / terms[:rows], 0.0)
        pt.add("ground_state", float(rel.max(initial=0.0)))

    def sim():
        H = build_hamiltonian(b, d, W)
        phi0 = np.sqrt(phi0sq_values(f, p, np.arange(W + 1)))
        got = conjugate(H, phi0)
        want = similarity_transform(b, d, W)
        scale = np.maximum(np.abs(want.upper), np.abs(want.lower))
        dev = max(float(np.max(np.abs(got.upper - want.upper) / np.abs(want.upper), initial=0.0)),
                  float(np.max(np.abs(got.lower - want.lower) / np.abs(want.lower), initial=0.0)))
        pt.add("similarity_transform", dev if scale.size else 0.0)

    pt.run("factorization", fact)
    pt.run("ground_state", ground)
    pt.run("similarity_transform", sim)


# ------------------------------------------------------------------ spectrum

def _E_scale(E):
    ref = abs(E[1]) if len(E) > 1 else 1.0
    return np.maximum(np.abs(E), ref)


def _suite_spectrum(pt):
    f, p = pt.family, pt.p

    def closed():
        plan = pt.need_plan()
        pt.need("E")
        n = np.arange(plan.n_max + 1)
        E = np.asarray(f.E(n, p), dtype=float)
        lam = plan.eigenvalues[: len(n)]
        pt.add("eigen_closed_form", np.max(np.abs(lam - E) / _E_scale(E)), detail=f"n<={plan.n_max}")

    def composed():
        pt.need("E")
        top = _spectrum_top(pt)
        E = np.asarray(f.E(np.arange(top + 1), p), dtype=float)
        if f.shift is None:
            raise NotApplicable("no parameter shift recorded")
        got = shape_invariance_spectrum(f, p, top)
        pt.add("shape_spectrum", np.max(np.abs(got - E) / _E_scale(E)))

    def iterated():
        pt.need("E")
        top = _spectrum_top(pt)
        E = np.asarray(f.E(np.arange(top + 1), p), dtype=float)
        got = alpha_iteration_spectrum(pt.coeffs, top)
        pt.add("alpha_spectrum", np.max(np.abs(got - E) / _E_scale(E)))

    def psd():
        lam, solver, norm = _window_spectrum(pt)
        pt.add("semi_definite", max(0.0, -float(lam[0])) / norm)

    def simple():
        lam, solver, norm = _window_spectrum(pt)
        if len(lam) < 2:
            raise NotApplicable("fewer than two eigenvalues")
        gaps = np.diff(lam)
        if solver == "qd-bisection":
            # graded spectra: each gap against the eigenvalues it separates
            rel = gaps / np.maximum(np.abs(lam[1:]), np.abs(lam[:-1]))
        else:
            rel = gaps / norm
        pt.add("simple_spectrum", float(rel.min()))

    def psi0():
        plan = pt.need_plan()
        pt.need("A", "C")
        n = np.arange(len(plan.eigenvalues))
        dn = np.sqrt(dnsq_values(f, p, n))
        v0 = plan.eigenvectors[0]
        # LAPACK vectors carry absolute errors near eps; bisection-twisted ones relative errors
        floor = 1e-12 if plan.solver != "qd-bisection" else 1e-150
        keep = dn > floor
        if np.any(v0[keep] <= 0):
            pt.add("psi0_nonzero", np.inf, detail="psi_n(0) not positive")
            return
        pt.add("psi0_nonzero", float(np.max(np.abs(v0[keep] / dn[keep] - 1))), float(keep.mean()))

    def vectors():
        plan = pt.need_plan()
        pt.need("A", "C")
        x = np.arange(plan.x_max + 1)
        n = np.arange(plan.n_max + 1)
        P, Pe = _reference_P(f, p, n, x)
        table = _table(P, Pe)
        m = eigenvector_check(plan.eigenvectors, table, phi0sq_values(f, p, x), dnsq_values(f, p, n))
        _masked(pt, "eigenvectors", m)

    def dual_h():
        if not f.finite:
            raise NotApplicable("infinite lattice")
        pt.need("A", "C", "eta")
        n = np.arange(p.N + 1)
        Hd = build_dual_hamiltonian(f.A(n, p), f.C(n, p))
        lam, _, _ = tridiagonal_eigen_dense(Hd)
        eta = np.asarray(f.eta(n, p), dtype=float)
        pt.add("dual_hamiltonian", np.max(np.abs(lam - eta) / _E_scale(eta)))

    pt.run("eigen_closed_form", closed)
    pt.run("shape_spectrum", composed)
    pt.run("alpha_spectrum", iterated)
    pt.run("semi_definite", psd)
    pt.run("simple_spectrum", simple)
    pt.run("psi0_nonzero", psi0)
    pt.run("eigenvectors", vectors)
    pt.run("dual_hamiltonian", dual_h)


def tridiagonal_eigen_dense(T):
    from scipy.linalg import eigh_tridiagonal

    lam = eigh_tridiagonal(T.diagonal, T.off_diagonal, eigvals_only=True)
    return lam, None, "stev"


def _window_spectrum(pt):
    """All eigenvalues of the truncated ``H`` on the lattice window."""
    if "_window_spectrum" not in pt.__dict__:
        b, d = lattice_BD(pt.family, pt.p, pt.window)
        lam, _, solver = tridiagonal_eigen(b, d, vectors=False)
        norm = build_hamiltonian(b, d, pt.window).max_norm()
        pt.__dict__["_window_spectrum"] = (lam, solver, norm)
    return pt.__dict__["_window_spectrum"]


def _spectrum_top(pt):
    if pt.family.finite:
        return pt.p.N
    plan = pt.plan
    return max(plan.n_max, 10) if plan.applicable else DUALITY_N_MAX


def _table(values, error):
    from .spectral import PolynomialTable

    return PolynomialTable(values, error, "reference")


# ------------------------------------------------------------------ duality

def _duality_range(pt):
    if pt.family.finite:
        return pt.p.N, pt.p.N
    return pt.window, min(DUALITY_N_MAX, pt.window)


def _suite_duality(pt):
    f, p = pt.family, pt.p

    def dual():
        pt.need("P", "E")
        W, nm = _duality_range(pt)
        P = build_P_table(f, p, W, "closed_form", nm)
        E = np.asarray(f.E(np.arange(nm + 1), p), dtype=float)
        top = W if f.finite else W
        Q = build_Q_table(lambda y: f.B(y, p), lambda y: f.D(y, p), E, top)
        _masked(pt, "duality", duality_check(P, Q, pt.config.tolerance("duality")))

    def routes():
        pt.need("P", "A", "C")
        W, nm = _duality_range(pt)
        Pc = build_P_table(f, p, W, "closed_form", nm)
        Pr = build_P_table(f, p, W, "recurrence", nm)
        with np.errstate(invalid="ignore"):
            scale = np.maximum(1.0, np.abs(Pc.values))
        _masked(pt, "P_routes", masked_max(Pc.values - Pr.values, Pc.error + Pr.error, scale,
                                           pt.config.tolerance("P_routes")))

    def partner():
        pt.need("P")
        out = partner_duality_check(f, p, tol=pt.config.tolerance("partner_duality"))
        if out is None:
            raise NotApplicable("no duality partner")
        poly = out["polynomial"]
        pt.add("partner_duality", max(poly.residual, out["coordinate"]), poly.coverage,
               f"partner {out['partner']}")

    pt.run("duality", dual)
    pt.run("P_routes", routes)
    pt.run("partner_duality", partner)


# ------------------------------------------------------------ orthogonality

def _suite_orthogonality(pt):
    f, p = pt.family, pt.p

    def rows():
        pt.need("A", "C")
        if f.finite:
            W, nm = p.N, p.N
        else:
            plan = pt.need_plan()
            W, nm = plan.x_max, min(plan.n_max, ORTHOGONALITY_MAX)
        x, n = np.arange(W + 1), np.arange(nm + 1)
        P, Pe = _reference_P(f, p, n, x)
        m = orthogonality_check(_table(P, Pe), phi0sq_values(f, p, x), dnsq_values(f, p, n), "rows",
                                pt.config.tolerance("orthogonality"))
        _masked(pt, "orthogonality", m)

    def norm():
        pt.need("A", "C", "dnsq")
        nm = p.N if f.finite else ORTHOGONALITY_MAX
        pt.add("normalization", normalization_dn(f, p, nm).deviation)

    pt.run("orthogonality", rows)
    pt.run("normalization", norm)


def _suite_completeness(pt):
    f, p = pt.family, pt.p

    def comp():
        if not f.finite:
            raise NotApplicable("completeness needs the whole lattice")
        pt.need("A", "C")
        x = np.arange(p.N + 1)
        P, Pe = _reference_P(f, p, x, x)
        m = orthogonality_check(_table(P, Pe), phi0sq_values(f, p, x), dnsq_values(f, p, x), "completeness",
                                pt.config.tolerance("completeness"))
        _masked(pt, "completeness", m)

    pt.run("completeness", comp)


# ------------------------------------------------------------------ closure

def perturbed(coeffs, factor):
    """Closure coefficients with every entry scaled by ``1 + factor``."""
    names = [f.name for f in dataclasses.fields(ClosureCoefficients) if f.name != "shifted_form"]
    return coeffs.replace(**{k: getattr(coeffs, k) * (1 + factor) for k in names})


def _closure_window(pt):
    f = pt.family
    W = pt.window
    b, d = lattice_BD(f, pt.p, W)
    x = np.arange(W + 1)
    return build_hamiltonian(b, d, W), np.asarray(f.eta(x, pt.p), dtype=float)


def _suite_closure(pt):
    f, p = pt.family, pt.p

    def closure():
        cc = pt.coeffs
        if pt.config.perturb_closure:
            cc = perturbed(cc, pt.config.perturb_closure)
        H, eta = _closure_window(pt)
        pt.add("closure", closure_residual(H, eta, cc, margin=0 if f.finite else 2).residual)

    def negative():
        cc = perturbed(pt.coeffs, NEGATIVE_CONTROL)
        H, eta = _closure_window(pt)
        pt.add("closure_negative_control", closure_residual(H, eta, cc, margin=0 if f.finite else 2).residual)

    def roots():
        cc = pt.coeffs
        pt.need("E")
        z = np.asarray(f.E(np.arange(_closure_top(pt) + 1), p), dtype=float)
        ap, am = alpha_pm(cc, z)
        R1, R0 = cc.R1(z), cc.R0(z)
        s1 = np.abs(ap) + np.abs(am) + np.abs(R1)
        s0 = np.abs(ap * am) + np.abs(R0)
        with np.errstate(invalid="ignore", divide="ignore"):
            r = max(np.nanmax(np.abs(ap + am - R1) / s1), np.nanmax(np.abs(ap * am + R0) / s0))
        pt.add("alpha_roots", r)

    def bn():
        cc = pt.coeffs
        pt.need("E", "A", "C")
        n = np.arange(_closure_top(pt) + 1)
        E = np.asarray(f.E(n, p), dtype=float)
        R0, Rm1 = cc.R0(E), cc.Rm1(E)
        AC = np.asarray(f.A(n, p), dtype=float) + np.asarray(f.C(n, p), dtype=float)
        scale = np.abs(np.asarray(f.A(n, p))) + np.abs(np.asarray(f.C(n, p)))
        # R0(E_n) vanishing (e.g. Hahn with a + b = 2 at n = 0) leaves K_n undefined there
        ok = np.abs(R0) > SINGULAR_FACTOR * _r0_uncertainty(cc, E)
        with np.errstate(invalid="ignore", divide="ignore"):
            r = np.abs(Rm1[ok] / R0[ok] - AC[ok]) / scale[ok]
        pt.add("Bn_identity", float(r.max()), float(ok.mean()))

    def rc():
        pt.coeffs
        pt.need("E", "A", "C")
        out = recurrence_coeffs_from_closure(f, p, _closure_top(pt))
        pt.add("recurrence_from_closure", out.deviation,
               detail="" if out.a0_source == "closure" else "n>=1; R0(0) = 0 leaves A_0 open")

    def a0():
        pt.coeffs
        pt.need("E")
        out = recurrence_coeffs_from_closure(f, p, 1)
        pt.add("a0_relation", out.a0_relation, detail=f"A_0 from {out.a0_source}")

    pt.run("closure", closure)
    pt.run("closure_negative_control", negative)
    pt.run("alpha_roots", roots)
    pt.run("Bn_identity", bn)
    pt.run("recurrence_from_closure", rc)
    pt.run("a0_relation", a0)


def _closure_top(pt):
    if pt.family.finite:
        return pt.p.N - 1
    plan = pt.plan
    return min(plan.n_max, CLOSURE_N_MAX) if plan.applicable else CLOSURE_N_MAX


def _suite_dual_closure(pt):
    def dual():
        pt.coeffs
        pt.need("eta")
        pt.add("dual_closure", dual_closure_check(pt.family, pt.p).worst)

    pt.run("dual_closure", dual)


# -------------------------------------------------------------------- shape

def _suite_shape(pt):
    f, p = pt.family, pt.p

    def shape():
        if f.shift is None or pt.custom:
            raise NotApplicable("no parameter shift recorded")
        pt.add("shape_invariance", shape_invariance_check(f, p).worst)

    def shifts():
        if f.shift is None or pt.custom:
            raise NotApplicable("no parameter shift recorded")
        tol = min(pt.config.tolerance("shift_forward"), pt.config.tolerance("shift_backward"))
        fw, bw, _ = shift_operator_action(f, p, tol=tol)
        pt.add("shift_forward", fw.residual, fw.coverage)
        pt.add("shift_backward", bw.residual, bw.coverage)

    pt.run("shape_invariance", shape)
    try:
        shifts()
    except (NotApplicable, ShiftRangeError, NotImplementedError) as exc:
        pt.skip("shift_forward", exc)
        pt.skip("shift_backward", exc)
    except Exception as exc:  # noqa: BLE001
        pt.skip("shift_forward", f"{type(exc).__name__}: {exc}", "error")
        pt.skip("shift_backward", f"{type(exc).__name__}: {exc}", "error")


def _suite_rodrigues(pt):
    f, p = pt.family, pt.p

    def rod():
        if f.shift is None or pt.custom:
            raise NotApplicable("no parameter shift recorded")
        top = min(RODRIGUES_MAX, p.N) if f.finite else RODRIGUES_MAX
        tol = pt.config.tolerance("rodrigues")
        parts = [rodrigues_generate(f, p, n, tol=tol)[1] for n in range(top + 1)]
        worst = max(parts, key=lambda m: m.residual if np.isfinite(m.residual) else np.inf)
        coverage = sum(m.checked for m in parts) / max(1, sum(m.checked + m.skipped for m in parts))
        pt.add("rodrigues", worst.residual, coverage, f"n<={top}")

    pt.run("rodrigues", rod)


# ------------------------------------------------------------ ladder family

class _Ladder:
    def __init__(self, pt):
        f, p = pt.family, pt.p
        plan = pt.need_plan()
        cc = pt.coeffs
        x = np.arange(plan.x_max + 1)
        b, d = lattice_BD(f, p, plan.x_max)
        H = build_hamiltonian(b, d, plan.x_max)
        self.plan = plan
        self.ops = build_ladder_operators(
            H, np.asarray(f.eta(x, p), dtype=float), cc, spectrum=(plan.eigenvalues, plan.eigenvectors),
            eta_step=eta_steps(f, p, x[:-1]), solver=plan.solver,
        )
        self.x = x


def _ladder(pt):
    if "_ladder" not in pt.__dict__:
        try:
            pt.__dict__["_ladder"] = _Ladder(pt)
        except Exception as exc:  # noqa: BLE001 - cached and re-raised for each check
            pt.__dict__["_ladder"] = exc
    value = pt.__dict__["_ladder"]
    if isinstance(value, Exception):
        raise value
    return value


def _suite_ladder(pt):
    f, p = pt.family, pt.p

    def action():
        pt.need("A", "C")
        lad = _ladder(pt)
        n = np.arange(lad.plan.n_max + 2)
        plus, minus = ladder_action_check(lad.ops, f.A(n, p), f.C(n, p))
        pt.add("ladder_plus", np.nanmax(plus))
        pt.add("ladder_minus", np.nanmax(minus))

    def herm():
        pt.add("ladder_hermiticity", _ladder(pt).ops.hermiticity_defect())

    def structure():
        if not f.finite:
            raise NotApplicable("checked on finite lattices, where the whole P table is available")
        pt.need("A", "C")
        lad = _ladder(pt)
        n = np.arange(p.N + 2)
        P, Pe = _reference_P(f, p, np.arange(p.N + 1), lad.x)
        phi0 = np.sqrt(phi0sq_values(f, p, lad.x))
        m = structure_relation_check(lad.ops, phi0, P, f.A(n, p), f.C(n, p), Pe,
                                     tol=pt.config.tolerance("structure_relation"))
        _masked(pt, "structure_relation", m)

    try:
        action()
    except Exception as exc:  # noqa: BLE001
        for name in ("ladder_plus", "ladder_minus"):
            _record_exception(pt, name, exc)
    pt.run("ladder_hermiticity", herm)
    pt.run("structure_relation", structure)


def _record_exception(pt, check, exc):
    def again():
        raise exc
    pt.run(check, again)


def _suite_heisenberg(pt):
    def heis():
        lad = _ladder(pt)
        pt.add("heisenberg", float(np.max(heisenberg_check(None, None, pt.coeffs, ops=lad.ops))))

    pt.run("heisenberg", heis)


# ----------------------------------------------------------- reconstruction

def _suite_reconstruction(pt):
    f, p = pt.family, pt.p

    def rt():
        pt.coeffs
        pt.need("eta")
        out = roundtrip_catalog(f, p, tol=pt.config.tolerance("roundtrip"))
        pt.__dict__["_roundtrip"] = out
        pt.add("roundtrip", out.deviation, out.coverage, f"route {out.route}, eta {out.eta_class}")
        pt.add("ri0cond", abs(out.ri0cond))
        pt.add("reconstructed_sum", out.sum_deviation)
        if out.q_mismatch is None:
            pt.skip("eta_class_q", "linear or quadratic eta" if out.q_detected is None else "family without q")
        else:
            pt.add("eta_class_q", out.q_mismatch)
        pt.add("positivity", 0.0 if out.positive else 1.0)

    def ident():
        pt.coeffs
        pt.need("eta")
        W = p.N if f.finite else INFINITE_WINDOW
        pt.add("eta_identity", eta_product_identity(pt.coeffs, float(f.eta(1, p)), W))

    try:
        rt()
    except Exception as exc:  # noqa: BLE001
        for name in ("roundtrip", "ri0cond", "reconstructed_sum", "eta_class_q", "positivity"):
            _record_exception(pt, name, exc)
    pt.run("eta_identity", ident)


_RUNNERS = {
    "factorization": _suite_factorization,
    "spectrum": _suite_spectrum,
    "duality": _suite_duality,
    "orthogonality": _suite_orthogonality,
    "completeness": _suite_completeness,
    "closure": _suite_closure,
    "dual_closure": _suite_dual_closure,
    "shape": _suite_shape,
    "ladder": _suite_ladder,
    "heisenberg": _suite_heisenberg,
    "rodrigues": _suite_rodrigues,
    "reconstruction": _suite_reconstruction,
}


def checks_in(suite):
    return [name for name, (s, _, _) in CHECKS.items() if s == suite]


def run_point(family, values, config):
    """Records for one parameter point (sorted)."""
    try:
        pt = _Point(family, values, config)
    except ParameterError as exc:
        key = tuple(sorted((k, float(v)) for k, v in values.items()))
        return [CheckRecord(family.id, key, s, c, float("nan"), config.tolerance(c), CHECKS[c][2], "error",
                            None, str(exc)) for s in config.suites for c in checks_in(s)]
    with np.errstate(all="ignore"):
        for suite in config.suites:
            _RUNNERS[suite](pt)
    return sorted(pt.records, key=CheckRecord.sort_key)


def run_suite(config=None):
    """Execute every requested check at every grid point; never raises for check failures."""
    config = SuiteConfig() if config is None else config
    start = time.perf_counter()
    records = []
    for fid in config.families:
        family = config.custom.get(fid) or get_family(fid)
        for values in config.grid[fid]:
            records.extend(run_point(family, values, config))
    records.sort(key=CheckRecord.sort_key)
    meta = {"families": list(config.families), "suites": list(config.suites), "rtol": config.rtol,
            "atol": config.atol, "tolerances": dict(config.tolerances),
            "perturb_closure": config.perturb_closure}
    return SuiteReport(records, meta, time.perf_counter() - start)
