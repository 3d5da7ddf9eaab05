"""Recover ``eta(x)``, ``B(x) + D(x)`` and ``B``, ``D`` from closure data.

Input is a set of closure coefficients plus the boundary data ``eta(1)``
and ``B(0)``.  ``eta`` obeys a constant-coefficient three-term recurrence
whose characteristic roots fix one of five shapes; ``B + D`` is a ratio of
two quadratics in ``eta``; ``B`` and ``D`` separately come from either the
simple numerator forms ``B~``/``D~`` (valid when ``ri0cond`` holds) or the
general route through the dual closure roots.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .families import get_family
from .families.base import ClosureCoefficients
from .spectral import alpha_pm

EPS = np.finfo(float).eps
RI0_TOL = 1e-10
#: relative size below which a q-class coefficient counts as absent
CLASS_RTOL = 1e-12
ROUNDTRIP_WINDOW = 20

ETA_CLASSES = ("linear", "quadratic", "q_geometric", "q_inverse_geometric", "q_quadratic")


class UnsupportedRegime(ValueError):
    """Coefficients outside the range the reconstruction handles."""


class DegenerateLattice(ArithmeticError):
    """A denominator vanishes on the lattice."""


@dataclass(frozen=True)
class EtaClass:
    """Shape of ``eta(x)``.

    ``linear``/``quadratic``: ``eta = alpha x + beta x^2``.  q-classes:
    ``eta = alpha + beta q^x + gamma q^-x`` with ``q`` the smaller
    characteristic root.  ``d`` and ``eps_prime`` are the class parameters
    of the factored forms ``eps' x (x + d)`` and ``eps' (q^-x - 1)(1 - d q^x)``.

    For q-classes ``alpha``, ``beta`` and ``gamma`` grow like ``1/r`` as
    ``q -> 1`` and cancel.  The same solution is also available as
    ``eta(1) S(x) + c T(x)`` with ``S(x) = sinh(s x)/sinh(s)``, ``T`` the
    particular solution vanishing at 0 and 1, and ``q = e^-s``; that form
    has no ``1/r`` but cancels like ``q^-x`` once ``eta`` saturates.  Each
    point takes whichever form has the smaller rounding estimate.
    """

    tag: str
    q: float | None
    alpha: float
    beta: float
    gamma: float
    d: float | None = None
    eps_prime: float | None = None
    eta1: float = 0.0
    c: float = 0.0
    s: float = 0.0

    def _class_form(self, x):
        s = self.s
        parts = (self.alpha + 0 * x, self.beta * np.exp(-s * x), self.gamma * np.exp(s * x))
        return sum(parts), sum(np.abs(t) for t in parts)

    def _class_steps(self, x):
        s = self.s
        parts = (self.beta * np.exp(-s * x) * np.expm1(-s), self.gamma * np.exp(s * x) * np.expm1(s))
        return sum(parts), sum(np.abs(t) for t in parts)

    def _sinh_form(self, x):
        s = self.s
        S = np.sinh(s * x) / np.sinh(s)
        T = np.sinh(s * x / 2) * np.sinh(s * (x - 1) / 2) / (2 * np.cosh(s / 2) * np.sinh(s / 2) ** 2)
        return self.eta1 * S + self.c * T, np.abs(self.eta1 * S) + np.abs(self.c * T)

    def _sinh_steps(self, x):
        s = self.s
        S = np.cosh(s * (x + 0.5)) / np.cosh(s / 2)
        T = np.sinh(s * x) / np.sinh(s)
        return self.eta1 * S + self.c * T, np.abs(self.eta1 * S) + np.abs(self.c * T)

    def _pick(self, x, a, b):
        x = np.asarray(x, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            va, ma = a(x)
            vb, mb = b(x)
        use_b = np.isfinite(vb) & ~(mb >= ma)
        return np.where(use_b, vb, va), np.where(use_b, mb, ma)

    def values(self, x):
        x = np.asarray(x, dtype=float)
        if self.q is None:
            return self.alpha * x + self.beta * x * x
        return self._pick(x, self._class_form, self._sinh_form)[0]

    def steps(self, x):
        """``eta(x+1) - eta(x)`` without subtracting nearby values."""
        return self.steps_with_size(x)[0]

    def steps_with_size(self, x):
        """:meth:`steps` and the magnitude of the terms summed for each one."""
        x = np.asarray(x, dtype=float)
        if self.q is None:
            parts = (self.alpha + 0 * x, self.beta * (2 * x + 1))
            return sum(parts), sum(np.abs(t) for t in parts)
        return self._pick(x, self._class_steps, self._sinh_steps)

    def as_dict(self):
        return {k: v for k, v in self.__dict__.items() if k not in ("eta1", "c", "s")}


def characteristic_q(r11):
    """Smaller root of ``t^2 - (2 + r) t + 1``; ``None`` for the double root.

    A root that rounds to 1 is treated as the double root: the q-form is
    then indistinguishable from the quadratic one in double precision.
    """
    if r11 < 0:
        raise UnsupportedRegime(f"r1^(1) = {r11} < 0: the characteristic roots are complex")
    if r11 == 0:
        return None
    q = float(2.0 / ((2 + r11) + np.sqrt(r11 * (r11 + 4))))
    return None if q == 1.0 else q


def classify_eta(coeffs, eta1):
    r = float(coeffs.r1_1)
    c = float(coeffs.rm1_2)
    q = characteristic_q(r)
    if q is None:
        beta = c / 2
        alpha = eta1 - beta
        if beta == 0:
            return EtaClass("linear", None, alpha, 0.0, 0.0, None, float(np.sign(alpha)))
        return EtaClass("quadratic", None, alpha, beta, 0.0, alpha / beta, float(np.sign(beta)))
    # q = e^-s with r = 4 sinh(s/2)^2, so 1/q - q = 2 sinh(s) and 1 - q = -expm1(-s)
    s = float(2 * np.arcsinh(np.sqrt(r) / 2))
    alpha = -c / r
    gamma = (eta1 + alpha * np.expm1(-s)) / (2 * np.sinh(s))
    beta = -alpha - gamma
    size = max(abs(alpha), abs(beta), abs(gamma))
    extra = dict(eta1=float(eta1), c=c, s=s)
    if abs(gamma) <= CLASS_RTOL * size:
        return EtaClass("q_geometric", q, alpha, -alpha, 0.0, None, float(np.sign(alpha)), **extra)
    if abs(beta) <= CLASS_RTOL * size:
        return EtaClass("q_inverse_geometric", q, alpha, 0.0, -alpha, None, float(np.sign(gamma)), **extra)
    return EtaClass("q_quadratic", q, alpha, beta, gamma, beta / gamma, float(np.sign(gamma)), **extra)


def iterate_eta(coeffs, eta1, x_max):
    """``eta(0..x_max)`` by the recurrence itself (a diagnostic; it amplifies rounding like ``q^-x``)."""
    out = np.zeros(x_max + 1)
    if x_max >= 1:
        out[1] = eta1
    for x in range(x_max - 1):
        out[x + 2] = (2 + coeffs.r1_1) * out[x + 1] - out[x] + coeffs.rm1_2
    return out


def solve_eta(coeffs, eta1, x_max):
    """``(eta(-1..x_max+1), EtaClass)``; index 0 of the array is ``x = -1``.

    Values come from the class form, which coincides with the recurrence at
    integer points and does not amplify rounding.
    """
    cls = classify_eta(coeffs, eta1)
    x = np.arange(-1, x_max + 2)
    vals = cls.values(x)
    vals[1] = 0.0
    vals[2] = eta1 if x_max >= 0 else vals[2]
    return vals, cls


def dual_R0(coeffs, eta1, z):
    em1 = coeffs.rm1_2 - eta1
    return coeffs.r1_1 * z * z + 2 * coeffs.rm1_2 * z - eta1 * em1


def dual_Rm1(coeffs, eta1, B0, z):
    em1 = coeffs.rm1_2 - eta1
    return coeffs.r1_0 * z * z + coeffs.rm1_1 * z + eta1 * em1 * B0


def solve_a(coeffs, eta_values, B0, eta1=None, steps=None):
    """``a_x = B(x) + D(x) = -Rm1d(eta) / R0d(eta)``; ``eta_values`` start at ``x = 0``.

    With ``steps = (eta(x+1) - eta(x), eta(x-1) - eta(x))`` the denominator is
    taken as ``-up * down``, the same quantity without the cancellation that
    hits ``R0d`` where ``eta`` saturates.  ``a_0`` is ``B0`` by definition.
    """
    eta = np.asarray(eta_values, dtype=float)
    if eta1 is None:
        eta1 = float(eta[1])
    if steps is None:
        den = dual_R0(coeffs, eta1, eta)
        scale = np.abs(coeffs.r1_1) * eta * eta + np.abs(2 * coeffs.rm1_2 * eta) + abs(eta1 * (coeffs.rm1_2 - eta1))
        zero = np.abs(den) <= 8 * EPS * scale
    else:
        up, down = steps
        den = -up * down
        zero = den == 0
    zero[0] = False
    if np.any(zero):
        raise DegenerateLattice(f"R0 of the dual closure vanishes at x={int(np.flatnonzero(zero)[0])}")
    with np.errstate(divide="ignore", invalid="ignore"):
        a = -dual_Rm1(coeffs, eta1, B0, eta) / den
    a[0] = B0
    return a


def a_error(coeffs, eta_values, B0, eta1, steps):
    """Rounding estimate for :func:`solve_a` from the size of the numerator terms."""
    eta = np.asarray(eta_values, dtype=float)
    up, down = steps
    terms = np.abs(coeffs.r1_0) * eta * eta + np.abs(coeffs.rm1_1 * eta) + abs(eta1 * (coeffs.rm1_2 - eta1) * B0)
    with np.errstate(divide="ignore", invalid="ignore"):
        err = 8 * EPS * terms / np.abs(up * down)
    err[0] = 0.0
    return err


def verify_ri0cond(coeffs, eta1, B0):
    """``r0^(0)/B0^2 + (r1^(0)/B0) u - u^2`` with ``u = r-1^(0)/(eta(1) B0^2)``."""
    u = coeffs.rm1_0 / (eta1 * B0 * B0)
    return float(coeffs.r0_0 / (B0 * B0) + coeffs.r1_0 / B0 * u - u * u)


@dataclass
class ReconstructionState:
    coeffs: ClosureCoefficients
    eta1: float
    eta_minus1: float
    B0: float
    x_max: int
    eta_class: EtaClass
    eta_values: np.ndarray
    a_values: np.ndarray
    a_error: np.ndarray
    ri0cond: float
    B_tilde: np.ndarray | None = None
    D_tilde: np.ndarray | None = None
    B_values: np.ndarray | None = None
    D_values: np.ndarray | None = None
    B_error: np.ndarray | None = None
    D_error: np.ndarray | None = None
    route: str = ""
    extras: dict = field(default_factory=dict)

    def as_dict(self):
        return dict(
            coefficients=self.coeffs.as_dict(), eta1=self.eta1, eta_minus1=self.eta_minus1, B0=self.B0,
            eta_class=self.eta_class.as_dict(), ri0cond=self.ri0cond, route=self.route,
            x=list(range(self.x_max + 1)), eta=self.eta_values, a=self.a_values,
            B_tilde=self.B_tilde, D_tilde=self.D_tilde, B=self.B_values, D=self.D_values,
            B_error=self.B_error, D_error=self.D_error, **self.extras,
        )


def _steps(cls, x_max):
    x = np.arange(x_max + 1)
    return cls.steps(x), -cls.steps(x - 1)


def prepare(coeffs, eta1, B0, x_max):
    """Solve for ``eta`` and ``a`` on ``0..x_max`` and evaluate ``ri0cond``."""
    eta_ext, cls = solve_eta(coeffs, eta1, x_max)
    eta = eta_ext[1:-1]
    steps = _steps(cls, x_max)
    a = solve_a(coeffs, eta, B0, eta1, steps)
    return ReconstructionState(
        coeffs, float(eta1), float(coeffs.rm1_2 - eta1), float(B0), int(x_max), cls, eta, a,
        a_error(coeffs, eta, B0, eta1, steps), verify_ri0cond(coeffs, eta1, B0),
    )


def _simple(state):
    c, e1, B0 = state.coeffs, state.eta1, state.B0
    em1 = state.eta_minus1
    eta = state.eta_values
    up, down = _steps(state.eta_class, state.x_max)
    k = c.rm1_0 / (e1 * B0)

    def numerator(step):
        parts = (-c.r1_0 * eta * (eta + step), k * eta * step, -c.rm1_1 * eta, e1 * B0 * step, -e1 * B0 * em1)
        return sum(parts), sum(np.abs(t) for t in parts)

    (Bt, Bs), (Dt, Ds) = numerator(up), numerator(down)
    return Bt, Dt, Bs, Ds, up * (up - down), down * (down - up)


def _general(state):
    c, e1, B0 = state.coeffs, state.eta1, state.B0
    eta = state.eta_values
    up, down = _steps(state.eta_class, state.x_max)
    E1 = float(alpha_pm(c, 0.0)[0])
    A0 = c.rm1_0 / c.r0_0 if c.r0_0 != 0 else -B0 * e1 / E1
    Rm = dual_Rm1(c, e1, B0, eta)
    Rs = np.abs(c.r1_0) * eta * eta + np.abs(c.rm1_1 * eta) + abs(e1 * state.eta_minus1 * B0)
    Bt = -(Rm + E1 * (eta + A0) * up)
    Dt = -(Rm + E1 * (eta + A0) * down)
    Bs = Rs + np.abs(E1 * (eta + A0) * up)
    Ds = Rs + np.abs(E1 * (eta + A0) * down)
    state.extras.update(E1=E1, A0=A0)
    return Bt, Dt, Bs, Ds, up * (up - down), down * (down - up)


def reconstruct_BD(state, route="auto"):
    """Fill in ``B`` and ``D``; returns ``(B, D)``.

    ``route="auto"`` takes the simple forms when ``|ri0cond| <= 1e-10`` and
    the general forms otherwise.  Rounding estimates land in
    ``state.B_error`` and ``state.D_error``.
    """
    if route == "auto":
        route = "simple" if abs(state.ri0cond) <= RI0_TOL else "general"
    if route == "simple":
        if abs(state.ri0cond) > RI0_TOL:
            raise UnsupportedRegime(f"ri0cond = {state.ri0cond:.3e} violates the simple-route gate")
        Bt, Dt, Bs, Ds, Bden, Dden = _simple(state)
    elif route == "general":
        Bt, Dt, Bs, Ds, Bden, Dden = _general(state)
    else:
        raise ValueError(f"unknown route {route!r}")
    # D(0) has a vanishing denominator whenever eta(-1) = 0 and is zero by definition
    if np.any(Bden == 0) or np.any(Dden[1:] == 0):
        raise DegenerateLattice("coincident lattice points: eta(x+1) = eta(x-1)")
    with np.errstate(divide="ignore", invalid="ignore"):
        B = Bt / Bden
        D = Dt / Dden
        Berr = 8 * EPS * Bs / np.abs(Bden)
        Derr = 8 * EPS * Ds / np.abs(Dden)
    D[0], Derr[0] = 0.0, 0.0
    state.B_tilde, state.D_tilde, state.B_values, state.D_values = Bt, Dt, B, D
    state.B_error, state.D_error, state.route = Berr, Derr, route
    return B, D


def positivity(state, finite_N=None):
    """True when ``B > 0`` below the top of the lattice and ``D > 0`` above ``x = 0``.

    Points whose rounding estimate exceeds the value itself are skipped.
    """
    B, D = state.B_values, state.D_values
    top = len(B) if finite_N is None else min(finite_N, len(B))
    okB = (B[:top] > 0) | (state.B_error[:top] >= np.abs(B[:top]))
    okD = (D[1:] > 0) | (state.D_error[1:] >= np.abs(D[1:]))
    return bool(np.all(okB) and np.all(okD))


def reconstruct(coeffs, eta1, B0, x_max, route="auto"):
    state = prepare(coeffs, eta1, B0, x_max)
    reconstruct_BD(state, route)
    return state


@dataclass(frozen=True)
class RoundTrip:
    family: str
    params: dict
    route: str
    deviation: float
    coverage: float
    a_deviation: float
    eta_deviation: float
    ri0cond: float
    eta_class: str
    q_detected: float | None
    q_mismatch: float | None
    positive: bool
    general_deviation: float | None
    sum_deviation: float
    anchor_deviation: float

    def as_dict(self):
        return dict(self.__dict__)


def _masked_relative(got, want, scale, err, tol):
    keep = err <= 0.1 * tol * scale
    if not np.any(keep):
        return float("nan"), keep
    return float(np.max(np.abs(got - want)[keep] / scale[keep])), keep


def _compare_BD(state, B, D, scale, tol):
    dB, kB = _masked_relative(state.B_values, B, scale, state.B_error, tol)
    dD, kD = _masked_relative(state.D_values, D, scale, state.D_error, tol)
    return max(dB, dD), float(np.mean(kB & kD))


def roundtrip_catalog(family, p, window=ROUNDTRIP_WINDOW, route="auto", tol=1e-9):
    """Rebuild ``B``, ``D`` from the family's closure data and compare with the catalog.

    Deviations are relative to ``B(x) + D(x)`` at each point and use only
    points whose rounding estimate is below ``0.1 tol`` of that scale;
    ``coverage`` is the fraction kept.  The general route is always run as
    well and its deviation reported separately.
    """
    family = get_family(family)
    coeffs = family.closure(p)
    if coeffs is None:
        raise UnsupportedRegime(f"{family.id}: no closure coefficients")
    x_max = p.N if family.finite else int(window)
    eta1 = float(family.eta(1, p))
    B0 = float(family.B(0, p))
    state = reconstruct(coeffs, eta1, B0, x_max, route)
    x = np.arange(x_max + 1)
    B = np.asarray(family.B(x, p), dtype=float)
    D = np.asarray(family.D(x, p), dtype=float)
    scale = np.abs(B) + np.abs(D)
    dev, coverage = _compare_BD(state, B, D, scale, tol)
    a_dev, _ = _masked_relative(state.a_values, B + D, scale, state.a_error, tol)
    eta_cat = np.asarray(family.eta(x, p), dtype=float)
    eta_dev = float(np.max(np.abs(state.eta_values - eta_cat) / np.maximum(np.abs(eta_cat), abs(eta1))))
    sum_dev, _ = _masked_relative(
        state.B_values + state.D_values, state.a_values, scale,
        state.B_error + state.D_error + state.a_error, tol,
    )
    anchor = eta1 * (eta1 - state.eta_minus1) * B0
    anchor_dev = abs(state.B_tilde[0] - anchor) / abs(anchor)
    try:
        general = prepare(coeffs, eta1, B0, x_max)
        reconstruct_BD(general, "general")
        gdev = _compare_BD(general, B, D, scale, tol)[0]
    except (ArithmeticError, ValueError):
        gdev = None
    q_cat = getattr(p, "q", None)
    qd = state.eta_class.q
    mismatch = None if (qd is None or q_cat is None) else abs(qd - q_cat)
    return RoundTrip(
        family.id, family.user_values(p), state.route, dev, coverage, a_dev, eta_dev, state.ri0cond,
        state.eta_class.tag, qd, mismatch, positivity(state, p.N if family.finite else None), gdev,
        sum_dev, float(anchor_dev),
    )


def eta_product_identity(coeffs, eta1, x_max):
    """``(eta(x+1) - eta)(eta(x-1) - eta) + R0d(eta)`` relative to its term sizes, largest over the lattice."""
    _, cls = solve_eta(coeffs, eta1, x_max)
    x = np.arange(x_max + 1)
    eta = cls.values(x)
    eta[0] = 0.0
    up, up_size = cls.steps_with_size(x)
    down, down_size = cls.steps_with_size(x - 1)
    down = -down
    R0d = dual_R0(coeffs, eta1, eta)
    # the step rounding enters through the operands that produced each step
    scale = (np.abs(up) * down_size + np.abs(down) * up_size + np.abs(coeffs.r1_1) * eta * eta
             + np.abs(2 * coeffs.rm1_2 * eta) + abs(eta1 * (coeffs.rm1_2 - eta1)))
    with np.errstate(invalid="ignore", divide="ignore"):
        rel = np.where(scale > 0, np.abs(up * down + R0d) / scale, 0.0)
    return float(rel.max())
