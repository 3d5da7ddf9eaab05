"""Closed-form data for every cataloged family.

Each ``_make_*`` function returns a :class:`Family`.  Lattice functions take
an index array and a validated :class:`Params`.  Closure functions return
``(offset, R1, R0, Rm1)`` with ascending coefficient lists in the shifted
argument ``z' = z + offset``.
"""
from __future__ import annotations

import numpy as np

from ..special import hyp, q_pochhammer_inf
from .base import Family, ParameterError, ParameterRange, conditions
from .logsign import LogSign as LS, binomial, q_binomial


def _f(x):
    return np.asarray(x, dtype=float)


def _i(x):
    return np.rint(np.asarray(x, dtype=float)).astype(np.int64)


def _stop(n, x):
    return np.minimum(_i(n), _i(x))


def _k(q):
    return (q**-0.5 - q**0.5) ** 2


def _single(*pairs):
    return (ParameterRange(conditions(*pairs)),)


# ---------------------------------------------------------------------------
# finite, non-q
# ---------------------------------------------------------------------------

def _racah_derive(v):
    N = v["N"]
    if "c" in v and v["c"] != -N:
        raise ParameterError("racah: c=-N violated")
    c = float(-N)
    return {"c": c, "dt": v["a"] + v["b"] + c - v["d"] - 1}


def _make_racah():
    def B(x, p):
        x = _f(x)
        return -p.eps * (x + p.a) * (x + p.b) * (x + p.c) * (x + p.d) / ((2 * x + p.d) * (2 * x + 1 + p.d))

    def D(x, p):
        x = _f(x)
        return -p.eps * (x + p.d - p.a) * (x + p.d - p.b) * (x + p.d - p.c) * x / ((2 * x - 1 + p.d) * (2 * x + p.d))

    def E(n, p):
        n = _f(n)
        return p.eps * n * (n + p.dt)

    def eta(x, p):
        x = _f(x)
        return p.epsp * x * (x + p.d)

    def P(n, x, p):
        n, x = _f(n), _f(x)
        return hyp([-n, n + p.dt, -x, x + p.d], [p.a, p.b, p.c], 1.0, stop=_stop(n, x))

    def phi0sq(x, p):
        x = _i(x)
        a, b, c, d = p.a, p.b, p.c, p.d
        num = LS.poch(a, x) * LS.poch(b, x) * LS.poch(c, x) * LS.poch(d, x)
        den = LS.poch(1 + d - a, x) * LS.poch(1 + d - b, x) * LS.poch(1 + d - c, x) * LS.poch(1, x)
        return (num / den * ((2 * x + d) / d)).value()

    def dnsq(n, p):
        n = _i(n)
        a, b, c, d, dt, N = p.a, p.b, p.c, p.d, p.dt, p.N
        num = LS.poch(a, n) * LS.poch(b, n) * LS.poch(c, n) * LS.poch(dt, n)
        den = LS.poch(1 + dt - a, n) * LS.poch(1 + dt - b, n) * LS.poch(1 + dt - c, n) * LS.poch(1, n)
        d0 = (
            LS.of((-1.0) ** N)
            * LS.poch(1 + d - a, N) * LS.poch(1 + d - b, N) * LS.poch(1 + d - c, N)
            / (LS.poch(dt + 1, N) * LS.poch(d + 1, 2 * N))
        )
        return (num / den * ((2 * n + dt) / dt) * d0).value()

    def A(n, p):
        n = _f(n)
        return p.epsp * (n + p.a) * (n + p.b) * (n + p.c) * (n + p.dt) / ((2 * n + p.dt) * (2 * n + 1 + p.dt))

    def C(n, p):
        n = _f(n)
        dt = p.dt
        return p.epsp * (n + dt - p.a) * (n + dt - p.b) * (n + dt - p.c) * n / ((2 * n - 1 + dt) * (2 * n + dt))

    def closure(p):
        a, b, c, d, dt, e, ep = p.a, p.b, p.c, p.d, p.dt, p.eps, p.epsp
        return (
            0.0,
            [2 * e],
            [dt * dt - 1, 4 * e],
            [ep * a * b * c * (dt - 1), e * ep * (2 * (a * b + b * c + c * a) - (1 + d) * (1 + dt)), 2 * ep],
        )

    def phi(x, p):
        return (2 * _f(x) + p.d + 1) / (p.d + 1)

    N = lambda p: p.N  # noqa: E731
    ranges = (
        ParameterRange(conditions(
            ("d>0", lambda p: p.d > 0),
            ("a>N+d", lambda p: p.a > N(p) + p.d),
            ("0<b<1+d", lambda p: 0 < p.b < 1 + p.d),
        ), (1, 1)),
        ParameterRange(conditions(
            ("d<-2N", lambda p: p.d < -2 * N(p)),
            ("a>0", lambda p: p.a > 0),
            ("N+d<b<1-N", lambda p: N(p) + p.d < p.b < 1 - N(p)),
        ), (1, -1)),
        ParameterRange(conditions(
            ("d>0", lambda p: p.d > 0),
            ("0<a<1+d", lambda p: 0 < p.a < 1 + p.d),
            ("b<1-N", lambda p: p.b < 1 - N(p)),
        ), (-1, 1)),
        ParameterRange(conditions(
            ("d<-2N", lambda p: p.d < -2 * N(p)),
            ("N+d<a<1-N", lambda p: N(p) + p.d < p.a < 1 - N(p)),
            ("b<1+d", lambda p: p.b < 1 + p.d),
        ), (-1, -1)),
    )
    return Family(
        id="racah", name="Racah", finite=True, q_type=False,
        param_names=("a", "b", "d", "N"), optional_params=("c",), ranges=ranges,
        B=B, D=D, E=E, eta=eta, P=P, phi0sq=phi0sq, dnsq=dnsq, A=A, C=C, phi=phi,
        closure_shifted=closure, shift={"a": 1, "b": 1, "d": 1, "N": -1},
        kappa=lambda p: 1.0, derive=_racah_derive, partner="self",
        standard_name="Racah R_n(lambda; alpha=a-1, beta=dt-a, gamma=c-1, delta=d-c)",
        notes="c=-N is implied; self-dual with (d, eps) <-> (dt, epsp)",
    )


def _hahn_ranges():
    return (
        ParameterRange(conditions(("a>0", lambda p: p.a > 0), ("b>0", lambda p: p.b > 0)), (1, 1)),
        ParameterRange(conditions(
            ("a<1-N", lambda p: p.a < 1 - p.N), ("b<1-N", lambda p: p.b < 1 - p.N)
        ), (-1, 1)),
    )


def _make_hahn():
    def B(x, p):
        x = _f(x)
        return p.eps * (x + p.a) * (p.N - x)

    def D(x, p):
        x = _f(x)
        return p.eps * x * (p.b + p.N - x)

    def E(n, p):
        n = _f(n)
        return p.eps * n * (n + p.a + p.b - 1)

    def P(n, x, p):
        n, x = _f(n), _f(x)
        return hyp([-n, n + p.a + p.b - 1, -x], [p.a, -float(p.N)], 1.0, stop=_stop(n, x))

    def phi0sq(x, p):
        x = _i(x)
        return (binomial(p.N, x) * LS.poch(p.a, x) * LS.poch(p.b, p.N - x) / LS.poch(p.b, p.N)).value()

    def dnsq(n, p):
        n = _i(n)
        a, b, N = p.a, p.b, p.N
        r = (
            binomial(N, n) * LS.poch(a, n) * LS.of(2 * n + a + b - 1) * LS.poch(a + b, N)
            / (LS.poch(b, n) * LS.poch(n + a + b - 1, N + 1))
        )
        return (r * LS.poch(b, N) / LS.poch(a + b, N)).value()

    def A(n, p):
        n = _f(n)
        a, b = p.a, p.b
        return -(n + a) * (n + a + b - 1) * (p.N - n) / ((2 * n - 1 + a + b) * (2 * n + a + b))

    def C(n, p):
        n = _f(n)
        a, b = p.a, p.b
        return -n * (n + b - 1) * (n + a + b + p.N - 1) / ((2 * n - 2 + a + b) * (2 * n - 1 + a + b))

    def closure(p):
        a, b, N, e = p.a, p.b, p.N, p.eps
        return (0.0, [2 * e], [(a + b - 2) * (a + b), 4 * e], [-a * (a + b - 2) * N, -e * (2 * N - a + b)])

    return Family(
        id="hahn", name="Hahn", finite=True, q_type=False, param_names=("a", "b", "N"),
        ranges=_hahn_ranges(), B=B, D=D, E=E, eta=lambda x, p: _f(x), P=P,
        phi0sq=phi0sq, dnsq=dnsq, A=A, C=C, phi=lambda x, p: np.ones_like(_f(x)),
        closure_shifted=closure, shift={"a": 1, "b": 1, "N": -1}, kappa=lambda p: 1.0,
        partner="dual_hahn", standard_name="Hahn Q_n(x; alpha=a-1, beta=b-1, N)",
    )


def _make_dual_hahn():
    def B(x, p):
        x = _f(x)
        a, b = p.a, p.b
        return (x + a) * (x + a + b - 1) * (p.N - x) / ((2 * x - 1 + a + b) * (2 * x + a + b))

    def D(x, p):
        x = _f(x)
        a, b = p.a, p.b
        return x * (x + b - 1) * (x + a + b + p.N - 1) / ((2 * x - 2 + a + b) * (2 * x - 1 + a + b))

    def eta(x, p):
        x = _f(x)
        return p.eps * x * (x + p.a + p.b - 1)

    def P(n, x, p):
        n, x = _f(n), _f(x)
        return hyp([-n, x + p.a + p.b - 1, -x], [p.a, -float(p.N)], 1.0, stop=_stop(n, x))

    def phi0sq(x, p):
        x = _i(x)
        a, b, N = p.a, p.b, p.N
        return (
            binomial(N, x) * LS.poch(a, x) * LS.of(2 * x + a + b - 1) * LS.poch(a + b, N)
            / (LS.poch(b, x) * LS.poch(x + a + b - 1, N + 1))
        ).value()

    def dnsq(n, p):
        n = _i(n)
        a, b, N = p.a, p.b, p.N
        return (binomial(N, n) * LS.poch(a, n) * LS.poch(b, N - n) / LS.poch(a + b, N)).value()

    def A(n, p):
        n = _f(n)
        return -p.eps * (n + p.a) * (p.N - n)

    def C(n, p):
        n = _f(n)
        return -p.eps * n * (p.b + p.N - n)

    def closure(p):
        a, b, N, e = p.a, p.b, p.N, p.eps
        return (0.0, [0.0], [1.0], [-e * a * N, -e * (2 * N - a + b), 2 * e])

    return Family(
        id="dual_hahn", name="dual Hahn", finite=True, q_type=False, param_names=("a", "b", "N"),
        ranges=_hahn_ranges(), B=B, D=D, E=lambda n, p: _f(n), eta=eta, P=P,
        phi0sq=phi0sq, dnsq=dnsq, A=A, C=C,
        phi=lambda x, p: (2 * _f(x) + p.a + p.b) / (p.a + p.b),
        closure_shifted=closure, shift={"a": 1, "N": -1}, kappa=lambda p: 1.0,
        partner="hahn", standard_name="dual Hahn R_n(lambda(x); gamma=a-1, delta=b-1, N)",
    )


def _make_krawtchouk():
    def P(n, x, p):
        n, x = _f(n), _f(x)
        return hyp([-n, -x], [-float(p.N)], 1.0 / p.p, stop=_stop(n, x))

    def phi0sq(x, p):
        x = _i(x)
        return (binomial(p.N, x) * LS.of(p.p / (1 - p.p)) ** x).value()

    def dnsq(n, p):
        n = _i(n)
        return (binomial(p.N, n) * LS.of(p.p / (1 - p.p)) ** n * LS.of(1 - p.p) ** p.N).value()

    return Family(
        id="krawtchouk", name="Krawtchouk", finite=True, q_type=False, param_names=("p", "N"),
        ranges=_single(("0<p<1", lambda p: 0 < p.p < 1)),
        B=lambda x, p: p.p * (p.N - _f(x)), D=lambda x, p: (1 - p.p) * _f(x),
        E=lambda n, p: _f(n), eta=lambda x, p: _f(x), P=P, phi0sq=phi0sq, dnsq=dnsq,
        A=lambda n, p: -p.p * (p.N - _f(n)), C=lambda n, p: -(1 - p.p) * _f(n),
        phi=lambda x, p: np.ones_like(_f(x)),
        closure_shifted=lambda p: (0.0, [0.0], [1.0], [-p.p * p.N, 2 * p.p - 1]),
        shift={"N": -1}, kappa=lambda p: 1.0, partner="self",
        standard_name="Krawtchouk K_n(x; p, N)",
    )


# ---------------------------------------------------------------------------
# finite, q
# ---------------------------------------------------------------------------

def _q_racah_derive(v):
    q, N = v["q"], v["N"]
    c = q ** (-N)
    if "c" in v and abs(v["c"] - c) > 1e-12 * c:
        raise ParameterError("q_racah: c=q^-N violated")
    return {"c": c, "dt": v["a"] * v["b"] * c / (v["d"] * q)}


def _make_q_racah():
    def B(x, p):
        x = _f(x)
        q, a, b, d = p.q, p.a, p.b, p.d
        qx = q**x
        return -p.eps * (1 - a * qx) * (1 - b * qx) * (1 - q ** (x - p.N)) * (1 - d * qx) / (
            (1 - d * qx * qx) * (1 - d * qx * qx * q)
        )

    def D(x, p):
        x = _f(x)
        q, a, b, c, d = p.q, p.a, p.b, p.c, p.d
        qx = q**x
        return -p.eps * p.dt * (1 - d * qx / a) * (1 - d * qx / b) * (1 - d * qx / c) * (1 - qx) / (
            (1 - d * qx * qx / q) * (1 - d * qx * qx)
        )

    def E(n, p):
        n = _f(n)
        return p.eps * (p.q**-n - 1) * (1 - p.dt * p.q**n)

    def eta(x, p):
        x = _f(x)
        return p.epsp * (p.q**-x - 1) * (1 - p.d * p.q**x)

    def P(n, x, p):
        n, x = _f(n), _f(x)
        q = p.q
        return hyp([q**-n, p.dt * q**n, q**-x, p.d * q**x], [p.a, p.b, p.c], q, q=q, stop=_stop(n, x))

    def phi0sq(x, p):
        x = _i(x)
        q, a, b, c, d, dt = p.q, p.a, p.b, p.c, p.d, p.dt
        num = LS.qpoch(a, q, x) * LS.qpoch(b, q, x) * LS.qpoch(c, q, x) * LS.qpoch(d, q, x)
        den = (
            LS.qpoch(d * q / a, q, x) * LS.qpoch(d * q / b, q, x) * LS.qpoch(d * q / c, q, x)
            * LS.qpoch(q, q, x) * LS.of(dt) ** x
        )
        return (num / den * ((1 - d * q ** (2.0 * x)) / (1 - d))).value()

    def dnsq(n, p):
        n = _i(n)
        q, a, b, c, d, dt, N = p.q, p.a, p.b, p.c, p.d, p.dt, p.N
        num = LS.qpoch(a, q, n) * LS.qpoch(b, q, n) * LS.qpoch(c, q, n) * LS.qpoch(dt, q, n)
        den = (
            LS.qpoch(dt * q / a, q, n) * LS.qpoch(dt * q / b, q, n) * LS.qpoch(dt * q / c, q, n)
            * LS.qpoch(q, q, n) * LS.of(d) ** n
        )
        d0 = (
            LS.of((-1.0) ** N)
            * LS.qpoch(d * q / a, q, N) * LS.qpoch(d * q / b, q, N) * LS.qpoch(d * q / c, q, N)
            * LS.of(dt) ** N * LS.exp(N * (N + 1) / 2 * np.log(q))
            / (LS.qpoch(dt * q, q, N) * LS.qpoch(d * q, q, 2 * N))
        )
        return (num / den * ((1 - dt * q ** (2.0 * n)) / (1 - dt)) * d0).value()

    def A(n, p):
        n = _f(n)
        q, a, b, dt = p.q, p.a, p.b, p.dt
        qn = q**n
        return p.epsp * (1 - a * qn) * (1 - b * qn) * (1 - q ** (n - p.N)) * (1 - dt * qn) / (
            (1 - dt * qn * qn) * (1 - dt * qn * qn * q)
        )

    def C(n, p):
        n = _f(n)
        q, a, b, c, d, dt = p.q, p.a, p.b, p.c, p.d, p.dt
        qn = q**n
        return p.epsp * d * (1 - dt * qn / a) * (1 - dt * qn / b) * (1 - dt * qn / c) * (1 - qn) / (
            (1 - dt * qn * qn / q) * (1 - dt * qn * qn)
        )

    def closure(p):
        q, a, b, c, d, dt, e, ep = p.q, p.a, p.b, p.c, p.d, p.dt, p.eps, p.epsp
        k = _k(q)
        s2 = a * b + b * c + c * a
        const = ep * ((1 - a) * (1 - b) * (1 - c) * (1 - dt / q) + (a + b + c - 1 - d * dt + s2 / q) * (1 + dt))
        return (
            e * (1 + dt),
            [0.0, k],
            [-k * (q**-0.5 + q**0.5) ** 2 * dt, 0.0, k],
            [k * const, -k * e * ep * (a + b + c + d + dt + s2 / q), k * ep * (1 + d)],
        )

    def phi(x, p):
        x = _f(x)
        q, d = p.q, p.d
        return (q**-x - d * q ** (x + 1)) / (1 - d * q)

    def rng(label, fn):
        return (label, fn)

    qN = lambda p: p.q**p.N  # noqa: E731
    ranges = (
        ParameterRange(conditions(
            rng("0<d<1", lambda p: 0 < p.d < 1),
            rng("0<a<q^N d", lambda p: 0 < p.a < qN(p) * p.d),
            rng("qd<b<1", lambda p: p.q * p.d < p.b < 1),
            rng("a<=b", lambda p: p.a <= p.b),
        ), (1, 1)),
        ParameterRange(conditions(
            rng("d>q^-2N", lambda p: p.d > qN(p) ** -2),
            rng("0<a<1", lambda p: 0 < p.a < 1),
            rng("q^(1-N)<b<q^N d", lambda p: p.q / qN(p) < p.b < qN(p) * p.d),
            rng("a<=b", lambda p: p.a <= p.b),
        ), (1, -1)),
        ParameterRange(conditions(
            rng("0<d<1", lambda p: 0 < p.d < 1),
            rng("qd<a<1", lambda p: p.q * p.d < p.a < 1),
            rng("b>q^(1-N)", lambda p: p.b > p.q / qN(p)),
            rng("a<=b", lambda p: p.a <= p.b),
        ), (-1, 1)),
        ParameterRange(conditions(
            rng("d>q^-2N", lambda p: p.d > qN(p) ** -2),
            rng("q^(1-N)<a<q^N d", lambda p: p.q / qN(p) < p.a < qN(p) * p.d),
            rng("b>qd", lambda p: p.b > p.q * p.d),
            rng("a<=b", lambda p: p.a <= p.b),
        ), (-1, -1)),
    )
    return Family(
        id="q_racah", name="q-Racah", finite=True, q_type=True,
        param_names=("a", "b", "d", "N", "q"), optional_params=("c",), ranges=ranges,
        B=B, D=D, E=E, eta=eta, P=P, phi0sq=phi0sq, dnsq=dnsq, A=A, C=C, phi=phi,
        closure_shifted=closure, shift={"a": 1, "b": 1, "d": 1, "N": -1},
        kappa=lambda p: 1.0 / p.q, derive=_q_racah_derive, partner="self",
        standard_name="q-Racah", notes="c=q^-N is implied; negative a, b, d are not supported",
    )


def _q_hahn_ranges():
    return (
        ParameterRange(conditions(("0<a<1", lambda p: 0 < p.a < 1), ("0<b<1", lambda p: 0 < p.b < 1)), (1, 1)),
        ParameterRange(conditions(
            ("a>q^(1-N)", lambda p: p.a > p.q ** (1 - p.N)), ("b>q^(1-N)", lambda p: p.b > p.q ** (1 - p.N))
        ), (-1, 1)),
    )


def _make_q_hahn():
    def B(x, p):
        x = _f(x)
        q = p.q
        return p.eps * (1 - p.a * q**x) * (q ** (x - p.N) - 1)

    def D(x, p):
        x = _f(x)
        q = p.q
        return p.eps * p.a / q * (1 - q**x) * (q ** (x - p.N) - p.b)

    def E(n, p):
        n = _f(n)
        q = p.q
        return p.eps * (q**-n - 1) * (1 - p.a * p.b * q ** (n - 1))

    def P(n, x, p):
        n, x = _f(n), _f(x)
        q = p.q
        return hyp([q**-n, p.a * p.b * q ** (n - 1), q**-x], [p.a, q ** -float(p.N)], q, q=q, stop=_stop(n, x))

    def phi0sq(x, p):
        x = _i(x)
        q, a, b, N = p.q, p.a, p.b, p.N
        return (
            q_binomial(N, x, q) * LS.qpoch(a, q, x) * LS.qpoch(b, q, N - x)
            / (LS.qpoch(b, q, N) * LS.of(a) ** x)
        ).value()

    def dnsq(n, p):
        n = _i(n)
        q, a, b, N = p.q, p.a, p.b, p.N
        ab = a * b
        r = (
            q_binomial(N, n, q) * LS.qpoch(a, q, n) * LS.qpoch(ab / q, q, n)
            / (LS.qpoch(ab * q**N, q, n) * LS.qpoch(b, q, n) * LS.of(a) ** n)
            * ((1 - ab * q ** (2.0 * n - 1)) / (1 - ab / q))
        )
        return (r * LS.qpoch(b, q, N) * LS.of(a) ** N / LS.qpoch(ab, q, N)).value()

    def A(n, p):
        n = _f(n)
        q, a, b, N = p.q, p.a, p.b, p.N
        ab = a * b
        return -(q ** (n - N) - 1) * (1 - a * q**n) * (1 - ab * q ** (n - 1)) / (
            (1 - ab * q ** (2 * n - 1)) * (1 - ab * q ** (2 * n))
        )

    def C(n, p):
        n = _f(n)
        q, a, b, N = p.q, p.a, p.b, p.N
        ab = a * b
        return -a * q ** (n - N - 1) * (1 - q**n) * (1 - ab * q ** (n + N - 1)) * (1 - b * q ** (n - 1)) / (
            (1 - ab * q ** (2 * n - 2)) * (1 - ab * q ** (2 * n - 1))
        )

    def closure(p):
        q, a, b, N, e = p.q, p.a, p.b, p.N, p.eps
        k = _k(q)
        return (
            e * (1 + a * b / q),
            [0.0, k],
            [-k * a * b * (1 + 1 / q) ** 2, 0.0, k],
            [
                k * a * (1 + 1 / q) * ((a - 1) * b / q + (1 + b / q) * q**-N),
                -k * e * (a * (1 + b / q) + (1 + a / q) * q**-N),
                k,
            ],
        )

    return Family(
        id="q_hahn", name="q-Hahn", finite=True, q_type=True, param_names=("a", "b", "N", "q"),
        ranges=_q_hahn_ranges(), B=B, D=D, E=E, eta=lambda x, p: p.q ** -_f(x) - 1, P=P,
        phi0sq=phi0sq, dnsq=dnsq, A=A, C=C, phi=lambda x, p: p.q ** -_f(x),
        closure_shifted=closure, shift={"a": 1, "b": 1, "N": -1}, kappa=lambda p: 1.0 / p.q,
        partner="dual_q_hahn", standard_name="q-Hahn",
    )


def _make_dual_q_hahn():
    def B(x, p):
        x = _f(x)
        q, a, b, N = p.q, p.a, p.b, p.N
        ab = a * b
        return (q ** (x - N) - 1) * (1 - a * q**x) * (1 - ab * q ** (x - 1)) / (
            (1 - ab * q ** (2 * x - 1)) * (1 - ab * q ** (2 * x))
        )

    def D(x, p):
        x = _f(x)
        q, a, b, N = p.q, p.a, p.b, p.N
        ab = a * b
        return a * q ** (x - N - 1) * (1 - q**x) * (1 - ab * q ** (x + N - 1)) * (1 - b * q ** (x - 1)) / (
            (1 - ab * q ** (2 * x - 2)) * (1 - ab * q ** (2 * x - 1))
        )

    def eta(x, p):
        x = _f(x)
        q = p.q
        return p.eps * (q**-x - 1) * (1 - p.a * p.b * q ** (x - 1))

    def P(n, x, p):
        n, x = _f(n), _f(x)
        q = p.q
        return hyp([q**-n, p.a * p.b * q ** (x - 1), q**-x], [p.a, q ** -float(p.N)], q, q=q, stop=_stop(n, x))

    def phi0sq(x, p):
        x = _i(x)
        q, a, b, N = p.q, p.a, p.b, p.N
        ab = a * b
        return (
            q_binomial(N, x, q) * LS.qpoch(a, q, x) * LS.qpoch(ab / q, q, x)
            / (LS.qpoch(ab * q**N, q, x) * LS.qpoch(b, q, x) * LS.of(a) ** x)
            * ((1 - ab * q ** (2.0 * x - 1)) / (1 - ab / q))
        ).value()

    def dnsq(n, p):
        n = _i(n)
        q, a, b, N = p.q, p.a, p.b, p.N
        return (
            q_binomial(N, n, q) * LS.qpoch(a, q, n) * LS.qpoch(b, q, N - n) / LS.of(a) ** n
            * LS.of(a) ** N / LS.qpoch(a * b, q, N)
        ).value()

    def A(n, p):
        n = _f(n)
        q = p.q
        return -p.eps * (1 - p.a * q**n) * (q ** (n - p.N) - 1)

    def C(n, p):
        n = _f(n)
        q = p.q
        return -p.eps * p.a / q * (1 - q**n) * (q ** (n - p.N) - p.b)

    def closure(p):
        q, a, b, N, e = p.q, p.a, p.b, p.N, p.eps
        k = _k(q)
        return (
            1.0,
            [0.0, k],
            [0.0, 0.0, k],
            [
                k * e * a * (1 + 1 / q) * q**-N,
                -k * e * (a * (1 + b / q) + (1 + a / q) * q**-N),
                k * e * (1 + a * b / q),
            ],
        )

    def phi(x, p):
        x = _f(x)
        q, ab = p.q, p.a * p.b
        return (q**-x - ab * q**x) / (1 - ab)

    return Family(
        id="dual_q_hahn", name="dual q-Hahn", finite=True, q_type=True, param_names=("a", "b", "N", "q"),
        ranges=_q_hahn_ranges(), B=B, D=D, E=lambda n, p: p.q ** -_f(n) - 1, eta=eta, P=P,
        phi0sq=phi0sq, dnsq=dnsq, A=A, C=C, phi=phi, closure_shifted=closure,
        shift={"a": 1, "N": -1}, kappa=lambda p: 1.0 / p.q, partner="q_hahn",
        standard_name="dual q-Hahn",
    )


def _make_quantum_q_krawtchouk():
    def B(x, p):
        x = _f(x)
        q = p.q
        return q**x / p.p * (q ** (x - p.N) - 1)

    def D(x, p):
        x = _f(x)
        q = p.q
        return (1 - q**x) * (1 - q ** (x - p.N - 1) / p.p)

    def P(n, x, p):
        n, x = _f(n), _f(x)
        q = p.q
        return hyp([q**-n, q**-x], [q ** -float(p.N)], p.p * q ** (n + 1), q=q, stop=_stop(n, x))

    def phi0sq(x, p):
        x = _i(x)
        q, N, pp = p.q, p.N, p.p
        return (
            q_binomial(N, x, q) * LS.of(pp) ** (-x) * LS.exp(x * (x - 1.0 - N) * np.log(q))
            / LS.qpoch(q**-N / pp, q, x)
        ).value()

    def dnsq(n, p):
        n = _i(n)
        q, N, pp = p.q, p.N, p.p
        return (
            q_binomial(N, n, q) * LS.of(pp) ** (-n) * LS.exp(-N * n * np.log(q))
            / LS.qpoch(q ** -_f(n) / pp, q, n) * LS.qpoch(q**-N / pp, q, N)
        ).value()

    def A(n, p):
        n = _f(n)
        q = p.q
        return -(q ** (-n - p.N - 1)) / p.p * (1 - q ** (p.N - n))

    def C(n, p):
        n = _f(n)
        q = p.q
        return -(q**-n - 1) * (1 - q**-n / p.p)

    def closure(p):
        q, N, pp = p.q, p.N, p.p
        k = _k(q)
        return (-1.0, [0.0, k], [0.0, 0.0, k], [k / pp * (1 + 1 / q), k / pp * (1 + pp + q ** (-N - 1)), k])

    return Family(
        id="quantum_q_krawtchouk", name="quantum q-Krawtchouk", finite=True, q_type=True,
        param_names=("p", "N", "q"), ranges=_single(("p>q^-N", lambda p: p.p > p.q**-p.N)),
        B=B, D=D, E=lambda n, p: 1 - p.q ** _f(n), eta=lambda x, p: p.q ** -_f(x) - 1, P=P,
        phi0sq=phi0sq, dnsq=dnsq, A=A, C=C, phi=lambda x, p: p.q ** -_f(x),
        closure_shifted=closure, shift={"p": 1, "N": -1}, kappa=lambda p: p.q,
        partner="dual_quantum_q_krawtchouk", standard_name="quantum q-Krawtchouk",
    )


def _make_q_krawtchouk():
    def P(n, x, p):
        n, x = _f(n), _f(x)
        q = p.q
        return hyp([q**-n, q**-x, -p.p * q**n], [q ** -float(p.N), 0.0], q, q=q, stop=_stop(n, x))

    def phi0sq(x, p):
        x = _i(x)
        q, N = p.q, p.N
        return (q_binomial(N, x, q) * LS.of(p.p) ** (-x) * LS.exp((x * (x - 1) / 2 - x * N) * np.log(q))).value()

    def dnsq(n, p):
        n = _i(n)
        q, N, pp = p.q, p.N, p.p
        r = (
            q_binomial(N, n, q) * LS.qpoch(-pp, q, n)
            / (LS.qpoch(-pp * q ** (N + 1), q, n) * LS.of(pp) ** n * LS.exp(n * (n + 1) / 2 * np.log(q)))
            * ((1 + pp * q ** (2.0 * n)) / (1 + pp))
        )
        return (r * LS.of(pp) ** N * LS.exp(N * (N + 1) / 2 * np.log(q)) / LS.qpoch(-pp * q, q, N)).value()

    def A(n, p):
        n = _f(n)
        q, pp = p.q, p.p
        return -(q ** (n - p.N) - 1) * (1 + pp * q**n) / ((1 + pp * q ** (2 * n)) * (1 + pp * q ** (2 * n + 1)))

    def C(n, p):
        n = _f(n)
        q, pp, N = p.q, p.p, p.N
        return -pp * q ** (2 * n - N - 1) * (1 - q**n) * (1 + pp * q ** (n + N)) / (
            (1 + pp * q ** (2 * n - 1)) * (1 + pp * q ** (2 * n))
        )

    def closure(p):
        q, N, pp = p.q, p.N, p.p
        k = _k(q)
        return (
            1 - pp,
            [0.0, k],
            [k * pp * (q**-0.5 + q**0.5) ** 2, 0.0, k],
            [k * pp * (1 + 1 / q) * (1 - q**-N), k * (pp - q**-N), k],
        )

    return Family(
        id="q_krawtchouk", name="q-Krawtchouk", finite=True, q_type=True, param_names=("p", "N", "q"),
        ranges=_single(("p>0", lambda p: p.p > 0)),
        B=lambda x, p: p.q ** (_f(x) - p.N) - 1, D=lambda x, p: p.p * (1 - p.q ** _f(x)),
        E=lambda n, p: (p.q ** -_f(n) - 1) * (1 + p.p * p.q ** _f(n)),
        eta=lambda x, p: p.q ** -_f(x) - 1, P=P, phi0sq=phi0sq, dnsq=dnsq, A=A, C=C,
        phi=lambda x, p: p.q ** -_f(x), closure_shifted=closure, shift={"p": 2, "N": -1},
        kappa=lambda p: 1.0 / p.q, partner="dual_q_krawtchouk_p", standard_name="q-Krawtchouk",
    )


def _make_dual_q_krawtchouk():
    def B(x, p):
        x = _f(x)
        q, c, N = p.q, p.c, p.N
        return (q ** (x - N) - 1) * (1 - c * q ** (x - N)) / ((1 - c * q ** (2 * x - N)) * (1 - c * q ** (2 * x + 1 - N)))

    def D(x, p):
        x = _f(x)
        q, c, N = p.q, p.c, p.N
        return -c * q ** (2 * x - 2 * N - 1) * (1 - q**x) * (1 - c * q**x) / (
            (1 - c * q ** (2 * x - 1 - N)) * (1 - c * q ** (2 * x - N))
        )

    def P(n, x, p):
        n, x = _f(n), _f(x)
        q = p.q
        return hyp([q**-n, q**-x, p.c * q ** (x - p.N)], [q ** -float(p.N), 0.0], q, q=q, stop=_stop(n, x))

    def phi0sq(x, p):
        x = _i(x)
        q, c, N = p.q, p.c, p.N
        return (
            q_binomial(N, x, q) * LS.qpoch(c * q**-N, q, x) * LS.exp((N * x - x * (x + 1) / 2) * np.log(q))
            / (LS.qpoch(c * q, q, x) * LS.of(-c) ** x)
            * ((1 - c * q ** (2.0 * x - N)) / (1 - c * q**-N))
        ).value()

    def dnsq(n, p):
        n = _i(n)
        q, c, N = p.q, p.c, p.N
        return (
            q_binomial(N, n, q) * LS.of(-c) ** (-n) * LS.exp(n * (n - 1) / 2 * np.log(q)) / LS.qpoch(1 / c, q, N)
        ).value()

    def closure(p):
        q, c, N = p.q, p.c, p.N
        k = _k(q)
        return (1.0, [0.0, k], [0.0, 0.0, k], [0.0, -k * (1 + c) * q**-N, k * (1 + c * q**-N)])

    def phi(x, p):
        x = _f(x)
        q, c, N = p.q, p.c, p.N
        return (q**-x - c * q ** (1 - N) * q**x) / (1 - c * q ** (1 - N))

    return Family(
        id="dual_q_krawtchouk", name="dual q-Krawtchouk", finite=True, q_type=True,
        param_names=("c", "N", "q"), ranges=_single(("c<0", lambda p: p.c < 0)),
        B=B, D=D, E=lambda n, p: p.q ** -_f(n) - 1,
        eta=lambda x, p: (p.q ** -_f(x) - 1) * (1 - p.c * p.q ** (_f(x) - p.N)), P=P,
        phi0sq=phi0sq, dnsq=dnsq,
        A=lambda n, p: -(p.q ** (_f(n) - p.N) - 1), C=lambda n, p: p.c * p.q**-p.N * (1 - p.q ** _f(n)),
        phi=phi, closure_shifted=closure, shift={"N": -1}, kappa=lambda p: 1.0 / p.q,
        partner="q_krawtchouk", standard_name="dual q-Krawtchouk (standard parameter c)",
        notes="standard parametrisation; dual_q_krawtchouk_p is the exact dual of q_krawtchouk",
    )


def _make_affine_q_krawtchouk():
    def P(n, x, p):
        n, x = _f(n), _f(x)
        q = p.q
        return hyp([q**-n, q**-x, 0.0], [p.p * q, q ** -float(p.N)], q, q=q, stop=_stop(n, x))

    def phi0sq(x, p):
        x = _i(x)
        q = p.q
        return (q_binomial(p.N, x, q) * LS.qpoch(p.p * q, q, x) / LS.of(p.p * q) ** x).value()

    def dnsq(n, p):
        n = _i(n)
        q = p.q
        return (
            q_binomial(p.N, n, q) * LS.qpoch(p.p * q, q, n) / LS.of(p.p * q) ** n * LS.of(p.p * q) ** p.N
        ).value()

    def closure(p):
        q, N, pp = p.q, p.N, p.p
        k = _k(q)
        return (1.0, [0.0, k], [0.0, 0.0, k], [k * pp * (1 + q) * q**-N, -k * (pp * q + (1 + pp) * q**-N), k])

    return Family(
        id="affine_q_krawtchouk", name="affine q-Krawtchouk", finite=True, q_type=True,
        param_names=("p", "N", "q"), ranges=_single(("0<p<q^-1", lambda p: 0 < p.p < 1 / p.q)),
        B=lambda x, p: (p.q ** (_f(x) - p.N) - 1) * (1 - p.p * p.q ** (_f(x) + 1)),
        D=lambda x, p: p.p * p.q ** (_f(x) - p.N) * (1 - p.q ** _f(x)),
        E=lambda n, p: p.q ** -_f(n) - 1, eta=lambda x, p: p.q ** -_f(x) - 1, P=P,
        phi0sq=phi0sq, dnsq=dnsq,
        A=lambda n, p: -(p.q ** (_f(n) - p.N) - 1) * (1 - p.p * p.q ** (_f(n) + 1)),
        C=lambda n, p: -p.p * p.q ** (_f(n) - p.N) * (1 - p.q ** _f(n)),
        phi=lambda x, p: p.q ** -_f(x), closure_shifted=closure, shift={"p": 1, "N": -1},
        kappa=lambda p: 1.0 / p.q, partner="self", standard_name="affine q-Krawtchouk",
    )


def _make_alternative_q_hahn():
    def B(x, p):
        x = _f(x)
        q = p.q
        return p.eps * p.a / q * (1 - q ** (p.N - x)) * (q**-x - p.b)

    def D(x, p):
        x = _f(x)
        q = p.q
        return p.eps * (1 - p.a * q ** (p.N - x)) * (q**-x - 1)

    def E(n, p):
        n = _f(n)
        q = p.q
        return p.eps * (q**-n - 1) * (1 - p.a * p.b * q ** (n - 1))

    def P(n, x, p):
        n, x = _f(n), _f(x)
        q = p.q
        return hyp(
            [q**-n, p.a * p.b * q ** (n - 1), q**-x], [p.b, q ** -float(p.N)],
            q ** (x + 1 - p.N) / p.a, q=q, stop=_stop(n, x),
        )

    def phi0sq(x, p):
        x = _i(x)
        q, a, b, N = p.q, p.a, p.b, p.N
        return (
            q_binomial(N, x, q) * LS.of(a) ** x * LS.qpoch(a, q, N - x) * LS.qpoch(b, q, x) / LS.qpoch(a, q, N)
        ).value()

    def dnsq(n, p):
        n = _i(n)
        q, a, b, N = p.q, p.a, p.b, p.N
        ab = a * b
        r = (
            q_binomial(N, n, q) * LS.qpoch(b, q, n) * LS.qpoch(ab / q, q, n) * LS.of(a) ** n
            * LS.exp(n * (n - 1.0) * np.log(q))
            / (LS.qpoch(a, q, n) * LS.qpoch(ab * q**N, q, n))
            * ((1 - ab * q ** (2.0 * n - 1)) / (1 - ab / q))
        )
        return (r * LS.qpoch(a, q, N) / LS.qpoch(ab, q, N)).value()

    def A(n, p):
        n = _f(n)
        q, a, b, N = p.q, p.a, p.b, p.N
        ab = a * b
        return -a * q ** (n + N) * (q ** (n - N) - 1) * (1 - b * q**n) * (1 - ab * q ** (n - 1)) / (
            (1 - ab * q ** (2 * n - 1)) * (1 - ab * q ** (2 * n))
        )

    def C(n, p):
        n = _f(n)
        q, a, b, N = p.q, p.a, p.b, p.N
        ab = a * b
        return -(1 - q**n) * (1 - a * q ** (n - 1)) * (1 - ab * q ** (n + N - 1)) / (
            (1 - ab * q ** (2 * n - 2)) * (1 - ab * q ** (2 * n - 1))
        )

    def closure(p):
        q, a, b, N, e = p.q, p.a, p.b, p.N, p.eps
        k = _k(q)
        return (
            e * (1 + a * b / q),
            [0.0, k],
            [-k * a * b * (1 + 1 / q) ** 2, 0.0, k],
            [
                -k * a * (1 + 1 / q) * (1 - b + b * (1 + a / q) * q**N),
                k * e * (1 + a / q + a * (1 + b / q) * q**N),
                -k,
            ],
        )

    return Family(
        id="alternative_q_hahn", name="alternative q-Hahn", finite=True, q_type=True,
        param_names=("a", "b", "N", "q"), ranges=_q_hahn_ranges(),
        B=B, D=D, E=E, eta=lambda x, p: 1 - p.q ** _f(x), P=P, phi0sq=phi0sq, dnsq=dnsq,
        A=A, C=C, phi=lambda x, p: p.q ** _f(x), closure_shifted=closure,
        shift={"a": 1, "b": 1, "N": -1}, kappa=lambda p: 1.0 / p.q, partner=None,
        standard_name="q-Hahn under x -> N-x", notes="reflection of q_hahn: B(x)=D_qHahn(N-x), D(x)=B_qHahn(N-x)",
    )


def _make_alternative_q_krawtchouk():
    def P(n, x, p):
        n, x = _f(n), _f(x)
        q = p.q
        return hyp(
            [q**-n, -p.p * q**n, q**-x], [q ** -float(p.N)], -(q ** (x - p.N)) / p.p, q=q, stop=_stop(n, x)
        )

    def phi0sq(x, p):
        x = _i(x)
        q = p.q
        return (q_binomial(p.N, x, q) * LS.of(p.p) ** x * LS.exp(x * (x + 1) / 2 * np.log(q))).value()

    def dnsq(n, p):
        n = _i(n)
        q, N, pp = p.q, p.N, p.p
        r = (
            q_binomial(N, n, q) * LS.qpoch(-pp, q, n) * LS.of(pp) ** n
            * LS.exp(n * (3 * n - 1) / 2 * np.log(q)) / LS.qpoch(-pp * q ** (N + 1), q, n)
            * ((1 + pp * q ** (2.0 * n)) / (1 + pp))
        )
        return (r / LS.qpoch(-pp * q, q, N)).value()

    def A(n, p):
        n = _f(n)
        q, pp, N = p.q, p.p, p.N
        return -pp * q ** (2 * n + N + 1) * (q ** (n - N) - 1) * (1 + pp * q**n) / (
            (1 + pp * q ** (2 * n)) * (1 + pp * q ** (2 * n + 1))
        )

    def C(n, p):
        n = _f(n)
        q, pp, N = p.q, p.p, p.N
        return -(1 - q**n) * (1 + pp * q ** (n + N)) / ((1 + pp * q ** (2 * n - 1)) * (1 + pp * q ** (2 * n)))

    def closure(p):
        q, N, pp = p.q, p.N, p.p
        k = _k(q)
        return (
            1 - pp,
            [0.0, k],
            [k * pp * (q**-0.5 + q**0.5) ** 2, 0.0, k],
            [-k * pp * (1 + q) * (1 - q**N), k * (1 - pp * q**N), -k],
        )

    return Family(
        id="alternative_q_krawtchouk", name="alternative q-Krawtchouk", finite=True, q_type=True,
        param_names=("p", "N", "q"), ranges=_single(("p>0", lambda p: p.p > 0)),
        B=lambda x, p: p.p * (1 - p.q ** (p.N - _f(x))), D=lambda x, p: p.q ** -_f(x) - 1,
        E=lambda n, p: (p.q ** -_f(n) - 1) * (1 + p.p * p.q ** _f(n)),
        eta=lambda x, p: 1 - p.q ** _f(x), P=P, phi0sq=phi0sq, dnsq=dnsq, A=A, C=C,
        phi=lambda x, p: p.q ** _f(x), closure_shifted=closure, shift={"p": 2, "N": -1},
        kappa=lambda p: 1.0 / p.q, partner=None, standard_name="q-Krawtchouk under x -> N-x",
    )


def _make_alternative_affine_q_krawtchouk():
    def P(n, x, p):
        n, x = _f(n), _f(x)
        q = p.q
        return hyp([q**-n, q**-x], [p.p * q, q ** -float(p.N)], p.p * q ** (x + n + 1 - p.N), q=q, stop=_stop(n, x))

    def _measure(x, p):
        q, N, pp = p.q, p.N, p.p
        return (
            q_binomial(N, x, q) * LS.qpoch(q**-N / pp, q, N) / LS.qpoch(q**-N / pp, q, N - x)
            * LS.of(pp) ** x * LS.exp(x * (x + 1.0 - N) * np.log(q))
        )

    def closure(p):
        q, N, pp = p.q, p.N, p.p
        k = _k(q)
        return (
            -1.0,
            [0.0, k],
            [0.0, 0.0, k],
            [-k / pp * (1 + 1 / q) * q**N, -k * (1 / (pp * q) + (1 + 1 / pp) * q**N), -k],
        )

    return Family(
        id="alternative_affine_q_krawtchouk", name="alternative affine q-Krawtchouk", finite=True,
        q_type=True, param_names=("p", "N", "q"), ranges=_single(("p>q^-N", lambda p: p.p > p.q**-p.N)),
        B=lambda x, p: (1 - p.q ** (p.N - _f(x))) * (1 - p.q ** (-_f(x) - 1) / p.p),
        D=lambda x, p: p.q ** (p.N - _f(x)) / p.p * (p.q ** -_f(x) - 1),
        E=lambda n, p: 1 - p.q ** _f(n), eta=lambda x, p: 1 - p.q ** _f(x), P=P,
        phi0sq=lambda x, p: _measure(_i(x), p).value(),
        dnsq=lambda n, p: (_measure(_i(n), p) * LS.of(p.p * p.q) ** (-p.N)).value(),
        A=lambda n, p: -(1 - p.q ** (-_f(n) - 1) / p.p) * (1 - p.q ** (p.N - _f(n))),
        C=lambda n, p: -(p.q ** (p.N - _f(n))) / p.p * (p.q ** -_f(n) - 1),
        phi=lambda x, p: p.q ** _f(x), closure_shifted=closure, shift={"p": 1, "N": -1},
        kappa=lambda p: p.q, partner="self", standard_name="quantum q-Krawtchouk under x -> N-x",
    )


# ---------------------------------------------------------------------------
# infinite
# ---------------------------------------------------------------------------

def _make_meixner():
    def P(n, x, p):
        n, x = _f(n), _f(x)
        return hyp([-n, -x], [p.beta], 1 - 1 / p.c, stop=_stop(n, x))

    def phi0sq(x, p):
        x = _i(x)
        return (LS.poch(p.beta, x) * LS.of(p.c) ** x / LS.poch(1, x)).value()

    def dnsq(n, p):
        n = _i(n)
        return (LS.poch(p.beta, n) * LS.of(p.c) ** n / LS.poch(1, n) * LS.of(1 - p.c) ** p.beta).value()

    return Family(
        id="meixner", name="Meixner", finite=False, q_type=False, param_names=("beta", "c"),
        ranges=_single(("beta>0", lambda p: p.beta > 0), ("0<c<1", lambda p: 0 < p.c < 1)),
        B=lambda x, p: p.c * (_f(x) + p.beta) / (1 - p.c), D=lambda x, p: _f(x) / (1 - p.c),
        E=lambda n, p: _f(n), eta=lambda x, p: _f(x), P=P, phi0sq=phi0sq, dnsq=dnsq,
        A=lambda n, p: -p.c * (_f(n) + p.beta) / (1 - p.c), C=lambda n, p: -_f(n) / (1 - p.c),
        phi=lambda x, p: np.ones_like(_f(x)),
        closure_shifted=lambda p: (
            0.0, [0.0], [1.0], [-p.beta * p.c / (1 - p.c), -(1 + p.c) / (1 - p.c)]
        ),
        shift={"beta": 1}, kappa=lambda p: 1.0, partner="self", standard_name="Meixner M_n(x; beta, c)",
    )


def _make_charlier():
    def P(n, x, p):
        n, x = _f(n), _f(x)
        return hyp([-n, -x], [], -1 / p.a, stop=_stop(n, x))

    def phi0sq(x, p):
        x = _i(x)
        return (LS.of(p.a) ** x / LS.poch(1, x)).value()

    def dnsq(n, p):
        n = _i(n)
        return (LS.of(p.a) ** n / LS.poch(1, n) * LS.exp(-p.a)).value()

    return Family(
        id="charlier", name="Charlier", finite=False, q_type=False, param_names=("a",),
        ranges=_single(("a>0", lambda p: p.a > 0)),
        B=lambda x, p: np.full_like(_f(x), p.a), D=lambda x, p: _f(x),
        E=lambda n, p: _f(n), eta=lambda x, p: _f(x), P=P, phi0sq=phi0sq, dnsq=dnsq,
        A=lambda n, p: np.full_like(_f(n), -p.a), C=lambda n, p: -_f(n),
        phi=lambda x, p: np.ones_like(_f(x)),
        closure_shifted=lambda p: (0.0, [0.0], [1.0], [-p.a, -1.0]),
        shift={"a": 0}, kappa=lambda p: 1.0, partner="self", standard_name="Charlier C_n(x; a)",
    )


def _make_little_q_jacobi():
    def P(n, x, p):
        n, x = _f(n), _f(x)
        q, a, b = p.q, p.a, p.b
        ni = _i(n)
        pre = (
            LS.of(-a) ** (-ni) * LS.exp(-n * (n + 1) / 2 * np.log(q))
            * LS.qpoch(a * q, q, ni) / LS.qpoch(b * q, q, ni)
        ).value()
        return pre * hyp([q**-n, a * b * q ** (n + 1)], [a * q], q ** (x + 1), q=q, stop=np.broadcast_to(ni, np.broadcast(n, x).shape))

    def phi0sq(x, p):
        x = _i(x)
        q = p.q
        return (LS.qpoch(p.b * q, q, x) * LS.of(p.a * q) ** x / LS.qpoch(q, q, x)).value()

    def dnsq(n, p):
        n = _i(n)
        q, a, b = p.q, p.a, p.b
        ab = a * b
        r = (
            LS.qpoch(b * q, q, n) * LS.qpoch(ab * q, q, n) * LS.of(a) ** n * LS.exp(n * n * np.log(q))
            / (LS.qpoch(q, q, n) * LS.qpoch(a * q, q, n))
            * ((1 - ab * q ** (2.0 * n + 1)) / (1 - ab * q))
        )
        return (r * (q_pochhammer_inf(a * q, q) / q_pochhammer_inf(ab * q * q, q))).value()

    def A(n, p):
        n = _f(n)
        q, a, b = p.q, p.a, p.b
        ab = a * b
        return -a * q ** (2 * n + 1) * (1 - b * q ** (n + 1)) * (1 - ab * q ** (n + 1)) / (
            (1 - ab * q ** (2 * n + 1)) * (1 - ab * q ** (2 * n + 2))
        )

    def C(n, p):
        n = _f(n)
        q, a, b = p.q, p.a, p.b
        ab = a * b
        return -(1 - q**n) * (1 - a * q**n) / ((1 - ab * q ** (2 * n)) * (1 - ab * q ** (2 * n + 1)))

    def closure(p):
        q, a, b = p.q, p.a, p.b
        k = _k(q)
        return (
            1 + a * b * q,
            [0.0, k],
            [-k * a * b * (1 + q) ** 2, 0.0, k],
            [-k * a * (1 + q) * (1 - b * q), k * (1 + a), -k],
        )

    return Family(
        id="little_q_jacobi", name="little q-Jacobi", finite=False, q_type=True, param_names=("a", "b", "q"),
        ranges=_single(("0<a<q^-1", lambda p: 0 < p.a < 1 / p.q), ("b<q^-1", lambda p: p.b < 1 / p.q)),
        B=lambda x, p: p.a * (p.q ** -_f(x) - p.b * p.q), D=lambda x, p: p.q ** -_f(x) - 1,
        E=lambda n, p: (p.q ** -_f(n) - 1) * (1 - p.a * p.b * p.q ** (_f(n) + 1)),
        eta=lambda x, p: 1 - p.q ** _f(x), P=P, phi0sq=phi0sq, dnsq=dnsq, A=A, C=C,
        phi=lambda x, p: p.q ** _f(x), closure_shifted=closure, shift={"a": 1, "b": 1},
        kappa=lambda p: 1.0 / p.q, partner="dual_little_q_jacobi", standard_name="little q-Jacobi",
    )


def _make_q_meixner():
    def P(n, x, p):
        n, x = _f(n), _f(x)
        q = p.q
        return hyp([q**-n, q**-x], [p.b * q], -(q ** (n + 1)) / p.c, q=q, stop=_stop(n, x))

    def phi0sq(x, p):
        x = _i(x)
        q, b, c = p.q, p.b, p.c
        return (
            LS.qpoch(b * q, q, x) / (LS.qpoch(q, q, x) * LS.qpoch(-b * c * q, q, x))
            * LS.of(c) ** x * LS.exp(x * (x - 1) / 2 * np.log(q))
        ).value()

    def dnsq(n, p):
        n = _i(n)
        q, b, c = p.q, p.b, p.c
        r = LS.qpoch(b * q, q, n) / (LS.qpoch(q, q, n) * LS.qpoch(-q / c, q, n)) * LS.of(q) ** n
        return (r * (q_pochhammer_inf(-b * c * q, q) / q_pochhammer_inf(-c, q))).value()

    def closure(p):
        q, b, c = p.q, p.b, p.c
        k = _k(q)
        return (-1.0, [0.0, k], [0.0, 0.0, k], [-k * c * (1 + 1 / q), k * (1 - c - b * c), k])

    return Family(
        id="q_meixner", name="q-Meixner", finite=False, q_type=True, param_names=("b", "c", "q"),
        ranges=_single(("0<b<q^-1", lambda p: 0 < p.b < 1 / p.q), ("c>0", lambda p: p.c > 0)),
        B=lambda x, p: p.c * p.q ** _f(x) * (1 - p.b * p.q ** (_f(x) + 1)),
        D=lambda x, p: (1 - p.q ** _f(x)) * (1 + p.b * p.c * p.q ** _f(x)),
        E=lambda n, p: 1 - p.q ** _f(n), eta=lambda x, p: p.q ** -_f(x) - 1, P=P,
        phi0sq=phi0sq, dnsq=dnsq,
        A=lambda n, p: -p.c * p.q ** (-_f(n) - 1) * (p.q ** -_f(n) - p.b * p.q),
        C=lambda n, p: -(p.q ** -_f(n) - 1) * (1 + p.c * p.q ** -_f(n)),
        phi=lambda x, p: p.q ** -_f(x), closure_shifted=closure, shift={"b": 1, "c": -1},
        kappa=lambda p: p.q, partner="dual_q_meixner", standard_name="q-Meixner",
    )


def _make_little_q_laguerre():
    def P(n, x, p):
        n, x = _f(n), _f(x)
        q = p.q
        return hyp([q**-n, q**-x], [], q**x / p.a, q=q, stop=_stop(n, x))

    def phi0sq(x, p):
        x = _i(x)
        q = p.q
        return (LS.of(p.a * q) ** x / LS.qpoch(q, q, x)).value()

    def dnsq(n, p):
        n = _i(n)
        q, a = p.q, p.a
        r = LS.of(a) ** n * LS.exp(n * n * np.log(q)) / (LS.qpoch(q, q, n) * LS.qpoch(a * q, q, n))
        return (r * q_pochhammer_inf(a * q, q)).value()

    def closure(p):
        q, a = p.q, p.a
        k = _k(q)
        return (1.0, [0.0, k], [0.0, 0.0, k], [-k * a * (1 + q), k * (1 + a), -k])

    return Family(
        id="little_q_laguerre", name="little q-Laguerre/Wall", finite=False, q_type=True,
        param_names=("a", "q"), ranges=_single(("0<a<q^-1", lambda p: 0 < p.a < 1 / p.q)),
        B=lambda x, p: p.a * p.q ** -_f(x), D=lambda x, p: p.q ** -_f(x) - 1,
        E=lambda n, p: p.q ** -_f(n) - 1, eta=lambda x, p: 1 - p.q ** _f(x), P=P,
        phi0sq=phi0sq, dnsq=dnsq,
        A=lambda n, p: -p.a * p.q ** (2 * _f(n) + 1),
        C=lambda n, p: -(1 - p.q ** _f(n)) * (1 - p.a * p.q ** _f(n)),
        phi=lambda x, p: p.q ** _f(x), closure_shifted=closure, shift={"a": 1},
        kappa=lambda p: 1.0 / p.q, partner="al_salam_carlitz_ii", standard_name="little q-Laguerre/Wall",
    )


def _make_al_salam_carlitz_ii():
    def P(n, x, p):
        n, x = _f(n), _f(x)
        q = p.q
        return hyp([q**-n, q**-x], [], q**n / p.a, q=q, stop=_stop(n, x))

    def phi0sq(x, p):
        x = _i(x)
        q, a = p.q, p.a
        return (
            LS.of(a) ** x * LS.exp(x * x * np.log(q)) / (LS.qpoch(q, q, x) * LS.qpoch(a * q, q, x))
        ).value()

    def dnsq(n, p):
        n = _i(n)
        q, a = p.q, p.a
        return (LS.of(a * q) ** n / LS.qpoch(q, q, n) * q_pochhammer_inf(a * q, q)).value()

    def closure(p):
        q, a = p.q, p.a
        k = _k(q)
        return (-1.0, [0.0, k], [0.0, 0.0, k], [0.0, k * (1 + a), k])

    return Family(
        id="al_salam_carlitz_ii", name="Al-Salam-Carlitz II", finite=False, q_type=True,
        param_names=("a", "q"), ranges=_single(("0<a<q^-1", lambda p: 0 < p.a < 1 / p.q)),
        B=lambda x, p: p.a * p.q ** (2 * _f(x) + 1),
        D=lambda x, p: (1 - p.q ** _f(x)) * (1 - p.a * p.q ** _f(x)),
        E=lambda n, p: 1 - p.q ** _f(n), eta=lambda x, p: p.q ** -_f(x) - 1, P=P,
        phi0sq=phi0sq, dnsq=dnsq,
        A=lambda n, p: -p.a * p.q ** -_f(n), C=lambda n, p: -(p.q ** -_f(n) - 1),
        phi=lambda x, p: p.q ** -_f(x), closure_shifted=closure, shift={"a": 0},
        kappa=lambda p: p.q, partner="little_q_laguerre", standard_name="Al-Salam-Carlitz II",
    )


def _make_alternative_q_charlier():
    def P(n, x, p):
        n, x = _f(n), _f(x)
        q = p.q
        return q ** (n * x) * hyp([q**-n, q**-x], [0.0], -(q ** (1 - n)) / p.a, q=q, stop=_stop(n, x))

    def phi0sq(x, p):
        x = _i(x)
        q = p.q
        return (LS.of(p.a) ** x * LS.exp(x * (x + 1) / 2 * np.log(q)) / LS.qpoch(q, q, x)).value()

    def dnsq(n, p):
        n = _i(n)
        q, a = p.q, p.a
        r = (
            LS.of(a) ** n * LS.exp(n * (3 * n - 1) / 2 * np.log(q)) / LS.qpoch(q, q, n)
            * LS.qpoch(-a, q, n) * ((1 + a * q ** (2.0 * n)) / (1 + a))
        )
        return (r / q_pochhammer_inf(-a * q, q)).value()

    def closure(p):
        q, a = p.q, p.a
        k = _k(q)
        return (1 - a, [0.0, k], [k * a * (q**-0.5 + q**0.5) ** 2, 0.0, k], [-k * a * (1 + q), k, -k])

    return Family(
        id="alternative_q_charlier", name="alternative q-Charlier", finite=False, q_type=True,
        param_names=("a", "q"), ranges=_single(("a>0", lambda p: p.a > 0)),
        B=lambda x, p: np.full_like(_f(x), p.a), D=lambda x, p: p.q ** -_f(x) - 1,
        E=lambda n, p: (p.q ** -_f(n) - 1) * (1 + p.a * p.q ** _f(n)),
        eta=lambda x, p: 1 - p.q ** _f(x), P=P, phi0sq=phi0sq, dnsq=dnsq,
        A=lambda n, p: -p.a * p.q ** (3 * _f(n) + 1) * (1 + p.a * p.q ** _f(n)) / (
            (1 + p.a * p.q ** (2 * _f(n))) * (1 + p.a * p.q ** (2 * _f(n) + 1))
        ),
        C=lambda n, p: -(1 - p.q ** _f(n)) / (
            (1 + p.a * p.q ** (2 * _f(n) - 1)) * (1 + p.a * p.q ** (2 * _f(n)))
        ),
        phi=lambda x, p: p.q ** _f(x), closure_shifted=closure, shift={"a": 2},
        kappa=lambda p: 1.0 / p.q, partner="dual_alternative_q_charlier",
        standard_name="alternative q-Charlier",
    )


def _make_q_charlier():
    def P(n, x, p):
        n, x = _f(n), _f(x)
        q = p.q
        return hyp([q**-n, q**-x], [0.0], -(q ** (n + 1)) / p.a, q=q, stop=_stop(n, x))

    def phi0sq(x, p):
        x = _i(x)
        q = p.q
        return (LS.of(p.a) ** x * LS.exp(x * (x - 1) / 2 * np.log(q)) / LS.qpoch(q, q, x)).value()

    def dnsq(n, p):
        n = _i(n)
        q, a = p.q, p.a
        r = LS.exp(n * np.log(q)) / (LS.qpoch(-q / a, q, n) * LS.qpoch(q, q, n))
        return (r / q_pochhammer_inf(-a, q)).value()

    def closure(p):
        q, a = p.q, p.a
        k = _k(q)
        return (-1.0, [0.0, k], [0.0, 0.0, k], [-k * a * (1 + 1 / q), k * (1 - a), k])

    return Family(
        id="q_charlier", name="q-Charlier", finite=False, q_type=True, param_names=("a", "q"),
        ranges=_single(("a>0", lambda p: p.a > 0)),
        B=lambda x, p: p.a * p.q ** _f(x), D=lambda x, p: 1 - p.q ** _f(x),
        E=lambda n, p: 1 - p.q ** _f(n), eta=lambda x, p: p.q ** -_f(x) - 1, P=P,
        phi0sq=phi0sq, dnsq=dnsq,
        A=lambda n, p: -p.a * p.q ** (-2 * _f(n) - 1),
        C=lambda n, p: -(p.q ** -_f(n) - 1) * (1 + p.a * p.q ** -_f(n)),
        phi=lambda x, p: p.q ** -_f(x), closure_shifted=closure, shift={"a": -1},
        kappa=lambda p: p.q, partner="dual_q_charlier", standard_name="q-Charlier",
    )


# ---------------------------------------------------------------------------
# duals built from a partner
# ---------------------------------------------------------------------------

def make_dual(partner: Family, fid: str, name: str) -> Family:
    """Family whose Hamiltonian is the dual Hamiltonian of ``partner``.

    ``B``/``D`` are ``-A``/``-C`` of the partner, the spectrum is the
    partner's sinusoidal coordinate and vice versa.  Measures are left to
    the numeric product formulas; shape-invariance data is not available.
    """

    def closure(p):
        cc = partner.closure(p)
        eta1 = float(partner.eta(1, p))
        etam1 = cc.rm1_2 - eta1
        B0 = float(partner.B(0, p))
        # dual closure functions of the partner, already in raw z
        return (
            0.0,
            [cc.rm1_2, cc.r1_1],
            [-eta1 * etam1, 2 * cc.rm1_2, cc.r1_1],
            [eta1 * etam1 * B0, cc.rm1_1, cc.r1_0],
        )

    return Family(
        id=fid, name=name, finite=partner.finite, q_type=partner.q_type,
        param_names=partner.param_names, optional_params=partner.optional_params,
        ranges=partner.ranges,
        B=lambda x, p: -partner.A(x, p), D=lambda x, p: -partner.C(x, p),
        E=partner.eta, eta=partner.E,
        P=lambda n, x, p: partner.P(x, n, p),
        A=lambda n, p: -partner.B(n, p), C=lambda n, p: -partner.D(n, p),
        closure_shifted=closure, derive=partner.derive, partner=partner.id,
        standard_name=f"dual of {partner.name}",
        notes="measures from numeric products; no parameter shift recorded",
    )


def build_catalog():
    fams = [
        _make_racah(), _make_hahn(), _make_dual_hahn(), _make_krawtchouk(),
        _make_q_racah(), _make_q_hahn(), _make_dual_q_hahn(),
        _make_quantum_q_krawtchouk(), _make_q_krawtchouk(), _make_dual_q_krawtchouk(),
        _make_affine_q_krawtchouk(), _make_alternative_q_hahn(), _make_alternative_q_krawtchouk(),
        _make_alternative_affine_q_krawtchouk(),
        _make_meixner(), _make_charlier(), _make_little_q_jacobi(), _make_q_meixner(),
        _make_little_q_laguerre(), _make_al_salam_carlitz_ii(), _make_alternative_q_charlier(),
        _make_q_charlier(),
    ]
    by_id = {f.id: f for f in fams}
    duals = [
        ("quantum_q_krawtchouk", "dual_quantum_q_krawtchouk", "dual quantum q-Krawtchouk"),
        ("q_krawtchouk", "dual_q_krawtchouk_p", "dual q-Krawtchouk (parameter p)"),
        ("little_q_jacobi", "dual_little_q_jacobi", "dual little q-Jacobi"),
        ("q_meixner", "dual_q_meixner", "dual q-Meixner"),
        ("alternative_q_charlier", "dual_alternative_q_charlier", "dual alternative q-Charlier"),
        ("q_charlier", "dual_q_charlier", "dual q-Charlier"),
    ]
    for src, fid, name in duals:
        by_id[fid] = make_dual(by_id[src], fid, name)
    return by_id
