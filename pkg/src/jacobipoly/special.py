"""Pochhammer symbols and (basic) hypergeometric series.

Products are carried as ``(log|value|, sign)`` pairs so that factors such as
``(beta)_x`` or ``q**(x*x)`` never overflow before they are combined.  The
series routines broadcast over array-valued parameters, which lets the
family catalog evaluate a whole lattice row in one call.
"""
from __future__ import annotations

import contextlib
import contextvars
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

#: relative size below which a non-terminating tail term counts as negligible
TAIL_RTOL = 1e-17
#: number of consecutive negligible terms before a non-terminating sum stops
TAIL_RUN = 3
MAX_TERMS = 20000
#: products whose log-magnitude stays below this are multiplied out directly
LOG_DIRECT = 600.0

_condition_log = contextvars.ContextVar("series_condition_log", default=None)


@contextlib.contextmanager
def series_condition():
    """Collect ``(sum t_k, sum |t_k|, term count)`` for every series summed inside the block.

    The yielded list receives one pair per call of the summation routine;
    callers use it to bound the rounding error of a closed-form value.
    """
    records = []
    token = _condition_log.set(records)
    try:
        yield records
    finally:
        _condition_log.reset(token)


class SingularParameterError(ArithmeticError):
    """A denominator Pochhammer factor vanishes before the series terminates."""


class SeriesConvergenceError(ArithmeticError):
    """A non-terminating series did not meet the tail criterion."""


def _check_q(q: float) -> None:
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must satisfy 0<q<1, got {q!r}")


# ---------------------------------------------------------------------------
# Pochhammer symbols
# ---------------------------------------------------------------------------

def log_pochhammer(a: float, n: int) -> tuple[float, float]:
    """Return ``(log|(a)_n|, sign)``; a vanishing product gives ``(-inf, 0)``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return 0.0, 1.0
    factors = a + np.arange(n, dtype=float)
    if np.any(factors == 0.0):
        return -np.inf, 0.0
    sign = -1.0 if np.count_nonzero(factors < 0) % 2 else 1.0
    return float(np.sum(np.log(np.abs(factors)))), sign


def pochhammer(a: float, n: int) -> float:
    """Rising factorial ``(a)_n = a(a+1)...(a+n-1)`` with ``(a)_0 = 1``."""
    logabs, sign = log_pochhammer(a, n)
    if sign == 0.0:
        return 0.0
    if abs(logabs) < LOG_DIRECT:
        # the plain product is exact for integer factors and cannot overflow here
        return float(np.prod(a + np.arange(n, dtype=float)))
    return sign * float(np.exp(logabs))


def log_q_pochhammer(a: float, q: float, n: int) -> tuple[float, float]:
    """Return ``(log|(a;q)_n|, sign)``."""
    _check_q(q)
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return 0.0, 1.0
    factors = 1.0 - a * q ** np.arange(n, dtype=float)
    if np.any(factors == 0.0):
        return -np.inf, 0.0
    sign = -1.0 if np.count_nonzero(factors < 0) % 2 else 1.0
    return float(np.sum(np.log(np.abs(factors)))), sign


def q_pochhammer(a: float, q: float, n: int | float) -> float:
    """``(a;q)_n = prod_{k<n} (1 - a q^k)``; ``n = inf`` gives the infinite product."""
    if n == np.inf:
        return q_pochhammer_inf(a, q)
    logabs, sign = log_q_pochhammer(a, q, int(n))
    if sign == 0.0:
        return 0.0
    if abs(logabs) < LOG_DIRECT:
        return float(np.prod(1.0 - a * q ** np.arange(int(n), dtype=float)))
    return sign * float(np.exp(logabs))


def q_pochhammer_inf(a: float, q: float) -> float:
    """``(a;q)_inf``, truncated once ``|a q^k|`` drops below the tail tolerance."""
    _check_q(q)
    logabs, sign, k = 0.0, 1.0, 0
    while True:
        t = a * q**k
        if abs(t) < TAIL_RTOL * 1e-3:
            break
        f = 1.0 - t
        if f == 0.0:
            return 0.0
        logabs += np.log(abs(f))
        if f < 0:
            sign = -sign
        k += 1
        if k > MAX_TERMS:
            raise SeriesConvergenceError("(a;q)_inf did not converge")
    return sign * float(np.exp(logabs))


def pochhammer_array(a, n_max: int) -> np.ndarray:
    """``[(a)_0, ..., (a)_{n_max}]`` by cumulative log-product."""
    n = np.arange(n_max)
    f = a + n
    return _cumulative(f)


def q_pochhammer_array(a, q: float, n_max: int) -> np.ndarray:
    """``[(a;q)_0, ..., (a;q)_{n_max}]`` by cumulative log-product."""
    _check_q(q)
    f = 1.0 - a * q ** np.arange(n_max, dtype=float)
    return _cumulative(f)


def _cumulative(factors: np.ndarray) -> np.ndarray:
    factors = np.asarray(factors, dtype=float)
    with np.errstate(divide="ignore"):
        logs = np.concatenate([[0.0], np.cumsum(np.log(np.abs(factors)))])
    neg = np.concatenate([[0], np.cumsum(factors < 0)])
    zero = np.concatenate([[False], np.cumsum(factors == 0.0) > 0])
    out = np.where(neg % 2 == 1, -1.0, 1.0) * np.exp(logs)
    out[zero] = 0.0
    return out


# ---------------------------------------------------------------------------
# Series
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SeriesParameters:
    """Inputs of an ``rFs`` or ``r phi s`` series.

    Parameters may be scalars or arrays (broadcast together).  ``q_base`` is
    set for basic series only.  ``terminating_index`` overrides automatic
    detection of the last non-vanishing term; families pass it explicitly
    because ``q**-n * q**n`` need not round to exactly one.
    """

    numerator_params: Sequence = ()
    denominator_params: Sequence = ()
    argument: float | np.ndarray = 0.0
    q_base: float | None = None
    terminating_index: int | np.ndarray | None = field(default=None)

    def __post_init__(self):
        if self.q_base is not None:
            _check_q(self.q_base)


def _integer_index(values, tol: float = 0.0):
    """Return ``m`` where ``values == -m`` for a non-negative integer ``m``, else -1."""
    v = np.asarray(values, dtype=float)
    r = np.rint(v)
    hit = (r <= 0) & (np.abs(v - r) <= tol)
    return np.where(hit, -r, -1).astype(np.int64)


def _q_integer_index(values, q: float, tol: float = 1e-12):
    """Return ``m`` where ``values == q**-m`` (``m >= 0``), else -1."""
    v = np.asarray(values, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        m = np.rint(-np.log(np.where(v > 0, v, np.nan)) / np.log(q))
        ok = (v > 0) & (m >= 0) & (np.abs(v * q ** np.nan_to_num(m) - 1.0) <= tol)
    return np.where(ok, np.nan_to_num(m), -1).astype(np.int64)


def _termination(p: SeriesParameters, shape) -> np.ndarray:
    """Per-element terminating index, ``-1`` meaning non-terminating."""
    if p.terminating_index is not None:
        return np.broadcast_to(np.asarray(p.terminating_index, dtype=np.int64), shape)
    best = np.full(shape, -1, dtype=np.int64)
    for a in p.numerator_params:
        if p.q_base is None:
            m = _integer_index(a)
        else:
            m = _q_integer_index(a, p.q_base)
        m = np.broadcast_to(m, shape)
        best = np.where((m >= 0) & ((best < 0) | (m < best)), m, best)
    z = np.broadcast_to(np.asarray(p.argument, dtype=float), shape)
    # z = 0 leaves only the constant term
    return np.where(z == 0.0, 0, best)


def _singular_check(p: SeriesParameters, term: np.ndarray) -> None:
    for b in p.denominator_params:
        if p.q_base is None:
            m = _integer_index(b)
        else:
            bb = np.asarray(b, dtype=float)
            m = _q_integer_index(bb, p.q_base)
            # exact zero factor 1 - b q^k only when b q^k == 1 exactly
        m = np.broadcast_to(m, term.shape)
        bad = (m >= 0) & ((term < 0) | (m < term))
        if np.any(bad):
            raise SingularParameterError(
                "denominator parameter vanishes before the series terminates"
            )


def _log_ratio(p: SeriesParameters, k: int, shape):
    """log|ratio| and sign of term_k / term_{k-1}."""
    logr = np.zeros(shape)
    sign = np.ones(shape)
    q = p.q_base

    def _acc(f, num: bool):
        nonlocal logr, sign
        f = np.broadcast_to(np.asarray(f, dtype=float), shape)
        with np.errstate(divide="ignore"):
            lf = np.log(np.abs(f))
        logr = logr + lf if num else logr - lf
        sign = sign * np.sign(f)

    if q is None:
        for a in p.numerator_params:
            _acc(np.asarray(a, dtype=float) + (k - 1), True)
        for b in p.denominator_params:
            _acc(np.asarray(b, dtype=float) + (k - 1), False)
        _acc(p.argument, True)
        _acc(float(k), False)
    else:
        qk1 = q ** (k - 1)
        for a in p.numerator_params:
            _acc(1.0 - np.asarray(a, dtype=float) * qk1, True)
        for b in p.denominator_params:
            _acc(1.0 - np.asarray(b, dtype=float) * qk1, False)
        _acc(p.argument, True)
        _acc(1.0 - q**k, False)
        e = 1 + len(p.denominator_params) - len(p.numerator_params)
        if e:
            # (-1)^{e n} q^{e n(n-1)/2}: ratio (-1)^e q^{e(k-1)}
            logr = logr + e * (k - 1) * np.log(q)
            if e % 2:
                sign = -sign
    return logr, sign


def _broadcast_shape(p: SeriesParameters):
    arrays = [np.asarray(v, dtype=float) for v in (*p.numerator_params, *p.denominator_params, p.argument)]
    if p.terminating_index is not None:
        arrays.append(np.asarray(p.terminating_index))
    return np.broadcast_shapes(*(a.shape for a in arrays))


def _sum_series(p: SeriesParameters):
    shape = _broadcast_shape(p)
    term_idx = _termination(p, shape)
    _singular_check(p, term_idx)
    terminating = bool(np.all(term_idx >= 0))
    k_stop = int(term_idx.max()) if terminating else MAX_TERMS

    logt = np.zeros(shape)
    sgn = np.ones(shape)
    # running sum kept as scale * acc to survive very large terms
    scale = np.zeros(shape)
    acc = np.ones(shape)
    absacc = np.ones(shape)
    small_run = np.zeros(shape, dtype=np.int64)
    for k in range(1, k_stop + 1):
        lr, sr = _log_ratio(p, k, shape)
        logt = logt + lr
        sgn = sgn * sr
        live = (term_idx < 0) | (k <= term_idx)
        live &= sgn != 0
        contrib_log = np.where(live, logt, -np.inf)
        new_scale = np.maximum(scale, contrib_log)
        with np.errstate(over="ignore", invalid="ignore"):
            acc = acc * np.exp(scale - new_scale) + np.where(
                live, sgn * np.exp(contrib_log - new_scale), 0.0
            )
            absacc = absacc * np.exp(scale - new_scale) + np.where(
                live, np.exp(contrib_log - new_scale), 0.0
            )
        scale = new_scale
        if not terminating:
            with np.errstate(divide="ignore"):
                rel = contrib_log - (scale + np.log(np.abs(acc) + 1e-300))
            small = (rel < np.log(TAIL_RTOL)) | ~live
            small_run = np.where(small, small_run + 1, 0)
            if np.all((small_run >= TAIL_RUN) | (term_idx >= 0) & (k >= term_idx)):
                break
    else:
        if not terminating:
            raise SeriesConvergenceError("series tail did not fall below tolerance")
    with np.errstate(over="ignore"):
        out = acc * np.exp(scale)
    log = _condition_log.get()
    if log is not None:
        with np.errstate(over="ignore", invalid="ignore"):
            log.append((out, absacc * np.exp(scale), k + 1 if k_stop else 1))
    return out[()] if out.ndim == 0 else out


def _horner(p: SeriesParameters):
    """Backward nested evaluation ``1 + r1(1 + r2(1 + ...))`` of a terminating series."""
    shape = _broadcast_shape(p)
    term_idx = _termination(p, shape)
    if np.any(term_idx < 0):
        raise ValueError("Horner evaluation needs a terminating series")
    _singular_check(p, term_idx)
    k_max = int(term_idx.max())
    inner = np.ones(shape)
    for k in range(k_max, 0, -1):
        lr, sr = _log_ratio(p, k, shape)
        ratio = sr * np.exp(lr)
        inner = np.where(k <= term_idx, 1.0 + ratio * inner, inner)
    return inner[()] if inner.ndim == 0 else inner


def hypergeometric_F(params: SeriesParameters, method: str = "forward"):
    """Generalised hypergeometric series ``rFs(a; b | z)``.

    Terminating input sums exactly up to the last non-vanishing term.
    Otherwise summation stops after ``TAIL_RUN`` consecutive terms whose
    magnitude is below ``TAIL_RTOL`` relative to the partial sum.

    Raises
    ------
    SingularParameterError
        If a denominator Pochhammer hits zero before termination.
    """
    if params.q_base is not None:
        raise ValueError("use basic_hypergeometric_phi for q-series")
    return _horner(params) if method == "horner" else _sum_series(params)


def basic_hypergeometric_phi(params: SeriesParameters, method: str = "forward"):
    """Basic hypergeometric series ``r phi s(a; b | q; z)``.

    Uses the ``(-1)^{(1+s-r)n} q^{(1+s-r)n(n-1)/2}`` convention, so for
    ``r = s + 1`` the extra factor is absent.
    """
    if params.q_base is None:
        raise ValueError("basic series require q_base")
    return _horner(params) if method == "horner" else _sum_series(params)


def hyp(num, den, z, q: float | None = None, stop=None):
    """Shorthand used by the family catalog."""
    p = SeriesParameters(tuple(num), tuple(den), z, q, stop)
    return _sum_series(p)
