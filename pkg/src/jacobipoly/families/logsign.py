"""Overflow-safe products carried as ``(log|v|, sign(v))`` arrays."""
from __future__ import annotations

import numpy as np


class LogSign:
    """A real array stored as log-magnitude and sign.

    Only multiplication, division and integer powers are supported, which
    is all the measure and normalisation formulas need.
    """

    __slots__ = ("log", "sign")

    def __init__(self, log, sign):
        self.log = np.asarray(log, dtype=float)
        self.sign = np.asarray(sign, dtype=float)

    @classmethod
    def of(cls, v):
        v = np.asarray(v, dtype=float)
        with np.errstate(divide="ignore"):
            return cls(np.log(np.abs(v)), np.sign(v))

    @classmethod
    def exp(cls, logv):
        logv = np.asarray(logv, dtype=float)
        return cls(logv, np.ones_like(logv))

    @classmethod
    def poch(cls, a, k):
        """Rising factorial ``(a)_k``, broadcasting over ``a`` and integer ``k``."""
        return cls._product(a, k, lambda base, j: base + j)

    @classmethod
    def qpoch(cls, a, q, k):
        """``(a;q)_k``, broadcasting over ``a`` and integer ``k``."""
        return cls._product(a, k, lambda base, j: 1.0 - base * q**j)

    @classmethod
    def _product(cls, a, k, factor):
        a = np.asarray(a, dtype=float)
        k = np.asarray(k)
        if np.any(k < 0):
            raise ValueError("Pochhammer length must be non-negative")
        a, k = np.broadcast_arrays(a, k)
        kmax = int(k.max()) if k.size else 0
        j = np.arange(kmax, dtype=float)
        f = factor(a[..., None], j)
        used = j < k[..., None]
        f = np.where(used, f, 1.0)
        with np.errstate(divide="ignore"):
            logs = np.log(np.abs(f)).sum(axis=-1)
        sign = np.where(np.count_nonzero(f < 0, axis=-1) % 2, -1.0, 1.0)
        sign = np.where(np.any(f == 0.0, axis=-1), 0.0, sign)
        return cls(logs, sign)

    def _coerce(self, other):
        return other if isinstance(other, LogSign) else LogSign.of(other)

    def __mul__(self, other):
        other = self._coerce(other)
        return LogSign(self.log + other.log, self.sign * other.sign)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        with np.errstate(invalid="ignore"):
            return LogSign(self.log - other.log, self.sign * other.sign)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, k):
        k = np.asarray(k, dtype=float)
        return LogSign(self.log * k, np.power(self.sign, k))

    def value(self):
        with np.errstate(over="ignore", invalid="ignore"):
            out = np.where(self.sign == 0.0, 0.0, self.sign * np.exp(self.log))
        return out[()] if out.ndim == 0 else out


def binomial(N, x):
    x = np.asarray(x)
    return LogSign.poch(1.0, N) / (LogSign.poch(1.0, x) * LogSign.poch(1.0, N - x))


def q_binomial(N, x, q):
    x = np.asarray(x)
    return LogSign.qpoch(q, q, N) / (LogSign.qpoch(q, q, x) * LogSign.qpoch(q, q, N - x))
