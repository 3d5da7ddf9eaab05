"""Jacobi-matrix Hamiltonian, its bidiagonal factorization and ground state.

The lattice is ``x = 0..x_max`` with the ``(0, 0)`` entry in the upper-left
corner.  ``B`` and ``D`` may be callables on integer arrays or plain arrays
covering the window.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
import scipy.io
import scipy.sparse

#: relative tail bound for truncating an infinite measure
TAIL_RTOL = 1e-16
#: largest window the automatic truncation may reach
WINDOW_CAP = 10_000


class InvalidFamilyError(ValueError):
    """B or D has the wrong sign, so H is not a factorizable Jacobi matrix."""


class DivergentMeasureError(ArithmeticError):
    """The ground-state measure did not meet the tail rule before the cap."""


def _values(fn, idx):
    if callable(fn):
        return np.asarray(fn(idx), dtype=float)
    arr = np.asarray(fn, dtype=float)
    return arr[idx]


def lattice(window):
    return np.arange(int(window) + 1)


def _checked_BD(B, D, window):
    x = lattice(window)
    b = _values(B, x)
    d = _values(D, x)
    if d[0] != 0.0:
        raise InvalidFamilyError(f"D(0) must vanish, got {d[0]!r}")
    if np.any(b < 0) or np.any(d < 0):
        bad = int(np.flatnonzero((b < 0) | (d < 0))[0])
        raise InvalidFamilyError(f"negative B or D at x={bad}")
    return b, d


def sqrt_product(u, v):
    """``sqrt(u*v)`` as ``sqrt(u) sqrt(v)``, which overflows only when the result does."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(np.sign(u) * np.sign(v) < 0):
        raise InvalidFamilyError("negative product under a square root")
    return np.sqrt(np.abs(u)) * np.sqrt(np.abs(v))


@dataclass(frozen=True)
class TridiagonalOperator:
    """Three-band matrix; ``upper[i]`` is entry (i, i+1), ``lower[i]`` is (i+1, i)."""

    diagonal: np.ndarray
    upper: np.ndarray
    lower: np.ndarray
    symmetric: bool = True

    @classmethod
    def symmetric_from(cls, diagonal, off_diagonal):
        off = np.asarray(off_diagonal, dtype=float)
        return cls(np.asarray(diagonal, dtype=float), off, off, True)

    @property
    def size(self):
        return len(self.diagonal)

    @property
    def off_diagonal(self):
        return self.upper

    def dense(self):
        return np.diag(self.diagonal) + np.diag(self.upper, 1) + np.diag(self.lower, -1)

    def matvec(self, v):
        v = np.asarray(v)
        out = self.diagonal * v
        out[:-1] += self.upper * v[1:]
        out[1:] += self.lower * v[:-1]
        return out

    def max_norm(self):
        parts = [np.abs(self.diagonal)]
        if self.size > 1:
            parts += [np.abs(self.upper), np.abs(self.lower)]
        return float(max(p.max() for p in parts))

    def sparse(self):
        return scipy.sparse.diags(
            [self.lower, self.diagonal, self.upper], [-1, 0, 1], shape=(self.size, self.size), format="coo"
        )

    def triplets(self):
        m = self.sparse()
        order = np.lexsort((m.col, m.row))
        return [(int(m.row[k]), int(m.col[k]), float(m.data[k])) for k in order]

    def to_matrix_market(self, target=None):
        """Write Matrix Market coordinate text; returns the text when ``target`` is None."""
        buf = io.BytesIO()
        scipy.io.mmwrite(buf, self.sparse(), precision=17, symmetry="general")
        text = buf.getvalue().decode()
        if target is None:
            return text
        with open(target, "w") as fh:
            fh.write(text)
        return None

    def to_csv(self, target=None):
        """CSV triplets ``x,y,value`` with a header row."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y", "value"])
        for i, j, v in self.triplets():
            w.writerow([i, j, f"{v:.12g}"])
        if target is None:
            return buf.getvalue()
        with open(target, "w") as fh:
            fh.write(buf.getvalue())
        return None


@dataclass(frozen=True)
class BidiagonalFactor:
    """``A`` has ``main`` on the diagonal and ``offset`` on the super-diagonal.

    The adjoint ``A†`` is represented by :meth:`adjoint_dense`.
    """

    main: np.ndarray
    offset: np.ndarray

    @property
    def size(self):
        return len(self.main)

    def dense(self):
        return np.diag(self.main) + np.diag(self.offset, 1)

    def adjoint_dense(self):
        return self.dense().T

    def apply(self, v):
        v = np.asarray(v, dtype=float)
        out = self.main * v
        out[:-1] += self.offset * v[1:]
        return out

    def apply_adjoint(self, v):
        v = np.asarray(v, dtype=float)
        out = self.main * v
        out[1:] += self.offset * v[:-1]
        return out


@dataclass(frozen=True)
class GroundState:
    values: np.ndarray
    squared_norm: float
    x_max: int
    tail_estimate: float = 0.0

    @property
    def squared(self):
        return self.values**2


def build_hamiltonian(B, D, window):
    """Symmetric Jacobi matrix with diagonal ``B+D`` and off-diagonal ``-sqrt(B(x)D(x+1))``."""
    b, d = _checked_BD(B, D, window)
    off = -sqrt_product(b[:-1], d[1:])
    return TridiagonalOperator.symmetric_from(b + d, off)


def factorize(B, D, window):
    """Return ``(A, A_dagger)`` with ``H = A_dagger @ A`` on the window."""
    b, d = _checked_BD(B, D, window)
    A = BidiagonalFactor(np.sqrt(b), -np.sqrt(d[1:]))
    return A, A


def factorization_residual(H, A):
    """``max|H - A†A|`` together with ``max|H|``."""
    M = A.dense()
    R = H.dense() - M.T @ M
    return float(np.abs(R).max()), H.max_norm()


def log_ground_state(B, D, window):
    """``log phi0(x)^2`` on ``0..window`` as a cumulative sum of ``log B(y) - log D(y+1)``."""
    x = lattice(window)
    b = _values(B, x[:-1]) if window > 0 else np.zeros(0)
    d = _values(D, x[1:]) if window > 0 else np.zeros(0)
    if np.any(d <= 0):
        raise InvalidFamilyError("D(x+1) must be positive on the window")
    if np.any(b < 0):
        raise InvalidFamilyError("B(x) must be non-negative on the window")
    with np.errstate(divide="ignore"):
        steps = np.log(b) - np.log(d)
    return np.concatenate([[0.0], np.cumsum(steps)])


def ground_state(B, D, window=None):
    """Ground state ``phi0`` with ``phi0(0) = 1``.

    With ``window=None`` the lattice is infinite: the window grows until the
    geometric tail estimate ``phi0(x)^2 r/(1-r)`` with ``r = B(x)/D(x+1)``
    drops below ``TAIL_RTOL`` times the partial sum, and
    :class:`DivergentMeasureError` is raised if ``WINDOW_CAP`` is reached.
    """
    if window is not None:
        logsq = log_ground_state(B, D, window)
        sq = np.exp(logsq)
        return GroundState(np.sqrt(sq), float(sq.sum()), int(window), 0.0)
    x_max = auto_window(B, D)
    gs = ground_state(B, D, x_max)
    r = float(_values(B, np.array([x_max]))[0] / _values(D, np.array([x_max + 1]))[0])
    tail = gs.values[-1] ** 2 * r / (1 - r) if r < 1 else np.inf
    return GroundState(gs.values, gs.squared_norm, x_max, float(tail))


def auto_window(B, D, rtol=TAIL_RTOL, cap=WINDOW_CAP, start=16):
    """Smallest window meeting the tail rule for an infinite lattice."""
    size = start
    while True:
        size = min(size, cap)
        logsq = log_ground_state(B, D, size)
        x = lattice(size)
        b = _values(B, x)
        d = _values(D, np.arange(1, size + 2))
        with np.errstate(divide="ignore", over="ignore"):
            ratio = b / d
            shift = logsq.max()
            terms = np.exp(logsq - shift)
            partial = np.cumsum(terms)
            tail = np.where(ratio < 1, terms * ratio / (1 - ratio), np.inf)
        ok = np.flatnonzero(tail < rtol * partial)
        if ok.size:
            return int(ok[0])
        if size >= cap:
            raise DivergentMeasureError(f"measure tail did not fall below {rtol:g} by x={cap}")
        size *= 2


def similarity_transform(B, D, window):
    """``phi0^-1 H phi0``: diagonal ``B+D``, super-diagonal ``-B(x)``, sub-diagonal ``-D(x)``."""
    b, d = _checked_BD(B, D, window)
    return TridiagonalOperator(b + d, -b[:-1], -d[1:], symmetric=False)


def conjugate(H, phi0):
    """Entrywise ``phi0(x)^-1 H[x, y] phi0(y)`` of a three-band operator."""
    phi0 = np.asarray(phi0, dtype=float)
    upper = H.upper * phi0[1:] / phi0[:-1]
    lower = H.lower * phi0[:-1] / phi0[1:]
    return TridiagonalOperator(H.diagonal.copy(), upper, lower, symmetric=False)
