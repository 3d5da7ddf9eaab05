"""Catalog of discrete orthogonal polynomial families."""
from __future__ import annotations

import json

import numpy as np

from .base import (
    QUANTITY_ALIASES,
    ClosureCoefficients,
    Family,
    LatticeError,
    ParameterError,
    Params,
    UnknownFamilyError,
)
from .catalog import build_catalog

_CATALOG = build_catalog()

__all__ = [
    "ClosureCoefficients", "Family", "LatticeError", "ParameterError", "Params",
    "UnknownFamilyError", "get_family", "family_ids", "validate_parameters", "eval_family",
    "eval_polynomial_closed_form", "custom_family", "catalog_metadata", "phi0sq_values",
    "dnsq_values", "measure_window",
]


def family_ids(kind=None):
    ids = sorted(_CATALOG)
    if kind is None:
        return ids
    return [i for i in ids if _CATALOG[i].kind == kind]


def get_family(fid):
    if isinstance(fid, Family):
        return fid
    try:
        return _CATALOG[fid]
    except KeyError:
        raise UnknownFamilyError(f"unknown family {fid!r}") from None


def validate_parameters(fid, values=None, **kw):
    """Validated :class:`Params`; sign markers are available as ``eps``/``epsp``."""
    return get_family(fid).params(values, **kw)


def catalog_metadata(as_json=False):
    meta = [_CATALOG[i].metadata() for i in family_ids()]
    return json.dumps(meta, indent=2) if as_json else meta


def measure_window(family, p):
    """Last lattice index of the measure window (tail rule for infinite lattices)."""
    from ..hamiltonian import auto_window

    if family.finite:
        return p.N
    return auto_window(lambda x: family.B(x, p), lambda x: family.D(x, p))


def phi0sq_values(family, p, x):
    """Closed-form ``phi0(x)^2`` when available, otherwise the ratio product."""
    x = np.asarray(x)
    if family.phi0sq is not None:
        return np.asarray(family.phi0sq(x, p), dtype=float)
    from ..hamiltonian import log_ground_state

    top = int(np.max(x)) if x.size else 0
    logsq = log_ground_state(lambda y: family.B(y, p), lambda y: family.D(y, p), top)
    return np.exp(logsq[x])


def _d0sq_numeric(family, p):
    from ..hamiltonian import ground_state

    B = lambda y: family.B(y, p)  # noqa: E731
    D = lambda y: family.D(y, p)  # noqa: E731
    gs = ground_state(B, D, p.N if family.finite else None)
    return 1.0 / gs.squared_norm


def dnsq_values(family, p, n):
    """Closed-form ``d_n^2`` or ``d_0^2 prod A_m/C_{m+1}`` with ``d_0^2 = 1/sum phi0^2``."""
    n = np.asarray(n)
    if family.dnsq is not None:
        return np.asarray(family.dnsq(n, p), dtype=float)
    top = int(np.max(n)) if n.size else 0
    m = np.arange(top)
    a = np.asarray(family.A(m, p), dtype=float)
    c = np.asarray(family.C(m + 1, p), dtype=float)
    logratio = np.concatenate([[0.0], np.cumsum(np.log(a / c))])
    return _d0sq_numeric(family, p) * np.exp(logratio[n])


def eval_family(fid, params, quantity, index_range):
    """Evaluate one catalog quantity over lattice indices.

    ``R1``, ``R0`` and ``Rm1`` are evaluated at ``z = E(n)`` for the given
    ``n``.  ``params`` may be a mapping of raw values or validated
    :class:`Params`.
    """
    family = get_family(fid)
    p = params if isinstance(params, Params) and "eps" in params else family.params(params)
    q = QUANTITY_ALIASES.get(quantity)
    if q is None or q == "P":
        raise ValueError(f"unknown quantity {quantity!r}")
    idx = family.check_index(np.asarray(index_range), p)
    if q == "phi0sq":
        return phi0sq_values(family, p, idx)
    if q == "dnsq":
        return dnsq_values(family, p, idx)
    if q in ("R1", "R0", "Rm1"):
        cc = family.closure(p)
        if cc is None:
            raise ValueError(f"{family.id}: no closure data")
        return np.asarray(getattr(cc, q)(family.E(idx, p)), dtype=float)
    fn = getattr(family, q)
    if fn is None:
        raise ValueError(f"{family.id}: {q} not available")
    return np.asarray(fn(idx, p), dtype=float)


def eval_polynomial_closed_form(fid, params, n, x):
    """``P_n(eta(x))`` from the family's hypergeometric representation."""
    family = get_family(fid)
    p = params if isinstance(params, Params) and "eps" in params else family.params(params)
    if family.P is None:
        raise ValueError(f"{family.id}: no closed-form polynomial")
    n = family.check_index(n, p)
    x = family.check_index(x, p)
    return family.P(n, x, p)


def custom_family(B_values, D_values, name="custom"):
    """Finite family from tabulated ``B(0..N)`` and ``D(0..N)``.

    Positivity and the boundary conditions ``D(0) = 0``, ``B(N) = 0`` are
    checked at load; no closed forms are attached.
    """
    b = np.asarray(B_values, dtype=float)
    d = np.asarray(D_values, dtype=float)
    if b.shape != d.shape or b.ndim != 1 or b.size < 2:
        raise ParameterError("B and D must be 1-d arrays of equal length >= 2")
    N = b.size - 1
    problems = []
    if d[0] != 0:
        problems.append("D(0)=0")
    if b[N] != 0:
        problems.append("B(N)=0")
    if np.any(b[:N] <= 0):
        problems.append("B(x)>0 for x<N")
    if np.any(d[1:] <= 0):
        problems.append("D(x)>0 for x>=1")
    if problems:
        raise ParameterError(f"{name}: " + ", ".join(problems) + " violated")

    def lookup(arr):
        return lambda x, p: arr[np.asarray(x, dtype=int)]

    return Family(
        id=name, name=name, finite=True, q_type=False, param_names=("N",), ranges=(),
        B=lookup(b), D=lookup(d), custom_data=(b, d),
        notes="tabulated B and D; numeric verification only",
    )
