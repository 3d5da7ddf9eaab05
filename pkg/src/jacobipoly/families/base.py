"""Family descriptors, parameter validation and closure coefficients."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np


class ParameterError(ValueError):
    """Parameters outside every listed range of a family."""


class UnknownFamilyError(KeyError):
    pass


class LatticeError(IndexError):
    """Index requested outside the lattice of a family."""


class Params(Mapping):
    """Immutable parameter set with attribute access.

    Holds the user-facing parameters plus derived entries such as the sign
    markers ``eps``/``epsp``, ``q`` for q-families and ``N`` for finite ones.
    """

    def __init__(self, values):
        object.__setattr__(self, "_v", dict(values))

    def __getitem__(self, key):
        return self._v[key]

    def __iter__(self):
        return iter(self._v)

    def __len__(self):
        return len(self._v)

    def __getattr__(self, name):
        try:
            return self._v[name]
        except KeyError:
            raise AttributeError(name) from None

    def __setattr__(self, name, value):
        raise AttributeError("Params is immutable")

    def __repr__(self):
        inner = ", ".join(f"{k}={v!r}" for k, v in self._v.items())
        return f"Params({inner})"

    def __hash__(self):
        return hash(tuple(sorted((k, float(v)) for k, v in self._v.items())))

    def __eq__(self, other):
        return isinstance(other, Params) and self._v == other._v

    def replace(self, **kw):
        v = dict(self._v)
        v.update(kw)
        return Params(v)


@dataclass(frozen=True)
class Condition:
    label: str
    test: Callable[[Params], bool]


@dataclass(frozen=True)
class ParameterRange:
    """A conjunction of inequalities together with the sign markers it implies."""

    conditions: tuple
    signs: tuple = (1, 1)

    def first_violation(self, p):
        for c in self.conditions:
            if not c.test(p):
                return c.label
        return None

    def describe(self):
        return ", ".join(c.label for c in self.conditions)


def conditions(*pairs):
    return tuple(Condition(label, fn) for label, fn in pairs)


@dataclass(frozen=True)
class ClosureCoefficients:
    """Raw-argument coefficients of R1, R0, R-1.

    ``R1(z) = r1_1 z + r1_0``, ``R0(z) = r0_2 z^2 + r0_1 z + r0_0`` and
    ``R-1(z) = rm1_2 z^2 + rm1_1 z + rm1_0``.  ``shifted_argument_offset``
    records the constant ``s`` of the ``z' = z + s`` form the family was
    tabulated in.
    """

    r1_1: float
    r1_0: float
    r0_2: float
    r0_1: float
    r0_0: float
    rm1_2: float
    rm1_1: float
    rm1_0: float
    shifted_argument_offset: float = 0.0
    # ascending coefficients in z' = z + offset, kept for accurate evaluation
    shifted_form: tuple | None = field(default=None, compare=False, repr=False)

    @classmethod
    def from_shifted(cls, offset, R1, R0, Rm1):
        """Expand polynomials given in ``z' = z + offset`` (ascending coefficient lists)."""

        def expand(c, degree):
            c = list(c) + [0.0] * (degree + 1 - len(c))
            out = np.zeros(degree + 1)
            for k, ck in enumerate(c):
                # ck (z + s)^k
                for j in range(k + 1):
                    out[j] += ck * _binom(k, j) * offset ** (k - j)
            return out

        r1 = expand(R1, 1)
        r0 = expand(R0, 2)
        rm = expand(Rm1, 2)
        form = tuple(tuple(float(v) for v in c) for c in (R1, R0, Rm1))
        return cls(r1[1], r1[0], r0[2], r0[1], r0[0], rm[2], rm[1], rm[0], float(offset), form)

    def _eval(self, k, raw, z):
        z = np.asarray(z, dtype=float)
        if self.shifted_form is None:
            c = raw
        else:
            c = self.shifted_form[k]
            z = z + self.shifted_argument_offset
        out = np.zeros_like(z)
        for ck in reversed(c):
            out = out * z + ck
        return out

    def R1(self, z):
        return self._eval(0, (self.r1_0, self.r1_1), z)

    def R0(self, z):
        return self._eval(1, (self.r0_0, self.r0_1, self.r0_2), z)

    def Rm1(self, z):
        return self._eval(2, (self.rm1_0, self.rm1_1, self.rm1_2), z)

    def constraint_residual(self):
        """Deviation from ``r0_2 = r1_1`` and ``r0_1 = 2 r1_0``."""
        scale = max(1.0, abs(self.r1_1), abs(self.r1_0))
        return max(abs(self.r0_2 - self.r1_1), abs(self.r0_1 - 2 * self.r1_0)) / scale

    def as_dict(self):
        return {k: float(getattr(self, k)) for k in self.__dataclass_fields__ if k != "shifted_form"}

    def replace(self, **kw):
        d = self.as_dict()
        d.update(kw)
        return ClosureCoefficients(**d)


def _pin_origin(fn, value=0.0):
    def pinned(i, p):
        i = np.asarray(i)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.asarray(fn(i, p), dtype=float)
        out = np.where(i == 0, value, out)
        return out[()] if out.ndim == 0 else out

    pinned._origin_pinned = True
    return pinned


def _pin_polynomial(fn):
    def pinned(n, x, p):
        n, x = np.asarray(n), np.asarray(x)
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            out = np.asarray(fn(n, x, p), dtype=float)
        out = np.where((n == 0) | (x == 0), 1.0, out)
        return out[()] if out.ndim == 0 else out

    pinned._origin_pinned = True
    return pinned


def _binom(k, j):
    from math import comb

    return comb(k, j)


QUANTITY_ALIASES = {
    "B": "B", "D": "D", "E": "E",
    "eta": "eta", "η": "eta",
    "phi0sq": "phi0sq", "φ₀²": "phi0sq", "phi0^2": "phi0sq",
    "dnsq": "dnsq", "dₙ²": "dnsq", "dn^2": "dnsq",
    "A": "A", "Aₙ": "A", "C": "C", "Cₙ": "C",
    "phi": "phi", "φ": "phi", "varphi": "phi",
    "R1": "R1", "R₁": "R1", "R0": "R0", "R₀": "R0",
    "Rm1": "Rm1", "R-1": "Rm1", "R₋₁": "Rm1",
    "P": "P",
}


@dataclass(frozen=True)
class Family:
    """Descriptor of one polynomial family.

    All lattice functions take ``(index_array, params)``.  Entries that a
    family does not provide in closed form are ``None``; generic numeric
    fallbacks live in :mod:`jacobipoly.families.registry`.
    """

    id: str
    name: str
    finite: bool
    q_type: bool
    param_names: tuple
    ranges: tuple
    B: Callable
    D: Callable
    E: Callable | None = None
    eta: Callable | None = None
    P: Callable | None = None
    phi0sq: Callable | None = None
    dnsq: Callable | None = None
    A: Callable | None = None
    C: Callable | None = None
    phi: Callable | None = None
    closure_shifted: Callable | None = None
    shift: Mapping | None = None
    kappa: Callable | None = None
    derive: Callable | None = None
    partner: str | None = None
    standard_name: str = ""
    notes: str = ""
    optional_params: tuple = ()
    custom_data: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        # D(0) = 0, C_0 = 0, phi0(0)^2 = 1 and P_0 = P_n(eta(0)) = 1 hold by definition;
        # the closed forms can be 0/0 or lose every digit to cancellation there
        for name, value in (("D", 0.0), ("C", 0.0), ("phi0sq", 1.0)):
            fn = getattr(self, name)
            if fn is not None and not getattr(fn, "_origin_pinned", False):
                object.__setattr__(self, name, _pin_origin(fn, value))
        if self.P is not None and not getattr(self.P, "_origin_pinned", False):
            object.__setattr__(self, "P", _pin_polynomial(self.P))

    # ----------------------------------------------------------- parameters
    @property
    def kind(self):
        return "finite" if self.finite else "infinite"

    @property
    def all_param_names(self):
        extra = []
        if self.q_type and "q" not in self.param_names:
            extra.append("q")
        if self.finite and "N" not in self.param_names:
            extra.append("N")
        return tuple(self.param_names) + tuple(extra)

    def params(self, values=None, **kw):
        """Validate parameters and return a :class:`Params` with sign markers resolved."""
        values = dict(values or {})
        values.update(kw)
        names = self.all_param_names
        unknown = set(values) - set(names) - set(self.optional_params)
        if unknown:
            raise ParameterError(
                f"{self.id}: unknown parameter(s) {sorted(unknown)}; expected {list(names)}"
            )
        missing = [n for n in names if n not in values]
        if missing:
            raise ParameterError(f"{self.id}: missing parameter(s) {missing}")
        v = {}
        for k, val in values.items():
            v[k] = float(val)
        if self.finite:
            N = v["N"]
            if N != int(N) or N < 1:
                raise ParameterError(f"{self.id}: N must be a positive integer (N={N:g})")
            v["N"] = int(N)
        if self.q_type and not 0.0 < v["q"] < 1.0:
            raise ParameterError(f"{self.id}: 0<q<1 violated (q={v['q']:g})")
        if self.derive is not None:
            v.update(self.derive(v))
        p = Params(v)
        signs = self.resolve_signs(p)
        return p.replace(eps=float(signs[0]), epsp=float(signs[1]))

    def resolve_signs(self, p):
        if not self.ranges:
            return (1, 1)
        violations = []
        for r in self.ranges:
            bad = r.first_violation(p)
            if bad is None:
                return r.signs
            violations.append(bad)
        if len(self.ranges) == 1:
            raise ParameterError(f"{self.id}: {violations[0]} violated")
        detail = "; ".join(
            f"[{r.describe()}] fails at {bad}" for r, bad in zip(self.ranges, violations)
        )
        raise ParameterError(f"{self.id}: parameters lie in none of the ranges: {detail}")

    def user_values(self, p):
        return {k: p[k] for k in self.all_param_names}

    def shifted(self, p, times=1):
        """Parameters after ``times`` applications of the shape-invariance shift."""
        if self.shift is None:
            raise NotImplementedError(f"{self.id}: no parameter shift recorded")
        v = self.user_values(p)
        for name, delta in self.shift.items():
            if name == "N":
                v["N"] = v["N"] + delta * times
            elif self.q_type:
                v[name] = v[name] * v["q"] ** (delta * times)
            else:
                v[name] = v[name] + delta * times
        return self.params(v)

    # ------------------------------------------------------------ lattice
    def lattice_size(self, p):
        return p.N + 1 if self.finite else None

    def check_index(self, idx, p):
        idx = np.asarray(idx)
        if np.any(idx < 0) or (self.finite and np.any(idx > p.N)):
            hi = p.N if self.finite else "inf"
            raise LatticeError(f"{self.id}: index outside lattice 0..{hi}")
        return idx

    def closure(self, p):
        if self.closure_shifted is None:
            return None
        offset, R1, R0, Rm1 = self.closure_shifted(p)
        return ClosureCoefficients.from_shifted(offset, R1, R0, Rm1)

    def kappa_value(self, p):
        return None if self.kappa is None else float(self.kappa(p))

    def metadata(self):
        return {
            "id": self.id,
            "name": self.name,
            "kind": self.kind,
            "q_type": self.q_type,
            "parameters": list(self.all_param_names),
            "ranges": [
                {"conditions": [c.label for c in r.conditions], "eps": r.signs[0], "epsp": r.signs[1]}
                for r in self.ranges
            ],
            "shift": None if self.shift is None else dict(self.shift),
            "partner": self.partner,
            "standard_name": self.standard_name,
            "notes": self.notes,
        }
