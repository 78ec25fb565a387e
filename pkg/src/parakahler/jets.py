"""Truncated multivariate Taylor ("jet") arithmetic.

A jet of order ``p`` in ``d`` variables stores the Taylor coefficients of
a smooth quantity at a point: the entry for the multi-index ``kappa``
holds ``(d^kappa f)(x) / kappa!`` for every ``|kappa| <= p``.  Folding the
factorial into the coefficient makes multiplication a plain
degree-truncated convolution; that convolution is the hot kernel of the
whole package.  It runs through a small compiled extension when one has
been built (``_jetkern``) and through a pure-numpy segment sum otherwise;
``active_backend()`` reports which path is live.

Tensors with jet entries are ordinary numpy arrays whose *last* axis is
the coefficient axis; the leading axes are tensor slots.  A `JetSpace`
owns the coefficient layout of a fixed ``(dim, order)`` pair and provides
all arithmetic.  The `Jet` dataclass is a thin value wrapper around one
coefficient vector for scalar use.

Polynomial inputs are exact: evaluating a `PolyField` into a jet incurs
only floating-point rounding, never truncation error, which is what keeps
curvature residuals down at the 1e-10 level.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .conventions import JET_ORDER_MAX

try:  # compiled kernel is optional; the numpy path is the fallback
    from . import _jetkern
except ImportError:  # pragma: no cover - depends on the build
    _jetkern = None

_BACKEND_ENV = "PARAKAHLER_JET_BACKEND"


def available_backends() -> tuple[str, ...]:
    """Names of the jet-convolution backends usable in this process."""
    if _jetkern is not None:
        return ("numpy", "cython")
    return ("numpy",)


def active_backend() -> str:
    """Backend selected by the environment (``PARAKAHLER_JET_BACKEND``).

    ``auto`` (the default) prefers the compiled kernel when present.
    """
    choice = os.environ.get(_BACKEND_ENV, "auto")
    if choice == "auto":
        return "cython" if _jetkern is not None else "numpy"
    if choice not in ("numpy", "cython"):
        raise ValueError(f"unknown jet backend {choice!r}")
    if choice == "cython" and _jetkern is None:
        raise RuntimeError(
            "compiled jet kernel requested via %s but the extension is not "
            "built; run `python setup.py build_ext --inplace`" % _BACKEND_ENV
        )
    return choice


def _degree_tuples(dim, total):
    """All exponent tuples of length ``dim`` with sum exactly ``total``."""
    if dim == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _degree_tuples(dim - 1, total - first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def jet_space(dim: int, order: int) -> "JetSpace":
    """Shared, cached jet space for ``dim`` variables at ``order``."""
    return JetSpace(dim, order)


class JetSpace:
    """Coefficient layout and arithmetic for jets of one (dim, order)."""

    def __init__(self, dim: int, order: int):
        if dim < 1:
            raise ValueError("jet dimension must be positive")
        if not 0 <= order <= JET_ORDER_MAX:
            raise ValueError(f"jet order must lie in 0..{JET_ORDER_MAX}")
        self.dim = dim
        self.order = order
        indices: list[tuple[int, ...]] = []
        for total in range(order + 1):
            indices.extend(sorted(_degree_tuples(dim, total)))
        self.mindex = np.array(indices, dtype=np.int64)
        self.ncoeff = len(indices)
        self._pos = {k: i for i, k in enumerate(indices)}
        if order >= 1:
            unit = [tuple(1 if j == i else 0 for j in range(dim)) for i in range(dim)]
            self.grad_positions = np.array([self._pos[e] for e in unit], dtype=np.intp)
        else:
            self.grad_positions = np.empty(0, dtype=np.intp)
        self._tables = None
        self._deriv_maps: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        self._lift_maps: dict = {}
        self._trunc_maps: dict[int, np.ndarray] = {}

    def __repr__(self):
        return f"JetSpace(dim={self.dim}, order={self.order})"

    def position(self, kappa) -> int:
        """Coefficient position of a multi-index tuple."""
        return self._pos[tuple(kappa)]

    # -- tables -----------------------------------------------------------

    def _mul_tables(self):
        if self._tables is None:
            ia, ib, ic = [], [], []
            for cpos in range(self.ncoeff):
                kappa = tuple(self.mindex[cpos])
                for lam in itertools.product(*(range(k + 1) for k in kappa)):
                    mu = tuple(k - l for k, l in zip(kappa, lam))
                    ia.append(self._pos[lam])
                    ib.append(self._pos[mu])
                    ic.append(cpos)
            ia = np.array(ia, dtype=np.intp)
            ib = np.array(ib, dtype=np.intp)
            ic = np.array(ic, dtype=np.intp)
            # ic is ascending by construction and every output index occurs
            # (the split lam = 0 always exists), so reduceat segments are
            # exactly the first occurrences.
            starts = np.searchsorted(ic, np.arange(self.ncoeff))
            self._tables = (ia, ib, ic, starts)
        return self._tables

    # -- constructors ------------------------------------------------------

    def zeros(self, shape=()) -> np.ndarray:
        if isinstance(shape, int):
            shape = (shape,)
        return np.zeros(tuple(shape) + (self.ncoeff,))

    def constant(self, value) -> np.ndarray:
        """Jet array of a constant scalar or array (all derivatives zero)."""
        value = np.asarray(value, dtype=float)
        out = np.zeros(value.shape + (self.ncoeff,))
        out[..., 0] = value
        return out

    def eye(self, m: int) -> np.ndarray:
        return self.constant(np.eye(m))

    def coordinate(self, i: int, value: float) -> np.ndarray:
        """Jet of the i-th coordinate function at a point where it equals value."""
        out = np.zeros(self.ncoeff)
        out[0] = value
        if self.order >= 1:
            out[self.grad_positions[i]] = 1.0
        return out

    def from_poly(self, field: "PolyField", x) -> np.ndarray:
        """Exact Taylor coefficients of a polynomial field at ``x``."""
        if field.dim != self.dim:
            raise ValueError(
                f"field has dim {field.dim}, jet space has dim {self.dim}"
            )
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"point has shape {x.shape}, expected ({self.dim},)")
        out = np.zeros(self.ncoeff)
        for exps, coeff in field.monomials:
            bounded = [range(min(e, self.order) + 1) for e in exps]
            for kappa in itertools.product(*bounded):
                if sum(kappa) > self.order:
                    continue
                term = coeff
                for e, k, xv in zip(exps, kappa, x):
                    term *= math.comb(e, k) * xv ** (e - k)
                out[self._pos[kappa]] += term
        return out

    # -- arithmetic --------------------------------------------------------

    def mul(self, a, b) -> np.ndarray:
        """Truncated product; broadcasts over leading (tensor) axes."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        ia, ib, ic, starts = self._mul_tables()
        if active_backend() == "cython":
            lead = np.broadcast_shapes(a.shape[:-1], b.shape[:-1])
            af = np.ascontiguousarray(
                np.broadcast_to(a, lead + (self.ncoeff,)), dtype=float
            ).reshape(-1, self.ncoeff)
            bf = np.ascontiguousarray(
                np.broadcast_to(b, lead + (self.ncoeff,)), dtype=float
            ).reshape(-1, self.ncoeff)
            out = _jetkern.conv_pairs(af, bf, ia, ib, ic, self.ncoeff)
            return out.reshape(lead + (self.ncoeff,))
        prod = a[..., ia] * b[..., ib]
        return np.add.reduceat(prod, starts, axis=-1)

    def matmul(self, a, b) -> np.ndarray:
        """Jet-entry matrix product: (..., p, q, N) @ (..., q, r, N)."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        ia, ib, ic, starts = self._mul_tables()
        if active_backend() == "cython" and a.ndim == 3 and b.ndim == 3:
            out = _jetkern.conv_matmul(
                np.ascontiguousarray(a), np.ascontiguousarray(b), ia, ib, ic, self.ncoeff
            )
            return out
        prod = np.einsum("...pqt,...qrt->...prt", a[..., ia], b[..., ib])
        return np.add.reduceat(prod, starts, axis=-1)

    def reciprocal(self, a) -> np.ndarray:
        """Jet of 1/a; requires a nonzero value coefficient."""
        a = np.asarray(a, dtype=float)
        lead = a[..., :1]
        if np.any(lead == 0.0):
            raise ZeroDivisionError("jet reciprocal of a jet with zero value")
        u = a / lead
        u[..., 0] = 0.0
        total = self.constant(np.ones(a.shape[:-1]))
        term = total
        for _ in range(self.order):
            term = self.mul(term, -u)
            total = total + term
        return total / lead

    def inv(self, a) -> np.ndarray:
        """Inverse of a jet-valued square matrix (..., m, m, N)."""
        a = np.asarray(a, dtype=float)
        m = a.shape[-2]
        a0 = a[..., 0]
        a0inv = np.linalg.inv(a0)
        if self.order == 0:
            return a0inv[..., None]
        strict = a.copy()
        strict[..., 0] = 0.0
        # A = A0 (I + A0^-1 A1) with A1 of positive jet degree, so the
        # Neumann series terminates at the truncation order.
        b = self.matmul(self.constant(a0inv), strict)
        total = self.eye(m) + np.zeros_like(a)
        term = total
        for _ in range(self.order):
            term = self.matmul(-b, term)
            total = total + term
        return self.matmul(total, self.constant(a0inv))

    # -- structure maps ----------------------------------------------------

    def _deriv_map(self, i: int):
        if i not in self._deriv_maps:
            sub = jet_space(self.dim, self.order - 1)
            src = np.empty(sub.ncoeff, dtype=np.intp)
            fac = np.empty(sub.ncoeff)
            for p in range(sub.ncoeff):
                kappa = tuple(sub.mindex[p])
                shifted = tuple(
                    k + 1 if j == i else k for j, k in enumerate(kappa)
                )
                src[p] = self._pos[shifted]
                fac[p] = kappa[i] + 1
            self._deriv_maps[i] = (src, fac)
        return self._deriv_maps[i]

    def deriv(self, a, i: int) -> np.ndarray:
        """Partial derivative along variable ``i`` as an order-1-lower jet."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        src, fac = self._deriv_map(i)
        return np.asarray(a)[..., src] * fac

    def derivs(self, a) -> np.ndarray:
        """All partials, stacked on a new axis before the coefficient axis."""
        return np.stack([self.deriv(a, i) for i in range(self.dim)], axis=-2)

    def truncate(self, a, order: int) -> np.ndarray:
        """Project onto the jet space of the same dim at a lower order."""
        if order == self.order:
            return np.asarray(a, dtype=float)
        if order > self.order:
            raise ValueError("cannot truncate upward")
        if order not in self._trunc_maps:
            sub = jet_space(self.dim, order)
            self._trunc_maps[order] = np.array(
                [self._pos[tuple(k)] for k in sub.mindex], dtype=np.intp
            )
        return np.asarray(a)[..., self._trunc_maps[order]]

    def lift(self, a, src: "JetSpace", var_offset: int = 0) -> np.ndarray:
        """Embed jets over a variable window into this (larger) space.

        Source variable ``j`` becomes variable ``var_offset + j``; all
        derivatives in the complementary variables vanish.  Requires
        ``src.order >= self.order`` so no coefficient is missing.
        """
        if src.order < self.order:
            raise ValueError("source order too low for a faithful lift")
        key = (src.dim, src.order, var_offset)
        if key not in self._lift_maps:
            dst_idx, src_idx = [], []
            lo, hi = var_offset, var_offset + src.dim
            for p in range(self.ncoeff):
                kappa = tuple(self.mindex[p])
                if any(k != 0 for j, k in enumerate(kappa) if not lo <= j < hi):
                    continue
                dst_idx.append(p)
                src_idx.append(src._pos[kappa[lo:hi]])
            self._lift_maps[key] = (
                np.array(dst_idx, dtype=np.intp),
                np.array(src_idx, dtype=np.intp),
            )
        dst_idx, src_idx = self._lift_maps[key]
        a = np.asarray(a, dtype=float)
        out = np.zeros(a.shape[:-1] + (self.ncoeff,))
        out[..., dst_idx] = a[..., src_idx]
        return out


# -- polynomial fields ------------------------------------------------------


def _canonical_monomials(dim, monomials):
    acc: dict[tuple[int, ...], float] = {}
    for exps, coeff in monomials:
        exps = tuple(int(e) for e in exps)
        if len(exps) != dim:
            raise ValueError(f"exponent tuple {exps} does not have length {dim}")
        if any(e < 0 for e in exps):
            raise ValueError(f"negative exponent in {exps}")
        acc[exps] = acc.get(exps, 0.0) + float(coeff)
    return tuple(
        (exps, coeff) for exps, coeff in sorted(acc.items()) if coeff != 0.0
    )


@dataclass(frozen=True)
class PolyField:
    """Multivariate polynomial scalar field in chart coordinates.

    Stored canonically: exponent tuples sorted, duplicates merged, zero
    coefficients dropped, so equality is structural.
    """

    dim: int
    monomials: tuple[tuple[tuple[int, ...], float], ...]

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("field dimension must be positive")
        object.__setattr__(
            self, "monomials", _canonical_monomials(self.dim, self.monomials)
        )

    # constructors

    @staticmethod
    def zero(dim: int) -> "PolyField":
        return PolyField(dim, ())

    @staticmethod
    def constant(dim: int, value: float) -> "PolyField":
        return PolyField(dim, (((0,) * dim, value),))

    @staticmethod
    def coordinate(dim: int, i: int) -> "PolyField":
        exps = tuple(1 if j == i else 0 for j in range(dim))
        return PolyField(dim, ((exps, 1.0),))

    # queries

    @property
    def degree(self) -> int:
        return max((sum(e) for e, _ in self.monomials), default=0)

    def is_zero(self) -> bool:
        return not self.monomials

    def eval(self, x) -> float:
        x = np.asarray(x, dtype=float)
        total = 0.0
        for exps, coeff in self.monomials:
            term = coeff
            for e, xv in zip(exps, x):
                term *= xv**e
            total += term
        return total

    def deriv(self, i: int) -> "PolyField":
        terms = []
        for exps, coeff in self.monomials:
            if exps[i] == 0:
                continue
            new = tuple(e - 1 if j == i else e for j, e in enumerate(exps))
            terms.append((new, coeff * exps[i]))
        return PolyField(self.dim, tuple(terms))

    # ring operations

    def _coerce(self, other):
        if isinstance(other, PolyField):
            if other.dim != self.dim:
                raise ValueError("polynomial dimensions differ")
            return other
        return PolyField.constant(self.dim, float(other))

    def __add__(self, other):
        other = self._coerce(other)
        return PolyField(self.dim, self.monomials + other.monomials)

    __radd__ = __add__

    def __neg__(self):
        return PolyField(self.dim, tuple((e, -c) for e, c in self.monomials))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return PolyField(
                self.dim, tuple((e, c * other) for e, c in self.monomials)
            )
        other = self._coerce(other)
        terms = []
        for ea, ca in self.monomials:
            for eb, cb in other.monomials:
                terms.append((tuple(x + y for x, y in zip(ea, eb)), ca * cb))
        return PolyField(self.dim, tuple(terms))

    __rmul__ = __mul__


# -- scalar jet wrapper ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Jet:
    """One truncated Taylor expansion: value plus normalized derivatives."""

    dim: int
    order: int
    coeffs: np.ndarray

    @property
    def space(self) -> JetSpace:
        return jet_space(self.dim, self.order)

    @property
    def value(self) -> float:
        return float(self.coeffs[0])

    @property
    def gradient(self) -> np.ndarray:
        return np.asarray(self.coeffs)[self.space.grad_positions]

    def coefficient(self, kappa) -> float:
        """Taylor coefficient at a multi-index (derivative / kappa!)."""
        return float(self.coeffs[self.space.position(kappa)])

    def derivative(self, kappa) -> float:
        """Plain partial derivative at a multi-index (factorial restored)."""
        kappa = tuple(kappa)
        fact = 1.0
        for k in kappa:
            fact *= math.factorial(k)
        return self.coefficient(kappa) * fact

    def _check(self, other: "Jet"):
        if self.dim != other.dim or self.order != other.order:
            raise ValueError(
                f"jet mismatch: ({self.dim}, {self.order}) vs "
                f"({other.dim}, {other.order})"
            )

    def __add__(self, other):
        self._check(other)
        return Jet(self.dim, self.order, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return Jet(self.dim, self.order, self.coeffs - other.coeffs)

    def __mul__(self, other):
        self._check(other)
        return Jet(self.dim, self.order, self.space.mul(self.coeffs, other.coeffs))

    def reciprocal(self) -> "Jet":
        return Jet(self.dim, self.order, self.space.reciprocal(self.coeffs))


def jet_eval(field: PolyField, x, order: int) -> Jet:
    """Exact order-``order`` jet of a polynomial field at a point."""
    space = jet_space(field.dim, order)
    return Jet(field.dim, order, space.from_poly(field, x))


def jet_add(a: Jet, b: Jet) -> Jet:
    return a + b


def jet_sub(a: Jet, b: Jet) -> Jet:
    return a - b


def jet_mul(a: Jet, b: Jet) -> Jet:
    return a * b


def jet_reciprocal(a: Jet) -> Jet:
    return a.reciprocal()
