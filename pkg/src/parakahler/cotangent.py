"""Geometry on the cotangent bundle of a chart.

Everything here is evaluated per cotangent point ``(x, xi)`` as jets in
the ``2n`` chart variables (base first, fiber second; ``xi`` stores the
canonical momenta).  The central object is the modified metric

    h = h0 - pullback(Sym P) + q

where ``h0`` is the Patterson-Walker metric of the connection, ``P`` its
Rho tensor and ``q`` the structure's fiber-quadratic correction.  Its
symplectic partner carries the same 1/2 normalization as the symmetric
product in ``h0`` (see :mod:`parakahler.conventions`), which is what makes
the induced endomorphism square to the identity.

``q_tensor`` always computes the correction twice, from the generic
bracket pairing and from the structure closed form, and refuses to return
if the two disagree; that guards every metric assembly against sign and
flattening regressions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .connections import (
    Connection,
    StructureSpec,
    algebraic_bracket,
    christoffel_eval,
    ricci,
)
from .errors import ConventionError, DegenerateMetricError
from .jets import jet_space
from .rho import rho_closed_form, rho_from_ricci
from .tensors import alt, momentum_from_matrix, sym

Q_AGREEMENT_TOL = 1e-12

#: Metric-assembly corruptions used by the sensitivity (negative-control)
#: checks; every one of them must break the Einstein certification.
CORRUPTIONS = ("drop_q", "flip_sym_p", "swapped_ricci", "double_q")


@dataclass(frozen=True, eq=False)
class CotangentPoint:
    """A point of T*M in canonical chart coordinates (x, xi)."""

    x: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        xi = np.atleast_1d(np.asarray(self.xi, dtype=float))
        if x.shape != xi.shape or x.ndim != 1:
            raise ValueError("x and xi must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(xi))):
            raise ValueError("cotangent point coordinates must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "xi", xi)

    @property
    def dim(self) -> int:
        return self.x.shape[0]

    @staticmethod
    def from_matrix(spec: StructureSpec, x, z) -> "CotangentPoint":
        """Grassmannian point with the covector given as an m x n matrix."""
        if spec.kind != "grassmannian":
            raise ValueError("matrix covectors only exist on matrix charts")
        xi = momentum_from_matrix(np.asarray(z, dtype=float), spec.m, spec.n)
        return CotangentPoint(np.asarray(x, dtype=float), xi)


def tautological(spec: StructureSpec, p: CotangentPoint) -> np.ndarray:
    """Components of the tautological one-form at p: (xi, 0)."""
    d = spec.dim
    if p.dim != d:
        raise ValueError("point dimension does not match the structure")
    out = np.zeros(2 * d)
    out[:d] = p.xi
    return out


def tau_refined(spec: StructureSpec, p: CotangentPoint) -> np.ndarray:
    """Matrix-valued refinement of the tautological form, (m, m, 2n).

    ``tau_refined[..., i]`` is the m x m matrix value on the i-th
    coordinate direction: z @ E_{pq} on the base direction x^{pq}, zero on
    fiber directions.  Its pointwise trace recovers ``tautological``.
    """
    if spec.kind != "grassmannian":
        raise ValueError("tau_refined is only defined on matrix charts")
    m, n = spec.m, spec.n
    d = spec.dim
    z = np.empty((m, n))
    for pp in range(n):
        for qq in range(m):
            z[qq, pp] = p.xi[pp * m + qq]
    out = np.zeros((m, m, 2 * d))
    for pp in range(n):
        for qq in range(m):
            out[:, qq, pp * m + qq] = z[:, pp]
    return out


def _fiber_jets(space, d: int, xi) -> np.ndarray:
    """Coordinate jets of the canonical momenta, stacked (d, N)."""
    return np.stack([space.coordinate(d + k, xi[k]) for k in range(d)])


def q_generic_value(spec: StructureSpec, p: CotangentPoint) -> np.ndarray:
    """q on base directions from the bracket pairing, as a (d, d) value.

    q(X, Y) = -1/2 alpha({X, alpha}(Y)) with alpha the covector of the
    point; the dual bracket action on covectors is minus the transpose of
    the action on vectors, which is where the sign comes from.
    """
    d = spec.dim
    out = np.empty((d, d))
    for i in range(d):
        e_i = np.zeros(d)
        e_i[i] = 1.0
        a = algebraic_bracket(spec, e_i, p.xi, p.x)
        out[i] = -0.5 * (p.xi @ a)
    return out


def q_tensor(
    spec: StructureSpec, p: CotangentPoint, order: int = 0, check: bool = True
) -> np.ndarray:
    """Fiber-quadratic correction q as (2d, 2d, N) jets.

    Semibasic (only the base x base block is populated), symmetric, and
    homogeneous of degree two in the fiber.  With ``check`` the closed
    form is compared against the generic bracket route at the point value
    and a mismatch raises :class:`ConventionError`.
    """
    d = spec.dim
    ts = jet_space(2 * d, order)
    xi_jets = _fiber_jets(ts, d, p.xi)
    if spec.kind == "projective":
        base = -ts.mul(xi_jets[:, None, :], xi_jets[None, :, :])
    elif spec.kind == "conformal":
        base_space = jet_space(d, order)
        gb = spec.metric_jets(p.x, order)
        g2 = ts.lift(gb, base_space, var_offset=0)
        ginv2 = ts.lift(base_space.inv(gb), base_space, var_offset=0)
        norm2 = ts.mul(
            ginv2, ts.mul(xi_jets[:, None, :], xi_jets[None, :, :])
        ).sum(axis=(0, 1))
        base = -ts.mul(xi_jets[:, None, :], xi_jets[None, :, :]) + 0.5 * ts.mul(
            norm2, g2
        )
    elif spec.kind == "grassmannian":
        m = spec.m
        ia = np.empty((d, d), dtype=np.intp)
        jb = np.empty((d, d), dtype=np.intp)
        for i in range(d):
            pi, qi = divmod(i, m)
            for j in range(d):
                pj, qj = divmod(j, m)
                ia[i, j] = pi * m + qj
                jb[i, j] = pj * m + qi
        base = -ts.mul(xi_jets[ia], xi_jets[jb])
    else:
        raise ValueError(f"unknown structure kind {spec.kind!r}")
    if check:
        generic = q_generic_value(spec, p)
        diff = float(np.max(np.abs(generic - base[..., 0])))
        if diff > Q_AGREEMENT_TOL:
            raise ConventionError(
                f"generic and closed-form q disagree by {diff:.3e} "
                f"(> {Q_AGREEMENT_TOL:.1e}) for {spec.kind}"
            )
    out = ts.zeros((2 * d, 2 * d))
    out[:d, :d] = base
    return out


def patterson_walker(conn: Connection, p: CotangentPoint, order: int = 2) -> np.ndarray:
    """Patterson-Walker metric of a connection as (2d, 2d, N) jets.

    Base block -Gamma^k_{ij} xi_k, mixed block delta/2, fiber block zero.
    """
    d = conn.dim
    if p.dim != d:
        raise ValueError("point dimension does not match the connection")
    ts = jet_space(2 * d, order)
    base_space = jet_space(d, order)
    gam = ts.lift(christoffel_eval(conn, p.x, order), base_space, var_offset=0)
    xi_jets = _fiber_jets(ts, d, p.xi)
    h = ts.zeros((2 * d, 2 * d))
    h[:d, :d] = -ts.mul(gam, xi_jets[:, None, None, :]).sum(axis=0)
    for i in range(d):
        h[i, d + i, 0] = 0.5
        h[d + i, i, 0] = 0.5
    return h


def modified_metric(
    spec: StructureSpec,
    conn: Connection,
    p: CotangentPoint,
    order: int = 2,
    corruption: str | None = None,
    rho_jets: np.ndarray | None = None,
) -> np.ndarray:
    """The Einstein modification h = h0 - pullback(Sym P) + q as jets.

    ``corruption`` deliberately breaks one ingredient (one of
    ``CORRUPTIONS``); the verification suite uses this to demonstrate its
    own sensitivity.  ``rho_jets`` allows reuse of a precomputed Rho.
    """
    if corruption is not None and corruption not in CORRUPTIONS:
        raise ValueError(f"unknown corruption {corruption!r}")
    d = spec.dim
    ts = jet_space(2 * d, order)
    h = patterson_walker(conn, p, order)
    if corruption == "swapped_ricci":
        ric = ricci(conn, p.x, order, convention="swapped")
        rho = rho_from_ricci(spec, ric, p.x, order)
    elif rho_jets is not None:
        rho = rho_jets
    else:
        rho = rho_closed_form(spec, conn, p.x, order)
    sym_rho = ts.lift(sym(rho), jet_space(d, order), var_offset=0)
    if corruption == "flip_sym_p":
        h[:d, :d] += sym_rho
    else:
        h[:d, :d] -= sym_rho
    if corruption != "drop_q":
        q = q_tensor(spec, p, order)
        h += 2.0 * q if corruption == "double_q" else q
    det = np.linalg.det(h[..., 0])
    if abs(det) < 1e-300:
        raise DegenerateMetricError(f"metric degenerate at x={p.x}, xi={p.xi}")
    return h


def symplectic_form(
    spec: StructureSpec,
    conn: Connection,
    p: CotangentPoint,
    sign: int = 1,
    order: int = 1,
) -> np.ndarray:
    """Symplectic partner of the modified metric as (2d, 2d, N) jets.

    Mixed block Omega(d/dx^i, d/dxi_j) = delta/2 and base block
    sign * Alt(P); metric and form are then the symmetric/alternating
    parts of one underlying 2-tensor (same 1/2 weight), the normalization
    under which the para-complex endomorphism squares to the identity.
    """
    if sign not in (1, -1):
        raise ValueError("omega sign must be +1 or -1")
    d = spec.dim
    ts = jet_space(2 * d, order)
    om = ts.zeros((2 * d, 2 * d))
    for i in range(d):
        om[i, d + i, 0] = 0.5
        om[d + i, i, 0] = -0.5
    rho = rho_closed_form(spec, conn, p.x, order)
    om[:d, :d] = sign * ts.lift(alt(rho), jet_space(d, order), var_offset=0)
    return om


def para_complex(h_val: np.ndarray, om_val: np.ndarray) -> np.ndarray:
    """Endomorphism I with h(I X, Y) = Omega(X, Y), as a matrix I^A_B."""
    h_val = np.asarray(h_val, dtype=float)
    om_val = np.asarray(om_val, dtype=float)
    try:
        return -np.linalg.solve(h_val, om_val)
    except np.linalg.LinAlgError as exc:
        raise DegenerateMetricError("metric is singular") from exc
