"""The Rho (Schouten) tensor of a compatible connection, two ways.

The defining property: the Ricci-type contraction of the bracket
derivative ``dP(X, Y) = {X, P(Y, .)} - {Y, P(X, .)}`` must reproduce the
Ricci tensor of the connection.  ``rho_generic`` solves that linear system
built purely from the structure bracket; ``rho_closed_form`` evaluates the
per-structure closed formulas.  Each validates the other, which is the
module's central oracle pair.

Closed forms (with Sym/Alt carrying the factor 1/2 and n the chart dim):

* projective:   P = Sym Ric/(n-1) + Alt Ric/(n+1)
* conformal:    P = Sym0 Ric/(n-2) + Alt Ric/n + g tr_g#(Ric)/(n(2n-2))
* matrix chart: P = Ric^ss/(m+n-2) + Ric^aa/(m+n+2)
                  + (Ric^sa + Ric^as)/(m+n)

where Sym0 is the g-trace-free symmetric part and the ^ss.. pieces are
the twist-eigenparts of :func:`parakahler.tensors.grass_split`.  The
conformal trace coefficient 1/(n(2n-2)) is forced by the contraction
identity g tr(Ric) = (2n-2) g tr(P), equivalently by the Levi-Civita
specialization to the classical Schouten tensor.  The matrix-chart
eigenvalues come from the contraction identity

    contraction(dP) = (m+n) P - t_E o P - P o t_F,

whose trace coefficients follow from tracing the two bracket terms
(right-composition contributes n tr, left-composition m tr); at m = 1
everything collapses to the projective formula.  Both corrections are
pinned by the generic solver and, ultimately, by the Einstein property
of the assembled metric.
"""

from __future__ import annotations

import numpy as np

from .connections import Connection, StructureSpec, bracket_tensor, ricci
from .errors import UnsupportedStructureError
from .jets import jet_space
from .tensors import grass_split, sym, alt


def partial_rho(spec: StructureSpec, p: np.ndarray, x=None, order: int = 0) -> np.ndarray:
    """Bracket derivative dP as a 4-index array T[k, l, i, j].

    ``T[k, l, i, j]`` is the component along d_k of
    ``({d_i, P(d_j, .)} - {d_j, P(d_i, .)})(d_l)``; antisymmetric in
    (i, j) by construction.  Accepts a numeric (n, n) bilinear or a
    jet-valued (n, n, N) one.
    """
    p = np.asarray(p, dtype=float)
    br = bracket_tensor(spec, x, order)
    sp = jet_space(spec.dim, order)
    if p.ndim == 2:
        p = sp.constant(p)
    # T1[k, l, i, j] = sum_m P[j, m] Br[k, l, i, m] (jet product), then
    # antisymmetrize in (i, j).
    prod = sp.mul(p[None, None, None, :, :, :], br[:, :, :, None, :, :])
    t1 = prod.sum(axis=4)
    return t1 - np.swapaxes(t1, 2, 3)


def ricci_type_contraction(t: np.ndarray) -> np.ndarray:
    """C_ij = T^k_{jki} in the curvature index layout (trace first slot)."""
    return np.einsum("kjki...->ij...", np.asarray(t, dtype=float))


def _solver_matrix(spec: StructureSpec, x, order: int) -> np.ndarray:
    """Jets of the linear map vec(P) -> vec(contraction(dP))."""
    d = spec.dim
    sp = jet_space(d, order)
    br = bracket_tensor(spec, x, order)
    eye = np.eye(d)
    dtrace = np.einsum("kjkm...->jm...", br)
    # C_ij = sum_m P_im D[j, m] - sum_{k,m} P_km Br[k, j, i, m]
    lmat = np.einsum(
        "ir,js...->ijrs...", eye, dtrace
    ) - np.einsum("rjis...->ijrs...", br)
    return lmat.reshape(d * d, d * d, sp.ncoeff)


def rho_generic(spec: StructureSpec, conn: Connection, x, order: int = 0) -> np.ndarray:
    """Rho tensor from the normalization condition, solved per point.

    Builds the system matrix by feeding basis bilinears through the
    structure bracket, then solves contraction(dP) = Ric(nabla) in jet
    arithmetic (the matrix is metric-dependent for conformal structures).
    """
    d = spec.dim
    sp = jet_space(d, order)
    ric = ricci(conn, x, order)
    lmat = _solver_matrix(spec, x, order)
    if abs(np.linalg.det(lmat[..., 0])) < 1e-10:
        raise UnsupportedStructureError(
            f"normalization system is singular for {spec.kind} dim {d}"
        )
    rhs = ric.reshape(d * d, 1, sp.ncoeff)
    sol = sp.matmul(sp.inv(lmat), rhs)
    return sol.reshape(d, d, sp.ncoeff)


def rho_closed_form(spec: StructureSpec, conn: Connection, x, order: int = 0) -> np.ndarray:
    """Rho tensor from the per-structure closed formula (jet-valued)."""
    d = spec.dim
    sp = jet_space(d, order)
    ric = ricci(conn, x, order)
    return rho_from_ricci(spec, ric, x, order)


def rho_from_ricci(spec: StructureSpec, ric: np.ndarray, x=None, order: int = 0) -> np.ndarray:
    """Closed-form Rho given (jets of) the Ricci tensor of the connection."""
    d = spec.dim
    sp = jet_space(d, order)
    ric = np.asarray(ric, dtype=float)
    if ric.ndim == 2:
        ric = sp.constant(ric)
    if spec.kind == "projective":
        n = spec.n
        return sym(ric) / (n - 1) + alt(ric) / (n + 1)
    if spec.kind == "conformal":
        n = spec.n
        g = spec.metric_jets(x, order)
        ginv = sp.inv(g)
        symric = sym(ric)
        tr = sp.mul(ginv, symric).sum(axis=(0, 1))
        trpart = sp.mul(tr, g)
        sym0 = symric - trpart / n
        return sym0 / (n - 2) + alt(ric) / n + trpart / (n * (2 * n - 2))
    if spec.kind == "grassmannian":
        m, n = spec.m, spec.n
        ss, aa, sa, as_ = grass_split(ric, m, n)
        return ss / (m + n - 2) + aa / (m + n + 2) + (sa + as_) / (m + n)
    raise ValueError(f"unknown structure kind {spec.kind!r}")
