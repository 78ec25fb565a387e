"""Torsion-free connections on chart domains.

A `Connection` stores its Christoffel symbols as polynomial fields, so
every derivative the curvature pipeline needs is exact.  The
`StructureSpec` tags the geometry (projective, conformal, or an (m, n)
matrix chart) and selects the algebraic bracket used by gauge transforms
and by the Rho-tensor machinery.

Curvature components follow ``R(d_i, d_j) d_l = R^k_{lij} d_k`` and the
Ricci tensor traces the *first* curvature argument,
``Ric_ij = R^k_{jki}`` (see :mod:`parakahler.conventions`).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .conventions import JET_ORDER_MAX
from .errors import ConventionError, TorsionError, UnsupportedStructureError
from .jets import PolyField, jet_space
from .tensors import matrix_from_momentum

TORSION_TOL = 1e-12


def _as_field_grid(dim, data, shape):
    """Coerce nested data (numbers or PolyFields) to a tuple grid."""

    def coerce(v):
        if isinstance(v, PolyField):
            if v.dim != dim:
                raise ValueError("polynomial field has wrong dimension")
            return v
        return PolyField.constant(dim, float(v))

    def build(node, dims):
        if not dims:
            return coerce(node)
        items = list(node)
        if len(items) != dims[0]:
            raise ValueError(f"expected {dims[0]} entries, got {len(items)}")
        return tuple(build(it, dims[1:]) for it in items)

    return build(data, list(shape))


@dataclass(frozen=True)
class Connection:
    """Symmetric Christoffel-symbol field Gamma^k_{ij} on an n-dim chart."""

    dim: int
    gamma: tuple  # gamma[k][i][j] -> PolyField

    @staticmethod
    def flat(dim: int) -> "Connection":
        zero = PolyField.zero(dim)
        row = tuple(tuple(zero for _ in range(dim)) for _ in range(dim))
        return Connection(dim, tuple(row for _ in range(dim)))

    @staticmethod
    def from_entries(dim, entries, *, check: bool = True) -> "Connection":
        """Build from a dict {(k, i, j): PolyField | number} or nested grid.

        Symmetric counterparts are filled in automatically for dict input;
        with ``check`` the polynomial symmetry Gamma^k_{ij} = Gamma^k_{ji}
        is enforced.
        """
        if isinstance(entries, dict):
            grid = [
                [[PolyField.zero(dim) for _ in range(dim)] for _ in range(dim)]
                for _ in range(dim)
            ]
            for (k, i, j), f in entries.items():
                f = f if isinstance(f, PolyField) else PolyField.constant(dim, float(f))
                grid[k][i][j] = grid[k][i][j] + f
                if i != j:
                    grid[k][j][i] = grid[k][j][i] + f
            gamma = tuple(tuple(tuple(r) for r in plane) for plane in grid)
        else:
            gamma = _as_field_grid(dim, entries, (dim, dim, dim))
        conn = Connection(dim, gamma)
        if check:
            for k in range(dim):
                for i in range(dim):
                    for j in range(i):
                        if gamma[k][i][j] != gamma[k][j][i]:
                            raise TorsionError(
                                f"Gamma^{k}_{{{i}{j}}} != Gamma^{k}_{{{j}{i}}} "
                                "as polynomial fields"
                            )
        return conn

    def max_degree(self) -> int:
        return max(
            (self.gamma[k][i][j].degree
             for k in range(self.dim)
             for i in range(self.dim)
             for j in range(self.dim)),
            default=0,
        )


def christoffel_eval(conn: Connection, x, order: int) -> np.ndarray:
    """Jets of all Christoffel symbols at a point: (n, n, n, N)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (conn.dim,):
        raise ValueError(f"point has shape {x.shape}, expected ({conn.dim},)")
    sp = jet_space(conn.dim, order)
    n = conn.dim
    out = np.empty((n, n, n, sp.ncoeff))
    for k in range(n):
        for i in range(n):
            for j in range(i, n):
                jet = sp.from_poly(conn.gamma[k][i][j], x)
                out[k, i, j] = jet
                if i != j:
                    out[k, j, i] = sp.from_poly(conn.gamma[k][j][i], x)
    return out


def torsion(conn: Connection, x) -> np.ndarray:
    """T^k_{ij} = Gamma^k_{ij} - Gamma^k_{ji}; rejects nonzero torsion."""
    g0 = christoffel_eval(conn, x, 0)[..., 0]
    t = g0 - np.swapaxes(g0, 1, 2)
    worst = float(np.max(np.abs(t))) if t.size else 0.0
    if worst > TORSION_TOL:
        raise TorsionError(
            f"connection has torsion {worst:.3e} > {TORSION_TOL:.1e} at x={x}"
        )
    return t


def curvature(conn: Connection, x, order: int = 0) -> np.ndarray:
    """Jet-valued curvature R^k_{lij} (n, n, n, n, N) at a point."""
    if order + 1 > JET_ORDER_MAX:
        raise ValueError(
            f"curvature at order {order} needs Christoffel jets of order "
            f"{order + 1} > {JET_ORDER_MAX}"
        )
    n = conn.dim
    sp1 = jet_space(n, order + 1)
    g1 = christoffel_eval(conn, x, order + 1)
    dg = sp1.derivs(g1)                      # dg[k, i, j, m] = d_m Gamma^k_{ij}
    gam = sp1.truncate(g1, order)
    sp = jet_space(n, order)
    term1 = np.einsum("kjli...->klij...", dg)   # d_i Gamma^k_{jl}
    term2 = np.einsum("kilj...->klij...", dg)   # d_j Gamma^k_{il}
    # Q[k, i, j, l] = Gamma^k_{im} Gamma^m_{jl}
    q = sp.matmul(
        gam.reshape(n * n, n, sp.ncoeff), gam.reshape(n, n * n, sp.ncoeff)
    ).reshape(n, n, n, n, sp.ncoeff)
    qt1 = np.einsum("kijl...->klij...", q)
    qt2 = np.einsum("kjil...->klij...", q)
    return term1 - term2 + qt1 - qt2


def ricci(conn: Connection, x, order: int = 0, convention: str = "first") -> np.ndarray:
    """Jet-valued Ricci tensor (n, n, N), tracing the first curvature slot.

    ``convention="swapped"`` traces the second slot instead; it exists for
    convention debugging only and is what the sensitivity controls use.
    """
    r = curvature(conn, x, order)
    if convention == "first":
        return np.einsum("kjki...->ij...", r)
    if convention == "swapped":
        return np.einsum("kjik...->ij...", r)
    raise ValueError(f"unknown Ricci convention {convention!r}")


# -- geometric structures ----------------------------------------------------


@dataclass(frozen=True)
class StructureSpec:
    """Tagged descriptor of the geometry on the chart.

    ``kind`` selects the bracket, Rho and fiber-quadratic formulas.  For
    matrix charts, ``m`` and ``n`` are the two ranks and the chart
    dimension is ``m * n``; otherwise ``n`` is the chart dimension.
    """

    kind: str
    n: int
    m: int = 1
    metric: tuple | None = field(default=None, compare=False)
    beta: tuple | None = field(default=None, compare=False)

    @property
    def dim(self) -> int:
        return self.m * self.n if self.kind == "grassmannian" else self.n

    @staticmethod
    def projective(n: int) -> "StructureSpec":
        if n < 2:
            raise UnsupportedStructureError(
                "projective structure needs n >= 2 (the closed Rho formula "
                "divides by n - 1)"
            )
        return StructureSpec("projective", n)

    @staticmethod
    def conformal(g, beta=None) -> "StructureSpec":
        g = np.asarray(g, dtype=object) if not isinstance(g, np.ndarray) else g
        n = len(g)
        if n < 3:
            raise UnsupportedStructureError(
                "conformal structure needs n >= 3 (the closed Rho formula "
                "divides by n - 2)"
            )
        grid = _as_field_grid(n, g, (n, n))
        for i in range(n):
            for j in range(i):
                if grid[i][j] != grid[j][i]:
                    raise ValueError("conformal metric must be symmetric")
        if beta is None:
            beta = [PolyField.zero(n)] * n
        bgrid = _as_field_grid(n, beta, (n,))
        spec = StructureSpec("conformal", n, metric=grid, beta=bgrid)
        # pointwise invertibility, probed on a deterministic sample
        rng = np.random.default_rng(20240917)
        for _ in range(8):
            xs = rng.uniform(-1.0, 1.0, size=n)
            gv = spec.metric_value(xs)
            if abs(np.linalg.det(gv)) < 1e-10:
                raise ValueError(f"conformal metric is singular near x={xs}")
        return spec

    @staticmethod
    def grassmannian(m: int, n: int) -> "StructureSpec":
        if m < 1 or n < 1 or m * n < 2:
            raise UnsupportedStructureError(
                "matrix chart needs m, n >= 1 and m*n >= 2 (the closed Rho "
                "formula divides by m*n - 1)"
            )
        return StructureSpec("grassmannian", n, m=m)

    # conformal data access

    def metric_value(self, x) -> np.ndarray:
        g = np.empty((self.n, self.n))
        for i in range(self.n):
            for j in range(self.n):
                g[i, j] = self.metric[i][j].eval(x)
        return g

    def metric_jets(self, x, order: int) -> np.ndarray:
        sp = jet_space(self.n, order)
        out = np.empty((self.n, self.n, sp.ncoeff))
        for i in range(self.n):
            for j in range(self.n):
                out[i, j] = sp.from_poly(self.metric[i][j], x)
        return out

    def beta_value(self, x) -> np.ndarray:
        return np.array([b.eval(x) for b in self.beta])

    def metric_is_constant(self) -> bool:
        return all(
            self.metric[i][j].degree == 0
            for i in range(self.n)
            for j in range(self.n)
        )


# -- algebraic bracket -------------------------------------------------------


def algebraic_bracket(spec: StructureSpec, vec, cov, x=None) -> np.ndarray:
    """Endomorphism matrix A with {X, alpha}(Y)^k = A[k, j] Y^j.

    ``vec`` and ``cov`` are canonical chart components.  The conformal
    bracket needs the metric at the point, hence ``x``.
    """
    d = spec.dim
    vec = np.asarray(vec, dtype=float)
    cov = np.asarray(cov, dtype=float)
    if vec.shape != (d,) or cov.shape != (d,):
        raise ValueError("vector/covector components must have the chart dimension")
    if spec.kind == "projective":
        return cov @ vec * np.eye(d) + np.outer(vec, cov)
    if spec.kind == "conformal":
        if x is None:
            raise ValueError("conformal bracket needs the base point")
        g = spec.metric_value(x)
        ginv = np.linalg.inv(g)
        return (
            cov @ vec * np.eye(d)
            + np.outer(vec, cov)
            - np.outer(ginv @ cov, g @ vec)
        )
    if spec.kind == "grassmannian":
        m, n = spec.m, spec.n
        xm = vec.reshape(n, m)
        z = matrix_from_momentum(cov, m, n)
        xz = xm @ z                         # n x n
        zx = z @ xm                         # m x m
        a = np.einsum("ra,sb->rsab", xz, np.eye(m)) + np.einsum(
            "ra,bs->rsab", np.eye(n), zx
        )
        return a.reshape(d, d)
    raise ValueError(f"unknown structure kind {spec.kind!r}")


def bracket_tensor(spec: StructureSpec, x, order: int = 0) -> np.ndarray:
    """Jets of Br[k, l, i, m]: component k of {d_i, dx^m}(d_l).

    Constant for projective and matrix charts; metric-dependent (hence
    jet-valued) for conformal structures.
    """
    d = spec.dim
    sp = jet_space(d, order)
    eye = np.eye(d)
    if spec.kind in ("projective", "conformal"):
        const = np.einsum("mi,kl->klim", eye, eye) + np.einsum(
            "ml,ki->klim", eye, eye
        )
        if spec.kind == "projective":
            return sp.constant(const)
        g = spec.metric_jets(x, order)
        ginv = sp.inv(g)
        # g_{il} * ginv^{km} as a jet outer product
        corr = sp.mul(
            ginv[:, None, None, :, :], g[None, :, :, None, :]
        )
        return sp.constant(const) - corr
    if spec.kind == "grassmannian":
        m, n = spec.m, spec.n
        br = np.zeros((d, d, d, d))
        for p in range(n):
            for q in range(m):
                i = p * m + q
                for pp in range(n):
                    for qq in range(m):
                        mm = pp * m + qq
                        if q == qq:
                            for b in range(m):
                                br[p * m + b, pp * m + b, i, mm] += 1.0
                        if p == pp:
                            for a in range(n):
                                br[a * m + q, a * m + qq, i, mm] += 1.0
        return sp.constant(br)
    raise ValueError(f"unknown structure kind {spec.kind!r}")


# -- derived connections -----------------------------------------------------


def _require_constant_metric(spec_or_grid, n, what):
    grid = spec_or_grid
    for i in range(n):
        for j in range(n):
            if grid[i][j].degree > 0:
                raise UnsupportedStructureError(
                    f"{what} requires a constant metric so the Christoffel "
                    "symbols stay polynomial; for the curved worked example "
                    "use round_sphere_connection()"
                )
    return np.array([[grid[i][j].eval(np.zeros(n)) for j in range(n)] for i in range(n)])


def levi_civita(g) -> Connection:
    """Levi-Civita connection of a constant metric (identically zero)."""
    n = len(g)
    grid = _as_field_grid(n, g, (n, n))
    _require_constant_metric(grid, n, "levi_civita")
    return Connection.flat(n)


def weyl_conformal(g, beta) -> Connection:
    """Connection with nabla g = beta (x) g for a constant metric g.

    The closed-form correction term is validated against the defining
    equation at sample points rather than trusted.
    """
    n = len(g)
    grid = _as_field_grid(n, g, (n, n))
    gmat = _require_constant_metric(grid, n, "weyl_conformal")
    ginv = np.linalg.inv(gmat)
    bgrid = _as_field_grid(n, beta, (n,))
    zero = PolyField.zero(n)
    gamma = [[[zero for _ in range(n)] for _ in range(n)] for _ in range(n)]
    bup = [
        sum((ginv[k, l] * bgrid[l] for l in range(n)), PolyField.zero(n))
        for k in range(n)
    ]
    for k in range(n):
        for i in range(n):
            for j in range(n):
                w = PolyField.zero(n)
                if k == j:
                    w = w + bgrid[i]
                if k == i:
                    w = w + bgrid[j]
                w = w - gmat[i, j] * bup[k]
                gamma[k][i][j] = -0.5 * w
    conn = Connection(n, tuple(tuple(tuple(r) for r in p) for p in gamma))
    rng = np.random.default_rng(20240918)
    for _ in range(20):
        xs = rng.uniform(-1.0, 1.0, size=n)
        ng = nabla_metric(conn, grid, xs)
        want = np.einsum("k,ij->kij", np.array([b.eval(xs) for b in bgrid]), gmat)
        if np.max(np.abs(ng - want)) > 1e-12:
            raise ConventionError(
                "weyl_conformal correction term fails nabla g = beta (x) g"
            )
    return conn


def nabla_metric(conn: Connection, g_grid, x) -> np.ndarray:
    """Values of (nabla_k g)_{ij} at a point, for a polynomial metric grid."""
    n = conn.dim
    gam = christoffel_eval(conn, x, 0)[..., 0]
    gv = np.array([[g_grid[i][j].eval(x) for j in range(n)] for i in range(n)])
    dg = np.empty((n, n, n))
    for k in range(n):
        for i in range(n):
            for j in range(n):
                dg[k, i, j] = g_grid[i][j].deriv(k).eval(x)
    return (
        dg
        - np.einsum("lki,lj->kij", gam, gv)
        - np.einsum("lkj,il->kij", gam, gv)
    )


def grassmannian_flat(m: int, n: int) -> Connection:
    """Flat model connection on the (m, n) matrix chart."""
    StructureSpec.grassmannian(m, n)
    return Connection.flat(m * n)


def round_sphere_connection(n: int = 2, truncation_degree: int = 3) -> Connection:
    """Cubic-truncation Levi-Civita connection of the unit round sphere.

    The stereographic-chart metric 4/(1 + |x|^2)^2 delta has rational
    Christoffels; truncating their Taylor series at degree 3 keeps the
    connection polynomial while leaving all first derivatives at the
    origin exact, so curvature quantities *at x = 0* agree with the exact
    sphere.
    """
    if truncation_degree < 3:
        raise ValueError("truncation below degree 3 breaks exactness at 0")
    # d_i log-scale = -2 x_i / (1 + |x|^2) ~ -2 x_i (1 - |x|^2)
    norm2 = sum(
        (PolyField.coordinate(n, i) * PolyField.coordinate(n, i) for i in range(n)),
        PolyField.zero(n),
    )
    t = [
        -2.0 * PolyField.coordinate(n, i) * (PolyField.constant(n, 1.0) - norm2)
        for i in range(n)
    ]
    zero = PolyField.zero(n)
    gamma = [[[zero for _ in range(n)] for _ in range(n)] for _ in range(n)]
    for k in range(n):
        for i in range(n):
            for j in range(n):
                w = PolyField.zero(n)
                if k == i:
                    w = w + t[j]
                if k == j:
                    w = w + t[i]
                if i == j:
                    w = w - t[k]
                gamma[k][i][j] = w
    return Connection(n, tuple(tuple(tuple(r) for r in p) for p in gamma))


# -- gauge transform ---------------------------------------------------------


def gauge_transform(conn: Connection, upsilon, spec: StructureSpec) -> Connection:
    """Shift a compatible connection by the structure bracket with Upsilon.

    Gamma-hat^k_{ij} = Gamma^k_{ij} + ({d_i, Upsilon}(d_j))^k.  The bracket
    term is symmetric in (i, j) for every structure, so the result is
    torsion-free; this is asserted.
    """
    d = spec.dim
    if conn.dim != d:
        raise ValueError(
            f"connection dim {conn.dim} does not match structure dim {d}"
        )
    ups = _as_field_grid(d, upsilon, (d,))
    gamma = [
        [[conn.gamma[k][i][j] for j in range(d)] for i in range(d)]
        for k in range(d)
    ]
    if spec.kind == "projective":
        for i in range(d):
            for j in range(d):
                gamma[i][i][j] = gamma[i][i][j] + ups[j]
                gamma[j][i][j] = gamma[j][i][j] + ups[i]
    elif spec.kind == "conformal":
        gmat = _require_constant_metric(spec.metric, d, "conformal gauge_transform")
        ginv = np.linalg.inv(gmat)
        upsup = [
            sum((ginv[k, l] * ups[l] for l in range(d)), PolyField.zero(d))
            for k in range(d)
        ]
        for i in range(d):
            for j in range(d):
                gamma[i][i][j] = gamma[i][i][j] + ups[j]
                gamma[j][i][j] = gamma[j][i][j] + ups[i]
                for k in range(d):
                    gamma[k][i][j] = gamma[k][i][j] - gmat[i, j] * upsup[k]
    elif spec.kind == "grassmannian":
        m = spec.m
        for i in range(d):
            pi, qi = divmod(i, m)
            for j in range(d):
                pj, qj = divmod(j, m)
                k1 = pi * m + qj
                gamma[k1][i][j] = gamma[k1][i][j] + ups[pj * m + qi]
                k2 = pj * m + qi
                gamma[k2][i][j] = gamma[k2][i][j] + ups[pi * m + qj]
    else:
        raise ValueError(f"unknown structure kind {spec.kind!r}")
    out = Connection(d, tuple(tuple(tuple(r) for r in p) for p in gamma))
    for k in range(d):
        for i in range(d):
            for j in range(i):
                if out.gamma[k][i][j] != out.gamma[k][j][i]:
                    raise TorsionError(
                        "gauge transform produced torsion; bracket convention bug"
                    )
    return out
