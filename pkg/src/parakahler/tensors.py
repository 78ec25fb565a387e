"""Point-wise tensor algebra: symmetrization, traces, matrix-chart twists.

Bilinear data is stored with the tensor slots first; an optional trailing
coefficient axis carries jet entries, so every operation here works
unchanged on numeric ``(n, n)`` arrays and on jet-valued ``(n, n, N)``
arrays (the slot axes are always axes 0..k-1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conventions import grass_fiber_permutation


def sym(t: np.ndarray) -> np.ndarray:
    """Symmetric part (T + T^t)/2 over the first two axes."""
    return 0.5 * (t + np.swapaxes(t, 0, 1))


def alt(t: np.ndarray) -> np.ndarray:
    """Alternating part (T - T^t)/2 over the first two axes."""
    return 0.5 * (t - np.swapaxes(t, 0, 1))


def split_sym_alt(t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Decompose a bilinear into (Sym, Alt); the parts sum back to it."""
    t = np.asarray(t, dtype=float)
    if t.shape[0] != t.shape[1]:
        raise ValueError(f"bilinear must be square, got shape {t.shape}")
    return sym(t), alt(t)


# -- matrix charts -----------------------------------------------------------
#
# On a chart of type (m, n) the tangent space is the n x m matrices and the
# cotangent space the m x n matrices.  A bilinear form B_ij on the chart,
# indexed by flat coordinates i = p*m + q, reshapes to B[p, q, p', q'];
# in covector terms the slot (p, q) carries the column index p (rank-n
# side) and row index q (rank-m side).  The two twist maps swap the rank-m
# indices (t_E) or the rank-n indices (t_F) of the two slots.


def grass_reshape(b: np.ndarray, m: int, n: int) -> np.ndarray:
    """View a coordinate bilinear (mn, mn, ...) as (n, m, n, m, ...)."""
    return np.asarray(b).reshape((n, m, n, m) + np.asarray(b).shape[2:])


def grass_flatten(b4: np.ndarray, m: int, n: int) -> np.ndarray:
    """Inverse of :func:`grass_reshape`."""
    return np.asarray(b4).reshape((m * n, m * n) + np.asarray(b4).shape[4:])


def twist_e(b4: np.ndarray) -> np.ndarray:
    """Swap the rank-m (row) indices of the two slots."""
    return np.swapaxes(b4, 1, 3)


def twist_f(b4: np.ndarray) -> np.ndarray:
    """Swap the rank-n (column) indices of the two slots."""
    return np.swapaxes(b4, 0, 2)


def grass_split(b: np.ndarray, m: int, n: int):
    """Four twist-eigenprojections of a coordinate bilinear.

    Returns ``(ss, aa, sa, as_)`` where the first letter is the rank-m
    (output) symmetry and the second the rank-n (input) symmetry; the four
    parts sum to ``b``.
    """
    b4 = grass_reshape(np.asarray(b, dtype=float), m, n)
    te = twist_e(b4)
    tf = twist_f(b4)
    tef = twist_f(te)
    ss = 0.25 * (b4 + te + tf + tef)
    aa = 0.25 * (b4 - te - tf + tef)
    sa = 0.25 * (b4 + te - tf - tef)
    as_ = 0.25 * (b4 - te + tf - tef)
    return tuple(grass_flatten(p, m, n) for p in (ss, aa, sa, as_))


@dataclass(frozen=True, eq=False)
class GrassBilinear:
    """Bilinear form on an (m, n) matrix chart, in split-index layout.

    ``entries[a, alpha, b, beta]`` with ``a, b`` the rank-m indices and
    ``alpha, beta`` the rank-n indices of the two slots.  The composite
    flattening is lexicographic ``(a, alpha)`` row-major.
    """

    m: int
    n: int
    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        if e.shape[:4] != (self.m, self.n, self.m, self.n):
            raise ValueError(
                f"entries shape {e.shape} does not match (m, n) = "
                f"({self.m}, {self.n})"
            )
        object.__setattr__(self, "entries", e)

    @classmethod
    def from_coordinates(cls, b: np.ndarray, m: int, n: int) -> "GrassBilinear":
        """Build from a chart-coordinate bilinear (mn, mn)."""
        b4 = grass_reshape(np.asarray(b, dtype=float), m, n)
        # coordinate slot (p, q) -> covector indices (a = q, alpha = p)
        return cls(m, n, np.transpose(b4, (1, 0, 3, 2)))

    def to_coordinates(self) -> np.ndarray:
        return grass_flatten(np.transpose(self.entries, (1, 0, 3, 2)), self.m, self.n)

    def flat(self) -> np.ndarray:
        """Matrix in the composite (a, alpha) row-major flattening."""
        mn = self.m * self.n
        return self.entries.reshape(mn, mn)


def grassmann_projections(p: GrassBilinear):
    """Split into the four twist-eigenparts (ss, aa, sa, as).

    Each projection symmetrizes or alternates independently in the output
    (rank-m) and input (rank-n) index pairs; the four parts are idempotent
    images that sum back to ``p``.
    """
    e = p.entries
    te = np.swapaxes(e, 0, 2)   # swap a, b
    tf = np.swapaxes(e, 1, 3)   # swap alpha, beta
    tef = np.swapaxes(te, 1, 3)
    ss = GrassBilinear(p.m, p.n, 0.25 * (e + te + tf + tef))
    aa = GrassBilinear(p.m, p.n, 0.25 * (e - te - tf + tef))
    sa = GrassBilinear(p.m, p.n, 0.25 * (e + te - tf - tef))
    as_ = GrassBilinear(p.m, p.n, 0.25 * (e - te + tf - tef))
    return ss, aa, sa, as_


def momentum_from_matrix(z: np.ndarray, m: int, n: int) -> np.ndarray:
    """Canonical momenta of a covector given as an m x n matrix.

    The momentum conjugate to the base coordinate with flat index
    ``p*m + q`` is ``z[q, p]``.
    """
    z = np.asarray(z, dtype=float)
    if z.shape != (m, n):
        raise ValueError(f"covector matrix must be {m}x{n}, got {z.shape}")
    perm = grass_fiber_permutation(m, n)
    return z.reshape(-1)[perm]


def matrix_from_momentum(xi: np.ndarray, m: int, n: int) -> np.ndarray:
    """Inverse of :func:`momentum_from_matrix`."""
    xi = np.asarray(xi, dtype=float)
    perm = grass_fiber_permutation(m, n)
    flat = np.empty(m * n)
    flat[perm] = xi
    return flat.reshape(m, n)
