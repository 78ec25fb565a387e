import itertools

import numpy as np
import pytest

from parakahler.jets import PolyField


def random_poly(dim, degree, rng, scale=0.3):
    """Dense random polynomial with rounded coefficients."""
    terms = []
    for exps in itertools.product(range(degree + 1), repeat=dim):
        if sum(exps) <= degree:
            terms.append((exps, round(float(rng.uniform(-scale, scale)), 6)))
    return PolyField(dim, tuple(terms))


def random_covector(dim, degree, rng, scale=0.3):
    return tuple(random_poly(dim, degree, rng, scale) for _ in range(dim))


def fd_derivative(f, x, variables, h=1e-2):
    """Nested fourth-order central differences along the given variables.

    Independent of the jet machinery: only pointwise evaluations of ``f``.
    """
    if not variables:
        return f(x)
    i, rest = variables[0], variables[1:]

    def df(y):
        e = np.zeros_like(y)
        e[i] = 1.0
        return (
            -fd_derivative(f, y + 2 * h * e, rest, h)
            + 8 * fd_derivative(f, y + h * e, rest, h)
            - 8 * fd_derivative(f, y - h * e, rest, h)
            + fd_derivative(f, y - 2 * h * e, rest, h)
        ) / (12 * h)

    return df(np.asarray(x, dtype=float))


def fd_jet_coefficient(f, x, kappa, h=1e-2):
    """Taylor coefficient (derivative / kappa!) via finite differences."""
    variables = []
    fact = 1.0
    for i, k in enumerate(kappa):
        variables.extend([i] * k)
        for j in range(1, k + 1):
            fact *= j
    return fd_derivative(f, x, tuple(variables), h) / fact


@pytest.fixture
def rng():
    return np.random.default_rng(20250808)
