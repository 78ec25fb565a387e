"""Consistency of the compiled kernel against the numpy fallback."""

import numpy as np
import pytest

from parakahler.jets import available_backends, jet_space


needs_cython = pytest.mark.skipif(
    "cython" not in available_backends(),
    reason="compiled jet kernel not built",
)


@pytest.fixture
def backend_env(monkeypatch):
    def use(name):
        monkeypatch.setenv("PARAKAHLER_JET_BACKEND", name)

    return use


@needs_cython
@pytest.mark.parametrize("dim,order", [(2, 3), (4, 2), (8, 1), (8, 2)])
def test_mul_agrees_across_backends(dim, order, backend_env, rng):
    sp = jet_space(dim, order)
    a = rng.normal(size=(6, sp.ncoeff))
    b = rng.normal(size=(6, sp.ncoeff))
    backend_env("numpy")
    want = sp.mul(a, b)
    backend_env("cython")
    got = sp.mul(a, b)
    assert np.allclose(got, want, rtol=1e-13, atol=1e-14)


@needs_cython
def test_matmul_agrees_across_backends(backend_env, rng):
    sp = jet_space(6, 2)
    a = rng.normal(size=(7, 5, sp.ncoeff))
    b = rng.normal(size=(5, 9, sp.ncoeff))
    backend_env("numpy")
    want = sp.matmul(a, b)
    backend_env("cython")
    got = sp.matmul(a, b)
    assert np.allclose(got, want, rtol=1e-12, atol=1e-13)


@needs_cython
def test_certification_identical_across_backends(backend_env):
    from parakahler.scenarios import generate_scenario, resolve, sample_points
    from parakahler.verify import einstein_residual

    sc = generate_scenario(3, "grassmannian", n=2, m=2, degree=2, points=6)
    spec, conn = resolve(sc)
    pts = sample_points(sc)
    out = {}
    for backend in ("numpy", "cython"):
        backend_env(backend)
        res = einstein_residual(spec, conn, pts)
        out[backend] = res
    assert out["numpy"].lam == pytest.approx(out["cython"].lam, abs=1e-12)
    assert out["cython"].residual < 1e-10


def test_backend_selection_errors(monkeypatch):
    from parakahler.jets import active_backend

    monkeypatch.setenv("PARAKAHLER_JET_BACKEND", "weird")
    with pytest.raises(ValueError):
        active_backend()
