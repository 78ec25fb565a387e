import numpy as np
import pytest

from parakahler.connections import (
    Connection,
    StructureSpec,
    gauge_transform,
    round_sphere_connection,
    weyl_conformal,
)
from parakahler.cotangent import (
    CotangentPoint,
    modified_metric,
    para_complex,
    patterson_walker,
    q_generic_value,
    q_tensor,
    symplectic_form,
    tau_refined,
    tautological,
)
from parakahler.errors import ConventionError
from parakahler.jets import PolyField

from conftest import random_covector


def test_tautological_vanishes_at_zero_section():
    spec = StructureSpec.projective(2)
    p = CotangentPoint((0.3, -0.1), (0.0, 0.0))
    assert np.max(np.abs(tautological(spec, p))) == 0.0


def test_tautological_components():
    spec = StructureSpec.projective(2)
    p = CotangentPoint((0.0, 0.0), (1.0, 0.0))
    assert np.array_equal(tautological(spec, p), [1.0, 0.0, 0.0, 0.0])


def test_refined_tautological_trace_and_flattening(rng):
    m, n = 2, 2
    spec = StructureSpec.grassmannian(m, n)
    z = rng.normal(size=(m, n))
    p = CotangentPoint.from_matrix(spec, np.zeros(m * n), z)
    tg = tau_refined(spec, p)
    tau = tautological(spec, p)
    # trace recovers tau on every coordinate direction
    assert np.allclose(np.einsum("uui->i", tg), tau, atol=1e-14)
    # the pairing convention: component along dx^{pq} is z[q, p]
    for pp in range(n):
        for qq in range(m):
            assert tau[pp * m + qq] == z[qq, pp]
    # elementary covector example
    p1 = CotangentPoint.from_matrix(spec, np.zeros(4), np.array([[1.0, 0], [0, 0]]))
    tg1 = tau_refined(spec, p1)
    assert np.allclose(np.einsum("uui->i", tg1), tautological(spec, p1))


def test_tau_refined_rejects_other_structures():
    spec = StructureSpec.projective(2)
    with pytest.raises(ValueError):
        tau_refined(spec, CotangentPoint((0.0, 0.0), (1.0, 0.0)))


def test_q_projective_is_minus_tau_squared():
    spec = StructureSpec.projective(2)
    p = CotangentPoint((0.0, 0.0), (1.0, 0.0))
    q = q_tensor(spec, p, 0)[..., 0]
    want = np.zeros((4, 4))
    want[0, 0] = -1.0
    assert np.allclose(q, want, atol=1e-15)


def test_q_conformal_flat_example():
    spec = StructureSpec.conformal(np.eye(3))
    p = CotangentPoint(np.zeros(3), (1.0, 0.0, 0.0))
    q = q_tensor(spec, p, 0)[..., 0]
    assert np.allclose(q[:3, :3], np.diag([-0.5, 0.5, 0.5]), atol=1e-15)


def test_q_vanishes_at_zero_covector():
    for spec in (
        StructureSpec.projective(2),
        StructureSpec.conformal(np.eye(3)),
        StructureSpec.grassmannian(2, 2),
    ):
        d = spec.dim
        p = CotangentPoint(np.zeros(d), np.zeros(d))
        assert np.max(np.abs(q_tensor(spec, p, 0))) == 0.0


def test_q_generic_equals_closed_for_all_structures(rng):
    for spec in (
        StructureSpec.projective(3),
        StructureSpec.conformal(np.eye(3) + 0.1 * np.ones((3, 3))),
        StructureSpec.grassmannian(2, 3),
    ):
        d = spec.dim
        for _ in range(5):
            p = CotangentPoint(rng.uniform(-1, 1, d), rng.uniform(-1, 1, d))
            qc = q_tensor(spec, p, 0)[:d, :d, 0]
            qg = q_generic_value(spec, p)
            assert np.max(np.abs(qc - qg)) < 1e-12


def test_q_homogeneity_and_symmetry(rng):
    spec = StructureSpec.conformal(np.eye(3))
    p = CotangentPoint(rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3))
    q0 = q_tensor(spec, p, 0)[..., 0]
    assert np.allclose(q0, q0.T, atol=1e-15)
    for t in (-3.0, -1.0, 0.5, 2.0):
        qt = q_tensor(spec, CotangentPoint(p.x, t * p.xi), 0)[..., 0]
        assert np.max(np.abs(qt - t * t * q0)) < 1e-12


def test_patterson_walker_flat_block_matrix():
    conn = Connection.flat(2)
    p = CotangentPoint((0.0, 0.0), (0.7, -0.3))
    h = patterson_walker(conn, p, 0)[..., 0]
    want = np.zeros((4, 4))
    want[:2, 2:] = 0.5 * np.eye(2)
    want[2:, :2] = 0.5 * np.eye(2)
    assert np.array_equal(h, want)


def test_patterson_walker_determinant_is_quarter_power(rng):
    # the fiber-block structure forces |det h0| = 4^-n at every point
    spec = StructureSpec.projective(3)
    conn = gauge_transform(Connection.flat(3), random_covector(3, 2, rng), spec)
    for _ in range(5):
        p = CotangentPoint(rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3))
        h = patterson_walker(conn, p, 0)[..., 0]
        assert abs(np.linalg.det(h)) == pytest.approx(0.25**3, rel=1e-12)


def test_patterson_walker_constant_gamma_entry():
    conn = Connection.from_entries(2, {(0, 0, 0): 1.0})
    p = CotangentPoint((0.0, 0.0), (1.0, 0.0))
    h = patterson_walker(conn, p, 0)[..., 0]
    assert h[0, 0] == -1.0
    h[0, 0] = 0.0
    want = np.zeros((4, 4))
    want[:2, 2:] = 0.5 * np.eye(2)
    want[2:, :2] = 0.5 * np.eye(2)
    assert np.array_equal(h, want)


def test_modified_metric_flat_projective_matrix():
    spec = StructureSpec.projective(2)
    h = modified_metric(spec, Connection.flat(2), CotangentPoint((0, 0), (1, 0)), 0)
    want = np.array(
        [
            [-1.0, 0.0, 0.5, 0.0],
            [0.0, 0.0, 0.0, 0.5],
            [0.5, 0.0, 0.0, 0.0],
            [0.0, 0.5, 0.0, 0.0],
        ]
    )
    assert np.array_equal(h[..., 0], want)


def test_modified_metric_conformal_zero_section_is_flat_pw():
    spec = StructureSpec.conformal(np.eye(3))
    conn = weyl_conformal(np.eye(3), [0.0] * 3)
    p = CotangentPoint(np.zeros(3), np.zeros(3))
    h = modified_metric(spec, conn, p, 0)[..., 0]
    assert np.allclose(h, patterson_walker(conn, p, 0)[..., 0], atol=1e-15)


def test_modified_metric_round_sphere_base_block():
    spec = StructureSpec.projective(2)
    conn = round_sphere_connection(2)
    h = modified_metric(spec, conn, CotangentPoint((0, 0), (1, 0)), 0)[..., 0]
    assert np.allclose(h[:2, :2], np.diag([-5.0, -4.0]), atol=1e-13)


def test_modified_metric_has_split_signature(rng):
    spec = StructureSpec.grassmannian(2, 2)
    conn = gauge_transform(Connection.flat(4), random_covector(4, 2, rng), spec)
    for _ in range(5):
        p = CotangentPoint(rng.uniform(-1, 1, 4), rng.uniform(-1, 1, 4))
        h = modified_metric(spec, conn, p, 0)[..., 0]
        eig = np.linalg.eigvalsh(h)
        assert (eig > 0).sum() == 4 and (eig < 0).sum() == 4


def test_symplectic_form_flat_blocks():
    spec = StructureSpec.projective(2)
    om = symplectic_form(spec, Connection.flat(2), CotangentPoint((0, 0), (1, 0)), 1, 0)
    want = np.zeros((4, 4))
    want[:2, 2:] = 0.5 * np.eye(2)
    want[2:, :2] = -0.5 * np.eye(2)
    assert np.array_equal(om[..., 0], want)


def test_symplectic_form_levi_civita_has_no_base_block(rng):
    # symmetric Rho: Alt part vanishes and Omega is the canonical pairing
    spec = StructureSpec.conformal(np.eye(3))
    conn = weyl_conformal(np.eye(3), [0.0] * 3)
    p = CotangentPoint(rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3))
    om = symplectic_form(spec, conn, p, 1, 0)[..., 0]
    assert np.max(np.abs(om[:3, :3])) < 1e-14


def test_para_complex_flat_eigenstructure():
    spec = StructureSpec.projective(2)
    conn = Connection.flat(2)
    p = CotangentPoint((0.0, 0.0), (0.0, 0.0))
    h = modified_metric(spec, conn, p, 0)[..., 0]
    om = symplectic_form(spec, conn, p, 1, 0)[..., 0]
    ival = para_complex(h, om)
    assert np.allclose(ival, np.diag([1.0, 1.0, -1.0, -1.0]))
    eig = np.sort(np.linalg.eigvals(ival).real)
    assert np.allclose(eig, [-1, -1, 1, 1], atol=1e-12)


def test_para_complex_squares_to_identity_and_traceless(rng):
    spec = StructureSpec.grassmannian(2, 2)
    conn = gauge_transform(Connection.flat(4), random_covector(4, 2, rng), spec)
    for _ in range(5):
        p = CotangentPoint(rng.uniform(-1, 1, 4), rng.uniform(-1, 1, 4))
        h = modified_metric(spec, conn, p, 0)[..., 0]
        om = symplectic_form(spec, conn, p, 1, 0)[..., 0]
        ival = para_complex(h, om)
        assert np.max(np.abs(ival @ ival - np.eye(8))) < 1e-10
        assert abs(np.trace(ival)) < 1e-12


def test_constant_gauge_translates_the_fiber():
    # flat connection gauged by a constant covector: the modified metric is
    # exactly the flat one with the fiber shifted, entry for entry.
    n = 2
    spec = StructureSpec.projective(n)
    ups_val = np.array([0.25, -0.5])
    ups = tuple(PolyField.constant(n, v) for v in ups_val)
    ghat = gauge_transform(Connection.flat(n), ups, spec)
    rng = np.random.default_rng(5)
    for _ in range(5):
        x = rng.uniform(-1, 1, n)
        xi = rng.uniform(-1, 1, n)
        hhat = modified_metric(spec, ghat, CotangentPoint(x, xi), 0)[..., 0]
        href = modified_metric(
            spec, Connection.flat(n), CotangentPoint(x, xi + ups_val), 0
        )[..., 0]
        assert np.allclose(hhat, href, atol=1e-14)


def test_q_mismatch_raises_convention_error(monkeypatch):
    import parakahler.cotangent as ct

    spec = StructureSpec.projective(2)
    p = CotangentPoint((0.1, 0.2), (0.5, -0.4))
    monkeypatch.setattr(
        ct, "q_generic_value", lambda s, pt: np.zeros((s.dim, s.dim))
    )
    with pytest.raises(ConventionError):
        ct.q_tensor(spec, p, 0, check=True)


def test_grass_point_matrix_roundtrip(rng):
    spec = StructureSpec.grassmannian(2, 3)
    z = rng.normal(size=(2, 3))
    p = CotangentPoint.from_matrix(spec, np.zeros(6), z)
    from parakahler.tensors import matrix_from_momentum

    assert np.array_equal(matrix_from_momentum(p.xi, 2, 3), z)
    with pytest.raises(ValueError):
        CotangentPoint.from_matrix(StructureSpec.projective(2), np.zeros(2), z)
