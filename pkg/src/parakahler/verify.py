"""Numerical certification of the cotangent-bundle construction.

Each check evaluates a claimed identity at sample cotangent points and
reports the worst residual; jets make every derivative exact, so the
residuals reflect floating-point rounding only and the default tolerances
are comfortable.  Failures are results, not exceptions: the suite
returns report entries and the caller decides what to do.

The Einstein check is the expensive one: it computes the Ricci tensor of
the 2n-dimensional modified metric through order-2 jets of the metric
(hence order-3 jets of the base Christoffels) and fits the proportionality
constant lambda jointly over all points.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .connections import Connection, StructureSpec, gauge_transform, ricci
from .conventions import OMEGA_SIGN_DEFAULT, REPORT_CONVENTIONS
from .cotangent import (
    CotangentPoint,
    modified_metric,
    q_generic_value,
    q_tensor,
    symplectic_form,
    para_complex,
)
from .errors import GeometryError
from .jets import PolyField, jet_space
from .rho import partial_rho, rho_closed_form, rho_generic, ricci_type_contraction

#: Tolerances per check family.  The 1e-8 entries are the user-facing
#: default (CLI --tol rescales exactly those); the tighter ones guard
#: dual-route agreement and exact structural identities.
DEFAULT_TOLERANCES = {
    "einstein": 1e-8,
    "lambda_spread": 1e-8,
    "para_kahler": 1e-8,
    "isometry": 1e-8,
    "rho_pair": 1e-10,
    "q_pair": 1e-12,
    "rho_contraction": 1e-10,
    "reduction": 1e-12,
    "homogeneity": 1e-12,
    "semibasic": 1e-12,
}

#: Checks whose tolerance follows the user default.
USER_TOL_CHECKS = ("einstein", "lambda_spread", "para_kahler", "isometry")

HOMOGENEITY_SCALES = (-3.0, -1.0, 0.5, 2.0)

CHECK_GROUPS = ("einstein", "para_kahler", "isometry", "crosscheck", "homogeneity")


@dataclass(frozen=True)
class CheckResult:
    """One certified (or failed) identity."""

    name: str
    residual: float
    tolerance: float
    samples: int

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "samples": self.samples,
        }


@dataclass
class VerificationReport:
    """Outcome of one scenario's certification run."""

    scenario_id: str
    checks: list[CheckResult] = field(default_factory=list)
    einstein_constant: float | None = None
    lambda_spread: float | None = None
    conventions: dict = field(default_factory=lambda: dict(REPORT_CONVENTIONS))
    timing: float | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self, include_timing: bool = False) -> dict:
        out = {
            "schema": "verification-report/1",
            "scenario": self.scenario_id,
            "passed": self.passed,
            "einstein_constant": self.einstein_constant,
            "lambda_spread": self.lambda_spread,
            "conventions": dict(self.conventions),
            "checks": [c.as_dict() for c in self.checks],
        }
        if include_timing:
            out["timing_seconds"] = self.timing
        return out


@dataclass(frozen=True)
class EinsteinResult:
    lam: float
    residual: float
    point_lambdas: np.ndarray


def ricci_of_metric(h2: np.ndarray, order2_space) -> tuple[np.ndarray, np.ndarray]:
    """Ricci tensor value of a jet-valued metric (order-2 jets required).

    Levi-Civita Christoffels come from one jet-level linear solve per
    point; their first derivatives are read off the order-1 jets, which is
    the whole reason the pipeline carries jets instead of finite
    differences.
    """
    n2 = h2.shape[0]
    sp1 = jet_space(n2, 1)
    h1 = order2_space.truncate(h2, 1)
    hinv1 = sp1.inv(h1)
    dh = order2_space.derivs(h2)  # dh[A, B, m] = d_m h_{AB} (order-1 jets)
    t = (
        np.einsum("dcb...->dbc...", dh)
        + dh
        - np.einsum("bcd...->dbc...", dh)
    )
    gam1 = 0.5 * sp1.matmul(
        hinv1, t.reshape(n2, n2 * n2, sp1.ncoeff)
    ).reshape(n2, n2, n2, sp1.ncoeff)
    gam0 = gam1[..., 0]
    dgam = gam1[..., sp1.grad_positions]  # dgam[k, i, j, m] = d_m Gamma^k_{ij}
    r = (
        np.einsum("kjli->klij", dgam)
        - np.einsum("kilj->klij", dgam)
    )
    q = np.einsum("kim,mjl->kijl", gam0, gam0)
    r += np.einsum("kijl->klij", q) - np.einsum("kjil->klij", q)
    ric = np.einsum("kjki->ij", r)
    return ric, h2[..., 0]


def einstein_residual(
    spec: StructureSpec,
    conn: Connection,
    points: list[CotangentPoint],
    corruption: str | None = None,
    metric_scale: float = 1.0,
) -> EinsteinResult:
    """Fit Ric(h) = lambda h jointly over the points; residual is the
    worst entrywise deviation |Ric - lambda h| / (1 + |h|)."""
    if len(points) < 2:
        raise ValueError("einstein check needs at least two sample points")
    d = spec.dim
    sp2 = jet_space(2 * d, 2)
    rics, hs = [], []
    for p in points:
        h2 = metric_scale * modified_metric(spec, conn, p, 2, corruption=corruption)
        ric, h0 = ricci_of_metric(h2, sp2)
        rics.append(ric)
        hs.append(h0)
    rics = np.array(rics)
    hs = np.array(hs)
    lam = float(np.sum(rics * hs) / np.sum(hs * hs))
    point_lams = np.einsum("pab,pab->p", rics, hs) / np.einsum("pab,pab->p", hs, hs)
    residual = float(np.max(np.abs(rics - lam * hs) / (1.0 + np.abs(hs))))
    return EinsteinResult(lam, residual, point_lams)


def para_kahler_check(
    spec: StructureSpec,
    conn: Connection,
    points: list[CotangentPoint],
    omega_sign: int = OMEGA_SIGN_DEFAULT,
    tol: float = DEFAULT_TOLERANCES["para_kahler"],
) -> list[CheckResult]:
    """The almost para-Kahler axioms at every point.

    (a) I^2 = Id, (b) the +/-1 eigenprojectors have rank n, (c) their
    images are h-isotropic, (d) Omega-Lagrangian, (e) dOmega = 0, and
    (f) Omega is nondegenerate (residual: condition number times machine
    epsilon, the relative noise of inverting it).
    """
    d = spec.dim
    sp1 = jet_space(2 * d, 1)
    eye = np.eye(2 * d)
    worst = dict.fromkeys(
        ("i_squared", "eigenrank", "isotropy", "lagrangian", "domega", "nondegenerate"),
        0.0,
    )
    for p in points:
        h1 = modified_metric(spec, conn, p, 1)
        om1 = symplectic_form(spec, conn, p, omega_sign, 1)
        h0 = h1[..., 0]
        om0 = om1[..., 0]
        ival = para_complex(h0, om0)
        worst["i_squared"] = max(
            worst["i_squared"], float(np.max(np.abs(ival @ ival - eye)))
        )
        for s in (1.0, -1.0):
            proj = 0.5 * (eye + s * ival)
            rank_res = max(
                abs(float(np.trace(proj)) - d),
                float(np.max(np.abs(proj @ proj - proj))),
            )
            worst["eigenrank"] = max(worst["eigenrank"], rank_res)
            worst["isotropy"] = max(
                worst["isotropy"], float(np.max(np.abs(proj.T @ h0 @ proj)))
            )
            worst["lagrangian"] = max(
                worst["lagrangian"], float(np.max(np.abs(proj.T @ om0 @ proj)))
            )
        dom = om1[..., sp1.grad_positions]  # dom[A, B, m] = d_m Omega_{AB}
        dext = (
            np.einsum("bca->abc", dom)
            + np.einsum("cab->abc", dom)
            + dom
        )
        worst["domega"] = max(worst["domega"], float(np.max(np.abs(dext))))
        sv = np.linalg.svd(om0, compute_uv=False)
        worst["nondegenerate"] = max(
            worst["nondegenerate"],
            float(sv[0] / sv[-1] * np.finfo(float).eps) if sv[-1] > 0 else np.inf,
        )
    return [
        CheckResult(f"para_kahler:{k}", v, tol, len(points)) for k, v in worst.items()
    ]


def isometry_check(
    spec: StructureSpec,
    conn: Connection,
    upsilon,
    points: list[CotangentPoint],
    tol: float = DEFAULT_TOLERANCES["isometry"],
) -> tuple[int | None, CheckResult]:
    """Gauge-equivalent connections give isometric metrics.

    Pulls the gauged metric back through the fiber translation
    ``(x, xi) -> (x, xi + s Upsilon(x))`` (Jacobian included) for both
    signs and reports the sign that matches, together with its residual.
    """
    d = spec.dim
    ghat = gauge_transform(conn, upsilon, spec)
    ups = [
        u if isinstance(u, PolyField) else PolyField.constant(d, float(u))
        for u in upsilon
    ]
    residuals = {}
    for s in (1, -1):
        worst = 0.0
        for p in points:
            uval = np.array([u.eval(p.x) for u in ups])
            du = np.array([[u.deriv(a).eval(p.x) for a in range(d)] for u in ups])
            jac = np.eye(2 * d)
            jac[d:, :d] = s * du  # d(xi'_c)/dx^a = s d_a Upsilon_c
            moved = CotangentPoint(p.x, p.xi + s * uval)
            hhat = modified_metric(spec, ghat, moved, 0)[..., 0]
            h = modified_metric(spec, conn, p, 0)[..., 0]
            pulled = jac.T @ hhat @ jac
            worst = max(worst, float(np.max(np.abs(pulled - h) / (1.0 + np.abs(h)))))
        residuals[s] = worst
    sign = min(residuals, key=residuals.get)
    if residuals[sign] > tol:
        return None, CheckResult("isometry", residuals[sign], tol, len(points))
    return sign, CheckResult("isometry", residuals[sign], tol, len(points))


def crosscheck_suite(
    spec: StructureSpec,
    conn: Connection,
    points: list[CotangentPoint],
    tolerances: dict | None = None,
) -> list[CheckResult]:
    """Dual-route consistency: Rho solver vs closed form, bracket q vs
    closed-form q, the defining Rho contraction, and (on rank-1 matrix
    charts) entrywise reduction to the projective formulas."""
    tols = dict(DEFAULT_TOLERANCES)
    if tolerances:
        tols.update(tolerances)
    d = spec.dim
    rho_res = q_res = contr_res = 0.0
    for p in points:
        pg = rho_generic(spec, conn, p.x, 1)
        pc = rho_closed_form(spec, conn, p.x, 1)
        rho_res = max(rho_res, float(np.max(np.abs(pg - pc))))
        qc = q_tensor(spec, p, 0, check=False)[:d, :d, 0]
        qg = q_generic_value(spec, p)
        q_res = max(q_res, float(np.max(np.abs(qc - qg))))
        dp = partial_rho(spec, pc[..., 0], p.x, 0)[..., 0]
        ric0 = ricci(conn, p.x, 0)[..., 0]
        contr_res = max(
            contr_res, float(np.max(np.abs(ricci_type_contraction(dp) - ric0)))
        )
    out = [
        CheckResult("crosscheck:rho_pair", rho_res, tols["rho_pair"], len(points)),
        CheckResult("crosscheck:q_pair", q_res, tols["q_pair"], len(points)),
        CheckResult(
            "crosscheck:rho_contraction", contr_res, tols["rho_contraction"], len(points)
        ),
    ]
    if spec.kind == "grassmannian" and spec.m == 1:
        proj = StructureSpec.projective(spec.n)
        red = 0.0
        for p in points:
            red = max(
                red,
                float(
                    np.max(
                        np.abs(
                            rho_closed_form(spec, conn, p.x, 0)
                            - rho_closed_form(proj, conn, p.x, 0)
                        )
                    )
                ),
                float(
                    np.max(
                        np.abs(q_tensor(spec, p, 0) - q_tensor(proj, p, 0))
                    )
                ),
                float(
                    np.max(
                        np.abs(
                            modified_metric(spec, conn, p, 0)
                            - modified_metric(proj, conn, p, 0)
                        )
                    )
                ),
            )
        out.append(
            CheckResult("crosscheck:rank1_reduction", red, tols["reduction"], len(points))
        )
    return out


def homogeneity_semibasic_check(
    spec: StructureSpec,
    points: list[CotangentPoint],
    ts: tuple[float, ...] = HOMOGENEITY_SCALES,
    tolerances: dict | None = None,
) -> list[CheckResult]:
    """q is fiber-quadratic and vanishes on vertical directions."""
    tols = dict(DEFAULT_TOLERANCES)
    if tolerances:
        tols.update(tolerances)
    d = spec.dim
    hom = semi = 0.0
    for p in points:
        q0 = q_tensor(spec, p, 0)[..., 0]
        semi = max(
            semi,
            float(np.max(np.abs(q0[d:, :]))),
            float(np.max(np.abs(q0[:, d:]))),
        )
        for t in ts:
            qt = q_tensor(spec, CotangentPoint(p.x, t * p.xi), 0)[..., 0]
            hom = max(hom, float(np.max(np.abs(qt - t * t * q0))))
    return [
        CheckResult("homogeneity", hom, tols["homogeneity"], len(points)),
        CheckResult("semibasic", semi, tols["semibasic"], len(points)),
    ]


def run_suite(
    spec: StructureSpec,
    conn: Connection,
    points: list[CotangentPoint],
    scenario_id: str = "",
    checks: tuple[str, ...] = CHECK_GROUPS,
    omega_sign: int = OMEGA_SIGN_DEFAULT,
    tolerances: dict | None = None,
    isometry_upsilon=None,
    corruption: str | None = None,
) -> VerificationReport:
    """Run the selected check groups and assemble one report."""
    tols = dict(DEFAULT_TOLERANCES)
    if tolerances:
        tols.update(tolerances)
    unknown = set(checks) - set(CHECK_GROUPS)
    if unknown:
        raise ValueError(f"unknown checks: {sorted(unknown)}")
    report = VerificationReport(scenario_id)
    report.conventions["omega_sign"] = omega_sign
    started = time.perf_counter()
    if "einstein" in checks:
        try:
            res = einstein_residual(spec, conn, points, corruption=corruption)
        except GeometryError as exc:
            report.checks.append(
                CheckResult(f"einstein [{exc}]", np.inf, tols["einstein"], len(points))
            )
        else:
            report.einstein_constant = res.lam
            report.lambda_spread = float(
                np.max(res.point_lambdas) - np.min(res.point_lambdas)
            )
            report.checks.append(
                CheckResult("einstein", res.residual, tols["einstein"], len(points))
            )
            report.checks.append(
                CheckResult(
                    "lambda_spread",
                    report.lambda_spread,
                    tols["lambda_spread"],
                    len(points),
                )
            )
    if "para_kahler" in checks:
        report.checks.extend(
            para_kahler_check(spec, conn, points, omega_sign, tols["para_kahler"])
        )
    if "isometry" in checks and isometry_upsilon is not None:
        sign, entry = isometry_check(
            spec, conn, isometry_upsilon, points, tols["isometry"]
        )
        report.checks.append(entry)
        report.conventions["isometry_sign_observed"] = sign
    if "crosscheck" in checks:
        report.checks.extend(crosscheck_suite(spec, conn, points, tols))
    if "homogeneity" in checks:
        report.checks.extend(homogeneity_semibasic_check(spec, points, tolerances=tols))
    report.timing = time.perf_counter() - started
    return report
