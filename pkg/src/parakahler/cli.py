"""Command-line interface.

Subcommands map onto the library entry points: ``verify`` and ``report``
run the certification suite on a scenario file, ``generate`` emits a
seeded scenario, ``rho`` and ``metric`` print the tensors at a chosen
point.  Exit codes: 0 all checks pass, 1 a certification check failed,
2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .conventions import JET_ORDER_MAX
from .cotangent import CotangentPoint, modified_metric, q_tensor, symplectic_form
from .errors import GeometryError, ScenarioError
from .rho import rho_closed_form, rho_generic
from .scenarios import (
    Scenario,
    default_isometry_upsilon,
    dump_scenario,
    generate_scenario,
    load_scenario,
    resolve,
    sample_points,
)
from .verify import CHECK_GROUPS, USER_TOL_CHECKS, VerificationReport, run_suite

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT_ERROR = 2


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--tol", type=float, default=None,
                   help="override the default 1e-8 tolerance family")
    p.add_argument("--jet-order", type=int, default=None,
                   help=f"cap the jet order (0..{JET_ORDER_MAX}; the Einstein "
                        "check needs 3)")
    p.add_argument("--omega-sign", type=int, choices=(1, -1), default=None,
                   help="sign of the Alt(P) block in the two-form")
    p.add_argument("--points", type=int, default=None,
                   help="override the scenario's sample point count")
    p.add_argument("--format", choices=("text", "structured"), default=None,
                   help="report format (structured = JSON)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parakahler",
        description="Construct and certify para-Kahler-Einstein metrics on "
                    "cotangent bundles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run certification checks on a scenario")
    p.add_argument("scenario", type=Path)
    p.add_argument("--checks", default=",".join(CHECK_GROUPS),
                   help="comma-separated subset of: " + ", ".join(CHECK_GROUPS))
    p.add_argument("--out", type=Path, default=None, help="write the report here")
    p.add_argument("--timing", action="store_true",
                   help="include wall-clock timing (breaks byte-identity)")
    _add_common(p)

    p = sub.add_parser("report", help="run all checks and emit the full report")
    p.add_argument("scenario", type=Path)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--timing", action="store_true")
    _add_common(p)

    p = sub.add_parser("generate", help="emit a seeded gauge-of-flat scenario")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--structure", required=True,
                   choices=("projective", "conformal", "grassmannian"))
    p.add_argument("--dim", required=True,
                   help="chart dimension n, or MxN for grassmannian (e.g. 2x2)")
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--lorentzian", action="store_true",
                   help="conformal only: use signature (-,+,...,+)")
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--out", type=Path, default=None)

    p = sub.add_parser("rho", help="print the Rho tensor at a base point")
    p.add_argument("scenario", type=Path)
    p.add_argument("--at", required=True, help="base point, e.g. '0.1,0.2'")
    _add_common(p)

    p = sub.add_parser("metric", help="print h, Omega and q at a cotangent point")
    p.add_argument("scenario", type=Path)
    p.add_argument("--at", required=True,
                   help="cotangent point 'x1,..,xn;xi1,..,xin'")
    _add_common(p)
    return parser


def _apply_overrides(sc: Scenario, args) -> Scenario:
    if getattr(args, "points", None):
        sc.points = args.points
    if getattr(args, "omega_sign", None):
        sc.omega_sign = args.omega_sign
    if getattr(args, "jet_order", None) is not None:
        sc.jet_order = args.jet_order
    if getattr(args, "tol", None):
        for name in USER_TOL_CHECKS:
            sc.tolerances[name] = args.tol
    return sc


def _matrix_lines(name: str, mat: np.ndarray) -> list[str]:
    lines = [name]
    for row in np.atleast_2d(mat):
        lines.append("  " + "  ".join(f"{v: .12g}" for v in row))
    return lines


def format_report_text(report: VerificationReport, include_timing: bool) -> str:
    lines = [f"scenario: {report.scenario_id}"]
    conv = ", ".join(f"{k}={v}" for k, v in sorted(report.conventions.items()))
    lines.append(f"conventions: {conv}")
    if report.einstein_constant is not None:
        lines.append(
            f"einstein constant: {report.einstein_constant:.12g} "
            f"(spread {report.lambda_spread:.3e})"
        )
    for c in report.checks:
        status = "PASS" if c.passed else "FAIL"
        lines.append(
            f"{status:4s} {c.name:32s} residual={c.residual:.6e} "
            f"tol={c.tolerance:.1e} samples={c.samples}"
        )
    if include_timing and report.timing is not None:
        lines.append(f"timing: {report.timing:.3f}s")
    lines.append("result: " + ("PASS" if report.passed else "FAIL"))
    return "\n".join(lines) + "\n"


def format_report(report: VerificationReport, fmt: str, include_timing: bool) -> str:
    if fmt == "structured":
        return json.dumps(report.as_dict(include_timing), indent=2, sort_keys=True) + "\n"
    return format_report_text(report, include_timing)


def _emit(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _parse_point(raw: str, dim: int, need_fiber: bool):
    parts = raw.split(";")
    if need_fiber and len(parts) != 2:
        raise ScenarioError("--at needs 'x1,..,xn;xi1,..,xin'")
    x = np.array([float(v) for v in parts[0].split(",") if v.strip() != ""])
    if x.shape != (dim,):
        raise ScenarioError(f"--at point has {x.size} coordinates, chart has {dim}")
    if not need_fiber:
        return x, None
    xi = np.array([float(v) for v in parts[1].split(",") if v.strip() != ""])
    if xi.shape != (dim,):
        raise ScenarioError(f"--at covector has {xi.size} components, chart has {dim}")
    return x, xi


def _run_verify(args, checks) -> int:
    sc = _apply_overrides(load_scenario(args.scenario), args)
    if "einstein" in checks and sc.jet_order < JET_ORDER_MAX:
        raise ScenarioError(
            "the einstein check needs jet order 3; deselect it or raise --jet-order"
        )
    spec, conn = resolve(sc)
    report = run_suite(
        spec,
        conn,
        sample_points(sc),
        scenario_id=sc.id,
        checks=checks,
        omega_sign=sc.omega_sign,
        tolerances=sc.tolerances,
        isometry_upsilon=default_isometry_upsilon(sc),
        corruption=sc.corruption,
    )
    fmt = args.format or ("text" if args.command == "verify" else "structured")
    _emit(format_report(report, fmt, args.timing), args.out)
    if not report.passed:
        failed = ", ".join(c.name for c in report.checks if not c.passed)
        print(f"certification failed: {failed}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command in ("verify", "report"):
            if args.command == "verify":
                checks = tuple(c for c in args.checks.split(",") if c)
                bad = set(checks) - set(CHECK_GROUPS)
                if bad:
                    raise ScenarioError(f"unknown checks: {', '.join(sorted(bad))}")
            else:
                checks = CHECK_GROUPS
            return _run_verify(args, checks)

        if args.command == "generate":
            if "x" in args.dim:
                m, n = (int(v) for v in args.dim.lower().split("x"))
            else:
                m, n = 1, int(args.dim)
            sc = generate_scenario(
                seed=args.seed,
                structure=args.structure,
                n=n,
                m=m,
                degree=args.degree,
                lorentzian=args.lorentzian,
                points=args.points,
                radius=args.radius,
            )
            _emit(dump_scenario(sc), args.out)
            return EXIT_OK

        if args.command == "rho":
            sc = _apply_overrides(load_scenario(args.scenario), args)
            spec, conn = resolve(sc)
            x, _ = _parse_point(args.at, spec.dim, need_fiber=False)
            closed = rho_closed_form(spec, conn, x, 0)[..., 0]
            generic = rho_generic(spec, conn, x, 0)[..., 0]
            lines = _matrix_lines("rho (closed form):", closed)
            lines += _matrix_lines("rho (generic solver):", generic)
            lines.append(f"max difference: {np.max(np.abs(closed - generic)):.3e}")
            _emit("\n".join(lines) + "\n", None)
            return EXIT_OK

        if args.command == "metric":
            sc = _apply_overrides(load_scenario(args.scenario), args)
            spec, conn = resolve(sc)
            x, xi = _parse_point(args.at, spec.dim, need_fiber=True)
            p = CotangentPoint(x, xi)
            h = modified_metric(spec, conn, p, 0)[..., 0]
            om = symplectic_form(spec, conn, p, sc.omega_sign, 0)[..., 0]
            q = q_tensor(spec, p, 0)[..., 0]
            lines = _matrix_lines("h:", h)
            lines += _matrix_lines("omega:", om)
            lines += _matrix_lines("q (base block):", q[: spec.dim, : spec.dim])
            _emit("\n".join(lines) + "\n", None)
            return EXIT_OK
    except (ScenarioError, GeometryError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    raise AssertionError("unreachable")


if __name__ == "__main__":
    raise SystemExit(main())
