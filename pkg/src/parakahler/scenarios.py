"""Scenario files: loading, deterministic generation, resolution.

A scenario is a plain-text TOML document describing one certification
job: the geometric structure, how to build the connection (explicit
Christoffel table, derived Weyl connection, or a gauge of another
connection), the sampling of cotangent points, and options.  Polynomials
are arrays of inline tables ``{e = [exponents], c = coefficient}``; a
bare number is shorthand for a constant.  Christoffel indices in files
are 1-based.  The format is documented with examples in
``docs/formats.md``.

Generation is deterministic: the same seed yields a byte-identical file.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .connections import (
    Connection,
    StructureSpec,
    gauge_transform,
    torsion,
    weyl_conformal,
)
from .conventions import JET_ORDER_MAX, OMEGA_SIGN_DEFAULT
from .cotangent import CORRUPTIONS, CotangentPoint
from .errors import GeometryError, ScenarioError
from .jets import PolyField

SCHEMA = "scenario/1"
DEFAULT_MAX_DEGREE = 4

STRUCTURE_KINDS = ("projective", "conformal", "grassmannian")
SOURCES = ("explicit", "derived", "gauge")


@dataclass
class Scenario:
    """Validated description of one certification job."""

    id: str
    kind: str
    n: int
    m: int = 1
    metric: tuple | None = None
    beta: tuple | None = None
    source: str = "explicit"
    gamma: dict | None = None
    base: str | None = None
    upsilon: tuple | None = None
    seed: int = 0
    points: int = 20
    radius: float = 1.0
    jet_order: int = JET_ORDER_MAX
    omega_sign: int = OMEGA_SIGN_DEFAULT
    max_degree: int = DEFAULT_MAX_DEGREE
    tolerances: dict = field(default_factory=dict)
    corruption: str | None = None
    isometry_upsilon: tuple | None = None
    path: Path | None = None

    @property
    def dim(self) -> int:
        return self.m * self.n if self.kind == "grassmannian" else self.n


# -- polynomial (de)serialization --------------------------------------------


def _poly_from_obj(obj, dim: int, where: str, max_degree: int) -> PolyField:
    if isinstance(obj, (int, float)):
        return PolyField.constant(dim, float(obj))
    if not isinstance(obj, list):
        raise ScenarioError(f"{where}: polynomial must be a number or a term list")
    terms = []
    for t in obj:
        if not isinstance(t, dict) or set(t) != {"e", "c"}:
            raise ScenarioError(f"{where}: each term needs exactly keys 'e' and 'c'")
        exps = t["e"]
        if len(exps) != dim:
            raise ScenarioError(
                f"{where}: exponent tuple {exps} has length {len(exps)}, "
                f"chart dimension is {dim}"
            )
        if any(int(e) < 0 for e in exps):
            raise ScenarioError(f"{where}: negative exponent in {exps}")
        if sum(int(e) for e in exps) > max_degree:
            raise ScenarioError(
                f"{where}: term degree {sum(exps)} exceeds max_degree {max_degree}"
            )
        terms.append((tuple(int(e) for e in exps), float(t["c"])))
    return PolyField(dim, tuple(terms))


def _poly_to_obj(f: PolyField):
    if f.is_zero():
        return []
    if f.degree == 0:
        return float(f.monomials[0][1])
    return [{"e": list(e), "c": float(c)} for e, c in f.monomials]


def _covector_from_obj(obj, dim: int, where: str, max_degree: int):
    if not isinstance(obj, list) or len(obj) != dim:
        raise ScenarioError(f"{where}: expected a list of {dim} polynomial components")
    return tuple(
        _poly_from_obj(comp, dim, f"{where}[{i + 1}]", max_degree)
        for i, comp in enumerate(obj)
    )


# -- load / dump --------------------------------------------------------------


def scenario_from_dict(data: dict, path: Path | None = None) -> Scenario:
    """Validate a parsed TOML document into a Scenario."""
    if data.get("schema") != SCHEMA:
        raise ScenarioError(f"unsupported or missing schema (expected {SCHEMA!r})")
    try:
        structure = data["structure"]
        kind = structure["kind"]
        sid = data["id"]
    except KeyError as exc:
        raise ScenarioError(f"missing required field {exc}") from exc
    if kind not in STRUCTURE_KINDS:
        raise ScenarioError(f"unknown structure kind {kind!r}")
    n = int(structure.get("n", 0))
    m = int(structure.get("m", 1))
    if kind == "projective" and n < 2:
        raise ScenarioError(
            "projective requires n >= 2: the closed Rho formula divides by n - 1"
        )
    if kind == "conformal" and n < 3:
        raise ScenarioError(
            "conformal requires n >= 3: the closed Rho formula divides by n - 2"
        )
    if kind == "grassmannian" and (m < 1 or n < 1 or m * n < 2):
        raise ScenarioError(
            "grassmannian requires m*n >= 2: the closed Rho formula divides by "
            "m + n - 2"
        )
    dim = m * n if kind == "grassmannian" else n

    options = data.get("options", {})
    max_degree = int(options.get("max_degree", DEFAULT_MAX_DEGREE))
    jet_order = int(options.get("jet_order", JET_ORDER_MAX))
    if not 0 <= jet_order <= JET_ORDER_MAX:
        raise ScenarioError(f"jet_order must lie in 0..{JET_ORDER_MAX}")
    omega_sign = int(options.get("omega_sign", OMEGA_SIGN_DEFAULT))
    if omega_sign not in (1, -1):
        raise ScenarioError("omega_sign must be +1 or -1")
    corruption = options.get("corruption")
    if corruption is not None and corruption not in CORRUPTIONS:
        raise ScenarioError(
            f"unknown corruption {corruption!r}; valid: {', '.join(CORRUPTIONS)}"
        )
    tolerances = {k: float(v) for k, v in options.get("tolerances", {}).items()}

    metric = beta = None
    if kind == "conformal":
        raw_metric = structure.get("metric")
        if raw_metric is None:
            metric = tuple(
                tuple(
                    PolyField.constant(n, 1.0 if i == j else 0.0) for j in range(n)
                )
                for i in range(n)
            )
        else:
            if len(raw_metric) != n:
                raise ScenarioError("structure.metric must be an n x n grid")
            metric = tuple(
                tuple(
                    _poly_from_obj(
                        raw_metric[i][j], n, f"metric[{i + 1}][{j + 1}]", max_degree
                    )
                    for j in range(n)
                )
                for i in range(n)
            )
        raw_beta = structure.get("beta")
        beta = (
            tuple(PolyField.zero(n) for _ in range(n))
            if raw_beta is None
            else _covector_from_obj(raw_beta, n, "structure.beta", max_degree)
        )

    connection = data.get("connection", {"source": "explicit"})
    source = connection.get("source", "explicit")
    if source not in SOURCES:
        raise ScenarioError(f"unknown connection source {source!r}")
    gamma = base = upsilon = None
    if source == "explicit":
        gamma = {}
        for entry in connection.get("gamma", []):
            try:
                k, i, j = int(entry["k"]), int(entry["i"]), int(entry["j"])
            except KeyError as exc:
                raise ScenarioError(f"gamma entry missing index {exc}") from exc
            if not all(1 <= v <= dim for v in (k, i, j)):
                raise ScenarioError(
                    f"gamma index ({k},{i},{j}) out of range 1..{dim}"
                )
            f = _poly_from_obj(
                entry.get("poly", []), dim, f"gamma[{k},{i},{j}]", max_degree
            )
            key = (k - 1, i - 1, j - 1)
            gamma[key] = gamma.get(key, PolyField.zero(dim)) + f
    elif source == "derived":
        if kind != "conformal":
            raise ScenarioError("source='derived' is only defined for conformal")
    elif source == "gauge":
        base = connection.get("base", "flat")
        upsilon = _covector_from_obj(
            connection.get("upsilon", [[] for _ in range(dim)]),
            dim,
            "connection.upsilon",
            max_degree,
        )

    sampling = data.get("sampling", {})
    checks = data.get("checks", {})
    iso = checks.get("isometry_upsilon")
    scenario = Scenario(
        id=str(sid),
        kind=kind,
        n=n,
        m=m,
        metric=metric,
        beta=beta,
        source=source,
        gamma=gamma,
        base=base,
        upsilon=upsilon,
        seed=int(sampling.get("seed", 0)),
        points=int(sampling.get("points", 20)),
        radius=float(sampling.get("radius", 1.0)),
        jet_order=jet_order,
        omega_sign=omega_sign,
        max_degree=max_degree,
        tolerances=tolerances,
        corruption=corruption,
        isometry_upsilon=(
            None
            if iso is None
            else _covector_from_obj(iso, dim, "checks.isometry_upsilon", max_degree)
        ),
        path=path,
    )
    if scenario.points < 2:
        raise ScenarioError("sampling.points must be at least 2")
    return scenario


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ScenarioError(f"scenario file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"{path}: TOML parse error: {exc}") from exc
    return scenario_from_dict(data, path=path)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, dict):
        inner = ", ".join(f"{k} = {_fmt(x)}" for k, x in v.items())
        return "{" + inner + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    raise TypeError(f"cannot format {type(v)!r}")


def _fmt_covector(fields) -> str:
    lines = ["["]
    for f in fields:
        lines.append(f"    {_fmt(_poly_to_obj(f))},")
    lines.append("]")
    return "\n".join(lines)


def dump_scenario(sc: Scenario) -> str:
    """Serialize deterministically to TOML (byte-stable per content)."""
    out = [f'schema = "{SCHEMA}"', f"id = {_fmt(sc.id)}", ""]
    out.append("[structure]")
    out.append(f"kind = {_fmt(sc.kind)}")
    out.append(f"n = {sc.n}")
    if sc.kind == "grassmannian":
        out.append(f"m = {sc.m}")
    if sc.kind == "conformal":
        rows = []
        for i in range(sc.n):
            rows.append([_poly_to_obj(sc.metric[i][j]) for j in range(sc.n)])
        out.append("metric = [")
        for row in rows:
            out.append(f"    {_fmt(row)},")
        out.append("]")
        out.append("beta = " + _fmt_covector(sc.beta))
    out.append("")
    out.append("[connection]")
    out.append(f"source = {_fmt(sc.source)}")
    if sc.source == "gauge":
        out.append(f"base = {_fmt(sc.base)}")
        out.append("upsilon = " + _fmt_covector(sc.upsilon))
    out.append("")
    out.append("[sampling]")
    out.append(f"seed = {sc.seed}")
    out.append(f"points = {sc.points}")
    out.append(f"radius = {_fmt(float(sc.radius))}")
    out.append("")
    out.append("[options]")
    out.append(f"jet_order = {sc.jet_order}")
    out.append(f"omega_sign = {sc.omega_sign}")
    out.append(f"max_degree = {sc.max_degree}")
    if sc.corruption:
        out.append(f"corruption = {_fmt(sc.corruption)}")
    if sc.tolerances:
        out.append("")
        out.append("[options.tolerances]")
        for k in sorted(sc.tolerances):
            out.append(f"{k} = {_fmt(float(sc.tolerances[k]))}")
    if sc.isometry_upsilon is not None:
        out.append("")
        out.append("[checks]")
        out.append("isometry_upsilon = " + _fmt_covector(sc.isometry_upsilon))
    if sc.source == "explicit" and sc.gamma:
        for (k, i, j), f in sorted(sc.gamma.items()):
            out.append("")
            out.append("[[connection.gamma]]")
            out.append(f"k = {k + 1}")
            out.append(f"i = {i + 1}")
            out.append(f"j = {j + 1}")
            out.append(f"poly = {_fmt(_poly_to_obj(f))}")
    return "\n".join(out) + "\n"


# -- deterministic generation --------------------------------------------------


def _random_poly(dim: int, degree: int, rng, scale: float = 0.3) -> PolyField:
    terms = []
    for exps in itertools.product(range(degree + 1), repeat=dim):
        if sum(exps) <= degree:
            terms.append((exps, round(float(rng.uniform(-scale, scale)), 6)))
    return PolyField(dim, tuple(terms))


def generate_scenario(
    seed: int,
    structure: str,
    n: int,
    m: int = 1,
    degree: int = 2,
    lorentzian: bool = False,
    points: int = 20,
    radius: float = 1.0,
) -> Scenario:
    """Seeded gauge-of-flat scenario; identical seeds give identical files.

    Projective and grassmannian scenarios gauge the flat model by a random
    polynomial covector.  Conformal scenarios perturb the flat metric by a
    small constant symmetric part (diagonal dominance keeps it invertible
    and preserves the signature on the sample box) and derive the
    compatible connection from a random polynomial beta; that *is* the
    gauge-of-flat family for conformal structures.
    """
    if structure not in STRUCTURE_KINDS:
        raise ScenarioError(f"unknown structure kind {structure!r}")
    rng = np.random.default_rng(seed)
    dim = m * n if structure == "grassmannian" else n
    tag = f"{structure}-n{n}" + (f"m{m}" if structure == "grassmannian" else "")
    if lorentzian:
        tag += "-lorentz"
    sid = f"{tag}-deg{degree}-seed{seed}"
    common = dict(
        seed=seed,
        points=points,
        radius=radius,
        id=sid,
        n=n,
        m=m,
        kind=structure,
    )
    iso = tuple(_random_poly(dim, 1, rng, scale=0.2) for _ in range(dim))
    if structure == "conformal":
        if lorentzian and n < 2:
            raise ScenarioError("lorentzian signature needs n >= 2")
        diag = np.ones(n)
        if lorentzian:
            diag[0] = -1.0
        g = np.diag(diag)
        for i in range(n):
            for j in range(i + 1, n):
                eps = round(float(rng.uniform(-0.1, 0.1)), 6)
                g[i, j] += eps
                g[j, i] += eps
        metric = tuple(
            tuple(PolyField.constant(n, float(g[i, j])) for j in range(n))
            for i in range(n)
        )
        beta = tuple(_random_poly(n, degree, rng) for _ in range(n))
        return Scenario(
            metric=metric,
            beta=beta,
            source="derived",
            isometry_upsilon=iso,
            **common,
        )
    upsilon = tuple(_random_poly(dim, degree, rng) for _ in range(dim))
    return Scenario(
        source="gauge",
        base="flat",
        upsilon=upsilon,
        isometry_upsilon=iso,
        **common,
    )


# -- resolution ----------------------------------------------------------------


def build_structure(sc: Scenario) -> StructureSpec:
    try:
        if sc.kind == "projective":
            return StructureSpec.projective(sc.n)
        if sc.kind == "conformal":
            return StructureSpec.conformal(sc.metric, sc.beta)
        return StructureSpec.grassmannian(sc.m, sc.n)
    except GeometryError as exc:
        raise ScenarioError(str(exc)) from exc


def _base_connection(sc: Scenario, spec: StructureSpec) -> Connection:
    if sc.base in (None, "flat"):
        return Connection.flat(spec.dim)
    if sc.base == "derived":
        if sc.kind != "conformal":
            raise ScenarioError("base='derived' is only defined for conformal")
        return weyl_conformal(sc.metric, sc.beta)
    base_path = Path(sc.base)
    if sc.path is not None and not base_path.is_absolute():
        base_path = sc.path.parent / base_path
    if not base_path.exists():
        raise ScenarioError(f"gauge base scenario not found: {sc.base}")
    base_sc = load_scenario(base_path)
    if (base_sc.kind, base_sc.n, base_sc.m) != (sc.kind, sc.n, sc.m):
        raise ScenarioError("gauge base scenario has a different structure")
    _, conn = resolve(base_sc)
    return conn


def resolve(sc: Scenario) -> tuple[StructureSpec, Connection]:
    """Build the structure and connection; checks torsion at sample points."""
    spec = build_structure(sc)
    try:
        if sc.source == "explicit":
            conn = (
                Connection.flat(spec.dim)
                if not sc.gamma
                else Connection.from_entries(spec.dim, sc.gamma)
            )
        elif sc.source == "derived":
            conn = weyl_conformal(sc.metric, sc.beta)
        else:
            conn = gauge_transform(_base_connection(sc, spec), sc.upsilon, spec)
    except GeometryError as exc:
        raise ScenarioError(str(exc)) from exc
    rng = np.random.default_rng(sc.seed)
    for _ in range(3):
        torsion(conn, rng.uniform(-sc.radius, sc.radius, spec.dim))
    if sc.kind == "conformal":
        for _ in range(5):
            x = rng.uniform(-sc.radius, sc.radius, spec.dim)
            if abs(np.linalg.det(spec.metric_value(x))) < 1e-10:
                raise ScenarioError(f"conformal metric is singular at sample x={x}")
    return spec, conn


def sample_points(sc: Scenario) -> list[CotangentPoint]:
    """Deterministic cotangent sample: uniform in the coordinate box."""
    rng = np.random.default_rng(sc.seed)
    dim = sc.dim
    return [
        CotangentPoint(
            rng.uniform(-sc.radius, sc.radius, dim),
            rng.uniform(-sc.radius, sc.radius, dim),
        )
        for _ in range(sc.points)
    ]


def default_isometry_upsilon(sc: Scenario):
    """Deterministic covector for the isometry check when none is stored."""
    if sc.isometry_upsilon is not None:
        return sc.isometry_upsilon
    rng = np.random.default_rng(sc.seed + 91)
    return tuple(_random_poly(sc.dim, 1, rng, scale=0.2) for _ in range(sc.dim))
