"""Scenario documents: parsing, validation, printing and execution.

A scenario is a YAML mapping. Example::

    name: ftc_figure2
    check: ftc
    patch: {key: figure2}
    f: identity_vector            # registry key, or a polynomial expression
    g: "1 + x1*e2"                # optional
    quadrature: {points_per_axis: 8, subdivisions_per_axis: 8}
    output: ftc_figure2.csv

Glued complexes use ``patches:`` with one mapping per patch and an
optional ``orientation: -1``. See ``SCHEMA`` for every recognised key.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields as dc_fields, replace
from typing import Optional

import yaml

from . import library
from .classical import (
    gauss_divergence_check,
    greens_theorem_check,
    path_independence_check,
    reports_to_csv,
    stokes_theorem_check,
)
from .derivatives import DEFAULT_SEED, identity_suite
from .errors import (
    DimensionMismatchError,
    GeocalcError,
    RegistryKeyError,
    ScenarioError,
    ScenarioSyntaxError,
    UnknownKeyError,
)
from .integrate import corollary_check, directed_content, ftc_check
from .monogenic import (
    SampleBox,
    full_cauchy_formula,
    monogenicity_certificate,
    reconstruction_csv,
    reconstruction_report,
)
from .notation import format_multivector
from .patches import PatchComplex, PatchMap, as_complex
from .quadrature import QuadratureSpec

CHECKS = ("ftc", "content", "green", "stokes", "gauss", "path", "identities", "monogenic", "cauchy")

#: top-level keys and what they mean
SCHEMA = {
    "name": "scenario name (required)",
    "check": "one of " + ", ".join(CHECKS),
    "description": "free text",
    "patch": "patch or complex: {key: <registry key>, <params>...}",
    "patches": "list of patches to glue, each with optional orientation: +1/-1",
    "region": "n-patch for full Cauchy, or {lower, upper, points_per_axis} sample box for monogenic",
    "f": "field: registry key, polynomial expression, or {key: ..., <params>}",
    "g": "left field (default 1)",
    "quadrature": "{rule, points_per_axis, subdivisions_per_axis}",
    "levels": "refinement levels for ftc (default 3)",
    "tolerance": "pass threshold (defaults depend on the check)",
    "oracle": "exact value the classical sides must match",
    "points": "evaluation points for cauchy",
    "full": "cauchy: use the full formula over region (default false)",
    "expect": "monogenic: expected verdict (default true)",
    "dim": "identities: dimension",
    "trials": "identities: number of random points (default 1000)",
    "method": "identities/derivatives: fd or analytic",
    "seed": "random seed",
    "output": "CSV output path",
}

DEFAULT_TOLERANCE = {
    "ftc": 1e-5, "content": 1e-8, "green": 1e-5, "stokes": 1e-5, "gauss": 1e-5, "path": 1e-5,
    "identities": 1e-6, "monogenic": None, "cauchy": 1e-5,
}
FULL_CAUCHY_TOLERANCE = 1e-3

_QUAD_KEYS = {"rule", "points_per_axis", "subdivisions_per_axis"}


@dataclass(frozen=True)
class ItemSpec:
    """Registry key plus parameters (and a glue orientation for patches)."""

    key: str
    params: tuple = ()
    orientation: int = 1

    @property
    def kwargs(self) -> dict:
        return {k: _unfreeze(v) for k, v in self.params}

    def to_dict(self, with_orientation=False) -> dict:
        d = {"key": self.key}
        d.update(self.kwargs)
        if with_orientation and self.orientation != 1:
            d["orientation"] = self.orientation
        return d


@dataclass(frozen=True)
class Scenario:
    name: str
    check: str
    patches: tuple = ()
    region: Optional[ItemSpec] = None
    box: Optional[tuple] = None
    f: Optional[ItemSpec] = None
    g: Optional[ItemSpec] = None
    quadrature: QuadratureSpec = QuadratureSpec()
    levels: int = 3
    tolerance: Optional[float] = None
    oracle: Optional[float] = None
    points: tuple = ()
    full: bool = False
    expect: bool = True
    dim: Optional[int] = None
    trials: int = 1000
    method: Optional[str] = None
    seed: int = DEFAULT_SEED
    output: Optional[str] = None
    description: str = ""

    def effective_tolerance(self) -> Optional[float]:
        if self.tolerance is not None:
            return self.tolerance
        if self.check == "cauchy" and self.full:
            return FULL_CAUCHY_TOLERANCE
        if self.check == "identities" and self.method == "analytic":
            return 1e-12
        return DEFAULT_TOLERANCE[self.check]

    # construction helpers ------------------------------------------

    def build_geometry(self):
        """The patch, or the glued complex when several patches are listed."""
        if not self.patches:
            return None
        built = [(_build_patch(p, self.name), p.orientation) for p in self.patches]
        if len(built) == 1 and built[0][1] == 1:
            return built[0][0]
        items = []
        for obj, o in built:
            cx = as_complex(obj)
            items.extend((p, s * o) for p, s in cx)
        return PatchComplex(tuple(p for p, _ in items), tuple(s for _, s in items))

    def ambient_dim(self) -> Optional[int]:
        geo = self.build_geometry()
        if geo is not None:
            return geo.n
        if self.region is not None:
            return _build_patch(self.region, self.name).n
        if self.box is not None:
            return len(self.box[0])
        return self.dim

    def build_field(self, which: str = "f"):
        spec = getattr(self, which)
        if spec is None:
            return None
        n = self.ambient_dim()
        try:
            return library.make_field(spec.key, n, **spec.kwargs)
        except KeyError:
            raise RegistryKeyError(f"unknown field {spec.key!r}", self.name) from None
        except (TypeError, ValueError) as exc:
            if isinstance(exc, GeocalcError):
                raise ScenarioError(f"field {spec.key!r}: {exc}", self.name) from None
            raise ScenarioError(f"bad parameters for field {spec.key!r}: {exc}", self.name) from None


def _freeze(v):
    if isinstance(v, list):
        return tuple(_freeze(x) for x in v)
    if isinstance(v, dict):
        return tuple(sorted((k, _freeze(x)) for k, x in v.items()))
    return v


def _unfreeze(v):
    if isinstance(v, tuple):
        return [_unfreeze(x) for x in v]
    return v


def _build_patch(spec: ItemSpec, scenario: str):
    try:
        return library.make_patch(spec.key, **spec.kwargs)
    except KeyError:
        raise RegistryKeyError(f"unknown patch {spec.key!r}", scenario) from None
    except TypeError as exc:
        raise ScenarioError(f"bad parameters for patch {spec.key!r}: {exc}", scenario) from None


# ---------------------------------------------------------------------
# parsing


def _item(value, what: str, scenario: str, allow_orientation=False) -> ItemSpec:
    if isinstance(value, str):
        key = value.strip()
        if what == "field" and key not in library.FIELDS:
            return ItemSpec("poly", (("expr", key),))
        return ItemSpec(key)
    if isinstance(value, (int, float)) and what == "field":
        return ItemSpec("constant", (("value", str(value)),))
    if not isinstance(value, dict) or "key" not in value:
        raise ScenarioError(f"{what} must be a registry key or a mapping with 'key'", scenario)
    params = dict(value)
    key = str(params.pop("key"))
    orientation = 1
    if allow_orientation and "orientation" in params:
        orientation = int(params.pop("orientation"))
        if orientation not in (1, -1):
            raise ScenarioError("orientation must be +1 or -1", scenario)
    return ItemSpec(key, _freeze(params), orientation)


def _as_float(value, what, scenario):
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ScenarioError(f"{what} must be a number", scenario) from None


def parse_scenario(text: str) -> Scenario:
    """Parse and validate a scenario document.

    Raises
    ------
    ScenarioSyntaxError
        Malformed YAML (with line and column) or a non-mapping document.
    UnknownKeyError
        A key outside :data:`SCHEMA`.
    RegistryKeyError
        An unregistered patch or field name.
    DimensionMismatchError
        Patch and field dimensions disagree, or k > n.
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        col = mark.column + 1 if mark is not None else None
        raise ScenarioSyntaxError(str(getattr(exc, "problem", exc)), line, col) from None
    if not isinstance(doc, dict):
        raise ScenarioSyntaxError("a scenario must be a mapping")
    name = str(doc.get("name", ""))
    unknown = sorted(set(doc) - set(SCHEMA))
    if unknown:
        raise UnknownKeyError(f"unknown key(s): {', '.join(map(str, unknown))}", name or None)
    if not name:
        raise ScenarioError("missing 'name'")
    check = doc.get("check")
    if check not in CHECKS:
        raise ScenarioError(f"'check' must be one of {', '.join(CHECKS)}", name)

    kw = {"name": name, "check": check, "description": str(doc.get("description", "") or "")}
    if "patch" in doc and "patches" in doc:
        raise ScenarioError("give either 'patch' or 'patches', not both", name)
    if "patch" in doc:
        kw["patches"] = (_item(doc["patch"], "patch", name, True),)
    elif "patches" in doc:
        if not isinstance(doc["patches"], list) or not doc["patches"]:
            raise ScenarioError("'patches' must be a non-empty list", name)
        kw["patches"] = tuple(_item(p, "patch", name, True) for p in doc["patches"])
    if "region" in doc:
        reg = doc["region"]
        if isinstance(reg, dict) and "lower" in reg:
            extra = set(reg) - {"lower", "upper", "points_per_axis"}
            if extra:
                raise UnknownKeyError(f"unknown region key(s): {', '.join(sorted(extra))}", name)
            lo = tuple(float(v) for v in reg["lower"])
            hi = tuple(float(v) for v in reg["upper"])
            if len(lo) != len(hi):
                raise DimensionMismatchError("region lower/upper lengths differ", name)
            kw["box"] = (lo, hi, int(reg.get("points_per_axis", 11)))
        else:
            kw["region"] = _item(reg, "patch", name)
    for which in ("f", "g"):
        if doc.get(which) is not None:
            kw[which] = _item(doc[which], "field", name)
    quad = doc.get("quadrature") or {}
    if not isinstance(quad, dict):
        raise ScenarioError("'quadrature' must be a mapping", name)
    extra = set(quad) - _QUAD_KEYS
    if extra:
        raise UnknownKeyError(f"unknown quadrature key(s): {', '.join(sorted(extra))}", name)
    try:
        kw["quadrature"] = QuadratureSpec(**{k: (v if k == "rule" else int(v)) for k, v in quad.items()})
    except ValueError as exc:
        raise ScenarioError(str(exc), name) from None
    for key, conv in (("levels", int), ("trials", int), ("dim", int), ("seed", int)):
        if doc.get(key) is not None:
            kw[key] = conv(doc[key])
    for key in ("tolerance", "oracle"):
        if doc.get(key) is not None:
            kw[key] = _as_float(doc[key], key, name)
    for key in ("full", "expect"):
        if key in doc:
            kw[key] = bool(doc[key])
    if doc.get("method") is not None:
        if doc["method"] not in ("fd", "analytic"):
            raise ScenarioError("'method' must be fd or analytic", name)
        kw["method"] = doc["method"]
    if doc.get("points") is not None:
        kw["points"] = tuple(tuple(float(c) for c in p) for p in doc["points"])
    if doc.get("output") is not None:
        kw["output"] = str(doc["output"])
    scenario = Scenario(**kw)
    validate(scenario)
    return scenario


def validate(s: Scenario) -> None:
    """Check cross references and dimensions; raises on the first problem."""
    needs_patch = s.check in ("ftc", "content", "green", "stokes", "gauss", "path")
    if needs_patch and not s.patches:
        raise ScenarioError(f"check {s.check!r} needs 'patch' or 'patches'", s.name)
    if s.check in ("ftc", "green", "stokes", "gauss", "monogenic") and s.f is None:
        raise ScenarioError(f"check {s.check!r} needs a field 'f'", s.name)
    if s.check == "path" and s.f is None:
        raise ScenarioError("check 'path' needs a field 'f'", s.name)
    if s.check == "identities" and s.dim is None:
        raise ScenarioError("check 'identities' needs 'dim'", s.name)
    if s.check == "cauchy":
        if s.f is None or not s.points:
            raise ScenarioError("check 'cauchy' needs 'f' and 'points'", s.name)
        if s.full and s.region is None:
            raise ScenarioError("full Cauchy formula needs a 'region' patch", s.name)
        if not s.full and not s.patches:
            raise ScenarioError("Cauchy reconstruction needs a boundary 'patch'", s.name)
    if s.check == "monogenic" and s.region is None and s.box is None:
        raise ScenarioError("check 'monogenic' needs a 'region'", s.name)

    geo = s.build_geometry()
    dims = set()
    if geo is not None:
        if geo.k > geo.n:
            raise DimensionMismatchError(f"patch k={geo.k} exceeds ambient dimension n={geo.n}", s.name)
        dims.add(geo.n)
        if s.check == "path":
            for p in s.patches:
                if _build_patch(p, s.name).k != 1:
                    raise DimensionMismatchError("path independence needs 1-patches (curves)", s.name)
    if s.region is not None:
        reg = _build_patch(s.region, s.name)
        if not isinstance(reg, PatchMap):
            raise ScenarioError("'region' must be a single patch", s.name)
        dims.add(reg.n)
    if s.box is not None:
        dims.add(len(s.box[0]))
    if s.dim is not None and s.check != "identities":
        dims.add(s.dim)
    if len(dims) > 1:
        raise DimensionMismatchError(f"inconsistent dimensions {sorted(dims)}", s.name)
    for which in ("f", "g"):
        spec = getattr(s, which)
        if spec is None:
            continue
        need = library.field_dimension(spec.key, **spec.kwargs) if spec.key in library.FIELDS else None
        if need is not None and dims and need not in dims:
            raise DimensionMismatchError(
                f"field {which} ({spec.key}) lives in R^{need} but the geometry is in R^{min(dims)}", s.name)
        fld = s.build_field(which)
        if fld is not None and dims and fld.alg.n not in dims:
            raise DimensionMismatchError(f"field {which} has ambient dimension {fld.alg.n}", s.name)
    for p in s.points:
        if dims and len(p) not in dims:
            raise DimensionMismatchError(f"point {p} has the wrong dimension", s.name)
    want = {"green": (2, 2), "stokes": (2, 3), "gauss": (3, 3)}.get(s.check)
    if want and geo is not None and (geo.k, geo.n) != want:
        raise DimensionMismatchError(f"{s.check} needs a {want[0]}-patch in R^{want[1]}", s.name)


# ---------------------------------------------------------------------
# printing


def scenario_to_dict(s: Scenario) -> dict:
    d = {"name": s.name, "check": s.check}
    if s.description:
        d["description"] = s.description
    if len(s.patches) == 1 and s.patches[0].orientation == 1:
        d["patch"] = s.patches[0].to_dict()
    elif s.patches:
        d["patches"] = [p.to_dict(True) for p in s.patches]
    if s.region is not None:
        d["region"] = s.region.to_dict()
    if s.box is not None:
        d["region"] = {"lower": list(s.box[0]), "upper": list(s.box[1]), "points_per_axis": s.box[2]}
    for which in ("f", "g"):
        spec = getattr(s, which)
        if spec is not None:
            d[which] = spec.to_dict()
    q = s.quadrature
    d["quadrature"] = {"rule": q.rule, "points_per_axis": q.q, "subdivisions_per_axis": q.m}
    defaults = Scenario(name=s.name, check=s.check)
    for f in dc_fields(Scenario):
        if f.name in ("name", "check", "description", "patches", "region", "box", "f", "g", "quadrature"):
            continue
        v = getattr(s, f.name)
        if v != getattr(defaults, f.name):
            d[f.name] = [list(p) for p in v] if f.name == "points" else v
    return d


def print_scenario(s: Scenario) -> str:
    """Canonical YAML text; ``parse_scenario(print_scenario(s)) == s``."""
    return yaml.safe_dump(scenario_to_dict(s), sort_keys=False, default_flow_style=None)


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


# ---------------------------------------------------------------------
# execution


@dataclass
class RunResult:
    scenario: str
    passed: bool
    csv: str
    summary: list = field(default_factory=list)
    output_path: Optional[str] = None

    @property
    def exit_status(self) -> int:
        return 0 if self.passed else 1


def _fmt_mv(mv):
    return format_multivector(mv)


def _run_ftc(s, geo, quad, threads, timing):
    f, g = s.build_field("f"), s.build_field("g")
    tol = s.effective_tolerance()
    rep = ftc_check(g, f, geo, quad, levels=s.levels, scenario=s.name, threads=threads, timing=timing)
    final = rep.final()
    ok = final.rel_residual <= tol and rep.converged()
    lines = [f"{s.name}: ftc over {len(rep.table)} levels, final rel residual {final.rel_residual:.3e} "
             f"(tol {tol:g}), converged={rep.converged()}",
             f"  lhs = {_fmt_mv(rep.levels[-1][0])}", f"  rhs = {_fmt_mv(rep.levels[-1][1])}"]
    if isinstance(geo, PatchComplex) and len(geo) > 1:
        cor = corollary_check(geo, quad, threads=threads)
        lines.append(f"  corollary D(boundary) norm {cor.norm:.3e} over {cor.shared_faces} shared faces")
        if not cor.ok:
            lines.append("  corollary violated: glued patches are not consistently oriented")
            ok = False
    return ok, rep.to_csv(), lines


def _run_content(s, geo, quad, threads, timing):
    tol = s.effective_tolerance()
    content = directed_content(geo, quad, threads)
    cor = corollary_check(geo, quad, tol=tol, threads=threads)
    header = "scenario,k,n,q,m,content,corollary_norm,shared_faces,nodes\n"
    row = ",".join([s.name, str(geo.k), str(geo.n), str(quad.q), str(quad.m), f'"{_fmt_mv(content.value)}"',
                    repr(cor.norm), str(cor.shared_faces), str(content.node_count)])
    lines = [f"{s.name}: directed content {_fmt_mv(content.value)}",
             f"  corollary D(boundary) norm {cor.norm:.3e} (tol {tol:g}) over {cor.shared_faces} shared faces"]
    if not cor.ok:
        lines.append("  corollary violated: boundary content does not vanish (inconsistent glue orientation?)")
    return cor.ok, header + row + "\n", lines


def _classical_ok(reports, s, tol):
    ok = True
    for r in reports:
        if r.residual / max(1.0, abs(r.rhs)) > tol:
            ok = False
        if r.oracle is not None and r.oracle_error() / max(1.0, abs(r.oracle)) > tol:
            ok = False
    return ok


def _run_classical(s, geo, quad, threads, timing):
    tol = s.effective_tolerance()
    f = s.build_field("f")
    if s.check == "green":
        rep = greens_theorem_check(f, geo, quad, s.name, oracle=s.oracle, threads=threads)
        reports = rep.reports()
        extra = [f"  dot form residual {rep.dot_residual:.3e}, consistency with ftc {rep.ftc_consistency:.3e}"]
    elif s.check == "stokes":
        reports = [stokes_theorem_check(f, geo, quad, s.name, oracle=s.oracle, threads=threads)]
        extra = [f"  consistency with ftc {reports[0].consistency:.3e}"]
    else:
        reports = [gauss_divergence_check(f, geo, quad, s.name, oracle=s.oracle, threads=threads)]
        extra = [f"  consistency with ftc {reports[0].consistency:.3e}"]
    ok = _classical_ok(reports, s, tol)
    return ok, reports_to_csv(reports), [r.summary() for r in reports] + extra


def _run_path(s, geo, quad, threads, timing):
    tol = s.effective_tolerance()
    curves = [_build_patch(p, s.name) for p in s.patches]
    reports = path_independence_check(s.build_field("g"), s.build_field("f"), curves, quad, s.name, threads=threads)
    scale = max(1.0, reports[0].rhs)
    ok = all(r.extra["max_diff"] <= tol * scale for r in reports) and reports[0].extra["spread"] <= tol * scale
    lines = [f"{r.summary()} max|int - endpoint| = {r.extra['max_diff']:.3e}" for r in reports]
    lines.append(f"  endpoint value {_fmt_mv(reports[0].extra['endpoint'])}, spread {reports[0].extra['spread']:.3e}")
    return ok, reports_to_csv(reports), lines


def _run_identities(s, quad, threads, timing):
    method = s.method or "fd"
    tol = s.effective_tolerance()
    rep = identity_suite(s.dim, s.trials, s.seed, method)
    lines = [f"{s.name}: identities n={s.dim} ({method}, {s.trials} points) max rel err {rep.max_error():.3e} "
             f"(tol {tol:g})"]
    lines += [f"  formula {r.formula_id}: {r.description}: max {r.max_rel_err:.3e}" for r in rep.results]
    return rep.passed(tol), rep.to_csv(), lines


def _run_monogenic(s, quad, threads, timing):
    f = s.build_field("f")
    region = SampleBox(*s.box) if s.box is not None else _build_patch(s.region, s.name)
    fd = None if s.method is None else s.method == "fd"
    rep = monogenicity_certificate(f, region, fd=fd, tolerance=s.tolerance)
    ok = rep.certified == s.expect
    csv_text = ("scenario,field,method,points,max_norm,tolerance,certified\n"
                f"{s.name},{rep.field},{rep.method},{rep.points},{rep.max_norm!r},{rep.tolerance!r},{rep.certified}\n")
    lines = [f"{s.name}: {rep.summary()} (expected {'monogenic' if s.expect else 'not monogenic'})"]
    return ok, csv_text, lines


def _run_cauchy(s, geo, quad, threads, timing):
    f = s.build_field("f")
    tol = s.effective_tolerance()
    results = []
    for p in s.points:
        if s.full:
            region = _build_patch(s.region, s.name)
            results.append(full_cauchy_formula(f, region, p, quad, threads, boundary=geo, scenario=s.name))
        else:
            results.append(reconstruction_report(f, geo, p, quad, threads, scenario=s.name))
    ok = all(r.abs_err <= tol * max(1.0, float(r.direct.max_abs())) for r in results)
    lines = [f"{s.name}: {'full Cauchy formula' if s.full else 'boundary reconstruction'} at {len(results)} "
             f"point(s), max abs err {max(r.abs_err for r in results):.3e} (tol {tol:g})"]
    for r in results:
        lines.append(f"  x'={r.point}: {_fmt_mv(r.reconstructed)} vs {_fmt_mv(r.direct)}"
                     + (f" (r0={r.excluded_radius:.3g})" if s.full else ""))
    return ok, reconstruction_csv(results), lines


def run_scenario(s: Scenario, threads: int = 1, quad: Optional[QuadratureSpec] = None, seed: Optional[int] = None,
                 out: Optional[str] = None, timing: bool = True, write: bool = True) -> RunResult:
    """Execute a scenario; ``passed`` is true iff every residual is within tolerance.

    ``quad`` and ``seed`` override the scenario's values. The CSV goes to
    ``out`` if given, else to the scenario's ``output`` path (if any).
    Runtime failures are re-raised as :class:`ScenarioError` naming the
    scenario.
    """
    if quad is not None:
        s = replace(s, quadrature=quad)
    if seed is not None:
        s = replace(s, seed=seed)
    q = s.quadrature
    try:
        geo = s.build_geometry()
        if s.check == "ftc":
            ok, text, lines = _run_ftc(s, geo, q, threads, timing)
        elif s.check == "content":
            ok, text, lines = _run_content(s, geo, q, threads, timing)
        elif s.check in ("green", "stokes", "gauss"):
            ok, text, lines = _run_classical(s, geo, q, threads, timing)
        elif s.check == "path":
            ok, text, lines = _run_path(s, geo, q, threads, timing)
        elif s.check == "identities":
            ok, text, lines = _run_identities(s, q, threads, timing)
        elif s.check == "monogenic":
            ok, text, lines = _run_monogenic(s, q, threads, timing)
        else:
            ok, text, lines = _run_cauchy(s, geo, q, threads, timing)
    except ScenarioError:
        raise
    except GeocalcError as exc:
        raise ScenarioError(f"{type(exc).__name__}: {exc}", s.name) from exc
    path = out or s.output
    if write and path:
        folder = os.path.dirname(path)
        if folder:
            os.makedirs(folder, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    lines.append(f"{s.name}: {'PASS' if ok else 'FAIL'}")
    return RunResult(s.name, ok, text, lines, path if write else None)
