"""Input parsing, JSON reports and the ``surfsig`` command line."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from .crossed_module import CrossedModuleContext, HElement, build_context
from .free_lie import generate_lyndon, render_tree
from .path_dev import PathContext, PLPath, path_logsig
from .surface_dev import (
    LinearSurface,
    Rect,
    SurfaceGrid,
    chen_assemble,
    chen_residual,
    omega_quadrature,
    stokes_check,
)
from .tensor_algebra import Scalar

log = logging.getLogger("surfsig")

MAX_LEVEL = 8
EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGED = 0, 1, 2
KINDS = ("grid-csv", "grid-json", "path-csv", "path-json", "linear-matrix-json")


class ValidationError(ValueError):
    """Bad input or flags; ``code`` names the failure class."""

    def __init__(self, message: str, code: str = "invalid"):
        super().__init__(message)
        self.code = code


# ------------------------------------------------------------------ numbers
def parse_number(text: Any, exact: bool) -> Scalar:
    if isinstance(text, (int, Fraction)) and exact:
        return Fraction(text)
    try:
        if exact:
            value = Fraction(str(text).strip())
        else:
            value = float(Fraction(text)) if isinstance(text, str) and "/" in text else float(text)
    except (ValueError, ZeroDivisionError) as exc:
        if str(text).strip().lower() in ("nan", "inf", "-inf", "+inf", "infinity", "-infinity"):
            raise ValidationError(f"non-finite value {text!r}", "non-finite") from exc
        raise ValidationError(f"cannot parse number {text!r}", "parse") from exc
    if not exact and not math.isfinite(value):
        raise ValidationError(f"non-finite value {text!r}", "non-finite")
    return value


def render_number(c: Scalar) -> str | float:
    if isinstance(c, Fraction):
        return str(c)
    return float(format(float(c), ".17g"))


# ------------------------------------------------------------------ ingestion
def _read_csv(path: Path) -> list[list[str]]:
    with open(path, newline="") as fh:
        return [row for row in csv.reader(fh) if row and any(cell.strip() for cell in row)]


def _grid_from_rows(M1: int, M2: int, n: int, rows: Sequence[Sequence], exact: bool) -> SurfaceGrid:
    if M1 < 1 or M2 < 1 or n < 1:
        raise ValidationError(f"bad grid header M1={M1}, M2={M2}, n={n}", "shape-mismatch")
    values: dict[tuple[int, int], list] = {}
    for row in rows:
        if len(row) != n + 2:
            raise ValidationError(f"row {list(row)} has {len(row)} fields, expected {n + 2}", "shape-mismatch")
        try:
            a, b = int(row[0]), int(row[1])
        except ValueError as exc:
            raise ValidationError(f"bad node index in {list(row)}", "parse") from exc
        if not (0 <= a <= M1 and 0 <= b <= M2):
            raise ValidationError(f"node ({a},{b}) outside the {M1}x{M2} grid", "shape-mismatch")
        values[(a, b)] = [parse_number(x, exact) for x in row[2:]]
    for a in range(M1 + 1):
        for b in range(M2 + 1):
            if (a, b) not in values:
                raise ValidationError(f"incomplete grid at ({a},{b})", "missing-node")
    arr = [[values[(a, b)] for b in range(M2 + 1)] for a in range(M1 + 1)]
    return SurfaceGrid(arr, exact)


def ingest_surface(path: str | Path, kind: str, exact: bool = True):
    """Read a SurfaceGrid (grid-csv, grid-json) or a LinearSurface (linear-matrix-json)."""
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"no such file {path}", "missing-file")
    if kind == "grid-csv":
        rows = _read_csv(path)
        if not rows:
            raise ValidationError("empty grid file", "parse")
        header = [c.strip() for c in rows[0]]
        if header == ["M1", "M2", "n"]:
            rows = rows[1:]
            header = [c.strip() for c in rows[0]]
        try:
            M1, M2, n = (int(x) for x in header)
        except ValueError as exc:
            raise ValidationError(f"bad grid header {header}", "parse") from exc
        return _grid_from_rows(M1, M2, n, rows[1:], exact)
    if kind == "grid-json":
        data = _load_json(path)
        try:
            values = data["values"] if isinstance(data, dict) else data
            arr = [[[parse_number(x, exact) for x in node] for node in col] for col in values]
        except (TypeError, KeyError) as exc:
            raise ValidationError("grid JSON must be a nested [a][b][i] array", "parse") from exc
        widths = {len(col) for col in arr}
        dims = {len(node) for col in arr for node in col}
        if len(widths) != 1 or len(dims) != 1:
            raise ValidationError("ragged grid JSON", "shape-mismatch")
        if len(arr) < 2 or widths.pop() < 2:
            raise ValidationError("grid needs at least 2 x 2 nodes", "shape-mismatch")
        return SurfaceGrid(arr, exact)
    if kind == "linear-matrix-json":
        data = _load_json(path)
        M = data.get("M") if isinstance(data, dict) else data
        if not isinstance(M, list) or not M or any(not isinstance(r, list) or len(r) != 2 for r in M):
            raise ValidationError("linear surface JSON needs \"M\": an n x 2 array", "shape-mismatch")
        return LinearSurface([[parse_number(x, exact) for x in r] for r in M], exact)
    raise ValidationError(f"kind {kind!r} is not a surface kind", "invalid")


def ingest_path(path: str | Path, kind: str, exact: bool = True) -> PLPath:
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"no such file {path}", "missing-file")
    if kind == "path-csv":
        rows = _read_csv(path)
        if rows and not _is_numeric_row(rows[0]):
            rows = rows[1:]
        points = [[parse_number(x, exact) for x in r] for r in rows]
    elif kind == "path-json":
        data = _load_json(path)
        data = data.get("points") if isinstance(data, dict) else data
        if not isinstance(data, list):
            raise ValidationError("path JSON must be a list of points", "parse")
        points = [[parse_number(x, exact) for x in p] for p in data]
    else:
        raise ValidationError(f"kind {kind!r} is not a path kind", "invalid")
    if not points:
        raise ValidationError("a path needs at least one point", "shape-mismatch")
    if len({len(p) for p in points}) != 1:
        raise ValidationError("points of mixed dimension", "shape-mismatch")
    return PLPath(points)


def _is_numeric_row(row: Sequence[str]) -> bool:
    try:
        for x in row:
            Fraction(x.strip())
    except ValueError:
        return False
    return True


def _load_json(path: Path):
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON in {path}: {exc}", "parse") from exc


def guess_kind(path: str | Path) -> str:
    p = Path(path)
    if not p.exists():
        raise ValidationError(f"no such file {p}", "missing-file")
    if p.suffix == ".csv":
        rows = _read_csv(p)[:2]
        head = [c.strip() for c in rows[0]] if rows else []
        if head == ["M1", "M2", "n"]:
            return "grid-csv"
        if len(rows) == 2 and len(head) == 3 and all(c.isdigit() for c in head) and len(rows[1]) == int(head[2]) + 2:
            return "grid-csv"
        return "path-csv"
    data = _load_json(p)
    if isinstance(data, dict) and "M" in data:
        return "linear-matrix-json"
    if isinstance(data, dict) and "points" in data:
        return "path-json"
    if isinstance(data, list) and data and isinstance(data[0], list) and data[0] and isinstance(data[0][0], list):
        return "grid-json"
    return "path-json"


# ------------------------------------------------------------------ reports
@dataclass
class CoefficientReport:
    exact: bool
    provenance: str
    levels: list = field(default_factory=list)  # [(level, [(label, coefficient), ...])]
    defects: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def coefficient(self, label: str) -> Scalar:
        for _, terms in self.levels:
            for lab, c in terms:
                if lab == label:
                    return c
        raise KeyError(label)


def _render_value(v):
    if isinstance(v, dict):
        return {str(k): _render_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_render_value(x) for x in v]
    if isinstance(v, (Fraction, float)):
        return render_number(v)
    return v


def render_report(report: CoefficientReport) -> str:
    body: dict[str, Any] = {
        "exact": report.exact,
        "provenance": report.provenance,
        "levels": [
            {"level": lvl, "terms": [[lab, render_number(c)] for lab, c in terms]}
            for lvl, terms in report.levels
        ],
    }
    if report.defects:
        body["defects"] = _render_value(report.defects)
    if report.extra:
        body["extra"] = _render_value(report.extra)
    return json.dumps(body, indent=2)


def parse_report(text: str) -> CoefficientReport:
    data = json.loads(text)
    exact = bool(data.get("exact", True))
    levels = []
    for entry in data.get("levels", []):
        terms = [(lab, parse_number(c, exact)) for lab, c in entry["terms"]]
        levels.append((int(entry["level"]), terms))
    return CoefficientReport(exact, data.get("provenance", ""), levels, data.get("defects", {}), data.get("extra", {}))


def omega_report(h: HElement, provenance: str, structured: bool = True) -> CoefficientReport:
    """Coefficients per level, on the structured basis (generators, brackets, kernel) or the quotient basis."""
    ctx = h.ctx
    levels = []
    for ell in range(2, ctx.N + 1):
        if structured:
            coeffs = ctx.structured_coordinates(h, ell)
            terms = [(lab, c) for lab, c in coeffs.items() if c != 0]
        else:
            terms = [(lab, c) for lab, c in zip(ctx.quotient_labels(ell), h.level(ell)) if c != 0]
        levels.append((ell, terms))
    return CoefficientReport(ctx.exact, provenance, levels)


def parse_basis_label(ctx: CrossedModuleContext, ell: int, label: str) -> int:
    """Index of a structured-basis label at level ``ell``."""
    labels = [lab for lab, _ in ctx.structured_basis(ell)]
    try:
        return labels.index(label.replace(" ", ""))
    except ValueError:
        raise ValidationError(f"{label!r} is not a level-{ell} basis element", "parse") from None


def lie_report(L, provenance: str) -> CoefficientReport:
    from .free_lie import first_kind_coordinates

    basis = generate_lyndon(L.n, max(L.N, 1))
    coeffs = first_kind_coordinates(L, basis)
    levels = []
    for p in range(1, L.N + 1):
        terms = [(render_tree(t), coeffs[t]) for t in basis.trees(p) if t in coeffs]
        levels.append((p, terms))
    return CoefficientReport(L.exact, provenance, levels)


# ------------------------------------------------------------------ config
@dataclass
class RunConfig:
    command: str
    n: int | None = None
    level: int = 2
    input: str | None = None
    kind: str | None = None
    rect: Rect | None = None
    assembly: str = "row"
    tol: float | None = None
    nmax: int = 30
    exact: bool | None = None
    out: str | None = None

    def validate(self) -> None:
        if self.n is not None and self.n < 1:
            raise ValidationError("--n must be >= 1")
        if not 2 <= self.level <= MAX_LEVEL:
            raise ValidationError(f"--level must be in 2..{MAX_LEVEL}")
        if self.kind is not None and self.kind not in KINDS:
            raise ValidationError(f"--kind must be one of {', '.join(KINDS)}")
        if self.rect is not None:
            r = self.rect
            if not (0 <= r.s1 <= r.t1 <= 1 and 0 <= r.s2 <= r.t2 <= 1):
                raise ValidationError("--rect must lie within [0,1]^2")
        if self.nmax < 1:
            raise ValidationError("--nmax must be >= 1")
        if self.tol is not None and self.tol <= 0:
            raise ValidationError("--tol must be positive")


def _parse_rect(text: str) -> Rect:
    parts = text.split(",")
    if len(parts) != 4:
        raise ValidationError("--rect expects s1,s2,t1,t2")
    vals = [parse_number(p, True) for p in parts]
    try:
        return Rect(*vals)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message, "usage")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="surfsig", description="Surface log-signatures in the free crossed module.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "dims": "dimension table per level",
        "basis": "quotient, structured and kernel bases",
        "logsig-path": "log-signature of a piecewise-linear path",
        "logsig-surface": "surface log-signature by quadrature",
        "verify-stokes": "feedback(Omega) against the boundary log-signature",
        "verify-chen": "row/column assembly agreement and Chen residuals",
        "sew-demo": "2D sewing contraction table and subcontrol audit",
        "lift": "extend the level-2 cocycle of a linear surface by sewing",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--n", type=int)
        p.add_argument("--level", type=int, default=None)
        p.add_argument("--input")
        p.add_argument("--kind", choices=KINDS)
        p.add_argument("--rect")
        p.add_argument("--assembly", choices=("row", "column", "both"), default="row")
        p.add_argument("--tol", type=float)
        p.add_argument("--nmax", type=int, default=30)
        mode = p.add_mutually_exclusive_group()
        mode.add_argument("--exact", dest="exact", action="store_true", default=None)
        mode.add_argument("--float", dest="exact", action="store_false")
        p.add_argument("--out")
    return parser


def config_from_args(argv: Sequence[str]) -> RunConfig:
    ns = build_parser().parse_args(list(argv))
    defaults = {"dims": 5, "basis": 4, "logsig-path": 3, "logsig-surface": 4, "verify-stokes": 4,
                "verify-chen": 4, "sew-demo": 4, "lift": 3}
    cfg = RunConfig(
        command=ns.command, n=ns.n, level=ns.level if ns.level is not None else defaults[ns.command],
        input=ns.input, kind=ns.kind, rect=_parse_rect(ns.rect) if ns.rect else None,
        assembly=ns.assembly, tol=ns.tol, nmax=ns.nmax, exact=ns.exact, out=ns.out,
    )
    cfg.validate()
    return cfg


# ------------------------------------------------------------------ commands
DEMO_MATRIX = [[1, Fraction(3, 10)], [Fraction(1, 5), Fraction(7, 10)], [Fraction(-3, 5), Fraction(1, 2)]]


def _need_input(cfg: RunConfig) -> None:
    if not cfg.input:
        raise ValidationError(f"{cfg.command} needs --input")


def _load_surface(cfg: RunConfig, exact: bool):
    if not cfg.input:
        return LinearSurface(DEMO_MATRIX, exact)
    kind = cfg.kind or guess_kind(cfg.input)
    surface = ingest_surface(cfg.input, kind, exact)
    if cfg.n is not None and cfg.n != surface.n:
        raise ValidationError(f"--n {cfg.n} does not match the input dimension {surface.n}", "shape-mismatch")
    if surface.n < 2:
        raise ValidationError("surfaces need n >= 2", "shape-mismatch")
    return surface


def _surface_rect(cfg: RunConfig, surface, exact: bool) -> Rect:
    rect = cfg.rect or Rect.unit()
    if not exact:
        rect = Rect(*(float(x) for x in (rect.s1, rect.s2, rect.t1, rect.t2)))
    if isinstance(surface, SurfaceGrid):
        surface.span(rect)
    return rect


def cmd_dims(cfg: RunConfig) -> dict:
    n = cfg.n if cfg.n is not None else 3
    ctx = build_context(n, cfg.level)
    return {"n": n, "N": cfg.level, "levels": ctx.dims_table()}


def cmd_basis(cfg: RunConfig) -> dict:
    n = cfg.n if cfg.n is not None else 3
    ctx = build_context(n, cfg.level)
    out = []
    for ell in range(2, cfg.level + 1):
        kernel = []
        for label, h in ctx.structured_basis(ell):
            if label.startswith("ker"):
                kernel.append({"label": label, "terms": [[k, render_number(c)] for k, c in h.to_dict().items()]})
        out.append({
            "level": ell,
            "quotient": ctx.quotient_labels(ell),
            "structured": [lab for lab, _ in ctx.structured_basis(ell)],
            "kernel": kernel,
        })
    return {"n": n, "N": cfg.level, "levels": out}


def cmd_logsig_path(cfg: RunConfig) -> CoefficientReport:
    _need_input(cfg)
    exact = True if cfg.exact is None else cfg.exact
    kind = cfg.kind or guess_kind(cfg.input)
    path = ingest_path(cfg.input, kind, exact)
    if cfg.n is not None and cfg.n != path.dim:
        raise ValidationError(f"--n {cfg.n} does not match the path dimension {path.dim}", "shape-mismatch")
    L = path_logsig(path, PathContext(path.dim, cfg.level, exact)).series
    return lie_report(L, "path")


def _surface_setup(cfg: RunConfig, max_level: int | None = None):
    exact = True if cfg.exact is None else cfg.exact
    surface = _load_surface(cfg, exact)
    if max_level is not None and cfg.level > max_level:
        raise ValidationError(f"{cfg.command} supports --level <= {max_level}")
    ctx = build_context(surface.n, cfg.level, exact)
    return surface, ctx, _surface_rect(cfg, surface, exact)


def cmd_logsig_surface(cfg: RunConfig) -> CoefficientReport:
    surface, ctx, rect = _surface_setup(cfg, 5)
    om = omega_quadrature(surface, rect, ctx)
    report = omega_report(om.value, om.provenance)
    report.defects = {"stokes": stokes_check(om, surface)}
    return report


def cmd_verify_stokes(cfg: RunConfig) -> CoefficientReport:
    surface, ctx, rect = _surface_setup(cfg, 5)
    om = omega_quadrature(surface, rect, ctx)
    defects = stokes_check(om, surface)
    report = CoefficientReport(ctx.exact, "quadrature", defects={"stokes": defects})
    tol = cfg.tol if cfg.tol is not None else 0
    report.extra = {"ok": all(d <= tol for d in defects.values())}
    return report


def cmd_verify_chen(cfg: RunConfig) -> CoefficientReport:
    surface, ctx, rect = _surface_setup(cfg)
    cells = None if isinstance(surface, SurfaceGrid) else (4, 4)
    om = chen_assemble(surface, rect, ctx, cells=cells, order="both")
    defects: dict[str, Any] = {"row_vs_column": om.diagnostics["order_gap"]}
    for split in ("horizontal", "vertical"):
        try:
            defects[f"chen_{split}"] = chen_residual(surface, rect, ctx, cells, split=split)
        except ValueError:
            pass
    report = omega_report(om.value if cfg.assembly != "column" else om.diagnostics["column"], "assembled")
    report.defects = defects
    return report


def _dyadic(rect: Rect):
    from .sewing import DyadicRect

    for scale in range(0, 31):
        d = 2**scale
        vals = [Fraction(v) * d for v in (rect.s1, rect.s2, rect.t1, rect.t2)]
        if all(v.denominator == 1 for v in vals):
            return DyadicRect(scale, *(int(v) for v in vals))
    raise ValidationError("--rect corners must be dyadic rationals")


def cmd_sew_demo(cfg: RunConfig) -> tuple[CoefficientReport, int]:
    from .sewing import area_germ, sew_2d, subcontrol_audit, surface_boundary

    exact = False if cfg.exact is None else cfg.exact
    surface = _load_surface(cfg, exact)
    if not isinstance(surface, LinearSurface):
        raise ValidationError("sew-demo takes a linear-matrix-json surface")
    ctx = build_context(surface.n, cfg.level, exact)
    box = _dyadic(cfg.rect or Rect(Fraction(0), Fraction(0), Fraction(1, 64), Fraction(1, 64)))
    tol = cfg.tol if cfg.tol is not None else 1e-10
    value, diag = sew_2d(area_germ(surface, ctx), surface_boundary(surface, ctx), box, ctx, tol, cfg.nmax,
                         translation_invariant=True)
    report = omega_report(value, "sewn")
    ratios = diag.ratios
    report.defects = {
        "steps": [{"n": k + 1, "distance": d, "ratio": ratios[k - 1] if k else None}
                  for k, d in enumerate(diag.distances)],
        "converged": diag.converged,
    }
    if cfg.level <= 5:
        ref = omega_quadrature(surface, box.to_rect(exact), ctx).value
        report.defects["vs_quadrature"] = (value - ref).max_abs()
    audit = subcontrol_audit(5)
    report.extra = {"subcontrol_audit": {
        "scale": audit.scale, "rectangles": audit.rectangles, "all_balanced": audit.all_balanced,
        "max_ratio": str(audit.max_ratio), "max_ratio_float": audit.L,
        "max_ratio_shape": list(audit.max_ratio_shape), "min_area_fraction": audit.min_area_fraction,
    }}
    return report, EXIT_OK if diag.converged else EXIT_NONCONVERGED


def cmd_lift(cfg: RunConfig) -> tuple[CoefficientReport, int]:
    from .sewing import area_germ, extend_level, surface_boundary

    exact = False if cfg.exact is None else cfg.exact
    surface = _load_surface(cfg, exact)
    if not isinstance(surface, LinearSurface):
        raise ValidationError("lift takes a linear-matrix-json surface")
    if cfg.level < 3:
        raise ValidationError("lift needs --level >= 3")
    ctx = build_context(surface.n, cfg.level, exact)
    low = build_context(surface.n, 2, exact)
    box = _dyadic(cfg.rect or Rect.unit())
    tol = cfg.tol if cfg.tol is not None else 1e-10
    nmax = cfg.nmax if cfg.nmax != 30 else 80
    value, diag = extend_level(area_germ(surface, low), surface_boundary(surface, ctx), box, ctx, tol, nmax,
                               translation_invariant=True)
    report = omega_report(value, "lifted")
    report.defects = {"steps": diag.steps, "last_distance": diag.distances[-1] if diag.distances else 0,
                      "converged": diag.converged}
    if cfg.level <= 5:
        ref = omega_quadrature(surface, box.to_rect(exact), ctx).value
        kernel_gap = {}
        for ell in range(3, cfg.level + 1):
            a, b = ctx.structured_coordinates(value, ell), ctx.structured_coordinates(ref, ell)
            kernel_gap[ell] = {lab: a[lab] - b[lab] for lab in a if lab.startswith("ker")}
        report.extra = {"kernel_minus_quadrature": kernel_gap}
    return report, EXIT_OK if diag.converged else EXIT_NONCONVERGED


def run_command(argv: Sequence[str]) -> int:
    """Execute one CLI invocation; returns the exit code."""
    logging.basicConfig(level=os.environ.get("SURFSIG_LOG", "WARNING").upper(), format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(argv)
        code = EXIT_OK
        if cfg.command == "dims":
            payload: Any = cmd_dims(cfg)
        elif cfg.command == "basis":
            payload = cmd_basis(cfg)
        elif cfg.command == "logsig-path":
            payload = cmd_logsig_path(cfg)
        elif cfg.command == "logsig-surface":
            payload = cmd_logsig_surface(cfg)
        elif cfg.command == "verify-stokes":
            payload = cmd_verify_stokes(cfg)
        elif cfg.command == "verify-chen":
            payload = cmd_verify_chen(cfg)
        elif cfg.command == "sew-demo":
            payload, code = cmd_sew_demo(cfg)
        else:
            payload, code = cmd_lift(cfg)
    except ValidationError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    text = render_report(payload) if isinstance(payload, CoefficientReport) else json.dumps(_render_value(payload), indent=2)
    if cfg.out:
        Path(cfg.out).write_text(text + "\n")
        log.info("wrote %s", cfg.out)
    else:
        print(text)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    return run_command(sys.argv[1:] if argv is None else argv)


__all__ = [
    "ValidationError", "ingest_surface", "ingest_path", "guess_kind", "CoefficientReport", "render_report",
    "parse_report", "omega_report", "lie_report", "parse_basis_label", "RunConfig", "config_from_args",
    "run_command", "main", "EXIT_OK", "EXIT_INVALID", "EXIT_NONCONVERGED",
]
