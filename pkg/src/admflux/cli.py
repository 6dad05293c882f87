"""Configuration-driven command line producing convergence tables and verdicts.

Subcommands select which checks run; a JSON config file describes the metric,
the surface schedule and tolerances.  Each check writes a CSV (or JSON) table
of per-radius values plus an entry in ``summary.json``; the exit status is 0
only when every requested check passes.  All quantities are dimensionless
(geometrized units).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis, invariants
from .catalog import CatalogSpec, build
from .errors import ConfigError, DomainError, SingularMetricError, UndefinedCenterError
from .metric_field import MetricField, decay_report, decreasing_to_zero
from .surfaces import sphere_quadrature

ALL_FUNCTIONALS = (
    "adm_mass",
    "intrinsic_mass",
    "cs_center",
    "intrinsic_center",
    "identity_residuals",
    "scalar_moments",
    "decay_checks",
)

SUBCOMMAND_FUNCTIONALS = {
    "mass": ("adm_mass", "intrinsic_mass"),
    "center": ("cs_center", "intrinsic_center"),
    "compare": ("adm_mass", "intrinsic_mass", "cs_center", "intrinsic_center"),
    "identities": ("identity_residuals",),
    "decay": ("decay_checks",),
    "sweep": None,  # use the config's functional list
}

EXIT_PASS = 0
EXIT_CERTIFICATION_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_ERROR = 3

#: Reaches far enough out that the canonical examples' final samples sit
#: within the default limit tolerance of their fitted limits.
DEFAULT_RADII = tuple(100.0 * 2**k for k in range(9))


@dataclass
class RunConfig:
    """Validated run description: metric, checks, schedule, outputs."""

    metric: CatalogSpec
    functionals: tuple[str, ...] = ALL_FUNCTIONALS
    radii: tuple[float, ...] = DEFAULT_RADII
    surface_kind: str = "spheres"
    ellipsoid_ratios: tuple[float, ...] = (2.0, 1.0, 1.0)
    order: int = 24
    tol: float = 1e-4
    identity_tol: float = 1e-8
    out_dir: Path = Path("admflux-out")
    fmt: str = "csv"


def _parse_metric(obj: dict) -> CatalogSpec:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ConfigError("'metric' must be an object with a 'kind' entry")
    kind = obj["kind"]
    kwargs: dict = {"kind": kind, "dim": int(obj.get("dim", 3))}
    if "label" in obj:
        kwargs["label"] = str(obj["label"])
    if "inner_radius" in obj:
        kwargs["inner_radius"] = float(obj["inner_radius"])
    if kind == "schwarzschild":
        kwargs["mass"] = float(obj.get("mass", 1.0))
        kwargs["center"] = tuple(float(t) for t in obj.get("center", ()))
    elif kind == "conformal":
        coeffs = obj.get("u", ())
        kwargs["u_coeffs"] = tuple((int(k), float(a)) for k, a in coeffs)
        kwargs["center"] = tuple(float(t) for t in obj.get("center", ()))
    elif kind == "perturbed":
        if "base" not in obj:
            raise ConfigError("perturbed metric config needs a 'base'")
        kwargs["base"] = _parse_metric(obj["base"])
        bump = obj.get("bump", {})
        kwargs["bump_amplitude"] = float(bump.get("amplitude", 0.05))
        kwargs["bump_width"] = float(bump.get("width", 2.0))
        kwargs["bump_location"] = tuple(float(t) for t in bump.get("location", ()))
        kwargs["bump_parity"] = str(bump.get("parity", "none"))
        kwargs["bump_profile"] = str(bump.get("profile", "gaussian"))
        kwargs["bump_tail_power"] = int(bump.get("tail_power", 3))
    elif kind == "rt_violator":
        kwargs["amplitude"] = float(obj.get("amplitude", 0.5))
    elif kind != "flat":
        raise ConfigError(f"unknown metric kind {kind!r}")
    return CatalogSpec(**kwargs)


def load_config(path: str | Path) -> RunConfig:
    """Parse and validate a JSON run configuration."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: top level must be an object")
    if "metric" not in obj:
        raise ConfigError(f"{path}: missing 'metric'")
    cfg = RunConfig(metric=_parse_metric(obj["metric"]))
    if "functionals" in obj:
        fns = tuple(str(t) for t in obj["functionals"])
        unknown = [t for t in fns if t not in ALL_FUNCTIONALS]
        if unknown:
            raise ConfigError(f"{path}: unknown functionals {unknown}; choose from {ALL_FUNCTIONALS}")
        if not fns:
            raise ConfigError(f"{path}: 'functionals' must not be empty")
        cfg.functionals = fns
    sched = obj.get("schedule", {})
    if sched:
        if "radii" in sched:
            cfg.radii = tuple(float(t) for t in sched["radii"])
        cfg.surface_kind = str(sched.get("kind", "spheres"))
        if cfg.surface_kind not in ("spheres", "ellipsoids"):
            raise ConfigError(f"{path}: schedule kind must be 'spheres' or 'ellipsoids'")
        if "ratios" in sched:
            cfg.ellipsoid_ratios = tuple(float(t) for t in sched["ratios"])
    if "order" in obj:
        cfg.order = int(obj["order"])
    tols = obj.get("tolerances", {})
    cfg.tol = float(tols.get("limit", cfg.tol))
    cfg.identity_tol = float(tols.get("identity", cfg.identity_tol))
    out = obj.get("output", {})
    cfg.out_dir = Path(out.get("dir", cfg.out_dir))
    cfg.fmt = str(out.get("format", cfg.fmt))
    _validate_config(cfg)
    return cfg


def _validate_config(cfg: RunConfig) -> None:
    if cfg.order < 2:
        raise ConfigError(f"quadrature order must be >= 2, got {cfg.order}")
    if len(cfg.radii) < 4 or any(b <= a for a, b in zip(cfg.radii, cfg.radii[1:])):
        raise ConfigError("schedule radii must be strictly increasing with at least 4 entries")
    if cfg.fmt not in ("csv", "json"):
        raise ConfigError(f"output format must be 'csv' or 'json', got {cfg.fmt!r}")
    if cfg.tol <= 0 or cfg.identity_tol <= 0:
        raise ConfigError("tolerances must be positive")
    inner = build(cfg.metric).inner_radius
    scale = min(cfg.ellipsoid_ratios) if cfg.surface_kind == "ellipsoids" else 1.0
    if cfg.radii[0] * scale < inner:
        raise ConfigError(
            f"smallest schedule radius {cfg.radii[0]:g} (scale {scale:g}) lies inside the "
            f"metric's inner radius {inner:g}"
        )


# ---------------------------------------------------------------------------
# check execution


@dataclass
class Check:
    name: str
    verdict: bool
    fitted_limit: object
    fitted_rate: float | None
    tolerance: float
    table_columns: list[str] = field(default_factory=list)
    table_rows: list[list[float]] = field(default_factory=list)

    def summary(self) -> dict:
        lim = self.fitted_limit
        if isinstance(lim, np.ndarray):
            lim = [float(t) for t in lim]
        return {
            "functional": self.name,
            "fitted_limit": lim,
            "fitted_rate": self.fitted_rate,
            "verdict": bool(self.verdict),
            "tolerance": self.tolerance,
        }


def _report_check(report: analysis.ConvergenceReport, name: str) -> Check:
    if report.is_vector:
        cols = ["r"] + [f"value_{a + 1}" for a in range(report.values.shape[1])]
        rows = [[r, *map(float, report.values[i])] for i, r in enumerate(report.radii)]
    else:
        cols = ["r", "value"]
        rows = [[r, float(report.values[i])] for i, r in enumerate(report.radii)]
    return Check(
        name=name,
        verdict=report.verdict,
        fitted_limit=report.fitted_limit,
        fitted_rate=report.fitted_rate,
        tolerance=report.tolerance,
        table_columns=cols,
        table_rows=rows,
    )


def _surface_builder(cfg: RunConfig, fld: MetricField):
    if cfg.surface_kind == "ellipsoids":
        return analysis.ellipsoid_family(cfg.ellipsoid_ratios)
    return analysis.sphere_family(fld.dim)


def _mass_for_centers(fld: MetricField, cfg: RunConfig, sweeps: dict) -> float:
    if "adm_mass" in sweeps:
        return float(sweeps["adm_mass"].fitted_limit)
    report = analysis.sweep(
        fld, "adm_mass", cfg.radii, surface=_surface_builder(cfg, fld),
        order=cfg.order, tol=cfg.tol,
    )
    sweeps["adm_mass"] = report
    return float(report.fitted_limit)


def run_checks(cfg: RunConfig, functionals: tuple[str, ...], with_compare: bool) -> list[Check]:
    fld = build(cfg.metric)
    builder = _surface_builder(cfg, fld)
    sweeps: dict[str, analysis.ConvergenceReport] = {}
    checks: list[Check] = []

    for name in ("adm_mass", "intrinsic_mass", "cs_center", "intrinsic_center"):
        if name not in functionals:
            continue
        kwargs = {}
        if analysis.FUNCTIONALS[name]["needs_mass"]:
            kwargs["mass"] = _mass_for_centers(fld, cfg, sweeps)
        report = analysis.sweep(
            fld, name, cfg.radii, surface=builder, order=cfg.order, tol=cfg.tol, **kwargs
        )
        sweeps[name] = report
        checks.append(_report_check(report, name))

    if with_compare and "adm_mass" in sweeps and "intrinsic_mass" in sweeps:
        diff = analysis.compare(sweeps["adm_mass"], sweeps["intrinsic_mass"], tol=cfg.tol)
        checks.append(_report_check(diff, "mass_difference"))
    if with_compare and "cs_center" in sweeps and "intrinsic_center" in sweeps:
        diff = analysis.compare(sweeps["cs_center"], sweeps["intrinsic_center"], tol=cfg.tol)
        checks.append(_report_check(diff, "center_difference"))

    if "identity_residuals" in functionals:
        checks.extend(_identity_checks(fld, cfg))
    if "scalar_moments" in functionals:
        checks.append(_scalar_moment_check(fld, cfg))
    if "decay_checks" in functionals:
        checks.extend(_decay_checks(fld, cfg))
    return checks


def _identity_checks(fld: MetricField, cfg: RunConfig) -> list[Check]:
    # The identities hold on any enclosing surface; small radii keep the
    # cancelled integrals O(1) so the residual reflects quadrature error
    # rather than rounding of large terms.
    if fld.metadata.get("globally_smooth", False):
        outer = sphere_quadrature(fld.dim, cfg.radii[0], cfg.order)
        inner = None
    else:
        outer = sphere_quadrature(fld.dim, cfg.radii[1], cfg.order)
        inner = sphere_quadrature(fld.dim, cfg.radii[0], cfg.order)
    r_used = outer.nominal_radius
    out = []
    res_x = invariants.ibp_residual_X(fld, outer, inner=inner)
    out.append(
        Check(
            name="identity_residual_X",
            verdict=abs(res_x) <= cfg.identity_tol,
            fitted_limit=res_x,
            fitted_rate=None,
            tolerance=cfg.identity_tol,
            table_columns=["r", "value"],
            table_rows=[[r_used, res_x]],
        )
    )
    rows = []
    worst = 0.0
    for alpha in range(1, fld.dim + 1):
        res = invariants.ibp_residual_Y(fld, outer, alpha, inner=inner)
        worst = max(worst, abs(res))
        rows.append(res)
    out.append(
        Check(
            name="identity_residual_Y",
            verdict=worst <= cfg.identity_tol,
            fitted_limit=np.array(rows),
            fitted_rate=None,
            tolerance=cfg.identity_tol,
            table_columns=["r"] + [f"value_{a + 1}" for a in range(fld.dim)],
            table_rows=[[r_used, *rows]],
        )
    )
    return out


def _scalar_moment_check(fld: MetricField, cfg: RunConfig) -> Check:
    """Shell integrals of the scalar curvature over the schedule's annuli."""
    rows = []
    shells = []
    for r0, r1 in zip(cfg.radii, cfg.radii[1:]):
        val = invariants.scalar_curvature_moment(fld, r0, r1, moment=0, order=min(cfg.order, 16))
        shells.append(val)
        rows.append([r1, val])
    converging = decreasing_to_zero(np.abs(shells[len(shells) // 2 :]))
    return Check(
        name="scalar_moment_shells",
        verdict=converging,
        fitted_limit=shells[-1],
        fitted_rate=None,
        tolerance=cfg.tol,
        table_columns=["r", "value"],
        table_rows=rows,
    )


def _decay_checks(fld: MetricField, cfg: RunConfig) -> list[Check]:
    n = fld.dim
    out = []
    for name, tau, part in (
        ("decay_all", (n - 2) / 2.0, "all"),
        ("decay_odd", n / 2.0, "odd"),
    ):
        rep = decay_report(fld, cfg.radii, tau, part=part)
        out.append(
            Check(
                name=name,
                verdict=rep.ok,
                fitted_limit=rep.sups[-1].tolist(),
                fitted_rate=None,
                tolerance=cfg.tol,
                table_columns=["r", "value_1", "value_2", "value_3"],
                table_rows=[[r, *map(float, rep.sups[a])] for a, r in enumerate(rep.radii)],
            )
        )
    return out


# ---------------------------------------------------------------------------
# output


def _write_tables(checks: list[Check], cfg: RunConfig) -> None:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    for check in checks:
        if cfg.fmt == "csv":
            path = cfg.out_dir / f"{check.name}.csv"
            with path.open("w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(check.table_columns)
                for row in check.table_rows:
                    writer.writerow([repr(float(v)) for v in row])
        else:
            path = cfg.out_dir / f"{check.name}.json"
            records = [dict(zip(check.table_columns, map(float, row))) for row in check.table_rows]
            path.write_text(json.dumps(records, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    summary = {"checks": [c.summary() for c in checks]}
    (cfg.out_dir / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def run(cfg: RunConfig, functionals: tuple[str, ...] | None = None, with_compare: bool = True) -> int:
    """Execute the configured checks, write artifacts, and return the exit status."""
    wanted = functionals if functionals is not None else cfg.functionals
    try:
        checks = run_checks(cfg, wanted, with_compare)
    except (DomainError, SingularMetricError, UndefinedCenterError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL_ERROR
    _write_tables(checks, cfg)
    for check in checks:
        status = "PASS" if check.verdict else "FAIL"
        print(f"[{status}] {check.name}: limit={_fmt(check.fitted_limit)} "
              f"rate={_fmt(check.fitted_rate)} tol={check.tolerance:g}")
    if all(c.verdict for c in checks):
        return EXIT_PASS
    return EXIT_CERTIFICATION_FAILURE


def _fmt(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, (list, tuple, np.ndarray)):
        return "(" + ", ".join(f"{float(v):.6g}" for v in np.atleast_1d(value)) + ")"
    return f"{float(value):.6g}"


# ---------------------------------------------------------------------------
# argument parsing


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="admflux",
        description="Convergence tables and verdicts for mass and center-of-mass "
        "invariants of asymptotically flat metrics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("mass", "flux and curvature mass sweeps"),
        ("center", "both center-of-mass sweeps"),
        ("compare", "difference certifications between the two routes"),
        ("identities", "integration-by-parts residual checks"),
        ("decay", "decay-class checks for the deviation and its odd part"),
        ("sweep", "full suite from the config's functional list"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, help="JSON run configuration")
        p.add_argument("--order", type=int, help="override quadrature order")
        p.add_argument("--radii", type=str, help="override schedule, comma-separated")
        p.add_argument("--out", type=Path, help="override output directory")
        p.add_argument("--format", choices=("csv", "json"), help="table format")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.config is not None:
            cfg = load_config(args.config)
        else:
            cfg = RunConfig(metric=CatalogSpec(kind="schwarzschild", mass=1.0))
        if args.order is not None:
            cfg.order = args.order
        if args.radii is not None:
            cfg.radii = tuple(float(t) for t in args.radii.split(","))
        if args.out is not None:
            cfg.out_dir = args.out
        if args.format is not None:
            cfg.fmt = args.format
        _validate_config(cfg)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    functionals = SUBCOMMAND_FUNCTIONALS[args.command]
    with_compare = args.command in ("compare", "sweep")
    return run(cfg, functionals=functionals, with_compare=with_compare)


if __name__ == "__main__":
    sys.exit(main())
