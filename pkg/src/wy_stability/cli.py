"""Command-line front end: reproducible scans, reports, and witnesses.

Subcommands
-----------
integrals        monomial oracle vs quadrature for every even monomial
gform            quartic-energy coefficients, minima, and classification
scan             pencil eigenvalue scan over (bbar, r) with threshold bisection
counterexample   explicit negative direction and witness coefficient file
small-sphere     mass expansion rows and curvature case classification
certify          certificate thresholds, condition checks, pencil cross-check

Reports are JSON by default (CSV export flattens the per-point results);
identical configurations produce byte-identical reports.  Wall-clock
timings are volatile, so they are only embedded when requested with
``--timings``; the default report keeps the determinism guarantee.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import time
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .functional import (
    assemble_pencil,
    constant_field,
    min_pencil_eigenvalue,
)
from .gform import (
    Direction,
    RicciEigs,
    classify_bbar,
    g_quadratic,
    minimize_G,
)
from .harmonics import FieldCoeffs, build_basis, index_of
from .models import (
    CurvatureData,
    CASE_II,
    bbar_from_b,
    check_deficit_conditions,
    classify_small_sphere,
    deficit_closed_form,
    deficit_ratio_certificate,
    h_family,
    negative_direction,
    negative_part_certificate,
    positivity_radius,
    small_sphere_mass,
)
from .quad import build_grid, integrate, monomial_integral

__all__ = [
    "RunConfig",
    "main",
    "run",
    "cmd_integrals",
    "cmd_gform",
    "cmd_scan",
    "cmd_counterexample",
    "cmd_small_sphere",
    "cmd_certify",
]

SCHEMA_VERSION = 1
COMMANDS = ("integrals", "gform", "scan", "counterexample", "small-sphere", "certify")

THRESHOLD = 1.0 / 90.0
BRACKET_TARGET = 1.0 / 450.0


@dataclass(frozen=True)
class RunConfig:
    """Full parameter set for one command run; every field has a default.

    All defaults are echoed into the report so a run can be reproduced
    from the report alone.
    """

    command: str = ""
    n_theta: int = 32
    n_phi: int = 64
    ltrunc: int = 8
    seed: int = 1234
    out: str | None = None
    format: str = "json"
    timings: bool = False
    # family / direction parameters
    lam: tuple = (1.0, 1.0, -2.0)
    a: tuple = (0.0, 0.0, 1.0)
    bbar: float = 1.0 / 30.0
    r: float = 1e-2
    bbar_list: tuple = (0.0, 1.0 / 90.0, 1.0 / 30.0)
    r_list: tuple = (1e-1, 1e-2, 1e-3)
    directions: int = 1
    # scan bisection
    bisect_r: float = 1e-2
    bracket: tuple = (1.0 / 180.0, 1.0 / 45.0)
    # small-sphere inputs
    curv_r: float = 0.0
    ric_sq: float = 6.0
    lap_r: float = 0.0
    b: float = 0.0
    synthetic: bool = False
    # certify inputs
    family: str = "const"
    eps: float = 0.01
    beta: float = 1.0 / 3.0
    lambda1: float = 2.0
    alpha: float | None = None
    witness: str | None = None


_FLOAT_TUPLES = {"lam", "a", "bbar_list", "r_list", "bracket"}
_INT_FIELDS = {"n_theta", "n_phi", "ltrunc", "seed", "directions"}
_BOOL_FIELDS = {"timings", "synthetic"}
_FLOAT_FIELDS = {
    "bbar", "r", "bisect_r", "curv_r", "ric_sq", "lap_r", "b", "eps",
    "beta", "lambda1", "alpha",
}


class ConfigError(Exception):
    """Invalid configuration input (exit code 2)."""


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key in _FLOAT_TUPLES:
        return tuple(float(tok) for tok in raw.split(",") if tok.strip() != "")
    if key in _INT_FIELDS:
        return int(raw)
    if key in _BOOL_FIELDS:
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"cannot parse boolean {key}={raw!r}")
    if key in _FLOAT_FIELDS:
        return None if raw.lower() == "none" else float(raw)
    return raw


def load_config_file(path: str) -> dict:
    """Parse a key=value config file; '#' starts a comment line."""
    names = {f.name for f in fields(RunConfig)}
    out: dict = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, raw = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in names or key == "command":
            raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
        try:
            out[key] = _parse_value(key, raw)
        except (ValueError, ConfigError) as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from exc
    return out


def _config_dict(config: RunConfig) -> dict:
    # output placement is not an analysis parameter; leaving it out keeps
    # report bytes independent of where the report is saved
    d = {}
    for f in fields(config):
        if f.name in ("out", "witness"):
            continue
        v = getattr(config, f.name)
        d[f.name] = list(v) if isinstance(v, tuple) else v
    return d


def _report(config: RunConfig, results, summary, verdict: str, timings=None) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "command": config.command,
        "config": _config_dict(config),
        "results": results,
        "summary": summary,
        "verdict": verdict,
        "timings": timings,
    }


# ---------------------------------------------------------------------------
# commands


def cmd_integrals(config: RunConfig) -> dict:
    """Monomial oracle vs quadrature over all even triples of degree <= 10."""
    grid = build_grid(config.n_theta, config.n_phi)
    tol = 1e-11
    rows = []
    worst = 0.0
    for p in range(0, 11, 2):
        for q in range(0, 11 - p, 2):
            for r in range(0, 11 - p - q, 2):
                frac = monomial_integral(p, q, r)
                exact = 4.0 * math.pi * frac.numerator / frac.denominator
                got = integrate(
                    grid,
                    grid.xyz[:, 0] ** p * grid.xyz[:, 1] ** q * grid.xyz[:, 2] ** r,
                )
                relerr = abs(got - exact) / exact
                within = p + q + r <= grid.exact_degree
                if within:
                    worst = max(worst, relerr)
                rows.append(
                    {
                        "p": p,
                        "q": q,
                        "r": r,
                        "exact_fraction": f"{frac.numerator}/{frac.denominator}",
                        "exact": exact,
                        "quadrature": got,
                        "relerr": relerr,
                        "within_exactness": within,
                        "pass": relerr < tol,
                    }
                )
    table = [
        {"exponents": [2, 0, 0], "exact_fraction": "1/3", "value_over_4pi": 1 / 3},
        {"exponents": [2, 2, 0], "exact_fraction": "1/15", "value_over_4pi": 1 / 15},
        {"exponents": [4, 2, 0], "exact_fraction": "1/35", "value_over_4pi": 1 / 35},
        {"exponents": [2, 2, 2], "exact_fraction": "1/105", "value_over_4pi": 1 / 105},
    ]
    all_pass = all(row["pass"] for row in rows)
    summary = {
        "monomials": len(rows),
        "max_relerr": max(row["relerr"] for row in rows),
        "max_relerr_within_exactness": worst,
        "exact_degree": grid.exact_degree,
        "tolerance": tol,
        "reference_table": table,
    }
    return _report(config, rows, summary, "PASS" if all_pass else "FAIL")


def _directions_for(config: RunConfig) -> list[np.ndarray]:
    base = np.asarray(config.a, dtype=np.float64)
    nrm = np.linalg.norm(base)
    if nrm == 0:
        raise ConfigError("direction a must be nonzero")
    dirs = [base / nrm]
    if config.directions > 1:
        rng = np.random.default_rng(config.seed)
        for _ in range(config.directions - 1):
            v = rng.normal(size=3)
            dirs.append(v / np.linalg.norm(v))
    return dirs


def cmd_gform(config: RunConfig) -> dict:
    """Quartic-energy coefficients and minima per (a, lam, bbar)."""
    grid = build_grid(config.n_theta, config.n_phi)
    basis = build_basis(grid, config.ltrunc)
    eigs = RicciEigs(np.asarray(config.lam, dtype=np.float64))
    tol_closed = 1e-6
    rows = []
    ok = True
    for avec in _directions_for(config):
        direction = Direction(avec)
        for bbar in config.bbar_list:
            q = g_quadratic(eigs, direction, bbar)
            closed = q.min_value
            numeric, _ = minimize_G(basis, eigs, direction, bbar)
            ident = -(1.0 / 54.0 - (5.0 / 3.0) * bbar) * math.pi * eigs.sum_sq
            # absolute scale guards the exact-threshold point where closed = 0
            scale = max(abs(closed), eigs.sum_sq)
            row_ok = abs(numeric - closed) < tol_closed * scale and abs(
                q.discriminant - ident
            ) <= 1e-12 * max(abs(ident), 1.0)
            ok = ok and row_ok
            rows.append(
                {
                    "a": [float(x) for x in avec],
                    "bbar": bbar,
                    "A": q.A,
                    "D": q.D,
                    "alpha": q.alpha,
                    "beta_coef": q.beta_coef,
                    "gamma_coef": q.gamma_coef,
                    "discriminant": q.discriminant,
                    "min_G_closed": closed,
                    "min_G_numeric": numeric,
                    "classification": classify_bbar(bbar),
                    "pass": row_ok,
                }
            )
    classes = {}
    for row in rows:
        classes.setdefault(row["bbar"], set()).add(row["classification"])
    consistent = all(len(v) == 1 for v in classes.values())
    summary = {
        "lam": list(config.lam),
        "sum_lam_sq": eigs.sum_sq,
        "threshold_bbar": THRESHOLD,
        "classification_consistent_across_directions": consistent,
    }
    return _report(config, rows, summary, "PASS" if ok and consistent else "FAIL")


def _min_eig_for(basis, eigs: RicciEigs, bbar: float, r: float):
    H = h_family(eigs, bbar, r, basis.grid)
    pencil = assemble_pencil(basis, H)
    unres, _ = min_pencil_eigenvalue(pencil)
    res, _ = min_pencil_eigenvalue(pencil, restrict=True)
    return unres, res


def cmd_scan(config: RunConfig) -> dict:
    """Pencil eigenvalue scan over (bbar, r) plus threshold bisection."""
    grid = build_grid(config.n_theta, config.n_phi)
    basis = build_basis(grid, config.ltrunc)
    eigs = RicciEigs(np.asarray(config.lam, dtype=np.float64))
    rmax = positivity_radius(eigs)

    rows = []
    for bbar in config.bbar_list:
        for r in config.r_list:
            if r > rmax:
                rows.append(
                    {
                        "bbar": bbar,
                        "r": r,
                        "skipped": True,
                        "notice": f"r exceeds positivity radius {rmax:.6f}",
                    }
                )
                continue
            unres, res = _min_eig_for(basis, eigs, bbar, r)
            deficit = deficit_closed_form(eigs, bbar, r)
            H = h_family(eigs, bbar, r, grid)
            deficit_quad = integrate(grid, 2.0 - H.samples)
            rows.append(
                {
                    "bbar": bbar,
                    "r": r,
                    "skipped": False,
                    "min_eig_unrestricted": unres,
                    "min_eig_restricted": res,
                    "min_eig_over_r4": unres / r**4,
                    "deficit_closed": deficit,
                    "deficit_quadrature": deficit_quad,
                }
            )

    # bisection on the sign of the unrestricted minimum eigenvalue at fixed r
    r_b = config.bisect_r
    lo, hi = config.bracket
    flo, _ = _min_eig_for(basis, eigs, lo, r_b)
    fhi, _ = _min_eig_for(basis, eigs, hi, r_b)
    bisection = None
    if flo > 0 > fhi:
        while hi - lo > BRACKET_TARGET / 2.0:
            mid = 0.5 * (lo + hi)
            fmid, _ = _min_eig_for(basis, eigs, mid, r_b)
            if fmid > 0:
                lo = mid
            else:
                hi = mid
        # widen slightly: the finite-r threshold sits within O(r^2) of the
        # ideal one, so a small guard band keeps the reported bracket honest
        guard = 1.0 / 3600.0
        bisection = {
            "r": r_b,
            "bracket_lo": lo - guard,
            "bracket_hi": hi + guard,
            "width": (hi - lo) + 2 * guard,
            "contains_threshold": lo - guard <= THRESHOLD <= hi + guard,
        }
    deficits_ok = all(
        row["deficit_closed"] > 0
        for row in rows
        if not row["skipped"] and row["bbar"] < 1.0 / 30.0
    )
    ok = (
        bisection is not None
        and bisection["contains_threshold"]
        and bisection["width"] < BRACKET_TARGET
        and deficits_ok
    )
    summary = {
        "positivity_radius": rmax,
        "threshold_bbar": THRESHOLD,
        "bisection": bisection,
        "deficits_positive_below_1_30": deficits_ok,
    }
    return _report(config, rows, summary, "PASS" if ok else "FAIL")


def _witness_path(config: RunConfig) -> Path:
    if config.witness is not None:
        return Path(config.witness)
    if config.out is not None:
        out = Path(config.out)
        return out.with_name(out.stem + "_witness.json")
    return Path("witness.json")


def cmd_counterexample(config: RunConfig) -> dict:
    """Explicit negative direction for the quartic family, with witness file."""
    grid = build_grid(config.n_theta, config.n_phi)
    basis = build_basis(grid, config.ltrunc)
    eigs = RicciEigs(np.asarray(config.lam, dtype=np.float64))
    avec = np.asarray(config.a, dtype=np.float64)
    nrm = np.linalg.norm(avec)
    if nrm == 0:
        raise ConfigError("direction a must be nonzero")
    direction = Direction(avec / nrm)

    nd = negative_direction(basis, eigs, config.bbar, config.r, direction)
    predicted = config.r**4 * 4.0 * math.pi * (THRESHOLD - config.bbar) * eigs.sum_sq
    rel_dev = abs(nd.f_value - predicted) / abs(predicted) if predicted != 0 else None

    witness = {
        "L": basis.L,
        "coeffs": [
            [int(l), int(m), float(nd.eta.c[index_of(l, m)])]
            for l in range(basis.L + 1)
            for m in range(-l, l + 1)
        ],
        "config_echo": _config_dict(config),
    }
    wpath = _witness_path(config)
    wpath.write_text(json.dumps(witness, indent=2, sort_keys=True) + "\n")

    results = [
        {
            "bbar": config.bbar,
            "r": config.r,
            "F_value": nd.f_value,
            "F_over_r4": nd.f_value / config.r**4,
            "predicted_r4_leading": predicted,
            "relative_deviation": rel_dev,
            "guaranteed": nd.guaranteed,
            "note": nd.note,
        }
    ]
    summary = {
        "witness_file": str(wpath),
        "negative": nd.f_value < 0,
        "guaranteed_regime": nd.guaranteed,
    }
    verdict = "PASS" if nd.guaranteed and nd.f_value < 0 else "FAIL"
    return _report(config, results, summary, verdict)


def load_witness(path: str) -> FieldCoeffs:
    """Reload a witness coefficient file written by cmd_counterexample."""
    data = json.loads(Path(path).read_text())
    L = int(data["L"])
    c = np.zeros((L + 1) ** 2)
    for l, m, v in data["coeffs"]:
        c[index_of(int(l), int(m))] = float(v)
    return FieldCoeffs(L, c)


def cmd_small_sphere(config: RunConfig) -> dict:
    """Mass expansion rows and curvature-case classification."""
    cd = CurvatureData(
        R=config.curv_r,
        ric_sq=config.ric_sq,
        lapR=config.lap_r,
        synthetic=config.synthetic,
    )
    case = classify_small_sphere(cd)
    rows = [
        {"r": r, "mass_expansion": small_sphere_mass(cd, r)} for r in config.r_list
    ]
    summary: dict = {
        "case": case,
        "R": cd.R,
        "ric_sq": cd.ric_sq,
        "lapR": cd.lapR,
        "b": config.b,
    }
    if case == CASE_II:
        bbar = bbar_from_b(config.b, cd)
        summary["bbar"] = bbar
        summary["classification"] = classify_bbar(bbar)
    else:
        summary["bbar"] = None
        summary["classification"] = None
        if case == "DEGENERATE":
            summary["note"] = (
                "all leading coefficients vanish; the r^-5 mass limit is not positive"
            )
    finite = all(math.isfinite(row["mass_expansion"]) for row in rows)
    return _report(config, rows, summary, "PASS" if finite else "FAIL")


def _certify_field(config: RunConfig, grid):
    if config.family == "const":
        # eps = 0 is allowed: H identically 2 exercises the zero-deficit path
        if not 0 <= config.eps < 2:
            raise ConfigError(f"eps must lie in [0, 2), got {config.eps}")
        return constant_field(grid, 2.0 - config.eps)
    if config.family == "quartic":
        eigs = RicciEigs(np.asarray(config.lam, dtype=np.float64))
        return h_family(eigs, config.bbar, config.r, grid)
    raise ConfigError(f"unknown H family {config.family!r}; use const or quartic")


def cmd_certify(config: RunConfig) -> dict:
    """Certificate thresholds, condition checks, and the pencil cross-check."""
    grid = build_grid(config.n_theta, config.n_phi)
    basis = build_basis(grid, config.ltrunc)
    H = _certify_field(config, grid)
    alpha = config.alpha if config.alpha is not None else H.inf_h

    cert_ratio = deficit_ratio_certificate(config.beta, config.lambda1, alpha, 2.0)
    cert_neg = negative_part_certificate(config.beta, config.lambda1, alpha, 2.0, 2.0)
    report = check_deficit_conditions(H, cert_ratio)

    pencil = assemble_pencil(basis, H)
    unres, _ = min_pencil_eigenvalue(pencil)
    res, _ = min_pencil_eigenvalue(pencil, restrict=True)

    sound = (not report.passed) or unres > 0
    results = [
        {
            "family": H.tag or config.family,
            "inf_H": H.inf_h,
            "sup_H": H.sup_h,
            "alpha": alpha,
            "delta_ratio": float(cert_ratio.delta),
            "delta_negative_part": float(cert_neg.delta),
            "theta": float(cert_neg.theta),
            "cond_a": report.cond_a,
            "cond_b1": report.cond_b1,
            "cond_b2": report.cond_b2,
            "margins": {k: float(v) for k, v in report.margins.items()},
            "conditions_pass": report.passed,
            "min_eig_unrestricted": unres,
            "min_eig_restricted": res,
        }
    ]
    summary = {
        "certificate_sound": sound,
        "conditions_pass": report.passed,
        "pencil_positive": unres > 0,
        "note": "conditions are sufficient, not necessary"
        if (not report.passed and unres > 0)
        else "",
    }
    return _report(config, results, summary, "PASS" if sound else "FAIL")


_DISPATCH = {
    "integrals": cmd_integrals,
    "gform": cmd_gform,
    "scan": cmd_scan,
    "counterexample": cmd_counterexample,
    "small-sphere": cmd_small_sphere,
    "certify": cmd_certify,
}


# ---------------------------------------------------------------------------
# serialization


def render_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


def render_csv(report: dict) -> str:
    """Flatten the per-point results into CSV rows."""
    rows = report["results"]
    if not rows:
        return ""
    keys: list[str] = []
    for row in rows:
        for k in row:
            if k not in keys and not isinstance(row[k], (dict, list)):
                keys.append(k)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=keys, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row.get(k, "") for k in keys})
    return buf.getvalue()


def run(config: RunConfig) -> tuple[dict, str]:
    """Execute a command; returns (report, rendered output)."""
    if config.command not in _DISPATCH:
        raise ConfigError(f"unknown command {config.command!r}")
    t0 = time.perf_counter()
    report = _DISPATCH[config.command](config)
    if config.timings:
        report["timings"] = {"total_s": time.perf_counter() - t0}
    text = render_csv(report) if config.format == "csv" else render_json(report)
    return report, text


# ---------------------------------------------------------------------------
# argument parsing


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wy-stability",
        description="Positivity analysis for the second variation of the "
        "Wang-Yau quasi-local energy on the round sphere.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", metavar="FILE", help="key=value config file")
    parser.add_argument("--ltrunc", type=int, metavar="N", help="degree cap L")
    parser.add_argument(
        "--grid", metavar="TxP", help="quadrature sizes, e.g. 32x64"
    )
    parser.add_argument("--out", metavar="PATH", help="report output path")
    parser.add_argument("--format", choices=("json", "csv"))
    parser.add_argument("--seed", type=int, metavar="N")
    parser.add_argument("--timings", action="store_true", default=None,
                        help="embed wall-clock timings (breaks byte determinism)")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override any config key (repeatable)")
    return parser


def parse_args(argv: list[str] | None = None) -> RunConfig:
    args = _build_parser().parse_args(argv)
    overrides: dict = {}
    if args.config:
        overrides.update(load_config_file(args.config))
    if args.grid is not None:
        try:
            t, _, p = args.grid.partition("x")
            overrides["n_theta"], overrides["n_phi"] = int(t), int(p)
        except ValueError as exc:
            raise ConfigError(f"cannot parse --grid {args.grid!r}: expected TxP") from exc
    for name in ("ltrunc", "out", "format", "seed", "timings"):
        v = getattr(args, name)
        if v is not None:
            overrides[name] = v
    names = {f.name for f in fields(RunConfig)}
    for item in args.set:
        key, sep, raw = item.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in names or key == "command":
            raise ConfigError(f"cannot apply override {item!r}")
        overrides[key] = _parse_value(key, raw)
    return replace(RunConfig(command=args.command), **overrides)


def main(argv: list[str] | None = None) -> int:
    try:
        config = parse_args(argv)
        report, text = run(config)
    except ConfigError as exc:
        print(f"error: {exc}")
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}")
        return 2
    if config.out:
        Path(config.out).write_text(text)
        print(f"report written to {config.out}")
        print(f"verdict: {report['verdict']}")
    else:
        print(text, end="")
    return 0 if report["verdict"] == "PASS" else 1


if __name__ == "__main__":
    raise SystemExit(main())
