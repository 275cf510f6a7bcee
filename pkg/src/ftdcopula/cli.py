"""
Command-line front end.

    ftdcopula --config paper_scenario --estimator both --output report.json

Scenario files are TOML (see ``scenarios/paper_scenario.toml``). A JSON
report written by ``--output`` is also accepted as ``--config``: its echoed
scenario is re-run, which reproduces the reported spreads exactly.

Exit codes: 0 success, 1 validation error, 2 runtime error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .engine import SimulationConfig, convergence_report, run_simulation
from .numerics import CorrelationMatrix, NotPSDError, cholesky
from .pricing import (
    BasketSpec,
    DiscountCurve,
    PricingReport,
    compare_to_reference,
    default_schedule,
)
from .survival import CreditName

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

ESTIMATORS = ("paper", "standard", "both")


class ScenarioError(ValueError):
    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


@dataclass
class Scenario:
    basket: BasketSpec
    sigma: CorrelationMatrix
    curve: DiscountCurve
    config: SimulationConfig
    estimator: str
    reference: dict | None
    source: dict


def _number(data, key, prefix="", *, integer=False, required=True, default=None):
    field = f"{prefix}{key}"
    if key not in data:
        if required:
            raise ScenarioError(field, "missing required field")
        return default
    v = data[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError(field, f"expected a number, got {v!r}")
    if integer:
        if isinstance(v, float) and not v.is_integer():
            raise ScenarioError(field, f"expected an integer, got {v!r}")
        return int(v)
    if not math.isfinite(v):
        raise ScenarioError(field, "must be finite")
    return float(v)


def _parse_names(raw):
    if not isinstance(raw, list):
        raise ScenarioError("names", "expected a list of {id, hazard_rate, recovery} tables")
    if not raw:
        raise ScenarioError("names", "basket must contain at least one name")
    names = []
    for i, entry in enumerate(raw):
        prefix = f"names[{i}]."
        if not isinstance(entry, dict):
            raise ScenarioError(f"names[{i}]", "expected a table")
        name_id = str(entry.get("id", f"name{i + 1}"))
        h = _number(entry, "hazard_rate", prefix)
        r = _number(entry, "recovery", prefix)
        if not h > 0.0:
            raise ScenarioError(prefix + "hazard_rate", f"must be > 0, got {h}")
        if not 0.0 <= r < 1.0:
            raise ScenarioError(prefix + "recovery", f"must lie in [0, 1), got {r}")
        names.append(CreditName(name_id, h, r))
    return names


def _parse_correlation(raw, n):
    if isinstance(raw, dict) and "uniform" in raw:
        rho = _number(raw, "uniform", "correlation.")
        if not -1.0 <= rho <= 1.0:
            raise ScenarioError("correlation.uniform", f"must lie in [-1, 1], got {rho}")
        matrix = np.full((n, n), rho)
        np.fill_diagonal(matrix, 1.0)
        field = "correlation.uniform"
    else:
        field = "correlation.matrix" if isinstance(raw, dict) else "correlation"
        rows = raw.get("matrix") if isinstance(raw, dict) else raw
        if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
            raise ScenarioError("correlation", "expected {uniform = rho} or an n x n matrix")
        try:
            matrix = np.array(rows, dtype=float)
        except (TypeError, ValueError):
            raise ScenarioError(field, "matrix entries must be numbers") from None
        if matrix.shape != (n, n):
            raise ScenarioError(field, f"expected a {n}x{n} matrix for {n} names, got shape {matrix.shape}")
    try:
        sigma = CorrelationMatrix(matrix)
        cholesky(sigma)
    except NotPSDError as e:
        raise ScenarioError(field, f"not positive semi-definite (pivot {e.pivot})") from None
    except ValueError as e:
        raise ScenarioError(field, str(e)) from None
    return sigma


def scenario_from_mapping(data: dict, overrides: dict | None = None) -> Scenario:
    """Validate a scenario mapping (parsed TOML or a report's echo) and build its domain objects."""
    if not isinstance(data, dict):
        raise ScenarioError("<root>", "scenario must be a table")
    data = {**data, **{k: v for k, v in (overrides or {}).items() if v is not None}}

    if "names" not in data:
        raise ScenarioError("names", "missing required field")
    names = _parse_names(data["names"])
    if "correlation" not in data:
        raise ScenarioError("correlation", "missing required field")
    sigma = _parse_correlation(data["correlation"], len(names))

    rate = _number(data, "rate")
    maturity = _number(data, "maturity")
    step = _number(data, "payment_step", required=False, default=0.5)
    if not maturity > 0.0:
        raise ScenarioError("maturity", f"must be > 0, got {maturity}")
    if not step > 0.0:
        raise ScenarioError("payment_step", f"must be > 0, got {step}")
    try:
        schedule = default_schedule(maturity, step)
    except ValueError as e:
        raise ScenarioError("payment_step", str(e)) from None

    paths = _number(data, "paths", integer=True)
    seed = _number(data, "seed", integer=True, required=False, default=1200)
    workers = _number(data, "workers", integer=True, required=False, default=1)
    batch_count = _number(data, "batch_count", integer=True, required=False, default=100)
    if paths < 1:
        raise ScenarioError("paths", f"must be >= 1, got {paths}")
    if not 0 <= seed < 1 << 64:
        raise ScenarioError("seed", "must be an unsigned 64-bit integer")
    if workers < 1:
        raise ScenarioError("workers", f"must be >= 1, got {workers}")
    if batch_count < 2:
        raise ScenarioError("batch_count", f"must be >= 2, got {batch_count}")

    estimator = data.get("estimator", "both")
    if estimator not in ESTIMATORS:
        raise ScenarioError("estimator", f"must be one of {', '.join(ESTIMATORS)}, got {estimator!r}")

    reference = data.get("reference")
    if reference is not None:
        if not isinstance(reference, dict):
            raise ScenarioError("reference", "expected {spread, paths}")
        reference = {
            "spread": _number(reference, "spread", "reference."),
            "paths": _number(reference, "paths", "reference.", integer=True),
        }

    source = {
        "names": [{"id": nm.id, "hazard_rate": nm.hazard_rate, "recovery": nm.recovery} for nm in names],
        "correlation": data["correlation"],
        "rate": rate,
        "maturity": maturity,
        "payment_step": step,
        "paths": paths,
        "seed": seed,
        "workers": workers,
        "batch_count": batch_count,
        "estimator": estimator,
    }
    if reference is not None:
        source["reference"] = reference

    return Scenario(
        basket=BasketSpec(tuple(names), maturity, schedule),
        sigma=sigma,
        curve=DiscountCurve(rate),
        config=SimulationConfig(paths, seed, workers, batch_count),
        estimator=estimator,
        reference=reference,
        source=source,
    )


def parse_scenario(text: str, overrides: dict | None = None) -> Scenario:
    """Parse TOML scenario text. Syntax errors carry the line and column."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ScenarioError("<syntax>", str(e)) from None
    return scenario_from_mapping(data, overrides)


def _resolve_config(path: str) -> Path | None:
    p = Path(path)
    if p.is_file():
        return p
    bundled = resources.files("ftdcopula") / "scenarios" / (p.name if p.suffix else p.name + ".toml")
    if p.parent == Path(".") and bundled.is_file():
        return Path(str(bundled))
    return None


def load_scenario(path: str, overrides: dict | None = None) -> Scenario:
    """Load a TOML scenario, a bundled scenario by name, or the echo inside a JSON report."""
    resolved = _resolve_config(path)
    if resolved is None:
        raise ScenarioError("--config", f"no such scenario file: {path}")
    text = resolved.read_text()
    if resolved.suffix == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ScenarioError("<syntax>", f"{e.msg} (line {e.lineno}, column {e.colno})") from None
        if isinstance(data, dict) and "scenario" in data:
            data = data["scenario"]
        return scenario_from_mapping(data, overrides)
    return parse_scenario(text, overrides)


def _clean(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def report_document(scenario: Scenario, result, rows, comparison) -> dict:
    return _clean(
        {
            "report": result.report.to_dict(),
            "estimator": scenario.estimator,
            "run": {
                "wall_time": result.wall_time,
                "paths_per_second": result.paths_per_second,
                "workers": scenario.config.workers,
            },
            "convergence": [asdict(r) for r in rows],
            "reference_comparison": comparison,
            "scenario": scenario.source,
        }
    )


def write_paths_dump(path: str, table) -> None:
    """Per-path CSV; floats are written with 17 significant digits so they round-trip."""
    n = table.times.shape[1]
    header = ",".join(["path"] + [f"T_{j + 1}" for j in range(n)] + ["first_time", "first_index", "premium_pv", "protection_pv"])
    m = len(table)
    cols = np.column_stack(
        [np.arange(m), table.times, table.first_time, table.first_index, table.premium_pv, table.protection_pv]
    )
    fmt = ["%d"] + ["%.17g"] * n + ["%.17g", "%d", "%.17g", "%.17g"]
    np.savetxt(path, cols, fmt=fmt, delimiter=",", header=header, comments="")


def _fmt_se(x):
    return "n/a" if not math.isfinite(x) else f"{x:.6f}"


def format_summary(scenario: Scenario, rep: PricingReport, wall: float, pps: float, rows, comparison) -> str:
    b = scenario.basket
    lines = [
        f"first-to-default basket: {b.n} names, maturity {b.maturity:g}y, "
        f"{len(b.schedule)} premium dates, rate {scenario.curve.rate:g}",
        f"paths {rep.n_paths}  seed {rep.seed}  backend {rep.metadata.get('backend')}  workers {scenario.config.workers}",
    ]
    if scenario.estimator in ("paper", "both"):
        lines.append(f"  spread_paper    (mean of path ratios)  {rep.spread_paper:.6f}  SE {_fmt_se(rep.se_paper)}")
    if scenario.estimator in ("standard", "both"):
        lines.append(f"  spread_standard (ratio of mean legs)   {rep.spread_standard:.6f}  SE {_fmt_se(rep.se_standard)}")
    if scenario.estimator == "both":
        lines.append(f"  estimator gap (standard - paper)       {rep.estimator_gap:.6f}")
    lines += [
        f"  mean premium PV per unit spread  {rep.mean_premium_pv:.6f}",
        f"  mean protection PV               {rep.mean_protection_pv:.6f}",
        f"  paths defaulting before first premium date  {100 * rep.zero_premium_fraction:.2f}%",
    ]
    if comparison:
        lines.append(
            f"  reference {comparison['reference_spread']:g}: deviation {comparison['deviation']:+.6f}; "
            + comparison["explanation"]
        )
    if rows:
        lines.append("  convergence:  paths  spread_paper  se_paper  spread_standard  se_standard")
        for r in rows:
            lines.append(
                f"  {r.n_paths:>12d}  {r.spread_paper:.6f}  {_fmt_se(r.se_paper)}  "
                f"{r.spread_standard:.6f}  {_fmt_se(r.se_standard)}"
            )
    lines.append(f"runtime {wall:.3f}s ({pps:,.0f} paths/s)")
    return "\n".join(lines)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ScenarioError("<arguments>", message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ftdcopula", description="Monte-Carlo first-to-default basket swap pricer.")
    p.add_argument("--config", required=True, help="scenario TOML, bundled scenario name, or a JSON report")
    p.add_argument("--paths", type=int, help="override the number of paths")
    p.add_argument("--seed", type=int, help="override the master seed")
    p.add_argument("--estimator", choices=ESTIMATORS, help="which spread estimate(s) to print")
    p.add_argument("--workers", type=int, help="worker threads (results do not depend on this)")
    p.add_argument("--output", help="write a JSON report here")
    p.add_argument("--paths-dump", help="write the per-path table as CSV here")
    p.add_argument("--checkpoints", help="comma-separated path counts for convergence rows, e.g. 100,1000,10000")
    return p


def _parse_checkpoints(text, n_paths):
    if not text:
        return []
    try:
        cps = [int(c) for c in text.split(",") if c.strip()]
    except ValueError:
        raise ScenarioError("--checkpoints", f"expected comma-separated integers, got {text!r}") from None
    if cps != sorted(cps) or (cps and (cps[0] < 1 or cps[-1] > n_paths)):
        raise ScenarioError("--checkpoints", f"must be ascending and within [1, {n_paths}]")
    return cps


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        overrides = {"paths": args.paths, "seed": args.seed, "estimator": args.estimator, "workers": args.workers}
        scenario = load_scenario(args.config, overrides)
        checkpoints = _parse_checkpoints(args.checkpoints, scenario.config.n_paths)
    except ScenarioError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    try:
        config = scenario.config
        if args.paths_dump:
            config = SimulationConfig(config.n_paths, config.master_seed, config.workers, config.batch_count, keep_times=True)
        result = run_simulation(scenario.basket, scenario.sigma, scenario.curve, config)
        rows = convergence_report(result.paths, checkpoints, seed=config.master_seed, batch_count=config.batch_count)
        comparison = None
        if scenario.reference:
            comparison = compare_to_reference(result.report, scenario.reference["spread"], scenario.reference["paths"])
        print(format_summary(scenario, result.report, result.wall_time, result.paths_per_second, rows, comparison))
        if args.output:
            doc = report_document(scenario, result, rows, comparison)
            Path(args.output).write_text(json.dumps(doc, indent=2, allow_nan=False) + "\n")
        if args.paths_dump:
            write_paths_dump(args.paths_dump, result.paths)
    except Exception as e:  # noqa: BLE001 - any failure past validation is a runtime error
        print(f"runtime error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
