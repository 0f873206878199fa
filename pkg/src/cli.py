"""Command-line front end for the tail-risk engine."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Callable, Sequence, TextIO

import numpy as np
import pandas as pd
from pydantic import ValidationError

from archimedean import (
    ArchimedeanGenerator,
    GeneratorFamily,
    HacLeaf,
    bivariate_grid,
    empirical_kendall_matrix,
    model_to_payload,
)
from archimedean.hac import HacNode
from config import RunConfig, load_run_config
from errors import DataError, RiskEngineError
from prices import describe, format_stats_table, load_returns
from risk import (
    RiskModel,
    compare_copulas,
    fit_summary_payload,
    pipeline_forecast,
    risk_model_from_payload,
    risk_model_to_payload,
    rolling_backtest,
    simulate_scenarios,
)
from risk.pipeline import estimate_copula, fit_assets
from schemas import (
    PUBLISHED_SCHEMAS,
    ComparisonPayload,
    FitReportPayload,
    FitSummaryPayload,
    RiskModelPayload,
    StructureReportPayload,
)
from volatility import FitOptions, fit_many, select_spec

logger = logging.getLogger(__name__)

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]


def _emit(text: str, output: Path | None, stream: TextIO | None = None) -> None:
    if output is not None:
        output.parent.mkdir(parents=True, exist_ok=True)
        output.write_text(text + "\n", encoding="utf-8")
        logger.info("wrote %s", output)
    if stream is not None:
        stream.write(text + "\n")


def _config(args: argparse.Namespace) -> RunConfig:
    overrides = {name: getattr(args, name) for name in RunConfig.model_fields if hasattr(args, name)}
    return load_run_config(**overrides)


def _matrix_table(labels: Sequence[str], matrix: np.ndarray, digits: int = 4) -> str:
    width = max(10, *(len(label) + 2 for label in labels))
    lines = [" " * width + "".join(f"{label:>{width}}" for label in labels)]
    for label, row in zip(labels, matrix):
        lines.append(f"{label:<{width}}" + "".join(f"{value:>{width}.{digits}f}" for value in row))
    return "\n".join(lines)


def format_fit_table(fits: Sequence[FitSummaryPayload]) -> str:
    names: list[str] = []
    for item in fits:
        names.extend(name for name in item.params if name not in names)
    width = max(12, *(len(item.ticker) + 2 for item in fits))
    lines = [f"{'':<10}" + "".join(f"{item.ticker:>{width}}" for item in fits)]
    for name in names:
        cells = []
        for item in fits:
            value = item.params.get(name)
            cells.append(f"{value:>{width}.4f}" if value is not None else f"{'-':>{width}}")
        lines.append(f"{name:<10}" + "".join(cells))
    lines.append(f"{'AIC':<10}" + "".join(f"{item.aic_per_obs:>{width}.4f}" for item in fits))
    lines.append(f"{'converged':<10}" + "".join(f"{str(item.converged):>{width}}" for item in fits))
    return "\n".join(lines)


def named_structure(node: HacNode, tickers: Sequence[str]) -> str:
    if isinstance(node, HacLeaf):
        return tickers[node.asset_index]
    return "(" + " ".join(named_structure(child, tickers) for child in node.children) + ")"


def _cmd_stats(args: argparse.Namespace) -> int:
    prices, returns = load_returns(args.prices)
    payload = describe(returns, dropped_rows=prices.dropped_rows)
    print(format_stats_table(payload))
    if args.output is not None:
        _emit(payload.model_dump_json(indent=2), args.output)
    return 0


def _cmd_fit(args: argparse.Namespace) -> int:
    config = _config(args)
    _, returns = load_returns(args.prices)
    options = FitOptions(n_starts=config.n_starts, seed=config.seed)
    if args.select:
        fits = [select_spec(returns.returns[:, j], options=options) for j in range(returns.dimension)]
    else:
        fits = fit_many(config.aparch_spec, returns.returns, options, max_workers=config.max_workers)
    payload = FitReportPayload(fits=[fit_summary_payload(t, f) for t, f in zip(returns.tickers, fits)])
    print(format_fit_table(payload.fits))
    if args.output is not None:
        _emit(payload.model_dump_json(indent=2), args.output)
    return 0


def _cmd_structure(args: argparse.Namespace) -> int:
    config = _config(args)
    _, returns = load_returns(args.prices)
    if returns.dimension < 2:
        raise DataError("copula structure needs at least two assets")
    assets, uniforms = fit_assets(returns, config)
    copula = estimate_copula(uniforms, config.family, config.copula_mode)
    assert copula is not None
    tau = empirical_kendall_matrix(uniforms)
    tickers = list(returns.tickers)

    print("Kendall's tau")
    print(_matrix_table(tickers, tau))
    print(f"tree: {named_structure(copula.root, tickers)}")
    print(f"structure: {copula.structure_string}")
    print("node taus: " + " ".join(f"{t:.6g}" if t is not None else "-" for t in copula.tau_vector))
    print("theta: " + " ".join(f"{theta:.6g}" for theta in copula.theta_vector))

    if args.output is not None:
        report = StructureReportPayload(
            tickers=tickers,
            kendall_matrix=tau.tolist(),
            model=model_to_payload(copula),
            theta_vector=list(copula.theta_vector),
            tau_vector=list(copula.tau_vector),
        )
        _emit(report.model_dump_json(indent=2), args.output)
    if args.model_out is not None:
        bundle = RiskModel(config.generator_family, config.copula_mode, tuple(assets), copula)
        _emit(risk_model_to_payload(bundle).model_dump_json(indent=2), args.model_out)
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = _config(args)
    try:
        payload = RiskModelPayload.model_validate_json(args.model.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise DataError(f"model bundle not found: {args.model}") from exc
    except ValidationError as exc:
        raise DataError(f"invalid model bundle {args.model}: {exc}") from exc
    model = risk_model_from_payload(payload)
    scenarios = simulate_scenarios(model, config.n_scenarios, config.seed, max_workers=config.max_workers)
    frame = pd.DataFrame(scenarios.returns, columns=list(scenarios.tickers))
    text = frame.to_csv(index=False, float_format="%.10g").rstrip("\n")
    _emit(text, args.output, None if args.output is not None else sys.stdout)
    return 0


def _cmd_forecast(args: argparse.Namespace) -> int:
    config = _config(args)
    _, returns = load_returns(args.prices)
    report = pipeline_forecast(returns, config)
    _emit(report.to_payload().model_dump_json(indent=2), args.output, sys.stdout)
    return 0


def _cmd_backtest(args: argparse.Namespace) -> int:
    config = _config(args)
    _, returns = load_returns(args.prices)
    result = rolling_backtest(returns, config)
    payload = result.to_payload()
    text = payload.model_dump_json(indent=2)
    print(text)
    if config.output_dir is not None:
        out = config.output_dir
        _emit(text, out / "backtest.json")
        hits = pd.DataFrame(
            [day.model_dump() for day in payload.days],
            columns=["date", "forecast_var", "realized_return", "hit"],
        )
        hits["hit"] = hits["hit"].astype("Int64")
        _emit(hits.to_csv(index=False).rstrip("\n"), out / "hits.csv")
        plot = ["# date var realized"]
        for day in payload.days:
            if day.forecast_var is not None:
                plot.append(f"{day.date} {day.forecast_var:.8g} {day.realized_return:.8g}")
        _emit("\n".join(plot), out / "var_plot.dat")
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    config = _config(args)
    _, returns = load_returns(args.prices)
    rows = compare_copulas(returns, config)
    print(f"{'family':<10}{'mode':<6}{'VaR':>10}{'CVaR':>10}{'seconds':>10}")
    for row in rows:
        print(f"{row.family:<10}{row.mode:<6}{row.var:>10.4f}{row.cvar:>10.4f}{row.seconds:>10.2f}")
    if args.output is not None:
        payload = ComparisonPayload(alpha=config.alpha, seed=config.seed, rows=[row.to_payload() for row in rows])
        _emit(payload.model_dump_json(indent=2), args.output)
    return 0


def _cmd_surface(args: argparse.Namespace) -> int:
    gen = ArchimedeanGenerator(GeneratorFamily.parse(args.family), args.theta)
    u, v, cdf, density = bivariate_grid(gen, args.points)
    lines = [f"# {gen} u v cdf density"]
    for i in range(u.size):
        if i > 0 and i % args.points == 0:
            lines.append("")
        lines.append(f"{u[i]:.6f} {v[i]:.6f} {cdf[i]:.10g} {density[i]:.10g}")
    _emit("\n".join(lines), args.output, None if args.output is not None else sys.stdout)
    return 0


def _cmd_schema(args: argparse.Namespace) -> int:
    out = Path(args.output_dir)
    for name, model in PUBLISHED_SCHEMAS.items():
        _emit(json.dumps(model.model_json_schema(), indent=2), out / f"{name}.schema.json")
    return 0


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _add_model_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--family", choices=["gumbel", "clayton", "frank", "joe"])
    parser.add_argument("--mode", dest="copula_mode", choices=["hac", "ac"])
    parser.add_argument("--spec", help="ARMA-APARCH orders p,q,m,n (default 1,2,1,1)")
    parser.add_argument("--tail-fraction", type=float)
    parser.add_argument("--n-starts", type=_positive_int)
    parser.add_argument("--max-workers", type=_positive_int)


def _add_risk_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("-n", "--n-scenarios", type=_positive_int)
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--max-weight", type=float)
    parser.add_argument("--target-return", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="run_risk_engine.py",
        description="ARMA-APARCH-EVT-HAC portfolio tail-risk engine",
    )
    parser.add_argument("--log-level", default="WARNING", choices=LOG_LEVELS)
    parser.add_argument("--seed", type=int, help="random seed (default 0)")
    sub = parser.add_subparsers(dest="command", required=True)

    stats_p = sub.add_parser("stats", help="descriptive statistics of returns")
    stats_p.add_argument("prices", type=Path)
    stats_p.add_argument("--output", type=Path)
    stats_p.set_defaults(handler=_cmd_stats)

    fit_p = sub.add_parser("fit", help="fit ARMA-APARCH models per asset")
    fit_p.add_argument("prices", type=Path)
    fit_p.add_argument("--select", action="store_true", help="choose ARMA orders by AIC")
    _add_model_flags(fit_p)
    fit_p.add_argument("--output", type=Path)
    fit_p.set_defaults(handler=_cmd_fit)

    structure_p = sub.add_parser("structure", help="estimate the copula structure")
    structure_p.add_argument("prices", type=Path)
    _add_model_flags(structure_p)
    structure_p.add_argument("--output", type=Path)
    structure_p.add_argument("--model-out", type=Path, help="write the fitted model bundle")
    structure_p.set_defaults(handler=_cmd_structure)

    simulate_p = sub.add_parser("simulate", help="one-step scenarios from a model bundle")
    simulate_p.add_argument("--model", type=Path, required=True)
    simulate_p.add_argument("-n", "--n-scenarios", type=_positive_int)
    simulate_p.add_argument("--max-workers", type=_positive_int)
    simulate_p.add_argument("--output", type=Path)
    simulate_p.set_defaults(handler=_cmd_simulate)

    forecast_p = sub.add_parser("forecast", help="one-step portfolio VaR and CVaR")
    forecast_p.add_argument("prices", type=Path)
    _add_model_flags(forecast_p)
    _add_risk_flags(forecast_p)
    forecast_p.add_argument("--output", type=Path)
    forecast_p.set_defaults(handler=_cmd_forecast)

    backtest_p = sub.add_parser("backtest", help="rolling VaR back-test")
    backtest_p.add_argument("prices", type=Path)
    backtest_p.add_argument("--window", type=_positive_int)
    backtest_p.add_argument("--cadence", dest="refit_cadence", type=_positive_int)
    backtest_p.add_argument("--days", dest="backtest_days", type=_positive_int)
    _add_model_flags(backtest_p)
    _add_risk_flags(backtest_p)
    backtest_p.add_argument("--output-dir", type=Path)
    backtest_p.set_defaults(handler=_cmd_backtest)

    compare_p = sub.add_parser("compare", help="VaR and CVaR for every family and copula mode")
    compare_p.add_argument("prices", type=Path)
    _add_model_flags(compare_p)
    _add_risk_flags(compare_p)
    compare_p.add_argument("--output", type=Path)
    compare_p.set_defaults(handler=_cmd_compare)

    surface_p = sub.add_parser("surface", help="bivariate copula CDF and density grid")
    surface_p.add_argument("--family", required=True, choices=["gumbel", "clayton", "frank", "joe"])
    surface_p.add_argument("--theta", type=float, required=True)
    surface_p.add_argument("--points", type=_positive_int, default=50)
    surface_p.add_argument("--output", type=Path)
    surface_p.set_defaults(handler=_cmd_surface)

    schema_p = sub.add_parser("schema", help="write the JSON schemas of every report")
    schema_p.add_argument("--output-dir", type=Path, required=True)
    schema_p.set_defaults(handler=_cmd_schema)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(message)s",
        stream=sys.stderr,
    )
    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        return handler(args)
    except RiskEngineError as exc:
        logger.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
