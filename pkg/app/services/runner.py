"""
MeanLab Experiment Runner Service
Executes one declarative experiment and writes its CSV table and JSON summary
"""
import csv
import json
import logging
import os
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel

from app.config import settings
from app.exceptions import ConfigError
from app.schemas import (
    CommandEnum,
    EvaluationResult,
    ExperimentConfig,
    LimitOptions,
    OutputFormatEnum,
    SweepOptions,
)
from app.services.asymptotics import appendix_checks, r_sweep, s_sweep
from app.services.constants import get_constants
from app.services.fields import field_corpus, validate_derivatives
from app.services.registry import RunContext, operator_registry

logger = logging.getLogger(__name__)

DEFAULT_S_GRID = (0.9, 0.99, 0.999)
CORPUS_SAMPLES = 100


class RunResult:
    """Exit status, the rows of the CSV table and the JSON summary of one run"""
    def __init__(
        self,
        exit_code: int,
        header: List[str],
        rows: List[List[Any]],
        summary: Dict[str, Any],
        report: Optional[BaseModel] = None,
    ):
        self.exit_code = exit_code
        self.header = header
        self.rows = rows
        self.summary = summary
        self.report = report
        self.artifacts: List[str] = []


def format_cell(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return format(float(value), f".{settings.CSV_DIGITS}g")
    if value is None:
        return ""
    return str(value)


def write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])


def _build_field(config: ExperimentConfig):
    return field_corpus.build(config.field.kind, config.n, config.s, config.field.params)


def _artifact_stem(config: ExperimentConfig) -> str:
    name = config.operator or "run"
    safe = name.replace("+", "plus").replace("-", "minus") if name[-1:] in "+-" else name
    return f"{config.command.value}_{safe}"


# ============ Commands ============

def _resolve(config: ExperimentConfig):
    if not config.operator:
        raise ConfigError(f"The {config.command.value} command needs an operator", field="operator")
    entry, variant = operator_registry.resolve(config.operator)
    ctx = RunContext.from_config(config, variant)
    return entry, ctx


def _run_eval(config: ExperimentConfig) -> RunResult:
    entry, ctx = _resolve(config)
    entry.validate(ctx)
    u = _build_field(config)
    x = config.point()
    value = float(entry.evaluate(u, u.check_point(x), ctx))
    result = EvaluationResult(
        operator=config.operator,
        value=value,
        params={"n": ctx.n, "s": ctx.s, "p": ctx.p, "r": ctx.r, "x": x, "variant": ctx.variant.value},
    )
    header = ["operator", "n", "s", "p", "r", "variant", "value"]
    rows = [[config.operator, ctx.n, ctx.s, ctx.p, ctx.r, ctx.variant.value, value]]
    return RunResult(0, header, rows, json.loads(result.model_dump_json()), result)


def _run_verify(config: ExperimentConfig) -> RunResult:
    entry, ctx = _resolve(config)
    if entry.expansion is None:
        raise ConfigError(f"No expansion residual is registered for {config.operator}", field="operator")
    entry.validate(ctx, need_r=False)
    u = _build_field(config)
    expansion = entry.expansion
    opts = SweepOptions(
        label=config.operator,
        expected_slope=expansion.expected(ctx),
        tolerance=expansion.tolerance,
        two_sided=expansion.two_sided,
        quadrature=ctx.spec.model_dump(),
    )
    report = r_sweep(expansion.residual(ctx), u, config.point(), opts, config.r_grid)
    header = ["r", "residual", "abs_residual", "in_window"]
    lo, hi = report.window
    rows = [[r, v, abs(v), lo <= i < hi] for i, (r, v) in enumerate(zip(report.abscissae, report.residuals))]
    return RunResult(0 if report.passed else 1, header, rows, json.loads(report.model_dump_json()), report)


def _run_limit(config: ExperimentConfig) -> RunResult:
    entry, ctx = _resolve(config)
    if entry.limit is None:
        raise ConfigError(f"No s-limit target is registered for {config.operator}", field="operator")
    s_grid = list(config.s_grid or DEFAULT_S_GRID)
    for s in s_grid:
        entry.validate(RunContext(ctx.n, s, ctx.p, ctx.r, ctx.variant, ctx.spec))
    u = _build_field(config)
    limit = entry.limit
    opts = LimitOptions(
        label=config.operator,
        target_name=limit.target_name,
        scaled=limit.scaled,
        tolerance=limit.tolerance,
        quadrature=ctx.spec.model_dump(),
    )
    diagnostics = limit.diagnostics(ctx) if limit.diagnostics else None
    report = s_sweep(limit.operator(ctx), limit.target(ctx), u, config.point(), s_grid, opts, diagnostics)
    header = ["s", "value", "target", "relative_error"] + list(report.diagnostics)
    rows = [
        [s, v, report.target, e] + [report.diagnostics[k][i] for k in report.diagnostics]
        for i, (s, v, e) in enumerate(zip(report.abscissae, report.values, report.relative_errors))
    ]
    return RunResult(0 if report.passed else 1, header, rows, json.loads(report.model_dump_json()), report)


def _run_appendix(config: ExperimentConfig) -> RunResult:
    report = appendix_checks(config.s, config.r_grid)
    header = ["r", "eun", "eun_closed_form", "trois", "trois_over_r2"]
    rows = [list(row) for row in zip(report.r_grid, report.eun, report.eun_closed_form,
                                      report.trois, report.trois_over_r2)]
    return RunResult(0 if report.passed else 1, header, rows, json.loads(report.model_dump_json()), report)


def _run_constants(config: ExperimentConfig) -> RunResult:
    constants = get_constants(config.n, config.s, config.p)
    values = constants.model_dump()
    values["C_sp"] = constants.C_sp
    rows = [[name, value] for name, value in values.items()]
    return RunResult(0, ["name", "value"], rows, values, constants)


def _run_corpus(config: ExperimentConfig) -> RunResult:
    rng = np.random.default_rng(0)
    rows, reports = [], []
    for field in field_corpus.default_members(config.n, config.s):
        scale = field.length_scale
        points = rng.uniform(-scale, scale, size=(CORPUS_SAMPLES, config.n))
        report = validate_derivatives(field, points)
        bounded = bool(np.all(np.abs(field.value(points)) <= field.sup_norm * (1.0 + 1e-12)))
        reports.append({**report.to_dict(), "bounded": bounded})
        rows.append([report.field, report.gradient_error, report.hessian_error, report.passed and bounded])
    passed = all(row[-1] for row in rows)
    summary = {"n": config.n, "fields": reports, "pass": passed}
    return RunResult(0 if passed else 1, ["field", "gradient_error", "hessian_error", "pass"], rows, summary)


COMMANDS = {
    CommandEnum.eval: _run_eval,
    CommandEnum.verify: _run_verify,
    CommandEnum.limit: _run_limit,
    CommandEnum.appendix: _run_appendix,
    CommandEnum.constants: _run_constants,
    CommandEnum.corpus: _run_corpus,
}


def run(config: ExperimentConfig, output_dir: Optional[str] = None) -> RunResult:
    """Execute the configured command and write its artifacts"""
    logger.info(f"Running {config.command.value} {config.operator or ''} (n={config.n}, s={config.s}, p={config.p})")
    result = COMMANDS[config.command](config)

    directory = output_dir or config.output.path or settings.OUTPUT_DIR
    os.makedirs(directory, exist_ok=True)
    stem = os.path.join(directory, _artifact_stem(config))
    if config.output.format in (OutputFormatEnum.csv, OutputFormatEnum.both):
        write_csv(f"{stem}.csv", result.header, result.rows)
        result.artifacts.append(f"{stem}.csv")
    if config.output.format in (OutputFormatEnum.json, OutputFormatEnum.both):
        with open(f"{stem}.json", "w", encoding="utf-8") as handle:
            json.dump(result.summary, handle, indent=2, sort_keys=True)
        result.artifacts.append(f"{stem}.json")
    logger.info(f"Finished with exit code {result.exit_code}; wrote {', '.join(result.artifacts)}")
    return result
