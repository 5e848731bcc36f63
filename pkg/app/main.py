"""
MeanLab v1.0 - Nonlocal Mean Kernel Laboratory
Command-line entry point
"""
import argparse
import json
import logging
import sys
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from app.config import settings
from app.exceptions import ConfigError, MeanLabError
from app.schemas import CommandEnum, ExperimentConfig, FieldKindEnum, OutputFormatEnum, VariantEnum
from app.services.runner import run

logger = logging.getLogger(__name__)

OPERATOR_COMMANDS = (CommandEnum.eval, CommandEnum.verify, CommandEnum.limit)


def configure_logging() -> None:
    logging.basicConfig(
        level=logging.DEBUG if settings.DEBUG else getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="meanlab", description=f"{settings.APP_NAME} v{settings.APP_VERSION}")
    commands = parser.add_subparsers(dest="command", required=True)

    for command in CommandEnum:
        sub = commands.add_parser(command.value)
        if command in OPERATOR_COMMANDS:
            sub.add_argument("operator", nargs="?", help="operator name, e.g. fplap or gfplap+")
        sub.add_argument("--config", help="JSON experiment config; flags override its values")
        sub.add_argument("--field", choices=[k.value for k in FieldKindEnum])
        sub.add_argument("--field-params", help="JSON object of field parameters")
        sub.add_argument("--n", type=int)
        sub.add_argument("--s", type=float)
        sub.add_argument("--p", type=float)
        sub.add_argument("--r", type=float)
        sub.add_argument("--x", type=_float_list, help="evaluation point, comma-separated")
        sub.add_argument("--variant", choices=[v.value for v in VariantEnum])
        sub.add_argument("--r-grid", type=_float_list)
        sub.add_argument("--s-grid", type=_float_list)
        sub.add_argument("--output", help="output directory")
        sub.add_argument("--format", choices=[f.value for f in OutputFormatEnum])
    return parser


def load_config_file(path: str) -> Dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e.strerror}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"Invalid JSON in {path}: {e.msg}", line=e.lineno)
    if not isinstance(data, dict):
        raise ConfigError(f"Config file {path} must hold a JSON object")
    return data


def merge_arguments(args: argparse.Namespace) -> ExperimentConfig:
    """File values first, explicit flags on top"""
    data = load_config_file(args.config) if args.config else {}
    data["command"] = args.command

    operator = getattr(args, "operator", None)
    if operator:
        data["operator"] = operator
    for key in ("n", "s", "p", "r", "x", "variant"):
        value = getattr(args, key)
        if value is not None:
            data[key] = value
    if args.r_grid is not None:
        data["r_grid"] = args.r_grid
    if args.s_grid is not None:
        data["s_grid"] = args.s_grid

    field = dict(data.get("field") or {})
    if args.field:
        field["kind"] = args.field
    if args.field_params:
        try:
            field["params"] = json.loads(args.field_params)
        except json.JSONDecodeError as e:
            raise ConfigError(f"Invalid JSON in --field-params: {e.msg}", field="field.params")
    data["field"] = field

    output = dict(data.get("output") or {})
    if args.output:
        output["path"] = args.output
    if args.format:
        output["format"] = args.format
    data["output"] = output

    try:
        return ExperimentConfig(**data)
    except ValidationError as e:
        error = e.errors()[0]
        location = ".".join(str(part) for part in error["loc"])
        raise ConfigError(f"{location}: {error['msg']}", field=location)


def main(argv: Optional[List[str]] = None) -> int:
    configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0

    try:
        config = merge_arguments(args)
        result = run(config)
    except MeanLabError as e:
        logger.debug(f"Run failed: {e.to_dict()}")
        print(f"error[{e.code}]: {e.message}", file=sys.stderr)
        return e.exit_code

    for path in result.artifacts:
        print(path)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
