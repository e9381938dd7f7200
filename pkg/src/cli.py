#!/usr/bin/env python3
"""
OrliczLab command line

    orliczlab <group> <action> [flags]          one run, one report file
    orliczlab --config run.json [<group> <action> [flags]]
    orliczlab --verify certificate.json
    orliczlab sweep --configs runs.json

Flags override the params of a --config document; parameters left unset
come from the environment's LabSettings. Every run prints one summary line
on stdout; logs go to stderr.

Exit codes: 0 ok, 2 failed check or exhausted search, 3 input error,
4 numerical error.
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from dotenv import load_dotenv
from pydantic import ValidationError as PydanticValidationError

from .config import config_manager
from .config_schema import (
    PARAMS_MODELS,
    LabSettings,
    RunConfig,
    SweepConfig,
    apply_settings_defaults,
    config_hash,
    sweep_hash,
)
from .constants import EXIT_INPUT_ERROR
from .services import ServiceResult, pydantic_error_param
from .services.service_manager import get_service_manager
from .utils.logger import log_startup, setup_logger
from .utils.reports import build_report, default_report_path, write_report
from .utils.validation import InputValidator, ValidationError, require
from .version import get_app_info

logger = logging.getLogger("orliczlab.cli")

# param name -> (flag, kind)
PARAM_FLAGS: Dict[str, Tuple[str, str]] = {
    "s": ("--s", "floats"),
    "tol": ("--tol", "positive"),
    "t_cap": ("--t-cap", "positive"),
    "slope_margin": ("--slope-margin", "nonneg"),
    "grid_size": ("--grid-size", "count"),
    "t_max": ("--tmax", "positive"),
    "t0": ("--t0", "nonneg"),
    "fail_threshold": ("--fail-threshold", "positive"),
    "L": ("--L", "floats"),
    "t_floor": ("--t-floor", "nonneg"),
    "ratio": ("--ratio", "positive"),
    "escalate": ("--escalate", "flag"),
    "function": ("--function", "step"),
    "N": ("--N", "count"),
    "K": ("--K", "count0"),
    "M": ("--M", "count"),
    "trials": ("--trials", "count"),
    "p": ("--p", "positive"),
    "n": ("--n", "count"),
    "m": ("--m", "count"),
    "n_max": ("--nmax", "count"),
    "max_steps": ("--max-steps", "count"),
    "start": ("--start", "positive"),
    "certificate": ("--certificate", "text"),
    "ns": ("--ns", "ints"),
    "premise_eps": ("--eps", "positive"),
    "min_share": ("--min-share", "positive"),
    "samples": ("--samples", "count"),
    "seed": ("--seed", "count0"),
    "chunk_size": ("--chunk-size", "count"),
    "mixture": ("--mixture", "nonneg"),
    "stab_tol": ("--stab-tol", "positive"),
    "weak_null_eps": ("--eps", "positive"),
    "max_denominator": ("--max-denominator", "count"),
    "scale": ("--scale", "count"),
}

SEQUENCE_FLAGS: Dict[str, Tuple[str, str]] = {
    "kind": ("--seq", "text"),
    "seed": ("--seed", "count0"),
    "height": ("--height", "positive"),
    "normalize": ("--normalize", "flag"),
    "ratio": ("--ratio", "positive"),
    "base": ("--base", "step"),
    "functions": ("--functions", "steps"),
    "disjoint": ("--disjoint", "flag"),
    "n_max": ("--nmax", "count"),
}

BLOCKS_FLAGS: Dict[str, Tuple[str, str]] = {
    "builtin": ("--blocks", "text"),
    "records": ("--blocks-file", "records"),
    "seed": ("--seed", "count0"),
}

PHI_FLAGS: Dict[str, Tuple[str, str]] = {
    "family": ("--family", "text"),
    "p": ("--p", "positive"),
    "knots": ("--knots", "knots"),
}

HELP = {
    "orlicz.conjugate": "Fenchel conjugate phi*(s) at one or more points",
    "orlicz.validate": "check the Orlicz axioms on a geometric grid",
    "orlicz.delta2": "probe the Delta2 growth condition",
    "orlicz.kr-probe": "search witnesses that phi* fails Delta2",
    "fn.rearrange": "decreasing rearrangement and distribution of a step function",
    "fn.norm": "Luxemburg norm of a step function",
    "fn.modular": "modular of a step function",
    "cesaro.diagnose": "order-boundedness diagnostics of Cesaro running suprema",
    "cesaro.supineq": "pointwise supremum inequality over congruence classes",
    "cesaro.pconvex": "disjoint p-convexity bound for power functions",
    "cesaro.closedbound": "modular bound for disjoint sequences",
    "counterexample.build": "build and verify the norm-divergence certificate",
    "counterexample.verify": "independently verify a certificate file",
    "counterexample.bounds": "certified modular and norm lower bounds",
    "counterexample.mc": "Monte Carlo sanity check of the certified bound",
    "dh.table": "b_(n,m) table and weak-null criterion",
    "dh.test": "(dH) series test from stabilized row limits",
    "dh.realize": "realize blocks as disjoint unit-modular functions",
    "dh.crosscheck": "series identity between modular and b-table",
}


class _Parser(argparse.ArgumentParser):
    """argparse errors become input errors (exit 3) instead of exit 2."""

    def error(self, message: str):  # type: ignore[override]
        raise ValidationError("arguments", message)


def _add_flags(parser: argparse.ArgumentParser, prefix: str, flags: Dict[str, Tuple[str, str]], names: Sequence[str]) -> None:
    for name in names:
        flag, kind = flags[name]
        dest = f"{prefix}__{name}"
        if kind == "flag":
            parser.add_argument(flag, dest=dest, action="store_true", default=argparse.SUPPRESS)
        else:
            parser.add_argument(flag, dest=dest, default=argparse.SUPPRESS, metavar=name.upper())


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="orliczlab", description=f"{get_app_info()} - Orlicz function-space laboratory")
    parser.add_argument("--config", help="run config document (JSON)")
    parser.add_argument("--verify", metavar="CERTIFICATE", help="verify a certificate file")
    parser.add_argument("--format", choices=("json", "csv"), help="report format")
    parser.add_argument("--output", help="report path")
    parser.add_argument("--env", help="settings environment (config/<env>.json)")
    parser.add_argument("--log-level", choices=("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"))

    groups = parser.add_subparsers(dest="group", metavar="GROUP")
    sweep = groups.add_parser("sweep", help="run a list of configs and aggregate one table")
    sweep.add_argument("--configs", required=True, help="JSON list of run configs")
    sweep.add_argument("--workers", help="worker threads")

    by_group: Dict[str, argparse._SubParsersAction] = {}
    for command, model in PARAMS_MODELS.items():
        group, action = command.split(".")
        if group not in by_group:
            by_group[group] = groups.add_parser(group, help=f"{group} commands").add_subparsers(
                dest="action", metavar="ACTION"
            )
        sub = by_group[group].add_parser(action, help=HELP[command])
        fields = set(model.model_fields)
        # supineq takes an optional phi for counterexample sequences; pconvex owns --p
        if model.NEEDS_PHI or ("sequence" in fields and "p" not in fields):
            _add_flags(sub, "phi", PHI_FLAGS, list(PHI_FLAGS))
        _add_flags(sub, "param", PARAM_FLAGS, [n for n in model.model_fields if n in PARAM_FLAGS])
        if "sequence" in fields:
            _add_flags(sub, "seq", SEQUENCE_FLAGS, [n for n in SEQUENCE_FLAGS if n not in fields])
        if "blocks" in fields:
            _add_flags(sub, "blocks", BLOCKS_FLAGS, [n for n in BLOCKS_FLAGS if n not in fields])
    return parser


def _convert(kind: str, raw: Any, name: str) -> Any:
    if kind == "flag":
        return bool(raw)
    if kind == "text":
        return str(raw)
    if kind == "float":
        return require(InputValidator.validate_number(raw, name))
    if kind == "positive":
        return require(InputValidator.validate_number(raw, name, 0.0, strict=True))
    if kind == "nonneg":
        return require(InputValidator.validate_number(raw, name, 0.0))
    if kind == "count":
        return require(InputValidator.validate_count(raw, name, 1))
    if kind == "count0":
        return require(InputValidator.validate_count(raw, name, 0))
    if kind == "floats":
        return require(InputValidator.validate_number_list(raw, name))
    if kind == "ints":
        return require(InputValidator.validate_number_list(raw, name, integer=True, minimum=1))
    if kind == "step":
        return require(InputValidator.validate_step_function(raw, name))
    if kind == "steps":
        return [require(InputValidator.validate_step_function(part, name)) for part in str(raw).split(";")]
    if kind == "knots":
        return require(InputValidator.validate_knots(raw, name))
    if kind == "records":
        document = require(InputValidator.validate_json_document(raw, name))
        if isinstance(document, dict):
            document = document.get("blocks")
        if not isinstance(document, list):
            raise ValidationError(name, "expected a list of blocks or an object with 'blocks'")
        return document
    raise ValueError(f"unknown flag kind {kind}")


def _collect(args: argparse.Namespace, prefix: str, flags: Dict[str, Tuple[str, str]]) -> Dict[str, Any]:
    values = {}
    for dest, raw in vars(args).items():
        head, _, name = dest.partition("__")
        if head == prefix and name in flags:
            values[name] = _convert(flags[name][1], raw, name)
    return values


def build_document(args: argparse.Namespace) -> Dict[str, Any]:
    """Merge the --config document with command-line flags."""
    document: Dict[str, Any] = {}
    if args.config:
        document = require(InputValidator.validate_json_document(args.config, "config"))
        if not isinstance(document, dict):
            raise ValidationError("config", "a run config must be a JSON object")
        document = dict(document)
    if args.verify:
        document = {"command": "counterexample.verify", "params": {"certificate": args.verify}}

    if getattr(args, "group", None):
        if not getattr(args, "action", None):
            raise ValidationError("command", f"choose an action for '{args.group}'")
        document["command"] = f"{args.group}.{args.action}"
    if not document.get("command"):
        raise ValidationError("command", "give a subcommand, --config or --verify")

    params = dict(document.get("params") or {})
    params.update(_collect(args, "param", PARAM_FLAGS))
    sequence = _collect(args, "seq", SEQUENCE_FLAGS)
    if sequence:
        # a new kind starts a new sequence; other flags adjust the configured one
        base = {} if "kind" in sequence else dict(params.get("sequence") or {})
        params["sequence"] = {**base, **sequence}
    blocks = _collect(args, "blocks", BLOCKS_FLAGS)
    if blocks:
        base = dict(params.get("blocks") or {})
        if "builtin" in blocks or "records" in blocks:
            base.pop("builtin", None)
            base.pop("records", None)
        params["blocks"] = {**base, **blocks}
    document["params"] = params

    phi_flags = _collect(args, "phi", PHI_FLAGS)
    if phi_flags:
        phi = {"family": phi_flags["family"]} if "family" in phi_flags else dict(document.get("phi") or {})
        if "p" in phi_flags:
            phi["params"] = [phi_flags["p"]]
        if "knots" in phi_flags:
            phi["knots"] = phi_flags["knots"]
        document["phi"] = phi

    output = dict(document.get("output") or {})
    if args.format:
        output["format"] = args.format
    if args.output:
        output["path"] = args.output
    document["output"] = output
    return document


def parse_run_config(document: Dict[str, Any], settings: LabSettings) -> RunConfig:
    """Fill defaults from settings, then validate.

    Params are validated on their own first so errors name the parameter.
    """
    document = dict(document)
    command = document.get("command")
    model = PARAMS_MODELS.get(command) if isinstance(command, str) else None
    if model is not None:
        params = document.get("params") or {}
        if not isinstance(params, dict):
            raise ValidationError("params", "params must be an object")
        document["params"] = apply_settings_defaults(command, params, settings)
        model.model_validate(document["params"])
    return RunConfig.model_validate(document)


def _fail(param: str, message: str, exit_code: int = EXIT_INPUT_ERROR) -> int:
    logger.debug(f"input rejected: {param}: {message}")
    print(f"orliczlab: error: {param}: {message}", file=sys.stderr)
    return exit_code


def _emit(command: str, canonical: Dict[str, Any], digest: str, result: ServiceResult, fmt: str, path: Optional[str], settings: LabSettings) -> int:
    report = build_report(command, canonical, digest, result.status, result.message or "", result.to_dict())
    target = Path(path) if path else default_report_path(settings.output_dir, command, digest, fmt)
    try:
        write_report(report, result.rows, fmt, target)
    except OSError as e:
        return _fail("output", f"cannot write report {target}: {e}")
    line = f"{command} [{result.status}] {result.message or ''}"
    if not result.success and result.param:
        line += f" (param: {result.param}, exit {result.exit_code})"
    print(f"{line} -> {target}")
    return result.exit_code


def run_single(args: argparse.Namespace, settings: LabSettings) -> int:
    config = parse_run_config(build_document(args), settings)
    result = get_service_manager().run(config)
    return _emit(
        config.command, config.canonical(), config_hash(config), result,
        config.output.format, config.output.path, settings,
    )


def run_sweep(args: argparse.Namespace, settings: LabSettings) -> int:
    document = require(InputValidator.validate_json_document(args.configs, "configs"))
    if isinstance(document, list):
        document = {"configs": document}
    if not isinstance(document, dict):
        raise ValidationError("configs", "expected a list of run configs or an object with 'configs'")
    raw_configs = document.get("configs") or []
    if not isinstance(raw_configs, list):
        raise ValidationError("configs", "'configs' must be a list")

    configs: List[RunConfig] = []
    for index, raw in enumerate(raw_configs):
        if not isinstance(raw, dict):
            raise ValidationError(f"configs[{index}]", "each run config must be an object")
        try:
            configs.append(parse_run_config(raw, settings))
        except PydanticValidationError as e:
            raise ValidationError(f"configs[{index}].{pydantic_error_param(e)}", e.errors()[0]["msg"])
    output = dict(document.get("output") or {"format": "csv"})
    if args.format:
        output["format"] = args.format
    if args.output:
        output["path"] = args.output
    sweep = SweepConfig(configs=configs, output=output)

    workers = settings.sweep_workers
    if args.workers is not None:
        workers = require(InputValidator.validate_count(args.workers, "workers", 1))
    result = get_service_manager().run_sweep(sweep, workers)
    canonical = {"configs": [c.canonical() for c in sweep.configs]}
    command = f"sweep.{sweep.command or 'empty'}"
    return _emit(command, canonical, sweep_hash(sweep), result, sweep.output.format, sweep.output.path, settings)


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    try:
        args = build_parser().parse_args(argv)
    except ValidationError as e:
        return _fail(e.field_name, e.message)

    if args.env:
        config_manager.set_environment(args.env)
    try:
        settings = config_manager.load_settings()
    except ValueError as e:
        return _fail("settings", str(e))

    level = args.log_level or (None if os.getenv("ORLICZLAB_LOG_LEVEL") else settings.log_level)
    setup_logger(level=level)
    log_startup("orliczlab.cli")

    try:
        if getattr(args, "group", None) == "sweep":
            return run_sweep(args, settings)
        return run_single(args, settings)
    except ValidationError as e:
        return _fail(e.field_name, e.message)
    except PydanticValidationError as e:
        return _fail(pydantic_error_param(e), e.errors()[0]["msg"])


if __name__ == "__main__":
    sys.exit(main())
