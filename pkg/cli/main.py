"""
Command-line runner for multiresolution distribution experiments.
Reads one TOML experiment config, runs its pipeline and writes a CSV table
plus a JSON summary with the pass/fail verdict.

Usage:
    mrdist <pipeline> --config <path> [--out <dir>]
    mrdist list

Exit status: 0 when every check passes, 2 on a numerical failure, 1 on a
configuration error (nothing is written then).
"""
import argparse
import json
import math
import os
import sys
import time

import numpy as np

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from pydantic import ValidationError  # noqa: E402

from cli.metrics import record_run  # noqa: E402
from cli.pipelines import PIPELINES, build_kernel  # noqa: E402
from cli.schemas import ExperimentConfig  # noqa: E402
from cli.tracking import log_run  # noqa: E402
from src.catalog import list_catalog  # noqa: E402
from src.config import FLOAT_FORMAT, OUTPUT_DIR, SCHEMA_VERSION  # noqa: E402
from src.errors import ConfigError  # noqa: E402
from src.logger import get_logger  # noqa: E402

logger = get_logger("CLI")

EXIT_PASS = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser():
    parser = _Parser(prog="mrdist", description="Multiresolution projections of distributions.")
    parser.add_argument("pipeline", choices=sorted(PIPELINES) + ["list"], help="Pipeline to run, or 'list'")
    parser.add_argument("--config", help="Path to the TOML experiment config")
    parser.add_argument("--out", help="Output directory (default: output.dir or MRDIST_OUTPUT_DIR/<name>)")
    return parser


def load_config(path):
    """Parse and validate an experiment config; every failure is a ConfigError."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"Cannot read config '{path}': {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"Config '{path}' is not valid TOML: {exc}") from exc
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"Config '{path}' is invalid:\n{exc}") from exc


def to_jsonable(value):
    """JSON-ready copy: floats at 12 significant digits, complex as [re, im], non-finite as null."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [to_jsonable(value.real), to_jsonable(value.imag)]
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return float(f"{value:.12g}") if math.isfinite(value) else None
    if value is None or isinstance(value, str):
        return value
    return str(value)


def write_outputs(out_dir, cfg, pipeline, summary, rows=None):
    os.makedirs(out_dir, exist_ok=True)
    if rows is not None:
        csv_path = os.path.join(out_dir, cfg.output.csv or f"{pipeline}.csv")
        rows.to_csv(csv_path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        logger.info(f"Rows written to {csv_path}")
    summary_path = os.path.join(out_dir, cfg.output.summary)
    with open(summary_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary, fh, sort_keys=True, indent=2)
        fh.write("\n")
    logger.info(f"Summary written to {summary_path}")


def _summary(cfg, pipeline, results, passed, failed):
    return to_jsonable({
        "schema_version": SCHEMA_VERSION,
        "pipeline": pipeline,
        "name": cfg.name,
        "config": cfg.model_dump(mode="json", exclude={"output"}),
        "results": results,
        "passed": passed,
        "failed": failed,
    })


def _numerical_failure(cfg, pipeline, name, out_dir, exc, started):
    """Record a run that raised during the numerics; exit status 2."""
    criterion = getattr(exc, "clause", type(exc).__name__)
    logger.error(f"Numerical failure ({criterion}): {exc}")
    record_run(pipeline, name, "numerical_failure", False, time.perf_counter() - started)
    if cfg is None:
        return EXIT_NUMERICAL
    summary = _summary(cfg, pipeline, {"criterion": criterion, "error": str(exc)}, False, [criterion])
    write_outputs(out_dir or cfg.output.dir or os.path.join(OUTPUT_DIR, cfg.name), cfg, pipeline, summary)
    log_run(summary["config"], summary)
    return EXIT_NUMERICAL


def run(pipeline, config_path, out_dir=None):
    """Run one experiment and return its exit status."""
    started = time.perf_counter()
    name = "?"
    cfg = None
    try:
        cfg = load_config(config_path)
        name = cfg.name
        if cfg.pipeline is not None and cfg.pipeline != pipeline:
            raise ConfigError(f"Config '{config_path}' is for pipeline '{cfg.pipeline}', not '{pipeline}'")
        logger.info("=" * 60)
        logger.info(f"{pipeline}: {cfg.name} ({cfg.mra.filter}, J={cfg.mra.depth})")
        logger.info("=" * 60)
        K = build_kernel(cfg)
        result = PIPELINES[pipeline](cfg, K)
    # LinAlgError subclasses ValueError but is a numerical failure.
    except np.linalg.LinAlgError as exc:
        return _numerical_failure(cfg, pipeline, name, out_dir, exc, started)
    except (ValueError, OSError) as exc:
        logger.error(f"Configuration error: {exc}")
        record_run(pipeline, name, "config_error", False, time.perf_counter() - started)
        return EXIT_CONFIG
    except Exception as exc:
        return _numerical_failure(cfg, pipeline, name, out_dir, exc, started)

    summary = _summary(cfg, pipeline, result.results, result.passed, result.failed)
    write_outputs(out_dir or cfg.output.dir or os.path.join(OUTPUT_DIR, cfg.name), cfg, pipeline, summary,
                  result.rows)
    status = "pass" if result.passed else "fail"
    record_run(pipeline, name, status, result.passed, time.perf_counter() - started)
    log_run(summary["config"], summary)
    if result.passed:
        logger.info(f"All {len(result.checks)} checks passed")
        return EXIT_PASS
    logger.info(f"Failed checks: {', '.join(result.failed)}")
    return EXIT_NUMERICAL


def print_catalog():
    for section, names in list_catalog().items():
        print(f"{section}:")
        for entry in names:
            print(f"  {entry}")


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.pipeline != "list" and not args.config:
            raise ConfigError(f"Pipeline '{args.pipeline}' needs --config")
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        logger.error(str(exc))
        return EXIT_CONFIG
    if args.pipeline == "list":
        print_catalog()
        return EXIT_PASS
    return run(args.pipeline, args.config, args.out)


if __name__ == "__main__":
    sys.exit(main())
