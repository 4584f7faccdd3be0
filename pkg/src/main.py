"""
Command-line entry point
"""

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from loguru import logger
from pydantic import ValidationError

from .commands import COMMANDS
from .config import get_settings
from .models.schemas import RunConfig
from .utils.metrics import get_metrics
from .utils.resilience import ConfigurationError, ExitCode, ToolkitError, exit_code_for


LOG_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>"
)


def configure_logging(level: str) -> None:
    """Route all log output to stderr so reports on stdout stay machine-readable"""
    logger.remove()
    logger.add(sys.stderr, format=LOG_FORMAT, level=level.upper())


def _line_of(text: str, loc: Sequence) -> Optional[int]:
    """Line of the innermost key of ``loc`` that can be found in the raw JSON"""
    position = 0
    found = None
    for part in loc:
        if not isinstance(part, str):
            continue
        at = text.find(f'"{part}"', position)
        if at < 0:
            break
        position = at
        found = at
    if found is None:
        return None
    return text.count("\n", 0, found) + 1


def load_config(path: Path) -> RunConfig:
    """
    Read and validate a run configuration.

    Raises:
        ConfigurationError: Unreadable file, malformed JSON or schema violations,
            with one line-numbered entry per offending key
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"cannot read config {path}: {e.strerror or e}") from e

    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"config {path} is not valid JSON", [(e.lineno, "<document>", e.msg)]) from e

    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        entries: List[Tuple[Optional[int], str, str]] = []
        for error in e.errors():
            loc = error.get("loc", ())
            location = ".".join(str(part) for part in loc) or "<document>"
            entries.append((_line_of(text, loc), location, error.get("msg", "invalid value")))
        raise ConfigurationError(f"config {path} failed validation", entries) from e


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, type=Path, help="JSON run configuration")
    common.add_argument("--out", type=Path, default=None, help="Report path (stdout when omitted)")
    common.add_argument("--threads", type=int, default=None, help="Worker threads for the parallel kernels")
    common.add_argument("--log-level", default=None, help="loguru level, overrides LOG_LEVEL")

    settings = get_settings()
    parser = argparse.ArgumentParser(prog="kr-toolkit", description=f"{settings.app_name} v{settings.app_version}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("intersect", parents=[common], help="Intersection numbers with the CM cycle (JSON)")
    sub.add_parser("green-probe", parents=[common], help="Green function along a ray to the cusp (CSV)")
    sub.add_parser("lattice", parents=[common], help="Hermitian lattice invariants (JSON)")
    sub.add_parser("rho", parents=[common], help="Audit of the ideal count rho (JSON)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = get_settings()
    configure_logging(args.log_level or settings.log_level)

    threads = args.threads if args.threads is not None else settings.default_threads
    if threads < 1:
        logger.error(f"--threads must be at least 1, got {threads}")
        return int(ExitCode.CONFIG_ERROR)

    logger.info(f"Starting {settings.app_name} v{settings.app_version}: {args.command}")
    try:
        config = load_config(args.config)
        code = COMMANDS[args.command](config, args.out, threads)
    except ConfigurationError as e:
        logger.error(e.render())
        return int(ExitCode.CONFIG_ERROR)
    except ToolkitError as e:
        code = exit_code_for(e)
        logger.error(f"{args.command} failed ({type(e).__name__}): {e}")
        return int(code)

    get_metrics().log_summary()
    if code != ExitCode.SUCCESS:
        logger.warning(f"{args.command} finished with failed items (exit code {int(code)})")
    else:
        logger.success(f"{args.command} finished")
    return int(code)


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
