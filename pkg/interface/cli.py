"""CLI wiring for the channel estimation toolkit."""

from __future__ import annotations

import argparse
from pathlib import Path
import sys

ROOT_DIR = Path(__file__).resolve().parents[1]
if str(ROOT_DIR) not in sys.path:
    sys.path.append(str(ROOT_DIR))

from interface.run_config import COMMANDS, FORMATS, build_run_config, merge, parse_run_file
from pipeline.runner import EstimationRunner
from utils.errors import EstimationError
from utils.log import configure, get_logger
from utils.settings import DEFAULT_SETTINGS, NumericSettings

logger = get_logger("interface", "cli")

DEFAULTS = {
    "settings": ROOT_DIR / "config.json",
}

_OVERRIDE_KEYS = (
    "channel",
    "extension",
    "n_max",
    "theta_max",
    "dim",
    "input",
    "povm",
    "theta_start",
    "theta_stop",
    "points",
    "theta",
    "shots",
    "trials",
    "seed",
    "workers",
    "out",
    "format",
    "estimates_out",
    "settings",
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="One-parameter quantum channel estimation toolkit")
    parser.add_argument("command", nargs="?", choices=COMMANDS, help="Command to run (may also come from --config)")
    parser.add_argument("--config", type=Path, help="Run config file with key = value lines")
    parser.add_argument("--out", help="Output path")
    parser.add_argument("--format", choices=FORMATS, help="Output format")
    parser.add_argument("--seed", help="Master seed (unsigned 64-bit)")
    parser.add_argument(
        "--settings",
        help=f"Numeric settings JSON (default: {DEFAULTS['settings']})",
    )
    parser.add_argument("--verbose", action="store_true", help="Log at DEBUG level")
    group = parser.add_argument_group("run overrides")
    group.add_argument("--channel", help="Builtin channel name")
    group.add_argument("--extension", help="none, identity or square")
    group.add_argument("--n-max", dest="n_max", help="Fock cutoff for damping")
    group.add_argument("--theta-max", dest="theta_max", help="Upper domain end for random-shift")
    group.add_argument("--dim", help="Cycle length for random-shift")
    group.add_argument("--input", help="Input-state descriptor, e.g. basis:0, plus, bell:0, fock:1")
    group.add_argument("--povm", help="POVM preset name or .npy file")
    group.add_argument("--theta-start", dest="theta_start")
    group.add_argument("--theta-stop", dest="theta_stop")
    group.add_argument("--points")
    group.add_argument("--theta", help="True parameter value for simulate")
    group.add_argument("--shots")
    group.add_argument("--trials")
    group.add_argument("--workers", help="Worker threads for simulate")
    group.add_argument("--estimates-out", dest="estimates_out", help="CSV path for per-trial estimates")
    return parser


def _load_settings(path: object) -> NumericSettings:
    if path is not None:
        return NumericSettings.from_file(Path(str(path)))
    if DEFAULTS["settings"].exists():
        return NumericSettings.from_file(DEFAULTS["settings"])
    return DEFAULT_SETTINGS


def run(argv: list[str] | None = None) -> int:
    """Exit status: 0 on success, the error's code for estimation errors, 1 for anything unexpected."""
    args = build_parser().parse_args(argv)
    configure(verbose=args.verbose)
    try:
        file_values = parse_run_file(args.config) if args.config is not None else {}
        overrides = {key: getattr(args, key) for key in _OVERRIDE_KEYS}
        overrides["command"] = args.command
        config = build_run_config(merge(file_values, overrides))
        settings = _load_settings(config.settings)
        EstimationRunner(settings=settings).run(config)
    except EstimationError as exc:
        message = " ".join(str(exc).split())
        sys.stderr.write(f"error code={exc.exit_code} type={type(exc).__name__} message={message}\n")
        return exc.exit_code
    except Exception as exc:
        logger.exception("unexpected failure")
        message = " ".join(str(exc).split()) or "-"
        sys.stderr.write(f"error code=1 type={type(exc).__name__} message={message}\n")
        return 1
    return 0


def main(argv: list[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
