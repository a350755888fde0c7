"""Command-line entry point: ``holeburn {burn,fock1,fock2,device,sweep}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .runner import (
    EXIT_CONFIG,
    EXIT_OK,
    ConfigError,
    ExperimentConfig,
    exit_code_for,
    run,
    sweep,
    write_outputs,
)

log = logging.getLogger("holeburning")


def _targets(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"targets must be comma-separated integers: {text!r}") from None


def _range(text: str) -> tuple[float, float, int]:
    try:
        lo, hi, steps = text.split(":")
        return float(lo), float(hi), int(steps)
    except ValueError:
        raise argparse.ArgumentTypeError("range must look like MIN:MAX:STEPS") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON config file; flags override its fields")
    common.add_argument("--alpha", type=float, help="coherent amplitude |alpha|")
    common.add_argument("--alpha-phase", type=float, help="phase of alpha in radians")
    common.add_argument("--beta", help="coupling, e.g. 45MHz, 2.83e8rad/s, or a bare number (dimensionless time)")
    common.add_argument("--targets", type=_targets, help="hole positions, e.g. 4,1,7")
    common.add_argument("--n", dest="N", type=int, help="target Fock state")
    common.add_argument("--search-depth", type=int)
    common.add_argument("--tail-tol", type=float)
    common.add_argument("--t-qubit", type=float, help="qubit coherence time in s")
    common.add_argument("--t-nr", type=float, help="resonator coherence time in s")
    common.add_argument("--out", help="output directory (default: out/<mode>)")
    common.add_argument("--strict-budget", action="store_true", default=None, help="fail runs that exceed coherence")
    common.add_argument("--workers", type=int, help="parallel sweep points")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="holeburn", description=__doc__)
    sub = parser.add_subparsers(dest="mode", required=True)
    sub.add_parser("burn", parents=[common], help="burn holes into a coherent state")
    sub.add_parser("fock1", parents=[common], help="Fock state |N> with N e-detections")
    sub.add_parser("fock2", parents=[common], help="Fock state |N> with ceil(N/2) e-detections")
    sub.add_parser("device", parents=[common], help="effective coupling from device parameters")
    sw = sub.add_parser("sweep", parents=[common], help="grid sweep over one parameter")
    sw.add_argument("--base", choices=("burn", "fock1", "fock2"), help="mode run at each grid point")
    sw.add_argument("--param", help="parameter to sweep (alpha, alpha_phase, search_depth, N, tail_tol)")
    sw.add_argument("--range", dest="grid", type=_range, help="MIN:MAX:STEPS")
    return parser


_FLAG_KEYS = (
    "alpha",
    "alpha_phase",
    "beta",
    "targets",
    "N",
    "search_depth",
    "tail_tol",
    "t_qubit",
    "t_nr",
    "strict_budget",
    "workers",
    "out",
)


def merge_config(args: argparse.Namespace) -> dict:
    raw: dict = {}
    if args.config is not None:
        try:
            raw = json.loads(args.config.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
    raw["mode"] = args.mode
    for key in _FLAG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            raw[key] = value
    if args.mode == "sweep":
        block = dict(raw.get("sweep") or {})
        if getattr(args, "base", None):
            block["mode"] = args.base
        if getattr(args, "param", None):
            block["param"] = args.param
        if getattr(args, "grid", None):
            block["min"], block["max"], block["steps"] = args.grid
        raw["sweep"] = block
    return raw


def _summary(body: dict) -> str:
    parts = []
    for key in ("beta_hz", "success_prob", "fidelity", "hole_time_n0_ns"):
        if body.get(key) is not None:
            parts.append(f"{key}={body[key]:.6g}")
    return " ".join(parts)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = ExperimentConfig.from_dict(merge_config(args))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TypeError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(cfg.out or Path("out") / cfg.mode)

    if cfg.mode == "sweep":
        try:
            reports, table = sweep(cfg, out)
        except Exception as exc:
            print(f"error: {exc}", file=sys.stderr)
            return exit_code_for(exc)
        sys.stdout.write(table)
        for r in reports:
            if isinstance(r, BaseException):
                print(f"point failed: {r}", file=sys.stderr)
                return exit_code_for(r)
        return EXIT_OK

    try:
        report = run(cfg)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exit_code_for(exc)
    write_outputs(report, out)
    print(f"{cfg.mode}: {_summary(report.body)} -> {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
