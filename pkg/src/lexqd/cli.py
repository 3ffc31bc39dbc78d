"""Command line entry point: ``lexqd run|sweep|heatmap``."""
from __future__ import annotations

import argparse
import logging
import sys
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from .archive import load_heatmap
from .errors import InvalidConfig, InvalidInput
from .runner import load_config, run_experiment, sweep_conditions, write_outputs

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3
RAMP = ":-=+*#%@"

log = logging.getLogger("lexqd")


def _override(config, args):
    kw = {}
    if args.replicates is not None:
        kw["replicates"] = args.replicates
    if args.seed is not None:
        kw["seed"] = args.seed
        kw["seeds"] = None
    return replace(config, **kw) if kw else config


def _config_path(args) -> Path:
    path = args.config or args.target
    if path is None:
        raise InvalidConfig("no config given (positional path or --config)")
    return Path(path)


def cmd_run(args) -> int:
    path = _config_path(args)
    config, _ = load_config(path)
    config = _override(config, args)
    out = Path(args.out or config.out or Path("runs") / path.stem)
    results = run_experiment(config, threads=args.threads)
    paths = write_outputs(config, results, out)
    for p in paths.values():
        print(p)
    return EXIT_OK


def _sweep_files(target: Path) -> list[Path]:
    if target.is_file():
        return [target]
    if not target.is_dir():
        raise InvalidConfig(f"sweep target not found: {target}")
    files = sorted(target.glob("*.ini"))
    if not files:
        raise InvalidConfig(f"no *.ini configs in {target}")
    return files


def cmd_sweep(args) -> int:
    target = _config_path(args)
    root = Path(args.out or "runs")
    # parse everything first so a bad file fails before any compute
    plans = []
    for f in _sweep_files(target):
        config, sweep = load_config(f)
        plans.append((f, [_override(c, args) for c in sweep_conditions(config, sweep)]))
    for f, conditions in plans:
        for c in conditions:
            out = root / f.stem / c.label
            results = run_experiment(c, threads=args.threads)
            write_outputs(c, results, out)
            final = np.mean([r.rows[-1].best_score for r in results])
            print(f"{f.stem}/{c.label}: mean final best {final:.6g} -> {out}")
    return EXIT_OK


def render_heatmap(grid: np.ndarray) -> str:
    """ASCII rendering, highest row (largest y) first; ``.`` is an empty cell."""
    filled = grid[np.isfinite(grid)]
    lo, hi = (filled.min(), filled.max()) if filled.size else (0.0, 0.0)
    span = hi - lo
    lines = []
    for row in grid[::-1]:
        chars = []
        for v in row:
            if not np.isfinite(v):
                chars.append(".")
                continue
            level = len(RAMP) - 1 if span == 0 else int((v - lo) / span * (len(RAMP) - 1))
            chars.append(RAMP[level])
        lines.append("".join(chars))
    lines.append(f"cells {filled.size}/{grid.size}  min {lo:.6g}  max {hi:.6g}")
    return "\n".join(lines)


def cmd_heatmap(args) -> int:
    if args.target is None:
        raise InvalidConfig("heatmap needs an archive file")
    path = Path(args.target)
    if not path.is_file():
        raise InvalidConfig(f"archive file not found: {path}")
    _, grid = load_heatmap(path)
    print(render_heatmap(grid))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="config file (alternative to the positional path)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--replicates", type=int, help="override the replicate count")
    common.add_argument("--seed", type=int, help="override the base seed")
    common.add_argument("--threads", type=int, help="numba worker threads")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="lexqd", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn, helptext in (
        ("run", cmd_run, "run one config, write metrics/summary/archive CSVs"),
        ("sweep", cmd_sweep, "run the condition grid for a config file or directory"),
        ("heatmap", cmd_heatmap, "print an archive CSV as an ASCII heatmap"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("target", nargs="?")
        p.set_defaults(func=fn)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    warnings.filterwarnings("ignore", module="numba")
    try:
        return args.func(args)
    except (InvalidConfig, InvalidInput) as exc:
        print(f"lexqd: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - report and map to the runtime exit code
        print(f"lexqd: runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
