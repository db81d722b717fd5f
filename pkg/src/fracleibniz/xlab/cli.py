"""Command line: ``fracleibniz verify | sweep | report``.

Exit codes: 0 pass, 1 failed check, 2 configuration error, 3 resolution error.
"""

from __future__ import annotations

import argparse
import logging
import statistics
import sys
import time
from collections import defaultdict
from pathlib import Path

from ..zoo import ResolutionError
from .emit import emit, read_csv, svg_plot
from .fit import fit_slope
from .probes import ConfigError, load_config, run_probe
from .verify import MODULES, run_checks

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_RESOLUTION = 0, 1, 2, 3


def _cmd_verify(args) -> int:
    t0 = time.perf_counter()
    results = run_checks(args.module, args.fast, echo=print)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed in {time.perf_counter() - t0:.1f} s")
    return EXIT_FAIL if failed or not results else EXIT_OK


def _cmd_sweep(args) -> int:
    probe = load_config(args.config, grid_n=args.grid_n, seed=args.seed)
    records = run_probe(probe)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.config).stem
    for fmt in ("csv", "json", "svg"):
        emit(records, fmt, out / f"{stem}.{fmt}")
    print(f"{probe.name}: {probe.anchor}")
    for r in records:
        print(f"  {probe.sweep_name}={r.param:g}  lhs={r.lhs:.6g}  rhs={r.rhs:.6g}  ratio={r.ratio:.6g}")
    print(f"wrote {out / stem}.{{csv,json,svg}}")
    return EXIT_OK


def _summary_rows(directory: Path):
    groups = defaultdict(list)
    for path in sorted(directory.glob("*.csv")):
        for rec in read_csv(path):
            groups[(path.stem, rec.probe)].append(rec)
    return groups


def _cmd_report(args) -> int:
    directory = Path(args.dir)
    if not directory.is_dir():
        raise ConfigError(f"{directory} is not a directory")
    groups = _summary_rows(directory)
    lines = [
        "# Probe summary",
        "",
        "| experiment | probe | points | min ratio | median ratio | max ratio | max/median | slope |",
        "|---|---|---|---|---|---|---|---|",
    ]
    for (stem, probe), recs in groups.items():
        ratios = [r.ratio for r in recs]
        med = statistics.median(ratios)
        try:
            slope = f"{fit_slope(recs).slope:.4g}"
        except ValueError:
            slope = "n/a"
        spread = f"{max(ratios) / med:.4g}" if med > 0 else "inf"
        lines.append(
            f"| {stem} | {probe} | {len(recs)} | {min(ratios):.4g} | {med:.4g} | {max(ratios):.4g} | {spread} | {slope} |"
        )
        (directory / f"{stem}.svg").write_text(svg_plot(recs, title=probe))
    (directory / "summary.md").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracleibniz", description=__doc__.splitlines()[0])
    parser.add_argument("--log-level", default="warning", choices=["debug", "info", "warning", "error"])
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="identity and oracle suite")
    v.add_argument("--module", choices=MODULES)
    v.add_argument("--fast", action="store_true", help="exact identities, 1D oracles and symbol calculus only")
    v.set_defaults(func=_cmd_verify)

    s = sub.add_parser("sweep", help="run an experiment config")
    s.add_argument("config")
    s.add_argument("--out", default="results")
    s.add_argument("--grid-n", type=int)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=_cmd_sweep)

    r = sub.add_parser("report", help="summarize the CSVs in a directory")
    r.add_argument("dir")
    r.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResolutionError as exc:
        print(f"resolution error: {exc}", file=sys.stderr)
        return EXIT_RESOLUTION
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
