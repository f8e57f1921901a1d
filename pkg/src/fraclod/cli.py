"""Command line interface: ``fraclod run|check|render|inspect``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--config", type=Path, help="experiment INI file")
    src.add_argument("--preset", help="bundled preset: table1, table2, lod-study, projection-study")
    common.add_argument("--seed", type=int, help="geological network seed")
    common.add_argument("--k-max", type=int, help="stored network depth")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--threads", type=int, help="BLAS thread count")
    common.add_argument("--dry-run", action="store_true", help="validate and print planned sizes only")
    common.add_argument("-v", "--verbose", action="count", default=0)

    p = argparse.ArgumentParser(prog="fraclod", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="run a configured study")
    chk = sub.add_parser("check", parents=[common], help="evaluate the acceptance criteria")
    chk.add_argument("--only", type=int, nargs="+", metavar="N", help="criterion numbers to evaluate")
    chk.add_argument("--k5", action="store_true", help="include K=5 in the localized rate check")
    ren = sub.add_parser("render", parents=[common], help="write SVG renders of the network")
    ren.add_argument("--level", type=int, nargs="+", help="levels to render (default all)")
    sub.add_parser("inspect", parents=[common], help="summarize the network and its constants")
    return p


def _config(args):
    from .harness import load_config

    preset = args.preset
    if args.config is None and preset is None:
        preset = "table1"
    overrides = {"seed": args.seed, "k_max": args.k_max, "out": str(args.out) if args.out else None}
    return load_config(args.config, preset, overrides)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.threads:
        for var in _THREAD_VARS:
            os.environ[var] = str(args.threads)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(asctime)s %(name)s %(levelname)s %(message)s")

    from . import harness

    try:
        cfg = _config(args)
    except harness.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out = Path(cfg.out)

    if args.dry_run:
        print(f"config {cfg.hash()[:16]} study {cfg.study} network {cfg.kind}")
        for row in harness.dry_run(cfg):
            print(f"  scale {row['scale']}: mesh level {row['mesh_level']}, {row['triangles']} triangles, "
                  f"{row['cells']} cells, {row['dofs']} dofs")
        return 0

    if args.command == "run":
        archive = harness.run(cfg, out)
        print(f"wrote {len(archive.files) + 1} files to {out} (config {archive.config_hash[:16]})")
        for name in archive.files:
            if name.endswith(".txt"):
                print((out / name).read_text(encoding="utf-8"))
        return 0

    if args.command == "render":
        net = harness.build_network(cfg)
        levels = args.level or range(1, net.k_max + 1)
        for k in levels:
            path = out / f"network_k{k}.svg"
            harness.atomic_write(path, harness.render_network_svg(net, k))
            print(path)
        return 0

    if args.command == "inspect":
        print(harness.inspect_network(cfg))
        return 0

    from . import acceptance

    ctx = acceptance.Context(cfg.seed)
    numbers = args.only or sorted(acceptance.CRITERIA)
    results = []
    for n in numbers:
        if n == 1:
            res = acceptance.criterion_1(ctx, include_k5=args.k5)
        else:
            res = acceptance.CRITERIA[n](ctx)
        print(res.report(), flush=True)
        results.append(res)
    summary = {r.number: r.passed for r in results}
    harness.atomic_write(out / "acceptance.json", json.dumps(
        {"config_hash": cfg.hash(), "results": {r.number: {"passed": r.passed, "checks": r.checks}
                                                for r in results}}, indent=2, default=str))
    print(" ".join(f"{n}:{'pass' if ok else 'FAIL'}" for n, ok in summary.items()))
    return 0 if all(summary.values()) else 1


if __name__ == "__main__":
    sys.exit(main())
