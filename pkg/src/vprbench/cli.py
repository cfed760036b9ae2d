"""Command-line interface.

Subcommands: ``run`` (one technique on one dataset), ``synth`` (write a
synthetic dataset tree), ``compare`` (summarize results.json files), and
``validate`` (check a descriptor file against the binary format).

Exit codes: 0 success, 2 configuration error, 3 dataset error, 4 technique
error (including descriptor-file violations).
"""

from __future__ import annotations

import argparse
import sys

from .dataset import make_synthetic_dataset, write_dataset
from .descriptor_io import read_descriptor_file
from .exceptions import ConfigError, DatasetError, TechniqueError, VprBenchError
from .runner import RunConfig, compare_results, run_evaluation


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vprbench",
        description="Benchmark visual place recognition techniques: AUC, matching time, memory.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="evaluate one technique on one dataset")
    run_p.add_argument("--config", help="run config file (key = value, [technique_params] section)")
    run_p.add_argument("--dataset", help="dataset root directory (overrides config)")
    run_p.add_argument("--technique", help="hog | seqslam | bow | vlad | external")
    run_p.add_argument("--out", help="output directory for results.json / csv artifacts")
    run_p.add_argument("--seed", type=int, help="seed for vocabulary training etc.")
    run_p.add_argument("--anchored-auc", action="store_true", default=None,
                       help="prepend a (0, p1) anchor before integrating the PR curve")
    run_p.add_argument("--timing-repetitions", type=int, help="encoding timing repetitions (>= 3)")
    run_p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                       help="technique parameter override (repeatable)")

    synth_p = sub.add_parser("synth", help="generate a synthetic dataset tree")
    synth_p.add_argument("--frames", type=int, required=True, help="frame count (>= 20)")
    synth_p.add_argument("--perturb", required=True,
                         help="identity | brightness:A | shift:PX | noise:SIGMA")
    synth_p.add_argument("--out", required=True, help="output dataset root")
    synth_p.add_argument("--seed", type=int, default=0)
    synth_p.add_argument("--window-radius", type=int, default=2)
    synth_p.add_argument("--width", type=int, default=128)
    synth_p.add_argument("--height", type=int, default=96)

    compare_p = sub.add_parser("compare", help="summarize results.json files in one table")
    compare_p.add_argument("results", nargs="+", help="paths to results.json files")

    validate_p = sub.add_parser("validate", help="validate a binary descriptor file")
    validate_p.add_argument("file", help="descriptor file path")
    return parser


def _cmd_run(args) -> int:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    if args.dataset:
        cfg.dataset_root = args.dataset
    if args.technique:
        cfg.technique = args.technique
    if args.out:
        cfg.output_dir = args.out
    if args.seed is not None:
        cfg.seed = args.seed
    if args.anchored_auc is not None:
        cfg.anchored_auc = args.anchored_auc
    if args.timing_repetitions is not None:
        cfg.timing_repetitions = args.timing_repetitions
    for item in args.param:
        if "=" not in item:
            raise ConfigError(f"--param expects KEY=VALUE, got {item!r}")
        key, _, value = item.partition("=")
        cfg.technique_params[key.strip()] = value.strip()

    result = run_evaluation(cfg)
    print(
        f"{result.technique_id} on {result.dataset_name}: "
        f"AUC={result.auc:.6f} enc={result.encoding_time_s:.3e}s/query "
        f"pair={result.pair_match_time_s:.3e}s total={result.total_match_time_s:.3e}s/query "
        f"bytes={result.descriptor_bytes} excluded={result.excluded_queries}"
    )
    print(f"artifacts written to {cfg.output_dir}")
    return 0


def _cmd_synth(args) -> int:
    bundle = make_synthetic_dataset(
        args.frames, args.perturb, args.seed,
        frame_size=(args.width, args.height),
        window_radius=args.window_radius,
    )
    out = write_dataset(bundle, args.out)
    print(f"wrote {bundle.name}: {args.frames} query + {args.frames} reference frames to {out}")
    return 0


def _cmd_compare(args) -> int:
    print(compare_results(args.results))
    return 0


def _cmd_validate(args) -> int:
    parsed = read_descriptor_file(args.file)
    print(
        f"OK {args.file}: technique_id={parsed.technique_id!r} count={parsed.count} "
        f"dim={parsed.dim} footprint={parsed.dim * 4} bytes/row"
    )
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {"run": _cmd_run, "synth": _cmd_synth, "compare": _cmd_compare,
                "validate": _cmd_validate}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DatasetError as exc:
        print(f"dataset error: {exc}", file=sys.stderr)
        return 3
    except TechniqueError as exc:
        print(f"technique error: {exc}", file=sys.stderr)
        return 4
    except VprBenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
