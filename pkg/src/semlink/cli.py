"""Command line entry point: ``semlink run|fer|inspect``."""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import codec
from .harness import DEFAULT_SWEEP, ScenarioConfig, run_fer_bench, run_scenario
from .metrics import compression_ratio, format_value
from .pgm import PgmError, read_pgm
from .semantics import edge_map, label_histogram, validate


def _sweep(start: float, end: float, step: float) -> list[float]:
    if step <= 0:
        raise SystemExit("--ebno-step must be positive")
    count = int(np.floor((end - start) / step + 1e-9)) + 1
    if count < 1:
        raise SystemExit("empty Eb/N0 sweep")
    return [round(start + i * step, 6) for i in range(count)]


def _add_sweep_args(p: argparse.ArgumentParser, start: float, end: float, step: float) -> None:
    p.add_argument("--ebno-start", type=float, default=start)
    p.add_argument("--ebno-end", type=float, default=end)
    p.add_argument("--ebno-step", type=float, default=step)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semlink",
        description="Link-level simulation of semantic label-map transmission over polar-coded BPSK/AWGN.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a transmission scenario over label maps")
    run.add_argument("--scenario", choices=["channel", "quant", "joint"], default="channel")
    _add_sweep_args(run, DEFAULT_SWEEP[0], DEFAULT_SWEEP[-1], 0.1)
    run.add_argument("--n", type=int, default=4096, help="polar block length")
    run.add_argument("--k", type=int, default=2048, help="information bits per frame")
    run.add_argument("--design-ebno", type=float, default=2.5, help="construction Eb/N0 in dB")
    run.add_argument("--no-conceal", action="store_true", help="skip median-filter concealment")
    run.add_argument("--compress", action="store_true", help="RLE-compress maps before framing")
    run.add_argument("--window", type=int, default=3, help="median window side (odd)")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--trials", type=int, default=25, help="transmissions per (image, Eb/N0)")
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--input", nargs="+", required=True, metavar="PGM")
    run.add_argument("--out", default="-", help="CSV path, '-' for stdout")
    run.add_argument("--dump-dir", help="write received/concealed maps here")

    fer = sub.add_parser("fer", help="FER/BER benchmark of rate-R polar codes")
    fer.add_argument("--n", type=int, nargs="+", default=[512, 1024, 2048])
    fer.add_argument("--rate", type=float, default=0.5)
    _add_sweep_args(fer, 1.0, 3.0, 0.5)
    fer.add_argument("--design-ebno", type=float, default=2.5)
    fer.add_argument("--seed", type=int, default=0)
    fer.add_argument("--trials", type=int, default=2000, help="frames per point")
    fer.add_argument("--out", default="-")

    inspect = sub.add_parser("inspect", help="print statistics of label maps")
    inspect.add_argument("--input", nargs="+", required=True, metavar="PGM")
    return parser


def _open_out(path: str):
    return sys.stdout if path == "-" else open(path, "w", newline="")


def _cmd_run(args) -> int:
    cfg = ScenarioConfig(
        scenario=args.scenario,
        ebno_sweep=_sweep(args.ebno_start, args.ebno_end, args.ebno_step),
        n=args.n,
        k=args.k,
        design_ebno_db=args.design_ebno,
        conceal=not args.no_conceal,
        compress=args.compress,
        window=args.window,
        seed=args.seed,
        trials=args.trials,
        input_paths=args.input,
        workers=args.workers,
    )
    out = _open_out(args.out)
    try:
        run_scenario(cfg, out, dump_dir=args.dump_dir)
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _cmd_fer(args) -> int:
    out = _open_out(args.out)
    try:
        run_fer_bench(
            args.n,
            args.rate,
            _sweep(args.ebno_start, args.ebno_end, args.ebno_step),
            args.trials,
            seed=args.seed,
            design_ebno_db=args.design_ebno,
            out=out,
        )
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _cmd_inspect(args) -> int:
    for path in args.input:
        m = read_pgm(path)
        hist = label_histogram(m)
        verdict = validate(m)
        stream = codec.compress(m)
        edges = edge_map(m)
        print(f"{path}: {m.width}x{m.height}, {len(hist)} labels")
        print(f"  labels: {' '.join(f'{k}:{v}' for k, v in sorted(hist.items()))}")
        status = "accepted" if verdict.accepted else (
            f"rejected (labels {sorted(verdict.offending_labels)}, "
            f"{verdict.offending_pixel_count} pixels)"
        )
        print(f"  validity: {status}")
        print(f"  edge pixels: {int(edges.sum())} ({format_value(edges.mean())})")
        print(
            f"  rle: {stream.nbytes()} bytes, ratio "
            f"{format_value(compression_ratio(m.size, stream.nbytes()))}"
        )
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    handler = {"run": _cmd_run, "fer": _cmd_fer, "inspect": _cmd_inspect}[args.command]
    try:
        return handler(args)
    except (OSError, PgmError) as exc:
        print(f"semlink: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"semlink: invalid configuration: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
