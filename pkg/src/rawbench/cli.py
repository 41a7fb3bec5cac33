"""Command-line entry point: ``rawbench {synth,process,bench,metrics,report}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import io as rio
from .bench import DEFAULT_GAMMAS, DEFAULT_WB_BIAS, FACTOR_VARIANTS, build_corpus, parse_variant, run_benchmark
from .core import CameraProfile, SensorFrame, validate_profile
from .enhancers import default_registry
from .metrics import psnr, ssim
from .pipeline import full_pipeline

log = logging.getLogger("rawbench")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _load_profile(path) -> CameraProfile:
    if path is None:
        return CameraProfile()
    return validate_profile(CameraProfile.from_dict(json.loads(Path(path).read_text())))


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rawbench", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", help="synthesize exposure pairs and ground truths")
    s.add_argument("--scenes", type=int, default=20)
    s.add_argument("--size", type=int, default=128)
    s.add_argument("--gammas", default=",".join(str(g) for g in DEFAULT_GAMMAS))
    s.add_argument("--profile")
    s.add_argument("--wb-bias", type=float, default=DEFAULT_WB_BIAS)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)

    s = sub.add_parser("process", help="run the full pipeline on an LRS1 sensor frame")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--profile")
    s.add_argument("--bits", type=int, choices=(8, 16), default=8)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)

    s = sub.add_parser("bench", help="run the variant x enhancer matrix over a dataset")
    s.add_argument("--data", required=True)
    s.add_argument("--variants", default=",".join(v.label() for v in FACTOR_VARIANTS))
    s.add_argument("--enhancers", default="identity,gaussian")
    s.add_argument("--out", required=True)
    s.add_argument("--format", choices=("csv", "md", "plot"), default="csv")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("metrics", help="PSNR/SSIM between two images")
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)

    s = sub.add_parser("report", help="re-render a CSV report")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--format", choices=("csv", "md", "plot"), default="md")
    s.add_argument("--out")
    return p


def _cmd_synth(args) -> int:
    gammas = [float(g) for g in _csv_list(args.gammas)]
    if not gammas or any(g < 1 for g in gammas):
        raise UsageError("--gammas needs ratios >= 1")
    if args.scenes < 1 or args.size < 2 or args.size % 2:
        raise UsageError("--scenes must be positive and --size even")
    pairs = build_corpus(args.scenes, args.size, gammas, args.seed, _load_profile(args.profile),
                         wb_bias=args.wb_bias)
    rio.save_dataset(pairs, args.out, seed=args.seed)
    log.info("wrote %d pairs to %s", len(pairs), args.out)
    return EXIT_OK


def _cmd_process(args) -> int:
    samples, header = rio.read_container(args.inp)
    if samples.ndim != 2:
        raise ValueError("process expects a single-channel sensor frame")
    profile = _load_profile(args.profile) if args.profile else CameraProfile.from_dict(header["profile"] or {})
    q = full_pipeline(SensorFrame(samples, header["bit_depth"]), validate_profile(profile), bits=args.bits)
    fmt = "PPM-16" if Path(args.out).suffix.lower() == ".ppm" else f"PNG-{args.bits}"
    if fmt == "PPM-16" and args.bits != 16:
        raise UsageError("PPM output requires --bits 16")
    rio.write_image(args.out, q.codes, fmt)
    return EXIT_OK


def _cmd_bench(args) -> int:
    try:
        variants = [parse_variant(v) for v in _csv_list(args.variants)]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    registry = default_registry()
    names = _csv_list(args.enhancers)
    unknown = [n for n in names if n not in registry]
    if unknown or not names or not variants:
        raise UsageError(f"unknown enhancers {unknown}; choose from {sorted(registry)}")
    pairs = rio.load_dataset(args.data)
    if not pairs:
        raise ValueError("dataset is empty")
    rows = run_benchmark(pairs, variants, [(n, registry[n]) for n in names], workers=args.workers)
    text = rio.emit_report(rio.ReportDocument(rows), args.format)
    Path(args.out).write_text(text)
    failed = sum(not r.ok for r in rows)
    log.info("%d rows (%d failed) -> %s", len(rows), failed, args.out)
    return EXIT_OK


def _cmd_metrics(args) -> int:
    a_codes, a_bits = rio.read_image(args.a)
    b_codes, b_bits = rio.read_image(args.b)
    a = a_codes / (2**a_bits - 1)
    b = b_codes / (2**b_bits - 1)
    print(f"psnr_db={psnr(a, b):.4f} ssim={ssim(a, b):.4f}")
    return EXIT_OK


def _cmd_report(args) -> int:
    rows = rio.read_report_csv(Path(args.inp).read_text())
    text = rio.emit_report(rio.ReportDocument(rows), args.format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


_COMMANDS = {"synth": _cmd_synth, "process": _cmd_process, "bench": _cmd_bench,
             "metrics": _cmd_metrics, "report": _cmd_report}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(message)s")
        return _COMMANDS[args.cmd](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError, KeyError) as exc:
        print(f"rawbench: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
