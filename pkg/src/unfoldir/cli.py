"""Command-line front end.

Exit codes: 0 success, 1 usage/configuration error, 2 IO error,
3 numerical failure.  Errors print one line to stderr of the form
``error kind=<kind> reason="<text>"``.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time

from . import __version__
from .config import SolverConfig, dump_config, load_config
from .errors import ConfigError, ImageIOError, NumericalError, ShapeError
from .imageio import read_image, write_image, write_trace
from .metrics import MetricsReport, psnr, ssim
from .pipeline import run_pipeline
from .tuner import tune_params

IO_KEYS = ("input", "output", "trace_dir")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _config(args) -> tuple[SolverConfig, dict]:
    if getattr(args, "config", None):
        cfg, io = load_config(args.config, IO_KEYS)
    else:
        cfg, io = SolverConfig(), {}
    overrides = {}
    if getattr(args, "stages", None) is not None:
        overrides["stages"] = args.stages
    if getattr(args, "output_mode", None) is not None:
        overrides["output_mode"] = args.output_mode
    if overrides:
        cfg = cfg.replace(**overrides)
    return cfg, io


def _pick(args, io: dict, key: str, required: bool = True):
    value = getattr(args, key, None) or io.get(key)
    if required and not value:
        raise UsageError(f"missing --{key.replace('_', '-')}")
    return value


def cmd_enhance(args) -> int:
    cfg, io = _config(args)
    src, dst = _pick(args, io, "input"), _pick(args, io, "output")
    trace_dir = _pick(args, io, "trace_dir", required=False)
    result = run_pipeline(read_image(src), cfg)
    write_image(result.output, dst)
    if trace_dir:
        write_trace(result.traces, trace_dir)
    return EXIT_OK


def cmd_decompose(args) -> int:
    cfg, _ = _config(args)
    result = run_pipeline(read_image(args.input), cfg)
    last = result.traces[-1]
    write_image(last.r.clip(0.0, 1.0), args.out_reflectance)
    write_image(last.l[None], args.out_illumination)
    return EXIT_OK


def cmd_eval(args) -> int:
    t0 = time.perf_counter()
    a, b = read_image(args.restored), read_image(args.reference)
    report = MetricsReport(psnr=psnr(a, b), ssim=ssim(a, b))
    report.runtime_ms = 1000.0 * (time.perf_counter() - t0)
    print(report.format())
    return EXIT_OK


def cmd_trace(args) -> int:
    cfg, io = _config(args)
    result = run_pipeline(read_image(_pick(args, io, "input")), cfg)
    write_trace(result.traces, _pick(args, io, "trace_dir"))
    return EXIT_OK


def cmd_tune(args) -> int:
    cfg0, _ = load_config(args.config_in, IO_KEYS)
    images = [read_image(p) for p in args.inputs]
    tuned = tune_params(images, cfg0, args.budget)
    dump_config(tuned, args.config_out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="unfoldir", description="Unfolded Retinex restoration of illumination-degraded images.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("enhance", help="restore one image")
    e.add_argument("--input")
    e.add_argument("--output")
    e.add_argument("--config")
    e.add_argument("--stages", type=int)
    e.add_argument("--output-mode", choices=("reflectance", "relit"))
    e.add_argument("--trace-dir")
    e.set_defaults(func=cmd_enhance)

    d = sub.add_parser("decompose", help="write final reflectance and illumination")
    d.add_argument("--input", required=True)
    d.add_argument("--out-reflectance", required=True)
    d.add_argument("--out-illumination", required=True)
    d.add_argument("--config")
    d.set_defaults(func=cmd_decompose)

    v = sub.add_parser("eval", help="PSNR/SSIM of a restored image against a reference")
    v.add_argument("--restored", required=True)
    v.add_argument("--reference", required=True)
    v.set_defaults(func=cmd_eval)

    t = sub.add_parser("trace", help="dump every stage of a run")
    t.add_argument("--input")
    t.add_argument("--trace-dir")
    t.add_argument("--config")
    t.set_defaults(func=cmd_trace)

    u = sub.add_parser("tune", help="training-free parameter tuning")
    u.add_argument("--inputs", nargs="+", required=True)
    u.add_argument("--config-in", required=True)
    u.add_argument("--config-out", required=True)
    u.add_argument("--budget", type=int, required=True)
    u.set_defaults(func=cmd_tune)
    return p


def _fail(kind: str, reason, code: int) -> int:
    text = " ".join(str(reason).split()).replace('"', "'")
    print(f'error kind={kind} reason="{text}"', file=sys.stderr)
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        if getattr(args, "budget", 1) < 1:
            raise UsageError("--budget must be >= 1")
        return args.func(args)
    except UsageError as exc:
        return _fail("usage", exc, EXIT_USAGE)
    except ConfigError as exc:
        return _fail("config", exc, EXIT_USAGE)
    except ShapeError as exc:
        return _fail("usage", exc, EXIT_USAGE)
    except ImageIOError as exc:
        return _fail("io", exc, EXIT_IO)
    except OSError as exc:
        return _fail("io", exc, EXIT_IO)
    except NumericalError as exc:
        return _fail("numerical", exc, EXIT_NUMERIC)


if __name__ == "__main__":
    sys.exit(main())
