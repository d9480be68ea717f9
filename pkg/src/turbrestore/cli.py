"""Command-line surface: simulate, restore, evaluate.

Exit codes: 0 success, 2 bad arguments, 3 malformed inputs, 4 solver abort.
Only requested results go to stdout; diagnostics go to stderr.  Every
file-producing run writes one key=value manifest holding the resolved
configuration and argv, and --from-manifest re-runs a recorded command.
"""

import os
import shlex
import sys
import time

import turbrestore
from turbrestore.flow import FlowParams
from turbrestore.image import (PgmParseError, load_pgm, load_sequence,
                               save_pgm, save_sequence)
from turbrestore.metrics import endpoint_error, psnr, rmse
from turbrestore.nltv import NlParams
from turbrestore.simulate import SimParams, generate_sequence, save_dataset
from turbrestore.solver import (SolverAbort, SolverConfig, restore,
                                frame_quality_check, sliding_window_restore)
from turbrestore.warp import load_flow, save_flow

import argparse

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_BAD_INPUT = 3
EXIT_SOLVER = 4


def _diag(message):
    print(f"turbrestore: {message}", file=sys.stderr)


def _threads_default():
    env = os.environ.get("TURBRESTORE_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _write_manifest(path, command, argv, fields, started, finished):
    lines = [
        f"command={command}",
        f"argv={shlex.join(argv)}",
        f"version={turbrestore.__version__}",
        f"started={started:.6f}",
        f"finished={finished:.6f}",
    ]
    lines += [f"{key}={value}" for key, value in fields]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _read_manifest_argv(path):
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("argv="):
                return shlex.split(line[len("argv="):].strip())
    raise ValueError(f"{path}: no argv entry found")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="turbrestore",
        description="Recover a static scene from geometrically distorted frames.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a distorted sequence")
    p.add_argument("--truth", required=True, help="ground-truth PGM image")
    p.add_argument("--output", required=True, help="output directory")
    p.add_argument("--frames", type=int, default=20)
    p.add_argument("--amplitude", type=float, default=2.0)
    p.add_argument("--wavelength", type=float, default=16.0)
    p.add_argument("--noise", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("wave", "random"), default="wave")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("restore", help="restore a scene from a sequence")
    p.add_argument("--input", required=True, help="directory of PGM frames")
    p.add_argument("--output", required=True,
                   help="restored PGM path (a directory with --window)")
    p.add_argument("--outer", type=int, default=5)
    p.add_argument("--inner", type=int, default=20)
    p.add_argument("--lambda", dest="lambda0", type=float, default=0.5)
    p.add_argument("--delta", type=float, default=None,
                   help="forward step (default: 0.9 / frame count)")
    p.add_argument("--window", type=int, default=None,
                   help="sliding-window mode with this window length")
    p.add_argument("--report", default=None, help="per-iteration CSV path")
    p.add_argument("--dump-flows", default=None, help="directory for final flows")
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_restore)

    p = sub.add_parser("evaluate", help="score a restoration")
    p.add_argument("--restored", required=True)
    p.add_argument("--truth", default=None)
    p.add_argument("--frames", default=None, help="input frame directory")
    p.add_argument("--flows-true", default=None, help="TFLW directory")
    p.add_argument("--flows-est", default=None, help="TFLW directory")
    p.add_argument("--output", default=None, help="CSV path (default stdout)")
    p.set_defaults(func=cmd_evaluate)

    return parser


def cmd_simulate(args, argv):
    started = time.time()
    mode = "smooth-random" if args.mode == "random" else "wave"
    try:
        params = SimParams(amplitude=args.amplitude, wavelength=args.wavelength,
                           phase_seed=args.seed, noise_sigma=args.noise,
                           frames=args.frames, mode=mode)
    except ValueError as exc:
        _diag(str(exc))
        return EXIT_USAGE
    try:
        truth = load_pgm(args.truth)
    except (OSError, PgmParseError) as exc:
        _diag(str(exc))
        return EXIT_BAD_INPUT
    frames, flows = generate_sequence(truth, params)
    save_dataset(args.output, frames, flows, params, truth=truth)
    fields = [("truth", args.truth), ("frames", params.frames),
              ("amplitude", repr(params.amplitude)),
              ("wavelength", repr(params.wavelength)),
              ("noise_sigma", repr(params.noise_sigma)),
              ("seed", params.phase_seed), ("mode", params.mode)]
    _write_manifest(os.path.join(args.output, "run_manifest.txt"),
                    "simulate", argv, fields, started, time.time())
    return EXIT_OK


def _solver_config(args, n_frames):
    return SolverConfig(delta=args.delta, lambda0=args.lambda0,
                        outer_iters=args.outer, inner_iters=args.inner,
                        flow=FlowParams(), nl=NlParams())


def cmd_restore(args, argv):
    started = time.time()
    threads = args.threads if args.threads is not None else _threads_default()
    try:
        frames = load_sequence(args.input)
    except (OSError, PgmParseError, ValueError) as exc:
        _diag(str(exc))
        return EXIT_BAD_INPUT
    try:
        cfg = _solver_config(args, len(frames))
        cfg.validate()
        if args.window is not None and args.window < 2:
            raise ValueError(f"window must be >= 2, got {args.window}")
    except ValueError as exc:
        _diag(str(exc))
        return EXIT_USAGE

    try:
        if args.window is None:
            u, flows, report = restore(frames, cfg, threads=threads)
            save_pgm(u, args.output, depth=16)
            manifest_path = args.output + ".manifest.txt"
        else:
            reports = []
            outputs = sliding_window_restore(frames, args.window, cfg,
                                             threads=threads, reports=reports)
            save_sequence(outputs, args.output, depth=16, prefix="restored")
            report = reports[-1]
            flows = None
            manifest_path = os.path.join(args.output, "run_manifest.txt")
    except ValueError as exc:
        _diag(str(exc))
        return EXIT_BAD_INPUT
    except SolverAbort as exc:
        _diag(str(exc))
        return EXIT_SOLVER

    if args.report:
        report.to_csv(args.report)
    if args.dump_flows and flows is not None:
        os.makedirs(args.dump_flows, exist_ok=True)
        for i, flow in enumerate(flows):
            save_flow(flow, os.path.join(args.dump_flows, f"flow_{i:04d}.tflw"))

    fields = [("input", args.input), ("output", args.output),
              ("outer_iters", cfg.outer_iters), ("inner_iters", cfg.inner_iters),
              ("lambda0", repr(cfg.lambda0)),
              ("delta", "auto" if cfg.delta is None else repr(cfg.delta)),
              ("window", args.window if args.window is not None else ""),
              ("threads", threads)]
    _write_manifest(manifest_path, "restore", argv, fields, started, time.time())
    return EXIT_OK


def _load_flow_dir(directory):
    names = sorted(n for n in os.listdir(directory) if n.endswith(".tflw"))
    return [load_flow(os.path.join(directory, n)) for n in names]


def cmd_evaluate(args, argv):
    started = time.time()
    rows = []
    try:
        restored = load_pgm(args.restored)
        if args.truth:
            truth = load_pgm(args.truth)
            r = rmse(restored, truth)
            rows.append(("rmse", "", repr(r)))
            p = psnr(r)
            rows.append(("psnr", "", "inf" if p == float("inf") else repr(p)))
        if args.frames:
            frames = load_sequence(args.frames)
            for i, d in enumerate(frame_quality_check(frames, restored)):
                rows.append(("frame_l2", str(i), repr(d)))
        if bool(args.flows_true) != bool(args.flows_est):
            _diag("flow endpoint error needs both --flows-true and --flows-est")
            return EXIT_USAGE
        if args.flows_true and args.flows_est:
            ft = _load_flow_dir(args.flows_true)
            fe = _load_flow_dir(args.flows_est)
            if len(ft) != len(fe):
                raise ValueError(
                    f"{len(ft)} true flows vs {len(fe)} estimated flows")
            epes = [endpoint_error(e, t) for e, t in zip(fe, ft)]
            for i, e in enumerate(epes):
                rows.append(("epe_mean", str(i), repr(e)))
            rows.append(("epe_mean_all", "", repr(float(sum(epes) / len(epes)))))
    except (OSError, PgmParseError, ValueError) as exc:
        _diag(str(exc))
        return EXIT_BAD_INPUT

    csv = "metric,index,value\n" + "".join(
        f"{m},{i},{v}\n" for m, i, v in rows)
    if args.output:
        with open(args.output, "w", encoding="ascii") as fh:
            fh.write(csv)
        _write_manifest(args.output + ".manifest.txt", "evaluate", argv,
                        [("restored", args.restored)], started, time.time())
    else:
        sys.stdout.write(csv)
    return EXIT_OK


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    if "--from-manifest" in argv:
        i = argv.index("--from-manifest")
        if i + 1 >= len(argv):
            _diag("--from-manifest needs a path")
            return EXIT_USAGE
        try:
            argv = _read_manifest_argv(argv[i + 1])
        except (OSError, ValueError) as exc:
            _diag(str(exc))
            return EXIT_BAD_INPUT
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    return args.func(args, argv)


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
