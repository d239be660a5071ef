"""Command-line front end.

Exit codes: 0 ok, 1 verification failure, 2 usage, 3 input parse,
4 precondition (e.g. no bar to optimize), 5 internal consistency.
Every command writes a run manifest next to its artifacts.
"""

import argparse
import os
import sys
from pathlib import Path

from . import io_utils, synthetic
from .complexes import build_vr
from .errors import InputError, InternalConsistencyError, PreconditionError
from .persistence import compute_persistence
from .io_utils import Manifest, fmt

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_PRECONDITION = 4
EXIT_INTERNAL = 5


def _default_seed():
    return int(os.environ.get("COCHAINOPT_SEED", "0"))


def _load_config_defaults(parser, subparsers, argv):
    """Config file keys (flat key=value) become parser defaults; CLI wins."""
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config")
    known, _ = probe.parse_known_args(argv)
    if not known.config:
        return
    raw = {}
    with open(known.config) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise InputError(f"{known.config}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            raw[key.strip().replace("-", "_")] = value.strip()
    # subparser defaults shadow parent ones, so push converted values into each
    for p in [parser] + list(subparsers.choices.values()):
        converted = {}
        for action in p._actions:
            if action.dest in raw:
                value = raw[action.dest]
                converted[action.dest] = action.type(value) if action.type else value
        if converted:
            p.set_defaults(**converted)


def _outdir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_barcode(args):
    out = _outdir(args)
    manifest = Manifest("barcode", vars(args), args.seed)
    points = io_utils.read_points_csv(args.input)
    manifest.add_input(args.input)
    fc = build_vr(
        points,
        metric=args.metric,
        max_dim=args.max_dim,
        max_radius=args.max_radius,
    )
    barcode = compute_persistence(fc, args.max_degree)
    csv_path = out / "barcode.csv"
    io_utils.write_barcode_csv(barcode, csv_path, degree=args.degree)
    manifest.add_output(csv_path)
    if args.format in ("json", "both"):
        json_path = out / "barcode.json"
        io_utils.write_json(barcode.to_json_obj(), json_path)
        manifest.add_output(json_path)
    if args.dump_complex:
        cpath = out / "complex.json"
        io_utils.write_json(fc.to_json_obj(), cpath)
        manifest.add_output(cpath)
    manifest.write(out / "manifest.json")
    print(f"wrote {csv_path} ({len(barcode)} bars)")
    return EXIT_OK


def _write_run_artifacts(run, out, manifest, stem="trace"):
    from .checks import write_stability_csv, write_stability_svg
    from .svg import line_plot

    trace = out / f"{stem}.csv"
    io_utils.write_trace_csv(run, trace)
    manifest.add_output(trace)
    summary = out / f"{stem}_summary.json"
    io_utils.write_json(
        {
            "status": run.status,
            "iterations": run.iterations_completed,
            "events": [list(e) for e in run.events],
            "final_loss": run.records[-1].loss if run.records else None,
            "final_normalized_persistence": (
                run.records[-1].normalized_persistence if run.records else None
            ),
        },
        summary,
    )
    manifest.add_output(summary)
    xs = [r.iteration for r in run.records]
    if xs:
        loss_svg = out / f"{stem}_loss.svg"
        line_plot(
            [
                ("loss", xs, [r.loss for r in run.records]),
                ("normalized persistence", xs,
                 [r.normalized_persistence for r in run.records]),
            ],
            loss_svg,
            title="optimization trace",
            xlabel="iteration",
        )
        manifest.add_output(loss_svg)
    if any(r.thresholds for r in run.records):
        diag_csv = out / f"{stem}_diagnostics.csv"
        write_stability_csv(run, diag_csv)
        manifest.add_output(diag_csv)
        diag_svg = out / f"{stem}_diagnostics.svg"
        write_stability_svg(run, diag_svg)
        manifest.add_output(diag_svg)


def cmd_vr_optimize(args):
    from .optimize import OptConfig, run_point_cloud

    out = _outdir(args)
    manifest = Manifest("vr-optimize", vars(args), args.seed)
    points = io_utils.read_points_csv(args.input)
    manifest.add_input(args.input)
    cfg = OptConfig(
        learning_rate=args.gamma,
        iterations=args.iters,
        method=args.method,
        epsilon0=args.epsilon0,
        epsilon_set=tuple(float(x) for x in args.multi.split(",")) if args.multi else
        (0.01, 0.05, 0.1),
        seed=args.seed,
    )
    run = run_point_cloud(points, cfg)
    if run.status == "no_bar" and not run.records:
        print("no finite bar in the target degree; nothing to optimize", file=sys.stderr)
        manifest.write(out / "manifest.json")
        return EXIT_PRECONDITION
    final = out / "points_final.csv"
    io_utils.write_points_csv(run.final_variables, final)
    manifest.add_output(final)
    _write_run_artifacts(run, out, manifest)
    manifest.write(out / "manifest.json")
    print(f"status={run.status} iterations={run.iterations_completed} wrote {final}")
    return EXIT_OK


def cmd_image_repair(args):
    from .optimize import OptConfig, run_image_repair

    out = _outdir(args)
    manifest = Manifest("image-repair", vars(args), args.seed)
    image = io_utils.read_image(args.input, invert=args.invert)
    manifest.add_input(args.input)
    if args.corrupt:
        band, noise = args.corrupt.split(",")
        image = synthetic.corrupt_image(
            image, band_rows=int(band), noise_amplitude=float(noise), seed=args.seed
        )
        corrupted = out / "corrupted.pgm"
        io_utils.write_image_pgm(image, corrupted)
        manifest.add_output(corrupted)
    cfg = OptConfig(
        learning_rate=args.gamma,
        iterations=args.iters,
        method=args.method,
        epsilon_absolute=args.epsilon,
        degree=0,
        penalty=False,
        seed=args.seed,
    )
    run = run_image_repair(image, cfg)
    repaired_pgm = out / "repaired.pgm"
    io_utils.write_image_pgm(run.final_variables, repaired_pgm)
    manifest.add_output(repaired_pgm)
    repaired_csv = out / "repaired.csv"
    io_utils.write_image_csv(run.final_variables, repaired_csv)
    manifest.add_output(repaired_csv)
    _write_run_artifacts(run, out, manifest)
    manifest.write(out / "manifest.json")
    print(f"status={run.status} iterations={run.iterations_completed} wrote {repaired_pgm}")
    return EXIT_OK


def cmd_feature_weights(args):
    from . import persistence
    from .optimize import OptConfig, one_step_weights, mask_from_gradient, run_feature_weights

    out = _outdir(args)
    manifest = Manifest("feature-weights", vars(args), args.seed)
    if args.synthetic:
        series = synthetic.periodic_feature_series(seed=args.seed)
    else:
        if not args.input:
            raise InputError("pass an input series CSV or --synthetic")
        series = io_utils.read_series_csv(args.input)
        manifest.add_input(args.input)

    eps_set = tuple(float(x) for x in args.multi.split(",")) if args.multi else (0.01, 0.05, 0.1)
    if args.method == "one-step":
        before = persistence.REDUCTION_CALLS
        weights, grad = one_step_weights(series, epsilon_set=eps_set, window=args.window)
        used = persistence.REDUCTION_CALLS - before
        if used != 1:
            raise InternalConsistencyError(
                f"one-step method ran {used} persistence computations"
            )
        mask = mask_from_gradient(grad)
        wpath = out / "weights.csv"
        with open(wpath, "w") as fh:
            fh.write("feature,weight,gradient,mask\n")
            for i, (w, g, m) in enumerate(zip(weights, grad, mask)):
                fh.write(f"{i},{fmt(w)},{fmt(g)},{m}\n")
        manifest.add_output(wpath)
        manifest.write(out / "manifest.json")
        print(f"one-step weights written to {wpath} (persistence computations: {used})")
        return EXIT_OK

    cfg = OptConfig(
        learning_rate=args.gamma,
        iterations=args.iters,
        method="simplices" if args.method == "simplices" else "multi-cochains",
        epsilon_set=eps_set,
        seed=args.seed,
        window=args.window,
    )
    run = run_feature_weights(series, cfg)
    if run.status == "no_bar" and not run.records:
        print("no finite degree-1 bar at uniform weights", file=sys.stderr)
        manifest.write(out / "manifest.json")
        return EXIT_PRECONDITION
    wpath = out / "weights.csv"
    with open(wpath, "w") as fh:
        fh.write("feature,weight\n")
        for i, w in enumerate(run.final_variables):
            fh.write(f"{i},{fmt(w)}\n")
    manifest.add_output(wpath)
    _write_run_artifacts(run, out, manifest)
    manifest.write(out / "manifest.json")
    print(f"status={run.status} wrote {wpath}")
    return EXIT_OK


def cmd_verify(args):
    from .verify import SUITES, run_suites

    out = _outdir(args)
    manifest = Manifest("verify", vars(args), args.seed)
    names = list(SUITES) if args.suite == "all" else [args.suite]
    results = run_suites(names, seed=args.seed, inject=args.inject_failure)
    width = max(len(r.name) for r in results)
    failed = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        if not r.passed:
            failed += 1
        print(f"[{status}] {r.suite:9s} {r.name:{width}s} value={r.value:.3e} bound={r.bound:.1e}")
    print(f"{len(results) - failed}/{len(results)} checks passed")
    report = out / "verify_report.json"
    io_utils.write_json(
        [
            {"suite": r.suite, "name": r.name, "value": float(r.value),
             "bound": float(r.bound), "passed": bool(r.passed)}
            for r in results
        ],
        report,
    )
    manifest.add_output(report)
    manifest.write(out / "manifest.json")
    return EXIT_OK if failed == 0 else EXIT_VERIFY_FAILED


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cochainopt",
        description="Topological optimization with birth/death cochains",
    )
    parser.add_argument("--config", help="flat key=value config file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("barcode", help="persistence barcode of a point cloud")
    p.add_argument("input")
    p.add_argument("--metric", default="euclidean", choices=["euclidean", "l1"])
    p.add_argument("--max-dim", type=int, default=2)
    p.add_argument("--max-degree", type=int, default=1)
    p.add_argument("--max-radius", type=float, default=None)
    p.add_argument("--degree", type=int, default=None, help="filter CSV rows to one degree")
    p.add_argument("--format", default="both", choices=["csv", "json", "both"])
    p.add_argument("--dump-complex", action="store_true")
    p.set_defaults(func=cmd_barcode)

    p = sub.add_parser("vr-optimize", help="gradient ascent on a point cloud")
    p.add_argument("input")
    p.add_argument("--method", default="multi-cochains",
                   choices=["simplices", "cochains", "multi-cochains"])
    p.add_argument("--epsilon0", type=float, default=0.05)
    p.add_argument("--multi", default=None, help="comma list of relative epsilons")
    p.add_argument("--gamma", type=float, default=0.02)
    p.add_argument("--iters", type=int, default=1000)
    p.set_defaults(func=cmd_vr_optimize)

    p = sub.add_parser("image-repair", help="gradient descent on pixel values")
    p.add_argument("input")
    p.add_argument("--method", default="cochains", choices=["simplices", "cochains"])
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--corrupt", default=None, metavar="BAND,NOISE",
                   help="overwrite a horizontal band and add noise before repairing")
    p.add_argument("--invert", action="store_true", help="map values v -> 1-v on load")
    p.set_defaults(func=cmd_image_repair)

    p = sub.add_parser("feature-weights", help="weight features of a series")
    p.add_argument("input", nargs="?")
    p.add_argument("--synthetic", action="store_true",
                   help="regenerate the phase-shifted sinusoid dataset from the seed")
    p.add_argument("--method", default="one-step",
                   choices=["simplices", "cochains", "one-step"])
    p.add_argument("--multi", default=None)
    p.add_argument("--gamma", type=float, default=2**-6 / 10)
    p.add_argument("--iters", type=int, default=100)
    p.add_argument("--window", type=int, default=250)
    p.set_defaults(func=cmd_feature_weights)

    p = sub.add_parser("verify", help="run a named verification suite")
    p.add_argument("--suite", default="all",
                   choices=["all", "solvers", "content", "symmetry", "critical", "oracle"])
    p.add_argument("--inject-failure", action="store_true",
                   help="corrupt one quantity to prove failures are detectable")
    p.set_defaults(func=cmd_verify)

    for sp in sub.choices.values():
        sp.add_argument("--seed", type=int, default=_default_seed())
        sp.add_argument("--out", default=".", help="artifact output directory")
        sp.add_argument("--config", help="flat key=value config file")
    return parser, sub


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    parser, subparsers = build_parser()
    try:
        _load_config_defaults(parser, subparsers, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except InputError as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except PreconditionError as e:
        print(f"precondition error: {e}", file=sys.stderr)
        return EXIT_PRECONDITION
    except InternalConsistencyError as e:
        print(f"internal consistency error: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except FileNotFoundError as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
