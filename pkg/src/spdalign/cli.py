"""Command-line interface: ``spdalign {adapt,protocol,sweep,synth,report}``.

Exit codes: 0 success, 2 contract/usage error, 3 data error, 4 numerical error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import plotting, protocol
from .dataio import SyntheticShiftSpec, generate_synthetic_shift, save_features_csv
from .errors import SpdAlignError
from .gca import Algorithm, HyperParams

log = logging.getLogger("spdalign")


def _floats(text):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _add_data_flags(p):
    p.add_argument("--source", required=True, help="source domain name or CSV path")
    p.add_argument("--target", required=True, help="target domain name or CSV path")
    p.add_argument("--data-root", default=None, help="directory holding <domain>.csv")


def _add_param_flags(p, multi):
    kind = _floats if multi else float
    p.add_argument("--t", type=kind, default=[0.5] if multi else 0.5)
    p.add_argument("--gamma", type=kind, default=[0.5] if multi else 0.5)
    p.add_argument("--mu", type=kind, default=[1.0] if multi else 1.0)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--bandwidth", type=float, default=None)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--subspace-dim", type=int, default=None)


def _add_run_flags(p, default_methods):
    p.add_argument("--method", action="append", default=None,
                   help=f"repeatable; default {' '.join(default_methods)}")
    p.add_argument("--trials", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples-per-class", type=int, default=None)
    p.add_argument("--classifier", default="nearest_class_mean",
                   choices=["nearest_class_mean", "linear_one_vs_rest"])
    p.add_argument("--format", choices=["csv", "json"], default="json")
    p.add_argument("--out", default=None, help="report file; figures go alongside")
    p.set_defaults(default_methods=default_methods)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="spdalign",
        description="Domain adaptation with weighted geometric means of SPD matrices.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("adapt", help="single run, prints accuracy")
    _add_data_flags(p)
    _add_param_flags(p, multi=False)
    _add_run_flags(p, ["GCA1"])
    p.set_defaults(trials=1)

    p = sub.add_parser("protocol", help="randomized-trial evaluation of a task")
    _add_data_flags(p)
    _add_param_flags(p, multi=False)
    _add_run_flags(p, ["NA", "CORAL", "GCA1", "GCA2", "GCA3",
                       "Cascaded-GCA2", "Cascaded-GCA3"])

    p = sub.add_parser("sweep", help="grid over t/gamma/mu")
    _add_data_flags(p)
    _add_param_flags(p, multi=True)
    _add_run_flags(p, ["CORAL", "Cascaded-GCA3"])
    p.add_argument("--reference", default="CORAL")

    p = sub.add_parser("synth", help="write synthetic source/target CSVs")
    p.add_argument("--source", default="synth_source")
    p.add_argument("--target", default="synth_target")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--dim", type=int, default=10)
    p.add_argument("--classes", type=int, default=3)
    p.add_argument("--n-source", type=int, default=200)
    p.add_argument("--n-target", type=int, default=200)
    p.add_argument("--rotation", type=float, default=1.0, help="radians")
    p.add_argument("--shift", type=_floats, default=[],
                   help="scalar or comma list of length dim")
    p.add_argument("--noise", type=float, default=1.0)
    p.add_argument("--separation", type=float, default=3.0)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("report", help="re-aggregate saved per-trial JSON reports")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--reference", default="CORAL")
    p.add_argument("--format", choices=["csv", "json"], default="json")
    p.add_argument("--out", default=None)
    return parser


def _params(args, t=None, gamma=None, mu=None):
    return HyperParams(
        t=args.t if t is None else t,
        gamma=args.gamma if gamma is None else gamma,
        mu=args.mu if mu is None else mu,
        k=args.k, bandwidth=args.bandwidth, sigma=args.sigma, eps=args.eps,
        subspace_dim=args.subspace_dim,
    )


def _task(args):
    return protocol.TransferTask(
        args.source, args.target, args.trials, args.samples_per_class, args.seed
    )


def _write(reports, args, summary=None, reference="CORAL"):
    text = protocol.emit_report(reports, args.format, args.out)
    if args.out is None:
        sys.stdout.write(text)
        return
    out = Path(args.out)
    stem = out.with_suffix("")
    if summary is not None:
        stem.with_name(stem.name + "_summary.csv").write_text(
            protocol.summary_to_csv(summary))
    for path in plotting.render_report_figures(reports, stem, summary, reference):
        log.info("wrote %s", path)
    log.info("wrote %s", out)


def _methods(args):
    return args.method or args.default_methods


def cmd_adapt(args):
    reports = protocol.run_protocol(
        _task(args), _methods(args), [_params(args)],
        data_root=args.data_root, classifier=args.classifier,
    )
    for r in reports:
        print(f"{r.task.label}\t{r.method}\taccuracy={r.mean_accuracy:.2f}%")
    if args.out:
        protocol.emit_report(reports, args.format, args.out)
    return 0


def cmd_protocol(args):
    reports = protocol.run_protocol(
        _task(args), _methods(args), [_params(args)],
        data_root=args.data_root, classifier=args.classifier,
    )
    _write(reports, args)
    return 0


def cmd_sweep(args):
    methods = _methods(args)
    reference = Algorithm.parse(args.reference)
    if reference not in [Algorithm.parse(m) for m in methods]:
        methods = [reference.value] + list(methods)
    grid = protocol.param_grid(
        args.t, args.gamma, args.mu, k=args.k, bandwidth=args.bandwidth,
        sigma=args.sigma, eps=args.eps, subspace_dim=args.subspace_dim,
    )
    reports = protocol.run_protocol(
        _task(args), methods, grid, data_root=args.data_root,
        classifier=args.classifier,
    )
    summary = protocol.sweep_summary(reports, reference)
    _write(reports, args, summary, reference.value)
    if args.out is not None:
        sys.stdout.write(protocol.summary_to_csv(summary))
    return 0


def cmd_synth(args):
    spec = SyntheticShiftSpec(
        dim=args.dim, num_classes=args.classes, n_source=args.n_source,
        n_target=args.n_target,
        mean_shift=tuple(args.shift * args.dim if len(args.shift) == 1 else args.shift),
        covariance_rotation_angle=args.rotation, noise_scale=args.noise,
        seed=args.seed, class_separation=args.separation,
    )
    source, target = generate_synthetic_shift(spec)
    out = Path(args.out)
    save_features_csv(source, out / f"{args.source}.csv")
    save_features_csv(target, out / f"{args.target}.csv")
    print(out / f"{args.source}.csv")
    print(out / f"{args.target}.csv")
    return 0


def cmd_report(args):
    reports = []
    for path in args.inputs:
        reports.extend(protocol.load_reports(path))
    reports = protocol.reaggregate(reports)
    reference = Algorithm.parse(args.reference).value
    summary = None
    if any(r.method == reference for r in reports):
        summary = protocol.sweep_summary(reports, reference)
    _write(reports, args, summary, reference)
    return 0


COMMANDS = {
    "adapt": cmd_adapt,
    "protocol": cmd_protocol,
    "sweep": cmd_sweep,
    "synth": cmd_synth,
    "report": cmd_report,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except SpdAlignError as exc:
        print(f"spdalign: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
