"""Command-line surface: metric reports, barcode-curve plots, experiments.

Exit codes: 0 ok, 64 usage/parameter, 65 data/format/config, 66 shape,
69 capacity, 70 numerical, 74 io. Every error path prints one line to
stderr of the form ``error:<category>: <message>``.
"""

import argparse
import sys
from pathlib import Path

from .barcode import OutlierPolicy
from .distances import DEFAULT_EXACT_LIMIT, barcode_curve, cross_distances
from .embeddings import load_embeddings, save_embeddings
from .errors import BarcodeError
from .experiments import load_spec, run_experiment
from .report import compute_report, file_digest, report_to_csv, report_to_json

USAGE_EXIT = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error:usage: {message}", file=sys.stderr)
        sys.exit(USAGE_EXIT)


def _build_parser() -> _Parser:
    parser = _Parser(prog="barcode-metrics",
                     description="Barcode fidelity/diversity metrics between two "
                                 "embedding sets, with PRDC and Frechet baselines.")
    sub = parser.add_subparsers(dest="command", required=True)

    compute = sub.add_parser("compute", help="compute metrics for a pair of embedding files")
    compute.add_argument("real", help="reference embedding file (.npy or .csv)")
    compute.add_argument("fake", help="candidate embedding file (.npy or .csv)")
    compute.add_argument("--metrics", default="barcode",
                         help="comma list from barcode,prdc,fid (default barcode)")
    compute.add_argument("--k", type=int, default=5, help="kNN order for prdc (default 5)")
    group = compute.add_mutually_exclusive_group()
    group.add_argument("--dims", type=int, help="project jointly onto this many dimensions")
    group.add_argument("--min-explainability", type=float,
                       help="project onto the smallest dimension reaching this "
                            "retained-energy fraction")
    compute.add_argument("--center", action="store_true",
                         help="subtract column means before the projection SVD")
    compute.add_argument("--outlier-prob", type=float, default=0.0,
                         help="fraction of distances to trim per side (default 0)")
    compute.add_argument("--outlier-pos", choices=("in", "out", "both"), default="out")
    compute.add_argument("--fidelity-convention", choices=("survival", "cdf"),
                         default="survival")
    compute.add_argument("--exact-limit", type=int, default=DEFAULT_EXACT_LIMIT,
                         help="max pair count stored exactly (default 2^27)")
    compute.add_argument("--include-self-pairs", action="store_true",
                         help="keep the structural i==i zeros in self multisets")
    compute.add_argument("--format", choices=("json", "csv"), default="json")
    compute.add_argument("--seed", type=int, default=0,
                         help="echoed in the report for provenance")
    compute.add_argument("--out", help="write the report here instead of stdout")

    plot = sub.add_parser("barcode-plot", help="emit the pair-distance threshold curve")
    plot.add_argument("real")
    plot.add_argument("fake")
    plot.add_argument("--resolution", type=int, default=101)
    plot.add_argument("--curve", choices=("below", "alive", "both"), default="both")
    plot.add_argument("--svg", help="write an SVG rendering here")
    plot.add_argument("--csv", help="write the sampled curve as csv here")
    plot.add_argument("--exact-limit", type=int, default=DEFAULT_EXACT_LIMIT)

    experiment = sub.add_parser("experiment", help="run a declarative experiment spec")
    experiment.add_argument("spec", help="JSON experiment spec file")
    experiment.add_argument("--out", default=".", help="output directory (default .)")
    experiment.add_argument("--threads", type=int, default=1,
                            help="parallel sweep-point workers (default 1)")

    proj = sub.add_parser("project", help="fit a joint projection and write projected sets")
    proj.add_argument("real")
    proj.add_argument("fake")
    pgroup = proj.add_mutually_exclusive_group(required=True)
    pgroup.add_argument("--dims", type=int)
    pgroup.add_argument("--min-explainability", type=float)
    proj.add_argument("--center", action="store_true")
    proj.add_argument("--out-real", required=True, help="projected reference output (.npy/.csv)")
    proj.add_argument("--out-fake", required=True, help="projected candidate output (.npy/.csv)")
    proj.add_argument("--model", help="persist the model as <prefix>.basis.npy + "
                                      "<prefix>.singular_values.npy")
    return parser


def _cmd_compute(args) -> int:
    real = load_embeddings(args.real, label="real")
    fake = load_embeddings(args.fake, label="fake")
    metrics = tuple(m.strip() for m in args.metrics.split(",") if m.strip())
    policy = None
    if args.outlier_prob > 0.0:
        policy = OutlierPolicy(prob=args.outlier_prob, position=args.outlier_pos)
    report = compute_report(
        real, fake, metrics=metrics, k=args.k, dims=args.dims,
        min_explainability=args.min_explainability, center=args.center,
        policy=policy, convention=args.fidelity_convention,
        exact_limit=args.exact_limit, include_self_pairs=args.include_self_pairs,
        seed=args.seed, digests=(file_digest(args.real), file_digest(args.fake)))
    text = report_to_json(report) if args.format == "json" else report_to_csv(report)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


_SVG_COLORS = {"below": "#1f6fb4", "alive": "#c23b22"}


def _curve_svg(curve, which) -> str:
    width, height, margin = 420, 420, 50
    span = width - 2 * margin

    def x(t):
        return margin + t * span

    def y(v):
        return height - margin - v * span

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="{margin}" y="{margin}" width="{span}" height="{span}" '
        f'fill="none" stroke="#333"/>',
    ]
    for tick in (0.0, 0.25, 0.5, 0.75, 1.0):
        parts.append(f'<text x="{x(tick):.1f}" y="{height - margin + 18}" '
                     f'font-size="11" text-anchor="middle">{tick:g}</text>')
        parts.append(f'<text x="{margin - 8}" y="{y(tick) + 4:.1f}" '
                     f'font-size="11" text-anchor="end">{tick:g}</text>')
    parts.append(f'<text x="{width / 2}" y="{height - 12}" font-size="13" '
                 f'text-anchor="middle">normalized distance threshold</text>')
    parts.append(f'<text x="14" y="{height / 2}" font-size="13" text-anchor="middle" '
                 f'transform="rotate(-90 14 {height / 2})">fraction of pairs</text>')
    series = {"below": curve.below_fraction, "alive": curve.alive_fraction}
    chosen = ("below", "alive") if which == "both" else (which,)
    for name in chosen:
        points = " ".join(f"{x(t):.2f},{y(v):.2f}"
                          for t, v in zip(curve.thresholds, series[name]))
        parts.append(f'<polyline fill="none" stroke="{_SVG_COLORS[name]}" '
                     f'stroke-width="1.5" points="{points}"/>')
        label_y = margin + 16 + 16 * (name == "alive")
        parts.append(f'<text x="{width - margin - 6}" y="{label_y}" font-size="12" '
                     f'text-anchor="end" fill="{_SVG_COLORS[name]}">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _cmd_barcode_plot(args) -> int:
    real = load_embeddings(args.real, label="real")
    fake = load_embeddings(args.fake, label="fake")
    summary = cross_distances(real, fake, mode="exact", exact_limit=args.exact_limit)
    curve = barcode_curve(summary, resolution=args.resolution)
    csv_lines = ["lambda_norm,below_fraction,alive_fraction"]
    for t, b, a in zip(curve.thresholds, curve.below_fraction, curve.alive_fraction):
        csv_lines.append(f"{float(t)!r},{float(b)!r},{float(a)!r}")
    csv_text = "\n".join(csv_lines) + "\n"
    if args.csv:
        Path(args.csv).write_text(csv_text, encoding="utf-8")
    if args.svg:
        Path(args.svg).write_text(_curve_svg(curve, args.curve), encoding="utf-8")
    if not args.csv and not args.svg:
        sys.stdout.write(csv_text)
    return 0


def _cmd_experiment(args) -> int:
    from threadpoolctl import threadpool_limits  # bundled with scikit-learn
    spec = load_spec(args.spec)
    with threadpool_limits(limits=max(1, args.threads)):
        result = run_experiment(spec, threads=args.threads)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.spec).stem
    csv_path = out / f"{stem}.rows.csv"
    json_path = out / f"{stem}.summary.json"
    result.write_csv(csv_path)
    result.write_json(json_path)
    print(f"wrote {csv_path} and {json_path} (seed {spec.seed}, "
          f"{spec.repetitions} repetition(s))")
    return 0


def _cmd_project(args) -> int:
    from .reduction import fit_projection, project  # defers the sklearn import
    real = load_embeddings(args.real, label="real")
    fake = load_embeddings(args.fake, label="fake")
    model = fit_projection(real, fake, n_components=args.dims,
                           min_explainability=args.min_explainability,
                           center=args.center)
    save_embeddings(project(model, real), args.out_real)
    save_embeddings(project(model, fake), args.out_fake)
    if args.model:
        model.save(args.model)
    print(f'{{"dims": {model.components_.shape[0]}, '
          f'"explainability": {model.explainability_!r}}}')
    return 0


_COMMANDS = {
    "compute": _cmd_compute,
    "barcode-plot": _cmd_barcode_plot,
    "experiment": _cmd_experiment,
    "project": _cmd_project,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except BarcodeError as exc:
        print(f"error:{exc.category}: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"error:io: {exc}", file=sys.stderr)
        return 74


if __name__ == "__main__":
    sys.exit(main())
