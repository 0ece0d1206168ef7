"""Command-line surface for the co-localization pipeline.

Subcommands: localize, eval, noise-roc, filter, export-voc, heatmap, synth.
One batch process per invocation; --threads (or DDT_THREADS) caps the
per-image worker pool. Exit codes: 0 success, 1 pipeline failure with a
diagnostic naming the failing stage, 2 usage errors.
"""

from __future__ import annotations

import argparse
import sys
from contextlib import contextmanager
from dataclasses import dataclass

from . import cleaning, evaluate, heatmap, localize, synth
from .errors import DdtError, MissingLayer
from .formats import load_manifest, write_manifest


class StageFailure(Exception):
    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"{stage}: {cause}")


@contextmanager
def _stage(name):
    try:
        yield
    except (DdtError, OSError, ValueError) as e:
        raise StageFailure(name, e) from e


@dataclass
class RunConfig:
    """Validated settings of one localize invocation."""

    manifest_path: str
    method: localize.Method
    out_path: str
    threads: int | None

    def validate(self, manifest) -> None:
        # method-specific requirements are checked before any statistics run
        if self.method is localize.Method.DDT_PLUS:
            for rec in manifest.images:
                if "prev" not in rec.layers:
                    raise MissingLayer("prev", f"image {rec.id!r}")


_METHODS = {
    "ddt": localize.Method.DDT,
    "ddt-plus": localize.Method.DDT_PLUS,
    "scda": localize.Method.SCDA,
}


def _cmd_localize(args) -> int:
    config = RunConfig(
        manifest_path=args.manifest,
        method=_METHODS[args.method],
        out_path=args.out,
        threads=args.threads,
    )
    with _stage("loading manifest"):
        manifest = load_manifest(config.manifest_path)
        config.validate(manifest)
    with _stage("localization"):
        if config.method is localize.Method.DDT:
            results = localize.ddt_localize(manifest, threads=config.threads)
        elif config.method is localize.Method.DDT_PLUS:
            results = localize.ddt_plus_localize(manifest, threads=config.threads)
        else:
            results = localize.scda_localize(manifest, threads=config.threads)
    with _stage("writing results"):
        localize.write_results(config.method, results, config.out_path)
    return 0


def _cmd_eval(args) -> int:
    with _stage("loading manifest"):
        manifest = load_manifest(args.manifest)
    with _stage("loading results"):
        _, results = localize.load_results(args.results)
    with _stage("scoring"):
        report = evaluate.corloc(results, manifest)
    print(f"CorLoc: {report.corloc:.1f}")
    if args.out:
        with _stage("writing report"):
            evaluate.write_report(report, args.out)
    return 0


def _cmd_noise_roc(args) -> int:
    with _stage("loading manifest"):
        manifest = load_manifest(args.manifest)
    with _stage("loading results"):
        _, results = localize.load_results(args.results)
    with _stage("roc sweep"):
        curve = evaluate.noise_roc(results, manifest)
    print(f"AUC: {curve.auc:.4f}")
    with _stage("writing roc csv"):
        evaluate.write_roc_csv(curve, args.out)
    return 0


def _cmd_filter(args) -> int:
    with _stage("loading manifest"):
        manifest = load_manifest(args.manifest)
    with _stage("loading results"):
        _, results = localize.load_results(args.results)
    with _stage("filtering"):
        policy = cleaning.FilterPolicy(threshold=args.threshold)
        cleaned = cleaning.filter_dataset(results, manifest, policy)
    with _stage("writing manifest"):
        write_manifest(cleaned, args.out)
    print(f"kept {len(cleaned)} of {len(manifest)} images")
    return 0


def _cmd_export_voc(args) -> int:
    with _stage("loading manifest"):
        manifest = load_manifest(args.manifest)
    with _stage("loading results"):
        _, results = localize.load_results(args.results)
    with _stage("exporting annotations"):
        count = cleaning.export_voc(results, manifest, args.category, args.out_dir)
    print(f"wrote {count} annotation files")
    return 0


def _cmd_heatmap(args) -> int:
    with _stage("loading manifest"):
        manifest = load_manifest(args.manifest)
    with _stage("rendering heatmap"):
        heatmap.render_heatmap(
            manifest, args.image_id, args.component, args.out,
            layer=args.layer, threads=args.threads,
        )
    return 0


def _cmd_synth(args) -> int:
    with _stage("building spec"):
        if args.spec:
            spec = synth.load_spec(args.spec)
            if args.seed is not None:
                spec = synth.with_seed(spec, args.seed)
        else:
            spec = synth.random_spec(
                seed=args.seed if args.seed is not None else 0,
                n_images=args.images,
                h=args.cells_h,
                w=args.cells_w,
                d=args.channels,
                signal_strength=args.signal,
                noise_sigma=args.sigma,
                n_noisy=args.noisy,
                two_layer=args.two_layer,
            )
    with _stage("generating"):
        manifest = synth.generate(spec, args.out_dir)
    print(f"generated {len(manifest)} images in {args.out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ddtloc",
        description="Co-localize the common object across a set of images "
        "from their convolutional descriptor tensors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_threads(p):
        p.add_argument("--threads", type=int, default=None,
                       help="worker cap (default: DDT_THREADS or all cores)")

    p = sub.add_parser("localize", help="predict one box (or a noisy flag) per image")
    p.add_argument("--manifest", required=True)
    p.add_argument("--method", choices=sorted(_METHODS), default="ddt")
    p.add_argument("--out", required=True, help="results JSON path")
    add_threads(p)
    p.set_defaults(fn=_cmd_localize)

    p = sub.add_parser("eval", help="CorLoc of results against ground truth")
    p.add_argument("--manifest", required=True)
    p.add_argument("--results", required=True)
    p.add_argument("--out", default=None, help="report JSON path")
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("noise-roc", help="ROC of noise rates vs noisy labels")
    p.add_argument("--manifest", required=True)
    p.add_argument("--results", required=True)
    p.add_argument("--out", required=True, help="CSV path")
    p.set_defaults(fn=_cmd_noise_roc)

    p = sub.add_parser("filter", help="drop images at or below the noise-rate threshold")
    p.add_argument("--manifest", required=True)
    p.add_argument("--results", required=True)
    p.add_argument("--threshold", type=float, default=0.1)
    p.add_argument("--out", required=True, help="cleaned manifest path")
    p.set_defaults(fn=_cmd_filter)

    p = sub.add_parser("export-voc", help="write VOC-style annotation XML per image")
    p.add_argument("--manifest", required=True)
    p.add_argument("--results", required=True)
    p.add_argument("--category", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(fn=_cmd_export_voc)

    p = sub.add_parser("heatmap", help="grayscale PGM of one image's indicator map")
    p.add_argument("--manifest", required=True)
    p.add_argument("--image-id", required=True)
    p.add_argument("--component", type=int, default=1)
    p.add_argument("--layer", default="last")
    p.add_argument("--out", required=True, help="PGM path")
    add_threads(p)
    p.set_defaults(fn=_cmd_heatmap)

    p = sub.add_parser("synth", help="generate a synthetic planted-signal set")
    p.add_argument("--spec", default=None, help="synth spec JSON (overrides flags)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--images", type=int, default=20)
    p.add_argument("--cells-h", type=int, default=16)
    p.add_argument("--cells-w", type=int, default=16)
    p.add_argument("--channels", type=int, default=64)
    p.add_argument("--signal", type=float, default=8.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--noisy", type=int, default=2, help="number of no-signal images")
    p.add_argument("--two-layer", action="store_true")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(fn=_cmd_synth)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except StageFailure as e:
        print(f"ddtloc {args.command}: {e}", file=sys.stderr)
        return 1
    except DdtError as e:
        print(f"ddtloc {args.command}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
