"""Command-line front end for batch descriptor extraction."""

import argparse
import logging
import sys

from .extract import ExtractionConfig, extract
from .models import ModelLoadFailure


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ddtextract",
        description="Run a pre-trained convolutional network over a directory "
        "of images and emit DDT1 descriptor files plus a manifest.",
    )
    parser.add_argument("--images", required=True, help="input image directory")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--model", default="vgg19", help="vgg19 (default) or tiny")
    parser.add_argument("--weights", default=None,
                        help="state-dict path, or 'random' for architecture-only runs "
                        "(default: pretrained weights)")
    parser.add_argument("--annotations", default=None,
                        help="JSON map of id -> {gt_boxes, noisy} to merge")
    parser.add_argument("--max-side", type=int, default=1024)
    parser.add_argument("--set-name", default=None)
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    config = ExtractionConfig(
        image_dir=args.images,
        out_dir=args.out,
        model=args.model,
        weights=args.weights,
        annotations=args.annotations,
        max_side=args.max_side,
        set_name=args.set_name,
    )
    try:
        manifest = extract(config)
    except (ModelLoadFailure, OSError, ValueError) as e:
        print(f"ddtextract: {e}", file=sys.stderr)
        return 1
    print(f"extracted {len(manifest['images'])} images into {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
