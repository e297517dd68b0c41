"""Command-line front for the harness: train, then predict-and-correlate."""

from __future__ import annotations

import argparse
import json
import sys

from .data import SchemaError
from .harness import TrainSpec, predict_and_correlate, train


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qe-harness", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train the QE regressor on a src,mt,score CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--encoder", required=True, help="e.g. hashed-char-ngram")
    p.add_argument("--epochs", type=int, default=1)
    p.add_argument("--val-split", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=7)

    p = sub.add_parser("evaluate", help="predict on a test CSV and correlate against its gold scores")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--test-csv", required=True)
    p.add_argument("--out-dir", required=True)

    return parser


def main(argv=None) -> int:
    args = build_arg_parser().parse_args(argv)
    try:
        if args.command == "train":
            spec = TrainSpec(
                train_csv=args.csv,
                output_dir=args.out_dir,
                encoder=args.encoder,
                epochs=args.epochs,
                val_fraction=args.val_split,
                seed=args.seed,
            )
            result = train(spec)
            print(f"checkpoint\t{result.checkpoint_path}")
            print(f"log\t{result.log_path}")
            print(f"split\t{result.train_rows} train / {result.val_rows} val")
        else:
            report = predict_and_correlate(args.checkpoint, args.test_csv, args.out_dir)
            if report.degenerate:
                print("correlations\tdegenerate input (constant scores)")
            else:
                print(json.dumps(
                    {"pearson": report.pearson, "spearman": report.spearman, "kendall": report.kendall},
                    indent=2,
                ))
        return 0
    except (SchemaError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
