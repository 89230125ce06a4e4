"""Harness CLI: train/evaluate on manifests, compare curves."""

from __future__ import annotations

import argparse
import json
import sys

from .compare import compare_curves
from .data import DatasetError
from .train import TrainConfig, train_eval


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="cohharness", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train one network per manifest")
    p_train.add_argument("--manifest", nargs="+", required=True)
    p_train.add_argument("--out-csv", required=True)
    p_train.add_argument("--report", help="write the full JSON report here")
    p_train.add_argument("--network", default="small-cnn",
                         choices=("small-cnn", "resnet18"))
    p_train.add_argument("--epochs", type=int, default=10)
    p_train.add_argument("--batch-size", type=int, default=64)
    p_train.add_argument("--lr", type=float, default=1e-3)
    p_train.add_argument("--input-size", type=int, default=128)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--shuffle-labels", action="store_true",
                         help="null control: train on permuted labels")
    p_train.add_argument("--no-verify", action="store_true")

    p_cmp = sub.add_parser("compare", help="Spearman rho of accuracy vs entropy")
    p_cmp.add_argument("--accuracy", required=True)
    p_cmp.add_argument("--entropy", required=True)

    args = ap.parse_args(argv)
    try:
        if args.command == "train":
            config = TrainConfig(manifests=args.manifest, out_csv=args.out_csv,
                                 network=args.network, epochs=args.epochs,
                                 batch_size=args.batch_size, learning_rate=args.lr,
                                 input_size=args.input_size, seed=args.seed,
                                 shuffle_labels=args.shuffle_labels,
                                 verify_hashes=not args.no_verify)
            report = train_eval(config)
            for row in report.rows:
                l_c = row["l_c"]
                l_c_txt = f"{l_c * 1e3:g} mm" if l_c is not None else "mixed"
                print(f"{row['manifest']}: l_c={l_c_txt} "
                      f"accuracy={row['accuracy']:.4f} train={row['train_accuracy']:.4f}")
            if args.report:
                with open(args.report, "w", encoding="utf-8") as fh:
                    fh.write(report.to_json())
            print(f"accuracy CSV: {args.out_csv}")
        elif args.command == "compare":
            result = compare_curves(args.accuracy, args.entropy)
            print(json.dumps(result, indent=2, sort_keys=True))
    except DatasetError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
