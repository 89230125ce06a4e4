"""Command line interface.

Subcommands: calibrate, generate, entropy, speckle, plot, verify-manifest.
Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
abort.  COHSIM_WORKERS overrides the worker count.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import ConfigurationError, ContractError, DataError, NumericalAbortError
from . import pipeline


def _add_config_args(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--config", help="JSON config file; flags override its fields")
    ap.add_argument("--preset", choices=pipeline.PRESETS)
    ap.add_argument("--output-dir")
    ap.add_argument("--images", dest="images_path")
    ap.add_argument("--labels", dest="labels_path")
    ap.add_argument("--objects", dest="object_count", type=int)
    ap.add_argument("--l-c", dest="l_c_sweep", type=float, nargs="+", metavar="METERS")
    ap.add_argument("--depths", type=float, nargs="+", metavar="METERS")
    ap.add_argument("--m", type=int, help="ensemble realizations per image")
    ap.add_argument("--n", type=int, help="grid pixels per side")
    ap.add_argument("--extent", type=float, help="grid extent in meters")
    ap.add_argument("--screen-seed", dest="screen_seed", type=int)
    ap.add_argument("--object-seed", dest="object_seed", type=int)
    ap.add_argument("--diffuser-seed", dest="diffuser_seed", type=int)
    ap.add_argument("--precision", choices=("single", "double"))
    ap.add_argument("--workers", type=int)
    ap.add_argument("--paper-scale", action="store_true", default=None)
    ap.add_argument("--no-bandlimit", dest="band_limited", action="store_false",
                    default=None, help="plain angular spectrum, for comparison runs")
    ap.add_argument("--pad-factor", dest="pad_factor", type=int, choices=(1, 2, 4))
    ap.add_argument("--pinhole-distance", dest="pinhole_distance", type=float,
                    help="hole-to-plane distance in meters (0.025 reproduces the "
                         "reference geometry but under-resolves the fringes)")
    ap.add_argument("--scene-file", dest="scene_file",
                    help="JSON scene description replacing the preset's stage list")


def _build_config(args, default_preset: str | None = None) -> pipeline.ExperimentConfig:
    overrides = {k: v for k, v in vars(args).items()
                 if k in pipeline.ExperimentConfig.__dataclass_fields__ and v is not None}
    if args.config:
        return pipeline.load_config(args.config, **overrides)
    preset = overrides.pop("preset", None) or default_preset
    if preset is None:
        raise ConfigurationError("give --preset or --config")
    cfg = pipeline.resolve_config(preset, **overrides)
    if cfg.pinhole_distance < 0.1 and cfg.preset == "pinhole":
        logging.warning("pinhole distance %.3g m: fringe period is below the grid "
                        "pitch, visibility readings will be unreliable",
                        cfg.pinhole_distance)
    return cfg


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    ap = argparse.ArgumentParser(prog="cohsim", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p_cal = sub.add_parser("calibrate", help="double-pinhole visibility sweep")
    _add_config_args(p_cal)

    p_gen = sub.add_parser("generate", help="generate a labeled intensity dataset")
    _add_config_args(p_gen)

    p_ent = sub.add_parser("entropy", help="mean 2D entropy per l_c")
    p_ent.add_argument("--manifest", required=True)
    p_ent.add_argument("--manifest-b", help="second manifest for a comparison CSV")
    p_ent.add_argument("--out", required=True)

    p_spk = sub.add_parser("speckle", help="speckle size vs depth with linear fit")
    p_spk.add_argument("--manifest", required=True)
    p_spk.add_argument("--out", required=True)

    p_plot = sub.add_parser("plot", help="render metric CSVs as figures")
    p_plot.add_argument("--kind", required=True,
                        choices=("visibility", "entropy", "speckle", "accuracy"))
    p_plot.add_argument("--csv", nargs="+", required=True)
    p_plot.add_argument("--out", required=True)

    p_ver = sub.add_parser("verify-manifest", help="check completeness and hashes")
    p_ver.add_argument("--manifest", required=True)

    args = ap.parse_args(argv)
    try:
        if args.command == "calibrate":
            out = pipeline.run_calibrate(_build_config(args, "pinhole"))
            print(f"visibility CSV: {out}")
        elif args.command == "generate":
            out = pipeline.run_generate(_build_config(args))
            print(f"manifest: {out}")
        elif args.command == "entropy":
            out = pipeline.run_entropy(args.manifest, args.out, args.manifest_b)
            print(f"entropy CSV: {out}")
        elif args.command == "speckle":
            out, report = pipeline.run_speckle(args.manifest, args.out)
            print(f"speckle CSV: {out}")
            print(f"fit: slope={report['slope']:.6g} m/m, "
                  f"intercept={report['intercept']:.6g} m, R^2={report['r_squared']:.4f}")
        elif args.command == "plot":
            pipeline.run_plot(args.kind, args.csv, args.out)
            print(f"figure: {args.out}")
        elif args.command == "verify-manifest":
            pipeline.run_verify(args.manifest)
            print("manifest OK")
    except (ConfigurationError, ContractError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericalAbortError as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
