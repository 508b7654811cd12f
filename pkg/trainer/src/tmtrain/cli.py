"""Command line: train a generator and export estimator-ready weights.

    tmest-train --mode synthetic --alpha 0.0107 --p 500 --epochs 300 --out weights.json
    tmest-train --mode files --files 'tms/*.csv' --epochs 300 --out weights.json
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .data import DataEmpty, load_tm_csvs, sample_power_law_tms
from .wgan import NonFiniteLoss, TrainConfig, export_weights, train_generator


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tmest-train", description=__doc__.splitlines()[0])
    parser.add_argument("--mode", choices=["synthetic", "files"], required=True)
    parser.add_argument("--alpha", type=float, help="power-law exponent (synthetic mode)")
    parser.add_argument("--p", type=int, help="demands per TM (synthetic mode)")
    parser.add_argument("--tms", type=int, default=1024, help="synthetic TM count (default 1024)")
    parser.add_argument("--files", help="TM CSV glob (files mode)")
    parser.add_argument("--epochs", type=int, default=300)
    parser.add_argument("--critic-steps", dest="critic_steps", type=int, default=64,
                        help="critic updates per generator update (default 64)")
    parser.add_argument("--batch-size", dest="batch_size", type=int, default=64)
    parser.add_argument("--latent-dim", dest="latent_dim", type=int, default=64)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", required=True, help="output weight JSON path")
    parser.add_argument("--quiet", action="store_true", help="suppress per-epoch logs")
    return parser


def cli_main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s"
    )
    try:
        config = TrainConfig(
            epochs=args.epochs,
            critic_steps_per_gen=args.critic_steps,
            batch_size=args.batch_size,
            latent_dim=args.latent_dim,
            seed=args.seed,
            synthetic_tms=args.tms,
        )
        metadata: dict = {"mode": args.mode, "epochs": args.epochs, "seed": args.seed}
        if args.mode == "synthetic":
            if args.alpha is None or args.p is None:
                raise DataEmpty("synthetic mode needs --alpha and --p")
            rng = np.random.Generator(np.random.Philox(args.seed))
            data = sample_power_law_tms(config.synthetic_tms, args.p, args.alpha, rng)
            metadata.update(alpha=args.alpha, p=args.p, tms=config.synthetic_tms)
        else:
            if not args.files:
                raise DataEmpty("files mode needs --files")
            data = load_tm_csvs(args.files)
            metadata.update(files=args.files, tms=int(data.shape[0]))
        trained = train_generator(config, data)
        export_weights(trained, args.out, metadata=metadata)
    except (DataEmpty, NonFiniteLoss, OSError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    return 0


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
