"""Command-line entry point: ``solarkd <subcommand> [options]``."""
from __future__ import annotations

import argparse
import logging
import sys

from . import experiments as ex
from .config import ExperimentConfig, dump_config, load_config
from .surrogate import generate_surrogate

logger = logging.getLogger("solarkd")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--seed", type=int, help="training / split seed (overrides config seeds)")
    p.add_argument("--data", help="input CSV; a surrogate is generated when omitted")
    p.add_argument("--out-dir", default="results", help="directory for reports (default: results)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="solarkd", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic dataset CSV")
    _common(g)
    g.add_argument("--n", type=int, default=5000)
    g.add_argument("--noise", type=float, default=0.05)
    g.add_argument("--out", default=None, help="output path (default: <out-dir>/surrogate.csv)")

    for name, text in (("sweep-mlp", "hidden-layer size sweep"),
                       ("sweep-anfis", "membership family sweep")):
        _common(sub.add_parser(name, help=text))
    s = sub.add_parser("sweep-gwo", help="GWO population sweep")
    _common(s)
    s.add_argument("--neurons", type=int, help="hidden size (default: config final_neurons)")

    c = sub.add_parser("compare", help="test-set comparison of the three models")
    _common(c)
    c.add_argument("--neurons", type=int)
    c.add_argument("--population", type=int)
    c.add_argument("--mf", choices=["triangular", "trapezoidal", "gbell", "gaussian"])

    _common(sub.add_parser("all", help="all sweeps followed by the comparison"))
    return parser


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    return cfg.with_overrides(data=args.data, seeds=(args.seed,) if args.seed is not None else None)


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    cfg = _config(args)
    if args.command == "generate":
        from pathlib import Path

        out = Path(args.out) if args.out else Path(args.out_dir) / "surrogate.csv"
        out.parent.mkdir(parents=True, exist_ok=True)
        seed = args.seed if args.seed is not None else cfg.surrogate_seed
        generate_surrogate(args.n, seed, args.noise, out)
        print(out)
        return 0

    prep = ex.prepare_data(cfg)
    if args.command == "sweep-mlp":
        report = ex.run_neuron_sweep(cfg, prep)
    elif args.command == "sweep-anfis":
        report = ex.run_mf_sweep(cfg, prep)
    elif args.command == "sweep-gwo":
        report = ex.run_population_sweep(cfg, args.neurons or cfg.final_neurons, prep)
    elif args.command == "compare":
        winners = ex.Winners(args.neurons or cfg.final_neurons,
                             args.population or cfg.final_population, args.mf or cfg.final_mf)
        report = ex.run_final_comparison(cfg, winners, prep)
    else:
        report = ex.run_all(cfg, prep)
    ex.write_outputs(report, args.out_dir, {"command": args.command, "config": dump_config(cfg)})
    print(report.format_table())
    return 0


def main(argv=None) -> int:
    try:
        return run(argv)
    except KeyboardInterrupt:
        return 130
    except Exception as exc:  # one-line diagnostic for any failure
        print(f"solarkd: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
