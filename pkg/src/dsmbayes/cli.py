"""Command-line entry point: ``dsmbayes {run,gamma-sweep,simulate,dsm,reconstruct}``."""

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import dsm as dsm_mod
from .errors import ConfigError, StageError
from .forward import load_farfield, save_farfield
from .geometry import Disc
from .mcmc import save_chain, save_summary
from .pipeline import (ExperimentConfig, config_from_mapping, parse_wavenumbers, read_config_file,
                       reconstruct, run_dsm, simulate)
from . import pipeline

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

# flag dest -> ExperimentConfig field
_OVERRIDES = {
    "example": "example", "aperture": "aperture", "gamma": "gamma", "seed": "seed",
    "steps": "steps", "burn_in": "burn_in", "thin": "thin", "beta": "beta", "sigma": "sigma",
    "prior_var": "prior_var", "M": "M", "N": "N", "noise_mode": "noise_mode",
    "noise_level": "noise_level", "proposal": "proposal", "threads": "threads",
    "disc_mode": "disc_mode", "indicator_form": "indicator_form", "h": "h_data",
    "h_operator": "h_operator", "h_eval": "h_eval", "bins": "bins",
}


def _disc(text):
    try:
        cx, cy, r = (float(v) for v in text.split(","))
        return Disc((cx, cy), r)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected cx,cy,R: {exc}") from exc


def _aperture(text):
    if text.upper() in pipeline.DEFAULT_GAMMA:
        return text.upper()
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError("expected G1, G2, G3 or a comma list of angles") from exc


def _add_common(p):
    p.add_argument("--config", type=Path, help="key = value file; flags override it")
    p.add_argument("--example", type=int, choices=range(1, 6))
    p.add_argument("--aperture", type=_aperture)
    p.add_argument("--dsm-wavenumbers", type=parse_wavenumbers, help="start:step:stop or list")
    p.add_argument("--bayes-wavenumbers", type=parse_wavenumbers, help="start:step:stop or list")
    p.add_argument("--seed", type=int)
    p.add_argument("--noise-mode", choices=("deterministic", "random-uniform"))
    p.add_argument("--noise-level", type=float)
    p.add_argument("--h", type=float, help="data mesh size")
    p.add_argument("--threads", type=int)
    p.add_argument("--out", type=Path, help="output directory")


def _add_dsm(p):
    p.add_argument("--gamma", type=float)
    p.add_argument("--disc-mode", choices=(dsm_mod.ORIGIN, dsm_mod.CENTROID))
    p.add_argument("--indicator-form", choices=(dsm_mod.COHERENT, dsm_mod.INCOHERENT))


def _add_bayes(p):
    p.add_argument("--M", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--burn-in", type=int)
    p.add_argument("--thin", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--prior-var", type=float)
    p.add_argument("--proposal", choices=("literal", "prior"))
    p.add_argument("--literal-proposal", dest="proposal", action="store_const", const="literal")
    p.add_argument("--h-operator", type=float)
    p.add_argument("--h-eval", type=float)
    p.add_argument("--bins", type=int)


def build_parser():
    parser = argparse.ArgumentParser(prog="dsmbayes", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="full DSM + Bayes pipeline")
    _add_common(run), _add_dsm(run), _add_bayes(run)
    run.add_argument("--disc-override", type=_disc, help="cx,cy,R; skips the DSM stage")

    sweep = sub.add_parser("gamma-sweep", help="disc radius for several cutoffs")
    _add_common(sweep), _add_dsm(sweep)
    sweep.add_argument("--gammas", required=True,
                       type=lambda s: [float(v) for v in s.split(",")])

    sim = sub.add_parser("simulate", help="generate perturbed far-field data only")
    _add_common(sim)

    d = sub.add_parser("dsm", help="indicator and disc from a data file")
    _add_common(d), _add_dsm(d)
    d.add_argument("--data", type=Path, required=True)

    rec = sub.add_parser("reconstruct", help="posterior sampling from a data file and a disc")
    _add_common(rec), _add_bayes(rec)
    rec.add_argument("--data", type=Path, required=True)
    rec.add_argument("--disc", type=_disc, required=True, help="cx,cy,R")
    return parser


def config_from_args(args):
    cfg = ExperimentConfig()
    if getattr(args, "config", None) is not None:
        cfg = config_from_mapping(read_config_file(args.config))
    updates = {}
    for dest, name in _OVERRIDES.items():
        value = getattr(args, dest, None)
        if value is not None:
            updates[name] = value
    for dest in ("dsm_wavenumbers", "bayes_wavenumbers"):
        value = getattr(args, dest, None)
        if value is not None:
            updates[dest] = tuple(value)
    if getattr(args, "disc_override", None) is not None:
        updates["disc_override"] = args.disc_override
    if getattr(args, "out", None) is not None:
        updates["output_dir"] = args.out
    return replace(cfg, **updates)


def _out_dir(cfg):
    out = Path(cfg.output_dir or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_run(cfg, args):
    report = pipeline.run_pipeline(cfg)
    print(json.dumps(report.to_json(), indent=2))


def _cmd_sweep(cfg, args):
    print("gamma, radius")
    for g, r in pipeline.gamma_sweep(cfg, args.gammas):
        print(f"{g!r}, {'' if r is None else repr(r)}")


def _cmd_simulate(cfg, args):
    data = simulate(cfg)
    path = _out_dir(cfg) / "farfield.txt"
    save_farfield(data, path)
    print(path)


def _load_data(args):
    try:
        return load_farfield(args.data)
    except (OSError, ValueError) as exc:
        raise OSError(f"cannot read data file {args.data}: {exc}") from exc


def _cmd_dsm(cfg, args):
    data = _load_data(args)
    cfg = replace(cfg, bayes_wavenumbers=tuple(data.wavenumbers))
    try:
        field, disc = run_dsm(cfg, data)
    except (ValueError, ArithmeticError) as exc:
        raise StageError("dsm", exc) from exc
    out = _out_dir(cfg)
    dsm_mod.save_indicator(field, out / "indicator.csv")
    dsm_mod.save_disc_summary(disc, cfg.resolved_gamma(), out / "disc.csv")
    print(f"center = {disc.center}, radius = {disc.radius!r}")


def _cmd_reconstruct(cfg, args):
    data = _load_data(args)
    ks = cfg.bayes_wavenumbers if args.bayes_wavenumbers is not None else data.wavenumbers
    cfg = replace(cfg, bayes_wavenumbers=tuple(ks))
    try:
        chain, summary, coeffs = reconstruct(cfg, data, args.disc)
    except (ValueError, ArithmeticError) as exc:
        raise StageError("bayes", exc) from exc
    out = _out_dir(cfg)
    save_chain(chain, out / "chain.txt")
    save_summary(summary, out / "summary.txt", coeffs.basis)
    print(f"acceptance_rate = {summary.acceptance_rate!r}")


_COMMANDS = {"run": _cmd_run, "gamma-sweep": _cmd_sweep, "simulate": _cmd_simulate,
             "dsm": _cmd_dsm, "reconstruct": _cmd_reconstruct}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StageError as exc:
        if isinstance(exc.cause, ConfigError):
            print(f"config error: {exc.cause}", file=sys.stderr)
            return EXIT_CONFIG
        if isinstance(exc.cause, OSError):
            print(f"I/O error: {exc.cause}", file=sys.stderr)
            return EXIT_IO
        print(f"error in stage {exc.stage}: {exc.cause}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ArithmeticError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
