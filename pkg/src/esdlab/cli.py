"""Command-line entry point: ``esdlab <verb> [options]``.

Exit codes: 0 success, 2 configuration error, 3 acceptance-gate failure
(``selftest`` only).
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

from . import _backend
from .experiments import EXPERIMENTS, ConfigError, ExperimentConfig, parse_value, run_experiment, write_matrix

EXIT_OK, EXIT_CONFIG, EXIT_GATE = 0, 2, 3


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", metavar="FILE", help="key=value config file")
    p.add_argument("--n", help="dimension or comma-separated ladder")
    p.add_argument("--b", help="block rule: n-minus-1, sqrt-n, loglog-n or fixed:K")
    p.add_argument("--gamma", help="noise exponent (inf disables noise)")
    p.add_argument("--ensemble", action="append", help="ensemble name; repeat or comma-separate")
    p.add_argument("--seed-base", dest="seed_base")
    p.add_argument("--seeds", help="number of seeds")
    p.add_argument("--z-grid", dest="z_grid", help="comma-separated complex values, e.g. 0.5,2,0.3+0.4j")
    p.add_argument("--out", dest="output", help="output directory")
    p.add_argument("--jobs", help="worker threads")
    p.add_argument("--dump-matrix", dest="dump_matrix", metavar="PATH",
                   help="also write the first matrix of the run in text form")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="esdlab", description=__doc__.splitlines()[0])
    ap.add_argument("--backend", choices=("compiled", "python"), help="kernel backend (default: auto)")
    sub = ap.add_subparsers(dest="verb", required=True)
    for name in EXPERIMENTS:
        _common(sub.add_parser(name, help=f"run the {name} experiment"))
    st = sub.add_parser("selftest", help="run the acceptance gates")
    st.add_argument("--full", action="store_true", help="include the Monte Carlo gates (minutes)")
    st.add_argument("--only", action="append", help="run only these criterion keys")
    st.add_argument("--jobs", type=int, default=1)
    return ap


def config_from_args(args) -> ExperimentConfig:
    values: dict = {}
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        values.update(ExperimentConfig.parse_pairs(text))
    exp = values.pop("experiment", args.verb)
    if exp != args.verb:
        raise ConfigError(f"config is for {exp!r} but verb is {args.verb!r}")
    for key in ("n", "b", "gamma", "seed_base", "seeds", "z_grid", "output", "jobs"):
        raw = getattr(args, key)
        if raw is not None:
            values[key] = parse_value(key, raw)
    if args.ensemble:
        values["ensembles"] = parse_value("ensembles", ",".join(args.ensemble))
    return ExperimentConfig.build(args.verb, values)


def _selftest(args) -> int:
    from . import acceptance

    keys = args.only or (list(acceptance.CRITERIA) if args.full else list(acceptance.FAST))
    unknown = [k for k in keys if k not in acceptance.CRITERIA]
    if unknown:
        print(f"esdlab: unknown criterion {unknown}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"kernel backend: {_backend.NAME}")
    failed = []
    for k in keys:
        res = acceptance.run(k, args.jobs)
        print(res.line(), flush=True)
        if not res.passed and not res.documented:
            failed.append(k)
    if failed:
        print(f"selftest: gate failure in {', '.join(failed)}")
        return EXIT_GATE
    print("selftest: all gates passed or known (documented) failures only")
    return EXIT_OK


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.backend:
        _backend.use(args.backend)
    if args.verb == "selftest":
        return _selftest(args)
    try:
        cfg = config_from_args(args)
    except ConfigError as exc:
        print(f"esdlab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        art = run_experiment(cfg)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if args.dump_matrix:
        art.paths.append(write_matrix(cfg, args.dump_matrix))
    for note in art.notes:
        print(f"note: {note}")
    for p in art.paths:
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
