"""Command-line interface.

Subcommands: ``gen``, ``decompose``, ``sv-compare``, ``lowrank-error``,
``rpca``. Exit codes: 0 on success, 1 on usage errors, 2 on numerical
failures. Defaults for any subcommand can also be supplied from a
``key=value`` config file via ``--config`` (command-line flags win).
Set ``CORUTV_THREADS`` to run experiment trials in parallel.
"""

from __future__ import annotations

import argparse
import sys

from .bench import (
    EXPERIMENTS,
    METHODS,
    SOLVERS,
    ExperimentConfig,
    decompose_file,
    run_lowrank_error,
    run_rpca_recovery,
    run_sv_compare,
)
from .errors import CorutvError
from .matio import FORMATS, write_matrix
from .sketch import VARIANT_APPROX, VARIANT_EXACT
from .synth import NoisyLowRankSpec, RpcaInstanceSpec, gen_noisy_lowrank, gen_rpca_instance

USAGE_EXIT = 1
NUMERICAL_EXIT = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; the CLI contract is 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def _load_config(path) -> dict:
    """Parse a key=value config file ('#' starts a comment)."""
    values = {}
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}: line {lineno}: expected key=value")
            key, val = line.split("=", 1)
            values[key.strip().replace("-", "_")] = val.strip()
    return values


def _apply_config(parser, subparsers, args):
    """Fill the subcommand parser's defaults from --config, then re-parse so
    explicit flags keep precedence."""
    if getattr(args, "config", None) is None:
        return args
    raw = _load_config(args.config)
    sub = subparsers[args.command]
    defaults = {}
    for action in sub._actions:
        if action.dest in raw:
            val = raw[action.dest]
            if action.type is not None:
                val = action.type(val)
            elif isinstance(action.default, bool):
                val = val.lower() in ("1", "true", "yes", "on")
            defaults[action.dest] = val
    unknown = set(raw) - {a.dest for a in sub._actions}
    if unknown:
        raise ValueError(f"config keys not recognized by {args.command}: "
                         f"{sorted(unknown)}")
    sub.set_defaults(**defaults)
    return parser.parse_args(args._argv)


def _add_common(p):
    p.add_argument("--seed", type=int, default=1, help="base RNG seed")
    p.add_argument("--out", required=True, help="output path (or prefix)")
    p.add_argument("--format", choices=FORMATS, default="csv",
                   help="matrix artifact format (reports are always CSV)")
    p.add_argument("--config", help="key=value file supplying defaults")


def build_parser():
    parser = _Parser(prog="corutv",
                     description="Randomized UTV decompositions, baselines, "
                                 "and robust PCA benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)
    registry = {}

    g = sub.add_parser("gen", help="generate a benchmark matrix")
    g.add_argument("kind", choices=("noisy-lowrank", "rpca"),
                   help="generator family")
    g.add_argument("--n", type=int, default=400)
    g.add_argument("--k", type=int, default=20)
    g.add_argument("--noise-coeff", type=float, default=0.1)
    g.add_argument("--sigma-max", type=float, default=1.0)
    g.add_argument("--sigma-min", type=float, default=1e-9)
    g.add_argument("--noise-norm", choices=("spectral", "frobenius", "entry"),
                   default="spectral")
    g.add_argument("--ramp-span", choices=("full", "rank"), default="full")
    g.add_argument("--sparsity", type=float, default=0.05,
                   help="sparse fraction of entries (rpca kind)")
    g.add_argument("--amplitude", type=float, default=80.0)
    _add_common(g)
    registry["gen"] = g

    d = sub.add_parser("decompose", help="factor a matrix file")
    d.add_argument("input", help="matrix file (csv or bin)")
    d.add_argument("--method", required=True, choices=METHODS)
    d.add_argument("--ell", type=int, default=None, help="sample size")
    d.add_argument("--k", type=int, default=None,
                   help="target rank; implies ell = 2k when --ell is absent")
    d.add_argument("--q", type=int, default=0, help="power iterations")
    d.add_argument("--variant", choices=(VARIANT_EXACT, VARIANT_APPROX),
                   default=VARIANT_EXACT)
    _add_common(d)
    registry["decompose"] = d

    for name, help_text in (("sv-compare", "singular-value comparison report"),
                            ("lowrank-error", "low-rank error sweep report")):
        e = sub.add_parser(name, help=help_text)
        e.add_argument("--n", type=int, default=400)
        e.add_argument("--k", type=int, default=20)
        e.add_argument("--ell", type=int, default=None)
        e.add_argument("--ell-sweep", default=None,
                       help="comma-separated sample sizes (lowrank-error)")
        e.add_argument("--q", type=int, default=0)
        e.add_argument("--trials", type=int, default=20)
        e.add_argument("--matrix-seed", type=int, default=0)
        e.add_argument("--methods", default=None,
                       help=f"comma-separated subset of {','.join(METHODS)}")
        e.add_argument("--full", action="store_true",
                       help="full-scale defaults (n=1000)")
        _add_common(e)
        registry[name] = e

    r = sub.add_parser("rpca", help="low-rank + sparse recovery report")
    r.add_argument("--sizes", default="400",
                   help="comma-separated problem sizes")
    r.add_argument("--rank-fraction", type=float, default=0.05)
    r.add_argument("--sparsity", type=float, default=0.05)
    r.add_argument("--amplitude", type=float, default=80.0)
    r.add_argument("--ell", type=int, default=None)
    r.add_argument("--q", type=int, default=1)
    r.add_argument("--matrix-seed", type=int, default=0)
    r.add_argument("--solvers", default=",".join(SOLVERS))
    r.add_argument("--telemetry-prefix", default=None,
                   help="also write per-solve telemetry CSVs under this prefix")
    r.add_argument("--full", action="store_true",
                   help="full-scale defaults (sizes=1000)")
    _add_common(r)
    registry["rpca"] = r

    return parser, registry


def _csv_ints(text) -> tuple[int, ...]:
    return tuple(int(tok) for tok in str(text).split(",") if tok.strip())


def _cmd_gen(args) -> int:
    if args.kind == "noisy-lowrank":
        spec = NoisyLowRankSpec(n=args.n, k=args.k, noise_coeff=args.noise_coeff,
                                sigma_max=args.sigma_max, sigma_min=args.sigma_min,
                                seed=args.seed,
                                noise_normalization=args.noise_norm,
                                ramp_span=args.ramp_span)
        a, _ = gen_noisy_lowrank(spec)
        write_matrix(args.out, a, args.format)
        print(f"wrote {args.out} ({args.n}x{args.n}, rank {args.k})")
        return 0
    s = round(args.sparsity * args.n * args.n)
    spec = RpcaInstanceSpec(n=args.n, k=args.k, s=s, amplitude=args.amplitude,
                            seed=args.seed)
    m_mat, l_true, s_true = gen_rpca_instance(spec)
    ext = args.format
    for part, mat in (("m", m_mat), ("l", l_true), ("s", s_true)):
        write_matrix(f"{args.out}.{part}.{ext}", mat, args.format)
    print(f"wrote {args.out}.{{m,l,s}}.{ext} ({args.n}x{args.n}, "
          f"rank {args.k}, {s} spikes)")
    return 0


def _cmd_decompose(args) -> int:
    ell = args.ell
    if ell is None and args.k is not None:
        ell = 2 * args.k
    paths, meta = decompose_file(args.input, args.method, args.out,
                                 fmt=args.format, ell=ell, q_power=args.q,
                                 seed=args.seed, variant=args.variant)
    print(f"wrote {paths['u']}, {paths['t']}, {paths['v']} "
          f"(+ {args.out}.meta.json)")
    return 0


def _experiment_config(args, experiment: str) -> ExperimentConfig:
    n = 1000 if getattr(args, "full", False) else args.n
    methods = (tuple(args.methods.split(",")) if args.methods
               else ("svd", "corutv", "tsr-svd", "sor-svd", "qrcp"))
    sweep = _csv_ints(args.ell_sweep) if args.ell_sweep else ()
    return ExperimentConfig(
        experiment=experiment, n=n, k=args.k, ell=args.ell, ell_sweep=sweep,
        q_power=args.q, trials=args.trials, base_seed=args.seed,
        matrix_seed=args.matrix_seed, methods=methods, out_path=args.out,
    )


def _cmd_sv_compare(args) -> int:
    cfg = _experiment_config(args, "sv-compare")
    rows = run_sv_compare(cfg)
    print(f"wrote {args.out} ({len(rows)} rows)")
    return 0


def _cmd_lowrank_error(args) -> int:
    cfg = _experiment_config(args, "lowrank-error")
    rows = run_lowrank_error(cfg)
    print(f"wrote {args.out} ({len(rows)} rows)")
    return 0


def _cmd_rpca(args) -> int:
    sizes = (1000,) if args.full else _csv_ints(args.sizes)
    cfg = ExperimentConfig(
        experiment="rpca-recovery", sizes=sizes,
        rank_fraction=args.rank_fraction, sparsity_fraction=args.sparsity,
        amplitude=args.amplitude, ell=args.ell, q_power=args.q,
        base_seed=args.seed, matrix_seed=args.matrix_seed,
        solvers=tuple(args.solvers.split(",")), out_path=args.out,
        telemetry_prefix=args.telemetry_prefix,
    )
    rows = run_rpca_recovery(cfg)
    print(f"wrote {args.out} ({len(rows)} rows)")
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "decompose": _cmd_decompose,
    "sv-compare": _cmd_sv_compare,
    "lowrank-error": _cmd_lowrank_error,
    "rpca": _cmd_rpca,
}


def main(argv=None) -> int:
    parser, subparsers = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    args._argv = argv
    try:
        args = _apply_config(parser, subparsers, args)
    except (OSError, ValueError) as exc:
        print(f"corutv: config error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    try:
        return _COMMANDS[args.command](args)
    except CorutvError as exc:
        print(f"corutv: numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_EXIT
    except ValueError as exc:
        print(f"corutv: error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except OSError as exc:
        print(f"corutv: i/o error: {exc}", file=sys.stderr)
        return USAGE_EXIT


if __name__ == "__main__":
    sys.exit(main())
