"""``manifold-align`` command line: align, gen and bench subcommands."""

from __future__ import annotations

import argparse
import logging
import sys

from . import bench, synthgen
from .alignment import cka_linear, cka_rbf, cka_sym_manifold, kcka, mka
from .kernels import SigmaPolicy
from .matrix_io import load_matrix, save_matrix

METRICS = ("mka", "cka", "cka-rbf", "kcka", "cka-sym")
GEN_KINDS = ("swiss", "s-curve", "gauss", "perturbed", "lost", "two-spots", "rings", "clusters")


class CliError(Exception):
    pass


def sigma_policy(sigma: str, delta: float | None) -> SigmaPolicy:
    if sigma == "median":
        return SigmaPolicy.median() if delta is None else SigmaPolicy.scaled_median(delta)
    if delta is not None:
        raise CliError("--delta only applies with --sigma median")
    try:
        return SigmaPolicy.explicit(float(sigma))
    except ValueError as exc:
        raise CliError(f"bad --sigma {sigma!r}: {exc}") from None


def compute_metric(metric, x, y, k=15, policy=None, rbf_squared=False, kcka_zero_diagonal=False):
    if metric == "mka":
        return mka(x, y, k)
    if metric == "cka":
        return cka_linear(x, y)
    if metric == "cka-rbf":
        return cka_rbf(x, y, policy, squared=rbf_squared)
    if metric == "kcka":
        return kcka(x, y, k, zero_diagonal=kcka_zero_diagonal)
    if metric == "cka-sym":
        return cka_sym_manifold(x, y, k)
    raise CliError(f"unknown metric {metric!r}")


def cmd_align(args) -> int:
    x = load_matrix(args.x, args.format, header=args.header)
    y = load_matrix(args.y, args.format, header=args.header)
    if x.n_samples != y.n_samples:
        raise CliError(f"row counts differ: --x has n={x.n_samples}, --y has n={y.n_samples}")
    policy = sigma_policy(args.sigma, args.delta)
    score = compute_metric(args.metric, x, y, args.k, policy, args.rbf_squared, args.kcka_zero_diagonal)
    print(f"{score:.12f}")
    return 0


def cmd_gen(args) -> int:
    kind, n, seed = args.kind, args.n, args.seed
    second = None
    if kind == "swiss":
        m = synthgen.gen_swiss_roll(n, seed)[0]
    elif kind == "s-curve":
        m = synthgen.gen_s_curve(n, args.r, seed)[0]
    elif kind == "gauss":
        m = synthgen.gen_gaussian_spot(n, args.d, seed)
    elif kind == "perturbed":
        base = synthgen.gen_gaussian_spot(n, args.d, seed)
        noise_seed = args.noise_seed if args.noise_seed is not None else bench.derive_seed(seed, 1)
        m = synthgen.perturb(base, args.scale, noise_seed)
    elif kind == "lost":
        seed_b = args.seed_b if args.seed_b is not None else bench.derive_seed(seed, 2)
        m, second = synthgen.lost_correspondence(n, args.d, seed, seed_b)
        if args.out_b is None:
            raise CliError("gen lost needs --out-b for the second spot")
    elif kind == "two-spots":
        m = synthgen.gen_uniform_two_spots(args.n_per, args.d, args.t, seed)
    elif kind == "rings":
        m = synthgen.gen_rings(n, args.stage, seed)
    else:
        m = synthgen.gen_clusters(n, args.c, seed)
    save_matrix(m, args.out, args.format)
    if second is not None:
        save_matrix(second, args.out_b, args.format)
    return 0


def _seeds(text: str) -> list[int]:
    text = text.strip()
    if text.isdigit():
        count = int(text)
        if count < 1:
            raise CliError("--seeds count must be >= 1")
        return list(range(1, count + 1))
    return bench.parse_grid(text, int)


def cmd_bench(args) -> int:
    n = args.n_per if args.experiment == "uniform-translate" and args.n_per else args.n
    cfg = bench.BenchConfig(
        experiment=args.experiment,
        n=n,
        d=args.d,
        k=bench.parse_grid(args.k, int) if args.k else [],
        r=bench.parse_grid(args.r) if args.r else [],
        t=bench.parse_grid(args.t) if args.t else [],
        c=bench.parse_grid(args.c, int) if args.c else [],
        delta=bench.parse_grid(args.delta) if args.delta else [],
        scale=args.scale,
        metrics=[m.strip() for m in args.metrics.split(",")] if args.metrics else [],
        seeds=_seeds(args.seeds) if args.seeds else list(bench.DEFAULT_SEEDS),
        rbf_squared=True if args.rbf_squared else None,
        kcka_zero_diagonal=args.kcka_zero_diagonal,
    )
    bench.write_csv(cfg, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="manifold-align", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("align", help="score two feature matrices")
    a.add_argument("--x", required=True)
    a.add_argument("--y", required=True)
    a.add_argument("--metric", choices=METRICS, default="mka")
    a.add_argument("--k", type=int, default=15)
    a.add_argument("--sigma", default="median", help="'median' or an explicit bandwidth")
    a.add_argument("--delta", type=float, default=None, help="scale the median bandwidth")
    a.add_argument("--rbf-squared", action="store_true", help="use exp(-d^2 / 2 sigma^2)")
    a.add_argument("--kcka-zero-diagonal", action="store_true")
    a.add_argument("--format", choices=("auto", "csv", "bin"), default="auto")
    a.add_argument("--header", action="store_true", help="skip the first CSV line")
    a.set_defaults(func=cmd_align)

    g = sub.add_parser("gen", help="write a synthetic dataset")
    g.add_argument("kind", choices=GEN_KINDS)
    g.add_argument("--n", type=int, default=1000)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--out-b", default=None, help="second output for 'lost'")
    g.add_argument("--format", choices=("auto", "csv", "bin"), default="auto")
    g.add_argument("--r", type=float, default=0.5)
    g.add_argument("--d", type=int, default=2)
    g.add_argument("--scale", type=float, default=0.5)
    g.add_argument("--noise-seed", type=int, default=None)
    g.add_argument("--seed-b", type=int, default=None)
    g.add_argument("--t", type=float, default=0.0)
    g.add_argument("--n-per", type=int, default=500)
    g.add_argument("--stage", type=int, default=5)
    g.add_argument("--c", type=int, default=1)
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("bench", help="run an experiment sweep to CSV")
    b.add_argument("experiment", choices=bench.EXPERIMENTS)
    b.add_argument("--out", required=True)
    b.add_argument("--n", type=int, default=None)
    b.add_argument("--n-per", type=int, default=None)
    b.add_argument("--d", type=int, default=None)
    b.add_argument("--k", default=None, help="grid, e.g. 10,50,100 or 10:50:10")
    b.add_argument("--r", default=None)
    b.add_argument("--t", default=None)
    b.add_argument("--c", default=None)
    b.add_argument("--delta", default=None, help="median multipliers for cka-rbf")
    b.add_argument("--scale", type=float, default=0.5)
    b.add_argument("--metrics", default=None, help=f"comma list from {', '.join(bench.ALL_METRICS)}")
    b.add_argument("--seeds", default=None, help="count N (seeds 1..N) or a list/range")
    b.add_argument("--rbf-squared", action="store_true")
    b.add_argument("--kcka-zero-diagonal", action="store_true")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CliError, ValueError, OSError) as exc:
        print(f"manifold-align {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
