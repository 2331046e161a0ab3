"""Command-line front end.

Commands: estimate | curves | simulate | lower-bounds.  Every output embeds
a run manifest as a '#'-prefixed JSON comment line; re-running the manifest's
argv reproduces the file byte-exactly.  To keep that contract, the manifest
excludes --out, --plot and --workers (none of which affect the numbers) and
carries no wall-clock timestamps.

Exit codes: 0 ok, 2 usage/parse error, 3 infeasible configuration,
4 root not found.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .bounds import (
    chebyshev_width,
    default_eps_grid,
    fourth_moment_width,
    gaussian_benchmark_width,
    kurtosis_upper_width,
    lower_bound_kurtosis,
    lower_bound_variance,
)
from .core import (
    Sample,
    TruncationKind,
    truncated_mean,
    width_clipped,
    width_prop32,
)
from .errors import (
    AdmissibilityError,
    DomainError,
    EmptyFamily,
    InvalidParameter,
    NoRoot,
    TruncMeanError,
)
from .iterated import (
    JITTER_ALGORITHM,
    JitterSource,
    run_iterated,
    schedule_empirical_start,
    schedule_known_delta0,
    split_eps,
)
from .kurtosis import run_kurtosis_scheme, zeta_bound
from .last_step import LastStepConfig, default_beta, solve_root, width_prop14
from .lepski import adapt
from .simulation import (
    Bernoulli,
    FourPoint,
    Gaussian,
    StudentT,
    ThreePoint,
    run_coverage,
    sample_from,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_NO_ROOT = 4

_MANIFEST_EXCLUDED_FLAGS = {"--out", "-o", "--plot", "--workers"}


def _fmt(x) -> str:
    """Locale-independent shortest round-trip float formatting."""
    if isinstance(x, np.floating):
        x = float(x)
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return repr(x)
    return str(x)


def _manifest_argv(argv: list) -> list:
    out = []
    skip = False
    for a in argv:
        if skip:
            skip = False
            continue
        key = a.split("=", 1)[0]
        if key in _MANIFEST_EXCLUDED_FLAGS:
            skip = "=" not in a
            continue
        out.append(a)
    return out


def _manifest_line(command: str, argv: list) -> str:
    doc = {
        "command": command,
        "argv": _manifest_argv(argv),
        "version": __version__,
        "jitter_algorithm": JITTER_ALGORITHM,
    }
    return "# manifest " + json.dumps(doc, sort_keys=True, separators=(",", ":"))


def read_observations(path: str) -> Sample:
    """One observation per line, '#' comment lines and blanks ignored."""
    values = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            try:
                values.append(float(s))
            except ValueError as exc:
                raise InvalidParameter(f"{path}:{lineno}: not a number: {s!r}") from exc
    return Sample(values)


def _float_list(text: str) -> list:
    return [float(t) for t in text.split(",") if t]


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["csv", "text"], default="text")
    p.add_argument("--out", "-o", default=None)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="truncmean",
        description="Robust mean estimation with non-asymptotic confidence "
        "intervals under variance or kurtosis priors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="estimate the mean of a sample file")
    est.add_argument("--input", "-i", required=True)
    est.add_argument(
        "--method",
        required=True,
        choices=[
            "truncated", "clipped", "iterated", "iterated-empirical",
            "last-step", "kurtosis", "lepski",
        ],
    )
    est.add_argument("--eps", type=float, default=1e-3,
                     help="one-sided miss budget (interval misses with prob 2*eps)")
    est.add_argument("--v0", type=float, default=None)
    est.add_argument("--delta0", type=float, default=0.0)
    est.add_argument("--theta0", type=float, default=0.0)
    est.add_argument("--c", type=float, default=None)
    est.add_argument("--k", type=int, default=None)
    est.add_argument("--x", type=float, default=None)
    est.add_argument("--eps-split", choices=["paper", "uniform"], default="paper")
    est.add_argument("--gamma", choices=["stated", "cumulative"], default="stated")
    est.add_argument("--jitter", choices=["on", "off"], default="on")
    est.add_argument("--beta", type=float, default=None)
    est.add_argument("--eps1", type=float, default=None)
    est.add_argument("--eps2", type=float, default=None)
    est.add_argument("--V", type=float, default=1.0)
    _add_common(est)

    cur = sub.add_parser("curves", help="tabulate half-width curves vs epsilon")
    cur.add_argument("--n", type=int, required=True)
    cur.add_argument("--v0", type=float, default=1.0)
    cur.add_argument("--delta0", type=float, default=0.0)
    cur.add_argument("--c", type=float, default=3.0)
    cur.add_argument("--kappa", type=float, default=None,
                     help="classical kurtosis for the upper bound; defaults to c")
    cur.add_argument("--k", type=int, default=6)
    cur.add_argument("--x", type=float, default=0.1)
    cur.add_argument("--eps-split", choices=["paper", "uniform"], default="paper")
    cur.add_argument("--gamma", choices=["stated", "cumulative"], default="stated")
    cur.add_argument("--curves", required=True,
                     help="comma-separated curve names")
    cur.add_argument("--eps-grid", default=None,
                     help="comma-separated epsilons, strictly decreasing "
                     "(default: 57 points, 1e-1 down to 1e-15)")
    cur.add_argument("--plot", action="store_true",
                     help="also render the curves to a PNG next to --out")
    _add_common(cur)

    sim = sub.add_parser("simulate", help="Monte Carlo coverage experiment")
    sim.add_argument("--dist", required=True,
                     choices=["gaussian", "three-point", "four-point",
                              "bernoulli", "student-t"])
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--m", type=float, default=0.0)
    sim.add_argument("--v", type=float, default=1.0)
    sim.add_argument("--eta", type=float, default=None)
    sim.add_argument("--c", type=float, default=3.0)
    sim.add_argument("--p", type=float, default=0.5)
    sim.add_argument("--df", type=float, default=3.0)
    sim.add_argument("--dist-eps", type=float, default=None,
                     help="epsilon parameter of the four-point construction")
    sim.add_argument("--method", required=True,
                     choices=["truncated", "iterated", "iterated-empirical",
                              "empirical-chebyshev", "empirical-benchmark"])
    sim.add_argument("--eps", type=float, default=1e-3)
    sim.add_argument("--v0", type=float, default=None)
    sim.add_argument("--delta0", type=float, default=0.0)
    sim.add_argument("--theta0", type=float, default=0.0)
    sim.add_argument("--k", type=int, default=6)
    sim.add_argument("--x", type=float, default=0.1)
    sim.add_argument("--eps-split", choices=["paper", "uniform"], default="paper")
    sim.add_argument("--replicates", "-R", type=int, required=True)
    sim.add_argument("--workers", type=int, default=1)
    _add_common(sim)

    low = sub.add_parser("lower-bounds",
                         help="worst-case lower bounds vs their upper curves")
    low.add_argument("--n", type=int, required=True)
    low.add_argument("--v", type=float, default=1.0)
    low.add_argument("--c", type=float, default=3.0)
    low.add_argument("--eps-grid", default=None)
    _add_common(low)

    return parser


# --- estimate ---------------------------------------------------------------


def _estimate(args, sample: Sample):
    """Return (point, half_width, two_sided_miss, feasible, note)."""
    eps = args.eps
    if not (0.0 < eps < 0.5):
        raise InvalidParameter("eps must lie in (0, 1/2)")
    jitter = JitterSource(args.seed) if args.jitter == "on" else None

    if args.method in ("truncated", "clipped"):
        if args.v0 is None:
            raise InvalidParameter("--v0 is required for this method")
        kind = TruncationKind.SMOOTH if args.method == "truncated" else TruncationKind.CLIPPED
        wf = width_prop32 if args.method == "truncated" else width_clipped
        alpha, half = wf(sample.n, args.v0, args.delta0, eps)
        point = truncated_mean(sample, args.theta0, alpha, kind)
        return point, half, 2.0 * eps, True, ""

    if args.method in ("iterated", "iterated-empirical"):
        if args.v0 is None:
            raise InvalidParameter("--v0 is required for this method")
        k = args.k if args.k is not None else 6
        x = (args.x if args.x is not None else 0.1,) * (k - 1)
        eps_list = split_eps(eps, k, args.eps_split)
        if args.method == "iterated":
            sched = schedule_known_delta0(sample.n, args.v0, args.delta0,
                                          eps_list, x, args.gamma)
            est = run_iterated(sample, sched, jitter=jitter, theta0=args.theta0)
        else:
            sched = schedule_empirical_start(sample.n, args.v0, eps_list, x,
                                             args.gamma)
            est = run_iterated(sample, sched, jitter=jitter)
        return est.point, est.half_width, est.miss_probability, True, ""

    if args.method == "last-step":
        if args.v0 is None:
            raise InvalidParameter("--v0 is required for this method")
        eps1 = args.eps1 if args.eps1 is not None else eps / 2.0
        eps2 = args.eps2 if args.eps2 is not None else eps / 2.0
        k = args.k if args.k is not None else 6
        x = (args.x if args.x is not None else 0.1,) * (k - 1)
        sched = schedule_empirical_start(sample.n, args.v0,
                                         split_eps(eps1, k, args.eps_split), x,
                                         args.gamma)
        first = run_iterated(sample, sched, jitter=jitter)
        if args.beta is not None:
            beta = args.beta
            w = width_prop14(sample.n, args.v0, beta, eps2, first.half_width)
        else:
            beta, w = default_beta(sample.n, args.v0, eps2, first.half_width)
        if not w.feasible:
            raise DomainError(
                f"last-step condition broken at eps2={eps2}: needs "
                f"2*delta1 <= width-scale (delta1={first.half_width:.6g}, "
                f"beta={beta:.6g}); raise eps2 or n"
            )
        cfg = LastStepConfig(beta=beta, eps2=eps2, theta1=first.point,
                             delta1=first.half_width, eps1=eps1, v0=args.v0)
        point = solve_root(sample, cfg)
        return point, w.half_width, 2.0 * (eps1 + eps2), True, ""

    if args.method == "kurtosis":
        if args.c is None:
            raise InvalidParameter("--c is required for this method")
        k = args.k if args.k is not None else 4
        xs = (0.5,) * (2 * k - 2) + (0.1,)
        if args.x is not None:
            xs = (args.x,) * (2 * k - 1)
        eps_list = (eps / (2 * k),) * (2 * k)
        theta1 = sample.mean() if args.theta0 is None else args.theta0
        mean_est, vint, _state = run_kurtosis_scheme(
            sample, theta1, args.c, eps_list, xs, jitter=jitter
        )
        note = f"variance_interval=[{_fmt(vint[0])},{_fmt(vint[1])}]"
        return (mean_est.point, mean_est.half_width,
                mean_est.miss_probability, True, note)

    if args.method == "lepski":
        est = adapt(sample, eps, V=args.V)
        return est.point, est.half_width, 2.0 * eps, True, "theoretical-only"

    raise InvalidParameter(f"unknown method {args.method!r}")


def cmd_estimate(args, argv, out) -> int:
    sample = read_observations(args.input)
    point, half, miss2, feasible, note = _estimate(args, sample)
    out.write(_manifest_line("estimate", argv) + "\n")
    if args.format == "csv":
        out.write("point,half_width,two_sided_miss,feasible,note\n")
        out.write(f"{_fmt(point)},{_fmt(half)},{_fmt(miss2)},"
                  f"{str(feasible).lower()},{note}\n")
    else:
        out.write(f"point          = {_fmt(point)}\n")
        out.write(f"half_width     = {_fmt(half)}"
                  + (" (theoretical-only)" if note == "theoretical-only" else "")
                  + "\n")
        out.write(f"two_sided_miss = {_fmt(miss2)}\n")
        out.write(f"feasible       = {str(feasible).lower()}\n")
        if note and note != "theoretical-only":
            out.write(f"note           = {note}\n")
    return EXIT_OK


# --- curves -----------------------------------------------------------------


def _curve_fn(name: str, args):
    n, v0, d0 = args.n, args.v0, args.delta0
    kappa = args.kappa if args.kappa is not None else args.c
    k, xv = args.k, args.x

    if name == "chebyshev":
        return lambda e: chebyshev_width(n, v0, e)
    if name == "gaussian-benchmark":
        return lambda e: gaussian_benchmark_width(n, v0, e)
    if name == "kurtosis-upper":
        return lambda e: kurtosis_upper_width(n, kappa, e) * math.sqrt(v0)
    if name == "fourth-moment":
        return lambda e: fourth_moment_width(n, kappa, e) * math.sqrt(v0)
    if name == "lower-variance":
        return lambda e: lower_bound_variance(n, v0, e)
    if name == "lower-kurtosis":
        return lambda e: lower_bound_kurtosis(n, args.c, e) * math.sqrt(v0)
    if name == "truncated":
        return lambda e: width_prop32(n, v0, d0, e).half_width
    if name == "clipped":
        return lambda e: width_clipped(n, v0, d0, e).half_width
    if name == "iterated":
        def f(e):
            eps_list = split_eps(e, k, args.eps_split)
            return schedule_known_delta0(
                n, v0, d0, eps_list, (xv,) * (k - 1), args.gamma
            ).half_width
        return f
    if name == "iterated-empirical":
        def f(e):
            eps_list = split_eps(e, k, args.eps_split)
            return schedule_empirical_start(
                n, v0, eps_list, (xv,) * (k - 1), args.gamma
            ).half_width
        return f
    if name == "last-step":
        def f(e):
            eps1, eps2 = e / 2.0, e / 2.0
            d1 = schedule_empirical_start(
                n, v0, split_eps(eps1, k, args.eps_split), (xv,) * (k - 1),
                args.gamma
            ).half_width
            _, w = default_beta(n, v0, eps2, d1)
            return w.half_width if w.feasible else math.inf
        return f
    if name == "kurtosis-scheme":
        def f(e):
            kk = 4
            xs = (0.5,) * (2 * kk - 2) + (0.1,)
            eps_list = (e / (2 * kk),) * (2 * kk)
            return zeta_bound(n, args.c, v0, d0, eps_list, xs)
        return f
    raise InvalidParameter(f"unknown curve name {name!r}")


def cmd_curves(args, argv, out) -> int:
    names = [t for t in args.curves.split(",") if t]
    fns = [(nm, _curve_fn(nm, args)) for nm in names]
    if args.eps_grid is not None:
        grid = _float_list(args.eps_grid)
    else:
        grid = list(default_eps_grid())
    if any(b >= a for a, b in zip(grid, grid[1:])):
        raise InvalidParameter("epsilon grid must be strictly decreasing")

    out.write(_manifest_line("curves", argv) + "\n")
    out.write("epsilon," + ",".join(names) + "\n")
    rows = []
    for e in grid:
        vals = []
        for _, fn in fns:
            try:
                vals.append(fn(e))
            except (DomainError, AdmissibilityError, InvalidParameter):
                vals.append(math.inf)
        rows.append((e, vals))
        out.write(_fmt(e) + "," + ",".join(_fmt(v) for v in vals) + "\n")

    if args.plot:
        if args.out is None:
            raise InvalidParameter("--plot requires --out")
        from .plotting import render_curves

        render_curves(args.out + ".png", names, rows,
                      title=f"half-width vs epsilon (n={args.n})")
    return EXIT_OK


# --- simulate ---------------------------------------------------------------


def _dist_spec(args):
    if args.dist == "gaussian":
        return Gaussian(args.m, args.v)
    if args.dist == "three-point":
        eta = args.eta
        if eta is None:
            raise InvalidParameter("--eta is required for three-point")
        return ThreePoint(v=args.v, eta=eta, n=args.n)
    if args.dist == "four-point":
        de = args.dist_eps if args.dist_eps is not None else args.eps
        return FourPoint(c=args.c, eps=de, n=args.n)
    if args.dist == "bernoulli":
        return Bernoulli(args.p)
    if args.dist == "student-t":
        return StudentT(args.df)
    raise InvalidParameter(f"unknown distribution {args.dist!r}")


def _sim_estimator(args, spec):
    eps = args.eps
    v0 = args.v0 if args.v0 is not None else spec.variance
    n = args.n
    if args.method == "empirical-chebyshev":
        w = chebyshev_width(n, v0, eps)
        return lambda s, _seed: (s.mean(), w)
    if args.method == "empirical-benchmark":
        w = gaussian_benchmark_width(n, v0, eps)
        return lambda s, _seed: (s.mean(), w)
    if args.method == "truncated":
        alpha, half = width_prop32(n, v0, args.delta0, eps)
        th0 = args.theta0
        return lambda s, _seed: (truncated_mean(s, th0, alpha), half)
    k, xv = args.k, args.x
    eps_list = split_eps(eps, k, args.eps_split)
    xs = (xv,) * (k - 1)
    if args.method == "iterated":
        sched = schedule_known_delta0(n, v0, args.delta0, eps_list, xs)
        th0 = args.theta0
        return lambda s, seed: (
            run_iterated(s, sched, jitter=JitterSource(seed), theta0=th0).point,
            sched.half_width,
        )
    sched = schedule_empirical_start(n, v0, eps_list, xs)
    return lambda s, seed: (
        run_iterated(s, sched, jitter=JitterSource(seed)).point,
        sched.half_width,
    )


def cmd_simulate(args, argv, out) -> int:
    spec = _dist_spec(args)
    estimator = _sim_estimator(args, spec)
    report = run_coverage(
        spec, estimator, args.n, args.replicates, args.seed,
        workers=args.workers, method_name=args.method,
    )
    out.write(_manifest_line("simulate", argv) + "\n")
    out.write("replicate,estimate,half_width,miss\n")
    for i in range(report.replicates):
        out.write(f"{i},{_fmt(float(report.estimates[i]))},"
                  f"{_fmt(float(report.half_widths[i]))},"
                  f"{int(report.miss_flags[i])}\n")
    summary = {
        "replicates": report.replicates,
        "misses": report.misses,
        "failures": report.failures,
        "miss_rate": report.miss_rate,
        "mean_half_width": report.mean_half_width,
        "digest": report.digest,
    }
    out.write("# summary " + json.dumps(summary, sort_keys=True,
                                        separators=(",", ":")) + "\n")
    return EXIT_OK


# --- lower-bounds -----------------------------------------------------------


def cmd_lower_bounds(args, argv, out) -> int:
    if args.eps_grid is not None:
        grid = _float_list(args.eps_grid)
    else:
        grid = list(default_eps_grid())
    out.write(_manifest_line("lower-bounds", argv) + "\n")
    out.write("epsilon,chebyshev,lower_variance,kurtosis_upper,lower_kurtosis\n")
    n, v, c = args.n, args.v, args.c
    for e in grid:
        def safe(fn):
            try:
                return fn()
            except DomainError:
                return math.inf
        row = [
            chebyshev_width(n, v, e),
            safe(lambda: lower_bound_variance(n, v, e)),
            safe(lambda: kurtosis_upper_width(n, c, e) * math.sqrt(v)),
            safe(lambda: lower_bound_kurtosis(n, c, e) * math.sqrt(v)),
        ]
        out.write(_fmt(e) + "," + ",".join(_fmt(x) for x in row) + "\n")
    return EXIT_OK


# --- entry point ------------------------------------------------------------


def run(argv: list) -> tuple[int, str]:
    """Run a command, returning (exit_code, output_text).  Used by the
    fixture machinery for byte-exact replays."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return (EXIT_USAGE if exc.code else EXIT_OK), ""
    buf = io.StringIO()
    try:
        code = {
            "estimate": cmd_estimate,
            "curves": cmd_curves,
            "simulate": cmd_simulate,
            "lower-bounds": cmd_lower_bounds,
        }[args.command](args, argv, buf)
    except NoRoot as exc:
        return EXIT_NO_ROOT, f"error: no root: {exc}\n"
    except (AdmissibilityError, DomainError, EmptyFamily) as exc:
        return EXIT_INFEASIBLE, f"error: infeasible: {exc}\n"
    except (InvalidParameter, OSError) as exc:
        return EXIT_USAGE, f"error: {exc}\n"
    text = buf.getvalue()
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
        return code, ""
    return code, text


def main(argv: list | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    code, text = run(argv)
    stream = sys.stdout if code == EXIT_OK else sys.stderr
    stream.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
