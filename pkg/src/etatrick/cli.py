"""Command-line harness: curve generation, duality reports, solver runs.

Subcommands
-----------
penalty-curve   per-|w| penalty values for separable penalties and methods
sparse-curve    vector penalty of unit-norm k-sparse weights, k = 1..d
duality-check   brute-force verification report for the closed-form pairs
solve           run one solver on synthetic or CSV data, write a trace
dropout-verify  Monte Carlo check of the masked-loss closed form
gen-data        write a synthetic standardized problem as CSV

Every CSV starts with comment lines echoing the tool version and the full
configuration; rerunning with identical flags reproduces the bytes exactly.
Infinite values serialize as the token ``inf``.  Exit codes: 0 success,
1 usage error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import functools
import math
import sys
from collections.abc import Sequence

import numpy as np

from . import __version__
from .dropout import (
    METHOD_GRAMMAR,
    MagnitudePruning,
    effective_penalty_vector,
    expected_linear_loss,
    mc_linear_loss,
    parse_method,
    pruning_schedule,
    scaled_effective_penalty,
)
from .duality import check_dual_pair
from .penalties import PENALTY_GRAMMAR, parse_penalty
from .solvers import (
    SOLVERS,
    Problem,
    SolverConfig,
    iht,
    solution_metrics,
    standardize,
)

_PENALTY_NAMES = {
    "l1", "lp", "lppow", "l0", "elasticnet", "huber", "logsum", "scad", "mcp", "hardthresh",
}
_METHOD_NAMES = {"standout", "vardrop", "hardconcrete", "magprune"}

_DEFAULT_ZOO = [
    "l1",
    "lp:p=1.5",
    "lppow:p=0.5",
    "l0",
    "elasticnet:theta=0.5",
    "huber:eps=1",
    "logsum:eps=2",
    "scad:a=3,lambda=1",
    "mcp:a=1,lambda=1",
    "hardthresh:k=2",
]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit code 1 instead of argparse's 2
        raise UsageError(message)


def _fmt(x: float) -> str:
    return repr(float(x))


def _header_lines(command: str, args: argparse.Namespace, skip=("func",)) -> list[str]:
    lines = [f"etatrick {__version__}", f"command: {command}"]
    for key in sorted(vars(args)):
        if key in skip or key == "command":
            continue
        value = getattr(args, key)
        if callable(value):
            continue
        lines.append(f"{key} = {value}")
    return lines


def _write_csv(path: str | None, header_lines, columns, rows) -> None:
    fh = sys.stdout if path in (None, "-") else open(path, "w")
    try:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
    finally:
        if fh is not sys.stdout:
            fh.close()


def _parse_grid(spec: str) -> np.ndarray:
    try:
        lo, hi, step = (float(part) for part in spec.split(":"))
    except ValueError as exc:
        raise UsageError(f"bad --grid {spec!r}, expected lo:hi:step") from exc
    if step <= 0 or hi < lo:
        raise UsageError(f"bad --grid {spec!r}: need step > 0 and hi >= lo")
    count = int(round((hi - lo) / step))
    return np.round(lo + step * np.arange(count + 1), 12)


def _label(item: str) -> str:
    """CSV column label for a spec string; `;` keeps labels comma-free."""
    return item.strip().replace(",", ";")


def _split_weight(text: str) -> tuple[str, float | None]:
    """Pull an optional ``weight=`` key out of a penalty spec string."""
    name, sep, body = text.partition(":")
    if not sep:
        return text, None
    weight = None
    kept = []
    for item in body.replace(";", ",").split(","):
        key, _, value = item.partition("=")
        if key.strip().lower() == "weight":
            weight = float(value)
        else:
            kept.append(item)
    rebuilt = name if not kept else name + ":" + ",".join(kept)
    return rebuilt, weight


def _curve_item(text: str, default_weight: float):
    """Resolve one curve item to (label, scalar_fn, vector_fn, separable)."""
    base = text.strip().partition(":")[0].lower()
    if base in _PENALTY_NAMES:
        stripped, weight = _split_weight(text)
        penalty = parse_penalty(stripped)
        scale = default_weight if weight is None else weight
        if penalty.separable:
            scalar = lambda w: scale * penalty.omega_scalar(w)
        else:
            scalar = None
        vector = lambda w: scale * penalty.omega(w)
        return _label(text), scalar, vector, penalty.separable
    if base in _METHOD_NAMES:
        method = parse_method(text)
        if isinstance(method, MagnitudePruning):
            return _label(text), None, lambda w: effective_penalty_vector(method, w), False
        scalar = functools.lru_cache(maxsize=None)(
            lambda w: scaled_effective_penalty(method, w)
        )
        vector = lambda w: float(sum(scalar(abs(float(x))) for x in np.atleast_1d(w)))
        return _label(text), scalar, vector, True
    raise UsageError(f"unknown penalty or method {text!r}")


def cmd_penalty_curve(args) -> int:
    if not args.items:
        raise UsageError("penalty-curve needs at least one penalty or method")
    grid = _parse_grid(args.grid)
    resolved = [_curve_item(item, args.lam) for item in args.items]
    for label, scalar, _, separable in resolved:
        if scalar is None or not separable:
            raise UsageError(
                f"{label!r} is not separable; penalty-curve plots per-coordinate "
                "penalties only (use sparse-curve for vector-level penalties)"
            )
    columns = ["abs_w"] + [label for label, *_ in resolved]
    rows = (
        [_fmt(w)] + [_fmt(scalar(float(w))) for _, scalar, _, _ in resolved]
        for w in grid
    )
    _write_csv(args.out, _header_lines("penalty-curve", args), columns, rows)
    return 0


def cmd_sparse_curve(args) -> int:
    if not args.items:
        raise UsageError("sparse-curve needs at least one penalty or method")
    d = args.dim
    resolved = [_curve_item(item, args.lam) for item in args.items]
    columns = ["k"] + [label for label, *_ in resolved]
    rows = []
    for k in range(1, d + 1):
        w = np.zeros(d)
        w[:k] = 1.0 / math.sqrt(k)
        rows.append([str(k)] + [_fmt(vector(w)) for _, _, vector, _ in resolved])
    _write_csv(args.out, _header_lines("sparse-curve", args), columns, rows)
    return 0


def cmd_duality_check(args) -> int:
    items = args.items or list(_DEFAULT_ZOO)
    reports = []
    for item in items:
        penalty = parse_penalty(item)
        reports.append(
            check_dual_pair(penalty, tol=args.tol, argmin_rtol=args.argmin_rtol, name=item)
        )
    columns = ["penalty", "n_points", "max_omega_dev", "max_argmin_rel_err", "passed"]
    rows = [
        [r.name, str(r.n_points), _fmt(r.max_omega_dev), _fmt(r.max_argmin_rel_err),
         str(int(r.passed))]
        for r in reports
    ]
    _write_csv(args.out, _header_lines("duality-check", args), columns, rows)
    failed = [r.name for r in reports if not r.passed]
    if failed:
        print(f"duality-check FAILED for: {', '.join(failed)}", file=sys.stderr)
        return 2
    return 0


def gen_synthetic(n: int, d: int, k: int, noise_sigma: float, seed: int):
    """Standardized Gaussian design with a k-sparse unit-magnitude truth.

    Returns:
        (Problem, w_true); y = X w_true + noise_sigma * standard normal.
    """
    if not 0 <= k <= d:
        raise ValueError(f"need 0 <= k <= d, got k={k}, d={d}")
    rng = np.random.default_rng(seed)
    X, _ = standardize(rng.standard_normal((n, d)))
    w_true = np.zeros(d)
    support = rng.choice(d, size=k, replace=False)
    w_true[support] = rng.choice([-1.0, 1.0], size=k)
    y = X @ w_true + noise_sigma * rng.standard_normal(n)
    return Problem(X, y), w_true


def load_csv_matrix(path: str) -> np.ndarray:
    """Read a CSV written by this tool: comment lines, one header row, data."""
    rows = []
    with open(path) as fh:
        header_seen = False
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if not header_seen:
                header_seen = True
                continue
            rows.append([float(x) for x in line.split(",")])
    return np.asarray(rows)


def _parse_kv_spec(text: str, int_keys=("n", "d", "k")) -> dict:
    out = {}
    for item in text.split(","):
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"bad key=value item {item!r}")
        key = key.strip()
        out[key] = int(value) if key in int_keys else float(value)
    return out


def _load_problem(args) -> tuple[Problem, np.ndarray | None]:
    if args.synthetic:
        spec = _parse_kv_spec(args.synthetic)
        return gen_synthetic(
            n=spec.get("n", 80),
            d=spec.get("d", 128),
            k=spec.get("k", 5),
            noise_sigma=spec.get("noise", 0.0),
            seed=args.seed,
        )
    if args.data_x and args.data_y:
        X = load_csv_matrix(args.data_x)
        y = load_csv_matrix(args.data_y).ravel()
        X, _ = standardize(X)
        w_true = None
        if args.data_wtrue:
            w_true = load_csv_matrix(args.data_wtrue).ravel()
        return Problem(X, y), w_true
    raise UsageError("solve needs either --synthetic or --data-x/--data-y")


def cmd_solve(args) -> int:
    problem, w_true = _load_problem(args)
    if args.solver not in SOLVERS:
        raise UsageError(f"unknown solver {args.solver!r}; choose from {sorted(SOLVERS)}")
    config = SolverConfig(
        lam=args.lam,
        step=args.step,
        step_schedule=args.step_schedule,
        iters=args.iters,
        seed=args.seed,
        mask_family=args.mask,
        log_every=args.log_every,
        zero_tol=args.zero_tol,
        w_init=args.w_init,
    )
    if args.solver == "iht":
        if args.k is None and args.k_final is None:
            raise UsageError("iht needs --k (fixed) or --k-final (cubic schedule)")
        if args.k_final is not None:
            k_arg = lambda t, total: pruning_schedule(t, total, args.k_final, problem.d)
        else:
            k_arg = args.k
        trace = iht(problem, k_arg, config)
    else:
        if args.solver in ("dropout_sgd", "additive_reparam_prox") and args.mask is None:
            raise UsageError(f"{args.solver} needs --mask (binary, gaussian, or ones)")
        if args.penalty is None:
            raise UsageError(f"{args.solver} needs --penalty")
        penalty = parse_penalty(args.penalty)
        trace = SOLVERS[args.solver](problem, penalty, config)

    if args.out:
        with open(args.out, "w") as fh:
            trace.to_csv(fh, _header_lines("solve", args), include_timing=args.timing)
    metrics = solution_metrics(trace, w_true, config.zero_tol)
    print(f"final risk      : {trace.risk[-1]:.6g}")
    print(f"final objective : {trace.objective[-1]:.6g}")
    print(f"nonzeros        : {metrics.nnz} / {problem.d}")
    if w_true is not None:
        print(f"support precision/recall: {metrics.precision:.3f} / {metrics.recall:.3f}")
        print(f"exact support   : {metrics.exact_support}")
        print(f"normalized mse  : {metrics.nmse:.3g}")
    return 0


def cmd_dropout_verify(args) -> int:
    problem, _ = gen_synthetic(args.n, args.d, max(args.d // 4, 1), 0.1, args.seed)
    rng = np.random.default_rng(args.seed + 1)
    w = rng.standard_normal(args.d)
    alpha = rng.uniform(0.2, 0.95, args.d)
    if args.mask == "bernoulli":
        # Biased masks: check through the mean-rescaling reduction, under
        # which E L(s .* w) equals the unbiased closed form at alpha-tilde
        # and w-tilde = alpha .* w (Bernoulli has mu = alpha, alpha_t = alpha).
        closed = expected_linear_loss(problem.X, problem.y, alpha * w, alpha)
    else:
        closed = expected_linear_loss(problem.X, problem.y, w, alpha)
    mc, se = mc_linear_loss(
        problem.X, problem.y, w, alpha, args.samples, seed=args.seed + 2, mask_kind=args.mask
    )
    z = (mc - closed) / se if se > 0 else 0.0
    lines = _header_lines("dropout-verify", args)
    columns = ["closed_form", "monte_carlo", "stderr", "z_score"]
    rows = [[_fmt(closed), _fmt(mc), _fmt(se), _fmt(z)]]
    _write_csv(args.out, lines, columns, rows)
    print(f"closed form {closed:.8g}  mc {mc:.8g} +- {se:.3g}  z = {z:+.3f}")
    if abs(z) > 4.0:
        print("dropout-verify FAILED: |z| > 4", file=sys.stderr)
        return 2
    return 0


def cmd_gen_data(args) -> int:
    problem, w_true = gen_synthetic(args.n, args.d, args.k, args.noise, args.seed)
    header = _header_lines("gen-data", args)
    _write_csv(
        args.out_x, header, [f"x_{j}" for j in range(problem.d)],
        ([_fmt(v) for v in row] for row in problem.X),
    )
    _write_csv(args.out_y, header, ["y"], ([[_fmt(v)] for v in problem.y]))
    if args.out_wtrue:
        _write_csv(args.out_wtrue, header, ["w_true"], ([[_fmt(v)] for v in w_true]))
    return 0


def _add_common(p: argparse.ArgumentParser, lam_default: float = 1.0) -> None:
    p.add_argument("--lambda", dest="lam", type=float, default=lam_default,
                   help="regularization weight (default %(default)s)")
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default %(default)s)")
    p.add_argument("--out", default=None, help="output CSV path (default stdout)")
    p.add_argument("--config", default=None,
                   help="flat key=value file supplying defaults for any flag")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="etatrick", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"etatrick {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser(
        "penalty-curve",
        help="per-|w| curves of separable penalties / method effective penalties",
        description="Columns hold weight * omega(|w|) for penalties (weight= key, "
        "default --lambda) and lambda * omega_eff(|w|) for methods.\n\n"
        + PENALTY_GRAMMAR + "\n" + METHOD_GRAMMAR,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("items", nargs="*", help="penalty/method specs")
    p.add_argument("--grid", default="0:5:0.01", help="|w| grid lo:hi:step (default %(default)s)")
    _add_common(p)
    p.set_defaults(func=cmd_penalty_curve)

    p = sub.add_parser("sparse-curve",
                       help="vector penalty of unit-norm k-sparse weights, k = 1..d")
    p.add_argument("items", nargs="*", help="penalty/method specs")
    p.add_argument("--dim", type=int, default=32, help="ambient dimension (default %(default)s)")
    _add_common(p)
    p.set_defaults(func=cmd_sparse_curve)

    p = sub.add_parser("duality-check", help="verify closed-form dual pairs by brute force")
    p.add_argument("items", nargs="*", help="penalty specs (default: the full zoo)")
    p.add_argument("--tol", type=float, default=1e-6, help="omega tolerance (default %(default)s)")
    p.add_argument("--argmin-rtol", type=float, default=1e-4,
                   help="relative argmin tolerance (default %(default)s)")
    _add_common(p)
    p.set_defaults(func=cmd_duality_check)

    p = sub.add_parser("solve", help="run one solver, write a trace CSV")
    p.add_argument("--synthetic", default=None, help="n=..,d=..,k=..[,noise=..]")
    p.add_argument("--data-x", default=None, help="CSV design matrix")
    p.add_argument("--data-y", default=None, help="CSV target vector")
    p.add_argument("--data-wtrue", default=None, help="CSV ground-truth weights")
    p.add_argument("--solver", required=True, help=f"one of {sorted(SOLVERS)}")
    p.add_argument("--penalty", default=None, help="penalty spec string")
    p.add_argument("--k", type=int, default=None, help="fixed sparsity for iht")
    p.add_argument("--k-final", type=int, default=None, help="final k of the cubic pruning schedule")
    p.add_argument("--step", type=float, default=0.1, help="step size (default %(default)s)")
    p.add_argument("--step-schedule", default="constant", choices=["constant", "linear"])
    p.add_argument("--iters", type=int, default=100, help="iterations (default %(default)s)")
    p.add_argument("--mask", default=None, choices=["binary", "gaussian", "ones"],
                   help="mask family for the dropout solvers")
    p.add_argument("--log-every", type=int, default=1)
    p.add_argument("--zero-tol", type=float, default=1e-8)
    p.add_argument("--w-init", default="zeros", choices=["zeros", "gaussian"])
    p.add_argument("--timing", action="store_true",
                   help="include wall-clock column (breaks byte-reproducibility)")
    _add_common(p, lam_default=1e-2)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("dropout-verify",
                       help="Monte Carlo check of the masked-loss closed form")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--d", type=int, default=10)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--mask", default="gaussian", choices=["binary", "gaussian", "bernoulli"])
    _add_common(p)
    p.set_defaults(func=cmd_dropout_verify)

    p = sub.add_parser("gen-data", help="write a synthetic standardized problem as CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--out-x", required=True)
    p.add_argument("--out-y", required=True)
    p.add_argument("--out-wtrue", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_gen_data)

    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Read --config key=value pairs and fold them in as flag defaults."""
    path = None
    for i, arg in enumerate(argv):
        if arg == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif arg.startswith("--config="):
            path = arg.partition("=")[2]
    if path is None:
        return argv
    overrides = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise UsageError(f"bad config line {raw.rstrip()!r}")
            overrides[key.strip()] = value.strip()
    if not overrides:
        return argv
    # Fold config pairs in as if they preceded the explicit flags.
    extra: list[str] = []
    for key, value in overrides.items():
        flag = "--" + key.replace("_", "-")
        if flag in argv:
            continue  # explicit flags win
        extra += [flag, value]
    sub_index = next((i for i, a in enumerate(argv) if not a.startswith("-")), 0)
    return argv[: sub_index + 1] + extra + argv[sub_index + 1 :]


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        if argv and not argv[0].startswith("-"):
            argv = _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
