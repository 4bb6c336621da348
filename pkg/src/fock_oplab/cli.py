"""Command-line front end: ``fock-oplab {classify,norm,iterate,dynamics,verify}``.

Every command writes a JSON report (stdout or ``--out``) holding the config
echo, the results, the software version, wall time, warnings and the seed.
Exit codes: 0 success, 1 invalid configuration, 2 hypothesis violated,
undecidable or non-convergent input, 3 failed verification or internal
inconsistency.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .acceptance import CRITERIA
from .dynamics import (
    DynamicsConfig,
    angle_criterion_ratio,
    isometry_report,
    scaled_iterate_norms,
    supercyclicity_report,
)
from .errors import ConfigInvalid, FockOpLabError, InternalInconsistency
from .fockspace import Flavor, fock_norm, membership
from .iterates import iterate_coeffs, limit_coefficients, phi_n
from .jsonio import (
    context_from_json,
    dumps,
    function_from_json,
    function_to_json,
    operator_from_json,
    operator_to_json,
    parse_p,
)
from .wcomp import classify
from .complexfn import ExpQuadratic

EXIT_OK, EXIT_CONFIG, EXIT_HYPOTHESIS, EXIT_FAILED = 0, 1, 2, 3
SUITES = ("supercyclicity", "scaled-norms", "angle", "isometry")


def _load_json(path: str | None, what: str) -> dict:
    if not path:
        raise ConfigInvalid(f"--{what} is required")
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as e:
        raise ConfigInvalid(f"{what} file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ConfigInvalid(f"{what} file is not valid JSON: {e}") from e


def worker_count(requested: int | None = None) -> int:
    """Worker cap from ``FOCK_OPLAB_THREADS`` (default 1)."""
    env = os.environ.get("FOCK_OPLAB_THREADS")
    cap = 1
    if env:
        try:
            cap = max(1, int(env))
        except ValueError as e:
            raise ConfigInvalid(f"FOCK_OPLAB_THREADS must be an integer, got {env!r}") from e
    return min(cap, requested) if requested else cap


def _write_csv(path: str | None, header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in row])
    text = buf.getvalue()
    if path:
        Path(path).write_text(text)
    return text


# ----------------------------------------------------------------------------
# commands


def cmd_classify(args, config: dict) -> dict:
    W = operator_from_json(_load_json(args.op, "op"))
    config["op"] = operator_to_json(W)
    return classify(W).to_json()


def cmd_norm(args, config: dict) -> dict:
    f = function_from_json(_load_json(args.function, "function"))
    spec = {"p": parse_p(args.p) if args.p is not None else 2, "alpha": args.alpha if args.alpha is not None else 1.0}
    if args.flavor:
        spec["flavor"] = args.flavor
    ctx = context_from_json(spec)
    if args.tol < 1e-12:
        raise ConfigInvalid("--tol must be at least 1e-12")
    config.update({"function": function_to_json(f), **ctx.to_json(), "tol": args.tol, "method": args.method})
    res = fock_norm(f, ctx, tol=args.tol, method=args.method)
    return {**res.to_json(), "membership": membership(f, ctx).value}


def cmd_iterate(args, config: dict) -> tuple[dict, str | None]:
    W = operator_from_json(_load_json(args.op, "op"))
    if args.n < 1:
        raise ConfigInvalid("--n must be positive")
    radius, size = args.eval_grid
    size = int(size)
    if radius <= 0 or size < 2:
        raise ConfigInvalid("--eval-grid needs a positive radius and at least 2 points")
    config.update({"op": operator_to_json(W), "n": args.n, "eval_grid": [radius, size]})
    c0, c1, c2 = limit_coefficients(W)
    x = np.linspace(-radius, radius, size)
    z = (x[:, None] + 1j * x[None, :]).ravel()
    z = z[np.abs(z) <= radius * (1 + 1e-12)]
    z0 = W.phi.fixed_point
    w = z - z0
    lam = W.lam
    a2 = iterate_coeffs(W, 1).c2n  # S2 = 1 at n = 1
    limit = np.exp(c0 + c1 * z + c2 * z * z)
    rows, coeffs = [], []
    for n in range(1, args.n + 1):
        ic = iterate_coeffs(W, n)
        # difference of exponents between the n-th scaled iterate of 1 and its limit
        d = -ic.dg_z0 * lam**n / (1 - lam) * w - a2 * lam ** (2 * n) / (1 - lam * lam) * w * w
        dev = float(np.max(np.abs(limit * np.expm1(d))))
        rows.append((n, ic.c0n.real, ic.c0n.imag, ic.c1n.real, ic.c1n.imag, ic.c2n.real, ic.c2n.imag, dev))
        coeffs.append({**ic.to_json(), "sup_deviation": dev})
    csv_text = _write_csv(
        args.csv,
        ["n", "re_c0n", "im_c0n", "re_c1n", "im_c1n", "re_c2n", "im_c2n", "sup_deviation"],
        rows,
    )
    results = {
        "fixed_point": z0,
        "phi_n": {"a": phi_n(W.phi, args.n).a, "lambda": phi_n(W.phi, args.n).lam},
        "limits": {"c0": c0, "c1": c1, "c2": c2, "c0_source": "closed-form limit of c0n"},
        "iterates": coeffs,
    }
    return results, None if args.csv else csv_text


def cmd_dynamics(args, config: dict) -> dict:
    W = operator_from_json(_load_json(args.op, "op"))
    if args.suite not in SUITES:
        raise ConfigInvalid(f"--suite must be one of {SUITES}")
    try:
        cfg = DynamicsConfig(N=args.N)
    except ValueError as e:
        raise ConfigInvalid(str(e)) from e
    config.update({"op": operator_to_json(W), "suite": args.suite, "N": args.N})
    seqs = []
    if args.suite == "supercyclicity":
        rep = supercyclicity_report(W, cfg)
        seqs = rep.sequences
        results = rep.to_json()
    elif args.suite == "isometry":
        results = isometry_report(W).to_json()
    else:
        fn = scaled_iterate_norms if args.suite == "scaled-norms" else angle_criterion_ratio
        seq = fn(W, ExpQuadratic(), args.N)
        seqs = [seq]
        results = seq.to_json()
    if args.csv:
        _write_csv(args.csv, ["sequence", "n", "value", "log_value"], (r for s in seqs for r in s.csv_rows()))
    return results


def cmd_verify(args, config: dict) -> tuple[dict, bool]:
    only = sorted(CRITERIA) if not args.only else [int(k) for k in args.only.split(",")]
    for k in only:
        if k not in CRITERIA:
            raise ConfigInvalid(f"unknown criterion {k}")
    config["criteria"] = only
    workers = worker_count(len(only))
    config["workers"] = workers
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(lambda k: CRITERIA[k](args.seed), only))
    for r in results:
        print(r.line(), file=sys.stderr)
    ok = all(r.ok for r in results)
    return {"all_passed": ok, "criteria": [r.to_json() for r in results]}, ok


# ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fock-oplab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"fock-oplab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        p.add_argument("--seed", type=int, default=0)
        return p

    p = common(sub.add_parser("classify", help="classify an operator"))
    p.add_argument("--op", help="operator JSON file")

    p = common(sub.add_parser("norm", help="Fock norm of a function"))
    p.add_argument("--function", help="function JSON file")
    p.add_argument("--p", type=str, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--flavor", choices=[f.value for f in Flavor])
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--method", choices=["auto", "exact", "quadrature", "grid"], default="auto")

    p = common(sub.add_parser("iterate", help="closed-form iterate coefficients as CSV"))
    p.add_argument("--op", help="operator JSON file")
    p.add_argument("--n", type=int, default=32)
    p.add_argument("--eval-grid", type=float, nargs=2, default=[2.0, 16], metavar=("RADIUS", "SIZE"))
    p.add_argument("--csv", help="CSV output path (default: stdout, report to --out)")

    p = common(sub.add_parser("dynamics", help="non-supercyclicity evidence"))
    p.add_argument("--op", help="operator JSON file")
    p.add_argument("--suite", default="supercyclicity", choices=SUITES)
    p.add_argument("--N", type=int, default=64)
    p.add_argument("--csv", help="CSV path for the sequences")

    p = common(sub.add_parser("verify", help="run the acceptance suite"))
    p.add_argument("--only", help="comma-separated criterion numbers")
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config: dict = {"command": args.command, "seed": args.seed}
    t0 = time.perf_counter()
    code = EXIT_OK
    stdout_extra = None
    error = None
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            worker_count()
            if args.command == "classify":
                results = cmd_classify(args, config)
            elif args.command == "norm":
                results = cmd_norm(args, config)
            elif args.command == "iterate":
                results, stdout_extra = cmd_iterate(args, config)
            elif args.command == "dynamics":
                results = cmd_dynamics(args, config)
            else:
                results, ok = cmd_verify(args, config)
                code = EXIT_OK if ok else EXIT_FAILED
        except ConfigInvalid as e:
            code, error, results = EXIT_CONFIG, e, None
        except InternalInconsistency as e:
            code, error, results = EXIT_FAILED, e, None
        except FockOpLabError as e:
            # HypothesisViolated, IndeterminateLiminal, NonConvergent and the
            # other "valid input, outside the method's hypotheses" errors
            code, error, results = EXIT_HYPOTHESIS, e, None
        except (ValueError, TypeError) as e:
            code, error, results = EXIT_CONFIG, e, None
    report = {
        "config": config,
        "results": results,
        "version": __version__,
        "wall_time": time.perf_counter() - t0,
        "warnings": [str(w.message) for w in caught],
        "seed": args.seed,
    }
    if error is not None:
        report["error"] = {"type": type(error).__name__, "message": str(error)}
        print(f"error: {type(error).__name__}: {error}", file=sys.stderr)
    text = dumps(report)
    if args.out:
        Path(args.out).write_text(text + "\n")
    if stdout_extra is not None:
        sys.stdout.write(stdout_extra)
    elif not args.out:
        print(text)
    return code


def main(argv=None) -> None:
    sys.exit(run(argv))


__all__ = ["run", "main", "build_parser", "worker_count"]
