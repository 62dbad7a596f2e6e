"""Command-line front end.

Exit codes: 0 success, 1 a verification check failed, 2 usage or domain
error (a JSON error document is printed on stdout).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from typing import Optional, Sequence

from .channel import ChannelParams
from .corners import corner_points, region_boundary
from .distributions import DistributionSpec, SampleSet
from .errors import GICError, ParameterError
from .lemmas import LEMMA_IDS, ExperimentConfig, run_lemmas
from .measures import entropy, entropy_knn

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
LN2 = math.log(2.0)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _write_atomic(path: str, data) -> None:
    mode = "wb" if isinstance(data, bytes) else "w"
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".gic-", suffix=".tmp")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, path: Optional[str]) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        _write_atomic(path, text)


def _channel(args) -> ChannelParams:
    missing = [f for f in ("p1", "p2", "noise", "a") if getattr(args, f) is None]
    if missing:
        raise ParameterError([(f, None, "required") for f in missing])
    return ChannelParams(args.p1, args.p2, args.noise, args.a, args.b)


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("GIC_SEED")
    if env is None or env == "":
        return 0
    try:
        seed = int(env)
    except ValueError:
        raise UsageError(f"GIC_SEED must be an integer, got {env!r}") from None
    if seed < 0:
        raise UsageError("GIC_SEED must be non-negative")
    return seed


def _read_input(path: Optional[str]) -> str:
    if path is None:
        raise UsageError("--in is required")
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load_spec(text: str) -> DistributionSpec:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"input is not valid JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise UsageError("distribution JSON must be an object")
    return DistributionSpec.from_dict(data)


# -- commands -------------------------------------------------------------------

def cmd_corners(args) -> int:
    cp = corner_points(_channel(args))
    _emit(_dumps(cp.to_dict(args.units)), args.out)
    return EXIT_OK


def cmd_region(args) -> int:
    boundary = region_boundary(_channel(args))
    lines = ["r1,r2,certified"]
    for r1, r2, cert in boundary.rows(args.units):
        lines.append(f"{r1!r},{r2!r},{str(cert).lower()}")
    _emit("\n".join(lines) + "\n", args.out)
    if args.plot:
        from .plotting import plot_region

        plot_region(boundary, args.plot, args.units)
    return EXIT_OK


def cmd_entropy(args) -> int:
    text = _read_input(args.inp)
    scale = 1.0 / LN2 if args.units == "bits" else 1.0
    if text.lstrip().startswith("{"):
        spec = _load_spec(text)
        value = entropy(spec)
        doc = {"entropy": value * scale, "method": "quadrature", "dim": spec.dim, "kind": spec.kind}
    else:
        samples = SampleSet.from_csv(text, header=args.header)
        if args.dims:
            try:
                cols = [int(c) - 1 for c in args.dims.split(",")]
            except ValueError:
                raise UsageError("--dims takes comma-separated 1-based column numbers") from None
            if any(c < 0 or c >= samples.dim for c in cols):
                raise UsageError(f"--dims out of range for {samples.dim} columns")
            samples = SampleSet(samples.points[:, cols])
        est = entropy_knn(samples, k=args.k, on_duplicates=args.duplicates, seed=_seed(args))
        doc = {"entropy": est.value * scale, "stderr": est.stderr * scale, "method": "knn",
               "k": est.k, "n": est.n, "dim": samples.dim}
    doc["units"] = args.units
    _emit(_dumps(doc), args.out)
    return EXIT_OK


def cmd_knothe(args) -> int:
    from .transport import (
        build_knothe_map,
        entropy_change_of_variables_check,
        jacobian_diagnostics,
        pushforward_ks,
        stein_identity_check,
    )

    spec = _load_spec(_read_input(args.inp))
    tmap = build_knothe_map(spec)
    seed = _seed(args)
    samples = args.samples
    diag = jacobian_diagnostics(tmap, samples, seed)
    stein = stein_identity_check(tmap, tol=args.tol if args.tol is not None else 0.0, samples=samples, seed=seed)
    cov = entropy_change_of_variables_check(tmap, tol=args.tol if args.tol is not None else 1e-3)
    ks = pushforward_ks(tmap, min(samples, 100_000), seed)
    doc = {
        "dim": tmap.dim,
        "nodes": tmap.nodes,
        "cond_nodes": tmap.cond_nodes,
        "span_sigma": tmap.span,
        "source_variance": tmap.source.power,
        "jacobian": diag.to_dict(),
        "stein_check": stein.to_dict(),
        "change_of_variables_check": cov.to_dict(),
        "pushforward_ks": ks,
    }
    if args.out:
        if args.out.endswith(".npz"):
            folder = os.path.dirname(os.path.abspath(args.out))
            fd, tmp = tempfile.mkstemp(dir=folder, prefix=".gic-", suffix=".npz")
            os.close(fd)
            tmap.save_npz(tmp)
            os.replace(tmp, args.out)
        else:
            _write_atomic(args.out, tmap.to_csv())
    _emit(_dumps(doc), args.json)
    if args.plot:
        from .plotting import plot_knothe

        plot_knothe(tmap, args.plot)
    return EXIT_OK if stein.passed and cov.passed else EXIT_FAIL


def cmd_verify(args) -> int:
    ids = [s.strip() for s in args.lemma.split(",") if s.strip()]
    unknown = [i for i in ids if i != "all" and i not in LEMMA_IDS]
    if unknown or not ids:
        raise UsageError(f"unknown lemma id {', '.join(unknown) or '(empty)'}; "
                         f"choose from {', '.join(LEMMA_IDS)} or all")
    kwargs = {"seed": _seed(args)}
    if args.samples is not None:
        kwargs["samples"] = args.samples
    if args.tol is not None:
        kwargs["tolerance"] = args.tol
    config = ExperimentConfig(**kwargs)
    if args.a is not None or args.p1 is not None:
        config = ExperimentConfig(**kwargs, channel=_channel(args))
    reports = run_lemmas(ids, config)
    doc = {
        "seed": config.seed,
        "samples": config.samples,
        "tolerance": config.tolerance,
        "pass": all(r.passed for r in reports),
        "reports": [r.to_dict() for r in reports],
    }
    _emit(_dumps(doc), args.json)
    return EXIT_OK if doc["pass"] else EXIT_FAIL


# -- parser ---------------------------------------------------------------------------

def _add_channel(p):
    g = p.add_argument_group("channel")
    g.add_argument("--p1", type=float)
    g.add_argument("--p2", type=float)
    g.add_argument("--noise", type=float)
    g.add_argument("--a", type=float)
    g.add_argument("--b", type=float, default=0.0)


def _units(p):
    p.add_argument("--units", choices=("nats", "bits"), default="nats")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gic", description="Gaussian Z-interference channel corner points and "
                                             "numerical checks of the supporting inequalities.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("corners", help="corner points of the capacity region as JSON")
    _add_channel(p)
    _units(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_corners)

    p = sub.add_parser("region", help="outer-bound vertices as CSV (r1,r2,certified)")
    _add_channel(p)
    _units(p)
    p.add_argument("--out")
    p.add_argument("--plot", metavar="PATH", help="also render the region (.png, .pdf or .svg)")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("entropy", help="differential entropy of a distribution JSON or a sample CSV")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out")
    _units(p)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--dims", help="comma-separated 1-based CSV columns to use")
    p.add_argument("--header", action="store_true", help="CSV has a header row")
    p.add_argument("--duplicates", choices=("fail", "jitter"), default="fail")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("knothe", help="triangular transport map onto a distribution JSON")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", help="map table (.csv, or .npz for binary)")
    p.add_argument("--json", help="diagnostics JSON path (default stdout)")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--plot", metavar="PATH", help="also render the map components")
    p.set_defaults(func=cmd_knothe)

    p = sub.add_parser("verify", help="run inequality checks; exit 1 if any fails")
    p.add_argument("--lemma", default="all", help=f"one or more of {', '.join(LEMMA_IDS)}, or all")
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--json", help="report path (default stdout)")
    _add_channel(p)
    p.set_defaults(func=cmd_verify)
    return parser


def _error_doc(kind: str, message: str, violations=None) -> str:
    err = {"type": kind, "message": message}
    if violations:
        err["violations"] = [{"field": f, "value": v if not isinstance(v, float) or math.isfinite(v) else str(v),
                              "reason": r} for f, v, r in violations]
    return _dumps({"error": err})


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        sys.stdout.write(_error_doc("usage", str(exc)))
    except ParameterError as exc:
        sys.stdout.write(_error_doc(type(exc).__name__, str(exc), exc.violations))
    except (GICError, ValueError) as exc:
        sys.stdout.write(_error_doc(type(exc).__name__, str(exc)))
    except OSError as exc:
        sys.stdout.write(_error_doc("io", f"{exc.filename or ''}: {exc.strerror}"))
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
