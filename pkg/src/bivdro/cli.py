"""Command-line front end.

Every command prints one JSON document (or writes CSV / SDPA files) and
records a run manifest. Exit codes: 0 ok, 2 bad input, 3 numeric or
infeasible, 4 I/O.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .bivariate import dual_certificate, verify_duality, worst_case
from .errors import (
    BivdroError,
    CertificateUnavailable,
    ConsistencyError,
    DomainError,
    OracleInfeasible,
)
from .moments import MomentSpec, from_correlation, require_valid
from .newsvendor import SWEEP_HEADER, solve, sweep_row
from .oracle import GridConfig, dominance_tolerance, lp_worst_case, max_prob_below_result
from .sampling import random_instance
from .sdp import PiecewiseQuadratic, build_sdp, export_sdpa

OUT_DIR_ENV = "BIVDRO_OUT_DIR"

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def _clean(obj):
    """Replace non-finite floats by None and numpy scalars by Python ones."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, allow_nan=False)


def resolve_out(path: str | None) -> Path | None:
    if path is None:
        return None
    p = Path(path)
    base = os.environ.get(OUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def _replay_argv(args, argv) -> list:
    """argv with --out pinned to its resolved path so a replay ignores the environment."""
    out = getattr(args, "out", None)
    if out is None:
        return list(argv)
    resolved = str(resolve_out(out).absolute())
    res, it = [], iter(argv)
    for tok in it:
        if tok == "--out":
            res += [tok, resolved]
            next(it, None)
        elif tok.startswith("--out="):
            res.append("--out=" + resolved)
        else:
            res.append(tok)
    return res


@dataclass(frozen=True)
class RunManifest:
    command: str
    argv: tuple
    parameters: dict
    seed: int | None
    version: str
    timestamp: str

    def to_dict(self) -> dict:
        d = asdict(self)
        d["argv"] = list(self.argv)
        return d


def manifest(args, argv) -> dict:
    params = {k: v for k, v in vars(args).items() if k not in ("func",)}
    return RunManifest(
        command=args.command,
        argv=tuple(_replay_argv(args, argv)),
        parameters=_clean(params),
        seed=getattr(args, "seed", None),
        version=__version__,
        timestamp=_dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    ).to_dict()


def _write_manifest(out: Path, man: dict) -> None:
    sidecar = out.with_name(out.name + ".manifest.json")
    sidecar.write_text(_dumps(man) + "\n")


def _emit(args, argv, payload: dict) -> None:
    man = manifest(args, argv)
    doc = dict(payload)
    doc["manifest"] = man
    text = _dumps(doc)
    out = resolve_out(getattr(args, "out", None))
    if out is not None:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text + "\n")
        _write_manifest(out, man)
    print(text)


# --- argument helpers ------------------------------------------------------------


def _add_spec_flags(p, defaults=None, need_corr=True):
    d = defaults or {}
    for name in ("mu1", "mu2", "a", "b"):
        p.add_argument(f"--{name}", type=float, required=name not in d, default=d.get(name))
    g = p.add_mutually_exclusive_group(required=need_corr)
    g.add_argument("--c", type=float)
    g.add_argument("--rho", type=float)


def _spec(args) -> MomentSpec:
    if args.rho is not None:
        spec = from_correlation(args.mu1, args.mu2, args.a, args.b, args.rho)
    else:
        spec = MomentSpec(args.mu1, args.mu2, args.a, args.b, args.c)
    require_valid(spec)
    return spec


def _grid(args) -> GridConfig:
    return GridConfig(
        n_per_axis=args.grid_n,
        box_k=args.box_k,
        slack=args.slack,
        inject_analytic=not args.no_inject,
    )


def _range(text: str) -> np.ndarray:
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise DomainError(f"range '{text}' is not lo:hi:n", "range lo:hi:n")
    if n < 1:
        raise DomainError("range needs n >= 1", "n >= 1")
    return np.array([lo]) if n == 1 else np.linspace(lo, hi, n)


# --- commands --------------------------------------------------------------------


def cmd_bound(args, argv) -> int:
    spec = _spec(args)
    wc = worst_case(spec, args.q)
    out = {
        "value": wc.value,
        "condition": f"C{int(wc.condition)}",
        "report": wc.report.to_dict(),
        "spec": spec.to_dict(),
    }
    if args.with_distribution:
        out["distribution"] = wc.distribution.to_dict()
    if args.with_dual:
        try:
            out["dual"] = dual_certificate(spec, args.q).to_dict()
        except CertificateUnavailable as exc:
            out["dual"] = {"unavailable": exc.reason}
    if args.verify:
        out["gap_report"] = verify_duality(spec, args.q).to_dict()
    _emit(args, argv, out)
    return EXIT_OK


def cmd_newsvendor(args, argv) -> int:
    spec = _spec(args)
    sol = solve(spec, args.eta, args.model)
    out = sol.to_dict()
    q = sol.q_star
    # two-decimal display next to the full-precision values
    out["display"] = {
        "q_star": [f"{x:.2f}" for x in q] if isinstance(q, tuple) else f"{q:.2f}",
        "objective": f"{sol.objective:.2f}",
    }
    out["spec"] = spec.to_dict()
    _emit(args, argv, out)
    return EXIT_OK


def _sweep_task(job):
    return sweep_row(*job)


def cmd_sweep(args, argv) -> int:
    if args.vary == "rho":
        rhos = _range(args.range or "-0.447:1:21")
        etas = np.array([args.eta if args.eta is not None else 0.5])
    elif args.vary == "eta":
        etas = _range(args.range or "0.05:0.95:19")
        rhos = np.array([args.rho if args.rho is not None else 0.0])
    else:
        rhos = _range(args.range or "-0.447:1:21")
        etas = _range(args.eta_range or "0.05:0.95:19")
    jobs = [(args.mu1, args.mu2, args.a, args.b, float(r), float(e)) for r in rhos for e in etas]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            rows = list(ex.map(_sweep_task, jobs, chunksize=8))  # map keeps grid order
    else:
        rows = [_sweep_task(j) for j in jobs]

    out = resolve_out(args.out)
    stream = sys.stdout if out is None else None
    if out is not None:
        out.parent.mkdir(parents=True, exist_ok=True)
        stream = out.open("w", newline="")
    try:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for row in rows:
            w.writerow([_csv_cell(row[k]) for k in SWEEP_HEADER])
    finally:
        if out is not None:
            stream.close()
    if out is not None:
        _write_manifest(out, manifest(args, argv))
        n_bad = sum(r["status"] != "ok" for r in rows)
        print(_dumps({"rows": len(rows), "infeasible": n_bad, "out": str(out)}))
    return EXIT_OK


def _csv_cell(v):
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return v


def cmd_oracle(args, argv) -> int:
    spec = _spec(args)
    grid = _grid(args)
    if args.prob_below is not None:
        res = max_prob_below_result(spec, args.prob_below, grid)
        out = {"mode": "prob_below", "xi": args.prob_below, "probability": res.value,
               "oracle": res.to_dict() if args.with_distribution else None}
    else:
        if args.q is None:
            raise DomainError("oracle needs --q or --prob-below", "--q required")
        res = lp_worst_case(spec, args.q, grid)
        wc = worst_case(spec, args.q)
        closed = wc.value
        tol = dominance_tolerance(spec, args.q, res.delta)
        out = {
            "mode": "worst_case",
            "q": args.q,
            "closed_form": closed,
            "oracle_value": res.value,
            "relative_gap": abs(res.value - closed) / closed if closed else abs(res.value),
            "dominance_tolerance": tol,
            "oracle_below_closed_form": res.value <= closed + tol,
            "condition": f"C{int(wc.condition)}",
            "slack_used": res.slack_used,
            "delta": res.delta,
            "oracle": res.to_dict() if args.with_distribution else None,
        }
    _emit(args, argv, out)
    return EXIT_OK


def cmd_sdp_export(args, argv) -> int:
    spec = _spec(args)
    if args.pieces:
        try:
            data = json.loads(Path(args.pieces).read_text())
        except json.JSONDecodeError as exc:
            raise DomainError(f"pieces file is not JSON: {exc}", "pieces JSON")
        pw = PiecewiseQuadratic.from_dict(data)
    elif args.q is not None:
        pw = PiecewiseQuadratic.newsvendor(args.q)
    else:
        raise DomainError("sdp-export needs --pieces or --q", "--pieces or --q")
    prob = build_sdp(spec, pw)
    out = resolve_out(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    export_sdpa(prob, out)
    man = manifest(args, argv)
    _write_manifest(out, man)
    doc = {"out": str(out), "structure": prob.structure(), "manifest": man}
    print(_dumps(doc))
    return EXIT_OK


def cmd_verify(args, argv) -> int:
    rng = np.random.default_rng(args.seed)
    worst_gap, failures, degenerate = 0.0, [], []
    counts = {f"C{k}": 0 for k in range(1, 7)}
    for _ in range(args.count):
        spec, q = random_instance(rng)
        rep = verify_duality(spec, q)
        counts[f"C{int(rep.condition)}"] += 1
        if rep.skipped or rep.degenerate:
            degenerate.append({"spec": spec.to_dict(), "q": q, "reason": rep.skipped or "degenerate"})
            continue
        worst_gap = max(worst_gap, rep.gap)
        if not rep.ok or rep.gap > 1e-8:
            failures.append({"spec": spec.to_dict(), "q": q, "report": rep.to_dict()})
    out = {
        "count": args.count,
        "seed": args.seed,
        "max_gap": worst_gap,
        "condition_counts": counts,
        "failures": failures,
        "degenerate": degenerate,
        "ok": not failures,
    }
    _emit(args, argv, out)
    return EXIT_OK if not failures else EXIT_NUMERIC


def cmd_rerun(args, argv) -> int:
    man = json.loads(Path(args.manifest).read_text())
    return main(man["argv"])


# --- parser ------------------------------------------------------------------------

EXAMPLE_DEFAULTS = {"mu1": 1.0, "mu2": 1.0, "a": 2.0, "b": 6.0}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bivdro", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bound", help="worst-case E[(X1+X2-q)+]")
    _add_spec_flags(b)
    b.add_argument("--q", type=float, required=True)
    b.add_argument("--with-distribution", action="store_true")
    b.add_argument("--with-dual", action="store_true")
    b.add_argument("--verify", action="store_true")
    b.add_argument("--out")
    b.set_defaults(func=cmd_bound)

    n = sub.add_parser("newsvendor", help="robust newsvendor order")
    _add_spec_flags(n)
    n.add_argument("--model", choices=["bcm", "bdm", "ucm"], default="bcm")
    n.add_argument("--eta", type=float, required=True)
    n.add_argument("--out")
    n.set_defaults(func=cmd_newsvendor)

    s = sub.add_parser("sweep", help="CSV of model values over rho and/or eta")
    _add_spec_flags(s, EXAMPLE_DEFAULTS, need_corr=False)
    s.add_argument("--vary", choices=["rho", "eta", "both"], default="both")
    s.add_argument("--range", help="lo:hi:n for the varied axis (rho when --vary both)")
    s.add_argument("--eta-range", help="lo:hi:n for eta when --vary both")
    s.add_argument("--eta", type=float)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)

    o = sub.add_parser("oracle", help="discretized LP check")
    _add_spec_flags(o)
    o.add_argument("--q", type=float)
    o.add_argument("--prob-below", type=float)
    o.add_argument("--grid-n", type=int, default=200)
    o.add_argument("--box-k", type=float, default=8.0)
    o.add_argument("--slack", type=float)
    o.add_argument("--no-inject", action="store_true")
    o.add_argument("--with-distribution", action="store_true")
    o.add_argument("--out")
    o.set_defaults(func=cmd_oracle)

    e = sub.add_parser("sdp-export", help="write the lifted SDP in sparse SDPA format")
    _add_spec_flags(e)
    e.add_argument("--pieces", help="JSON file with {'W': 6xK} or {'pieces': Kx6}")
    e.add_argument("--q", type=float, help="use the two-piece max{0, x1+x2-q}")
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_sdp_export)

    v = sub.add_parser("verify", help="randomized zero-gap check")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--count", type=int, default=1000)
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("rerun", help="replay a run manifest")
    r.add_argument("manifest")
    r.set_defaults(func=cmd_rerun)
    return p


RANGE_FLAGS = ("--range", "--eta-range")


def _glue_ranges(argv: list) -> list:
    """Let ``--range -0.4:1:15`` through: argparse would read the value as a flag."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in RANGE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv=None) -> int:
    argv = _glue_ranges(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, argv)
    except DomainError as exc:
        msg = str(exc)
        if exc.invariant and exc.invariant not in msg:
            msg = f"{exc.invariant} violated: {msg}"
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_INPUT
    except (OracleInfeasible, ConsistencyError, BivdroError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
