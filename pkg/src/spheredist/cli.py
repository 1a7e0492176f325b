"""Command-line drivers.

Exit codes: 0 success, 1 internal error (or a replay that does not
reproduce), 2 bad parameters or unreadable input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from datetime import datetime, timezone

from . import __version__
from .arithmetic import verify_keyu
from .density import density_increment, generate_set
from .errors import ParameterError, SphereDistError
from .lattice_sphere import representation_counts
from .pointset import read_pointset
from .verify import (
    count_identity_check,
    dichotomy_report,
    dichotomy_report_pinned,
    pinned_check,
    unpinned_check,
)

#: Config keys that never change a report and are therefore not echoed.
NOT_ECHOED = ("out", "threads", "handler", "timestamp")

VERIFY_MODES = ("unpinned", "pinned", "dichotomy", "dichotomy-pinned", "identity")


def _common(p: argparse.ArgumentParser, *names):
    add = {
        "dim": lambda: p.add_argument("--dim", type=int, default=5),
        "side": lambda: p.add_argument("--side", type=int, default=8),
        "boundary": lambda: p.add_argument("--boundary", choices=("periodic", "truncate"), default="periodic"),
        "lambda": lambda: p.add_argument("--lambda", dest="lam", type=int),
        "lambda0": lambda: p.add_argument("--lambda0", type=int),
        "lambda1": lambda: p.add_argument("--lambda1", type=int),
        "eta": lambda: p.add_argument("--eta", type=float, default=0.5),
        "epsilon": lambda: p.add_argument("--epsilon", type=float, default=0.1),
        "c-qeta": lambda: p.add_argument("--c-qeta", type=float, default=1.0),
        "c-keyu": lambda: p.add_argument("--c-keyu", type=float, default=1.0),
        "q": lambda: p.add_argument("--q", type=int, default=None),
        "seed": lambda: p.add_argument("--seed", type=int, default=0),
        "in": lambda: p.add_argument("--in", dest="input", default=None, help="point-set file"),
        "set": lambda: p.add_argument("--set", dest="generator", default=None,
                                      help='generator spec, e.g. "bernoulli:p=0.3,seed=7"'),
        "format": lambda: p.add_argument("--format", choices=("json", "csv"), default=None),
    }
    for n in names:
        add[n]()
    p.add_argument("--out", default="-", help="output path ('-' for stdout)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--no-timestamp", dest="timestamp", action="store_false")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spheredist", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="table of r_d(lambda)")
    p.add_argument("--lambda-max", type=int, required=True)
    _common(p, "dim", "format")
    p.set_defaults(handler=cmd_enumerate)

    p = sub.add_parser("expsum", help="largest sampled |sigma_hat| off the major arcs")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--q-cap", type=int, default=None)
    p.add_argument("--inside-arcs", action="store_true")
    _common(p, "dim", "lambda", "eta", "c-qeta", "c-keyu", "seed", "format")
    p.set_defaults(handler=cmd_expsum)

    p = sub.add_parser("verify", help="identity, ratio checks and dichotomy reports")
    p.add_argument("--mode", choices=VERIFY_MODES, required=True)
    p.add_argument("--k", type=float, default=1.0, help="branch (ii) constant")
    p.add_argument("--c-e", type=float, default=1.0, help="constant in the exceptional set")
    _common(p, "dim", "side", "boundary", "lambda", "lambda0", "lambda1", "eta", "epsilon",
            "c-qeta", "q", "seed", "in", "set", "format")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("increment", help="density-increment trace")
    p.add_argument("--max-steps", type=int, default=64)
    _common(p, "dim", "side", "boundary", "eta", "c-qeta", "q", "seed", "in", "set", "format")
    p.set_defaults(handler=cmd_increment)

    p = sub.add_parser("replay", help="re-run a JSON report's config and compare")
    p.add_argument("report")
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_replay)
    return parser


# -- helpers -------------------------------------------------------------------

def resolved_config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in NOT_ECHOED}


def _load_set(args):
    if (args.input is None) == (args.generator is None):
        raise ParameterError("give exactly one of --in and --set")
    if args.input is not None:
        return read_pointset(args.input)
    return generate_set(args.generator, args.dim, args.side, boundary_mode=args.boundary)


def _need(args, *names):
    for n in names:
        if getattr(args, n) is None:
            raise ParameterError(f"--{n.replace('lam', 'lambda').replace('_', '-')} is required")


def _fmt(args, default, allowed):
    fmt = args.format or default
    if fmt not in allowed:
        raise ParameterError(f"{args.command} supports --format {'/'.join(allowed)}")
    return fmt


def render_report(args, result: dict) -> str:
    doc = {
        "command": args.command,
        "config": resolved_config(args),
        "result": result,
        "seed": getattr(args, "seed", None),
        "version": __version__,
    }
    if getattr(args, "timestamp", True):
        doc["timestamp"] = datetime.now(timezone.utc).isoformat()
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(text: str, out: str):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


# -- commands ------------------------------------------------------------------

def cmd_enumerate(args) -> str:
    if args.dim < 1:
        raise ParameterError("--dim must be >= 1")
    if args.lambda_max < 0:
        raise ParameterError("--lambda-max must be >= 0")
    counts = representation_counts(args.dim, args.lambda_max)
    rows = [(lam, int(c)) for lam, c in enumerate(counts)]
    if _fmt(args, "csv", ("csv", "json")) == "csv":
        return render_csv(("lambda", "count"), rows)
    return render_report(args, {"rows": [{"lambda": a, "count": b} for a, b in rows]})


def cmd_expsum(args) -> str:
    _fmt(args, "json", ("json",))
    _need(args, "lam")
    rep = verify_keyu(
        args.dim, args.eta, args.lam, q_max=args.q_cap, n_samples=args.samples, seed=args.seed,
        C_qeta=args.c_qeta, C_keyu=args.c_keyu, inside_arcs=args.inside_arcs, threads=args.threads,
    )
    return render_report(args, rep.to_dict())


def cmd_verify(args) -> str:
    _fmt(args, "json", ("json",))
    A = _load_set(args)
    mode = args.mode
    q = 1 if args.q is None else args.q
    if mode == "identity":
        _need(args, "lam")
        res = count_identity_check(A, args.lam).to_dict()
    elif mode == "unpinned":
        _need(args, "lam")
        res = unpinned_check(A, args.lam, args.epsilon, q).to_dict()
    elif mode == "pinned":
        _need(args, "lambda0", "lambda1")
        res = pinned_check(A, args.lambda0, args.lambda1, args.epsilon, q).to_dict()
    elif mode == "dichotomy":
        _need(args, "lam")
        res = dichotomy_report(A, args.lam, args.epsilon, args.eta, args.c_qeta, args.k, args.c_e, args.q).to_dict()
    else:
        _need(args, "lambda0", "lambda1")
        res = dichotomy_report_pinned(
            A, args.lambda0, args.lambda1, args.epsilon, args.eta, args.c_qeta, args.k, args.c_e, args.q
        ).to_dict()
    res["set_size"] = len(A)
    res["set_side"] = A.side
    return render_report(args, res)


def cmd_increment(args) -> str:
    A = _load_set(args)
    trace = density_increment(A, args.eta, args.c_qeta, args.max_steps, args.q)
    rows = []
    for i, st in enumerate(trace.steps):
        res = "" if st.residue is None else " ".join(str(s) for s in st.residue)
        rows.append((i, res, repr(st.density), st.set.side, len(st.set), trace.status))
    if _fmt(args, "csv", ("csv", "json")) == "csv":
        return render_csv(("step", "residue", "density", "side", "size", "status"), rows)
    return render_report(args, {
        "status": trace.status,
        "q": trace.q,
        "steps": [
            {"step": r[0], "residue": list(st.residue) if st.residue else None,
             "density": st.density, "side": r[3], "size": r[4]}
            for r, st in zip(rows, trace.steps)
        ],
    })


def _strip(doc):
    doc = dict(doc)
    doc.pop("timestamp", None)
    return doc


def cmd_replay(args) -> str:
    try:
        with open(args.report) as fh:
            old = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParameterError(f"cannot read report {args.report}: {exc}") from None
    cfg = old.get("config")
    if not isinstance(cfg, dict) or "command" not in cfg:
        raise ParameterError("report has no config to replay")
    ns = argparse.Namespace(**cfg, out=args.out, threads=1, timestamp="timestamp" in old)
    handler = {"enumerate": cmd_enumerate, "expsum": cmd_expsum, "verify": cmd_verify,
               "increment": cmd_increment}[cfg["command"]]
    text = handler(ns)
    same = _strip(json.loads(text)) == _strip(old)
    args._replay_ok = same
    if args.out is None:
        return ("identical\n" if same else "differs\n")
    return text


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text = args.handler(args)
        if args.command == "replay":
            if args.out is not None:
                _emit(text, args.out)
                sys.stdout.write("identical\n" if args._replay_ok else "differs\n")
            else:
                sys.stdout.write(text)
            return 0 if args._replay_ok else 1
        _emit(text, args.out)
        return 0
    except (ParameterError, SphereDistError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - the exit code contract needs a catch-all
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
