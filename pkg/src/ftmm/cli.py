"""
Command-line front end, a thin client over the HTTP API.

Every subcommand talks to the service through ApiClient — in process against
the ASGI app by default, or a remote instance via --server.  Machine output
(JSON or CSV) goes to --output, or to stdout when no path is given; human
summaries move to stderr whenever stdout carries data.

Exit codes: 0 success, 1 usage error, 2 internal cross-check failure,
3 decode or verification failure.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from csv import writer as csv_writer
from pathlib import Path
from typing import List, Optional, Sequence

import httpx

from .reliability import CURVE_CSV_HEADER, FC_CSV_HEADER
from .relations import relation_csv_rows
from .simulate import BATCH_CSV_HEADER
from .service.client import ApiClient, ApiError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CROSSCHECK = 2
EXIT_VERIFY = 3

THEORY_CSV_HEADER = ("scheme", "M", "p_e", "p_f_theory")


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad usage; the contract here is exit 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# Flag parsing helpers
# ---------------------------------------------------------------------------

def _grid_spec(text: str) -> dict:
    try:
        lo, hi, n = text.split(":")
        return {"min": float(lo), "max": float(hi), "points": int(n)}
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected min:max:points, got {text!r}") from None


def _label_list(text: str) -> List[str]:
    labels = [x.strip() for x in text.split(",") if x.strip()]
    if not labels:
        raise argparse.ArgumentTypeError("expected a comma-separated label list")
    return labels


def _collect_schemes(raw: Optional[List[str]]) -> Optional[List[str]]:
    if not raw:
        return None
    out: List[str] = []
    for chunk in raw:
        out.extend(x.strip() for x in chunk.split(",") if x.strip())
    return out or None


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _csv_text(rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    csv_writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _json_text(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _emit(text: str, output: Optional[str]) -> bool:
    """Write to the output path, or stdout when none.  True if stdout used."""
    if output in (None, "-"):
        sys.stdout.write(text)
        return True
    Path(output).write_text(text)
    return False


def _say(msg: str, data_on_stdout: bool) -> None:
    print(msg, file=sys.stderr if data_on_stdout else sys.stdout)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_search(args, client: ApiClient) -> int:
    body: dict = {"scheme": args.scheme, "elementary_only": args.elementary_only}
    if args.k_max is not None:
        body["k_max"] = args.k_max
    resp = client.post("/search", body)
    counts = resp["counts"]
    per = counts["per_target"]
    per_text = " ".join(f"{t}:{per[t]}" for t in ("C11", "C12", "C21", "C22"))
    print(f"scheme {resp['scheme']} (M={resp['M']}, k_max={resp['k_max']})")
    print(f"locals: {counts['locals']} ({per_text}); "
          f"distinct supports: {counts['local_supports']}")
    print(f"parities: {counts['parities']}")
    if args.output:
        doc = resp["relations"]
        text = _csv_text(relation_csv_rows(doc)) if args.format == "csv" \
            else _json_text(doc)
        _emit(text, args.output)
        print(f"wrote {args.output}")
    return EXIT_OK


def cmd_analyze(args, client: ApiClient) -> int:
    body: dict = {"peel_coverage": args.peel_coverage}
    schemes = _collect_schemes(args.scheme)
    if schemes:
        body["schemes"] = schemes
    if args.pe is not None:
        body["pe"] = args.pe
    elif args.pe_grid is not None:
        body["grid"] = args.pe_grid
    resp = client.post("/analyze", body)

    if args.format == "csv":
        if args.pe is not None or args.pe_grid is not None:
            rows = [THEORY_CSV_HEADER]
            for rep in resp["schemes"]:
                for pt in rep["theory"]:
                    rows.append((rep["scheme"], str(rep["M"]),
                                 _fmt(pt["p_e"]), _fmt(pt["p_f"])))
        else:
            rows = [FC_CSV_HEADER]
            for rep in resp["schemes"]:
                for k, (fc, bn) in enumerate(zip(rep["fc"], rep["binom"])):
                    rows.append((rep["scheme"], str(k), str(fc), str(bn)))
        data_on_stdout = _emit(_csv_text(rows), args.output)
    else:
        data_on_stdout = _emit(_json_text(resp), args.output)

    for rep in resp["schemes"]:
        line = f"{rep['scheme']}: M={rep['M']} source={rep['source']}"
        if rep["crosscheck_ok"] is not None:
            line += " crosscheck=" + ("ok" if rep["crosscheck_ok"] else "MISMATCH")
        if args.pe is not None and rep["theory"]:
            line += f" p_f({args.pe:g})={rep['theory'][0]['p_f']:.6g}"
        if rep.get("peel_coverage"):
            cov = rep["peel_coverage"]
            line += (f" peel={cov['peel_ok']}/{cov['decodable']}"
                     f" decodable of {cov['patterns']} patterns")
        _say(line, data_on_stdout)

    if not resp["crosscheck_ok"]:
        _say("error: closed-form/census cross-check failed", True)
        return EXIT_CROSSCHECK
    return EXIT_OK


def cmd_simulate(args, client: ApiClient) -> int:
    body: dict = {"trials": args.trials, "seed": args.seed}
    schemes = _collect_schemes(args.scheme)
    if schemes:
        body["schemes"] = schemes
    if args.pe_grid is not None:
        body["grid"] = args.pe_grid
    resp = client.post("/simulate", body)

    if args.format == "csv":
        rows = [CURVE_CSV_HEADER]
        for c in resp["curves"]:
            for r in c["rows"]:
                rows.append((c["scheme"], str(c["M"]), _fmt(r["p_e"]),
                             _fmt(r["p_f_theory"]), _fmt(r["p_f_mc"]),
                             _fmt(r["stderr"]), str(r["trials"]), str(r["seed"])))
        data_on_stdout = _emit(_csv_text(rows), args.output)
    else:
        data_on_stdout = _emit(_json_text(resp), args.output)

    ordering = resp["ordering"]
    if ordering["detail"]:
        _say(ordering["detail"], data_on_stdout)
    if ordering["psmm_not_worse_than_2copy"] is False:
        _say("error: parity scheme fell behind 2-copy replication", True)
        return EXIT_CROSSCHECK
    return EXIT_OK


def cmd_run(args, client: ApiClient) -> int:
    if args.trials > 1:
        if args.fail:
            # a forced pattern contradicts sampling many of them
            return _usage_error(args, "--fail cannot be combined with --trials > 1")
        resp = client.post("/batch", {
            "scheme": args.scheme, "size": args.size, "pe": args.pe,
            "trials": args.trials, "seed": args.seed, "decoder": args.decoder,
        })
        rows = [BATCH_CSV_HEADER]
        for r in resp["rows"]:
            rows.append((str(r["trial"]), r["pattern_hex"],
                         str(r["decoded"]).lower(), str(r["verified"]).lower()))
        data_on_stdout = _emit(_csv_text(rows), args.output)
        _say(f"{resp['scheme']}: {resp['decode_failures']}/{resp['trials']} "
             f"undecodable (fraction {resp['failure_fraction']:.6g}), "
             f"{resp['verify_failures']} verify failures", data_on_stdout)
        return EXIT_VERIFY if resp["verify_failures"] else EXIT_OK

    body: dict = {"scheme": args.scheme, "size": args.size, "pe": args.pe,
                  "seed": args.seed, "decoder": args.decoder}
    if args.fail:
        body["fail"] = args.fail
    resp = client.post("/run", body)
    data_on_stdout = _emit(_json_text(resp), args.output)
    if resp["decoded"] and resp["verified"]:
        return EXIT_OK
    if not resp["decoded"]:
        _say("decode failed: pattern "
             + (resp["pattern"]["hex"] or "0x0") + " is "
             + ("not decodable" if not resp["decodable"]
                else "beyond this decoder"), data_on_stdout)
        return EXIT_OK if args.allow_undecodable else EXIT_VERIFY
    _say("verification mismatch against conventional multiplication",
         data_on_stdout)
    return EXIT_VERIFY


def _usage_error(args, message: str) -> int:
    print(f"ftmm {args.command}: error: {message}", file=sys.stderr)
    return EXIT_USAGE


def cmd_serve(args, _client: ApiClient) -> int:
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser assembly
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, *, seed=True) -> None:
    p.add_argument("--server", default=None,
                   help="base URL of a running service (default: in-process)")
    p.add_argument("--output", "-o", default=None, metavar="PATH",
                   help="write machine output here instead of stdout")
    if seed:
        p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")


def _build_parser() -> _Parser:
    parser = _Parser(prog="ftmm",
                     description="Fault-tolerant 2x2 block matrix multiplication: "
                                 "relation search, reliability analysis, and "
                                 "fault-injected runs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("search", help="enumerate local and parity relations")
    p.add_argument("--scheme", default="hybrid_sw")
    p.add_argument("--k-max", type=int, default=None,
                   help="max terms per relation (default: full sweep when M<=16)")
    p.add_argument("--elementary-only", action="store_true",
                   help="only keep parity products matching a single A_i B_j")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    _add_common(p, seed=False)
    p.set_defaults(handler=cmd_search)

    p = sub.add_parser("analyze", help="failure-count tables and theory curves")
    p.add_argument("--scheme", action="append", metavar="ID[,ID...]",
                   help="scheme id(s); repeatable (default: comparison set)")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--pe", type=float, default=None,
                   help="evaluate theory at a single failure probability")
    g.add_argument("--pe-grid", type=_grid_spec, default=None,
                   metavar="MIN:MAX:POINTS", help="log-spaced theory grid")
    p.add_argument("--peel-coverage", action="store_true",
                   help="also sweep peeling success over all patterns (M<=16)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    _add_common(p, seed=False)
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("simulate", help="theory vs Monte Carlo failure curves")
    p.add_argument("--scheme", action="append", metavar="ID[,ID...]",
                   help="scheme id(s); repeatable (default: comparison set)")
    p.add_argument("--pe-grid", type=_grid_spec, default=None,
                   metavar="MIN:MAX:POINTS",
                   help="log-spaced grid (default 1e-3:0.5:21)")
    p.add_argument("--trials", type=int, default=10_000,
                   help="Monte Carlo trials per grid point (default 10000)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    _add_common(p)
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("run", help="one fault-injected multiplication end to end")
    p.add_argument("--scheme", default="hybrid_sw_2psmm")
    p.add_argument("--size", type=int, default=8,
                   help="matrix dimension, even (default 8)")
    p.add_argument("--pe", type=float, default=0.0,
                   help="per-node failure probability (default 0)")
    p.add_argument("--fail", type=_label_list, default=None, metavar="L1,L2,...",
                   help="force exactly these term labels to fail")
    p.add_argument("--decoder", choices=("linear", "peel"), default="linear")
    p.add_argument("--trials", type=int, default=1,
                   help="> 1 switches to a batch decode sweep (CSV rows)")
    p.add_argument("--allow-undecodable", action="store_true",
                   help="exit 0 even when the pattern cannot be decoded")
    _add_common(p)
    p.set_defaults(handler=cmd_run)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(handler=cmd_serve, server=None)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    client = ApiClient(getattr(args, "server", None))
    try:
        return args.handler(args, client)
    except ApiError as exc:
        print(f"error: {exc.detail}", file=sys.stderr)
        return EXIT_USAGE if exc.status < 500 else EXIT_CROSSCHECK
    except httpx.HTTPError as exc:
        print(f"error: cannot reach service: {exc}", file=sys.stderr)
        return EXIT_CROSSCHECK
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
