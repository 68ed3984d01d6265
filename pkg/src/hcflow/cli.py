"""Command-line client.

Each subcommand validates a JSON config, posts it to the service, and writes
the response out as CSV or JSON.  By default the service runs in-process (no
network, no separate server); ``--server URL`` targets a running instance
instead.  Exit codes: 0 success, 2 config/validation error (the message names
the offending field), 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import pydantic

from .config import RunConfig, dump_config, load_config
from .errors import HCFlowError, InputError, NumericFailure


class _CommandFailure(Exception):
    def __init__(self, exit_code: int, message: str):
        super().__init__(message)
        self.exit_code = exit_code
        self.message = message


def _open_client(server: str | None):
    if server:
        import httpx
        return httpx.Client(base_url=server, timeout=300.0)
    import warnings
    with warnings.catch_warnings():
        # starlette warns about its own httpx-based test client; the client
        # is our supported in-process transport, so keep stderr clean
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

        from .service import create_app
        return TestClient(create_app())


def _format_validation_error(exc: pydantic.ValidationError) -> str:
    lines = []
    for err in exc.errors():
        loc = ".".join(str(x) for x in err["loc"])
        lines.append(f"{loc}: {err['msg']}")
    return "invalid config:\n  " + "\n  ".join(lines)


def _check_response(resp) -> dict:
    if resp.status_code == 200:
        return resp.json()
    try:
        detail = resp.json().get("detail")
    except Exception:
        raise _CommandFailure(2, f"service error (HTTP {resp.status_code})") from None
    if isinstance(detail, dict) and "type" in detail:
        code = 3 if resp.status_code == 409 else 2
        raise _CommandFailure(code, f"{detail['type']}: {detail['message']}")
    if isinstance(detail, list):
        lines = []
        for err in detail:
            loc = ".".join(str(x) for x in err.get("loc", []) if x != "body")
            lines.append(f"{loc}: {err.get('msg', '')}")
        raise _CommandFailure(2, "invalid request:\n  " + "\n  ".join(lines))
    raise _CommandFailure(2, f"service error (HTTP {resp.status_code}): {detail}")


def _load_config(path: str) -> RunConfig:
    try:
        return load_config(path)
    except FileNotFoundError:
        raise _CommandFailure(2, f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise _CommandFailure(2, f"config is not valid JSON: {exc}") from None
    except pydantic.ValidationError as exc:
        raise _CommandFailure(2, _format_validation_error(exc)) from None


def _resolve_output(flag: str | None, cfg_output: str | None, default: str) -> str:
    path = flag or cfg_output or default
    outdir = os.environ.get("HCF_OUTPUT_DIR")
    if outdir and not os.path.isabs(path):
        path = os.path.join(outdir, path)
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    return path


def _write_table_csv(path: str, columns: list, rows: list) -> None:
    # '.' decimal separator, fixed column order, header row always present
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([repr(float(x)) for x in row])


def _write_json(path: str, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _maybe_dump_config(args, cfg: RunConfig) -> None:
    if getattr(args, "dump_config", None):
        with open(args.dump_config, "w", encoding="utf-8") as fh:
            fh.write(dump_config(cfg))
        print(f"wrote normalized config to {args.dump_config}")


def _model_body(cfg: RunConfig) -> dict:
    return {"model": cfg.model.model_dump(mode="json"),
            "initial": cfg.initial.model_dump(mode="json")}


# -- subcommands ----------------------------------------------------------------

def _cmd_simulate(args, client) -> int:
    cfg = _load_config(args.config)
    _maybe_dump_config(args, cfg)
    t_end = args.t_end if args.t_end is not None else cfg.run.t_end
    body = _model_body(cfg) | {
        "t_end": t_end,
        "steps": args.steps if args.steps is not None else cfg.run.steps,
        "cross_check": (args.cross_check if args.cross_check is not None
                        else cfg.run.cross_check),
    }
    data = _check_response(client.post("/simulate", json=body))
    path = _resolve_output(args.output, cfg.run.output, "simulate.csv")
    _write_table_csv(path, data["columns"], data["rows"])
    msg = f"wrote {path} ({len(data['rows'])} rows)"
    if "max_cross_check_error" in data["meta"]:
        msg += f", max cross-check error {data['meta']['max_cross_check_error']:.3e}"
    print(msg)
    return 0


def _cmd_limit(args, client) -> int:
    cfg = _load_config(args.config)
    _maybe_dump_config(args, cfg)
    body = _model_body(cfg) | {"tie_tol": (args.tie_tol if args.tie_tol is not None
                                           else cfg.run.tie_tol)}
    data = _check_response(client.post("/limit", json=body))
    path = _resolve_output(args.output, cfg.run.output, "limit.json")
    _write_json(path, data)
    print(f"wrote {path}: T={data['T']:g}, collapsed factors {data['p_set']}, "
          f"fiber rank {data['fiber_rank']}")
    return 0


def _cmd_static(args, client) -> int:
    cfg = _load_config(args.config)
    _maybe_dump_config(args, cfg)
    if (args.lam is None) == (args.check is None):
        raise _CommandFailure(2, "give exactly one of --lambda or --check")
    body: dict = {"model": cfg.model.model_dump(mode="json")}
    if args.lam is not None:
        body["lambda"] = args.lam
    else:
        try:
            with open(args.check, "r", encoding="utf-8") as fh:
                body["check"] = json.load(fh)
        except FileNotFoundError:
            raise _CommandFailure(2, f"metric file not found: {args.check}") from None
    data = _check_response(client.post("/static", json=body))
    path = _resolve_output(args.output, cfg.run.output, "static.json")
    _write_json(path, data)
    if data["mode"] == "construct":
        print(f"wrote {path}: static metric at lambda={data['lam']:g}, "
              f"residual {data['residual']:.3e}")
    else:
        print(f"wrote {path}: lambda_fit={data['lambda_fit']:.6g}, "
              f"residual {data['residual']:.3e}")
    return 0


def _cmd_normalize(args, client) -> int:
    cfg = _load_config(args.config)
    _maybe_dump_config(args, cfg)
    body = _model_body(cfg) | {
        "V": args.volume if args.volume is not None else cfg.run.V,
        "samples": args.samples if args.samples is not None else cfg.run.samples,
        "tie_tol": args.tie_tol if args.tie_tol is not None else cfg.run.tie_tol,
    }
    data = _check_response(client.post("/normalize", json=body))
    path = _resolve_output(args.output, cfg.run.output, "normalize.csv")
    _write_table_csv(path, data["table"]["columns"], data["table"]["rows"])
    limit_path = args.limit_output or (os.path.splitext(path)[0] + ".limit.json")
    _write_json(limit_path, {k: data[k] for k in
                             ("xi_limit", "lam", "static_h", "static_H", "V")})
    print(f"wrote {path} and {limit_path}: xi_limit={data['xi_limit']:.10g}, "
          f"static lambda={data['lam']:.10g}")
    return 0


def _cmd_verify(args, client) -> int:
    body: dict = {"ce": not args.no_ce, "seed": args.seed,
                  "random_count": args.count}
    if args.grassmannians:
        pairs = []
        for chunk in args.grassmannians.split(";"):
            p, q = chunk.split(",")
            pairs.append([int(p), int(q)])
        body["grassmannians"] = pairs
    if args.config:
        cfg = _load_config(args.config)
        factors = cfg.model.factors
        if len(factors) == 2 and all(f.kind.lower() == "grassmannian" for f in factors):
            body["ce_factors"] = [[factors[0].p, factors[0].q],
                                  [factors[1].p, factors[1].q]]
    data = _check_response(client.post("/verify", json=body))
    path = _resolve_output(args.output, None, "verify.json")
    _write_json(path, data)
    print(f"wrote {path}: max residual {data['max_residual']:.3e} over "
          f"{len(data['root_reports'])} root reports and "
          f"{len(data['tensor_reports'])} tensor reports")
    return 0


def _cmd_catalog(args, client) -> int:
    params = {}
    for key in ("kind", "p", "q", "n"):
        val = getattr(args, key)
        if val is not None:
            params[key] = val
    data = _check_response(client.get("/catalog", params=params))
    widths = (14, 26, 12, 20)
    header = ("kind", "space", "dimension", "admissible when")
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    for fam in data["families"]:
        lines.append("  ".join(str(fam[key]).ljust(w) for key, w in zip(
            ("kind", "space", "dim_formula", "admissible_when"), widths)))
    if data.get("entry"):
        e = data["entry"]
        verdict = "admissible" if e["admissible"] else f"rejected: {e['reason']}"
        lines.append("")
        lines.append(f"{e['kind']}{e['params']}: dim {e['dim_n']}, {verdict}")
        if e.get("note"):
            lines.append(f"  note: {e['note']}")
    text = "\n".join(lines)
    print(text)
    if args.output:
        path = _resolve_output(args.output, None, "catalog.txt")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return 0


def _cmd_serve(args, client) -> int:   # client unused; serve owns the process
    import uvicorn
    uvicorn.run("hcflow.service:app", host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hcflow",
        description="Invariant Hermitian curvature flow: simulations, limit "
                    "analysis, static metrics, and structural verification.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--server", help="base URL of a running service "
                                         "(default: run in-process)")
    common.add_argument("--output", help="output file path")

    withcfg = argparse.ArgumentParser(add_help=False)
    withcfg.add_argument("--config", required=True, help="JSON config file")
    withcfg.add_argument("--dump-config", metavar="PATH",
                         help="write the normalized config to PATH")

    p = sub.add_parser("simulate", parents=[common, withcfg],
                       help="sample the flow solution into a CSV table")
    p.add_argument("--t-end", type=float, dest="t_end")
    p.add_argument("--steps", type=int)
    p.add_argument("--cross-check", action="store_true", default=None,
                   help="also integrate numerically and add rk4_* columns")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("limit", parents=[common, withcfg],
                       help="extinction-limit report (JSON)")
    p.add_argument("--tie-tol", type=float, dest="tie_tol")
    p.set_defaults(func=_cmd_limit)

    p = sub.add_parser("static", parents=[common, withcfg],
                       help="construct a static metric or check one")
    p.add_argument("--lambda", type=float, dest="lam")
    p.add_argument("--check", metavar="METRIC_JSON",
                   help="JSON file with {'h': [...], 'H': [[[re,im],...]]}")
    p.set_defaults(func=_cmd_static)

    p = sub.add_parser("normalize", parents=[common, withcfg],
                       help="volume-normalized flow table plus its static limit")
    p.add_argument("--volume", type=float, dest="volume")
    p.add_argument("--samples", type=int)
    p.add_argument("--tie-tol", type=float, dest="tie_tol")
    p.add_argument("--limit-output", help="path for the limit JSON "
                                          "(default: <output>.limit.json)")
    p.set_defaults(func=_cmd_normalize)

    p = sub.add_parser("verify", parents=[common],
                       help="residual report of the structural identities")
    p.add_argument("--config", help="optional config; a two-Grassmannian model "
                                    "selects the realization factors")
    p.add_argument("--grassmannians", metavar="P,Q;P,Q;...",
                   help="realizations to check (default 1,2;2,2;1,3)")
    p.add_argument("--no-ce", action="store_true",
                   help="skip the tensor-formula verification")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=5,
                   help="number of metrics for the tensor verification")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("catalog", parents=[common],
                       help="table of factor types and dimensions")
    p.add_argument("--kind")
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--n", type=int)
    p.set_defaults(func=_cmd_catalog)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=_cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "serve":
            return args.func(args, None)
        with _open_client(getattr(args, "server", None)) as client:
            return args.func(args, client)
    except _CommandFailure as exc:
        print(exc.message, file=sys.stderr)
        return exc.exit_code
    except NumericFailure as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except InputError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except HCFlowError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
