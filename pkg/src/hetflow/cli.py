"""Command-line interface.

Exit codes: 0 on success, 1 when the platform rejects the request
(validation errors, infeasible plans, failed runs, server-side errors),
2 on usage errors (argparse's own convention).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import urllib.error
import urllib.request

from .errors import PlanInfeasibleError, PlatformError
from .matcher import plan_graph
from .pipeline_io import load_manifest_file, load_pipeline_file
from .registry import Registry
from .runtime import session_stats, start_run, stop_run
from .service import DEFAULT_HOST, DEFAULT_PORT, Platform, serve

DEFAULT_SERVER = os.environ.get("HETFLOW_SERVER", f"http://{DEFAULT_HOST}:{DEFAULT_PORT}")


def _load_registry(manifest_paths) -> Registry:
    registry = Registry()
    for path in manifest_paths or []:
        registry.load_ham(load_manifest_file(path))
    return registry


def _print_violations(violations) -> None:
    for v in violations:
        where = v.shell_id + (f".{v.port}" if v.port else "")
        print(f"  [{v.severity}] {v.code} at {where}: {v.message}")


def _print_plan(plan_dict: dict) -> None:
    print(f"plan status: {plan_dict['status']} (mode: {plan_dict['mode']})")
    if plan_dict["status"] == "complete":
        for shell_id, a in sorted(plan_dict["assignments"].items()):
            print(f"  {shell_id}: {a['implementation']} on {a['processor']}")
    else:
        print("  rejections:")
        for r in plan_dict["report"]["rejections"]:
            proc = r["processor"] or "-"
            print(f"    {r['shell']}/{r['implementation']} on {proc}: {r['reason']}")


def cmd_load_ham(args) -> int:
    if args.server:
        for path in args.manifest:
            doc = load_manifest_file(path)
            body, status = _post_json(args.server, "/hams", doc)
            if status >= 400:
                print(f"{path}: {body.get('error', body)}", file=sys.stderr)
                return 1
            ham = body["ham"]
            print(f"loaded {ham['ham_id']} ({len(ham['processors'])} processors)")
        return 0
    registry = _load_registry(args.manifest)
    for proc in registry.processors():
        print(
            f"{proc.id}: accepts {proc.accept_tag}, backend {proc.backend_kind}, "
            f"capacity {proc.capacity}"
        )
    print(f"ok: {len(registry.processors())} processors from {len(args.manifest)} manifests")
    return 0


def cmd_validate(args) -> int:
    pipeline_id, graph = load_pipeline_file(args.pipeline)
    violations = graph.validate()
    errors = [v for v in violations if v.severity == "error"]
    if args.json:
        print(json.dumps({"id": pipeline_id, "violations": [v.as_dict() for v in violations]}))
    else:
        print(f"pipeline {pipeline_id}: {len(errors)} errors, {len(violations) - len(errors)} warnings")
        _print_violations(violations)
    return 1 if errors else 0


def cmd_plan(args) -> int:
    registry = _load_registry(args.ham)
    pipeline_id, graph = load_pipeline_file(args.pipeline)
    mode = "exhaustive" if args.exhaustive else "greedy"
    plan = plan_graph(graph, registry, mode=mode)
    if args.json:
        print(json.dumps(plan.as_dict()))
    else:
        print(f"pipeline {pipeline_id}")
        _print_plan(plan.as_dict())
    return 0 if plan.complete else 1


def cmd_run(args) -> int:
    registry = _load_registry(args.ham)
    pipeline_id, graph = load_pipeline_file(args.pipeline)
    mode = "exhaustive" if args.exhaustive else "greedy"
    try:
        session = start_run(graph, registry, mode=mode)
    except PlanInfeasibleError as exc:
        print(f"pipeline {pipeline_id}: no feasible deployment", file=sys.stderr)
        for r in exc.report.rejections:
            proc = r.processor_id or "-"
            print(f"  {r.shell_id}/{r.implementation_id} on {proc}: {r.reason}", file=sys.stderr)
        return 1
    if not session.wait(timeout=args.timeout):
        stop_run(session, timeout=5.0)
    stats = session_stats(session)
    if args.json:
        print(json.dumps(stats))
    else:
        print(f"session {stats['session']}: {stats['state']} in {stats['duration_s']:.3f}s")
        for shell_id, n in sorted(stats["processed_per_shell"].items()):
            print(f"  {shell_id}: {n} firings")
        for key, sink in sorted(stats["sinks"].items()):
            if "values" in sink:
                print(f"  sink {key}: {sink['values']}")
            else:
                print(f"  sink {key}: {sink['resource']}")
    return 0 if stats["state"] == "stopped" and not stats["error"] else 1


def cmd_serve(args) -> int:
    host, port = DEFAULT_HOST, DEFAULT_PORT
    if args.listen:
        text = args.listen
        if ":" in text:
            host_part, port_part = text.rsplit(":", 1)
            host = host_part or DEFAULT_HOST
            port = int(port_part)
        else:
            host = text
    platform = Platform()
    for path in args.ham or []:
        platform.load_ham(load_manifest_file(path))
    for path in args.pipeline or []:
        with open(path, encoding="utf-8") as fh:
            platform.load_pipeline(json.load(fh))
    serve(platform, host=host, port=port, ui_dir=args.ui)
    return 0


def cmd_status(args) -> int:
    try:
        procs, _ = _get_json(args.server, "/processors")
        sessions, _ = _get_json(args.server, "/sessions")
    except (urllib.error.URLError, OSError) as exc:
        print(f"cannot reach {args.server}: {exc}", file=sys.stderr)
        return 1
    if args.json:
        print(json.dumps({"processors": procs["processors"], "sessions": sessions["sessions"]}))
        return 0
    print(f"server {args.server}")
    print(f"processors ({len(procs['processors'])}):")
    for p in procs["processors"]:
        occ = ", ".join(
            f"{r}={p['occupancy'].get(r, 0)}/{c}" for r, c in sorted(p["capacity"].items())
        )
        print(f"  {p['id']} [{p['backend_kind']}] accepts {p['accept_tag']}: {occ or 'no capacity'}")
    print(f"sessions ({len(sessions['sessions'])}):")
    for s in sessions["sessions"]:
        print(f"  {s['session']}: {s['state']} (pipeline {s['pipeline']})")
    return 0


def _request(url: str, data: bytes | None = None):
    req = urllib.request.Request(
        url,
        data=data,
        headers={"Content-Type": "application/json"} if data is not None else {},
        method="POST" if data is not None else "GET",
    )
    try:
        with urllib.request.urlopen(req, timeout=10.0) as resp:
            return json.loads(resp.read().decode("utf-8")), resp.status
    except urllib.error.HTTPError as err:
        return json.loads(err.read().decode("utf-8")), err.code


def _get_json(server: str, path: str):
    return _request(server.rstrip("/") + path)


def _post_json(server: str, path: str, doc: dict):
    return _request(server.rstrip("/") + path, data=json.dumps(doc).encode("utf-8"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hetflow",
        description="Deploy and run dataflow pipelines on a heterogeneous processor fleet.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("load-ham", help="check hardware manifests, or load them into a server")
    p.add_argument("manifest", nargs="+", help="manifest JSON files")
    p.add_argument("--server", help="running control service URL (omit to check locally)")
    p.set_defaults(fn=cmd_load_ham)

    p = sub.add_parser("validate", help="report wiring violations in a pipeline definition")
    p.add_argument("pipeline", help="pipeline JSON file")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("plan", help="compute a deployment plan without running")
    p.add_argument("pipeline", help="pipeline JSON file")
    p.add_argument("--ham", action="append", help="manifest JSON file (repeatable)")
    p.add_argument("--exhaustive", action="store_true", help="use the backtracking matcher")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(fn=cmd_plan)

    p = sub.add_parser("run", help="deploy, execute to completion, and print statistics")
    p.add_argument("pipeline", help="pipeline JSON file")
    p.add_argument("--ham", action="append", help="manifest JSON file (repeatable)")
    p.add_argument("--exhaustive", action="store_true", help="use the backtracking matcher")
    p.add_argument("--timeout", type=float, default=60.0, help="seconds before forcing a stop")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("serve", help="start the control service")
    p.add_argument("--listen", help="HOST:PORT (default 127.0.0.1:8070; port 0 picks a free one)")
    p.add_argument("--ham", action="append", help="manifest to load at startup (repeatable)")
    p.add_argument("--pipeline", action="append", help="pipeline to load at startup (repeatable)")
    p.add_argument("--ui", help="directory of static console files to mount at /ui")
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("status", help="query a running control service")
    p.add_argument("--server", default=DEFAULT_SERVER, help=f"service URL (default {DEFAULT_SERVER})")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(fn=cmd_status)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except PlatformError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
