"""Pipeline definition documents.

A pipeline file is JSON with the top-level keys ``shells``,
``implementations``, ``edges``, ``sources``, ``sinks`` (plus ``id`` and an
optional schema version ``v``). Port references are written ``"shell.port"``;
tags use their canonical dot-separated text form. See README for the full
schema; field names here are part of the artifact's contract.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import BadDefinitionError
from .graph import INPUT, OUTPUT, DataflowGraph, Implementation, PortSpec, Shell
from .tags import parse_tag

SCHEMA_VERSION = 1


def parse_port_ref(text: str) -> tuple[str, str]:
    if not isinstance(text, str) or text.count(".") != 1:
        raise BadDefinitionError(f"port reference must be 'shell.port', got {text!r}")
    shell_id, port = text.split(".")
    return shell_id, port


def _ports(entries, direction: str, shell_id: str) -> tuple[PortSpec, ...]:
    if entries is None:
        return ()
    if not isinstance(entries, list):
        raise BadDefinitionError(f"shell {shell_id!r}: ports must be a list")
    out = []
    for e in entries:
        if not isinstance(e, dict) or "name" not in e or "datatype" not in e:
            raise BadDefinitionError(
                f"shell {shell_id!r}: each port needs name and datatype, got {e!r}"
            )
        try:
            out.append(PortSpec(name=e["name"], direction=direction, datatype=e["datatype"]))
        except ValueError as err:
            raise BadDefinitionError(f"shell {shell_id!r}: {err}")
    return tuple(out)


def load_pipeline(doc: dict, fallback_id: str | None = None) -> tuple[str, DataflowGraph]:
    """Build a DataflowGraph from a definition document.

    Structural problems in the document raise BadDefinition; graph-level
    conflicts (duplicate ids, type mismatches, ...) raise their own errors.
    Returns (pipeline_id, graph); the graph is NOT validated here.
    """
    if not isinstance(doc, dict):
        raise BadDefinitionError("pipeline definition must be an object")
    version = doc.get("v", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise BadDefinitionError(f"unsupported pipeline schema version {version!r}")
    pipeline_id = doc.get("id") or fallback_id
    if not pipeline_id:
        raise BadDefinitionError("pipeline definition needs an id")

    graph = DataflowGraph()
    shells = doc.get("shells")
    if not isinstance(shells, list) or not shells:
        raise BadDefinitionError("pipeline needs a non-empty shells list")
    for s in shells:
        if not isinstance(s, dict) or "id" not in s:
            raise BadDefinitionError(f"shell entries need an id, got {s!r}")
        try:
            shell = Shell(
                id=s["id"],
                inputs=_ports(s.get("inputs"), INPUT, s["id"]),
                outputs=_ports(s.get("outputs"), OUTPUT, s["id"]),
            )
        except ValueError as err:
            raise BadDefinitionError(str(err))
        graph.add_shell(shell)

    for i in doc.get("implementations") or []:
        if not isinstance(i, dict):
            raise BadDefinitionError(f"implementation entries must be objects, got {i!r}")
        for key in ("id", "shell", "tag"):
            if key not in i:
                raise BadDefinitionError(f"implementation entry missing {key!r}: {i!r}")
        payload = i.get("payload") or {}
        if not isinstance(payload, dict):
            raise BadDefinitionError(f"implementation {i['id']!r}: payload must be an object")
        demand = i.get("demand") or {}
        if not isinstance(demand, dict):
            raise BadDefinitionError(f"implementation {i['id']!r}: demand must be a map")
        try:
            impl = Implementation(
                id=i["id"],
                shell_id=i["shell"],
                compat_tag=parse_tag(i["tag"]),
                demand=dict(demand),
                payload=dict(payload),
            )
        except ValueError as err:
            raise BadDefinitionError(str(err))
        graph.register_implementation(impl)

    for e in doc.get("edges") or []:
        if not isinstance(e, dict) or "from" not in e or "to" not in e:
            raise BadDefinitionError(f"edge entries need from and to, got {e!r}")
        graph.connect(parse_port_ref(e["from"]), parse_port_ref(e["to"]))

    for b in doc.get("sources") or []:
        if not isinstance(b, dict) or "to" not in b or "resource" not in b:
            raise BadDefinitionError(f"source bindings need to and resource, got {b!r}")
        graph.bind_source(parse_port_ref(b["to"]), b["resource"])

    for b in doc.get("sinks") or []:
        if not isinstance(b, dict) or "from" not in b or "resource" not in b:
            raise BadDefinitionError(f"sink bindings need from and resource, got {b!r}")
        graph.bind_sink(parse_port_ref(b["from"]), b["resource"])

    return pipeline_id, graph


def load_pipeline_file(path: str | Path) -> tuple[str, DataflowGraph]:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise BadDefinitionError(f"{path}: not valid JSON: {err}")
    return load_pipeline(doc, fallback_id=path.stem)


def load_manifest_file(path: str | Path) -> dict:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise BadDefinitionError(f"{path}: not valid JSON: {err}")
    return doc
