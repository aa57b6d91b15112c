"""Shared builders: plain pipeline descriptions -> package objects.

Tests express a scenario once in the oracle's plain-data format (see
oracles.interpret) and use these helpers to realize it as a DataflowGraph
plus a Registry, so the same description drives both the reference
interpreter and the real engine.
"""

from __future__ import annotations

import random
from urllib.parse import urlencode

from hetflow import DataflowGraph, Implementation, Registry, Shell, parse_tag
from hetflow.graph import INPUT, OUTPUT, PortSpec

DT = "i32"

HOST_TAG = "cpu.x86"
FABRIC_TAG = "fpga.xilinx.virtex"

# Filled by tests/test_acceptance.py; rendered once the run finishes so the
# verdicts are visible even with output capture on.
ACCEPTANCE_RESULTS: list[tuple[str, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.ensure_newline()
    for name, verdict in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"[ACCEPTANCE] {name}: {verdict}")


def build_graph(
    shells: dict[str, dict],
    edges: list[tuple[str, str, str, str]],
    sources: dict[tuple[str, str], list],
    sinks: list[tuple[str, str]],
    fabric: bool = False,
) -> DataflowGraph:
    """Realize a plain description as a graph with one implementation per shell."""
    graph = DataflowGraph()
    for shell_id in sorted(shells):
        spec = shells[shell_id]
        graph.add_shell(
            Shell(
                id=shell_id,
                inputs=tuple(PortSpec(p, INPUT, DT) for p in spec["inputs"]),
                outputs=tuple(PortSpec(p, OUTPUT, DT) for p in spec["outputs"]),
            )
        )
        name, params = spec["op"]
        if fabric:
            blob = f"bitstream:{name}"
            if params:
                blob += "?" + urlencode(params)
            impl = Implementation(
                id=f"i-{shell_id}",
                shell_id=shell_id,
                compat_tag=parse_tag(FABRIC_TAG),
                demand={"luts": 1},
                payload={"blob": blob},
            )
        else:
            impl = Implementation(
                id=f"i-{shell_id}",
                shell_id=shell_id,
                compat_tag=parse_tag(HOST_TAG),
                demand={"slots": 1},
                payload={"operator": name, "params": dict(params)},
            )
        graph.register_implementation(impl)
    for f, fp, t, tp in edges:
        graph.connect((f, fp), (t, tp))
    for (shell_id, port), values in sources.items():
        graph.bind_source((shell_id, port), "seq:" + ",".join(str(v) for v in values))
    for shell_id, port in sinks:
        graph.bind_sink((shell_id, port), "collect:")
    return graph


def big_registry(reconfig_delay_ms: int = 0) -> Registry:
    """One spacious host processor and one spacious fabric processor."""
    registry = Registry()
    registry.load_ham(
        {
            "v": 1,
            "ham_id": "test-fleet",
            "name": "test fleet",
            "processors": [
                {
                    "id": "p-host",
                    "accept_tag": "cpu",
                    "capacity": {"slots": 10000},
                    "backend_kind": "host-executor",
                },
                {
                    "id": "p-fabric",
                    "accept_tag": "fpga.xilinx",
                    "capacity": {"luts": 10000},
                    "backend_kind": "simulated-fpga",
                    "backend_params": {"reconfig_delay_ms": reconfig_delay_ms},
                },
            ],
        }
    )
    return registry


def run_to_sinks(graph, registry, mode="greedy", channel_capacity=64, timeout=10.0):
    """Run a graph to natural completion; return {'shell.port': [values]}."""
    from hetflow import start_run

    session = start_run(graph, registry, mode=mode, channel_capacity=channel_capacity)
    assert session.wait(timeout), f"run did not drain within {timeout}s"
    stats = session.stats()
    assert stats["state"] == "stopped", f"run ended {stats['state']}: {stats['error']}"
    out = {}
    for key, entry in stats["sinks"].items():
        out[key.split(":", 1)[1]] = entry["values"]
    return out


# --- random pipeline descriptions ---------------------------------------------

_UNARY_OPS = ("identity", "add_const", "scale", "clamp", "sum_window")


def _random_params(rng: random.Random, name: str) -> dict:
    if name == "add_const":
        return {"k": rng.randint(-10, 10)}
    if name == "scale":
        return {"k": rng.randint(-3, 3)}
    if name == "clamp":
        lo = rng.randint(-20, 10)
        return {"lo": lo, "hi": lo + rng.randint(0, 15)}
    if name == "sum_window":
        return {"n": rng.randint(1, 4)}
    return {}


def random_description(
    rng: random.Random,
    max_shells: int = 10,
    max_tokens: int = 1000,
):
    """A random acyclic description with every output consumed or sunk.

    All sources get the same length, so every stream in the pipeline carries
    the same number of tokens and the run's accounting is exactly
    predictable. Returns (shells, edges, sources, sinks).
    """
    n = rng.randint(1, max_shells)
    shells: dict[str, dict] = {}
    edges: list[tuple[str, str, str, str]] = []
    sources: dict[tuple[str, str], list] = {}
    sinks: list[tuple[str, str]] = []
    open_outputs: list[tuple[int, str, str]] = []  # (rank, shell, port)

    for rank in range(n):
        sid = f"s{rank:02d}"
        roll = rng.random()
        if roll < 0.2 and rank >= 2:
            name, n_in, n_out = "sum", rng.randint(2, 3), 1
        elif roll < 0.35 and rank < n - 1:
            name, n_in, n_out = "tee", 1, rng.randint(2, 3)
        else:
            name, n_in, n_out = rng.choice(_UNARY_OPS), 1, 1
        params = _random_params(rng, name)
        inputs = [f"in{j}" for j in range(n_in)]
        outputs = [f"out{j}" for j in range(n_out)]
        shells[sid] = {"inputs": inputs, "outputs": outputs, "op": (name, params)}
        for port in inputs:
            usable = [o for o in open_outputs if o[0] < rank]
            if usable and rng.random() < 0.7:
                pick = usable[rng.randrange(len(usable))]
                open_outputs.remove(pick)
                edges.append((pick[1], pick[2], sid, port))
            else:
                sources[(sid, port)] = []  # filled once the length is known
        for port in outputs:
            open_outputs.append((rank, sid, port))

    for _, sid, port in open_outputs:
        sinks.append((sid, port))

    channels = max(1, len(edges) + len(sources) + len(sinks))
    length = rng.randint(1, max(1, min(40, max_tokens // channels)))
    for key in sources:
        sources[key] = [rng.randint(-50, 50) for _ in range(length)]
    return shells, edges, sources, sinks
