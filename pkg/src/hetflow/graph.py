"""Shell/implementation structure and the dataflow graph built from it.

A shell declares typed input/output ports and owns any number of
implementations, each targeting a processor type via a compatibility tag.
Connecting shells port-to-port yields a feed-forward dataflow graph; data
moves shell-to-shell regardless of where each implementation lands.
"""

from __future__ import annotations

import heapq
import re
from dataclasses import dataclass, field

from .errors import (
    CycleError,
    DirectionMismatchError,
    DuplicateIdError,
    InputAlreadyBoundError,
    OutputAlreadyBoundError,
    TypeMismatchError,
    UnknownPortError,
    UnknownShellError,
)
from .tags import Tag

INPUT = "input"
OUTPUT = "output"

_TOKEN_RE = re.compile(r"^[A-Za-z0-9_-]+$")


def _check_token(value: str, what: str) -> str:
    # dots are reserved for "shell.port" references and tag syntax
    if not isinstance(value, str) or not _TOKEN_RE.match(value):
        raise ValueError(f"{what} must match [A-Za-z0-9_-]+, got {value!r}")
    return value


@dataclass(frozen=True)
class PortSpec:
    """One typed port; datatype tokens are compared by exact match."""

    name: str
    direction: str
    datatype: str

    def __post_init__(self):
        _check_token(self.name, "port name")
        if self.direction not in (INPUT, OUTPUT):
            raise ValueError(f"direction must be input|output, got {self.direction!r}")
        _check_token(self.datatype, "datatype")


@dataclass(frozen=True)
class Shell:
    """Processor-independent unit: ports only, no behavior."""

    id: str
    inputs: tuple[PortSpec, ...]
    outputs: tuple[PortSpec, ...]

    def __post_init__(self):
        _check_token(self.id, "shell id")
        if not self.inputs and not self.outputs:
            raise ValueError(f"shell {self.id!r} must declare at least one port")
        for ports, direction in ((self.inputs, INPUT), (self.outputs, OUTPUT)):
            seen = set()
            for p in ports:
                if p.direction != direction:
                    raise ValueError(
                        f"shell {self.id!r}: port {p.name!r} listed under {direction}"
                    )
                if p.name in seen:
                    raise ValueError(f"shell {self.id!r}: duplicate {direction} port {p.name!r}")
                seen.add(p.name)

    def port(self, direction: str, name: str) -> PortSpec | None:
        ports = self.inputs if direction == INPUT else self.outputs
        for p in ports:
            if p.name == name:
                return p
        return None


@dataclass(frozen=True)
class Implementation:
    """Processor-type-specific realization of one shell.

    ``demand`` is the resource ledger footprint (units per resource name);
    ``payload`` describes behavior: a built-in operator with parameters
    (host backend) and/or an opaque configuration blob reference
    (simulated-FPGA backend).
    """

    id: str
    shell_id: str
    compat_tag: Tag
    demand: dict = field(default_factory=dict)
    payload: dict = field(default_factory=dict)

    def __post_init__(self):
        _check_token(self.id, "implementation id")
        _check_token(self.shell_id, "shell id")
        for r, units in self.demand.items():
            _check_token(r, "resource name")
            if not isinstance(units, int) or units < 0:
                raise ValueError(f"demand[{r!r}] must be a non-negative integer")


@dataclass(frozen=True)
class Edge:
    from_shell: str
    from_port: str
    to_shell: str
    to_port: str

    def key(self) -> str:
        return f"{self.from_shell}.{self.from_port}->{self.to_shell}.{self.to_port}"


@dataclass(frozen=True)
class Violation:
    """One structural problem; ``severity`` is "error" or "warning"."""

    code: str
    severity: str
    shell_id: str
    port: str
    message: str

    def as_dict(self) -> dict:
        return {
            "code": self.code,
            "severity": self.severity,
            "shell": self.shell_id,
            "port": self.port,
            "message": self.message,
        }


class DataflowGraph:
    """Mutable during the build phase; treat as immutable once validated."""

    def __init__(self):
        self.shells: dict[str, Shell] = {}
        self.implementations: dict[str, Implementation] = {}
        self.implementations_by_shell: dict[str, list[str]] = {}
        self.edges: list[Edge] = []
        self.sources: dict[tuple[str, str], str] = {}
        self.sinks: dict[tuple[str, str], str] = {}
        self._input_producer: dict[tuple[str, str], str] = {}
        self._output_consumer_edges: set[tuple[str, str]] = set()

    # --- construction -----------------------------------------------------

    def add_shell(self, shell: Shell) -> None:
        if shell.id in self.shells:
            raise DuplicateIdError(f"shell {shell.id!r} already exists")
        self.shells[shell.id] = shell
        self.implementations_by_shell[shell.id] = []

    def register_implementation(self, impl: Implementation) -> None:
        if impl.id in self.implementations:
            raise DuplicateIdError(f"implementation {impl.id!r} already exists")
        if impl.shell_id not in self.shells:
            raise UnknownShellError(f"implementation {impl.id!r}: no shell {impl.shell_id!r}")
        self.implementations[impl.id] = impl
        self.implementations_by_shell[impl.shell_id].append(impl.id)

    def _resolve(self, ref: tuple[str, str], direction: str) -> PortSpec:
        shell_id, port_name = ref
        shell = self.shells.get(shell_id)
        if shell is None:
            raise UnknownShellError(f"no shell {shell_id!r}")
        port = shell.port(direction, port_name)
        if port is None:
            # distinguish a wrong-direction reference from a missing port
            other = shell.port(INPUT if direction == OUTPUT else OUTPUT, port_name)
            if other is not None:
                raise DirectionMismatchError(
                    f"{shell_id}.{port_name} is an {other.direction}, expected {direction}"
                )
            raise UnknownPortError(f"no {direction} port {shell_id}.{port_name}")
        return port

    def connect(self, from_ref: tuple[str, str], to_ref: tuple[str, str]) -> None:
        """Add a directed edge output -> input; datatypes must match exactly."""
        src = self._resolve(from_ref, OUTPUT)
        dst = self._resolve(to_ref, INPUT)
        if src.datatype != dst.datatype:
            raise TypeMismatchError(
                f"{from_ref[0]}.{src.name}:{src.datatype} -> "
                f"{to_ref[0]}.{dst.name}:{dst.datatype}"
            )
        if to_ref in self._input_producer:
            raise InputAlreadyBoundError(f"input {to_ref[0]}.{to_ref[1]} already has a producer")
        if from_ref in self._output_consumer_edges:
            raise OutputAlreadyBoundError(
                f"output {from_ref[0]}.{from_ref[1]} already has a consumer edge"
            )
        self.edges.append(Edge(from_ref[0], src.name, to_ref[0], dst.name))
        self._input_producer[to_ref] = "edge"
        self._output_consumer_edges.add(from_ref)

    def bind_source(self, to_ref: tuple[str, str], resource: str) -> None:
        self._resolve(to_ref, INPUT)
        if to_ref in self._input_producer:
            raise InputAlreadyBoundError(f"input {to_ref[0]}.{to_ref[1]} already has a producer")
        self.sources[to_ref] = resource
        self._input_producer[to_ref] = "source"

    def bind_sink(self, from_ref: tuple[str, str], resource: str) -> None:
        self._resolve(from_ref, OUTPUT)
        if from_ref in self.sinks:
            raise OutputAlreadyBoundError(f"output {from_ref[0]}.{from_ref[1]} already has a sink")
        self.sinks[from_ref] = resource

    # --- inspection ---------------------------------------------------------

    def validate(self) -> list[Violation]:
        """Structural check; pure and idempotent. Empty list means valid.

        Warnings (unconsumed outputs) do not block planning or execution.
        """
        out: list[Violation] = []
        for shell_id, shell in self.shells.items():
            if not self.implementations_by_shell.get(shell_id):
                out.append(
                    Violation(
                        "ShellWithoutImplementations",
                        "error",
                        shell_id,
                        "",
                        f"shell {shell_id!r} has no implementations",
                    )
                )
            for p in shell.inputs:
                if (shell_id, p.name) not in self._input_producer:
                    out.append(
                        Violation(
                            "UnboundInput",
                            "error",
                            shell_id,
                            p.name,
                            f"input {shell_id}.{p.name} has no edge or source binding",
                        )
                    )
            for p in shell.outputs:
                ref = (shell_id, p.name)
                if ref not in self._output_consumer_edges and ref not in self.sinks:
                    out.append(
                        Violation(
                            "UnconsumedOutput",
                            "warning",
                            shell_id,
                            p.name,
                            f"output {shell_id}.{p.name} is never consumed",
                        )
                    )
        for e in self.edges:
            src = self.shells[e.from_shell].port(OUTPUT, e.from_port)
            dst = self.shells[e.to_shell].port(INPUT, e.to_port)
            if src.datatype != dst.datatype:
                out.append(
                    Violation(
                        "TypeMismatch",
                        "error",
                        e.from_shell,
                        e.from_port,
                        f"edge {e.key()} connects {src.datatype} to {dst.datatype}",
                    )
                )
        cycle = self._find_cycle()
        if cycle:
            anchor = min(cycle)
            out.append(
                Violation(
                    "CycleDetected",
                    "error",
                    anchor,
                    "",
                    "cycle through " + " -> ".join(sorted(cycle)),
                )
            )
        out.sort(key=lambda v: (v.shell_id, v.port, v.code))
        return out

    def has_errors(self) -> bool:
        return any(v.severity == "error" for v in self.validate())

    def _successors(self) -> dict[str, set[str]]:
        succ: dict[str, set[str]] = {s: set() for s in self.shells}
        for e in self.edges:
            succ[e.from_shell].add(e.to_shell)
        return succ

    def _find_cycle(self) -> set[str] | None:
        # iterative DFS coloring; returns the set of shells on one cycle
        succ = self._successors()
        color = {s: 0 for s in self.shells}  # 0 white, 1 grey, 2 black
        parent: dict[str, str] = {}
        for start in sorted(self.shells):
            if color[start]:
                continue
            stack = [(start, iter(sorted(succ[start])))]
            color[start] = 1
            while stack:
                node, it = stack[-1]
                advanced = False
                for nxt in it:
                    if color[nxt] == 0:
                        color[nxt] = 1
                        parent[nxt] = node
                        stack.append((nxt, iter(sorted(succ[nxt]))))
                        advanced = True
                        break
                    if color[nxt] == 1:
                        members = {nxt, node}
                        cur = node
                        while cur != nxt and cur in parent:
                            cur = parent[cur]
                            members.add(cur)
                        return members
                if not advanced:
                    color[node] = 2
                    stack.pop()
        return None

    def topological_order(self) -> list[str]:
        """Kahn's algorithm; ties broken by shell id ascending (unique order)."""
        succ = self._successors()
        indeg = {s: 0 for s in self.shells}
        for froms in succ.values():
            for t in froms:
                indeg[t] += 1
        ready = [s for s, d in indeg.items() if d == 0]
        heapq.heapify(ready)
        order: list[str] = []
        while ready:
            node = heapq.heappop(ready)
            order.append(node)
            for nxt in succ[node]:
                indeg[nxt] -= 1
                if indeg[nxt] == 0:
                    heapq.heappush(ready, nxt)
        if len(order) != len(self.shells):
            raise CycleError("graph has a cycle; no topological order exists")
        return order

    def implementations_of(self, shell_id: str) -> list[Implementation]:
        return [self.implementations[i] for i in self.implementations_by_shell.get(shell_id, [])]
