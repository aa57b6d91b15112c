"""Deployment planning.

For each shell the planner walks candidate (implementation, processor) pairs
in a fixed order: implementations by descending tag specificity (ties by id),
processors by registration order. A pair is taken when the processor's
accept tag is an ancestor-or-equal prefix of the implementation's tag and the
demand fits the remaining capacity; otherwise the walk records why the pair
was rejected and moves on.

Greedy mode places shells one by one in topological order, reserving capacity
tentatively as it goes; it is the cheap default but can strand a later shell.
Exhaustive mode backtracks over the same candidate order and finds a complete
plan whenever one exists. Both plan against a capacity snapshot, never
against live occupancy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    CommitFailedError,
    InvalidGraphError,
    InvalidStateError,
    PlatformError,
)
from .graph import DataflowGraph, Implementation, Shell
from .registry import DeploymentHandle, Registry, VirtualProcessor
from .tags import is_ancestor_or_equal, specificity

INCOMPATIBLE = "incompatible"
UNDEPLOYABLE = "undeployable"


@dataclass(frozen=True)
class Rejection:
    shell_id: str
    implementation_id: str
    processor_id: str
    reason: str

    def as_dict(self) -> dict:
        return {
            "shell": self.shell_id,
            "implementation": self.implementation_id,
            "processor": self.processor_id,
            "reason": self.reason,
        }


@dataclass
class InfeasibilityReport:
    rejections: list[Rejection] = field(default_factory=list)

    def as_dicts(self) -> list[dict]:
        return [r.as_dict() for r in self.rejections]


@dataclass
class DeploymentPlan:
    """Assignment of every shell to one (implementation, processor) pair.

    ``implementations`` carries the resolved objects so a complete plan can
    be committed without going back to the graph.
    """

    status: str  # "complete" | "infeasible"
    mode: str
    assignments: dict[str, tuple[str, str]] = field(default_factory=dict)
    report: InfeasibilityReport | None = None
    implementations: dict[str, Implementation] = field(default_factory=dict)

    @property
    def complete(self) -> bool:
        return self.status == "complete"

    def as_dict(self) -> dict:
        out = {
            "status": self.status,
            "mode": self.mode,
            "assignments": {
                shell: {"implementation": impl, "processor": proc}
                for shell, (impl, proc) in sorted(self.assignments.items())
            },
        }
        if self.report is not None:
            out["report"] = {"rejections": self.report.as_dicts()}
        return out


def ordered_candidates(implementations: list[Implementation]) -> list[Implementation]:
    """Most specific tag first; ties by implementation id ascending."""
    return sorted(implementations, key=lambda i: (-specificity(i.compat_tag), i.id))


def _free_view(processors: list[VirtualProcessor]) -> dict[str, dict[str, int]]:
    return {
        p.id: {r: p.capacity[r] - p.occupancy.get(r, 0) for r in p.capacity}
        for p in processors
    }


def _fits_free(free: dict[str, int], demand: dict[str, int]) -> bool:
    return all(units <= free.get(r, 0) for r, units in demand.items())


def _scan(
    shell_id: str,
    implementations: list[Implementation],
    processors: list[VirtualProcessor],
    free: dict[str, dict[str, int]],
) -> tuple[tuple[str, str] | None, list[Rejection]]:
    """Walk candidates in order; first acceptable pair wins."""
    rejections: list[Rejection] = []
    if not processors:
        # empty fleet: no pairs exist, record one row per implementation
        for impl in ordered_candidates(implementations):
            rejections.append(Rejection(shell_id, impl.id, "", INCOMPATIBLE))
        return None, rejections
    for impl in ordered_candidates(implementations):
        for proc in processors:
            if not is_ancestor_or_equal(proc.accept_tag, impl.compat_tag):
                rejections.append(Rejection(shell_id, impl.id, proc.id, INCOMPATIBLE))
                continue
            if not _fits_free(free[proc.id], impl.demand):
                rejections.append(Rejection(shell_id, impl.id, proc.id, UNDEPLOYABLE))
                continue
            return (impl.id, proc.id), rejections
    return None, rejections


def match_one(
    shell: Shell,
    implementations: list[Implementation],
    processors: list[VirtualProcessor],
    free: dict[str, dict[str, int]] | None = None,
) -> tuple[str, str] | InfeasibilityReport:
    """Pick the first compatible-and-deployable pair for one shell.

    With no explicit ``free`` view, deployability is judged against the
    processors' current occupancy. Infeasibility is a value, not an error.
    """
    for impl in implementations:
        if impl.shell_id != shell.id:
            raise ValueError(f"implementation {impl.id!r} does not belong to shell {shell.id!r}")
    if free is None:
        free = _free_view(processors)
    found, rejections = _scan(shell.id, implementations, processors, free)
    if found is not None:
        return found
    return InfeasibilityReport(rejections)


def _reserve(free: dict[str, dict[str, int]], proc_id: str, demand: dict, sign: int) -> None:
    ledger = free[proc_id]
    for r, units in demand.items():
        ledger[r] = ledger.get(r, 0) - sign * units


def plan_graph(graph: DataflowGraph, registry: Registry, mode: str = "greedy") -> DeploymentPlan:
    """Assemble a whole-graph plan over a capacity snapshot.

    Raises InvalidGraph when structural validation fails; infeasibility is
    returned as a plan value carrying the rejection report.
    """
    if mode not in ("greedy", "exhaustive"):
        raise ValueError(f"mode must be greedy or exhaustive, got {mode!r}")
    violations = [v for v in graph.validate() if v.severity == "error"]
    if violations:
        raise InvalidGraphError("graph does not validate", violations)
    order = graph.topological_order()
    processors = registry.processors()
    occupancy = registry.snapshot_occupancy()
    free = {
        p.id: {r: p.capacity[r] - occupancy[p.id].get(r, 0) for r in p.capacity}
        for p in processors
    }

    if mode == "greedy":
        assignments: dict[str, tuple[str, str]] = {}
        for shell_id in order:
            found, rejections = _scan(
                shell_id, graph.implementations_of(shell_id), processors, free
            )
            if found is None:
                return DeploymentPlan(
                    status="infeasible",
                    mode=mode,
                    report=InfeasibilityReport(rejections),
                )
            impl_id, proc_id = found
            _reserve(free, proc_id, graph.implementations[impl_id].demand, +1)
            assignments[shell_id] = (impl_id, proc_id)
        return DeploymentPlan(
            status="complete",
            mode=mode,
            assignments=assignments,
            implementations={i: graph.implementations[i] for i, _ in assignments.values()},
        )

    # exhaustive backtracking; remembers the deepest shell it failed to place
    assignments = {}
    deepest = {"index": -1, "rejections": []}

    def place(index: int) -> bool:
        if index == len(order):
            return True
        shell_id = order[index]
        candidates_left = False
        rejections: list[Rejection] = []
        impls = ordered_candidates(graph.implementations_of(shell_id))
        if not processors:
            rejections = [Rejection(shell_id, i.id, "", INCOMPATIBLE) for i in impls]
        for impl in impls:
            for proc in processors:
                if not is_ancestor_or_equal(proc.accept_tag, impl.compat_tag):
                    rejections.append(Rejection(shell_id, impl.id, proc.id, INCOMPATIBLE))
                    continue
                if not _fits_free(free[proc.id], impl.demand):
                    rejections.append(Rejection(shell_id, impl.id, proc.id, UNDEPLOYABLE))
                    continue
                candidates_left = True
                _reserve(free, proc.id, impl.demand, +1)
                assignments[shell_id] = (impl.id, proc.id)
                if place(index + 1):
                    return True
                _reserve(free, proc.id, impl.demand, -1)
                del assignments[shell_id]
        if not candidates_left and index > deepest["index"]:
            deepest["index"] = index
            deepest["rejections"] = rejections
        return False

    if place(0):
        return DeploymentPlan(
            status="complete",
            mode=mode,
            assignments=dict(assignments),
            implementations={i: graph.implementations[i] for i, _ in assignments.values()},
        )
    rejections = deepest["rejections"]
    if not rejections:
        # combinational conflict only: report the first shell's full scan
        _, rejections = _scan(
            order[0], graph.implementations_of(order[0]), processors, free
        )
    return DeploymentPlan(status="infeasible", mode=mode, report=InfeasibilityReport(rejections))


def commit_plan(plan: DeploymentPlan, registry: Registry) -> list[DeploymentHandle]:
    """Deploy every assignment, rolling all of them back on any failure.

    After a CommitFailed the registry occupancy equals its pre-call state.
    Handles come back in shell-id order.
    """
    if not plan.complete:
        raise InvalidStateError("cannot commit an infeasible plan")
    handles: list[DeploymentHandle] = []
    for shell_id in sorted(plan.assignments):
        impl_id, proc_id = plan.assignments[shell_id]
        impl = plan.implementations[impl_id]
        try:
            handles.append(registry.deploy(proc_id, impl))
        except PlatformError as e:
            for h in reversed(handles):
                registry.undeploy(h)
            raise CommitFailedError(
                f"deploy of {impl_id!r} on {proc_id!r} failed: {e}",
                report={
                    "shell": shell_id,
                    "implementation": impl_id,
                    "processor": proc_id,
                    "cause": e.payload(),
                },
            )
    return handles
