"""Virtual processor registry.

Hardware abstraction manifests publish capacity-tracked virtual processors;
the registry owns the compatibility index, the per-processor occupancy
ledger, and the deploy/undeploy lifecycle. All mutating operations are
linearizable: a deploy performs its capacity check and its commit atomically
with respect to other deploys.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field

from .backends import (
    BACKEND_KINDS,
    HostRunner,
    SimulatedFpgaRunner,
    open_sink,
    open_source,
)
from .errors import (
    BadManifestError,
    BadResourceError,
    DuplicateProcessorError,
    NotDeployableError,
    StaleHandleError,
    UnknownBackendError,
    UnknownProcessorError,
)
from .graph import Implementation, _check_token
from .tags import Tag, TagIndex, is_ancestor_or_equal, parse_tag


@dataclass
class VirtualProcessor:
    """Abstracted hardware unit: accept-tag plus a per-resource ledger."""

    id: str
    ham_id: str
    accept_tag: Tag
    capacity: dict[str, int]
    backend_kind: str
    backend_params: dict = field(default_factory=dict)
    occupancy: dict[str, int] = field(default_factory=dict)
    deployments: set[str] = field(default_factory=set)
    reconfig_count: int = 0

    def free(self, resource: str) -> int:
        return self.capacity.get(resource, 0) - self.occupancy.get(resource, 0)

    def summary(self) -> dict:
        return {
            "id": self.id,
            "ham": self.ham_id,
            "accept_tag": str(self.accept_tag),
            "backend_kind": self.backend_kind,
            "capacity": dict(self.capacity),
            "occupancy": {r: self.occupancy.get(r, 0) for r in self.capacity},
            "deployments": len(self.deployments),
            "reconfigurations": self.reconfig_count,
        }


@dataclass(frozen=True)
class DeploymentHandle:
    """Receipt for one live deployment; demand is snapshotted at deploy time."""

    handle_id: str
    processor_id: str
    implementation_id: str
    demand: dict[str, int]


@dataclass(frozen=True)
class HamManifest:
    ham_id: str
    name: str
    processors: tuple[dict, ...]

    @staticmethod
    def from_dict(doc: dict) -> "HamManifest":
        if not isinstance(doc, dict):
            raise BadManifestError("manifest must be an object")
        ham_id = doc.get("ham_id")
        if not ham_id:
            raise BadManifestError("manifest needs a ham_id")
        try:
            _check_token(ham_id, "ham_id")
        except ValueError as e:
            raise BadManifestError(str(e))
        procs = doc.get("processors")
        if not isinstance(procs, list) or not procs:
            raise BadManifestError(f"manifest {ham_id!r} needs a non-empty processors list")
        for p in procs:
            if not isinstance(p, dict):
                raise BadManifestError(f"manifest {ham_id!r}: processor entries must be objects")
            for key in ("id", "accept_tag", "capacity", "backend_kind"):
                if key not in p:
                    raise BadManifestError(
                        f"manifest {ham_id!r}: processor entry missing {key!r}"
                    )
            cap = p["capacity"]
            if not isinstance(cap, dict):
                raise BadManifestError(f"manifest {ham_id!r}: capacity must be a map")
            for r, units in cap.items():
                if not isinstance(units, int) or isinstance(units, bool) or units < 0:
                    raise BadManifestError(
                        f"manifest {ham_id!r}: capacity[{r!r}] must be a non-negative integer"
                    )
        return HamManifest(
            ham_id=ham_id,
            name=str(doc.get("name", "")),
            processors=tuple(procs),
        )


def demand_fits(capacity: dict, occupancy: dict, demand: dict) -> bool:
    """Capacity rule: resources absent from capacity count as 0 (fail-closed)."""
    for r, units in demand.items():
        if occupancy.get(r, 0) + units > capacity.get(r, 0):
            return False
    return True


class Registry:
    """Shared processor fleet; safe for concurrent use."""

    def __init__(self):
        self._lock = threading.RLock()
        self._procs: dict[str, VirtualProcessor] = {}
        self._index = TagIndex()
        self._live: dict[str, tuple[VirtualProcessor, Implementation]] = {}
        self._next_handle = 0
        self.hams: list[HamManifest] = []

    # --- manifest loading -------------------------------------------------

    def load_ham(self, manifest: HamManifest | dict) -> list[str]:
        """Register every processor of a manifest; all-or-nothing.

        Returns the new processor ids in manifest order.
        """
        if isinstance(manifest, dict):
            manifest = HamManifest.from_dict(manifest)
        staged: list[VirtualProcessor] = []
        seen: set[str] = set()
        for entry in manifest.processors:
            pid = entry["id"]
            try:
                _check_token(pid, "processor id")
            except ValueError as e:
                raise BadManifestError(str(e))
            if pid in seen or pid in self._procs:
                raise DuplicateProcessorError(f"processor id {pid!r} already registered")
            seen.add(pid)
            kind = entry["backend_kind"]
            if kind not in BACKEND_KINDS:
                raise UnknownBackendError(f"unknown backend kind {kind!r} for {pid!r}")
            staged.append(
                VirtualProcessor(
                    id=pid,
                    ham_id=manifest.ham_id,
                    accept_tag=parse_tag(entry["accept_tag"]),
                    capacity=dict(entry["capacity"]),
                    backend_kind=kind,
                    backend_params=dict(entry.get("backend_params") or {}),
                )
            )
        with self._lock:
            for proc in staged:
                if proc.id in self._procs:
                    raise DuplicateProcessorError(f"processor id {proc.id!r} already registered")
            for proc in staged:
                self._procs[proc.id] = proc
                self._index.insert(proc.accept_tag, proc.id)
            self.hams.append(manifest)
        return [p.id for p in staged]

    # --- queries ------------------------------------------------------------

    def processors(self) -> list[VirtualProcessor]:
        """All processors in registration order."""
        with self._lock:
            return list(self._procs.values())

    def processor(self, processor_id: str) -> VirtualProcessor:
        proc = self._procs.get(processor_id)
        if proc is None:
            raise UnknownProcessorError(f"no processor {processor_id!r}")
        return proc

    def compatible_processor_ids(self, implementation_tag: Tag) -> set[str]:
        """Index-backed candidate lookup (ancestor-or-equal accept tags)."""
        with self._lock:
            return self._index.candidates(implementation_tag)

    def can_deploy(self, processor_id: str, impl: Implementation) -> bool:
        """Compatibility plus capacity headroom; pure query, no state change."""
        with self._lock:
            proc = self.processor(processor_id)
            if not is_ancestor_or_equal(proc.accept_tag, impl.compat_tag):
                return False
            return demand_fits(proc.capacity, proc.occupancy, impl.demand)

    def snapshot_occupancy(self) -> dict[str, dict[str, int]]:
        """Point-in-time copy of every ledger, for planning."""
        with self._lock:
            return {pid: dict(p.occupancy) for pid, p in self._procs.items()}

    def live_handles(self) -> list[DeploymentHandle]:
        with self._lock:
            return [
                DeploymentHandle(hid, proc.id, impl.id, dict(impl.demand))
                for hid, (proc, impl) in self._live.items()
            ]

    # --- deployment lifecycle ----------------------------------------------

    def deploy(self, processor_id: str, impl: Implementation) -> DeploymentHandle:
        """Atomic check-and-commit; raises NotDeployable if the check fails."""
        delay_s = 0.0
        with self._lock:
            proc = self.processor(processor_id)
            if not is_ancestor_or_equal(proc.accept_tag, impl.compat_tag):
                raise NotDeployableError(
                    f"{impl.id!r} (tag {impl.compat_tag}) is incompatible with "
                    f"{processor_id!r} (accepts {proc.accept_tag})"
                )
            if not demand_fits(proc.capacity, proc.occupancy, impl.demand):
                raise NotDeployableError(
                    f"{impl.id!r} does not fit on {processor_id!r}: "
                    f"demand {impl.demand}, free "
                    f"{ {r: proc.free(r) for r in impl.demand} }"
                )
            self._next_handle += 1
            handle = DeploymentHandle(
                handle_id=f"d{self._next_handle}",
                processor_id=proc.id,
                implementation_id=impl.id,
                demand=dict(impl.demand),
            )
            for r, units in impl.demand.items():
                proc.occupancy[r] = proc.occupancy.get(r, 0) + units
            proc.deployments.add(handle.handle_id)
            self._live[handle.handle_id] = (proc, impl)
            if proc.backend_kind == "simulated-fpga":
                proc.reconfig_count += 1
                delay_s = float(proc.backend_params.get("reconfig_delay_ms", 0)) / 1000.0
        if delay_s > 0:
            time.sleep(delay_s)
        return handle

    def undeploy(self, handle: DeploymentHandle) -> None:
        with self._lock:
            entry = self._live.pop(handle.handle_id, None)
            if entry is None:
                raise StaleHandleError(f"handle {handle.handle_id!r} is not live")
            proc, _ = entry
            for r, units in handle.demand.items():
                left = proc.occupancy.get(r, 0) - units
                if left:
                    proc.occupancy[r] = left
                else:
                    # keep the ledger canonical: a freed resource leaves no row
                    proc.occupancy.pop(r, None)
            proc.deployments.discard(handle.handle_id)

    def instantiate_runner(self, handle: DeploymentHandle, n_inputs: int = 1, n_outputs: int = 1):
        """Bind a live deployment to its executable form.

        host-executor and simulated-fpga handles yield a Runner; source-sink
        handles yield the producer/consumer for the payload's resource.
        """
        with self._lock:
            entry = self._live.get(handle.handle_id)
            if entry is None:
                raise StaleHandleError(f"handle {handle.handle_id!r} is not live")
            proc, impl = entry
        if proc.backend_kind == "host-executor":
            return HostRunner(impl.payload, n_inputs, n_outputs)
        if proc.backend_kind == "simulated-fpga":
            return SimulatedFpgaRunner(impl.payload, n_inputs, n_outputs)
        role = impl.payload.get("role")
        resource = impl.payload.get("resource")
        if role == "source":
            return open_source(resource)
        if role == "sink":
            return open_sink(resource)
        raise BadResourceError(
            f"source-sink payload needs role source|sink and a resource, got {impl.payload!r}"
        )
