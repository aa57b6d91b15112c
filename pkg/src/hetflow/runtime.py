"""Pipeline execution engine.

Every edge of a validated graph becomes a bounded blocking channel; every
shell becomes a worker thread that fires strictly (one token per input per
firing) and fans its results out to the edge channels and sink taps bound to
its output ports. Sources emit their configured sequence and close; closure
cascades downstream, so every run with finite sources drains and stops on
its own. Channels are the only inter-worker communication.
"""

from __future__ import annotations

import threading
import time
import uuid
from collections import deque
from dataclasses import dataclass

from .backends import CollectSink, open_sink, open_source
from .errors import (
    InvalidGraphError,
    InvalidStateError,
    PlanInfeasibleError,
    PutAfterCloseError,
)
from .graph import DataflowGraph
from .matcher import commit_plan, plan_graph
from .registry import DeploymentHandle, Registry

DEFAULT_CHANNEL_CAPACITY = 64

CREATED = "created"
RUNNING = "running"
STOPPING = "stopping"
STOPPED = "stopped"
FAILED = "failed"


class _EndOfStream:
    def __repr__(self):
        return "END_OF_STREAM"


END_OF_STREAM = _EndOfStream()


@dataclass(frozen=True)
class Token:
    """Envelope for one value on one edge; seq is gap-free per channel."""

    seq: int
    payload: object


class Channel:
    """Bounded FIFO with blocking put/get and exactly-once delivery.

    After close, puts are rejected and gets drain the residue before
    reporting end-of-stream.
    """

    def __init__(self, capacity: int = DEFAULT_CHANNEL_CAPACITY, key: str = ""):
        if capacity < 1:
            raise ValueError("channel capacity must be >= 1")
        self.capacity = capacity
        self.key = key
        self._buf: deque[Token] = deque()
        self._lock = threading.Lock()
        self._readable = threading.Condition(self._lock)
        self._writable = threading.Condition(self._lock)
        self._closed = False
        self._next_seq = 0
        self.put_count = 0
        self.get_count = 0

    def put(self, value) -> Token:
        with self._writable:
            while len(self._buf) >= self.capacity and not self._closed:
                self._writable.wait()
            if self._closed:
                raise PutAfterCloseError(f"channel {self.key!r} is closed")
            token = Token(self._next_seq, value)
            self._next_seq += 1
            self._buf.append(token)
            self.put_count += 1
            self._readable.notify()
            return token

    def get(self):
        with self._readable:
            while not self._buf and not self._closed:
                self._readable.wait()
            if self._buf:
                token = self._buf.popleft()
                self.get_count += 1
                self._writable.notify()
                return token
            return END_OF_STREAM

    def close(self) -> None:
        with self._lock:
            self._closed = True
            self._readable.notify_all()
            self._writable.notify_all()

    @property
    def closed(self) -> bool:
        return self._closed


_LEGAL_TRANSITIONS = {
    CREATED: {RUNNING, FAILED},
    RUNNING: {STOPPING, FAILED},
    STOPPING: {STOPPED, FAILED},
    STOPPED: set(),
    FAILED: set(),
}


class RunSession:
    """One pipeline execution: channels, workers, deployment handles, stats."""

    def __init__(
        self,
        graph: DataflowGraph,
        plan,
        handles: list[DeploymentHandle],
        registry: Registry,
        channel_capacity: int = DEFAULT_CHANNEL_CAPACITY,
        session_id: str | None = None,
        on_transition=None,
    ):
        self.session_id = session_id or f"run-{uuid.uuid4().hex[:8]}"
        self.graph = graph
        self.plan = plan
        self.handles = handles
        self.registry = registry
        self.channel_capacity = channel_capacity
        self.state = CREATED
        self.error: Exception | None = None
        self._on_transition = on_transition
        # serializes state changes AND their event emission, so observers see
        # transitions in the order they actually happened
        self._tlock = threading.RLock()
        self._stop_event = threading.Event()
        self._finalized = False
        self._done = threading.Event()
        self._channels: dict[str, Channel] = {}
        self._sinks: dict[str, tuple[str, object]] = {}
        self._processed: dict[str, int] = {s: 0 for s in graph.shells}
        self._workers: list[threading.Thread] = []
        self._monitor: threading.Thread | None = None
        self._t0: float | None = None
        self._t1: float | None = None
        if on_transition:
            on_transition(self.session_id, CREATED)

    # --- state machine ------------------------------------------------------

    def _try_transition(self, from_state: str, to_state: str) -> bool:
        """Atomic compare-and-set; emits the transition event while still
        holding the lock so event order matches transition order."""
        with self._tlock:
            if self.state != from_state:
                return False
            self.state = to_state
            if self._on_transition:
                self._on_transition(self.session_id, to_state)
            return True

    def _fail(self, exc: Exception) -> None:
        with self._tlock:
            if self.error is None:
                self.error = exc
            if self.state in (STOPPED, FAILED):
                return
            self.state = FAILED
            if self._on_transition:
                self._on_transition(self.session_id, FAILED)
        self._stop_event.set()
        for ch in self._channels.values():
            ch.close()

    # --- wiring -------------------------------------------------------------

    def _build_and_start(self) -> None:
        graph = self.graph
        cap = self.channel_capacity

        # one channel per edge, per source binding, per sink binding
        edge_in: dict[tuple[str, str], Channel] = {}
        edge_out: dict[tuple[str, str], Channel] = {}
        for e in graph.edges:
            ch = Channel(cap, key=e.key())
            self._channels[ch.key] = ch
            edge_in[(e.to_shell, e.to_port)] = ch
            edge_out[(e.from_shell, e.from_port)] = ch
        source_channels: list[tuple[Channel, str]] = []
        for (shell_id, port), resource in sorted(graph.sources.items()):
            ch = Channel(cap, key=f"source:{shell_id}.{port}")
            self._channels[ch.key] = ch
            edge_in[(shell_id, port)] = ch
            source_channels.append((ch, resource))
        sink_taps: dict[tuple[str, str], Channel] = {}
        for (shell_id, port), resource in sorted(graph.sinks.items()):
            key = f"sink:{shell_id}.{port}"
            ch = Channel(cap, key=key)
            self._channels[key] = ch
            sink_taps[(shell_id, port)] = ch
            self._sinks[key] = (resource, open_sink(resource))

        # runners, one per deployed shell (handles arrive in shell-id order)
        runners: dict[str, object] = {}
        for shell_id, handle in zip(sorted(self.plan.assignments), self.handles):
            shell = graph.shells[shell_id]
            runners[shell_id] = self.registry.instantiate_runner(
                handle, n_inputs=len(shell.inputs), n_outputs=len(shell.outputs)
            )

        # worker threads
        for ch, resource in source_channels:
            reader = open_source(resource)
            self._workers.append(
                threading.Thread(
                    target=self._source_loop,
                    args=(ch, reader),
                    name=f"{self.session_id}-{ch.key}",
                    daemon=True,
                )
            )
        for shell_id in sorted(graph.shells):
            shell = graph.shells[shell_id]
            ins = [edge_in[(shell_id, p.name)] for p in shell.inputs]
            outs = []
            for p in shell.outputs:
                dests = []
                if (shell_id, p.name) in edge_out:
                    dests.append(edge_out[(shell_id, p.name)])
                if (shell_id, p.name) in sink_taps:
                    dests.append(sink_taps[(shell_id, p.name)])
                outs.append(dests)
            self._workers.append(
                threading.Thread(
                    target=self._shell_loop,
                    args=(shell_id, runners[shell_id], ins, outs),
                    name=f"{self.session_id}-{shell_id}",
                    daemon=True,
                )
            )
        for key in sorted(self._sinks):
            _, sink = self._sinks[key]
            self._workers.append(
                threading.Thread(
                    target=self._sink_loop,
                    args=(sink_taps[_sink_ref(key)], sink),
                    name=f"{self.session_id}-{key}",
                    daemon=True,
                )
            )

        self._t0 = time.monotonic()
        self._try_transition(CREATED, RUNNING)
        for t in self._workers:
            t.start()
        self._monitor = threading.Thread(
            target=self._monitor_loop, name=f"{self.session_id}-monitor", daemon=True
        )
        self._monitor.start()

    # --- worker bodies --------------------------------------------------------

    def _source_loop(self, channel: Channel, reader) -> None:
        try:
            for value in reader:
                if self._stop_event.is_set():
                    break
                channel.put(value)
        except PutAfterCloseError:
            pass
        except Exception as e:  # resource errors fail the whole run
            self._fail(e)
        finally:
            channel.close()

    def _shell_loop(self, shell_id: str, runner, ins: list[Channel], outs) -> None:
        try:
            if not ins:
                return
            while True:
                values = []
                ended = False
                for ch in ins:
                    token = ch.get()
                    if token is END_OF_STREAM:
                        ended = True
                        break
                    values.append(token.payload)
                if ended:
                    break
                results = runner.fire(tuple(values))
                for dests, value in zip(outs, results):
                    for ch in dests:
                        ch.put(value)
                self._processed[shell_id] += 1
        except PutAfterCloseError:
            pass
        except Exception as e:
            self._fail(e)
        finally:
            # closing inputs too tells upstream producers to stop on
            # unequal-length streams instead of blocking forever
            for ch in ins:
                ch.close()
            for dests in outs:
                for ch in dests:
                    ch.close()

    def _sink_loop(self, channel: Channel, sink) -> None:
        try:
            while True:
                token = channel.get()
                if token is END_OF_STREAM:
                    break
                sink.accept(token.payload)
        except Exception as e:
            self._fail(e)
        finally:
            channel.close()
            sink.close()

    def _monitor_loop(self) -> None:
        for t in self._workers:
            t.join()
        self._finalize()

    def _finalize(self) -> None:
        with self._tlock:
            if self._finalized:
                return
            self._finalized = True
        self._t1 = time.monotonic()
        for handle in self.handles:
            try:
                self.registry.undeploy(handle)
            except Exception:
                pass  # already undeployed by an earlier cleanup path
        self._try_transition(RUNNING, STOPPING)
        self._try_transition(STOPPING, STOPPED)
        self._done.set()

    # --- public surface ---------------------------------------------------------

    def request_stop(self) -> None:
        """Ask sources to stop; downstream drains what is in flight."""
        if self.state == CREATED:
            raise InvalidStateError("session was never started")
        self._try_transition(RUNNING, STOPPING)
        self._stop_event.set()

    def wait(self, timeout: float | None = None) -> bool:
        """Block until the session reaches stopped or failed."""
        return self._done.wait(timeout)

    def stats(self) -> dict:
        """Point-in-time snapshot; all counters are monotone during a run."""
        if self._t0 is None:
            duration = 0.0
        else:
            duration = (self._t1 or time.monotonic()) - self._t0
        sinks = {}
        for key, (resource, sink) in sorted(self._sinks.items()):
            entry: dict = {"resource": resource}
            if isinstance(sink, CollectSink):
                entry["values"] = list(sink.values)
            else:
                entry["path"] = getattr(sink, "path", None)
            sinks[key] = entry
        out = {
            "session": self.session_id,
            "state": self.state,
            "duration_s": duration,
            "tokens_per_edge": {k: ch.get_count for k, ch in sorted(self._channels.items())},
            "edge_counters": {
                k: {"produced": ch.put_count, "consumed": ch.get_count}
                for k, ch in sorted(self._channels.items())
            },
            "processed_per_shell": dict(sorted(self._processed.items())),
            "sinks": sinks,
            "error": None if self.error is None else str(self.error),
        }
        return out

    def sink_values(self, shell_id: str, port: str) -> list:
        """Contents of a collect sink bound to the given output."""
        key = f"sink:{shell_id}.{port}"
        resource, sink = self._sinks[key]
        if not isinstance(sink, CollectSink):
            raise InvalidStateError(f"sink {key} ({resource}) is not a collect sink")
        return list(sink.values)


def _sink_ref(key: str) -> tuple[str, str]:
    # "sink:SHELL.PORT" -> (SHELL, PORT)
    ref = key.split(":", 1)[1]
    shell_id, port = ref.split(".", 1)
    return shell_id, port


def start_run(
    graph: DataflowGraph,
    registry: Registry,
    mode: str = "greedy",
    channel_capacity: int = DEFAULT_CHANNEL_CAPACITY,
    session_id: str | None = None,
    on_transition=None,
) -> RunSession:
    """Plan, commit, wire, and start one pipeline run.

    Raises InvalidGraph for structural problems, PlanInfeasible when no
    deployable assignment exists, CommitFailed when deployment races lose.
    """
    violations = [v for v in graph.validate() if v.severity == "error"]
    if violations:
        raise InvalidGraphError("graph does not validate", violations)
    plan = plan_graph(graph, registry, mode)
    if not plan.complete:
        raise PlanInfeasibleError("no compatible and deployable assignment", plan.report)
    handles = commit_plan(plan, registry)
    session = RunSession(
        graph,
        plan,
        handles,
        registry,
        channel_capacity=channel_capacity,
        session_id=session_id,
        on_transition=on_transition,
    )
    try:
        session._build_and_start()
    except Exception:
        for h in reversed(handles):
            try:
                registry.undeploy(h)
            except Exception:
                pass
        raise
    return session


def stop_run(session: RunSession, timeout: float = 10.0) -> RunSession:
    """Stop a session and wait for the drain to finish.

    Stopping an already-stopped session is a no-op; stopping a never-started
    one is an error. On timeout the channels are force-closed.
    """
    session.request_stop()
    if not session.wait(timeout):
        for ch in session._channels.values():
            ch.close()
        if not session.wait(timeout):
            # a worker is stuck in external I/O; reclaim capacity anyway
            session._finalize()
    return session


def session_stats(session: RunSession) -> dict:
    return session.stats()
