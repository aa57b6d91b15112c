"""Execution backends behind the processor abstraction.

Three backend kinds exist:

* ``host-executor`` evaluates named built-in operators in-process.
* ``simulated-fpga`` stands in for a reconfigurable device: it accepts an
  opaque configuration blob reference (``bitstream:<op>?k=1``), decodes it
  into a simulated fabric, counts reconfigurations, and can apply an
  artificial reconfiguration delay. Its evaluation path is deliberately
  separate from the host executor's so the two can be checked against each
  other.
* ``source-sink`` exposes PC data resources (in-memory sequences, files,
  collect buffers) as producers and consumers.

A real device driver would implement the same surface.
"""

from __future__ import annotations

from urllib.parse import parse_qsl, urlsplit

from .errors import (
    BadResourceError,
    OperatorArityError,
    OperatorParamError,
    UnknownOperatorError,
)
from .operators import make_operator

BACKEND_KINDS = ("host-executor", "simulated-fpga", "source-sink")


class Runner:
    """Executable form of a deployed implementation."""

    backend_kind = "?"

    def fire(self, values: tuple) -> tuple:
        raise NotImplementedError


class HostRunner(Runner):
    """Evaluates a named built-in operator directly."""

    backend_kind = "host-executor"

    def __init__(self, payload: dict, n_inputs: int = 1, n_outputs: int = 1):
        name = payload.get("operator")
        if not name:
            raise UnknownOperatorError("host backend needs a named built-in operator")
        self._op = make_operator(name, payload.get("params") or {}, n_inputs, n_outputs)
        self.operator = name

    def fire(self, values: tuple) -> tuple:
        return self._op.fire(values)


# --- simulated FPGA fabric -------------------------------------------------

def decode_blob(blob: str) -> tuple[str, dict]:
    """Decode a configuration blob reference ``bitstream:<op>?k=1&lo=0``.

    Query values become ints when possible, floats otherwise.
    """
    parts = urlsplit(blob)
    if parts.scheme != "bitstream" or not parts.path:
        raise BadResourceError(f"not a configuration blob reference: {blob!r}")
    params: dict = {}
    for key, raw in parse_qsl(parts.query, keep_blank_values=True):
        try:
            params[key] = int(raw)
        except ValueError:
            try:
                params[key] = float(raw)
            except ValueError:
                raise OperatorParamError(f"blob parameter {key}={raw!r} is not numeric")
    return parts.path, params


class SimulatedFpgaRunner(Runner):
    """Behaves like a configured hardware pipeline.

    The fabric is a register bank plus a combinational step function wired up
    at configuration time; state (the register bank) models on-chip storage.
    """

    backend_kind = "simulated-fpga"

    def __init__(self, payload: dict, n_inputs: int = 1, n_outputs: int = 1):
        if payload.get("blob"):
            name, params = decode_blob(payload["blob"])
        elif payload.get("operator"):
            name, params = payload["operator"], dict(payload.get("params") or {})
        else:
            raise UnknownOperatorError("fpga backend needs a blob reference or operator config")
        self.operator = name
        self._step = _configure_fabric(name, params, n_inputs, n_outputs)

    def fire(self, values: tuple) -> tuple:
        return self._step(values)


def _num(params: dict, key: str):
    if key not in params or isinstance(params[key], bool) or not isinstance(
        params[key], (int, float)
    ):
        raise OperatorParamError(f"fabric config needs numeric {key!r}")
    return params[key]


def _configure_fabric(name: str, params: dict, n_in: int, n_out: int):
    """Wire a step function for the named configuration.

    Kept independent of the host executor's operator objects on purpose.
    """
    def require(ok_in: bool, ok_out: bool):
        if not (ok_in and ok_out):
            raise OperatorArityError(
                f"fabric {name!r} cannot serve {n_in} input(s) / {n_out} output(s)"
            )

    if name == "identity":
        require(n_in == 1, n_out == 1)
        return lambda v: (v[0],)

    if name == "add_const":
        require(n_in == 1, n_out == 1)
        k = _num(params, "k")
        return lambda v: (v[0] + k,)

    if name == "scale":
        require(n_in == 1, n_out == 1)
        k = _num(params, "k")
        return lambda v: (v[0] * k,)

    if name == "clamp":
        require(n_in == 1, n_out == 1)
        lo, hi = _num(params, "lo"), _num(params, "hi")
        if lo > hi:
            raise OperatorParamError(f"fabric clamp needs lo <= hi, got {lo} > {hi}")

        def clamp_step(v):
            x = v[0]
            if x < lo:
                return (lo,)
            if x > hi:
                return (hi,)
            return (x,)

        return clamp_step

    if name == "sum_window":
        n = params.get("n")
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise OperatorParamError(f"fabric sum_window needs positive integer n, got {n!r}")
        require(n_in == 1, n_out == 1)
        # fixed-size shift register with a valid bit per slot, as on silicon
        regs = [0] * n
        valid = [False] * n
        head = 0

        def window_step(v):
            nonlocal head
            regs[head] = v[0]
            valid[head] = True
            head = (head + 1) % n
            return (sum(r for r, ok in zip(regs, valid) if ok),)

        return window_step

    if name == "sum":
        require(n_in >= 1, n_out == 1)

        def adder_tree(v):
            acc = v[0]
            for x in v[1:]:
                acc = acc + x
            return (acc,)

        return adder_tree

    if name == "tee":
        require(n_in == 1, n_out >= 1)
        return lambda v: (v[0],) * n_out

    raise UnknownOperatorError(f"no fabric configuration for {name!r}")


# --- source / sink resources -----------------------------------------------

def parse_resource(uri: str) -> tuple[str, str]:
    """Split a resource URI into (kind, argument).

    Supported kinds: ``seq:<comma-list>``, ``file:<path>``, ``collect:``.
    """
    if not isinstance(uri, str) or ":" not in uri:
        raise BadResourceError(f"resource URI must look like kind:arg, got {uri!r}")
    kind, _, arg = uri.partition(":")
    if kind not in ("seq", "file", "collect"):
        raise BadResourceError(f"unknown resource kind {kind!r} in {uri!r}")
    return kind, arg


class SourceReader:
    """Produces the configured token sequence, then ends."""

    backend_kind = "source-sink"

    def __init__(self, uri: str):
        kind, arg = parse_resource(uri)
        self.uri = uri
        if kind == "seq":
            items = [s.strip() for s in arg.split(",")] if arg.strip() else []
            try:
                self._values = [int(s) for s in items]
            except ValueError:
                raise BadResourceError(f"seq resource holds non-decimal token: {uri!r}")
            self._path = None
        elif kind == "file":
            self._values = None
            self._path = arg
        else:
            raise BadResourceError(f"resource {uri!r} cannot act as a source")

    def __iter__(self):
        if self._values is not None:
            yield from self._values
            return
        with open(self._path, "r", encoding="ascii") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    yield int(line)
                except ValueError:
                    raise BadResourceError(
                        f"file source {self._path!r} holds non-decimal line {line!r}"
                    )


class CollectSink:
    """In-memory sink; contents stay readable after the run."""

    backend_kind = "source-sink"

    def __init__(self, uri: str):
        self.uri = uri
        self.values: list = []

    def accept(self, value) -> None:
        self.values.append(value)

    def close(self) -> None:
        pass


class FileSink:
    """Writes one decimal token per line."""

    backend_kind = "source-sink"

    def __init__(self, uri: str):
        kind, arg = parse_resource(uri)
        if kind != "file":
            raise BadResourceError(f"resource {uri!r} cannot act as a file sink")
        self.uri = uri
        self.path = arg
        self._fh = open(arg, "w", encoding="ascii")

    def accept(self, value) -> None:
        self._fh.write(f"{value}\n")

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.close()


def open_source(uri: str) -> SourceReader:
    return SourceReader(uri)


def open_sink(uri: str):
    kind, _ = parse_resource(uri)
    if kind == "collect":
        return CollectSink(uri)
    if kind == "file":
        return FileSink(uri)
    raise BadResourceError(f"resource {uri!r} cannot act as a sink")
