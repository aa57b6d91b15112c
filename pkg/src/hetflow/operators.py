"""Built-in operator catalog.

Operators are the behavior payloads executable by the host backend (and, via
configuration blobs, by the simulated-FPGA backend). Each firing consumes one
value per input port and yields one value per output port.

Catalog:
    identity            1 -> 1   pass-through
    add_const(k)        1 -> 1   x + k
    scale(k)            1 -> 1   x * k
    clamp(lo, hi)       1 -> 1   min(max(x, lo), hi)
    sum_window(n)       1 -> 1   sliding sum of the last n inputs
    sum                 N -> 1   sum of the firing's inputs
    tee                 1 -> N   copy of the input on every output

``sum`` and ``tee`` exist so fan-in/fan-out stays explicit in the graph while
channels remain single-producer/single-consumer.
"""

from __future__ import annotations

from collections import deque

from .errors import OperatorArityError, OperatorParamError, UnknownOperatorError


class Operator:
    """Stateful per-deployment evaluator; ``fire`` maps one input tuple to
    one output tuple."""

    name = "?"

    def fire(self, values: tuple) -> tuple:
        raise NotImplementedError


class _Identity(Operator):
    name = "identity"

    def fire(self, values):
        return (values[0],)


class _AddConst(Operator):
    name = "add_const"

    def __init__(self, k):
        self.k = k

    def fire(self, values):
        return (values[0] + self.k,)


class _Scale(Operator):
    name = "scale"

    def __init__(self, k):
        self.k = k

    def fire(self, values):
        return (values[0] * self.k,)


class _Clamp(Operator):
    name = "clamp"

    def __init__(self, lo, hi):
        self.lo = lo
        self.hi = hi

    def fire(self, values):
        x = values[0]
        return (self.lo if x < self.lo else self.hi if x > self.hi else x,)


class _SumWindow(Operator):
    name = "sum_window"

    def __init__(self, n: int):
        self.window = deque(maxlen=n)
        self.total = 0

    def fire(self, values):
        if len(self.window) == self.window.maxlen:
            self.total -= self.window[0]
        self.window.append(values[0])
        self.total += values[0]
        return (self.total,)


class _Sum(Operator):
    name = "sum"

    def fire(self, values):
        return (sum(values),)


class _Tee(Operator):
    name = "tee"

    def __init__(self, n_outputs: int):
        self.n_outputs = n_outputs

    def fire(self, values):
        return (values[0],) * self.n_outputs


def _number(params: dict, key: str):
    if key not in params:
        raise OperatorParamError(f"missing parameter {key!r}")
    v = params[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise OperatorParamError(f"parameter {key!r} must be a number, got {v!r}")
    return v


CATALOG = ("identity", "add_const", "scale", "clamp", "sum_window", "sum", "tee")


def make_operator(name: str, params: dict, n_inputs: int, n_outputs: int) -> Operator:
    """Build a fresh operator instance, validating parameters and arity."""
    params = params or {}

    def need(inputs_ok: bool, outputs_ok: bool):
        if not (inputs_ok and outputs_ok):
            raise OperatorArityError(
                f"operator {name!r} cannot serve {n_inputs} input(s) / {n_outputs} output(s)"
            )

    if name == "identity":
        need(n_inputs == 1, n_outputs == 1)
        return _Identity()
    if name == "add_const":
        need(n_inputs == 1, n_outputs == 1)
        return _AddConst(_number(params, "k"))
    if name == "scale":
        need(n_inputs == 1, n_outputs == 1)
        return _Scale(_number(params, "k"))
    if name == "clamp":
        need(n_inputs == 1, n_outputs == 1)
        lo, hi = _number(params, "lo"), _number(params, "hi")
        if lo > hi:
            raise OperatorParamError(f"clamp needs lo <= hi, got {lo} > {hi}")
        return _Clamp(lo, hi)
    if name == "sum_window":
        need(n_inputs == 1, n_outputs == 1)
        n = params.get("n")
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise OperatorParamError(f"sum_window needs positive integer n, got {n!r}")
        return _SumWindow(n)
    if name == "sum":
        need(n_inputs >= 1, n_outputs == 1)
        return _Sum()
    if name == "tee":
        need(n_inputs == 1, n_outputs >= 1)
        return _Tee(n_outputs)
    raise UnknownOperatorError(f"no built-in operator {name!r}")
