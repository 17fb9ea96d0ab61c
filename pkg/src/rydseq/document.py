"""JSON sequence documents.

Layout::

    {"schema_version": 1,
     "device": "reference_device" | {...inline device...},
     "register": {"atoms": [{"name", "x_um", "y_um"}, ...]},
     "variables": [{"name", "size"}, ...],
     "operations": [{"op": "declare_channel", "name", "channel_id", "initial_target"},
                    {"op": "add", "pulse", "channel", "protocol"}, ...]}

Inside operations, a value is one of: a number, a string, a list, a
waveform ``{"kind", "duration_ns", "params"}``, a pulse ``{"amplitude",
"detuning", "phase_rad"}``, an expression ``{"expr": ...}`` or a deferred
constructor call ``{"factory", "kwargs"}``.
"""

from __future__ import annotations

import inspect
import json
from collections.abc import Mapping
from typing import Any

from .device import REFERENCE_DEVICE, get_device
from .params import FACTORIES, Deferred, Expression, Variable, expression_from_json
from .register import Register
from .sequence import Sequence
from .signal import (
    ArbitraryWaveform,
    BlackmanWaveform,
    ConstantWaveform,
    Pulse,
    RampWaveform,
    Waveform,
)

__all__ = [
    "SCHEMA_VERSION",
    "DocumentError",
    "sequence_to_json",
    "sequence_from_json",
    "dumps",
    "loads",
    "save",
    "load",
]

SCHEMA_VERSION = 1
OPERATIONS = ("declare_channel", "target", "add", "delay", "align", "phase_shift", "measure")
_BUILTIN_DEVICES = {REFERENCE_DEVICE.name: REFERENCE_DEVICE}
_WAVEFORMS = {
    "constant": lambda d, p: ConstantWaveform(d, p["value"]),
    "ramp": lambda d, p: RampWaveform(d, p["start"], p["stop"]),
    "blackman": lambda d, p: BlackmanWaveform(d, p["area"]),
    "arbitrary": lambda d, p: ArbitraryWaveform(p["samples"]),
}


class DocumentError(ValueError):
    """Malformed or unsupported sequence document."""


def _signature(op: str) -> inspect.Signature:
    method = getattr(Sequence, op)
    return inspect.signature(getattr(method, "__wrapped__", method))


def _encode(x: Any) -> Any:
    if isinstance(x, Deferred):
        return {"factory": x.key, "kwargs": {k: _encode(v) for k, v in x.kwargs.items()}}
    if isinstance(x, Expression):
        return {"expr": x.to_json()}
    if isinstance(x, Waveform):
        return {"kind": x.kind, "duration_ns": x.duration, "params": x.params}
    if isinstance(x, Pulse):
        return {
            "amplitude": _encode(x.amplitude),
            "detuning": _encode(x.detuning),
            "phase_rad": x.phase,
        }
    if isinstance(x, (list, tuple, set, frozenset)):
        items = sorted(x) if isinstance(x, (set, frozenset)) else x
        return [_encode(v) for v in items]
    if x is None or isinstance(x, (str, bool)):
        return x
    if isinstance(x, int):
        return int(x)
    try:
        return float(x)
    except (TypeError, ValueError):
        raise DocumentError(f"cannot serialize {type(x).__name__} value {x!r}") from None


def _decode(x: Any, variables: Mapping[str, Variable]) -> Any:
    if isinstance(x, list):
        return [_decode(v, variables) for v in x]
    if not isinstance(x, Mapping):
        return x
    if "factory" in x:
        key = x["factory"]
        if key not in FACTORIES:
            raise DocumentError(f"unknown factory {key!r}")
        return Deferred(key, {k: _decode(v, variables) for k, v in x["kwargs"].items()})
    if "expr" in x:
        try:
            return expression_from_json(x["expr"], variables)
        except KeyError as exc:
            raise DocumentError(f"expression references undeclared variable {exc}") from None
    if "kind" in x:
        kind = x["kind"]
        if kind not in _WAVEFORMS:
            raise DocumentError(f"unknown waveform kind {kind!r}")
        return _WAVEFORMS[kind](x["duration_ns"], x.get("params", {}))
    if "amplitude" in x:
        return Pulse(
            _decode(x["amplitude"], variables),
            _decode(x["detuning"], variables),
            x["phase_rad"],
        )
    raise DocumentError(f"unrecognized value {dict(x)!r}")


def sequence_to_json(seq: Sequence, inline_device: bool = False) -> dict:
    device = seq.device
    if not inline_device and _BUILTIN_DEVICES.get(device.name) == device:
        dev: Any = device.name
    else:
        dev = device.to_json()
    ops = []
    for call in seq.calls:
        bound = _signature(call.name).bind(None, *call.args, **call.kwargs)
        bound.apply_defaults()
        entry = {"op": call.name}
        for name, value in list(bound.arguments.items())[1:]:
            entry[name] = _encode(value)
        ops.append(entry)
    return {
        "schema_version": SCHEMA_VERSION,
        "device": dev,
        "register": seq.register.to_json(),
        "variables": [{"name": v.name, "size": v.size} for v in seq.variables.values()],
        "operations": ops,
    }


def sequence_from_json(doc: Mapping) -> Sequence:
    """Rebuild a sequence by replaying the recorded operations.

    Device and scheduling errors surface as :class:`ValidationError` or
    :class:`SequenceError`; structural problems as :class:`DocumentError`.
    """
    if not isinstance(doc, Mapping):
        raise DocumentError("a sequence document must be a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise DocumentError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")
    try:
        raw_device = doc.get("device")
        if raw_device is not None and not isinstance(raw_device, (str, Mapping)):
            raise DocumentError("device must be a name, a file path or an object")
        register = Register.from_json(doc["register"])
        var_specs = doc.get("variables", [])
        ops = doc["operations"]
    except KeyError as exc:
        raise DocumentError(f"missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        raise DocumentError(str(exc)) from None
    try:
        # an absent device falls back to the environment default
        device = get_device(raw_device)
    except KeyError as exc:
        raise DocumentError(exc.args[0]) from None
    except (OSError, TypeError, ValueError) as exc:
        raise DocumentError(f"cannot load device: {exc}") from None

    seq = Sequence(register, device)
    variables = {}
    for spec in var_specs:
        variables[spec["name"]] = seq.declare_variable(spec["name"], int(spec.get("size", 1)))

    for i, entry in enumerate(ops):
        if not isinstance(entry, Mapping):
            raise DocumentError(f"operation {i} is not an object")
        op = entry.get("op")
        if op not in OPERATIONS:
            raise DocumentError(f"operation {i}: unknown op {op!r}")
        args, kwargs = [], {}
        for name, param in list(_signature(op).parameters.items())[1:]:
            if name not in entry:
                if param.default is inspect.Parameter.empty and param.kind is not param.VAR_POSITIONAL:
                    raise DocumentError(f"operation {i} ({op}): missing {name!r}")
                continue
            value = _decode(entry[name], variables)
            if param.kind is param.VAR_POSITIONAL:
                args.extend(value)
            elif param.kind is param.KEYWORD_ONLY:
                kwargs[name] = value
            else:
                args.append(value)
        getattr(seq, op)(*args, **kwargs)
    return seq


def dumps(seq: Sequence, inline_device: bool = False, indent: int | None = 2) -> str:
    return json.dumps(sequence_to_json(seq, inline_device), indent=indent, ensure_ascii=False)


def loads(text: str) -> Sequence:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON: {exc}") from None
    return sequence_from_json(doc)


def save(seq: Sequence, path, inline_device: bool = False) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(seq, inline_device))
        fh.write("\n")


def load(path) -> Sequence:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())

