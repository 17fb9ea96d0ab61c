import json

import numpy as np
import pytest

from rydseq import document
from rydseq.device import REFERENCE_DEVICE, ValidationError
from rydseq.document import DocumentError, dumps, loads, sequence_from_json, sequence_to_json
from rydseq.protocols import afm_sequence, afm_sweep_sequence, bell_sequence, qaoa_mis_sequence
from rydseq.register import Register
from rydseq.sampler import sample_sequence
from rydseq.sequence import Sequence, SequenceError
from rydseq.signal import ArbitraryWaveform, BlackmanWaveform, Pulse, RampWaveform


def _slots(seq):
    return {name: seq.slots(name) for name in seq.declared_channels}


@pytest.mark.parametrize("factory", [bell_sequence, afm_sequence])
def test_concrete_round_trip(factory):
    seq = factory()
    back = loads(dumps(seq))
    assert _slots(back) == _slots(seq)
    assert back.measurement_basis == seq.measurement_basis
    assert sample_sequence(back) == sample_sequence(seq)
    assert sequence_to_json(back) == sequence_to_json(seq)


def test_parametrized_round_trip_builds_identically():
    seq = qaoa_mis_sequence(layers=2)
    back = loads(dumps(seq))
    assert back.is_parametrized()
    assert {n: v.size for n, v in back.variables.items()} == {"t_list": 2, "s_list": 2}
    vals = dict(t_list=[0.7, 1.3], s_list=[0.2, 2.1])
    assert _slots(back.build(**vals)) == _slots(seq.build(**vals))


def test_sweep_template_round_trip():
    seq = afm_sweep_sequence()
    back = loads(dumps(seq))
    assert _slots(back.build(delta_f=7.0)) == _slots(seq.build(delta_f=7.0))


def test_phase_shift_and_arbitrary_waveform_round_trip():
    seq = Sequence(Register({"a": (0, 0), "b": (5, 0)}), REFERENCE_DEVICE)
    seq.declare_channel("d", "raman_local", initial_target=["a", "b"])
    seq.phase_shift(0.3, "a", "b", basis="digital")
    seq.add(Pulse(ArbitraryWaveform(np.linspace(0, 2, 20)), RampWaveform(20, -1, 1), 1.0), "d")
    seq.delay(10, "d")
    seq.add(Pulse.constant_detuning(BlackmanWaveform(100, 1.0), 0.5, 0.0), "d", protocol="no-delay")
    seq.measure("digital")
    back = loads(dumps(seq))
    assert _slots(back) == _slots(seq)


def test_device_embedding(tmp_path):
    seq = bell_sequence()
    assert sequence_to_json(seq)["device"] == "reference_device"
    inline = sequence_to_json(seq, inline_device=True)
    assert inline["device"]["name"] == "reference_device"
    assert _slots(sequence_from_json(inline)) == _slots(seq)
    path = tmp_path / "bell.json"
    document.save(seq, path)
    assert json.loads(path.read_text())["schema_version"] == 1
    assert _slots(document.load(path)) == _slots(seq)


def test_missing_device_uses_default():
    doc = sequence_to_json(bell_sequence())
    del doc["device"]
    assert sequence_from_json(doc).device is REFERENCE_DEVICE


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d.update(schema_version=2),
        lambda d: d.pop("schema_version"),
        lambda d: d.pop("register"),
        lambda d: d.update(device="no_such_device"),
        lambda d: d.update(device=42),
        lambda d: d["operations"].append({"op": "explode"}),
        lambda d: d["operations"].append("add"),
        lambda d: d["operations"].append({"op": "delay", "channel": "digital"}),
    ],
)
def test_malformed_documents(mutate):
    doc = sequence_to_json(bell_sequence())
    doc["operations"] = [op for op in doc["operations"] if op["op"] != "measure"]
    mutate(doc)
    with pytest.raises(DocumentError):
        sequence_from_json(doc)


def test_invalid_json_text():
    with pytest.raises(DocumentError):
        loads("{not json")
    with pytest.raises(DocumentError):
        loads("[1, 2]")


def test_device_violations_surface():
    doc = sequence_to_json(bell_sequence())
    doc["register"] = Register({"c": (0, 0), "t": (1, 0)}).to_json()
    with pytest.raises(ValidationError):
        sequence_from_json(doc)


def test_scheduling_errors_surface():
    doc = sequence_to_json(bell_sequence())
    doc["operations"].append({"op": "delay", "duration": 10, "channel": "digital"})
    with pytest.raises(SequenceError):
        sequence_from_json(doc)
