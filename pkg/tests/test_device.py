import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rydseq.device import REFERENCE_DEVICE, ChannelSpec, Device, get_device, load_device
from rydseq.signal import BlackmanWaveform, Pulse

TWO_PI = 2 * math.pi
C6 = 19.10672378540039 * 8**6


def test_reference_c6():
    assert REFERENCE_DEVICE.c6 == C6
    assert REFERENCE_DEVICE.c6 == pytest.approx(5.0087e6, rel=1e-4)


def test_rabi_from_blockade_reference_value():
    assert REFERENCE_DEVICE.rabi_from_blockade(8) == 19.10672378540039


def test_blockade_radius_examples():
    assert REFERENCE_DEVICE.rydberg_blockade_radius(19.10672378540039) == pytest.approx(8.0, rel=1e-12)
    assert REFERENCE_DEVICE.rydberg_blockade_radius(REFERENCE_DEVICE.c6) == pytest.approx(1.0, rel=1e-12)
    assert REFERENCE_DEVICE.rydberg_blockade_radius(TWO_PI) == pytest.approx((C6 / TWO_PI) ** (1 / 6))
    assert REFERENCE_DEVICE.rydberg_blockade_radius(TWO_PI) == pytest.approx(9.63, abs=5e-3)
    assert REFERENCE_DEVICE.rabi_from_blockade(1) == REFERENCE_DEVICE.c6


@given(st.floats(0.1, 1000))
def test_conversions_are_inverse(r):
    omega = REFERENCE_DEVICE.rabi_from_blockade(r)
    assert REFERENCE_DEVICE.rydberg_blockade_radius(omega) == pytest.approx(r, rel=1e-9)


@given(st.floats(0.1, 500), st.floats(0.1, 500))
def test_conversions_decrease(a, b):
    if a < b:
        assert REFERENCE_DEVICE.rabi_from_blockade(a) > REFERENCE_DEVICE.rabi_from_blockade(b)
        assert REFERENCE_DEVICE.rydberg_blockade_radius(a) > REFERENCE_DEVICE.rydberg_blockade_radius(b)


@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_conversions_reject_non_positive(bad):
    with pytest.raises(ValueError):
        REFERENCE_DEVICE.rabi_from_blockade(bad)
    with pytest.raises(ValueError):
        REFERENCE_DEVICE.rydberg_blockade_radius(bad)


def test_validate_pulse_examples():
    omega_max = 2.3 * TWO_PI
    afm = Pulse.constant_pulse(500, omega_max, 0.0, 0.0)
    assert REFERENCE_DEVICE.validate_pulse("rydberg_global", afm) == []

    too_strong = Pulse.constant_pulse(100, 10 * 2.5 * TWO_PI, 0.0, 0.0)
    codes = [v.code for v in REFERENCE_DEVICE.validate_pulse("rydberg_global", too_strong)]
    assert codes == ["amplitude"]

    two_pi = Pulse.constant_detuning(BlackmanWaveform.from_max_val(REFERENCE_DEVICE.rabi_from_blockade(8), TWO_PI), 0, 0)
    assert REFERENCE_DEVICE.validate_pulse("rydberg_local", two_pi) == []


def test_validate_pulse_detuning_and_duration():
    p = Pulse.constant_pulse(8, 1.0, 30 * TWO_PI, 0.0)
    codes = {v.code for v in REFERENCE_DEVICE.validate_pulse("raman_local", p)}
    assert codes == {"detuning", "duration"}


def test_validate_pulse_pure():
    p = Pulse.constant_pulse(100, 100.0, 0.0, 0.0)
    assert REFERENCE_DEVICE.validate_pulse("raman_local", p) == REFERENCE_DEVICE.validate_pulse("raman_local", p)


def test_unknown_channel():
    with pytest.raises(KeyError):
        REFERENCE_DEVICE.validate_pulse("nope", Pulse.constant_pulse(20, 1, 0, 0))


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(max_amplitude=0.0),
        dict(detuning_range=(1.0, 2.0)),
        dict(min_duration=0),
        dict(addressing="Sideways"),
        dict(basis="xy"),
    ],
)
def test_channel_invariants(kwargs):
    base = dict(id="c", addressing="Local", basis="digital", max_amplitude=1.0, detuning_range=(-1, 1))
    base.update(kwargs)
    with pytest.raises(ValueError):
        ChannelSpec(**base)


def test_device_invariants():
    ch = ChannelSpec("a", "Global", "digital", 1.0, (-1, 1))
    with pytest.raises(ValueError):
        Device("d", -1.0, 4, 50, 10, [ch])
    with pytest.raises(ValueError):
        Device("d", 1.0, 4, 50, 10, [ch, ch])


def test_json_round_trip(tmp_path):
    data = REFERENCE_DEVICE.to_json()
    assert Device.from_json(json.loads(json.dumps(data))) == REFERENCE_DEVICE
    path = tmp_path / "dev.json"
    path.write_text(json.dumps(data))
    assert load_device(path) == REFERENCE_DEVICE
    assert get_device(str(path)) == REFERENCE_DEVICE


def test_env_default_device(tmp_path, monkeypatch):
    data = REFERENCE_DEVICE.to_json()
    data["name"] = "lab"
    path = tmp_path / "lab.json"
    path.write_text(json.dumps(data))
    monkeypatch.setenv("RYDSEQ_DEVICE_FILE", str(path))
    assert get_device().name == "lab"
    monkeypatch.delenv("RYDSEQ_DEVICE_FILE")
    assert get_device() is REFERENCE_DEVICE
