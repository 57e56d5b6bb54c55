"""Round-trip tests for recording directories and binary containers."""

import json

import numpy as np
import pytest

from earpipe.io import (
    RecordingFormatError,
    load_recording,
    read_container,
    save_recording,
    write_container,
)
from earpipe.signals import ChannelRole, Recording, SeizureAnnotation


def _sample_recording(seed=0):
    rng = np.random.default_rng(seed)
    return Recording(
        patient_id="p07",
        sample_rate=250.0,
        channels={
            ChannelRole.MIXED_LEFT: rng.standard_normal(500),
            ChannelRole.MIXED_RIGHT: rng.standard_normal(500),
        },
        imu=rng.standard_normal((3, 100)),
        imu_rate=50.0,
        annotations=[SeizureAnnotation(0.4, 1.2, "synthetic")],
    )


class TestRecordingRoundTrip:
    @pytest.mark.parametrize("payload", ["bin", "csv"])
    def test_bit_exact(self, tmp_path, payload):
        rec = _sample_recording()
        save_recording(rec, tmp_path / "rec", payload=payload)
        back = load_recording(tmp_path / "rec")
        assert back.patient_id == rec.patient_id
        assert back.sample_rate == rec.sample_rate
        assert back.imu_rate == rec.imu_rate
        assert back.roles == rec.roles
        for role in rec.roles:
            np.testing.assert_array_equal(back.channels[role], rec.channels[role])
        np.testing.assert_array_equal(back.imu, rec.imu)
        assert back.annotations == rec.annotations

    def test_no_imu(self, tmp_path):
        rec = _sample_recording()
        rec.imu = None
        save_recording(rec, tmp_path / "rec")
        back = load_recording(tmp_path / "rec")
        assert back.imu is None

    def test_missing_header_raises(self, tmp_path):
        (tmp_path / "rec").mkdir()
        with pytest.raises(RecordingFormatError):
            load_recording(tmp_path / "rec")

    def test_corrupt_header_raises(self, tmp_path):
        d = tmp_path / "rec"
        d.mkdir()
        (d / "header.json").write_text("{not json")
        with pytest.raises(RecordingFormatError):
            load_recording(d)

    def test_truncated_payload_raises(self, tmp_path):
        rec = _sample_recording()
        path = save_recording(rec, tmp_path / "rec", payload="bin")
        data_file = path / "signals.bin"
        data_file.write_bytes(data_file.read_bytes()[:-16])
        with pytest.raises(RecordingFormatError):
            load_recording(path)


class TestContainer:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(5)
        arrays = [rng.standard_normal((4, 7)), rng.standard_normal(13)]
        header = {"kind": "test", "note": "x"}
        path = tmp_path / "blob.earpipe"
        write_container(path, header, arrays)
        back_header, back_arrays = read_container(path)
        assert back_header["kind"] == "test"
        assert back_header["note"] == "x"
        assert len(back_arrays) == 2
        for a, b in zip(arrays, back_arrays):
            np.testing.assert_array_equal(a, b)

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "blob.earpipe"
        path.write_bytes(b"NOTMAGIC" + b"\x00" * 64)
        with pytest.raises(RecordingFormatError):
            read_container(path)
