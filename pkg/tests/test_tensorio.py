import numpy as np
import pytest

from tfchirp.errors import FormatError
from tfchirp.signal import Signal, grid_from_resolution
from tfchirp.tensorio import (
    read_signal_csv,
    read_signal_raw,
    read_tensor,
    read_wav,
    write_signal_csv,
    write_tensor,
    write_wav,
)
from tfchirp.transform import TfcTensor


def random_tensor(seed=0, dtype=np.complex128):
    rng = np.random.default_rng(seed)
    grid = grid_from_resolution(0.1, 6, 20.0)
    values = (rng.standard_normal((grid.n_chirp, grid.n_freq, 6)) + 1j * rng.standard_normal((grid.n_chirp, grid.n_freq, 6))).astype(dtype)
    return TfcTensor(values, grid)


@pytest.mark.parametrize("dtype", [np.complex64, np.complex128])
def test_tensor_round_trip(tmp_path, dtype):
    tensor = random_tensor(dtype=dtype)
    path = tmp_path / "a.tfc1"
    write_tensor(str(path), tensor, t0_s=1.5)
    back, t0 = read_tensor(str(path))
    assert t0 == 1.5
    assert back.values.dtype == np.dtype(dtype)
    assert np.array_equal(back.values, tensor.values)
    assert back.grid.alpha_sq == tensor.grid.alpha_sq
    # byte-identical rewrite
    write_tensor(str(tmp_path / "b.tfc1"), tensor, t0_s=1.5)
    assert (tmp_path / "a.tfc1").read_bytes() == (tmp_path / "b.tfc1").read_bytes()


def test_tensor_file_length(tmp_path):
    tensor = random_tensor()
    path = tmp_path / "t.tfc1"
    write_tensor(str(path), tensor)
    expected = 44 + tensor.values.size * 16
    assert path.stat().st_size == expected


def test_tensor_header_errors(tmp_path):
    path = tmp_path / "bad.tfc1"
    path.write_bytes(b"TFC1")
    with pytest.raises(FormatError):
        read_tensor(str(path))
    path.write_bytes(b"NOPE" + b"\0" * 60)
    with pytest.raises(FormatError):
        read_tensor(str(path))
    tensor = random_tensor()
    good = tmp_path / "good.tfc1"
    write_tensor(str(good), tensor)
    truncated = good.read_bytes()[:-8]
    bad = tmp_path / "short.tfc1"
    bad.write_bytes(truncated)
    with pytest.raises(FormatError):
        read_tensor(str(bad))


def test_wav_round_trip(tmp_path):
    fs = 8000
    x = np.arange(4000) / fs
    samples = 0.4 * np.sin(2 * np.pi * 440 * x)
    path = tmp_path / "tone.wav"
    write_wav(str(path), samples, fs)
    sig = read_wav(str(path))
    assert sig.sample_rate_hz == fs
    assert len(sig) == 4000
    assert np.max(np.abs(sig.samples.real - samples)) <= 1.0 / 32768
    assert not sig.samples.imag.any()


def test_wav_downsample(tmp_path):
    fs = 8000
    samples = np.zeros(1001)
    path = tmp_path / "z.wav"
    write_wav(str(path), samples, fs)
    sig = read_wav(str(path), downsample=8)
    assert len(sig) == int(np.ceil(1001 / 8))
    assert sig.sample_rate_hz == fs / 8


def test_wav_format_errors(tmp_path):
    bad = tmp_path / "bad.wav"
    bad.write_bytes(b"RIFF")
    with pytest.raises(FormatError):
        read_wav(str(bad))
    # stereo rejected
    import struct

    payload = struct.pack("<4sI4s", b"RIFF", 36, b"WAVE")
    payload += b"fmt " + struct.pack("<IHHIIHH", 16, 1, 2, 8000, 32000, 4, 16)
    payload += b"data" + struct.pack("<I", 0)
    stereo = tmp_path / "st.wav"
    stereo.write_bytes(payload)
    with pytest.raises(FormatError):
        read_wav(str(stereo))


def test_signal_csv_round_trip(tmp_path):
    rng = np.random.default_rng(4)
    sig = Signal(rng.standard_normal(20) + 1j * rng.standard_normal(20), 25.0, t0_s=0.5)
    path = tmp_path / "sig.csv"
    write_signal_csv(str(path), sig)
    back = read_signal_csv(str(path), 25.0, t0_s=0.5)
    assert np.array_equal(back.samples, sig.samples)


def test_signal_raw(tmp_path):
    rng = np.random.default_rng(5)
    data = rng.standard_normal(16)
    path = tmp_path / "sig.f64"
    data.astype("<f8").tofile(path)
    sig = read_signal_raw(str(path), 10.0)
    assert np.array_equal(sig.samples.real, data)
    inter = np.empty(32)
    inter[0::2] = data
    inter[1::2] = -data
    path2 = tmp_path / "sigc.f64"
    inter.astype("<f8").tofile(path2)
    sig2 = read_signal_raw(str(path2), 10.0, interleaved_complex=True)
    assert np.array_equal(sig2.samples, data - 1j * data)


def test_tensor_rejects_nonfinite_payload(tmp_path):
    tensor = random_tensor()
    values = tensor.values.copy()
    values[0, 0, 0] = np.nan + 0j
    path = tmp_path / "nan.tfc1"
    write_tensor(str(path), TfcTensor(values, tensor.grid))
    with pytest.raises(FormatError):
        read_tensor(str(path))
