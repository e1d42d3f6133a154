import os
import struct

import numpy as np
import pytest

from svbrdf_forge.fileio import atomic_write_bytes
from svbrdf_forge.pfm import read_pfm, write_pfm


def test_color_roundtrip_bit_identical(tmp_path):
    img = np.zeros((1, 1, 3), dtype=np.float32)
    img[0, 0] = [0.5, 0.25, 1.0e6]
    path = tmp_path / "one.pfm"
    write_pfm(path, img)
    back = read_pfm(path)
    assert back.dtype == np.float32
    np.testing.assert_array_equal(back, img)


def test_roundtrip_preserves_every_float32(tmp_path):
    rng = np.random.default_rng(0)
    img = rng.normal(size=(7, 5, 3)).astype(np.float32) * 1e3
    img[0, 0, 0] = np.float32(1.1754944e-38)
    img[1, 2, 1] = np.float32(3.4e38)
    path = tmp_path / "range.pfm"
    write_pfm(path, img)
    np.testing.assert_array_equal(read_pfm(path), img)


def test_grayscale_roundtrip(tmp_path):
    img = np.arange(12, dtype=np.float32).reshape(3, 4) / 7.0
    path = tmp_path / "gray.pfm"
    write_pfm(path, img)
    back = read_pfm(path)
    assert back.shape == (3, 4)
    np.testing.assert_array_equal(back, img)


def test_rows_stored_bottom_up(tmp_path):
    img = np.array([[1.0, 2.0], [3.0, 4.0]], dtype=np.float32)
    path = tmp_path / "order.pfm"
    write_pfm(path, img)
    raw = path.read_bytes()
    header = b"Pf\n2 2\n-1.0\n"
    assert raw.startswith(header)
    floats = struct.unpack("<4f", raw[len(header):])
    # File order starts with the bottom image row.
    assert floats == (3.0, 4.0, 1.0, 2.0)


def test_reads_big_endian_positive_scale(tmp_path):
    payload = struct.pack(">4f", 3.0, 4.0, 1.0, 2.0)
    path = tmp_path / "big.pfm"
    path.write_bytes(b"Pf\n2 2\n1.0\n" + payload)
    back = read_pfm(path)
    np.testing.assert_array_equal(
        back, np.array([[1.0, 2.0], [3.0, 4.0]], dtype=np.float32))


def test_scale_magnitude_multiplies(tmp_path):
    payload = struct.pack("<2f", 1.5, -2.0)
    path = tmp_path / "scaled.pfm"
    path.write_bytes(b"Pf\n2 1\n-4.0\n" + payload)
    back = read_pfm(path)
    np.testing.assert_allclose(back, [[6.0, -8.0]], atol=0.0)


def test_write_rejects_non_finite(tmp_path):
    bad = np.ones((2, 2, 3), dtype=np.float32)
    bad[0, 1, 2] = np.nan
    with pytest.raises(ValueError):
        write_pfm(tmp_path / "nan.pfm", bad)
    bad[0, 1, 2] = np.inf
    with pytest.raises(ValueError):
        write_pfm(tmp_path / "inf.pfm", bad)
    assert not (tmp_path / "nan.pfm").exists()


def test_write_rejects_bad_shapes(tmp_path):
    with pytest.raises(ValueError):
        write_pfm(tmp_path / "bad.pfm", np.ones((2, 2, 4)))
    with pytest.raises(ValueError):
        write_pfm(tmp_path / "bad.pfm", np.ones(5))


def test_read_rejects_non_finite_payload(tmp_path):
    payload = struct.pack("<2f", 1.0, float("nan"))
    path = tmp_path / "nan.pfm"
    path.write_bytes(b"Pf\n2 1\n-1.0\n" + payload)
    with pytest.raises(ValueError):
        read_pfm(path)


def test_read_rejects_malformed_files(tmp_path):
    cases = {
        "magic.pfm": b"P6\n2 1\n-1.0\n" + b"\x00" * 8,
        "dims.pfm": b"Pf\n2\n-1.0\n" + b"\x00" * 8,
        "zero_dim.pfm": b"Pf\n0 1\n-1.0\n",
        "scale.pfm": b"Pf\n2 1\n0.0\n" + b"\x00" * 8,
        "short.pfm": b"Pf\n2 2\n-1.0\n" + b"\x00" * 8,
    }
    for name, blob in cases.items():
        path = tmp_path / name
        path.write_bytes(blob)
        with pytest.raises(ValueError):
            read_pfm(path)


def test_atomic_write_replaces_and_cleans_up(tmp_path):
    path = tmp_path / "out.bin"
    path.write_bytes(b"old")
    atomic_write_bytes(path, b"new contents")
    assert path.read_bytes() == b"new contents"
    # No temp droppings left beside the target.
    assert os.listdir(tmp_path) == ["out.bin"]
