import struct

import numpy as np
import pytest

from svbrdf_forge.containers import (
    NBRF_MAGIC,
    NBRF_VERSION,
    load_networks,
    load_param_map,
    save_networks,
    save_param_map,
)
from svbrdf_forge.estimator import UNet, UNetSpec
from svbrdf_forge.mlp import (
    DenseLayer,
    MlpNet,
    make_nd_enc_net,
    make_renderer_net,
)
from svbrdf_forge.nbrdf import NeuralParamMap

TOY_SPEC = UNetSpec(3, 2, 2, 2, 3)


def pack_str(s: str) -> bytes:
    data = s.encode("utf-8")
    return struct.pack("<I", len(data)) + data


def quantize_mlp(net: MlpNet) -> MlpNet:
    # Weights and the slope travel as float32, so exact roundtrips need
    # f32 values going in.
    for layer in net.layers:
        layer.weights[...] = layer.weights.astype(np.float32)
        layer.bias[...] = layer.bias.astype(np.float32)
        layer.slope = float(np.float32(layer.slope))
    return net


def test_mlp_roundtrip_bit_identical(tmp_path):
    gen = np.random.default_rng(0)
    renderer = quantize_mlp(make_renderer_net(gen))
    nd_enc = quantize_mlp(make_nd_enc_net(gen))
    path = tmp_path / "nets.nbrf"
    save_networks(path, renderer=renderer, nd_enc=nd_enc)
    loaded = load_networks(path)
    assert set(loaded) == {"renderer", "nd_enc"}
    for original, name in ((renderer, "renderer"), (nd_enc, "nd_enc")):
        net = loaded[name]
        assert len(net.layers) == len(original.layers)
        for got, want in zip(net.layers, original.layers):
            assert got.activation == want.activation
            assert got.slope == want.slope
            assert got.weights.dtype == np.float64
            np.testing.assert_array_equal(got.weights, want.weights)
            np.testing.assert_array_equal(got.bias, want.bias)
    probe = np.random.default_rng(1).normal(size=(4, 96))
    np.testing.assert_array_equal(loaded["renderer"].forward(probe),
                                  renderer.forward(probe))


def test_slope_survives_as_float32(tmp_path):
    layer = DenseLayer(np.zeros((2, 3), dtype=np.float64), np.zeros(2),
                       "leaky", 0.25)
    path = tmp_path / "slope.nbrf"
    save_networks(path, renderer=MlpNet([layer]))
    assert load_networks(path)["renderer"].layers[0].slope == 0.25
    layer = DenseLayer(np.zeros((2, 3), dtype=np.float64), np.zeros(2),
                       "leaky", 0.2)
    save_networks(path, renderer=MlpNet([layer]))
    got = load_networks(path)["renderer"].layers[0].slope
    assert got == float(np.float32(0.2))


def test_unet_roundtrip(tmp_path):
    unet = UNet(TOY_SPEC, np.random.default_rng(2))
    for a in unet.param_arrays():
        a[...] = a.astype(np.float32)
    path = tmp_path / "unet.nbrf"
    save_networks(path, unet=unet)
    loaded = load_networks(path)["unet"]
    assert loaded.spec == TOY_SPEC
    for got, want in zip(loaded.param_arrays(), unet.param_arrays()):
        np.testing.assert_array_equal(got, want)
    x = np.random.default_rng(3).normal(size=(3, 8, 8))
    np.testing.assert_array_equal(loaded.forward(x), unet.forward(x))


def test_save_load_save_is_byte_stable(tmp_path):
    gen = np.random.default_rng(4)
    first = tmp_path / "a.nbrf"
    second = tmp_path / "b.nbrf"
    save_networks(first, nd_enc=make_nd_enc_net(gen),
                  unet=UNet(TOY_SPEC, gen))
    loaded = load_networks(first)
    save_networks(second, nd_enc=loaded["nd_enc"], unet=loaded["unet"])
    assert first.read_bytes() == second.read_bytes()


def test_subset_and_empty_saves(tmp_path):
    path = tmp_path / "solo.nbrf"
    save_networks(path, renderer=make_renderer_net(np.random.default_rng(5)))
    assert set(load_networks(path)) == {"renderer"}
    with pytest.raises(ValueError):
        save_networks(tmp_path / "none.nbrf")


def test_rejects_bad_magic_and_version(tmp_path):
    path = tmp_path / "bad.nbrf"
    path.write_bytes(b"XXXX" + struct.pack("<II", NBRF_VERSION, 0))
    with pytest.raises(ValueError):
        load_networks(path)
    path.write_bytes(NBRF_MAGIC + struct.pack("<II", NBRF_VERSION + 1, 0))
    with pytest.raises(ValueError):
        load_networks(path)


def test_rejects_unknown_section_and_kind(tmp_path):
    path = tmp_path / "bad.nbrf"
    head = NBRF_MAGIC + struct.pack("<II", NBRF_VERSION, 1)
    path.write_bytes(head + pack_str("mystery") + pack_str("mlp"))
    with pytest.raises(ValueError, match="unknown NBRF section"):
        load_networks(path)
    path.write_bytes(head + pack_str("renderer") + pack_str("blob"))
    with pytest.raises(ValueError, match="section kind"):
        load_networks(path)


def test_rejects_bad_slope_duplicate_trailing_truncated(tmp_path):
    head = NBRF_MAGIC + struct.pack("<II", NBRF_VERSION, 1)
    path = tmp_path / "bad.nbrf"
    path.write_bytes(head + pack_str("renderer") + pack_str("mlp")
                     + struct.pack("<I", 1) + pack_str("leaky")
                     + struct.pack("<f", 1.5))
    with pytest.raises(ValueError, match="slope"):
        load_networks(path)

    good = tmp_path / "good.nbrf"
    save_networks(good, renderer=make_renderer_net(np.random.default_rng(6)))
    blob = good.read_bytes()
    section = blob[12:]
    path.write_bytes(NBRF_MAGIC + struct.pack("<II", NBRF_VERSION, 2)
                     + section + section)
    with pytest.raises(ValueError, match="duplicate"):
        load_networks(path)
    path.write_bytes(blob + b"\x00")
    with pytest.raises(ValueError, match="trailing"):
        load_networks(path)
    path.write_bytes(blob[: len(blob) // 2])
    with pytest.raises(ValueError, match="truncated"):
        load_networks(path)


def test_param_map_roundtrip(tmp_path):
    values = np.random.default_rng(7).normal(size=(5, 4, 6))
    values = values.astype(np.float32).astype(np.float64)
    path = tmp_path / "map.npm"
    save_param_map(path, NeuralParamMap(values))
    loaded = load_param_map(path)
    assert (loaded.height, loaded.width, loaded.channels) == (5, 4, 6)
    assert loaded.values.dtype == np.float64
    np.testing.assert_array_equal(loaded.values, values)


def test_param_map_rejections(tmp_path):
    path = tmp_path / "bad.npm"
    path.write_bytes(b"XXXX" + struct.pack("<III", 1, 1, 1) + b"\x00" * 4)
    with pytest.raises(ValueError):
        load_param_map(path)
    path.write_bytes(b"NPMP" + struct.pack("<II", 1, 1))
    with pytest.raises(ValueError):
        load_param_map(path)
    path.write_bytes(b"NPMP" + struct.pack("<III", 2, 2, 1) + b"\x00" * 4)
    with pytest.raises(ValueError):
        load_param_map(path)
