import numpy as np
import pytest

from eegdecode.cae import (forward_quantized, init_params, normalize_windows,
                           quantize)
from eegdecode.cae.quantize import quantize_tensor_int8
from eegdecode.errors import CalibrationTooSmall


@pytest.fixture(scope="module")
def params():
    return init_params(seed=2, dtype=np.float32)


@pytest.fixture(scope="module")
def calibration():
    rng = np.random.default_rng(3)
    return rng.standard_normal((160, 12, 250)) * 4.0


def test_fp16_round_trip_ulp_bound(params):
    q = quantize(params, None, mode="fp16")
    for name, t in params.tensors.items():
        back = q.tensors[name][0].astype(np.float32)
        err = np.abs(back - t)
        bound = 2.0 ** -10 * np.abs(t) + 2.0 ** -24
        assert np.all(err <= bound), name


def test_int8_step_bound(params, calibration):
    q = quantize(params, calibration, mode="int8")
    for name, t in params.tensors.items():
        data, scale, _ = q.tensors[name]
        if data.dtype != np.int8:
            continue
        back = data.astype(np.float32) * np.float32(scale)
        # half-step bound plus float32 rounding of the dequant multiply
        assert np.abs(back - t).max() <= (scale / 2) * (1 + 1e-5), name


def test_int8_quantizer_saturates_at_max(params):
    w = np.array([-2.0, -1.0, 0.0, 0.5, 2.0], dtype=np.float32)
    q, scale = quantize_tensor_int8(w)
    assert q.max() == 127 and q.min() == -127
    assert scale == pytest.approx(2.0 / 127.0)


def test_calibration_too_small(params):
    with pytest.raises(CalibrationTooSmall):
        quantize(params, np.zeros((17, 12, 250)), mode="int8")


def test_forward_quantized_shapes_and_determinism(params, calibration):
    q8 = quantize(params, calibration, mode="int8")
    q16 = quantize(params, None, mode="fp16")
    xn = normalize_windows(calibration[:4]).astype(np.float32)
    for q in (q8, q16):
        z1 = forward_quantized(q, xn)
        z2 = forward_quantized(q, xn)
        assert z1.shape == (4, 64)
        np.testing.assert_array_equal(z1, z2)
    single = forward_quantized(q8, xn[0])
    assert single.shape == (64,)


def test_quantized_latents_close_to_float(params, calibration):
    from eegdecode.cae import encode
    xn = normalize_windows(calibration[:32]).astype(np.float32)
    z_float = encode(params, xn)
    z8 = forward_quantized(quantize(params, calibration, mode="int8"), xn)
    z16 = forward_quantized(quantize(params, None, mode="fp16"), xn)
    scale = np.abs(z_float).max()
    assert np.abs(z16 - z_float).max() < 0.01 * scale
    assert np.abs(z8 - z_float).max() < 0.12 * scale
