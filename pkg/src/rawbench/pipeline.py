"""Simplified camera ISP: calibration, demosaic, white balance, colour correction,
gamma/tone nonlinearity and quantization, with inverses where they exist."""

from __future__ import annotations

import numpy as np

from .core import (
    BayerImage,
    CameraProfile,
    GammaStandard,
    LinearRgbImage,
    QuantizedImage,
    SensorFrame,
    SrgbImage,
    ToneCurve,
    pack_bayer,
    validate_profile,
)

SRGB_THRESHOLD = 0.0031308
SRGB_SLOPE = 12.92
SRGB_A = 0.055
SRGB_EXPONENT = 2.4
ADOBE_EXPONENT = 2.19921875

_TONE_BISECT_STEPS = 60


def _values(x):
    return x.values if hasattr(x, "values") else x


def _check_range(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.size and (np.any(arr < 0.0) or np.any(arr > 1.0) or np.any(np.isnan(arr))):
        raise ValueError(f"{name} input outside [0, 1]")
    return arr


def _result(arr: np.ndarray, like):
    if np.ndim(like) == 0 and not hasattr(like, "shape"):
        return float(arr)
    return arr


# -- calibration --------------------------------------------------------------

def calibrate(frame: SensorFrame, profile: CameraProfile) -> BayerImage:
    """Map digital numbers to [0, 1] using the black and white points."""
    validate_profile(profile)
    if frame.bit_depth < profile.bit_depth and profile.saturation > 2**frame.bit_depth - 1:
        raise ValueError("frame bit depth cannot hold the profile saturation level")
    span = profile.saturation - profile.black_level
    x = (frame.samples.astype(np.float64) - profile.black_level) / span
    return BayerImage(np.clip(x, 0.0, 1.0))


def decalibrate(img: BayerImage, profile: CameraProfile) -> SensorFrame:
    span = profile.saturation - profile.black_level
    dn = np.floor(img.values * span + profile.black_level + 0.5).astype(np.int64)
    return SensorFrame(dn, bit_depth=profile.bit_depth)


# -- demosaic -----------------------------------------------------------------

def _upsample_axis(n_out: int, n_in: int):
    # half-pixel-centre alignment: output centre (i + 0.5) sits at (i + 0.5) * n_in / n_out - 0.5
    src = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    src = np.clip(src, 0.0, n_in - 1)
    i0 = np.floor(src).astype(np.intp)
    i1 = np.minimum(i0 + 1, n_in - 1)
    w1 = src - i0
    return i0, i1, w1


def bilinear_resize(plane: np.ndarray, height: int, width: int) -> np.ndarray:
    """Bilinear resize of a 2-D array with half-pixel alignment and edge clamping."""
    plane = np.asarray(plane, dtype=np.float64)
    y0, y1, wy = _upsample_axis(height, plane.shape[0])
    x0, x1, wx = _upsample_axis(width, plane.shape[1])
    rows = plane[y0] * (1.0 - wy)[:, None] + plane[y1] * wy[:, None]
    return rows[:, x0] * (1.0 - wx) + rows[:, x1] * wx


def demosaic_bilinear(img: BayerImage) -> LinearRgbImage:
    """Average the two greens per tile, then bilinearly upsample R, G, B."""
    packed = pack_bayer(img).values
    planes = (packed[..., 0], 0.5 * (packed[..., 1] + packed[..., 2]), packed[..., 3])
    h, w = img.shape
    rgb = np.stack([bilinear_resize(p, h, w) for p in planes], axis=-1)
    return LinearRgbImage(np.clip(rgb, 0.0, 1.0))


# -- linear colour stages -----------------------------------------------------

def white_balance(img: LinearRgbImage, gains) -> LinearRgbImage:
    gains = np.asarray(gains, dtype=np.float64)
    if gains.shape != (3,) or np.any(gains <= 0):
        raise ValueError("white balance gains must be three positive values")
    return LinearRgbImage(np.clip(img.values * gains, 0.0, 1.0))


def white_balance_clip_mask(img: LinearRgbImage, gains) -> np.ndarray:
    """Boolean mask of samples that :func:`white_balance` saturates at 1."""
    return img.values * np.asarray(gains, dtype=np.float64) > 1.0


def color_correct(img: LinearRgbImage, ccm) -> LinearRgbImage:
    """Apply a 3x3 matrix to each pixel taken as a row vector: ``p @ ccm``."""
    ccm = np.asarray(ccm, dtype=np.float64)
    if ccm.shape != (3, 3) or abs(np.linalg.det(ccm)) <= 1e-9:
        raise ValueError("ccm singular")
    return LinearRgbImage(np.clip(img.values @ ccm, 0.0, 1.0))


def linear_process(img: BayerImage, gains, ccm) -> LinearRgbImage:
    return color_correct(white_balance(demosaic_bilinear(img), gains), ccm)


# -- nonlinear stages ---------------------------------------------------------

def _srgb_power(arr: np.ndarray) -> np.ndarray:
    # (1 + a)·p − a written as p + a·(p − 1) so that 1 maps to exactly 1
    p = np.power(np.maximum(arr, SRGB_THRESHOLD), 1.0 / SRGB_EXPONENT)
    return p + SRGB_A * (p - 1.0)


def gamma_compress(x, std: GammaStandard = GammaStandard.SRGB):
    arr = _check_range(_values(x), "gamma_compress")
    std = GammaStandard(std)
    if std is GammaStandard.SRGB:
        out = np.where(
            arr <= SRGB_THRESHOLD,
            SRGB_SLOPE * arr,
            _srgb_power(arr),
        )
    else:
        out = np.power(arr, 1.0 / ADOBE_EXPONENT)
    return _result(np.clip(out, 0.0, 1.0), x)


def gamma_expand(y, std: GammaStandard = GammaStandard.SRGB):
    arr = _check_range(_values(y), "gamma_expand")
    std = GammaStandard(std)
    if std is GammaStandard.SRGB:
        knee = SRGB_SLOPE * SRGB_THRESHOLD
        out = np.where(
            arr <= knee,
            arr / SRGB_SLOPE,
            np.power((np.maximum(arr, knee) + SRGB_A) / (1.0 + SRGB_A), SRGB_EXPONENT),
        )
    else:
        out = np.power(arr, ADOBE_EXPONENT)
    return _result(np.clip(out, 0.0, 1.0), y)


def _smoothstep(x):
    return x * x * (3.0 - 2.0 * x)


def tone_map(x, curve: ToneCurve = ToneCurve.IDENTITY):
    arr = _check_range(_values(x), "tone_map")
    if ToneCurve(curve) is ToneCurve.IDENTITY:
        return _result(arr.copy(), x)
    return _result(np.clip(_smoothstep(arr), 0.0, 1.0), x)


def tone_unmap(y, curve: ToneCurve = ToneCurve.IDENTITY):
    """Invert :func:`tone_map`; the smoothstep inverse is found by bisection."""
    arr = _check_range(_values(y), "tone_unmap")
    if ToneCurve(curve) is ToneCurve.IDENTITY:
        return _result(arr.copy(), y)
    lo = np.zeros_like(arr)
    hi = np.ones_like(arr)
    for _ in range(_TONE_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        below = _smoothstep(mid) < arr
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return _result(0.5 * (lo + hi), y)


def process(img: LinearRgbImage, profile: CameraProfile) -> SrgbImage:
    """Nonlinear stage: gamma compression followed by the tone curve."""
    g = gamma_compress(img.values, profile.gamma_standard)
    return SrgbImage(tone_map(g, profile.tone_curve))


def unprocess(img: SrgbImage, profile: CameraProfile) -> LinearRgbImage:
    y = tone_unmap(img.values, profile.tone_curve)
    return LinearRgbImage(gamma_expand(y, profile.gamma_standard))


# -- quantization -------------------------------------------------------------

def quantize(img: SrgbImage, bits: int = 8) -> QuantizedImage:
    """Round to ``bits``-bit codes, ties away from zero."""
    if bits not in (8, 16):
        raise ValueError(f"unsupported bit depth {bits}")
    arr = _check_range(_values(img), "quantize")
    codes = np.floor(arr * (2**bits - 1) + 0.5)
    return QuantizedImage(codes.astype(np.int64), bit_depth=bits)


def quantize_values(x: np.ndarray, bits: int) -> np.ndarray:
    """Snap an arbitrary-shape [0, 1] array to the ``bits``-bit grid."""
    levels = 2**bits - 1
    return np.floor(np.asarray(x) * levels + 0.5) / levels


def dequantize(q: QuantizedImage) -> SrgbImage:
    return SrgbImage(q.codes.astype(np.float64) / q.max_code)


def full_pipeline(frame: SensorFrame, profile: CameraProfile, gains=None, bits: int = 8) -> QuantizedImage:
    """Sensor frame to quantized sRGB.  ``gains`` defaults to the profile's true WB."""
    gains = profile.wb_true if gains is None else gains
    lin = linear_process(calibrate(frame, profile), gains, profile.ccm_array)
    return quantize(process(lin, profile), bits)
