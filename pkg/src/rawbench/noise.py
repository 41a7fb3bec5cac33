"""Heteroscedastic shot/read noise, exposure scaling and white-balance metering bias.

Random draws come from a counter-based generator: every value is a pure function
of ``(seed, stream, counter)``, so any split of an image into blocks, in any
order or on any number of threads, reproduces the serial result bit for bit.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import BayerImage, CameraProfile, LinearRgbImage, PackedRaw

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1

# stream tags keep independent consumers of one seed decorrelated
STREAM_NOISE = 1
STREAM_WB = 2
STREAM_SCENE = 3


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def random_bits(seed: int, counters, stream: int = 0) -> np.ndarray:
    """SplitMix64 output at positions ``counters`` of the sequence keyed by (seed, stream)."""
    key = np.array([(int(seed) * 0x100000001B3 + int(stream) * 0xD1B54A32D192ED03) & _MASK64], dtype=np.uint64)
    start = _mix64(key)[0]
    c = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix64(start + (c + np.uint64(1)) * _GOLDEN)


def uniform(seed: int, counters, stream: int = 0) -> np.ndarray:
    """Uniform doubles in [0, 1) with 53 random bits each."""
    return (random_bits(seed, counters, stream) >> np.uint64(11)).astype(np.float64) * 2.0**-53


def standard_normal(seed: int, counters, stream: int = 0) -> np.ndarray:
    """Box-Muller normals; sample ``i`` consumes uniforms ``2i`` and ``2i+1``."""
    c = np.asarray(counters, dtype=np.uint64) * np.uint64(2)
    u1 = 1.0 - uniform(seed, c, stream)
    u2 = uniform(seed, c + np.uint64(1), stream)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


@dataclass(frozen=True)
class NoiseParams:
    lambda_shot: float
    lambda_read: float
    seed: int = 0

    def __post_init__(self):
        if self.lambda_shot < 0 or self.lambda_read < 0:
            raise ValueError("noise levels must be non-negative")

    @classmethod
    def from_profile(cls, profile: CameraProfile, seed: int = 0) -> "NoiseParams":
        return cls(profile.lambda_shot, profile.lambda_read, seed)


@dataclass(frozen=True, eq=False)
class SigmaMap:
    values: np.ndarray

    def __post_init__(self):
        if np.any(self.values < 0):
            raise ValueError("sigma must be non-negative")


def _arr(x) -> np.ndarray:
    return np.asarray(x.values if hasattr(x, "values") else x, dtype=np.float64)


def shot_read_noise(x, params: NoiseParams, workers: int = 1) -> np.ndarray:
    """Unclipped noise realisation n with var(n[i]) = λ_shot·x[i] + λ_read."""
    x = _arr(x)
    sigma = np.sqrt(params.lambda_shot * x + params.lambda_read)
    flat = sigma.reshape(-1)
    out = np.empty_like(flat)

    def fill(lo: int, hi: int) -> None:
        out[lo:hi] = flat[lo:hi] * standard_normal(params.seed, np.arange(lo, hi), STREAM_NOISE)

    if workers <= 1:
        fill(0, flat.size)
    else:
        bounds = np.linspace(0, flat.size, workers + 1).astype(int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, bounds[:-1], bounds[1:]))
    return out.reshape(x.shape)


def add_shot_read_noise(x: BayerImage, params: NoiseParams, workers: int = 1) -> BayerImage:
    """Noisy capture ``clip(x + n, 0, 1)``; the clamp mimics the sensor floor and full well."""
    if params.lambda_shot == 0 and params.lambda_read == 0:
        return BayerImage(x.values)
    n = shot_read_noise(x, params, workers=workers)
    return BayerImage(np.clip(x.values + n, 0.0, 1.0))


def sigma_map(x, params: NoiseParams) -> SigmaMap:
    return SigmaMap(np.sqrt(params.lambda_shot * _arr(x) + params.lambda_read))


def derive_short_exposure(x_long: BayerImage, gamma: float) -> BayerImage:
    if gamma < 1:
        raise ValueError("exposure ratio must be >= 1")
    return BayerImage(x_long.values / gamma)


def brighten(y, gamma: float, clip: bool = True):
    """Multiply by the exposure ratio.

    With ``clip=True`` the result keeps the input's type (clamped to [0, 1]);
    with ``clip=False`` a raw ndarray is returned so pre-clip statistics can be
    inspected.
    """
    if gamma <= 0:
        raise ValueError("exposure ratio must be positive")
    out = _arr(y) * gamma
    if not clip:
        return out
    out = np.clip(out, 0.0, 1.0)
    if isinstance(y, (BayerImage, LinearRgbImage, PackedRaw)):
        return type(y)(out)
    return out


def brightened_sigma_map(x_s, gamma: float, params: NoiseParams) -> SigmaMap:
    """Noise std of ``gamma * y_s``: σ_b² = γ·λ_shot·(γ·x_s) + γ²·λ_read."""
    if gamma < 1:
        raise ValueError("exposure ratio must be >= 1")
    x_b = gamma * _arr(x_s)
    return SigmaMap(np.sqrt(gamma * params.lambda_shot * x_b + gamma**2 * params.lambda_read))


def estimate_gamma_hat(short_linear, long_linear) -> float:
    """Exposure ratio from mean intensities, used when metadata is missing."""
    short_mean = float(np.mean(_arr(short_linear)))
    if short_mean <= 0:
        raise ValueError("short exposure has zero mean")
    return float(np.mean(_arr(long_linear))) / short_mean


def perturb_wb(w_true, bias: float, seed: int):
    """Metered white balance: each gain scaled by (1 + u), u ~ U[-bias, bias]."""
    if not 0 <= bias <= 0.5:
        raise ValueError("bias must lie in [0, 0.5]")
    w = np.asarray(w_true, dtype=np.float64)
    u = (2.0 * uniform(seed, np.arange(3), STREAM_WB) - 1.0) * bias
    return tuple(float(v) for v in w * (1.0 + u))
