"""Reference enhancement operators and the three-stage Unprocess/Enhance/Process chain.

Every enhancer maps an :class:`~rawbench.bench.EnhancerInput` to an
:class:`~rawbench.core.SrgbImage` at ground-truth resolution.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import ndimage

from .bench import EnhancerInput, brighten_display
from .core import (
    CameraProfile,
    GammaStandard,
    LinearRgbImage,
    PackedRaw,
    QuantizedImage,
    SrgbImage,
    ToneCurve,
    unpack_bayer,
    validate_profile,
)
from .pipeline import gamma_expand, linear_process, process, quantize, tone_unmap


class GammaSource(str, enum.Enum):
    TRUE_GAMMA = "true"
    ESTIMATED_GAMMA = "estimated"


def _render_raw(packed: np.ndarray, inp: EnhancerInput) -> SrgbImage:
    if inp.profile is None:
        raise ValueError("linear input needs a camera profile to render sRGB")
    bayer = unpack_bayer(PackedRaw(packed))
    lin = linear_process(bayer, inp.render_gains, inp.profile.ccm_array)
    return process(lin, inp.profile)


def _brightened_native(inp: EnhancerInput) -> np.ndarray:
    v = inp.values
    ratio = inp.pending_ratio
    if ratio == 1.0:
        return v
    if inp.domain == "raw":
        return np.clip(v * ratio, 0.0, 1.0)
    return brighten_display(v, ratio)


def identity_enhancer(inp: EnhancerInput) -> SrgbImage:
    """Brighten if still pending, render to sRGB; no denoising."""
    v = _brightened_native(inp)
    if inp.domain == "raw":
        return _render_raw(v, inp)
    return SrgbImage(v)


def gaussian_kernel(radius: int, sigma: float) -> np.ndarray:
    r = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(r**2) / (2.0 * sigma**2))
    return k / k.sum()


def gaussian_smooth(values: np.ndarray, radius: int = 2, sigma: float = 1.0) -> np.ndarray:
    """Separable Gaussian over the two spatial axes, channels independent."""
    if radius < 1:
        raise ValueError("radius must be >= 1")
    k = gaussian_kernel(radius, sigma)
    out = ndimage.correlate1d(np.asarray(values, dtype=np.float64), k, axis=0, mode="nearest")
    out = ndimage.correlate1d(out, k, axis=1, mode="nearest")
    return np.clip(out, 0.0, 1.0)


def gaussian_denoise_enhancer(radius: int = 2, sigma: float = 1.0) -> Callable[[EnhancerInput], SrgbImage]:
    """Enhancer that smooths in the native domain after brightening.

    Raw inputs are filtered per packed channel on the half-resolution grid.
    """
    if radius < 1:
        raise ValueError("radius must be >= 1")

    def enhance(inp: EnhancerInput) -> SrgbImage:
        v = gaussian_smooth(_brightened_native(inp), radius, sigma)
        if inp.domain == "raw":
            return _render_raw(v, inp)
        return SrgbImage(v)

    enhance.__name__ = f"gaussian_r{radius}_s{sigma:g}"
    return enhance


def equalize_codes(codes: np.ndarray, bits: int) -> np.ndarray:
    """Per-channel global histogram equalization: each code maps to its CDF value."""
    out = np.empty(codes.shape, dtype=np.float64)
    n_levels = 2**bits
    for c in range(codes.shape[-1]):
        ch = codes[..., c].astype(np.int64)
        cdf = np.cumsum(np.bincount(ch.ravel(), minlength=n_levels)) / ch.size
        out[..., c] = cdf[ch]
    return out


def hist_eq_enhancer(inp: EnhancerInput) -> SrgbImage:
    if inp.domain != "srgb":
        raise ValueError("histogram equalization needs an sRGB-domain input")
    img = inp.image
    if not isinstance(img, QuantizedImage):
        img = quantize(img, 16)
    return SrgbImage(equalize_codes(img.codes, img.bit_depth))


def handcrafted_unprocess(img: SrgbImage, std: GammaStandard = GammaStandard.SRGB,
                          curve: ToneCurve = ToneCurve.IDENTITY) -> LinearRgbImage:
    """Fixed inverse of the nonlinear stage: undo the tone curve, then the gamma."""
    return LinearRgbImage(gamma_expand(tone_unmap(img.values, curve), std))


def identity_denoise(img: LinearRgbImage) -> LinearRgbImage:
    return img


def gaussian_denoise(radius: int = 2, sigma: float = 1.0) -> Callable[[LinearRgbImage], LinearRgbImage]:
    def denoise(img: LinearRgbImage) -> LinearRgbImage:
        return LinearRgbImage(gaussian_smooth(img.values, radius, sigma))
    return denoise


def _stage_values(out) -> np.ndarray:
    # stages may hand back typed images or bare arrays
    return np.clip(np.asarray(getattr(out, "values", out), dtype=np.float64), 0.0, 1.0)


@dataclass(frozen=True)
class StageChain:
    """sRGB -> linear -> (x ratio) -> restored linear -> sRGB.

    Each stage's output is clipped to [0, 1]; stages may return bare arrays.
    """

    unprocess: Callable[[SrgbImage], LinearRgbImage]
    enhance: Callable[[LinearRgbImage], LinearRgbImage]
    process: Callable[[LinearRgbImage], SrgbImage]
    gamma_source: GammaSource = GammaSource.TRUE_GAMMA

    def ratio_for(self, inp: EnhancerInput) -> float:
        return inp.gamma_given if self.gamma_source is GammaSource.TRUE_GAMMA else inp.gamma_hat

    def __call__(self, inp: EnhancerInput) -> SrgbImage:
        if inp.domain != "srgb":
            raise ValueError("the three-stage chain takes sRGB inputs")
        if inp.brightened:
            raise ValueError("input was already brightened in the display domain")
        lin = _stage_values(self.unprocess(SrgbImage(inp.values)))
        bright = LinearRgbImage(np.clip(lin * self.ratio_for(inp), 0.0, 1.0))
        restored = LinearRgbImage(_stage_values(self.enhance(bright)))
        return SrgbImage(_stage_values(self.process(restored)))


def reenet_oracle_chain(profile: CameraProfile, gamma_source: GammaSource = GammaSource.TRUE_GAMMA,
                        denoise: Callable[[LinearRgbImage], LinearRgbImage] = identity_denoise,
                        unprocess_standard: GammaStandard | None = None) -> StageChain:
    """Chain whose Unprocess/Process stages are the exact pipeline inverses.

    ``unprocess_standard`` overrides the gamma assumed when unprocessing, to
    reproduce a mismatched handcrafted inverse.
    """
    validate_profile(profile)
    std = GammaStandard(unprocess_standard or profile.gamma_standard)

    def unprocess(img: SrgbImage) -> LinearRgbImage:
        return handcrafted_unprocess(img, std, profile.tone_curve)

    def render(img: LinearRgbImage) -> SrgbImage:
        return process(img, profile)

    return StageChain(unprocess, denoise, render, GammaSource(gamma_source))


def reenet_enhancer(gamma_source: GammaSource = GammaSource.TRUE_GAMMA,
                    denoise: Callable[[LinearRgbImage], LinearRgbImage] | None = None):
    """Chain built per input from the input's own profile, for registry use."""
    denoise = denoise or gaussian_denoise()

    def enhance(inp: EnhancerInput) -> SrgbImage:
        return reenet_oracle_chain(inp.profile, gamma_source, denoise)(inp)

    return enhance


def default_registry() -> dict[str, Callable[[EnhancerInput], SrgbImage]]:
    return {
        "identity": identity_enhancer,
        "gaussian": gaussian_denoise_enhancer(),
        "hist_eq": hist_eq_enhancer,
        "reenet": reenet_enhancer(),
    }
