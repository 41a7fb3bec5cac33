"""Shared domain types: sensor frames, Bayer mosaics, RGB images and camera profiles.

All image containers hold read-only numpy arrays indexed (y, x[, c]).  Real-valued
containers store float64 intensities in [0, 1]; integer codes only appear in
:class:`SensorFrame` and :class:`QuantizedImage`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

RGGB = "RGGB"


class ProfileError(ValueError):
    """Raised when a :class:`CameraProfile` violates one of its invariants."""


class GammaStandard(str, enum.Enum):
    SRGB = "srgb"
    ADOBE1998 = "adobe1998"


class ToneCurve(str, enum.Enum):
    IDENTITY = "identity"
    SMOOTHSTEP = "smoothstep"


def _frozen(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def _check_unit(arr: np.ndarray, name: str) -> None:
    if arr.size and not (np.all(arr >= 0.0) and np.all(arr <= 1.0)):
        raise ValueError(f"{name} values must lie in [0, 1]")


def _check_even(height: int, width: int) -> None:
    if height % 2 or width % 2:
        raise ValueError(f"mosaic dimensions must be even, got {height}x{width}")


@dataclass(frozen=True, eq=False)
class SensorFrame:
    """Integer digital numbers straight off an R-G-G-B sensor."""

    samples: np.ndarray
    bit_depth: int = 14
    pattern: str = RGGB

    def __post_init__(self):
        samples = np.asarray(self.samples)
        if samples.ndim != 2:
            raise ValueError("sensor samples must be a 2-D array")
        _check_even(*samples.shape)
        if self.pattern != RGGB:
            raise ValueError(f"unsupported CFA pattern {self.pattern!r}")
        if samples.size and (samples.min() < 0 or samples.max() > 2**self.bit_depth - 1):
            raise ValueError(f"samples exceed {self.bit_depth}-bit range")
        object.__setattr__(self, "samples", _frozen(samples, np.int64))

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    @property
    def width(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True, eq=False)
class BayerImage:
    """Calibrated single-plane mosaic, values in [0, 1]."""

    values: np.ndarray
    pattern: str = RGGB

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError("Bayer values must be a 2-D array")
        _check_even(*values.shape)
        if self.pattern != RGGB:
            raise ValueError(f"unsupported CFA pattern {self.pattern!r}")
        _check_unit(values, "Bayer")
        object.__setattr__(self, "values", _frozen(values, np.float64))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True, eq=False)
class PackedRaw:
    """Half-resolution 4-channel view of a mosaic, channels (R, G1, G2, B)."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 3 or values.shape[2] != 4:
            raise ValueError("packed raw must have shape (h, w, 4)")
        _check_unit(values, "packed")
        object.__setattr__(self, "values", _frozen(values, np.float64))


@dataclass(frozen=True, eq=False)
class _RgbBase:
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 3 or values.shape[2] != 3:
            raise ValueError("RGB images must have shape (h, w, 3)")
        _check_unit(values, type(self).__name__)
        object.__setattr__(self, "values", _frozen(values, np.float64))

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.values.shape


class LinearRgbImage(_RgbBase):
    """Linear (scene-referred) RGB, camera or output colour space."""


class SrgbImage(_RgbBase):
    """Display-referred RGB after the nonlinear stage, before quantization."""


@dataclass(frozen=True, eq=False)
class QuantizedImage:
    codes: np.ndarray
    bit_depth: int = 8

    def __post_init__(self):
        if self.bit_depth not in (8, 16):
            raise ValueError(f"unsupported bit depth {self.bit_depth}")
        codes = np.asarray(self.codes)
        if codes.ndim != 3 or codes.shape[2] != 3:
            raise ValueError("quantized images must have shape (h, w, 3)")
        if codes.size and (codes.min() < 0 or codes.max() > 2**self.bit_depth - 1):
            raise ValueError(f"codes exceed {self.bit_depth}-bit range")
        object.__setattr__(self, "codes", _frozen(codes, np.uint16 if self.bit_depth == 16 else np.uint8))

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.codes.shape

    @property
    def max_code(self) -> int:
        return 2**self.bit_depth - 1


@dataclass(frozen=True)
class CameraProfile:
    """Per-camera calibration constants and ISP settings.

    Construction does not validate; call :func:`validate_profile` (every
    pipeline entry point that consumes a profile does so).
    """

    black_level: int = 512
    saturation: int = 16383
    lambda_shot: float = 2e-5
    lambda_read: float = 2e-7
    wb_true: tuple[float, float, float] = (2.0, 1.0, 1.6)
    wb_metered: tuple[float, float, float] = (2.0, 1.0, 1.6)
    ccm: tuple[tuple[float, float, float], ...] = (
        (1.6, -0.4, -0.2),
        (-0.4, 1.5, -0.1),
        (-0.2, -0.1, 1.3),
    )
    gamma_standard: GammaStandard = GammaStandard.SRGB
    tone_curve: ToneCurve = ToneCurve.IDENTITY
    bit_depth: int = 14

    def __post_init__(self):
        object.__setattr__(self, "wb_true", tuple(float(g) for g in self.wb_true))
        object.__setattr__(self, "wb_metered", tuple(float(g) for g in self.wb_metered))
        object.__setattr__(self, "ccm", tuple(tuple(float(v) for v in row) for row in self.ccm))
        object.__setattr__(self, "gamma_standard", GammaStandard(self.gamma_standard))
        object.__setattr__(self, "tone_curve", ToneCurve(self.tone_curve))

    @property
    def ccm_array(self) -> np.ndarray:
        return np.array(self.ccm, dtype=np.float64)

    def to_dict(self) -> dict:
        return {
            "black_level": self.black_level,
            "saturation": self.saturation,
            "lambda_shot": self.lambda_shot,
            "lambda_read": self.lambda_read,
            "wb_true": list(self.wb_true),
            "wb_metered": list(self.wb_metered),
            "ccm": [list(row) for row in self.ccm],
            "gamma_standard": self.gamma_standard.value,
            "tone_curve": self.tone_curve.value,
            "bit_depth": self.bit_depth,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CameraProfile":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in data.items() if k in known})


def validate_profile(profile: CameraProfile) -> CameraProfile:
    """Return ``profile`` unchanged, or raise :class:`ProfileError` naming the
    first violated invariant."""
    if profile.black_level >= profile.saturation:
        raise ProfileError("black_level ≥ saturation")
    if profile.saturation > 2**profile.bit_depth - 1:
        raise ProfileError("saturation exceeds bit depth")
    if profile.lambda_shot < 0:
        raise ProfileError("lambda_shot negative")
    if profile.lambda_read < 0:
        raise ProfileError("lambda_read negative")
    if len(profile.wb_true) != 3 or min(profile.wb_true) <= 0:
        raise ProfileError("wb_true gains must be three positive values")
    if len(profile.wb_metered) != 3 or min(profile.wb_metered) <= 0:
        raise ProfileError("wb_metered gains must be three positive values")
    ccm = profile.ccm_array
    if ccm.shape != (3, 3):
        raise ProfileError("ccm must be 3x3")
    if abs(np.linalg.det(ccm)) <= 1e-9:
        raise ProfileError("ccm singular")
    return profile


@dataclass(frozen=True, eq=False)
class ExposurePair:
    """Matched short/long captures of the same scene."""

    short: BayerImage
    long: BayerImage
    t_short: float
    t_long: float
    profile: CameraProfile = field(default_factory=CameraProfile)

    def __post_init__(self):
        if self.short.shape != self.long.shape or self.short.pattern != self.long.pattern:
            raise ValueError("short and long exposures must share dimensions and pattern")
        if not (self.t_short > 0 and self.t_long > self.t_short):
            raise ValueError("exposure times must satisfy 0 < t_short < t_long")

    @property
    def gamma(self) -> float:
        return self.t_long / self.t_short


def pack_bayer(img: BayerImage) -> PackedRaw:
    v = img.values
    _check_even(*v.shape)
    return PackedRaw(np.stack([v[0::2, 0::2], v[0::2, 1::2], v[1::2, 0::2], v[1::2, 1::2]], axis=-1))


def unpack_bayer(p: PackedRaw) -> BayerImage:
    h, w, _ = p.values.shape
    out = np.empty((2 * h, 2 * w), dtype=np.float64)
    out[0::2, 0::2] = p.values[..., 0]
    out[0::2, 1::2] = p.values[..., 1]
    out[1::2, 0::2] = p.values[..., 2]
    out[1::2, 1::2] = p.values[..., 3]
    return BayerImage(out)


def mosaic(rgb: np.ndarray) -> BayerImage:
    """Sample a full-resolution RGB array onto the R-G-G-B grid."""
    rgb = np.asarray(rgb, dtype=np.float64)
    _check_even(*rgb.shape[:2])
    out = np.empty(rgb.shape[:2], dtype=np.float64)
    out[0::2, 0::2] = rgb[0::2, 0::2, 0]
    out[0::2, 1::2] = rgb[0::2, 1::2, 1]
    out[1::2, 0::2] = rgb[1::2, 0::2, 1]
    out[1::2, 1::2] = rgb[1::2, 1::2, 2]
    return BayerImage(out)
