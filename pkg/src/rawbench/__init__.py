"""Camera-pipeline simulator and factorized low-light enhancement benchmark."""

from .core import (
    BayerImage,
    CameraProfile,
    ExposurePair,
    GammaStandard,
    LinearRgbImage,
    PackedRaw,
    ProfileError,
    QuantizedImage,
    SensorFrame,
    SrgbImage,
    ToneCurve,
    pack_bayer,
    unpack_bayer,
    validate_profile,
)

__version__ = "0.1.0"

__all__ = [
    "BayerImage",
    "CameraProfile",
    "ExposurePair",
    "GammaStandard",
    "LinearRgbImage",
    "PackedRaw",
    "ProfileError",
    "QuantizedImage",
    "SensorFrame",
    "SrgbImage",
    "ToneCurve",
    "pack_bayer",
    "unpack_bayer",
    "validate_profile",
]
