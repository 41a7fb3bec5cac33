"""Factorized benchmark: synthetic scenes, exposure pairs, factor-variant inputs and
the (scene x variant x enhancer) evaluation matrix."""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Mapping, Sequence

import numpy as np

from .core import (
    BayerImage,
    CameraProfile,
    ExposurePair,
    PackedRaw,
    QuantizedImage,
    SrgbImage,
    mosaic,
    pack_bayer,
    validate_profile,
)
from .metrics import as_float, psnr, ssim
from .noise import (
    STREAM_SCENE,
    NoiseParams,
    add_shot_read_noise,
    brighten,
    derive_short_exposure,
    estimate_gamma_hat,
    perturb_wb,
    uniform,
)
from .pipeline import bilinear_resize, linear_process, process, quantize, quantize_values

SCENE_MIN = 0.02
SCENE_MAX = 0.98
LONG_EXPOSURE_S = 10.0
# display gamma assumed when brightening an sRGB image without knowledge of its pipeline
DISPLAY_GAMMA = 2.2
# quantize-then-brighten always snaps to the 8-bit grid before the gain
QTB_BITS = 8

DEFAULT_GAMMAS = (10, 30, 100, 300)
DEFAULT_SCENE_SIZE = 128
DEFAULT_SEEDS_PER_KIND = 5
DEFAULT_WB_BIAS = 0.1


class SceneKind(str, enum.Enum):
    FLAT = "flat"
    RAMP = "ramp"
    COLOR_CHECKER = "colorchecker"
    SMOOTH_NOISE = "smoothnoise"
    EDGES = "edges"


CORPUS_KINDS = (SceneKind.RAMP, SceneKind.COLOR_CHECKER, SceneKind.SMOOTH_NOISE, SceneKind.EDGES)


class QuantOrder(str, enum.Enum):
    BRIGHTEN_THEN_QUANTIZE = "btq"
    QUANTIZE_THEN_BRIGHTEN = "qtb"
    NO_QUANTIZE = "cont"


# -- scenes -------------------------------------------------------------------

def _scene_uniform(seed: int, kind: SceneKind, n: int) -> np.ndarray:
    offset = list(SceneKind).index(kind) << 40
    return uniform(seed, offset + np.arange(n), STREAM_SCENE)


def _color_checker_patches() -> np.ndarray:
    # 18 saturated hues plus a 6-step neutral row, camera-RGB reflectances
    hues = np.arange(18) / 18.0
    chroma = []
    for i, h in enumerate(hues):
        sat = 0.75 if i % 2 == 0 else 0.5
        val = 0.75 if i % 3 else 0.45
        rgb = np.clip(np.abs(np.mod(h * 6.0 + np.array([0.0, 4.0, 2.0]), 6.0) - 3.0) - 1.0, 0.0, 1.0)
        chroma.append(val * (1.0 - sat + sat * rgb))
    grays = [np.full(3, v) for v in (0.9, 0.6, 0.36, 0.2, 0.09, 0.03)]
    return np.array(chroma + grays)


def synth_scene(kind: SceneKind, size, seed: int = 0) -> BayerImage:
    """Deterministic clean long-exposure mosaic with values in [0.02, 0.98]."""
    kind = SceneKind(kind)
    h, w = (size, size) if np.isscalar(size) else tuple(size)
    if h % 2 or w % 2:
        raise ValueError(f"scene size must be even, got {h}x{w}")
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)

    if kind is SceneKind.FLAT:
        v = 0.1 + 0.8 * _scene_uniform(seed, kind, 1)[0]
        rgb = np.full((h, w, 3), v)
    elif kind is SceneKind.RAMP:
        power = 0.7 + 0.8 * _scene_uniform(seed, kind, 1)[0]
        ramp = (xx / max(w - 1, 1)) ** power
        rgb = np.repeat(ramp[..., None], 3, axis=2)
    elif kind is SceneKind.COLOR_CHECKER:
        patches = _color_checker_patches()
        jitter = 0.06 * (_scene_uniform(seed, kind, patches.size).reshape(patches.shape) - 0.5)
        patches = np.clip(patches + jitter, 0.0, 1.0)
        rows, cols = 4, 6
        pr = np.minimum((yy * rows / h).astype(int), rows - 1)
        pc = np.minimum((xx * cols / w).astype(int), cols - 1)
        rgb = patches[pr * cols + pc]
        # thin dark borders between patches
        fy = yy * rows / h - pr
        fx = xx * cols / w - pc
        border = (fy < 0.08) | (fy > 0.92) | (fx < 0.08) | (fx > 0.92)
        rgb[border] = 0.05
    elif kind is SceneKind.SMOOTH_NOISE:
        grid = 6
        coarse = _scene_uniform(seed, kind, grid * grid * 4).reshape(4, grid, grid)
        lum = bilinear_resize(coarse[0], h, w)
        tint = np.stack([bilinear_resize(coarse[c], h, w) for c in (1, 2, 3)], axis=-1)
        rgb = lum[..., None] * (0.5 + 0.5 * tint)
        rgb = (rgb - rgb.min()) / max(rgb.max() - rgb.min(), 1e-12)
    else:
        u = _scene_uniform(seed, kind, 64)
        rgb = np.empty((h, w, 3))
        rgb[:] = 0.15 + 0.2 * u[:3]
        for k in range(8):
            a = u[3 + 7 * k: 10 + 7 * k]
            y0, y1 = sorted((int(a[0] * h), int(a[1] * h)))
            x0, x1 = sorted((int(a[2] * w), int(a[3] * w)))
            rgb[y0:y1 + 2, x0:x1 + 2] = a[4:7]
        stripes = ((xx // max(w // 16, 1)) % 2)[..., None]
        band = yy < h // 8
        rgb[band] = (0.1 + 0.8 * stripes[band]) * np.ones(3)

    vals = SCENE_MIN + (SCENE_MAX - SCENE_MIN) * np.clip(rgb, 0.0, 1.0)
    return mosaic(vals)


# -- pairs --------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ScenePair:
    """Clean long exposure, noisy short exposure and rendered ground truth."""

    scene_id: str
    x_long: BayerImage
    x_short: BayerImage
    y_short: BayerImage
    gamma: float
    gamma_hat: float
    profile: CameraProfile
    target: SrgbImage
    ground_truth: QuantizedImage
    seed: int = 0

    def exposure_pair(self, t_long: float = LONG_EXPOSURE_S) -> ExposurePair:
        return ExposurePair(self.y_short, self.x_long, t_long / self.gamma, t_long, self.profile)


def render_target(x_long: BayerImage, profile: CameraProfile) -> SrgbImage:
    return process(linear_process(x_long, profile.wb_true, profile.ccm_array), profile)


def pair_gamma_hat(y_short: BayerImage, x_long: BayerImage, profile: CameraProfile) -> float:
    """Mean-ratio estimate on linear RGB; each capture is rendered with its own WB."""
    ccm = profile.ccm_array
    short_lin = linear_process(y_short, profile.wb_metered, ccm)
    long_lin = linear_process(x_long, profile.wb_true, ccm)
    return estimate_gamma_hat(short_lin, long_lin)


def make_pair(scene: BayerImage, gamma: float, profile: CameraProfile, seed: int = 0,
              scene_id: str = "scene") -> ScenePair:
    validate_profile(profile)
    x_short = derive_short_exposure(scene, gamma)
    y_short = add_shot_read_noise(x_short, NoiseParams.from_profile(profile, seed))
    # long exposure taken as gamma * x_short so the brightening identity is exact
    x_long = brighten(x_short, gamma)
    target = render_target(x_long, profile)
    return ScenePair(
        scene_id=scene_id,
        x_long=x_long,
        x_short=x_short,
        y_short=y_short,
        gamma=float(gamma),
        gamma_hat=pair_gamma_hat(y_short, x_long, profile),
        profile=profile,
        target=target,
        ground_truth=quantize(target, 16),
        seed=seed,
    )


def build_corpus(n_scenes: int, size: int = DEFAULT_SCENE_SIZE, gammas: Sequence[float] = DEFAULT_GAMMAS,
                 seed: int = 0, profile: CameraProfile | None = None, kinds=CORPUS_KINDS,
                 wb_bias: float = DEFAULT_WB_BIAS) -> list[ScenePair]:
    """Scenes cycle through ``kinds``; every scene is paired at every ratio.

    Each pair gets its own noise seed and its own metered white balance.
    """
    profile = validate_profile(profile or CameraProfile())
    pairs = []
    for i in range(n_scenes):
        kind = SceneKind(kinds[i % len(kinds)])
        scene_seed = seed * 1000 + i // len(kinds)
        scene = synth_scene(kind, size, scene_seed)
        for gamma in gammas:
            pair_seed = seed * 1_000_003 + len(pairs) + 1
            pair_profile = replace(profile, wb_metered=perturb_wb(profile.wb_true, wb_bias, pair_seed))
            sid = f"{kind.value}-s{scene_seed}-g{gamma:g}"
            pairs.append(make_pair(scene, gamma, pair_profile, pair_seed, sid))
    return pairs


def default_corpus(size: int = DEFAULT_SCENE_SIZE, gammas: Sequence[float] = DEFAULT_GAMMAS,
                   seed: int = 0, profile: CameraProfile | None = None) -> list[ScenePair]:
    """The 20-scene toolkit corpus (4 kinds x 5 seeds) at every ratio in ``gammas``."""
    return build_corpus(len(CORPUS_KINDS) * DEFAULT_SEEDS_PER_KIND, size, gammas, seed, profile)


# -- variants -----------------------------------------------------------------

@dataclass(frozen=True)
class VariantSpec:
    """Which RAW properties an enhancer gets to see.

    linear (L): packed RAW instead of camera sRGB; exposure (E): true ratio
    instead of the mean-ratio estimate; fine_quant (Q): 16-bit instead of 8-bit;
    wb_meta (W): metered white-balance gains pre-applied to the RAW.
    """

    linear: bool
    exposure: bool
    fine_quant: bool
    wb_meta: bool = False
    quant_order: QuantOrder = QuantOrder.BRIGHTEN_THEN_QUANTIZE

    def __post_init__(self):
        object.__setattr__(self, "quant_order", QuantOrder(self.quant_order))

    def validate(self) -> "VariantSpec":
        if self.quant_order is QuantOrder.NO_QUANTIZE and not self.fine_quant:
            raise ValueError("NoQuantize requires fine quantization (Q)")
        if self.wb_meta and not self.linear:
            raise ValueError("white-balance metadata (W) is only defined for linear inputs")
        return self

    @property
    def bits(self) -> int:
        return 16 if self.fine_quant else 8

    def label(self) -> str:
        return variant_label(self)


def variant_label(spec: VariantSpec) -> str:
    parts = [tag for tag, on in (("L", spec.linear), ("E", spec.exposure), ("Q", spec.fine_quant)) if on]
    label = "+".join(parts) if parts else "Baseline"
    if spec.wb_meta:
        label += "+W"
    if spec.quant_order is QuantOrder.QUANTIZE_THEN_BRIGHTEN:
        label += "/QtB"
    elif spec.quant_order is QuantOrder.NO_QUANTIZE:
        label += "/cont"
    return label


def parse_variant(label: str) -> VariantSpec:
    label = label.strip()
    base, _, suffix = label.partition("/")
    order = {"": QuantOrder.BRIGHTEN_THEN_QUANTIZE, "QtB": QuantOrder.QUANTIZE_THEN_BRIGHTEN,
             "cont": QuantOrder.NO_QUANTIZE}.get(suffix)
    if order is None:
        raise ValueError(f"unknown variant suffix in {label!r}")
    tags = [] if base == "Baseline" else base.split("+")
    unknown = set(tags) - {"L", "E", "Q", "W"}
    if unknown or len(set(tags)) != len(tags):
        raise ValueError(f"bad variant label {label!r}")
    spec = VariantSpec("L" in tags, "E" in tags, "Q" in tags, "W" in tags, order)
    if variant_label(spec) != label:
        raise ValueError(f"non-canonical variant label {label!r} (expected {variant_label(spec)!r})")
    return spec.validate()


FACTOR_VARIANTS = tuple(parse_variant(s) for s in ("L+E+Q", "E+Q", "L+E", "E", "L+Q", "Q", "L", "Baseline"))


# -- enhancer inputs ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EnhancerInput:
    """What an enhancer receives for one (scene, variant) cell.

    ``gamma_given`` is the ratio the variant supplies (true or estimated);
    ``brightened`` says whether it has already been applied to ``image``.
    Raw inputs are rendered with ``render_gains`` (unity once metered gains
    were pre-applied).
    """

    image: PackedRaw | SrgbImage | QuantizedImage
    domain: str
    gamma_given: float
    gamma_hat: float
    brightened: bool
    profile: CameraProfile
    render_gains: tuple[float, float, float]
    label: str = ""
    bits: int | None = None

    def __post_init__(self):
        expected = PackedRaw if self.domain == "raw" else (SrgbImage, QuantizedImage)
        if self.domain not in ("raw", "srgb") or not isinstance(self.image, expected):
            raise ValueError(f"image type does not match domain {self.domain!r}")

    @property
    def values(self) -> np.ndarray:
        return as_float(self.image)

    @property
    def pending_ratio(self) -> float:
        return 1.0 if self.brightened else self.gamma_given


def brighten_display(values: np.ndarray, ratio: float) -> np.ndarray:
    """Exposure gain applied to display-referred values under a pure power-law assumption."""
    return np.clip(np.asarray(values) * ratio ** (1.0 / DISPLAY_GAMMA), 0.0, 1.0)


def camera_srgb(pair: ScenePair) -> SrgbImage:
    """The camera's own continuous rendering of the short exposure (metered WB)."""
    lin = linear_process(pair.y_short, pair.profile.wb_metered, pair.profile.ccm_array)
    return process(lin, pair.profile)


def make_variant_input(pair: ScenePair, spec: VariantSpec) -> EnhancerInput:
    spec.validate()
    ratio = pair.gamma if spec.exposure else pair.gamma_hat
    bits = QTB_BITS if spec.quant_order is QuantOrder.QUANTIZE_THEN_BRIGHTEN else spec.bits
    order = spec.quant_order
    common = dict(gamma_given=ratio, gamma_hat=pair.gamma_hat, profile=pair.profile, label=spec.label())

    if spec.linear:
        v = pack_bayer(pair.y_short).values
        render_gains = pair.profile.wb_true
        if spec.wb_meta:
            r, g, b = pair.profile.wb_metered
            v = np.clip(v * np.array([r, g, g, b]), 0.0, 1.0)
            render_gains = (1.0, 1.0, 1.0)
        if order is QuantOrder.BRIGHTEN_THEN_QUANTIZE:
            v = quantize_values(brighten(v, ratio), bits)
        elif order is QuantOrder.QUANTIZE_THEN_BRIGHTEN:
            v = brighten(quantize_values(v, QTB_BITS), ratio)
        else:
            v = brighten(v, ratio)
        return EnhancerInput(PackedRaw(v), "raw", brightened=True, render_gains=tuple(render_gains),
                             bits=None if order is QuantOrder.NO_QUANTIZE else bits, **common)

    srgb = camera_srgb(pair)
    gains = tuple(pair.profile.wb_metered)
    if order is QuantOrder.BRIGHTEN_THEN_QUANTIZE:
        img = quantize(SrgbImage(brighten_display(srgb.values, ratio)), bits)
        return EnhancerInput(img, "srgb", brightened=True, render_gains=gains, bits=bits, **common)
    if order is QuantOrder.QUANTIZE_THEN_BRIGHTEN:
        return EnhancerInput(quantize(srgb, QTB_BITS), "srgb", brightened=False, render_gains=gains,
                             bits=QTB_BITS, **common)
    return EnhancerInput(srgb, "srgb", brightened=False, render_gains=gains, **common)


# -- benchmark ----------------------------------------------------------------

@dataclass(frozen=True)
class MetricRow:
    scene: str
    variant: str
    enhancer: str
    psnr: float
    ssim: float
    gamma: float | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


Enhancer = Callable[[EnhancerInput], object]


def _score(pair: ScenePair, variant: str, name: str, fn: Enhancer, inp: EnhancerInput) -> MetricRow:
    try:
        out = as_float(fn(inp))
        gt = as_float(pair.ground_truth)
        if out.shape != gt.shape:
            raise ValueError(f"output shape {out.shape} != ground truth {gt.shape}")
        return MetricRow(pair.scene_id, variant, name, psnr(out, gt), ssim(out, gt), pair.gamma)
    except Exception as exc:  # reported per row; the matrix keeps running
        return MetricRow(pair.scene_id, variant, name, math.nan, math.nan, pair.gamma,
                         f"{type(exc).__name__}: {exc}")


def run_benchmark(scenes: Sequence[ScenePair], variants: Sequence[VariantSpec],
                  enhancers: Mapping[str, Enhancer] | Sequence[tuple[str, Enhancer]],
                  workers: int = 1) -> list[MetricRow]:
    """Score every (scene, variant, enhancer) cell, in that canonical order."""
    enhancers = list(enhancers.items()) if isinstance(enhancers, Mapping) else list(enhancers)
    if not scenes or not variants or not enhancers:
        raise ValueError("scenes, variants and enhancers must be non-empty")
    for v in variants:
        v.validate()

    def cell(si: int, vi: int) -> list[MetricRow]:
        pair, spec = scenes[si], variants[vi]
        label = spec.label()
        try:
            inp = make_variant_input(pair, spec)
        except Exception as exc:
            return [MetricRow(pair.scene_id, label, name, math.nan, math.nan, pair.gamma,
                              f"{type(exc).__name__}: {exc}") for name, _ in enhancers]
        return [_score(pair, label, name, fn, inp) for name, fn in enhancers]

    jobs = [(si, vi) for si in range(len(scenes)) for vi in range(len(variants))]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda j: cell(*j), jobs))
    else:
        results = [cell(*j) for j in jobs]
    return [row for rows in results for row in rows]
