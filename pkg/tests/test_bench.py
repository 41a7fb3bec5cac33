import math
from dataclasses import replace

import numpy as np
import pytest

from rawbench.bench import (
    FACTOR_VARIANTS,
    QuantOrder,
    SceneKind,
    VariantSpec,
    build_corpus,
    make_pair,
    make_variant_input,
    parse_variant,
    run_benchmark,
    synth_scene,
    variant_label,
)
from rawbench.core import BayerImage, PackedRaw, QuantizedImage, SrgbImage, pack_bayer
from rawbench.enhancers import gaussian_denoise_enhancer, identity_enhancer
from rawbench.pipeline import linear_process, process, quantize


@pytest.fixture(scope="module")
def small_corpus():
    return build_corpus(5, size=32, gammas=(30,), seed=2)


class TestScenes:
    def test_flat_constant(self):
        v = synth_scene(SceneKind.FLAT, 16, seed=9).values
        assert np.all(v == v[0, 0])

    def test_ramp(self):
        v = synth_scene(SceneKind.RAMP, 64).values
        assert v.min() < 0.1 and v.max() > 0.9
        assert np.all(np.diff(v, axis=1) >= 0)

    @pytest.mark.parametrize("kind", list(SceneKind))
    def test_deterministic_and_bounded(self, kind):
        a = synth_scene(kind, (32, 48), 4).values
        np.testing.assert_array_equal(a, synth_scene(kind, (32, 48), 4).values)
        assert a.shape == (32, 48)
        assert a.min() >= 0.02 - 1e-15 and a.max() <= 0.98 + 1e-15

    def test_seeds_differ(self):
        a = synth_scene(SceneKind.SMOOTH_NOISE, 32, 0).values
        assert not np.array_equal(a, synth_scene(SceneKind.SMOOTH_NOISE, 32, 1).values)

    def test_color_checker_chroma_patches(self):
        v = pack_bayer(synth_scene(SceneKind.COLOR_CHECKER, 96, 0)).values
        rgb = np.stack([v[..., 0], 0.5 * (v[..., 1] + v[..., 2]), v[..., 3]], -1).reshape(-1, 3)
        chroma = rgb[(rgb.max(1) - rgb.min(1)) > 0.05]
        assert len(np.unique(np.round(chroma, 6), axis=0)) >= 6

    def test_odd_size(self):
        with pytest.raises(ValueError):
            synth_scene(SceneKind.RAMP, 33)


class TestPairs:
    def test_unit_ratio_noise_free(self, noise_free_profile):
        scene = synth_scene(SceneKind.EDGES, 16, 1)
        pair = make_pair(scene, 1.0, noise_free_profile)
        np.testing.assert_array_equal(pair.y_short.values, scene.values)

    def test_mean_scaling(self, profile):
        scene = synth_scene(SceneKind.SMOOTH_NOISE, 64, 3)
        pair = make_pair(scene, 30, profile, seed=4)
        se = np.sqrt(profile.lambda_shot * scene.values.mean() / 30 + profile.lambda_read) / 64
        assert abs(pair.y_short.values.mean() - scene.values.mean() / 30) < 5 * se + 1e-4

    def test_ground_truth_matches_independent_render(self, profile):
        scene = synth_scene(SceneKind.COLOR_CHECKER, 32, 2)
        pair = make_pair(scene, 10, profile)
        direct = process(linear_process(scene, profile.wb_true, profile.ccm_array), profile)
        np.testing.assert_allclose(pair.target.values, direct.values, atol=1e-12)
        diff = np.abs(pair.ground_truth.codes - quantize(direct, 16).codes)
        assert diff.max() <= 1 and pair.ground_truth.bit_depth == 16

    def test_gamma_hat_exact_without_noise_or_clip(self, noise_free_profile):
        dim = BayerImage(0.3 * synth_scene(SceneKind.RAMP, 32).values)
        pair = make_pair(dim, 20, noise_free_profile)
        assert pair.gamma_hat == pytest.approx(20, rel=1e-12)

    def test_exposure_pair_times(self, profile):
        pair = make_pair(synth_scene(SceneKind.FLAT, 4), 25, profile)
        assert pair.exposure_pair().gamma == pytest.approx(25)

    def test_corpus_layout(self):
        pairs = build_corpus(4, size=16, gammas=(10, 30))
        assert len(pairs) == 8
        assert len({p.scene_id for p in pairs}) == 8
        assert len({p.profile.wb_metered for p in pairs}) == 8


class TestLabels:
    def test_table_label_examples(self):
        assert variant_label(VariantSpec(True, True, True)) == "L+E+Q"
        assert variant_label(VariantSpec(False, False, False)) == "Baseline"
        assert variant_label(VariantSpec(True, True, True, wb_meta=True)) == "L+E+Q+W"

    def test_factor_variant_labels(self):
        assert [v.label() for v in FACTOR_VARIANTS] == ["L+E+Q", "E+Q", "L+E", "E", "L+Q", "Q", "L", "Baseline"]

    def test_round_trip_all(self):
        for l in (False, True):
            for e in (False, True):
                for q in (False, True):
                    for w in (False, True):
                        for order in QuantOrder:
                            spec = VariantSpec(l, e, q, w, order)
                            try:
                                spec.validate()
                            except ValueError:
                                continue
                            assert parse_variant(spec.label()) == spec

    @pytest.mark.parametrize("bad", ["Q+L", "L+L", "X", "L+E/foo", "Baseline+W", "E/cont", "E+Q+W"])
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            parse_variant(bad)


class TestVariantInputs:
    def test_eq9_identity(self, noise_free_profile):
        pair = make_pair(synth_scene(SceneKind.COLOR_CHECKER, 32, 5), 30, noise_free_profile)
        inp = make_variant_input(pair, parse_variant("L+E+Q/cont"))
        assert isinstance(inp.image, PackedRaw) and inp.brightened
        np.testing.assert_array_equal(inp.image.values, pack_bayer(pair.x_long).values)

    def test_baseline(self, profile):
        pair = make_pair(synth_scene(SceneKind.RAMP, 32), 30, replace(profile, wb_metered=(2.1, 1.0, 1.5)), seed=3)
        inp = make_variant_input(pair, parse_variant("Baseline"))
        assert isinstance(inp.image, QuantizedImage) and inp.image.bit_depth == 8
        assert inp.domain == "srgb"
        assert inp.gamma_given == pair.gamma_hat != pair.gamma

    def test_fine_quant_is_16_bit(self, profile):
        pair = make_pair(synth_scene(SceneKind.RAMP, 16), 10, profile)
        assert make_variant_input(pair, parse_variant("E+Q")).image.bit_depth == 16
        assert isinstance(make_variant_input(pair, parse_variant("E+Q/cont")).image, SrgbImage)

    @pytest.mark.parametrize("linear", [True, False])
    def test_quantize_then_brighten_collapses(self, noise_free_profile, linear):
        scene = synth_scene(SceneKind.RAMP, 64)
        pair = make_pair(scene, 30, noise_free_profile)
        base = "L+E" if linear else "E"
        qtb = make_variant_input(pair, parse_variant(base + "/QtB"))
        btq = make_variant_input(pair, parse_variant(base))
        n_qtb = len(np.unique(qtb.values))
        assert n_qtb <= 256
        assert n_qtb < len(np.unique(btq.values))
        if linear:
            # short exposure spans [0, 0.98/30]: only a handful of 8-bit levels
            assert n_qtb <= math.ceil(256 / 30) + 1

    def test_fine_qtb_still_8_bit(self, profile):
        pair = make_pair(synth_scene(SceneKind.SMOOTH_NOISE, 32), 30, profile, seed=2)
        assert len(np.unique(make_variant_input(pair, parse_variant("L+E+Q/QtB")).values)) <= 256

    def test_wb_metadata(self, profile):
        prof = replace(profile, wb_metered=(1.8, 1.0, 1.7))
        pair = make_pair(synth_scene(SceneKind.FLAT, 8, 1), 10, prof)
        plain = make_variant_input(pair, parse_variant("L+E+Q/cont"))
        wb = make_variant_input(pair, parse_variant("L+E+Q+W/cont"))
        assert wb.render_gains == (1.0, 1.0, 1.0) and plain.render_gains == profile.wb_true
        np.testing.assert_allclose(wb.values[..., 3], np.clip(pair.y_short.values[1::2, 1::2] * 1.7 * 10, 0, 1))

    def test_invalid_combos(self):
        with pytest.raises(ValueError):
            VariantSpec(False, True, True, wb_meta=True).validate()
        with pytest.raises(ValueError):
            VariantSpec(True, True, False, quant_order="cont").validate()


class TestRunBenchmark:
    def test_single_row(self, small_corpus):
        rows = run_benchmark(small_corpus[:1], FACTOR_VARIANTS[:1], {"identity": identity_enhancer})
        assert len(rows) == 1 and rows[0].ok

    def test_oracle_cap(self, noise_free_profile):
        pair = make_pair(synth_scene(SceneKind.COLOR_CHECKER, 32), 30, noise_free_profile)
        rows = run_benchmark([pair], [parse_variant("L+E+Q/cont")], {"identity": identity_enhancer})
        assert rows[0].psnr == 100.0

    def test_cardinality_and_order(self, small_corpus):
        enh = {"identity": identity_enhancer, "gaussian": gaussian_denoise_enhancer(),
               "g2": gaussian_denoise_enhancer(1, 0.7)}
        rows = run_benchmark(small_corpus, FACTOR_VARIANTS, enh)
        assert len(rows) == 120
        keys = [(r.scene, r.variant, r.enhancer) for r in rows]
        expected = [(p.scene_id, v.label(), e) for p in small_corpus for v in FACTOR_VARIANTS for e in enh]
        assert keys == expected
        assert all(r.ok for r in rows)

    def test_parallel_identical(self, small_corpus):
        enh = {"identity": identity_enhancer, "gaussian": gaussian_denoise_enhancer()}
        assert run_benchmark(small_corpus, FACTOR_VARIANTS, enh) == \
            run_benchmark(small_corpus, FACTOR_VARIANTS, enh, workers=4)

    def test_bad_enhancer_reported(self, small_corpus):
        rows = run_benchmark(small_corpus[:2], FACTOR_VARIANTS[:2],
                             [("bad", lambda inp: SrgbImage(np.zeros((4, 4, 3)))), ("identity", identity_enhancer)])
        assert len(rows) == 8
        bad = [r for r in rows if r.enhancer == "bad"]
        assert all(not r.ok and math.isnan(r.psnr) and "shape" in r.error for r in bad)
        assert all(r.ok for r in rows if r.enhancer == "identity")

    @pytest.mark.parametrize("variant", ["L+E+Q", "E+Q"])
    def test_denoise_beats_identity_on_noisy(self, profile, variant):
        pair = make_pair(synth_scene(SceneKind.SMOOTH_NOISE, 64, 1), 300, profile, seed=6)
        a, b = run_benchmark([pair], [parse_variant(variant)],
                             {"identity": identity_enhancer, "gaussian": gaussian_denoise_enhancer()})
        assert b.psnr > a.psnr

    def test_empty_inputs(self, small_corpus):
        with pytest.raises(ValueError):
            run_benchmark([], FACTOR_VARIANTS, {"identity": identity_enhancer})
