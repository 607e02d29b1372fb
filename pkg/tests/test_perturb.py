import numpy as np
import pytest

from surrex import (DimensionError, DistortionSpec, Image, InterpretableMask,
                    ParameterError, SamplerSpec, SuperpixelSegmentation,
                    distort, gaussian_blur, realize, sample_masks, slic_segment)
from surrex.perturb import _gaussian_kernel


class TestSamplerSpec:
    def test_zero_noise_rejected(self):
        with pytest.raises(ParameterError):
            SamplerSpec("noise", 0.0)

    def test_even_blur_rejected(self):
        with pytest.raises(ParameterError):
            SamplerSpec("blur", 4)

    def test_contrast_above_one_rejected(self):
        with pytest.raises(ParameterError):
            SamplerSpec("contrast", 1.2)

    def test_unknown_kind(self):
        with pytest.raises(ParameterError):
            SamplerSpec("sepia")


class TestSampleMasks:
    def test_single_sample_is_query(self):
        masks = sample_masks(1, 4, 0)
        assert len(masks) == 1 and masks[0].all_ones

    def test_bernoulli_half(self):
        # law of large numbers: per-bit mean within [0.48, 0.52] at n=10000
        masks = sample_masks(10001, 8, 123)
        bits = np.stack([m.bits for m in masks[1:]])
        means = bits.mean(axis=0)
        assert (means >= 0.48).all() and (means <= 0.52).all()

    def test_deterministic(self):
        a = sample_masks(50, 6, 9)
        b = sample_masks(50, 6, 9)
        assert all(np.array_equal(x.bits, y.bits) for x, y in zip(a, b))

    def test_zero_segments_rejected(self):
        with pytest.raises(ParameterError):
            sample_masks(10, 0, 0)


class TestGaussianBlur:
    def test_constant_image_unchanged(self):
        img = Image(np.full((9, 9, 1), 0.6))
        assert np.allclose(gaussian_blur(img, 5).data, 0.6)

    def test_kernel_normalized(self):
        for k in (3, 5, 11):
            assert abs(_gaussian_kernel(k).sum() - 1.0) < 1e-12

    def test_impulse_center_value(self):
        # separable convolution oracle: the response at the impulse is the
        # squared center weight of the 1-d kernel
        img = np.zeros((11, 11, 1))
        img[5, 5, 0] = 1.0
        out = gaussian_blur(Image(img), 3)
        w0 = _gaussian_kernel(3)[1]
        assert out.data[5, 5, 0] == pytest.approx(w0**2, rel=1e-12)

    def test_even_kernel_rejected(self, rgb_16):
        with pytest.raises(ParameterError):
            gaussian_blur(rgb_16, 4)


@pytest.fixture
def scene():
    rng = np.random.default_rng(5)
    img = Image(rng.uniform(0.1, 0.9, size=(12, 12, 3)))
    seg = slic_segment(img, 4)
    return img, seg


class TestRealize:
    def test_all_ones_identity(self, scene):
        img, seg = scene
        mask = InterpretableMask(np.ones(seg.n_segments, dtype=np.uint8))
        for spec in (SamplerSpec("zero"), SamplerSpec("noise", 0.1),
                     SamplerSpec("blur", 3), SamplerSpec("contrast", 0.5)):
            out = realize(img, seg, mask, spec, 0)
            assert np.array_equal(out.data, img.data)

    def test_all_zeros_zero_sampler(self, scene):
        img, seg = scene
        mask = InterpretableMask(np.zeros(seg.n_segments, dtype=np.uint8))
        out = realize(img, seg, mask, SamplerSpec("zero"), 0)
        assert np.all(out.data == 0.0)

    def test_contrast_one_is_identity(self, scene):
        img, seg = scene
        mask = InterpretableMask(np.zeros(seg.n_segments, dtype=np.uint8))
        out = realize(img, seg, mask, SamplerSpec("contrast", 1.0), 0)
        assert np.array_equal(out.data, img.data)

    def test_contrast_fixed_point_at_mean(self):
        from surrex import SuperpixelSegmentation
        img = Image(np.full((1, 1, 1), 0.8))
        seg = SuperpixelSegmentation(np.zeros((1, 1), dtype=np.int32))
        mask = InterpretableMask(np.zeros(1, dtype=np.uint8))
        out = realize(img, seg, mask, SamplerSpec("contrast", 0.5), 0)
        # 0.8 + 0.5 * (0.8 - 0.8) = 0.8
        assert out.data[0, 0, 0] == pytest.approx(0.8)

    def test_mask_locality(self, scene):
        img, seg = scene
        rng = np.random.default_rng(11)
        bits = rng.integers(0, 2, seg.n_segments, dtype=np.uint8)
        bits[0] = 1
        mask = InterpretableMask(bits)
        kept = bits[seg.labels] == 1
        for spec in (SamplerSpec("zero"), SamplerSpec("mean"),
                     SamplerSpec("noise", 0.2), SamplerSpec("blur", 5),
                     SamplerSpec("contrast", 0.3)):
            out = realize(img, seg, mask, spec, 17)
            assert np.array_equal(out.data[kept], img.data[kept])
            assert out.data.min() >= 0.0 and out.data.max() <= 1.0

    def test_mean_sampler_uses_segment_means(self, scene):
        img, seg = scene
        from surrex import segment_stats
        bits = np.ones(seg.n_segments, dtype=np.uint8)
        bits[1] = 0
        out = realize(img, seg, InterpretableMask(bits), SamplerSpec("mean"), 0)
        means = segment_stats(seg, img)
        region = seg.labels == 1
        assert np.allclose(out.data[region], means[1])

    def test_noise_deterministic(self, scene):
        img, seg = scene
        bits = np.zeros(seg.n_segments, dtype=np.uint8)
        mask = InterpretableMask(bits)
        a = realize(img, seg, mask, SamplerSpec("noise", 0.1), 99)
        b = realize(img, seg, mask, SamplerSpec("noise", 0.1), 99)
        assert np.array_equal(a.data, b.data)

    def test_mask_length_mismatch(self, scene):
        img, seg = scene
        with pytest.raises(DimensionError):
            realize(img, seg, InterpretableMask(np.ones(seg.n_segments + 1, dtype=np.uint8)),
                    SamplerSpec("zero"), 0)


class TestContrastVariance:
    def test_variance_scales_quadratically(self):
        # full contrast perturbation at level c scales per-channel variance
        # by c^2 (before clipping)
        rng = np.random.default_rng(2)
        img = Image(rng.uniform(0.3, 0.7, size=(16, 16, 3)))
        out = distort(img, DistortionSpec("contrast", 0.5), 0)
        for c in range(3):
            assert out.data[:, :, c].var() == pytest.approx(
                0.25 * img.data[:, :, c].var(), rel=1e-9
            )


class TestDistort:
    def test_contrast_one_identity(self, rgb_16):
        out = distort(rgb_16, DistortionSpec("contrast", 1.0), 0)
        assert np.array_equal(out.data, rgb_16.data)

    def test_noise_std_zero_rejected(self):
        with pytest.raises(ParameterError):
            DistortionSpec("noise", 0.0)

    def test_blur_monotone_degradation(self, textured_128):
        from surrex import MsssimConfig, msssim
        cfg = MsssimConfig.for_min_side(128)
        s3 = msssim(textured_128, distort(textured_128, DistortionSpec("blur", 3), 0), cfg)
        s11 = msssim(textured_128, distort(textured_128, DistortionSpec("blur", 11), 0), cfg)
        assert s11 < s3 < 1.0
