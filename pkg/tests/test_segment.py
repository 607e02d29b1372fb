import numpy as np
import pytest
from scipy import ndimage

from surrex import (DimensionError, Image, ParameterError, boundary_overlay,
                    segment_stats, slic_segment)
from surrex.segment import boundary_mask


def test_degenerate_single_pixel():
    seg = slic_segment(Image(np.zeros((1, 1, 1))), 1)
    assert seg.n_segments == 1
    assert seg.labels[0, 0] == 0


def test_flat_image_settles_on_seed_grid():
    # with zero color contrast the spatial term dominates and the grid
    # initialization is the fixed point: 4 equal blocks on an 8x8 image
    img = Image(np.full((8, 8, 3), 0.4))
    seg = slic_segment(img, 4, compactness=10.0)
    assert seg.n_segments == 4
    expect = np.repeat(np.repeat(np.array([[0, 1], [2, 3]]), 4, axis=0), 4, axis=1)
    assert np.array_equal(seg.labels, expect)


def test_no_empty_labels(rgb_16):
    seg = slic_segment(rgb_16, 6)
    counts = np.bincount(seg.labels.ravel(), minlength=seg.n_segments)
    assert (counts > 0).all()


def test_deterministic(rgb_16):
    a = slic_segment(rgb_16, 7, 10.0, 10, 3)
    b = slic_segment(rgb_16, 7, 10.0, 10, 3)
    assert np.array_equal(a.labels, b.labels)


def test_respects_requested_count(textured_128):
    for n in (1, 3, 10, 40):
        seg = slic_segment(textured_128, n)
        assert 1 <= seg.n_segments <= n


def test_monotone_granularity(rgb_16):
    lo = slic_segment(rgb_16, 1).n_segments
    hi = slic_segment(rgb_16, 8).n_segments
    assert hi >= lo


def test_labels_connected(textured_128):
    seg = slic_segment(textured_128, 20)
    four = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])
    for lab in range(seg.n_segments):
        _, n_comp = ndimage.label(seg.labels == lab, structure=four)
        assert n_comp == 1


def test_too_many_segments_rejected():
    with pytest.raises(ParameterError):
        slic_segment(Image(np.zeros((2, 2, 1))), 5)


class TestSegmentStats:
    def test_constant_image(self):
        img = Image(np.full((4, 4, 3), 0.7))
        seg = slic_segment(img, 4)
        means = segment_stats(seg, img)
        assert np.allclose(means, 0.7)

    def test_two_pixel_means(self):
        from surrex import SuperpixelSegmentation
        img = Image(np.array([[[0.0], [1.0]]]))
        seg = SuperpixelSegmentation(np.array([[0, 1]], dtype=np.int32))
        assert np.allclose(segment_stats(seg, img), [[0.0], [1.0]])

    def test_single_segment_mean(self):
        from surrex import SuperpixelSegmentation
        img = Image(np.array([[0.0, 0.5], [0.5, 1.0]])[:, :, None])
        seg = SuperpixelSegmentation(np.zeros((2, 2), dtype=np.int32))
        assert segment_stats(seg, img)[0, 0] == pytest.approx(0.5)

    def test_shape_mismatch(self):
        from surrex import SuperpixelSegmentation
        img = Image(np.zeros((2, 3, 1)))
        seg = SuperpixelSegmentation(np.zeros((2, 2), dtype=np.int32))
        with pytest.raises(DimensionError):
            segment_stats(seg, img)


def test_boundary_overlay_paints_edges(rgb_16):
    seg = slic_segment(rgb_16, 4)
    over = boundary_overlay(rgb_16, seg)
    edge = boundary_mask(seg)
    assert edge.any()
    assert np.all(over.data[edge] == (1.0, 1.0, 0.0))
    assert np.allclose(over.data[~edge], rgb_16.data[~edge])
