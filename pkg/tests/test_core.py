import numpy as np
import pytest

from vprbench import (
    DescriptorVector,
    ImageGray,
    LocalDescriptorSet,
    cosine_similarity,
    l1_distance,
    l2_normalize,
    resize_image,
)
from vprbench.exceptions import DimensionMismatchError, ZeroVectorError


class TestCosineSimilarity:
    def test_self_similarity_is_one(self):
        assert cosine_similarity((1, 2, 3), (1, 2, 3)) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_vectors(self):
        assert cosine_similarity((1, 0), (0, 1)) == 0.0

    def test_hand_arithmetic(self):
        # dot = 4, norms sqrt(5) each -> 4/5
        assert cosine_similarity((1, 2), (2, 1)) == pytest.approx(0.8, abs=1e-12)

    def test_zero_vector_raises(self):
        with pytest.raises(ZeroVectorError):
            cosine_similarity((0.0, 0.0), (1.0, 2.0))
        with pytest.raises(ZeroVectorError):
            cosine_similarity((1.0, 2.0), (0.0, 0.0))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            cosine_similarity((1, 2), (1, 2, 3))

    def test_symmetry_exact(self, rng):
        for _ in range(200):
            a = rng.normal(size=8)
            b = rng.normal(size=8)
            assert cosine_similarity(a, b) == cosine_similarity(b, a)

    def test_positive_scaling_gives_one(self, rng):
        for _ in range(100):
            a = rng.normal(size=6)
            if np.linalg.norm(a) < 1e-6:
                continue
            k = float(10 ** rng.uniform(-3, 3))
            assert cosine_similarity(a, k * a) == pytest.approx(1.0, abs=1e-9)

    def test_accepts_descriptor_vectors(self):
        a = DescriptorVector("t", [1.0, 2.0])
        b = DescriptorVector("t", [2.0, 1.0])
        assert cosine_similarity(a, b) == pytest.approx(0.8, abs=1e-12)


class TestL1Distance:
    def test_identity_is_zero(self, rng):
        a = rng.normal(size=10)
        assert l1_distance(a, a) == 0.0

    def test_hand_example(self):
        assert l1_distance((1, 2), (3, 0)) == 4.0

    def test_matches_elementwise_loop_oracle(self, rng):
        for _ in range(100):
            a = rng.normal(size=12)
            b = rng.normal(size=12)
            oracle = 0.0
            for x, y in zip(a, b):
                oracle += abs(x - y)
            assert l1_distance(a, b) == pytest.approx(oracle, abs=1e-12)

    def test_triangle_inequality(self, rng):
        for _ in range(1000):
            a, b, c = rng.normal(size=(3, 5))
            assert l1_distance(a, c) <= l1_distance(a, b) + l1_distance(b, c) + 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            l1_distance((1,), (1, 2))


class TestL2Normalize:
    def test_three_four_five(self):
        out = l2_normalize(np.array([3.0, 4.0]))
        assert np.allclose(out, [0.6, 0.8], atol=1e-12)

    def test_zero_vector_passes_through(self):
        out = l2_normalize(np.array([0.0, 0.0]))
        assert np.array_equal(out, [0.0, 0.0])

    def test_unit_norm(self, rng):
        for _ in range(100):
            v = rng.normal(size=7)
            if np.linalg.norm(v) <= 1e-12:
                continue
            assert np.linalg.norm(l2_normalize(v)) == pytest.approx(1.0, abs=1e-9)

    def test_idempotent(self, rng):
        for _ in range(100):
            v = rng.normal(size=7)
            once = l2_normalize(v)
            twice = l2_normalize(once)
            assert np.allclose(twice, once, atol=1e-12)

    def test_preserves_technique_id(self):
        out = l2_normalize(DescriptorVector("hog", [3.0, 4.0]))
        assert out.technique_id == "hog"
        assert np.allclose(out.values, [0.6, 0.8])


class TestDomainTypes:
    def test_image_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            ImageGray(np.array([[0.5, 1.5]]))
        with pytest.raises(ValueError):
            ImageGray(np.array([[-0.1, 0.5]]))

    def test_image_rejects_bad_shape(self):
        with pytest.raises(ValueError):
            ImageGray(np.zeros(4))
        with pytest.raises(ValueError):
            ImageGray(np.zeros((0, 3)))

    def test_image_is_immutable(self):
        img = ImageGray(np.zeros((2, 3)))
        assert (img.width, img.height) == (3, 2)
        with pytest.raises(ValueError):
            img.pixels[0, 0] = 1.0

    def test_descriptor_rejects_non_finite(self):
        with pytest.raises(ValueError):
            DescriptorVector("t", [1.0, np.nan])
        with pytest.raises(ValueError):
            DescriptorVector("t", [np.inf])

    def test_descriptor_dim(self):
        assert DescriptorVector("t", [1.0, 2.0, 3.0]).dim == 3

    def test_local_set_requires_common_dim(self):
        with pytest.raises(ValueError):
            LocalDescriptorSet([[1.0, 2.0], [1.0]])
        ls = LocalDescriptorSet([[1.0, 2.0], [3.0, 4.0]])
        assert ls.dim == 2 and len(ls) == 2


class TestResize:
    def test_resize_keeps_range_and_shape(self, rng):
        img = ImageGray(rng.uniform(0, 1, size=(30, 40)))
        out = resize_image(img, (16, 12))
        assert (out.width, out.height) == (16, 12)
        assert out.pixels.min() >= 0.0 and out.pixels.max() <= 1.0

    def test_resize_noop_returns_same_image(self, rng):
        img = ImageGray(rng.uniform(0, 1, size=(12, 16)))
        assert resize_image(img, (16, 12)) is img
