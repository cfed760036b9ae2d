import numpy as np
import pytest

from vprbench import (
    AggregationConfig,
    ImageGray,
    LocalDescriptorSet,
    Vocabulary,
    bow_encode,
    extract_local,
    load_vocabulary,
    save_vocabulary,
    train_vocabulary,
    vlad_encode,
)
from vprbench.exceptions import (
    BadMagicError,
    DimensionMismatchError,
    TooFewSamplesError,
    TruncatedPayloadError,
    UnsupportedVersionError,
)

from conftest import random_image


def oracle_assign(X, centroids):
    """Brute-force nearest centroid, ties to the smaller index."""
    labels = []
    for x in X:
        best_w, best_d = 0, np.inf
        for w, c in enumerate(centroids):
            d = float(np.sum((x - c) ** 2))
            if d < best_d:
                best_w, best_d = w, d
        labels.append(best_w)
    return np.array(labels)


def oracle_bow(X, centroids):
    labels = oracle_assign(X, centroids)
    hist = np.zeros(len(centroids))
    for l in labels:
        hist[l] += 1
    n = np.linalg.norm(hist)
    return hist / n if n > 0 else hist


def oracle_vlad(X, centroids, intra=True):
    labels = oracle_assign(X, centroids)
    k, d = centroids.shape
    blocks = np.zeros((k, d))
    for x, l in zip(X, labels):
        blocks[l] += x - centroids[l]
    if intra:
        for w in range(k):
            n = np.linalg.norm(blocks[w])
            if n > 1e-12:
                blocks[w] /= n
    v = blocks.reshape(-1)
    n = np.linalg.norm(v)
    return v / n if n > 1e-12 else v


class TestTrainVocabulary:
    def test_pool_of_k_distinct_points_is_exact(self, rng):
        X = rng.normal(size=(5, 3))
        vocab = train_vocabulary(X, 5, seed=1)
        assert vocab.k == 5 and vocab.d == 3
        # objective 0: every point is its own centroid
        assert vocab.objective_history[-1] == 0.0
        got = set(map(tuple, np.round(vocab.centroids, 5)))
        want = set(map(tuple, np.round(X.astype(np.float32), 5)))
        assert got == want

    def test_two_blobs_recover_means(self, rng):
        a = rng.normal(size=(60, 2)) * 0.05 + np.array([0.0, 0.0])
        b = rng.normal(size=(60, 2)) * 0.05 + np.array([10.0, 10.0])
        X = np.concatenate([a, b])
        vocab = train_vocabulary(X, 2, seed=7)
        means = sorted(map(tuple, vocab.centroids), key=lambda c: c[0])
        want = sorted([tuple(a.mean(axis=0)), tuple(b.mean(axis=0))], key=lambda c: c[0])
        for got_c, want_c in zip(means, want):
            assert np.allclose(got_c, want_c, atol=1e-6)

    def test_bit_determinism(self, rng):
        X = rng.normal(size=(80, 4))
        v1 = train_vocabulary(X, 6, seed=3)
        v2 = train_vocabulary(X, 6, seed=3)
        assert v1.centroids.tobytes() == v2.centroids.tobytes()
        assert v1 == v2

    def test_too_few_samples(self, rng):
        with pytest.raises(TooFewSamplesError):
            train_vocabulary(rng.normal(size=(3, 2)), 4, seed=0)

    def test_objective_non_increasing(self, rng):
        X = rng.normal(size=(200, 3))
        vocab = train_vocabulary(X, 8, seed=5)
        hist = vocab.objective_history
        assert len(hist) >= 1
        assert all(b <= a * (1 + 1e-12) + 1e-12 for a, b in zip(hist, hist[1:]))

    def test_duplicate_heavy_pool_survives_empty_cluster_reseed(self):
        X = np.array([[0.0], [0.0], [0.0], [0.0], [1.0]])
        vocab = train_vocabulary(X, 3, seed=2)
        assert vocab.k == 3
        hist = vocab.objective_history
        assert all(b <= a * (1 + 1e-12) + 1e-12 for a, b in zip(hist, hist[1:]))

    def test_accepts_local_descriptor_set(self, rng):
        pool = LocalDescriptorSet(rng.normal(size=(30, 4)))
        assert train_vocabulary(pool, 3, seed=0).d == 4


class TestVocabularyFile:
    def test_roundtrip_bit_exact(self, rng, tmp_path):
        vocab = train_vocabulary(rng.normal(size=(50, 6)), 4, seed=9, source_tag="hog_cells")
        path = tmp_path / "vocab.vprv"
        save_vocabulary(vocab, path)
        loaded = load_vocabulary(path)
        assert loaded.centroids.tobytes() == vocab.centroids.tobytes()
        assert loaded.k == vocab.k and loaded.d == vocab.d and loaded.seed == vocab.seed
        # write twice: identical bytes
        path2 = tmp_path / "vocab2.vprv"
        save_vocabulary(loaded, path2)
        assert path.read_bytes() == path2.read_bytes()

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "bad.vprv"
        p.write_bytes(b"NOPE" + bytes(32))
        with pytest.raises(BadMagicError):
            load_vocabulary(p)

    def test_truncated(self, rng, tmp_path):
        vocab = train_vocabulary(rng.normal(size=(20, 3)), 2, seed=0)
        p = tmp_path / "v.vprv"
        save_vocabulary(vocab, p)
        p.write_bytes(p.read_bytes()[:-1])
        with pytest.raises(TruncatedPayloadError):
            load_vocabulary(p)

    def test_unsupported_version(self, rng, tmp_path):
        vocab = train_vocabulary(rng.normal(size=(20, 3)), 2, seed=0)
        p = tmp_path / "v.vprv"
        save_vocabulary(vocab, p)
        data = bytearray(p.read_bytes())
        data[4] = 99
        p.write_bytes(bytes(data))
        with pytest.raises(UnsupportedVersionError):
            load_vocabulary(p)


class TestExtractLocal:
    def test_hog_cells_grid_arithmetic(self, rng):
        img = random_image(rng, 128, 128)
        locals_set = extract_local(img, "hog_cells", cell_size=8)
        assert len(locals_set) == (128 // 8) ** 2 == 256
        assert locals_set.dim == 9

    def test_constant_image_dense_patches_are_zero(self):
        img = ImageGray(np.full((32, 32), 0.6))
        locals_set = extract_local(img, "dense_patches")
        assert not np.any(locals_set.descriptors)

    def test_deterministic(self, rng):
        img = random_image(rng, 64, 48)
        a = extract_local(img, "hog_cells")
        b = extract_local(img, "hog_cells")
        assert a.descriptors.tobytes() == b.descriptors.tobytes()

    def test_external_file_source_rejected(self, rng):
        with pytest.raises(ValueError):
            extract_local(random_image(rng), "external_file")


class TestBowEncode:
    def test_histogram_counts_sum_to_local_count(self, rng):
        X = rng.normal(size=(37, 3))
        vocab = Vocabulary(rng.normal(size=(4, 3)), seed=0)
        from vprbench.aggregation import assign_words
        counts = np.bincount(assign_words(X, vocab.centroids), minlength=4)
        assert counts.sum() == 37

    def test_single_word_is_one_hot(self, rng):
        vocab = Vocabulary(np.array([[0.0, 0.0], [10.0, 10.0], [20.0, 0.0]]), seed=0)
        X = rng.normal(size=(9, 2)) * 0.1 + np.array([10.0, 10.0])
        d = bow_encode(X, vocab)
        assert np.allclose(d.values, [0.0, 1.0, 0.0])

    def test_matches_brute_force_oracle(self, rng):
        for _ in range(20):
            k = int(rng.integers(2, 6))
            d = int(rng.integers(2, 5))
            X = rng.normal(size=(int(rng.integers(5, 30)), d))
            vocab = Vocabulary(rng.normal(size=(k, d)), seed=0)
            got = bow_encode(X, vocab)
            assert np.allclose(got.values, oracle_bow(X, vocab.centroids.astype(np.float64)),
                               atol=1e-12)

    def test_dimension_mismatch(self, rng):
        vocab = Vocabulary(rng.normal(size=(3, 4)), seed=0)
        with pytest.raises(DimensionMismatchError):
            bow_encode(rng.normal(size=(5, 3)), vocab)

    def test_permutation_invariance_exact(self, rng):
        X = rng.normal(size=(40, 3))
        vocab = Vocabulary(rng.normal(size=(5, 3)), seed=0)
        a = bow_encode(X, vocab)
        b = bow_encode(X[rng.permutation(40)], vocab)
        assert a.values.tobytes() == b.values.tobytes()


class TestVladEncode:
    def test_hand_assignment_example(self):
        vocab = Vocabulary(np.array([[0.0, 0.0], [1.0, 1.0]]), seed=0)
        X = np.array([[1.0, 0.0], [0.0, 1.0]])
        # both locals are equidistant from the two centroids; ties go to word 0
        d = vlad_encode(X, vocab, AggregationConfig(mode="vlad", k=2, intra_normalize=False))
        # residual sum at word 0: (1,0)+(0,1) - 2*(0,0) = (1,1); word 1 empty
        expected = np.array([1.0, 1.0, 0.0, 0.0])
        expected = expected / np.linalg.norm(expected)
        assert np.allclose(d.values, expected, atol=1e-12)

    def test_zero_residuals_give_zero_vector(self):
        centroids = np.array([[0.0, 0.0], [4.0, 4.0]])
        vocab = Vocabulary(centroids, seed=0)
        X = np.array([[0.0, 0.0], [4.0, 4.0], [4.0, 4.0]])
        d = vlad_encode(X, vocab)
        assert not np.any(d.values)

    def test_dim_is_k_times_d(self, rng):
        for k, d in ((2, 3), (4, 5), (7, 2)):
            vocab = Vocabulary(rng.normal(size=(k, d)), seed=0)
            out = vlad_encode(rng.normal(size=(10, d)), vocab)
            assert out.dim == k * d

    def test_nonzero_output_has_unit_norm(self, rng):
        vocab = Vocabulary(rng.normal(size=(3, 4)), seed=0)
        out = vlad_encode(rng.normal(size=(20, 4)), vocab)
        assert np.linalg.norm(out.values) == pytest.approx(1.0, abs=1e-9)

    def test_matches_brute_force_oracle(self, rng):
        for _ in range(20):
            k = int(rng.integers(2, 6))
            d = int(rng.integers(2, 5))
            X = rng.normal(size=(int(rng.integers(5, 30)), d))
            vocab = Vocabulary(rng.normal(size=(k, d)), seed=0)
            for intra in (True, False):
                cfg = AggregationConfig(mode="vlad", k=k, intra_normalize=intra)
                got = vlad_encode(X, vocab, cfg)
                want = oracle_vlad(X, vocab.centroids.astype(np.float64), intra=intra)
                assert np.allclose(got.values, want, atol=1e-12)

    def test_permutation_invariance_exact(self, rng):
        X = rng.normal(size=(40, 3))
        vocab = Vocabulary(rng.normal(size=(5, 3)), seed=0)
        a = vlad_encode(X, vocab)
        b = vlad_encode(X[rng.permutation(40)], vocab)
        assert a.values.tobytes() == b.values.tobytes()


class TestAggregationConfig:
    def test_invariants(self):
        with pytest.raises(ValueError):
            AggregationConfig(k=1)
        with pytest.raises(ValueError):
            AggregationConfig(mode="fisher")
        with pytest.raises(ValueError):
            AggregationConfig(local_source="cnn")
