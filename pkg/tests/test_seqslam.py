import numpy as np
import pytest

from vprbench import (
    DifferenceMatrix,
    ImageGray,
    SeqSlamConfig,
    best_match,
    difference_matrix,
    enhance_contrast,
    patch_normalize,
)
from vprbench.seqslam import score_all_references, sequence_score
from vprbench.exceptions import EmptySequenceError, InsufficientHistoryError
from vprbench.techniques import SeqSlamTechnique

from conftest import random_image


def oracle_sequence_score(values, q, j, cfg):
    """Exhaustive velocity-line enumeration, pure Python, same arithmetic
    order as the spec's definition (k ascending, then rescale)."""
    R = values.shape[0]
    ds = cfg.sequence_length
    count_v = int(np.floor((cfg.v_max - cfg.v_min) / cfg.v_step + 1e-9)) + 1
    best = np.inf
    for i in range(count_v):
        v = cfg.v_min + cfg.v_step * i
        acc = 0.0
        count = 0
        for k in range(ds):
            r = round(j - v * k)
            if 0 <= r < R:
                acc += values[r, q - k]
                count += 1
        best = min(best, acc * ds / count)
    return best


class TestPatchNormalize:
    def test_constant_image_becomes_zero(self):
        cfg = SeqSlamConfig(downsample_resolution=(16, 16))
        out = patch_normalize(ImageGray(np.full((16, 16), 0.5)), cfg)
        assert np.all(out == 0.0)

    def test_per_patch_statistics(self, rng):
        cfg = SeqSlamConfig(downsample_resolution=(32, 16), patch_size=8)
        img = random_image(rng, 32, 16, lo=0.0, hi=1.0)
        out = patch_normalize(img, cfg)
        for py in range(2):
            for px in range(4):
                patch = out[py * 8:(py + 1) * 8, px * 8:(px + 1) * 8]
                assert patch.mean() == pytest.approx(0.0, abs=1e-9)
                assert patch.std() == pytest.approx(1.0, abs=1e-6)

    def test_affine_shift_invariance(self, rng):
        cfg = SeqSlamConfig(downsample_resolution=(16, 16))
        base = rng.uniform(0.2, 0.6, size=(16, 16))
        a = patch_normalize(ImageGray(base), cfg)
        b = patch_normalize(ImageGray(base + 0.3), cfg)
        assert np.allclose(a, b, atol=1e-9)

    def test_rejects_unaligned_frames(self, rng):
        with pytest.raises(ValueError):
            patch_normalize(np.zeros((10, 16)), SeqSlamConfig(downsample_resolution=(16, 16)))


class TestDifferenceMatrix:
    def test_zero_diagonal_for_identical_sequences(self, rng):
        frames = [patch_normalize(random_image(rng, 16, 16)) for _ in range(5)]
        D = difference_matrix(frames, frames)
        assert np.all(np.diag(D.values) == 0.0)

    def test_brightness_offsets_do_not_change_matrix(self, rng):
        cfg = SeqSlamConfig(downsample_resolution=(16, 16))
        refs = [random_image(rng, 16, 16, lo=0.2, hi=0.6) for _ in range(5)]
        queries = [ImageGray(np.clip(r.pixels + off, 0, 1))
                   for r, off in zip(refs, rng.uniform(-0.15, 0.15, 5))]
        D0 = difference_matrix([patch_normalize(r, cfg) for r in refs],
                               [patch_normalize(r, cfg) for r in refs])
        D1 = difference_matrix([patch_normalize(q, cfg) for q in queries],
                               [patch_normalize(r, cfg) for r in refs])
        assert np.allclose(D0.values, D1.values, atol=1e-9)

    def test_matches_per_pixel_loop_oracle(self, rng):
        queries = [rng.normal(size=(4, 4)) for _ in range(5)]
        refs = [rng.normal(size=(4, 4)) for _ in range(5)]
        D = difference_matrix(queries, refs)
        for j in range(5):
            for i in range(5):
                total = 0.0
                for y in range(4):
                    for x in range(4):
                        total += abs(refs[j][y, x] - queries[i][y, x])
                assert D.values[j, i] == pytest.approx(total / 16.0, abs=1e-12)

    def test_empty_sequence(self):
        with pytest.raises(EmptySequenceError):
            difference_matrix([], [np.zeros((4, 4))])

    def test_raw_matrix_rejects_negative_entries(self):
        with pytest.raises(ValueError):
            DifferenceMatrix(np.array([[0.5, -0.1]]))
        # enhanced matrices are signed by construction
        DifferenceMatrix(np.array([[0.5, -0.1]]), enhanced=True)


class TestEnhanceContrast:
    def test_window_zero_is_identity(self, rng):
        D = DifferenceMatrix(np.abs(rng.normal(size=(6, 6))))
        assert enhance_contrast(D, 0) is D

    def test_constant_matrix_becomes_zero(self):
        D = DifferenceMatrix(np.full((8, 5), 3.0))
        out = enhance_contrast(D, 4)
        assert out.enhanced
        assert np.all(out.values == 0.0)

    def test_matches_sliding_window_loop_oracle(self, rng):
        values = np.abs(rng.normal(size=(20, 20)))
        window = 5
        out = enhance_contrast(DifferenceMatrix(values), window)
        R = values.shape[0]
        for j in range(R):
            lo = max(0, j - window // 2)
            hi = min(R, lo + window)
            lo = max(0, hi - window)
            for i in range(values.shape[1]):
                block = values[lo:hi, i]
                sigma = block.std()
                expected = 0.0 if sigma < 1e-8 else (values[j, i] - block.mean()) / sigma
                assert out.values[j, i] == pytest.approx(expected, abs=1e-12)


class TestSequenceScore:
    def test_identical_sequences_score_zero(self, rng):
        frames = [patch_normalize(random_image(rng, 16, 16)) for _ in range(12)]
        D = difference_matrix(frames, frames)
        cfg = SeqSlamConfig(sequence_length=5, downsample_resolution=(16, 16))
        assert sequence_score(D, 8, 8, cfg) == 0.0

    def test_planted_unit_slope_trajectory(self):
        # all-ones matrix with a zero diagonal line through (q=5, j=5)
        values = np.ones((6, 6))
        for k in range(6):
            values[5 - k, 5 - k] = 0.0
        D = DifferenceMatrix(values)
        cfg = SeqSlamConfig(sequence_length=4, v_min=1.0, v_max=1.0, v_step=0.1)
        assert sequence_score(D, 5, 5, cfg) == 0.0
        for j in (2, 3, 4):
            assert sequence_score(D, 5, j, cfg) > 0.0

    def test_matches_exhaustive_oracle_exactly(self, rng):
        cfg = SeqSlamConfig(sequence_length=3)
        for _ in range(50):
            values = np.abs(rng.normal(size=(12, 12)))
            D = DifferenceMatrix(values)
            q = int(rng.integers(cfg.sequence_length - 1, 12))
            j = int(rng.integers(0, 12))
            assert sequence_score(D, q, j, cfg) == oracle_sequence_score(values, q, j, cfg)

    def test_batch_scoring_equals_scalar_path(self, rng):
        cfg = SeqSlamConfig(sequence_length=4)
        values = np.abs(rng.normal(size=(10, 10)))
        D = DifferenceMatrix(values)
        for q in range(cfg.sequence_length - 1, 10):
            batch = score_all_references(D, q, cfg)
            for j in range(10):
                assert batch[j] == sequence_score(D, q, j, cfg)

    def test_unit_velocity_equals_antidiagonal_window_sum(self, rng):
        cfg = SeqSlamConfig(sequence_length=4, v_min=1.0, v_max=1.0)
        values = np.abs(rng.normal(size=(9, 9)))
        D = DifferenceMatrix(values)
        for q in range(3, 9):
            for j in range(9):
                acc = 0.0
                count = 0
                for k in range(4):
                    if 0 <= j - k < 9:
                        acc += values[j - k, q - k]
                        count += 1
                assert sequence_score(D, q, j, cfg) == pytest.approx(acc * 4 / count, abs=1e-12)

    def test_insufficient_history(self, rng):
        D = DifferenceMatrix(np.abs(rng.normal(size=(8, 8))))
        cfg = SeqSlamConfig(sequence_length=5)
        with pytest.raises(InsufficientHistoryError):
            sequence_score(D, 3, 0, cfg)


class TestBestMatch:
    def test_identical_traverses_recover_index(self, rng):
        frames = [patch_normalize(random_image(rng, 16, 16)) for _ in range(20)]
        D = difference_matrix(frames, frames)
        cfg = SeqSlamConfig(sequence_length=6, downsample_resolution=(16, 16))
        j, confidence = best_match(D, 15, cfg)
        assert j == 15
        assert confidence == 0.0

    def test_insufficient_history_at_boundary(self, rng):
        D = DifferenceMatrix(np.abs(rng.normal(size=(12, 12))))
        cfg = SeqSlamConfig(sequence_length=6)
        best_match(D, 5, cfg)  # ds-1 is the first evaluable query
        with pytest.raises(InsufficientHistoryError):
            best_match(D, 4, cfg)

    def test_recovers_fast_playback_when_vmax_allows(self, rng):
        # query traverse runs at 1.2x: query i shows reference round(1.2*i)
        refs = [patch_normalize(random_image(rng, 16, 16)) for _ in range(40)]
        queries = [refs[round(1.2 * i)] for i in range(30)]
        D = difference_matrix(queries, refs)
        cfg = SeqSlamConfig(sequence_length=8, downsample_resolution=(16, 16))
        for q in (12, 18, 24, 29):
            j, _ = best_match(D, q, cfg)
            assert abs(j - round(1.2 * q)) <= 1

    def test_ties_break_toward_smaller_index(self):
        values = np.ones((6, 8))
        D = DifferenceMatrix(values)
        cfg = SeqSlamConfig(sequence_length=3, v_min=1.0, v_max=1.0)
        # constant entries + skip rescaling make every reference score exactly
        # ds, so the argmin tie must resolve to index 0
        scores = score_all_references(D, 7, cfg)
        assert np.all(scores == 3.0)
        j, _ = best_match(D, 7, cfg)
        assert j == 0


class TestTechniqueInvariance:
    def test_affine_query_changes_leave_matches_unchanged(self, rng):
        refs = [random_image(rng, 32, 16, lo=0.3, hi=0.7) for _ in range(25)]
        gains = rng.uniform(0.8, 1.2, size=25)
        offsets = rng.uniform(-0.1, 0.1, size=25)
        queries = [ImageGray(np.clip(r.pixels * g + o, 0, 1))
                   for r, g, o in zip(refs, gains, offsets)]
        cfg = dict(sequence_length=5, downsample_resolution=(32, 16), patch_size=8)
        base = SeqSlamTechnique(**cfg).fit(refs)
        q0, m0, c0 = base.match(refs)
        q1, m1, c1 = base.match(queries)
        assert np.array_equal(m0, m1)
        assert np.allclose(c0, c1, atol=1e-6)
