import numpy as np
import pytest

from src import preprocess
from src.entities.preprocess_spec import Dimension, PreprocessSpec, PulseTrain
from src.preprocess import PreprocessError

ONE_D = Dimension.ONE_D
TWO_D = Dimension.TWO_D

class TestBinarize:
    def test_strictly_above_threshold(self):
        image = np.array([[26, 25, 0], [255, 24, 100]])
        np.testing.assert_array_equal(preprocess.binarize(image, 25), [[1, 0, 0], [1, 0, 1]])

    def test_rejects_empty_image(self):
        with pytest.raises(PreprocessError):
            preprocess.binarize(np.zeros((0, 28)))

    def test_rejects_out_of_range_pixels(self):
        with pytest.raises(PreprocessError):
            preprocess.binarize(np.array([[300]]))

class TestParityRows:
    def test_xor_of_adjacent_rows(self):
        image = np.array([[1, 0, 1, 1], [0, 0, 1, 0]], dtype=np.uint8)
        np.testing.assert_array_equal(preprocess.parity_rows(image), [[1, 0, 0, 1]])

    def test_equal_rows_give_zero_rows(self):
        image = np.tile(np.array([1, 0, 1, 1, 0], dtype=np.uint8), (6, 1))
        assert not preprocess.parity_rows(image).any()

    def test_mnist_shape_gives_27_rows(self):
        assert preprocess.parity_rows(np.zeros((28, 28), dtype=np.uint8)).shape == (27, 28)

    def test_rejects_single_row(self):
        with pytest.raises(PreprocessError):
            preprocess.parity_rows(np.ones((1, 5), dtype=np.uint8))

    def test_parity_rows_are_sparser_on_digits(self, digit):
        binary = preprocess.binarize(digit)
        assert preprocess.parity_rows(binary).sum() < binary.sum()

class TestExpand:
    def test_one_d_keeps_rows(self):
        rows = preprocess.expand(np.zeros((28, 28), dtype=np.uint8), PreprocessSpec())
        assert len(rows) == 28 and all(len(row) == 28 for row in rows)

    def test_two_d_appends_columns(self):
        rows = preprocess.expand(np.zeros((28, 28), dtype=np.uint8), PreprocessSpec(dimension=TWO_D))
        assert len(rows) == 56

    def test_order_is_rows_columns_parity(self):
        a, b, c, d, e, f = 1, 0, 1, 1, 1, 0
        image = np.array([[a, b, c], [d, e, f]], dtype=np.uint8)
        rows = preprocess.expand(image, PreprocessSpec(dimension=TWO_D, parity=True))
        expected = [[a, b, c], [d, e, f], [a, d], [b, e], [c, f], [a ^ d, b ^ e, c ^ f]]
        assert [list(row) for row in rows] == expected

class TestSectionize:
    def test_even_split(self):
        trains = preprocess.sectionize(np.arange(28) % 2, 4)
        assert [len(t) for t in trains] == [7, 7, 7, 7]

    def test_longer_sections_first(self):
        trains = preprocess.sectionize(np.zeros(28, dtype=np.uint8), 6)
        assert [len(t) for t in trains] == [5, 5, 5, 5, 4, 4]

    def test_single_section_is_identity(self):
        row = [1, 0, 0, 1, 1]
        assert preprocess.sectionize(row, 1) == [PulseTrain(slots=tuple(row))]

    def test_lossless(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            length = int(rng.integers(1, 40))
            row = rng.integers(0, 2, size=length)
            k = int(rng.integers(1, length + 1))
            joined = [slot for train in preprocess.sectionize(row, k) for slot in train.slots]
            assert joined == list(row)

    def test_rejects_more_sections_than_pixels(self):
        with pytest.raises(PreprocessError):
            preprocess.sectionize([1, 0, 1], 4)

class TestReservoirSize:
    @pytest.mark.parametrize("dimension, parity, k, expected", [
        (ONE_D, False, 1, 28),
        (TWO_D, False, 1, 56),
        (ONE_D, False, 4, 112),
        (TWO_D, False, 6, 336),
        (ONE_D, True, 4, 220),
        (TWO_D, True, 6, 498),
        (TWO_D, True, 4, 332),
    ])
    def test_published_counts(self, dimension, parity, k, expected):
        spec = PreprocessSpec(dimension=dimension, parity=parity, sections=k)
        assert preprocess.reservoir_size(spec, 28, 28) == expected

    def test_train_count_matches_size(self):
        rng = np.random.default_rng(5)
        for _ in range(60):
            n, m = (int(v) for v in rng.integers(2, 12, size=2))
            spec = PreprocessSpec(
                dimension=(ONE_D, TWO_D)[int(rng.integers(0, 2))],
                parity=bool(rng.integers(0, 2)),
                sections=int(rng.integers(1, min(n, m) + 1))
            )
            image = rng.integers(0, 256, size=(n, m))
            assert len(preprocess.pulse_trains(image, spec)) == preprocess.reservoir_size(spec, n, m)

class TestEncodeBatch:
    def test_matches_per_image_trains(self):
        rng = np.random.default_rng(6)
        images = rng.integers(0, 256, size=(3, 7, 5))
        spec = PreprocessSpec(dimension=TWO_D, parity=True, sections=2, threshold=128)
        batch = preprocess.encode_batch(images, spec)
        assert batch.shape == (3, preprocess.reservoir_size(spec, 7, 5), preprocess.slot_count(spec, 7, 5))
        for image, pulses in zip(images, batch):
            for train, row in zip(preprocess.pulse_trains(image, spec), pulses):
                assert list(row[:len(train)]) == list(train.slots)
                assert not row[len(train):].any()

    def test_slot_count_on_square_images(self):
        for dimension in (ONE_D, TWO_D):
            for parity in (False, True):
                spec = PreprocessSpec(dimension=dimension, parity=parity, sections=4)
                assert preprocess.slot_count(spec, 28, 28) == 7

    def test_rejects_too_many_sections(self):
        with pytest.raises(PreprocessError):
            preprocess.encode_batch(np.zeros((1, 6, 4)), PreprocessSpec(dimension=TWO_D, sections=5))
