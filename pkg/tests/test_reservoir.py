import itertools
import math

import numpy as np
import pytest

from src import preprocess, reservoir
from src.entities.preprocess_spec import Dimension, PreprocessSpec, PulseTrain
from src.reservoir import ReservoirBank, ReservoirError

def _bank(params, length: int) -> ReservoirBank:
    # one row of `length` pixels -> a single device
    return ReservoirBank(params, PreprocessSpec(), (1, length))

def _all_specs(sections=(1, 2, 4, 7)):
    for dimension, parity, k in itertools.product(Dimension, (False, True), sections):
        yield PreprocessSpec(dimension=dimension, parity=parity, sections=k)

class TestIngest:
    def test_write_then_decay(self, params):
        bank = _bank(params, 3)
        bank.ingest([PulseTrain(slots=(1, 0, 0))])
        assert bank.devices[0] == pytest.approx(0.150883, abs=2e-6)

    def test_all_zero_train_stays_at_floor(self, params):
        bank = _bank(params, 3)
        cost = bank.ingest([PulseTrain(slots=(0, 0, 0))])
        assert bank.devices[0] == 0.1
        assert cost.write_energy == 0.0

    def test_single_write_energy(self, params):
        cost = _bank(params, 1).ingest([PulseTrain(slots=(1,))])
        assert cost.write_energy == pytest.approx(3.0258e-13, rel=1e-4)
        assert cost.slot_count == 1

    def test_rejects_train_count_mismatch(self, params):
        with pytest.raises(ReservoirError):
            _bank(params, 2).ingest([PulseTrain(slots=(1, 0)), PulseTrain(slots=(0, 1))])

    def test_requires_reset_between_images(self, params):
        bank = _bank(params, 2)
        bank.ingest([PulseTrain(slots=(1, 1))])
        with pytest.raises(ReservoirError):
            bank.ingest([PulseTrain(slots=(1, 1))])
        bank.reset().ingest([PulseTrain(slots=(1, 1))])

    def test_ragged_trains_are_padded_with_decay(self, params):
        bank = ReservoirBank(params, PreprocessSpec(dimension=Dimension.TWO_D), (1, 3))
        cost = bank.ingest([PulseTrain(slots=(0, 0, 1)), PulseTrain(slots=(1,)), PulseTrain(slots=(0,)), PulseTrain(slots=(0,))])
        assert cost.slot_count == 3
        assert bank.devices[0] == pytest.approx(0.175909, abs=1e-6)
        assert bank.devices[1] == pytest.approx(0.150883, abs=2e-6)

class TestReadAll:
    def test_fresh_bank_currents(self, params):
        currents, cost = _bank(params, 4).read_all()
        assert currents[0] == pytest.approx(5.4686e-6, rel=1e-4)
        assert cost.wall_time == params.t_pulse

    def test_ceiling_current(self, params):
        bank = _bank(params, 1)
        bank.devices[:] = params.w_max
        assert bank.read_all()[0][0] == pytest.approx(5.4662e-5, rel=1e-4)

    def test_read_energy_of_112_device_bank(self, params):
        bank = ReservoirBank(params, PreprocessSpec(sections=4), (28, 28))
        _, cost = bank.read_all()
        assert bank.device_count == 112
        assert cost.read_energy == pytest.approx(112 * 3.281e-15, rel=1e-3)

    def test_read_does_not_perturb_state(self, params):
        bank = _bank(params, 3)
        bank.ingest([PulseTrain(slots=(1, 0, 1))])
        before = bank.devices.copy()
        bank.read_all()
        np.testing.assert_array_equal(bank.devices, before)

class TestQuantizeRescale:
    def test_half_rounds_up(self):
        features = reservoir.quantize_rescale([1e-6, 3e-6, 5e-6], 6)
        assert features.values == pytest.approx((0.0, 32 / 63, 1.0))
        np.testing.assert_array_equal(reservoir.quantize_levels([1e-6, 3e-6, 5e-6], 6), [0, 32, 63])

    def test_only_halves_round_up(self):
        np.testing.assert_array_equal(reservoir.quantize_levels([0.0, 0.4999999996, 1.0], 1), [0, 0, 1])
        np.testing.assert_array_equal(reservoir.quantize_levels([0.0, 0.5000000004, 1.0], 1), [0, 1, 1])
        levels = reservoir.quantize_levels([31.4999999, 31.5, 31.5000001], 6, bounds=(0.0, 63.0))
        np.testing.assert_array_equal(levels, [31, 32, 32])

    def test_degenerate_range_is_zero(self):
        assert reservoir.quantize_rescale([2e-6] * 5, 6).values == (0.0,) * 5

    def test_one_bit_extremes(self):
        assert reservoir.quantize_rescale([1e-6, 5e-6], 1).values == (0.0, 1.0)

    @pytest.mark.parametrize("bits", [0, 8])
    def test_rejects_bit_width_out_of_range(self, bits):
        with pytest.raises(ReservoirError):
            reservoir.quantize_rescale([1e-6, 2e-6], bits)

    def test_values_lie_on_lattice(self):
        rng = np.random.default_rng(7)
        for bits in range(1, 8):
            values = reservoir.rescale(rng.uniform(1e-6, 6e-5, size=(20, 50)), bits)
            levels = values * (2 ** bits - 1)
            np.testing.assert_allclose(levels, np.round(levels), atol=1e-9)
            assert values.min() >= 0.0 and values.max() <= 1.0

    def test_global_bounds_saturate(self):
        values = reservoir.rescale([0.0, 1.0, 2.0, 3.0], 2, bounds=(1.0, 2.0))
        np.testing.assert_array_equal(values, [0.0, 0.0, 1.0, 1.0])

class TestReset:
    def test_reset_to_floor_and_idempotent(self, params):
        bank = _bank(params, 2)
        bank.ingest([PulseTrain(slots=(1, 1))])
        bank.reset()
        assert all(state.w == 0.1 for state in bank.states())
        bank.reset()
        currents, _ = bank.read_all()
        assert np.all(currents == currents[0])

class TestImagePipeline:
    def test_feature_length_matches_reservoir_size(self, params, digit):
        for spec in _all_specs():
            features, _ = ReservoirBank(params, spec, digit.shape).process(digit, 6)
            assert len(features) == preprocess.reservoir_size(spec, *digit.shape)

    def test_wall_time_law(self, params, digit):
        for spec in _all_specs():
            _, cost = ReservoirBank(params, spec, digit.shape).process(digit, 6)
            assert cost.wall_time == pytest.approx((math.ceil(28 / spec.sections) + 1) * params.t_pulse)

    def test_extra_trailing_pulse_never_lowers_state(self, params):
        rng = np.random.default_rng(8)
        for _ in range(200):
            slots = list(rng.integers(0, 2, size=int(rng.integers(1, 10))))
            if slots[-1] == 1:
                continue
            raised = slots[:-1] + [1]
            low, high = _bank(params, len(slots)), _bank(params, len(slots))
            low.ingest([PulseTrain(slots=tuple(slots))])
            high.ingest([PulseTrain(slots=tuple(raised))])
            assert high.devices[0] >= low.devices[0]
            assert high.read_all()[0][0] >= low.read_all()[0][0]

    def test_batched_simulation_matches_bank(self, params):
        from tests.conftest import synthetic_digits
        images, _ = synthetic_digits(4, seed=9)
        spec = PreprocessSpec(dimension=Dimension.TWO_D, parity=True, sections=6)
        response = reservoir.simulate_images(images, spec, params, chunk_size=3)
        bank = ReservoirBank(params, spec, (28, 28))
        for index, image in enumerate(images):
            bank.reset()
            cost = bank.ingest(preprocess.pulse_trains(image, spec))
            currents, read_cost = bank.read_all()
            np.testing.assert_allclose(response.currents[index], currents, rtol=1e-12)
            assert response.image_cost(index).total_energy == pytest.approx((cost + read_cost).total_energy, rel=1e-12)
        assert response.wall_time == pytest.approx(6 * params.t_pulse)

class TestEnergy:
    def test_write_energy_dominates(self, params, digit):
        for spec in _all_specs():
            _, cost = ReservoirBank(params, spec, digit.shape).process(digit, 6)
            assert cost.write_energy / cost.total_energy > 0.90

    def test_parity_costs_sub_linearly(self, params, digit):
        plain = ReservoirBank(params, PreprocessSpec(sections=4), digit.shape).process(digit, 6)[1]
        parity = ReservoirBank(params, PreprocessSpec(parity=True, sections=4), digit.shape).process(digit, 6)[1]
        assert parity.total_energy / plain.total_energy < (2 * 28 - 1) / 28
