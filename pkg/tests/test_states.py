"""Unit tests for state types, the named catalog, and state file I/O."""

import json

import numpy as np
import pytest

from slocceq.states import (
    Bipartition,
    LocalOperatorTuple,
    PureState,
    STANDARD_CUTS,
    TripartiteState,
    apply_local_ops,
    make_state,
    read_state_file,
    states_proportional,
    write_state_file,
)

INV_SQRT2 = np.sqrt(0.5)


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


class TestPureState:
    def test_amplitude_count_must_match_dims(self):
        with pytest.raises(ValueError):
            PureState((2, 2), np.zeros(5, dtype=complex))

    def test_zero_state_rejected(self):
        with pytest.raises(ValueError):
            PureState((2, 2), np.zeros(4, dtype=complex))

    def test_dims_below_two_rejected(self):
        with pytest.raises(ValueError):
            PureState((2, 1), np.ones(2, dtype=complex))

    def test_tensor_reshapes_last_index_fastest(self):
        amps = np.arange(1, 9, dtype=complex)
        state = PureState((2, 2, 2), amps)
        assert state.tensor()[1, 0, 1] == amps[0b101]

    def test_amps_are_immutable(self):
        state = make_state("ghz4")
        with pytest.raises(ValueError):
            state.amps[0] = 9.0


class TestCatalog:
    def test_ghz4_amplitudes(self):
        amps = make_state("ghz4").amps
        expected = np.zeros(16, dtype=complex)
        expected[0b0000] = INV_SQRT2
        expected[0b1111] = INV_SQRT2
        assert np.array_equal(amps, expected)

    def test_w4_amplitudes(self):
        amps = make_state("w4").amps
        expected = np.zeros(16, dtype=complex)
        for idx in (0b0001, 0b0010, 0b0100, 0b1000):
            expected[idx] = 0.5
        assert np.array_equal(amps, expected)

    def test_ghz3_amplitudes(self):
        amps = make_state("ghz3").amps
        expected = np.zeros(8, dtype=complex)
        expected[0b000] = INV_SQRT2
        expected[0b111] = INV_SQRT2
        assert np.array_equal(amps, expected)

    def test_w3_amplitudes(self):
        amps = make_state("w3").amps
        expected = np.zeros(8, dtype=complex)
        for idx in (0b001, 0b010, 0b100):
            expected[idx] = 1.0 / np.sqrt(3.0)
        assert np.array_equal(amps, expected)

    def test_cluster1d_amplitudes(self):
        amps = make_state("cluster1d").amps
        expected = np.zeros(16, dtype=complex)
        expected[0b0000] = 0.5
        expected[0b0101] = 0.5
        expected[0b1010] = 0.5
        expected[0b1111] = -0.5
        assert np.array_equal(amps, expected)

    def test_psi2_half_parameters(self):
        amps = make_state("psi2_abcd", (0.5, 0.5, 0.5, 0.5)).amps
        expected = np.zeros(16, dtype=complex)
        expected[0b0000] = 0.5
        expected[0b0111] = -0.5
        expected[0b1010] = -0.5
        expected[0b1101] = 0.5
        assert np.array_equal(amps, expected)

    def test_psi_abcd_pattern(self):
        a, b, c, d = 1.0, 2.0, 3.0, 4.0
        amps = make_state("psi_abcd", (a, b, c, d)).amps
        expected = np.zeros(16, dtype=complex)
        expected[0b0000] = expected[0b1111] = (a + d) / 2
        expected[0b0011] = expected[0b1100] = (a - d) / 2
        expected[0b0101] = expected[0b1010] = (b + c) / 2
        expected[0b0110] = expected[0b1001] = (b - c) / 2
        assert np.array_equal(amps, expected)

    def test_catalog_states_are_normalized(self):
        for name in ("ghz4", "w4", "ghz3", "w3", "cluster1d"):
            assert abs(make_state(name).norm() - 1.0) < 1e-12

    def test_parameterized_states_not_renormalized(self):
        state = make_state("psi2_abcd", (3.0, 0.1, 0.1, 0.1))
        assert state.norm() > 2.9

    def test_unknown_name_rejected(self):
        with pytest.raises(ValueError):
            make_state("nosuchstate")

    def test_wrong_parameter_count_rejected(self):
        with pytest.raises(ValueError):
            make_state("psi_abcd", (1.0, 2.0))

    def test_all_zero_parameters_rejected(self):
        with pytest.raises(ValueError):
            make_state("psi2_abcd", (0.0, 0.0, 0.0, 0.0))


class TestBipartition:
    def test_label_format(self):
        assert Bipartition((1, 2), (3, 4)).label == "12-34"
        assert Bipartition((1, 4), (2, 3)).label == "14-23"

    def test_standard_cuts(self):
        assert tuple(cut.label for cut in STANDARD_CUTS) == (
            "12-34",
            "13-24",
            "14-23",
        )

    def test_partition_must_cover_all_parties(self):
        with pytest.raises(ValueError):
            Bipartition((1, 2), (3, 3))


class TestLocalOperatorTuple:
    def test_singular_operator_rejected(self):
        mats = [np.eye(2, dtype=complex)] * 3 + [np.zeros((2, 2), dtype=complex)]
        with pytest.raises(ValueError):
            LocalOperatorTuple(tuple(mats))

    def test_non_square_rejected(self):
        mats = [np.eye(2, dtype=complex)] * 3 + [np.ones((2, 3), dtype=complex)]
        with pytest.raises(ValueError):
            LocalOperatorTuple(tuple(mats))


class TestApplyLocalOps:
    def test_identity_fixes_state(self):
        state = make_state("ghz4")
        ops = [np.eye(2, dtype=complex)] * 4
        assert np.array_equal(apply_local_ops(state, ops).amps, state.amps)

    def test_ghz_bit_flip_symmetry(self):
        state = make_state("ghz4")
        x = np.array([[0, 1], [1, 0]], dtype=complex)
        image = apply_local_ops(state, [x, x, x, x])
        assert np.allclose(image.amps, state.amps, atol=1e-15)

    def test_composition_is_multiplicative(self):
        rng = np.random.default_rng(21)
        state = PureState((2, 2, 2, 2), random_complex(rng, (16,)))
        first = [random_complex(rng, (2, 2)) for _ in range(4)]
        second = [random_complex(rng, (2, 2)) for _ in range(4)]
        two_step = apply_local_ops(apply_local_ops(state, first), second)
        combined = apply_local_ops(state, [s @ f for s, f in zip(second, first)])
        scale = np.linalg.norm(combined.amps)
        assert np.linalg.norm(two_step.amps - combined.amps) < 1e-12 * scale

    def test_single_party_action(self):
        state = make_state("ghz4")
        x = np.array([[0, 1], [1, 0]], dtype=complex)
        eye = np.eye(2, dtype=complex)
        image = apply_local_ops(state, [x, eye, eye, eye])
        expected = np.zeros(16, dtype=complex)
        expected[0b1000] = INV_SQRT2
        expected[0b0111] = INV_SQRT2
        assert np.allclose(image.amps, expected, atol=1e-15)


class TestStatesProportional:
    def test_scalar_multiple(self):
        state = make_state("ghz4")
        scaled = PureState(state.dims, 3j * state.amps)
        assert states_proportional(state, scaled)
        assert states_proportional(scaled, state)

    def test_different_supports(self):
        assert not states_proportional(make_state("ghz4"), make_state("w4"))

    def test_reflexive(self):
        state = make_state("cluster1d")
        assert states_proportional(state, state)

    def test_dimension_mismatch_is_false(self):
        assert not states_proportional(make_state("ghz4"), make_state("ghz3"))

    def test_near_miss_rejected(self):
        state = make_state("ghz4")
        amps = state.amps.copy()
        amps[0b0000] *= 1.01
        assert not states_proportional(state, PureState(state.dims, amps))


class TestTripartiteState:
    def test_slice_shape_consistency(self):
        slices = (np.eye(2, dtype=complex), np.ones((2, 3), dtype=complex))
        with pytest.raises(ValueError):
            TripartiteState(2, slices)

    def test_slice_rank(self):
        slices = (
            np.array([[1, 0], [0, 0]], dtype=complex),
            np.array([[0, 0], [0, 1]], dtype=complex),
        )
        t = TripartiteState(2, slices)
        assert t.slice_rank() == 2


class TestStateFiles:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(22)
        state = PureState((2, 3, 2), random_complex(rng, (12,)))
        path = tmp_path / "state.json"
        write_state_file(path, state)
        loaded = read_state_file(path)
        assert loaded.dims == state.dims
        assert np.array_equal(loaded.amps, state.amps)

    def test_write_read_catalog(self, tmp_path):
        path = tmp_path / "ghz.state"
        write_state_file(path, make_state("ghz4"))
        loaded = read_state_file(path)
        assert np.array_equal(loaded.amps, make_state("ghz4").amps)

    def test_missing_dims_field(self, tmp_path):
        path = tmp_path / "bad.state"
        path.write_text(json.dumps({"amps": [[1.0, 0.0]]}))
        with pytest.raises(ValueError, match="dims"):
            read_state_file(path)

    def test_missing_amps_field(self, tmp_path):
        path = tmp_path / "bad.state"
        path.write_text(json.dumps({"dims": [2, 2]}))
        with pytest.raises(ValueError, match="amps"):
            read_state_file(path)

    def test_malformed_amp_entry(self, tmp_path):
        path = tmp_path / "bad.state"
        path.write_text(json.dumps({"dims": [2], "amps": [[1.0], [0.0]]}))
        with pytest.raises(ValueError):
            read_state_file(path)

    def test_not_json(self, tmp_path):
        path = tmp_path / "bad.state"
        path.write_text("not a state")
        with pytest.raises(ValueError):
            read_state_file(path)
