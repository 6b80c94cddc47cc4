"""Syndrome measurement and corrected-fidelity estimators against
closed forms and hand-built states.
"""

import numpy as np
import pytest

from isoqec.closedform import fidelity_corrected, fidelity_psi
from isoqec.codesim import (
    BlockCode,
    CorrectionEstimator,
    corrected_fidelity_mc,
    measure_and_correct,
    raw_fidelity_mc,
    syndrome_probabilities,
)
from isoqec.distributions import CodeParams, IsotropicDensity
from isoqec.sampler import RngStreams, StateVector, sample_states

SEED = 20260819


def streams(*key):
    base = RngStreams(SEED)
    for k in key:
        base = base.split(k)
    return base


def basis_state(d, k):
    coords = np.zeros(2 * d)
    coords[k] = 1.0
    return StateVector(coords)


class TestBlockLayout:
    def test_dimensions(self):
        code = BlockCode(CodeParams(5, 1))
        assert code.n_blocks == 16 and code.block_width == 4
        code = BlockCode(CodeParams(5, 4))
        assert code.n_blocks == 2 and code.block_width == 32

    def test_block_matrix_shape(self):
        code = BlockCode(CodeParams(3, 1))
        x = sample_states(IsotropicDensity.uniform(8), 5, streams(0).chunk(0))
        assert code.block_matrix(x).shape == (5, 4, 4)

    def test_block_matrix_rejects_wrong_width(self):
        code = BlockCode(CodeParams(3, 1))
        with pytest.raises(ValueError):
            code.block_matrix(np.zeros(10))


class TestSyndromeProbabilities:
    def test_reference_state_concentrates_on_first_block(self):
        code = BlockCode(CodeParams(5, 1))
        p = syndrome_probabilities(StateVector.reference(32), code)
        assert p[0] == 1.0 and not p[1:].any()

    def test_sums_to_one(self):
        code = BlockCode(CodeParams(4, 2))
        x = sample_states(IsotropicDensity.normal(0.6, 16), 64,
                          streams(1).chunk(0))
        for row in x:
            p = syndrome_probabilities(StateVector(row), code)
            assert p.sum() == pytest.approx(1.0, abs=1e-12)
            assert (p >= 0).all()

    def test_uniform_block_masses(self):
        # uniform direction puts mass block_width / (2 d) on each block
        code = BlockCode(CodeParams(5, 1))
        x = sample_states(IsotropicDensity.uniform(32), 50000,
                          streams(2).chunk(0))
        r = code.block_matrix(x)
        p = np.einsum("ijk,ijk->ij", r, r)
        se = p.std(ddof=1) / np.sqrt(p.shape[0])
        assert np.max(np.abs(p.mean(axis=0) - 1 / 16)) < 3 * se


class TestMeasureAndCorrect:
    def test_reference_state_passes_through(self):
        code = BlockCode(CodeParams(5, 1))
        out = measure_and_correct(StateVector.reference(32), code,
                                  streams(3).chunk(0))
        assert out.syndrome == 0
        assert out.probability == 1.0
        assert np.array_equal(out.state.coords,
                              StateVector.reference(2).coords)

    def test_error_within_block_survives_correction(self):
        # second complex amplitude of block 0: syndrome 0, zero overlap
        code = BlockCode(CodeParams(5, 1))
        out = measure_and_correct(basis_state(32, 2), code,
                                  streams(4).chunk(0))
        assert out.syndrome == 0
        assert out.state.coords[0] ** 2 + out.state.coords[1] ** 2 == 0.0

    def test_error_across_blocks_is_corrected(self):
        # first amplitude of block 1: syndrome 1, recovery restores logical 0
        code = BlockCode(CodeParams(5, 1))
        out = measure_and_correct(basis_state(32, 4), code,
                                  streams(5).chunk(0))
        assert out.syndrome == 1
        assert out.probability == 1.0
        assert np.array_equal(out.state.coords,
                              StateVector.reference(2).coords)

    def test_output_is_unit_norm(self):
        code = BlockCode(CodeParams(4, 2))
        x = sample_states(IsotropicDensity.normal(0.3, 16), 32,
                          streams(6).chunk(0))
        rng = streams(7).chunk(0)
        for row in x:
            out = measure_and_correct(StateVector(row), code, rng)
            assert out.state.d == 4
            assert 0.0 < out.probability <= 1.0 + 1e-12

    def test_syndrome_frequencies_match_probabilities(self):
        code = BlockCode(CodeParams(2, 1))
        state = sample_states(IsotropicDensity.normal(0.5, 4), 1,
                              streams(8).chunk(0))[0]
        p = syndrome_probabilities(StateVector(state), code)
        rng = streams(9).chunk(0)
        draws = np.array([
            measure_and_correct(StateVector(state), code, rng).syndrome
            for _ in range(20000)])
        freq = np.bincount(draws, minlength=2) / draws.size
        se = np.sqrt(p * (1 - p) / draws.size)
        assert np.max(np.abs(freq - p)) < 4 * se.max()


class TestRawFidelityMc:
    def test_matches_closed_form(self):
        density = IsotropicDensity.normal(0.9, 32)
        est = raw_fidelity_mc(density, 32, 200000, streams(10))
        assert abs(est.value - 0.8159375) < 3 * est.std_error

    def test_uniform_value(self):
        density = IsotropicDensity.uniform(8)
        est = raw_fidelity_mc(density, 8, 100000, streams(11))
        assert abs(est.value - 0.125) < 3 * est.std_error

    def test_rejects_dimension_mismatch(self):
        with pytest.raises(ValueError):
            raw_fidelity_mc(IsotropicDensity.uniform(8), 16, 1000,
                            streams(12))


class TestCorrectedFidelityMc:
    def test_block_sum_matches_closed_form(self):
        density = IsotropicDensity.normal(0.9, 32)
        code = BlockCode(CodeParams(5, 1))
        est = corrected_fidelity_mc(density, code, 200000, streams(13))
        assert abs(est.value - 0.905) < 3 * est.std_error

    def test_uniform_narrow_code(self):
        # d' = 2: corrected mass is d'' first-pairs out of 2 d coordinates
        density = IsotropicDensity.uniform(32)
        code = BlockCode(CodeParams(5, 1))
        est = corrected_fidelity_mc(density, code, 100000, streams(14))
        assert abs(est.value - 0.5) < 3 * est.std_error

    def test_uniform_wide_code(self):
        density = IsotropicDensity.uniform(32)
        code = BlockCode(CodeParams(5, 4))
        est = corrected_fidelity_mc(density, code, 100000, streams(15))
        assert abs(est.value - 1 / 16) < 3 * est.std_error

    def test_estimators_agree(self):
        density = IsotropicDensity.normal(0.6, 16)
        code = BlockCode(CodeParams(4, 2))
        a = corrected_fidelity_mc(density, code, 100000, streams(16),
                                  estimator=CorrectionEstimator.BLOCK_SUM)
        b = corrected_fidelity_mc(density, code, 100000, streams(17),
                                  estimator=CorrectionEstimator.SYNDROME_SAMPLED)
        combined = np.hypot(a.std_error, b.std_error)
        assert abs(a.value - b.value) < 3 * combined
        want = fidelity_corrected(density, CodeParams(4, 2))
        assert abs(a.value - want) < 3 * a.std_error
        assert abs(b.value - want) < 3 * b.std_error

    def test_sampled_estimator_has_larger_spread(self):
        # averaging over syndromes analytically must not raise variance
        density = IsotropicDensity.normal(0.5, 16)
        code = BlockCode(CodeParams(4, 1))
        a = corrected_fidelity_mc(density, code, 50000, streams(18),
                                  estimator=CorrectionEstimator.BLOCK_SUM)
        b = corrected_fidelity_mc(density, code, 50000, streams(18),
                                  estimator=CorrectionEstimator.SYNDROME_SAMPLED)
        assert a.std_error < b.std_error

    def test_worker_invariance(self):
        density = IsotropicDensity.normal(0.4, 8)
        code = BlockCode(CodeParams(3, 1))
        a = corrected_fidelity_mc(density, code, 40000, streams(19),
                                  workers=1)
        b = corrected_fidelity_mc(density, code, 40000, streams(19),
                                  workers=3)
        assert a == b

    def test_rejects_dimension_mismatch(self):
        with pytest.raises(ValueError):
            corrected_fidelity_mc(IsotropicDensity.uniform(8),
                                  BlockCode(CodeParams(5, 1)), 1000,
                                  streams(20))


class TestOrderingBySampling:
    def test_correction_beats_raw_and_loses_to_uncoded(self):
        # one error at sigma_c on the big space vs n accumulated steps
        # at sigma_u on the small space
        sigma_c = 0.9
        params = CodeParams(5, 1)
        sigma_u = sigma_c ** (1 / 5)
        big = IsotropicDensity.normal(sigma_c, params.d)
        small = IsotropicDensity.normal(sigma_u, params.d_prime)
        raw = raw_fidelity_mc(big, params.d, 100000, streams(21))
        corrected = corrected_fidelity_mc(big, BlockCode(params), 100000,
                                          streams(22))
        uncoded = raw_fidelity_mc(small, params.d_prime, 100000, streams(23))
        assert corrected.value - raw.value > -3 * np.hypot(
            corrected.std_error, raw.std_error)
        assert uncoded.value - corrected.value > -3 * np.hypot(
            uncoded.std_error, corrected.std_error)
        # and each sits on its closed form
        assert abs(raw.value - fidelity_psi(big, params.d)) \
            < 3 * raw.std_error
        assert abs(corrected.value - fidelity_corrected(big, params)) \
            < 3 * corrected.std_error
        assert abs(uncoded.value - fidelity_psi(small, params.d_prime)) \
            < 3 * uncoded.std_error
