import numpy as np
import pytest

from conftest import h2, star
from secsource.channels import (
    DegradednessCertificate,
    check_stochastic_degraded,
    less_noisy_falsify,
)
from secsource.probability import DimensionError, StochasticMatrix, bsc


class TestDegradedness:
    def test_self_degraded_identity_witness(self):
        cert = check_stochastic_degraded(bsc(0.2), bsc(0.2))
        assert cert.feasible
        assert cert.residual <= 1e-8
        composed = bsc(0.2).rows @ cert.witness.rows
        np.testing.assert_allclose(composed, bsc(0.2).rows, atol=1e-8)

    def test_bsc_composition_crossover(self):
        # 0.1 * p = 0.3 has the unique solution p = 0.25.
        cert = check_stochastic_degraded(bsc(0.3), bsc(0.1))
        assert cert.feasible
        assert cert.residual <= 1e-8
        assert cert.witness.rows[0, 1] == pytest.approx(0.25, abs=1e-6)
        assert cert.witness.rows[1, 0] == pytest.approx(0.25, abs=1e-6)
        assert star(0.1, 0.25) == pytest.approx(0.3, abs=1e-12)

    def test_reversed_pair_infeasible(self):
        cert = check_stochastic_degraded(bsc(0.1), bsc(0.3))
        assert not cert.feasible
        assert cert.witness is None
        assert cert.residual > 1e-8

    def test_witness_composition_residual(self):
        rng = np.random.default_rng(8)
        for _ in range(25):
            p_z = StochasticMatrix(rng.dirichlet(np.ones(3), size=2))
            post = StochasticMatrix(rng.dirichlet(np.ones(2), size=3))
            p_y = StochasticMatrix(p_z.rows @ post.rows)
            cert = check_stochastic_degraded(p_y, p_z)
            assert cert.feasible
            composed = p_z.rows @ cert.witness.rows
            assert np.abs(composed - p_y.rows).max() <= 1e-8

    def test_input_alphabet_mismatch(self):
        with pytest.raises(DimensionError):
            check_stochastic_degraded(
                bsc(0.1), StochasticMatrix(np.full((3, 2), 0.5))
            )


class TestLessNoisy:
    def test_perfect_eavesdropper_not_falsified(self):
        verdict = less_noisy_falsify(bsc(0.2), StochasticMatrix.identity(2),
                                     trials=100, seed=0)
        assert not verdict.falsified

    def test_canonical_witness_l_equals_x(self):
        verdict = less_noisy_falsify(bsc(0.1), bsc(0.3), trials=10, seed=0)
        assert verdict.falsified
        # First candidate is L = X under the uniform law.
        assert verdict.trials_run == 1
        np.testing.assert_allclose(verdict.witness_px.probs, [0.5, 0.5])
        assert verdict.i_l_y == pytest.approx(1.0 - h2(0.1), abs=1e-9)
        assert verdict.i_l_z == pytest.approx(1.0 - h2(0.3), abs=1e-9)
        assert verdict.gap > 1e-9

    def test_identical_channels_not_falsified(self):
        verdict = less_noisy_falsify(bsc(0.25), bsc(0.25), trials=50, seed=1)
        assert not verdict.falsified

    def test_degraded_implies_not_falsified(self):
        rng = np.random.default_rng(12)
        for _ in range(15):
            p_z = StochasticMatrix(rng.dirichlet(np.ones(2), size=2))
            post = StochasticMatrix(rng.dirichlet(np.ones(2), size=2))
            p_y = StochasticMatrix(p_z.rows @ post.rows)
            verdict = less_noisy_falsify(p_y, p_z, trials=50, seed=3)
            assert not verdict.falsified
            assert verdict.via_degradedness

    def test_witness_reproducibly_violates(self):
        verdict = less_noisy_falsify(bsc(0.05), bsc(0.4), trials=20, seed=5)
        assert verdict.falsified
        # Recompute the violation from the returned witness alone.
        px = verdict.witness_px.probs
        pl = verdict.witness_channel.rows
        j_ly = (pl * px[:, None]).T @ bsc(0.05).rows
        j_lz = (pl * px[:, None]).T @ bsc(0.4).rows

        def mi(j):
            pa = j.sum(axis=1, keepdims=True)
            pb = j.sum(axis=0, keepdims=True)
            mask = j > 0
            with np.errstate(divide="ignore", invalid="ignore"):
                terms = np.where(mask, j * np.log2(j / (pa * pb)), 0.0)
            return float(terms.sum())

        assert mi(j_ly) - mi(j_lz) > 1e-9

    def test_trials_validation(self):
        with pytest.raises(ValueError):
            less_noisy_falsify(bsc(0.1), bsc(0.3), trials=0)
        with pytest.raises(ValueError):
            less_noisy_falsify(bsc(0.1), bsc(0.3), trials=5, l_size=1)
