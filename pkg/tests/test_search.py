import numpy as np
import pytest

from secsource.probability import Pmf, SourceModel, StochasticMatrix, bsc, build_joint
from secsource.regions import (
    AuxScheme,
    DistortionMetric,
    InfeasibleTargetError,
    SearchConfig,
    extend_with_auxiliaries,
    grid_minimum_storage,
    lossy_point,
    optimal_reconstruction,
    simplex_grid,
    trace_region,
)

METRIC = DistortionMetric.hamming(2)
CFG = SearchConfig(restarts=4, seed=13, u_size=3, v_size=1, q_size=1)


def _d_max(joint):
    aux = AuxScheme.from_channels(StochasticMatrix.constant(2, 1))
    full = extend_with_auxiliaries(joint, aux)
    return optimal_reconstruction(full, METRIC)[1]


def test_null_encoder_feasible_at_dmax(binary_model, binary_joint):
    dmax = _d_max(binary_joint)
    pts = trace_region(binary_model, 0.0, METRIC, [dmax + 1e-6], CFG)
    assert pts[0].rates.rw == pytest.approx(0.0, abs=1e-6)


def test_lossless_endpoint(binary_model, binary_joint):
    pts = trace_region(binary_model, 0.0, METRIC, [0.0], CFG)
    h_xt_y = binary_joint.entropy(("Xt", "Y")) - binary_joint.entropy(("Y",))
    assert pts[0].rates.rw == pytest.approx(h_xt_y, abs=1e-6)
    assert pts[0].rates.d <= 1e-9


def test_monotone_and_feasible(binary_model):
    targets = [0.02, 0.06, 0.10, 0.20, 0.30]
    pts = trace_region(binary_model, 0.0, METRIC, targets, CFG)
    rws = [p.rates.rw for p in pts]
    assert all(rws[i] >= rws[i + 1] - 1e-12 for i in range(len(rws) - 1))
    for p in pts:
        assert p.rates.d <= p.target_d + 1e-9


def test_deterministic_given_seed(binary_model):
    a = trace_region(binary_model, 0.0, METRIC, [0.08], CFG)
    b = trace_region(binary_model, 0.0, METRIC, [0.08], CFG)
    assert a[0].rates == b[0].rates
    np.testing.assert_array_equal(
        a[0].scheme.p_u_given_xtilde.rows, b[0].scheme.p_u_given_xtilde.rows
    )


def test_reported_point_matches_regime_report(binary_model):
    pts = trace_region(binary_model, 0.1, METRIC, [0.05], CFG)
    p = pts[0]
    full = extend_with_auxiliaries(build_joint(binary_model), p.scheme)
    rep = lossy_point(full, 0.1, METRIC)
    assert rep.bounds == p.rates


def test_grid_method_matches_oracle(binary_model, binary_joint):
    cfg = SearchConfig(restarts=1, seed=0, u_size=3, v_size=1, q_size=1,
                       method="grid", grid_step=0.1)
    pts = trace_region(binary_model, 0.0, METRIC, [0.1], cfg)
    best, _ = grid_minimum_storage(binary_joint, METRIC, 0.1, u_size=3, step=0.1)
    assert pts[0].rates.rw == pytest.approx(best, abs=1e-12)


def test_infeasible_target_reported():
    # |U| = 1 cannot reach distortion below the no-encoder floor.
    model = SourceModel.from_channels(
        Pmf.uniform(2), bsc(0.1), StochasticMatrix.constant(2, 2),
        StochasticMatrix.constant(2, 2),
    )
    cfg = SearchConfig(restarts=2, seed=1, u_size=1, v_size=1, q_size=1)
    with pytest.raises(InfeasibleTargetError):
        trace_region(model, 0.0, METRIC, [0.05], cfg)


def test_simplex_grid_counts():
    g = simplex_grid(3, 0.5)
    assert g.shape == (6, 3)
    np.testing.assert_allclose(g.sum(axis=1), 1.0)
    g2 = simplex_grid(2, 0.05)
    assert g2.shape == (21, 2)


def test_search_config_validation():
    with pytest.raises(Exception):
        SearchConfig(restarts=0)
    with pytest.raises(Exception):
        SearchConfig(grid_step=0.7)


def test_generic_objective_path(binary_model):
    cfg = SearchConfig(restarts=2, seed=5, u_size=2, v_size=1, q_size=1,
                       objective="rs", max_iters=20)
    pts = trace_region(binary_model, 0.0, METRIC, [0.2], cfg)
    assert pts[0].rates.d <= 0.2 + 1e-9


def test_convexified_trace_is_convex_and_below(binary_model):
    from secsource.regions import convexify_trace

    targets = [0.0, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4]
    pts = trace_region(binary_model, 0.0, METRIC, targets, CFG)
    env = convexify_trace(pts)
    assert [e[0] for e in env] == sorted(targets)
    for p, e in zip(sorted(pts, key=lambda p: p.target_d), env):
        assert e[1] <= p.rates.rw + 1e-9
    # Convexity of the envelope in the (d, rw) plane.
    for i in range(1, len(env) - 1):
        d0, r0_, _, _ = env[i - 1]
        d1, r1, _, _ = env[i]
        d2, r2, _, _ = env[i + 1]
        t = (d1 - d0) / (d2 - d0)
        assert r1 <= r0_ + t * (r2 - r0_) + 1e-9


def test_cardinality_bounds_enforced_on_extension(binary_joint):
    from secsource.probability import ModelError, StochasticMatrix
    from secsource.regions import AuxScheme, extend_with_auxiliaries

    big = AuxScheme.from_channels(StochasticMatrix.constant(2, 26))
    with pytest.raises(ModelError):
        extend_with_auxiliaries(binary_joint, big)
    extend_with_auxiliaries(binary_joint, big, enforce_cardinality=False)
