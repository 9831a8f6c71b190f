"""Estimator tests: hand-derived RLS steps, batch solves, degeneracy."""

import numpy as np
import pytest

from relayesc.errors import InsufficientSamplesError, InvalidParameterError
from relayesc.estimator import (
    GradientEstimate,
    RegressorSample,
    RlsState,
    batch_ls,
    rls_init,
    rls_update,
)


def samples_from_map(g_true, xs):
    return [RegressorSample(x=x, dy_dt=float(np.dot(g_true, x))) for x in xs]


class TestRlsInit:
    def test_table_values(self):
        state = rls_init(2, forgetting=0.9048, gamma=100.0)
        assert np.array_equal(state.p_matrix, 100.0 * np.eye(2))
        assert np.array_equal(state.g, np.zeros(2))

    def test_identity_case(self):
        state = rls_init(1, forgetting=1.0, gamma=1.0)
        assert np.array_equal(state.p_matrix, [[1.0]])
        assert np.array_equal(state.g, [0.0])

    def test_bad_forgetting(self):
        with pytest.raises(InvalidParameterError):
            rls_init(2, forgetting=1.5, gamma=1.0)

    def test_bad_args(self):
        with pytest.raises(InvalidParameterError):
            rls_init(0, forgetting=1.0, gamma=1.0)
        with pytest.raises(InvalidParameterError):
            rls_init(2, forgetting=0.0, gamma=1.0)
        with pytest.raises(InvalidParameterError):
            rls_init(2, forgetting=1.0, gamma=0.0)


class TestRlsUpdate:
    def test_hand_derived_step(self):
        # p=1, lambda=1, gamma=1, x=[2], dy/dt=4:
        # d = 2/(1+4) = 0.4, P = (1 - 0.4*2)/1 = 0.2, e = 4, g = 1.6
        state = rls_init(1, forgetting=1.0, gamma=1.0)
        state, est = rls_update(state, RegressorSample(x=[2.0], dy_dt=4.0))
        assert est.g_hat[0] == pytest.approx(1.6, rel=1e-15)
        assert state.p_matrix[0, 0] == pytest.approx(0.2, rel=1e-15)
        assert not est.degenerate

    def test_zero_regressor(self):
        # zero x forces a zero gain vector: P scaled by 1/lambda, g unchanged
        state = rls_init(1, forgetting=0.5, gamma=1.0)
        state, _ = rls_update(state, RegressorSample(x=[3.0], dy_dt=1.0))
        g_before = state.g.copy()
        p_before = state.p_matrix.copy()
        state, est = rls_update(state, RegressorSample(x=[0.0], dy_dt=123.0))
        assert np.array_equal(state.g, g_before)
        assert np.array_equal(state.p_matrix, p_before / 0.5)
        assert not est.degenerate

    def test_noiseless_convergence_matches_truth_and_batch(self):
        # the zero prior enters with weight ~1/gamma, so a weak prior is
        # needed for 1e-8 agreement with the generating map
        rng = np.random.default_rng(7)
        g_true = np.array([1.0, -2.0, 0.5])
        xs = rng.normal(size=(12, 3))
        samples = samples_from_map(g_true, xs)
        state = rls_init(3, forgetting=1.0, gamma=1e10)
        for s in samples:
            state, est = rls_update(state, s)
        assert np.allclose(est.g_hat, g_true, rtol=1e-8)
        oracle = batch_ls(samples)
        assert np.allclose(est.g_hat, oracle.g_hat, rtol=1e-6)

    def test_covariance_symmetry_is_exact(self):
        rng = np.random.default_rng(3)
        state = rls_init(4, forgetting=0.95, gamma=50.0)
        for _ in range(60):
            sample = RegressorSample(x=rng.normal(size=4), dy_dt=rng.normal())
            state, _ = rls_update(state, sample)
            assert np.max(np.abs(state.p_matrix - state.p_matrix.T)) == 0.0

    def test_determinism(self):
        rng = np.random.default_rng(11)
        samples = [RegressorSample(x=rng.normal(size=2), dy_dt=rng.normal()) for _ in range(40)]
        out = []
        for _ in range(2):
            state = rls_init(2, forgetting=0.9, gamma=10.0)
            for s in samples:
                state, est = rls_update(state, s)
            out.append((state.p_matrix.copy(), est.g_hat.copy()))
        assert np.array_equal(out[0][0], out[1][0])
        assert np.array_equal(out[0][1], out[1][1])

    def test_collapsed_denominator_holds_state(self):
        # forced pathological state: lambda = 0 and P = 0 make the update
        # denominator zero; the state must come back untouched with the
        # last estimate held, never NaN
        state = RlsState(
            p_matrix=np.zeros((1, 1)), g=np.array([5.0]), forgetting=0.0, gamma=1.0
        )
        new_state, est = rls_update(state, RegressorSample(x=[1.0], dy_dt=2.0))
        assert new_state is state
        assert est.degenerate
        assert np.array_equal(est.g_hat, [5.0])
        assert np.all(np.isfinite(est.g_hat))

    def test_dimension_mismatch(self):
        state = rls_init(2, forgetting=1.0, gamma=1.0)
        with pytest.raises(InvalidParameterError):
            rls_update(state, RegressorSample(x=[1.0, 2.0, 3.0], dy_dt=0.0))


class TestBatchLs:
    def test_hand_derived_2x2(self):
        # x1=[1,1], y1=3; x2=[1,-1], y2=-1  =>  g = [1, 2]
        samples = [
            RegressorSample(x=[1.0, 1.0], dy_dt=3.0),
            RegressorSample(x=[1.0, -1.0], dy_dt=-1.0),
        ]
        est = batch_ls(samples)
        assert not est.degenerate
        assert np.allclose(est.g_hat, [1.0, 2.0], rtol=1e-12)

    def test_identical_rows_degenerate(self):
        samples = [RegressorSample(x=[0.01, 0.01], dy_dt=0.3)] * 3
        est = batch_ls(samples)
        assert est.degenerate
        assert np.array_equal(est.g_hat, np.zeros(2))

    def test_randomized_gains_recover_gradient(self):
        # rows built like the controller builds them: eps * (2 k0 delta)
        rng = np.random.default_rng(5)
        g_true = np.array([-0.6, 0.4])
        eps = np.array([1.0, -1.0])
        xs = [eps * (2 * 0.01 * rng.random(2)) for _ in range(6)]
        est = batch_ls(samples_from_map(g_true, xs))
        assert not est.degenerate
        assert np.allclose(est.g_hat, g_true, rtol=1e-8)

    def test_insufficient_samples(self):
        with pytest.raises(InsufficientSamplesError):
            batch_ls([])
        with pytest.raises(InsufficientSamplesError):
            batch_ls([RegressorSample(x=[1.0, 2.0], dy_dt=0.0)])


class TestRlsBatchEquivalence:
    @pytest.mark.parametrize("p", [1, 2, 5])
    def test_forgetting_one_matches_batch(self, p):
        rng = np.random.default_rng(100 + p)
        samples = [
            RegressorSample(x=rng.normal(size=p), dy_dt=rng.normal()) for _ in range(50)
        ]
        state = rls_init(p, forgetting=1.0, gamma=1e6)
        for s in samples:
            state, est = rls_update(state, s)
        oracle = batch_ls(samples)
        assert np.allclose(est.g_hat, oracle.g_hat, rtol=1e-6)


class TestIdentifiability:
    def test_constant_rows_always_degenerate(self):
        # fixed directions and fixed gains: every p-window is singular
        x = np.array([1.0, -1.0]) * 0.01
        stream = [RegressorSample(x=x.copy(), dy_dt=0.1 * i) for i in range(10)]
        for start in range(len(stream) - 1):
            est = batch_ls(stream[start : start + 2])
            assert est.degenerate

    def test_stochastic_gains_never_degenerate(self):
        n_degenerate = 0
        for seed in range(100):
            rng = np.random.default_rng(seed)
            eps = np.array([1.0, 1.0])
            xs = [eps * (2 * 0.01 * rng.random(2)) for _ in range(2)]
            est = batch_ls(samples_from_map(np.array([0.3, -0.2]), xs))
            n_degenerate += int(est.degenerate)
        assert n_degenerate == 0
