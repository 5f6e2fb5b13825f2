import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from singcubic.objective import (
    LogisticProblem,
    QuadraticSum,
    Regularizer,
    finite_diff_check,
    regularizer_eval,
)

from conftest import make_logistic


def naive_logistic(X, y, w, kind, alpha, beta):
    """Per-example loop with the textbook formulas."""
    X = X.toarray() if sp.issparse(X) else np.asarray(X)
    n, p = X.shape
    f, g, H = 0.0, np.zeros(p), np.zeros((p, p))
    for x, t in zip(X, y):
        s = 1.0 / (1.0 + math.exp(-float(x @ w)))
        f -= t * math.log(s) + (1 - t) * math.log(1 - s)
        g += (s - t) * x
        H += s * (1 - s) * np.outer(x, x)
    f, g, H = f / n, g / n, H / n
    if kind == "l2":
        return f + 0.5 * alpha * w @ w, g + alpha * w, H + alpha * np.eye(p)
    q = 1 + beta * w**2
    f += alpha * np.sum(beta * w**2 / q)
    g = g + 2 * alpha * beta * w / q**2
    H = H + np.diag(2 * alpha * beta * (1 - 3 * beta * w**2) / q**3)
    return f, g, H


class TestRegularizer:
    def test_rational_unit(self):
        v, g, h = regularizer_eval("rational", 1.0, 1.0, np.array([1.0]))
        assert v == pytest.approx(0.5)
        np.testing.assert_allclose(g, [0.5])
        # r'' = 2ab(1 - 3bw^2)/(1 + bw^2)^3 = -4/8 at a = b = w = 1
        np.testing.assert_allclose(h, [-0.5])
        eps = 1e-5
        fd = (regularizer_eval("rational", 1.0, 1.0, np.array([1 + eps]))[1]
              - regularizer_eval("rational", 1.0, 1.0, np.array([1 - eps]))[1]) / (2 * eps)
        np.testing.assert_allclose(fd, [-0.5], rtol=1e-8)

    @pytest.mark.parametrize("kind", ["l2", "rational"])
    def test_zero_point(self, kind):
        v, g, _ = regularizer_eval(kind, 0.7, 2.0, np.zeros(3))
        assert v == 0.0
        np.testing.assert_array_equal(g, 0.0)

    def test_l2(self):
        v, g, h = regularizer_eval(Regularizer.L2, 2.0, 1.0, np.array([1.0, -1.0]))
        assert v == pytest.approx(2.0)
        np.testing.assert_allclose(g, [2.0, -2.0])
        np.testing.assert_allclose(h, [2.0, 2.0])

    def test_invalid(self):
        with pytest.raises(ValueError):
            regularizer_eval("l2", -1.0, 1.0, np.zeros(2))
        with pytest.raises(ValueError):
            regularizer_eval("rational", 1.0, 0.0, np.zeros(2))


class TestLogistic:
    @pytest.mark.parametrize("label", [0.0, 1.0])
    def test_origin_single_example(self, label):
        x = np.array([[1.0, -2.0, 0.5]])
        obj = LogisticProblem(x, [label], alpha=0.0)
        f, g, H = obj.evaluate(np.zeros(3))
        assert f == pytest.approx(math.log(2))
        np.testing.assert_allclose(g, (0.5 - label) * x[0])
        np.testing.assert_allclose(H, 0.25 * np.outer(x[0], x[0]))

    def test_zero_features(self):
        obj = LogisticProblem(np.zeros((1, 4)), [1.0], alpha=0.0)
        f, g, H = obj.evaluate(np.array([3.0, -1.0, 2.0, 0.5]))
        assert f == pytest.approx(math.log(2))
        np.testing.assert_array_equal(g, 0.0)
        np.testing.assert_array_equal(H, 0.0)

    @pytest.mark.parametrize("kind", ["l2", "rational"])
    def test_matches_naive_loop(self, kind, rng):
        obj = make_logistic(n=20, p=5, kind=kind, alpha=1e-3, beta=1.0, seed=3)
        w = rng.standard_normal(5)
        f, g, H = obj.evaluate(w)
        f0, g0, H0 = naive_logistic(obj.X, obj.y, w, kind, 1e-3, 1.0)
        assert f == pytest.approx(f0, rel=1e-12)
        np.testing.assert_allclose(g, g0, rtol=1e-10, atol=1e-14)
        np.testing.assert_allclose(H, H0, rtol=1e-10, atol=1e-14)

    @pytest.mark.parametrize("kind", ["l2", "rational"])
    def test_finite_differences(self, kind, rng):
        obj = make_logistic(n=20, p=5, kind=kind, seed=4)
        rep = finite_diff_check(obj, rng.standard_normal(5))
        assert rep.grad_error <= 1e-5
        assert rep.hess_error <= 1e-5

    def test_large_margins_stay_finite(self):
        X = np.array([[1000.0], [-1000.0]])
        obj = LogisticProblem(X, [0.0, 1.0], alpha=0.0)
        f, g, H = obj.evaluate(np.array([5.0]))
        assert f == pytest.approx(5000.0)
        assert np.all(np.isfinite(g)) and np.all(np.isfinite(H))

    def test_dense_and_sparse_agree(self, rng):
        obj = make_logistic(n=25, p=6, seed=5)
        dense = LogisticProblem(obj.X.toarray(), obj.y)
        w = rng.standard_normal(6)
        for a, b in zip(obj.evaluate(w), dense.evaluate(w)):
            np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-15)

    @pytest.mark.parametrize("kind", ["l2", "rational"])
    def test_hessian_exactly_symmetric(self, kind, rng):
        obj = make_logistic(n=40, p=12, kind=kind, seed=6)
        H = obj.hessian(rng.standard_normal(12), rng.choice(40, 7, replace=False))
        assert np.max(np.abs(H - H.T)) == 0.0

    def test_mean_decomposition(self, rng):
        obj = make_logistic(n=50, p=7, kind="rational", seed=7)
        w = rng.standard_normal(7)
        full = obj.evaluate(w)
        singles = [obj.evaluate(w, [i]) for i in range(obj.n)]
        for k in range(3):
            mean = sum(s[k] for s in singles) / obj.n
            np.testing.assert_allclose(full[k], mean, rtol=1e-12, atol=1e-14)

    def test_convexity_witness(self, rng):
        alpha = 1e-2
        obj = make_logistic(n=30, p=20, alpha=alpha, seed=8)
        for _ in range(10):
            S = rng.choice(30, rng.integers(1, 30), replace=False)
            H = obj.hessian(rng.standard_normal(20) * 3, S)
            assert np.linalg.eigvalsh(H)[0] >= alpha - 1e-10

    def test_rational_is_nonconvex(self):
        obj = LogisticProblem(np.zeros((1, 1)), [0.0], kind="rational", alpha=1.0, beta=1.0)
        assert obj.hessian(np.array([2.0]))[0, 0] < 0

    def test_index_errors(self):
        obj = make_logistic(n=10, p=3)
        with pytest.raises(ValueError):
            obj.evaluate(np.zeros(3), [])
        with pytest.raises(ValueError):
            obj.evaluate(np.zeros(3), [10])
        with pytest.raises(ValueError):
            obj.evaluate(np.zeros(3), [-1])
        with pytest.raises(ValueError):
            obj.evaluate(np.zeros(4))

    def test_bad_labels(self):
        with pytest.raises(ValueError):
            LogisticProblem(np.eye(2), [0.0, 2.0])
        with pytest.raises(ValueError):
            LogisticProblem(np.eye(2), [0.0, 1.0], kind="rational", beta=0.0)


class TestFiniteDiff:
    def test_quadratic_is_exact(self, rng):
        obj = QuadraticSum(np.zeros((1, 6)))
        rep = finite_diff_check(obj, rng.standard_normal(6))
        assert rep.grad_error <= 1e-10
        assert rep.step == 1e-6

    def test_rational_inflection(self):
        beta = 4.0
        obj = LogisticProblem(np.zeros((1, 3)), [1.0], kind="rational", alpha=1.0, beta=beta)
        rep = finite_diff_check(obj, np.full(3, 1 / math.sqrt(beta)))
        assert rep.hess_error <= 1e-4

    def test_rejects_bad_step(self):
        with pytest.raises(ValueError):
            finite_diff_check(QuadraticSum(np.zeros((1, 2))), np.zeros(2), h=0.0)

    def test_detects_wrong_gradient(self, rng):
        class Broken(QuadraticSum):
            def _evaluate(self, w, idx, hessian):
                f, g, H = super()._evaluate(w, idx, hessian)
                return f, 1.1 * g, H

        rep = finite_diff_check(Broken(rng.standard_normal((3, 4))), rng.standard_normal(4))
        assert rep.grad_error > 1e-3


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(0, 2**31 - 1),
    kind=st.sampled_from(["l2", "rational"]),
    beta=st.floats(0.1, 10.0),
)
def test_gradient_matches_differences_property(seed, kind, beta):
    rng = np.random.default_rng(seed)
    obj = make_logistic(n=15, p=4, kind=kind, beta=beta, alpha=0.1, seed=seed % 1000)
    S = rng.choice(15, rng.integers(1, 16), replace=False)
    rep = finite_diff_check(obj, rng.standard_normal(4), idx=S)
    assert rep.grad_error <= 1e-5
    assert rep.hess_error <= 1e-5
