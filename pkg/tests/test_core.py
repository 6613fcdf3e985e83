import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mork._poly import elementary_symmetric, vieta_coefficients
from mork.core import (
    MAX_LENGTH,
    ConfluentLinearProblem,
    InitialValueProblem,
    Kind,
    MethodTableau,
    as_jet,
    autonomize_rank1,
    confluent_linear_ivp,
    linear_ivp_from_roots,
    prolong_ivp,
    reduce_ivp,
    reduce_to_first_order,
    taylor_rows,
)
from mork.methods import catalog
from mork.stepper import mork_step

from oracles import companion_jet, confluent_series, elementary_symmetric_bruteforce

complexes = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)


class TestTableau:
    def test_last_node_defaults_to_one(self):
        m = MethodTableau(1, [0.5], lambda N: np.array([[0.5], [1.0]]), kind=Kind.NODE_DETERMINED)
        assert m.nodes.tolist() == [0.5, 1.0]

    @pytest.mark.parametrize(
        "kwargs, message",
        [
            (dict(kind=Kind.GENERAL), "secondary"),
            (dict(kind=Kind.MORK), "approximation-time"),
            (dict(kind=Kind.NODE_DETERMINED, length=0), "length"),
            (dict(kind=Kind.NODE_DETERMINED, length=MAX_LENGTH + 1), "length"),
        ],
    )
    def test_constructor_rejects(self, kwargs, message):
        with pytest.raises(ValueError, match=message):
            MethodTableau(1, [0.0], lambda N: np.zeros((2, 1)), **kwargs)

    def test_weights_are_read_only_and_cached(self):
        m = catalog("mork-midpoint")
        w = m.main_weights(3)
        with pytest.raises(ValueError):
            w[0, 0] = 1.0
        assert m.cached_length >= 3
        assert m.main_weights(3) is w

    def test_rank_beyond_length(self):
        m = catalog("mork-euler")
        with pytest.raises(ValueError, match="exceeds"):
            m.main_weights(MAX_LENGTH + 1)

    def test_bad_weight_shape(self):
        m = MethodTableau(1, [0.0], lambda N: np.zeros((3, 3)), kind=Kind.NODE_DETERMINED)
        with pytest.raises(ValueError, match="shape"):
            m.main_weights(1)

    @given(st.lists(st.floats(-2, 2), min_size=1, max_size=5), st.integers(1, 7))
    def test_taylor_rows(self, times, N):
        rows = taylor_rows(np.array(times), N)
        for j, t in enumerate(times):
            expect = [t**p / math.factorial(p) if p else 1.0 for p in range(N)]
            np.testing.assert_allclose(rows[j], expect, rtol=1e-14, atol=1e-300)

    def test_zero_node_convention(self):
        rows = taylor_rows(np.array([0.0]), 4)
        assert rows.tolist() == [[1.0, 0.0, 0.0, 0.0]]


class TestJets:
    def test_padding_is_zeroed(self):
        jet = as_jet([[1, 2, 3], [4, 5, 6]], (3, 1))
        assert jet.tolist() == [[1, 2, 3], [4, 0, 0]]

    def test_one_dimensional_input(self):
        assert as_jet([1, 2], (2,)).shape == (1, 2)

    @pytest.mark.parametrize("orders", [(0,), (2, 0)])
    def test_invalid_orders(self, orders):
        with pytest.raises(ValueError):
            as_jet(np.zeros((len(orders), 2)), orders)


class TestConfluent:
    def test_first_order_growth(self):
        ivp = confluent_linear_ivp(1, 2.0)
        assert ivp.f(0.0, np.array([[3.0]]))[0] == pytest.approx(6.0)
        assert ivp.exact(0.7)[0, 0] == pytest.approx(math.exp(1.4))

    def test_pure_exponential_jet(self):
        lam = -0.5 + 1j
        ivp = confluent_linear_ivp(6, lam)
        t = 0.37
        jet = ivp.exact(t)[0]
        expect = [lam ** (6 - N) * np.exp(lam * t) for N in range(1, 7)]
        np.testing.assert_allclose(jet, expect, rtol=1e-13)

    def test_double_root_polynomial_part(self):
        prob = ConfluentLinearProblem(2, 1.0, np.array([1.0, 0.0]))
        assert prob.a.tolist() == [0, 1]
        for t in (0.0, 0.3, 1.2):
            assert prob.derivative(0, t) == pytest.approx(t * math.exp(t))
            assert prob.derivative(1, t) == pytest.approx((1 + t) * math.exp(t))

    @given(
        st.integers(1, 4),
        complexes,
        st.lists(st.floats(-2, 2), min_size=4, max_size=4),
        st.floats(-1, 1),
    )
    def test_exact_jet_matches_series(self, n, lam, y0, t):
        ivp = confluent_linear_ivp(n, lam, 0.0, y0[:n])
        np.testing.assert_allclose(ivp.exact(t)[0], confluent_series(n, lam, y0[:n], t), rtol=1e-9, atol=1e-9)

    @given(st.integers(1, 4), complexes, st.floats(-1, 1))
    def test_exact_jet_solves_the_equation(self, n, lam, t):
        ivp = confluent_linear_ivp(n, lam, 0.2)
        prob = ConfluentLinearProblem(n, lam, ivp.y0[0], 0.2)
        top = prob.derivative(n, t)
        assert top == pytest.approx(ivp.f(t, ivp.exact(t))[0], rel=1e-9, abs=1e-9)


class TestVieta:
    def test_single_root(self):
        assert vieta_coefficients([2.5]).tolist() == [2.5]

    def test_two_roots(self):
        assert np.allclose(vieta_coefficients([1.0, -1.0]), [0.0, 1.0])

    @given(complexes)
    def test_repeated_root_matches_binomial(self, lam):
        for n in (2, 3):
            prob = ConfluentLinearProblem(n, lam, np.ones(n))
            np.testing.assert_allclose(vieta_coefficients([lam] * n), prob.coefficients, atol=1e-12)

    @given(st.lists(complexes, min_size=1, max_size=6))
    def test_recurrence_matches_subsets(self, values):
        np.testing.assert_allclose(
            elementary_symmetric(values), elementary_symmetric_bruteforce(values), rtol=1e-10, atol=1e-10
        )

    @given(st.lists(complexes, min_size=2, max_size=4, unique=True), st.floats(-0.5, 0.5))
    def test_linear_problem_from_roots(self, roots, t):
        y0 = np.linspace(0.5, 1.5, len(roots))
        ivp = linear_ivp_from_roots(roots, y0=y0)
        jet = companion_jet(roots, y0, t)
        # n-th derivative by a centred difference of the rank-1 entry of the exact flow.
        eps = 1e-5
        top = (companion_jet(roots, y0, t + eps)[0] - companion_jet(roots, y0, t - eps)[0]) / (2 * eps)
        assert ivp.f(t, jet[None, :])[0] == pytest.approx(top, rel=1e-6, abs=1e-6)


class TestRewrites:
    def test_reduce_first_order_of_oscillator(self):
        ivp = InitialValueProblem((2,), lambda t, x: -x[:, 1], 0.0, [[0.0, 1.0]])
        red = reduce_to_first_order(ivp)
        assert red.orders == (1, 1)
        x = np.array([[0.3], [0.8]])
        np.testing.assert_allclose(red.f(0.0, x), [-0.8, 0.3])

    def test_reduce_identity_for_order_one(self):
        ivp = confluent_linear_ivp(1, 1.0)
        assert reduce_to_first_order(ivp) is ivp

    def test_reduce_shapes(self):
        ivp = InitialValueProblem((3, 3), lambda t, x: x[:, 0], 0.0, np.ones((2, 3)))
        red = reduce_ivp(ivp, 2)
        assert red.orders == (2,) * 4
        assert red.y0.shape == (4, 2)
        np.testing.assert_array_equal(red.to_original(red.y0), ivp.y0)

    def test_reduce_to_one_equals_first_order(self):
        ivp = confluent_linear_ivp(3, -1 + 0.5j)
        a, b = reduce_ivp(ivp, 1), reduce_to_first_order(ivp)
        np.testing.assert_array_equal(a.y0, b.y0)
        np.testing.assert_array_equal(a.f(0.1, a.y0), b.f(0.1, b.y0))

    @pytest.mark.parametrize("target", [0, 3])
    def test_reduce_bad_target(self, target):
        with pytest.raises(ValueError):
            reduce_ivp(confluent_linear_ivp(3, 1.0), target)

    def test_prolong_needs_larger_order(self):
        with pytest.raises(ValueError):
            prolong_ivp(confluent_linear_ivp(2, 1.0), 2)

    def test_prolonged_rank_is_an_antiderivative(self):
        ivp = confluent_linear_ivp(2, -1.0)
        pr = prolong_ivp(ivp, 3)
        m = catalog("mork4b")
        h = 0.05
        out = mork_step(m, None, pr, 0.0, pr.y0, h).final[0]
        # y(t) = exp(-t): antiderivative from 0 is 1 - exp(-t).
        assert out[2] == pytest.approx(1 - math.exp(-h), abs=1e-7)
        assert out[1] == pytest.approx(math.exp(-h), abs=1e-7)

    def test_prolonged_first_order_matches_original(self):
        ivp = confluent_linear_ivp(1, 1.0)
        pr = prolong_ivp(ivp, 2)
        m = catalog("mork4")
        a = mork_step(m, None, ivp, 0.0, ivp.y0, 0.1).final
        b = mork_step(m, None, pr, 0.0, pr.y0, 0.1).final
        assert a[0, 0] == pytest.approx(b[0, 0], abs=1e-15)

    def test_autonomize_time_rhs(self):
        ivp = InitialValueProblem((2,), lambda t, x: np.array([t]), 0.3, [[1.0, 2.0]])
        auto = autonomize_rank1(ivp)
        assert auto.orders == (2, 1)
        m = catalog("mork-heun")
        a = mork_step(m, None, ivp, 0.3, ivp.y0, 0.2).final
        b = mork_step(m, None, auto, 0.3, auto.y0, 0.2).final
        np.testing.assert_allclose(b[0], a[0], atol=1e-13)
        assert b[1, 0] == pytest.approx(0.5, abs=1e-13)

    def test_autonomize_detects_inconsistent_nodes(self):
        bad = MethodTableau(1, [0.5], lambda N: np.array([[0.2], [1.0]]), kind=Kind.NODE_DETERMINED)
        ivp = InitialValueProblem((1,), lambda t, x: np.array([t]), 0.0, [[0.0]])
        auto = autonomize_rank1(ivp)
        a = mork_step(bad, None, ivp, 0.0, ivp.y0, 1.0)
        b = mork_step(bad, None, auto, 0.0, auto.y0, 1.0)
        assert abs(a.stages[0, 0, 0] - b.stages[0, 0, 0]) > 1e-3

    def test_autonomize_leaves_time_free_problems_alone(self):
        ivp = confluent_linear_ivp(2, -0.5)
        auto = autonomize_rank1(ivp)
        m = catalog("mork-midpoint")
        a = mork_step(m, None, ivp, 0.0, ivp.y0, 0.1).final
        b = mork_step(m, None, auto, 0.0, auto.y0, 0.1).final
        np.testing.assert_allclose(b[0], a[0], atol=1e-15)
