import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tsnoether import (
    GridFunction,
    delta_derivative,
    delta_integral,
    explicit_scale,
    h_uniform,
    mixed,
    parse_scale_spec,
    q_geometric,
    read_csv,
    real_approx,
    shift,
    write_csv,
)


def scales_zoo():
    return [
        h_uniform(1.0, 0, 9),
        h_uniform(0.5, 0, 4.5),
        q_geometric(2.0, 1.0, 10),
    ]


class TestConstruction:
    def test_h_uniform_points_and_jump_law(self):
        ts = h_uniform(1.0, 0, 5)
        assert np.array_equal(ts.points, [0, 1, 2, 3, 4, 5])
        assert ts.condition_h == (1.0, 1.0)

    def test_q_geometric_points_and_jump_law(self):
        ts = q_geometric(2.0, 1.0, 5)
        assert np.array_equal(ts.points, [1, 2, 4, 8, 16])
        assert ts.condition_h == (2.0, 0.0)

    def test_real_approx_behaves_like_uniform(self):
        ts = real_approx(0.25, 0, 1)
        assert ts.kind == "real-approx"
        assert ts.condition_h == (1.0, 0.25)

    def test_explicit_detection_accepts_affine_orbit(self):
        # {1,2,4,8} is the q=2 orbit; all non-maximal points obey sigma = 2t.
        ts = explicit_scale([1.0, 2.0, 4.0, 8.0])
        b1, b0 = ts.condition_h
        assert b1 == pytest.approx(2.0) and b0 == pytest.approx(0.0)

    def test_explicit_detection_rejects_mismatch(self):
        assert explicit_scale([0.0, 1.0, 2.0, 4.0]).condition_h is None

    @pytest.mark.parametrize(
        "bad",
        [[0.0], [0.0, 0.0, 1.0], [1.0, 0.5]],
    )
    def test_bad_point_lists(self, bad):
        with pytest.raises(ValueError):
            explicit_scale(bad)

    def test_bad_parameters(self):
        with pytest.raises(ValueError):
            h_uniform(0.0, 0, 5)
        with pytest.raises(ValueError):
            h_uniform(-1.0, 0, 5)
        with pytest.raises(ValueError):
            q_geometric(1.0, 1.0, 5)
        with pytest.raises(ValueError):
            q_geometric(2.0, -1.0, 5)
        with pytest.raises(ValueError):
            q_geometric(2.0, 1.0, 1)

    @pytest.mark.parametrize(
        "spec,npts",
        [("h:1:0:5", 6), ("q:2:1:5", 5), ("real:0.5:0:2", 5)],
    )
    def test_parse_scale_spec(self, spec, npts):
        assert len(parse_scale_spec(spec)) == npts

    def test_parse_explicit_file(self, tmp_path):
        path = tmp_path / "pts.txt"
        path.write_text("0.0\n1.5\n2.5\n")
        ts = parse_scale_spec(f"explicit:@{path}")
        assert np.array_equal(ts.points, [0.0, 1.5, 2.5])

    @pytest.mark.parametrize("spec", ["h:0:0:5", "x:1:2:3", "h:1:0", "q:2:1:one"])
    def test_parse_errors(self, spec):
        with pytest.raises(ValueError):
            parse_scale_spec(spec)


class TestJumpOperators:
    def test_h_half_sigma_mu(self):
        ts = h_uniform(0.5, 0, 3)
        i = 2  # t = 1.0
        assert ts.t(ts.sigma(i)) == 1.5
        assert ts.mu(i) == 0.5

    def test_q2_sigma_mu(self):
        ts = q_geometric(2.0, 1.0, 5)
        i = 2  # t = 4
        assert ts.t(ts.sigma(i)) == 8.0
        assert ts.mu(i) == 4.0

    def test_explicit_next_prev(self):
        ts = explicit_scale([0.0, 1.0, 3.0])
        assert ts.t(ts.sigma(1)) == 3.0
        assert ts.t(ts.rho(1)) == 0.0

    def test_saturation_at_ends(self):
        ts = h_uniform(1.0, 0, 3)
        assert ts.sigma(3) == 3
        assert ts.rho(0) == 0
        assert ts.mu(3) == 0.0

    def test_sigma_rho_identity_off_minimum(self):
        for ts in scales_zoo():
            for i in range(1, len(ts)):
                assert ts.sigma(ts.rho(i)) == i
            for i in range(len(ts) - 1):
                assert ts.rho(ts.sigma(i)) == i

    def test_index_range_errors(self):
        ts = h_uniform(1.0, 0, 3)
        with pytest.raises(ValueError):
            ts.sigma(4)
        with pytest.raises(ValueError):
            ts.mu(-1)


class TestDerivative:
    def test_square_on_integers(self):
        ts = h_uniform(1.0, 0, 5)
        d = delta_derivative(GridFunction.from_callable(ts, lambda t: t * t))
        assert d.window == (0, 4)
        assert np.allclose(d.values[:, 0], 2 * np.arange(5) + 1)

    @pytest.mark.parametrize("order", [1, 2, 3])
    def test_constant_derivative_vanishes(self, order):
        for ts in scales_zoo():
            d = delta_derivative(GridFunction.from_callable(ts, lambda t: 4.25), order)
            assert np.all(d.values == 0)

    def test_identity_on_q_scale(self):
        ts = q_geometric(2.0, 1.0, 6)
        d = delta_derivative(GridFunction.from_callable(ts, lambda t: t))
        assert np.allclose(d.values, 1.0)

    @pytest.mark.parametrize("order", [1, 2, 3])
    def test_kappa_shrinkage(self, order):
        ts = h_uniform(1.0, 0, 9)
        f = GridFunction.from_callable(ts, lambda t: t**3)
        d = delta_derivative(f, order)
        assert (d.hi - d.lo + 1) == (f.hi - f.lo + 1) - order

    def test_window_too_small(self):
        ts = h_uniform(1.0, 0, 3)
        f = GridFunction(ts, 1, np.array([2.0, 3.0]))
        with pytest.raises(ValueError):
            delta_derivative(f, 2)


class TestShift:
    def test_zero_shift_is_identity(self):
        ts = h_uniform(1.0, 0, 5)
        f = GridFunction.from_callable(ts, lambda t: t * t)
        assert shift(f, 0) is f

    def test_forward_shift_on_integers(self):
        ts = h_uniform(1.0, 0, 5)
        f = GridFunction.from_callable(ts, lambda t: 3 * t)
        g = shift(f, 1)
        assert g.window == (0, 4)
        assert np.allclose(g.values[:, 0], 3 * (np.arange(5) + 1))

    def test_shift_round_trip_interior(self):
        for ts in scales_zoo():
            f = GridFunction.from_callable(ts, lambda t: np.sin(t))
            g = shift(shift(f, -1), 1)
            lo, hi = g.window
            assert np.array_equal(g.values, f.values[lo - f.lo : hi - f.lo + 1])

    def test_rho_saturates_at_minimum(self):
        ts = h_uniform(1.0, 0, 4)
        f = GridFunction.from_callable(ts, lambda t: t)
        g = shift(f, -1)
        assert g.lo == 0
        assert g.values[0, 0] == f.values[0, 0]
        assert np.allclose(g.values[1:, 0], f.values[:-1, 0])

    def test_shift_exhaustion(self):
        ts = h_uniform(1.0, 0, 2)
        f = GridFunction(ts, 1, np.array([1.0, 2.0]))
        with pytest.raises(ValueError):
            shift(f, 5)


class TestMixed:
    def test_noop(self):
        ts = h_uniform(1.0, 0, 5)
        f = GridFunction.from_callable(ts, lambda t: t * t)
        assert mixed(f, 0, 0) is f

    def test_square_on_integers_both_orders(self):
        ts = h_uniform(1.0, 0, 6)
        f = GridFunction.from_callable(ts, lambda t: t * t)
        sd = mixed(f, 1, 1)
        ds = shift(delta_derivative(f, 1), 1)
        lo, hi = 0, 4
        expect = 2 * np.arange(lo, hi + 1) + 3
        assert np.allclose(sd.restrict(lo, hi).values[:, 0], expect)
        assert np.allclose(ds.restrict(lo, hi).values[:, 0], expect)

    def test_commutation_factor_on_q_scale(self):
        # quotient evaluation at t=1, q=2: (f.sigma).delta = b1 * (f.delta).sigma
        ts = q_geometric(2.0, 1.0, 6)
        f = GridFunction.from_callable(ts, lambda t: t * t)
        sd = mixed(f, 1, 1)
        ds = shift(delta_derivative(f, 1), 1)
        q = 2.0
        assert sd.at(0)[0] == pytest.approx(q * q * (q + 1))
        assert ds.at(0)[0] == pytest.approx((q + 1) * q)
        assert sd.at(0)[0] == pytest.approx(q * ds.at(0)[0])

    @pytest.mark.parametrize("ts", scales_zoo())
    def test_commutation_everywhere(self, ts):
        rng = np.random.default_rng(0)
        coeffs = rng.uniform(-1, 1, 4)
        f = GridFunction(ts, 0, np.polynomial.polynomial.polyval(ts.points, coeffs))
        b1 = ts.condition_h[0]
        sd = mixed(f, 1, 1)
        ds = b1 * shift(delta_derivative(f, 1), 1)
        lo, hi = 0, len(ts) - 3
        a = sd.restrict(lo, hi).values
        b = ds.restrict(lo, hi).values
        assert np.max(np.abs(a - b)) <= 1e-12 * max(1.0, np.max(np.abs(a)))


class TestIntegral:
    def test_counting_measure(self):
        ts = h_uniform(1.0, 0, 5)
        f = GridFunction.from_callable(ts, lambda t: 1.0)
        assert delta_integral(f, 0, 3)[0] == 3.0

    def test_q_scale_weighted_sum(self):
        ts = q_geometric(2.0, 1.0, 4)
        f = GridFunction.from_callable(ts, lambda t: t)
        assert delta_integral(f, 0, 3)[0] == 21.0

    def test_empty_range(self):
        ts = h_uniform(1.0, 0, 5)
        f = GridFunction.from_callable(ts, lambda t: t)
        assert delta_integral(f, 2, 2)[0] == 0.0

    def test_limits_validated(self):
        ts = h_uniform(1.0, 0, 5)
        f = GridFunction(ts, 1, np.arange(4.0))
        with pytest.raises(ValueError):
            delta_integral(f, 0, 3)

    @pytest.mark.parametrize("ts", scales_zoo())
    def test_integration_by_parts(self, ts):
        rng = np.random.default_rng(7)
        pv = np.polynomial.polynomial.polyval
        f = GridFunction(ts, 0, pv(ts.points, rng.uniform(-1, 1, 4)))
        g = GridFunction(ts, 0, pv(ts.points, rng.uniform(-1, 1, 4)))
        lhs = delta_integral(delta_derivative(f) * shift(g, 1))[0]
        boundary = f.values[-1, 0] * g.values[-1, 0] - f.values[0, 0] * g.values[0, 0]
        rhs = boundary - delta_integral(f * delta_derivative(g))[0]
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs), abs(rhs))


@given(
    coeffs=st.lists(st.floats(-3, 3), min_size=2, max_size=5),
    alpha=st.floats(-2, 2),
    beta=st.floats(-2, 2),
)
@settings(max_examples=50, deadline=None)
def test_linearity_of_derivative_and_integral(coeffs, alpha, beta):
    ts = h_uniform(0.5, 0, 4)
    pv = np.polynomial.polynomial.polyval
    f = GridFunction(ts, 0, pv(ts.points, coeffs))
    g = GridFunction(ts, 0, pv(ts.points, coeffs[::-1]))
    combo = alpha * f + beta * g
    d_combo = delta_derivative(combo)
    d_split = alpha * delta_derivative(f) + beta * delta_derivative(g)
    assert np.allclose(d_combo.values, d_split.values, rtol=0, atol=1e-9)
    assert delta_integral(combo)[0] == pytest.approx(
        alpha * delta_integral(f)[0] + beta * delta_integral(g)[0], abs=1e-9
    )


class TestGridFunction:
    def test_window_invariants(self):
        ts = h_uniform(1.0, 0, 5)
        with pytest.raises(ValueError):
            GridFunction(ts, 3, np.zeros((5, 1)))
        with pytest.raises(ValueError):
            GridFunction(ts, -1, np.zeros((2, 1)))

    def test_arithmetic_intersects_windows(self):
        ts = h_uniform(1.0, 0, 5)
        f = GridFunction(ts, 0, np.arange(4.0))
        g = GridFunction(ts, 2, np.ones(4))
        s = f + g
        assert s.window == (2, 3)
        assert np.allclose(s.values[:, 0], [3.0, 4.0])

    def test_disjoint_windows_error(self):
        ts = h_uniform(1.0, 0, 5)
        f = GridFunction(ts, 0, np.arange(2.0))
        g = GridFunction(ts, 4, np.ones(2))
        with pytest.raises(ValueError):
            _ = f + g

    def test_csv_round_trip(self, tmp_path):
        ts = q_geometric(2.0, 1.0, 5)
        f = GridFunction(ts, 1, np.column_stack([ts.points[1:] ** 2, 1 / ts.points[1:]]))
        path = tmp_path / "f.csv"
        write_csv(f, path)
        assert path.read_text().splitlines()[0] == "t,y1,y2"
        g = read_csv(ts, path)
        assert g.window == f.window
        assert np.array_equal(g.values, f.values)

    def test_values_frozen(self):
        ts = h_uniform(1.0, 0, 3)
        f = GridFunction.from_callable(ts, lambda t: t)
        with pytest.raises(ValueError):
            f.values[0, 0] = 99.0
