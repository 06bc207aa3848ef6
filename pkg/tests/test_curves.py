import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plantflow import Linear, Weibull, derivative, evaluate, upper_support, validate
from plantflow.errors import DomainError, SingularityError

RUBRUM_STEM = Weibull(25.29, 4.22, 4.67)
PINE_STEM = Weibull(1.07, 4.59, 4.11)
SUNFLOWER_LEAF = Linear(0.4, 1.64)

weibulls = st.builds(
    Weibull,
    k_max=st.floats(0.1, 50.0),
    p=st.floats(0.5, 6.0),
    nu=st.floats(1.0, 12.0),
)
linears = st.builds(Linear, k_max=st.floats(0.1, 50.0), p=st.floats(0.5, 6.0))


def grid_flow_argmax(curve, upper, m=200_001):
    xs = np.linspace(0.0, upper, m)
    return xs[np.argmax(xs * curve.values(xs))]


def test_weibull_at_zero_is_k_max():
    assert evaluate(RUBRUM_STEM, 0.0) == 25.29


@given(weibulls)
def test_weibull_at_scale_is_k_max_over_e(curve):
    assert evaluate(curve, curve.p) == pytest.approx(curve.k_max / math.e, rel=1e-14)


def test_linear_cutoff_and_clamp():
    assert evaluate(SUNFLOWER_LEAF, 1.64) == 0.0
    assert evaluate(SUNFLOWER_LEAF, 2.0) == 0.0


def test_evaluate_arrays_match_scalars():
    xs = np.linspace(0.0, 8.0, 33)
    assert np.allclose(evaluate(RUBRUM_STEM, xs), [evaluate(RUBRUM_STEM, x) for x in xs], rtol=1e-14)


@pytest.mark.parametrize("curve", [RUBRUM_STEM, SUNFLOWER_LEAF])
def test_negative_potential_rejected(curve):
    with pytest.raises(DomainError):
        evaluate(curve, -0.1)
    with pytest.raises(DomainError):
        derivative(curve, -0.1)


@pytest.mark.parametrize(
    "kwargs", [dict(k_max=0, p=1, nu=2), dict(k_max=1, p=-1, nu=2), dict(k_max=1, p=1, nu=-1),
               dict(k_max=float("nan"), p=1, nu=2)]
)
def test_weibull_construction_invariants(kwargs):
    with pytest.raises(DomainError):
        Weibull(**kwargs)


def test_linear_construction_invariants():
    with pytest.raises(DomainError):
        Linear(0.4, 0.0)


@pytest.mark.parametrize("psi", [0.0, 0.5, 1.0, 1.63])
def test_linear_derivative_is_constant(psi):
    assert derivative(SUNFLOWER_LEAF, psi) == pytest.approx(-0.4 / 1.64)
    assert derivative(SUNFLOWER_LEAF, 2.0) == 0.0


def test_weibull_derivative_vanishes_at_zero_for_nu_above_one():
    assert derivative(RUBRUM_STEM, 0.0) == 0.0


def test_weibull_derivative_singular_for_nu_below_one():
    with pytest.raises(SingularityError):
        derivative(Weibull(1.0, 1.0, 0.5), 0.0)


def central_difference(curve, x, h=1e-6):
    return (curve.value(x + h) - curve.value(x - h)) / (2 * h)


def test_weibull_derivative_matches_finite_difference():
    assert derivative(RUBRUM_STEM, 2.0) == pytest.approx(central_difference(RUBRUM_STEM, 2.0), rel=1e-6)


@given(weibulls, st.floats(0.05, 1.5))
def test_derivative_matches_finite_difference_random(curve, fraction):
    x = fraction * curve.p
    fd = central_difference(curve, x, h=1e-6 * curve.p)
    assert derivative(curve, x) == pytest.approx(fd, rel=1e-6, abs=1e-9 * curve.k_max)


@given(st.one_of(weibulls, linears))
def test_evaluate_nonnegative_and_nonincreasing(curve):
    xs = np.linspace(0.0, 3.0 * curve.p, 2001)
    ks = evaluate(curve, xs)
    assert np.all(ks >= 0.0)
    assert np.all(np.diff(ks) <= 0.0)


def test_validate_examples():
    assert validate(Weibull(11.9, 3.34, 1.69)).overall_valid
    assert validate(SUNFLOWER_LEAF).overall_valid
    bad = validate(Weibull(1.0, 1.0, 0.5))
    assert not bad.log_reciprocal_convex
    assert not bad.overall_valid
    assert bad.tail_vanishes and bad.is_positive_decreasing
    assert any("log-convexity fails" in m for m in bad.messages)


def second_difference_of_log_reciprocal(curve, xs, h=1e-4):
    def g(x):
        return -np.log(curve.values(x) / curve.k_max)

    return (g(xs + h) - 2 * g(xs) + g(xs - h)) / h**2


@pytest.mark.parametrize("nu", [0.3, 0.5, 0.9])
def test_sub_unit_shape_breaks_convexity_numerically(nu):
    curve = Weibull(1.0, 1.0, nu)
    xs = np.linspace(0.05, 3.0, 50)
    assert np.all(second_difference_of_log_reciprocal(curve, xs) < 0.0)
    assert not validate(curve).log_reciprocal_convex


@given(weibulls)
@settings(max_examples=50)
def test_valid_shape_is_convex_numerically(curve):
    xs = np.linspace(0.05, 1.5, 40) * curve.p
    assert np.all(second_difference_of_log_reciprocal(curve, xs, h=1e-3 * curve.p) > -1e-3)
    assert validate(curve).overall_valid


def test_upper_support_linear_is_cutoff():
    assert upper_support(SUNFLOWER_LEAF, 0.5) == 1.64
    assert upper_support(SUNFLOWER_LEAF) == 1.64


@pytest.mark.parametrize("curve,minimum", [(RUBRUM_STEM, 3.03), (PINE_STEM, 3.25)])
def test_upper_support_exceeds_flow_argmax(curve, minimum):
    bound = upper_support(curve, 1e-6)
    assert math.isfinite(bound)
    argmax = grid_flow_argmax(curve, bound)
    assert argmax == pytest.approx(curve.p * curve.nu ** (-1 / curve.nu), abs=1e-4)
    assert bound >= minimum
    assert argmax < bound


def test_upper_support_tail_is_below_floor():
    floor = 1e-6
    bound = upper_support(RUBRUM_STEM, floor)
    xs = np.linspace(0.0, 3 * bound, 100_001)
    fl = xs * RUBRUM_STEM.values(xs)
    assert np.all(fl[xs > bound * (1 + 1e-9)] < floor * fl.max())


@given(weibulls)
@settings(max_examples=50)
def test_upper_support_bounds_argmax_random(curve):
    bound = upper_support(curve)
    assert grid_flow_argmax(curve, bound, m=20_001) < bound


def test_upper_support_rejects_bad_floor():
    with pytest.raises(DomainError):
        upper_support(RUBRUM_STEM, 1.5)
