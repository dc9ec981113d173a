import math

import numpy as np
import pytest

from magband import potentials as pot
from magband.potentials import (
    DerivativeUnavailable,
    FlatWell,
    Linear,
    Lorentzian,
    Parabola,
    Scaled,
    SignClass,
    SineObstacle,
    Sum,
    Tabulated,
)

RNG = np.random.default_rng(20240611)


def reference_value(spec, x):
    """Closed forms written out independently of the evaluation code."""
    if isinstance(spec, Lorentzian):
        return spec.lam / math.pi * spec.a / (x**2 + spec.a**2)
    if isinstance(spec, FlatWell):
        ax = np.abs(x)
        out = np.zeros_like(ax)
        out[ax < spec.a] = spec.lam
        edge = (ax >= spec.a) & (ax <= spec.b)
        out[edge] = spec.lam * np.cos(
            math.pi / 2 * (ax[edge] - spec.a) / (spec.b - spec.a)
        )
        return out
    if isinstance(spec, SineObstacle):
        out = spec.lam * np.sin(x / spec.a)
        out[np.abs(x) >= spec.a * math.pi] = 0.0
        return out
    if isinstance(spec, Linear):
        return spec.alpha * x
    if isinstance(spec, Parabola):
        return -spec.beta**2 * x**2
    raise AssertionError(type(spec))


@pytest.mark.parametrize(
    "spec",
    [
        Lorentzian(1.3, 0.7),
        Lorentzian(-2.0, 0.05),
        FlatWell(-2.0, 1.0, 2.0),
        FlatWell(0.7, 0.3, 1.9),
        SineObstacle(1.0, 1.0),
        SineObstacle(-0.4, 2.5),
        Linear(2.0),
        Parabola(0.8),
    ],
)
def test_evaluate_matches_closed_form_at_random_points(spec):
    x = RNG.uniform(-12.0, 12.0, size=1000)
    got = pot.evaluate(spec, x)
    want = reference_value(spec, x)
    assert np.max(np.abs(got - want)) <= 1e-12


def test_evaluate_examples():
    assert pot.evaluate(Lorentzian(1.0, 0.5), 0.0) == pytest.approx(1.0 / (math.pi * 0.5))
    assert pot.evaluate(FlatWell(-2.0, 1.0, 2.0), 0.5) == -2.0
    assert pot.evaluate(SineObstacle(1.0, 1.0), math.pi / 2) == pytest.approx(1.0)
    assert pot.evaluate(SineObstacle(1.0, 1.0), 2 * math.pi) == 0.0


def test_evaluate_scalar_and_array_shapes():
    spec = Lorentzian(1.0, 1.0)
    assert isinstance(pot.evaluate(spec, 0.3), float)
    out = pot.evaluate(spec, np.zeros((4,)))
    assert out.shape == (4,)


def test_evaluate_is_finite_everywhere():
    specs = [
        Lorentzian(1.0, 0.01),
        FlatWell(-3.0, 0.5, 0.6),
        SineObstacle(2.0, 0.1),
        Linear(-4.0),
        Parabola(2.0),
        Tabulated((-1.0, 0.0, 2.0), (0.5, -1.0, 3.0)),
    ]
    x = np.concatenate([RNG.uniform(-1e6, 1e6, 100), [0.0, -1e12, 1e12]])
    for spec in specs:
        assert np.all(np.isfinite(pot.evaluate(spec, x)))


def test_derivative_examples():
    assert pot.derivative(Lorentzian(1.0, 1.0), 0.0) == 0.0
    assert pot.derivative(Linear(2.0), -17.3) == 2.0
    assert pot.derivative(SineObstacle(1.0, 1.0), 0.0) == pytest.approx(1.0)


@pytest.mark.parametrize(
    "spec",
    [
        Lorentzian(1.3, 0.7),
        FlatWell(-2.0, 1.0, 2.0),
        SineObstacle(1.0, 1.0),
        Linear(2.0),
        Parabola(0.8),
        Sum((Lorentzian(0.5, 1.0), Linear(0.3))),
        Scaled(-2.5, Lorentzian(1.0, 0.4)),
    ],
)
def test_derivative_matches_finite_differences_at_smooth_points(spec):
    x = RNG.uniform(-8.0, 8.0, size=400)
    # stay away from the kink points of the piecewise profiles
    for radius in (1.0, 2.0, math.pi, 0.4, 0.4 * math.pi):
        x = x[np.abs(np.abs(x) - radius) > 1e-3]
    h = 1e-5
    fd = (pot.evaluate(spec, x + h) - pot.evaluate(spec, x - h)) / (2 * h)
    analytic = pot.derivative(spec, x)
    assert np.all(np.abs(analytic - fd) < 1e-6 * (1.0 + np.abs(analytic)))


def test_flatwell_derivative_takes_right_limits_at_kinks():
    well = FlatWell(2.0, 1.0, 3.0)
    slope = 0.5 * math.pi / (well.b - well.a)
    assert pot.derivative(well, well.b) == 0.0
    assert pot.derivative(well, -well.b) == pytest.approx(well.lam * slope)
    assert pot.derivative(well, well.a) == 0.0
    assert pot.derivative(well, -well.a) == 0.0


def test_sine_derivative_takes_right_limits_at_kinks():
    spec = SineObstacle(1.5, 2.0)
    edge = spec.a * math.pi
    assert pot.derivative(spec, edge) == 0.0
    assert pot.derivative(spec, -edge) == pytest.approx(-spec.lam / spec.a)


def test_tabulated_derivative_unavailable():
    spec = Tabulated((-1.0, 1.0), (0.0, 1.0))
    with pytest.raises(DerivativeUnavailable):
        pot.derivative(spec, 0.0)
    with pytest.raises(DerivativeUnavailable):
        pot.derivative(Sum((Lorentzian(1.0, 1.0), spec)), 0.0)
    assert not pot.has_derivative(spec)
    assert pot.has_derivative(Lorentzian(1.0, 1.0))


def test_tabulated_interpolation_and_outside_behavior():
    spec = Tabulated((-1.0, 0.0, 1.0), (0.0, 2.0, 1.0))
    assert pot.evaluate(spec, -0.5) == pytest.approx(1.0)
    assert pot.evaluate(spec, 0.5) == pytest.approx(1.5)
    assert pot.evaluate(spec, 5.0) == 0.0
    assert pot.evaluate(spec, -5.0) == 0.0
    clamped = Tabulated((-1.0, 1.0), (0.25, 0.5), clamp=True)
    assert pot.evaluate(clamped, -9.0) == 0.25
    assert pot.evaluate(clamped, 9.0) == 0.5


def test_asymptotic_limits():
    assert pot.asymptotic_limits(Lorentzian(3.0, 1.0)) == (0.0, 0.0)
    assert pot.asymptotic_limits(Linear(1.0)) is None
    assert pot.asymptotic_limits(Linear(0.0)) == (0.0, 0.0)
    assert pot.asymptotic_limits(Parabola(0.5)) is None
    step = Tabulated((-1.0, 1.0), (0.0, 0.5), clamp=True)
    combo = Sum((FlatWell(-1.0, 1.0, 2.0), step))
    assert pot.asymptotic_limits(combo) == (0.0, 0.5)
    assert pot.asymptotic_limits(Scaled(0.0, Linear(1.0))) == (0.0, 0.0)
    assert pot.asymptotic_limits(Scaled(2.0, step)) == (0.0, 1.0)


def test_sup_norm_examples():
    assert pot.sup_norm(Lorentzian(math.pi, 1.0)) == pytest.approx(1.0)
    assert pot.sup_norm(FlatWell(-0.3, 1.0, 2.0)) == pytest.approx(0.3)
    assert math.isinf(pot.sup_norm(Linear(1.0)))
    assert math.isinf(pot.sup_norm(Parabola(1.0)))
    assert pot.sup_norm(Scaled(0.0, Linear(1.0))) == 0.0
    assert pot.sup_norm(Tabulated((-1.0, 1.0), (-2.0, 0.5))) == 2.0


@pytest.mark.parametrize(
    "spec,maximizer",
    [
        (Lorentzian(2.0, 0.5), 0.0),
        (FlatWell(-1.5, 1.0, 2.0), 0.0),
        (SineObstacle(0.8, 1.3), 1.3 * math.pi / 2),
    ],
)
def test_sup_norm_bounds_samples_and_is_attained(spec, maximizer):
    sup = pot.sup_norm(spec)
    x = RNG.uniform(-20.0, 20.0, size=2000)
    assert np.all(np.abs(pot.evaluate(spec, x)) <= sup + 1e-12)
    assert abs(abs(pot.evaluate(spec, maximizer)) - sup) <= 1e-9


def test_classify_sign():
    assert pot.classify_sign(Lorentzian(2.0, 1.0)) is SignClass.NON_NEGATIVE
    assert pot.classify_sign(SineObstacle(1.0, 1.0)) is SignClass.INDEFINITE
    assert pot.classify_sign(FlatWell(-1.0, 1.0, 2.0)) is SignClass.NON_POSITIVE
    assert pot.classify_sign(Parabola(0.7)) is SignClass.NON_POSITIVE
    assert pot.classify_sign(Tabulated((-1.0, 1.0), (0.0, 2.0))) is SignClass.NON_NEGATIVE
    assert pot.classify_sign(Tabulated((-1.0, 1.0), (-1.0, 2.0))) is SignClass.INDEFINITE
    assert pot.classify_sign(Scaled(-1.0, Lorentzian(1.0, 1.0))) is SignClass.NON_POSITIVE


@pytest.mark.parametrize(
    "spec",
    [Lorentzian(2.0, 0.3), FlatWell(0.5, 0.5, 1.0), Scaled(-3.0, Lorentzian(1.0, 1.0))],
)
def test_sign_class_is_consistent_with_sampled_values(spec):
    x = RNG.uniform(-15.0, 15.0, size=2000)
    values = pot.evaluate(spec, x)
    sign = pot.classify_sign(spec)
    if sign is SignClass.NON_NEGATIVE:
        assert np.all(values >= 0.0)
    elif sign is SignClass.NON_POSITIVE:
        assert np.all(values <= 0.0)


def test_scale_composition():
    base = Lorentzian(1.0, 1.0)
    x = RNG.uniform(-5.0, 5.0, size=200)
    assert np.all(pot.evaluate(pot.scale(base, 0.0), x) == 0.0)
    assert np.array_equal(pot.evaluate(pot.scale(base, 1.0), x), pot.evaluate(base, x))
    assert pot.evaluate(pot.scale(base, 2.0), 0.0) == pytest.approx(2.0 / math.pi)
    nested = pot.scale(pot.scale(base, 2.0), -0.5)
    assert np.allclose(pot.evaluate(nested, x), -pot.evaluate(base, x))


def test_sum_evaluates_pointwise():
    a = Lorentzian(1.0, 1.0)
    b = Linear(0.5)
    x = RNG.uniform(-5.0, 5.0, size=50)
    combo = Sum((a, b))
    assert np.allclose(pot.evaluate(combo, x), pot.evaluate(a, x) + pot.evaluate(b, x))


@pytest.mark.parametrize(
    "build",
    [
        lambda: Lorentzian(1.0, 0.0),
        lambda: Lorentzian(1.0, -0.5),
        lambda: FlatWell(1.0, 2.0, 1.0),
        lambda: FlatWell(1.0, 0.0, 1.0),
        lambda: SineObstacle(1.0, -1.0),
        lambda: Tabulated((1.0, 0.0), (0.0, 0.0)),
        lambda: Tabulated((0.0,), (1.0,)),
        lambda: Tabulated((0.0, 1.0), (0.0, math.nan)),
        lambda: Linear(math.inf),
        lambda: Sum(()),
    ],
)
def test_invalid_construction_raises(build):
    with pytest.raises(ValueError):
        build()


def test_is_c1():
    assert pot.is_c1(Lorentzian(1.0, 1.0))
    assert pot.is_c1(Linear(2.0)) and pot.is_c1(Parabola(0.3))
    assert not pot.is_c1(FlatWell(1.0, 1.0, 2.0))
    assert not pot.is_c1(SineObstacle(1.0, 1.0))
    assert not pot.is_c1(Tabulated((-1.0, 1.0), (0.0, 1.0)))
    assert pot.is_c1(Scaled(0.0, SineObstacle(1.0, 1.0)))
    assert not pot.is_c1(Sum((Lorentzian(1.0, 1.0), FlatWell(1.0, 1.0, 2.0))))


def test_is_even():
    assert pot.is_even(Lorentzian(1.0, 1.0))
    assert pot.is_even(FlatWell(-1.0, 1.0, 2.0))
    assert not pot.is_even(SineObstacle(1.0, 1.0))
    assert not pot.is_even(Linear(1.0))
    assert pot.is_even(Tabulated((-1.0, 0.0, 1.0), (0.5, 1.0, 0.5)))
    assert not pot.is_even(Tabulated((-1.0, 0.0, 1.0), (0.5, 1.0, 0.25)))


def test_support_radii_and_feature_scales():
    assert pot.effective_support_radius(Lorentzian(1.0, 0.5)) == 25.0
    assert pot.effective_support_radius(FlatWell(1.0, 1.0, 2.0)) == 2.0
    assert pot.effective_support_radius(SineObstacle(1.0, 2.0)) == pytest.approx(2 * math.pi)
    assert pot.compact_support_radius(Lorentzian(1.0, 0.5)) is None
    assert pot.compact_support_radius(FlatWell(1.0, 1.0, 2.0)) == 2.0
    assert pot.finest_feature_scale(FlatWell(1.0, 1.0, 1.25)) == pytest.approx(0.25)
    assert math.isinf(pot.finest_feature_scale(Linear(2.0)))


def test_quadratic_tail_coefficients():
    assert pot.quadratic_tail_coefficients(Lorentzian(1.0, 1.0)) == (0.0, 0.0)
    assert pot.quadratic_tail_coefficients(Linear(2.0)) == (2.0, 0.0)
    assert pot.quadratic_tail_coefficients(Parabola(0.5)) == (0.0, 0.25)
    alpha, beta_sq = pot.quadratic_tail_coefficients(
        Sum((Linear(1.0), Scaled(2.0, Parabola(0.5))))
    )
    assert alpha == 1.0
    assert beta_sq == pytest.approx(0.5)
    # a negatively scaled parabola is confining, not a barrier
    _, beta_sq = pot.quadratic_tail_coefficients(Scaled(-1.0, Parabola(0.5)))
    assert beta_sq == pytest.approx(-0.25)


def test_hypotheses_classification():
    assert pot.hypotheses(Lorentzian(1.0, 1.0)) == {
        "v1": True, "v2": True, "v3": True, "v4": True, "v5": True,
    }
    well = pot.hypotheses(FlatWell(-1.0, 1.0, 2.0))
    assert well["v1"] and well["v2"] and well["v3"] and well["v5"]
    assert not well["v4"]  # kinked edges
    lin = pot.hypotheses(Linear(1.0))
    assert not lin["v1"] and not lin["v2"] and not lin["v3"] and not lin["v4"]
    step = pot.hypotheses(Tabulated((-1.0, 1.0), (0.0, 0.5), clamp=True))
    assert step["v1"] and step["v2"] and not step["v3"]
    assert not pot.hypotheses(Scaled(0.0, Lorentzian(1.0, 1.0)))["v5"]


def test_describe_is_readable():
    text = pot.describe(Scaled(2.0, Lorentzian(1.0, 0.5)))
    assert "Lorentzian" in text and "2" in text
