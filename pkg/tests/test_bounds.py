import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from topostab import (
    PointCloud,
    RandomScalingSpec,
    ScalingTransform,
    ValidationError,
    apply_scaling,
    compose,
    corrected_bound,
    cumulative_bound,
    dimension_bound,
    distance_matrix,
    expected_variability_uniform,
    monte_carlo_expected_bound,
    paper_bound,
    verify_stability,
)
from topostab.bounds import (
    corrected_cumulative_bound,
    cumulative_regime_contains_one,
    sample_variability,
    stability_report,
    verify_iterated,
)
from topostab.errors import BoundViolationError
from topostab.rips import PersistenceDiagram

from conftest import SQRT2, clouds, transforms

S = ScalingTransform


def test_paper_bound_examples():
    assert paper_bound(S((1, 1.019)), math.sqrt(69300)) == pytest.approx(5.0, abs=0.01)
    assert paper_bound(S((2, 2, 2)), 10) == 0
    assert paper_bound(S((1, 1.025)), 200) == pytest.approx(5, abs=1e-12)


def test_corrected_bound_examples():
    assert corrected_bound(S((3, 3)), 1) == 2
    assert corrected_bound(S((1, 1)), 7) == 0
    assert corrected_bound(S((0.9, 1.1)), 10) == pytest.approx(1, abs=1e-12)
    assert corrected_bound(S((1.2, 1.5)), 1) == pytest.approx(0.5)
    assert corrected_bound(S((0.25, 0.5)), 1) == pytest.approx(0.75)


def test_bounds_reject_bad_diameter():
    with pytest.raises(ValidationError):
        paper_bound(S((1,)), -1)
    with pytest.raises(ValidationError):
        corrected_bound(S((1,)), math.nan)


def test_paper_dominates_corrected_in_regime():
    for fs in [(0.5, 1.5), (1, 1.3), (0.7, 1), (0.9, 1.0, 1.4)]:
        t = S(fs)
        assert t.contains_one
        assert paper_bound(t, 3.0) >= corrected_bound(t, 3.0)


def test_dimension_bound_examples(unit_square):
    dm = distance_matrix(unit_square)
    assert dimension_bound(S((1, 1.1)), dm, 1) == pytest.approx(0.1 * SQRT2, abs=1e-12)
    assert dimension_bound(S((1, 1.1)), dm, 1) == pytest.approx(0.14142, abs=1e-5)
    assert dimension_bound(S((2, 2)), dm, 0) == 0
    line = distance_matrix(PointCloud([[0, 0], [1, 0], [2, 0]]))
    assert dimension_bound(S((1, 1.5)), line, 1) == 1.0
    assert dimension_bound(S((0.5, 1.5)), line, 1, corrected=True) == 1.0
    with pytest.raises(ValidationError):
        dimension_bound(S((1, 1.5)), line, 3)


def test_cumulative_bound_examples():
    ts = [S((1, 1.1)), S((1, 1.2))]
    assert cumulative_bound(ts, 1) == pytest.approx(0.32, abs=1e-15)
    assert cumulative_bound(ts, 1) == compose(ts).variability
    t = S((0.8, 1.3, 1.1))
    assert cumulative_bound([t], 4.0) == paper_bound(t, 4.0)
    assert cumulative_bound([S((1, 1)), S((1, 1))], 9) == 0
    with pytest.raises(ValidationError):
        cumulative_bound([S((1, 2)), S((1,))], 1)


def test_corrected_cumulative_bound():
    ts = [S((2, 2)), S((1.5, 1.5))]
    assert not cumulative_regime_contains_one(ts)
    assert cumulative_bound(ts, 1) == 0
    assert corrected_cumulative_bound(ts, 1) == 2


def test_expected_variability_uniform():
    assert expected_variability_uniform(1, 2, 3) == 0.5
    assert expected_variability_uniform(1.5, 1.5, 10) == 0
    assert expected_variability_uniform(1, 2, 1) == 0
    with pytest.raises(ValidationError):
        expected_variability_uniform(0, 1, 3)
    with pytest.raises(ValidationError):
        expected_variability_uniform(2, 1, 3)


def brute_expected_variability_uniform(a, b, n, grid=200_000):
    """E[max - min] by quadrature of the order-statistic densities on [0, 1]."""
    u = (np.arange(grid) + 0.5) / grid
    e_max = np.sum(u * n * u ** (n - 1)) / grid
    e_min = np.sum(u * n * (1 - u) ** (n - 1)) / grid
    return (b - a) * (e_max - e_min)


@pytest.mark.parametrize("n", [1, 2, 3, 7, 50])
def test_expected_variability_matches_quadrature(n):
    assert expected_variability_uniform(1, 2, n) == pytest.approx(brute_expected_variability_uniform(1, 2, n), abs=1e-5)


def test_monte_carlo_n50():
    spec = RandomScalingSpec("uniform", {"a": 1.0, "b": 2.0}, n=50, trials=20_000, seed=11)
    rep = monte_carlo_expected_bound(spec, 1.0)
    closed = 1 - 2 / 51
    assert closed == pytest.approx(0.9608, abs=1e-4)
    assert abs(rep.mean_variability - closed) <= 3 * rep.std_error
    assert rep.closed_form_variability == pytest.approx(closed)


def test_monte_carlo_point_mass():
    spec = RandomScalingSpec("uniform", {"a": 1.3, "b": 1.3}, n=4, trials=200, seed=0)
    rep = monte_carlo_expected_bound(spec, 50.0)
    assert rep.mean_variability == 0 and rep.expected_bound == 0 and rep.std_error == 0


def test_monte_carlo_deterministic_and_order_free():
    spec = RandomScalingSpec("truncnorm", {"mu": 1.0, "sigma": 0.2, "low": 0.5, "high": 1.5}, n=5, trials=3000, seed=4)
    a = monte_carlo_expected_bound(spec, 2.0)
    b = monte_carlo_expected_bound(spec, 2.0, workers=3)
    assert a == b
    var, _ = sample_variability(spec)
    # trial i depends only on (seed, i)
    assert var[1234] == sample_variability(RandomScalingSpec(spec.distribution, spec.params, 5, 1235, 4))[0][1234]


def test_truncnorm_respects_bounds():
    spec = RandomScalingSpec("truncnorm", {"mu": 1.0, "sigma": 1.0, "low": 0.9, "high": 1.1}, n=6, trials=10, seed=2)
    for i in range(10):
        s = spec.sample(i)
        assert s.shape == (6,) and np.all((s >= 0.9) & (s <= 1.1))


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(distribution="uniform", params={"a": 0, "b": 1}),
        dict(distribution="uniform", params={"a": 2, "b": 1}),
        dict(distribution="truncnorm", params={"mu": 1, "sigma": 1, "low": 0, "high": 2}),
        dict(distribution="cauchy", params={}),
        dict(distribution="uniform", params={"a": 1, "b": 2}, trials=0),
    ],
)
def test_random_spec_validation(kwargs):
    with pytest.raises(ValidationError):
        RandomScalingSpec(**kwargs)


def test_verify_stability_outside_regime():
    (r,) = verify_stability(PointCloud([[0, 0], [1, 0]]), S((3, 3)), [0])
    assert r.measured_bottleneck == 1.5
    assert r.bound_paper == 0 and not r.holds_paper
    assert not r.regime_contains_one
    assert r.bound_corrected == 2 and r.holds_corrected


def test_verify_stability_identity(unit_square):
    for r in verify_stability(unit_square, S((1, 1)), [0, 1], p=2):
        assert r.measured_bottleneck == 0 and r.measured_wasserstein == 0
        assert r.holds_paper and r.holds_corrected and r.holds_wasserstein_chain


def test_verify_stability_unit_square(unit_square):
    reports = verify_stability(unit_square, S((1, 1.02)), [0, 1])
    h1 = reports[1]
    assert h1.regime_contains_one
    assert h1.bound_paper == pytest.approx(0.02 * SQRT2)
    assert h1.measured_bottleneck <= 0.02 * SQRT2 + 1e-12
    assert h1.measured_bottleneck > 0


def test_report_json_fields():
    (r,) = verify_stability(PointCloud([[0, 0], [1, 0], [0, 2]]), S((1, 1.5)), [0], p=1)
    d = r.to_dict()
    for key in (
        "homology_dim",
        "measured_bottleneck",
        "measured_wasserstein",
        "bound_paper",
        "bound_corrected",
        "regime_contains_one",
        "holds_paper",
        "holds_corrected",
    ):
        assert key in d
    assert d["factors"] == [1.0, 1.5]


def test_corrected_violation_is_hard_error():
    D = PersistenceDiagram(0, [(0, 1)], [0])
    DS = PersistenceDiagram(0, [(0, 9)], [0])
    with pytest.raises(BoundViolationError):
        stability_report(D, DS, S((1, 1.1)), 1.0)


@st.composite
def cloud_transform(draw, regime=True, max_points=9):
    cloud = draw(clouds(max_points=max_points, max_dim=4, min_points=2))
    t = draw(transforms(cloud.dim, 0.3, 3.0))
    if regime:
        fs = list(t.factors)
        i = draw(st.integers(0, len(fs) - 1))
        fs[i] = 1.0
        t = S(tuple(fs))
    return cloud, t


@settings(max_examples=60, deadline=None)
@given(cloud_transform(regime=True))
def test_paper_bound_holds_in_regime(ct):
    cloud, t = ct
    for r in verify_stability(cloud, t, [0, 1]):
        assert r.measured_bottleneck <= r.bound_paper + 1e-9 * max(1, r.diameter)


@settings(max_examples=60, deadline=None)
@given(cloud_transform(regime=False))
def test_corrected_bound_always_holds(ct):
    cloud, t = ct
    for r in verify_stability(cloud, t, [0, 1], p=2):
        assert r.measured_bottleneck <= r.bound_corrected + 1e-9 * max(1, r.diameter)
        assert r.measured_bottleneck <= r.measured_wasserstein + 1e-9
        n = r.diagram_points + r.diagram_points_scaled
        assert r.measured_wasserstein <= n ** 0.5 * r.measured_bottleneck + 1e-9


@settings(max_examples=40, deadline=None)
@given(clouds(max_points=8, max_dim=3, min_points=2), st.data())
def test_iterated_bounds(cloud, data):
    ts = [data.draw(transforms(cloud.dim, 0.5, 2.0)) for _ in range(data.draw(st.integers(1, 3)))]
    reports = verify_iterated(cloud, ts, [0, 1])
    total = compose(ts)
    direct = verify_stability(cloud, total, [0, 1])
    for r, d in zip(reports, direct):
        assert r.measured_bottleneck == pytest.approx(d.measured_bottleneck, abs=1e-9)
        assert r.holds_corrected
        if cumulative_regime_contains_one(ts):
            assert r.holds_paper


@settings(max_examples=30, deadline=None)
@given(clouds(max_points=8, min_points=2), st.floats(0.2, 5))
def test_uniform_scaling_measured_equals_shift(cloud, s):
    """Uniform s != 1 moves diagrams; only the identity gives zero."""
    (h0,) = verify_stability(cloud, S.uniform(s, cloud.dim), [0])
    assume(h0.diagram_points > 1)
    dm = distance_matrix(cloud)
    assert h0.measured_bottleneck <= abs(s - 1) * dm.values.max() + 1e-9
    assert h0.bound_paper == 0


def test_identity_scaling_after_apply(unit_square):
    scaled = apply_scaling(unit_square, S((1, 1)))
    assert np.array_equal(scaled.points, unit_square.points)
