import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from powerline_hough.filters import (VERTICAL, FilterParams, NotParallelError, gap_variance,
                                     parallel_distance, slope_mode_filter, slope_of,
                                     spacing_variance_filter)
from powerline_hough.hough import PolarLine


def deg(theta_deg, rho, votes=10):
    return PolarLine(math.radians(theta_deg), rho, votes)


def horizontal(rhos, votes=10):
    return [deg(90.0, r, votes) for r in rhos]


def cartesian_distance(l1, l2):
    """Distance between A x + B y + C = 0 forms, both lines written with the first one's normal."""
    a, b = math.cos(l1.theta), math.sin(l1.theta)
    c1 = -l1.rho
    # second line through its foot point, rewritten with normal (a, b)
    x0, y0 = l2.rho * math.cos(l2.theta), l2.rho * math.sin(l2.theta)
    c2 = -(a * x0 + b * y0)
    return abs(c1 - c2) / math.sqrt(a * a + b * b)


# slope_of

def test_slope_diagonal():
    assert slope_of((0, 0), (1, 1)) == 1


def test_slope_flat():
    assert slope_of((0, 0), (2, 0)) == 0


def test_slope_vertical():
    assert slope_of((2, 0), (2, 5)) is VERTICAL


def test_slope_identical_points():
    with pytest.raises(ValueError):
        slope_of((3, 4), (3, 4))


@given(st.floats(1.0, 179.0), st.floats(-50, 50))
def test_slope_matches_theta(theta_deg, rho):
    theta = math.radians(theta_deg)
    c, s = math.cos(theta), math.sin(theta)
    p1 = (rho * c - 10 * s, rho * s + 10 * c)
    p2 = (rho * c + 25 * s, rho * s - 25 * c)
    assert slope_of(p1, p2) == pytest.approx(-1 / math.tan(theta), rel=1e-6, abs=1e-9)


# parallel_distance

def test_distance_horizontal_pair():
    assert parallel_distance(deg(90, 0), deg(90, 5)) == pytest.approx(5)


def test_distance_identical():
    assert parallel_distance(deg(30, 12), deg(30, 12)) == 0


def test_distance_diagonal():
    # x + y = 0 and x + y = 2
    d = parallel_distance(deg(45, 0), deg(45, math.sqrt(2)))
    assert d == pytest.approx(math.sqrt(2), abs=1e-12)
    assert d == pytest.approx(2 / math.sqrt(2), abs=1e-12)


def test_distance_across_wrap():
    a = PolarLine(math.radians(0.2), 10.0)
    b = PolarLine(math.radians(179.9), -14.0)
    assert parallel_distance(a, b) == pytest.approx(4.0)


def test_distance_not_parallel():
    with pytest.raises(NotParallelError):
        parallel_distance(deg(10, 0), deg(30, 0))


@given(st.floats(0, 179.99), st.floats(-400, 400), st.floats(-400, 400), st.booleans())
def test_distance_symmetric_and_cartesian(theta_deg, r1, r2, flip):
    l1 = deg(theta_deg, r1)
    l2 = deg(theta_deg, r2)
    if flip and theta_deg > 0:
        l2 = PolarLine(l2.theta + math.pi if l2.theta < math.pi / 2 else l2.theta - math.pi, -r2)
        l2 = PolarLine(l2.theta % math.pi, l2.rho)
    d = parallel_distance(l1, l2)
    assert d == parallel_distance(l2, l1) or math.isclose(d, parallel_distance(l2, l1), abs_tol=1e-9)
    assert d == pytest.approx(cartesian_distance(l1, l2), abs=1e-9)


# slope_mode_filter

def test_slope_mode_keeps_majority():
    near = [deg(45 + d, 10 * k) for k, d in enumerate((-0.2, 0.0, 0.1, 0.2))]
    out = slope_mode_filter(near + [deg(120, 5)])
    assert out == near


def test_slope_mode_identical():
    lines = [deg(70, r) for r in (1, 2, 3)]
    assert slope_mode_filter(lines) == lines


def test_slope_mode_empty():
    assert slope_mode_filter([]) == []


def test_slope_mode_wraps():
    lines = [deg(0.3, 5), deg(179.6, -9), deg(179.2, -20), deg(90, 3)]
    assert slope_mode_filter(lines) == lines[:3]


def test_slope_mode_tie_to_votes_then_index():
    a, b = deg(20, 0, 5), deg(60, 0, 9)
    assert slope_mode_filter([a, b]) == [b]
    c, d = deg(20, 0, 5), deg(60, 0, 5)
    assert slope_mode_filter([c, d]) == [c]


angles = st.lists(st.tuples(st.floats(0, 179.999), st.floats(-300, 300), st.integers(1, 200)),
                  max_size=12)


@given(angles, st.integers(1, 7))
def test_slope_mode_properties(items, scale):
    lines = [deg(t, r, v) for t, r, v in items]
    out = slope_mode_filter(lines)
    assert all(l in lines for l in out)
    assert slope_mode_filter(out) == out
    scaled = [PolarLine(l.theta, l.rho, l.votes * scale) for l in lines]
    assert [(l.theta, l.rho) for l in slope_mode_filter(scaled)] == [(l.theta, l.rho) for l in out]


# spacing_variance_filter

def test_spacing_uniform_kept():
    lines = horizontal([10, 22, 34, 46])
    assert spacing_variance_filter(lines) == lines


def test_spacing_drops_intruder():
    lines = horizontal([10, 22, 34, 46])
    intruder = deg(90, 39)
    assert gap_variance([10, 22, 34, 39, 46]) > 0.01
    assert gap_variance([10, 22, 34, 46]) == 0
    out = spacing_variance_filter(lines + [intruder])
    assert out == lines


def test_spacing_two_lines_unchanged():
    lines = horizontal([30, 10])
    assert spacing_variance_filter(lines) == lines[::-1]
    assert spacing_variance_filter(lines[:1]) == lines[:1]


def test_spacing_returns_rho_order():
    lines = horizontal([46, 10, 34, 22])
    assert [l.rho for l in spacing_variance_filter(lines)] == [10, 22, 34, 46]


def test_spacing_raw_normalization():
    lines = horizontal([10, 22, 34, 47])
    assert len(spacing_variance_filter(lines)) == 4
    raw = FilterParams(spacing_normalization="none")
    # raw gaps 12, 12, 13 have variance 2/9 >= 0.01
    assert len(spacing_variance_filter(lines, raw)) < 4


def test_gap_variance_values():
    assert gap_variance([0, 10, 30]) == pytest.approx(np.var([10 / 15, 20 / 15]))
    assert gap_variance([0, 10, 30], "none") == pytest.approx(25.0)
    assert gap_variance([5]) == 0.0


def test_filter_params_validation():
    with pytest.raises(ValueError):
        FilterParams(angle_bin=0)
    with pytest.raises(ValueError):
        FilterParams(spacing_variance_threshold=0)
    with pytest.raises(ValueError):
        FilterParams(spacing_normalization="by-max")


def best_subset_size(rhos, threshold):
    """Largest subset whose gap variance is below the threshold (or of size <= 2)."""
    for size in range(len(rhos), 2, -1):
        if any(gap_variance(c) < threshold for c in itertools.combinations(rhos, size)):
            return size
    return min(len(rhos), 2)


@given(st.integers(5, 40), st.integers(3, 10), st.floats(-200, 200),
       st.floats(0.1, 0.9), st.integers(0, 100))
def test_spacing_matches_exhaustive_with_one_intruder(gap, n, start, frac, slot):
    rhos = [start + k * gap for k in range(n)]
    intruders = [start + gap * (slot % (n - 1) + frac)]
    lines = horizontal(rhos + intruders)
    out = spacing_variance_filter(lines)
    assert [l.rho for l in out] == rhos
    assert len(out) == best_subset_size(rhos + intruders, 0.01)


@given(st.lists(st.floats(-300, 300), min_size=0, max_size=9, unique=True), st.integers(1, 5))
def test_spacing_properties(rhos, scale):
    lines = horizontal(rhos)
    out = spacing_variance_filter(lines)
    assert all(l in lines for l in out)
    kept = [l.rho for l in out]
    assert kept == sorted(kept)
    if len(lines) >= 2:
        assert gap_variance(kept) <= gap_variance(rhos) + 1e-12
        assert gap_variance(kept) < 0.01 or len(out) <= 2
        assert len(out) <= best_subset_size(rhos, 0.01)
    scaled = [PolarLine(l.theta, l.rho, l.votes * scale) for l in lines]
    assert [l.rho for l in spacing_variance_filter(scaled)] == kept
