import math

import numpy as np
import pytest

from cat2d.errors import InputError
from cat2d.fillrad import (FiniteMetric, circle_metric, cycle_death, cycle_death_scale, degeneracy_audit,
                           filling_radius_estimate, fundamental_cycle, kuratowski_filling_radius)
from cat2d.jordan import JordanPolygon, rectangle, regular_polygon
from oracles import rips_cycle_death


def euclid(P):
    P = np.asarray(P, float)
    return FiniteMetric(np.hypot(*(P[:, None] - P[None]).transpose(2, 0, 1)))


def test_three_points():
    m = FiniteMetric(np.ones((3, 3)) - np.eye(3))
    assert cycle_death_scale(m, fundamental_cycle(3)) == 1.0


def test_square_corners():
    m = euclid([(0, 0), (1, 0), (1, 1), (0, 1)])
    assert cycle_death_scale(m, fundamental_cycle(4)) == pytest.approx(math.sqrt(2))
    assert filling_radius_estimate(m) == pytest.approx(math.sqrt(2) / 2)


@pytest.mark.parametrize("n", [5, 8, 12])
def test_circle_against_rank_oracle(n):
    m = circle_metric(n)
    want = rips_cycle_death(m.d, fundamental_cycle(n))
    assert cycle_death_scale(m, fundamental_cycle(n)) == want
    if n == 12:
        assert abs(want - 2 * math.pi / 3) <= 2 * math.pi / n + 1e-12


def test_random_metrics_against_rank_oracle():
    rng = np.random.default_rng(7)
    for _ in range(5):
        n = 9
        t = np.sort(rng.uniform(0, 2 * math.pi, n))
        r = rng.uniform(0.6, 1.4, n)
        m = euclid(np.stack([r * np.cos(t), r * np.sin(t)], 1))
        assert cycle_death_scale(m, fundamental_cycle(n)) == rips_cycle_death(m.d, fundamental_cycle(n))


def test_certificate_chain_bounds_cycle():
    m = circle_metric(20)
    z = fundamental_cycle(20)
    cert = cycle_death(m, z)
    par = {}
    for a, b, c in cert.chain:
        for e in ((a, b), (b, c), (a, c)):
            e = (min(e), max(e))
            par[e] = par.get(e, 0) ^ 1
    got = {e for e, v in par.items() if v}
    assert got == {(min(e), max(e)) for e in z}
    assert all(max(m.d[a, b], m.d[b, c], m.d[a, c]) <= cert.scale for a, b, c in cert.chain)
    assert cert.previous_scale < cert.scale


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7, 8])
def test_estimator_matches_kuratowski_oracle(n):
    m = circle_metric(n)
    assert abs(filling_radius_estimate(m) - kuratowski_filling_radius(m)) <= 2 * math.pi / n


def test_scaling_is_exact():
    m = circle_metric(40)
    assert filling_radius_estimate(m.scaled(3.5)) == 3.5 * filling_radius_estimate(m)


def test_monotone_under_metric_decrease():
    rng = np.random.default_rng(2)
    P = rng.normal(size=(14, 2))
    order = np.argsort(np.arctan2(P[:, 1], P[:, 0]))
    m = euclid(P[order])
    z = fundamental_cycle(14)
    r = cycle_death_scale(m, z)
    for c in (2.0, 1.5, 1.0):
        # truncation min(d, c) is again a metric and is pointwise smaller
        mc = FiniteMetric(np.minimum(m.d, c))
        assert cycle_death_scale(mc, z) <= r + 1e-15


def test_stability_under_perturbation():
    rng = np.random.default_rng(3)
    n = 30
    t = np.arange(n) * 2 * math.pi / n
    P = np.stack([np.cos(t), np.sin(t)], 1)
    r = cycle_death_scale(euclid(P), fundamental_cycle(n))
    for eta in (0.01, 0.05):
        Q = P + rng.uniform(-1, 1, P.shape) * eta / (2 * math.sqrt(2))
        r2 = cycle_death_scale(euclid(Q), fundamental_cycle(n))
        assert abs(r2 - r) <= 2 * eta


def test_subsample_degree_one():
    full = circle_metric(60)
    sub = circle_metric(30)  # the even points of the same circle
    mesh = 2 * math.pi / 60
    assert filling_radius_estimate(sub) <= filling_radius_estimate(full) + mesh + 1e-12


def test_malformed_matrix():
    with pytest.raises(InputError):
        FiniteMetric.from_csv("3\n0,1\n1,0\n")
    with pytest.raises(InputError):
        FiniteMetric.from_csv("2\n0,1\n2,0\n")
    with pytest.raises(InputError):
        FiniteMetric.from_csv("3\n0,1,5\n1,0,1\n5,1,0\n")
    m = circle_metric(5)
    assert np.array_equal(FiniteMetric.from_csv(m.to_csv()).d, m.d)


def test_audit_thin_rectangle():
    rep = degeneracy_audit(JordanPolygon(rectangle(1, 0.01)), 0.25)
    assert rep.degenerate and rep.passed
    assert rep.density_margin > 0 and rep.fillrad_margin > 0 and rep.degeneracy_margin > 0


def test_audit_non_degenerate():
    rep = degeneracy_audit(JordanPolygon(rectangle(1, 1)), 0.1)
    assert not rep.degenerate and rep.density is None
    g = JordanPolygon(regular_polygon(64))
    delta = 0.99 * g.diameter / (2 * g.length)
    assert not degeneracy_audit(g, delta).degenerate
