import math

import numpy as np
import pytest

from cat2d.errors import BudgetExceeded, InvalidPolygon, PerimeterTooLarge, PreconditionError
from cat2d.jordan import (JordanPolygon, cut_is_valid_exact, delta_theory, essential_2fold_cut,
                          essential_2fold_nondegenerate, essential_cut_degenerate, find_long_cut,
                          interior, iterated_cut, make_cut, rectangle, regular_polygon, split_curve,
                          zigzag_strip)
from oracles import longest_chord

SQUARE = rectangle(1, 1)
L_DOM = [(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)]


def test_figure_eight_rejected():
    with pytest.raises(InvalidPolygon):
        JordanPolygon([(0, 0), (1, 1), (1, 0), (0, 1)])


def test_interior_is_the_closed_region():
    dom = interior(JordanPolygon(SQUARE))
    assert dom.contains_many(np.array([[0.5, 0.5], [1.5, 0.5]])).tolist() == [True, False]


def test_find_long_cut_square():
    g = JordanPolygon(SQUARE)
    c = find_long_cut(g, 0.01)
    assert c.length >= 1
    assert c.length == pytest.approx(longest_chord(SQUARE.tolist(), 100))
    assert cut_is_valid_exact(g, c)


def test_find_long_cut_thin_rectangle():
    g = JordanPolygon(rectangle(1, 0.01))
    want = longest_chord(rectangle(1, 0.01).tolist(), 200)
    # the corner-to-corner diagonal is a cut; nothing longer exists
    c = find_long_cut(g, 0.5)
    assert c.length == pytest.approx(want, abs=1e-12)
    assert find_long_cut(g, want + 1e-6) is None


def test_find_long_cut_16gon():
    g = JordanPolygon(regular_polygon(16))
    c = find_long_cut(g, 0.9 * g.diameter)
    assert c.length >= 0.9 * g.diameter
    assert c.length == pytest.approx(longest_chord(regular_polygon(16).tolist(), 64), abs=1e-9)


def test_threshold_must_be_positive():
    with pytest.raises(PreconditionError):
        find_long_cut(JordanPolygon(SQUARE), 0.0)


def test_split_is_additive():
    g = JordanPolygon([(0, 0), (4, 0), (4, 3), (2.5, 1.2), (1.5, 3.2), (0, 2.5), (1, 1.5)])
    c = find_long_cut(g, 1.0)
    A, B = split_curve(g, c)
    assert A.length + B.length == pytest.approx(g.length + 2 * c.length, abs=1e-12)
    assert A.area + B.area == pytest.approx(g.area, abs=1e-12)


def test_nondegenerate_square_diagonal():
    g = JordanPolygon(SQUARE)
    c = make_cut(g, 0.0, 2.0)  # (0,0) to (1,1)
    tf = essential_2fold_nondegenerate(g, c, delta_theory(math.sqrt(2)))
    lens = sorted(tf.piece_lengths())
    assert lens == pytest.approx([1 + math.sqrt(2)] * 4, abs=1e-12)
    hits = sorted(tuple(np.round(cc.p0 if cc.p0 != (0.5, 0.5) else cc.p1, 12)) for cc in tf.child_cuts)
    assert hits == [(0.0, 1.0), (1.0, 0.0)]
    assert max(lens) <= (1 - tf.delta_guaranteed) * 4


def test_nondegenerate_equilateral():
    V = [(0, 0), (1, 0), (0.5, math.sqrt(3) / 2)]
    g = JordanPolygon(V)
    c = make_cut(g, 0.5, 2.0)  # foot of an altitude to the opposite vertex
    tf = essential_2fold_nondegenerate(g, c)
    assert all(p < g.length for p in tf.piece_lengths())


def test_zero_length_cut_rejected():
    g = JordanPolygon(SQUARE)
    c = make_cut(g, 1.0, 1.0)
    with pytest.raises(PreconditionError):
        essential_2fold_nondegenerate(g, c)


def test_degenerate_rectangle_vertical_chord():
    g = JordanPolygon(rectangle(1, 0.01))
    c, rep = essential_cut_degenerate(g, 0.25)
    a, b = np.array(c.p0), np.array(c.p1)
    # crosses the strip from the bottom side to the top side near the middle
    assert {a[1], b[1]} == {0.0, 0.01}
    assert abs(0.5 * (a[0] + b[0]) - 0.5) < 0.1 and c.length < 0.1
    assert max(c.pieces(g)) <= 0.75 * g.length
    assert max(c.pieces(g)) == pytest.approx(g.length / 2 + 0.01, abs=0.1)
    assert rep["close_pair_within_bound"]


def test_degenerate_rejects_square():
    with pytest.raises(PreconditionError):
        essential_cut_degenerate(JordanPolygon(SQUARE), 0.01)


def test_degenerate_zigzag():
    g = JordanPolygon(zigzag_strip(20))
    d = delta_theory(g.diameter)
    # the strip is degenerate for the audit factor used in the pipeline
    dz = 0.015
    c, rep = essential_cut_degenerate(g, dz)
    assert max(c.pieces(g)) <= (1 - dz) * g.length <= (1 - d) * g.length
    assert cut_is_valid_exact(g, c)


def test_essential_2fold_square():
    g = JordanPolygon(SQUARE)
    tf = essential_2fold_cut(g, math.sqrt(2))
    assert tf.branch == "nondegenerate"
    assert tf.delta_achieved >= 0.14
    assert tf.reports["theory_certificate"]


@pytest.mark.parametrize("verts,delta", [(rectangle(1, 0.01), 0.25), (zigzag_strip(20), 0.015)])
def test_degenerate_branch_twice(verts, delta):
    g = JordanPolygon(verts)
    tf = essential_2fold_cut(g, g.diameter / 4, delta=delta)
    assert tf.branch == "degenerate"
    assert "arbitrary" not in tf.reports["A"] and "arbitrary" not in tf.reports["B"]
    assert max(tf.piece_lengths()) <= (1 - delta) * g.length
    assert tf.reports["theory_certificate"]


def test_essential_2fold_diameter_floor():
    with pytest.raises(PreconditionError):
        essential_2fold_cut(JordanPolygon(SQUARE), 2.0)


def test_iterated_cut_square():
    g = JordanPolygon(SQUARE)
    tree = iterated_cut(g, 0.5)
    assert all(n.curve.diameter <= 0.5 for n in tree.leaves())
    assert tree.depth() <= 6
    ck = tree.checks
    assert all(ck[k] for k in ("length_additivity", "strict_decrease", "area_partition",
                               "delta_certificates", "level_bound", "neighborhood"))


def test_iterated_cut_l_domain():
    g = JordanPolygon(L_DOM)
    eps = 0.25 * g.diameter
    tree = iterated_cut(g, eps)
    assert all(n.curve.diameter <= eps for n in tree.leaves())
    assert tree.checks["neighborhood"] and tree.checks["area_partition"]
    assert sum(n.curve.area for n in tree.leaves()) == pytest.approx(g.area, abs=1e-9)


def test_small_curve_single_frozen_leaf():
    tree = iterated_cut(JordanPolygon(SQUARE), 2.0)
    assert len(tree.nodes) == 1 and tree.nodes[0].frozen


def test_budget_exceeded_keeps_partial_tree():
    with pytest.raises(BudgetExceeded) as info:
        iterated_cut(JordanPolygon(SQUARE), 0.05, leaf_budget=8)
    assert info.value.partial.partial
    assert len(info.value.partial.leaves()) <= 8


def test_spherical_perimeter_bound():
    with pytest.raises(PerimeterTooLarge):
        JordanPolygon(regular_polygon(6, 1.5), kappa=1.0)
    g = JordanPolygon(regular_polygon(6, 0.5), kappa=1.0)
    tf = essential_2fold_cut(g, g.diameter / 2)
    assert tf.delta_guaranteed <= tf.delta_used


def test_jobs_do_not_change_the_tree():
    g = JordanPolygon(L_DOM)
    a = iterated_cut(g, 0.5).to_json()
    b = iterated_cut(g, 0.5, jobs=4).to_json()
    assert a == b
