import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boxwire import lp
from boxwire.errors import MalformedProblem

F = Fraction


def test_maximize_single_variable():
    p = lp.LPProblem()
    x = p.add_var("x")
    p.add_constraint({x: 1}, "<=", 3)
    p.set_objective({x: 1}, "max")
    r = lp.solve(p)
    assert (r.status, r.optimum) == ("optimal", 3)
    assert lp.check_certificate(p, r)


def test_infeasible_with_farkas_ray():
    p = lp.LPProblem()
    l1, l2 = p.add_vars(["l1", "l2"])
    p.add_constraint({l1: 1, l2: 1}, "==", 1)
    p.add_constraint({l1: 1, l2: -1}, "==", 3)
    r = lp.solve(p)
    assert r.status == "infeasible"
    assert lp.check_certificate(p, r)


def test_unbounded_with_ray():
    p = lp.LPProblem()
    x, y = p.add_vars(["x", "y"])
    p.add_constraint({x: 1, y: -1}, "<=", 1)
    p.set_objective({x: 1, y: 1}, "max")
    r = lp.solve(p)
    assert r.status == "unbounded"
    assert lp.check_certificate(p, r)


def test_free_variables_and_equalities():
    p = lp.LPProblem()
    x = p.add_var("x", free=True)
    y = p.add_var("y")
    p.add_constraint({x: 1, y: 1}, "==", F(-1, 3))
    p.add_constraint({y: 1}, "<=", 2)
    p.set_objective({x: 1}, "min")
    r = lp.solve(p)
    assert r.optimum == F(-7, 3)


def test_tampered_certificate_is_rejected():
    p = lp.LPProblem()
    x = p.add_var("x")
    p.add_constraint({x: 2}, "<=", 5)
    p.set_objective({x: 1}, "max")
    r = lp.solve(p)
    bad = lp.LPResult(r.status, r.optimum + 1, [r.x[0] + 1], r.dual)
    assert not lp.check_certificate(p, bad)
    worse = lp.LPResult(r.status, F(2), [F(2)], r.dual)
    assert not lp.check_certificate(p, worse)


def test_malformed_problems():
    p = lp.LPProblem()
    with pytest.raises(MalformedProblem):
        p.add_constraint({0: 1}, "<", 1)
    with pytest.raises(MalformedProblem):
        p.set_objective({}, "maximize")
    p.add_var("x")
    p.constraints.append(({5: F(1)}, "==", F(0)))
    with pytest.raises(MalformedProblem):
        lp.solve(p)


def test_dump_lists_named_rows():
    p = lp.LPProblem()
    x, y = p.add_vars(["x", "y"])
    p.add_constraint({x: 1, y: F(1, 2)}, "<=", 3)
    p.set_objective({x: 1}, "max")
    text = lp.dump(p)
    assert "maximize: 1 x" in text
    assert "c0: 1 x + 1/2 y <= 3" in text


def test_stats_count_every_solve():
    before = dict(lp.STATS)
    test_maximize_single_variable()
    assert lp.STATS["solves"] == before["solves"] + 1
    assert lp.STATS["verified"] == before["verified"] + 1


# ----- oracle: brute-force vertex enumeration for bounded 2-variable LPs

def _vertex_oracle(rows, c):
    """max c.x over {x >= 0, a.x <= b}; rows includes the box bounds so it is bounded."""
    lines = rows + [((1, 0), 0, "ge"), ((0, 1), 0, "ge")]
    best = None
    for (a1, b1, _), (a2, b2, _) in itertools.combinations(lines, 2):
        det = a1[0] * a2[1] - a1[1] * a2[0]
        if det == 0:
            continue
        x = F(b1 * a2[1] - b2 * a1[1], det)
        y = F(a1[0] * b2 - a2[0] * b1, det)
        if x < 0 or y < 0 or any(a[0] * x + a[1] * y > b for a, b, k in rows if k == "le"):
            continue
        v = c[0] * x + c[1] * y
        best = v if best is None or v > best else best
    return best


small = st.integers(-6, 6)


@settings(max_examples=200, deadline=None, derandomize=True, database=None)
@given(st.lists(st.tuples(small, small, st.integers(-4, 12)), min_size=1, max_size=5),
       small, small)
def test_two_variable_lps_match_vertex_enumeration(rows, c0, c1):
    cons = [((a, b), F(r), "le") for a, b, r in rows] + [((1, 0), F(10), "le"), ((0, 1), F(10), "le")]
    p = lp.LPProblem()
    x, y = p.add_vars(["x", "y"])
    for (a, b), r, _ in cons:
        p.add_constraint({x: a, y: b}, "<=", r)
    p.set_objective({x: c0, y: c1}, "max")
    expected = _vertex_oracle(cons, (c0, c1))
    for warm in (False, True):
        r = lp.solve(p, warm_start=warm)
        if expected is None:
            assert r.status == "infeasible"
        else:
            assert r.status == "optimal" and r.optimum == expected


@settings(max_examples=30, deadline=None, derandomize=True, database=None)
@given(st.lists(st.lists(st.integers(0, 5), min_size=12, max_size=12), min_size=6, max_size=6),
       st.lists(st.integers(-5, 5), min_size=12, max_size=12))
def test_warm_and_cold_paths_agree(matrix, cost):
    p = lp.LPProblem()
    xs = p.add_vars([f"x{k}" for k in range(12)])
    for row in matrix:
        p.add_constraint(dict(zip(xs, row)), "<=", sum(row) // 2 + 1)
    p.add_constraint({v: 1 for v in xs}, "==", 1)
    p.set_objective(dict(zip(xs, cost)), "min")
    cold, warm = lp.solve(p, warm_start=False), lp.solve(p, warm_start=True)
    assert cold.status == warm.status
    assert cold.optimum == warm.optimum
