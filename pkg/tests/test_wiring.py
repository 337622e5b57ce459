import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boxwire.bell import chsh, max_chsh
from boxwire.box_model import BITS, local_box, product3
from boxwire.errors import ParseError, WiringNotNormalized
from boxwire.fixtures import load_box
from boxwire.vertices import det_local1, det_twoway
from boxwire.box_model import product_cut
from boxwire.wiring import (Wiring, _affine_basis, _map_matrix, anf_to_table, apply, canonical_wirings,
                            format_poly, format_wiring, full_wirings, parse_poly, parse_wiring,
                            relabel_orbit, table_to_anf)


def sequential_oracle(w: Wiring, b):
    """Wired box computed by conditioning: party `first` measures, then `second`.

    Uses P(a_f | x_f) and P(a_s, a_r | a_f, x) = P(a | x) / P(a_f | x_f), a
    different route from the direct sum in `apply`.
    """
    f, s, r = w.first - 1, w.second - 1, w.rest - 1
    out = {}
    for xp, xr in itertools.product(BITS, BITS):
        xf = {0: xp, 1: 1 - xp, 2: 0, 3: 1}[w.input_mode]
        for af in BITS:
            xs = w.gamma_value(af, xp)
            x = [0, 0, 0]
            x[f], x[s], x[r] = xf, xs, xr
            joint = {}
            for as_, ar, af2 in itertools.product(BITS, repeat=3):
                a = [0, 0, 0]
                a[f], a[s], a[r] = af2, as_, ar
                joint[(af2, as_, ar)] = b[(*a, *x)]
            pf = sum(v for k, v in joint.items() if k[0] == af)
            if pf == 0:
                continue
            for as_, ar in itertools.product(BITS, BITS):
                cond = joint[(af, as_, ar)] / pf
                key = (w.eta_value(af, xp, as_), ar, xp, xr)
                out[key] = out.get(key, Fraction(0)) + pf * cond
    return out


def test_canonical_family():
    ws = canonical_wirings()
    assert len(ws) == 256
    assert Wiring(eta=(0, 1, 0, 0, 0, 0, 0, 0)) in ws
    assert Wiring(eta=(0,) * 8) in ws
    assert all(w.is_canonical for w in ws)


_BASIS = _affine_basis()


def _hull_signature(w):
    return (_map_matrix(w) @ _BASIS).tobytes()


def test_full_family_size_and_coverage():
    full = full_wirings()
    # regression: 16384 = 4 * 16 * 256 candidates collapse to this many maps
    assert len(full) == 4356
    sigs = {_hull_signature(w): w for w in full}
    assert len(sigs) == len(full)
    assert all(_hull_signature(w) in sigs for w in canonical_wirings())


def test_full_family_keeps_smallest_equivalent():
    sigs = {_hull_signature(w): w for w in full_wirings()}
    merged = 0
    for gamma in itertools.product(BITS, repeat=4):
        for eta in list(itertools.product(BITS, repeat=8))[::7]:
            w = Wiring(1, gamma, eta)
            rep = sigs[_hull_signature(w)]
            assert rep.key <= w.key
            merged += rep.key != w.key
    assert merged > 0


def test_anf_round_trip():
    for coeffs in itertools.product(BITS, repeat=8):
        assert table_to_anf(anf_to_table(coeffs)) == coeffs


@pytest.mark.parametrize("text,eta", [
    ("a2", (0, 1, 0, 0, 0, 0, 0, 0)),
    ("a2+a1 a2 x1", (0, 1, 0, 0, 0, 0, 0, 1)),
    ("a_2 + a_1 a_2 x_1", (0, 1, 0, 0, 0, 0, 0, 1)),
    ("1+a2+a2", (1, 0, 0, 0, 0, 0, 0, 0)),
])
def test_parse_poly(text, eta):
    assert parse_poly(text) == eta


@pytest.mark.parametrize("text", ["a3", "a2 +", "+a1", "", "a2*a1", "x2=a1; out=a3"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_wiring(text)


def test_parse_error_position():
    with pytest.raises(ParseError) as e:
        parse_wiring("x2=a1; out=a2+a3")
    assert e.value.position == 14


def test_format_parse_round_trip():
    for w in canonical_wirings():
        assert parse_wiring(format_wiring(w)) == w
    w = Wiring(1, (1, 0, 1, 1), (1, 0, 1, 0, 0, 1, 1, 0))
    assert parse_wiring(format_wiring(w)) == w
    assert format_poly((0, 1, 0, 0, 0, 0, 0, 1), ("a1", "x1", "a2")) == "a2+a1 a2 x1"


def test_orbits():
    w = parse_wiring("a2")
    orbit = [format_wiring(o) for o in relabel_orbit(w)]
    assert "x2=a1; out=1+a2" in orbit
    assert [format_wiring(o) for o in relabel_orbit(parse_wiring("1"))] == ["x2=a1; out=1"]
    for w in canonical_wirings():
        assert 4 % len(relabel_orbit(w)) == 0
        assert w in relabel_orbit(w)


def test_product_box_wires_to_product():
    b = product3(local_box(0, 1), local_box(1, 1), local_box(1, 0))
    for w in canonical_wirings()[::17]:
        out = apply(w, b)
        for x1, x2 in itertools.product(BITS, BITS):
            for a1, a2 in itertools.product(BITS, BITS):
                assert out[a1, a2, x1, x2] == out.marginal1(a1, x1, x2) * out.marginal2(a2, x1, x2)


def test_table_boxes():
    assert chsh(apply(parse_wiring("x2=a1; out=a2"), load_box("ts2")), (0, 0, 0)) == Fraction(7, 2)
    assert max_chsh(apply(parse_wiring("a2"), load_box("pb")))[0] == 3


def test_loop_through_signaling_box_is_rejected():
    # party 2 answers x1 (reads party 1's input), party 1 answers 1 - x2:
    # feeding x2 = a1 makes the protocol inconsistent
    sig = next(v for v in det_twoway()
               if all(v[1 ^ x2, x1, x1, x2] == 1 for x1 in BITS for x2 in BITS))
    b = product_cut(det_local1()[0], sig, 3)
    with pytest.raises(WiringNotNormalized):
        apply(parse_wiring("a2"), b)


@settings(max_examples=200, deadline=None, derandomize=True, database=None)
@given(st.sampled_from(("ts2", "pb", "rtts1", "rtts2", "rnns1", "rnns2")),
       st.integers(0, 3), st.tuples(*[st.integers(0, 1)] * 4), st.tuples(*[st.integers(0, 1)] * 8),
       st.sampled_from([(1, 2), (2, 1), (1, 3), (3, 1), (2, 3), (3, 2)]))
def test_apply_matches_sequential_oracle(name, mode, gamma, eta, order):
    w = Wiring(mode, gamma, eta, *order)
    b = load_box(name)
    got = apply(w, b)
    want = sequential_oracle(w, b)
    for a1, a2, x1, x2 in itertools.product(BITS, repeat=4):
        assert got[a1, a2, x1, x2] == want.get((a1, a2, x1, x2), 0)
