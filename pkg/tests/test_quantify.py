import random
from fractions import Fraction

import pytest

from boxwire.bell import CHSH_INDICES, chsh
from boxwire.box_model import local_box, product3, product_cut
from boxwire.classes import ClassSpec, Cut, member_class
from boxwire.errors import InvalidSpec, NotFullyBilocal
from boxwire.fixtures import load_box
from boxwire.quantify import (cost3_exact, cost_lower_bound, mwn_box, mwn_class, parse_direction,
                              robustness3_exact, robustness_lower_bound, signal_weight_bound,
                              wired_objective, wn_class, wn_table)
from boxwire.vertices import det_local1, vertex_B
from boxwire.wiring import apply, canonical_wirings, full_wirings, parse_wiring

F = Fraction


def test_parse_direction():
    assert parse_direction("1to2") == (1, 2)
    assert parse_direction("3->1") == (3, 1)
    for bad in ("1to1", "12", "4to2"):
        with pytest.raises(ValueError):
            parse_direction(bad)


def test_wired_objective_matches_chsh():
    b = load_box("rtts2")
    for w in canonical_wirings()[::31]:
        coeffs = wired_objective(w)
        assert sum(c * v for c, v in zip(coeffs, b.entries)) == chsh(apply(w, b), (0, 0, 0))


@pytest.mark.parametrize("spec,wiring,value", [
    ("TTS", "x2=a1; out=a2", F(3)),
    ("TTS", "a2+a1 a2 x1", F(38, 13)),
    ("NNS", "a2+a1 a2 x1", F(14, 5)),
    ("NSS", "a2+a1 x1", F(4)),
])
def test_wn_class_examples(spec, wiring, value):
    rec = wn_class(spec, w=parse_wiring(wiring), recheck=True)
    assert rec.optimum == value and rec.wn == value
    assert member_class(rec.witness, ClassSpec(spec)).member
    assert chsh(apply(rec.wiring, rec.witness), (0, 0, 0)) == value


def test_wn_clipped_to_zero_without_violation():
    rec = wn_class("NNN", w=parse_wiring("a2"))
    assert rec.optimum <= 2 and rec.wn == 0
    rec = wn_class("TTS", w=parse_wiring("a1"))
    assert rec.wn == (rec.optimum if rec.optimum > 2 else 0)


@pytest.mark.slow
def test_mwn_class_spot_checks_full_wirings():
    spec = "TTS"
    best, w = mwn_class(spec)
    table = wn_table(spec)
    assert best == 3 and max(table.values()) == best
    # ties go to the lexicographically smallest eta
    assert w.eta == min(e for e, v in table.items() if v == best)
    assert table[parse_wiring("a2").eta] == 3
    rng = random.Random(5)
    full = full_wirings()
    for w in rng.sample(full, 16):
        assert wn_class(spec, w=w).optimum <= best


def test_mwn_box_examples():
    m = mwn_box(load_box("pb"), 1, 2)
    assert m.value == 3 and m.wiring == parse_wiring("a2") and m.violation
    prod = product3(local_box(0, 1), local_box(1, 0), local_box(1, 1))
    m = mwn_box(prod, 1, 2)
    assert m.value <= 2 and not m.violation
    m = mwn_box(load_box("rtts2"), 1, 2)
    assert m.value == F(38, 13)
    assert chsh(apply(m.wiring, load_box("rtts2")), m.index) == F(38, 13)
    assert chsh(apply(parse_wiring("a2+a1 a2 x1"), load_box("rtts2")), (0, 0, 0)) == F(38, 13)


@pytest.mark.slow
def test_mwn_box_matches_direct_enumeration():
    b = load_box("rnns2")
    best = max(chsh(apply(w, b), idx) for w in full_wirings(2, 1) for idx in CHSH_INDICES)
    assert mwn_box(b, 2, 1).value == best


def test_signal_weight_bound_examples():
    rec = signal_weight_bound(load_box("pb"), Cut(3), "1to2")
    assert rec.value == 3 and rec.witness["signaling_weight"] == F(1, 2)
    nsbl = product_cut(det_local1()[1], vertex_B(0, 0, 0), 3)
    assert signal_weight_bound(nsbl, Cut(3), "1to2").value == 2
    assert signal_weight_bound(load_box("rtts2"), Cut(3), "1to2").value == F(50, 13)
    with pytest.raises(NotFullyBilocal):
        signal_weight_bound(load_box("ts2"), Cut(3), "1to2")
    with pytest.raises(ValueError):
        signal_weight_bound(load_box("pb"), Cut(3), "1to3")


@pytest.mark.parametrize("name,spec,cost,rob", [
    ("rtts1", "TTT", F(1, 2), F(1, 7)),
    ("rtts2", "TTT", F(6, 13), F(2, 15)),
    ("rnns2", "NNN", F(2, 5), F(2, 17)),
])
def test_lower_bounds(name, spec, cost, rob):
    b = load_box(name)
    c = cost_lower_bound(b, spec, name)
    r = robustness_lower_bound(b, spec, name)
    assert (c.value, r.value) == (cost, rob)
    assert c.box_id == name and c.kind == "cost-lower"


def test_bounds_need_a_monotone_cut():
    with pytest.raises(InvalidSpec):
        cost_lower_bound(load_box("pb"), "SSS")
    with pytest.raises(InvalidSpec):
        cost3_exact(load_box("pb"), "SSS")


def test_exact_monotones_vanish_on_members():
    prod = product3(local_box(0, 1), local_box(1, 0), local_box(1, 1))
    assert cost3_exact(prod, "NNN") == 0
    assert robustness3_exact(prod, "NNN") == 0
    b = load_box("rtts1")
    assert cost3_exact(b, "TTS") == 0 and robustness3_exact(b, "TTS") == 0


def test_exact_monotones_on_representative():
    b = load_box("rtts1")
    assert cost3_exact(b, "TTT") == F(1, 2)
    assert robustness3_exact(b, "TTT") == F(1, 7)


# regression values, frozen from the first exact run; permuting the parties
# moves the binding cut so the three specs differ
CHAIN = [
    ("pb", (2, 1, 0), ("0", "1/2", "1/2"), ("0", "1/7", "1/7")),
    ("ts2", (0, 2, 1), ("85653/135743", "359487/542972", "3/4"),
     ("279535/1908451", "279535/1908451", "1/5")),
    ("rtts2", (0, 2, 1), ("0", "0", "7/13"), ("0", "0", "2/15")),
]


@pytest.mark.slow
@pytest.mark.parametrize("name,order,costs,robs", CHAIN)
def test_monotones_ordered_by_inclusion(name, order, costs, robs):
    b = load_box(name).permute(order)
    c = [cost3_exact(b, s) for s in ("SST", "TST", "TTT")]
    r = [robustness3_exact(b, s) for s in ("SST", "TST", "TTT")]
    assert c[0] <= c[1] <= c[2] and r[0] <= r[1] <= r[2]
    assert tuple(map(str, c)) == costs and tuple(map(str, r)) == robs
