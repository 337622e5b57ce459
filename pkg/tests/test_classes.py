from fractions import Fraction

import pytest

from boxwire import lp
from boxwire.box_model import Box3, local_box, marginal, mix3, product3, product_cut
from boxwire.classes import (CUTS, ClassSpec, Cut, add_class_blocks, bipartite_local,
                             member_class, member_NSBL, member_S, member_svetlichny, member_T2,
                             member_TOBL)
from boxwire.errors import InvalidSpec, NotNonsignaling
from boxwire.fixtures import load_box
from boxwire.vertices import det_local1, det_twoway, vertex_B

F = Fraction

PR = vertex_B(0, 0, 0)
PR12_DET3 = product_cut(det_local1()[1], PR, 3)
# B000 between parties 1 and 3, party 2 deterministic
PR13_DET2 = product_cut(det_local1()[2], PR, 2)
SVETLICHNY_BOX = Box3.from_function(
    lambda a, x: F(1, 4) if a[0] ^ a[1] ^ a[2] == (x[0] & x[1]) ^ (x[1] & x[2]) ^ (x[0] & x[2]) else 0)


def test_cut_and_spec_parsing():
    assert str(Cut.parse("3:12")) == "3:12"
    assert Cut.parse("1:23").pair == (2, 3)
    with pytest.raises(ValueError):
        Cut.parse("12:3")
    assert ClassSpec.parse("tts").letters == "TTS"
    assert [str(c) for c in ClassSpec.parse("TTS").monotone_cuts] == ["1:23", "2:13"]
    for bad in ("TT", "TTX", "TTTT"):
        with pytest.raises(InvalidSpec):
            ClassSpec.parse(bad)


def test_fully_bilocal_examples():
    assert member_S(load_box("pb"), Cut(3)).member
    ghz_like = mix3([F(1, 2), F(1, 2)], [PR12_DET3, product_cut(det_local1()[2], PR, 3)])
    assert member_S(ghz_like, Cut(3)).member


def test_pr_across_the_cut_is_not_fully_bilocal():
    # LP route
    assert not member_S(PR13_DET2, Cut(3)).member
    # independent route: tracing party 1 of the pair must leave a local box
    traced = marginal(PR13_DET2, 2, 0)
    assert not bipartite_local(traced).member


def test_nsbl_examples():
    prod = product3(local_box(0, 1), local_box(1, 1), local_box(1, 0))
    assert all(member_NSBL(prod, c).member for c in CUTS)
    assert member_NSBL(PR12_DET3, Cut(3)).member
    assert not member_NSBL(PR12_DET3, Cut(1)).member
    assert not bipartite_local(marginal(PR12_DET3, 3, 0)).member


def test_tobl_examples():
    assert member_TOBL(PR12_DET3, Cut(3)).member
    assert not member_TOBL(load_box("ts2"), Cut(3)).member
    b = load_box("rtts1")
    assert member_TOBL(b, Cut(1)).member and member_TOBL(b, Cut(2)).member


@pytest.mark.slow
@pytest.mark.parametrize("name,cut,expected", [("ts2", 3, False), ("rtts1", 1, True)])
def test_tobl_pair_measures_match_triples(name, cut, expected):
    b = load_box(name)
    assert member_TOBL(b, Cut(cut)).member is expected
    assert member_TOBL(b, Cut(cut), triples=True).member is expected


def test_t2_and_svetlichny():
    ts2 = load_box("ts2")
    m = member_T2(ts2)
    assert m.member and m.decomposition.reconstruct() == ts2
    assert member_T2(load_box("rtts1")).member
    assert member_svetlichny(ts2).member
    assert not member_T2(SVETLICHNY_BOX).member
    assert not member_svetlichny(SVETLICHNY_BOX).member


@pytest.mark.parametrize("name,spec", [("rtts1", "TTS"), ("rtts2", "TTS"), ("rnns1", "NNS"),
                                       ("rnns2", "NNS"), ("pb", "SSS")])
def test_representatives_are_class_members(name, spec):
    b = load_box(name)
    rep = member_class(b, ClassSpec(spec))
    assert rep.member
    for _, _, m in rep.cuts:
        assert m.decomposition.reconstruct() == b


def test_pb_is_not_tobl():
    b = load_box("pb")
    assert not member_TOBL(b, Cut(3)).member
    assert not member_NSBL(b, Cut(3)).member


def test_decomposition_lines():
    m = member_NSBL(PR12_DET3, Cut(3))
    lines = m.decomposition.lines()
    assert lines and all(line.startswith("weight ") for line in lines)
    assert sum(w for w, _, _ in m.decomposition.terms) == 1


def test_signaling_inputs_rejected():
    sig = next(v for v in det_twoway() if v.signaling_direction == "both")
    b = product_cut(det_local1()[0], sig, 3)
    with pytest.raises(NotNonsignaling):
        member_S(b, Cut(3))


def _block_feasible(b, spec):
    p = lp.LPProblem()
    add_class_blocks(p, ClassSpec(spec), target=[({}, v) for v in b.entries])
    return lp.solve(p).status == "optimal"


@pytest.mark.parametrize("name,spec", [("rtts1", "TTS"), ("ts2", "TTS"), ("rnns2", "NNS"),
                                       ("rtts2", "NNS"), ("pb", "SSS"), ("pb", "TTT")])
def test_block_form_agrees_with_column_oracles(name, spec):
    b = load_box(name)
    assert _block_feasible(b, spec) == member_class(b, ClassSpec(spec)).member
