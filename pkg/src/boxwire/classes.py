"""Membership oracles for the locality classes, with decomposition certificates.

Two encodings are used.

*Column form* (``member_*``): the box is written as a convex combination of
product strategies drawn from the families in :mod:`boxwire.vertices`. The
solution gives a :class:`Decomposition` directly.

*Block form* (:func:`add_class_blocks`): used inside optimisation LPs where
the box itself is a variable. For a cut isolating party k, the isolated party
is split over its 4 deterministic strategies d and each d carries a
sub-normalised pair box M_d (equal mass on every pair input), so that
``P(a|x) = sum_d [a_k = f_d(x_k)] M_d(a_i a_j | x_i x_j)``. Letter S leaves
M_d otherwise free, N adds both no-signalling constraints, and T keeps two
boxes per d, one signalling only i->j and one only j->i, with equal mass.
The shared mass per d is what ties the two time orderings to the same
hidden-variable weights.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional

from . import lp
from .box_model import BITS, ZERO, Box2, Box3, check_nonsignaling, idx3, product_cut
from .errors import InvalidSpec, NotNonsignaling, SignalingInput
from .vertices import det_local1, det_local2, det_oneway, det_twoway, f1, ns2_vertices

ONE = Fraction(1)


# ---------------------------------------------------------------- cuts/specs

@dataclass(frozen=True, order=True)
class Cut:
    """Bipartition isolating one party (1-based)."""

    isolated: int

    def __post_init__(self):
        if self.isolated not in (1, 2, 3):
            raise ValueError("cut must isolate party 1, 2 or 3")

    @property
    def pair(self) -> tuple:
        return tuple(q for q in (1, 2, 3) if q != self.isolated)

    @classmethod
    def parse(cls, text: str) -> "Cut":
        t = text.strip()
        table = {"1:23": 1, "2:13": 2, "3:12": 3}
        if t not in table:
            raise ValueError(f"cut must be one of {', '.join(table)}, not {text!r}")
        return cls(table[t])

    def __str__(self):
        i, j = self.pair
        return f"{self.isolated}:{i}{j}"


CUTS = (Cut(1), Cut(2), Cut(3))


@dataclass(frozen=True)
class ClassSpec:
    """Letters for cuts 1:23, 2:13, 3:12, each N, T or S."""

    letters: str

    def __post_init__(self):
        if len(self.letters) != 3 or set(self.letters) - set("NTS"):
            raise InvalidSpec(f"class must be three letters from N, T, S, not {self.letters!r}")

    @classmethod
    def parse(cls, text: str) -> "ClassSpec":
        return cls(text.strip().upper())

    def letter(self, cut: Cut) -> str:
        return self.letters[cut.isolated - 1]

    @property
    def monotone_cuts(self) -> tuple:
        """Cuts whose letter is N or T."""
        return tuple(c for c in CUTS if self.letter(c) in "NT")

    def __str__(self):
        return self.letters


# ------------------------------------------------------------ decompositions

@dataclass
class Decomposition:
    """Weighted product strategies; ``terms`` holds (weight, labels, vector)."""

    terms: list = field(default_factory=list)

    def reconstruct(self) -> Box3:
        vals = [ZERO] * 64
        for w, _, vec in self.terms:
            for e, v in vec.items():
                vals[e] += w * v
        return Box3(vals)

    def lines(self) -> list:
        return [f"weight {w} : {' ⊗ '.join(labels)}" for w, labels, _ in self.terms]

    def __str__(self):
        return "\n".join(self.lines())


@dataclass
class Membership:
    member: bool
    result: lp.LPResult
    problem: lp.LPProblem
    decomposition: Optional[Decomposition] = None
    label: str = ""

    def __bool__(self):
        return self.member


def _require_ns3(b: Box3):
    if check_nonsignaling(b):
        raise NotNonsignaling("membership oracles need a non-signaling box")


def _vector(box: Box3) -> dict:
    return {e: v for e, v in enumerate(box.entries) if v}


def _dir_label(i, j):
    return f"DetOneWay({i}->{j})"


@lru_cache(maxsize=None)
def _product_columns(isolated: int, family: str) -> tuple:
    """Columns DetLocal1 x family on the cut isolating ``isolated``."""
    cut = Cut(isolated)
    i, j = cut.pair
    if family == "S":
        pair_boxes = [("DetTwoWay", det_twoway())]
    elif family == "N":
        pair_boxes = [("NS2", ns2_vertices())]
    elif family == "OW12":
        pair_boxes = [(_dir_label(i, j), det_oneway("1->2"))]
    elif family == "OW21":
        pair_boxes = [(_dir_label(j, i), det_oneway("2->1"))]
    else:
        raise ValueError(family)
    cols = []
    for d, single in enumerate(det_local1()):
        for name, boxes in pair_boxes:
            for q, pb in enumerate(boxes):
                labels = (f"DetLocal1({isolated})[{d}]", f"{name}[{q}]")
                cols.append((labels, _vector(product_cut(single, pb, isolated))))
    return tuple(cols)


def _column_lp(b: Box3, columns, label: str) -> Membership:
    p = lp.LPProblem()
    ws = p.add_vars([" ".join(lb) for lb, _ in columns])
    rows = [dict() for _ in range(64)]
    for w, (_, vec) in zip(ws, columns):
        for e, v in vec.items():
            rows[e][w] = v
    for e in range(64):
        p.add_constraint(rows[e], "==", b.entries[e])
    p.add_constraint({w: 1 for w in ws}, "==", 1)
    r = lp.solve(p)
    dec = None
    if r.status == "optimal":
        dec = Decomposition([(r.x[w], lb, vec) for w, (lb, vec) in zip(ws, columns) if r.x[w]])
    return Membership(r.status == "optimal", r, p, dec, label)


def _dedup(columns):
    seen = {}
    for lb, vec in columns:
        key = tuple(sorted(vec.items()))
        if key not in seen:
            seen[key] = (lb, vec)
    return list(seen.values())


def member_S(b: Box3, cut: Cut) -> Membership:
    """Fully bilocal in the cut: DetLocal1 x DetTwoWay columns (1024)."""
    _require_ns3(b)
    return _column_lp(b, _product_columns(cut.isolated, "S"), f"S cut {cut}")


def member_NSBL(b: Box3, cut: Cut) -> Membership:
    """Bilocal with non-signalling pair terms: DetLocal1 x NS2 columns (96)."""
    _require_ns3(b)
    return _column_lp(b, _product_columns(cut.isolated, "N"), f"NSBL cut {cut}")


def member_TOBL(b: Box3, cut: Cut, triples: bool = False) -> Membership:
    """Time-ordered bilocal in the cut.

    The defining LP has one weight q(l, u, v) per triple of DetLocal1 l,
    DetOneWay(i->j) u and DetOneWay(j->i) v, and asks both
    ``sum q l (x) u`` and ``sum q l (x) v`` to equal the box. Only the
    marginals mu(l, u) and nu(l, v) of q enter those equations, and any pair
    of measures with equal mass on every l lifts back to
    ``q = mu nu / mass(l)``. The default solves that 512-column pair-measure
    LP; ``triples=True`` solves the full 16384-column LP instead.
    """
    _require_ns3(b)
    i, j = cut.pair
    fwd = _product_columns(cut.isolated, "OW12")
    bwd = _product_columns(cut.isolated, "OW21")
    if triples:
        return _tobl_triples(b, cut, fwd, bwd)
    p = lp.LPProblem()
    mu = p.add_vars(["mu " + " ".join(lb) for lb, _ in fwd])
    nu = p.add_vars(["nu " + " ".join(lb) for lb, _ in bwd])
    for ws, cols in ((mu, fwd), (nu, bwd)):
        rows = [dict() for _ in range(64)]
        for w, (_, vec) in zip(ws, cols):
            for e, v in vec.items():
                rows[e][w] = v
        for e in range(64):
            p.add_constraint(rows[e], "==", b.entries[e])
    for d in range(4):
        coeffs = {w: 1 for w in mu[d * 64:(d + 1) * 64]}
        coeffs.update({w: -1 for w in nu[d * 64:(d + 1) * 64]})
        p.add_constraint(coeffs, "==", 0)
    p.add_constraint({w: 1 for w in mu}, "==", 1)
    r = lp.solve(p)
    dec = None
    if r.status == "optimal":
        terms = []
        for d in range(4):
            ms = [(r.x[mu[d * 64 + u]], u) for u in range(64) if r.x[mu[d * 64 + u]]]
            ns = [(r.x[nu[d * 64 + v]], v) for v in range(64) if r.x[nu[d * 64 + v]]]
            mass = sum((w for w, _ in ms), ZERO)
            for (wu, u), (wv, v) in itertools.product(ms, ns):
                lu, vu = fwd[d * 64 + u]
                lv, _ = bwd[d * 64 + v]
                # the reconstructed box follows the i->j ordering; both agree
                terms.append((wu * wv / mass, (lu[0], lu[1], lv[1]), vu))
        dec = Decomposition(terms)
    return Membership(r.status == "optimal", r, p, dec, f"TOBL cut {cut}")


def _tobl_triples(b, cut, fwd, bwd) -> Membership:
    p = lp.LPProblem()
    index = []
    for d in range(4):
        for u in range(64):
            for v in range(64):
                index.append((d * 64 + u, d * 64 + v))
    qs = p.add_vars([f"q{k}" for k in range(len(index))])
    for slot, cols in ((0, fwd), (1, bwd)):
        rows = [dict() for _ in range(64)]
        for w, pair in zip(qs, index):
            for e, v in cols[pair[slot]][1].items():
                rows[e][w] = v
        for e in range(64):
            p.add_constraint(rows[e], "==", b.entries[e])
    p.add_constraint({w: 1 for w in qs}, "==", 1)
    r = lp.solve(p)
    dec = None
    if r.status == "optimal":
        dec = Decomposition([
            (r.x[w], (fwd[a][0][0], fwd[a][0][1], bwd[c][0][1]), fwd[a][1])
            for w, (a, c) in zip(qs, index) if r.x[w]])
    return Membership(r.status == "optimal", r, p, dec, f"TOBL cut {cut} (triples)")


def member_T2(b: Box3) -> Membership:
    """Trilocal with at-most-one-way signalling pair terms, both directions per cut."""
    _require_ns3(b)
    cols = []
    for c in CUTS:
        cols += _product_columns(c.isolated, "OW12")
        cols += _product_columns(c.isolated, "OW21")
    return _column_lp(b, _dedup_cached("T2", cols), "T2")


def member_svetlichny(b: Box3) -> Membership:
    _require_ns3(b)
    cols = []
    for c in CUTS:
        cols += _product_columns(c.isolated, "S")
    return _column_lp(b, _dedup_cached("SVET", cols), "Svetlichny")


_DEDUP_CACHE = {}


def _dedup_cached(key, cols):
    if key not in _DEDUP_CACHE:
        _DEDUP_CACHE[key] = _dedup(cols)
    return _DEDUP_CACHE[key]


@dataclass
class ClassReport:
    spec: ClassSpec
    cuts: list

    @property
    def member(self) -> bool:
        return all(m.member for _, _, m in self.cuts)


def member_class(b: Box3, spec: ClassSpec) -> ClassReport:
    oracle = {"N": member_NSBL, "T": member_TOBL, "S": member_S}
    return ClassReport(spec, [(c, spec.letter(c), oracle[spec.letter(c)](b, c)) for c in CUTS])


def bipartite_local(b: Box2) -> Membership:
    """Convex combination of the 16 deterministic local bipartite boxes."""
    if not b.is_nonsignaling():
        raise SignalingInput(f"box signals ({b.signaling_direction})")
    p = lp.LPProblem()
    ws = p.add_vars([f"DetLocal2[{k}]" for k in range(16)])
    for e in range(16):
        p.add_constraint({w: d.entries[e] for w, d in zip(ws, det_local2()) if d.entries[e]},
                         "==", b.entries[e])
    p.add_constraint({w: 1 for w in ws}, "==", 1)
    r = lp.solve(p)
    return Membership(r.status == "optimal", r, p, None, "local")


# ---------------------------------------------------------------- block form

def _pair_constraints(p, M, kind):
    """Equal mass on all pair inputs plus the signalling restriction."""
    for xi, xj in ((0, 1), (1, 0), (1, 1)):
        coeffs = {}
        for ai, aj in itertools.product(BITS, BITS):
            coeffs[M[ai, aj, xi, xj]] = coeffs.get(M[ai, aj, xi, xj], 0) + 1
            coeffs[M[ai, aj, 0, 0]] = coeffs.get(M[ai, aj, 0, 0], 0) - 1
        p.add_constraint(coeffs, "==", 0)
    if kind in ("i->j", "ns"):
        # first member's marginal ignores the second's input
        for ai, xi in itertools.product(BITS, BITS):
            p.add_constraint({M[ai, 0, xi, 0]: 1, M[ai, 1, xi, 0]: 1,
                              M[ai, 0, xi, 1]: -1, M[ai, 1, xi, 1]: -1}, "==", 0)
    if kind in ("j->i", "ns"):
        for aj, xj in itertools.product(BITS, BITS):
            p.add_constraint({M[0, aj, 0, xj]: 1, M[1, aj, 0, xj]: 1,
                              M[0, aj, 1, xj]: -1, M[1, aj, 1, xj]: -1}, "==", 0)


def _mass(M):
    return {M[ai, aj, 0, 0]: 1 for ai, aj in itertools.product(BITS, BITS)}


@dataclass
class CutBlocks:
    cut: Cut
    letter: str
    # families[f][d] maps (ai, aj, xi, xj) -> variable index
    families: list


def add_cut_blocks(p: lp.LPProblem, cut: Cut, letter: str, tag: str = "") -> CutBlocks:
    kinds = {"S": ["any"], "T": ["i->j", "j->i"], "N": ["ns"]}[letter]
    fams = []
    for kind in kinds:
        per_d = []
        for d in range(4):
            names = [f"{tag}M{cut.isolated}{kind}[{d}]({ai}{aj}|{xi}{xj})"
                     for ai, aj, xi, xj in itertools.product(BITS, repeat=4)]
            vs = p.add_vars(names)
            M = dict(zip(itertools.product(BITS, repeat=4), vs))
            _pair_constraints(p, M, kind)
            per_d.append(M)
        fams.append(per_d)
    if letter == "T":
        for d in range(4):
            coeffs = _mass(fams[0][d])
            coeffs.update({v: -1 for v in _mass(fams[1][d])})
            p.add_constraint(coeffs, "==", 0)
    return CutBlocks(cut, letter, fams)


def block_expression(blocks: CutBlocks, family: int = 0) -> list:
    """The 64 box entries as linear forms in one family's block variables."""
    k = blocks.cut.isolated - 1
    i, j = [q - 1 for q in blocks.cut.pair]
    exprs = [dict() for _ in range(64)]
    for d, M in enumerate(blocks.families[family]):
        for a in itertools.product(BITS, repeat=3):
            for x in itertools.product(BITS, repeat=3):
                if a[k] == f1(d, x[k]):
                    exprs[idx3(*a, *x)][M[a[i], a[j], x[i], x[j]]] = ONE
    return exprs


def add_class_blocks(p: lp.LPProblem, spec: ClassSpec, target=None, tag: str = ""):
    """Constrain a box-like linear form to decompose according to ``spec``.

    ``target`` is a list of 64 pairs ``(coeffs, const)`` meaning
    ``entry_e = coeffs . vars + const``. With ``target=None`` the first cut's
    own block sum is the box, so no separate box variables are introduced.
    Returns ``(blocks, box_exprs)`` where ``box_exprs`` gives the entries as
    ``(coeffs, const)``.
    """
    all_blocks = [add_cut_blocks(p, c, spec.letter(c), tag) for c in CUTS]
    if target is None:
        target = [(e, ZERO) for e in block_expression(all_blocks[0], 0)]
        linked = [(b, f) for b in all_blocks for f in range(len(b.families))][1:]
    else:
        linked = [(b, f) for b in all_blocks for f in range(len(b.families))]
    for blk, fam in linked:
        expr = block_expression(blk, fam)
        for e in range(64):
            coeffs = dict(expr[e])
            tc, const = target[e]
            for v, c in tc.items():
                coeffs[v] = coeffs.get(v, ZERO) - c
            p.add_constraint(coeffs, "==", const)
    return all_blocks, target


def add_ns3_equalities(p: lp.LPProblem, exprs):
    """No-signalling equalities on 64 linear forms (mass equality follows)."""
    for k in range(3):
        others = [q for q in range(3) if q != k]
        for ao in itertools.product(BITS, BITS):
            for xo in itertools.product(BITS, BITS):
                coeffs = {}
                const = ZERO
                for xk, sign in ((0, 1), (1, -1)):
                    for ak in BITS:
                        a, x = [0, 0, 0], [0, 0, 0]
                        a[k], x[k] = ak, xk
                        a[others[0]], a[others[1]] = ao
                        x[others[0]], x[others[1]] = xo
                        ec, ek = exprs[idx3(*a, *x)]
                        for v, c in ec.items():
                            coeffs[v] = coeffs.get(v, ZERO) + sign * c
                        const += sign * ek
                p.add_constraint(coeffs, "==", -const)


def evaluate(exprs, x) -> list:
    return [sum((c * x[v] for v, c in ec.items()), ZERO) + k for ec, k in exprs]
