"""Wiring-induced non-locality, the signalling-weight bound, cost and robustness."""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import lcm
from typing import Optional

import numpy as np

from . import lp
from .bell import CHSH_INDICES, CHSHIndex, chsh
from .box_model import ZERO, Box2, Box3, check_nonsignaling, idx3
from .classes import (ClassSpec, Cut, _product_columns, add_class_blocks,
                      add_ns3_equalities, evaluate, member_class)
from .errors import InvalidSpec, NotFullyBilocal, NotNonsignaling, UnboundedClass
from .vertices import det_twoway, signaling_class
from .wiring import Wiring, _map_matrix, apply, canonical_wirings, full_wirings, relabel_orbit

TWO = Fraction(2)


def parse_direction(text: str) -> tuple:
    """'1to2' -> (1, 2)."""
    t = text.strip().replace("->", "to")
    parts = t.split("to")
    if len(parts) != 2 or not all(p in ("1", "2", "3") for p in parts) or parts[0] == parts[1]:
        raise ValueError(f"direction must look like 1to2, not {text!r}")
    return int(parts[0]), int(parts[1])


def _order(cut: Cut, direction) -> tuple:
    first, second = parse_direction(direction) if isinstance(direction, str) else direction
    if {first, second} != set(cut.pair):
        raise ValueError(f"direction {first}to{second} does not wire the pair of cut {cut}")
    return first, second


def _require_ns3(b: Box3):
    if check_nonsignaling(b):
        raise NotNonsignaling("box is not in NS3")


@lru_cache(maxsize=None)
def chsh_coefficients(idx) -> tuple:
    """beta_rst as 16 coefficients on Box2 entries."""
    out = []
    for e in range(16):
        unit = Box2([1 if k == e else 0 for k in range(16)], check=False)
        out.append(int(chsh(unit, idx)))
    return tuple(out)


def wired_objective(w: Wiring, idx=(0, 0, 0)) -> list:
    """beta_idx(apply(w, P)) as 64 integer coefficients on P."""
    c = np.array(chsh_coefficients(CHSHIndex(*idx)), dtype=np.int64)
    return [int(v) for v in c @ _map_matrix(w)]


# ------------------------------------------------------------------ class WN

@dataclass
class WNRecord:
    wiring: Wiring
    spec: ClassSpec
    optimum: Fraction
    witness: Box3
    result: lp.LPResult = field(repr=False, default=None)

    @property
    def wn(self) -> Fraction:
        return self.optimum if self.optimum > 2 else ZERO


def class_problem(spec: ClassSpec):
    """Blocks for ``spec`` with the box eliminated; returns (problem, box_exprs)."""
    p = lp.LPProblem()
    _, exprs = add_class_blocks(p, spec)
    p.add_constraint({v: c for v, c in _sum_exprs(exprs, (0, 0, 0)).items()}, "==", 1)
    if not spec.monotone_cuts:
        add_ns3_equalities(p, exprs)
    return p, exprs


def _sum_exprs(exprs, x):
    total = {}
    for a in itertools.product((0, 1), repeat=3):
        ec, _ = exprs[idx3(*a, *x)]
        for v, c in ec.items():
            total[v] = total.get(v, ZERO) + c
    return total


def wn_class(spec, wired_cut: Cut = Cut(3), direction="1to2", w: Optional[Wiring] = None,
             recheck: bool = False) -> WNRecord:
    """Largest beta_000 of the wired box over boxes of the class."""
    spec = ClassSpec.parse(spec) if isinstance(spec, str) else spec
    first, second = _order(wired_cut, direction)
    w = (w or Wiring()).with_order(first, second)
    p, exprs = class_problem(spec)
    obj = {}
    for e, c in enumerate(wired_objective(w)):
        if c:
            for v, k in exprs[e][0].items():
                obj[v] = obj.get(v, ZERO) + c * k
    p.set_objective(obj, "max")
    r = lp.solve(p)
    if r.status == "unbounded":
        raise UnboundedClass(f"class LP for {spec} unbounded")
    if r.status != "optimal":
        raise RuntimeError(f"class LP for {spec} is {r.status}")
    witness = Box3(evaluate(exprs, r.x))
    if chsh(apply(w, witness), (0, 0, 0)) != r.optimum:
        raise AssertionError("witness does not attain the optimum")
    if recheck and not member_class(witness, spec).member:
        raise AssertionError("witness fails class membership")
    return WNRecord(w, spec, r.optimum, witness, r)


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("BOXWIRE_WORKERS", "1")))
    except ValueError:
        return 1


def _wn_job(args):
    spec, cut, direction, eta = args
    rec = wn_class(spec, Cut(cut), direction, Wiring(eta=eta))
    return rec.optimum


def orbit_representatives(first: int = 1, second: int = 2) -> dict:
    """Canonical wirings grouped by relabel_orbit: representative -> members."""
    groups = {}
    for w in canonical_wirings(first, second):
        rep = relabel_orbit(w)[0]
        groups.setdefault(rep, []).append(w)
    return groups


_WN_CACHE = {}


def wn_table(spec, wired_cut: Cut = Cut(3), direction="1to2") -> dict:
    """Class WN optimum for every canonical wiring (eta tuple -> beta_000 optimum).

    One LP per relabel_orbit; orbit members share the value because the class
    is closed under a2 -> a2+1 and a2 -> a2+x2, and x2 = a1 here.
    """
    spec = ClassSpec.parse(spec) if isinstance(spec, str) else spec
    first, second = _order(wired_cut, direction)
    key = (spec.letters, wired_cut.isolated, first, second)
    if key in _WN_CACHE:
        return _WN_CACHE[key]
    groups = orbit_representatives(first, second)
    reps = sorted(groups)
    jobs = [(spec.letters, wired_cut.isolated, (first, second), r.eta) for r in reps]
    n = _workers()
    if n > 1:
        with ProcessPoolExecutor(n) as ex:
            values = list(ex.map(_wn_job, jobs))
    else:
        values = [_wn_job(j) for j in jobs]
    table = {}
    for rep, val in zip(reps, values):
        for w in groups[rep]:
            table[w.eta] = val
    _WN_CACHE[key] = table
    return table


def mwn_class(spec, wired_cut: Cut = Cut(3), direction="1to2"):
    """(MWN, witness wiring): best class WN over canonical wirings, smallest eta on ties."""
    table = wn_table(spec, wired_cut, direction)
    first, second = _order(wired_cut, direction)
    best = max(table.values())
    eta = min(e for e, v in table.items() if v == best)
    return (best if best > 2 else ZERO), Wiring(eta=eta, first=first, second=second)


def wn_levels(spec, wired_cut: Cut = Cut(3), direction="1to2") -> list:
    """Distinct WN values above 2, descending."""
    table = wn_table(spec, wired_cut, direction)
    return sorted({v for v in table.values() if v > 2}, reverse=True)


# -------------------------------------------------------------- single box

@lru_cache(maxsize=None)
def _full_coefficients(first: int, second: int):
    ws = full_wirings(first, second)
    c = np.array([chsh_coefficients(i) for i in CHSH_INDICES], dtype=np.int64)  # 8 x 16
    mats = np.stack([c @ _map_matrix(w) for w in ws])  # W x 8 x 64
    return ws, mats.reshape(-1, 64).astype(np.int64)


@dataclass
class MWNBox:
    value: Fraction
    wiring: Wiring
    index: CHSHIndex

    @property
    def violation(self) -> bool:
        return self.value > 2


def mwn_box(b: Box3, first: int = 1, second: int = 2) -> MWNBox:
    """Exhaustive max of beta_rst over all full wirings on (first -> second)."""
    _require_ns3(b)
    ws, coeffs = _full_coefficients(first, second)
    den = lcm(*(v.denominator for v in b.entries))
    ints = [int(v * den) for v in b.entries]
    if max(ints) * 64 < 2 ** 62:
        vals = coeffs @ np.array(ints, dtype=np.int64)
    else:
        vals = coeffs.astype(object) @ np.array(ints, dtype=object)
    k = int(np.argmax(vals))
    return MWNBox(Fraction(int(vals[k]), den), ws[k // 8], CHSH_INDICES[k % 8])


# ----------------------------------------------------------------- bounds

@dataclass
class BoundRecord:
    box_id: str
    kind: str
    value: Fraction
    witness: dict


def signal_weight_bound(b: Box3, cut: Cut, direction="1to2", box_id: str = "") -> BoundRecord:
    """2 * (least weight on pair terms signalling against the wiring order) + 2."""
    _require_ns3(b)
    first, second = _order(cut, direction)
    i, j = cut.pair
    # against the order means the first-measured party's output sees the other's input
    bad = {"2->1", "both"} if first == i else {"1->2", "both"}
    cols = _product_columns(cut.isolated, "S")
    flags = [signaling_class(pb) in bad for pb in det_twoway()]
    p = lp.LPProblem()
    ws = p.add_vars([" ".join(lb) for lb, _ in cols])
    rows = [dict() for _ in range(64)]
    for w, (_, vec) in zip(ws, cols):
        for e, v in vec.items():
            rows[e][w] = v
    for e in range(64):
        p.add_constraint(rows[e], "==", b.entries[e])
    p.add_constraint({w: 1 for w in ws}, "==", 1)
    p.set_objective({w: 1 for k, w in enumerate(ws) if flags[k % 256]}, "min")
    r = lp.solve(p)
    if r.status != "optimal":
        raise NotFullyBilocal(f"box has no fully bilocal model in cut {cut}")
    return BoundRecord(box_id, "signal-weight", 2 * r.optimum + 2,
                       {"cut": str(cut), "direction": f"{first}to{second}",
                        "signaling_weight": r.optimum})


def _best_over_cuts(b: Box3, spec: ClassSpec):
    best = None
    for cut in spec.monotone_cuts:
        i, j = cut.pair
        for first, second in ((i, j), (j, i)):
            m = mwn_box(b, first, second)
            if best is None or m.value > best[0].value:
                best = (m, cut)
    return best


def _lower_bound(b, spec, kind, fn, box_id):
    spec = ClassSpec.parse(spec) if isinstance(spec, str) else spec
    _require_ns3(b)
    if not spec.monotone_cuts:
        raise InvalidSpec(f"{spec} has no N or T cut")
    m, cut = _best_over_cuts(b, spec)
    value = max(ZERO, fn(m.value))
    return BoundRecord(box_id, kind, value,
                       {"cut": str(cut), "wiring": str(m.wiring),
                        "direction": f"{m.wiring.first}to{m.wiring.second}",
                        "chsh": str(m.index), "beta": m.value})


def cost_lower_bound(b: Box3, spec, box_id: str = "") -> BoundRecord:
    return _lower_bound(b, spec, "cost-lower", lambda beta: (beta - 2) / 2, box_id)


def robustness_lower_bound(b: Box3, spec, box_id: str = "") -> BoundRecord:
    return _lower_bound(b, spec, "robustness-lower", lambda beta: (beta - 2) / (beta + 4), box_id)


# ------------------------------------------------------- exact monotones

def _noise_block(p: lp.LPProblem):
    """64 nonnegative variables forming a scaled NS3 box; returns (vars, mass form)."""
    bs = p.add_vars([f"B{e}" for e in range(64)])
    add_ns3_equalities(p, [({v: Fraction(1)}, ZERO) for v in bs])
    mass = {bs[idx3(*a, 0, 0, 0)]: Fraction(1) for a in itertools.product((0, 1), repeat=3)}
    return bs, mass


def _check_spec(spec):
    spec = ClassSpec.parse(spec) if isinstance(spec, str) else spec
    if not spec.monotone_cuts:
        raise InvalidSpec(f"{spec} has no N or T cut")
    return spec


def cost3_problem(b: Box3, spec: ClassSpec) -> lp.LPProblem:
    p = lp.LPProblem()
    bs, mass = _noise_block(p)
    target = [({bs[e]: Fraction(-1)}, b.entries[e]) for e in range(64)]
    add_class_blocks(p, spec, target)
    p.set_objective(mass, "min")
    return p


def cost3_exact(b: Box3, spec) -> Fraction:
    """Least weight of an unconstrained NS3 part, the rest lying in the class."""
    spec = _check_spec(spec)
    _require_ns3(b)
    return lp.solve(cost3_problem(b, spec)).optimum


def robustness3_problem(b: Box3, spec: ClassSpec) -> lp.LPProblem:
    p = lp.LPProblem()
    bs, mass = _noise_block(p)
    w = p.add_var("p")
    p.add_constraint({**mass, w: -1}, "==", 0)
    target = [({bs[e]: Fraction(1), w: -b.entries[e]}, b.entries[e]) for e in range(64)]
    add_class_blocks(p, spec, target)
    p.set_objective({w: 1}, "min")
    return p


def robustness3_exact(b: Box3, spec) -> Fraction:
    """Least NS3 noise weight p with p A + (1-p) b inside the class."""
    spec = _check_spec(spec)
    _require_ns3(b)
    return lp.solve(robustness3_problem(b, spec)).optimum
