"""CHSH functionals, twirling, isotropic boxes, bipartite cost and robustness."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from . import lp
from .box_model import BITS, ZERO, Box2, idx2
from .errors import SignalingInput
from .vertices import det_local2, ns2_vertices, vertex_B

__all__ = [
    "CHSHIndex", "CHSH_INDICES", "IsotropicBox", "chsh", "correlator2", "max_chsh",
    "vertex_B", "twirl", "iso_box", "iso_alpha", "cost2", "robustness2",
]


class CHSHIndex(NamedTuple):
    r: int
    s: int
    t: int

    def __str__(self):
        return f"{self.r}{self.s}{self.t}"


CHSH_INDICES = tuple(CHSHIndex(*v) for v in itertools.product(BITS, repeat=3))


def correlator2(b: Box2, x: int, y: int) -> Fraction:
    """E_xy = P(a = b) - P(a != b) at inputs (x, y)."""
    return sum(((1 if a == c else -1) * b[a, c, x, y] for a, c in itertools.product(BITS, BITS)),
               ZERO)


def chsh(b: Box2, idx) -> Fraction:
    r, s, t = idx
    e = [[correlator2(b, x, y) for y in BITS] for x in BITS]
    val = e[0][0] + (-1) ** s * e[0][1] + (-1) ** r * e[1][0] + (-1) ** (r + s + 1) * e[1][1]
    return (-1) ** t * val


def max_chsh(b: Box2):
    """(value, index) maximizing beta; the smallest (r, s, t) wins ties."""
    best = None
    for idx in CHSH_INDICES:
        v = chsh(b, idx)
        if best is None or v > best[0]:
            best = (v, idx)
    return best


@dataclass(frozen=True)
class IsotropicBox:
    """alpha * B_rst + (1 - alpha) * B_rs(1-t)."""

    alpha: Fraction
    r: int
    s: int
    t: int

    def __post_init__(self):
        if not 0 <= self.alpha <= 1:
            raise ValueError(f"alpha = {self.alpha} outside [0, 1]")

    @property
    def box(self) -> Box2:
        return iso_box(self.alpha, self.r, self.s, self.t)


def iso_box(alpha, r: int, s: int, t: int) -> Box2:
    alpha = Fraction(alpha)
    if not 0 <= alpha <= 1:
        raise ValueError(f"alpha = {alpha} outside [0, 1]")
    hi, lo = vertex_B(r, s, t), vertex_B(r, s, t ^ 1)
    return Box2([alpha * u + (1 - alpha) * v for u, v in zip(hi.entries, lo.entries)])


def iso_alpha(b: IsotropicBox) -> Fraction:
    return b.alpha


def _require_ns(b: Box2):
    if not b.is_nonsignaling():
        raise SignalingInput(f"box signals ({b.signaling_direction})")


def twirl(b: Box2, r: int, s: int) -> IsotropicBox:
    """Uniform average over the 8 relabelings (dx, dy, dz) that fix B_rs0 and B_rs1.

    Party 1 answers ``a ^ dy*x ^ dx*dy ^ s*dy ^ dz`` on input ``x ^ dx`` and
    party 2 answers ``b ^ dx*y ^ r*dx ^ dz`` on input ``y ^ dy``.
    The sign of beta_rs0 fixes ``t`` so that alpha >= 1/2.
    """
    _require_ns(b)
    vals = [ZERO] * 16
    for dx, dy, dz in itertools.product(BITS, repeat=3):
        for a, c, x, y in itertools.product(BITS, repeat=4):
            src = idx2(a ^ (dy & x) ^ (dx & dy) ^ (s & dy) ^ dz,
                       c ^ (dx & y) ^ (r & dx) ^ dz, x ^ dx, y ^ dy)
            vals[idx2(a, c, x, y)] += b.entries[src] / 8
    avg = Box2(vals)
    beta = chsh(avg, (r, s, 0))
    t = 0 if beta >= 0 else 1
    iso = IsotropicBox((abs(beta) + 4) / 8, r, s, t)
    if iso.box != avg:
        raise AssertionError("twirled box is not isotropic")
    return iso


def _decomposition_rows(problem, columns, target, scale=None):
    """Add one equality per entry: sum_k col_k[e] * var_k (+ scale term) == target[e]."""
    for e in range(16):
        coeffs = {}
        for var, box in columns:
            v = box.entries[e]
            if v:
                coeffs[var] = coeffs.get(var, ZERO) + v
        rhs = target.entries[e]
        if scale is not None:
            coeffs[scale] = coeffs.get(scale, ZERO) - rhs
            rhs = -rhs
        problem.add_constraint(coeffs, "==", rhs)


def cost2_problem(b: Box2) -> lp.LPProblem:
    p = lp.LPProblem()
    nonlocal_boxes = ns2_vertices()[16:]
    mu = p.add_vars([f"mu[B{i.r}{i.s}{i.t}]" for i in CHSH_INDICES])
    lam = p.add_vars([f"lam[DetLocal2[{k}]]" for k in range(16)])
    cols = list(zip(mu, nonlocal_boxes)) + list(zip(lam, det_local2()))
    _decomposition_rows(p, cols, b)
    p.add_constraint({v: 1 for v in mu + lam}, "==", 1)
    p.set_objective({v: 1 for v in mu}, "min")
    return p


def cost2(b: Box2) -> Fraction:
    """Least weight on the 8 non-local NS2 vertices in a decomposition of b."""
    _require_ns(b)
    return lp.solve(cost2_problem(b)).optimum


def robustness2_problem(b: Box2) -> lp.LPProblem:
    p = lp.LPProblem()
    nu = p.add_vars([f"nu[NS2[{k}]]" for k in range(24)])
    lam = p.add_vars([f"lam[DetLocal2[{k}]]" for k in range(16)])
    w = p.add_var("p")
    # sum nu V - sum lam D - p b = -b
    cols = list(zip(nu, ns2_vertices())) + [(v, Box2([-e for e in d.entries], check=False))
                                            for v, d in zip(lam, det_local2())]
    _decomposition_rows(p, cols, b, scale=w)
    p.add_constraint({**{v: 1 for v in nu}, w: -1}, "==", 0)
    p.add_constraint({v: 1 for v in lam}, "==", 1)
    p.set_objective({w: 1}, "min")
    return p


def robustness2(b: Box2) -> Fraction:
    """Least noise weight p making (1-p) b + p A local for some NS2 box A."""
    _require_ns(b)
    return lp.solve(robustness2_problem(b)).optimum
