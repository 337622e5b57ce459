"""Deterministic and extremal strategy families used as LP columns.

Every family is listed in truth-table lexicographic order, and that order is
part of the public contract because certificates cite ``FAMILY[index]``.

* single-party ``f`` (x -> a): index ``f(0)*2 + f(1)``.
* two-input ``g`` ((x1, x2) -> a): index ``g00*8 + g01*4 + g10*2 + g11``.
* DetLocal2: ``f1*4 + f2``; DetOneWay: ``f*16 + g``; DetTwoWay: ``f*16 + g``.
* NS2: the 16 DetLocal2 boxes, then B_rst in ``r*4 + s*2 + t`` order.

Bipartite positions are "first" and "second" of the pair. ``"1->2"`` means the
first may signal to the second.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

from .box_model import BITS, ONE, ZERO, Box2, Fraction

HALF = Fraction(1, 2)


def f1(index: int, x: int) -> int:
    """Value of the single-party function with the given index."""
    return (index >> (1 - x)) & 1


def f2(index: int, x1: int, x2: int) -> int:
    """Value of the two-input function with the given index."""
    return (index >> (3 - (2 * x1 + x2))) & 1


def _det_box(fa, fb) -> Box2:
    return Box2.from_function(
        lambda a1, a2, x1, x2: ONE if (a1, a2) == (fa(x1, x2), fb(x1, x2)) else ZERO)


@lru_cache(maxsize=None)
def det_local1() -> tuple:
    """The 4 deterministic single-party strategies as callables (a, x) -> prob."""
    return tuple(
        (lambda a, x, i=i: ONE if a == f1(i, x) else ZERO) for i in range(4)
    )


@lru_cache(maxsize=None)
def det_local2() -> tuple:
    return tuple(
        _det_box(lambda x1, x2, i=i: f1(i, x1), lambda x1, x2, j=j: f1(j, x2))
        for i in range(4) for j in range(4)
    )


@lru_cache(maxsize=None)
def det_oneway(direction: str = "1->2") -> tuple:
    """64 strategies: the sender answers f(own input), the receiver g(x1, x2)."""
    if direction == "1->2":
        return tuple(
            _det_box(lambda x1, x2, i=i: f1(i, x1), lambda x1, x2, j=j: f2(j, x1, x2))
            for i in range(4) for j in range(16)
        )
    if direction == "2->1":
        return tuple(
            _det_box(lambda x1, x2, j=j: f2(j, x1, x2), lambda x1, x2, i=i: f1(i, x2))
            for i in range(4) for j in range(16)
        )
    raise ValueError(f"direction must be '1->2' or '2->1', not {direction!r}")


@lru_cache(maxsize=None)
def det_twoway() -> tuple:
    return tuple(
        _det_box(lambda x1, x2, i=i: f2(i, x1, x2), lambda x1, x2, j=j: f2(j, x1, x2))
        for i in range(16) for j in range(16)
    )


def vertex_B(r: int, s: int, t: int) -> Box2:
    """Non-local NS2 vertex: 1/2 wherever a ^ b == x*y ^ r*x ^ s*y ^ t."""
    return Box2.from_function(
        lambda a, b, x, y: HALF if a ^ b == (x & y) ^ (r & x) ^ (s & y) ^ t else ZERO)


@lru_cache(maxsize=None)
def ns2_vertices() -> tuple:
    return det_local2() + tuple(
        vertex_B(r, s, t) for r, s, t in itertools.product(BITS, repeat=3))


def signaling_class(v: Box2) -> str:
    """'none', '1->2', '2->1' or 'both' for any bipartite box."""
    return v.signaling_direction


FAMILIES = {
    "DetLocal2": det_local2,
    "DetOneWay12": lambda: det_oneway("1->2"),
    "DetOneWay21": lambda: det_oneway("2->1"),
    "DetTwoWay": det_twoway,
    "NS2": ns2_vertices,
}


def family(name: str) -> tuple:
    if name == "DetLocal1":
        return det_local1()
    return FAMILIES[name]()
