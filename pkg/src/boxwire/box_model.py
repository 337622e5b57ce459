"""Exact tripartite and bipartite boxes with binary inputs and outputs.

Outputs are stored in {0, 1}. The {-1, +1} correlator convention lives only in
:func:`from_correlators` / :func:`to_correlators`, with ``a = (-1) ** a_bit``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .errors import NegativeProbability, NotNonsignaling, ParseError

BITS = (0, 1)
ZERO = Fraction(0)
ONE = Fraction(1)


def idx3(a1, a2, a3, x1, x2, x3):
    return (a1 << 5) | (a2 << 4) | (a3 << 3) | (x1 << 2) | (x2 << 1) | x3


def idx2(a1, a2, x1, x2):
    return (a1 << 3) | (a2 << 2) | (x1 << 1) | x2


def _as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        raise TypeError("floating-point box entries are not accepted")
    return Fraction(v)


class Box3:
    """P(a1 a2 a3 | x1 x2 x3) as 64 exact rationals.

    Entries are stored lexicographically in (a1, a2, a3, x1, x2, x3).
    Construction checks nonnegativity and per-input normalization.
    """

    __slots__ = ("_p", "_hash")

    def __init__(self, entries: Iterable, *, check: bool = True):
        p = tuple(_as_fraction(v) for v in entries)
        if len(p) != 64:
            raise ValueError(f"Box3 needs 64 entries, got {len(p)}")
        if check:
            for i, v in enumerate(p):
                if v < 0:
                    raise NegativeProbability(_unflat3(i), v)
            for x in itertools.product(BITS, repeat=3):
                s = sum(p[idx3(*a, *x)] for a in itertools.product(BITS, repeat=3))
                if s != 1:
                    raise ValueError(f"inputs {x} sum to {s}, not 1")
        self._p = p
        self._hash = None

    @classmethod
    def from_function(cls, f: Callable[[tuple, tuple], object], check=True) -> "Box3":
        """Build from ``f(a, x)`` with ``a`` and ``x`` bit triples."""
        vals = [ZERO] * 64
        for a in itertools.product(BITS, repeat=3):
            for x in itertools.product(BITS, repeat=3):
                vals[idx3(*a, *x)] = f(a, x)
        return cls(vals, check=check)

    @classmethod
    def uniform(cls) -> "Box3":
        return cls([Fraction(1, 8)] * 64)

    @property
    def entries(self) -> tuple:
        return self._p

    def __getitem__(self, key) -> Fraction:
        return self._p[idx3(*key)]

    def __eq__(self, other):
        return isinstance(other, Box3) and self._p == other._p

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._p)
        return self._hash

    def __repr__(self):
        return f"Box3({[str(v) for v in self._p]})"

    def permute(self, order: Sequence[int]) -> "Box3":
        """Reorder parties: new party k is old party ``order[k]`` (0-based)."""
        inv = [order.index(k) for k in range(3)]
        p = self._p

        def f(a, x):
            return p[idx3(*(a[inv[k]] for k in range(3)), *(x[inv[k]] for k in range(3)))]

        return Box3.from_function(f, check=False)

    def is_nonsignaling(self) -> bool:
        return not check_nonsignaling(self)


def _unflat3(i):
    return tuple((i >> s) & 1 for s in (5, 4, 3, 2, 1, 0))


class Box2:
    """P(a1 a2 | x1 x2) as 16 exact rationals; may be signaling."""

    __slots__ = ("_p",)

    def __init__(self, entries: Iterable, *, check: bool = True):
        p = tuple(_as_fraction(v) for v in entries)
        if len(p) != 16:
            raise ValueError(f"Box2 needs 16 entries, got {len(p)}")
        if check:
            for i, v in enumerate(p):
                if v < 0:
                    raise NegativeProbability(tuple((i >> s) & 1 for s in (3, 2, 1, 0)), v)
            for x1, x2 in itertools.product(BITS, BITS):
                s = sum(p[idx2(a1, a2, x1, x2)] for a1, a2 in itertools.product(BITS, BITS))
                if s != 1:
                    raise ValueError(f"inputs {(x1, x2)} sum to {s}, not 1")
        self._p = p

    @classmethod
    def from_function(cls, f, check=True) -> "Box2":
        vals = [ZERO] * 16
        for a1, a2, x1, x2 in itertools.product(BITS, repeat=4):
            vals[idx2(a1, a2, x1, x2)] = f(a1, a2, x1, x2)
        return cls(vals, check=check)

    @classmethod
    def uniform(cls) -> "Box2":
        return cls([Fraction(1, 4)] * 16)

    @property
    def entries(self) -> tuple:
        return self._p

    def __getitem__(self, key) -> Fraction:
        return self._p[idx2(*key)]

    def __eq__(self, other):
        return isinstance(other, Box2) and self._p == other._p

    def __hash__(self):
        return hash(self._p)

    def __repr__(self):
        return f"Box2({[str(v) for v in self._p]})"

    def marginal1(self, a1, x1, x2) -> Fraction:
        return sum(self._p[idx2(a1, a2, x1, x2)] for a2 in BITS)

    def marginal2(self, a2, x1, x2) -> Fraction:
        return sum(self._p[idx2(a1, a2, x1, x2)] for a1 in BITS)

    @property
    def signaling_direction(self) -> str:
        """'none', '1->2', '2->1' or 'both'.

        ``'1->2'`` means party 2's marginal depends on x1.
        """
        s12 = any(
            self.marginal2(a2, 0, x2) != self.marginal2(a2, 1, x2)
            for a2, x2 in itertools.product(BITS, BITS)
        )
        s21 = any(
            self.marginal1(a1, x1, 0) != self.marginal1(a1, x1, 1)
            for a1, x1 in itertools.product(BITS, BITS)
        )
        return {(False, False): "none", (True, False): "1->2",
                (False, True): "2->1", (True, True): "both"}[(s12, s21)]

    def is_nonsignaling(self) -> bool:
        return self.signaling_direction == "none"


def mix3(weights: Sequence, boxes: Sequence[Box3]) -> Box3:
    """Convex combination of tripartite boxes."""
    vals = [ZERO] * 64
    for w, b in zip(weights, boxes):
        w = _as_fraction(w)
        for i, v in enumerate(b.entries):
            vals[i] += w * v
    return Box3(vals)


def mix2(weights: Sequence, boxes: Sequence[Box2]) -> Box2:
    vals = [ZERO] * 16
    for w, b in zip(weights, boxes):
        w = _as_fraction(w)
        for i, v in enumerate(b.entries):
            vals[i] += w * v
    return Box2(vals)


def local_box(f0: int, f1: int):
    """Deterministic single-party box a = f(x), as a function (a, x) -> 0/1."""
    table = (f0, f1)
    return lambda a, x: ONE if a == table[x] else ZERO


def product3(p1, p2, p3) -> Box3:
    """P1(a1|x1) P2(a2|x2) P3(a3|x3) from three callables (a, x) -> prob."""
    return Box3.from_function(
        lambda a, x: _as_fraction(p1(a[0], x[0])) * p2(a[1], x[1]) * p3(a[2], x[2])
    )


def product_cut(single, pair: Box2, isolated: int) -> Box3:
    """Box P_k(a_k|x_k) P(a_i a_j|x_i x_j) for the cut isolating party ``isolated``.

    ``pair`` is indexed with the lower-numbered party of the pair first.
    ``isolated`` is 1-based.
    """
    k = isolated - 1
    i, j = [q for q in range(3) if q != k]

    def f(a, x):
        return _as_fraction(single(a[k], x[k])) * pair[a[i], a[j], x[i], x[j]]

    return Box3.from_function(f)


# ---------------------------------------------------------------- correlators

CORRELATOR_NAMES = (
    ["A0", "A1", "B0", "B1", "C0", "C1"]
    + [f"AB{x}{y}" for x in BITS for y in BITS]
    + [f"AC{x}{y}" for x in BITS for y in BITS]
    + [f"BC{x}{y}" for x in BITS for y in BITS]
    + [f"ABC{x}{y}{z}" for x in BITS for y in BITS for z in BITS]
)


@dataclass(frozen=True)
class Correlators3:
    """The 26 expectation values of a tripartite non-signaling box.

    Two-party blocks are indexed ``2*x + y`` and the three-party block
    ``4*x1 + 2*x2 + x3``, matching the file order A0 A1 B0 B1 C0 C1,
    AB00..AB11, AC.., BC.., ABC000..ABC111.
    """

    A: tuple
    B: tuple
    C: tuple
    AB: tuple
    AC: tuple
    BC: tuple
    ABC: tuple

    @classmethod
    def from_values(cls, values: Sequence) -> "Correlators3":
        v = [_as_fraction(t) for t in values]
        if len(v) != 26:
            raise ValueError(f"need 26 correlators, got {len(v)}")
        return cls(tuple(v[0:2]), tuple(v[2:4]), tuple(v[4:6]), tuple(v[6:10]),
                   tuple(v[10:14]), tuple(v[14:18]), tuple(v[18:26]))

    @classmethod
    def zero(cls) -> "Correlators3":
        return cls.from_values([0] * 26)

    @property
    def values(self) -> tuple:
        return self.A + self.B + self.C + self.AB + self.AC + self.BC + self.ABC

    def as_dict(self) -> dict:
        return dict(zip(CORRELATOR_NAMES, self.values))


def _sgn(bit):
    return -1 if bit else 1


def from_correlators(c: Correlators3, *, check: bool = True) -> Box3:
    """Box from the 26-parameter expansion with a = (-1)^a_bit.

    Raises :class:`NegativeProbability` when an entry comes out below zero.
    """
    vals = [ZERO] * 64
    for a in itertools.product(BITS, repeat=3):
        s1, s2, s3 = (_sgn(t) for t in a)
        for x1, x2, x3 in itertools.product(BITS, repeat=3):
            v = (1 + s1 * c.A[x1] + s2 * c.B[x2] + s3 * c.C[x3]
                 + s1 * s2 * c.AB[2 * x1 + x2] + s1 * s3 * c.AC[2 * x1 + x3]
                 + s2 * s3 * c.BC[2 * x2 + x3]
                 + s1 * s2 * s3 * c.ABC[4 * x1 + 2 * x2 + x3])
            v = Fraction(v) / 8
            if check and v < 0:
                raise NegativeProbability((*a, x1, x2, x3), v)
            vals[idx3(*a, x1, x2, x3)] = v
    return Box3(vals, check=check)


def to_correlators(b: Box3) -> Correlators3:
    """Inverse of :func:`from_correlators` on NS3.

    The 26-parameter form only exists for non-signaling boxes, so a
    signaling box raises :class:`NotNonsignaling`.
    """
    if check_nonsignaling(b):
        raise NotNonsignaling("correlator form requires a non-signaling box")
    p = b.entries

    def corr(parties, x):
        total = ZERO
        for a in itertools.product(BITS, repeat=3):
            sign = 1
            for q in parties:
                sign *= _sgn(a[q])
            total += sign * p[idx3(*a, *x)]
        return total

    A = tuple(corr((0,), (x, 0, 0)) for x in BITS)
    B = tuple(corr((1,), (0, x, 0)) for x in BITS)
    C = tuple(corr((2,), (0, 0, x)) for x in BITS)
    AB = tuple(corr((0, 1), (x, y, 0)) for x in BITS for y in BITS)
    AC = tuple(corr((0, 2), (x, 0, y)) for x in BITS for y in BITS)
    BC = tuple(corr((1, 2), (0, x, y)) for x in BITS for y in BITS)
    ABC = tuple(corr((0, 1, 2), x) for x in itertools.product(BITS, repeat=3))
    return Correlators3(A, B, C, AB, AC, BC, ABC)


# ------------------------------------------------------------- non-signaling

@dataclass(frozen=True)
class NSViolation:
    """One violated marginal equality.

    ``party`` (1-based) is the party whose input is varied between 0 and 1 in
    the sum over its own output; ``outcomes`` and ``inputs`` are the fixed
    values of the other two parties, in increasing party order.
    """

    party: int
    outcomes: tuple
    inputs: tuple
    at_input0: Fraction
    at_input1: Fraction


def check_nonsignaling(b: Box3) -> list:
    """Every violated equality of the NS3 constraints; empty iff b is in NS3."""
    p = b.entries
    out = []
    for k in range(3):
        others = [q for q in range(3) if q != k]
        for ao in itertools.product(BITS, BITS):
            for xo in itertools.product(BITS, BITS):
                sums = []
                for xk in BITS:
                    s = ZERO
                    for ak in BITS:
                        a = [0, 0, 0]
                        x = [0, 0, 0]
                        a[k], x[k] = ak, xk
                        a[others[0]], a[others[1]] = ao
                        x[others[0]], x[others[1]] = xo
                        s += p[idx3(*a, *x)]
                    sums.append(s)
                if sums[0] != sums[1]:
                    out.append(NSViolation(k + 1, ao, xo, sums[0], sums[1]))
    return out


def marginal(b: Box3, traced_party: int, fixed_input: int) -> Box2:
    """Sum out ``traced_party`` (1-based) at input ``fixed_input``.

    The result is indexed with the remaining parties in increasing order.
    """
    k = traced_party - 1
    i, j = [q for q in range(3) if q != k]
    p = b.entries

    def f(ai, aj, xi, xj):
        s = ZERO
        for ak in BITS:
            a = [0, 0, 0]
            x = [0, 0, 0]
            a[i], a[j], a[k] = ai, aj, ak
            x[i], x[j], x[k] = xi, xj, fixed_input
            s += p[idx3(*a, *x)]
        return s

    return Box2.from_function(f)


# ---------------------------------------------------------------- relabeling

@dataclass(frozen=True)
class Relabeling:
    """Local relabeling, one entry per party.

    In the relabeled box party q receives input x, feeds ``x ^ input_flip[q]``
    to the device, gets ``a`` and reports ``a ^ out_const[q] ^ (out_lin[q] & x)``.
    """

    input_flip: tuple
    out_const: tuple
    out_lin: tuple

    @classmethod
    def identity(cls, parties: int = 3) -> "Relabeling":
        z = (0,) * parties
        return cls(z, z, z)

    @property
    def parties(self) -> int:
        return len(self.input_flip)

    def compose(self, other: "Relabeling") -> "Relabeling":
        """``self`` applied after ``other``: relabel(relabel(b, other), self)."""
        f, c, d = [], [], []
        for q in range(self.parties):
            # outer input x -> inner input x^f1 -> device input x^f1^f2
            f.append(self.input_flip[q] ^ other.input_flip[q])
            # output: a ^ c2 ^ d2*(x^f1) ^ c1 ^ d1*x
            d.append(self.out_lin[q] ^ other.out_lin[q])
            c.append(self.out_const[q] ^ other.out_const[q]
                     ^ (other.out_lin[q] & self.input_flip[q]))
        return Relabeling(tuple(f), tuple(c), tuple(d))

    def inverse(self) -> "Relabeling":
        f, c, d = [], [], []
        for q in range(self.parties):
            f.append(self.input_flip[q])
            d.append(self.out_lin[q])
            c.append(self.out_const[q] ^ (self.out_lin[q] & self.input_flip[q]))
        return Relabeling(tuple(f), tuple(c), tuple(d))
# Frame of the published correlator tables: every input and

# Frame in which the paper's correlator tables are printed: every input and
# every output bit flipped relative to the direct reading of the expansion.
TABLE_FRAME = Relabeling((1, 1, 1), (1, 1, 1), (0, 0, 0))


def relabel3(b: Box3, r: Relabeling) -> Box3:
    p = b.entries
    f, c, d = r.input_flip, r.out_const, r.out_lin

    def g(a, x):
        dev_a = tuple(a[q] ^ c[q] ^ (d[q] & x[q]) for q in range(3))
        dev_x = tuple(x[q] ^ f[q] for q in range(3))
        return p[idx3(*dev_a, *dev_x)]

    return Box3.from_function(g, check=False)


def relabel2(b: Box2, r: Relabeling) -> Box2:
    f, c, d = r.input_flip, r.out_const, r.out_lin

    def g(a1, a2, x1, x2):
        return b[a1 ^ c[0] ^ (d[0] & x1), a2 ^ c[1] ^ (d[1] & x2), x1 ^ f[0], x2 ^ f[1]]

    return Box2.from_function(g, check=False)


def all_relabelings(parties: int = 3):
    """All 8**parties local relabelings, in lexicographic order."""
    per = list(itertools.product(BITS, BITS, BITS))
    for combo in itertools.product(per, repeat=parties):
        yield Relabeling(tuple(t[0] for t in combo), tuple(t[1] for t in combo),
                         tuple(t[2] for t in combo))


# ------------------------------------------------------------------ box files

_RATIONAL = re.compile(r"^[+-]?\d+(?:/\d+)?$")
_PROB_LINE = re.compile(
    r"^p\(\s*([01])\s*([01])\s*([01])\s*\|\s*([01])\s*([01])\s*([01])\s*\)$")


def parse_rational(text: str) -> Fraction:
    t = text.replace(" ", "")
    if not _RATIONAL.match(t):
        raise ValueError(f"not an exact rational: {text!r}")
    v = Fraction(t)
    return v


def _content_lines(text):
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield n, line


def parse_box(text: str) -> Box3:
    """Read a box file (correlator or probability format)."""
    lines = list(_content_lines(text))
    if not lines:
        raise ParseError("empty box file", line=1)
    headers = {}
    body = []
    for n, line in lines:
        key, sep, val = line.partition(":")
        if sep and key.strip() in ("format", "frame") and not body:
            headers[key.strip()] = (n, val.strip())
        else:
            body.append((n, line))
    if "format" not in headers:
        raise ParseError("missing 'format:' header", line=lines[0][0])
    hline, fmt = headers["format"]
    frame = headers.get("frame", (None, "direct"))[1]
    if frame not in ("direct", "table"):
        raise ParseError(f"unknown frame {frame!r}", line=headers["frame"][0])

    if fmt == "correlators":
        if len(body) != 26:
            raise ParseError(f"expected 26 correlator lines, got {len(body)}",
                             line=body[-1][0] if body else hline)
        vals = []
        for (n, line), name in zip(body, CORRELATOR_NAMES):
            key, sep, val = line.partition("=")
            if not sep:
                raise ParseError("expected 'NAME = p/q'", line=n)
            if key.replace(" ", "") != name:
                raise ParseError(f"expected {name}, found {key.strip()!r}", line=n)
            try:
                vals.append(parse_rational(val))
            except ValueError as e:
                raise ParseError(str(e), line=n) from None
        try:
            box = from_correlators(Correlators3.from_values(vals))
        except NegativeProbability as e:
            raise ParseError(f"correlators give a negative entry at {e.index}",
                             line=hline) from None
    elif fmt == "probabilities":
        if len(body) != 64:
            raise ParseError(f"expected 64 probability lines, got {len(body)}",
                             line=body[-1][0] if body else hline)
        vals = [ZERO] * 64
        expected = list(itertools.product(BITS, repeat=6))
        for (n, line), want in zip(body, expected):
            key, sep, val = line.partition("=")
            m = _PROB_LINE.match(key.strip().replace(" ", "")) if sep else None
            if not m:
                raise ParseError("expected 'p(a1 a2 a3 | x1 x2 x3) = p/q'", line=n)
            got = tuple(int(g) for g in m.groups())
            if got != want:
                raise ParseError(f"entry {got} out of lexicographic order, expected {want}",
                                 line=n)
            try:
                v = parse_rational(val)
            except ValueError as e:
                raise ParseError(str(e), line=n) from None
            if v < 0:
                raise ParseError("negative probability", line=n)
            vals[idx3(*got)] = v
        for x in itertools.product(BITS, repeat=3):
            s = sum(vals[idx3(*a, *x)] for a in itertools.product(BITS, repeat=3))
            if s != 1:
                raise ParseError(f"probabilities for inputs {x} sum to {s}", line=body[-1][0])
        box = Box3(vals)
    else:
        raise ParseError(f"unknown format {fmt!r}", line=hline)

    if frame == "table":
        box = relabel3(box, TABLE_FRAME)
    return box


def serialize_box(b: Box3, fmt: str = "probabilities") -> str:
    """Write a box file; correlator format requires a non-signaling box."""
    if fmt == "correlators":
        c = to_correlators(b)
        rows = [f"{name} = {v}" for name, v in zip(CORRELATOR_NAMES, c.values)]
    elif fmt == "probabilities":
        rows = [f"p({a1} {a2} {a3} | {x1} {x2} {x3}) = {b[a1, a2, a3, x1, x2, x3]}"
                for a1, a2, a3, x1, x2, x3 in itertools.product(BITS, repeat=6)]
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return "\n".join([f"format: {fmt}", *rows]) + "\n"
