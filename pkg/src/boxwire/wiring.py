"""Wirings that chain two parties of a tripartite box into one effective party.

Generic variable names are used whatever the pair: ``a1``/``x1`` belong to the
party measured first, ``a2`` to the party measured second. With effective input
``x'`` the first party is fed ``mode(x')``, the second party is fed
``gamma(a1, x')`` and the effective output is ``eta(a1, x', a2)``. Both
polynomials are stored as ANF coefficient tuples:

* ``gamma = (g00, g01, g10, g11)``, coefficient ``g_ij`` of ``a1^i x1^j``;
* ``eta = (e000, ..., e111)``, coefficient ``e_ijk`` of ``a1^i x1^j a2^k``.

The wired box is a :class:`Box2` with the effective party first and the
untouched party second.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .box_model import BITS, ZERO, Box2, Box3, Correlators3, from_correlators, idx2, idx3
from .errors import ParseError, WiringNotNormalized

INPUT_MODES = ("x1", "1+x1", "0", "1")
PAIR_LETTERS = {frozenset((2, 3)): "X", frozenset((1, 3)): "Y", frozenset((1, 2)): "Z"}
CANONICAL_GAMMA = (0, 0, 1, 0)


def _mode_input(mode: int, x: int) -> int:
    return (x, x ^ 1, 0, 1)[mode]


def anf_to_table(coeffs) -> tuple:
    """Mobius transform: ANF coefficients to truth table, same bit indexing."""
    n = len(coeffs)
    tt = list(coeffs)
    step = 1
    while step < n:
        for v in range(n):
            if v & step:
                tt[v] ^= tt[v ^ step]
        step <<= 1
    return tuple(tt)


# the transform is an involution over GF(2)
table_to_anf = anf_to_table


@dataclass(frozen=True, order=True)
class Wiring:
    input_mode: int = 0
    gamma: tuple = CANONICAL_GAMMA
    eta: tuple = (0, 1, 0, 0, 0, 0, 0, 0)
    first: int = 1
    second: int = 2

    def __post_init__(self):
        if len(self.gamma) != 4 or len(self.eta) != 8:
            raise ValueError("gamma needs 4 bits and eta 8 bits")
        if {self.first, self.second} - {1, 2, 3} or self.first == self.second:
            raise ValueError(f"bad party order {self.first}->{self.second}")
        if self.input_mode not in range(4):
            raise ValueError("input_mode must be 0..3")

    @property
    def pair(self) -> str:
        return PAIR_LETTERS[frozenset((self.first, self.second))]

    @property
    def rest(self) -> int:
        return 6 - self.first - self.second

    @property
    def key(self) -> tuple:
        return (self.input_mode, self.gamma, self.eta)

    @property
    def is_canonical(self) -> bool:
        return self.input_mode == 0 and self.gamma == CANONICAL_GAMMA

    def gamma_value(self, a1: int, x1: int) -> int:
        return _gamma_tt(self.gamma)[2 * a1 + x1]

    def eta_value(self, a1: int, x1: int, a2: int) -> int:
        return _eta_tt(self.eta)[4 * a1 + 2 * x1 + a2]

    def with_order(self, first: int, second: int) -> "Wiring":
        return Wiring(self.input_mode, self.gamma, self.eta, first, second)

    def __str__(self):
        return format_wiring(self)


@lru_cache(maxsize=None)
def _gamma_tt(gamma):
    return anf_to_table(gamma)


@lru_cache(maxsize=None)
def _eta_tt(eta):
    return anf_to_table(eta)


def apply(w: Wiring, b: Box3) -> Box2:
    """Wired box P'(a', a_r | x', x_r), effective party first.

    Raises :class:`WiringNotNormalized` when the second-measured party signals
    to the first strongly enough that the sequential protocol loses or gains
    probability mass.
    """
    f, s, r = w.first - 1, w.second - 1, w.rest - 1
    gt, et = _gamma_tt(w.gamma), _eta_tt(w.eta)
    p = b.entries
    vals = [ZERO] * 16
    for xp, xr in itertools.product(BITS, BITS):
        xf = _mode_input(w.input_mode, xp)
        for af in BITS:
            xs = gt[2 * af + xp]
            for as_, ar in itertools.product(BITS, BITS):
                a = [0, 0, 0]
                x = [0, 0, 0]
                a[f], a[s], a[r] = af, as_, ar
                x[f], x[s], x[r] = xf, xs, xr
                ap = et[4 * af + 2 * xp + as_]
                vals[idx2(ap, ar, xp, xr)] += p[idx3(*a, *x)]
    for xp, xr in itertools.product(BITS, BITS):
        total = sum(vals[idx2(a1, a2, xp, xr)] for a1 in BITS for a2 in BITS)
        if total != 1:
            raise WiringNotNormalized(
                f"wired box sums to {total} at inputs ({xp}, {xr})")
    return Box2(vals, check=False)


def canonical_wirings(first: int = 1, second: int = 2) -> list:
    """The 256 wirings with x2 = a1 and identity input, eta in lexicographic order."""
    return [Wiring(0, CANONICAL_GAMMA, eta, first, second)
            for eta in itertools.product(BITS, repeat=8)]


def _affine_basis() -> np.ndarray:
    # uniform box plus one box per correlator set to 1: spans aff(NS3)
    cols = [Correlators3.zero()]
    for k in range(26):
        v = [0] * 26
        v[k] = 1
        cols.append(Correlators3.from_values(v))
    mat = np.zeros((64, 27), dtype=np.int64)
    for c, corr in enumerate(cols):
        box = from_correlators(corr)
        for i, v in enumerate(box.entries):
            mat[i, c] = int(v * 8)
    return mat


def _map_matrix(w: Wiring) -> np.ndarray:
    """0/1 matrix of the wiring as a linear map on 64-entry box vectors."""
    f, s, r = w.first - 1, w.second - 1, w.rest - 1
    gt, et = _gamma_tt(w.gamma), _eta_tt(w.eta)
    m = np.zeros((16, 64), dtype=np.int64)
    for xp, xr in itertools.product(BITS, BITS):
        xf = _mode_input(w.input_mode, xp)
        for af, as_, ar in itertools.product(BITS, repeat=3):
            a = [0, 0, 0]
            x = [0, 0, 0]
            a[f], a[s], a[r] = af, as_, ar
            x[f], x[s], x[r] = xf, gt[2 * af + xp], xr
            m[idx2(et[4 * af + 2 * xp + as_], ar, xp, xr), idx3(*a, *x)] = 1
    return m


@lru_cache(maxsize=None)
def _full_keys() -> tuple:
    basis = _affine_basis()
    seen = {}
    for mode in range(4):
        for gamma in itertools.product(BITS, repeat=4):
            for eta in itertools.product(BITS, repeat=8):
                w = Wiring(mode, gamma, eta)
                sig = (_map_matrix(w) @ basis).tobytes()
                if sig not in seen:
                    seen[sig] = w.key
    return tuple(sorted(seen.values()))


def full_wirings(first: int = 1, second: int = 2) -> list:
    """All (mode, gamma, eta) wirings, one per distinct map on non-signaling boxes.

    Two wirings are merged when they agree on every box of the affine hull of
    NS3; the representative kept is the smallest ``(input_mode, gamma, eta)``.
    """
    return [Wiring(m, g, e, first, second) for m, g, e in _full_keys()]


# a2 -> a2 + c + d*a1 for (c, d) in this order
_A2_MAPS = ((0, 0), (1, 0), (0, 1), (1, 1))


def relabel_orbit(w: Wiring) -> list:
    """Wirings obtained by substituting a2 -> a2+1 and a2 -> a2+a1 into eta."""
    tt = _eta_tt(w.eta)
    out = set()
    for c, d in _A2_MAPS:
        new = tuple(tt[(v & 6) | ((v & 1) ^ c ^ (d & (v >> 2)))] for v in range(8))
        out.add(Wiring(w.input_mode, w.gamma, table_to_anf(new), w.first, w.second))
    return sorted(out)


# ------------------------------------------------------------------- text

# (variable-set bit for a1, x1, a2) in printing order matching the tables
_ETA_ORDER = sorted(range(8), key=lambda v: ((v >> 1) & 1) * 4 + (v & 1) * 2 + (v >> 2))
_GAMMA_ORDER = (0, 2, 1, 3)
_ETA_NAMES = ("a1", "x1", "a2")
_GAMMA_NAMES = ("a1", "x1")


def _monomial(v: int, names) -> str:
    n = len(names)
    factors = [names[q] for q in range(n) if (v >> (n - 1 - q)) & 1]
    # tables write x1 last: "a1 a2 x1"
    factors.sort(key=lambda t: t[0] == "x")
    return " ".join(factors) if factors else "1"


def format_poly(coeffs, names) -> str:
    order = _ETA_ORDER if len(names) == 3 else _GAMMA_ORDER
    terms = [_monomial(v, names) for v in order if coeffs[v]]
    return "+".join(terms) if terms else "0"


_TOKEN = re.compile(r"\s*(a1|a2|x1|a_1|a_2|x_1|1|0|\+)")


def parse_poly(text: str, names=_ETA_NAMES, offset: int = 0) -> tuple:
    """GF(2) polynomial over ``names`` to an ANF coefficient tuple."""
    n = len(names)
    coeffs = [0] * (1 << n)
    pos = 0
    term_mask, term_zero, in_term = 0, False, False
    expect_factor = True

    def close(at):
        nonlocal term_mask, term_zero, in_term
        if not in_term:
            raise ParseError("empty term", position=offset + at)
        if not term_zero:
            coeffs[term_mask] ^= 1
        term_mask, term_zero, in_term = 0, False, False

    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected text {text[pos:].strip()[:8]!r}",
                             position=offset + pos + (len(text[pos:]) - len(text[pos:].lstrip())))
        tok = m.group(1).replace("_", "")
        start = m.start(1)
        if tok == "+":
            close(start)
            expect_factor = True
        else:
            if tok in ("0", "1"):
                term_zero = term_zero or tok == "0"
            else:
                if tok not in names:
                    raise ParseError(f"variable {tok} not allowed here", position=offset + start)
                term_mask |= 1 << (n - 1 - names.index(tok))
            in_term = True
            expect_factor = False
        pos = m.end()
    if expect_factor and not in_term:
        raise ParseError("expression ends without a term", position=offset + len(text))
    close(len(text))
    return tuple(coeffs)


def parse_wiring(text: str, first: int = 1, second: int = 2) -> Wiring:
    """Parse ``"x2=a1; out=a2+a1 a2 x1"`` (optional ``in=...`` clause).

    A bare polynomial is read as the output with the canonical x2 = a1.
    """
    gamma, eta, mode = CANONICAL_GAMMA, None, 0
    if "=" not in text:
        return Wiring(0, gamma, parse_poly(text), first, second)
    offset = 0
    for clause in text.split(";"):
        key, sep, body = clause.partition("=")
        at = offset + len(key) + 1
        name = key.strip().replace("_", "")
        if not sep:
            if clause.strip():
                raise ParseError("expected 'name=polynomial'", position=offset)
        elif name == "x2":
            gamma = parse_poly(body, _GAMMA_NAMES, at)
        elif name == "out":
            eta = parse_poly(body, _ETA_NAMES, at)
        elif name == "in":
            norm = " ".join(body.replace("_", "").split()).replace(" + ", "+").replace(" ", "")
            if norm not in INPUT_MODES:
                raise ParseError(f"input must be one of {', '.join(INPUT_MODES)}", position=at)
            mode = INPUT_MODES.index(norm)
        else:
            raise ParseError(f"unknown clause {key.strip()!r}", position=offset)
        offset += len(clause) + 1
    if eta is None:
        raise ParseError("missing 'out=' clause", position=len(text))
    return Wiring(mode, gamma, eta, first, second)


def format_wiring(w: Wiring) -> str:
    parts = [f"x2={format_poly(w.gamma, _GAMMA_NAMES)}", f"out={format_poly(w.eta, _ETA_NAMES)}"]
    if w.input_mode:
        parts.insert(0, f"in={INPUT_MODES[w.input_mode]}")
    return "; ".join(parts)
