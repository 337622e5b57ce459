"""Exact rational linear programming.

Problems are stated over named variables with exact rational data. Solving
goes through an internal standard form ``min c.x, A x = b, x >= 0, b >= 0``.
A floating-point HiGHS solve proposes a basis; the basis is then verified in
exact arithmetic (python-flint). When verification fails, an exact revised
simplex with Bland's rule takes over, so every returned number is exact and
every result carries a certificate that :func:`check_certificate` re-checks
against the original problem.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import MalformedProblem

log = logging.getLogger(__name__)

SENSES = ("==", "<=", ">=")
ZERO = Fraction(0)

# problems with more than this many (rows x columns) get a float warm start
AUTO_WARM_START = 4000

# every solve re-checks its own certificate; counts are kept for reporting
STATS = {"solves": 0, "verified": 0}


class CertificateError(RuntimeError):
    """A returned certificate failed exact re-verification."""


@dataclass
class LPProblem:
    """A linear program over named variables.

    ``sense`` is ``"min"``, ``"max"`` or ``None`` for pure feasibility.
    Constraints are ``(coeffs, op, rhs)`` with ``coeffs`` mapping variable
    index to a rational.
    """

    sense: Optional[str] = None
    names: list = field(default_factory=list)
    free: list = field(default_factory=list)
    constraints: list = field(default_factory=list)
    objective: dict = field(default_factory=dict)

    def add_var(self, name: str, free: bool = False) -> int:
        self.names.append(name)
        self.free.append(free)
        return len(self.names) - 1

    def add_vars(self, names: Iterable[str], free: bool = False) -> list:
        return [self.add_var(n, free) for n in names]

    def add_constraint(self, coeffs: Mapping, op: str, rhs=0) -> int:
        if op not in SENSES:
            raise MalformedProblem(f"unknown constraint sense {op!r}")
        row = {}
        for j, v in coeffs.items():
            v = Fraction(v)
            if v:
                row[j] = row.get(j, ZERO) + v
        self.constraints.append(({j: v for j, v in row.items() if v}, op, Fraction(rhs)))
        return len(self.constraints) - 1

    def set_objective(self, coeffs: Mapping, sense: str):
        if sense not in ("min", "max"):
            raise MalformedProblem(f"objective sense must be min or max, not {sense!r}")
        self.sense = sense
        self.objective = {j: Fraction(v) for j, v in coeffs.items() if v}

    @property
    def num_vars(self) -> int:
        return len(self.names)

    def validate(self):
        n = self.num_vars
        if len(self.free) != n:
            raise MalformedProblem("free flags do not match variable count")
        if self.sense not in (None, "min", "max"):
            raise MalformedProblem(f"bad sense {self.sense!r}")
        for coeffs, op, rhs in self.constraints:
            if op not in SENSES:
                raise MalformedProblem(f"bad constraint sense {op!r}")
            for j, v in coeffs.items():
                if not (isinstance(j, int) and 0 <= j < n):
                    raise MalformedProblem(f"constraint references unknown variable {j!r}")
                if not isinstance(v, Fraction):
                    raise MalformedProblem("coefficients must be exact rationals")
            if not isinstance(rhs, Fraction):
                raise MalformedProblem("right-hand sides must be exact rationals")
        for j, v in self.objective.items():
            if not (isinstance(j, int) and 0 <= j < n):
                raise MalformedProblem(f"objective references unknown variable {j!r}")


@dataclass
class LPResult:
    """Outcome of :func:`solve`.

    For ``optimal`` results ``x`` is a primal optimum and ``dual`` has one
    multiplier per constraint; optimality holds because the dual is feasible
    and ``b.dual == optimum``. For ``infeasible`` results ``dual`` is a Farkas
    ray. For ``unbounded`` results ``x`` is feasible and ``ray`` improves the
    objective without bound. ``method`` records how the basis was found.
    """

    status: str
    optimum: Optional[Fraction] = None
    x: Optional[list] = None
    dual: Optional[list] = None
    ray: Optional[list] = None
    method: str = ""
    pivots: int = 0

    @property
    def feasible(self) -> bool:
        return self.status in ("optimal", "unbounded")

    def value(self, j: int) -> Fraction:
        return self.x[j]


# ------------------------------------------------------------- standard form

class _Standard:
    """``min c.x  s.t.  A x = b, x >= 0`` with ``b >= 0``.

    Columns are sparse dicts. ``origin[k]`` tells how standard column ``k``
    maps back: ``("var", j, +1/-1)`` or ``("slack", i)``.
    """

    def __init__(self, p: LPProblem):
        m = len(p.constraints)
        cols, cost, origin = [], [], []
        obj_sign = -1 if p.sense == "max" else 1
        by_var = [dict() for _ in range(p.num_vars)]
        for i, (coeffs, _, _) in enumerate(p.constraints):
            for j, v in coeffs.items():
                by_var[j][i] = v
        for j in range(p.num_vars):
            c = obj_sign * p.objective.get(j, ZERO)
            cols.append(dict(by_var[j]))
            cost.append(c)
            origin.append(("var", j, 1))
            if p.free[j]:
                cols.append({i: -v for i, v in by_var[j].items()})
                cost.append(-c)
                origin.append(("var", j, -1))
        for i, (_, op, _) in enumerate(p.constraints):
            if op != "==":
                cols.append({i: Fraction(1 if op == "<=" else -1)})
                cost.append(ZERO)
                origin.append(("slack", i))
        flip = [-1 if rhs < 0 else 1 for _, _, rhs in p.constraints]
        for col in cols:
            for i in col:
                if flip[i] < 0:
                    col[i] = -col[i]
        self.m = m
        self.n = len(cols)
        self.cols = cols
        self.cost = cost
        self.b = [f * rhs for f, (_, _, rhs) in zip(flip, p.constraints)]
        self.flip = flip
        self.origin = origin
        self.obj_sign = obj_sign

    def to_original_x(self, p: LPProblem, xs: Sequence[Fraction]) -> list:
        x = [ZERO] * p.num_vars
        for k, org in enumerate(self.origin):
            if org[0] == "var" and xs[k]:
                x[org[1]] += org[2] * xs[k]
        return x

    def to_original_y(self, ys: Sequence[Fraction], stated_sense: bool) -> list:
        # standard duals belong to the min form; flip back rows and objective
        s = self.obj_sign if stated_sense else 1
        return [s * f * y for f, y in zip(self.flip, ys)]


# ------------------------------------------------------------ exact simplex

class _Simplex:
    """Revised simplex over Fractions with Bland's rule.

    ``B^-1`` is kept as sparse dict rows. Artificial column ``n + i`` is the
    unit vector of row ``i``; once phase 1 is over an artificial may stay
    basic at value zero but is never allowed to move off zero.
    """

    def __init__(self, st: _Standard, basis=None, binv=None, xb=None):
        self.st = st
        self.m, self.n = st.m, st.n
        if basis is None:
            self.basis = [self.n + i for i in range(self.m)]
            self.binv = [{i: Fraction(1)} for i in range(self.m)]
            self.xb = list(st.b)
        else:
            self.basis, self.binv, self.xb = basis, binv, xb
        self.pivots = 0

    def column(self, k):
        if k >= self.n:
            return {k - self.n: Fraction(1)}
        return self.st.cols[k]

    def ftran(self, col):
        u = []
        for row in self.binv:
            s = ZERO
            if len(row) < len(col):
                for i, v in row.items():
                    a = col.get(i)
                    if a is not None:
                        s += v * a
            else:
                for i, a in col.items():
                    v = row.get(i)
                    if v is not None:
                        s += v * a
            u.append(s)
        return u

    def duals(self, cost_of):
        y = {}
        for r, k in enumerate(self.basis):
            c = cost_of(k)
            if c:
                for i, v in self.binv[r].items():
                    y[i] = y.get(i, ZERO) + c * v
        return y

    def reduced(self, k, y, cost_of):
        d = cost_of(k)
        for i, a in self.column(k).items():
            yi = y.get(i)
            if yi:
                d -= yi * a
        return d

    def pivot(self, r, u):
        piv = u[r]
        prow = {i: v / piv for i, v in self.binv[r].items()}
        self.binv[r] = prow
        xr = self.xb[r] / piv
        self.xb[r] = xr
        for q, uq in enumerate(u):
            if q == r or not uq:
                continue
            row = self.binv[q]
            for i, v in prow.items():
                nv = row.get(i, ZERO) - uq * v
                if nv:
                    row[i] = nv
                else:
                    row.pop(i, None)
            self.xb[q] -= uq * xr
        self.pivots += 1

    def run(self, cost_of, pinned: bool):
        """Iterate to optimality. Returns ("optimal", y) or ("unbounded", k, u).

        Artificial columns never enter. With ``pinned`` set, basic artificials
        are held at zero (phase 2).
        """
        n_total = self.n
        while True:
            y = self.duals(cost_of)
            in_basis = set(self.basis)
            enter = None
            for k in range(n_total):
                if k in in_basis:
                    continue
                if self.reduced(k, y, cost_of) < 0:
                    enter = k
                    break
            if enter is None:
                return ("optimal", y)
            u = self.ftran(self.column(enter))
            best = None
            for r, ur in enumerate(u):
                if not ur:
                    continue
                if pinned and self.basis[r] >= self.n:
                    # artificial pinned at zero: leaves at ratio 0 whatever the sign
                    ratio = ZERO
                elif ur > 0:
                    ratio = self.xb[r] / ur
                else:
                    continue
                key = (ratio, self.basis[r])
                if best is None or key < best[0]:
                    best = (key, r)
            if best is None:
                return ("unbounded", enter, u)
            self.pivot(best[1], u)
            self.basis[best[1]] = enter


def _phase1_cost(n):
    return lambda k: Fraction(1) if k >= n else ZERO


def _exact_cold(st: _Standard):
    """Two-phase Bland simplex from the all-artificial basis."""
    sx = _Simplex(st)
    status = sx.run(_phase1_cost(st.n), pinned=False)
    infeas = sum((v for k, v in zip(sx.basis, sx.xb) if k >= st.n), ZERO)
    if infeas > 0:
        y = status[1]
        return "infeasible", sx, [y.get(i, ZERO) for i in range(st.m)]
    return _phase2(sx)


def _phase2(sx: _Simplex):
    st = sx.st
    cost_of = lambda k: st.cost[k] if k < st.n else ZERO  # noqa: E731
    status = sx.run(cost_of, pinned=True)
    if status[0] == "unbounded":
        _, enter, u = status
        ray = [ZERO] * st.n
        ray[enter] = Fraction(1)
        for r, k in enumerate(sx.basis):
            if k < st.n and u[r]:
                ray[k] = -u[r]
        return "unbounded", sx, ray
    y = status[1]
    return "optimal", sx, [y.get(i, ZERO) for i in range(st.m)]


def _primal_from(sx: _Simplex):
    x = [ZERO] * sx.n
    for k, v in zip(sx.basis, sx.xb):
        if k < sx.n:
            x[k] = v
    return x


# --------------------------------------------------------------- warm start

def _highs_basis(st: _Standard, cost, presolve=True):
    """Float solve of the standard form; returns (status, basic column list)."""
    import highspy

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("threads", 1)
    h.setOptionValue("random_seed", 0)
    h.setOptionValue("solver", "simplex")
    h.setOptionValue("presolve", "on" if presolve else "off")
    lp = highspy.HighsLp()
    lp.num_col_ = st.n
    lp.num_row_ = st.m
    lp.col_cost_ = np.array([float(c) for c in cost], dtype=np.float64)
    lp.col_lower_ = np.zeros(st.n)
    lp.col_upper_ = np.full(st.n, highspy.kHighsInf)
    bf = np.array([float(v) for v in st.b], dtype=np.float64)
    lp.row_lower_ = bf
    lp.row_upper_ = bf
    starts, index, value = [0], [], []
    for col in st.cols:
        for i in sorted(col):
            index.append(i)
            value.append(float(col[i]))
        starts.append(len(index))
    lp.a_matrix_.format_ = highspy.MatrixFormat.kColwise
    lp.a_matrix_.start_ = np.array(starts, dtype=np.int32)
    lp.a_matrix_.index_ = np.array(index, dtype=np.int32)
    lp.a_matrix_.value_ = np.array(value, dtype=np.float64)
    lp.a_matrix_.num_col_ = st.n
    lp.a_matrix_.num_row_ = st.m
    h.passModel(lp)
    h.run()
    ms = h.getModelStatus()
    name = {highspy.HighsModelStatus.kOptimal: "optimal",
            highspy.HighsModelStatus.kInfeasible: "infeasible",
            highspy.HighsModelStatus.kUnbounded: "unbounded",
            highspy.HighsModelStatus.kUnboundedOrInfeasible: "unknown"}.get(ms, "unknown")
    if name != "optimal":
        return name, None
    basis = h.getBasis()
    if not basis.valid:
        return "unknown", None
    basic = [k for k, s in enumerate(basis.col_status) if s == highspy.HighsBasisStatus.kBasic]
    basic += [st.n + i for i, s in enumerate(basis.row_status)
              if s == highspy.HighsBasisStatus.kBasic]
    if len(basic) != st.m:
        return "unknown", None
    return name, basic


def _verify_basis(st: _Standard, basic, cost_of, n_priced):
    """Exact check of a proposed basis.

    Returns (x, y) when the basis is primal feasible (artificials at zero)
    and dual feasible over the first ``n_priced`` columns, else None.
    """
    from flint import fmpq, fmpq_mat

    m = st.m
    if m == 0:
        return [ZERO] * st.n, []
    entries = [[0] * m for _ in range(m)]
    for c, k in enumerate(basic):
        if k >= st.n:
            entries[k - st.n][c] = 1
        else:
            for i, v in st.cols[k].items():
                entries[i][c] = fmpq(v.numerator, v.denominator)
    B = fmpq_mat(entries)
    rhs = fmpq_mat(m, 1, [fmpq(v.numerator, v.denominator) for v in st.b])
    try:
        xb = B.solve(rhs)
    except ZeroDivisionError:
        return None
    xbf = [Fraction(int(xb[i, 0].p), int(xb[i, 0].q)) for i in range(m)]
    for k, v in zip(basic, xbf):
        if v < 0 or (k >= st.n and v != 0):
            return None
    cb = [cost_of(k) for k in basic]
    cbm = fmpq_mat(m, 1, [fmpq(v.numerator, v.denominator) for v in cb])
    yv = B.transpose().solve(cbm)
    y = [Fraction(int(yv[i, 0].p), int(yv[i, 0].q)) for i in range(m)]
    for k in range(n_priced):
        d = cost_of(k)
        for i, a in st.cols[k].items():
            if y[i]:
                d -= y[i] * a
        if d < 0:
            return None
    x = [ZERO] * st.n
    for k, v in zip(basic, xbf):
        if k < st.n:
            x[k] = v
    return x, y


def _warm(st: _Standard):
    """Try to settle the problem from a HiGHS basis. Returns a tuple or None."""
    cost_of = lambda k: st.cost[k] if k < st.n else ZERO  # noqa: E731
    for presolve in (True, False):
        status, basic = _highs_basis(st, st.cost, presolve)
        if status == "optimal":
            got = _verify_basis(st, basic, cost_of, st.n)
            if got is not None:
                return "optimal", got[0], got[1], None, f"highs+exact(presolve={presolve})"
        elif status == "infeasible":
            # phase-1 problem: artificials appended as real columns of cost 1
            aux = _Standard.__new__(_Standard)
            aux.m, aux.b = st.m, st.b
            aux.cols = st.cols + [{i: Fraction(1)} for i in range(st.m)]
            aux.n = st.n + st.m
            aux.cost = [ZERO] * st.n + [Fraction(1)] * st.m
            s2, basic2 = _highs_basis(aux, aux.cost, presolve)
            if s2 == "optimal":
                got = _verify_basis(aux, basic2, lambda k: aux.cost[k] if k < aux.n else ZERO,
                                    aux.n)
                if got is not None:
                    x, y = got
                    if sum(x[st.n:], ZERO) > 0:
                        return "infeasible", None, y, None, f"highs+exact(presolve={presolve})"
        else:
            break
    return None


# -------------------------------------------------------------------- solve

def solve(p: LPProblem, warm_start="auto") -> LPResult:
    """Solve exactly. ``warm_start`` is True, False or "auto".

    The result is re-checked with :func:`check_certificate` before returning.
    """
    r = _solve(p, warm_start)
    STATS["solves"] += 1
    if not check_certificate(p, r):
        raise CertificateError(f"{r.status} certificate from {r.method} failed re-verification")
    STATS["verified"] += 1
    return r


def _solve(p: LPProblem, warm_start) -> LPResult:
    p.validate()
    st = _Standard(p)
    if warm_start == "auto":
        warm_start = st.m * st.n > AUTO_WARM_START
    settled = _warm(st) if warm_start and st.m else None
    if settled is not None:
        status, xs, ys, ray, method = settled
        pivots = 0
    else:
        status, sx, extra = _exact_cold(st)
        method, pivots = "exact-bland", sx.pivots
        xs = _primal_from(sx)
        ys, ray = (extra, None) if status != "unbounded" else (None, extra)
    if status == "optimal":
        x = st.to_original_x(p, xs)
        opt = sum((c * x[j] for j, c in p.objective.items()), ZERO) if p.sense else ZERO
        return LPResult("optimal", opt, x, st.to_original_y(ys, True), None, method, pivots)
    if status == "infeasible":
        return LPResult("infeasible", None, None, st.to_original_y(ys, False), None,
                        method, pivots)
    return LPResult("unbounded", None, st.to_original_x(p, xs), None,
                    st.to_original_x(p, ray), method, pivots)


# -------------------------------------------------------------- certificates

def _row_value(coeffs, x):
    return sum((v * x[j] for j, v in coeffs.items()), ZERO)


def _primal_ok(p: LPProblem, x) -> bool:
    if x is None or len(x) != p.num_vars:
        return False
    for j, v in enumerate(x):
        if not isinstance(v, Fraction) or (not p.free[j] and v < 0):
            return False
    for coeffs, op, rhs in p.constraints:
        lhs = _row_value(coeffs, x)
        if op == "==" and lhs != rhs or op == "<=" and lhs > rhs or op == ">=" and lhs < rhs:
            return False
    return True


def _transpose_apply(p: LPProblem, y):
    at = [ZERO] * p.num_vars
    for (coeffs, _, _), yi in zip(p.constraints, y):
        if yi:
            for j, v in coeffs.items():
                at[j] += yi * v
    return at


def check_certificate(p: LPProblem, r: LPResult) -> bool:
    """Re-verify a result against the original problem, exactly."""
    try:
        p.validate()
    except MalformedProblem:
        return False
    m = len(p.constraints)
    if r.status == "optimal":
        if not _primal_ok(p, r.x) or r.dual is None or len(r.dual) != m:
            return False
        if not p.sense:
            return r.optimum == 0
        value = sum((c * r.x[j] for j, c in p.objective.items()), ZERO)
        if value != r.optimum:
            return False
        # work in min form: objective s*c, dual s*y
        s = -1 if p.sense == "max" else 1
        y = [s * v for v in r.dual]
        for (_, op, _), yi in zip(p.constraints, y):
            if op == "<=" and yi > 0 or op == ">=" and yi < 0:
                return False
        at = _transpose_apply(p, y)
        for j in range(p.num_vars):
            c = s * p.objective.get(j, ZERO)
            if p.free[j] and at[j] != c or not p.free[j] and at[j] > c:
                return False
        dual_value = sum((yi * rhs for yi, (_, _, rhs) in zip(y, p.constraints)), ZERO)
        return dual_value == s * value
    if r.status == "infeasible":
        y = r.dual
        if y is None or len(y) != m:
            return False
        for (_, op, _), yi in zip(p.constraints, y):
            if op == "<=" and yi > 0 or op == ">=" and yi < 0:
                return False
        at = _transpose_apply(p, y)
        for j in range(p.num_vars):
            if p.free[j] and at[j] != 0 or not p.free[j] and at[j] > 0:
                return False
        return sum((yi * rhs for yi, (_, _, rhs) in zip(y, p.constraints)), ZERO) > 0
    if r.status == "unbounded":
        if not p.sense or not _primal_ok(p, r.x) or r.ray is None:
            return False
        d = r.ray
        for j, v in enumerate(d):
            if not p.free[j] and v < 0:
                return False
        for coeffs, op, _ in p.constraints:
            lhs = _row_value(coeffs, d)
            if op == "==" and lhs != 0 or op == "<=" and lhs > 0 or op == ">=" and lhs < 0:
                return False
        gain = sum((c * d[j] for j, c in p.objective.items()), ZERO)
        return gain > 0 if p.sense == "max" else gain < 0
    return False


# ---------------------------------------------------------------------- dump

def dump(p: LPProblem) -> str:
    """Plain-text rendering with exact rationals and variable names.

    ::

        maximize: 1 x + -2 y
        c0: 1 x + 1 y <= 3
        free: y
    """
    def term(coeffs):
        if not coeffs:
            return "0"
        return " + ".join(f"{v} {p.names[j]}" for j, v in sorted(coeffs.items()))

    head = {"max": "maximize", "min": "minimize", None: "feasibility"}[p.sense]
    lines = [f"{head}: {term(p.objective)}" if p.sense else "feasibility"]
    for i, (coeffs, op, rhs) in enumerate(p.constraints):
        lines.append(f"c{i}: {term(coeffs)} {op} {rhs}")
    free = [p.names[j] for j in range(p.num_vars) if p.free[j]]
    if free:
        lines.append("free: " + " ".join(free))
    return "\n".join(lines) + "\n"
