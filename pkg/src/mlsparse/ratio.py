"""A-priori approximation guarantees for rounded and composite solutions.

With ``MIN_i`` the optimal single-level weights, the rounded cost for
``Q`` is at most ``sum_k g(i_{k+1} - 1) MIN_{i_k}`` and the optimum is at
least ``sum_i MIN_i`` (this lower bound needs ``g(i) - g(i-1) >= 1``,
which holds for ``g(i) = i``).  Normalizing ``sum_i MIN_i = 1`` and
taking the worst nonincreasing ``MIN`` gives the guarantees below.

Worst case for a single ``Q``
    Nonincreasing vectors summing to one are convex combinations of the
    staircases ``(1/h, ..., 1/h, 0, ..., 0)``, so the worst case is the
    largest staircase value, ``max_h sum_{k: i_k <= h} g(i_{k+1} - 1) / h``.
    Only ``h`` in ``Q`` can attain it.  (Taking the minimum over ``h``
    instead would give 1 for ``Q = {1..l}``, below the ``(l+1)/2``
    worst case that the same vector ``MIN = (1/l, ...)`` exhibits.)

Composite guarantee
    ``t_l = max t`` subject to ``t <= sum_k g(i_{k+1} - 1) y_{i_k}`` for all
    ``Q`` and ``y`` nonincreasing, nonnegative with unit sum.  Written
    over staircase weights ``z_h >= 0`` this is an LP with ``l + 1``
    columns and one row per ``Q``; rows are generated lazily by pricing
    with :func:`~mlsparse.multilevel.best_q`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .graph import as_exact
from .multilevel import LevelCostFn, Quantizer, best_q

__all__ = [
    "single_q_guarantee",
    "composite_guarantee",
    "GuaranteeReport",
    "base_b_ratio",
    "staircase_coefficients",
    "RationalLP",
    "EXACT_MAX_ELL",
]

EXACT_MAX_ELL = 64
_FLOAT_TOL = 1e-9


def staircase_coefficients(Q, gfn):
    """``c_Q(h)`` for ``h = 1..l``: the ``Q`` objective at staircase ``h``."""
    contrib = dict(zip(Q.levels, Q.block_tops()))
    out = []
    acc = 0
    for h in range(1, Q.ell + 1):
        if h in contrib:
            acc += gfn(contrib[h])
        out.append(Fraction(acc) / h)
    return out


def single_q_guarantee(Q, gfn=None):
    """Worst-case ratio of the rounded solution for ``Q`` (oracle subroutine)."""
    gfn = gfn or LevelCostFn.linear()
    val = max(staircase_coefficients(Q, gfn))
    return val.numerator if val.denominator == 1 else val


def base_b_ratio(b):
    """``b^2 / (b - 1)``: the ``A * B`` product of base-``b`` rounding."""
    b = as_exact(b)
    if b <= 1:
        raise ValueError(f"base must exceed 1, got {b}")
    r = Fraction(b) ** 2 / (b - 1)
    return r.numerator if r.denominator == 1 else r


# -- exact simplex --------------------------------------------------------------------


class RationalLP:
    """``max c.x`` s.t. ``A x <= b``, ``x >= 0``, ``b >= 0`` in exact arithmetic.

    Dense tableau with Bland's rule.  :meth:`add_row` appends a
    constraint and restores optimality with dual simplex pivots, so
    constraint generation never restarts from scratch.
    """

    def __init__(self, c):
        self.n = len(c)
        self.rows = []  # each row: list over all columns (structural + slacks)
        self.rhs = []
        self.basis = []
        self.obj = [-Fraction(x) for x in c]  # reduced costs, max form
        self.value = Fraction(0)
        self.pivots = 0

    @property
    def ncols(self):
        return len(self.obj)

    def add_row(self, coefs, rhs, *, solve=True):
        coefs = [Fraction(x) for x in coefs]
        for row in self.rows:
            row.append(Fraction(0))
        self.obj.append(Fraction(0))
        new = coefs + [Fraction(0)] * (self.ncols - self.n - 1) + [Fraction(1)]
        rhs = Fraction(rhs)
        for r, bvar in enumerate(self.basis):
            a = new[bvar]
            if a:
                row = self.rows[r]
                new = [x - a * y for x, y in zip(new, row)]
                rhs -= a * self.rhs[r]
        self.rows.append(new)
        self.rhs.append(rhs)
        self.basis.append(self.ncols - 1)
        if solve:
            self.optimize()

    def optimize(self):
        if any(r < 0 for r in self.rhs):
            self._dual()
        self._primal()

    def _pivot(self, r, j):
        row = self.rows[r]
        p = row[j]
        row = [x / p for x in row]
        rhs = self.rhs[r] / p
        self.rows[r], self.rhs[r] = row, rhs
        for k in range(len(self.rows)):
            if k == r:
                continue
            a = self.rows[k][j]
            if a:
                self.rows[k] = [x - a * y for x, y in zip(self.rows[k], row)]
                self.rhs[k] -= a * rhs
        a = self.obj[j]
        if a:
            self.obj = [x - a * y for x, y in zip(self.obj, row)]
            self.value -= a * rhs
        self.basis[r] = j
        self.pivots += 1

    def _primal(self):
        while True:
            enter = next((j for j, d in enumerate(self.obj) if d < 0), None)
            if enter is None:
                return
            best = None
            for r, row in enumerate(self.rows):
                a = row[enter]
                if a > 0:
                    key = (self.rhs[r] / a, self.basis[r])
                    if best is None or key < best[0]:
                        best = (key, r)
            if best is None:
                raise ArithmeticError("unbounded LP")
            self._pivot(best[1], enter)

    def _dual(self):
        while True:
            cands = [(self.basis[r], r) for r in range(len(self.rows)) if self.rhs[r] < 0]
            if not cands:
                return
            _, r = min(cands)
            row = self.rows[r]
            best = None
            for j, a in enumerate(row):
                if a < 0:
                    key = (self.obj[j] / -a, j)
                    if best is None or key < best[0]:
                        best = (key, j)
            if best is None:
                raise ArithmeticError("infeasible LP")
            self._pivot(r, best[1])

    def solution(self):
        x = [Fraction(0)] * self.n
        for r, bvar in enumerate(self.basis):
            if bvar < self.n:
                x[bvar] = self.rhs[r]
        return x


# -- composite guarantee --------------------------------------------------------------


@dataclass
class GuaranteeReport:
    """Composite guarantee ``t_l`` with its worst-case vector.

    ``s`` is the single-level approximation factor of the subroutine;
    :attr:`scaled` multiplies it in, ``t`` never includes it.
    """

    ell: int
    g: str
    t: object
    y: tuple
    exact: bool
    per_q: dict = field(default_factory=dict)
    active: tuple = ()
    iterations: int = 0
    s: object = 1

    @property
    def scaled(self):
        return self.t * self.s

    def as_float(self):
        return float(self.t)


def _staircase_to_y(z, ell):
    y = [Fraction(0)] * ell if isinstance(z[0], Fraction) else [0.0] * ell
    for h in range(1, ell + 1):
        if z[h - 1]:
            share = z[h - 1] / h
            for i in range(h):
                y[i] += share
    return y


def composite_guarantee(ell, gfn=None, *, exact=None, s=1, max_iter=10000):
    """Worst-case ratio ``t_l`` of the composite algorithm.

    Constraint generation seeded with ``Q = {1}`` and ``Q = {1..l}``: solve
    the restricted LP, price the cheapest ``Q`` for the current worst
    vector with the shortest-path dynamic program, stop when no ``Q``
    undercuts ``t``.

    The rows are generated with HiGHS.  For ``l <= 64`` (or
    ``exact=True``) the final basis is then solved in rational
    arithmetic and certified: the primal point is priced exactly against
    every ``Q`` and a nonnegative dual combination of the tight rows
    bounds every staircase by ``t``.  If the certificate cannot be built
    (degenerate basis) the rational simplex finishes the job.
    """
    if ell < 1:
        raise ValueError("ell must be >= 1")
    gfn = gfn or LevelCostFn.linear()
    if exact is None:
        exact = ell <= EXACT_MAX_ELL
    seeds = [Quantizer((1,), ell), Quantizer.top_down(ell)]
    t, z, active, it, duals = _generate_float(ell, gfn, seeds, max_iter)
    if exact:
        cert = _certify(ell, gfn, active, z, t, duals)
        if cert is not None:
            t_exact, y = cert
            report = GuaranteeReport(ell, str(gfn), _norm(t_exact), tuple(_norm(v) for v in y), True)
        else:
            report = _generate_exact(ell, gfn, active, max_iter)
    else:
        report = GuaranteeReport(ell, str(gfn), t, tuple(_staircase_to_y(z, ell)), False)
    report.active = tuple(q.levels for q in active)
    report.iterations = it
    report.s = as_exact(s)
    report.per_q = {
        "bu": single_q_guarantee(Quantizer.bottom_up(ell), gfn),
        "td": single_q_guarantee(Quantizer.top_down(ell), gfn),
        "powers2": single_q_guarantee(Quantizer.powers_of_two(ell), gfn),
    }
    return report


def _norm(x):
    if isinstance(x, Fraction) and x.denominator == 1:
        return x.numerator
    return x


def _generate_exact(ell, gfn, seeds, max_iter):
    # columns: z_1..z_l, t ; maximize t
    lp = RationalLP([0] * ell + [1])
    lp.add_row([1] * ell + [0], 1, solve=False)
    active = []
    for Q in seeds:
        if Q not in active:
            active.append(Q)
            lp.add_row([-c for c in staircase_coefficients(Q, gfn)] + [1], 0, solve=False)
    lp.optimize()
    for it in range(1, max_iter + 1):
        x = lp.solution()
        z, t = x[:ell], x[ell]
        y = _staircase_to_y(z, ell)
        Q, val = best_q(y, gfn)
        if val >= t or Q in active:
            return GuaranteeReport(ell, str(gfn), _norm(t), tuple(_norm(v) for v in y), True, iterations=it)
        active.append(Q)
        lp.add_row([-c for c in staircase_coefficients(Q, gfn)] + [1], 0)
    raise ArithmeticError("constraint generation did not converge")


def _generate_float(ell, gfn, seeds, max_iter):
    from scipy.optimize import linprog

    active = list(dict.fromkeys(seeds))
    rows = [[-float(c) for c in staircase_coefficients(Q, gfn)] + [1.0] for Q in active]
    cost = np.zeros(ell + 1)
    cost[-1] = -1.0
    for it in range(1, max_iter + 1):
        A = np.array(rows + [[1.0] * ell + [0.0]])
        b = np.zeros(len(rows) + 1)
        b[-1] = 1.0
        res = linprog(cost, A_ub=A, b_ub=b, bounds=[(0, None)] * (ell + 1), method="highs")
        if res.status != 0:
            raise ArithmeticError(f"LP solve failed: {res.message}")
        z = [max(0.0, float(v)) for v in res.x[:ell]]
        t = float(res.x[ell])
        Q, val = best_q(_staircase_to_y(z, ell), gfn)
        if float(val) >= t - _FLOAT_TOL or Q in active:
            duals = [-float(v) for v in res.ineqlin.marginals[: len(active)]]
            return t, z, active, it, duals
        active.append(Q)
        rows.append([-float(c) for c in staircase_coefficients(Q, gfn)] + [1.0])
    raise ArithmeticError("constraint generation did not converge")


def _solve_linear(A, b):
    """Unique exact solution of ``A x = b`` (rectangular allowed), else ``None``."""
    rows = [list(map(Fraction, r)) + [Fraction(v)] for r, v in zip(A, b)]
    ncol = len(A[0]) if A else 0
    piv_cols = []
    r = 0
    for c in range(ncol):
        p = next((k for k in range(r, len(rows)) if rows[k][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        pv = rows[r][c]
        rows[r] = [x / pv for x in rows[r]]
        for k in range(len(rows)):
            if k != r and rows[k][c] != 0:
                a = rows[k][c]
                rows[k] = [x - a * y for x, y in zip(rows[k], rows[r])]
        piv_cols.append(c)
        r += 1
    if r < ncol:
        return None
    if any(row[-1] != 0 for row in rows[r:]):
        return None
    x = [Fraction(0)] * ncol
    for k, c in enumerate(piv_cols):
        x[c] = rows[k][-1]
    return x


def _certify(ell, gfn, active, z_float, t_float, duals, tol=1e-7):
    """Exact optimum of the generated LP with a duality certificate, or ``None``."""
    coef = {Q: staircase_coefficients(Q, gfn) for Q in active}
    support = [h for h in range(ell) if z_float[h] > tol]
    tight = [Q for Q in active if abs(t_float - sum(float(c) * z for c, z in zip(coef[Q], z_float))) <= tol]
    if not support or not tight:
        return None
    # primal: c_Q[S] . z_S - t = 0 on tight rows, sum z_S = 1
    A = [[coef[Q][h] for h in support] + [-1] for Q in tight] + [[1] * len(support) + [0]]
    b = [0] * len(tight) + [1]
    sol = _solve_linear(A, b)
    if sol is None or any(v < 0 for v in sol[:-1]):
        return None
    t = sol[-1]
    z = [Fraction(0)] * ell
    for h, v in zip(support, sol):
        z[h] = v
    y = _staircase_to_y(z, ell)
    _, val = best_q(y, gfn)
    if val < t:
        return None
    # dual: lambda >= 0 on the rows HiGHS priced, sum 1,
    # sum_Q lambda_Q c_Q(h) = t on the support
    priced = [Q for Q, d in zip(active, duals) if d > tol]
    if not priced:
        return None
    A = [[coef[Q][h] for Q in priced] for h in support] + [[1] * len(priced)]
    b = [t] * len(support) + [1]
    lam = _solve_linear(A, b)
    if lam is None or any(v < 0 for v in lam):
        return None
    for h in range(ell):
        if sum(l * coef[Q][h] for l, Q in zip(lam, priced)) > t:
            return None
    return t, y


def guarantee_table(ells, gfn=None):
    """``[(l, t_l), ...]`` for the requested levels."""
    return [(ell, composite_guarantee(ell, gfn).t) for ell in ells]


def format_value(x, digits=6):
    """``4/3`` for exact rationals, fixed decimals for floats."""
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if math.isfinite(x):
        return f"{x:.{digits}f}"
    return str(x)
