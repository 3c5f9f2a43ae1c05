"""Dense bounded-variable primal simplex for small linear programs.

Problems are stated as::

    minimize / maximize   c . x
    subject to            a_i . x  (<= | = | >=)  b_i
                          lo_j <= x_j <= hi_j

Bounds may be infinite (``None``, ``-inf`` or ``inf``).  The solver is a
two-phase tableau simplex that keeps nonbasic variables at either bound, so
box constraints never become rows.  Pricing is Dantzig's rule; after
``BLAND_AFTER`` pivots it switches to Bland's rule to rule out cycling.

Several objectives over one feasible region can share a single phase 1
(:func:`solve_lp_multi`).
"""

import copy
import math
from dataclasses import dataclass

import numpy as np

from .errors import MalformedProgramError, NumericalFailureError

INF = 1e30
FEAS_TOL = 1e-8
PIVOT_TOL = 1e-10
OPT_TOL = 1e-10
BOUND_TOL = 1e-10
MAX_PIVOTS = 10_000
BLAND_AFTER = 500

RELATIONS = ("<=", "=", ">=")
_REL_CODE = {"<=": -1, "=": 0, ">=": 1}

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class Constraint:
    row: tuple
    relation: str
    rhs: float


def _as_bound(v, default):
    if v is None:
        return default
    v = float(v)
    if v >= INF:
        return math.inf
    if v <= -INF:
        return -math.inf
    return v


class LinearProgram:
    """An LP in the row form of the module docstring.

    ``constraints`` holds :class:`Constraint` objects or ``(row, relation,
    rhs)`` triples; ``bounds`` holds ``(lo, hi)`` pairs and defaults to
    ``x >= 0``.
    """

    def __init__(self, objective, sense="min", constraints=(), bounds=None):
        objective = np.asarray(objective, dtype=float).ravel()
        cons = [c if isinstance(c, Constraint) else Constraint(*c) for c in constraints]
        n = objective.size
        for c in cons:
            if np.size(c.row) != n:
                raise MalformedProgramError(f"constraint row has length {np.size(c.row)}, expected {n}")
        a = np.array([np.asarray(c.row, dtype=float) for c in cons]).reshape(len(cons), n)
        self._init(objective, sense, a, [c.relation for c in cons], [c.rhs for c in cons], bounds)

    @classmethod
    def from_arrays(cls, objective, sense, a, relations, rhs, bounds=None):
        """Build from a dense constraint matrix and one relation string per row."""
        p = cls.__new__(cls)
        objective = np.asarray(objective, dtype=float).ravel()
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[1] != objective.size:
            raise MalformedProgramError(f"constraint matrix shape {a.shape} does not match {objective.size} variables")
        p._init(objective, sense, a, list(relations), list(rhs), bounds)
        return p

    def _init(self, objective, sense, a, relations, rhs, bounds):
        n = objective.size
        if n < 1:
            raise MalformedProgramError("program needs at least one variable")
        if sense not in ("min", "max"):
            raise MalformedProgramError(f"sense must be 'min' or 'max', got {sense!r}")
        if not np.all(np.isfinite(objective)):
            raise MalformedProgramError("objective has non-finite coefficients")
        if len(relations) != a.shape[0] or len(rhs) != a.shape[0]:
            raise MalformedProgramError("relations/rhs do not match the number of rows")
        for r in relations:
            if r not in RELATIONS:
                raise MalformedProgramError(f"unknown relation {r!r}")
        rhs = np.asarray(rhs, dtype=float).reshape(-1)
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(rhs))):
            raise MalformedProgramError("constraint has non-finite entries")
        if bounds is None:
            bounds = [(0.0, math.inf)] * n
        if len(bounds) != n:
            raise MalformedProgramError(f"{len(bounds)} bounds for {n} variables")
        lo = np.array([_as_bound(b[0], -math.inf) for b in bounds])
        hi = np.array([_as_bound(b[1], math.inf) for b in bounds])
        if np.any(lo > hi):
            raise MalformedProgramError("empty bound interval")
        if np.any(lo == math.inf) or np.any(hi == -math.inf):
            raise MalformedProgramError("bounds must not exclude every finite value")
        self.objective = objective
        self.sense = sense
        self.a = a
        self.relations = tuple(relations)
        self.rhs = rhs
        self.lo = lo
        self.hi = hi

    @property
    def n(self):
        return self.objective.size

    @property
    def bounds(self):
        return list(zip(self.lo.tolist(), self.hi.tolist()))

    @property
    def constraints(self):
        return [Constraint(tuple(r), rel, float(b)) for r, rel, b in zip(self.a, self.relations, self.rhs)]

    def matrix(self):
        return self.a, self.rhs

    def with_objective(self, objective, sense):
        """Same feasible region, different objective."""
        objective = np.asarray(objective, dtype=float).ravel()
        if objective.size != self.n:
            raise MalformedProgramError("objective length does not match the program")
        if sense not in ("min", "max"):
            raise MalformedProgramError(f"sense must be 'min' or 'max', got {sense!r}")
        if not np.all(np.isfinite(objective)):
            raise MalformedProgramError("objective has non-finite coefficients")
        p = copy.copy(self)
        p.objective, p.sense = objective, sense
        return p

    def violation(self, x):
        """Largest constraint violation of ``x`` scaled by ``max(1, |rhs|)``, and largest bound violation."""
        x = np.asarray(x, dtype=float)
        worst = 0.0
        if self.a.shape[0]:
            lhs = self.a @ x
            code = np.array([_REL_CODE[r] for r in self.relations])
            gap = np.where(code < 0, lhs - self.rhs, np.where(code > 0, self.rhs - lhs, np.abs(lhs - self.rhs)))
            worst = max(float(np.max(gap / np.maximum(1.0, np.abs(self.rhs)))), 0.0)
        bound = max(float(np.max(np.maximum(self.lo - x, x - self.hi))), 0.0)
        return worst, bound


def format_program(p):
    """Human-readable dump of a program, one line per objective/constraint/bound."""
    lines = [f"{p.sense} " + (" ".join(f"{v:+.17g}*x{j}" for j, v in enumerate(p.objective) if v) or "0")]
    lines.append("subject to")
    for i, (row, rel, b) in enumerate(zip(p.a, p.relations, p.rhs)):
        terms = " ".join(f"{v:+.17g}*x{j}" for j, v in enumerate(row) if v) or "0"
        lines.append(f"  c{i}: {terms} {rel} {b:.17g}")
    lines.append("bounds")
    for j, (lo, hi) in enumerate(p.bounds):
        lines.append(f"  {lo:.17g} <= x{j} <= {hi:.17g}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class LpSolution:
    status: str
    x: np.ndarray
    objective_value: float
    pivots: int = 0


class _Tableau:
    """Bounded simplex over ``A y = b, 0 <= y <= u`` from a feasible basis.

    ``A`` must hold the identity on the basis columns and ``b >= 0``.
    """

    def __init__(self, a, b, upper, basis):
        self.t = a.copy()
        self.upper = upper.copy()
        self.basis = np.array(basis, dtype=int)
        self.is_basic = np.zeros(a.shape[1], dtype=bool)
        self.is_basic[self.basis] = True
        self.at_upper = np.zeros(a.shape[1], dtype=bool)
        self.xb = b.copy()
        self.pivots = 0

    def copy(self):
        other = copy.copy(self)
        for name in ("t", "upper", "basis", "is_basic", "at_upper", "xb"):
            setattr(other, name, getattr(self, name).copy())
        return other

    def run(self, cost):
        """Minimize ``cost . y``; True when optimal, False when unbounded."""
        opt_tol = OPT_TOL * max(1.0, float(np.max(np.abs(cost))))
        d = cost - cost[self.basis] @ self.t
        confirmed = False
        while True:
            if self.pivots >= MAX_PIVOTS:
                raise NumericalFailureError(f"simplex exceeded {MAX_PIVOTS} pivots")
            movable = ~self.is_basic & (self.upper > 0)
            eligible = movable & np.where(self.at_upper, d > opt_tol, d < -opt_tol)
            if not eligible.any():
                if confirmed:
                    return True
                # reduced costs drift under incremental updates; recheck from scratch
                d = cost - cost[self.basis] @ self.t
                confirmed = True
                continue
            confirmed = False
            bland = self.pivots >= BLAND_AFTER
            candidates = np.flatnonzero(eligible)
            j = candidates[0] if bland else candidates[np.argmax(np.abs(d[candidates]))]
            direction = -1.0 if self.at_upper[j] else 1.0
            col = self.t[:, j] * direction

            theta = self.upper[j] if self.upper[j] < INF else math.inf
            leave = -1
            if col.size:
                ub = self.upper[self.basis]
                with np.errstate(divide="ignore", invalid="ignore"):
                    down = np.where(col > PIVOT_TOL, self.xb / col, math.inf)
                    up = np.where((col < -PIVOT_TOL) & (ub < INF), (ub - self.xb) / -col, math.inf)
                ratios = np.maximum(np.minimum(down, up), 0.0)
                best = float(ratios.min())
                if best < theta:
                    ties = np.flatnonzero(ratios <= best + 1e-12 * max(1.0, best))
                    if bland:
                        r = ties[np.argmin(self.basis[ties])]
                    else:
                        r = ties[np.argmax(np.abs(col[ties]))]
                    theta, leave = best, int(r)
            if theta == math.inf:
                return False

            self.xb -= theta * col
            self.pivots += 1
            if leave < 0:
                self.at_upper[j] = not self.at_upper[j]
                continue
            self.at_upper[self.basis[leave]] = col[leave] < 0
            entering = (self.upper[j] if self.at_upper[j] else 0.0) + direction * theta
            self.at_upper[j] = False
            self.pivot(leave, j)
            self.xb[leave] = entering
            d = d - d[j] * self.t[leave]
            d[j] = 0.0

    def pivot(self, r, j):
        t = self.t
        t[r] /= t[r, j]
        factor = t[:, j].copy()
        factor[r] = 0.0
        t -= np.outer(factor, t[r])
        self.is_basic[self.basis[r]] = False
        self.is_basic[j] = True
        self.basis[r] = j

    def values(self):
        y = np.where(self.at_upper, self.upper, 0.0)
        y[self.basis] = self.xb
        return y


class SimplexSolver:
    """Two-phase bounded simplex."""

    def solve(self, p):
        return self.solve_many(p, [(p.objective, p.sense)])[0]

    def solve_many(self, p, objectives):
        """Solve ``p`` once per ``(objective, sense)``, sharing phase 1."""
        programs = [p.with_objective(c, s) for c, s in objectives]
        self._standardize(p)
        feasible = self._phase1()
        out = []
        for q in programs:
            if feasible:
                out.append(self._phase2(q))
            else:
                out.append(LpSolution(INFEASIBLE, np.full(p.n, math.nan), math.nan, self._base.pivots))
        return out

    def _standardize(self, p):
        m = p.a.shape[0]
        # every variable becomes a shifted/reflected nonnegative column, or two for free variables
        cols, sign, upper = [], [], []
        shift = np.zeros(p.n)
        for j, (lo, hi) in enumerate(zip(p.lo, p.hi)):
            if math.isfinite(lo):
                shift[j] = lo
                cols.append(j), sign.append(1.0), upper.append(hi - lo if math.isfinite(hi) else INF)
            elif math.isfinite(hi):
                shift[j] = hi
                cols.append(j), sign.append(-1.0), upper.append(INF)
            else:
                cols += [j, j]
                sign += [1.0, -1.0]
                upper += [INF, INF]
        cols = np.array(cols, dtype=int)
        sign = np.array(sign)
        a = p.a[:, cols] * sign
        rhs = p.rhs - p.a @ shift

        codes = np.array([_REL_CODE[r] for r in p.relations], dtype=int)
        slack_rows = np.flatnonzero(codes != 0)
        n_struct, n_slack = cols.size, slack_rows.size
        slack = np.zeros((m, n_slack))
        slack[slack_rows, np.arange(n_slack)] = -codes[slack_rows]
        a = np.hstack([a, slack])

        # rows flipped to rhs >= 0; a +1 slack starts basic, other rows get an artificial
        flip = rhs < 0
        a[flip] *= -1
        rhs = np.abs(rhs)
        basis = np.full(m, -1)
        for k, i in enumerate(slack_rows):
            if a[i, n_struct + k] > 0:
                basis[i] = n_struct + k
        art_rows = np.flatnonzero(basis < 0)
        n_art = art_rows.size
        art = np.zeros((m, n_art))
        art[art_rows, np.arange(n_art)] = 1.0
        basis[art_rows] = n_struct + n_slack + np.arange(n_art)

        self._a = np.hstack([a, art])
        self._rhs = rhs
        self._cols, self._sign, self._shift = cols, sign, shift
        self._n_struct = n_struct
        self._n_real = n_struct + n_slack
        self._data_scale = max(1.0, float(np.max(np.abs(p.rhs), initial=0.0)))
        upper = np.r_[upper, np.full(n_slack + n_art, INF)]
        self._base = _Tableau(self._a, rhs, upper, basis)

    def _phase1(self):
        tab = self._base
        n_total = self._a.shape[1]
        if n_total == self._n_real:
            return True
        cost = np.zeros(n_total)
        cost[self._n_real:] = 1.0
        tab.run(cost)
        infeas = float(np.sum(tab.values()[self._n_real:]))
        if infeas > FEAS_TOL * self._data_scale:
            return False
        tab.upper[self._n_real:] = 0.0
        self._drive_out_artificials(tab)
        return True

    def _drive_out_artificials(self, tab):
        first = self._n_real
        for r in range(len(tab.basis)):
            if tab.basis[r] < first:
                continue
            row = np.abs(tab.t[r, :first])
            row[tab.is_basic[:first]] = 0.0
            if not row.size:
                continue
            j = int(np.argmax(row))
            if row[j] > 1e-9:
                # the entering column keeps its bound value; the artificial is ~0 so nothing moves
                value = tab.upper[j] if tab.at_upper[j] else 0.0
                tab.at_upper[j] = False
                tab.pivot(r, j)
                tab.xb[r] = value

    def _phase2(self, p):
        tab = self._base.copy()
        tab.pivots = self._base.pivots
        sense = 1.0 if p.sense == "min" else -1.0
        cost = np.zeros(self._a.shape[1])
        cost[: self._n_struct] = sense * p.objective[self._cols] * self._sign
        bounded = tab.run(cost)
        y = self._polish(tab)
        x = self._shift.copy()
        np.add.at(x, self._cols, self._sign * y[: self._n_struct])
        x = np.clip(x, p.lo, p.hi)
        if not bounded:
            return LpSolution(UNBOUNDED, x, -sense * math.inf, tab.pivots)
        cons_gap, bound_gap = p.violation(x)
        if cons_gap > FEAS_TOL or bound_gap > BOUND_TOL:
            raise NumericalFailureError(
                f"post-solve check failed: constraint violation {cons_gap:.3e}, bound violation {bound_gap:.3e}"
            )
        return LpSolution(OPTIMAL, x, float(p.objective @ x), tab.pivots)

    def _polish(self, tab):
        """Recompute basic values from the original columns to shed accumulated rounding."""
        y = tab.values()
        if not len(tab.basis):
            return y
        nb = ~tab.is_basic
        resid = self._rhs - self._a[:, nb] @ y[nb]
        try:
            xb = np.linalg.solve(self._a[:, tab.basis], resid)
        except np.linalg.LinAlgError:
            return y
        if np.all(np.isfinite(xb)):
            y[tab.basis] = np.clip(xb, 0.0, tab.upper[tab.basis])
        return y


def solve_lp(p):
    """Solve ``p``; see :class:`SimplexSolver`."""
    return SimplexSolver().solve(p)


def solve_lp_multi(p, objectives):
    """Solve the feasible region of ``p`` against several ``(objective, sense)`` pairs."""
    return SimplexSolver().solve_many(p, objectives)
