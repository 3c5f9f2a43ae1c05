"""Decoy-state bounds on single-photon quantities.

Two layers of linear programs:

1. For each state pair, the nine gains of the (mu, nu, 0) scheme bound the
   photon-number yields ``Y_nm``; minimizing/maximizing ``Y_11`` gives an
   interval for the single-photon-pair yield.
2. The 16 intervals constrain the transfer-rate vector ``q``; optimizing
   virtual-state yields over that region bounds the X/Y error rates.

All LPs are rescaled so that their data are of order one: at long distance
the raw gains are ~1e-7 and would otherwise drown in solver tolerances.
"""

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .channel import INTENSITY_NAMES, poisson
from .errors import DataInconsistencyError, DomainError, NoSignalError
from .lpcore import OPTIMAL, LinearProgram, solve_lp_multi
from .rate import p11
from .reconstruct import BASIS_PAIRS, ROW_ORDER, actual_rows, virtual_row

N_CUT_DEFAULT = 10

ZZ_PAIRS = (("0Z", "0Z"), ("0Z", "1Z"), ("1Z", "0Z"), ("1Z", "1Z"))
ZZ_ERROR_PAIRS = (("0Z", "0Z"), ("1Z", "1Z"))
ZZ_CORRECT_PAIRS = (("0Z", "1Z"), ("1Z", "0Z"))


@dataclass(frozen=True)
class DecoySettings:
    """Signal ``mu``, decoy ``nu`` and vacuum intensities, plus the photon cutoff."""

    mu: float = 0.4
    nu: float = 0.01
    n_cut: int = N_CUT_DEFAULT
    priors: tuple = field(default=(1 / 3, 1 / 3, 1 / 3))

    def __post_init__(self):
        if not (self.mu > self.nu > 0):
            raise DomainError(f"need mu > nu > 0, got mu={self.mu}, nu={self.nu}")
        if self.n_cut < 2:
            raise DomainError("n_cut must be at least 2")
        if len(self.priors) != 3 or abs(sum(self.priors) - 1) > 1e-12 or min(self.priors) < 0:
            raise DomainError("intensity priors must be three probabilities summing to 1")

    @property
    def intensities(self):
        return {"mu": self.mu, "nu": self.nu, "vac": 0.0}


@dataclass(frozen=True)
class YieldInterval:
    lo: float
    hi: float

    def __post_init__(self):
        if not 0 <= self.lo <= self.hi <= 1:
            raise DomainError(f"invalid yield interval [{self.lo}, {self.hi}]")

    def contains(self, y, tol=0.0):
        return self.lo - tol <= y <= self.hi + tol


def _photon_weights(s, gains_intens):
    n = s.n_cut + 1
    w = {name: np.array([poisson(k, x) for k in range(n)]) for name, x in gains_intens.items()}
    return w


def decoy_yield_bounds(cond_gains, s, which=(1, 1)):
    """Interval for ``Y_which`` from conditional gains ``cond_gains[ia, ib]``.

    Every ``Y_nm`` with ``n, m <= n_cut`` is a variable in ``[0, 1]``.  For each
    intensity pair the truncated Poisson mixture must lie in
    ``[Q - tail, Q]``, ``tail`` being the Poisson mass beyond the cutoff.
    """
    n = s.n_cut + 1
    weights = _photon_weights(s, s.intensities)
    scale = max(max(cond_gains.values()), 1e-300)
    rows, rels, rhs = [], [], []
    for ia, ib in product(INTENSITY_NAMES, repeat=2):
        row = np.outer(weights[ia], weights[ib]).ravel()
        tail = max(1.0 - row.sum(), 0.0)
        q = cond_gains[ia, ib]
        rows += [row, row]
        rels += ["<=", ">="]
        rhs += [q / scale, (q - tail) / scale]
    target = np.zeros(n * n)
    target[which[0] * n + which[1]] = 1.0
    bounds = [(0.0, 1.0 / scale)] * (n * n)
    p = LinearProgram.from_arrays(target, "min", np.array(rows), rels, rhs, bounds)
    out = []
    for sense, sol in zip(("min", "max"), solve_lp_multi(p, [(target, "min"), (target, "max")])):
        if sol.status != OPTIMAL:
            raise DataInconsistencyError(f"decoy LP {sense} is {sol.status}; gains are inconsistent")
        out.append(min(max(sol.objective_value * scale, 0.0), 1.0))
    return YieldInterval(out[0], max(out[0], out[1]))


def _mean_conditional(g, pairs):
    return {
        (ia, ib): sum(g.conditional(la, lb, ia, ib) for la, lb in pairs) / len(pairs)
        for ia, ib in product(INTENSITY_NAMES, repeat=2)
    }


def bound_pair_yield(g, pair, s):
    """Interval for the conditional single-photon-pair yield of one state pair."""
    return decoy_yield_bounds(_mean_conditional(g, [pair]), s)


def bound_all_pairs(g, s):
    return {pair: bound_pair_yield(g, pair, s) for pair in ROW_ORDER}


@dataclass(frozen=True)
class QConstraints:
    """Region of transfer-rate vectors compatible with the yield intervals.

    ``rows @ q`` must lie in ``[lo, hi]`` elementwise (rows in
    :data:`ROW_ORDER`, conditional yields), and ``q`` must satisfy
    ``0 <= q_II <= 1`` and ``|q_k| <= q_II``.
    """

    rows: np.ndarray
    lo: np.ndarray
    hi: np.ndarray

    def program(self, objective, sense):
        """LP over ``q / scale``; returns the program and the scale factor.

        Only ``q_II`` carries a box; the other components are free and held
        by ``|q_k| <= q_II``, which keeps huge shifted bounds out of the rows.
        """
        scale = float(np.max(self.hi))
        if scale <= 0:
            scale = 1.0
        rows, rels, rhs = [], [], []
        for row, lo, hi in zip(self.rows, self.lo, self.hi):
            if lo == hi:
                rows.append(row), rels.append("="), rhs.append(lo / scale)
            else:
                rows += [row, row]
                rels += ["<=", ">="]
                rhs += [hi / scale, lo / scale]
        for k in range(1, 16):
            for sign in (1.0, -1.0):
                r = np.zeros(16)
                r[k] = sign
                r[0] = -1.0
                rows.append(r), rels.append("<="), rhs.append(0.0)
        bounds = [(0.0, 1.0 / scale)] + [(None, None)] * 15
        return LinearProgram.from_arrays(objective, sense, np.array(rows), rels, rhs, bounds), scale

    def contains(self, q, tol=1e-12):
        q = np.asarray(q, dtype=float)
        y = self.rows @ q
        ok = np.all(y >= self.lo - tol) and np.all(y <= self.hi + tol)
        return bool(ok and -tol <= q[0] <= 1 + tol and np.all(np.abs(q[1:]) <= q[0] + tol))

    def optimize_many(self, objectives):
        """``[(value, q), ...]`` for each ``(objective, sense)``, sharing one phase 1."""
        p, scale = self.program(objectives[0][0], objectives[0][1])
        out = []
        for sol in solve_lp_multi(p, objectives):
            if sol.status != OPTIMAL:
                raise DataInconsistencyError(f"transfer-rate LP is {sol.status}")
            out.append((sol.objective_value * scale, sol.x * scale))
        return out

    def optimize(self, objective, sense):
        return self.optimize_many([(objective, sense)])[0]


def q_constraints(intervals, ea, eb):
    """Constraint region over ``q`` from 16 single-photon yield intervals."""
    missing = [p for p in ROW_ORDER if p not in intervals]
    if missing:
        raise DomainError(f"missing yield intervals for {missing}")
    lo = np.array([intervals[p].lo for p in ROW_ORDER])
    hi = np.array([intervals[p].hi for p in ROW_ORDER])
    return QConstraints(actual_rows(ea, eb), lo, hi)


def bound_error_rate_lp(cons, ea, eb, alpha, chi):
    """``(e_low, e_up)`` for the virtual ``alpha chi`` error rate over the region ``cons``.

    The upper bound pairs the maximal equal-bit yield with the minimal
    opposite-bit yield; the lower bound does the reverse.
    """
    same = virtual_row(ea, eb, "0" + alpha, "0" + chi) + virtual_row(ea, eb, "1" + alpha, "1" + chi)
    diff = virtual_row(ea, eb, "0" + alpha, "1" + chi) + virtual_row(ea, eb, "1" + alpha, "0" + chi)
    vals = cons.optimize_many([(same, "max"), (same, "min"), (diff, "max"), (diff, "min")])
    same_hi, same_lo, diff_hi, diff_lo = (max(v, 0.0) for v, _ in vals)
    e_up = same_hi / (same_hi + diff_lo) if same_hi + diff_lo > 0 else 0.0
    e_low = same_lo / (same_lo + diff_hi) if same_lo + diff_hi > 0 else 0.0
    e_up = min(max(e_up, 0.0), 1.0)
    e_low = min(max(e_low, 0.0), e_up)
    return e_low, e_up


def worst_case_C(e_intervals):
    """Smallest ``sum (1-2e)^2`` with each ``e`` free in its interval."""
    total = 0.0
    for lo, hi in e_intervals:
        if lo <= 0.5 <= hi:
            continue
        nearest = hi if hi < 0.5 else lo
        total += (1 - 2 * nearest) ** 2
    return min(total, 4.0)


@dataclass(frozen=True)
class ZZBounds:
    Y11_zz_low: float
    e_zz_up: float
    Q_zz_mumu: float
    E_zz_mumu: float


def bound_zz(g, s):
    """Single-photon ZZ yield/error bounds and the observed signal-signal ZZ statistics.

    Yields are aggregated over bit values; results are joint rates (state
    emission probabilities included), matching the gain convention.
    """

    def prior(pairs):
        return sum(g.state_probs[p] for p in pairs)

    y_all = decoy_yield_bounds(_mean_conditional(g, ZZ_PAIRS), s)
    y_err = decoy_yield_bounds(_mean_conditional(g, ZZ_ERROR_PAIRS), s)
    y_ok = decoy_yield_bounds(_mean_conditional(g, ZZ_CORRECT_PAIRS), s)
    err_up = y_err.hi * prior(ZZ_ERROR_PAIRS)
    ok_low = y_ok.lo * prior(ZZ_CORRECT_PAIRS)
    e_up = err_up / (err_up + ok_low) if err_up + ok_low > 0 else 1.0
    total = sum(g[la, lb, "mu", "mu"] for la, lb in ZZ_PAIRS)
    errors = sum(g[la, lb, "mu", "mu"] for la, lb in ZZ_ERROR_PAIRS)
    if total <= 0:
        raise NoSignalError("no signal-signal ZZ announcements")
    return ZZBounds(y_all.lo * prior(ZZ_PAIRS), min(e_up, 1.0), total, errors / total)


@dataclass(frozen=True)
class SecuritySummary:
    C_low: float
    e_zz_up: float
    Y11_zz_low: float
    P11: float
    Q_zz_mumu: float
    E_zz_mumu: float
    e_intervals: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.C_low <= 4:
            raise DomainError(f"C_low = {self.C_low} outside [0, 4]")
        for name in ("e_zz_up", "Y11_zz_low", "P11", "Q_zz_mumu", "E_zz_mumu"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise DomainError(f"{name} = {v} outside [0, 1]")


def security_summary(g, ea, eb, s, intervals=None):
    """Run the full decoy chain on a gain table."""
    if intervals is None:
        intervals = bound_all_pairs(g, s)
    cons = q_constraints(intervals, ea, eb)
    e_int = {a + c: bound_error_rate_lp(cons, ea, eb, a, c) for a, c in BASIS_PAIRS}
    c_low = worst_case_C(e_int.values())
    zz = bound_zz(g, s)
    if not math.isfinite(c_low):
        raise DataInconsistencyError("C bound is not finite")
    return SecuritySummary(c_low, zz.e_zz_up, zz.Y11_zz_low, p11(s.mu), zz.Q_zz_mumu, zz.E_zz_mumu, e_int)
