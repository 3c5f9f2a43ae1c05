"""Self-checks run by ``rfimdi verify``.

Each check compares the main code path with an independent reference and
reports the largest deviation it saw.
"""

import math
import time
from dataclasses import dataclass

import numpy as np

from .channel import MeasurementModel, effective_operator, single_photon_yields, sps_yields, transfer_rates, wcs_gains
from .decoy import DecoySettings, bound_all_pairs, bound_error_rate_lp, q_constraints
from .lpcore import OPTIMAL, Constraint, LinearProgram, solve_lp
from .oracles import lp_vertex_optimum
from .qalg import singlet_projector
from .reconstruct import BASIS_PAIRS, build_system, error_rates, quantity_C, solve_q
from .source import FlawParams, prepare_ensemble

BRACKET_DISTANCES = (0.0, 50.0, 100.0, 150.0)
BRACKET_DELTAS = (0.0, 0.063, 0.126)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    max_error: float
    tolerance: float
    seconds: float

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<16} max_error={self.max_error:.3e}  tol={self.tolerance:.1e}  ({self.seconds:.2f}s)"


def random_operator(rng):
    """Random announcement operator: PSD with spectrum inside [0, 1]."""
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    d = g @ g.conj().T
    return d * rng.uniform(0.05, 1.0) / np.linalg.eigvalsh(d)[-1]


def random_flaws(rng, limit=0.2):
    d = rng.uniform(-limit, limit, size=6)
    return FlawParams(*d, beta=rng.uniform(0, 2 * math.pi))


def round_trip_error(rng, corrupt_q_order=False):
    """Largest ``|q_recovered - q_true|`` for one random operator and flaw setting."""
    ea, eb = prepare_ensemble(random_flaws(rng)), prepare_ensemble(random_flaws(rng))
    q = transfer_rates(random_operator(rng))
    got = solve_q(build_system(ea, eb, sps_yields(ea, eb, q)))
    if corrupt_q_order:
        got = np.roll(got, 1)
    return float(np.max(np.abs(got - q)))


def check_round_trip(n=200, seed=1, corrupt_q_order=False, tol=1e-9):
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = max(round_trip_error(rng, corrupt_q_order) for _ in range(n))
    return CheckResult("round-trip", worst < tol, worst, tol, time.perf_counter() - t0)


def beta_invariance_error(points=13):
    """Largest ``|C - 2|`` over a ``points x points`` grid of frame rotations, singlet channel."""
    q = transfer_rates(singlet_projector())
    worst = 0.0
    betas = np.arange(points) * 2 * math.pi / points
    for ba in betas:
        ea = prepare_ensemble(FlawParams(beta=ba))
        for bb in betas:
            eb = prepare_ensemble(FlawParams(beta=bb))
            e = error_rates(solve_q(build_system(ea, eb, sps_yields(ea, eb, q))), ea, eb)
            worst = max(worst, abs(quantity_C(*(e[a + c] for a, c in BASIS_PAIRS)) - 2))
    return worst


def check_beta_invariance(points=13, tol=1e-9):
    t0 = time.perf_counter()
    worst = beta_invariance_error(points)
    return CheckResult("beta-invariance", worst < tol, worst, tol, time.perf_counter() - t0)


def bracketing_violation(distance, delta, settings=None):
    """Largest amount by which a decoy interval misses its ground truth.

    Intervals are compared in the scaled units of the LPs, whose
    feasibility tolerance is ``1e-8``; the returned value is in those units.
    """
    s = settings or DecoySettings()
    ea = prepare_ensemble(FlawParams.uniform(delta))
    m = MeasurementModel.symmetric(distance)
    g = wcs_gains(ea, ea, m, s.mu, s.nu)
    truth = single_photon_yields(ea, ea, m)
    intervals = bound_all_pairs(g, s)
    worst = 0.0
    for pair, iv in intervals.items():
        scale = max(g.conditional(*pair, ia, ib) for ia in ("mu", "nu", "vac") for ib in ("mu", "nu", "vac"))
        miss = max(iv.lo - truth[pair], truth[pair] - iv.hi, 0.0)
        worst = max(worst, miss / scale)
    q = transfer_rates(effective_operator(m))
    exact = error_rates(q, ea, ea)
    cons = q_constraints(intervals, ea, ea)
    for a, c in BASIS_PAIRS:
        lo, hi = bound_error_rate_lp(cons, ea, ea, a, c)
        worst = max(worst, lo - exact[a + c], exact[a + c] - hi)
    return worst


def check_bracketing(distances=BRACKET_DISTANCES, deltas=BRACKET_DELTAS, tol=1e-8):
    t0 = time.perf_counter()
    worst = max(bracketing_violation(L, d) for L in distances for d in deltas)
    return CheckResult("decoy-bracketing", worst <= tol, worst, tol, time.perf_counter() - t0)


def random_program(rng, n_max=5, m_max=6):
    """Random LP with finite box bounds, so every feasible instance has an optimum."""
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(0, m_max + 1))
    cons = [
        Constraint(tuple(rng.normal(size=n)), str(rng.choice(["<=", "=", ">="], p=[0.45, 0.1, 0.45])), float(rng.normal()))
        for _ in range(m)
    ]
    lo = rng.uniform(-2, 0, size=n)
    bounds = [(a, a + w) for a, w in zip(lo, rng.uniform(0.1, 3, size=n))]
    return LinearProgram(rng.normal(size=n), str(rng.choice(["min", "max"])), cons, bounds)


def lp_oracle_error(p):
    """``|simplex - vertex enumeration|``; 0 when both agree on infeasibility, inf on status mismatch."""
    sol = solve_lp(p)
    ref = lp_vertex_optimum(p)
    if ref is None:
        return 0.0 if sol.status != OPTIMAL else math.inf
    if sol.status != OPTIMAL:
        return math.inf
    return abs(sol.objective_value - ref)


def check_lp_oracle(n=50, seed=2, tol=1e-9):
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = max(lp_oracle_error(random_program(rng)) for _ in range(n))
    return CheckResult("lp-oracle", worst < tol, worst, tol, time.perf_counter() - t0)


def run_all(corrupt_q_order=False):
    return [
        check_round_trip(corrupt_q_order=corrupt_q_order),
        check_beta_invariance(),
        check_bracketing(),
        check_lp_oracle(),
    ]
