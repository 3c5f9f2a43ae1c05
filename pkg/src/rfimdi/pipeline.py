"""End-to-end evaluation of one operating point, sweeps, heatmaps and intensity optimization.

A :class:`Scenario` is a flat mapping of dotted parameter keys (the same keys
as the config file) plus a run mode and optional sweep axes.  Every grid point
is evaluated independently; failures are recorded per point and never stop a
run.
"""

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import MeasurementModel, effective_operator, sps_yields, transfer_rates, wcs_gains
from .decoy import DecoySettings, security_summary
from .errors import DomainError, RfiError, SingularPreparationError
from .rate import F_EC_DEFAULT, rate_sps, rate_wcs
from .reconstruct import COND_LIMIT, actual_rows, build_system, error_rates, quantity_C, solve_q, zz_statistics
from .source import FlawParams, prepare_ensemble

FLAW_FIELDS = ("delta1", "delta2", "delta3", "delta4", "theta1", "theta2", "beta")

DEFAULTS = {
    **{f"{party}.{name}": 0.0 for party in ("alice", "bob") for name in FLAW_FIELDS},
    "detector.eta": 0.145,
    "detector.dark": 6.02e-6,
    "channel.loss": 0.2,
    "channel.distance": 0.0,
    "decoy.mu": 0.4,
    "decoy.nu": 0.01,
    "decoy.n_cut": 10,
    "rate.f_ec": F_EC_DEFAULT,
}

# Sweep aliases that move several parameters together.
_GROUPS = {
    "delta": ("delta1", "delta2", "delta3", "delta4"),
    "delta_z": ("delta1", "delta2"),
    "delta_xy": ("delta3", "delta4"),
    "theta": ("theta1", "theta2"),
}

RECORD_FIELDS = (
    "x", "y", "R_raw", "R_clamped", "I_E", "C_low", "e_zz_up",
    "E_zz_mumu", "Q_zz_mumu", "mu_opt", "nu_opt", "error",
)  # fmt: skip

MU_RANGE = (0.05, 0.8)
NU_MIN = 0.01
OPT_ROUNDS = 3
OPT_POINTS = 10
OPT_START = (0.3, 0.05)


def expand_key(key):
    """Concrete parameter keys set by a (possibly aliased) key.

    ``source.X`` applies to both parties; ``delta``, ``delta_z``,
    ``delta_xy`` and ``theta`` stand for groups of flaw fields.
    """
    section, _, name = key.partition(".")
    if not name:
        raise DomainError(f"parameter key {key!r} needs a section")
    parties = ("alice", "bob") if section == "source" else (section,)
    if section in ("source", "alice", "bob"):
        names = _GROUPS.get(name, (name,))
        keys = [f"{p}.{n}" for p in parties for n in names]
    else:
        keys = [key]
    for k in keys:
        if k not in DEFAULTS:
            raise DomainError(f"unknown parameter {key!r}")
    return keys


@dataclass(frozen=True)
class Sweep:
    variable: str
    start: float
    stop: float
    steps: int

    def __post_init__(self):
        expand_key(self.variable)
        if self.steps < 2:
            raise DomainError("sweep needs at least 2 steps")
        if not self.start < self.stop:
            raise DomainError("sweep needs from < to")

    def values(self):
        return np.linspace(self.start, self.stop, self.steps)


@dataclass(frozen=True)
class Scenario:
    mode: str = "wcs"
    params: dict = field(default_factory=dict)
    sweep: Sweep = None
    sweep2: Sweep = None
    optimize: bool = False

    def __post_init__(self):
        if self.mode not in ("sps", "wcs"):
            raise DomainError(f"mode must be sps or wcs, got {self.mode!r}")
        merged = dict(DEFAULTS)
        for key, value in self.params.items():
            for k in expand_key(key):
                merged[k] = value
        object.__setattr__(self, "params", merged)

    def with_values(self, values):
        p = dict(self.params)
        for key, value in values.items():
            for k in expand_key(key):
                p[k] = value
        return p


@dataclass(frozen=True)
class Point:
    """Security quantities at one operating point; for SPS, C and e are exact."""

    rate: object
    C_low: float
    e_zz_up: float
    Q_zz: float
    E_zz: float


def flaws(params, party):
    return FlawParams(**{n: float(params[f"{party}.{n}"]) for n in FLAW_FIELDS})


def measurement(params):
    return MeasurementModel.symmetric(
        float(params["channel.distance"]),
        eta_det=float(params["detector.eta"]),
        dark=float(params["detector.dark"]),
        loss_coeff=float(params["channel.loss"]),
    )


def _check_preparation(ea, eb):
    cond = float(np.linalg.cond(actual_rows(ea, eb)))
    if not cond < COND_LIMIT:
        raise SingularPreparationError("state preparation does not determine the channel", cond)


def evaluate_sps(params):
    ea, eb = prepare_ensemble(flaws(params, "alice")), prepare_ensemble(flaws(params, "bob"))
    yields = sps_yields(ea, eb, transfer_rates(effective_operator(measurement(params))))
    q = solve_q(build_system(ea, eb, yields))
    e = error_rates(q, ea, eb)
    C = quantity_C(e["XX"], e["XY"], e["YX"], e["YY"])
    Q, e_zz = zz_statistics(yields)
    return Point(rate_sps(Q, e_zz, C, float(params["rate.f_ec"])), C, e_zz, Q, e_zz)


def evaluate_wcs(params, mu=None, nu=None):
    mu = float(params["decoy.mu"] if mu is None else mu)
    nu = float(params["decoy.nu"] if nu is None else nu)
    ea, eb = prepare_ensemble(flaws(params, "alice")), prepare_ensemble(flaws(params, "bob"))
    _check_preparation(ea, eb)
    s = DecoySettings(mu, nu, int(params["decoy.n_cut"]))
    g = wcs_gains(ea, eb, measurement(params), mu, nu)
    ss = security_summary(g, ea, eb, s)
    r = rate_wcs(ss.P11, ss.Y11_zz_low, ss.C_low, ss.e_zz_up, ss.Q_zz_mumu, ss.E_zz_mumu, float(params["rate.f_ec"]))
    return Point(r, ss.C_low, ss.e_zz_up, ss.Q_zz_mumu, ss.E_zz_mumu)


@dataclass(frozen=True)
class Optimum:
    mu: float
    nu: float
    R: float
    positive: bool
    evaluations: int


def _grid(lo, hi, center, width, points):
    a, b = max(lo, center - width / 2), min(hi, center + width / 2)
    return np.linspace(a, b, points)


def optimize_intensities(params):
    """Coordinate descent over ``(mu, nu)`` on a shrinking grid.

    Each round scans ``OPT_POINTS`` values of ``nu`` with ``mu`` fixed, then
    ``OPT_POINTS`` values of ``mu`` with ``nu`` fixed; the scan width then
    shrinks to two grid spacings around the incumbent.  Points that fail
    (e.g. no signal) count as ``-inf``.
    """
    cache = {}

    def rate(mu, nu):
        key = (round(mu, 15), round(nu, 15))
        if key not in cache:
            try:
                cache[key] = evaluate_wcs(params, mu, nu).rate.R
            except RfiError:
                cache[key] = -math.inf
        return cache[key]

    mu, nu = OPT_START
    best = rate(mu, nu)
    mu_width = MU_RANGE[1] - MU_RANGE[0]
    nu_width = MU_RANGE[1] - NU_MIN
    for _ in range(OPT_ROUNDS):
        for n in _grid(NU_MIN, mu, nu, nu_width, OPT_POINTS):
            if n < mu:
                r = rate(mu, n)
                if r > best:
                    best, nu = r, float(n)
        for m in _grid(MU_RANGE[0], MU_RANGE[1], mu, mu_width, OPT_POINTS):
            if m > nu:
                r = rate(m, nu)
                if r > best:
                    best, mu = r, float(m)
        mu_width *= 2 / (OPT_POINTS - 1)
        nu_width *= 2 / (OPT_POINTS - 1)
    return Optimum(mu, nu, best, best > 0, len(cache))


def evaluate_point(mode, params, optimize=False):
    """One :data:`RECORD_FIELDS` row (without ``x``/``y``) for ``params``."""
    row = {k: "" for k in RECORD_FIELDS}
    try:
        if mode == "sps":
            pt = evaluate_sps(params)
        else:
            mu = nu = None
            if optimize:
                opt = optimize_intensities(params)
                mu, nu = opt.mu, opt.nu
                row["mu_opt"], row["nu_opt"] = mu, nu
            pt = evaluate_wcs(params, mu, nu)
    except RfiError as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row
    row.update(
        R_raw=pt.rate.R,
        R_clamped=pt.rate.R_clamped,
        I_E=pt.rate.I_E,
        C_low=pt.C_low,
        e_zz_up=pt.e_zz_up,
        E_zz_mumu=pt.E_zz,
        Q_zz_mumu=pt.Q_zz,
    )
    return row


def _task(args):
    mode, params, optimize, x, y = args
    row = evaluate_point(mode, params, optimize)
    row["x"], row["y"] = x, y
    return row


def _run(tasks, jobs):
    if jobs <= 1 or len(tasks) <= 1:
        return [_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_task, tasks))


def run_scenario(sc, jobs=1):
    """Records for every value of ``sc.sweep`` (a single point when there is no sweep)."""
    if sc.sweep is None:
        return _run([(sc.mode, sc.params, sc.optimize, "", "")], jobs)
    tasks = [
        (sc.mode, sc.with_values({sc.sweep.variable: float(x)}), sc.optimize, float(x), "") for x in sc.sweep.values()
    ]
    return _run(tasks, jobs)


def heatmap(sc, jobs=1):
    """Records over the ``sweep`` x ``sweep2`` grid, ``sweep`` varying slowest."""
    if sc.sweep is None or sc.sweep2 is None:
        raise DomainError("heatmap needs two sweep variables")
    tasks = []
    for x in sc.sweep.values():
        for y in sc.sweep2.values():
            params = sc.with_values({sc.sweep.variable: float(x), sc.sweep2.variable: float(y)})
            tasks.append((sc.mode, params, sc.optimize, float(x), float(y)))
    return _run(tasks, jobs)


def _validate(row):
    if row["error"]:
        return
    if not 0 <= row["I_E"] <= 1:
        raise DomainError(f"I_E = {row['I_E']} outside [0, 1]")
    if not 0 <= row["C_low"] <= 4:
        raise DomainError(f"C_low = {row['C_low']} outside [0, 4]")
    if not 0 <= row["e_zz_up"] <= 1:
        raise DomainError(f"e_zz_up = {row['e_zz_up']} outside [0, 1]")


def _fmt(v):
    if isinstance(v, str):
        return v
    return f"{float(v):.12g}"


def write_records(rows, fh):
    """CSV with the fixed :data:`RECORD_FIELDS` header; floats at 12 significant digits."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(RECORD_FIELDS)
    for row in rows:
        _validate(row)
        writer.writerow([_fmt(row[k]) for k in RECORD_FIELDS])
