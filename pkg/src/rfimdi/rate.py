"""Eve's information bound and asymptotic key rates."""

import math
from dataclasses import dataclass

from .errors import DomainError

F_EC_DEFAULT = 1.16
SQRT_CLAMP_TOL = 1e-9


def binary_entropy(x):
    """``-x log2 x - (1-x) log2 (1-x)``, with ``0 log 0 = 0``."""
    if not -1e-12 <= x <= 1 + 1e-12:
        raise DomainError(f"entropy argument {x} outside [0, 1]")
    x = min(max(x, 0.0), 1.0)
    if x in (0.0, 1.0):
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


@dataclass(frozen=True)
class EveInfo:
    I_E: float
    u: float
    v: float


def eve_info(C, e_zz):
    """Bound on Eve's information per sifted ZZ bit from ``C`` and the ZZ error rate.

    ``e_zz`` above one half is treated as insecure (``I_E = 1``).
    """
    if not -1e-12 <= C <= 4 + 1e-12:
        raise DomainError(f"C = {C} outside [0, 4]")
    if not -1e-12 <= e_zz <= 1 + 1e-12:
        raise DomainError(f"e_zz = {e_zz} outside [0, 1]")
    C = min(max(C, 0.0), 4.0)
    e = max(e_zz, 0.0)
    if e > 0.5:
        return EveInfo(1.0, 0.0, 0.0)
    u = min(math.sqrt(C / 2) / (1 - e), 1.0)
    arg = C / 2 - (1 - e) ** 2 * u**2
    if arg < -SQRT_CLAMP_TOL:
        raise DomainError(f"negative square-root argument {arg:.3e}")
    v = min(math.sqrt(max(arg, 0.0)) / e, 1.0) if e > 0 else 0.0
    i_e = (1 - e) * binary_entropy((1 + u) / 2)
    if e > 0:
        i_e += e * binary_entropy((1 + v) / 2)
    return EveInfo(min(max(i_e, 0.0), 1.0), u, v)


@dataclass(frozen=True)
class RateResult:
    R: float
    I_E: float
    u: float
    v: float
    gain_term: float
    ec_term: float

    @property
    def R_clamped(self):
        return max(self.R, 0.0)


def rate_sps(Q11_zz, e11_zz, C, f_ec=F_EC_DEFAULT):
    """Key rate with single-photon sources."""
    info = eve_info(C, e11_zz)
    gain_term = Q11_zz * (1 - info.I_E)
    ec_term = Q11_zz * f_ec * binary_entropy(e11_zz)
    return RateResult(gain_term - ec_term, info.I_E, info.u, info.v, gain_term, ec_term)


def rate_wcs(P11, Y11_zz_low, C_low, e_zz_up, Q_zz_mumu, E_zz_mumu, f_ec=F_EC_DEFAULT):
    """Key rate with decoy-state weak coherent sources.

    The privacy term uses the single-photon lower bound and the worst-case
    ``C``/``e_zz`` corner; error correction is paid on the full signal gain.
    """
    info = eve_info(C_low, min(e_zz_up, 1.0))
    gain_term = P11 * Y11_zz_low * (1 - info.I_E)
    ec_term = Q_zz_mumu * f_ec * binary_entropy(E_zz_mumu)
    return RateResult(gain_term - ec_term, info.I_E, info.u, info.v, gain_term, ec_term)


def p11(mu_a, mu_b=None):
    """Probability that both signal pulses carry exactly one photon."""
    mu_b = mu_a if mu_b is None else mu_b
    return mu_a * math.exp(-mu_a) * mu_b * math.exp(-mu_b)
