"""Ground-truth simulation of the untrusted Bell-state measurement.

The relay is modelled as a time-bin BSM: Alice's and Bob's pulses meet on a
50:50 beam splitter whose outputs feed two threshold detectors, each gated in
the early and late time bin.  The singlet outcome is announced when exactly
one detector clicks in each time bin and the two clicks come from different
detectors.  Losses (fibre and detector efficiency) are folded into one
transmittance per side; every gate has an independent dark-count probability.

For phase-randomized coherent pulses all click probabilities have closed
forms, and so does the photon-number decomposition of every gain.  The
single-photon-pair part is linear in ``rho_a (x) rho_b`` and is exposed as a
4x4 positive operator (:func:`effective_operator`).
"""

import csv
import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import DomainError, InconsistentModelError, InvalidChannelError
from .qalg import herm4, pauli_product
from .source import ACTUAL_LABELS, pauli_row

PSD_TOL = 1e-9
YIELD_CLAMP_TOL = 1e-12

# Output modes (detector, time bin); the sign is the beam-splitter phase on Bob's input.
_MODES = ((1, 0), (1, 1), (2, 0), (2, 1))
_SIGN = {1: 1.0, 2: -1.0}


def _singlet_patterns():
    """(coefficient, silent-mode set) pairs whose sum gives the announcement probability.

    Pattern "clicks on a, b and silence on c, d" expands by inclusion-exclusion
    into P(cd silent) - P(acd silent) - P(bcd silent) + P(abcd silent).
    """
    terms = {}
    for clicks in (((1, 0), (2, 1)), ((1, 1), (2, 0))):
        silent = tuple(m for m in _MODES if m not in clicks)
        for coef, extra in ((1, ()), (-1, (clicks[0],)), (-1, (clicks[1],)), (1, clicks)):
            key = tuple(sorted(silent + extra))
            terms[key] = terms.get(key, 0) + coef
    return tuple((c, s) for s, c in terms.items() if c != 0)


SINGLET_TERMS = _singlet_patterns()


@dataclass(frozen=True)
class MeasurementModel:
    """Detectors and fibre between each party and the relay."""

    eta_det: float = 0.145
    dark: float = 6.02e-6
    loss_coeff: float = 0.2
    dist_a: float = 0.0
    dist_b: float = 0.0

    def __post_init__(self):
        if not 0 <= self.eta_det <= 1:
            raise DomainError(f"detector efficiency {self.eta_det} outside [0, 1]")
        if not 0 <= self.dark < 1:
            raise DomainError(f"dark-count probability {self.dark} outside [0, 1)")
        if self.loss_coeff < 0 or self.dist_a < 0 or self.dist_b < 0:
            raise DomainError("loss coefficient and distances must be nonnegative")

    @classmethod
    def symmetric(cls, distance, **kwargs):
        """Relay in the middle of an Alice-Bob link of total length ``distance`` km."""
        return cls(dist_a=distance / 2, dist_b=distance / 2, **kwargs)

    def transmittance(self, dist):
        return self.eta_det * 10 ** (-self.loss_coeff * dist / 10)

    @property
    def t_a(self):
        return self.transmittance(self.dist_a)

    @property
    def t_b(self):
        return self.transmittance(self.dist_b)


def _mode_weights(silent):
    """Per-time-bin occupation of ``silent`` (diag of the intensity operator) and
    the signed interference weights."""
    occ = np.zeros(2)
    w = np.zeros(2)
    for det, tbin in silent:
        occ[tbin] += 0.5
        w[tbin] += 0.5 * _SIGN[det]
    return occ, w


def effective_operator(m):
    """Announcement operator for one photon from each side.

    ``Tr[D rho_a (x) rho_b]`` is the probability that single photons in
    states ``rho_a`` and ``rho_b`` produce a singlet announcement.  Without
    dark counts this is ``t_a t_b P(Psi-)``.
    """
    ta, tb, p = m.t_a, m.t_b, m.dark
    eye = np.eye(2)
    d = np.zeros((4, 4), dtype=complex)
    for coef, silent in SINGLET_TERMS:
        occ, w = _mode_weights(silent)
        no_click = (1 - p) ** len(silent)
        d += coef * no_click * np.kron(eye - ta * np.diag(occ), eye - tb * np.diag(occ))
        interference = np.zeros((4, 4))
        for k, kp in product(range(2), repeat=2):
            # |k' k><k k'| carries w_k w_k'
            interference[2 * kp + k, 2 * k + kp] += w[k] * w[kp]
        d += coef * no_click * ta * tb * interference
    return herm4(d)


def transfer_rates(d):
    """The 16 rates ``q_{l l'} = Tr[D sigma_l (x) sigma_l'] / 4``, ``I X Y Z`` order."""
    d = herm4(d)
    evals = np.linalg.eigvalsh(d)
    if evals[0] < -PSD_TOL:
        raise InvalidChannelError(f"announcement operator not PSD (min eigenvalue {evals[0]:.3e})")
    return np.array(
        [np.trace(d @ pauli_product(l, lp)).real / 4 for l in range(4) for lp in range(4)]
    )


def check_transfer_rates(q, tol=1e-12):
    """True when ``q`` could come from a PSD operator with trace at most 4."""
    q = np.asarray(q, dtype=float)
    return q.shape == (16,) and -tol <= q[0] <= 1 + tol and bool(np.all(np.abs(q[1:]) <= q[0] + tol))


def _clamp_yield(y):
    if y < -YIELD_CLAMP_TOL:
        raise InconsistentModelError(f"negative yield {y:.3e}")
    return max(y, 0.0)


def sps_yields(ea, eb, q):
    """Joint announcement rates for the 16 actual state pairs (single photons).

    Each entry includes the emission probabilities of both states.
    """
    q = np.asarray(q, dtype=float)
    table = {}
    for la, lb in product(ACTUAL_LABELS, repeat=2):
        row = pauli_row(ea.actual[la], eb.actual[lb])
        table[la, lb] = _clamp_yield(ea.probs[la] * eb.probs[lb] * float(row @ q))
    return table


def bloch_to_ket(b, tol=1e-9):
    """Pure-state ket with Bloch vector ``b`` (global phase: real first entry)."""
    if abs(b.norm - 1) > tol:
        raise DomainError("coherent-pulse model needs pure states")
    theta = math.acos(max(-1.0, min(1.0, b.pz / b.norm)))
    phi = math.atan2(b.py, b.px)
    return np.array([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)])


class PairModel:
    """Closed-form BSM statistics for one pair of pure input states."""

    def __init__(self, ket_a, ket_b, m):
        self.ta, self.tb, self.dark = m.t_a, m.t_b, m.dark
        xa = np.asarray(ket_a, dtype=complex)
        xb = np.asarray(ket_b, dtype=complex)
        coefs, sizes, amp_a, amp_b, inter = [], [], [], [], []
        for coef, silent in SINGLET_TERMS:
            occ, w = _mode_weights(silent)
            coefs.append(coef)
            sizes.append(len(silent))
            amp_a.append(float(occ @ np.abs(xa) ** 2))
            amp_b.append(float(occ @ np.abs(xb) ** 2))
            inter.append(abs(np.sum(w * xa * xb.conj())))
        self._coef = np.array(coefs, dtype=float)
        self._no_click = (1 - self.dark) ** np.array(sizes)
        self._A = np.array(amp_a)
        self._B = np.array(amp_b)
        self._M = np.array(inter)

    def gain(self, mu_a, mu_b):
        """Announcement probability for phase-randomized coherent pulses."""
        if mu_a < 0 or mu_b < 0:
            raise DomainError("intensities must be nonnegative")
        r = math.sqrt(mu_a * self.ta * mu_b * self.tb)
        silent = self._no_click * np.exp(-mu_a * self.ta * self._A - mu_b * self.tb * self._B)
        silent = silent * np.i0(2 * r * self._M)
        return float(np.clip(self._coef @ silent, 0.0, 1.0))

    def photon_yield(self, n, m):
        """Announcement probability given exactly ``n`` and ``m`` photons."""
        a = 1 - self.ta * self._A
        b = 1 - self.tb * self._B
        z = self.ta * self.tb * self._M**2
        total = np.zeros_like(a)
        for k in range(min(n, m) + 1):
            total += math.comb(n, k) * math.comb(m, k) * z**k * a ** (n - k) * b ** (m - k)
        return float(np.clip(self._coef @ (self._no_click * total), 0.0, 1.0))


def poisson(k, mean):
    return math.exp(-mean) * mean**k / math.factorial(k)


INTENSITY_NAMES = ("mu", "nu", "vac")


@dataclass(frozen=True)
class GainTable:
    """Observed announcement rates per (state pair, intensity pair).

    ``gains[la, lb, ia, ib]`` is the joint rate per emitted pulse pair and
    includes the emission probabilities of the two states; intensity labels
    are ``mu``, ``nu`` and ``vac``.
    """

    intensities: dict
    gains: dict
    state_probs: dict

    def __getitem__(self, key):
        return self.gains[key]

    def conditional(self, la, lb, ia, ib):
        """Gain conditioned on the state choice."""
        return self.gains[la, lb, ia, ib] / self.state_probs[la, lb]

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["alice_state", "bob_state", "alice_intensity", "bob_intensity", "gain"])
            for (la, lb, ia, ib), g in self.gains.items():
                writer.writerow([la, lb, self.intensities[ia], self.intensities[ib], f"{g:.12g}"])


def wcs_gains(ea, eb, m, mu, nu, n_cut=None):
    """Gains of the three-intensity (mu, nu, 0) decoy scheme for all state pairs.

    With ``n_cut`` left as ``None`` the closed-form coherent-state gains are
    returned.  Passing an integer instead sums the photon-number expansion up
    to ``n_cut`` photons per side.
    """
    if not (mu > nu >= 0):
        raise DomainError(f"need mu > nu >= 0, got mu={mu}, nu={nu}")
    if n_cut is not None and n_cut < 2:
        raise DomainError("n_cut must be at least 2")
    intensities = {"mu": float(mu), "nu": float(nu), "vac": 0.0}
    gains, probs = {}, {}
    for la, lb in product(ACTUAL_LABELS, repeat=2):
        pair = PairModel(bloch_to_ket(ea.actual[la]), bloch_to_ket(eb.actual[lb]), m)
        prior = ea.probs[la] * eb.probs[lb]
        probs[la, lb] = prior
        if n_cut is not None:
            ytab = np.array([[pair.photon_yield(n, k) for k in range(n_cut + 1)] for n in range(n_cut + 1)])
        for ia, ib in product(INTENSITY_NAMES, repeat=2):
            x, y = intensities[ia], intensities[ib]
            if n_cut is None:
                g = pair.gain(x, y)
            else:
                wa = np.array([poisson(n, x) for n in range(n_cut + 1)])
                wb = np.array([poisson(n, y) for n in range(n_cut + 1)])
                g = float(wa @ ytab @ wb)
            gains[la, lb, ia, ib] = prior * g
    return GainTable(intensities, gains, probs)


def single_photon_yields(ea, eb, m):
    """Ground-truth conditional single-photon-pair yields for the 16 state pairs."""
    return {
        (la, lb): PairModel(bloch_to_ket(ea.actual[la]), bloch_to_ket(eb.actual[lb]), m).photon_yield(1, 1)
        for la, lb in product(ACTUAL_LABELS, repeat=2)
    }
