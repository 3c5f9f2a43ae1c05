"""Flawed four-state sources and their virtual X/Y states.

Each party emits one of four pure qubit states, labelled ``0Z``, ``1Z``,
``0X`` and ``0Y``.  The X/Y statistics needed for the phase-error estimate
are those of *virtual* states: the states the party would have sent had it
measured the control qubit of ``(|0>|phi_0Z> + |1>|phi_1Z>)/sqrt(2)`` in the
X or Y basis instead of the Z basis.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegenerateSourceError, DomainError
from .qalg import BlochState, bloch_compose

ACTUAL_LABELS = ("0Z", "1Z", "0X", "0Y")
VIRTUAL_LABELS = ("0X", "1X", "0Y", "1Y")

# Overlap above which the two Z states are treated as the same state.
DEGENERACY_TOL = 1e-12


@dataclass(frozen=True)
class FlawParams:
    """Preparation flaws of one party, all in radians.

    ``delta1``/``delta2`` tilt the Z states, ``delta3``/``delta4`` the X and Y
    amplitudes, ``theta1``/``theta2`` are phase-modulator errors and ``beta``
    is the slow rotation of the X-Y frame.
    """

    delta1: float = 0.0
    delta2: float = 0.0
    delta3: float = 0.0
    delta4: float = 0.0
    theta1: float = 0.0
    theta2: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if not math.isfinite(value):
                raise DomainError(f"flaw parameter {name} is not finite: {value}")

    @classmethod
    def uniform(cls, delta=0.0, theta=0.0, beta=0.0):
        """All four time-bin flaws equal to ``delta``, both phase flaws to ``theta``."""
        return cls(delta, delta, delta, delta, theta, theta, beta)

    def with_(self, **changes):
        return replace(self, **changes)


def state_ket(p, label):
    """Amplitudes of the prepared pure state in the Z basis."""
    if label == "0Z":
        return np.array([math.cos(p.delta1 / 2), math.sin(p.delta1 / 2)], dtype=complex)
    if label == "1Z":
        return np.array([math.sin(p.delta2 / 2), math.cos(p.delta2 / 2)], dtype=complex)
    if label == "0X":
        a = math.pi / 4 + p.delta3 / 2
        return np.array([math.sin(a), math.cos(a) * np.exp(1j * (p.theta1 + p.beta))])
    if label == "0Y":
        a = math.pi / 4 + p.delta4 / 2
        phase = math.pi / 2 + p.theta2 + p.beta
        return np.array([math.sin(a), math.cos(a) * np.exp(1j * phase)])
    raise DomainError(f"unknown state label {label!r}; expected one of {ACTUAL_LABELS}")


def prepare_actual(p, label):
    """Weight-one Bloch state of the actually emitted state ``label``."""
    return BlochState.from_ket(state_ket(p, label))


@dataclass(frozen=True)
class VirtualState:
    prob: float
    state: BlochState


def _control_ket(j, basis):
    phase = (-1) ** j * (1j if basis == "Y" else 1)
    return np.array([1, phase], dtype=complex) / math.sqrt(2)


def virtual_from_kets(phi0, phi1):
    """Virtual X/Y states for Z-basis kets ``phi0`` and ``phi1``.

    Projecting the control register of
    ``(|0>|phi0> + |1>|phi1>)/sqrt(2)`` onto ``<j_alpha|`` leaves
    ``(phi0 + conj(w) phi1)/2`` with ``w`` the control amplitude on ``|1>``.
    """
    overlap = abs(np.vdot(phi0, phi1)) / (np.linalg.norm(phi0) * np.linalg.norm(phi1))
    if overlap > 1 - DEGENERACY_TOL:
        raise DegenerateSourceError("Z-basis states coincide up to a phase; virtual states undefined")
    out = {}
    for basis in ("X", "Y"):
        for j in (0, 1):
            ctrl = _control_ket(j, basis)
            residual = (ctrl[0].conjugate() * phi0 + ctrl[1].conjugate() * phi1) / math.sqrt(2)
            prob = float(np.vdot(residual, residual).real)
            b = BlochState.from_ket(residual)
            out[f"{j}{basis}"] = VirtualState(prob, BlochState(1.0, b.px, b.py, b.pz))
    return out


def virtual_states(p):
    """Virtual states ``{0X, 1X, 0Y, 1Y}`` of a party with flaws ``p``."""
    return virtual_from_kets(state_ket(p, "0Z"), state_ket(p, "1Z"))


@dataclass(frozen=True)
class PreparedEnsemble:
    actual: dict
    virtual: dict
    probs: dict = field(default_factory=lambda: {lab: 0.25 for lab in ACTUAL_LABELS})

    def __post_init__(self):
        if set(self.actual) != set(ACTUAL_LABELS):
            raise DomainError(f"actual states must be keyed by {ACTUAL_LABELS}")
        if set(self.virtual) != set(VIRTUAL_LABELS):
            raise DomainError(f"virtual states must be keyed by {VIRTUAL_LABELS}")
        if abs(sum(self.probs.values()) - 1) > 1e-12:
            raise DomainError("emission probabilities must sum to 1")
        for basis in ("X", "Y"):
            total = self.virtual["0" + basis].prob + self.virtual["1" + basis].prob
            if abs(total - 1) > 1e-12:
                raise DomainError(f"virtual {basis} probabilities sum to {total}")
        states = list(self.actual.values()) + [v.state for v in self.virtual.values()]
        if not all(s.is_physical() for s in states):
            raise DomainError("Bloch vector longer than 1")


def prepare_ensemble(p, probs=None):
    """Build a party's actual and virtual states from its flaw parameters."""
    actual = {lab: prepare_actual(p, lab) for lab in ACTUAL_LABELS}
    kwargs = {} if probs is None else {"probs": dict(probs)}
    return PreparedEnsemble(actual, virtual_states(p), **kwargs)


def pauli_row(a, b):
    """Coefficient row of ``Tr[D rho_a (x) rho_b]`` against the transfer rates.

    Ordered as ``[II, IX, IY, IZ, XI, XX, ..., ZZ]`` with Alice's index major.
    """
    return np.kron(np.r_[1.0, a.vector], np.r_[1.0, b.vector])


def mixture_operator(ensemble, basis):
    """``sum_j P_j rho_j`` over the virtual states of one basis."""
    return sum(
        ensemble.virtual[f"{j}{basis}"].prob * bloch_compose(ensemble.virtual[f"{j}{basis}"].state)
        for j in (0, 1)
    )
