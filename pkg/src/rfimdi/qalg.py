"""Small Hermitian-operator toolkit for one and two qubits.

Operators are plain ``numpy`` complex128 arrays of shape (2, 2) or (4, 4).
Qubit operators are also carried around in Bloch form (:class:`BlochState`),
which is what the reconstruction code works with.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidOperatorError

HERMITIAN_TOL = 1e-9

SIGMA_I = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

#: Pauli basis in the order I, X, Y, Z.
PAULIS = (SIGMA_I, SIGMA_X, SIGMA_Y, SIGMA_Z)
PAULI_LABELS = ("I", "X", "Y", "Z")


def _check_hermitian(op, dim):
    op = np.asarray(op, dtype=complex)
    if op.shape != (dim, dim):
        raise InvalidOperatorError(f"expected a {dim}x{dim} operator, got shape {op.shape}")
    if not np.all(np.isfinite(op)):
        raise InvalidOperatorError("operator has non-finite entries")
    asym = np.max(np.abs(op - op.conj().T))
    if asym > HERMITIAN_TOL:
        raise InvalidOperatorError(f"operator is not Hermitian (max asymmetry {asym:.3e})")
    return op


def herm2(op):
    """Validate and return a 2x2 Hermitian operator."""
    return _check_hermitian(op, 2)


def herm4(op):
    """Validate and return a 4x4 Hermitian operator."""
    return _check_hermitian(op, 4)


@dataclass(frozen=True)
class BlochState:
    """A qubit operator ``(weight/2)(I + px X + py Y + pz Z)``.

    ``weight`` is the trace, so a normalized density matrix has weight 1.
    """

    weight: float
    px: float
    py: float
    pz: float

    def __post_init__(self):
        if self.weight < 0:
            raise InvalidOperatorError(f"negative weight {self.weight}")

    @property
    def vector(self):
        return np.array([self.px, self.py, self.pz])

    @property
    def norm(self):
        return float(np.sqrt(self.px**2 + self.py**2 + self.pz**2))

    def is_physical(self, tol=1e-9):
        return self.norm <= 1 + tol

    @classmethod
    def from_vector(cls, vec, weight=1.0):
        x, y, z = (float(v) for v in vec)
        return cls(float(weight), x, y, z)

    @classmethod
    def from_ket(cls, ket):
        """Bloch state of the projector onto a (not necessarily normalized) ket."""
        ket = np.asarray(ket, dtype=complex)
        return bloch_decompose(np.outer(ket, ket.conj()))


def bloch_decompose(op):
    """Split a Hermitian 2x2 operator into trace and Bloch coefficients.

    Returns a zero Bloch vector when the trace vanishes.
    """
    op = herm2(op)
    weight = float(np.trace(op).real)
    if weight == 0:
        return BlochState(0.0, 0.0, 0.0, 0.0)
    coeffs = [float(np.trace(op @ s).real) / weight for s in PAULIS[1:]]
    return BlochState(weight, *coeffs)


def bloch_compose(b):
    """Inverse of :func:`bloch_decompose`."""
    return 0.5 * b.weight * (SIGMA_I + b.px * SIGMA_X + b.py * SIGMA_Y + b.pz * SIGMA_Z)


def tensor(a, b):
    """Kronecker product of two qubit operators (register of ``a`` first)."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def trace_product(a, b):
    """Real part of ``Tr[a b]``.

    For Hermitian arguments the imaginary part is rounding noise; anything
    larger than 1e-10 indicates a non-Hermitian input.
    """
    t = np.trace(np.asarray(a) @ np.asarray(b))
    if abs(t.imag) >= 1e-10 * max(1.0, abs(t.real)):
        raise InvalidOperatorError(f"trace has imaginary part {t.imag:.3e}")
    return float(t.real)


def singlet_projector():
    """Projector onto (|01> - |10>)/sqrt(2)."""
    psi = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
    return np.outer(psi, psi.conj())


def pauli_product(l, lp):
    """``sigma_l (x) sigma_l'`` for indices into :data:`PAULIS`."""
    return np.kron(PAULIS[l], PAULIS[lp])
