"""Recover the announcement channel's Pauli transfer rates from observed yields.

Alice and Bob each emit four states, so the 16 joint yields give 16 linear
equations in the 16 transfer rates.  Once the rates are known, the yields of
the virtual X/Y states, and from them the X/Y error rates, follow directly.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NoSignalError, SingularPreparationError
from .source import pauli_row

COND_LIMIT = 1e12
CLAMP_TOL = 1e-12

#: Fixed equation order: ZZ(4), Z-0X(2), Z-0Y(2), 0X-Z(2), 0X-0X, 0X-0Y, 0Y-Z(2), 0Y-0X, 0Y-0Y.
ROW_ORDER = (
    ("0Z", "0Z"), ("0Z", "1Z"), ("1Z", "0Z"), ("1Z", "1Z"),
    ("0Z", "0X"), ("1Z", "0X"),
    ("0Z", "0Y"), ("1Z", "0Y"),
    ("0X", "0Z"), ("0X", "1Z"),
    ("0X", "0X"),
    ("0X", "0Y"),
    ("0Y", "0Z"), ("0Y", "1Z"),
    ("0Y", "0X"),
    ("0Y", "0Y"),
)  # fmt: skip

BASIS_PAIRS = (("X", "X"), ("X", "Y"), ("Y", "X"), ("Y", "Y"))


@dataclass(frozen=True)
class ReconstructionSystem:
    matrix: np.ndarray
    rhs: np.ndarray
    condition: float

    def write_csv(self, path):
        """Row-major dump: 16 coefficients followed by the observed yield."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            for row, y in zip(self.matrix, self.rhs):
                writer.writerow([f"{v:.17g}" for v in row] + [f"{y:.17g}"])


def actual_rows(ea, eb):
    """Unweighted Pauli rows of the 16 actual pairs in :data:`ROW_ORDER`."""
    return np.array([pauli_row(ea.actual[a], eb.actual[b]) for a, b in ROW_ORDER])


def build_system(ea, eb, yields):
    """Assemble ``Y_pair = P_a P_b row_pair . q`` for all 16 pairs."""
    weights = np.array([ea.probs[a] * eb.probs[b] for a, b in ROW_ORDER])
    matrix = weights[:, None] * actual_rows(ea, eb)
    rhs = np.array([yields[pair] for pair in ROW_ORDER], dtype=float)
    cond = float(np.linalg.cond(matrix))
    if not np.isfinite(cond):
        cond = float("inf")
    return ReconstructionSystem(matrix, rhs, cond)


def solve_q(system):
    """Transfer-rate vector solving the 16-equation system."""
    if not system.condition < COND_LIMIT:
        raise SingularPreparationError("state preparation does not determine the channel", system.condition)
    q = np.linalg.solve(system.matrix, system.rhs)
    resid = np.max(np.abs(system.matrix @ q - system.rhs))
    if resid > 1e-9 * max(np.max(np.abs(system.rhs)), 1.0):
        raise SingularPreparationError(f"solve residual {resid:.3e} too large", system.condition)
    return q


def virtual_row(ea, eb, ja, jb):
    """``P_vir P_vir row_vir`` for virtual labels such as ``'0X'`` and ``'1Y'``."""
    va, vb = ea.virtual[ja], eb.virtual[jb]
    return va.prob * vb.prob * pauli_row(va.state, vb.state)


def _check_basis(*bases):
    for b in bases:
        if b not in ("X", "Y"):
            raise DomainError(f"virtual basis must be X or Y, got {b!r}")


def virtual_yield(q, ea, eb, j, alpha, s, chi):
    """Yield of the virtual pair (``j`` in ``alpha``, ``s`` in ``chi``)."""
    _check_basis(alpha, chi)
    y = float(virtual_row(ea, eb, f"{j}{alpha}", f"{s}{chi}") @ np.asarray(q))
    if y < -CLAMP_TOL:
        raise DomainError(f"virtual yield {y:.3e} is negative beyond rounding")
    return max(y, 0.0)


def error_rate(q, ea, eb, alpha, chi):
    """Fraction of virtual announcements with equal bit values.

    With the singlet announcement, equal bits are the errors.
    """
    same = virtual_yield(q, ea, eb, 0, alpha, 0, chi) + virtual_yield(q, ea, eb, 1, alpha, 1, chi)
    diff = virtual_yield(q, ea, eb, 0, alpha, 1, chi) + virtual_yield(q, ea, eb, 1, alpha, 0, chi)
    if same + diff <= 0:
        raise NoSignalError(f"no virtual announcements in basis pair {alpha}{chi}")
    return min(max(same / (same + diff), 0.0), 1.0)


def error_rates(q, ea, eb):
    return {a + c: error_rate(q, ea, eb, a, c) for a, c in BASIS_PAIRS}


def quantity_C(e_xx, e_xy, e_yx, e_yy):
    """Frame-independent channel statistic ``sum (1 - 2e)^2`` over the four X/Y basis pairs."""
    return sum((1 - 2 * e) ** 2 for e in (e_xx, e_xy, e_yx, e_yy))


def zz_statistics(yields):
    """Total ZZ yield and its error fraction (pairs with equal bits)."""
    total = sum(yields[f"{j}Z", f"{s}Z"] for j in "01" for s in "01")
    errors = yields["0Z", "0Z"] + yields["1Z", "1Z"]
    if total <= 0:
        raise NoSignalError("no ZZ announcements")
    return total, errors / total
