"""Brute-force reference computations.

Each function here recomputes something the main modules compute, by a
deliberately different route: vertex enumeration instead of simplex,
explicit state vectors instead of Bloch algebra, Fock-space bookkeeping
instead of closed-form coherent-state formulas.  They are slow and only
meant for verification.
"""

import math
from itertools import combinations, product

import numpy as np


def lp_vertex_optimum(p, tol=1e-9):
    """Optimum of a bounded LP by enumerating every vertex.

    Returns ``None`` when no vertex is feasible.  Only valid for programs
    whose feasible region is bounded (e.g. finite box bounds).
    """
    a, b = p.matrix()
    n = p.n
    planes, kinds = [], []
    for row, c in zip(a, p.constraints):
        planes.append((row, c.rhs))
        kinds.append(c.relation)
    for j, (lo, hi) in enumerate(p.bounds):
        e = np.zeros(n)
        e[j] = 1.0
        if math.isfinite(lo):
            planes.append((e, lo)), kinds.append(">=")
        if math.isfinite(hi):
            planes.append((e, hi)), kinds.append("<=")
    eq = [i for i, k in enumerate(kinds) if k == "="]
    others = [i for i, k in enumerate(kinds) if k != "="]
    need = n - len(eq)
    if need < 0:
        return None
    best = None
    sign = 1.0 if p.sense == "min" else -1.0
    for chosen in combinations(others, need):
        idx = eq + list(chosen)
        m = np.array([planes[i][0] for i in idx])
        rhs = np.array([planes[i][1] for i in idx])
        if abs(np.linalg.det(m)) < 1e-12:
            continue
        x = np.linalg.solve(m, rhs)
        ok = True
        for (row, r), k in zip(planes, kinds):
            v = row @ x
            scale = tol * max(1.0, abs(r))
            if (k == "<=" and v > r + scale) or (k == ">=" and v < r - scale) or (k == "=" and abs(v - r) > scale):
                ok = False
                break
        if ok:
            val = float(p.objective @ x)
            if best is None or sign * val < sign * best:
                best = val
    return best


def virtual_by_projection(phi0, phi1):
    """Virtual X/Y states by building the 2-qubit entangled state explicitly.

    Returns ``{label: (probability, bloch_vector)}``.
    """
    psi = (np.kron([1, 0], phi0) + np.kron([0, 1], phi1)) / math.sqrt(2)
    psi = psi.reshape(2, 2)  # control index first
    out = {}
    for basis, w in (("X", 1), ("Y", 1j)):
        for j in (0, 1):
            bra = np.array([1, (-1) ** j * w]).conj() / math.sqrt(2)
            resid = bra @ psi
            prob = float(np.vdot(resid, resid).real)
            rho = np.outer(resid, resid.conj()) / prob
            vec = np.array([2 * rho[0, 1].real, -2 * rho[0, 1].imag, (rho[0, 0] - rho[1, 1]).real])
            out[f"{j}{basis}"] = (prob, vec)
    return out


def singlet_overlap(ket_a, ket_b):
    """``|<Psi-| a b>|^2`` computed from amplitudes."""
    psi = np.array([0, 1, -1, 0]) / math.sqrt(2)
    return float(abs(np.vdot(psi, np.kron(ket_a, ket_b))) ** 2)


# Output modes: (detector, bin); detector 1 is the "+" port of the beam splitter.
_OUT = ((1, 0), (1, 1), (2, 0), (2, 1))
_SINGLET_CLICKS = ({(1, 0), (2, 1)}, {(1, 1), (2, 0)})


def _output_amplitudes(ket, sign):
    """Single-photon amplitudes on the four output modes for one input port."""
    return np.array([ket[b] * (1.0 if d == 1 else sign) / math.sqrt(2) for d, b in _OUT])


def fock_singlet_probability(ket_a, ket_b, t_a, t_b, dark):
    """Announcement probability for one photon from each side, by enumeration.

    Each photon survives independently; surviving photons are routed through
    the beam splitter with two-photon interference, then dark counts are
    added gate by gate and the click pattern is compared with the singlet
    patterns.
    """
    u = _output_amplitudes(ket_a, 1.0)
    v = _output_amplitudes(ket_b, -1.0)
    # distribution over multisets of occupied modes, for each survival case
    occupation = {}
    for alive_a, alive_b in product((0, 1), repeat=2):
        weight = (t_a if alive_a else 1 - t_a) * (t_b if alive_b else 1 - t_b)
        if alive_a and alive_b:
            for i in range(4):
                for j in range(i, 4):
                    if i == j:
                        pr = 2 * abs(u[i] * v[i]) ** 2
                    else:
                        pr = abs(u[i] * v[j] + u[j] * v[i]) ** 2
                    key = frozenset({_OUT[i], _OUT[j]})
                    occupation[key] = occupation.get(key, 0.0) + weight * pr
        elif alive_a or alive_b:
            amps = u if alive_a else v
            for i in range(4):
                key = frozenset({_OUT[i]})
                occupation[key] = occupation.get(key, 0.0) + weight * abs(amps[i]) ** 2
        else:
            occupation[frozenset()] = occupation.get(frozenset(), 0.0) + weight
    total = 0.0
    for lit, pr in occupation.items():
        for darks in product((0, 1), repeat=4):
            clicks = set(lit) | {m for m, dk in zip(_OUT, darks) if dk}
            pd = math.prod(dark if dk else 1 - dark for dk in darks)
            if clicks in _SINGLET_CLICKS:
                total += pr * pd
    return total
