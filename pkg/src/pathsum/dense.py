"""Dense matrix oracle for circuits, independent of the path-sum machinery.

Gates are applied as explicit matrices via tensor reshaping; qubit 0 is the
most significant bit of the basis index.  Desk-scale only.
"""

from __future__ import annotations

import numpy as np

from .circuit import Circuit, Gate, gate_angle
from .errors import ResourceLimit

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


def gate_matrix(g: Gate) -> np.ndarray:
    """The textbook matrix of a gate on its own qubits (controls first)."""
    k = len(g.qubits)
    if g.name == "h":
        return _H
    if g.name == "swap":
        return _SWAP
    if g.name in ("x", "cx", "ccx", "mcx"):
        m = np.eye(1 << k, dtype=complex)
        m[-2:, -2:] = _X
        return m
    if g.name == "gphase":
        return np.array([[np.exp(2j * np.pi * float(g.angle))]])
    # diagonal rotations: z, s, sdg, t, tdg, cz, ccz, rz, crz, mcrz
    theta = gate_angle(g)
    d = np.ones(1 << k, dtype=complex)
    d[-1] = np.exp(2j * np.pi * float(theta))
    return np.diag(d)


def apply_gate(state: np.ndarray, g: Gate, n: int) -> np.ndarray:
    """Apply a gate to a (2^n, ...) array of column vectors."""
    if g.name == "gphase":
        return state * np.exp(2j * np.pi * float(g.angle))
    k = len(g.qubits)
    cols = state.shape[1] if state.ndim == 2 else 1
    t = state.reshape((2,) * n + (cols,))
    t = np.moveaxis(t, g.qubits, range(k))
    t = gate_matrix(g) @ t.reshape(1 << k, -1)
    t = t.reshape((2,) * n + (cols,))
    t = np.moveaxis(t, range(k), g.qubits)
    return t.reshape(1 << n, cols)


def unitary(c: Circuit, max_qubits: int = 12) -> np.ndarray:
    """The 2^n x 2^n matrix of a circuit, built gate by gate."""
    if c.width > max_qubits:
        raise ResourceLimit(f"{c.width} qubits exceeds dense cap {max_qubits}")
    m = np.eye(1 << c.width, dtype=complex)
    for g in c.gates:
        m = apply_gate(m, g, c.width)
    return m
