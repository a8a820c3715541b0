"""Reference implementations that share no code with the package.

Everything here is written from plain matrices: Pauli blocks for the Dirac
matrices, 2x2 complex matrices for quaternions, and ordinary complex linear
algebra for the Born rule.
"""

from fractions import Fraction
from itertools import combinations

import numpy as np

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)
Z2 = np.zeros((2, 2), dtype=complex)


def dirac_matrices():
    g0 = np.block([[I2, Z2], [Z2, -I2]])
    gk = [np.block([[Z2, s], [-s, Z2]]) for s in (SX, SY, SZ)]
    return [g0] + gk


def blade_matrices():
    """The 16 blade matrices in canonical order: grade by grade, lexicographic indices."""
    g = dirac_matrices()
    out = []
    for grade in range(5):
        for combo in combinations(range(4), grade):
            m = np.eye(4, dtype=complex)
            for mu in combo:
                m = m @ g[mu]
            out.append(m)
    return out


def clifford_matrix(coeffs):
    return sum(c * m for c, m in zip(coeffs, blade_matrices()))


def clifford_from_matrix(m):
    # blades are orthogonal under the trace pairing tr(B_a^{-1} B_b) = 4 delta
    return np.array([np.trace(np.linalg.inv(b) @ m) / 4 for b in blade_matrices()])


def quaternion_matrix(a):
    a0, a1, a2, a3 = a
    return a0 * I2 + a1 * np.diag([1j, -1j]) + a2 * np.array([[0, 1], [-1, 0]]) + a3 * np.array([[0, 1j], [1j, 0]])


def quaternion_product(a, b):
    m = quaternion_matrix(a) @ quaternion_matrix(b)
    return np.array([m[0, 0].real, m[0, 0].imag, m[0, 1].real, m[0, 1].imag])


def reversion_sign(grade):
    return (-1) ** (grade * (grade - 1) // 2)


BLADE_GRADES = [g for g in range(5) for _ in combinations(range(4), g)]


def born(psi, eigvecs_by_value):
    """Born probabilities |<e|psi>|^2 / <psi|psi> for a positive-definite complex state."""
    psi = np.asarray(psi, dtype=complex)
    norm = np.vdot(psi, psi).real
    return {lam: sum(abs(np.vdot(e, psi)) ** 2 for e in vecs) / norm
            for lam, vecs in eigvecs_by_value.items()}


def singlet_chsh(a, a2, b, b2):
    """-cos(theta_a - theta_b) correlators of the 4x4 singlet, combined into S."""
    def spin(t):
        return np.cos(t) * SZ + np.sin(t) * SX

    psi = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)

    def E(x, y):
        return np.vdot(psi, np.kron(spin(x), spin(y)) @ psi).real

    return E(a, b) + E(a, b2) + E(a2, b) - E(a2, b2)


def color_expectations(model):
    """Exact rational P_a and 1 - P_0 for a {n: p} model given with decimal strings."""
    probs = {n: Fraction(p) for n, p in model.items()}
    pa = sum(n * p for n, p in probs.items())
    return pa, 1 - probs.get(0, Fraction(0))
