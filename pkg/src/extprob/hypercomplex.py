"""Quaternions and the complexified spacetime Clifford algebra Cl(1,3).

Both rings are described by a :class:`Ring` record holding a real/complex
structure tensor over a fixed basis, the involution (tilde) signs, and a
faithful complex matrix representation.  Coefficient arrays carry the basis
index on their last axis, so every ring operation broadcasts over leading
axes (vectors and operators over the ring reuse the same code).

Clifford blade order (16 entries)::

    1; g0, g1, g2, g3; g01, g02, g03, g12, g13, g23;
    g012, g013, g023, g123; g5 = g0123
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence, Union

import numpy as np

DEFAULT_TOL = 1e-10

# Minkowski metric diagonal, signature (+, -, -, -).
METRIC = (1.0, -1.0, -1.0, -1.0)


def _blade_masks() -> list[int]:
    masks = []
    for grade in range(5):
        for combo in combinations(range(4), grade):
            masks.append(sum(1 << mu for mu in combo))
    return masks


BLADE_MASKS = _blade_masks()
BLADE_NAMES = ["1"] + [
    "g" + "".join(str(mu) for mu in range(4) if m >> mu & 1) for m in BLADE_MASKS[1:]
]
BLADE_NAMES[-1] = "g5"
BLADE_GRADES = np.array([bin(m).count("1") for m in BLADE_MASKS])
_MASK_INDEX = {m: i for i, m in enumerate(BLADE_MASKS)}


def _reorder_sign(a: int, b: int) -> int:
    """Sign picked up when sorting the generator string of blade a * blade b."""
    a >>= 1
    swaps = 0
    while a:
        swaps += bin(a & b).count("1")
        a >>= 1
    return -1 if swaps & 1 else 1


def _blade_product(a: int, b: int) -> tuple[float, int]:
    sign = float(_reorder_sign(a, b))
    common = a & b
    for mu in range(4):
        if common >> mu & 1:
            sign *= METRIC[mu]
    return sign, a ^ b


def _pauli():
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    return sx, sy, sz


def dirac_gammas() -> np.ndarray:
    """Dirac representation: g0 = diag(1,1,-1,-1), gk = [[0, s_k], [-s_k, 0]]."""
    eye2 = np.eye(2, dtype=complex)
    zero = np.zeros((2, 2), dtype=complex)
    g = [np.block([[eye2, zero], [zero, -eye2]])]
    for s in _pauli():
        g.append(np.block([[zero, s], [-s, zero]]))
    return np.array(g)


class Ring:
    """A finite-dimensional star-ring over the reals or complexes.

    ``table[i, j, k]`` is the coefficient of basis element k in the product of
    basis elements i and j.  ``basis`` holds the d x d matrix image of each
    basis element and ``twist`` is the matrix J with rep(tilde a) = J rep(a)^H J.
    """

    def __init__(self, name, dtype, table, basis, tilde_sign, twist, names):
        self.name = name
        self.dtype = np.dtype(dtype)
        self.table = table
        self.basis = basis
        self.size = table.shape[0]
        self.dim = basis.shape[1]
        self.tilde_sign = tilde_sign
        self.twist = twist
        self.names = names
        self._basis_inv = np.array([np.linalg.inv(b) for b in basis])
        self._basis_inv.setflags(write=False)

    def __repr__(self):
        return f"Ring({self.name!r})"

    def __reduce__(self):
        return (ring_by_name, (self.name,))

    @property
    def is_complex(self) -> bool:
        return self.dtype.kind == "c"

    def zeros(self, shape=()) -> np.ndarray:
        return np.zeros(tuple(shape) + (self.size,), dtype=self.dtype)

    def one(self) -> np.ndarray:
        a = self.zeros()
        a[0] = 1.0
        return a

    def unit(self, index: int) -> np.ndarray:
        a = self.zeros()
        a[index] = 1.0
        return a

    def coerce(self, a) -> np.ndarray:
        a = np.asarray(a)
        if self.is_complex:
            return a.astype(complex, copy=False)
        if np.iscomplexobj(a):
            if np.any(a.imag != 0):
                raise TypeError(f"{self.name} coefficients must be real")
            a = a.real
        return a.astype(float, copy=False)

    def mul(self, a, b) -> np.ndarray:
        # contract a with the structure tensor first, then b via matmul (broadcasts)
        left = np.tensordot(np.asarray(a), self.table, axes=([-1], [0]))
        return (np.asarray(b)[..., None, :] @ left)[..., 0, :]

    def tilde(self, a) -> np.ndarray:
        a = np.asarray(a)
        return np.conj(a) * self.tilde_sign if self.is_complex else a * self.tilde_sign

    def scalar_part(self, a):
        return np.asarray(a)[..., 0]

    def rep(self, a) -> np.ndarray:
        return np.einsum("...i,ijk->...jk", a, self.basis)

    def from_rep(self, m) -> np.ndarray:
        """Inverse of :meth:`rep`; for quaternions, projects onto the image."""
        c = np.einsum("ijk,...kj->...i", self._basis_inv, m) / self.dim
        return c if self.is_complex else c.real.copy()

    def is_invertible(self, a, rtol: float = 1e-8) -> bool:
        s = np.linalg.svd(self.rep(a), compute_uv=False)
        return bool(s[-1] > rtol * max(s[0], np.finfo(float).tiny))

    def inv(self, a) -> np.ndarray:
        if not self.is_invertible(a):
            raise ZeroDivisionError(f"{self.name} element is not invertible")
        return self.from_rep(np.linalg.inv(self.rep(a)))

    def element(self, a):
        a = np.asarray(a)
        if self is QUATERNION:
            return Quaternion(*(float(x) for x in a))
        return CliffordElement(tuple(complex(x) for x in a))

    def to_json(self, a) -> list:
        a = np.asarray(a)
        if self.is_complex:
            return [[float(x.real), float(x.imag)] for x in a]
        return [float(x) for x in a]

    def from_json(self, data) -> np.ndarray:
        if self.is_complex:
            arr = np.array([complex(re, im) for re, im in data], dtype=complex)
        else:
            arr = np.array([float(x) for x in data], dtype=float)
        if arr.shape != (self.size,):
            raise ValueError(f"{self.name} element needs {self.size} coefficients, got {arr.shape[0]}")
        return arr


def _quaternion_ring() -> Ring:
    table = np.zeros((4, 4, 4))
    # (i, j) -> (sign, k) for i, j in {1, i, j, k}
    rules = {
        (1, 1): (-1, 0), (2, 2): (-1, 0), (3, 3): (-1, 0),
        (1, 2): (1, 3), (2, 1): (-1, 3),
        (2, 3): (1, 1), (3, 2): (-1, 1),
        (3, 1): (1, 2), (1, 3): (-1, 2),
    }
    for i in range(4):
        table[0, i, i] = 1.0
        table[i, 0, i] = 1.0
    for (i, j), (s, k) in rules.items():
        table[i, j, k] = s
    basis = np.array([
        np.eye(2),
        [[1j, 0], [0, -1j]],
        [[0, 1], [-1, 0]],
        [[0, 1j], [1j, 0]],
    ], dtype=complex)
    sign = np.array([1.0, -1.0, -1.0, -1.0])
    for arr in (table, basis, sign):
        arr.setflags(write=False)
    return Ring("quaternion", float, table, basis, sign, np.eye(2, dtype=complex),
                ["1", "i", "j", "k"])


def _clifford_ring() -> Ring:
    table = np.zeros((16, 16, 16))
    for i, a in enumerate(BLADE_MASKS):
        for j, b in enumerate(BLADE_MASKS):
            s, m = _blade_product(a, b)
            table[i, j, _MASK_INDEX[m]] = s
    gammas = dirac_gammas()
    basis = np.empty((16, 4, 4), dtype=complex)
    for i, m in enumerate(BLADE_MASKS):
        mat = np.eye(4, dtype=complex)
        for mu in range(4):
            if m >> mu & 1:
                mat = mat @ gammas[mu]
        basis[i] = mat
    k = BLADE_GRADES
    sign = np.where((k * (k - 1) // 2) % 2 == 0, 1.0, -1.0)
    twist = gammas[0].copy()
    for arr in (table, basis, sign, twist):
        arr.setflags(write=False)
    return Ring("clifford", complex, table, basis, sign, twist, list(BLADE_NAMES))


QUATERNION = _quaternion_ring()
CLIFFORD = _clifford_ring()
RINGS = {r.name: r for r in (QUATERNION, CLIFFORD)}


def ring_by_name(name: str) -> Ring:
    try:
        return RINGS[name]
    except KeyError:
        raise ValueError(f"unknown ring {name!r}; expected one of {sorted(RINGS)}") from None


# ---------------------------------------------------------------------------
# Element types


@dataclass(frozen=True)
class Quaternion:
    a0: float = 0.0
    a1: float = 0.0
    a2: float = 0.0
    a3: float = 0.0

    ring = QUATERNION

    def to_array(self) -> np.ndarray:
        return np.array([self.a0, self.a1, self.a2, self.a3], dtype=float)

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return qmul(self, other)
        if isinstance(other, (int, float)):
            return Quaternion(self.a0 * other, self.a1 * other, self.a2 * other, self.a3 * other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return self * other
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = Quaternion(float(other))
        if not isinstance(other, Quaternion):
            return NotImplemented
        return Quaternion(self.a0 + other.a0, self.a1 + other.a1, self.a2 + other.a2, self.a3 + other.a3)

    __radd__ = __add__

    def __neg__(self):
        return Quaternion(-self.a0, -self.a1, -self.a2, -self.a3)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __truediv__(self, other):
        if isinstance(other, (int, float)):
            return self * (1.0 / other)
        return self * qinv(other)

    def tilde(self) -> "Quaternion":
        return qconj(self)

    def norm2(self) -> float:
        return self.a0 ** 2 + self.a1 ** 2 + self.a2 ** 2 + self.a3 ** 2

    def scalar_part(self) -> float:
        return self.a0

    def isclose(self, other, tol: float = DEFAULT_TOL) -> bool:
        return bool(np.max(np.abs(self.to_array() - _as_array(other, QUATERNION))) <= tol)


@dataclass(frozen=True)
class CliffordElement:
    coeffs: tuple = (0j,) * 16

    ring = CLIFFORD

    def __post_init__(self):
        if len(self.coeffs) != 16:
            raise ValueError("a Clifford element has 16 coefficients")

    @classmethod
    def from_array(cls, a) -> "CliffordElement":
        return cls(tuple(complex(x) for x in np.asarray(a)))

    @classmethod
    def scalar(cls, c: complex) -> "CliffordElement":
        return cls((complex(c),) + (0j,) * 15)

    @classmethod
    def blade(cls, name: str, c: complex = 1.0) -> "CliffordElement":
        a = [0j] * 16
        a[BLADE_NAMES.index(name)] = complex(c)
        return cls(tuple(a))

    def to_array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=complex)

    def __mul__(self, other):
        if isinstance(other, CliffordElement):
            return cmul(self, other)
        if isinstance(other, (int, float, complex)):
            return CliffordElement.from_array(self.to_array() * other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self * other
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = CliffordElement.scalar(other)
        if not isinstance(other, CliffordElement):
            return NotImplemented
        return CliffordElement.from_array(self.to_array() + other.to_array())

    __radd__ = __add__

    def __neg__(self):
        return CliffordElement.from_array(-self.to_array())

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def tilde(self) -> "CliffordElement":
        return ctilde(self)

    def scalar_part(self) -> complex:
        return self.coeffs[0]

    def isclose(self, other, tol: float = DEFAULT_TOL) -> bool:
        return bool(np.max(np.abs(self.to_array() - _as_array(other, CLIFFORD))) <= tol)

    def __str__(self):
        terms = [f"({c:g}){n}" for c, n in zip(self.coeffs, BLADE_NAMES) if c != 0]
        return " + ".join(terms) or "0"


RingElement = Union[Quaternion, CliffordElement]

# Generators, for convenience.
ONE_Q = Quaternion(1.0)
I_Q, J_Q, K_Q = Quaternion(0, 1), Quaternion(0, 0, 1), Quaternion(0, 0, 0, 1)
GAMMA = tuple(CliffordElement.blade(f"g{mu}") for mu in range(4))
GAMMA5 = CliffordElement.blade("g5")
ONE_C = CliffordElement.scalar(1.0)


def _as_array(a, ring: Ring) -> np.ndarray:
    if isinstance(a, (Quaternion, CliffordElement)):
        return a.to_array()
    if isinstance(a, (int, float, complex)):
        out = ring.zeros()
        out[0] = a
        return out
    return ring.coerce(a)


def ring_of(a) -> Ring:
    if isinstance(a, Quaternion):
        return QUATERNION
    if isinstance(a, CliffordElement):
        return CLIFFORD
    raise TypeError(f"not a ring element: {a!r}")


# ---------------------------------------------------------------------------
# Operations


def qmul(a: Quaternion, b: Quaternion) -> Quaternion:
    return Quaternion(
        a.a0 * b.a0 - a.a1 * b.a1 - a.a2 * b.a2 - a.a3 * b.a3,
        a.a0 * b.a1 + a.a1 * b.a0 + a.a2 * b.a3 - a.a3 * b.a2,
        a.a0 * b.a2 - a.a1 * b.a3 + a.a2 * b.a0 + a.a3 * b.a1,
        a.a0 * b.a3 + a.a1 * b.a2 - a.a2 * b.a1 + a.a3 * b.a0,
    )


def qconj(a: Quaternion) -> Quaternion:
    return Quaternion(a.a0, -a.a1, -a.a2, -a.a3)


def qinv(a: Quaternion) -> Quaternion:
    n2 = a.norm2()
    if n2 == 0.0:
        raise ZeroDivisionError("quaternion 0 has no inverse")
    c = qconj(a)
    return Quaternion(c.a0 / n2, c.a1 / n2, c.a2 / n2, c.a3 / n2)


def cmul(a: CliffordElement, b: CliffordElement) -> CliffordElement:
    return CliffordElement.from_array(CLIFFORD.mul(a.to_array(), b.to_array()))


def ctilde(a: CliffordElement) -> CliffordElement:
    """Conjugate-linear anti-automorphism fixing every generator."""
    return CliffordElement.from_array(CLIFFORD.tilde(a.to_array()))


def cinv(a: CliffordElement) -> CliffordElement:
    return CliffordElement.from_array(CLIFFORD.inv(a.to_array()))


def scalar_part(a: RingElement):
    return a.scalar_part()


def rep(a: RingElement) -> np.ndarray:
    """d x d complex matrix image (d=2 for quaternions, d=4 for Clifford)."""
    return ring_of(a).rep(a.to_array())


def element_to_json(a: RingElement) -> list:
    return ring_of(a).to_json(a.to_array())


def element_from_json(ring: Union[str, Ring], data: Sequence):
    ring = ring_by_name(ring) if isinstance(ring, str) else ring
    return ring.element(ring.from_json(data))


def random_element(ring: Ring, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    a = rng.normal(size=ring.size) * scale
    if ring.is_complex:
        a = a + 1j * rng.normal(size=ring.size) * scale
    return a


