"""Free finite-rank bimodules over a star-ring.

A vector ``v = sum_a e_a r_a`` is stored as its right coefficients against the
distinguished orthonormal left basis ``e_a``.  The scalar product is

    <v|w> = sum_a tilde(r_a) s_a,

which is right-linear in ``w`` and satisfies ``<v|qw> = <tilde(q) v|w>``.
Operators act by left multiplication of their ring-valued matrix on the
coefficient column, so they commute with right scalar multiplication.

Every vector also has a block image: stacking ``rep(r_a)`` gives an
``(n*d, d)`` complex matrix; operators give ``(n*d, n*d)`` block matrices.
In that picture the scalar product is ``J V^H G W`` with ``G = I_n (x) J``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import RankMismatch, RingMismatch
from .hypercomplex import (
    CliffordElement,
    Quaternion,
    Ring,
    random_element,
    ring_by_name,
    ring_of,
)

SINGULAR_RTOL = 1e-8

Scalar = Union[int, float, complex, Quaternion, CliffordElement, np.ndarray]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def _scalar_array(ring: Ring, q) -> np.ndarray:
    if isinstance(q, (Quaternion, CliffordElement)):
        if ring_of(q) is not ring:
            raise RingMismatch(f"scalar from {ring_of(q).name} used with {ring.name} module")
        return q.to_array()
    if isinstance(q, (int, float, complex, np.number)):
        out = ring.zeros()
        out[0] = q
        return out
    return ring.coerce(q)


def _check_pair(x, y):
    if x.ring is not y.ring:
        raise RingMismatch(f"{x.ring.name} vs {y.ring.name}")
    if x.rank != y.rank:
        raise RankMismatch(f"rank {x.rank} vs rank {y.rank}")


@dataclass(frozen=True, eq=False)
class ModuleVector:
    ring: Ring
    coeffs: np.ndarray  # (n, ring.size)

    def __post_init__(self):
        c = self.ring.coerce(self.coeffs)
        if c.ndim != 2 or c.shape[1] != self.ring.size:
            raise ValueError(f"coefficients must have shape (n, {self.ring.size}), got {c.shape}")
        object.__setattr__(self, "coeffs", _frozen(c))

    @property
    def rank(self) -> int:
        return self.coeffs.shape[0]

    def __getitem__(self, a: int):
        return self.ring.element(self.coeffs[a])

    def __add__(self, other: "ModuleVector") -> "ModuleVector":
        _check_pair(self, other)
        return ModuleVector(self.ring, self.coeffs + other.coeffs)

    def __sub__(self, other: "ModuleVector") -> "ModuleVector":
        _check_pair(self, other)
        return ModuleVector(self.ring, self.coeffs - other.coeffs)

    def __neg__(self) -> "ModuleVector":
        return ModuleVector(self.ring, -self.coeffs)

    def __mul__(self, q) -> "ModuleVector":
        """Right scalar multiplication ``v q``."""
        qa = _scalar_array(self.ring, q)
        return ModuleVector(self.ring, self.ring.mul(self.coeffs, qa))

    def __rmul__(self, q) -> "ModuleVector":
        """Left scalar multiplication ``q v`` (acts on every coefficient from the left)."""
        qa = _scalar_array(self.ring, q)
        return ModuleVector(self.ring, self.ring.mul(qa, self.coeffs))

    def __truediv__(self, x: float) -> "ModuleVector":
        return ModuleVector(self.ring, self.coeffs / x)

    def block(self) -> np.ndarray:
        return self.ring.rep(self.coeffs).reshape(self.rank * self.ring.dim, self.ring.dim)

    @classmethod
    def from_block(cls, ring: Ring, block: np.ndarray) -> "ModuleVector":
        d = ring.dim
        n = block.shape[0] // d
        return cls(ring, ring.from_rep(block.reshape(n, d, d)))

    def isclose(self, other: "ModuleVector", tol: float = 1e-10) -> bool:
        _check_pair(self, other)
        return bool(np.max(np.abs(self.coeffs - other.coeffs), initial=0.0) <= tol)

    def is_zero(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.coeffs), initial=0.0) <= tol)


@dataclass(frozen=True, eq=False)
class RingOperator:
    """n x n matrix of ring elements; A(e_a) = sum_b e_b A[b, a]."""

    ring: Ring
    entries: np.ndarray  # (n, n, ring.size)

    def __post_init__(self):
        c = self.ring.coerce(self.entries)
        if c.ndim != 3 or c.shape[0] != c.shape[1] or c.shape[2] != self.ring.size:
            raise ValueError(f"entries must have shape (n, n, {self.ring.size}), got {c.shape}")
        object.__setattr__(self, "entries", _frozen(c))

    @property
    def rank(self) -> int:
        return self.entries.shape[0]

    def __getitem__(self, idx):
        return self.ring.element(self.entries[idx])

    def __matmul__(self, other):
        if isinstance(other, ModuleVector):
            return apply(self, other)
        if isinstance(other, RingOperator):
            return compose(self, other)
        return NotImplemented

    def __add__(self, other: "RingOperator") -> "RingOperator":
        _check_pair(self, other)
        return RingOperator(self.ring, self.entries + other.entries)

    def __sub__(self, other: "RingOperator") -> "RingOperator":
        _check_pair(self, other)
        return RingOperator(self.ring, self.entries - other.entries)

    def __neg__(self) -> "RingOperator":
        return RingOperator(self.ring, -self.entries)

    def __mul__(self, x) -> "RingOperator":
        if isinstance(x, (int, float)):
            return RingOperator(self.ring, self.entries * x)
        return NotImplemented

    __rmul__ = __mul__

    def adjoint(self) -> "RingOperator":
        return adjoint(self)

    def block(self) -> np.ndarray:
        n, d = self.rank, self.ring.dim
        blocks = self.ring.rep(self.entries)  # (n, n, d, d)
        return blocks.transpose(0, 2, 1, 3).reshape(n * d, n * d)

    @classmethod
    def from_block(cls, ring: Ring, block: np.ndarray) -> "RingOperator":
        d = ring.dim
        n = block.shape[0] // d
        blocks = block.reshape(n, d, n, d).transpose(0, 2, 1, 3)
        return cls(ring, ring.from_rep(blocks))

    def isclose(self, other: "RingOperator", tol: float = 1e-10) -> bool:
        _check_pair(self, other)
        return bool(np.max(np.abs(self.entries - other.entries), initial=0.0) <= tol)


@dataclass(frozen=True, eq=False)
class GramData:
    ring: Ring
    gram: np.ndarray  # (m, m, ring.size)

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        swapped = self.ring.tilde(self.gram.transpose(1, 0, 2))
        return bool(np.max(np.abs(self.gram - swapped), initial=0.0) <= tol)

    def scalar_parts(self) -> np.ndarray:
        return self.ring.scalar_part(self.gram)


# ---------------------------------------------------------------------------
# Constructors


def basis_vector(ring: Ring, n: int, k: int) -> ModuleVector:
    c = ring.zeros((n,))
    c[k, 0] = 1.0
    return ModuleVector(ring, c)


def standard_basis(ring: Ring, n: int) -> list[ModuleVector]:
    return [basis_vector(ring, n, k) for k in range(n)]


def vector(ring: Ring, coeffs: Sequence[Scalar]) -> ModuleVector:
    return ModuleVector(ring, np.array([_scalar_array(ring, c) for c in coeffs]))


def operator(ring: Ring, rows: Sequence[Sequence[Scalar]]) -> RingOperator:
    return RingOperator(ring, np.array([[_scalar_array(ring, c) for c in row] for row in rows]))


def identity(ring: Ring, n: int) -> RingOperator:
    return diagonal(ring, [1.0] * n)


def diagonal(ring: Ring, diag: Sequence[Scalar]) -> RingOperator:
    n = len(diag)
    e = ring.zeros((n, n))
    for a, q in enumerate(diag):
        e[a, a] = _scalar_array(ring, q)
    return RingOperator(ring, e)


def from_columns(vs: Sequence[ModuleVector]) -> RingOperator:
    """Operator whose a-th column holds the coefficients of vs[a] (maps e_a to vs[a])."""
    ring = vs[0].ring
    for v in vs[1:]:
        _check_pair(vs[0], v)
    return RingOperator(ring, np.stack([v.coeffs for v in vs], axis=1))


def outer(v: ModuleVector, w: ModuleVector) -> RingOperator:
    """The operator ``|v><w|``, sending u to ``v <w|u>``."""
    _check_pair(v, w)
    r = v.ring
    return RingOperator(r, r.mul(v.coeffs[:, None, :], r.tilde(w.coeffs)[None, :, :]))


# ---------------------------------------------------------------------------
# Operations


def inner_array(v: ModuleVector, w: ModuleVector) -> np.ndarray:
    _check_pair(v, w)
    r = v.ring
    return r.mul(r.tilde(v.coeffs), w.coeffs).sum(axis=0)


def inner(v: ModuleVector, w: ModuleVector):
    """Ring-valued scalar product <v|w>."""
    return v.ring.element(inner_array(v, w))


def inner_via_rep(v: ModuleVector, w: ModuleVector) -> np.ndarray:
    """Matrix image of <v|w> computed from block images (representation cross-check)."""
    _check_pair(v, w)
    r = v.ring
    big_j = np.kron(np.eye(v.rank), r.twist)
    return r.twist @ v.block().conj().T @ big_j @ w.block()


def gram(vs: Sequence[ModuleVector]) -> GramData:
    ring = vs[0].ring
    m = len(vs)
    g = ring.zeros((m, m))
    for a in range(m):
        for b in range(m):
            g[a, b] = inner_array(vs[a], vs[b])
    return GramData(ring, g)


def is_left_basis(vs: Sequence[ModuleVector], rtol: float = SINGULAR_RTOL) -> bool:
    """True iff every vector is uniquely a right combination of ``vs``."""
    if not vs:
        return False
    n = vs[0].rank
    if len(vs) != n:
        return False
    s = np.linalg.svd(from_columns(vs).block(), compute_uv=False)
    return bool(s[-1] > rtol * s[0])


def adjoint(A: RingOperator) -> RingOperator:
    return RingOperator(A.ring, A.ring.tilde(A.entries.transpose(1, 0, 2)))


def apply(A: RingOperator, v: ModuleVector) -> ModuleVector:
    _check_pair(A, v)
    r = A.ring
    return ModuleVector(r, r.mul(A.entries, v.coeffs[None, :, :]).sum(axis=1))


def compose(A: RingOperator, B: RingOperator) -> RingOperator:
    """The operator product AB (apply B first)."""
    _check_pair(A, B)
    r = A.ring
    return RingOperator(r, np.einsum("ijp,jkq,pqr->ikr", A.entries, B.entries, r.table))


def commutator(A: RingOperator, B: RingOperator) -> RingOperator:
    return compose(A, B) - compose(B, A)


def expectation(A: RingOperator, v: ModuleVector) -> np.ndarray:
    """Ring value <v|A v>."""
    return inner_array(v, apply(A, v))


# ---------------------------------------------------------------------------
# Random instances


def random_vector(ring: Ring, n: int, rng: np.random.Generator, scale: float = 1.0) -> ModuleVector:
    return ModuleVector(ring, np.array([random_element(ring, rng, scale) for _ in range(n)]))


def random_operator(ring: Ring, n: int, rng: np.random.Generator, scale: float = 1.0) -> RingOperator:
    e = np.array([[random_element(ring, rng, scale) for _ in range(n)] for _ in range(n)])
    return RingOperator(ring, e)


def random_hermitian(ring: Ring, n: int, rng: np.random.Generator, scale: float = 1.0) -> RingOperator:
    m = random_operator(ring, n, rng, scale)
    return (m + adjoint(m)) * 0.5


def random_generalized_unitary(ring: Ring, n: int, rng: np.random.Generator,
                               scale: float = 0.3) -> RingOperator:
    """U with U^dagger U = 1, built as the exponential of an anti-Hermitian operator."""
    from scipy.linalg import expm

    m = random_operator(ring, n, rng, scale / np.sqrt(ring.size))
    k = m - adjoint(m)
    return RingOperator.from_block(ring, expm(k.block()))


# ---------------------------------------------------------------------------
# JSON


def vector_to_json(v: ModuleVector) -> dict:
    return {"ring": v.ring.name, "rank": v.rank, "coeffs": [v.ring.to_json(c) for c in v.coeffs]}


def vector_from_json(data: dict) -> ModuleVector:
    ring = ring_by_name(data["ring"])
    coeffs = [ring.from_json(c) for c in data["coeffs"]]
    if len(coeffs) != data["rank"]:
        raise RankMismatch(f"rank {data['rank']} but {len(coeffs)} coefficients")
    return ModuleVector(ring, np.array(coeffs).reshape(len(coeffs), ring.size))


def operator_to_json(A: RingOperator) -> dict:
    flat = A.entries.reshape(A.rank * A.rank, A.ring.size)
    return {"ring": A.ring.name, "rank": A.rank, "entries": [A.ring.to_json(c) for c in flat]}


def operator_from_json(data: dict) -> RingOperator:
    ring = ring_by_name(data["ring"])
    n = data["rank"]
    entries = [ring.from_json(c) for c in data["entries"]]
    if len(entries) != n * n:
        raise RankMismatch(f"rank {n} needs {n * n} entries, got {len(entries)}")
    return RingOperator(ring, np.array(entries).reshape(n, n, ring.size))


def vectors_to_json(vs: Iterable[ModuleVector]) -> list:
    return [vector_to_json(v) for v in vs]
