"""Real left-eigenbases, physical observables, signed projections, compatibility.

The solver works on the complex block image L_A of a ring operator.  A left
eigenvector with real eigenvalue, ``A psi = psi lam``, is exactly a block
``Psi`` whose columns are eigenvectors of L_A for ``lam``.  Eigenspaces are
found in that picture and a ring-valued Gram-Schmidt then extracts vectors
with ``<psi|psi> = +-1``.  When every Gram-Schmidt pivot is isotropic the
remaining subspace is split directly using the indefinite complex form.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .bimodule import (
    ModuleVector,
    RingOperator,
    adjoint,
    apply,
    basis_vector,
    commutator,
    gram,
    inner_array,
    is_left_basis,
    outer,
    vector_to_json,
)
from .errors import NotCommuting, NotPhysical, NotPhysicalInput, UnknownEigenvalue
from .hypercomplex import Ring

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Tolerances:
    group_rtol: float = 1e-7  # eigenvalues closer than this (relative) share an eigenspace
    imag_tol: float = 1e-7  # largest tolerated imaginary eigenvalue part, relative to |L|
    null_tol: float = 1e-6  # eigenspace residual, relative to |L|
    singular_rtol: float = 1e-8  # ring invertibility threshold
    verify_tol: float = 1e-8  # final eigen / Gram residuals
    entry_tol: float = 1e-10  # entrywise operator comparisons


DEFAULT = Tolerances()


@dataclass(frozen=True, eq=False)
class SpectralResult:
    ring: Ring
    eigenvalues: tuple  # one real value per basis vector
    eigenvectors: tuple  # ModuleVector per basis vector
    signs: tuple  # +1 / -1 per basis vector
    grouping: tuple  # tuple of index tuples, one per distinct eigenvalue, ascending
    diagnostics: dict = field(default_factory=dict)

    @property
    def rank(self) -> int:
        return len(self.eigenvectors)

    @property
    def distinct_eigenvalues(self) -> tuple:
        return tuple(float(np.mean([self.eigenvalues[i] for i in g])) for g in self.grouping)

    def group_of(self, lam: float, rtol: float = DEFAULT.group_rtol) -> int:
        for k, mu in enumerate(self.distinct_eigenvalues):
            if abs(lam - mu) <= rtol * max(1.0, abs(lam), abs(mu)):
                return k
        raise UnknownEigenvalue(f"{lam!r} is not an eigenvalue; have {self.distinct_eigenvalues}")

    def projections(self) -> list["Projection"]:
        return [projection(self, lam) for lam in self.distinct_eigenvalues]

    def reconstruct(self) -> RingOperator:
        """sum_a psi_a lam_a eps_a <psi_a| ; reproduces the operator."""
        total = RingOperator(self.ring, self.ring.zeros((self.rank, self.rank)))
        for lam, psi, eps in zip(self.eigenvalues, self.eigenvectors, self.signs):
            total = total + outer(psi, psi) * float(lam * eps)
        return total

    def to_json(self) -> dict:
        return {
            "physical": True,
            "ring": self.ring.name,
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "signs": [int(s) for s in self.signs],
            "basis": [vector_to_json(v) for v in self.eigenvectors],
            "diagnostics": self.diagnostics,
        }


@dataclass(frozen=True, eq=False)
class Projection:
    operator: RingOperator
    eigenvalue: float
    signs: tuple


@dataclass(frozen=True, eq=False)
class PhysicalityReport:
    physical: bool
    result: Optional[SpectralResult]
    reason: str = ""
    hermitian: bool = False

    def __bool__(self):
        return self.physical


@dataclass(frozen=True, eq=False)
class CompatibilityReport:
    compatible: bool
    basis: tuple = ()
    a_values: tuple = ()
    b_values: tuple = ()
    signs: tuple = ()
    reason: str = ""

    def __bool__(self):
        return self.compatible


# ---------------------------------------------------------------------------
# Complex-picture helpers


def _metric(ring: Ring, n: int) -> np.ndarray:
    return np.kron(np.eye(n), ring.twist)


def _scale(m: np.ndarray) -> float:
    return max(1.0, float(np.linalg.norm(m, 2))) if m.size else 1.0


def _group_values(values: np.ndarray, rtol: float) -> list[list[int]]:
    order = np.argsort(values, kind="stable")
    groups: list[list[int]] = []
    for idx in order:
        if groups:
            prev = values[groups[-1][-1]]
            if abs(values[idx] - prev) <= rtol * max(1.0, abs(values[idx]), abs(prev)):
                groups[-1].append(int(idx))
                continue
        groups.append([int(idx)])
    return groups


def _eigenspaces(L: np.ndarray, Q: Optional[np.ndarray] = None,
                 tol: Tolerances = DEFAULT) -> list[tuple[float, np.ndarray]]:
    """Real eigenvalues and orthonormal eigenspace bases of L (restricted to span Q).

    Q must have orthonormal columns spanning an L-invariant subspace.
    Raises NotPhysical on non-real or defective spectra.
    """
    M = L if Q is None else Q.conj().T @ L @ Q
    k = M.shape[0]
    scale = _scale(M)
    if np.linalg.norm(M - M.conj().T) <= 1e-13 * scale * k:
        values, vecs = np.linalg.eigh((M + M.conj().T) / 2)
        hermitian = True
    else:
        values, vecs = np.linalg.eig(M)
        hermitian = False
        worst = float(np.max(np.abs(values.imag), initial=0.0))
        if worst > tol.imag_tol * scale:
            raise NotPhysical(f"non-real eigenvalues present (|Im| up to {worst:.3g})")
        values = values.real
    spaces = []
    for grp in _group_values(values, tol.group_rtol):
        lam = float(np.mean(values[grp]))
        if hermitian:
            basis = vecs[:, grp]
        else:
            _, s, vh = np.linalg.svd(M - lam * np.eye(k))
            m = len(grp)
            if s[k - m] > tol.null_tol * scale:
                raise NotPhysical(
                    f"eigenvalue {lam:.6g} is defective (multiplicity {m}, residual {s[k - m]:.3g})")
            basis = vh[k - m:].conj().T
        spaces.append((lam, basis if Q is None else Q @ basis))
    return spaces


def _spectral_projectors(spaces: Sequence[np.ndarray]) -> list[np.ndarray]:
    X = np.hstack(spaces)
    Xinv = np.linalg.inv(X)
    out, start = [], 0
    for S in spaces:
        stop = start + S.shape[1]
        out.append(S @ Xinv[start:stop])
        start = stop
    return out


# ---------------------------------------------------------------------------
# Ring-valued Gram-Schmidt


def _normalizer(ring: Ring, g: np.ndarray, tol: Tolerances):
    """Return (h, eps) with tilde(h) g h = eps, or None if g cannot be normalized.

    g must be a Hermitian ring value (tilde(g) = g).  A multiple of 1 is scaled
    by 1/sqrt|c|; otherwise the congruence is read off the complex image.
    """
    H = ring.twist @ ring.rep(g)
    H = (H + H.conj().T) / 2
    D, U = np.linalg.eigh(H)
    top = float(np.max(np.abs(D)))
    if top == 0.0 or float(np.min(np.abs(D))) <= tol.singular_rtol * top:
        return None
    sp = float(np.real(g[0]))
    rest = float(np.max(np.abs(g[1:]), initial=0.0))
    if sp != 0.0 and rest <= 1e-12 * abs(sp):
        h = ring.zeros()
        h[0] = 1.0 / np.sqrt(abs(sp))
        return h, (1 if sp > 0 else -1)
    eps = 1 if sp >= 0 else -1
    target = eps * np.real(np.diag(ring.twist))
    pos, neg = list(np.flatnonzero(D > 0)), list(np.flatnonzero(D < 0))
    if len(pos) != int(np.sum(target > 0)):
        return None
    perm = [pos.pop(0) if t > 0 else neg.pop(0) for t in target]
    Rh = U[:, perm] / np.sqrt(np.abs(D[perm]))
    return ring.from_rep(Rh), eps


def _deflate(v: ModuleVector, found: Sequence[tuple[ModuleVector, int]]) -> ModuleVector:
    ring = v.ring
    out = v.coeffs.copy()
    for psi, eps in found:
        c = inner_array(psi, v) * eps
        out = out - ring.mul(psi.coeffs, c)
    return ModuleVector(ring, out)


def _pick_pivot(cands, found, tol):
    best = None
    for v in cands:
        w = _deflate(v, found)
        if w.is_zero(1e-9):
            continue
        g = inner_array(w, w)
        norm = _normalizer(w.ring, g, tol)
        if norm is None:
            continue
        score = abs(float(np.real(g[0])))
        if best is None or score > best[0] * (1 + 1e-9):
            best = (score, w, norm)
    return best


def _fallback_split(space: np.ndarray, found, ring: Ring, n: int, need: int, lam: float,
                    tol: Tolerances):
    """Split what is left of an eigenspace using the indefinite complex form directly."""
    G = _metric(ring, n)
    R = space
    if found:
        F = np.hstack([psi.block() for psi, _ in found])
        C = F.conj().T @ G @ space
        _, s, vh = np.linalg.svd(C)
        rank = int(np.sum(s > 1e-10 * max(1.0, s[0] if s.size else 1.0)))
        R = space @ vh[rank:].conj().T
    form = R.conj().T @ G @ R
    form = (form + form.conj().T) / 2
    D, W = np.linalg.eigh(form)
    top = float(np.max(np.abs(D), initial=0.0))
    if top == 0.0 or float(np.min(np.abs(D))) <= tol.singular_rtol * top:
        raise NotPhysical(
            f"isotropic obstruction: scalar product is degenerate on the eigenspace of {lam:.6g}")
    U = (R @ W) / np.sqrt(np.abs(D))
    signs = np.real(np.diag(ring.twist))
    pos = [U[:, i] for i in np.flatnonzero(D > 0)]
    neg = [U[:, i] for i in np.flatnonzero(D < 0)]
    n_pos = int(np.sum(signs > 0))
    n_neg = ring.dim - n_pos
    if len(pos) != need * n_pos or len(neg) != need * n_neg:
        raise NotPhysical(
            f"eigenspace of {lam:.6g} has signature ({len(pos)}, {len(neg)}); "
            f"cannot split into {need} left-orthonormal vectors")
    out = []
    for _ in range(need):
        cols = [pos.pop(0) if s > 0 else neg.pop(0) for s in signs]
        out.append((ModuleVector.from_block(ring, np.column_stack(cols)), 1))
    return out


def _left_basis_in(space: np.ndarray, proj: np.ndarray, ring: Ring, n: int, lam: float,
                   tol: Tolerances, diagnostics: dict):
    d = ring.dim
    k = space.shape[1]
    if k % d:
        raise NotPhysical(
            f"eigenspace of {lam:.6g} has complex dimension {k}, not a multiple of {d}")
    need = k // d
    P = RingOperator.from_block(ring, proj)
    cands = [apply(P, basis_vector(ring, n, j)) for j in range(n)]
    cands = [c for c in cands if not c.is_zero(1e-9)]
    found: list[tuple[ModuleVector, int]] = []
    while len(found) < need:
        pick = _pick_pivot(cands, found, tol)
        if pick is None:
            pairs = [a + b for i, a in enumerate(cands) for b in cands[i + 1:]]
            pairs += [a - b for i, a in enumerate(cands) for b in cands[i + 1:]]
            pick = _pick_pivot(pairs, found, tol)
        if pick is None:
            break
        _, w, (h, eps) = pick
        found.append((ModuleVector(ring, ring.mul(w.coeffs, h)), eps))
    if len(found) < need:
        diagnostics.setdefault("fallback", []).append(float(lam))
        log.debug("Gram-Schmidt stalled on eigenvalue %g; splitting the complex form", lam)
        found += _fallback_split(space, found, ring, n, need - len(found), lam, tol)
    return found


def _verify(A: Optional[RingOperator], vecs, values, signs, tol: Tolerances) -> None:
    ring = vecs[0].ring
    if not is_left_basis(list(vecs), tol.singular_rtol):
        raise NotPhysical("eigenvectors do not form a left basis")
    g = gram(list(vecs)).gram
    target = ring.zeros(g.shape[:2])
    for a, eps in enumerate(signs):
        target[a, a, 0] = eps
    err = float(np.max(np.abs(g - target)))
    if err > tol.verify_tol:
        raise NotPhysical(f"eigenvectors are not orthonormal (Gram residual {err:.3g})")
    if A is not None:
        scale = max(1.0, float(np.max(np.abs(A.entries))))
        for psi, lam in zip(vecs, values):
            res = float(np.max(np.abs((apply(A, psi) - psi * float(lam)).coeffs)))
            if res > tol.verify_tol * scale:
                raise NotPhysical(f"eigen-equation residual {res:.3g} for eigenvalue {lam:.6g}")


def _assemble(ring, groups_found, extra_diag) -> SpectralResult:
    values, vecs, signs, grouping = [], [], [], []
    for lam, found in groups_found:
        idx = []
        for psi, eps in found:
            idx.append(len(vecs))
            vecs.append(psi)
            values.append(float(lam))
            signs.append(int(eps))
        grouping.append(tuple(idx))
    return SpectralResult(ring, tuple(values), tuple(vecs), tuple(signs), tuple(grouping),
                          dict(extra_diag))


# ---------------------------------------------------------------------------
# Public operations


def left_eigen_real(A: RingOperator, tol: Tolerances = DEFAULT) -> SpectralResult:
    """Left orthonormal eigenbasis with real eigenvalues, or raise NotPhysical."""
    ring, n = A.ring, A.rank
    spaces = _eigenspaces(A.block(), tol=tol)
    projs = _spectral_projectors([S for _, S in spaces])
    diagnostics: dict = {}
    groups_found = []
    for (lam, S), P in zip(spaces, projs):
        groups_found.append((lam, _left_basis_in(S, P, ring, n, lam, tol, diagnostics)))
    result = _assemble(ring, groups_found, diagnostics)
    _verify(A, result.eigenvectors, result.eigenvalues, result.signs, tol)
    return result


def is_hermitian(A: RingOperator, tol: float = DEFAULT.entry_tol) -> bool:
    scale = max(1.0, float(np.max(np.abs(A.entries), initial=0.0)))
    return bool(np.max(np.abs(A.entries - adjoint(A).entries), initial=0.0) <= tol * scale)


def is_physical(A: RingOperator, tol: Tolerances = DEFAULT) -> PhysicalityReport:
    herm = is_hermitian(A, max(tol.entry_tol, tol.verify_tol))
    try:
        result = left_eigen_real(A, tol)
    except NotPhysical as exc:
        return PhysicalityReport(False, None, exc.reason, herm)
    if not herm:
        raise AssertionError("physical operator failed the Hermiticity check")
    return PhysicalityReport(True, result, "", herm)


def projection(spec: SpectralResult, lam: float) -> Projection:
    """Signed projector sum_b eps_b |psi_b><psi_b| onto the eigenspace of lam."""
    k = spec.group_of(lam)
    idx = spec.grouping[k]
    total = spec.ring.zeros((spec.rank, spec.rank))
    for i in idx:
        total = total + outer(spec.eigenvectors[i], spec.eigenvectors[i]).entries * spec.signs[i]
    return Projection(RingOperator(spec.ring, total), spec.distinct_eigenvalues[k],
                      tuple(spec.signs[i] for i in idx))


def commute(A: RingOperator, B: RingOperator, tol: float = DEFAULT.entry_tol) -> bool:
    c = commutator(A, B).entries
    scale = max(1.0, float(np.max(np.abs(A.entries))), float(np.max(np.abs(B.entries))))
    return bool(np.max(np.abs(c), initial=0.0) <= tol * scale * scale)


def are_compatible(A: RingOperator, B: RingOperator,
                   tol: Tolerances = DEFAULT) -> CompatibilityReport:
    """Look for a common left orthonormal eigenbasis with real eigenvalues."""
    if not commute(A, B, max(tol.entry_tol, 1e-9)):
        raise NotCommuting("operators do not commute")
    for name, op in (("A", A), ("B", B)):
        rep = is_physical(op, tol)
        if not rep:
            raise NotPhysicalInput(f"{name} is not physical: {rep.reason}")
    ring, n = A.ring, A.rank
    LB = B.block()
    joint = []
    try:
        for lam, S in _eigenspaces(A.block(), tol=tol):
            for mu, T in _eigenspaces(LB, S, tol):
                joint.append((lam, mu, T))
    except NotPhysical as exc:
        return CompatibilityReport(False, reason=f"B restricted to an eigenspace of A: {exc.reason}")
    projs = _spectral_projectors([T for _, _, T in joint])
    vecs, avals, bvals, signs = [], [], [], []
    diag: dict = {}
    try:
        for (lam, mu, T), P in zip(joint, projs):
            for psi, eps in _left_basis_in(T, P, ring, n, lam, tol, diag):
                vecs.append(psi)
                avals.append(lam)
                bvals.append(mu)
                signs.append(eps)
        _verify(A, vecs, avals, signs, tol)
        _verify(B, vecs, bvals, signs, tol)
    except NotPhysical as exc:
        return CompatibilityReport(False, reason=exc.reason)
    return CompatibilityReport(True, tuple(vecs), tuple(avals), tuple(bvals), tuple(signs))


# ---------------------------------------------------------------------------
# Randomized look at "commuting physical observables are generically compatible"


def _paired_diagonal(rng: np.random.Generator, pairs: int, p_gamma: float) -> list:
    """Diagonal entries in span{1, g0}, in pairs (x + y g0, x - y g0) or (x, x')."""
    from .hypercomplex import CLIFFORD

    g0 = CLIFFORD.unit(1)
    out = []
    for _ in range(pairs):
        x = float(rng.integers(-2, 3))
        if rng.random() < p_gamma:
            y = float(rng.integers(1, 3))
            out += [x * CLIFFORD.one() + y * g0, x * CLIFFORD.one() - y * g0]
        else:
            out += [x * CLIFFORD.one(), float(rng.integers(-2, 3)) * CLIFFORD.one()]
    return out


def conjecture_scan(count: int = 100, seed: int = 0, max_pairs: int = 2,
                    p_gamma: float = 0.5, tol: Tolerances = DEFAULT) -> dict:
    """Draw commuting Clifford pairs and record how often they are compatible.

    Both operators are diagonal with entries in the commutative span of 1 and
    g0, then moved to a random frame by a generalized unitary.  Pairs where
    either operator fails the physicality test are counted separately.  This
    is an experiment: nothing is asserted about the outcome.
    """
    from .bimodule import compose, random_generalized_unitary
    from .hypercomplex import CLIFFORD

    counts = {"sampled": 0, "physical_pairs": 0, "compatible": 0}
    samples = []
    for i in range(count):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))
        pairs = int(rng.integers(1, max_pairs + 1))
        n = 2 * pairs
        a0 = RingOperator(CLIFFORD, _diag(_paired_diagonal(rng, pairs, p_gamma)))
        b0 = RingOperator(CLIFFORD, _diag(_paired_diagonal(rng, pairs, p_gamma)))
        U = random_generalized_unitary(CLIFFORD, n, rng)
        A = compose(compose(U, a0), U.adjoint())
        B = compose(compose(U, b0), U.adjoint())
        counts["sampled"] += 1
        if not (is_physical(A, tol) and is_physical(B, tol)):
            samples.append({"index": i, "rank": n, "physical": False, "compatible": None})
            continue
        counts["physical_pairs"] += 1
        comp = are_compatible(A, B, tol).compatible
        counts["compatible"] += int(comp)
        samples.append({"index": i, "rank": n, "physical": True, "compatible": comp})
    phys = counts["physical_pairs"]
    return {**counts, "seed": seed,
            "fraction_compatible": counts["compatible"] / phys if phys else None,
            "samples": samples}


def _diag(entries: list) -> np.ndarray:
    from .hypercomplex import CLIFFORD

    n = len(entries)
    out = CLIFFORD.zeros((n, n))
    for k, e in enumerate(entries):
        out[k, k] = e
    return out
