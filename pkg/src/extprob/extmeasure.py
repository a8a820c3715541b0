"""Renormalized measurement statistics for indefinite scalar products.

Raw weights ``phi_lam = <phi|P_lam phi>`` may have scalar parts below zero or
above one.  They are turned into a distribution by

    P(phi, lam) = |sp(phi_lam)| / sum_mu |sp(phi_mu)|.

Sequential measurement of two compatible observables uses the same rule twice
(first the outcome of the first measurement, then the conditional outcome of
the second), which makes joint statistics depend on the order.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .bimodule import ModuleVector, RingOperator, apply, compose, inner_array, operator
from .errors import DegenerateState, NotCommuting, WeightSumInvalid
from .hypercomplex import Ring
from .spectral import Projection, SpectralResult, commute

SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class RawWeight:
    eigenvalue: float
    value: np.ndarray  # full ring value <phi|P phi>
    scalar: float
    magnitude: float

    @property
    def residual(self) -> float:
        """Size of the non-scalar remainder (diagnostic only)."""
        return float(np.max(np.abs(self.value[1:]), initial=0.0))


@dataclass(frozen=True, eq=False)
class ExtDistribution:
    eigenvalues: tuple
    probabilities: tuple
    raw: tuple
    denominator: float

    @property
    def entries(self) -> dict:
        return dict(zip(self.eigenvalues, self.probabilities))

    def to_json(self) -> dict:
        return {
            "eigenvalues": list(self.eigenvalues),
            "probabilities": list(self.probabilities),
            "raw": [{"eigenvalue": w.eigenvalue, "scalar": w.scalar, "residual": w.residual}
                    for w in self.raw],
            "denominator": self.denominator,
        }


def _scalar(ring: Ring, value: np.ndarray) -> float:
    return float(np.real(ring.scalar_part(value)))


def raw_weights(phi: ModuleVector, spec: SpectralResult) -> list[RawWeight]:
    out = []
    for P in spec.projections():
        value = inner_array(phi, apply(P.operator, phi))
        s = _scalar(phi.ring, value)
        out.append(RawWeight(P.eigenvalue, value, s, abs(s)))
    return out


def ext_probabilities(weights: Sequence[RawWeight]) -> ExtDistribution:
    denom = float(sum(w.magnitude for w in weights))
    if denom == 0.0:
        raise DegenerateState("every raw weight has zero scalar part")
    probs = tuple(w.magnitude / denom for w in weights)
    return ExtDistribution(tuple(w.eigenvalue for w in weights), probs, tuple(weights), denom)


def measure(phi: ModuleVector, spec: SpectralResult) -> ExtDistribution:
    return ext_probabilities(raw_weights(phi, spec))


def collapse(phi: ModuleVector, P: Projection) -> ModuleVector:
    """Post-measurement state P phi, left unnormalized."""
    return apply(P.operator, phi)


# ---------------------------------------------------------------------------
# Sequential joint measurements


def _check_commuting(ps: Sequence[Projection], qs: Sequence[Projection], tol: float = 1e-9):
    for P in ps:
        for Q in qs:
            if not commute(P.operator, Q.operator, tol):
                raise NotCommuting(
                    f"projections for {P.eigenvalue:.6g} and {Q.eigenvalue:.6g} do not commute")


def joint_weights(psi: ModuleVector, A: SpectralResult, B: SpectralResult) -> dict:
    """Scalar parts of <psi|P_i Q_j P_i psi>, <psi|P_i psi> and <psi|Q_j psi>."""
    ps, qs = A.projections(), B.projections()
    _check_commuting(ps, qs)
    ring = psi.ring
    p_psi = [apply(P.operator, psi) for P in ps]
    q_psi = [apply(Q.operator, psi) for Q in qs]
    pqp = np.array([[_scalar(ring, inner_array(psi, apply(compose(P.operator, Q.operator), pp)))
                     for Q in qs] for P, pp in zip(ps, p_psi)])
    qpq = np.array([[_scalar(ring, inner_array(psi, apply(compose(Q.operator, P.operator), qq)))
                     for Q, qq in zip(qs, q_psi)] for P in ps])
    a = np.array([_scalar(ring, inner_array(psi, pp)) for pp in p_psi])
    b = np.array([_scalar(ring, inner_array(psi, qq)) for qq in q_psi])
    return {"a_first": pqp, "b_first": qpq, "a": a, "b": b}


def _sequential(cond: np.ndarray, first: np.ndarray) -> np.ndarray:
    """Rows index the first outcome; cond[i, j] is the raw weight of j after i."""
    denom = np.sum(np.abs(first))
    if denom == 0.0:
        raise DegenerateState("first measurement has vanishing total weight")
    out = np.zeros_like(cond, dtype=float)
    for i in range(cond.shape[0]):
        outer_p = abs(first[i]) / denom
        row = np.sum(np.abs(cond[i]))
        if outer_p == 0.0:
            continue  # the conditional is undefined but the joint event has weight zero
        if row == 0.0:
            raise DegenerateState(f"conditional weights vanish after first outcome {i}")
        out[i] = np.abs(cond[i]) / row * outer_p
    return out


def joint_table(psi: ModuleVector, A: SpectralResult, B: SpectralResult,
                order: str = "a-first", weights: Optional[dict] = None) -> np.ndarray:
    """Table T[i, j] of joint probabilities for A-outcome i and B-outcome j."""
    w = weights if weights is not None else joint_weights(psi, A, B)
    a_first = _sequential(w["a_first"], w["a"])
    if order == "a-first":
        return a_first
    b_first = _sequential(w["b_first"].T, w["b"]).T
    if order == "b-first":
        return b_first
    if order == "symmetric":
        return 0.5 * a_first + 0.5 * b_first
    raise ValueError(f"order must be a-first, b-first or symmetric, not {order!r}")


def ordered_joint(psi: ModuleVector, A: SpectralResult, B: SpectralResult, i: int, j: int) -> float:
    """Probability of A-outcome i then B-outcome j when A is measured first."""
    return float(joint_table(psi, A, B, "a-first")[i, j])


def symmetrized_joint(psi: ModuleVector, A: SpectralResult, B: SpectralResult, i: int, j: int) -> float:
    """Average of both measurement orders."""
    return float(joint_table(psi, A, B, "symmetric")[i, j])


def joint_from_weights(pair: np.ndarray, order: str = "a-first") -> np.ndarray:
    """Sequential statistics from a matrix of joint raw weights W[i, j].

    Uses the identities sum_j W[i, j] = <P_i> and sum_i W[i, j] = <Q_j>.
    """
    pair = np.asarray(pair, dtype=float)
    w = {"a_first": pair, "b_first": pair, "a": pair.sum(axis=1), "b": pair.sum(axis=0)}
    return joint_table(None, None, None, order, weights=w)


@dataclass(frozen=True)
class MarginalReport:
    a_marginal: tuple
    a_solo: tuple
    a_gap: float
    b_marginal: tuple
    b_solo: tuple
    b_gap: float
    order_gap: float  # max |T_a-first - T_b-first|

    def to_json(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


def first_marginal_invariance(psi: ModuleVector, A: SpectralResult, B: SpectralResult) -> MarginalReport:
    """Compare marginals of the A-first joint table with each observable's solo statistics."""
    w = joint_weights(psi, A, B)
    table = joint_table(psi, A, B, "a-first", w)
    other = joint_table(psi, A, B, "b-first", w)
    a_solo = np.abs(w["a"]) / np.sum(np.abs(w["a"]))
    b_solo = np.abs(w["b"]) / np.sum(np.abs(w["b"]))
    a_marg, b_marg = table.sum(axis=1), table.sum(axis=0)
    return MarginalReport(
        tuple(map(float, a_marg)), tuple(map(float, a_solo)), float(np.max(np.abs(a_marg - a_solo))),
        tuple(map(float, b_marg)), tuple(map(float, b_solo)), float(np.max(np.abs(b_marg - b_solo))),
        float(np.max(np.abs(table - other))),
    )


# ---------------------------------------------------------------------------
# CHSH


@dataclass(frozen=True, eq=False)
class SignedLHVModel:
    """Hidden states with signed weights and deterministic +-1 outcomes.

    ``a_out[s, h]`` is party A's outcome for setting s in hidden state h.
    """

    weights: np.ndarray
    a_out: np.ndarray
    b_out: np.ndarray

    def __post_init__(self):
        for name in ("weights", "a_out", "b_out"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        m = self.weights.shape[0]
        if self.a_out.shape != (2, m) or self.b_out.shape != (2, m):
            raise ValueError(f"outcome tables must have shape (2, {m})")
        if not np.all(np.isin(self.a_out, (-1.0, 1.0))) or not np.all(np.isin(self.b_out, (-1.0, 1.0))):
            raise ValueError("outcomes must be +1 or -1")

    def to_json(self) -> dict:
        return {"weights": self.weights.tolist(), "a_outcomes": self.a_out.astype(int).tolist(),
                "b_outcomes": self.b_out.astype(int).tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "SignedLHVModel":
        return cls(data["weights"], data["a_outcomes"], data["b_outcomes"])


def chsh_value(E: np.ndarray) -> float:
    """S = E(a,b) + E(a,b') + E(a',b) - E(a',b') from a 2x2 correlator table."""
    return float(E[0, 0] + E[0, 1] + E[1, 0] - E[1, 1])


def chsh_signed_lhv(model: SignedLHVModel, mode: str = "raw") -> float:
    total = float(np.sum(model.weights))
    if abs(total - 1.0) > SUM_TOL:
        raise WeightSumInvalid(f"weights sum to {total!r}, not 1")
    a, b = model.a_out, model.b_out
    # per hidden state the CHSH combination is an integer in {-2, 2}
    per_state = a[0] * b[0] + a[0] * b[1] + a[1] * b[0] - a[1] * b[1]
    if mode == "raw":
        return float(np.dot(model.weights, per_state))
    if mode in ("renormalized", "renorm"):
        w = np.abs(model.weights)
        return float(np.dot(w, per_state) / np.sum(w))
    raise ValueError(f"mode must be raw or renormalized, not {mode!r}")


def witness_model() -> SignedLHVModel:
    """Two hidden states, weights (2, -1); the second flips only B's outcomes."""
    return SignedLHVModel([2.0, -1.0], [[1, 1], [1, 1]], [[1, -1], [1, -1]])


def random_signed_model(rng: np.random.Generator, max_states: int = 8) -> SignedLHVModel:
    m = int(rng.integers(1, max_states + 1))
    w = rng.normal(scale=2.0, size=m)
    w[-1] = 1.0 - np.sum(w[:-1])
    a = rng.choice([-1.0, 1.0], size=(2, m))
    b = rng.choice([-1.0, 1.0], size=(2, m))
    return SignedLHVModel(w, a, b)


def _scan_chunk(args) -> list[float]:
    seed, start, stop, mode = args
    out = []
    for i in range(start, stop):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))
        out.append(chsh_signed_lhv(random_signed_model(rng), mode))
    return out


def scan_signed_models(count: int, seed: int = 0, mode: str = "renormalized",
                       workers: int = 1) -> np.ndarray:
    """S for ``count`` random signed models; model i draws from child seed i only."""
    if workers <= 1 or count < 2 * workers:
        return np.array(_scan_chunk((seed, 0, count, mode)))
    bounds = np.linspace(0, count, workers + 1).astype(int)
    tasks = [(seed, int(a), int(b), mode) for a, b in zip(bounds[:-1], bounds[1:])]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_scan_chunk, tasks))
    return np.array([s for part in parts for s in part])


def correlator(psi: ModuleVector, A: SpectralResult, B: SpectralResult) -> float:
    """sum_ij a_i b_j T_sym[i, j] with symmetrized sequential statistics."""
    table = joint_table(psi, A, B, "symmetric")
    a = np.array(A.distinct_eigenvalues)
    b = np.array(B.distinct_eigenvalues)
    return float(a @ table @ b)


def chsh_quantum(psi: ModuleVector, a: SpectralResult, a2: SpectralResult,
                 b: SpectralResult, b2: SpectralResult) -> float:
    E = np.array([[correlator(psi, x, y) for y in (b, b2)] for x in (a, a2)])
    return chsh_value(E)


# ---------------------------------------------------------------------------
# Two two-level parties on one rank-4 module (index 2*x + y)


def spin(theta: float) -> np.ndarray:
    """cos(theta) Z + sin(theta) X."""
    return np.array([[np.cos(theta), np.sin(theta)], [np.sin(theta), -np.cos(theta)]])


def two_party_operator(ring: Ring, a: Optional[np.ndarray] = None,
                       b: Optional[np.ndarray] = None) -> RingOperator:
    """Real 2x2 matrices a (first party) and b (second party) as a rank-4 operator a (x) b."""
    a = np.eye(2) if a is None else np.asarray(a, dtype=float)
    b = np.eye(2) if b is None else np.asarray(b, dtype=float)
    return operator(ring, np.kron(a, b).tolist())


def singlet(ring: Ring) -> ModuleVector:
    c = ring.zeros((4,))
    c[1, 0] = 1 / np.sqrt(2)
    c[2, 0] = -1 / np.sqrt(2)
    return ModuleVector(ring, c)


TSIRELSON_ANGLES = {"a": 0.0, "a2": np.pi / 2, "b": 5 * np.pi / 4, "b2": 3 * np.pi / 4}


def product_state(psi: ModuleVector, phi: ModuleVector) -> ModuleVector:
    """Coefficients psi_x phi_y on the rank-4 module."""
    ring = psi.ring
    c = ring.mul(psi.coeffs[:, None, :], phi.coeffs[None, :, :]).reshape(4, ring.size)
    return ModuleVector(ring, c)


def transform(U: RingOperator, phi: ModuleVector, A: RingOperator):
    """Change of frame by a generalized unitary: (U phi, U A U^dagger)."""
    return apply(U, phi), compose(compose(U, A), U.adjoint())


def find_asymmetric_instance(seed: int = 0, threshold: float = 1e-3, max_tries: int = 1000):
    """Seeded scan for an entangled Clifford state with order-dependent joint statistics.

    Observables: A = diag(g0, g0, -g0, -g0) on the first party, B = diag(1, -1, 1, -1)
    on the second.  Returns (state, A, B, report) for the first state whose order gap
    reaches ``threshold``.
    """
    from .bimodule import diagonal, random_vector
    from .hypercomplex import CLIFFORD, GAMMA
    from .spectral import left_eigen_real

    g0 = GAMMA[0]
    A = diagonal(CLIFFORD, [g0, g0, -g0, -g0])
    B = diagonal(CLIFFORD, [1.0, -1.0, 1.0, -1.0])
    sa, sb = left_eigen_real(A), left_eigen_real(B)
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        psi = random_vector(CLIFFORD, 4, rng, scale=0.5)
        rep = first_marginal_invariance(psi, sa, sb)
        if rep.order_gap >= threshold:
            return psi, A, B, rep
    raise RuntimeError("no asymmetric instance found")
