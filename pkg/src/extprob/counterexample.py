"""Two commuting physical observables over Cl(1,3) without a common real eigenbasis.

On a rank-2 Clifford module with orthonormal basis |0>, |1>:

    A|0> = |0> lam,   A|1> = |1> mu
    B|0> = |0> g0,    B|1> = -|1> g0

B is physical with eigenbasis |3> = (|0>(1+g0) + |1>(1-g0))/2 (eigenvalue +1)
and |4> = (|0>(1-g0) + |1>(1+g0))/2 (eigenvalue -1).  A and B commute, yet for
lam != mu they share no left orthonormal eigenbasis with real eigenvalues.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bimodule import ModuleVector, RingOperator, apply, diagonal, gram, inner_array, is_left_basis, vector
from .hypercomplex import CLIFFORD, GAMMA, ONE_C
from .spectral import are_compatible, commute, is_hermitian, is_physical

G0 = GAMMA[0]


@dataclass(frozen=True, eq=False)
class Counterexample:
    A: RingOperator
    B: RingOperator
    ket0: ModuleVector
    ket1: ModuleVector
    ket3: ModuleVector
    ket4: ModuleVector


def build(lam: float = 1.0, mu: float = 2.0) -> Counterexample:
    A = diagonal(CLIFFORD, [lam, mu])
    B = diagonal(CLIFFORD, [G0, -G0])
    ket0 = vector(CLIFFORD, [1.0, 0.0])
    ket1 = vector(CLIFFORD, [0.0, 1.0])
    ket3 = (ket0 * (ONE_C + G0) + ket1 * (ONE_C - G0)) / 2
    ket4 = (ket0 * (ONE_C - G0) + ket1 * (ONE_C + G0)) / 2
    return Counterexample(A, B, ket0, ket1, ket3, ket4)


def _residual(x: np.ndarray) -> float:
    return float(np.max(np.abs(x), initial=0.0))


def report(lam: float = 1.0, mu: float = 2.0) -> dict:
    """Reproduce every fact of the construction; each check carries ``ok`` and a residual."""
    ce = build(lam, mu)
    one = CLIFFORD.one()
    g0 = G0.to_array()
    mul = CLIFFORD.mul
    checks = {}

    def check(name, ok, **extra):
        checks[name] = {"ok": bool(ok), **extra}

    r = _residual(mul(one + g0, one + g0) - (2 * one + 2 * g0))
    r = max(r, _residual(mul(one - g0, one - g0) - (2 * one - 2 * g0)))
    check("footnote_square", r == 0.0, residual=r)
    r = _residual(mul(one - g0, one + g0))
    check("footnote_annihilate", r == 0.0, residual=r)

    check("B_hermitian", is_hermitian(ce.B))

    r = max(_residual((apply(ce.B, ce.ket3) - ce.ket3).coeffs),
            _residual((apply(ce.B, ce.ket4) + ce.ket4).coeffs))
    g = gram([ce.ket3, ce.ket4]).gram
    r_gram = _residual(g - np.array([[one, 0 * one], [0 * one, one]]))
    check("ket34_eigenbasis", r == 0.0 and r_gram == 0.0 and is_left_basis([ce.ket3, ce.ket4]),
          residual=max(r, r_gram))

    # |0>, |1> are left eigenvectors too, but with the non-real values +-g0.
    r = max(_residual((apply(ce.B, ce.ket0) - ce.ket0 * G0).coeffs),
            _residual((apply(ce.B, ce.ket1) + ce.ket1 * G0).coeffs))
    check("ket01_nonreal_eigenvalues", r == 0.0, residual=r)

    phys = is_physical(ce.B)
    solver = {"physical": phys.physical, "reason": phys.reason}
    if phys:
        spec = phys.result
        solver["eigenvalues"] = list(spec.eigenvalues)
        solver["signs"] = list(spec.signs)
        # eigenvectors found by the solver must span the same lines as |3>, |4>
        found = {}
        for lam_b, psi in zip(spec.eigenvalues, spec.eigenvectors):
            target = ce.ket3 if lam_b > 0 else ce.ket4
            overlap = inner_array(target, psi)
            found[round(lam_b)] = _residual((psi - target * CLIFFORD.element(overlap)).coeffs)
        solver["span_residual"] = max(found.values())
        ok = sorted(round(x) for x in spec.eigenvalues) == [-1, 1] and solver["span_residual"] < 1e-10
    else:
        ok = False
    check("B_physical", ok, **solver)

    check("A_B_commute", commute(ce.A, ce.B))
    comp = are_compatible(ce.A, ce.B)
    expected = lam == mu
    check("compatibility", comp.compatible == expected, compatible=comp.compatible,
          expected=expected, reason=comp.reason)
    return {"lambda": lam, "mu": mu, "all_ok": all(c["ok"] for c in checks.values()),
            "checks": checks}
