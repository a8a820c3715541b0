"""Numerical identity suite for the two rings and their bimodules.

Each check reports the largest residual it saw; a check passes when that
residual is at most ``tol``.  Setting ``fault`` to a check name flips a sign
inside that check (negative control for the harness).
"""

from __future__ import annotations

import numpy as np

from .bimodule import adjoint, apply, inner_array, inner_via_rep, random_operator, random_vector
from .hypercomplex import (
    BLADE_GRADES,
    CLIFFORD,
    METRIC,
    QUATERNION,
    Quaternion,
    qconj,
    qinv,
    qmul,
    random_element,
)

CHECKS = (
    "clifford_anticommutation",
    "gamma1_square",
    "gamma5_product",
    "clifford_rep_homomorphism",
    "clifford_tilde_antiautomorphism",
    "clifford_scalar_trace",
    "clifford_blade_closure",
    "quaternion_relations",
    "quaternion_norm",
    "quaternion_inverse",
    "quaternion_tilde_antiautomorphism",
    "bimodule_axioms",
    "adjoint_identity",
    "indefinite_witness",
)


def _max(x) -> float:
    return float(np.max(np.abs(x), initial=0.0))


def run_suite(tol: float = 1e-10, seed: int = 0, fault: str | None = None,
              n_quaternion: int = 1000, n_clifford: int = 500, n_module: int = 500) -> dict:
    rng = np.random.default_rng(seed)
    flip = {name: (-1.0 if name == fault else 1.0) for name in CHECKS}
    res: dict[str, float] = {}
    C, Q = CLIFFORD, QUATERNION
    g = [C.rep(C.unit(1 + mu)) for mu in range(4)]
    eye4 = np.eye(4)

    r = 0.0
    for mu in range(4):
        for nu in range(4):
            lhs = g[mu] @ g[nu] + flip["clifford_anticommutation"] * g[nu] @ g[mu]
            rhs = 2 * (METRIC[mu] if mu == nu else 0.0) * eye4
            r = max(r, _max(lhs - rhs))
            # same identity in the blade basis
            blade = C.mul(C.unit(1 + mu), C.unit(1 + nu)) + C.mul(C.unit(1 + nu), C.unit(1 + mu))
            r = max(r, _max(blade - 2 * (METRIC[mu] if mu == nu else 0.0) * C.one()))
    res["clifford_anticommutation"] = r

    g1 = C.unit(2)
    res["gamma1_square"] = _max(flip["gamma1_square"] * C.mul(g1, g1) + C.one())

    g5 = C.unit(15)
    prod = g[0] @ g[1] @ g[2] @ g[3]
    res["gamma5_product"] = _max(C.rep(g5) - flip["gamma5_product"] * prod)

    a = np.array([random_element(C, rng) for _ in range(n_clifford)])
    b = np.array([random_element(C, rng) for _ in range(n_clifford)])
    ab = C.mul(a, b)
    res["clifford_rep_homomorphism"] = _max(
        C.rep(ab) - flip["clifford_rep_homomorphism"] * C.rep(a) @ C.rep(b))
    res["clifford_tilde_antiautomorphism"] = max(
        _max(C.tilde(ab) - flip["clifford_tilde_antiautomorphism"] * C.mul(C.tilde(b), C.tilde(a))),
        _max(C.tilde(C.tilde(a)) - a))
    res["clifford_scalar_trace"] = _max(
        C.scalar_part(a) - flip["clifford_scalar_trace"] * np.trace(C.rep(a), axis1=-2, axis2=-1) / 4)

    # Every blade product is +-1 times exactly one blade.
    t = C.table
    nonzero = np.count_nonzero(t, axis=2)
    vals = t[t != 0]
    closure = max(_max(nonzero - 1), _max(np.abs(vals) - 1))
    # anti/commutation: blades of grade k, l commute up to the sign (-1)^(kl - |common|)
    for i in range(16):
        for j in range(16):
            s = flip["clifford_blade_closure"] if (i, j) == (1, 2) else 1.0
            closure = max(closure, _max(t[i, j] * s - t[j, i] * _commute_sign(i, j)))
    res["clifford_blade_closure"] = closure

    one, i_, j_, k_ = (Quaternion(*e) for e in np.eye(4))
    rel = [
        qmul(i_, i_) + one, qmul(j_, j_) + one, qmul(k_, k_) + one,
        qmul(i_, j_) - k_ * flip["quaternion_relations"], qmul(i_, j_) + qmul(j_, i_),
        qmul(qmul(i_, j_), k_) + one,
    ]
    res["quaternion_relations"] = max(_max(x.to_array()) for x in rel)

    r_norm = r_inv = r_qt = 0.0
    for _ in range(n_quaternion):
        a = Quaternion(*rng.normal(size=4))
        b = Quaternion(*rng.normal(size=4))
        n2 = a.norm2()
        r_norm = max(r_norm, _max(qmul(qconj(a), a).to_array() - [n2, 0, 0, 0]),
                     _max(qmul(a, qconj(a)).to_array() - [flip["quaternion_norm"] * n2, 0, 0, 0]))
        if n2 <= 0:
            r_norm = np.inf
        ai = qinv(a)
        r_inv = max(r_inv, _max(qmul(a, ai).to_array() - [flip["quaternion_inverse"], 0, 0, 0]),
                    _max(qmul(ai, a).to_array() - [1, 0, 0, 0]))
        r_qt = max(r_qt, _max(qconj(qmul(a, b)).to_array()
                              - flip["quaternion_tilde_antiautomorphism"]
                              * qmul(qconj(b), qconj(a)).to_array()))
    res["quaternion_norm"] = r_norm
    res["quaternion_inverse"] = r_inv
    res["quaternion_tilde_antiautomorphism"] = r_qt

    r_ax = r_adj = 0.0
    for ring in (Q, C):
        for _ in range(n_module // 2):
            n = int(rng.integers(1, 5))
            v, w = random_vector(ring, n, rng), random_vector(ring, n, rng)
            q = random_element(ring, rng)
            vw = inner_array(v, w)
            r_ax = max(r_ax, _max(inner_array(v, w * ring.element(q)) - ring.mul(vw, q)))
            r_ax = max(r_ax, _max(inner_array(v, ring.element(q) * w)
                                  - flip["bimodule_axioms"] * inner_array(ring.element(ring.tilde(q)) * v, w)))
            r_ax = max(r_ax, _max(vw - ring.tilde(inner_array(w, v))))
            r_ax = max(r_ax, _max(ring.rep(vw) - inner_via_rep(v, w)))
            if ring is Q:
                vv = inner_array(v, v)
                r_ax = max(r_ax, _max(vv[1:]))
                if not vv[0] > 0:
                    r_ax = np.inf
            A = random_operator(ring, n, rng)
            lhs = inner_array(v, apply(A, w))
            rhs = inner_array(apply(adjoint(A), v), w)
            r_adj = max(r_adj, _max(lhs - flip["adjoint_identity"] * rhs))
            r_adj = max(r_adj, _max(adjoint(adjoint(A)).entries - A.entries))
    res["bimodule_axioms"] = r_ax
    res["adjoint_identity"] = r_adj

    # sp(tilde(g1) g1) = -1 < 0: residual measures distance to the expected -1
    sp = float(np.real(C.mul(C.tilde(g1), g1)[0]))
    res["indefinite_witness"] = abs(sp + flip["indefinite_witness"])

    checks = [{"identity": k, "max_residual": float(v), "ok": bool(v <= tol)} for k, v in res.items()]
    return {"tol": tol, "seed": seed, "all_ok": all(c["ok"] for c in checks), "checks": checks}


def _commute_sign(i: int, j: int) -> float:
    k, l = int(BLADE_GRADES[i]), int(BLADE_GRADES[j])
    common = bin(_mask(i) & _mask(j)).count("1")
    return -1.0 if (k * l - common) % 2 else 1.0


def _mask(i: int) -> int:
    from .hypercomplex import BLADE_MASKS

    return BLADE_MASKS[i]
