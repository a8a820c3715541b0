"""Detector colors: integer responses n per particle, and what each observer sees.

A ColorModel is the per-particle law of the detector response n.  From N
independent shots we form the extended absorption probability

    P_a = sum over events of color / N    (can leave [0, 1])

the fine-grained frequencies P(n) = N_n / N, and the coarse observer's
1 - P(0).  The two notions of absorption agree only for colors in {0, 1}.

Random numbers come from the counter-based Philox generator.  Shots are cut
into fixed-size blocks; block b always draws from ``Philox(key=seed)`` jumped
b times, so any partition of blocks across workers reproduces the serial run
bit for bit.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import InvalidModel

MAX_COLOR = 64
BLOCK = 1 << 16
SUM_TOL = 1e-12


@dataclass(frozen=True)
class ColorModel:
    support: tuple
    probs: tuple

    def __post_init__(self):
        if len(self.support) != len(self.probs) or not self.support:
            raise InvalidModel("support and probabilities must be non-empty and equally long")
        if len(set(self.support)) != len(self.support):
            raise InvalidModel("duplicate colors")
        for n in self.support:
            if int(n) != n:
                raise InvalidModel(f"color {n!r} is not an integer")
            if abs(n) > MAX_COLOR:
                raise InvalidModel(f"color {n} exceeds |n| <= {MAX_COLOR}")
        p = np.array(self.probs, dtype=float)
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise InvalidModel("probabilities must be finite and non-negative")
        if abs(math.fsum(p) - 1.0) > SUM_TOL:
            raise InvalidModel(f"probabilities sum to {math.fsum(p)!r}, not 1")
        order = np.argsort(self.support)
        object.__setattr__(self, "support", tuple(int(self.support[i]) for i in order))
        object.__setattr__(self, "probs", tuple(float(self.probs[i]) for i in order))

    @classmethod
    def from_mapping(cls, m: Mapping[int, float]) -> "ColorModel":
        return cls(tuple(m.keys()), tuple(m.values()))

    @classmethod
    def from_json(cls, data: dict) -> "ColorModel":
        colors = data["colors"]
        return cls(tuple(c["n"] for c in colors), tuple(c["p"] for c in colors))

    def to_json(self) -> dict:
        return {"colors": [{"n": n, "p": p} for n, p in zip(self.support, self.probs)]}

    def as_dict(self) -> dict:
        return dict(zip(self.support, self.probs))


@dataclass(frozen=True)
class RunResult:
    N: int
    counts: dict
    P_a: float
    P_n: dict
    P_0: float
    coarse: float
    mismatch: float

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "counts": {str(k): v for k, v in self.counts.items()},
            "P_a": self.P_a,
            "P_n": {str(k): v for k, v in self.P_n.items()},
            "P_0": self.P_0,
            "coarse": self.coarse,
            "mismatch": self.mismatch,
        }


@dataclass(frozen=True)
class Expectations:
    """Infinite-shot limit of a RunResult."""

    P_a: float
    P_n: dict
    P_0: float
    coarse: float
    mismatch: float
    stddev: float  # standard deviation of a single color draw

    def to_json(self) -> dict:
        return {"P_a": self.P_a, "P_n": {str(k): v for k, v in self.P_n.items()},
                "P_0": self.P_0, "coarse": self.coarse, "mismatch": self.mismatch,
                "stddev": self.stddev}


@dataclass(frozen=True)
class CoarseView:
    P_0: float
    one_minus_P0: float


def _block_counts(args) -> np.ndarray:
    probs, seed, n_shots, first, last = args
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    counts = np.zeros(len(probs), dtype=np.int64)
    base = np.random.Philox(key=seed)
    for b in range(first, last):
        size = min(BLOCK, n_shots - b * BLOCK)
        rng = np.random.Generator(base.jumped(b))
        idx = np.searchsorted(cdf, rng.random(size), side="right")
        np.minimum(idx, len(probs) - 1, out=idx)
        counts += np.bincount(idx, minlength=len(probs))
    return counts


def _result(model: ColorModel, counts: np.ndarray) -> RunResult:
    N = int(counts.sum())
    total = sum(int(n) * int(c) for n, c in zip(model.support, counts))
    cmap = {n: int(c) for n, c in zip(model.support, counts)}
    p_n = {n: c / N for n, c in cmap.items()}
    p0 = p_n.get(0, 0.0)
    pa = total / N
    return RunResult(N, cmap, pa, p_n, p0, 1.0 - p0, abs(pa - (1.0 - p0)))


def simulate(model: ColorModel, N: int, seed: int = 0, workers: int = 1) -> RunResult:
    """N independent detector responses; identical for any ``workers``."""
    if N < 1:
        raise ValueError("N must be at least 1")
    if seed < 0:
        raise ValueError("seed must be non-negative")
    probs = np.array(model.probs)
    n_blocks = -(-N // BLOCK)
    if workers <= 1 or n_blocks < 2:
        counts = _block_counts((probs, seed, N, 0, n_blocks))
    else:
        bounds = np.linspace(0, n_blocks, min(workers, n_blocks) + 1).astype(int)
        tasks = [(probs, seed, N, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]
        with ProcessPoolExecutor(max_workers=len(tasks)) as pool:
            counts = sum(pool.map(_block_counts, tasks))
    return _result(model, counts)


def simulate_sharded(model: ColorModel, N: int, seed: int, shards: int) -> RunResult:
    """Run the block ranges of ``shards`` workers one after another and merge (no processes)."""
    probs = np.array(model.probs)
    n_blocks = -(-N // BLOCK)
    bounds = np.linspace(0, n_blocks, shards + 1).astype(int)
    counts = sum(_block_counts((probs, seed, N, int(a), int(b)))
                 for a, b in reversed(list(zip(bounds[:-1], bounds[1:]))))
    return _result(model, counts)


def exact_expectations(model: ColorModel) -> Expectations:
    n = np.array(model.support, dtype=float)
    p = np.array(model.probs)
    pa = math.fsum(n * p)
    var = math.fsum((n - pa) ** 2 * p)
    p0 = model.as_dict().get(0, 0.0)
    return Expectations(pa, model.as_dict(), p0, 1.0 - p0, abs(pa - (1.0 - p0)), math.sqrt(var))


def coarse_view(r) -> CoarseView:
    return CoarseView(r.P_0, 1.0 - r.P_0)


def predictivity_report(model: ColorModel) -> dict:
    """What the extended probability predicts versus the full color table."""
    ex = exact_expectations(model)
    return {
        "P_a": ex.P_a,
        "P_n": {str(k): v for k, v in ex.P_n.items()},
        "coarse": {"P_0": ex.P_0, "one_minus_P0": ex.coarse},
        "mismatch": ex.mismatch,
        "P_a_in_unit_interval": 0.0 <= ex.P_a <= 1.0,
    }


def equal_pa_pair(target: float) -> tuple[ColorModel, ColorModel]:
    """Two different color laws with the same P_a = target (|target| < 63)."""
    m = math.floor(target)
    frac = target - m
    if frac == 0.0:
        first = ColorModel((m,), (1.0,))
    else:
        first = ColorModel((m, m + 1), (1.0 - frac, frac))
    # weight p on m+2 and 1-p on m-1: p(m+2) + (1-p)(m-1) = target
    p = (target - m + 1.0) / 3.0
    second = ColorModel((m - 1, m + 2), (1.0 - p, p))
    return first, second


def random_model(rng: np.random.Generator, max_abs: int = 4, max_support: int = 5) -> ColorModel:
    k = int(rng.integers(1, max_support + 1))
    support = rng.choice(np.arange(-max_abs, max_abs + 1), size=k, replace=False)
    p = rng.dirichlet(np.ones(k))
    return ColorModel(tuple(int(n) for n in support), tuple(float(x) for x in p))


def mc_bound(stddev: float, N: int, k: float = 5.0) -> float:
    return k * stddev / math.sqrt(N)

