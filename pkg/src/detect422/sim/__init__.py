"""Exact output distributions, seeded sampling and the backend cross-check."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from ..circuit import Circuit
from .statevector import Branch, StateVector, run_ensemble, statevec_run, unitary
from .tableau import NonCliffordError, StabilizerTableau, tableau_branches, tableau_run

__all__ = [
    "Branch",
    "ExactResult",
    "NonCliffordError",
    "OutcomeDistribution",
    "ShotCounts",
    "StabilizerTableau",
    "StateVector",
    "cross_check",
    "exact_distribution",
    "run_ensemble",
    "sample",
    "statevec_run",
    "tableau_run",
    "total_variation",
    "unitary",
]


@dataclass(frozen=True)
class OutcomeDistribution:
    labels: tuple[str, ...]
    probabilities: dict[str, float]

    def __post_init__(self):
        total = sum(self.probabilities.values())
        if any(p < -1e-12 for p in self.probabilities.values()):
            raise ValueError("negative probability")
        if abs(total - 1) > 1e-10:
            raise ValueError(f"probabilities sum to {total}")

    @property
    def width(self) -> int:
        return len(self.labels)

    def prob(self, bits: str) -> float:
        return self.probabilities.get(bits, 0.0)

    def outcomes(self) -> list[str]:
        """All ``2**width`` bitstrings in lexicographic order."""
        w = self.width
        return [format(k, f"0{w}b") for k in range(2**w)] if w else [""]

    def as_vector(self) -> np.ndarray:
        return np.array([self.prob(b) for b in self.outcomes()])

    @classmethod
    def point(cls, bits: str, labels: tuple[str, ...] | None = None) -> OutcomeDistribution:
        labels = labels or tuple(f"b{k}" for k in range(len(bits)))
        return cls(labels, {bits: 1.0})


@dataclass
class ShotCounts:
    counts: dict[str, int]
    total_shots: int
    n_valid: int = field(default=-1)

    def __post_init__(self):
        if self.n_valid < 0:
            self.n_valid = sum(self.counts.values())
        if sum(self.counts.values()) != self.n_valid or self.n_valid > self.total_shots:
            raise ValueError("counts must sum to n_valid <= total_shots")

    def get(self, bits: str) -> int:
        return self.counts.get(bits, 0)

    @property
    def ratio(self) -> float:
        return self.n_valid / self.total_shots


@dataclass(frozen=True)
class ExactResult:
    raw: OutcomeDistribution
    acceptance: float
    logical: OutcomeDistribution | None

    @property
    def degenerate(self) -> bool:
        return self.logical is None


def _raw_from_branches(c: Circuit, weighted_bits) -> OutcomeDistribution:
    probs: dict[str, float] = defaultdict(float)
    for p, bits in weighted_bits:
        probs[bits] += p
    return OutcomeDistribution(tuple(f"q{q}" for q in c.measured_qubits), dict(probs))


def _postselect(c: Circuit, raw: OutcomeDistribution) -> tuple[float, OutcomeDistribution | None]:
    kept: dict[str, float] = defaultdict(float)
    for bits, p in raw.probabilities.items():
        if c.accepts(bits):
            kept[c.logical(bits)] += p
    acceptance = sum(kept.values())
    if acceptance < 1e-15:
        return 0.0, None
    width = len(c.readout) if c.readout is not None else c.n_cbits
    labels = tuple(f"L{k}" for k in range(width))
    return acceptance, OutcomeDistribution(labels, {b: p / acceptance for b, p in kept.items()})


def exact_distribution(c: Circuit, backend: str = "statevector") -> ExactResult:
    """Raw distribution, acceptance probability and renormalised logical distribution.

    ``logical`` is ``None`` when every outcome is rejected.
    """
    if backend == "statevector":
        weighted = [(b.probability, b.bits) for b in run_ensemble(c)]
    elif backend == "tableau":
        weighted = [(p, run.bits) for p, run in tableau_branches(c)]
    else:
        raise ValueError(f"unknown backend {backend!r}")
    raw = _raw_from_branches(c, weighted)
    acceptance, logical = _postselect(c, raw)
    return ExactResult(raw, acceptance, logical)


def total_variation(a: OutcomeDistribution, b: OutcomeDistribution) -> float:
    keys = set(a.probabilities) | set(b.probabilities)
    return 0.5 * sum(abs(a.prob(k) - b.prob(k)) for k in keys)


def cross_check(c: Circuit) -> float:
    """TVD between the raw distributions computed by the two backends."""
    return total_variation(exact_distribution(c, "statevector").raw, exact_distribution(c, "tableau").raw)


def sample(d: OutcomeDistribution, shots: int, seed: int | np.random.Generator) -> ShotCounts:
    """Multinomial sample, reproducible for a given seed."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    keys = sorted(d.probabilities)
    p = np.array([d.probabilities[k] for k in keys], dtype=float)
    p = np.clip(p, 0, None)
    n = rng.multinomial(shots, p / p.sum())
    counts = {k: int(v) for k, v in zip(keys, n) if v}
    return ShotCounts(counts, shots, shots)
