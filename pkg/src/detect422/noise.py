"""Pauli noise model, the fast noisy sampler and two independent oracles.

Noise sites: after every unitary gate a depolarizing Pauli (``p1`` for one
qubit, ``p2`` with 15 equiprobable Paulis for CNOT/SWAP), an X after each
PREP_0 with probability ``prep_flip``, and a classical flip of each
measured bit with probability ``r``.

For the Clifford circuits in scope every measurement is terminal, so a
Pauli error only XORs a fixed mask onto the classical record.  The sampler
therefore draws ideal outcomes from the exact distribution and XORs the
masks of the sampled errors.  :func:`exact_noisy_raw` convolves the same
per-site mask distributions analytically, and :func:`trajectory_run`
re-simulates every shot's faulty circuit on the statevector backend.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from datetime import datetime
from functools import lru_cache
from itertools import product
from pathlib import Path

import numpy as np

from .circuit import Circuit, Gate, GateKind
from .frames import propagate
from .sim import OutcomeDistribution, ShotCounts, exact_distribution, run_ensemble

_PROBS = ("p1", "p2", "r", "prep_flip")


@dataclass(frozen=True)
class NoiseConfig:
    """Noise strengths; the optional maps override ``p1``/``r``/``prep_flip`` per
    qubit and ``p2`` per (control, target) edge."""

    p1: float = 0.002
    p2: float = 0.025
    r: float = 0.03
    prep_flip: float = 0.0
    seed: int = 0
    drift: float = 0.1
    p1_qubit: dict[int, float] = field(default_factory=dict)
    p2_edge: dict[tuple[int, int], float] = field(default_factory=dict)
    r_qubit: dict[int, float] = field(default_factory=dict)
    prep_qubit: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        vals = [getattr(self, k) for k in _PROBS]
        vals += [*self.p1_qubit.values(), *self.p2_edge.values(), *self.r_qubit.values(), *self.prep_qubit.values()]
        for v in vals:
            if not 0 <= v <= 1:
                raise ValueError(f"probability {v} outside [0, 1]")
        if self.drift < 0:
            raise ValueError("drift must be >= 0")

    @classmethod
    def noiseless(cls, seed: int = 0) -> NoiseConfig:
        return cls(0.0, 0.0, 0.0, 0.0, seed)

    def gate_p(self, g: Gate) -> float:
        if g.kind in (GateKind.CNOT, GateKind.SWAP):
            key = g.qubits if g.qubits in self.p2_edge else g.qubits[::-1]
            return self.p2_edge.get(key, self.p2)
        return self.p1_qubit.get(g.qubits[0], self.p1)

    def readout_p(self, q: int) -> float:
        return self.r_qubit.get(q, self.r)

    def prep_p(self, q: int) -> float:
        return self.prep_qubit.get(q, self.prep_flip)

    def jittered(self, rng: np.random.Generator) -> NoiseConfig:
        """Copy with every probability scaled by an independent factor in [1-drift, 1+drift]."""
        if self.drift == 0:
            return self

        def j(v: float) -> float:
            return float(min(1.0, max(0.0, v * rng.uniform(1 - self.drift, 1 + self.drift))))

        return replace(
            self,
            **{k: j(getattr(self, k)) for k in _PROBS},
            p1_qubit={q: j(v) for q, v in self.p1_qubit.items()},
            p2_edge={e: j(v) for e, v in self.p2_edge.items()},
            r_qubit={q: j(v) for q, v in self.r_qubit.items()},
            prep_qubit={q: j(v) for q, v in self.prep_qubit.items()},
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["p2_edge"] = {f"{c},{t}": v for (c, t), v in self.p2_edge.items()}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> NoiseConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown noise config keys {sorted(unknown)}")
        d = dict(d)
        for key in ("p1_qubit", "r_qubit", "prep_qubit"):
            if key in d:
                d[key] = {int(q): float(v) for q, v in d[key].items()}
        if "p2_edge" in d:
            d["p2_edge"] = {tuple(int(x) for x in str(e).split(",")): float(v) for e, v in d["p2_edge"].items()}
        return cls(**d)

    @classmethod
    def load(cls, path: str | Path) -> NoiseConfig:
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class CalibrationRecord:
    """Device metadata published with a run.  T1/T2 are carried, not simulated."""

    timestamp: str
    t1_us: dict[int, float]
    t2_us: dict[int, float]
    gate_error_1q: dict[int, float]
    gate_error_cx: dict[tuple[int, int], float]
    readout_error: dict[int, float]
    fridge_mk: float

    def __post_init__(self):
        datetime.fromisoformat(self.timestamp)
        for d in (self.t1_us, self.t2_us, self.gate_error_1q, self.gate_error_cx, self.readout_error):
            if any(v < 0 for v in d.values()):
                raise ValueError("calibration values must be >= 0")
        if self.fridge_mk < 0:
            raise ValueError("calibration values must be >= 0")

    def to_noise_config(self, seed: int = 0, drift: float = 0.0) -> NoiseConfig:
        """Per-qubit and per-edge depolarizing strengths taken from the error rates."""
        mean = lambda d, dflt: float(np.mean(list(d.values()))) if d else dflt  # noqa: E731
        return NoiseConfig(
            p1=mean(self.gate_error_1q, 0.0),
            p2=mean(self.gate_error_cx, 0.0),
            r=mean(self.readout_error, 0.0),
            seed=seed,
            drift=drift,
            p1_qubit=dict(self.gate_error_1q),
            p2_edge=dict(self.gate_error_cx),
            r_qubit=dict(self.readout_error),
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["gate_error_cx"] = {f"{c},{t}": v for (c, t), v in self.gate_error_cx.items()}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> CalibrationRecord:
        ints = lambda m: {int(k): float(v) for k, v in m.items()}  # noqa: E731
        return cls(
            timestamp=d["timestamp"],
            t1_us=ints(d["t1_us"]),
            t2_us=ints(d["t2_us"]),
            gate_error_1q=ints(d["gate_error_1q"]),
            gate_error_cx={tuple(int(x) for x in k.split(",")): float(v) for k, v in d["gate_error_cx"].items()},
            readout_error=ints(d["readout_error"]),
            fridge_mk=float(d["fridge_mk"]),
        )


# fridge temperatures printed for the two chips
FRIDGE_MK = {"raven": 21.0, "sparrow": 19.0}


# -- fault sites -----------------------------------------------------------------------


@dataclass(frozen=True)
class Site:
    """A noise location: ``masks[k]`` is the classical flip mask of outcome k (k=0 is no error)."""

    probability: float
    masks: tuple[int, ...]
    paulis: tuple[tuple[tuple[str, int], ...], ...]  # (letter, qubit) gates realising each outcome


def _single_masks(c: Circuit, start: int, q: int) -> tuple[int, int]:
    """Flip masks of X and Z on qubit ``q`` inserted before ``c.gates[start]``."""
    tail = c.gates[start:]
    return propagate(1 << q, 0, tail)[2], propagate(0, 1 << q, tail)[2]


def _mask_of(letter: str, mx: int, mz: int) -> int:
    return {"I": 0, "X": mx, "Y": mx ^ mz, "Z": mz}[letter]


def noise_sites(c: Circuit, nc: NoiseConfig) -> list[Site]:
    """All stochastic error locations of ``c`` except readout flips, in circuit order."""
    sites = []
    for i, g in enumerate(c.gates):
        if g.kind in (GateKind.BARRIER, GateKind.MEASURE_Z):
            continue
        if g.kind == GateKind.PREP_0:
            q = g.qubits[0]
            p = nc.prep_p(q)
            if p > 0:
                mx, _ = _single_masks(c, i + 1, q)
                sites.append(Site(p, (0, mx), ((), (("X", q),))))
            continue
        p = nc.gate_p(g)
        if p == 0:
            continue
        per_q = [_single_masks(c, i + 1, q) for q in g.qubits]
        masks, paulis = [0], [()]
        for combo in product("IXYZ", repeat=len(g.qubits)):
            if set(combo) == {"I"}:
                continue
            m = 0
            for letter, (mx, mz) in zip(combo, per_q):
                m ^= _mask_of(letter, mx, mz)
            masks.append(m)
            paulis.append(tuple((letter, q) for letter, q in zip(combo, g.qubits) if letter != "I"))
        sites.append(Site(p, tuple(masks), tuple(paulis)))
    return sites


def _readout_probs(c: Circuit, nc: NoiseConfig) -> list[float]:
    return [nc.readout_p(q) for q in c.measured_qubits]


# -- bit utilities ---------------------------------------------------------------------


def _bits_to_int(bits: str) -> int:
    """Bitstring with character k = classical bit k, as an integer with bit k set."""
    return sum(1 << k for k, ch in enumerate(bits) if ch == "1")


def _int_to_bits(v: int, m: int) -> str:
    return "".join("1" if (v >> k) & 1 else "0" for k in range(m))


@dataclass(frozen=True)
class _Post:
    flag_mask: int
    parity_mask: int
    readout_masks: tuple[int, ...]


def _post(c: Circuit) -> _Post:
    cb = {q: k for k, q in enumerate(c.measured_qubits)}
    ps = c.postselect
    flag = sum(1 << cb[q] for q in ps.flag_qubits) if ps else 0
    parity = sum(1 << cb[q] for q in ps.parity_qubits) if ps else 0
    readout = c.readout if c.readout is not None else tuple((q,) for q in c.measured_qubits)
    return _Post(flag, parity, tuple(sum(1 << cb[q] for q in bit) for bit in readout))


def _popcount_parity(v: np.ndarray) -> np.ndarray:
    v = v.copy()
    out = np.zeros_like(v)
    while np.any(v):
        out ^= v & 1
        v >>= 1
    return out


def _tally(c: Circuit, raw: np.ndarray, shots: int) -> ShotCounts:
    post = _post(c)
    keep = (raw & post.flag_mask) == 0
    if post.parity_mask:
        keep &= _popcount_parity(raw & post.parity_mask) == 0
    kept = raw[keep]
    width = len(post.readout_masks)
    logical = np.zeros(kept.shape, dtype=np.int64)
    for k, m in enumerate(post.readout_masks):
        logical |= _popcount_parity(kept & m) << k
    values, counts = np.unique(logical, return_counts=True)
    out = {_int_to_bits(int(v), width): int(n) for v, n in zip(values, counts)}
    return ShotCounts(out, shots, int(keep.sum()))


# -- samplers --------------------------------------------------------------------------


@lru_cache(maxsize=512)
def _ideal_table(c: Circuit) -> tuple[np.ndarray, np.ndarray]:
    raw = exact_distribution(c).raw
    keys = sorted(raw.probabilities)
    p = np.array([raw.probabilities[k] for k in keys])
    return np.array([_bits_to_int(k) for k in keys], dtype=np.int64), p / p.sum()


@lru_cache(maxsize=512)
def _sites_cached(c: Circuit, nc_key: str) -> list[Site]:
    return noise_sites(c, NoiseConfig.from_dict(json.loads(nc_key)))


def _nc_key(nc: NoiseConfig) -> str:
    return json.dumps(nc.to_dict(), sort_keys=True)


def sample_raw(c: Circuit, nc: NoiseConfig, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Noisy raw records (bit k = classical bit k) of ``shots`` shots."""
    values, probs = _ideal_table(c)
    raw = values[rng.choice(len(values), size=shots, p=probs)]
    for site in _sites_cached(c, _nc_key(nc)):
        hit = np.nonzero(rng.random(shots) < site.probability)[0]
        if hit.size:
            which = rng.integers(1, len(site.masks), size=hit.size)
            raw[hit] ^= np.asarray(site.masks, dtype=np.int64)[which]
    for k, r in enumerate(_readout_probs(c, nc)):
        if r > 0:
            raw ^= (rng.random(shots) < r).astype(np.int64) << k
    return raw


def _rng(seed: int | np.random.Generator | None, nc: NoiseConfig) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(nc.seed if seed is None else seed)


def noisy_run(c: Circuit, nc: NoiseConfig, shots: int, seed: int | np.random.Generator | None = None) -> ShotCounts:
    """Post-selected logical counts of ``shots`` noisy shots (frame sampler).

    ``seed`` defaults to ``nc.seed``.  Drift is not applied here; see
    :meth:`NoiseConfig.jittered`.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    return _tally(c, sample_raw(c, nc, shots, _rng(seed, nc)), shots)


def exact_noisy_raw(c: Circuit, nc: NoiseConfig) -> OutcomeDistribution:
    """Exact raw distribution under the noise model (analytic convolution of flip masks)."""
    m = c.n_cbits
    size = 1 << m
    flip = np.zeros(size)
    flip[0] = 1.0
    idx = np.arange(size)

    def convolve(dist: np.ndarray, masks, probs) -> np.ndarray:
        out = np.zeros(size)
        for mk, pk in zip(masks, probs):
            out += pk * dist[idx ^ mk]
        return out

    for site in noise_sites(c, nc):
        n = len(site.masks) - 1
        probs = [1 - site.probability] + [site.probability / n] * n
        flip = convolve(flip, site.masks, probs)
    for k, r in enumerate(_readout_probs(c, nc)):
        flip = convolve(flip, (0, 1 << k), (1 - r, r))
    values, probs = _ideal_table(c)
    ideal = np.zeros(size)
    ideal[values] = probs
    raw = np.zeros(size)
    for v in range(size):
        if ideal[v]:
            raw += ideal[v] * flip[idx ^ v]
    labels = tuple(f"q{q}" for q in c.measured_qubits)
    return OutcomeDistribution(labels, {_int_to_bits(v, m): float(raw[v]) for v in range(size) if raw[v] > 0})


@dataclass(frozen=True)
class NoisyExact:
    acceptance: float
    logical: OutcomeDistribution | None


def exact_noisy_logical(c: Circuit, nc: NoiseConfig) -> NoisyExact:
    """Acceptance probability and post-selected logical distribution under noise."""
    raw = exact_noisy_raw(c, nc)
    kept: dict[str, float] = {}
    for bits, p in raw.probabilities.items():
        if c.accepts(bits):
            key = c.logical(bits)
            kept[key] = kept.get(key, 0.0) + p
    acc = sum(kept.values())
    if acc <= 0:
        return NoisyExact(0.0, None)
    width = len(_post(c).readout_masks)
    return NoisyExact(acc, OutcomeDistribution(tuple(f"L{k}" for k in range(width)),
                                               {k: v / acc for k, v in kept.items()}))


def trajectory_run(c: Circuit, nc: NoiseConfig, shots: int, seed: int = 0) -> ShotCounts:
    """Shot-by-shot oracle: insert sampled Pauli gates, resolve on the statevector backend."""
    rng = np.random.default_rng(seed)
    readout = _readout_probs(c, nc)
    cache: dict[tuple, tuple[list[str], np.ndarray]] = {}
    raw = np.zeros(shots, dtype=np.int64)
    for s in range(shots):
        inserts: list[tuple[int, str, int]] = []
        for i, g in enumerate(c.gates):
            if g.kind in (GateKind.BARRIER, GateKind.MEASURE_Z):
                continue
            if g.kind == GateKind.PREP_0:
                if rng.random() < nc.prep_p(g.qubits[0]):
                    inserts.append((i, "X", g.qubits[0]))
                continue
            if rng.random() < nc.gate_p(g):
                choices = [p for p in product("IXYZ", repeat=len(g.qubits)) if set(p) != {"I"}]
                combo = choices[rng.integers(len(choices))]
                inserts += [(i, letter, q) for letter, q in zip(combo, g.qubits) if letter != "I"]
        key = tuple(inserts)
        if key not in cache:
            gates: list[Gate] = []
            by_pos: dict[int, list[Gate]] = {}
            for i, letter, q in inserts:
                by_pos.setdefault(i, []).append(Gate(GateKind(letter), (q,)))
            for i, g in enumerate(c.gates):
                gates.append(g)
                gates.extend(by_pos.get(i, []))
            branches = run_ensemble(c.renumbered(gates))
            cache[key] = ([b.bits for b in branches], np.array([b.probability for b in branches]))
        bits, probs = cache[key]
        v = _bits_to_int(bits[rng.choice(len(bits), p=probs / probs.sum())])
        for k, r in enumerate(readout):
            if rng.random() < r:
                v ^= 1 << k
        raw[s] = v
    return _tally(c, raw, shots)
