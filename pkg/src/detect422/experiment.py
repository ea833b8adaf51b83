"""The run protocol: D-hat per run, aggregation with t confidence intervals, the suite and its reports.

Seeds: run ``k`` of a suite with base seed ``s`` is recorded with seed
``s + k``; its shots for circuit row ``i`` and implementation index ``j``
come from ``numpy.random.default_rng([s + k, i, j])`` and its drifted noise
config from ``default_rng([s + k])``.
"""
from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from .circuit import RAVEN, Circuit, QubitLayout
from .code422 import TABLE1, EncodedTask, PrepVariant, build_encoded_run, prep_for
from .noise import NoiseConfig, noisy_run
from .sim import OutcomeDistribution, ShotCounts

LOGICAL_OUTCOMES = ("00", "01", "10", "11")
ENCODED = ("FTv1", "FTv2", "NFT")


class DegenerateRun(ValueError):
    """Every shot of a run was rejected."""


def stat_distance_hat(counts: ShotCounts, ideal: OutcomeDistribution) -> float:
    """Plug-in statistical distance between the kept shots and the ideal distribution."""
    if counts.n_valid == 0:
        raise DegenerateRun("no shot survived post-selection")
    keys = set(LOGICAL_OUTCOMES) | set(counts.counts) | set(ideal.probabilities)
    return 0.5 * sum(abs(ideal.prob(k) - counts.get(k) / counts.n_valid) for k in keys)


@dataclass(frozen=True)
class RunRecord:
    circuit_id: str
    implementation: str
    run: int
    counts: ShotCounts
    d_hat: float  # nan when the run is degenerate
    seed: int
    noise: NoiseConfig | None = None

    @property
    def ratio(self) -> float:
        return self.counts.ratio


@dataclass(frozen=True)
class Aggregate:
    n: int
    mean: float
    std: float
    ci_low: float
    ci_high: float
    mean_ratio: float
    confidence: float

    @property
    def half_width(self) -> float:
        return (self.ci_high - self.ci_low) / 2


def t_interval(values, confidence: float = 0.99) -> tuple[float, float, float, float]:
    """Mean, sample std and the two-sided t interval (nan bounds with fewer than 2 values)."""
    v = np.asarray([x for x in values if not np.isnan(x)], dtype=float)
    if v.size == 0:
        return float("nan"), float("nan"), float("nan"), float("nan")
    mean = float(v.mean())
    if v.size < 2:
        return mean, float("nan"), float("nan"), float("nan")
    s = float(v.std(ddof=1))
    half = float(stats.t.ppf(0.5 + confidence / 2, v.size - 1)) * s / np.sqrt(v.size)
    return mean, s, mean - half, mean + half


def aggregate_runs(records: list[RunRecord], confidence: float = 0.99) -> Aggregate:
    if len(records) < 2:
        warnings.warn("fewer than 2 runs: confidence interval undefined", stacklevel=2)
    mean, s, lo, hi = t_interval([r.d_hat for r in records], confidence)
    ratio = float(np.mean([r.ratio for r in records])) if records else float("nan")
    return Aggregate(len(records), mean, s, lo, hi, ratio, confidence)


def welch_interval(a, b, confidence: float = 0.99) -> tuple[float, float, float]:
    """Mean of ``a - b`` with a Welch t interval."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    diff = float(a.mean() - b.mean())
    va, vb = a.var(ddof=1) / a.size, b.var(ddof=1) / b.size
    se = np.sqrt(va + vb)
    if se == 0:
        return diff, diff, diff
    dof = (va + vb) ** 2 / (va**2 / (a.size - 1) + vb**2 / (b.size - 1))
    half = float(stats.t.ppf(0.5 + confidence / 2, dof)) * se
    return diff, diff - half, diff + half


# -- implementations -----------------------------------------------------------------


def bare_tag(pair: tuple[int, int]) -> str:
    return f"bare[{pair[0]}-{pair[1]}]"


@dataclass(frozen=True)
class Implementation:
    tag: str
    circuits: dict[int, Circuit]  # task row -> circuit

    @property
    def is_bare(self) -> bool:
        return self.tag.startswith("bare")


def bare_implementations(layout: QubitLayout = RAVEN, search: str = "words") -> list[Implementation]:
    """One bare implementation per CNOT edge; ``search`` is ``"words"`` or ``"native"``."""
    from .synthesis import synthesize_all, synthesize_words

    out = []
    for pair in layout.connected_pairs():
        results = synthesize_words(layout, pair) if search == "words" else synthesize_all(layout, pair)
        out.append(Implementation(bare_tag(pair), {r.target.row: r.circuit for r in results}))
    return out


def encoded_implementation(zero_prep: str, layout: str = "raven") -> Implementation:
    """Encoded runs; |0+> and Bell rows use their dedicated preparations."""
    circuits = {t.row: build_encoded_run(t, prep_for(t.initial, PrepVariant(zero_prep), layout)) for t in TABLE1}
    return Implementation(zero_prep if layout == "raven" else layout.capitalize(), circuits)


def default_implementations(layout: QubitLayout = RAVEN, search: str = "words") -> list[Implementation]:
    """Bare pairs of ``layout`` plus its encoded variants (FTv1/FTv2/NFT on raven)."""
    if layout.name == "raven":
        encoded = [encoded_implementation(p) for p in ENCODED]
    else:
        encoded = [encoded_implementation(PrepVariant.Sparrow00, layout.name)]
    return bare_implementations(layout, search) + encoded


# -- the suite -------------------------------------------------------------------------


@dataclass
class SuiteReport:
    records: list[RunRecord]
    confidence: float
    tasks: tuple[EncodedTask, ...]
    implementations: tuple[str, ...]
    instructions: dict[str, dict[str, int]] = field(default_factory=dict)

    def _by(self) -> dict[tuple[str, str], list[RunRecord]]:
        out: dict[tuple[str, str], list[RunRecord]] = {}
        for r in self.records:
            out.setdefault((r.circuit_id, r.implementation), []).append(r)
        return out

    def per_circuit(self) -> dict[tuple[str, str], Aggregate]:
        return {k: aggregate_runs(v, self.confidence) for k, v in sorted(self._by().items())}

    def run_averages(self, impl: str) -> np.ndarray:
        """Per-run average of D-hat over all circuits."""
        runs: dict[int, list[float]] = {}
        for r in self.records:
            if r.implementation == impl:
                runs.setdefault(r.run, []).append(r.d_hat)
        return np.array([np.nanmean(runs[k]) for k in sorted(runs)])

    def suite_average(self, impl: str) -> Aggregate:
        mean, s, lo, hi = t_interval(self.run_averages(impl), self.confidence)
        ratios = [r.ratio for r in self.records if r.implementation == impl]
        return Aggregate(len(self.run_averages(impl)), mean, s, lo, hi, float(np.mean(ratios)), self.confidence)

    def best_bare(self) -> str:
        bare = [i for i in self.implementations if i.startswith("bare")]
        return min(bare, key=lambda i: self.suite_average(i).mean)

    def differences(self, encoded: str = "FTv1", bare: str | None = None) -> dict[str, tuple[float, float, float]]:
        """Per circuit: encoded minus bare mean D-hat, with a Welch interval."""
        bare = bare or self.best_bare()
        by = self._by()
        out = {}
        for t in self.tasks:
            a = [r.d_hat for r in by[(t.task_id, encoded)]]
            b = [r.d_hat for r in by[(t.task_id, bare)]]
            out[t.task_id] = welch_interval(a, b, self.confidence)
        return out

    # serialisation
    def runs_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["circuit_id", "implementation", "run", "n_valid", "n00", "n01", "n10", "n11", "d_hat", "ratio",
                    "seed"])
        for r in sorted(self.records, key=lambda r: (r.circuit_id, r.implementation, r.run)):
            c = r.counts
            w.writerow([r.circuit_id, r.implementation, r.run, c.n_valid, *(c.get(k) for k in LOGICAL_OUTCOMES),
                        _fmt(r.d_hat), _fmt(r.ratio), r.seed])
        return buf.getvalue()

    def summary_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["circuit_id", "implementation", "mean_d_hat", "ci_low", "ci_high", "mean_ratio"])
        for (cid, impl), a in self.per_circuit().items():
            w.writerow([cid, impl, _fmt(a.mean), _fmt(a.ci_low), _fmt(a.ci_high), _fmt(a.mean_ratio)])
        return buf.getvalue()

    def suite_summary(self) -> dict:
        rows = []
        for impl in self.implementations:
            a = self.suite_average(impl)
            rows.append({
                "Implementation": impl,
                "Post-selection ratio": _round(a.mean_ratio),
                "Avg.Perf.": _round(a.mean),
                "ci_low": _round(a.ci_low),
                "ci_high": _round(a.ci_high),
            })
        return {"confidence": self.confidence, "best_bare": self.best_bare(), "implementations": rows}

    def plot_data(self) -> dict:
        """Pre-binned series: D-hat per circuit for each bare pair, and encoded-minus-bare per circuit."""
        per = self.per_circuit()
        fig7 = {
            impl: [{"circuit_id": t.task_id, "instructions": t.instructions, "mean": _round(per[(t.task_id, impl)].mean),
                    "ci_low": _round(per[(t.task_id, impl)].ci_low), "ci_high": _round(per[(t.task_id, impl)].ci_high)}
                   for t in self.tasks]
            for impl in self.implementations if impl.startswith("bare")
        }
        best = self.best_bare()
        fig8 = {
            enc: [{"circuit_id": cid, "diff": _round(d), "ci_low": _round(lo), "ci_high": _round(hi)}
                  for cid, (d, lo, hi) in self.differences(enc, best).items()]
            for enc in self.implementations if not enc.startswith("bare")
        }
        return {"bare_pairs": fig7, "encoded_minus_best_bare": fig8, "best_bare": best}

    def table(self) -> str:
        lines = [f"{'Implementation':<14} {'Post-selection ratio':>21} {'Avg.Perf.':>10}  CI({self.confidence:.0%})"]
        best = self.best_bare()
        for row in self.suite_summary()["implementations"]:
            mark = " *" if row["Implementation"] == best else ""
            lines.append(f"{row['Implementation']:<14} {row['Post-selection ratio']:>21.4f} {row['Avg.Perf.']:>10.5f}"
                         f"  [{row['ci_low']:.5f}, {row['ci_high']:.5f}]{mark}")
        return "\n".join(lines)

    def write(self, out_dir: str | Path, plot_data: bool = False) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        files = {"runs.csv": self.runs_csv(), "summary.csv": self.summary_csv(),
                 "suite_summary.json": json.dumps(self.suite_summary(), indent=2) + "\n"}
        if plot_data:
            files["plot_data.json"] = json.dumps(self.plot_data(), indent=2) + "\n"
        paths = []
        for name, text in files.items():
            p = out / name
            p.write_text(text)
            paths.append(p)
        return paths


def _fmt(x: float) -> str:
    return "nan" if np.isnan(x) else f"{x:.10g}"


def _round(x: float) -> float | None:
    return None if np.isnan(x) else float(f"{x:.10g}")


def run_suite(
    nc: NoiseConfig,
    runs: int = 100,
    shots: int = 8192,
    tasks: tuple[EncodedTask, ...] = TABLE1,
    implementations: list[Implementation] | None = None,
    seed: int | None = None,
    confidence: float = 0.99,
) -> SuiteReport:
    """Every task on every implementation, ``runs`` times ``shots`` shots each."""
    impls = implementations if implementations is not None else default_implementations()
    base = nc.seed if seed is None else seed
    records = []
    for run in range(runs):
        run_seed = base + run
        run_nc = nc.jittered(np.random.default_rng([run_seed]))
        for t in tasks:
            for j, impl in enumerate(impls):
                rng = np.random.default_rng([run_seed, t.row, j])
                counts = noisy_run(impl.circuits[t.row], run_nc, shots, rng)
                try:
                    d = stat_distance_hat(counts, t.ideal_logical_distribution)
                except DegenerateRun:
                    d = float("nan")
                records.append(RunRecord(t.task_id, impl.tag, run, counts, d, run_seed, run_nc))
    from .circuit import instruction_count

    instr = {}
    for impl in impls:
        if impl.is_bare:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                instr[impl.tag] = {TABLE1[r - 1].task_id: instruction_count(c) for r, c in impl.circuits.items()}
    return SuiteReport(records, confidence, tuple(tasks), tuple(i.tag for i in impls), instr)
