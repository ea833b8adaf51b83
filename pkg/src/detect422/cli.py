"""Command-line entry point: ``detect422 {verify,suite,synth,catalog}``.

Exit codes: 0 ok, 1 a verified claim or reference-count match failed, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from pathlib import Path

from .code422 import TABLE1, PrepVariant, catalog
from .qasm import QasmError, load_layout, serialize_qasm

EXIT_OK, EXIT_CLAIM, EXIT_USAGE = 0, 1, 2
OUT_ENV = "DETECT422_OUT"


def _out_dir(args) -> Path:
    return Path(args.out or os.environ.get(OUT_ENV) or "out")


def _layout(parser: argparse.ArgumentParser, value: str):
    try:
        return load_layout(value)
    except (FileNotFoundError, QasmError) as e:
        parser.error(f"--layout: {e}")


def cmd_verify(args, parser) -> int:
    from .ftverify import verify_prep

    if args.all or not args.variants:
        variants = list(PrepVariant)
    else:
        try:
            variants = [PrepVariant(v) for v in args.variants]
        except ValueError as e:
            parser.error(str(e))
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    ok = True
    for v in variants:
        for expand in (True, False):
            rep = verify_prep(v, expand=expand, placement=args.placement, idle=args.idle)
            print(rep.summary_line())
            (out / f"faults_{v.value}_{rep.granularity}.json").write_text(rep.to_json() + "\n")
            ok &= rep.passed
    return EXIT_OK if ok else EXIT_CLAIM


def _noise(args, parser):
    from .noise import NoiseConfig

    try:
        nc = NoiseConfig.load(args.noise) if args.noise else NoiseConfig()
    except (OSError, ValueError, TypeError) as e:
        parser.error(f"--noise: {e}")
    overrides = {k: getattr(args, k) for k in ("p1", "p2", "r", "prep_flip", "drift") if getattr(args, k) is not None}
    if args.seed is not None:
        overrides["seed"] = args.seed
    try:
        return nc.from_dict({**nc.to_dict(), **overrides})
    except ValueError as e:
        parser.error(str(e))


def cmd_suite(args, parser) -> int:
    from .experiment import default_implementations, run_suite

    nc = _noise(args, parser)
    layout = _layout(parser, args.layout)
    impls = default_implementations(layout, args.search)
    report = run_suite(nc, runs=args.runs, shots=args.shots, implementations=impls, confidence=args.confidence)
    paths = report.write(_out_dir(args), plot_data=args.plot_data)
    (_out_dir(args) / "noise_config.json").write_text(json.dumps(nc.to_dict(), indent=2, sort_keys=True) + "\n")
    print(report.table())
    print(f"best bare pair: {report.best_bare()}")
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


def _pair(parser, text: str, layout) -> tuple[int, int]:
    try:
        a, b = (int(x) for x in text.replace(",", "-").split("-"))
    except ValueError:
        parser.error(f"--pair must look like 2-0, got {text!r}")
    if (a, b) not in layout.cnot_edges and (b, a) not in layout.cnot_edges:
        parser.error(f"qubits {a},{b} are not connected on {layout.name}")
    return a, b


def cmd_synth(args, parser) -> int:
    from .synthesis import export, synthesize_all, synthesize_words, verify_table1

    layout = _layout(parser, args.layout)
    pair = _pair(parser, args.pair, layout)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        results = synthesize_words(layout, pair) if args.search == "words" else synthesize_all(layout, pair)
        checks = verify_table1(results)
    out = _out_dir(args) / f"synth_{layout.name}_{pair[0]}-{pair[1]}_{args.search}"
    export(results, out)
    for c in checks:
        mark = "ok" if c.ok else "MISMATCH"
        print(f"row {c.row:2d}: expected {c.expected:2d} found {c.found:2d} distribution_ok={c.distribution_ok} {mark}")
    n_ok = sum(c.ok for c in checks)
    print(f"{n_ok}/{len(checks)} rows match the reference counts; files in {out}")
    return EXIT_OK if n_ok == len(checks) else EXIT_CLAIM


def cmd_catalog(args, parser) -> int:
    out = _out_dir(args) / "catalog"
    out.mkdir(parents=True, exist_ok=True)
    circuits = catalog()
    for name, c in circuits.items():
        (out / f"{name}.qasm").write_text(serialize_qasm(c))
    index = {t.task_id: {"row": t.row, "initial": t.initial, "unitary": t.label,
                         "circuits": sorted(n for n in circuits if n.startswith(t.task_id + "-"))} for t in TABLE1}
    (out / "index.json").write_text(json.dumps(index, indent=2, ensure_ascii=False) + "\n")
    print(f"wrote {len(circuits)} circuits to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="detect422", description="[[4,2,2]] error-detection simulation toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, layout=True):
        sp.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./out)")
        if layout:
            sp.add_argument("--layout", default="raven", help="shipped layout name or .cfg path")

    v = sub.add_parser("verify", help="exhaustive single-fault verification of the preparations")
    v.add_argument("variants", nargs="*", help="variants to check (default: all)")
    v.add_argument("--all", action="store_true")
    v.add_argument("--placement", choices=["after", "before"], default="after")
    v.add_argument("--idle", action="store_true", help="also inject idle-qubit faults")
    common(v, layout=False)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("suite", help="noisy sampling experiment over all tasks and implementations")
    s.add_argument("--noise", help="JSON noise config file")
    s.add_argument("--shots", type=int, default=8192)
    s.add_argument("--runs", type=int, default=100)
    s.add_argument("--seed", type=int)
    s.add_argument("--confidence", type=float, default=0.99)
    s.add_argument("--plot-data", action="store_true", help="also write pre-binned plot series")
    s.add_argument("--search", choices=["words", "native"], default="words", help="bare circuit source")
    for k in ("p1", "p2", "r", "prep-flip", "drift"):
        s.add_argument(f"--{k}", type=float, dest=k.replace("-", "_"))
    common(s)
    s.set_defaults(func=cmd_suite)

    y = sub.add_parser("synth", help="synthesize the 20 bare circuits and compare with the reference counts")
    y.add_argument("--pair", default="2-0", help="physical pair as c-t (default 2-0)")
    y.add_argument("--search", choices=["words", "native"], default="words")
    common(y)
    y.set_defaults(func=cmd_synth)

    c = sub.add_parser("catalog", help="export every catalog circuit as QASM")
    common(c, layout=False)
    c.set_defaults(func=cmd_catalog)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "shots", 1) < 1 or getattr(args, "runs", 1) < 1:
        parser.error("--shots and --runs must be >= 1")
    if not 0 < getattr(args, "confidence", 0.5) < 1:
        parser.error("--confidence must be in (0, 1)")
    return args.func(args, parser)


if __name__ == "__main__":
    sys.exit(main())
