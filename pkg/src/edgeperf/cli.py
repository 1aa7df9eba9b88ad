"""``edgeperf`` command-line interface.

One subcommand per pipeline stage::

    edgeperf --seed 42 --out run gen-data --profiles vanilla optimized
    edgeperf --out run fit run/measurements_tcp-ps.csv
    edgeperf --out run pareto run/model_tcp-ps.txt --problem p1
    edgeperf --out run compare run/model_udp-nops.txt run/model_tcp-ps.txt

Exit status: 0 on success (infeasible optimisation results included),
2 on usage errors, 3 on data, model or config errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import shlex
import sys
from collections.abc import Sequence
from dataclasses import dataclass, replace
from pathlib import Path

from . import __version__
from .errors import EdgePerfError
from .measurements import dumps_records, grid_records, ingest, read_records
from .models import COMPONENTS, dumps_model, evaluate_total, fit_system, load_model, synthesize_records
from .netsim import (
    DEFAULT_TRUTH,
    PROFILES,
    NicState,
    SimConfig,
    exchange_trace,
    generate_records,
    get_profile,
    simulate_tcp_transfer,
    simulate_udp_burst,
)
from .optimizer import (
    DecisionDomain,
    compare_profiles,
    dumps_comparison,
    dumps_sweep,
    fmt9,
    pareto_sweep,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 2, 3

DEFAULT_RANGES = {"p1": (5.0, 60.0, 1.0), "p2": (0.10, 0.70, 0.02)}


class UsageError(Exception):
    pass


# -- helpers -----------------------------------------------------------------

def threshold_values(args) -> list[float]:
    if args.thresholds:
        try:
            return [float(v) for v in args.thresholds.split(",") if v.strip()]
        except ValueError:
            raise UsageError(f"--thresholds: not a comma-separated list of numbers: {args.thresholds!r}") from None
    start, stop, step = args.range or DEFAULT_RANGES[args.problem]
    if step <= 0 or stop < start:
        raise UsageError("--range needs start <= stop and step > 0")
    count = int((stop - start) / step + 1e-9) + 1
    # rounding keeps values like 0.1 + 3*0.02 printable as 0.16
    return [round(start + i * step, 12) for i in range(count)]


@dataclass(frozen=True)
class RunManifest:
    command: str
    config_path: str | None
    input_paths: tuple[str, ...]
    output_dir: str
    seed: int
    profile_names: tuple[str, ...]


def _inputs(args) -> tuple[str, ...]:
    paths = []
    for name in ("measurements", "model", "from_model"):
        if getattr(args, name, None):
            paths.append(getattr(args, name))
    paths.extend(getattr(args, "models", None) or [])
    return tuple(paths)


class Run:
    """Shared state for one invocation: config, seed, output dir, header."""

    def __init__(self, args, argv: Sequence[str]):
        self.args = args
        self.cfg = SimConfig.load(args.config) if args.config else SimConfig()
        if args.seed is not None:
            if args.seed < 0:
                raise UsageError("--seed must be >= 0")
            self.cfg = replace(self.cfg, rng_seed=args.seed)
        self.seed = self.cfg.rng_seed
        self.out = Path(args.out)
        self.manifest = RunManifest(
            command=args.command,
            config_path=args.config,
            input_paths=_inputs(args),
            output_dir=args.out,
            seed=self.seed,
            profile_names=tuple(getattr(args, "profiles", None) or ()),
        )
        self.header = [
            f"edgeperf {__version__}",
            "command: " + shlex.join(["edgeperf", *argv]),
            f"seed: {self.seed}",
        ]

    def write(self, name: str, text: str) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / name
        path.write_text(text, encoding="utf-8")
        print(f"wrote {path}")
        return path


def _table(header: Sequence[str], rows: Sequence[Sequence[object]], comments: Sequence[str]) -> str:
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# -- subcommands -------------------------------------------------------------

def cmd_gen_data(run: Run) -> int:
    a = run.args
    if a.from_model:
        sm = load_model(a.from_model)
        domain = DecisionDomain()
        records = synthesize_records(sm, domain.n_values, domain.q_values, samples_per_cell=a.samples,
                                     noise_ms=a.noise_ms, precision_noise=a.precision_noise, seed=run.seed)
        if a.means:
            records = grid_records(ingest(records))
        run.write(f"measurements_{sm.profile_name}.csv", dumps_records(records, run.header))
        return EXIT_OK
    truth = DEFAULT_TRUTH.with_noise(a.noise_ms, a.precision_noise)
    if a.gap is not None:
        truth = replace(truth, inter_image_gap_ms=a.gap)
    for name in a.profiles:
        profile = get_profile(name)
        records = generate_records(run.cfg, profile, truth, samples_per_cell=a.samples)
        if a.means:
            records = grid_records(ingest(records))
        run.write(f"measurements_{profile.name}.csv", dumps_records(records, run.header))
    return EXIT_OK


def cmd_fit(run: Run) -> int:
    a = run.args
    grid = ingest(read_records(a.measurements))
    sm = fit_system(grid, a.name)
    run.write(f"model_{sm.profile_name}.txt", dumps_model(sm, run.header))
    rows = []
    for comp in COMPONENTS:
        m = getattr(sm, comp)
        rows.append([comp, fmt9(m.residual_rms), *(repr(c) for c in m.coefficients)])
        print(f"{comp:>10}  residual_rms={fmt9(m.residual_rms)}")
    width = max(len(r) for r in rows)
    rows = [r + [""] * (width - len(r)) for r in rows]
    header = ["component", "residual_rms", *(f"c{i}" for i in range(width - 2))]
    run.write(f"fit_report_{sm.profile_name}.csv", _table(header, rows, run.header))
    return EXIT_OK


def cmd_predict(run: Run) -> int:
    a = run.args
    sm = load_model(a.model)
    domain = DecisionDomain()
    ns = a.n or list(domain.n_values)
    qs = a.q or list(domain.q_values)
    rows = []
    for n in ns:
        for q in qs:
            e = evaluate_total(sm, n, q)
            rows.append([n, q, *(fmt9(v) for v in (e.t_enc_ms, e.t_dec_ms, e.t_tx_ms, e.t_dl_ms,
                                                   e.t_total_ms, e.fps, e.precision))])
    header = ["n", "q", "t_enc_ms", "t_dec_ms", "t_tx_ms", "t_dl_ms", "t_total_ms", "fps", "precision"]
    if len(rows) == 1:
        print(", ".join(f"{k}={v}" for k, v in zip(header, rows[0])))
    run.write(f"predict_{sm.profile_name}.csv", _table(header, rows, run.header))
    return EXIT_OK


def cmd_optimize(run: Run) -> int:
    a = run.args
    sm = load_model(a.model)
    point = pareto_sweep(sm, DecisionDomain(), a.problem, [a.threshold])[0]
    r = point.result
    if r.feasible:
        print(f"feasible=true n={r.n} q={r.q} precision={fmt9(r.precision)} "
              f"t_total_ms={fmt9(r.t_total_ms)} fps={fmt9(r.fps)}")
    else:
        print("feasible=false")
    run.write(f"optimize_{a.problem}_{sm.profile_name}.csv", dumps_sweep([point], run.header))
    return EXIT_OK


def cmd_pareto(run: Run) -> int:
    a = run.args
    sm = load_model(a.model)
    points = pareto_sweep(sm, DecisionDomain(), a.problem, threshold_values(a))
    run.write(f"pareto_{a.problem}_{sm.profile_name}.csv", dumps_sweep(points, run.header))
    return EXIT_OK


def cmd_simulate(run: Run) -> int:
    a = run.args
    profile = get_profile(a.profile)
    if a.uplink_only:
        nic = NicState("asleep" if a.asleep else "awake")
        sim = simulate_tcp_transfer if profile.transport == "tcp" else simulate_udp_burst
        trace = sim(a.bytes, run.cfg, nic)
    else:
        trace = exchange_trace(a.bytes, profile, run.cfg, a.gap)
    print(f"profile={profile.name} bytes={a.bytes} total_ms={fmt9(trace.total_ms)} "
          f"data_frames={trace.data_frames} ack_frames={trace.ack_frames}")
    run.write(f"trace_{profile.name}.csv", trace.dumps_csv(run.header))
    return EXIT_OK


def cmd_compare(run: Run) -> int:
    a = run.args
    sm_opt, sm_van = (load_model(p) for p in a.models)
    report = compare_profiles(sm_opt, sm_van, DecisionDomain(), a.problem, threshold_values(a))
    run.write(f"compare_{a.problem}.csv", dumps_comparison(report, run.header))
    rows = [[fmt9(r.threshold), fmt9(r.absolute_gap), fmt9(r.relative_gap)] for r in report.rows]
    summary = [
        f"problem: {report.problem} (gap metric: {report.metric})",
        f"{report.optimized_name} frontier: {fmt9(report.optimized_frontier)}",
        f"{report.vanilla_name} frontier: {fmt9(report.vanilla_frontier)}",
        f"{report.optimized_name} sweep frontier: {fmt9(report.optimized_sweep_frontier)}",
        f"{report.vanilla_name} sweep frontier: {fmt9(report.vanilla_sweep_frontier)}",
    ]
    for line in summary:
        print(line)
    run.write(f"compare_{a.problem}_gaps.csv",
              _table(["threshold", "absolute_gap", "relative_gap"], rows, [*run.header, *summary]))
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def _sweep_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--problem", choices=("p1", "p2"), default="p1",
                   help="p1: thresholds are target fps; p2: thresholds are minimum precision")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--range", nargs=3, type=float, metavar=("START", "STOP", "STEP"),
                   help="inclusive threshold range (default p1: 5 60 1, p2: 0.1 0.7 0.02)")
    g.add_argument("--thresholds", help="comma-separated thresholds, strictly increasing")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="edgeperf", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"edgeperf {__version__}")
    parser.add_argument("--config", help="simulator config file (key = value per line)")
    parser.add_argument("--seed", type=int, help="RNG seed (overrides rng_seed from the config)")
    parser.add_argument("--out", default=".", help="output directory (default: current directory)")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("gen-data", help="simulate a measurement campaign per profile")
    p.add_argument("--profiles", nargs="+", default=["vanilla", "optimized"],
                   choices=sorted([*PROFILES, "vanilla", "optimized"]))
    p.add_argument("--samples", type=int, default=1, help="samples per (n, q) cell")
    p.add_argument("--noise-ms", type=float, default=0.0, help="Gaussian noise on every delay (ms)")
    p.add_argument("--precision-noise", type=float, default=0.0)
    p.add_argument("--gap", type=float, help="inter-image idle gap in ms (default 25)")
    p.add_argument("--means", action="store_true", help="write per-cell means instead of samples")
    p.add_argument("--from-model", metavar="MODEL",
                   help="sample every component from a model file instead of simulating")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("fit", help="fit a system model to a measurement CSV")
    p.add_argument("measurements")
    p.add_argument("--name", help="profile name for the model (default: from the CSV)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="evaluate a model on (n, q) points")
    p.add_argument("model")
    p.add_argument("--n", type=int, action="append", help="NN size (repeatable; default: all)")
    p.add_argument("--q", type=int, action="append", help="encoding rate (repeatable; default: all)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("optimize", help="solve P1 or P2 for one threshold")
    p.add_argument("model")
    p.add_argument("--problem", choices=("p1", "p2"), default="p1")
    p.add_argument("--threshold", type=float, required=True, help="target fps (p1) or minimum precision (p2)")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("pareto", help="sweep thresholds and write the trade-off curve")
    p.add_argument("model")
    _sweep_args(p)
    p.set_defaults(func=cmd_pareto)

    p = sub.add_parser("simulate", help="simulate one image exchange and write its trace")
    p.add_argument("--bytes", type=int, default=31335, help="image size in bytes")
    p.add_argument("--profile", default="optimized", choices=sorted([*PROFILES, "vanilla", "optimized"]))
    p.add_argument("--gap", type=float, default=0.0, help="idle gap before the image (ms)")
    p.add_argument("--uplink-only", action="store_true", help="data transfer only, no response frame")
    p.add_argument("--asleep", action="store_true", help="with --uplink-only: start with the NIC asleep")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="compare an optimized and a vanilla model")
    p.add_argument("models", nargs=2, metavar="MODEL", help="optimized model, then vanilla model")
    _sweep_args(p)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(Run(args, argv))
    except UsageError as exc:
        print(f"edgeperf: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (EdgePerfError, ValueError, OSError) as exc:
        print(f"edgeperf: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
