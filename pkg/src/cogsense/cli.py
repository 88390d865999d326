"""Command-line driver: ``gen``, ``solve``, ``sweep`` and ``simulate``.

Exit status is 0 on success, 1 for usage errors and 2 for runtime errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import _kernels
from .model import Instance, generate_instance, read_instance, write_instance
from .oracle import DEFAULT_CAP, exhaustive_search
from .selector import OptResult, coarse_optimize, fine_optimize, joint_optimize
from .simulator import simulate

METHODS = ("coarse", "fine", "exhaustive", "joint")
CSV_COLUMNS = ("seed", "snr_db", "n", "l", "method", "capacity_nats", "capacity_bits",
               "lambda", "selected_bitmask_hex", "iterations", "certified_optimal", "wall_ms")

EXIT_USAGE = 1
EXIT_RUNTIME = 2

log = logging.getLogger("cogsense")


@dataclass(frozen=True)
class ResultRow:
    seed: int | None
    snr_db: float | None
    n: int
    l: int
    method: str
    capacity_nats: float
    capacity_bits: float
    lam: float
    selected_bitmask_hex: str
    iterations: int
    certified_optimal: bool
    wall_ms: float | None

    @classmethod
    def from_result(cls, inst: Instance, res: OptResult, seed=None, snr_db=None,
                    wall_ms=None) -> "ResultRow":
        return cls(seed, snr_db, inst.n, inst.sensing_budget, res.method,
                   res.capacity_nats, res.capacity_nats / math.log(2.0),
                   res.alloc.water_level, format(res.sensing.bitmask, "x"),
                   res.iterations, res.certified_optimal, wall_ms)

    def to_fields(self) -> list[str]:
        def num(x):
            return "" if x is None else format(float(x), ".17g")

        return [
            "" if self.seed is None else str(self.seed),
            "" if self.snr_db is None else format(float(self.snr_db), "g"),
            str(self.n), str(self.l), self.method,
            num(self.capacity_nats), num(self.capacity_bits), num(self.lam),
            self.selected_bitmask_hex, str(self.iterations),
            "true" if self.certified_optimal else "false",
            "" if self.wall_ms is None else f"{self.wall_ms:.3f}",
        ]

    @classmethod
    def parse(cls, record: list[str]) -> "ResultRow":
        if len(record) != len(CSV_COLUMNS):
            raise ValueError(f"expected {len(CSV_COLUMNS)} columns, got {len(record)}")
        r = dict(zip(CSV_COLUMNS, record))

        def opt(v, conv):
            return None if v == "" else conv(v)

        if r["certified_optimal"] not in ("true", "false"):
            raise ValueError(f"bad certified_optimal value {r['certified_optimal']!r}")
        return cls(opt(r["seed"], int), opt(r["snr_db"], float), int(r["n"]), int(r["l"]),
                   r["method"], float(r["capacity_nats"]), float(r["capacity_bits"]),
                   float(r["lambda"]), r["selected_bitmask_hex"], int(r["iterations"]),
                   r["certified_optimal"] == "true", opt(r["wall_ms"], float))


def format_rows(rows, header: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(CSV_COLUMNS)
    for row in rows:
        w.writerow(row.to_fields())
    return buf.getvalue()


def parse_rows(text: str) -> list[ResultRow]:
    reader = csv.reader(io.StringIO(text))
    out = []
    for rec in reader:
        if not rec or tuple(rec) == CSV_COLUMNS:
            continue
        out.append(ResultRow.parse(rec))
    return out


def solve_methods(inst: Instance, methods, workers: int = 1, cap: int = DEFAULT_CAP):
    """Run ``methods`` on ``inst``; returns ``{method: (OptResult, wall_ms)}``.

    ``fine`` reuses the coarse stage when both are requested; its time
    includes the coarse run it depends on.
    """
    out = {}
    coarse = None
    coarse_ms = 0.0
    for m in methods:
        t0 = time.perf_counter()
        if m in ("coarse", "fine"):
            if coarse is None:
                coarse = coarse_optimize(inst)
                coarse_ms = (time.perf_counter() - t0) * 1e3
            if m == "coarse":
                out[m] = (coarse, coarse_ms)
                continue
            t1 = time.perf_counter()
            res = fine_optimize(inst, coarse)
            out[m] = (res, coarse_ms + (time.perf_counter() - t1) * 1e3)
            continue
        if m == "exhaustive":
            res = exhaustive_search(inst, cap=cap, workers=workers)
        elif m == "joint":
            res = joint_optimize(inst)
        else:
            raise ValueError(f"unknown method {m!r}")
        out[m] = (res, (time.perf_counter() - t0) * 1e3)
    return out


def result_detail(inst: Instance, res: OptResult) -> dict:
    return {
        "method": res.method,
        "selected": list(res.sensing.indices),
        "lambda": res.alloc.water_level,
        "lambda_min": res.lambda_min,
        "powers": [float(p) for p in res.alloc.powers],
        "capacity_nats": res.capacity_nats,
        "capacity_bits": res.alloc.capacity_bits,
        "iterations": res.iterations,
        "certified_optimal": res.certified_optimal,
        "trace": [{"selected": list(s.indices), "lambda": lam} for s, lam in res.trace],
    }


# -- argument types -----------------------------------------------------------

def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def parse_snr_range(text: str) -> list[float]:
    """``start:stop:step`` in dB, endpoints inclusive; a single value is allowed."""
    parts = text.split(":")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad SNR range {text!r}") from None
    if len(vals) == 1:
        return vals
    if len(vals) != 3 or vals[2] <= 0 or vals[1] < vals[0]:
        raise argparse.ArgumentTypeError(f"SNR range must be start:stop:step, got {text!r}")
    start, stop, step = vals
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def parse_seeds(text: str) -> list[int]:
    """Comma list of seeds and inclusive ``a..b`` ranges."""
    seeds: list[int] = []
    try:
        for part in text.split(","):
            if ".." in part:
                a, b = part.split("..")
                if int(b) < int(a):
                    raise ValueError
                seeds.extend(range(int(a), int(b) + 1))
            elif part:
                seeds.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from None
    if not seeds:
        raise argparse.ArgumentTypeError("empty seed list")
    return seeds


def parse_methods(text: str) -> list[str]:
    methods = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in methods if m not in METHODS]
    if bad or not methods:
        raise argparse.ArgumentTypeError(f"methods must be drawn from {','.join(METHODS)}")
    return methods


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cogsense", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="write a random instance file")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--n", type=_positive_int, default=16)
    g.add_argument("--l", type=_positive_int, default=8)
    g.add_argument("--snr-db", type=float, default=10.0)
    g.add_argument("--taps", type=_positive_int, default=4)
    g.add_argument("--out", default="-", help="output path (default stdout)")

    s = sub.add_parser("solve", help="solve one instance and print a CSV row")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--method", choices=METHODS, default="fine")
    s.add_argument("--json", dest="json_out", help="write detail JSON here ('-' for stderr)")
    s.add_argument("--seed", type=int, help="seed column value")
    s.add_argument("--snr-db", type=float, help="snr_db column value")
    s.add_argument("--workers", type=_positive_int, default=1)
    s.add_argument("--cap", type=_positive_int, default=DEFAULT_CAP)
    s.add_argument("--no-header", action="store_true")
    s.add_argument("--no-timing", action="store_true", help="leave wall_ms empty")

    w = sub.add_parser("sweep", help="capacity-vs-SNR grid as CSV")
    w.add_argument("--n", type=_positive_int, default=16)
    w.add_argument("--l", type=_positive_int, default=8)
    w.add_argument("--snr-db", type=parse_snr_range, default=parse_snr_range("-10:30:5"))
    w.add_argument("--seeds", type=parse_seeds, default=parse_seeds("1..10"))
    w.add_argument("--methods", type=parse_methods, default=["coarse", "fine", "exhaustive"])
    w.add_argument("--taps", type=_positive_int, default=4)
    w.add_argument("--workers", type=_positive_int, default=1)
    w.add_argument("--out", default="-")
    w.add_argument("--no-timing", action="store_true")

    m = sub.add_parser("simulate", help="Monte Carlo check of the ergodic rate")
    m.add_argument("--in", dest="inp", required=True)
    m.add_argument("--method", choices=METHODS, default="fine")
    m.add_argument("--slots", type=_positive_int, default=100_000)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--json", dest="json_out")
    return p


# -- commands -----------------------------------------------------------------

def _write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _load(path: str) -> Instance:
    data = sys.stdin.buffer.read() if path == "-" else Path(path).read_bytes()
    return read_instance(data)


def cmd_gen(args) -> int:
    inst = generate_instance(args.seed, args.n, args.l, args.snr_db, args.taps)
    data = write_instance(inst)
    if args.out == "-":
        sys.stdout.buffer.write(data)
    else:
        Path(args.out).write_bytes(data)
    return 0


def cmd_solve(args) -> int:
    inst = _load(args.inp)
    res, ms = solve_methods(inst, [args.method], workers=args.workers, cap=args.cap)[args.method]
    row = ResultRow.from_result(inst, res, args.seed, args.snr_db,
                                None if args.no_timing else ms)
    sys.stdout.write(format_rows([row], header=not args.no_header))
    if args.json_out:
        text = json.dumps(result_detail(inst, res), indent=2) + "\n"
        if args.json_out == "-":
            sys.stderr.write(text)
        else:
            Path(args.json_out).write_text(text)
    return 0


def _sweep_seed(seed, n, l, snrs, taps, methods, timing):
    rows = []
    for snr in snrs:
        inst = generate_instance(seed, n, l, snr, taps)
        for m, (res, ms) in solve_methods(inst, methods).items():
            rows.append(ResultRow.from_result(inst, res, seed, snr, ms if timing else None))
    return rows


def cmd_sweep(args) -> int:
    if args.l > args.n:
        raise _UsageError(f"--l ({args.l}) must not exceed --n ({args.n})")
    job = (args.n, args.l, args.snr_db, args.taps, args.methods, not args.no_timing)
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            parts = list(pool.map(_sweep_seed, args.seeds, *[[v] * len(args.seeds) for v in job]))
    else:
        parts = [_sweep_seed(s, *job) for s in args.seeds]
    order = {m: i for i, m in enumerate(args.methods)}
    rows = sorted((r for part in parts for r in part),
                  key=lambda r: (r.seed, r.snr_db, order[r.method]))
    _write_text(args.out, format_rows(rows))
    return 0


def cmd_simulate(args) -> int:
    inst = _load(args.inp)
    res, _ = solve_methods(inst, [args.method])[args.method]
    sim = simulate(inst, res.sensing, res.alloc, args.slots, args.seed)
    analytical = res.capacity_nats
    if args.slots < 2:
        band = "n/a"
    else:
        band = "pass" if sim.within_band(analytical) else "fail"
    report = {
        "method": res.method,
        "selected": list(res.sensing.indices),
        "slots": sim.slots,
        "seed": args.seed,
        "analytical_capacity_nats": analytical,
        "empirical_rate_nats": sim.empirical_rate,
        "rate_stderr": sim.rate_stderr,
        "empirical_avg_power": sim.empirical_avg_power,
        "power_stderr": sim.power_stderr,
        "power_budget": inst.power_budget,
        "band_3se": band,
    }
    for k, v in report.items():
        sys.stdout.write(f"{k}: {v}\n")
    if args.json_out:
        safe = {k: (None if isinstance(v, float) and not math.isfinite(v) else v)
                for k, v in report.items()}
        Path(args.json_out).write_text(json.dumps(safe, indent=2) + "\n")
    return 0


class _UsageError(Exception):
    pass


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "sweep": cmd_sweep, "simulate": cmd_simulate}


def _join_dash_values(argv: list[str]) -> list[str]:
    # "--snr-db -10:30:5" would otherwise be read as an unknown option
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok == "--snr-db":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_join_dash_values(argv))
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    log.debug("kernel backend: %s", _kernels.BACKEND)
    if args.command == "gen" and args.l > args.n:
        parser.error(f"--l ({args.l}) must not exceed --n ({args.n})")
    try:
        return COMMANDS[args.command](args)
    except _UsageError as exc:
        parser.error(str(exc))
    except (OSError, ValueError, RuntimeError) as exc:
        sys.stderr.write(f"cogsense: error: {exc}\n")
        return EXIT_RUNTIME
    return 0


if __name__ == "__main__":
    sys.exit(main())
