"""Command-line front end: evaluate, simulate, optimize, and sweep.

All subcommands read a flat JSON config and emit CSV rows with the fixed
header below.  Output is deterministic for a given config and seed: the
same bytes come out however many worker threads are used.  Wall-clock
timings go to the elapsed_ms column only when --timing is passed, since
timing values are inherently not reproducible.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .channel import LinkParams, outage_vector
from .optimize import FoldContext, is_feasible, search
from .pdp import ArqAllocation, pdp_non_cooperative, pdp_semi_cumulative
from .simulate import CHANNEL_MODES, SCHEMES, SimConfig, estimate_pdp

CSV_HEADER = "N,q_sum,snr_db,scheme,method,allocation,pdp_analytic,pdp_sim,sim_stderr,list_size,elapsed_ms"

METHODS = ("exhaustive", "onefold", "multifold", "greedy")


# ---------------------------------------------------------------------------
# latency budget
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LatencyBudget:
    tau_total: float  # end-to-end deadline
    tau_p: float      # airtime of one packet attempt
    tau_d: float      # decode-and-feedback time per attempt


def budget(lb: LatencyBudget) -> int:
    """Total attempts that fit the deadline: floor(tau_total / (tau_p + tau_d))."""
    per_attempt = lb.tau_p + lb.tau_d
    if not (per_attempt > 0.0) or lb.tau_p < 0.0 or lb.tau_d < 0.0:
        raise ValueError(f"attempt time must be positive, got tau_p={lb.tau_p}, tau_d={lb.tau_d}")
    if lb.tau_total < per_attempt:
        raise ValueError(
            f"deadline {lb.tau_total} is shorter than one attempt ({per_attempt})")
    return int(math.floor(lb.tau_total / per_attempt))


# ---------------------------------------------------------------------------
# experiment configuration
# ---------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    hops: int
    los: list            # scalar broadcasts to every hop
    rate: float
    snr_db: object = None       # scalar, or one value per hop
    q_sum: int = None           # exclusive with the latency triple
    tau_total: float = None
    tau_p: float = None
    tau_d: float = None
    q: list = None              # explicit split, for pdp/simulate
    schemes: list = field(default_factory=lambda: ["semi_cumulative"])
    methods: list = field(default_factory=lambda: ["exhaustive"])
    trials: int = 0
    seed: int = 0
    channel_mode: str = "bernoulli"
    folds: int = None
    sweep_q_sum: list = None    # grid axes for the sweep subcommand
    sweep_snr_db: list = None

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        raw = dict(raw)
        if "scheme" in raw and "schemes" not in raw:
            raw["schemes"] = [raw.pop("scheme")]
        if "method" in raw and "methods" not in raw:
            raw["methods"] = [raw.pop("method")]
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**raw)

    @classmethod
    def from_json(cls, path: str) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _los_list(cfg) -> list:
    los = cfg.los
    if isinstance(los, (int, float)):
        return [float(los)] * cfg.hops
    return [float(v) for v in los]


def _snr_list(cfg, snr_db) -> list:
    if isinstance(snr_db, (int, float)):
        return [float(snr_db)] * cfg.hops
    return [float(v) for v in snr_db]


def _resolved_q_sum(cfg) -> int:
    if cfg.q_sum is not None:
        return int(cfg.q_sum)
    lb = LatencyBudget(tau_total=cfg.tau_total, tau_p=cfg.tau_p, tau_d=cfg.tau_d)
    return budget(lb)


def validate(cfg: ExperimentConfig):
    """Collect every constraint violation; empty list means valid."""
    problems = []
    if not isinstance(cfg.hops, int) or cfg.hops < 1:
        problems.append(f"hops must be a positive integer, got {cfg.hops!r}")
        return problems  # nothing below is meaningful without a hop count
    los = cfg.los if isinstance(cfg.los, list) else [cfg.los] * cfg.hops
    if len(los) != cfg.hops:
        problems.append(f"los has {len(los)} entries for {cfg.hops} hops")
    for i, c in enumerate(los):
        if not isinstance(c, (int, float)) or not (0.0 <= c < 1.0):
            problems.append(f"los[{i}] must lie in [0, 1), got {c!r}")
    if not isinstance(cfg.rate, (int, float)) or not cfg.rate > 0:
        problems.append(f"rate must be positive, got {cfg.rate!r}")
    has_latency = [cfg.tau_total, cfg.tau_p, cfg.tau_d]
    if cfg.q_sum is None and any(v is None for v in has_latency):
        problems.append("need q_sum or the full latency triple tau_total/tau_p/tau_d")
    if cfg.q_sum is not None and any(v is not None for v in has_latency):
        problems.append("q_sum and the latency triple are mutually exclusive")
    if cfg.q_sum is not None and (not isinstance(cfg.q_sum, int) or cfg.q_sum < 1):
        problems.append(f"q_sum must be a positive integer, got {cfg.q_sum!r}")
    if cfg.q_sum is None and not any(v is None for v in has_latency):
        try:
            budget(LatencyBudget(*has_latency))
        except ValueError as e:
            problems.append(str(e))
    if cfg.snr_db is None:
        problems.append("snr_db is required")
    elif isinstance(cfg.snr_db, list):
        if len(cfg.snr_db) != cfg.hops:
            problems.append(f"snr_db has {len(cfg.snr_db)} entries for {cfg.hops} hops")
    elif not isinstance(cfg.snr_db, (int, float)):
        problems.append(f"snr_db must be a number or list, got {cfg.snr_db!r}")
    for scheme in cfg.schemes:
        if scheme not in SCHEMES:
            problems.append(f"unknown scheme {scheme!r}")
    for method in cfg.methods:
        if method not in METHODS:
            problems.append(f"unknown method {method!r}")
        elif method != "exhaustive" and "non_cooperative" in cfg.schemes:
            problems.append(
                f"method {method!r} folds the borrowing objective; the "
                "non-cooperative scheme supports exhaustive search only")
    if cfg.channel_mode not in CHANNEL_MODES:
        problems.append(f"unknown channel_mode {cfg.channel_mode!r}")
    if not isinstance(cfg.trials, int) or cfg.trials < 0:
        problems.append(f"trials must be a nonnegative integer, got {cfg.trials!r}")
    if not isinstance(cfg.seed, int):
        problems.append(f"seed must be an integer, got {cfg.seed!r}")
    if cfg.q is not None and not problems:
        try:
            q_sum = _resolved_q_sum(cfg)
        except ValueError:
            q_sum = None
        if len(cfg.q) != cfg.hops:
            problems.append(f"q has {len(cfg.q)} entries for {cfg.hops} hops")
        elif not is_feasible(cfg.q, q_sum):
            problems.append(f"q={cfg.q} is not a feasible split of {q_sum}")
    for name in ("sweep_q_sum", "sweep_snr_db"):
        axis = getattr(cfg, name)
        if axis is not None and (not isinstance(axis, list) or not axis):
            problems.append(f"{name} must be a non-empty list")
    if cfg.sweep_q_sum is not None:
        for v in cfg.sweep_q_sum:
            if not isinstance(v, int) or v < 1:
                problems.append(f"sweep_q_sum entries must be positive integers, got {v!r}")
    return problems


# ---------------------------------------------------------------------------
# row assembly
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _fmt_snr(snr_db) -> str:
    if isinstance(snr_db, list):
        return "|".join(f"{float(v):.17g}" for v in snr_db)
    return f"{float(snr_db):.17g}"


def _row(n, q_sum, snr_db, scheme, method, q, pdp_analytic,
         pdp_sim=None, sim_stderr=None, list_size=None, elapsed_ms=None) -> str:
    return ",".join([
        str(n), str(q_sum), _fmt_snr(snr_db), scheme, method,
        "|".join(str(v) for v in q), _fmt(pdp_analytic), _fmt(pdp_sim),
        _fmt(sim_stderr), _fmt(list_size), _fmt(elapsed_ms),
    ])


def _links_for(cfg, snr_db) -> tuple:
    los = _los_list(cfg)
    snrs = _snr_list(cfg, snr_db)
    return tuple(LinkParams(los=c, snr_db=s, rate=float(cfg.rate))
                 for c, s in zip(los, snrs))


def _analytic(scheme, p, q) -> float:
    if scheme == "semi_cumulative":
        return pdp_semi_cumulative(p, q).total
    return pdp_non_cooperative(p, q)


def _evaluator(scheme):
    if scheme == "semi_cumulative":
        return None  # FoldContext default
    return lambda p, q: pdp_non_cooperative(p, q)


def _simulate_row_fields(cfg, links, q, scheme, threads):
    if cfg.trials <= 0:
        return None, None
    sim = SimConfig(q=ArqAllocation(q=tuple(q)), links=links, scheme=scheme,
                    trials=cfg.trials, seed=cfg.seed, channel_mode=cfg.channel_mode)
    res = estimate_pdp(sim, threads=threads)
    return res.pdp_hat, res.std_err


def _grid_point_rows(cfg, q_sum, snr_db, mode, threads, timing):
    """CSV rows for one (q_sum, snr_db) grid point, in scheme-major order."""
    links = _links_for(cfg, snr_db)
    p = outage_vector(links)
    rows = []
    for scheme in cfg.schemes:
        if mode in ("pdp", "simulate"):
            q = tuple(int(v) for v in cfg.q)
            started = time.perf_counter()
            analytic = _analytic(scheme, p, q)
            pdp_sim, stderr = (None, None)
            if mode == "simulate":
                pdp_sim, stderr = _simulate_row_fields(cfg, links, q, scheme, threads)
            elapsed = (time.perf_counter() - started) * 1e3 if timing else None
            rows.append(_row(cfg.hops, q_sum, snr_db, scheme, "", q, analytic,
                             pdp_sim, stderr, None, elapsed))
            continue
        for method in cfg.methods:
            started = time.perf_counter()
            ctx = FoldContext(p=p, q_sum=q_sum, evaluator=_evaluator(scheme))
            result = search(ctx, method, folds=cfg.folds)
            q = tuple(result.allocation)
            pdp_sim, stderr = _simulate_row_fields(cfg, links, q, scheme, threads)
            elapsed = (time.perf_counter() - started) * 1e3 if timing else None
            rows.append(_row(cfg.hops, q_sum, snr_db, scheme, method, q,
                             result.pdp, pdp_sim, stderr, result.candidates, elapsed))
    return rows


def run_sweep(cfg: ExperimentConfig, mode: str = "optimize", threads: int = 1,
              timing: bool = False) -> list:
    """All CSV rows (header excluded) for the config's grid, in grid order.

    Grid points are independent and may be evaluated by a thread pool;
    rows are assembled in deterministic (q_sum, snr_db, scheme, method)
    order regardless.
    """
    problems = validate(cfg)
    if problems:
        raise ValueError("; ".join(problems))
    q_axis = cfg.sweep_q_sum if (mode == "sweep" and cfg.sweep_q_sum) else [_resolved_q_sum(cfg)]
    snr_axis = cfg.sweep_snr_db if (mode == "sweep" and cfg.sweep_snr_db) else [cfg.snr_db]
    grid = [(qs, snr) for qs in q_axis for snr in snr_axis]
    if threads > 1 and len(grid) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(
                lambda pt: _grid_point_rows(cfg, pt[0], pt[1], mode, 1, timing), grid))
    else:
        blocks = [_grid_point_rows(cfg, qs, snr, mode, threads, timing)
                  for qs, snr in grid]
    return [row for block in blocks for row in block]


# ---------------------------------------------------------------------------
# entry points
# ---------------------------------------------------------------------------

def _emit(lines, output):
    text = "\n".join([CSV_HEADER] + lines) + "\n"
    if output:
        with open(output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_json(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def _csv_command(args, mode: str) -> int:
    cfg = _load_config(args)
    if mode in ("pdp", "simulate") and cfg.q is None:
        sys.stderr.write("config must provide q for this subcommand\n")
        return 2
    if mode == "simulate" and cfg.trials < 1:
        sys.stderr.write("config must set trials >= 1 for simulate\n")
        return 2
    try:
        rows = run_sweep(cfg, mode=mode, threads=args.threads, timing=args.timing)
    except ValueError as e:
        sys.stderr.write(f"invalid config: {e}\n")
        return 2
    _emit(rows, args.output)
    return 0


def _budget_command(args) -> int:
    if args.config:
        cfg = ExperimentConfig.from_json(args.config)
        lb = LatencyBudget(tau_total=cfg.tau_total, tau_p=cfg.tau_p, tau_d=cfg.tau_d)
    else:
        if None in (args.tau_total, args.tau_p, args.tau_d):
            sys.stderr.write("budget needs --config or all of --tau-total/--tau-p/--tau-d\n")
            return 2
        lb = LatencyBudget(tau_total=args.tau_total, tau_p=args.tau_p, tau_d=args.tau_d)
    try:
        sys.stdout.write(f"{budget(lb)}\n")
    except ValueError as e:
        sys.stderr.write(f"{e}\n")
        return 2
    return 0


def _validate_command(args) -> int:
    cfg = ExperimentConfig.from_json(args.config)
    problems = validate(cfg)
    if problems:
        for msg in problems:
            sys.stdout.write(f"problem: {msg}\n")
        return 1
    q_sum = _resolved_q_sum(cfg)
    links = _links_for(cfg, cfg.snr_db)
    p = outage_vector(links)
    sys.stdout.write("config ok\n")
    sys.stdout.write(f"hops: {cfg.hops}\n")
    sys.stdout.write(f"q_sum: {q_sum}\n")
    sys.stdout.write(f"los: {_los_list(cfg)}\n")
    sys.stdout.write(f"snr_db: {_snr_list(cfg, cfg.snr_db)}\n")
    sys.stdout.write(f"rate: {float(cfg.rate)}\n")
    sys.stdout.write("outage: " + " ".join(f"{v:.17g}" for v in p) + "\n")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="arqshare",
        description="drop-probability analysis and ARQ budget planning for "
                    "multi-hop relay chains with attempt borrowing")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="override the config seed (default: config value or 0)")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                        help="worker threads; results do not depend on this")
    common.add_argument("--output", default=None, help="write CSV here instead of stdout")
    common.add_argument("--timing", action="store_true",
                        help="fill the elapsed_ms column (breaks byte-for-byte "
                             "reproducibility of the output)")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, helptext in [
        ("pdp", "closed-form drop probability of the configured split"),
        ("simulate", "Monte Carlo estimate for the configured split"),
        ("optimize", "best split of the budget per scheme and method"),
        ("sweep", "optimize over the configured q_sum and snr_db grids"),
    ]:
        cmd = sub.add_parser(name, help=helptext, parents=[common])
        cmd.add_argument("--config", required=True, help="path to a JSON config")

    cmd = sub.add_parser("budget", help="attempts that fit a latency budget")
    cmd.add_argument("--config", default=None)
    cmd.add_argument("--tau-total", type=float, default=None, dest="tau_total")
    cmd.add_argument("--tau-p", type=float, default=None, dest="tau_p")
    cmd.add_argument("--tau-d", type=float, default=None, dest="tau_d")

    cmd = sub.add_parser("validate", help="check a config and echo derived values")
    cmd.add_argument("--config", required=True)

    args = parser.parse_args(argv)
    if args.command == "budget":
        return _budget_command(args)
    if args.command == "validate":
        return _validate_command(args)
    return _csv_command(args, args.command)


if __name__ == "__main__":
    sys.exit(main())
