"""Convergence and timing sweeps from the command line.

    cfpc-bench --example ex1 --scheme cpl,fpl --alpha 0.5 --h-levels 1/10..1/320
    cfpc-bench --example ex1 --scheme cpq,fpq --alpha 0.5 --timing --k 0..12
    cfpc-bench --example ex4 --scheme fpq --alpha 0.5 --h 1/640 --tau 1/80000

Every cell (scheme, alpha, h[, tau]) becomes one CSV row.  Rates are taken
against the previous row of the same scheme and alpha when the relevant step
was halved.  For PDE rows ``roc_max`` is the rate of ``E^x_max`` under
``tau`` refinement and ``roc_l2`` the rate of ``E^t_max`` under ``h``
refinement.  Exit status: 0 success, 1 usage error, 2 solver failure.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence, TextIO

import numpy as np

from .errors import CFError, DomainError, UsageError
from .fast import solve_fpl, solve_fpq
from .pde import ErrorTracker, SpaceGrid, builtin_pde_problem, solve_pde
from .problem import TimeGrid, builtin_problem
from .stepper import solve_cpl, solve_cpq
from .verification import error_metrics, rate_of_convergence

__all__ = ["BenchRecord", "SweepConfig", "run_sweep", "fit_loglog_slope",
           "parse_fraction", "parse_ladder", "write_csv", "read_csv", "main"]

CSV_HEADER = ("example", "scheme", "alpha", "h", "tau", "e_max", "e_l2", "e_x_max",
              "e_t_max", "roc_max", "roc_l2", "cpu_seconds")
ODE_EXAMPLES = ("ex1", "ex2")
PDE_EXAMPLES = ("ex4", "ex5")
ODE_SOLVERS: dict[str, Callable] = {"cpl": solve_cpl, "cpq": solve_cpq,
                                    "fpl": solve_fpl, "fpq": solve_fpq}
COUPLINGS = ("none", "h=tau^2/3", "tau=h^3/2")
DEFAULT_MAX_K = 12
SLOPE_MIN_K = 2


@dataclass
class BenchRecord:
    """One cell of a sweep.  ``None`` marks a column that does not apply."""

    example: str
    scheme: str
    alpha: float
    h: float
    tau: Optional[float] = None
    e_max: Optional[float] = None
    e_l2: Optional[float] = None
    e_x_max: Optional[float] = None
    e_t_max: Optional[float] = None
    roc_max: Optional[float] = None
    roc_l2: Optional[float] = None
    cpu_seconds: float = math.nan

    @property
    def failed(self) -> bool:
        errs = (self.e_max, self.e_x_max)
        return all(e is None or math.isnan(e) for e in errs)


# ---------------------------------------------------------------------------
# number formats


def parse_fraction(text: str) -> Fraction:
    """``"1/320"`` or ``"0.25"`` as an exact positive fraction."""
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a number or fraction: {text!r}") from None
    if value <= 0:
        raise UsageError(f"step sizes must be positive, got {text!r}")
    return value


def parse_ladder(text: str) -> list[Fraction]:
    """``"1/10..1/320"`` as the halving ladder ``1/10, 1/20, ..., 1/320``."""
    if ".." not in text:
        return [parse_fraction(text)]
    lo, hi = (parse_fraction(p) for p in text.split("..", 1))
    if hi > lo:
        raise UsageError(f"ladder {text!r} must decrease")
    steps = [lo]
    while steps[-1] > hi:
        steps.append(steps[-1] / 2)
    if steps[-1] != hi:
        raise UsageError(f"{text!r} is not a halving ladder")
    return steps


def parse_int_range(text: str) -> list[int]:
    """``"2..12"`` -> ``[2, ..., 12]``; a single integer is a one-element range."""
    try:
        if ".." in text:
            lo, hi = (int(p) for p in text.split("..", 1))
        else:
            lo = hi = int(text)
    except ValueError:
        raise UsageError(f"not an integer range: {text!r}") from None
    if lo < 0 or hi < lo:
        raise UsageError(f"bad range {text!r}")
    return list(range(lo, hi + 1))


def _fmt(value: Optional[float], spec: str) -> str:
    if value is None:
        return ""
    return format(value, spec)


def _format_row(rec: BenchRecord) -> list[str]:
    return [rec.example, rec.scheme, _fmt(rec.alpha, ".17g"), _fmt(rec.h, ".17g"),
            _fmt(rec.tau, ".17g"), _fmt(rec.e_max, ".5e"), _fmt(rec.e_l2, ".5e"),
            _fmt(rec.e_x_max, ".5e"), _fmt(rec.e_t_max, ".5e"), _fmt(rec.roc_max, ".6g"),
            _fmt(rec.roc_l2, ".6g"), _fmt(rec.cpu_seconds, ".6g")]


def write_csv(records: Iterable[BenchRecord], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in records:
        writer.writerow(_format_row(rec))


def read_csv(stream: TextIO) -> list[BenchRecord]:
    reader = csv.reader(stream)
    header = tuple(next(reader))
    if header != CSV_HEADER:
        raise UsageError(f"unexpected CSV header {header}")
    out = []
    for row in reader:
        vals: list = row[:2] + [None if s == "" else float(s) for s in row[2:]]
        out.append(BenchRecord(*vals))
    return out


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class SweepConfig:
    example: str
    schemes: list[str]
    alphas: list[float]
    h_levels: list[Fraction] = field(default_factory=list)
    tau_levels: list[Fraction] = field(default_factory=list)
    couple: str = "none"
    timing: bool = False
    k_levels: list[int] = field(default_factory=list)
    max_k: int = DEFAULT_MAX_K
    seed_exact_startup: bool = False

    def __post_init__(self):
        ex = self.example
        if ex not in ODE_EXAMPLES + PDE_EXAMPLES:
            raise UsageError(f"unknown example {ex!r}")
        bad = [s for s in self.schemes if s not in ODE_SOLVERS]
        if bad or not self.schemes:
            raise UsageError(f"unknown scheme(s) {bad or self.schemes}")
        if not self.alphas or any(not 0.0 < a < 1.0 for a in self.alphas):
            raise UsageError("alpha values must lie in (0, 1)")
        if self.couple not in COUPLINGS:
            raise UsageError(f"--couple must be one of {COUPLINGS}")
        if self.is_pde:
            if any(s in ("cpl", "fpl") for s in self.schemes):
                raise UsageError("PDE examples run the quadratic schemes only (cpq, fpq)")
        elif self.tau_levels or self.couple != "none" or self.seed_exact_startup:
            raise UsageError("--tau, --couple and --seed-exact-startup apply to PDE examples")
        if self.timing:
            if not self.k_levels:
                raise UsageError("--timing needs --k")
            if self.h_levels:
                raise UsageError("--timing sets h from --k; drop --h/--h-levels")
        elif self.k_levels:
            raise UsageError("--k is only used with --timing")

    @property
    def is_pde(self) -> bool:
        return self.example in PDE_EXAMPLES

    def grid_cells(self) -> list[tuple[Fraction, Optional[Fraction]]]:
        """``(h, tau)`` pairs in sweep order."""
        if self.timing:
            hs = [Fraction(1, 10 * 2 ** k) for k in self.k_levels if k <= self.max_k]
            if not hs:
                raise UsageError(f"every k exceeds --max-k {self.max_k}")
        else:
            hs = list(self.h_levels)
        if not self.is_pde:
            if not hs:
                raise UsageError("give --h, --h-levels or --timing")
            return [(h, None) for h in hs]
        taus = list(self.tau_levels)
        if self.couple == "tau=h^3/2":
            if not hs or taus:
                raise UsageError("--couple tau=h^3/2 takes h levels and no tau")
            return [(h, Fraction(1, round(float(h) ** -1.5))) for h in hs]
        if self.couple == "h=tau^2/3":
            if not taus or hs:
                raise UsageError("--couple h=tau^2/3 takes tau levels and no h")
            return [(Fraction(1, max(3, round(float(t) ** (-2.0 / 3.0)))), t) for t in taus]
        if not hs or not taus:
            raise UsageError("PDE sweeps need both h and tau (or a --couple rule)")
        if len(hs) > 1 and len(taus) > 1:
            raise UsageError("vary either h or tau, not both (or use --couple)")
        return [(h, t) for h in hs for t in taus]


def _time_call(fn: Callable, timed: bool):
    if timed:
        fn()  # warm-up
    start = time.perf_counter()
    result = fn()
    return result, max(time.perf_counter() - start, 1e-9)


def _ode_cell(cfg: SweepConfig, scheme: str, alpha: float, h: Fraction) -> BenchRecord:
    problem = builtin_problem(cfg.example, alpha)
    grid = TimeGrid(1.0, round(1 / h))
    solver = ODE_SOLVERS[scheme]
    traj, secs = _time_call(lambda: solver(problem, grid), cfg.timing)
    rep = error_metrics(traj, problem.exact, alpha=alpha)
    return BenchRecord(cfg.example, scheme, alpha, float(h), None, rep.e_max, rep.e_l2,
                       cpu_seconds=secs)


def _pde_cell(cfg: SweepConfig, scheme: str, alpha: float, h: Fraction,
              tau: Fraction) -> BenchRecord:
    problem = builtin_pde_problem(cfg.example, alpha)
    space = SpaceGrid.from_spacing(float(tau))
    grid = TimeGrid(1.0, round(1 / h))
    tracker = ErrorTracker(problem.exact, space)

    def run():
        tracker.__init__(problem.exact, space)
        return solve_pde(problem, space, grid, scheme.upper(),
                         seed_exact_startup=cfg.seed_exact_startup, observer=tracker,
                         keep_levels=False)

    _, secs = _time_call(run, cfg.timing)
    return BenchRecord(cfg.example, scheme, alpha, float(h), space.tau,
                       e_x_max=tracker.e_x_max, e_t_max=tracker.e_t_max, cpu_seconds=secs)


def _fill_rates(rec: BenchRecord, prev: Optional[BenchRecord]) -> None:
    if prev is None or prev.failed or rec.failed:
        return

    def halved(a, b):
        return a is not None and b is not None and math.isclose(a / b, 2.0, rel_tol=1e-9)

    if rec.e_max is not None:
        if halved(prev.h, rec.h):
            rec.roc_max = rate_of_convergence(prev.e_max, rec.e_max, prev.h, rec.h)
            rec.roc_l2 = rate_of_convergence(prev.e_l2, rec.e_l2, prev.h, rec.h)
        return
    if prev.tau is not None and rec.tau is not None and prev.tau > rec.tau:
        rec.roc_max = rate_of_convergence(prev.e_x_max, rec.e_x_max, prev.tau, rec.tau)
    if prev.h > rec.h:
        rec.roc_l2 = rate_of_convergence(prev.e_t_max, rec.e_t_max, prev.h, rec.h)


def run_sweep(cfg: SweepConfig, on_record: Optional[Callable[[BenchRecord], None]] = None
              ) -> tuple[list[BenchRecord], Optional[CFError]]:
    """Run every cell; stop at the first solver failure.

    Returns the records (the failing cell last, with ``nan`` errors) and the
    failure, if any.
    """
    cells = cfg.grid_cells()
    records: list[BenchRecord] = []
    for scheme in cfg.schemes:
        for alpha in cfg.alphas:
            prev = None
            for h, tau in cells:
                try:
                    if cfg.is_pde:
                        rec = _pde_cell(cfg, scheme, alpha, h, tau)
                    else:
                        rec = _ode_cell(cfg, scheme, alpha, h)
                except (CFError, ArithmeticError) as exc:
                    nan = math.nan
                    rec = BenchRecord(cfg.example, scheme, alpha, float(h),
                                      None if tau is None else float(tau))
                    if cfg.is_pde:
                        rec.e_x_max = rec.e_t_max = nan
                    else:
                        rec.e_max = rec.e_l2 = nan
                    records.append(rec)
                    if on_record:
                        on_record(rec)
                    return records, exc if isinstance(exc, CFError) else CFError(str(exc))
                _fill_rates(rec, prev)
                prev = rec
                records.append(rec)
                if on_record:
                    on_record(rec)
    return records, None


def fit_loglog_slope(points: Sequence[tuple[float, float]]) -> float:
    """Least-squares slope of ``log(seconds)`` against ``log(N)``.

    Examples
    --------
    >>> round(fit_loglog_slope([(n, 3.0 * n ** 2) for n in (10, 20, 40, 80)]), 12)
    2.0
    """
    if len(points) < 4:
        raise DomainError("a slope fit needs at least 4 points")
    arr = np.asarray(points, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise DomainError("slope fit points must be positive")
    slope, _ = np.polyfit(np.log(arr[:, 0]), np.log(arr[:, 1]), 1)
    return float(slope)


def timing_summary(records: Sequence[BenchRecord], min_k: int = SLOPE_MIN_K
                   ) -> dict[tuple[str, float], tuple[list[tuple[float, float]], Optional[float]]]:
    """Per ``(scheme, alpha)``: the ``(log N, log seconds)`` pairs and the fitted slope."""
    out = {}
    groups: dict = {}
    for rec in records:
        if not rec.failed:
            groups.setdefault((rec.scheme, rec.alpha), []).append(rec)
    for key, recs in groups.items():
        pts = [(round(1 / r.h), r.cpu_seconds) for r in recs
               if round(1 / r.h) >= 10 * 2 ** min_k]
        logs = [(math.log(n), math.log(s)) for n, s in pts]
        slope = fit_loglog_slope(pts) if len(pts) >= 4 else None
        out[key] = (logs, slope)
    return out


# ---------------------------------------------------------------------------
# command line


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cfpc-bench", description="Caputo-Fabrizio predictor-corrector sweeps")
    p.add_argument("--example", required=True, choices=ODE_EXAMPLES + PDE_EXAMPLES)
    p.add_argument("--scheme", required=True, help="comma list of cpl,cpq,fpl,fpq")
    p.add_argument("--alpha", required=True, help="comma list of orders in (0, 1)")
    hg = p.add_mutually_exclusive_group()
    hg.add_argument("--h", help="time step, e.g. 1/320")
    hg.add_argument("--h-levels", help="halving ladder, e.g. 1/10..1/320")
    tg = p.add_mutually_exclusive_group()
    tg.add_argument("--tau", help="space step (PDE), e.g. 1/4000")
    tg.add_argument("--tau-levels", help="halving ladder for tau (PDE)")
    p.add_argument("--couple", default="none", choices=COUPLINGS)
    p.add_argument("--timing", action="store_true", help="time N = 10*2^k steps")
    p.add_argument("--k", help="k range for --timing, e.g. 0..12")
    p.add_argument("--max-k", type=int, default=DEFAULT_MAX_K)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("--seed-exact-startup", action="store_true",
                   help="PDE only: take levels 1-2 from the exact solution")
    return p


def parse_config(argv: Optional[Sequence[str]] = None) -> tuple[SweepConfig, Optional[str]]:
    args = build_parser().parse_args(argv)
    try:
        alphas = [float(a) for a in args.alpha.split(",")]
    except ValueError:
        raise UsageError(f"bad --alpha {args.alpha!r}") from None
    h_text = args.h or args.h_levels
    tau_text = args.tau or args.tau_levels
    cfg = SweepConfig(
        example=args.example,
        schemes=[s.strip().lower() for s in args.scheme.split(",") if s.strip()],
        alphas=alphas,
        h_levels=parse_ladder(h_text) if h_text else [],
        tau_levels=parse_ladder(tau_text) if tau_text else [],
        couple=args.couple,
        timing=args.timing,
        k_levels=parse_int_range(args.k) if args.k else [],
        max_k=args.max_k,
        seed_exact_startup=args.seed_exact_startup,
    )
    if args.h and ".." in args.h or args.tau and ".." in args.tau:
        raise UsageError("use --h-levels/--tau-levels for ladders")
    return cfg, args.out


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg, out_path = parse_config(argv)
        cfg.grid_cells()
    except UsageError as exc:
        print(f"cfpc-bench: usage error: {exc}", file=sys.stderr)
        return 1
    if cfg.timing and max(cfg.k_levels) > cfg.max_k:
        print(f"cfpc-bench: k capped at {cfg.max_k} (raise with --max-k)", file=sys.stderr)

    stream = open(out_path, "w", newline="") if out_path else sys.stdout
    try:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(CSV_HEADER)

        def emit(rec):
            writer.writerow(_format_row(rec))
            stream.flush()

        records, failure = run_sweep(cfg, emit)
    finally:
        if out_path:
            stream.close()

    if cfg.timing:
        for (scheme, alpha), (logs, slope) in timing_summary(records).items():
            for ln, ls in logs:
                print(f"# {scheme} alpha={alpha:g} logN={ln:.6f} logT={ls:.6f}")
            shown = "n/a" if slope is None else f"{slope:.4f}"
            print(f"# {scheme} alpha={alpha:g} slope={shown}")
    if failure is not None:
        print(f"cfpc-bench: solver failure: {failure}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
