"""Command-line front end: sweeps, CSV output and figure presets.

Commands and their CSV columns:

    bounds         one row per (sweep point, scheme) for a seeded channel draw
    ergodic        Monte Carlo expectations next to the high-SNR closed forms
    compare        closed-form per-link rates and error probabilities, ST vs TD
    exchange       smallest ST blocklength (or DoF) meeting an error target
    wishart-check  Monte Carlo E[tr(U^-2)] against the closed form
    figure         stacked tables of a figure preset plus a gnuplot script

SNR is given in dB on the command line and converted to linear power once,
while the flags are parsed. Exit status: 0 on success, 2 for invalid usage,
3 when every sweep point is infeasible, 4 on I/O errors.
"""

from __future__ import annotations

import argparse
import math
import shlex
import sys
from dataclasses import dataclass, fields, replace

import numpy as np

from . import __version__
from .bounds import (
    KappaPolicy, achievability_asymptotic, achievability_finite, converse_finite,
    normal_approx_rate, scheme_be_constant,
)
from .channel import OperatingPoint, SystemConfig, db_to_linear, linear_to_db, sample_channel, sample_eigenvalues
from .compare import (
    LN10, Unsatisfiable, log_error_probability, margin, normalized_rate,
    per_draw_error_probability, solve_exchange,
)
from .ergodic import (
    McEstimate, ergodic_report, high_snr_rate, per_draw_rates, wishart_inverse_trace, wishart_inverse_trace_mc,
)
from .figures import FIGURES, emit_plot_script
from .infodensity import Scheme, scheme_stats
from .parallel import worker_map
from .rng import RngState
from .table import CsvTable

EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4

COMMANDS = ("bounds", "ergodic", "compare", "exchange", "wishart-check", "figure")
INTEGER_VARS = {"n", "tx", "rx", "m"}
SWEEP_VARS = INTEGER_VARS | {"epsilon", "snr", "snr_db", "per_link_rate"}


class UsageError(ValueError):
    pass


class Infeasible(RuntimeError):
    pass


# -- sweep axis -----------------------------------------------------------------------

@dataclass(frozen=True)
class Sweep:
    variable: str
    start: float
    stop: float
    points: int
    scale: str = "linear"

    @classmethod
    def parse(cls, text: str) -> "Sweep":
        parts = text.split(":")
        if len(parts) not in (4, 5):
            raise UsageError(f"sweep must be var:start:stop:points[:scale], got {text!r}")
        var = parts[0].replace("-", "_")
        if var not in SWEEP_VARS:
            raise UsageError(f"unknown sweep variable {parts[0]!r}; choose from {sorted(SWEEP_VARS)}")
        try:
            start, stop, points = float(parts[1]), float(parts[2]), int(parts[3])
        except ValueError as exc:
            raise UsageError(f"bad sweep numbers in {text!r}") from exc
        scale = parts[4] if len(parts) == 5 else "linear"
        if scale not in ("linear", "log", "dB"):
            raise UsageError("sweep scale must be linear, log or dB")
        if not start < stop:
            raise UsageError("sweep needs start < stop")
        if points < 2:
            raise UsageError("sweep needs at least 2 points")
        if scale == "log" and start <= 0:
            raise UsageError("log sweep needs a positive start")
        return cls(var, start, stop, points, scale)

    def values(self) -> list:
        """Axis values; for the dB scale, endpoints are dB and values are linear."""
        if self.scale == "log":
            v = np.geomspace(self.start, self.stop, self.points)
        else:
            v = np.linspace(self.start, self.stop, self.points)
            if self.scale == "dB":
                v = 10.0 ** (v / 10.0)
        if self.variable in INTEGER_VARS:
            out = []
            for x in np.rint(v).astype(int).tolist():
                if x not in out:
                    out.append(x)
            return out
        return [float(x) for x in v]

    def __str__(self):
        return f"{self.variable}:{self.start!r}:{self.stop!r}:{self.points}:{self.scale}"


# -- run specification -------------------------------------------------------------------

@dataclass(frozen=True)
class RunSpec:
    command: str
    tx: int = 4
    rx: int = 4
    snr_db: float = 10.0
    snr: float = 10.0  # linear, derived from snr_db at parse time
    ratio: int | None = None
    blocklength: int = 100
    epsilon: float = 1e-7
    per_link_rate: float = 2.0
    sweep: Sweep | None = None
    trials: int = 10_000
    seed: int = 0
    delta: float = 1.0
    kappa_policy: KappaPolicy = KappaPolicy()
    scheme: str = "both"
    rate_normalization: str = "none"
    overlay_mc: bool = False
    solve_for: str = "n"
    match_td: int | None = None
    figure_id: str | None = None
    out: str | None = None

    def meta(self, prefix: str = "") -> list:
        skip = {"out"} if self.command != "figure" else set()
        pairs = []
        for f in fields(self):
            if f.name in skip:
                continue
            value = getattr(self, f.name)
            if value is None:
                value = ""
            elif isinstance(value, (Sweep, KappaPolicy)):
                value = str(value)
            pairs.append((prefix + f.name, value))
        return pairs

    def points(self):
        """(cfg, n, epsilon, per_link_rate) at each sweep point, in order."""
        values = self.sweep.values() if self.sweep else [None]
        out = []
        for v in values:
            state = {"tx": self.tx, "rx": self.rx, "snr": self.snr, "n": self.blocklength,
                     "epsilon": self.epsilon, "per_link_rate": self.per_link_rate}
            if v is not None:
                var = self.sweep.variable
                if var == "m":
                    state["tx"] = state["rx"] = v
                elif var == "snr_db":
                    state["snr"] = db_to_linear(v)
                else:
                    state[var] = v
            if self.ratio is not None:
                state["tx"] = self.ratio * state["rx"]
            try:
                cfg = SystemConfig(int(state["tx"]), int(state["rx"]), float(state["snr"]))
            except ValueError as exc:
                raise UsageError(str(exc)) from exc
            out.append((cfg, int(state["n"]), float(state["epsilon"]), float(state["per_link_rate"])))
        return out

    def schemes(self):
        return [Scheme.ST, Scheme.TD] if self.scheme == "both" else [Scheme.parse(self.scheme)]


# -- commands -------------------------------------------------------------------------------

BOUNDS_COLUMNS = [
    "tx", "rx", "m", "snr (linear)", "n (uses)", "epsilon (prob)", "scheme",
    "capacity (bits/use)", "dispersion (bits^2/use)", "third_abs_moment (bits^3/use)",
    "be_constant (1)", "rate_scale (bits/use)",
    "normal_approx ({u})", "achievability_asymptotic ({u})", "achievability_finite ({u})",
    "converse_finite ({u})", "achievability_feasible (bool)", "converse_feasible (bool)",
]


def _bounds_stats(job):
    cfg, seed = job
    ch = sample_channel(cfg, RngState(seed))
    return {s: scheme_stats(ch, cfg, s) for s in (Scheme.ST, Scheme.TD)}


def run_bounds(spec: RunSpec, mapper) -> CsvTable:
    unit = "rate/C" if spec.rate_normalization == "capacity" else "bits/use"
    table = CsvTable([c.format(u=unit) for c in BOUNDS_COLUMNS])
    points = spec.points()
    configs = list(dict.fromkeys(p[0] for p in points))
    stats = dict(zip(configs, mapper(_bounds_stats, [(c, spec.seed) for c in configs])))
    any_feasible = False
    for cfg, n, eps, _ in points:
        op = _operating_point(n, eps)
        for scheme in spec.schemes():
            st = stats[cfg][scheme]
            scale = st.capacity if spec.rate_normalization == "capacity" else 1.0
            na = normal_approx_rate(st, op)
            asym = achievability_asymptotic(st, op)
            ach = achievability_finite(st, op, spec.kappa_policy)
            conv = converse_finite(st, op, spec.delta)
            any_feasible |= ach.feasible or conv.feasible
            table.rows.append([
                cfg.tx, cfg.rx, cfg.m, cfg.snr, n, eps, scheme.value,
                st.capacity, st.dispersion, st.third_abs_moment, scheme_be_constant(st), scale,
                na.rate / scale, asym.rate / scale, ach.rate / scale, conv.rate / scale,
                ach.feasible, conv.feasible,
            ])
    if not any_feasible:
        raise Infeasible("no sweep point has a feasible finite-n bound "
                         "(need eps + (B + delta)/sqrt(n) < 1 or eps - 2B/sqrt(n) > 0)")
    return table


ERGODIC_COLUMNS = [
    "tx", "rx", "m", "ratio (L/N)", "snr_db (dB)", "snr (linear)", "n (uses)", "epsilon (prob)",
    "trials",
    "e_capacity (bits/use)", "e_capacity_se (bits/use)", "hs_capacity (bits/use)",
    "e_dispersion_st (bits^2/use)", "e_dispersion_st_se (bits^2/use)", "hs_dispersion_st (bits^2/use)",
    "var_dispersion_st (bits^4/use^2)", "var_dispersion_st_se (bits^4/use^2)",
    "e_sqrt_dispersion_td (bits/use)", "e_sqrt_dispersion_td_se (bits/use)",
    "hs_sqrt_dispersion_td (bits/use)", "wishart_sqrt_dispersion_td (bits/use)",
    "e_dispersion_td (bits^2/use)", "e_dispersion_td_se (bits^2/use)", "hs_dispersion_td (bits^2/use)",
    "rate_st_mc (bits/use/link)", "rate_st_mc_se (bits/use/link)", "rate_st_hs (bits/use/link)",
    "rate_td_mc (bits/use/link)", "rate_td_mc_se (bits/use/link)", "rate_td_hs (bits/use/link)",
]


def run_ergodic(spec: RunSpec, mapper) -> CsvTable:
    table = CsvTable(list(ERGODIC_COLUMNS))
    cache = {}
    for cfg, n, eps, _ in spec.points():
        key = (cfg.tx, cfg.rx)
        if key not in cache:
            cache[key] = sample_eigenvalues(cfg.tx, cfg.rx, spec.trials, spec.seed, mapper)
        eigs = cache[key]
        op = _operating_point(n, eps)
        rep = ergodic_report(cfg, spec.trials, spec.seed, eigs=eigs)
        m = cfg.m
        rates = {}
        for s in (Scheme.ST, Scheme.TD):
            est = McEstimate.of(per_draw_rates(eigs, cfg, op, s) / m, spec.seed)
            rates[s] = (est.mean, est.std_error, high_snr_rate(cfg, op, s) / m)
        table.rows.append([
            cfg.tx, cfg.rx, m, cfg.tx / cfg.rx, linear_to_db(cfg.snr), cfg.snr, n, eps, spec.trials,
            rep.e_capacity.mean, rep.e_capacity.std_error, rep.high_snr_capacity,
            rep.e_dispersion_st.mean, rep.e_dispersion_st.std_error, rep.high_snr_dispersion_st,
            rep.var_dispersion_st.mean, rep.var_dispersion_st.std_error,
            rep.e_sqrt_dispersion_td.mean, rep.e_sqrt_dispersion_td.std_error,
            rep.high_snr_sqrt_dispersion_td, rep.wishart_sqrt_dispersion_td,
            rep.e_dispersion_td.mean, rep.e_dispersion_td.std_error, rep.high_snr_sqrt_dispersion_td ** 2,
            *rates[Scheme.ST], *rates[Scheme.TD],
        ])
    return table


COMPARE_COLUMNS = [
    "tx", "rx", "m", "snr (linear)", "n (uses)", "epsilon (prob)", "per_link_rate (bits/use/link)",
    "shannon (bits/use/link)", "rate_st_per_link (bits/use/link)", "rate_td_per_link (bits/use/link)",
    "delta (bits/use)", "eps_st (prob)", "eps_td (prob)", "log10_eps_st (1)", "log10_eps_td (1)",
    "above_capacity (bool)",
]
MC_COLUMNS = ["mc_eps_st (prob)", "mc_eps_st_se (prob)", "mc_eps_td (prob)", "mc_eps_td_se (prob)"]


def run_compare(spec: RunSpec, mapper) -> CsvTable:
    table = CsvTable(COMPARE_COLUMNS + (MC_COLUMNS if spec.overlay_mc else []))
    cache = {}
    any_feasible = False
    for cfg, n, eps, r in spec.points():
        op = _operating_point(n, eps)
        if r < 0:
            raise UsageError("per-link rate must be nonnegative")
        lst = log_error_probability(cfg, n, r, Scheme.ST)
        ltd = log_error_probability(cfg, n, r, Scheme.TD)
        delta = margin(cfg, r)
        any_feasible |= delta > 0
        row = [
            cfg.tx, cfg.rx, cfg.m, cfg.snr, n, eps, r, math.log2(1.0 + cfg.snr),
            normalized_rate(cfg, op, Scheme.ST), normalized_rate(cfg, op, Scheme.TD),
            delta, math.exp(lst), math.exp(ltd), lst / LN10, ltd / LN10, delta <= 0,
        ]
        if spec.overlay_mc:
            key = (cfg.tx, cfg.rx)
            if key not in cache:
                cache[key] = sample_eigenvalues(cfg.tx, cfg.rx, spec.trials, spec.seed, mapper)
            for s in (Scheme.ST, Scheme.TD):
                est = McEstimate.of(per_draw_error_probability(cache[key], cfg, n, r, s), spec.seed)
                row += [est.mean, est.std_error]
        table.rows.append(row)
    if not any_feasible:
        raise Infeasible("per-link rate is at or above log2(1+rho) at every sweep point")
    return table


EXCHANGE_COLUMNS = [
    "tx", "rx", "m", "snr (linear)", "per_link_rate (bits/use/link)", "target_epsilon (prob)",
    "solve_for", "fixed_other", "value", "achieved_epsilon (prob)", "log10_achieved_epsilon (1)",
    "satisfiable (bool)",
]


def run_exchange(spec: RunSpec, mapper) -> CsvTable:
    table = CsvTable(list(EXCHANGE_COLUMNS))
    any_ok = False
    for cfg, n, eps, r in spec.points():
        if spec.match_td is not None:
            log_target = log_error_probability(cfg, spec.match_td, r, Scheme.TD)
        else:
            if not 0.0 < eps < 1.0:
                raise UsageError("target error must lie in (0, 1)")
            log_target = math.log(eps)
        fixed = cfg.m if spec.solve_for == "n" else n
        try:
            sol = solve_exchange(cfg, r, None, spec.solve_for, fixed, log_target=log_target)
            row = [sol.value, sol.achieved_eps, sol.log_achieved_eps / LN10, True]
            any_ok = True
        except Unsatisfiable:
            row = [0, math.nan, math.nan, False]
        table.rows.append([cfg.tx, cfg.rx, cfg.m, cfg.snr, r, math.exp(log_target),
                           spec.solve_for, fixed] + row)
    if not any_ok:
        raise Infeasible("no sweep point is satisfiable: per-link rate is not below log2(1+rho)")
    return table


WISHART_COLUMNS = [
    "tx", "rx", "trials", "closed_form (1)", "mc_mean (1)", "mc_se (1)", "z_score (1)", "divergent (bool)",
]


def run_wishart(spec: RunSpec, mapper) -> CsvTable:
    table = CsvTable(list(WISHART_COLUMNS))
    any_finite = False
    for cfg, *_ in spec.points():
        exact = wishart_inverse_trace(cfg.tx, cfg.rx)
        if math.isinf(exact):
            table.rows.append([cfg.tx, cfg.rx, spec.trials, exact, math.nan, math.nan, math.nan, True])
            print(f"E[tr(U^-2)] diverges for L={cfg.tx}, N={cfg.rx} (|L-N| <= 1)", file=sys.stderr)
            continue
        any_finite = True
        est = wishart_inverse_trace_mc(cfg.tx, cfg.rx, spec.trials, spec.seed, mapper)
        table.rows.append([cfg.tx, cfg.rx, spec.trials, exact, est.mean, est.std_error,
                           (est.mean - exact) / est.std_error, False])
    if not any_finite:
        raise Infeasible("the inverse Wishart moment diverges at every sweep point")
    return table


RUNNERS = {
    "bounds": run_bounds,
    "ergodic": run_ergodic,
    "compare": run_compare,
    "exchange": run_exchange,
    "wishart-check": run_wishart,
}


def _operating_point(n, eps) -> OperatingPoint:
    try:
        return OperatingPoint(n, eps)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def run_figure(spec: RunSpec, mapper) -> CsvTable:
    """Stack the tables of every run in the preset; figure-level seed and trials win."""
    preset = FIGURES[spec.figure_id]
    table = None
    meta = []
    for i, line in enumerate(preset["runs"]):
        sub = spec_from_args(shlex.split(line), {})
        overrides = {"seed": spec.seed}
        if spec.trials_given:
            overrides["trials"] = spec.trials
        sub = replace(sub, **overrides)
        part = RUNNERS[sub.command](sub, mapper)
        meta += [(f"run{i}.argv", line)] + sub.meta(f"run{i}.")
        if table is None:
            table = part
        else:
            table.extend(part)
    table.meta = meta
    return table


def run(spec: RunSpec, workers: int = 1) -> CsvTable:
    """Evaluate ``spec`` and return its table with the metadata preamble attached."""
    with worker_map(workers) as mapper:
        if spec.command == "figure":
            table = run_figure(spec, mapper)
            table.meta = [("version", __version__), ("command", "figure"), ("figure_id", spec.figure_id),
                          ("seed", spec.seed), ("trials", spec.trials if spec.trials_given else "")] + table.meta
        else:
            table = RUNNERS[spec.command](spec, mapper)
            table.meta = [("version", __version__)] + spec.meta()
    return table


# -- argument parsing ---------------------------------------------------------------------

def _flag_parser(command: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog=f"fblmimo {command}", argument_default=argparse.SUPPRESS)
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--tx", type=int, help="transmit antennas L")
    p.add_argument("--rx", type=int, help="receive antennas N")
    p.add_argument("--snr-db", type=float, help="SNR rho in dB")
    p.add_argument("--ratio", type=int, help="set L = ratio * N")
    p.add_argument("--blocklength", type=int, help="channel uses n")
    p.add_argument("--epsilon", type=float, help="target error probability")
    p.add_argument("--per-link-rate", type=float, help="bits/use/link")
    p.add_argument("--sweep", help="var:start:stop:points[:linear|log|dB]")
    p.add_argument("--trials", type=int, help="Monte Carlo trials")
    p.add_argument("--seed", type=int, help="root seed (default 0)")
    p.add_argument("--workers", type=int, help="worker processes (does not change results)")
    p.add_argument("--delta", type=float, help="converse slack Delta > 0")
    p.add_argument("--kappa-policy", help="tau or custom:<K1>")
    p.add_argument("--out", help="output CSV path (default: stdout)")
    p.add_argument("--scheme", choices=["st", "td", "both", "ST", "TD"], help="bounds schemes")
    p.add_argument("--rate-normalization", choices=["none", "capacity"], help="divide bound rates by C")
    p.add_argument("--overlay-mc", action="store_true", help="compare: add per-draw MC error averages")
    p.add_argument("--solve-for", choices=["n", "m"], help="exchange: unknown to solve for")
    p.add_argument("--match-td", type=int, help="exchange: target = TD error at this blocklength")
    if command == "figure":
        p.add_argument("--id", dest="figure_id", choices=sorted(FIGURES), required=True)
    return p


def read_config(path: str) -> dict:
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    for num, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{num}: expected key = value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


_CONVERTERS = {
    "tx": int, "rx": int, "snr_db": float, "ratio": int, "blocklength": int, "epsilon": float,
    "per_link_rate": float, "trials": int, "seed": int, "workers": int, "delta": float,
    "overlay_mc": lambda v: str(v).lower() in ("1", "true", "yes", "on"),
}
_PASSTHROUGH = {"sweep", "kappa_policy", "out", "scheme", "rate_normalization", "solve_for",
                "match_td", "figure_id"}


@dataclass(frozen=True)
class ParsedRun(RunSpec):
    workers: int = 1
    trials_given: bool = False

    def meta(self, prefix: str = "") -> list:
        return [(k, v) for k, v in super().meta(prefix)
                if k not in (prefix + "workers", prefix + "trials_given")]


def spec_from_args(argv, config_defaults=None) -> ParsedRun:
    if not argv or argv[0] not in COMMANDS:
        raise UsageError(f"first argument must be a command: {', '.join(COMMANDS)}")
    command = argv[0]
    ns = vars(_flag_parser(command).parse_args(argv[1:]))
    merged = {}
    if "config" in ns:
        merged.update(read_config(ns.pop("config")))
    elif config_defaults:
        merged.update(config_defaults)
    merged.update(ns)
    unknown = set(merged) - set(_CONVERTERS) - _PASSTHROUGH
    if unknown:
        raise UsageError(f"unknown setting(s): {', '.join(sorted(unknown))}")
    values = {}
    try:
        for key, value in merged.items():
            if key in _CONVERTERS:
                values[key] = _CONVERTERS[key](value)
            elif key == "match_td":
                values[key] = int(value)
            else:
                values[key] = value
    except ValueError as exc:
        raise UsageError(f"bad value: {exc}") from exc
    if "sweep" in values:
        values["sweep"] = Sweep.parse(values["sweep"])
    try:
        values["kappa_policy"] = KappaPolicy.parse(values.get("kappa_policy", "tau"))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if "scheme" in values:
        values["scheme"] = values["scheme"].lower() if values["scheme"] == "both" else values["scheme"].upper()
    if values.get("rate_normalization", "none") not in ("none", "capacity"):
        raise UsageError("rate normalization must be none or capacity")
    if values.get("solve_for", "n") not in ("n", "m"):
        raise UsageError("solve-for must be n or m")
    if values.get("delta", 1.0) <= 0:
        raise UsageError("delta must be positive")
    if values.get("trials", 10_000) < 1 or values.get("workers", 1) < 1:
        raise UsageError("trials and workers must be >= 1")
    if values.get("seed", 0) < 0:
        raise UsageError("seed must be nonnegative")
    if "snr_db" in values:
        values["snr"] = db_to_linear(values["snr_db"])
    values["trials_given"] = "trials" in values
    return ParsedRun(command=command, **values)


def _summary(spec: RunSpec, table: CsvTable) -> str:
    return f"{spec.command}: wrote {len(table.rows)} rows to {spec.out}"


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help"):
        print(__doc__.strip())
        return 0 if argv else EXIT_USAGE
    try:
        spec = spec_from_args(argv)
        table = run(spec, spec.workers)
    except SystemExit as exc:  # argparse already printed usage
        return EXIT_USAGE if exc.code else 0
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:  # UsageError and invalid domain inputs
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if spec.out:
            table.write(spec.out)
            if spec.command == "figure":
                script_path = _script_path(spec.out)
                with open(script_path, "w", encoding="utf-8") as fh:
                    fh.write(emit_plot_script(table, spec.figure_id, spec.out))
            print(_summary(spec, table))
        else:
            sys.stdout.write(table.to_text())
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


def _script_path(out: str) -> str:
    stem = out[:-4] if out.endswith(".csv") else out
    return stem + ".gp"


if __name__ == "__main__":
    sys.exit(main())
