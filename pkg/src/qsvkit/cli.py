"""Command-line surface: analyze strategies, emit figure tables, run trials.

Three subcommands share one configuration record. ``analyze`` reads a graph
file or a strategy JSON file and reports the governing eigenvalue scalars
and sample counts; ``curves`` writes the desk-scale data tables behind the
two comparison figures; ``simulate`` runs the sampled protocol. Reports go
to stdout unless --out names a file.

All numeric output is serialized with 10 significant digits and a trailing
newline, independent of locale. Infinite quantities appear as the string
"unbounded" in JSON and as "inf" in CSV. Exit codes: 0 on success, 2 on
input or validation problems, 3 when the two-copy pass-bound hypotheses
fail (the report is still written in that case).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from .ghz import GhzSpec, n_de_k
from .graph_strategy import omega_graph, verify_graph_optimality
from .graphs import graph_state, load_graph
from .montecarlo import TrialConfig, fidelity_experiment, simulate_protocol
from .qcore import Ket, orthonormal_complement
from .strategy import (
    TwoCopyAnalysis,
    UNBOUNDED,
    insurance_ceiling,
    lambda2,
    single_copy_complexity,
    strategy_from_json,
    two_copy_analysis,
    two_copy_complexity,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PRECONDITION = 3

FIG3_COLUMNS = ["epsilon", "N_graph", "N_PLM", "N_glob"]
FIG4_COLUMNS = ["theta", "N_de_1", "N_de_2", "N_de_3", "N_de_4", "N_glob"]
FIG4_NOTE = (
    "comparison curves for the two locally-measured protocols are omitted; "
    "their sample-count formulas are out of scope for this tool"
)


# =====================================================================
# Configuration
# =====================================================================


@dataclass
class RunConfig:
    """Validated flag set for one command invocation."""

    command: str
    epsilon: float | None = 1e-3
    delta: float = 1e-3
    k: int = 1
    theta_grid: tuple[float, float, int] | None = None
    graph_path: str | None = None
    strategy_path: str | None = None
    figure: str | None = None
    out_path: str | None = None
    format: str = "json"
    seed: int = 0
    trials: int = 100000

    def __post_init__(self) -> None:
        if self.command not in ("analyze", "curves", "simulate"):
            raise ValueError(f"unknown command {self.command!r}")
        if self.epsilon is not None and not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon = {self.epsilon} outside (0, 1)")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta = {self.delta} outside (0, 1)")
        if self.k < 1:
            raise ValueError(f"k must be at least 1: {self.k}")
        if self.theta_grid is not None:
            start, stop, steps = self.theta_grid
            if steps < 2:
                raise ValueError(f"theta grid needs at least 2 steps: {steps}")
            if not 0.0 < start <= stop <= math.pi / 4.0:
                raise ValueError(
                    f"theta grid [{start}, {stop}] outside the open-to-closed (0, pi/4]"
                )
        if self.format not in ("csv", "json"):
            raise ValueError(f"format must be csv or json: {self.format!r}")
        if self.figure is not None and self.figure not in ("fig3", "fig4"):
            raise ValueError(f"figure must be fig3 or fig4: {self.figure!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed {self.seed} outside the 64-bit range")
        if self.trials < 1:
            raise ValueError(f"trials must be positive: {self.trials}")


def parse_theta_grid(text: str) -> tuple[float, float, int]:
    """Parse 'A:B:N' into (start, stop, steps)."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"theta grid must be 'A:B:N', got {text!r}")
    try:
        return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ValueError(f"theta grid must be 'A:B:N' with numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsvkit",
        description="Analyze and simulate quantum state-verification strategies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="eigenvalue scalars and sample counts")
    analyze.add_argument("--graph", dest="graph_path", metavar="FILE")
    analyze.add_argument("--strategy", dest="strategy_path", metavar="FILE")
    analyze.add_argument("--epsilon", type=float, default=1e-3, metavar="R")
    analyze.add_argument("--delta", type=float, default=1e-3, metavar="R")
    analyze.add_argument("--k", type=int, default=1, metavar="N")
    _add_output_flags(analyze, "json")

    curves = sub.add_parser("curves", help="figure data tables")
    curves.add_argument("--figure", choices=["fig3", "fig4"], required=True)
    curves.add_argument("--epsilon", type=float, default=1e-3, metavar="R")
    curves.add_argument("--delta", type=float, default=1e-3, metavar="R")
    curves.add_argument("--theta-grid", dest="theta_grid", metavar="A:B:N")
    _add_output_flags(curves, "csv")

    simulate = sub.add_parser("simulate", help="sampled protocol runs")
    simulate.add_argument("--graph", dest="graph_path", metavar="FILE")
    simulate.add_argument("--strategy", dest="strategy_path", metavar="FILE")
    simulate.add_argument("--epsilon", type=float, default=None, metavar="R")
    simulate.add_argument("--trials", type=int, default=100000, metavar="N")
    simulate.add_argument("--seed", type=int, default=0, metavar="N")
    _add_output_flags(simulate, "json")
    return parser


def _add_output_flags(sub: argparse.ArgumentParser, default_format: str) -> None:
    sub.add_argument("--out", dest="out_path", metavar="FILE")
    sub.add_argument("--format", choices=["csv", "json"], default=default_format)


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    fields = {
        "command": ns.command,
        "out_path": ns.out_path,
        "format": ns.format,
    }
    for name in ("epsilon", "delta", "k", "graph_path", "strategy_path",
                 "figure", "seed", "trials"):
        if hasattr(ns, name):
            fields[name] = getattr(ns, name)
    if getattr(ns, "theta_grid", None) is not None:
        fields["theta_grid"] = parse_theta_grid(ns.theta_grid)
    return RunConfig(**fields)


# =====================================================================
# Report serialization
# =====================================================================


def _round10(value: float) -> float:
    return float(f"{value:.10g}")


def _json_value(value):
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        if math.isinf(value):
            return "unbounded"
        return _round10(value)
    raise ValueError(f"cannot serialize {type(value).__name__}")


def _csv_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def _emit_report(report: dict, config: RunConfig) -> None:
    if config.format == "json":
        body = {key: _json_value(val) for key, val in report.items()}
        text = json.dumps(body, indent=2) + "\n"
    else:
        lines = ["key,value"] + [f"{k},{_csv_value(v)}" for k, v in report.items()]
        text = "\n".join(lines) + "\n"
    _write_text(text, config.out_path)


def _emit_table(columns, rows, config: RunConfig, comments=()) -> None:
    if config.format == "csv":
        lines = [f"# {c}" for c in comments]
        lines.append(",".join(columns))
        lines.extend(",".join(f"{v:.10g}" for v in row) for row in rows)
        text = "\n".join(lines) + "\n"
    else:
        body = {
            "figure": config.figure,
            "columns": list(columns),
            "rows": [[_json_value(float(v)) for v in row] for row in rows],
        }
        if comments:
            body["notes"] = list(comments)
        text = json.dumps(body, indent=2) + "\n"
    _write_text(text, config.out_path)


def _write_text(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# =====================================================================
# Commands
# =====================================================================


def cmd_analyze(config: RunConfig) -> int:
    """Eigenvalue scalars plus sample counts for a graph or strategy input."""
    if (config.graph_path is None) == (config.strategy_path is None):
        raise ValueError("provide exactly one of --graph or --strategy")
    epsilon = config.epsilon if config.epsilon is not None else 1e-3

    if config.graph_path is not None:
        g = load_graph(config.graph_path)
        opt = verify_graph_optimality(omega_graph(g))
        eps_max, ambiguous = insurance_ceiling(opt.gamma_star, opt.xi_star, epsilon)
        analysis = TwoCopyAnalysis(
            opt.lambda_star,
            opt.gamma_star,
            opt.xi_star,
            eps_max,
            opt.xi_star + opt.gamma_star / 2.0 < 1.0,
            True,
            ambiguous,
        )
        return _two_copy_report(analysis, epsilon, config)

    s = _load_strategy(config.strategy_path)
    if s.copies == 1:
        lam = lambda2(s)
        counts = single_copy_complexity(lam, epsilon, config.delta)
        report = {
            "lambda2": lam,
            "exact_N": counts.exact_N,
            "approx_N": counts.approx_N,
        }
        _emit_report(report, config)
        return EXIT_OK
    if s.copies == 2:
        try:
            analysis = two_copy_analysis(s, epsilon=epsilon)
        except ValueError as exc:
            _emit_report({"hypothesis_failure": str(exc)}, config)
            return EXIT_PRECONDITION
        return _two_copy_report(analysis, epsilon, config)
    raise ValueError(f"analysis supports 1 or 2 copies, got {s.copies}")


def _two_copy_report(analysis: TwoCopyAnalysis, epsilon: float, config: RunConfig) -> int:
    report = {
        "lambda_star": analysis.lambda_star,
        "gamma_star": analysis.gamma_star,
        "xi_star": analysis.xi_star,
        "eps_max": analysis.eps_max,
    }
    try:
        counts = two_copy_complexity(analysis, epsilon, config.delta)
    except ValueError as exc:
        report["exact_N"] = None
        report["approx_N"] = None
        report["hypothesis_failure"] = str(exc)
        _emit_report(report, config)
        return EXIT_PRECONDITION
    report["exact_N"] = counts.exact_N
    report["approx_N"] = counts.approx_N
    _emit_report(report, config)
    return EXIT_OK


def _load_strategy(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValueError(f"strategy file {path}: {exc}") from None
    try:
        return strategy_from_json(data)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"strategy file {path}: missing or malformed field ({exc})") from None


def cmd_curves(config: RunConfig) -> int:
    """Desk-scale tables for the two comparison figures."""
    if config.figure == "fig3":
        free = TwoCopyAnalysis(0.0, 0.0, 0.0, UNBOUNDED, True, True, False)
        rows = []
        for eps in np.logspace(-4.0, -1.0, 30):
            rows.append(
                (
                    float(eps),
                    two_copy_complexity(free, float(eps), config.delta).exact_N,
                    single_copy_complexity(1.0 / 3.0, float(eps), config.delta).exact_N,
                    single_copy_complexity(0.0, float(eps), config.delta).approx_N,
                )
            )
        _emit_table(FIG3_COLUMNS, rows, config)
        return EXIT_OK

    epsilon = config.epsilon if config.epsilon is not None else 1e-3
    if config.theta_grid is not None:
        start, stop, steps = config.theta_grid
        thetas = np.linspace(start, stop, steps)
    else:
        thetas = np.array([i * (math.pi / 4.0) / 51.0 for i in range(1, 51)])
    n_glob = single_copy_complexity(0.0, epsilon, config.delta).approx_N
    rows = []
    for theta in thetas:
        spec = GhzSpec(2, 2, [math.cos(theta), math.sin(theta)])
        counts = [n_de_k(spec, k, epsilon, config.delta).approx_N for k in (1, 2, 3, 4)]
        rows.append((float(theta), *counts, n_glob))
    _emit_table(FIG4_COLUMNS, rows, config, comments=(FIG4_NOTE,))
    return EXIT_OK


def cmd_simulate(config: RunConfig) -> int:
    """Sample the protocol and report the empirical pass rate."""
    if (config.graph_path is None) == (config.strategy_path is None):
        raise ValueError("provide exactly one of --graph or --strategy")
    if config.graph_path is not None:
        subject = omega_graph(load_graph(config.graph_path))
        target = graph_state(subject.graph)
    else:
        subject = _load_strategy(config.strategy_path)
        target = subject.target

    if config.epsilon is None:
        source: Ket | list = target
    else:
        perp = Ket(orthonormal_complement(target)[:, 0], target.dims)
        source = [(1.0 - config.epsilon, target), (config.epsilon, perp)]
    cfg = TrialConfig(config.trials, config.seed, source)
    passes, p_emp, stderr = simulate_protocol(subject, cfg)
    report = {
        "p_emp": p_emp,
        "stderr": stderr,
        "passes": passes,
        "trials": config.trials,
        "seed": config.seed,
    }
    if config.graph_path is not None:
        f_hat, f_true = fidelity_experiment(subject, cfg)
        report["F_hat"] = f_hat
        report["F_true"] = f_true
    _emit_report(report, config)
    return EXIT_OK


_DISPATCH = {"analyze": cmd_analyze, "curves": cmd_curves, "simulate": cmd_simulate}


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        config = config_from_args(ns)
        return _DISPATCH[config.command](config)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
