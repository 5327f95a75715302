"""Command-line interface.

Subcommands: ``evaluate``, ``bound``, ``feasibility``, ``histories``,
``scan``, ``selftest``. Every subcommand accepts ``--format text|structured``,
``--seed`` and ``--out PATH``; relative output paths resolve against
``QCYCLE_OUT_DIR`` when that variable is set.

Exit codes: 0 success, 2 usage error, 3 resource cap exceeded, 4 internal
verification failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import PreconditionError, ResourceLimitError, VerificationError
from .histories import family_from_bloch_angles, lg_decomposition
from .jpd import correlators_to_marginals, jpd_feasible, witness_to_text
from .quantum import build
from .report import RunReport, csv_lines, violated
from .scenario import (
    CorrelationVector,
    CycleScenario,
    canonical_scenario,
    classical_bound,
    load_scenario,
)
from .search import minimize_lhs, default_space_and_evaluator, scan_chained, scan_seeds

USAGE_ERROR = 2
RESOURCE_ERROR = 3
VERIFICATION_ERROR = 4


def _out_path(raw: str) -> Path:
    path = Path(raw)
    base = os.environ.get("QCYCLE_OUT_DIR")
    if base and not path.is_absolute():
        path = Path(base) / path
    return path


def _emit(report: RunReport, args) -> None:
    rendered = report.structured() if args.format == "structured" else report.text()
    if args.out:
        _out_path(args.out).write_text(rendered)
    else:
        sys.stdout.write(rendered)


def _scenario_fields(report: RunReport, scenario: CycleScenario) -> None:
    report.add("n", scenario.n)
    report.add("signs", tuple(f"{s:+d}" for s in scenario.signs))


def cmd_evaluate(args) -> int:
    started = time.perf_counter()
    result = build(args.builder)
    lhs = float(np.dot(result.scenario.signs, result.correlations.values))
    bound = classical_bound(result.scenario)
    report = RunReport("evaluate", tuple(sys.argv[1:]))
    report.add("tool_version", __version__)
    report.add("seed", args.seed)
    report.add("builder", result.name)
    _scenario_fields(report, result.scenario)
    report.add("correlators", result.correlations.values)
    report.add("singles", result.singles)
    if result.perfect_pairs is not None:
        report.add("perfect_pairs", result.perfect_pairs)
    if result.adjacent_commutator_norms is not None:
        report.add("adjacent_commutator_norms", result.adjacent_commutator_norms)
    report.add("lhs", lhs)
    report.add("classical_bound", bound)
    report.add("violated", violated(lhs, bound))
    report.elapsed_s = time.perf_counter() - started
    _emit(report, args)
    return 0


def cmd_bound(args) -> int:
    started = time.perf_counter()
    if args.file:
        doc = load_scenario(args.file)
        scenario = doc.scenario
        source = str(args.file)
    else:
        if args.n is None:
            raise PreconditionError("bound needs --n or --file")
        if args.signs:
            scenario = CycleScenario(args.n, tuple(int(s) for s in args.signs))
        else:
            scenario = canonical_scenario(args.n)
        source = "command line"
    bound = classical_bound(scenario)
    report = RunReport("bound", tuple(sys.argv[1:]))
    report.add("tool_version", __version__)
    report.add("seed", args.seed)
    report.add("source", source)
    _scenario_fields(report, scenario)
    report.add("classical_bound", bound)
    report.elapsed_s = time.perf_counter() - started
    _emit(report, args)
    return 0


def _marginals_for(args):
    """MarginalSet plus provenance fields from a builder name or file."""
    if args.input.endswith(".txt") or "/" in args.input or args.input == "-":
        doc = load_scenario(args.input)
        if doc.correlators is not None:
            corr = CorrelationVector(doc.scenario, doc.correlators)
            singles = doc.singles
            name = f"file:{args.input}"
        elif doc.builder is not None:
            result = build(doc.builder)
            corr, singles, name = result.correlations, result.singles, doc.builder
        else:
            raise PreconditionError("scenario file needs correlators or a builder")
    else:
        result = build(args.input)
        corr, singles, name = result.correlations, result.singles, result.name
    return correlators_to_marginals(corr, singles), corr, name


def cmd_feasibility(args) -> int:
    started = time.perf_counter()
    marginals, corr, name = _marginals_for(args)
    witness = jpd_feasible(marginals, pivot=args.pivot)
    lhs = float(np.dot(corr.scenario.signs, corr.values))
    bound = classical_bound(corr.scenario)
    report = RunReport("feasibility", tuple(sys.argv[1:]))
    report.add("tool_version", __version__)
    report.add("seed", args.seed)
    report.add("input", name)
    _scenario_fields(report, corr.scenario)
    report.add("correlators", corr.values)
    report.add("lhs", lhs)
    report.add("classical_bound", bound)
    report.add("violated", violated(lhs, bound))
    report.add("feasible", witness.feasible)
    report.add("max_residual", witness.max_constraint_residual)
    report.add("phase1_objective", witness.phase1_objective)
    report.add("near_boundary", witness.near_boundary)
    if args.witness:
        path = _out_path(args.witness)
        path.write_text(witness_to_text(witness, corr.scenario.n))
        report.add("witness_path", str(path))
    report.elapsed_s = time.perf_counter() - started
    _emit(report, args)
    return 0


def cmd_histories(args) -> int:
    started = time.perf_counter()
    angles = tuple(args.angles) if args.angles else (0.0, 2.0 * math.pi / 3.0, 4.0 * math.pi / 3.0)
    family = family_from_bloch_angles(angles)
    dec = lg_decomposition(family)
    report = RunReport("histories", tuple(sys.argv[1:]))
    report.add("tool_version", __version__)
    report.add("seed", args.seed)
    report.add("bloch_angles", angles)
    for outcomes in sorted(dec.probabilities, reverse=True):
        label = "".join("p" if o == 1 else "m" for o in outcomes)
        report.add(f"p_{label}", dec.probabilities[outcomes])
    report.add("correlator_12", dec.correlators[0])
    report.add("correlator_23", dec.correlators[1])
    report.add("correlator_13", dec.correlators[2])
    report.add("correlator_12_anticommutator", dec.correlators_anticommutator[0])
    report.add("correlator_23_anticommutator", dec.correlators_anticommutator[1])
    report.add("correlator_13_anticommutator", dec.correlators_anticommutator[2])
    report.add("lhs", dec.lhs)
    report.add("classical_bound", -1)
    report.add("violated", violated(dec.lhs, -1.0))
    report.add("decomposition_value", dec.decomposition_value)
    for outcomes, value in dec.interference.items():
        label = "".join("s" if o is None else ("p" if o == 1 else "m") for o in outcomes)
        report.add(f"interference_{label}", value)
    for e_label, g_label, value, label in dec.pair_classification:
        key = "pair_" + _strip_label(e_label) + "_" + _strip_label(g_label)
        report.add(key, (value, label))
    report.elapsed_s = time.perf_counter() - started
    _emit(report, args)
    return 0


def _strip_label(label: str) -> str:
    return label.strip("()").replace(",", "").replace("+", "p").replace("-", "m").replace("*", "s")


def cmd_scan(args) -> int:
    started = time.perf_counter()
    if args.builder:
        if args.builder != "chained":
            raise PreconditionError("scan supports the 'chained' builder family")
        if args.param != "n":
            raise PreconditionError("the chained family scans over parameter 'n'")
        rows = scan_chained(int(args.min), int(args.max))
    elif args.space:
        if args.param != "seed":
            raise PreconditionError("search spaces scan over parameter 'seed'")
        seeds = range(int(args.min), int(args.max) + 1)
        rows = scan_seeds(args.space, seeds, starts=args.starts)
    else:
        raise PreconditionError("scan needs --builder or --space")
    content = csv_lines(("parameter", "lhs_value", "classical_bound"), rows)
    if args.out:
        _out_path(args.out).write_text(content)
        sys.stdout.write(f"wrote {len(rows)} rows in {time.perf_counter() - started:.3f}s\n")
    else:
        sys.stdout.write(content)
    return 0


def cmd_selftest(args) -> int:
    failures = 0
    lines: list[str] = []

    def check(name: str, ok: bool, detail: str = "") -> None:
        nonlocal failures
        line = f"{'ok' if ok else 'FAIL'}: {name}"
        if detail:
            line += f" ({detail})"
        lines.append(line)
        sys.stdout.write(line + "\n")
        failures += 0 if ok else 1

    rng = np.random.default_rng(args.seed)

    from . import histories as hist
    from . import linalg as la
    from . import quantum as qm
    from .scenario import inequality_lhs

    # Rotation convention and eigen solver.
    theta = 0.37
    r = la.su2_rotation((0.0, 1.0, 0.0), theta)
    target = math.cos(2 * theta) * la.SIGMA_Z + math.sin(2 * theta) * la.SIGMA_X
    check("rotation convention", la.max_abs(la.dag(r) @ la.SIGMA_Z @ r - target) < 1e-12)
    h = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    h = (h + h.conj().T) / 2
    w, v = la.herm_eigen(h)
    check("jacobi reconstruction", la.max_abs(h - v @ np.diag(w) @ v.conj().T) < 1e-10)

    # Builder optima against closed forms.
    for name, target_value in (
        ("kcbs-temporal", -5.0 * math.cos(math.pi / 5.0)),
        ("kcbs-contextual", 5.0 - 4.0 * math.sqrt(5.0)),
        ("kcbs-spatial", -5.0 * math.cos(math.pi / 5.0)),
        ("chained-4", 4.0 * math.cos(3.0 * math.pi / 4.0)),
    ):
        result = build(name)
        lhs = inequality_lhs(result.correlations)
        check(f"builder {name}", abs(lhs - target_value) < 1e-9, f"lhs={lhs:.9f}")

    # Sequential correlator equals the symmetrized trace formula.
    worst = 0.0
    for _ in range(100):
        vec = rng.normal(size=2) + 1j * rng.normal(size=2)
        rho = la.pure_state(vec)
        x = la.bloch_observable(_random_unit(rng))
        y = la.bloch_observable(_random_unit(rng))
        seq, _ = qm.correlation_sequential(rho, x, y)
        worst = max(worst, abs(seq - qm.anticommutator_correlation(rho, x, y)))
    check("sequential vs symmetrized", worst < 1e-10, f"max diff {worst:.2e}")

    # LP verdicts on the anchor cases.
    temporal = build("kcbs-temporal")
    m = correlators_to_marginals(temporal.correlations, temporal.singles)
    check("temporal marginals infeasible", not jpd_feasible(m).feasible)
    boundary = correlators_to_marginals(
        CorrelationVector(canonical_scenario(5), (-0.6,) * 5)
    )
    witness = jpd_feasible(boundary)
    check(
        "boundary marginals feasible",
        witness.feasible and witness.max_constraint_residual <= 1e-7,
    )

    # Histories identities on random families.
    worst_total = worst_last = 0.0
    for _ in range(100):
        family = hist.family_from_bloch_angles(rng.uniform(0, 2 * math.pi, size=3))
        total = sum(hist.history_probability(family, hh) for hh in hist.FULL_HISTORIES)
        worst_total = max(worst_total, abs(total - 1.0))
        for k in (1, -1):
            for l in (1, -1):
                worst_last = max(
                    worst_last, abs(hist.interference_term(family, (k, l, None)))
                )
    check("history completeness", worst_total < 1e-10)
    check("last-slot interference", worst_last < 1e-12)

    # Optimizer recovery with a reduced start budget.
    for kind, target_value in (
        ("temporal-times", -5.0 * math.cos(math.pi / 5.0)),
        ("contextual-cone", 5.0 - 4.0 * math.sqrt(5.0)),
    ):
        space, evaluator = default_space_and_evaluator(kind)
        _, value = minimize_lhs(
            space, canonical_scenario(5), evaluator, seed=args.seed, starts=16
        )
        check(f"optimizer {kind}", abs(value - target_value) < 1e-6, f"value={value:.9f}")

    summary = f"selftest: {failures} failure(s)"
    lines.append(summary)
    sys.stdout.write(summary + "\n")
    if args.out:
        _out_path(args.out).write_text("\n".join(lines) + "\n")
    return 0 if failures == 0 else VERIFICATION_ERROR


def _random_unit(rng) -> tuple[float, float, float]:
    v = rng.normal(size=3)
    v /= np.linalg.norm(v)
    return tuple(v)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcycle",
        description="Cycle-inequality laboratory: evaluate quantum configurations, "
        "bound them classically, test joint-distribution feasibility.",
    )
    parser.add_argument("--version", action="version", version=f"qcycle {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--format", choices=("text", "structured"), default="text")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="write the report to this path")

    p_eval = sub.add_parser("evaluate", help="build a configuration and evaluate its inequality")
    p_eval.add_argument("builder", help="kcbs-contextual | kcbs-temporal | kcbs-spatial | chained-N")
    common(p_eval)
    p_eval.set_defaults(func=cmd_evaluate)

    p_bound = sub.add_parser("bound", help="classical bound of a cycle scenario by enumeration")
    p_bound.add_argument("--n", type=int)
    p_bound.add_argument("--signs", nargs="+")
    p_bound.add_argument("--file", help="scenario description file")
    common(p_bound)
    p_bound.set_defaults(func=cmd_bound)

    p_feas = sub.add_parser("feasibility", help="joint-distribution feasibility by linear programming")
    p_feas.add_argument("input", help="builder name or scenario file path")
    p_feas.add_argument("--witness", help="export the witness distribution to this path")
    p_feas.add_argument("--pivot", choices=("bland", "dantzig"), default="bland")
    common(p_feas)
    p_feas.set_defaults(func=cmd_feasibility)

    p_hist = sub.add_parser("histories", help="interference decomposition of a three-measurement family")
    p_hist.add_argument("--angles", type=float, nargs=3, help="three xz-plane Bloch angles")
    common(p_hist)
    p_hist.set_defaults(func=cmd_histories)

    p_scan = sub.add_parser("scan", help="sweep one parameter and emit CSV rows")
    p_scan.add_argument("--builder", help="builder family to sweep (chained)")
    p_scan.add_argument("--space", choices=("temporal-times", "bloch-angles", "contextual-cone"))
    p_scan.add_argument("--param", default="n", help="parameter to sweep (n or seed)")
    p_scan.add_argument("--min", type=int, required=True)
    p_scan.add_argument("--max", type=int, required=True)
    p_scan.add_argument("--starts", type=int, default=64)
    common(p_scan)
    p_scan.set_defaults(func=cmd_scan)

    p_self = sub.add_parser("selftest", help="run the built-in invariant battery")
    common(p_self)
    p_self.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PreconditionError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return USAGE_ERROR
    except ResourceLimitError as exc:
        sys.stderr.write(f"resource limit: {exc}\n")
        return RESOURCE_ERROR
    except VerificationError as exc:
        sys.stderr.write(f"verification failure: {exc}\n")
        return VERIFICATION_ERROR


if __name__ == "__main__":
    sys.exit(main())
