"""Command-line surface: analyze a network or run a certified inference.

Exit statuses: 0 success, 2 usage error, 3 file or parse error, 4 runtime
failure, 5 sampling budget exceeded (a partial report is still emitted).
JSON reports are self-contained; rerun_report re-executes one and
reproduces its estimate bit for bit.
"""

import argparse
import json
import sys
import time
from pathlib import Path
from collections.abc import Mapping

from . import __version__
from .dependence import CostEstimate, dependence_value, predicted_cost
from .errors import (
    BudgetExceededError,
    CondsimError,
    NetworkFormatError,
    OverlappingAssignmentsError,
    OverlappingSetsError,
    UnknownNodeError,
)
from .exact import exact_conditional
from .dependence import satisfies_ras
from .network import BeliefNetwork, parse_network
from .reformulate import (
    DEFAULT_SEED,
    GreedyTrace,
    InferConfig,
    InferenceResult,
    greedy_select,
    infer,
)
from .sampling import DEFAULT_REJECTION_CAP, TrialGeneratorKind
from .stopping import PriorChoice


def parse_assignment_text(text: str) -> dict[str, int]:
    """Parse comma-separated Name=0|1 bindings; duplicates are errors."""
    out: dict[str, int] = {}
    if not text.strip():
        return out
    for token in text.split(","):
        token = token.strip()
        if "=" not in token:
            raise ValueError(f"expected Name=0|1, got {token!r}")
        name, _, raw = token.partition("=")
        name = name.strip()
        raw = raw.strip()
        if not name:
            raise ValueError(f"missing node name in {token!r}")
        if raw not in ("0", "1"):
            raise ValueError(f"value for {name} must be 0 or 1, got {raw!r}")
        if name in out:
            raise ValueError(f"node {name} bound more than once")
        out[name] = int(raw)
    return out


def _format_assignment(assignment: Mapping[str, int]) -> str:
    return ", ".join(f"{k}={v}" for k, v in assignment.items())


def _cost_dict(cost: CostEstimate) -> dict:
    return {"subproblem_term": cost.subproblem_term,
            "weight_term": cost.weight_term,
            "phi_min_bound": cost.phi_min_bound}


def _trace_dict(trace: GreedyTrace | None) -> dict | None:
    if trace is None:
        return None
    return {
        "steps": [{"node": s.node, "added": list(s.added),
                   "lambda_before": s.lambda_before,
                   "candidate_ratio": s.candidate_ratio,
                   "cost_before": _cost_dict(s.cost_before),
                   "cost_after": _cost_dict(s.cost_after)}
                  for s in trace.steps],
        "stop_reason": trace.stop_reason,
        "final_cost": _cost_dict(trace.final_cost),
    }


def _estimate_dict(est) -> dict:
    return {"value": est.value, "epsilon": est.epsilon, "delta": est.delta,
            "trials": est.trials, "consistent": est.consistent}


def _result_dict(result: InferenceResult) -> dict:
    return {
        "estimate": result.estimate,
        "epsilon": result.epsilon,
        "delta": result.delta,
        "strategy_used": result.strategy_used,
        "selected_s": list(result.selected_s),
        "mu_s": list(result.mu_s),
        "weight_trials": result.weight_trials,
        "subproblems": [{"index": i,
                         "numerator": _estimate_dict(num),
                         "denominator": _estimate_dict(den)}
                        for i, (num, den)
                        in enumerate(result.subproblem_estimates)],
        "numerator": result.numerator,
        "denominator": result.denominator,
        "clamped": result.clamped,
        "dependence_before": result.dependence_before,
        "dependence_after": result.dependence_after,
        "trials_total": result.trials_total,
        "seed": result.seed,
        "greedy_trace": _trace_dict(result.greedy_trace),
    }


def _load_network(path: str) -> tuple[BeliefNetwork, str]:
    source = Path(path).read_text(encoding="utf-8")
    return parse_network(source), source


def _emit(report: dict, as_json: bool, lines: list[str],
          file=None) -> None:
    file = sys.stdout if file is None else file
    if as_json:
        print(json.dumps(report, indent=2), file=file)
    else:
        print("\n".join(lines), file=file)


def cmd_analyze(args: argparse.Namespace) -> int:
    net, _ = _load_network(args.network)
    evidence = parse_assignment_text(args.evidence)
    started = time.perf_counter()
    dep = dependence_value(net, evidence)
    selected, trace = greedy_select(net, evidence, args.greedy_exponent,
                                    args.max_s)
    cost_before = predicted_cost(net, evidence, ())
    cost_after = predicted_cost(net, evidence, selected)
    dep_after = dependence_value(net, evidence, conditioning=selected)
    elapsed_ms = (time.perf_counter() - started) * 1000.0
    report = {
        "tool": "condsim",
        "version": __version__,
        "command": "analyze",
        "network_name": net.name,
        "evidence": dict(evidence),
        "per_node": {name: {"lo": bounds.lo, "hi": bounds.hi,
                            "lambda": lam}
                     for name, (bounds, lam) in dep.per_node.items()},
        "dependence_value": dep.value,
        "dependence_after": dep_after.value,
        "selected_s": list(selected),
        "greedy_trace": _trace_dict(trace),
        "cost_before": _cost_dict(cost_before),
        "cost_after": _cost_dict(cost_after),
        "elapsed_ms": elapsed_ms,
    }
    lines = [f"network {net.name} ({net.n} nodes)",
             f"evidence: {_format_assignment(evidence) or '(none)'}",
             "node  lo        hi        lambda"]
    for name, (bounds, lam) in dep.per_node.items():
        lines.append(f"  {name}: {bounds.lo:.6g}  {bounds.hi:.6g}  "
                     f"{lam:.6g}")
    lines.append(f"dependence value D = {dep.value:.6g}")
    lines.append(f"selected S = [{', '.join(selected)}] "
                 f"({trace.stop_reason})")
    for step in trace.steps:
        lines.append(f"  added {{{', '.join(step.added)}}} for node "
                     f"{step.node}: lambda {step.lambda_before:.6g}, "
                     f"ratio {step.candidate_ratio:.6g}")
    lines.append(f"dependence value given S = {dep_after.value:.6g}")
    lines.append(f"cost before: subproblem {cost_before.subproblem_term:.6g}"
                 f", weight {cost_before.weight_term:.6g}")
    lines.append(f"cost after:  subproblem {cost_after.subproblem_term:.6g}"
                 f", weight {cost_after.weight_term:.6g}")
    _emit(report, args.report == "json", lines)
    return 0


def _build_generator(args: argparse.Namespace) -> TrialGeneratorKind:
    if args.generator == "gibbs":
        return TrialGeneratorKind.gibbs(args.burn_in_sweeps)
    if args.burn_in_sweeps is not None:
        raise ValueError("--burn-in-sweeps applies to the gibbs "
                         "generator only")
    return TrialGeneratorKind.rejection()


def cmd_infer(args: argparse.Namespace) -> int:
    net, source = _load_network(args.network)
    query = parse_assignment_text(args.query)
    evidence = parse_assignment_text(args.evidence)
    generator = _build_generator(args)
    config = InferConfig(greedy_exponent=args.greedy_exponent,
                         max_s=args.max_s,
                         prior=PriorChoice(args.prior),
                         generator=generator,
                         sample_cap=args.sample_cap,
                         rejection_cap=args.rejection_cap)
    report = {
        "tool": "condsim",
        "version": __version__,
        "command": "infer",
        "network_name": net.name,
        "network_source": source,
        "query": dict(query),
        "evidence": dict(evidence),
        "epsilon": args.epsilon,
        "delta": args.delta,
        "strategy": args.strategy,
        "config": {"greedy_exponent": args.greedy_exponent,
                   "max_s": args.max_s,
                   "prior": args.prior,
                   "generator": args.generator,
                   "burn_in_sweeps": args.burn_in_sweeps,
                   "sample_cap": args.sample_cap,
                   "rejection_cap": args.rejection_cap},
        "seed": args.seed,
    }
    started = time.perf_counter()
    try:
        result = infer(net, query, evidence, args.epsilon, args.delta,
                       args.strategy, config, args.seed)
    except BudgetExceededError as exc:
        report["elapsed_ms"] = (time.perf_counter() - started) * 1000.0
        report["error"] = {"kind": type(exc).__name__,
                           "message": str(exc),
                           "phase": exc.phase,
                           "trials": exc.trials,
                           "cap": exc.cap}
        lines = [f"budget exceeded during {exc.phase or 'sampling'}: {exc}",
                 f"trials so far: {exc.trials}  cap: {exc.cap}"]
        _emit(report, args.report == "json", lines)
        print(f"condsim: {exc}", file=sys.stderr)
        return 5
    report["elapsed_ms"] = (time.perf_counter() - started) * 1000.0
    report["result"] = _result_dict(result)
    report["cost_before"] = _cost_dict(predicted_cost(net, evidence, ()))
    report["cost_after"] = _cost_dict(
        predicted_cost(net, evidence, result.selected_s))
    lines = [f"network {net.name} ({net.n} nodes)",
             f"Pr[{_format_assignment(query)} | "
             f"{_format_assignment(evidence) or 'nothing'}] "
             f"~ {result.estimate!r}",
             f"  epsilon {result.epsilon}  delta {result.delta}  "
             f"strategy {result.strategy_used}  seed {result.seed}",
             f"  S = [{', '.join(result.selected_s)}]  "
             f"trials {result.trials_total}  "
             f"(weights {result.weight_trials})",
             f"  dependence before {result.dependence_before:.6g}  "
             f"after {result.dependence_after:.6g}",
             f"  clamped: {'yes' if result.clamped else 'no'}"]
    if args.exact:
        oracle = exact_conditional(net, query, evidence)
        verdict = satisfies_ras(oracle, result.estimate, args.epsilon)
        report["exact"] = {"oracle": oracle, "satisfies_ras": verdict}
        lines.append(f"  oracle {oracle!r}  within interval: "
                     f"{'yes' if verdict else 'no'}")
    _emit(report, args.report == "json", lines)
    return 0


def rerun_report(report: Mapping) -> InferenceResult:
    """Re-execute an infer run from its own JSON report."""
    net = parse_network(report["network_source"])
    cfg = report["config"]
    if cfg["generator"] == "gibbs":
        generator = TrialGeneratorKind.gibbs(cfg["burn_in_sweeps"])
    else:
        generator = TrialGeneratorKind.rejection()
    config = InferConfig(greedy_exponent=cfg["greedy_exponent"],
                         max_s=cfg["max_s"],
                         prior=PriorChoice(cfg["prior"]),
                         generator=generator,
                         sample_cap=cfg["sample_cap"],
                         rejection_cap=cfg["rejection_cap"])
    return infer(net, {k: int(v) for k, v in report["query"].items()},
                 {k: int(v) for k, v in report["evidence"].items()},
                 report["epsilon"], report["delta"], report["strategy"],
                 config, report["seed"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="condsim",
        description="Randomized approximate inference for binary belief "
                    "networks.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser(
        "analyze", help="report dependence diagnostics and the greedy "
                        "conditioning set")
    analyze.add_argument("--network", required=True,
                         help="path to a .bnet file")
    analyze.add_argument("--evidence", default="",
                         help="comma-separated Name=0|1 bindings")
    analyze.add_argument("--greedy-exponent", type=float, default=1.0)
    analyze.add_argument("--max-s", type=int, default=12)
    analyze.add_argument("--report", choices=("text", "json"),
                         default="text")

    run = sub.add_parser(
        "infer", help="estimate a conditional probability with certified "
                      "relative error")
    run.add_argument("--network", required=True,
                     help="path to a .bnet file")
    run.add_argument("--query", required=True,
                     help="comma-separated Name=0|1 bindings")
    run.add_argument("--evidence", default="")
    run.add_argument("--epsilon", type=float, required=True,
                     help="relative error target, positive")
    run.add_argument("--delta", type=float, required=True,
                     help="failure probability target in (0, 1]")
    run.add_argument("--strategy", choices=("auto", "direct", "selective"),
                     default="auto")
    run.add_argument("--greedy-exponent", type=float, default=1.0)
    run.add_argument("--max-s", type=int, default=12)
    run.add_argument("--prior", choices=("unbiased", "uniform"),
                     default="unbiased")
    run.add_argument("--generator", choices=("rejection", "gibbs"),
                     default="rejection")
    run.add_argument("--burn-in-sweeps", type=int, default=None)
    run.add_argument("--sample-cap", type=int, default=None)
    run.add_argument("--rejection-cap", type=int,
                     default=DEFAULT_REJECTION_CAP)
    run.add_argument("--seed", type=int, default=DEFAULT_SEED,
                     help=f"64-bit seed (default {DEFAULT_SEED})")
    run.add_argument("--exact", action="store_true",
                     help="also run the exact oracle and report the "
                          "interval verdict")
    run.add_argument("--report", choices=("text", "json"), default="text")
    return parser


def main(argv: "list[str] | None" = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "analyze":
            return cmd_analyze(args)
        return cmd_infer(args)
    except NetworkFormatError as exc:
        print(f"condsim: parse error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"condsim: cannot read network: {exc}", file=sys.stderr)
        return 3
    except (UnknownNodeError, OverlappingSetsError,
            OverlappingAssignmentsError, ValueError) as exc:
        print(f"condsim: {exc}", file=sys.stderr)
        return 2
    except BudgetExceededError as exc:
        print(f"condsim: {exc}", file=sys.stderr)
        return 5
    except CondsimError as exc:
        print(f"condsim: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
