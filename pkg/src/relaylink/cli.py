"""Command-line front end: runs experiments from a TOML config.

Each command writes a CSV (12 significant digits) plus a JSON sidecar
holding the fully resolved inputs, so a run can be reproduced from its
outputs alone.  Identical config and seed produce byte-identical files.

Exit codes: 0 success, 2 invalid input, 3 infeasible or oversized
search, 4 series failed to converge.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

from .config import COMMANDS, ExperimentSpec, load_spec
from .errors import (
    ConvergenceError,
    DomainError,
    InfeasibleError,
    SearchSpaceError,
    ValidationError,
)
from .link import Exactness, FadingMode
from .optimize import (
    SearchSpace,
    exhaustive_search,
    fully_cumulative_optimal,
    ftml_ff,
    list_algorithm_sf,
    local_minima_check,
    local_minima_check_direct,
    uniform_allocation,
)
from .pdp import ArqAllocation, PdpQuery, Strategy, evaluate_pdp
from .simulate import delay_profile, run_ensemble

__all__ = ["main", "run"]


def _fmt(value) -> str:
    """One CSV cell; floats at 12 significant digits."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def _alloc_str(alloc: ArqAllocation) -> str:
    return str(alloc)


def _nc_pdp(spec: ExperimentSpec, alloc: ArqAllocation, exactness=None) -> float:
    query = PdpQuery(
        network=spec.network,
        alloc=alloc,
        fading=spec.fading,
        strategy=Strategy.NON_CUMULATIVE,
        exactness=spec.exactness if exactness is None else exactness,
    )
    return evaluate_pdp(query)


def _fc_pdp(spec: ExperimentSpec, alloc: ArqAllocation) -> float:
    query = PdpQuery(
        network=spec.network,
        alloc=alloc,
        fading=spec.fading,
        strategy=Strategy.FULLY_CUMULATIVE,
        exactness=Exactness.EXACT,
    )
    return evaluate_pdp(query)


def _type1_pdp(spec: ExperimentSpec, alloc: ArqAllocation) -> float:
    query = PdpQuery(
        network=spec.network,
        alloc=alloc,
        fading=spec.fading,
        strategy=Strategy.TYPE1,
        exactness=Exactness.EXACT,
    )
    return evaluate_pdp(query)


def _list_best(spec: ExperimentSpec, q_sum: int):
    """(candidate list, best alloc, best approx value) for the fading mode."""
    if spec.fading is FadingMode.SLOW:
        return list_algorithm_sf(spec.network, q_sum)
    return ftml_ff(spec.network, q_sum)


def _sweep_cell(spec: ExperimentSpec, token: str, q_sum: int):
    """(pdp, allocation) for one sweep column at one budget."""
    n = spec.network.hop_count
    if token == "nc-optimal":
        alloc, value = exhaustive_search(
            spec.network, q_sum, spec.fading, exactness=spec.exactness
        )
        return value, alloc
    if token == "nc-uniform":
        alloc = uniform_allocation(q_sum, n, spec.network.los)
        return _nc_pdp(spec, alloc), alloc
    if token == "nc-list":
        _, alloc, _ = _list_best(spec, q_sum)
        return _nc_pdp(spec, alloc), alloc
    if token == "fc-optimal":
        alloc = fully_cumulative_optimal(q_sum, n)
        return _fc_pdp(spec, alloc), alloc
    if token == "type1-optimal":
        alloc, value = exhaustive_search(
            spec.network, q_sum, spec.fading, strategy=Strategy.TYPE1
        )
        return value, alloc
    if token == "type1-uniform":
        alloc = uniform_allocation(q_sum, n, spec.network.los)
        return _type1_pdp(spec, alloc), alloc
    raise DomainError(f"unknown sweep strategy {token!r}")


def _run_pdp_sweep(spec: ExperimentSpec):
    fieldnames = ["q_sum"]
    for token in spec.strategies:
        fieldnames += [f"{token}_pdp", f"{token}_alloc"]
    rows = []
    for q_sum in spec.q_sum_values:
        row = {"q_sum": q_sum}
        for token in spec.strategies:
            value, alloc = _sweep_cell(spec, token, q_sum)
            row[f"{token}_pdp"] = value
            row[f"{token}_alloc"] = _alloc_str(alloc)
        rows.append(row)
    return fieldnames, rows, {}


def _run_optimize(spec: ExperimentSpec):
    q_sum = spec.q_sum_values[0]
    n = spec.network.hop_count
    fieldnames = [
        "algorithm", "q_sum", "alloc", "objective", "pdp",
        "candidates", "search_space",
    ]
    space = SearchSpace(hops=n, q_sum=q_sum).cardinality if q_sum >= n else 0
    rows = []
    for algo in spec.algorithms:
        if algo == "exhaustive":
            alloc, value = exhaustive_search(
                spec.network, q_sum, spec.fading, exactness=spec.exactness
            )
            rows.append({
                "algorithm": algo, "q_sum": q_sum, "alloc": _alloc_str(alloc),
                "objective": spec.exactness.value, "pdp": value,
                "candidates": space, "search_space": space,
            })
        elif algo in ("list-sf", "ftml-ff"):
            candidates, best_alloc, best_value = _list_best(spec, q_sum)
            rows.append({
                "algorithm": algo, "q_sum": q_sum,
                "alloc": _alloc_str(best_alloc),
                "objective": Exactness.APPROX.value,
                "pdp": best_value,
                "candidates": candidates.size, "search_space": space,
            })
        elif algo == "fc-closed-form":
            alloc = fully_cumulative_optimal(q_sum, n)
            rows.append({
                "algorithm": algo, "q_sum": q_sum, "alloc": _alloc_str(alloc),
                "objective": Exactness.EXACT.value, "pdp": _fc_pdp(spec, alloc),
                "candidates": 1, "search_space": space,
            })
        elif algo == "uniform":
            alloc = uniform_allocation(q_sum, n, spec.network.los)
            rows.append({
                "algorithm": algo, "q_sum": q_sum, "alloc": _alloc_str(alloc),
                "objective": spec.exactness.value, "pdp": _nc_pdp(spec, alloc),
                "candidates": 1, "search_space": space,
            })
        else:
            raise DomainError(f"unknown optimizer algorithm {algo!r}")
    return fieldnames, rows, {}


def _pairs_str(pairs) -> str:
    return ";".join(f"{i}-{j}" for i, j in pairs)


def _run_local_min_check(spec: ExperimentSpec):
    cert = local_minima_check(spec.alloc, spec.network, spec.fading)
    direct = local_minima_check_direct(spec.alloc, spec.network, spec.fading)
    fieldnames = [
        "alloc", "fading", "certificate_ok", "direct_ok", "agree",
        "certificate_pairs", "direct_pairs",
    ]
    row = {
        "alloc": _alloc_str(spec.alloc),
        "fading": spec.fading.value,
        "certificate_ok": cert.satisfied,
        "direct_ok": direct.satisfied,
        "agree": cert.satisfied == direct.satisfied,
        "certificate_pairs": _pairs_str(cert.violated_pairs),
        "direct_pairs": _pairs_str(direct.violated_pairs),
    }
    return fieldnames, [row], {}


def _metrics_sidecar(metrics) -> dict:
    eta = metrics.eta
    return {
        "n_packets": metrics.n_packets,
        "drop_count": metrics.p_drop_count,
        "deadline_count": metrics.p_deadline_count,
        "delivered_count": metrics.delivered_count,
        "avg_delay": metrics.avg_delay,
        "eta": None if math.isnan(eta) else eta,
        "pdv": metrics.pdv,
        "deadline": metrics.deadline,
    }


def _ensemble(spec: ExperimentSpec):
    return run_ensemble(
        network=spec.network,
        alloc=spec.alloc,
        fading=spec.fading,
        strategy=spec.strategy,
        delays=spec.delays,
        n_packets=spec.n_packets,
        seed=spec.seed,
        workers=spec.workers,
    )


def _run_simulate(spec: ExperimentSpec):
    metrics = _ensemble(spec)
    query = PdpQuery(
        network=spec.network,
        alloc=spec.alloc,
        fading=spec.fading,
        strategy=spec.strategy,
        exactness=Exactness.EXACT,
    )
    analytic = evaluate_pdp(query)
    fieldnames = [
        "strategy", "fading", "alloc", "n_packets", "seed",
        "drop_count", "deadline_count", "delivered_count",
        "drop_rate", "analytic_pdp", "avg_delay", "eta", "pdv", "deadline",
    ]
    row = {
        "strategy": spec.strategy.value,
        "fading": spec.fading.value,
        "alloc": _alloc_str(spec.alloc),
        "n_packets": metrics.n_packets,
        "seed": spec.seed,
        "drop_count": metrics.p_drop_count,
        "deadline_count": metrics.p_deadline_count,
        "delivered_count": metrics.delivered_count,
        "drop_rate": metrics.p_drop_count / metrics.n_packets,
        "analytic_pdp": analytic,
        "avg_delay": metrics.avg_delay,
        "eta": metrics.eta,
        "pdv": metrics.pdv,
        "deadline": metrics.deadline,
    }
    return fieldnames, [row], {"metrics": _metrics_sidecar(metrics)}


def _run_delay_profile(spec: ExperimentSpec):
    metrics = _ensemble(spec)
    profile = delay_profile(metrics)
    fieldnames = ["delay", "percent", "over_deadline"]
    slack = metrics.deadline * (1.0 + 1e-9)
    rows = [
        {"delay": d, "percent": pct, "over_deadline": d > slack}
        for d, pct in profile.bins
    ]
    extra = {
        "metrics": _metrics_sidecar(metrics),
        "w_deadline_percent": profile.w_deadline_percent,
    }
    return fieldnames, rows, extra


def _run_list_size(spec: ExperimentSpec):
    n = spec.network.hop_count
    algo = "list-sf" if spec.fading is FadingMode.SLOW else "ftml-ff"
    fieldnames = [
        "q_sum", "algorithm", "list_size", "search_space", "best_alloc",
        "best_pdp_approx",
    ]
    rows = []
    for q_sum in spec.q_sum_values:
        candidates, best_alloc, best_value = _list_best(spec, q_sum)
        space = SearchSpace(hops=n, q_sum=q_sum).cardinality
        rows.append({
            "q_sum": q_sum,
            "algorithm": algo,
            "list_size": candidates.size,
            "search_space": space,
            "best_alloc": _alloc_str(best_alloc),
            "best_pdp_approx": best_value,
        })
    return fieldnames, rows, {}


_HANDLERS = {
    "pdp-sweep": _run_pdp_sweep,
    "optimize": _run_optimize,
    "local-min-check": _run_local_min_check,
    "simulate": _run_simulate,
    "delay-profile": _run_delay_profile,
    "list-size": _run_list_size,
}


def _spec_sidecar(spec: ExperimentSpec) -> dict:
    """The resolved inputs, ready for JSON."""
    delays = None
    if spec.delays is not None:
        delays = {
            "tau_p": spec.delays.tau_p,
            "tau_d": spec.delays.tau_d,
            "tau_nack": spec.delays.tau_nack,
            "alpha": spec.delays.alpha,
            "tau_total": spec.delays.tau_total,
            "nack_every_attempt": spec.delays.nack_every_attempt,
            "avg_includes_dropped": spec.delays.avg_includes_dropped,
        }
    return {
        "command": spec.command,
        "network": {
            "los": list(spec.network.los),
            "rate": spec.network.rate,
            "snr": spec.network.snr,
        },
        "q_sum_values": list(spec.q_sum_values),
        "fading": spec.fading.value if spec.fading else None,
        "exactness": spec.exactness.value if spec.exactness else None,
        "strategies": list(spec.strategies) if spec.strategies else [],
        "algorithms": list(spec.algorithms) if spec.algorithms else [],
        "strategy": spec.strategy.value if spec.strategy else None,
        "alloc": list(spec.alloc.q) if spec.alloc else None,
        "delays": delays,
        "n_packets": spec.n_packets,
        "seed": spec.seed,
        "workers": spec.workers,
        "output": spec.output,
    }


def run(spec: ExperimentSpec) -> dict:
    """Execute one resolved experiment; returns the written file paths."""
    handler = _HANDLERS[spec.command]
    fieldnames, rows, extra = handler(spec)

    csv_path = Path(spec.output)
    if csv_path.parent and not csv_path.parent.exists():
        csv_path.parent.mkdir(parents=True, exist_ok=True)
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_fmt(row[name]) for name in fieldnames])

    sidecar = {"spec": _spec_sidecar(spec), "rows": len(rows)}
    sidecar.update(extra)
    json_path = csv_path.with_suffix(".json")
    with open(json_path, "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return {"csv": str(csv_path), "json": str(json_path)}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relaylink",
        description="Outage, ARQ allocation, and delay tools for DF relay chains.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "pdp-sweep": "packet-drop probability vs. total ARQ budget",
        "optimize": "best ARQ allocation under a total budget",
        "local-min-check": "certify an allocation as a local minimum",
        "simulate": "Monte-Carlo packet ensemble with delay accounting",
        "delay-profile": "per-delay-value histogram from a packet ensemble",
        "list-size": "candidate-list size vs. exhaustive search space",
    }
    for name in COMMANDS:
        cmd = sub.add_parser(name, help=helps[name])
        cmd.add_argument("--config", required=True, help="TOML experiment file")
        cmd.add_argument("--out", help="CSV output path (sidecar gets .json)")
        cmd.add_argument("--seed", type=int, help="RNG seed override")
        cmd.add_argument("--workers", type=int, help="worker thread count")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        spec = load_spec(
            args.config,
            command=args.command,
            seed_override=args.seed,
            out_override=args.out,
            workers_override=args.workers,
        )
        paths = run(spec)
    except ValidationError as err:
        for problem in err.problems:
            print(f"error: {problem}", file=sys.stderr)
        return 2
    except DomainError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (InfeasibleError, SearchSpaceError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    except ConvergenceError as err:
        print(f"error: {err}", file=sys.stderr)
        return 4
    print(f"wrote {paths['csv']}")
    print(f"wrote {paths['json']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
