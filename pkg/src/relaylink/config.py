"""Experiment configuration: structured TOML file -> resolved ExperimentSpec.

SNR accepts either a linear ratio or a "<x> dB" string; time fields accept
seconds or "<x> s|ms|us|ns" strings, normalized to seconds.  Validation
collects every problem before failing so a bad config is reported whole.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .errors import ValidationError
from .link import Exactness, FadingMode, NetworkConfig
from .optimize import fully_cumulative_optimal, uniform_allocation
from .pdp import ArqAllocation, Strategy
from .simulate import DelayParams, derive_qsum

__all__ = ["ExperimentSpec", "COMMANDS", "load_spec", "parse_snr", "parse_time"]

COMMANDS = (
    "pdp-sweep",
    "optimize",
    "local-min-check",
    "simulate",
    "delay-profile",
    "list-size",
)

SWEEP_TOKENS = (
    "nc-optimal",
    "nc-uniform",
    "nc-list",
    "fc-optimal",
    "type1-optimal",
    "type1-uniform",
)

ALGORITHM_TOKENS = ("exhaustive", "list-sf", "ftml-ff", "fc-closed-form", "uniform")

_STRATEGY_TOKENS = {s.value: s for s in Strategy}
_FADING_TOKENS = {f.value: f for f in FadingMode}
_EXACTNESS_TOKENS = {e.value: e for e in Exactness}

_TIME_UNITS = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9}
_TIME_RE = re.compile(r"([-+]?[0-9.]+(?:[eE][-+]?[0-9]+)?)\s*(s|ms|us|ns)")
_DB_RE = re.compile(r"([-+]?[0-9.]+(?:[eE][-+]?[0-9]+)?)\s*[dD][bB]")


def parse_time(value, field: str, problems: list):
    """Seconds from a number or a '<x> s|ms|us|ns' string."""
    if isinstance(value, bool):
        problems.append(f"{field}: expected a time, got a boolean")
        return None
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        match = _TIME_RE.fullmatch(value.strip())
        if match:
            return float(match.group(1)) * _TIME_UNITS[match.group(2)]
        problems.append(
            f"{field}: cannot parse {value!r} (use seconds or 's/ms/us/ns' suffix)"
        )
        return None
    problems.append(f"{field}: expected a time, got {value!r}")
    return None


def parse_snr(value, field: str, problems: list):
    """Linear SNR from a number or a '<x> dB' string."""
    if isinstance(value, bool):
        problems.append(f"{field}: expected an SNR, got a boolean")
        return None
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        match = _DB_RE.fullmatch(value.strip())
        if match:
            return 10.0 ** (float(match.group(1)) / 10.0)
        problems.append(f"{field}: cannot parse {value!r} (use linear or 'dB' suffix)")
        return None
    problems.append(f"{field}: expected an SNR, got {value!r}")
    return None


@dataclass(frozen=True)
class ExperimentSpec:
    """A fully resolved experiment: one CLI command plus its inputs."""

    command: str
    network: NetworkConfig
    q_sum_values: tuple
    fading: FadingMode
    exactness: Exactness
    strategies: tuple
    algorithms: tuple
    strategy: Strategy | None
    alloc: ArqAllocation | None
    delays: DelayParams | None
    n_packets: int | None
    seed: int | None
    workers: int
    output: str | None


def _as_int(value, field: str, problems: list, minimum: int):
    if isinstance(value, bool) or not isinstance(value, int):
        problems.append(f"{field}: expected an integer, got {value!r}")
        return None
    if value < minimum:
        problems.append(f"{field}: must be >= {minimum}, got {value}")
        return None
    return value


def _as_choice(value, field: str, problems: list, choices):
    if not isinstance(value, str) or value not in choices:
        problems.append(
            f"{field}: expected one of {', '.join(choices)}, got {value!r}"
        )
        return None
    return value


def _as_token_list(value, field: str, problems: list, choices, default):
    if value is None:
        return default
    if not isinstance(value, list) or not value:
        problems.append(f"{field}: expected a non-empty list of strings")
        return None
    out = []
    for tok in value:
        if _as_choice(tok, field, problems, choices) is None:
            return None
        if tok not in out:
            out.append(tok)
    return tuple(out)


def _section(data, name, problems):
    value = data.get(name)
    if value is None:
        return {}
    if not isinstance(value, dict):
        problems.append(f"[{name}]: expected a table")
        return {}
    return value


def _build_network(data, problems):
    section = _section(data, "network", problems)
    if not section:
        problems.append("[network]: section is required")
        return None
    # Validate each field independently so one bad entry does not mask
    # the others; placeholders let NetworkConfig check what it can.
    ok = True
    los = section.get("los")
    if not isinstance(los, list) or not los:
        problems.append("network.los: expected a non-empty list of LOS fractions")
        los, ok = [0.0], False
    rate = section.get("rate")
    if isinstance(rate, bool) or not isinstance(rate, (int, float)):
        problems.append(f"network.rate: expected a number, got {rate!r}")
        rate, ok = 1.0, False
    snr = parse_snr(section.get("snr"), "network.snr", problems)
    if snr is None:
        snr, ok = 1.0, False
    try:
        network = NetworkConfig(los=tuple(los), rate=float(rate), snr=snr)
    except ValidationError as err:
        problems.extend(f"network.{p}" for p in err.problems)
        return None
    except TypeError as err:
        problems.append(f"network: {err}")
        return None
    return network if ok else None


def _build_delays(data, problems):
    section = _section(data, "delays", problems)
    if not section:
        return None
    kwargs = {}
    for name in ("tau_p", "tau_d", "tau_nack", "tau_total"):
        if name in section:
            parsed = parse_time(section[name], f"delays.{name}", problems)
            if parsed is not None:
                kwargs[name] = parsed
    if "alpha" in section:
        alpha = section["alpha"]
        if isinstance(alpha, bool) or not isinstance(alpha, (int, float)):
            problems.append(f"delays.alpha: expected a number, got {alpha!r}")
        else:
            kwargs["alpha"] = float(alpha)
    for name in ("nack_every_attempt", "avg_includes_dropped"):
        if name in section:
            kwargs[name] = section[name]
    unknown = set(section) - {
        "tau_p", "tau_d", "tau_nack", "tau_total", "alpha",
        "nack_every_attempt", "avg_includes_dropped",
    }
    for name in sorted(unknown):
        problems.append(f"delays.{name}: unknown field")
    if "tau_p" not in kwargs or "tau_d" not in kwargs:
        problems.append("delays: tau_p and tau_d are required")
        return None
    try:
        return DelayParams(**kwargs)
    except ValidationError as err:
        problems.extend(f"delays.{p}" for p in err.problems)
        return None


def _resolve_q_sums(data, delays, problems):
    sweep = _section(data, "sweep", problems)
    q_sum = sweep.get("q_sum")
    q_range = sweep.get("q_sum_range")
    if q_sum is not None and q_range is not None:
        problems.append("sweep: give q_sum or q_sum_range, not both")
        return ()
    if q_sum is not None:
        if delays is not None and delays.tau_total is not None:
            problems.append("sweep.q_sum conflicts with delays.tau_total; give one")
            return ()
        value = _as_int(q_sum, "sweep.q_sum", problems, minimum=1)
        return (value,) if value is not None else ()
    if q_range is not None:
        ok = (
            isinstance(q_range, list)
            and len(q_range) == 2
            and all(isinstance(v, int) and not isinstance(v, bool) for v in q_range)
            and 1 <= q_range[0] <= q_range[1]
        )
        if not ok:
            problems.append(
                f"sweep.q_sum_range: expected [lo, hi] with 1 <= lo <= hi, "
                f"got {q_range!r}"
            )
            return ()
        return tuple(range(q_range[0], q_range[1] + 1))
    if delays is not None and delays.tau_total is not None:
        if delays.attempt_time > 0.0:
            return (derive_qsum(delays),)
        problems.append("delays: tau_p + tau_d must be positive to derive q_sum")
        return ()
    return ()


def _resolve_alloc(data, network, q_sums, problems):
    section = _section(data, "allocation", problems)
    spec = section.get("q")
    if spec is None:
        return None
    if isinstance(spec, list):
        try:
            alloc = ArqAllocation(tuple(spec))
        except ValidationError as err:
            problems.extend(f"allocation.{p}" for p in err.problems)
            return None
        if network is not None and alloc.hop_count != network.hop_count:
            problems.append(
                f"allocation.q: {alloc.hop_count} hops, network has "
                f"{network.hop_count}"
            )
            return None
        return alloc
    if spec in ("uniform", "fc-optimal"):
        if network is None:
            return None
        if len(q_sums) != 1:
            problems.append(
                f"allocation.q = {spec!r} needs a single q_sum "
                "(or delays.tau_total) to resolve"
            )
            return None
        try:
            if spec == "uniform":
                return uniform_allocation(
                    q_sums[0], network.hop_count, network.los
                )
            return fully_cumulative_optimal(q_sums[0], network.hop_count)
        except Exception as err:  # Infeasible/Domain — report in context
            problems.append(f"allocation.q: {err}")
            return None
    problems.append(
        f"allocation.q: expected a budget list, 'uniform', or 'fc-optimal', "
        f"got {spec!r}"
    )
    return None


def load_spec(
    path: str,
    command: str | None = None,
    seed_override: int | None = None,
    out_override: str | None = None,
    workers_override: int | None = None,
) -> ExperimentSpec:
    """Parse and cross-validate a config file; CLI flags override fields."""
    problems: list = []
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as err:
        raise ValidationError([f"config: cannot read {path}: {err}"])
    except tomllib.TOMLDecodeError as err:
        raise ValidationError([f"config: invalid TOML in {path}: {err}"])

    file_command = data.get("command")
    if file_command is not None and file_command not in COMMANDS:
        problems.append(
            f"command: expected one of {', '.join(COMMANDS)}, got {file_command!r}"
        )
        file_command = None
    if command is not None and file_command is not None and command != file_command:
        problems.append(
            f"command: config says {file_command!r} but {command!r} was invoked"
        )
    resolved_command = command or file_command
    if resolved_command is None:
        problems.append("command: not given (set it in the config or the CLI)")

    network = _build_network(data, problems)
    delays = _build_delays(data, problems)
    q_sums = _resolve_q_sums(data, delays, problems)
    alloc = _resolve_alloc(data, network, q_sums, problems)

    sweep = _section(data, "sweep", problems)
    fading_tok = _as_choice(
        sweep.get("fading"), "sweep.fading", problems, tuple(_FADING_TOKENS)
    )
    fading = _FADING_TOKENS.get(fading_tok) if fading_tok else None
    exact_tok = sweep.get("exactness", "exact")
    exact_tok = _as_choice(
        exact_tok, "sweep.exactness", problems, tuple(_EXACTNESS_TOKENS)
    )
    exactness = _EXACTNESS_TOKENS.get(exact_tok) if exact_tok else None

    strategies = _as_token_list(
        sweep.get("strategies"), "sweep.strategies", problems, SWEEP_TOKENS,
        ("nc-optimal", "nc-uniform", "fc-optimal", "type1-optimal"),
    )
    if fading is not None:
        default_algos = (
            ("exhaustive", "list-sf")
            if fading is FadingMode.SLOW
            else ("exhaustive", "ftml-ff")
        )
    else:
        default_algos = ("exhaustive",)
    algorithms = _as_token_list(
        sweep.get("algorithms"), "sweep.algorithms", problems, ALGORITHM_TOKENS,
        default_algos,
    )
    if algorithms:
        if fading is FadingMode.SLOW and "ftml-ff" in algorithms:
            problems.append("sweep.algorithms: ftml-ff applies to fast fading only")
        if fading is FadingMode.FAST and "list-sf" in algorithms:
            problems.append("sweep.algorithms: list-sf applies to slow fading only")

    strategy_tok = sweep.get("strategy", "non-cumulative")
    strategy_tok = _as_choice(
        strategy_tok, "sweep.strategy", problems, tuple(_STRATEGY_TOKENS)
    )
    strategy = _STRATEGY_TOKENS.get(strategy_tok) if strategy_tok else None

    sim = _section(data, "simulation", problems)
    n_packets = None
    if "n_packets" in sim:
        n_packets = _as_int(sim["n_packets"], "simulation.n_packets", problems, 1)
    seed = seed_override
    if seed is None and "seed" in sim:
        seed = _as_int(sim["seed"], "simulation.seed", problems, 0)
    elif seed is not None:
        seed = _as_int(seed, "simulation.seed", problems, 0)
    workers = workers_override
    if workers is None:
        workers = sim.get("workers", 1)
    workers = _as_int(workers, "simulation.workers", problems, 1) or 1

    output = out_override if out_override is not None else data.get("output")
    if output is not None and not isinstance(output, str):
        problems.append(f"output: expected a path string, got {output!r}")
        output = None

    # Per-command requirements
    if resolved_command is not None and network is not None:
        needs_qsum = resolved_command in ("pdp-sweep", "optimize", "list-size")
        if needs_qsum and not q_sums and not problems:
            problems.append(
                f"{resolved_command}: needs sweep.q_sum, sweep.q_sum_range, "
                "or delays.tau_total"
            )
        if resolved_command == "optimize" and len(q_sums) > 1:
            problems.append("optimize: needs a single q_sum, not a range")
        if resolved_command in ("local-min-check", "simulate", "delay-profile"):
            if alloc is None and not problems:
                problems.append(f"{resolved_command}: [allocation] q is required")
        if resolved_command in ("simulate", "delay-profile"):
            if delays is None:
                problems.append(f"{resolved_command}: [delays] section is required")
            if n_packets is None:
                problems.append(
                    f"{resolved_command}: simulation.n_packets is required"
                )
            if seed is None:
                problems.append(
                    f"{resolved_command}: a seed is required (config or --seed)"
                )
    if output is None:
        problems.append("output: required (set output in config or pass --out)")

    if problems:
        raise ValidationError(problems)

    return ExperimentSpec(
        command=resolved_command,
        network=network,
        q_sum_values=q_sums,
        fading=fading,
        exactness=exactness,
        strategies=strategies,
        algorithms=algorithms,
        strategy=strategy,
        alloc=alloc,
        delays=delays,
        n_packets=n_packets,
        seed=seed,
        workers=workers,
        output=output,
    )
