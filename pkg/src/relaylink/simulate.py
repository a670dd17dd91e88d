"""Packet-level Monte-Carlo engine with delay accounting.

Packets walk the hop chain; each hop draws Rician gains and spends attempt
budget until the chase-combining (or type-1) decode test passes or the
budget runs out.  Delay bookkeeping per packet:

    delay = attempts * T  +  nack_units * tau_nack  +  relays * alpha * T

with T = tau_p + tau_d, nack_units = failed attempts (or all attempts in
the strict-bound mode), and relays = counter decryptions performed — one
per relay the packet traversed, fully-cumulative strategy only.

Reproducibility: the ensemble is split into fixed 65536-packet blocks, each
driven by its own generator spawned from the root seed, with fixed-shape
draws per hop.  Partial results merge in block order, so metrics are
identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, InfeasibleError, ValidationError
from .link import FadingMode, NetworkConfig, sample_channel_gain, sample_channel_gains
from .pdp import ArqAllocation, Strategy

__all__ = [
    "BLOCK_SIZE",
    "DelayParams",
    "PacketStatus",
    "PacketOutcome",
    "EnsembleMetrics",
    "DelayProfile",
    "derive_qsum",
    "simulate_packet",
    "run_ensemble",
    "delay_profile",
]

BLOCK_SIZE = 65536

# Relative slack when testing delays against the deadline: lattice delay
# values are float sums, so an exact > comparison would be brittle.
_DEADLINE_SLACK = 1e-9


@dataclass(frozen=True)
class DelayParams:
    """Timing model: per-attempt, NACK, counter-crypto, and deadline terms.

    tau_total is the end-to-end deadline; when omitted, the deadline
    defaults to q_sum * (tau_p + tau_d).  nack_every_attempt switches from
    charging tau_nack per failed attempt to charging it on every attempt
    (the pessimistic bound).  avg_includes_dropped widens the average-delay
    metric to count dropped packets' partial delay.
    """

    tau_p: float
    tau_d: float
    tau_nack: float = 0.0
    alpha: float = 0.0
    tau_total: float | None = None
    nack_every_attempt: bool = False
    avg_includes_dropped: bool = False

    def __post_init__(self):
        problems = []
        for name in ("tau_p", "tau_d", "tau_nack", "alpha"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and not isinstance(value, bool)
                    and math.isfinite(value) and value >= 0.0):
                problems.append(f"{name}: must be a finite nonnegative real, "
                                f"got {value!r}")
        if self.tau_total is not None:
            ok = (isinstance(self.tau_total, (int, float))
                  and not isinstance(self.tau_total, bool)
                  and math.isfinite(self.tau_total) and self.tau_total > 0.0)
            if not ok:
                problems.append(f"tau_total: must be a positive real or omitted, "
                                f"got {self.tau_total!r}")
            elif not problems and self.attempt_time > 0.0 \
                    and self.tau_total < self.attempt_time:
                problems.append("tau_total: deadline shorter than a single attempt")
        for name in ("nack_every_attempt", "avg_includes_dropped"):
            if not isinstance(getattr(self, name), bool):
                problems.append(f"{name}: must be a boolean")
        if problems:
            raise ValidationError(problems)

    @property
    def attempt_time(self) -> float:
        return self.tau_p + self.tau_d


class PacketStatus(Enum):
    DELIVERED = "delivered"
    DROPPED = "dropped"


@dataclass(frozen=True)
class PacketOutcome:
    status: PacketStatus
    total_delay: float
    attempts_used: tuple
    drop_hop: int | None = None

    def __post_init__(self):
        if (self.status is PacketStatus.DELIVERED) != (self.drop_hop is None):
            raise DomainError("drop_hop must be set exactly when a packet drops")


@dataclass(frozen=True)
class EnsembleMetrics:
    """Aggregated simulation results.

    delay_profile maps each distinct delivered-packet delay to its fraction
    of ALL packets, so the fractions sum to the delivered fraction.  eta is
    NaN when no packet dropped (ratio undefined); avg_delay is NaN when no
    packet was delivered (unless dropped packets are averaged in).
    """

    n_packets: int
    p_drop_count: int
    p_deadline_count: int
    avg_delay: float
    eta: float
    pdv: float
    delay_profile: dict
    deadline: float

    @property
    def delivered_count(self) -> int:
        return self.n_packets - self.p_drop_count


@dataclass(frozen=True)
class DelayProfile:
    """(delay, percent) bins ascending, with the deadline and late mass."""

    bins: tuple
    deadline: float
    w_deadline_percent: float


def derive_qsum(delays: DelayParams) -> int:
    """Total attempt budget bought by the deadline: floor(tau_total / T).

    NACK and counter-crypto overheads are deliberately excluded — q_sum is
    sized from transmission time alone, which is exactly why those
    overheads can push real delays past the deadline.
    """
    if delays.tau_total is None:
        raise DomainError("tau_total is required to derive q_sum")
    step = delays.attempt_time
    if step <= 0.0:
        raise DomainError("tau_p + tau_d must be positive to derive q_sum")
    # Guard against 11.999999999999998-style division artifacts at exact
    # multiples before flooring.
    q_sum = math.floor((delays.tau_total / step) * (1.0 + _DEADLINE_SLACK))
    if q_sum < 1:
        raise InfeasibleError("deadline shorter than a single attempt")
    return q_sum


def _delay_from_counts(attempts, successes, relays, delays: DelayParams):
    """Closed-form delay; works on scalars and numpy arrays alike."""
    step = delays.attempt_time
    nack_units = attempts if delays.nack_every_attempt else attempts - successes
    return attempts * step + nack_units * delays.tau_nack \
        + relays * (delays.alpha * step)


def _check_sim_args(network, alloc, strategy) -> None:
    if alloc.hop_count != network.hop_count:
        raise DomainError(
            f"alloc has {alloc.hop_count} hops, network has {network.hop_count}"
        )
    if strategy is not Strategy.FULLY_CUMULATIVE and any(q < 1 for q in alloc.q):
        raise DomainError(
            f"{strategy.value} needs at least one attempt per hop"
        )


def simulate_packet(
    network: NetworkConfig,
    alloc: ArqAllocation,
    fading: FadingMode,
    strategy: Strategy,
    delays: DelayParams,
    rng: np.random.Generator,
) -> PacketOutcome:
    """Walk one packet through the chain, drawing gains as needed.

    Reference implementation with per-attempt draws; run_ensemble uses a
    vectorized engine with a different (fixed-shape) draw pattern, so the
    two agree statistically, not draw-for-draw.
    """
    _check_sim_args(network, alloc, strategy)
    n = network.hop_count
    phi = (2.0 ** network.rate - 1.0) / network.snr
    cumulative = strategy is Strategy.FULLY_CUMULATIVE

    attempts_used = [0] * n
    carry = 0
    drop_hop = None
    for k in range(1, n + 1):
        c = network.los[k - 1]
        budget = alloc.q[k - 1] + (carry if cumulative else 0)
        success = False
        used = 0
        if budget > 0:
            if strategy is Strategy.TYPE1:
                # No-combining baseline: every retransmission is an
                # independent round, in either fading mode.
                while used < budget:
                    used += 1
                    if sample_channel_gain(c, rng) >= phi:
                        success = True
                        break
            elif fading is FadingMode.SLOW:
                gain = sample_channel_gain(c, rng)
                if gain > 0.0 and phi / gain <= budget:
                    success = True
                    used = math.ceil(phi / gain)
                else:
                    used = budget
            else:
                total_gain = 0.0
                while used < budget:
                    used += 1
                    total_gain += sample_channel_gain(c, rng)
                    if total_gain >= phi:
                        success = True
                        break
        attempts_used[k - 1] = used
        if cumulative:
            carry = budget - used if success else 0
        if not success:
            drop_hop = k
            break

    delivered = drop_hop is None
    attempts = sum(attempts_used)
    successes = n if delivered else drop_hop - 1
    if cumulative:
        relays = (n - 1) if delivered else drop_hop - 1
    else:
        relays = 0
    delay = _delay_from_counts(attempts, successes, relays, delays)
    return PacketOutcome(
        status=PacketStatus.DELIVERED if delivered else PacketStatus.DROPPED,
        total_delay=float(delay),
        attempts_used=tuple(attempts_used),
        drop_hop=drop_hop,
    )


def _budget_caps(q, cumulative: bool):
    # Largest budget hop k can ever see (fixes per-hop draw widths).
    if not cumulative:
        return list(q)
    caps = []
    carry_cap = 0
    for qk in q:
        cap = qk + carry_cap
        caps.append(cap)
        carry_cap = max(cap - 1, 0)
    return caps


def _simulate_block(network, q, fading, strategy, caps, size, rng):
    """Vectorized walk of `size` packets; returns integer outcome arrays."""
    n = len(q)
    phi = (2.0 ** network.rate - 1.0) / network.snr
    cumulative = strategy is Strategy.FULLY_CUMULATIVE

    alive = np.ones(size, dtype=bool)
    carry = np.zeros(size, dtype=np.int64)
    attempts_total = np.zeros(size, dtype=np.int64)
    drop_hop = np.zeros(size, dtype=np.int16)

    for k in range(1, n + 1):
        c = network.los[k - 1]
        if cumulative:
            budget = q[k - 1] + carry
        else:
            budget = np.full(size, q[k - 1], dtype=np.int64)
        width = caps[k - 1]

        if strategy is not Strategy.TYPE1 and fading is FadingMode.SLOW:
            gains = sample_channel_gains(c, rng, size)
            with np.errstate(divide="ignore"):
                needed = np.ceil(phi / gains)
        elif width == 0:
            needed = np.full(size, np.inf)
        else:
            # Type-1 redraws per attempt in either fading mode: the
            # baseline decodes every retransmission independently.
            gains = sample_channel_gains(c, rng, (size, width))
            if strategy is Strategy.TYPE1:
                crossed = gains >= phi
            else:
                crossed = np.cumsum(gains, axis=1) >= phi
            first = crossed.argmax(axis=1) + 1
            needed = np.where(crossed.any(axis=1), first, np.inf)

        success = alive & (needed <= budget)
        # inf marks "no success possible"; zero it before the int cast
        needed_int = np.where(success, needed, 0.0).astype(np.int64)
        attempts = np.where(alive, np.where(success, needed_int, budget), 0)
        attempts_total += attempts
        if cumulative:
            carry = np.where(success, budget - attempts, 0)
        newly_dropped = alive & ~success
        drop_hop = np.where(newly_dropped, np.int16(k), drop_hop)
        alive &= success

    return attempts_total, drop_hop


def _block_stats(network, alloc, fading, strategy, delays, caps, size, seed_child):
    rng = np.random.Generator(np.random.PCG64(seed_child))
    attempts_total, drop_hop = _simulate_block(
        network, alloc.q, fading, strategy, caps, size, rng
    )
    n = network.hop_count
    delivered = drop_hop == 0
    counts = np.bincount(
        attempts_total[delivered], minlength=alloc.q_sum + 1
    ).astype(np.int64)

    dropped = ~delivered
    drop_count = int(dropped.sum())
    cumulative = strategy is Strategy.FULLY_CUMULATIVE
    successes_d = drop_hop[dropped].astype(np.int64) - 1
    relays_d = successes_d if cumulative else np.zeros_like(successes_d)
    drop_delay_sum = float(
        np.sum(
            _delay_from_counts(
                attempts_total[dropped], successes_d, relays_d, delays
            )
        )
    )
    return counts, drop_count, drop_delay_sum


def run_ensemble(
    network: NetworkConfig,
    alloc: ArqAllocation,
    fading: FadingMode,
    strategy: Strategy,
    delays: DelayParams,
    n_packets: int,
    seed: int,
    workers: int = 1,
) -> EnsembleMetrics:
    """Simulate n_packets packets and aggregate the delay/violation metrics.

    Deterministic for a fixed (seed, spec); the worker count only changes
    how blocks are scheduled, never the result.
    """
    _check_sim_args(network, alloc, strategy)
    if isinstance(n_packets, bool) or not isinstance(n_packets, int) or n_packets < 1:
        raise DomainError(f"n_packets must be a positive integer, got {n_packets!r}")
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise DomainError(f"seed must be a nonnegative integer, got {seed!r}")
    if isinstance(workers, bool) or not isinstance(workers, int) or workers < 1:
        raise DomainError(f"workers must be a positive integer, got {workers!r}")

    n = network.hop_count
    q_sum = alloc.q_sum
    step = delays.attempt_time
    deadline = delays.tau_total if delays.tau_total is not None else q_sum * step
    caps = _budget_caps(alloc.q, strategy is Strategy.FULLY_CUMULATIVE)

    sizes = [BLOCK_SIZE] * (n_packets // BLOCK_SIZE)
    if n_packets % BLOCK_SIZE:
        sizes.append(n_packets % BLOCK_SIZE)
    children = np.random.SeedSequence(seed).spawn(len(sizes))

    def work(i):
        return _block_stats(
            network, alloc, fading, strategy, delays, caps, sizes[i], children[i]
        )

    if workers == 1 or len(sizes) == 1:
        partials = [work(i) for i in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(work, range(len(sizes))))

    counts = np.zeros(q_sum + 1, dtype=np.int64)
    drop_count = 0
    for block_counts, block_drops, _ in partials:
        counts += block_counts
        drop_count += block_drops
    drop_delay_total = math.fsum(p[2] for p in partials)

    delivered_count = n_packets - drop_count
    attempts_axis = np.arange(q_sum + 1, dtype=np.int64)
    relays = (n - 1) if strategy is Strategy.FULLY_CUMULATIVE else 0
    delay_axis = _delay_from_counts(attempts_axis, n, relays, delays)
    late_mask = delay_axis > deadline * (1.0 + _DEADLINE_SLACK)
    late_count = int(counts[late_mask].sum())
    delivered_delay_total = float(np.dot(counts, delay_axis))

    if delays.avg_includes_dropped:
        avg_delay = (delivered_delay_total + drop_delay_total) / n_packets
    elif delivered_count > 0:
        avg_delay = delivered_delay_total / delivered_count
    else:
        avg_delay = math.nan
    eta = (drop_count + late_count) / drop_count if drop_count > 0 else math.nan
    pdv = (drop_count + late_count) / n_packets
    profile = {
        float(delay_axis[a]): counts[a] / n_packets
        for a in range(q_sum + 1)
        if counts[a] > 0
    }
    return EnsembleMetrics(
        n_packets=n_packets,
        p_drop_count=drop_count,
        p_deadline_count=late_count,
        avg_delay=avg_delay,
        eta=eta,
        pdv=pdv,
        delay_profile=profile,
        deadline=deadline,
    )


def delay_profile(metrics: EnsembleMetrics) -> DelayProfile:
    """Histogram export: ascending (delay, percent) bins plus late mass."""
    bins = tuple(
        (delay, fraction * 100.0)
        for delay, fraction in sorted(metrics.delay_profile.items())
    )
    threshold = metrics.deadline * (1.0 + _DEADLINE_SLACK)
    w_deadline = sum(pct for delay, pct in bins if delay > threshold)
    return DelayProfile(
        bins=bins, deadline=metrics.deadline, w_deadline_percent=w_deadline
    )
