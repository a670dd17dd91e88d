"""End-to-end packet-drop probability of an N-hop relay chain.

Three delivery strategies are evaluated analytically:

* non-cumulative  — every hop owns a fixed attempt budget; unused attempts
  are wasted.  The chain drops a packet iff some hop exhausts its budget,
  so PDP has product form over per-hop outages.
* fully-cumulative — a counter in the packet carries unused attempts
  downstream.  PDP follows a first-passage recursion over (hop, budget).
* type-1          — like non-cumulative but the receiver never combines
  retransmissions, so each attempt stands alone.

The product form is accumulated as P1 + sum_k P_k prod_{j<k}(1-P_j), which
keeps full relative precision when the per-hop outages are tiny.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .errors import DomainError, ValidationError
from .link import (
    Exactness,
    FadingMode,
    NetworkConfig,
    derive_all,
    outage_ff,
    outage_sf,
    outage_type1,
)
from .marcum import DEFAULT_CONTROL, SeriesControl

__all__ = [
    "Strategy",
    "ArqAllocation",
    "PdpQuery",
    "pdp_noncumulative",
    "pdp_fully_cumulative",
    "pdp_type1",
    "evaluate_pdp",
]


class Strategy(Enum):
    NON_CUMULATIVE = "non-cumulative"
    FULLY_CUMULATIVE = "fully-cumulative"
    TYPE1 = "type1"


@dataclass(frozen=True, order=True)
class ArqAllocation:
    """Per-hop attempt budgets.  Entries are nonnegative ints, total >= 1."""

    q: tuple

    def __post_init__(self):
        q = tuple(self.q)
        object.__setattr__(self, "q", q)
        problems = []
        if len(q) < 1:
            problems.append("q: at least one hop is required")
        for k, qk in enumerate(q, start=1):
            if isinstance(qk, bool) or not isinstance(qk, int):
                problems.append(f"q[{k}]: budgets must be integers, got {qk!r}")
            elif qk < 0:
                problems.append(f"q[{k}]: budgets must be nonnegative, got {qk}")
        if not problems and sum(q) < 1:
            problems.append("q: at least one attempt across the chain is required")
        if problems:
            raise ValidationError(problems)

    @property
    def q_sum(self) -> int:
        return sum(self.q)

    @property
    def hop_count(self) -> int:
        return len(self.q)

    def __str__(self):
        return "[" + ",".join(str(qk) for qk in self.q) + "]"


@dataclass(frozen=True)
class PdpQuery:
    """One PDP evaluation request: network, allocation, and mode switches."""

    network: NetworkConfig
    alloc: ArqAllocation
    fading: FadingMode
    strategy: Strategy
    exactness: Exactness = Exactness.EXACT
    ctrl: SeriesControl = field(default=DEFAULT_CONTROL, compare=False)

    def __post_init__(self):
        problems = []
        if self.alloc.hop_count != self.network.hop_count:
            problems.append(
                f"alloc has {self.alloc.hop_count} hops, "
                f"network has {self.network.hop_count}"
            )
        if (
            self.strategy is Strategy.FULLY_CUMULATIVE
            and self.exactness is not Exactness.EXACT
        ):
            problems.append(
                "fully-cumulative PDP has no approximate form; use exact"
            )
        if self.strategy is Strategy.TYPE1 and self.exactness is not Exactness.EXACT:
            problems.append("type-1 PDP has no approximate form; use exact")
        if problems:
            raise ValidationError(problems)


def _require_positive_budgets(alloc: ArqAllocation, what: str) -> None:
    zero_hops = [k for k, qk in enumerate(alloc.q, start=1) if qk == 0]
    if zero_hops:
        raise DomainError(
            f"{what} needs at least one attempt per hop; "
            f"zero budget at hop(s) {zero_hops}"
        )


def _chain_drop(per_hop) -> float:
    """P1 + P2(1-P1) + P3(1-P1)(1-P2) + ... for per-hop outages in [0,1]."""
    total = 0.0
    survive = 1.0
    for p in per_hop:
        total += p * survive
        survive *= 1.0 - p
    return min(total, 1.0)


def pdp_noncumulative(query: PdpQuery) -> float:
    """Packet-drop probability when every hop keeps its own budget.

    Uses the slow- or fast-fading chase-combining outage per hop; in
    approximate mode the per-hop outage is clamped to [0,1] before the
    product form so the result stays a probability.
    """
    if query.strategy is not Strategy.NON_CUMULATIVE:
        raise DomainError(f"query strategy is {query.strategy}, expected non-cumulative")
    _require_positive_budgets(query.alloc, "non-cumulative evaluation")
    links = derive_all(query.network)
    hop_outage = outage_sf if query.fading is FadingMode.SLOW else outage_ff
    per_hop = [
        hop_outage(link, qk, query.exactness, query.ctrl)
        for link, qk in zip(links, query.alloc.q)
    ]
    return _chain_drop(per_hop)


def pdp_fully_cumulative(query: PdpQuery) -> float:
    """Packet-drop probability with residual attempts carried downstream.

    Evaluated by first-passage decomposition: with m attempts available at
    hop k, the hop either exhausts them all (outage after m combined
    attempts) or first succeeds at attempt u, handing q_{k+1} + m - u
    attempts to the next hop.  "First success at u" has probability
    P_{k,u-1} - P_{k,u} because the combined SNR grows monotonically with
    each extra attempt.  P_{k,0} = 1 by convention and the walk starts at
    (hop 1, q_1); the table is memoized per call.
    """
    if query.strategy is not Strategy.FULLY_CUMULATIVE:
        raise DomainError(
            f"query strategy is {query.strategy}, expected fully-cumulative"
        )
    links = derive_all(query.network)
    hop_outage = outage_sf if query.fading is FadingMode.SLOW else outage_ff
    n = query.network.hop_count
    q = query.alloc.q
    ctrl = query.ctrl

    outage_memo: dict = {}

    def hop_drop(k: int, m: int) -> float:
        # Outage of hop k (1-based) after m combined attempts.
        if m == 0:
            return 1.0
        key = (k, m)
        if key not in outage_memo:
            outage_memo[key] = hop_outage(links[k - 1], m, Exactness.EXACT, ctrl)
        return outage_memo[key]

    drop_memo: dict = {}

    def drop_from(k: int, m: int) -> float:
        # Probability the packet never reaches the destination, given it
        # sits at hop k with m attempts available.
        if k == n + 1:
            return 0.0
        key = (k, m)
        cached = drop_memo.get(key)
        if cached is not None:
            return cached
        total = hop_drop(k, m)
        next_budget = q[k] if k < n else 0
        for u in range(1, m + 1):
            succ_at_u = hop_drop(k, u - 1) - hop_drop(k, u)
            if succ_at_u <= 0.0:
                continue
            total += succ_at_u * drop_from(k + 1, next_budget + m - u)
        total = min(max(total, 0.0), 1.0)
        drop_memo[key] = total
        return total

    return drop_from(1, q[0])


def pdp_type1(query: PdpQuery) -> float:
    """Packet-drop probability for plain ARQ: no combining across attempts."""
    if query.strategy is not Strategy.TYPE1:
        raise DomainError(f"query strategy is {query.strategy}, expected type1")
    _require_positive_budgets(query.alloc, "type-1 evaluation")
    links = derive_all(query.network)
    per_hop = [
        outage_type1(link, qk, query.ctrl)
        for link, qk in zip(links, query.alloc.q)
    ]
    return _chain_drop(per_hop)


_DISPATCH = {
    Strategy.NON_CUMULATIVE: pdp_noncumulative,
    Strategy.FULLY_CUMULATIVE: pdp_fully_cumulative,
    Strategy.TYPE1: pdp_type1,
}


def evaluate_pdp(query: PdpQuery) -> float:
    """Route a query to the evaluator matching its strategy."""
    return _DISPATCH[query.strategy](query)
