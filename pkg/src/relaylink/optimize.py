"""ARQ budget allocation across hops.

Search back-ends for minimizing packet-drop probability under a total
attempt budget q_sum:

* exhaustive_search      — enumerate every composition (capped).
* list_algorithm_sf      — slow fading: solve the real-valued relaxation
                           q_k proportional to sqrt(sf_coeff_k), round up,
                           and repair the overshoot along Hamming
                           neighborhoods, pruned by the LOS-ordering rule.
* ftml_ff                — fast fading: fold a bisection over the Stirling
                           matching value D(m) = sqrt(m) (m/(e B))^m to
                           build a short candidate list.
* fully_cumulative_optimal — closed form [q_sum, 0, ..., 0].
* local_minima_check     — certify that no single-attempt transfer between
                           two hops improves the approximate objective,
                           via closed-form inequality pairs; a direct
                           variant evaluates every Hamming-2 neighbor.

All tie-breaks are lexicographic on the allocation vector so results are
deterministic.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from itertools import combinations

import numpy as np

from .errors import DomainError, InfeasibleError, SearchSpaceError
from .link import Exactness, FadingMode, NetworkConfig, derive_all
from .pdp import ArqAllocation, PdpQuery, Strategy, evaluate_pdp

__all__ = [
    "SearchSpace",
    "Provenance",
    "CandidateList",
    "LocalMinimaCertificate",
    "compositions",
    "exhaustive_search",
    "relaxed_split",
    "relaxed_split_matrix",
    "relaxed_solution_sf",
    "relaxed_solution_sf_matrix",
    "list_algorithm_sf",
    "ftml_matching_value",
    "ftml_matching_value_log",
    "ftml_ff",
    "fully_cumulative_optimal",
    "uniform_allocation",
    "hamming2_neighbors",
    "local_minima_check",
    "local_minima_check_direct",
]

_REL_SLACK = 1e-9  # comparison slack for certificate inequalities


def _check_count(name: str, value: int, minimum: int = 1) -> None:
    if isinstance(value, bool) or not isinstance(value, int):
        raise DomainError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise DomainError(f"{name} must be >= {minimum}, got {value}")


@dataclass(frozen=True)
class SearchSpace:
    """All allocations with q_k >= 1 summing to q_sum over `hops` hops."""

    hops: int
    q_sum: int

    def __post_init__(self):
        _check_count("hops", self.hops)
        _check_count("q_sum", self.q_sum)
        if self.q_sum < self.hops:
            raise InfeasibleError(
                f"q_sum={self.q_sum} cannot give every one of {self.hops} hops "
                "an attempt"
            )

    @property
    def cardinality(self) -> int:
        return math.comb(self.q_sum - 1, self.hops - 1)


class Provenance(Enum):
    EXHAUSTIVE = "exhaustive"
    LIST_SF = "list-sf"
    FTML_FF = "ftml-ff"


@dataclass(frozen=True)
class CandidateList:
    entries: tuple
    provenance: Provenance

    def __post_init__(self):
        if len(set(e.q for e in self.entries)) != len(self.entries):
            raise DomainError("candidate list contains duplicates")

    @property
    def size(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class LocalMinimaCertificate:
    """Result of a local-minima test; pairs are 1-based hop indices."""

    alloc: ArqAllocation
    satisfied: bool
    violated_pairs: tuple

    def __post_init__(self):
        if self.satisfied != (len(self.violated_pairs) == 0):
            raise DomainError("certificate satisfied flag contradicts pair list")


def compositions(q_sum: int, hops: int, min_value: int = 1):
    """Yield all integer vectors >= min_value summing to q_sum, ascending."""
    if hops == 1:
        if q_sum >= min_value:
            yield (q_sum,)
        return
    for first in range(min_value, q_sum - min_value * (hops - 1) + 1):
        for rest in compositions(q_sum - first, hops - 1, min_value):
            yield (first,) + rest


def _objective(network, alloc, fading, exactness, strategy) -> float:
    return evaluate_pdp(
        PdpQuery(
            network=network,
            alloc=alloc,
            fading=fading,
            strategy=strategy,
            exactness=exactness,
        )
    )


def exhaustive_search(
    network: NetworkConfig,
    q_sum: int,
    fading: FadingMode,
    exactness: Exactness = Exactness.EXACT,
    strategy: Strategy = Strategy.NON_CUMULATIVE,
    cap: int = 10_000_000,
):
    """Minimize PDP over every feasible allocation; ties go lexicographic.

    Fully-cumulative search runs over weak compositions (zeros allowed);
    the other strategies require one attempt per hop.  Spaces larger than
    `cap` are refused — use list_algorithm_sf / ftml_ff instead.
    """
    n = network.hop_count
    if strategy is Strategy.FULLY_CUMULATIVE:
        _check_count("q_sum", q_sum)
        count = math.comb(q_sum + n - 1, n - 1)
        min_value = 0
    else:
        count = SearchSpace(n, q_sum).cardinality
        min_value = 1
    if count > cap:
        raise SearchSpaceError(
            f"{count} allocations exceed the enumeration cap ({cap}); "
            "use list_algorithm_sf or ftml_ff"
        )
    best_alloc = None
    best_value = math.inf
    for q in compositions(q_sum, n, min_value):
        alloc = ArqAllocation(q)
        value = _objective(network, alloc, fading, exactness, strategy)
        if value < best_value:
            best_alloc, best_value = alloc, value
    return best_alloc, best_value


def relaxed_split(coeffs, q_sum: int):
    """Real budget split proportional to sqrt(coeff), closed form."""
    _check_count("q_sum", q_sum)
    if any(k <= 0.0 for k in coeffs):
        raise DomainError("relaxation needs positive per-hop coefficients")
    roots = [math.sqrt(k) for k in coeffs]
    total = sum(roots)
    return [q_sum * r / total for r in roots]


def relaxed_split_matrix(coeffs, q_sum: int):
    """Same split via the chained-ratio linear system (cross-check path).

    Rows 1..N-1 encode q_{j+1} = sqrt(K_{j+1}/K_j) q_j; the last row is the
    budget constraint.  Kept alongside the closed form so the two can be
    compared in tests.
    """
    _check_count("q_sum", q_sum)
    if any(k <= 0.0 for k in coeffs):
        raise DomainError("relaxation needs positive per-hop coefficients")
    n = len(coeffs)
    system = np.zeros((n, n))
    for j in range(n - 1):
        system[j, j] = -math.sqrt(coeffs[j + 1] / coeffs[j])
        system[j, j + 1] = 1.0
    system[n - 1, :] = 1.0
    rhs = np.zeros(n)
    rhs[n - 1] = q_sum
    return [float(x) for x in np.linalg.solve(system, rhs)]


def relaxed_solution_sf(network: NetworkConfig, q_sum: int):
    """Real-valued slow-fading relaxation: q_k proportional to sqrt(K_k)."""
    return relaxed_split([link.sf_coeff for link in derive_all(network)], q_sum)


def relaxed_solution_sf_matrix(network: NetworkConfig, q_sum: int):
    """Linear-system route of the slow-fading relaxation (cross-check)."""
    return relaxed_split_matrix(
        [link.sf_coeff for link in derive_all(network)], q_sum
    )


def _ordering_ok(q, los) -> bool:
    # Discard allocations granting a strictly better hop strictly more
    # attempts: q_j > q_i while c_i < c_j is never optimal.  Ties pass.
    n = len(q)
    for i in range(n):
        for j in range(n):
            if los[i] < los[j] and q[j] > q[i]:
                return False
    return True


def list_algorithm_sf(network: NetworkConfig, q_sum: int):
    """Candidate-list search for slow fading.

    Rounds the relaxation up, then repairs the overshoot E by subtracting
    one attempt at every choice of E distinct hops, keeps the allocations
    respecting the LOS ordering rule (falling back to the unfiltered set
    if none survive), and returns the one minimizing the approximate PDP.
    """
    space = SearchSpace(network.hop_count, q_sum)
    n = space.hops
    los = network.los
    rounded = [max(1, math.ceil(x)) for x in relaxed_solution_sf(network, q_sum)]
    excess = sum(rounded) - q_sum

    if excess == 0:
        raw = [tuple(rounded)]
    elif excess > 0:
        raw = []
        for positions in combinations(range(n), excess):
            trial = list(rounded)
            for i in positions:
                trial[i] -= 1
            if all(v >= 1 for v in trial):
                raw.append(tuple(trial))
        if not raw:
            # Overshoot sits on hops already at 1 attempt (extreme LOS
            # asymmetry): peel repeatedly from the largest entry instead.
            trial = list(rounded)
            for _ in range(excess):
                i = max(range(n), key=lambda t: trial[t])
                trial[i] -= 1
            raw = [tuple(trial)]
    else:
        deficit = -excess  # float rounding artifact; theory gives E >= 0
        if deficit > n:
            raise SearchSpaceError(f"relaxation undershoot {deficit} exceeds hops")
        order = sorted(range(n), key=lambda i: (los[i], i))
        trial = list(rounded)
        for i in order[:deficit]:
            trial[i] += 1
        raw = [tuple(trial)]

    kept = [q for q in raw if _ordering_ok(q, los)]
    final = kept if kept else raw
    entries = tuple(ArqAllocation(q) for q in sorted(final))
    best_alloc = None
    best_value = math.inf
    for alloc in entries:
        value = _objective(
            network, alloc, FadingMode.SLOW, Exactness.APPROX,
            Strategy.NON_CUMULATIVE,
        )
        if value < best_value:
            best_alloc, best_value = alloc, value
    return CandidateList(entries, Provenance.LIST_SF), best_alloc, best_value


def ftml_matching_value(m: int, coeff: float) -> float:
    """Stirling matching value sqrt(m) (m/(e coeff))^m, evaluated directly."""
    _check_count("m", m)
    return math.sqrt(m) * (m / (math.e * coeff)) ** m


def ftml_matching_value_log(m: int, coeff: float) -> float:
    """log of the matching value; safe for arguments that overflow directly."""
    _check_count("m", m)
    return 0.5 * math.log(m) + m * (math.log(m) - 1.0 - math.log(coeff))


def _log_abs_diff(log_x: float, log_y: float) -> float:
    """log(|e^x - e^y|) without leaving the log domain."""
    if log_x == log_y:
        return -math.inf
    hi, lo = max(log_x, log_y), min(log_x, log_y)
    return hi + math.log1p(-math.exp(lo - hi))


def ftml_ff(network: NetworkConfig, q_sum: int):
    """Fold-to-make-list search for fast fading.

    For every value of the first hop's budget, the remaining budgets are
    matched one hop at a time by folding a bracket around the target
    matching value (interval halving on the discrete grid); row sums are
    then repaired to q_sum by +/-1 edits at distinct positions.  The
    matching value is monotone in m only when coeff < 1/e (high SNR); below
    that a linear scan replaces the fold and a warning is issued.
    """
    space = SearchSpace(network.hop_count, q_sum)
    n = space.hops
    coeffs = [link.ff_coeff for link in derive_all(network)]
    top = q_sum - (n - 1)
    if any(b >= 1.0 / math.e for b in coeffs):
        warnings.warn(
            "fast-fading matching value is not monotone at this SNR; "
            "falling back to linear scans",
            RuntimeWarning,
            stacklevel=2,
        )

    def match_budget(target_log: float, coeff: float) -> int:
        if coeff < 1.0 / math.e and top >= 2:
            lo_m, hi_m = 1, top
            while hi_m - lo_m >= 2:
                d_lo = _log_abs_diff(ftml_matching_value_log(lo_m, coeff), target_log)
                d_hi = _log_abs_diff(ftml_matching_value_log(hi_m, coeff), target_log)
                mid = (lo_m + hi_m) // 2
                if d_lo >= d_hi:
                    lo_m = mid
                else:
                    hi_m = mid
            d_lo = _log_abs_diff(ftml_matching_value_log(lo_m, coeff), target_log)
            d_hi = _log_abs_diff(ftml_matching_value_log(hi_m, coeff), target_log)
            return lo_m if d_lo <= d_hi else hi_m
        best_m, best_d = 1, math.inf
        for m in range(1, top + 1):
            d = _log_abs_diff(ftml_matching_value_log(m, coeff), target_log)
            if d < best_d:
                best_m, best_d = m, d
        return best_m

    rows = []
    for q1 in range(1, top + 1):
        target_log = ftml_matching_value_log(q1, coeffs[0])
        row = [q1]
        for j in range(1, n):
            row.append(match_budget(target_log, coeffs[j]))
        rows.append(tuple(row))

    candidates = set()
    for row in rows:
        imbalance = sum(row) - q_sum
        if imbalance == 0:
            candidates.add(row)
            continue
        edits = abs(imbalance)
        if edits > n:
            continue
        delta = -1 if imbalance > 0 else 1
        for positions in combinations(range(n), edits):
            trial = list(row)
            for i in positions:
                trial[i] += delta
            if all(v >= 1 for v in trial):
                candidates.add(tuple(trial))
    if not candidates:
        raise SearchSpaceError("candidate expansion produced no feasible allocation")

    entries = tuple(ArqAllocation(q) for q in sorted(candidates))
    best_alloc = None
    best_value = math.inf
    for alloc in entries:
        value = _objective(
            network, alloc, FadingMode.FAST, Exactness.APPROX,
            Strategy.NON_CUMULATIVE,
        )
        if value < best_value:
            best_alloc, best_value = alloc, value
    return CandidateList(entries, Provenance.FTML_FF), best_alloc, best_value


def fully_cumulative_optimal(q_sum: int, hops: int) -> ArqAllocation:
    """Optimal fully-cumulative allocation: everything on the first hop."""
    _check_count("q_sum", q_sum)
    _check_count("hops", hops)
    return ArqAllocation((q_sum,) + (0,) * (hops - 1))


def uniform_allocation(q_sum: int, hops: int, los=None) -> ArqAllocation:
    """Near-uniform split: |q_i - q_j| <= 1, remainder to lowest-LOS hops.

    Without a LOS vector the remainder goes to the leading hops.
    """
    SearchSpace(hops, q_sum)  # validates q_sum >= hops
    base, rem = divmod(q_sum, hops)
    q = [base] * hops
    if rem:
        if los is not None:
            if len(los) != hops:
                raise DomainError(f"los has {len(los)} entries for {hops} hops")
            order = sorted(range(hops), key=lambda i: (los[i], i))
        else:
            order = list(range(hops))
        for i in order[:rem]:
            q[i] += 1
    return ArqAllocation(tuple(q))


def hamming2_neighbors(q):
    """All budget vectors differing from q in exactly two positions.

    Every neighbor moves some delta >= 1 attempts from a donor hop i to a
    receiver hop j, keeping q_i - delta >= 1; yields (i, j, neighbor) with
    0-based indices.
    """
    n = len(q)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            for delta in range(1, q[i]):
                neighbor = list(q)
                neighbor[i] -= delta
                neighbor[j] += delta
                yield i, j, tuple(neighbor)


def _poisson_weight(coeff: float, m: int) -> float:
    # coeff^m / m! without intermediate overflow
    return math.exp(m * math.log(coeff) - math.lgamma(m + 1))


def _sf_pair_ok(ki: float, kj: float, qi: int, qj: int) -> bool:
    scale = qj * qj * ki + qi * qi * kj + ki + kj + ki * kj
    slack = _REL_SLACK * scale
    if qj >= 2:
        # moving one attempt from hop j to hop i must not help
        bound = -kj * ki + qi * qi * kj + qi * (kj - kj * ki)
        if qj * qj * ki - qj * (ki + kj * ki) - bound > slack:
            return False
    if qi >= 2:
        # nor may moving one attempt from hop i to hop j
        bound = kj * ki + qi * qi * kj - qi * (kj + kj * ki)
        if qj * qj * ki + qj * (ki - kj * ki) - bound < -slack:
            return False
    return True


def _ff_pair_ok(bi: float, bj: float, qi: int, qj: int) -> bool:
    if qj >= 2:
        w_i = _poisson_weight(bi, qi)
        w_j = _poisson_weight(bj, qj - 1)
        lhs = w_i * (1.0 - bi / (qi + 1)) + w_j * (bj / qj - 1.0)
        rhs = w_i * w_j * (bj / qj - bi / (qi + 1))
        slack = _REL_SLACK * (abs(lhs) + abs(rhs) + w_i + w_j)
        if lhs > rhs + slack:
            return False
    if qi >= 2:
        w_i = _poisson_weight(bi, qi - 1)
        w_j = _poisson_weight(bj, qj)
        lhs = w_i * (1.0 - bi / qi) + w_j * (bj / (qj + 1) - 1.0)
        rhs = w_i * w_j * (bj / (qj + 1) - bi / qi)
        slack = _REL_SLACK * (abs(lhs) + abs(rhs) + w_i + w_j)
        if lhs < rhs - slack:
            return False
    return True


def _check_alloc_for_minima(alloc: ArqAllocation, network: NetworkConfig) -> None:
    if alloc.hop_count != network.hop_count:
        raise DomainError(
            f"alloc has {alloc.hop_count} hops, network has {network.hop_count}"
        )
    if any(qk < 1 for qk in alloc.q):
        raise DomainError("local-minima checks need at least one attempt per hop")


def local_minima_check(
    alloc: ArqAllocation, network: NetworkConfig, fading: FadingMode
) -> LocalMinimaCertificate:
    """Certify stability against single-attempt transfers between hop pairs.

    Uses the closed-form inequality pair per ordered hop pair (i, j): one
    inequality rules out improving by moving an attempt from j to i, the
    other from i to j.  Each applies only when the corresponding neighbor
    stays feasible.  A violated pair (i, j) means some one-attempt transfer
    between hops i and j lowers the approximate PDP.
    """
    _check_alloc_for_minima(alloc, network)
    links = derive_all(network)
    if fading is FadingMode.SLOW:
        coeffs = [link.sf_coeff for link in links]
        pair_ok = _sf_pair_ok
    else:
        coeffs = [link.ff_coeff for link in links]
        pair_ok = _ff_pair_ok
    q = alloc.q
    violated = []
    n = len(q)
    for i in range(n):
        for j in range(n):
            if i != j and not pair_ok(coeffs[i], coeffs[j], q[i], q[j]):
                violated.append((i + 1, j + 1))
    return LocalMinimaCertificate(alloc, not violated, tuple(violated))


def local_minima_check_direct(
    alloc: ArqAllocation, network: NetworkConfig, fading: FadingMode
) -> LocalMinimaCertificate:
    """Stability by brute force: evaluate every Hamming-2 neighbor.

    Unlike the inequality certificate this also covers transfers of more
    than one attempt at a time.  A violated pair (i, j) means some transfer
    from hop i to hop j strictly improves the approximate PDP.
    """
    _check_alloc_for_minima(alloc, network)
    base = _objective(
        network, alloc, fading, Exactness.APPROX, Strategy.NON_CUMULATIVE
    )
    violated = set()
    for i, j, neighbor in hamming2_neighbors(alloc.q):
        value = _objective(
            network,
            ArqAllocation(neighbor),
            fading,
            Exactness.APPROX,
            Strategy.NON_CUMULATIVE,
        )
        if value < base - _REL_SLACK * max(base, value):
            violated.add((i + 1, j + 1))
    pairs = tuple(sorted(violated))
    return LocalMinimaCertificate(alloc, not pairs, pairs)
