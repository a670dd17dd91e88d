"""Per-hop channel model: Rician gains and chase-combining outage.

Each hop k carries a Rician coefficient h = sqrt(c/2)(1+j) + sqrt((1-c)/2) g
with g standard complex normal (unit-variance real and imaginary parts), so
E[|h|^2] = 1 for every LOS fraction c in [0, 1).  Chase combining adds the
per-attempt SNR contributions, which turns link outage into Marcum-Q tails:

* slow fading   — one draw per hop, q attempts multiply its SNR by q:
                  P = 1 - Q_1(a, b/sqrt(q))
* fast fading   — a fresh draw per attempt, the q-fold sum is noncentral
                  chi-square with 2q degrees of freedom:
                  P = 1 - Q_q(sqrt(q) a, b)
* type-1 ARQ    — fresh draw per attempt but no combining: P = (P_1)^q

The high-SNR approximations collapse to sf_coeff/q and ff_coeff^q/q!, with
sf_coeff == ff_coeff == phi e^(-a^2/2)/(1-c) by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, ValidationError
from .marcum import DEFAULT_CONTROL, SeriesControl, marcum_q1, marcum_qm

__all__ = [
    "FadingMode",
    "Exactness",
    "NetworkConfig",
    "LinkDerived",
    "derive",
    "derive_all",
    "sample_channel_gain",
    "sample_channel_gains",
    "outage_sf",
    "outage_ff",
    "outage_type1",
    "outage_sf_approx_raw",
    "outage_ff_approx_raw",
]


class FadingMode(Enum):
    """How often the channel redraws: once per hop, or every attempt."""

    SLOW = "slow"
    FAST = "fast"


class Exactness(Enum):
    """Whether link outage uses the Marcum-Q series or its high-SNR form."""

    EXACT = "exact"
    APPROX = "approx"


@dataclass(frozen=True)
class NetworkConfig:
    """An N-hop decode-and-forward chain.

    los holds the per-hop Rician LOS fractions c_k (c = 0 is Rayleigh,
    c -> 1 the deterministic limit, rejected); rate is the target spectral
    efficiency in bits per channel use; snr is the average per-hop SNR as
    a linear power ratio.
    """

    los: tuple
    rate: float
    snr: float

    def __post_init__(self):
        problems = []
        los = tuple(float(c) for c in self.los)
        object.__setattr__(self, "los", los)
        if len(los) < 1:
            problems.append("los: at least one hop is required")
        for k, c in enumerate(los, start=1):
            if not math.isfinite(c) or c < 0.0 or c >= 1.0:
                problems.append(f"los[{k}]: need 0 <= c < 1, got {c!r}")
        if not (math.isfinite(self.rate) and self.rate > 0.0):
            problems.append(f"rate: must be a positive real, got {self.rate!r}")
        if not (math.isfinite(self.snr) and self.snr > 0.0):
            problems.append(f"snr: must be a positive linear ratio, got {self.snr!r}")
        if problems:
            raise ValidationError(problems)

    @property
    def hop_count(self) -> int:
        return len(self.los)


@dataclass(frozen=True)
class LinkDerived:
    """Constants of one hop feeding every outage formula.

    marcum_a / marcum_b are the Marcum-Q arguments of the single-attempt
    outage; phi = (2^R - 1)/snr is the decoding threshold on channel gain;
    sf_coeff scales the slow-fading approximation sf_coeff/q and ff_coeff
    is the base of the fast-fading approximation ff_coeff^q/q!.  The two
    coefficients are the same number, kept separately because they play
    different algebraic roles downstream.
    """

    los: float
    marcum_a: float
    marcum_b: float
    phi: float
    sf_coeff: float
    ff_coeff: float


def derive(cfg: NetworkConfig, k: int) -> LinkDerived:
    """Derived constants for hop k (1-based, 1 <= k <= N)."""
    if not 1 <= k <= cfg.hop_count:
        raise DomainError(f"hop index {k} outside 1..{cfg.hop_count}")
    c = cfg.los[k - 1]
    rest = 1.0 - c
    phi = (2.0 ** cfg.rate - 1.0) / cfg.snr
    a = math.sqrt(2.0 * c / rest)
    b = math.sqrt(2.0 * phi / rest)
    sf_coeff = phi * math.exp(-0.5 * a * a) / rest
    ff_coeff = phi * math.exp(-0.5 * a * a) / rest
    return LinkDerived(
        los=c, marcum_a=a, marcum_b=b, phi=phi, sf_coeff=sf_coeff, ff_coeff=ff_coeff
    )


def derive_all(cfg: NetworkConfig) -> tuple:
    return tuple(derive(cfg, k) for k in range(1, cfg.hop_count + 1))


def sample_channel_gain(c: float, rng: np.random.Generator) -> float:
    """One Rician power gain |h|^2 for LOS fraction c."""
    if not 0.0 <= c < 1.0:
        raise DomainError(f"need 0 <= c < 1, got {c!r}")
    los_amp = math.sqrt(0.5 * c)
    scatter = math.sqrt(0.5 * (1.0 - c))
    re = los_amp + scatter * rng.standard_normal()
    im = los_amp + scatter * rng.standard_normal()
    return re * re + im * im


def sample_channel_gains(c: float, rng: np.random.Generator, size) -> np.ndarray:
    """Vector of Rician power gains; consumes 2*size normal draws."""
    if not 0.0 <= c < 1.0:
        raise DomainError(f"need 0 <= c < 1, got {c!r}")
    los_amp = math.sqrt(0.5 * c)
    scatter = math.sqrt(0.5 * (1.0 - c))
    re = los_amp + scatter * rng.standard_normal(size)
    im = los_amp + scatter * rng.standard_normal(size)
    return re * re + im * im


def _check_attempts(q: int) -> None:
    if not isinstance(q, int) or isinstance(q, bool):
        raise DomainError(f"attempt count must be an integer, got {q!r}")
    if q <= 0:
        raise DomainError(f"attempt count must be positive, got {q}")


def outage_sf(
    link: LinkDerived,
    q: int,
    exactness: Exactness = Exactness.EXACT,
    ctrl: SeriesControl = DEFAULT_CONTROL,
) -> float:
    """Slow-fading outage after q chase-combined attempts on one draw."""
    _check_attempts(q)
    if exactness is Exactness.EXACT:
        return 1.0 - marcum_q1(link.marcum_a, link.marcum_b / math.sqrt(q), ctrl)
    return min(outage_sf_approx_raw(link, q), 1.0)


def outage_sf_approx_raw(link: LinkDerived, q: int) -> float:
    """Unclamped slow-fading approximation sf_coeff/q (optimizer algebra)."""
    _check_attempts(q)
    return link.sf_coeff / q


def outage_ff(
    link: LinkDerived,
    q: int,
    exactness: Exactness = Exactness.EXACT,
    ctrl: SeriesControl = DEFAULT_CONTROL,
) -> float:
    """Fast-fading outage after q chase-combined independent attempts."""
    _check_attempts(q)
    if exactness is Exactness.EXACT:
        return 1.0 - marcum_qm(q, math.sqrt(q) * link.marcum_a, link.marcum_b, ctrl)
    return min(outage_ff_approx_raw(link, q), 1.0)


def outage_ff_approx_raw(link: LinkDerived, q: int) -> float:
    """Unclamped fast-fading approximation ff_coeff^q / q!.

    Evaluated in log domain; overflow (possible only when ff_coeff > 1,
    i.e. far below the high-SNR regime) reports +inf rather than raising.
    """
    _check_attempts(q)
    log_val = q * math.log(link.ff_coeff) - math.lgamma(q + 1)
    try:
        return math.exp(log_val)
    except OverflowError:
        return math.inf


def outage_type1(
    link: LinkDerived, q: int, ctrl: SeriesControl = DEFAULT_CONTROL
) -> float:
    """Type-1 ARQ outage: q independent attempts, no combining."""
    _check_attempts(q)
    single = 1.0 - marcum_q1(link.marcum_a, link.marcum_b, ctrl)
    return single**q
