"""Marcum-Q function evaluation by series, plus high-SNR approximations.

Q_m(a, b) is the tail probability of a noncentral chi-square variate with
2m degrees of freedom and noncentrality a^2, evaluated at b^2.  Two
independent series routes are implemented:

* ``marcum_q1`` sums the Poisson mixture of central chi-square tails
  directly (all terms positive, partial sums increase toward the result).
* ``marcum_qm`` sums the complementary double series built from the power
  expansion of the lower incomplete gamma function and subtracts from 1.

Having two routes means the m=1 cross-check between them is a real
consistency test rather than a tautology.

Every term is formed in log domain (``exp(k*log(y) - y - lgamma(k+1))``)
so neither the Poisson weights nor the gamma tails hit the ``exp(-746)``
underflow cliff for large arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConvergenceError, DomainError

__all__ = [
    "SeriesControl",
    "DEFAULT_CONTROL",
    "marcum_q1",
    "marcum_qm",
    "marcum_q1_approx",
    "marcum_qm_approx",
    "marcum_qm_approx_log",
]

# The factorial of 171 exceeds the float64 range; the direct approximation
# formula is refused beyond this and callers are pointed at the log path.
_MAX_DIRECT_FACTORIAL = 170

# A term must stay below rel_tolerance * partial this many consecutive
# times before the series is declared converged; early terms of the double
# series are not monotone.
_CONSECUTIVE_SMALL = 3


@dataclass(frozen=True)
class SeriesControl:
    """Truncation control for the Marcum-Q series."""

    rel_tolerance: float = 1e-12
    max_terms: int = 10000

    def __post_init__(self):
        if not (self.rel_tolerance > 0.0 and math.isfinite(self.rel_tolerance)):
            raise DomainError("rel_tolerance must be a positive finite real")
        if self.max_terms < 1:
            raise DomainError("max_terms must be at least 1")


DEFAULT_CONTROL = SeriesControl()


def _check_args(a: float, b: float) -> None:
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError(f"Marcum-Q arguments must be finite, got a={a!r}, b={b!r}")
    if a < 0.0 or b < 0.0:
        raise DomainError(f"Marcum-Q arguments must be nonnegative, got a={a!r}, b={b!r}")


def _log_poisson_term(k: int, y: float, log_y: float) -> float:
    # log of e^-y * y^k / k!
    return k * log_y - y - math.lgamma(k + 1)


def marcum_q1(a: float, b: float, ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """First-order Marcum-Q function Q_1(a, b).

    Sums Q_1 = sum_k Pois(k; a^2/2) * T_{1+k}(b^2/2) where T_n(x) is the
    central chi-square tail with 2n degrees of freedom.  All terms are
    positive, so the partial sum increases monotonically toward the result
    and the unaccounted Poisson mass bounds the truncation error.

    Raises ConvergenceError (carrying the partial value and term count) if
    the term budget is exhausted first.
    """
    _check_args(a, b)
    if b == 0.0:
        return 1.0
    x = 0.5 * b * b
    y = 0.5 * a * a
    log_x = math.log(x)

    # g_j = e^-x x^j / j!; tail = T_{1+k} accumulates g_0 .. g_k.
    tail = math.exp(-x)
    if a == 0.0:
        return min(tail, 1.0)
    log_y = math.log(y)

    total = 0.0
    pois_cum = 0.0
    small_streak = 0
    for k in range(ctrl.max_terms):
        pois = math.exp(_log_poisson_term(k, y, log_y))
        term = pois * tail
        total += term
        pois_cum += pois
        # Rigorous remainder bound: tails are < 1, so what is left of the
        # Poisson mass bounds everything not yet summed.
        remainder = 1.0 - pois_cum
        if remainder <= ctrl.rel_tolerance * total or remainder <= 0.0:
            return min(total, 1.0)
        if total > 0.0 and term < ctrl.rel_tolerance * total:
            small_streak += 1
            if small_streak >= _CONSECUTIVE_SMALL:
                return min(total, 1.0)
        else:
            small_streak = 0
        tail += math.exp(_log_poisson_term(k + 1, x, log_x))
    raise ConvergenceError(
        f"marcum_q1(a={a}, b={b}) did not converge", min(total, 1.0), ctrl.max_terms
    )


def _lower_gamma_reg(n: int, x: float, log_x: float, rel_tol: float, budget: int):
    """Regularized lower incomplete gamma P(n, x) = e^-x sum_{j>=n} x^j/j!.

    Summed forward from j = n; terms are positive with ratio x/(j+1), so
    once j exceeds x a single sub-tolerance term certifies convergence.
    Returns (value, terms_used).
    """
    total = 0.0
    j = n
    used = 0
    while used < budget:
        t = math.exp(j * log_x - x - math.lgamma(j + 1))
        total += t
        used += 1
        if j >= x and (t <= rel_tol * total or t == 0.0):
            return min(total, 1.0), used
        j += 1
    raise ConvergenceError(
        f"incomplete-gamma inner series P({n}, {x}) did not converge",
        min(total, 1.0),
        used,
    )


def marcum_qm(m: int, a: float, b: float, ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Generalized Marcum-Q function Q_m(a, b) of integer order m >= 1.

    Evaluates the complement 1 - sum_i Pois(i; a^2/2) * P(m+i, b^2/2)
    where P is the regularized lower incomplete gamma expanded as a power
    series.  The term budget is shared between the outer Poisson loop and
    the inner gamma series.
    """
    if not isinstance(m, int) or isinstance(m, bool):
        raise DomainError(f"order m must be an integer, got {m!r}")
    if m < 1:
        raise DomainError(f"order m must be >= 1, got {m}")
    _check_args(a, b)
    if b == 0.0:
        return 1.0
    x = 0.5 * b * b
    y = 0.5 * a * a
    log_x = math.log(x)

    if a == 0.0:
        p, _ = _lower_gamma_reg(m, x, log_x, ctrl.rel_tolerance, ctrl.max_terms)
        return min(max(1.0 - p, 0.0), 1.0)

    log_y = math.log(y)
    total = 0.0          # accumulates the drop probability sum
    pois_cum = 0.0
    used = 0
    small_streak = 0
    p_last = 1.0
    i = 0
    while used < ctrl.max_terms:
        pois = math.exp(_log_poisson_term(i, y, log_y))
        p_last, inner_used = _lower_gamma_reg(
            m + i, x, log_x, ctrl.rel_tolerance, ctrl.max_terms - used
        )
        used += inner_used + 1
        term = pois * p_last
        total += term
        pois_cum += pois
        # P(m+i, x) decreases in i, so the remaining sum is bounded by the
        # leftover Poisson mass times the current gamma value.
        remainder = (1.0 - pois_cum) * p_last
        if remainder <= ctrl.rel_tolerance * max(total, 1e-300) or remainder <= 0.0:
            return min(max(1.0 - total, 0.0), 1.0)
        if total > 0.0 and term < ctrl.rel_tolerance * total:
            small_streak += 1
            if small_streak >= _CONSECUTIVE_SMALL:
                return min(max(1.0 - total, 0.0), 1.0)
        else:
            small_streak = 0
        i += 1
    raise ConvergenceError(
        f"marcum_qm(m={m}, a={a}, b={b}) did not converge",
        min(max(1.0 - total, 0.0), 1.0),
        used,
    )


def marcum_q1_approx(a: float, b: float) -> float:
    """Small-b approximation of Q_1: 1 - (b^2/2) e^(-a^2/2).

    The error decays like b^4.  The value is returned unclamped (it goes
    negative for large b); callers interpreting it as a probability clamp
    it themselves.
    """
    _check_args(a, b)
    return 1.0 - 0.5 * b * b * math.exp(-0.5 * a * a)


def marcum_qm_approx(m: int, a: float, b: float) -> float:
    """Small-b approximation of Q_m: 1 - (1/m!) (b^2/2)^m e^(-a^2/2).

    The error decays like b^(2m+2).  Unclamped, like marcum_q1_approx.
    Refuses m > 170, where m! leaves the float range; use
    marcum_qm_approx_log there instead.
    """
    if not isinstance(m, int) or isinstance(m, bool):
        raise DomainError(f"order m must be an integer, got {m!r}")
    if m < 1:
        raise DomainError(f"order m must be >= 1, got {m}")
    if m > _MAX_DIRECT_FACTORIAL:
        raise DomainError(
            f"m={m} overflows the direct factorial; use marcum_qm_approx_log"
        )
    _check_args(a, b)
    try:
        correction = (0.5 * b * b) ** m / math.factorial(m) * math.exp(-0.5 * a * a)
    except OverflowError as exc:
        raise DomainError(
            f"(b^2/2)^m overflows for m={m}, b={b}; use marcum_qm_approx_log"
        ) from exc
    return 1.0 - correction


def marcum_qm_approx_log(m: int, a: float, b: float) -> float:
    """Log-domain evaluation of the Q_m approximation, safe for any m >= 1.

    Computes -expm1(m log(b^2/2) - lgamma(m+1) - a^2/2), which agrees with
    marcum_qm_approx wherever both are representable.
    """
    if not isinstance(m, int) or isinstance(m, bool):
        raise DomainError(f"order m must be an integer, got {m!r}")
    if m < 1:
        raise DomainError(f"order m must be >= 1, got {m}")
    _check_args(a, b)
    if b == 0.0:
        return 1.0
    log_term = m * math.log(0.5 * b * b) - math.lgamma(m + 1) - 0.5 * a * a
    try:
        return -math.expm1(log_term)
    except OverflowError as exc:
        raise DomainError(
            f"approximation magnitude exceeds the float range for m={m}, b={b}"
        ) from exc
