"""Temperature QFI when both sources are known to share one temperature T.

In that case the image-plane state factorizes into two thermal modes with
occupancies ``M_+/- = eta (1 +/- s) / (exp(omega/T) - 1)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import MIN_OMEGA_OVER_T, DomainError

__all__ = ["EqualTempResult", "mode_occupancies", "fock_prob", "qfi_equal", "qfi_equal_series"]


def _check(t, omega, eta, s):
    if not (t > 0 and omega > 0):
        raise DomainError("T and omega must be positive")
    if omega / t > 1.0 / MIN_OMEGA_OVER_T:
        raise DomainError(f"T={t!r} is below omega/700")
    if not 0.0 < eta <= 1.0:
        raise DomainError(f"eta must lie in (0, 1], got {eta!r}")
    if not 0.0 <= s <= 1.0:
        raise DomainError(f"s must lie in [0, 1], got {s!r}")


@dataclass(frozen=True)
class EqualTempResult:
    qfi: float
    qfi_low_t: float
    qfi_high_t: float
    m_plus: float
    m_minus: float


def mode_occupancies(t: float, omega: float, eta: float, s: float) -> tuple[float, float]:
    n = 1.0 / math.expm1(omega / t)
    return eta * (1 + s) * n, eta * (1 - s) * n


def _branch_sign(branch) -> int:
    if branch in ("+", 1, +1, "plus"):
        return 1
    if branch in ("-", -1, "minus"):
        return -1
    raise ValueError(f"branch must be '+' or '-', got {branch!r}")


def fock_prob(n: int, branch, t: float, omega: float, eta: float, s: float) -> float:
    """Photon-number probability M^n / (M + 1)^(n + 1) of one image mode."""
    sign = _branch_sign(branch)
    if n < 0:
        raise DomainError("photon number must be non-negative")
    _check(t, omega, eta, s)
    m = mode_occupancies(t, omega, eta, s)[0 if sign > 0 else 1]
    if m == 0.0:
        return 1.0 if n == 0 else 0.0
    return math.exp(n * math.log(m / (m + 1.0)) - math.log1p(m))


def qfi_equal(t: float, omega: float, eta: float, s: float) -> EqualTempResult:
    """Closed-form QFI of T together with its low- and high-temperature forms."""
    _check(t, omega, eta, s)
    x = omega / t
    em1 = math.expm1(x)
    # chi / (chi - 1), finite for all admissible x
    r = -1.0 / math.expm1(-x)
    ratio = (1 + eta * (1 - s * s) / em1) / (
        em1 * (1 + eta * (1 - s) / em1) * (1 + eta * (1 + s) / em1)
    )
    qfi = 2.0 * r * r * x * x * eta * ratio / (t * t)
    low = 2.0 * x * x * eta * math.exp(-x) / (t * t)
    high = (
        2.0 * eta * (x + eta * (1 - s * s))
        / (t * t * (x + eta * (1 - s)) * (x + eta * (1 + s)))
    )
    m_plus, m_minus = mode_occupancies(t, omega, eta, s)
    return EqualTempResult(qfi, low, high, m_plus, m_minus)


def _thermal_series(m: float, dm: float, tail_tol: float) -> float:
    """Sum_n (dp/dT)^2 / p for the geometric law with mean m, tail below tail_tol."""
    if m == 0.0:
        return 0.0
    q = m / (m + 1.0)
    n_max = max(int(math.ceil(math.log(tail_tol * (1 - q)) / math.log(q))), 1)
    total = 0.0
    start = 0
    while True:
        n = np.arange(start, n_max + 1, dtype=float)
        logp = n * math.log(q) - math.log1p(m)
        score = (n / m - (n + 1) / (m + 1)) * dm
        terms = np.exp(logp) * score * score
        total += math.fsum(terms)
        last = n_max
        rho = q * (1 + 1.0 / last) ** 2
        if rho < 1 and terms[-1] * rho / (1 - rho) < tail_tol:
            return total
        start, n_max = n_max + 1, 2 * n_max


def qfi_equal_series(
    t: float, omega: float, eta: float, s: float, tail_tol: float = 1e-14
) -> float:
    """Direct Fisher-information sum over both photon-number distributions."""
    if not tail_tol > 0:
        raise DomainError("tail_tol must be positive")
    _check(t, omega, eta, s)
    x = omega / t
    em1 = math.expm1(x)
    dn = (em1 + 1) * x / (t * em1 * em1)
    total = 0.0
    for sign in (1, -1):
        factor = eta * (1 + sign * s)
        total += _thermal_series(factor / em1, factor * dn, tail_tol)
    return total
