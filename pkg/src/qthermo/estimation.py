"""Simultaneous vs individual estimation bounds and the prior-information gain."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .equal_temp import qfi_equal
from .gaussian_fisher import FisherMatrix, qfi_equal_limit_closed

__all__ = [
    "MU_CONVENTIONS",
    "StrategyComparison",
    "simultaneous_bound",
    "individual_bound",
    "ratio_mu",
    "inverse_mu",
    "compare_strategies",
    "prior_gain",
]

MU_CONVENTIONS = ("resource", "literal")

# relative determinant below which H is treated as rank one
_DET_RTOL = 1e-13


def _singular(h: FisherMatrix) -> bool:
    return h.det <= _DET_RTOL * h.h11 * h.h22


def simultaneous_bound(h: FisherMatrix, nu: float = 1.0) -> float:
    """tr[(nu H)^-1]; +inf when H is singular (no simultaneous information)."""
    if _singular(h):
        warnings.warn(
            "maximum diffraction: no simultaneous information (singular QFI matrix)",
            RuntimeWarning,
            stacklevel=2,
        )
        return math.inf
    return (h.h11 + h.h22) / (nu * h.det)


def individual_bound(h: FisherMatrix, nu: float = 1.0) -> float:
    """delta^2 T1 + delta^2 T2 with each temperature measured nu/2 times."""
    if not (h.h11 > 0 and h.h22 > 0):
        raise ValueError("diagonal Fisher entries must be positive")
    return (2.0 / nu) * (1.0 / h.h11 + 1.0 / h.h22)


def inverse_mu(h: FisherMatrix, convention: str = "resource") -> float:
    """1/mu, finite everywhere (0 at a rank-one H)."""
    if convention not in MU_CONVENTIONS:
        raise ValueError(f"unknown mu convention {convention!r}")
    value = max(h.det, 0.0) / (h.h11 * h.h22)
    if _singular(h):
        value = 0.0
    return 2.0 * value if convention == "resource" else value


def ratio_mu(h: FisherMatrix, convention: str = "resource") -> float:
    """Simultaneous over individual uncertainty.

    ``"resource"`` splits the repetitions evenly between the two individual
    measurements, giving h11 h22 / (2 det H); ``"literal"`` drops the factor 2.
    """
    inv = inverse_mu(h, convention)
    return math.inf if inv == 0.0 else 1.0 / inv


@dataclass(frozen=True)
class StrategyComparison:
    sim_bound: float
    ind_bound: float
    mu: float
    nu: float = 1.0


def compare_strategies(h: FisherMatrix, nu: float = 1.0) -> StrategyComparison:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        sim = simultaneous_bound(h, nu)
    return StrategyComparison(sim, individual_bound(h, nu), ratio_mu(h), nu)


def prior_gain(t1: float, omega: float, eta: float, s: float) -> dict:
    """QFI with the prior T1 = T2 against 2 H^11 without it."""
    f_prior = qfi_equal(t1, omega, eta, s).qfi
    two_h11 = 2.0 * qfi_equal_limit_closed(t1, omega, eta, s)
    return {"f_prior": f_prior, "two_h11": two_h11, "gain": f_prior / two_h11}
