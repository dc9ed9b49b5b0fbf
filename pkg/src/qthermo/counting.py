"""Joint photon-number statistics of the image modes and their Fisher matrix.

    P(n+, n-) = (1 - g)^(1+n++n-) N+^n+ N-^n- 2F1(1+n+, 1+n-; 1; z) / (l+^(n++1) l-^(n-+1))

with g = gamma^2, l_+/- = 1 + N_+/-(1 - g) and z = g / (l+ l-).  The Euler
transform 2F1(a, b; c; z) = (1 - z)^(c-a-b) 2F1(c-a, c-b; c; z) turns the series
into a terminating sum of positive terms, which is what the grid evaluation
uses; :func:`hyp2f1_series` keeps the plain Gauss series for reference.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from .gaussian_fisher import FisherMatrix
from .model import (
    DiffractionGeometry,
    DomainError,
    SourcePair,
    as_overlap,
    derive_params,
    param_gradients,
)

__all__ = [
    "F21_SERIES",
    "CountDistribution",
    "hyp2f1_series",
    "GridTooLarge",
    "joint_prob",
    "count_distribution",
    "counting_fi_matrix",
]

F21_SERIES = ("gauss", "literal")
MAX_GRID_CELLS = 40_000_000


class GridTooLarge(ArithmeticError):
    """The truncated count grid needed for the requested tail would not fit."""


def hyp2f1_series(a: float, b: float, c: float, z: float, tol: float = 1e-16, max_terms: int = 100000) -> float:
    """Gauss series sum_m (a)_m (b)_m / ((c)_m m!) z^m for |z| < 1."""
    if not abs(z) < 1:
        raise DomainError(f"hypergeometric series diverges for |z| >= 1 (z={z!r})")
    term = 1.0
    total = 1.0
    for m in range(max_terms):
        term *= (a + m) * (b + m) / ((c + m) * (m + 1.0)) * z
        total += term
        ratio = abs((a + m + 1) * (b + m + 1) / ((c + m + 1) * (m + 2.0)) * z)
        if m > abs(a) + abs(b) and ratio < 1 and abs(term) * ratio / (1 - ratio) <= tol * abs(total):
            return total
    raise ArithmeticError(f"hypergeometric series did not converge in {max_terms} terms")


@dataclass(frozen=True)
class _Moments:
    n_plus: float
    n_minus: float
    g: float
    one_m_g: float
    dn_plus: np.ndarray
    dn_minus: np.ndarray
    dg: np.ndarray


def _moments(pair: SourcePair, s: float) -> _Moments:
    p = derive_params(pair)
    dn, dgamma = param_gradients(pair)
    return _Moments(
        n_plus=p.n_total * pair.eta * (1 + s),
        n_minus=p.n_total * pair.eta * (1 - s),
        g=p.gamma**2,
        one_m_g=p.one_minus_gamma2,
        dn_plus=pair.eta * (1 + s) * dn,
        dn_minus=pair.eta * (1 - s) * dn,
        dg=2.0 * p.gamma * dgamma,
    )


def _log_poly(n, m, z):
    """log and d/dz log of sum_k C(n,k) C(m,k) z^k on broadcast grids."""
    n = np.asarray(n, dtype=float)
    m = np.asarray(m, dtype=float)
    kmax = int(np.minimum(n, m).max()) if n.size else 0
    k = np.arange(kmax + 1, dtype=float).reshape((-1,) + (1,) * np.broadcast(n, m).ndim)
    valid = k <= np.minimum(n, m)
    logc = (
        gammaln(n + 1) - gammaln(k + 1) - gammaln(np.maximum(n - k, 0) + 1)
        + gammaln(m + 1) - gammaln(k + 1) - gammaln(np.maximum(m - k, 0) + 1)
    )
    if z == 0.0:
        logz_k = np.where(k == 0, 0.0, -np.inf)
        logz_km1 = np.where(k == 1, 0.0, -np.inf)
    else:
        logz_k = k * math.log(z)
        logz_km1 = (k - 1) * math.log(z)
    terms = np.where(valid, logc + logz_k, -np.inf)
    logp = logsumexp(terms, axis=0)
    with np.errstate(divide="ignore"):
        dterms = np.where(valid & (k >= 1), logc + np.log(np.maximum(k, 1)) + logz_km1, -np.inf)
    dlog = np.exp(logsumexp(dterms, axis=0) - logp)
    return logp, dlog


def _log_poly_rows(n_max: int, m, z: float):
    """Same as ``_log_poly`` for every n = 0..n_max against a vector m.

    Uses the contiguous relation of 2F1(-n, -m; 1; z) in n,
    (n+1) F_{n+1} = (2n + 1 - (n - m) z) F_n - n (1 - z) F_{n-1},
    run forward on the ratios r_n = F_n / F_{n-1} and g_n = d log F_n / dz.
    The argument lies outside the orthogonality interval, so F_n is the dominant
    solution and the forward direction is stable.  Cost O(n_max * len(m)).
    """
    m = np.asarray(m, dtype=float)
    logf = np.zeros((n_max + 1, m.size))
    dlog = np.zeros((n_max + 1, m.size))
    if n_max == 0:
        return logf, dlog
    r = 1.0 + m * z
    g_prev = np.zeros_like(m)
    g = m / r
    logf[1] = np.log(r)
    dlog[1] = g
    for n in range(1, n_max):
        a = 2 * n + 1 - (n - m) * z
        b = n * (1.0 - z)
        r_next = (a - b / r) / (n + 1)
        # derivative of the recurrence divided through by F_{n+1}
        g_next = (a * g - (n - m) - (b * g_prev - n) / r) / ((n + 1) * r_next)
        logf[n + 1] = logf[n] + np.log(r_next)
        dlog[n + 1] = g_next
        r, g_prev, g = r_next, g, g_next
    return logf, dlog


def _log_prob_grid(mo: _Moments, n, m, series: str, poly=None):
    """log P and its gradient over (T1, T2) on grids n, m (broadcast)."""
    n = np.asarray(n, dtype=float)
    m = np.asarray(m, dtype=float)
    g = mo.g
    omg = mo.one_m_g
    lp = 1.0 + mo.n_plus * omg
    lm = 1.0 + mo.n_minus * omg
    z = g / (lp * lm)
    # 1 - z = (1 - g)(1 + N+ + N- + N+ N- (1 - g)) / (l+ l-), free of cancellation
    one_m_z = omg * (1.0 + mo.n_plus + mo.n_minus + mo.n_plus * mo.n_minus * omg) / (lp * lm)
    if series == "gauss":
        logpoly, dlogpoly = poly(z) if poly is not None else _log_poly(n, m, z)
        log_f = -(1 + n + m) * math.log(one_m_z) + logpoly
        dlog_f_dz = (1 + n + m) / one_m_z + dlogpoly
    elif series == "literal":
        log_f = (1 + n) * (1 + m) * z
        dlog_f_dz = (1 + n) * (1 + m) * np.ones_like(z * n)
    else:
        raise ValueError(f"unknown 2F1 series {series!r}")

    def xlogy(a, b):
        return np.where(a == 0, 0.0, a * math.log(b) if b > 0 else -np.inf)

    logp = (
        (1 + n + m) * math.log(omg)
        + xlogy(n, mo.n_plus)
        + xlogy(m, mo.n_minus)
        + log_f
        - (n + 1) * math.log(lp)
        - (m + 1) * math.log(lm)
    )
    grads = []
    for i in range(2):
        dg = mo.dg[i]
        dlp = mo.dn_plus[i] * omg - mo.n_plus * dg
        dlm = mo.dn_minus[i] * omg - mo.n_minus * dg
        dz = dg / (lp * lm) - z * (dlp / lp + dlm / lm)
        term_m = m * mo.dn_minus[i] / mo.n_minus if mo.n_minus > 0 else 0.0 * m
        grads.append(
            -(1 + n + m) * dg / omg
            + n * mo.dn_plus[i] / mo.n_plus
            + term_m
            + dlog_f_dz * dz
            - (n + 1) * dlp / lp
            - (m + 1) * dlm / lm
        )
    return logp, grads


def joint_prob(n_plus: int, n_minus: int, pair: SourcePair, geom: DiffractionGeometry | float, series: str = "gauss") -> float:
    """Probability of n+ photons in a_+ and n- photons in a_-."""
    if n_plus < 0 or n_minus < 0:
        raise DomainError("photon numbers must be non-negative")
    mo = _moments(pair, as_overlap(geom))
    logp, _ = _log_prob_grid(mo, np.array([n_plus]), np.array([n_minus]), series)
    return float(np.exp(logp[0]))


def _cap(mean: float, tol: float) -> int:
    if mean == 0.0:
        return 0
    q = mean / (mean + 1.0)
    return int(math.ceil(math.log(tol) / math.log(q)))


@dataclass(frozen=True)
class CountDistribution:
    """Truncated joint distribution; ``probs[n+, n-]``."""

    probs: np.ndarray = field(repr=False)
    n_cap: tuple[int, int]
    tail_mass: float


def _grid(pair: SourcePair, s: float, tail_tol: float, series: str):
    if not tail_tol > 0:
        raise DomainError("tail_tol must be positive")
    mo = _moments(pair, s)
    # each marginal is geometric with mean N_+/-: P(n >= c) = (N/(N+1))^c
    cap_p = _cap(mo.n_plus, tail_tol / 2)
    cap_m = _cap(mo.n_minus, tail_tol / 2)
    cells = (cap_p + 1) * (cap_m + 1)
    if cells > MAX_GRID_CELLS:
        raise GridTooLarge(
            f"count grid {cap_p + 1} x {cap_m + 1} exceeds {MAX_GRID_CELLS} cells "
            f"(N+={mo.n_plus:.3g}, N-={mo.n_minus:.3g}); loosen tail_tol or lower the occupation"
        )
    n = np.arange(cap_p + 1, dtype=float)[:, None]
    m = np.arange(cap_m + 1, dtype=float)[None, :]
    logp, grads = _log_prob_grid(mo, n, m, series, poly=lambda z: _log_poly_rows(cap_p, m.ravel(), z))
    tail = sum(
        (x / (x + 1.0)) ** (c + 1) if x > 0 else 0.0
        for x, c in ((mo.n_plus, cap_p), (mo.n_minus, cap_m))
    )
    return logp, grads, (cap_p, cap_m), tail


def count_distribution(pair: SourcePair, geom, tail_tol: float = 1e-12, series: str = "gauss") -> CountDistribution:
    logp, _, caps, tail = _grid(pair, as_overlap(geom), tail_tol, series)
    return CountDistribution(probs=np.exp(logp), n_cap=caps, tail_mass=tail)


def counting_fi_matrix(pair: SourcePair, geom, tail_tol: float = 1e-12, series: str = "gauss") -> FisherMatrix:
    """Classical Fisher matrix of the joint (n+, n-) photon-count record."""
    logp, grads, _, _ = _grid(pair, as_overlap(geom), tail_tol, series)
    p = np.exp(logp)
    fi = np.empty((2, 2))
    for i in range(2):
        for j in range(i, 2):
            w = (p * grads[i] * grads[j]).ravel()
            fi[i, j] = fi[j, i] = math.fsum(w)
    return FisherMatrix.from_array(fi, path="counting")
