"""Hermite-Gauss demultiplexing and optimized moment-based sensitivity.

Photon counts ``N_k = b_k^dag b_k`` in the HG modes u_k are quadratic in the
field, so their means and covariances follow from the source populations and
the mode overlaps by Wick factorization.  For the Gaussian PSF the overlaps are
``(+/-1)^k beta_k`` with ``beta_k = exp(-d^2/8w^2) (d/2w)^k / sqrt(k!)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .model import (
    DiffractionGeometry,
    DomainError,
    SingularityError,
    SourcePair,
    as_overlap,
    derive_params,
    param_gradients,
    population_gradients,
    separation_from_overlap,
    source_populations,
)

__all__ = [
    "HGMomentSummary",
    "MomentSensitivity",
    "hg_beta",
    "source_amplitudes",
    "mean_photon_hg",
    "hg_moment_summary",
    "count_moments",
    "moment_sensitivity",
    "hg_sensitivity",
    "hg_sensitivity_from_moments",
    "hg_sensitivity_full",
    "poisson_fisher",
]


def hg_beta(k, d: float, varpi: float, exponent: str = "negative"):
    """Magnitude of the overlap between u_k and a PSF displaced by d/2.

    ``exponent="literal"`` uses exp(+d^2/8w^2), which is not normalized.
    """
    if not varpi > 0:
        raise DomainError("varpi must be positive")
    if exponent not in ("negative", "literal"):
        raise ValueError(f"unknown beta exponent {exponent!r}")
    k = np.asarray(k)
    if d == 0.0:
        out = np.where(k == 0, 1.0, 0.0)
        return float(out) if out.ndim == 0 else out
    sign = -1.0 if exponent == "negative" else 1.0
    q = d / (2.0 * varpi)
    logb = sign * q * q / 2.0 + k * math.log(q) - 0.5 * gammaln(k + 1.0)
    out = np.exp(logb)
    return float(out) if out.ndim == 0 else out


def _geometry(geom) -> tuple[float, float]:
    if isinstance(geom, DiffractionGeometry):
        return geom.psf()
    if isinstance(geom, tuple):
        return float(geom[0]), float(geom[1])
    s = as_overlap(geom)
    if s == 0.0:
        raise DomainError("s = 0 corresponds to infinite separation")
    return separation_from_overlap(s), 1.0


def source_amplitudes(k_max: int, d: float, varpi: float, exponent: str = "negative") -> np.ndarray:
    """Rows: overlaps of u_0..u_K with the images of source 1 (at -d/2) and source 2."""
    k = np.arange(k_max + 1)
    beta = hg_beta(k, d, varpi, exponent)
    return np.vstack([(-1.0) ** k * beta, beta])


def mean_photon_hg(k: int, pair: SourcePair, geom) -> float:
    d, varpi = _geometry(geom)
    f = source_amplitudes(k, d, varpi)[:, k]
    n1, n2 = source_populations(pair)
    return pair.eta * (n1 * f[0] ** 2 + n2 * f[1] ** 2)


@dataclass(frozen=True)
class HGMomentSummary:
    a_plus: float
    a_minus: float
    b: float
    s1: float
    s2: float
    betas: np.ndarray = field(repr=False)


def hg_moment_summary(pair: SourcePair, geom, k_max: int, exponent: str = "negative") -> HGMomentSummary:
    d, varpi = _geometry(geom)
    p = derive_params(pair)
    beta2 = hg_beta(np.arange(k_max + 1), d, varpi, exponent) ** 2
    alt = (-1.0) ** np.arange(k_max + 1)
    s2 = math.fsum(beta2)
    s1 = math.fsum(alt * beta2)
    x = 2.0 * p.n_total * pair.eta
    g2 = p.gamma**2
    return HGMomentSummary(
        a_plus=2.0 / (1 + g2) + x * s2,
        a_minus=2.0 / (1 - g2) + x * s2,
        b=x * s1,
        s1=s1,
        s2=s2,
        betas=np.sqrt(beta2),
    )


def count_moments(pair: SourcePair, geom, k_max: int, which: int = 1):
    """Derivative of the mean counts and their covariance for modes 0..K.

    Gamma_kl = delta_kl <N_k> + |<b_k^dag b_l>|^2 for the zero-mean Gaussian state.
    """
    if which not in (1, 2):
        raise ValueError(f"which must be 1 or 2, got {which!r}")
    d, varpi = _geometry(geom)
    f = source_amplitudes(k_max, d, varpi)
    pops = source_populations(pair)
    dpops = population_gradients(pair)[:, which - 1]
    g = pair.eta * (f.T * pops) @ f
    gamma_cov = np.diag(np.diag(g)) + g * g
    deriv = pair.eta * (dpops @ (f * f))
    return deriv, gamma_cov


@dataclass(frozen=True)
class MomentSensitivity:
    m_opt: np.ndarray
    value: float
    rank: int


def moment_sensitivity(deriv, cov) -> MomentSensitivity:
    """Best error-transfer sensitivity D^T Gamma^-1 D over linear combinations.

    A singular Gamma is handled with the pseudo-inverse; ``rank`` reports it.
    """
    deriv = np.atleast_1d(np.asarray(deriv, dtype=float))
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    rank = int(np.linalg.matrix_rank(cov))
    if rank == cov.shape[0]:
        m = np.linalg.solve(cov, deriv)
    else:
        m = np.linalg.pinv(cov, hermitian=True) @ deriv
    return MomentSensitivity(m_opt=m, value=float(deriv @ m), rank=rank)


def _prefactor(pair: SourcePair, which: int) -> tuple[float, float]:
    if which not in (1, 2):
        raise ValueError(f"which must be 1 or 2, got {which!r}")
    p = derive_params(pair)
    dn, _ = param_gradients(pair)
    return (2.0 * pair.eta * dn[which - 1]) ** 2, 2.0 * p.n_total * pair.eta


def hg_sensitivity(pair: SourcePair, geom, k_max: int, which: int = 1, exponent: str = "negative") -> float:
    """Optimized sensitivity of T_which from counts in HG modes 0..K (closed form)."""
    if k_max < 0:
        raise DomainError("K must be non-negative")
    c2, x = _prefactor(pair, which)
    h = hg_moment_summary(pair, geom, k_max, exponent)
    det = h.a_plus * h.a_minus - h.b**2
    if not det > 0:
        raise SingularityError("degenerate HG count covariance (A+ A- - B^2 <= 0)")
    bracket = (
        h.s2 / x
        - h.a_plus * h.s1**2 / det
        + 2.0 * h.b * h.s1 * h.s2 / det
        - h.a_minus * h.s2**2 / det
    )
    return c2 * bracket


def hg_sensitivity_from_moments(pair: SourcePair, geom, k_max: int, which: int = 1) -> float:
    deriv, cov = count_moments(pair, geom, k_max, which)
    return moment_sensitivity(deriv, cov).value


def hg_sensitivity_full(pair: SourcePair, geom, which: int = 1, printed: bool = False) -> float:
    """Sensitivity when every HG mode is counted (K -> infinity).

    The photon-number term multiplies (1 - s^2); ``printed=True`` substitutes
    (s - 1)^2 as in the published expression, which agrees only at s = 0, 1.
    """
    s = as_overlap(geom)
    c2, x = _prefactor(pair, which)
    g2 = derive_params(pair).gamma ** 2
    nh = x / 2.0
    factor = (s - 1.0) ** 2 if printed else 1.0 - s * s
    num = 2 * s * s * (1 - g2) + 2 * (1 + g2) + 2 * nh * (1 - g2 * g2) * factor
    den = 4 + 8 * nh + 4 * nh * nh * (1 - s * s) * (1 - g2 * g2)
    return c2 * (1.0 / x - num / den)


def poisson_fisher(pair: SourcePair, geom, k_max: int, which: int = 1) -> float:
    """Sum_k (d N_k)^2 / N_k, the Fisher information of independent Poisson counts."""
    c2, x = _prefactor(pair, which)
    d, varpi = _geometry(geom)
    s2 = math.fsum(hg_beta(np.arange(k_max + 1), d, varpi) ** 2)
    return c2 * s2 / x
