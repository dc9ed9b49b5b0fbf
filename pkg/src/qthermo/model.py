"""Source parameters, diffraction geometry and the image-plane Gaussian state.

Two thermal point sources at temperatures ``t1`` and ``t2`` emit at a common
frequency ``omega``; an imaging system with attenuation ``eta`` maps them onto
the symmetric/antisymmetric image modes ``a_+`` and ``a_-``.  Units are
hbar = k_B = 1.

The state is described in the complex ordering ``A = (a+, a-, a+^dag, a-^dag)``
with covariance ``sigma_ij = <{dA_i, dA_j^dag}>``.  The dagger on the second
operator is needed for ``sigma = blockdiag(2V + 1, 2V + 1)``; without it the
diagonal blocks would hold the (vanishing) anomalous moments instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DomainError",
    "SingularityError",
    "GAMMA_CONVENTIONS",
    "SourcePair",
    "DerivedParams",
    "DiffractionGeometry",
    "ImageState",
    "derive_params",
    "param_gradients",
    "population_gradients",
    "source_populations",
    "gaussian_overlap",
    "separation_from_overlap",
    "build_image_state",
    "covariance_derivatives",
    "SWAP_K",
]

# exp(omega / T) overflows float64 just above 709
MIN_OMEGA_OVER_T = 1.0 / 700.0

GAMMA_CONVENTIONS = ("consistent", "literal")

# K = diag(1, 1, -1, -1) in the (a+, a-, a+^dag, a-^dag) ordering
SWAP_K = np.diag([1.0, 1.0, -1.0, -1.0])


class DomainError(ValueError):
    """A parameter lies outside the domain where the model is defined."""


class SingularityError(ArithmeticError):
    """A linear system or covariance is degenerate."""


@dataclass(frozen=True)
class SourcePair:
    """Physical parameters of the two thermal sources.

    ``gamma_convention`` selects how the population imbalance is computed:
    ``"consistent"`` makes ``N(1 -/+ gamma)`` equal the Bose occupancies of the
    two sources, ``"literal"`` uses ``(chi1 - chi2)/(chi1 + chi2)`` literally.
    """

    t1: float
    t2: float
    omega: float
    eta: float = 1.0
    gamma_convention: str = "consistent"

    def __post_init__(self):
        for name in ("t1", "t2", "omega"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be positive and finite, got {value!r}")
        if not 0.0 < self.eta <= 1.0:
            raise DomainError(f"eta must lie in (0, 1], got {self.eta!r}")
        for name in ("t1", "t2"):
            if self.omega / getattr(self, name) > 1.0 / MIN_OMEGA_OVER_T:
                raise DomainError(
                    f"{name}={getattr(self, name)!r} is below omega/700; "
                    "exp(omega/T) overflows double precision"
                )
        if self.gamma_convention not in GAMMA_CONVENTIONS:
            raise DomainError(f"unknown gamma convention {self.gamma_convention!r}")

    def swapped(self) -> "SourcePair":
        return SourcePair(self.t2, self.t1, self.omega, self.eta, self.gamma_convention)


@dataclass(frozen=True)
class DerivedParams:
    chi1: float
    chi2: float
    gamma: float
    n_total: float
    # 1 - gamma^2 without cancellation when |gamma| rounds to 1
    one_minus_gamma2: float = 1.0

    @property
    def populations(self) -> tuple[float, float]:
        """Mean photon numbers N(1 - gamma), N(1 + gamma) of the two sources."""
        return self.n_total * (1 - self.gamma), self.n_total * (1 + self.gamma)


def _bose(omega: float, t: float) -> float:
    return 1.0 / math.expm1(omega / t)


def derive_params(pair: SourcePair) -> DerivedParams:
    """Compute chi_i = exp(omega/T_i), the imbalance gamma and N."""
    chi1 = math.exp(pair.omega / pair.t1)
    chi2 = math.exp(pair.omega / pair.t2)
    n1 = _bose(pair.omega, pair.t1)
    n2 = _bose(pair.omega, pair.t2)
    n_total = 0.5 * (n1 + n2)
    if pair.gamma_convention == "consistent":
        # equals (chi1 - chi2)/(chi1 + chi2 - 2) without the cancellation at high T
        gamma = (n2 - n1) / (n1 + n2)
        one_m_g2 = 4.0 * (n1 / (n1 + n2)) * (n2 / (n1 + n2))
    else:
        gamma = (chi1 - chi2) / (chi1 + chi2)
        one_m_g2 = 4.0 * (chi1 / (chi1 + chi2)) * (chi2 / (chi1 + chi2))
    return DerivedParams(chi1, chi2, gamma, n_total, one_m_g2)


def param_gradients(pair: SourcePair) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradients ``(dN/dT_i, dgamma/dT_i)`` for i = 1, 2."""
    w = pair.omega
    chis, dchis, dns = [], [], []
    for t in (pair.t1, pair.t2):
        x = w / t
        em1 = math.expm1(x)
        chi = em1 + 1.0
        chis.append(chi)
        dchis.append(-chi * x / t)
        # d/dT 1/(chi - 1) = chi * omega / (T^2 (chi - 1)^2)
        dns.append(chi * x / (t * em1 * em1))
    dn_total = 0.5 * np.array(dns)
    if pair.gamma_convention == "consistent":
        n1, n2 = _bose(w, pair.t1), _bose(w, pair.t2)
        s = (n1 + n2) ** 2
        dgamma = np.array([-2.0 * n2 * dns[0] / s, 2.0 * n1 * dns[1] / s])
    else:
        chi1, chi2 = chis
        den = (chi1 + chi2) ** 2
        dgamma = np.array([2.0 * chi2 * dchis[0] / den, -2.0 * chi1 * dchis[1] / den])
    return dn_total, dgamma


def source_populations(pair: SourcePair) -> np.ndarray:
    """Mean photon numbers (m1, m2) = (N(1 - gamma), N(1 + gamma)) emitted by each source.

    Under the consistent convention these are the Bose occupancies themselves,
    computed without the cancellation in N(1 - gamma) when one source is dark.
    """
    if pair.gamma_convention == "consistent":
        return np.array([_bose(pair.omega, pair.t1), _bose(pair.omega, pair.t2)])
    return np.array(derive_params(pair).populations)


def population_gradients(pair: SourcePair) -> np.ndarray:
    """``g[j, i] = d m_j / d T_i``."""
    dn, dgamma = param_gradients(pair)
    if pair.gamma_convention == "consistent":
        return np.diag(2.0 * dn)
    p = derive_params(pair)
    return np.vstack([dn * (1 - p.gamma) - p.n_total * dgamma, dn * (1 + p.gamma) + p.n_total * dgamma])


def gaussian_overlap(d: float, varpi: float) -> float:
    """Overlap of two L2-normalized Gaussian PSFs exp(-x^2/varpi^2) displaced by d."""
    if not varpi > 0:
        raise DomainError(f"varpi must be positive, got {varpi!r}")
    if d < 0:
        raise DomainError(f"separation must be non-negative, got {d!r}")
    return math.exp(-d * d / (2.0 * varpi * varpi))


def separation_from_overlap(s: float, varpi: float = 1.0) -> float:
    if not 0.0 < s <= 1.0:
        raise DomainError(f"overlap must lie in (0, 1] to invert, got {s!r}")
    return varpi * math.sqrt(-2.0 * math.log(s))


@dataclass(frozen=True)
class DiffractionGeometry:
    """Either the overlap ``s`` directly, or a Gaussian PSF (``d``, ``varpi``).

    When all three are given they must agree.
    """

    overlap: float | None = None
    d: float | None = None
    varpi: float | None = None

    def __post_init__(self):
        has_psf = self.d is not None or self.varpi is not None
        if has_psf and (self.d is None or self.varpi is None):
            raise DomainError("Gaussian PSF geometry needs both d and varpi")
        if self.overlap is None and not has_psf:
            raise DomainError("geometry needs s or (d, varpi)")
        if self.overlap is not None and not 0.0 <= self.overlap <= 1.0:
            raise DomainError(f"s must lie in [0, 1], got {self.overlap!r}")
        if has_psf:
            derived = gaussian_overlap(self.d, self.varpi)
            if self.overlap is not None and not math.isclose(
                derived, self.overlap, rel_tol=1e-9, abs_tol=1e-12
            ):
                raise DomainError(
                    f"s={self.overlap!r} disagrees with d={self.d!r}, varpi={self.varpi!r} "
                    f"(which give s={derived!r})"
                )

    @property
    def s(self) -> float:
        if self.overlap is not None:
            return self.overlap
        return gaussian_overlap(self.d, self.varpi)

    def psf(self) -> tuple[float, float]:
        """Return ``(d, varpi)``, inferring d from s with varpi = 1 if needed."""
        if self.d is not None:
            return self.d, self.varpi
        if self.overlap == 0.0:
            raise DomainError("s = 0 corresponds to infinite separation")
        return separation_from_overlap(self.overlap), 1.0


def as_overlap(geom: DiffractionGeometry | float) -> float:
    if isinstance(geom, DiffractionGeometry):
        return geom.s
    s = float(geom)
    if not 0.0 <= s <= 1.0:
        raise DomainError(f"s must lie in [0, 1], got {s!r}")
    return s


@dataclass(frozen=True)
class ImageState:
    n_plus: float
    n_minus: float
    gamma: float
    cov: np.ndarray = field(repr=False)
    pmatrix: np.ndarray = field(repr=False)
    displacement: np.ndarray = field(repr=False)


def _correlation(n_total: float, gamma: float, eta: float, s: float) -> np.ndarray:
    n_plus = n_total * eta * (1 + s)
    n_minus = n_total * eta * (1 - s)
    # <a+^dag a-> = sqrt(eta+ eta-) <c+^dag c-> = -gamma sqrt(N+ N-)
    off = -gamma * n_total * eta * math.sqrt(max(1.0 - s * s, 0.0))
    return np.array([[n_plus, off], [off, n_minus]])


def _block_cov(block: np.ndarray) -> np.ndarray:
    cov = np.zeros((4, 4))
    cov[:2, :2] = block
    cov[2:, 2:] = block
    return cov


def build_image_state(pair: SourcePair, geom: DiffractionGeometry | float) -> ImageState:
    """Image-plane state: P-function matrix V and covariance sigma = blockdiag(2V + 1)."""
    s = as_overlap(geom)
    p = derive_params(pair)
    v = _correlation(p.n_total, p.gamma, pair.eta, s)
    cov = _block_cov(2.0 * v + np.eye(2))
    return ImageState(
        n_plus=v[0, 0],
        n_minus=v[1, 1],
        gamma=p.gamma,
        cov=cov,
        pmatrix=v,
        displacement=np.zeros(4),
    )


def covariance_derivatives(pair: SourcePair, geom: DiffractionGeometry | float) -> list[np.ndarray]:
    """Analytic d(sigma)/dT_i for i = 1, 2."""
    s = as_overlap(geom)
    p = derive_params(pair)
    dn, dgamma = param_gradients(pair)
    root = math.sqrt(max(1.0 - s * s, 0.0))
    out = []
    for i in range(2):
        doff = -pair.eta * root * (dgamma[i] * p.n_total + p.gamma * dn[i])
        dv = np.array(
            [[pair.eta * (1 + s) * dn[i], doff], [doff, pair.eta * (1 - s) * dn[i]]]
        )
        out.append(_block_cov(2.0 * dv))
    return out
