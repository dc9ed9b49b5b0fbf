"""QFI matrix and symmetric logarithmic derivatives of the two-mode image state.

Uses the complex-form Gaussian expressions

    H_ij = 1/2 vec[d_i sigma]^dag R^-1 vec[d_j sigma] + 2 d_i d^dag sigma^-1 d_j d
    L_i  = dA^dag X_i dA - 1/2 tr[sigma X_i] + 2 dA^dag sigma^-1 d_i d

with R = conj(sigma) (x) sigma - K (x) K and X_i = unvec(R^-1 vec[d_i sigma]).
``vec`` stacks columns, so R vec[X] = vec[sigma X sigma^dag - K X K].
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import (
    SWAP_K,
    DiffractionGeometry,
    SingularityError,
    SourcePair,
    as_overlap,
    build_image_state,
    covariance_derivatives,
    population_gradients,
    source_populations,
)

__all__ = [
    "FisherMatrix",
    "SLDRep",
    "COND_LIMIT",
    "gaussian_qfi",
    "normal_mode_qfi",
    "qfi_matrix",
    "sld",
    "weak_commutation",
    "qfi_equal_limit_closed",
]

COND_LIMIT = 1e12
# the Kronecker entries near a vacuum mode come from (2n+1)^2 - 1, so relative
# accuracy degrades like cond * eps; past this point the normal-mode form is used
ACCURATE_COND = 1e7


@dataclass(frozen=True)
class FisherMatrix:
    """Symmetric 2x2 Fisher matrix over (T1, T2)."""

    h11: float
    h22: float
    h12: float
    path: str = "kronecker"

    @classmethod
    def from_array(cls, m, path: str = "kronecker") -> "FisherMatrix":
        m = np.asarray(m, dtype=float)
        return cls(float(m[0, 0]), float(m[1, 1]), 0.5 * float(m[0, 1] + m[1, 0]), path)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.h11, self.h12], [self.h12, self.h22]])

    @property
    def det(self) -> float:
        return self.h11 * self.h22 - self.h12 * self.h12

    def __getitem__(self, idx):
        return self.matrix[idx]


@dataclass(frozen=True)
class SLDRep:
    """Quadratic-form SLD ``dA^dag quad dA + offset + dA^dag linear``."""

    quad: np.ndarray = field(repr=False)
    offset: float
    linear: np.ndarray = field(repr=False)


def vec(m: np.ndarray) -> np.ndarray:
    return np.asarray(m).reshape(-1, order="F")


def unvec(v: np.ndarray, n: int) -> np.ndarray:
    return np.asarray(v).reshape((n, n), order="F")


def _kron_system(cov: np.ndarray, k: np.ndarray = SWAP_K) -> np.ndarray:
    return np.kron(cov.conj(), cov) - np.kron(k, k)


def _solve_checked(r: np.ndarray, rhs: np.ndarray, limit: float = COND_LIMIT) -> np.ndarray:
    cond = np.linalg.cond(r)
    if not cond < limit:
        raise SingularityError(f"Kronecker system condition number {cond:.3g} exceeds {limit:g}")
    return np.linalg.solve(r, rhs)


def gaussian_qfi(cov, dcovs, disp=None, ddisps=None, cond_limit: float = COND_LIMIT) -> np.ndarray:
    """QFI matrix of a Gaussian state from its covariance and derivatives."""
    cov = np.asarray(cov)
    vs = np.column_stack([vec(dc) for dc in dcovs])
    sol = _solve_checked(_kron_system(cov), vs, cond_limit)
    h = 0.5 * (vs.conj().T @ sol)
    if ddisps is not None:
        dd = np.column_stack(ddisps)
        h = h + 2.0 * (dd.conj().T @ np.linalg.solve(cov, dd))
    h = h.real
    return 0.5 * (h + h.T)


def _mode_sum(occ: np.ndarray, rot: list[np.ndarray]) -> np.ndarray:
    denom = occ[:, None] + occ[None, :] + 2.0 * np.outer(occ, occ)
    keep = denom > 0
    k = len(rot)
    h = np.empty((k, k))
    for i in range(k):
        for j in range(i, k):
            num = (rot[i] * rot[j].T).real
            h[i, j] = h[j, i] = 2.0 * float(np.sum(num[keep] / denom[keep]))
    return h


def normal_mode_qfi(pmatrix, dpmatrices) -> np.ndarray:
    """QFI of a passive Gaussian state from its correlation matrix <a_i^dag a_j>.

    In the eigenbasis (occupations p_a) the entries are
    sum_ab 2 dP_ab dP_ba / (p_a + p_b + 2 p_a p_b), which stays finite when
    one or more normal modes are vacuum.
    """
    occ, u = np.linalg.eigh(np.asarray(pmatrix))
    occ = np.clip(occ, 0.0, None)
    return _mode_sum(occ, [u.conj().T @ np.asarray(dp) @ u for dp in dpmatrices])


def _image_mode_qfi(pair: SourcePair, s: float) -> np.ndarray:
    """Normal-mode QFI with the small occupation taken from the determinant.

    P = eta sum_j m_j phi_j phi_j^T, with phi_j the image of source j in the
    (a+, a-) basis, so det P = eta^2 m1 m2 (1 - s^2) is known without cancellation.
    """
    m = source_populations(pair)
    dm = population_gradients(pair)
    rp, rm = math.sqrt((1 + s) / 2), math.sqrt((1 - s) / 2)
    phi = np.array([[rp, rp], [rm, -rm]])  # column j: source j
    pm = pair.eta * (phi * m) @ phi.T
    a, b, off = pm[0, 0], pm[1, 1], pm[0, 1]
    big = 0.5 * (a + b + math.hypot(a - b, 2.0 * off))
    small = pair.eta**2 * m[0] * m[1] * (1 - s) * (1 + s) / big if big > 0 else 0.0
    theta = 0.5 * math.atan2(2.0 * off, a - b)
    u = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    proj = u.T @ phi
    rot = [pair.eta * (proj * dm[:, i]) @ proj.T for i in range(2)]
    return _mode_sum(np.array([big, small]), rot)


def qfi_matrix(pair: SourcePair, geom: DiffractionGeometry | float) -> FisherMatrix:
    """QFI matrix over (T1, T2).

    When the Kronecker system is badly conditioned (a normal mode close to
    vacuum: s -> 1, or a source with negligible occupation) the normal-mode
    expression is used instead; ``path`` records which one ran.
    """
    s = as_overlap(geom)
    state = build_image_state(pair, s)
    dcovs = covariance_derivatives(pair, s)
    try:
        h = gaussian_qfi(state.cov, dcovs, cond_limit=ACCURATE_COND)
    except (SingularityError, np.linalg.LinAlgError):
        return FisherMatrix.from_array(_image_mode_qfi(pair, s), path="normal-mode")
    return FisherMatrix.from_array(h)


def sld(pair: SourcePair, geom: DiffractionGeometry | float, which: int) -> SLDRep:
    """SLD for T_which (1 or 2) as a quadratic form in dA."""
    if which not in (1, 2):
        raise ValueError(f"which must be 1 or 2, got {which!r}")
    s = as_overlap(geom)
    state = build_image_state(pair, s)
    dcov = covariance_derivatives(pair, s)[which - 1]
    try:
        x = unvec(_solve_checked(_kron_system(state.cov), vec(dcov)), 4)
    except (SingularityError, np.linalg.LinAlgError) as exc:
        raise SingularityError(
            f"covariance is degenerate at s={s!r}: the antisymmetric image mode a_- "
            "(or a source) is vacuum, so its SLD block is undefined"
        ) from exc
    offset = -0.5 * float(np.trace(state.cov @ x).real)
    return SLDRep(quad=x, offset=offset, linear=np.zeros(4))


def weak_commutation(pair: SourcePair, geom: DiffractionGeometry | float) -> complex:
    """tr[rho [L_1, L_2]] evaluated from the covariance (displacement term is zero)."""
    s = as_overlap(geom)
    cov = build_image_state(pair, s).cov
    d1, d2 = covariance_derivatives(pair, s)
    r = _kron_system(cov)
    middle = np.kron(cov.conj(), SWAP_K) - np.kron(SWAP_K, cov)
    left = _solve_checked(r.conj().T, vec(d1))
    right = _solve_checked(r, vec(d2))
    return complex(left.conj() @ middle @ right)


def qfi_equal_limit_closed(t1: float, omega: float, eta: float, s: float, printed: bool = False) -> float:
    """Diagonal QFI entry H^11 = H^22 in the limit T2 -> T1.

    The printed closed form carries an extra factor of -2 relative to the limit
    of the Gaussian QFI matrix; ``printed=True`` returns it unchanged.
    """
    x = omega / t1
    u = math.exp(-x)
    one_m_u = -math.expm1(-x)
    s2 = s * s
    # bracket / chi^2 with u = 1/chi
    bracket = (
        (u * u + 1) * (s2 - 2)
        - 2 * (s2 - 1) ** 2 * eta * eta * u * u
        - 4 * (s2 - 1) * eta * u * u
        + u * (4 - 4 * eta + s2 * (4 * eta - 2))
    )
    a = one_m_u + eta * u
    den = one_m_u**2 * (a * a - s2 * eta * eta * u * u) * (one_m_u + eta * u * (1 - s2))
    value = omega**2 * eta * u * bracket / (t1**4 * den)
    return value if printed else -0.5 * value
