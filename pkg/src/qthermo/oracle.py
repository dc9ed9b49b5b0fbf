"""Brute-force ground truth in a truncated two-mode Fock space.

The image-plane state is built without the Gaussian formulas: the mode
correlation matrix <a_i^dag a_j> is diagonalized, two independent thermal
modes are prepared with the eigen-occupancies, and the passive two-mode
unitary that rotates them back is applied.  The Fock space keeps all states
with n+ + n- < dim.  A passive unitary never changes the total photon number,
so it acts exactly inside that space and the only error is the omitted tail.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.linalg import expm
from scipy.special import eval_hermite, gammaln

from .gaussian_fisher import SLDRep
from .model import DomainError, SourcePair, as_overlap, build_image_state

__all__ = [
    "FockState",
    "TruncationError",
    "fock_density",
    "required_dim",
    "annihilators",
    "second_moments",
    "number_diagonal",
    "fd_derivative",
    "density_derivative",
    "spectral_qfi",
    "spectral_qfi_matrix",
    "sld_operator",
    "quadrature_overlap",
    "hg_overlap_quadrature",
]


class TruncationError(DomainError):
    pass


@dataclass(frozen=True)
class FockState:
    """Density matrix on the basis ``basis[k] = (n+, n-)`` with n+ + n- < dim."""

    dim: int
    rho: np.ndarray = field(repr=False)
    basis: np.ndarray = field(repr=False)
    tail_bound: float


def _basis(dim: int) -> np.ndarray:
    return np.array([(n, m) for n in range(dim) for m in range(dim - n)], dtype=int)


def _thermal_tail(occ: np.ndarray, dim: int) -> float:
    """Probability that two independent thermal modes hold >= dim photons in total."""
    n = np.arange(dim)
    ps = []
    for x in occ:
        if x <= 0:
            p = np.zeros(dim)
            p[0] = 1.0
        else:
            q = x / (x + 1.0)
            p = q**n / (x + 1.0)
        ps.append(p)
    inside = math.fsum((np.convolve(ps[0], ps[1])[:dim]).tolist())
    return max(1.0 - inside, 0.0)


def required_dim(occ, tol: float = 1e-10, start: int = 2, limit: int = 400) -> int:
    occ = np.asarray(occ, dtype=float)
    dim = start
    while _thermal_tail(occ, dim) >= tol:
        dim += 1
        if dim > limit:
            raise TruncationError(f"no dim <= {limit} reaches tail {tol:g}")
    return dim


def annihilators(basis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Matrices of a+ and a- on the truncated basis."""
    index = {tuple(b): k for k, b in enumerate(basis)}
    size = len(basis)
    a_plus = np.zeros((size, size))
    a_minus = np.zeros((size, size))
    for k, (n, m) in enumerate(basis):
        if n > 0:
            a_plus[index[(n - 1, m)], k] = math.sqrt(n)
        if m > 0:
            a_minus[index[(n, m - 1)], k] = math.sqrt(m)
    return a_plus, a_minus


def fock_density(pair: SourcePair, geom, dim: int | None = None, tail_tol: float = 1e-10) -> FockState:
    """Image-plane density matrix by rotating two independent thermal modes."""
    corr = build_image_state(pair, as_overlap(geom)).pmatrix
    occ, vecs = np.linalg.eigh(corr)
    occ = np.clip(occ, 0.0, None)
    need = required_dim(occ, tail_tol)
    if dim is None:
        dim = need
    tail = _thermal_tail(occ, dim)
    if tail >= tail_tol:
        raise TruncationError(f"dim={dim} leaves trace tail {tail:.3g}; need dim >= {need}")
    basis = _basis(dim)
    diag = np.empty(len(basis))
    for k, (n, m) in enumerate(basis):
        diag[k] = math.prod(
            (x**c / (x + 1.0) ** (c + 1) if x > 0 else float(c == 0)) for x, c in zip(occ, (n, m))
        )
    # a_i -> sum_k U_ik b_k; U is a real rotation by theta after fixing det = +1
    if np.linalg.det(vecs) < 0:
        vecs[:, 1] *= -1
    theta = math.atan2(vecs[1, 0], vecs[0, 0])
    a_plus, a_minus = annihilators(basis)
    gen = theta * (a_minus.T @ a_plus - a_plus.T @ a_minus)
    rho = np.zeros_like(gen)
    total = basis.sum(axis=1)
    for n in range(dim):
        # the generator conserves n+ + n-, so exponentiate one block at a time
        idx = np.flatnonzero(total == n)
        w = expm(gen[np.ix_(idx, idx)])
        rho[np.ix_(idx, idx)] = (w * diag[idx]) @ w.T
    return FockState(dim=dim, rho=0.5 * (rho + rho.T), basis=basis, tail_bound=tail)


def second_moments(state: FockState) -> np.ndarray:
    """sigma_ij = <{dA_i, dA_j^dag}> for A = (a+, a-, a+^dag, a-^dag).

    Built from normal-ordered expectations so the truncation edge does not enter.
    """
    a = annihilators(state.basis)
    corr = np.array([[np.trace(state.rho @ a[i].T @ a[j]) for j in range(2)] for i in range(2)])
    # <{a_i, a_j^dag}> = 2 <a_j^dag a_i> + delta_ij ; <{a_i^dag, a_j}> = 2 <a_i^dag a_j> + delta_ij
    anom = np.array([[np.trace(state.rho @ a[i] @ a[j]) for j in range(2)] for i in range(2)])
    cov = np.zeros((4, 4), dtype=complex)
    cov[:2, :2] = 2.0 * corr.T + np.eye(2)
    cov[2:, 2:] = 2.0 * corr + np.eye(2)
    cov[:2, 2:] = 2.0 * anom
    cov[2:, :2] = 2.0 * anom.conj()
    return cov.real if np.allclose(cov.imag, 0.0) else cov


def number_diagonal(state: FockState) -> np.ndarray:
    """P(n+, n-) on a dim x dim grid (zero outside the truncated triangle)."""
    out = np.zeros((state.dim, state.dim))
    out[state.basis[:, 0], state.basis[:, 1]] = np.diag(state.rho)
    return out


def fd_derivative(f: Callable, x: float, step: float):
    """Central difference with two levels of Richardson extrapolation.

    Returns ``(derivative, error_estimate)``; works for array-valued f.
    """
    def central(h):
        return (np.asarray(f(x + h)) - np.asarray(f(x - h))) / (2.0 * h)

    d1, d2, d3 = central(step), central(step / 2), central(step / 4)
    r1 = (4 * d2 - d1) / 3
    r2 = (4 * d3 - d2) / 3
    best = (16 * r2 - r1) / 15
    err = np.max(np.abs(best - r2))
    return best, float(err)


def density_derivative(pair: SourcePair, geom, dim: int, which: int, rel_step: float = 1e-3):
    s = as_overlap(geom)
    t0 = pair.t1 if which == 1 else pair.t2

    def rho_at(t):
        if which == 1:
            p = SourcePair(t, pair.t2, pair.omega, pair.eta, pair.gamma_convention)
        else:
            p = SourcePair(pair.t1, t, pair.omega, pair.eta, pair.gamma_convention)
        return fock_density(p, s, dim, tail_tol=1.0).rho

    return fd_derivative(rho_at, t0, rel_step * t0)


@dataclass(frozen=True)
class SpectralResult:
    value: float
    discarded: float


def spectral_qfi(rho: np.ndarray, drho_i: np.ndarray, drho_j: np.ndarray | None = None, cutoff: float = 1e-12) -> SpectralResult:
    """2 sum_ab Re(<a|d_i rho|b><b|d_j rho|a>) / (p_a + p_b) over non-negligible pairs."""
    if drho_j is None:
        drho_j = drho_i
    p, v = np.linalg.eigh(rho)
    di = v.conj().T @ drho_i @ v
    dj = v.conj().T @ drho_j @ v
    denom = p[:, None] + p[None, :]
    keep = denom > cutoff
    num = (di * dj.T).real
    value = 2.0 * float(np.sum(num[keep] / denom[keep]))
    discarded = float(np.sum(np.abs(di[~keep])))
    if discarded > 1e-8:
        warnings.warn(f"spectral QFI discarded derivative weight {discarded:.3g}", RuntimeWarning, stacklevel=2)
    return SpectralResult(value, discarded)


def spectral_qfi_matrix(pair: SourcePair, geom, dim: int) -> np.ndarray:
    rho = fock_density(pair, geom, dim, tail_tol=1.0).rho
    d = [density_derivative(pair, geom, dim, i)[0] for i in (1, 2)]
    h = np.empty((2, 2))
    for i in range(2):
        for j in range(2):
            h[i, j] = spectral_qfi(rho, d[i], d[j]).value
    return h


def sld_operator(rep: SLDRep, basis: np.ndarray) -> np.ndarray:
    """Fock-space matrix of dA^dag X dA + offset (normal ordered, zero displacement)."""
    ap, am = annihilators(basis)
    ann = [ap, am]
    x = rep.quad
    op = np.zeros_like(ap, dtype=complex)
    for i in range(2):
        for j in range(2):
            # upper block: a_i^dag X_ij a_j ; lower block: a_i X_(i+2)(j+2) a_j^dag
            op += x[i, j] * ann[i].T @ ann[j]
            op += x[i + 2, j + 2] * (ann[j].T @ ann[i] + (i == j) * np.eye(len(basis)))
            if abs(x[i, j + 2]) > 0 or abs(x[i + 2, j]) > 0:
                op += x[i, j + 2] * ann[i].T @ ann[j].T + x[i + 2, j] * ann[i] @ ann[j]
    op += rep.offset * np.eye(len(basis))
    return op


def _psf(x, varpi):
    return (2.0 / (math.pi * varpi**2)) ** 0.25 * np.exp(-x * x / varpi**2)


def quadrature_overlap(d: float, varpi: float = 1.0) -> float:
    """Overlap integral of the two displaced PSFs by adaptive quadrature."""
    val, err = integrate.quad(
        lambda x: _psf(x + d / 2, varpi) * _psf(x - d / 2, varpi),
        -np.inf, np.inf, epsabs=1e-13, epsrel=1e-13, limit=200,
    )
    if err > 1e-10:
        raise ArithmeticError(f"overlap quadrature error estimate {err:.3g}")
    return val


def hg_mode(k: int, x, varpi: float = 1.0):
    """Normalized Hermite-Gauss mode matched to the PSF."""
    lognorm = 0.25 * math.log(2.0 / (math.pi * varpi**2)) - 0.5 * (k * math.log(2.0) + gammaln(k + 1))
    return math.exp(lognorm) * eval_hermite(k, math.sqrt(2) * x / varpi) * np.exp(-x * x / varpi**2)


def hg_overlap_quadrature(k: int, shift: float, varpi: float = 1.0) -> float:
    """int u_k(x) psi(x - shift) dx."""
    val, _ = integrate.quad(
        lambda x: hg_mode(k, x, varpi) * _psf(x - shift, varpi),
        -np.inf, np.inf, epsabs=1e-14, epsrel=1e-13, limit=400,
    )
    return val
