"""Quick oracle-equivalence checks runnable without pytest."""
from __future__ import annotations

import numpy as np

from .counting import joint_prob
from .demux import hg_beta, hg_sensitivity, hg_sensitivity_from_moments
from .equal_temp import qfi_equal, qfi_equal_series
from .gaussian_fisher import qfi_matrix, sld, weak_commutation
from .model import SourcePair, build_image_state, gaussian_overlap
from .oracle import (
    fock_density,
    number_diagonal,
    quadrature_overlap,
    second_moments,
    sld_operator,
    spectral_qfi_matrix,
)


def _rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


def checks():
    """Yield ``(name, error, tolerance)`` triples."""
    pair = SourcePair(0.8, 1.2, 1.0, 0.5)
    s = 0.5
    dim = 40
    state = fock_density(pair, s, dim)
    yield "covariance vs Fock moments", _rel(second_moments(state), build_image_state(pair, s).cov), 1e-8
    yield "QFI matrix vs spectral QFI", _rel(qfi_matrix(pair, s).matrix, spectral_qfi_matrix(pair, s, dim)), 1e-5
    eq = SourcePair(1.0, 1.0, 1.0, 0.5)
    h = spectral_qfi_matrix(eq, 0.3, dim)
    yield "equal-T QFI vs spectral QFI", _rel(h.sum(), qfi_equal(1.0, 1.0, 0.5, 0.3).qfi), 1e-5
    yield "series vs closed form", _rel(qfi_equal_series(1.0, 1.0, 0.5, 0.5), qfi_equal(1.0, 1.0, 0.5, 0.5).qfi), 1e-10
    ls = [sld_operator(sld(pair, s, i), state.basis) for i in (1, 2)]
    comm = np.trace(state.rho @ (ls[0] @ ls[1] - ls[1] @ ls[0]))
    yield "Fock commutator expectation", float(abs(comm)), 1e-6
    yield "weak commutation (Gaussian)", abs(weak_commutation(pair, s)), 1e-9
    diag = number_diagonal(state)
    grid = np.array([[joint_prob(n, m, pair, s) if n + m < dim else 0.0 for m in range(dim)] for n in range(dim)])
    yield "joint counts vs Fock diagonal", float(np.max(np.abs(grid - diag))), 1e-8
    yield "overlap vs quadrature", _rel(gaussian_overlap(2.0, 1.0), quadrature_overlap(2.0, 1.0)), 1e-10
    b2 = hg_beta(np.arange(41), 2.0, 1.0) ** 2
    yield "sum beta_k^2 = 1", abs(b2.sum() - 1.0), 1e-12
    yield "HG closed form vs Wick assembly", _rel(hg_sensitivity(pair, s, 8), hg_sensitivity_from_moments(pair, s, 8)), 1e-8


def run(stream=None) -> bool:
    import sys

    stream = stream or sys.stdout
    ok = True
    for name, err, tol in checks():
        passed = err < tol
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'}  {name}: {err:.3e} (tol {tol:g})", file=stream)
    return ok
