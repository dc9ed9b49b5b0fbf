#!/usr/bin/env python3
"""Print the size of every convention choice where the printed formulas and a
self-consistent model disagree, so each default can be audited numerically.
"""

from qthermo.counting import joint_prob
from qthermo.demux import hg_sensitivity, hg_sensitivity_full
from qthermo.equal_temp import qfi_equal
from qthermo.estimation import inverse_mu, prior_gain
from qthermo.gaussian_fisher import qfi_equal_limit_closed, qfi_matrix
from qthermo.model import SourcePair
from qthermo.oracle import fock_density, number_diagonal


def section(title):
    print(f"\n== {title}")


def main():
    section("imbalance gamma: gain F(T) / 2 H11 at s = 0 (should be 1)")
    for conv in ("consistent", "literal"):
        h = qfi_matrix(SourcePair(1.0, 1.0, 1.0, 0.5, conv), 0.0)
        print(f"  {conv:<10} {qfi_equal(1.0, 1.0, 0.5, 0.0).qfi / (2 * h.h11):.6f}")
    print(f"  prior_gain(s=0) with consistent gamma: {prior_gain(1.0, 1.0, 0.5, 0.0)['gain']:.12f}")

    section("equal-temperature closed form for H11: printed / numerical limit")
    for s in (0.0, 0.5, 0.9):
        num = qfi_matrix(SourcePair(1.0, 1.0, 1.0, 0.5), s).h11
        print(f"  s={s:<4} {qfi_equal_limit_closed(1.0, 1.0, 0.5, s, printed=True) / num:+.6f}")

    section("full-basis HG sensitivity: (s-1)^2 vs (1-s^2), against K = 80")
    pair = SourcePair(0.8, 1.2, 1.0, 0.5)
    for s in (0.01, 0.3, 0.6, 0.9, 1.0):
        ref = hg_sensitivity(pair, s, 80) if s < 1 else hg_sensitivity_full(pair, s)
        a = hg_sensitivity_full(pair, s)
        b = hg_sensitivity_full(pair, s, printed=True)
        print(f"  s={s:<4} corrected rel err {abs(a / ref - 1):.1e}   printed rel err {abs(b / ref - 1):.1e}")

    section("HG overlap exponent: M / H11 with K = 10 (physical bound is 1)")
    for s in (0.05, 0.5):
        h = qfi_matrix(pair, s).h11
        for exp in ("negative", "literal"):
            print(f"  s={s:<4} {exp:<9} {hg_sensitivity(pair, s, 10, 1, exp) / h:.4f}")

    section("joint count law: max |P - Fock diagonal| over n, m < 8")
    diag = number_diagonal(fock_density(pair, 0.5, 36))
    for series in ("gauss", "literal"):
        err = max(abs(joint_prob(n, m, pair, 0.5, series) - diag[n, m]) for n in range(8) for m in range(8))
        print(f"  {series:<6} {err:.2e}")

    section("1/mu at omega=10, T=(8, 10): eta = 0.1 vs 0.9")
    for s in (0.02, 0.5, 0.98, 0.999):
        for conv in ("resource", "literal"):
            a, b = (inverse_mu(qfi_matrix(SourcePair(8.0, 10.0, 10.0, eta), s), conv) for eta in (0.1, 0.9))
            print(f"  s={s:<5} {conv:<8} {a:.4f} vs {b:.4f}  diff {abs(a - b):.4f}")
    for conv in ("consistent", "literal"):
        a, b = (inverse_mu(qfi_matrix(SourcePair(8.0, 10.0, 10.0, eta, conv), 0.98)) for eta in (0.1, 0.9))
        print(f"  gamma {conv:<10} s=0.98 diff {abs(a - b):.4f}")
    print("  low occupancy, T=(1, 1.25):", end=" ")
    a, b = (inverse_mu(qfi_matrix(SourcePair(1.0, 1.25, 10.0, eta), 0.98)) for eta in (0.1, 0.9))
    print(f"diff {abs(a - b):.2e}")


if __name__ == "__main__":
    main()
