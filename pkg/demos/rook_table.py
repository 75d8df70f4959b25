"""Scaling exponents of peak time and amplitude on rook graphs n1 x n2 with n1 ~ n^sigma."""

from __future__ import annotations

from qwsearch.experiments import rook_sweep


def main():
    print(f"{'sigma':>6} {'achieved':>8} {'slope T':>8} {'expect':>7} {'slope nu':>9} {'expect':>7}")
    for sigma in (0.0, 0.2, 0.28, 0.4, 0.5):
        sw = rook_sweep(sigma, range(10, 19))
        print(
            f"{sigma:6.2f} {sw.achieved_sigma:8.3f} {sw.fit_T.slope:8.3f} {sw.expected['T']:7.3f} "
            f"{sw.fit_nu.slope:9.3f} {sw.expected['nu']:7.3f}"
        )


if __name__ == "__main__":
    main()
