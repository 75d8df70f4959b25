"""Peak amplitude as the coupling r moves away from S1, against the off-critical bound."""

from __future__ import annotations

from qwsearch.experiments import audit_bounds, default_r_grid, sweep_r
from qwsearch.graphs import GraphSpec
from qwsearch.spectra import analytic_spectrum, s_params


def main():
    gs = analytic_spectrum(GraphSpec("complete", n=1024))
    sp = s_params(gs, 1)
    for row in sweep_r(gs, default_r_grid(sp, 15)):
        flag = "window" if row.in_window else f"bound {row.bound:.4f}"
        print(f"r/S1 = {row.r / sp.s1:6.3f}  sup = {row.sup_amp:.4f}  {flag}")

    # the r < S1 bound is not always respected on multi-level spectra
    rook = analytic_spectrum(GraphSpec("rook", n1=16, n2=256))
    for c in audit_bounds(rook, s_params(rook, 1)):
        verdict = "ok" if c.passed else "VIOLATED"
        print(f"rook 16x256 r = {c.r:.4f}: sup {c.measured_sup:.5f} bound {c.bound:.5f} "
              f"triangle {c.triangle:.5f} {verdict}")


if __name__ == "__main__":
    main()
