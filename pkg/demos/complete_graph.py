"""Search on the complete graph: predicted versus measured peak across sizes."""

from __future__ import annotations

import numpy as np

from qwsearch.graphs import GraphSpec
from qwsearch.predictor import predict_critical
from qwsearch.rank_one import find_peak, solve_search_spectrum
from qwsearch.spectra import analytic_spectrum, s_params


def main():
    print(f"{'n':>7} {'T_pred':>10} {'T':>10} {'nu_pred':>9} {'nu':>9} regime")
    for m in range(6, 17, 2):
        gs = analytic_spectrum(GraphSpec("complete", n=2**m))
        sp = s_params(gs, 1)
        pred = predict_critical(sp)
        t, a = find_peak(solve_search_spectrum(gs, sp.s1), sp.epsilon)
        print(f"{2**m:>7} {pred.T_pred:10.3f} {t:10.3f} {pred.nu_pred:9.5f} {a:9.5f} {pred.regime}")
    print("T grows like pi sqrt(n)/2:", np.pi * np.sqrt(2**16) / 2)


if __name__ == "__main__":
    main()
