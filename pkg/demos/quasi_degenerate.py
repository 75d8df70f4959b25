"""Two cliques joined by an edge: a nearly degenerate top pair forces D = 2."""

from __future__ import annotations

from qwsearch.experiments import run_instance, trotter_error_audit
from qwsearch.graphs import GraphSpec


def main():
    for n in (256, 512, 1024, 2048):
        spec = GraphSpec("joined_complete", n=n)
        rec = run_instance(spec, marked=1)
        audit = trotter_error_audit(rec.spectrum, rec.D)
        p = rec.prediction
        print(
            f"n={n:5d} D={rec.D} regime={p.regime:17s} nu_pred={p.nu_pred:.4f} "
            f"nu={rec.measured_peak[1]:.4f} T_pred={p.T_pred:8.2f} T={rec.measured_peak[0]:8.2f} "
            f"degenerate-model error={audit.max_error:.1e} (C={audit.constant:.3f})"
        )


if __name__ == "__main__":
    main()
