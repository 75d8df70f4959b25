"""Classical lazy-walk hitting times against the [1/eps, 1/(gap eps)] bracket."""

from __future__ import annotations

from qwsearch.experiments import fit_exponent, hitting_bracket
from qwsearch.graphs import GraphSpec, build_graph


def main():
    specs = [
        GraphSpec("complete", n=128),
        GraphSpec("hypercube", dim=7),
        GraphSpec("lattice", sides=(12, 12)),
        GraphSpec("joined_complete", n=128),
        GraphSpec("erdos_renyi", n=128, p=0.1, seed=1),
    ]
    for spec in specs:
        b = hitting_bracket(build_graph(spec), 1)
        print(f"{spec.family:16s} {b.lower:9.1f} <= {b.ht:9.1f} <= {b.upper:9.1f}")
    ns, hts = [], []
    for n2 in (32, 64, 128, 256, 512):
        b = hitting_bracket(build_graph(GraphSpec("rook", n1=4, n2=n2)), 0)
        ns.append(4 * n2)
        hts.append(b.ht)
    print(f"rook 4 x n2 hitting-time exponent: {fit_exponent(ns, hts).slope:.3f}")


if __name__ == "__main__":
    main()
