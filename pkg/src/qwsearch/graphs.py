"""Graph families and their normalization into walk Hamiltonians.

Every Hamiltonian produced here has largest eigenvalue exactly 1 (to 1e-10).
Negative eigenvalues are allowed: all downstream formulas only need
``1 - lambda_i > 0`` for the non-top levels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Literal

import numpy as np
from scipy.sparse.csgraph import connected_components

Family = Literal[
    "complete",
    "complete_bipartite",
    "hypercube",
    "lattice",
    "erdos_renyi",
    "joined_complete",
    "bridged_complete",
    "rook",
]
Normalization = Literal[
    "degree",
    "spectral_norm",
    "identity_minus_normalized_laplacian",
    "affine_to_unit_interval",
]

FAMILIES: tuple[str, ...] = Family.__args__
NORMALIZATIONS: tuple[str, ...] = Normalization.__args__

ER_MAX_ATTEMPTS = 100
TOP_TOL = 1e-10


class GraphError(ValueError):
    """Invalid graph specification or a graph that cannot be normalized."""


@dataclass(frozen=True)
class GraphSpec:
    """Family name plus the integer/real parameters that family uses.

    Unused parameters are ignored. ``seed`` only matters for ``erdos_renyi``,
    whose sampler is numpy's PCG64 via ``np.random.default_rng(seed)``.
    """

    family: Family
    n: int | None = None
    n1: int | None = None
    n2: int | None = None
    dim: int | None = None
    sides: tuple[int, ...] | None = None
    periodic: bool = True
    p: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise GraphError(f"unknown family {self.family!r}")
        if self.sides is not None:
            object.__setattr__(self, "sides", tuple(int(s) for s in self.sides))
        f = self.family
        if f in ("complete", "erdos_renyi"):
            _require_positive(n=self.n)
            if f == "erdos_renyi" and (self.p is None or not 0.0 < self.p <= 1.0):
                raise GraphError("erdos_renyi needs 0 < p <= 1")
        elif f in ("complete_bipartite", "rook"):
            _require_positive(n1=self.n1, n2=self.n2)
        elif f == "hypercube":
            _require_positive(dim=self.dim)
        elif f == "lattice":
            if not self.sides or any(s < 1 for s in self.sides):
                raise GraphError("lattice needs sides, each >= 1")
        elif f in ("joined_complete", "bridged_complete"):
            if self.n is None or self.n < 4 or self.n % 2:
                raise GraphError(f"{f} needs an even n >= 4")

    @property
    def num_nodes(self) -> int:
        f = self.family
        if f in ("complete", "erdos_renyi", "joined_complete", "bridged_complete"):
            return self.n
        if f == "complete_bipartite":
            return self.n1 + self.n2
        if f == "rook":
            return self.n1 * self.n2
        if f == "hypercube":
            return 2**self.dim
        return int(np.prod(self.sides))

    @property
    def vertex_transitive(self) -> bool:
        if self.family == "complete_bipartite":
            return self.n1 == self.n2
        if self.family == "lattice":
            return self.periodic
        return self.family in ("complete", "hypercube", "rook", "bridged_complete")

    def to_dict(self) -> dict:
        out = {"family": self.family}
        for key in ("n", "n1", "n2", "dim", "p"):
            if getattr(self, key) is not None:
                out[key] = getattr(self, key)
        if self.sides is not None:
            out["sides"] = list(self.sides)
        if self.family == "lattice":
            out["periodic"] = self.periodic
        if self.family == "erdos_renyi":
            out["seed"] = self.seed
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "GraphSpec":
        d = dict(d)
        if "sides" in d:
            d["sides"] = tuple(d["sides"])
        return cls(**d)


def _require_positive(**params):
    for name, value in params.items():
        if value is None or value < 1:
            raise GraphError(f"{name} must be an integer >= 1")


@dataclass(frozen=True)
class Hamiltonian:
    matrix: np.ndarray = field(repr=False)
    normalization: str

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise GraphError("Hamiltonian must be square")
        if not np.allclose(m, m.T, rtol=0.0, atol=1e-12):
            raise GraphError("Hamiltonian must be symmetric")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def complete_adjacency(n: int) -> np.ndarray:
    return np.ones((n, n)) - np.eye(n)


def build_graph(spec: GraphSpec) -> np.ndarray:
    """Dense 0/1 adjacency matrix of a connected simple graph."""
    f = spec.family
    if f == "complete":
        a = complete_adjacency(spec.n)
    elif f == "complete_bipartite":
        n = spec.n1 + spec.n2
        a = np.zeros((n, n))
        a[: spec.n1, spec.n1 :] = 1.0
        a[spec.n1 :, : spec.n1] = 1.0
    elif f == "hypercube":
        idx = np.arange(2**spec.dim)
        a = np.zeros((idx.size, idx.size))
        for bit in range(spec.dim):
            a[idx, idx ^ (1 << bit)] = 1.0
    elif f == "lattice":
        a = _lattice(spec.sides, spec.periodic)
    elif f == "erdos_renyi":
        a = _erdos_renyi(spec.n, spec.p, spec.seed)
    elif f == "joined_complete":
        h = spec.n // 2
        a = np.zeros((spec.n, spec.n))
        a[:h, :h] = complete_adjacency(h)
        a[h:, h:] = complete_adjacency(h)
        a[0, h] = a[h, 0] = 1.0
    elif f == "bridged_complete":
        a = rook_adjacency(2, spec.n // 2)
    else:
        a = rook_adjacency(spec.n1, spec.n2)
    if a.shape[0] > 1 and not is_connected(a):
        raise GraphError(f"{f} graph is disconnected")
    return a


def rook_adjacency(n1: int, n2: int) -> np.ndarray:
    """Cartesian product K_n1 x K_n2 as a Kronecker sum; node (i, j) -> i*n2 + j."""
    return np.kron(complete_adjacency(n1), np.eye(n2)) + np.kron(
        np.eye(n1), complete_adjacency(n2)
    )


def _lattice(sides: tuple[int, ...], periodic: bool) -> np.ndarray:
    n = int(np.prod(sides))
    coords = np.array(list(product(*(range(s) for s in sides))))
    strides = np.array([int(np.prod(sides[k + 1 :])) for k in range(len(sides))])
    a = np.zeros((n, n))
    for k, side in enumerate(sides):
        if side == 1:
            continue
        nxt = coords[:, k] + 1
        if periodic:
            nxt %= side
            ok = nxt != coords[:, k]
        else:
            ok = nxt < side
        src = np.flatnonzero(ok)
        dst = src + (nxt[ok] - coords[ok, k]) * strides[k]
        a[src, dst] = a[dst, src] = 1.0
    return a


def _erdos_renyi(n: int, p: float, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    iu = np.triu_indices(n, k=1)
    for _ in range(ER_MAX_ATTEMPTS):
        a = np.zeros((n, n))
        a[iu] = rng.random(iu[0].size) < p
        a = a + a.T
        if n == 1 or is_connected(a):
            return a
    raise GraphError(f"disconnected sample after {ER_MAX_ATTEMPTS} attempts")


def is_connected(adjacency: np.ndarray) -> bool:
    count, _ = connected_components(adjacency != 0, directed=False)
    return count == 1


def is_regular(adjacency: np.ndarray) -> bool:
    deg = adjacency.sum(axis=1)
    return bool(np.all(deg == deg[0]))


def default_normalization(adjacency: np.ndarray) -> str:
    return "degree" if is_regular(adjacency) else "spectral_norm"


def normalize(adjacency: np.ndarray, mode: str | None = None) -> Hamiltonian:
    """Scale a connected adjacency matrix into a Hamiltonian with top eigenvalue 1."""
    a = np.asarray(adjacency, dtype=float)
    if not np.any(a):
        raise GraphError("cannot normalize the zero matrix")
    mode = mode or default_normalization(a)
    if mode not in NORMALIZATIONS:
        raise GraphError(f"unknown normalization {mode!r}")
    deg = a.sum(axis=1)

    if mode == "degree":
        if not is_regular(a):
            raise GraphError("not regular: degree normalization needs a regular graph")
        h = a / deg[0]
        # Row sums are exactly 1, so lambda_max = 1 by Perron-Frobenius.
        return Hamiltonian(h, mode)
    if mode == "identity_minus_normalized_laplacian":
        if np.any(deg == 0):
            raise GraphError("isolated node: normalized Laplacian undefined")
        # I - (I - D^-1/2 A D^-1/2); sqrt(d*d) is exact so regular graphs give A/d bit for bit
        h = a / np.sqrt(np.outer(deg, deg))
        return Hamiltonian(h, mode)

    ev = np.linalg.eigvalsh(a)
    if mode == "spectral_norm":
        h = a / np.max(np.abs(ev))
    else:
        if ev[-1] - ev[0] <= 0:
            raise GraphError("flat spectrum cannot be mapped onto [0, 1]")
        h = (a - ev[0] * np.eye(a.shape[0])) / (ev[-1] - ev[0])
    top = np.linalg.eigvalsh(h)[-1]
    if abs(top - 1.0) > 1e-13:
        h = h / top
    return Hamiltonian(h, mode)


def hamiltonian_for(spec: GraphSpec, mode: str | None = None) -> Hamiltonian:
    return normalize(build_graph(spec), mode)


def edge_list(adjacency: np.ndarray) -> str:
    """Edge list text: one ``u v`` pair per line, 0-indexed, u < v, ascending."""
    u, v = np.nonzero(np.triu(adjacency, k=1))
    return "".join(f"{i} {j}\n" for i, j in zip(u.tolist(), v.tolist()))


def write_edge_list(adjacency: np.ndarray, path) -> None:
    with open(path, "w") as fh:
        fh.write(edge_list(adjacency))
