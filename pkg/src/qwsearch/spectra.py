"""Grouped spectra of walk Hamiltonians and the weighted spectral sums S_k.

A :class:`GroupedSpectrum` holds the distinct eigenvalues of ``H`` together
with the squared projection of the marked node onto each eigenspace. All the
search predictions only depend on these (value, weight) pairs, which is why
vertex-transitive families can be handled at sizes far beyond dense
diagonalization through :func:`analytic_spectrum`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .graphs import GraphError, GraphSpec, Hamiltonian

GROUP_TOL = 1e-9
# closed forms are exact up to rounding, so only float-level duplicates merge
ANALYTIC_GROUP_TOL = 1e-13
K_MAX = 6


class SpectrumError(ValueError):
    pass


@dataclass(frozen=True)
class GroupedSpectrum:
    values: np.ndarray
    multiplicities: np.ndarray
    weights: np.ndarray
    marked: int | None = None
    full_basis: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        mults = np.asarray(self.multiplicities, dtype=np.int64)
        weights = np.asarray(self.weights, dtype=float)
        if not (values.shape == mults.shape == weights.shape) or values.ndim != 1:
            raise SpectrumError("values, multiplicities and weights must align")
        if values.size == 0:
            raise SpectrumError("empty spectrum")
        if np.any(np.diff(values) <= 0):
            raise SpectrumError("values must be strictly ascending")
        if np.any(mults < 1) or np.any(weights < 0):
            raise SpectrumError("multiplicities must be >= 1 and weights >= 0")
        for name, arr in (("values", values), ("multiplicities", mults), ("weights", weights)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return int(self.multiplicities.sum())

    @property
    def num_groups(self) -> int:
        return self.values.size

    def group_starts(self) -> np.ndarray:
        """Column offset of each group inside ``full_basis`` (ascending order)."""
        return np.concatenate([[0], np.cumsum(self.multiplicities)[:-1]])

    def top_counts(self) -> np.ndarray:
        """Admissible D values: eigenvalue counts of the top 1, 2, ... groups."""
        return np.cumsum(self.multiplicities[::-1])

    def groups_for(self, D: int) -> int:
        """Number of top groups that make up exactly D eigenvalues."""
        counts = self.top_counts()
        hit = np.flatnonzero(counts == D)
        if hit.size == 0:
            raise SpectrumError(f"D must respect eigenvalue groups (D={D})")
        return int(hit[0]) + 1

    def to_dict(self) -> dict:
        return {
            "values": self.values.tolist(),
            "multiplicities": self.multiplicities.tolist(),
            "weights": self.weights.tolist(),
        }


def group_levels(values, multiplicities, weights, tol: float = GROUP_TOL):
    """Sort eigenvalues and merge runs closer than ``tol`` (relative to max(1, |lambda|)).

    Returns ascending group values (multiplicity-weighted means), summed
    multiplicities, summed weights, and for each input level its group index.
    """
    values = np.asarray(values, dtype=float)
    multiplicities = np.asarray(multiplicities, dtype=np.int64)
    weights = np.asarray(weights, dtype=float)
    order = np.argsort(values, kind="stable")
    v = values[order]
    scale = max(1.0, float(np.max(np.abs(v))))
    new_group = np.concatenate([[True], np.diff(v) > tol * scale])
    gid_sorted = np.cumsum(new_group) - 1
    ng = gid_sorted[-1] + 1
    mult = np.bincount(gid_sorted, weights=multiplicities[order], minlength=ng)
    wsum = np.bincount(gid_sorted, weights=weights[order], minlength=ng)
    vsum = np.bincount(gid_sorted, weights=v * multiplicities[order], minlength=ng)
    gid = np.empty_like(gid_sorted)
    gid[order] = gid_sorted
    return vsum / mult, mult.astype(np.int64), wsum, gid


def _pin_top(values: np.ndarray) -> np.ndarray:
    if abs(values[-1] - 1.0) > 1e-10:
        raise SpectrumError(f"top eigenvalue {values[-1]!r} is not 1")
    values = values.copy()
    values[-1] = 1.0
    return values


def decompose(
    h: Hamiltonian | np.ndarray,
    marked: int,
    group_tol: float = GROUP_TOL,
    keep_basis: bool = True,
) -> GroupedSpectrum:
    """Exact eigendecomposition of ``H`` grouped into eigenspaces.

    The weight of a group is the squared norm of the projection of the
    marked basis vector onto that eigenspace.
    """
    m = h.matrix if isinstance(h, Hamiltonian) else np.asarray(h, dtype=float)
    n = m.shape[0]
    if not 0 <= marked < n:
        raise SpectrumError(f"marked node {marked} out of range for n={n}")
    lam, vecs = np.linalg.eigh(m)
    resid = np.max(np.linalg.norm(m @ vecs - vecs * lam, axis=0)) if n > 1 else 0.0
    if not np.isfinite(resid) or resid > 1e-10 * np.sqrt(n):
        raise np.linalg.LinAlgError(
            f"eigensolver residual {resid:.3e} exceeds {1e-10 * np.sqrt(n):.3e}"
        )
    values, mults, weights, _ = group_levels(lam, np.ones(n), vecs[marked] ** 2, group_tol)
    return GroupedSpectrum(
        _pin_top(values), mults, weights, marked, vecs if keep_basis else None
    )


def analytic_spectrum(
    spec: GraphSpec, mode: str | None = None, group_tol: float = ANALYTIC_GROUP_TOL
) -> GroupedSpectrum:
    """Closed-form grouped spectrum of a vertex-transitive family.

    Supported: complete, hypercube, periodic lattice, rook and bridged_complete.
    For these regular graphs degree, spectral_norm and the normalized-Laplacian
    modes coincide (H = A/d); ``affine_to_unit_interval`` maps onto [0, 1].
    Every node has weight multiplicity/n, so no marked node is needed.
    """
    f = spec.family
    if f == "complete":
        n = spec.n
        levels = [(n - 1.0, 1), (-1.0, n - 1)]
        degree = n - 1.0
    elif f == "hypercube":
        from math import comb

        d = spec.dim
        levels = [(d - 2.0 * k, comb(d, k)) for k in range(d + 1)]
        degree = float(d)
    elif f in ("rook", "bridged_complete"):
        n1, n2 = (spec.n1, spec.n2) if f == "rook" else (2, spec.n // 2)
        levels = [
            (n1 + n2 - 2.0, 1),
            (n2 - 2.0, n1 - 1),
            (n1 - 2.0, n2 - 1),
            (-2.0, (n1 - 1) * (n2 - 1)),
        ]
        degree = n1 + n2 - 2.0
    elif f == "lattice" and spec.periodic:
        eig = np.zeros(1)
        for side in spec.sides:
            if side == 1:
                ring = np.zeros(1)
            elif side == 2:
                ring = np.array([1.0, -1.0])
            else:
                ring = 2.0 * np.cos(2.0 * np.pi * np.arange(side) / side)
            eig = (eig[:, None] + ring[None, :]).ravel()
        degree = float(eig.max())
        levels = list(zip(eig.tolist(), [1] * eig.size))
    else:
        raise GraphError(f"no closed-form spectrum for {f!r} (periodic={spec.periodic})")

    raw = np.array([v for v, m in levels if m > 0])
    mult = np.array([m for _, m in levels if m > 0], dtype=np.int64)
    if degree <= 0:
        raise GraphError("graph has no edges")
    mode = mode or "degree"
    if mode in ("degree", "spectral_norm", "identity_minus_normalized_laplacian"):
        lam = raw / degree
    elif mode == "affine_to_unit_interval":
        lo = raw.min()
        lam = (raw - lo) / (degree - lo)
    else:
        raise GraphError(f"unknown normalization {mode!r}")
    n = int(mult.sum())
    values, mults, weights, _ = group_levels(lam, mult, mult / n, group_tol)
    return GroupedSpectrum(_pin_top(values), mults, weights, marked=None)


def collapse(spec: GroupedSpectrum, D: int) -> GroupedSpectrum:
    """Spectrum of the exactly degenerate model: the top D levels all sit at 1."""
    k = spec.groups_for(D)
    keep = spec.num_groups - k
    return GroupedSpectrum(
        np.append(spec.values[:keep], 1.0),
        np.append(spec.multiplicities[:keep], D),
        np.append(spec.weights[:keep], spec.weights[keep:].sum()),
        spec.marked,
    )


@dataclass(frozen=True)
class SParams:
    """S_k sums over the levels below the excluded top-D block.

    ``s[k-1]`` is S_k for k = 1..6. For D = 1 ``epsilon == epsilon_D`` and the
    sums are the ordinary S_k; for D > 1 they are the block-excluded sums.
    """

    s: np.ndarray
    D: int
    epsilon: float
    epsilon_D: float
    gap_D: float
    gap: float
    n: int

    @property
    def s1(self) -> float:
        return float(self.s[0])

    @property
    def s2(self) -> float:
        return float(self.s[1])

    @property
    def s3(self) -> float:
        return float(self.s[2])

    @property
    def ratio(self) -> float:
        """S_1 / sqrt(S_2), the leading-order peak amplitude."""
        return self.s1 / np.sqrt(self.s2)

    def to_dict(self) -> dict:
        return {
            "s": self.s.tolist(),
            "D": self.D,
            "epsilon": self.epsilon,
            "epsilon_D": self.epsilon_D,
            "gap_D": self.gap_D,
            "gap": self.gap,
            "n": self.n,
        }


def s_sums(values, weights, k_max: int = K_MAX) -> np.ndarray:
    """sum_g weight_g / (1 - value_g)^k for k = 1..k_max."""
    dist = 1.0 - np.asarray(values, dtype=float)
    ks = np.arange(1, k_max + 1)[:, None]
    return (np.asarray(weights, dtype=float)[None, :] / dist[None, :] ** ks).sum(axis=1)


def s_params(spec: GroupedSpectrum, D: int = 1, epsilon: float | None = None) -> SParams:
    if D < 1 or D >= spec.n:
        raise SpectrumError(f"need 1 <= D < n (D={D}, n={spec.n})")
    k = spec.groups_for(D)
    keep = spec.num_groups - k
    vals, wts = spec.values[:keep], spec.weights[:keep]
    if np.any(vals >= 1.0):
        raise SpectrumError("degenerate top not excluded")
    eps_D = float(spec.weights[keep:].sum())
    if epsilon is None:
        epsilon = rotated_overlap(spec, D)[0]
    return SParams(
        s=s_sums(vals, wts),
        D=int(D),
        epsilon=float(epsilon),
        epsilon_D=eps_D,
        gap_D=float(1.0 - spec.values[keep]),
        gap=float(1.0 - vals[-1]),
        n=spec.n,
    )


def detect_quasi_degenerate(
    spec: GroupedSpectrum,
    policy: int | str = "auto",
    theta_near: float = 0.1,
    theta_far: float = 0.1,
    d_max: int = 32,
) -> int:
    """Size of the quasi-degenerate top block.

    ``policy`` is either an explicit D (validated against group boundaries)
    or ``"auto"``: the smallest D with gap_D <= theta_near*sqrt(eps_D) and
    gap >= theta_far.
    """
    counts = spec.top_counts()
    if policy != "auto":
        spec.groups_for(int(policy))
        return int(policy)
    for k, D in enumerate(counts[:-1], start=1):
        if D > d_max:
            break
        keep = spec.num_groups - k
        gap_D = 1.0 - spec.values[keep]
        gap = 1.0 - spec.values[keep - 1]
        eps_D = spec.weights[keep:].sum()
        if gap_D <= theta_near * np.sqrt(eps_D) and gap >= theta_far:
            return int(D)
    return int(counts[0])


class InitialState(NamedTuple):
    """Start state inside the top block, described by its marked-node overlaps.

    ``group_amplitudes`` maps a group index to the overlap of the marked node
    with the start state's component in that eigenspace; they sum to
    sqrt(epsilon) (sign fixed so the total is non-negative).
    """

    epsilon: float
    epsilon_D: float
    group_amplitudes: dict
    vector: np.ndarray | None


def initial_state(
    spec: GroupedSpectrum,
    D: int = 1,
    policy: str = "top_eigenvector",
    seed: int | None = None,
) -> InitialState:
    k = spec.groups_for(D)
    top = spec.num_groups - 1
    eps_D = float(spec.weights[spec.num_groups - k :].sum())
    if eps_D == 0.0:
        raise SpectrumError("marked node orthogonal to the top-D block")
    basis = spec.full_basis
    w = spec.marked

    if policy == "top_eigenvector":
        # within a degenerate top level, the top eigenvector is the normalized
        # projection of the marked node, which maximizes the overlap
        eps = float(spec.weights[top])
        vec = None
        if basis is not None:
            cols = basis[:, spec.n - spec.multiplicities[top] :]
            proj = cols @ cols[w]
            vec = proj / np.linalg.norm(proj) if eps > 0 else cols[:, -1]
        return InitialState(eps, eps_D, {top: np.sqrt(eps)}, vec)

    if policy != "uniform_in_D":
        raise SpectrumError(f"unknown initial state policy {policy!r}")
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(D)
    c /= np.linalg.norm(c)
    groups = range(spec.num_groups - k, spec.num_groups)
    starts = spec.group_starts() - (spec.n - D)
    if basis is not None:
        cols = basis[:, spec.n - D :]
        amps = {
            g: float(c[starts[g] : starts[g] + spec.multiplicities[g]]
                     @ cols[w, starts[g] : starts[g] + spec.multiplicities[g]])
            for g in groups
        }
        vec = cols @ c
    else:
        # Without eigenvectors: rotational invariance inside each eigenspace lets
        # the marked-node direction be taken as the first basis vector of the group.
        amps = {g: float(np.sqrt(spec.weights[g]) * c[starts[g]]) for g in groups}
        vec = None
    total = sum(amps.values())
    if total < 0:
        amps = {g: -a for g, a in amps.items()}
        vec = None if vec is None else -vec
    return InitialState(float(total**2), eps_D, amps, vec)


def rotated_overlap(
    spec: GroupedSpectrum,
    D: int = 1,
    policy: str = "top_eigenvector",
    seed: int | None = None,
) -> tuple[float, float]:
    """(epsilon, epsilon_D) for the chosen start state inside the top-D block."""
    st = initial_state(spec, D, policy, seed)
    return st.epsilon, st.epsilon_D
