"""Exact dynamics of ``H_search = r H + |w><w|`` from the secular equation.

Only eigenvectors of ``H_search`` that overlap the marked node enter the
search amplitude. Their energies are the roots of

    F(E) = sum_g w_g / (E - r lambda_g) = 1,

one root per gap between consecutive weighted poles plus one above the top
pole. Each root is located in shifted coordinates ``tau = E - p_o`` around
its nearer pole ``p_o``; the differences ``p_o - p_g = r (lambda_o - lambda_g)``
are formed without cancellation, so roots lying within 1e-30 of a pole are
still resolved to full relative precision.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .graphs import Hamiltonian
from .spectra import GroupedSpectrum, InitialState, initial_state

DENSE_CAP = 4096
MAX_ITER = 200
BLOCK = 256
PEAK_GRID = 4096


class RankOneError(RuntimeError):
    pass


@dataclass(frozen=True)
class SearchSpectrum:
    """Overlap-carrying spectrum of ``H_search``.

    ``origin[a]`` indexes ``poles`` (the weighted groups); ``tau[a]`` is the
    root's offset from that pole. ``group_index`` maps poles back to groups
    of the source spectrum, so start-state amplitudes can be attached.
    """

    r: float
    poles: np.ndarray
    weights: np.ndarray
    group_index: np.ndarray
    origin: np.ndarray
    tau: np.ndarray
    residues: np.ndarray
    trivial_levels: tuple[tuple[float, int], ...] = field(default=())

    @property
    def roots(self) -> np.ndarray:
        return self.r * self.poles[self.origin] + self.tau

    def gaps_to(self, g: int) -> np.ndarray:
        """E_a - r*lambda_g for every root, free of cancellation."""
        return self.r * (self.poles[self.origin] - self.poles[g]) + self.tau

    @property
    def top(self) -> int:
        return self.poles.size - 1

    @property
    def shifts(self) -> np.ndarray:
        """E_a - r, measured from the top pole."""
        return self.gaps_to(self.top)

    def secular_residual(self) -> np.ndarray:
        out = np.empty(self.tau.size)
        for sl in _blocks(self.tau.size):
            d = self.r * (self.poles[self.origin[sl], None] - self.poles[None, :])
            out[sl] = (self.weights / (d + self.tau[sl, None])).sum(axis=1) - 1.0
        return out

    def interlaced(self) -> bool:
        """Root a strictly inside (p_a, p_{a+1}); the last one in (p_top, p_top + 1]."""
        n = self.poles.size
        if self.tau.size != n:
            return False
        a = np.arange(n - 1)
        o = self.origin[:-1]
        below = self.r * (self.poles[o] - self.poles[a]) + self.tau[:-1]
        above = self.r * (self.poles[a + 1] - self.poles[o]) - self.tau[:-1]
        last = self.tau[-1]
        return bool(np.all(below > 0) and np.all(above > 0) and 0 < last <= 1.0)

    def sum_rule_error(self) -> float:
        return float(abs(np.sum(self.residues / self.shifts) - 1.0))

    def check(self) -> dict:
        res = self.secular_residual()
        return {
            "max_secular_residual": float(np.max(np.abs(res))),
            "interlaced": self.interlaced(),
            "sum_rule_error": self.sum_rule_error(),
        }


def _blocks(m: int, size: int = BLOCK):
    for start in range(0, m, size):
        yield slice(start, min(start + size, m))


def _rest(d: np.ndarray, w: np.ndarray, tau: np.ndarray, own: np.ndarray):
    """Sum over non-origin poles of w/(d+tau) and its tau-derivative."""
    x = d + tau[:, None]
    x[own] = 1.0
    t = np.where(own, 0.0, w / x)
    return t.sum(axis=1), -(t / x).sum(axis=1)


def _solve_block(d, w, wo, lo, hi, tau0):
    """Safeguarded Newton on psi(tau) = w_o + tau (R(tau) - 1) inside (lo, hi).

    f = w_o/tau + R - 1 is strictly decreasing, with f(lo) > 0 > f(hi).
    """
    own = d == 0.0
    tau = tau0.copy()
    lo, hi = lo.copy(), hi.copy()
    active = np.ones(tau.size, dtype=bool)
    for _ in range(MAX_ITER):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            return tau
        t = tau[idx]
        rest, drest = _rest(d[idx], w, t, own[idx])
        f = wo[idx] / t + rest - 1.0
        pos = f > 0
        lo[idx] = np.where(pos, t, lo[idx])
        hi[idx] = np.where(pos, hi[idx], t)
        psi = wo[idx] + t * (rest - 1.0)
        dpsi = rest - 1.0 + t * drest
        with np.errstate(divide="ignore", invalid="ignore"):
            step = t - psi / dpsi
        bad = ~np.isfinite(step) | (step <= lo[idx]) | (step >= hi[idx])
        step = np.where(bad, 0.5 * (lo[idx] + hi[idx]), step)
        scale = np.maximum(np.abs(step), np.abs(t))
        done = (np.abs(step - t) <= 4e-16 * scale) | (f == 0.0) | (
            hi[idx] - lo[idx] <= 4e-16 * np.maximum(np.abs(lo[idx]), np.abs(hi[idx]))
        )
        tau[idx] = np.where(f == 0.0, t, step)
        active[idx[done]] = False
    raise RankOneError(
        f"secular solve did not converge for {int(active.sum())} roots; "
        f"first brackets {list(zip(lo[active][:3], hi[active][:3]))}"
    )


def solve_search_spectrum(spec: GroupedSpectrum, r: float) -> SearchSpectrum:
    if not r > 0 or not np.isfinite(r):
        raise RankOneError(f"coupling r must be positive and finite (got {r!r})")
    keep = np.flatnonzero(spec.weights > 0)
    lam = spec.values[keep]
    w = spec.weights[keep]
    G = lam.size
    trivial = tuple(
        (float(r * v), int(m - (1 if wt > 0 else 0)))
        for v, m, wt in zip(spec.values, spec.multiplicities, spec.weights)
        if m - (1 if wt > 0 else 0) > 0
    )

    # Origin selection: the sign of F - 1 at each interval midpoint tells which
    # pole the root is nearer to.
    origin = np.arange(G)
    lo = np.zeros(G)
    hi = np.ones(G)
    if G > 1:
        half = 0.5 * r * np.diff(lam)
        mid_f = np.empty(G - 1)
        for sl in _blocks(G - 1):
            d = r * (lam[sl, None] - lam[None, :]) + half[sl, None]
            mid_f[sl] = (w / d).sum(axis=1) - 1.0
        upper = mid_f > 0
        origin[:-1] = np.where(upper, np.arange(1, G), np.arange(G - 1))
        lo[:-1] = np.where(upper, -half, 0.0)
        hi[:-1] = np.where(upper, 0.0, half)

    wo = w[origin]
    tau = np.empty(G)
    for sl in _blocks(G):
        d = r * (lam[origin[sl], None] - lam[None, :])
        own = d == 0.0
        # first guess: pole-dominated linearisation tau ~ w_o / (1 - R(0))
        x = np.where(own, 1.0, d)
        r0 = np.where(own, 0.0, w / x).sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            guess = wo[sl] / (1.0 - r0)
        inside = np.isfinite(guess) & (guess > lo[sl]) & (guess < hi[sl])
        guess = np.where(inside, guess, 0.5 * (lo[sl] + hi[sl]))
        tau[sl] = _solve_block(d, w, wo[sl], lo[sl], hi[sl], guess)

    inv = np.empty(G)
    for sl in _blocks(G):
        d = r * (lam[origin[sl], None] - lam[None, :]) + tau[sl, None]
        inv[sl] = (w / d**2).sum(axis=1)
    return SearchSpectrum(
        r=float(r),
        poles=lam,
        weights=w,
        group_index=keep,
        origin=origin,
        tau=tau,
        residues=1.0 / inv,
        trivial_levels=trivial,
    )


def _coefficients(ss: SearchSpectrum, amplitudes: dict) -> np.ndarray:
    """c_a = |gamma_a|^2 * sum_g u_g / (E_a - r lambda_g)."""
    pos = {int(g): k for k, g in enumerate(ss.group_index)}
    c = np.zeros(ss.tau.size)
    for g, u in amplitudes.items():
        if u == 0.0:
            continue
        if int(g) not in pos:
            raise RankOneError(f"start state overlaps group {g} which carries no weight")
        c += u / ss.gaps_to(pos[int(g)])
    return ss.residues * c


def _as_amplitudes(ss: SearchSpectrum, state) -> dict:
    if isinstance(state, InitialState):
        return state.group_amplitudes
    if isinstance(state, dict):
        return state
    # a bare epsilon: start in the top eigenvector
    return {int(ss.group_index[-1]): float(np.sqrt(state))}


@dataclass(frozen=True)
class AmplitudeCurve:
    times: np.ndarray
    amplitudes: np.ndarray
    peak_time: float
    peak_abs: float

    @classmethod
    def from_samples(cls, times, amplitudes) -> "AmplitudeCurve":
        times = np.asarray(times, dtype=float)
        amplitudes = np.asarray(amplitudes, dtype=complex)
        k = int(np.argmax(np.abs(amplitudes)))
        return cls(times, amplitudes, float(times[k]), float(abs(amplitudes[k])))

    @property
    def abs(self) -> np.ndarray:
        return np.abs(self.amplitudes)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["t", "re", "im", "abs"])
            for t, a in zip(self.times, self.amplitudes):
                out.writerow([f"{v:.17g}" for v in (t, a.real, a.imag, abs(a))])


def evaluate(ss: SearchSpectrum, state, times) -> np.ndarray:
    """Closed-form <w| exp(-i H_search t) |start> at each time.

    ``state`` is an epsilon (start in the top eigenvector), an
    :class:`InitialState`, or a mapping group -> marked-node overlap.
    """
    coeff = _coefficients(ss, _as_amplitudes(ss, state))
    times = np.atleast_1d(np.asarray(times, dtype=float))
    shifts = ss.shifts
    out = np.empty(times.size, dtype=complex)
    for sl in _blocks(times.size, 512):
        t = times[sl]
        out[sl] = np.exp(-1j * ss.r * t) * (np.exp(-1j * np.outer(t, shifts)) @ coeff)
    return out


def amplitude_curve(ss: SearchSpectrum, state, times) -> AmplitudeCurve:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or np.any(np.diff(times) < 0):
        raise ValueError("times must be a 1-d ascending array")
    return AmplitudeCurve.from_samples(times, evaluate(ss, state, times))


def dense_oracle(
    h: Hamiltonian | np.ndarray,
    marked: int,
    r: float,
    times,
    initial_state: np.ndarray | None = None,
    cap: int = DENSE_CAP,
) -> AmplitudeCurve:
    """Reference amplitudes from explicit diagonalization of ``H_search``."""
    m = h.matrix if isinstance(h, Hamiltonian) else np.asarray(h, dtype=float)
    n = m.shape[0]
    if n > cap:
        raise RankOneError(f"dense oracle limited to n <= {cap} (got {n})")
    if initial_state is None:
        _, vecs = np.linalg.eigh(m)
        initial_state = vecs[:, -1] * (1.0 if vecs[marked, -1] >= 0 else -1.0)
    hs = r * m
    hs[marked, marked] += 1.0
    mu, basis = np.linalg.eigh(hs)
    left = basis[marked]
    right = basis.T @ np.asarray(initial_state, dtype=float)
    times = np.asarray(times, dtype=float)
    amps = np.empty(times.size, dtype=complex)
    for sl in _blocks(times.size, 512):
        amps[sl] = np.exp(-1j * np.outer(times[sl], mu)) @ (left * right)
    return AmplitudeCurve.from_samples(times, amps)


def find_peak(
    ss: SearchSpectrum,
    state,
    horizon_multiple: float = 4.0,
    grid: int = PEAK_GRID,
    first_within: float = 0.02,
) -> tuple[float, float]:
    """Locate the search peak on [0, K*pi/delta] with delta = E_top - r.

    Only the top root lies above r, so delta is the one positive gap E_a - r.

    The earliest local maximum of the sampled |amplitude| that comes within
    ``first_within`` (relative) of the sampled global maximum is refined with
    bounded Brent minimization to 1e-6 relative time tolerance.
    """
    if horizon_multiple < 1:
        raise ValueError("horizon multiple K must be >= 1")
    amps = _as_amplitudes(ss, state)
    if ss.tau.size == 1:
        return 0.0, float(abs(evaluate(ss, amps, [0.0])[0]))
    delta = float(ss.shifts[-1])
    if not delta > 0:
        raise RankOneError("no dynamics: delta = 0")
    horizon = horizon_multiple * np.pi / delta
    t = np.linspace(0.0, horizon, grid)
    a = np.abs(evaluate(ss, amps, t))
    best = a.max()
    is_peak = np.r_[a[0] > a[1], (a[1:-1] >= a[:-2]) & (a[1:-1] >= a[2:]), a[-1] >= a[-2]]
    k = int(np.flatnonzero(is_peak & (a >= (1.0 - first_within) * best))[0])
    lo, hi = t[max(k - 1, 0)], t[min(k + 1, grid - 1)]
    res = minimize_scalar(
        lambda s: -abs(evaluate(ss, amps, [s])[0]),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": max(1e-6 * t[k], 1e-12)},
    )
    if -res.fun >= a[k]:
        return float(res.x), float(-res.fun)
    return float(t[k]), float(a[k])


def start_amplitudes(spec: GroupedSpectrum, D: int = 1, policy: str = "top_eigenvector", seed=None):
    """Convenience wrapper returning the InitialState used by the solvers."""
    return initial_state(spec, D, policy, seed)
