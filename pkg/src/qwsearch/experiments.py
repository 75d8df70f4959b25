"""Prediction-versus-dynamics studies built on the closed-form solver.

Measured peaks always come from the exact search spectrum, never from the
predictor, so the exponent fits here genuinely test the asymptotic claims.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import linalg
from scipy.stats import linregress

from .graphs import GraphSpec, build_graph, default_normalization, hamiltonian_for, normalize
from .predictor import (
    BoundNotApplicable,
    CostInputs,
    CostReport,
    CriticalPrediction,
    PredictorConfig,
    cost_model,
    off_critical_bound,
    predict_critical,
    triangle_bound,
)
from .rank_one import (
    DENSE_CAP,
    SearchSpectrum,
    evaluate,
    find_peak,
    solve_search_spectrum,
)
from .spectra import (
    GroupedSpectrum,
    SParams,
    analytic_spectrum,
    collapse,
    decompose,
    detect_quasi_degenerate,
    initial_state,
    s_params,
)

ANALYTIC_FAMILIES = ("complete", "hypercube", "rook", "bridged_complete")
BOUND_FACTORS = (0.25, 0.5, 2.0, 4.0)


class ExperimentError(RuntimeError):
    pass


def has_closed_form(spec: GraphSpec) -> bool:
    return spec.family in ANALYTIC_FAMILIES or (spec.family == "lattice" and spec.periodic)


def spectrum_for(
    spec: GraphSpec,
    marked: int = 0,
    mode: str | None = None,
    closed_form: bool | None = None,
    dense_cap: int = DENSE_CAP,
) -> tuple[GroupedSpectrum, str]:
    """Grouped spectrum plus the normalization actually applied.

    Vertex-transitive families use closed forms (any size); everything else is
    diagonalized densely up to ``dense_cap`` nodes.
    """
    if closed_form is None:
        closed_form = has_closed_form(spec)
    if closed_form:
        return analytic_spectrum(spec, mode), mode or "degree"
    if spec.num_nodes > dense_cap:
        raise ExperimentError(
            f"{spec.family} with n={spec.num_nodes} exceeds the dense cap {dense_cap}"
        )
    adjacency = build_graph(spec)
    mode = mode or default_normalization(adjacency)
    return decompose(normalize(adjacency, mode), marked), mode


@dataclass(frozen=True)
class BoundCheck:
    r: float
    bound: float
    measured_sup: float
    triangle: float = np.inf

    @property
    def passed(self) -> bool:
        return self.measured_sup <= self.bound

    def to_dict(self) -> dict:
        return {**asdict(self), "pass": self.passed}


@dataclass(frozen=True)
class ExperimentRecord:
    spec: GraphSpec
    marked: int
    D: int
    normalization: str
    r: float
    spectrum: GroupedSpectrum = field(repr=False)
    sparams: SParams = field(repr=False)
    prediction: CriticalPrediction
    measured_peak: tuple[float, float]
    agreement: dict
    cost: CostReport | None = None
    bound_checks: tuple[BoundCheck, ...] = ()

    def to_dict(self) -> dict:
        return {
            "graph": self.spec.to_dict(),
            "marked": self.marked,
            "normalization": self.normalization,
            "D": self.D,
            "r": self.r,
            "spectrum": self.spectrum.to_dict(),
            "sparams": self.sparams.to_dict(),
            "prediction": self.prediction.to_dict(),
            "measured_peak": {"time": self.measured_peak[0], "abs": self.measured_peak[1]},
            "agreement": dict(self.agreement),
            "cost": None if self.cost is None else self.cost.to_dict(),
            "bound_checks": [b.to_dict() for b in self.bound_checks],
        }


def sup_amplitude(ss: SearchSpectrum, state, horizon: float, samples: int = 20001) -> float:
    """Sampled supremum of |amplitude| on [0, horizon]."""
    t = np.linspace(0.0, horizon, samples)
    return float(np.abs(evaluate(ss, state, t)).max())


def audit_bounds(
    spectrum: GroupedSpectrum,
    sp: SParams,
    factors=BOUND_FACTORS,
    horizon_multiple: float = 20.0,
    samples: int = 20001,
    cfg: PredictorConfig = PredictorConfig(),
) -> tuple[BoundCheck, ...]:
    """Off-critical bound against the sampled sup over [0, K*pi/delta0]."""
    delta0 = np.sqrt(sp.epsilon) * sp.ratio
    horizon = horizon_multiple * np.pi / delta0
    checks = []
    for f in factors:
        r = f * sp.s1
        bound = off_critical_bound(sp, r, cfg)
        ss = solve_search_spectrum(spectrum, r)
        sup = sup_amplitude(ss, sp.epsilon, horizon, samples)
        checks.append(BoundCheck(float(r), bound, sup, triangle_bound(ss, sp.epsilon)))
    return tuple(checks)


def run_instance(
    spec: GraphSpec,
    marked: int = 0,
    r_policy: str | float = "critical",
    D_policy: int | str = "auto",
    cfg: PredictorConfig = PredictorConfig(),
    mode: str | None = None,
    initial_policy: str = "top_eigenvector",
    seed: int | None = None,
    horizon_multiple: float = 4.0,
    costs: CostInputs | None = CostInputs(),
    bound_factors=(),
    spectrum: GroupedSpectrum | None = None,
) -> ExperimentRecord:
    if spectrum is None:
        spectrum, mode = spectrum_for(spec, marked, mode)
    else:
        mode = mode or "given"
    D = detect_quasi_degenerate(spectrum, D_policy)
    st = initial_state(spectrum, D, initial_policy, seed)
    sp = s_params(spectrum, D, st.epsilon)
    pred = predict_critical(sp, cfg)
    r = pred.r_star if r_policy == "critical" else float(r_policy)
    ss = solve_search_spectrum(spectrum, r)
    peak = find_peak(ss, st, horizon_multiple)
    agreement = {
        "nu_rel_error": abs(peak[1] - pred.nu_pred) / pred.nu_pred,
        "T_rel_error": abs(peak[0] - pred.T_pred) / pred.T_pred,
    }
    cost = None
    if costs is not None:
        cost = cost_model(
            min(pred.nu_pred, 1.0), pred.T_pred, sp.epsilon, sp.gap, costs,
            epsilon_D=sp.epsilon_D if D > 1 else None,
        )
    checks = audit_bounds(spectrum, sp, bound_factors, cfg=cfg) if bound_factors and D == 1 else ()
    return ExperimentRecord(
        spec=spec, marked=marked, D=D, normalization=mode, r=float(r),
        spectrum=spectrum, sparams=sp, prediction=pred, measured_peak=peak,
        agreement=agreement, cost=cost, bound_checks=checks,
    )


@dataclass(frozen=True)
class SweepRow:
    r: float
    in_window: bool
    sup_amp: float
    peak_time: float
    bound: float

    def as_row(self) -> list:
        return [self.r, self.in_window, self.sup_amp, self.peak_time, self.bound]


def sweep_r(
    spectrum: GroupedSpectrum,
    r_grid,
    horizon_multiple: float = 4.0,
    D: int = 1,
    cfg: PredictorConfig = PredictorConfig(),
) -> list[SweepRow]:
    """Peak amplitude for each coupling; ``bound`` is NaN inside the window."""
    r_grid = np.asarray(r_grid, dtype=float)
    if r_grid.size == 0 or np.any(r_grid <= 0):
        raise ValueError("r grid must be non-empty and positive")
    st = initial_state(spectrum, D)
    sp = s_params(spectrum, D, st.epsilon)
    pred = predict_critical(sp, cfg)
    rows = []
    for r in r_grid:
        ss = solve_search_spectrum(spectrum, r)
        t, a = find_peak(ss, st, horizon_multiple)
        try:
            bound = off_critical_bound(sp, r, cfg) if D == 1 else np.nan
        except BoundNotApplicable:
            bound = np.nan
        rows.append(SweepRow(float(r), pred.in_window(r), a, t, bound))
    return rows


def default_r_grid(sp: SParams, points: int = 41) -> np.ndarray:
    """Log-spaced grid over [S1/2, 2 S1] that always contains S1 itself."""
    grid = sp.s1 * np.logspace(-np.log10(2.0), np.log10(2.0), points)
    return np.unique(np.append(grid, sp.s1))


@dataclass(frozen=True)
class ExponentFit:
    sizes: np.ndarray
    values: np.ndarray
    slope: float
    intercept: float
    r_squared: float
    stderr: float = 0.0

    def to_dict(self) -> dict:
        return {
            "sizes": self.sizes.tolist(),
            "values": self.values.tolist(),
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "stderr": self.stderr,
        }


def fit_exponent(sizes, values) -> ExponentFit:
    """Least-squares slope of log(value) against log(size)."""
    sizes = np.asarray(sizes, dtype=float)
    values = np.asarray(values, dtype=float)
    if sizes.size < 4:
        raise ValueError("exponent fit requires at least 4 sizes")
    if np.any(values <= 0) or np.any(sizes <= 0):
        raise ValueError("exponent fit needs positive sizes and values")
    order = np.argsort(sizes)
    sizes, values = sizes[order], values[order]
    fit = linregress(np.log(sizes), np.log(values))
    return ExponentFit(
        sizes, values, float(fit.slope), float(fit.intercept),
        float(min(max(fit.rvalue**2, 0.0), 1.0)), float(fit.stderr),
    )


def rook_dims(sigma: float, target: int) -> tuple[int, int]:
    """n1 = round(target^sigma) (at least 2), n2 = round(target / n1)."""
    n1 = max(2, int(round(target**sigma)))
    return n1, max(1, int(round(target / n1)))


def rook_block(sigma: float) -> str | int:
    """Top block used for a rook row: D = n1 for sigma < 1/4, else D = 1."""
    return "n1" if sigma < 0.25 else 1


def expected_exponents(sigma: float) -> dict[str, float]:
    """Asymptotic slopes of (T, nu) against log n for n1 = n^sigma."""
    if sigma < 0.25:
        return {"T": (1.0 - sigma) / 2.0, "nu": 0.0 - sigma / 2.0}
    if sigma < 1.0 / 3.0:
        return {"T": 1.0 - 1.5 * sigma, "nu": -(1.0 - 3.0 * sigma) / 2.0}
    return {"T": 0.5, "nu": 0.0}


@dataclass(frozen=True)
class RookPoint:
    sigma: float
    n1: int
    n2: int
    D: int
    T: float
    nu: float
    T_pred: float
    nu_pred: float
    gap: float

    @property
    def n(self) -> int:
        return self.n1 * self.n2


@dataclass(frozen=True)
class RookSweep:
    sigma: float
    points: tuple[RookPoint, ...]
    fit_T: ExponentFit
    fit_nu: ExponentFit
    achieved_sigma: float
    expected: dict

    def to_dict(self) -> dict:
        return {
            "sigma": self.sigma,
            "achieved_sigma": self.achieved_sigma,
            "expected": self.expected,
            "fit_T": self.fit_T.to_dict(),
            "fit_nu": self.fit_nu.to_dict(),
        }


def rook_point(sigma: float, n1: int, n2: int, horizon_multiple: float = 4.0) -> RookPoint:
    spec = GraphSpec("rook", n1=n1, n2=n2)
    spectrum = analytic_spectrum(spec)
    block = rook_block(sigma)
    D = n1 if block == "n1" else 1
    st = initial_state(spectrum, D)
    sp = s_params(spectrum, D, st.epsilon)
    pred = predict_critical(sp)
    ss = solve_search_spectrum(spectrum, pred.r_star)
    t, a = find_peak(ss, st, horizon_multiple)
    return RookPoint(sigma, n1, n2, D, t, a, pred.T_pred, pred.nu_pred, sp.gap)


def rook_sweep(sigma: float, exponents=range(10, 19), horizon_multiple: float = 4.0) -> RookSweep:
    dims = [rook_dims(sigma, 2**m) for m in exponents]
    if len(set(dims)) < 4:
        raise ValueError("rook sweep requires at least 4 distinct sizes")
    points = tuple(rook_point(sigma, n1, n2, horizon_multiple) for n1, n2 in dims)
    n = np.array([p.n for p in points], dtype=float)
    n1 = np.array([p.n1 for p in points], dtype=float)
    achieved = float(linregress(np.log(n), np.log(n1)).slope) if sigma > 0 else 0.0
    return RookSweep(
        sigma=sigma,
        points=points,
        fit_T=fit_exponent(n, [p.T for p in points]),
        fit_nu=fit_exponent(n, [p.nu for p in points]),
        achieved_sigma=achieved,
        expected=expected_exponents(achieved),
    )


def size_sweep_fit(
    sigma: float, exponents=range(10, 19), quantity: str = "T"
) -> ExponentFit:
    sweep = rook_sweep(sigma, exponents)
    if quantity == "T":
        return sweep.fit_T
    if quantity == "nu":
        return sweep.fit_nu
    raise ValueError(f"quantity must be 'T' or 'nu', got {quantity!r}")


@dataclass(frozen=True)
class TrotterAudit:
    times: np.ndarray = field(repr=False)
    errors: np.ndarray = field(repr=False)
    max_error: float
    constant: float
    scale: float
    limit: float = 10.0

    @property
    def passed(self) -> bool:
        return self.constant <= self.limit


def trotter_error_audit(
    spectrum: GroupedSpectrum,
    D: int,
    r: float | None = None,
    times=None,
    points: int = 2000,
    limit: float = 10.0,
) -> TrotterAudit:
    """Compare the full search dynamics with the exactly degenerate model.

    The constant is max over t of |difference| / (r gap_D sqrt(eps_D) t^2).
    """
    st = initial_state(spectrum, D)
    sp = s_params(spectrum, D, st.epsilon)
    if r is None:
        r = sp.s1
    if times is None:
        T = np.pi / (2.0 * np.sqrt(sp.epsilon_D) * sp.ratio)
        times = np.linspace(0.0, T, points + 1)[1:]
    times = np.asarray(times, dtype=float)
    full = evaluate(solve_search_spectrum(spectrum, r), st, times)
    degenerate = evaluate(solve_search_spectrum(collapse(spectrum, D), r), st.epsilon, times)
    err = np.abs(full - degenerate)
    scale = r * sp.gap_D * np.sqrt(sp.epsilon_D)
    if scale == 0.0:
        constant = 0.0 if err.max() <= 1e-10 else np.inf
    else:
        with np.errstate(divide="ignore"):
            constant = float(np.max(err / (scale * times**2)))
    return TrotterAudit(times, err, float(err.max()), constant, float(scale), limit)


def walk_matrix(adjacency: np.ndarray, lazy: bool = True) -> np.ndarray:
    deg = adjacency.sum(axis=1)
    p = adjacency / deg[:, None]
    return 0.5 * (np.eye(p.shape[0]) + p) if lazy else p


def hitting_times(adjacency: np.ndarray, marked: int, lazy: bool = True) -> np.ndarray:
    """Expected steps to first reach ``marked`` from each node (0 at the marked node)."""
    a = np.asarray(adjacency, dtype=float)
    n = a.shape[0]
    if n > DENSE_CAP:
        raise ExperimentError(f"hitting time limited to n <= {DENSE_CAP}")
    p = walk_matrix(a, lazy)
    keep = np.flatnonzero(np.arange(n) != marked)
    system = np.eye(keep.size) - p[np.ix_(keep, keep)]
    try:
        h = linalg.solve(system, np.ones(keep.size))
    except linalg.LinAlgError as exc:
        raise ExperimentError(f"singular hitting-time system: {exc}") from exc
    out = np.zeros(n)
    out[keep] = h
    return out


def hitting_time_exact(adjacency: np.ndarray, marked: int, lazy: bool = True) -> float:
    """Stationary-start hitting time, counting a start on the marked node as a return.

    By Kac's lemma the return contributes pi_w * (1/pi_w) = 1 step.
    """
    a = np.asarray(adjacency, dtype=float)
    deg = a.sum(axis=1)
    pi = deg / deg.sum()
    return float(pi @ hitting_times(a, marked, lazy) + 1.0)


def walk_gap(adjacency: np.ndarray, lazy: bool = True) -> float:
    deg = np.asarray(adjacency, dtype=float).sum(axis=1)
    s = adjacency / np.sqrt(np.outer(deg, deg))
    mu = np.linalg.eigvalsh(s)
    if lazy:
        mu = 0.5 * (1.0 + mu)
    return float(1.0 - mu[-2])


@dataclass(frozen=True)
class HittingBracket:
    ht: float
    epsilon: float
    gap: float

    @property
    def lower(self) -> float:
        return 1.0 / self.epsilon

    @property
    def upper(self) -> float:
        return 1.0 / (self.gap * self.epsilon)

    @property
    def inside(self) -> bool:
        return self.lower <= self.ht <= self.upper


def hitting_bracket(adjacency: np.ndarray, marked: int) -> HittingBracket:
    """Hitting time of the lazy walk against [1/eps, 1/(gap eps)], eps = pi_w."""
    deg = np.asarray(adjacency, dtype=float).sum(axis=1)
    return HittingBracket(
        hitting_time_exact(adjacency, marked), float(deg[marked] / deg.sum()), walk_gap(adjacency)
    )


def hamiltonian_and_spectrum(spec: GraphSpec, marked: int = 0, mode: str | None = None):
    """Dense Hamiltonian plus its decomposition, for oracle comparisons."""
    h = hamiltonian_for(spec, mode)
    return h, decompose(h, marked)
