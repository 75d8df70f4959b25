"""Closed-form predictions and validity conditions for the search algorithm."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Literal

import numpy as np

from .spectra import SParams

Regime = Literal["standard", "quasi_degenerate", "out_of_validity"]
Optimality = Literal["optimal", "suboptimal", "sufficient_only", "out_of_validity"]


class BoundNotApplicable(ValueError):
    pass


@dataclass(frozen=True)
class PredictorConfig:
    c: float = 0.1
    c_prime: float = 0.1
    beta: float = 0.1
    c1: float = 0.1
    theta_opt: float = 0.5

    def __post_init__(self):
        for name in ("c", "c_prime", "beta", "c1"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1], got {value!r}")
        if not 0.0 < self.theta_opt <= 1.0:
            raise ValueError("theta_opt must lie in (0, 1]")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ConditionMargin:
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return self.rhs / self.lhs if self.lhs > 0 else np.inf

    @property
    def passed(self) -> bool:
        return self.margin > 1.0

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "margin": self.margin, "pass": self.passed}


def _overlap(sp: SParams) -> float:
    """epsilon for D = 1, epsilon_D for the block-excluded parameters."""
    return sp.epsilon if sp.D == 1 else sp.epsilon_D


def spectral_condition(sp: SParams, cfg: PredictorConfig = PredictorConfig()) -> ConditionMargin:
    """sqrt(eps) < c * min(S1 S2 / S3, gap * sqrt(S2)); eps -> eps_D when D > 1."""
    rhs = cfg.c * min(sp.s1 * sp.s2 / sp.s3, sp.gap * np.sqrt(sp.s2))
    return ConditionMargin(float(np.sqrt(_overlap(sp))), float(rhs))


def check_spectral_condition(
    sp: SParams, cfg: PredictorConfig = PredictorConfig()
) -> tuple[bool, float]:
    m = spectral_condition(sp, cfg)
    return m.passed, m.margin


def quasi_degenerate_condition(
    sp: SParams, cfg: PredictorConfig = PredictorConfig()
) -> tuple[bool, dict[str, ConditionMargin]]:
    """Both the block spectral condition and the near-degeneracy lower bound on sqrt(eps)."""
    if sp.D < 2:
        raise ValueError("quasi-degenerate condition needs D > 1")
    near = ConditionMargin(
        lhs=float(sp.s2**1.5 * sp.gap_D / (cfg.c1 * sp.s1**2)),
        rhs=float(np.sqrt(sp.epsilon)),
    )
    margins = {"spectral": spectral_condition(sp, cfg), "near_degenerate": near}
    return all(m.passed for m in margins.values()), margins


@dataclass(frozen=True)
class CriticalPrediction:
    r_star: float
    delta0: float
    eta: float
    T_pred: float
    nu_pred: float
    window_halfwidth: float
    condition_margins: dict = field(default_factory=dict)
    regime: Regime = "standard"
    D: int = 1
    ratio: float = 1.0

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in
               ("r_star", "delta0", "eta", "T_pred", "nu_pred", "window_halfwidth", "regime", "D", "ratio")}
        out["condition_margins"] = {k: m.to_dict() for k, m in self.condition_margins.items()}
        return out

    def in_window(self, r: float) -> bool:
        return abs(r - self.r_star) <= self.window_halfwidth


def predict_critical(sp: SParams, cfg: PredictorConfig = PredictorConfig()) -> CriticalPrediction:
    """Leading-order peak time and amplitude at r = S1 (block-excluded S1 when D > 1).

    Predictions are emitted even outside the validity region; ``regime`` says
    whether they are backed by the conditions.
    """
    eps_x = _overlap(sp)
    ratio = sp.ratio
    delta0 = np.sqrt(eps_x) * ratio
    if sp.D == 1:
        margins = {"spectral": spectral_condition(sp, cfg)}
        ok = margins["spectral"].passed
        regime = "standard" if ok else "out_of_validity"
    else:
        ok, margins = quasi_degenerate_condition(sp, cfg)
        regime = "quasi_degenerate" if ok else "out_of_validity"
    return CriticalPrediction(
        r_star=sp.s1,
        delta0=float(delta0),
        eta=float(sp.s3 * np.sqrt(eps_x) / sp.s2**1.5),
        T_pred=float(np.pi / (2.0 * delta0)),
        nu_pred=float(np.sqrt(sp.epsilon / eps_x) * ratio),
        window_halfwidth=float(cfg.beta * np.sqrt(eps_x * sp.s2)),
        condition_margins=margins,
        regime=regime,
        D=sp.D,
        ratio=float(ratio),
    )


def classify_optimality(
    pred: CriticalPrediction, D: int | None = None, theta_opt: float = 0.5
) -> Optimality:
    """Single-size advisory label; the exponent fit over sizes is authoritative."""
    D = pred.D if D is None else D
    if pred.regime == "out_of_validity":
        return "out_of_validity"
    if D == 1:
        return "optimal" if pred.nu_pred >= theta_opt else "suboptimal"
    return "sufficient_only" if pred.ratio >= theta_opt else "suboptimal"


def off_critical_bound(
    sp: SParams, r: float, cfg: PredictorConfig = PredictorConfig()
) -> float:
    """Upper bound on sup_t |<w|exp(-i H_search t)|v>| away from the critical window.

    r > S1: 2 sqrt(eps) r / (r - S1).  r < S1: 2 sqrt(eps) r / (S1 - r) + sqrt(eps).
    """
    eps = sp.epsilon
    half = cfg.beta * np.sqrt(eps * sp.s2)
    if abs(r - sp.s1) <= half:
        raise BoundNotApplicable(
            f"bound not applicable: r={r!r} lies inside the window S1 +/- {half:.3e}"
        )
    root = np.sqrt(eps)
    if r > sp.s1:
        return float(2.0 * root * r / (r - sp.s1))
    return float(2.0 * root * r / (sp.s1 - r) + root)


def triangle_bound(ss, epsilon: float) -> float:
    """sqrt(eps) * sum_a |gamma_a|^2 / |E_a - r|: always valid, from the exact roots."""
    return float(np.sqrt(epsilon) * np.sum(ss.residues / np.abs(ss.shifts)))


@dataclass(frozen=True)
class CostInputs:
    setup: float = 1.0
    oracle: float = 1.0
    measure: float = 1.0

    def __post_init__(self):
        if min(self.setup, self.oracle, self.measure) < 0:
            raise ValueError("costs must be nonnegative")


@dataclass(frozen=True)
class CostReport:
    t_aa: float
    t_search_amp_amp: float
    t_search_repeat: float
    ht_lower: float
    ht_upper: float
    costs: CostInputs
    t_quasi_degenerate: float | None = None

    def to_dict(self) -> dict:
        out = asdict(self)
        out["costs"] = asdict(self.costs)
        return out


def cost_model(
    nu: float,
    T: float,
    epsilon: float,
    gap: float,
    costs: CostInputs = CostInputs(),
    epsilon_D: float | None = None,
) -> CostReport:
    """Abstract query/time cost of search, amplitude amplification and hitting-time bounds."""
    if not 0.0 < nu <= 1.0 + 1e-12:
        raise ValueError(f"nu must lie in (0, 1], got {nu!r}")
    if not T > 0:
        raise ValueError("T must be positive")
    S, C, M = costs.setup, costs.oracle, costs.measure
    qd = None
    if epsilon_D is not None:
        qd = float(np.sqrt(epsilon_D / epsilon) * S + C / np.sqrt(epsilon) + M)
    return CostReport(
        t_aa=float((S + C) / np.sqrt(epsilon) + M),
        t_search_amp_amp=float((S + T * C + C) / nu + M),
        t_search_repeat=float((S + T * C + M) / nu**2),
        ht_lower=float(1.0 / epsilon),
        # a gap above 1 (negative eigenvalues) would invert the bracket
        ht_upper=float(1.0 / (min(gap, 1.0) * epsilon)),
        costs=costs,
        t_quasi_degenerate=qd,
    )
