"""Tail risk of the Merton ``x1`` statistic and value-at-risk, with and without signals.

Bankruptcy is operationalised as the lower-tail event ``x1 < -lambda``,
equivalently

    V(t_e) < D * exp(-lambda*sigma*sqrt(tau) - (r + sigma**2/2)*tau),

with ``tau = maturity - t_e``. The distribution-free reference level is the
Chebyshev-type bound ``phi_frac * Var(x1) / lambda**2`` where ``phi_frac`` is
the share of two-sided tail mass sitting in the lower tail.

``x1`` is always computed with the volatility the firm *perceives* (the
no-signal ``sigma``); a signal changes only how dispersed ``ln V`` actually is.
If the true ``sigma(theta)`` were plugged into ``x1`` as well, its variance
would be ``t_e / tau`` in both regimes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from revdoor.errors import InvalidInputError, NumericError, require_finite
from revdoor.paths import standard_normals


@dataclass(frozen=True)
class TailConfig:
    lam: float = 1.0
    phi_frac: float = 0.5
    eval_time: float | None = None
    confidence: float = 0.99

    def __post_init__(self) -> None:
        require_finite(lam=self.lam, phi_frac=self.phi_frac, confidence=self.confidence)
        if self.lam <= 0:
            raise InvalidInputError(f"lambda must be > 0, got {self.lam}")
        if not 0 < self.phi_frac <= 1:
            raise InvalidInputError(f"phi_frac must lie in (0, 1], got {self.phi_frac}")
        if not 0 < self.confidence < 1:
            raise InvalidInputError(f"confidence must lie in (0, 1), got {self.confidence}")
        if self.eval_time is not None:
            require_finite(eval_time=self.eval_time)
            if self.eval_time <= 0:
                raise InvalidInputError(f"eval_time must be > 0, got {self.eval_time}")


@dataclass(frozen=True)
class RegimeTail:
    """Tail statistics for one regime."""

    var_x1: float
    var_x1_se: float
    mean_x1: float
    tail_prob: float
    tail_prob_se: float
    chebyshev_bound: float
    value_at_risk: float


@dataclass(frozen=True)
class TailRiskReport:
    var_x1_signal: float
    var_x1_nosignal: float
    tail_prob_signal: float
    tail_prob_nosignal: float
    chebyshev_bound_nosignal: float
    bankruptcy_flag: bool
    var_signal: float
    var_nosignal: float
    signal: RegimeTail
    nosignal: RegimeTail
    bankruptcy_threshold: float


def simulate_firm_values(v0: float, mu: float, sigma: float, t: float, n_paths: int, seed: int) -> np.ndarray:
    """Exact GBM draws of ``V(t)``; a common ``seed`` gives matched shocks across regimes."""
    require_finite(v0=v0, mu=mu, sigma=sigma, t=t)
    if v0 <= 0 or sigma < 0 or t < 0:
        raise InvalidInputError("need v0 > 0, sigma >= 0, t >= 0")
    z = standard_normals(seed, n_paths)
    return v0 * np.exp((mu - 0.5 * sigma * sigma) * t + sigma * math.sqrt(t) * z)


def x1_samples(value_paths, d: float, r: float, sigma: float, eval_time: float, maturity: float) -> np.ndarray:
    """``x1`` from firm values observed at ``eval_time`` over the remaining tenor."""
    require_finite(d=d, r=r, sigma=sigma, eval_time=eval_time, maturity=maturity)
    if not eval_time < maturity:
        raise InvalidInputError(f"eval_time ({eval_time}) must precede maturity ({maturity})")
    if d <= 0 or sigma <= 0:
        raise InvalidInputError("x1 needs d > 0 and sigma > 0")
    v = np.asarray(value_paths, dtype=float)
    if np.any(v <= 0) or not np.all(np.isfinite(v)):
        raise NumericError("firm values must be finite and positive")
    tau = maturity - eval_time
    return (np.log(v / d) + (r + 0.5 * sigma * sigma) * tau) / (sigma * math.sqrt(tau))


def variance_with_se(samples) -> tuple[float, float]:
    """Unbiased sample variance and its large-sample standard error."""
    x = np.asarray(samples, dtype=float)
    n = x.shape[0]
    if n < 2:
        raise InvalidInputError("need at least two samples for a variance")
    c = x - x.mean()
    var = float(c @ c / (n - 1))
    m4 = float(np.mean(c**4))
    return var, math.sqrt(max(m4 - var * var, 0.0) / n)


def tail_probability(samples, lam: float) -> tuple[float, float]:
    """Fraction of samples below ``-lam`` and its binomial standard error."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise InvalidInputError("tail_probability needs at least one sample")
    p = float(np.mean(x < -lam))
    return p, math.sqrt(p * (1.0 - p) / x.size)


def chebyshev_bound(sample_variance: float, lam: float, phi_frac: float) -> float:
    """``phi_frac * variance / lam**2`` clamped to ``[0, 1]``."""
    if lam <= 0:
        raise InvalidInputError(f"lambda must be > 0, got {lam}")
    return min(max(phi_frac * sample_variance / (lam * lam), 0.0), 1.0)


def bankruptcy_threshold(d: float, r: float, sigma: float, lam: float, tau: float) -> float:
    """Firm value below which ``x1 < -lam``."""
    return d * math.exp(-lam * sigma * math.sqrt(tau) - (r + 0.5 * sigma * sigma) * tau)


def var_estimate(losses, confidence: float) -> float:
    """Empirical loss quantile, linear interpolation between order statistics."""
    if not 0 < confidence < 1:
        raise InvalidInputError(f"confidence must lie in (0, 1), got {confidence}")
    x = np.asarray(losses, dtype=float)
    if x.size == 0:
        raise InvalidInputError("var_estimate needs at least one sample")
    return float(np.quantile(x, confidence, method="linear"))


def quantile_stderr(n: int, confidence: float, density_at_quantile: float) -> float:
    """Asymptotic SE ``sqrt(p(1-p)/n) / f(q_p)`` of an empirical quantile."""
    return math.sqrt(confidence * (1.0 - confidence) / n) / density_at_quantile


def regime_tail(
    values, v0: float, d: float, r: float, sigma: float, eval_time: float, maturity: float, cfg: TailConfig
) -> RegimeTail:
    """Tail statistics for firm values ``values`` observed at ``eval_time``.

    Losses for VaR are ``v0 - V(t_e)``.
    """
    x1 = x1_samples(values, d, r, sigma, eval_time, maturity)
    var, var_se = variance_with_se(x1)
    p, p_se = tail_probability(x1, cfg.lam)
    losses = v0 - np.asarray(values, dtype=float)
    return RegimeTail(
        var_x1=var,
        var_x1_se=var_se,
        mean_x1=float(x1.mean()),
        tail_prob=p,
        tail_prob_se=p_se,
        chebyshev_bound=chebyshev_bound(var, cfg.lam, cfg.phi_frac),
        value_at_risk=var_estimate(losses, cfg.confidence),
    )


def bankruptcy_compare(
    values_signal,
    values_nosignal,
    *,
    v0_signal: float,
    v0_nosignal: float,
    d: float,
    r: float,
    sigma: float,
    maturity: float,
    cfg: TailConfig,
) -> TailRiskReport:
    """Compare the two regimes on matched draws.

    ``sigma`` is the no-signal (perceived) volatility used inside ``x1`` for
    both regimes. The flag is raised when the signal regime's bankruptcy
    probability exceeds the no-signal Chebyshev level and is strictly higher
    than the no-signal probability itself, so identical regimes never flag.
    """
    vs = np.asarray(values_signal, dtype=float)
    vn = np.asarray(values_nosignal, dtype=float)
    if vs.shape != vn.shape:
        raise InvalidInputError(f"regime samples differ in shape: {vs.shape} vs {vn.shape}")
    t_e = cfg.eval_time
    if t_e is None:
        raise InvalidInputError("TailConfig.eval_time must be set")
    sig = regime_tail(vs, v0_signal, d, r, sigma, t_e, maturity, cfg)
    nos = regime_tail(vn, v0_nosignal, d, r, sigma, t_e, maturity, cfg)
    return TailRiskReport(
        var_x1_signal=sig.var_x1,
        var_x1_nosignal=nos.var_x1,
        tail_prob_signal=sig.tail_prob,
        tail_prob_nosignal=nos.tail_prob,
        chebyshev_bound_nosignal=nos.chebyshev_bound,
        bankruptcy_flag=sig.tail_prob > nos.chebyshev_bound and sig.tail_prob > nos.tail_prob,
        var_signal=sig.value_at_risk,
        var_nosignal=nos.value_at_risk,
        signal=sig,
        nosignal=nos,
        bankruptcy_threshold=bankruptcy_threshold(d, r, sigma, cfg.lam, maturity - t_e),
    )
