"""Participation and incentive-compatibility checks for the regulator.

The career option pays ``(alpha*V - K)^+``. Priced as equity it is worth
``(alpha*V - alpha*D)^+``, so the regulator's decision hinges on how her
current package ``K`` compares with ``alpha*D``.

Truth-telling is checked through the second-order expansion of the
reported benchmark ``H(t, theta_hat) * exp(-theta_hat*t)`` around the true
type, ``theta_hat = theta + eps``:

    E[H_hat(t)] - H(t) ~ (H_tt/2 - H_t*t + H*t**2/2) * sigma_eps**2 * exp(-theta*t)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from revdoor.errors import InvalidInputError, NumericError, require_finite
from revdoor.paths import standard_normals

Family = Callable[[float, "np.ndarray | float"], "np.ndarray | float"]


def participation_payoff(alpha: float, v: float, k: float) -> float:
    """Career call payoff ``(alpha*v - k)^+``."""
    require_finite(alpha=alpha, v=v, k=k)
    if not 0 < alpha < 1:
        raise InvalidInputError(f"alpha must lie in (0, 1), got {alpha}")
    return max(alpha * v - k, 0.0)


@dataclass(frozen=True)
class SwitchComparison:
    perceived: float
    actual: float
    regime: str


OVERVALUES = "overvalues - inclined to switch"
INDIFFERENT = "indifferent"
UNDERVALUES = "undervalues"


def career_switch_comparison(alpha: float, v: float, d: float, k: float, rel_tol: float = 1e-12) -> SwitchComparison:
    """Compare the perceived payoff ``(alpha*v - k)^+`` with the equity-implied
    ``(alpha*v - alpha*d)^+``.

    ``k`` and ``alpha*d`` within ``rel_tol`` of each other count as equal.
    """
    require_finite(alpha=alpha, v=v, d=d, k=k)
    strike = alpha * d
    perceived = max(alpha * v - k, 0.0)
    actual = max(alpha * v - strike, 0.0)
    if math.isclose(k, strike, rel_tol=rel_tol, abs_tol=0.0):
        label = INDIFFERENT
    elif k < strike:
        label = OVERVALUES
    else:
        label = UNDERVALUES
    return SwitchComparison(perceived=perceived, actual=actual, regime=label)


@dataclass(frozen=True)
class BenchmarkFamily:
    """A benchmark ``H(t, theta)`` indexed by regulator type.

    ``h`` must accept an array of types. Derivatives in ``theta`` default to
    five-point central differences with step ``1e-4 * max(1, |theta|)``.
    ``log_h``, when given, is used for the discounted reported benchmark so
    exponential factors cancel in log space.
    """

    h: Family
    theta: float
    sigma_eps: float
    h_theta: Optional[Callable[[float, float], float]] = None
    h_theta_theta: Optional[Callable[[float, float], float]] = None
    log_h: Optional[Family] = None

    def __post_init__(self) -> None:
        require_finite(theta=self.theta, sigma_eps=self.sigma_eps)
        if self.sigma_eps < 0:
            raise InvalidInputError(f"sigma_eps must be >= 0, got {self.sigma_eps}")

    def _step(self) -> float:
        return 1e-4 * max(1.0, abs(self.theta))

    def value(self, t: float) -> float:
        return float(self.h(t, self.theta))

    def d1(self, t: float) -> float:
        if self.h_theta is not None:
            return float(self.h_theta(t, self.theta))
        s, th = self._step(), self.theta
        f = lambda x: float(self.h(t, x))  # noqa: E731
        return (f(th - 2 * s) - 8 * f(th - s) + 8 * f(th + s) - f(th + 2 * s)) / (12 * s)

    def d2(self, t: float) -> float:
        if self.h_theta_theta is not None:
            return float(self.h_theta_theta(t, self.theta))
        s, th = self._step(), self.theta
        f = lambda x: float(self.h(t, x))  # noqa: E731
        return (-f(th - 2 * s) + 16 * f(th - s) - 30 * f(th) + 16 * f(th + s) - f(th + 2 * s)) / (12 * s * s)


def constant_family(h0: float, theta: float, sigma_eps: float) -> BenchmarkFamily:
    """``H(t, theta) = h0`` for every type."""
    return BenchmarkFamily(
        h=lambda t, th: h0 * np.ones_like(np.asarray(th, dtype=float)),
        theta=theta,
        sigma_eps=sigma_eps,
        h_theta=lambda t, th: 0.0,
        h_theta_theta=lambda t, th: 0.0,
    )


def exponential_family(h0: float, theta: float, sigma_eps: float) -> BenchmarkFamily:
    """``H(t, theta) = h0 * exp(theta*t)``; the reported benchmark is type-free."""
    return BenchmarkFamily(
        h=lambda t, th: h0 * np.exp(np.asarray(th, dtype=float) * t),
        theta=theta,
        sigma_eps=sigma_eps,
        h_theta=lambda t, th: t * h0 * math.exp(th * t),
        h_theta_theta=lambda t, th: t * t * h0 * math.exp(th * t),
        log_h=lambda t, th: math.log(h0) + np.asarray(th, dtype=float) * t,
    )


def ic_inflation_analytic(fam: BenchmarkFamily, t: float) -> float:
    """Second-order term of ``E[H_hat(t)] - H(t)``."""
    h, h1, h2 = fam.value(t), fam.d1(t), fam.d2(t)
    if not all(math.isfinite(x) for x in (h, h1, h2)):
        raise NumericError(f"non-finite benchmark derivative at t={t}: H={h}, H_t={h1}, H_tt={h2}")
    return (0.5 * h2 - h1 * t + 0.5 * h * t * t) * fam.sigma_eps**2 * math.exp(-fam.theta * t)


def ic_inflation_mc(
    fam: BenchmarkFamily, t: float, n_draws: int, seed: int, antithetic: bool = True
) -> tuple[float, float]:
    """Monte Carlo ``E[H(t, theta_hat) exp(-theta_hat t)] - H(t, theta) exp(-theta t)``.

    ``eps ~ N(0, sigma_eps**2)``. With ``antithetic`` the draws come in
    ``(eps, -eps)`` pairs and the SE is computed from pair averages.
    Returns ``(estimate, stderr)``.
    """
    if n_draws < 1:
        raise InvalidInputError(f"n_draws must be >= 1, got {n_draws}")
    z = standard_normals(seed, n_draws)

    def discounted(th):
        if fam.log_h is not None:
            return np.exp(np.asarray(fam.log_h(t, th), dtype=float) - np.asarray(th) * t)
        return np.asarray(fam.h(t, th), dtype=float) * np.exp(-np.asarray(th) * t)

    base = float(discounted(np.float64(fam.theta)))

    def reported(eps: np.ndarray) -> np.ndarray:
        return discounted(fam.theta + eps) - base

    eps = fam.sigma_eps * z
    samples = 0.5 * (reported(eps) + reported(-eps)) if antithetic else reported(eps)
    n = samples.shape[0]
    se = float(samples.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return float(samples.mean()), se
