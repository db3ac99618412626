"""Indexed-option benchmarks with and without a human-capital-beta signal.

The contractual benchmark the firm observes is

    H(t) = S(0) * (I(t)/I(0))**beta_vw * exp(eta * t),
    eta  = (r + rho*sigma_s*sigma_i/2) * (1 - beta_vw).

A regulator loading ``b'`` on her labor beta ``beta_labor`` shifts the
systematic exposure to ``beta' = beta_vw + b'*beta_labor`` and the excess return
to ``eta_hat = eta + b'*beta_labor``; the true benchmark uses those instead.
Level computations run in log space so large exponents do not overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from revdoor.errors import DomainError, InvalidInputError, NotConfiguredError, require_finite
from revdoor.paths import MarketParams


@dataclass(frozen=True)
class ConditionalBetaRegime:
    """Two-type conditional beta: loading ``b0`` below ``beta_star``, ``b0 + b1`` above."""

    b0: float
    b1: float
    beta_star: float

    def __post_init__(self) -> None:
        require_finite(b0=self.b0, b1=self.b1, beta_star=self.beta_star)


@dataclass(frozen=True)
class SignalParams:
    """Regulator signal parameters.

    Parameters
    ----------
    beta_vw : float or None
        Value-weighted beta. ``None`` means derive ``rho*sigma_s/sigma_i`` from
        the market parameters at the point of use.
    beta_labor : float
        Human-capital (labor) beta; ``0`` switches the signal off.
    b_labor : float
        Loading on ``beta_labor`` after taking ``b_vw`` as numeraire.
    kane_delta : float
        Deferred-compensation penalty subtracted from the loading.
    regime : ConditionalBetaRegime, optional
        When set, the loading is ``b0`` or ``b0 + b1`` depending on the type.
    allow_negative_loading : bool
        Let ``kane_delta`` push the effective loading below zero. Off by
        default, so the penalty can at most cancel the signal.
    """

    beta_vw: float | None = None
    beta_labor: float = 0.0
    b_labor: float = 0.5
    kane_delta: float = 0.0
    regime: ConditionalBetaRegime | None = None
    allow_negative_loading: bool = False

    def __post_init__(self) -> None:
        require_finite(beta_labor=self.beta_labor, b_labor=self.b_labor, kane_delta=self.kane_delta)
        if self.beta_vw is not None:
            require_finite(beta_vw=self.beta_vw)
        if self.beta_labor < 0:
            raise InvalidInputError(f"beta_labor must be >= 0, got {self.beta_labor}")
        if self.kane_delta < 0:
            raise InvalidInputError(f"kane_delta must be >= 0, got {self.kane_delta}")

    @property
    def raw_loading(self) -> float:
        """Loading before the Kane penalty (conditional-beta aware)."""
        if self.regime is None:
            return self.b_labor
        z = 1.0 if self.beta_labor > self.regime.beta_star else 0.0
        return self.regime.b0 + self.regime.b1 * z

    @property
    def effective_loading(self) -> float:
        eff = self.raw_loading - self.kane_delta
        if eff < 0 and not self.allow_negative_loading:
            return 0.0
        return eff

    @property
    def signal_term(self) -> float:
        """``b'_eff * beta_labor``, the shift in both beta and excess return."""
        return self.effective_loading * self.beta_labor

    def resolved_beta_vw(self, m: MarketParams) -> float:
        return m.beta_vw if self.beta_vw is None else self.beta_vw


@dataclass(frozen=True)
class BenchmarkPoint:
    t: float
    h_observed: float
    h_true: float
    eta: float
    eta_hat: float


def excess_return_eta(m: MarketParams, beta_vw: float) -> float:
    """``(r + rho*sigma_s*sigma_i/2) * (1 - beta_vw)``."""
    require_finite(beta_vw=beta_vw)
    return (m.r + 0.5 * m.rho * m.sigma_s * m.sigma_i) * (1.0 - beta_vw)


def _check_domain(index_ratio, t) -> None:
    if np.any(np.asarray(index_ratio) <= 0) or not np.all(np.isfinite(index_ratio)):
        raise DomainError("index_ratio must be finite and > 0")
    if np.any(np.asarray(t) < 0) or not np.all(np.isfinite(t)):
        raise DomainError("t must be finite and >= 0")


def _level(s0: float, beta: float, drift: float, index_ratio, t):
    out = s0 * np.exp(beta * np.log(index_ratio) + drift * np.asarray(t, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def observed_benchmark(m: MarketParams, beta_vw: float, index_ratio, t):
    """Contractual benchmark ``H(t)``; broadcasts over array ``index_ratio``/``t``."""
    _check_domain(index_ratio, t)
    return _level(m.s0, beta_vw, excess_return_eta(m, beta_vw), index_ratio, t)


def modified_excess_return(eta: float, sig: SignalParams) -> float:
    require_finite(eta=eta)
    return eta + sig.signal_term


def true_benchmark(m: MarketParams, sig: SignalParams, index_ratio, t):
    """Regulator's benchmark ``S0 * ratio**beta' * exp(eta_hat * t)``.

    Reduces to :func:`observed_benchmark` bit-for-bit when the signal term is 0.
    """
    _check_domain(index_ratio, t)
    beta_vw = sig.resolved_beta_vw(m)
    beta_prime = beta_vw + sig.signal_term
    eta_hat = modified_excess_return(excess_return_eta(m, beta_vw), sig)
    return _level(m.s0, beta_prime, eta_hat, index_ratio, t)


def true_benchmark_product_form(m: MarketParams, sig: SignalParams, index_ratio, t):
    """Same quantity as :func:`true_benchmark`, assembled as
    ``H(t) * ratio**c * exp(c*t)`` with ``c = b'*beta_labor``."""
    c = sig.signal_term
    h_obs = observed_benchmark(m, sig.resolved_beta_vw(m), index_ratio, t)
    return h_obs * np.power(index_ratio, c) * np.exp(c * np.asarray(t, dtype=float))


def deflate_to_contractual(h_true, sig: SignalParams, index_ratio, t):
    """Recover the contractual benchmark from the true one by removing the signal factor."""
    _check_domain(index_ratio, t)
    c = sig.signal_term
    return h_true * np.exp(-c * (np.log(index_ratio) + np.asarray(t, dtype=float)))


def benchmark_point(m: MarketParams, sig: SignalParams, index_ratio: float, t: float) -> BenchmarkPoint:
    beta_vw = sig.resolved_beta_vw(m)
    eta = excess_return_eta(m, beta_vw)
    return BenchmarkPoint(
        t=float(t),
        h_observed=observed_benchmark(m, beta_vw, index_ratio, t),
        h_true=true_benchmark(m, sig, index_ratio, t),
        eta=eta,
        eta_hat=modified_excess_return(eta, sig),
    )


def signal_volatility(sigma_h: float, sig: SignalParams, sigma_i: float) -> float:
    """Benchmark volatility with the signal: ``sqrt(sigma_h**2 + c**2 * sigma_i**2)``."""
    require_finite(sigma_h=sigma_h, sigma_i=sigma_i)
    if sigma_h < 0:
        raise InvalidInputError(f"sigma_h must be >= 0, got {sigma_h}")
    extra = (sig.signal_term * sigma_i) ** 2
    if extra == 0.0:
        return float(sigma_h)
    return math.sqrt(sigma_h * sigma_h + extra)


def no_signal_stock_volatility(sigma_h: float, sigma_eps: float) -> float:
    return math.sqrt(sigma_h * sigma_h + sigma_eps * sigma_eps)


def stock_volatility_with_signal(sigma_h: float, sigma_eps: float, sig: SignalParams, sigma_i: float) -> float:
    """Stock volatility when the price tracks the true benchmark plus noise.

    ``sigma_S(theta)**2 = sigma_h**2 + sigma_eps**2 + (c*sigma_i)**2``; with
    ``c = 0`` this is exactly :func:`no_signal_stock_volatility`.
    """
    require_finite(sigma_h=sigma_h, sigma_eps=sigma_eps, sigma_i=sigma_i)
    if sigma_h < 0 or sigma_eps < 0:
        raise InvalidInputError("sigma_h and sigma_eps must be >= 0")
    return math.sqrt(sigma_h * sigma_h + sigma_eps * sigma_eps + (sig.signal_term * sigma_i) ** 2)


def conditional_beta(sig: SignalParams) -> float:
    """Type-dependent labor beta: ``b0*beta`` for low types, ``(b0+b1)*beta`` for high.

    The boundary ``beta_labor == beta_star`` counts as the low type.
    """
    if sig.regime is None:
        raise NotConfiguredError("conditional_beta requires SignalParams.regime")
    reg = sig.regime
    if sig.beta_labor > reg.beta_star:
        return (reg.b0 + reg.b1) * sig.beta_labor
    return reg.b0 * sig.beta_labor
