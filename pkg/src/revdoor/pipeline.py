"""End-to-end run of a scenario: both regimes on matched random draws.

The no-signal regime is the same scenario with ``beta_labor = 0``. Both
regimes share the stock/index paths and the firm-value shocks, so every
difference between them comes from the signal alone.

In the signal regime the stock carries the extra systematic loading
``c = b'*beta_labor`` while the contract stays written on the observed
benchmark. For the exceedance indicator that is the same as testing the
unchanged stock against a contractual boundary deflated by
``(I/I0)**(-c) * exp(-c*t)``, which is how it is computed here.
"""

from __future__ import annotations

import dataclasses
import math
import time
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from revdoor import __version__
from revdoor.benchmark import (
    SignalParams,
    deflate_to_contractual,
    excess_return_eta,
    modified_excess_return,
    observed_benchmark,
    stock_volatility_with_signal,
    true_benchmark,
)
from revdoor.errors import RevdoorError
from revdoor.mechanism import (
    BenchmarkFamily,
    career_switch_comparison,
    ic_inflation_analytic,
    ic_inflation_mc,
    participation_payoff,
)
from revdoor.merton import compare_vega, equity_option_value, signal_equity_option
from revdoor.paths import PathSet, antithetic_variant, simulate_correlated_gbm
from revdoor.reep import BoundaryCurve, decompose_call, estimate_reep
from revdoor.risk import RegimeTail, bankruptcy_compare, simulate_firm_values
from revdoor.scenario import Scenario, scenario_to_dict

# offsets the firm-value stream away from the path stream for the same seed
_FIRM_STREAM = 0x9E3779B97F4A7C15
_MECH_STREAM = 0x632BE59BD9B4E019


class PipelineError(RevdoorError):
    """A module failed during a run; ``stage`` names the module."""

    def __init__(self, stage: str, exc: Exception):
        self.stage = stage
        super().__init__(f"[{stage}] {type(exc).__name__}: {exc}")


@dataclass
class RunReport:
    scenario: dict[str, Any]
    seed: int
    version: str
    regimes: dict[str, dict[str, Any]]
    comparison: dict[str, Any]
    mechanism: dict[str, Any]
    sweep: list[dict[str, Any]] = field(default_factory=list)
    wall_clock_s: float = 0.0

    def to_dict(self, include_timing: bool = False) -> dict[str, Any]:
        out = {
            "version": self.version,
            "seed": self.seed,
            "scenario": self.scenario,
            "regimes": self.regimes,
            "comparison": self.comparison,
            "mechanism": self.mechanism,
            "sweep": self.sweep,
        }
        if include_timing:
            out["wall_clock_s"] = self.wall_clock_s
        return out


def _derived_seed(seed: int, offset: int) -> int:
    return (seed + offset) % 2**64


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except PipelineError:
        raise
    except Exception as exc:  # noqa: BLE001 - re-raised with module context
        raise PipelineError(name, exc) from exc


def simulation_market(s: Scenario):
    """Market parameters under the scenario's simulation measure."""
    if s.measure == "risk_neutral":
        return dataclasses.replace(s.market, mu_s=s.market.r, mu_i=s.market.r)
    return s.market


def simulate_paths(s: Scenario) -> PathSet:
    market = simulation_market(s)
    if s.antithetic:
        return antithetic_variant(market, s.grid)
    return simulate_correlated_gbm(market, s.grid)


def no_signal(sig: SignalParams) -> SignalParams:
    return dataclasses.replace(sig, beta_labor=0.0)


@dataclass(frozen=True)
class _Shared:
    paths: PathSet
    ratio: np.ndarray
    h_observed: np.ndarray
    z_firm_seed: int


def _shared(s: Scenario) -> _Shared:
    paths = _stage("paths", simulate_paths, s)
    ratio = paths.index_ratio()
    m = simulation_market(s)
    beta_vw = s.signal.resolved_beta_vw(m)
    h_obs = _stage("benchmark", observed_benchmark, m, beta_vw, ratio, paths.times)
    return _Shared(paths=paths, ratio=ratio, h_observed=h_obs,
                   z_firm_seed=_derived_seed(s.grid.seed, _FIRM_STREAM))


def _regime(s: Scenario, sig: SignalParams, sh: _Shared) -> tuple[dict[str, Any], np.ndarray, float]:
    m = simulation_market(s)
    paths = sh.paths
    times = paths.times
    c = sig.signal_term
    beta_vw = sig.resolved_beta_vw(m)
    eta = excess_return_eta(m, beta_vw)
    ratio = sh.ratio

    boundary_levels = _stage("benchmark", deflate_to_contractual, sh.h_observed, sig, ratio, times)
    h_true = _stage("benchmark", true_benchmark, m, sig, ratio, times)
    boundary = BoundaryCurve(times, boundary_levels, "contractual")
    h0 = m.s0
    reep, p_curve, _ = _stage("reep", estimate_reep, m.r, h0, paths.s_paths, boundary, s.measure)

    firm = s.firm
    sigma_base = firm.sigma
    sigma_stock = _stage("benchmark", stock_volatility_with_signal, firm.sigma_h, firm.sigma_eps, sig, m.sigma_i)
    active = c != 0.0
    v_up = firm.v_uplift if active else 1.0
    d_up = firm.debt_uplift if active else 1.0
    if active:
        val = _stage("merton", signal_equity_option, s.capital, m.r, sig, sigma_base, m.sigma_i, v_up, d_up)
    else:
        val = _stage("merton", equity_option_value, s.capital, m.r, sigma_base)

    v0 = s.capital.v * v_up
    values = _stage("risk", simulate_firm_values, v0, firm.mu_v, val.sigma,
                    s.tail.eval_time, s.grid.n_paths, sh.z_firm_seed)

    section = {
        "signal_term": c,
        "beta_prime": beta_vw + c,
        "eta": eta,
        "eta_hat": modified_excess_return(eta, sig),
        "sigma_stock": sigma_stock,
        "benchmark": {
            "h0": h0,
            "h_contractual_T_mean": float(boundary_levels[:, -1].mean()),
            "h_true_T_mean": float(h_true[:, -1].mean()),
        },
        "valuation": {
            "v": val.v, "d": val.d, "sigma": val.sigma, "f": val.f,
            "x1": val.x1, "x2": val.x2, "vega": val.vega, "dd": val.dd,
        },
        "reep": {
            "value": reep.value, "stderr": reep.stderr, "tau_h": reep.tau_h,
            "truncated": reep.truncated, "truncated_fraction": reep.truncated_fraction,
            "measure": reep.measure, "call_value": decompose_call(h0, m.s0, reep.value),
            "p_T": float(p_curve[-1]),
        },
        "participation_payoff": participation_payoff(s.capital.alpha, val.v, s.capital.k),
    }
    return section, values, v0


def _tail_section(t: RegimeTail) -> dict[str, Any]:
    return {
        "var_x1": t.var_x1, "var_x1_se": t.var_x1_se, "mean_x1": t.mean_x1,
        "tail_prob": t.tail_prob, "tail_prob_se": t.tail_prob_se,
        "chebyshev_bound": t.chebyshev_bound, "value_at_risk": t.value_at_risk,
    }


def _ic_family(s: Scenario) -> BenchmarkFamily:
    """True benchmark at the expected log index level, indexed by ``theta = beta_labor``."""
    m = simulation_market(s)
    sig = s.signal
    beta_vw = sig.resolved_beta_vw(m)
    eta = excess_return_eta(m, beta_vw)
    loading = sig.effective_loading
    drift_i = m.mu_i - 0.5 * m.sigma_i**2

    def log_h(t, th):
        c = loading * np.asarray(th, dtype=float)
        return math.log(m.s0) + (beta_vw + c) * drift_i * t + (eta + c) * t

    return BenchmarkFamily(
        h=lambda t, th: np.exp(log_h(t, th)),
        theta=sig.beta_labor,
        sigma_eps=s.mechanism.sigma_eps,
        log_h=log_h,
    )


def _compare(s: Scenario, signal_sig: SignalParams, sh: _Shared):
    base, base_values, base_v0 = _regime(s, no_signal(signal_sig), sh)
    sigd, sig_values, sig_v0 = _regime(s, signal_sig, sh)
    tail = _stage(
        "risk", bankruptcy_compare, sig_values, base_values,
        v0_signal=sig_v0, v0_nosignal=base_v0, d=s.capital.d,
        r=s.market.r, sigma=s.firm.sigma, maturity=s.capital.tau, cfg=s.tail,
    )
    base["tail"] = _tail_section(tail.nosignal)
    sigd["tail"] = _tail_section(tail.signal)
    return base, sigd, tail


def run_scenario(s: Scenario) -> RunReport:
    """Run both regimes (plus the optional sweep) and collect a :class:`RunReport`."""
    start = time.perf_counter()
    sh = _shared(s)
    base, sigd, tail = _compare(s, s.signal, sh)

    vc = compare_vega(
        equity_option_value(s.capital, s.market.r, s.firm.sigma),
        _valuation_from(sigd["valuation"]),
    )
    comparison = {
        "bankruptcy_flag": tail.bankruptcy_flag,
        "bankruptcy_threshold": tail.bankruptcy_threshold,
        "chebyshev_bound_nosignal": tail.chebyshev_bound_nosignal,
        "tail_prob_gap": tail.tail_prob_signal - tail.tail_prob_nosignal,
        "var_x1_gap": tail.var_x1_signal - tail.var_x1_nosignal,
        "value_at_risk_gap": tail.var_signal - tail.var_nosignal,
        "reep_gap": sigd["reep"]["value"] - base["reep"]["value"],
        "vega": dataclasses.asdict(vc),
    }

    cs = s.capital
    switch = career_switch_comparison(cs.alpha, cs.v, cs.d, cs.k)
    fam = _ic_family(s)
    t_ic = s.mechanism.t
    ic_est, ic_se = _stage("mechanism", ic_inflation_mc, fam, t_ic, s.mechanism.n_draws,
                           _derived_seed(s.grid.seed, _MECH_STREAM))
    mechanism = {
        "perceived": switch.perceived,
        "actual": switch.actual,
        "regime": switch.regime,
        "ic_t": t_ic,
        "ic_inflation_analytic": _stage("mechanism", ic_inflation_analytic, fam, t_ic),
        "ic_inflation_mc": ic_est,
        "ic_inflation_mc_stderr": ic_se,
    }

    sweep_rows = [_sweep_row(s.sweep_param, _param_value(s, s.sweep_param), base, sigd, tail)]
    if s.sweep_values:
        sweep_rows = []
        for value in s.sweep_values:
            sv = s.with_param(s.sweep_param, value)
            b, g, t = _compare(sv, sv.signal, sh if _shares_paths(s, sv) else _shared(sv))
            sweep_rows.append(_sweep_row(s.sweep_param, value, b, g, t))

    return RunReport(
        scenario=scenario_to_dict(s),
        seed=s.grid.seed,
        version=__version__,
        regimes={"no_signal": base, "signal": sigd},
        comparison=comparison,
        mechanism=mechanism,
        sweep=sweep_rows,
        wall_clock_s=time.perf_counter() - start,
    )


def _shares_paths(a: Scenario, b: Scenario) -> bool:
    # only signal/firm parameters are sweepable and the observed benchmark
    # depends on beta_vw alone, which sweeps never touch
    return a.market == b.market and a.grid == b.grid and a.signal.beta_vw == b.signal.beta_vw


def _param_value(s: Scenario, name: str) -> float:
    from revdoor.scenario import SWEEP_PARAMS

    section, key = SWEEP_PARAMS[name]
    obj = s.signal if section == "signal" else s.firm
    return float(getattr(obj, key))


def _valuation_from(d: dict[str, Any]):
    from revdoor.merton import EquityValuation

    return EquityValuation(**{k: d[k] for k in ("f", "x1", "x2", "vega", "dd", "sigma", "v", "d")})


SWEEP_COLUMNS = (
    "sigma_signal", "f_nosignal", "f_signal", "vega_nosignal", "vega_signal",
    "x1_nosignal", "x1_signal", "reep_nosignal", "reep_signal",
    "tail_prob_nosignal", "tail_prob_signal", "var_x1_nosignal", "var_x1_signal",
    "chebyshev_bound_nosignal", "value_at_risk_nosignal", "value_at_risk_signal", "bankruptcy_flag",
)


def _sweep_row(param: str, value: float, base, sigd, tail) -> dict[str, Any]:
    return {
        param: value,
        "sigma_signal": sigd["valuation"]["sigma"],
        "f_nosignal": base["valuation"]["f"],
        "f_signal": sigd["valuation"]["f"],
        "vega_nosignal": base["valuation"]["vega"],
        "vega_signal": sigd["valuation"]["vega"],
        "x1_nosignal": base["valuation"]["x1"],
        "x1_signal": sigd["valuation"]["x1"],
        "reep_nosignal": base["reep"]["value"],
        "reep_signal": sigd["reep"]["value"],
        "tail_prob_nosignal": tail.tail_prob_nosignal,
        "tail_prob_signal": tail.tail_prob_signal,
        "var_x1_nosignal": tail.var_x1_nosignal,
        "var_x1_signal": tail.var_x1_signal,
        "chebyshev_bound_nosignal": tail.chebyshev_bound_nosignal,
        "value_at_risk_nosignal": tail.var_nosignal,
        "value_at_risk_signal": tail.var_signal,
        "bankruptcy_flag": tail.bankruptcy_flag,
    }
