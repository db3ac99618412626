"""Early exercise premium of the regulator's American indexed call.

The call decomposes as ``C = H(0) - S(0) + REEP`` with

    REEP = r * H(0) * integral_0^tau_H exp(-r*u) * Pr{S(u) > H(u)} du

where ``tau_H`` is the first time the stock meets the (time-varying)
benchmark boundary. Exceedance is measured with a strict inequality.

The integral treats ``p(u)`` as piecewise linear between grid nodes and
integrates ``exp(-r*u)`` exactly on each segment, so a constant ``p`` is
reproduced to rounding error rather than to O(dt**2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from revdoor.errors import InvalidInputError, require_finite


@dataclass(frozen=True)
class BoundaryCurve:
    """Benchmark levels on a time grid.

    ``h_values`` is either one curve of shape ``(n_steps+1,)`` shared by all
    paths or a per-path array ``(n_paths, n_steps+1)``.
    """

    times: np.ndarray
    h_values: np.ndarray
    variant: str = "contractual"

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        h = np.asarray(self.h_values, dtype=float)
        if h.shape[-1] != times.shape[0]:
            raise InvalidInputError(
                f"boundary has {h.shape[-1]} time points but the grid has {times.shape[0]}"
            )
        if not np.all(h > 0):
            raise InvalidInputError("boundary levels must be > 0")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "h_values", h)


@dataclass(frozen=True)
class ReepEstimate:
    value: float
    stderr: float
    tau_h: float
    truncated: bool
    truncated_fraction: float = 0.0
    measure: str = "physical"


def _check_grid(times: np.ndarray, n_points: int) -> None:
    if times.shape[0] != n_points:
        raise InvalidInputError(f"path has {n_points} points but the grid has {times.shape[0]}")


def first_hitting_time(path, boundary: BoundaryCurve) -> tuple[float, bool]:
    """First grid time ``t > 0`` at which the path touches or crosses the boundary.

    The side of the boundary at the first step after the start is the
    reference; the stopping time is the first later node on the other side,
    or any node (including the first) where the two are equal. Returns
    ``(t_max, True)`` when that never happens.
    """
    path = np.asarray(path, dtype=float)
    if path.ndim != 1:
        raise InvalidInputError("first_hitting_time expects a single path")
    h = boundary.h_values
    if h.ndim != 1:
        raise InvalidInputError("use first_hitting_times for per-path boundaries")
    times, hit = first_hitting_times(path[None, :], BoundaryCurve(boundary.times, h[None, :], boundary.variant))
    return float(times[0]), bool(hit[0])


def first_hitting_times(paths, boundary: BoundaryCurve) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`first_hitting_time`. Returns ``(tau, truncated)`` arrays."""
    paths = np.asarray(paths, dtype=float)
    times = boundary.times
    _check_grid(times, paths.shape[1])
    if paths.shape[1] < 2:
        raise InvalidInputError("need at least one step after t = 0")
    diff = paths[:, 1:] - np.broadcast_to(boundary.h_values, paths.shape)[:, 1:]
    side = np.sign(diff)
    event = (side == 0) | (side != side[:, :1])
    any_event = event.any(axis=1)
    first = np.argmax(event, axis=1)
    tau = np.where(any_event, times[1:][first], times[-1])
    return tau, ~any_event


def exceedance_probability_mc(s_values, h_values) -> tuple[np.ndarray, np.ndarray]:
    """Fraction of paths with ``S > H`` (per time column) and its binomial SE.

    Accepts ``(n_paths,)`` or ``(n_paths, n_times)`` arrays.
    """
    s = np.asarray(s_values, dtype=float)
    above = s > np.broadcast_to(h_values, s.shape)
    n = s.shape[0]
    p = above.mean(axis=0)
    se = np.sqrt(p * (1.0 - p) / n)
    return p, se


def exceedance_probability_closed_form(h_true, h_observed, sigma_eps: float):
    """``Pr{H_true + eps > H_observed}`` for Gaussian ``eps ~ N(0, sigma_eps**2)``.

    With ``sigma_eps == 0`` the probability is 1, 0, or 1/2 on a tie (the
    symmetric-noise limit).
    """
    require_finite(sigma_eps=sigma_eps)
    if sigma_eps < 0:
        raise InvalidInputError(f"sigma_eps must be >= 0, got {sigma_eps}")
    gap = np.asarray(h_true, dtype=float) - np.asarray(h_observed, dtype=float)
    if sigma_eps == 0:
        out = np.where(gap > 0, 1.0, np.where(gap < 0, 0.0, 0.5))
    else:
        out = ndtr(gap / sigma_eps)
    return float(out) if np.ndim(out) == 0 else out


def _edge_weight(x: float) -> float:
    """``(1 - exp(-x)*(1 + x)) / x`` without cancellation for small ``x``."""
    if abs(x) < 0.1:
        # alternating series sum_{k>=2} (-1)^k (k-1) x^(k-1) / k!
        total, term_fact, xp = 0.0, 2.0, x
        for k in range(2, 30):
            total += (-1) ** k * (k - 1) * xp / term_fact
            xp *= x
            term_fact *= k + 1
        return total
    return (1.0 - math.exp(-x) * (1.0 + x)) / x


def premium_weights(r: float, times: np.ndarray, tau_h: float) -> np.ndarray:
    """Weights ``w`` with ``sum(w * p) = r * integral_0^tau_h exp(-r*u) p(u) du``
    for ``p`` linear between nodes. Nodes beyond ``tau_h`` get weight 0."""
    times = np.asarray(times, dtype=float)
    w = np.zeros_like(times)
    if r == 0:
        return w
    for j in range(times.shape[0] - 1):
        a, b = times[j], times[j + 1]
        if a >= tau_h:
            break
        frac = 1.0
        if b > tau_h:
            frac = (tau_h - a) / (b - a)
            b_eff = tau_h
        else:
            b_eff = b
        h = b_eff - a
        x = r * h
        ea = math.exp(-r * a)
        seg_total = -ea * math.expm1(-x)  # r * integral_a^b_eff exp(-r u) du
        right = ea * _edge_weight(x)  # weight on the linear ramp (u - a)/h
        # p(u) on [a, b_eff] is p_a + (p_b - p_a) * frac * (u - a)/h
        w[j] += seg_total - frac * right
        w[j + 1] += frac * right
    return w


def reep_value(
    r: float,
    h0: float,
    p_curve,
    times,
    tau_h: float,
    p_stderr=None,
    measure: str = "physical",
) -> ReepEstimate:
    """``r * h0 * integral_0^tau_h exp(-r*u) p(u) du`` on the grid ``times``.

    ``stderr`` propagates ``p_stderr`` assuming perfect correlation across
    nodes (all nodes share the same paths), which bounds the true SE.
    """
    require_finite(r=r, h0=h0, tau_h=tau_h)
    times = np.asarray(times, dtype=float)
    p = np.asarray(p_curve, dtype=float)
    _check_grid(times, p.shape[0])
    if not times[0] <= tau_h <= times[-1]:
        raise InvalidInputError(f"tau_h={tau_h} lies outside the grid [{times[0]}, {times[-1]}]")
    if r == 0:
        return ReepEstimate(value=0.0, stderr=0.0, tau_h=float(tau_h), truncated=False, measure=measure)
    w = premium_weights(r, times, tau_h)
    value = h0 * float(np.dot(w, p))
    se = 0.0 if p_stderr is None else abs(h0) * float(np.dot(np.abs(w), np.asarray(p_stderr, dtype=float)))
    return ReepEstimate(value=value, stderr=se, tau_h=float(tau_h), truncated=False, measure=measure)


def estimate_reep(
    r: float,
    h0: float,
    s_paths,
    boundary: BoundaryCurve,
    measure: str = "physical",
) -> tuple[ReepEstimate, np.ndarray, np.ndarray]:
    """REEP from simulated paths against ``boundary``.

    ``tau_H`` is the average first hitting time over paths (paths that never
    hit contribute ``t_max``). Returns the estimate together with the
    exceedance curve and its standard errors.
    """
    s_paths = np.asarray(s_paths, dtype=float)
    p, p_se = exceedance_probability_mc(s_paths, boundary.h_values)
    tau, trunc = first_hitting_times(s_paths, boundary)
    tau_h = float(tau.mean())
    est = reep_value(r, h0, p, boundary.times, tau_h, p_se, measure)
    frac = float(trunc.mean())
    est = ReepEstimate(
        value=est.value, stderr=est.stderr, tau_h=tau_h, truncated=bool(trunc.all()),
        truncated_fraction=frac, measure=measure,
    )
    return est, p, p_se


def decompose_call(h0: float, s0: float, reep: float) -> float:
    """American indexed call value ``H(0) - S(0) + REEP``."""
    require_finite(h0=h0, s0=s0, reep=reep)
    return h0 - s0 + reep
