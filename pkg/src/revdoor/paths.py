"""Correlated geometric Brownian motion for a firm's stock and its peer index.

Both assets follow

    dS/S = mu_s dt + sigma_s dB_S
    dI/I = mu_i dt + sigma_i dB_I,     dB_S dB_I = rho dt

with zero dividend payout. Paths are built from the exact log-space
transition, so there is no time-discretisation bias in the marginals.

Random numbers are drawn in fixed-size blocks of paths. Block ``b`` owns an
independent PCG64 stream spawned from ``SeedSequence(seed, spawn_key=(b,))``,
so path ``i`` depends only on ``(seed, i)`` and never on how many other paths
were requested or how blocks are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from revdoor.errors import InvalidInputError, require_finite

#: Number of paths per RNG substream. Changing it changes every path.
BLOCK_SIZE = 4096


@dataclass(frozen=True)
class MarketParams:
    """Stock/index dynamics and the risk-free rate.

    ``mu_i`` defaults to ``mu_s``: the index SDE in the source model is written
    with the stock's drift, so that is the default unless overridden.
    """

    mu_s: float = 0.08
    sigma_s: float = 0.25
    sigma_i: float = 0.18
    rho: float = 0.5
    r: float = 0.05
    s0: float = 100.0
    i0: float = 100.0
    mu_i: float | None = None

    def __post_init__(self) -> None:
        if self.mu_i is None:
            object.__setattr__(self, "mu_i", self.mu_s)
        require_finite(
            mu_s=self.mu_s, sigma_s=self.sigma_s, mu_i=self.mu_i, sigma_i=self.sigma_i,
            rho=self.rho, r=self.r, s0=self.s0, i0=self.i0,
        )
        if self.sigma_s < 0:
            raise InvalidInputError(f"sigma_s must be >= 0, got {self.sigma_s}")
        if self.sigma_i < 0:
            raise InvalidInputError(f"sigma_i must be >= 0, got {self.sigma_i}")
        if not -1.0 <= self.rho <= 1.0:
            raise InvalidInputError(f"rho must lie in [-1, 1], got {self.rho}")
        if self.s0 <= 0:
            raise InvalidInputError(f"s0 must be > 0, got {self.s0}")
        if self.i0 <= 0:
            raise InvalidInputError(f"i0 must be > 0, got {self.i0}")

    @property
    def beta_vw(self) -> float:
        """Value-weighted beta ``rho * sigma_s / sigma_i`` (0 if the index is riskless)."""
        if self.sigma_i == 0:
            return 0.0
        return self.rho * self.sigma_s / self.sigma_i


@dataclass(frozen=True)
class SimGrid:
    t_max: float = 1.0
    n_steps: int = 50
    n_paths: int = 10_000
    seed: int = 20240601

    def __post_init__(self) -> None:
        require_finite(t_max=self.t_max)
        if self.t_max <= 0:
            raise InvalidInputError(f"t_max must be > 0, got {self.t_max}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise InvalidInputError(f"n_steps must be an integer >= 1, got {self.n_steps}")
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise InvalidInputError(f"n_paths must be an integer >= 1, got {self.n_paths}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise InvalidInputError(f"seed must be an integer in [0, 2**64), got {self.seed}")

    @property
    def dt(self) -> float:
        return self.t_max / self.n_steps

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.n_steps + 1)


@dataclass(frozen=True)
class PathSet:
    """Simulated levels on a common time grid.

    ``s_paths`` and ``i_paths`` have shape ``(n_paths, n_steps + 1)``; the
    arrays are marked read-only so a PathSet can be shared between consumers.
    """

    times: np.ndarray
    s_paths: np.ndarray
    i_paths: np.ndarray
    antithetic: bool = False

    def __post_init__(self) -> None:
        for arr in (self.times, self.s_paths, self.i_paths):
            arr.setflags(write=False)

    @property
    def n_paths(self) -> int:
        return self.s_paths.shape[0]

    @property
    def n_steps(self) -> int:
        return self.s_paths.shape[1] - 1

    def index_ratio(self) -> np.ndarray:
        """``I(t) / I(0)`` for every path and time."""
        return self.i_paths / self.i_paths[:, :1]


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Independent generator for block ``block`` of the stream ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def standard_normals(seed: int, n_paths: int, shape: tuple[int, ...] = ()) -> np.ndarray:
    """Standard normal draws of shape ``(n_paths, *shape)`` from block substreams.

    Row ``i`` is a deterministic function of ``(seed, i)`` only.
    """
    out = np.empty((n_paths, *shape))
    for start in range(0, n_paths, BLOCK_SIZE):
        stop = min(start + BLOCK_SIZE, n_paths)
        # Generator fills row-major, so a short final block is a prefix of a full one
        out[start:stop] = block_rng(seed, start // BLOCK_SIZE).standard_normal((stop - start, *shape))
    return out


def _paths_from_normals(params: MarketParams, grid: SimGrid, z: np.ndarray) -> PathSet:
    """Exact log-space GBM update from normals of shape ``(n, n_steps, 2)``."""
    times = grid.times
    sqdt = math.sqrt(grid.dt)
    rho = params.rho
    z_s = z[:, :, 0]
    z_i = rho * z[:, :, 0] + math.sqrt(max(0.0, 1.0 - rho * rho)) * z[:, :, 1]

    n = z.shape[0]
    w_s = np.zeros((n, grid.n_steps + 1))
    w_i = np.zeros((n, grid.n_steps + 1))
    np.cumsum(z_s * sqdt, axis=1, out=w_s[:, 1:])
    np.cumsum(z_i * sqdt, axis=1, out=w_i[:, 1:])

    drift_s = (params.mu_s - 0.5 * params.sigma_s**2) * times
    drift_i = (params.mu_i - 0.5 * params.sigma_i**2) * times
    s_paths = params.s0 * np.exp(drift_s + params.sigma_s * w_s)
    i_paths = params.i0 * np.exp(drift_i + params.sigma_i * w_i)
    # column 0 must be the initial level exactly, independent of rounding in exp
    s_paths[:, 0] = params.s0
    i_paths[:, 0] = params.i0
    if not (np.all(s_paths > 0) and np.all(i_paths > 0)):
        raise InvalidInputError("path levels underflowed to zero; horizon or volatility too large")
    return PathSet(times=times, s_paths=s_paths, i_paths=i_paths)


def simulate_correlated_gbm(params: MarketParams, grid: SimGrid) -> PathSet:
    """Simulate ``grid.n_paths`` correlated (S, I) paths.

    Correlation enters through the Cholesky factor of the 2x2 correlation
    matrix: ``dB_I = rho dB_S + sqrt(1 - rho^2) dB_perp``.

    Examples
    --------
    >>> ps = simulate_correlated_gbm(MarketParams(), SimGrid(n_paths=4, n_steps=3))
    >>> ps.s_paths.shape
    (4, 4)
    """
    z = standard_normals(grid.seed, grid.n_paths, (grid.n_steps, 2))
    return _paths_from_normals(params, grid, z)


def antithetic_variant(params: MarketParams, grid: SimGrid) -> PathSet:
    """Like :func:`simulate_correlated_gbm`, but rows ``2k`` and ``2k+1`` are
    an antithetic pair driven by ``z`` and ``-z``.

    Base normals for pair ``k`` come from path ``k`` of the plain stream.
    """
    if grid.n_paths % 2:
        raise InvalidInputError(f"antithetic sampling needs an even n_paths, got {grid.n_paths}")
    half = standard_normals(grid.seed, grid.n_paths // 2, (grid.n_steps, 2))
    z = np.empty((grid.n_paths, grid.n_steps, 2))
    z[0::2] = half
    z[1::2] = -half
    ps = _paths_from_normals(params, grid, z)
    return PathSet(times=ps.times, s_paths=ps.s_paths, i_paths=ps.i_paths, antithetic=True)


def log_increments(levels: np.ndarray) -> np.ndarray:
    """Per-step log increments ``ln(X_{k+1} / X_k)`` along axis 1."""
    return np.diff(np.log(levels), axis=1)


def pair_means(values: np.ndarray) -> np.ndarray:
    """Average antithetic pairs (rows 2k, 2k+1) into independent samples."""
    values = np.asarray(values)
    return 0.5 * (values[0::2] + values[1::2])
