"""Scenario files: TOML in, validated dataclasses out, and back again.

Every table and key is optional; missing keys take the defaults listed in
``SCHEMA``. Unknown tables or keys are rejected by name.
"""

from __future__ import annotations

import dataclasses
import math
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from revdoor.benchmark import ConditionalBetaRegime, SignalParams
from revdoor.errors import InvalidInputError, ValidationError
from revdoor.merton import CapitalStructure
from revdoor.paths import MarketParams, SimGrid
from revdoor.risk import TailConfig

MEASURES = ("physical", "risk_neutral")
FORMATS = ("json", "csv", "both")

#: key -> (default, kind). ``None`` defaults are resolved from other keys.
SCHEMA: dict[str, dict[str, tuple[Any, str]]] = {
    "market": {
        "mu_s": (0.08, "float"),
        "sigma_s": (0.25, "float"),
        "mu_i": (None, "float"),  # defaults to mu_s
        "sigma_i": (0.18, "float"),
        "rho": (0.5, "float"),
        "r": (0.05, "float"),
        "s0": (100.0, "float"),
        "i0": (100.0, "float"),
    },
    "signal": {
        "beta_vw": (None, "float"),  # defaults to rho * sigma_s / sigma_i
        "beta_labor": (0.4, "float"),
        "b_labor": (0.5, "float"),
        "kane_delta": (0.0, "float"),
        "allow_negative_loading": (False, "bool"),
        "regime": (None, "table"),
    },
    "capital": {
        "v": (100.0, "float"),
        "d": (80.0, "float"),
        "alpha": (0.1, "float"),
        "k": (5.0, "float"),
        "tau": (1.0, "float"),
        "sigma_h": (0.2, "float"),
        "sigma_eps": (0.15, "float"),
        "mu_v": (None, "float"),  # defaults to market.r
        "v_uplift": (1.0, "float"),
        "debt_uplift": (1.0, "float"),
    },
    "grid": {
        "t_max": (1.0, "float"),
        "n_steps": (50, "int"),
        "n_paths": (10_000, "int"),
        "seed": (20240601, "int"),
        "antithetic": (False, "bool"),
    },
    "tail": {
        "lambda": (1.0, "float"),
        "phi_frac": (0.5, "float"),
        "eval_time": (None, "float"),  # defaults to grid.t_max / 2
        "confidence": (0.99, "float"),
    },
    "reep": {
        "measure": ("physical", "str"),
    },
    "mechanism": {
        "sigma_eps": (0.01, "float"),
        "n_draws": (100_000, "int"),
        "t": (None, "float"),  # defaults to grid.t_max
    },
    "sweep": {
        "param": ("beta_labor", "str"),
        "values": ([], "floatlist"),
    },
    "output": {
        "dir": ("out", "str"),
        "format": ("both", "str"),
        "prefix": ("report", "str"),
    },
}

REGIME_KEYS = ("b0", "b1", "beta_star")

#: sweepable parameters -> (section, key)
SWEEP_PARAMS = {
    "beta_labor": ("signal", "beta_labor"),
    "kane_delta": ("signal", "kane_delta"),
    "b_labor": ("signal", "b_labor"),
    "v_uplift": ("capital", "v_uplift"),
    "sigma_eps": ("capital", "sigma_eps"),
}


@dataclass(frozen=True)
class FirmParams:
    """Firm-value dynamics: no-signal volatility is ``sqrt(sigma_h**2 + sigma_eps**2)``."""

    sigma_h: float = 0.2
    sigma_eps: float = 0.15
    mu_v: float = 0.05
    v_uplift: float = 1.0
    debt_uplift: float = 1.0

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma_h * self.sigma_h + self.sigma_eps * self.sigma_eps)


@dataclass(frozen=True)
class MechanismConfig:
    sigma_eps: float = 0.01
    n_draws: int = 100_000
    t: float = 1.0


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "out"
    format: str = "both"
    prefix: str = "report"


@dataclass(frozen=True)
class Scenario:
    market: MarketParams
    signal: SignalParams
    capital: CapitalStructure
    firm: FirmParams
    grid: SimGrid
    tail: TailConfig
    measure: str = "physical"
    antithetic: bool = False
    mechanism: MechanismConfig = field(default_factory=MechanismConfig)
    sweep_param: str = "beta_labor"
    sweep_values: tuple[float, ...] = ()
    output: OutputConfig = field(default_factory=OutputConfig)

    def with_seed(self, seed: int) -> "Scenario":
        return dataclasses.replace(self, grid=dataclasses.replace(self.grid, seed=seed))

    def with_grid(self, **changes: Any) -> "Scenario":
        return dataclasses.replace(self, grid=dataclasses.replace(self.grid, **changes))

    def with_param(self, name: str, value: float) -> "Scenario":
        """Copy with one sweepable parameter replaced."""
        if name not in SWEEP_PARAMS:
            raise ValidationError("sweep.param", f"unknown sweep parameter {name!r}; choose from {sorted(SWEEP_PARAMS)}")
        section, key = SWEEP_PARAMS[name]
        try:
            if section == "signal":
                return dataclasses.replace(self, signal=dataclasses.replace(self.signal, **{key: value}))
            return dataclasses.replace(self, firm=dataclasses.replace(self.firm, **{key: value}))
        except InvalidInputError as exc:
            raise ValidationError(f"{section}.{key}", str(exc)) from exc


_FIELD_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)")


def _build(section: str, factory, **kwargs):
    try:
        return factory(**kwargs)
    except ValidationError:
        raise
    except InvalidInputError as exc:
        m = _FIELD_RE.match(str(exc))
        key = m.group(1) if m else "?"
        if key == "lam":
            key = "lambda"
        raise ValidationError(f"{section}.{key}", str(exc)) from exc


def _coerce(section: str, key: str, value: Any, kind: str) -> Any:
    where = f"{section}.{key}"
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(where, f"expected a number, got {value!r}")
        return float(value)
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValidationError(where, f"expected an integer, got {value!r}")
        return value
    if kind == "bool":
        if not isinstance(value, bool):
            raise ValidationError(where, f"expected true/false, got {value!r}")
        return value
    if kind == "str":
        if not isinstance(value, str):
            raise ValidationError(where, f"expected a string, got {value!r}")
        return value
    if kind == "floatlist":
        if not isinstance(value, list):
            raise ValidationError(where, f"expected a list of numbers, got {value!r}")
        return [_coerce(section, key, v, "float") for v in value]
    if kind == "table":
        if not isinstance(value, dict):
            raise ValidationError(where, f"expected a table, got {value!r}")
        return value
    raise AssertionError(kind)


def _section(raw: dict[str, Any], name: str) -> dict[str, Any]:
    table = raw.get(name, {})
    if not isinstance(table, dict):
        raise ValidationError(name, "expected a table")
    fields = SCHEMA[name]
    for key in table:
        if key not in fields:
            raise ValidationError(f"{name}.{key}", "unknown key")
    return {key: (_coerce(name, key, table[key], kind) if key in table else default)
            for key, (default, kind) in fields.items()}


def scenario_from_dict(raw: dict[str, Any]) -> Scenario:
    """Validate a parsed TOML document and apply defaults."""
    for name in raw:
        if name not in SCHEMA:
            raise ValidationError(name, "unknown table")
    mk = _section(raw, "market")
    sg = _section(raw, "signal")
    cp = _section(raw, "capital")
    gd = _section(raw, "grid")
    tl = _section(raw, "tail")
    rp = _section(raw, "reep")
    mc = _section(raw, "mechanism")
    sw = _section(raw, "sweep")
    out = _section(raw, "output")

    market = _build("market", MarketParams, **mk)

    regime = None
    if sg["regime"] is not None:
        reg = sg["regime"]
        for key in reg:
            if key not in REGIME_KEYS:
                raise ValidationError(f"signal.regime.{key}", "unknown key")
        for key in REGIME_KEYS:
            if key not in reg:
                raise ValidationError(f"signal.regime.{key}", "missing key")
        regime = _build("signal.regime", ConditionalBetaRegime,
                        **{k: _coerce("signal.regime", k, reg[k], "float") for k in REGIME_KEYS})
    signal = _build("signal", SignalParams, **{**sg, "regime": regime})

    capital = _build("capital", CapitalStructure, v=cp["v"], d=cp["d"], alpha=cp["alpha"], k=cp["k"], tau=cp["tau"])
    for key in ("sigma_h", "sigma_eps"):
        if not math.isfinite(cp[key]) or cp[key] < 0:
            raise ValidationError(f"capital.{key}", f"must be finite and >= 0, got {cp[key]}")
    if math.hypot(cp["sigma_h"], cp["sigma_eps"]) == 0:
        raise ValidationError("capital.sigma_h", "firm volatility sqrt(sigma_h^2 + sigma_eps^2) must be > 0")
    if cp["d"] == 0:
        raise ValidationError("capital.d", "tail analysis needs debt d > 0")
    mu_v = market.r if cp["mu_v"] is None else cp["mu_v"]
    for key, val in (("mu_v", mu_v), ("v_uplift", cp["v_uplift"]), ("debt_uplift", cp["debt_uplift"])):
        if not math.isfinite(val):
            raise ValidationError(f"capital.{key}", f"must be finite, got {val}")
    if cp["v_uplift"] <= 0:
        raise ValidationError("capital.v_uplift", f"must be > 0, got {cp['v_uplift']}")
    if cp["debt_uplift"] <= 0:
        raise ValidationError("capital.debt_uplift", f"must be > 0, got {cp['debt_uplift']}")
    firm = FirmParams(sigma_h=cp["sigma_h"], sigma_eps=cp["sigma_eps"], mu_v=mu_v,
                      v_uplift=cp["v_uplift"], debt_uplift=cp["debt_uplift"])

    antithetic = gd.pop("antithetic")
    grid = _build("grid", SimGrid, **gd)
    if antithetic and grid.n_paths % 2:
        raise ValidationError("grid.n_paths", "antithetic sampling needs an even path count")
    if grid.n_paths < 2:
        raise ValidationError("grid.n_paths", "need at least 2 paths")

    eval_time = grid.t_max / 2 if tl["eval_time"] is None else tl["eval_time"]
    tail = _build("tail", TailConfig, lam=tl["lambda"], phi_frac=tl["phi_frac"],
                  eval_time=eval_time, confidence=tl["confidence"])
    if not eval_time < grid.t_max:
        raise ValidationError("tail.eval_time", f"must lie in (0, t_max={grid.t_max}), got {eval_time}")
    if not eval_time < capital.tau:
        raise ValidationError("tail.eval_time", f"must precede the debt maturity tau={capital.tau}, got {eval_time}")

    if rp["measure"] not in MEASURES:
        raise ValidationError("reep.measure", f"must be one of {MEASURES}, got {rp['measure']!r}")

    mech_t = grid.t_max if mc["t"] is None else mc["t"]
    if not (math.isfinite(mc["sigma_eps"]) and mc["sigma_eps"] >= 0):
        raise ValidationError("mechanism.sigma_eps", f"must be finite and >= 0, got {mc['sigma_eps']}")
    if mc["n_draws"] < 2:
        raise ValidationError("mechanism.n_draws", f"must be >= 2, got {mc['n_draws']}")
    if not (math.isfinite(mech_t) and mech_t >= 0):
        raise ValidationError("mechanism.t", f"must be finite and >= 0, got {mech_t}")
    mechanism = MechanismConfig(sigma_eps=mc["sigma_eps"], n_draws=mc["n_draws"], t=mech_t)

    if sw["param"] not in SWEEP_PARAMS:
        raise ValidationError("sweep.param", f"unknown sweep parameter {sw['param']!r}")
    if "sweep" in raw and "values" in raw["sweep"] and not sw["values"]:
        raise ValidationError("sweep.values", "must be non-empty when present")

    if out["format"] not in FORMATS:
        raise ValidationError("output.format", f"must be one of {FORMATS}, got {out['format']!r}")

    scenario = Scenario(
        market=market, signal=signal, capital=capital, firm=firm, grid=grid, tail=tail,
        measure=rp["measure"], antithetic=antithetic, mechanism=mechanism,
        sweep_param=sw["param"], sweep_values=tuple(sw["values"]),
        output=OutputConfig(**out),
    )
    # each sweep point must itself be a valid scenario
    for value in scenario.sweep_values:
        scenario.with_param(scenario.sweep_param, value)
    return scenario


def load_scenario(path: str | Path) -> Scenario:
    """Read and validate a TOML scenario file.

    Raises ``FileNotFoundError``/``OSError`` for unreadable files and
    :class:`ValidationError` for schema or invariant violations.
    """
    path = Path(path)
    with path.open("rb") as fh:
        try:
            raw = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ValidationError("<file>", f"not valid TOML: {exc}") from exc
    return scenario_from_dict(raw)


def scenario_to_dict(s: Scenario) -> dict[str, Any]:
    """Echo of ``s`` with all defaults made explicit (inverse of :func:`scenario_from_dict`)."""
    signal: dict[str, Any] = {}
    if s.signal.beta_vw is not None:
        signal["beta_vw"] = s.signal.beta_vw
    signal.update(
        beta_labor=s.signal.beta_labor,
        b_labor=s.signal.b_labor,
        kane_delta=s.signal.kane_delta,
        allow_negative_loading=s.signal.allow_negative_loading,
    )
    if s.signal.regime is not None:
        signal["regime"] = dataclasses.asdict(s.signal.regime)
    doc: dict[str, Any] = {
        "market": {
            "mu_s": s.market.mu_s, "sigma_s": s.market.sigma_s, "mu_i": s.market.mu_i,
            "sigma_i": s.market.sigma_i, "rho": s.market.rho, "r": s.market.r,
            "s0": s.market.s0, "i0": s.market.i0,
        },
        "signal": signal,
        "capital": {
            "v": s.capital.v, "d": s.capital.d, "alpha": s.capital.alpha, "k": s.capital.k,
            "tau": s.capital.tau, "sigma_h": s.firm.sigma_h, "sigma_eps": s.firm.sigma_eps,
            "mu_v": s.firm.mu_v, "v_uplift": s.firm.v_uplift, "debt_uplift": s.firm.debt_uplift,
        },
        "grid": {
            "t_max": s.grid.t_max, "n_steps": s.grid.n_steps, "n_paths": s.grid.n_paths,
            "seed": s.grid.seed, "antithetic": s.antithetic,
        },
        "tail": {
            "lambda": s.tail.lam, "phi_frac": s.tail.phi_frac,
            "eval_time": s.tail.eval_time, "confidence": s.tail.confidence,
        },
        "reep": {"measure": s.measure},
        "mechanism": dataclasses.asdict(s.mechanism),
        "output": dataclasses.asdict(s.output),
    }
    if s.sweep_values:
        doc["sweep"] = {"param": s.sweep_param, "values": list(s.sweep_values)}
    return doc


def dump_scenario(s: Scenario) -> str:
    return tomli_w.dumps(scenario_to_dict(s))
