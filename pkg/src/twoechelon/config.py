"""Flat ``section.key = value`` run configuration.

Blank lines and ``#`` comments are ignored.  Serialization writes keys in a
fixed order with round-trip float formatting, so ``parse(dump(cfg)) == cfg``.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

from .core import Policy, SystemParams
from .optimizer import SearchSpace


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimOptions:
    horizon: float = 5000.0
    warmup: float | None = None
    replications: int = 20
    seed: int = 0
    sample_interval: float | None = None


@dataclass(frozen=True)
class RunConfig:
    params: SystemParams
    policy: Policy | None = None
    space: SearchSpace | None = None
    search_mode: str = "exhaustive"
    sim: SimOptions = SimOptions()
    epsilon: float = 1e-10
    sweep_param: str | None = None
    sweep_values: tuple[float, ...] = ()
    validate_simulate: bool = False
    prob_floor: float = 1e-14
    # Test hook: relative perturbation applied to the per-retailer batch-count law.
    corrupt_mu: float = 0.0


_PARAM_KEYS = {"N": int, "lam": float, "L": float, "L0": float, "h": float, "h0": float,
               "beta": float, "Q": int}
_ALIASES = {"params.lambda": "params.lam"}


def _int(text: str, key: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {text!r}") from None


def _float(text: str, key: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {text!r}") from None


def _bool(text: str, key: str) -> bool:
    low = text.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"{key}: expected true/false, got {text!r}")


def parse_pairs(text: str) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = _ALIASES.get(key, key)
        if key in pairs:
            raise ConfigError(f"line {lineno}: duplicate key {key}")
        pairs[key] = value
    return pairs


def parse_config(text: str) -> RunConfig:
    pairs = parse_pairs(text)
    used: set[str] = set()

    def take(key, conv, default=None):
        if key not in pairs:
            return default
        used.add(key)
        return conv(pairs[key], key)

    missing = [f"params.{k}" for k in _PARAM_KEYS if f"params.{k}" not in pairs]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")
    params = SystemParams(**{k: take(f"params.{k}", _int if conv is int else _float)
                             for k, conv in _PARAM_KEYS.items()})

    policy = None
    if any(k.startswith("policy.") for k in pairs):
        values = [take(f"policy.{k}", _int) for k in ("m", "R", "s")]
        if None in values:
            raise ConfigError("policy needs policy.m, policy.R and policy.s")
        policy = Policy(*values)

    space = None
    if any(k.startswith("search.") and k != "search.mode" for k in pairs):
        bounds = []
        for name in ("m", "R", "s"):
            lo = take(f"search.{name}_min", _int)
            hi = take(f"search.{name}_max", _int)
            if lo is None or hi is None:
                raise ConfigError(f"search needs search.{name}_min and search.{name}_max")
            bounds.append((lo, hi))
        space = SearchSpace(*bounds, budget=take("search.budget", _int))
    search_mode = take("search.mode", lambda v, k: v, "exhaustive")
    if search_mode not in ("exhaustive", "pruned"):
        raise ConfigError(f"search.mode must be exhaustive or pruned, got {search_mode!r}")

    sim = SimOptions(
        horizon=take("sim.horizon", _float, SimOptions.horizon),
        warmup=take("sim.warmup", _float),
        replications=take("sim.replications", _int, SimOptions.replications),
        seed=take("sim.seed", _int, SimOptions.seed),
        sample_interval=take("sim.sample_interval", _float),
    )

    sweep_values: tuple[float, ...] = ()
    if "sweep.values" in pairs:
        used.add("sweep.values")
        sweep_values = tuple(_float(v.strip(), "sweep.values")
                             for v in pairs["sweep.values"].split(",") if v.strip())

    cfg = RunConfig(
        params=params,
        policy=policy,
        space=space,
        search_mode=search_mode,
        sim=sim,
        epsilon=take("eval.epsilon", _float, 1e-10),
        sweep_param=take("sweep.param", lambda v, k: v),
        sweep_values=sweep_values,
        validate_simulate=take("validate.simulate", _bool, False),
        prob_floor=take("validate.prob_floor", _float, 1e-14),
        corrupt_mu=take("validate.corrupt_mu", _float, 0.0),
    )
    unknown = sorted(set(pairs) - used)
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(unknown)}")
    return cfg


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def config_items(cfg: RunConfig) -> list[tuple[str, str]]:
    items = [(f"params.{f.name}", _fmt(getattr(cfg.params, f.name))) for f in fields(cfg.params)]
    if cfg.policy is not None:
        items += [(f"policy.{k}", _fmt(getattr(cfg.policy, k))) for k in ("m", "R", "s")]
    if cfg.space is not None:
        for name, (lo, hi) in zip("mRs", (cfg.space.m_range, cfg.space.R_range, cfg.space.s_range)):
            items += [(f"search.{name}_min", _fmt(lo)), (f"search.{name}_max", _fmt(hi))]
        if cfg.space.budget is not None:
            items.append(("search.budget", _fmt(cfg.space.budget)))
    items.append(("search.mode", cfg.search_mode))
    items.append(("sim.horizon", _fmt(cfg.sim.horizon)))
    if cfg.sim.warmup is not None:
        items.append(("sim.warmup", _fmt(cfg.sim.warmup)))
    items.append(("sim.replications", _fmt(cfg.sim.replications)))
    items.append(("sim.seed", _fmt(cfg.sim.seed)))
    if cfg.sim.sample_interval is not None:
        items.append(("sim.sample_interval", _fmt(cfg.sim.sample_interval)))
    items.append(("eval.epsilon", _fmt(cfg.epsilon)))
    if cfg.sweep_param is not None:
        items.append(("sweep.param", cfg.sweep_param))
    if cfg.sweep_values:
        items.append(("sweep.values", ", ".join(_fmt(v) for v in cfg.sweep_values)))
    items.append(("validate.simulate", _fmt(cfg.validate_simulate)))
    items.append(("validate.prob_floor", _fmt(cfg.prob_floor)))
    if cfg.corrupt_mu:
        items.append(("validate.corrupt_mu", _fmt(cfg.corrupt_mu)))
    return items


def dump_config(cfg: RunConfig) -> str:
    return "".join(f"{key} = {value}\n" for key, value in config_items(cfg))


def with_overrides(cfg: RunConfig, *, seed=None, epsilon=None, replications=None,
                   horizon=None) -> RunConfig:
    sim = cfg.sim
    if seed is not None:
        sim = replace(sim, seed=seed)
    if replications is not None:
        sim = replace(sim, replications=replications)
    if horizon is not None:
        sim = replace(sim, horizon=horizon)
    cfg = replace(cfg, sim=sim)
    if epsilon is not None:
        cfg = replace(cfg, epsilon=epsilon)
    return cfg
