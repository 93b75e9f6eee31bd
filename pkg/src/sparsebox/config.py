"""Flat key = value run configuration.

Single-file flat format (diffable experiment records): UTF-8 text, one
``key = value`` per line, ``#`` comments. Unknown keys are errors, every
default is echoed on serialization, and serialize -> parse round-trips
bit-exactly (floats are written with 17 significant digits).
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, fields

from .harmonic import solve_tuning_pair


class ConfigError(ValueError):
    pass


def _fmt_float(x: float) -> str:
    return f"{x:.17g}"


def _parse_bool(s: str) -> bool:
    if s == "true":
        return True
    if s == "false":
        return False
    raise ConfigError(f"expected 'true' or 'false', got {s!r}")


def _parse_int(s: str) -> int:
    try:
        return int(s, 10)
    except ValueError as exc:
        raise ConfigError(f"expected an integer, got {s!r}") from exc


def _parse_float(s: str) -> float:
    try:
        return float(s)
    except ValueError as exc:
        raise ConfigError(f"expected a number, got {s!r}") from exc


def _parse_int_list(s: str) -> tuple[int, ...]:
    if not s.strip():
        return ()
    return tuple(_parse_int(part.strip()) for part in s.split(","))


@dataclass(frozen=True)
class RunConfig:
    # grid / integration
    n: int = 64
    box_length: float = 2.0 * math.pi
    t_end: float = 2.0
    dt: float = 1e-3
    adaptive: bool = False
    cfl_limit: float = 0.8
    safety: float = 0.25
    c_m: float = 1.0
    max_horizon: float = 1e9
    max_dt: float = 0.05
    # initial condition
    ic: str = "kida"
    ic_seed: int = 0
    ic_amplitude: float = 1.0
    ic_kappa_cut: int = 4
    abc_a: float = 1.0
    abc_b: float = 1.0
    abc_c: float = 1.0
    # diagnostics schedule
    sample_interval: float = 0.01
    diag_interval: float = 0.25
    k_list: tuple[int, ...] = (0, 1, 2)
    all_multi_indices: bool = False
    k_max: int = 12
    # sparseness parameters
    tuning: str = "auto"
    lam: float = 0.4503474256843126
    delta: float = 0.75
    c0: float = 2.0
    alpha: str = "regularity"
    mode: str = "vol"
    m_dirs: int = 24
    subsample: int = 4096
    n_scales: int = 24
    n_c_values: int = 32
    kappa_dual: float = 1.0
    # chain diagnostics
    chain_c: float = 0.9
    chain_c_decay: float = 1.0
    ladder_q: int = 2
    ladder_ell0: int = 0  # 0 = derive from the initial sup-norm
    m_star: float = 1.1
    big_m: float = 2.0
    mu: float = 1.0
    epsilon: float = 0.1
    # output
    output_dir: str = "out"

    def alpha_for(self, k: int) -> float:
        if self.alpha == "regularity":
            return 1.0 / (k + 1.0)
        if self.alpha == "apriori":
            return 1.0 / (k + 1.5)
        return float(self.alpha)


_KEY_ALIASES = {"lambda": "lam"}
_FIELD_TO_KEY = {"lam": "lambda"}

_PARSERS = {
    int: _parse_int,
    float: _parse_float,
    bool: _parse_bool,
    str: lambda s: s,
    tuple: _parse_int_list,
}


def _validate(cfg: RunConfig) -> RunConfig:
    def fail(msg):
        raise ConfigError(msg)

    if cfg.n < 8 or (cfg.n & (cfg.n - 1)) != 0:
        fail(f"n must be a power of two with n >= 8, got {cfg.n}")
    if cfg.box_length <= 0:
        fail("box_length must be positive")
    if cfg.t_end < 0:
        fail("t_end must be non-negative")
    if cfg.dt <= 0:
        fail("dt must be positive")
    if not 0.0 < cfg.lam < 1.0:
        fail(f"lambda must lie in (0, 1), got {cfg.lam}")
    if not 0.0 < cfg.delta < 1.0:
        fail(f"delta must lie in (0, 1), got {cfg.delta}")
    if cfg.c0 <= 1.0:
        fail(f"c0 must exceed 1, got {cfg.c0}")
    if cfg.alpha not in ("regularity", "apriori"):
        try:
            a = float(cfg.alpha)
        except ValueError:
            fail(
                f"alpha must be 'regularity', 'apriori' or a positive number, got {cfg.alpha!r}"
            )
        if a <= 0:
            fail(f"alpha must be positive, got {a}")
    if cfg.mode not in ("vol", "1d"):
        fail(f"mode must be 'vol' or '1d', got {cfg.mode!r}")
    if cfg.tuning not in ("auto", "manual"):
        fail(f"tuning must be 'auto' or 'manual', got {cfg.tuning!r}")
    if cfg.ic not in ("abc", "taylor_green", "kida", "random_bandlimited"):
        fail(f"unknown initial condition kind {cfg.ic!r}")
    if cfg.m_dirs < 3:
        fail(f"m_dirs must be at least 3, got {cfg.m_dirs}")
    if any(k < 0 or k > cfg.k_max for k in cfg.k_list):
        fail(f"k_list entries must lie in [0, k_max={cfg.k_max}]")
    if not 0.0 < cfg.chain_c < 1.0:
        fail(f"chain_c must lie in (0, 1), got {cfg.chain_c}")
    if not 0.0 < cfg.chain_c_decay <= 1.0:
        fail(f"chain_c_decay must lie in (0, 1], got {cfg.chain_c_decay}")
    if cfg.m_star <= 1.0:
        fail(f"m_star must exceed 1, got {cfg.m_star}")
    if cfg.epsilon <= 0:
        fail("epsilon must be positive")
    if cfg.sample_interval <= 0 or cfg.diag_interval <= 0:
        fail("sample_interval and diag_interval must be positive")
    if cfg.subsample < 0:
        fail("subsample must be 0 (all points) or positive")
    return cfg


def _derive(cfg: RunConfig) -> RunConfig:
    if cfg.tuning == "auto":
        pair = solve_tuning_pair(cfg.delta)
        cfg = replace_config(cfg, lam=pair.lam)
    return cfg


def replace_config(cfg: RunConfig, **changes) -> RunConfig:
    from dataclasses import replace

    return _validate(replace(cfg, **changes))


def parse_config(text: str) -> RunConfig:
    """Parse, apply defaults, run derivations, validate. Unknown keys error."""
    values = {}
    field_types = {f.name: f for f in fields(RunConfig)}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        name = _KEY_ALIASES.get(key, key)
        if name not in field_types:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if name in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        f = field_types[name]
        base = f.type if isinstance(f.type, type) else type(getattr(RunConfig(), name))
        parser = _PARSERS[base if base in _PARSERS else type(getattr(RunConfig(), name))]
        try:
            values[name] = parser(value)
        except ConfigError as exc:
            raise ConfigError(f"line {lineno}: key {key!r}: {exc}") from exc
    cfg = RunConfig(**values)
    return _validate(_derive(cfg))


def serialize_config(cfg: RunConfig) -> str:
    """Canonical text form; parse(serialize(cfg)) == cfg bit-exactly."""
    lines = []
    for f in fields(RunConfig):
        value = getattr(cfg, f.name)
        key = _FIELD_TO_KEY.get(f.name, f.name)
        if isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, int):
            text = str(value)
        elif isinstance(value, float):
            text = _fmt_float(value)
        elif isinstance(value, tuple):
            text = ",".join(str(v) for v in value)
        else:
            text = str(value)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"


def config_hash(cfg: RunConfig) -> str:
    return hashlib.sha256(serialize_config(cfg).encode("utf-8")).hexdigest()
