"""Flat key-value run configuration for the CLI.

Config files are UTF-8 text, one ``key = value`` pair per line, ``#``
comments and blank lines ignored.  Recognized keys:

    level            ga | dirac                       (default ga)
    domain           x_min x_max y_min y_max
    grid             n_x n_y
    N                number of seed pairs
    seed.<j>.psi     seed expression, j = 1..N
    seed.<j>.psip    conjugate seed expression
    alpha.<j>.<k>    real coefficient of the pure imaginary constant i*alpha
                     for the (j, k) potential; index 0 denotes the target
    u                coefficient expression              (default 0)
    v                second coefficient (dirac level; default conj of u)
    target.psi0      further solution expression         (default 0)
    target.psip0     further conjugate solution          (default 0)
    basepoint        x y  (quadrature start node; default: center node)
    anchor           x y  (where integration constants are pinned;
                     default: the basepoint node)
    eps_sing         relative determinant threshold      (default 1e-8)
    out_dir          output directory                    (default out)
    grids            grid sizes for convergence studies  (default 33 65 129)
    corrupt_u        factor applied to the transformed coefficient before
                     verification; self-test knob        (default: none)
    sweep.param      swept parameter: beta | alpha | alpha.<j>.<k>
    sweep.values     swept values (may be empty)

Every parse or validation failure raises :class:`ConfigError` naming the key.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import expr

__all__ = ["ConfigError", "RunConfig", "parse_pairs", "build_config", "load_config"]


class ConfigError(ValueError):
    """Malformed configuration text or values."""


_KNOWN_SIMPLE = {
    "level", "domain", "grid", "N", "u", "v", "basepoint", "anchor",
    "eps_sing", "out_dir", "grids", "corrupt_u",
    "target.psi0", "target.psip0", "sweep.param", "sweep.values",
}


@dataclass
class RunConfig:
    level: str = "ga"
    domain: tuple[float, float, float, float] | None = None
    grid: tuple[int, int] | None = None
    n: int = 0
    seeds: dict[int, tuple[str, str]] = field(default_factory=dict)
    alpha: dict[tuple[int, int], float] = field(default_factory=dict)
    u_expr: str = "0"
    v_expr: str | None = None
    target_psi0: str = "0"
    target_psip0: str = "0"
    basepoint: tuple[float, float] | None = None
    anchor: tuple[float, float] | None = None
    eps_sing: float = 1e-8
    out_dir: str = "out"
    grids: tuple[int, ...] = (33, 65, 129)
    corrupt_u: float | None = None
    sweep_param: str | None = None
    sweep_values: tuple[float, ...] = ()

    def alpha_at(self, j: int, k: int) -> float:
        return self.alpha.get((j, k), 0.0)


def parse_pairs(text: str) -> dict[str, str]:
    """Raw ``key -> value`` pairs, later occurrences overriding earlier ones."""
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        pairs[key] = value.strip()
    return pairs


def _floats(key: str, value: str, count: int | None = None) -> tuple[float, ...]:
    parts = value.replace(",", " ").split()
    try:
        vals = tuple(float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"{key}: expected real numbers, got {value!r}") from None
    if count is not None and len(vals) != count:
        raise ConfigError(f"{key}: expected {count} numbers, got {len(vals)}")
    return vals


def _ints(key: str, value: str, count: int | None = None) -> tuple[int, ...]:
    vals = _floats(key, value, count)
    if any(v != int(v) for v in vals):
        raise ConfigError(f"{key}: expected integers, got {value!r}")
    return tuple(int(v) for v in vals)


def _expression(key: str, value: str) -> str:
    try:
        expr.parse(value)
    except expr.ExprSyntaxError as exc:
        raise ConfigError(f"{key}: {exc}") from None
    return value


def build_config(pairs: dict[str, str]) -> RunConfig:
    """Validate raw pairs into a typed configuration."""
    cfg = RunConfig()
    for key, value in pairs.items():
        parts = key.split(".")
        if key == "level":
            if value not in ("ga", "dirac"):
                raise ConfigError(f"level: expected 'ga' or 'dirac', got {value!r}")
            cfg.level = value
        elif key == "domain":
            x0, x1, y0, y1 = _floats(key, value, 4)
            cfg.domain = (x0, x1, y0, y1)
        elif key == "grid":
            nx, ny = _ints(key, value, 2)
            cfg.grid = (nx, ny)
        elif key == "N":
            (cfg.n,) = _ints(key, value, 1)
        elif key == "u":
            cfg.u_expr = _expression(key, value)
        elif key == "v":
            cfg.v_expr = _expression(key, value)
        elif key == "target.psi0":
            cfg.target_psi0 = _expression(key, value)
        elif key == "target.psip0":
            cfg.target_psip0 = _expression(key, value)
        elif key == "basepoint":
            cfg.basepoint = tuple(_floats(key, value, 2))
        elif key == "anchor":
            cfg.anchor = tuple(_floats(key, value, 2))
        elif key == "eps_sing":
            (cfg.eps_sing,) = _floats(key, value, 1)
        elif key == "out_dir":
            cfg.out_dir = value
        elif key == "grids":
            cfg.grids = _ints(key, value)
        elif key == "corrupt_u":
            (cfg.corrupt_u,) = _floats(key, value, 1)
        elif key == "sweep.param":
            cfg.sweep_param = value
        elif key == "sweep.values":
            cfg.sweep_values = _floats(key, value) if value else ()
        elif len(parts) == 3 and parts[0] == "seed" and parts[2] in ("psi", "psip"):
            try:
                j = int(parts[1])
            except ValueError:
                raise ConfigError(f"{key}: seed index must be an integer") from None
            if j < 1:
                raise ConfigError(f"{key}: seed indices start at 1")
            psi, psip = cfg.seeds.get(j, ("0", "0"))
            if parts[2] == "psi":
                cfg.seeds[j] = (_expression(key, value), psip)
            else:
                cfg.seeds[j] = (psi, _expression(key, value))
        elif len(parts) == 3 and parts[0] == "alpha":
            try:
                j, k = int(parts[1]), int(parts[2])
            except ValueError:
                raise ConfigError(f"{key}: alpha indices must be integers") from None
            if j < 0 or k < 0:
                raise ConfigError(f"{key}: alpha indices must be non-negative")
            (cfg.alpha[(j, k)],) = _floats(key, value, 1)
        else:
            raise ConfigError(f"unknown key {key!r}")

    if cfg.domain is None:
        raise ConfigError("missing required key 'domain'")
    if cfg.grid is None:
        raise ConfigError("missing required key 'grid'")
    if cfg.n < 0:
        raise ConfigError("N: must be non-negative")
    for j in range(1, cfg.n + 1):
        if j not in cfg.seeds:
            raise ConfigError(f"missing seed.{j}.psi / seed.{j}.psip for N = {cfg.n}")
    for j in cfg.seeds:
        if j > cfg.n:
            raise ConfigError(f"seed.{j}.* given but N = {cfg.n}")
    for (j, k) in cfg.alpha:
        if j > cfg.n or k > cfg.n:
            raise ConfigError(f"alpha.{j}.{k}: index exceeds N = {cfg.n}")
    x0, x1, y0, y1 = cfg.domain
    if not (x0 < x1 and y0 < y1):
        raise ConfigError("domain: must satisfy x_min < x_max and y_min < y_max")
    if cfg.grid[0] < 3 or cfg.grid[1] < 3:
        raise ConfigError("grid: need at least 3 nodes per direction")
    if cfg.eps_sing < 0:
        raise ConfigError("eps_sing: must be non-negative")
    return cfg


def load_config(path: str, overrides: dict[str, str] | None = None) -> RunConfig:
    """Read a config file, apply textual overrides, and validate."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    pairs = parse_pairs(text)
    if overrides:
        pairs.update(overrides)
    return build_config(pairs)
