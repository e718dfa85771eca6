"""Flat ``section.key = value`` experiment configuration.

Blank lines and ``#`` comments are ignored. Lists are comma-separated.
Unknown keys are rejected so typos surface immediately.

Example::

    dgp.kind = GaussianAR
    dgp.d = 4
    dgp.theta_star = 0.5, -0.5, 0.25, 0
    dgp.R = 2
    dgp.dependence = 0.5
    noise.kind = Gaussian
    loss.kind = Squared
    experiment.n_grid = 256, 512, 1024
    experiment.replications = 50
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from heavyerm.dgp import DgpKind, DgpSpec, NoiseKind, NoiseSpec
from heavyerm.erm import LossKind, LossSpec, SolverOptions


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"field {key!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.line = line
        self.key = key


@dataclass(frozen=True)
class ConcConfig:
    """Settings for the empirical tail check."""

    interaction: str = "iid_pareto"
    n: int = 1000
    n_mc: int = 10_000
    t_min: float = 2.0
    t_max: float = 500.0
    t_points: int = 20
    theta: tuple[float, ...] | None = None
    bound: str = "heavy_tail"
    eta1: float = 1.0
    eta2: float = 3.0
    d1: float | None = None
    d2: float | None = None
    c_prime: float = 1.0 / 3.0
    v: float | None = None


@dataclass(frozen=True)
class ComplexityConfig:
    n_mc: int = 2000
    gamma: float = 0.5
    mu: int = 64
    u: float = 1.0
    n_dir: int = 16
    r: float = 1.0
    n: int = 1024


@dataclass(frozen=True)
class ExperimentConfig:
    dgp: DgpSpec
    loss: LossSpec = field(default_factory=LossSpec)
    n_grid: tuple[int, ...] = (256, 512, 1024, 2048, 4096, 8192, 16384)
    replications: int = 50
    master_seed: int = 0
    iota: float = 0.01
    r_exponent: float | None = None
    eta1: float = 1.0
    eta2: float = 3.0
    tau: float = 0.5
    norm_equivalence: bool = True
    mixing_c: float = 1.0 / 3.0
    solver: SolverOptions = field(default_factory=SolverOptions)
    conc: ConcConfig = field(default_factory=ConcConfig)
    complexity: ComplexityConfig = field(default_factory=ComplexityConfig)

    def __post_init__(self):
        grid = tuple(int(n) for n in self.n_grid)
        object.__setattr__(self, "n_grid", grid)
        if not grid or any(n < 1 for n in grid):
            raise ConfigError("n_grid must be a nonempty list of positive counts", key="experiment.n_grid")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("n_grid must be strictly increasing", key="experiment.n_grid")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1", key="experiment.replications")
        if not 0 < self.iota < 0.25:
            raise ConfigError("iota must lie in (0, 1/4)", key="experiment.iota")
        if self.r_exponent is None:
            object.__setattr__(self, "r_exponent", 1.0 - 2.0 * self.iota)
        if not 0 < self.r_exponent < 1:
            raise ConfigError("r_exponent must lie in (0, 1)", key="experiment.r_exponent")
        if not self.eta1 > 0:
            raise ConfigError("eta1 must be positive", key="experiment.eta1")
        if not self.eta2 > 2:
            raise ConfigError("eta2 must exceed 2", key="experiment.eta2")
        if not self.tau > 0:
            raise ConfigError("tau must be positive", key="experiment.tau")
        if not self.mixing_c > 0:
            raise ConfigError("mixing_c must be positive", key="experiment.mixing_c")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must be a 64-bit unsigned integer", key="experiment.master_seed")

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, master_seed=int(seed))

    def with_loss(self, loss: LossSpec) -> "ExperimentConfig":
        return replace(self, loss=loss)


# -- parsing ------------------------------------------------------------------

def _floats(s: str) -> tuple[float, ...]:
    return tuple(float(v) for v in s.split(",") if v.strip())


def _ints(s: str) -> tuple[int, ...]:
    out = []
    for v in s.split(","):
        v = v.strip()
        if not v:
            continue
        f = float(v)
        if f != int(f):
            raise ValueError(f"{v} is not an integer")
        out.append(int(f))
    return tuple(out)


def _int(s: str) -> int:
    (v,) = _ints(s)
    return v


def _bool(s: str) -> bool:
    low = s.strip().lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


def _opt_float(s: str):
    return None if s.strip().lower() in ("", "none") else float(s)


_FIELDS = {
    "dgp.kind": ("dgp", "kind", DgpKind),
    "dgp.d": ("dgp", "d", _int),
    "dgp.theta_star": ("dgp", "theta_star", _floats),
    "dgp.R": ("dgp", "R", float),
    "dgp.dependence": ("dgp", "dependence", float),
    "dgp.tail": ("dgp", "tail", float),
    "dgp.pareto_scales": ("dgp", "pareto_scales", _floats),
    "dgp.burn_in": ("dgp", "burn_in", _int),
    "noise.kind": ("noise", "kind", NoiseKind),
    "noise.scale": ("noise", "scale", float),
    "noise.tail": ("noise", "tail", float),
    "loss.kind": ("loss", "kind", LossKind),
    "loss.huber_threshold": ("loss", "huber_threshold", float),
    "solver.tol": ("solver", "tol", float),
    "solver.max_iter": ("solver", "max_iter", _int),
    "experiment.n_grid": ("experiment", "n_grid", _ints),
    "experiment.replications": ("experiment", "replications", _int),
    "experiment.master_seed": ("experiment", "master_seed", _int),
    "experiment.iota": ("experiment", "iota", float),
    "experiment.r_exponent": ("experiment", "r_exponent", float),
    "experiment.eta1": ("experiment", "eta1", float),
    "experiment.eta2": ("experiment", "eta2", float),
    "experiment.tau": ("experiment", "tau", float),
    "experiment.norm_equivalence": ("experiment", "norm_equivalence", _bool),
    "experiment.mixing_c": ("experiment", "mixing_c", float),
    "conc.interaction": ("conc", "interaction", str),
    "conc.n": ("conc", "n", _int),
    "conc.n_mc": ("conc", "n_mc", _int),
    "conc.t_min": ("conc", "t_min", float),
    "conc.t_max": ("conc", "t_max", float),
    "conc.t_points": ("conc", "t_points", _int),
    "conc.theta": ("conc", "theta", _floats),
    "conc.bound": ("conc", "bound", str),
    "conc.eta1": ("conc", "eta1", float),
    "conc.eta2": ("conc", "eta2", float),
    "conc.d1": ("conc", "d1", _opt_float),
    "conc.d2": ("conc", "d2", _opt_float),
    "conc.c_prime": ("conc", "c_prime", float),
    "conc.v": ("conc", "v", _opt_float),
    "complexity.n_mc": ("complexity", "n_mc", _int),
    "complexity.gamma": ("complexity", "gamma", float),
    "complexity.mu": ("complexity", "mu", _int),
    "complexity.u": ("complexity", "u", float),
    "complexity.n_dir": ("complexity", "n_dir", _int),
    "complexity.r": ("complexity", "r", float),
    "complexity.n": ("complexity", "n", _int),
}

_REQUIRED = ("dgp.kind", "dgp.d", "dgp.theta_star", "dgp.R")


def parse_config_text(text: str) -> ExperimentConfig:
    sections: dict[str, dict] = {s: {} for s in ("dgp", "noise", "loss", "solver", "experiment", "conc", "complexity")}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected key = value", line=lineno)
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError("unknown key", line=lineno, key=key)
        if key in lines:
            raise ConfigError(f"duplicate key (first set on line {lines[key]})", line=lineno, key=key)
        section, name, conv = _FIELDS[key]
        try:
            sections[section][name] = conv(value)
        except ValueError as exc:
            raise ConfigError(f"bad value {value!r}: {exc}", line=lineno, key=key) from None
        lines[key] = lineno

    for key in _REQUIRED:
        if key not in lines:
            raise ConfigError("missing required key", key=key)

    def build(key_prefix, fn):
        try:
            return fn()
        except ConfigError:
            raise
        except (ValueError, TypeError) as exc:
            first = min((ln for k, ln in lines.items() if k.startswith(key_prefix)), default=None)
            raise ConfigError(str(exc), line=first, key=key_prefix.rstrip(".")) from None

    noise = build("noise.", lambda: NoiseSpec(**sections["noise"]))
    dgp = build("dgp.", lambda: DgpSpec(noise=noise, **sections["dgp"]))
    loss_kw = sections["loss"]
    if LossKind(loss_kw.get("kind", LossKind.SQUARED)) is LossKind.HUBER and "huber_threshold" not in loss_kw:
        loss = LossSpec.huber_for_noise(noise.scale)
    else:
        loss = build("loss.", lambda: LossSpec(**loss_kw))
    solver = build("solver.", lambda: SolverOptions(**sections["solver"]))
    conc = build("conc.", lambda: _conc(sections["conc"]))
    comp = build("complexity.", lambda: _complexity(sections["complexity"]))
    exp = sections["experiment"]
    try:
        return ExperimentConfig(dgp=dgp, loss=loss, solver=solver, conc=conc, complexity=comp, **exp)
    except ConfigError as exc:
        raise ConfigError(str(exc).split(": ", 1)[-1], line=lines.get(exc.key), key=exc.key) from None


def _conc(kw) -> ConcConfig:
    c = ConcConfig(**kw)
    if c.interaction not in ("iid_pareto", "dgp"):
        raise ValueError("interaction must be iid_pareto or dgp")
    if c.bound not in ("heavy_tail", "rio"):
        raise ValueError("bound must be heavy_tail or rio")
    if c.n < 1 or c.n_mc < 1 or c.t_points < 2:
        raise ValueError("n, n_mc must be positive and t_points >= 2")
    if not 1 < c.t_min < c.t_max:
        raise ValueError("need 1 < t_min < t_max")
    if c.bound == "rio" and c.v is None:
        raise ValueError("the rio bound needs conc.v")
    return c


def _complexity(kw) -> ComplexityConfig:
    c = ComplexityConfig(**kw)
    if c.n_mc < 2 or c.mu < 1 or c.n_dir < 1 or c.n < 1:
        raise ValueError("n_mc >= 2 and mu, n_dir, n >= 1 required")
    if not (c.gamma > 0 and c.u > 0 and c.r > 0):
        raise ValueError("gamma, u and r must be positive")
    return c


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {p}: {exc.strerror}") from None
    return parse_config_text(text)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (tuple, list)):
        return ", ".join(_fmt(x) for x in v)
    if hasattr(v, "value"):
        return str(v.value)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def dump_config(cfg: ExperimentConfig) -> str:
    """Serialise to the same key=value format; ``parse_config_text`` inverts it."""
    out = []
    sources = {
        "dgp": cfg.dgp, "noise": cfg.dgp.noise, "loss": cfg.loss, "solver": cfg.solver,
        "experiment": cfg, "conc": cfg.conc, "complexity": cfg.complexity,
    }
    for key, (section, name, _) in _FIELDS.items():
        v = getattr(sources[section], name)
        if v is None or (isinstance(v, float) and math.isnan(v)):
            continue
        out.append(f"{key} = {_fmt(v)}")
    return "\n".join(out) + "\n"
