"""Experiment configuration: line-oriented ``key = value`` files.

Blank lines and ``#`` comments are ignored.  List-valued keys take
comma-separated values; ``alpha`` additionally accepts ``start:step:stop``
(inclusive, e.g. ``4.0:-0.4:2.0``).  Every key has a matching CLI flag
(``r_mult`` -> ``--r-mult``), and flags override the file.

Keys
----
mode          block | sb | denoise | oracle
input         input path (.pbm image, otherwise a text file of digits)
source        bernoulli | bsms, used when no input is given
p, n          source parameter and length
data_seed     seed of the synthetic source
k             context order (default max(1, floor(log_A(n) / 2) - 1))
k_f           sliding-block half window
alpha         slope list (default 1.0; unset means slope search when denoising)
schedule      geometric | logarithmic
gamma, beta0  geometric schedule
T0            logarithmic schedule
sweep_length  iterations per temperature step (default n, or K_f)
r_mult        iterations per symbol, r = r_mult * n
seeds         annealer seeds
boundary      linear | cyclic (1-D context boundary)
offsets       2-D context, "row:col,..." (default W,WW,NW,N,NE,NN)
warm_start    start each alpha from the previous reconstruction
workers       parallel sweep jobs (threads)
delta         BSC crossover for denoising
noise_pmf     general additive noise pmf, overrides delta
window        de-randomisation half window m (1-D default 4, images 1)
prefix, tol   slope search prefix length and relative tolerance
clean         clean reference for BER reporting
output        primary output path
trace         trace CSV path
png_size      size in bytes of an external PNG, reported for comparison
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

MODES = ("block", "sb", "denoise", "oracle")


def parse_alpha(text: str) -> list[float]:
    text = text.strip()
    if text.count(":") == 2:
        start, step, stop = (float(v) for v in text.split(":"))
        if step == 0:
            raise ValueError("alpha range step must be non-zero")
        count = math.floor((stop - start) / step + 1e-9) + 1
        if count < 1:
            raise ValueError(f"empty alpha range {text!r}")
        return [round(start + i * step, 12) for i in range(count)]
    return [float(v) for v in text.split(",") if v.strip()]


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    out = []
    for v in text.split(","):
        v = v.strip()
        if not v:
            continue
        if "-" in v[1:]:
            lo, hi = v.split("-", 1) if v[0] != "-" else (v, v)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(v))
    return out


def _bool(text: str) -> bool:
    v = text.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_int(text):
    return None if str(text).strip().lower() in ("", "none") else int(text)


@dataclass
class ExperimentConfig:
    mode: str = "block"
    input: str | None = None
    source: str = "bernoulli"
    p: float = 0.4
    n: int = 15000
    data_seed: int = 0
    k: int | None = None
    k_f: int = 1
    alpha: list | None = None
    schedule: str = "geometric"
    gamma: float = 0.75
    beta0: float = 1.0
    T0: float = 3.0
    sweep_length: int | None = None
    r_mult: float = 10.0
    seeds: list = field(default_factory=lambda: [0])
    boundary: str = "linear"
    offsets: str | None = None
    warm_start: bool = True
    workers: int = 1
    delta: float | None = None
    noise_pmf: list | None = None
    window: int | None = None
    prefix: int = 10_000
    tol: float = 0.05
    clean: str | None = None
    output: str | None = None
    trace: str | None = None
    png_size: int | None = None

    def __post_init__(self):
        self.validate()

    @property
    def alphas(self) -> list:
        """Configured slopes; 1.0 when none were given."""
        return self.alpha if self.alpha is not None else [1.0]

    def validate(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.source not in ("bernoulli", "bsms"):
            raise ValueError("source must be bernoulli or bsms")
        if self.schedule not in ("geometric", "logarithmic"):
            raise ValueError("schedule must be geometric or logarithmic")
        if self.alpha is not None and not self.alpha:
            raise ValueError("alpha list must be non-empty")
        if not self.seeds:
            raise ValueError("seed list must be non-empty")
        if self.r_mult < 0:
            raise ValueError("r_mult must be non-negative")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if self.input is not None and not Path(self.input).exists():
            raise ValueError(f"input file {self.input!r} does not exist")
        if self.clean is not None and not Path(self.clean).exists():
            raise ValueError(f"clean reference {self.clean!r} does not exist")


_PARSERS = {
    "alpha": parse_alpha,
    "seeds": _ints,
    "noise_pmf": _floats,
    "warm_start": _bool,
    "k": _opt_int,
    "sweep_length": _opt_int,
    "window": _opt_int,
    "png_size": _opt_int,
}

KEYS = tuple(f.name for f in dataclasses.fields(ExperimentConfig))


def _convert(key: str, value: str):
    if key in _PARSERS:
        return _PARSERS[key](value)
    ftype = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}[key]
    if ftype.startswith("int"):
        return int(value)
    if ftype.startswith("float"):
        return float(value)
    return value


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines into converted values (unknown keys are errors)."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        try:
            out[key] = _convert(key, value)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return out


def load_config(path=None, overrides: dict | None = None) -> ExperimentConfig:
    values = {}
    if path is not None:
        values.update(parse_config_text(Path(path).read_text()))
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = _convert(key, value) if isinstance(value, str) else value
    return ExperimentConfig(**values)


def format_config(cfg: ExperimentConfig) -> str:
    lines = []
    for key in KEYS:
        v = getattr(cfg, key)
        if v is None:
            continue
        if isinstance(v, list):
            v = ",".join(str(x) for x in v)
        lines.append(f"{key} = {v}")
    return "\n".join(lines) + "\n"


def default_k(n: int, alphabet_size: int = 2) -> int:
    """``max(1, floor(log_A(n) / 2) - 1)``."""
    if n < 1:
        raise ValueError("n must be positive")
    return max(1, math.floor(0.5 * math.log(n, alphabet_size) + 1e-12) - 1)
