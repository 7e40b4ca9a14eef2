"""Experiment configuration: one JSON document, overridable by flags."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction


def parse_number(text) -> float:
    """Accept floats and rationals such as ``1/16``."""
    if isinstance(text, (int, float)):
        return float(text)
    return float(Fraction(str(text).strip()))


def parse_list(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [parse_number(x) for x in text]
    return [parse_number(x) for x in str(text).split(",") if x.strip()]


@dataclass
class ExperimentConfig:
    dim: int = 1
    dxi: float = 1 / 16
    xi_max: float = 64.0
    A: float = 40.0
    # exact log₂ A such as "13/3"; overrides A for certification
    A_log2: str | None = None
    a_list: list[float] = field(default_factory=lambda: [-1.0, 0.0, 1.0])
    dt: float = 1e-4
    scheme: str = "etd1"
    T: float = 0.5
    stride: int = 100
    bit_budget: float = 4096.0
    seed: int = 0
    k_max: int = 60
    # certify: "inf", "t<k>" or a number (default t_inf); noexist: a number (default 0.1)
    t: str | None = None
    K_list: list[int] = field(default_factory=lambda: [1, 10, 100, 1000])
    steps: int = 100
    iters: int = 20
    profile: str = "w"
    field: str | None = None
    out: str | None = None

    def validate(self) -> "ExperimentConfig":
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        for name in ("dxi", "xi_max", "dt", "T", "bit_budget"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.A < 0:
            raise ValueError(f"A must be nonnegative, got {self.A}")
        if self.scheme not in ("etd1", "etd2"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        for name in ("stride", "steps", "iters"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.k_max < 0:
            raise ValueError("k_max must be >= 0")
        return self

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls()
        for k, v in d.items():
            setattr(cfg, k, coerce(k, v))
        return cfg


_INT = {"dim", "stride", "seed", "k_max", "steps", "iters"}
_FLOAT = {"dxi", "xi_max", "A", "dt", "T", "bit_budget"}


def coerce(name: str, value):
    if value is None:
        return None
    if name in _INT:
        return int(value)
    if name in _FLOAT:
        return parse_number(value)
    if name == "a_list":
        return parse_list(value)
    if name == "K_list":
        return [int(x) for x in parse_list(value)]
    return str(value)


def load_config(path: str) -> ExperimentConfig:
    with open(path) as fh:
        return ExperimentConfig.from_dict(json.load(fh))
