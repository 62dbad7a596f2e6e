"""Standard-form two-user Gaussian interference channel parameters.

    Y1 = X1 + sqrt(b) X2 + Z
    Y2 = sqrt(a) X1 + X2 + Z

with power constraints P1, P2 and a common noise power N.  All rates are in
nats per channel use.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

from .errors import ParameterError

__all__ = [
    "ChannelParams",
    "Regime",
    "RatePair",
    "validate_params",
    "classify_regime",
]


class Regime(str, enum.Enum):
    VERY_STRONG = "very_strong"
    STRONG = "strong"
    WEAK = "weak"
    NO_INTERFERENCE = "no_interference"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ChannelParams:
    p1: float
    p2: float
    noise: float
    a: float
    b: float = 0.0

    @property
    def is_z_channel(self) -> bool:
        return self.b == 0.0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ChannelParams":
        unknown = set(data) - {"p1", "p2", "noise", "a", "b"}
        if unknown:
            raise ParameterError([(k, data[k], "unknown field") for k in sorted(unknown)])
        missing = {"p1", "p2", "noise", "a"} - set(data)
        if missing:
            raise ParameterError([(k, None, "missing field") for k in sorted(missing)])
        return cls(**{k: float(v) for k, v in data.items()})

    def scaled(self, lam: float) -> "ChannelParams":
        """Jointly scale the three powers; gains are dimensionless and kept."""
        return ChannelParams(lam * self.p1, lam * self.p2, lam * self.noise, self.a, self.b)


@dataclass(frozen=True)
class RatePair:
    r1: float
    r2: float

    def __post_init__(self):
        for name in ("r1", "r2"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and non-negative, got {v!r}")


def _violations(params: ChannelParams, require_z: bool):
    out = []
    for name in ("p1", "p2", "noise"):
        v = getattr(params, name)
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            out.append((name, v, "must be a finite positive power"))
    for name in ("a", "b"):
        v = getattr(params, name)
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v >= 0):
            out.append((name, v, "must be a finite non-negative gain"))
    if require_z and not out and params.b != 0:
        out.append(("b", params.b, "Z-channel computations require b = 0"))
    return out


def validate_params(params: ChannelParams, *, require_z: bool = False) -> None:
    """Raise :class:`ParameterError` listing every violated invariant."""
    out = _violations(params, require_z)
    if out:
        raise ParameterError(out)


def classify_regime(params: ChannelParams) -> Regime:
    """Interference regime of the Z-channel gain ``a``.

    Half-open convention: ``a == 1 + P2/N`` is very strong and ``a == 1`` is
    strong.  The corner formulas agree on both boundaries.
    """
    validate_params(params)
    a = params.a
    if a == 0:
        return Regime.NO_INTERFERENCE
    if a < 1:
        return Regime.WEAK
    if a >= 1 + params.p2 / params.noise:
        return Regime.VERY_STRONG
    return Regime.STRONG
