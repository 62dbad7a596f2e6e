"""Corner points and outer-bound geometry of the Gaussian Z-interference channel."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .channel import ChannelParams, RatePair, Regime, classify_regime, validate_params
from .errors import DegenerateChannelError, RegimeError

__all__ = [
    "CornerPoints",
    "RegionBoundary",
    "single_user_capacity",
    "strong_corners",
    "sato_corner",
    "costa_corner",
    "corner_points",
    "region_boundary",
]


@dataclass(frozen=True)
class CornerPoints:
    """The two corners (c1, c2_prime) and (c1_prime, c2) of the capacity region."""

    c1: float
    c2: float
    c1_prime: float
    c2_prime: float
    regime: Regime
    sum_rate: Optional[float] = None

    @property
    def corners(self) -> tuple[RatePair, RatePair]:
        return RatePair(self.c1, self.c2_prime), RatePair(self.c1_prime, self.c2)

    def to_dict(self, units: str = "nats") -> dict:
        scale = _unit_scale(units)
        out = {
            "regime": self.regime.value,
            "c1": self.c1 * scale,
            "c2": self.c2 * scale,
            "c1_prime": self.c1_prime * scale,
            "c2_prime": self.c2_prime * scale,
            "units": units,
        }
        if self.sum_rate is not None:
            out["sum_rate"] = self.sum_rate * scale
        return out


@dataclass(frozen=True)
class RegionBoundary:
    """Outer-bound polyline from (0, C2) down to (C1, 0).

    ``segments_certified[i]`` tells whether the segment from ``vertices[i]``
    to ``vertices[i + 1]`` is an established outer bound.  In the weak regime
    only the corner points are known, so the chord between them is not.
    """

    regime: Regime
    vertices: tuple[RatePair, ...]
    segments_certified: tuple[bool, ...]

    def rows(self, units: str = "nats"):
        """(r1, r2, certified) per vertex; the flag is that of the outgoing segment."""
        scale = _unit_scale(units)
        flags = self.segments_certified + (True,)
        return [(v.r1 * scale, v.r2 * scale, f) for v, f in zip(self.vertices, flags)]


def _unit_scale(units: str) -> float:
    if units == "nats":
        return 1.0
    if units == "bits":
        return 1.0 / math.log(2.0)
    raise ValueError(f"unknown units {units!r}; expected 'nats' or 'bits'")


def single_user_capacity(p: float, noise: float) -> float:
    """1/2 log(1 + p/noise) in nats."""
    if not (p > 0 and noise > 0) or not (math.isfinite(p) and math.isfinite(noise)):
        raise ValueError(f"power and noise must be finite and positive, got p={p!r}, noise={noise!r}")
    return 0.5 * math.log1p(p / noise)


def _require(params: ChannelParams, allowed: tuple[Regime, ...], what: str) -> Regime:
    validate_params(params, require_z=True)
    regime = classify_regime(params)
    if regime not in allowed:
        names = ", ".join(r.value for r in allowed)
        raise RegimeError(f"{what} applies to the {names} regime, got {regime.value} (a={params.a!r})")
    return regime


def strong_corners(params: ChannelParams, *, enforce_regime: bool = True) -> CornerPoints:
    """Corner points under strong interference, 1 <= a < 1 + P2/N.

    Both primed rates sit on the sum-rate line
    ``1/2 log(1 + (a P1 + P2)/N)``.  ``enforce_regime=False`` evaluates the
    formulas anywhere (used for continuity checks at the regime boundaries).
    """
    if enforce_regime:
        regime = _require(params, (Regime.STRONG,), "strong_corners")
    else:
        validate_params(params, require_z=True)
        regime = Regime.STRONG
    p1, p2, n, a = params.p1, params.p2, params.noise, params.a
    c1 = single_user_capacity(p1, n)
    c2 = single_user_capacity(p2, n)
    c1p = 0.5 * math.log1p(a * p1 / (p2 + n))
    c2p = 0.5 * math.log1p(((a - 1.0) * p1 + p2) / (p1 + n))
    total = 0.5 * math.log1p((a * p1 + p2) / n)
    return CornerPoints(c1, c2, c1p, c2p, regime, total)


def sato_corner(params: ChannelParams, *, enforce_regime: bool = True) -> float:
    """C2' = 1/2 log(1 + P2/(a P1 + N)) under weak interference."""
    if enforce_regime:
        _require(params, (Regime.WEAK,), "sato_corner")
    else:
        validate_params(params, require_z=True)
    return 0.5 * math.log1p(params.p2 / (params.a * params.p1 + params.noise))


def costa_corner(params: ChannelParams, *, enforce_regime: bool = True) -> float:
    """C1' = 1/2 log(1 + a P1/(P2 + N)) under weak interference (0 < a < 1)."""
    if enforce_regime:
        regime = classify_regime(params)
        if regime is Regime.NO_INTERFERENCE:
            raise DegenerateChannelError("a = 0: the channel splits into two parallel links")
        _require(params, (Regime.WEAK,), "costa_corner")
    else:
        validate_params(params, require_z=True)
    return 0.5 * math.log1p(params.a * params.p1 / (params.p2 + params.noise))


def corner_points(params: ChannelParams) -> CornerPoints:
    validate_params(params, require_z=True)
    regime = classify_regime(params)
    c1 = single_user_capacity(params.p1, params.noise)
    c2 = single_user_capacity(params.p2, params.noise)
    if regime is Regime.VERY_STRONG:
        # the sum-rate line lies outside the rectangle here
        return CornerPoints(c1, c2, c1, c2, regime, c1 + c2)
    if regime is Regime.STRONG:
        return strong_corners(params)
    if regime is Regime.WEAK:
        return CornerPoints(c1, c2, costa_corner(params), sato_corner(params), regime)
    return CornerPoints(c1, c2, c1, c2, regime)


def region_boundary(params: ChannelParams) -> RegionBoundary:
    cp = corner_points(params)
    vertices = (
        RatePair(0.0, cp.c2),
        RatePair(cp.c1_prime, cp.c2),
        RatePair(cp.c1, cp.c2_prime),
        RatePair(cp.c1, 0.0),
    )
    middle = cp.regime is not Regime.WEAK
    return RegionBoundary(cp.regime, vertices, (True, middle, True))
