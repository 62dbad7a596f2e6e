"""Corner points of the two-user Gaussian Z-interference channel, plus the
numerical machinery (entropies, mutual informations, triangular transport)
used to check the inequalities that pin them down."""

from .channel import ChannelParams, RatePair, Regime, classify_regime, validate_params
from .corners import (
    CornerPoints,
    RegionBoundary,
    corner_points,
    costa_corner,
    region_boundary,
    sato_corner,
    single_user_capacity,
    strong_corners,
)
from .distributions import DistributionSpec, SampleSet
from .measures import (
    correlation_coefficient,
    divergence,
    entropy,
    entropy_knn,
    entropy_power,
    mutual_info_additive,
    mutual_info_density,
)
from .report import VerificationReport

__version__ = "0.1.0"
