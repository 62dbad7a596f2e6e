"""Differential entropy, mutual information, divergence and correlation.

Analytic distributions are integrated on tensor grids with composite Simpson
weights.  Each axis is split at the kinks of box-shaped components so the
integrand is smooth on every cell, and the same density values are reused on
the every-other-node subgrid to get a refinement estimate for free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import digamma, gammaln

from .distributions import DistributionSpec, SampleSet, gaussian_entropy
from .errors import (
    DegenerateSamplesError,
    DiscreteDistributionError,
    DistributionError,
    QuadratureError,
    SupportError,
)

__all__ = [
    "DEFAULT_POINTS",
    "ACCURACY",
    "QuadResult",
    "KnnEntropy",
    "simpson_axis",
    "entropy",
    "entropy_quad",
    "entropy_knn",
    "entropy_power",
    "mutual_info_additive",
    "mutual_info_additive_quad",
    "mutual_info_density",
    "divergence",
    "correlation_coefficient",
    "gaussian_entropy",
]

# nodes per axis for the fine grid: 2^14 + 1, 2^9 + 1, 2^6 + 1
DEFAULT_POINTS = {1: 2**14 + 1, 2: 2**9 + 1, 3: 2**6 + 1}
ACCURACY = {1: 1e-6, 2: 1e-4, 3: 1e-4}
_MIN_PIECE = 17
_TINY = 1e-300


@dataclass(frozen=True)
class QuadResult:
    """A quadrature value with the fine/coarse refinement difference.

    ``mass`` is the integral of the density on the same grid; a grid that
    steps over narrow peaks agrees with its own coarse subgrid, so the mass
    deficit is folded into ``error`` as well.
    """

    value: float
    coarse: float
    points: int
    mass: float = 1.0

    @property
    def error(self) -> float:
        return max(abs(self.value - self.coarse), abs(self.mass - 1.0))

    def __float__(self):
        return self.value


def _simpson_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * h / 3.0


def simpson_axis(lo: float, hi: float, n: int, breaks=()) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Nodes plus fine and coarse Simpson weights on ``[lo, hi]``.

    The interval is cut at the ``breaks`` inside it; each piece gets a share
    of the ``n`` nodes proportional to its length, with a node count of the
    form ``4j + 1`` so that the every-other-node subgrid is Simpson as well.
    Piece endpoints are moved inward by a relative 1e-12 so that a density
    with a jump is sampled by its one-sided limits.
    """
    cuts = np.unique(np.concatenate([[lo, hi], [b for b in breaks if lo < b < hi]]))
    total = hi - lo
    nodes, fine, coarse = [], [], []
    for a, b in zip(cuts[:-1], cuts[1:]):
        m = max(_MIN_PIECE, int(round((n - 1) * (b - a) / total)) + 1)
        m = 4 * ((m - 1 + 3) // 4) + 1
        x = np.linspace(a, b, m)
        h = (b - a) / (m - 1)
        nudge = 1e-12 * max(b - a, abs(a), abs(b))
        x[0] += nudge
        x[-1] -= nudge
        wf = _simpson_weights(m, h)
        wc = np.zeros(m)
        wc[::2] = _simpson_weights((m + 1) // 2, 2 * h)
        nodes.append(x)
        fine.append(wf)
        coarse.append(wc)
    return np.concatenate(nodes), np.concatenate(fine), np.concatenate(coarse)


def _grid(dists, points: Optional[int] = None, nsigma: float = 10.0, box_of=None):
    """Tensor grid covering ``box_of`` (default: the first distribution).

    Breakpoints of every distribution in ``dists`` split the axes.
    """
    box_of = box_of or dists[0]
    d = box_of.dim
    n = points or DEFAULT_POINTS[d]
    lo, hi = box_of.bounds(nsigma)
    axes = []
    for i in range(d):
        breaks = np.concatenate([dist.breakpoints(i) for dist in dists])
        axes.append(simpson_axis(float(lo[i]), float(hi[i]), n, breaks))
    if d == 1:
        x, wf, wc = axes[0]
        return x[:, None], wf, wc
    mesh = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    wf = axes[0][1]
    wc = axes[0][2]
    for a in axes[1:]:
        wf = np.multiply.outer(wf, a[1])
        wc = np.multiply.outer(wc, a[2])
    return pts, wf.ravel(), wc.ravel()


def _xlogx(p):
    out = np.zeros_like(p)
    pos = p > 0
    out[pos] = p[pos] * np.log(p[pos])
    return out


def entropy_quad(dist: DistributionSpec, points: Optional[int] = None) -> QuadResult:
    """Entropy by quadrature with its refinement estimate, without the accuracy gate."""
    if not dist.has_density:
        raise DiscreteDistributionError("distribution has atoms: differential entropy undefined")
    x, wf, wc = _grid([dist], points)
    p = dist.pdf(x)
    integrand = -_xlogx(p)
    return QuadResult(float(wf @ integrand), float(wc @ integrand), len(wf), float(wf @ p))


def entropy(dist: DistributionSpec, points: Optional[int] = None, accuracy: Optional[float] = None) -> float:
    """Differential entropy in nats, ``-int p log p``.

    Raises :class:`QuadratureError` when the fine and coarse grids disagree by
    more than ``accuracy`` (1e-6 in one dimension, 1e-4 above by default).
    """
    res = entropy_quad(dist, points)
    tol = ACCURACY[dist.dim] if accuracy is None else accuracy
    if not math.isfinite(res.value) or res.error > tol:
        raise QuadratureError("entropy quadrature did not converge", value=res.value,
                              coarse=res.coarse, points=res.points, tolerance=tol)
    return res.value


def entropy_power(h: float, dim: int = 1) -> float:
    """Variance of the white Gaussian whose entropy is ``h``."""
    return math.exp(2.0 * h / dim) / (2.0 * math.pi * math.e)


def mutual_info_additive_quad(x: DistributionSpec, noise_var: float, points: Optional[int] = None) -> QuadResult:
    if not noise_var > 0:
        raise ValueError("noise variance must be positive")
    res = entropy_quad(x.add_gaussian(noise_var), points)
    hz = gaussian_entropy(noise_var, x.dim)
    return QuadResult(res.value - hz, res.coarse - hz, res.points, res.mass)


def mutual_info_additive(x: DistributionSpec, noise_var: float, points: Optional[int] = None) -> float:
    """I(X; X + Z) for white Gaussian Z of variance ``noise_var`` independent of X."""
    res = mutual_info_additive_quad(x, noise_var, points)
    if res.error > ACCURACY[x.dim]:
        raise QuadratureError("mutual information quadrature did not converge",
                              value=res.value, coarse=res.coarse)
    return res.value


def mutual_info_density(x: DistributionSpec, noise: DistributionSpec,
                        x_points: int = 513, y_points: int = 4097) -> QuadResult:
    """I(X; X + N) as the average information density, one-dimensional.

    Computes ``E log p_N(Y - X) / p_Y(Y)`` as a double integral over the
    input and the output.  This route shares no entropy evaluation with
    :func:`mutual_info_additive`, which is the point: the two can be checked
    against each other.  The noise may be any smooth distribution.
    """
    if x.dim != 1 or noise.dim != 1:
        raise DistributionError("the information-density route is one-dimensional")
    if not noise.is_smooth:
        raise DistributionError("noise must have a smooth density")
    out = x.convolve(noise)
    y, wy_f, wy_c = _grid([out], y_points)
    y = y[:, 0]
    py = out.pdf(y)
    log_py = np.log(np.maximum(py, _TINY))
    fine = coarse = 0.0
    for c in range(x.n_components):
        comp = x._derived([1.0], x.means[c:c + 1], x.variances[c:c + 1], x.widths[c:c + 1])
        if comp.component_is_atom(0):
            xs = comp.means[:, 0]
            wx_f = wx_c = np.ones(1)
        else:
            xg, wx_f, wx_c = _grid([comp], x_points)
            xs = xg[:, 0]
            px = comp.pdf(xs)
            wx_f, wx_c = wx_f * px, wx_c * px
        inner_f = np.empty(xs.size)
        inner_c = np.empty(xs.size)
        for start in range(0, xs.size, 64):
            chunk = xs[start:start + 64]
            pn = noise.pdf((y[None, :] - chunk[:, None]).ravel()).reshape(chunk.size, -1)
            integrand = pn * (np.log(np.maximum(pn, _TINY)) - log_py[None, :])
            inner_f[start:start + 64] = integrand @ wy_f
            inner_c[start:start + 64] = integrand @ wy_c
        fine += x.weights[c] * float(wx_f @ inner_f)
        coarse += x.weights[c] * float(wx_c @ inner_c)
    return QuadResult(fine, coarse, len(y), float(wy_f @ py))


def divergence(p: DistributionSpec, q: DistributionSpec, points: Optional[int] = None) -> float:
    """Relative entropy D(p || q) in nats by quadrature over the support of ``p``."""
    if p.dim != q.dim:
        raise DistributionError("divergence needs distributions of the same dimension")
    if not (p.has_density and q.has_density):
        raise DiscreteDistributionError("divergence needs densities on both sides")
    x, wf, wc = _grid([p, q], points)
    pp = p.pdf(x)
    qq = q.pdf(x)
    if np.any((pp > 0) & (qq <= 0)):
        raise SupportError("support of p is not contained in the support of q")
    pos = pp > 0
    integrand = np.zeros_like(pp)
    integrand[pos] = pp[pos] * (np.log(pp[pos]) - np.log(qq[pos]))
    fine, coarse = float(wf @ integrand), float(wc @ integrand)
    tol = ACCURACY[p.dim]
    if abs(fine - coarse) > tol or abs(float(wf @ pp) - 1.0) > tol:
        raise QuadratureError("divergence quadrature did not converge", value=fine, coarse=coarse)
    return fine


@dataclass(frozen=True)
class KnnEntropy:
    """Nearest-neighbour entropy estimate with its Monte Carlo scale."""

    value: float
    stderr: float
    k: int
    n: int

    def __float__(self):
        return self.value


def entropy_knn(samples: SampleSet, k: int = 4, on_duplicates: str = "fail",
                seed: int = 0) -> KnnEntropy:
    """Kozachenko-Leonenko estimate with the usual digamma terms.

    ``stderr`` is the sample standard deviation of the per-point log-volume
    terms over sqrt(n); the estimator bias is of the same O(1/sqrt(n)) order
    and is not corrected.  ``on_duplicates`` is ``"fail"`` or ``"jitter"``.
    """
    x = samples.points
    n, d = x.shape
    if k < 1:
        raise ValueError("k must be at least 1")
    if n < 10 * k:
        raise ValueError(f"need at least {10 * k} samples for k={k}, got {n}")
    if np.all(x == x[0]):
        raise DegenerateSamplesError("all samples are identical")
    tree = cKDTree(x)
    dist = tree.query(x, k=k + 1)[0][:, k]
    if np.any(dist == 0):
        if on_duplicates != "jitter":
            raise DegenerateSamplesError("duplicate points give zero neighbour distances")
        scale = 1e-10 * float(np.std(x, axis=0).max())
        x = x + scale * np.random.default_rng(seed).standard_normal(x.shape)
        tree = cKDTree(x)
        dist = tree.query(x, k=k + 1)[0][:, k]
    log_unit_ball = 0.5 * d * math.log(math.pi) - gammaln(0.5 * d + 1.0)
    terms = d * np.log(dist)
    value = digamma(n) - digamma(k) + log_unit_ball + float(terms.mean())
    return KnnEntropy(float(value), float(terms.std(ddof=1) / math.sqrt(n)), k, n)


def correlation_coefficient(u: SampleSet, v: SampleSet) -> float:
    """E{U.V} / sqrt(E||U||^2 E||V||^2) over paired rows (raw moments)."""
    a, b = u.points, v.points
    if a.shape != b.shape:
        raise ValueError("correlation needs paired samples of the same shape")
    pu = float(np.einsum("ij,ij->", a, a))
    pv = float(np.einsum("ij,ij->", b, b))
    if pu == 0 or pv == 0:
        raise DegenerateSamplesError("zero-power input")
    rho = float(np.einsum("ij,ij->", a, b)) / math.sqrt(pu * pv)
    return min(1.0, max(-1.0, rho))
