"""Analytic low-dimensional distributions closed under independent sums.

Every distribution is stored as a finite mixture of axis-aligned components.
A component is, coordinate by coordinate, a Gaussian ``N(m, v)`` convolved
with up to three centred uniforms of widths ``w_j``.  Points (``v = 0`` and
no uniform) give atoms, ``v = 0`` with one uniform gives a box.  The family is
closed under scaling, marginalisation and independent addition, and every
per-coordinate density and CDF is available in closed form through repeated
integrals of the normal CDF.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import ndtr

from .errors import DistributionError

__all__ = [
    "DistributionSpec",
    "SampleSet",
    "gaussian_entropy",
    "MAX_DIM",
    "MAX_BOXES",
]

MAX_DIM = 3
MAX_BOXES = 3
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

KINDS = ("gaussian", "uniform", "atoms", "mixture", "atoms_gaussian", "composite")


def gaussian_entropy(var, dim: int = 1) -> float:
    """Entropy of a white Gaussian with per-coordinate variance ``var``."""
    return 0.5 * dim * math.log(2.0 * math.pi * math.e * var)


def _phi(x):
    return _INV_SQRT_2PI * np.exp(-0.5 * x * x)


def _normal_integral(order: int, x):
    """``order``-fold integral of the standard normal CDF; order -1 is the pdf."""
    if order == -1:
        return _phi(x)
    cdf = ndtr(x)
    if order == 0:
        return cdf
    pdf = _phi(x)
    if order == 1:
        return x * cdf + pdf
    if order == 2:
        return 0.5 * ((x * x + 1.0) * cdf + x * pdf)
    if order == 3:
        return ((x**3 + 3.0 * x) * cdf + (x * x + 2.0) * pdf) / 6.0
    raise ValueError(f"order {order} not supported")


def _truncated_power(order: int, x):
    # x_+^order / order!, with the step function for order 0
    if order == 0:
        return (x >= 0).astype(float)
    xp = np.maximum(x, 0.0)
    return xp**order / math.factorial(order)


def _factor_eval(y, m: float, v: float, widths: Sequence[float], cumulative: bool):
    """Density (or CDF) of N(m, v) + sum of centred uniforms, at points ``y``."""
    y = np.asarray(y, dtype=float)
    k = len(widths)
    if k == 0:
        if v <= 0:
            raise DistributionError("point mass has no density")
        s = math.sqrt(v)
        z = (y - m) / s
        return ndtr(z) if cumulative else _phi(z) / s
    order = k if cumulative else k - 1
    lo = m - 0.5 * sum(widths)
    scale = 1.0 / math.prod(widths)
    total = np.zeros_like(y)
    if v > 0:
        s = math.sqrt(v)
        for subset in itertools.product((0, 1), repeat=k):
            c = lo + sum(w for w, bit in zip(widths, subset) if bit)
            sign = -1.0 if sum(subset) % 2 else 1.0
            total += sign * s**order * _normal_integral(order, (y - c) / s)
    else:
        for subset in itertools.product((0, 1), repeat=k):
            c = lo + sum(w for w, bit in zip(widths, subset) if bit)
            sign = -1.0 if sum(subset) % 2 else 1.0
            total += sign * _truncated_power(order, y - c)
    total *= scale
    if cumulative:
        return np.clip(total, 0.0, 1.0)
    return np.maximum(total, 0.0)


def _as_matrix(values, dim: Optional[int] = None, name: str = "value") -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1) if dim in (None, 1) else arr.reshape(1, -1)
    if arr.ndim != 2:
        raise DistributionError(f"{name} must be a list of vectors")
    if dim is not None and arr.shape[1] != dim:
        raise DistributionError(f"{name} has dimension {arr.shape[1]}, expected {dim}")
    return arr


def _as_vector(values, dim: Optional[int] = None, name: str = "value") -> np.ndarray:
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.ndim != 1:
        raise DistributionError(f"{name} must be a scalar or a vector")
    if dim is not None:
        if arr.size == 1 and dim > 1:
            arr = np.full(dim, arr[0])
        if arr.size != dim:
            raise DistributionError(f"{name} has dimension {arr.size}, expected {dim}")
    return arr


def _check_weights(weights) -> np.ndarray:
    w = np.asarray(weights, dtype=float).ravel()
    if w.size == 0 or not np.all(np.isfinite(w)) or np.any(w < 0):
        raise DistributionError("weights must be finite and non-negative")
    if abs(w.sum() - 1.0) > 1e-12:
        raise DistributionError(f"weights must sum to 1 within 1e-12, got {w.sum()!r}")
    return w / w.sum()


@dataclass(frozen=True, eq=False)
class DistributionSpec:
    """A finite mixture of product components (see module docstring).

    Use the named constructors; ``kind`` and ``params`` record how the
    distribution was described so it can be written back to JSON.
    """

    kind: str
    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    widths: np.ndarray  # (K, B, d); zero width means "no uniform on this axis"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DistributionError(f"unknown kind {self.kind!r}")
        k, d = self.means.shape
        if not 1 <= d <= MAX_DIM:
            raise DistributionError(f"dimension must be in 1..{MAX_DIM}, got {d}")
        if self.weights.shape != (k,) or self.variances.shape != (k, d):
            raise DistributionError("inconsistent component arrays")
        if self.widths.ndim != 3 or self.widths.shape[0] != k or self.widths.shape[2] != d:
            raise DistributionError("inconsistent width array")
        for arr in (self.means, self.variances, self.widths):
            if not np.all(np.isfinite(arr)):
                raise DistributionError("component parameters must be finite")
        if np.any(self.variances < 0) or np.any(self.widths < 0):
            raise DistributionError("variances and widths must be non-negative")
        if np.any((self.widths > 0).sum(axis=1) > MAX_BOXES):
            raise DistributionError(f"at most {MAX_BOXES} uniform summands per coordinate")
        for arr in (self.weights, self.means, self.variances, self.widths):
            arr.setflags(write=False)

    # -- constructors -----------------------------------------------------

    @classmethod
    def _build(cls, kind, weights, means, variances, widths=None, params=None):
        means = np.asarray(means, dtype=float)
        k, d = means.shape
        if widths is None:
            widths = np.zeros((k, 0, d))
        return cls(kind, _check_weights(weights), means, np.asarray(variances, dtype=float),
                   np.asarray(widths, dtype=float), dict(params or {}))

    @classmethod
    def gaussian(cls, mean=0.0, var=1.0, dim: Optional[int] = None) -> "DistributionSpec":
        """Gaussian with diagonal covariance ``var`` (scalar means white)."""
        if dim is None:
            dim = max(np.size(mean), np.size(var))
        mean = _as_vector(mean, dim, "mean")
        var = _as_vector(var, dim, "var")
        if np.any(var <= 0):
            raise DistributionError("Gaussian variance must be positive")
        return cls._build("gaussian", [1.0], mean[None, :], var[None, :],
                          params={"mean": mean.tolist(), "var": var.tolist()})

    @classmethod
    def uniform(cls, low, high) -> "DistributionSpec":
        low = _as_vector(low, name="low")
        high = _as_vector(high, low.size, "high")
        if np.any(high <= low):
            raise DistributionError("uniform box needs high > low on every axis")
        d = low.size
        return cls._build("uniform", [1.0], (0.5 * (low + high))[None, :], np.zeros((1, d)),
                          (high - low).reshape(1, 1, d),
                          params={"low": low.tolist(), "high": high.tolist()})

    @classmethod
    def centered_uniform(cls, var: float, dim: int = 1) -> "DistributionSpec":
        """Zero-mean uniform box with per-coordinate variance ``var``."""
        half = math.sqrt(3.0 * var)
        return cls.uniform([-half] * dim, [half] * dim)

    @classmethod
    def atoms(cls, points, weights=None) -> "DistributionSpec":
        pts = _as_matrix(points, name="points")
        if weights is None:
            weights = np.full(len(pts), 1.0 / len(pts))
        w = _check_weights(weights)
        if w.size != len(pts):
            raise DistributionError("one weight per atom required")
        return cls._build("atoms", w, pts, np.zeros_like(pts),
                          params={"points": pts.tolist(), "weights": w.tolist()})

    @classmethod
    def mixture(cls, weights, means, variances) -> "DistributionSpec":
        """Mixture of Gaussians with diagonal covariances."""
        w = _check_weights(weights)
        mu = _as_matrix(means, name="means")
        if len(mu) != w.size:
            mu = _as_matrix(np.asarray(means, dtype=float).reshape(w.size, -1), name="means")
        var = np.asarray(variances, dtype=float).reshape(w.size, -1)
        if var.shape[1] == 1 and mu.shape[1] > 1:
            var = np.repeat(var, mu.shape[1], axis=1)
        if var.shape != mu.shape:
            raise DistributionError("one variance vector per component required")
        if np.any(var <= 0):
            raise DistributionError("mixture component variances must be positive")
        return cls._build("mixture", w, mu, var,
                          params={"weights": w.tolist(), "means": mu.tolist(), "vars": var.tolist()})

    @classmethod
    def atoms_gaussian(cls, points, weights=None, noise_var: float = 1.0) -> "DistributionSpec":
        """Finite atoms convolved with white Gaussian noise of variance ``noise_var``."""
        if not noise_var > 0:
            raise DistributionError("noise variance must be positive")
        base = cls.atoms(points, weights)
        out = base.add_gaussian(noise_var)
        return cls("atoms_gaussian", out.weights, out.means, out.variances, out.widths,
                   {"points": base.params["points"], "weights": base.params["weights"],
                    "noise_var": float(noise_var)})

    # -- JSON ---------------------------------------------------------------

    def to_dict(self) -> dict:
        if self.kind != "composite":
            return {"kind": self.kind, **self.params}
        comps = []
        for c in range(self.n_components):
            boxes = [self.widths[c, b].tolist() for b in range(self.widths.shape[1])
                     if np.any(self.widths[c, b] > 0)]
            comps.append({"weight": float(self.weights[c]), "mean": self.means[c].tolist(),
                          "var": self.variances[c].tolist(), "widths": boxes})
        return {"kind": "composite", "components": comps}

    @classmethod
    def from_dict(cls, data: dict) -> "DistributionSpec":
        if not isinstance(data, dict) or "kind" not in data:
            raise DistributionError("distribution JSON must be an object with a 'kind' field")
        kind = data["kind"]
        body = {k: v for k, v in data.items() if k != "kind"}
        try:
            if kind == "gaussian":
                return cls.gaussian(body.get("mean", 0.0), body.get("var", 1.0))
            if kind == "uniform":
                return cls.uniform(body["low"], body["high"])
            if kind == "atoms":
                return cls.atoms(body["points"], body.get("weights"))
            if kind == "mixture":
                return cls.mixture(body["weights"], body["means"], body["vars"])
            if kind == "atoms_gaussian":
                return cls.atoms_gaussian(body["points"], body.get("weights"), body["noise_var"])
            if kind == "composite":
                comps = body["components"]
                d = len(comps[0]["mean"])
                nbox = max(len(c.get("widths", [])) for c in comps)
                widths = np.zeros((len(comps), nbox, d))
                for i, c in enumerate(comps):
                    for j, wv in enumerate(c.get("widths", [])):
                        widths[i, j] = _as_vector(wv, d, "widths")
                return cls._build("composite", [c["weight"] for c in comps],
                                  [_as_vector(c["mean"], d) for c in comps],
                                  [_as_vector(c.get("var", 0.0), d) for c in comps], widths)
        except KeyError as exc:
            raise DistributionError(f"{kind} distribution is missing field {exc.args[0]!r}") from None
        except (TypeError, IndexError) as exc:
            raise DistributionError(f"malformed {kind} distribution: {exc}") from None
        raise DistributionError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}")

    # -- structure ----------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    @property
    def n_components(self) -> int:
        return self.means.shape[0]

    def _boxes(self, c: int, axis: int) -> list[float]:
        col = self.widths[c, :, axis]
        return [float(w) for w in col if w > 0]

    def component_is_atom(self, c: int) -> bool:
        return all(self.variances[c, i] == 0 and not self._boxes(c, i) for i in range(self.dim))

    @property
    def has_density(self) -> bool:
        """True when no coordinate of any component is a point mass."""
        return all(self.variances[c, i] > 0 or self._boxes(c, i)
                   for c in range(self.n_components) for i in range(self.dim))

    @property
    def is_smooth(self) -> bool:
        return bool(np.all(self.variances > 0))

    @property
    def is_bounded(self) -> bool:
        return bool(np.all(self.variances == 0))

    @property
    def mean(self) -> np.ndarray:
        return self.weights @ self.means

    def _within_variance(self) -> np.ndarray:
        return self.variances + (self.widths**2).sum(axis=1) / 12.0

    @property
    def variance(self) -> np.ndarray:
        """Per-coordinate variance about the mean."""
        second = self.weights @ (self._within_variance() + self.means**2)
        return second - self.mean**2

    @property
    def second_moment(self) -> float:
        """E ||X||^2 (raw, not centred)."""
        return float(np.sum(self.weights @ (self._within_variance() + self.means**2)))

    @property
    def power(self) -> float:
        """Average per-coordinate variance, the variance of the white Gaussian surrogate."""
        return float(np.mean(self.variance))

    def support_radius(self) -> float:
        """max ||x|| over the support; infinite when a Gaussian part is present."""
        if not self.is_bounded:
            return math.inf
        half = 0.5 * self.widths.sum(axis=1)
        far = np.abs(self.means) + half
        return float(np.sqrt((far**2).sum(axis=1)).max())

    def bounds(self, nsigma: float = 10.0) -> tuple[np.ndarray, np.ndarray]:
        """Box covering every component out to ``nsigma`` Gaussian deviations."""
        half = 0.5 * self.widths.sum(axis=1)
        spread = half + nsigma * np.sqrt(self.variances)
        return (self.means - spread).min(axis=0), (self.means + spread).max(axis=0)

    def breakpoints(self, axis: int) -> np.ndarray:
        """Points where a component density along ``axis`` is not smooth."""
        pts = []
        for c in range(self.n_components):
            if self.variances[c, axis] > 0:
                continue
            ws = self._boxes(c, axis)
            lo = self.means[c, axis] - 0.5 * sum(ws)
            for subset in itertools.product((0, 1), repeat=len(ws)):
                pts.append(lo + sum(w for w, b in zip(ws, subset) if b))
        return np.unique(np.asarray(pts, dtype=float))

    # -- transformations -----------------------------------------------------

    def _derived(self, weights, means, variances, widths) -> "DistributionSpec":
        widths = np.asarray(widths, dtype=float)
        # drop box slots that are empty for every component
        keep = np.any(widths > 0, axis=(0, 2))
        widths = widths[:, keep, :]
        return DistributionSpec("composite", np.asarray(weights, dtype=float), np.asarray(means, dtype=float),
                                np.asarray(variances, dtype=float), widths, {})

    def scale(self, c: float) -> "DistributionSpec":
        """Distribution of ``c * X``."""
        c = float(c)
        if c == 0:
            return DistributionSpec.atoms(np.zeros((1, self.dim)))
        return self._derived(self.weights, c * self.means, c * c * self.variances, abs(c) * self.widths)

    def shift(self, offset) -> "DistributionSpec":
        offset = _as_vector(offset, self.dim, "offset")
        return self._derived(self.weights, self.means + offset, self.variances, self.widths)

    def add_gaussian(self, var) -> "DistributionSpec":
        """Distribution of ``X + Z`` with ``Z ~ N(0, var I)`` independent of ``X``."""
        var = _as_vector(var, self.dim, "var")
        if np.any(var < 0):
            raise DistributionError("noise variance must be non-negative")
        return self._derived(self.weights, self.means, self.variances + var, self.widths)

    def convolve(self, other: "DistributionSpec") -> "DistributionSpec":
        """Distribution of ``X + Y`` for independent ``X ~ self`` and ``Y ~ other``."""
        if other.dim != self.dim:
            raise DistributionError("cannot add distributions of different dimensions")
        w = np.outer(self.weights, other.weights).ravel()
        mu = (self.means[:, None, :] + other.means[None, :, :]).reshape(-1, self.dim)
        var = (self.variances[:, None, :] + other.variances[None, :, :]).reshape(-1, self.dim)
        k1, k2 = self.n_components, other.n_components
        wid = np.concatenate([
            np.repeat(self.widths, k2, axis=0),
            np.tile(other.widths, (k1, 1, 1)),
        ], axis=1)
        return self._derived(w, mu, var, wid)

    def __add__(self, other):
        if isinstance(other, DistributionSpec):
            return self.convolve(other)
        return NotImplemented

    def marginal(self, axes: Sequence[int]) -> "DistributionSpec":
        axes = list(axes)
        return self._derived(self.weights, self.means[:, axes], self.variances[:, axes],
                             self.widths[:, :, axes])

    def gaussian_surrogate(self) -> "DistributionSpec":
        """White Gaussian with the same mean and the same average variance."""
        return DistributionSpec.gaussian(self.mean, self.power, dim=self.dim)

    # -- evaluation -----------------------------------------------------------

    def factor(self, c: int, axis: int, y, cumulative: bool = False) -> np.ndarray:
        """Density (or CDF) of component ``c`` along ``axis``."""
        m = float(self.means[c, axis])
        v = float(self.variances[c, axis])
        boxes = self._boxes(c, axis)
        if not cumulative:
            return _factor_eval(y, m, v, boxes, False)
        y = np.asarray(y, dtype=float)
        # the alternating sum loses digits near 1; reflect the upper half
        upper = y > m
        out = _factor_eval(np.where(upper, m, y), m, v, boxes, True)
        if np.any(upper):
            out = np.where(upper, 1.0 - self.factor_survival(c, axis, np.where(upper, y, m)), out)
        return out

    def factor_survival(self, c: int, axis: int, y) -> np.ndarray:
        """1 - CDF of component ``c`` along ``axis``, accurate in the upper tail."""
        return _factor_eval(-np.asarray(y, dtype=float), -float(self.means[c, axis]),
                            float(self.variances[c, axis]), self._boxes(c, axis), True)

    def _points(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 1 and self.dim == 1:
            x = x[:, None]
        elif x.ndim == 1:
            x = x[None, :]
        if x.shape[-1] != self.dim:
            raise DistributionError(f"points have dimension {x.shape[-1]}, expected {self.dim}")
        return x

    def pdf(self, x) -> np.ndarray:
        """Density at the rows of ``x`` (shape (m, d), or (m,) in one dimension)."""
        if not self.has_density:
            raise DistributionError("distribution has atoms and no density")
        x = self._points(x)
        out = np.zeros(x.shape[0])
        for c in range(self.n_components):
            term = np.full(x.shape[0], self.weights[c])
            for i in range(self.dim):
                term *= self.factor(c, i, x[:, i])
            out += term
        return out

    def marginal_cdf(self, axis: int, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        out = np.zeros_like(y)
        for c in range(self.n_components):
            if self.variances[c, axis] == 0 and not self._boxes(c, axis):
                out += self.weights[c] * (y >= self.means[c, axis])
            else:
                out += self.weights[c] * self.factor(c, axis, y, cumulative=True)
        return np.clip(out, 0.0, 1.0)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """``n`` draws as an (n, d) array."""
        idx = rng.choice(self.n_components, size=n, p=self.weights)
        out = self.means[idx] + rng.standard_normal((n, self.dim)) * np.sqrt(self.variances[idx])
        for b in range(self.widths.shape[1]):
            out += (rng.random((n, self.dim)) - 0.5) * self.widths[idx, b]
        return out

    def __repr__(self):
        return f"DistributionSpec({self.to_dict()!r})"


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Empirical vectors, one per row."""

    points: np.ndarray
    seed: Optional[int] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
            raise DistributionError("a sample set needs at least one vector")
        if not np.all(np.isfinite(pts)):
            raise DistributionError("samples must be finite")
        object.__setattr__(self, "points", pts)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]

    @classmethod
    def draw(cls, dist: DistributionSpec, n: int, seed: int) -> "SampleSet":
        return cls(dist.sample(n, np.random.default_rng(seed)), seed)

    @classmethod
    def from_csv(cls, text: str, header: bool = False) -> "SampleSet":
        rows = [r for r in csv.reader(io.StringIO(text)) if r and any(f.strip() for f in r)]
        if header:
            rows = rows[1:]
        try:
            pts = np.array([[float(f) for f in r] for r in rows], dtype=float)
        except ValueError as exc:
            raise DistributionError(f"malformed sample CSV: {exc}") from None
        if pts.ndim != 2:
            raise DistributionError("sample CSV rows must all have the same number of columns")
        return cls(pts)

    def to_csv(self, header: bool = False) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        if header:
            writer.writerow([f"x{i + 1}" for i in range(self.dim)])
        for row in self.points:
            writer.writerow([repr(float(v)) for v in row])
        return buf.getvalue()
