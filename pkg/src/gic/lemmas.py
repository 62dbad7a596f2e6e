"""Numerical verification of the information inequalities behind the corner points.

Every check returns a :class:`VerificationReport`.  Quadrature paths are
deterministic; the only random draws are the Monte Carlo cross-checks of the
coupling correlation, seeded from ``(seed, instance index)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .channel import ChannelParams, Regime, classify_regime, validate_params
from .corners import costa_corner, sato_corner, single_user_capacity, strong_corners
from .distributions import DistributionSpec, SampleSet, gaussian_entropy
from .errors import DistributionError, ParameterError
from .measures import (
    correlation_coefficient,
    entropy_power,
    entropy_quad,
    mutual_info_additive_quad,
    mutual_info_density,
)
from .report import VerificationReport
from .transport import build_knothe_map, evaluate_map

__all__ = [
    "ExperimentConfig",
    "LEMMA_IDS",
    "default_roster",
    "verify_monotonicity",
    "verify_ag_preservation",
    "verify_weak_epi",
    "verify_fork_identity",
    "verify_entropy_gap_bound",
    "verify_ald_mi",
    "verify_concavity_mu",
    "near_gaussian_mixture",
    "run_converse_chain",
    "run_lemmas",
]

LEMMA_IDS = ("3", "4", "fork", "5", "ald", "7", "chain-strong", "chain-sato", "chain-costa")
T_GRID = (0.25, 0.5, 1.0, 2.0, 4.0)
U_GRID = (0.25, 0.5, 1.0, 2.0, 4.0)


def default_roster() -> tuple[tuple[str, DistributionSpec], ...]:
    """Zero-mean, unit-power inputs from Gaussian to code-like."""
    r = math.sqrt(0.99)
    return (
        ("gaussian", DistributionSpec.gaussian(0.0, 1.0)),
        ("uniform", DistributionSpec.centered_uniform(1.0)),
        ("two_atoms_gauss", DistributionSpec.atoms_gaussian([[-r], [r]], noise_var=0.01)),
        ("mixture3", DistributionSpec.mixture([0.3, 0.4, 0.3], [[-1.2], [0.0], [1.2]], [[0.136]] * 3)),
    )


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    samples: int = 100_000
    tolerance: float = 1e-5
    roster: tuple = field(default_factory=default_roster)
    channel: ChannelParams = ChannelParams(1.0, 1.0, 1.0, 0.5)

    def __post_init__(self):
        bad = []
        if not self.tolerance > 0:
            bad.append(("tolerance", self.tolerance, "must be positive"))
        if self.samples < 1000:
            bad.append(("samples", self.samples, "must be at least 1000"))
        if not 0 <= self.seed < 2**64:
            bad.append(("seed", self.seed, "must fit in 64 unsigned bits"))
        if bad:
            raise ParameterError(bad)

    def rng(self, index: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, index])


def _is_gaussian(x: DistributionSpec) -> bool:
    return x.n_components == 1 and x.is_smooth and x.widths.shape[1] == 0


def _mi(x: DistributionSpec, noise: float):
    """(I(X; X+Z), error estimate); closed form when X is Gaussian."""
    if x.n_components == 1 and x.component_is_atom(0):
        return 0.0, 0.0
    if _is_gaussian(x):
        return float(0.5 * np.log1p(x.variances[0] / noise).sum()), 0.0
    q = mutual_info_additive_quad(x, noise)
    return q.value, q.error


def _h(x: DistributionSpec):
    if _is_gaussian(x):
        return float(sum(gaussian_entropy(v) for v in x.variances[0])), 0.0
    q = entropy_quad(x)
    return q.value, q.error


def _fmt(x: DistributionSpec) -> str:
    return x.kind


# -- monotonicity in snr -----------------------------------------------------

def verify_monotonicity(x: DistributionSpec, noise: float = 1.0, t_grid: Sequence[float] = T_GRID,
                        tol: float = 1e-5, label: Optional[str] = None) -> VerificationReport:
    """I(X; sqrt(t) X + Z) is nondecreasing along ``t_grid``."""
    if x.dim > 2:
        raise DistributionError("monotonicity check supports dimension at most 2")
    t = np.asarray(t_grid, dtype=float)
    if np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise ValueError("t grid must be positive and increasing")
    vals, errs = zip(*(_mi(x.scale(math.sqrt(ti)), noise) for ti in t))
    diffs = np.diff(vals)
    worst = float(diffs.min()) if diffs.size else 0.0
    return VerificationReport(
        "3", "ge", 1, worst, tol,
        diagnostics=[{"input": label or _fmt(x), "noise": noise, "t": t.tolist(), "mi": list(vals),
                      "increments": diffs.tolist()}],
        noise_floor=max(errs),
    )


# -- Gaussian-likeness under scaling --------------------------------------------

def _ag_gap(x: DistributionSpec, noise: float):
    """h(X^G + Z) - h(X + Z) and its error estimate."""
    hx, err = _h(x.add_gaussian(noise))
    hg = gaussian_entropy(x.power + noise, x.dim)
    return hg - hx, err


def verify_ag_preservation(x: DistributionSpec, noise: float = 1.0, t: float = 0.5,
                           tol: float = 1e-5, label: Optional[str] = None) -> VerificationReport:
    """Scaling by sqrt(t) < 1 cannot increase the entropy gap to the Gaussian after noise."""
    if x.dim != 1:
        raise DistributionError("Gaussian-likeness check is one-dimensional")
    if not 0 < t < 1:
        raise ValueError("t must lie in (0, 1)")
    g1, e1 = _ag_gap(x, noise)
    gt, et = _ag_gap(x.scale(math.sqrt(t)), noise)
    return VerificationReport(
        "4", "ge", 1, g1 - gt, tol,
        diagnostics=[{"input": label or _fmt(x), "t": t, "noise": noise, "gap_at_1": g1, "gap_at_t": gt}],
        noise_floor=max(e1, et),
    )


def verify_weak_epi(x: DistributionSpec, noise: float = 1.0, tol: float = 1e-4,
                    label: Optional[str] = None) -> VerificationReport:
    """N(X+Z) >= N(X) + N(Z) N(X)/N(X^G), the divergence-contraction form."""
    if not x.has_density:
        raise DistributionError("entropy power of X needs a density")
    d = x.dim
    hx, ex = _h(x)
    hxz, exz = _h(x.add_gaussian(noise))
    nx = entropy_power(hx, d)
    nxz = entropy_power(hxz, d)
    nxg = x.power
    rhs = nx + noise * nx / nxg
    # first-order propagation of the entropy errors into entropy powers
    floor = 2.0 * (nxz * exz + nx * ex * (1 + noise / nxg)) / d
    return VerificationReport(
        "4-epi", "ge", 1, nxz - rhs, tol,
        diagnostics=[{"input": label or _fmt(x), "noise": noise, "N_X": nx, "N_XZ": nxz, "N_XG": nxg,
                      "rhs": rhs}],
        noise_floor=floor,
    )


# -- Fork identity ----------------------------------------------------------------

def verify_fork_identity(x1: DistributionSpec, x2: DistributionSpec, noise: float = 1.0,
                         tol: float = 1e-5, label: Optional[str] = None) -> VerificationReport:
    """Both users lose the same information to the shared sum.

    The four-entropy expression is the reference; each information loss is
    also computed on its own from information-density integrals, so the
    identity is checked between genuinely different computations.
    """
    if x1.dim != 1 or x2.dim != 1:
        raise DistributionError("fork identity check is one-dimensional")
    z = DistributionSpec.gaussian(0.0, noise)
    h123, e1 = _h(x1 + x2 + z)
    h13, e2 = _h(x1 + z)
    h23, e3 = _h(x2 + z)
    reference = h123 - h13 - h23 + gaussian_entropy(noise)

    def loss(a: DistributionSpec, b: DistributionSpec):
        if a.n_components == 1 and a.component_is_atom(0):
            return 0.0, 0.0
        full = mutual_info_density(a, b + z)
        alone = mutual_info_density(a, z)
        return full.value - alone.value, full.error + alone.error

    loss1, f1 = loss(x1, x2)
    loss2, f2 = loss(x2, x1)
    worst = -max(abs(loss1 - reference), abs(loss2 - reference))
    return VerificationReport(
        "fork", "eq", 1, worst, tol,
        diagnostics=[{"input": label or f"{_fmt(x1)}|{_fmt(x2)}", "noise": noise,
                      "four_entropy": reference, "loss_user1": loss1, "loss_user2": loss2}],
        noise_floor=max(e1 + e2 + e3, f1, f2),
    )


# -- coupling bound and its mutual-information consequence ---------------------------

def _amplitude_power(x: DistributionSpec) -> float:
    """a P1 implied by the support of X: max ||x||^2 / n."""
    r = x.support_radius()
    if not math.isfinite(r):
        raise DistributionError("bounded input required (Gaussian part has unbounded support)")
    return r * r / x.dim


def _coupling(y: DistributionSpec, samples: int, rng: np.random.Generator):
    tmap = build_knothe_map(y)
    rho = tmap.correlation()
    src = SampleSet(tmap.source.sample(samples, rng))
    rho_mc = correlation_coefficient(src, SampleSet(evaluate_map(tmap, src.points)))
    return rho, rho_mc


def verify_entropy_gap_bound(x: DistributionSpec, y: DistributionSpec, *, samples: int = 10_000,
                             rng: Optional[np.random.Generator] = None, tol: float = 1e-4,
                             label: Optional[str] = None) -> VerificationReport:
    """h(X+Y) - h(X+Y^G) <= n sqrt(2 aP1/Q) sqrt(1 - rho(Y, Y^G)).

    ``aP1`` is read off the support of ``x``; ``Q`` is the power of ``y``.
    """
    if x.dim != 1 or y.dim != 1:
        raise DistributionError("entropy gap bound check is one-dimensional")
    if abs(float(y.mean[0])) > 1e-12:
        raise DistributionError("target Y must be zero-mean")
    ap1 = _amplitude_power(x)
    q = y.power
    yg = y.gaussian_surrogate()
    rng = rng or np.random.default_rng(0)
    h_xy, e1 = _h(x + y) if y.has_density else (math.nan, 0.0)
    h_xyg, e2 = _h(x + yg)
    lhs = h_xy - h_xyg
    rho, rho_mc = _coupling(y, samples, rng)
    rhs = x.dim * math.sqrt(2.0 * ap1 / q) * math.sqrt(max(0.0, 1.0 - rho))
    return VerificationReport(
        "5", "ge", 1, rhs - lhs, tol,
        diagnostics=[{"input": label or f"{_fmt(x)}|{_fmt(y)}", "aP1": ap1, "Q": q, "lhs": lhs, "rhs": rhs,
                      "rho": rho, "rho_monte_carlo": rho_mc}],
        noise_floor=e1 + e2,
    )


def ald_constant(dim: int, ap1: float, q: float, deficit: float) -> float:
    """kappa(delta) = n sqrt(2 aP1/Q) sqrt(1 - exp(-delta/n))."""
    return dim * math.sqrt(2.0 * ap1 / q) * math.sqrt(-math.expm1(-deficit / dim))


def verify_ald_mi(x: DistributionSpec, y: DistributionSpec, deficit: float, *, samples: int = 10_000,
                  rng: Optional[np.random.Generator] = None, tol: float = 1e-4,
                  label: Optional[str] = None) -> VerificationReport:
    """I(X; X+Y^G) >= I(X; X+Y) - kappa(delta) for Y within ``deficit`` nats of Gaussian."""
    if x.dim != 1 or y.dim != 1:
        raise DistributionError("ALD check is one-dimensional")
    ap1 = _amplitude_power(x)
    q = y.power
    yg = y.gaussian_surrogate()
    h_y, e0 = _h(y)
    h_yg = gaussian_entropy(q, y.dim)
    actual = h_yg - h_y
    if actual > deficit + 1e-9:
        raise DistributionError(f"target entropy deficit {actual:.3g} exceeds the stated {deficit:.3g}")
    h_xy, e1 = _h(x + y)
    h_xyg, e2 = _h(x + yg)
    i_y = h_xy - h_y
    i_yg = h_xyg - h_yg
    kappa = ald_constant(x.dim, ap1, q, deficit)
    rng = rng or np.random.default_rng(0)
    rho, rho_mc = _coupling(y, samples, rng)
    # the chain also guarantees rho >= exp(-delta/n)
    rho_slack = rho - math.exp(-deficit / x.dim)
    violation = i_y - i_yg
    return VerificationReport(
        "ald", "ge", 1, min(kappa - violation, rho_slack), tol,
        diagnostics=[{"input": label or f"{_fmt(x)}|{_fmt(y)}", "deficit": deficit, "measured_deficit": actual,
                      "mi_y": i_y, "mi_y_gauss": i_yg, "kappa": kappa, "rho": rho,
                      "rho_monte_carlo": rho_mc, "rho_floor": math.exp(-deficit / x.dim)}],
        noise_floor=e0 + e1 + e2,
    )


def near_gaussian_mixture(q: float, deficit: float) -> DistributionSpec:
    """Symmetric two-Gaussian mixture of variance ``q`` with entropy ``deficit`` below Gaussian."""
    if not 0 < deficit < 0.3:
        raise ValueError("deficit must lie in (0, 0.3)")

    def build(frac):
        m = math.sqrt(frac * q)
        return DistributionSpec.mixture([0.5, 0.5], [[-m], [m]], [[(1 - frac) * q]] * 2)

    hg = gaussian_entropy(q)

    def excess(frac):
        return hg - _h(build(frac))[0] - deficit

    frac = brentq(excess, 1e-6, 0.95, xtol=1e-14)
    return build(frac)


# -- concavity quotient -----------------------------------------------------------

def _concavity_slack(i_u: float, i_up: float, i_upp: float, u: float, up: float, upp: float) -> float:
    t, tp, tpp = 1.0 / u, 1.0 / up, 1.0 / upp
    mu = (t - tp) / (tp - tpp)
    return (i_up - i_u) - mu * (i_upp - i_up)


def verify_concavity_mu(x: DistributionSpec, u_grid: Sequence[float] = U_GRID, tol: float = 1e-5,
                        triples: Optional[Sequence[tuple]] = None,
                        label: Optional[str] = None) -> VerificationReport:
    """I(u') - I(u) >= mu (I(u'') - I(u')) for every u < u' < u'' with I(u) = I(X; X + Z_u)."""
    if x.dim != 1:
        raise DistributionError("concavity check is one-dimensional")
    if triples is None:
        us = sorted(set(float(u) for u in u_grid))
        triples = list(itertools.combinations(us, 3))
    for u, up, upp in triples:
        if not 0 < u < up < upp:
            raise ValueError(f"need 0 < u < u' < u'', got {(u, up, upp)}")
    cache = {}

    def info(u):
        if u not in cache:
            cache[u] = _mi(x, u)
        return cache[u][0]

    diags = []
    worst = math.inf
    for u, up, upp in triples:
        s = _concavity_slack(info(u), info(up), info(upp), u, up, upp)
        worst = min(worst, s)
        diags.append({"input": label or _fmt(x), "u": [u, up, upp], "slack": s})
    return VerificationReport("7", "ge", len(triples), worst, tol, diagnostics=diags,
                              noise_floor=max(e for _, e in cache.values()))


# -- converse chains ------------------------------------------------------------------

def _gh(var: float) -> float:
    return gaussian_entropy(var)


@dataclass
class _Chain:
    values: list = field(default_factory=list)

    def start(self, label: str, value: float):
        self.values.append({"label": label, "relation": "start", "value": value})

    def link(self, label: str, relation: str, value: float, asserted: bool = True):
        prev = self.values[-1]["value"]
        if relation == "le":
            slack = value - prev
        elif relation == "ge":
            slack = prev - value
        else:
            slack = -abs(value - prev)
        self.values.append({"label": label, "relation": relation, "value": value, "slack": slack,
                            "asserted": asserted})

    def hypothesis(self, label: str, note: str):
        self.values.append({"label": label, "relation": "hypothesis", "note": note,
                            "value": self.values[-1]["value"], "asserted": False})

    @property
    def end(self) -> float:
        return self.values[-1]["value"]

    def worst(self) -> float:
        s = [v["slack"] for v in self.values if v.get("asserted") and "slack" in v]
        return min(s) if s else 0.0


def _chain_strong(p: ChannelParams):
    p1, p2, n, a = p.p1, p.p2, p.noise, p.a
    c1 = single_user_capacity(p1, n)
    c2 = single_user_capacity(p2, n)
    cp = strong_corners(p, enforce_regime=False)
    h_y2 = _gh(a * p1 + p2 + n)
    h_z = _gh(n)

    user2 = _Chain()
    user2.start("I(X2;Y2)", 0.5 * math.log1p(p2 / (a * p1 + n)))
    user2.hypothesis("Fano+DPI", "nR2 <~ I(X2;Y2); needs codes, not simulated")
    user2.link("= h(Y2) - h(sqrt(a)X1+Z)", "eq", h_y2 - _gh(a * p1 + n))
    user2.link("monotone in scaling (a >= 1)", "le", h_y2 - _gh(p1 + n))
    user2.link("AG", "le", h_y2 - h_z - c1)
    user2.link("MaxEnt", "le", 0.5 * math.log1p((a * p1 + p2) / n) - c1)

    user1 = _Chain()
    user1.start("I(X1;Y1) = I(X1;X1+Z)", c1)
    user1.hypothesis("Fano+DPI", "nR1 <~ I(X1;Y1); needs codes, not simulated")
    user1.link("monotone in scaling (a >= 1)", "le", 0.5 * math.log1p(a * p1 / n))
    user1.link("AL", "le", 0.5 * math.log1p(a * p1 / (p2 + n)), asserted=False)
    user1.link("= h(Y2) - h(X2+Z)", "eq", h_y2 - _gh(p2 + n))
    user1.link("AG", "le", h_y2 - h_z - c2)
    user1.link("MaxEnt", "le", 0.5 * math.log1p((a * p1 + p2) / n) - c2)
    return [("c2_prime", user2, cp.c2_prime), ("c1_prime", user1, cp.c1_prime)]


def _chain_sato(p: ChannelParams):
    p1, p2, n, a = p.p1, p.p2, p.noise, p.a
    h_y2 = _gh(a * p1 + p2 + n)
    ch = _Chain()
    ch.start("I(X2;Y2)", 0.5 * math.log1p(p2 / (a * p1 + n)))
    ch.hypothesis("Fano+DPI", "nR2 <~ I(X2;Y2); needs codes, not simulated")
    ch.link("= h(Y2) - h(sqrt(a)X1+Z)", "eq", h_y2 - _gh(a * p1 + n))
    # AG preservation carries the Gaussian-likeness of X1+Z over to sqrt(a)X1+Z
    ch.link("AG preserved under scaling", "le", h_y2 - _gh(a * p1 + n))
    ch.link("MaxEnt", "le", 0.5 * math.log1p(p2 / (a * p1 + n)))
    return [("c2_prime", ch, sato_corner(p, enforce_regime=False))]


def _chain_costa(p: ChannelParams):
    p1, p2, n, a = p.p1, p.p2, p.noise, p.a
    ch = _Chain()
    ch.start("h(sqrt(a)X1G+X2G+Z) - h(X2G+Z)", _gh(a * p1 + p2 + n) - _gh(p2 + n))
    ch.link("MaxEnt", "ge", _gh(a * p1 + p2 + n) - _gh(p2 + n))
    ch.link("= I(X1;sqrt(a)X1+X2G+Z)", "eq", 0.5 * math.log1p(a * p1 / (p2 + n)))
    ch.link("ALD (Gaussian Y is its own surrogate)", "ge", 0.5 * math.log1p(a * p1 / (p2 + n)))
    ch.link("AL", "ge", 0.5 * math.log1p(a * p1 / n), asserted=False)
    # the concavity step is an implication; assert the quotient inequality behind it
    i = {u: 0.5 * math.log1p(a * p1 / u) for u in (a * n, n, p2 + n)}
    slack = _concavity_slack(i[a * n], i[n], i[p2 + n], a * n, n, p2 + n)
    ch.link("concavity in 1/u at (aN, N, P2+N)", "ge", 0.5 * math.log1p(p1 / n), asserted=False)
    ch.values[-1]["concavity_slack"] = slack
    ch.link("= I(X1;X1+Z) = I(X1;Y1)", "eq", single_user_capacity(p1, n))
    ch.hypothesis("Fano+DPI", "I(X1;Y1) >~ nR1; needs codes, not simulated")
    return [("c1_prime", ch, costa_corner(p, enforce_regime=False), slack)]


_CHAINS: dict[str, tuple[Callable, tuple]] = {
    "strong": (_chain_strong, (Regime.STRONG, Regime.VERY_STRONG)),
    "sato": (_chain_sato, (Regime.WEAK,)),
    "costa": (_chain_costa, (Regime.WEAK,)),
}


def run_converse_chain(params: ChannelParams, regime: str, tol: float = 1e-12) -> VerificationReport:
    """Evaluate a converse proof chain link by link with Gaussian inputs.

    Inequality links must hold; the anchored end of the chain must equal the
    closed-form corner to ``tol``.  Links whose premise Gaussian inputs do not
    satisfy (almost-lossless addition) are evaluated and reported with
    ``asserted = False``.
    """
    validate_params(params, require_z=True)
    if regime not in _CHAINS:
        raise ValueError(f"unknown chain {regime!r}; expected one of {sorted(_CHAINS)}")
    build, allowed = _CHAINS[regime]
    actual = classify_regime(params)
    if actual not in allowed:
        raise ValueError(f"{regime} chain needs a {'/'.join(r.value for r in allowed)} channel, got {actual.value}")
    worst = math.inf
    diags = []
    for item in build(params):
        name, chain, corner = item[:3]
        # the start of the Costa chain is the corner; the others end there
        anchor = chain.values[0]["value"] if regime == "costa" else chain.values[-1]["value"]
        end_gap = -abs(anchor - corner) / max(1.0, abs(corner))
        slacks = [chain.worst(), end_gap]
        if len(item) > 3:
            slacks.append(item[3])
        worst = min(worst, *slacks)
        diags.append({"corner": name, "corner_value": corner, "chain_value": anchor, "end_gap": end_gap,
                      "links": chain.values})
    return VerificationReport(f"chain-{regime}", "ge", len(diags), worst, tol, diagnostics=diags,
                              noise_floor=1e-15)


# -- roster drivers ---------------------------------------------------------------------

def _merge(lemma_id, relation, parts, tol):
    return VerificationReport.merge(lemma_id, relation, parts, tolerance=tol)


def _run_3(cfg: ExperimentConfig):
    parts = [verify_monotonicity(x, 1.0, T_GRID, cfg.tolerance, name) for name, x in cfg.roster]
    g2 = DistributionSpec.mixture([0.5, 0.5], [[-0.8, 0.5], [0.8, -0.5]], [[0.36, 0.75], [0.36, 0.75]])
    parts.append(verify_monotonicity(g2, 1.0, T_GRID, cfg.tolerance, "mixture2d"))
    return [_merge("3", "ge", parts, cfg.tolerance)]


def _run_4(cfg: ExperimentConfig):
    parts = []
    xs = list(cfg.roster) + [("near_gaussian", near_gaussian_mixture(1.0, 0.01)),
                             ("two_atoms", DistributionSpec.atoms([[-1.0], [1.0]]))]
    for name, x in xs:
        for t in (0.25, 0.5, 0.75):
            parts.append(verify_ag_preservation(x, 1.0, t, cfg.tolerance, name))
    epi = [verify_weak_epi(x, 1.0, cfg.tolerance, name) for name, x in xs if x.has_density]
    return [_merge("4", "ge", parts, cfg.tolerance), _merge("4-epi", "ge", epi, cfg.tolerance)]


def _fork_pairs(cfg: ExperimentConfig):
    pairs = [(f"{n1}|{n2}", x1, x2) for (n1, x1), (n2, x2) in itertools.product(cfg.roster, repeat=2)]
    pairs.append(("two_atoms|gaussian", DistributionSpec.atoms([[-1.0], [1.0]]), DistributionSpec.gaussian(0, 1)))
    pairs.append(("gaussian|zero", DistributionSpec.gaussian(0, 1), DistributionSpec.atoms([[0.0]])))
    return pairs


def _run_fork(cfg: ExperimentConfig):
    parts = [verify_fork_identity(x1, x2, 1.0, cfg.tolerance, name) for name, x1, x2 in _fork_pairs(cfg)]
    return [_merge("fork", "eq", parts, cfg.tolerance)]


def _bounded_inputs(ap1: float):
    r = math.sqrt(ap1)
    return (
        ("two_atoms", DistributionSpec.atoms([[-r], [r]])),
        ("box", DistributionSpec.uniform([-r], [r])),
        ("three_atoms", DistributionSpec.atoms([[-r], [0.0], [r]], [0.25, 0.5, 0.25])),
        ("skew_atoms", DistributionSpec.atoms([[-r], [0.5 * r]], [1 / 3, 2 / 3])),
        ("zero", DistributionSpec.atoms([[0.0]])),
    )


def _non_gaussian_targets(q: float):
    r = math.sqrt(0.8 * q)
    return (
        ("uniform", DistributionSpec.centered_uniform(q)),
        ("two_atoms_gauss", DistributionSpec.atoms_gaussian([[-r], [r]], noise_var=0.2 * q)),
        ("gaussian", DistributionSpec.gaussian(0.0, q)),
    )


def _run_5(cfg: ExperimentConfig):
    ch = cfg.channel
    ap1 = ch.a * ch.p1
    q = ch.p2 + ch.noise
    parts = []
    index = 0
    for (nx, x), (ny, y) in itertools.product(_bounded_inputs(ap1), _non_gaussian_targets(q)):
        parts.append(verify_entropy_gap_bound(x, y, samples=cfg.samples, rng=cfg.rng(index),
                                              tol=cfg.tolerance, label=f"{nx}|{ny}"))
        index += 1
    return [_merge("5", "ge", parts, cfg.tolerance)]


def _run_ald(cfg: ExperimentConfig):
    ch = cfg.channel
    ap1 = ch.a * ch.p1
    q = ch.p2 + ch.noise
    parts = []
    index = 0
    for delta in (0.001, 0.005, 0.02):
        y = near_gaussian_mixture(q, delta)
        for nx, x in _bounded_inputs(ap1):
            parts.append(verify_ald_mi(x, y, delta, samples=cfg.samples, rng=cfg.rng(1000 + index),
                                       tol=cfg.tolerance, label=f"{nx}|mixture(delta={delta})"))
            index += 1
    return [_merge("ald", "ge", parts, cfg.tolerance)]


def _run_7(cfg: ExperimentConfig):
    ch = cfg.channel
    parts = [verify_concavity_mu(x, U_GRID, cfg.tolerance, label=name) for name, x in cfg.roster]
    # instantiation used for the missing corner: X = sqrt(a) X1 with power P1
    triple = [(ch.a * ch.noise, ch.noise, ch.p2 + ch.noise)]
    for name, x in cfg.roster:
        x1 = x.scale(math.sqrt(ch.p1 / x.power))
        parts.append(verify_concavity_mu(x1.scale(math.sqrt(ch.a)), tol=cfg.tolerance, triples=triple,
                                         label=f"sqrt(a)*{name}"))
    return [_merge("7", "ge", parts, cfg.tolerance)]


def _strong_params(cfg: ExperimentConfig) -> ChannelParams:
    ch = cfg.channel
    if classify_regime(ch) is Regime.STRONG:
        return ch
    return ChannelParams(1.0, 1.0, 1.0, 1.5)


def _weak_params(cfg: ExperimentConfig) -> ChannelParams:
    ch = cfg.channel
    if classify_regime(ch) is Regime.WEAK:
        return ch
    return ChannelParams(1.0, 1.0, 1.0, 0.5)


def run_lemmas(lemma_ids: Sequence[str] = ("all",), config: Optional[ExperimentConfig] = None,
               chain_tol: float = 1e-12) -> list[VerificationReport]:
    """Run the selected checks over the configured roster, in a fixed order."""
    cfg = config or ExperimentConfig()
    ids = list(LEMMA_IDS) if "all" in lemma_ids else list(lemma_ids)
    unknown = [i for i in ids if i not in LEMMA_IDS]
    if unknown:
        raise ValueError(f"unknown lemma id(s) {unknown}; expected {list(LEMMA_IDS)} or 'all'")
    tol_chain = min(chain_tol, cfg.tolerance)
    runners = {
        "3": _run_3,
        "4": _run_4,
        "fork": _run_fork,
        "5": _run_5,
        "ald": _run_ald,
        "7": _run_7,
        "chain-strong": lambda c: [run_converse_chain(_strong_params(c), "strong", tol_chain)],
        "chain-sato": lambda c: [run_converse_chain(_weak_params(c), "sato", tol_chain)],
        "chain-costa": lambda c: [run_converse_chain(_weak_params(c), "costa", tol_chain)],
    }
    out = []
    for lemma in LEMMA_IDS:
        if lemma in ids:
            out.extend(runners[lemma](cfg))
    return out
