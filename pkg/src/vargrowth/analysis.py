"""Numeric verification of the structure conditions a density must satisfy.

Each scan samples the radial profile over a grid, fits the relevant constant
empirically (inf/sup over the grid, so every claim is scoped to the scanned
range), and reports a verdict. Unboundedness cannot be proven by a finite
scan; instead the ratio is tracked along dyadic arguments t = 2^j and flagged
as ``unbounded-trend`` when it is strictly increasing over the last five
doublings.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .density import PHI_MU, SPIKE_BLEND, DensitySpec, _profile

__all__ = [
    "ScanRange", "DiagnosticReport",
    "scan_ellipticity", "scan_growth", "scan_balance", "check_delta2",
    "tv_limit_error",
]

VERDICT_HOLDS = "holds"
VERDICT_VIOLATED = "violated"
VERDICT_UNBOUNDED = "unbounded-trend"

_TREND_DOUBLINGS = 5


@dataclass(frozen=True)
class ScanRange:
    """Sampling grid for the scans; logarithmic by default."""

    t_min: float = 1e-3
    t_max: float = 1e4
    samples: int = 2048
    spacing: str = "log"

    def __post_init__(self):
        if not (0.0 <= self.t_min < self.t_max) or not math.isfinite(self.t_max):
            raise ValueError(f"need 0 <= t_min < t_max, got [{self.t_min}, {self.t_max}]")
        if self.samples < 16:
            raise ValueError(f"samples must be >= 16, got {self.samples}")
        if self.spacing not in ("log", "linear"):
            raise ValueError(f"spacing must be 'log' or 'linear', got {self.spacing!r}")
        if self.spacing == "log" and self.t_min <= 0.0:
            raise ValueError("log spacing requires t_min > 0")

    def grid(self) -> np.ndarray:
        if self.spacing == "log":
            return np.logspace(math.log10(self.t_min), math.log10(self.t_max),
                               self.samples)
        return np.linspace(self.t_min, self.t_max, self.samples)


@dataclass(frozen=True)
class DiagnosticReport:
    """Outcome of one scan: fitted constants, verdict, and the trend data."""

    condition: str
    fitted_constants: dict[str, float]
    verdict: str
    witness: float | None
    trend: list[tuple[float, float]]
    curve: tuple[np.ndarray, np.ndarray] = field(repr=False, compare=False,
                                                 default=(np.array([]), np.array([])))

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "fitted_constants": dict(self.fitted_constants),
            "verdict": self.verdict,
            "witness": self.witness,
            "trend": [[t, r] for t, r in self.trend],
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def curve_csv(self) -> str:
        """Two-column CSV (t, ratio) of the full sampled ratio curve."""
        lines = ["t,ratio"]
        lines += [f"{t!r},{r!r}" for t, r in zip(*self.curve)]
        return "\n".join(lines) + "\n"


def _upper_exponent(spec: DensitySpec) -> float:
    # the phimu family is linear from above, i.e. read with p = 1
    return 1.0 if spec.family == PHI_MU else float(spec.p)


def _sample_ts(spec: DensitySpec, rng: ScanRange) -> np.ndarray:
    ts = rng.grid()
    if spec.family == SPIKE_BLEND:
        # the weight vanishes exactly at integers; sample the tips
        lo = max(1.0, math.ceil(rng.t_min))
        if lo <= rng.t_max:
            ints = np.arange(lo, math.floor(rng.t_max) + 1.0)
            ts = np.unique(np.concatenate([ts, ints]))
    return ts


def _profile_rows(spec: DensitySpec, ts: np.ndarray) -> tuple[np.ndarray, ...]:
    prof = _profile(spec)
    g = np.empty(ts.shape)
    g1 = np.empty(ts.shape)
    g2 = np.empty(ts.shape)
    for i, t in enumerate(ts):
        g[i], g1[i] = prof.g_g1(float(t))
        g2[i] = prof.g2(float(t))
    return g, g1, g2


def _dyadic_ts(rng: ScanRange) -> list[float]:
    j_lo = math.ceil(math.log2(rng.t_min)) if rng.t_min > 0.0 else 0
    j_hi = math.floor(math.log2(rng.t_max))
    return [2.0 ** j for j in range(j_lo, j_hi + 1)]


def _trend_increasing(trend: list[tuple[float, float]]) -> bool:
    if len(trend) < _TREND_DOUBLINGS + 1:
        return False
    tail = [r for _, r in trend[-(_TREND_DOUBLINGS + 1):]]
    return all(b > a for a, b in zip(tail, tail[1:]))


def _eigen_rows(g1, g2, ts):
    with np.errstate(divide="ignore", invalid="ignore"):
        tangential = np.where(ts > 0.0, g1 / np.where(ts > 0.0, ts, 1.0), g2)
    lam_min = np.minimum(g2, tangential)
    lam_max = np.maximum(g2, tangential)
    return lam_min, lam_max


def scan_ellipticity(spec: DensitySpec, rng: ScanRange = ScanRange()) -> DiagnosticReport:
    """Fit the two-sided Hessian bounds

        c5 (1+t)^(-mu) <= lambda(t) <= c6 (1+t)^(p-2)

    from the eigenvalues g''(t) and g'(t)/t over the grid.
    """
    ts = _sample_ts(spec, rng)
    _, g1, g2 = _profile_rows(spec, ts)
    lam_min, lam_max = _eigen_rows(g1, g2, ts)
    p_eff = _upper_exponent(spec)
    low_ratio = lam_min * (1.0 + ts) ** spec.mu
    high_ratio = lam_max * (1.0 + ts) ** (2.0 - p_eff)
    c5 = float(np.min(low_ratio))
    c6 = float(np.max(high_ratio))
    verdict = VERDICT_HOLDS if c5 > 0.0 and math.isfinite(c6) else VERDICT_VIOLATED
    witness = None if verdict == VERDICT_HOLDS else float(ts[int(np.argmin(low_ratio))])
    prof = _profile(spec)

    def ratio_at(t: float) -> float:
        g, s = prof.g_g1(t)
        return min(prof.g2(t), s / t if t > 0 else prof.g2(t)) * (1.0 + t) ** spec.mu

    trend = [(t, ratio_at(t)) for t in _dyadic_ts(rng)]
    return DiagnosticReport(
        condition="ellipticity",
        fitted_constants={"c5_hat": c5, "c6_hat": c6},
        verdict=verdict, witness=witness, trend=trend,
        curve=(ts, low_ratio))


def scan_growth(spec: DensitySpec, rng: ScanRange = ScanRange()) -> DiagnosticReport:
    """Fit the growth sandwich c7 t - c7_tilde <= g(t) <= c8 (t^p + 1).

    The offset c7_tilde is pinned to g(2), mirroring the case split at t = 2
    in the derivation of the lower bound from the Hessian bounds; c7_hat is
    then the largest admissible slope on the grid and c8_hat the smallest
    admissible upper constant. ``linear_slope_hat`` additionally fits
    g(t) <= c t on t >= 1, which stays finite for the spike blend.
    """
    ts = _sample_ts(spec, rng)
    g, _, _ = _profile_rows(spec, ts)
    prof = _profile(spec)
    c7_tilde = prof.g(2.0)
    pos = ts > 0.0
    c7 = float(np.min((g[pos] + c7_tilde) / ts[pos]))
    p_eff = _upper_exponent(spec)
    upper_ratio = g / (ts ** p_eff + 1.0)
    c8 = float(np.max(upper_ratio))
    big = ts >= 1.0
    slope = float(np.max(g[big] / ts[big])) if np.any(big) else math.nan
    ok = c7 > 0.0 and math.isfinite(c7) and math.isfinite(c8)
    verdict = VERDICT_HOLDS if ok else VERDICT_VIOLATED
    witness = None if ok else float(ts[int(np.argmin((g + c7_tilde) / np.maximum(ts, 1e-300)))])
    trend = [(t, prof.g(t) / t) for t in _dyadic_ts(rng) if t >= 1.0]
    return DiagnosticReport(
        condition="growth",
        fitted_constants={"c7_hat": c7, "c7_tilde": c7_tilde, "c8_hat": c8,
                          "linear_slope_hat": slope},
        verdict=verdict, witness=witness, trend=trend,
        curve=(ts, upper_ratio))


def scan_balance(spec: DensitySpec, rng: ScanRange = ScanRange()) -> DiagnosticReport:
    """Track r(t) = t^2 max(g''(t), g'(t)/t) / (g(t) + 1).

    A bounded r certifies that the Hessian is controlled by the energy
    itself. The verdict is ``unbounded-trend`` when r is strictly increasing
    over the last five dyadic doublings of the range.
    """
    ts = _sample_ts(spec, rng)
    g, g1, g2 = _profile_rows(spec, ts)
    _, lam_max = _eigen_rows(g1, g2, ts)
    ratio = ts * ts * lam_max / (g + 1.0)
    sup = float(np.max(ratio))
    prof = _profile(spec)

    def r_at(t: float) -> float:
        gv, s = prof.g_g1(t)
        lam = max(prof.g2(t), s / t) if t > 0 else prof.g2(t)
        return t * t * lam / (gv + 1.0)

    trend = [(t, r_at(t)) for t in _dyadic_ts(rng)]
    if _trend_increasing(trend):
        verdict = VERDICT_UNBOUNDED
        witness = float(ts[int(np.argmax(ratio))])
    else:
        verdict = VERDICT_HOLDS
        witness = None
    return DiagnosticReport(
        condition="balance",
        fitted_constants={"balance_sup": sup},
        verdict=verdict, witness=witness, trend=trend,
        curve=(ts, ratio))


def check_delta2(spec: DensitySpec, rng: ScanRange = ScanRange()) -> DiagnosticReport:
    """Doubling ratio g(2t) / g(t) over the grid restricted to t >= 1."""
    ts = _sample_ts(spec, rng)
    ts = ts[ts >= 1.0]
    if ts.size == 0:
        raise ValueError("check_delta2 needs samples with t >= 1")
    prof = _profile(spec)
    ratio = np.empty(ts.shape)
    for i, t in enumerate(ts):
        ratio[i] = prof.g(2.0 * float(t)) / max(prof.g(float(t)), 1e-12)
    sup = float(np.max(ratio))
    trend = [(t, prof.g(2.0 * t) / max(prof.g(t), 1e-12))
             for t in _dyadic_ts(rng) if t >= 1.0]
    if _trend_increasing(trend):
        verdict = VERDICT_UNBOUNDED
        witness = float(ts[int(np.argmax(ratio))])
    else:
        verdict = VERDICT_HOLDS
        witness = None
    return DiagnosticReport(
        condition="delta2",
        fitted_constants={"c52_hat": sup},
        verdict=verdict, witness=witness, trend=trend,
        curve=(ts, ratio))


def tv_limit_error(mu: float, rng: ScanRange = ScanRange()) -> float:
    """sup over the grid of |(mu - 1) g_mu(t) - t| for the phimu profile.

    Measures how closely the rescaled profile approximates the plain modulus;
    the closed form bounds this by 1 / (mu - 2), hence mu > 2 is required.
    """
    mu = float(mu)
    if not mu > 2.0:
        raise ValueError(f"tv_limit_error requires mu > 2, got {mu}")
    spec = DensitySpec(PHI_MU, mu=mu)
    prof = _profile(spec)
    ts = rng.grid()
    errs = [abs((mu - 1.0) * prof.g(float(t)) - float(t)) for t in ts]
    return float(max(errs))
