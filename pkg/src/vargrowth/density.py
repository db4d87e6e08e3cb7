"""Radial convex energy densities with tunable lower and upper growth rates.

Four families share one interface. Each is built from a radial profile g
with g(0) = g'(0) = 0 and curvature g'' = omega >= 0, so the induced planar
density G(xi) = g(|xi|) is convex and C^2:

* ``phimu``      - closed-form profile with curvature (1+t)^(-mu); linear
                   growth, increasingly degenerate as mu grows.
* ``blend``      - curvature eta(t)(eps+t)^(-mu) + (1-eta(t))(eps+t)^(p-2)
                   for a ramp weight eta in [0, 1]; interpolates between the
                   decaying branch and a p-power branch.
* ``varexp``     - curvature (eps+t)^(rho(t)-2) for a decreasing exponent
                   map rho running from p at zero to 2-mu at infinity.
* ``spikeblend`` - the blend driven by a tent weight vanishing at integers
                   on shrinking intervals: keeps linear energy growth while
                   the pointwise curvature at the tips stays p-power.

Profiles for the non-closed-form families are integrated cumulatively with
adaptive Simpson panels split at the weight's kink points; evaluation over
arrays goes through a dense cubic-Hermite table so image-sized fields stay
cheap.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from functools import lru_cache
from threading import RLock
from typing import Callable, Sequence, Union

import numpy as np

from ._quadrature import adaptive_simpson, gauss_legendre

__all__ = [
    "PHI_MU", "BLEND", "VAR_EXP", "SPIKE_BLEND", "FAMILIES",
    "SmoothRamp", "ThetaWeight", "SpikeWeight", "RationalExponent",
    "DensitySpec", "ProfileEval",
    "phi_mu", "blend", "var_exp", "spike_blend",
    "profile_eval", "density_value", "density_gradient", "density_hessian",
    "regularized_eval", "taylor_oracle", "theta_to_eta", "spike_eta",
    "default_ramp", "default_spike_epsilons",
]

PHI_MU = "phimu"
BLEND = "blend"
VAR_EXP = "varexp"
SPIKE_BLEND = "spikeblend"
FAMILIES = (PHI_MU, BLEND, VAR_EXP, SPIKE_BLEND)

# sampled validation grid for user-supplied weight/exponent callables
_CHECK_TS = np.concatenate(([0.0], np.logspace(-3.0, 4.0, 64)))

# absolute tolerance per quadrature panel; panels are split at kinks so the
# integrand is smooth inside each one
_PANEL_TOL = 1e-13


def default_ramp(t: float) -> float:
    """Default blend weight: starts at the decaying branch, drifts to p-power."""
    return 1.0 / (1.0 + t)


def default_spike_epsilons(k: int) -> float:
    """Default tent half-widths 2^-k (summable, non-overlapping)."""
    return 2.0 ** -k


def _eps_at(epsilons, k: int) -> float:
    """Half-width of the tent at integer k >= 1, from a callable or sequence.

    A value of exactly 0.0 is read as "positive but below float resolution"
    (the default 2^-k underflows past k ~ 1075): the tent then degenerates to
    the single point t = k.
    """
    if callable(epsilons):
        value = float(epsilons(k))
    else:
        if k - 1 >= len(epsilons):
            raise ValueError(f"spike sequence has no entry for node k={k}")
        value = float(epsilons[k - 1])
    if not (0.0 <= value <= 0.5):
        raise ValueError(f"spike half-width eps_{k}={value} outside (0, 0.5]")
    return value


def spike_eta(epsilons, t: float) -> float:
    """Tent weight: 0 at each integer k >= 1, 1 on the plateaus between tents.

    Linear on [k - eps_k, k + eps_k]; identically 1 on [0, 1 - eps_1].
    ``epsilons`` is a positive summable sequence (or a callable k -> eps_k),
    entries are capped at 1/2 so neighbouring tents cannot overlap.
    """
    t = float(t)
    if math.isnan(t) or t < 0.0:
        raise ValueError(f"t must be finite and >= 0, got {t}")
    k = int(math.floor(t + 0.5))
    if k < 1:
        return 1.0
    eps_k = _eps_at(epsilons, k)
    d = abs(t - k)
    if eps_k == 0.0:
        return 0.0 if d == 0.0 else 1.0
    if d >= eps_k:
        return 1.0
    return d / eps_k


@dataclass(frozen=True)
class SmoothRamp:
    """Continuous weight eta: [0, inf) -> [0, 1] steering the blend."""

    eta: Callable[[float], float] = default_ramp

    def __post_init__(self):
        for t in _CHECK_TS:
            v = float(self.eta(float(t)))
            if not (-1e-12 <= v <= 1.0 + 1e-12):
                raise ValueError(f"ramp weight out of [0, 1] at t={t}: {v}")

    def __call__(self, t: float) -> float:
        return min(1.0, max(0.0, float(self.eta(t))))


@dataclass(frozen=True)
class ThetaWeight:
    """Curvature multiplier Theta with 1 <= Theta(t) <= (1+t)^(mu+p-2).

    Equivalent to a ramp weight; converted via :func:`theta_to_eta` when
    attached to a blend spec.
    """

    theta: Callable[[float], float]

    def __call__(self, t: float) -> float:
        return float(self.theta(t))


@dataclass(frozen=True)
class SpikeWeight:
    """Tent weight built from a summable sequence of half-widths."""

    epsilons: Union[Callable[[int], float], tuple] = default_spike_epsilons

    def __post_init__(self):
        eps = self.epsilons
        if not callable(eps):
            entries = tuple(float(e) for e in eps)
            if any(not (0.0 < e <= 0.5) for e in entries):
                raise ValueError("explicit spike sequence entries must lie in (0, 0.5]")
            object.__setattr__(self, "epsilons", entries)
        else:
            for k in range(1, 33):
                _eps_at(eps, k)  # range check on an initial stretch

    def __call__(self, t: float) -> float:
        return spike_eta(self.epsilons, t)


@dataclass(frozen=True)
class RationalExponent:
    """Default exponent map rho(r) = (2 - mu) + (p - 2 + mu) / (1 + r).

    Continuous, strictly decreasing, rho(0) = p, rho(inf) = 2 - mu.
    """

    mu: float
    p: float

    def __call__(self, r):
        return (2.0 - self.mu) + (self.p - 2.0 + self.mu) / (1.0 + r)


@dataclass(frozen=True)
class _EtaFromTheta:
    """Ramp weight equivalent to a given curvature multiplier Theta."""

    theta: Callable[[float], float]
    mu: float
    p: float

    def __call__(self, t: float) -> float:
        # removable 0/0 at t = 0 (the envelope pins Theta(0) = 1)
        t = max(float(t), 1e-7)
        lo = (1.0 + t) ** (-self.mu)
        hi = (1.0 + t) ** (self.p - 2.0)
        eta = (hi - float(self.theta(t)) * lo) / (hi - lo)
        return min(1.0, max(0.0, eta))


def theta_to_eta(theta, mu: float, p: float) -> SmoothRamp:
    """Convert a curvature multiplier Theta into the equivalent ramp weight.

    The returned weight induces the same curvature Theta(t)(1+t)^(-mu).
    Theta must stay inside the envelope [1, (1+t)^(mu+p-2)]; the first
    sampled violation is reported.
    """
    fn = theta.theta if isinstance(theta, ThetaWeight) else theta
    if mu <= 1.0 or p <= 1.0:
        raise ValueError("theta_to_eta requires mu > 1 and p > 1")
    for t in _CHECK_TS:
        t = float(t)
        v = float(fn(t))
        upper = (1.0 + t) ** (mu + p - 2.0)
        if not (1.0 - 1e-9 <= v <= upper * (1.0 + 1e-9)):
            raise ValueError(
                f"theta outside envelope [1, (1+t)^(mu+p-2)] at t={t}: "
                f"theta={v}, upper={upper}")
    return SmoothRamp(_EtaFromTheta(fn, float(mu), float(p)))


@dataclass(frozen=True)
class DensitySpec:
    """Which radial density family to use, plus its parameters.

    ``p`` is ignored by the phimu family (its upper growth is linear);
    ``eps`` shifts the power-law bases of blend/varexp/spikeblend;
    ``weight`` holds the blend weight, ``exponent`` the varexp map.
    """

    family: str
    mu: float
    p: float | None = None
    eps: float = 1.0
    weight: SmoothRamp | ThetaWeight | SpikeWeight | None = None
    exponent: Callable[[float], float] | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown density family {self.family!r}")
        if not (math.isfinite(self.mu) and self.mu > 1.0):
            raise ValueError(f"mu must be finite and > 1, got {self.mu}")
        if not (math.isfinite(self.eps) and self.eps > 0.0):
            raise ValueError(f"eps must be finite and > 0, got {self.eps}")
        if self.family == PHI_MU:
            if self.p is not None and not (math.isfinite(self.p) and self.p > 1.0):
                raise ValueError(f"p must be > 1 when given, got {self.p}")
        else:
            if self.p is None or not (math.isfinite(self.p) and self.p > 1.0):
                raise ValueError(f"{self.family} requires p > 1, got {self.p}")

        if self.family in (PHI_MU, VAR_EXP):
            if self.weight is not None:
                raise ValueError(f"{self.family} takes no weight")
        elif self.family == BLEND:
            w = self.weight
            if w is None:
                w = SmoothRamp(default_ramp)
            elif isinstance(w, ThetaWeight):
                w = theta_to_eta(w, self.mu, self.p)
            elif isinstance(w, SpikeWeight):
                raise ValueError("use the spikeblend family for spike weights")
            elif not isinstance(w, SmoothRamp):
                raise ValueError(f"blend weight must be SmoothRamp/ThetaWeight, got {w!r}")
            object.__setattr__(self, "weight", w)
        else:  # SPIKE_BLEND
            w = self.weight if self.weight is not None else SpikeWeight()
            if not isinstance(w, SpikeWeight):
                raise ValueError("spikeblend requires a SpikeWeight")
            object.__setattr__(self, "weight", w)

        if self.family == VAR_EXP:
            fn = self.exponent
            if fn is None:
                fn = RationalExponent(self.mu, self.p)
                object.__setattr__(self, "exponent", fn)
            self._check_exponent(fn)
        elif self.exponent is not None:
            raise ValueError(f"{self.family} takes no exponent map")

    def _check_exponent(self, fn):
        lo = 2.0 - self.mu
        r0 = float(fn(0.0))
        if abs(r0 - self.p) > 1e-12:
            raise ValueError(f"exponent map must satisfy rho(0) = p, got rho(0)={r0}")
        prev = math.inf
        for r in _CHECK_TS:
            v = float(fn(float(r)))
            if v > prev + 1e-12:
                raise ValueError(f"exponent map must be non-increasing, rises at r={r}")
            if v <= lo:
                raise ValueError(f"exponent map must stay above 2-mu={lo} at finite r={r}")
            prev = v


def phi_mu(mu: float) -> DensitySpec:
    return DensitySpec(PHI_MU, mu=float(mu))


def blend(mu: float, p: float, weight=None, eps: float = 1.0) -> DensitySpec:
    if weight is not None and not isinstance(weight, (SmoothRamp, ThetaWeight)):
        weight = SmoothRamp(weight)
    return DensitySpec(BLEND, mu=float(mu), p=float(p), eps=float(eps), weight=weight)


def var_exp(mu: float, p: float, eps: float = 1.0, exponent=None) -> DensitySpec:
    return DensitySpec(VAR_EXP, mu=float(mu), p=float(p), eps=float(eps),
                       exponent=exponent)


def spike_blend(mu: float, p: float, epsilons=None, eps: float = 1.0) -> DensitySpec:
    weight = SpikeWeight() if epsilons is None else SpikeWeight(epsilons)
    return DensitySpec(SPIKE_BLEND, mu=float(mu), p=float(p), eps=float(eps),
                       weight=weight)


@dataclass(frozen=True)
class ProfileEval:
    """Radial profile value and first two derivatives at one argument."""

    t: float
    g: float
    g1: float
    g2: float

    def __post_init__(self):
        if self.g < -1e-12 or self.g1 < -1e-12 or self.g2 < -1e-12:
            raise ValueError(f"profile must be non-negative and non-decreasing: {self}")


# ---------------------------------------------------------------------------
# profiles


def _phi_value(mu: float, t):
    """Closed-form profile of the phimu family (array-friendly)."""
    u = np.log1p(t)
    if mu == 2.0:
        return t - u
    a = mu - 2.0
    if abs(a) < 1e-4:
        # series in (mu - 2); the closed form cancels catastrophically here
        u2 = u * u
        return (t - u + a * u2 / 2.0 - a * a * u2 * u / 6.0
                + a ** 3 * u2 * u2 / 24.0) / (mu - 1.0)
    return (t + np.expm1(-a * u) / a) / (mu - 1.0)


def _phi_slope(mu: float, t):
    return -np.expm1((1.0 - mu) * np.log1p(t)) / (mu - 1.0)


def _phi_curvature(mu: float, t):
    return np.exp(-mu * np.log1p(t))


class _PhiMuProfile:
    """Closed-form radial profile with curvature (1+t)^(-mu)."""

    def __init__(self, mu: float):
        self.mu = mu

    def kinks(self, a: float, b: float) -> list[float]:
        return []

    def g(self, t: float) -> float:
        return float(_phi_value(self.mu, t))

    def g1(self, t: float) -> float:
        return float(_phi_slope(self.mu, t))

    def g2(self, t: float) -> float:
        return float(_phi_curvature(self.mu, t))

    def g_g1(self, t: float) -> tuple[float, float]:
        return self.g(t), self.g1(t)

    def g_many(self, ts: np.ndarray) -> np.ndarray:
        return _phi_value(self.mu, ts)

    def g1_many(self, ts: np.ndarray) -> np.ndarray:
        return _phi_slope(self.mu, ts)


def _hermite_coeffs(y0, y1, d0, d1, h):
    """Horner coefficients of the cubic matching values/derivatives per panel."""
    b = h * d0
    c = -3.0 * y0 + 3.0 * y1 - 2.0 * h * d0 - h * d1
    d = 2.0 * y0 - 2.0 * y1 + h * d0 + h * d1
    return y0, b, c, d


class _HermiteTable:
    """Dense piecewise-cubic interpolant of (g, g') between exact nodes.

    Uniform node grids (no kinks inserted) locate panels by direct index
    arithmetic; otherwise a binary search is used.
    """

    def __init__(self, ts, g, g1, w):
        ts = np.asarray(ts)
        self.ts = ts
        self.t_hi = float(ts[-1])
        h = np.diff(ts)
        spacing = h[0]
        self.uniform_h = float(spacing) if np.allclose(h, spacing, rtol=1e-12, atol=0.0) else None
        self.n_panels = len(ts) - 1
        self.val_coeffs = _hermite_coeffs(g[:-1], g[1:], g1[:-1], g1[1:], h)
        self.slope_coeffs = _hermite_coeffs(g1[:-1], g1[1:], w[:-1], w[1:], h)

    def _locate(self, t):
        if self.uniform_h is not None:
            pos = t * (1.0 / self.uniform_h)
            idx = np.minimum(pos.astype(np.int64), self.n_panels - 1)
            return idx, pos - idx
        idx = np.searchsorted(self.ts, t, side="right") - 1
        idx = np.clip(idx, 0, self.n_panels - 1)
        t0 = self.ts[idx]
        return idx, (t - t0) / (self.ts[idx + 1] - t0)

    @staticmethod
    def _eval(coeffs, idx, s):
        a, b, c, d = coeffs
        return ((d[idx] * s + c[idx]) * s + b[idx]) * s + a[idx]

    def value(self, t):
        idx, s = self._locate(t)
        return self._eval(self.val_coeffs, idx, s)

    def slope(self, t):
        idx, s = self._locate(t)
        return self._eval(self.slope_coeffs, idx, s)


class _QuadratureProfile:
    """Cumulative profile for curvature given as a pointwise function.

    Scalar queries integrate from lazily grown anchor nodes (adaptive Simpson
    per panel, panels split at weight kinks). Array queries go through a
    cubic-Hermite table with ~1/256 node spacing, rebuilt geometrically when
    a query exceeds its range. Anchor and table state only ever grows and is
    guarded by a lock, so specs can be shared between threads.
    """

    _STEP = 1.0 / 16.0
    _TABLE_SPACING = 1.0 / 256.0

    def __init__(self, omega: Callable[[float], float],
                 kinks: Callable[[float, float], list[float]]):
        self._omega = omega
        self._kinks = kinks
        self._ts = [0.0]
        self._g = [0.0]
        self._g1 = [0.0]
        self._lock = RLock()
        self._table: _HermiteTable | None = None

    def kinks(self, a: float, b: float) -> list[float]:
        return self._kinks(a, b)

    def g2(self, t: float) -> float:
        return float(self._omega(float(t)))

    # -- scalar path --------------------------------------------------------

    def _panel(self, a: float, b: float, g1a: float) -> tuple[float, float]:
        """Increments (dg, dg1) over a kink-free panel [a, b].

        dg1 integrates the curvature; dg uses the exact identity
        g(b) - g(a) = g'(a) (b - a) + int_a^b (b - r) omega(r) dr,
        which avoids nesting a second Simpson pass over g'.
        """
        tol = _PANEL_TOL * max(1.0, b - a)
        dg1 = adaptive_simpson(self._omega, a, b, tol)
        omega = self._omega
        dg = g1a * (b - a) + adaptive_simpson(lambda r: (b - r) * omega(r), a, b, tol)
        return dg, dg1

    def _next_anchor(self, t0: float) -> float:
        cand = t0 + max(self._STEP, t0 * self._STEP)
        for node in self._kinks(t0, cand):
            if node > t0 + 1e-15:
                return node
        return cand

    def _extend_to(self, t: float) -> None:
        while True:
            last = self._ts[-1]
            nxt = self._next_anchor(last)
            if nxt > t:
                return
            dg, dg1 = self._panel(last, nxt, self._g1[-1])
            self._ts.append(nxt)
            self._g.append(self._g[-1] + dg)
            self._g1.append(self._g1[-1] + dg1)

    def g_g1(self, t: float) -> tuple[float, float]:
        t = float(t)
        if t == 0.0:
            return 0.0, 0.0
        with self._lock:
            self._extend_to(t)
            i = bisect_right(self._ts, t) - 1
            a, g, g1 = self._ts[i], self._g[i], self._g1[i]
            if t > a:
                dg, dg1 = self._panel(a, t, g1)
                g += dg
                g1 += dg1
            return g, g1

    def g(self, t: float) -> float:
        return self.g_g1(t)[0]

    def g1(self, t: float) -> float:
        return self.g_g1(t)[1]

    # -- array path ---------------------------------------------------------

    def _build_table(self, t_hi: float) -> _HermiteTable:
        n = int(math.ceil(t_hi / self._TABLE_SPACING))
        nodes = np.linspace(0.0, t_hi, n + 1)
        extra = self._kinks(0.0, t_hi)
        if extra:
            nodes = np.unique(np.concatenate([nodes, np.asarray(extra, dtype=float)]))
        g = np.empty_like(nodes)
        g1 = np.empty_like(nodes)
        w = np.empty_like(nodes)
        g[0] = g1[0] = 0.0
        w[0] = self._omega(0.0)
        for i in range(1, len(nodes)):
            dg, dg1 = self._panel(float(nodes[i - 1]), float(nodes[i]), float(g1[i - 1]))
            g[i] = g[i - 1] + dg
            g1[i] = g1[i - 1] + dg1
            w[i] = self._omega(float(nodes[i]))
        return _HermiteTable(nodes, g, g1, w)

    def _table_for(self, t_max: float) -> _HermiteTable:
        with self._lock:
            table = self._table
            if table is None or table.t_hi < t_max:
                t_hi = 2.0
                while t_hi < t_max:
                    t_hi *= 2.0
                table = self._build_table(t_hi)
                self._table = table
            return table

    def g_many(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        if ts.size == 0:
            return np.zeros_like(ts)
        return self._table_for(float(np.max(ts))).value(ts)

    def g1_many(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        if ts.size == 0:
            return np.zeros_like(ts)
        return self._table_for(float(np.max(ts))).slope(ts)


def _spike_nodes(epsilons, a: float, b: float) -> list[float]:
    """Tent kink points (k - eps_k, k, k + eps_k) inside (a, b]."""
    if b <= a:
        return []
    out = []
    k_lo = max(1, int(math.floor(a)))
    k_hi = int(math.floor(b + 1.5))
    for k in range(k_lo, k_hi + 1):
        e = _eps_at(epsilons, k)
        if e == 0.0:
            continue  # point tent: no mass, no kink panels
        for x in (k - e, float(k), k + e):
            if a < x <= b:
                out.append(x)
    return sorted(set(out))


def _make_profile(spec: DensitySpec):
    if spec.family == PHI_MU:
        return _PhiMuProfile(spec.mu)
    eps, mu, p = spec.eps, spec.mu, spec.p
    if spec.family == VAR_EXP:
        rho = spec.exponent

        def omega(t: float) -> float:
            return (eps + t) ** (rho(t) - 2.0)

        return _QuadratureProfile(omega, lambda a, b: [])
    weight = spec.weight

    def omega(t: float) -> float:
        e = weight(t)
        base = eps + t
        return e * base ** (-mu) + (1.0 - e) * base ** (p - 2.0)

    if isinstance(weight, SpikeWeight):
        eps_seq = weight.epsilons
        return _QuadratureProfile(omega, lambda a, b: _spike_nodes(eps_seq, a, b))
    return _QuadratureProfile(omega, lambda a, b: [])


@lru_cache(maxsize=None)
def _profile(spec: DensitySpec):
    return _make_profile(spec)


# ---------------------------------------------------------------------------
# public operations


def _check_t(t) -> float:
    t = float(t)
    if math.isnan(t) or math.isinf(t) or t < 0.0:
        raise ValueError(f"t must be finite and >= 0, got {t}")
    return t


def _check_xi(xi) -> np.ndarray:
    arr = np.asarray(xi, dtype=float).reshape(-1)
    if arr.shape != (2,):
        raise ValueError(f"xi must be a 2-vector, got shape {np.shape(xi)}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"xi must be finite, got {arr}")
    return arr


def profile_eval(spec: DensitySpec, t) -> ProfileEval:
    """Value and first two derivatives of the radial profile at t >= 0."""
    t = _check_t(t)
    prof = _profile(spec)
    g, g1 = prof.g_g1(t)
    return ProfileEval(t=t, g=g, g1=g1, g2=prof.g2(t))


def density_value(spec: DensitySpec, xi) -> float:
    """G(xi) = g(|xi|)."""
    v = _check_xi(xi)
    return _profile(spec).g(float(np.hypot(v[0], v[1])))


def density_gradient(spec: DensitySpec, xi) -> np.ndarray:
    """DG(xi) = g'(|xi|) xi / |xi|, zero at the origin."""
    v = _check_xi(xi)
    t = float(np.hypot(v[0], v[1]))
    if t == 0.0:
        return np.zeros(2)
    return _profile(spec).g1(t) * (v / t)


def density_hessian(spec: DensitySpec, xi) -> np.ndarray:
    """Hessian of G at xi: radial eigenvalue g''(t), tangential g'(t)/t.

    At (and numerically near) the origin the continuous limit g''(0) * I
    is used.
    """
    v = _check_xi(xi)
    prof = _profile(spec)
    t = float(np.hypot(v[0], v[1]))
    if t < 1e-12:
        return prof.g2(0.0) * np.eye(2)
    g, g1 = prof.g_g1(t)
    radial = prof.g2(t)
    tangential = g1 / t
    n = v / t
    return tangential * np.eye(2) + (radial - tangential) * np.outer(n, n)


def regularized_eval(spec: DensitySpec, delta: float, xi):
    """Value, gradient and Hessian of (delta/2)|xi|^2 + G(xi)."""
    delta = float(delta)
    if math.isnan(delta) or delta < 0.0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    v = _check_xi(xi)
    value = 0.5 * delta * float(v @ v) + density_value(spec, v)
    gradient = delta * v + density_gradient(spec, v)
    hessian = delta * np.eye(2) + density_hessian(spec, v)
    return value, gradient, hessian


def taylor_oracle(spec: DensitySpec, xi, quad_points: int = 48) -> float:
    """Recover G(xi) from its Hessian alone via the line-integral identity

        G(xi) = int_0^1 (1 - t) D^2 G(t xi)(xi, xi) dt.

    Gauss-Legendre quadrature with ``quad_points`` nodes per smooth piece
    (pieces split where the curvature has kinks along the ray). Serves as an
    independent check of :func:`density_value`, which integrates cumulatively
    instead.
    """
    quad_points = int(quad_points)
    if quad_points < 16:
        raise ValueError(f"quad_points must be >= 16, got {quad_points}")
    v = _check_xi(xi)
    r = float(np.hypot(v[0], v[1]))
    if r == 0.0:
        return 0.0
    prof = _profile(spec)
    cuts = [c / r for c in prof.kinks(0.0, r)]
    edges = [0.0] + [c for c in cuts if 0.0 < c < 1.0] + [1.0]
    x, w = gauss_legendre(quad_points)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        for xi_node, wi in zip(x, w):
            s = mid + half * xi_node
            h = density_hessian(spec, s * v)
            total += wi * half * (1.0 - s) * float(v @ h @ v)
    return total
