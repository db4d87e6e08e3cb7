"""Minimization of the discrete energies and the delta-continuation driver.

A fixed-delta solve runs nonlinear conjugate gradient (Polak-Ribiere with
non-negative beta, periodic restarts) with Armijo backtracking until the
sup-norm of the exact energy gradient drops below the tolerance. The Armijo
decrease is evaluated as a sum of per-pixel energy differences accumulated in
extended precision, which keeps the test meaningful deep into convergence
where the two raw energy totals agree to machine precision.

The continuation driver solves a geometric delta schedule, warm-starting each
stage from the previous solution, and records per-stage energy and iterate
movement. A brute-force lattice search over tiny grids provides an
implementation-independent cross-check.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .density import PHI_MU, VAR_EXP, DensitySpec, _profile
from .grid import (GridImage, InpaintMask, Quadratic, Rho, EnergyReport, energy,
                   _energy_gradient_array, _energy_total_batch, _grad,
                   _local_energy)

__all__ = [
    "SolverConfig", "Solution", "DeltaStage", "SolveFailure",
    "minimize_fixed_delta", "continuation_solve", "brute_force_oracle",
    "exponent_regime_warnings",
]

STATUS_CONVERGED = "converged"
STATUS_MAX_ITERS = "max-iters"
STATUS_STALLED = "stalled"


@dataclass(frozen=True)
class SolverConfig:
    grad_tol: float = 1e-8
    max_iters: int = 10000
    delta0: float = 1e-2
    delta_steps: int = 8
    delta_factor: float = 0.5
    armijo_slope: float = 1e-4
    backtrack: float = 0.5
    allow_zero_delta: bool = False

    def __post_init__(self):
        if not self.grad_tol > 0.0:
            raise ValueError(f"grad_tol must be > 0, got {self.grad_tol}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.delta0 > 0.0:
            raise ValueError(f"delta0 must be > 0, got {self.delta0}")
        if self.delta_steps < 1:
            raise ValueError(f"delta_steps must be >= 1, got {self.delta_steps}")
        if not 0.0 < self.delta_factor < 1.0:
            raise ValueError(f"delta_factor must be in (0, 1), got {self.delta_factor}")
        if not 0.0 < self.armijo_slope < 1.0 or not 0.0 < self.backtrack < 1.0:
            raise ValueError("line-search parameters must lie in (0, 1)")


@dataclass(frozen=True)
class DeltaStage:
    """One continuation stage: delta, optimal energy, sup-move of the iterate."""

    delta: float
    energy: float
    change: float


@dataclass(frozen=True)
class Solution:
    u: GridImage
    report: EnergyReport
    iterations: int
    grad_norm: float
    delta_history: tuple[DeltaStage, ...]
    status: str = STATUS_CONVERGED

    @property
    def converged(self) -> bool:
        return self.status == STATUS_CONVERGED


class SolveFailure(RuntimeError):
    """A continuation stage did not converge; carries the partial solution."""

    def __init__(self, message: str, stage: int, solution: Solution):
        super().__init__(message)
        self.stage = stage
        self.solution = solution


def exponent_regime_warnings(spec: DensitySpec, fid) -> list[str]:
    """Exponent windows under which the continuum problem is known well-posed.

    Violations do not affect discrete solvability, so they are reported as
    warnings, never errors.
    """
    p_eff = 1.0 if spec.family == PHI_MU else float(spec.p)
    out = []
    if isinstance(fid, Quadratic):
        if not (spec.mu < 2.0 and p_eff < 2.0):
            out.append(
                f"quadratic-fidelity regime expects mu < 2 and p < 2 "
                f"(got mu={spec.mu}, p={p_eff}); discrete solve proceeds anyway")
    else:
        if not (1.0 < spec.mu < 1.5):
            out.append(
                f"rho-fidelity regime expects 1 < mu < 3/2 (got mu={spec.mu}); "
                f"discrete solve proceeds anyway")
        if not (p_eff < spec.mu):
            # p < 2 suffices when the density is balanced; varexp is balanced
            # by construction, phimu is balanced with p read as 1
            balanced = spec.family in (VAR_EXP, PHI_MU)
            if not (balanced and p_eff < 2.0):
                out.append(
                    f"rho-fidelity regime expects p < mu, or p < 2 for a "
                    f"balanced density (got mu={spec.mu}, p={p_eff}); "
                    f"discrete solve proceeds anyway")
    return out


def _as_values(img) -> np.ndarray:
    return img.values if isinstance(img, GridImage) else np.asarray(img, dtype=float)


def _exact_decrement(u, direction, step, grad_field, dir_field, norms,
                     f_vals, unmasked, fid, delta, prof):
    """Energy change of the step, evaluated without large-term cancellation.

    Every per-pixel contribution is expressed directly in the increment:
    the regularizer via Simpson on g' between old and new gradient norms
    (exact to O(dnorm^5), far beyond float resolution for endgame steps),
    the quadratic and fidelity terms via exact algebraic differences. This
    stays meaningful when the raw energy totals of the two iterates agree
    to machine precision.
    """
    g2_field = grad_field + step * dir_field
    norms2 = np.sqrt(np.sum(np.square(g2_field), axis=-1))
    mid = 0.5 * (norms + norms2)
    d_reg = (norms2 - norms) / 6.0 * (
        prof.g1_many(norms) + 4.0 * prof.g1_many(mid) + prof.g1_many(norms2))
    d_quad = 0.5 * delta * step * np.sum(
        dir_field * (2.0 * grad_field + step * dir_field), axis=-1)
    r = (u - f_vals) * unmasked
    h = step * direction * unmasked
    if isinstance(fid, Quadratic):
        d_fid = 0.5 * fid.lam * h * (2.0 * r + h)
    else:
        d_fid = h * (2.0 * r + h) / (np.sqrt(1.0 + np.square(r + h))
                                     + np.sqrt(1.0 + np.square(r)))
    return float(np.sum(d_reg + d_quad + d_fid, dtype=np.longdouble))


def _ncg(f_vals, mask_flags, spec, fid, delta, config, init_vals):
    """Core NCG loop on raw arrays. Returns (u, iterations, grad_sup, status)."""
    u = np.array(init_vals, dtype=float)
    if not np.all(np.isfinite(u)):
        raise ValueError("initial iterate must be finite")
    n_px = u.size
    c1 = config.armijo_slope
    shrink = config.backtrack
    unmasked = (~mask_flags).astype(float)
    prof = _profile(spec)

    local = _local_energy(u, f_vals, mask_flags, spec, fid, delta)
    # raw per-pixel differences resolve the energy down to about this level
    noise_floor = 64.0 * np.finfo(float).eps * float(np.sum(np.abs(local)))
    grad = _energy_gradient_array(u, f_vals, mask_flags, spec, fid, delta)
    direction = -grad
    gg = float(np.sum(grad * grad))
    alpha = 1.0
    iters = 0

    while True:
        grad_sup = float(np.max(np.abs(grad)))
        if grad_sup <= config.grad_tol:
            return u, iters, grad_sup, STATUS_CONVERGED
        if iters >= config.max_iters:
            return u, iters, grad_sup, STATUS_MAX_ITERS

        slope = float(np.sum(grad * direction))
        if slope >= 0.0 or iters % n_px == 0:
            direction = -grad
            slope = -gg

        grad_field = _grad(u)
        norms = np.sqrt(np.sum(np.square(grad_field), axis=-1))
        accepted = False
        for attempt in (0, 1):
            dir_field = _grad(direction)
            step = min(2.0 * alpha, 1e6)
            while step >= 1e-20:
                u_try = u + step * direction
                local_try = _local_energy(u_try, f_vals, mask_flags, spec, fid, delta)
                drop = float(np.sum(local_try - local, dtype=np.longdouble))
                target = c1 * step * slope
                if drop <= target:
                    accepted = True
                    break
                if abs(target) < noise_floor:
                    # the raw difference is below float resolution of the
                    # energy; decide on the cancellation-free estimate
                    drop = _exact_decrement(u, direction, step, grad_field,
                                            dir_field, norms, f_vals, unmasked,
                                            fid, delta, prof)
                    if drop <= target:
                        accepted = True
                        break
                step *= shrink
            if accepted or attempt == 1:
                break
            # retry once along steepest descent before giving up
            direction = -grad
            slope = -gg
        if not accepted:
            return u, iters, grad_sup, STATUS_STALLED
        if drop > 0.0:  # Armijo guarantees strict decrease; guard regressions
            raise RuntimeError("energy increased within a descent step")

        u = u_try
        local = local_try
        alpha = step
        new_grad = _energy_gradient_array(u, f_vals, mask_flags, spec, fid, delta)
        diff = new_grad - grad
        beta = max(0.0, float(np.sum(new_grad * diff)) / gg)
        direction = beta * direction - new_grad
        grad = new_grad
        gg = float(np.sum(grad * grad))
        iters += 1


def minimize_fixed_delta(f: GridImage, mask: InpaintMask, spec: DensitySpec,
                         fid, delta: float, config: SolverConfig | None = None,
                         init: GridImage | None = None) -> Solution:
    """Minimize the delta-regularized energy at one fixed delta.

    ``delta`` must be positive (strict convexity, hence a unique target);
    delta == 0 is allowed only with ``config.allow_zero_delta``. A run that
    exhausts ``max_iters`` or whose line search cannot find any decrease
    returns a Solution flagged ``max-iters`` / ``stalled`` instead of raising.
    """
    config = config or SolverConfig()
    delta = float(delta)
    if delta < 0.0 or (delta == 0.0 and not config.allow_zero_delta):
        raise ValueError("delta must be > 0 (set allow_zero_delta to opt in to 0)")
    for msg in exponent_regime_warnings(spec, fid):
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    init_vals = _as_values(init) if init is not None else np.array(f.values)
    u, iters, grad_sup, status = _ncg(f.values, mask.flags, spec, fid, delta,
                                      config, init_vals)
    img = GridImage(u)
    report = energy(img, f, mask, spec, fid, delta)
    change = float(np.max(np.abs(u - init_vals)))
    return Solution(u=img, report=report, iterations=iters, grad_norm=grad_sup,
                    delta_history=(DeltaStage(delta, report.total, change),),
                    status=status)


def _continuation_init(f: GridImage, mask: InpaintMask) -> np.ndarray:
    init = np.array(f.values)
    if mask.flags.any():
        init[mask.flags] = float(np.mean(f.values[~mask.flags]))
    return init


def continuation_solve(f: GridImage, mask: InpaintMask, spec: DensitySpec,
                       fid, config: SolverConfig | None = None) -> Solution:
    """Solve the geometric delta schedule with warm starts.

    Stage k uses delta0 * delta_factor^k; the first stage starts from the
    data with masked pixels filled by the unmasked mean, later stages from
    the previous stage's solution. Optimal energies are checked to be
    non-increasing along the schedule (they must be, since smaller delta
    only lowers the functional).
    """
    config = config or SolverConfig()
    prev = _continuation_init(f, mask)
    history: list[DeltaStage] = []
    total_iters = 0
    sol = None
    for k in range(config.delta_steps):
        delta_k = config.delta0 * config.delta_factor ** k
        sol = minimize_fixed_delta(f, mask, spec, fid, delta_k, config,
                                   init=GridImage(prev))
        total_iters += sol.iterations
        if not sol.converged:
            raise SolveFailure(
                f"continuation stage {k} (delta={delta_k:g}) ended {sol.status}",
                stage=k, solution=sol)
        change = float(np.max(np.abs(sol.u.values - prev)))
        history.append(DeltaStage(delta_k, sol.report.total, change))
        if len(history) >= 2:
            tol = 1e-12 * max(1.0, abs(history[-2].energy))
            if history[-1].energy > history[-2].energy + tol:
                raise RuntimeError(
                    f"optimal energy increased between stages {k - 1} and {k}")
        prev = np.array(sol.u.values)
    return Solution(u=sol.u, report=sol.report, iterations=total_iters,
                    grad_norm=sol.grad_norm, delta_history=tuple(history),
                    status=STATUS_CONVERGED)


def delta_history_csv(solution: Solution) -> str:
    """CSV export (delta, energy, sup_change per row) of the schedule."""
    lines = ["delta,energy,sup_change"]
    lines += [f"{s.delta!r},{s.energy!r},{s.change!r}" for s in solution.delta_history]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# brute-force oracle


def _term_tables(axes, f_vals, mask_flags, spec, fid, delta):
    """Decompose the lattice energy into broadcastable per-term tables.

    Each pixel's regularizer cell couples at most three pixels (itself and
    its forward neighbours) and each fidelity term one, so the energy over
    the product lattice is a sum of small tables instead of 10^8 full
    evaluations.
    """
    h, w = f_vals.shape
    n = h * w
    sizes = [len(ax) for ax in axes]
    prof = _profile(spec)
    tables = []

    def expand(table, ids):
        shape = [1] * n
        for k, axis_id in enumerate(ids):
            shape[axis_id] = sizes[axis_id]
        return table.reshape(shape)

    for r in range(h):
        for c in range(w):
            i0 = r * w + c
            ids = [i0]
            if c + 1 < w:
                ids.append(i0 + 1)
            if r + 1 < h:
                ids.append(i0 + w)
            if len(ids) > 1:
                grids = np.meshgrid(*[axes[i] for i in ids], indexing="ij")
                v0 = grids[0]
                dx = grids[1] - v0 if c + 1 < w else 0.0
                dy = grids[-1] - v0 if r + 1 < h else 0.0
                norm = np.sqrt(np.square(dx) + np.square(dy))
                tab = prof.g_many(norm) + 0.5 * delta * np.square(norm)
                tables.append(expand(tab, ids))
            if not mask_flags[r, c]:
                v = axes[i0]
                if isinstance(fid, Quadratic):
                    tab = 0.5 * fid.lam * np.square(v - f_vals[r, c])
                else:
                    tab = Rho.rho(v - f_vals[r, c])
                tables.append(expand(tab, (i0,)))
    return tables


def _lattice_argmin(axes, f_vals, mask_flags, spec, fid, delta, shape):
    """Best point of the product lattice `axes` (one 1-D array per pixel)."""
    n = len(axes)
    sizes = tuple(len(ax) for ax in axes)
    tables = _term_tables(axes, f_vals, mask_flags, spec, fid, delta)
    best_val = math.inf
    best_idx = None
    tail = sizes[1:]
    for i0 in range(sizes[0]):
        acc = np.zeros(tail) if n > 1 else np.zeros(())
        for tab in tables:
            acc = acc + (tab[i0] if tab.shape[0] > 1 else tab[0])
        j = int(np.argmin(acc))
        v = float(acc.flat[j])
        if v < best_val:
            best_val = v
            best_idx = (i0,) + (np.unravel_index(j, tail) if n > 1 else ())
    vals = np.array([ax[k] for ax, k in zip(axes, best_idx)])
    return vals, best_val


def brute_force_oracle(f: GridImage, mask: InpaintMask, spec: DensitySpec,
                       fid, delta: float, resolution: int = 100) -> GridImage:
    """Exhaustive lattice minimizer for grids with at most 4 pixels.

    Pass 1 scans the full per-pixel lattice {0, 1/resolution, ..., 1}; two
    local refinement rounds then shrink the spacing by 10x each, re-centering
    the window whenever the best point lands on its edge, so a minimizer near
    a window boundary cannot be missed. Final spacing is 1/(100*resolution).
    """
    n = f.values.size
    if n > 4:
        raise ValueError(f"brute force oracle is limited to 4 pixels, got {n}")
    if resolution < 100:
        raise ValueError(f"resolution must be >= 100, got {resolution}")
    if not delta >= 0.0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    shape = f.values.shape
    lattice = np.linspace(0.0, 1.0, resolution + 1)
    best, _ = _lattice_argmin([lattice] * n, f.values, mask.flags, spec, fid,
                              delta, shape)
    spacing = 1.0 / resolution
    for _ in range(2):
        fine = spacing / 10.0
        for _ in range(64):
            axes = [np.unique(np.clip(b + fine * np.arange(-10, 11), 0.0, 1.0))
                    for b in best]
            new_best, _ = _lattice_argmin(axes, f.values, mask.flags, spec, fid,
                                          delta, shape)
            on_edge = any(
                (nb <= ax[0] + 1e-15 and ax[0] > 0.0)
                or (nb >= ax[-1] - 1e-15 and ax[-1] < 1.0)
                for nb, ax in zip(new_best, axes))
            best = new_best
            if not on_edge:
                break
        spacing = fine
    return GridImage(best.reshape(shape))
