"""Discrete energies on pixel grids: regularizer, fidelity, exact gradients.

The rectangle is discretized with unit grid spacing (cell area 1, so the
fidelity weight is per-pixel; rescale it yourself when changing resolution).
Gradients use forward differences with replicate (Neumann) boundary handling:
the x/y difference vanishes on the last column/row, matching unconstrained
minimization with no boundary term. The divergence below is the exact
negative adjoint, so the discrete energy gradient is exact, not a
discretization of the continuum Euler operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .density import DensitySpec, _profile

__all__ = [
    "GridImage", "InpaintMask", "Quadratic", "Rho", "EnergyReport",
    "forward_gradient", "divergence", "energy", "energy_gradient", "truncate",
]


@dataclass(frozen=True, eq=False)
class GridImage:
    """Scalar field on a (height, width) pixel grid, row-major."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.values, dtype=float))
        if arr.ndim != 2:
            raise ValueError(f"image must be 2-D, got shape {arr.shape}")
        if arr.size < 2:
            raise ValueError("image must have at least 2 pixels")
        if not np.all(np.isfinite(arr)):
            raise ValueError("image values must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @staticmethod
    def constant(width: int, height: int, value: float = 0.0) -> "GridImage":
        return GridImage(np.full((height, width), float(value)))


@dataclass(frozen=True, eq=False)
class InpaintMask:
    """Boolean field marking the region where the data term is switched off."""

    flags: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.flags, dtype=bool))
        if arr.ndim != 2:
            raise ValueError(f"mask must be 2-D, got shape {arr.shape}")
        if arr.all():
            raise ValueError("mask must leave at least one pixel unmasked")
        arr.flags.writeable = False
        object.__setattr__(self, "flags", arr)

    @property
    def coverage(self) -> float:
        return float(np.mean(self.flags))

    @staticmethod
    def empty(width: int, height: int) -> "InpaintMask":
        return InpaintMask(np.zeros((height, width), dtype=bool))


@dataclass(frozen=True)
class Quadratic:
    """Fidelity (lam/2) |w - f|^2 per unmasked pixel."""

    lam: float

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam > 0.0):
            raise ValueError(f"lambda must be finite and > 0, got {self.lam}")


@dataclass(frozen=True)
class Rho:
    """Fidelity rho(|w - f|) with rho(t) = sqrt(1 + t^2) - 1 per unmasked pixel.

    ``m_check`` records the power for which rho(t)/t^m stays bounded (1 for
    this rho); it is metadata used by the exponent-regime check only.
    """

    m_check: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.m_check) and self.m_check >= 1.0):
            raise ValueError(f"m_check must be >= 1, got {self.m_check}")

    @staticmethod
    def rho(t):
        return np.sqrt(1.0 + np.square(t)) - 1.0

    @staticmethod
    def rho_prime(t):
        return t / np.sqrt(1.0 + np.square(t))


@dataclass(frozen=True)
class EnergyReport:
    """Energy split into regularizer, quadratic (delta) term, and fidelity."""

    total: float
    regularizer: float
    quadratic_term: float
    fidelity: float

    def __post_init__(self):
        parts = self.regularizer + self.quadratic_term + self.fidelity
        if abs(self.total - parts) > 1e-12 * max(1.0, abs(self.total)):
            raise ValueError(f"energy parts do not add up: {self}")


# ---------------------------------------------------------------------------
# array internals (leading batch axes allowed)


def _grad(v: np.ndarray) -> np.ndarray:
    """Forward differences, shape (..., h, w) -> (..., h, w, 2)."""
    out = np.zeros(v.shape + (2,))
    out[..., :, :-1, 0] = v[..., :, 1:] - v[..., :, :-1]
    out[..., :-1, :, 1] = v[..., 1:, :] - v[..., :-1, :]
    return out


def _div(p: np.ndarray) -> np.ndarray:
    """Adjoint so that <_grad(u), p> = <u, -_div(p)> exactly.

    Only the forward-difference components enter (last column/row of px/py
    are ignored, matching the zeros produced by :func:`_grad`).
    """
    px = p[..., 0]
    py = p[..., 1]
    out = np.zeros(p.shape[:-1])
    out[..., :, :-1] += px[..., :, :-1]
    out[..., :, 1:] -= px[..., :, :-1]
    out[..., :-1, :] += py[..., :-1, :]
    out[..., 1:, :] -= py[..., :-1, :]
    return out


def _check_problem(values, f, mask, delta):
    if values.shape[-2:] != f.shape:
        raise ValueError(f"image shape {values.shape[-2:]} != data shape {f.shape}")
    if mask.shape != f.shape:
        raise ValueError(f"mask shape {mask.shape} != data shape {f.shape}")
    if np.min(f) < 0.0 or np.max(f) > 1.0:
        raise ValueError("data image must satisfy 0 <= f <= 1")
    if not delta >= 0.0:
        raise ValueError(f"delta must be >= 0, got {delta}")


def _energy_parts(values, f, mask_flags, spec, fid, delta):
    """(regularizer, quadratic, fidelity) sums; supports leading batch axes."""
    grad = _grad(values)
    norms = np.sqrt(np.sum(np.square(grad), axis=-1))
    prof = _profile(spec)
    reg = np.sum(prof.g_many(norms), axis=(-2, -1))
    quad = 0.5 * delta * np.sum(np.square(norms), axis=(-2, -1))
    resid = (values - f) * ~mask_flags
    if isinstance(fid, Quadratic):
        fidelity = 0.5 * fid.lam * np.sum(np.square(resid), axis=(-2, -1))
    else:
        fidelity = np.sum(Rho.rho(resid) * ~mask_flags, axis=(-2, -1))
    return reg, quad, fidelity


def _energy_total_batch(values, f, mask_flags, spec, fid, delta):
    reg, quad, fidelity = _energy_parts(values, f, mask_flags, spec, fid, delta)
    return reg + quad + fidelity


def _local_energy(values, f, mask_flags, spec, fid, delta):
    """Per-pixel energy contributions (h, w); sums to the total energy."""
    grad = _grad(values)
    norms = np.sqrt(np.sum(np.square(grad), axis=-1))
    prof = _profile(spec)
    local = prof.g_many(norms) + 0.5 * delta * np.square(norms)
    resid = (values - f) * ~mask_flags
    if isinstance(fid, Quadratic):
        local = local + 0.5 * fid.lam * np.square(resid)
    else:
        local = local + Rho.rho(resid) * ~mask_flags
    return local


def _energy_gradient_array(values, f, mask_flags, spec, fid, delta):
    grad = _grad(values)
    norms = np.sqrt(np.sum(np.square(grad), axis=-1))
    prof = _profile(spec)
    slopes = prof.g1_many(norms)
    with np.errstate(divide="ignore", invalid="ignore"):
        coef = np.where(norms > 0.0, slopes / np.where(norms > 0.0, norms, 1.0), 0.0)
    flux = (coef + delta)[..., None] * grad
    out = -_div(flux)
    resid = (values - f) * ~mask_flags
    if isinstance(fid, Quadratic):
        out += fid.lam * resid
    else:
        out += Rho.rho_prime(resid) * ~mask_flags
    return out


# ---------------------------------------------------------------------------
# public operations


def forward_gradient(img: GridImage) -> np.ndarray:
    """Forward-difference gradient field, shape (height, width, 2)."""
    return _grad(img.values)


def divergence(field: np.ndarray) -> np.ndarray:
    """Negative adjoint of :func:`forward_gradient` (see module docstring)."""
    field = np.asarray(field, dtype=float)
    if field.ndim != 3 or field.shape[-1] != 2:
        raise ValueError(f"expected a (h, w, 2) field, got shape {field.shape}")
    return _div(field)


def energy(img: GridImage, f: GridImage, mask: InpaintMask, spec: DensitySpec,
           fid, delta: float = 0.0) -> EnergyReport:
    """Discrete energy of ``img`` against data ``f``.

    Regularizer and quadratic delta-term sum over all pixels, the fidelity
    only over pixels outside the inpainting mask.
    """
    _check_problem(img.values, f.values, mask.flags, delta)
    reg, quad, fidelity = _energy_parts(img.values, f.values, mask.flags,
                                        spec, fid, delta)
    reg, quad, fidelity = float(reg), float(quad), float(fidelity)
    return EnergyReport(total=reg + quad + fidelity, regularizer=reg,
                        quadratic_term=quad, fidelity=fidelity)


def energy_gradient(img: GridImage, f: GridImage, mask: InpaintMask,
                    spec: DensitySpec, fid, delta: float = 0.0) -> np.ndarray:
    """Exact gradient of :func:`energy` with respect to the image values."""
    _check_problem(img.values, f.values, mask.flags, delta)
    return _energy_gradient_array(img.values, f.values, mask.flags, spec, fid, delta)


def truncate(img: GridImage) -> GridImage:
    """Clamp pixel values to [0, 1]; never increases the energy."""
    return GridImage(np.clip(img.values, 0.0, 1.0))
