"""Residual certification, convergence-order fitting, and singular-set location.

Residual fields are formed with the same second-order stencils used by the
rest of the library, so a correct transform output makes every residual
shrink at O(h^2).  Reported max-norms are taken over the interior with the
singular mask dilated by two cells; finite differences across a pole are
meaningless and stay excluded.
"""

from __future__ import annotations

from typing import Callable, NamedTuple, Sequence

import numpy as np

from .grid import Domain, GridField, dbar, dz

__all__ = [
    "residual_ga",
    "residual_ga_conjugate",
    "residual_dirac",
    "residual_dirac_conjugate",
    "dilate_mask",
    "max_norm",
    "fit_order",
    "convergence_order",
    "SingularSet",
    "locate_singular_set",
    "EXACT",
    "ORDER_MIN",
]

# Residuals below this are reported as "exact" instead of a fitted order.
EXACT = "exact"
_EXACT_FLOOR = 1e-13

# Acceptance threshold for fitted residual orders.
ORDER_MIN = 1.8


def residual_ga(u: GridField, psi: GridField) -> GridField:
    """Defect of the generalized-analytic equation: dbar(psi) - u * conj(psi)."""
    return dbar(psi) - u * psi.conj()


def residual_ga_conjugate(u: GridField, psip: GridField) -> GridField:
    """Defect of the conjugate equation: dbar(psip) + conj(u) * conj(psip)."""
    return dbar(psip) + u.conj() * psip.conj()


def residual_dirac(u: GridField, v: GridField, pair) -> tuple[GridField, GridField]:
    """Defects of the Dirac system: (dbar psi1 - u psi2, dz psi2 - v psi1)."""
    return (dbar(pair.psi1) - u * pair.psi2, dz(pair.psi2) - v * pair.psi1)


def residual_dirac_conjugate(u: GridField, v: GridField, pair) -> tuple[GridField, GridField]:
    """Defects of the conjugate Dirac system: (dbar psi1 + v psi2, dz psi2 + u psi1)."""
    return (dbar(pair.psi1) + v * pair.psi2, dz(pair.psi2) + u * pair.psi1)


def dilate_mask(mask: np.ndarray, radius: int) -> np.ndarray:
    """Grow a boolean mask by ``radius`` cells in the Chebyshev metric."""
    mask = np.asarray(mask, dtype=bool)
    if radius <= 0:
        return mask.copy()
    out = np.zeros_like(mask)
    ny, nx = mask.shape
    for dy in range(-radius, radius + 1):
        ys_dst = slice(max(0, dy), ny + min(0, dy))
        ys_src = slice(max(0, -dy), ny + min(0, -dy))
        for dx in range(-radius, radius + 1):
            xs_dst = slice(max(0, dx), nx + min(0, dx))
            xs_src = slice(max(0, -dx), nx + min(0, -dx))
            out[ys_dst, xs_dst] |= mask[ys_src, xs_src]
    return out


def max_norm(fields, mask: np.ndarray | None = None, dilate: int = 2,
             interior: bool = True) -> float:
    """Max magnitude over the selected nodes of one field or a sequence.

    ``interior`` drops the boundary ring; ``mask`` marks singular nodes and
    is dilated by ``dilate`` cells before exclusion.  NaN at a node outside
    the excluded region propagates, on purpose.
    """
    if isinstance(fields, GridField):
        fields = (fields,)
    shape = fields[0].domain.shape
    keep = np.ones(shape, dtype=bool)
    if interior:
        keep[0, :] = keep[-1, :] = False
        keep[:, 0] = keep[:, -1] = False
    if mask is not None:
        keep &= ~dilate_mask(mask, dilate)
    if not keep.any():
        return float("nan")
    return max(float(np.max(np.abs(f.values[keep]))) for f in fields)


def fit_order(hs: Sequence[float], residuals: Sequence[float]):
    """Least-squares slope of log residual against log h.

    Returns the string ``"exact"`` when every residual sits below the
    roundoff floor, so exact-on-grid data does not produce a meaningless fit.
    """
    hs = np.asarray(hs, dtype=float)
    res = np.asarray(residuals, dtype=float)
    if len(hs) != len(res) or len(hs) < 2:
        raise ValueError("need matching h and residual sequences of length >= 2")
    if np.max(res) < _EXACT_FLOOR:
        return EXACT
    res = np.maximum(res, 1e-300)
    slope = np.polyfit(np.log(hs), np.log(res), 1)[0]
    return float(slope)


def convergence_order(make_residual: Callable[[Domain], float], domains: Sequence[Domain]):
    """Fitted order of a residual functional over a refinement sequence."""
    if len(domains) < 3:
        raise ValueError("need at least 3 grids for an order fit")
    hs = [d.h_max for d in domains]
    res = [float(make_residual(d)) for d in domains]
    return fit_order(hs, res)


class SingularSet(NamedTuple):
    mask: np.ndarray
    points: list[complex]


def locate_singular_set(det: GridField, eps: float) -> SingularSet:
    """Mask of near-zero determinant nodes plus interpolated zero-contour points.

    Contour points come from grid nodes where the determinant vanishes
    outright and from linear interpolation of sign changes of the real and
    imaginary parts along grid edges (each accepted only where the other
    component also vanishes there).  When the determinant is genuinely
    complex and no aligned crossings exist, masked local minima of ``|det|``
    are returned instead.  Diagnostic-grade geometry, not a full contour
    marcher.
    """
    vals = det.values
    mag = np.abs(vals)
    mask = mag < eps
    scale = float(mag.max())
    if scale == 0.0:
        return SingularSet(mask, [])
    node_tol = 1e-12 * scale
    cross_tol = 1e-9 * scale

    xs = det.domain.xs()
    ys = det.domain.ys()
    points: list[complex] = []
    seen: set[tuple[float, float]] = set()

    def _push(x: float, y: float):
        key = (round(x, 12), round(y, 12))
        if key not in seen:
            seen.add(key)
            points.append(complex(x, y))

    for j, i in np.argwhere(mag <= node_tol):
        _push(xs[i], ys[j])

    for comp, other in ((vals.real, vals.imag), (vals.imag, vals.real)):
        a, b = comp[:, :-1], comp[:, 1:]
        for j, i in np.argwhere(a * b < 0):
            t = a[j, i] / (a[j, i] - b[j, i])
            resid = other[j, i] * (1 - t) + other[j, i + 1] * t
            if abs(resid) <= cross_tol:
                _push(xs[i] + t * det.domain.h_x, ys[j])
        a, b = comp[:-1, :], comp[1:, :]
        for j, i in np.argwhere(a * b < 0):
            t = a[j, i] / (a[j, i] - b[j, i])
            resid = other[j, i] * (1 - t) + other[j + 1, i] * t
            if abs(resid) <= cross_tol:
                _push(xs[i], ys[j] + t * det.domain.h_y)

    if not points and mask.any():
        # |det| minima ridge inside the mask
        padded = np.pad(mag, 1, constant_values=np.inf)
        local_min = (
            (mag <= padded[:-2, 1:-1]) & (mag <= padded[2:, 1:-1])
            & (mag <= padded[1:-1, :-2]) & (mag <= padded[1:-1, 2:])
        )
        for j, i in np.argwhere(mask & local_min):
            _push(xs[i], ys[j])

    return SingularSet(mask, points)
