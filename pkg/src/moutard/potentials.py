"""Path quadrature of exact one-forms and the pure-imaginary reduction.

A potential is recovered from its differential ``P dz + Q dzbar`` by
composite-trapezoid quadrature along axis-aligned L-paths on the grid:
first horizontal from the basepoint node, then vertical.  Along horizontal
legs the increment is ``(P + Q) dx``; along vertical legs it is
``i (P - Q) dy``.  Closedness of the form makes the result path-independent
up to the O(h^2) quadrature error, which is tested, not assumed.

Integration constants are free parameters.  ``anchored_potential`` pins the
constant at a configurable anchor point (defaulting to the basepoint node),
so closed-form references anchored at e.g. the plane origin can be matched
even when the origin is not a grid node.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .grid import GridField, GridError, bilinear_value, dbar, dz

__all__ = [
    "ImaginaryConstant",
    "OneForm",
    "one_form",
    "omega_integrand",
    "check_closedness",
    "integrate_one_form",
    "integrate_one_form_alt",
    "path_independence_residual",
    "enforce_imaginary",
    "ImaginaryProjection",
    "anchored_potential",
]


@dataclass(frozen=True)
class ImaginaryConstant:
    """The pure imaginary constant ``i * alpha``, stored by its real coefficient."""

    alpha: float = 0.0

    @property
    def value(self) -> complex:
        return 1j * self.alpha


@dataclass(frozen=True)
class OneForm:
    """Coefficients of ``P dz + Q dzbar`` on a common grid."""

    p: GridField
    q: GridField

    def __post_init__(self):
        if self.p.domain != self.q.domain:
            raise GridError("one-form coefficients live on different domains")

    @property
    def domain(self):
        return self.p.domain


def one_form(psi1: GridField, psi2: GridField, psip1: GridField, psip2: GridField) -> OneForm:
    """Differential of the potential linking a solution pair to a conjugate pair."""
    return OneForm(p=psi1 * psip1, q=-(psi2 * psip2))


def omega_integrand(seed_j, seed_k) -> OneForm:
    """One-form for the potential generated by seed ``j`` and conjugate seed ``k``."""
    return one_form(seed_j.psi1, seed_j.psi2, seed_k.psip1, seed_k.psip2)


def check_closedness(w: OneForm) -> float:
    """Max-norm of ``dbar P - dz Q`` over interior nodes; zero for exact forms."""
    res = dbar(w.p) - dz(w.q)
    return float(np.max(np.abs(res.values[1:-1, 1:-1])))


def _base_indices(w: OneForm, basepoint) -> tuple[int, int]:
    if basepoint is None:
        return w.domain.center_index()
    return w.domain.node_index(basepoint)


def _leg_integrands(w: OneForm) -> tuple[np.ndarray, np.ndarray]:
    g = w.p.values + w.q.values           # horizontal: (P + Q) dx
    v = 1j * (w.p.values - w.q.values)    # vertical:   i (P - Q) dy
    return g, v


def integrate_one_form(w: OneForm, basepoint: complex | None = None, c0: complex = 0j) -> GridField:
    """Potential with value ``c0`` at the basepoint node, via L-path quadrature.

    The path to node ``(x, y)`` runs horizontally from the basepoint along its
    row, then vertically along the target column.  Composite trapezoid on both
    legs; exact for constant and linear integrands.
    """
    d = w.domain
    jb, ib = _base_indices(w, basepoint)
    g, v = _leg_integrands(w)
    row_segs = 0.5 * (g[jb, :-1] + g[jb, 1:]) * d.h_x
    t = np.concatenate(([0.0], np.cumsum(row_segs)))
    col_segs = 0.5 * (v[:-1, :] + v[1:, :]) * d.h_y
    u = np.vstack((np.zeros((1, d.n_x), dtype=np.complex128), np.cumsum(col_segs, axis=0)))
    omega = c0 + (t - t[ib])[None, :] + (u - u[jb, :][None, :])
    return GridField(d, omega)


def integrate_one_form_alt(w: OneForm, basepoint: complex | None = None, c0: complex = 0j) -> GridField:
    """Same potential integrated vertically first, then horizontally."""
    d = w.domain
    jb, ib = _base_indices(w, basepoint)
    g, v = _leg_integrands(w)
    col_segs = 0.5 * (v[:-1, ib] + v[1:, ib]) * d.h_y
    u = np.concatenate(([0.0], np.cumsum(col_segs)))
    row_segs = 0.5 * (g[:, :-1] + g[:, 1:]) * d.h_x
    t = np.hstack((np.zeros((d.n_y, 1), dtype=np.complex128), np.cumsum(row_segs, axis=1)))
    omega = c0 + (u - u[jb])[:, None] + (t - t[:, ib][:, None])
    return GridField(d, omega)


def path_independence_residual(w: OneForm, basepoint: complex | None = None) -> float:
    """Max-norm gap between the two leg orders; stays O(h^2) iff the form is closed."""
    a = integrate_one_form(w, basepoint, 0j)
    b = integrate_one_form_alt(w, basepoint, 0j)
    return float(np.max(np.abs(a.values - b.values)))


class ImaginaryProjection(NamedTuple):
    field: GridField
    discarded_real_max: float


def enforce_imaginary(omega: GridField, c: ImaginaryConstant | float = 0.0) -> ImaginaryProjection:
    """Project onto pure imaginary values and add ``i * alpha``.

    Returns the projected field together with the max-norm of the discarded
    real part, a diagnostic that must sit at quadrature-error level for
    genuinely reduced data.  The result has exactly zero real part.
    """
    alpha = c.alpha if isinstance(c, ImaginaryConstant) else float(c)
    discarded = float(np.max(np.abs(omega.values.real)))
    projected = 1j * (omega.values.imag + alpha)
    return ImaginaryProjection(GridField(omega.domain, projected), discarded)


def anchored_potential(
    w: OneForm,
    basepoint: complex | None = None,
    constant: complex = 0j,
    anchor: complex | None = None,
    imaginary: bool = False,
) -> GridField:
    """Integrate ``w`` and pin its integration constant at ``anchor``.

    With ``anchor=None`` the constant is the potential value at the basepoint
    node.  Otherwise the raw quadrature is shifted so the (bilinearly
    interpolated) value at ``anchor`` equals the constant; the shift is exact
    whenever the potential is at most bilinear in (x, y), which covers the
    constant and linear seed families.

    ``imaginary=True`` applies the pure-imaginary projection; the constant
    must then be pure imaginary.
    """
    raw = integrate_one_form(w, basepoint, 0j)
    if anchor is not None:
        shift = bilinear_value(raw, complex(anchor))
        raw = GridField(raw.domain, raw.values - shift)
    if imaginary:
        c = complex(constant)
        if c.real != 0:
            raise ValueError(f"integration constant must be pure imaginary, got {c}")
        return enforce_imaginary(raw, ImaginaryConstant(c.imag)).field
    return GridField(raw.domain, raw.values + complex(constant))
