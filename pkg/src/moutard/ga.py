"""Generalized-analytic reduction of the Dirac-level transform.

A generalized analytic function and its conjugate-equation companion lift to
solutions of the Dirac system with ``v = conj(u)`` and second components
given by conjugation.  The transform is run once at the Dirac level, and the
reduction symmetries (pure imaginary potentials, ``conj(Omega) = -Omega``,
``v_t = conj(u_t)``, second components conjugate to first) come out
preserved; they are exposed here as checks rather than re-derived formulas.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import dirac, verify
from .grid import Domain, GridField, GridError
from .dirac import DiracPair, OmegaMatrix, SeedPair, TransformResult

__all__ = [
    "GASeed",
    "GATransformResult",
    "lift",
    "lift_seed",
    "project",
    "check_reduction_symmetry",
    "real_potential",
    "ga_transform",
]


@dataclass(frozen=True)
class GASeed:
    """One solution of the base equation and one of its conjugate equation."""

    psi: GridField
    psip: GridField
    index: int | None = None

    def __post_init__(self):
        if self.psi.domain != self.psip.domain:
            raise GridError("seed components live on different domains")

    @property
    def domain(self) -> Domain:
        return self.psi.domain


@dataclass(frozen=True)
class GATransformResult:
    """Transformed coefficient and solutions at the reduced level."""

    u_t: GridField
    psi_t: GridField
    psip_t: GridField
    det: GridField
    mask: np.ndarray
    eps_sing: float
    omega: OmegaMatrix | None
    dirac: TransformResult
    residuals: dict = field(default_factory=dict)

    @property
    def domain(self) -> Domain:
        return self.u_t.domain


def lift(psi: GridField) -> DiracPair:
    """Lift a reduced solution to the two-component system: (psi, conj psi)."""
    return DiracPair(psi, psi.conj())


def lift_seed(seed: GASeed) -> SeedPair:
    """Lift a reduced seed to a full Dirac seed pair."""
    return SeedPair(seed.psi, seed.psi.conj(), seed.psip, seed.psip.conj(), seed.index)


def project(pair: DiracPair) -> tuple[GridField, GridField]:
    """Both reduced solutions carried by a two-component solution.

    Returns ``(psi1 + conj psi2) / 2`` and ``(psi1 - conj psi2) / 2i``; for a
    lifted pair the first recovers the original function and the second is
    zero.
    """
    first = 0.5 * (pair.psi1 + pair.psi2.conj())
    second = (pair.psi1 - pair.psi2.conj()) / 2j
    return first, second


def check_reduction_symmetry(om: OmegaMatrix) -> float:
    """Max-norm of ``conj(Omega) + Omega``; exactly zero for projected entries."""
    worst = 0.0
    for row in om.entries:
        for entry in row:
            worst = max(worst, float(np.max(np.abs(np.conj(entry.values) + entry.values))))
    return worst


def real_potential(omega_entry: GridField) -> np.ndarray:
    """The real-valued potential ``omega / 2i`` carried by a matrix entry."""
    vals = omega_entry.values / 2j
    if np.max(np.abs(vals.imag)) != 0.0:
        raise GridError("entry is not pure imaginary")
    return vals.real


def _normalize_alphas(alphas, shape, what: str) -> np.ndarray:
    """Real coefficients of pure imaginary constants; reject real parts."""
    if alphas is None:
        return np.zeros(shape, dtype=float)
    arr = np.asarray(alphas)
    if arr.shape != shape:
        raise GridError(f"{what}: expected shape {shape}, got {arr.shape}")
    if np.iscomplexobj(arr):
        bad = np.argwhere(arr.real != 0)
        if len(bad):
            idx = tuple(int(v) for v in bad[0])
            raise ValueError(
                f"{what}{idx}: integration constant must be pure imaginary, got {arr[tuple(bad[0])]}"
            )
        return arr.imag.astype(float)
    return arr.astype(float)


def ga_transform(
    u: GridField,
    seeds: Sequence[GASeed],
    alphas=None,
    psi0: GridField | None = None,
    psip0: GridField | None = None,
    alphas0=None,
    alphas0t=None,
    basepoint: complex | None = None,
    anchor: complex | None = None,
    eps_rel: float = dirac.DEFAULT_EPS_REL,
) -> GATransformResult:
    """Run the transform on generalized-analytic data.

    ``alphas[j][k]`` are the real coefficients of the pure imaginary
    integration constants for the seed potentials; ``alphas0`` / ``alphas0t``
    those of the target columns.  Pure imaginary complex arrays are accepted
    too; anything with a real part is rejected entry by entry.  Seeds are
    lifted, the Dirac-level transform runs once, and the reduced outputs are
    read off the first components.
    """
    n = len(seeds)
    d = u.domain
    if psi0 is None:
        psi0 = GridField.constant(d, 0.0)
    if psip0 is None:
        psip0 = GridField.constant(d, 0.0)

    alphas = _normalize_alphas(alphas, (n, n), "alpha")
    alphas0 = _normalize_alphas(alphas0, (n,), "alpha0")
    alphas0t = _normalize_alphas(alphas0t, (n,), "alpha0t")

    v = u.conj()
    lifted = [lift_seed(s) for s in seeds]
    target = lift(psi0)
    target_conj = lift(psip0)

    if n == 0:
        result = dirac.transform([], u, v, target, target_conj, eps_rel=eps_rel)
        residuals = dict(result.residuals)
        residuals.update(_certify(result.u_t, psi0, psip0, result.mask))
        return GATransformResult(result.u_t, psi0, psip0, result.det, result.mask,
                                 result.eps_sing, None, result, residuals)

    om = dirac.assemble_omega(lifted, 1j * alphas, basepoint, anchor, imaginary=True)
    omega0 = dirac.omega_column(target, lifted, 1j * alphas0, basepoint, anchor, imaginary=True)
    omega0t = dirac.omega_row(target_conj, lifted, 1j * alphas0t, basepoint, anchor, imaginary=True)
    result = dirac.apply_transform(om, lifted, u, v, target, target_conj, omega0, omega0t, eps_rel)

    psi_t = result.psi_t.psi1
    psip_t = result.psip_t.psi1
    residuals = dict(result.residuals)
    residuals.update(_certify(result.u_t, psi_t, psip_t, result.mask))
    return GATransformResult(result.u_t, psi_t, psip_t, result.det, result.mask,
                             result.eps_sing, om, result, residuals)


def _certify(u_t: GridField, psi_t: GridField, psip_t: GridField, mask) -> dict:
    return {
        "ga": verify.max_norm(verify.residual_ga(u_t, psi_t), mask),
        "ga_conj": verify.max_norm(verify.residual_ga_conjugate(u_t, psip_t), mask),
    }
