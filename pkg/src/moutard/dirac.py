"""Matrix potential assembly and the algebraic transform for Dirac systems.

Given seed solutions of the system and its conjugate, the potentials are
integrated into an N x N matrix field; the transform then updates the
coefficients and any further solution pair through per-node solves against
that matrix.  No inverse is ever formed: each node gets an elimination with
partial pivoting (see :mod:`moutard.kernels`), and nodes where the
determinant falls below a scale-free threshold are masked out as NaN.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels, verify
from .grid import Domain, GridField, GridError
from .potentials import anchored_potential, omega_integrand, one_form

__all__ = [
    "DiracPair",
    "SeedPair",
    "OmegaMatrix",
    "TransformResult",
    "SingularGridError",
    "assemble_omega",
    "omega_column",
    "omega_row",
    "det_field",
    "singular_mask",
    "transform_u",
    "transform_v",
    "transform_solution",
    "transform_conjugate_solution",
    "transform",
    "DEFAULT_EPS_REL",
]

# Scale-free masking threshold: nodes with |det| < eps_rel * max|det| are cut.
DEFAULT_EPS_REL = 1e-8

_CNAN = complex(float("nan"), float("nan"))


class SingularGridError(RuntimeError):
    """Every node fell below the determinant threshold."""


@dataclass(frozen=True)
class DiracPair:
    """Two-component solution vector of the Dirac system (or its conjugate)."""

    psi1: GridField
    psi2: GridField

    def __post_init__(self):
        if self.psi1.domain != self.psi2.domain:
            raise GridError("pair components live on different domains")

    @property
    def domain(self) -> Domain:
        return self.psi1.domain


@dataclass(frozen=True)
class SeedPair:
    """A fixed solution of the system bundled with one of the conjugate system."""

    psi1: GridField
    psi2: GridField
    psip1: GridField
    psip2: GridField
    index: int | None = None

    def __post_init__(self):
        d = self.psi1.domain
        if any(f.domain != d for f in (self.psi2, self.psip1, self.psip2)):
            raise GridError("seed components live on different domains")

    @property
    def domain(self) -> Domain:
        return self.psi1.domain

    def solution(self) -> DiracPair:
        return DiracPair(self.psi1, self.psi2)

    def conjugate_solution(self) -> DiracPair:
        return DiracPair(self.psip1, self.psip2)


@dataclass(frozen=True)
class OmegaMatrix:
    """Matrix field of potentials; ``entries[k][j]`` links seed j to conjugate k.

    Row index k, column index j: the entry at matrix position (k, j) is the
    potential whose differential is built from the j-th seed solution and the
    k-th conjugate seed.
    """

    entries: tuple

    def __post_init__(self):
        rows = tuple(tuple(row) for row in self.entries)
        if not rows or any(len(row) != len(rows) for row in rows):
            raise GridError("matrix of potentials must be square and non-empty")
        d = rows[0][0].domain
        if any(e.domain != d for row in rows for e in row):
            raise GridError("matrix entries live on different domains")
        object.__setattr__(self, "entries", rows)

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def domain(self) -> Domain:
        return self.entries[0][0].domain

    def entry(self, j: int, k: int) -> GridField:
        """Potential generated by seed ``j`` and conjugate seed ``k`` (0-based)."""
        return self.entries[k][j]

    def stack(self) -> np.ndarray:
        """Per-node matrices, shape ``(n_nodes, n, n)``."""
        m = int(np.prod(self.domain.shape))
        n = self.n
        a = np.empty((m, n, n), dtype=np.complex128)
        for k in range(n):
            for j in range(n):
                a[:, k, j] = self.entries[k][j].values.ravel()
        return a


@dataclass(frozen=True)
class TransformResult:
    """Transformed coefficients and solutions, with the singular mask applied."""

    u_t: GridField
    v_t: GridField
    psi_t: DiracPair
    psip_t: DiracPair
    det: GridField
    mask: np.ndarray
    eps_sing: float
    residuals: dict = field(default_factory=dict)

    @property
    def domain(self) -> Domain:
        return self.u_t.domain


def _normalize_constants(constants, n: int) -> np.ndarray:
    if constants is None:
        return np.zeros((n, n), dtype=np.complex128)
    arr = np.asarray(constants, dtype=np.complex128)
    if arr.shape != (n, n):
        raise GridError(f"expected a {n} x {n} constants array, got shape {arr.shape}")
    return arr


def assemble_omega(
    seeds: Sequence[SeedPair],
    constants=None,
    basepoint: complex | None = None,
    anchor: complex | None = None,
    imaginary: bool = False,
) -> OmegaMatrix:
    """Integrate every potential of the seed family into the matrix field.

    ``constants[j][k]`` is the integration constant of the (j, k) potential,
    pinned at ``anchor`` (basepoint node when None).  ``imaginary=True``
    applies the pure-imaginary projection to every entry, as required by the
    generalized-analytic reduction.
    """
    n = len(seeds)
    if n == 0:
        raise GridError("need at least one seed to assemble a matrix")
    consts = _normalize_constants(constants, n)
    d = seeds[0].domain
    if any(s.domain != d for s in seeds):
        raise GridError("seeds live on different domains")
    rows = []
    for k in range(n):
        row = []
        for j in range(n):
            w = omega_integrand(seeds[j], seeds[k])
            row.append(anchored_potential(w, basepoint, consts[j, k], anchor, imaginary))
        rows.append(tuple(row))
    return OmegaMatrix(tuple(rows))


def omega_column(
    target: DiracPair,
    seeds: Sequence[SeedPair],
    constants=None,
    basepoint: complex | None = None,
    anchor: complex | None = None,
    imaginary: bool = False,
) -> list[GridField]:
    """Potentials linking a target solution to every conjugate seed."""
    n = len(seeds)
    consts = np.zeros(n, complex) if constants is None else np.asarray(constants, complex)
    out = []
    for k in range(n):
        w = one_form(target.psi1, target.psi2, seeds[k].psip1, seeds[k].psip2)
        out.append(anchored_potential(w, basepoint, consts[k], anchor, imaginary))
    return out


def omega_row(
    target_conj: DiracPair,
    seeds: Sequence[SeedPair],
    constants=None,
    basepoint: complex | None = None,
    anchor: complex | None = None,
    imaginary: bool = False,
) -> list[GridField]:
    """Potentials linking every seed to a target conjugate solution."""
    n = len(seeds)
    consts = np.zeros(n, complex) if constants is None else np.asarray(constants, complex)
    out = []
    for j in range(n):
        w = one_form(seeds[j].psi1, seeds[j].psi2, target_conj.psi1, target_conj.psi2)
        out.append(anchored_potential(w, basepoint, consts[j], anchor, imaginary))
    return out


def det_field(om: OmegaMatrix) -> GridField:
    """Pointwise determinant via pivoted elimination (no inverse formed)."""
    _, _, det = kernels.solve_batch(om.stack())
    return GridField(om.domain, det.reshape(om.domain.shape))


def singular_mask(det: GridField, eps_rel: float = DEFAULT_EPS_REL) -> tuple[np.ndarray, float]:
    """Mask of nodes with ``|det| < eps_rel * max|det|`` and the absolute threshold."""
    mag = np.abs(det.values)
    scale = float(mag.max())
    eps = eps_rel * scale
    if scale == 0.0:
        return np.ones(det.domain.shape, dtype=bool), 0.0
    return mag < eps, eps


def _mask_values(vals: np.ndarray, mask: np.ndarray, domain: Domain) -> GridField:
    out = vals.reshape(domain.shape).copy()
    out[mask] = _CNAN
    return GridField(domain, out)


def _seed_rows(seeds: Sequence[SeedPair], attr: str) -> np.ndarray:
    return np.stack([getattr(s, attr).values.ravel() for s in seeds], axis=1)


def _mask_or_raise(det: GridField, eps_rel: float):
    mask, eps = singular_mask(det, eps_rel)
    if mask.all():
        raise SingularGridError("determinant is below threshold on every node")
    return mask, eps


def transform_u(om: OmegaMatrix, seeds: Sequence[SeedPair], u: GridField,
                eps_rel: float = DEFAULT_EPS_REL) -> GridField:
    """Transformed first coefficient; singular nodes masked as NaN."""
    b = _seed_rows(seeds, "psip2")[:, :, None]
    x, _, det = kernels.solve_batch(om.stack(), b)
    detf = GridField(om.domain, det.reshape(om.domain.shape))
    mask, _ = _mask_or_raise(detf, eps_rel)
    vals = u.values.ravel() + np.sum(_seed_rows(seeds, "psi1") * x[:, :, 0], axis=1)
    return _mask_values(vals, mask, om.domain)


def transform_v(om: OmegaMatrix, seeds: Sequence[SeedPair], v: GridField,
                eps_rel: float = DEFAULT_EPS_REL) -> GridField:
    """Transformed second coefficient (sign and component mirror of transform_u)."""
    b = _seed_rows(seeds, "psip1")[:, :, None]
    x, _, det = kernels.solve_batch(om.stack(), b)
    detf = GridField(om.domain, det.reshape(om.domain.shape))
    mask, _ = _mask_or_raise(detf, eps_rel)
    vals = v.values.ravel() - np.sum(_seed_rows(seeds, "psi2") * x[:, :, 0], axis=1)
    return _mask_values(vals, mask, om.domain)


def transform_solution(om: OmegaMatrix, seeds: Sequence[SeedPair], psi0: DiracPair,
                       omega0: Sequence[GridField],
                       eps_rel: float = DEFAULT_EPS_REL) -> DiracPair:
    """Transform a further solution; one shared per-node solve for both components."""
    b = np.stack([f.values.ravel() for f in omega0], axis=1)[:, :, None]
    x, _, det = kernels.solve_batch(om.stack(), b)
    detf = GridField(om.domain, det.reshape(om.domain.shape))
    mask, _ = _mask_or_raise(detf, eps_rel)
    corr = x[:, :, 0]
    vals1 = psi0.psi1.values.ravel() - np.sum(_seed_rows(seeds, "psi1") * corr, axis=1)
    vals2 = psi0.psi2.values.ravel() - np.sum(_seed_rows(seeds, "psi2") * corr, axis=1)
    return DiracPair(_mask_values(vals1, mask, om.domain), _mask_values(vals2, mask, om.domain))


def transform_conjugate_solution(om: OmegaMatrix, seeds: Sequence[SeedPair], psip0: DiracPair,
                                 omega0t: Sequence[GridField],
                                 eps_rel: float = DEFAULT_EPS_REL) -> DiracPair:
    """Transform a further conjugate solution via the transposed per-node systems."""
    bt = np.stack([f.values.ravel() for f in omega0t], axis=1)[:, :, None]
    _, xt, det = kernels.solve_batch(om.stack(), None, bt)
    detf = GridField(om.domain, det.reshape(om.domain.shape))
    mask, _ = _mask_or_raise(detf, eps_rel)
    corr = xt[:, :, 0]
    vals1 = psip0.psi1.values.ravel() - np.sum(_seed_rows(seeds, "psip1") * corr, axis=1)
    vals2 = psip0.psi2.values.ravel() - np.sum(_seed_rows(seeds, "psip2") * corr, axis=1)
    return DiracPair(_mask_values(vals1, mask, om.domain), _mask_values(vals2, mask, om.domain))


def apply_transform(om: OmegaMatrix, seeds: Sequence[SeedPair], u: GridField, v: GridField,
                    psi0: DiracPair, psip0: DiracPair,
                    omega0: Sequence[GridField], omega0t: Sequence[GridField],
                    eps_rel: float = DEFAULT_EPS_REL) -> TransformResult:
    """Apply the full transform given an assembled matrix and potential columns.

    One factorization per node serves the coefficient updates and the solution
    column; the conjugate solution uses the transposed solve from the same
    matrix.
    """
    d = om.domain
    a = om.stack()
    b = np.stack(
        [
            _seed_rows(seeds, "psip2"),
            _seed_rows(seeds, "psip1"),
            np.stack([f.values.ravel() for f in omega0], axis=1),
        ],
        axis=2,
    )
    bt = np.stack([f.values.ravel() for f in omega0t], axis=1)[:, :, None]
    x, xt, det = kernels.solve_batch(a, b, bt)
    detf = GridField(d, det.reshape(d.shape))
    mask, eps = _mask_or_raise(detf, eps_rel)

    rows1 = _seed_rows(seeds, "psi1")
    rows2 = _seed_rows(seeds, "psi2")
    rowsp1 = _seed_rows(seeds, "psip1")
    rowsp2 = _seed_rows(seeds, "psip2")

    u_t = _mask_values(u.values.ravel() + np.sum(rows1 * x[:, :, 0], axis=1), mask, d)
    v_t = _mask_values(v.values.ravel() - np.sum(rows2 * x[:, :, 1], axis=1), mask, d)
    corr = x[:, :, 2]
    psi_t = DiracPair(
        _mask_values(psi0.psi1.values.ravel() - np.sum(rows1 * corr, axis=1), mask, d),
        _mask_values(psi0.psi2.values.ravel() - np.sum(rows2 * corr, axis=1), mask, d),
    )
    corrt = xt[:, :, 0]
    psip_t = DiracPair(
        _mask_values(psip0.psi1.values.ravel() - np.sum(rowsp1 * corrt, axis=1), mask, d),
        _mask_values(psip0.psi2.values.ravel() - np.sum(rowsp2 * corrt, axis=1), mask, d),
    )
    residuals = _certify(u_t, v_t, psi_t, psip_t, mask)
    return TransformResult(u_t, v_t, psi_t, psip_t, detf, mask, eps, residuals)


def _certify(u_t, v_t, psi_t, psip_t, mask) -> dict:
    res_d = verify.residual_dirac(u_t, v_t, psi_t)
    res_c = verify.residual_dirac_conjugate(u_t, v_t, psip_t)
    return {
        "dirac": verify.max_norm(res_d, mask),
        "dirac_conj": verify.max_norm(res_c, mask),
    }


def transform(
    seeds: Sequence[SeedPair],
    u: GridField,
    v: GridField,
    psi0: DiracPair,
    psip0: DiracPair,
    constants=None,
    constants0=None,
    constants0t=None,
    basepoint: complex | None = None,
    anchor: complex | None = None,
    eps_rel: float = DEFAULT_EPS_REL,
    imaginary: bool = False,
) -> TransformResult:
    """Full pipeline: integrate potentials, assemble the matrix, transform.

    ``constants`` is the N x N array for the seed potentials, ``constants0``
    and ``constants0t`` the length-N constants for the target columns.  With
    an empty seed list the transform degenerates to the identity.
    """
    n = len(seeds)
    d = u.domain
    if n == 0:
        detf = GridField.constant(d, 1.0)
        mask = np.zeros(d.shape, dtype=bool)
        residuals = _certify(u, v, psi0, psip0, mask)
        return TransformResult(u, v, psi0, psip0, detf, mask, 0.0, residuals)
    om = assemble_omega(seeds, constants, basepoint, anchor, imaginary)
    omega0 = omega_column(psi0, seeds, constants0, basepoint, anchor, imaginary)
    omega0t = omega_row(psip0, seeds, constants0t, basepoint, anchor, imaginary)
    return apply_transform(om, seeds, u, v, psi0, psip0, omega0, omega0t, eps_rel)
