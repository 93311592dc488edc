"""Closed-form example families: the line-pole and circle-pole transforms.

Both families start from the zero coefficient and holomorphic seeds, so all
transformed objects have explicit formulas.  They serve as independent
oracles for the generic pipeline and as named CLI presets
(``ex1-line-pole``, ``ex2-circle-pole``).

Antiderivatives are taken with value zero at the origin: polynomial
integrands integrate exactly by coefficient shift, anything else falls back
to Gauss-Legendre quadrature along the straight segment from the origin and
is flagged ``exact=False``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import expr as ex
from .expr import SeedExpr

__all__ = [
    "LinePoleParams",
    "CirclePoleParams",
    "ClosedForms1",
    "ClosedForms2",
    "polynomial_coefficients",
    "antiderivative",
    "ex1_closed_forms",
    "ex1_region",
    "ex2_closed_forms",
    "ex2_nondegeneracy",
    "ex2_sigma_and_circle",
    "ex2_decay_check",
    "PRESETS",
]


def polynomial_coefficients(tree: SeedExpr, max_degree: int = 64) -> list[complex] | None:
    """Coefficients of a polynomial in z, lowest degree first; None if not one.

    Division is only admitted by (nonzero) constants; ``exp``, ``conj`` and
    negative powers disqualify the tree.
    """

    def walk(node) -> list[complex] | None:
        if isinstance(node, ex.Lit):
            return [node.value]
        if isinstance(node, ex.Var):
            return [0.0, 1.0]
        if isinstance(node, ex.Neg):
            inner = walk(node.operand)
            return None if inner is None else [-c for c in inner]
        if isinstance(node, (ex.Add, ex.Sub)):
            a, b = walk(node.left), walk(node.right)
            if a is None or b is None:
                return None
            sign = 1 if isinstance(node, ex.Add) else -1
            out = [0.0] * max(len(a), len(b))
            for i, c in enumerate(a):
                out[i] += c
            for i, c in enumerate(b):
                out[i] += sign * c
            return out
        if isinstance(node, ex.Mul):
            a, b = walk(node.left), walk(node.right)
            if a is None or b is None or len(a) + len(b) - 2 > max_degree:
                return None
            out = [0.0] * (len(a) + len(b) - 1)
            for i, ca in enumerate(a):
                for j, cb in enumerate(b):
                    out[i + j] += ca * cb
            return out
        if isinstance(node, ex.Div):
            a, b = walk(node.left), walk(node.right)
            if a is None or b is None or len(b) != 1 or b[0] == 0:
                return None
            return [c / b[0] for c in a]
        if isinstance(node, ex.Pow):
            if node.power < 0:
                return None
            base = walk(node.base)
            if base is None:
                return None
            out = [1.0]
            for _ in range(node.power):
                if len(out) + len(base) - 2 > max_degree:
                    return None
                nxt = [0.0] * (len(out) + len(base) - 1)
                for i, ca in enumerate(out):
                    for j, cb in enumerate(base):
                        nxt[i + j] += ca * cb
                out = nxt
            return out
        return None  # exp, conj

    coeffs = walk(tree)
    if coeffs is None:
        return None
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return [complex(c) for c in coeffs]


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)
# mapped to [0, 1]
_GL_T = 0.5 * (_GL_NODES + 1.0)
_GL_W = 0.5 * _GL_WEIGHTS


def antiderivative(tree: SeedExpr) -> tuple[Callable, bool]:
    """Holomorphic antiderivative vanishing at the origin.

    Polynomials integrate exactly; otherwise a 24-point Gauss-Legendre rule
    along the straight segment from 0 is used and the result is flagged
    approximate (machine precision for entire integrands on moderate
    domains, but not symbolically exact).
    """
    coeffs = polynomial_coefficients(tree)
    if coeffs is not None:
        shifted = np.array([0.0] + [c / (k + 1) for k, c in enumerate(coeffs)],
                           dtype=np.complex128)

        def poly_F(z):
            z = np.asarray(z, dtype=np.complex128)
            out = np.zeros_like(z)
            for c in shifted[::-1]:
                out = out * z + c
            return out

        return poly_F, True

    def quad_F(z):
        z = np.asarray(z, dtype=np.complex128)
        acc = np.zeros_like(z)
        for t, wgt in zip(_GL_T, _GL_W):
            acc = acc + wgt * ex.evaluate(tree, z * t)
        return z * acc

    return quad_F, False


def _imaginary_part_form(F: Callable, alpha: float) -> Callable:
    """z -> F(z) - conj(F(z)) + i*alpha."""

    def omega(z):
        fz = F(z)
        return fz - np.conjugate(fz) + 1j * alpha

    return omega


@dataclass(frozen=True)
class LinePoleParams:
    """Single holomorphic seed pair over the zero coefficient."""

    f: SeedExpr
    f_plus: SeedExpr
    psi0: SeedExpr
    psip0: SeedExpr
    alpha_11: float = 0.0
    alpha_01: float = 0.0
    alpha_10: float = 0.0


@dataclass(frozen=True)
class ClosedForms1:
    omega_11: Callable
    omega_01: Callable
    omega_10: Callable
    u_t: Callable
    psi_t: Callable
    psip_t: Callable
    exact: bool


def ex1_closed_forms(p: LinePoleParams) -> ClosedForms1:
    """Closed-form transform of the single-seed family."""
    F11, e1 = antiderivative(ex.Mul(p.f, p.f_plus))
    F01, e2 = antiderivative(ex.Mul(p.psi0, p.f_plus))
    F10, e3 = antiderivative(ex.Mul(p.f, p.psip0))
    omega_11 = _imaginary_part_form(F11, p.alpha_11)
    omega_01 = _imaginary_part_form(F01, p.alpha_01)
    omega_10 = _imaginary_part_form(F10, p.alpha_10)

    def u_t(z):
        return ex.evaluate(p.f, z) * np.conjugate(ex.evaluate(p.f_plus, z)) / omega_11(z)

    def psi_t(z):
        return ex.evaluate(p.psi0, z) - ex.evaluate(p.f, z) * omega_01(z) / omega_11(z)

    def psip_t(z):
        return ex.evaluate(p.psip0, z) - ex.evaluate(p.f_plus, z) * omega_10(z) / omega_11(z)

    return ClosedForms1(omega_11, omega_01, omega_10, u_t, psi_t, psip_t, e1 and e2 and e3)


def _constant_value(tree: SeedExpr, what: str) -> complex:
    coeffs = polynomial_coefficients(tree)
    if coeffs is None or len(coeffs) > 1:
        raise ValueError(f"{what} must be a constant expression")
    return coeffs[0]


def ex1_region(p: LinePoleParams, z: complex) -> str:
    """Classify a point against the pole line of the constant-seed family.

    Returns ``"lambda+"``, ``"lambda-"``, or ``"line"`` by the sign of
    Im(2 C C+ z + c11); requires constant seeds.
    """
    c = _constant_value(p.f, "f")
    cp = _constant_value(p.f_plus, "f_plus")
    val = (2.0 * c * cp * complex(z) + 1j * p.alpha_11).imag
    if val > 0:
        return "lambda+"
    if val < 0:
        return "lambda-"
    return "line"


@dataclass(frozen=True)
class CirclePoleParams:
    """Two constant seed pairs over the zero coefficient.

    ``alpha[j][k]`` holds the real coefficient of the pure imaginary constant
    for the (j, k) potential, indices 0..2 with 0 denoting the target;
    ``alpha[0][0]`` is unused.
    """

    f1: complex
    f1_plus: complex
    f2: complex
    f2_plus: complex
    alpha: tuple
    psi0: SeedExpr
    psip0: SeedExpr

    def __post_init__(self):
        arr = np.asarray(self.alpha, dtype=float)
        if arr.shape != (3, 3):
            raise ValueError(f"alpha must be a 3x3 real array, got shape {arr.shape}")
        object.__setattr__(self, "alpha", tuple(tuple(float(v) for v in row) for row in arr))

    def c(self, j: int, k: int) -> complex:
        return 1j * self.alpha[j][k]


@dataclass(frozen=True)
class ClosedForms2:
    omega: Callable          # omega(j, k) -> callable, indices 0..2
    det: Callable
    u_t: Callable
    psi_t: Callable
    psip_t: Callable
    exact: bool


def ex2_closed_forms(p: CirclePoleParams) -> ClosedForms2:
    """Closed-form transform of the constant two-seed family."""
    f = {1: complex(p.f1), 2: complex(p.f2)}
    fp = {1: complex(p.f1_plus), 2: complex(p.f2_plus)}
    Psi, e1 = antiderivative(p.psi0)
    Psip, e2 = antiderivative(p.psip0)

    def omega(j: int, k: int) -> Callable:
        if j == 0 and k == 0:
            raise ValueError("potential (0, 0) is not part of the family")
        if j == 0:
            def w(z):
                val = Psi(z) * fp[k]
                return val - np.conjugate(val) + p.c(0, k)
        elif k == 0:
            def w(z):
                val = f[j] * Psip(z)
                return val - np.conjugate(val) + p.c(j, 0)
        else:
            def w(z):
                val = f[j] * fp[k] * np.asarray(z, dtype=np.complex128)
                return val - np.conjugate(val) + p.c(j, k)
        return w

    quad = f[2] * fp[1] * np.conjugate(f[1] * fp[2]) - f[1] * fp[1] * np.conjugate(f[2] * fp[2])
    linear = (p.c(2, 2) * f[1] * fp[1] + p.c(1, 1) * f[2] * fp[2]
              - p.c(1, 2) * f[2] * fp[1] - p.c(2, 1) * f[1] * fp[2])
    const = p.c(1, 1) * p.c(2, 2) - p.c(2, 1) * p.c(1, 2)

    def det(z):
        z = np.asarray(z, dtype=np.complex128)
        return (2.0 * (quad * z * np.conjugate(z) + linear * z).real + const.real) + 0j

    numerator = (f[1] * np.conjugate(fp[1]) * p.c(2, 2)
                 - f[2] * np.conjugate(fp[1]) * p.c(1, 2)
                 - f[1] * np.conjugate(fp[2]) * p.c(2, 1)
                 + f[2] * np.conjugate(fp[2]) * p.c(1, 1))

    def u_t(z):
        return numerator / det(z)

    omega_01, omega_02 = omega(0, 1), omega(0, 2)
    omega_10, omega_20 = omega(1, 0), omega(2, 0)

    def psi_t(z):
        z = np.asarray(z, dtype=np.complex128)
        zb = np.conjugate(z)
        b1 = ((-f[1] * np.conjugate(f[2] * fp[2]) + f[2] * np.conjugate(f[1] * fp[2])) * zb
              + f[1] * p.c(2, 2) - f[2] * p.c(1, 2))
        b2 = ((f[1] * np.conjugate(f[2] * fp[1]) - f[2] * np.conjugate(f[1] * fp[1])) * zb
              - f[1] * p.c(2, 1) + f[2] * p.c(1, 1))
        return ex.evaluate(p.psi0, z) - (b1 * omega_01(z) + b2 * omega_02(z)) / det(z)

    def psip_t(z):
        z = np.asarray(z, dtype=np.complex128)
        zb = np.conjugate(z)
        b1 = ((-fp[1] * np.conjugate(f[2] * fp[2]) + fp[2] * np.conjugate(f[2] * fp[1])) * zb
              + fp[1] * p.c(2, 2) - fp[2] * p.c(2, 1))
        b2 = ((fp[1] * np.conjugate(f[1] * fp[2]) - fp[2] * np.conjugate(f[1] * fp[1])) * zb
              - fp[1] * p.c(1, 2) + fp[2] * p.c(1, 1))
        return ex.evaluate(p.psip0, z) - (b1 * omega_10(z) + b2 * omega_20(z)) / det(z)

    return ClosedForms2(omega, det, u_t, psi_t, psip_t, e1 and e2)


def _family_invariants(p: CirclePoleParams) -> tuple[complex, complex, complex, complex]:
    f = {1: complex(p.f1), 2: complex(p.f2)}
    fp = {1: complex(p.f1_plus), 2: complex(p.f2_plus)}
    quad = f[2] * fp[1] * np.conjugate(f[1] * fp[2]) - f[1] * fp[1] * np.conjugate(f[2] * fp[2])
    linear = (p.c(2, 2) * f[1] * fp[1] + p.c(1, 1) * f[2] * fp[2]
              - p.c(1, 2) * f[2] * fp[1] - p.c(2, 1) * f[1] * fp[2])
    const = p.c(1, 1) * p.c(2, 2) - p.c(2, 1) * p.c(1, 2)
    numerator = (f[1] * np.conjugate(fp[1]) * p.c(2, 2)
                 - f[2] * np.conjugate(fp[1]) * p.c(1, 2)
                 - f[1] * np.conjugate(fp[2]) * p.c(2, 1)
                 + f[2] * np.conjugate(fp[2]) * p.c(1, 1))
    return quad, linear, const, numerator


def ex2_nondegeneracy(p: CirclePoleParams, tol: float = 1e-12) -> tuple[bool, bool, bool]:
    """The three admissibility predicates of the constant family.

    (linear term vanishes, transform numerator nonzero, radial term nonzero);
    all three true means the transformed coefficient is nontrivial and
    spherically symmetric.
    """
    quad, linear, const, numerator = _family_invariants(p)
    scale = max(abs(quad), abs(linear), abs(const), abs(numerator), 1.0)
    return (
        bool(abs(linear) <= tol * scale),
        bool(abs(numerator) > tol * scale),
        bool(abs(quad.real) > tol * scale),
    )


def ex2_sigma_and_circle(p: CirclePoleParams) -> tuple[float, float | None]:
    """Pole-geometry invariant sigma and the determinant root along a ray.

    ``sigma`` is minus the constant term over the radial coefficient of the
    determinant.  When ``sigma >= 0`` the root of the determinant along the
    positive real ray is bisected to 1e-12 and returned as the pole radius;
    otherwise None.  The pole locus is defined operationally as the zero set
    of the determinant; ``sigma`` is reported alongside, not squared into it.
    """
    quad, linear, const, _ = _family_invariants(p)
    denom = 2.0 * quad.real
    if denom == 0.0:
        raise ValueError("radial coefficient of the determinant vanishes")
    sigma = -const.real / denom
    if sigma < 0:
        return sigma, None
    forms = ex2_closed_forms(p)

    def det_ray(r: float) -> float:
        return float(forms.det(complex(r, 0.0)).real)

    lo, hi = 0.0, float(2.0 * np.sqrt(sigma) + 1.0)
    f_lo = det_ray(lo)
    if f_lo == 0.0:
        return sigma, 0.0
    grow = 0
    while det_ray(hi) * f_lo > 0:
        hi *= 2.0
        grow += 1
        if grow > 60:
            return sigma, None
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        f_mid = det_ray(mid)
        if f_mid == 0.0:
            return sigma, mid
        if f_mid * f_lo > 0:
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return sigma, 0.5 * (lo + hi)


def ex2_decay_limit(p: CirclePoleParams) -> float:
    """Large-radius limit of |u_t(z)| |z|^2."""
    quad, _, _, numerator = _family_invariants(p)
    return float(abs(numerator) / abs(2.0 * quad.real))


def ex2_decay_check(p: CirclePoleParams, radii: Sequence[float], n_angles: int = 256) -> float:
    """Sup of ``|u_t| |z|^2`` sampled on circles; radii must clear the pole."""
    _, pole = ex2_sigma_and_circle(p)
    if pole is not None and any(r <= pole for r in radii):
        raise ValueError(f"all radii must exceed the pole radius {pole}")
    forms = ex2_closed_forms(p)
    angles = np.linspace(0.0, 2.0 * np.pi, n_angles, endpoint=False)
    worst = 0.0
    for r in radii:
        z = r * np.exp(1j * angles)
        worst = max(worst, float(np.max(np.abs(forms.u_t(z)) * (r * r))))
    return worst


# CLI presets, written in the flat config syntax understood by the parser.
PRESETS = {
    "ex1-line-pole": """\
level = ga
domain = -1 1 -1 1
grid = 65 65
N = 1
u = 0
seed.1.psi = 1
seed.1.psip = 1
alpha.1.1 = 1
alpha.0.1 = 0
alpha.1.0 = 0
target.psi0 = 1
target.psip0 = 1
anchor = 0 0
""",
    "ex2-circle-pole": """\
level = ga
domain = -2 2 -2 2
grid = 129 129
N = 2
u = 0
seed.1.psi = 1
seed.1.psip = 1
seed.2.psi = i
seed.2.psip = i
alpha.1.1 = 0
alpha.2.2 = 0
alpha.1.2 = 2
alpha.2.1 = -2
alpha.0.1 = 0
alpha.0.2 = 0
alpha.1.0 = 0
alpha.2.0 = 0
target.psi0 = 1
target.psip0 = 1
anchor = 0 0
""",
}
