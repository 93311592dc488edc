"""Complex-plane grids, sampled fields, and finite-difference Wirtinger derivatives.

Fields live on the node lattice of an axis-aligned rectangle.  Values are
stored row-major with y as the outer index, so ``values[j, i]`` is the sample
at ``x_i + 1j * y_j``.  The same ordering is used everywhere, including the
CSV emission in the CLI.

All quantities are dimensionless.  Fields are immutable after construction
and every operation here is a pure function over them.
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Domain",
    "GridField",
    "GridError",
    "SampleError",
    "sample",
    "dbar",
    "dz",
    "bilinear_value",
]


class GridError(ValueError):
    """Invalid grid geometry, off-grid point, or mismatched domains."""


class SampleError(ValueError):
    """A function could not be evaluated at some grid node."""


@dataclass(frozen=True)
class Domain:
    """Axis-aligned rectangle with an ``n_x`` by ``n_y`` node lattice.

    Requires ``x_min < x_max``, ``y_min < y_max`` and at least three nodes
    per direction so centered stencils have interior points.
    """

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    n_x: int
    n_y: int

    def __post_init__(self):
        bounds = (self.x_min, self.x_max, self.y_min, self.y_max)
        if not all(np.isfinite(b) for b in bounds):
            raise GridError("domain bounds must be finite")
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise GridError("domain must have positive extent in x and y")
        if self.n_x < 3 or self.n_y < 3:
            raise GridError("need at least 3 nodes per direction")

    @property
    def h_x(self) -> float:
        return (self.x_max - self.x_min) / (self.n_x - 1)

    @property
    def h_y(self) -> float:
        return (self.y_max - self.y_min) / (self.n_y - 1)

    @property
    def h_max(self) -> float:
        return max(self.h_x, self.h_y)

    @property
    def shape(self) -> tuple[int, int]:
        """Array shape of fields on this domain (y outer)."""
        return (self.n_y, self.n_x)

    def xs(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_x)

    def ys(self) -> np.ndarray:
        return np.linspace(self.y_min, self.y_max, self.n_y)

    def zgrid(self) -> np.ndarray:
        """Complex coordinate of every node, shape ``(n_y, n_x)``."""
        return self.xs()[None, :] + 1j * self.ys()[:, None]

    def center_index(self) -> tuple[int, int]:
        """Indices ``(j, i)`` of the node nearest the rectangle center."""
        cx = 0.5 * (self.x_min + self.x_max)
        cy = 0.5 * (self.y_min + self.y_max)
        i = int(np.argmin(np.abs(self.xs() - cx)))
        j = int(np.argmin(np.abs(self.ys() - cy)))
        return j, i

    def node(self, j: int, i: int) -> complex:
        return complex(self.xs()[i], self.ys()[j])

    def node_index(self, point: complex) -> tuple[int, int]:
        """Indices ``(j, i)`` of the node at ``point``; GridError if off-grid."""
        point = complex(point)
        i = int(round((point.real - self.x_min) / self.h_x))
        j = int(round((point.imag - self.y_min) / self.h_y))
        if not (0 <= i < self.n_x and 0 <= j < self.n_y):
            raise GridError(f"point {point} lies outside the domain")
        tol = 1e-9 * self.h_max
        if abs(self.xs()[i] - point.real) > tol or abs(self.ys()[j] - point.imag) > tol:
            raise GridError(f"point {point} is not a grid node")
        return j, i

    def contains(self, point: complex) -> bool:
        point = complex(point)
        pad_x = 1e-12 * (self.x_max - self.x_min)
        pad_y = 1e-12 * (self.y_max - self.y_min)
        return (self.x_min - pad_x <= point.real <= self.x_max + pad_x
                and self.y_min - pad_y <= point.imag <= self.y_max + pad_y)

    def with_size(self, n_x: int, n_y: int | None = None) -> "Domain":
        """Same rectangle with a different node count (for refinement sweeps)."""
        if n_y is None:
            n_y = n_x
        return Domain(self.x_min, self.x_max, self.y_min, self.y_max, n_x, n_y)

    def refine(self) -> "Domain":
        """Halve both grid spacings, keeping existing nodes on the lattice."""
        return self.with_size(2 * self.n_x - 1, 2 * self.n_y - 1)


@dataclass(frozen=True)
class GridField:
    """Complex samples on the node lattice of a :class:`Domain`."""

    domain: Domain
    values: np.ndarray

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.complex128)
        if vals.shape != self.domain.shape:
            raise GridError(
                f"values shape {vals.shape} does not match grid shape {self.domain.shape}"
            )
        if vals is self.values:
            vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, domain: Domain, value: complex) -> "GridField":
        return cls(domain, np.full(domain.shape, complex(value), dtype=np.complex128))

    def conj(self) -> "GridField":
        return GridField(self.domain, np.conj(self.values))

    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)

    def _coerce(self, other):
        if isinstance(other, GridField):
            if other.domain != self.domain:
                raise GridError("fields live on different domains")
            return other.values
        if isinstance(other, numbers.Number):
            return complex(other)
        return NotImplemented

    def __add__(self, other):
        vals = self._coerce(other)
        if vals is NotImplemented:
            return NotImplemented
        return GridField(self.domain, self.values + vals)

    __radd__ = __add__

    def __sub__(self, other):
        vals = self._coerce(other)
        if vals is NotImplemented:
            return NotImplemented
        return GridField(self.domain, self.values - vals)

    def __rsub__(self, other):
        vals = self._coerce(other)
        if vals is NotImplemented:
            return NotImplemented
        return GridField(self.domain, vals - self.values)

    def __mul__(self, other):
        vals = self._coerce(other)
        if vals is NotImplemented:
            return NotImplemented
        return GridField(self.domain, self.values * vals)

    __rmul__ = __mul__

    def __truediv__(self, other):
        vals = self._coerce(other)
        if vals is NotImplemented:
            return NotImplemented
        return GridField(self.domain, self.values / vals)

    def __rtruediv__(self, other):
        vals = self._coerce(other)
        if vals is NotImplemented:
            return NotImplemented
        return GridField(self.domain, vals / self.values)

    def __neg__(self):
        return GridField(self.domain, -self.values)


def _sample_nodewise(fn, z: np.ndarray) -> np.ndarray:
    out = np.empty(z.shape, dtype=np.complex128)
    for j in range(z.shape[0]):
        for i in range(z.shape[1]):
            try:
                out[j, i] = complex(fn(complex(z[j, i])))
            except Exception as exc:
                raise SampleError(
                    f"evaluation failed at node (x={z[j, i].real:g}, "
                    f"y={z[j, i].imag:g}): {exc}"
                ) from exc
    return out


def sample(fn, domain: Domain) -> GridField:
    """Evaluate ``fn`` at every node of ``domain``.

    ``fn`` may be any callable accepting a complex argument; array-aware
    callables (including parsed seed expressions) are evaluated in one
    vectorized pass, anything else falls back to a per-node loop.  Failure or
    a non-finite value at a node raises :class:`SampleError` naming the node.
    """
    z = domain.zgrid()
    try:
        with np.errstate(all="ignore"):
            vals = np.asarray(fn(z), dtype=np.complex128)
        if vals.shape != z.shape:
            vals = np.broadcast_to(vals, z.shape).astype(np.complex128)
    except Exception:
        vals = _sample_nodewise(fn, z)
    bad = ~np.isfinite(vals)
    if bad.any():
        j, i = map(int, np.argwhere(bad)[0])
        raise SampleError(
            f"evaluation failed at node (x={z[j, i].real:g}, y={z[j, i].imag:g}):"
            " non-finite value"
        )
    return GridField(domain, vals)


def _ddx(vals: np.ndarray, h: float) -> np.ndarray:
    # centered interior, one-sided 3-point second order at the edges
    out = np.empty_like(vals)
    out[:, 1:-1] = (vals[:, 2:] - vals[:, :-2]) / (2.0 * h)
    out[:, 0] = (-3.0 * vals[:, 0] + 4.0 * vals[:, 1] - vals[:, 2]) / (2.0 * h)
    out[:, -1] = (3.0 * vals[:, -1] - 4.0 * vals[:, -2] + vals[:, -3]) / (2.0 * h)
    return out


def _ddy(vals: np.ndarray, h: float) -> np.ndarray:
    out = np.empty_like(vals)
    out[1:-1, :] = (vals[2:, :] - vals[:-2, :]) / (2.0 * h)
    out[0, :] = (-3.0 * vals[0, :] + 4.0 * vals[1, :] - vals[2, :]) / (2.0 * h)
    out[-1, :] = (3.0 * vals[-1, :] - 4.0 * vals[-2, :] + vals[-3, :]) / (2.0 * h)
    return out


def dbar(f: GridField) -> GridField:
    """Wirtinger derivative (d/dx + i d/dy)/2, second order on the whole grid."""
    d = f.domain
    vals = 0.5 * (_ddx(f.values, d.h_x) + 1j * _ddy(f.values, d.h_y))
    return GridField(d, vals)


def dz(f: GridField) -> GridField:
    """Wirtinger derivative (d/dx - i d/dy)/2, second order on the whole grid."""
    d = f.domain
    vals = 0.5 * (_ddx(f.values, d.h_x) - 1j * _ddy(f.values, d.h_y))
    return GridField(d, vals)


def bilinear_value(field: GridField, point: complex) -> complex:
    """Bilinearly interpolated field value at a point inside the domain.

    Exact at nodes and for any a + b*x + c*y + d*x*y profile, which covers
    every polynomial potential of degree <= 2 used by the closed-form
    example families.
    """
    d = field.domain
    point = complex(point)
    if not d.contains(point):
        raise GridError(f"point {point} lies outside the domain")
    fx = (point.real - d.x_min) / d.h_x
    fy = (point.imag - d.y_min) / d.h_y
    i = min(int(np.floor(fx)), d.n_x - 2)
    j = min(int(np.floor(fy)), d.n_y - 2)
    i = max(i, 0)
    j = max(j, 0)
    tx = fx - i
    ty = fy - j
    v = field.values
    top = (1.0 - tx) * v[j, i] + tx * v[j, i + 1]
    bot = (1.0 - tx) * v[j + 1, i] + tx * v[j + 1, i + 1]
    return complex((1.0 - ty) * top + ty * bot)
