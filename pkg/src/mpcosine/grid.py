"""Uniform-grid functions on [0,1]: sampling, quadrature, moments, parity split.

Everything downstream (extension, evolution, spectra) works on
:class:`GridFunction` values sampled at ``x_j = j/n_cells``.  ``n_cells``
must be even so that composite Simpson quadrature applies without auxiliary
nodes, and reflection about ``x = 1/2`` is pure index mirroring (exact).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import GridFormatError, NonFiniteValueError

__all__ = [
    "GridFunction",
    "MomentReport",
    "sample",
    "moment",
    "moment_about",
    "split_even_odd",
    "read_csv",
    "write_csv",
]


@dataclass(frozen=True)
class GridFunction:
    """Real function sampled at the ``n_cells + 1`` nodes of a uniform grid.

    Parameters
    ----------
    values : ndarray
        Samples ``f(j / n_cells)`` for ``j = 0 .. n_cells``.

    Notes
    -----
    Values are double precision throughout; the array is copied and frozen
    on construction so instances can be shared freely between workers.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).copy()
        if v.ndim != 1:
            raise GridFormatError(f"values must be one-dimensional, got shape {v.shape}")
        n = v.size - 1
        if n < 2 or n % 2 != 0:
            raise GridFormatError(
                f"n_cells must be even and >= 2, got {n} (need composite Simpson panels)"
            )
        if not np.all(np.isfinite(v)):
            j = int(np.flatnonzero(~np.isfinite(v))[0])
            raise NonFiniteValueError(
                f"non-finite value {v[j]!r} at node j={j} (x={j / n})"
            )
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def n_cells(self) -> int:
        return self.values.size - 1

    @property
    def h(self) -> float:
        """Grid spacing ``1 / n_cells`` (implied, never stored separately)."""
        return 1.0 / self.n_cells

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_cells + 1)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def mirror(self) -> "GridFunction":
        """Reflection ``x -> 1 - x`` by index mirroring (exact on the grid)."""
        return GridFunction(self.values[::-1])

    # Small amount of vector-space algebra; handy for building test corpora.
    def __add__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.values + _conforming(self, other))

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.values - _conforming(self, other))

    def __mul__(self, scalar: float) -> "GridFunction":
        return GridFunction(self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "GridFunction":
        return GridFunction(-self.values)


def _conforming(a: GridFunction, b: GridFunction) -> np.ndarray:
    if a.n_cells != b.n_cells:
        raise GridFormatError(
            f"grid mismatch: {a.n_cells} vs {b.n_cells} cells"
        )
    return b.values


def simpson_weights(n_cells: int) -> np.ndarray:
    """Composite-Simpson weights for the uniform grid (error O(h^4) on C^4)."""
    w = np.full(n_cells + 1, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w / (3.0 * n_cells)


def simpson(values: np.ndarray) -> float:
    """Composite-Simpson integral of node samples over [0,1]."""
    return float(simpson_weights(values.size - 1) @ values)


def sample(fn, n_cells: int) -> GridFunction:
    """Sample a callable or expression source on the uniform grid.

    ``fn`` may be a Python callable accepting a float/ndarray, a string in
    the small expression language (see :mod:`mpcosine.expressions`), or an
    already-parsed ``FunctionExpr``.  Values are taken exactly at the nodes.
    """
    if n_cells < 2 or n_cells % 2 != 0:
        raise GridFormatError(f"n_cells must be even and >= 2, got {n_cells}")
    fn = _as_callable(fn)
    x = np.linspace(0.0, 1.0, n_cells + 1)
    values = np.asarray(fn(x), dtype=float)
    if values.shape != x.shape:  # scalar-only callable
        values = np.array([float(fn(float(xi))) for xi in x])
    bad = ~np.isfinite(values)
    if bad.any():
        j = int(np.flatnonzero(bad)[0])
        raise NonFiniteValueError(
            f"function evaluates to {values[j]!r} at node j={j} (x={x[j]})"
        )
    return GridFunction(values)


def _as_callable(fn):
    if callable(fn):
        return fn
    if isinstance(fn, str):
        from .expressions import parse_expr

        return parse_expr(fn)
    raise TypeError(f"cannot sample object of type {type(fn).__name__}")


def moment(f: GridFunction, i: int) -> float:
    """Moment of order ``i`` about 0: the Simpson value of ``x^i f(x)`` on [0,1]."""
    if i < 0:
        raise ValueError(f"moment order must be >= 0, got {i}")
    if i == 0:
        xi = np.ones(f.n_cells + 1)
    else:
        xi = f.x**i
    return float(simpson_weights(f.n_cells) @ (xi * f.values))


def moment_about(f: GridFunction, a: float) -> float:
    """Weighted moment ``integral of (a - x) f(x)``, i.e. ``a*F0 - F1``."""
    return a * moment(f, 0) - moment(f, 1)


def split_even_odd(f: GridFunction) -> tuple[GridFunction, GridFunction]:
    """Split into parts symmetric/asymmetric about ``x = 1/2``.

    even(x) = (f(x) + f(1-x))/2,  odd(x) = (f(x) - f(1-x))/2.

    Reflection is index mirroring, so ``even`` is exactly symmetric and
    ``odd`` exactly antisymmetric at node pairs.
    """
    v = f.values
    m = v[::-1]
    even = 0.5 * (v + m)
    odd = 0.5 * (v - m)
    return GridFunction(even), GridFunction(odd)


@dataclass(frozen=True)
class MomentReport:
    """Moment values of one function (or one trajectory snapshot).

    ``values[k]`` is the order-``orders[k]`` moment about 0.  The weighted
    moment about a point ``a`` is always derived, never stored.
    """

    orders: tuple[int, ...]
    values: tuple[float, ...]
    about: float = 0.0

    def __post_init__(self):
        if len(self.orders) != len(self.values):
            raise ValueError("orders and values must have equal length")

    @classmethod
    def compute(cls, f: GridFunction, orders, about: float = 0.0) -> "MomentReport":
        orders = tuple(int(i) for i in orders)
        return cls(orders, tuple(moment(f, i) for i in orders), float(about))

    def about_value(self) -> float:
        """``a*F0 - F1`` for ``a = about``; requires orders 0 and 1 present."""
        try:
            f0 = self.values[self.orders.index(0)]
            f1 = self.values[self.orders.index(1)]
        except ValueError as exc:
            raise ValueError("about_value needs orders 0 and 1") from exc
        return self.about * f0 - f1


# ---------------------------------------------------------------------------
# CSV exchange format: header "x,value", rows in increasing x, x_j = j/n.

def write_csv(f: GridFunction, path_or_buffer) -> None:
    """Write ``x,value`` rows with shortest round-trip decimal formatting."""
    close = False
    if isinstance(path_or_buffer, (str, bytes)):
        buf = open(path_or_buffer, "w", newline="")
        close = True
    else:
        buf = path_or_buffer
    try:
        buf.write("x,value\n")
        for xj, vj in zip(f.x, f.values):
            buf.write(f"{xj!r},{vj!r}\n")
    finally:
        if close:
            buf.close()


def read_csv(path_or_buffer) -> GridFunction:
    """Read the ``x,value`` format, validating the node layout to 1e-12."""
    if isinstance(path_or_buffer, (str, bytes)):
        with open(path_or_buffer, newline="") as fh:
            text = fh.read()
    else:
        text = path_or_buffer.read()
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] != ["x", "value"]:
        raise GridFormatError("expected header 'x,value'")
    body = [r for r in rows[1:] if r]
    n = len(body) - 1
    if n < 2:
        raise GridFormatError(f"need at least 3 rows of samples, got {len(body)}")
    xs = np.empty(n + 1)
    vs = np.empty(n + 1)
    for j, row in enumerate(body):
        if len(row) != 2:
            raise GridFormatError(f"row {j + 2}: expected 2 columns, got {len(row)}")
        xs[j], vs[j] = float(row[0]), float(row[1])
    expected = np.linspace(0.0, 1.0, n + 1)
    worst = float(np.max(np.abs(xs - expected)))
    if worst > 1e-12:
        j = int(np.argmax(np.abs(xs - expected)))
        raise GridFormatError(
            f"x column must be j/n_cells: row {j + 2} has {xs[j]!r}, "
            f"expected {expected[j]!r} (deviation {worst:.2e})"
        )
    return GridFunction(vs)
