"""Scalar fields on planar domains: expression trees and grid samples.

Fields supply values and the first/second derivatives needed by the
geometric integrals (notably the flat positive Laplacian of the conformal
factor).  Expression fields differentiate symbolically; grid fields use
4th-order finite differences.
"""

from __future__ import annotations

import numpy as np
import sympy as sp
from scipy.interpolate import RectBivariateSpline

from .errors import SpecError

_X, _Y = sp.symbols("x y")


class ScalarField:
    """Smooth scalar field given by a closed-form expression in x and y."""

    def __init__(self, expr):
        if isinstance(expr, str):
            try:
                expr = sp.sympify(expr, locals={"x": _X, "y": _Y})
            except (sp.SympifyError, SyntaxError) as exc:
                raise SpecError(f"cannot parse field expression: {expr!r}") from exc
        elif isinstance(expr, (int, float)):
            expr = sp.Float(expr)
        self.expr = sp.sympify(expr)
        free = self.expr.free_symbols - {_X, _Y}
        if free:
            raise SpecError(f"field expression has unknown symbols: {free}")
        self._fn = {}

    @classmethod
    def constant(cls, c: float) -> "ScalarField":
        return cls(sp.Float(c))

    def _lambdify(self, key, expr):
        if key not in self._fn:
            self._fn[key] = sp.lambdify((_X, _Y), expr, modules="numpy")
        return self._fn[key]

    def _eval(self, key, expr, x, y):
        fn = self._lambdify(key, expr)
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = fn(x, y)
        return np.broadcast_to(np.asarray(out, dtype=float), np.broadcast_shapes(x.shape, y.shape)).copy()

    def __call__(self, x, y):
        return self._eval("f", self.expr, x, y)

    def dx(self, x, y):
        return self._eval("dx", sp.diff(self.expr, _X), x, y)

    def dy(self, x, y):
        return self._eval("dy", sp.diff(self.expr, _Y), x, y)

    def grad_sq(self, x, y):
        """|grad f|^2 with respect to the flat metric."""
        return self.dx(x, y) ** 2 + self.dy(x, y) ** 2

    def pos_laplacian(self, x, y):
        """Flat positive Laplacian -(f_xx + f_yy)."""
        lap = sp.diff(self.expr, _X, 2) + sp.diff(self.expr, _Y, 2)
        return -self._eval("lap", lap, x, y)

    def normal_derivative(self, x, y, nx, ny):
        return self.dx(x, y) * np.asarray(nx) + self.dy(x, y) * np.asarray(ny)

    def is_zero(self) -> bool:
        return bool(self.expr.is_zero)

    def is_constant(self) -> bool:
        return not (self.expr.free_symbols & {_X, _Y})

    def __repr__(self):
        return f"ScalarField({self.expr})"


class GridField:
    """Scalar field sampled on a uniform grid over [x0, x1] x [y0, y1].

    First and second derivatives are formed by 4th-order central finite
    differences on the grid (one-sided 4th-order stencils at edges), and all
    quantities are interpolated with cubic splines for off-grid evaluation.
    Needs at least a 7 x 7 grid.
    """

    def __init__(self, x_nodes, y_nodes, values):
        x = np.asarray(x_nodes, dtype=float)
        y = np.asarray(y_nodes, dtype=float)
        v = np.asarray(values, dtype=float)
        if v.shape != (x.size, y.size):
            raise SpecError("GridField values must have shape (len(x), len(y))")
        if x.size < 7 or y.size < 7:
            raise SpecError("GridField needs at least 7 nodes per axis")
        hx = np.diff(x)
        hy = np.diff(y)
        if not (np.allclose(hx, hx[0]) and np.allclose(hy, hy[0])):
            raise SpecError("GridField requires uniform grids")
        self._x, self._y, self._v = x, y, v
        dvx = _fd4(v, hx[0], axis=0)
        dvy = _fd4(v, hy[0], axis=1)
        d2vx = _fd4(dvx, hx[0], axis=0)
        d2vy = _fd4(dvy, hy[0], axis=1)
        self._sp = {
            "f": RectBivariateSpline(x, y, v),
            "dx": RectBivariateSpline(x, y, dvx),
            "dy": RectBivariateSpline(x, y, dvy),
            "dxx": RectBivariateSpline(x, y, d2vx),
            "dyy": RectBivariateSpline(x, y, d2vy),
        }

    def _eval(self, key, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        shape = np.broadcast_shapes(x.shape, y.shape)
        xb = np.broadcast_to(x, shape).ravel()
        yb = np.broadcast_to(y, shape).ravel()
        return self._sp[key](xb, yb, grid=False).reshape(shape)

    def __call__(self, x, y):
        return self._eval("f", x, y)

    def dx(self, x, y):
        return self._eval("dx", x, y)

    def dy(self, x, y):
        return self._eval("dy", x, y)

    def grad_sq(self, x, y):
        return self.dx(x, y) ** 2 + self.dy(x, y) ** 2

    def pos_laplacian(self, x, y):
        return -(self._eval("dxx", x, y) + self._eval("dyy", x, y))

    def normal_derivative(self, x, y, nx, ny):
        return self.dx(x, y) * np.asarray(nx) + self.dy(x, y) * np.asarray(ny)

    def is_zero(self) -> bool:
        return bool(np.all(self._v == 0.0))

    def is_constant(self) -> bool:
        return bool(np.all(self._v == self._v.flat[0]))


def _fd4(v: np.ndarray, h: float, axis: int) -> np.ndarray:
    """4th-order first derivative along an axis of a uniformly gridded array."""
    v = np.moveaxis(v, axis, 0)
    d = np.empty_like(v)
    d[2:-2] = (v[:-4] - 8 * v[1:-3] + 8 * v[3:-1] - v[4:]) / (12 * h)
    # one-sided 4th-order stencils at the four edge rows
    c = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / (12 * h)
    d[0] = sum(ci * v[i] for i, ci in enumerate(c))
    d[1] = sum(ci * v[i + 1] for i, ci in enumerate(c))
    d[-1] = -sum(ci * v[-1 - i] for i, ci in enumerate(c))
    d[-2] = -sum(ci * v[-2 - i] for i, ci in enumerate(c))
    return np.moveaxis(d, 0, axis)


def as_field(obj) -> "ScalarField | GridField":
    """Coerce strings, numbers, sympy expressions, or fields to a field."""
    if isinstance(obj, (ScalarField, GridField)):
        return obj
    if obj is None:
        return ScalarField.constant(0.0)
    return ScalarField(obj)
