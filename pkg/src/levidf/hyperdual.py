"""Second-order forward-mode differentiation over real coordinates.

A :class:`Jet2` carries the value, gradient and dense Hessian of a scalar
field with respect to ``m`` real coordinates.  For a field of ``n`` complex
variables the coordinates are ordered ``(x1, y1, ..., xn, yn)``.

Two helper algebras sit on top of it:

* :class:`Tangent` is a first-order dual number ``a + b*eps`` whose
  coefficients may themselves be jets.  It is used to take one directional
  derivative of a field while keeping second-order information in other
  variables.
* :class:`Cplx` is a pair ``(re, im)`` of real scalars of any of the above
  kinds, with ``im=None`` meaning "structurally real".

The module level functions :func:`exp`, :func:`log`, :func:`sqrt`,
:func:`cos`, :func:`sin` and :func:`pow_real` dispatch on the argument type so
that field definitions can be written once and evaluated on floats, jets or
tangents alike.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "DifferentiationDomainError",
    "Jet2",
    "Tangent",
    "Cplx",
    "seed",
    "constant",
    "exp",
    "log",
    "sqrt",
    "cos",
    "sin",
    "pow_real",
    "abs2",
    "jet",
    "fd_jet",
    "within_tolerance",
    "REL_TOL",
    "ABS_TOL",
]

REL_TOL = 1e-6
ABS_TOL = 1e-9


class DifferentiationDomainError(ValueError):
    """An elementary function was applied outside its domain."""

    def __init__(self, op: str, value: float, where: str | None = None):
        self.op = op
        self.value = value
        self.where = where
        msg = f"differentiation domain error: {op} at value {value!r}"
        if where:
            msg += f" ({where})"
        super().__init__(msg)


def _value_of(x) -> float:
    while not isinstance(x, (int, float)):
        x = x.value if isinstance(x, Jet2) else x.a
    return float(x)


class Jet2:
    """Value, gradient and Hessian of a real field at a point.

    Instances are treated as immutable; every operation returns a new jet.
    """

    __slots__ = ("value", "grad", "hess")
    __array_priority__ = 100

    def __init__(self, value: float, grad, hess, *, _trusted: bool = False):
        self.value = float(value)
        if _trusted:
            self.grad = grad
            self.hess = hess
            return
        grad = np.array(grad, dtype=float).reshape(-1)
        hess = np.array(hess, dtype=float)
        m = grad.shape[0]
        if hess.shape != (m, m):
            raise ValueError(f"hessian shape {hess.shape} does not match gradient length {m}")
        self.grad = grad
        self.hess = 0.5 * (hess + hess.T)

    @property
    def dim(self) -> int:
        return self.grad.shape[0]

    @classmethod
    def _make(cls, value, grad, hess) -> "Jet2":
        return cls(value, grad, hess, _trusted=True)

    def _lift(self, other) -> "Jet2":
        if isinstance(other, Jet2):
            if other.dim != self.dim:
                raise ValueError(f"jet dimension mismatch: {self.dim} vs {other.dim}")
            return other
        return constant(float(other), self.dim)

    def _chain(self, f0: float, f1: float, f2: float) -> "Jet2":
        g = self.grad
        return Jet2._make(f0, f1 * g, f1 * self.hess + f2 * np.outer(g, g))

    # arithmetic
    def __add__(self, other):
        if isinstance(other, (Tangent, Cplx)):
            return NotImplemented
        if isinstance(other, Jet2):
            o = self._lift(other)
            return Jet2._make(self.value + o.value, self.grad + o.grad, self.hess + o.hess)
        return Jet2._make(self.value + other, self.grad, self.hess)

    __radd__ = __add__

    def __neg__(self):
        return Jet2._make(-self.value, -self.grad, -self.hess)

    def __sub__(self, other):
        if isinstance(other, (Tangent, Cplx)):
            return NotImplemented
        if isinstance(other, Jet2):
            o = self._lift(other)
            return Jet2._make(self.value - o.value, self.grad - o.grad, self.hess - o.hess)
        return Jet2._make(self.value - other, self.grad, self.hess)

    def __rsub__(self, other):
        return Jet2._make(other - self.value, -self.grad, -self.hess)

    def __mul__(self, other):
        if isinstance(other, (Tangent, Cplx)):
            return NotImplemented
        if isinstance(other, Jet2):
            o = self._lift(other)
            cross = np.outer(self.grad, o.grad)
            return Jet2._make(
                self.value * o.value,
                self.value * o.grad + o.value * self.grad,
                self.value * o.hess + o.value * self.hess + (cross + cross.T),
            )
        return Jet2._make(self.value * other, self.grad * other, self.hess * other)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet2":
        u = self.value
        if u == 0.0:
            raise DifferentiationDomainError("div", u)
        return self._chain(1.0 / u, -1.0 / (u * u), 2.0 / (u * u * u))

    def __truediv__(self, other):
        if isinstance(other, (Tangent, Cplx)):
            return NotImplemented
        if isinstance(other, Jet2):
            return self * self._lift(other).reciprocal()
        if other == 0:
            raise DifferentiationDomainError("div", 0.0)
        return self * (1.0 / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, r):
        return pow_real(self, r)

    # elementary functions
    def _exp(self):
        e = math.exp(self.value)
        return self._chain(e, e, e)

    def _log(self):
        u = self.value
        if u <= 0.0:
            raise DifferentiationDomainError("log", u)
        return self._chain(math.log(u), 1.0 / u, -1.0 / (u * u))

    def _sqrt(self):
        u = self.value
        if u <= 0.0:
            raise DifferentiationDomainError("sqrt", u)
        s = math.sqrt(u)
        return self._chain(s, 0.5 / s, -0.25 / (s * u))

    def _cos(self):
        c, s = math.cos(self.value), math.sin(self.value)
        return self._chain(c, -s, -c)

    def _sin(self):
        c, s = math.cos(self.value), math.sin(self.value)
        return self._chain(s, c, -s)

    def _pow(self, r: float):
        u = self.value
        if float(r).is_integer():
            k = int(r)
            if k == 0:
                return constant(1.0, self.dim)
            if k < 0 and u == 0.0:
                raise DifferentiationDomainError(f"pow_real({r})", u)
            f1 = k * u ** (k - 1)
            f2 = k * (k - 1) * u ** (k - 2) if k != 1 else 0.0
            return self._chain(u**k, f1, f2)
        if u <= 0.0:
            raise DifferentiationDomainError(f"pow_real({r})", u)
        p = u**r
        return self._chain(p, r * p / u, r * (r - 1) * p / (u * u))

    def __repr__(self) -> str:
        return f"Jet2(value={self.value!r}, grad={self.grad.tolist()!r}, hess={self.hess.tolist()!r})"


def seed(point: Sequence[float], index: int) -> Jet2:
    """Jet of the coordinate function ``x_index`` at ``point``."""
    point = np.asarray(point, dtype=float).reshape(-1)
    m = point.shape[0]
    if not 0 <= index < m:
        raise IndexError(f"seed index {index} out of range for {m} coordinates")
    g = np.zeros(m)
    g[index] = 1.0
    return Jet2._make(point[index], g, np.zeros((m, m)))


def constant(c: float, dim: int) -> Jet2:
    return Jet2._make(float(c), np.zeros(dim), np.zeros((dim, dim)))


class Tangent:
    """First-order dual number ``a + b*eps`` with ``eps**2 == 0``.

    ``a`` and ``b`` may be floats or jets.  Immutable.
    """

    __slots__ = ("a", "b")
    __array_priority__ = 200

    def __init__(self, a, b=0.0):
        self.a = a
        self.b = b

    @staticmethod
    def _lift(x) -> "Tangent":
        return x if isinstance(x, Tangent) else Tangent(x, 0.0)

    def __add__(self, other):
        if isinstance(other, Cplx):
            return NotImplemented
        o = Tangent._lift(other)
        return Tangent(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return Tangent(-self.a, -self.b)

    def __sub__(self, other):
        if isinstance(other, Cplx):
            return NotImplemented
        o = Tangent._lift(other)
        return Tangent(self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        return Tangent._lift(other) - self

    def __mul__(self, other):
        if isinstance(other, Cplx):
            return NotImplemented
        o = Tangent._lift(other)
        return Tangent(self.a * o.a, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Cplx):
            return NotImplemented
        o = Tangent._lift(other)
        if _value_of(o.a) == 0.0:
            raise DifferentiationDomainError("div", 0.0)
        inv = 1.0 / o.a
        q = self.a * inv
        return Tangent(q, (self.b - q * o.b) * inv)

    def __rtruediv__(self, other):
        return Tangent._lift(other) / self

    def __pow__(self, r):
        return pow_real(self, r)

    def _exp(self):
        e = exp(self.a)
        return Tangent(e, e * self.b)

    def _log(self):
        return Tangent(log(self.a), self.b / self.a)

    def _sqrt(self):
        s = sqrt(self.a)
        return Tangent(s, self.b / (2.0 * s))

    def _cos(self):
        return Tangent(cos(self.a), -sin(self.a) * self.b)

    def _sin(self):
        return Tangent(sin(self.a), cos(self.a) * self.b)

    def _pow(self, r: float):
        if r == 0:
            return Tangent(pow_real(self.a, 0), 0.0)
        p = pow_real(self.a, r)
        if r == 1:
            return Tangent(p, self.b)
        return Tangent(p, r * pow_real(self.a, r - 1) * self.b)

    def __repr__(self) -> str:
        return f"Tangent({self.a!r}, {self.b!r})"


def _dispatch(name: str, fn: Callable[[float], float], domain_ok: Callable[[float], bool] | None = None):
    def apply(x):
        if isinstance(x, (Jet2, Tangent)):
            return getattr(x, "_" + name)()
        if isinstance(x, Cplx):
            return getattr(x, "_" + name)()
        x = float(x)
        if domain_ok is not None and not domain_ok(x):
            raise DifferentiationDomainError(name, x)
        return fn(x)

    apply.__name__ = name
    return apply


exp = _dispatch("exp", math.exp)
log = _dispatch("log", math.log, lambda u: u > 0.0)
sqrt = _dispatch("sqrt", math.sqrt, lambda u: u >= 0.0)
cos = _dispatch("cos", math.cos)
sin = _dispatch("sin", math.sin)


def pow_real(x, r: float):
    """``x**r`` for a real exponent ``r``; non-integer ``r`` needs ``x > 0``."""
    r = float(r)
    if isinstance(x, (Jet2, Tangent, Cplx)):
        return x._pow(r)
    x = float(x)
    if not r.is_integer() and x <= 0.0:
        raise DifferentiationDomainError(f"pow_real({r})", x)
    if r < 0 and x == 0.0:
        raise DifferentiationDomainError(f"pow_real({r})", x)
    return x**r


def _is_zero(x) -> bool:
    if x is None:
        return True
    if isinstance(x, (int, float)):
        return x == 0.0
    if isinstance(x, Jet2):
        return x.value == 0.0 and not x.grad.any() and not x.hess.any()
    return _is_zero(x.a) and _is_zero(x.b)


class Cplx:
    """Complex number as a pair of real scalars (floats, jets or tangents).

    ``im is None`` marks a structurally real quantity, which lets ``log``,
    ``sqrt`` and non-integer powers stay closed-form.
    """

    __slots__ = ("re", "im")
    __array_priority__ = 300

    def __init__(self, re, im=None):
        self.re = re
        self.im = im

    @staticmethod
    def _lift(x) -> "Cplx":
        if isinstance(x, Cplx):
            return x
        if isinstance(x, complex):
            return Cplx(x.real, x.imag)
        return Cplx(x, None)

    @property
    def is_real(self) -> bool:
        return self.im is None

    def imag(self):
        return 0.0 if self.im is None else self.im

    def __add__(self, other):
        o = Cplx._lift(other)
        if self.im is None and o.im is None:
            return Cplx(self.re + o.re)
        return Cplx(self.re + o.re, self.imag() + o.imag())

    __radd__ = __add__

    def __neg__(self):
        return Cplx(-self.re, None if self.im is None else -self.im)

    def __sub__(self, other):
        return self + (-Cplx._lift(other))

    def __rsub__(self, other):
        return Cplx._lift(other) + (-self)

    def __mul__(self, other):
        o = Cplx._lift(other)
        if self.im is None and o.im is None:
            return Cplx(self.re * o.re)
        if o.im is None:
            return Cplx(self.re * o.re, self.im * o.re)
        if self.im is None:
            return Cplx(self.re * o.re, self.re * o.im)
        return Cplx(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def conj(self) -> "Cplx":
        return Cplx(self.re, None if self.im is None else -self.im)

    def abs2(self):
        """``|w|**2`` as a real scalar."""
        if self.im is None:
            return self.re * self.re
        return self.re * self.re + self.im * self.im

    def __truediv__(self, other):
        o = Cplx._lift(other)
        if o.im is None:
            if isinstance(o.re, (int, float)) and o.re == 0:
                raise DifferentiationDomainError("div", 0.0)
            inv = 1.0 / o.re
            return Cplx(self.re * inv, None if self.im is None else self.im * inv)
        inv = 1.0 / o.abs2()
        return (self * o.conj()) * inv

    def __rtruediv__(self, other):
        return Cplx._lift(other) / self

    def __pow__(self, r):
        return pow_real(self, r)

    def _require_real(self, op: str):
        if self.im is not None and not _is_zero(self.im):
            raise DifferentiationDomainError(op, _value_of(self.im), "argument is not real-valued")
        return self.re

    def _exp(self):
        e = exp(self.re)
        if self.im is None:
            return Cplx(e)
        return Cplx(e * cos(self.im), e * sin(self.im))

    def _log(self):
        return Cplx(log(self._require_real("log")))

    def _sqrt(self):
        return Cplx(sqrt(self._require_real("sqrt")))

    def _cos(self):
        return Cplx(cos(self._require_real("cos")))

    def _sin(self):
        return Cplx(sin(self._require_real("sin")))

    def _pow(self, r: float):
        if self.im is None or _is_zero(self.im):
            return Cplx(pow_real(self.re, r))
        if not r.is_integer():
            raise DifferentiationDomainError(f"pow_real({r})", _value_of(self.im), "non-integer power of a complex value")
        k = int(r)
        base = self if k >= 0 else Cplx(1.0) / self
        out = Cplx(1.0)
        for _ in range(abs(k)):
            out = out * base
        return out

    def __repr__(self) -> str:
        return f"Cplx({self.re!r}, {self.im!r})"


def abs2(w):
    """``|w|**2``; the only modulus primitive (smooth everywhere)."""
    return Cplx._lift(w).abs2()


def _complex_point(point) -> np.ndarray:
    return np.asarray(point, dtype=complex).reshape(-1)


def _realify(point: np.ndarray) -> np.ndarray:
    out = np.empty(2 * point.shape[0])
    out[0::2] = point.real
    out[1::2] = point.imag
    return out


def jet(field: Callable[[list[Cplx]], object], point) -> Jet2:
    """Jet2 of a real field of ``n`` complex variables at ``point``.

    ``field`` receives a list of :class:`Cplx` coordinates and returns a real
    scalar (or a :class:`Cplx` whose real part is taken).
    """
    z = _complex_point(point)
    x = _realify(z)
    coords = [Cplx(seed(x, 2 * j), seed(x, 2 * j + 1)) for j in range(z.shape[0])]
    out = field(coords)
    if isinstance(out, Cplx):
        out = out.re
    if not isinstance(out, Jet2):
        out = constant(float(out), x.shape[0])
    return out


def _evaluate_real(field, x: np.ndarray) -> float:
    coords = [Cplx(float(x[2 * j]), float(x[2 * j + 1])) for j in range(x.shape[0] // 2)]
    out = field(coords)
    if isinstance(out, Cplx):
        out = out.re
    return float(out)


def fd_jet(field, point, step: float = 1e-3) -> Jet2:
    """Finite-difference oracle with the same interface as :func:`jet`.

    Central differences at steps ``h`` and ``h/2`` combined by Richardson
    extrapolation (fourth order in ``h``).
    """
    z = _complex_point(point)
    x0 = _realify(z)
    m = x0.shape[0]
    f0 = _evaluate_real(field, x0)

    def f(dx):
        return _evaluate_real(field, x0 + dx)

    def diffs(h):
        g = np.zeros(m)
        H = np.zeros((m, m))
        e = np.eye(m) * h
        fp = [f(e[i]) for i in range(m)]
        fm = [f(-e[i]) for i in range(m)]
        for i in range(m):
            g[i] = (fp[i] - fm[i]) / (2 * h)
            H[i, i] = (fp[i] - 2 * f0 + fm[i]) / (h * h)
            for j in range(i + 1, m):
                v = (f(e[i] + e[j]) - f(e[i] - e[j]) - f(-e[i] + e[j]) + f(-e[i] - e[j])) / (4 * h * h)
                H[i, j] = H[j, i] = v
        return g, H

    g1, H1 = diffs(step)
    g2, H2 = diffs(step / 2)
    return Jet2(f0, (4 * g2 - g1) / 3, (4 * H2 - H1) / 3)


def within_tolerance(actual, expected, rel: float = REL_TOL, abs_: float = ABS_TOL) -> bool:
    """Relative ``rel`` or absolute ``abs_``, whichever is looser, elementwise."""
    a = np.asarray(actual, dtype=float)
    b = np.asarray(expected, dtype=float)
    return bool(np.all(np.abs(a - b) <= np.maximum(rel * np.abs(b), abs_)))
