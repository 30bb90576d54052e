"""Two-level truncated Taylor algebra (batched forward-mode jets).

A :class:`Jet` carries the value of a scalar expression together with its
gradient and Hessian with respect to the chart parameters, propagated exactly
through every arithmetic operation.  Values are vectorized over a batch of
evaluation points: ``value`` has shape ``(N,)``, ``grad`` shape ``(N, n)`` and
``hess`` shape ``(N, n, n)``.  Jets of order 0 or 1 drop the higher arrays,
which keeps pure-value sweeps (quadrature grids, level-set scans) cheap.

All operations allocate fresh arrays; jets are immutable in practice and safe
to share across threads.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

_NODE = "<expression>"  # callers re-raise DomainError with the source snippet


class Jet:
    __slots__ = ("value", "grad", "hess")

    def __init__(self, value, grad=None, hess=None):
        self.value = value
        self.grad = grad
        self.hess = hess

    # -- constructors --------------------------------------------------------

    @staticmethod
    def parameter(points: np.ndarray, index: int, order: int = 2) -> "Jet":
        """Seed jet for parameter ``index`` (0-based) at a batch of points."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        npts, dim = points.shape
        value = points[:, index].copy()
        if order == 0:
            return Jet(value)
        grad = np.zeros((npts, dim))
        grad[:, index] = 1.0
        if order == 1:
            return Jet(value, grad)
        return Jet(value, grad, np.zeros((npts, dim, dim)))

    @property
    def order(self) -> int:
        if self.hess is not None:
            return 2
        if self.grad is not None:
            return 1
        return 0

    # -- ring operations -----------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(
                self.value + other.value,
                None if self.grad is None else self.grad + other.grad,
                None if self.hess is None else self.hess + other.hess,
            )
        return Jet(self.value + other, self.grad, self.hess)

    __radd__ = __add__

    def __neg__(self):
        return Jet(
            -self.value,
            None if self.grad is None else -self.grad,
            None if self.hess is None else -self.hess,
        )

    def __sub__(self, other):
        if isinstance(other, Jet):
            return Jet(
                self.value - other.value,
                None if self.grad is None else self.grad - other.grad,
                None if self.hess is None else self.hess - other.hess,
            )
        return Jet(self.value - other, self.grad, self.hess)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(
                self.value * other,
                None if self.grad is None else self.grad * other,
                None if self.hess is None else self.hess * other,
            )
        u, w = self, other
        value = u.value * w.value
        grad = hess = None
        if u.grad is not None:
            grad = u.grad * w.value[:, None] + w.grad * u.value[:, None]
        if u.hess is not None:
            cross = u.grad[:, :, None] * w.grad[:, None, :]
            hess = (
                u.hess * w.value[:, None, None]
                + w.hess * u.value[:, None, None]
                + cross
                + cross.transpose(0, 2, 1)
            )
        return Jet(value, grad, hess)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            if other == 0:
                raise DomainError(_NODE, "division by zero constant")
            return self * (1.0 / other)
        return self * other._reciprocal()

    def __rtruediv__(self, other):
        return self._reciprocal() * other

    def _reciprocal(self):
        if np.any(self.value == 0.0):
            raise DomainError(_NODE, "division by zero")
        inv = 1.0 / self.value
        return self._compose(inv, -inv * inv, 2.0 * inv**3)

    def __pow__(self, other):
        if isinstance(other, Jet):
            varies = bool(other.value.size) and np.ptp(other.value) != 0.0
            if other.grad is not None and np.any(other.grad != 0.0):
                varies = True
            if varies:
                # parameter-dependent exponent: a^b = exp(b*log(a)), a > 0
                if np.any(self.value <= 0.0):
                    raise DomainError(
                        _NODE, "power with non-constant exponent needs positive base"
                    )
                return jexp(other * jlog(self))
            other = float(other.value.flat[0]) if other.value.size else 0.0
        return self.pow_const(float(other))

    def __rpow__(self, base):
        if base <= 0.0:
            raise DomainError(_NODE, "power with non-constant exponent needs positive base")
        return jexp(self * np.log(base))

    def pow_const(self, k: float) -> "Jet":
        if k == round(k) and abs(k) < 1e9:
            k = int(round(k))
            if k < 0 and np.any(self.value == 0.0):
                raise DomainError(_NODE, "zero base with negative exponent")
            v = self.value
            return self._compose(
                v**k,
                k * _safe_int_pow(v, k - 1),
                k * (k - 1) * _safe_int_pow(v, k - 2),
            )
        if np.any(self.value <= 0.0):
            raise DomainError(_NODE, "non-integer exponent needs positive base")
        v = self.value
        return self._compose(v**k, k * v ** (k - 1.0), k * (k - 1.0) * v ** (k - 2.0))

    # -- composition with a scalar function ----------------------------------

    def _compose(self, f, df, ddf):
        """Chain rule through f: value f(v), gradient f'(v)∇v, and Hessian
        f'(v)∇²v + f''(v)∇v∇vᵀ."""
        grad = hess = None
        if self.grad is not None:
            grad = df[:, None] * self.grad
        if self.hess is not None:
            outer = self.grad[:, :, None] * self.grad[:, None, :]
            hess = df[:, None, None] * self.hess + ddf[:, None, None] * outer
        return Jet(f, grad, hess)


def _safe_int_pow(v, k):
    """v**k for integer k, with negative powers guarded by the caller."""
    if k >= 0:
        return v ** k
    return 1.0 / v ** (-k)


# -- transcendental functions (accept Jet or plain ndarray/float) -------------

def _as_value(x):
    return x.value if isinstance(x, Jet) else x


def jsin(x):
    if isinstance(x, Jet):
        v = x.value
        return x._compose(np.sin(v), np.cos(v), -np.sin(v))
    return np.sin(x)


def jcos(x):
    if isinstance(x, Jet):
        v = x.value
        return x._compose(np.cos(v), -np.sin(v), -np.cos(v))
    return np.cos(x)


def jtan(x):
    v = _as_value(x)
    c = np.cos(v)
    if np.any(c == 0.0):
        raise DomainError(_NODE, "tangent pole")
    if not isinstance(x, Jet):
        return np.tan(x)
    t = np.tan(v)
    d = 1.0 + t * t
    return x._compose(t, d, 2.0 * t * d)


def jsinh(x):
    if isinstance(x, Jet):
        v = x.value
        return x._compose(np.sinh(v), np.cosh(v), np.sinh(v))
    return np.sinh(x)


def jcosh(x):
    if isinstance(x, Jet):
        v = x.value
        return x._compose(np.cosh(v), np.sinh(v), np.cosh(v))
    return np.cosh(x)


def jtanh(x):
    if isinstance(x, Jet):
        t = np.tanh(x.value)
        d = 1.0 - t * t
        return x._compose(t, d, -2.0 * t * d)
    return np.tanh(x)


def jexp(x):
    if isinstance(x, Jet):
        e = np.exp(x.value)
        return x._compose(e, e, e)
    return np.exp(x)


def jlog(x):
    v = _as_value(x)
    if np.any(v <= 0.0):
        raise DomainError(_NODE, "logarithm of a nonpositive value")
    if not isinstance(x, Jet):
        return np.log(x)
    return x._compose(np.log(v), 1.0 / v, -1.0 / (v * v))


def jsqrt(x):
    v = _as_value(x)
    if np.any(v < 0.0):
        raise DomainError(_NODE, "square root of a negative value")
    if not isinstance(x, Jet):
        return np.sqrt(x)
    if x.order > 0 and np.any(v == 0.0):
        raise DomainError(_NODE, "square root not differentiable at zero")
    s = np.sqrt(v)
    return x._compose(s, 0.5 / s, -0.25 / (s * v))


def jabs(x):
    v = _as_value(x)
    if not isinstance(x, Jet):
        return np.abs(x)
    if x.order > 0 and np.any(v == 0.0):
        raise DomainError(_NODE, "absolute value not differentiable at zero")
    sign = np.sign(v)
    return x._compose(np.abs(v), sign, np.zeros_like(v))
