"""Order-2 forward-mode jets.

A :class:`Jet2` carries value, gradient and Hessian of a function of k
active variables, batched over numpy arrays.  Evaluators written with
ordinary arithmetic (and the ``g*`` helpers below) can be fed jets to get
exact-to-rounding first and second derivatives, which is how the
differential-operator layer acts on smooth non-polynomial functions.
"""

from __future__ import annotations

import numpy as np


class Jet2:
    __slots__ = ("val", "grad", "hess")

    # make numpy defer to the reflected operators instead of broadcasting
    # jets into object arrays
    __array_ufunc__ = None

    def __init__(self, val, grad, hess):
        self.val = val
        self.grad = grad
        self.hess = hess

    @property
    def nvars(self):
        return self.grad.shape[0]

    def _lift(self, other):
        if isinstance(other, Jet2):
            return other
        val = np.asarray(other) + np.zeros_like(self.val)
        return Jet2(val, np.zeros_like(self.grad), np.zeros_like(self.hess))

    def __add__(self, other):
        o = self._lift(other)
        return Jet2(self.val + o.val, self.grad + o.grad, self.hess + o.hess)

    __radd__ = __add__

    def __neg__(self):
        return Jet2(-self.val, -self.grad, -self.hess)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)
        cross = self.grad[:, None] * o.grad[None, :]
        return Jet2(
            self.val * o.val,
            self.grad * o.val + self.val * o.grad,
            self.hess * o.val + self.val * o.hess + cross + np.swapaxes(cross, 0, 1),
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        return self * o._unary(1.0 / o.val, -1.0 / o.val ** 2, 2.0 / o.val ** 3)

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def _unary(self, f, fp, fpp):
        """Chain rule for a scalar function applied to this jet."""
        outer = self.grad[:, None] * self.grad[None, :]
        return Jet2(f, fp * self.grad, fp * self.hess + fpp * outer)

    def __pow__(self, c):
        if isinstance(c, int) and c >= 0:
            if c == 0:
                one = np.ones_like(self.val)
                return Jet2(one, np.zeros_like(self.grad), np.zeros_like(self.hess))
            out = self
            for _ in range(c - 1):
                out = out * self
            return out
        u = self.val
        return self._unary(u ** c, c * u ** (c - 1), c * (c - 1) * u ** (c - 2))

    def exp(self):
        e = np.exp(self.val)
        return self._unary(e, e, e)

    def sqrt(self):
        s = np.sqrt(self.val)
        return self._unary(s, 0.5 / s, -0.25 / (s * self.val))

    def log(self):
        return self._unary(np.log(self.val), 1.0 / self.val, -1.0 / self.val ** 2)

    def cos(self):
        c, s = np.cos(self.val), np.sin(self.val)
        return self._unary(c, -s, -c)

    def sin(self):
        c, s = np.cos(self.val), np.sin(self.val)
        return self._unary(s, c, -s)

    def arccos(self):
        u = self.val
        w = 1.0 - u * u
        return self._unary(np.arccos(u), -w ** -0.5, -u * w ** -1.5)


def seed(*value_arrays):
    """Turn k arrays (same shape) into k active jet variables."""
    arrays = [np.asarray(a, dtype=complex) for a in value_arrays]
    k = len(arrays)
    shape = arrays[0].shape
    jets = []
    for i, a in enumerate(arrays):
        grad = np.zeros((k,) + shape, dtype=complex)
        grad[i] = 1.0
        jets.append(Jet2(a, grad, np.zeros((k, k) + shape, dtype=complex)))
    return jets


def constant(value, like: Jet2):
    return like._lift(value)


# Generic math wrappers: dispatch between jets and plain numpy values, so a
# single evaluator body serves both numeric evaluation and differentiation.

def gexp(u):
    return u.exp() if isinstance(u, Jet2) else np.exp(u)


def gsqrt(u):
    return u.sqrt() if isinstance(u, Jet2) else np.sqrt(u)


def gcos(u):
    return u.cos() if isinstance(u, Jet2) else np.cos(u)


def gsin(u):
    return u.sin() if isinstance(u, Jet2) else np.sin(u)


def garccos(u):
    return u.arccos() if isinstance(u, Jet2) else np.arccos(u)


def gpow(u, c):
    return u ** c


def value_of(u):
    return u.val if isinstance(u, Jet2) else u
