"""Small fixed-order Taylor arithmetic for exact high derivatives.

The compactly supported cutoff shapes used in this package (mollifier,
plateau bump, correction envelopes) are built from ``exp(-1/v)`` with
``v`` rational.  Their derivatives up to fourth order are needed exactly
(finite differences cannot reach the required tolerances), and writing
the expressions out by hand is error prone.  A ``Jet`` carries the values
of ``f, f', f'', f''', f''''`` at an array of points and propagates them
through arithmetic with the Leibniz rule, which is exact to rounding.
"""

import numpy as np

ORDER = 4

_BINOM = [[1], [1, 1], [1, 2, 1], [1, 3, 3, 1], [1, 4, 6, 4, 1]]


class Jet:
    """Value and first ``ORDER`` derivatives of a function at given points."""

    __slots__ = ("d",)

    def __init__(self, d):
        self.d = d  # list of ORDER+1 ndarrays: f, f', ..., f''''

    @classmethod
    def variable(cls, x):
        """The identity function evaluated at ``x``."""
        x = np.asarray(x, dtype=float)
        d = [x, np.ones_like(x)] + [np.zeros_like(x) for _ in range(ORDER - 1)]
        return cls(d)

    @classmethod
    def constant(cls, c, like):
        z = np.zeros_like(np.asarray(like, dtype=float))
        return cls([z + c] + [z.copy() for _ in range(ORDER)])

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet([a + b for a, b in zip(self.d, other.d)])
        d = [self.d[0] + other] + [a.copy() for a in self.d[1:]]
        return Jet(d)

    __radd__ = __add__

    def __neg__(self):
        return Jet([-a for a in self.d])

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet) else -np.asarray(other, dtype=float))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet([a * other for a in self.d])
        d = []
        for m in range(ORDER + 1):
            acc = 0.0
            for i in range(m + 1):
                acc = acc + _BINOM[m][i] * self.d[i] * other.d[m - i]
            d.append(acc)
        return Jet(d)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self * (1.0 / other)
        # q = f/g solved from f = q*g order by order.
        q = [self.d[0] / other.d[0]]
        for m in range(1, ORDER + 1):
            acc = self.d[m]
            for i in range(m):
                acc = acc - _BINOM[m][i] * q[i] * other.d[m - i]
            q.append(acc / other.d[0])
        return Jet(q)

    def __rtruediv__(self, other):
        return Jet.constant(other, self.d[0]) / self

    def exp(self):
        e = [np.exp(self.d[0])]
        # E^(m) = sum_{i<m} C(m-1,i) f^(i+1) E^(m-1-i)
        for m in range(1, ORDER + 1):
            acc = 0.0
            for i in range(m):
                acc = acc + _BINOM[m - 1][i] * self.d[i + 1] * e[m - 1 - i]
            e.append(acc)
        return Jet(e)
