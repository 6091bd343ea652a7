"""Separating family of test functions adapted to half-line boundary conditions.

The family is indexed by (k, j).  The backbone members are the normalized
Gaussian monomials f_k(x) = x^k exp(-x^2) / ||x^k exp(-x^2)||.  Members with
k >= 5 vanish to fourth order at 0 and need no adaptation.  For k in {1..4}
the member is shifted away from the boundary by 4/j, reflected evenly and
mollified at scale 1/j, so it vanishes identically near 0 while still
converging uniformly to f_k as j grows.  For k = 0 a polynomial correction
P is glued in near the boundary with a smooth plateau bump so that both
f_{0,j} and its second derivative satisfy the boundary condition
c1 f(0) - c2 f'(0) + (c3/2) f''(0) = 0.  The index j = 0 carries the
unadapted backbone f_k for every k.

Every member exposes exact derivatives up to fourth order, so L f = f''/2
and L^2 f = f''''/4 are available without finite differencing.
"""

import functools
from math import comb

import numpy as np
from numpy.polynomial import Polynomial
from scipy.integrate import quad

from .jets import Jet

GAUSS_LEGENDRE_POINTS = 192

_ROOT2 = np.sqrt(2.0)


def norm_f_tilde(k):
    """Exact sup norm of x^k exp(-x^2) on [0, inf); equals (k/2)^{k/2} e^{-k/2}."""
    if k < 0:
        raise ValueError("k must be a nonnegative integer")
    if k == 0:
        return 1.0
    return (k / 2.0) ** (k / 2.0) * np.exp(-k / 2.0)


@functools.lru_cache(maxsize=1)
def _mollifier_mass():
    # Normalizer of exp(-1/(1-y^2)) on (-1, 1).
    val, err = quad(lambda y: np.exp(-1.0 / (1.0 - y * y)), -1.0, 1.0)
    if err > 1e-9:
        raise RuntimeError("mollifier normalizer did not converge")
    return val


def _phi1_derivs(y, m_max=4):
    """Derivatives 0..m_max of the unit mollifier exp(-1/(1-y^2))/c on (-1, 1).

    The value-only case skips the jet arithmetic; its operation order matches
    the jet's zeroth coefficient, so both paths round identically.
    """
    y = np.asarray(y, dtype=float)
    flat = y.reshape(-1)
    out = np.zeros((m_max + 1, flat.size))
    inside = np.abs(flat) < 1.0
    if np.any(inside):
        if m_max == 0:
            t = flat[inside] * flat[inside]
            out[0, inside] = np.exp(-1.0 / (1.0 - t)) \
                * (1.0 / _mollifier_mass())
        else:
            yi = Jet.variable(flat[inside])
            phi = (-1.0 / (1.0 - yi * yi)).exp() * (1.0 / _mollifier_mass())
            for m in range(m_max + 1):
                out[m, inside] = phi.d[m]
    return out.reshape((m_max + 1,) + y.shape)


def mollifier(j, x, order=0):
    """Order-th derivative of the scale-j mollifier, phi_j(x) = j*phi_1(j*x)."""
    if j < 1:
        raise ValueError("mollifier scale j must be >= 1")
    if not 0 <= order <= 4:
        raise ValueError("derivative order must be in 0..4")
    x = np.asarray(x, dtype=float)
    return float(j) ** (order + 1) * _phi1_derivs(j * x, order)[order]


def _bump1_derivs(t, m_max=4):
    """Derivatives 0..m_max of the plateau bump: 1 on |t|<=1, 0 on |t|>=sqrt(2).

    As in _phi1_derivs, the value-only case rounds identically to the jet path.
    """
    t = np.asarray(t, dtype=float)
    flat = t.reshape(-1)
    a = np.abs(flat)
    out = np.zeros((m_max + 1, flat.size))
    out[0, a <= 1.0] = 1.0
    mid = (a > 1.0) & (a < _ROOT2)
    if np.any(mid):
        if m_max == 0:
            t2 = flat[mid] * flat[mid]
            s0 = np.exp(-1.0 / (t2 - 1.0))   # vanishes as |t| -> 1+
            r0 = np.exp(-1.0 / (2.0 - t2))   # vanishes as |t| -> sqrt(2)-
            out[0, mid] = r0 / (s0 + r0)
        else:
            tm = Jet.variable(flat[mid])
            s = (-1.0 / (tm * tm - 1.0)).exp()   # vanishes as |t| -> 1+
            r = (-1.0 / (2.0 - tm * tm)).exp()   # vanishes as |t| -> sqrt(2)-
            b = r / (s + r)
            for m in range(m_max + 1):
                out[m, mid] = b.d[m]
    return out.reshape((m_max + 1,) + t.shape)


def bump(j, t, order=0):
    """Order-th derivative of the scale-j plateau bump b_j(t) = b_1(j*t)."""
    if j < 1:
        raise ValueError("bump scale j must be >= 1")
    if not 0 <= order <= 4:
        raise ValueError("derivative order must be in 0..4")
    t = np.asarray(t, dtype=float)
    return float(j) ** order * _bump1_derivs(j * t, order)[order]


def _as_poly(p):
    coef = p.coef if isinstance(p, Polynomial) else p
    return Polynomial(np.asarray(coef, dtype=float))


class PolyGauss:
    """p(x) * exp(-x^2) with exact derivatives (p polynomial)."""

    def __init__(self, p):
        self.p = _as_poly(p)
        derivs = [self.p]
        for _ in range(4):
            q = derivs[-1]
            derivs.append(q.deriv() - Polynomial([0.0, 2.0]) * q)
        self._derivs = derivs

    def deriv(self, x, order=0):
        x = np.asarray(x, dtype=float)
        return self._derivs[order](x) * np.exp(-x * x)

    def __call__(self, x):
        return self.deriv(x, 0)


def backbone(k):
    """The normalized member f_k = x^k exp(-x^2) / ||x^k exp(-x^2)||."""
    coeffs = np.zeros(k + 1)
    coeffs[k] = 1.0 / norm_f_tilde(k)
    return PolyGauss(coeffs)


@functools.lru_cache(maxsize=2)
def _leggauss():
    return np.polynomial.legendre.leggauss(GAUSS_LEGENDRE_POINTS)


class ShiftedMollified:
    """Backbone shifted right by 4/j, evenly reflected, mollified at scale 1/j.

    The shifted profile g has k continuous derivatives (f_k vanishes to order
    k at 0), so an order-m derivative of the convolution moves min(m, k)
    derivatives onto g and the rest onto the mollifier.  The integrand
    vanishes for y > x - 4/j, hence each evaluation is a single
    Gauss-Legendre panel over [-1/j, min(x - 4/j, 1/j)] on which the
    integrand is smooth up to the edge.
    """

    def __init__(self, k, j):
        if not 1 <= k <= 4:
            raise ValueError("shifted members exist for k in 1..4")
        if j < 1:
            raise ValueError("shift scale j must be >= 1")
        self.k = k
        self.j = j
        self.shift = 4.0 / j
        self.radius = 1.0 / j
        self._base = backbone(k)

    def derivs(self, x, orders):
        """Derivatives at several orders sharing one quadrature panel."""
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        ax = np.abs(np.atleast_1d(x)).ravel()
        outs = [np.zeros_like(ax) for _ in orders]
        upper = np.minimum(ax - self.shift, self.radius)
        active = upper > -self.radius
        if np.any(active):
            nodes, weights = _leggauss()
            half = 0.5 * (upper[active] + self.radius)
            mid = 0.5 * (upper[active] - self.radius)
            y = mid[:, None] + half[:, None] * nodes[None, :]
            arg = ax[active][:, None] - y - self.shift
            m_max = max(order - min(order, self.k) for order in orders)
            phi = _phi1_derivs(self.j * y, m_max)
            for out, order in zip(outs, orders):
                i = min(order, self.k)
                pvals = float(self.j) ** (order - i + 1) * phi[order - i]
                out[active] = half * ((self._base.deriv(arg, i) * pvals) @ weights)
        neg = np.asarray(x).ravel() < 0
        for out, order in zip(outs, orders):
            if order % 2 == 1:
                out[neg] = -out[neg]
        if scalar:
            return tuple(out.reshape(()) for out in outs)
        return tuple(out.reshape(x.shape) for out in outs)

    def deriv(self, x, order=0):
        return self.derivs(x, (order,))[0]

    def __call__(self, x):
        return self.deriv(x, 0)


class BumpCorrected:
    """exp(-x^2) + b_j(x) P(x): the k = 0 member glued to the boundary condition."""

    def __init__(self, j, poly):
        if j < 1:
            raise ValueError("bump scale j must be >= 1")
        self.j = j
        self.poly = _as_poly(poly)
        self._gauss = PolyGauss([1.0])
        self._pderivs = [self.poly]
        for _ in range(4):
            self._pderivs.append(self._pderivs[-1].deriv())

    def deriv(self, x, order=0):
        x = np.asarray(x, dtype=float)
        b = _bump1_derivs(self.j * x, order)
        out = self._gauss.deriv(x, order)
        for i in range(order + 1):
            out = out + comb(order, i) * float(self.j) ** i * b[i] \
                * self._pderivs[order - i](x)
        return out

    def __call__(self, x):
        return self.deriv(x, 0)


def _cond_triple(cond):
    if hasattr(cond, "c1"):
        return float(cond.c1), float(cond.c2), float(cond.c3)
    c1, c2, c3 = cond
    return float(c1), float(c2), float(c3)


def boundary_polynomial(cond):
    """Minimal polynomial P, P(0) = 0, gluing exp(-x^2) to the boundary condition.

    Both F = exp(-x^2) + P and F'' must satisfy
    c1 F(0) - c2 F'(0) + (c3/2) F''(0) = 0.  With c2 > 0 the free coefficients
    are the odd ones (a2 = a4 = 0); with c2 = 0 and c3 > 0 the even ones
    (a1 = a3 = 0).  The killed condition (c2 = c3 = 0) admits no such P.
    """
    c1, c2, c3 = _cond_triple(cond)
    if c2 > 0.0:
        a1 = (c1 - c3) / c2
        a3 = (3.0 * c3 - c1) / (3.0 * c2)
        coeffs = [0.0, a1, 0.0, a3, 0.0]
    elif c3 > 0.0:
        a2 = (c3 - c1) / c3
        a4 = c1 * c1 / (6.0 * c3 * c3) - 0.5
        coeffs = [0.0, 0.0, a2, 0.0, a4]
    else:
        raise ValueError(
            "boundary-polynomial-unavailable: killed condition (c2 = c3 = 0) "
            "drops the k = 0 member")
    p = Polynomial(coeffs)
    # F(0) = 1, F'(0) = a1, F''(0) = -2 + 2 a2, and the same identity for F''.
    r1 = c1 * 1.0 - c2 * coeffs[1] + 0.5 * c3 * (-2.0 + 2.0 * coeffs[2])
    r2 = c1 * (-2.0 + 2.0 * coeffs[2]) - c2 * 6.0 * coeffs[3] \
        + 0.5 * c3 * (12.0 + 24.0 * coeffs[4])
    if abs(r1) > 1e-12 or abs(r2) > 1e-12:
        raise AssertionError("boundary polynomial residuals exceed 1e-12")
    return p


def family_member(cond, k, j):
    """Member (k, j): backbone for j = 0 or k >= 5, adapted member otherwise."""
    if k < 0 or j < 0:
        raise ValueError("family indices must be nonnegative")
    if j == 0 or k >= 5:
        return backbone(k)
    if k == 0:
        return BumpCorrected(j, boundary_polynomial(cond))
    return ShiftedMollified(k, j)


class TestFunctionFamily:
    """Truncated separating family {f_{k,j}} with weights 2^-(k+j)."""

    def __init__(self, cond, K, J, killed=False):
        if K < 1 or J < 0:
            raise ValueError("need K >= 1 and J >= 0")
        self.cond = cond
        self.K = K
        self.J = J
        self.killed = killed
        self.k_min = 1 if killed else 0
        self._members = {}
        for k in range(self.k_min, K + 1):
            for j in range(J + 1):
                key = (k, 0) if k >= 5 else (k, j)
                if key not in self._members:
                    self._members[key] = family_member(cond, *key)

    def member(self, k, j):
        if not (self.k_min <= k <= self.K and 0 <= j <= self.J):
            raise KeyError((k, j))
        return self._members[(k, 0) if k >= 5 else (k, j)]

    def cache_key(self):
        """Families with equal parameters build identical members, so this
        tuple is a safe memoization key for integrals against the family."""
        return _cond_triple(self.cond) + (self.K, self.J, self.killed)

    def items(self):
        """Yield (k, j, weight, member) over the truncated index set."""
        for k in range(self.k_min, self.K + 1):
            for j in range(self.J + 1):
                yield k, j, 2.0 ** (-(k + j)), self.member(k, j)

    def tail_bound(self):
        """Exact tail sum_{(k,j) outside truncation} 2^-(k+j), k >= k_min."""
        total = 2.0 ** (1 - self.k_min) * 2.0
        partial = (2.0 ** (1 - self.k_min) - 2.0 ** (-self.K)) * (2.0 - 2.0 ** (-self.J))
        return total - partial


def build_family(cond, K=16, J=16, killed=False):
    return TestFunctionFamily(cond, K, J, killed=killed)


def apply_L(member, x):
    """Generator action (1/2) f'' of the free half-line motion."""
    return 0.5 * member.deriv(x, 2)


def apply_L2(member, x):
    """Second generator power (1/4) f''''."""
    return 0.25 * member.deriv(x, 4)


def _loglog_slope(xs, ys):
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    return np.polyfit(np.log(xs), np.log(ys), 1)[0]


def verify_G2_G3(cond, K=8, j_values=range(2, 41), grid=None, killed=False):
    """Measure the growth envelopes h1(j) >= sup_k ||L f_{k,j}||, h2 for L^2.

    Returns per-j envelopes, fitted log-log growth exponents (flagged against
    the j^2 / j^4 ceilings), envelope constants C1 = max h1/j^2 and
    C2 = max h2/j^4, the weighted sums sum_j 2^-j h_i(j), and the backbone
    norm sum sum_k 2^-k ||f_k|| against its geometric value.
    """
    if grid is None:
        grid = np.linspace(0.0, 9.0, 3001)
    j_values = np.asarray(list(j_values), dtype=int)
    k_min = 1 if killed else 0
    # members with k >= 5 are the backbone for every j: hoist their sups
    base1 = max(np.max(np.abs(apply_L(backbone(k), grid)))
                for k in range(5, K + 1)) if K >= 5 else 0.0
    base2 = max(np.max(np.abs(apply_L2(backbone(k), grid)))
                for k in range(5, K + 1)) if K >= 5 else 0.0
    h1 = np.zeros(len(j_values))
    h2 = np.zeros(len(j_values))
    for idx, j in enumerate(j_values):
        sup1, sup2 = base1, base2
        for k in range(k_min, min(K, 4) + 1):
            m = family_member(cond, k, int(j))
            if hasattr(m, "derivs"):
                # mollified member: nonzero only past 3/j, negligible past
                # the backbone's decay; quadrature is the dominant cost
                g = grid[(grid >= m.shift - m.radius)
                         & (grid <= m.shift + m.radius + 7.0)]
                d2, d4 = m.derivs(g, (2, 4))
            else:
                d2, d4 = m.deriv(grid, 2), m.deriv(grid, 4)
            sup1 = max(sup1, 0.5 * np.max(np.abs(d2)))
            sup2 = max(sup2, 0.25 * np.max(np.abs(d4)))
        h1[idx] = sup1
        h2[idx] = sup2
    norm_sum = sum(2.0 ** (-k) * np.max(np.abs(backbone(k)(grid)))
                   for k in range(k_min, K + 1))
    expected = (2.0 ** (1 - k_min)) - 2.0 ** (-K)
    e1 = _loglog_slope(j_values, h1)
    e2 = _loglog_slope(j_values, h2)
    jf = j_values.astype(float)
    return {
        "j": j_values,
        "h1": h1,
        "h2": h2,
        "h1_exponent": float(e1),
        "h2_exponent": float(e2),
        "h1_exponent_ok": bool(e1 <= 2.2),
        "h2_exponent_ok": bool(e2 <= 4.3),
        "C1": float(np.max(h1 / jf ** 2)),
        "C2": float(np.max(h2 / jf ** 4)),
        "h1_weighted_sum": float(np.sum(2.0 ** (-jf) * h1)),
        "h2_weighted_sum": float(np.sum(2.0 ** (-jf) * h2)),
        "norm_sum": float(norm_sum),
        "norm_sum_expected": float(expected),
        "norm_sum_ok": bool(abs(norm_sum - expected) <= 1e-4 * expected),
    }
