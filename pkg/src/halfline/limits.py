"""Limit laws of the boundary walk: Brownian motions with a Wentzell boundary.

Every limit process is Brownian motion on [0, inf) whose generator f''/2 acts
on the domain cut out by c1 f(0) - c2 f'(0) + (c3/2) f''(0) = 0 with
(c1, c2, c3) on the simplex.  The zero pattern of the triple names the
regime (reflected, elastic, sticky, mixed, EHBM, absorbed, killed).

Laws are computed two ways: textbook image-method kernels where those are
classical (reflected, absorbed/killed, elastic), and a forward Wentzell PDE
solver (Crank-Nicolson on a finite-volume grid whose boundary row encodes
the dynamic condition) that serves as the single reference for sticky,
EHBM and mixed.  Mass lost through the boundary is booked into the atom at
Delta (killing) or the atom at 0 (sticky occupation / absorption).
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.integrate import simpson
from scipy.linalg import solve_banded
from scipy.special import erf, erfcx

REGIMES = ("elastic", "sticky", "EHBM", "reflected", "absorbed", "mixed",
           "killed")

CLOSED_FORM_REGIMES = ("reflected", "absorbed", "killed", "elastic")

MASS_TOL = 1e-6


def classify_triple(c1, c2, c3):
    """Regime tag from the zero pattern of the boundary triple."""
    if abs(c1 + c2 + c3 - 1.0) > 1e-12:
        raise ValueError("boundary triple must lie on the unit simplex")
    if min(c1, c2, c3) < 0:
        raise ValueError("boundary triple must be nonnegative")
    if c1 == 1.0:
        return "killed"
    if c2 == 1.0:
        return "reflected"
    if c3 == 1.0:
        return "absorbed"
    if c3 == 0.0:
        return "elastic"            # c1, c2 both in (0, 1)
    if c1 == 0.0:
        return "sticky"             # c2, c3 both in (0, 1)
    if c2 == 0.0:
        return "EHBM"               # c1, c3 both in (0, 1)
    return "mixed"


@dataclass(frozen=True)
class BoundaryCondition:
    """Simplex triple (c1, c2, c3) with its regime tag."""

    c1: float
    c2: float
    c3: float
    regime: str = ""

    def __post_init__(self):
        tag = classify_triple(self.c1, self.c2, self.c3)
        if self.regime == "":
            object.__setattr__(self, "regime", tag)
        elif self.regime != tag:
            raise ValueError(
                f"regime {self.regime!r} inconsistent with triple "
                f"({self.c1}, {self.c2}, {self.c3}) which classifies as {tag!r}")

    @property
    def triple(self):
        return (self.c1, self.c2, self.c3)

    def gamma(self):
        """Robin coefficient c1/c2 of the elastic boundary condition."""
        if self.c2 == 0.0:
            raise ValueError("gamma undefined when c2 = 0")
        return self.c1 / self.c2


def params_to_limit(alpha, beta=None, A=None, B=None):
    """The limit boundary triple for walk exponents (alpha, beta, A, B).

    Accepts a BoundaryParams-like object or the four numbers.  A = 0 and
    alpha = inf are the same absent jump (likewise B, beta).
    """
    if beta is None:
        p = alpha
        alpha, beta, A, B = p.alpha, p.beta, p.A, p.B
    if A == 0.0:
        alpha = math.inf
    if B == 0.0:
        beta = math.inf
    if alpha < 0 or beta < 0 or A < 0 or B < 0:
        raise ValueError("negative walk parameters")
    if beta < 1.0:
        if alpha > beta + 1.0:
            return BoundaryCondition(0.0, 1.0, 0.0)
        if alpha == beta + 1.0:
            return BoundaryCondition(A / (A + B), B / (A + B), 0.0)
        return BoundaryCondition(1.0, 0.0, 0.0)
    if beta == 1.0:
        if alpha > 2.0:
            return BoundaryCondition(0.0, B / (B + 1.0), 1.0 / (B + 1.0))
        if alpha == 2.0:
            s = 1.0 + A + B
            return BoundaryCondition(A / s, B / s, 1.0 / s)
        return BoundaryCondition(1.0, 0.0, 0.0)
    if beta > 1.0:
        if alpha > 2.0:
            return BoundaryCondition(0.0, 0.0, 1.0)
        if alpha == 2.0:
            return BoundaryCondition(A / (1.0 + A), 0.0, 1.0 / (1.0 + A))
        return BoundaryCondition(1.0, 0.0, 0.0)
    raise ValueError("no-limit-classified: exponents outside all regimes")


def gauss_kernel(t, z):
    """Free heat kernel exp(-z^2/2t)/sqrt(2 pi t) of d/dt = (1/2) d2/dz2."""
    return np.exp(-z * z / (2.0 * t)) / math.sqrt(2.0 * math.pi * t)


def kernel_closed_form(cond, t, x, y):
    """Transition density p_t(x, y) for the image-method regimes."""
    if t <= 0:
        raise ValueError("time must be positive")
    if cond.regime not in CLOSED_FORM_REGIMES:
        raise ValueError(f"no closed form for regime {cond.regime!r}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x < 0) or np.any(y < 0):
        raise ValueError("positions must be nonnegative")
    if cond.regime == "reflected":
        return gauss_kernel(t, y - x) + gauss_kernel(t, y + x)
    if cond.regime in ("absorbed", "killed"):
        return gauss_kernel(t, y - x) - gauss_kernel(t, y + x)
    gamma = cond.gamma()
    s = (x + y + gamma * t) / math.sqrt(2.0 * t)
    robin = gamma * math.sqrt(2.0 * math.pi * t) * gauss_kernel(t, x + y) \
        * erfcx(s)
    return gauss_kernel(t, y - x) + gauss_kernel(t, y + x) - robin


def survival_closed_form(cond, t, x):
    """Mass still on (0, inf) at time t for the image-method regimes."""
    if t <= 0:
        raise ValueError("time must be positive")
    if cond.regime not in CLOSED_FORM_REGIMES:
        raise ValueError(f"no closed form for regime {cond.regime!r}")
    if cond.regime == "reflected":
        return 1.0
    base = float(erf(x / math.sqrt(2.0 * t)))
    if cond.regime in ("absorbed", "killed"):
        return base
    gamma = cond.gamma()
    s = (x + gamma * t) / math.sqrt(2.0 * t)
    return base + float(np.exp(-x * x / (2.0 * t)) * erfcx(s))


@dataclass
class ContinuousLaw:
    """Density on a uniform grid plus atoms at 0 and at the cemetery."""

    xs: np.ndarray
    density: np.ndarray
    atom_zero: float = 0.0
    atom_delta: float = 0.0

    def __post_init__(self):
        if len(self.xs) != len(self.density):
            raise ValueError("grid and density lengths differ")

    @property
    def dx(self):
        return float(self.xs[1] - self.xs[0])

    def total_mass(self):
        return self.atom_zero + self.atom_delta \
            + float(simpson(self.density, x=self.xs))

    def expect(self, f):
        """atom_zero*f(0) + Simpson quadrature of density*f; f(Delta) = 0."""
        fx = np.asarray(f(self.xs), dtype=float)
        return self.atom_zero * float(f(np.asarray(0.0))) \
            + float(simpson(self.density * fx, x=self.xs))

    def to_csv_rows(self):
        rows = [f"delta_atom,{float(self.atom_delta)!r}",
                f"zero_atom,{float(self.atom_zero)!r}",
                "x,density"]
        rows += [f"{float(x)!r},{float(q)!r}"
                 for x, q in zip(self.xs, self.density)]
        return rows

    @classmethod
    def from_csv_rows(cls, rows):
        atom_delta = atom_zero = None
        xs, density = [], []
        for row in rows:
            key, val = row.split(",")
            if key == "delta_atom":
                atom_delta = float(val)
            elif key == "zero_atom":
                atom_zero = float(val)
            elif key == "x":
                continue
            else:
                xs.append(float(key))
                density.append(float(val))
        if atom_delta is None or atom_zero is None:
            raise ValueError("missing atom header rows")
        return cls(np.asarray(xs), np.asarray(density),
                   atom_zero=atom_zero, atom_delta=atom_delta)


def integrate_against(law, f):
    """Integral of f against the law; f(Delta) = 0 (sub-probability view)."""
    return law.expect(f)


def default_grid(u, t, x_max=None, dx=None, dt=None):
    if x_max is None:
        x_max = u + 10.0 * max(1.0, math.sqrt(t))
    if dx is None:
        dx = 1e-3 * x_max
    if dt is None:
        dt = t / 2000.0
    if x_max <= u or dx <= 0 or dt <= 0 or dx >= x_max / 8:
        raise ValueError("invalid grid spec")
    return x_max, dx, dt


def closed_form_law(cond, u, t, x_max=None, dx=None):
    """ContinuousLaw from the image-method kernel with analytic atoms."""
    x_max, dx, _ = default_grid(u, t, x_max, dx, dt=1.0)
    xs = np.arange(0.0, x_max + dx / 2, dx)
    density = kernel_closed_form(cond, t, u, xs)
    deficit = max(1.0 - survival_closed_form(cond, t, u), 0.0)
    atom_zero = deficit if cond.regime == "absorbed" else 0.0
    atom_delta = deficit if cond.regime in ("killed", "elastic") else 0.0
    return ContinuousLaw(xs, density, atom_zero=atom_zero,
                         atom_delta=atom_delta)


def _cn_forward(cond, q0_full, h, dt, steps, azero0=0.0, delta0=0.0):
    """Crank-Nicolson march of the forward Wentzell system.

    State: density nodes (0..N-1 free, N clamped to 0), the sticky/absorbed
    atom at 0 and the cemetery atom.  The boundary row is the finite-volume
    half-cell balance, so the scheme conserves (trapezoid mass + atoms)
    exactly up to the far-field leak.
    """
    c1, c2, c3 = cond.triple
    n_free = len(q0_full) - 1
    q = q0_full[:n_free].copy()
    delta = delta0
    azero = azero0

    if c2 > 0.0:
        w = np.ones(n_free)
        w[0] = h / 2.0 + c3 / (2.0 * c2)
        lower = np.full(n_free, 1.0 / (2.0 * h * h))
        upper = np.full(n_free, 1.0 / (2.0 * h * h))
        diag = np.full(n_free, -1.0 / (h * h))
        upper[1] = 1.0 / (2.0 * h)          # row 0 couples to node 1
        diag[0] = -(1.0 / (2.0 * h) + c1 / (2.0 * c2))
        kill = c1 / (2.0 * c2)

        def rhs_mat(qv):
            out = np.empty_like(qv)
            out[0] = diag[0] * qv[0] + upper[1] * qv[1]
            out[1:-1] = (qv[:-2] - 2.0 * qv[1:-1] + qv[2:]) / (2.0 * h * h)
            out[-1] = (qv[-2] - 2.0 * qv[-1]) / (2.0 * h * h)
            return out

        ab = np.zeros((3, n_free))
        ab[0, 1:] = -0.5 * dt * upper[1:]
        ab[1] = w - 0.5 * dt * diag
        ab[2, :-1] = -0.5 * dt * lower[1:]
        for _ in range(steps):
            rhs = w * q + 0.5 * dt * rhs_mat(q)
            q_new = solve_banded((1, 1), ab, rhs)
            delta += 0.5 * dt * kill * (q[0] + q_new[0])
            q = q_new
        azero = (c3 / (2.0 * c2)) * q[0]
        return q, azero, delta

    # c2 = 0: Dirichlet density, boundary mass lives in the atom ODEs
    q[0] = 0.0
    inner = q[1:].copy()
    m = len(inner)
    ab = np.zeros((3, m))
    ab[0, 1:] = -0.5 * dt / (2.0 * h * h)
    ab[1] = 1.0 + dt / (2.0 * h * h)
    ab[2, :-1] = -0.5 * dt / (2.0 * h * h)
    kappa = c1 / c3 if c3 > 0.0 else math.inf

    def lap(v):
        out = np.empty_like(v)
        out[0] = (v[1] - 2.0 * v[0]) / (2.0 * h * h)
        out[1:-1] = (v[:-2] - 2.0 * v[1:-1] + v[2:]) / (2.0 * h * h)
        out[-1] = (v[-2] - 2.0 * v[-1]) / (2.0 * h * h)
        return out

    for _ in range(steps):
        rhs = inner + 0.5 * dt * lap(inner)
        new = solve_banded((1, 1), ab, rhs)
        flux = 0.5 * (inner[0] + new[0]) / (2.0 * h)   # (1/2) q_y(0), discrete
        if c3 == 0.0:                                  # killed
            delta += dt * flux
        elif c1 == 0.0:                                # absorbed
            azero += dt * flux
        else:                                          # EHBM
            a_new = (azero * (1.0 - 0.5 * dt * kappa) + dt * flux) \
                / (1.0 + 0.5 * dt * kappa)
            delta += 0.5 * dt * kappa * (azero + a_new)
            azero = a_new
        inner = new
    q = np.concatenate([[0.0], inner])
    return q, azero, delta


def wentzell_reference(cond, u, t, x_max=None, dx=None, dt=None):
    """Law of the limit process at time t started from u, by the PDE solver.

    The point mass is mollified to a Gaussian of width 3*dx and the PDE is
    run for t - (3*dx)^2, since that Gaussian is itself the free evolution
    of the point mass after time (3*dx)^2.
    """
    if u <= 0:
        raise ValueError("start point must be positive")
    if t <= 0:
        raise ValueError("time must be positive")
    x_max, dx, dt = default_grid(u, t, x_max, dx, dt)
    xs = np.arange(0.0, x_max + dx / 2, dx)
    sigma = 3.0 * dx
    t_eff = t - sigma * sigma
    if t_eff <= 0:
        raise ValueError("time shorter than the mollification width")
    q0 = gauss_kernel(sigma * sigma, xs - u)
    q0[-1] = 0.0
    c1, c2, c3 = cond.triple
    if c2 == 0.0:
        q0[0] = 0.0
    mass0 = np.trapezoid(q0, xs)
    if c2 > 0.0:
        mass0 += (c3 / (2.0 * c2)) * q0[0]
    q0 /= mass0
    steps = max(1, round(t_eff / dt))
    q, azero, delta = _cn_forward(cond, q0, dx, t_eff / steps, steps)
    density = np.concatenate([q, [0.0]])
    return ContinuousLaw(xs, density, atom_zero=float(azero),
                         atom_delta=float(delta))


def wentzell_continue(cond, law, s, dt=None):
    """Evolve an existing law a further time s with the same PDE solver.

    The sticky atom is slaved to the boundary density value, so for c2 > 0
    it is carried by the density itself; for c2 = 0 the atoms are explicit
    ODE state and are passed through.
    """
    if s <= 0:
        raise ValueError("time must be positive")
    if dt is None:
        dt = s / 2000.0
    xs = law.xs
    h = float(xs[1] - xs[0])
    q0 = law.density.copy()
    q0[-1] = 0.0
    steps = max(1, round(s / dt))
    q, azero, delta = _cn_forward(cond, q0, h, s / steps, steps,
                                  azero0=law.atom_zero, delta0=law.atom_delta)
    density = np.concatenate([q, [0.0]])
    return ContinuousLaw(xs, density, atom_zero=float(azero),
                         atom_delta=float(delta))


def evolve_function(cond, f, t, x_max, dx=None, dt=None):
    """T(t)f on a grid: backward-variable Crank-Nicolson with the domain BC.

    Returns (xs, values).  The boundary row uses the one-sided second-order
    derivative; with c3 > 0 the condition is dynamic (v0' enters), with
    c3 = 0 it is an algebraic constraint, and killed pins v0 = 0.
    """
    if t <= 0:
        raise ValueError("time must be positive")
    _, dx, dt = default_grid(x_max / 2.0, t, x_max, dx, dt)
    xs = np.arange(0.0, x_max + dx / 2, dx)
    v = np.asarray(f(xs), dtype=float)
    n = len(xs)
    c1, c2, c3 = cond.triple
    steps = max(1, round(t / dt))
    dt = t / steps
    lam = dt / (2.0 * dx * dx)

    # interior CN rows; boundary row filled per condition type below
    ab = np.zeros((4, n))          # bands (u=2, u=1, diag, l=1)
    ab[1, 2:] = -0.5 * lam
    ab[2, 1:-1] = 1.0 + lam
    ab[3, :-2] = -0.5 * lam
    ab[2, -1] = 1.0                # far field clamped

    def lap(w):
        out = np.zeros_like(w)
        out[1:-1] = (w[:-2] - 2.0 * w[1:-1] + w[2:]) / (2.0 * dx * dx)
        return out

    if c3 > 0.0:
        # dynamic row: c3 v0' = c2 v_x(0) - c1 v0
        r0 = np.array([-(3.0 * c2 / (2.0 * dx) + c1) / c3,
                       4.0 * c2 / (2.0 * dx) / c3,
                       -c2 / (2.0 * dx) / c3])
        ab[2, 0] = 1.0 - 0.5 * dt * r0[0]
        ab[1, 1] = -0.5 * dt * r0[1]
        ab[0, 2] = -0.5 * dt * r0[2]

        def rhs_of(w):
            out = w + 0.5 * dt * lap(w)
            out[0] = w[0] + 0.5 * dt * (r0 @ w[:3])
            out[-1] = w[-1]
            return out
    else:
        if c2 > 0.0:
            # algebraic row: c1 v0 = c2 v_x(0)
            denom = 2.0 * dx * c1 + 3.0 * c2
            row = np.array([1.0, -4.0 * c2 / denom, c2 / denom])
        else:
            row = np.array([1.0, 0.0, 0.0])   # killed: v0 = 0
        ab[2, 0] = row[0]
        ab[1, 1] = row[1]
        ab[0, 2] = row[2]

        def rhs_of(w):
            out = w + 0.5 * dt * lap(w)
            out[0] = 0.0
            out[-1] = w[-1]
            return out

    for _ in range(steps):
        v = solve_banded((1, 2), ab, rhs_of(v))
    return xs, v
