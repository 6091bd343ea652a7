"""Sped-up boundary random walk on the truncated lattice {0, 1/n, ..., M/n} + Delta.

The walk jumps between neighbouring lattice sites at rate n^2/2 on the
interior.  From site 0 it jumps to the cemetery Delta at rate A*n^(2-alpha)
and to site 1 at rate B*n^(2-beta).  Delta is absorbing.  The right boundary
is an artifact of truncation; it either reflects or absorbs (policy tag).

The semigroup and the time-t law are computed by uniformization: powers of
the stochastic matrix P = I + Q/Lambda weighted by Poisson(Lambda*t)
probabilities, truncated when the Poisson tail drops below 1e-12.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math

import numpy as np
from scipy.stats import poisson

POISSON_TAIL = 1e-12

TRUNCATION_POLICIES = ("reflect", "absorb-into-last-site")


@dataclass(frozen=True)
class BoundaryParams:
    """Walk parameters (alpha, beta, A, B, n); A=0 and alpha=inf coincide."""

    alpha: float
    beta: float
    A: float
    B: float
    n: int

    def __post_init__(self):
        if self.A < 0 or self.B < 0:
            raise ValueError("rates A, B must be nonnegative")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("exponents alpha, beta must be nonnegative")
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        # A = 0 and alpha = inf describe the same absent jump
        if self.A == 0.0:
            object.__setattr__(self, "alpha", math.inf)
        if self.alpha == math.inf:
            object.__setattr__(self, "A", 0.0)
        if self.B == 0.0:
            object.__setattr__(self, "beta", math.inf)
        if self.beta == math.inf:
            object.__setattr__(self, "B", 0.0)

    def rate_to_delta(self):
        """Sped-up jump rate from site 0 to the cemetery, A*n^(2-alpha)."""
        if self.A == 0.0:
            return 0.0
        return self.A * float(self.n) ** (2.0 - self.alpha)

    def rate_to_one(self):
        """Sped-up jump rate from site 0 to site 1, B*n^(2-beta)."""
        if self.B == 0.0:
            return 0.0
        return self.B * float(self.n) ** (2.0 - self.beta)

    def interior_rate(self):
        return 0.5 * float(self.n) ** 2


def default_truncation(n, t, u):
    """Lattice size M covering u + 10*max(1, sqrt(t)) at resolution 1/n."""
    x_max = u + 10.0 * max(1.0, math.sqrt(t))
    return int(math.ceil(n * x_max))


@dataclass
class GeneratorMatrix:
    """Tridiagonal-plus-cemetery Q-matrix on sites 0..M and Delta."""

    params: BoundaryParams
    M: int
    policy: str
    rate_delta: float = field(init=False)
    rate_up0: float = field(init=False)
    h: float = field(init=False)

    def __post_init__(self):
        if self.M < 2:
            raise ValueError("truncation size M must be at least 2")
        if self.policy not in TRUNCATION_POLICIES:
            raise ValueError(f"unknown truncation policy {self.policy!r}")
        self.rate_delta = self.params.rate_to_delta()
        self.rate_up0 = self.params.rate_to_one()
        self.h = self.params.interior_rate()

    @property
    def size(self):
        """Number of states: sites 0..M plus Delta."""
        return self.M + 2

    def uniformization_rate(self):
        """Largest total outflow rate over all states."""
        return max(self.rate_delta + self.rate_up0, 2.0 * self.h)

    def apply(self, values, delta):
        """Q acting on a function (values at sites 0..M, value at Delta)."""
        v = values
        out = np.empty_like(v)
        out[0] = self.rate_up0 * (v[1] - v[0]) + self.rate_delta * (delta - v[0])
        out[1:-1] = self.h * (v[:-2] - 2.0 * v[1:-1] + v[2:])
        if self.policy == "reflect":
            out[-1] = self.h * (v[-2] - v[-1])
        else:
            out[-1] = 0.0
        return out, 0.0

    def apply_transpose(self, masses, delta):
        """Q^T acting on a measure (masses at sites 0..M, atom at Delta)."""
        w = masses
        out = np.zeros_like(w)
        h = self.h
        # outflows
        out[0] -= (self.rate_up0 + self.rate_delta) * w[0]
        out[1:-1] -= 2.0 * h * w[1:-1]
        if self.policy == "reflect":
            out[-1] -= h * w[-1]
        # interior arrivals from the left and right
        out[1] += self.rate_up0 * w[0]
        out[2:] += h * w[1:-1]
        out[:-2] += h * w[1:-1]
        if self.policy == "reflect":
            out[-2] += h * w[-1]
        return out, self.rate_delta * w[0]

    def as_dense(self):
        """Full (M+2) x (M+2) matrix with Delta last; for small-M checks."""
        q = np.zeros((self.size, self.size))
        q[0, 1] = self.rate_up0
        q[0, -1] = self.rate_delta
        q[0, 0] = -(self.rate_up0 + self.rate_delta)
        for i in range(1, self.M):
            q[i, i - 1] = self.h
            q[i, i + 1] = self.h
            q[i, i] = -2.0 * self.h
        if self.policy == "reflect":
            q[self.M, self.M - 1] = self.h
            q[self.M, self.M] = -self.h
        return q

    def row_sums(self):
        return self.as_dense().sum(axis=1)


def build_generator(params, M, policy="reflect"):
    return GeneratorMatrix(params, M, policy)


@dataclass
class LatticeFunction:
    """Values at sites 0..M plus the value at Delta (0 for projected C0)."""

    values: np.ndarray
    delta: float = 0.0

    def sup_norm(self):
        return max(float(np.max(np.abs(self.values))), abs(self.delta))


def project(f, n, M):
    """The lattice restriction of f: values f(i/n), and 0 at Delta."""
    sites = np.arange(M + 1) / float(n)
    return LatticeFunction(np.asarray(f(sites), dtype=float), 0.0)


def _poisson_weights(mu):
    """Poisson(mu) pmf row truncated once its tail is below 1e-12.

    The row is renormalized: its float sum drifts from the true cdf by
    ~1e-10 at mu ~ 1e5, which would otherwise leak conserved mass.
    """
    steps = max(int(poisson.isf(POISSON_TAIL, mu)), 1)
    weights = poisson.pmf(np.arange(steps + 1), mu)
    total = weights.sum()
    if not total > 1.0 - 1e-8:
        raise RuntimeError("poisson weight row lost mass beyond its tail bound")
    return weights / total


def semigroup_apply(gen, t, f):
    """T(t) f by uniformization; contraction in the sup norm."""
    if t < 0:
        raise ValueError("time must be nonnegative")
    if len(f.values) != gen.M + 1:
        raise ValueError("function dimension does not match generator")
    if t == 0.0:
        return LatticeFunction(f.values.copy(), f.delta)
    lam = gen.uniformization_rate()
    if lam == 0.0:
        if np.ptp(f.values) > 0 or f.values[0] != f.delta:
            raise RuntimeError("zero uniformization rate with non-constant input")
        return LatticeFunction(f.values.copy(), f.delta)
    weights = _poisson_weights(lam * t)
    v = f.values.copy()
    d = f.delta
    acc = weights[0] * v
    acc_d = weights[0] * d
    for m in range(1, len(weights)):
        qv, qd = gen.apply(v, d)
        v = v + qv / lam
        d = d + qd / lam
        acc += weights[m] * v
        acc_d += weights[m] * d
    return LatticeFunction(acc, float(acc_d))


@dataclass
class LatticeLaw:
    """Sub-probability law on the lattice: site masses plus the Delta atom."""

    n: int
    masses: np.ndarray
    atom_delta: float = 0.0

    def total_mass(self):
        return float(np.sum(self.masses) + self.atom_delta)

    def positions(self):
        return np.arange(len(self.masses)) / float(self.n)

    def expect(self, f):
        """Integral of f against the law; f(Delta) = 0 by convention."""
        return float(np.dot(self.masses, f(self.positions())))

    def to_csv_rows(self):
        """`site,mass` rows; site -1 denotes Delta."""
        rows = ["site,mass", f"-1,{float(self.atom_delta)!r}"]
        rows += [f"{i},{float(m)!r}" for i, m in enumerate(self.masses)]
        return rows

    @classmethod
    def from_csv_rows(cls, rows, n):
        atom = 0.0
        pairs = []
        for row in rows:
            site_s, mass_s = row.split(",")
            site, mass = int(site_s), float(mass_s)
            if site == -1:
                atom = mass
            else:
                pairs.append((site, mass))
        pairs.sort()
        masses = np.zeros(pairs[-1][0] + 1 if pairs else 0)
        for site, mass in pairs:
            masses[site] = mass
        return cls(n=n, masses=masses, atom_delta=atom)


def distribution_at(params, x0, t, M, policy="reflect"):
    """The law mu_n(t) of the walk started from site x0, as a LatticeLaw."""
    gen = build_generator(params, M, policy)
    if not 0 <= x0 <= M:
        raise ValueError("start site x0 must lie in 0..M")
    if t < 0:
        raise ValueError("time must be nonnegative")
    w = np.zeros(M + 1)
    w[x0] = 1.0
    d = 0.0
    if t == 0.0:
        return LatticeLaw(params.n, w, d)
    lam = gen.uniformization_rate()
    weights = _poisson_weights(lam * t)
    acc = weights[0] * w
    acc_d = weights[0] * d
    for m in range(1, len(weights)):
        qw, qd = gen.apply_transpose(w, d)
        w = w + qw / lam
        d = d + qd / lam
        acc += weights[m] * w
        acc_d += weights[m] * d
    return LatticeLaw(params.n, acc, float(acc_d))


DELTA_SITE = -1


def sample_path(params, x0, horizon, seed, M=None, policy="reflect"):
    """Exact CTMC path: (times, sites) of jump events up to the horizon.

    Sites are lattice indices; DELTA_SITE marks absorption at the cemetery.
    The path starts at (0, x0) and is right-continuous piecewise constant.
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if M is None:
        M = default_truncation(params.n, horizon, x0 / params.n)
    gen = build_generator(params, M, policy)
    rng = np.random.default_rng(seed)
    times = [0.0]
    sites = [int(x0)]
    t_now, site = 0.0, int(x0)
    while True:
        if site == DELTA_SITE:
            break
        if site == 0:
            out = gen.rate_delta + gen.rate_up0
        elif site == M:
            out = gen.h if policy == "reflect" else 0.0
        else:
            out = 2.0 * gen.h
        if out == 0.0:
            break
        t_now += rng.exponential(1.0 / out)
        if t_now >= horizon:
            break
        if site == 0:
            if rng.random() * out < gen.rate_delta:
                site = DELTA_SITE
            else:
                site = 1
        elif site == M:
            site = M - 1
        else:
            site = site + 1 if rng.random() < 0.5 else site - 1
        times.append(t_now)
        sites.append(site)
    return np.asarray(times), np.asarray(sites, dtype=int)


MC_CHUNKS = 64


def ensemble_at(params, x0, t, paths, seed, M=None, policy="reflect",
                threads=None):
    """Empirical law at time t over many exact paths.

    Work is split into MC_CHUNKS chunks seeded by SeedSequence.spawn and
    reduced in chunk order, so the result depends only on the seed, not on
    how chunks are scheduled or how many threads run them.
    """
    if M is None:
        M = default_truncation(params.n, t, x0 / params.n)
    gen = build_generator(params, M, policy)
    counts = np.zeros(M + 1, dtype=np.int64)
    delta_count = 0
    chunk_sizes = np.full(MC_CHUNKS, paths // MC_CHUNKS, dtype=int)
    chunk_sizes[: paths % MC_CHUNKS] += 1
    seeds = np.random.SeedSequence(seed).spawn(MC_CHUNKS)
    jobs = [(int(size), ss) for size, ss in zip(chunk_sizes, seeds)
            if size > 0]
    if threads is not None and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(
                lambda job: _simulate_chunk(gen, x0, t, job[0], job[1],
                                            policy), jobs))
    else:
        results = [_simulate_chunk(gen, x0, t, size, ss, policy)
                   for size, ss in jobs]
    for c, d in results:
        counts += c
        delta_count += d
    masses = counts / float(paths)
    return LatticeLaw(params.n, masses, delta_count / float(paths))


def _simulate_chunk(gen, x0, t, size, seedseq, policy):
    """Vectorized exact simulation of one chunk of paths to time t."""
    rng = np.random.default_rng(seedseq)
    M = gen.M
    site = np.full(size, int(x0), dtype=np.int64)
    clock = np.zeros(size)
    alive = np.ones(size, dtype=bool)   # still needs jumps resolved
    p_delta = gen.rate_delta / (gen.rate_delta + gen.rate_up0) \
        if gen.rate_delta + gen.rate_up0 > 0 else 0.0
    while np.any(alive):
        s = site[alive]
        out = np.where(s == 0, gen.rate_delta + gen.rate_up0, 2.0 * gen.h)
        if policy == "reflect":
            out = np.where(s == M, gen.h, out)
        else:
            out = np.where(s == M, 0.0, out)
        out = np.where(s == DELTA_SITE, 0.0, out)
        stuck = out == 0.0
        hold = np.empty_like(out)
        hold[~stuck] = rng.exponential(1.0, size=int((~stuck).sum())) / out[~stuck]
        hold[stuck] = np.inf
        clock_a = clock[alive] + hold
        jumped = clock_a < t
        u = rng.random(s.shape[0])
        new_site = s.copy()
        at0 = (s == 0) & jumped
        new_site[at0] = np.where(u[at0] < p_delta, DELTA_SITE, 1)
        atM = (s == M) & jumped
        new_site[atM] = M - 1
        mid = (s > 0) & (s < M) & jumped
        new_site[mid] = s[mid] + np.where(u[mid] < 0.5, 1, -1)
        site_a = site[alive]
        site_a[jumped] = new_site[jumped]
        site[alive] = site_a
        clock_full = clock[alive]
        clock_full[jumped] = clock_a[jumped]
        clock[alive] = clock_full
        still = jumped & (new_site != DELTA_SITE)
        idx = np.flatnonzero(alive)
        alive[idx[~still]] = False
    delta_count = int(np.sum(site == DELTA_SITE))
    counts = np.bincount(site[site >= 0], minlength=M + 1).astype(np.int64)
    return counts, delta_count
