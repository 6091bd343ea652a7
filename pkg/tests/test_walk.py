import math

import numpy as np
import pytest
from scipy.linalg import expm

from halfline import walk


def small_params(n=3):
    return walk.BoundaryParams(alpha=1.5, beta=0.5, A=0.7, B=1.3, n=n)


class TestBoundaryParams:
    def test_zero_rate_and_infinite_exponent_coincide(self):
        p = walk.BoundaryParams(alpha=2.0, beta=1.0, A=0.0, B=1.0, n=5)
        assert p.alpha == math.inf and p.rate_to_delta() == 0.0
        q = walk.BoundaryParams(alpha=math.inf, beta=1.0, A=3.0, B=1.0, n=5)
        assert q.A == 0.0 and q.rate_to_delta() == 0.0
        r = walk.BoundaryParams(alpha=1.0, beta=math.inf, A=1.0, B=2.0, n=5)
        assert r.B == 0.0 and r.rate_to_one() == 0.0

    def test_validation(self):
        with pytest.raises(ValueError):
            walk.BoundaryParams(alpha=1, beta=1, A=-0.1, B=1, n=2)
        with pytest.raises(ValueError):
            walk.BoundaryParams(alpha=-1, beta=1, A=1, B=1, n=2)
        with pytest.raises(ValueError):
            walk.BoundaryParams(alpha=1, beta=1, A=1, B=1, n=0)


class TestGenerator:
    def test_unit_example(self):
        p = walk.BoundaryParams(alpha=0, beta=0, A=1, B=1, n=1)
        g = walk.build_generator(p, M=2)
        q = g.as_dense()
        assert q[0, -1] == 1.0        # rate to Delta
        assert q[0, 1] == 1.0         # rate to site 1
        assert q[0, 0] == -2.0
        assert np.allclose(g.row_sums(), 0.0)

    def test_scaled_example(self):
        p = walk.BoundaryParams(alpha=2, beta=1, A=1, B=1, n=10)
        g = walk.build_generator(p, M=4)
        assert g.rate_delta == pytest.approx(1.0)
        assert g.rate_up0 == pytest.approx(10.0)
        assert g.h == pytest.approx(50.0)

    @pytest.mark.parametrize("policy", walk.TRUNCATION_POLICIES)
    def test_row_sums_zero_and_delta_absorbing(self, policy):
        g = walk.build_generator(small_params(), M=7, policy=policy)
        q = g.as_dense()
        assert np.allclose(q.sum(axis=1), 0.0, atol=1e-12)
        assert np.all(q[-1] == 0.0)
        off = q - np.diag(np.diag(q))
        assert np.all(off >= 0.0)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            walk.build_generator(small_params(), M=1)
        with pytest.raises(ValueError):
            walk.build_generator(small_params(), M=5, policy="bounce")

    def test_apply_matches_dense(self):
        for policy in walk.TRUNCATION_POLICIES:
            g = walk.build_generator(small_params(), M=9, policy=policy)
            rng = np.random.default_rng(0)
            v = rng.normal(size=10)
            d = 0.37
            qv, qd = g.apply(v, d)
            dense = g.as_dense() @ np.concatenate([v, [d]])
            assert np.allclose(qv, dense[:-1], atol=1e-12)
            assert qd == dense[-1] == 0.0

    def test_apply_transpose_matches_dense(self):
        for policy in walk.TRUNCATION_POLICIES:
            g = walk.build_generator(small_params(), M=9, policy=policy)
            rng = np.random.default_rng(1)
            w = rng.random(10)
            qw, qd = g.apply_transpose(w, 0.1)
            dense = np.concatenate([w, [0.1]]) @ g.as_dense()
            assert np.allclose(qw, dense[:-1], atol=1e-12)
            assert qd == pytest.approx(dense[-1], abs=1e-12)


class TestSemigroup:
    def test_time_zero_identity(self):
        g = walk.build_generator(small_params(), M=8)
        f = walk.project(lambda x: np.sin(x) + 1.0, 3, 8)
        out = walk.semigroup_apply(g, 0.0, f)
        assert np.array_equal(out.values, f.values)

    def test_matches_dense_exponential(self):
        g = walk.build_generator(small_params(), M=12)
        f = walk.project(lambda x: np.exp(-x * x), 3, 12)
        for t in (0.05, 0.3, 1.0):
            got = walk.semigroup_apply(g, t, f)
            dense = expm(g.as_dense() * t) @ np.concatenate([f.values, [0.0]])
            assert np.allclose(got.values, dense[:-1], atol=1e-11)

    def test_two_state_exponential(self):
        # B = 0: site 0 only jumps to Delta at rate 1; value decays as e^-t
        p = walk.BoundaryParams(alpha=2, beta=0, A=1, B=0, n=1)
        g = walk.build_generator(p, M=2)
        f = walk.LatticeFunction(np.array([1.0, 0.0, 0.0]), 0.0)
        out = walk.semigroup_apply(g, 1.0, f)
        assert out.values[0] == pytest.approx(np.exp(-1.0), abs=1e-12)

    def test_contraction_and_semigroup_property(self):
        g = walk.build_generator(small_params(), M=15)
        rng = np.random.default_rng(3)
        f = walk.LatticeFunction(rng.normal(size=16), 0.0)
        norm0 = f.sup_norm()
        one = walk.semigroup_apply(g, 0.4, f)
        assert one.sup_norm() <= norm0 + 1e-12
        two = walk.semigroup_apply(g, 0.15, walk.semigroup_apply(g, 0.25, f))
        assert np.max(np.abs(one.values - two.values)) <= 1e-9

    def test_rejects_negative_time_and_bad_shape(self):
        g = walk.build_generator(small_params(), M=8)
        f = walk.LatticeFunction(np.zeros(9), 0.0)
        with pytest.raises(ValueError):
            walk.semigroup_apply(g, -0.1, f)
        with pytest.raises(ValueError):
            walk.semigroup_apply(g, 0.1, walk.LatticeFunction(np.zeros(5), 0.0))


class TestDistribution:
    def test_time_zero_point_mass(self):
        law = walk.distribution_at(small_params(), x0=4, t=0.0, M=10)
        assert law.masses[4] == 1.0 and law.total_mass() == 1.0

    def test_matches_dense_exponential_row(self):
        p = small_params()
        g = walk.build_generator(p, M=12)
        law = walk.distribution_at(p, x0=5, t=0.3, M=12)
        row = expm(g.as_dense() * 0.3)[5]
        assert np.allclose(law.masses, row[:-1], atol=1e-11)
        assert law.atom_delta == pytest.approx(row[-1], abs=1e-11)

    def test_conservation_pure_interior_walk(self):
        p = walk.BoundaryParams(alpha=math.inf, beta=math.inf, A=0, B=0, n=20)
        law = walk.distribution_at(p, x0=100, t=0.1, M=200)
        assert law.total_mass() == pytest.approx(1.0, abs=1e-10)
        assert law.atom_delta == 0.0
        # profile has a single peak near the start
        assert abs(int(np.argmax(law.masses)) - 100) <= 2

    def test_killing_atom_against_small_oracle(self):
        p = walk.BoundaryParams(alpha=0, beta=2, A=5, B=1, n=1)
        law = walk.distribution_at(p, x0=0, t=0.7, M=6)
        g = walk.build_generator(p, M=6)
        oracle = expm(g.as_dense() * 0.7)[0, -1]
        assert law.atom_delta == pytest.approx(oracle, abs=1e-11)
        assert law.atom_delta > 0.8   # strong killing dominates

    def test_rejects_out_of_range_start(self):
        with pytest.raises(ValueError):
            walk.distribution_at(small_params(), x0=11, t=0.1, M=10)

    def test_truncation_stability(self):
        p = walk.BoundaryParams(alpha=2, beta=1, A=1, B=1, n=10)
        M = walk.default_truncation(10, 0.5, 1.0)
        a = walk.distribution_at(p, x0=10, t=0.5, M=M)
        b = walk.distribution_at(p, x0=10, t=0.5, M=2 * M)
        assert np.max(np.abs(a.masses - b.masses[: M + 1])) < 1e-9
        assert float(np.sum(b.masses[M + 1:])) < 1e-9


class TestLatticeLawCsv:
    def test_round_trip(self):
        law = walk.LatticeLaw(n=4, masses=np.array([0.1, 0.0, 0.65]),
                              atom_delta=0.25)
        rows = law.to_csv_rows()
        assert rows[0] == "site,mass"
        assert rows[1].startswith("-1,")
        back = walk.LatticeLaw.from_csv_rows(rows[1:], n=4)
        assert np.array_equal(back.masses, law.masses)
        assert back.atom_delta == law.atom_delta


class TestPaths:
    def test_deterministic_under_seed(self):
        p = small_params()
        a = walk.sample_path(p, 4, 0.5, seed=42)
        b = walk.sample_path(p, 4, 0.5, seed=42)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_pure_walk_never_dies(self):
        p = walk.BoundaryParams(alpha=math.inf, beta=math.inf, A=0, B=0, n=4)
        times, sites = walk.sample_path(p, 8, 2.0, seed=11)
        assert walk.DELTA_SITE not in sites

    def test_absorbed_path_stops(self):
        p = walk.BoundaryParams(alpha=0, beta=2, A=50, B=1, n=1)
        times, sites = walk.sample_path(p, 0, 50.0, seed=5, M=4)
        if walk.DELTA_SITE in sites:
            assert sites[-1] == walk.DELTA_SITE   # nothing after absorption

    def test_right_continuous_increasing_times(self):
        times, sites = walk.sample_path(small_params(), 4, 1.0, seed=9)
        assert np.all(np.diff(times) > 0)
        assert times[0] == 0.0 and sites[0] == 4


class TestEnsemble:
    def test_reproducible(self):
        p = small_params(4)
        a = walk.ensemble_at(p, x0=4, t=0.3, paths=2000, seed=17)
        b = walk.ensemble_at(p, x0=4, t=0.3, paths=2000, seed=17)
        assert np.array_equal(a.masses, b.masses)
        assert a.atom_delta == b.atom_delta

    def test_matches_uniformization(self):
        p = walk.BoundaryParams(alpha=2, beta=1, A=1, B=1, n=4)
        M = walk.default_truncation(4, 0.5, 1.0)
        paths = 100000
        emp = walk.ensemble_at(p, x0=4, t=0.5, paths=paths, seed=7, M=M)
        law = walk.distribution_at(p, x0=4, t=0.5, M=M)
        se = np.sqrt(law.masses * (1 - law.masses) / paths)
        assert np.all(np.abs(emp.masses - law.masses) <= 3 * se + 3.0 / paths)
        se_d = math.sqrt(law.atom_delta * (1 - law.atom_delta) / paths)
        assert abs(emp.atom_delta - law.atom_delta) <= 3 * se_d + 3.0 / paths
        assert emp.total_mass() == pytest.approx(1.0, abs=1e-12)
