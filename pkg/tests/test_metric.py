"""Metric tests: series distance, axioms, embedding guard, rate ladders."""

import math

import numpy as np
import pytest

from halfline.limits import (
    BoundaryCondition,
    ContinuousLaw,
    closed_form_law,
    params_to_limit,
    survival_closed_form,
)
from halfline.metric import (
    RateReport,
    SubMeasure,
    check_trotter_kato,
    distance_d,
    killed_region,
    predicted_rate_exponent,
    random_submeasure,
    run_killed_ladder,
    run_rate_ladder,
    sample_to_lattice,
    shift_law,
)
from halfline.corrections import make_correction
from halfline.testfunctions import build_family
from halfline.walk import BoundaryParams, LatticeLaw, distribution_at

MIXED = params_to_limit(BoundaryParams(n=50, alpha=2.0, beta=1.0, A=1.0,
                                       B=1.0))
DELTA0 = SubMeasure.from_lattice(LatticeLaw(100, np.array([1.0]), 0.0))
DELTA_CEM = SubMeasure.from_lattice(LatticeLaw(100, np.array([0.0]), 1.0))
# small ladders keep the unit suite quick; acceptance runs the defaults
MINI = (10, 20, 50, 100)


def spec_of(alpha, beta, A=1.0, B=1.0):
    return make_correction(BoundaryParams(n=50, alpha=alpha, beta=beta,
                                          A=A, B=B))


class TestSubMeasure:
    def test_kinds(self):
        assert DELTA0.kind == "lattice"
        law = closed_form_law(BoundaryCondition(0.0, 1.0, 0.0), 1.0, 0.5)
        m = SubMeasure.from_continuous(law)
        assert m.kind == "continuous"
        assert m.total_mass() == pytest.approx(1.0, abs=2e-6)
        with pytest.raises(ValueError, match="kind"):
            SubMeasure("measure", law)

    def test_negative_mass_rejected(self):
        with pytest.raises(ValueError, match="negative"):
            SubMeasure.from_lattice(LatticeLaw(10, np.array([0.5, -0.2]), 0.0))
        xs = np.linspace(0.0, 5.0, 200)
        bad = ContinuousLaw(xs, np.full_like(xs, -1e-3))
        with pytest.raises(ValueError, match="negative"):
            SubMeasure.from_continuous(bad)

    def test_super_probability_rejected(self):
        with pytest.raises(ValueError, match="exceeds"):
            SubMeasure.from_lattice(LatticeLaw(10, np.array([0.9]), 0.2))
        xs = np.linspace(0.0, 5.0, 501)
        dens = np.full_like(xs, 0.3)
        with pytest.raises(ValueError, match="exceeds"):
            SubMeasure.from_continuous(ContinuousLaw(xs, dens))

    def test_continuous_adapter_repairs_dust(self):
        xs = np.linspace(0.0, 5.0, 501)
        dens = np.full_like(xs, 0.2)
        dens[7] = -5e-7  # solver undershoot
        m = SubMeasure.from_continuous(ContinuousLaw(xs, dens))
        assert float(np.min(np.asarray(m.law.density))) == 0.0
        # quadrature overshoot just past 1 is scaled back onto the simplex
        over = np.full_like(xs, (1.0 + 5e-5) / 5.0)
        m2 = SubMeasure.from_continuous(ContinuousLaw(xs, over))
        assert m2.total_mass() <= 1.0 + 1e-12

    def test_expect_conventions(self):
        # the cemetery atom never contributes; the zero atom does
        f = lambda x: np.exp(-np.asarray(x))
        lat = SubMeasure.from_lattice(LatticeLaw(10, np.array([0.5]), 0.5))
        assert lat.expect(f) == pytest.approx(0.5)
        xs = np.linspace(0.0, 8.0, 801)
        law = ContinuousLaw(xs, np.zeros_like(xs), atom_zero=0.25,
                            atom_delta=0.25)
        cont = SubMeasure.from_continuous(law)
        assert cont.expect(f) == pytest.approx(0.25)


class TestDistance:
    def test_identical_measures(self):
        fam = build_family(MIXED, 8, 8)
        val, bound = distance_d(DELTA0, DELTA0, fam)
        assert val == 0.0
        assert bound == pytest.approx(fam.tail_bound(), abs=0)

    def test_point_mass_against_cemetery(self):
        # only the k = 0 row sees the origin: sum_j 2^-j = 2 - 2^-J
        for J in (8, 16):
            fam = build_family(MIXED, 16, J)
            val, _ = distance_d(DELTA0, DELTA_CEM, fam)
            assert val == pytest.approx(2.0 - 2.0 ** -J, abs=1e-12)

    def test_symmetry_exact_and_bounded(self):
        fam = build_family(MIXED, 6, 6)
        rng = np.random.default_rng(3)
        for _ in range(8):
            a, b = random_submeasure(rng), random_submeasure(rng)
            dab, _ = distance_d(a, b, fam)
            dba, _ = distance_d(b, a, fam)
            assert dab == dba
            assert 0.0 <= dab < 4.0

    def test_triangle_inequality(self):
        fam = build_family(MIXED, 6, 6)
        rng = np.random.default_rng(11)
        for _ in range(8):
            a = random_submeasure(rng)
            b = random_submeasure(rng)
            c = random_submeasure(rng)
            dac, _ = distance_d(a, c, fam)
            dab, _ = distance_d(a, b, fam)
            dbc, _ = distance_d(b, c, fam)
            assert dac <= dab + dbc + 1e-12

    def test_monotone_refinement(self):
        # enlarging the family moves d by less than the old tail bound
        law = closed_form_law(BoundaryCondition(0.0, 1.0, 0.0), 1.0, 0.5)
        mu = SubMeasure.from_continuous(law)
        nu = SubMeasure.from_lattice(sample_to_lattice(law, 37))
        coarse = build_family(MIXED, 6, 6)
        fine = build_family(MIXED, 10, 10)
        d_coarse, bound_coarse = distance_d(mu, nu, coarse)
        d_fine, _ = distance_d(mu, nu, fine)
        assert abs(d_fine - d_coarse) <= bound_coarse

    def test_separation(self):
        fam = build_family(MIXED, 8, 8)
        shifted = SubMeasure.from_lattice(
            LatticeLaw(100, np.array([0.0, 1.0]), 0.0))
        val, _ = distance_d(DELTA0, shifted, fam)
        assert val > 0.0


class TestSampleToLattice:
    def test_embedding_guard(self):
        # regression guard: d(lattice reading, continuous law) <= C/n
        C = 0.005
        law = closed_form_law(BoundaryCondition(0.0, 1.0, 0.0), 1.0, 0.5)
        mu = SubMeasure.from_continuous(law)
        fam = build_family(MIXED, 8, 8)
        for n in (50, 100, 200, 400):
            lat = SubMeasure.from_lattice(sample_to_lattice(law, n))
            d, _ = distance_d(lat, mu, fam)
            assert d <= C / n

    def test_mass_never_exceeds_one(self):
        law = closed_form_law(BoundaryCondition(0.0, 1.0, 0.0), 1.0, 0.5)
        for n in (13, 50, 137):
            lat = sample_to_lattice(law, n)
            assert lat.total_mass() <= 1.0 + 1e-12
            assert lat.total_mass() == pytest.approx(law.total_mass(),
                                                     abs=2e-3)

    def test_atoms_carried(self):
        law = closed_form_law(BoundaryCondition(1.0, 0.0, 0.0), 1.0, 0.5)
        lat = sample_to_lattice(law, 50)
        assert lat.atom_delta == law.atom_delta


class TestPredictedRates:
    def test_acceptance_table(self):
        assert predicted_rate_exponent(spec_of(2.0, 1.0)) == 1.0
        assert predicted_rate_exponent(spec_of(3.0, 1.0)) == 1.0
        assert predicted_rate_exponent(spec_of(1.5, 0.5)) == 0.5
        assert predicted_rate_exponent(spec_of(1.0, 0.0)) == 1.0
        assert predicted_rate_exponent(spec_of(2.0, 3.0)) == 1.0
        assert predicted_rate_exponent(spec_of(2.0, 0.5)) == 0.5
        assert predicted_rate_exponent(spec_of(3.0, 0.5)) == 0.5
        assert predicted_rate_exponent(spec_of(3.0, 3.0)) == 1.0

    def test_unavailable(self):
        assert predicted_rate_exponent(spec_of(2.0, 1.5)) is None
        assert predicted_rate_exponent(spec_of(3.0, 2.0)) is None
        assert predicted_rate_exponent(spec_of(1.0, 2.0)) is None
        assert predicted_rate_exponent(spec_of(0.5, 0.0)) is None

    def test_subcritical_three_way_min(self):
        assert predicted_rate_exponent(spec_of(1.7, 0.5)) == pytest.approx(0.2)
        assert predicted_rate_exponent(spec_of(1.6, 0.3)) == pytest.approx(0.3)


class TestRateLadder:
    def test_ladder_validation(self):
        with pytest.raises(ValueError, match="decade"):
            run_rate_ladder(2.0, 1.0, 1.0, 1.0, 0.5, 1.0, n_values=(50, 100))
        with pytest.raises(ValueError, match="decade"):
            run_rate_ladder(2.0, 1.0, 1.0, 1.0, 0.5, 1.0,
                            n_values=(50, 100, 200, 400))
        with pytest.raises(ValueError, match="shifted"):
            run_rate_ladder(0.5, 0.0, 1.0, 1.0, 0.5, 1.0)

    def test_mixed_mini_ladder(self):
        rep = run_rate_ladder(2.0, 1.0, 1.0, 1.0, 0.5, 1.0, n_values=MINI,
                              K=6, J=6)
        assert rep.regime == "mixed"
        assert rep.passed is True
        assert rep.fitted_exponent >= 0.8
        assert rep.clipped_terms == 0
        assert all(b < a for a, b in zip(rep.d_values, rep.d_values[1:]))
        rows = rep.to_csv_rows()
        assert rows[0] == "n,d,bound"
        assert len(rows) == len(MINI) + 1
        n0, d0, bound0 = rows[1].split(",")
        assert int(n0) == MINI[0]
        assert float(d0) == rep.d_values[0]
        assert float(bound0) == rep.truncation_bound
        assert "PASS" in rep.summary()

    def test_thread_count_invariance(self):
        serial = run_rate_ladder(2.0, 1.0, 1.0, 1.0, 0.5, 1.0, n_values=MINI,
                                 K=4, J=4, threads=1)
        pooled = run_rate_ladder(2.0, 1.0, 1.0, 1.0, 0.5, 1.0, n_values=MINI,
                                 K=4, J=4, threads=4)
        assert serial.d_values == pooled.d_values
        assert serial.fitted_exponent == pooled.fitted_exponent
        assert serial.to_csv_rows() == pooled.to_csv_rows()

    def test_rate_unavailable_note(self):
        rep = run_rate_ladder(2.0, 1.5, 1.0, 1.0, 0.5, 1.0, n_values=MINI,
                              K=4, J=4)
        assert rep.regime == "EHBM"
        assert rep.rate_available is False
        assert rep.predicted_exponent is None
        assert rep.passed is None
        assert rep.note == "rate-unavailable"
        assert "NO CHECK" in rep.summary()
        assert math.isfinite(rep.fitted_exponent)


class TestKilledLadder:
    def test_region_predicate(self):
        assert killed_region(0.0, 0.0)
        assert killed_region(1.0, 2.0)
        assert killed_region(1.9, 1.0)
        assert killed_region(3.0, 1.5)
        assert not killed_region(2.5, 0.5)
        assert not killed_region(2.0, 1.0)

    def test_region_mismatch_raises(self):
        with pytest.raises(ValueError, match="region"):
            run_killed_ladder(2.5, 0.5, 1.0, 1.0, 0.5, 1.0, n_values=MINI)

    def test_shift_law(self):
        law = LatticeLaw(10, np.array([0.3, 0.2]), 0.1)
        shifted = shift_law(law)
        np.testing.assert_array_equal(shifted.masses,
                                      np.array([0.0, 0.3, 0.2]))
        assert shifted.atom_delta == 0.1
        assert shifted.n == 10

    def test_killed_mini_ladder(self):
        rep = run_killed_ladder(0.0, 0.0, 1.0, 1.0, 0.5, 1.0, n_values=MINI,
                                K=6, J=6)
        assert rep.regime == "killed"
        assert rep.predicted_exponent is None
        assert rep.passed is True
        assert rep.note == "convergence only"
        assert all(b < a for a, b in zip(rep.d_values, rep.d_values[1:]))

    def test_delta_atom_tracks_kill_probability(self):
        # the walk's cemetery mass approaches 1 - survival of killed BM
        target = 1.0 - survival_closed_form(BoundaryCondition(1.0, 0.0, 0.0),
                                            0.5, 1.0)
        errs = []
        for n in (25, 50, 100, 200):
            params = BoundaryParams(n=n, alpha=0.0, beta=0.0, A=1.0, B=1.0)
            law = distribution_at(params, n, 0.5, 12 * n)
            errs.append(abs(law.atom_delta - target))
        assert errs[-1] < 2e-2
        assert errs[-1] < errs[0]


class TestTrotterKato:
    def test_time_zero_trivial(self):
        rep = check_trotter_kato(2.0, 1.0, 1.0, 1.0, 6, 0, 0.0,
                                 n_values=MINI)
        assert rep.sup_values == (0.0,) * len(MINI)
        assert math.isinf(rep.fitted_exponent)
        assert rep.passed is True

    def test_mixed_flat_member(self):
        rep = check_trotter_kato(2.0, 1.0, 1.0, 1.0, 6, 0, 0.5,
                                 n_values=(50, 100, 200, 500))
        assert rep.passed is True
        assert rep.fitted_exponent >= 0.8
        assert "PASS" in rep.summary()

    def test_reflected_critical(self):
        rep = check_trotter_kato(2.0, 0.5, 1.0, 1.0, 0, 2, 0.5,
                                 n_values=(50, 100, 200, 500))
        assert rep.passed is True
        assert rep.fitted_exponent >= 0.4


class TestRandomSubMeasure:
    def test_draws_valid(self):
        rng = np.random.default_rng(0)
        kinds = set()
        for _ in range(30):
            m = random_submeasure(rng)
            kinds.add(m.kind)
            assert m.total_mass() <= 1.0 + 1e-9
        assert kinds == {"lattice", "continuous"}

    def test_reproducible(self):
        a = random_submeasure(np.random.default_rng(42))
        b = random_submeasure(np.random.default_rng(42))
        assert a.kind == b.kind
        assert a.total_mass() == b.total_mass()
