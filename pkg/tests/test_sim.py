"""Simulation-harness tests.

The strongest checks are exact Poisson laws: the maximal region-restricted
peak has P(max > r) = 1 - exp(-vol * tau_bar(r)) and the global max atom has
P(max > r) = 1 - exp(-eta_bar(r)); both let quadrature confront Monte Carlo
with binomial error bars.
"""

import math

import numpy as np
import pytest

from levyheat.kernel import get_kernel
from levyheat.levy import HypothesisError, LevyMeasure, ModelConfig
from levyheat.sim import (AtomSet, Grid, Lattice, MCResult, SimWindow,
                          SimulationError, char_function, max_atom, mc_tail,
                          mild_solution, replica_values, sample_prm,
                          size_window, sup_field, truncation_bias,
                          truncation_mass, x_a_functionals)
from levyheat.tails import RegionA, eta_bar, tau_bar


@pytest.fixture(scope="module")
def window():
    return SimWindow(R=5.0, seed=2024)


class TestSampling:
    def test_replica_determinism(self, model_b3, window):
        a = sample_prm(model_b3, window, 3)
        b = sample_prm(model_b3, window, 3)
        assert np.array_equal(a.s, b.s)
        assert np.array_equal(a.y, b.y)
        assert np.array_equal(a.z, b.z)
        c = sample_prm(model_b3, window, 4)
        assert not np.array_equal(a.s, c.s)

    def test_poisson_mean_count(self, model_b3, window):
        # mean count = t * vol * lambda((delta, inf)) = 1 * 10 * 1
        counts = [sample_prm(model_b3, window, i).count for i in range(4000)]
        mean = np.mean(counts)
        sigma = math.sqrt(10.0 / 4000)
        assert abs(mean - 10.0) < 3 * sigma

    def test_mark_tail_frequencies(self, model_b3, window):
        zs = np.concatenate([sample_prm(model_b3, window, i).z
                             for i in range(2000)])
        n = len(zs)
        for z0 in (2.0, 5.0):
            p = z0 ** -3.0
            freq = np.mean(zs > z0)
            assert abs(freq - p) < 3 * math.sqrt(p * (1 - p) / n)

    def test_atom_invariants(self, model_b3, window):
        atoms = sample_prm(model_b3, window, 0)
        assert np.all((atoms.s >= 0) & (atoms.s < model_b3.t))
        assert np.all(np.abs(atoms.y) <= window.R)
        assert np.all(atoms.z >= 1.0)

    def test_table_sampler_matches_tail(self):
        pd = LevyMeasure.power_density(0.4, 2.5)
        model = ModelConfig(1, 1.0, 1.0, 0.0, pd)
        w = SimWindow(R=1.0, delta_small=0.05, seed=9)
        zs = np.concatenate([sample_prm(model, w, i).z for i in range(800)])
        mass = float(pd.tail(0.05))
        for z0 in (0.2, 1.0, 3.0):
            p = float(pd.tail(z0)) / mass
            freq = np.mean(zs > z0)
            assert abs(freq - p) < 4 * math.sqrt(p * (1 - p) / len(zs))

    def test_infinite_restricted_mass_rejected(self):
        pd = LevyMeasure.power_density(0.4, 2.5)
        model = ModelConfig(1, 1.0, 1.0, 0.0, pd)
        with pytest.raises(SimulationError):
            sample_prm(model, SimWindow(R=1.0, delta_small=0.0, seed=1), 0)

    def test_csv_export(self, model_b3, window, tmp_path):
        atoms = sample_prm(model_b3, window, 0)
        path = tmp_path / "atoms.csv"
        atoms.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "s,y1,z"
        assert len(lines) == atoms.count + 1


class TestMildSolution:
    def test_empty_atomset(self, model_b3, window):
        m = ModelConfig(1, 1.0, 1.0, 0.4, LevyMeasure.pareto(3.0))
        empty = AtomSet(np.empty(0), np.empty((0, 1)), np.empty(0), window,
                        0, m.fingerprint())
        assert mild_solution(m, empty, 0.0) == pytest.approx(0.4)

    def test_single_atom(self, model_b3, window, kernel_11):
        one = AtomSet(np.array([0.25]), np.array([[0.5]]), np.array([2.0]),
                      window, 0, model_b3.fingerprint())
        expect = kernel_11.p_eval(0.75, -0.5) * 2.0
        assert mild_solution(model_b3, one, 0.0) == pytest.approx(expect)
        assert max_atom(model_b3, one) == pytest.approx(expect)

    def test_campbell_mean(self, model_b3):
        # E X(t,0) = t * int z lambda(dz) = 3/2, window bias below 1e-2
        w = SimWindow(R=50.0, seed=31)
        bias = truncation_bias(model_b3, 50.0, 1e-3)
        assert bias < 1e-2
        vals = replica_values(model_b3, w, "x", 30000)
        se = vals.std(ddof=1) / math.sqrt(len(vals))
        assert abs(vals.mean() - (1.5 - bias)) < 3.5 * se + bias

    def test_compensated_matches_noncompensated(self):
        # with no sub-unit marks the two representations coincide
        m_nc = ModelConfig(1, 1.0, 1.0, 0.2, LevyMeasure.pareto(3.0))
        m_c = ModelConfig(1, 1.0, 1.0, 0.2, LevyMeasure.pareto(3.0),
                          mode="Compensated")
        w = SimWindow(R=5.0, seed=77)
        atoms = sample_prm(m_nc, w, 0)
        a = mild_solution(m_nc, atoms, 0.3)
        b = mild_solution(m_c, atoms, 0.3)
        assert a == pytest.approx(b, rel=1e-12)

    def test_compensated_small_jumps(self):
        # infinite-activity small jumps: compensator shifts the mean only
        pd = LevyMeasure.power_density(0.6, 3.0)
        m = ModelConfig(1, 1.0, 1.0, 0.0, pd, mode="Compensated")
        w = SimWindow(R=8.0, delta_small=0.01, seed=13)
        vals = np.array([mild_solution(m, sample_prm(m, w, i), 0.0)
                         for i in range(4000)])
        # compensation cancels the sub-unit mean exactly, leaving the
        # big-jump Campbell mean t * int_(1,inf) z lambda(dz)
        expect = pd.partial_moment(1.0, 1.0, math.inf)
        se = vals.std(ddof=1) / math.sqrt(len(vals))
        assert abs(vals.mean() - expect) < 4 * se + 0.05 * expect

    def test_compensated_mean_cutoff_independent(self):
        # the compensated solution's mean must not depend on the sampling
        # cutoff; exercises a measure with infinite small-jump first moment
        pd = LevyMeasure.power_density(1.2, 3.0)
        m = ModelConfig(1, 1.4, 1.0, 0.0, pd, mode="Compensated")
        means = []
        ses = []
        for delta in (0.02, 0.08):
            w = SimWindow(R=5.0, delta_small=delta, seed=21)
            vals = np.array([mild_solution(m, sample_prm(m, w, i), 0.0)
                             for i in range(2500)])
            means.append(vals.mean())
            ses.append(vals.std(ddof=1) / math.sqrt(len(vals)))
        gap = abs(means[0] - means[1])
        assert gap < 4 * math.hypot(*ses) + 0.02


class TestMaxAtomLaw:
    def test_exact_law(self, model_b3):
        r_levels = [2.0, 4.0, 8.0]
        window, diag = size_window(model_b3, min(r_levels), seed=5)
        assert diag["trunc_mass"] < 1e-3 * eta_bar(model_b3, min(r_levels))
        n = 30000
        res = mc_tail(model_b3, window, "xbar", r_levels, n)
        for rr in res:
            p = 1.0 - math.exp(-eta_bar(model_b3, rr.level))
            sigma = math.sqrt(p * (1 - p) / n)
            assert abs(rr.estimate - p) < 4 * sigma

    def test_window_monotone(self, model_b3):
        small = SimWindow(R=2.0, seed=88)
        big = SimWindow(R=6.0, seed=88)
        for rep in range(40):
            a = max_atom(model_b3, sample_prm(model_b3, small, rep))
            # the bigger window is a superset in law but not pathwise for a
            # shared seed; compare the restriction instead
            atoms = sample_prm(model_b3, big, rep)
            keep = np.abs(atoms.y[:, 0]) <= small.R
            restricted = AtomSet(atoms.s[keep], atoms.y[keep], atoms.z[keep],
                                 big, rep, atoms.model_fingerprint)
            assert max_atom(model_b3, atoms) >= max_atom(model_b3, restricted)

    def test_empty_returns_zero(self, model_b3, window):
        empty = AtomSet(np.empty(0), np.empty((0, 1)), np.empty(0), window,
                        0, model_b3.fingerprint())
        assert max_atom(model_b3, empty) == 0.0


class TestRegionFunctionals:
    def test_exact_poisson_law(self, model_b3):
        region = RegionA.ball(0.0, 1.0)
        w = SimWindow(R=1.0, seed=404)
        n = 60000
        res = mc_tail(model_b3, w, "xbarA", [6.0, 20.0, 80.0], n,
                      region=region)
        for rr in res:
            p = 1.0 - math.exp(-region.volume() * tau_bar(model_b3, rr.level))
            sigma = math.sqrt(p * (1 - p) / n)
            assert abs(rr.estimate - p) < 4 * sigma

    def test_xa_dominates_xastar(self, model_b3, window):
        region = RegionA.ball(0.0, 1.0)
        for rep in range(50):
            atoms = sample_prm(model_b3, window, rep)
            vals = x_a_functionals(model_b3, atoms, region)
            assert vals["X_A"] >= vals["X_A_star"]
            assert vals["X_A"] >= vals["Xbar_A"]

    def test_xastar_tail_equivalence(self, model_b3):
        # P(X_A* > r) ~ vol * tau(r) at levels where that is ~0.01
        region = RegionA.ball(0.0, 1.0)
        w = SimWindow(R=1.0, seed=505)
        n = 200000
        from scipy.optimize import brentq
        target = brentq(lambda r: region.volume() * tau_bar(model_b3, r)
                        - 0.01, 10.0, 1e5)
        res = mc_tail(model_b3, w, "xAstar", [target], n, region=region)[0]
        ratio = res.estimate / 0.01
        assert 0.8 <= ratio <= 1.25

    def test_condition_refusal(self):
        m = ModelConfig(1, 1.0, 1.0, 0.0, LevyMeasure.pareto(0.6))
        region = RegionA.ball(0.0, 1.0)
        w = SimWindow(R=1.0, seed=1)
        atoms = sample_prm(m, w, 0)
        # beta = 0.6 > 1/2 so existence holds; X_A needs the full moment
        vals = x_a_functionals(m, atoms, region)
        assert vals["X_A"] >= 0

    def test_region_larger_than_window_rejected(self, model_b3):
        w = SimWindow(R=1.0, seed=1)
        big = RegionA.ball(0.0, 2.0)
        with pytest.raises(SimulationError, match="window"):
            replica_values(model_b3, w, "xbarA", 5, region=big)


class TestSupField:
    def test_lattice_zero_is_origin_value(self, model_b3, window):
        atoms = sample_prm(model_b3, window, 11)
        v, arg = sup_field(model_b3, atoms, Lattice(0.0))
        assert v == pytest.approx(mild_solution(model_b3, atoms, 0.0))
        assert arg[0] == 0.0

    def test_grid_dominates_lattice(self, model_b3, window):
        atoms = sample_prm(model_b3, window, 12)
        v_lat, _ = sup_field(model_b3, atoms, Lattice(2.0))
        v_grid, _ = sup_field(model_b3, atoms,
                              Grid(([-2.0], [2.0]), 0.05))
        assert v_grid >= v_lat - 1e-12

    def test_empty_domain_error(self, model_b3, window):
        atoms = sample_prm(model_b3, window, 1)
        with pytest.raises(SimulationError):
            sup_field(model_b3, atoms, Grid(([1.0], [0.5]), 0.05))


class TestSupFieldTailLaw:
    def test_grid_sup_matches_eta_a(self, model_b3):
        # P(sup over [0,1] > r) ~ eta_A(r) at a level deep enough for the
        # single-jump regime (eta_A ~ 0.02 sits at r ~ 24, well beyond the
        # solution bulk)
        from scipy.optimize import brentq
        from levyheat.tails import eta_a_bar
        region = RegionA.box([0.0], [1.0])
        r_star = brentq(lambda r: eta_a_bar(model_b3, region, r) - 0.02,
                        2.0, 1e4)
        window = SimWindow(R=12.0, seed=2025)
        n = 100000
        vals = replica_values(model_b3, window, "supgrid", n, region=region)
        est = float(np.mean(vals > r_star))
        assert 0.75 <= est / 0.02 <= 1.3, (r_star, est)


class TestTruncation:
    def test_mass_monotone_in_threshold(self, model_b3):
        masses = [truncation_mass(model_b3, 10.0, thr)
                  for thr in (1.0, 2.0, 4.0)]
        assert masses[0] > masses[1] > masses[2]

    def test_mass_vanishes_with_radius(self, model_b3):
        masses = [truncation_mass(model_b3, R, 2.0) for R in (10., 20., 40.)]
        assert masses[0] > masses[1] > masses[2]
        assert masses[2] < 1e-4 * eta_bar(model_b3, 2.0)

    def test_mass_at_zero_radius_is_eta(self, model_b3):
        for r in (2.0, 5.0):
            assert truncation_mass(model_b3, 0.0, r) == pytest.approx(
                eta_bar(model_b3, r), rel=5e-4)

    def test_bias_ladder(self, model_b3):
        biases = [truncation_bias(model_b3, R, 1e-3)
                  for R in (10., 20., 40., 80.)]
        assert all(a > b for a, b in zip(biases, biases[1:]))

    def test_bias_anchor(self, model_b3):
        # frozen regression anchor, first computed from this quadrature
        bias = truncation_bias(model_b3, 50.0, 1e-3)
        assert bias < 1e-2
        assert bias == pytest.approx(9.533e-3, rel=2e-2)

    def test_bias_saturates_to_campbell_mass(self, model_b3):
        full = truncation_bias(model_b3, 30.0, np.inf)
        capped = truncation_bias(model_b3, 30.0, 1e3)
        assert capped <= full * (1 + 1e-9)
        assert capped == pytest.approx(full, rel=0.05)

    def test_bias_divergence_certificate(self):
        m = ModelConfig(1, 1.0, 1.0, 0.0, LevyMeasure.pareto(0.45),
                        mode="Compensated")
        with pytest.raises(HypothesisError):
            truncation_bias(m, 10.0, 1e-3)


class TestMCResult:
    def test_wilson_contains_estimate(self):
        for (k, n) in [(0, 100), (3, 100), (50, 100), (100, 100)]:
            res = MCResult(1.0, k, n)
            lo, hi = res.wilson()
            assert lo <= res.estimate <= hi

    def test_merge_associative_and_order_free(self):
        a = MCResult(2.0, 10, 100, 0.1, 0.2)
        b = MCResult(2.0, 20, 200, 0.05, 0.3)
        c = MCResult(2.0, 5, 50)
        left = a.merge(b).merge(c)
        right = a.merge(b.merge(c))
        swapped = c.merge(a).merge(b)
        for other in (right, swapped):
            assert left.successes == other.successes
            assert left.n == other.n
        with pytest.raises(SimulationError):
            a.merge(MCResult(3.0, 1, 10))

    def test_stderr_scaling(self, model_b3):
        w = SimWindow(R=1.0, seed=321)
        region = RegionA.ball(0.0, 1.0)
        r = [12.0]
        res_n = mc_tail(model_b3, w, "xbarA", r, 20000, region=region)[0]
        res_2n = mc_tail(model_b3, w, "xbarA", r, 40000, region=region)[0]
        assert 0.6 <= res_2n.stderr / res_n.stderr <= 0.8

    def test_batch_merge_matches_full_run(self, model_b3):
        w = SimWindow(R=1.0, seed=654)
        region = RegionA.ball(0.0, 1.0)
        full = replica_values(model_b3, w, "xbarA", 300, region=region)
        first = replica_values(model_b3, w, "xbarA", 120, region=region)
        second = replica_values(model_b3, w, "xbarA", 180, region=region,
                                start=120)
        assert np.array_equal(full, np.concatenate([first, second]))


class TestCharFunction:
    def test_theta_zero(self, model_b3):
        cf = char_function(model_b3, SimWindow(R=5.0, seed=1), 0.0, 50)
        assert cf["mc"] == 1.0 + 0.0j
        assert cf["analytic"] == 1.0 + 0.0j

    def test_conjugate_symmetry(self, model_b3):
        w = SimWindow(R=30.0, seed=2)
        plus = char_function(model_b3, w, 0.5, 200)
        minus = char_function(model_b3, w, -0.5, 200)
        assert minus["analytic"] == pytest.approx(
            np.conj(plus["analytic"]), rel=1e-9)
        assert minus["mc"] == pytest.approx(np.conj(plus["mc"]), rel=1e-12)

    def test_mc_matches_quadrature(self, model_b3):
        w = SimWindow(R=60.0, seed=3)
        cf = char_function(model_b3, w, 0.5, 30000)
        assert abs(cf["mc"] - cf["analytic"]) < 3 * cf["mc_stderr"]

    def test_compensated_mode_rejected(self):
        m = ModelConfig(1, 1.0, 1.0, 0.0, LevyMeasure.pareto(3.0),
                        mode="Compensated")
        with pytest.raises(HypothesisError):
            char_function(m, SimWindow(R=5.0, seed=1), 0.5, 10)
