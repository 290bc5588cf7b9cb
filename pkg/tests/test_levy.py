"""Levy measure and condition-check tests.

Partial-moment oracles are hand-derived closed forms, e.g.
int_1^inf z * 3 z^-4 dz = 3/2 and int_1^inf z^{1/2} * 0.5 z^{-3/2} dz = inf.
"""

import math

import numpy as np
import pytest

from levyheat.levy import (CONDITION_IDS, LevyMeasure, MeasureError,
                           ModelConfig, ParseError, check_condition,
                           model_from_mapping, parse_config_text, require,
                           HypothesisError)


class TestPartialMoments:
    def test_pareto_first_moment(self):
        assert LevyMeasure.pareto(3.0).partial_moment(1.0, 1.0) == pytest.approx(1.5)

    def test_pareto_divergent(self):
        assert LevyMeasure.pareto(0.5).partial_moment(0.5, 1.0) == math.inf

    def test_empty_support(self):
        assert LevyMeasure.pareto(3.0).partial_moment(2.0, 0.1, 0.5) == 0.0

    def test_closed_vs_quadrature_random(self, rng):
        lv = LevyMeasure.pareto(3.0)
        for _ in range(50):
            q = rng.uniform(-1.0, 2.5)
            a = rng.uniform(0.2, 3.0)
            b = a + rng.uniform(0.1, 50.0)
            lw = bool(rng.integers(2))
            closed = lv.partial_moment(q, a, b, log_weight=lw)
            quadr = lv.partial_moment(q, a, b, log_weight=lw,
                                      force_quadrature=True)
            assert quadr == pytest.approx(closed, rel=1e-8, abs=1e-12)

    def test_quadrature_divergence_certificates(self):
        v, cert = LevyMeasure.pareto(0.5).partial_moment_detail(
            0.5, 1.0, force_quadrature=True)
        assert v == math.inf and cert["divergent_at"] == "inf"
        pd = LevyMeasure.power_density(0.7, 3.0)
        v, cert = pd.partial_moment_detail(0.5, 0.0, 1.0,
                                           force_quadrature=True)
        assert v == math.inf and cert["divergent_at"] == "0+"

    def test_power_density_closed(self):
        pd = LevyMeasure.power_density(0.7, 3.0)
        # int_0^1 z * z^{-1.7} dz = 1/0.3
        assert pd.partial_moment(1.0, 0.0, 1.0) == pytest.approx(1 / 0.3)
        assert pd.partial_moment(0.5, 0.0, 1.0) == math.inf

    def test_log_weight(self):
        lv = LevyMeasure.pareto(3.0)
        # int_1^inf z * 3 z^-4 log z dz = 3/(beta-q)^2 = 3/4
        assert lv.partial_moment(1.0, 1.0, log_weight=True) == pytest.approx(0.75)

    def test_first_moment_below(self):
        lv = LevyMeasure.pareto(3.0)
        got = lv.first_moment_below(np.array([0.5, 2.0, np.inf]))
        assert got == pytest.approx([0.0, 9 / 8, 1.5])


class TestMeasureConstruction:
    def test_pareto_tail_values(self):
        lv = LevyMeasure.pareto(3.0)
        assert lv.tail(0.5) == 1.0
        assert lv.tail(2.0) == pytest.approx(0.125)
        assert lv.support_floor == 1.0

    def test_kappa_bounds(self):
        with pytest.raises(MeasureError):
            LevyMeasure.power_density(2.5, 3.0)

    def test_tail_must_decrease(self):
        with pytest.raises(MeasureError):
            LevyMeasure.custom(lambda r: np.ones_like(np.asarray(r, dtype=float)),
                               lambda z: np.zeros_like(np.asarray(z, dtype=float)),
                               support_floor=1.0)

    def test_custom_cross_check(self):
        # density integrates to the stated tail
        lv = LevyMeasure.custom(
            lambda r: np.maximum(np.asarray(r, dtype=float), 1.0) ** -2.0
            * np.where(np.asarray(r) <= 1.0, 1.0, 1.0),
            lambda z: np.where(np.asarray(z) <= 1.0, 0.0,
                               2.0 * np.maximum(np.asarray(z), 1.0) ** -3.0),
            support_floor=1.0)
        assert lv.partial_moment(1.0, 1.0) == pytest.approx(2.0, rel=1e-6)

    def test_custom_mismatch_rejected(self):
        with pytest.raises(MeasureError):
            LevyMeasure.custom(
                lambda r: np.maximum(np.asarray(r, dtype=float), 1.0) ** -2.0,
                lambda z: np.where(np.asarray(z) <= 1.0, 0.0,
                                   5.0 * np.maximum(np.asarray(z), 1.0) ** -3.0),
                support_floor=1.0)


class TestModelConfig:
    def test_m0_derivation(self):
        m = ModelConfig(1, 1.0, 1.0, 0.7, LevyMeasure.pareto(3.0))
        assert m.m0 == 0.7  # no mass below 1 for the unit-floor family

    def test_m0_with_small_jumps(self):
        pd = LevyMeasure.power_density(0.4, 3.0)
        m = ModelConfig(1, 1.0, 1.0, 0.0, pd)
        assert m.m0 == pytest.approx(-pd.partial_moment(1.0, 0.0, 1.0))

    def test_noncompensated_needs_first_moment(self):
        pd = LevyMeasure.power_density(1.2, 3.0)
        with pytest.raises(MeasureError):
            ModelConfig(1, 1.4, 1.0, 0.0, pd, mode="NonCompensated")
        ModelConfig(1, 1.4, 1.0, 0.0, pd, mode="Compensated")

    def test_kappa_against_alpha_over_d(self):
        with pytest.raises(MeasureError):
            ModelConfig(1, 0.5, 1.0, 0.0, LevyMeasure.power_density(0.7, 3.0))

    def test_parameter_validation(self):
        with pytest.raises(MeasureError):
            ModelConfig(5, 1.0, 1.0, 0.0, LevyMeasure.pareto(3.0))
        with pytest.raises(MeasureError):
            ModelConfig(1, 1.0, -1.0, 0.0, LevyMeasure.pareto(3.0))

    def test_fingerprint_stable(self, model_b3):
        other = ModelConfig(1, 1.0, 1.0, 0.0, LevyMeasure.pareto(3.0))
        assert model_b3.fingerprint() == other.fingerprint()
        changed = ModelConfig(1, 1.0, 2.0, 0.0, LevyMeasure.pareto(3.0))
        assert model_b3.fingerprint() != changed.fingerprint()


class TestConditions:
    def test_existence_dichotomy_monotone(self):
        # for the unit-floor family existence <=> beta > d/(d+alpha) = 1/2
        betas = np.linspace(0.3, 1.25, 20)
        holds = []
        for beta in betas:
            m = ModelConfig(1, 1.0, 1.0, 0.0, LevyMeasure.pareto(beta))
            holds.append(check_condition(m, "SolutionExists").holds)
        assert holds == [beta > 0.5 for beta in betas]

    def test_beta06_exists(self):
        m = ModelConfig(1, 1.0, 1.0, 0.0, LevyMeasure.pareto(0.6))
        assert check_condition(m, "SolutionExists").holds

    def test_beta05_fails_with_certificate(self):
        m = ModelConfig(1, 1.0, 1.0, 0.0, LevyMeasure.pareto(0.5))
        res = check_condition(m, "SolutionExists")
        assert not res.holds
        assert res.values["big_jump"] == math.inf

    def test_all_conditions_hold_beta3(self, model_b3):
        for cond in CONDITION_IDS:
            assert check_condition(model_b3, cond).holds, cond

    def test_eta_implies_tau_on_tested_families(self):
        # families under test keep the small-jump exponent below alpha/d,
        # so the restricted-moment ladder is ordered
        models = [
            ModelConfig(1, 1.0, 1.0, 0.0, LevyMeasure.pareto(3.0)),
            ModelConfig(1, 1.0, 1.0, 0.0, LevyMeasure.pareto(0.8)),
            ModelConfig(1, 1.5, 1.0, 0.0, LevyMeasure.power_density(0.9, 2.0)),
            ModelConfig(2, 1.0, 1.0, 0.0, LevyMeasure.pareto(1.5)),
        ]
        for m in models:
            if check_condition(m, "EtaFinite").holds:
                assert check_condition(m, "TauFinite").holds

    def test_require_raises(self, model_b3):
        m = ModelConfig(1, 1.0, 1.0, 0.0, LevyMeasure.pareto(0.5))
        with pytest.raises(HypothesisError) as exc:
            require(m, "EtaFinite")
        assert exc.value.certificate["condition"] == "EtaFinite"
        require(model_b3, "EtaFinite")

    def test_unknown_condition(self, model_b3):
        with pytest.raises(MeasureError):
            check_condition(model_b3, "Bogus")


class TestConfigParsing:
    GOOD = ("d = 1\nalpha = 1.0\nt = 1.0\nm = 0.0\nmode = noncompensated\n"
            "family = pareto\nbeta = 3.0\nseed = 7\n")

    def test_round_trip(self):
        cfg = parse_config_text(self.GOOD)
        model = model_from_mapping(cfg)
        assert model.d == 1 and model.levy.family_tag == "ParetoTail"
        assert cfg["seed"] == 7

    def test_comments_and_blanks(self):
        cfg = parse_config_text("# header\n\nd = 1 # inline\nalpha = 1.0\n"
                                "t = 1.0\nfamily = pareto\nbeta = 3.0\n")
        assert model_from_mapping(cfg).alpha == 1.0

    def test_unknown_key_diagnostic(self):
        with pytest.raises(ParseError) as exc:
            parse_config_text("d = 1\nbogus = 2\n")
        assert exc.value.line == 2 and exc.value.column == 1

    def test_bad_value_diagnostic(self):
        with pytest.raises(ParseError) as exc:
            parse_config_text("alpha = xyz\n")
        assert exc.value.line == 1

    def test_duplicate_key(self):
        with pytest.raises(ParseError):
            parse_config_text("d = 1\nd = 2\n")

    def test_missing_required(self):
        with pytest.raises(ParseError):
            model_from_mapping(parse_config_text("d = 1\nalpha = 1.0\n"))

    def test_powerdensity_family(self):
        cfg = parse_config_text("d = 1\nalpha = 1.5\nt = 1.0\n"
                                "family = powerdensity\nbeta = 3.0\n"
                                "kappa = 0.5\nc_small = 0.3\n")
        model = model_from_mapping(cfg)
        assert model.levy.family_tag == "PowerDensity"
        assert model.levy.params["c_small"] == 0.3
