import json
import math

import numpy as np
import pytest
from scipy import integrate

from malthus import (BetaFragmentation, ConstantHazard, InvalidModel,
                     MomentTable, NonPositiveH, PhasePoint, TableFragmentation,
                     TableHazard, UniformFragmentation, h_transform,
                     make_adder, model_from_config, validate)


class TestPhasePoint:
    def test_valid(self):
        p = PhasePoint(0.5, 2.0)
        assert p.a == 0.5 and p.y == 2.0

    @pytest.mark.parametrize("a,y", [(-0.1, 1.0), (0.0, 0.0), (0.0, -1.0)])
    def test_invalid(self, a, y):
        with pytest.raises(ValueError):
            PhasePoint(a, y)


class TestConstantHazard:
    def test_closed_forms(self):
        hz = ConstantHazard(2.0, a_star=0.5)
        assert hz(0.2) == 0.0
        assert hz(0.5) == 2.0  # right-continuous at the dead-zone edge
        assert hz.cumulative(1.5) == pytest.approx(2.0)
        assert hz.inverse_cumulative(2.0) == pytest.approx(1.5)

    def test_inverse_roundtrip(self):
        hz = ConstantHazard(0.7)
        H = np.linspace(0.0, 30.0, 100)
        assert np.allclose(hz.cumulative(hz.inverse_cumulative(H)), H)


class TestTableHazard:
    def test_matches_adaptive_quadrature(self):
        hz = TableHazard([0.0, 1.0, 2.0, 4.0], [0.5, 1.5, 2.0, 2.0])
        for a in [0.3, 1.0, 1.7, 3.5, 6.0]:
            ref, _ = integrate.quad(hz, 0.0, a, limit=200)
            assert hz.cumulative(a) == pytest.approx(ref, abs=1e-10)

    def test_inverse_roundtrip(self):
        hz = TableHazard([0.0, 1.0, 2.0, 4.0], [0.5, 1.5, 2.0, 2.0])
        H = np.linspace(0.0, 28.0, 500)
        assert np.max(np.abs(hz.cumulative(hz.inverse_cumulative(H)) - H)) < 1e-12

    def test_dead_zone_from_leading_zeros(self):
        hz = TableHazard([0.0, 1.0, 2.0], [0.0, 0.0, 3.0])
        assert hz.a_star == pytest.approx(1.0)
        assert hz(0.5) == 0.0
        assert hz.cumulative(1.0) == 0.0


class TestFragmentation:
    def test_beta_moments(self):
        F = BetaFragmentation(5, 5)
        assert F.moment(0) == pytest.approx(1.0)
        assert F.moment(1) == pytest.approx(0.5)
        assert F.moment(2) == pytest.approx(3.0 / 11.0)

    def test_uniform_moments(self):
        F = UniformFragmentation()
        assert F.moment(1) == pytest.approx(0.5)
        assert F.moment(2) == pytest.approx(1.0 / 3.0)

    def test_beta_pdf_matches_scipy(self):
        from scipy import stats
        F = BetaFragmentation(5, 5)
        r = np.linspace(-0.2, 1.2, 57)
        assert np.allclose(F.pdf(r), stats.beta(5, 5).pdf(np.clip(r, 0, 1)) *
                           ((r > 0) & (r < 1)), atol=1e-12)

    def test_table_rejects_bad_mass(self):
        with pytest.raises(InvalidModel, match=r"\(A2\)"):
            TableFragmentation([0.0, 1.0], [0.5, 0.5])

    def test_table_moments(self):
        # symmetric triangle density on [0, 1]: m1 = 1/2
        F = TableFragmentation([0.0, 0.5, 1.0], [0.0, 2.0, 0.0])
        assert F.moment(0) == pytest.approx(1.0)
        assert F.moment(1) == pytest.approx(0.5)

    def test_sampling_mean(self):
        rng = np.random.default_rng(1)
        F = BetaFragmentation(5, 5)
        s = F.sample(rng, 20000)
        assert abs(np.mean(s) - 0.5) < 0.005
        sb = F.sample_size_biased(rng, 20000)
        # size-biased mean = m2 / m1 = 6/11
        assert abs(np.mean(sb) - 6.0 / 11.0) < 0.005


class TestModelSpec:
    def test_adder_fields(self, adder):
        assert adder.is_adder
        assert adder.g1(0.0, 2.0) == pytest.approx(2.0)
        assert adder.g2(1.0, 3.0) == pytest.approx(3.0)
        assert adder.beta(0.5, 2.0) == pytest.approx(2.0)
        assert adder.kernel_mass(0.0, 1.0) == pytest.approx(2.0)

    def test_kernel_density_mass(self, adder):
        y = 2.5
        z = np.linspace(0.0, y, 4001)
        mass = np.trapezoid(adder.kernel_density(0.0, y, z), z)
        assert mass == pytest.approx(2.0, abs=1e-6)

    def test_kernel_mass_above(self, adder):
        assert adder.kernel_mass_above(0.0, 1.0, 2.0) == 0.0
        val = adder.kernel_mass_above(0.0, 4.0, 2.0)
        ref = 2.0 * (1.0 - adder.fragmentation.cdf(0.5))
        assert val == pytest.approx(ref)

    def test_generator_on_exact_eigenfunction(self, adder_d0):
        # Q y = (lambda_growth - d0) * y for the adder, exactly
        rng = np.random.default_rng(0)
        for _ in range(50):
            a, y = rng.uniform(0, 4), rng.uniform(0.1, 8)
            q = adder_d0.apply_generator(lambda A, Y: Y, a, y)
            assert abs(q - 0.8 * y) / y < 1e-8

    def test_generator_quadratic(self, adder):
        # Q y^2 = 2 lam y^2 + lam B y^3 (2 m2 - 1); m2 = 3/11
        a, y = 0.2, 1.0
        q = adder.apply_generator(lambda A, Y: Y**2, a, y)
        assert q == pytest.approx(2.0 - 5.0 / 11.0, rel=1e-7)


class TestValidate:
    def test_default_passes(self, adder):
        report = validate(adder)
        assert report.all_passed
        assert {c.name for c in report.checks} >= {"(A1) hazard bounds", "(A2) moments"}

    def test_a3_violation(self):
        m = make_adder(1.0, ConstantHazard(1.0), BetaFragmentation(5, 5), d0=2.0)
        with pytest.raises(InvalidModel, match=r"\(A3\)"):
            validate(m)

    def test_a2_violation(self):
        m = make_adder(1.0, ConstantHazard(1.0), BetaFragmentation(5, 3))
        with pytest.raises(InvalidModel, match=r"\(A2\)"):
            validate(m)


class TestHTransform:
    def test_jump_rate_and_generator(self, adder):
        mk = h_transform(adder, lambda a, y: np.asarray(y, dtype=float), 1.0)
        # h = y: weighted kernel mass is y itself (2 m1 = 1)
        assert mk.h_weighted_mass(0.3, 2.0) == pytest.approx(2.0, rel=1e-10)
        assert mk.jump_rate(0.3, 2.0) == pytest.approx(adder.beta(0.3, 2.0), rel=1e-10)
        # A V closed form for V = 1/y + y:
        # lam (y - 1/y) + lam B (1 - (1 - 2 m2) y^2)
        a, y = 0.5, 2.0
        av = mk.apply_generator(lambda A, Y: 1.0 / Y + Y, a, y)
        expected = (y - 1.0 / y) + (1.0 - (1.0 - 6.0 / 11.0) * y**2)
        assert av == pytest.approx(expected, rel=1e-6)

    def test_post_jump_density_is_size_biased(self, adder):
        mk = h_transform(adder, lambda a, y: np.asarray(y, dtype=float), 1.0)
        y = 2.0
        z = np.linspace(1e-6, y, 2001)
        dens = np.asarray(mk.post_jump_density(0.0, y, z))
        assert np.trapezoid(dens, z) == pytest.approx(1.0, abs=1e-4)
        # mode of the rho-density 2 rho F(rho) for Beta(5,5) is at rho = 5/9
        assert z[np.argmax(dens)] == pytest.approx(y * 5.0 / 9.0, abs=0.01)

    def test_nonpositive_h(self, adder):
        with pytest.raises(NonPositiveH):
            h_transform(adder, lambda a, y: y - 10.0, 1.0)


class TestConfig:
    def test_roundtrip(self, tmp_path):
        cfg = {
            "model_type": "adder",
            "lambda_growth": 1.5,
            "d0": 0.1,
            "hazard": {"type": "table", "a": [0.0, 1.0], "B": [1.0, 2.0]},
            "fragmentation": {"type": "uniform"},
        }
        m = model_from_config(cfg)
        assert m.lambda_growth == 1.5 and m.d0 == 0.1
        assert m.B(0.5, 1.0) == pytest.approx(1.5)
        assert isinstance(m.fragmentation, UniformFragmentation)

    def test_general_rejected(self):
        with pytest.raises(InvalidModel):
            model_from_config({"model_type": "general"})

    def test_moment_table(self):
        mt = MomentTable.of(BetaFragmentation(20, 20))
        assert mt.m1 == pytest.approx(0.5)
        assert mt.m2 == pytest.approx(20.0 * 21.0 / (40.0 * 41.0))
