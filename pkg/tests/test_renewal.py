import math

import numpy as np
import pytest
from scipy import integrate

from malthus import (ConstantHazard, BetaFragmentation, FirstJumpLaw,
                     KernelAssembler, PhasePoint, SizeGrid, TableHazard,
                     make_adder)


class TestFirstJumpLaw:
    def test_survival_closed_form(self, adder, law):
        # B = 1: survival from (0, y) is exp(-y (e^{t} - 1))
        x = PhasePoint(0.0, 1.5)
        for t in [0.1, 0.5, 1.0, 2.0]:
            ref = math.exp(-1.5 * (math.exp(t) - 1.0))
            assert law.survival(x, t) == pytest.approx(ref, rel=1e-12)

    def test_density_integrates_to_one(self, law):
        x = PhasePoint(0.3, 0.7)
        val, _ = integrate.quad(lambda t: law.jump_time_density(x, t), 0.0, 12.0,
                                limit=200)
        assert val == pytest.approx(1.0, abs=1e-9)

    def test_density_is_survival_derivative(self, law):
        x = PhasePoint(0.0, 2.0)
        t, h = 0.4, 1e-6
        fd = -(law.survival(x, t + h) - law.survival(x, t - h)) / (2.0 * h)
        assert law.jump_time_density(x, t) == pytest.approx(fd, rel=1e-8)

    def test_row_quadrature_total_mass(self, law):
        # weights integrate the jump-time density: total mass 1 up to the tail
        q = law.row_quadrature(PhasePoint(0.0, 1.0))
        assert float(np.sum(q.w)) == pytest.approx(1.0, abs=1e-9)
        assert np.all(np.diff(q.t) > 0) and np.all(q.u >= 1.0)

    def test_offspring_constant(self, law):
        assert law.offspring_constant(PhasePoint(0.2, 1.3)) == pytest.approx(2.0, abs=1e-8)

    def test_kernel_K_against_adaptive_quadrature(self, adder, law):
        x = PhasePoint(0.0, 1.0)
        lam = 1.0
        F = adder.fragmentation
        hz = adder.hazard

        def ref(z):
            def integrand(t):
                u = x.y * math.exp(t)
                a_t = x.a + (u - x.y)
                psi = hz(a_t) * u * math.exp(-(hz.cumulative(a_t) - hz.cumulative(x.a)))
                return math.exp(-lam * t) * (2.0 / u) * F.pdf(z / u) * psi

            val, _ = integrate.quad(integrand, 0.0, 10.0, limit=400)
            return val

        for z in [0.3, 0.8, 1.5, 3.0]:
            assert law.kernel_K(x, z, lam) == pytest.approx(ref(z), rel=1e-6)

    def test_kernel_K_total_mass_at_lam0(self, law):
        # int K_0(x, z) dz = C_x = 2
        x = PhasePoint(0.0, 1.0)
        z = np.linspace(0.0, 30.0, 6001)
        mass = np.trapezoid(law.kernel_K(x, z, 0.0), z)
        assert mass == pytest.approx(2.0, abs=1e-4)

    def test_tabulated_hazard_consistency(self):
        hz = TableHazard([0.0, 1.0, 2.0, 4.0], [0.5, 1.5, 2.0, 2.0])
        m = make_adder(1.0, hz, BetaFragmentation(5, 5))
        law = FirstJumpLaw(m)
        x = PhasePoint(0.0, 1.0)
        val, _ = integrate.quad(lambda t: law.jump_time_density(x, t), 0.0, 8.0,
                                limit=200)
        assert val == pytest.approx(1.0, abs=1e-8)


class TestSizeGrid:
    def test_uniform(self):
        g = SizeGrid.uniform(8.0, 128)
        assert g.nodes[0] == 0.0 and g.nodes[-1] == 8.0
        assert float(np.sum(g.weights)) == pytest.approx(8.0)
        assert 1.0 in g.nodes  # anchor node always present
        assert g.index_of(1.0) == int(np.where(g.nodes == 1.0)[0][0])

    def test_integrate_polynomial(self):
        g = SizeGrid.uniform(4.0, 4097)
        vals = g.nodes**2
        assert g.integrate(vals) == pytest.approx(4.0**3 / 3.0, rel=1e-6)

    def test_index_of_missing(self):
        g = SizeGrid.uniform(8.0, 64)
        with pytest.raises(ValueError):
            g.index_of(0.12345)


class TestKernelMatrix:
    def test_exact_eigenfunction_of_untruncated_operator(self, assembler_r8):
        # f(z) = z satisfies (G_lam f)(y) = y at lam = lambda_growth, up to
        # truncation leak; interior rows should be accurate
        grid = assembler_r8.grid
        mat = assembler_r8.matrix(1.0)
        out = mat.apply(grid.nodes)
        sel = (grid.nodes > 0.25) & (grid.nodes < 4.0)
        assert np.max(np.abs(out[sel] / grid.nodes[sel] - 1.0)) < 1e-3

    def test_adjoint_is_transpose_pairing(self, assembler_r8):
        mat = assembler_r8.matrix(1.0)
        rng = np.random.default_rng(3)
        f = rng.random(mat.grid.n)
        w = rng.random(mat.grid.n)
        lhs = float(np.dot(w, mat.apply(f)))
        rhs = float(np.dot(mat.adjoint_apply(w), f))
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_rows_nonnegative_and_cached(self, assembler_r8):
        mat = assembler_r8.matrix(0.5)
        assert np.all(mat.M >= 0.0)
        assert assembler_r8.matrix(0.5) is mat

    def test_zero_size_row_is_empty(self, assembler_r8):
        mat = assembler_r8.matrix(1.0)
        assert np.all(mat.M[0] == 0.0)

    def test_leak_correction_positive_near_boundary(self, adder):
        grid = SizeGrid.uniform(4.0, 64)
        mat = KernelAssembler(adder, grid).matrix(1.0)
        assert mat.correction[-1] > 0.0  # orbits from y = R leak past R
        assert mat.correction[1] < mat.correction[-1]
