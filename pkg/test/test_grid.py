import math
import unittest

import numpy as np

from twistframe import grid
from twistframe.common.exception import DimensionError, GridError


class TestAxisGrid(unittest.TestCase):
    def test_grid_arithmetic(self):
        """Count, step and first point of an unshifted grid."""
        axis = grid.make_grid(8, 4, midpoint=False)
        self.assertEqual(axis.count, 64)
        self.assertEqual(axis.h, 0.25)
        self.assertEqual(axis.points()[0], -8.0)

    def test_points(self):
        """Corner and midpoint sampling of a small grid."""
        np.testing.assert_array_equal(grid.make_grid(1, 2).points(), [-1.0, -0.5, 0.0, 0.5])
        np.testing.assert_array_equal(grid.make_grid(1, 2, midpoint=True).points(), [-0.75, -0.25, 0.25, 0.75])

    def test_invalid_grids(self):
        """Zero samples per unit and non-integral L*q are rejected."""
        self.assertRaises(GridError, grid.make_grid, 1, 0)
        self.assertRaises(GridError, grid.make_grid, 0.3, 2)
        self.assertRaises(GridError, grid.make_grid, -1, 2)

    def test_lookup(self):
        """Lattice coordinates map to indices; off-lattice coordinates raise."""
        axis = grid.make_grid(1, 2)
        idx, inside = axis.lookup(np.array([-1.0, 0.5, 1.0]))
        np.testing.assert_array_equal(idx, [0, 3, 4])
        np.testing.assert_array_equal(inside, [True, True, False])
        self.assertRaises(GridError, axis.lookup, np.array([0.1]))

    def test_integer_shift_reproduces_samples(self):
        """Shifting by one unit moves the samples by q indices exactly."""
        axis = grid.make_grid(4, 8, midpoint=True)
        factor = grid.indicator(0, 1)
        base = factor.evaluate(axis.points())
        moved = factor.shifted(1).evaluate(axis.points())
        np.testing.assert_array_equal(moved, np.roll(base, 8))

    def test_grid_spec_roles(self):
        """A phase-plane grid pairs its axes and a group grid has an odd count."""
        axis = grid.make_grid(1, 2)
        self.assertRaises(GridError, grid.GridSpec, (axis,), "phase-plane")
        self.assertRaises(GridError, grid.GridSpec, (axis, axis), "group")
        self.assertRaises(GridError, grid.GridSpec, (axis,), "torus")
        spec = grid.group_spec(axis, t=grid.make_grid(2, 4))
        self.assertEqual(spec.shape, (4, 4, 16))
        self.assertAlmostEqual(spec.cell_volume, 0.5 * 0.5 * 0.25)


class TestFactors(unittest.TestCase):
    def test_evaluation(self):
        """Point values of the analytic factor kinds."""
        self.assertAlmostEqual(complex(grid.gaussian(math.pi).evaluate(0.0)), 1.0)
        self.assertAlmostEqual(complex(grid.bump(0, 2).evaluate(1.0)).real, math.exp(-1), places=12)
        self.assertAlmostEqual(complex(grid.bump(0, 2).evaluate(2.0)), 0.0)
        self.assertAlmostEqual(complex(grid.abs_exp().evaluate(-1.0)).real, math.exp(-1), places=12)
        self.assertAlmostEqual(complex(grid.step_decay(2).evaluate(4.5)).real, 1.0 / 3.0, places=12)
        self.assertRaises(ValueError, grid.Factor1D, "wavelet")

    def test_shift_then_modulate(self):
        """Modulation after a shift leaves the phase reference at the origin."""
        x = np.linspace(-3, 3, 13)
        g = grid.gaussian(1.0)
        np.testing.assert_allclose(
            g.shifted(1).modulated(0.5).evaluate(x), np.exp(1j * np.pi * x) * np.exp(-((x - 1) ** 2)), atol=1e-14
        )
        np.testing.assert_allclose(
            g.modulated(0.5).shifted(1).evaluate(x), -np.exp(1j * np.pi * x) * np.exp(-((x - 1) ** 2)), atol=1e-14
        )

    def test_unit_phase_large_argument(self):
        """The phase argument is reduced modulo 2 before exponentiation."""
        self.assertAlmostEqual(complex(grid.unit_phase(1e6 + 0.5)), 1j, places=12)
        self.assertEqual(grid.sign_of_parity(3), -1)
        self.assertEqual(grid.sign_of_parity(-4), 1)

    def test_closed_form_fourier(self):
        """Analytic transforms at the reference frequencies."""
        self.assertAlmostEqual(complex(grid.fourier_1d(grid.indicator(0, 1), 0.0)), 1.0)
        value = complex(grid.fourier_1d(grid.gaussian(math.pi), 1.0))
        self.assertAlmostEqual(value.real, math.exp(-math.pi), places=12)
        self.assertAlmostEqual(complex(grid.fourier_1d(grid.indicator(-0.5, 0.5), 0.5)).real, 2 / math.pi, places=12)

    def test_quadrature_matches_analytic(self):
        """Grid quadrature of plain Gaussian samples matches the closed form."""
        spec = grid.line_spec(grid.make_grid(8, 32, midpoint=True))
        factor = grid.gaussian(math.pi)
        plain = grid.SampledFunction(spec, factor.evaluate(spec.axes[0].points()))
        omega = np.linspace(-4, 4, 20)
        np.testing.assert_allclose(grid.fourier_1d(plain, omega), factor.fourier(omega), atol=1e-8)

    def test_bump_transform(self):
        """The support quadrature of a bump agrees with grid quadrature of its samples."""
        factor = grid.bump(0, 2)
        axis = grid.make_grid(4, 64, midpoint=True)
        plain = grid.SampledFunction(grid.line_spec(axis), factor.evaluate(axis.points()))
        omega = np.array([0.0, 0.3, 1.7])
        np.testing.assert_allclose(factor.fourier(omega), grid.fourier_1d(plain, omega), atol=1e-8)
        self.assertEqual(grid.quadrature_ft(factor, omega, axis)[1], 0.0)

    def test_line_plancherel(self):
        """Sum of |F f|^2 over a frequency grid equals the squared norm of gaussian(pi)."""
        factor = grid.gaussian(math.pi)
        omega = grid.make_grid(8, 32, midpoint=True)
        spectrum = np.abs(factor.fourier(omega.points())) ** 2
        self.assertAlmostEqual(float(np.sum(spectrum) * omega.h), math.sqrt(0.5), delta=1e-6)

    def test_correlation(self):
        """Closed-form and quadrature correlations."""
        g = grid.gaussian(1.0)
        self.assertAlmostEqual(complex(g.correlate(g, 0.0)).real, math.sqrt(math.pi / 2), places=12)
        self.assertAlmostEqual(complex(grid.sinc().correlate(grid.sinc(), 0.5)).real, 2 / math.pi, places=12)
        box = grid.indicator(0, 1)
        self.assertAlmostEqual(complex(box.correlate(box, 0.5)).real, 0.5, places=12)

    def test_tail_mass(self):
        """Compact factors inside the box have no tail; unbounded ones report a positive one."""
        self.assertEqual(grid.indicator(0, 1).tail_mass(8), 0.0)
        self.assertGreater(grid.abs_exp().tail_mass(8), 0.0)
        self.assertLess(grid.gaussian(math.pi).tail_mass(8), 1e-20)

    def test_step_decay_for_box(self):
        """Every step inside [-L, L) is kept and the dropped squared mass is reported."""
        factor = grid.step_decay_for_box(8)
        self.assertEqual(factor.params, (3.0,))
        self.assertAlmostEqual(factor.step_tail_mass(), math.pi**2 / 6 - (1 + 1 / 4 + 1 / 9 + 1 / 16), places=12)
        self.assertEqual(grid.gaussian(1).step_tail_mass(), 0.0)

    def test_fourier_coefficients(self):
        """Torus coefficients of cos(2 pi x)."""
        torus = grid.torus_grid(8)
        coefficients = grid.fourier_coefficients(np.cos(2 * np.pi * torus.points()), 2)
        np.testing.assert_allclose(coefficients, [0, 0.5, 0, 0.5, 0], atol=1e-14)
        self.assertRaises(GridError, grid.fourier_coefficients, np.ones(4), 2)


class TestSampledFunctions(unittest.TestCase):
    def setUp(self):
        self.spec = grid.phase_plane_spec(grid.make_grid(4, 8, midpoint=True))

    def test_sample_separable(self):
        """Products of indicators are one on the square and zero elsewhere."""
        f = grid.sample_separable([grid.indicator(0, 1), grid.indicator(0, 1)], self.spec)
        x = self.spec.axes[0].points()
        inside = (x >= 0) & (x < 1)
        np.testing.assert_array_equal(f.values, np.outer(inside, inside).astype(complex))
        self.assertEqual(f.factors, (grid.indicator(0, 1), grid.indicator(0, 1)))

    def test_dimension_mismatch(self):
        """The factor count must equal the grid dimension."""
        self.assertRaises(DimensionError, grid.sample_separable, [grid.sinc()], self.spec)

    def test_inner_products(self):
        """Area, Gaussian norm and disjoint supports."""
        rect = grid.sample_separable([grid.indicator(0, 2), grid.indicator(0, 1)], self.spec)
        self.assertAlmostEqual(grid.inner_product(rect, rect), 2.0)

        wide = grid.phase_plane_spec(grid.make_grid(8, 32, midpoint=True))
        gauss = grid.sample_separable([grid.gaussian(math.pi), grid.gaussian(math.pi)], wide)
        self.assertAlmostEqual(grid.inner_product(gauss, gauss).real, 0.5, places=10)

        line = grid.line_spec(grid.make_grid(4, 8, midpoint=True))
        first = grid.sample_separable([grid.indicator(0, 1)], line)
        second = grid.sample_separable([grid.indicator(2, 3)], line)
        self.assertEqual(grid.inner_product(first, second), 0)

    def test_conjugate_symmetry(self):
        """<f, g> = conj(<g, f>)."""
        f = grid.sample_separable([grid.gaussian(1).modulated(0.3), grid.indicator(0, 1)], self.spec)
        g = grid.sample_separable([grid.indicator(-1, 1), grid.gaussian(2).shifted(0.5)], self.spec)
        self.assertAlmostEqual(grid.inner_product(f, g), grid.inner_product(g, f).conjugate(), places=14)

    def test_combine(self):
        """Linear combinations keep the analytic terms."""
        f = grid.sample_separable([grid.indicator(0, 1), grid.indicator(0, 1)], self.spec)
        g = grid.sample_separable([grid.indicator(1, 2), grid.indicator(0, 1)], self.spec)
        s = grid.combine([f, g], [1.0, 2.0])
        np.testing.assert_array_equal(s.values, f.values + 2 * g.values)
        self.assertEqual(len(s.terms), 2)
        self.assertAlmostEqual(s.norm2(), 5.0)
        self.assertRaises(ValueError, grid.combine, [], [])

    def test_values_shape(self):
        """Samples must match the grid shape."""
        self.assertRaises(GridError, grid.SampledFunction, self.spec, np.zeros((3, 3)))


if __name__ == "__main__":
    unittest.main()
