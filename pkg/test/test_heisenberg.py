import math
import unittest

import numpy as np

from twistframe import frames, grid, heisenberg, weyl
from twistframe.common.exception import (
    CapExceededError,
    GridError,
    InputError,
    LambdaError,
    RefusalError,
    UnknownExampleError,
)
from twistframe.heisenberg import HFunction, HLatticeIndex, HTerm

GAUSSIAN_NORM2 = 2.0 * math.sqrt(math.pi / 2.0)


def g00_closed_form(lambdas):
    r = np.arange(-8, 9)
    return 2.0 * math.pi * np.sum(np.exp(-2.0 * math.pi**2 * (lambdas[:, None] + r[None, :]) ** 2), axis=1)


def small_spec():
    return grid.group_spec(grid.make_grid(4, 2, midpoint=True), t=grid.make_grid(6, 4, midpoint=True))


def smooth(spec):
    return heisenberg.separable([grid.gaussian(1.0), grid.gaussian(2.0), grid.gaussian(1.0)], spec)


class TestGroupLaw(unittest.TestCase):
    def setUp(self):
        self.indices = [
            HLatticeIndex(1, 0, 0),
            HLatticeIndex(0, 1, 0),
            HLatticeIndex(-1, 2, 3),
            HLatticeIndex(2, -1, -1),
        ]

    def test_product_matches_group_law(self):
        """The lattice product is the group law on (2k, l, m)."""
        for a in self.indices:
            for b in self.indices:
                with self.subTest(a=a, b=b):
                    expected = heisenberg.group_law(a.as_group_element(), b.as_group_element())
                    self.assertEqual(heisenberg.group_product(a, b).as_group_element(), expected)

    def test_commutator(self):
        """(1,0,0)(0,1,0) and (0,1,0)(1,0,0) differ in the centre."""
        a, b = HLatticeIndex(1, 0, 0), HLatticeIndex(0, 1, 0)
        self.assertEqual(heisenberg.group_product(a, b), HLatticeIndex(1, 1, -1))
        self.assertEqual(heisenberg.group_product(b, a), HLatticeIndex(1, 1, 1))

    def test_inverse(self):
        """a . a^-1 is the identity."""
        for a in self.indices:
            self.assertEqual(heisenberg.group_product(a, heisenberg.group_inverse(a)), heisenberg.IDENTITY)

    def test_window(self):
        """Windows list (2r+1)^3 indices."""
        self.assertEqual(len(heisenberg.h_window(1)), 27)
        self.assertRaises(GridError, HLatticeIndex, 0, 0.5, 0)


class TestLeftTranslation(unittest.TestCase):
    def test_example_value(self):
        """L_(2,0,0) of Example 1 at (2.5, 0.5, 0) is exp(-1/4)."""
        moved = heisenberg.left_translate(heisenberg.example_factory(1), HLatticeIndex(1, 0, 0))
        value = moved.terms[0].evaluate(np.array(2.5), np.array(0.5), np.array(0.0))
        self.assertAlmostEqual(float(value.real), 0.778801, places=6)

    def test_translation_is_left_action(self):
        """L_a L_b phi(X) = phi(b^-1 a^-1 X)."""
        phi = smooth(small_spec())
        a, b = HLatticeIndex(1, -1, 2), HLatticeIndex(0, 1, -1)
        moved = heisenberg.left_translate(heisenberg.left_translate(phi, b), a)
        point = (0.3, -0.7, 1.1)
        inner = heisenberg.group_law(heisenberg.group_inverse(a).as_group_element(), point)
        source = heisenberg.group_law(heisenberg.group_inverse(b).as_group_element(), inner)
        expected = phi.terms[0].evaluate(*(np.array(v) for v in source))
        value = moved.terms[0].evaluate(*(np.array(v) for v in point))
        self.assertAlmostEqual(complex(value), complex(expected), places=12)

    def test_sampled_translation(self):
        """Sampled functions are translated by a Fourier shift along t."""
        spec = small_spec()
        phi = smooth(spec)
        sampled = HFunction(spec, (), phi.samples())
        self.assertRaises(InputError, heisenberg.left_translate, sampled, HLatticeIndex(0, 0, 1))
        for idx, atol in ((HLatticeIndex(0, 0, 1), 1e-6), (HLatticeIndex(1, 1, 0), 1e-4)):
            with self.subTest(idx=idx):
                moved = heisenberg.left_translate(sampled, idx, interpolate=True)
                exact = heisenberg.left_translate(phi, idx).samples()
                np.testing.assert_allclose(moved.values, exact, atol=atol)


class TestExamples(unittest.TestCase):
    def test_factories(self):
        """Every example is a single separable term on the group grid."""
        for example_id in range(1, 7):
            with self.subTest(example_id=example_id):
                phi = heisenberg.example_factory(example_id)
                self.assertEqual(len(phi.terms), 1)
                self.assertEqual(phi.spec.role, "group")
        self.assertEqual(heisenberg.example_factory(3).terms[0].factors[2], grid.abs_exp())
        self.assertEqual(heisenberg.example_factory(6).terms[0].factors[1], grid.step_decay(3))

    def test_parameters(self):
        """Example 1 takes its t-factor from the parameters."""
        phi = heisenberg.example_factory(1, {"h": "sinc"})
        self.assertEqual(phi.terms[0].factors[2], grid.sinc())
        self.assertRaises(InputError, heisenberg.example_factory, 1, {"h": "cauchy"})

    def test_unknown(self):
        """Only examples 1 to 6 exist."""
        self.assertRaises(UnknownExampleError, heisenberg.example_factory, 7)
        self.assertRaises(UnknownExampleError, heisenberg.example_factory, 0)


class TestPartialTransform(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.phi = heisenberg.example_factory(1)

    def test_zero_frequency(self):
        """At lambda = 0 the transform is sqrt(pi) chi_[0,2] (x) chi_[0,1]."""
        F = heisenberg.partial_ft(self.phi, 0.0)
        self.assertAlmostEqual(np.abs(F.values).max(), math.sqrt(math.pi), places=12)
        self.assertAlmostEqual(heisenberg.plane_inner(F, F).real, 2.0 * math.pi, places=10)

    def test_unit_frequency(self):
        """At lambda = 1 the amplitude drops to sqrt(pi) exp(-pi^2)."""
        F = heisenberg.partial_ft(self.phi, 1.0)
        self.assertAlmostEqual(np.abs(F.values).max(), 9.17e-5, delta=1e-7)

    def test_sampled_matches_terms(self):
        """Quadrature along t agrees with the analytic transform."""
        spec = small_spec()
        phi = smooth(spec)
        sampled = HFunction(spec, (), phi.samples())
        np.testing.assert_allclose(
            heisenberg.partial_ft(sampled, 0.5).values, heisenberg.partial_ft(phi, 0.5).values, atol=1e-8
        )

    def test_kernel_needs_nonzero_lambda(self):
        """The group Fourier kernel is not defined at lambda = 0."""
        self.assertRaises(LambdaError, heisenberg.group_fourier_kernel, self.phi, 0.0)


class TestInnerProducts(unittest.TestCase):
    def test_norm(self):
        """||phi||^2 = 2 sqrt(pi/2) for Example 1."""
        self.assertAlmostEqual(heisenberg.example_factory(1).norm2(), GAUSSIAN_NORM2, places=6)

    def test_central_shift(self):
        """<phi, L_(0,0,1) phi> = 2 sqrt(pi/2) exp(-1/2) for Example 2."""
        phi = heisenberg.example_factory(2)
        value = heisenberg.h_inner_product(phi, heisenberg.left_translate(phi, HLatticeIndex(0, 0, 1)))
        self.assertAlmostEqual(value.real, 1.520346, delta=1e-4)

    def test_sinc_overlap(self):
        """<phi, L_(2,0,0) phi> = Si(pi)/pi for Example 5."""
        phi = heisenberg.example_factory(5)
        value = heisenberg.h_inner_product(phi, heisenberg.left_translate(phi, HLatticeIndex(1, 0, 0)))
        self.assertAlmostEqual(value.real, 0.589490, delta=1e-4)

    def test_plancherel_over_lambda(self):
        """integral |lam| ||K^lam||_HS^2 dlam over the real line is ||phi||^2."""
        phi = heisenberg.example_factory(1)
        step = 0.125
        total = 0.0
        # the integrand is even in lam for a real generator
        for lam in np.arange(0.0, 1.0, step) + 0.5 * step:
            K = heisenberg.group_fourier_kernel(phi, float(lam))
            total += 2.0 * weyl.hs_inner(K, K).real * lam * step
        self.assertAlmostEqual(total, GAUSSIAN_NORM2, delta=1e-2 * GAUSSIAN_NORM2)

    def test_scaling_plancherel(self):
        """|lam| ||K^lam||_HS^2 = ||phi^lam||^2 along the fibers."""
        for row in heisenberg.scaling_plancherel_table(heisenberg.example_factory(1)):
            with self.subTest(lam=row["lambda"]):
                self.assertLessEqual(row["relative_error"], 1e-4)
        self.assertTrue(heisenberg.verify_scaling_plancherel(heisenberg.example_factory(5)))


class TestBracket(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.phi = heisenberg.example_factory(1)
        cls.G00 = heisenberg.G_function(cls.phi)

    def test_closed_form(self):
        """G_00 = 2 pi sum_r exp(-2 pi^2 (lam + r)^2)."""
        np.testing.assert_allclose(self.G00.values.real, g00_closed_form(self.G00.lambdas), atol=1e-8)
        self.assertEqual(len(self.G00.lambdas), 64)
        self.assertEqual(self.G00.metadata()["route"], "reduced")

    def test_reference_points(self):
        """G_00(1) = 2 pi and G_00(1/2) = 4 pi exp(-pi^2/2)."""
        G = heisenberg.G_function(self.phi, lambdas=[0.5, 1.0])
        self.assertAlmostEqual(G.values[0].real, 0.09038, delta=1e-4)
        self.assertAlmostEqual(G.values[1].real, 6.28319, delta=1e-4)

    def test_plancherel(self):
        """integral_0^1 G_00 = ||phi||^2."""
        self.assertAlmostEqual(self.G00.mean().real, GAUSSIAN_NORM2, delta=1e-2)

    def test_disjoint_translates(self):
        """G_(k,l) vanishes when the (x, y) supports are disjoint."""
        for kl in ((1, 0), (0, 1), (1, -1)):
            with self.subTest(kl=kl):
                G = heisenberg.G_function(self.phi, kl, lambdas=[0.25, 0.75])
                self.assertLessEqual(G.sup(), 1e-8)

    def test_routes_agree(self):
        """The reduced and the kernel-direct routes give the same bracket."""
        lambdas = [0.25, 0.5, 0.75]
        reduced = heisenberg.G_function(self.phi, lambdas=lambdas)
        direct = heisenberg.G_function(self.phi, lambdas=lambdas, route="kernel-direct")
        np.testing.assert_allclose(direct.values, reduced.values, atol=1e-3)

    def test_fourier_coefficients(self):
        """The Fourier coefficients of G are the inner products with central translates."""
        for m in (0, 1, 2):
            with self.subTest(m=m):
                check = heisenberg.G_fourier_coeff(self.phi, (0, 0), m, self.G00)
                self.assertLessEqual(check.discrepancy, 1e-3 * (1.0 + abs(check.via_inner)))
        coeff = heisenberg.G_fourier_coeff(self.phi, (0, 0), 1, self.G00)
        self.assertAlmostEqual(coeff.via_bracket.real, 1.520346, delta=1e-3)

    def test_off_diagonal_coefficient(self):
        """Example 5 pairs with its horizontal neighbour."""
        phi = heisenberg.example_factory(5)
        G = heisenberg.G_function(phi, (1, 0))
        check = heisenberg.G_fourier_coeff(phi, (1, 0), 0, G)
        self.assertAlmostEqual(check.via_inner.real, 0.589490, delta=1e-4)
        self.assertLessEqual(check.discrepancy, 1e-3 * (1.0 + abs(check.via_inner)))

    def test_invalid(self):
        """Bad lambdas, routes and mismatched samples are rejected."""
        self.assertRaises(InputError, heisenberg.G_function, self.phi, (0, 0), [0.0])
        self.assertRaises(InputError, heisenberg.G_function, self.phi, (0, 0), [1.5])
        self.assertRaises(InputError, heisenberg.G_function, self.phi, (0, 0), None, None, "fast")
        self.assertRaises(InputError, heisenberg.G_fourier_coeff, self.phi, (1, 0), 0, self.G00)

    def test_prerequisite_refused(self):
        """The reduced route refuses when the fiberwise identity is not granted."""
        with self.assertRaises(RefusalError) as cm:
            heisenberg.G_function(self.phi, lambdas=[0.5], prerequisite=False)
        self.assertIn("table", cm.exception.diagnostic)

    def test_lambda_grid(self):
        """lambda samples are midpoints in (0, 1]."""
        np.testing.assert_allclose(heisenberg.lambda_grid(4), [0.125, 0.375, 0.625, 0.875])


class TestConditionC(unittest.TestCase):
    def test_classification(self):
        """Examples 1 to 4 satisfy condition C; 5 and 6 do not."""
        for example_id in range(1, 7):
            with self.subTest(example_id=example_id):
                report = heisenberg.condition_c_residual_H(heisenberg.example_factory(example_id))
                self.assertEqual(report.satisfied, example_id <= 4)
                self.assertEqual(len(report.entries), 24 * 5)

    def test_sinc_residual(self):
        """The largest residual of Example 5 is Si(pi)/pi."""
        report = heisenberg.condition_c_residual_H(heisenberg.example_factory(5), 1, 1, 1)
        self.assertAlmostEqual(report.max_residual, 0.589490, delta=1e-3)
        self.assertAlmostEqual(abs(report.entries[(1, 0, 0)]), 0.589490, delta=1e-3)
        self.assertEqual(report.to_dict()["verdict"], "condition C violated")


class TestDualAndGram(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.phi = heisenberg.example_factory(1)
        cls.G00 = heisenberg.G_function(cls.phi)
        cls.condition_c = heisenberg.condition_c_residual_H(cls.phi)
        cls.dual = heisenberg.canonical_dual_H(cls.phi, G00=cls.G00, condition_c=cls.condition_c)

    def test_canonical_dual(self):
        """The dual built from 1/G_00 is biorthogonal to phi over |k|, |l|, |m| <= 2."""
        self.assertLessEqual(frames.biorthogonality_check_H(self.dual, self.phi, 2), 1e-3)

    def test_dual_bracket(self):
        """G_00 of the dual, computed from the dual itself, is 1/G_00."""
        G_dual = heisenberg.G_function(self.dual, lambdas=self.G00.lambdas)
        np.testing.assert_allclose(G_dual.values.real * self.G00.values.real, 1.0, atol=1e-2)

    def test_dual_refused(self):
        """No dual is built when condition C fails."""
        self.assertRaises(RefusalError, heisenberg.canonical_dual_H, heisenberg.example_factory(5))

    def test_gram_entries(self):
        """Gram entries are inner products of left translates."""
        section = heisenberg.gram_H(self.phi, 1)
        i = section.indices.index((0, 0, 0))
        j = section.indices.index((0, 0, 1))
        self.assertAlmostEqual(section.matrix[i, i].real, GAUSSIAN_NORM2, places=6)
        self.assertAlmostEqual(section.matrix[i, j].real, 1.520346, delta=1e-4)
        self.assertAlmostEqual(abs(section.matrix[i, section.indices.index((1, 0, 0))]), 0.0, places=12)
        np.testing.assert_allclose(section.matrix, section.matrix.conj().T)

    def test_gram_limits(self):
        """Gram windows are capped and nonnegative."""
        self.assertRaises(CapExceededError, heisenberg.gram_H, self.phi, 2, 100)
        self.assertRaises(InputError, heisenberg.gram_H, self.phi, -1)

    def test_bessel(self):
        """lambda_max stays below sup G_00 = 2 pi up to radius 4."""
        report = frames.bessel_bound_estimate_H(self.phi, [0, 1, 2, 3, 4], self.G00, self.condition_c)
        self.assertEqual([s.size for s in report.sections], [1, 27, 125, 343, 729])
        self.assertAlmostEqual(self.G00.sup(), 2.0 * math.pi, delta=1e-2)
        self.assertAlmostEqual(report.lam_max[0], GAUSSIAN_NORM2, places=6)
        self.assertLessEqual(max(report.lam_max), self.G00.sup() + 1e-2)
        self.assertEqual(report.verdicts.status("bessel bound"), "holds")

    def test_independence(self):
        """inf G_00 > 0 is consistent with l2-independence; the zero function is dependent."""
        report = frames.independence_probe_H(self.phi, [0, 1], self.G00)
        self.assertEqual(report.verdicts.status("l2-independence"), "consistent with l2-independence")
        zero = HFunction(self.phi.spec, (HTerm(0.0, self.phi.terms[0].factors),))
        self.assertEqual(frames.independence_probe_H(zero, [0]).verdicts.status("l2-independence"), "dependent")

    def test_witnesses(self):
        """Cauchy and dual Besselian witnesses hold for Example 1."""
        report = frames.hilbertian_probe_H(self.phi, self.G00, cuts=(0, 1), condition_c=self.condition_c)
        self.assertEqual(report.verdicts.status("cauchy witness"), "holds")
        self.assertEqual(report.verdicts.status("dual besselian witness"), "holds")


class TestSynthesis(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.phi = heisenberg.example_factory(1)
        cls.G00 = heisenberg.G_function(cls.phi)
        cls.c = {
            HLatticeIndex(0, 0, 0): 1.0,
            HLatticeIndex(0, 0, 2): 0.3,
            HLatticeIndex(1, 0, 1): 0.5j,
            HLatticeIndex(0, -1, -1): -0.25,
        }

    def test_norm_identity(self):
        """||sum c L phi||^2 = sum_(k,l) integral |rho_(k,l)|^2 G_00 under condition C."""
        lhs, rhs = heisenberg.norm_identity_H(self.phi, self.c, self.G00)
        self.assertAlmostEqual(lhs, rhs, delta=1e-6 * lhs)

    def test_membership(self):
        """Each fiber of the synthesis is spanned by the fibers of the translates."""
        f = heisenberg.synthesize_H(self.c, self.phi)
        self.assertLessEqual(heisenberg.membership_H(f, self.c, self.phi, [0.25, 0.5]), 1e-10)

    def test_central_symbol(self):
        """rho_(k,l) collects the central coefficients."""
        symbols = heisenberg.central_symbol(self.c, np.array([0.25]))
        self.assertEqual(sorted(symbols), [(0, -1), (0, 0), (1, 0)])
        self.assertAlmostEqual(complex(symbols[(0, 0)][0]), 1.0 - 0.3, places=12)

    def test_empty(self):
        """An empty coefficient field is rejected."""
        self.assertRaises(InputError, heisenberg.synthesize_H, {}, self.phi)


if __name__ == "__main__":
    unittest.main()
