"""Kernels, Laplace transforms, weights and norms"""
import math
from unittest import TestCase

import numpy as np

from carleson_lab.analysis import quadrature, transforms
from carleson_lab.analysis.exceptions import DivergentNorm, DivergentWeight, GridTooCoarse
from carleson_lab.analysis.transforms import (
    Exponential,
    LacunaryCombination,
    LinearCombination,
    MonomialExponential,
    NormalizedKernel,
    Sampled,
    TestFunction,
)

from .factories import RadialMeasureFactory


def gaussian(center: float, width: float = 1.0, lo: float = 0.0, hi: float = 20.0, step: float = 0.01) -> Sampled:
    grid = np.arange(lo, hi + step / 2, step)
    return Sampled(grid, np.exp(-((grid - center) / width) ** 2))


class TestKernels(TestCase):
    def test_kernel_value(self):
        self.assertAlmostEqual(transforms.kernel(1, 1), 1 / (4 * math.pi), places=15, msg='k_1(1) = 1/(4 pi)')
        self.assertAlmostEqual(abs(transforms.kernel(1, 1j)), 1 / (2 * math.pi * math.sqrt(2)), places=15,
                               msg='|k_1(i)| = 1/(2 pi sqrt 2)')
        self.assertAlmostEqual(transforms.kernel_norm_sq(1), 1 / (4 * math.pi), places=15, msg='||k_1||^2')

    def test_poisson_kernel(self):
        self.assertAlmostEqual(transforms.poisson_kernel(1 + 0j, 0.0), 1 / math.pi, places=15, msg='p_1(0) = 1/pi')
        z = 2 + 3j
        total = quadrature.integrate(lambda t: float(transforms.poisson_kernel(z, t)), -math.inf, math.inf)
        self.assertAlmostEqual(total, 1.0, places=8, msg='Poisson kernel has unit mass')
        for s in (0.5, 1.0, 7.0):
            self.assertAlmostEqual(transforms.poisson_kernel(z, 3 + s), transforms.poisson_kernel(z, 3 - s),
                                   places=15, msg='Symmetric about Im z')

    def test_poisson_from_reproducing_kernel(self):
        lam = 1 + 1j
        via_kernel = abs(transforms.kernel(lam, 2j)) ** 2 / transforms.kernel_norm_sq(lam)
        self.assertAlmostEqual(float(transforms.poisson_kernel(lam, 2.0)), via_kernel, places=12,
                               msg='p_lambda(t) = |k_lambda(it)|^2 / ||k_lambda||^2')

    def test_exponent_pair(self):
        self.assertEqual(transforms.conjugate_exponent(1), math.inf, "p' = inf for p = 1")
        self.assertEqual(transforms.ExponentPair(2, 3).p_prime, 2.0, "p' = 2 for p = 2")
        with self.assertRaises(ValueError, msg='Exponents below 1 are refused'):
            transforms.ExponentPair(0.5, 2)


class TestLaplace(TestCase):
    def test_examples(self):
        self.assertAlmostEqual(transforms.laplace(Exponential(1), 1), 0.5, places=15, msg='1/(1+1)')
        self.assertAlmostEqual(transforms.laplace(MonomialExponential(2, 1), 0), 1.0, places=15, msg='1!/1^2')
        self.assertAlmostEqual(transforms.laplace(NormalizedKernel(4, 2), 4), 0.25, places=15, msg='2/8')

    def test_monomial_matches_quadrature(self):
        f = MonomialExponential(3, 1.5)
        z = 0.7
        numeric = quadrature.integrate_halfline(lambda t: float(np.real(f(t))) * math.exp(-z * t), pivot=2.0)
        self.assertAlmostEqual(abs(f.laplace(z) - numeric), 0.0, places=8, msg='Closed form agrees with quadrature')

    def test_sampled_is_exact_on_the_interpolant(self):
        f = Sampled((0.0, 1.0, 3.0), (0.0, 2.0, 2.0))
        self.assertAlmostEqual(f.laplace(0).real, 5.0, places=14, msg='L f(0) is the area under the interpolant')
        self.assertAlmostEqual(f.lp_norm(2) ** 2, 28 / 3, places=12, msg='Exact L^2 norm of the interpolant')

    def test_sampled_approximates_exponential(self):
        grid = np.arange(0.0, 40.0, 0.01)
        f = Sampled(grid, np.exp(-grid))
        self.assertAlmostEqual(abs(f.laplace(1.0 + 2j) - Exponential(1).laplace(1.0 + 2j)), 0.0, places=4,
                               msg='Fine samples reproduce the exponential transform')
        values = f.laplace(np.array([1.0, 2.0]))
        self.assertEqual(values.shape, (2,), 'Array arguments are vectorized')

    def test_sum_of_functions(self):
        f = transforms.parse_test_function('sum:2.0*exp:1.0;-1.0*exp:3.0')
        self.assertAlmostEqual(f.laplace(1).real, 0.75, places=15, msg='2/2 - 1/4')
        self.assertIsInstance(Exponential(1) + Exponential(2), LinearCombination, 'Adding functions builds a sum')


class TestParse(TestCase):
    def test_kinds(self):
        self.assertEqual(transforms.parse_test_function('exp:1'), Exponential(1), 'Exponential')
        self.assertEqual(transforms.parse_test_function('monexp:2:1+2j'), MonomialExponential(2, 1 + 2j),
                         'Complex lambda')
        self.assertEqual(transforms.parse_test_function('nkernel:8:2'), NormalizedKernel(8, 2), 'Normalized kernel')
        lacunary = transforms.parse_test_function('lacunary:2:0=1.0,3=-0.5')
        self.assertEqual(lacunary.coefficients, {0: 1.0, 3: -0.5}, 'Lacunary coefficients')

    def test_describe_parses_back(self):
        for f in (Exponential(2.5), MonomialExponential(3, 1 - 1j), NormalizedKernel(4.0, 1.5),
                  LacunaryCombination({1: 0.25, 2: 2.0}, 3.0)):
            self.assertEqual(transforms.parse_test_function(f.describe()), f, f'Text form of {f.describe()}')

    def test_errors(self):
        with self.assertRaises(ValueError, msg='Unknown kind'):
            transforms.parse_test_function('cosine:1')
        with self.assertRaises(ValueError, msg='Exponentials need Re lambda > 0'):
            transforms.parse_test_function('exp:-1')


class TestLpNorm(TestCase):
    def test_examples(self):
        self.assertAlmostEqual(transforms.lp_norm(Exponential(1), 2) ** 2, 0.5, places=15, msg='1/(p Re lambda)')
        self.assertAlmostEqual(transforms.lp_norm(NormalizedKernel(8, 2), 2), math.sqrt(0.5), places=15,
                               msg='lambda / (2 lambda)')
        self.assertAlmostEqual(transforms.lp_norm(MonomialExponential(2, 1), 2) ** 2, 0.25, places=15,
                               msg='Gamma(3) / 2^3')

    def test_normalized_kernel_is_scale_free(self):
        for p in (1.5, 2.0, 3.0):
            for lam in (0.5, 8.0, 100.0):
                self.assertAlmostEqual(NormalizedKernel(lam, p).lp_norm(p), p ** (-1 / p), places=12,
                                       msg=f'||k~|| = p^(-1/p) for lambda={lam}, p={p}')

    def test_closed_forms_match_quadrature(self):
        for f in (MonomialExponential(2, 1), Exponential(0.5 + 3j)):
            for p in (1.5, 2.0, 4.0):
                self.assertAlmostEqual(TestFunction.lp_norm(f, p), f.lp_norm(p), places=7,
                                       msg=f'{f.describe()} at p={p}')

    def test_lacunary_gram(self):
        f = LacunaryCombination({0: 1.0, 2: -0.5, 3: 0.25}, 2.0)
        self.assertAlmostEqual(f.lp_norm(2), TestFunction.lp_norm(f, 2), places=7,
                               msg='Gram form agrees with quadrature')

    def test_rejects_small_p(self):
        with self.assertRaises(ValueError, msg='p < 1 is not a norm'):
            transforms.lp_norm(Exponential(1), 0.5)


class TestWeights(TestCase):
    def test_examples(self):
        self.assertAlmostEqual(transforms.weight_from_measure(RadialMeasureFactory(hardy=True))(3.0), 2 * math.pi,
                               places=14, msg='delta_0 gives w = 2 pi')
        self.assertAlmostEqual(transforms.weight_from_measure(RadialMeasureFactory())(1.0), math.pi, places=12,
                               msg='Lebesgue gives pi / t')
        self.assertAlmostEqual(transforms.weight_from_measure(RadialMeasureFactory(linear=True))(1.0), math.pi / 2,
                               places=12, msg='r dr gives 2 pi / (2t)^2')

    def test_closed_form_tags(self):
        self.assertIsNotNone(transforms.weight_from_measure(RadialMeasureFactory()).closed_form(), 'Lebesgue tag')
        self.assertIsNone(transforms.weight_from_measure(RadialMeasureFactory(discrete=True)).closed_form(),
                          'Atomic measures have no closed form')

    def test_power_weight(self):
        w = transforms.weight_from_measure(transforms.measure_for_power_weight(-0.5))
        self.assertAlmostEqual(w(4.0), 0.5, places=12, msg='w(t) = t^(-1/2)')

    def test_quadrature_path(self):
        nu = RadialMeasureFactory(discrete=True)
        expected = 2 * math.pi * sum(m * math.exp(-2 * r) for r, m in nu.atoms)
        self.assertAlmostEqual(transforms.weight_from_measure(nu)(1.0), expected, places=12, msg='Sum over atoms')

    def test_divergent(self):
        with self.assertRaises(DivergentWeight, msg='Infinite mass and no damping at t = 0'):
            transforms.weight_from_measure(RadialMeasureFactory())(0.0)

    def test_curve(self):
        curve = transforms.weight_curve(RadialMeasureFactory(), [1.0, 2.0])
        self.assertAlmostEqual(curve[1][1], math.pi / 2, places=12, msg='pi / 2 at t = 2')


class TestZenNorm(TestCase):
    def test_hardy_examples(self):
        hardy = RadialMeasureFactory(hardy=True)
        self.assertAlmostEqual(transforms.zen_norm(Exponential(1), hardy) ** 2, math.pi, places=12,
                               msg='2 pi ||e^-t||^2 = pi')
        kernel_norm = transforms.zen_norm(lambda z: transforms.kernel(1, z), hardy) ** 2
        self.assertAlmostEqual(kernel_norm, 1 / (4 * math.pi), places=8, msg='||k_1||^2 by quadrature')

    def test_lebesgue_diverges(self):
        with self.assertRaises(DivergentNorm, msg='Integral of pi / (1 + r) diverges'):
            transforms.zen_norm(Exponential(1), RadialMeasureFactory())

    def test_line_integral_closed_form(self):
        f = LinearCombination(((1.0, Exponential(1)), (-0.5, Exponential(2 + 1j))))
        numeric = quadrature.integrate_line(lambda y: abs(f.laplace(complex(0.5, y))) ** 2, scale=2.0)
        self.assertAlmostEqual(transforms.hardy_line_norm(f, 0.5), numeric, places=7,
                               msg='Sum of poles agrees with quadrature')


class TestSobolev(TestCase):
    def test_order_zero_doubles_the_l2_norm(self):
        f = gaussian(10.0)
        self.assertAlmostEqual(transforms.sobolev_norm(f, 0.0) / (math.sqrt(2) * f.lp_norm(2)), 1.0, places=4,
                               msg='Multiplier |xi|^0 is 1')

    def test_gaussian_first_derivative(self):
        # ||f||^2 = ||f'||^2 = sqrt(pi / 2) for exp(-s^2)
        expected = math.sqrt(2 * math.sqrt(math.pi / 2))
        self.assertAlmostEqual(transforms.sobolev_norm(gaussian(10.0), 1.0), expected, places=4,
                               msg='Analytic Gaussian norms')

    def test_dilation(self):
        beta = 1.5
        ratio = transforms.fractional_derivative_energy(gaussian(5.0, 0.5), beta) \
            / transforms.fractional_derivative_energy(gaussian(10.0), beta)
        self.assertAlmostEqual(ratio / 2 ** (2 * beta - 1), 1.0, places=6, msg='f(2t) scales by 2^(2 beta - 1)')

    def test_grid_checks(self):
        with self.assertRaises(GridTooCoarse, msg='Non-uniform grids are refused'):
            transforms.sobolev_norm(Sampled((0.0, 1.0, 3.0), (0.0, 1.0, 0.0)), 1.0)
        with self.assertRaises(GridTooCoarse, msg='Samples must decay at the edges'):
            transforms.sobolev_norm(gaussian(1.0), 1.0)


class TestPaleyWiener(TestCase):
    def test_hardy(self):
        report = transforms.paley_wiener_check(RadialMeasureFactory(hardy=True), Exponential(1))
        self.assertAlmostEqual(report.lhs, math.pi, places=12, msg='lhs = pi')
        self.assertLessEqual(report.gap, 1e-8, 'Both sides agree')

    def test_lebesgue(self):
        report = transforms.paley_wiener_check(RadialMeasureFactory(), MonomialExponential(2, 1))
        self.assertAlmostEqual(report.rhs, math.pi / 4, places=8, msg='integral of t^2 e^-2t pi/t')
        self.assertLessEqual(report.gap, 1e-6, 'lhs by quadrature agrees')

    def test_zero_function(self):
        report = transforms.paley_wiener_check(RadialMeasureFactory(hardy=True), Sampled((0.0, 1.0), (0.0, 0.0)))
        self.assertEqual((report.lhs, report.rhs, report.gap), (0.0, 0.0, 0.0), '0 = 0')

    def test_both_sides_divergent(self):
        report = transforms.paley_wiener_check(RadialMeasureFactory(), Exponential(1))
        self.assertTrue(report.divergent, 'Lebesgue with e^-t diverges on both sides')
        self.assertEqual(report.gap, 0.0, 'Divergent pairs count as agreeing')

    def test_measure_and_function_grid(self):
        measures = {
            'hardy': RadialMeasureFactory(hardy=True),
            'lebesgue': RadialMeasureFactory(),
            'linear': RadialMeasureFactory(linear=True),
        }
        functions = {
            'exp': Exponential(1),
            'monexp': MonomialExponential(2, 1),
            'sum': LinearCombination([(1.0, Exponential(2)), (1.0, Exponential(1))]),
        }
        for m_name, nu in measures.items():
            for f_name, f in functions.items():
                report = transforms.paley_wiener_check(nu, f)
                self.assertLessEqual(report.gap, 1e-6, f'Isometry holds for {f_name} against {m_name}')
                if m_name == 'hardy':
                    self.assertFalse(report.divergent, f'{f_name} lies in the Hardy space')

        report = transforms.paley_wiener_check(measures['linear'], functions['monexp'])
        self.assertAlmostEqual(report.rhs, math.pi / 4, places=6, msg='integral of t^2 e^-2t pi / (2 t^2)')
