"""Symbols, the induced measure, Bloch norms and the logarithmic integral bound"""
import math
from unittest import TestCase

from carleson_lab.analysis import hankel, quadrature
from carleson_lab.analysis.enums import VerdictStatus
from carleson_lab.analysis.exceptions import InverseDoublingFails
from carleson_lab.analysis.hankel import ConstantSymbol, IdentitySymbol, KernelSymbol, LaplaceSymbol, LogSymbol
from carleson_lab.analysis.measure import CarlesonSquare, RadialMeasure
from carleson_lab.analysis.transforms import Exponential, Sampled


def kernel_square_oracle() -> float:
    """Mass of Q_[-1, 1] under x / |1 + z|^4 dA, with the inner integral in closed form"""
    def inner(x):
        a = 1 + x
        return x * (1 / (a ** 2 * (a ** 2 + 1)) + math.atan(1 / a) / a ** 3)
    return quadrature.integrate(inner, 0.0, 2.0)


class TestSymbols(TestCase):
    def test_parse(self):
        self.assertEqual(hankel.parse_symbol('log1p'), LogSymbol(1.0, 1.0), 'log(1 + z)')
        self.assertEqual(hankel.parse_symbol('2*kernel:1:2'), KernelSymbol(1, 2, 2.0), '2 / (z + 1)^2')
        self.assertEqual(hankel.parse_symbol('const:3'), ConstantSymbol(3), 'Constant')
        self.assertEqual(hankel.parse_symbol('z'), IdentitySymbol(), 'Identity')
        both = hankel.parse_symbol('log1p + kernel:2:1')
        self.assertAlmostEqual(both.derivative(1.0), 0.5 - 1 / 9, places=15, msg='Sums differentiate term by term')
        with self.assertRaises(ValueError, msg='Unknown kind'):
            hankel.parse_symbol('sin')

    def test_derivatives(self):
        self.assertAlmostEqual(LogSymbol().derivative(1 + 0j), 0.5, places=15, msg='1 / (1 + z)')
        self.assertAlmostEqual(KernelSymbol(1, 2, 3.0).derivative(1 + 0j), -6 / 8, places=15, msg='-2 c / (z + 1)^3')
        self.assertEqual(ConstantSymbol(5).derivative(2.0), 0, 'Constants have zero derivative')

    def test_laplace_symbol(self):
        symbol = LaplaceSymbol(Exponential(2.0))
        self.assertAlmostEqual(symbol(1.0), 1 / 3, places=15, msg='L e^(-2t) = 1 / (z + 2)')
        self.assertAlmostEqual(symbol.derivative(1.0), -1 / 9, places=15, msg='Derivative of 1 / (z + 2)')
        self.assertEqual(symbol.describe(), 'laplace:exp:2.0', 'Keeps the source function')
        with self.assertRaises(ValueError, msg='Sampled functions have no exact derivative'):
            LaplaceSymbol(Sampled((0.0, 1.0), (1.0, 0.0)))


class TestHankelMeasure(TestCase):
    def test_constant_symbol(self):
        self.assertTrue(hankel.hankel_measure(ConstantSymbol(2.0), RadialMeasure.lebesgue()).is_zero(),
                        "b' = 0 gives the zero measure")
        verdict = hankel.check_hankel_bounded(ConstantSymbol(2.0), RadialMeasure.lebesgue())
        self.assertEqual(verdict.constant, 0.0, 'Zero constant')
        self.assertEqual(verdict.status, VerdictStatus.passed, 'Zero measure passes')

    def test_kernel_symbol_square_mass(self):
        mu = hankel.hankel_measure(KernelSymbol(1.0), RadialMeasure.dirac())
        self.assertAlmostEqual(mu.square_mass(CarlesonSquare(0.0, 2.0)), kernel_square_oracle(), places=6,
                               msg='Density Re z / |1 + z|^4 over Q_[-1, 1]')

    def test_homogeneous(self):
        nu = RadialMeasure.lebesgue()
        square = CarlesonSquare(0.5, 1.5)
        one = hankel.hankel_measure(LogSymbol(), nu).square_mass(square)
        two = hankel.hankel_measure(LogSymbol().scaled(2.0), nu).square_mass(square)
        self.assertAlmostEqual(two, 4 * one, places=12, msg='b -> 2b quadruples masses')

    def test_log_symbol_is_bounded(self):
        verdict = hankel.check_hankel_bounded(LogSymbol(), RadialMeasure.lebesgue())
        self.assertEqual(verdict.status, VerdictStatus.passed, 'log(1 + z) induces a nu-Carleson measure')
        self.assertTrue(0 < verdict.constant <= 1.0, 'The density is below x F(x) / x^2 = 1')

    def test_hardy_case_is_characterized(self):
        verdict = hankel.check_hankel_bounded(LogSymbol(), RadialMeasure.dirac())
        self.assertTrue(any('necessary' in note for note in verdict.notes), 'Hardy case is flagged')

    def test_density_table(self):
        table = hankel.density_table(KernelSymbol(1.0), RadialMeasure.dirac(), [1.0, 2.0], [0.0])
        self.assertEqual(table.shape, (2, 1), 'One row per x')
        self.assertAlmostEqual(table[0, 0], 1 / 16, places=15, msg='1 / |2|^4')


class TestBloch(TestCase):
    def test_log_symbol(self):
        self.assertAlmostEqual(hankel.bloch_norm(LogSymbol()), 1.0, places=5, msg='Re z / |1 + z| tends to 1')

    def test_constant(self):
        self.assertEqual(hankel.bloch_norm(ConstantSymbol(1.0)), 0.0, 'Constants are in the Bloch space')

    def test_identity_exceeds_cap(self):
        report = hankel.check_bloch_sufficiency(IdentitySymbol(), RadialMeasure.lebesgue())
        self.assertEqual(report.bloch.status, VerdictStatus.failed, '|b\'| Re z = Re z is unbounded')

    def test_sufficiency(self):
        report = hankel.check_bloch_sufficiency(LogSymbol(), RadialMeasure.lebesgue())
        self.assertTrue(report.consistent, 'Carleson constant is below ||b||^2 times the integral constant')
        self.assertTrue(report.carleson.passed, 'Hankel operator is bounded')


class TestLogIntegral(TestCase):
    def test_lebesgue(self):
        bound = hankel.log_integral_bound(RadialMeasure.lebesgue())
        self.assertAlmostEqual(bound.ratio, 1.0, places=8, msg='integral of 1 over (0, x) is x = F(x)')
        self.assertAlmostEqual(bound.predicted, 2.0, places=12, msg='M = 2, gamma = 2')
        self.assertTrue(bound.holds, 'Empirical ratio below the bound')

    def test_linear_density(self):
        bound = hankel.log_integral_bound(RadialMeasure.power(1.0))
        self.assertAlmostEqual(bound.ratio, 0.5, places=8, msg='(x^2 / 4) / (x^2 / 2)')
        self.assertTrue(bound.holds, 'Empirical ratio below 4/3')

    def test_hardy_fails(self):
        with self.assertRaises(InverseDoublingFails, msg='F is constant'):
            hankel.log_integral_bound(RadialMeasure.dirac())
