"""Radial cdf, square masses, doubling diagnostics and ratio sups"""
import math
from unittest import TestCase

import numpy as np

from carleson_lab.analysis import measure
from carleson_lab.analysis.exceptions import EmptyFamily, InvalidMeasure, ZeroMassNearOrigin
from carleson_lab.analysis.measure import CarlesonSquare, HalfPlaneMeasure, RadialMeasure

from .factories import HalfPlaneMeasureFactory, RadialMeasureFactory, rng


class TestRadialCdf(TestCase):
    def test_hardy_atom(self):
        self.assertEqual(measure.radial_cdf(RadialMeasureFactory(hardy=True), 1.0), 1.0, 'Atom at 0 is below any r > 0')

    def test_lebesgue(self):
        self.assertAlmostEqual(measure.radial_cdf(RadialMeasureFactory(), 2.0), 2.0, msg='F(r) = r for Lebesgue')

    def test_linear_density(self):
        self.assertAlmostEqual(measure.radial_cdf(RadialMeasureFactory(linear=True), 3.0), 4.5,
                               msg='F(3) = 9/2 for r dr')

    def test_half_open_convention(self):
        nu = RadialMeasure(atoms=((1.0, 2.0),))
        self.assertEqual(nu.cdf(1.0), 0.0, 'Atom at r is not counted in [0, r)')
        self.assertEqual(nu.cdf(1.0 + 1e-12), 2.0, 'Atom at r is counted just beyond r')
        self.assertEqual(nu.cdf(0.0), 0.0, 'F(0) = 0 without an atom at zero')

    def test_rejects_negative_radius(self):
        with self.assertRaises(ValueError, msg='Negative radii are a precondition violation'):
            measure.radial_cdf(RadialMeasureFactory(), -1.0)

    def test_sampled_piece_integrates_interpolant_exactly(self):
        nu = RadialMeasure(pieces=(measure.SampledPiece((0.0, 1.0, 3.0), (0.0, 2.0, 2.0)),))
        self.assertAlmostEqual(nu.cdf(0.5), 0.25, msg='Triangle area under the first segment')
        self.assertAlmostEqual(nu.total_mass(), 5.0, msg='Trapezoid rule is exact for the interpolant')

    def test_invariants_are_enforced(self):
        with self.assertRaises(InvalidMeasure, msg='Power piece at 0 needs alpha > -1'):
            RadialMeasure.power(-1.0)
        with self.assertRaises(InvalidMeasure, msg='Atoms must be ordered'):
            RadialMeasure(atoms=((2.0, 1.0), (1.0, 1.0)))
        with self.assertRaises(InvalidMeasure, msg='Pieces must be disjoint'):
            RadialMeasure(pieces=(measure.PowerPiece(0, 2, 1, 0), measure.PowerPiece(1, 3, 1, 0)))

    def test_integrate_matches_closed_form(self):
        nu = RadialMeasureFactory(linear=True)
        value = nu.integrate(lambda r: math.exp(-r))
        self.assertAlmostEqual(value, 1.0, places=8, msg='Integral of r e^-r over [0, inf) is 1')


class TestDoubling(TestCase):
    def test_hardy(self):
        self.assertEqual(measure.doubling_constant(RadialMeasureFactory(hardy=True)).R, 1.0, 'F is constant')

    def test_lebesgue(self):
        self.assertAlmostEqual(measure.doubling_constant(RadialMeasureFactory()).R, 2.0, places=12,
                               msg='F(2t)/F(t) = 2')

    def test_power_laws_are_grid_independent(self):
        for alpha in (0.0, 1.0, 2.5, -0.5):
            expected = 2 ** (alpha + 1)
            info = measure.doubling_constant(RadialMeasure.power(alpha))
            self.assertLessEqual(abs(info.R - expected), 1e-12 * expected, f'R = 2^(alpha+1) for alpha={alpha}')
            self.assertGreaterEqual(info.R, 1.0, 'R is never below 1')

    def test_zero_mass_near_origin(self):
        nu = RadialMeasure(pieces=(measure.PowerPiece(1.0, 2.0, 1.0, 0.0),))
        with self.assertRaises(ZeroMassNearOrigin, msg='Ratio is undefined where F vanishes'):
            measure.doubling_constant(nu)

    def test_cap_is_flagged(self):
        nu = RadialMeasure.power(25.0)
        self.assertTrue(measure.doubling_constant(nu).exceeds_cap, '2^26 is beyond the default cap')

    def test_inverse_doubling(self):
        self.assertAlmostEqual(measure.inverse_doubling_infimum(RadialMeasure.power(1.5), 2.0), 2 ** 2.5,
                               places=10, msg='Closed form for power laws')
        self.assertEqual(measure.inverse_doubling_infimum(RadialMeasureFactory(hardy=True), 7.0), 1.0,
                         'Hardy measure never satisfies inverse doubling')
        self.assertAlmostEqual(measure.inverse_doubling_infimum(RadialMeasureFactory(), 4.0), 4.0, places=12,
                               msg='F is linear for Lebesgue')


class TestSquareMass(TestCase):
    def test_unit_atom(self):
        mu = HalfPlaneMeasureFactory(unit_atom=True)
        self.assertEqual(measure.square_mass(mu, CarlesonSquare(0.0, 2.0)), 1.0, 'Atom at 1 lies in the 2-square')
        self.assertEqual(measure.square_mass(mu, CarlesonSquare(0.0, 0.5)), 0.0, 'Atom at 1 is right of the square')

    def test_axis_ray(self):
        mu = HalfPlaneMeasureFactory(axis_ray=True)
        self.assertAlmostEqual(measure.square_mass(mu, CarlesonSquare(0.0, 4.0)), 2.0, places=12,
                               msg='Integral of x^-1/2 over [1, 4)')

    def test_boundary_flag(self):
        mu = HalfPlaneMeasure(atoms=((0.5j, 1.0),))
        square = CarlesonSquare(0.0, 2.0)
        self.assertEqual(mu.square_mass(square), 1.0, 'Boundary atoms count by default')
        hidden = HalfPlaneMeasure(atoms=mu.atoms, include_boundary=False)
        self.assertEqual(hidden.square_mass(square), 0.0, 'Boundary atoms are dropped when the flag is off')

    def test_half_open_sides(self):
        mu = HalfPlaneMeasure.from_atoms([(1 + 1j, 1.0)])
        self.assertEqual(mu.square_mass(CarlesonSquare(0.0, 2.0)), 0.0, 'Upper edge of [-1, 1) is left out')
        self.assertEqual(mu.square_mass(CarlesonSquare(2.0, 2.0)), 1.0, 'Lower edge of [1, 3) is kept')
        self.assertEqual(mu.square_mass(CarlesonSquare(1.0, 1.0)), 0.0, 'Atom at x = 1 is right of the open side')

    def test_atoms_merge(self):
        mu = HalfPlaneMeasure.from_atoms([(1 + 1j, 0.5), (2 + 0j, 1.0), (1 + 1j, 0.25)])
        self.assertEqual(len(mu.atoms), 2, 'Repeated locations merge')
        self.assertEqual(dict(mu.atoms)[1 + 1j], 0.75, 'Merged masses add')

    def test_monotone_under_inclusion(self):
        mu = HalfPlaneMeasureFactory(atoms=[(complex(rng.uniform(0, 3), rng.uniform(-3, 3)), 1.0) for _ in range(30)])
        for _ in range(25):
            center = rng.uniform(-2, 2)
            small = rng.uniform(0.1, 3)
            large = small * rng.uniform(1, 3)
            self.assertLessEqual(
                mu.square_mass(CarlesonSquare(center, small)),
                mu.square_mass(CarlesonSquare(center, large)),
                'Growing a square never loses mass'
            )

    def test_grid_masses_add_up(self):
        mu = HalfPlaneMeasureFactory()
        table = mu.grid_masses(np.linspace(0, 4, 5), np.linspace(-4, 4, 9))
        self.assertAlmostEqual(table.sum(), mu.total_mass(), places=12, msg='Cells partition the support box')


class TestProductSquareMass(TestCase):
    def test_examples(self):
        self.assertEqual(measure.product_square_mass(RadialMeasureFactory(hardy=True), CarlesonSquare(0, 3.0)), 3.0,
                         'Hardy case: nu(Q) = |I|')
        self.assertAlmostEqual(measure.product_square_mass(RadialMeasureFactory(), CarlesonSquare(0, 2.0)), 4.0,
                               msg='Lebesgue: 2 * 2')
        self.assertAlmostEqual(measure.product_square_mass(RadialMeasureFactory(linear=True), CarlesonSquare(0, 2.0)),
                               4.0, msg='r dr: 2 * 2^2 / 2')

    def test_matches_materialized_measure(self):
        squares = [CarlesonSquare(c, h) for c in (-1.5, 0.0, 0.25, 3.0) for h in (0.1, 0.5, 1.0, 2.0, 7.5)]
        for nu in (RadialMeasureFactory(hardy=True), RadialMeasureFactory(), RadialMeasureFactory(linear=True)):
            mu = measure.zen_measure(nu)
            for square in squares:
                exact = measure.product_square_mass(nu, square)
                self.assertLessEqual(abs(mu.square_mass(square) - exact), 1e-9 * exact,
                                     'Closed form agrees with the materialized product measure')


class TestRatioSup(TestCase):
    def test_unit_atom_approaches_one(self):
        mu = HalfPlaneMeasureFactory(unit_atom=True)
        coarse = measure.carleson_ratio_sup(mu, measure.power_gauge(1.0))
        fine = measure.carleson_ratio_sup(mu, measure.power_gauge(1.0),
                                          measure.square_family(mu, ratio=2 ** (1 / 16), side_min=0.5, side_max=4))
        self.assertLessEqual(coarse.constant, 1.0 + 1e-12, 'Sup of 1/|I| over |I| > 1 never exceeds 1')
        self.assertGreaterEqual(coarse.constant, 2 ** -0.25 - 1e-12, 'Default grid is within one side step')
        self.assertGreaterEqual(fine.constant, 2 ** (-1 / 16) - 1e-12, 'Refining the grid approaches 1')
        self.assertIsNotNone(fine.witness, 'Positive constants come with a witness square')

    def test_self_ratio(self):
        nu = RadialMeasureFactory()
        result = measure.carleson_ratio_sup(measure.zen_measure(nu), measure.measure_gauge(nu))
        self.assertAlmostEqual(result.constant, 1.0, places=9, msg='nu(Q) / nu(Q) = 1')

    def test_axis_ray_half_power(self):
        mu = HalfPlaneMeasureFactory(axis_ray=True)
        constant, witness = measure.carleson_ratio_sup(mu, measure.parse_gauge('pow:0.5'))
        self.assertLessEqual(constant, 2.0, 'mu(Q) <= 2 h^1/2')
        self.assertGreater(constant, 1.9, 'Large squares push the ratio towards 2')
        self.assertGreater(witness.side, 256, 'Largest squares attain the sup')

    def test_zero_measure(self):
        result = measure.carleson_ratio_sup(HalfPlaneMeasure.zero(), measure.power_gauge(1.0))
        self.assertEqual(result.constant, 0.0, 'Zero measure has constant 0')
        self.assertIsNone(result.witness, 'No witness for a zero constant')

    def test_empty_family(self):
        with self.assertRaises(EmptyFamily, msg='Sup over no squares is refused'):
            measure.carleson_ratio_sup(HalfPlaneMeasureFactory(), measure.power_gauge(1.0), measure.SquareFamily(()))

    def test_vertical_translation(self):
        mu = HalfPlaneMeasureFactory()
        family = measure.square_family(mu)
        shift = 0.37
        before = measure.carleson_ratio_sup(mu, measure.power_gauge(1.0), family)
        after = measure.carleson_ratio_sup(mu.translated(shift), measure.power_gauge(1.0), family.translated(shift))
        self.assertAlmostEqual(before.constant, after.constant, places=12,
                               msg='Translating measure and squares together keeps the sup')

    def test_scaling_and_dilation(self):
        mu = HalfPlaneMeasure.from_atoms([(2 + 2j, 1.0)])
        self.assertEqual(mu.scaled(3.0).total_mass(), 3.0, 'Scaling multiplies every mass')
        self.assertEqual(mu.dilated(2.0).atoms, ((1 + 1j, 1.0),), 'E -> mu(2E) moves atoms towards 0')
        self.assertEqual(mu.conjugated().atoms, ((2 - 2j, 1.0),), 'Conjugation mirrors atoms')

    def test_parse_gauge(self):
        self.assertEqual(measure.parse_gauge('unit')(5.0), 1.0, 'Unit gauge is constant')
        self.assertEqual(measure.parse_gauge('pow:2')(3.0), 9.0, 'Power gauge')
        with self.assertRaises(ValueError, msg='nu gauge needs a measure'):
            measure.parse_gauge('nu')
