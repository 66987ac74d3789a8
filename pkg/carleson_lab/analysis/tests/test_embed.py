"""Embedding criteria, lower bounds, lacunary kernels and the q < p counterexample"""
import cmath
import math
from unittest import TestCase

from carleson_lab.analysis import embed, measure
from carleson_lab.analysis.balayage import StripSpec
from carleson_lab.analysis.embed import EmbeddingVerdict, PhiApproximant, VerdictList
from carleson_lab.analysis.enums import Criterion, ScalingKind, SobolevMode, VerdictStatus
from carleson_lab.analysis.exceptions import (
    EmptyFamily,
    ExponentWindow,
    NotDoubling,
    NotInStrip,
    NotSectorial,
    UnsupportedMeasure,
)
from carleson_lab.analysis.measure import HalfPlaneMeasure, RadialMeasure, zen_measure
from carleson_lab.analysis.transforms import ExponentPair

from .factories import HalfPlaneMeasureFactory, rng

UNIT = HalfPlaneMeasure.from_atoms([(1 + 0j, 1.0)])


def grid_atoms(count: int) -> HalfPlaneMeasure:
    """Atoms at even heights, which every test-point grid hits exactly"""
    return HalfPlaneMeasure.from_atoms([
        (complex(rng.uniform(0.25, 4.0), 2 * rng.randint(-2, 2)), rng.uniform(0.1, 2.0)) for _ in range(count)
    ])


class TestVerdicts(TestCase):
    def test_status(self):
        passed = embed.make_verdict(Criterion.classical, '3', 2.0, 'w', ScalingKind.mass, cap=10)
        failed = embed.make_verdict(Criterion.classical, '3', 20.0, 'w', ScalingKind.mass, cap=10)
        divergent = embed.make_verdict(Criterion.classical, '3', math.inf, 'w', ScalingKind.mass, cap=10)
        self.assertEqual(passed.status, VerdictStatus.passed, 'Below the cap')
        self.assertEqual(failed.status, VerdictStatus.failed, 'Above the cap')
        self.assertEqual(divergent.status, VerdictStatus.divergent, 'Infinite constants diverge')
        verdicts = VerdictList([passed, failed, divergent])
        self.assertEqual(verdicts.worst(), divergent, 'Divergence outranks failure')
        self.assertEqual(verdicts.final_status(), VerdictStatus.divergent, 'Final status is the worst one')

    def test_rejects_bad_constants(self):
        with self.assertRaises(ValueError, msg='Negative constant'):
            EmbeddingVerdict(Criterion.classical, '3', -1.0, 'w')
        with self.assertRaises(ValueError, msg='NaN constant'):
            EmbeddingVerdict(Criterion.classical, '3', math.nan, 'w')
        with self.assertRaises(ValueError, msg='Positive constant without a witness'):
            EmbeddingVerdict(Criterion.classical, '3', 1.0)

    def test_not_applicable_never_fails(self):
        skipped = embed.not_applicable(Criterion.sectorial_plq, '4', 'skipped')
        self.assertTrue(skipped.passed, 'Skipped conditions pass')
        self.assertEqual(skipped.as_dict()['status'], 'not_applicable', 'Status is serialized by name')

    def test_witness_values(self):
        self.assertEqual(embed.witness_value(1 + 2j), {'re': 1.0, 'im': 2.0}, 'Complex witnesses split')
        self.assertEqual(embed.witness_value(3), 3, 'Indices stay integers')


class TestClassical(TestCase):
    def test_unit_atom(self):
        verdicts = embed.check_classical_carleson(UNIT)
        self.assertAlmostEqual(verdicts.condition('2').constant, 1 / (4 * math.pi), places=12,
                               msg='Kernel test for delta_1 peaks at lambda = 1')
        self.assertAlmostEqual(verdicts.condition('2').witness, 1 + 0j, places=12, msg='Witness is lambda = 1')
        square = verdicts.condition('3').constant
        self.assertTrue(2 ** -0.25 - 1e-12 <= square <= 1.0 + 1e-12, f'Smallest side reaching the atom (got {square})')
        self.assertTrue(verdicts.all_passed(), 'delta_1 is a Carleson measure')

    def test_kernel_test_bounded_by_square_condition(self):
        mu = HalfPlaneMeasure.from_atoms([(0.3 + 2j, 0.7)])
        verdicts = embed.check_classical_carleson(mu)
        self.assertLessEqual(verdicts.condition('2').constant, verdicts.condition('3').constant,
                             'Kernel test is controlled by the square constant')

    def test_kernel_and_square_constants_comparable(self):
        for trial in range(30):
            mu = grid_atoms(rng.randint(1, 3))
            refinement = embed.refine_until_stable(
                lambda level: embed.check_classical_carleson(mu, level=level), tolerance=0.05, max_rounds=2)
            kernel = refinement.verdicts.condition('2').constant
            square = refinement.verdicts.condition('3').constant
            self.assertGreater(kernel, 0, f'Kernel test sees the atoms ({trial})')
            self.assertTrue(1 / 64 <= square / kernel <= 64,
                            f'Square {square} and kernel test {kernel} agree up to a fixed factor ({trial})')

    def test_homogeneous(self):
        mu = HalfPlaneMeasureFactory()
        one = embed.check_classical_carleson(mu)
        three = embed.check_classical_carleson(mu.scaled(3.0))
        for a, b in zip(one, three):
            expected = 3 * a.constant if a.scaling == ScalingKind.mass else 3 ** 0.5 * a.constant
            self.assertAlmostEqual(b.constant, expected, places=9, msg=f'{a.label} scales with the measure')

    def test_kernel_power_in_hardy_one(self):
        bound = embed.hardy_kernel_lower_bound(UNIT, 1.0)
        self.assertTrue(0 < bound.constant < math.inf, 'Squared kernel lies in H^1')


class TestZen(TestCase):
    def setUp(self) -> None:
        self.lebesgue = RadialMeasure.lebesgue()

    def test_select_kernel_power(self):
        self.assertEqual(embed.select_kernel_power(1, 2), 1, '2^2 >= 4')
        self.assertEqual(embed.select_kernel_power(2, 2), 2, '2^4 >= 8 > 2^2')
        self.assertEqual(embed.select_kernel_power(2, 1), 3, '2^3 >= 8 > 2^2')
        with self.assertRaises(ValueError, msg='Doubling constants are at least 1'):
            embed.select_kernel_power(0.5, 2)

    def test_series_constant(self):
        self.assertEqual(embed.kernel_power_series_constant(2, 1, 2), math.inf, '2^2 <= 2R diverges')
        self.assertAlmostEqual(embed.kernel_power_series_constant(2, 2, 2), 64 / 3, places=12, msg='16 / (1 - 1/4)')

    def test_unit_atom(self):
        verdicts = embed.check_zen_embedding(UNIT, self.lebesgue)
        square = verdicts.condition('3').constant
        self.assertTrue(0.7 <= square <= 1.0, f'Square constant for delta_1 is about 1 (got {square})')
        self.assertTrue(verdicts.all_passed(), 'delta_1 embeds A^2')

    def test_multiple_of_the_zen_measure(self):
        verdicts = embed.check_zen_embedding(zen_measure(self.lebesgue).scaled(2.0), self.lebesgue)
        self.assertAlmostEqual(verdicts.condition('3').constant, 2.0, places=9, msg='mu = 2 nu on every square')
        self.assertAlmostEqual(verdicts.condition('2').constant, 2.0, places=6, msg='mu = 2 nu on every kernel')

    def test_low_power_is_noted(self):
        with self.assertLogs('carleson_lab.analysis.embed', level='WARNING'):
            verdicts = embed.check_zen_embedding(UNIT, self.lebesgue, N=1)
        self.assertTrue(any('below' in note for note in verdicts.condition('2').notes), 'Low power is recorded')

    def test_needs_doubling(self):
        with self.assertRaises(NotDoubling, msg='No mass near the origin'):
            embed.check_zen_embedding(UNIT, RadialMeasure(atoms=((1.0, 1.0),)))


class TestPowerBound(TestCase):
    def test_counterexample_measure(self):
        verdict = embed.check_necessary_power_bound(embed.counterexample_measure(), ExponentPair(2, 1))
        self.assertLessEqual(verdict.constant, 2.0, 'mu(Q) <= 2 |I|^(1/2)')

    def test_p_one_is_total_mass(self):
        mu = HalfPlaneMeasureFactory()
        verdict = embed.check_necessary_power_bound(mu, ExponentPair(1, 2))
        self.assertAlmostEqual(verdict.constant, mu.total_mass(), places=12, msg="q/p' = 0 gives the largest mass")


class TestPprimeLeQ(TestCase):
    def test_growing_atoms_fail(self):
        mu = HalfPlaneMeasure.from_atoms([(1 + 1j * 2.0 ** k, 2.0 ** (2 * k)) for k in range(11)])
        verdicts = embed.check_pprime_le_q(mu, ExponentPair(2, 2))
        self.assertEqual(verdicts.condition('2').status, VerdictStatus.failed, 'Square ratios grow like 2^k')
        self.assertTrue(verdicts.any_failed(), 'The run fails')

    def test_zero_measure(self):
        verdicts = embed.check_pprime_le_q(HalfPlaneMeasure.zero(), ExponentPair(2, 2))
        self.assertEqual(verdicts.constants(), (0.0, 0.0, 0.0), 'Every constant vanishes')
        self.assertTrue(verdicts.all_passed(), 'The zero measure passes')

    def test_exponent_window(self):
        with self.assertRaises(ExponentWindow, msg='p > 2'):
            embed.check_pprime_le_q(UNIT, ExponentPair(3, 4))
        with self.assertRaises(ExponentWindow, msg="p' > q"):
            embed.check_pprime_le_q(UNIT, ExponentPair(1.5, 2))

    def test_lower_bound_below_test_constant(self):
        verdicts = embed.check_pprime_le_q(UNIT, ExponentPair(2, 2))
        self.assertGreaterEqual(verdicts.condition('1').constant, verdicts.condition('3').constant - 1e-12,
                                'Exponentials are part of the lower-bound family')


class TestSectorialQgeP(TestCase):
    def test_unit_atom(self):
        verdicts = embed.check_sectorial_qgep(UNIT, ExponentPair(2, 2))
        dyadic = verdicts.condition('4')
        self.assertAlmostEqual(dyadic.constant, 2 ** -0.5, places=12, msg='sqrt(2x) / (1 + x) peaks at x = 1')
        self.assertEqual(dyadic.witness, 0, 'Attained at n = 0')

    def test_homogeneous(self):
        mu = HalfPlaneMeasure.from_atoms([(1 + 0.2j, 1.0), (3 - 0.5j, 2.0)])
        pq = ExponentPair(2, 3)
        one = embed.check_sectorial_qgep(mu, pq)
        five = embed.check_sectorial_qgep(mu.scaled(5.0), pq)
        for a, b in zip(one, five):
            expected = 5 * a.constant if a.scaling == ScalingKind.mass else 5 ** (1 / 3) * a.constant
            self.assertAlmostEqual(b.constant, expected, places=9, msg=f'{a.label} scales with the measure')

    def test_symmetric_squares_below_all_squares(self):
        mu = HalfPlaneMeasure.from_atoms([(1 + 0.2j, 1.0), (3 - 0.5j, 2.0)])
        pq = ExponentPair(2, 2)
        symmetric = embed.check_sectorial_qgep(mu, pq).condition('2').constant
        everything = embed.check_necessary_power_bound(mu, pq).constant
        self.assertLessEqual(symmetric, everything, 'Fewer squares give a smaller sup')

    def test_needs_sector(self):
        with self.assertRaises(NotSectorial, msg='Atom on the boundary line'):
            embed.check_sectorial_qgep(HalfPlaneMeasure.from_atoms([(1j, 1.0)]), ExponentPair(2, 2))
        with self.assertRaises(ExponentWindow, msg='q < p'):
            embed.check_sectorial_qgep(UNIT, ExponentPair(3, 2))


class TestSectorialPlQ(TestCase):
    def test_unit_atom(self):
        verdicts = embed.check_sectorial_plq(UNIT, ExponentPair(4, 2))
        self.assertAlmostEqual(verdicts.condition('2').constant, 1.0, places=12, msg='Only S_0 has mass')
        self.assertEqual(verdicts.condition('2').witness, 0, 'Witness is n = 0')
        self.assertEqual(verdicts.condition('4').status, VerdictStatus.passed, "p' < q makes (4) applicable")

    def test_equal_slab_sums(self):
        pq = ExponentPair(4, 2)
        # 2^(-n q/p') mu(S_n) = 1 on six slabs
        mu = HalfPlaneMeasure.from_atoms([(1.5 * 2.0 ** (n - 1), 2.0 ** (1.5 * n)) for n in range(6)])
        verdict = embed.check_sectorial_plq(mu, pq).condition('2')
        self.assertAlmostEqual(verdict.constant, 6 ** ((pq.p - pq.q) / pq.p), places=10, msg='l^2 norm of six ones')

    def test_conditions_agree_under_scaling(self):
        pq = ExponentPair(4, 2)
        for trial in range(20):
            mu = HalfPlaneMeasureFactory(atoms=[
                (cmath.rect(2.0 ** rng.uniform(-2, 5), rng.uniform(-1.0, 1.0)), rng.uniform(0.1, 2.0))
                for _ in range(rng.randint(1, 6))
            ])
            base = embed.check_sectorial_plq(mu, pq)
            for j in range(7):
                verdicts = embed.check_sectorial_plq(mu.scaled(2.0 ** j), pq)
                conditions = [verdicts.condition(c) for c in ('2', '3', '4')]
                self.assertEqual(len({math.isfinite(v.constant) for v in conditions}), 1,
                                 f'(2), (3) and (4) are finite together ({trial}, 2^{j})')
                self.assertEqual(len({v.status == VerdictStatus.divergent for v in conditions}), 1,
                                 f'(2), (3) and (4) diverge together ({trial}, 2^{j})')
                for v, power in zip(conditions, (1.0, 1 / pq.q, 1.0)):
                    self.assertAlmostEqual(v.constant / base.condition(v.condition).constant, 2.0 ** (j * power),
                                           places=9, msg=f'({v.condition}) scales with the measure ({trial}, 2^{j})')

    def test_balayage_condition_skipped(self):
        verdicts = embed.check_sectorial_plq(UNIT, ExponentPair(3, 1))
        self.assertEqual(verdicts.condition('4').status, VerdictStatus.not_applicable, "p' = 3/2 > q = 1")

    def test_tail_mass_is_noted(self):
        mu = HalfPlaneMeasure.from_atoms([(1 + 0j, 1.0), (2.0 ** 20, 1.0)])
        with self.assertLogs('carleson_lab.analysis.embed', level='WARNING'):
            verdicts = embed.check_sectorial_plq(mu, ExponentPair(4, 2))
        self.assertTrue(any('outside' in note for note in verdicts.condition('2').notes), 'Tail mass is recorded')

    def test_sequence_condition(self):
        condition = embed.sequence_condition((0, 1, 2), (3.0, 4.0, 0.0), 2.0)
        self.assertAlmostEqual(condition.norm, 5.0, places=12, msg='l^2 norm')
        self.assertEqual(condition.witness, 1, 'Largest entry')
        divergent = embed.sequence_condition((0, 1), (1.0, math.inf), 2.0)
        self.assertTrue(divergent.divergent, 'Infinite entries diverge')


class TestLacunary(TestCase):
    def test_single_kernel(self):
        report = embed.gurarii_macaev_ratio({0: 1.0})
        self.assertAlmostEqual(report.ratio, 2 ** -0.5, places=12, msg='||k~_1||_2 = 2^(-1/2)')

    def test_gram_bounds(self):
        for trial in range(200):
            alpha = [rng.uniform(-2.0, 2.0) for _ in range(10)]
            report = embed.gurarii_macaev_ratio(alpha)
            self.assertGreater(report.gram_min, 0, 'Lacunary kernels are a Riesz sequence')
            lo, hi = math.sqrt(report.gram_min), math.sqrt(report.gram_max)
            self.assertTrue(lo * (1 - 1e-8) <= report.ratio <= hi * (1 + 1e-8),
                            f'Ratio {report.ratio} lies in [{lo}, {hi}] ({trial})')

    def test_zero_coefficients(self):
        report = embed.gurarii_macaev_ratio({0: 0.0, 1: 0.0})
        self.assertIsNone(report.ratio, 'Ratio is undefined')

    def test_window_length(self):
        with self.assertRaises(ValueError, msg='Ten coefficients expected'):
            embed.gurarii_macaev_ratio([1.0, 2.0])


class TestLowerBound(TestCase):
    def test_empty_family(self):
        with self.assertRaises(EmptyFamily, msg='Nothing to test with'):
            embed.embedding_norm_lower_bound(UNIT, ExponentPair(2, 2), [])

    def test_exponential_ratio(self):
        self.assertAlmostEqual(embed.exponential_test_ratio(UNIT, 1.0, ExponentPair(2, 2)), 2 ** -0.5, places=12,
                               msg='(1/2) / (1/2)^(1/2)')


class TestCounterexample(TestCase):
    def test_suite(self):
        report = embed.counterexample_suite()
        self.assertTrue(report.square_bound_holds, 'mu(Q) <= 2 h^(1/2)')
        self.assertTrue(report.coexistence, 'Square bound and a large lower bound hold together')
        height, mass, bound = [row for row in report.square_rows if row[0] == 100.0][0]
        self.assertAlmostEqual(mass, 18.0, places=8, msg='2 (sqrt(100) - 1)')
        self.assertEqual(bound, 20.0, '2 sqrt(100)')
        t, cone, expected = [row for row in report.cone_rows if row[0] == 4.0][0]
        self.assertAlmostEqual(cone, 1.0, places=6, msg='2 / sqrt(4)')
        L, closed, numeric = [row for row in report.divergence_rows if row[0] == 9.0][0]
        self.assertAlmostEqual(closed, math.log(10), places=12, msg='log(1 + log T)')
        self.assertAlmostEqual(numeric, closed, places=6, msg='Quadrature agrees')
        L, closed, numeric = [row for row in report.divergence_rows if row[0] == 100.0][0]
        self.assertGreaterEqual(closed, 4.6, 'log(1 + log T) passes 4.6 at log T = 100')
        self.assertLessEqual(abs(numeric - closed), 1e-8, 'Quadrature agrees at log T = 100')
        self.assertEqual(VerdictStatus.exit_code(report.verdicts.final_status()), 0, 'The suite itself succeeds')

    def test_approximants_grow(self):
        mu = embed.counterexample_measure()
        ratios = [PhiApproximant(L).embedded_norm(mu, 1) / PhiApproximant(L).lp_norm(2) for L in (1.0, 100.0, 1e4)]
        self.assertEqual(ratios, sorted(ratios), 'Lower bounds increase with T')
        self.assertGreater(ratios[-1], 10, 'Beyond 10 at log T = 10^4')

    def test_other_measures_rejected(self):
        with self.assertRaises(UnsupportedMeasure, msg='Approximant only knows dx / sqrt(x)'):
            PhiApproximant(1.0).embedded_norm(UNIT, 1)


class TestStripAndSobolev(TestCase):
    def test_strip(self):
        strip = StripSpec(1.0, 4.0)
        mu = HalfPlaneMeasure.from_atoms([(1 + 0j, 1.0), (2 + 1j, 0.5), (4 - 3j, 2.0)])
        verdicts = embed.check_strip(mu, ExponentPair(2, 2), strip)
        lower = verdicts.condition('1')
        self.assertLessEqual(lower.constant, 10 * lower.reference, 'Lower bound stays near the predicted bound')
        with self.assertRaises(NotInStrip, msg='Atom at Re z = 1 lies left of the strip'):
            embed.check_strip(mu, ExponentPair(2, 2), StripSpec(2.0, 4.0))
        with self.assertRaises(ExponentWindow, msg='q < 2'):
            embed.check_strip(mu, ExponentPair(2, 1.5), strip)

    def test_sobolev_l2(self):
        verdicts = embed.check_sobolev(UNIT, 1.0, ExponentPair(2, 2), SobolevMode.l2)
        self.assertTrue(all(v.criterion == Criterion.sobolev for v in verdicts), 'Verdicts are relabeled')
        self.assertTrue(all(v.constant <= 0.25 + 1e-12 for v in verdicts), 'Weight |1 + 1|^(-2) = 1/4')

    def test_sobolev_lower_bound_tracks_carleson_constant(self):
        for trial in range(20):
            beta = rng.choice((0.5, 1.0))
            mu = grid_atoms(rng.randint(1, 3))
            verdicts = embed.check_sobolev(mu, beta, ExponentPair(2, 2), SobolevMode.l2)
            weighted = embed.sobolev_measure(mu, beta, 2.0, SobolevMode.l2)
            carleson = measure.carleson_ratio_sup(weighted, measure.power_gauge(1.0), embed.square_grid(weighted))
            self.assertAlmostEqual(verdicts.condition('3').constant, carleson.constant, places=12,
                                   msg=f'Square condition runs on |1 + z|^(-2 beta) d mu ({trial})')
            lower = verdicts.condition('1').constant
            self.assertTrue(1 / 64 <= lower ** 2 / carleson.constant <= 64,
                            f'Lower bound {lower} tracks the constant {carleson.constant} (beta={beta}, {trial})')

    def test_sobolev_sectorial_weight(self):
        mu = embed.sobolev_measure(HalfPlaneMeasure.from_atoms([(2.0 ** -10, 1.0)]), 1.0, 2.0, SobolevMode.sectorial)
        self.assertAlmostEqual(mu.total_mass(), 1 + 2.0 ** 20, places=6, msg='1 + |z|^(-2)')


class TestRefinement(TestCase):
    def test_stable(self):
        def run(level):
            return VerdictList([embed.make_verdict(Criterion.classical, '3', 1.0, 'w', ScalingKind.mass)])

        refinement = embed.refine_until_stable(run, tolerance=0.01, max_rounds=3)
        self.assertTrue(refinement.stable, 'Constants do not move')
        self.assertEqual(refinement.level, 1, 'One refinement suffices')

    def test_unstable(self):
        def run(level):
            return VerdictList([embed.make_verdict(Criterion.classical, '3', 2.0 ** level, 'w', ScalingKind.mass)])

        with self.assertLogs('carleson_lab.analysis.embed', level='WARNING'):
            refinement = embed.refine_until_stable(run, tolerance=0.01, max_rounds=2)
        self.assertFalse(refinement.stable, 'Constants keep doubling')
        self.assertEqual(len(refinement.history), 3, 'One row per round')
