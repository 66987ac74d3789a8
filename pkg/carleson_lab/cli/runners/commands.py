"""
One runner per subcommand. Each runner turns its parsed specs into verdicts, a report and CSV series; writing the
    outputs is left to the base class.
"""
import dataclasses as dc
import logging
import typing as ty

import numpy as np
from django.conf import settings

from carleson_lab.analysis import admiss, balayage, dyadic, embed, hankel
from carleson_lab.analysis import measure as ms
from carleson_lab.analysis import transforms as tf
from carleson_lab.analysis.embed import VerdictList
from carleson_lab.analysis.enums import Criterion, ScalingKind, SobolevMode, VerdictStatus
from carleson_lab.cli.exceptions import UnknownOption

from .base import AbstractCommandRunner, RunOutput, as_float

logger = logging.getLogger(__name__)


def _square_rows(found: ms.RatioSup):
    return ('center_y', 'side', 'mass', 'gauge', 'ratio'), found.rows


def _require(args: dict, name: str, why: str):
    value = args.get(name)
    if value is None:
        raise ValueError(f'--{name.replace("_", "-")} is required {why}')
    return value


class MeasureRunner(AbstractCommandRunner):
    """Square sups, total mass and doubling diagnostics for a single measure spec"""
    NAME = 'measure'
    HELP = 'Carleson ratio sup, total mass or doubling constant of a measure'
    SPEC_OPTIONS = {'spec': ('radial', 'halfplane'), 'nu': ('radial',)}
    GRID_KIND = 'squares'

    OPERATIONS = ('sup', 'total', 'doubling')

    @classmethod
    def add_arguments(cls, parser):
        parser.add_argument('--spec', required=True, help='Radial or half-plane measure spec')
        parser.add_argument('--op', default='sup', help=f'One of {", ".join(cls.OPERATIONS)}')
        parser.add_argument('--gauge', default='pow:1', help='pow:<s>, unit or nu')
        parser.add_argument('--nu', help='Radial spec for the "nu" gauge')
        parser.add_argument('--cap', type=float, help='Verdict cap')

    def _execute(self, specs):
        op = self._args.get('op') or 'sup'
        if op not in self.OPERATIONS:
            raise UnknownOption(f'Unknown measure operation: {op!r}')
        spec = specs['spec']
        radial = isinstance(spec, ms.RadialMeasure)

        if op == 'total':
            report = {'kind': 'radial' if radial else 'halfplane', 'total_mass': spec.total_mass()}
            return RunOutput(VerdictList(), report)

        if op == 'doubling':
            if not radial:
                raise ValueError('The doubling constant is defined for radial measures')
            info = ms.doubling_constant(spec)
            rows = [(t, spec.cdf(t), spec.cdf(2 * t)) for t in info.grid]
            report = {'R': info.R, 'sup_location': info.sup_location, 'exceeds_cap': info.exceeds_cap,
                      'family': spec.family()}
            status = VerdictStatus.failed if info.exceeds_cap else VerdictStatus.passed
            return RunOutput(VerdictList(), report, {'doubling': (('t', 'F_t', 'F_2t'), rows)}, status)

        mu = ms.zen_measure(spec) if radial else spec
        gauge = ms.parse_gauge(self._args.get('gauge') or 'pow:1', specs.get('nu'))
        family = ms.square_family(mu)
        found = ms.carleson_ratio_sup(mu, gauge, family)
        if isinstance(gauge, ms.MeasureGauge):
            criterion, condition = Criterion.zen, '3'
        else:
            criterion, condition = Criterion.power_bound, '2'
        verdict = embed.make_verdict(criterion, condition, found.constant, found.witness, ScalingKind.mass, self._cap(),
                                     grid=dict(family.descriptor, gauge=gauge.describe()))
        report = {'gauge': gauge.describe(), 'total_mass': mu.total_mass()}
        return RunOutput(VerdictList([verdict]), report, {'squares': _square_rows(found)})


class DecomposeRunner(AbstractCommandRunner):
    NAME = 'decompose'
    HELP = 'Split mu into parts dominated by the line measures of an adapted sequence for nu'
    SPEC_OPTIONS = {'mu': ('halfplane',), 'nu': ('radial',)}

    @classmethod
    def add_arguments(cls, parser):
        parser.add_argument('--mu', required=True, help='Half-plane measure spec')
        parser.add_argument('--nu', required=True, help='Radial measure spec')
        parser.add_argument('--scale-to-unit', action='store_true', help='Divide mu by its constant on the tiles')
        parser.add_argument('--extent', type=float, help='Vertical extent of the tile set')

    def _execute(self, specs):
        mu, nu = specs['mu'], specs['nu']
        seq = dyadic.build_adapted_sequence(nu)
        tiles = dyadic.build_tiles(dyadic.refine_sequence(seq), y_extent=as_float(self._args.get('extent')))
        result = dyadic.decompose(mu, nu, tiles, seq, scale_to_unit=bool(self._args.get('scale_to_unit')))

        report = {
            'stage_indices': result.stage_indices,
            'truncated': seq.truncated,
            'R': seq.R,
            'observed_constant': result.observed_constant,
            'truncation_loss': result.truncation_loss,
            'residual_mass': result.residual_mass,
            'final_ratio': result.final_ratio,
            'scale': result.scale,
            'tile_mass_error': result.tile_mass_error(),
            'type_counts': result.type_counts(),
            'tiles': len(tiles.tiles),
        }
        parts = [
            (n, seq.radius(n), mass, density)
            for n, mass, density in zip(result.stage_indices, result.part_masses(), result.line_densities)
        ]
        log = [
            (r.stage, r.generation, r.y_lo, r.y_hi, r.tile_type.name, r.line_mass, r.tile_mass, r.taken)
            for r in result.type_log
        ]
        rectangles = [(t.generation, t.x_lo, t.x_hi, t.y_lo, t.y_hi, t.size) for t in tiles.tiles]
        tables = {
            'parts': (('n', 'a_n', 'mass', 'line_density'), parts),
            'type_log': (('stage', 'generation', 'y_lo', 'y_hi', 'tile_type', 'line_mass', 'tile_mass', 'taken'), log),
            'tiles': (('generation', 'x_lo', 'x_hi', 'y_lo', 'y_hi', 'size'), rectangles),
        }
        return RunOutput(VerdictList(), report, tables)


class PaleyWienerRunner(AbstractCommandRunner):
    NAME = 'pw-check'
    HELP = 'Compare the Zen norm of L f with the weighted L^2 norm of f'
    SPEC_OPTIONS = {'nu': ('radial',)}
    GRID_KIND = 'geometric'
    DEFAULT_GRID = '0.0625:16:33'

    @classmethod
    def add_arguments(cls, parser):
        parser.add_argument('--nu', required=True, help='Radial measure spec')
        parser.add_argument('--f', required=True, help='Test function, e.g. monexp:2:1.0')
        parser.add_argument('--max-gap', type=float, default=1e-6, help='Largest accepted relative gap')

    def _execute(self, specs):
        nu = specs['nu']
        f = tf.parse_test_function(self._args['f'])
        found = tf.paley_wiener_check(nu, f)
        max_gap = as_float(self._args.get('max_gap'))
        max_gap = 1e-6 if max_gap is None else max_gap

        weight = tf.weight_from_measure(nu)
        report = {
            'f': f.describe(),
            'lhs': found.lhs,
            'rhs': found.rhs,
            'gap': found.gap,
            'divergent': found.divergent,
            'max_gap': max_gap,
            'weight_closed_form': weight.closed_form(),
        }
        status = VerdictStatus.failed if found.gap > max_gap else VerdictStatus.passed
        if status == VerdictStatus.failed:
            logger.info(f'Isometry gap {found.gap:.6g} for {f.describe()} exceeds {max_gap:.3g}')
        curve = tf.weight_curve(nu, self._grid().geometric())
        return RunOutput(VerdictList(), report, {'weight': (('t', 'w'), curve)}, status)


class BalayageRunner(AbstractCommandRunner):
    NAME = 'balayage'
    HELP = 'Sweep and dyadic balayage of a measure on a t grid'
    SPEC_OPTIONS = {'mu': ('halfplane',)}
    GRID_KIND = 'linear'
    DEFAULT_GRID = '-8:8:129'

    @classmethod
    def add_arguments(cls, parser):
        parser.add_argument('--mu', required=True, help='Half-plane measure spec')
        parser.add_argument('--upper', action='store_true', help='Add the layer upper estimate (sectorial mu only)')
        parser.add_argument('--theta', type=float, help='Sector opening for --upper')
        parser.add_argument('--maximal', help='Sampled test function for the maximal-function estimate')
        parser.add_argument('--samples', type=int, default=16, help='Random points per cell for --maximal')

    def _execute(self, specs):
        mu = specs['mu']
        ts = self._grid().linear()
        n_range = balayage.cell_range(mu)
        k_range = balayage.vertical_range(mu, n_range)
        comparison = balayage.balayage_comparison(mu, ts, n_range, k_range)

        report = {'n_range': n_range, 'k_range': k_range, 'ratio': comparison.ratio}
        header = ('t', 'S', 'S_d')
        rows = comparison.rows()
        if self._args.get('upper'):
            theta = as_float(self._args.get('theta'))
            sector = balayage.SectorSpec(theta) if theta is not None else None
            upper = [balayage.balayage_upper_estimate(mu, t, n_range, sector=sector) for t in ts]
            header += ('upper',)
            rows = [row + (u,) for row, u in zip(rows, upper)]
        tables = {'balayage': (header, rows)}

        if self._args.get('maximal'):
            f = tf.parse_test_function(self._args['maximal'])
            if not isinstance(f, tf.Sampled):
                raise ValueError('--maximal takes a sampled function (samples:<t>=<v>,...)')
            estimate = balayage.maximal_estimate_constant(f, n_range, int(self._args.get('samples') or 16),
                                                          settings.CARLESON_LAB['SEED'])
            report['maximal_constant'] = estimate.constant
            report['maximal_witness'] = estimate.witness
            tables['maximal'] = (
                ('n', 're_z', 'im_z', 'ratio'),
                [(n, z.real, z.imag, ratio) for n, z, ratio in estimate.rows],
            )
        return RunOutput(VerdictList(), report, tables)


class CheckRunner(AbstractCommandRunner):
    """Run one embedding criterion on a half-plane measure, optionally refining grids until the constants settle"""
    NAME = 'check'
    HELP = 'Carleson embedding criteria for a half-plane measure'
    SPEC_OPTIONS = {'mu': ('halfplane',), 'nu': ('radial',)}
    GRID_KIND = 'squares'

    CRITERIA = ('classical', 'zen', 'power', 'pq', 'sector-qgep', 'sector-plq', 'strip', 'sobolev')

    @classmethod
    def add_arguments(cls, parser):
        parser.add_argument('--mu', required=True, help='Half-plane measure spec')
        parser.add_argument('--criterion', default='classical', help=f'One of {", ".join(cls.CRITERIA)}')
        parser.add_argument('--nu', help='Radial measure spec (zen criterion)')
        parser.add_argument('--p', type=float, default=2.0)
        parser.add_argument('--q', type=float, default=2.0)
        parser.add_argument('--N', type=int, help='Kernel power for the zen criterion')
        parser.add_argument('--beta', type=float, help='Sobolev order')
        parser.add_argument('--mode', default='sectorial', help='Sobolev mode: sectorial or l2')
        parser.add_argument('--theta', type=float, help='Sector opening')
        parser.add_argument('--alpha1', type=float, help='Left edge of the strip')
        parser.add_argument('--alpha2', type=float, help='Right edge of the strip')
        parser.add_argument('--balayage-form', action='store_true', default=None,
                            help='Require the balayage condition (sector-plq)')
        parser.add_argument('--cap', type=float, help='Verdict cap')

    def _criterion(self, specs) -> ty.Callable[[int], VerdictList]:
        args = self._args
        mu = specs['mu']
        cap = self._cap()
        name = args.get('criterion') or 'classical'
        pq = tf.ExponentPair(float(args.get('p') or 2.0), float(args.get('q') or 2.0))
        theta = as_float(args.get('theta'))
        sector = balayage.SectorSpec(theta) if theta is not None else None

        if name == 'classical':
            return lambda level: embed.check_classical_carleson(mu, pq.p, level=level, cap=cap)
        if name == 'zen':
            nu = specs.get('nu')
            if nu is None:
                raise ValueError('--nu is required for the zen criterion')
            N = args.get('N')
            return lambda level: embed.check_zen_embedding(mu, nu, pq.p, N, level=level, cap=cap)
        if name == 'power':
            return lambda level: VerdictList([embed.check_necessary_power_bound(mu, pq, level=level, cap=cap)])
        if name == 'pq':
            return lambda level: embed.check_pprime_le_q(mu, pq, level=level, cap=cap)
        if name == 'sector-qgep':
            return lambda level: embed.check_sectorial_qgep(mu, pq, sector, level=level, cap=cap)
        if name == 'sector-plq':
            form = args.get('balayage_form')
            return lambda level: embed.check_sectorial_plq(mu, pq, sector, balayage_form=form, cap=cap)
        if name == 'strip':
            strip = balayage.StripSpec(float(_require(args, 'alpha1', 'for the strip criterion')),
                                       float(_require(args, 'alpha2', 'for the strip criterion')))
            return lambda level: embed.check_strip(mu, pq, strip, level=level, cap=cap)
        if name == 'sobolev':
            beta = float(_require(args, 'beta', 'for the sobolev criterion'))
            mode = args.get('mode') or 'sectorial'
            if mode not in SobolevMode.__members__:
                raise UnknownOption(f'Unknown Sobolev mode: {mode!r}')
            return lambda level: embed.check_sobolev(mu, beta, pq, SobolevMode[mode], sector, level=level, cap=cap)
        raise UnknownOption(f'Unknown criterion: {name!r} (expected one of {", ".join(self.CRITERIA)})')

    def _execute(self, specs):
        run = self._criterion(specs)
        report = {'criterion': self._args.get('criterion') or 'classical'}
        if self._args.get('refine'):
            refinement = embed.refine_until_stable(run)
            verdicts, level = refinement.verdicts, refinement.level
            report.update(level=level, stable=refinement.stable, history=refinement.history)
        else:
            verdicts, level = run(0), 0

        mu = specs['mu']
        nu = specs.get('nu')
        if report['criterion'] == 'zen' and nu is not None:
            gauge = ms.measure_gauge(nu)
        else:
            pq = tf.ExponentPair(float(self._args.get('p') or 2.0), float(self._args.get('q') or 2.0))
            gauge = ms.power_gauge(embed.power_gauge_exponent(pq))
        found = ms.carleson_ratio_sup(mu, gauge, embed.square_grid(mu, level))
        report['gauge'] = gauge.describe()
        return RunOutput(verdicts, report, {'squares': _square_rows(found)})


class HankelRunner(AbstractCommandRunner):
    NAME = 'hankel'
    HELP = 'Boundedness of the little Hankel operator through its symbol-induced measure'
    SPEC_OPTIONS = {'nu': ('radial',)}
    GRID_KIND = 'geometric'
    DEFAULT_GRID = '0.0625:16:17'

    @classmethod
    def add_arguments(cls, parser):
        parser.add_argument('--nu', required=True, help='Radial measure spec')
        parser.add_argument('--symbol', required=True, help='Symbol, e.g. log1p or kernel:1.0:1')
        parser.add_argument('--bloch', action='store_true', help='Also run the Bloch-norm sufficiency check')
        parser.add_argument('--cap', type=float, help='Verdict cap')

    def _execute(self, specs):
        nu = specs['nu']
        b = hankel.parse_symbol(self._args['symbol'])
        cap = self._cap()
        report: ty.Dict[str, ty.Any] = {'symbol': b.describe()}

        if self._args.get('bloch'):
            found = hankel.check_bloch_sufficiency(b, nu, cap=cap)
            verdicts = VerdictList([found.bloch, found.carleson])
            report.update(
                bloch_norm=found.bloch.constant,
                carleson_constant=found.carleson.constant,
                log_integral_ratio=found.log_bound.ratio,
                log_integral_bound=found.log_bound.predicted,
                predicted=found.predicted,
                consistent=found.consistent,
            )
        else:
            verdicts = VerdictList([hankel.check_hankel_bounded(b, nu, cap=cap)])

        span, points = settings.CARLESON_LAB['LAMBDA_IM']
        xs = self._grid().geometric()
        ys = np.linspace(-span, span, points)
        density = hankel.density_table(b, nu, xs, ys)
        rows = [(x, y, density[i, j]) for i, x in enumerate(xs) for j, y in enumerate(ys)]
        return RunOutput(verdicts, report, {'density': (('x', 'y', 'rho'), rows)})


class AdmissRunner(AbstractCommandRunner):
    NAME = 'admiss'
    HELP = 'Admissibility of a diagonal control system'
    SPEC_OPTIONS = {'sys': ('system',)}
    GRID_KIND = 'squares'

    @classmethod
    def add_arguments(cls, parser):
        parser.add_argument('--sys', required=True, help='System spec')
        parser.add_argument('--space', default='lp:2', help='lp:<p>, l2w:lebesgue, l2w:hardy or l2w:alpha:<alpha>')
        parser.add_argument('--q', type=float, help='Override the basis exponent from the system file')
        parser.add_argument('--cap', type=float, help='Verdict cap')

    def _execute(self, specs):
        system = specs['sys']
        q = as_float(self._args.get('q'))
        if q is not None:
            system = dc.replace(system, q=q)
        space = admiss.parse_input_space(self._args.get('space') or 'lp:2')
        found = admiss.admissibility_report(system, space, cap=self._cap())

        report = {
            'space': space.describe(),
            'q': system.q,
            'route': found.route,
            'deciding': found.deciding,
            'certified': found.certified,
            'admissible': found.admissible,
            'notes': found.notes,
            'total_control_mass': admiss.total_control_mass(system),
        }
        modes = [
            (k, lam.real, lam.imag, b.real, b.imag, abs(b) ** system.q)
            for k, (lam, b) in enumerate(zip(system.eigenvalues, system.controls))
        ]
        verdicts = VerdictList([found.verdict, *found.verdicts])
        return RunOutput(verdicts, report, {'modes': (('k', 're_lambda', 'im_lambda', 're_b', 'im_b', 'mass'), modes)})


class CounterexampleRunner(AbstractCommandRunner):
    """The measure dx / sqrt(x) on [1, inf): the square bound holds while the embedding norm grows without bound"""
    NAME = 'counterexample'
    HELP = 'Square bound, cone integrals and embedding lower bounds for dx / sqrt(x) on [1, inf)'

    @classmethod
    def add_arguments(cls, parser):
        parser.add_argument('--heights', type=float, nargs='+', help='Square sides for the mass table')
        parser.add_argument('--log-t', type=float, nargs='+', help='log T of the truncated test functions')

    def _execute(self, specs):
        kwargs = {}
        if self._args.get('heights'):
            kwargs['heights'] = tuple(float(h) for h in self._args['heights'])
        if self._args.get('log_t'):
            kwargs['log_ts'] = tuple(float(L) for L in self._args['log_t'])
        found = embed.counterexample_suite(**kwargs)

        report = {
            'square_constant': found.square_constant,
            'square_bound_holds': found.square_bound_holds,
            'lower_bound': found.lower_bound.constant,
            'lower_bound_witness': found.lower_bound.witness,
            'coexistence': found.coexistence,
        }
        if not found.coexistence:
            logger.warning('Lower bounds stayed below 10 for these truncations; raise --log-t to see the growth')
        tables = {
            'squares': (('h', 'mass', 'bound'), found.square_rows),
            'cone': (('t', 'integral', 'closed_form'), found.cone_rows),
            'divergence': (('log_T', 'log1p', 'quadrature'), found.divergence_rows),
            'lower_bound': (('function', 'ratio'), found.lower_bound.rows),
        }
        return RunOutput(found.verdicts, report, tables)
