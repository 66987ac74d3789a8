"""
Admissibility of control operators for diagonal semigroups.

A diagonal system with eigenvalues lambda_k (Re lambda_k < 0) and control scalars b_k is admissible for the input
    space Z exactly when the Laplace transform maps Z boundedly into L^q(mu), with mu = sum of |b_k|^q at -lambda_k.
    Only finite mode lists are handled. Adding modes only increases every constant, so the verdict for a
    truncated system is a lower bound for the full one.
"""
import dataclasses as dc
import logging
import math
import typing as ty

from carleson_lab.analysis import balayage, embed
from carleson_lab.analysis import measure as ms
from carleson_lab.analysis import transforms as tf
from carleson_lab.analysis.embed import EmbeddingVerdict, VerdictList
from carleson_lab.analysis.enums import Criterion
from carleson_lab.analysis.exceptions import (
    EigenvalueInRightHalfPlane,
    ExponentWindow,
)

logger = logging.getLogger(__name__)


@dc.dataclass(frozen=True)
class DiagonalSystem:
    eigenvalues: ty.Tuple[complex, ...]
    controls: ty.Tuple[complex, ...]
    q: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, 'eigenvalues', tuple(complex(v) for v in self.eigenvalues))
        object.__setattr__(self, 'controls', tuple(complex(b) for b in self.controls))
        if len(self.eigenvalues) != len(self.controls):
            raise ValueError(f'{len(self.eigenvalues)} eigenvalues but {len(self.controls)} control scalars')
        if self.q < 1:
            raise ValueError(f'Basis exponent q must be at least 1 (got {self.q})')
        for lam in self.eigenvalues:
            if not lam.real < 0:
                raise EigenvalueInRightHalfPlane(f'Eigenvalue {lam} is not in the open left half plane')

    def __len__(self):
        return len(self.eigenvalues)

    def conjugated(self) -> 'DiagonalSystem':
        return DiagonalSystem(tuple(v.conjugate() for v in self.eigenvalues), self.controls, self.q)


def system_measure(system: DiagonalSystem) -> ms.HalfPlaneMeasure:
    """sum over k of |b_k|^q delta at -lambda_k; repeated eigenvalues merge"""
    return ms.HalfPlaneMeasure.from_atoms((-lam, abs(b) ** system.q) for lam, b in zip(system.eigenvalues,
                                                                                      system.controls))


##########
# Input spaces
@dc.dataclass(frozen=True)
class LpSpace:
    p: float = 2.0

    def describe(self) -> str:
        return f'lp:{self.p!r}'


@dc.dataclass(frozen=True)
class WeightedL2Space:
    """L^2_w with the weight w of the Zen space of nu~"""
    nu: ms.RadialMeasure
    label: str = ''

    def describe(self) -> str:
        return f'l2w:{self.label}'


InputSpace = ty.Union[LpSpace, WeightedL2Space]


def alpha_admissibility_space(alpha: float) -> WeightedL2Space:
    """L^2 with weight t^alpha, -1 < alpha < 0"""
    return WeightedL2Space(tf.measure_for_power_weight(alpha), f'alpha:{alpha!r}')


def parse_input_space(text: str) -> InputSpace:
    """lp:<p> | l2w:lebesgue | l2w:hardy | l2w:alpha:<alpha>"""
    kind, _, rest = text.strip().partition(':')
    try:
        if kind == 'lp':
            return LpSpace(float(rest))
        if kind == 'l2w':
            if rest == 'lebesgue':
                return WeightedL2Space(ms.RadialMeasure.lebesgue(), 'lebesgue')
            if rest == 'hardy':
                return WeightedL2Space(ms.RadialMeasure.dirac(), 'hardy')
            if rest.startswith('alpha:'):
                return alpha_admissibility_space(float(rest[len('alpha:'):]))
    except ValueError as e:
        raise ValueError(f'Could not parse input space {text!r}: {e}')
    raise ValueError(f'Unknown input space: {text!r}')


##########
# Verdicts
@dc.dataclass(frozen=True)
class AdmissibilityReport:
    """The checks run for one system, the route that chose them, and the condition that decides"""
    route: str
    verdicts: VerdictList = dc.field(compare=False)
    deciding: str
    certified: bool
    notes: ty.Tuple[str, ...] = ()

    @property
    def verdict(self) -> EmbeddingVerdict:
        decisive = self.verdicts.condition(self.deciding)
        notes = (f'route: {self.route}',) + self.notes + decisive.notes
        return dc.replace(decisive, criterion=Criterion.admissibility, condition=self.route,
                          status=self.verdicts.final_status(), notes=notes)

    @property
    def admissible(self) -> bool:
        return self.certified and self.verdicts.all_passed()


def _strip_of(mu: ms.HalfPlaneMeasure) -> balayage.StripSpec:
    x_min, x_max, _, _ = mu.support_box()
    return balayage.StripSpec(x_min, x_max)


def admissibility_report(
        system: DiagonalSystem,
        space: InputSpace,
        level: int = 0,
        cap: float = None,
) -> AdmissibilityReport:
    mu = system_measure(system)
    q = system.q
    truncation = (f'{len(system)} modes: a lower bound for any longer mode list',)

    if isinstance(space, WeightedL2Space):
        if q != 2:
            raise ExponentWindow(f'Weighted L^2 input spaces need q = 2 (got q={q})')
        verdicts = embed.check_zen_embedding(mu, space.nu, 2.0, level=level, cap=cap)
        return AdmissibilityReport('zen', verdicts, '3', True, truncation)

    pq = tf.ExponentPair(space.p, q)
    if pq.p <= 2 and pq.p_prime <= q:
        verdicts = embed.check_pprime_le_q(mu, pq, level=level, cap=cap)
        return AdmissibilityReport('pprime_le_q', verdicts, '2', True, truncation)
    if mu.is_zero():
        verdicts = VerdictList([embed.check_necessary_power_bound(mu, pq, level=level, cap=cap)])
        return AdmissibilityReport('power_bound', verdicts, '2', True, truncation)
    if pq.p_prime <= q and q >= 2:
        verdicts = embed.check_strip(mu, pq, _strip_of(mu), level=level, cap=cap)
        return AdmissibilityReport('strip', verdicts, '2', True, truncation)
    if q >= pq.p > 1:
        verdicts = embed.check_sectorial_qgep(mu, pq, level=level, cap=cap)
        return AdmissibilityReport('sectorial_qgep', verdicts, '2', True, truncation)
    if q < pq.p:
        verdicts = embed.check_sectorial_plq(mu, pq, cap=cap)
        return AdmissibilityReport('sectorial_plq', verdicts, '2', True, truncation)

    logger.warning(f'No sufficient criterion covers p={pq.p}, q={q}; reporting the necessary condition only')
    verdicts = VerdictList([embed.check_necessary_power_bound(mu, pq, level=level, cap=cap)])
    return AdmissibilityReport('power_bound', verdicts, '2', False, truncation + ('sufficiency not certified',))


def admissibility_verdict(
        system: DiagonalSystem,
        space: InputSpace,
        level: int = 0,
        cap: float = None,
) -> EmbeddingVerdict:
    return admissibility_report(system, space, level, cap).verdict


def total_control_mass(system: DiagonalSystem) -> float:
    return math.fsum(abs(b) ** system.q for b in system.controls)
