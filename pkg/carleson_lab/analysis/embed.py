"""
Embedding criteria as executable checks, empirical lower bounds for embedding norms, the lacunary kernel
    equivalence test and the counterexample for q < p.

Every "for all" condition is evaluated on a finite grid: test points are geometric in Re and linear in Im, and
    square families come from `measure.square_family`. A constant is therefore a lower bound for the true
    supremum, and every verdict records the grid it was computed on. Conditions phrased as sequences over n in Z
    are truncated to an index window and report the mass that falls outside it.

Verdict conditions are numbered the way the corresponding theorem enumerates them: "1" is the embedding itself
    (only ever a lower bound here), the higher numbers are the testable conditions.
"""
import collections
import collections.abc
import dataclasses as dc
import logging
import math
import typing as ty

import numpy as np
from django.conf import settings
from scipy import special

from carleson_lab.analysis import balayage, quadrature
from carleson_lab.analysis import measure as ms
from carleson_lab.analysis import transforms as tf
from carleson_lab.analysis.enums import Criterion, ScalingKind, SobolevMode, VerdictStatus
from carleson_lab.analysis.exceptions import (
    BalayageNotApplicable,
    DivergentNorm,
    EmptyFamily,
    EmptyWindow,
    ExponentWindow,
    NotDoubling,
    QuadratureFailure,
    UnsupportedMeasure,
    ZeroMassNearOrigin,
)

logger = logging.getLogger(__name__)


##########
# Verdicts
@dc.dataclass(frozen=True)
class EmbeddingVerdict:
    """
    One condition of one criterion. `reference` holds a predicted or closed-form value to compare the constant
        against, when the criterion has one.
    """
    criterion: Criterion
    condition: str
    constant: float
    witness: ty.Any = None
    status: VerdictStatus = VerdictStatus.passed
    cap: float = math.inf
    scaling: ScalingKind = ScalingKind.none
    notes: ty.Tuple[str, ...] = ()
    grid: ty.Dict[str, ty.Any] = dc.field(default_factory=dict, compare=False)
    reference: ty.Optional[float] = None

    def __post_init__(self):
        if not self.constant >= 0:
            raise ValueError(f'Verdict constants are nonnegative (got {self.constant})')
        if self.constant > 0 and self.witness is None and self.status != VerdictStatus.not_applicable:
            raise ValueError(f'Verdict {self.label} has a positive constant but no witness')

    @property
    def label(self) -> str:
        return f'{self.criterion.name}:{self.condition}'

    @property
    def passed(self) -> bool:
        return not VerdictStatus.is_failure(self.status)

    def as_dict(self) -> dict:
        return {
            'criterion': self.criterion.name,
            'condition': self.condition,
            'constant': self.constant,
            'witness': witness_value(self.witness),
            'status': self.status.name,
            'cap': self.cap,
            'scaling': self.scaling.name,
            'notes': list(self.notes),
            'grid': self.grid,
            'reference': self.reference,
        }


def witness_value(witness):
    """JSON-friendly form of a witness"""
    if witness is None or isinstance(witness, (bool, int, str)):
        return witness
    if isinstance(witness, ms.CarlesonSquare):
        return witness.as_dict()
    if isinstance(witness, (complex, np.complexfloating)):
        return {'re': float(witness.real), 'im': float(witness.imag)}
    if isinstance(witness, (float, np.floating, np.integer)):
        return witness.item() if hasattr(witness, 'item') else witness
    if isinstance(witness, (tuple, list)):
        return [witness_value(w) for w in witness]
    return str(witness)


def make_verdict(
        criterion: Criterion,
        condition: str,
        constant: float,
        witness,
        scaling: ScalingKind,
        cap: float = None,
        notes: ty.Sequence[str] = (),
        grid: ty.Dict[str, ty.Any] = None,
        reference: float = None,
) -> EmbeddingVerdict:
    cap = settings.CARLESON_LAB['VERDICT_CAP'] if cap is None else cap
    constant = float(constant)
    if math.isinf(constant):
        status = VerdictStatus.divergent
    elif constant > cap:
        status = VerdictStatus.failed
    else:
        status = VerdictStatus.passed
    if VerdictStatus.is_failure(status):
        logger.info(f'{criterion.name}:{condition} {status.name} with constant {constant:.6g} (cap {cap:.3g})')
    return EmbeddingVerdict(criterion, condition, constant, witness, status, cap, scaling, tuple(notes), grid or {},
                            reference)


def not_applicable(criterion: Criterion, condition: str, note: str) -> EmbeddingVerdict:
    return EmbeddingVerdict(criterion, condition, 0.0, status=VerdictStatus.not_applicable, notes=(note,))


class VerdictList(collections.UserList):
    def all_passed(self) -> bool:
        return all(v.passed for v in self.data)

    def any_failed(self) -> bool:
        return not self.all_passed()

    def worst(self) -> ty.Optional[EmbeddingVerdict]:
        if not self.data:
            return None
        return max(self.data, key=lambda v: (v.status, v.constant))

    def final_status(self) -> VerdictStatus:
        worst = self.worst()
        return VerdictStatus.passed if worst is None else worst.status

    def condition(self, condition: str) -> EmbeddingVerdict:
        for verdict in self.data:
            if verdict.condition == condition:
                return verdict
        raise KeyError(condition)

    def constants(self) -> ty.Tuple[float, ...]:
        return tuple(v.constant for v in self.data)


def relabeled(verdicts: ty.Iterable[EmbeddingVerdict], criterion: Criterion, note: str = None) -> VerdictList:
    extra = () if note is None else (note,)
    return VerdictList(dc.replace(v, criterion=criterion, notes=v.notes + extra) for v in verdicts)


@dc.dataclass(frozen=True)
class GridSup:
    """Largest value over a finite grid, where it was attained, and the per-point rows"""
    constant: float
    witness: ty.Any
    rows: ty.Tuple[ty.Tuple, ...] = dc.field(default=(), compare=False)

    def __iter__(self):
        return iter((self.constant, self.witness))


def _grid_sup(rows: ty.Iterable[ty.Tuple]) -> GridSup:
    """rows are (point, ..., value); the last entry is maximized"""
    best = 0.0
    witness = None
    kept = []
    for row in rows:
        kept.append(row)
        if row[-1] > best:
            best, witness = row[-1], row[0]
    return GridSup(float(best), witness, tuple(kept))


##########
# Grids
def lambda_grid(level: int = 0, real_only: bool = False) -> np.ndarray:
    """Test points: geometric real parts times linear imaginary parts; each level doubles both densities"""
    conf = settings.CARLESON_LAB
    re_min, re_max, re_points = conf['LAMBDA_RE']
    span, im_points = conf['LAMBDA_IM']
    factor = 2 ** level
    re = ms.geometric_grid(re_min, re_max, (re_points - 1) * factor + 1)
    if real_only:
        return re.astype(complex)
    im = np.linspace(-span, span, (im_points - 1) * factor + 1)
    return (re[:, None] + 1j * im[None, :]).ravel()


def square_grid(mu: ms.HalfPlaneMeasure, level: int = 0, symmetric_only: bool = False) -> ms.SquareFamily:
    ratio = settings.CARLESON_LAB['SIDE_RATIO'] ** (0.5 ** level)
    return ms.square_family(mu, ratio=ratio, symmetric_only=symmetric_only)


def index_window(window: ty.Tuple[int, int] = None) -> ty.Tuple[int, int]:
    lo, hi = settings.CARLESON_LAB['INDEX_WINDOW'] if window is None else window
    if lo > hi:
        raise EmptyWindow(f'Index window ({lo}, {hi}) is empty')
    return int(lo), int(hi)


def _descriptor(family: ms.SquareFamily = None, points: ty.Sized = None, level: int = 0, **extra) -> dict:
    grid = {'level': level}
    if family is not None:
        grid.update(family.descriptor)
    if points is not None:
        grid['test_points'] = len(points)
    grid.update(extra)
    return grid


##########
# Integrals of kernel powers
def _is_full_line(y: ms.YProfile) -> bool:
    return y.kind == 'uniform' and y.lo == -math.inf and y.hi == math.inf


def pole_integral(mu: ms.HalfPlaneMeasure, lam: complex, power: float) -> float:
    """
    integral of |z + conj(lam)|^(-power) d mu(z). Products with a full vertical line are integrated line by line in
        closed form.
    """
    lam = complex(lam)
    shift = lam.conjugate()
    total = 0.0
    if mu.atoms:
        z = np.array([a[0] for a in mu.atoms], dtype=complex)
        m = np.array([a[1] for a in mu.atoms], dtype=float)
        total += float(np.dot(m, np.abs(z + shift) ** -power))
    for component in mu.products:
        if component.factor is None and _is_full_line(component.y):
            total += component.y.density * component.x.integrate(
                lambda r: tf.pole_line_integral(1.0, r + lam.real, power)
            )
        else:
            total += component.integrate(lambda w: abs(w + shift) ** -power, center=lam.imag)
    for component in mu.planar:
        total += component.integrate(lambda w: np.abs(w + shift) ** -power)
    return total


def zen_pole_integral(nu: ms.RadialMeasure, lam: complex, power: float) -> float:
    """The same integral against nu = nu~ (x) Lebesgue"""
    a = complex(lam).real
    return nu.integrate(lambda r: tf.pole_line_integral(1.0, r + a, power))


def _embedded_norm(mu: ms.HalfPlaneMeasure, f, q: float) -> float:
    """||L f||_{L^q(mu)}; kernel-type test functions skip the generic quadrature"""
    if isinstance(f, tf.Exponential):
        return pole_integral(mu, f.lam.conjugate(), q) ** (1 / q)
    if isinstance(f, tf.MonomialExponential):
        return math.factorial(f.N - 1) * pole_integral(mu, f.lam.conjugate(), f.N * q) ** (1 / q)
    if isinstance(f, tf.NormalizedKernel):
        return f.weight * pole_integral(mu, f.lam, q) ** (1 / q)
    return f.embedded_norm(mu, q)


##########
# Test ratios
def kernel_test_constant(mu: ms.HalfPlaneMeasure, lambdas: ty.Sequence[complex] = None) -> GridSup:
    """sup over lambda of integral of |k_lambda|^2 d mu / ||k_lambda||^2; rows are (lambda, ratio)"""
    lambdas = lambda_grid() if lambdas is None else lambdas
    # |k_lambda|^2 / ||k_lambda||^2 = Re(lambda) / (pi |z + conj(lambda)|^2)
    return _grid_sup((complex(lam), complex(lam).real * pole_integral(mu, lam, 2) / math.pi) for lam in lambdas)


def hardy_kernel_lower_bound(mu: ms.HalfPlaneMeasure, p: float, lambdas: ty.Sequence[complex] = None) -> GridSup:
    """
    sup over lambda of ||F||_{L^p(mu)} / ||F||_{H^p} for F = (z + lambda)^(-N), with N = 1 for p > 1 and N = 2 for
        p = 1 (the first power that lies in the Hardy space)
    """
    lambdas = lambda_grid() if lambdas is None else lambdas
    N = 1 if p > 1 else 2

    def rows():
        for lam in lambdas:
            lam = complex(lam)
            top = pole_integral(mu, lam.conjugate(), N * p)
            bottom = tf.pole_line_integral(1.0, lam.real, N * p)
            yield lam, (top / bottom) ** (1 / p)

    return _grid_sup(rows())


def exponential_test_ratio(mu: ms.HalfPlaneMeasure, z: complex, pq: tf.ExponentPair) -> float:
    """||L e^(-z .)||_{L^q(mu)} / ||e^(-z .)||_{L^p}, with L e^(-z .)(w) = 1 / (w + z)"""
    f = tf.Exponential(z)
    return _embedded_norm(mu, f, pq.q) / f.lp_norm(pq.p)


def exponential_test_constant(mu: ms.HalfPlaneMeasure, pq: tf.ExponentPair, zs: ty.Sequence[complex]) -> GridSup:
    return _grid_sup((complex(z), exponential_test_ratio(mu, z, pq)) for z in zs)


def dyadic_exponential_sequence(
        mu: ms.HalfPlaneMeasure,
        pq: tf.ExponentPair,
        window: ty.Tuple[int, int] = None,
) -> ty.Dict[int, float]:
    """The exponential test ratio at z = 2^n for n in the window"""
    lo, hi = index_window(window)
    return {n: exponential_test_ratio(mu, 2.0 ** n, pq) for n in range(lo, hi + 1)}


def exponential_family(zs: ty.Iterable[complex], monomials: bool = False) -> ty.List[tf.TestFunction]:
    """e^(-z t) for every z, plus t e^(-x t) for every distinct real part x when monomials is set"""
    family: ty.List[tf.TestFunction] = [tf.Exponential(z) for z in zs]
    if monomials:
        family.extend(tf.MonomialExponential(2, x) for x in sorted({complex(z).real for z in zs}))
    return family


def embedding_norm_lower_bound(mu: ms.HalfPlaneMeasure, pq: tf.ExponentPair, family: ty.Iterable) -> GridSup:
    """
    max over the family of ||L f||_{L^q(mu)} / ||f||_p. Each ratio is attained by an actual function, so the
        result is a certified lower bound for the norm of the embedding. Rows are (description, ratio).
    """
    family = list(family)
    if not family:
        raise EmptyFamily('Test-function family is empty')
    rows = []
    for f in family:
        norm = f.lp_norm(pq.p)
        if not (norm > 0 and math.isfinite(norm)):
            raise DivergentNorm(f'Test function {f.describe()} has L^{pq.p} norm {norm}')
        rows.append((f.describe(), _embedded_norm(mu, f, pq.q) / norm))
    return _grid_sup(rows)


##########
# Kernel powers for Zen spaces
def select_kernel_power(R: float, p: float) -> int:
    """Smallest N with 2^(Np) >= 4R, so the kernel-power series below has ratio at most 1/2"""
    if R < 1 or p < 1:
        raise ValueError(f'Kernel power selection needs R >= 1 and p >= 1 (got R={R}, p={p})')
    N = max(1, math.ceil(math.log2(4 * R) / p))
    while N > 1 and 2.0 ** ((N - 1) * p) >= 4 * R:
        N -= 1
    while 2.0 ** (N * p) < 4 * R:
        N += 1
    return N


def kernel_power_series_constant(R: float, N: int, p: float) -> float:
    """sum over k >= 0 of 2^k R^k / 2^((k-1)Np); infinite unless 2^(Np) > 2R"""
    base = 2.0 ** (N * p)
    ratio = 2 * R / base
    if ratio >= 1:
        return math.inf
    return base / (1 - ratio)


def kernel_power_constant(
        mu: ms.HalfPlaneMeasure,
        nu: ms.RadialMeasure,
        N: int,
        p: float,
        lambdas: ty.Sequence[complex] = None,
) -> GridSup:
    """sup over lambda of the integral of |k_lambda^N|^p against mu over the same against nu"""
    lambdas = lambda_grid() if lambdas is None else lambdas
    power = N * p

    def rows():
        for lam in lambdas:
            top = pole_integral(mu, lam, power)
            bottom = zen_pole_integral(nu, lam, power)
            yield complex(lam), top, bottom, top / bottom

    return _grid_sup(rows())


##########
# Criteria
def check_classical_carleson(
        mu: ms.HalfPlaneMeasure,
        p: float = 2.0,
        family: ms.SquareFamily = None,
        lambdas: ty.Sequence[complex] = None,
        level: int = 0,
        cap: float = None,
) -> VerdictList:
    """Embedding lower bound (1), kernel test (2) and square condition (3) for H^p -> L^p(mu)"""
    family = square_grid(mu, level) if family is None else family
    lambdas = lambda_grid(level) if lambdas is None else lambdas
    grid = _descriptor(family, lambdas, level)

    lower = hardy_kernel_lower_bound(mu, p, lambdas)
    kernel = kernel_test_constant(mu, lambdas)
    square = ms.carleson_ratio_sup(mu, ms.power_gauge(1.0), family)
    return VerdictList([
        make_verdict(Criterion.classical, '1', lower.constant, lower.witness, ScalingKind.norm, cap, grid=grid,
                     notes=('lower bound for the norm of H^p -> L^p(mu)',)),
        make_verdict(Criterion.classical, '2', kernel.constant, kernel.witness, ScalingKind.mass, cap, grid=grid),
        make_verdict(Criterion.classical, '3', square.constant, square.witness, ScalingKind.mass, cap, grid=grid),
    ])


def check_zen_embedding(
        mu: ms.HalfPlaneMeasure,
        nu: ms.RadialMeasure,
        p: float = 2.0,
        N: int = None,
        family: ms.SquareFamily = None,
        lambdas: ty.Sequence[complex] = None,
        level: int = 0,
        cap: float = None,
) -> VerdictList:
    """Kernel-power condition (2) and square condition (3) of mu against the Zen measure nu~ (x) Lebesgue"""
    try:
        info = ms.doubling_constant(nu)
    except ZeroMassNearOrigin as e:
        raise NotDoubling(str(e))
    if info.exceeds_cap:
        raise NotDoubling(f'Doubling ratio {info.R:.6g} at t={info.sup_location:.6g} exceeds the cap')

    threshold = select_kernel_power(info.R, p)
    notes = []
    if N is None:
        N = threshold
    elif N < threshold:
        logger.warning(f'Kernel power N={N} is below {threshold}, the power that makes the series converge')
        notes.append(f'N={N} is below the convergent power {threshold}')
    notes.append(f'R={info.R!r} N={N} series={kernel_power_series_constant(info.R, N, p)!r}')

    family = square_grid(mu, level) if family is None else family
    lambdas = lambda_grid(level) if lambdas is None else lambdas
    grid = _descriptor(family, lambdas, level, N=N)

    kernel = kernel_power_constant(mu, nu, N, p, lambdas)
    square = ms.carleson_ratio_sup(mu, ms.measure_gauge(nu), family)
    return VerdictList([
        make_verdict(Criterion.zen, '2', kernel.constant, kernel.witness, ScalingKind.mass, cap, notes, grid),
        make_verdict(Criterion.zen, '3', square.constant, square.witness, ScalingKind.mass, cap, notes, grid),
    ])


def power_gauge_exponent(pq: tf.ExponentPair) -> float:
    """q / p', which is 0 when p = 1"""
    return pq.q / pq.p_prime


def check_necessary_power_bound(
        mu: ms.HalfPlaneMeasure,
        pq: tf.ExponentPair,
        family: ms.SquareFamily = None,
        level: int = 0,
        cap: float = None,
) -> EmbeddingVerdict:
    """sup of mu(Q_I) / |I|^(q/p'), the square condition every bounded L^p -> L^q(mu) embedding satisfies"""
    family = square_grid(mu, level) if family is None else family
    exponent = power_gauge_exponent(pq)
    found = ms.carleson_ratio_sup(mu, ms.power_gauge(exponent), family)
    return make_verdict(Criterion.power_bound, '2', found.constant, found.witness, ScalingKind.mass, cap,
                        grid=_descriptor(family, level=level, gauge_exponent=exponent))


def check_pprime_le_q(
        mu: ms.HalfPlaneMeasure,
        pq: tf.ExponentPair,
        family: ms.SquareFamily = None,
        lambdas: ty.Sequence[complex] = None,
        level: int = 0,
        cap: float = None,
) -> VerdictList:
    """Embedding lower bound (1), power bound (2) and exponential test (3) for p <= 2, p' <= q"""
    if pq.p > 2 or not pq.p_prime <= pq.q:
        raise ExponentWindow(f"Needs p <= 2 and p' <= q (got p={pq.p}, q={pq.q})")
    zs = lambda_grid(level) if lambdas is None else lambdas
    grid = _descriptor(points=zs, level=level)

    lower = embedding_norm_lower_bound(mu, pq, exponential_family(zs, monomials=True))
    power = check_necessary_power_bound(mu, pq, family, level, cap)
    test = exponential_test_constant(mu, pq, zs)
    return VerdictList([
        make_verdict(Criterion.pprime_le_q, '1', lower.constant, lower.witness, ScalingKind.norm, cap, grid=grid),
        dc.replace(power, criterion=Criterion.pprime_le_q),
        make_verdict(Criterion.pprime_le_q, '3', test.constant, test.witness, ScalingKind.norm, cap, grid=grid),
    ])


def check_sectorial_qgep(
        mu: ms.HalfPlaneMeasure,
        pq: tf.ExponentPair,
        sector: balayage.SectorSpec = None,
        family: ms.SquareFamily = None,
        lambdas: ty.Sequence[complex] = None,
        window: ty.Tuple[int, int] = None,
        level: int = 0,
        cap: float = None,
) -> VerdictList:
    """
    Sectorial measures with q >= p > 1: embedding lower bound (1), the power bound on squares symmetric about 0 (2),
        the exponential test over real z (3) and over z = 2^n (4)
    """
    if not pq.q >= pq.p > 1:
        raise ExponentWindow(f'Needs q >= p > 1 (got p={pq.p}, q={pq.q})')
    balayage.check_sectorial(mu, sector, limit=math.pi / 2)

    family = square_grid(mu, level, symmetric_only=True) if family is None else family
    zs = lambda_grid(level, real_only=True) if lambdas is None else lambdas
    sequence = dyadic_exponential_sequence(mu, pq, window)
    grid = _descriptor(family, zs, level, window=list(index_window(window)))

    dyadic_zs = [2.0 ** n for n in sequence]
    lower = embedding_norm_lower_bound(mu, pq, exponential_family(list(zs) + dyadic_zs, monomials=True))
    exponent = power_gauge_exponent(pq)
    square = ms.carleson_ratio_sup(mu, ms.power_gauge(exponent), family)
    test = exponential_test_constant(mu, pq, zs)
    dyadic = _grid_sup(sequence.items())
    return VerdictList([
        make_verdict(Criterion.sectorial_qgep, '1', lower.constant, lower.witness, ScalingKind.norm, cap, grid=grid),
        make_verdict(Criterion.sectorial_qgep, '2', square.constant, square.witness, ScalingKind.mass, cap,
                     grid=grid),
        make_verdict(Criterion.sectorial_qgep, '3', test.constant, test.witness, ScalingKind.norm, cap, grid=grid),
        make_verdict(Criterion.sectorial_qgep, '4', dyadic.constant, dyadic.witness, ScalingKind.norm, cap,
                     grid=grid),
    ])


##########
# Sequence conditions for q < p
@dc.dataclass(frozen=True)
class SequenceCondition:
    """A sequence over an index window and its l^s norm (infinite when the sequence has a divergent entry)"""
    indices: ty.Tuple[int, ...]
    values: ty.Tuple[float, ...]
    exponent: float
    norm: float
    divergent: bool = False
    tail_mass: float = 0.0

    @property
    def witness(self) -> ty.Optional[int]:
        if not self.values or max(self.values) <= 0:
            return None
        return self.indices[int(np.argmax(self.values))]

    def rows(self) -> ty.List[ty.Tuple[int, float]]:
        return list(zip(self.indices, self.values))


def sequence_condition(
        indices: ty.Sequence[int],
        values: ty.Sequence[float],
        exponent: float,
        tail_mass: float = 0.0,
) -> SequenceCondition:
    array = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(array)):
        norm, divergent = math.inf, True
    elif exponent == math.inf:
        norm, divergent = float(array.max(initial=0.0)), False
    else:
        norm, divergent = float(np.sum(array ** exponent) ** (1 / exponent)), False
    return SequenceCondition(tuple(int(n) for n in indices), tuple(float(v) for v in array), exponent, norm,
                             divergent, tail_mass)


def _tail_mass(mu: ms.HalfPlaneMeasure, inside: float) -> float:
    total = mu.total_mass()
    if not math.isfinite(total):
        return math.inf
    return max(total - inside, 0.0)


def slab_sequence(mu: ms.HalfPlaneMeasure, pq: tf.ExponentPair, window: ty.Tuple[int, int] = None):
    """(2^(-n q/p') mu(S_n)) in l^(p/(p-q))"""
    lo, hi = index_window(window)
    masses = balayage.slab_masses(mu, (lo, hi))
    exponent = power_gauge_exponent(pq)
    ns = range(lo, hi + 1)
    values = [2.0 ** (-n * exponent) * m for n, m in zip(ns, masses)]
    return sequence_condition(ns, values, pq.p / (pq.p - pq.q), _tail_mass(mu, float(np.sum(masses))))


def kernel_sequence(mu: ms.HalfPlaneMeasure, pq: tf.ExponentPair, window: ty.Tuple[int, int] = None):
    """(2^(n/p) ||L e^(-2^n .)||_{L^q(mu)}) in l^(qp/(p-q))"""
    lo, hi = index_window(window)
    ns = range(lo, hi + 1)
    values = [2.0 ** (n / pq.p) * pole_integral(mu, 2.0 ** n, pq.q) ** (1 / pq.q) for n in ns]
    return sequence_condition(ns, values, pq.q * pq.p / (pq.p - pq.q))


def _balayage_exponents(pq: tf.ExponentPair) -> ty.Tuple[float, float]:
    """(a, s) in the condition t^a S_mu in L^s, with a = q(2 - p)/p and s = p/(p - q)"""
    return pq.q * (2 - pq.p) / pq.p, pq.p / (pq.p - pq.q)


def principal_layer_norm(mu: ms.HalfPlaneMeasure, pq: tf.ExponentPair, n_range: ty.Tuple[int, int]) -> float:
    """
    ||t^a S^d_{mu,0}||_{L^s}, computed exactly: the principal layer equals mu(T_n) / 2^n on
        2^(n-2) < |t| <= 2^(n-1)
    """
    a, s = _balayage_exponents(pq)
    e = a * s
    masses = balayage.sector_masses(mu, n_range)
    total = 0.0
    for n, m in zip(range(n_range[0], n_range[1] + 1), masses):
        if m == 0:
            continue
        lo, hi = 2.0 ** (n - 2), 2.0 ** (n - 1)
        width = math.log(2.0) if e == -1 else (hi ** (e + 1) - lo ** (e + 1)) / (e + 1)
        total += 2 * (m / 2.0 ** n) ** s * width
    return total ** (1 / s)


def balayage_condition_integral(mu: ms.HalfPlaneMeasure, pq: tf.ExponentPair, pivot: float = 1.0) -> float:
    """||t^a S_mu||_{L^s} by quadrature over both half lines; inf when the integral diverges"""
    a, s = _balayage_exponents(pq)

    def right(t):
        return (t ** a * balayage.balayage_eval(mu, t)) ** s

    def left(t):
        return (t ** a * balayage.balayage_eval(mu, -t)) ** s

    try:
        total = quadrature.integrate_halfline(right, pivot) + quadrature.integrate_halfline(left, pivot)
    except (DivergentNorm, QuadratureFailure) as e:
        logger.warning(f'Balayage condition integral diverges: {e}')
        return math.inf
    return total ** (1 / s)


def check_sectorial_plq(
        mu: ms.HalfPlaneMeasure,
        pq: tf.ExponentPair,
        sector: balayage.SectorSpec = None,
        window: ty.Tuple[int, int] = None,
        balayage_form: bool = None,
        cap: float = None,
) -> VerdictList:
    """
    Sectorial measures with 1 <= q < p: the slab sequence (2), the kernel sequence (3) and, when p' < q, the
        balayage condition (4).

    Condition (4) is evaluated on the principal dyadic layer S^d_{mu,0}, whose norm is comparable to the slab
        sequence term by term. The sweep form t^a S_mu is computed too and reported in the notes: for p > 2 the
        weight t^a is not integrable at 0, so that form diverges for every nonzero measure.
    """
    if not 1 <= pq.q < pq.p:
        raise ExponentWindow(f'Needs 1 <= q < p (got p={pq.p}, q={pq.q})')
    balayage.check_sectorial(mu, sector, limit=math.pi / 2)
    lo, hi = index_window(window)
    grid = {'window': [lo, hi]}

    slabs = slab_sequence(mu, pq, (lo, hi))
    kernels = kernel_sequence(mu, pq, (lo, hi))
    notes = []
    if slabs.tail_mass > 0:
        logger.warning(f'Mass {slabs.tail_mass:.6g} lies outside the slabs of the window ({lo}, {hi})')
        notes.append(f'mass outside the window: {slabs.tail_mass!r}')

    verdicts = VerdictList([
        make_verdict(Criterion.sectorial_plq, '2', slabs.norm, slabs.witness, ScalingKind.mass, cap, notes,
                     dict(grid, exponent=slabs.exponent)),
        make_verdict(Criterion.sectorial_plq, '3', kernels.norm, kernels.witness, ScalingKind.norm, cap, notes,
                     dict(grid, exponent=kernels.exponent)),
    ])

    applicable = pq.p_prime < pq.q
    if balayage_form and not applicable:
        raise BalayageNotApplicable(f"p'={pq.p_prime:.6g} >= q={pq.q}: the sweep may be infinite")
    if balayage_form is False or not applicable:
        verdicts.append(not_applicable(Criterion.sectorial_plq, '4', "balayage condition needs p' < q"))
        return verdicts

    try:
        n_range = balayage.cell_range(mu)
    except ValueError:
        n_range = (lo, hi)
    layer = principal_layer_norm(mu, pq, n_range) if not mu.is_zero() else 0.0
    x_min = mu.support_box()[0]
    printed = balayage_condition_integral(mu, pq, pivot=x_min if 0 < x_min < math.inf else 1.0)
    layer_notes = [f'sweep form: {printed!r}' if math.isfinite(printed) else 'sweep form diverges']
    witness = slabs.witness if layer > 0 else None
    verdicts.append(make_verdict(Criterion.sectorial_plq, '4', layer, witness, ScalingKind.mass, cap, layer_notes,
                                 dict(grid, n_range=list(n_range))))
    return verdicts


##########
# Lacunary kernels
@dc.dataclass(frozen=True)
class LacunaryReport:
    """ratio is None when every coefficient vanishes"""
    ratio: ty.Optional[float]
    norm: float
    coefficient_norm: float
    gram_min: ty.Optional[float] = None
    gram_max: ty.Optional[float] = None


def gurarii_macaev_ratio(
        alpha: ty.Union[ty.Sequence[float], ty.Mapping[int, float]],
        p: float = 2.0,
        window: ty.Tuple[int, int] = None,
) -> LacunaryReport:
    """
    ||sum over n of alpha_n k~_(2^n)||_p / ||alpha||_p, where k~_lambda = lambda^(1/p) e^(-lambda t). A sequence
        of coefficients is laid over the index window; a mapping gives indices explicitly. For p = 2 the Gram
        matrix is exact and its extreme eigenvalues bound the squared ratio.
    """
    if isinstance(alpha, collections.abc.Mapping):
        coefficients = {int(n): float(a) for n, a in alpha.items()}
    else:
        lo, hi = index_window(window)
        alpha = [float(a) for a in alpha]
        if len(alpha) != hi - lo + 1:
            raise ValueError(f'{len(alpha)} coefficients for the window ({lo}, {hi})')
        coefficients = dict(zip(range(lo, hi + 1), alpha))

    combination = tf.LacunaryCombination(coefficients, p)
    values = np.abs(np.array(list(coefficients.values()), dtype=float))
    coefficient_norm = float(np.sum(values ** p) ** (1 / p))
    gram_min = gram_max = None
    if p == 2 and coefficients:
        eigenvalues = np.linalg.eigvalsh(combination.gram())
        gram_min, gram_max = float(eigenvalues[0]), float(eigenvalues[-1])

    if coefficient_norm == 0:
        logger.warning('All coefficients vanish; the norm ratio is undefined')
        return LacunaryReport(None, 0.0, 0.0, gram_min, gram_max)
    norm = combination.lp_norm(p)
    return LacunaryReport(norm / coefficient_norm, norm, coefficient_norm, gram_min, gram_max)


##########
# The counterexample dx / sqrt(x) on [1, inf)
_SQRT_HALF = math.sqrt(0.5)
# Beyond u = 50 the correction term below is smaller than e^-75
_CORRECTION_CUTOFF = 50.0


def counterexample_measure(coeff: float = 1.0) -> ms.HalfPlaneMeasure:
    """coeff dx / sqrt(x) on [1, inf) along the positive real axis"""
    nu = ms.RadialMeasure(pieces=(ms.PowerPiece(1.0, math.inf, coeff, -0.5),))
    return ms.HalfPlaneMeasure.product(nu, ms.YProfile.point(0.0))


def _counterexample_scale(mu: ms.HalfPlaneMeasure) -> float:
    """c when mu = c dx / sqrt(x) on [1, inf) along the axis"""
    unsupported = UnsupportedMeasure('Only multiples of dx / sqrt(x) on [1, inf) along the axis are supported')
    if mu.atoms or mu.planar or len(mu.products) != 1:
        raise unsupported
    component = mu.products[0]
    x, y = component.x, component.y
    if component.factor is not None or y.kind != 'point' or y.lo != 0 or x.atoms or x.atom_at_zero:
        raise unsupported
    if len(x.pieces) != 1 or not isinstance(x.pieces[0], ms.PowerPiece):
        raise unsupported
    piece = x.pieces[0]
    if (piece.lo, piece.hi, piece.alpha) != (1.0, math.inf, -0.5):
        raise unsupported
    return piece.coeff * y.density


def _head_sweep(e: float) -> float:
    """(1/pi) integral over (0, e) of s^(1/2) / (1 + s^2) ds"""
    return 2 / (3 * math.pi) * e ** 1.5 * float(special.hyp2f1(1.0, 0.75, 1.75, -e * e))


def log_sweep(u: float) -> float:
    """e^(u/2) S(e^u) for the sweep S of dx / sqrt(x) on [1, inf); tends to 2^(-1/2)"""
    return _SQRT_HALF - _head_sweep(math.exp(-u))


class PhiApproximant:
    """
    Boundary datum phi_T = phi on [-T, T], with phi = 1 on [-1, 1] and |t|^(-1/2) / (1 + log|t|) beyond. It is the
        real part on the boundary of F = L f in the Hardy space, and ||f||_2 = ||phi_T||_2 / sqrt(pi).

    T is given through log T, so that truncations far beyond the float range stay usable. The embedded mass uses
        integral |F| d mu >= integral Re F d mu = integral phi_T S_mu, so it is a lower bound.
    """
    kind = 'phi'

    def __init__(self, log_T: float):
        if not log_T >= 0:
            raise ValueError(f'log T must be nonnegative (got {log_T})')
        self.log_T = float(log_T)

    def __call__(self, t):
        t = np.abs(np.asarray(t, dtype=float))
        logs = np.log(np.maximum(t, 1.0))
        values = np.where(t <= 1, 1.0, 1 / (np.sqrt(np.maximum(t, 1.0)) * (1 + logs)))
        return np.where(logs <= self.log_T, values, 0.0)

    def boundary_norm_sq(self) -> float:
        return 2 * (2 - 1 / (1 + self.log_T))

    def lp_norm(self, p: float) -> float:
        if p != 2:
            raise ValueError('The approximants are only normed in L^2')
        return math.sqrt(self.boundary_norm_sq() / math.pi)

    def boundary_mass(self) -> float:
        """integral of phi_T S_mu for mu = dx / sqrt(x) on [1, inf), in logarithmic coordinates t = e^u"""
        near = quadrature.integrate_to_infinity(lambda x: x ** -0.5 * math.atan(1 / x), 1.0) / math.pi
        cut = min(self.log_T, _CORRECTION_CUTOFF)
        correction = quadrature.integrate(lambda u: _head_sweep(math.exp(-u)) / (1 + u), 0.0, cut) if cut else 0.0
        far = _SQRT_HALF * math.log1p(self.log_T) - correction
        return 2 * (near + far)

    def embedded_norm(self, mu: ms.HalfPlaneMeasure, q: float) -> float:
        if q != 1:
            raise ValueError('The approximants test embeddings into L^1 only')
        return _counterexample_scale(mu) * self.boundary_mass()

    def describe(self) -> str:
        return f'phi:{self.log_T!r}'


def cone_integral(t: float, nu: ms.RadialMeasure = None) -> float:
    """integral over [t, inf) of x^(-1) d nu~(x), by quadrature"""
    nu = counterexample_measure().products[0].x if nu is None else nu
    return nu.integrate(lambda x: 1 / x, lo=t)


@dc.dataclass(frozen=True)
class CounterexampleReport:
    square_constant: float
    square_rows: ty.Tuple[ty.Tuple[float, float, float], ...]
    cone_rows: ty.Tuple[ty.Tuple[float, float, float], ...]
    divergence_rows: ty.Tuple[ty.Tuple[float, float, float], ...]
    lower_bound: GridSup
    verdicts: VerdictList = dc.field(compare=False)

    @property
    def square_bound_holds(self) -> bool:
        return self.square_constant <= 2 and all(mass <= bound for _, mass, bound in self.square_rows)

    @property
    def coexistence(self) -> bool:
        """The square bound holds while the embedding lower bound exceeds 10"""
        return self.square_bound_holds and self.lower_bound.constant > 10


def counterexample_suite(
        heights: ty.Sequence[float] = (1.0, 4.0, 16.0, 100.0, 1e4),
        cone_points: ty.Sequence[float] = (1.0, 4.0, 16.0, 100.0),
        log_ts: ty.Sequence[float] = (1.0, 9.0, 100.0, 1e4),
        family: ms.SquareFamily = None,
) -> CounterexampleReport:
    """
    For mu = dx / sqrt(x) on [1, inf): mu(Q) <= 2 h^(1/2) on squares of side h, the cone integral equals
        2 t^(-1/2) (so it is not square integrable), the partial integrals of phi(t) t^(-1/2) grow like
        log(1 + log T), and the L^2 -> L^1(mu) embedding has lower bounds beyond 10.
    """
    mu = counterexample_measure()
    nu = mu.products[0].x
    family = ms.square_family(mu) if family is None else family

    square = ms.carleson_ratio_sup(mu, ms.power_gauge(0.5), family)
    square_rows = tuple((h, mu.square_mass(ms.CarlesonSquare(0.0, h)), 2 * math.sqrt(h)) for h in heights)
    cone_rows = tuple((t, cone_integral(t, nu), 2 / math.sqrt(max(t, 1.0))) for t in cone_points)
    divergence_rows = tuple(
        (L, math.log1p(L), quadrature.integrate(lambda u: 1 / (1 + u), 0.0, L) if L else 0.0) for L in log_ts
    )
    lower = embedding_norm_lower_bound(mu, tf.ExponentPair(2.0, 1.0), [PhiApproximant(L) for L in log_ts])

    verdicts = VerdictList([
        make_verdict(Criterion.power_bound, '2', square.constant, square.witness, ScalingKind.mass, cap=2.0,
                     grid=_descriptor(family, gauge_exponent=0.5), notes=('mu(Q) <= 2 h^(1/2)',)),
        make_verdict(Criterion.lower_bound, '1', lower.constant, lower.witness, ScalingKind.norm, cap=math.inf,
                     notes=('grows like log(1 + log T): the square condition alone does not bound the embedding',)),
    ])
    return CounterexampleReport(square.constant, square_rows, cone_rows, divergence_rows, lower, verdicts)


##########
# Strips and Sobolev measures
def strip_grid(strip: balayage.StripSpec, level: int = 0) -> np.ndarray:
    """Test points with real parts inside the strip"""
    conf = settings.CARLESON_LAB
    _, _, re_points = conf['LAMBDA_RE']
    span, im_points = conf['LAMBDA_IM']
    factor = 2 ** level
    if strip.alpha1 == strip.alpha2:
        re = np.array([strip.alpha1])
    else:
        re = ms.geometric_grid(strip.alpha1, strip.alpha2, (re_points - 1) * factor + 1)
    im = np.linspace(-span, span, (im_points - 1) * factor + 1)
    return (re[:, None] + 1j * im[None, :]).ravel()


def check_strip(
        mu: ms.HalfPlaneMeasure,
        pq: tf.ExponentPair,
        strip: balayage.StripSpec,
        family: ms.SquareFamily = None,
        level: int = 0,
        cap: float = None,
) -> VerdictList:
    """
    Measures in a strip with p' <= q and q >= 2: embedding lower bound (1), power bound (2) and the exponential test
        for z in the strip (3). The lower bound carries the predicted bound C^(1/q) (a2/a1)^(1/2 - 1/p) as its
        reference, where C is the constant of (2).
    """
    balayage.check_strip(mu, strip)
    if not (pq.p_prime <= pq.q and pq.q >= 2):
        raise ExponentWindow(f"Needs p' <= q and q >= 2 (got p={pq.p}, q={pq.q})")
    zs = strip_grid(strip, level)
    grid = _descriptor(points=zs, level=level, strip=[strip.alpha1, strip.alpha2])

    power = check_necessary_power_bound(mu, pq, family, level, cap)
    test = exponential_test_constant(mu, pq, zs)
    family_zs = list(zs) + list(lambda_grid(level))
    lower = embedding_norm_lower_bound(mu, pq, exponential_family(family_zs, monomials=True))
    predicted = power.constant ** (1 / pq.q) * (strip.alpha2 / strip.alpha1) ** (0.5 - 1 / pq.p)
    return VerdictList([
        make_verdict(Criterion.strip, '1', lower.constant, lower.witness, ScalingKind.norm, cap, grid=grid,
                     reference=predicted, notes=(f'predicted bound {predicted!r}',)),
        dc.replace(power, criterion=Criterion.strip),
        make_verdict(Criterion.strip, '3', test.constant, test.witness, ScalingKind.norm, cap, grid=grid),
    ])


def sobolev_measure(mu: ms.HalfPlaneMeasure, beta: float, q: float, mode: SobolevMode) -> ms.HalfPlaneMeasure:
    """|1 + z|^(-2 beta) d mu in L^2 mode, (1 + |z|^(-q beta)) d mu in sectorial mode"""
    if mode == SobolevMode.l2:
        return mu.reweighted(lambda z: np.abs(1 + z) ** (-2 * beta))
    return mu.reweighted(lambda z: 1 + np.abs(z) ** (-q * beta))


def check_sobolev(
        mu: ms.HalfPlaneMeasure,
        beta: float,
        pq: tf.ExponentPair,
        mode: SobolevMode,
        sector: balayage.SectorSpec = None,
        level: int = 0,
        cap: float = None,
) -> VerdictList:
    """Reweight mu for the Sobolev space of order beta and run the matching criterion on the result"""
    note = f'{mode.name} mode, beta={beta!r}'
    if mode == SobolevMode.l2:
        if not pq.p == pq.q == 2:
            raise ExponentWindow(f'L^2 mode needs p = q = 2 (got p={pq.p}, q={pq.q})')
        verdicts = check_classical_carleson(sobolev_measure(mu, beta, pq.q, mode), 2.0, level=level, cap=cap)
        return relabeled(verdicts, Criterion.sobolev, note)

    transformed = sobolev_measure(mu, beta, pq.q, mode)
    if pq.q >= pq.p:
        verdicts = check_sectorial_qgep(transformed, pq, sector, level=level, cap=cap)
    else:
        verdicts = check_sectorial_plq(transformed, pq, sector, cap=cap)
    return relabeled(verdicts, Criterion.sobolev, note)


##########
# Grid refinement
@dc.dataclass(frozen=True)
class Refinement:
    verdicts: VerdictList
    level: int
    history: ty.Tuple[ty.Tuple[float, ...], ...]
    stable: bool


def _movement(before: ty.Sequence[float], after: ty.Sequence[float]) -> float:
    worst = 0.0
    for a, b in zip(before, after):
        if a == b:
            continue
        if not (math.isfinite(a) and math.isfinite(b)):
            return math.inf
        worst = max(worst, abs(b - a) / max(abs(a), abs(b)))
    return worst


def refine_until_stable(
        run: ty.Callable[[int], VerdictList],
        tolerance: float = None,
        max_rounds: int = None,
) -> Refinement:
    """Re-run a check at doubled grid densities until no constant moves by more than the tolerance"""
    conf = settings.CARLESON_LAB
    tolerance = conf['REFINE_TOLERANCE'] if tolerance is None else tolerance
    max_rounds = conf['REFINE_MAX_ROUNDS'] if max_rounds is None else max_rounds

    previous = run(0)
    history = [previous.constants()]
    for level in range(1, max_rounds + 1):
        current = run(level)
        history.append(current.constants())
        if _movement(previous.constants(), current.constants()) < tolerance:
            return Refinement(current, level, tuple(history), True)
        previous = current
    logger.warning(f'Constants still moved by more than {tolerance} after {max_rounds} refinements')
    return Refinement(previous, max_rounds, tuple(history), False)
