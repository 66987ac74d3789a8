"""
Little Hankel operators on Zen spaces, through the measure their symbol induces.

The symbol b is kept in a small algebra of analytic descriptors so that b' is exact. Boundedness is certified on
    the measure side only: |b'(z)|^2 Re z F(Re z) dA(z) must be a nu-Carleson measure.
"""
import abc
import dataclasses as dc
import logging
import math
import typing as ty

import numpy as np
from django.conf import settings

from carleson_lab.analysis import quadrature
from carleson_lab.analysis import measure as ms
from carleson_lab.analysis import transforms as tf
from carleson_lab.analysis.embed import EmbeddingVerdict, GridSup, make_verdict
from carleson_lab.analysis.enums import Criterion, ScalingKind
from carleson_lab.analysis.exceptions import (
    DivergentNorm,
    InverseDoublingFails,
    ZeroMassNearOrigin,
)

logger = logging.getLogger(__name__)


##########
# Symbols
class Symbol(abc.ABC):
    """Analytic function on the right half plane with an exact derivative; both accept numpy arrays"""
    @abc.abstractmethod
    def __call__(self, z):
        pass

    @abc.abstractmethod
    def derivative(self, z):
        pass

    @abc.abstractmethod
    def scaled(self, c: complex) -> 'Symbol':
        pass

    @abc.abstractmethod
    def describe(self) -> str:
        pass

    @property
    def is_constant(self) -> bool:
        return False

    def __add__(self, other: 'Symbol') -> 'SumSymbol':
        return SumSymbol((self, other))


def _coeff(c: complex) -> str:
    c = complex(c)
    return repr(c.real) if c.imag == 0 else repr(c).strip('()')


@dc.dataclass(frozen=True)
class ConstantSymbol(Symbol):
    c: complex = 0.0

    def __call__(self, z):
        return self.c * np.ones_like(z, dtype=complex)

    def derivative(self, z):
        return np.zeros_like(z, dtype=complex)

    def scaled(self, c: complex) -> 'ConstantSymbol':
        return ConstantSymbol(self.c * c)

    def describe(self) -> str:
        return f'const:{_coeff(self.c)}'

    @property
    def is_constant(self) -> bool:
        return True


@dc.dataclass(frozen=True)
class KernelSymbol(Symbol):
    """c / (z + lam)^N"""
    lam: complex
    N: int = 1
    c: complex = 1.0

    def __post_init__(self):
        if not complex(self.lam).real > 0:
            raise ValueError(f'Kernel symbols need Re lambda > 0 (got {self.lam})')
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f'Kernel power must be a positive integer (got {self.N})')

    def __call__(self, z):
        return self.c / (z + self.lam) ** self.N

    def derivative(self, z):
        return -self.N * self.c / (z + self.lam) ** (self.N + 1)

    def scaled(self, c: complex) -> 'KernelSymbol':
        return KernelSymbol(self.lam, self.N, self.c * c)

    def describe(self) -> str:
        return f'{_coeff(self.c)}*kernel:{_coeff(self.lam)}:{self.N}'


@dc.dataclass(frozen=True)
class LogSymbol(Symbol):
    """c log(z + s), analytic on the half plane for s >= 0"""
    s: float = 1.0
    c: complex = 1.0

    def __post_init__(self):
        if self.s < 0:
            raise ValueError(f'Logarithmic symbols need s >= 0 (got {self.s})')

    def __call__(self, z):
        return self.c * np.log(z + self.s)

    def derivative(self, z):
        return self.c / (z + self.s)

    def scaled(self, c: complex) -> 'LogSymbol':
        return LogSymbol(self.s, self.c * c)

    def describe(self) -> str:
        return f'{_coeff(self.c)}*log:{self.s!r}'


@dc.dataclass(frozen=True)
class IdentitySymbol(Symbol):
    c: complex = 1.0

    def __call__(self, z):
        return self.c * np.asarray(z, dtype=complex)

    def derivative(self, z):
        return self.c * np.ones_like(z, dtype=complex)

    def scaled(self, c: complex) -> 'IdentitySymbol':
        return IdentitySymbol(self.c * c)

    def describe(self) -> str:
        return f'{_coeff(self.c)}*z'


@dc.dataclass(frozen=True)
class SumSymbol(Symbol):
    terms: ty.Tuple[Symbol, ...]

    def __call__(self, z):
        return sum((term(z) for term in self.terms), np.zeros_like(z, dtype=complex))

    def derivative(self, z):
        return sum((term.derivative(z) for term in self.terms), np.zeros_like(z, dtype=complex))

    def scaled(self, c: complex) -> 'SumSymbol':
        return SumSymbol(tuple(term.scaled(c) for term in self.terms))

    def describe(self) -> str:
        return ' + '.join(term.describe() for term in self.terms)

    @property
    def is_constant(self) -> bool:
        return all(term.is_constant for term in self.terms)


def _kernel_terms(f: tf.TestFunction, c: complex = 1.0) -> ty.List[KernelSymbol]:
    if isinstance(f, tf.Exponential):
        return [KernelSymbol(f.lam, 1, c)]
    if isinstance(f, tf.MonomialExponential):
        return [KernelSymbol(f.lam, f.N, c * math.factorial(f.N - 1))]
    if isinstance(f, tf.NormalizedKernel):
        return [KernelSymbol(f.lam, 1, c * f.weight)]
    if isinstance(f, tf.LinearCombination):
        return [term for a, g in f.terms for term in _kernel_terms(g, c * a)]
    raise ValueError(f'No exact derivative for the transform of {f.describe()}')


class LaplaceSymbol(SumSymbol):
    """The Laplace transform of an exponential-type test function, as a sum of kernel symbols"""
    def __init__(self, f: tf.TestFunction):
        super().__init__(tuple(_kernel_terms(f)))
        object.__setattr__(self, 'source', f)

    def describe(self) -> str:
        return f'laplace:{self.source.describe()}'


def parse_symbol(text: str) -> Symbol:
    """
    Terms joined by ' + ', each optionally prefixed by '<c>*':
        const:<c> | z | log1p | log:<s> | kernel:<lambda>:<N> | laplace:<test function>
    """
    parts = [part.strip() for part in text.split(' + ') if part.strip()]
    if not parts:
        raise ValueError('Empty symbol')
    if len(parts) > 1:
        return SumSymbol(tuple(parse_symbol(part) for part in parts))

    part = parts[0]
    coeff = 1.0
    head, star, tail = part.partition('*')
    if star:
        try:
            coeff = complex(head)
            part = tail
        except ValueError:
            pass

    kind, _, rest = part.partition(':')
    try:
        if kind == 'const':
            return ConstantSymbol(complex(rest) * coeff)
        if kind in ('z', 'identity'):
            return IdentitySymbol(coeff)
        if kind == 'log1p':
            return LogSymbol(1.0, coeff)
        if kind == 'log':
            return LogSymbol(float(rest), coeff)
        if kind == 'kernel':
            lam, _, N = rest.partition(':')
            return KernelSymbol(complex(lam), int(N or 1), coeff)
        if kind == 'laplace':
            symbol = LaplaceSymbol(tf.parse_test_function(rest))
            return symbol if coeff == 1.0 else symbol.scaled(coeff)
    except (TypeError, ValueError) as e:
        raise ValueError(f'Could not parse symbol {text!r}: {e}')
    raise ValueError(f'Unknown symbol kind: {kind!r}')


##########
# The induced measure
def _cdf_on(nu: ms.RadialMeasure, x: np.ndarray) -> np.ndarray:
    """F evaluated on an array, once per distinct value"""
    values, inverse = np.unique(np.asarray(x, dtype=float), return_inverse=True)
    table = np.array([nu.cdf(v) for v in values])
    return table[inverse].reshape(np.shape(x))


def hankel_density(b: Symbol, nu: ms.RadialMeasure) -> ty.Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """rho(x, y) = |b'(x + iy)|^2 x F(x)"""
    def rho(x, y):
        x = np.asarray(x, dtype=float)
        return np.abs(b.derivative(x + 1j * np.asarray(y, dtype=float))) ** 2 * x * _cdf_on(nu, x)
    return rho


def hankel_measure(b: Symbol, nu: ms.RadialMeasure) -> ms.HalfPlaneMeasure:
    if b.is_constant:
        return ms.HalfPlaneMeasure.zero()
    density = ms.PlanarDensity(hankel_density(b, nu), x_breaks=nu.breakpoints(), label=f'hankel:{b.describe()}')
    return ms.HalfPlaneMeasure(planar=(density,))


def hankel_family() -> ms.SquareFamily:
    """Coarser than the default family: every square costs a planar quadrature"""
    conf = settings.CARLESON_LAB
    return ms.square_family(ratio=conf['SIDE_RATIO'] ** 4, span=2)


def check_hankel_bounded(
        b: Symbol,
        nu: ms.RadialMeasure,
        family: ms.SquareFamily = None,
        cap: float = None,
) -> EmbeddingVerdict:
    """
    sup over squares of the induced measure against nu(Q_I) = |I| F(|I|). Passing certifies that the little
        Hankel operator with symbol b is bounded; for the Hardy space (nu~ = delta_0) the condition is also
        necessary.
    """
    family = hankel_family() if family is None else family
    found = ms.carleson_ratio_sup(hankel_measure(b, nu), ms.measure_gauge(nu), family)
    notes = [f'symbol {b.describe()}']
    if nu.family() == 'hardy':
        notes.append('Hardy space: the square condition is necessary and sufficient')
    return make_verdict(Criterion.hankel, '2', found.constant, found.witness, ScalingKind.mass, cap, notes,
                        dict(family.descriptor))


def density_table(b: Symbol, nu: ms.RadialMeasure, xs: ty.Sequence[float], ys: ty.Sequence[float]) -> np.ndarray:
    """Samples of the induced density on the grid xs x ys, rows indexed by x"""
    grid_x, grid_y = np.meshgrid(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float), indexing='ij')
    return hankel_density(b, nu)(grid_x, grid_y)


##########
# Bloch norm and the logarithmic integral
def bloch_grid() -> np.ndarray:
    conf = settings.CARLESON_LAB
    span, points = conf['LAMBDA_IM']
    re = ms.probe_grid()
    im = np.linspace(-span, span, points)
    return (re[:, None] + 1j * im[None, :]).ravel()


def bloch_sup(b: Symbol, grid: ty.Sequence[complex] = None) -> GridSup:
    """Grid sup of |b'(z)| Re z, with the point where it is attained"""
    grid = bloch_grid() if grid is None else np.asarray(grid, dtype=complex)
    values = np.abs(b.derivative(grid)) * grid.real
    i = int(np.argmax(values))
    if values[i] <= 0:
        return GridSup(0.0, None, tuple(zip(grid, values)))
    return GridSup(float(values[i]), complex(grid[i]), tuple(zip(grid, values)))


def bloch_norm(b: Symbol, grid: ty.Sequence[complex] = None) -> float:
    return bloch_sup(b, grid).constant


@dc.dataclass(frozen=True)
class LogIntegralBound:
    """sup over x of the integral of F(s)/s over (0, x) divided by F(x), and the bound gamma (M - 1) / (gamma - 1)"""
    ratio: float
    predicted: float
    M: float
    gamma: float
    witness: ty.Optional[float] = None

    @property
    def holds(self) -> bool:
        return self.ratio <= self.predicted * (1 + 1e-9)


def log_integral(nu: ms.RadialMeasure, x: float) -> float:
    """integral over (0, x) of F(s) / s"""
    if nu.atom_at_zero:
        return math.inf
    try:
        return quadrature.integrate_to_zero(lambda s: nu.cdf(s) / s, x)
    except DivergentNorm:
        return math.inf


def log_integral_bound(
        nu: ms.RadialMeasure,
        x_grid: ty.Sequence[float] = None,
        M: float = 2.0,
) -> LogIntegralBound:
    grid = ms.probe_grid() if x_grid is None else np.asarray(x_grid, dtype=float)
    try:
        gamma = ms.inverse_doubling_infimum(nu, M, grid)
    except ZeroMassNearOrigin as e:
        raise InverseDoublingFails(str(e))
    if not gamma > 1:
        raise InverseDoublingFails(f'inf F({M!r} r) / F(r) = {gamma:.6g} on the probe grid')

    best = 0.0
    where = None
    for x in grid:
        ratio = log_integral(nu, float(x)) / nu.cdf(float(x))
        if ratio > best:
            best, where = ratio, float(x)
    predicted = gamma * (M - 1) / (gamma - 1)
    if best > predicted:
        logger.warning(f'Logarithmic integral ratio {best:.6g} at x={where} exceeds the bound {predicted:.6g}')
    return LogIntegralBound(best, predicted, M, gamma, where)


@dc.dataclass(frozen=True)
class BlochSufficiency:
    """
    For b in the Bloch space and nu~ inverse doubling, the induced measure has Carleson constant at most
        ||b||_B^2 times the logarithmic integral constant.
    """
    bloch: EmbeddingVerdict
    log_bound: LogIntegralBound
    carleson: EmbeddingVerdict

    @property
    def predicted(self) -> float:
        return self.bloch.constant ** 2 * self.log_bound.predicted

    @property
    def consistent(self) -> bool:
        return self.carleson.constant <= self.predicted * (1 + 1e-6)


def check_bloch_sufficiency(
        b: Symbol,
        nu: ms.RadialMeasure,
        family: ms.SquareFamily = None,
        grid: ty.Sequence[complex] = None,
        cap: float = None,
) -> BlochSufficiency:
    found = bloch_sup(b, grid)
    bloch = make_verdict(Criterion.bloch, '1', found.constant, found.witness, ScalingKind.norm, cap,
                         notes=('grid sup of |b\'(z)| Re z',))
    log_bound = log_integral_bound(nu)
    carleson = check_hankel_bounded(b, nu, family, cap)
    report = BlochSufficiency(bloch, log_bound, carleson)
    if not report.consistent:
        logger.warning(f'Carleson constant {carleson.constant:.6g} exceeds the Bloch prediction {report.predicted:.6g}')
    return report
