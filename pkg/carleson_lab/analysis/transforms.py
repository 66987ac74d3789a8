"""
Reproducing and Poisson kernels, test functions with exact Laplace transforms, and the norms the embedding
    criteria are phrased in: L^p, Hardy line norms, Zen norms, and Sobolev norms of sampled functions.
"""
import abc
import dataclasses as dc
import logging
import math
import typing as ty

import numpy as np
from scipy import special

from carleson_lab.analysis import quadrature
from carleson_lab.analysis.exceptions import DivergentNorm, DivergentWeight, GridTooCoarse, QuadratureFailure
from carleson_lab.analysis.measure import PowerPiece, RadialMeasure

logger = logging.getLogger(__name__)

TWO_PI = 2 * math.pi


##########
# Kernels
def kernel(lam: complex, z: complex) -> complex:
    """Reproducing kernel of the Hardy space on the right half plane"""
    return 1 / (TWO_PI * (z + np.conj(lam)))


def kernel_norm_sq(lam: complex) -> float:
    return 1 / (4 * math.pi * complex(lam).real)


def poisson_kernel(z: complex, t):
    """x / (pi (x^2 + (y - t)^2)) for z = x + iy; vectorized over t"""
    x, y = z.real, z.imag
    return x / (math.pi * (x ** 2 + (y - np.asarray(t, dtype=float)) ** 2))


def conjugate_exponent(p: float) -> float:
    return math.inf if p == 1 else p / (p - 1)


@dc.dataclass(frozen=True)
class ExponentPair:
    p: float
    q: float

    def __post_init__(self):
        if self.p < 1 or self.q < 1:
            raise ValueError(f'Exponents must be at least 1 (got p={self.p}, q={self.q})')

    @property
    def p_prime(self) -> float:
        return conjugate_exponent(self.p)


def pole_line_integral(coeff: float, shift: float, power: float) -> float:
    """coeff times the integral over y of |shift + iy|^(-power), for shift > 0; infinite when power <= 1"""
    if power <= 1:
        return math.inf
    return coeff * math.sqrt(math.pi) * special.gamma((power - 1) / 2) / special.gamma(power / 2) \
        * shift ** (1 - power)


##########
# Test functions
class TestFunction(abc.ABC):
    """A function on (0, inf) whose Laplace transform is known in closed form (or exactly for sampled data)"""
    kind: ty.ClassVar[str]
    __test__ = False

    @abc.abstractmethod
    def __call__(self, t):
        """Values at t >= 0; vectorized"""

    @abc.abstractmethod
    def laplace(self, z):
        """(L f)(z) = integral of e^{-tz} f(t) dt"""

    @abc.abstractmethod
    def describe(self) -> str:
        """Round-trippable text form, see parse_test_function"""

    @property
    def abscissa(self) -> float:
        """Laplace transform is analytic for Re z > -abscissa"""
        return 0.0

    def lp_norm(self, p: float) -> float:
        """||f||_p; falls back to quadrature over (0, inf)"""
        value = quadrature.integrate_halfline(lambda t: abs(self(t)) ** p, pivot=self.scale)
        return value ** (1 / p)

    @property
    def scale(self) -> float:
        return 1.0

    def line_integral(self, a: float, p: float) -> ty.Optional[float]:
        """Closed form of the integral over y of |L f(a + iy)|^p, or None"""
        return None

    def embedded_norm(self, mu, q: float) -> float:
        """(integral of |L f|^q dmu)^{1/q} for a half-plane measure mu"""
        return mu.integrate(lambda z: np.abs(self.laplace(z)) ** q) ** (1 / q)

    def __add__(self, other: 'TestFunction') -> 'LinearCombination':
        return LinearCombination(((1.0, self), (1.0, other)))


def _check_lambda(lam: complex):
    if not complex(lam).real > 0:
        raise ValueError(f'Exponential test functions need Re lambda > 0 (got {lam})')


class Exponential(TestFunction):
    """e^{-lambda t}"""
    kind = 'exp'

    def __init__(self, lam: complex):
        _check_lambda(lam)
        self.lam = complex(lam)

    def __call__(self, t):
        return np.exp(-self.lam * np.asarray(t, dtype=float))

    def laplace(self, z):
        return 1 / (z + self.lam)

    def lp_norm(self, p: float) -> float:
        return (1 / (p * self.lam.real)) ** (1 / p)

    def line_integral(self, a: float, p: float) -> ty.Optional[float]:
        return pole_line_integral(1.0, a + self.lam.real, p)

    @property
    def abscissa(self) -> float:
        return self.lam.real

    @property
    def scale(self) -> float:
        return 1 / self.lam.real

    def describe(self) -> str:
        return f'exp:{_fmt(self.lam)}'

    def __eq__(self, other):
        return isinstance(other, Exponential) and other.lam == self.lam

    def __hash__(self):
        return hash((self.kind, self.lam))


class MonomialExponential(TestFunction):
    """t^{N-1} e^{-lambda t}, whose transform (N-1)! / (z + lambda)^N is a multiple of the kernel power k^N"""
    kind = 'monexp'

    def __init__(self, N: int, lam: complex):
        if int(N) != N or N < 1:
            raise ValueError(f'Monomial degree N must be a positive integer (got {N})')
        _check_lambda(lam)
        self.N = int(N)
        self.lam = complex(lam)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return t ** (self.N - 1) * np.exp(-self.lam * t)

    def laplace(self, z):
        return math.factorial(self.N - 1) / (z + self.lam) ** self.N

    def lp_norm(self, p: float) -> float:
        s = p * (self.N - 1) + 1
        return (special.gamma(s) / (p * self.lam.real) ** s) ** (1 / p)

    def line_integral(self, a: float, p: float) -> ty.Optional[float]:
        return pole_line_integral(math.factorial(self.N - 1) ** p, a + self.lam.real, self.N * p)

    @property
    def abscissa(self) -> float:
        return self.lam.real

    @property
    def scale(self) -> float:
        return self.N / self.lam.real

    def describe(self) -> str:
        return f'monexp:{self.N}:{_fmt(self.lam)}'

    def __eq__(self, other):
        return isinstance(other, MonomialExponential) and (other.N, other.lam) == (self.N, self.lam)

    def __hash__(self):
        return hash((self.kind, self.N, self.lam))


class NormalizedKernel(TestFunction):
    """lambda^{1/p} e^{-lambda t}; its L^p norm is p^{-1/p} whatever lambda is"""
    kind = 'nkernel'

    def __init__(self, lam: float, p: float):
        if not lam > 0:
            raise ValueError('Normalized kernels need lambda > 0')
        self.lam = float(lam)
        self.p = float(p)
        self.weight = self.lam ** (1 / self.p)

    def __call__(self, t):
        return self.weight * np.exp(-self.lam * np.asarray(t, dtype=float))

    def laplace(self, z):
        return self.weight / (z + self.lam)

    def lp_norm(self, p: float) -> float:
        return self.weight * (1 / (p * self.lam)) ** (1 / p)

    def line_integral(self, a: float, p: float) -> ty.Optional[float]:
        return pole_line_integral(self.weight ** p, a + self.lam, p)

    @property
    def abscissa(self) -> float:
        return self.lam

    @property
    def scale(self) -> float:
        return 1 / self.lam

    def describe(self) -> str:
        return f'nkernel:{self.lam!r}:{self.p!r}'

    def __eq__(self, other):
        return isinstance(other, NormalizedKernel) and (other.lam, other.p) == (self.lam, self.p)

    def __hash__(self):
        return hash((self.kind, self.lam, self.p))


class LinearCombination(TestFunction):
    """Finite sum of (coefficient, test function) terms"""
    kind = 'sum'

    def __init__(self, terms: ty.Iterable[ty.Tuple[float, TestFunction]]):
        self.terms = tuple((complex(c) if isinstance(c, complex) else float(c), f) for c, f in terms)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        total = np.zeros(t.shape, dtype=complex)
        for c, f in self.terms:
            total = total + c * f(t)
        return total

    def laplace(self, z):
        return sum((c * f.laplace(z) for c, f in self.terms), 0.0)

    def lp_norm(self, p: float) -> float:
        if not self.terms:
            return 0.0
        if p == 2 and all(isinstance(f, (Exponential, NormalizedKernel)) for _, f in self.terms):
            # <c e^{-a t}, d e^{-b t}> = c conj(d) / (a + conj(b))
            total = 0.0
            for c, f in self.terms:
                for d, g in self.terms:
                    wf = getattr(f, 'weight', 1.0)
                    wg = getattr(g, 'weight', 1.0)
                    total += (c * np.conj(d) * wf * wg / (f.lam + np.conj(g.lam))).real
            return math.sqrt(max(total, 0.0))
        return super().lp_norm(p)

    def line_integral(self, a: float, p: float) -> ty.Optional[float]:
        if not self.terms:
            return 0.0
        if p != 2 or not all(isinstance(f, (Exponential, NormalizedKernel)) for _, f in self.terms):
            return None
        # integral over y of 1 / ((a + l + iy) conj(a + m + iy)) = 2 pi / (2a + l + conj(m))
        total = 0.0
        for c, f in self.terms:
            for d, g in self.terms:
                wf = getattr(f, 'weight', 1.0)
                wg = getattr(g, 'weight', 1.0)
                total += (c * np.conj(d) * wf * wg * TWO_PI / (2 * a + f.lam + np.conj(g.lam))).real
        return max(total, 0.0)

    @property
    def abscissa(self) -> float:
        return min((f.abscissa for _, f in self.terms), default=0.0)

    @property
    def scale(self) -> float:
        return max((f.scale for _, f in self.terms), default=1.0)

    def describe(self) -> str:
        return 'sum:' + ';'.join(f'{_fmt(c)}*{f.describe()}' for c, f in self.terms)

    def __eq__(self, other):
        return isinstance(other, LinearCombination) and other.terms == self.terms

    def __hash__(self):
        return hash((self.kind, self.terms))


class LacunaryCombination(LinearCombination):
    """sum over n of alpha_n times the normalized kernel at lambda = 2^n"""
    kind = 'lacunary'

    def __init__(self, coefficients: ty.Mapping[int, float], p: float):
        self.coefficients = {int(n): float(a) for n, a in sorted(coefficients.items())}
        self.p = float(p)
        super().__init__((a, NormalizedKernel(2.0 ** n, self.p)) for n, a in self.coefficients.items())

    def gram(self) -> np.ndarray:
        """<k~_a, k~_b> = (ab)^{1/p} / (a + b)"""
        lams = np.array([2.0 ** n for n in self.coefficients])
        return np.outer(lams, lams) ** (1 / self.p) / (lams[:, None] + lams[None, :])

    def lp_norm(self, p: float) -> float:
        if p == 2 and self.coefficients:
            alpha = np.array(list(self.coefficients.values()))
            return math.sqrt(max(float(alpha @ self.gram() @ alpha), 0.0))
        return TestFunction.lp_norm(self, p)

    def describe(self) -> str:
        entries = ','.join(f'{n}={a!r}' for n, a in self.coefficients.items())
        return f'lacunary:{self.p!r}:{entries}'


class Sampled(TestFunction):
    """Piecewise-linear interpolant of samples, zero outside the grid"""
    kind = 'samples'

    def __init__(self, grid: ty.Sequence[float], values: ty.Sequence[float]):
        self.grid = np.asarray(grid, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.grid.ndim != 1 or len(self.grid) < 2 or self.grid.shape != self.values.shape:
            raise ValueError('Sampled functions need matching 1-D grids and values with at least two points')
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError('Sample grid must be strictly increasing')
        if not np.all(np.isfinite(self.values)):
            raise ValueError('Sample values must be finite')

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        inside = (t >= self.grid[0]) & (t <= self.grid[-1])
        return np.where(inside, np.interp(t, self.grid, self.values), 0.0)

    @property
    def spacing(self) -> ty.Optional[float]:
        steps = np.diff(self.grid)
        if np.allclose(steps, steps[0], rtol=1e-9, atol=0):
            return float(steps[0])
        return None

    def laplace(self, z):
        """Exact transform of the interpolant, segment by segment"""
        if self.grid[0] < 0:
            raise ValueError('Laplace transforms need samples on [0, inf)')
        if np.ndim(z):
            return np.vectorize(self.laplace, otypes=[complex])(z)
        z = complex(z)
        t0, t1 = self.grid[:-1], self.grid[1:]
        v0, v1 = self.values[:-1], self.values[1:]
        h = t1 - t0
        if z == 0:
            return complex(np.sum(h * (v0 + v1) / 2))
        slope = (v1 - v0) / h
        e0 = np.exp(-z * t0)
        e1 = np.exp(-z * t1)
        # integral of (v0 + slope (t - t0)) e^{-zt} over [t0, t1]
        head = (v0 * e0 - v1 * e1) / z
        tail = slope * (e0 - e1) / z ** 2
        return complex(np.sum(head + tail))

    def lp_norm(self, p: float) -> float:
        v0, v1 = self.values[:-1], self.values[1:]
        h = np.diff(self.grid)
        if p == 2:
            return math.sqrt(float(np.sum(h * (v0 ** 2 + v0 * v1 + v1 ** 2) / 3)))
        nodes, weights = quadrature._gl_nodes()
        points = v0[:, None] + (v1 - v0)[:, None] * nodes[None, :]
        return float(np.sum(h[:, None] * weights[None, :] * np.abs(points) ** p)) ** (1 / p)

    @property
    def scale(self) -> float:
        return float(max(self.grid[-1] - self.grid[0], 1e-300))

    def describe(self) -> str:
        return 'samples:' + ','.join(f'{t!r}={v!r}' for t, v in zip(self.grid.tolist(), self.values.tolist()))

    def __eq__(self, other):
        return isinstance(other, Sampled) and np.array_equal(self.grid, other.grid) \
            and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.kind, self.grid.tobytes(), self.values.tobytes()))


def _fmt(value: complex) -> str:
    value = complex(value)
    if value.imag == 0:
        return repr(value.real)
    return repr(value).strip('()')


def parse_test_function(text: str) -> TestFunction:
    """
    exp:<lambda> | monexp:<N>:<lambda> | nkernel:<lambda>:<p> | lacunary:<p>:<n>=<alpha>,... |
        samples:<t>=<v>,... | sum:<c>*<f>;<c>*<f>...  (lambda may be complex, e.g. 1+2j)
    """
    text = text.strip()
    kind, _, rest = text.partition(':')
    try:
        if kind == 'exp':
            return Exponential(complex(rest))
        if kind == 'monexp':
            N, lam = rest.split(':')
            return MonomialExponential(int(N), complex(lam))
        if kind == 'nkernel':
            lam, p = rest.split(':')
            return NormalizedKernel(float(lam), float(p))
        if kind == 'lacunary':
            p, entries = rest.split(':', 1)
            pairs = (e.split('=') for e in entries.split(',') if e)
            return LacunaryCombination({int(n): float(a) for n, a in pairs}, float(p))
        if kind == 'samples':
            pairs = [e.split('=') for e in rest.split(',') if e]
            return Sampled([float(t) for t, _ in pairs], [float(v) for _, v in pairs])
        if kind == 'sum':
            terms = []
            for chunk in rest.split(';'):
                if not chunk:
                    continue
                coeff, _, inner = chunk.partition('*')
                value = complex(coeff)
                terms.append((value.real if value.imag == 0 else value, parse_test_function(inner)))
            return LinearCombination(terms)
    except (TypeError, ValueError) as e:
        raise ValueError(f'Could not parse test function {text!r}: {e}')
    raise ValueError(f'Unknown test function kind: {kind!r}')


def laplace(f: TestFunction, z):
    return f.laplace(z)


def lp_norm(f: TestFunction, p: float) -> float:
    if p < 1:
        raise ValueError('L^p norms need p >= 1')
    return f.lp_norm(p)


##########
# Weights and norms
@dc.dataclass(frozen=True)
class WeightFunction:
    """w(t) = 2 pi integral of e^{-2rt} d nu~(r)"""
    nu: RadialMeasure
    tag: ty.Optional[str] = None

    def __call__(self, t):
        if np.ndim(t):
            return np.array([self(float(s)) for s in np.ravel(t)]).reshape(np.shape(t))
        return _weight_value(self.nu, float(t))

    def closed_form(self) -> ty.Optional[str]:
        if self.tag == 'hardy':
            return f'{TWO_PI * self.nu.atom_at_zero!r}'
        if self.tag == 'lebesgue':
            return f'{math.pi * self.nu.pieces[0].coeff!r}/t'
        if self.tag == 'power':
            piece = self.nu.pieces[0]
            factor = TWO_PI * piece.coeff * special.gamma(piece.alpha + 1) / 2 ** (piece.alpha + 1)
            return f'{factor!r}*t^{-(piece.alpha + 1)!r}'
        return None


def _weight_value(nu: RadialMeasure, t: float) -> float:
    if t <= 0:
        total = nu.total_mass()
        if not math.isfinite(total):
            raise DivergentWeight(f'w({t}) diverges: nu~ has infinite mass and no exponential damping')
        if t < 0 and (nu.atoms or nu.pieces):
            raise DivergentWeight(f'w({t}) diverges: e^(-2rt) grows for t < 0')
        return TWO_PI * total

    value = nu.atom_at_zero + sum(m * math.exp(-2 * r * t) for r, m in nu.atoms)
    for piece in nu.pieces:
        if isinstance(piece, PowerPiece) and piece.alpha > -1:
            s = piece.alpha + 1
            upper = 1.0 if piece.hi == math.inf else special.gammainc(s, 2 * t * piece.hi)
            lower = special.gammainc(s, 2 * t * piece.lo)
            value += piece.coeff * special.gamma(s) / (2 * t) ** s * (upper - lower)
            continue

        def g(r, piece=piece):
            return float(piece.density(r)) * math.exp(-2 * r * t)

        if piece.hi == math.inf:
            value += quadrature.integrate_to_infinity(g, piece.lo, scale=max(piece.lo, 1 / t))
        else:
            value += quadrature.integrate(g, piece.lo, piece.hi)
    return TWO_PI * value


def weight_from_measure(nu: RadialMeasure) -> WeightFunction:
    return WeightFunction(nu, nu.family())


def measure_for_power_weight(alpha: float) -> RadialMeasure:
    """The radial measure whose weight is exactly t^alpha, for -1 < alpha < 0"""
    if not -1 < alpha < 0:
        raise ValueError('Power weights t^alpha are representable for -1 < alpha < 0')
    coeff = 1 / (TWO_PI * special.gamma(-alpha) * 2 ** alpha)
    return RadialMeasure.power(-alpha - 1, coeff)


def _as_function(f) -> ty.Tuple[ty.Callable[[complex], complex], ty.Optional[TestFunction]]:
    if isinstance(f, TestFunction):
        return f.laplace, f
    return f, None


def hardy_line_norm(F, a: float, p: float = 2.0) -> float:
    """integral over y of |F(a + iy)|^p; F is a test function (meaning its Laplace transform) or a callable"""
    func, test = _as_function(F)
    if test is not None:
        closed = test.line_integral(a, p)
        if closed is not None:
            if not math.isfinite(closed):
                raise DivergentNorm(f'Line integral at Re z = {a} diverges')
            return closed
    scale = max(a + (test.abscissa if test is not None else 0.0), 1.0)
    return quadrature.integrate_line(lambda y: abs(func(complex(a, y))) ** p, center=0.0, scale=scale)


def zen_norm_power(F, nu: RadialMeasure, p: float = 2.0) -> float:
    """integral of |F|^p against nu~ (x) Lebesgue, computed as a radial integral of line integrals"""
    def line(r):
        return hardy_line_norm(F, r, p)

    total = 0.0
    if nu.atom_at_zero:
        total += nu.atom_at_zero * line(0.0)
    for r, m in nu.atoms:
        total += m * line(r)
    for piece in nu.pieces:
        def g(r, piece=piece):
            return float(piece.density(r)) * line(r)

        if piece.hi == math.inf:
            total += quadrature.integrate_to_infinity(g, piece.lo, scale=max(piece.lo, 1.0))
        else:
            total += quadrature.integrate(g, piece.lo, piece.hi)
    return total


def zen_norm(F, nu: RadialMeasure, p: float = 2.0) -> float:
    return zen_norm_power(F, nu, p) ** (1 / p)


##########
# Sobolev norms
def _spectrum(f: Sampled) -> ty.Tuple[np.ndarray, np.ndarray, float]:
    h = f.spacing
    if h is None:
        raise GridTooCoarse('Sobolev norms need a uniform sample grid')
    values = f.values
    peak = float(np.max(np.abs(values))) or 1.0
    if max(abs(values[0]), abs(values[-1])) > 1e-10 * peak:
        raise GridTooCoarse('Samples do not decay to zero at the grid edges')

    size = 1 << int(math.ceil(math.log2(4 * len(values))))
    spectrum = np.fft.rfft(values, n=size)
    xi = TWO_PI * np.fft.rfftfreq(size, d=h)

    energy = np.abs(spectrum) ** 2
    high = energy[xi > xi[-1] / 2].sum()
    if high > 0.01 * energy.sum():
        raise GridTooCoarse(f'{high / energy.sum():.2%} of the energy lies above half the Nyquist frequency')
    return spectrum, xi, h


def _parseval(spectrum: np.ndarray, h: float, size: int) -> float:
    """L^2 norm squared from a one-sided spectrum of a zero-padded real signal"""
    energy = np.abs(spectrum) ** 2
    weights = np.full(len(energy), 2.0)
    weights[0] = 1.0
    if size % 2 == 0:
        weights[-1] = 1.0
    return float(h * np.sum(weights * energy) / size)


def fractional_derivative_energy(f: Sampled, beta: float) -> float:
    """||D^beta f||_2^2 with D^beta the Fourier multiplier |xi|^beta"""
    spectrum, xi, h = _spectrum(f)
    size = 2 * (len(spectrum) - 1)
    return _parseval(np.abs(xi) ** beta * spectrum, h, size)


def sobolev_norm(f: Sampled, beta: float, p: float = 2.0) -> float:
    """(||f||_2^2 + ||D^beta f||_2^2)^{1/2}"""
    if p != 2:
        raise ValueError('Only the Hilbert case p = 2 is computed spectrally')
    if beta < 0:
        raise ValueError('Sobolev order must be nonnegative')
    spectrum, xi, h = _spectrum(f)
    size = 2 * (len(spectrum) - 1)
    plain = _parseval(spectrum, h, size)
    derivative = _parseval(np.abs(xi) ** beta * spectrum, h, size)
    return math.sqrt(plain + derivative)


##########
# The L^2_w -> A^2_nu isometry
@dc.dataclass(frozen=True)
class PaleyWienerReport:
    lhs: float
    rhs: float
    gap: float
    divergent: bool = False


def weighted_l2_norm_sq(f: TestFunction, w: WeightFunction) -> float:
    """integral of |f|^2 w over (0, inf)"""
    return quadrature.integrate_halfline(lambda t: abs(complex(f(t))) ** 2 * w(t), pivot=f.scale)


def paley_wiener_check(nu: RadialMeasure, f: TestFunction) -> PaleyWienerReport:
    """
    Compare ||Lf||^2 in the Zen space of nu~ with ||f||^2 in L^2 weighted by w. A side that diverges is reported as
        inf; two divergent sides count as agreeing.
    """
    w = weight_from_measure(nu)

    def guarded(compute):
        try:
            return compute()
        except (DivergentNorm, DivergentWeight, QuadratureFailure) as e:
            logger.debug(f'Treating side as divergent: {e}')
            return math.inf

    lhs = guarded(lambda: zen_norm_power(f, nu, 2.0))
    rhs = guarded(lambda: weighted_l2_norm_sq(f, w))

    lhs_inf, rhs_inf = not math.isfinite(lhs), not math.isfinite(rhs)
    if lhs_inf and rhs_inf:
        return PaleyWienerReport(lhs, rhs, 0.0, True)
    if lhs_inf or rhs_inf:
        logger.warning(f'Isometry check: one side diverges (lhs={lhs}, rhs={rhs})')
        return PaleyWienerReport(lhs, rhs, math.inf, True)
    if rhs == 0:
        return PaleyWienerReport(lhs, rhs, 0.0 if lhs == 0 else math.inf)
    return PaleyWienerReport(lhs, rhs, abs(lhs - rhs) / rhs)


def weight_curve(nu: RadialMeasure, ts: ty.Sequence[float]) -> ty.List[ty.Tuple[float, float]]:
    w = weight_from_measure(nu)
    return [(float(t), float(w(float(t)))) for t in ts]
