"""
Sectors, strips and the dyadic cells T_{n,k}; the balayage (Poisson sweep) of a measure onto the boundary line, its
    dyadic version and layer decomposition for sectorial measures, and the uncentered maximal function.

Cells are T_{n,k} = {2^(n-1) < x <= 2^n, k 2^n - 2^(n-1) < y <= k 2^n + 2^(n-1)}, closed on the upper side in both
    directions. An atom sitting on a cell boundary belongs to the lower cell and is reported.
"""
import dataclasses as dc
import logging
import math
import typing as ty

import numpy as np

from carleson_lab.analysis import measure as ms
from carleson_lab.analysis.exceptions import DivergentNorm, NotInStrip, NotSectorial, QuadratureFailure
from carleson_lab.analysis.transforms import Sampled, poisson_kernel

logger = logging.getLogger(__name__)

# Sectorial layers need the sector inside the row k = 0 of cells
LAYER_ANGLE = math.atan(0.5)

_UPPER = (False, True)


##########
# Regions
@dc.dataclass(frozen=True)
class SectorSpec:
    """S(theta) = {z: |arg z| < theta}"""
    theta: float

    def __post_init__(self):
        if not 0 < self.theta < math.pi / 2:
            raise ValueError(f'Sector opening must lie in (0, pi/2) (got {self.theta})')

    def contains(self, z: complex) -> bool:
        return z.real > 0 and abs(math.atan2(z.imag, z.real)) < self.theta

    def contains_measure(self, mu: ms.HalfPlaneMeasure) -> bool:
        return support_angle(mu) < self.theta


@dc.dataclass(frozen=True)
class StripSpec:
    """{alpha1 <= Re z <= alpha2}"""
    alpha1: float
    alpha2: float

    def __post_init__(self):
        if not 0 < self.alpha1 <= self.alpha2:
            raise ValueError(f'Strip needs 0 < alpha1 <= alpha2 (got {self.alpha1}, {self.alpha2})')

    def contains(self, z: complex) -> bool:
        return self.alpha1 <= z.real <= self.alpha2

    def contains_measure(self, mu: ms.HalfPlaneMeasure) -> bool:
        if mu.is_zero():
            return True
        x_min, x_max, _, _ = mu.support_box()
        return self.alpha1 <= x_min and x_max <= self.alpha2


def support_angle(mu: ms.HalfPlaneMeasure) -> float:
    """sup of |arg z| over the support of mu (pi/2 as soon as mass reaches the boundary line)"""
    worst = 0.0
    for z, _ in mu.atoms:
        if z.real <= 0:
            return math.pi / 2
        worst = max(worst, abs(math.atan2(z.imag, z.real)))
    for component in mu.products:
        if component.x.is_zero():
            continue
        x_lo, _ = component.x.support()
        y_lo, y_hi = component.y.support()
        if x_lo <= 0 or not (math.isfinite(y_lo) and math.isfinite(y_hi)):
            return math.pi / 2
        worst = max(worst, math.atan2(max(abs(y_lo), abs(y_hi)), x_lo))
    if mu.planar:
        x_min, _, y_min, y_max = mu.support_box()
        if x_min <= 0 or not (math.isfinite(y_min) and math.isfinite(y_max)):
            return math.pi / 2
        worst = max(worst, math.atan2(max(abs(y_min), abs(y_max)), x_min))
    return worst


def check_sectorial(mu: ms.HalfPlaneMeasure, sector: SectorSpec = None, limit: float = None) -> float:
    """Support angle of mu, after checking it against the sector (and against a limiting angle if given)"""
    angle = support_angle(mu)
    if sector is not None and not angle < sector.theta:
        raise NotSectorial(f'Measure reaches arg z = {angle:.6g}, outside the sector of opening {sector.theta:.6g}')
    if limit is not None and not angle < limit:
        raise NotSectorial(f'Measure reaches arg z = {angle:.6g}; this needs an opening below {limit:.6g}')
    return angle


def check_strip(mu: ms.HalfPlaneMeasure, strip: StripSpec):
    if not strip.contains_measure(mu):
        x_min, x_max, _, _ = mu.support_box()
        raise NotInStrip(f'Support spans Re z in [{x_min:.6g}, {x_max:.6g}], outside [{strip.alpha1}, {strip.alpha2}]')


##########
# Dyadic cells
def _scale_index(x: float) -> int:
    """The n with 2^(n-1) < x <= 2^n"""
    m, e = math.frexp(x)
    return e - 1 if m == 0.5 else e


def _vertical_index(y: float, n: int) -> int:
    """The k with k 2^n - 2^(n-1) < y <= k 2^n + 2^(n-1)"""
    side = 2.0 ** n
    return math.ceil((y - side / 2) / side)


@dc.dataclass(frozen=True)
class DyadicCell:
    n: int
    k: int = 0

    @property
    def side(self) -> float:
        return 2.0 ** self.n

    @property
    def interval(self) -> ty.Tuple[float, float]:
        """I_{n,k}, open below and closed above"""
        center = self.k * self.side
        return center - self.side / 2, center + self.side / 2

    def box(self) -> ms.Box:
        y_lo, y_hi = self.interval
        return ms.Box(self.side / 2, self.side, y_lo, y_hi, _UPPER, _UPPER)

    def slab(self) -> ms.Box:
        """S_n, the union of T_{n,k} over k"""
        return ms.Box(self.side / 2, self.side, -math.inf, math.inf, _UPPER, (True, True))

    def contains(self, z: complex) -> bool:
        return self.box().contains(z)

    @classmethod
    def for_point(cls, z: complex) -> 'DyadicCell':
        if not z.real > 0:
            raise ValueError(f'{z} is not in the open right half plane')
        n = _scale_index(z.real)
        return cls(n, _vertical_index(z.imag, n))

    @staticmethod
    def on_boundary(z: complex) -> bool:
        cell = DyadicCell.for_point(z)
        return z.real == cell.side or z.imag == cell.interval[1]


@dc.dataclass(frozen=True)
class CellTable:
    """mu(T_{n,k}) over finite ranges of n and k, plus the exact slab masses mu(S_n)"""
    n_values: ty.Tuple[int, ...]
    k_values: ty.Tuple[int, ...]
    masses: np.ndarray = dc.field(compare=False)
    slab_masses: np.ndarray = dc.field(compare=False)
    boundary_atoms: ty.Tuple[ty.Tuple[complex, float], ...] = ()

    def cell(self, n: int, k: int = 0) -> float:
        if n not in self.n_values or k not in self.k_values:
            return 0.0
        return float(self.masses[self.n_values.index(n), self.k_values.index(k)])

    def row_sums(self) -> np.ndarray:
        return self.masses.sum(axis=1)

    def remainder(self) -> np.ndarray:
        """Slab mass that falls outside the k range, per n"""
        return self.slab_masses - self.row_sums()

    def out_of_range(self, rtol: float = 1e-12) -> ty.Tuple[int, ...]:
        rest = self.remainder()
        return tuple(n for n, r, s in zip(self.n_values, rest, self.slab_masses) if r > rtol * max(s, 1e-300))

    def dyadic_balayage(self, t: float) -> float:
        """sum over n, k of chi_{I_{n,k}}(t) mu(T_{n,k}) / 2^n"""
        total = 0.0
        for row, n in enumerate(self.n_values):
            k = _vertical_index(t, n)
            if k in self.k_values:
                total += self.masses[row, self.k_values.index(k)] / 2.0 ** n
        return float(total)


def _ranges(n_range: ty.Tuple[int, int], k_range: ty.Tuple[int, int]):
    n_lo, n_hi = n_range
    k_lo, k_hi = k_range
    if n_lo > n_hi or k_lo > k_hi:
        raise ValueError(f'Empty cell range: n in {n_range}, k in {k_range}')
    return tuple(range(n_lo, n_hi + 1)), tuple(range(k_lo, k_hi + 1))


def cell_masses(
        mu: ms.HalfPlaneMeasure,
        n_range: ty.Tuple[int, int],
        k_range: ty.Tuple[int, int] = (0, 0),
) -> CellTable:
    ns, ks = _ranges(n_range, k_range)
    masses = np.zeros((len(ns), len(ks)))

    boundary = []
    for z, m in mu.atoms:
        if not z.real > 0:
            continue
        cell = DyadicCell.for_point(z)
        if DyadicCell.on_boundary(z):
            boundary.append((z, m))
        if cell.n in ns and cell.k in ks:
            masses[ns.index(cell.n), ks.index(cell.k)] += m
    if boundary:
        logger.warning(f'{len(boundary)} atom(s) lie on dyadic cell boundaries and were given to the lower cell')

    for component in mu.products:
        if component.factor is None:
            for row, n in enumerate(ns):
                side = 2.0 ** n
                xm = component.x.mass(side / 2, side, _UPPER)
                if xm == 0:
                    continue
                for col, k in enumerate(ks):
                    y_lo, y_hi = DyadicCell(n, k).interval
                    masses[row, col] += xm * component.y.mass(y_lo, y_hi, _UPPER)
            continue
        for row, n in enumerate(ns):
            for col, k in enumerate(ks):
                masses[row, col] += component.box_mass(DyadicCell(n, k).box())

    for component in mu.planar:
        for row, n in enumerate(ns):
            for col, k in enumerate(ks):
                masses[row, col] += component.box_mass(DyadicCell(n, k).box())

    return CellTable(ns, ks, masses, slab_masses(mu, n_range), tuple(boundary))


def sector_masses(mu: ms.HalfPlaneMeasure, n_range: ty.Tuple[int, int]) -> np.ndarray:
    """mu(T_n) for n in the range (the row k = 0)"""
    return cell_masses(mu, n_range).masses[:, 0]


def slab_masses(mu: ms.HalfPlaneMeasure, n_range: ty.Tuple[int, int]) -> np.ndarray:
    """mu(S_n) for n in the range"""
    ns = tuple(range(n_range[0], n_range[1] + 1))
    if mu.is_atomic():
        return np.array([sum(m for z, m in mu.atoms if z.real > 0 and _scale_index(z.real) == n) for n in ns],
                        dtype=float)
    return np.array([mu.box_mass(DyadicCell(n).slab()) for n in ns])


def cell_range(mu: ms.HalfPlaneMeasure, pad: int = 0) -> ty.Tuple[int, int]:
    """Smallest n range whose slabs cover the support of mu"""
    x_min, x_max, _, _ = mu.support_box()
    if not (x_min > 0 and math.isfinite(x_max)):
        raise ValueError('Measure has no bounded support away from the boundary line; pass an explicit range')
    return _scale_index(x_min) - pad, _scale_index(x_max) + pad


def vertical_range(mu: ms.HalfPlaneMeasure, n_range: ty.Tuple[int, int], limit: int = 4096) -> ty.Tuple[int, int]:
    """k range whose cells cover the vertical extent of mu at the finest scale of n_range"""
    _, _, y_min, y_max = mu.support_box()
    if not (math.isfinite(y_min) and math.isfinite(y_max)):
        raise ValueError('Measure has unbounded vertical support; dyadic balayage needs a finite k range')
    lo, hi = _vertical_index(y_min, n_range[0]), _vertical_index(y_max, n_range[0])
    if hi - lo + 1 > limit:
        raise ValueError(f'{hi - lo + 1} vertical cells at n={n_range[0]} exceed the limit of {limit}')
    return lo, hi


##########
# Balayage
def _uniform_sweep(x: float, lo: float, hi: float, t: float) -> float:
    """integral over y in [lo, hi) of the Poisson kernel of x + iy at t"""
    if x <= 0:
        return 0.0
    return (math.atan((hi - t) / x) - math.atan((lo - t) / x)) / math.pi


def _component_sweep(component: ms.ProductComponent, t: float) -> float:
    if component.factor is not None:
        return component.integrate(lambda z: float(poisson_kernel(z, t)) if z.real > 0 else 0.0)
    y = component.y
    if y.kind == 'point':
        return y.density * component.x.integrate(
            lambda x: float(poisson_kernel(complex(x, y.lo), t)) if x > 0 else 0.0
        )
    return y.density * component.x.integrate(lambda x: _uniform_sweep(x, y.lo, y.hi, t))


def balayage_eval(mu: ms.HalfPlaneMeasure, t: float) -> float:
    """
    S_mu(t) = integral of the Poisson kernel p_z(t) against mu. Atoms are summed exactly and uniform vertical profiles
        are swept in closed form. Returns inf when the sweep diverges. Mass on the boundary line is not swept.
    """
    total = 0.0
    if mu.atoms:
        z = np.array([a[0] for a in mu.atoms if a[0].real > 0], dtype=complex)
        m = np.array([a[1] for a in mu.atoms if a[0].real > 0], dtype=float)
        if len(z):
            total += float(np.dot(m, z.real / (math.pi * (z.real ** 2 + (z.imag - t) ** 2))))
    try:
        for component in mu.products:
            total += _component_sweep(component, t)
        for component in mu.planar:
            total += component.integrate(lambda w: np.where(w.real > 0, poisson_kernel(w, t), 0.0))
    except (DivergentNorm, QuadratureFailure) as e:
        logger.warning(f'Balayage at t={t} diverges: {e}')
        return math.inf
    if not math.isfinite(total):
        logger.warning(f'Balayage at t={t} diverges')
    return total


def dyadic_balayage(
        mu: ms.HalfPlaneMeasure,
        t: float,
        n_range: ty.Tuple[int, int],
        k_range: ty.Tuple[int, int] = (0, 0),
        table: CellTable = None,
) -> float:
    table = cell_masses(mu, n_range, k_range) if table is None else table
    return table.dyadic_balayage(t)


@dc.dataclass(frozen=True)
class BalayageComparison:
    """S_mu and S^d_mu on a t-grid; ratio is the largest S^d / (2 pi S)"""
    ts: np.ndarray = dc.field(compare=False)
    sweep: np.ndarray = dc.field(compare=False)
    dyadic: np.ndarray = dc.field(compare=False)
    ratio: float = 0.0

    def rows(self) -> ty.List[ty.Tuple[float, float, float]]:
        return [(float(t), float(s), float(d)) for t, s, d in zip(self.ts, self.sweep, self.dyadic)]


def balayage_comparison(
        mu: ms.HalfPlaneMeasure,
        ts: ty.Sequence[float],
        n_range: ty.Tuple[int, int],
        k_range: ty.Tuple[int, int] = (0, 0),
) -> BalayageComparison:
    ts = np.asarray(ts, dtype=float)
    table = cell_masses(mu, n_range, k_range)
    sweep = np.array([balayage_eval(mu, t) for t in ts])
    dyadic = np.array([table.dyadic_balayage(t) for t in ts])
    with np.errstate(divide='ignore', invalid='ignore'):
        ratios = np.where(dyadic > 0, dyadic / (2 * math.pi * sweep), 0.0)
    ratio = float(np.max(ratios)) if len(ratios) else 0.0
    if ratio > 1 + 1e-9:
        logger.warning(f'Dyadic balayage exceeds 2 pi times the sweep by a factor {ratio:.6g}')
    return BalayageComparison(ts, sweep, dyadic, ratio)


##########
# Layers of the dyadic balayage of a sectorial measure
def _layer_index(t: float) -> int:
    """The n with t in I_n minus I_(n-1); I_n = (-2^(n-1), 2^(n-1)] is open on the left"""
    n = _scale_index(abs(t)) + 1
    if t < 0 and math.frexp(t)[0] == -0.5:
        n += 1
    return n


@dc.dataclass(frozen=True)
class LayerReport:
    """
    S^d_{mu,k}(t) for k = 0..k_max. The identity S^d_{mu,k}(t) = S^d_{mu,0}(2^k t) is checked for every k; tail is
        what the full dyadic balayage holds beyond the computed layers. At t = 0 every layer is zero.
    """
    t: float
    layers: ty.Tuple[float, ...]
    scaled: ty.Tuple[float, ...]
    dyadic: float
    identity_holds: bool

    @property
    def tail(self) -> float:
        return self.dyadic - sum(self.layers)


class _SectorMasses:
    """Memoized mu(T_n) lookups"""

    def __init__(self, mu: ms.HalfPlaneMeasure):
        self.mu = mu
        self._cache: ty.Dict[int, float] = {}

    def __call__(self, n: int) -> float:
        if n not in self._cache:
            self._cache[n] = self.mu.box_mass(DyadicCell(n).box())
        return self._cache[n]


def _principal_layer(masses: _SectorMasses, s: float) -> float:
    """S^d_{mu,0}(s)"""
    if s == 0:
        return 0.0
    n = _layer_index(s)
    return masses(n) / 2.0 ** n


def sectorial_balayage_layers(
        mu: ms.HalfPlaneMeasure,
        t: float,
        k_max: int,
        n_range: ty.Tuple[int, int] = None,
        sector: SectorSpec = None,
) -> LayerReport:
    check_sectorial(mu, sector, limit=LAYER_ANGLE)
    masses = _SectorMasses(mu)
    n_range = cell_range(mu) if n_range is None else n_range

    layers = []
    scaled = []
    if t != 0:
        n = _layer_index(t)
        for k in range(k_max + 1):
            layers.append(masses(n + k) / 2.0 ** (n + k))
            scaled.append(_principal_layer(masses, 2.0 ** k * t))
    else:
        layers = [0.0] * (k_max + 1)
        scaled = list(layers)

    ns = range(n_range[0], n_range[1] + 1)
    dyadic = sum(masses(n) / 2.0 ** n for n in ns if _vertical_index(t, n) == 0)
    identity = all(a == b for a, b in zip(layers, scaled))
    if not identity:
        logger.warning(f'Layer identity failed at t={t}: {layers} vs {scaled}')
    return LayerReport(float(t), tuple(layers), tuple(scaled), float(dyadic), identity)


def balayage_upper_estimate(
        mu: ms.HalfPlaneMeasure,
        t: float,
        n_range: ty.Tuple[int, int] = None,
        j_min: int = -40,
        sector: SectorSpec = None,
) -> float:
    """(1/pi) (sum over j_min <= j < 0 of 2^(2j) S^d_{mu,0}(2^j t) + S^d_mu(t)) for a sectorial mu"""
    check_sectorial(mu, sector, limit=LAYER_ANGLE)
    masses = _SectorMasses(mu)
    n_range = cell_range(mu) if n_range is None else n_range
    lower = sum(4.0 ** j * _principal_layer(masses, 2.0 ** j * t) for j in range(j_min, 0))
    dyadic = sum(masses(n) / 2.0 ** n for n in range(n_range[0], n_range[1] + 1) if _vertical_index(t, n) == 0)
    return (lower + dyadic) / math.pi


##########
# Maximal function
def _primitive(f: Sampled, points: np.ndarray) -> np.ndarray:
    """Exact integral of the interpolant of f from -inf to each point"""
    grid = f.grid
    cumulative = np.concatenate(([0.0], np.cumsum(np.diff(grid) * (f.values[:-1] + f.values[1:]) / 2)))
    inside = np.clip(points, grid[0], grid[-1])
    i = np.clip(np.searchsorted(grid, inside, side='right') - 1, 0, len(grid) - 2)
    h = inside - grid[i]
    slope = (f.values[i + 1] - f.values[i]) / (grid[i + 1] - grid[i])
    return cumulative[i] + h * (f.values[i] + slope * h / 2)


def maximal_function(f: Sampled, t: float) -> float:
    """sup over intervals [a, b] containing t, with a, b grid points or t itself, of the average of f"""
    if np.any(f.values < 0):
        raise ValueError('Maximal function is computed for nonnegative samples')
    points = np.union1d(f.grid, [t])
    primitive = _primitive(f, points)
    at = int(np.searchsorted(points, t))
    left = points[:at + 1]
    right = points[at:]
    width = right[None, :] - left[:, None]
    mass = primitive[at:][None, :] - primitive[:at + 1][:, None]
    with np.errstate(divide='ignore', invalid='ignore'):
        averages = np.where(width > 0, mass / width, 0.0)
    # Degenerate interval {t}: the value of f at t
    return float(max(averages.max(initial=0.0), float(f(t))))


@dc.dataclass(frozen=True)
class MaximalEstimate:
    """Largest |L f(z)| / (2^(-n+1) M f(2^(-n+1))) over sampled z in T_n"""
    constant: float
    witness: ty.Optional[ty.Tuple[int, complex]]
    rows: ty.Tuple[ty.Tuple[int, complex, float], ...] = ()


def maximal_estimate_constant(
        f: Sampled,
        n_range: ty.Tuple[int, int],
        samples: int = 16,
        seed: int = 0,
) -> MaximalEstimate:
    rng = np.random.default_rng(seed)
    best = (0.0, None)
    rows = []
    for n in range(n_range[0], n_range[1] + 1):
        s = 2.0 ** (-n + 1)
        bound = s * maximal_function(f, s)
        if bound <= 0:
            continue
        side = 2.0 ** n
        xs = side / 2 + side / 2 * (1 - rng.random(samples))
        ys = side * (0.5 - rng.random(samples))
        for z in xs + 1j * ys:
            ratio = abs(f.laplace(z)) / bound
            rows.append((n, complex(z), float(ratio)))
            if ratio > best[0]:
                best = (float(ratio), (n, complex(z)))
    return MaximalEstimate(best[0], best[1], tuple(rows))
