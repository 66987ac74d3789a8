"""
Adapted radius sequences, their geometric refinement, tiles, and the stage-by-stage decomposition of a measure
    dominated by a Zen measure into pieces supported on nested half planes.
"""
import dataclasses as dc
import logging
import math
import typing as ty

import numpy as np
from django.conf import settings

from carleson_lab.analysis import measure as ms
from carleson_lab.analysis.enums import TileType
from carleson_lab.analysis.exceptions import (
    CarlesonViolation,
    EmptyWindow,
    InvalidTiling,
    NotDoubling,
    ZeroMassNearOrigin,
)

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2)
REFINED_C = 1 - 1 / SQRT2

# Relative slack for the exact invariants, and for leftovers that count as "used up"
_SLACK = 1e-12


def growth_bounds(c: float) -> ty.Tuple[float, float]:
    """(1/(1-c), 1/(1-c)^2), exact for the reduced constant 1 - 1/sqrt(2)"""
    if c == REFINED_C:
        return SQRT2, 2.0
    return 1 / (1 - c), 1 / (1 - c) ** 2


##########
# Adapted sequences
@dc.dataclass(frozen=True)
class AdaptedSequence:
    indices: ty.Tuple[int, ...]
    a: ty.Tuple[float, ...]
    betas: ty.Tuple[float, ...]
    c: float = 0.5
    R: float = 1.0
    truncated: bool = False
    atom_at_zero: float = 0.0

    def __post_init__(self):
        if len(self.indices) != len(self.a):
            raise ValueError('Need exactly one radius per index')
        if any(b <= a for a, b in zip(self.a, self.a[1:])):
            raise ValueError('Adapted radii must be strictly increasing')

    @classmethod
    def from_radii(cls, a: ty.Sequence[float], start: int = 0, c: float = REFINED_C) -> 'AdaptedSequence':
        """A hand-made sequence with no underlying measure (betas left at zero)"""
        a = tuple(float(v) for v in a)
        return cls(tuple(range(start, start + len(a))), a, (0.0,) * max(len(a) - 1, 0), c=c)

    def __len__(self):
        return len(self.a)

    def radius(self, n: int) -> float:
        return self.a[self.indices.index(n)]

    def beta(self, n: int) -> float:
        """nu~([a_n, a_n+1))"""
        return self.betas[self.indices.index(n)]

    def separation(self) -> float:
        """min over n of (a_n+1 - a_n) / a_n+1"""
        if len(self.a) < 2:
            return 1.0
        a = np.array(self.a)
        return float(np.min((a[1:] - a[:-1]) / a[1:]))

    def beta_ratios(self) -> np.ndarray:
        betas = np.array(self.betas)
        if len(betas) < 2:
            return np.zeros(0)
        return betas[1:] / betas[:-1]


def _bracket(F: ty.Callable[[float], float], threshold: float) -> ty.Tuple[float, float]:
    lo, hi = 0.0, 1.0
    if F(hi) <= threshold:
        lo = hi
        while F(hi) <= threshold:
            lo, hi = hi, hi * 2
    else:
        while hi > 1e-300 and F(hi / 2) > threshold:
            hi /= 2
        lo = hi / 2
    return lo, hi


def cdf_sup(nu: ms.RadialMeasure, threshold: float, steps: int = None) -> float:
    """
    sup{r >= 0 : F(r) <= threshold}, or inf when F never exceeds the threshold. Bisection keeps the upper bracket, so
        jumps of F resolve to the jump location.
    """
    if nu.total_mass() <= threshold:
        return math.inf
    exact = nu.cdf_inverse(threshold)
    if exact is not None:
        return exact

    steps = settings.CARLESON_LAB['BISECTION_STEPS'] if steps is None else steps
    lo, hi = _bracket(nu.cdf, threshold)
    for _ in range(steps):
        mid = (lo + hi) / 2
        if nu.cdf(mid) <= threshold:
            lo = mid
        else:
            hi = mid
    return hi


def build_adapted_sequence(nu: ms.RadialMeasure, window: ty.Tuple[int, int] = None) -> AdaptedSequence:
    """
    a_n = sup{r : F(r) <= (2R)^(2n)} over the index window. With an atom at the origin a_0 = 0 and the thresholds
        become (2R)^(2(n+1)) nu~({0}) for n >= 1. The window stops at the first index whose supremum is infinite.
    """
    window = tuple(settings.CARLESON_LAB['INDEX_WINDOW'] if window is None else window)
    n_min, n_max = window
    if n_max < n_min:
        raise EmptyWindow(f'Index window {window} is empty')

    try:
        info = ms.doubling_constant(nu)
    except ZeroMassNearOrigin as e:
        raise NotDoubling(str(e))
    if info.exceeds_cap:
        raise NotDoubling(f'Doubling ratio {info.R:.6g} at t={info.sup_location:.6g} exceeds the configured cap')
    R = info.R
    base = 2 * R

    m0 = nu.atom_at_zero
    indices = []
    radii = []
    truncated = False
    if m0 > 0:
        indices.append(0)
        radii.append(0.0)
        candidates = range(max(n_min, 1), n_max + 1)
    else:
        candidates = range(n_min, n_max + 1)

    for n in candidates:
        threshold = base ** (2 * (n + 1)) * m0 if m0 > 0 else base ** (2 * n)
        radius = cdf_sup(nu, threshold)
        if not math.isfinite(radius):
            truncated = True
            logger.info(f'Adapted sequence stops at n={n}: the defining supremum is infinite')
            break
        indices.append(n)
        radii.append(radius)

    if not radii:
        raise EmptyWindow(f'No finite radius in window {window}')

    betas = tuple(nu.cdf(b) - nu.cdf(a) for a, b in zip(radii, radii[1:]))
    sequence = AdaptedSequence(tuple(indices), tuple(radii), betas, c=0.5, R=R, truncated=truncated,
                               atom_at_zero=m0)
    if len(radii) > 1 and sequence.separation() < 0.5 * (1 - _SLACK):
        logger.warning(f'Adapted sequence separation {sequence.separation():.6g} is below 1/2')
    return sequence


##########
# Geometric refinement
@dc.dataclass(frozen=True)
class RefinedSequence:
    b: ty.Tuple[float, ...]
    parent_index: ty.Tuple[ty.Optional[int], ...]
    c: float
    start_index: int

    def __len__(self):
        return len(self.b)

    def position_of(self, n: int) -> int:
        """j with b_j = a_n"""
        return self.parent_index.index(n)

    def ratios(self) -> np.ndarray:
        b = np.array(self.b)
        return b[1:] / b[:-1]

    def check(self) -> bool:
        """1/(1-c) b_j <= b_j+1 < b_j / (1-c)^2 for every j"""
        ratios = self.ratios()
        lower, upper = growth_bounds(self.c)
        return bool(np.all(ratios >= lower * (1 - _SLACK)) and np.all(ratios < upper * (1 + _SLACK)))


def refine_sequence(a: AdaptedSequence, N: int = None) -> RefinedSequence:
    """
    Starting at a_N, insert geometric intermediate points between consecutive radii whose ratio reaches
        1/(1-c)^2 = 2. The separation constant is first lowered to 1 - 1/sqrt(2).
    """
    N = a.indices[0] if N is None else N
    if N not in a.indices:
        raise ValueError(f'Start index {N} is outside the sequence')
    c = min(a.c, REFINED_C)
    _, upper = growth_bounds(c)

    start = a.indices.index(N)
    radii = a.a[start:]
    if radii[0] <= 0:
        raise ValueError('Refinement needs a_N > 0; start after the origin')

    b = [radii[0]]
    parents: ty.List[ty.Optional[int]] = [N]
    for k, (lo, hi) in enumerate(zip(radii, radii[1:]), start=start):
        rho = hi / lo
        if rho >= upper:
            splits = 2
            while rho ** (1 / splits) >= upper:
                splits += 1
            gamma = rho ** (1 / splits)
            b.extend(lo * gamma ** i for i in range(1, splits))
            parents.extend([None] * (splits - 1))
        b.append(hi)
        parents.append(a.indices[k + 1])

    refined = RefinedSequence(tuple(b), tuple(parents), c, N)
    if not refined.check():
        logger.warning('Refined sequence violates the geometric growth bounds; check the input radii')
    return refined


##########
# Tiles
@dc.dataclass(frozen=True)
class Tile:
    """T_{I,j} = [b_j, b_j+1) x I, with I possibly clipped at the top of the extent"""
    generation: int
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float
    size: float

    @property
    def area(self) -> float:
        return (self.x_hi - self.x_lo) * (self.y_hi - self.y_lo)

    def rectangle(self) -> ms.Box:
        """Q_{I,j} = (0, b_j+1) x I"""
        return ms.Box(0.0, self.x_hi, self.y_lo, self.y_hi)

    def box(self) -> ms.Box:
        return ms.Box(self.x_lo, self.x_hi, self.y_lo, self.y_hi)


@dc.dataclass(frozen=True)
class TileSet:
    tiles: ty.Tuple[Tile, ...]
    refined: RefinedSequence
    levels: ty.Tuple[int, ...]
    base: float
    extent: float
    y_origin: float

    @property
    def sizes(self) -> ty.Tuple[float, ...]:
        """Dyadic interval length paired with each generation"""
        return tuple(self.base * 2 ** m for m in self.levels)

    @property
    def cells(self) -> int:
        return int(round(self.extent / self.base))

    def x_edges(self) -> np.ndarray:
        return np.array(self.refined.b)

    def y_edges(self) -> np.ndarray:
        return self.y_origin + self.base * np.arange(self.cells + 1)

    def generation(self, j: int) -> ty.List[Tile]:
        return [t for t in self.tiles if t.generation == j]

    def interval_starts(self, j: int) -> np.ndarray:
        """First fine cell of every interval of generation j"""
        return np.arange(0, self.cells, 2 ** self.levels[j])

    def interval_counts(self, j: int) -> np.ndarray:
        starts = self.interval_starts(j)
        return np.diff(np.append(starts, self.cells))

    def area(self) -> float:
        return sum(t.area for t in self.tiles)

    def multiplicity(self) -> ty.Dict[float, int]:
        """How many generations share each interval size"""
        counts: ty.Dict[float, int] = {}
        for size in self.sizes:
            counts[size] = counts.get(size, 0) + 1
        return counts


def build_tiles(b: RefinedSequence, y_extent: float = None, y_origin: float = None) -> TileSet:
    """
    Pair every generation j with the one dyadic size |I| = a_N 2^m for which 1/sqrt(2) < b_j+1/|I| <= sqrt(2), and
        cut the strip [b_j, b_j+1) x [y_origin, y_origin + extent) into tiles of that size.
    """
    if len(b) < 2:
        raise InvalidTiling('Need at least two radii to form a tile generation')
    base = b.b[0]
    extent = settings.CARLESON_LAB['TILE_EXTENT_FACTOR'] * base if y_extent is None else float(y_extent)
    cells = extent / base
    if cells < 1 or abs(cells - round(cells)) > 1e-9 * cells:
        raise InvalidTiling(f'Extent {extent} is not a positive multiple of the minimal interval {base}')
    cells = int(round(cells))
    extent = cells * base
    y_origin = -extent / 2 if y_origin is None else float(y_origin)

    levels = []
    tiles = []
    for j, (lo, hi) in enumerate(zip(b.b, b.b[1:])):
        m = 0
        while hi / (base * 2 ** m) > SQRT2 * (1 + _SLACK):
            m += 1
        eccentricity = hi / (base * 2 ** m)
        if not eccentricity > 1 / SQRT2:
            raise InvalidTiling(f'Generation {j} has no dyadic size with bounded eccentricity')
        levels.append(m)

        step = 2 ** m
        for first in range(0, cells, step):
            y_lo = y_origin + first * base
            y_hi = y_origin + min(first + step, cells) * base
            tiles.append(Tile(j, lo, hi, y_lo, y_hi, base * step))

    tile_set = TileSet(tuple(tiles), b, tuple(levels), base, extent, y_origin)
    logger.debug(f'Built {len(tiles)} tiles over {len(levels)} generations; size multiplicity '
                 f'{tile_set.multiplicity()}')
    return tile_set


##########
# Decomposition
@dc.dataclass(frozen=True)
class TileRecord:
    """One step of the line-measure update: stage n, generation j, interval k"""
    stage: int
    generation: int
    y_lo: float
    y_hi: float
    tile_type: TileType
    line_mass: float
    tile_mass: float
    taken: float


@dc.dataclass(frozen=True)
class Decomposition:
    """
    mu restricted to the tiled region, split as a sum of parts mu_n (n from start_index). Cell tables hold the
        masses of every part on the grid of refined radii times fine dyadic cells.
    """
    parts: ty.Tuple[ms.HalfPlaneMeasure, ...]
    start_index: int
    stage_indices: ty.Tuple[int, ...]
    type_log: ty.Tuple[TileRecord, ...]
    tiles: TileSet
    line_densities: ty.Tuple[float, ...]
    tables: ty.Tuple[np.ndarray, ...] = dc.field(compare=False, repr=False)
    mass_table: np.ndarray = dc.field(compare=False, repr=False)
    observed_constant: float = 0.0
    truncation_loss: float = 0.0
    final_ratio: float = 0.0
    residual_mass: float = 0.0
    scale: float = 1.0

    def part(self, n: int) -> ms.HalfPlaneMeasure:
        return self.parts[self.stage_indices.index(n)]

    def part_masses(self) -> ty.Tuple[float, ...]:
        return tuple(float(t.sum()) for t in self.tables)

    def tile_mass_error(self) -> float:
        """Largest relative gap between sum of parts and mu over a tile"""
        total = sum(self.tables)
        worst = 0.0
        for j in range(len(self.tiles.levels)):
            starts = self.tiles.interval_starts(j)
            parts = np.add.reduceat(total[j], starts)
            whole = np.add.reduceat(self.mass_table[j], starts)
            scale = np.maximum(np.abs(whole), 1e-300)
            worst = max(worst, float(np.max(np.abs(parts - whole) / scale)))
        return worst

    def type_counts(self) -> ty.Dict[str, int]:
        counts = {t.name: 0 for t in TileType}
        for record in self.type_log:
            counts[record.tile_type.name] += 1
        return counts


def _stages(a: AdaptedSequence, b: RefinedSequence) -> ty.List[ty.Tuple[int, int, int]]:
    """(n, j_n, j_n+1) for every stage whose strip [a_n, a_n+1) lies in the refined sequence"""
    stages = []
    for n in a.indices:
        if n < b.start_index or n not in b.parent_index:
            continue
        j = b.position_of(n)
        if j + 1 >= len(b):
            continue
        nxt = [k for k in range(j + 1, len(b)) if b.parent_index[k] is not None][0]
        stages.append((n, j, nxt))
    return stages


def _line_densities(nu: ms.RadialMeasure, a: AdaptedSequence, stages) -> ty.List[float]:
    """The first stage lumps everything below a_N+1 onto the line Re z = a_N; later stages carry beta_n"""
    densities = []
    for pos, (n, _, _) in enumerate(stages):
        upper = a.radius(a.indices[a.indices.index(n) + 1])
        densities.append(nu.cdf(upper) if pos == 0 else a.beta(n))
    return densities


def _domination_ratio(tiles: TileSet, table: np.ndarray, line_mass: ty.Callable[[int], float]):
    """max over the rectangles Q_{I,j} of table(Q) / line(Q); returns (ratio, generation, first cell, cells)"""
    cumulative = np.cumsum(table, axis=0)
    best = (0.0, None, None, None)
    for j in range(cumulative.shape[0]):
        density = line_mass(j)
        starts = tiles.interval_starts(j)
        counts = tiles.interval_counts(j)
        mass = np.add.reduceat(cumulative[j], starts)
        comparison = density * tiles.base * counts
        with np.errstate(divide='ignore', invalid='ignore'):
            ratio = np.where(comparison > 0, mass / comparison, np.where(mass > 0, np.inf, 0.0))
        k = int(np.argmax(ratio))
        if ratio[k] > best[0]:
            best = (float(ratio[k]), j, int(starts[k]), int(counts[k]))
    return best


def _cell_lookup(x_edges: np.ndarray, y_edges: np.ndarray, fraction: np.ndarray):
    def lookup(z):
        z = np.asarray(z)
        i = np.searchsorted(x_edges, np.real(z), side='right') - 1
        j = np.searchsorted(y_edges, np.imag(z), side='right') - 1
        inside = (i >= 0) & (i < fraction.shape[0]) & (j >= 0) & (j < fraction.shape[1])
        return np.where(inside, fraction[np.clip(i, 0, fraction.shape[0] - 1), np.clip(j, 0, fraction.shape[1] - 1)],
                        0.0)
    return lookup


def _materialize(mu: ms.HalfPlaneMeasure, tiles: TileSet, fraction: np.ndarray) -> ms.HalfPlaneMeasure:
    """The part of mu that takes the given fraction of every cell"""
    x_edges = tiles.x_edges()
    y_edges = tiles.y_edges()
    lookup = _cell_lookup(x_edges, y_edges, fraction)

    atoms = tuple((z, m * float(lookup(z))) for z, m in mu.atoms)

    products = []
    for component in mu.products:
        if component.factor is not None:
            products.append(ms.ProductComponent(component.x, component.y,
                                                lambda z, f=component.factor: f(z) * lookup(z)))
            continue
        for i in range(fraction.shape[0]):
            row = fraction[i]
            x_part = component.x.restricted(x_edges[i], x_edges[i + 1])
            if x_part.is_zero():
                continue
            # Merge runs of equal fractions along y into one component
            start = 0
            for k in range(1, len(row) + 1):
                if k < len(row) and row[k] == row[start]:
                    continue
                if row[start] > 0:
                    y_part = component.y.restricted(y_edges[start], y_edges[k])
                    if y_part is not None:
                        products.append(ms.ProductComponent(x_part.scaled(row[start]), y_part))
                start = k

    planar = tuple(
        dc.replace(d, rho=lambda x, y, rho=d.rho: rho(x, y) * lookup(x + 1j * y),
                   x_breaks=tuple(sorted(set(d.x_breaks) | set(x_edges.tolist()))),
                   extent=(x_edges[-1], y_edges[0], y_edges[-1]))
        for d in mu.planar
    )
    return ms.HalfPlaneMeasure(atoms, tuple(products), planar, mu.include_boundary)


def decompose(
        mu: ms.HalfPlaneMeasure,
        nu: ms.RadialMeasure,
        tiles: TileSet,
        a: AdaptedSequence,
        scale_to_unit: bool = False,
) -> Decomposition:
    """
    Split mu into parts mu_n, stage by stage. Stage n sweeps the generations to the right of a_n and lets the line
        measure nu_n on Re z = a_n absorb tile masses in generation order: a tile whose interval still carries more
        line mass than the tile holds is taken whole (type 1), one with less takes the scaled share the line can still
        pay for (type 2), and one whose line mass is used up takes nothing (type 3).

    mu must satisfy mu(Q) <= nu(Q) on the rectangles of the tile family, with nu the discretized measure
        sum_n beta_n delta_{a_n} x Lebesgue. With scale_to_unit, mu is first divided by its constant instead.
    """
    b = tiles.refined
    stages = _stages(a, b)
    if not stages:
        raise InvalidTiling('No stage of the adapted sequence lies inside the tile set')
    densities = _line_densities(nu, a, stages)
    x_edges = tiles.x_edges()
    y_edges = tiles.y_edges()

    region = ms.Box(x_edges[0], x_edges[-1], y_edges[0], y_edges[-1])
    table = mu.grid_masses(x_edges, y_edges)
    tiled_mass = float(table.sum())
    total = mu.total_mass()
    truncation_loss = total - tiled_mass if math.isfinite(total) else math.inf
    if truncation_loss > _SLACK * max(total, 1.0):
        logger.warning(f'Mass {truncation_loss:.6g} of mu lies outside the tiled region and is not decomposed')

    def discretized(j: int) -> float:
        # Line masses of the discretized nu inside Q_{I,j}: every stage line strictly left of b_j+1
        return sum(d for (n, jn, _), d in zip(stages, densities) if b.b[jn] < b.b[j + 1])

    ratio, j, first, count = _domination_ratio(tiles, table, discretized)
    scale = 1.0
    if ratio > 1 + 1e-9:
        witness = ms.CarlesonSquare(y_edges[first] + tiles.sizes[j] / 2, tiles.sizes[j])
        if not scale_to_unit:
            raise CarlesonViolation(
                f'mu exceeds the discretized nu by a factor {ratio:.6g} on the rectangle over {witness.interval} '
                f'reaching b={b.b[j + 1]:.6g}',
                witness=witness, ratio=ratio,
            )
        scale = 1 / ratio
        table = table * scale
        logger.info(f'Scaled mu by {scale:.6g} so that its constant on the tile family is 1')

    remaining = table.copy()
    tables = []
    log = []
    observed = 0.0
    for pos, ((n, jn, jnext), density) in enumerate(zip(stages, densities)):
        line = np.full(tiles.cells, density * tiles.base)
        part = np.zeros_like(remaining)
        for j in range(jn, len(x_edges) - 1):
            starts = tiles.interval_starts(j)
            counts = tiles.interval_counts(j)
            line_I = np.add.reduceat(line, starts)
            tile_I = np.add.reduceat(remaining[j], starts)

            exhausted = line_I <= 0
            full = ~exhausted & (line_I > tile_I)
            partial = ~exhausted & ~full

            fraction = np.zeros_like(line_I)
            line_scale = np.ones_like(line_I)
            fraction[full] = 1.0
            with np.errstate(divide='ignore', invalid='ignore'):
                leftover = np.where(full, (line_I - tile_I) / line_I, 0.0)
                fraction[partial] = np.where(tile_I[partial] > 0, line_I[partial] / tile_I[partial], 1.0)
            line_scale[full] = np.where(leftover[full] <= _SLACK, 0.0, leftover[full])
            line_scale[partial] = 0.0

            part[j] += remaining[j] * np.repeat(fraction, counts)
            line *= np.repeat(line_scale, counts)

            for k, start in enumerate(starts):
                tile_type = TileType.exhausted if exhausted[k] else (TileType.full if full[k] else TileType.scaled)
                log.append(TileRecord(
                    n, j, float(y_edges[start]), float(y_edges[start + counts[k]]), tile_type,
                    float(line_I[k]), float(tile_I[k]), float(tile_I[k] * fraction[k]),
                ))

        # The strip [a_n, a_n+1) belongs to this stage alone
        leftover = remaining[jn:jnext] - part[jn:jnext]
        strip_mass = float(remaining[jn:jnext].sum())
        if strip_mass > 0 and float(leftover.sum()) > _SLACK * strip_mass:
            logger.warning(f'Stage {n} left {float(leftover.sum()):.6g} in its own strip; moved into the part')
        part[jn:jnext] = remaining[jn:jnext]

        remaining = remaining - part
        remaining[remaining < 0] = 0.0
        tables.append(part)

        ratio, *_ = _domination_ratio(tiles, part, lambda j, d=density, jn=jn: d if j >= jn else 0.0)
        observed = max(observed, ratio)

    residual = float(remaining.sum())
    if residual > _SLACK * max(tiled_mass, 1e-300):
        logger.warning(f'Mass {residual:.6g} was not absorbed by the last stage; added to the final part')
    tables[-1] = tables[-1] + remaining

    # Residual joins the last part after that part was checked
    _, last_jn, _ = stages[-1]
    final_ratio, j, first, _ = _domination_ratio(
        tiles, tables[-1], lambda j, d=densities[-1], jn=last_jn: d if j >= jn else 0.0)
    observed = max(observed, final_ratio)
    if final_ratio > 1 + 1e-9:
        witness = ms.CarlesonSquare(y_edges[first] + tiles.sizes[j] / 2, tiles.sizes[j])
        raise CarlesonViolation(
            f'Part {stages[-1][0]} exceeds its line measure by a factor {final_ratio:.6g} on the rectangle over '
            f'{witness.interval} once the residual {residual:.6g} is added',
            witness=witness, ratio=final_ratio,
        )

    restricted = mu.restricted(region).scaled(scale) if scale != 1 else mu.restricted(region)
    parts = []
    for part in tables:
        with np.errstate(divide='ignore', invalid='ignore'):
            fraction = np.where(table > 0, part / table, 0.0)
        parts.append(_materialize(restricted, tiles, np.clip(fraction, 0.0, 1.0)))

    return Decomposition(
        parts=tuple(parts),
        start_index=stages[0][0],
        stage_indices=tuple(n for n, _, _ in stages),
        type_log=tuple(log),
        tiles=tiles,
        line_densities=tuple(densities),
        tables=tuple(tables),
        mass_table=table,
        observed_constant=observed,
        truncation_loss=truncation_loss,
        final_ratio=final_ratio,
        residual_mass=residual,
        scale=scale,
    )


def shifted_carleson_constant(mu_n: ms.HalfPlaneMeasure, shift: float, family: ms.SquareFamily = None) -> float:
    """sup over squares {shift < x < shift + |I|} x I of mu_n(Q) / |I|"""
    family = ms.square_family(mu_n) if family is None else family
    return ms.carleson_ratio_sup(mu_n, ms.power_gauge(1.0), family, shift=shift).constant


@dc.dataclass(frozen=True)
class NormBounds:
    lower: float
    upper: float
    terms: ty.Tuple[ty.Tuple[int, float, float, float], ...] = ()


def discretized_norm_bounds(F: ty.Callable[[complex], complex], a: AdaptedSequence, p: float = 2.0) -> NormBounds:
    """
    sum beta_n ||F||^p on Re z = a_n+1  <=  integral of ||F||^p on Re z = r against nu~ over [a_first, a_last)
        <=  sum beta_n ||F||^p on Re z = a_n. Terms are (n, beta_n, line norm at a_n, line norm at a_n+1).
    """
    from carleson_lab.analysis.transforms import hardy_line_norm

    if len(a) < 2:
        raise EmptyWindow('Norm bounds need at least two radii')
    norms = [hardy_line_norm(F, r, p) for r in a.a]
    terms = tuple(
        (n, beta, norms[k], norms[k + 1])
        for k, (n, beta) in enumerate(zip(a.indices, a.betas))
    )
    lower = sum(beta * hi for _, beta, _, hi in terms)
    upper = sum(beta * lo for _, beta, lo, _ in terms)
    return NormBounds(lower, upper, terms)
