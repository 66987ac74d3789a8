"""
Radial measures on [0, inf), measures on the closed right half plane, and mass-of-region queries.

Every interval is half-open [lo, hi) unless a caller asks otherwise. The cumulative function F(r) is the mass
    of [0, r), so it is left-continuous and an atom at r only counts for radii strictly beyond r.
"""
import dataclasses as dc
import functools
import logging
import math
import typing as ty

import numpy as np
from django.conf import settings

from carleson_lab.analysis import quadrature
from carleson_lab.analysis.exceptions import (
    EmptyFamily,
    InvalidMeasure,
    UnsupportedMeasure,
    ZeroMassNearOrigin,
)

logger = logging.getLogger(__name__)

INF = math.inf


def _overlap(lo: float, hi: float, a: float, b: float) -> ty.Tuple[float, float]:
    return max(lo, a), min(hi, b)


def _inside(v: float, lo: float, hi: float, closed: ty.Tuple[bool, bool]) -> bool:
    above = v > lo or (closed[0] and v == lo)
    below = v < hi or (closed[1] and v == hi)
    return above and below


##########
# Density pieces of a radial measure
@dc.dataclass(frozen=True)
class PowerPiece:
    """Density coeff * r**alpha on [lo, hi)"""
    lo: float
    hi: float
    coeff: float
    alpha: float

    kind: ty.ClassVar[str] = 'power'

    def __post_init__(self):
        for name in ('lo', 'hi', 'coeff', 'alpha'):
            object.__setattr__(self, name, float(getattr(self, name)))

        if not (0 <= self.lo < self.hi):
            raise InvalidMeasure(f'Power piece needs 0 <= lo < hi, got [{self.lo}, {self.hi})')
        if self.coeff < 0:
            raise InvalidMeasure('Power piece coefficient must be nonnegative')
        if self.lo == 0 and self.alpha <= -1:
            raise InvalidMeasure(f'Power piece touching 0 needs alpha > -1 (got {self.alpha})')

    def density(self, r):
        r = np.asarray(r, dtype=float)
        inside = (r >= self.lo) & (r < self.hi)
        with np.errstate(divide='ignore', invalid='ignore'):
            values = self.coeff * np.where(inside, r, 1.0) ** self.alpha
        return np.where(inside, values, 0.0)

    def _antiderivative(self, r: float) -> float:
        a = self.alpha + 1
        if a == 0:
            return math.log(r)
        if r == INF:
            return 0.0 if a < 0 else INF
        return r ** a / a

    def mass(self, lo: float, hi: float) -> float:
        u, v = _overlap(self.lo, self.hi, lo, hi)
        if v <= u or self.coeff == 0:
            return 0.0
        if v == INF and self.alpha >= -1:
            return INF
        return self.coeff * (self._antiderivative(v) - self._antiderivative(u))

    def scaled(self, c: float) -> 'PowerPiece':
        return dc.replace(self, coeff=self.coeff * c)

    def restricted(self, lo: float, hi: float) -> ty.Optional['PowerPiece']:
        u, v = _overlap(self.lo, self.hi, lo, hi)
        if v <= u:
            return None
        return dc.replace(self, lo=u, hi=v)

    def pushed(self, k: float) -> 'PowerPiece':
        """Image under r -> k r"""
        return PowerPiece(self.lo * k, self.hi * k, self.coeff * k ** (-self.alpha - 1), self.alpha)


@dc.dataclass(frozen=True)
class SampledPiece:
    """Tabulated density on [nodes[0], nodes[-1]), linear between samples"""
    nodes: ty.Tuple[float, ...]
    values: ty.Tuple[float, ...]

    kind: ty.ClassVar[str] = 'samples'

    def __post_init__(self):
        nodes = tuple(float(n) for n in self.nodes)
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, 'nodes', nodes)
        object.__setattr__(self, 'values', values)

        if len(nodes) < 2 or len(nodes) != len(values):
            raise InvalidMeasure('Sampled piece needs at least two nodes and one value per node')
        if any(b <= a for a, b in zip(nodes, nodes[1:])):
            raise InvalidMeasure('Sampled piece nodes must be strictly increasing')
        if nodes[0] < 0 or not math.isfinite(nodes[-1]):
            raise InvalidMeasure('Sampled piece must lie inside [0, inf)')
        if any(v < 0 for v in values):
            raise InvalidMeasure('Sampled densities must be nonnegative')

    @property
    def lo(self) -> float:
        return self.nodes[0]

    @property
    def hi(self) -> float:
        return self.nodes[-1]

    @functools.cached_property
    def _arrays(self):
        x = np.array(self.nodes)
        y = np.array(self.values)
        cumulative = np.concatenate([[0.0], np.cumsum(np.diff(x) * (y[1:] + y[:-1]) / 2)])
        return x, y, cumulative

    def density(self, r):
        x, y, _ = self._arrays
        r = np.asarray(r, dtype=float)
        inside = (r >= self.lo) & (r < self.hi)
        return np.where(inside, np.interp(r, x, y), 0.0)

    def _primitive(self, r: float) -> float:
        """Exact integral of the interpolant from the first node to r"""
        x, y, cumulative = self._arrays
        r = min(max(r, self.lo), self.hi)
        i = min(int(np.searchsorted(x, r, side='right')) - 1, len(x) - 2)
        fr = float(np.interp(r, x, y))
        return float(cumulative[i] + (r - x[i]) * (y[i] + fr) / 2)

    def mass(self, lo: float, hi: float) -> float:
        u, v = _overlap(self.lo, self.hi, lo, hi)
        if v <= u:
            return 0.0
        return self._primitive(v) - self._primitive(u)

    def scaled(self, c: float) -> 'SampledPiece':
        return SampledPiece(self.nodes, tuple(v * c for v in self.values))

    def restricted(self, lo: float, hi: float) -> ty.Optional['SampledPiece']:
        u, v = _overlap(self.lo, self.hi, lo, hi)
        if v <= u:
            return None
        inner = [n for n in self.nodes if u < n < v]
        nodes = [u, *inner, v]
        return SampledPiece(tuple(nodes), tuple(float(np.interp(n, self.nodes, self.values)) for n in nodes))

    def pushed(self, k: float) -> 'SampledPiece':
        return SampledPiece(tuple(n * k for n in self.nodes), tuple(v / k for v in self.values))


DensityPiece = ty.Union[PowerPiece, SampledPiece]


##########
# Radial measures
@dc.dataclass(frozen=True)
class RadialMeasure:
    """
    A positive measure on [0, inf): an atom at the origin, finitely many atoms at r > 0, and disjoint density pieces.

    Zen measures are nu = nu~ (x) Lebesgue; the Hardy space is nu~ = delta_0 and the standard weighted Bergman spaces
        are nu~ = r**alpha dr.
    """
    atom_at_zero: float = 0.0
    atoms: ty.Tuple[ty.Tuple[float, float], ...] = ()
    pieces: ty.Tuple[DensityPiece, ...] = ()

    def __post_init__(self):
        atom_at_zero = float(self.atom_at_zero)
        atoms = tuple((float(r), float(m)) for r, m in self.atoms)
        pieces = tuple(sorted(self.pieces, key=lambda p: p.lo))
        object.__setattr__(self, 'atom_at_zero', atom_at_zero)
        object.__setattr__(self, 'atoms', atoms)
        object.__setattr__(self, 'pieces', pieces)

        if atom_at_zero < 0:
            raise InvalidMeasure('Atom at zero must have nonnegative mass')
        if any(m < 0 for _, m in atoms):
            raise InvalidMeasure('Atom masses must be nonnegative')
        if any(r <= 0 or not math.isfinite(r) for r, _ in atoms):
            raise InvalidMeasure('Atoms away from the origin need a finite location r > 0')
        if any(b[0] <= a[0] for a, b in zip(atoms, atoms[1:])):
            raise InvalidMeasure('Atoms must be strictly ordered by location')
        if any(b.lo < a.hi for a, b in zip(pieces, pieces[1:])):
            raise InvalidMeasure('Density pieces must be disjoint')

    ##########
    # Constructors for the standard families
    @classmethod
    def dirac(cls, mass: float = 1.0) -> 'RadialMeasure':
        """Unit mass at the origin: the Hardy space case"""
        return cls(atom_at_zero=mass)

    @classmethod
    def power(cls, alpha: float, coeff: float = 1.0) -> 'RadialMeasure':
        return cls(pieces=(PowerPiece(0.0, INF, coeff, alpha),))

    @classmethod
    def lebesgue(cls, coeff: float = 1.0) -> 'RadialMeasure':
        return cls.power(0.0, coeff)

    def family(self) -> ty.Optional[str]:
        """Name of the closed-form family this measure belongs to, if any: hardy, lebesgue or power"""
        if not self.atoms and not self.pieces and self.atom_at_zero > 0:
            return 'hardy'
        if self.atom_at_zero == 0 and not self.atoms and len(self.pieces) == 1:
            piece = self.pieces[0]
            if isinstance(piece, PowerPiece) and piece.lo == 0 and piece.hi == INF:
                return 'lebesgue' if piece.alpha == 0 else 'power'
        return None

    ##########
    # Mass queries
    def cdf(self, r: float) -> float:
        """F(r) = mass of [0, r)"""
        if r < 0:
            raise ValueError(f'Radial cdf is defined for r >= 0 (got {r})')
        return self.mass(0.0, r)

    def mass(self, lo: float, hi: float, closed: ty.Tuple[bool, bool] = (True, False)) -> float:
        total = 0.0
        if self.atom_at_zero and _inside(0.0, lo, hi, closed):
            total += self.atom_at_zero
        for r, m in self.atoms:
            if _inside(r, lo, hi, closed):
                total += m
        for piece in self.pieces:
            total += piece.mass(lo, hi)
        return total

    def total_mass(self) -> float:
        return self.mass(0.0, INF, closed=(True, True))

    def integrate(self, h: ty.Callable[[float], float], lo: float = 0.0, hi: float = INF,
                  closed: ty.Tuple[bool, bool] = (True, False)) -> float:
        """Integral of h against the measure over an interval. Atoms are exact; densities use quadrature."""
        total = 0.0
        if self.atom_at_zero and _inside(0.0, lo, hi, closed):
            total += self.atom_at_zero * h(0.0)
        for r, m in self.atoms:
            if _inside(r, lo, hi, closed) and m:
                total += m * h(r)
        for piece in self.pieces:
            u, v = _overlap(piece.lo, piece.hi, lo, hi)
            if v <= u:
                continue

            def g(r, piece=piece):
                return float(piece.density(r)) * h(r)

            if v == INF:
                total += quadrature.integrate_to_infinity(g, u, scale=max(u, 1.0))
            else:
                total += quadrature.integrate(g, u, v)
        return total

    def cdf_inverse(self, threshold: float) -> ty.Optional[float]:
        """
        sup{r : F(r) <= threshold} in closed form for a single power piece starting at 0. Returns None when no
            closed form applies.
        """
        if self.family() not in ('lebesgue', 'power'):
            return None
        piece = self.pieces[0]
        a = piece.alpha + 1
        return (a * threshold / piece.coeff) ** (1 / a)

    ##########
    # Support and transformations
    def support(self) -> ty.Tuple[float, float]:
        points = []
        if self.atom_at_zero:
            points.append(0.0)
        points.extend(r for r, m in self.atoms if m)
        for piece in self.pieces:
            points.extend([piece.lo, piece.hi])
        if not points:
            return (INF, -INF)
        return (min(points), max(points))

    def breakpoints(self) -> ty.Tuple[float, ...]:
        """Locations where F jumps or a density starts or stops"""
        points = {r for r, _ in self.atoms}
        for piece in self.pieces:
            points.update(p for p in (piece.lo, piece.hi) if math.isfinite(p))
        return tuple(sorted(points))

    def is_zero(self) -> bool:
        return self.total_mass() == 0

    def scaled(self, c: float) -> 'RadialMeasure':
        return RadialMeasure(
            self.atom_at_zero * c,
            tuple((r, m * c) for r, m in self.atoms),
            tuple(p.scaled(c) for p in self.pieces),
        )

    def restricted(self, lo: float, hi: float) -> 'RadialMeasure':
        """Restriction to [lo, hi)"""
        pieces = [p.restricted(lo, hi) for p in self.pieces]
        return RadialMeasure(
            self.atom_at_zero if _inside(0.0, lo, hi, (True, False)) else 0.0,
            tuple((r, m) for r, m in self.atoms if lo <= r < hi),
            tuple(p for p in pieces if p is not None),
        )

    def pushed(self, k: float) -> 'RadialMeasure':
        """Image measure under r -> k r"""
        return RadialMeasure(
            self.atom_at_zero,
            tuple((r * k, m) for r, m in self.atoms),
            tuple(p.pushed(k) for p in self.pieces),
        )


def radial_cdf(nu: RadialMeasure, r: float) -> float:
    return nu.cdf(r)


##########
# Vertical profiles and half-plane components
@dc.dataclass(frozen=True)
class YProfile:
    """
    The vertical factor of a product component: a unit point mass at y0, or a uniform density on [lo, hi) (either
        end may be infinite, which gives Lebesgue measure on the whole line).
    """
    kind: str
    lo: float
    hi: float
    density: float = 1.0

    def __post_init__(self):
        for name in ('lo', 'hi', 'density'):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.kind not in ('point', 'uniform'):
            raise InvalidMeasure(f'Unknown vertical profile kind: {self.kind}')
        if self.kind == 'point' and self.lo != self.hi:
            raise InvalidMeasure('Point profiles have lo == hi')
        if self.kind == 'uniform' and not self.lo < self.hi:
            raise InvalidMeasure('Uniform profiles need lo < hi')
        if self.density < 0:
            raise InvalidMeasure('Vertical density must be nonnegative')

    @classmethod
    def point(cls, y0: float = 0.0) -> 'YProfile':
        return cls('point', y0, y0, 1.0)

    @classmethod
    def uniform(cls, lo: float, hi: float, density: float = 1.0) -> 'YProfile':
        return cls('uniform', lo, hi, density)

    @classmethod
    def lebesgue(cls, density: float = 1.0) -> 'YProfile':
        return cls('uniform', -INF, INF, density)

    def mass(self, lo: float, hi: float, closed: ty.Tuple[bool, bool] = (True, False)) -> float:
        if self.kind == 'point':
            return self.density if _inside(self.lo, lo, hi, closed) else 0.0
        u, v = _overlap(self.lo, self.hi, lo, hi)
        return self.density * (v - u) if v > u else 0.0

    def integrate(self, g: ty.Callable[[float], float], lo: float = -INF, hi: float = INF,
                  closed: ty.Tuple[bool, bool] = (True, False), center: float = None) -> float:
        if self.kind == 'point':
            return self.density * g(self.lo) if _inside(self.lo, lo, hi, closed) else 0.0
        u, v = _overlap(self.lo, self.hi, lo, hi)
        if v <= u:
            return 0.0
        if math.isfinite(u) and math.isfinite(v):
            return self.density * quadrature.integrate(g, u, v)
        if u == -INF and v == INF:
            return self.density * quadrature.integrate_line(g, center=center or 0.0)
        if v == INF:
            return self.density * quadrature.integrate_to_infinity(g, u, scale=max(abs(u), 1.0))
        return self.density * quadrature.integrate_to_infinity(lambda s: g(-s), -v, scale=max(abs(v), 1.0))

    def support(self) -> ty.Tuple[float, float]:
        return (self.lo, self.hi)

    def scaled(self, c: float) -> 'YProfile':
        return dc.replace(self, density=self.density * c)

    def translated(self, s: float) -> 'YProfile':
        return dc.replace(self, lo=self.lo + s, hi=self.hi + s)

    def mirrored(self) -> 'YProfile':
        return dc.replace(self, lo=-self.hi, hi=-self.lo)

    def pushed(self, k: float) -> 'YProfile':
        """Image under y -> k y (k > 0)"""
        if self.kind == 'point':
            return dc.replace(self, lo=self.lo * k, hi=self.hi * k)
        return dc.replace(self, lo=self.lo * k, hi=self.hi * k, density=self.density / k)

    def restricted(self, lo: float, hi: float) -> ty.Optional['YProfile']:
        if self.kind == 'point':
            return self if lo <= self.lo < hi else None
        u, v = _overlap(self.lo, self.hi, lo, hi)
        return dc.replace(self, lo=u, hi=v) if v > u else None


@dc.dataclass(frozen=True)
class Box:
    """Axis-aligned region; closed flags say which ends of each side belong to it"""
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float
    x_closed: ty.Tuple[bool, bool] = (True, False)
    y_closed: ty.Tuple[bool, bool] = (True, False)

    def contains(self, z: complex) -> bool:
        return _inside(z.real, self.x_lo, self.x_hi, self.x_closed) and _inside(z.imag, self.y_lo, self.y_hi,
                                                                              self.y_closed)

    @classmethod
    def everything(cls) -> 'Box':
        return cls(0.0, INF, -INF, INF, (True, True), (True, True))


@dc.dataclass(frozen=True)
class ProductComponent:
    """x-profile (a radial measure in Re z) times y-profile, optionally multiplied by a density factor"""
    x: RadialMeasure
    y: YProfile
    factor: ty.Optional[ty.Callable] = dc.field(default=None, compare=False)

    def box_mass(self, box: Box) -> float:
        if self.factor is None:
            ym = self.y.mass(box.y_lo, box.y_hi, box.y_closed)
            if ym == 0:
                return 0.0
            return self.x.mass(box.x_lo, box.x_hi, box.x_closed) * ym
        return self.integrate(lambda z: 1.0, box)

    def integrate(self, g: ty.Callable[[complex], float], box: Box = None, center: float = None) -> float:
        box = box or Box.everything()
        factor = self.factor

        def line(r):
            def h(s):
                z = complex(r, s)
                value = g(z)
                return value * factor(z) if factor is not None else value
            return self.y.integrate(h, box.y_lo, box.y_hi, box.y_closed, center=center)

        return self.x.integrate(line, box.x_lo, box.x_hi, box.x_closed)

    def total_mass(self) -> float:
        return self.box_mass(Box.everything())


@dc.dataclass(frozen=True)
class PlanarDensity:
    """
    A 2-D density rho(x, y), vectorized over numpy arrays. Masses are only available over bounded boxes unless an
        extent (x_hi, y_lo, y_hi) bounding the support is given.
    """
    rho: ty.Callable = dc.field(compare=False)
    x_breaks: ty.Tuple[float, ...] = ()
    extent: ty.Optional[ty.Tuple[float, float, float]] = None
    label: str = ''

    def _clip(self, box: Box) -> Box:
        if self.extent is None:
            return box
        x_hi, y_lo, y_hi = self.extent
        return Box(box.x_lo, min(box.x_hi, x_hi), max(box.y_lo, y_lo), min(box.y_hi, y_hi))

    def box_mass(self, box: Box) -> float:
        return self.integrate(None, box)

    def integrate(self, g, box: Box = None) -> float:
        box = self._clip(box or Box.everything())
        if not all(math.isfinite(v) for v in (box.x_hi, box.y_lo, box.y_hi)):
            raise UnsupportedMeasure(f'Planar density {self.label!r} has unbounded support; restrict it first')
        rho = self.rho

        def integrand(x, y):
            values = rho(x, y)
            return values if g is None else values * g(x + 1j * y)

        return quadrature.integrate_box(integrand, max(box.x_lo, 0.0), box.x_hi, box.y_lo, box.y_hi,
                                        x_breaks=self.x_breaks)

    def sample(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        grid_x, grid_y = np.meshgrid(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float), indexing='ij')
        return self.rho(grid_x, grid_y)


def _merge_atoms(atoms) -> ty.Tuple[ty.Tuple[complex, float], ...]:
    merged: ty.Dict[complex, float] = {}
    for z, m in atoms:
        z = complex(z)
        m = float(m)
        if z.real < 0:
            raise InvalidMeasure(f'Atom at {z} lies outside the closed right half plane')
        if m < 0 or not math.isfinite(m):
            raise InvalidMeasure(f'Atom at {z} has invalid mass {m}')
        if m == 0:
            continue
        merged[z] = merged.get(z, 0.0) + m
    return tuple(sorted(merged.items(), key=lambda item: (item[0].real, item[0].imag)))


@dc.dataclass(frozen=True)
class HalfPlaneMeasure:
    """
    A positive measure on the closed right half plane: atoms, product components and planar densities.

    include_boundary decides whether mass on the line Re z = 0 counts inside Carleson squares.
    """
    atoms: ty.Tuple[ty.Tuple[complex, float], ...] = ()
    products: ty.Tuple[ProductComponent, ...] = ()
    planar: ty.Tuple[PlanarDensity, ...] = ()
    include_boundary: bool = True

    def __post_init__(self):
        object.__setattr__(self, 'atoms', _merge_atoms(self.atoms))
        object.__setattr__(self, 'products', tuple(self.products))
        object.__setattr__(self, 'planar', tuple(self.planar))

    ##########
    # Constructors
    @classmethod
    def zero(cls) -> 'HalfPlaneMeasure':
        return cls()

    @classmethod
    def from_atoms(cls, atoms: ty.Iterable[ty.Tuple[complex, float]]) -> 'HalfPlaneMeasure':
        return cls(atoms=tuple(atoms))

    @classmethod
    def product(cls, nu: RadialMeasure, y: YProfile = None) -> 'HalfPlaneMeasure':
        """nu~ (x) (vertical profile); with the default profile this is the Zen measure nu = nu~ (x) Lebesgue"""
        return cls(products=(ProductComponent(nu, y or YProfile.lebesgue()),))

    ##########
    # Vectorized atom data
    @functools.cached_property
    def _atom_arrays(self):
        if not self.atoms:
            empty = np.zeros(0)
            return empty, empty, empty
        z = np.array([a[0] for a in self.atoms], dtype=complex)
        m = np.array([a[1] for a in self.atoms], dtype=float)
        return z.real, z.imag, m

    def _atom_mask(self, box: Box) -> np.ndarray:
        x, y, _ = self._atom_arrays
        lo_x = (x > box.x_lo) | ((x == box.x_lo) & box.x_closed[0])
        hi_x = (x < box.x_hi) | ((x == box.x_hi) & box.x_closed[1])
        lo_y = (y > box.y_lo) | ((y == box.y_lo) & box.y_closed[0])
        hi_y = (y < box.y_hi) | ((y == box.y_hi) & box.y_closed[1])
        return lo_x & hi_x & lo_y & hi_y

    ##########
    # Mass queries
    def box_mass(self, box: Box) -> float:
        total = 0.0
        if self.atoms:
            total += float(self._atom_arrays[2][self._atom_mask(box)].sum())
        for component in self.products:
            total += component.box_mass(box)
        for component in self.planar:
            total += component.box_mass(box)
        return total

    def square_mass(self, square: 'CarlesonSquare') -> float:
        return self.box_mass(square.box(self.include_boundary))

    def total_mass(self) -> float:
        return self.box_mass(Box.everything())

    def integrate(self, g: ty.Callable, box: Box = None, center: float = None) -> float:
        """
        Integral of g against the measure (over a box if given). g must accept complex scalars, and numpy arrays
            as well when planar components are present.
        """
        box = box or Box.everything()
        total = 0.0
        if self.atoms:
            x, y, m = self._atom_arrays
            mask = self._atom_mask(box)
            if mask.any():
                values = np.array([g(complex(a, b)) for a, b in zip(x[mask], y[mask])], dtype=float)
                total += float(np.dot(m[mask], values))
        for component in self.products:
            total += component.integrate(g, box, center=center)
        for component in self.planar:
            total += component.integrate(g, box)
        return total

    def grid_masses(self, x_edges: ty.Sequence[float], y_edges: ty.Sequence[float]) -> np.ndarray:
        """Masses of the half-open cells [x_i, x_i+1) x [y_j, y_j+1)"""
        x_edges = np.asarray(x_edges, dtype=float)
        y_edges = np.asarray(y_edges, dtype=float)
        table = np.zeros((len(x_edges) - 1, len(y_edges) - 1))

        if self.atoms:
            x, y, m = self._atom_arrays
            i = np.searchsorted(x_edges, x, side='right') - 1
            j = np.searchsorted(y_edges, y, side='right') - 1
            keep = (i >= 0) & (i < table.shape[0]) & (j >= 0) & (j < table.shape[1])
            np.add.at(table, (i[keep], j[keep]), m[keep])

        for component in self.products:
            if component.factor is None:
                xm = np.array([component.x.mass(a, b) for a, b in zip(x_edges[:-1], x_edges[1:])])
                ym = np.array([component.y.mass(a, b) for a, b in zip(y_edges[:-1], y_edges[1:])])
                table += np.outer(xm, ym)
                continue
            for a in range(table.shape[0]):
                for b in range(table.shape[1]):
                    table[a, b] += component.box_mass(Box(x_edges[a], x_edges[a + 1], y_edges[b], y_edges[b + 1]))

        for component in self.planar:
            for a in range(table.shape[0]):
                for b in range(table.shape[1]):
                    table[a, b] += component.box_mass(Box(x_edges[a], x_edges[a + 1], y_edges[b], y_edges[b + 1]))
        return table

    ##########
    # Support and transformations
    def is_atomic(self) -> bool:
        return not self.products and not self.planar

    def is_zero(self) -> bool:
        return not self.atoms and all(c.total_mass() == 0 for c in self.products) and not self.planar

    def support_box(self) -> ty.Tuple[float, float, float, float]:
        """(x_min, x_max, y_min, y_max) of the support; infinite where the support is unbounded"""
        xs = []
        ys = []
        for z, _ in self.atoms:
            xs.append(z.real)
            ys.append(z.imag)
        for component in self.products:
            if component.x.is_zero():
                continue
            xs.extend(component.x.support())
            ys.extend(component.y.support())
        for component in self.planar:
            if component.extent is None:
                return (0.0, INF, -INF, INF)
            x_hi, y_lo, y_hi = component.extent
            xs.extend([0.0, x_hi])
            ys.extend([y_lo, y_hi])
        if not xs:
            return (INF, -INF, INF, -INF)
        return (min(xs), max(xs), min(ys), max(ys))

    def center_hints(self) -> ty.Tuple[float, ...]:
        """Vertical positions worth centering squares on: atoms and the ends and middles of vertical profiles"""
        hints = {z.imag for z, _ in self.atoms}
        for component in self.products:
            lo, hi = component.y.support()
            if component.y.kind == 'point':
                hints.add(lo)
                continue
            hints.update(v for v in (lo, hi) if math.isfinite(v))
            if math.isfinite(lo) and math.isfinite(hi):
                hints.add((lo + hi) / 2)
        return tuple(sorted(hints))

    def _map(self, atom, product, planar) -> 'HalfPlaneMeasure':
        return HalfPlaneMeasure(
            tuple(atom(z, m) for z, m in self.atoms),
            tuple(product(c) for c in self.products),
            tuple(planar(c) for c in self.planar),
            self.include_boundary,
        )

    def scaled(self, c: float) -> 'HalfPlaneMeasure':
        return self._map(
            lambda z, m: (z, m * c),
            lambda p: dc.replace(p, y=p.y.scaled(c)),
            lambda d: dc.replace(d, rho=lambda x, y, rho=d.rho: c * rho(x, y)),
        )

    def translated(self, s: float) -> 'HalfPlaneMeasure':
        """Vertical translate: the image under z -> z + i s"""
        def factor(p):
            if p.factor is None:
                return None
            return lambda z, f=p.factor: f(z - 1j * s)
        return self._map(
            lambda z, m: (z + 1j * s, m),
            lambda p: ProductComponent(p.x, p.y.translated(s), factor(p)),
            lambda d: dc.replace(
                d, rho=lambda x, y, rho=d.rho: rho(x, y - s),
                extent=None if d.extent is None else (d.extent[0], d.extent[1] + s, d.extent[2] + s),
            ),
        )

    def conjugated(self) -> 'HalfPlaneMeasure':
        def factor(p):
            if p.factor is None:
                return None
            return lambda z, f=p.factor: f(np.conj(z))
        return self._map(
            lambda z, m: (z.conjugate(), m),
            lambda p: ProductComponent(p.x, p.y.mirrored(), factor(p)),
            lambda d: dc.replace(
                d, rho=lambda x, y, rho=d.rho: rho(x, -y),
                extent=None if d.extent is None else (d.extent[0], -d.extent[2], -d.extent[1]),
            ),
        )

    def dilated(self, c: float) -> 'HalfPlaneMeasure':
        """The measure E -> mu(cE), i.e. the image of mu under z -> z / c"""
        if self.planar:
            raise UnsupportedMeasure('Dilation of planar densities is not supported')
        k = 1.0 / c

        def factor(p):
            if p.factor is None:
                return None
            return lambda z, f=p.factor: f(z * c)
        return self._map(
            lambda z, m: (z * k, m),
            lambda p: ProductComponent(p.x.pushed(k), p.y.pushed(k), factor(p)),
            lambda d: d,
        )

    def reweighted(self, weight: ty.Callable) -> 'HalfPlaneMeasure':
        """Multiply by a positive density factor w(z); w must accept complex scalars and arrays"""
        def factor(p):
            if p.factor is None:
                return weight
            return lambda z, f=p.factor: f(z) * weight(z)
        return self._map(
            lambda z, m: (z, m * float(weight(z))),
            lambda p: ProductComponent(p.x, p.y, factor(p)),
            lambda d: dc.replace(d, rho=lambda x, y, rho=d.rho: rho(x, y) * weight(x + 1j * y)),
        )

    def restricted(self, box: Box) -> 'HalfPlaneMeasure':
        atoms = tuple((z, m) for z, m in self.atoms if box.contains(z))
        products = []
        for p in self.products:
            y = p.y.restricted(box.y_lo, box.y_hi)
            x = p.x.restricted(box.x_lo, box.x_hi)
            if y is not None and not x.is_zero():
                products.append(ProductComponent(x, y, p.factor))
        planar = []
        for d in self.planar:
            def rho(x, y, d=d):
                inside = (x >= box.x_lo) & (x < box.x_hi) & (y >= box.y_lo) & (y < box.y_hi)
                return np.where(inside, d.rho(x, y), 0.0)
            extent = (box.x_hi, box.y_lo, box.y_hi)
            if d.extent is not None:
                extent = (min(extent[0], d.extent[0]), max(extent[1], d.extent[1]), min(extent[2], d.extent[2]))
            planar.append(dc.replace(d, rho=rho, extent=extent))
        return HalfPlaneMeasure(atoms, tuple(products), tuple(planar), self.include_boundary)

    def __add__(self, other: 'HalfPlaneMeasure') -> 'HalfPlaneMeasure':
        return HalfPlaneMeasure(
            self.atoms + other.atoms,
            self.products + other.products,
            self.planar + other.planar,
            self.include_boundary and other.include_boundary,
        )


def zen_measure(nu: RadialMeasure) -> HalfPlaneMeasure:
    """Materialize nu = nu~ (x) Lebesgue as a half-plane measure"""
    return HalfPlaneMeasure.product(nu)


##########
# Carleson squares and square families
@dc.dataclass(frozen=True)
class CarlesonSquare:
    """
    Q_I for the interval I of length `side` centered at center_y on the imaginary axis. I is half open, [lo, hi), so
        squares over adjacent intervals of one side length never share mass: an atom on the upper edge of I
        belongs to the square above.
    """
    center_y: float
    side: float

    def __post_init__(self):
        if not self.side > 0:
            raise ValueError('Carleson squares need a positive side')

    @property
    def interval(self) -> ty.Tuple[float, float]:
        return (self.center_y - self.side / 2, self.center_y + self.side / 2)

    def box(self, include_boundary: bool = True, shift: float = 0.0) -> Box:
        """
        Region {shift < x < shift + side} x [c - side/2, c + side/2). With shift 0, the boundary line x = 0 is
            included only when include_boundary is set.
        """
        lo, hi = self.interval
        closed_x = include_boundary and shift == 0
        return Box(shift, shift + self.side, lo, hi, (closed_x, False), (True, False))

    def translated(self, s: float) -> 'CarlesonSquare':
        return CarlesonSquare(self.center_y + s, self.side)

    def as_dict(self) -> dict:
        return {'center_y': self.center_y, 'side': self.side}


@dc.dataclass(frozen=True)
class DoublingInfo:
    R: float
    grid: ty.Tuple[float, ...]
    sup_location: float
    exceeds_cap: bool = False


def geometric_grid(lo: float, hi: float, points: int = None, ratio: float = None) -> np.ndarray:
    """Geometric grid from lo to hi, either with a fixed number of points or a fixed ratio"""
    if ratio is not None:
        count = int(math.floor(math.log(hi / lo) / math.log(ratio) + 1e-9)) + 1
        return lo * ratio ** np.arange(count)
    return np.geomspace(lo, hi, points)


def probe_grid() -> np.ndarray:
    conf = settings.CARLESON_LAB
    return geometric_grid(conf['PROBE_MIN'], conf['PROBE_MAX'], conf['PROBE_POINTS'])


def doubling_constant(nu: RadialMeasure, grid: ty.Sequence[float] = None) -> DoublingInfo:
    """sup over the probe grid of F(2t)/F(t); flags ratios above the configured cap"""
    grid = probe_grid() if grid is None else np.asarray(grid, dtype=float)
    best = 1.0
    where = float(grid[0])
    for t in grid:
        base = nu.cdf(t)
        if base <= 0:
            raise ZeroMassNearOrigin(f'F({t:.6g}) = 0: no mass near the origin')
        ratio = nu.cdf(2 * t) / base
        if ratio > best:
            best, where = ratio, float(t)
    cap = settings.CARLESON_LAB['DOUBLING_CAP']
    if best > cap:
        logger.warning(f'Doubling ratio {best:.6g} at t={where:.6g} exceeds cap {cap:.3g}')
    return DoublingInfo(best, tuple(float(t) for t in grid), where, best > cap)


def inverse_doubling_infimum(nu: RadialMeasure, M: float, grid: ty.Sequence[float] = None) -> float:
    """inf over the grid of F(M r)/F(r); the inverse doubling condition holds when this exceeds 1"""
    if not M > 1:
        raise ValueError('Inverse doubling needs M > 1')
    grid = probe_grid() if grid is None else np.asarray(grid, dtype=float)
    worst = INF
    for r in grid:
        base = nu.cdf(r)
        if base <= 0:
            raise ZeroMassNearOrigin(f'F({r:.6g}) = 0: no mass near the origin')
        worst = min(worst, nu.cdf(M * r) / base)
    return worst


def square_mass(mu: HalfPlaneMeasure, square: CarlesonSquare) -> float:
    return mu.square_mass(square)


def product_square_mass(nu: RadialMeasure, square: CarlesonSquare) -> float:
    """nu(Q_I) = |I| F(|I|) for the Zen measure of nu~"""
    return square.side * nu.cdf(square.side)


##########
# Gauges
class PowerGauge:
    """|I| ** s; s = 0 gives the constant gauge"""
    def __init__(self, exponent: float):
        self.exponent = float(exponent)

    def __call__(self, side: float) -> float:
        return 1.0 if self.exponent == 0 else side ** self.exponent

    def describe(self) -> str:
        return f'pow:{self.exponent!r}'


class MeasureGauge:
    """nu(Q_I) = |I| F(|I|) for a radial measure nu~"""
    def __init__(self, nu: RadialMeasure):
        self.nu = nu

    def __call__(self, side: float) -> float:
        return product_square_mass(self.nu, CarlesonSquare(0.0, side))

    def describe(self) -> str:
        return 'nu'


def power_gauge(exponent: float) -> PowerGauge:
    return PowerGauge(exponent)


def measure_gauge(nu: RadialMeasure) -> MeasureGauge:
    return MeasureGauge(nu)


def parse_gauge(text: str, nu: RadialMeasure = None):
    """pow:<s>, unit, or nu (requires a radial measure)"""
    text = text.strip()
    if text == 'unit':
        return PowerGauge(0.0)
    if text == 'nu':
        if nu is None:
            raise ValueError('Gauge "nu" needs a radial measure')
        return MeasureGauge(nu)
    if text.startswith('pow:'):
        return PowerGauge(float(text[4:]))
    raise ValueError(f'Unknown gauge: {text}')


@dc.dataclass(frozen=True)
class SquareFamily:
    squares: ty.Tuple[CarlesonSquare, ...]
    descriptor: ty.Dict[str, ty.Any] = dc.field(default_factory=dict, compare=False)

    def __len__(self):
        return len(self.squares)

    def translated(self, s: float) -> 'SquareFamily':
        return SquareFamily(tuple(q.translated(s) for q in self.squares), dict(self.descriptor, shift=s))


def square_family(
        mu: HalfPlaneMeasure = None,
        *,
        side_min: float = None,
        side_max: float = None,
        ratio: float = None,
        span: int = None,
        symmetric_only: bool = False,
        extra_sides: ty.Sequence[float] = (),
) -> SquareFamily:
    """
    Geometric side grid times a center grid. Centers are dyadic multiples of side/2 within `span` steps of 0, plus
        the vertical positions suggested by the measure. symmetric_only keeps squares centered at 0.

    The sup over a finite family is a lower bound for the sup over all squares.
    """
    conf = settings.CARLESON_LAB
    side_min = conf['SIDE_MIN'] if side_min is None else side_min
    side_max = conf['SIDE_MAX'] if side_max is None else side_max
    ratio = conf['SIDE_RATIO'] if ratio is None else ratio
    span = conf['CENTER_SPAN'] if span is None else span

    sides = sorted(set(geometric_grid(side_min, side_max, ratio=ratio).tolist()) | set(extra_sides))
    hints = () if (mu is None or symmetric_only) else mu.center_hints()

    squares = []
    for side in sides:
        if symmetric_only:
            centers = [0.0]
        else:
            centers = {k * side / 2 for k in range(-span, span + 1)}
            centers.update(hints)
            centers = sorted(centers)
        squares.extend(CarlesonSquare(c, side) for c in centers)

    descriptor = {
        'side_min': side_min, 'side_max': side_max, 'ratio': ratio, 'span': span,
        'symmetric_only': symmetric_only, 'squares': len(squares),
    }
    return SquareFamily(tuple(squares), descriptor)


@dc.dataclass(frozen=True)
class RatioSup:
    constant: float
    witness: ty.Optional[CarlesonSquare]
    rows: ty.Tuple[ty.Tuple[float, float, float, float, float], ...] = dc.field(default=(), compare=False)

    def __iter__(self):
        # Allows `constant, witness = carleson_ratio_sup(...)`
        return iter((self.constant, self.witness))


def carleson_ratio_sup(
        mu: HalfPlaneMeasure,
        gauge: ty.Callable[[float], float],
        family: SquareFamily = None,
        shift: float = 0.0,
) -> RatioSup:
    """
    sup over the family of mu(Q) / gauge(|I|). Rows are (center, side, mass, gauge, ratio) in family order.

    With a shift, squares sit over the shifted half plane {Re z > shift}.
    """
    family = square_family(mu) if family is None else family
    if not len(family):
        raise EmptyFamily

    best = 0.0
    witness = None
    rows = []
    for square in family.squares:
        g = gauge(square.side)
        if not g > 0:
            raise ZeroMassNearOrigin(f'Gauge vanishes at side {square.side:.6g}')
        if shift:
            mass = mu.box_mass(square.box(mu.include_boundary, shift=shift))
        else:
            mass = mu.square_mass(square)
        ratio = mass / g
        rows.append((square.center_y, square.side, mass, g, ratio))
        if ratio > best:
            best, witness = ratio, square
    return RatioSup(best, witness, tuple(rows))
