"""
Adaptive quadrature helpers shared by the measure, transform and criterion modules.

One-dimensional integrals go through scipy.integrate.quad. Integrals that run out to 0 or to infinity are summed
    over dyadic blocks so that divergence can be told apart from slow convergence. Planar integrals use a composite
    tensor Gauss-Legendre rule that doubles its panels until two passes agree.
"""
import logging
import math
import typing as ty
import warnings

import numpy as np
from django.conf import settings
from scipy import integrate as sp_integrate

from carleson_lab.analysis.exceptions import DivergentNorm, QuadratureFailure

logger = logging.getLogger(__name__)

# A run of blocks that shrink by less than this factor each step is treated as a divergent tail
_SLOW_DECAY = 0.97
_SLOW_RUN = 40
_CONVERGED_RUN = 3

_GL_ORDER = 20
_GL_MAX_DOUBLINGS = 5


def tolerances(rtol: float = None, atol: float = None) -> ty.Tuple[float, float]:
    conf = settings.CARLESON_LAB
    return (
        conf['QUAD_RTOL'] if rtol is None else rtol,
        conf['QUAD_ATOL'] if atol is None else atol,
    )


def integrate(
        g: ty.Callable[[float], float],
        a: float,
        b: float,
        *,
        points: ty.Sequence[float] = None,
        rtol: float = None,
        atol: float = None,
) -> float:
    """
    Integrate a real function over [a, b] (either end may be infinite).

    Integration warnings from scipy are only fatal when the reported error estimate misses the tolerance by more
        than an order of magnitude; otherwise the result is accepted and the warning logged at debug level.
    """
    if a == b:
        return 0.0
    rtol, atol = tolerances(rtol, atol)
    limit = settings.CARLESON_LAB['QUAD_LIMIT']

    kwargs = {}
    if points is not None and math.isfinite(a) and math.isfinite(b):
        inside = sorted({p for p in points if a < p < b})
        if inside:
            kwargs['points'] = inside

    with warnings.catch_warnings():
        warnings.simplefilter('ignore', sp_integrate.IntegrationWarning)
        value, abserr, *rest = sp_integrate.quad(
            g, a, b, epsabs=atol, epsrel=rtol, limit=limit, full_output=1, **kwargs
        )

    if not math.isfinite(value):
        raise QuadratureFailure(f'Integral over [{a}, {b}] is not finite')

    if len(rest) > 1:
        # quad returns (value, abserr, infodict, message) when something went wrong
        allowed = 10 * max(atol, rtol * abs(value))
        if abserr > allowed:
            raise QuadratureFailure(
                f'Integral over [{a}, {b}] reached error estimate {abserr:.3g} (allowed {allowed:.3g}): {rest[1]}'
            )
        logger.debug('Accepted quadrature over [%s, %s] despite warning: %s', a, b, rest[1])
    return value


def _sum_blocks(g, edges: ty.Iterator[ty.Tuple[float, float]], rtol: float, atol: float, where: str) -> float:
    """Sum block integrals until blocks become negligible, extrapolating a geometric tail if the cap is reached"""
    max_blocks = settings.CARLESON_LAB['QUAD_MAX_BLOCKS']
    total = 0.0
    prev = None
    small = 0
    slow = 0
    ratio = None
    for i, (lo, hi) in enumerate(edges):
        if i >= max_blocks:
            break
        block = integrate(g, lo, hi, rtol=rtol, atol=atol)
        total += block

        if abs(block) <= rtol * abs(total) + atol:
            small += 1
            if small >= _CONVERGED_RUN:
                return total
        else:
            small = 0

        if prev is not None and prev != 0 and block != 0:
            ratio = abs(block / prev)
            slow = slow + 1 if ratio >= _SLOW_DECAY else 0
            if slow >= _SLOW_RUN:
                raise DivergentNorm(f'Integral {where} diverges (block ratio {ratio:.4f})')
        prev = block

    if ratio is not None and ratio < _SLOW_DECAY:
        tail = prev * ratio / (1 - ratio)
        logger.warning('Integral %s truncated after %d blocks; adding geometric tail %.3g', where, max_blocks, tail)
        return total + tail
    raise DivergentNorm(f'Integral {where} did not settle within {max_blocks} dyadic blocks')


def integrate_to_infinity(g, start: float, scale: float = 1.0, rtol: float = None, atol: float = None) -> float:
    """Integrate over [start, inf) on blocks [start + scale(2^k - 1), start + scale(2^(k+1) - 1))"""
    rtol, atol = tolerances(rtol, atol)
    scale = abs(scale) or 1.0

    def edges():
        k = 0
        while True:
            yield start + scale * (2.0 ** k - 1), start + scale * (2.0 ** (k + 1) - 1)
            k += 1

    return _sum_blocks(g, edges(), rtol, atol, f'over [{start}, inf)')


def integrate_to_zero(g, end: float, rtol: float = None, atol: float = None) -> float:
    """Integrate over (0, end] on blocks [end 2^-(k+1), end 2^-k)"""
    rtol, atol = tolerances(rtol, atol)

    def edges():
        k = 0
        while True:
            yield end * 2.0 ** -(k + 1), end * 2.0 ** -k
            k += 1

    return _sum_blocks(g, edges(), rtol, atol, f'over (0, {end}]')


def integrate_halfline(g, pivot: float = 1.0, rtol: float = None, atol: float = None) -> float:
    """Integrate over (0, inf), splitting at a pivot that sets the natural scale of g"""
    return (
        integrate_to_zero(g, pivot, rtol=rtol, atol=atol)
        + integrate_to_infinity(g, pivot, scale=pivot, rtol=rtol, atol=atol)
    )


def integrate_line(g, center: float = 0.0, scale: float = 1.0, rtol: float = None, atol: float = None) -> float:
    """Integrate over the whole real line: a central window plus two dyadic tails"""
    scale = abs(scale) or 1.0
    middle = integrate(g, center - scale, center + scale, rtol=rtol, atol=atol)
    right = integrate_to_infinity(g, center + scale, scale=scale, rtol=rtol, atol=atol)
    left = integrate_to_infinity(lambda s: g(2 * center - s), center + scale, scale=scale, rtol=rtol, atol=atol)
    return middle + right + left


##########
# Planar integrals
def _gl_nodes(order: int = _GL_ORDER):
    """Gauss-Legendre nodes and weights mapped onto [0, 1]"""
    xg, wg = np.polynomial.legendre.leggauss(order)
    return 0.5 * (xg + 1), 0.5 * wg


def _composite_1d(edges: np.ndarray, panels: int) -> ty.Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for `panels` equal panels inside every interval of `edges`"""
    xg, wg = _gl_nodes()
    nodes = []
    weights = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        cuts = np.linspace(lo, hi, panels + 1)
        width = np.diff(cuts)
        nodes.append((cuts[:-1, None] + width[:, None] * xg[None, :]).ravel())
        weights.append((width[:, None] * wg[None, :]).ravel())
    return np.concatenate(nodes), np.concatenate(weights)


def integrate_box(
        density: ty.Callable[[np.ndarray, np.ndarray], np.ndarray],
        x_lo: float,
        x_hi: float,
        y_lo: float,
        y_hi: float,
        x_breaks: ty.Sequence[float] = (),
        rtol: float = None,
        atol: float = None,
) -> float:
    """
    Integrate a vectorized density rho(x, y) over a finite box. Known discontinuities in x are passed as x_breaks so
        that every panel sees a smooth integrand.
    """
    if x_hi <= x_lo or y_hi <= y_lo:
        return 0.0
    if not all(math.isfinite(v) for v in (x_lo, x_hi, y_lo, y_hi)):
        raise QuadratureFailure('Planar quadrature needs a bounded box')
    rtol, atol = tolerances(rtol, atol)

    x_edges = np.array(sorted({x_lo, x_hi, *(b for b in x_breaks if x_lo < b < x_hi)}))
    y_edges = np.array([y_lo, y_hi])

    previous = None
    panels = 2
    for _ in range(_GL_MAX_DOUBLINGS):
        xs, wx = _composite_1d(x_edges, panels)
        ys, wy = _composite_1d(y_edges, panels)
        grid_x, grid_y = np.meshgrid(xs, ys, indexing='ij')
        value = float(wx @ density(grid_x, grid_y) @ wy)
        if previous is not None and abs(value - previous) <= rtol * abs(value) + atol:
            return value
        previous = value
        panels *= 2
    raise QuadratureFailure(
        f'Planar quadrature over [{x_lo}, {x_hi}] x [{y_lo}, {y_hi}] did not settle after {panels // 2} panels'
    )
