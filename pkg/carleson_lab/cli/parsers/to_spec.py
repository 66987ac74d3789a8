"""
Write measures and systems back out as spec text

Floats are written with repr, so parse_spec(emit_spec(x)) == x holds exactly.
"""
import typing as ty

from carleson_lab.analysis import measure as ms
from carleson_lab.analysis.admiss import DiagonalSystem
from carleson_lab.analysis.exceptions import UnsupportedMeasure


def _f(value: float) -> str:
    return repr(float(value))


def _radial_lines(nu: ms.RadialMeasure, indent: str = '') -> ty.List[str]:
    lines = []
    if nu.atom_at_zero:
        lines.append(f'{indent}atom0: {_f(nu.atom_at_zero)}')
    for r, m in nu.atoms:
        lines.append(f'{indent}atom: {_f(r)} {_f(m)}')
    for piece in nu.pieces:
        if isinstance(piece, ms.PowerPiece):
            lines.append(f'{indent}power: {_f(piece.lo)} {_f(piece.hi)} {_f(piece.coeff)} {_f(piece.alpha)}')
        else:
            pairs = ' '.join(f'{_f(n)}={_f(v)}' for n, v in zip(piece.nodes, piece.values))
            lines.append(f'{indent}samples: {pairs}')
    return lines


def _y_line(y: ms.YProfile, indent: str) -> str:
    if y.kind == 'point':
        return f'{indent}y: point {_f(y.lo)} {_f(y.density)}'
    return f'{indent}y: uniform {_f(y.lo)} {_f(y.hi)} {_f(y.density)}'


def _halfplane_lines(mu: ms.HalfPlaneMeasure) -> ty.List[str]:
    if mu.planar:
        raise UnsupportedMeasure('Planar densities have no spec form')
    lines = []
    if not mu.include_boundary:
        lines.append('include_boundary: false')
    for z, m in mu.atoms:
        lines.append(f'atom: {_f(z.real)} {_f(z.imag)} {_f(m)}')
    for component in mu.products:
        if component.factor is not None:
            raise UnsupportedMeasure('Reweighted product components have no spec form')
        lines.append('product:')
        lines.extend(_radial_lines(component.x, indent='  '))
        lines.append(_y_line(component.y, indent='  '))
        lines.append('end')
    return lines


def _system_lines(system: DiagonalSystem) -> ty.List[str]:
    lines = [f'q: {_f(system.q)}']
    for lam, b in zip(system.eigenvalues, system.controls):
        lines.append(f'mode: {_f(lam.real)} {_f(lam.imag)} {_f(b.real)} {_f(b.imag)}')
    return lines


def emit_spec(obj, header: str = None) -> str:
    """Canonical spec text for a RadialMeasure, HalfPlaneMeasure or DiagonalSystem"""
    lines = [f'# {header}'] if header else []
    if isinstance(obj, ms.RadialMeasure):
        lines += ['kind: radial'] + _radial_lines(obj)
    elif isinstance(obj, ms.HalfPlaneMeasure):
        lines += ['kind: halfplane'] + _halfplane_lines(obj)
    elif isinstance(obj, DiagonalSystem):
        lines += ['kind: system'] + _system_lines(obj)
    else:
        raise TypeError(f'Cannot write a spec for {type(obj).__name__}')
    return '\n'.join(lines) + '\n'
