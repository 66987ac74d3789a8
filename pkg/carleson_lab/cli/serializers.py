"""
Serializers for spec-file rows

Each row of a spec file is split into named tokens by the parser and checked here before any measure is built.
    Nothing is ever written back through these serializers; emitting a spec is handled by parsers.to_spec.
"""
import math

from rest_framework import serializers as drf_serializers


class ReprFloatField(drf_serializers.Field):
    """
    A float written the way `repr` writes it. Unlike FloatField this accepts `inf`, which spec files use for
        unbounded density pieces. NaN is always rejected.
    """
    default_error_messages = {
        'invalid': 'A valid number is required.',
        'nan': 'NaN is not allowed.',
        'min_value': 'Ensure this value is greater than or equal to {min_value}.',
        'max_value': 'Ensure this value is less than or equal to {max_value}.',
    }

    def __init__(self, *, min_value: float = None, max_value: float = None, **kwargs):
        self.min_value = min_value
        self.max_value = max_value
        super().__init__(**kwargs)

    def to_internal_value(self, data) -> float:
        try:
            value = float(data)
        except (TypeError, ValueError):
            self.fail('invalid')
        if math.isnan(value):
            self.fail('nan')
        if self.min_value is not None and value < self.min_value:
            self.fail('min_value', min_value=self.min_value)
        if self.max_value is not None and value > self.max_value:
            self.fail('max_value', max_value=self.max_value)
        return value

    def to_representation(self, value) -> float:
        return float(value)


class KindSerializer(drf_serializers.Serializer):
    kind = drf_serializers.ChoiceField(choices=('radial', 'halfplane', 'system'))


##########
# Radial measures
class OriginAtomSerializer(drf_serializers.Serializer):
    mass = ReprFloatField(min_value=0.0)


class RadialAtomSerializer(drf_serializers.Serializer):
    r = ReprFloatField()
    mass = ReprFloatField(min_value=0.0)

    def validate_r(self, value):
        if not (value > 0 and math.isfinite(value)):
            raise drf_serializers.ValidationError('Atoms away from the origin need a finite location r > 0')
        return value


class PowerPieceSerializer(drf_serializers.Serializer):
    lo = ReprFloatField(min_value=0.0)
    hi = ReprFloatField()
    coeff = ReprFloatField(min_value=0.0)
    alpha = ReprFloatField()

    def validate(self, data):
        if not data['lo'] < data['hi']:
            raise drf_serializers.ValidationError({'hi': 'Must be larger than lo'})
        if data['lo'] == 0 and data['alpha'] <= -1:
            raise drf_serializers.ValidationError({'alpha': 'A piece starting at 0 needs alpha > -1'})
        return data


class SampledPieceSerializer(drf_serializers.Serializer):
    nodes = drf_serializers.ListField(child=ReprFloatField(min_value=0.0), min_length=2)
    values = drf_serializers.ListField(child=ReprFloatField(min_value=0.0), min_length=2)

    def validate(self, data):
        nodes = data['nodes']
        if len(nodes) != len(data['values']):
            raise drf_serializers.ValidationError('Need one density value per node')
        if any(b <= a for a, b in zip(nodes, nodes[1:])):
            raise drf_serializers.ValidationError({'nodes': 'Nodes must be strictly increasing'})
        if not math.isfinite(nodes[-1]):
            raise drf_serializers.ValidationError({'nodes': 'Sampled pieces must end at a finite node'})
        return data


##########
# Half-plane measures
class HalfPlaneAtomSerializer(drf_serializers.Serializer):
    re = ReprFloatField(min_value=0.0)
    im = ReprFloatField()
    mass = ReprFloatField(min_value=0.0)

    def validate(self, data):
        if not (math.isfinite(data['re']) and math.isfinite(data['im'])):
            raise drf_serializers.ValidationError('Atom locations must be finite')
        return data


class BoundarySerializer(drf_serializers.Serializer):
    include_boundary = drf_serializers.BooleanField()


class YProfileSerializer(drf_serializers.Serializer):
    """point <y0> [density] | uniform <lo> <hi> [density] | lebesgue [density]"""
    kind = drf_serializers.ChoiceField(choices=('point', 'uniform', 'lebesgue'))
    lo = ReprFloatField(required=False)
    hi = ReprFloatField(required=False)
    density = ReprFloatField(min_value=0.0, default=1.0)

    def validate(self, data):
        kind = data['kind']
        if kind == 'lebesgue':
            return dict(data, kind='uniform', lo=-math.inf, hi=math.inf)
        if 'lo' not in data or 'hi' not in data:
            raise drf_serializers.ValidationError(f'A {kind} profile needs its location')
        if kind == 'point' and not math.isfinite(data['lo']):
            raise drf_serializers.ValidationError({'lo': 'Point profiles sit at a finite height'})
        if kind == 'uniform' and not data['lo'] < data['hi']:
            raise drf_serializers.ValidationError({'hi': 'Must be larger than lo'})
        return data


##########
# Diagonal systems
class SystemOptionsSerializer(drf_serializers.Serializer):
    q = ReprFloatField(min_value=1.0)


class ModeSerializer(drf_serializers.Serializer):
    """One eigenvalue lambda and its control scalar b"""
    re_lambda = ReprFloatField()
    im_lambda = ReprFloatField()
    re_b = ReprFloatField()
    im_b = ReprFloatField()

    def validate_re_lambda(self, value):
        if not value < 0:
            raise drf_serializers.ValidationError('Eigenvalues must lie in the open left half plane')
        return value

    def validate(self, data):
        if not all(math.isfinite(v) for v in data.values()):
            raise drf_serializers.ValidationError('Mode entries must be finite')
        return data
