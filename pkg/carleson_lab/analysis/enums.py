from enum import Enum, IntEnum


class ModelHelper:
    @classmethod
    def choices(cls: Enum):
        return [(i.value, i.name) for i in cls]


class VerdictStatus(ModelHelper, IntEnum):
    """
    Outcome of a single criterion. Ordering matters: when verdicts are combined, the highest status wins.
    """
    passed = 0
    not_applicable = 5  # Criterion was skipped for these exponents; never fails a run
    failed = 10  # Constant exceeds the configured cap
    divergent = 20  # A norm or sum that should be finite is infinite

    @classmethod
    def is_failure(cls, status) -> bool:
        return status in {cls.failed, cls.divergent}

    @classmethod
    def exit_code(cls, status) -> int:
        """CLI exit status for a run whose worst verdict is `status`"""
        return 1 if cls.is_failure(status) else 0


class Criterion(ModelHelper, IntEnum):
    """Which family of conditions a verdict belongs to"""
    classical = 10
    zen = 20
    power_bound = 30
    pprime_le_q = 40
    sectorial_qgep = 50
    sectorial_plq = 60
    strip = 70
    sobolev = 80
    hankel = 90
    bloch = 95
    admissibility = 100
    lower_bound = 110


class ScalingKind(ModelHelper, IntEnum):
    """How a verdict constant responds to mu -> c * mu"""
    mass = 1  # scales by c
    norm = 2  # scales by c ** (1/q)
    none = 0


class TileType(ModelHelper, IntEnum):
    """
    How a tile contributes to a decomposition part.

    type 1: the remaining line mass over the tile's interval exceeds the tile's mass. The part takes the whole tile.
    type 2: line mass is positive but no larger than the tile mass. The part takes a scaled copy, using up the line.
    type 3: line mass over the interval is already exhausted. The part takes nothing.
    """
    full = 1
    scaled = 2
    exhausted = 3


class SobolevMode(ModelHelper, IntEnum):
    sectorial = 1
    l2 = 2
