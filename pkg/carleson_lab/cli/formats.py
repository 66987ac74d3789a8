"""
Output encodings shared by all runners

JSON goes through orjson with sorted keys and two-space indent. orjson writes finite floats with their shortest
    round-trip repr but has no spelling for inf or nan, so those are written as the strings 'inf', '-inf' and 'nan'.
    CSV floats use '%.17g'.
"""
import csv
import dataclasses as dc
import enum
import io
import math
import typing as ty

import numpy as np
import orjson

JSON_OPTIONS = orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_APPEND_NEWLINE


def to_jsonable(value):
    """Plain JSON types only: numpy scalars unwrapped, complex as {re, im}, tuples as lists"""
    if isinstance(value, enum.Enum):
        return value.name
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else repr(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {'re': to_jsonable(value.real), 'im': to_jsonable(value.imag)}
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [to_jsonable(v) for v in value]
    if dc.is_dataclass(value) and not isinstance(value, type):
        return to_jsonable(dc.asdict(value))
    return value


def dumps(value) -> bytes:
    return orjson.dumps(to_jsonable(value), option=JSON_OPTIONS)


def loads(content: ty.Union[str, bytes]):
    return orjson.loads(content)


def format_value(value) -> str:
    if isinstance(value, enum.Enum):
        return value.name
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return '%.17g' % float(value)
    if isinstance(value, (complex, np.complexfloating)):
        raise TypeError('Split complex values into real and imaginary columns before writing CSV')
    return '' if value is None else str(value)


def csv_text(header: ty.Sequence[str], rows: ty.Iterable[ty.Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()
