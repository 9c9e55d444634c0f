"""CSV and JSON emission (UTF-8, LF line endings, 17 significant digits)."""

import csv
import io
import json
import sys

from .. import __version__
from ..rng import ALGORITHM
from .experiments import COLUMNS, format_value


def to_csv(result):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for row in result.rows:
        w.writerow([format_value(v) for v in row.as_tuple()])
    return buf.getvalue()


def _json_value(v):
    # json emits floats with repr, which is already round-trip safe
    if isinstance(v, float) and v != v:
        return None
    return v


def to_json(result):
    doc = {
        "metadata": {
            "version": __version__,
            "rng": ALGORITHM,
            "columns": list(COLUMNS),
            "config": result.config.as_dict(),
        },
        "rows": [{c: _json_value(v) for c, v in zip(COLUMNS, row.as_tuple())}
                 for row in result.rows],
    }
    return json.dumps(doc, indent=1) + "\n"


def render(result, fmt="csv"):
    return to_json(result) if fmt == "json" else to_csv(result)


def write_result(result, path=None, fmt="csv"):
    """Write to ``path`` (stdout when None or '-')."""
    text = render(result, fmt)
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
