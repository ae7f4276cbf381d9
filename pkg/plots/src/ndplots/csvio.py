"""Reader for the versioned diagnostics CSVs.

The files carry a ``# csv-schema: <version>`` line above the header; anything
else is rejected so figures never silently mix schemas. Empty fields are the
missing-value sentinel and parse to NaN.
"""

import csv
import io
from pathlib import Path

import numpy as np

SCHEMA = "normdescent-diag-v1"


class SchemaError(ValueError):
    pass


def read_run(path):
    """Parse one run CSV into a {column: float array} dict."""
    path = Path(path)
    text = path.read_text()
    lines = text.splitlines()
    if not lines or lines[0] != f"# csv-schema: {SCHEMA}":
        found = lines[0] if lines else "<empty file>"
        raise SchemaError(f"{path}: expected '# csv-schema: {SCHEMA}', found {found!r}")
    reader = csv.reader(io.StringIO("\n".join(lines[1:])))
    header = next(reader)
    columns = {name: [] for name in header}
    for row in reader:
        if not row:
            continue
        for name, field in zip(header, row):
            columns[name].append(float(field) if field != "" else np.nan)
    return {name: np.asarray(vals, dtype=np.float64) for name, vals in columns.items()}


def margin_columns(columns, kind="hard"):
    """Norm names that have a ``<kind>_margin_<name>`` column."""
    prefix = f"{kind}_margin_"
    return sorted(name[len(prefix):] for name in columns if name.startswith(prefix))
