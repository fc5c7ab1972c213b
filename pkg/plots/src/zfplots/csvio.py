"""Reader for zfsim result CSVs.

File layout: one '# key=value; ...' metadata comment line, a header
row, then comma-separated data rows (floats at 17 significant digits;
short columns are nan-padded). Implemented against the file format
only; this package never imports the simulator.
"""

import math
from dataclasses import dataclass, field


class SchemaMismatch(Exception):
    """CSV lacks the columns (or rows) a figure kind requires."""


@dataclass
class ResultData:
    metadata: dict = field(default_factory=dict)
    columns: dict = field(default_factory=dict)  # name -> list of floats

    def require(self, *names):
        missing = [n for n in names if n not in self.columns]
        if missing:
            raise SchemaMismatch(f"missing columns: {', '.join(missing)}")
        return [self.columns[n] for n in names]

    def labels_with_suffix(self, suffix):
        return [name[: -len(suffix)] for name in self.columns if name.endswith(suffix)]


def clean_series(x, y):
    """Drop pairs where either value is non-finite (nan padding)."""
    out_x, out_y = [], []
    for xi, yi in zip(x, y):
        if math.isfinite(xi) and math.isfinite(yi):
            out_x.append(xi)
            out_y.append(yi)
    return out_x, out_y


def read_result_csv(path):
    with open(path, encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh if line.strip()]
    if not lines or not lines[0].startswith("#"):
        raise SchemaMismatch(f"{path}: missing metadata comment line")
    metadata = {}
    for item in lines[0][1:].split(";"):
        if "=" in item:
            key, _, value = item.partition("=")
            metadata[key.strip()] = value.strip()
    if len(lines) < 2:
        raise SchemaMismatch(f"{path}: missing header row")
    header = [h.strip() for h in lines[1].split(",")]
    rows = []
    for line in lines[2:]:
        cells = line.split(",")
        if len(cells) != len(header):
            raise SchemaMismatch(f"{path}: row with {len(cells)} cells, "
                                 f"expected {len(header)}")
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            # non-numeric table (e.g. diagnostic reports) is not plottable
            raise SchemaMismatch(f"{path}: non-numeric data row {line!r}")
    if not rows:
        raise SchemaMismatch(f"{path}: no data rows")
    columns = {name: [row[j] for row in rows] for j, name in enumerate(header)}
    return ResultData(metadata=metadata, columns=columns)
