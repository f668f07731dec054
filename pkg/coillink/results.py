"""
Result tables and their CSV / SVG renderings.

Every command produces a ResultTable. The first column is the independent
variable; numbers are written with a fixed number of significant digits so
that identical runs give byte-identical files.
"""
import csv
import io
import logging
import numbers
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Union

import matplotlib
from matplotlib.figure import Figure

from .errors import ValidationError
from .utils import format_number

logger = logging.getLogger(__name__)

CSV_DIGITS = 10
SVG_HASH_SALT = "coillink"

# rcParams are process-wide
_SVG_LOCK = threading.Lock()


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if hasattr(value, "item"):
        value = value.item()
    return format_number(value, CSV_DIGITS)


@dataclass
class ResultTable:
    """
    Column-ordered records.

    Attributes:
        columns: Header names, independent variable first
        rows: One list of values per record
        plot_columns: Columns drawn against the first column by write_svg;
            empty means every numeric column
        title: Chart title
    """
    columns: List[str]
    rows: List[list] = field(default_factory=list)
    plot_columns: List[str] = field(default_factory=list)
    title: str = ""

    def __post_init__(self):
        if not self.columns:
            raise ValidationError("a result table needs at least one column")
        for row in self.rows:
            self._check(row)
        unknown = [name for name in self.plot_columns if name not in self.columns]
        if unknown:
            raise ValidationError(f"plot columns {unknown} are not table columns")

    def _check(self, row: Sequence):
        if len(row) != len(self.columns):
            raise ValidationError(
                f"row has {len(row)} values, table has {len(self.columns)} columns")

    def append(self, row: Sequence):
        self._check(row)
        self.rows.append(list(row))

    def column(self, name: str) -> list:
        index = self.columns.index(name)
        return [row[index] for row in self.rows]

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_cell(value) for value in row])
        return buffer.getvalue()

    def _numeric(self, name: str) -> bool:
        values = self.column(name)
        return bool(values) and all(
            isinstance(v, numbers.Real) and not isinstance(v, bool) for v in values)

    def series_to_plot(self) -> List[str]:
        if self.plot_columns:
            return list(self.plot_columns)
        return [name for name in self.columns[1:] if self._numeric(name)]


def write_csv(table: ResultTable, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(table.to_csv(), encoding="utf-8")
    logger.info(f"Wrote {len(table.rows)} rows to {path}")
    return path


def write_svg(table: ResultTable, path: Union[str, Path], title: Optional[str] = None) -> Path:
    """Line chart of the plotted columns against the first column"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    x_name = table.columns[0]
    series = table.series_to_plot()
    if not table.rows or not series:
        raise ValidationError(f"nothing to plot in table '{table.title or path.name}'")

    categorical = not table._numeric(x_name)
    x = list(range(len(table.rows))) if categorical else [float(v) for v in table.column(x_name)]
    with _SVG_LOCK, matplotlib.rc_context({"svg.hashsalt": SVG_HASH_SALT, "svg.fonttype": "none"}):
        fig = Figure(figsize=(8, 5))
        ax = fig.subplots()
        for name in series:
            ax.plot(x, [float(v) for v in table.column(name)], label=name, linewidth=1.2)
        if categorical:
            ax.set_xticks(x)
            ax.set_xticklabels([str(v) for v in table.column(x_name)])
        ax.set_xlabel(x_name)
        ax.set_title(title or table.title)
        ax.grid(True, alpha=0.3)
        if len(series) > 1:
            ax.legend()
        fig.savefig(path, format="svg", metadata={"Date": None})
    logger.info(f"Wrote chart {path}")
    return path
