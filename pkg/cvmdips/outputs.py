import csv
import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterator, TextIO

import numpy as np

from cvmdips.constants import OutputFormat
from cvmdips.errors import DomainError, UnknownFieldError
from cvmdips.utils import CvmdipsJSONEncoder, format_number


@dataclass
class StudyResult:
    """
    A table produced by a study: one row per evaluated point, with named columns, plus free-form metadata
    (typically the resolved configuration and where each value came from).

    :param columns: Column names, in output order
    :param rows: Row tuples, each as long as `columns`; missing values are None
    :param metadata: Key-value pairs echoed as ``#`` comment lines in CSV and as an object in JSON
    """
    columns: list[str]
    rows: list[tuple] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.columns = list(self.columns)
        self.rows = [tuple(row) for row in self.rows]
        for i, row in enumerate(self.rows):
            if len(row) != len(self.columns):
                raise DomainError(f"Row {i} has {len(row)} values for {len(self.columns)} columns")

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self) -> Iterator[dict[str, Any]]:
        for row in self.rows:
            yield dict(zip(self.columns, row))

    def column(self, name: str) -> list:
        """ All values of the named column, in row order """
        if name not in self.columns:
            raise UnknownFieldError(self.__class__, self.columns, name)
        i = self.columns.index(name)
        return [row[i] for row in self.rows]

    def to_csv(self, stream: TextIO):
        for key, value in self.metadata.items():
            stream.write(f"# {key} = {format_number(value) if isinstance(value, float) else value}\n")
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([format_number(v) for v in row])

    def to_json(self, stream: TextIO):
        """ Strict JSON: non-finite numbers are written as the strings the CSV form uses (``"inf"``, ``"nan"``) """
        payload = {"metadata": {key: _finite_or_text(value) for key, value in self.metadata.items()},
                   "columns": self.columns,
                   "rows": [{key: _finite_or_text(value) for key, value in row.items()} for row in self]}
        json.dump(payload, stream, cls=CvmdipsJSONEncoder, indent=2, allow_nan=False)
        stream.write("\n")

    def write(self, stream: TextIO, fmt: OutputFormat = OutputFormat.CSV):
        if fmt is OutputFormat.JSON:
            self.to_json(stream)
        else:
            self.to_csv(stream)


def _finite_or_text(value: Any) -> Any:
    if isinstance(value, (float, np.floating)) and not math.isfinite(value):
        return format_number(value)
    return value
