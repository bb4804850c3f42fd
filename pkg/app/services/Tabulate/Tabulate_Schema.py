from typing import Sequence, Tuple

import pandas as pd
from pydantic import BaseModel, ConfigDict, model_validator

ROW_SUM_TOLERANCE = 1e-12


class ContingencyTable(BaseModel):
    """Counts over two ordered integer axes with their marginals."""

    model_config = ConfigDict(frozen=True)

    row_labels: Tuple[int, ...]
    col_labels: Tuple[int, ...]
    counts: Tuple[Tuple[int, ...], ...]
    row_sums: Tuple[int, ...]
    col_sums: Tuple[int, ...]
    total: int
    empty: bool = False

    @model_validator(mode="after")
    def _check_marginals(self) -> "ContingencyTable":
        if len(self.counts) != len(self.row_labels):
            raise ValueError("one count row is needed per row label")
        if any(len(row) != len(self.col_labels) for row in self.counts):
            raise ValueError("one count is needed per column label")
        if list(self.row_labels) != sorted(set(self.row_labels)) or list(self.col_labels) != sorted(
            set(self.col_labels)
        ):
            raise ValueError("labels must be unique and ascending")
        if any(value < 0 for row in self.counts for value in row):
            raise ValueError("counts must be non-negative")
        if tuple(sum(row) for row in self.counts) != self.row_sums:
            raise ValueError("row sums do not match the counts")
        columns = tuple(sum(row[j] for row in self.counts) for j in range(len(self.col_labels)))
        if columns != self.col_sums:
            raise ValueError("column sums do not match the counts")
        if sum(self.row_sums) != self.total or sum(self.col_sums) != self.total:
            raise ValueError("grand total does not match the marginals")
        return self

    @classmethod
    def from_counts(
        cls, row_labels: Sequence[int], col_labels: Sequence[int], counts: Sequence[Sequence[int]]
    ) -> "ContingencyTable":
        counts = tuple(tuple(int(v) for v in row) for row in counts)
        row_sums = tuple(sum(row) for row in counts)
        col_sums = tuple(sum(row[j] for row in counts) for j in range(len(col_labels)))
        return cls(
            row_labels=tuple(row_labels),
            col_labels=tuple(col_labels),
            counts=counts,
            row_sums=row_sums,
            col_sums=col_sums,
            total=sum(row_sums),
            empty=sum(row_sums) == 0,
        )

    def count(self, row: int, col: int) -> int:
        return self.counts[self.row_labels.index(row)][self.col_labels.index(col)]

    def row(self, label: int) -> Tuple[int, ...]:
        return self.counts[self.row_labels.index(label)]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(list(self.counts), index=list(self.row_labels), columns=list(self.col_labels))


class RowProportionTable(BaseModel):
    """Row-normalized counts; rows without any count are excluded, never divided."""

    model_config = ConfigDict(frozen=True)

    row_labels: Tuple[int, ...]
    col_labels: Tuple[int, ...]
    proportions: Tuple[Tuple[float, ...], ...]
    row_sums: Tuple[int, ...]
    excluded_rows: Tuple[int, ...] = ()

    @model_validator(mode="after")
    def _check_rows(self) -> "RowProportionTable":
        for label, row in zip(self.row_labels, self.proportions):
            if any(p < 0 or p > 1 for p in row):
                raise ValueError(f"row {label} has a proportion outside [0, 1]")
            if abs(sum(row) - 1.0) > ROW_SUM_TOLERANCE:
                raise ValueError(f"row {label} sums to {sum(row)!r}, not 1")
        return self

    def proportion(self, row: int, col: int) -> float:
        return self.proportions[self.row_labels.index(row)][self.col_labels.index(col)]

    def row(self, label: int) -> Tuple[float, ...]:
        return self.proportions[self.row_labels.index(label)]

    def column_sums(self) -> Tuple[float, ...]:
        return tuple(sum(row[j] for row in self.proportions) for j in range(len(self.col_labels)))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(list(self.proportions), index=list(self.row_labels), columns=list(self.col_labels))
