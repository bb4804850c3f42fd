from typing import Tuple

from pydantic import BaseModel, ConfigDict, model_validator

from app.services.Tabulate.Tabulate_Schema import ContingencyTable, ROW_SUM_TOLERANCE, RowProportionTable

COLUMN_SUM_TOLERANCE = 1e-9


class ProgressionRateMatrix(BaseModel):
    """
    Share of children moving from improvement level i in one quarter to level j in a later one.
    Levels nobody occupies are dropped from the rows/columns and listed.
    """

    model_config = ConfigDict(frozen=True)

    from_quarter: int
    to_quarter: int
    rows: Tuple[int, ...]
    cols: Tuple[int, ...]
    rates: Tuple[Tuple[float, ...], ...]
    column_sums: Tuple[float, ...]
    row_sums: Tuple[int, ...]
    counts: ContingencyTable
    dropped_rows: Tuple[int, ...] = ()
    dropped_cols: Tuple[int, ...] = ()
    paired_children: int
    unpaired_from: int = 0
    unpaired_to: int = 0

    @model_validator(mode="after")
    def _check_rates(self) -> "ProgressionRateMatrix":
        for level, row in zip(self.rows, self.rates):
            if abs(sum(row) - 1.0) > ROW_SUM_TOLERANCE:
                raise ValueError(f"rates of level {level} sum to {sum(row)!r}, not 1")
        if abs(sum(self.column_sums) - len(self.rows)) > COLUMN_SUM_TOLERANCE:
            raise ValueError("column sums must add up to the number of rows")
        return self

    def rate(self, from_level: int, to_level: int) -> float:
        return self.rates[self.rows.index(from_level)][self.cols.index(to_level)]


class ProgressionScore(BaseModel):
    """
    S: sum over rows of the expected level displacement; S* = S / divisor.
    `s_min`/`s_max` bound S for the row set of the matrix it came from.
    """

    model_config = ConfigDict(frozen=True)

    from_quarter: int
    to_quarter: int
    s: float
    s_star: float
    simplified_s: float
    row_index_sum: int
    divisor: float
    s_min: float
    s_max: float
    weighted: bool = False

    @model_validator(mode="after")
    def _check_scaling(self) -> "ProgressionScore":
        if self.s_star != self.s / self.divisor:
            raise ValueError("s_star must equal s / divisor")
        return self


class ProgressionSteps(BaseModel):
    """The three published artifacts: cross-tab, row sums, rate matrix with column-sum footer."""

    from_quarter: int
    to_quarter: int
    crosstab: ContingencyTable
    row_sums: Tuple[int, ...]
    rates: RowProportionTable
    column_sums: Tuple[float, ...]


class ProgressionResult(BaseModel):
    matrix: ProgressionRateMatrix
    score: ProgressionScore
