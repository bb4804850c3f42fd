import logging
from typing import Callable, Iterable, Optional, Sequence, TypeVar

import numpy as np
import pandas as pd

from app.services.Ingest.Ingest_Schema import AssessmentRecord, Cohort
from app.services.Tabulate.Tabulate_Schema import ContingencyTable, RowProportionTable

# Set up logging
logger = logging.getLogger(__name__)

T = TypeVar("T")


class TabulateService:
    @staticmethod
    def tabulate(
        items: Iterable[T],
        row_key: Callable[[T], int],
        col_key: Callable[[T], int],
        row_levels: Optional[Sequence[int]] = None,
        col_levels: Optional[Sequence[int]] = None,
    ) -> ContingencyTable:
        """
        Count items over two integer keys.

        Without explicit levels only the labels that occur are kept. Explicit
        levels zero-pad absent labels; items whose key falls outside them are
        dropped with a warning.

        Args:
            items: anything the key functions accept (records, record pairs)
            row_key: maps an item to its row label
            col_key: maps an item to its column label
            row_levels: optional full set of row labels
            col_levels: optional full set of column labels

        Returns:
            ContingencyTable with ascending labels
        """
        rows, cols = [], []
        for item in items:
            rows.append(int(row_key(item)))
            cols.append(int(col_key(item)))

        keys = pd.DataFrame({"row": rows, "col": cols}, dtype="int64")
        if row_levels is not None or col_levels is not None:
            inside = pd.Series(True, index=keys.index)
            if row_levels is not None:
                inside &= keys["row"].isin(list(row_levels))
            if col_levels is not None:
                inside &= keys["col"].isin(list(col_levels))
            outside = int((~inside).sum())
            if outside:
                logger.warning(f"{outside} items fall outside the requested levels and are not counted")
            keys = keys[inside]

        row_labels = sorted(row_levels) if row_levels is not None else sorted(keys["row"].unique().tolist())
        col_labels = sorted(col_levels) if col_levels is not None else sorted(keys["col"].unique().tolist())

        if keys.empty:
            logger.warning("Cross tabulation over an empty item set")
            counts = [[0] * len(col_labels) for _ in row_labels]
            return ContingencyTable.from_counts(row_labels, col_labels, counts)

        grid = (
            pd.crosstab(keys["row"], keys["col"])
            .reindex(index=row_labels, columns=col_labels, fill_value=0)
            .astype("int64")
        )
        return ContingencyTable.from_counts(row_labels, col_labels, grid.to_numpy().tolist())

    @staticmethod
    def crosstab(
        cohort: Cohort,
        row_key: Callable[[AssessmentRecord], int],
        col_key: Callable[[AssessmentRecord], int],
        record_filter: Optional[Callable[[AssessmentRecord], bool]] = None,
        quarter: Optional[int] = None,
        row_levels: Optional[Sequence[int]] = None,
        col_levels: Optional[Sequence[int]] = None,
    ) -> ContingencyTable:
        """
        Cross-tabulate the cohort's records (optionally one quarter's, optionally filtered).
        """
        records = cohort.for_quarter(quarter) if quarter is not None else cohort.records
        if record_filter is not None:
            records = [r for r in records if record_filter(r)]
        return TabulateService.tabulate(records, row_key, col_key, row_levels, col_levels)

    @staticmethod
    def row_normalize(table: ContingencyTable) -> RowProportionTable:
        """
        Divide every row by its row sum. Rows with a zero sum are listed in
        `excluded_rows` and left out.
        """
        counts = np.asarray(table.counts, dtype=float).reshape(len(table.row_labels), len(table.col_labels))
        sums = np.asarray(table.row_sums, dtype=float)
        included = sums > 0
        excluded = tuple(label for label, keep in zip(table.row_labels, included) if not keep)
        if excluded:
            logger.info(f"Rows {list(excluded)} have no counts and are excluded from the proportions")

        proportions = counts[included] / sums[included][:, None]
        return RowProportionTable(
            row_labels=tuple(label for label, keep in zip(table.row_labels, included) if keep),
            col_labels=table.col_labels,
            proportions=tuple(tuple(float(p) for p in row) for row in proportions),
            row_sums=tuple(s for s, keep in zip(table.row_sums, included) if keep),
            excluded_rows=excluded,
        )
