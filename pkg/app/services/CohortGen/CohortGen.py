import logging
from itertools import combinations
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, TextIO, Tuple, TypeVar, Union

import numpy as np

from app.core.config import GRADE_MAX, GRADE_MIN, IMPROVEMENT_LEVELS, MAX_LEVEL, RNG_ALGORITHM
from app.core.exceptions import SpecError
from app.services.CohortGen.CohortGen_Schema import GenSpec
from app.services.Ingest.Ingest import FLAG_FIELDS, IngestService
from app.services.Ingest.Ingest_Schema import AssessmentRecord, Cohort, Sex, State
from app.services.Tabulate.Tabulate_Schema import ContingencyTable

# Set up logging
logger = logging.getLogger(__name__)

K = TypeVar("K")

STATE_CODES = {
    State.JAMMU_KASHMIR: "JK",
    State.JHARKHAND: "JH",
    State.MANIPUR: "MN",
    State.WEST_BENGAL: "WB",
}

# Flag combinations per improvement level, e.g. level 1 -> (1,0,0,0), (0,1,0,0), ...
FLAG_COMBINATIONS: Dict[int, List[Tuple[int, ...]]] = {
    level: [
        tuple(1 if i in chosen else 0 for i in range(len(FLAG_FIELDS)))
        for chosen in combinations(range(len(FLAG_FIELDS)), level)
    ]
    for level in IMPROVEMENT_LEVELS
}


def _record(
    child_id: str,
    center: str,
    state: State,
    sex: Sex,
    age_class: int,
    lag: int,
    attendance: int,
    flags: Sequence[int],
    quarter: int,
) -> AssessmentRecord:
    return AssessmentRecord(
        child_id=child_id,
        center=center,
        state=state,
        sex=sex,
        age_appropriate_class=age_class,
        compatible_class=age_class + lag,
        attendance=attendance,
        improvements=dict(zip(FLAG_FIELDS, flags)),
        quarter=quarter,
    )


def _age_bounds(lag: int) -> Tuple[int, int]:
    """Age-appropriate classes that keep both classes inside the configured range."""
    return max(GRADE_MIN, GRADE_MIN - lag), min(GRADE_MAX, GRADE_MAX - lag)


class CohortGenService:
    # Centers per state in synthetic cohorts
    CENTERS_PER_STATE = 6
    MAX_ATTENDANCE = 60
    RECONSTRUCTED_AGE_CLASS = 8

    @staticmethod
    def identity_kernel() -> List[List[float]]:
        return np.eye(len(IMPROVEMENT_LEVELS)).tolist()

    @staticmethod
    def improving_kernel() -> List[List[float]]:
        """Every level below the top moves up, uniformly over the higher levels; the top level stays."""
        size = len(IMPROVEMENT_LEVELS)
        kernel = []
        for i in range(size):
            higher = size - i - 1
            kernel.append([1.0 if i == MAX_LEVEL and j == i else (1.0 / higher if j > i else 0.0) for j in range(size)])
        return kernel

    @staticmethod
    def default_spec(seed: int, population: int, kernel: Optional[List[List[float]]] = None) -> GenSpec:
        """Uniform lags over -7..0, uniform levels and mixtures; `kernel` for every transition."""
        size = len(IMPROVEMENT_LEVELS)
        kernel = kernel if kernel is not None else np.full((size, size), 1.0 / size).tolist()
        lags = list(range(-7, 1))
        return GenSpec(
            seed=seed,
            population=population,
            lag_weights={lag: 1.0 / len(lags) for lag in lags},
            initial_levels=[1.0 / size] * size,
            kernels=[kernel, kernel],
            state_weights={state: 1.0 / len(State) for state in State},
            sex_weights={sex: 1.0 / len(Sex) for sex in Sex},
        )

    @staticmethod
    def generate(spec: GenSpec) -> Cohort:
        """
        Sample a cohort from a spec. The same seed always gives the same cohort.

        Each child draws its state, sex, class lag, age-appropriate class and
        first-quarter level, then its level in every later quarter from the
        kernel row of its previous level. Flags are a uniformly chosen
        combination with the drawn level as its sum.

        Raises:
            SpecError: if the spec cannot produce any child
        """
        if spec.population <= 0:
            raise SpecError("a synthetic cohort needs a positive population")

        rng = np.random.Generator(getattr(np.random, RNG_ALGORITHM)(spec.seed))
        states = list(spec.state_weights)
        state_p = np.asarray([spec.state_weights[s] for s in states])
        sexes = list(spec.sex_weights)
        sex_p = np.asarray([spec.sex_weights[s] for s in sexes])
        lags = spec.sorted_lags
        lag_p = np.asarray([spec.lag_weights[lag] for lag in lags])
        levels = np.asarray(IMPROVEMENT_LEVELS)

        records = []
        width = len(str(spec.population))
        for k in range(spec.population):
            child_id = f"{spec.id_prefix}{k + 1:0{width}d}"
            state = states[rng.choice(len(states), p=state_p)]
            sex = sexes[rng.choice(len(sexes), p=sex_p)]
            lag = lags[rng.choice(len(lags), p=lag_p)]
            low, high = _age_bounds(lag)
            age_class = int(rng.integers(low, high + 1))
            center = f"{STATE_CODES[state]}-{int(rng.integers(1, CohortGenService.CENTERS_PER_STATE + 1)):02d}"

            level = int(rng.choice(levels, p=spec.initial_levels))
            path = [level]
            for kernel in spec.kernels:
                level = int(rng.choice(levels, p=kernel[level]))
                path.append(level)

            for quarter, level in enumerate(path, start=1):
                options = FLAG_COMBINATIONS[level]
                flags = options[int(rng.integers(len(options)))]
                attendance = int(rng.integers(0, CohortGenService.MAX_ATTENDANCE + 1))
                records.append(_record(child_id, center, state, sex, age_class, lag, attendance, flags, quarter))

        logger.info(f"Generated {spec.population} children over {spec.quarters} quarters (seed {spec.seed})")
        return IngestService.build_cohort(records)

    @staticmethod
    def _spread(counts: Mapping[K, int], total: int, what: str) -> List[K]:
        """
        Labels for `total` children with the given counts, interleaved so every
        label is spread proportionally along the sequence.
        """
        if sum(counts.values()) != total:
            raise ValueError(f"{what} counts add up to {sum(counts.values())}, expected {total}")
        assigned = {label: 0 for label in counts}
        labels = []
        for k in range(1, total + 1):
            label = max(counts, key=lambda g: counts[g] * k / total - assigned[g])
            assigned[label] += 1
            labels.append(label)
        return labels

    @staticmethod
    def _level_paths(transitions: Sequence[ContingencyTable]) -> List[List[int]]:
        first = transitions[0]
        paths = [
            [i, j]
            for i, row in zip(first.row_labels, first.counts)
            for j, count in zip(first.col_labels, row)
            for _ in range(count)
        ]
        for step, table in enumerate(transitions[1:], start=1):
            arriving: Dict[int, List[List[int]]] = {}
            for path in paths:
                arriving.setdefault(path[-1], []).append(path)
            leaving = dict(zip(table.row_labels, table.row_sums))
            if {lvl: len(p) for lvl, p in arriving.items() if p} != {lvl: n for lvl, n in leaving.items() if n}:
                raise ValueError(f"transition table {step} rows do not match the levels reached by table {step - 1}")
            for i, row in zip(table.row_labels, table.counts):
                nexts = [j for j, count in zip(table.col_labels, row) for _ in range(count)]
                for path, j in zip(arriving.get(i, []), nexts):
                    path.append(j)
        return paths

    @staticmethod
    def reconstruct(
        transitions: Sequence[ContingencyTable] = (),
        lag_table: Optional[ContingencyTable] = None,
        state_counts: Optional[Mapping[State, int]] = None,
        sex_counts: Optional[Mapping[Sex, int]] = None,
        prefix: str = "C",
        first_quarter: int = 1,
    ) -> Cohort:
        """
        Build a cohort whose cross-tabs equal the given count tables.

        Args:
            transitions: level cross-tabs of consecutive quarters, starting at
                `first_quarter`; each table's rows must match the previous table's columns
            lag_table: class lag x first-quarter level counts; its level totals
                must match the first quarter (alone it defines a one-quarter cohort)
            state_counts: children per state (default: all West Bengal)
            sex_counts: children per sex (default: all female)
            prefix: child id prefix
            first_quarter: quarter of the first level

        Returns:
            Cohort with one record per child per quarter
        """
        if transitions:
            paths = CohortGenService._level_paths(transitions)
        elif lag_table is not None:
            paths = [[j] for j, total in zip(lag_table.col_labels, lag_table.col_sums) for _ in range(total)]
        else:
            raise ValueError("reconstruction needs transition tables or a lag table")
        total = len(paths)

        lags = [0] * total
        if lag_table is not None:
            by_level: Dict[int, List[int]] = {}
            for index, path in enumerate(paths):
                by_level.setdefault(path[0], []).append(index)
            for j, level in enumerate(lag_table.col_labels):
                column = [lag for lag, row in zip(lag_table.row_labels, lag_table.counts) for _ in range(row[j])]
                children = by_level.get(level, [])
                if len(column) != len(children):
                    raise ValueError(
                        f"lag table has {len(column)} children at level {level}, transitions have {len(children)}"
                    )
                for index, lag in zip(children, column):
                    lags[index] = lag

        states = CohortGenService._spread(state_counts or {State.WEST_BENGAL: total}, total, "state")
        sexes = CohortGenService._spread(sex_counts or {Sex.FEMALE: total}, total, "sex")

        records = []
        width = max(5, len(str(total)))
        for k, path in enumerate(paths):
            lag = lags[k]
            age_class = max(CohortGenService.RECONSTRUCTED_AGE_CLASS, GRADE_MIN - lag)
            for offset, level in enumerate(path):
                records.append(
                    _record(
                        child_id=f"{prefix}{k + 1:0{width}d}",
                        center=f"{STATE_CODES[states[k]]}-01",
                        state=states[k],
                        sex=sexes[k],
                        age_class=age_class,
                        lag=lag,
                        attendance=0,
                        flags=FLAG_COMBINATIONS[level][0],
                        quarter=first_quarter + offset,
                    )
                )
        logger.info(f"Reconstructed {total} children over {len(paths[0]) if paths else 0} quarters")
        return IngestService.build_cohort(records)

    @staticmethod
    def write_csv(cohort: Cohort, target: Union[str, Path, TextIO]) -> None:
        """Write the cohort as a combined assessment CSV (with the quarter column)."""
        IngestService.dump_records(cohort.records, target, include_quarter=True)
