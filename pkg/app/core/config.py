import os
import json
import math

import numpy as np
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


def _progression_divisor(value: str) -> float:
    try:
        divisor = float(value)
    except ValueError:
        divisor = math.nan
    if not math.isfinite(divisor) or divisor <= 0:
        raise ValueError(f"CRY_PROGRESSION_DIVISOR must be a positive finite number, got {value!r}")
    return divisor


def _rng_algorithm(name: str) -> str:
    generator = getattr(np.random, name, None)
    if not (
        isinstance(generator, type)
        and issubclass(generator, np.random.BitGenerator)
        and generator is not np.random.BitGenerator
    ):
        raise ValueError(f"CRY_RNG_ALGORITHM must name a numpy bit generator such as PCG64, got {name!r}")
    return name


# Input / output locations
DATA_DIR = os.getenv("CRY_DATA_DIR", ".")
REPORT_DIR = os.getenv("CRY_REPORT_DIR", "report")

# Logging
LOG_LEVEL = os.getenv("CRY_LOG_LEVEL", "INFO")

# Grade (school class) bounds accepted for age-appropriate and compatible class
GRADE_MIN = int(os.getenv("CRY_GRADE_MIN", "0"))
GRADE_MAX = int(os.getenv("CRY_GRADE_MAX", "12"))

# S* = S / PROGRESSION_DIVISOR
PROGRESSION_DIVISOR = _progression_divisor(os.getenv("CRY_PROGRESSION_DIVISOR", "30"))

# Pseudo-random bit generator used by the synthetic cohort generator (numpy name)
RNG_ALGORITHM = _rng_algorithm(os.getenv("CRY_RNG_ALGORITHM", "PCG64"))

# Letter grade -> improvement level
GRADE_LEVELS = json.loads(
    os.getenv("CRY_GRADE_LEVELS", '{"A": 4, "B": 3, "C": 2, "D": 1, "E": 0}')
)

# Assessment settings
QUARTERS = (1, 2, 3)
IMPROVEMENT_LEVELS = (0, 1, 2, 3, 4)
MAX_LEVEL = IMPROVEMENT_LEVELS[-1]

# CSV schema
FLAG_COLUMNS = ("imp_lang1", "imp_lang2", "imp_math", "imp_writing")
CSV_COLUMNS = (
    "child_id",
    "center",
    "state",
    "sex",
    "age_appropriate_class",
    "compatible_class",
    "attendance",
) + FLAG_COLUMNS
QUARTER_COLUMN = "quarter"
QUARTER_FILE_TEMPLATE = "quarter{quarter}.csv"
COMBINED_FILE = "assessments.csv"

# Case-insensitive aliases accepted in the state / sex columns
STATE_ALIASES = {
    "jammu & kashmir": "Jammu & Kashmir",
    "jammu and kashmir": "Jammu & Kashmir",
    "jammukashmir": "Jammu & Kashmir",
    "j&k": "Jammu & Kashmir",
    "jk": "Jammu & Kashmir",
    "jharkhand": "Jharkhand",
    "jh": "Jharkhand",
    "manipur": "Manipur",
    "mn": "Manipur",
    "west bengal": "West Bengal",
    "westbengal": "West Bengal",
    "wb": "West Bengal",
}
SEX_ALIASES = {
    "male": "Male",
    "m": "Male",
    "boy": "Male",
    "female": "Female",
    "f": "Female",
    "girl": "Female",
}
