import pytest

from app.core.config import PROGRESSION_DIVISOR, RNG_ALGORITHM, _progression_divisor, _rng_algorithm


def test_defaults_are_accepted():
    assert PROGRESSION_DIVISOR == 30.0
    assert RNG_ALGORITHM == "PCG64"
    assert _rng_algorithm("Philox") == "Philox"
    assert _progression_divisor("4") == 4.0


@pytest.mark.parametrize("value", ["0", "-30", "nan", "inf", "thirty", ""])
def test_bad_divisor_is_refused(value):
    with pytest.raises(ValueError, match="CRY_PROGRESSION_DIVISOR"):
        _progression_divisor(value)


@pytest.mark.parametrize("name", ["Mersenne", "default_rng", "Generator", "BitGenerator", ""])
def test_unknown_bit_generator_is_refused(name):
    with pytest.raises(ValueError, match="CRY_RNG_ALGORITHM"):
        _rng_algorithm(name)
