import pytest
from hypothesis import given, strategies as st

from promst.scoring import modified_score, progress_score


def test_progress_exact_values():
    assert progress_score(0, 4) == 0.0
    assert progress_score(3, 4) == 0.75
    assert progress_score(4, 4) == 1.0


def test_progress_rejects_bad_inputs():
    with pytest.raises(ValueError):
        progress_score(1, 0)
    with pytest.raises(ValueError):
        progress_score(-1, 4)
    with pytest.raises(ValueError):
        progress_score(5, 4)


def test_subtractive_not_clamped():
    # penalty may push the score below zero by design
    assert modified_score(0.5, 10, 0.1, "subtractive") == pytest.approx(-0.5, abs=1e-12)
    assert modified_score(0.8, 3, 0.05, "subtractive") == pytest.approx(0.65, abs=1e-12)


def test_divisive_exact():
    assert modified_score(0.9, 4, 0.25, "divisive") == pytest.approx(0.45, abs=1e-12)
    assert modified_score(0.0, 100, 1.0, "divisive") == 0.0


def test_unknown_mode():
    with pytest.raises(ValueError):
        modified_score(0.5, 1, 0.1, "multiplicative")


@given(
    done=st.integers(0, 50),
    total=st.integers(1, 50),
)
def test_progress_bounds(done, total):
    if done > total:
        done = total
    assert 0.0 <= progress_score(done, total) <= 1.0


@given(
    base=st.floats(0, 1),
    factor=st.floats(0, 100),
    ratio=st.floats(0, 1),
)
def test_divisive_never_exceeds_base(base, factor, ratio):
    assert modified_score(base, factor, ratio, "divisive") <= base + 1e-12
