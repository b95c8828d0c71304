import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from macdfs.ket import KetSyntaxError, format_ket, parse_ket
from macdfs.schmidt import PureState


def test_two_term_expansion():
    s = parse_ket("1/sqrt(2)(|01> - |10>)", 2)
    assert np.allclose(s.amps, [0, 0.70710678, -0.70710678, 0], atol=1e-8)
    assert not s.unnormalized


def test_three_term_example():
    s = parse_ket("1/sqrt(3)(|00>+|11>+|22>)", 3)
    assert np.allclose(s.amps.reshape(3, 3), np.eye(3) / np.sqrt(3))


def test_accumulation_is_flagged_unnormalized():
    s = parse_ket("|00> + |00>", 3)
    assert s.amps[0] == 2 and s.unnormalized


@pytest.mark.parametrize(
    "text, index, value",
    [
        ("0.5|01>", 1, 0.5),
        ("1/2 |10>", 2, 0.5),
        ("(0,1)|11>", 3, 1j),
        ("(-0.5, 2e-1)|00>", 0, -0.5 + 0.2j),
        ("sqrt(4)*|01>", 1, 2.0),
        ("-|11>", 3, -1.0),
        ("2(1/2(|10>))", 2, 1.0),
    ],
)
def test_coefficient_forms(text, index, value):
    s = parse_ket(text, 2)
    assert s.amps[index] == pytest.approx(value)


@pytest.mark.parametrize(
    "text, pos",
    [
        ("|0a>", 1),
        ("|012>", 1),
        ("|03>", 1),
        ("0.5", 3),
        ("|00> +", 6),
        ("|00> |11>", 5),
        ("1/0|00>", 3),
    ],
)
def test_syntax_errors_report_position(text, pos):
    with pytest.raises(KetSyntaxError) as err:
        parse_ket(text, 3)
    assert err.value.pos == pos


def test_empty_expression():
    with pytest.raises(KetSyntaxError):
        parse_ket("   ", 3)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 9), st.floats(0.0, 1.0))
def test_format_parse_round_trip(seed, d, sparsity):
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=d * d) + 1j * rng.normal(size=d * d)
    amps[rng.random(d * d) < sparsity] = 0
    s = PureState(d, d, amps, unnormalized=True)
    back = parse_ket(format_ket(s), d)
    assert np.max(np.abs(back.amps - s.amps)) <= 1e-12
