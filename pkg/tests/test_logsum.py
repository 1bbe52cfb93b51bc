import math
from fractions import Fraction as F

from hypothesis import given, strategies as st

from irmlab import LogSum
from irmlab.risk import entropy

rationals = st.fractions(min_value=F(1, 500), max_value=1000, max_denominator=500)


def test_factored_form():
    assert LogSum.log(F(12, 5)).terms == ((2, 2), (3, 1), (5, -1))
    assert LogSum.log(1).is_zero()


@given(rationals, rationals)
def test_log_is_additive(a, b):
    assert LogSum.log(a * b) == LogSum.log(a) + LogSum.log(b)


@given(rationals)
def test_float_value(a):
    assert math.isclose(float(LogSum.log(a)), math.log(a), rel_tol=1e-12, abs_tol=1e-12)


@given(rationals, rationals)
def test_order_matches_reals(a, b):
    la, lb = LogSum.log(a), LogSum.log(b)
    assert (la < lb) == (a < b)
    assert (la == lb) == (a == b)


def test_near_ties_resolved_exactly():
    # 3^12 = 531441 and 2^19 = 524288 are close; the sign must still be right
    x = 12 * LogSum.log(3) - 19 * LogSum.log(2)
    assert x > 0
    assert -x < 0
    assert x > F(1, 100) and x < F(2, 100)


def test_entropy_of_row():
    h = entropy((F(1, 5), F(4, 5)))
    assert h == LogSum.log(5) - F(8, 5) * LogSum.log(2)
    assert abs(float(h) + (0.2 * math.log(0.2) + 0.8 * math.log(0.8))) < 1e-15
    assert str(h) == "-8/5*log(2) + log(5)"


def test_infinity_ordering():
    assert LogSum.log(7) < math.inf
    assert LogSum.log(7) + math.inf == math.inf
