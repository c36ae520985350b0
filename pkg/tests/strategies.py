"""Shared hypothesis strategies."""

from fractions import Fraction

from hypothesis import strategies as st

from multibell.algebra import Coefficient
from multibell.bell import BellFunction

small_rationals = st.builds(Fraction, st.integers(-6, 6), st.integers(1, 6))
primes = st.sampled_from([2, 3, 5, 7])


@st.composite
def coefficients(draw, d):
    return Coefficient.from_alpha(draw(st.lists(small_rationals, min_size=d, max_size=d)))


@st.composite
def bell_functions(draw, n=None, d=None):
    d = d if d is not None else draw(primes)
    n = n if n is not None else draw(st.integers(1, 3))
    return BellFunction(n, d, tuple(draw(coefficients(d)) for _ in range(2**n)))
