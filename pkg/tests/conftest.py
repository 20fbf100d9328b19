from fractions import Fraction

import hypothesis.strategies as st
from hypothesis import settings

settings.register_profile("default", max_examples=100, deadline=None)
settings.load_profile("default")


def rationals(lo=1, hi=20, max_den=12):
    """Exact rationals in [lo, hi]."""
    return st.builds(
        lambda num, den: Fraction(num, den),
        st.integers(lo, hi * max_den),
        st.integers(1, max_den),
    ).filter(lambda x: lo <= x <= hi)


def exponents(lo=1, hi=20, allow_inf=True):
    base = rationals(lo, hi)
    return st.one_of(base, st.just(float("inf"))) if allow_inf else base


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
