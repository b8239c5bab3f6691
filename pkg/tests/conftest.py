from fractions import Fraction

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from torsionflow.poly import Poly

settings.register_profile(
    "default", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# filled by test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1])):
            terminalreporter.write_line(line)

rationals = st.builds(Fraction, st.integers(-9, 9), st.integers(1, 9))
gaussians = st.tuples(rationals, rationals)


@st.composite
def polys(draw, max_degree=3, max_terms=5, real=False):
    """Small polynomials in x, y, t with rational (or Gaussian rational) coefficients."""
    n = draw(st.integers(0, max_terms))
    terms = {}
    for _ in range(n):
        a = draw(st.integers(0, max_degree))
        b = draw(st.integers(0, max_degree - a))
        c = draw(st.integers(0, max_degree - a - b))
        terms[(a, b, c)] = draw(rationals) if real else draw(gaussians)
    return Poly.from_terms(terms)
