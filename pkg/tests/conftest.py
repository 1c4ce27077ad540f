from fractions import Fraction

import pytest

from wildflat.surface import Surface


def make_square_torus(side=1) -> Surface:
    s = Surface()
    F = Fraction
    c = s.add_chart(
        [(F(0), F(0)), (F(side), F(0)), (F(side), F(side)), (F(0), F(side))],
        label="torus",
    )
    bottom, right, top, left = s.chart_edges(c)
    s.glue_edges(bottom, top)
    s.glue_edges(left, right)
    return s


def make_two_tori_with_slit() -> Surface:
    """Two unit tori, each cut along ((1/4,1/2),(3/4,1/2)), glued crosswise."""
    s = Surface()
    F = Fraction
    slits = []
    for _ in range(2):
        c = s.add_chart(
            [(F(0), F(0)), (F(1), F(0)), (F(1), F(1)), (F(0), F(1))],
            label="torus",
        )
        bottom, right, top, left = s.chart_edges(c)
        s.glue_edges(bottom, top)
        s.glue_edges(left, right)
        slits.append(s.cut_slit(c, (F(1, 4), F(1, 2)), (F(3, 4), F(1, 2))))
    (a_up, a_lo), (b_up, b_lo) = slits
    s.glue_edges(a_up, b_lo)
    s.glue_edges(a_lo, b_up)
    return s


@pytest.fixture
def square_torus():
    return make_square_torus().finalize()


@pytest.fixture
def two_tori_slit():
    return make_two_tori_with_slit().finalize()
