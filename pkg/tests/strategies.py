import random

from hypothesis import strategies as st

from dgtower.exactlin import Field
from dgtower.randomgen import random_category

FIELDS = [Field.prime(2), Field.prime(5), Field.rationals()]
FAMILIES = ["directed", "cellular", "doubled", "polynomial"]


@st.composite
def categories(draw, fields=FIELDS, families=FAMILIES):
    """Random positively graded finite dg categories within the suite bounds."""
    F = draw(st.sampled_from(fields))
    family = draw(st.sampled_from(families))
    seed = draw(st.integers(0, 10**6))
    return random_category(F, random.Random(seed), family)[1]
