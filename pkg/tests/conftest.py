import random
import sys

import pytest
from hypothesis import settings
from hypothesis import strategies as st

from fermicoh.grassmann import GrassmannElement

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def bubble_sign(ranks):
    """O(d^2) reference: count adjacent transpositions; repeated rank gives 0."""
    seq = list(ranks)
    if len(set(seq)) != len(seq):
        return 0, ()
    swaps = 0
    for i in range(len(seq)):
        for j in range(len(seq) - 1 - i):
            if seq[j] > seq[j + 1]:
                seq[j], seq[j + 1] = seq[j + 1], seq[j]
                swaps += 1
    return (-1) ** swaps, tuple(seq)


def random_element(rng: random.Random, n: int, density: float = 0.3, parity: int | None = None) -> GrassmannElement:
    terms = {}
    for mask in range(1 << (2 * n)):
        if parity is not None and bin(mask).count("1") % 2 != parity:
            continue
        if rng.random() < density:
            terms[mask] = complex(rng.randint(-4, 4), rng.randint(-4, 4))
    return GrassmannElement(n, terms)


@st.composite
def elements(draw, n=2, parity=None):
    masks = st.integers(0, (1 << (2 * n)) - 1)
    if parity is not None:
        masks = masks.filter(lambda m: bin(m).count("1") % 2 == parity)
    coeffs = st.complex_numbers(max_magnitude=4, allow_nan=False, allow_infinity=False)
    terms = draw(st.dictionaries(masks, coeffs, max_size=6))
    # small integers keep products exactly representable
    terms = {m: complex(round(c.real), round(c.imag)) for m, c in terms.items()}
    return GrassmannElement(n, terms)


@pytest.fixture
def rng():
    return random.Random(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
