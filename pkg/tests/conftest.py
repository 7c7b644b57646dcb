import pytest

from bienayme_lab import dist

# the family-A member used throughout: unit tail constant, cutoff high
# enough that the desk-scale height ratio sits inside its asymptotic band
CAUCHY_A = {"kind": "cauchy_A", "beta": 1.0, "cutoff": 12, "c": 1.0}
CAUCHY_B = {"kind": "cauchy_B", "k": 2, "cutoff": 16}
CAUCHY_C = {"kind": "cauchy_C", "beta": 0.5, "cutoff": 8}


@pytest.fixture(scope="session")
def geom():
    return dist.load_spec({"kind": "geometric"})


@pytest.fixture(scope="session")
def tab_half():
    return dist.load_spec({"kind": "tabulated", "probs": [0.5, 0, 0.5]})


@pytest.fixture(scope="session")
def cauchy_a():
    return dist.load_spec(CAUCHY_A)


@pytest.fixture(scope="session")
def cauchy_b():
    return dist.load_spec(CAUCHY_B)


@pytest.fixture(scope="session")
def cauchy_c():
    return dist.load_spec(CAUCHY_C)
