import pytest

from invmeasure.maps import make_map

# every family with representative parameters
CATALOG = [
    ("renyi", {"r": 2}),
    ("renyi", {"r": 3}),
    ("nr", {"r": 2}),
    ("nr", {"r": 4}),
    ("logistic", {}),
    ("chebyshev", {"r": 2}),
    ("chebyshev", {"r": 3}),
    ("chebyshev", {"r": 5}),
    ("lattes", {"g2": 4, "g3": 0}),
    ("lattes", {"g2": 5, "g3": 1}),
    ("sn2", {"m": 0.5}),
    ("sn2", {"kappa": 0.5}),
    ("cauchy_doubling", {}),
    ("boole_lft", {"a": 2, "b": 1, "c": 1, "d": 1}),
]

# maps with a closed-form invariant density
DENSITY_MAPS = [
    ("logistic", {}),
    ("chebyshev", {"r": 2}),
    ("chebyshev", {"r": 3}),
    ("chebyshev", {"r": 4}),
    ("chebyshev", {"r": 5}),
    ("sn2", {"m": 0.25}),
    ("sn2", {"m": 0.5}),
    ("lattes", {"g2": 4, "g3": 0}),
    ("lattes", {"g2": 5, "g3": 1}),
    ("lattes", {"g2": 8, "g3": 2}),
    ("cauchy_doubling", {}),
]


def label(case):
    fam, params = case
    return fam + "".join(f"-{k}{v}" for k, v in params.items())


@pytest.fixture(params=CATALOG, ids=[label(c) for c in CATALOG])
def any_map(request):
    fam, params = request.param
    return make_map(fam, **params)


@pytest.fixture(params=DENSITY_MAPS, ids=[label(c) for c in DENSITY_MAPS])
def density_map(request):
    fam, params = request.param
    return make_map(fam, **params)


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    """Record one (criterion, passed, detail) line for the terminal summary."""
    log = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(n, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'} criterion {n}: {detail}"
        log.append((n, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, config):
    log = config.stash.get(_ACCEPTANCE, [])
    if log:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(log):
            terminalreporter.write_line(line)
