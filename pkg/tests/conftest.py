import pytest

from wickgen.scaling import BackgroundField, Field, FieldMultiplet, ModelSpec

# Lines recorded by the acceptance tests, echoed in the terminal summary.
ACCEPTANCE_LINES = {}

_BASES = {}

M2 = ("m2", 0, 2, "general", "m²")


def make_model(fields, backgrounds=(), dim=4, oriented=False, max_weight=None):
    """ModelSpec from (name, rank, degree) and (name, rank, degree[, symmetry[, display]]) tuples."""
    return ModelSpec(
        dim,
        oriented,
        FieldMultiplet(tuple(Field(*f) for f in fields)),
        tuple(BackgroundField(*b) for b in backgrounds),
        max_weight=max_weight,
    )


@pytest.fixture
def vector_kg():
    return make_model([("A", 1, 0)], [M2, ("xi", 0, 0, "general", "ξ")], oriented=True)


@pytest.fixture
def scalar_grad():
    return make_model([("phi", 0, 1), ("dphi", 1, 1)], [M2, ("xi", 0, 0, "general", "ξ")], oriented=True)


@pytest.fixture
def tensor_xi():
    return make_model([("A", 1, 0)], [M2, ("xi", 2, -2, "symmetric", "ξ")], oriented=True)


def fixture_bases():
    """Enumerated bases of all bundled fixture components (computed once per session)."""
    if not _BASES:
        from wickgen.suites import fixture_bases as build

        _BASES.update(build(samples=5, seed=0))
    return _BASES


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
