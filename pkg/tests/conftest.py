import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

_ACCEPTANCE: dict = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    marker = "test_acceptance.py::test_criterion_"
    if marker in report.nodeid:
        name = report.nodeid.split(marker, 1)[1]
        _ACCEPTANCE[name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        num, _, title = name.partition("_")
        terminalreporter.write_line(
            "criterion %2d %-45s %s" % (int(num), title.replace("_", " "), _ACCEPTANCE[name]))


@pytest.fixture(scope="session")
def corpus():
    from flatland import l_origami, origami, square_torus, staircase, torus, torus_triangles

    return {
        "square": square_torus(),
        "tall": torus((1, 0), (0, 2)),
        "sheared": torus((1, 0), ("1/2", 1)),
        "triangles": torus_triangles(),
        "L": l_origami(),
        "cyl3": origami((1, 2, 0), (0, 1, 2)),
        "origami4": origami((1, 0, 3, 2), (2, 3, 0, 1)),
        "stair6": staircase(6),
    }
