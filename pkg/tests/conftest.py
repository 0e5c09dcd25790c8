import sys
from pathlib import Path

from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from carrykit.ring import Base, DigitSet  # noqa: E402


@st.composite
def digit_sets(draw, min_b=2, max_b=9, odd=False):
    b = draw(st.integers(min_b, max_b).filter(lambda n: n % 2 == 1 or not odd))
    lifts = draw(st.lists(st.integers(0, b - 1), min_size=b, max_size=b))
    return DigitSet(Base(b), tuple(i + b * t for i, t in enumerate(lifts)))


_CRITERIA = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_c" not in report.nodeid:
        return
    if report.when == "call" or report.outcome != "passed":
        name = report.nodeid.split("::")[-1]
        crit = name.split("_")[1]
        ok = report.outcome == "passed"
        prev = _CRITERIA.get(crit, (True, []))
        _CRITERIA[crit] = (prev[0] and ok, prev[1] + [name])


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_CRITERIA):
        ok, names = _CRITERIA[crit]
        label = names[0].split("[")[0][len("test_") + len(crit) + 1 :]
        terminalreporter.write_line(f"criterion {int(crit[1:]):2d} {'PASS' if ok else 'FAIL'}  {label}")
