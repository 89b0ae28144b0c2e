import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from floorloc import synthetic as syn  # noqa: E402
from floorloc.geometry import solve_homography  # noqa: E402


@pytest.fixture(scope="session")
def s1_cam():
    return syn.s1_camera()


@pytest.fixture(scope="session")
def s1_hom(s1_cam):
    image, floor = syn.calibration_from_grid(s1_cam, *syn.S1_GRID)
    return solve_homography(image, floor)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, detail = results[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
