import numpy as np
import pytest

from adaptseg.image_io import image_from_array


def random_image(rng, width, height, channels=3):
    """Random 8-bit test image as an ImageBuffer."""
    if channels == 1:
        arr = rng.integers(0, 256, (height, width)).astype(np.float64)
    else:
        arr = rng.integers(0, 256, (height, width, channels)).astype(np.float64)
    return image_from_array(arr)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Print one PASS/FAIL line per acceptance criterion."""
    lines = []
    for status, label in (("passed", "PASS"), ("failed", "FAIL"),
                          ("error", "FAIL")):
        for rep in terminalreporter.stats.get(status, ()):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::" not in nodeid:
                continue
            if getattr(rep, "when", "call") not in ("call", "setup"):
                continue
            lines.append((nodeid.split("::")[-1], label))
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, label in sorted(lines):
            terminalreporter.write_line(f"{label}  {name}")
