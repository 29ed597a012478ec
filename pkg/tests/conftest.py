import os

import pytest

from riemann_uncertainty.zeta_core import COEFF_PRECISION, load_or_compute_series

_ACCEPTANCE = {}


@pytest.fixture(scope="session", autouse=True)
def _isolated_cache(tmp_path_factory):
    """Keep coefficient caches and run manifests out of the user's home."""
    root = tmp_path_factory.mktemp("riemann")
    old = {k: os.environ.get(k) for k in ("RIEMANN_CACHE_DIR", "RIEMANN_RUN_DIR")}
    os.environ["RIEMANN_CACHE_DIR"] = str(root / "cache")
    os.environ["RIEMANN_RUN_DIR"] = str(root / "runs")
    yield root
    for k, v in old.items():
        if v is None:
            os.environ.pop(k, None)
        else:
            os.environ[k] = v


@pytest.fixture(scope="session")
def zeta40():
    return load_or_compute_series(40, 0.5, None, COEFF_PRECISION)[0]


@pytest.fixture(scope="session")
def zeta60():
    return load_or_compute_series(60, 0.5, None, COEFF_PRECISION)[0]


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        _ACCEPTANCE[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        verdict = "PASS" if _ACCEPTANCE[name] == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict}  {name}")
