import pytest

from revdoor.paths import MarketParams, SimGrid


@pytest.fixture
def market():
    return MarketParams(mu_s=0.05, sigma_s=0.2, mu_i=0.06, sigma_i=0.15, rho=0.3, r=0.05, s0=100.0, i0=50.0)


@pytest.fixture
def small_grid():
    return SimGrid(t_max=1.0, n_steps=20, n_paths=2000, seed=11)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion covered by a test")
    config._acceptance = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and rep.passed):
        return
    n, title = mark.args
    results = item.config._acceptance
    prev = results.get(n, (title, True))
    results[n] = (title, prev[1] and rep.passed)


def pytest_terminal_summary(terminalreporter, config):
    results = config._acceptance
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        title, ok = results[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {title}")
