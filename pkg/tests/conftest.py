import numpy as np
import pytest
from scipy.optimize import minimize_scalar

TWO_PI = 2 * np.pi
KHZ = TWO_PI * 1e3

# high-power blue-sideband parameters of the 40Ca+ experiment
FIG3 = {"eta": 0.045, "rabi": 1090 * KHZ, "omega_z": 1850 * KHZ}


def numerical_range_fmin(a):
    """Exact min over unit psi of |<psi|a|psi>|^2.

    The numerical range is convex, so its distance from the origin is
    max_theta lambda_min((e^{i theta} a + h.c.)/2), clipped at zero.
    """
    def lam(t):
        b = np.exp(1j * t) * a
        return np.linalg.eigvalsh((b + b.conj().T) / 2)[0]

    ts = np.linspace(0, TWO_PI, 1441)
    vals = np.array([lam(t) for t in ts])
    i = int(np.argmax(vals))
    res = minimize_scalar(lambda t: -lam(t), bounds=(ts[i] - 0.005, ts[i] + 0.005),
                          method="bounded", options={"xatol": 1e-13})
    return max(0.0, -res.fun, vals[i]) ** 2


@pytest.fixture
def criterion(request):
    """Print and record one PASS/FAIL line per acceptance criterion."""
    lines = request.config.stash.setdefault(_LINES, [])

    def check(number, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
        print(line)
        lines.append(line)
        assert ok, line

    return check


_LINES = pytest.StashKey[list]()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
