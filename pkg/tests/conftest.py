import numpy as np
import pytest

from lifpocs.encoder import LifParams, encode
from lifpocs.kernels import build_system
from lifpocs.signal import random_bandlimited


def make_system(T=21, alpha=0.5, offset=1.0, threshold=0.3, seed=0, gram_method='closed_form'):
    """Encode a random input; returns (x, params, kernel system)."""
    x = random_bandlimited(T, 0.7, seed)
    params = LifParams(alpha, offset, threshold)
    ks = build_system(encode(x, params), params, gram_method)
    return x, params, ks


def quad_inner(u, v, T, n=4096):
    """L2 inner product on [0, T] by the periodic trapezoid rule (exact for trig polynomials)."""
    t = np.arange(n) * T / n
    return float(np.sum(u(t) * v(t)) * T / n)


@pytest.fixture
def system():
    return make_system()


@pytest.fixture(params=[(0.03, 1.0), (0.8, 0.0), (1.5, 1.0)], ids=['a0.03-uni', 'a0.8-bi', 'a1.5-uni'])
def systems(request):
    alpha, c = request.param
    return make_system(alpha=alpha, offset=c, threshold=0.25 if c else 0.12, seed=7)


ACCEPTANCE = {}


def record_criterion(number, ok, detail):
    """Remember one acceptance outcome for the end-of-run summary."""
    ACCEPTANCE[number] = '%s criterion %2d: %s' % ('PASS' if ok else 'FAIL', number, detail)
    print(ACCEPTANCE[number])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section('acceptance criteria')
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
