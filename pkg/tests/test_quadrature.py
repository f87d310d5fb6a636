import math

import numpy as np
import pytest

from paritybounds.quadrature import QuadratureError, integrate


@pytest.mark.parametrize("d", range(1, 9))
def test_powers(d):
    res = integrate(lambda u: u**d, [0.0, 1.0], tol=1e-12)
    assert abs(res.value - 1.0 / (d + 1)) < 1e-12


def test_kink_at_breakpoint():
    res = integrate(lambda x: np.abs(x - 0.3), [0.0, 0.3, 1.0])
    assert res.value == pytest.approx(0.5 * (0.09 + 0.49), abs=1e-14)


def test_endpoint_derivative_singularity():
    res = integrate(np.sqrt, [0.0, 1.0], tol=1e-12)
    assert res.value == pytest.approx(2.0 / 3.0, abs=1e-12)


def test_budget_exhaustion_reports_partial():
    with pytest.raises(QuadratureError) as info:
        integrate(lambda x: np.sin(1.0 / x), [1e-6, 1.0], tol=1e-14, max_panels=20)
    assert math.isfinite(info.value.partial.value)


def test_empty_interval():
    assert integrate(np.exp, [1.0, 1.0]).value == 0.0
