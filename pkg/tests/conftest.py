import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from kacsim.kernel import KernelSpec  # noqa: E402

SPECS = [
    KernelSpec.power_law(0.5, 0.5),
    KernelSpec.power_law(0.2, 0.8),
    KernelSpec.power_law(1.0, 0.1),
    KernelSpec.hard_spheres(),
    KernelSpec.hard_spheres(0.5),
]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=SPECS, ids=lambda s: f"{s.law.value}-g{s.gamma}-nu{s.nu}")
def spec(request):
    return request.param
