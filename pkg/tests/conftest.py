import numpy as np
import pytest

from manifold_align import _kernels


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


BACKENDS = ["numpy"] + (["numba"] if _kernels.HAS_NUMBA else [])


@pytest.fixture(params=BACKENDS)
def kernel_impl(request):
    """Namespace of one backend's hot kernels."""
    suffix = request.param
    return {
        name: getattr(_kernels, f"{name}_{suffix}")
        for name in ("pairwise_distances", "knn_select", "calibrate_rows", "sparse_inner")
    }


_ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


@pytest.fixture
def acceptance_log(request):
    return request.config.stash[_ACCEPTANCE_KEY]


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line[1])
