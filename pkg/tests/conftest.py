import warnings

import pytest

from hodgelab.errors import ClusterWarning


@pytest.fixture(autouse=True)
def _quiet_cluster_warnings():
    # degenerate eigenvalue clusters from mesh symmetry are expected
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ClusterWarning)
        yield
