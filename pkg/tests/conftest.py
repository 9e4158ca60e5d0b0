import numpy as np
import pytest

from maskadvisor.datasets import example_configurations, running_example, young_old

PAPER_LABELS = ("VP", "P", "M", "G", "VG")

# Age x Health counts of the 100-record example, columns in PAPER_LABELS order
AGE_HEALTH = {
    "10": (0, 0, 0, 1, 3),
    "17": (0, 0, 0, 4, 8),
    "43": (0, 0, 1, 2, 1),
    "55": (2, 8, 10, 8, 2),
    "60": (4, 6, 9, 1, 0),
    "65": (2, 3, 5, 0, 0),
    "75": (2, 5, 3, 0, 0),
    "80": (5, 3, 2, 0, 0),
}
MASKED_AGE_HEALTH = {
    "Young": (0, 0, 1, 7, 12),
    "Old": (15, 25, 29, 9, 2),
}


def reorder(j, rows, cols=PAPER_LABELS):
    """Cells of ``j`` in the given row and column value order."""
    ri = [j.row_domain.index(r) for r in rows]
    ci = [j.col_domain.index(c) for c in cols]
    return j.cells[np.ix_(ri, ci)]


@pytest.fixture(scope="session")
def example():
    return running_example()


@pytest.fixture(scope="session")
def configs():
    return example_configurations()


@pytest.fixture
def age_mask():
    return young_old()
