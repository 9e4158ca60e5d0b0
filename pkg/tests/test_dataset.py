import io
import json

import numpy as np
import pytest

from maskadvisor.dataset import (
    AttributeDomain,
    DatasetError,
    JointDistribution,
    MarginalDistribution,
    canonical_order,
    joint,
    load_dataset,
    marginal,
    read_summaries,
    write_summaries,
)
from maskadvisor.datasets import excerpt

from conftest import AGE_HEALTH, reorder


def test_canonical_order_numeric_and_text():
    assert canonical_order(["10", "9", "100"]) == ["9", "10", "100"]
    assert canonical_order(["b", "10", "a"]) == ["10", "a", "b"]
    assert canonical_order(["nan", "1"]) == ["1", "nan"]


def test_age_marginal(example):
    m = marginal(example, "Age")
    assert m.to_dict() == {"10": 4, "17": 12, "43": 4, "55": 30, "60": 20,
                           "65": 10, "75": 10, "80": 10}
    assert m.total == 100


def test_label_marginal(example):
    labels = dict(zip(*np.unique(example.codes["Health"], return_counts=True)))
    counts = {example.domains["Health"].values[k]: int(v) for k, v in labels.items()}
    assert counts == {"VG": 14, "G": 16, "M": 30, "P": 25, "VP": 15}


def test_joint_matches_table(example):
    j = joint(example, "Age")
    np.testing.assert_array_equal(reorder(j, list(AGE_HEALTH)), np.array(list(AGE_HEALTH.values())))
    assert j.total == 100
    np.testing.assert_array_equal(j.row_sums(), marginal(example, "Age").as_array())


def test_excerpt_rows():
    rows = list(excerpt().rows())
    assert rows[0] == (("10", "30", "21162"), "G")
    assert rows[-1] == (("80", "78", "25165"), "VG")


def test_load_errors():
    with pytest.raises(DatasetError, match="empty file"):
        load_dataset(io.StringIO(""), "y")
    with pytest.raises(DatasetError, match="empty dataset"):
        load_dataset(io.StringIO("a,y\n"), "y")
    with pytest.raises(DatasetError, match="label"):
        load_dataset(io.StringIO("a,b\n1,2\n"), "y")
    with pytest.raises(DatasetError, match="ragged row at line 3"):
        load_dataset(io.StringIO("a,y\n1,2\n1\n"), "y")


def test_binning_equal_width():
    d = load_dataset(io.StringIO("a,y\n0,p\n4,p\n5,n\n10,n\n"), "y", bins={"a": 2})
    assert len(d.domains["a"]) == 2
    assert marginal(d, "a").as_array().tolist() == [2, 2]


def test_joint_json_roundtrip(example):
    j = joint(example, "Zip")
    back = JointDistribution.from_json(json.loads(json.dumps(j.to_json(note="x"))))
    assert back.row_domain == j.row_domain and back.col_domain == j.col_domain
    np.testing.assert_array_equal(back.cells, j.cells)


def test_joint_cells_read_only(example):
    j = joint(example, "Age")
    with pytest.raises(ValueError):
        j.cells[0, 0] = 5


def test_joint_rejects_negative():
    dom = AttributeDomain("a", ("1", "2"))
    lab = AttributeDomain("y", ("p",))
    with pytest.raises(ValueError):
        JointDistribution(dom, lab, np.array([[1.0], [-1.0]]))


def test_summaries_roundtrip_and_deterministic(example):
    text = write_summaries(example)
    assert text == write_summaries(example)
    back = read_summaries(io.StringIO(text))
    assert back["Age"].to_dict() == marginal(example, "Age").to_dict()
    assert isinstance(back["Weight"], MarginalDistribution)
