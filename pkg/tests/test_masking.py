import io
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maskadvisor.dataset import AttributeDomain, Dataset, MarginalDistribution, joint, marginal
from maskadvisor.datasets import excerpt
from maskadvisor.masking import (
    GeneratorPolicy,
    InverseImage,
    MaskingConfiguration,
    MaskingError,
    MaskingFunction,
    aggregate_joint,
    apply_mask,
    dump_configurations,
    generate_configurations,
    inverse_image,
    load_configurations,
    mask_dataset,
    masked_joint,
    masked_marginal,
)

from conftest import MASKED_AGE_HEALTH, reorder


def test_apply_mask_examples(age_mask):
    assert apply_mask(age_mask, "43") == "Young"
    assert apply_mask(age_mask, "45") == "Old"
    assert apply_mask(MaskingFunction.blur_numeric(10), "53.5") == "50"
    assert apply_mask(MaskingFunction.blur_prefix(3), "12345") == "123**"
    assert apply_mask(MaskingFunction.identity(), "x y") == "x y"
    assert apply_mask(MaskingFunction.suppress(), "42") == "*"


def test_blur_midpoint_goes_down():
    f = MaskingFunction.blur_numeric(10)
    assert apply_mask(f, "55") == "50"
    assert apply_mask(f, "56") == "60"
    assert apply_mask(f, "-55") == "-60"


def test_bucketize_labels():
    f = MaskingFunction.bucketize(5)
    assert apply_mask(f, "30") == "[30,35)"
    assert apply_mask(f, "34.9") == "[30,35)"
    assert apply_mask(MaskingFunction.bucketize(10, origin=1), "10") == "[1,11)"


def test_errors():
    with pytest.raises(MaskingError):
        apply_mask(MaskingFunction.bucketize(5), "abc")
    with pytest.raises(MaskingError):
        apply_mask(MaskingFunction.generalize_mapping({"a": "x"}), "b")
    with pytest.raises(MaskingError):
        apply_mask(MaskingFunction.generalize_ranges([(10, 45, "Young")]), "5")
    with pytest.raises(MaskingError):
        MaskingFunction.bucketize(0)
    with pytest.raises(MaskingError):
        MaskingFunction("noise", {})


def test_inverse_image_young_old(example, age_mask):
    inv = inverse_image(age_mask, example.domains["Age"])
    groups = {mv: set(inv.preimages[mv]) for mv in inv.masked_domain.values}
    assert groups == {"Young": {"10", "17", "43"}, "Old": {"55", "60", "65", "75", "80"}}


def test_inverse_image_trivial_kinds(example):
    dom = example.domains["Zip"]
    sup = inverse_image(MaskingFunction.suppress(), dom)
    assert sup.masked_domain.values == ("*",) and len(sup.preimages["*"]) == len(dom)
    ident = inverse_image(MaskingFunction.identity(), dom)
    assert ident.group_sizes().tolist() == [1] * len(dom)


def test_inverse_image_rejects_overlap():
    dom = AttributeDomain("a", ("1", "2"))
    with pytest.raises(MaskingError):
        InverseImage.from_preimages(dom, {"x": ["1", "2"], "y": ["2"]})
    with pytest.raises(MaskingError):
        InverseImage.from_preimages(dom, {"x": ["1"]})


def test_masked_joint_young_old(example, age_mask):
    mj = masked_joint(example, "Age", age_mask)
    np.testing.assert_array_equal(reorder(mj, list(MASKED_AGE_HEALTH)),
                                  np.array(list(MASKED_AGE_HEALTH.values())))
    assert mj.total == 100


def test_masked_joint_identity_and_suppress(example):
    j = joint(example, "Weight")
    ident = masked_joint(example, "Weight", MaskingFunction.identity())
    assert np.array_equal(ident.cells, j.cells)
    sup = masked_joint(example, "Age", MaskingFunction.suppress())
    assert reorder(sup, ["*"]).tolist() == [[15, 25, 30, 16, 14]]


def test_masked_marginal(example, age_mask):
    m = marginal(example, "Age")
    inv = inverse_image(age_mask, m.domain)
    assert masked_marginal(m, inv).to_dict() == {"Old": 80, "Young": 20}
    ident = masked_marginal(m, inverse_image(MaskingFunction.identity(), m.domain))
    assert ident.to_dict() == m.to_dict()
    sup = masked_marginal(m, inverse_image(MaskingFunction.suppress(), m.domain))
    assert sup.to_dict() == {"*": 100}


def test_second_masked_view_first_row():
    d = excerpt()
    ident = MaskingFunction.identity()
    config = MaskingConfiguration("m2", (
        ("Age", MaskingFunction.generalize_ranges([(10, 45, "Young"), (45, None, "Old")])),
        ("Weight", MaskingFunction.bucketize(5)),
        ("Zip", ident),
    ))
    rows = list(mask_dataset(d, config).rows())
    assert rows[0] == (("Young", "[30,35)", "21162"), "G")
    assert [r[0][0] for r in rows] == ["Young", "Young", "Young", "Old", "Old", "Old"]


def test_configuration_validation():
    ident = MaskingFunction.identity()
    with pytest.raises(MaskingError):
        MaskingConfiguration("c", (("a", ident), ("a", ident)))
    c = MaskingConfiguration("c", (("a", ident),))
    with pytest.raises(MaskingError):
        c.validate_for(["a", "b"])
    with pytest.raises(MaskingError):
        MaskingConfiguration("c", (("y", ident),)).validate_for(["y"], label_name="y")


def test_configuration_file_roundtrip(configs):
    text = dump_configurations(configs)
    assert load_configurations(io.StringIO(text)) == configs
    with pytest.raises(MaskingError):
        load_configurations(io.StringIO(
            '[{"id": "c", "assignments": [{"attribute": "a", "kind": "shuffle", "params": {}}]}]'))


def test_generator_deterministic(example):
    a = generate_configurations(example, 50, seed=7)
    b = generate_configurations(example, 50, seed=7)
    assert a == b
    assert [c.id for c in a] == [f"cfg-{i:03d}" for i in range(50)]
    assert len({c for c in a}) == 50
    for c in a:
        c.validate_for(example.attribute_names, example.label_name)


def test_generator_seeds_differ(example):
    differing = sum(generate_configurations(example, 5, s) != generate_configurations(example, 5, s + 100)
                    for s in range(20))
    assert differing == 20


def test_generator_identity_policy(example):
    (c,) = generate_configurations(example, 1, seed=3, policy=GeneratorPolicy.identity_only())
    assert all(f.kind == "identity" for _, f in c.assignments)
    with pytest.raises(MaskingError):
        generate_configurations(example, 2, seed=3, policy=GeneratorPolicy.identity_only())
    with pytest.raises(MaskingError):
        generate_configurations(example, 0, seed=3)


def test_generated_functions_apply(example):
    for c in generate_configurations(example, 30, seed=11):
        for a, f in c.assignments:
            inv = inverse_image(f, example.domains[a])
            assert inv.group_sizes().sum() == len(example.domains[a])


# property checks against a row-by-row oracle ---------------------------------

def _functions():
    return st.one_of(
        st.just(MaskingFunction.identity()),
        st.just(MaskingFunction.suppress()),
        st.integers(1, 7).map(MaskingFunction.bucketize),
        st.sampled_from([2, 5, 10]).map(MaskingFunction.blur_numeric),
        st.integers(0, 2).map(MaskingFunction.blur_prefix),
        st.integers(1, 30).map(lambda c: MaskingFunction.generalize_ranges(
            [(None, c, "low"), (c, None, "high")])),
    )


@st.composite
def small_datasets(draw):
    n = draw(st.integers(1, 200))
    a = draw(st.lists(st.integers(0, 40), min_size=n, max_size=n))
    y = draw(st.lists(st.sampled_from("pqr"), min_size=n, max_size=n))
    return Dataset.from_records(((str(v), lab) for v, lab in zip(a, y)), ["a0"], "y"), a, y


@settings(max_examples=150, deadline=None)
@given(small_datasets(), _functions())
def test_masked_joint_matches_row_oracle(data, f):
    d, a, y = data
    expected = Counter((apply_mask(f, str(v)), lab) for v, lab in zip(a, y))
    mj = masked_joint(d, "a0", f)
    got = {(r, c): mj.cells[i, k] for i, r in enumerate(mj.row_domain.values)
           for k, c in enumerate(mj.col_domain.values) if mj.cells[i, k]}
    assert got == dict(expected)
    assert mj.total == len(a)

    inv = inverse_image(f, d.domains["a0"])
    members = sorted(v for vs in inv.preimages.values() for v in vs)
    assert members == sorted(d.domains["a0"].values)
    np.testing.assert_array_equal(aggregate_joint(joint(d, "a0"), inv).cells, mj.cells)
    np.testing.assert_array_equal(mj.row_sums(),
                                  masked_marginal(marginal(d, "a0"), inv).as_array())

    config = MaskingConfiguration("c", (("a0", f),))
    materialized = mask_dataset(d, config)
    assert Counter((r[0][0], r[1]) for r in materialized.rows()) == expected
