from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from irmlab import (
    Domain,
    FeaturePartition,
    Instance,
    StructureError,
    conditional_given_feature,
    joint_distribution,
    projection_x1,
    projection_x2,
    validate_domain,
    validate_instance,
)


def two_by_two(rows=(("1/5", "4/5"), ("4/5", "1/5"))):
    return Instance.create([0, 1], [0, 1], [[1], [0]], rows, 2)


def test_valid_instance():
    assert validate_instance(two_by_two()).ok


def test_bad_row_sum_is_reported():
    inst = Instance.create([0, 1], [0, 1], [[0], [1]], [["1/2", "3/5"], ["4/5", "1/5"]], 2)
    assert "kernel row 0 sums to 1.1" in validate_instance(inst).violations


def test_empty_x2_is_reported():
    inst = Instance.create([0, 1], [], [[0], [1]], [["1/5", "4/5"], ["4/5", "1/5"]], 2)
    assert "X2 empty" in validate_instance(inst).violations


def test_all_problems_reported_together():
    inst = Instance.create([0, 0], [], [[0], [1]], [["1/2", "3/5"]], 0)
    v = validate_instance(inst).violations
    assert "X1 has duplicate points" in v
    assert "X2 empty" in v
    assert "h_size 0 < 1" in v
    assert any(m.startswith("kernel has 1 rows") for m in v)


def test_classification_labels_checked():
    inst = Instance.create([0], [0], [0, 1], [["1/2", "1/2"]], 1, "classification")
    assert "classification labels must be 1..m" in validate_instance(inst).violations


def test_validate_domain_flags_bad_vectors():
    inst = two_by_two()
    bad = Domain.create(["1/2", "1/3"], [[[1, 0], [1, 0]], [[1, 0], ["1/2", "1/3"]]])
    v = validate_domain(inst, bad).violations
    assert "x1_marginal sums to 5/6" in v
    assert "x2_given_x1y[1][1] sums to 5/6" in v


def test_joint_uniform_product_formula():
    inst = two_by_two()
    d = Domain.product(inst, ["1/2", "1/2"], lambda i1, j: ["1/2", "1/2"])
    j = joint_distribution(inst, d)
    # row order is y_points order: position 1 is the label y = 0
    assert j.table[inst.atom(0, 0)][1] == F(1, 2) * F(4, 5) * F(1, 2) == F(1, 5)
    assert j.total() == 1
    ref = oracles.joint(inst, d)
    for (i1, i2, y), m in ref.items():
        assert j.table[inst.atom(i1, i2)][y] == m


def test_joint_delta_support():
    inst = two_by_two()
    d = Domain.product(inst, [1, 0], lambda i1, j: [1, 0] if j == 0 else [0, 1])
    j = joint_distribution(inst, d)
    support = {(a, y) for a, row in enumerate(j.table) for y, m in enumerate(row) if m}
    assert support == {(inst.atom(0, 0), 0), (inst.atom(0, 1), 1)}


def test_joint_shape_mismatch():
    inst = two_by_two()
    with pytest.raises(StructureError):
        joint_distribution(inst, Domain.create([1], [[[1, 0], [1, 0]]]))


def test_conditional_on_x1_projection_is_kernel_row(reg):
    inst = reg.instance
    for d in reg.training_domains:
        j = joint_distribution(inst, d)
        for i1 in d.support():
            assert conditional_given_feature(j, projection_x1(inst), i1) == inst.kernel.row(i1)


def test_conditional_undefined_on_null_cell():
    inst = two_by_two()
    d = Domain.product(inst, [1, 0], lambda i1, j: ["1/2", "1/2"])
    assert conditional_given_feature(joint_distribution(inst, d), projection_x1(inst), 1) is None


def test_conditional_x2_equals_y(reg):
    inst = reg.instance
    j = joint_distribution(inst, reg.domains["e1"])
    # x2 = y: the cell x2 = 1 carries only y = 1 (label position 0)
    assert conditional_given_feature(j, projection_x2(inst), 1) == (1, 0)


def test_float_copy_is_not_exact(reg):
    assert reg.instance.exact
    assert not reg.instance.as_float().exact


# properties ----------------------------------------------------------------


@st.composite
def prob_vectors(draw, size):
    den = draw(st.integers(1, 16))
    cuts = sorted(draw(st.lists(st.integers(0, den), min_size=size - 1, max_size=size - 1)))
    edges = [0, *cuts, den]
    return tuple(F(edges[i + 1] - edges[i], den) for i in range(size))


@st.composite
def instances_and_domains(draw):
    n1, n2, ny = draw(st.integers(1, 3)), draw(st.integers(1, 3)), draw(st.integers(2, 3))
    rows = [draw(prob_vectors(ny)) for _ in range(n1)]
    inst = Instance.create(list(range(n1)), list(range(n2)), [[k] for k in range(ny)], rows, n1)
    m = draw(prob_vectors(n1))
    q = [[draw(prob_vectors(n2)) for _ in range(ny)] for _ in range(n1)]
    return inst, Domain.create(m, q)


@settings(max_examples=150, deadline=None)
@given(instances_and_domains())
def test_joint_mass_and_marginal(pair):
    inst, d = pair
    j = joint_distribution(inst, d)
    assert j.total() == 1
    assert j.x1_marginal() == d.x1_marginal


@settings(max_examples=150, deadline=None)
@given(instances_and_domains())
def test_family_membership(pair):
    inst, d = pair
    j = joint_distribution(inst, d)
    phi = projection_x1(inst)
    for i1 in range(inst.n1):
        c = conditional_given_feature(j, phi, i1)
        if d.x1_marginal[i1] > 0:
            assert c == inst.kernel.row(i1)
        else:
            assert c is None


def test_partition_canonical_form():
    a = FeaturePartition.from_assignment(["b", "a", "b", "c"])
    b = FeaturePartition.from_assignment([7, 3, 7, 1])
    assert a == b and a.labels == (0, 1, 0, 2)
    with pytest.raises(ValueError):
        FeaturePartition((1, 0))
