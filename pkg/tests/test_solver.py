from fractions import Fraction as F

import pytest

import oracles
from conftest import EXPECTED
from irmlab import (
    Domain,
    EmptyInvarianceSetError,
    Instance,
    Predictor,
    bayes_ood_predictor,
    canonical,
    entropy,
    irm_solve,
    ood_risk,
    optimal_head,
    projection_x1,
    risk,
)
from irmlab.partitions import singletons


def test_projection_head_is_kernel_mean(reg):
    inst = reg.instance
    assert optimal_head(inst, projection_x1(inst), reg.training_domains) == bayes_ood_predictor(inst).head


def test_projection_head_classification(cls):
    inst = cls.instance
    assert optimal_head(inst, projection_x1(inst), cls.training_domains) == inst.kernel.table


def test_singletons_interpolate_deterministic_domain():
    inst = Instance.create([0, 1], [0, 1], [[0], [1]], [[1, 0], [0, 1]], 4)
    d = Domain.product(inst, ["1/2", "1/2"], lambda i1, j: ["1/2", "1/2"])
    phi = singletons(inst)
    head = optimal_head(inst, phi, [d])
    assert head == ((0,), (0,), (1,), (1,))
    assert risk(inst, d, Predictor(phi, head)) == 0


def test_zero_mass_cells_get_defaults():
    reg_doc, cls_doc = canonical(), canonical("classification")
    for doc, default in ((reg_doc, (0,)), (cls_doc, (F(1, 2), F(1, 2)))):
        inst = doc.instance
        d = Domain.product(inst, [1, 0], lambda i1, j: ["1/2", "1/2"])
        assert optimal_head(inst, projection_x1(inst), [d])[1] == default


def test_irm_canonical_regression(reg):
    sol = irm_solve(reg.instance, reg.training_domains)
    assert [p.phi for p in sol.minimizers] == [projection_x1(reg.instance)]
    for p in sol.minimizers:
        assert ood_risk(reg.instance, p) == F(4, 25)
    assert sol.pooled_risk == 3 * F(4, 25)


def test_irm_canonical_classification(cls):
    sol = irm_solve(cls.instance, cls.training_domains)
    h = entropy((F(1, 5), F(4, 5)))
    assert all(ood_risk(cls.instance, p) == h for p in sol.minimizers)


def test_deterministic_kernel_independent_x2():
    inst = Instance.create([0, 1], [0, 1], [[0], [1]], [[1, 0], [0, 1]], 2)
    d = Domain.product(inst, ["1/3", "2/3"], lambda i1, j: ["1/4", "3/4"])
    sol = irm_solve(inst, [d])
    assert sol.pooled_risk == 0
    assert projection_x1(inst) in [p.phi for p in sol.minimizers]


def test_empty_invariance_set():
    doc = canonical(h_size=1)
    with pytest.raises(EmptyInvarianceSetError):
        irm_solve(doc.instance, doc.training_domains)


def solve_or_expect_empty(name, doc):
    """Solve; when the oracle says no partition is invariant, require the error."""
    if not EXPECTED[name]["train_invariances"]:
        with pytest.raises(EmptyInvarianceSetError):
            irm_solve(doc.instance, doc.training_domains)
        return None
    return irm_solve(doc.instance, doc.training_domains)


def test_pooled_risk_is_sum_of_domain_risks(any_golden):
    name, doc = any_golden
    sol = solve_or_expect_empty(name, doc)
    if sol is None:
        return
    for p, per in zip(sol.minimizers, sol.per_domain_risks):
        assert sum(per[1:], per[0]) == sol.pooled_risk
        assert per == tuple(risk(doc.instance, d, p) for d in doc.training_domains)


def _perturbed(inst, value, cell_delta):
    if inst.task.value == "regression":
        return [tuple(v + cell_delta for v in value)]
    out = []
    for a in range(inst.ny):
        for b in range(inst.ny):
            if a == b:
                continue
            moved = list(value)
            moved[a] += cell_delta
            moved[b] -= cell_delta
            if min(moved) >= 0:
                out.append(tuple(moved))
    return out


def test_head_optimality_under_perturbation(small_golden):
    name, doc = small_golden
    inst = doc.instance
    sol = solve_or_expect_empty(name, doc)
    if sol is None:
        return
    for phi in sol.candidates:
        head = optimal_head(inst, phi, doc.training_domains)
        base = sum(risk(inst, d, Predictor(phi, head)) for d in doc.training_domains)
        for c in range(phi.n_cells):
            for delta in (F(1, 16), F(-1, 16)):
                for value in _perturbed(inst, head[c], delta):
                    new = head[:c] + (value,) + head[c + 1:]
                    other = sum(risk(inst, d, Predictor(phi, new)) for d in doc.training_domains)
                    assert not other < base


def test_argmin_completeness_against_grid(small_golden):
    name, doc = small_golden
    inst = doc.instance
    sol = solve_or_expect_empty(name, doc)
    if sol is None:
        return
    best_grid = oracles.min_pooled_over_grid(inst, doc.training_domains, [p.labels for p in sol.candidates])
    assert float(sol.pooled_risk) <= best_grid + 1e-12
