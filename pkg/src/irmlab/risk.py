"""Exact risks, the worst-case (o.o.d.) risk over the family, and its optimal predictors.

Because every family member factors as ``m(x1) p(y|x1) q(x2|x1,y)`` and the
risk is linear in ``m`` and in each ``q(.|x1,y)``, the supremum over the family
is attained at a vertex: a point mass on one ``x1`` and, for each label, a
point mass on the ``x2`` that maximizes the loss.  That gives

    ood_risk(f) = max_x1 sum_y p(y|x1) * max_x2 loss(f(x1, x2), y)

which ``ood_risk`` evaluates directly and ``worst_case_domain`` realizes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .logsum import LogSum
from .model import Domain, Instance, StructureError, Task, joint_distribution
from .partitions import FeaturePartition, projection_x1

__all__ = [
    "INF",
    "Loss",
    "Predictor",
    "loss_for_task",
    "resolve_loss",
    "pointwise_loss",
    "risk",
    "risk_from_table",
    "ood_risk",
    "worst_case_domain",
    "bayes_ood_predictor",
    "entropy",
    "risk_leq",
    "risk_eq",
]

INF = math.inf


class Loss(str, enum.Enum):
    LEAST_SQUARE = "least_square"
    CROSS_ENTROPY = "cross_entropy"


def loss_for_task(task: Task) -> Loss:
    return Loss.LEAST_SQUARE if Task(task) is Task.REGRESSION else Loss.CROSS_ENTROPY


def resolve_loss(instance: Instance, loss) -> Loss:
    """Default the loss from the task and reject mismatched pairs."""
    if loss is None:
        return loss_for_task(instance.task)
    if not isinstance(loss, Loss):
        loss = Loss(str(loss).replace("-", "_"))
    if loss is not loss_for_task(instance.task):
        raise StructureError(f"loss {loss.value} does not apply to a {instance.task.value} instance")
    return loss


@dataclass(frozen=True)
class Predictor:
    """``head o phi``: one head value per cell of ``phi``.

    A head value is a coordinate tuple in Y-space (regression) or a
    probability tuple over the labels (classification).
    """

    phi: FeaturePartition
    head: tuple[tuple, ...]

    def __post_init__(self):
        if len(self.head) != self.phi.n_cells:
            raise StructureError(f"head has {len(self.head)} values for {self.phi.n_cells} cells")

    def value_at(self, atom: int) -> tuple:
        return self.head[self.phi.labels[atom]]

    def values(self) -> tuple:
        """The predictor as a function: one value per atom."""
        return tuple(self.head[c] for c in self.phi.labels)


def _check_predictor(instance: Instance, predictor: Predictor, loss: Loss) -> None:
    if predictor.phi.n_atoms != instance.n_atoms:
        raise StructureError(
            f"feature map covers {predictor.phi.n_atoms} atoms, instance has {instance.n_atoms}"
        )
    width = instance.ny if loss is Loss.CROSS_ENTROPY else len(instance.y_points[0])
    for v in predictor.head:
        if len(v) != width:
            raise StructureError(f"head value {v} has {len(v)} entries, expected {width}")


def pointwise_loss(instance: Instance, loss: Loss, value: tuple, j: int):
    """Loss of head value ``value`` on label index ``j``."""
    if loss is Loss.LEAST_SQUARE:
        y = instance.y_points[j]
        return sum((a - b) * (a - b) for a, b in zip(y, value))
    p = value[j]
    if p <= 0:
        return INF
    if isinstance(p, Fraction):
        return LogSum.neg_log(p)
    return -math.log(p)


def _zero(instance: Instance, loss: Loss):
    if loss is Loss.CROSS_ENTROPY and instance.exact:
        return LogSum()
    return instance.zero()


def _scaled(weight, value):
    if value == INF:
        return INF
    return weight * value


def risk(instance: Instance, domain: Domain, predictor: Predictor, loss=None):
    """Expected loss of ``predictor`` under ``domain``; ``INF`` for unbounded cross-entropy."""
    loss = resolve_loss(instance, loss)
    _check_predictor(instance, predictor, loss)
    return risk_from_table(instance, joint_distribution(instance, domain).table, predictor, loss)


def risk_from_table(instance: Instance, table, predictor: Predictor, loss: Loss):
    """Expected loss against an (atoms x labels) mass table; no shape checks."""
    total = _zero(instance, loss)
    for atom, row in enumerate(table):
        value = predictor.value_at(atom)
        for j, mass in enumerate(row):
            if mass == 0:
                continue
            term = _scaled(mass, pointwise_loss(instance, loss, value, j))
            if term == INF:
                return INF
            total = total + term
    return total


def _argmax(values) -> int:
    """Index of the first maximum."""
    best = 0
    for i in range(1, len(values)):
        if values[i] > values[best]:
            best = i
    return best


def _worst_case_table(instance: Instance, predictor: Predictor, loss: Loss):
    """Per-x1 worst risk and the maximizing x2 for every (x1, label)."""
    kernel = instance.kernel.table
    per_x1 = []
    choices = []
    for i1 in range(instance.n1):
        total = _zero(instance, loss)
        picks = []
        for j in range(instance.ny):
            losses = [
                pointwise_loss(instance, loss, predictor.value_at(instance.atom(i1, i2)), j)
                for i2 in range(instance.n2)
            ]
            k = _argmax(losses)
            picks.append(k)
            p = kernel[i1][j]
            if p == 0 or total == INF:
                continue
            total = total + _scaled(p, losses[k]) if losses[k] != INF else INF
        per_x1.append(total)
        choices.append(picks)
    return per_x1, choices


def ood_risk(instance: Instance, predictor: Predictor, loss=None):
    """Worst-case risk of ``predictor`` over every domain of the family."""
    loss = resolve_loss(instance, loss)
    _check_predictor(instance, predictor, loss)
    per_x1, _ = _worst_case_table(instance, predictor, loss)
    return per_x1[_argmax(per_x1)]


def worst_case_domain(instance: Instance, predictor: Predictor, loss=None) -> Domain:
    """A family member on which ``predictor`` attains its o.o.d. risk.

    Point mass on the worst x1; for every (x1, label) a point mass on the worst
    x2.  Ties go to the lowest index.
    """
    loss = resolve_loss(instance, loss)
    _check_predictor(instance, predictor, loss)
    per_x1, choices = _worst_case_table(instance, predictor, loss)
    star = _argmax(per_x1)
    one, zero = instance.one(), instance.zero()

    def delta(n, k):
        return tuple(one if i == k else zero for i in range(n))

    return Domain(
        delta(instance.n1, star),
        tuple(
            tuple(delta(instance.n2, choices[i1][j]) for j in range(instance.ny))
            for i1 in range(instance.n1)
        ),
    )


def bayes_ood_predictor(instance: Instance, loss=None) -> Predictor:
    """The kernel's conditional mean (least squares) or the kernel row itself
    (cross-entropy), read off the X1 coordinate."""
    loss = resolve_loss(instance, loss)
    kernel = instance.kernel.table
    if loss is Loss.CROSS_ENTROPY:
        head = tuple(tuple(row) for row in kernel)
    else:
        dim = len(instance.y_points[0])
        head = tuple(
            tuple(sum((row[j] * instance.y_points[j][k] for j in range(instance.ny)), instance.zero()) for k in range(dim))
            for row in kernel
        )
    return Predictor(projection_x1(instance), head)


def entropy(row: Sequence):
    """Shannon entropy in nats; exact ``LogSum`` for rational rows."""
    if row and all(isinstance(p, Fraction) for p in row):
        return sum((p * LogSum.neg_log(p) for p in row if p > 0), LogSum())
    return -math.fsum(p * math.log(p) for p in row if p > 0)


def risk_eq(a, b, tol: float = 0.0) -> bool:
    """Equality of risk values: exact unless both sides are floats."""
    if isinstance(a, float) or isinstance(b, float):
        if a == INF or b == INF:
            return a == b
        return abs(float(a) - float(b)) <= tol
    return a == b


def risk_leq(a, b, tol: float = 0.0) -> bool:
    return risk_eq(a, b, tol) or a < b
