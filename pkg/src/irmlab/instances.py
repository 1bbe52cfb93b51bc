"""Ready-made instances: the two-by-two reference problem and random generators."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable

import numpy as np

from .io import InstanceDocument
from .model import Domain, Instance, InvariantKernel, Task

__all__ = [
    "canonical",
    "random_probability_vector",
    "random_kernel_row",
    "random_instance",
    "random_domain",
]


def canonical(task: str = "regression", h_size: int = 2) -> InstanceDocument:
    """X1 = X2 = {0, 1}, two labels, kernel rows (1/5, 4/5) and (4/5, 1/5).

    Regression labels are listed as ``y = 1, 0``, so a kernel row reads
    ``(p(y=1|x1), p(y=0|x1))`` and the Bayes head is ``p(y=1|x1)``.
    Classification labels are ``1, 2`` in the same positions.

    Training domains: ``e1`` places x2 = y, ``e2`` places x2 = 1 - y (both with
    uniform x1), ``e3`` has x1-marginal (9/10, 1/10) and x2 uniform.
    """
    task = Task(task)
    ys = [[1], [0]] if task is Task.REGRESSION else [1, 2]
    inst = Instance.create([[0], [1]], [[0], [1]], ys, [["1/5", "4/5"], ["4/5", "1/5"]], h_size, task)
    # label position 0 is y = 1, position 1 is y = 0
    same = Domain.product(inst, ["1/2", "1/2"], lambda i1, j: [0, 1] if j == 0 else [1, 0])
    flip = Domain.product(inst, ["1/2", "1/2"], lambda i1, j: [1, 0] if j == 0 else [0, 1])
    skew = Domain.product(inst, ["9/10", "1/10"], lambda i1, j: ["1/2", "1/2"])
    return InstanceDocument(inst, {"e1": same, "e2": flip, "e3": skew}, ("e1", "e2", "e3"))


def random_probability_vector(
    rng: np.random.Generator, size: int, max_denominator: int = 16, min_positive: int = 1
) -> tuple[Fraction, ...]:
    """Uniform-ish rational probability vector with denominator at most ``max_denominator``."""
    if min_positive > size:
        raise ValueError("min_positive exceeds size")
    while True:
        den = int(rng.integers(1, max_denominator + 1))
        counts = rng.multinomial(den, [1.0 / size] * size)
        if int((counts > 0).sum()) >= min_positive:
            return tuple(Fraction(int(c), den) for c in counts)


def random_kernel_row(rng, ny: int, deterministic: bool = False, max_denominator: int = 16):
    if deterministic:
        hot = int(rng.integers(ny))
        return tuple(Fraction(int(j == hot)) for j in range(ny))
    return random_probability_vector(rng, ny, max_denominator, min_positive=min(2, ny))


def random_instance(
    rng: np.random.Generator,
    n1: int,
    n2: int,
    ny: int,
    h_size: int,
    task: str = "regression",
    deterministic_rows: Iterable[int] = (),
    max_denominator: int = 16,
) -> Instance:
    """Random instance whose kernel rows have two or more positive entries,
    except the listed ``deterministic_rows`` which are point masses."""
    task = Task(task)
    det = set(deterministic_rows)
    rows = [random_kernel_row(rng, ny, i in det, max_denominator) for i in range(n1)]
    if task is Task.REGRESSION:
        values = sorted(int(v) for v in rng.choice(5, size=ny, replace=False))
        ys = tuple((Fraction(v),) for v in values)
    else:
        ys = tuple(range(1, ny + 1))
    return Instance(
        x1_points=tuple((Fraction(i),) for i in range(n1)),
        x2_points=tuple((Fraction(i),) for i in range(n2)),
        y_points=ys,
        h_size=h_size,
        kernel=InvariantKernel(tuple(rows)),
        task=task,
    )


def random_domain(
    rng: np.random.Generator, instance: Instance, support: Iterable[int] | None = None, max_denominator: int = 16
) -> Domain:
    """Random family member; the x1-marginal is confined to ``support`` when given."""
    support = list(range(instance.n1)) if support is None else sorted(support)
    inner = random_probability_vector(rng, len(support), max_denominator)
    marginal = [Fraction(0)] * instance.n1
    for i, v in zip(support, inner):
        marginal[i] = v
    q = tuple(
        tuple(random_probability_vector(rng, instance.n2, max_denominator) for _ in range(instance.ny))
        for _ in range(instance.n1)
    )
    return Domain(tuple(marginal), q)
