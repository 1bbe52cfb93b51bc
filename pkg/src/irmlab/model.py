"""Finite instances, the invariant kernel, and domains of the fixed-conditional family.

Every domain factors as ``P(x1, x2, y) = m(x1) * p(y | x1) * q(x2 | x1, y)``
where ``p`` is the instance's invariant kernel.  Domains are stored in this
factored form, so every ``Domain`` is a member of the family by construction;
only the marginal ``m`` and the X2-kernel ``q`` vary.

Probabilities are exact ``Fraction`` values.  ``Instance.as_float`` and
``Domain.as_float`` produce float copies; every operation works on either.
"""

from __future__ import annotations

import enum
from decimal import Decimal
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence, Union

import numpy as np

Number = Union[Fraction, float]

__all__ = [
    "Task",
    "InvariantKernel",
    "Instance",
    "Domain",
    "JointTable",
    "ValidationReport",
    "StructureError",
    "CapacityError",
    "to_fraction",
    "validate_instance",
    "validate_domain",
    "joint_distribution",
    "conditional_given_feature",
    "DEFAULT_TOL",
]

DEFAULT_TOL = 1e-9


class StructureError(ValueError):
    """Shapes of an instance, domain or predictor do not line up."""


class CapacityError(ValueError):
    """An exhaustive enumeration would exceed the configured size cap."""


class Task(str, enum.Enum):
    REGRESSION = "regression"
    CLASSIFICATION = "classification"


def to_fraction(x) -> Fraction:
    """Coerce ints, ``"num/den"`` strings, Fractions and short floats to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not probabilities")
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def _exact(x) -> bool:
    return isinstance(x, Fraction)


@dataclass(frozen=True)
class InvariantKernel:
    """The fixed conditional ``p(y | x1)`` as a |X1| x |Y| table."""

    table: tuple[tuple[Number, ...], ...]

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> InvariantKernel:
        return cls(tuple(tuple(to_fraction(v) for v in row) for row in rows))

    def row(self, i: int) -> tuple[Number, ...]:
        return self.table[i]

    def __len__(self):
        return len(self.table)

    def is_deterministic(self, i: int) -> bool:
        return sum(1 for v in self.table[i] if v > 0) == 1


@dataclass(frozen=True)
class Instance:
    """Finite spaces X1, X2, Y, the feature budget ``h_size`` and the kernel.

    Points of X1, X2 (and Y for regression) are tuples of rationals.
    Classification labels are the integers ``1..m``.
    """

    x1_points: tuple
    x2_points: tuple
    y_points: tuple
    h_size: int
    kernel: InvariantKernel
    task: Task

    @classmethod
    def create(cls, x1_points, x2_points, y_points, kernel, h_size, task="regression") -> Instance:
        task = Task(task)

        def vec(p):
            if isinstance(p, (list, tuple)):
                return tuple(to_fraction(v) for v in p)
            return (to_fraction(p),)

        if task is Task.CLASSIFICATION:
            ys = tuple(int(y) for y in y_points)
        else:
            ys = tuple(vec(y) for y in y_points)
        if not isinstance(kernel, InvariantKernel):
            kernel = InvariantKernel.from_rows(kernel)
        return cls(
            x1_points=tuple(vec(p) for p in x1_points),
            x2_points=tuple(vec(p) for p in x2_points),
            y_points=ys,
            h_size=int(h_size),
            kernel=kernel,
            task=task,
        )

    @property
    def n1(self) -> int:
        return len(self.x1_points)

    @property
    def n2(self) -> int:
        return len(self.x2_points)

    @property
    def ny(self) -> int:
        return len(self.y_points)

    @property
    def n_atoms(self) -> int:
        return self.n1 * self.n2

    @cached_property
    def exact(self) -> bool:
        return all(_exact(v) for row in self.kernel.table for v in row)

    def atom(self, i1: int, i2: int) -> int:
        """Row-major index of ``(x1_points[i1], x2_points[i2])``."""
        return i1 * self.n2 + i2

    def split(self, atom: int) -> tuple[int, int]:
        return divmod(atom, self.n2)

    def label_vector(self, j: int) -> tuple:
        """Coordinates of label ``j`` (regression only)."""
        return self.y_points[j]

    def zero(self):
        return Fraction(0) if self.exact else 0.0

    def one(self):
        return Fraction(1) if self.exact else 1.0

    def as_float(self) -> Instance:
        kernel = InvariantKernel(tuple(tuple(float(v) for v in row) for row in self.kernel.table))
        if self.task is Task.REGRESSION:
            ys = tuple(tuple(float(c) for c in y) for y in self.y_points)
        else:
            ys = self.y_points
        return Instance(self.x1_points, self.x2_points, ys, self.h_size, kernel, self.task)


@dataclass(frozen=True)
class Domain:
    """One family member: marginal on X1 and a label-dependent kernel on X2.

    ``x2_given_x1y[i1][j]`` is a probability vector over X2.
    """

    x1_marginal: tuple[Number, ...]
    x2_given_x1y: tuple[tuple[tuple[Number, ...], ...], ...]

    @classmethod
    def create(cls, x1_marginal, x2_given_x1y) -> Domain:
        return cls(
            tuple(to_fraction(v) for v in x1_marginal),
            tuple(tuple(tuple(to_fraction(v) for v in vec) for vec in per_y) for per_y in x2_given_x1y),
        )

    @classmethod
    def product(cls, instance: Instance, x1_marginal, x2_kernel_of) -> Domain:
        """Build a domain whose X2-kernel is ``x2_kernel_of(i1, j)``."""
        return cls.create(
            x1_marginal,
            [[x2_kernel_of(i1, j) for j in range(instance.ny)] for i1 in range(instance.n1)],
        )

    def as_float(self) -> Domain:
        return Domain(
            tuple(float(v) for v in self.x1_marginal),
            tuple(tuple(tuple(float(v) for v in vec) for vec in per_y) for per_y in self.x2_given_x1y),
        )

    def support(self) -> tuple[int, ...]:
        return tuple(i for i, m in enumerate(self.x1_marginal) if m > 0)


@dataclass(frozen=True)
class JointTable:
    """Dense joint over atoms (row-major X1 x X2) and labels."""

    table: tuple[tuple[Number, ...], ...]
    n1: int
    n2: int

    def total(self):
        return sum(sum(row) for row in self.table)

    def x1_marginal(self) -> tuple:
        return tuple(
            sum(sum(self.table[i1 * self.n2 + i2]) for i2 in range(self.n2)) for i1 in range(self.n1)
        )

    def atom_mass(self, atom: int):
        return sum(self.table[atom])

    def array(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.table], dtype=float)


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def _fmt(v) -> str:
    """Terminating rationals as decimals (``1.1``), others as ``n/d``."""
    if not _exact(v):
        return repr(v)
    d = v.denominator
    for p in (2, 5):
        while d % p == 0:
            d //= p
    if d != 1:
        return str(v)
    text = str(Decimal(v.numerator) / Decimal(v.denominator))
    return text.rstrip("0").rstrip(".") if "." in text else text


def _sums_to_one(vec, tol) -> bool:
    s = sum(vec)
    return s == 1 if _exact(s) else abs(s - 1) <= tol


def validate_instance(instance: Instance, tol: float = DEFAULT_TOL) -> ValidationReport:
    """Collect every violated structural invariant of an instance."""
    out: list[str] = []
    for name, pts in (("X1", instance.x1_points), ("X2", instance.x2_points), ("Y", instance.y_points)):
        if len(pts) == 0:
            out.append(f"{name} empty")
        elif len(set(pts)) != len(pts):
            out.append(f"{name} has duplicate points")
    for name, pts in (("X1", instance.x1_points), ("X2", instance.x2_points)):
        if len({len(p) for p in pts}) > 1:
            out.append(f"{name} points have mixed dimensions")
    if instance.task is Task.REGRESSION and len({len(y) for y in instance.y_points}) > 1:
        out.append("Y points have mixed dimensions")
    if instance.task is Task.CLASSIFICATION and sorted(instance.y_points) != list(
        range(1, instance.ny + 1)
    ):
        out.append("classification labels must be 1..m")
    if instance.h_size < 1:
        out.append(f"h_size {instance.h_size} < 1")
    table = instance.kernel.table
    if len(table) != instance.n1:
        out.append(f"kernel has {len(table)} rows, expected {instance.n1}")
    for i, row in enumerate(table):
        if len(row) != instance.ny:
            out.append(f"kernel row {i} has {len(row)} entries, expected {instance.ny}")
        for j, v in enumerate(row):
            if v < 0 or v > 1:
                out.append(f"kernel entry ({i}, {j}) = {_fmt(v)} outside [0, 1]")
        if not _sums_to_one(row, tol):
            out.append(f"kernel row {i} sums to {_fmt(sum(row))}")
    return ValidationReport(out)


def validate_domain(instance: Instance, domain: Domain, tol: float = DEFAULT_TOL) -> ValidationReport:
    """Check that a domain is a well-formed member of the instance's family."""
    out: list[str] = []
    m = domain.x1_marginal
    if len(m) != instance.n1:
        out.append(f"x1_marginal has {len(m)} entries, expected {instance.n1}")
    if any(v < 0 for v in m):
        out.append("x1_marginal has negative entries")
    if m and not _sums_to_one(m, tol):
        out.append(f"x1_marginal sums to {_fmt(sum(m))}")
    q = domain.x2_given_x1y
    if len(q) != instance.n1:
        out.append(f"x2_given_x1y has {len(q)} rows, expected {instance.n1}")
    for i1, per_y in enumerate(q):
        if len(per_y) != instance.ny:
            out.append(f"x2_given_x1y[{i1}] has {len(per_y)} label rows, expected {instance.ny}")
        for j, vec in enumerate(per_y):
            if len(vec) != instance.n2:
                out.append(f"x2_given_x1y[{i1}][{j}] has {len(vec)} entries, expected {instance.n2}")
            if any(v < 0 for v in vec):
                out.append(f"x2_given_x1y[{i1}][{j}] has negative entries")
            if vec and not _sums_to_one(vec, tol):
                out.append(f"x2_given_x1y[{i1}][{j}] sums to {_fmt(sum(vec))}")
    return ValidationReport(out)


def _check_shapes(instance: Instance, domain: Domain) -> None:
    q = domain.x2_given_x1y
    if (
        len(domain.x1_marginal) != instance.n1
        or len(q) != instance.n1
        or any(len(per_y) != instance.ny for per_y in q)
        or any(len(vec) != instance.n2 for per_y in q for vec in per_y)
    ):
        raise StructureError(
            f"domain shape does not match instance (|X1|={instance.n1}, |Y|={instance.ny}, |X2|={instance.n2})"
        )


def joint_distribution(instance: Instance, domain: Domain) -> JointTable:
    """Materialize ``m(x1) * p(y|x1) * q(x2|x1,y)`` over atoms x labels."""
    _check_shapes(instance, domain)
    n1, n2, ny = instance.n1, instance.n2, instance.ny
    kernel = instance.kernel.table
    rows = []
    for i1 in range(n1):
        m = domain.x1_marginal[i1]
        for i2 in range(n2):
            rows.append(
                tuple(m * kernel[i1][j] * domain.x2_given_x1y[i1][j][i2] for j in range(ny))
            )
    return JointTable(tuple(rows), n1, n2)


def conditional_given_feature(joint: JointTable, phi, cell: int):
    """``P(Y | phi(X) = cell)`` as a tuple over labels, or ``None`` on a null cell."""
    atoms = phi.cells()[cell]
    ny = len(joint.table[0]) if joint.table else 0
    num = [sum(joint.table[a][j] for a in atoms) for j in range(ny)]
    mass = sum(num)
    if mass == 0:
        return None
    return tuple(v / mass for v in num)
