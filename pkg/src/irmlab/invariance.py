"""Invariance of feature partitions across domains.

A partition is invariant across a set of domains when every cell that has
positive mass in two domains induces the same label distribution in both.

Over the whole family the invariant partitions have a closed form.  For a cell
C and an x1 whose slab ``{x1} x X2`` meets C:

* if the slab lies inside C, the domain can only reweight ``p(.|x1)``;
* if only part of the slab lies inside C, label-dependent X2-kernels can route
  any single label into or out of C, which is harmless only when ``p(.|x1)``
  is a point mass.

Mixing several x1 in one cell is harmless only when their kernel rows are
identical.  So the invariant partitions are exactly those whose cells draw
from one class of identical kernel rows each, and split a slab only when that
row is deterministic.  When every row has two or more positive entries this
reduces to "constant in x2, merging only identical rows".
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Sequence

import numpy as np

from .model import (
    DEFAULT_TOL,
    CapacityError,
    Domain,
    Instance,
    JointTable,
    Task,
    conditional_given_feature,
    joint_distribution,
)
from .partitions import FeaturePartition, iter_partitions, restricted_growth_strings

__all__ = [
    "DEFAULT_CAP",
    "Violation",
    "InvarianceReport",
    "WitnessPair",
    "NoWitness",
    "cell_conditionals",
    "is_invariant",
    "enumerate_invariant_partitions",
    "characterize_full_invariances",
    "is_full_invariance",
    "delta_domains",
    "construct_witness",
]

DEFAULT_CAP = 10

# float screen threshold before the exact check; float error here is ~1e-15
_SCREEN = 1e-6


@dataclass(frozen=True)
class Violation:
    domains: tuple[int, int]
    cell: int
    conditional_a: tuple
    conditional_b: tuple


@dataclass(frozen=True)
class InvarianceReport:
    violations: tuple[Violation, ...]

    @property
    def is_invariant(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.is_invariant


def cell_conditionals(joint: JointTable, phi: FeaturePartition) -> list:
    return [conditional_given_feature(joint, phi, c) for c in range(phi.n_cells)]


def _close(a: tuple, b: tuple, tol: float) -> bool:
    if all(isinstance(v, Fraction) for v in a + b):
        return a == b
    return all(abs(x - y) <= tol for x, y in zip(a, b))


def is_invariant(instance: Instance, phi: FeaturePartition, domains: Sequence[Domain], tol: float = DEFAULT_TOL) -> InvarianceReport:
    """Compare each cell's conditional across domains where it is defined.

    Equality is transitive, so every defined conditional is compared with the
    first defined one; a disagreement is reported as that pair of domains.
    """
    if not domains:
        raise ValueError("is_invariant needs at least one domain")
    return _compare(phi, [joint_distribution(instance, d) for d in domains], tol)


def _compare(phi: FeaturePartition, joints: Sequence[JointTable], tol: float) -> InvarianceReport:
    tables = [cell_conditionals(j, phi) for j in joints]
    violations = []
    for cell in range(phi.n_cells):
        ref = None
        for k, conds in enumerate(tables):
            c = conds[cell]
            if c is None:
                continue
            if ref is None:
                ref = (k, c)
            elif not _close(ref[1], c, tol):
                violations.append(Violation((ref[0], k), cell, ref[1], c))
    return InvarianceReport(tuple(violations))


def _screen(joints: np.ndarray, rgs: np.ndarray, k: int, threshold: float) -> np.ndarray:
    """Boolean mask over partitions whose cell conditionals agree within ``threshold``."""
    keep = np.zeros(len(rgs), dtype=bool)
    d, n, ny = joints.shape
    chunk = max(64, 2_000_000 // (d * k * max(ny, n)))
    eye = np.eye(k)
    for start in range(0, len(rgs), chunk):
        block = rgs[start : start + chunk]
        onehot = eye[block]  # (P, n, k)
        sums = np.einsum("pnk,dny->dpky", onehot, joints)
        mass = sums.sum(axis=-1, keepdims=True)
        defined = mass > 0
        cond = np.divide(sums, mass, out=np.zeros_like(sums), where=defined)
        hi = np.where(defined, cond, -np.inf).max(axis=0)
        lo = np.where(defined, cond, np.inf).min(axis=0)
        spread = np.where(np.isfinite(hi), hi - lo, 0.0)
        keep[start : start + chunk] = (spread <= threshold).all(axis=(1, 2))
    return keep


@lru_cache(maxsize=256)
def _enumerate(instance: Instance, domains: tuple, max_blocks: int, tol: float) -> tuple:
    rgs = restricted_growth_strings(instance.n_atoms, max_blocks)
    if len(rgs) == 0:
        return ()
    exact_joints = [joint_distribution(instance, d) for d in domains]
    joints = np.stack([j.array() for j in exact_joints])
    exact = instance.exact
    keep = _screen(joints, rgs, max_blocks, _SCREEN if exact else tol)
    ints = [_integer_table(j) for j in exact_joints] if exact else None
    out = []
    for labels in rgs[keep]:
        labels = tuple(int(v) for v in labels)
        if not exact or _integer_invariant(labels, ints):
            out.append(FeaturePartition(labels))
    return tuple(out)


def _integer_table(joint: JointTable) -> list[list[int]]:
    """The joint scaled by a common denominator; conditionals are unchanged."""
    den = math.lcm(*(v.denominator for row in joint.table for v in row))
    return [[v.numerator * (den // v.denominator) for v in row] for row in joint.table]


def _integer_invariant(labels: tuple, tables: list) -> bool:
    k = max(labels) + 1
    ref: list = [None] * k
    for t in tables:
        ny = len(t[0])
        sums = [[0] * ny for _ in range(k)]
        for atom, c in enumerate(labels):
            row, acc = t[atom], sums[c]
            for j in range(ny):
                acc[j] += row[j]
        for c in range(k):
            vec = sums[c]
            mass = sum(vec)
            if mass == 0:
                continue
            if ref[c] is None:
                ref[c] = (vec, mass)
                continue
            rvec, rmass = ref[c]
            if any(a * rmass != b * mass for a, b in zip(vec, rvec)):
                return False
    return True


def enumerate_invariant_partitions(
    instance: Instance,
    domains: Sequence[Domain],
    max_cells: int | None = None,
    cap: int = DEFAULT_CAP,
    tol: float = DEFAULT_TOL,
) -> list[FeaturePartition]:
    """All partitions with at most ``min(max_cells, h_size)`` cells invariant across ``domains``.

    Exhaustive over set partitions of the atoms, so ``|X|`` must not exceed ``cap``.
    """
    if not domains:
        raise ValueError("need at least one domain")
    if instance.n_atoms > cap:
        raise CapacityError(f"|X| = {instance.n_atoms} exceeds the enumeration cap {cap}")
    limit = instance.h_size if max_cells is None else min(max_cells, instance.h_size)
    limit = min(limit, instance.n_atoms)
    return list(_enumerate(instance, tuple(domains), limit, tol))


def _row_classes(instance: Instance) -> list[list[int]]:
    classes: dict[tuple, list[int]] = {}
    for i1, row in enumerate(instance.kernel.table):
        classes.setdefault(tuple(row), []).append(i1)
    return list(classes.values())


def characterize_full_invariances(instance: Instance) -> list[FeaturePartition]:
    """Closed form of the partitions invariant over the whole family.

    Built class by class: within a class of identical kernel rows the units
    are whole slabs (or single atoms, when the row is deterministic), and any
    grouping of the units is allowed.  Result is capped at ``h_size`` cells and
    sorted in canonical order.
    """
    per_class = []
    for members in _row_classes(instance):
        if instance.kernel.is_deterministic(members[0]):
            units = [(instance.atom(i1, i2),) for i1 in members for i2 in range(instance.n2)]
        else:
            units = [tuple(instance.atom(i1, i2) for i2 in range(instance.n2)) for i1 in members]
        per_class.append(units)

    limit = instance.h_size
    groupings = [list(iter_partitions(len(units), limit)) for units in per_class]
    out = set()
    for combo in product(*groupings):
        if sum(g.n_cells for g in combo) > limit:
            continue
        assignment = [0] * instance.n_atoms
        offset = 0
        for units, g in zip(per_class, combo):
            for u, c in zip(units, g.labels):
                for atom in u:
                    assignment[atom] = offset + c
            offset += g.n_cells
        out.add(FeaturePartition.from_assignment(assignment))
    return sorted(out, key=lambda p: p.labels)


def is_full_invariance(instance: Instance, phi: FeaturePartition) -> bool:
    """Membership test for the closed form, without enumerating it."""
    if phi.n_cells > instance.h_size:
        return False
    kernel = instance.kernel
    n2 = instance.n2
    for atoms in phi.cells():
        rows = {tuple(kernel.row(a // n2)) for a in atoms}
        if len(rows) > 1:
            return False
        x1s = {a // n2 for a in atoms}
        for i1 in x1s:
            whole = all(phi.labels[instance.atom(i1, i2)] == phi.labels[atoms[0]] for i2 in range(n2))
            if not whole and not kernel.is_deterministic(i1):
                return False
    return True


def delta_domains(instance: Instance) -> list[Domain]:
    """Every vertex of the family: point mass on one x1, point-mass X2-kernels.

    X2-kernels at the other x1 carry no mass and are fixed to the first atom.
    """
    one, zero = instance.one(), instance.zero()

    def delta(n, k):
        return tuple(one if i == k else zero for i in range(n))

    out = []
    for star in range(instance.n1):
        for choice in product(range(instance.n2), repeat=instance.ny):
            q = tuple(
                tuple(delta(instance.n2, choice[j] if i1 == star else 0) for j in range(instance.ny))
                for i1 in range(instance.n1)
            )
            out.append(Domain(delta(instance.n1, star), q))
    return out


@dataclass(frozen=True)
class WitnessPair:
    """Two family members on which ``phi`` induces different conditionals.

    Both put all mass on ``x1_star``.  Domain a sends the target labels to
    ``x2_star`` and the rest to ``x2_star2``; domain b does the opposite.
    Conditionals are probabilities of the target label set given the target cell.
    """

    domain_a: Domain
    domain_b: Domain
    target_cell: int
    target_label_set: tuple[int, ...]
    conditional_a: object
    conditional_b: object
    x1_star: int
    x2_star: int
    x2_star2: int


@dataclass(frozen=True)
class NoWitness:
    kind: str  # "factors" or "no-witness-available"
    reason: str


def _label_set_probability(joint: JointTable, phi: FeaturePartition, cell: int, labels):
    cond = conditional_given_feature(joint, phi, cell)
    if cond is None:
        return None
    return sum(cond[j] for j in labels)


def construct_witness(instance: Instance, phi: FeaturePartition):
    """Build two family members certifying that ``phi`` is not invariant.

    Searches (x1, x2 pair, label) lexicographically for a split
    ``phi(x1*, x2*) != phi(x1*, x2**)`` and a label with ``0 < p(y*|x1*) < 1``;
    the label set is the singleton ``{y*}``.
    """
    n1, n2, ny = instance.n1, instance.n2, instance.ny
    if phi.factors_through_x1(n2):
        return NoWitness("factors", "feature map is constant in x2")
    one, zero = instance.one(), instance.zero()
    kernel = instance.kernel.table
    found_split = False
    for i1 in range(n1):
        for a in range(n2):
            for b in range(a + 1, n2):
                if phi.labels[instance.atom(i1, a)] == phi.labels[instance.atom(i1, b)]:
                    continue
                found_split = True
                for y in range(ny):
                    if not 0 < kernel[i1][y] < 1:
                        continue
                    labels = (y,)

                    def routed(inside, outside):
                        return tuple(
                            tuple(
                                tuple(one if k == (inside if j in labels else outside) else zero for k in range(n2))
                                for j in range(ny)
                            )
                            for _ in range(n1)
                        )

                    marginal = tuple(one if k == i1 else zero for k in range(n1))
                    dom_a = Domain(marginal, routed(a, b))
                    dom_b = Domain(marginal, routed(b, a))
                    cell = phi.labels[instance.atom(i1, a)]
                    ca = _label_set_probability(joint_distribution(instance, dom_a), phi, cell, labels)
                    cb = _label_set_probability(joint_distribution(instance, dom_b), phi, cell, labels)
                    return WitnessPair(dom_a, dom_b, cell, labels, ca, cb, i1, a, b)
    assert found_split
    cond = "condition (v): some label with 0 < p(y|x1) < 1" if instance.task is Task.CLASSIFICATION else (
        "label richness: a label set N with 0 < p(N|x1) < 1"
    )
    return NoWitness(
        "no-witness-available",
        f"every x1 where the map splits X2 has a deterministic kernel row; violated {cond}",
    )
