"""Exact bi-level IRM on a finite instance.

The outer problem ranges over invariant partitions of the training domains,
the inner one over heads.  For a fixed partition the summed training risk
separates by cell, and each cell's minimizer is the conditional mean
(least squares) or conditional distribution (cross-entropy) of the label
under the pooled training joint.  So the bi-level argmin is found by
enumerating the invariant partitions and taking the best of their optimal
heads.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .invariance import DEFAULT_CAP, enumerate_invariant_partitions
from .model import DEFAULT_TOL, Domain, Instance, joint_distribution
from .partitions import FeaturePartition
from .risk import INF, Loss, Predictor, resolve_loss, risk, risk_eq, risk_from_table

__all__ = [
    "IrmSolution",
    "EmptyInvarianceSetError",
    "pooled_joint",
    "optimal_head",
    "training_risks",
    "irm_solve",
]


class EmptyInvarianceSetError(RuntimeError):
    """No partition within the cell budget is invariant across the training domains."""


@dataclass(frozen=True)
class IrmSolution:
    minimizers: tuple[Predictor, ...]
    pooled_risk: object
    per_domain_risks: tuple[tuple, ...]
    candidates: tuple[FeaturePartition, ...] = ()


def pooled_joint(instance: Instance, domains: Sequence[Domain]) -> list[list]:
    """Entrywise sum of the domains' joints (equal weights)."""
    return _pool(instance, [joint_distribution(instance, d).table for d in domains])


def _pool(instance: Instance, tables) -> list[list]:
    return [
        [sum((t[a][j] for t in tables), instance.zero()) for j in range(instance.ny)]
        for a in range(instance.n_atoms)
    ]


def _default_value(instance: Instance, loss: Loss) -> tuple:
    if loss is Loss.CROSS_ENTROPY:
        u = Fraction(1, instance.ny) if instance.exact else 1.0 / instance.ny
        return (u,) * instance.ny
    return (instance.zero(),) * len(instance.y_points[0])


def optimal_head(instance: Instance, phi: FeaturePartition, training_domains: Sequence[Domain], loss=None) -> tuple:
    """Head minimizing the summed training risk of ``head o phi``.

    Cells without pooled mass get the default value: the zero vector for
    least squares, the uniform distribution for cross-entropy.
    """
    loss = resolve_loss(instance, loss)
    return _head(instance, phi, pooled_joint(instance, training_domains), loss)


def _head(instance: Instance, phi: FeaturePartition, pooled, loss: Loss, memo: dict | None = None) -> tuple:
    if memo is None:
        memo = {}
    head = []
    for atoms in phi.cells():
        key = tuple(atoms)
        if key not in memo:
            memo[key] = _cell_value(instance, atoms, pooled, loss)
        head.append(memo[key])
    return tuple(head)


def _cell_value(instance: Instance, atoms, pooled, loss: Loss) -> tuple:
    by_label = [sum((pooled[a][j] for a in atoms), instance.zero()) for j in range(instance.ny)]
    mass = sum(by_label)
    if mass == 0:
        return _default_value(instance, loss)
    if loss is Loss.CROSS_ENTROPY:
        return tuple(v / mass for v in by_label)
    dim = len(instance.y_points[0])
    return tuple(
        sum((by_label[j] * instance.y_points[j][k] for j in range(instance.ny)), instance.zero()) / mass
        for k in range(dim)
    )


def training_risks(instance: Instance, predictor: Predictor, domains: Sequence[Domain], loss=None):
    """``(sum, per-domain tuple)`` of the predictor's risks on ``domains``."""
    per = tuple(risk(instance, d, predictor, loss) for d in domains)
    total = per[0]
    for r in per[1:]:
        total = INF if INF in (total, r) else total + r
    return total, per


def _float_scores(instance: Instance, candidates, pooled, loss: Loss) -> np.ndarray:
    """Pooled training risk of every candidate's optimal head, in doubles.

    Only used to shortlist: rounding error is far below the margin applied
    before the exact comparison.
    """
    table = np.array([[float(v) for v in row] for row in pooled])
    labels = np.array([phi.labels for phi in candidates])
    k = int(labels.max()) + 1
    sums = np.einsum("pnk,ny->pky", np.eye(k)[labels], table)
    mass = sums.sum(axis=-1)
    if loss is Loss.CROSS_ENTROPY:
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(sums > 0, sums * np.log(sums / mass[..., None]), 0.0)
        return -terms.sum(axis=(1, 2))
    ys = np.array([[float(c) for c in y] for y in instance.y_points])
    second = float((table * (ys * ys).sum(axis=1)).sum())
    first = sums @ ys  # (P, k, dim)
    with np.errstate(divide="ignore", invalid="ignore"):
        explained = np.where(mass > 0, (first * first).sum(axis=-1) / mass, 0.0)
    return second - explained.sum(axis=1)


def irm_solve(
    instance: Instance,
    training_domains: Sequence[Domain],
    loss=None,
    cap: int = DEFAULT_CAP,
    tol: float = DEFAULT_TOL,
) -> IrmSolution:
    """Every (partition, head) pair attaining the minimum summed training risk."""
    loss = resolve_loss(instance, loss)
    if not training_domains:
        raise ValueError("need at least one training domain")
    candidates = enumerate_invariant_partitions(instance, training_domains, cap=cap, tol=tol)
    if not candidates:
        raise EmptyInvarianceSetError(
            f"no partition with at most {instance.h_size} cells is invariant across the training domains"
        )
    # risk is linear in the joint, so the summed training risk is the risk
    # against the pooled table; per-domain risks are only kept for winners
    tables = [joint_distribution(instance, d).table for d in training_domains]
    pooled = _pool(instance, tables)
    shortlist = candidates
    if instance.exact and len(candidates) > 1:
        approx = _float_scores(instance, candidates, pooled, loss)
        floor = float(approx.min())
        margin = 1e-9 * (1.0 + abs(floor))
        shortlist = [phi for phi, r in zip(candidates, approx) if r <= floor + margin]
    # the pooled risk only sees values on atoms carrying pooled mass
    support = [a for a, row in enumerate(pooled) if any(v != 0 for v in row)]
    heads: dict = {}
    risks: dict = {}
    scored = []
    for phi in shortlist:
        pred = Predictor(phi, _head(instance, phi, pooled, loss, heads))
        key = tuple(pred.value_at(a) for a in support)
        if key not in risks:
            risks[key] = risk_from_table(instance, pooled, pred, loss)
        scored.append((pred, risks[key]))

    best = scored[0][1]
    for _, total in scored[1:]:
        if total < best and not risk_eq(total, best, tol):
            best = total
    winners = [p for p, t in scored if risk_eq(t, best, tol)]
    # distinct partitions often compute the same function
    per_domain = {}
    keys = [tuple(p.value_at(a) for a in support) for p in winners]
    for p, key in zip(winners, keys):
        if key not in per_domain:
            per_domain[key] = tuple(risk_from_table(instance, t, p, loss) for t in tables)
    return IrmSolution(
        minimizers=tuple(winners),
        pooled_risk=best,
        per_domain_risks=tuple(per_domain[key] for key in keys),
        candidates=tuple(candidates),
    )
