"""Optimality-condition checks and the IRM-versus-o.o.d. inclusion harness.

``verify_theorem`` solves the bi-level problem exactly and asks whether every
minimizer attains the minimum o.o.d. risk.  ``check_conditions`` evaluates the
finite counterparts of the sufficient conditions:

(i)   invariances of the training domains equal those of the whole family
      (checked extensionally, against the closed form);
(ii)  the training x1-marginals jointly cover X1;
(iii) the feature budget can keep every x1 apart: ``h_size >= |X1|``;
(iv)  regression only: every kernel row has two or more positive labels.  On
      a finite Y this is what continuity of the label density buys, namely a
      label set whose probability lies strictly between 0 and 1;
(v)   classification only: every kernel row has two or more positive labels.

A condition that does not apply to the task is reported as vacuous.
"""

from __future__ import annotations

import enum
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .instances import random_domain, random_instance
from .invariance import (
    DEFAULT_CAP,
    characterize_full_invariances,
    delta_domains,
    enumerate_invariant_partitions,
)
from .io import InstanceDocument
from .model import DEFAULT_TOL, CapacityError, Domain, Instance, Task
from .risk import Predictor, bayes_ood_predictor, ood_risk, resolve_loss, risk_eq
from .solver import IrmSolution, irm_solve

__all__ = [
    "Status",
    "ConditionCheck",
    "ConditionReport",
    "TheoremVerdict",
    "Counterexample",
    "MiningRun",
    "check_conditions",
    "verify_theorem",
    "mine",
    "mine_counterexamples",
    "run_trial",
]

BREAKABLE = ("i", "ii", "v", "none")


class Status(str, enum.Enum):
    HOLDS = "holds"
    FAILS = "fails"
    VACUOUS = "vacuous"
    UNCHECKED = "unchecked"


@dataclass(frozen=True)
class ConditionCheck:
    status: Status
    evidence: object = None
    note: str = ""

    @property
    def ok(self) -> bool:
        return self.status in (Status.HOLDS, Status.VACUOUS)


@dataclass(frozen=True)
class ConditionReport:
    cond_i: ConditionCheck
    cond_ii: ConditionCheck
    cond_iii: ConditionCheck
    cond_iv: ConditionCheck
    cond_v: ConditionCheck

    def items(self):
        return (
            ("i", self.cond_i),
            ("ii", self.cond_ii),
            ("iii", self.cond_iii),
            ("iv", self.cond_iv),
            ("v", self.cond_v),
        )

    @property
    def all_hold(self) -> bool:
        return all(c.ok for _, c in self.items())


@dataclass(frozen=True)
class TheoremVerdict:
    conditions: ConditionReport
    irm_solution: IrmSolution
    min_ood_risk: object
    minimizer_ood_risks: tuple
    inclusion_holds: bool
    offending_minimizer: Predictor | None = None
    offending_ood_risk: object = None


def _rich_rows(instance: Instance) -> list[int]:
    """Indices of kernel rows with fewer than two positive entries."""
    return [i for i, row in enumerate(instance.kernel.table) if sum(1 for v in row if v > 0) < 2]


def _check_invariance_equality(instance, training_domains, cap, tol, confirm) -> ConditionCheck:
    try:
        train = enumerate_invariant_partitions(instance, training_domains, cap=cap, tol=tol)
    except CapacityError as exc:
        return ConditionCheck(Status.UNCHECKED, None, str(exc))
    full = characterize_full_invariances(instance)
    if confirm:
        battery = enumerate_invariant_partitions(instance, delta_domains(instance), cap=cap, tol=tol)
        if battery != full:
            raise RuntimeError("closed-form invariances disagree with the vertex-domain battery")
    extra = [p for p in train if p not in set(full)]
    if extra:
        return ConditionCheck(
            Status.FAILS, extra[0], f"{len(extra)} training invariance(s) are not invariant over the family"
        )
    missing = [p for p in full if p not in set(train)]
    if missing:
        return ConditionCheck(Status.FAILS, missing[0], "family invariance not invariant on training domains")
    return ConditionCheck(Status.HOLDS, None, f"{len(full)} invariant partition(s) on both sides")


def check_conditions(
    instance: Instance,
    training_domains: Sequence[Domain],
    task=None,
    cap: int = DEFAULT_CAP,
    tol: float = DEFAULT_TOL,
    confirm: bool = True,
) -> ConditionReport:
    """Evaluate conditions (i)-(v); (i) needs an exhaustive enumeration within ``cap``.

    With ``confirm`` the closed form used for (i) is re-derived from the
    vertex-domain battery and a disagreement raises ``RuntimeError``.
    """
    task = instance.task if task is None else Task(task)
    cond_i = _check_invariance_equality(instance, training_domains, cap, tol, confirm)

    covered = {i for d in training_domains for i in d.support()}
    uncovered = [i for i in range(instance.n1) if i not in covered]
    cond_ii = (
        ConditionCheck(Status.FAILS, uncovered, "x1 points outside every training support")
        if uncovered
        else ConditionCheck(Status.HOLDS)
    )

    cond_iii = (
        ConditionCheck(Status.HOLDS)
        if instance.h_size >= instance.n1
        else ConditionCheck(Status.FAILS, instance.h_size, f"h_size {instance.h_size} < |X1| = {instance.n1}")
    )

    poor = _rich_rows(instance)
    if task is Task.REGRESSION:
        cond_iv = (
            ConditionCheck(Status.FAILS, poor, "kernel rows with a single positive label")
            if poor
            else ConditionCheck(Status.HOLDS)
        )
        cond_v = ConditionCheck(Status.VACUOUS, None, "applies to classification only")
    else:
        cond_iv = ConditionCheck(Status.VACUOUS, None, "applies to regression only")
        cond_v = (
            ConditionCheck(Status.FAILS, poor, "kernel rows with a single positive label")
            if poor
            else ConditionCheck(Status.HOLDS)
        )
    return ConditionReport(cond_i, cond_ii, cond_iii, cond_iv, cond_v)


def verify_theorem(
    instance: Instance,
    training_domains: Sequence[Domain],
    loss=None,
    cap: int = DEFAULT_CAP,
    tol: float = DEFAULT_TOL,
    confirm: bool = True,
) -> TheoremVerdict:
    """Solve IRM exactly and test whether every minimizer is o.o.d.-optimal."""
    loss = resolve_loss(instance, loss)
    conditions = check_conditions(instance, training_domains, cap=cap, tol=tol, confirm=confirm)
    solution = irm_solve(instance, training_domains, loss, cap=cap, tol=tol)
    best = ood_risk(instance, bayes_ood_predictor(instance, loss), loss)
    seen: dict = {}
    for p in solution.minimizers:
        if p.values() not in seen:
            seen[p.values()] = ood_risk(instance, p, loss)
    risks = tuple(seen[p.values()] for p in solution.minimizers)
    offending = next(
        ((p, r) for p, r in zip(solution.minimizers, risks) if not risk_eq(r, best, tol)), None
    )
    return TheoremVerdict(
        conditions=conditions,
        irm_solution=solution,
        min_ood_risk=best,
        minimizer_ood_risks=risks,
        inclusion_holds=offending is None,
        offending_minimizer=offending[0] if offending else None,
        offending_ood_risk=offending[1] if offending else None,
    )


# counterexample mining --------------------------------------------------


@dataclass(frozen=True)
class Counterexample:
    trial: int
    document: InstanceDocument
    verdict: TheoremVerdict


@dataclass(frozen=True)
class MiningRun:
    seed: int
    trials: int
    condition: str
    eligible: int
    counterexamples: tuple[Counterexample, ...]


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    # counter-based: each trial owns an independent stream
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


def _generate(rng: np.random.Generator, condition: str) -> InstanceDocument:
    task = Task.CLASSIFICATION if condition == "v" else (Task.REGRESSION, Task.CLASSIFICATION)[int(rng.integers(2))]
    n1 = int(rng.integers(2 if condition == "ii" else 1, 4))
    n2 = int(rng.integers(1, 4))
    ny = int(rng.integers(2, 4))
    h_size = n1 + int(rng.integers(0, 2))
    det: list[int] = []
    if condition == "v":
        det = sorted(int(i) for i in rng.choice(n1, size=int(rng.integers(1, n1 + 1)), replace=False))
    instance = random_instance(rng, n1, n2, ny, h_size, task, det)

    n_train = int(rng.integers(1, 3)) if condition == "i" else int(rng.integers(2, 5))
    if condition == "ii":
        hidden = set(int(i) for i in rng.choice(n1, size=int(rng.integers(1, n1)), replace=False))
        support = [i for i in range(n1) if i not in hidden]
        domains = [random_domain(rng, instance, support) for _ in range(n_train)]
    else:
        domains = [random_domain(rng, instance) for _ in range(n_train)]
    names = tuple(f"e{k + 1}" for k in range(n_train))
    return InstanceDocument(instance, dict(zip(names, domains)), names)


def _eligible(report: ConditionReport, condition: str) -> bool:
    broken = {name for name, c in report.items() if not c.ok}
    if condition == "none":
        return not broken
    if condition == "ii":
        # losing coverage usually breaks (i) as well; (iii)-(v) must hold
        return "ii" in broken and not broken - {"i", "ii"}
    return broken == {condition}


def run_trial(seed: int, trial: int, condition: str = "none", cap: int = DEFAULT_CAP):
    """Generate one random problem; return ``(document, verdict)`` or ``(document, None)``
    when the problem does not break exactly the requested condition."""
    doc = _generate(_trial_rng(seed, trial), condition)
    report = check_conditions(doc.instance, doc.training_domains, cap=cap, confirm=False)
    if not _eligible(report, condition):
        return doc, None
    return doc, verify_theorem(doc.instance, doc.training_domains, cap=cap, confirm=False)


def _trial_job(args):
    seed, trial, condition, cap = args
    doc, verdict = run_trial(seed, trial, condition, cap)
    if verdict is None:
        return trial, None
    return trial, (doc, verdict)


def _default_workers() -> int:
    try:
        return max(1, int(os.environ.get("IRL_THREADS", "1")))
    except ValueError:
        return 1


def mine(seed: int, trials: int, condition_to_break: str = "none", workers: int | None = None, cap: int = DEFAULT_CAP) -> MiningRun:
    """Random falsification run; keeps every eligible trial whose inclusion fails."""
    if condition_to_break not in BREAKABLE:
        raise ValueError(f"condition_to_break must be one of {BREAKABLE}")
    workers = _default_workers() if workers is None else max(1, workers)
    jobs = [(seed, t, condition_to_break, cap) for t in range(trials)]
    if workers > 1 and trials > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_trial_job, jobs, chunksize=64))
    else:
        results = [_trial_job(j) for j in jobs]
    eligible = 0
    found = []
    for trial, res in results:
        if res is None:
            continue
        eligible += 1
        doc, verdict = res
        if not verdict.inclusion_holds:
            found.append(Counterexample(trial, doc, verdict))
    return MiningRun(seed, trials, condition_to_break, eligible, tuple(found))


def mine_counterexamples(seed: int, trials: int, condition_to_break: str = "none", workers: int | None = None):
    """``(document, training domains, verdict)`` for every violation found."""
    run = mine(seed, trials, condition_to_break, workers)
    return [(c.document.instance, c.document.training_domains, c.verdict) for c in run.counterexamples]
