"""Command-line front end.  Every subcommand prints one JSON report on stdout.

Exit codes: 0 success, 1 a requested expectation failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from .invariance import (
    DEFAULT_CAP,
    NoWitness,
    characterize_full_invariances,
    construct_witness,
    enumerate_invariant_partitions,
)
from .io import DocumentError, InstanceDocument, digest, load_document, rational, render_report, render_value
from .model import DEFAULT_TOL, CapacityError, Domain, StructureError, to_fraction, validate_domain, validate_instance
from .partitions import FeaturePartition, parse_phi
from .risk import Loss, Predictor, bayes_ood_predictor, ood_risk, resolve_loss, risk, worst_case_domain
from .solver import EmptyInvarianceSetError, irm_solve, optimal_head
from .verify import BREAKABLE, mine, verify_theorem, check_conditions

__all__ = ["main", "build_parser"]


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


# rendering ----------------------------------------------------------------


def _vec(v) -> list:
    return [render_value(x) for x in v]


def _partition(phi: FeaturePartition) -> list[int]:
    return list(phi.labels)


def _predictor(p: Predictor) -> dict:
    return {"phi": _partition(p.phi), "head": [_vec(v) for v in p.head]}


def _domain(d: Domain) -> dict:
    return {
        "x1_marginal": _vec(d.x1_marginal),
        "x2_given_x1y": [[_vec(v) for v in per_y] for per_y in d.x2_given_x1y],
    }


def _conditions(report) -> dict:
    out = {}
    for name, check in report.items():
        ev = check.evidence
        if isinstance(ev, FeaturePartition):
            ev = _partition(ev)
        out[name] = {"status": check.status.value, "evidence": ev, "note": check.note}
    return out


def _verdict(v) -> dict:
    return {
        "conditions": _conditions(v.conditions),
        "min_ood_risk": render_value(v.min_ood_risk),
        "inclusion_holds": v.inclusion_holds,
        "pooled_risk": render_value(v.irm_solution.pooled_risk),
        "n_minimizers": len(v.irm_solution.minimizers),
        "minimizer_ood_risks": [render_value(r) for r in v.minimizer_ood_risks],
        "offending_minimizer": _predictor(v.offending_minimizer) if v.offending_minimizer else None,
        "offending_ood_risk": render_value(v.offending_ood_risk) if v.offending_minimizer else None,
    }


# argument plumbing ----------------------------------------------------------


def _load(args) -> tuple[InstanceDocument, InstanceDocument]:
    """The document as written and the one computations run on (float mode converts)."""
    doc = load_document(args.instance)
    report = validate_instance(doc.instance)
    if not report.ok:
        raise InputError("invalid instance: " + "; ".join(report.violations))
    for name, d in doc.domains.items():
        rep = validate_domain(doc.instance, d)
        if not rep.ok:
            raise InputError(f"invalid domain {name}: " + "; ".join(rep.violations))
    return doc, (doc.as_float() if args.float else doc)


def _loss(args, work: InstanceDocument) -> Loss:
    return resolve_loss(work.instance, args.loss)


def _domains(work: InstanceDocument, names: str | None) -> list[Domain]:
    if names is None:
        if not work.training:
            raise InputError("no training domains in the instance and none given")
        return work.training_domains
    out = []
    for name in (n.strip() for n in names.split(",")):
        if name not in work.domains:
            raise InputError(f"unknown domain {name!r}")
        out.append(work.domains[name])
    return out


def _phi(work: InstanceDocument, text: str) -> FeaturePartition:
    try:
        return parse_phi(work.instance, text)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _head(work: InstanceDocument, phi: FeaturePartition, text: str) -> tuple:
    cells = [c for c in text.split(";")]
    if len(cells) != phi.n_cells:
        raise InputError(f"--head gives {len(cells)} cell value(s), phi has {phi.n_cells} cells")
    try:
        head = tuple(tuple(to_fraction(x.strip()) for x in c.split(",")) for c in cells)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad --head value: {exc}") from exc
    if not work.instance.exact:
        head = tuple(tuple(float(x) for x in v) for v in head)
    return head


def _predictor_arg(args, work: InstanceDocument, loss: Loss) -> Predictor:
    """``--phi``/``--head``; the default predictor is the o.o.d.-optimal one."""
    if args.phi is None and args.head is None:
        return bayes_ood_predictor(work.instance, loss)
    phi = _phi(work, args.phi or "x1-projection")
    if args.head is None:
        return Predictor(phi, optimal_head(work.instance, phi, _domains(work, None), loss))
    return Predictor(phi, _head(work, phi, args.head))


# commands -------------------------------------------------------------------


def cmd_validate(args):
    doc = load_document(args.instance)
    inst = validate_instance(doc.instance)
    doms = {name: list(validate_domain(doc.instance, d).violations) for name, d in doc.domains.items()}
    ok = inst.ok and not any(doms.values())
    results = {"valid": ok, "instance_violations": list(inst.violations), "domain_violations": doms}
    return doc if inst.ok else None, results, 0 if ok else 1


def cmd_risk(args):
    doc, work = _load(args)
    loss = _loss(args, work)
    pred = _predictor_arg(args, work, loss)
    names = args.domain.split(",") if args.domain else list(work.training)
    domains = _domains(work, ",".join(names))
    risks = {name: render_value(risk(work.instance, d, pred, loss)) for name, d in zip(names, domains)}
    return doc, {"loss": loss.value, "predictor": _predictor(pred), "risks": risks}, 0


def cmd_ood_risk(args):
    doc, work = _load(args)
    loss = _loss(args, work)
    pred = _predictor_arg(args, work, loss)
    value = ood_risk(work.instance, pred, loss)
    worst = worst_case_domain(work.instance, pred, loss)
    return doc, {
        "loss": loss.value,
        "predictor": _predictor(pred),
        "ood_risk": render_value(value),
        "worst_case_domain": _domain(worst),
    }, 0


def cmd_invariances(args):
    doc, work = _load(args)
    found = enumerate_invariant_partitions(
        work.instance, _domains(work, args.domains), max_cells=args.max_cells, cap=args.cap, tol=args.tol
    )
    return doc, {"count": len(found), "partitions": [_partition(p) for p in found]}, 0


def cmd_characterize(args):
    doc, work = _load(args)
    found = characterize_full_invariances(work.instance)
    return doc, {"count": len(found), "partitions": [_partition(p) for p in found]}, 0


def cmd_witness(args):
    doc, work = _load(args)
    phi = _phi(work, args.phi or "x2-projection")
    w = construct_witness(work.instance, phi)
    if isinstance(w, NoWitness):
        return doc, {"phi": _partition(phi), "outcome": w.kind, "reason": w.reason}, 0
    return doc, {
        "phi": _partition(phi),
        "outcome": "witness",
        "x1_star": w.x1_star,
        "x2_star": w.x2_star,
        "x2_star2": w.x2_star2,
        "target_cell": w.target_cell,
        "target_label_set": list(w.target_label_set),
        "conditional_a": _plain(w.conditional_a),
        "conditional_b": _plain(w.conditional_b),
        "domain_a": _domain(w.domain_a),
        "domain_b": _domain(w.domain_b),
    }, 0


def _plain(x) -> str:
    return rational(x) if isinstance(x, Fraction) else f"{x:.12g}"


def cmd_solve_irm(args):
    doc, work = _load(args)
    loss = _loss(args, work)
    domains = _domains(work, args.domains)
    sol = irm_solve(work.instance, domains, loss, cap=args.cap, tol=args.tol)
    return doc, {
        "loss": loss.value,
        "pooled_risk": render_value(sol.pooled_risk),
        "n_candidates": len(sol.candidates),
        "minimizers": [
            {**_predictor(p), "per_domain_risks": [render_value(r) for r in per]}
            for p, per in zip(sol.minimizers, sol.per_domain_risks)
        ],
    }, 0


def cmd_check_conditions(args):
    doc, work = _load(args)
    report = check_conditions(work.instance, _domains(work, args.domains), cap=args.cap, tol=args.tol)
    return doc, {"conditions": _conditions(report), "all_hold": report.all_hold}, 0


def cmd_verify(args):
    doc, work = _load(args)
    loss = _loss(args, work)
    v = verify_theorem(work.instance, _domains(work, args.domains), loss, cap=args.cap, tol=args.tol)
    code = 1 if args.expect_holds and not v.inclusion_holds else 0
    return doc, {"loss": loss.value, **_verdict(v)}, code


def cmd_mine(args):
    if args.trials < 0:
        raise InputError("--trials must be non-negative")
    run = mine(args.seed, args.trials, args.break_, cap=args.cap)
    found = [
        {"trial": c.trial, "instance_digest": digest(c.document), **_verdict(c.verdict)}
        for c in run.counterexamples
    ]
    results = {
        "seed": run.seed,
        "trials": run.trials,
        "condition_to_break": run.condition,
        "eligible": run.eligible,
        "violations": len(found),
        "counterexamples": found,
    }
    code = 1 if args.expect_empty and found else 0
    return None, results, code


# parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--float", action="store_true", help="float arithmetic instead of exact rationals")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="float-mode tolerance (default 1e-9)")
    common.add_argument("--cap", type=int, default=DEFAULT_CAP, help="largest |X| enumerated exhaustively")

    inst = argparse.ArgumentParser(add_help=False)
    inst.add_argument("--instance", required=True, help="instance document (TOML)")

    loss = argparse.ArgumentParser(add_help=False)
    loss.add_argument("--loss", choices=["least-square", "cross-entropy"], help="defaults from the task")

    pred = argparse.ArgumentParser(add_help=False)
    pred.add_argument("--phi", help="x1-projection, x2-projection, constant, singletons or per-atom cell ids")
    pred.add_argument("--head", help="cell values separated by ';', coordinates by ','")

    doms = argparse.ArgumentParser(add_help=False)
    doms.add_argument("--domains", help="comma-separated domain names (default: training list)")

    parser = _Parser(prog="irmlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, parents, help_):
        p = sub.add_parser(name, parents=[common, *parents], help=help_)
        p.set_defaults(func=func)
        return p

    add("validate", cmd_validate, [inst], "check an instance document")
    p = add("risk", cmd_risk, [inst, loss, pred], "risk of a predictor on named domains")
    p.add_argument("--domain", help="comma-separated domain names (default: training list)")
    add("ood-risk", cmd_ood_risk, [inst, loss, pred], "worst-case risk and the domain attaining it")
    p = add("invariances", cmd_invariances, [inst, doms], "invariant partitions of the given domains")
    p.add_argument("--max-cells", type=int)
    add("characterize", cmd_characterize, [inst], "closed-form invariances of the whole family")
    p = add("witness", cmd_witness, [inst], "two family domains certifying non-invariance")
    p.add_argument("--phi", help="feature partition (default x2-projection)")
    add("solve-irm", cmd_solve_irm, [inst, loss, doms], "every minimizer of the bi-level problem")
    add("check-conditions", cmd_check_conditions, [inst, doms], "evaluate conditions (i)-(v)")
    p = add("verify", cmd_verify, [inst, loss, doms], "solve IRM and test o.o.d. optimality of every minimizer")
    p.add_argument("--expect-holds", action="store_true", help="exit 1 unless the inclusion holds")
    p = add("mine", cmd_mine, [], "random search for inclusion failures")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--break", dest="break_", choices=BREAKABLE, default="none", help="condition to break")
    p.add_argument("--expect-empty", action="store_true", help="exit 1 if any violation is found")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        doc, results, code = args.func(args)
    except (InputError, DocumentError, StructureError, CapacityError, EmptyInvarianceSetError, OSError) as exc:
        print(f"irmlab {args.command}: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(render_report(args.command, doc, results))
    return code


if __name__ == "__main__":
    sys.exit(main())
