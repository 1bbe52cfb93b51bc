"""
Solving the bi-level problem exactly
====================================

Inner problem: for a fixed partition, the best head on the pooled training
data.  Outer problem: the best partition among the training-invariant ones.
Ties are all kept.
"""

from irmlab import canonical, irm_solve, ood_risk, optimal_head, projection_x1, singletons

for task in ("regression", "classification"):
    doc = canonical(task)
    inst = doc.instance
    sol = irm_solve(inst, doc.training_domains)
    print(f"[{task}] {len(sol.candidates)} candidate(s), pooled risk {sol.pooled_risk}")
    for p, per in zip(sol.minimizers, sol.per_domain_risks):
        head = [[str(x) for x in v] for v in p.head]
        print("  phi", p.phi.labels, "head", head)
        print("  per domain", [str(r) for r in per], "o.o.d.", ood_risk(inst, p))

# The inner problem alone, for a partition that is not invariant.
doc = canonical()
phi = singletons(doc.instance)
print("singletons head:", [str(v[0]) for v in optimal_head(doc.instance, phi, doc.training_domains)])
print("x1 head:", [str(v[0]) for v in optimal_head(doc.instance, projection_x1(doc.instance), doc.training_domains)])

# Float mode runs the same code on doubles.
fdoc = canonical("classification").as_float()
sol = irm_solve(fdoc.instance, fdoc.training_domains)
print("float cross-entropy pooled risk:", sol.pooled_risk)
