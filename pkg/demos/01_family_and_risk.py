"""
Domains of the family and their worst case
==========================================

Two binary inputs, a binary label.  The label depends on x1 through a fixed
kernel; x2 is free to track the label however a domain likes.  Every risk
below is an exact rational.
"""

from fractions import Fraction

from irmlab import (
    Predictor,
    bayes_ood_predictor,
    canonical,
    constant_partition,
    joint_distribution,
    ood_risk,
    projection_x2,
    risk,
    worst_case_domain,
)

doc = canonical()
inst = doc.instance
print("kernel rows p(y | x1):", [[str(p) for p in row] for row in inst.kernel.table])

# In e1 the second input copies the label, in e2 it is flipped, in e3 it is noise.
for name, d in doc.domains.items():
    j = joint_distribution(inst, d)
    print(name, "total mass", j.total(), "x1 marginal", [str(m) for m in j.x1_marginal()])

# The o.o.d. optimal predictor reads x1 only and predicts the kernel mean.
bayes = bayes_ood_predictor(inst)
print("bayes head:", [str(v[0]) for v in bayes.head])
for name, d in doc.domains.items():
    print(f"  risk on {name}: {risk(inst, d, bayes)}")
print("  o.o.d. risk:", ood_risk(inst, bayes))

# A predictor that trusts x2 does perfectly on e1 and terribly elsewhere.
copy_x2 = Predictor(projection_x2(inst), ((Fraction(0),), (Fraction(1),)))
print("x2 copier on e1:", risk(inst, doc.domains["e1"], copy_x2))
print("x2 copier o.o.d.:", ood_risk(inst, copy_x2))
worst = worst_case_domain(inst, copy_x2)
print("  attained by x1 marginal", [str(m) for m in worst.x1_marginal],
      "with risk", risk(inst, worst, copy_x2))

# Constant 1/2 sits between the two.
half = Predictor(constant_partition(inst), ((Fraction(1, 2),),))
print("constant 1/2 o.o.d.:", ood_risk(inst, half))
