"""
Which feature maps are invariant
================================

A feature map is a partition of the finite input space.  It is invariant on
a set of domains when P(y | feature cell) agrees across them.  We list the
invariant partitions of the training domains, compare with the partitions
invariant over the whole family, and build two family members that expose
the x2-projection.
"""

from irmlab import (
    NoWitness,
    canonical,
    characterize_full_invariances,
    construct_witness,
    delta_domains,
    enumerate_invariant_partitions,
    is_invariant,
    projection_x1,
    projection_x2,
)

doc = canonical()
inst = doc.instance
atoms = [(a, b) for a in range(inst.n1) for b in range(inst.n2)]
print("atoms (x1 index, x2 index):", atoms)

train = enumerate_invariant_partitions(inst, doc.training_domains)
print("invariant on e1, e2, e3:", [p.labels for p in train])

only_two = enumerate_invariant_partitions(inst, [doc.domains["e1"], doc.domains["e2"]])
print("invariant on e1, e2 alone:", [p.labels for p in only_two])
print("  (the constant map sneaks in: both domains have P(y=1) = 1/2)")

full = characterize_full_invariances(inst)
print("invariant over the whole family:", [p.labels for p in full])
battery = delta_domains(inst)
print("confirmed by", len(battery), "point-mass domains:",
      enumerate_invariant_partitions(inst, battery) == full)

report = is_invariant(inst, projection_x2(inst), [doc.domains["e1"], doc.domains["e2"]])
for v in report.violations:
    print("x2 cell", v.cell, "conditionals", [str(x) for x in v.conditional_a], "vs",
          [str(x) for x in v.conditional_b])

w = construct_witness(inst, projection_x2(inst))
print("witness: x1* =", w.x1_star, "x2 values", (w.x2_star, w.x2_star2),
      "conditional", w.conditional_a, "then", w.conditional_b)

w = construct_witness(inst, projection_x1(inst))
assert isinstance(w, NoWitness)
print("x1-projection:", w.kind)
