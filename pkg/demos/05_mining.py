"""
Searching for counterexamples
=============================

Random small instances are drawn so that exactly one condition fails, and
every IRM minimizer is tested for o.o.d. optimality.  With nothing broken the
search is a falsification run and must come back empty.  Results depend only
on the seed, not on IRL_THREADS.
"""

import sys

from irmlab import mine
from irmlab.io import digest

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 300

for condition in ("none", "ii", "i", "v"):
    run = mine(7, trials, condition)
    print(f"break {condition:>4}: {run.eligible} eligible of {trials}, {len(run.counterexamples)} violation(s)")

run = mine(7, trials, "ii")
if run.counterexamples:
    c = run.counterexamples[0]
    inst = c.document.instance
    print(f"\nfirst (ii) counterexample, trial {c.trial}, digest {digest(c.document)[:12]}")
    print("  kernel", [[str(p) for p in row] for row in inst.kernel.table])
    for name, d in c.document.domains.items():
        print(f"  {name} x1 marginal", [str(m) for m in d.x1_marginal])
    print("min o.o.d.", c.verdict.min_ood_risk, "offending o.o.d.", c.verdict.offending_ood_risk)
