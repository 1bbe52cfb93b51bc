"""Exact finite-instance laboratory for Invariant Risk Minimization.

Finite input spaces X = X1 x X2, a fixed label kernel p(y | x1) shared by
every domain, exact risks and worst-case (o.o.d.) risks, the bi-level IRM
problem solved by enumeration, and checks of when its solutions are
o.o.d.-optimal.
"""

__version__ = "0.1.0"

from .logsum import LogSum
from .model import (
    CapacityError,
    Domain,
    Instance,
    InvariantKernel,
    JointTable,
    StructureError,
    Task,
    ValidationReport,
    conditional_given_feature,
    joint_distribution,
    validate_domain,
    validate_instance,
)
from .partitions import (
    FeaturePartition,
    constant_partition,
    projection_x1,
    projection_x2,
    singletons,
)
from .risk import (
    INF,
    Loss,
    Predictor,
    bayes_ood_predictor,
    entropy,
    ood_risk,
    risk,
    worst_case_domain,
)
from .invariance import (
    InvarianceReport,
    NoWitness,
    WitnessPair,
    characterize_full_invariances,
    construct_witness,
    delta_domains,
    enumerate_invariant_partitions,
    is_invariant,
)
from .solver import EmptyInvarianceSetError, IrmSolution, irm_solve, optimal_head
from .io import InstanceDocument, load_document, loads_document, dumps_document, save_document
from .instances import canonical
from .verify import (
    ConditionReport,
    Status,
    TheoremVerdict,
    check_conditions,
    mine,
    mine_counterexamples,
    verify_theorem,
)
