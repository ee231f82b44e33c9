"""Problem generators, perturbation trials and table reproductions."""

from .generators import child_seeds, delta_block, gen_gap_controlled, gen_intercept, gen_transfer_function, rng_for
from .harness import (
    BOUND_PAIRS,
    BoundViolation,
    EpsMeasures,
    TrialRecord,
    eps_measures,
    finite_difference_jacobian,
    loglog_slope,
    perturb_entrywise,
    perturb_structured,
    run_bound_trial,
    run_first_order_trial,
)
from .tables import TABLES, Table, TableFailure, run_table, table1, table2, table3, table4
