import os

import numpy as np

EPS = np.finfo(float).eps

#: Q of the partitioned factorization is materialized only up to this many rows.
Q_CAP = 2000

#: Default cap on the number of entries of any dense Kronecker-sized matrix.
DENSE_CAP = 10**7

TOL_SVD = 1e-12
TOL_FACT = 1e-12
TOL_GAP_FACTOR = 1e2
TOL_CONSISTENT = 1e3 * EPS
TOL_STAT = 1e2 * EPS


def dense_cap():
    """Current dense-size cap, honouring the ``MTLS_DENSE_CAP`` variable."""
    value = os.environ.get("MTLS_DENSE_CAP")
    if value is None or value.strip() == "":
        return DENSE_CAP
    return int(float(value))
