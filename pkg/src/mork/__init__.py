"""Multi-order Runge–Kutta methods for initial value problems of any order.

The package is split into:

``mork.core``
    tableaus, jets and initial value problems with their rewrites;
``mork.methods``
    the method catalog and tableau transformations;
``mork.graph``
    stage digraphs, strongly connected blocks and computation plans;
``mork.stepper``
    single steps with Picard iteration for implicit blocks;
``mork.conditions``
    order-of-consistency residuals and experimental order fits;
``mork.stability``
    stability matrices for linear problems and scans over root sets;
``mork.cli``
    the ``mork`` command.
"""

from mork.core import (
    InitialValueProblem,
    Kind,
    MethodTableau,
    confluent_linear_ivp,
    linear_ivp_from_roots,
    reduce_to_first_order,
)
from mork.methods import CATALOG_NAMES, RKTableau, catalog, method_from_name
from mork.stepper import PicardConfig, mork_step, rk_step, step_sequence

__all__ = [
    "CATALOG_NAMES",
    "InitialValueProblem",
    "Kind",
    "MethodTableau",
    "PicardConfig",
    "RKTableau",
    "catalog",
    "confluent_linear_ivp",
    "linear_ivp_from_roots",
    "method_from_name",
    "mork_step",
    "reduce_to_first_order",
    "rk_step",
    "step_sequence",
]

__version__ = "0.1.0"
