"""Classical simulation of boson sampling on shallow nearest-neighbour interferometers."""

from .cp_permanent import permanent_from_tree, reset_table_stats, table_stats
from .errors import BosonError
from .fock import exact_distribution, outcome_probability
from .linalg import (
    Bandwidths,
    ComplexMatrix,
    bandwidths_of,
    laplace_extend,
    per_naive,
    per_rect,
    per_ryser_glynn,
    subpermanent_family,
    submatrix,
)
from .photonics import CircuitSpec, compose_circuit, haar_unitary, random_shallow_circuit
from .samplers import sample_cc_a, sample_cc_b, sample_cc_c, sample_shallow
from .treedec import TreeDecomposition, linear_banded_decomposition, treewidth, validate

__version__ = "0.1.0"
