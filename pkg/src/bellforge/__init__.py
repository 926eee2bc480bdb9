"""Bell polynomials: exact classical bounds, quantum bounds and table reproduction."""

from .classical import classical_report, enumerate_bound
from .numeric import BellforgeError, CapacityError, ContractError, UnknownNameError
from .polynomial import BellPolynomial, assemble, catalog, map_state_to_polynomial, mermin, symmetric_extension
from .probability import evaluate_expression, probability_catalog
from .quantum import SettingsAssignment, bound_report, expectation, gamma_sweep, optimize_settings, quantum_value
from .reproduce import reproduce
from .states import ame43, ghz, quasi_ghz, reduction_purities

__all__ = [
    "BellPolynomial", "BellforgeError", "CapacityError", "ContractError", "SettingsAssignment", "UnknownNameError",
    "ame43", "assemble", "bound_report", "catalog", "classical_report", "enumerate_bound", "evaluate_expression",
    "expectation", "gamma_sweep", "ghz", "map_state_to_polynomial", "mermin", "optimize_settings",
    "probability_catalog", "quantum_value", "quasi_ghz", "reduction_purities", "reproduce", "symmetric_extension",
]
