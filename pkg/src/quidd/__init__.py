"""QuIDD decision diagrams with exact, global-phase and relative-phase
equivalence checking."""
from .circuits import (
    Circuit, CircuitParseError, build_operator, build_state, parse_circuit,
)
from .dd import EPS, DDError, DDFormatError, Manager, VarId, col, row
from .equiv import (
    Outcome, Side, Verdict, auto_check, elementwise_div_states, exact_equal,
    global_inner_product, global_matrix_product, gprc, mod_dd_compare,
    node_count_filter, non_zero_terminal_merge, rel_mod_inner, rel_mod_matrix,
    rp_div_operators,
)
from .gates import Gate, GateError
from .linalg import (
    OPERATOR, STATE, QuIDD, ShapeError, basis_state, conj_transpose, from_dense,
    identity, inner_product, lift_gate, matmul, modulus_map, scalar_ops,
    transpose,
)

__version__ = "0.1.0"

__all__ = [
    "Circuit", "CircuitParseError", "build_operator", "build_state", "parse_circuit",
    "EPS", "DDError", "DDFormatError", "Manager", "VarId", "col", "row",
    "Outcome", "Side", "Verdict", "auto_check", "elementwise_div_states", "exact_equal",
    "global_inner_product", "global_matrix_product", "gprc", "mod_dd_compare",
    "node_count_filter", "non_zero_terminal_merge", "rel_mod_inner", "rel_mod_matrix",
    "rp_div_operators", "Gate", "GateError", "OPERATOR", "STATE", "QuIDD", "ShapeError",
    "basis_state", "conj_transpose", "from_dense", "identity", "inner_product",
    "lift_gate", "matmul", "modulus_map", "scalar_ops", "transpose",
]
