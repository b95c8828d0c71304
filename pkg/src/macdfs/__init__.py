"""Product decoherence-free codes for two-sender random unitary channels."""
from .channel import (
    CodeCertificate,
    HermitianUnitary,
    MultiUnitary,
    PhasedProjectors,
    apply_channel,
    dfs_analyze,
    eigenspaces,
    kl_check,
    product_projector,
    schmidt_space_of_projector,
    theorem3_2x2,
    theorem3_q7,
    uniqueness_scan,
)
from .linalg import ContractViolation, NumericalFailure, Tolerance, tolerance
from .oracle import SearchBudget, search_zero_block, verify_certificate
from .rankspace import DecompCertificate, Decision, MatrixSpace, Verdict, decide, decompose
from .schmidt import PureState

__version__ = "0.1.0"
