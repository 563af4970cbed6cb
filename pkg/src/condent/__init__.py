"""Conditional entropies, their minimal element and conditional majorization."""

from .channels import (
    ChannelPropertyReport,
    ChoiChannel,
    apply,
    check_properties,
    choi_from_kraus,
    compose,
    from_choi,
    make_proof_channel,
    make_standard,
)
from .entropy import (
    MAX_RELATIVE,
    STANDARD_KINDS,
    UMEGAKI,
    DivergenceKind,
    EntropyValue,
    conditional_entropy,
    hmin,
    hmin_given,
    hmin_up,
    petz,
    reduction_criterion,
    relative_entropy,
    sandwiched,
    von_neumann,
)
from .errors import CondentError
from .majorize import (
    MajorizationVerdict,
    classical_cond_majorizes,
    cond_majorizes,
    majorizes,
    majorizes_via_sdp,
)
from .sdp import ConicProblem, ConicSolution, ProblemBuilder, check_feasible, solve
from .states import (
    BipartiteState,
    ClassicalJoint,
    classical_correlated,
    classical_embed,
    make_state,
    marginal,
    maximally_entangled,
    sample_joint,
    sample_random,
    uniform,
)

__version__ = "0.1.0"
