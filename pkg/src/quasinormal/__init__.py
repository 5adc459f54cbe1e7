"""Verification of quasinormality and related operator identities.

Operators act exactly on finitely supported vectors (:class:`SparseVec`);
predicates return a :class:`Verdict` (Holds, Fails with a replayable
witness, or Inconclusive) and suites collect them into a :class:`Report`.
"""
from .hilbert import (
    DEFAULT_TOL,
    Block,
    Nat,
    SparseVec,
    TolerancePolicy,
    TreeVertex,
    approx_eq,
    inner,
    norm,
)
from .kernels import BACKEND
from .operators import (
    DirectSumOp,
    FiniteMatrixOp,
    LocalOperator,
    adjoint,
    compose,
    direct_sum,
    identity,
    matrix_of,
    power,
    scale,
    shift_isometry,
)
from .results import Fails, Holds, Inconclusive, ProbeConfig, Report, Status, Verdict
from .spectral import herm_eig, modulus, polar, spectral_projectors
from .trees import T2Kappa, TreeShiftOp, branch_weight_sum, norm_power_on_basis, t2kappa, tree_shift
from .verdicts import (
    commutation_agreement,
    embry_suite,
    hyponormal_falsify,
    moment_solvability_test,
    normality_test,
    paranormal_falsify,
    power_identity_test,
    quasinormal_test,
)

__version__ = "0.1.0"
