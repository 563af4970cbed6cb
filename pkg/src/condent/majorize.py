"""Decision procedures for majorization and conditional majorization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import linalg as la
from .channels import ChoiChannel
from .errors import DimensionMismatch, InvalidParams, RankObstruction
from .sdp import EPS_FEAS, ProblemBuilder, TraceTerm, check_feasible
from .states import BipartiteState, ClassicalJoint, make_state, marginal

EPS_MAJ = 1e-9

__all__ = [
    "ClassicalJoint",
    "MajorizationVerdict",
    "majorizes",
    "majorizes_via_sdp",
    "cond_majorizes",
    "classical_cond_majorizes",
]


@dataclass(frozen=True)
class MajorizationVerdict:
    holds: bool
    margin: float
    witness: object = None

    def __bool__(self) -> bool:
        return self.holds


def _unconditional(rho: BipartiteState) -> None:
    if rho.dim_b != 1:
        raise DimensionMismatch("expected an unconditional state (dim_b = 1)")


def majorizes(rho: BipartiteState, sigma: BipartiteState, tol: float = EPS_MAJ) -> MajorizationVerdict:
    """Partial sums of decreasing eigenvalues, after zero-padding to a common length."""
    _unconditional(rho)
    _unconditional(sigma)
    d = max(rho.dim, sigma.dim)
    lr = np.zeros(d)
    ls = np.zeros(d)
    lr[: rho.dim] = la.eig_hermitian(rho.matrix).values
    ls[: sigma.dim] = la.eig_hermitian(sigma.matrix).values
    gaps = np.cumsum(lr) - np.cumsum(ls)
    margin = float(gaps.min())
    return MajorizationVerdict(margin >= -tol, margin)


def _witness(xs, dims) -> ChoiChannel:
    return ChoiChannel(la.hermitize(xs[0]), dims)


def majorizes_via_sdp(rho: BipartiteState, sigma: BipartiteState, tol: float = EPS_FEAS) -> MajorizationVerdict:
    """Search for a unital channel N with N(rho) = sigma (common dimension after padding)."""
    _unconditional(rho)
    _unconditional(sigma)
    d = max(rho.dim, sigma.dim)
    r = la.embed_direct_sum(rho.matrix, d)
    s = la.embed_direct_sum(sigma.matrix, d)
    pb = ProblemBuilder()
    j = pb.psd(d * d, (d, d))
    eye = np.eye(d)
    pb.add_matrix_equality([TraceTerm(j, traced=(1,))], eye)
    pb.add_matrix_equality([TraceTerm(j, traced=(0,))], eye)
    pb.add_matrix_equality([TraceTerm(j, traced=(0,), weight=r.T)], s)
    res = check_feasible(pb.build(), tol)
    wit = _witness(res.witness, (d, 1, d, 1)) if res.feasible else None
    return MajorizationVerdict(res.feasible, -res.slack, wit)


def align_target(rho: BipartiteState, sigma: BipartiteState) -> np.ndarray:
    """Bring sigma_{A'B'} onto A (x) B' using the standard embedding.

    |A'| < |A|: zero-pad A'.  |A'| > |A|: rotate supp(sigma_A') onto the
    first |A| coordinates and truncate.  Both are without loss of generality:
    post-composing a locally balanced (or conditionally unital) channel with
    a unitary on its A output keeps it in the class, and local unitaries on
    A' preserve the pre-order.
    """
    da, (ta, tb) = rho.dim_a, sigma.dims
    if ta == da:
        return sigma.matrix
    if ta < da:
        v = np.kron(la.canonical_isometry(ta, da), np.eye(tb))
        return v @ sigma.matrix @ v.conj().T
    sa = la.eig_hermitian(marginal(sigma, "A").matrix)
    rank = int(la.support_mask(sa.values).sum())
    if rank > da:
        raise RankObstruction(f"sigma_A' has rank {rank} > |A| = {da}; no isometry from A can produce it")
    u = np.kron(sa.basis.conj().T, np.eye(tb))
    rot = (u @ sigma.matrix @ u.conj().T).reshape(ta, tb, ta, tb)
    return rot[:da, :, :da, :].reshape(da * tb, da * tb)


def cond_majorization_problem(rho: BipartiteState, target: np.ndarray, b_out: int, mode: str = "locally_balanced"):
    """Feasibility problem for a channel AB -> A B' in the chosen class mapping rho to target."""
    if mode not in ("locally_balanced", "conditionally_unital"):
        raise InvalidParams(f"unknown mode {mode!r}")
    da, db = rho.dims
    at, bp = da, b_out
    pb = ProblemBuilder()
    j = pb.psd(da * db * at * bp, (da, db, at, bp))

    def tr_middle(f):
        # functionals on (B, A~, B') -> (B, B'), divided by |A~|
        t = f.reshape(-1, db, at, bp, db, at, bp)
        return np.einsum("rxtyutv->rxyuv", t).reshape(-1, db * bp, db * bp) / at

    def tr_first(f):
        # functionals on (A, B, B') -> (B, B'), divided by |A|
        t = f.reshape(-1, da, db * bp, da, db * bp)
        return np.einsum("raxay->rxy", t) / da

    pb.add_matrix_equality([TraceTerm(j, traced=(2, 3))], np.eye(da * db))
    pb.add_matrix_equality(
        [TraceTerm(j, traced=(0,)), TraceTerm(j, traced=(0, 2), pullback=tr_middle, scale=-1.0)],
        np.zeros((db * at * bp,) * 2),
    )
    if mode == "locally_balanced":
        pb.add_matrix_equality(
            [TraceTerm(j, traced=(2,)), TraceTerm(j, traced=(0, 2), pullback=tr_first, scale=-1.0)],
            np.zeros((da * db * bp,) * 2),
        )
    pb.add_matrix_equality([TraceTerm(j, traced=(0, 1), weight=rho.matrix.T)], target)
    return pb.build()


def cond_majorizes(rho: BipartiteState, sigma: BipartiteState, mode: str = "locally_balanced",
                   tol: float = EPS_FEAS) -> MajorizationVerdict:
    """Whether rho_AB conditionally majorizes sigma_A'B' with respect to A.

    ``mode="locally_balanced"`` searches locally balanced channels;
    ``"conditionally_unital"`` drops semi-causality (a weaker pre-order).
    """
    target = align_target(rho, sigma)
    prob = cond_majorization_problem(rho, target, sigma.dim_b, mode)
    res = check_feasible(prob, tol)
    wit = _witness(res.witness, (rho.dim_a, rho.dim_b, rho.dim_a, sigma.dim_b)) if res.feasible else None
    return MajorizationVerdict(res.feasible, -res.slack, wit)


@dataclass(frozen=True)
class ClassicalWitness:
    t: np.ndarray  # t[y, w]
    d: np.ndarray  # d[y, w] is an m x m doubly stochastic matrix (zero where t = 0)


def classical_cond_majorization_problem(p: ClassicalJoint, q: ClassicalJoint):
    m = max(p.shape[0], q.shape[0])
    pm = p.pad_rows(m).matrix
    qm = q.pad_rows(m).matrix
    n, l = pm.shape[1], qm.shape[1]
    nm = n * l * m * m
    pb = ProblemBuilder()
    x = pb.nonneg(nm + n * l)

    def mi(y, w, a, b):
        return ((y * l + w) * m + a) * m + b

    def ti(y, w):
        return nm + y * l + w

    rows, cols, vals = [], [], []
    r = 0
    for y in range(n):
        for w in range(l):
            for a in range(m):
                for b in range(m):
                    rows.append(r), cols.append(mi(y, w, a, b)), vals.append(1.0)
                rows.append(r), cols.append(ti(y, w)), vals.append(-1.0)
                r += 1
                for b in range(m):
                    rows.append(r), cols.append(mi(y, w, b, a)), vals.append(1.0)
                rows.append(r), cols.append(ti(y, w)), vals.append(-1.0)
                r += 1
    sums = sp.csr_matrix((vals, (rows, cols)), shape=(r, nm + n * l))
    pb.add_rows([(x, sums)], np.zeros(r))
    rows, cols, vals = [], [], []
    for y in range(n):
        for w in range(l):
            rows.append(y), cols.append(ti(y, w)), vals.append(1.0)
    pb.add_rows([(x, sp.csr_matrix((vals, (rows, cols)), shape=(n, nm + n * l)))], np.ones(n))
    rows, cols, vals = [], [], []
    rhs = []
    r = 0
    for w in range(l):
        for a in range(m):
            for y in range(n):
                for b in range(m):
                    if pm[b, y] != 0:
                        rows.append(r), cols.append(mi(y, w, a, b)), vals.append(pm[b, y])
            rhs.append(qm[a, w])
            r += 1
    pb.add_rows([(x, sp.csr_matrix((vals, (rows, cols)), shape=(r, nm + n * l)))], rhs)
    return pb.build(), (n, l, m)


def classical_cond_majorizes(p: ClassicalJoint, q: ClassicalJoint, tol: float = EPS_FEAS) -> MajorizationVerdict:
    """LP test for q_w = sum_y t_yw D_(y,w) p_y with T row-stochastic and D doubly stochastic.

    Variables are M^(y,w) = t_yw D_(y,w) >= 0 whose row and column sums all
    equal t_yw.  X dimensions are equalized by zero-row padding.
    """
    prob, (n, l, m) = classical_cond_majorization_problem(p, q)
    res = check_feasible(prob, tol)
    wit = None
    if res.feasible:
        v = np.asarray(res.witness[0])
        nm = n * l * m * m
        t = v[nm:].reshape(n, l)
        mm = v[:nm].reshape(n, l, m, m)
        d = np.where(t[..., None, None] > 1e-12, mm / np.maximum(t[..., None, None], 1e-300), 0.0)
        wit = ClassicalWitness(t, d)
    return MajorizationVerdict(res.feasible, -res.slack, wit)


def joint_from_witness(p: ClassicalJoint, t: np.ndarray, d: np.ndarray) -> ClassicalJoint:
    """q_w = sum_y t_yw D_(y,w) p_y for explicit witnesses (p zero-padded to D's size).

    Solver witnesses are accurate only to the feasibility tolerance, so the
    result is clipped at zero and renormalized.
    """
    m = d.shape[-1]
    pm = p.pad_rows(m).matrix
    q = np.clip(np.einsum("yw,ywab,by->aw", t, d, pm), 0, None)
    return ClassicalJoint(q / q.sum())
