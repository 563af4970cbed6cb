"""Relative entropies and the conditional entropies built from them.

Every conditional entropy here has the form

    H(A|B)_rho = log2 |A| - D(rho_AB || u_A (x) rho_B)

for a divergence D.  All logarithms are base 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import linalg as la
from .errors import DimensionMismatch, InvalidAlpha, SolverFailure
from .sdp import Part, ProblemBuilder, TraceTerm, _functional_values, hermitian_basis, solve
from .states import BipartiteState, marginal

LEAK_INF = 1e-9
LEAK_WARN = 1e-14


@dataclass(frozen=True)
class DivergenceKind:
    tag: str
    alpha: float | None = None

    def __post_init__(self):
        a = self.alpha
        if self.tag == "petz":
            if a is None or not (0 < a < 1 or 1 < a <= 2):
                raise InvalidAlpha(f"Petz-Renyi needs alpha in (0,1) or (1,2], got {a}")
        elif self.tag == "sandwiched":
            if a is None or not (0.5 <= a < 1 or 1 < a < np.inf):
                raise InvalidAlpha(f"sandwiched Renyi needs alpha in [1/2,1) or (1,inf), got {a}")
        elif self.tag in ("umegaki", "max_relative"):
            if a is not None:
                raise InvalidAlpha(f"{self.tag} takes no alpha")
        else:
            raise ValueError(f"unknown divergence {self.tag!r}")

    def __str__(self) -> str:
        return self.tag if self.alpha is None else f"{self.tag}({self.alpha:g})"


UMEGAKI = DivergenceKind("umegaki")
MAX_RELATIVE = DivergenceKind("max_relative")


def petz(alpha: float) -> DivergenceKind:
    return DivergenceKind("petz", float(alpha))


def sandwiched(alpha: float) -> DivergenceKind:
    return DivergenceKind("sandwiched", float(alpha))


def parse_kind(name: str, alpha: float | None = None) -> DivergenceKind:
    name = {"max": "max_relative", "max-relative": "max_relative"}.get(name, name)
    if name in ("petz", "sandwiched"):
        if alpha is None:
            raise InvalidAlpha(f"{name} needs alpha")
        return DivergenceKind(name, float(alpha))
    return DivergenceKind(name)


STANDARD_KINDS = (UMEGAKI, petz(0.5), petz(2.0), sandwiched(0.5), sandwiched(2.0), MAX_RELATIVE)


@dataclass(frozen=True)
class EntropyValue:
    value: float
    support_warning: bool = False

    def __float__(self) -> float:
        return float(self.value)

    @property
    def is_finite(self) -> bool:
        return bool(np.isfinite(self.value))


def _mat(x) -> np.ndarray:
    return x.matrix if isinstance(x, BipartiteState) else la.as_matrix(x)


def _spec(m: np.ndarray) -> la.Spectrum:
    s = la.eig_hermitian(m)
    return la.Spectrum(np.clip(s.values, 0, None), s.basis)


def _leak(rho: np.ndarray, sig: la.Spectrum) -> float:
    """Weight of rho outside the support of sigma."""
    kernel = sig.basis[:, ~la.support_mask(sig.values)]
    if kernel.shape[1] == 0:
        return 0.0
    return float(np.real(np.trace(kernel.conj().T @ rho @ kernel)))


def _fn(s: la.Spectrum, f) -> np.ndarray:
    """f on the support of s, zero on the kernel (for logs and negative powers)."""
    mask = la.support_mask(s.values)
    out = np.zeros_like(s.values)
    out[mask] = f(s.values[mask])
    return (s.basis * out) @ s.basis.conj().T


def _power(s: la.Spectrum, p: float) -> np.ndarray:
    """s^p; positive powers are continuous at 0 and use the whole spectrum."""
    if p < 0:
        return _fn(s, lambda x: x**p)
    return (s.basis * s.values**p) @ s.basis.conj().T


def von_neumann(rho) -> EntropyValue:
    lam = _spec(_mat(rho)).values
    lam = lam[la.support_mask(lam)]
    return EntropyValue(float(-np.sum(lam * np.log2(lam))) + 0.0)


def relative_entropy(kind: DivergenceKind, rho, sigma) -> EntropyValue:
    """D(rho || sigma) in bits; +inf when the divergence is infinite."""
    r = _mat(rho)
    s = _mat(sigma)
    if r.shape != s.shape:
        raise DimensionMismatch(f"shapes {r.shape} and {s.shape} differ")
    rs = _spec(r)
    ss = _spec(s)
    r = (rs.basis * rs.values) @ rs.basis.conj().T
    leak = _leak(r, ss)
    needs_support = kind.tag in ("umegaki", "max_relative") or (kind.alpha is not None and kind.alpha > 1)
    if needs_support and leak > LEAK_INF:
        return EntropyValue(np.inf)
    warn = needs_support and leak > LEAK_WARN
    if kind.tag == "umegaki":
        lr = _fn(rs, np.log2)
        ls = _fn(ss, np.log2)
        val = float(np.real(np.trace(r @ (lr - ls))))
    elif kind.tag == "max_relative":
        p = _fn(ss, lambda x: x**-0.5)
        val = float(np.log2(np.linalg.eigvalsh(la.hermitize(p @ r @ p))[-1]))
    else:
        a = kind.alpha
        if kind.tag == "petz":
            q = np.real(np.trace(_power(rs, a) @ _power(ss, 1 - a)))
        else:
            # eigenvalues of s^h r s^h are the squared singular values of r^(1/2) s^h
            b = _power(rs, 0.5) @ _power(ss, (1 - a) / (2 * a))
            sv = np.linalg.svd(b, compute_uv=False)
            q = float(np.sum(sv ** (2 * a)))
        if q <= 0:
            return EntropyValue(np.inf)
        val = float(np.log2(q) / (a - 1))
    return EntropyValue(val + 0.0, bool(warn))


def _reference(rho: BipartiteState) -> np.ndarray:
    rb = marginal(rho, "B").matrix
    return np.kron(np.eye(rho.dim_a) / rho.dim_a, rb)


def conditional_entropy(kind: DivergenceKind, rho: BipartiteState) -> EntropyValue:
    d = relative_entropy(kind, rho.matrix, _reference(rho))
    return EntropyValue(float(np.log2(rho.dim_a) - d.value), d.support_warning)


def hmin_given(rho: BipartiteState, sigma_b) -> EntropyValue:
    """-log2 of the least lambda with rho_AB <= lambda I_A (x) sigma_B."""
    s = np.asarray(_mat(sigma_b), complex)
    if s.shape != (rho.dim_b, rho.dim_b):
        raise DimensionMismatch("sigma_B must act on B")
    ref = np.kron(np.eye(rho.dim_a), s)
    d = relative_entropy(MAX_RELATIVE, rho.matrix, ref)
    return EntropyValue(-d.value, d.support_warning)


def hmin(rho: BipartiteState) -> EntropyValue:
    """Conditional min-entropy relative to the B marginal of rho."""
    return hmin_given(rho, marginal(rho, "B").matrix)


def hmin_up_problem(rho: BipartiteState, form: str = "trace"):
    """SDP whose optimum gives the sigma-optimized min-entropy.

    ``"trace"``: minimize Tr X subject to I_A (x) X - S = rho, X, S PSD;
    the entropy is -log2 of the optimum.
    ``"scaled"``: maximize mu subject to I_A (x) sigma - mu rho - S = 0,
    Tr sigma = 1; written as minimize -mu, the entropy is log2 mu*.
    """
    da, db = rho.dims
    pb = ProblemBuilder()

    def tr_a(f):
        return np.einsum("rabac->rbc", f.reshape(-1, da, db, da, db))

    if form == "trace":
        x = pb.psd(db)
        s = pb.psd(da * db)
        pb.add_matrix_equality([TraceTerm(x, pullback=tr_a), TraceTerm(s, scale=-1.0)], rho.matrix)
        pb.set_objective(x, np.eye(db))
    elif form == "scaled":
        sig = pb.psd(db)
        s = pb.psd(da * db)
        mu = pb.nonneg(1)
        basis_vals = _rho_functionals(rho.matrix)
        rows = pb.add_matrix_equality([TraceTerm(sig, pullback=tr_a), TraceTerm(s, scale=-1.0)], np.zeros_like(rho.matrix))
        pb.parts.append(_mu_part(mu, rows, basis_vals))
        pb.add_rows([(sig, np.eye(db).reshape(1, -1))], [1.0])
        pb.set_objective(mu, [-1.0])
    else:
        raise ValueError(f"unknown form {form!r}")
    return pb.build()


def _rho_functionals(m: np.ndarray) -> np.ndarray:
    return _functional_values(hermitian_basis(m.shape[0]), m)


def _mu_part(block: int, rows: np.ndarray, vals: np.ndarray) -> Part:
    return Part(block, rows, sp.csr_matrix(-vals.reshape(-1, 1)))


def hmin_up(rho: BipartiteState, return_state: bool = False):
    """max over sigma_B of H_min(A|B)_{rho|sigma}, by semidefinite programming.

    With ``return_state`` also returns the optimal sigma_B.
    """
    prob = hmin_up_problem(rho, "trace")
    sol = solve(prob)
    if sol.status != "optimal":
        raise SolverFailure(sol.status, sol.message)
    x = la.hermitize(sol.primal[0])
    tr = float(np.real(np.trace(x)))
    val = EntropyValue(float(-np.log2(tr)))
    if return_state:
        return val, x / tr
    return val


def reduction_criterion(rho: BipartiteState) -> tuple[bool, float]:
    """Whether I_A (x) rho_B - rho_AB is PSD, and its least eigenvalue."""
    rb = marginal(rho, "B").matrix
    gap = np.kron(np.eye(rho.dim_a), rb) - rho.matrix
    low = float(np.linalg.eigvalsh(la.hermitize(gap))[0])
    return low >= -la.EPS_PSD, low
