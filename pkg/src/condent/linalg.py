"""Dense Hermitian linear algebra on numpy arrays.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.
Multipartite operators use the row-major convention: the first subsystem
in ``dims`` is the most significant index.
"""

from __future__ import annotations

from functools import reduce
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DimensionMismatch, NegativeEigenvalue, NotHermitian, ShrinkNotAllowed

EPS_HERM = 1e-9
EPS_PSD = 1e-9
EPS_EIG = 1e-8
EPS_TRACE = 1e-9
EPS_SUPP = 1e-10


class Spectrum(NamedTuple):
    """Eigenvalues in non-increasing order with matching eigenvector columns."""

    values: np.ndarray
    basis: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.basis * self.values) @ self.basis.conj().T


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    return a


def hermiticity_error(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T), initial=0.0))


def hermitize(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2


def check_hermitian(m, tol: float = EPS_HERM) -> np.ndarray:
    a = as_matrix(m)
    err = hermiticity_error(a)
    if err > tol:
        raise NotHermitian(f"max|M - M^H| = {err:.3e} exceeds {tol:.1e}")
    return hermitize(a)


def eig_hermitian(m, tol: float = EPS_HERM) -> Spectrum:
    """Eigendecomposition of a Hermitian matrix, eigenvalues decreasing.

    Raises:
        NotHermitian: if ``max|M - M^H| > tol``.
    """
    h = check_hermitian(m, tol)
    w, v = np.linalg.eigh(h)
    return Spectrum(w[::-1].copy(), v[:, ::-1].copy())


def support_mask(values: np.ndarray, rel: float = EPS_SUPP) -> np.ndarray:
    """Boolean mask of eigenvalues above ``rel`` times the largest one."""
    top = values.max(initial=0.0)
    if top <= 0:
        return np.zeros(values.shape, dtype=bool)
    return values > rel * top


def _psd_spectrum(m, psd_tol: float) -> Spectrum:
    s = eig_hermitian(m)
    low = s.values.min(initial=0.0)
    if low < -psd_tol:
        raise NegativeEigenvalue(f"minimum eigenvalue {low:.3e} below -{psd_tol:.1e}")
    return Spectrum(np.clip(s.values, 0.0, None), s.basis)


def hermitian_function(m, func: str, p: float | None = None, psd_tol: float = EPS_PSD) -> np.ndarray:
    """Apply a scalar function to a PSD Hermitian matrix through its spectrum.

    ``func`` is one of ``"log2"``, ``"power"`` (needs ``p``), ``"pinv_sqrt"``
    or ``"pinv"``.  Logarithms, negative powers and inverses act only on the
    support (eigenvalues above ``EPS_SUPP`` times the largest) and map the
    kernel to zero.  Non-negative powers act on the whole clipped spectrum.
    """
    s = _psd_spectrum(m, psd_tol)
    lam = s.values
    mask = support_mask(lam)
    out = np.zeros_like(lam)
    if func == "log2":
        out[mask] = np.log2(lam[mask])
    elif func == "power":
        if p is None:
            raise ValueError("power requires an exponent p")
        if p >= 0:
            out = lam**p if p > 0 else mask.astype(float)
        else:
            out[mask] = lam[mask] ** p
    elif func == "pinv_sqrt":
        out[mask] = lam[mask] ** -0.5
    elif func == "pinv":
        out[mask] = 1.0 / lam[mask]
    else:
        raise ValueError(f"unknown matrix function {func!r}")
    return (s.basis * out) @ s.basis.conj().T


def mpower(m, p: float) -> np.ndarray:
    return hermitian_function(m, "power", p)


def mlog2(m) -> np.ndarray:
    return hermitian_function(m, "log2")


def pinv_sqrt(m) -> np.ndarray:
    return hermitian_function(m, "pinv_sqrt")


def support_projector(m) -> np.ndarray:
    s = _psd_spectrum(m, EPS_PSD)
    v = s.basis[:, support_mask(s.values)]
    return v @ v.conj().T


def kron(*ms) -> np.ndarray:
    """Kronecker product of any number of matrices (left to right)."""
    if not ms:
        return np.ones((1, 1), dtype=complex)
    return reduce(np.kron, [np.asarray(m, dtype=complex) for m in ms])


def _check_dims(m: np.ndarray, dims: Sequence[int]) -> None:
    if int(np.prod(dims)) != m.shape[0]:
        raise DimensionMismatch(f"dims {tuple(dims)} do not multiply to {m.shape[0]}")


def partial_trace(m, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    Kept subsystems stay in their original order.
    """
    a = as_matrix(m)
    dims = [int(d) for d in dims]
    _check_dims(a, dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionMismatch(f"keep {keep} out of range for {len(dims)} subsystems")
    n = len(dims)
    t = a.reshape(dims + dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    if 2 * n > 26:
        raise DimensionMismatch("too many subsystems")
    row = list(letters[:n])
    col = list(letters[n : 2 * n])
    for i in range(n):
        if i not in keep:
            col[i] = row[i]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    r = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    dk = int(np.prod([dims[i] for i in keep])) if keep else 1
    return r.reshape(dk, dk)


def permute_systems(m, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors: output factor ``j`` is input factor ``perm[j]``."""
    a = as_matrix(m)
    dims = [int(d) for d in dims]
    _check_dims(a, dims)
    n = len(dims)
    perm = list(perm)
    t = a.reshape(dims + dims).transpose(perm + [n + p for p in perm])
    return t.reshape(a.shape)


def embed_direct_sum(m, new_dim: int) -> np.ndarray:
    """Place ``m`` in the top-left corner of a ``new_dim`` square zero matrix."""
    a = as_matrix(m)
    d = a.shape[0]
    if new_dim < d:
        raise ShrinkNotAllowed(f"cannot embed dimension {d} into {new_dim}")
    out = np.zeros((new_dim, new_dim), dtype=complex)
    out[:d, :d] = a
    return out


def canonical_isometry(d_in: int, d_out: int) -> np.ndarray:
    """Column embedding of C^d_in into the first coordinates of C^d_out."""
    if d_out < d_in:
        raise ShrinkNotAllowed(f"no isometry from dimension {d_in} into {d_out}")
    return np.eye(d_out, d_in, dtype=complex)


def max_abs(m) -> float:
    return float(np.max(np.abs(m), initial=0.0))
