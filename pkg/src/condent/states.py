"""Density operators with a bipartite A|B split, named states and sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg as la
from .errors import DimensionMismatch, NotDensityMatrix, InvalidParams


@dataclass(frozen=True, eq=False)
class BipartiteState:
    """A validated density operator on A (x) B.  ``dim_b == 1`` means no side system."""

    matrix: np.ndarray
    dim_a: int
    dim_b: int = 1

    @property
    def dim(self) -> int:
        return self.dim_a * self.dim_b

    @property
    def dims(self) -> tuple[int, int]:
        return (self.dim_a, self.dim_b)

    def __repr__(self) -> str:
        return f"BipartiteState(dims={self.dims})"


def _validate(m: np.ndarray, dim_a: int, dim_b: int) -> np.ndarray:
    if dim_a < 1 or dim_b < 1 or m.ndim != 2 or m.shape != (dim_a * dim_b, dim_a * dim_b):
        raise NotDensityMatrix("dims", 0.0, f"matrix of shape {m.shape} does not fit dims ({dim_a}, {dim_b})")
    err = la.hermiticity_error(m)
    if err > la.EPS_HERM:
        raise NotDensityMatrix("hermitian", err)
    h = la.hermitize(m)
    tr = float(np.real(np.trace(h)))
    if abs(tr - 1) > la.EPS_TRACE:
        raise NotDensityMatrix("trace", abs(tr - 1), f"trace {tr!r} differs from 1")
    w, v = np.linalg.eigh(h)
    if w[0] < -la.EPS_PSD:
        raise NotDensityMatrix("psd", -w[0], f"minimum eigenvalue {w[0]:.3e}")
    if w[0] < 0:
        w = np.clip(w, 0, None)
        h = (v * w) @ v.conj().T
        tr = float(w.sum())
    return h / tr


def make_state(matrix, dim_a: int, dim_b: int = 1) -> BipartiteState:
    """Validate a density matrix.

    Violations within tolerance are repaired (negative eigenvalues clipped,
    trace renormalized); anything larger raises ``NotDensityMatrix``.
    """
    m = np.asarray(matrix, dtype=complex)
    return BipartiteState(_validate(m, int(dim_a), int(dim_b)), int(dim_a), int(dim_b))


def _trusted(matrix, dim_a: int, dim_b: int = 1) -> BipartiteState:
    return BipartiteState(np.asarray(matrix, dtype=complex), dim_a, dim_b)


def uniform(d: int) -> BipartiteState:
    if d < 1:
        raise InvalidParams("dimension must be positive")
    return _trusted(np.eye(d) / d, d, 1)


def maximally_entangled(k: int) -> BipartiteState:
    if k < 1:
        raise InvalidParams("k must be positive")
    v = np.zeros(k * k)
    v[:: k + 1] = 1 / np.sqrt(k)
    return _trusted(np.outer(v, v), k, k)


def pure_state(vec, dim_a: int, dim_b: int = 1) -> BipartiteState:
    v = np.asarray(vec, complex).reshape(-1)
    v = v / np.linalg.norm(v)
    return make_state(np.outer(v, v.conj()), dim_a, dim_b)


def product(omega: BipartiteState, tau: BipartiteState) -> BipartiteState:
    """omega_A (x) tau_B from two unconditional states."""
    return _trusted(np.kron(omega.matrix, tau.matrix), omega.dim, tau.dim)


def marginal(rho: BipartiteState, system: str) -> BipartiteState:
    """Reduced state on ``"A"`` or ``"B"``, returned as an unconditional state."""
    if system not in ("A", "B"):
        raise ValueError("system must be 'A' or 'B'")
    keep = [0] if system == "A" else [1]
    m = la.partial_trace(rho.matrix, rho.dims, keep)
    return _trusted(la.hermitize(m), m.shape[0], 1)


def tensor_states(rho: BipartiteState, sigma: BipartiteState) -> BipartiteState:
    """rho_AB (x) sigma_A'B' regrouped as (A A') | (B B')."""
    m = np.kron(rho.matrix, sigma.matrix)
    dims = [rho.dim_a, rho.dim_b, sigma.dim_a, sigma.dim_b]
    m = la.permute_systems(m, dims, [0, 2, 1, 3])
    return _trusted(m, rho.dim_a * sigma.dim_a, rho.dim_b * sigma.dim_b)


def embed_state(rho: BipartiteState, dim_a: int, dim_b: int) -> BipartiteState:
    """Apply the standard isometric embeddings A -> C^dim_a and B -> C^dim_b."""
    va = la.canonical_isometry(rho.dim_a, dim_a)
    vb = la.canonical_isometry(rho.dim_b, dim_b)
    v = np.kron(va, vb)
    return make_state(v @ rho.matrix @ v.conj().T, dim_a, dim_b)


def unitary_on(rho: BipartiteState, ua=None, ub=None) -> BipartiteState:
    ua = np.eye(rho.dim_a) if ua is None else ua
    ub = np.eye(rho.dim_b) if ub is None else ub
    u = np.kron(ua, ub)
    return make_state(u @ rho.matrix @ u.conj().T, rho.dim_a, rho.dim_b)


# ------------------------------------------------------------ classical


@dataclass(frozen=True, eq=False)
class ClassicalJoint:
    """Joint distribution p(x, y): rows index X, columns Y."""

    matrix: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.matrix, dtype=float)
        if p.ndim != 2 or p.size == 0:
            raise InvalidParams("a joint distribution must be a non-empty 2-D array")
        if p.min() < -la.EPS_PSD:
            raise InvalidParams(f"negative probability {p.min():.3e}")
        p = np.clip(p, 0, None)
        total = p.sum()
        if abs(total - 1) > la.EPS_TRACE:
            raise InvalidParams(f"probabilities sum to {total!r}")
        object.__setattr__(self, "matrix", p / total)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def pad_rows(self, m: int) -> "ClassicalJoint":
        if m < self.shape[0]:
            raise InvalidParams("cannot pad to fewer rows")
        out = np.zeros((m, self.shape[1]))
        out[: self.shape[0]] = self.matrix
        return ClassicalJoint(out)


def classical_embed(p: ClassicalJoint) -> BipartiteState:
    m, n = p.shape
    return _trusted(np.diag(p.matrix.reshape(-1)).astype(complex), m, n)


def classical_correlated(d: int) -> BipartiteState:
    """(1/d) sum_i |ii><ii|, the perfectly correlated classical state."""
    return classical_embed(ClassicalJoint(np.eye(d) / d))


# ------------------------------------------------------------ sampling
#
# Streams: every sampler draws from Philox keyed by (seed, stream id), so
# separate kinds never share random numbers for the same seed.

_STREAMS = {"ginibre": 1, "separable": 2, "pure": 3, "joint": 4, "unitary": 5, "channel": 6, "misc": 7}
_MASK = (1 << 64) - 1


class Sampler:
    """Portable sampler: Philox-4x64 uniforms, Box-Muller Gaussians."""

    def __init__(self, seed: int, stream: str | int = "misc"):
        sid = _STREAMS[stream] if isinstance(stream, str) else int(stream)
        self._gen = np.random.Generator(np.random.Philox(key=np.array([int(seed) & _MASK, sid], dtype=np.uint64)))

    def uniform(self, size) -> np.ndarray:
        return self._gen.random(size)

    def normal(self, size) -> np.ndarray:
        n = int(np.prod(size))
        half = (n + 1) // 2
        u1 = 1.0 - self._gen.random(half)  # in (0, 1]
        u2 = self._gen.random(half)
        r = np.sqrt(-2.0 * np.log(u1))
        z = np.concatenate([r * np.cos(2 * np.pi * u2), r * np.sin(2 * np.pi * u2)])[:n]
        return z.reshape(size)

    def complex_normal(self, size) -> np.ndarray:
        return (self.normal(size) + 1j * self.normal(size)) / np.sqrt(2)

    def dirichlet(self, k: int) -> np.ndarray:
        e = -np.log(1.0 - self._gen.random(k))
        return e / e.sum()

    def integers(self, high: int, size=None):
        return self._gen.integers(0, high, size)

    def ginibre(self, d: int, rank: int | None = None) -> np.ndarray:
        g = self.complex_normal((d, rank or d))
        m = g @ g.conj().T
        return m / np.real(np.trace(m))

    def pure(self, d: int) -> np.ndarray:
        v = self.complex_normal(d)
        v /= np.linalg.norm(v)
        return np.outer(v, v.conj())

    def unitary(self, d: int) -> np.ndarray:
        q, r = np.linalg.qr(self.complex_normal((d, d)))
        ph = np.diag(r) / np.abs(np.diag(r))
        return q * ph

    def isometry(self, d_in: int, d_out: int) -> np.ndarray:
        return self.unitary(d_out)[:, :d_in]


def sample_random(dims: tuple[int, int], kind: str = "ginibre", seed: int = 0, num_terms: int = 4) -> BipartiteState:
    """Random state on dims (dA, dB); a pure function of its arguments.

    kinds: ``"ginibre"`` (G G^H normalized), ``"separable"`` (Dirichlet mixture
    of ``num_terms`` Ginibre product states) and ``"pure"`` (Haar vector).
    """
    da, db = int(dims[0]), int(dims[1])
    if da < 1 or db < 1:
        raise InvalidParams("dims must be positive")
    if kind not in ("ginibre", "separable", "pure"):
        raise InvalidParams(f"unknown kind {kind!r}")
    s = Sampler(seed, kind)
    if kind == "ginibre":
        m = s.ginibre(da * db)
    elif kind == "pure":
        m = s.pure(da * db)
    else:
        if num_terms < 1:
            raise InvalidParams("num_terms must be at least 1")
        p = s.dirichlet(num_terms)
        m = sum(p[x] * np.kron(s.ginibre(da), s.ginibre(db)) for x in range(num_terms))
    return make_state(m, da, db)


def sample_joint(shape: tuple[int, int], seed: int = 0) -> ClassicalJoint:
    s = Sampler(seed, "joint")
    p = s.dirichlet(shape[0] * shape[1]).reshape(shape)
    return ClassicalJoint(p)


def check_dims(rho: BipartiteState, sigma: BipartiteState) -> None:
    if rho.dims != sigma.dims:
        raise DimensionMismatch(f"dims {rho.dims} and {sigma.dims} differ")
