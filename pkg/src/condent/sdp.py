"""Block semidefinite / linear programs in standard conic form.

Primal:  minimize <C, X>  subject to  A(X) = b,  X in K
Dual:    maximize b.y     subject to  C - A*(y) = Z,  Z in K

K is a product of Hermitian PSD cones and nonnegative orthants.  The inner
product is <F, X> = Re Tr(F^H X), so every equality is a real linear
functional of the Hermitian blocks.

Equalities are stored as *parts*.  A part on a PSD block with subsystem dims
``d`` contributes to a set of rows the functionals ``G (x) F_i`` where ``G``
acts on the traced subsystems and ``F_i`` on the kept ones.  Partial-trace
constraints (G = identity) and Choi output constraints (G = rho^T) both have
this shape, which lets the Schur complement be assembled from small kernels
instead of explicit n^2-dimensional rows.

The solver is an infeasible-start primal-dual interior-point method with
Nesterov-Todd scaling and a Mehrotra predictor-corrector.
"""

from __future__ import annotations

import itertools
import string
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import DimensionMismatch, SolverFailure

EPS_SDP = 1e-8
EPS_FEAS = 1e-6
MAX_ITER = 200

_LETTERS = string.ascii_letters
_KERNEL_LIMIT = 4_000_000


@dataclass(frozen=True)
class Block:
    kind: str  # "psd" or "nonneg"
    size: int
    dims: tuple[int, ...] = ()
    real: bool = False  # psd block restricted to real symmetric matrices

    @property
    def dtype(self):
        return float if self.real or self.kind == "nonneg" else complex

    def __post_init__(self):
        if self.kind not in ("psd", "nonneg"):
            raise ValueError(f"unknown block kind {self.kind!r}")
        if self.size < 1:
            raise ValueError("block size must be positive")
        dims = self.dims or (self.size,)
        if int(np.prod(dims)) != self.size:
            raise DimensionMismatch(f"block dims {dims} do not multiply to {self.size}")
        object.__setattr__(self, "dims", tuple(int(d) for d in dims))


@dataclass(frozen=True)
class Part:
    """Contribution of one block to a set of equality rows.

    ``coeffs`` has one row per entry of ``rows``.  For a PSD block each row
    is a row-major vectorized Hermitian matrix on the kept subsystems; for a
    nonneg block it is a plain coefficient vector.
    """

    block: int
    rows: np.ndarray
    coeffs: sp.csr_matrix
    traced: tuple[int, ...] = ()
    weight: np.ndarray | None = None


@dataclass(frozen=True)
class ConicProblem:
    blocks: tuple[Block, ...]
    parts: tuple[Part, ...]
    rhs: np.ndarray
    objective: tuple | None = None

    @property
    def num_rows(self) -> int:
        return int(self.rhs.shape[0])

    def objective_blocks(self) -> list[np.ndarray]:
        out = []
        for i, bl in enumerate(self.blocks):
            c = None if self.objective is None else self.objective[i]
            if c is None:
                c = np.zeros((bl.size, bl.size), bl.dtype) if bl.kind == "psd" else np.zeros(bl.size)
            out.append(c)
        return out

    def evaluate(self, xs: Sequence[np.ndarray]) -> np.ndarray:
        """The vector A(X) for block values ``xs``."""
        return _Operator(self).apply(list(xs))


@dataclass
class ConicSolution:
    status: str  # "optimal", "infeasible" or "indeterminate"
    primal: list
    dual: np.ndarray
    dual_slack: list
    objective_value: float
    residuals: tuple[float, float, float]
    iterations: int = 0
    message: str = ""


# ---------------------------------------------------------------- helpers


def real_embedding(m) -> np.ndarray:
    """[[Re M, -Im M], [Im M, Re M]]; PSD exactly when M is."""
    m = np.asarray(m, dtype=complex)
    return np.block([[m.real, -m.imag], [m.imag, m.real]])


def _herm(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2


def _hermitize_rows(s: sp.csr_matrix, d: int) -> sp.csr_matrix:
    """Replace every vectorized row F by (F + F^H)/2."""
    k = np.arange(d * d)
    perm = (k % d) * d + k // d
    s = sp.csr_matrix(s, dtype=complex)
    out = (s + s[:, perm].conj()) * 0.5
    out.eliminate_zeros()
    return out.tocsr()


def hermitian_basis(d: int) -> sp.csr_matrix:
    """d^2 real functionals reading out diag, Re and Im of a d x d Hermitian matrix."""
    rows, cols, vals = [], [], []
    r = 0
    for p in range(d):
        rows.append(r)
        cols.append(p * d + p)
        vals.append(1.0)
        r += 1
    for p in range(d):
        for q in range(p + 1, d):
            rows += [r, r]
            cols += [p * d + q, q * d + p]
            vals += [0.5, 0.5]
            r += 1
            rows += [r, r]
            cols += [p * d + q, q * d + p]
            vals += [0.5j, -0.5j]
            r += 1
    return sp.csr_matrix((np.array(vals, complex), (rows, cols)), shape=(d * d, d * d))


def _functional_values(f: sp.csr_matrix, m: np.ndarray) -> np.ndarray:
    return np.real(f.conj() @ np.asarray(m, complex).reshape(-1))


# ---------------------------------------------------------------- building


@dataclass
class TraceTerm:
    """One summand of a matrix equality on block ``block``.

    The summand is ``Tr_traced[(weight^H (x) I) X]`` mapped onto the equality
    space by a linear map whose adjoint is ``pullback``.  ``pullback`` takes
    an array of functionals of shape (r, d, d) on the equality space and
    returns their images of shape (r, k, k) on the kept space.  ``None`` means
    the kept space is the equality space itself.
    """

    block: int
    traced: tuple[int, ...] = ()
    weight: np.ndarray | None = None
    pullback: Callable[[np.ndarray], np.ndarray] | None = None
    scale: float = 1.0


class ProblemBuilder:
    def __init__(self):
        self.blocks: list[Block] = []
        self.parts: list[Part] = []
        self.rhs: list[np.ndarray] = []
        self.objective: dict[int, np.ndarray] = {}
        self._m = 0

    def psd(self, n: int, dims: Sequence[int] | None = None) -> int:
        self.blocks.append(Block("psd", int(n), tuple(dims or ())))
        return len(self.blocks) - 1

    def nonneg(self, n: int) -> int:
        self.blocks.append(Block("nonneg", int(n)))
        return len(self.blocks) - 1

    def set_objective(self, block: int, c) -> None:
        bl = self.blocks[block]
        c = np.asarray(c, complex if bl.kind == "psd" else float)
        if bl.kind == "psd":
            c = _herm(c.reshape(bl.size, bl.size))
        self.objective[block] = c

    def _new_rows(self, r: int, rhs) -> np.ndarray:
        rows = np.arange(self._m, self._m + r)
        self._m += r
        self.rhs.append(np.asarray(rhs, float).reshape(r))
        return rows

    def add_rows(self, terms: Sequence[tuple[int, object]], rhs) -> np.ndarray:
        """Add r generic equalities.

        Each term is ``(block, coeffs)`` where ``coeffs`` is r x n for a nonneg
        block or r x n^2 (vectorized matrices) for a PSD block.
        """
        rhs = np.atleast_1d(np.asarray(rhs, float))
        rows = self._new_rows(rhs.shape[0], rhs)
        for block, coeffs in terms:
            bl = self.blocks[block]
            s = sp.csr_matrix(coeffs, dtype=complex)
            if s.shape[0] != rows.shape[0]:
                raise DimensionMismatch("coefficient rows do not match rhs length")
            if bl.kind == "psd":
                if s.shape[1] != bl.size**2:
                    raise DimensionMismatch("psd coefficients must be vectorized n x n matrices")
                s = _hermitize_rows(s, bl.size)
            else:
                if s.shape[1] != bl.size:
                    raise DimensionMismatch("nonneg coefficients must have block length")
                s = sp.csr_matrix(s.real)
            self.parts.append(Part(block, rows, s))
        return rows

    def add_matrix_equality(self, terms: Sequence[TraceTerm], rhs) -> np.ndarray:
        """Add the Hermitian matrix equality sum(terms) = rhs, one row per real degree of freedom."""
        rhs = np.asarray(rhs, complex)
        d = rhs.shape[0]
        basis = hermitian_basis(d)
        rows = self._new_rows(d * d, _functional_values(basis, rhs))
        dense_basis = None
        for term in terms:
            bl = self.blocks[term.block]
            if bl.kind != "psd":
                raise ValueError("matrix equalities act on psd blocks")
            traced = tuple(sorted(term.traced))
            kept = [bl.dims[i] for i in range(len(bl.dims)) if i not in traced]
            dk = int(np.prod(kept)) if kept else 1
            if term.pullback is None:
                if dk != d:
                    raise DimensionMismatch(f"kept space has dimension {dk}, equality has {d}")
                f = basis * term.scale
            else:
                if dense_basis is None:
                    dense_basis = basis.toarray().reshape(d * d, d, d)
                img = np.asarray(term.pullback(dense_basis), complex)
                if img.shape != (d * d, dk, dk):
                    raise DimensionMismatch(f"pullback returned shape {img.shape}")
                f = sp.csr_matrix(img.reshape(d * d, dk * dk) * term.scale)
                f = _hermitize_rows(f, dk)
            g = None
            if term.weight is not None:
                g = np.asarray(term.weight, complex)
                dt = int(np.prod([bl.dims[i] for i in traced])) if traced else 1
                if g.shape != (dt, dt):
                    raise DimensionMismatch("weight must act on the traced subsystems")
                if np.max(np.abs(g - g.conj().T), initial=0) > 1e-12:
                    raise ValueError("weight must be Hermitian")
            self.parts.append(Part(term.block, rows, f, traced, g))
        return rows

    def build(self) -> ConicProblem:
        obj = None
        if self.objective:
            obj = tuple(self.objective.get(i) for i in range(len(self.blocks)))
        rhs = np.concatenate(self.rhs) if self.rhs else np.zeros(0)
        return ConicProblem(tuple(self.blocks), tuple(self.parts), rhs, obj)


# ---------------------------------------------------------------- operator


class _RowGather:
    """Sparse rows with at most two entries, applied by fancy indexing."""

    def __init__(self, i1, c1, i2, c2):
        self.i1, self.c1, self.i2, self.c2 = i1, c1, i2, c2

    @classmethod
    def from_csr(cls, f: sp.csr_matrix):
        counts = np.diff(f.indptr)
        if len(counts) == 0 or counts.max() > 2:
            return None
        r = f.shape[0]
        i1 = np.zeros(r, int)
        i2 = np.zeros(r, int)
        c1 = np.zeros(r, f.dtype)
        c2 = np.zeros(r, f.dtype)
        start = f.indptr[:-1]
        has1 = counts >= 1
        has2 = counts == 2
        i1[has1] = f.indices[start[has1]]
        c1[has1] = f.data[start[has1]]
        i2[has2] = f.indices[start[has2] + 1]
        c2[has2] = f.data[start[has2] + 1]
        return cls(i1, c1, i2, c2)

    def right_t(self, k: np.ndarray) -> np.ndarray:
        """k @ F^T."""
        return k[:, self.i1] * self.c1 + k[:, self.i2] * self.c2

    def left_conj(self, t: np.ndarray) -> np.ndarray:
        """conj(F) @ t."""
        return self.c1.conj()[:, None] * t[self.i1] + self.c2.conj()[:, None] * t[self.i2]


def _accumulate(out: np.ndarray, pf, pg, blk: np.ndarray) -> None:
    if isinstance(pf.index, slice) and isinstance(pg.index, slice):
        out[pf.index, pg.index] += blk
    else:
        out[np.ix_(pf.rows, pg.rows)] += blk


def _sandwich(pf, k: np.ndarray, pg) -> np.ndarray:
    """conj(F_f) K F_g^T."""
    t = pg.gather.right_t(k) if pg.gather is not None else (pg.f @ k.T).T
    return pf.gather.left_conj(t) if pf.gather is not None else pf.fc @ t


class _PsdPart:
    def __init__(self, part: Part, dims: tuple[int, ...]):
        self.rows = np.asarray(part.rows)
        r = self.rows
        contiguous = len(r) > 0 and np.array_equal(r, np.arange(r[0], r[0] + len(r)))
        self.index = slice(int(r[0]), int(r[0]) + len(r)) if contiguous else r
        self.f = sp.csr_matrix(part.coeffs, dtype=complex, copy=True)
        if np.all(self.f.data.imag == 0):
            self.f = sp.csr_matrix((self.f.data.real.copy(), self.f.indices, self.f.indptr), shape=self.f.shape)
        self.gather = _RowGather.from_csr(self.f)
        self.fc = self.f.conj().tocsr()
        self.ft = self.f.T.tocsr()
        self.traced = tuple(part.traced)
        self.dims = dims
        k = len(dims)
        self.kept = tuple(i for i in range(k) if i not in self.traced)
        self.dk = int(np.prod([dims[i] for i in self.kept])) if self.kept else 1
        self.dt = int(np.prod([dims[i] for i in self.traced])) if self.traced else 1
        self.g = None if part.weight is None else np.asarray(part.weight, complex)
        if self.g is not None and np.all(self.g.imag == 0):
            self.g = self.g.real
        tshape = [dims[i] for i in self.traced]
        kshape = [dims[i] for i in self.kept]
        self.gt = None if self.g is None else self.g.reshape(tshape + tshape)
        # forward: out[s,t] = sum conj(G[y,x]) X[(y,s),(x,t)]
        row = [_LETTERS[i] for i in range(k)]
        col = [_LETTERS[k + i] for i in range(k)]
        if self.g is None:
            for i in self.traced:
                col[i] = row[i]
        out = "".join(row[i] for i in self.kept) + "".join(col[i] for i in self.kept)
        xs = "".join(row) + "".join(col)
        if self.g is None:
            self._fwd = f"{xs}->{out}"
        else:
            gs = "".join(row[i] for i in self.traced) + "".join(col[i] for i in self.traced)
            self._fwd = f"{gs},{xs}->{out}"
        self._shape = dims + dims
        self._kshape = kshape
        # adjoint: full[(i,u),(j,v)] = G[i,j] F[u,v]
        gmat = self.g if self.g is not None else np.eye(self.dt)
        self._gadj = gmat.reshape(tshape + tshape)
        gs = "".join(row[i] for i in self.traced) + "".join(_LETTERS[k + i] for i in self.traced)
        fs = "".join(row[i] for i in self.kept) + "".join(_LETTERS[k + i] for i in self.kept)
        full = "".join(row) + "".join(_LETTERS[k + i] for i in range(k))
        self._adj = f"{gs},{fs}->{full}"

    def reduce(self, x: np.ndarray) -> np.ndarray:
        t = x.reshape(self._shape)
        if self.g is None:
            r = np.einsum(self._fwd, t)
        else:
            r = np.einsum(self._fwd, self.gt.conj(), t)
        return r.reshape(-1)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return np.real(self.fc @ self.reduce(x))

    def adjoint(self, y: np.ndarray, n: int) -> np.ndarray:
        fm = (self.ft @ y).reshape(self._kshape + self._kshape)
        return np.einsum(self._adj, self._gadj, fm).reshape(n, n)

    def expand_rows(self, idx: np.ndarray, n: int) -> np.ndarray:
        """Full n x n matrices G (x) F_i for the selected local rows."""
        fm = self.f[idx].toarray().reshape([len(idx)] + self._kshape + self._kshape)
        k = len(self.dims)
        row = _LETTERS[:k]
        col = _LETTERS[k : 2 * k]
        gs = "".join(row[i] for i in self.traced) + "".join(col[i] for i in self.traced)
        fs = "Z" + "".join(row[i] for i in self.kept) + "".join(col[i] for i in self.kept)
        out = np.einsum(f"{gs},{fs}->Z{row}{col}", self._gadj, fm)
        return out.reshape(len(idx), n, n)


def _kernel_spec(pf: _PsdPart, pg: _PsdPart) -> str:
    """einsum signature for K[(s,t),(u,v)] = Tr_Tf[(Gf^H (x) I) W (Gg (x) E_uv) W]_{st}."""
    k = len(pf.dims)
    pool = iter(_LETTERS)
    y = [next(pool) for _ in range(k)]
    x = [next(pool) for _ in range(k)]
    i_ = [next(pool) for _ in range(k)]
    j_ = [next(pool) for _ in range(k)]
    w1r, w1c, w2r, w2c = [], [], [], []
    for p in range(k):
        w1r.append(y[p])
        w2c.append(x[p] if (p in pf.traced and pf.g is not None) else y[p] if p in pf.traced else x[p])
        w1c.append(i_[p])
        w2r.append(j_[p] if (p in pg.traced and pg.g is not None) else i_[p] if p in pg.traced else j_[p])
    ops = ["".join(w1r) + "".join(w1c), "".join(w2r) + "".join(w2c)]
    if pf.g is not None:
        ops.append("".join(y[p] for p in pf.traced) + "".join(x[p] for p in pf.traced))
    if pg.g is not None:
        ops.append("".join(i_[p] for p in pg.traced) + "".join(j_[p] for p in pg.traced))
    out = (
        "".join(y[p] for p in pf.kept)
        + "".join(x[p] for p in pf.kept)
        + "".join(i_[p] for p in pg.kept)
        + "".join(j_[p] for p in pg.kept)
    )
    return ",".join(ops) + "->" + out


class _Operator:
    """The linear map A, its adjoint and the Schur complement A W A*."""

    def __init__(self, problem: ConicProblem):
        self.problem = problem
        self.blocks = problem.blocks
        self.m = problem.num_rows
        self.psd_parts: dict[int, list[_PsdPart]] = {i: [] for i, b in enumerate(self.blocks) if b.kind == "psd"}
        self.lp_parts: dict[int, list[Part]] = {i: [] for i, b in enumerate(self.blocks) if b.kind == "nonneg"}
        self.lp_mats: dict[int, sp.csr_matrix] = {}
        for part in problem.parts:
            bl = self.blocks[part.block]
            if bl.kind == "psd":
                self.psd_parts[part.block].append(_PsdPart(part, bl.dims))
            else:
                self.lp_parts[part.block].append(part)
        for b, parts in self.lp_parts.items():
            mat = sp.csr_matrix((self.m, self.blocks[b].size))
            for part in parts:
                c = sp.csr_matrix(part.coeffs.real).tocoo()
                mat = mat + sp.csr_matrix((c.data, (np.asarray(part.rows)[c.row], c.col)), shape=mat.shape)
            self.lp_mats[b] = mat.tocsr()
        self._paths: dict = {}

    def apply(self, xs, blocks=None) -> np.ndarray:
        out = np.zeros(self.m)
        for b in blocks if blocks is not None else range(len(self.blocks)):
            if self.blocks[b].kind == "psd":
                for p in self.psd_parts[b]:
                    np.add.at(out, p.rows, p.apply(xs[b]))
            else:
                out += self.lp_mats[b] @ xs[b]
        return out

    def adjoint(self, y: np.ndarray) -> list[np.ndarray]:
        out = []
        for b, bl in enumerate(self.blocks):
            if bl.kind == "psd":
                acc = np.zeros((bl.size, bl.size), bl.dtype)
                for p in self.psd_parts[b]:
                    acc += p.adjoint(y[p.rows], bl.size)
                out.append(_herm(acc))
            else:
                out.append(self.lp_mats[b].T @ y)
        return out

    def _kernel(self, b: int, fi: int, gi: int, w: np.ndarray) -> np.ndarray:
        pf = self.psd_parts[b][fi]
        pg = self.psd_parts[b][gi]
        key = (b, fi, gi)
        wt = w.reshape(pf.dims + pf.dims)
        ops = [wt, wt]
        if pf.g is not None:
            ops.append(pf.gt.conj())
        if pg.g is not None:
            ops.append(pg.gt)
        if key not in self._paths:
            spec = _kernel_spec(pf, pg)
            path = np.einsum_path(spec, *ops, optimize="optimal")[0]
            self._paths[key] = (spec, path)
        spec, path = self._paths[key]
        return np.einsum(spec, *ops, optimize=path).reshape(pf.dk * pf.dk, pg.dk * pg.dk)

    def schur(self, scalings, blocks=None, size=None) -> np.ndarray:
        m = self.m if size is None else size
        out = np.zeros((m, m))
        for b in blocks if blocks is not None else range(len(self.blocks)):
            bl = self.blocks[b]
            if bl.kind == "nonneg":
                a = self.lp_mats[b][:m]
                out += (a.multiply(scalings[b]) @ a.T).toarray()
                continue
            parts = self.psd_parts[b]
            w = scalings[b]
            if any(pf.dk**2 * pg.dk**2 > _KERNEL_LIMIT for pf in parts for pg in parts):
                for gi in range(len(parts)):
                    self._schur_dense(b, gi, w, out)
                continue
            for gi, pg in enumerate(parts):
                for fi, pf in enumerate(parts[: gi + 1]):
                    k = self._kernel(b, fi, gi, w)
                    blk = np.real(_sandwich(pf, k, pg))
                    _accumulate(out, pf, pg, blk)
                    if fi != gi:
                        _accumulate(out, pg, pf, blk.T)
        return (out + out.T) / 2

    def _schur_dense(self, b: int, gi: int, w: np.ndarray, out: np.ndarray) -> None:
        n = self.blocks[b].size
        pg = self.psd_parts[b][gi]
        chunk = max(1, 2_000_000 // (n * n))
        for start in range(0, len(pg.rows), chunk):
            idx = np.arange(start, min(start + chunk, len(pg.rows)))
            a = pg.expand_rows(idx, n)
            y = w @ a @ w
            for pf in self.psd_parts[b]:
                vals = np.stack([pf.apply(y[j]) for j in range(len(idx))], axis=1)
                out[np.ix_(pf.rows, pg.rows[idx])] += vals


# ---------------------------------------------------------------- IPM


def _inner(a: list, b: list) -> float:
    total = 0.0
    for x, z in zip(a, b):
        total += float(np.real(np.vdot(x, z)))
    return total


def _norm(a: list) -> float:
    return float(np.sqrt(sum(np.real(np.vdot(x, x)) for x in a)))


class _Breakdown(Exception):
    pass


def _chol(m: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise _Breakdown("iterate left the cone") from exc


def _psd_step(l: np.ndarray, d: np.ndarray) -> float:
    """Largest alpha with L L^H + alpha d still PSD."""
    t = sla.solve_triangular(l, d, lower=True)
    t = sla.solve_triangular(l, t.conj().T, lower=True).conj().T
    lo = np.linalg.eigvalsh(_herm(t))[0]
    return np.inf if lo >= 0 else -1.0 / lo


def _lp_step(x: np.ndarray, d: np.ndarray) -> float:
    neg = d < 0
    return np.inf if not neg.any() else float(np.min(-x[neg] / d[neg]))


class _Scaling:
    def __init__(self, blocks, xs, zs):
        self.data = []
        self.w = []
        for bl, x, z in zip(blocks, xs, zs):
            if bl.kind == "psd":
                lx = _chol(x)
                lz = _chol(z)
                t = lx.conj().T @ z @ lx
                ev, q = np.linalg.eigh(_herm(t))
                if ev[0] <= 0:
                    raise _Breakdown("degenerate scaling")
                g = lx @ q * ev ** (-0.25)
                lam = np.sqrt(ev)
                w = _herm(g @ g.conj().T)
                ginv = (q.conj().T * ev[:, None] ** 0.25) @ sla.solve_triangular(lx, np.eye(bl.size), lower=True)
                self.data.append(("psd", g, ginv, lam, lx, lz))
                self.w.append(w)
            else:
                if np.any(x <= 0) or np.any(z <= 0):
                    raise _Breakdown("iterate left the orthant")
                self.data.append(("lp", np.sqrt(x / z), None, np.sqrt(x * z), x, z))
                self.w.append(x / z)

    def apply_w(self, blocks: list) -> list:
        out = []
        for (kind, *_), w, r in zip(self.data, self.w, blocks):
            out.append(_herm(w @ r @ w) if kind == "psd" else w * r)
        return out

    def affine_rc(self, xs) -> list:
        return [-x for x in xs]

    def corrector_rc(self, sigma_mu: float, dxs, dzs) -> list:
        out = []
        for (kind, g, ginv, lam, _, _), dx, dz in zip(self.data, dxs, dzs):
            if kind == "psd":
                dxt = ginv @ dx @ ginv.conj().T
                dzt = g.conj().T @ dz @ g
                prod = dxt @ dzt
                t = -(prod + prod.conj().T) / 2
                t[np.diag_indices_from(t)] += sigma_mu - lam**2
                s = 2 * t / (lam[:, None] + lam[None, :])
                out.append(_herm(g @ s @ g.conj().T))
            else:
                dxt = dx / g
                dzt = dz * g
                t = sigma_mu - lam**2 - dxt * dzt
                out.append(g * t / lam)
        return out

    def max_steps(self, dxs, dzs) -> tuple[float, float]:
        ap, ad = np.inf, np.inf
        for (kind, _, _, _, lx, lz), dx, dz in zip(self.data, dxs, dzs):
            if kind == "psd":
                ap = min(ap, _psd_step(lx, dx))
                ad = min(ad, _psd_step(lz, dz))
            else:
                ap = min(ap, _lp_step(lx, dx))
                ad = min(ad, _lp_step(lz, dz))
        return ap, ad


def _default_newton(op: _Operator):
    def factor(scaling: _Scaling):
        m = op.schur(scaling.w)
        scale = max(1.0, float(np.max(np.abs(np.diag(m)), initial=1.0)))
        for reg in (0.0, 1e-14, 1e-12, 1e-10):
            try:
                c = sla.cho_factor(m + reg * scale * np.eye(m.shape[0]), lower=True, check_finite=False)
                return lambda r: sla.cho_solve(c, r, check_finite=False)
            except np.linalg.LinAlgError:
                continue
        raise _Breakdown("Schur complement is not positive definite")

    return factor


@dataclass
class _State:
    xs: list
    ys: np.ndarray
    zs: list
    pobj: float = np.inf
    dobj: float = -np.inf
    res: tuple = (np.inf, np.inf, np.inf)


def _initial_point(op: _Operator, blocks, b, cs):
    gram_diag = np.diag(op.schur([np.eye(bl.size) if bl.kind == "psd" else np.ones(bl.size) for bl in blocks]))
    anorm = np.sqrt(np.maximum(gram_diag, 0))
    xs, zs = [], []
    cnorm = max((float(np.linalg.norm(c)) for c in cs), default=0.0)
    for bl in blocks:
        n = bl.size
        ratio = float(np.max((1 + np.abs(b)) / (1 + anorm), initial=1.0)) if len(b) else 1.0
        xi = max(10.0, np.sqrt(n), n * ratio)
        eta = max(10.0, np.sqrt(n), float(np.max(anorm, initial=0.0)), cnorm)
        if bl.kind == "psd":
            xs.append(xi * np.eye(n, dtype=bl.dtype))
            zs.append(eta * np.eye(n, dtype=bl.dtype))
        else:
            xs.append(np.full(n, xi))
            zs.append(np.full(n, eta))
    return xs, zs


def _ipm(op: _Operator, b, cs, newton_factory, tol=EPS_SDP, max_iter=MAX_ITER, monitor=None):
    blocks = op.blocks
    nu = sum(bl.size for bl in blocks)
    xs, zs = _initial_point(op, blocks, b, cs)
    y = np.zeros(op.m)
    bnorm = float(np.linalg.norm(b))
    cnorm = _norm(cs)
    best = None
    message = ""
    status = "indeterminate"
    it = 0
    stall = 0
    for it in range(max_iter + 1):
        ax = op.apply(xs)
        rp = b - ax
        aty = op.adjoint(y)
        rd = [c - z - a for c, z, a in zip(cs, zs, aty)]
        pobj = _inner(cs, xs)
        dobj = float(b @ y)
        pinf = float(np.linalg.norm(rp)) / (1 + bnorm)
        dinf = _norm(rd) / (1 + cnorm)
        gap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
        state = _State(xs, y, zs, pobj, dobj, (pinf, dinf, gap))
        if best is None or max(state.res) < max(best.res):
            best = state
        if max(pinf, dinf, gap) <= tol:
            status = "optimal"
            best = state
            break
        if monitor is not None:
            verdict = monitor(state, ax)
            if verdict is not None:
                return verdict, state, it, ""

        # infeasibility certificates
        if dobj > 0 and _norm([c - r for c, r in zip(cs, rd)]) / dobj <= tol and dobj > 1e8:
            status, message, best = "infeasible", "primal infeasible (dual ray)", state
            break
        if pobj < 0 and np.linalg.norm(b - rp) / -pobj <= tol and -pobj > 1e8:
            status, message, best = "indeterminate", "dual infeasible (primal unbounded)", state
            break
        if it == max_iter:
            message = "iteration limit reached"
            break
        try:
            sc = _Scaling(blocks, xs, zs)
            solve = newton_factory(sc)
        except _Breakdown as exc:
            message = f"numerical breakdown: {exc}"
            break
        mu = _inner(xs, zs) / nu

        def newton(rc):
            wrdw = sc.apply_w(rd)
            rhs = rp - op.apply([r - w for r, w in zip(rc, wrdw)])
            dy = solve(rhs)
            atdy = op.adjoint(dy)
            dz = [r - a for r, a in zip(rd, atdy)]
            wdz = sc.apply_w(dz)
            dx = [r - w for r, w in zip(rc, wdz)]
            return dx, dy, dz

        try:
            dx, dy, dz = newton(sc.affine_rc(xs))
            ap, ad = sc.max_steps(dx, dz)
            ap, ad = min(1.0, ap), min(1.0, ad)
            mu_aff = _inner([x + ap * d for x, d in zip(xs, dx)], [z + ad * d for z, d in zip(zs, dz)]) / nu
            sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3
            dx, dy, dz = newton(sc.corrector_rc(sigma * mu, dx, dz))
            ap, ad = sc.max_steps(dx, dz)
        except (_Breakdown, np.linalg.LinAlgError) as exc:
            message = f"numerical breakdown: {exc}"
            break
        if not np.all(np.isfinite(dy)):
            message = "numerical breakdown: non-finite direction"
            break
        gamma = 0.9 + 0.09 * min(1.0, ap, ad)
        ap = min(1.0, gamma * ap)
        ad = min(1.0, gamma * ad)
        stall = stall + 1 if max(ap, ad) < 1e-8 else 0
        if stall >= 5:
            message = "step lengths stalled"
            break
        xs = [x + ap * d for x, d in zip(xs, dx)]
        xs = [_herm(x) if x.ndim == 2 else x for x in xs]
        y = y + ad * dy
        zs = [z + ad * d for z, d in zip(zs, dz)]
        zs = [_herm(z) if z.ndim == 2 else z for z in zs]
    if status == "indeterminate" and not message:
        message = "did not converge"
    return status, best, it, message


def _independent_rows(op: _Operator, b: np.ndarray, tol: float = 1e-10):
    """Indices of a maximal independent set of rows, or None if the system is inconsistent."""
    m = op.m
    if m == 0:
        return np.arange(0)
    ident = [np.eye(bl.size) if bl.kind == "psd" else np.ones(bl.size) for bl in op.blocks]
    g = op.schur(ident)
    scale = float(np.max(np.diag(g), initial=0.0))
    if scale <= 0:
        return None if np.any(np.abs(b) > tol) else np.arange(0)
    c, piv, rank, info = sla.lapack.dpstrf(g, lower=1, tol=tol * scale)
    piv = piv[:rank] - 1
    keep = np.sort(piv)
    if rank < m:
        gk = g[np.ix_(keep, keep)]
        coef = sla.solve(gk, b[keep], assume_a="pos")
        xs = [a for a in _restricted_adjoint(op, keep, coef)]
        resid = op.apply(xs) - b
        if np.max(np.abs(resid), initial=0.0) > 1e-7 * (1 + float(np.max(np.abs(b), initial=0.0))):
            return None
    return keep


def _restricted_adjoint(op: _Operator, keep: np.ndarray, coef: np.ndarray):
    y = np.zeros(op.m)
    y[keep] = coef
    return op.adjoint(y)


def _real_reduction(problem: ConicProblem):
    """Restrict a problem with real data to real symmetric PSD blocks.

    If every functional is either real or purely imaginary, weights and the
    objective are real and imaginary rows have zero right-hand side, then
    Re X is feasible (and equally good) whenever X is, and the imaginary rows
    vanish identically on real X, as do rows with no coefficients and zero
    right-hand side.  Returns (problem, kept row indices) or None.
    """
    kinds = np.zeros(problem.num_rows, int)  # bit 1: real entries, bit 2: imaginary entries
    for part in problem.parts:
        c = sp.csr_matrix(part.coeffs, dtype=complex, copy=True)
        owner = np.asarray(part.rows)[np.repeat(np.arange(c.shape[0]), np.diff(c.indptr))]
        if problem.blocks[part.block].kind == "nonneg":
            np.bitwise_or.at(kinds, owner[c.data != 0], 1)
            continue
        if part.weight is not None and np.any(np.asarray(part.weight).imag != 0):
            return None
        np.bitwise_or.at(kinds, owner[c.data.real != 0], 1)
        np.bitwise_or.at(kinds, owner[c.data.imag != 0], 2)
    if np.any(kinds == 3) or np.any(problem.rhs[kinds == 2] != 0):
        return None
    if problem.objective is not None:
        for c in problem.objective:
            if c is not None and np.any(np.asarray(c).imag != 0):
                return None
    if not any(bl.kind == "psd" for bl in problem.blocks):
        return None
    keep = np.nonzero((kinds == 1) | ((kinds == 0) & (problem.rhs != 0)))[0]
    index = -np.ones(problem.num_rows, dtype=int)
    index[keep] = np.arange(len(keep))
    parts = []
    for part in problem.parts:
        rows = np.asarray(part.rows)
        sel = np.nonzero(index[rows] >= 0)[0]
        if len(sel) == 0:
            continue
        c = sp.csr_matrix(part.coeffs, dtype=complex, copy=True)[sel]
        c = sp.csr_matrix((c.data.real.copy(), c.indices.copy(), c.indptr.copy()), shape=c.shape)
        w = None if part.weight is None else np.asarray(part.weight).real
        parts.append(Part(part.block, index[rows[sel]], c, part.traced, w))
    blocks = tuple(Block(bl.kind, bl.size, bl.dims, bl.kind == "psd") for bl in problem.blocks)
    obj = None
    if problem.objective is not None:
        obj = tuple(None if c is None else np.asarray(c).real for c in problem.objective)
    return ConicProblem(blocks, tuple(parts), problem.rhs[keep], obj), keep


def _as_complex(xs, blocks) -> list:
    return [np.asarray(x, complex) if bl.kind == "psd" else x for x, bl in zip(xs, blocks)]


def _restrict(problem: ConicProblem, keep: np.ndarray) -> ConicProblem:
    index = -np.ones(problem.num_rows, dtype=int)
    index[keep] = np.arange(len(keep))
    parts = []
    for part in problem.parts:
        rows = np.asarray(part.rows)
        sel = np.nonzero(index[rows] >= 0)[0]
        if len(sel) == 0:
            continue
        parts.append(Part(part.block, index[rows[sel]], sp.csr_matrix(part.coeffs)[sel], part.traced, part.weight))
    return ConicProblem(problem.blocks, tuple(parts), problem.rhs[keep], problem.objective)


def solve(problem: ConicProblem, tol: float = EPS_SDP, max_iter: int = MAX_ITER,
          exploit_real: bool = True) -> ConicSolution:
    """Solve a conic problem.

    Linearly dependent equalities are removed first (an inconsistent system is
    reported as infeasible).  Failure to converge is reported as status
    ``"indeterminate"`` carrying the best iterate, never as an exception.
    Problems with real data are solved over real symmetric matrices unless
    ``exploit_real`` is off.
    """
    if not problem.blocks:
        raise DimensionMismatch("problem needs at least one block")
    red = _real_reduction(problem) if exploit_real else None
    if red is None:
        return _solve(problem, tol, max_iter)
    sub, keep = red
    sol = _solve(sub, tol, max_iter)
    y = np.zeros(problem.num_rows)
    y[keep] = sol.dual
    return ConicSolution(sol.status, _as_complex(sol.primal, sub.blocks), y, _as_complex(sol.dual_slack, sub.blocks),
                         sol.objective_value, sol.residuals, sol.iterations, sol.message)


def _solve(problem: ConicProblem, tol: float, max_iter: int) -> ConicSolution:
    op = _Operator(problem)
    b = problem.rhs
    keep = _independent_rows(op, b)
    cs = problem.objective_blocks()
    if keep is None:
        zeros = [np.zeros_like(c) for c in cs]
        return ConicSolution("infeasible", zeros, np.zeros(problem.num_rows), zeros, np.inf,
                             (np.inf, np.inf, np.inf), 0, "inconsistent equality constraints")
    reduced = problem if len(keep) == problem.num_rows else _restrict(problem, keep)
    rop = op if reduced is problem else _Operator(reduced)
    status, st, it, message = _ipm(rop, reduced.rhs, cs, _default_newton(rop), tol, max_iter)
    y = np.zeros(problem.num_rows)
    y[keep] = st.ys
    return ConicSolution(status, st.xs, y, st.zs, st.pobj, st.res, it, message)


# ---------------------------------------------------------------- phase 1


@dataclass
class FeasibilityResult:
    feasible: bool
    slack: float
    witness: list | None
    status: str = "optimal"
    iterations: int = 0

    def __iter__(self):
        return iter((self.feasible, self.slack, self.witness))


def _phase_one_problem(problem: ConicProblem) -> ConicProblem:
    m = problem.num_rows
    parts = list(problem.parts)
    blocks = problem.blocks + (Block("nonneg", 2 * m + 1),)
    lp = len(blocks) - 1
    r = np.arange(m)
    # rows 0..m-1:  A_i(X) + t - p_i = b_i ;  rows m..2m-1:  p_i + q_i - 2t = 0
    rows = np.concatenate([r, r, m + r, m + r, m + r])
    cols = np.concatenate([np.zeros(m, int), 1 + r, 1 + r, 1 + m + r, np.zeros(m, int)])
    vals = np.concatenate([np.ones(m), -np.ones(m), np.ones(m), np.ones(m), -2 * np.ones(m)])
    coeffs = sp.csr_matrix((vals, (rows, cols)), shape=(2 * m, 2 * m + 1))
    parts.append(Part(lp, np.arange(2 * m), coeffs))
    c = np.zeros(2 * m + 1)
    c[0] = 1.0
    obj = tuple([None] * len(problem.blocks) + [c])
    return ConicProblem(blocks, tuple(parts), np.concatenate([problem.rhs, np.zeros(m)]), obj)


def _phase_one_newton(op: _Operator, m: int):
    lp = len(op.blocks) - 1
    orig = list(range(lp))

    def factor(scaling: _Scaling):
        k = op.schur(scaling.w, blocks=orig, size=m)
        d = scaling.w[lp]
        dt, dp, dq = d[0], d[1 : m + 1], d[m + 1 :]
        delta = dp + dq
        w = 1.0 / delta
        c = 4 * dt / (1 + 4 * dt * w.sum())

        def m22inv(v):
            if v.ndim == 1:
                return v * w - c * w * (w @ v)
            return v * w[:, None] - c * np.outer(w, w @ v)

        def bmul(v):
            if v.ndim == 1:
                return dp * v + 2 * dt * v.sum()
            return dp[:, None] * v + 2 * dt * v.sum(axis=0)[None, :]

        bmat = np.diag(dp) + 2 * dt
        s = k + dt + np.diag(dp) - bmul(m22inv(bmat))
        s = (s + s.T) / 2
        scale = max(1.0, float(np.max(np.abs(np.diag(s)))))
        chol = None
        for reg in (0.0, 1e-14, 1e-12, 1e-10):
            try:
                chol = sla.cho_factor(s + reg * scale * np.eye(m), lower=True, check_finite=False)
                break
            except np.linalg.LinAlgError:
                continue
        if chol is None:
            raise _Breakdown("phase-one Schur complement is not positive definite")

        def solve(r):
            f, g = r[:m], r[m:]
            u = sla.cho_solve(chol, f + bmul(m22inv(g)), check_finite=False)
            v = m22inv(g + bmul(u))
            return np.concatenate([u, v])

        return solve

    return factor


def check_feasible(problem: ConicProblem, tol: float = EPS_FEAS, early_stop: bool = True,
                   max_iter: int = MAX_ITER, exploit_real: bool = True) -> FeasibilityResult:
    """Decide whether the equalities of ``problem`` have a solution in the cone.

    Each equality is relaxed to |<A_i, X> - b_i| <= t and t is minimized.  The
    answer is feasible iff the optimal t is strictly below ``tol``.  With
    ``early_stop`` the iteration ends as soon as the verdict is certain: a
    cone point violating every equality by less than tol/2, or a dual bound
    above 2 tol.  The objective of ``problem`` is ignored.
    """
    if not problem.blocks:
        raise DimensionMismatch("problem needs at least one block")
    red = _real_reduction(problem) if exploit_real else None
    if red is not None:
        res = _check_feasible(red[0], tol, early_stop, max_iter)
        if res.witness is not None:
            res.witness = _as_complex(res.witness, red[0].blocks)
        return res
    return _check_feasible(problem, tol, early_stop, max_iter)


def _check_feasible(problem: ConicProblem, tol: float, early_stop: bool, max_iter: int) -> FeasibilityResult:
    m = problem.num_rows
    ncone = len(problem.blocks)
    if m == 0:
        xs = [np.zeros((bl.size, bl.size), complex) if bl.kind == "psd" else np.zeros(bl.size) for bl in problem.blocks]
        return FeasibilityResult(True, 0.0, xs, "optimal", 0)
    p1 = _phase_one_problem(problem)
    op = _Operator(p1)
    b = problem.rhs

    def monitor(state: _State, ax: np.ndarray):
        if not early_stop:
            return None
        t, pvec = state.xs[-1][0], state.xs[-1][1 : m + 1]
        viol = float(np.max(np.abs(ax[:m] - t + pvec - b), initial=0.0))
        if viol < tol / 2:
            return "feasible"
        if state.res[1] <= EPS_SDP and state.dobj > 2 * tol and state.pobj - state.dobj <= 1e-3 * state.dobj:
            return "infeasible"
        return None

    status, st, it, _ = _ipm(op, p1.rhs, p1.objective_blocks(), _phase_one_newton(op, m), EPS_SDP, max_iter, monitor)
    xs = st.xs[:ncone]
    viol = float(np.max(np.abs(op.apply(st.xs, blocks=range(ncone))[:m] - b), initial=0.0))
    if status == "feasible":
        return FeasibilityResult(True, viol, xs, "optimal", it)
    if status == "infeasible":
        return FeasibilityResult(False, max(st.dobj, tol), None, "optimal", it)
    if status == "optimal":
        tstar = min(float(st.xs[-1][0]), viol)
        if tstar < tol:
            return FeasibilityResult(True, tstar, xs, "optimal", it)
        return FeasibilityResult(False, float(st.xs[-1][0]), None, "optimal", it)
    return FeasibilityResult(False, np.inf, None, "indeterminate", it)


# ---------------------------------------------------------------- real form


def realify(problem: ConicProblem) -> ConicProblem:
    """Equivalent problem with real symmetric data on doubled PSD blocks.

    A Hermitian block of size n becomes a real block of size 2n holding
    [[Re X, -Im X], [Im X, Re X]]; every functional and the objective carry
    a factor 1/2 so that values are unchanged.
    """
    op = _Operator(problem)
    builder = ProblemBuilder()
    for bl in problem.blocks:
        if bl.kind == "psd":
            builder.psd(2 * bl.size)
        else:
            builder.nonneg(bl.size)
    m = problem.num_rows
    terms = []
    for b, bl in enumerate(problem.blocks):
        if bl.kind == "psd":
            n = bl.size
            rows = []
            for part in op.psd_parts[b]:
                full = part.expand_rows(np.arange(len(part.rows)), n)
                for local, i in enumerate(part.rows):
                    rows.append((i, full[local]))
            mats = np.zeros((m, 2 * n, 2 * n))
            for i, a in rows:
                mats[i] += 0.5 * real_embedding(a)
            terms.append((b, sp.csr_matrix(mats.reshape(m, -1))))
        else:
            terms.append((b, op.lp_mats[b]))
    builder.add_rows(terms, problem.rhs)
    for b, c in enumerate(problem.objective_blocks()):
        if problem.blocks[b].kind == "psd":
            builder.set_objective(b, 0.5 * real_embedding(c))
        else:
            builder.set_objective(b, c)
    return builder.build()


def unembed(x: np.ndarray) -> np.ndarray:
    """Recover the Hermitian matrix whose real embedding is (approximately) ``x``."""
    n = x.shape[0] // 2
    re = (x[:n, :n] + x[n:, n:]) / 2
    im = (x[n:, :n] - x[:n, n:]) / 2
    return re + 1j * im


def require_optimal(sol: ConicSolution) -> ConicSolution:
    if sol.status != "optimal":
        raise SolverFailure(sol.status, sol.message or f"solver status {sol.status}")
    return sol
