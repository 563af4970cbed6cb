"""Bipartite channels stored as Choi matrices.

A channel N: A B -> A' B' is kept as J = sum_ij |i><j| (x) N(|i><j|) with the
index order (inA, inB, outA, outB), row-major.  Any of the four dimensions may
be 1, so single-system channels are the special case inB = outB = 1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import linalg as la
from .errors import (
    DimensionMismatch,
    InvalidParams,
    NotCompletelyPositive,
    NotPSD,
    NotTracePreserving,
    WrongSignRegime,
)
from .states import BipartiteState, Sampler, _trusted, marginal

EPS_TP = 1e-9
EPS_PROP = 1e-8


@dataclass(frozen=True, eq=False)
class ChoiChannel:
    choi: np.ndarray
    dims: tuple[int, int, int, int]
    info: dict = field(default_factory=dict)

    @property
    def d_in(self) -> int:
        return self.dims[0] * self.dims[1]

    @property
    def d_out(self) -> int:
        return self.dims[2] * self.dims[3]

    def tensor4(self) -> np.ndarray:
        return self.choi.reshape(self.d_in, self.d_out, self.d_in, self.d_out)

    def __repr__(self) -> str:
        return f"ChoiChannel(dims={self.dims})"


@dataclass(frozen=True)
class ChannelPropertyReport:
    cptp: bool
    unital: bool
    conditionally_unital: bool
    semi_causal: bool
    locally_balanced: bool
    residuals: dict


def _dims4(dims) -> tuple[int, int, int, int]:
    d = tuple(int(x) for x in dims)
    if len(d) == 2:
        d = (d[0], 1, d[1], 1)
    if len(d) != 4 or min(d) < 1:
        raise DimensionMismatch(f"channel dims must be four positive integers, got {dims}")
    return d


def from_choi(choi, dims, check: bool = True, tol: float = EPS_TP) -> ChoiChannel:
    dims = _dims4(dims)
    j = np.asarray(choi, complex)
    n = dims[0] * dims[1] * dims[2] * dims[3]
    if j.shape != (n, n):
        raise DimensionMismatch(f"Choi matrix of shape {j.shape} does not fit dims {dims}")
    ch = ChoiChannel(la.hermitize(j), dims)
    if check:
        low = float(np.linalg.eigvalsh(ch.choi)[0])
        if low < -la.EPS_PSD:
            raise NotCompletelyPositive(f"Choi matrix has eigenvalue {low:.3e}")
        err = _tp_residual(ch)
        if err > tol:
            raise NotTracePreserving(f"Tr_out J differs from identity by {err:.3e}")
    return ch


def choi_from_kraus(kraus: Sequence[np.ndarray], dims, tol: float = EPS_TP) -> ChoiChannel:
    """Choi matrix of rho -> sum_k K rho K^H."""
    dims = _dims4(dims)
    d_in, d_out = dims[0] * dims[1], dims[2] * dims[3]
    ks = [np.asarray(k, complex) for k in kraus]
    for k in ks:
        if k.shape != (d_out, d_in):
            raise DimensionMismatch(f"Kraus operator of shape {k.shape}, expected {(d_out, d_in)}")
    s = sum(k.conj().T @ k for k in ks)
    err = la.max_abs(s - np.eye(d_in))
    if err > tol:
        raise NotTracePreserving(f"sum K^H K differs from identity by {err:.3e}")
    vs = np.stack([k.T.reshape(-1) for k in ks])
    return ChoiChannel(la.hermitize(vs.T @ vs.conj()), dims)


def choi_from_map(func: Callable[[np.ndarray], np.ndarray], dims, check: bool = True) -> ChoiChannel:
    """Choi matrix of a linear map given as a function on d_in x d_in matrices."""
    dims = _dims4(dims)
    d_in, d_out = dims[0] * dims[1], dims[2] * dims[3]
    j = np.zeros((d_in, d_out, d_in, d_out), complex)
    for a in range(d_in):
        for b in range(d_in):
            e = np.zeros((d_in, d_in), complex)
            e[a, b] = 1
            j[a, :, b, :] = func(e)
    return from_choi(j.reshape(d_in * d_out, d_in * d_out), dims, check=check)


def apply_matrix(ch: ChoiChannel, m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, complex)
    if m.shape != (ch.d_in, ch.d_in):
        raise DimensionMismatch(f"input of shape {m.shape} does not fit channel input {ch.d_in}")
    return np.einsum("iojp,ij->op", ch.tensor4(), m)


def apply(ch: ChoiChannel, rho: BipartiteState) -> BipartiteState:
    """N(rho) = Tr_in[J (rho^T (x) I)]."""
    if rho.dims != (ch.dims[0], ch.dims[1]):
        raise DimensionMismatch(f"state dims {rho.dims} do not match channel input {ch.dims[:2]}")
    out = la.hermitize(apply_matrix(ch, rho.matrix))
    return _trusted(out, ch.dims[2], ch.dims[3])


def compose(n2: ChoiChannel, n1: ChoiChannel) -> ChoiChannel:
    """Choi matrix of n2 after n1."""
    if n1.d_out != n2.d_in or (n1.dims[2], n1.dims[3]) != (n2.dims[0], n2.dims[1]):
        raise DimensionMismatch(f"cannot compose output {n1.dims[2:]} into input {n2.dims[:2]}")
    j = np.einsum("imjn,monp->iojp", n1.tensor4(), n2.tensor4())
    return ChoiChannel(la.hermitize(j.reshape(n1.d_in * n2.d_out, -1)), (n1.dims[0], n1.dims[1], n2.dims[2], n2.dims[3]))


def tensor(n1: ChoiChannel, n2: ChoiChannel) -> ChoiChannel:
    """n1 (x) n2 acting on (A1 A2)(B1 B2) -> (A1' A2')(B1' B2')."""
    j = np.kron(n1.choi, n2.choi)
    dims = list(n1.dims) + list(n2.dims)
    j = la.permute_systems(j, dims, [0, 4, 1, 5, 2, 6, 3, 7])
    d = (n1.dims[0] * n2.dims[0], n1.dims[1] * n2.dims[1], n1.dims[2] * n2.dims[2], n1.dims[3] * n2.dims[3])
    return ChoiChannel(j, d)


def on_b(ch: ChoiChannel) -> ChoiChannel:
    """Relabel a channel on A alone as the same channel on B alone."""
    if ch.dims[1] != 1 or ch.dims[3] != 1:
        raise DimensionMismatch("expected a channel with trivial B systems")
    return ChoiChannel(ch.choi, (1, ch.dims[0], 1, ch.dims[2]))


def local(na: ChoiChannel, nb: ChoiChannel) -> ChoiChannel:
    """na on A and nb on B, both given as single-system channels."""
    return tensor(na, on_b(nb))


def identity(da: int, db: int = 1) -> ChoiChannel:
    return choi_from_kraus([np.eye(da * db)], (da, db, da, db))


def swap(d: int) -> ChoiChannel:
    """Exchange A and B (both of dimension d)."""
    p = np.zeros((d * d, d * d))
    for a, b in itertools.product(range(d), repeat=2):
        p[b * d + a, a * d + b] = 1
    return choi_from_kraus([p], (d, d, d, d))


# ------------------------------------------------------------ properties


def _tp_residual(ch: ChoiChannel) -> float:
    t = la.partial_trace(ch.choi, [ch.d_in, ch.d_out], [0])
    return la.max_abs(t - np.eye(ch.d_in))


def _cu_residual(ch: ChoiChannel) -> float:
    a, b, at, bp = ch.dims
    j = ch.choi
    j_batb = la.partial_trace(j, ch.dims, [1, 2, 3])
    j_bb = la.partial_trace(j, ch.dims, [1, 3])
    rhs = la.permute_systems(np.kron(j_bb, np.eye(at) / at), [b, bp, at], [0, 2, 1])
    return la.max_abs(j_batb - rhs)


def _sc_residual(ch: ChoiChannel) -> float:
    a, b, at, bp = ch.dims
    j = ch.choi
    j_abb = la.partial_trace(j, ch.dims, [0, 1, 3])
    j_bb = la.partial_trace(j, ch.dims, [1, 3])
    return la.max_abs(j_abb - np.kron(np.eye(a) / a, j_bb))


def check_properties(ch: ChoiChannel, tol: float = EPS_PROP) -> ChannelPropertyReport:
    """Classify a channel from marginal identities of its Choi matrix.

    conditionally unital:  J_{B A' B'} = J_{B B'} (x) u_{A'}
    semi-causal (A -/-> B'):  J_{A B B'} = u_A (x) J_{B B'}
    """
    res = {
        "cp": max(0.0, -float(np.linalg.eigvalsh(ch.choi)[0])),
        "tp": _tp_residual(ch),
        "unital": la.max_abs(la.partial_trace(ch.choi, [ch.d_in, ch.d_out], [1]) - np.eye(ch.d_out)),
        "conditionally_unital": _cu_residual(ch),
        "semi_causal": _sc_residual(ch),
    }
    cptp = res["cp"] <= tol and res["tp"] <= tol
    cu = res["conditionally_unital"] <= tol
    sc = res["semi_causal"] <= tol
    return ChannelPropertyReport(cptp, res["unital"] <= tol, cu, sc, cu and sc, res)


def spanning_states(d: int) -> list[np.ndarray]:
    """d^2 density matrices spanning all d x d matrices: |i><i|, |i>+|j>, |i>+i|j> projectors."""
    out = []
    for i in range(d):
        e = np.zeros((d, d), complex)
        e[i, i] = 1
        out.append(e)
    for i in range(d):
        for j in range(i + 1, d):
            for phase in (1, 1j):
                v = np.zeros(d, complex)
                v[i], v[j] = 1 / np.sqrt(2), phase / np.sqrt(2)
                out.append(np.outer(v, v.conj()))
    return out


def functional_residuals(ch: ChoiChannel) -> dict:
    """Conditional unitality and semi-causality tested by applying the channel.

    conditional unitality: N(u_A (x) w_B) must equal u_A' (x) (its B' marginal)
    for w_B over a spanning set.  Semi-causality: the B' marginal of N(w_AB)
    must not change when A is first replaced by u_A, for w_AB over a spanning set.
    """
    a, b, at, bp = ch.dims
    cu = 0.0
    for w in spanning_states(b):
        out = apply_matrix(ch, np.kron(np.eye(a) / a, w))
        ob = la.partial_trace(out, [at, bp], [1])
        cu = max(cu, la.max_abs(out - np.kron(np.eye(at) / at, ob)))
    sc = 0.0
    for w in spanning_states(a * b):
        out = la.partial_trace(apply_matrix(ch, w), [at, bp], [1])
        wb = la.partial_trace(w, [a, b], [1])
        ref = la.partial_trace(apply_matrix(ch, np.kron(np.eye(a) / a, wb)), [at, bp], [1])
        sc = max(sc, la.max_abs(out - ref))
    return {"conditionally_unital": cu, "semi_causal": sc}


# ------------------------------------------------------------ constructors


def _stochastic_choi(d: np.ndarray) -> np.ndarray:
    """Choi matrix of the classical channel x -> x' with probability d[x', x] (dephasing first)."""
    m = d.shape[0]
    j = np.zeros((d.shape[1], m, d.shape[1], m), complex)
    for x in range(d.shape[1]):
        j[x, :, x, :] = np.diag(d[:, x])
    return j.reshape(d.shape[1] * m, -1)


def _as_channel(f, dims=None) -> ChoiChannel:
    if isinstance(f, ChoiChannel):
        return f
    ks = [np.asarray(k, complex) for k in f]
    if dims is None:
        dims = (ks[0].shape[1], 1, ks[0].shape[0], 1)
    d_in, d_out = dims[0] * dims[1], dims[2] * dims[3]
    vs = np.stack([k.T.reshape(-1) for k in ks])
    return ChoiChannel(la.hermitize(vs.T @ vs.conj()), _dims4(dims))


def make_standard(kind: str, **params) -> ChoiChannel:
    """Standard channel families.

    kinds and parameters:
      randomizing        d
      replacement        tau (BipartiteState), d_in=(a, b)
      isometric          V (matrix), dims (optional)
      b_controlled_mixed_unitary   unitaries [U_x on A], kraus [K_x: B -> B']
      cds                stochastic [D^j doubly stochastic], instrument [F^j on B]
      semi_causal_factored   E (channel on A R -> A), V (isometry B -> R B'), r, b_out
    """
    try:
        if kind == "randomizing":
            d = int(params["d"])
            return ChoiChannel(np.eye(d * d, dtype=complex) / d, (d, 1, d, 1))
        if kind == "replacement":
            tau: BipartiteState = params["tau"]
            a, b = params.get("d_in", (1, 1))
            return ChoiChannel(np.kron(np.eye(a * b), tau.matrix), (a, b, tau.dim_a, tau.dim_b))
        if kind == "isometric":
            v = np.asarray(params["V"], complex)
            dims = params.get("dims", (v.shape[1], 1, v.shape[0], 1))
            if la.max_abs(v.conj().T @ v - np.eye(v.shape[1])) > EPS_TP:
                raise InvalidParams("V is not an isometry")
            return choi_from_kraus([v], dims)
        if kind == "b_controlled_mixed_unitary":
            return _b_controlled(params["unitaries"], params["kraus"])
        if kind == "cds":
            return _cds(params["stochastic"], params["instrument"])
        if kind == "semi_causal_factored":
            return _semi_causal_factored(params["E"], params["V"], int(params["r"]), int(params["b_out"]))
    except KeyError as exc:
        raise InvalidParams(f"{kind} needs parameter {exc.args[0]!r}") from exc
    except (NotTracePreserving, NotCompletelyPositive, DimensionMismatch) as exc:
        raise InvalidParams(f"{kind}: {exc}") from exc
    raise InvalidParams(f"unknown channel kind {kind!r}")


def _b_controlled(unitaries, kraus) -> ChoiChannel:
    us = [np.asarray(u, complex) for u in unitaries]
    ks = [np.asarray(k, complex) for k in kraus]
    if len(us) != len(ks) or not us:
        raise InvalidParams("need one unitary per Kraus operator")
    a = us[0].shape[0]
    for u in us:
        if u.shape != (a, a) or la.max_abs(u.conj().T @ u - np.eye(a)) > EPS_TP:
            raise InvalidParams("every U_x must be a unitary on A")
    bp, b = ks[0].shape
    s = sum(k.conj().T @ k for k in ks)
    if any(k.shape != (bp, b) for k in ks) or la.max_abs(s - np.eye(b)) > EPS_TP:
        raise InvalidParams("K_x must satisfy sum K^H K = I")
    return choi_from_kraus([np.kron(u, k) for u, k in zip(us, ks)], (a, b, a, bp))


def _cds(stochastic, instrument) -> ChoiChannel:
    ds = [np.asarray(d, float) for d in stochastic]
    fs = [_as_channel(f) for f in instrument]
    if len(ds) != len(fs) or not ds:
        raise InvalidParams("need one instrument element per stochastic matrix")
    m = ds[0].shape[0]
    for d in ds:
        if d.shape != (m, m) or d.min() < -EPS_TP:
            raise InvalidParams("D^j must be square with nonnegative entries")
        if la.max_abs(d.sum(axis=0) - 1) > EPS_TP or la.max_abs(d.sum(axis=1) - 1) > EPS_TP:
            raise InvalidParams("D^j must be doubly stochastic")
    dims = fs[0].dims
    if any(f.dims != dims for f in fs) or dims[1] != 1 or dims[3] != 1:
        raise InvalidParams("instrument elements must be maps on B with equal dims")
    for f in fs:
        if np.linalg.eigvalsh(f.choi)[0] < -la.EPS_PSD:
            raise InvalidParams("instrument elements must be completely positive")
    total = ChoiChannel(sum(f.choi for f in fs), dims)
    if _tp_residual(total) > EPS_TP:
        raise InvalidParams("instrument elements must sum to a trace-preserving map")
    out = None
    for d, f in zip(ds, fs):
        j = local(ChoiChannel(_stochastic_choi(d), (m, 1, m, 1)), f).choi
        out = j if out is None else out + j
    return ChoiChannel(out, (m, dims[0], m, dims[2]))


def _semi_causal_factored(e, v, r: int, b_out: int) -> ChoiChannel:
    """(E (x) id_B') o (id_A (x) V) with V: B -> R B' and E: A R -> A'."""
    v = np.asarray(v, complex)
    b = v.shape[1]
    if v.shape[0] != r * b_out or la.max_abs(v.conj().T @ v - np.eye(b)) > EPS_TP:
        raise InvalidParams("V must be an isometry from B into R (x) B'")
    e = _as_channel(e)
    a, er, a_out, e1 = e.dims
    if er != r or e1 != 1:
        raise InvalidParams("E must act on A (x) R with trivial second output")
    if _tp_residual(e) > EPS_TP or np.linalg.eigvalsh(e.choi)[0] < -la.EPS_PSD:
        raise InvalidParams("E must be a channel")
    big = np.kron(np.eye(a), v)  # A B -> A R B'
    je = e.tensor4()

    def func(x):
        y = (big @ x @ big.conj().T).reshape(a * r, b_out, a * r, b_out)
        return np.einsum("iojp,ikjl->okpl", je, y).reshape(a_out * b_out, a_out * b_out)

    return choi_from_map(func, (a, b, a_out, b_out))


# ------------------------------------------------------------ proof channels

_GUARD = 1e-12


def sign_regime(h: float) -> str:
    """Proof-channel variant for min-entropy ``h``, with the same guard band as the constructors."""
    return "nonneg" if h >= -_GUARD else "neg"


def _blockdiag_choi(outputs: Sequence[np.ndarray], d_out: int) -> np.ndarray:
    kx = len(outputs)
    j = np.zeros((kx, d_out, kx, d_out), complex)
    for x, o in enumerate(outputs):
        j[x, :, x, :] = o
    return j.reshape(kx * d_out, -1)


def make_proof_channel(variant: str, rho: BipartiteState | None = None,
                       sigma_b: BipartiteState | np.ndarray | None = None, k: int | None = None) -> ChoiChannel:
    """Channels that realize the extremal conversions between rho and flags on X.

    ``nonneg`` (min-entropy H >= 0): measure-and-prepare X -> AB with
    m = floor(2^H) and ``N(Pi/m) = rho`` for Pi the first m basis states.
    ``neg`` (H < 0): X -> (A A') B with k' = ceil(2^-H) and
    ``N(|0><0|) = rho (x) u_A'``.
    ``maxent``: (A A~) B -> X with ``N(Phi^(k) (x) u_A~) = |0><0|``.

    H is the min-entropy of rho relative to ``sigma_b`` (default rho_B).
    With sigma_b = rho_B the first two are also semi-causal.  The identity
    pair is stored in ``info["identity_input"]`` / ``info["identity_output"]``.
    """
    from .entropy import hmin_given

    if variant == "maxent":
        if k is None:
            raise InvalidParams("maxent needs k")
        return _maxent_channel(int(k))
    if rho is None:
        raise InvalidParams(f"{variant} needs a state")
    da, db = rho.dims
    if sigma_b is None:
        sigma = marginal(rho, "B").matrix
    else:
        sigma = sigma_b.matrix if isinstance(sigma_b, BipartiteState) else np.asarray(sigma_b, complex)
        sigma = la.hermitize(sigma) / np.real(np.trace(sigma))
    h = hmin_given(rho, sigma).value
    base = np.kron(np.eye(da), sigma)
    if variant == "nonneg":
        if h < -_GUARD:
            raise WrongSignRegime(f"min-entropy {h:.6g} is negative")
        m = max(1, int(np.floor(2.0**h + _GUARD)))
        m = min(m, da)
        kx = da
        if m < kx:
            tau = (base - m * rho.matrix) / (kx - m)
            _require_psd(tau)
        else:
            tau = rho.matrix
        outputs = [rho.matrix] * m + [tau] * (kx - m)
        ch = ChoiChannel(_blockdiag_choi(outputs, da * db), (kx, 1, da, db))
        pi = np.diag([1.0 / m] * m + [0.0] * (kx - m)).astype(complex)
        ch.info.update(m=m, h=h, identity_input=pi, identity_output=rho.matrix)
        return ch
    if variant == "neg":
        if h >= -_GUARD:
            raise WrongSignRegime(f"min-entropy {h:.6g} is not negative")
        t = 2.0 ** (-h)
        kp = int(np.ceil(t - _GUARD))
        kx = da * kp
        tau = (kp * base - rho.matrix) / (kx - 1)
        _require_psd(tau)
        u = np.eye(kp) / kp

        def lift(x):
            return la.permute_systems(np.kron(x, u), [da, db, kp], [0, 2, 1])

        outputs = [lift(rho.matrix)] + [lift(tau)] * (kx - 1)
        ch = ChoiChannel(_blockdiag_choi(outputs, kx * db), (kx, 1, kx, db))
        e0 = np.zeros((kx, kx), complex)
        e0[0, 0] = 1
        ch.info.update(k_prime=kp, h=h, identity_input=e0, identity_output=lift(rho.matrix))
        return ch
    raise InvalidParams(f"unknown proof-channel variant {variant!r}")


def _require_psd(tau: np.ndarray) -> None:
    low = float(np.linalg.eigvalsh(la.hermitize(tau))[0])
    if low < -la.EPS_PSD:
        raise NotPSD(f"tau has eigenvalue {low:.3e}")


def _maxent_channel(k: int) -> ChoiChannel:
    if k < 2:
        raise InvalidParams("maxent needs k >= 2")
    kx = k * k
    phi = np.zeros((kx, kx))
    v = np.zeros(kx)
    v[:: k + 1] = 1 / np.sqrt(k)
    phi = np.outer(v, v)
    p1 = np.zeros((kx, kx), complex)
    p1[0, 0] = 1
    rest = (np.eye(kx) - p1) / (kx - 1)

    def func(x):
        # input order (A, A~, B); discard A~ then measure {Phi, I - Phi} on A B
        y = np.einsum("atbctd->abcd", x.reshape(k, k, k, k, k, k))
        y = y.reshape(kx, kx)
        f = np.real(np.trace(phi @ y))
        tr = np.trace(y)
        return f * p1 + (tr - f) * rest

    ch = choi_from_map(func, (k * k, k, kx, 1))
    inp = la.permute_systems(np.kron(phi, np.eye(k) / k), [k, k, k], [0, 2, 1])
    ch.info.update(identity_input=inp, identity_output=p1)
    return ch


# ------------------------------------------------------------ random families


def random_channel(dims, seed: int, rank: int | None = None) -> ChoiChannel:
    dims = _dims4(dims)
    d_in, d_out = dims[0] * dims[1], dims[2] * dims[3]
    r = rank or d_in * d_out
    s = Sampler(seed, "channel")
    v = s.isometry(d_in, d_out * r)
    ks = [v[i * d_out : (i + 1) * d_out] for i in range(r)]
    return choi_from_kraus(ks, dims)


def random_b_controlled(a: int, b: int, b_out: int, terms: int, seed: int) -> ChoiChannel:
    s = Sampler(seed, "channel")
    v = s.isometry(b, b_out * terms)
    ks = [v[i * b_out : (i + 1) * b_out] for i in range(terms)]
    us = [s.unitary(a) for _ in range(terms)]
    return make_standard("b_controlled_mixed_unitary", unitaries=us, kraus=ks)


def random_doubly_stochastic(m: int, s: Sampler, terms: int = 3) -> np.ndarray:
    w = s.dirichlet(terms)
    d = np.zeros((m, m))
    for x in range(terms):
        d += w[x] * np.eye(m)[s._gen.permutation(m)]
    return d


def random_cds(m: int, b: int, b_out: int, terms: int, seed: int) -> ChoiChannel:
    s = Sampler(seed, "channel")
    v = s.isometry(b, b_out * terms * 2)
    block = b_out * 2
    fs = [[v[j * block + i * b_out : j * block + (i + 1) * b_out] for i in range(2)] for j in range(terms)]
    ds = [random_doubly_stochastic(m, s) for _ in range(terms)]
    return make_standard("cds", stochastic=ds, instrument=fs)


def random_semi_causal(a: int, b: int, r: int, b_out: int, seed: int) -> ChoiChannel:
    s = Sampler(seed, "channel")
    v = s.isometry(b, r * b_out)
    e = random_channel((a, r, a, 1), seed + 7919)
    return make_standard("semi_causal_factored", E=e, V=v, r=r, b_out=b_out)
