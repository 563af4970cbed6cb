"""Numerical verification suite for the conditional-entropy results.

Each ``check_*`` function covers one group of claims and returns a list of
``Case`` records.  ``run_verification_suite`` runs them all and produces a
deterministic ``VerifyReport`` for a fixed seed.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field, replace
from typing import Callable

import numpy as np

from . import channels as ch
from . import linalg as la
from .entropy import (
    STANDARD_KINDS,
    UMEGAKI,
    conditional_entropy,
    hmin,
    hmin_given,
    hmin_up,
    hmin_up_problem,
    reduction_criterion,
    von_neumann,
)
from .errors import CondentError
from .majorize import (
    classical_cond_majorizes,
    cond_majorization_problem,
    cond_majorizes,
    joint_from_witness,
    majorizes,
    majorizes_via_sdp,
)
from .sdp import ProblemBuilder, TraceTerm, check_feasible, solve
from .states import (
    BipartiteState,
    ClassicalJoint,
    Sampler,
    _trusted,
    classical_correlated,
    classical_embed,
    embed_state,
    make_state,
    marginal,
    maximally_entangled,
    product,
    sample_joint,
    sample_random,
    tensor_states,
    uniform,
)

_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class VerifyConfig:
    ks: tuple[int, ...] = (2, 3, 4, 5)
    random_dims: tuple[tuple[int, int], ...] = ((2, 2), (2, 3), (3, 3))
    n_random: int = 300
    n_separable: int = 100
    n_additivity: int = 50
    n_b_controlled: int = 50
    n_cds: int = 20
    n_embedding: int = 20
    n_product: int = 20
    n_predicate: int = 50
    n_classical: int = 100
    n_engineered: int = 20
    n_proof: int = 20
    n_majorize: int = 200
    n_cross: int = 50
    n_monotone: int = 100

    @classmethod
    def quick(cls) -> "VerifyConfig":
        """A reduced configuration that finishes in a few seconds."""
        return cls(ks=(2, 3), n_random=30, n_separable=10, n_additivity=5, n_b_controlled=5, n_cds=3,
                   n_embedding=3, n_product=3, n_predicate=10, n_classical=4, n_engineered=2, n_proof=3,
                   n_majorize=20, n_cross=6, n_monotone=5)


@dataclass
class Case:
    id: str
    description: str
    expected: object
    actual: object
    tolerance: float
    passed: bool


@dataclass
class VerifyReport:
    seed: int
    cases: list[Case] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    @property
    def summary(self) -> dict:
        n = len(self.cases)
        ok = sum(c.passed for c in self.cases)
        return {"total": n, "passed": ok, "failed": n - ok}

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "summary": self.summary,
            "passed": self.passed,
            "cases": [asdict(c) for c in self.cases],
        }


def _seed(seed: int, group: int, i: int) -> int:
    return (int(seed) * 1_000_003 + group * 100_003 + i) & _MASK


def _close(cid: str, desc: str, expected: float, actual: float, tol: float) -> Case:
    ok = bool(np.isfinite(actual) and abs(actual - expected) <= tol)
    return Case(cid, desc, float(expected), float(actual), tol, ok)


def _at_least(cid: str, desc: str, actual: float, bound: float) -> Case:
    """Pass when ``actual >= -bound`` (actual is a worst-case gap)."""
    return Case(cid, desc, f">= {-bound:g}", float(actual), bound, bool(actual >= -bound))


def _count(cid: str, desc: str, actual: int, tol: float = 0.0) -> Case:
    return Case(cid, desc, 0, int(actual), tol, actual == 0)


def _kind_id(kind) -> str:
    return str(kind).replace("(", "").replace(")", "")


def random_corpus(cfg: VerifyConfig, seed: int) -> list[BipartiteState]:
    """Ginibre states spread evenly over ``cfg.random_dims``."""
    nd = len(cfg.random_dims)
    return [sample_random(cfg.random_dims[i % nd], "ginibre", _seed(seed, 2, i)) for i in range(cfg.n_random)]


def separable_corpus(cfg: VerifyConfig, seed: int) -> list[BipartiteState]:
    nd = len(cfg.random_dims)
    return [sample_random(cfg.random_dims[i % nd], "separable", _seed(seed, 3, i)) for i in range(cfg.n_separable)]


# ---------------------------------------------------------------- 1-4: entropies


def check_max_entangled(cfg: VerifyConfig, seed: int) -> list[Case]:
    """Every conditional entropy equals -log2 k on the maximally entangled state."""
    out = []
    for k in cfg.ks:
        phi = maximally_entangled(k)
        target = -np.log2(k)
        for kind in STANDARD_KINDS:
            out.append(_close(f"1.k{k}.{_kind_id(kind)}", f"H_{kind}(A|B) of Phi^({k})", target,
                              conditional_entropy(kind, phi).value, 1e-7))
        out.append(_close(f"1.k{k}.hmin", f"H_min(A|B) of Phi^({k})", target, hmin(phi).value, 1e-9))
        out.append(_close(f"1.k{k}.hmin_up", f"optimized H_min(A|B) of Phi^({k})", target, hmin_up(phi).value, 1e-6))
    return out


def check_lower_bound(cfg: VerifyConfig, seed: int) -> list[Case]:
    """H(A|B) >= H_min(A|B) on random states, for every implemented entropy."""
    corpus = random_corpus(cfg, seed)
    out = []
    for dims in cfg.random_dims:
        states = [r for r in corpus if r.dims == dims]
        lows = [hmin(r).value for r in states]
        for kind in STANDARD_KINDS:
            gap = min(conditional_entropy(kind, r).value - h for r, h in zip(states, lows))
            out.append(_at_least(f"2.{dims[0]}x{dims[1]}.{_kind_id(kind)}",
                                 f"min over {len(states)} Ginibre states of H_{kind} - H_min", gap, 1e-6))
    return out


def check_reduction(cfg: VerifyConfig, seed: int) -> list[Case]:
    """Reduction criterion holds exactly when H_min(A|B) >= 0."""
    corpus = random_corpus(cfg, seed)
    seps = separable_corpus(cfg, seed)
    bad = 0
    for r in corpus + seps:
        holds, _ = reduction_criterion(r)
        if holds != (hmin(r).value >= -1e-8):
            bad += 1
    sep_fail = sum(not reduction_criterion(r)[0] for r in seps)
    return [
        _count("3.equivalence", f"disagreements between reduction criterion and H_min >= 0 on {len(corpus) + len(seps)} states", bad),
        _count("3.separable", f"separable states violating the reduction criterion (of {len(seps)})", sep_fail),
    ]


def _entropies(r: BipartiteState) -> np.ndarray:
    return np.array([conditional_entropy(kind, r).value for kind in STANDARD_KINDS])


def check_postulates(cfg: VerifyConfig, seed: int) -> list[Case]:
    """Additivity, monotonicity under locally balanced channels, embedding invariance, product reduction."""
    out = []
    kinds = [_kind_id(k) for k in STANDARD_KINDS]
    shapes = [(2, 2), (2, 1), (1, 2), (3, 2)]
    err = np.zeros(len(kinds))
    for i in range(cfg.n_additivity):
        r = sample_random((2, 2), "ginibre", _seed(seed, 4, i))
        s = sample_random(shapes[i % len(shapes)], "ginibre", _seed(seed, 5, i))
        both = _entropies(tensor_states(r, s))
        err = np.maximum(err, np.abs(both - _entropies(r) - _entropies(s)))
    for j, name in enumerate(kinds):
        out.append(_close(f"4.additivity.{name}", f"max additivity error over {cfg.n_additivity} pairs", 0.0, err[j], 1e-8))

    def mono(tag: str, group: int, n: int, make: Callable[[int], ch.ChoiChannel]):
        gap = np.full(len(kinds), np.inf)
        for i in range(n):
            n_ch = make(_seed(seed, group, i))
            r = sample_random(n_ch.dims[:2], "ginibre", _seed(seed, group + 1, i))
            gap = np.minimum(gap, _entropies(ch.apply(n_ch, r)) - _entropies(r))
        for j, name in enumerate(kinds):
            out.append(_at_least(f"4.monotone.{tag}.{name}", f"min of H(N(rho)) - H(rho) over {n} {tag} channels",
                                 gap[j], 1e-7))

    mono("b_controlled", 6, cfg.n_b_controlled,
         lambda s: ch.random_b_controlled(2, 2, 2 + s % 2, 3, s))
    mono("cds", 8, cfg.n_cds, lambda s: ch.random_cds(2, 2, 2, 2, s))

    err = np.zeros(len(kinds))
    for i in range(cfg.n_embedding):
        r = sample_random(cfg.random_dims[i % len(cfg.random_dims)], "ginibre", _seed(seed, 10, i))
        big = embed_state(r, r.dim_a + 1, r.dim_b + 1)
        err = np.maximum(err, np.abs(_entropies(big) - _entropies(r)))
    for j, name in enumerate(kinds):
        out.append(_close(f"4.embedding.{name}", f"max change under A and B embeddings over {cfg.n_embedding} states",
                          0.0, err[j], 1e-9))

    worst = 0.0
    for i in range(cfg.n_product):
        w = sample_random((2 + i % 2, 1), "ginibre", _seed(seed, 11, i))
        t = sample_random((2, 1), "ginibre", _seed(seed, 12, i))
        rho = product(w, t)
        worst = max(worst, abs(conditional_entropy(UMEGAKI, rho).value - von_neumann(w).value))
    out.append(_close("4.product", f"max |H(A|B) of omega (x) tau - H(A) of omega| over {cfg.n_product} pairs",
                      0.0, worst, 1e-9))
    return out


# ---------------------------------------------------------------- 5, 7: channels


def check_predicates(cfg: VerifyConfig, seed: int) -> list[Case]:
    """Classification of standard channels and agreement of the two predicate tests."""
    out = []
    named = {
        "identity": ch.identity(2, 2),
        "randomize_a": ch.local(ch.make_standard("randomizing", d=2), ch.identity(3)),
        "b_controlled": ch.random_b_controlled(2, 3, 2, 3, _seed(seed, 13, 0)),
        "cds": ch.random_cds(3, 2, 2, 2, _seed(seed, 13, 1)),
    }
    for name, n_ch in named.items():
        rep = ch.check_properties(n_ch)
        out.append(Case(f"5.classify.{name}", f"{name} is locally balanced", True, rep.locally_balanced,
                        ch.EPS_PROP, rep.locally_balanced and rep.cptp))
    rep = ch.check_properties(ch.swap(2))
    neither = not rep.conditionally_unital and not rep.semi_causal
    out.append(Case("5.classify.swap", "swap is neither conditionally unital nor semi-causal", True, neither,
                    ch.EPS_PROP, neither))

    families = [
        lambda s: ch.random_channel((2, 2, 2, 2), s),
        lambda s: ch.random_b_controlled(2, 2, 2, 2, s),
        lambda s: ch.random_cds(2, 2, 2, 2, s),
        lambda s: ch.random_semi_causal(2, 2, 2, 2, s),
        lambda s: ch.local(ch.make_standard("randomizing", d=2), ch.random_channel((2, 2), s)),
    ]
    verdict_bad = 0
    value_bad = 0.0
    for i in range(cfg.n_predicate):
        n_ch = families[i % len(families)](_seed(seed, 14, i))
        res = ch.check_properties(n_ch).residuals
        fun = ch.functional_residuals(n_ch)
        for key in ("conditionally_unital", "semi_causal"):
            if (res[key] <= ch.EPS_PROP) != (fun[key] <= ch.EPS_PROP):
                verdict_bad += 1
            if res[key] <= ch.EPS_PROP:
                value_bad = max(value_bad, abs(res[key] - fun[key]))
    out.append(_count("5.agreement.verdicts", f"predicate verdict disagreements over {cfg.n_predicate} channels",
                      verdict_bad, ch.EPS_PROP))
    out.append(_close("5.agreement.residuals", "max |Choi residual - functional residual| where the property holds",
                      0.0, value_bad, 1e-8))
    return out


def _proof_states(cfg: VerifyConfig, seed: int) -> tuple[list, list]:
    nonneg, neg = [], []
    i = 0
    while len(nonneg) < cfg.n_proof or len(neg) < cfg.n_proof:
        kind = ("ginibre", "pure", "separable")[i % 3]
        r = sample_random((2, 2 + (i // 3) % 2), kind, _seed(seed, 15, i))
        regime = ch.sign_regime(hmin(r).value)
        if regime == "nonneg" and len(nonneg) < cfg.n_proof:
            nonneg.append(r)
        elif regime == "neg" and len(neg) < cfg.n_proof:
            neg.append(r)
        i += 1
    return nonneg, neg


def _proof_case(cid: str, desc: str, n_ch: ch.ChoiChannel, need_sc: bool) -> Case:
    rep = ch.check_properties(n_ch)
    res = rep.residuals
    ident = la.max_abs(ch.apply_matrix(n_ch, n_ch.info["identity_input"]) - n_ch.info["identity_output"])
    worst = max(res["cp"], res["tp"], res["conditionally_unital"], ident)
    if need_sc:
        worst = max(worst, res["semi_causal"])
    return Case(cid, desc, 0.0, float(worst), 1e-8, bool(worst <= 1e-8))


def check_proof_channels(cfg: VerifyConfig, seed: int) -> list[Case]:
    """The extremal conversion channels are valid and realize their defining identities."""
    nonneg, neg = _proof_states(cfg, seed)
    u_rho = product(uniform(2), sample_random((2, 1), "ginibre", _seed(seed, 16, 0)))
    special = [("phi2", maximally_entangled(2)), ("cc", classical_correlated(2)), ("u_rho", u_rho)]
    items = [(f"nonneg{i}", r) for i, r in enumerate(nonneg)] + [(f"neg{i}", r) for i, r in enumerate(neg)] + special
    out = []
    for name, r in items:
        variant = ch.sign_regime(hmin(r).value)
        n_ch = ch.make_proof_channel(variant, r)
        out.append(_proof_case(f"7.{name}.marginal", f"{variant} channel with sigma_B = rho_B", n_ch, True))
        _, sig = hmin_up(r, return_state=True)
        variant = ch.sign_regime(hmin_given(r, sig).value)
        n_ch = ch.make_proof_channel(variant, r, sig)
        out.append(_proof_case(f"7.{name}.optimal", f"{variant} channel with the optimal sigma_B", n_ch, False))
    for k in (2, 3):
        out.append(_proof_case(f"7.maxent.k{k}", f"maximally entangled flag channel, k={k}",
                               ch.make_proof_channel("maxent", k=k), True))
    return out


# ---------------------------------------------------------------- 6, 8, 9: orders


def engineered_pair(seed: int, shape=(3, 3)) -> tuple[ClassicalJoint, ClassicalJoint]:
    """(P, Q) with Q built from an explicit row-stochastic T and doubly stochastic D."""
    p = sample_joint(shape, seed)
    s = Sampler(seed, "misc")
    m, n = shape
    t = np.stack([s.dirichlet(n) for _ in range(n)])
    d = np.stack([[ch.random_doubly_stochastic(m, s) for _ in range(n)] for _ in range(n)])
    return p, joint_from_witness(p, t, d)


def check_classical(cfg: VerifyConfig, seed: int) -> list[Case]:
    """Classical LP and quantum SDP agree on embedded classical pairs."""
    pairs = [(sample_joint((3, 3), _seed(seed, 17, 2 * i)), sample_joint((3, 3), _seed(seed, 17, 2 * i + 1)))
             for i in range(cfg.n_classical)]
    eng = [engineered_pair(_seed(seed, 18, i)) for i in range(cfg.n_engineered)]
    bad = 0
    eng_missed = 0
    n_true = 0
    for j, (p, q) in enumerate(pairs + eng):
        c = classical_cond_majorizes(p, q).holds
        qv = cond_majorizes(classical_embed(p), classical_embed(q)).holds
        bad += c != qv
        n_true += c
        if j >= len(pairs) and not (c and qv):
            eng_missed += 1
    return [
        _count("6.agreement", f"classical/quantum disagreements on {len(pairs)} random + {len(eng)} engineered pairs "
               f"({n_true} feasible)", bad),
        _count("6.engineered", f"engineered pairs not found feasible (of {len(eng)})", eng_missed),
    ]


def _unital_image(r: BipartiteState, s: Sampler) -> BipartiteState:
    w = s.dirichlet(3)
    m = sum(wi * (u @ r.matrix @ u.conj().T) for wi, u in zip(w, (s.unitary(r.dim) for _ in range(3))))
    return make_state(la.hermitize(m), r.dim_a, 1)


def check_majorization(cfg: VerifyConfig, seed: int) -> list[Case]:
    """Partial-sum majorization agrees with the unital-channel SDP."""
    bad = 0
    n_true = 0
    for i in range(cfg.n_majorize):
        r = sample_random((3, 1), "ginibre", _seed(seed, 19, i))
        if i % 2:
            s = _unital_image(r, Sampler(_seed(seed, 20, i)))
        else:
            s = sample_random((3, 1), "ginibre", _seed(seed, 21, i))
        a = majorizes(r, s).holds
        bad += a != majorizes_via_sdp(r, s).holds
        n_true += a
    cross_bad = 0
    for i in range(cfg.n_cross):
        d1, d2 = (2, 3) if i % 2 == 0 else (3, 2)
        r = sample_random((d1, 1), "ginibre", _seed(seed, 22, i))
        s = sample_random((d2, 1), "ginibre", _seed(seed, 23, i))
        cross_bad += majorizes(r, s).holds != majorizes_via_sdp(r, s).holds
    return [
        _count("8.same_dim", f"disagreements on {cfg.n_majorize} dimension-3 pairs ({n_true} majorizing)", bad),
        _count("8.cross_dim", f"disagreements on {cfg.n_cross} pairs of dimensions 2 and 3", cross_bad),
    ]


def random_locally_balanced(seed: int) -> ch.ChoiChannel:
    """A random locally balanced channel on 2 x 2 with B' of dimension 2."""
    pick = seed % 3
    if pick == 0:
        return ch.random_b_controlled(2, 2, 2, 3, seed)
    if pick == 1:
        return ch.random_cds(2, 2, 2, 2, seed)
    return ch.compose(ch.random_b_controlled(2, 2, 2, 2, seed), ch.random_cds(2, 2, 2, 2, seed + 1))


def check_monotone(cfg: VerifyConfig, seed: int) -> list[Case]:
    """Conditional majorization implies the entropies do not decrease."""
    infeasible = 0
    gap_min = np.inf
    gap_vn = np.inf
    for i in range(cfg.n_monotone):
        r = sample_random((2, 2), "ginibre", _seed(seed, 24, i))
        s = ch.apply(random_locally_balanced(_seed(seed, 25, i)), r)
        if not cond_majorizes(r, s).holds:
            infeasible += 1
            continue
        gap_min = min(gap_min, hmin(s).value - hmin(r).value)
        gap_vn = min(gap_vn, conditional_entropy(UMEGAKI, s).value - conditional_entropy(UMEGAKI, r).value)
    return [
        _count("9.feasible", f"pairs (rho, N(rho)) not found feasible (of {cfg.n_monotone})", infeasible),
        _at_least("9.hmin", "min H_min(sigma) - H_min(rho) over feasible pairs", gap_min, 1e-6),
        _at_least("9.umegaki", "min H(sigma) - H(rho) over feasible pairs", gap_vn, 1e-6),
    ]


# ---------------------------------------------------------------- 10: solver


def solver_examples() -> dict:
    """The small solver problems with known answers, as (problem, expected) pairs."""
    out = {}
    pb = ProblemBuilder()
    x = pb.psd(2)
    pb.add_rows([(x, [[0, 1, 0, 0]])], [1.0])  # off-diagonal entries equal 1
    pb.add_rows([(x, [[1, 0, 0, -1]])], [0.0])  # equal diagonal
    pb.set_objective(x, np.eye(2) / 2)
    out["solve.psd_boundary"] = (pb.build(), 1.0)
    out["solve.hmin_up_phi2"] = (hmin_up_problem(maximally_entangled(2), "scaled"), -0.5)
    pb = ProblemBuilder()
    x = pb.psd(2)
    s = pb.psd(2)
    pb.add_matrix_equality([TraceTerm(x), TraceTerm(s, scale=-1.0)], np.diag([1.0, 2.0]))
    pb.set_objective(x, np.eye(2))
    out["solve.shifted_trace"] = (pb.build(), 3.0)
    return out


def check_solver(cfg: VerifyConfig, seed: int) -> list[Case]:
    out = []
    ex = solver_examples()
    sol = solve(ex["solve.psd_boundary"][0])
    out.append(_close("10.solve.psd_boundary", "min x s.t. [[x,1],[1,x]] PSD", 1.0, sol.objective_value, 1e-7))
    sol = solve(ex["solve.hmin_up_phi2"][0])
    out.append(_close("10.solve.hmin_up_phi2", "optimal scale mu* of the min-entropy SDP for Phi^(2)", 0.5,
                      -sol.objective_value, 1e-7))
    sol = solve(ex["solve.shifted_trace"][0])
    out.append(_close("10.solve.shifted_trace", "min Tr X s.t. X >= diag(1,2)", 3.0, sol.objective_value, 1e-7))

    pb = ProblemBuilder()
    x = pb.psd(2)
    pb.add_rows([(x, np.eye(2).reshape(1, -1))], [1.0])
    res = check_feasible(pb.build())
    out.append(Case("10.feasible.unit_trace", "{X PSD, Tr X = 1} is feasible", True, bool(res.feasible), 1e-7,
                    bool(res.feasible and res.slack <= 1e-7)))
    out.append(Case("10.feasible.unit_trace_witness", "returned witness is PSD with unit trace",
                    1.0, float(np.real(np.trace(res.witness[0]))) if res.feasible else np.nan, 1e-7,
                    bool(res.feasible and abs(np.trace(res.witness[0]) - 1) <= 1e-7
                         and np.linalg.eigvalsh(res.witness[0])[0] >= -1e-7)))
    pb = ProblemBuilder()
    s = pb.psd(2)
    pb.add_rows([(s, np.eye(2).reshape(1, -1))], [-1.0])  # X = I + S, Tr X = 1
    res = check_feasible(pb.build())
    out.append(Case("10.feasible.above_identity", "{X >= I, Tr X = 1} is infeasible with slack >= 1/2",
                    False, bool(res.feasible), 1e-7, bool(not res.feasible and res.slack >= 0.5 - 1e-7)))

    rho = sample_random((2, 2), "ginibre", _seed(seed, 26, 0))
    target = product(uniform(2), marginal(rho, "B"))
    res = cond_majorizes(rho, target)
    wit = ch.local(ch.make_standard("randomizing", d=2), ch.identity(2))
    prob = cond_majorization_problem(rho, target.matrix, 2)
    wit_res = float(np.max(np.abs(prob.evaluate([wit.choi]) - prob.rhs)))
    rep = ch.check_properties(wit)
    ok = res.holds and wit_res <= 1e-7 and rep.locally_balanced and rep.cptp
    out.append(Case("10.feasible.randomize_witness", "(rho, u_A (x) rho_B) is feasible; randomize-A witness checks",
                    True, bool(res.holds), 1e-7, bool(ok)))
    return out


CHECKS: dict[int, Callable[[VerifyConfig, int], list[Case]]] = {
    1: check_max_entangled,
    2: check_lower_bound,
    3: check_reduction,
    4: check_postulates,
    5: check_predicates,
    6: check_classical,
    7: check_proof_channels,
    8: check_majorization,
    9: check_monotone,
    10: check_solver,
}


def run_check(number: int, seed: int = 0, config: VerifyConfig | None = None) -> list[Case]:
    cfg = config or VerifyConfig()
    try:
        return CHECKS[number](cfg, seed)
    except CondentError as exc:
        return [Case(f"{number}.error", "check raised an error", "no error", f"{type(exc).__name__}: {exc}", 0.0, False)]


def _case_key(c: Case):
    head, _, rest = c.id.partition(".")
    return (int(head), rest)


def run_verification_suite(seed: int = 0, sizes=None, config: VerifyConfig | None = None) -> VerifyReport:
    """Run every check; ``sizes`` overrides the k values of the maximally entangled family."""
    cfg = config or VerifyConfig()
    if sizes is not None:
        cfg = replace(cfg, ks=tuple(int(k) for k in sizes))
    start = time.perf_counter()
    cases = []
    for n in CHECKS:
        cases.extend(run_check(n, seed, cfg))
    cases.sort(key=_case_key)
    return VerifyReport(int(seed), cases, time.perf_counter() - start)
