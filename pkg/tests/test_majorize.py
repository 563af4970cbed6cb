import numpy as np
import pytest
from hypothesis import given, settings

from condent import channels as ch
from condent.entropy import UMEGAKI, conditional_entropy, hmin
from condent.errors import DimensionMismatch, InvalidParams, RankObstruction
from condent.majorize import (
    align_target,
    classical_cond_majorizes,
    cond_majorizes,
    joint_from_witness,
    majorizes,
    majorizes_via_sdp,
)
from condent.states import (
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
from condent.verify import engineered_pair, random_locally_balanced

from . import oracles
from .strategies import seeds


def diag_state(*p):
    return make_state(np.diag(p), len(p))


def test_pure_majorizes_everything():
    pure = sample_random((3, 1), "pure", 1)
    for seed in range(5):
        assert majorizes(pure, sample_random((3, 1), "ginibre", seed)).holds
    assert majorizes(sample_random((2, 1), "pure", 0), sample_random((4, 1), "ginibre", 0)).holds


def test_uniform_does_not_majorize_pure():
    v = majorizes(diag_state(0.5, 0.5), diag_state(1.0, 0.0))
    assert not v.holds and v.margin == pytest.approx(-0.5)
    assert not v


def test_majorizes_requires_unconditional():
    with pytest.raises(DimensionMismatch):
        majorizes(maximally_entangled(2), uniform(4))


def test_sdp_to_uniform_feasible():
    rho = sample_random((3, 1), "ginibre", 2)
    v = majorizes_via_sdp(rho, uniform(3))
    assert v.holds
    assert ch.check_properties(v.witness, 1e-6).cptp


def test_sdp_uniform_to_pure_infeasible():
    assert not majorizes_via_sdp(uniform(3), sample_random((3, 1), "pure", 0)).holds


@pytest.mark.parametrize("seed", range(6))
def test_spectral_and_sdp_agree(seed):
    r = sample_random((3, 1), "ginibre", seed)
    s = sample_random((3, 1), "ginibre", seed + 50)
    a = majorizes(r, s)
    if abs(a.margin) > 1e-4:
        assert a.holds == majorizes_via_sdp(r, s).holds


def test_cc_does_not_reach_phi():
    v = cond_majorizes(classical_correlated(2), maximally_entangled(2))
    assert not v.holds and v.margin < -1e-6


def test_phi_reaches_cc():
    v = cond_majorizes(maximally_entangled(2), classical_correlated(2))
    assert v.holds
    assert ch.check_properties(v.witness, 1e-5).locally_balanced


def test_reflexive():
    rho = sample_random((2, 2), "ginibre", 3)
    v = cond_majorizes(rho, rho)
    assert v.holds and v.margin >= -1e-6


def test_unknown_mode():
    rho = sample_random((2, 2), "ginibre", 3)
    with pytest.raises(InvalidParams):
        cond_majorizes(rho, rho, mode="unital")


def test_residual_matches_cvxpy():
    pytest.importorskip("cvxpy")
    for src, dst in ((classical_correlated(2), maximally_entangled(2)),
                     (sample_random((2, 2), "ginibre", 0), sample_random((2, 2), "ginibre", 1))):
        ours = cond_majorizes(src, dst)
        ref = oracles.cond_majorizes_cvxpy(src.matrix, 2, 2, dst.matrix, 2)
        assert ours.holds == (ref < 1e-6)
        if not ours.holds:
            assert -ours.margin == pytest.approx(ref, rel=1e-3, abs=1e-7)


def test_align_target_pads_smaller_a():
    rho = sample_random((3, 2), "ginibre", 0)
    sigma = sample_random((2, 2), "ginibre", 1)
    t = align_target(rho, sigma)
    assert t.shape == (6, 6)
    assert np.allclose(np.linalg.eigvalsh(t)[2:], np.linalg.eigvalsh(sigma.matrix))


def test_align_target_rotates_larger_a():
    rho = sample_random((2, 2), "ginibre", 0)
    phi_big = maximally_entangled(2)
    # embed Phi into a 3 x 2 system at coordinates 1, 2 of A'
    v = np.zeros((3, 2))
    v[1, 0] = v[2, 1] = 1
    big = np.kron(v, np.eye(2)) @ phi_big.matrix @ np.kron(v, np.eye(2)).T
    sigma = make_state(big, 3, 2)
    t = align_target(rho, sigma)
    assert t.shape == (4, 4)
    assert np.isclose(np.trace(t).real, 1)
    assert hmin(make_state(t, 2, 2)).value == pytest.approx(-1.0, abs=1e-9)


def test_rank_obstruction():
    with pytest.raises(RankObstruction):
        cond_majorizes(sample_random((2, 2), "ginibre", 0), sample_random((3, 2), "ginibre", 1))


def test_lb_feasible_implies_cu_feasible():
    for seed in range(3):
        r = sample_random((2, 2), "ginibre", seed)
        s = sample_random((2, 2), "ginibre", seed + 10)
        if cond_majorizes(r, s, "locally_balanced").holds:
            assert cond_majorizes(r, s, "conditionally_unital").holds
        s2 = ch.apply(random_locally_balanced(seed), r)
        assert cond_majorizes(r, s2, "conditionally_unital").holds


def test_trivial_b_matches_majorization():
    for seed in range(4):
        r = sample_random((3, 1), "ginibre", seed)
        s = sample_random((3, 1), "ginibre", seed + 20)
        a = majorizes(r, s)
        if abs(a.margin) > 1e-4:
            assert cond_majorizes(r, s).holds == a.holds


def test_transitivity_spot_check():
    r = sample_random((2, 2), "ginibre", 4)
    s = ch.apply(random_locally_balanced(1), r)
    t = ch.apply(random_locally_balanced(2), s)
    assert cond_majorizes(r, s).holds and cond_majorizes(s, t).holds
    assert cond_majorizes(r, t).holds


@settings(max_examples=5)
@given(seeds)
def test_monotone_consistency(seed):
    r = sample_random((2, 2), "ginibre", seed)
    s = ch.apply(random_locally_balanced(seed), r)
    assert cond_majorizes(r, s).holds
    assert hmin(s).value >= hmin(r).value - 1e-6
    assert conditional_entropy(UMEGAKI, s).value >= conditional_entropy(UMEGAKI, r).value - 1e-6


# ------------------------------------------------------------ classical


def test_classical_to_product_with_uniform_x():
    p = sample_joint((3, 2), 1)
    q = ClassicalJoint(np.outer(np.ones(3) / 3, [0.3, 0.7]))
    v = classical_cond_majorizes(p, q)
    assert v.holds
    q2 = joint_from_witness(p, v.witness.t, v.witness.d)
    assert np.allclose(q2.matrix, q.matrix, atol=1e-6)


def test_classical_reflexive():
    p = sample_joint((3, 3), 2)
    assert classical_cond_majorizes(p, p).holds


def test_classical_uniform_to_correlated_infeasible():
    u = ClassicalJoint(np.full((2, 2), 0.25))
    corr = ClassicalJoint(np.eye(2) / 2)
    assert not classical_cond_majorizes(u, corr).holds
    assert classical_cond_majorizes(corr, u).holds


def test_classical_row_padding():
    p = ClassicalJoint(np.array([[0.5, 0.5]]))
    q = ClassicalJoint(np.full((2, 2), 0.25))
    assert classical_cond_majorizes(p, q).holds
    assert not classical_cond_majorizes(q, p).holds


@pytest.mark.parametrize("seed", range(3))
def test_engineered_pairs_feasible(seed):
    p, q = engineered_pair(seed)
    assert classical_cond_majorizes(p, q).holds


def test_classical_agrees_with_quantum():
    pairs = [engineered_pair(7), (sample_joint((2, 2), 3), sample_joint((2, 2), 4)),
             (ClassicalJoint(np.full((2, 2), 0.25)), ClassicalJoint(np.eye(2) / 2))]
    for p, q in pairs:
        c = classical_cond_majorizes(p, q).holds
        assert c == cond_majorizes(classical_embed(p), classical_embed(q)).holds
