import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from condent import channels as ch
from condent import linalg as la
from condent.entropy import (
    MAX_RELATIVE,
    STANDARD_KINDS,
    UMEGAKI,
    DivergenceKind,
    EntropyValue,
    conditional_entropy,
    hmin,
    hmin_given,
    hmin_up,
    parse_kind,
    petz,
    reduction_criterion,
    relative_entropy,
    sandwiched,
    von_neumann,
)
from condent.errors import DimensionMismatch, InvalidAlpha
from condent.states import (
    classical_correlated,
    embed_state,
    make_state,
    maximally_entangled,
    product,
    sample_random,
    tensor_states,
    uniform,
)

from . import oracles
from .strategies import seeds, states


def test_von_neumann_examples():
    assert von_neumann(uniform(4)).value == pytest.approx(2.0)
    assert von_neumann(sample_random((3, 2), "pure", 1)).value == pytest.approx(0.0, abs=1e-12)
    q = make_state(np.diag([0.75, 0.25]), 2)
    assert von_neumann(q).value == pytest.approx(2 - 0.75 * np.log2(3), abs=1e-12)


@pytest.mark.parametrize("kind", STANDARD_KINDS, ids=str)
def test_identical_arguments_give_zero(kind):
    rho = sample_random((2, 2), "ginibre", 3)
    assert relative_entropy(kind, rho.matrix, rho.matrix).value == pytest.approx(0.0, abs=1e-10)


def test_max_relative_phi_vs_uniform():
    d = relative_entropy(MAX_RELATIVE, maximally_entangled(2).matrix, np.eye(4) / 4)
    assert d.value == pytest.approx(2.0, abs=1e-12)


def test_petz_two_scalar():
    d = relative_entropy(petz(2), np.diag([0.5, 0.5]), np.diag([0.25, 0.75]))
    assert d.value == pytest.approx(np.log2(4 / 3), abs=1e-12)


def test_support_violation_is_infinite():
    r = np.diag([0.5, 0.5])
    s = np.diag([1.0, 0.0])
    for kind in (UMEGAKI, MAX_RELATIVE, petz(2), sandwiched(2)):
        v = relative_entropy(kind, r, s)
        assert v.value == np.inf and not v.is_finite
    assert np.isfinite(relative_entropy(petz(0.5), r, s).value)


def test_alpha_ranges():
    for bad in (0.0, 2.5, 1.0, -1):
        with pytest.raises(InvalidAlpha):
            petz(bad)
    for bad in (0.4, 1.0):
        with pytest.raises(InvalidAlpha):
            sandwiched(bad)
    with pytest.raises(InvalidAlpha):
        DivergenceKind("umegaki", 2.0)
    with pytest.raises(InvalidAlpha):
        parse_kind("petz")
    assert parse_kind("max") == MAX_RELATIVE
    assert sandwiched(50.0).alpha == 50.0


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        relative_entropy(UMEGAKI, np.eye(2) / 2, np.eye(3) / 3)


@pytest.mark.parametrize("seed", range(5))
def test_divergences_against_scipy(seed):
    r = sample_random((3, 1), "ginibre", seed).matrix
    s = sample_random((3, 1), "ginibre", seed + 100).matrix
    assert relative_entropy(UMEGAKI, r, s).value == pytest.approx(oracles.umegaki(r, s), abs=1e-8)
    for a in (0.5, 1.5, 2.0):
        assert relative_entropy(petz(a), r, s).value == pytest.approx(oracles.petz(r, s, a), abs=1e-8)
    for a in (0.5, 0.8, 2.0, 3.0):
        assert relative_entropy(sandwiched(a), r, s).value == pytest.approx(oracles.sandwiched(r, s, a), abs=1e-8)
    assert relative_entropy(MAX_RELATIVE, r, s).value == pytest.approx(oracles.max_relative(r, s), abs=1e-8)


def test_positive_powers_keep_tiny_eigenvalues():
    # smallest eigenvalues of the sandwiched operator here are about 1e-13 of the largest
    w = sample_random((3, 1), "ginibre", 6)
    t = sample_random((2, 1), "ginibre", 13648)
    rho = product(w, t)
    for kind in (petz(0.5), sandwiched(0.5), sandwiched(0.7)):
        assert conditional_entropy(kind, rho).value == pytest.approx(conditional_entropy(kind, w).value, abs=1e-12)
    r = np.diag([0.5, 0.5 - 1e-14, 1e-14])
    s = np.diag([1 / 3, 1 / 3, 1 / 3])
    expect = 2 * np.log2(np.sum(np.sqrt(np.diag(r) / 3)))
    assert relative_entropy(sandwiched(0.5), r, s).value == pytest.approx(-expect, abs=1e-12)


def test_renyi_limits_approach_umegaki():
    r = sample_random((3, 1), "ginibre", 7).matrix
    s = sample_random((3, 1), "ginibre", 8).matrix
    d = relative_entropy(UMEGAKI, r, s).value
    assert relative_entropy(petz(1 + 1e-5), r, s).value == pytest.approx(d, abs=1e-4)
    assert relative_entropy(sandwiched(1 - 1e-5), r, s).value == pytest.approx(d, abs=1e-4)


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_maximally_entangled_values(k):
    phi = maximally_entangled(k)
    for kind in STANDARD_KINDS:
        assert conditional_entropy(kind, phi).value == pytest.approx(-np.log2(k), abs=1e-7)
    assert hmin(phi).value == pytest.approx(-np.log2(k), abs=1e-9)
    assert hmin_up(phi).value == pytest.approx(-np.log2(k), abs=1e-6)


@pytest.mark.parametrize("d", [2, 3])
def test_uniform_product_gives_log_d(d):
    rho = product(uniform(d), sample_random((2, 1), "ginibre", 5))
    for kind in STANDARD_KINDS:
        assert conditional_entropy(kind, rho).value == pytest.approx(np.log2(d), abs=1e-9)
    assert hmin(rho).value == pytest.approx(np.log2(d), abs=1e-9)
    assert hmin_up(rho).value == pytest.approx(np.log2(d), abs=1e-6)


def test_cc_values():
    cc = classical_correlated(2)
    assert conditional_entropy(UMEGAKI, cc).value == pytest.approx(0.0, abs=1e-12)
    assert hmin(cc).value == pytest.approx(0.0, abs=1e-12)
    assert hmin_up(cc).value == pytest.approx(0.0, abs=1e-6)


def test_max_relative_kind_equals_hmin():
    rho = sample_random((2, 3), "ginibre", 2)
    assert conditional_entropy(MAX_RELATIVE, rho).value == pytest.approx(hmin(rho).value, abs=1e-12)


def test_hmin_up_matches_cvxpy():
    pytest.importorskip("cvxpy")
    for seed in range(4):
        rho = sample_random((2, 3), "ginibre", seed)
        expect = oracles.hmin_up_cvxpy(rho.matrix, 2, 3)
        assert hmin_up(rho).value == pytest.approx(expect, abs=1e-6)


def test_hmin_up_state_is_optimal():
    rho = sample_random((2, 2), "ginibre", 9)
    val, sigma = hmin_up(rho, return_state=True)
    assert np.isclose(np.trace(sigma).real, 1)
    assert hmin_given(rho, sigma).value == pytest.approx(val.value, abs=1e-6)
    assert val.value >= hmin(rho).value - 1e-9


def test_reduction_examples():
    holds, low = reduction_criterion(maximally_entangled(2))
    assert not holds and low == pytest.approx(-0.5)
    w = sample_random((2, 1), "ginibre", 1)
    t = sample_random((3, 1), "ginibre", 2)
    holds, low = reduction_criterion(product(w, t))
    assert holds and low >= -1e-12


def test_entropy_value_float():
    assert float(EntropyValue(1.5)) == 1.5


# ------------------------------------------------------------ properties


@settings(max_examples=40)
@given(states())
def test_lower_bound_by_hmin(rho):
    h = hmin(rho).value
    for kind in STANDARD_KINDS:
        assert conditional_entropy(kind, rho).value >= h - 1e-7


@settings(max_examples=10)
@given(states(dims=st.just((2, 2))))
def test_hmin_up_bounds(rho):
    up = hmin_up(rho).value
    assert up >= hmin(rho).value - 1e-9
    assert conditional_entropy(UMEGAKI, rho).value >= up - 1e-6


@settings(max_examples=15)
@given(states(dims=st.just((2, 2))), states(dims=st.just((2, 1))))
def test_additivity(rho, sigma):
    both = tensor_states(rho, sigma)
    for kind in STANDARD_KINDS:
        lhs = conditional_entropy(kind, both).value
        rhs = conditional_entropy(kind, rho).value + conditional_entropy(kind, sigma).value
        assert lhs == pytest.approx(rhs, abs=1e-8)


@given(seeds, seeds)
def test_product_reduces_to_entropy(s1, s2):
    w = sample_random((3, 1), "ginibre", s1)
    t = sample_random((2, 1), "ginibre", s2)
    rho = product(w, t)
    assert conditional_entropy(UMEGAKI, rho).value == pytest.approx(von_neumann(w).value, abs=1e-9)
    for kind in STANDARD_KINDS:
        assert conditional_entropy(kind, rho).value == pytest.approx(
            conditional_entropy(kind, w).value, abs=1e-9)


@given(states())
def test_embedding_invariance(rho):
    big = embed_state(rho, rho.dim_a + 1, rho.dim_b + 2)
    for kind in STANDARD_KINDS:
        a = conditional_entropy(kind, rho).value
        b = conditional_entropy(kind, big).value
        # the A embedding shifts log2|A| and the reference u_A together
        assert b == pytest.approx(a, abs=1e-9)


@settings(max_examples=15)
@given(seeds)
def test_data_processing(seed):
    r = sample_random((2, 2), "ginibre", seed).matrix
    s = sample_random((2, 2), "ginibre", seed + 1).matrix
    n = ch.random_channel((2, 2, 3, 1), seed)
    nr, ns = ch.apply_matrix(n, r), ch.apply_matrix(n, s)
    kinds = STANDARD_KINDS + (petz(1.5), sandwiched(0.7), sandwiched(5.0))
    for kind in kinds:
        assert relative_entropy(kind, nr, ns).value <= relative_entropy(kind, r, s).value + 1e-7


@settings(max_examples=15)
@given(seeds)
def test_monotone_under_locally_balanced(seed):
    rho = sample_random((2, 2), "ginibre", seed)
    if seed % 2:
        n = ch.random_b_controlled(2, 2, 2, 3, seed)
    else:
        n = ch.random_cds(2, 2, 2, 2, seed)
    out = ch.apply(n, rho)
    for kind in STANDARD_KINDS:
        assert conditional_entropy(kind, out).value >= conditional_entropy(kind, rho).value - 1e-7


@given(st.one_of(states(), states(kind="separable"), states(kind="pure")))
def test_reduction_iff_hmin_nonnegative(rho):
    holds, _ = reduction_criterion(rho)
    assert holds == (hmin(rho).value >= -1e-8)


@given(states(kind="separable"))
def test_separable_nonnegative(rho):
    assert reduction_criterion(rho)[0]
    for kind in STANDARD_KINDS:
        assert conditional_entropy(kind, rho).value >= -1e-7
