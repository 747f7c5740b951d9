import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from secrecy_relay.errors import NumericalDomainError, ValidationError
from secrecy_relay.info import (
    CovariancePair,
    JointPmf,
    conditional_mi,
    entropy,
    gaussian_conditional_mi,
    gaussian_mi_logdet,
    gaussian_mi_scalar,
    mutual_information,
)

from conftest import oracle_cmi


def h2(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def bsc_joint(eps):
    return JointPmf(0.5 * np.array([[1 - eps, eps], [eps, 1 - eps]]), ("a", "b"))


# --- entropy ---------------------------------------------------------------


def test_entropy_uniform_binary():
    assert entropy(JointPmf([0.5, 0.5], ["a"])) == 1.0


def test_entropy_point_mass():
    assert entropy(JointPmf([0.0, 1.0, 0.0], ["a"])) == 0.0


def test_entropy_quarter():
    # -(1/4 log 1/4 + 3/4 log 3/4), worked by hand: 0.5 + 0.75 * 0.415037...
    assert entropy(JointPmf([0.25, 0.75], ["a"])) == pytest.approx(0.8112781244591328, abs=1e-15)


def test_entropy_rejects_negative():
    with pytest.raises(ValidationError):
        JointPmf([1.2, -0.2], ["a"])


def test_entropy_rejects_unnormalized():
    with pytest.raises(ValidationError):
        JointPmf([0.5, 0.4], ["a"])


def test_renormalizes_within_tolerance():
    p = JointPmf([0.5, 0.5 + 5e-13], ["a"])
    assert p.probs.sum() == pytest.approx(1.0, abs=1e-15)


def test_joint_pmf_rejects_bad_names():
    with pytest.raises(ValidationError):
        JointPmf(np.full((2, 2), 0.25), ["a", "a"])
    with pytest.raises(ValidationError):
        JointPmf(np.full((2, 2), 0.25), ["a"])


def test_joint_pmf_size_cap():
    with pytest.raises(ValidationError):
        JointPmf(np.zeros(10**7 + 1), ["a"])


def test_joint_pmf_is_read_only():
    p = JointPmf([0.5, 0.5], ["a"])
    with pytest.raises(ValueError):
        p.probs[0] = 1.0


def test_marginal_order_follows_request():
    t = np.arange(1, 7, dtype=float).reshape(2, 3)
    p = JointPmf(t / t.sum(), ["a", "b"])
    np.testing.assert_allclose(p.marginal(["b", "a"]), (t / t.sum()).T)


def test_unknown_axis():
    with pytest.raises(ValidationError, match="unknown axis"):
        JointPmf([0.5, 0.5], ["a"]).marginal("z")


# --- mutual information ------------------------------------------------------


def test_mi_independent_bits():
    p = JointPmf(np.full((2, 2), 0.25), ["a", "b"])
    assert mutual_information(p, "a", "b") == 0.0


def test_mi_identity_channel():
    p = JointPmf(np.eye(2) / 2, ["a", "b"])
    assert mutual_information(p, "a", "b") == pytest.approx(1.0, abs=1e-15)


def test_mi_bsc_011():
    # 1 - h2(0.11), close to one half
    got = mutual_information(bsc_joint(0.11), "a", "b")
    assert got == pytest.approx(1 - h2(0.11), abs=1e-14)
    assert got == pytest.approx(0.5, abs=2e-3)


def test_mi_overlapping_groups():
    p = JointPmf(np.full((2, 2), 0.25), ["a", "b"])
    with pytest.raises(ValidationError):
        mutual_information(p, ("a", "b"), "b")


def test_cmi_irrelevant_condition():
    t = np.einsum("ab,c->abc", np.eye(2) / 2, [0.3, 0.7])
    p = JointPmf(t, ["a", "b", "c"])
    assert conditional_mi(p, "a", "b", "c") == pytest.approx(1.0, abs=1e-15)


def test_cmi_mutually_independent():
    t = np.einsum("a,b,c->abc", [0.2, 0.8], [0.6, 0.4], [0.1, 0.9])
    p = JointPmf(t, ["a", "b", "c"])
    assert conditional_mi(p, "a", "b", "c") == pytest.approx(0.0, abs=1e-15)


def test_cmi_empty_condition_is_mi(rng):
    t = rng.random((2, 3, 2))
    p = JointPmf(t / t.sum(), ["a", "b", "c"])
    assert conditional_mi(p, "a", "b") == mutual_information(p, "a", "b")


def test_cmi_matches_oracle_random(rng):
    for _ in range(20):
        t = rng.random((2, 2, 3))
        t /= t.sum()
        p = JointPmf(t, ["a", "b", "c"])
        assert conditional_mi(p, "a", "b", "c") == pytest.approx(
            oracle_cmi(t, "abc", "a", "b", "c"), abs=1e-12
        )
        # chain rule recombination I(A;B,C) - I(A;C)
        assert conditional_mi(p, "a", "b", "c") == pytest.approx(
            mutual_information(p, "a", ("b", "c")) - mutual_information(p, "a", "c"), abs=1e-12
        )


pmf_tensors = arrays(
    float, st.tuples(st.integers(1, 3), st.integers(1, 3), st.integers(1, 3)),
    elements=st.floats(0, 1, allow_nan=False),
).filter(lambda a: a.sum() > 1e-3)


@given(pmf_tensors)
def test_mi_bounds_property(t):
    p = JointPmf(t / t.sum(), ["a", "b", "c"])
    i = mutual_information(p, "a", "b")
    assert -1e-10 <= i <= min(entropy(p, "a"), entropy(p, "b")) + 1e-10


@given(pmf_tensors)
def test_chain_rule_property(t):
    p = JointPmf(t / t.sum(), ["a", "b", "c"])
    lhs = mutual_information(p, "a", ("b", "c"))
    rhs = mutual_information(p, "a", "c") + conditional_mi(p, "a", "b", "c")
    assert lhs == pytest.approx(rhs, abs=1e-10)


@given(pmf_tensors, st.permutations([0, 1, 2]))
def test_entropy_permutation_invariant(t, perm):
    names = ["a", "b", "c"]
    p = JointPmf(t / t.sum(), names)
    q = p.transpose([names[i] for i in perm])
    assert entropy(q) == pytest.approx(entropy(p), abs=1e-12)
    assert mutual_information(q, "a", "c") == pytest.approx(mutual_information(p, "a", "c"), abs=1e-12)


# --- Gaussian ----------------------------------------------------------------


@pytest.mark.parametrize("snr, expected", [(0.0, 0.0), (1.0, 0.5), (3.0, 1.0)])
def test_gaussian_scalar(snr, expected):
    assert gaussian_mi_scalar(snr) == expected


def test_gaussian_scalar_negative():
    with pytest.raises(ValidationError):
        gaussian_mi_scalar(-0.1)


def test_logdet_zero_signal():
    assert gaussian_mi_logdet(CovariancePair(np.zeros((2, 2)), np.eye(2))) == 0.0


def test_logdet_diagonal():
    got = gaussian_mi_logdet(CovariancePair(np.diag([3.0, 7.0]), np.eye(2)))
    assert got == pytest.approx(0.5 * math.log2(4 * 8), abs=1e-14)


def test_logdet_af_hand_expansion():
    # H = [[a, 0], [b, c]], noise diag(1, n2); det by hand
    a, b, c, p, g = 0.9 + 0.2j, 0.3 - 0.5j, 1.1j, 1.7, 0.5
    n2 = 1 + abs(g * 0.8) ** 2
    h = np.array([[a, 0], [b, c]])
    s = p * h @ h.conj().T
    det_sn = (p * abs(a) ** 2 + 1) * (p * (abs(b) ** 2 + abs(c) ** 2) + n2) - p**2 * abs(a) ** 2 * abs(b) ** 2
    expected = 0.5 * math.log2(det_sn / n2)
    got = gaussian_mi_logdet(CovariancePair(s, np.diag([1.0, n2])))
    assert got == pytest.approx(expected, abs=1e-12)


def test_logdet_scalar_agreement():
    for s, n in [(0.0, 1.0), (2.5, 0.7), (1e6, 3.0)]:
        got = gaussian_mi_logdet(CovariancePair([[s]], [[n]]))
        assert got == pytest.approx(gaussian_mi_scalar(s / n), abs=1e-12)


def test_logdet_singular_noise():
    with pytest.raises(NumericalDomainError):
        gaussian_mi_logdet(CovariancePair(np.eye(2), np.diag([1.0, 0.0])))


def test_covariance_pair_validation():
    with pytest.raises(ValidationError):
        CovariancePair(np.ones((2, 3)), np.eye(2))
    with pytest.raises(ValidationError):
        CovariancePair(np.array([[1, 1j], [1j, 1]]), np.eye(2))
    with pytest.raises(ValidationError):
        CovariancePair(np.eye(2), np.eye(3))


def test_gaussian_conditional_mi_scalar_case():
    # Y = X + Z, Var X = 4: covariance of (X, Y)
    cov = np.array([[4.0, 4.0], [4.0, 5.0]])
    assert gaussian_conditional_mi(cov, [0], [1]) == pytest.approx(0.5 * math.log2(5), abs=1e-12)
