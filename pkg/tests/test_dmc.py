import json
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from secrecy_relay.channels import RelayDmc, is_reversely_degraded
from secrecy_relay.dmc import (
    CfDesign,
    InputDesign,
    best_over_grid,
    cf_max_r0,
    cf_point,
    deaf_nf_point,
    df_point,
    nf_point,
    outer_bound_point,
    reversely_degraded_rate,
)
from secrecy_relay.errors import BudgetExceededError, ContractError, ValidationError
from secrecy_relay.experiment import bundled_path
from secrecy_relay.optimize import simplex_array

from conftest import cf_loop_joint, loop_joint, oracle_cmi, random_dmc, random_pmf

NAMES = ("v1", "v2", "x1", "x2", "y", "y1", "y2")


def I(j, a, b, cond=(), names=NAMES):
    return oracle_cmi(j, names, a, b, cond)


def plus(v):
    return max(v, 0.0)


def random_instance(rng):
    sizes = tuple(rng.integers(1, 3, 5) + np.array([1, 0, 1, 1, 1]))
    c = random_dmc(rng, sizes, sparsity=float(rng.choice([0.0, 0.3])))
    n1, n2 = sizes[:2]
    v1, v2 = rng.integers(1, 4, 2)
    pv1, pv2 = random_pmf(rng, v1), random_pmf(rng, v2)
    k1 = rng.dirichlet(np.ones(n1), size=v1)
    k2 = rng.dirichlet(np.ones(n2), size=v2)
    return c, pv1, pv2, k1, k2


@pytest.fixture(scope="module")
def instances():
    rng = np.random.default_rng(2718)
    return [random_instance(rng) for _ in range(50)]


def test_df_nf_deaf_match_oracle(instances):
    for c, pv1, pv2, k1, k2 in instances:
        j = loop_joint(c, np.outer(pv1, pv2), k1, k2)
        d = InputDesign.product(pv1, pv2, (k1, k2))

        i_y = I(j, ("v1", "v2"), "y")
        r1_df = min(i_y, I(j, "v1", "y1", "v2"))
        got = df_point(c, d)
        assert got.r1_max == pytest.approx(r1_df, abs=1e-12)
        assert got.re_max == pytest.approx(min(r1_df, plus(r1_df - I(j, ("v1", "v2"), "y2"))), abs=1e-12)

        i1 = I(j, "v1", "y", "v2")
        i2y = I(j, "v2", "y")
        pre = i1 + min(i2y, I(j, "v2", "y2", "v1")) - min(i2y, I(j, "v2", "y2")) - I(j, "v1", "y2", "v2")
        nf = nf_point(c, d)
        assert nf.r1_max == pytest.approx(i1, abs=1e-12)
        assert nf.re_max == pytest.approx(min(i1, plus(pre)), abs=1e-12)

        r_s2 = plus(i1 - I(j, "v1", "y1", "x2"))
        deaf = deaf_nf_point(c, d)
        assert deaf.re_max == pytest.approx(min(min(i1, plus(pre)), r_s2), abs=1e-12)


def test_outer_matches_oracle(instances):
    rng = np.random.default_rng(31)
    names = ("u",) + NAMES
    for c, _, _, _, _ in instances[:20]:
        n1, n2 = c.transition.shape[:2]
        juv = rng.dirichlet(np.ones(2 * n1 * n2)).reshape(2, n1, n2)
        j = np.einsum("uab,abcde->uabcde", juv, c.transition)
        got = outer_bound_point(c, InputDesign(joint_uv=juv))
        i_y = oracle_cmi(j, names[:1] + names[3:], ("x1", "x2"), "y")
        r1 = min(i_y, oracle_cmi(j, names[:1] + names[3:], "x1", ("y", "y1"), "x2"))
        diff = oracle_cmi(j, names[:1] + names[3:], ("x1", "x2"), "y", "u") - oracle_cmi(
            j, names[:1] + names[3:], ("x1", "x2"), "y2", "u"
        )
        assert got.r1_max == pytest.approx(r1, abs=1e-12)
        assert got.re_max == pytest.approx(min(r1, plus(diff)), abs=1e-12)


def test_cf_matches_oracle(instances):
    rng = np.random.default_rng(5)
    names = ("x1", "x2", "y", "y1", "y2", "yq")
    for c, _, _, _, _ in instances:
        n1, n2, _, n_y1, _ = c.transition.shape
        px1, px2 = random_pmf(rng, n1), random_pmf(rng, n2)
        q = rng.dirichlet(np.ones(2), size=(n_y1, n2))
        j = cf_loop_joint(c, px1, px2, q)
        relay = min(oracle_cmi(j, names, "x2", "y"), oracle_cmi(j, names, "x2", "y2", "x1"))
        rate_q = oracle_cmi(j, names, "y1", "yq", "x2")
        main = oracle_cmi(j, names, "x1", ("yq", "y"), "x2")
        tap = oracle_cmi(j, names, "x1", ("yq", "y2"), "x2")
        r0 = max(relay - rate_q, 0.0)
        assert cf_max_r0(c, CfDesign(px1, px2, q)) == pytest.approx(r0, abs=1e-12)
        pt = cf_point(c, CfDesign(px1, px2, q, r0))
        pre = r0 + main - oracle_cmi(j, names, ("x1", "x2"), "y2")
        formula = min(main, plus(pre))
        assert pt.applicable == (main <= tap + 1e-12)
        if pt.applicable and pt.feasible:
            assert pt.r1_max == pytest.approx(main, abs=1e-12)
            assert pt.re_max == pytest.approx(formula, abs=1e-12)
        else:
            assert pt.re_max == 0.0
            assert pt.terms["re_formula"] == pytest.approx(formula, abs=1e-12)


def test_cf_infeasible_r0():
    c = random_dmc(np.random.default_rng(1))
    d = CfDesign([0.5, 0.5], [0.5, 0.5], np.full((2, 2, 2), 0.5), r0=10.0)
    assert not cf_point(c, d).feasible


def applicable_dmcs(rng, n):
    """Random binary DMCs on which CF with a constant quantizer is in regime."""
    out = []
    while len(out) < n:
        c = random_dmc(rng)
        p1, p2 = random_pmf(rng, 2), random_pmf(rng, 2)
        d = CfDesign(p1, p2, np.ones((2, 2, 1)))
        d = CfDesign(p1, p2, d.quantizer, cf_max_r0(c, d))
        pt = cf_point(c, d)
        if pt.applicable:
            out.append((c, p1, p2, pt))
    return out


def test_cf_constant_quantizer_is_nf():
    for c, p1, p2, pt in applicable_dmcs(np.random.default_rng(77), 50):
        nf = nf_point(c, InputDesign.product(p1, p2))
        assert pt.r1_max == pytest.approx(nf.r1_max, abs=1e-12)
        assert pt.re_max == pytest.approx(nf.re_max, abs=1e-12)


def test_cf_re_monotone_in_r0():
    c = random_dmc(np.random.default_rng(9))
    q = np.full((2, 2, 2), 0.5)
    prev = -1.0
    for r0 in np.linspace(0, cf_max_r0(c, CfDesign([0.5, 0.5], [0.5, 0.5], q)), 6):
        pt = cf_point(c, CfDesign([0.5, 0.5], [0.5, 0.5], q, r0))
        pre = pt.terms["pre_clamp"]
        assert pre >= prev
        prev = pre


def test_nf_silent_relay_symbol(rng):
    # |V2| = 1: NF collapses to the wiretap rate [I(V1;Y) - I(V1;Y2)]^+
    for _ in range(100):
        c = random_dmc(rng)
        pv1 = random_pmf(rng, 2)
        k2 = random_pmf(rng, 2)[None]
        d = InputDesign.product(pv1, [1.0], (np.eye(2), k2))
        j = loop_joint(c, np.outer(pv1, [1.0]), np.eye(2), k2)
        want = plus(I(j, "v1", "y") - I(j, "v1", "y2"))
        assert nf_point(c, d).re_max == pytest.approx(want, abs=1e-12)


def test_nf_needs_product():
    c = random_dmc(np.random.default_rng(0))
    with pytest.raises(ContractError):
        nf_point(c, InputDesign.joint(np.full((2, 2), 0.25)))
    joint_prefix = np.zeros((2, 2, 2, 2))
    joint_prefix[:, :, 0, 0] = joint_prefix[:, :, 1, 1] = 0.5
    with pytest.raises(ContractError):
        nf_point(c, InputDesign.product([0.5, 0.5], [0.5, 0.5], joint_prefix))


def test_outer_needs_u_axis():
    c = random_dmc(np.random.default_rng(0))
    d = InputDesign.joint(np.full((2, 2), 0.25))
    with pytest.raises(ContractError):
        outer_bound_point(c, d)
    assert outer_bound_point(c, d.with_constant_u()).r1_max >= 0


def test_design_validation():
    with pytest.raises(ValidationError):
        InputDesign(pv1=[0.5, 0.5])
    with pytest.raises(ValidationError):
        InputDesign(pv1=[0.5, 0.5], pv2=[1.0], joint_pv=np.eye(2) / 2)
    with pytest.raises(ValidationError):
        InputDesign.product([0.7, 0.7], [1.0])
    c = random_dmc(np.random.default_rng(0), (3, 2, 2, 2, 2))
    with pytest.raises(ValidationError):
        nf_point(c, InputDesign.product([0.5, 0.5], [0.5, 0.5]))


def test_deaf_relay_equals_destination():
    # Y1 = Y: the relay learns as much as the destination, so deaf NF is 0
    rng = np.random.default_rng(3)
    for _ in range(10):
        base = random_dmc(rng, (2, 2, 2, 1, 2)).transition
        t = np.zeros((2, 2, 2, 2, 2))
        for y in range(2):
            t[:, :, y, y, :] = base[:, :, y, 0, :]
        c = RelayDmc(t)
        d = InputDesign.product(random_pmf(rng, 2), random_pmf(rng, 2))
        assert deaf_nf_point(c, d).re_max == pytest.approx(0.0, abs=1e-12)


def test_deaf_below_nf(instances):
    for c, pv1, pv2, k1, k2 in instances:
        d = InputDesign.product(pv1, pv2, (k1, k2))
        assert deaf_nf_point(c, d).re_max <= nf_point(c, d).re_max + 1e-12


def test_eavesdropper_sees_destination_output(rng):
    # Y2 = Y: every strategy's secrecy rate vanishes
    for _ in range(10):
        base = random_dmc(rng, (2, 2, 2, 2, 1)).transition
        t = np.zeros((2, 2, 2, 2, 2))
        for y in range(2):
            t[:, :, y, :, y] = base[:, :, y, :, 0]
        c = RelayDmc(t)
        d = InputDesign.product(random_pmf(rng, 2), random_pmf(rng, 2))
        assert df_point(c, d).re_max == pytest.approx(0.0, abs=1e-12)
        assert nf_point(c, d).re_max == pytest.approx(0.0, abs=1e-12)
        assert outer_bound_point(c, d.with_constant_u()).re_max == pytest.approx(0.0, abs=1e-12)


@given(st.integers(0, 2**32 - 1), st.permutations(range(3)))
def test_output_relabel_invariance(seed, perm):
    rng = np.random.default_rng(seed)
    c = random_dmc(rng, (2, 2, 3, 3, 3))
    d = InputDesign.product(random_pmf(rng, 2), random_pmf(rng, 2))
    perm = list(perm)
    relabeled = RelayDmc(c.transition[:, :, perm][:, :, :, perm][:, :, :, :, perm])
    for fn in (df_point, nf_point, deaf_nf_point):
        assert fn(relabeled, d).re_max == pytest.approx(fn(c, d).re_max, abs=1e-12)


# --- grid search --------------------------------------------------------------


@pytest.mark.parametrize("strategy", ["outer", "df", "nf", "deaf_nf"])
def test_grid_monotone_in_k(strategy):
    rng = np.random.default_rng(100)
    for _ in range(3):
        c = random_dmc(rng)
        for k in (2, 3, 5):
            a, _ = best_over_grid(c, strategy, k)
            b, _ = best_over_grid(c, strategy, 2 * k)
            assert b.re_max >= a.re_max - 1e-15


def test_grid_cf_monotone_small():
    c = random_dmc(np.random.default_rng(4), (2, 2, 2, 2, 2))
    a, _ = best_over_grid(c, "cf", 1, yq_size=2)
    b, _ = best_over_grid(c, "cf", 2, yq_size=2)
    assert b.re_max >= a.re_max - 1e-15


def test_grid_k1_is_best_deterministic(rng):
    for _ in range(5):
        c = random_dmc(rng)
        best = max(
            nf_point(c, InputDesign.product(np.eye(2)[a], np.eye(2)[b])).re_max
            for a in range(2) for b in range(2)
        )
        assert best_over_grid(c, "nf", 1)[0].re_max == best


def test_grid_binary_wiretap_oracle():
    # relay disconnected: NF on a binary wiretap channel, 1-D oracle over p(x1 = 1)
    bsc = lambda e: np.array([[1 - e, e], [e, 1 - e]])  # noqa: E731
    main, tap = bsc(0.05), bsc(0.2)
    t = np.einsum("ay,aw->ayw", main, tap)
    c = RelayDmc(np.broadcast_to(t[:, None, :, None, :], (2, 1, 2, 1, 2)).copy())
    pt, design = best_over_grid(c, "nf", 50)

    def h(p):
        return 0.0 if p in (0, 1) else -p * np.log2(p) - (1 - p) * np.log2(1 - p)

    def rate(p):
        return (h(p * 0.95 + (1 - p) * 0.05) - h(0.05)) - (h(p * 0.8 + (1 - p) * 0.2) - h(0.2))

    oracle = max(rate(i / 50) for i in range(51))
    assert pt.re_max == pytest.approx(oracle, abs=1e-12)
    assert pt.re_max == pytest.approx(h(0.2) - h(0.05), abs=1e-12)


def test_grid_budget_message():
    c = random_dmc(np.random.default_rng(0), (3, 3, 2, 3, 2))
    with pytest.raises(BudgetExceededError, match="simplex"):
        best_over_grid(c, "cf", 10, budget=10**4)


def test_grid_threads_same_answer():
    c = random_dmc(np.random.default_rng(8))
    a = best_over_grid(c, "df", 6, threads=1)
    b = best_over_grid(c, "df", 6, threads=4)
    assert a[0].re_max == b[0].re_max
    assert a[1].to_dict() == b[1].to_dict()


def test_grid_first_design_wins_ties():
    # all-zero channel: every design gives 0, so the first is kept
    t = np.zeros((2, 2, 1, 1, 1))
    t[..., 0, 0, 0] = 1.0
    pt, d = best_over_grid(RelayDmc(t), "nf", 3)
    assert pt.re_max == 0.0
    first = simplex_array(2, 3)[0]
    assert d.pv1.tolist() == first.tolist() and d.pv2.tolist() == first.tolist()


def test_grid_unknown_strategy():
    with pytest.raises(ValidationError):
        best_over_grid(random_dmc(np.random.default_rng(0)), "af", 3)


# --- bundled channels ---------------------------------------------------------


def load_bundled(name):
    return RelayDmc.from_json(json.loads(bundled_path(name).read_text()))


def h2(p):
    return -p * np.log2(p) - (1 - p) * np.log2(1 - p)


# bundled binary channel: Y = X1 + BSC(0.05), Y1 = X1 + BSC(0.1),
# Y2 = X1 xor X2 + BSC(0.15).  A uniform relay symbol blinds the
# eavesdropper, leaving h2(0.15) - h2(0.05) bits of secrecy.
BINARY_NF_UNIFORM = 0.3234433476004446


def test_bundled_binary_nf_value():
    c = load_bundled("binary_relay.json")
    d = InputDesign.product([0.5, 0.5], [0.5, 0.5])
    j = loop_joint(c, np.full((2, 2), 0.25), np.eye(2), np.eye(2))
    i1, i2y = I(j, "v1", "y", "v2"), I(j, "v2", "y")
    pre = i1 + min(i2y, I(j, "v2", "y2", "v1")) - min(i2y, I(j, "v2", "y2")) - I(j, "v1", "y2", "v2")
    got = nf_point(c, d).re_max
    assert got == pytest.approx(min(i1, plus(pre)), abs=1e-12)
    assert got == pytest.approx(BINARY_NF_UNIFORM, abs=1e-12)
    assert got == pytest.approx(h2(0.15) - h2(0.05), abs=1e-12)


def test_bundled_degraded_channel():
    c = load_bundled("reversely_degraded.json")
    assert is_reversely_degraded(c).degraded
    d = InputDesign.product([0.5, 0.5], [0.5, 0.5])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        r = reversely_degraded_rate(c, d)
    assert r.re_max == nf_point(c, d).re_max
    assert r.terms["degradedness_violation"] < 1e-12


def test_degraded_rate_warns_on_general_channel():
    t = np.zeros((2, 1, 2, 2, 1))
    for a in range(2):
        t[a, 0, :, a, 0] = 0.5
    with pytest.warns(UserWarning, match="not reversely degraded"):
        reversely_degraded_rate(RelayDmc(t), InputDesign.product([0.5, 0.5], [1.0]))


# --- degenerate receivers and structural invariants ---------------------------


def _with_constant(c, axis):
    """Collapse output ``axis`` (2 = y, 3 = y1, 4 = y2) to a single symbol."""
    return RelayDmc(c.transition.sum(axis=axis, keepdims=True))


def test_df_deaf_relay_and_blind_eavesdropper(rng):
    for _ in range(10):
        c = random_dmc(rng)
        d = InputDesign.joint(rng.dirichlet(np.ones(4)).reshape(2, 2))
        assert df_point(_with_constant(c, 3), d).re_max == pytest.approx(0.0, abs=1e-15)
        blind = df_point(_with_constant(c, 4), d)
        assert blind.re_max == pytest.approx(blind.r1_max, abs=1e-15)


def test_deaf_nf_constant_relay_output_equals_nf(rng):
    for _ in range(10):
        c = _with_constant(random_dmc(rng), 3)
        d = InputDesign.product(random_pmf(rng, 2), random_pmf(rng, 2))
        assert deaf_nf_point(c, d).re_max == pytest.approx(nf_point(c, d).re_max, abs=1e-15)


@given(st.integers(0, 2**32 - 1))
def test_outer_dominates_df_same_design(seed):
    rng = np.random.default_rng(seed)
    c = random_dmc(rng, (2, 2, 3, 2, 2))
    d = InputDesign.joint(rng.dirichlet(np.ones(4)).reshape(2, 2))
    assert outer_bound_point(c, d.with_constant_u()).re_max >= df_point(c, d).re_max - 1e-9


@given(st.integers(0, 2**32 - 1))
def test_re_within_r1_and_nonnegative(seed):
    rng = np.random.default_rng(seed)
    c = random_dmc(rng, sparsity=0.3)
    d = InputDesign.product(random_pmf(rng, 2), random_pmf(rng, 2))
    points = [df_point(c, d), nf_point(c, d), deaf_nf_point(c, d),
              outer_bound_point(c, d.with_constant_u())]
    q = rng.dirichlet(np.ones(2), size=(2, 2))
    cd = CfDesign(d.pv1, d.pv2, q)
    points.append(cf_point(c, CfDesign(d.pv1, d.pv2, q, cf_max_r0(c, cd))))
    for p in points:
        assert 0.0 <= p.re_max <= p.r1_max + 1e-12


def test_cf_exact_copy_quantizer_feasibility(rng):
    # Yq = Y1 and r0 = 0: feasible iff the relay link carries H(Y1|X2)
    for _ in range(20):
        c = random_dmc(rng)
        px1, px2 = random_pmf(rng, 2), random_pmf(rng, 2)
        q = np.einsum("ab,c->acb", np.eye(2), np.ones(2))
        pt = cf_point(c, CfDesign(px1, px2, q, 0.0))
        j = cf_loop_joint(c, px1, px2, q)
        names = ("x1", "x2", "y", "y1", "y2", "yq")
        link = min(oracle_cmi(j, names, "x2", "y"), oracle_cmi(j, names, "x2", "y2", "x1"))
        h_y1 = oracle_cmi(j, names, "y1", "yq", "x2")  # = H(Y1|X2) for an exact copy
        assert pt.feasible == (link >= h_y1 - 1e-12)


@given(st.integers(0, 2**32 - 1))
def test_input_relabel_invariance(seed):
    rng = np.random.default_rng(seed)
    c = random_dmc(rng, (3, 2, 2, 2, 2))
    p1, p2 = random_pmf(rng, 3), random_pmf(rng, 2)
    perm = rng.permutation(3)
    swapped = RelayDmc(c.transition[perm][:, ::-1])
    d = InputDesign.product(p1, p2)
    d2 = InputDesign.product(p1[perm], p2[::-1])
    for fn in (df_point, nf_point, deaf_nf_point):
        assert fn(swapped, d2).re_max == pytest.approx(fn(c, d).re_max, abs=1e-12)


def test_degraded_noisy_eavesdropper_beats_df():
    # reversely degraded: Y1 is a noisy copy of Y; noisy Y2 leaves secrecy,
    # while DF is held back by the weak relay observation
    bsc = lambda e: np.array([[1 - e, e], [e, 1 - e]])  # noqa: E731
    pyx = np.stack([bsc(0.02)] * 2, axis=1)  # y | x1, x2
    noisy = np.stack([bsc(0.3)] * 2, axis=1)
    c = RelayDmc.from_factors(pyx, noisy, noisy)
    assert is_reversely_degraded(c).degraded
    nf, _ = best_over_grid(c, "reversely_degraded", 10)
    df, _ = best_over_grid(c, "df", 10)
    assert nf.re_max > 0.1
    assert df.r1_max < nf.r1_max
