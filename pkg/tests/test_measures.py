"""Tests for increment-law construction, moments, tails and samplers."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from reflectwalk import measures as ms


def lattice(d):
    return ms.Measure1D.lattice(d)


# ---------------------------------------------------------------------------
# gcd normalization
# ---------------------------------------------------------------------------

def test_gcd_normalize_divides_common_factor():
    m, k = ms.gcd_normalize(lattice({2: 0.5, 4: 0.5}))
    assert k == 2
    assert m.atoms_dict() == {1: 0.5, 2: 0.5}
    assert m.normalized


def test_gcd_normalize_already_normalized():
    m0 = lattice({1: 0.5, 2: 0.5})
    m, k = ms.gcd_normalize(m0)
    assert k == 1 and m.atoms_dict() == m0.atoms_dict()


def test_gcd_normalize_mixed_signs():
    m, k = ms.gcd_normalize(lattice({-1: 1 / 3, 3: 1 / 3, 5: 1 / 3}))
    assert k == 1
    assert sorted(m.atoms_dict()) == [-1, 3, 5]


def test_gcd_normalize_rejects_degenerate():
    with pytest.raises(ms.MeasureError):
        ms.gcd_normalize(lattice({0: 1.0}))
    with pytest.raises(ms.MeasureError):
        lattice({})


@given(st.dictionaries(st.integers(-20, 20), st.floats(0.05, 1.0),
                       min_size=1, max_size=6))
@settings(max_examples=60, deadline=None)
def test_gcd_normalize_idempotent(atoms):
    total = sum(atoms.values())
    atoms = {k: v / total for k, v in atoms.items()}
    if set(atoms) == {0}:
        return
    m = lattice(atoms)
    m1, _ = ms.gcd_normalize(m)
    m2, k2 = ms.gcd_normalize(m1)
    assert k2 == 1
    assert m1.atoms_dict() == m2.atoms_dict()


# ---------------------------------------------------------------------------
# validation invariants
# ---------------------------------------------------------------------------

def test_lattice_sum_validation():
    with pytest.raises(ms.MeasureError):
        ms.Measure1D.lattice_arrays([0, 1], [0.5, 0.6])
    with pytest.raises(ms.MeasureError):
        ms.Measure1D.lattice_arrays([0, 1], [0.7, -0.2])


def test_tailed_family_mass_consistency():
    wh = ms.wiener_hopf_log_tail(cutoff=50_000)
    assert abs(wh.probs.sum() + wh.tail(49_999) - 1.0) < 1e-9
    # tail is nonincreasing and tends to 0
    xs = [10, 100, 10_000, 10 ** 6, 10 ** 9]
    ts = [wh.tail(x) for x in xs]
    assert all(a >= b for a, b in zip(ts, ts[1:]))
    assert ts[-1] < 1e-3


# ---------------------------------------------------------------------------
# moments and tails
# ---------------------------------------------------------------------------

def test_moment_direct_weighted_sum():
    m = lattice({1: 0.5, 2: 0.5})
    assert m.moment(1.0) == pytest.approx(1.5, abs=1e-15)
    assert m.moment(0.5) == pytest.approx((1 + math.sqrt(2)) / 2, abs=1e-15)


def test_moment_point_mass_at_zero():
    m = lattice({0: 1.0})
    for p in (0.5, 1.0, 2.0, 3.5):
        assert m.moment(p) == 0.0


def test_moment_signed_mean_consistency():
    m = lattice({-2: 0.25, 1: 0.5, 3: 0.25})
    direct = -2 * 0.25 + 1 * 0.5 + 3 * 0.25
    assert m.moment(1, "positive") - m.moment(1, "negative") == pytest.approx(direct)
    assert m.mean() == pytest.approx(direct)


def test_tail_values():
    m = lattice({1: 0.5, 2: 0.5})
    assert m.tail(1) == 0.5
    assert m.tail(0) == 1.0
    assert m.tail(2) == 0.0
    assert m.tail(5.5) == 0.0
    assert m.tail(-3) == 1.0


@given(st.dictionaries(st.integers(-10, 10), st.floats(0.05, 1.0),
                       min_size=1, max_size=6),
       st.floats(-12, 12))
@settings(max_examples=80, deadline=None)
def test_tail_matches_enumeration(atoms, x):
    total = sum(atoms.values())
    atoms = {k: v / total for k, v in atoms.items()}
    m = lattice(atoms)
    expected = sum(p for y, p in atoms.items() if y > x)
    assert m.tail(x) == pytest.approx(expected, abs=1e-12)


def test_divergent_moment_flagged():
    wh = ms.wiener_hopf_log_tail(cutoff=100_000)
    assert math.isinf(wh.moment(0.5))
    assert math.isinf(wh.moment(1.0))


# ---------------------------------------------------------------------------
# joint measures
# ---------------------------------------------------------------------------

def test_marginal_finite_support():
    j = ms.JointMeasure.finite((2, 0, 0, 0), [((2, 3), 0.5), ((3, 2), 0.5)])
    assert j.marginal(0).atoms_dict() == {2: 0.5, 3: 0.5}
    assert j.marginal(1).atoms_dict() == {2: 0.5, 3: 0.5}


def test_marginal_product_lookup():
    a = lattice({1: 0.5, 2: 0.5})
    b = lattice({-1: 0.5, 1: 0.5})
    j = ms.JointMeasure.product((1, 0, 1, 0), [a, b])
    assert j.marginal(1) is b


def test_marginal_two_sided_finite():
    j = ms.JointMeasure.finite((2, 0, 0, 0), [((-1, 2), 0.5), ((2, -1), 0.5)])
    assert j.marginal(1).atoms_dict() == {-1: 0.5, 2: 0.5}


def test_marginal_index_out_of_range():
    j = ms.JointMeasure.finite((2, 0, 0, 0), [((2, 3), 0.5), ((3, 2), 0.5)])
    with pytest.raises(ms.MeasureError):
        j.marginal(2)


def test_joint_prob_sum_validation():
    with pytest.raises(ms.MeasureError):
        ms.JointMeasure.finite((2, 0, 0, 0), [((1, 1), 0.5), ((2, 2), 0.6)])


def test_joint_rejects_trivial_reflecting_marginal():
    with pytest.raises(ms.MeasureError):
        ms.JointMeasure.finite((2, 0, 0, 0), [((0, 1), 0.5), ((-1, 2), 0.5)])


def test_fully_symmetric_examples():
    j = ms.JointMeasure.finite((0, 0, 2, 0), [((-1, 1), 0.5), ((1, -1), 0.5)])
    assert not j.is_fully_symmetric()
    pm1 = lattice({-1: 0.5, 1: 0.5})
    jp = ms.JointMeasure.product((0, 0, 2, 0), [pm1, pm1])
    assert jp.is_fully_symmetric()
    j0 = ms.JointMeasure.finite((0, 0, 2, 0), [((0, 0), 1.0)])
    assert j0.is_fully_symmetric()


def test_fully_symmetric_implies_symmetric_marginals():
    pts = [((-1, -2), 0.25), ((1, -2), 0.25), ((-1, 2), 0.25), ((1, 2), 0.25)]
    j = ms.JointMeasure.finite((0, 0, 2, 0), pts)
    assert j.is_fully_symmetric()
    for i in range(2):
        assert j.marginal(i).is_symmetric()


def test_joint_sampling_matches_probs():
    j = ms.JointMeasure.finite((2, 0, 0, 0), [((2, 3), 0.25), ((3, 2), 0.75)])
    rng = np.random.default_rng(5)
    draws = j.sample(rng, 40_000)
    frac = float((draws[:, 0] == 2).mean())
    assert abs(frac - 0.25) < 4 * math.sqrt(0.25 * 0.75 / 40_000)


# ---------------------------------------------------------------------------
# subordinator law
# ---------------------------------------------------------------------------

def test_subordinator_pmf_closed_values():
    assert ms.subordinator_pmf(0.5, 1) == pytest.approx(0.5, abs=1e-15)
    assert ms.subordinator_pmf(0.5, 2) == pytest.approx(0.125, abs=1e-15)


def test_subordinator_pmf_mass():
    ks = np.arange(1, 10 ** 6 + 1, dtype=float)
    total = float(ms.subordinator_pmf(0.5, ks).sum())
    tail_bound = float(ms.subordinator_tail(0.5, 10 ** 6))
    assert abs(total - 1.0) <= 10 * tail_bound


def test_subordinator_pmf_asymptotic():
    # pmf(k) ~ alpha / (Gamma(1 - alpha) k^(1 + alpha)) for large k
    for alpha in (0.3, 0.7):
        k = 1e6
        lead = alpha / (math.gamma(1 - alpha) * k ** (1 + alpha))
        assert ms.subordinator_pmf(alpha, k) == pytest.approx(lead, rel=1e-3)


def test_subordinator_pmf_rejects_bad_args():
    with pytest.raises(ms.MeasureError):
        ms.subordinator_pmf(1.5, 3)
    with pytest.raises(ms.MeasureError):
        ms.subordinator_pmf(0.5, 0)


@given(st.floats(0.05, 0.95), st.integers(1, 10 ** 6))
@settings(max_examples=80, deadline=None)
def test_subordinator_pmf_ratio_recurrence(alpha, k):
    r = ms.subordinator_pmf(alpha, k + 1) / ms.subordinator_pmf(alpha, k)
    # log-gamma evaluation carries ~1e-10 relative noise at k ~ 1e5
    assert r == pytest.approx((k - alpha) / (k + 1), rel=5e-9)


def test_subordinator_tail_telescopes():
    alpha = 0.37
    ks = np.arange(1, 2000, dtype=float)
    pm = ms.subordinator_pmf(alpha, ks)
    tails = ms.subordinator_tail(alpha, ks)
    # tail(k) = tail(k-1) - pmf(k), tail(0) = 1
    recon = 1.0 - np.cumsum(pm)
    assert np.max(np.abs(recon - tails)) < 1e-12


def test_subordinated_sampler_parity_and_mean():
    rng = np.random.default_rng(17)
    sub = ms.SubordinatorAlpha(0.6)
    t = sub.sample(rng, 100_000)
    y = 2 * rng.binomial(t, 0.5) - t
    assert np.all((y & 1) == (t & 1))  # parity of the sum equals parity of T
    draws = ms.subordinated_increment_sampler(0.6, np.random.default_rng(3),
                                              size=100_000)
    se = draws.std(ddof=1) / math.sqrt(len(draws))
    assert abs(draws.mean()) < 4 * se


def test_subordinated_tail_heaviness_ordering():
    heavy = ms.subordinated_increment_sampler(0.3, np.random.default_rng(11),
                                              size=100_000)
    light = ms.subordinated_increment_sampler(0.9, np.random.default_rng(11),
                                              size=100_000)
    assert (np.abs(heavy) > 100).mean() > (np.abs(light) > 100).mean()


def test_subordinator_sampler_matches_exact_law():
    sub = ms.SubordinatorAlpha(0.55, table_size=128)
    rng = np.random.default_rng(123)
    t = sub.sample(rng, 500_000)
    for k in (1, 2, 128, 129, 500):
        emp = float((t == k).mean())
        exact = ms.subordinator_pmf(0.55, k)
        se = math.sqrt(exact * (1 - exact) / 500_000)
        assert abs(emp - exact) < 5 * se + 1e-9, k
    for thr in (1000, 10 ** 5):
        emp = float((t > thr).mean())
        exact = ms.subordinator_tail(0.55, thr)
        se = math.sqrt(exact * (1 - exact) / 500_000)
        assert abs(emp - exact) < 5 * se


# ---------------------------------------------------------------------------
# builtin families and config loading
# ---------------------------------------------------------------------------

def test_wiener_hopf_family_metadata():
    wh = ms.wiener_hopf_log_tail(cutoff=20_000)
    c = wh.meta["normalizing_constant"]
    assert 0 < c < 1
    # atoms follow c*log(x+2)/(x+2)^1.5 exactly
    assert wh.prob(0) == pytest.approx(c * math.log(2) / 2 ** 1.5, rel=1e-12)
    assert wh.prob(7) == pytest.approx(c * math.log(9) / 9 ** 1.5, rel=1e-12)


def test_uniform_family():
    u = ms.uniform(0, 1)
    assert u.tail(0.25) == pytest.approx(0.75)
    assert u.moment(1.0) == pytest.approx(0.5, abs=1e-9)
    rng = np.random.default_rng(0)
    x = u.sample(rng, 10_000)
    assert 0 <= x.min() and x.max() <= 1


def test_measure_from_config_forms():
    m = ms.measure_from_config({"atoms": [[1, 0.5], [2, 0.5]]})
    assert m.atoms_dict() == {1: 0.5, 2: 0.5}
    u = ms.measure_from_config({"family": "uniform", "a": -1.0, "b": 1.0})
    assert u.kind == "continuous"
    s = ms.measure_from_config({"family": "subordinated", "alpha": 0.5})
    assert s.is_lattice and s.is_symmetric()
    with pytest.raises(ms.MeasureError):
        ms.measure_from_config({"family": "nope"})
    with pytest.raises(ms.MeasureError):
        ms.measure_from_config({})


def test_joint_from_config_roundtrip():
    cfg = {"dims": [2, 0, 0, 0],
           "atoms": [[[2, 3], 0.5], [[3, 2], 0.5]]}
    j = ms.joint_from_config(cfg)
    assert j.dims == (2, 0, 0, 0)
    assert j.marginal(0).atoms_dict() == {2: 0.5, 3: 0.5}
    cfg2 = {"dims": [1, 0, 1, 0],
            "product": [{"atoms": [[1, 0.5], [2, 0.5]]},
                        {"atoms": [[-1, 0.5], [1, 0.5]]}]}
    j2 = ms.joint_from_config(cfg2)
    assert j2.dims == (1, 0, 1, 0)
