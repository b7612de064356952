"""Tests for the Monte Carlo recurrence laboratory."""

import math

import numpy as np
import pytest

from reflectwalk import exact_1d as ex
from reflectwalk import measures as ms
from reflectwalk import reflect_core as rc
import reflectwalk.diagnostics as dg


PM1 = ms.Measure1D.lattice({-1: 0.5, 1: 0.5})
M12 = ms.Measure1D.lattice({1: 0.5, 2: 0.5})


def spec_of(*factors, dims=None):
    dims = dims or (len(factors), 0, 0, 0)
    return rc.WalkSpec(ms.JointMeasure.product(dims, list(factors)))


# ---------------------------------------------------------------------------
# occupation vs invariant law
# ---------------------------------------------------------------------------

def test_occupation_matches_exact_invariant_law():
    nu = ex.invariant_measure_nonneg(M12)
    tv, occ = dg.occupation_vs_invariant(spec_of(M12), nu, 300_000, 10_000, 42)
    assert tv < 0.02
    assert set(occ) == {(0,), (1,), (2,)}


def test_occupation_two_cycle_exact():
    m = ms.Measure1D.lattice({1: 1.0})
    nu = ex.invariant_measure_nonneg(m)
    tv, occ = dg.occupation_vs_invariant(spec_of(m), nu, 100_000, 0, 0)
    assert tv < 1e-4  # deterministic alternation, off only by edge effects


def test_occupation_support_matches_essential_class():
    from reflectwalk import lattice_structure as ls
    j = ms.JointMeasure.finite((2, 0, 0, 0), [((2, 3), 0.5), ((3, 2), 0.5)])
    reports = ls.essential_classes(j, window=10)
    expected = reports[0].member_set()
    # uniform reference on the class only for support comparison
    ref = {k: 1.0 / len(expected) for k in expected}
    tv, occ = dg.occupation_vs_invariant(rc.WalkSpec(j), ref, 100_000, 1000, 3)
    assert set(occ) == expected


def test_occupation_refuses_escaping_walk():
    sub = ms.subordinated(0.3)
    with pytest.raises(ms.MeasureError):
        dg.occupation_vs_invariant(spec_of(sub), {(0,): 1.0}, 20_000, 1000, 1)


# ---------------------------------------------------------------------------
# return-time evidence
# ---------------------------------------------------------------------------

def test_positive_recurrent_evidence():
    stats, ev = dg.return_time_stats(spec_of(M12), [0.0], ((0.0,), 0.0),
                                     100_000, 16, 7)
    assert ev.category == "positive_evidence"
    m = np.array(ev.mean_return_times)
    assert np.all(np.abs(m / m[0] - 1.0) < 0.1)


def test_null_recurrent_evidence():
    stats, ev = dg.return_time_stats(spec_of(PM1), [0.0], ((0.0,), 0.0),
                                     100_000, 16, 7)
    assert ev.category == "null_evidence"
    assert ev.mean_return_times[-1] / ev.mean_return_times[0] >= 1.5


def test_transient_evidence_subordinated():
    stats, ev = dg.return_time_stats(spec_of(ms.subordinated(0.3)), [0.0],
                                     ((0.0,), 0.0), 200_000, 16, 7)
    assert ev.category == "transient_evidence"
    assert ev.escape_fraction >= 0.9


def test_tiny_budget_refused():
    with pytest.raises(ms.MeasureError):
        dg.return_time_stats(spec_of(M12), [0.0], ((0.0,), 0.0), 500, 4, 7)


def test_evidence_deterministic_given_seed():
    a = dg.return_time_stats(spec_of(PM1), [0.0], ((0.0,), 0.0), 50_000, 8, 99)
    b = dg.return_time_stats(spec_of(PM1), [0.0], ((0.0,), 0.0), 50_000, 8, 99)
    assert a[1] == b[1]
    assert np.array_equal(a[0].return_times, b[0].return_times)


# ---------------------------------------------------------------------------
# symmetrization identity
# ---------------------------------------------------------------------------

def test_symmetrization_exact_one_dimensional():
    j = ms.JointMeasure.product((0, 0, 1, 0), [PM1])
    # law of X_2 from 0 is {0: 1/2, 2: 1/2}, equal to the law of |S_2|
    assert dg.symmetrization_check(j, [0.0], 2, "exact_enumeration") < 1e-15


def test_symmetrization_zero_horizon():
    j = ms.JointMeasure.product((0, 0, 1, 0), [PM1])
    assert dg.symmetrization_check(j, [3.0], 0, "exact_enumeration") == 0.0


def test_symmetrization_exact_two_dimensional():
    j = ms.JointMeasure.product((0, 0, 2, 0), [PM1, PM1])
    for n in (3, 6):
        assert dg.symmetrization_check(j, [1.0, 2.0], n,
                                       "exact_enumeration") < 1e-12


def test_symmetrization_rejects_asymmetric():
    j = ms.JointMeasure.finite((0, 0, 2, 0), [((-1, 1), 0.5), ((1, -1), 0.5)])
    with pytest.raises(ms.MeasureError):
        dg.symmetrization_check(j, [0.0, 0.0], 2, "exact_enumeration")


def test_sign_rule_coupling_pathwise_identity():
    # signed walk with the reflecting sign rule: |W_n| equals the reflected
    # walk driven by the same increments, step for step
    rng = np.random.default_rng(123)
    for _ in range(20):
        y = PM1.sample(rng, 200)
        coins = rng.integers(0, 2, size=200) * 2 - 1
        w = 7.0
        x = 7.0
        for k in range(200):
            e = -1.0 if w > 0 else (1.0 if w < 0 else float(coins[k]))
            w = w + e * y[k]
            x = abs(x - y[k])
            assert abs(w) == x


# ---------------------------------------------------------------------------
# product-set occupation bound
# ---------------------------------------------------------------------------

def test_cesaro_bound_product_of_bounded_walks():
    nu = ex.invariant_measure_nonneg(M12)
    out = dg.cesaro_lower_bound(nu, nu, {0, 1, 2}, {0, 1, 2},
                                spec_of(M12, M12), 200_000, 5)
    assert out["bound"] == pytest.approx(1.0)
    assert out["empirical"] >= 0.97
    assert out["satisfied"]


def test_cesaro_bound_empty_set_not_asserted():
    nu = ex.invariant_measure_nonneg(M12)
    out = dg.cesaro_lower_bound(nu, nu, set(), set(),
                                spec_of(M12, M12), 10_000, 5)
    assert out["bound"] == pytest.approx(-1.0)
    assert out["satisfied"] is None


def test_cesaro_bound_finite_support_example():
    j = ms.JointMeasure.finite((2, 0, 0, 0), [((2, 3), 0.5), ((3, 2), 0.5)])
    m1 = j.marginal(0)
    nu1 = ex.invariant_measure_nonneg(m1)
    a = {0, 1, 2, 3}
    bound = nu1.mass_of(a) / nu1.total_mass * 2 - 1
    assert bound == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# reflected plus free
# ---------------------------------------------------------------------------

def test_reflected_plus_free_centred_vs_drifted():
    centred = spec_of(M12, PM1, dims=(1, 0, 1, 0))
    ev, wald = dg.reflected_plus_free_experiment(centred, 100_000, 24, 11,
                                                 wald_cycles=20_000)
    assert ev.category == "null_evidence"
    assert wald["passed"]
    drift = ms.Measure1D.lattice({-1: 0.4, 1: 0.6})
    drifted = spec_of(M12, drift, dims=(1, 0, 1, 0))
    ev2, wald2 = dg.reflected_plus_free_experiment(drifted, 100_000, 24, 11,
                                                   wald_cycles=20_000)
    assert ev2.category == "transient_evidence"
    assert wald2["passed"]
    # the identity itself: mean Z per cycle ~ mean cycle x drift
    assert wald2["mean_z_per_cycle"][0] == pytest.approx(
        wald2["mean_cycle_length"] * 0.2, abs=0.05)


def test_reflected_plus_free_requires_free_part():
    with pytest.raises(ms.MeasureError):
        dg.reflected_plus_free_experiment(spec_of(M12), 10_000, 8, 1)


# ---------------------------------------------------------------------------
# local return-probability exponent probes
# ---------------------------------------------------------------------------

def test_null_probe_marginal_exponent():
    out = dg.product_null_recurrence_probe(
        [PM1, PM1], [0, 0], [2 ** k for k in range(6, 13)], 100_000, rng=9)
    for f in out["factors"]:
        assert -0.65 < f["slope"] < -0.35
    joint = out["joint"]["slope"]
    s1 = out["factors"][0]["slope"]
    s2 = out["factors"][1]["slope"]
    se = 3 * (out["factors"][0]["slope_se"] + out["factors"][1]["slope_se"]
              + out["joint"]["slope_se"])
    assert abs(joint - (s1 + s2)) < max(se, 0.15)


def test_null_probe_general_symmetric_law():
    m = ms.Measure1D.lattice({-2: 0.25, -1: 0.25, 1: 0.25, 2: 0.25})
    out = dg.product_null_recurrence_probe(
        [m], [0], [2 ** k for k in range(6, 11)], 20_000, rng=5)
    assert -0.8 < out["factors"][0]["slope"] < -0.25


def test_null_probe_rejects_drift():
    m = ms.Measure1D.lattice({-1: 0.4, 1: 0.6})
    with pytest.raises(ms.MeasureError):
        dg.product_null_recurrence_probe([m], [0], [64, 128], 1000, rng=1)


# ---------------------------------------------------------------------------
# dimension probe
# ---------------------------------------------------------------------------

def test_dimension_probe_contrast():
    j3 = ms.JointMeasure.product((3, 0, 0, 0), [PM1] * 3)
    j2 = ms.JointMeasure.product((2, 0, 0, 0), [PM1] * 2)
    r3 = dg.dimension_transience_probe(j3, 200_000, 128, 2024)
    r2 = dg.dimension_transience_probe(j2, 200_000, 128, 2024)
    assert r3["escape_fraction"] > r2["escape_fraction"] + 0.2
    assert min(r3["min_distance_after_burn_in"]) >= 0


def test_dimension_probe_one_dimensional_returns():
    j1 = ms.JointMeasure.product((1, 0, 0, 0), [PM1])
    r1 = dg.dimension_transience_probe(j1, 100_000, 64, 11)
    assert r1["escape_fraction"] < 0.2


def test_dimension_probe_rejects_asymmetric():
    j = ms.JointMeasure.finite((2, 0, 0, 0), [((-1, 1), 0.5), ((1, -1), 0.5)])
    with pytest.raises(ms.MeasureError):
        dg.dimension_transience_probe(j, 10_000, 8, 1)


# ---------------------------------------------------------------------------
# subordinated machinery
# ---------------------------------------------------------------------------

def test_sum_sampler_matches_brute_force():
    alpha = 0.7
    ss = dg.SubordinatorSumSampler(alpha)
    fast = ss.sample_sum(64, 50_000, np.random.default_rng(5))
    sub = ms.SubordinatorAlpha(alpha)
    brute = sub.sample(np.random.default_rng(6), 64 * 50_000)
    brute = brute.reshape(50_000, 64).sum(axis=1)
    for t in (150, 300, 1000, 10_000):
        pf = (fast > t).mean()
        pb = (brute > t).mean()
        se = math.sqrt(max(pb * (1 - pb), 1e-12) / 50_000) * math.sqrt(2)
        assert abs(pf - pb) < 5 * se, (t, pf, pb)


def test_sum_sampler_minimum_value():
    ss = dg.SubordinatorSumSampler(0.5)
    vals = ss.sample_sum(32, 1000, np.random.default_rng(1))
    assert vals.min() >= 32  # every increment is at least 1


def test_subordinated_exponent_probe_small_scale():
    out = dg.subordinated_return_exponent(0.7, rng=17, n_max=2 ** 12,
                                          replicas=100_000)
    assert abs(out["slope"] - out["expected_exponent"]) < 0.15


def test_categorize_rules_are_pure():
    ev1 = dg.categorize([10, 20, 40, 80], [5, 10, 20, 40],
                        [100, 200, 400, 800], 0.0, 4)
    ev2 = dg.categorize([10, 20, 40, 80], [5, 10, 20, 40],
                        [100, 200, 400, 800], 0.0, 4)
    assert ev1 == ev2
    assert ev1.category == "positive_evidence"
    ev3 = dg.categorize([10, 20, 40, 80], [4, 5, 6, 7],
                        [100, 200, 400, 800], 0.0, 4)
    assert ev3.category == "null_evidence"
    ev4 = dg.categorize([10, 20, 40, 80], [0, 0, 0, 0],
                        [100, 200, 400, 800], 0.95, 4)
    assert ev4.category == "transient_evidence"
