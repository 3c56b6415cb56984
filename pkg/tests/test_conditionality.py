"""Conditionality constants: oracles, estimates, templates, fits, ladders."""

from __future__ import annotations

import math

import numpy as np
import pytest

from condgreedy import (
    ConditionalityError,
    GrowthTarget,
    LINEAR_TARGET,
    LOG_TARGET,
    Lp,
    L_m_estimate,
    L_m_oracle,
    Witness,
    block_embed_pair,
    difference,
    growth_fit,
    interleave,
    interleave_pair,
    k_m_estimate,
    lb_ladder,
    lindenstrauss,
    sa_ratio,
    summing,
    target_doubling,
    template_pairs,
    unit_vector_system,
    verify_witness,
    witness_from_doc,
)

# reference staircase pinned from the full joint sweep; flat segments are the
# odd dyadic generations, the risers interpolate inside the even ones
LIND_ORACLE = {
    1: 1.0,
    2: 1.0,
    3: 1.0,
    4: 1.25,
    5: 1.5,
    6: 1.75,
    7: 2.0,
    8: 2.0,
    11: 2.0,
}


# ---------------------------------------------------------------------------
# witnesses and ratios
# ---------------------------------------------------------------------------


def test_sa_ratio_example():
    b = difference(4)
    # f = e_4 (norm 1); S_{1,3} telescopes to e_1 + e_3 - e_2 (norm 3)
    assert sa_ratio(b, np.ones(4), (1, 3)) == 3.0


def test_sa_ratio_scale_invariant():
    b = lindenstrauss(6)
    rng = np.random.default_rng(2)
    for _ in range(20):
        a = rng.standard_normal(6)
        r1 = sa_ratio(b, a, (1, 4))
        r2 = sa_ratio(b, 3.0 * a, (1, 4))
        assert r2 == pytest.approx(r1, rel=1e-14)


def test_sa_ratio_validation():
    b = difference(4)
    with pytest.raises(ConditionalityError):
        sa_ratio(b, np.ones(3), (1,))
    with pytest.raises(ConditionalityError):
        sa_ratio(b, np.zeros(4), (1,))


def test_witness_doc_roundtrip():
    w = Witness((1.0, -0.5, 0.0), (1, 3), 1.5, "oracle")
    back = witness_from_doc(w.to_doc())
    assert back == w
    assert "B" not in w.to_doc()


def test_witness_doc_roundtrip_with_b_set():
    w = Witness((1.0, -1.0), (1,), 2.0, "almost-greedy", b_indices=(2,))
    doc = w.to_doc()
    assert doc["B"] == [2]
    assert witness_from_doc(doc) == w


def test_verify_witness_projection_kind():
    b = difference(4)
    w = Witness((1.0, 1.0, 1.0, 1.0), (1, 3), 3.0, "oracle")
    assert verify_witness(b, w) == 3.0


def test_verify_witness_rejects_unknown_kind():
    b = difference(4)
    with pytest.raises(ConditionalityError):
        verify_witness(b, Witness((1.0, 0.0, 0.0, 0.0), (1,), 1.0, "bogus"))


# ---------------------------------------------------------------------------
# oracle values
# ---------------------------------------------------------------------------


def test_oracle_unit_system_is_flat():
    b = unit_vector_system(8, Lp(2.0))
    for m in range(1, 9):
        val, wit = L_m_oracle(b, m)
        assert val == 1.0
        assert verify_witness(b, wit) == pytest.approx(1.0, rel=1e-12)


def test_oracle_unit_system_reduced_tier_stays_exact():
    # m = 16 is beyond the full joint grid; sampling cannot beat the floor 1
    b = unit_vector_system(16, Lp(2.0))
    val, _ = L_m_oracle(b, 16, guard=16)
    assert val == 1.0


def test_oracle_difference_is_m():
    b = difference(10)
    for m in range(2, 9):
        val, wit = L_m_oracle(b, m)
        assert val == pytest.approx(float(m), rel=1e-12)
        assert verify_witness(b, wit) == pytest.approx(val, rel=1e-12)


def test_oracle_summing_is_m():
    b = summing(10)
    for m in range(2, 9):
        val, _ = L_m_oracle(b, m)
        assert val == pytest.approx(float(m), rel=1e-12)


def test_oracle_difference_matches_templates():
    b = difference(10)
    for m in range(2, 9):
        t = max(sa_ratio(b, a, A) for a, A in template_pairs(b.recipe, b.d, m))
        val, _ = L_m_oracle(b, m)
        assert val == pytest.approx(t, rel=1e-12)


@pytest.mark.parametrize("m,want", sorted(LIND_ORACLE.items()))
def test_oracle_lindenstrauss_staircase(m, want):
    val, wit = L_m_oracle(lindenstrauss(12), m)
    assert val == pytest.approx(want, rel=1e-12)
    assert verify_witness(lindenstrauss(12), wit) == pytest.approx(val, rel=1e-12)


def test_oracle_validation():
    b = difference(10)
    with pytest.raises(ConditionalityError):
        L_m_oracle(b, 0)
    with pytest.raises(ConditionalityError):
        L_m_oracle(b, 11)
    with pytest.raises(ConditionalityError):
        L_m_oracle(difference(20), 15)  # beyond the default guard


# ---------------------------------------------------------------------------
# estimates
# ---------------------------------------------------------------------------


def test_estimate_delegates_to_oracle_inside_guard():
    b = lindenstrauss(16)
    for m in (2, 4, 6, 8):
        est, _ = L_m_estimate(b, m)
        orc, _ = L_m_oracle(b, m)
        assert est == pytest.approx(orc, abs=1e-9)


def test_estimate_search_route_reaches_template_value():
    # a tiny budget forces the search route; templates alone attain L_m here
    for b, m, want in ((difference(10), 6, 6.0), (lindenstrauss(12), 6, 1.75)):
        val, wit = L_m_estimate(b, m, budget=64, guard=1)
        assert val == pytest.approx(want, rel=1e-12)
        assert verify_witness(b, wit) == pytest.approx(val, rel=1e-12)


def test_estimate_seed_reproducible():
    b = lindenstrauss(32)
    a = L_m_estimate(b, 16, budget=512, seed=9)[0]
    c = L_m_estimate(b, 16, budget=512, seed=9)[0]
    assert a == c


def test_estimate_budget_monotone():
    b = lindenstrauss(32)
    lo, _ = L_m_estimate(b, 16, budget=256, seed=5)
    hi, _ = L_m_estimate(b, 16, budget=1024, seed=5)
    assert hi >= lo


def test_estimate_extra_templates_are_honoured():
    b = difference(12)
    a = np.zeros(12)
    a[:10] = 1.0
    # hand the known maximiser in; the reported bound can only match or beat it
    val, _ = L_m_estimate(b, 10, budget=64, templates=[(a, tuple(range(1, 11, 2)))])
    assert val >= 10.0 - 1e-12


def test_k_m_spread_set_bound():
    val, wit = k_m_estimate(difference(8), 4)
    assert val >= 7.0 - 1e-12
    assert len(wit.indices) <= 4
    assert verify_witness(difference(8), wit) == pytest.approx(val, rel=1e-12)


def test_k_m_full_length_equals_l_d():
    b = lindenstrauss(10)
    kv, _ = k_m_estimate(b, 10, budget=512, seed=3)
    lv, _ = L_m_estimate(b, 10, budget=512, seed=3)
    assert kv == lv


def test_k_m_validation():
    with pytest.raises(ConditionalityError):
        k_m_estimate(difference(8), 0)
    with pytest.raises(ConditionalityError):
        k_m_estimate(difference(8), 9)


# ---------------------------------------------------------------------------
# transfer helpers
# ---------------------------------------------------------------------------


def test_interleave_pair_maps_positions():
    a = np.array([1.0, -2.0, 3.0])
    out, A = interleave_pair(a, (1, 3), side=0, d0=3, d1=3)
    assert np.array_equal(out, [1.0, 0.0, -2.0, 0.0, 3.0, 0.0])
    assert A == (1, 5)
    out1, A1 = interleave_pair(a, (2,), side=1, d0=3, d1=3)
    assert np.array_equal(out1, [0.0, 1.0, 0.0, -2.0, 0.0, 3.0])
    assert A1 == (4,)


def test_interleave_pair_ratio_transfer_exact():
    b0, b1 = difference(4), unit_vector_system(4, Lp(2.0))
    b = interleave(b0, b1)
    a = np.array([1.0, 1.0, 1.0, 1.0])
    out, A = interleave_pair(a, (1, 3), side=0, d0=4, d1=4)
    assert sa_ratio(b, out, A) == sa_ratio(b0, a, (1, 3))


def test_interleave_pair_validation():
    with pytest.raises(ConditionalityError):
        interleave_pair(np.ones(2), (1,), side=0, d0=3, d1=3)


def test_block_embed_pair_offsets():
    out, A = block_embed_pair(np.array([1.0, -1.0]), (2,), dims=(3, 2), r=2)
    assert np.array_equal(out, [0.0, 0.0, 0.0, 1.0, -1.0])
    assert A == (5,)


def test_block_embed_pair_validation():
    with pytest.raises(ConditionalityError):
        block_embed_pair(np.ones(2), (1,), dims=(3, 2), r=3)
    with pytest.raises(ConditionalityError):
        block_embed_pair(np.ones(3), (1,), dims=(3, 2), r=2)


# ---------------------------------------------------------------------------
# growth targets and fits
# ---------------------------------------------------------------------------


def test_growth_target_deltas():
    assert LOG_TARGET.delta(8) == 3.0
    assert LINEAR_TARGET.delta(5) == 5.0
    assert GrowthTarget("power", 0.5).delta(16) == 4.0


def test_growth_target_validation():
    with pytest.raises(ConditionalityError):
        GrowthTarget("cubic")
    with pytest.raises(ConditionalityError):
        GrowthTarget("power", 1.2)
    with pytest.raises(ConditionalityError):
        LOG_TARGET.delta(0.5)


def test_target_doubling():
    inc, ratio = target_doubling(LOG_TARGET, (4, 8, 16))
    assert inc and ratio == pytest.approx(1.5)
    inc, ratio = target_doubling(LINEAR_TARGET, (4, 8, 16))
    assert inc and ratio == pytest.approx(2.0)


def test_growth_fit_exact_log():
    rows = [(m, 3.0 * math.log2(m), "oracle") for m in (4, 8, 16, 32)]
    rep = growth_fit(rows, LOG_TARGET)
    assert rep.verdict == "PASS"
    assert rep.slope == pytest.approx(3.0, rel=1e-12)
    assert rep.intercept == pytest.approx(0.0, abs=1e-9)
    assert rep.r_squared == pytest.approx(1.0, abs=1e-12)


def test_growth_fit_exact_linear():
    rows = [(m, 2.0 * m + 1.0, "oracle") for m in (2, 4, 6, 8, 10)]
    rep = growth_fit(rows, LINEAR_TARGET)
    assert rep.verdict == "PASS"
    assert rep.slope == pytest.approx(2.0, rel=1e-12)
    assert rep.intercept == pytest.approx(1.0, rel=1e-9)


def test_growth_fit_degenerate_ladder_fails_cleanly():
    rows = [(m, 1.0, "oracle") for m in (2, 4, 8, 16)]
    rep = growth_fit(rows, LOG_TARGET)
    assert rep.verdict == "FAIL"
    assert rep.r_squared is None
    assert "degenerate" in rep.note


def test_growth_fit_low_r2_fails():
    rows = [(2, 1.0, ""), (4, 5.0, ""), (8, 1.5, ""), (16, 6.0, "")]
    rep = growth_fit(rows, LOG_TARGET)
    assert rep.verdict == "FAIL"
    assert "R^2" in rep.note


def test_growth_fit_slope_band():
    rows = [(m, 0.01 * math.log2(m) + 1.0, "") for m in (4, 8, 16, 32)]
    rep = growth_fit(rows, LOG_TARGET)
    assert rep.verdict == "FAIL"
    assert "slope" in rep.note
    rep2 = growth_fit(rows, LOG_TARGET, slope_band=(0.001, 10.0))
    assert rep2.verdict == "PASS"


def test_growth_fit_validation():
    with pytest.raises(ConditionalityError):
        growth_fit([(2, 1.0, ""), (4, 2.0, ""), (8, 3.0, "")], LOG_TARGET)
    with pytest.raises(ConditionalityError):
        growth_fit([(2, 1.0, ""), (2, 2.0, ""), (4, 3.0, ""), (8, 4.0, "")], LOG_TARGET)


def test_growth_report_serialisation():
    rows = [(m, float(m), "oracle") for m in (2, 4, 8, 16)]
    rep = growth_fit(rows, LINEAR_TARGET)
    csv = rep.csv_rows()
    assert csv[0] == ("m", "lb", "method", "delta_m")
    assert csv[1] == (2, 2.0, "oracle", 2.0)
    doc = rep.to_doc()
    assert doc["target"]["kind"] == "linear"
    assert doc["rows"][0]["m"] == 2
    assert doc["verdict"] == rep.verdict


# ---------------------------------------------------------------------------
# ladders
# ---------------------------------------------------------------------------


def test_lb_ladder_difference_oracle_values():
    b = difference(10)
    ladder = lb_ladder(b, range(2, 9))
    for m, val, wit in ladder:
        assert val == pytest.approx(float(m), rel=1e-12)
        assert wit.kind == "oracle"
        assert verify_witness(b, wit) == pytest.approx(val, rel=1e-12)


def test_lb_ladder_nondecreasing_across_the_guard():
    b = lindenstrauss(32)
    ladder = lb_ladder(b, (4, 8, 16), budget=512, seed=1)
    vals = [v for _, v, _ in ladder]
    assert vals == sorted(vals)
    # the m = 16 rung can fall back on the carried m = 8 oracle witness
    assert vals[2] >= vals[1]


def test_lb_ladder_k_kind():
    b = difference(8)
    ladder = lb_ladder(b, (2, 4), kind="k", budget=256, seed=1)
    for m, val, _ in ladder:
        assert val >= 2.0 * m - 1.0 - 1e-12


def test_lb_ladder_validation():
    b = difference(8)
    with pytest.raises(ConditionalityError):
        lb_ladder(b, (4, 4))
    with pytest.raises(ConditionalityError):
        lb_ladder(b, (2, 4), kind="x")
    with pytest.raises(ConditionalityError):
        lb_ladder(b, (2, 4), mode="bogus")
