import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pollcoop.charfun import (BASIC_KINDS, CFKind, CFTable, alignment_coefficient, cf_table, cf_value,
                              cover_by_enumeration, distances, partitions, superadditive_cover,
                              verify_partial_order, verify_superadditivity)
from pollcoop.errors import CapacityError, DomainError, StructuralError
from pollcoop.game import Coalition, GameSpec, coalition_aggregates
from pollcoop.oracle import oracle_cf

from conftest import regular_specs

S0, S1, N2 = Coalition(1), Coalition(2), Coalition(3)

# Frozen from the discretized oracle at M=2000 (see test_oracle_reproduces_frozen_values).
G1_VALUES = {
    ("alpha", 1): 0.3516666666667,
    ("alpha", 2): 1.7066666666667,
    ("delta", 1): 0.3583333333333,
    ("delta", 2): 1.7133333333333,
    ("zeta", 1): 0.345,
    ("zeta", 2): 1.705,
    ("eta", 1): 0.3516666666667,
    ("eta", 2): 1.7116666666667,
}


def test_oracle_reproduces_frozen_values(g1):
    for (kind, m), value in G1_VALUES.items():
        assert oracle_cf(g1, kind, Coalition(m), 2000).value == pytest.approx(value, abs=1e-4)


@pytest.mark.parametrize("kind,m", sorted(G1_VALUES))
def test_cf_value_g1(g1, kind, m):
    assert cf_value(g1, kind, Coalition(m), 0.0, 0.0) == pytest.approx(G1_VALUES[kind, m], abs=1e-12)


def test_beta_is_alpha(g1):
    for m in range(4):
        assert cf_value(g1, "beta", Coalition(m), 0.7, 0.3) == cf_value(g1, "alpha", Coalition(m), 0.7, 0.3)


def test_all_kinds_agree_at_grand_coalition(g1):
    vals = {cf_value(g1, k, N2, 0.0, 0.0) for k in BASIC_KINDS}
    assert len(vals) == 1 and vals.pop() == pytest.approx(2.08, abs=1e-12)


def test_empty_coalition_is_zero(g1):
    assert all(cf_value(g1, k, Coalition(0), 4.0, 0.5) == 0.0 for k in BASIC_KINDS)


def test_cf_value_domain_errors(g1):
    with pytest.raises(DomainError):
        cf_value(g1, "alpha", S0, 0.0, 1.5)
    with pytest.raises(ValueError):
        cf_value(g1, "eta_cover", S0, 0.0, 0.0)


def test_cf_table_g1(g1):
    t = cf_table(g1, "alpha")
    assert np.allclose(t.values, [0, 0.3516666666667, 1.7066666666667, 2.08], atol=1e-12)
    assert t[S0] == t[1]


def test_single_player_table():
    spec = GameSpec.from_arrays([2.0], [0.3])
    t = cf_table(spec, "zeta")
    assert len(t) == 2 and t[0] == 0.0
    assert t[1] == cf_value(spec, "delta", Coalition(1), spec.x0, spec.t0)


def test_eta_dominates_zeta_on_g1(g1):
    assert np.all(cf_table(g1, "eta").values >= cf_table(g1, "zeta").values)


def test_capacity_errors():
    big = GameSpec.from_arrays([100.0] * 16, [0.01] * 16)
    with pytest.raises(CapacityError):
        cf_table(big, "eta_cover")


@given(regular_specs(), st.floats(0.0, 10.0), st.floats(0.0, 1.0))
def test_table_entries_equal_pointwise_values(spec, x, frac):
    t = spec.t0 + frac * (spec.T - spec.t0)
    for kind in BASIC_KINDS:
        table = cf_table(spec, kind, x, t)
        for m in range(1 << spec.n):
            assert table[m] == cf_value(spec, kind, Coalition(m), x, t)


# -- superadditive cover ------------------------------------------------------

def test_cover_leaves_g1_eta_unchanged(g1):
    eta = cf_table(g1, "eta")
    assert np.array_equal(superadditive_cover(eta).values, eta.values)
    assert np.array_equal(cover_by_enumeration(eta).values, eta.values)


def test_cover_merges_singletons():
    table = CFTable(CFKind.eta, 0, 0, 2, [0, 1, 1, 1])
    assert superadditive_cover(table)[3] == 2


def test_cover_keeps_additive_tables():
    v = np.array([0.5, 1.25, 2.0])
    values = [sum(v[i] for i in Coalition(m).members) for m in range(8)]
    table = CFTable(CFKind.eta, 0, 0, 3, values)
    assert np.array_equal(superadditive_cover(table).values, table.values)


def test_partitions_are_counted_by_bell_numbers():
    bell = [1, 1, 2, 5, 15, 52, 203]
    assert [sum(1 for _ in partitions(list(range(k)))) for k in range(7)] == bell


def test_cover_rejects_incomplete_tables():
    with pytest.raises(StructuralError):
        superadditive_cover(CFTable(CFKind.eta, 0, 0, 3, [0, 1, 2]))
    with pytest.raises(StructuralError):
        superadditive_cover(CFTable(CFKind.eta, 0, 0, 1, [1, 2]))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6).flatmap(
    lambda n: st.lists(st.integers(-20, 20), min_size=(1 << n) - 1, max_size=(1 << n) - 1)
    .map(lambda vals: (n, [0] + vals))))
def test_cover_matches_partition_enumeration(case):
    n, values = case
    table = CFTable(CFKind.eta, 0, 0, n, values)
    dp = superadditive_cover(table)
    assert np.array_equal(dp.values, cover_by_enumeration(table).values)
    assert np.all(dp.values >= table.values)
    assert verify_superadditivity(dp, 1e-12).passed
    assert np.array_equal(superadditive_cover(dp).values, dp.values)


# -- distances and alignment --------------------------------------------------

def test_alpha_distances_g1(g1):
    gap = distances(g1, "alpha", S0, 0.0)
    assert gap.upper_gap == pytest.approx(0.0066666666667, abs=1e-12)
    assert gap.lower_gap == pytest.approx(0.0066666666667, abs=1e-12)


def test_alpha_distances_distinguish_the_two_terms(g1):
    # For S={1}: upper = D_{N\S} D_S h^3 / 3, lower = s D_{N\S}^2 h^3 / 6.
    gap = distances(g1, "alpha", S1, 0.0)
    assert gap.upper_gap == pytest.approx(0.1 * 0.2 / 3, abs=1e-15)
    assert gap.lower_gap == pytest.approx(0.1 ** 2 / 6, abs=1e-15)
    upper = oracle_cf(g1, "delta", S1).value - oracle_cf(g1, "alpha", S1).value
    lower = oracle_cf(g1, "alpha", S1).value - oracle_cf(g1, "zeta", S1).value
    assert upper == pytest.approx(gap.upper_gap, abs=1e-4)
    assert lower == pytest.approx(gap.lower_gap, abs=1e-4)


def test_eta_distances_mirror_alpha(g1):
    for S in (S0, S1):
        a, e = distances(g1, "alpha", S, 0.0), distances(g1, "eta", S, 0.0)
        assert a.upper_gap == pytest.approx(e.lower_gap, abs=1e-15)
        assert a.lower_gap == pytest.approx(e.upper_gap, abs=1e-15)


@given(regular_specs())
def test_bound_kinds_have_forced_zeros(spec):
    for m in range(1 << spec.n):
        S = Coalition(m)
        assert distances(spec, "delta", S, spec.t0).upper_gap == 0.0
        assert distances(spec, "zeta", S, spec.t0).lower_gap == 0.0


@given(regular_specs(), st.floats(0.0, 5.0))
def test_distances_equal_value_differences(spec, x):
    for kind in BASIC_KINDS:
        for m in range(1 << spec.n):
            S = Coalition(m)
            gap = distances(spec, kind, S, spec.t0)
            v = {k: cf_value(spec, k, S, x, spec.t0) for k in (kind, CFKind.delta, CFKind.zeta)}
            assert gap.upper_gap == pytest.approx(v[CFKind.delta] - v[kind], abs=1e-9)
            assert gap.lower_gap == pytest.approx(v[kind] - v[CFKind.zeta], abs=1e-9)


def test_alignment_g1(g1):
    assert alignment_coefficient(g1, S0).k_eta == pytest.approx(0.5, abs=1e-15)
    assert alignment_coefficient(g1, S1).k_eta == pytest.approx(0.8, abs=1e-15)
    assert alignment_coefficient(g1, N2).k_eta == 1.0
    assert alignment_coefficient(g1, S1).k_alpha == pytest.approx(0.2, abs=1e-15)
    with pytest.raises(DomainError):
        alignment_coefficient(g1, Coalition(0))


def test_alignment_recovered_from_oracle(g1):
    for S, k in ((S0, 0.5), (S1, 0.8)):
        v = {kind: oracle_cf(g1, kind, S).value for kind in ("delta", "zeta", "eta")}
        solved = (v["eta"] - v["zeta"]) / (v["delta"] - v["zeta"])
        assert solved == pytest.approx(k, abs=1e-3)


# -- orderings and identities -------------------------------------------------

def test_partial_order_g1(g1):
    rep = verify_partial_order(g1, 0.0, 0.0, 1e-9)
    assert rep.passed and rep.checked > 0


@given(regular_specs(), st.floats(0.0, 5.0))
def test_partial_order_random(spec, x):
    assert verify_partial_order(spec, x, spec.t0, 1e-9).passed


def test_bounds_coincide_on_empty_and_grand(g1):
    for S in (Coalition(0), N2):
        vals = {cf_value(g1, k, S, 1.0, 0.2) for k in BASIC_KINDS}
        assert len(vals) == 1


@pytest.mark.parametrize("kind", ["alpha", "zeta", "eta", "delta"])
def test_superadditivity_g1(g1, kind):
    rep = verify_superadditivity(cf_table(g1, kind), 1e-12)
    assert rep.passed and rep.pairs_checked == 1


def test_superadditivity_detects_violation():
    rep = verify_superadditivity(CFTable(CFKind.eta, 0, 0, 2, [0, 1, 1, 1.5]), 1e-12)
    assert not rep.passed
    v = rep.violations[0]
    assert (v.S, v.Q) == (S0, S1) and v.gap == pytest.approx(-0.5)


@given(regular_specs(), st.floats(0.0, 5.0), st.floats(0.0, 1.0))
def test_reflection_symmetry_and_alignment(spec, x, frac):
    t = spec.t0 + frac * (spec.T - spec.t0)
    for m in range(1, 1 << spec.n):
        S = Coalition(m)
        v = {k: cf_value(spec, k, S, x, t) for k in BASIC_KINDS}
        assert v["delta"] - v["alpha"] == pytest.approx(v["eta"] - v["zeta"], abs=1e-9)
        assert v["delta"] - v["eta"] == pytest.approx(v["alpha"] - v["zeta"], abs=1e-9)
        k = alignment_coefficient(spec, S).k_eta
        assert v["eta"] == pytest.approx(k * v["delta"] + (1 - k) * v["zeta"], abs=1e-9)


@given(regular_specs())
def test_alignment_solved_from_gaps_is_state_and_time_free(spec):
    H = spec.T - spec.t0
    points = [(spec.x0, spec.t0), (spec.x0 + 1.0, spec.t0 + 0.25 * H), (0.0, spec.t0 + 0.5 * H)]
    for m in range(1, (1 << spec.n) - 1):
        S = Coalition(m)
        ks = []
        for _, t in points:
            g = distances(spec, "eta", S, t)
            ks.append(g.lower_gap / (g.lower_gap + g.upper_gap))
        assert max(ks) - min(ks) <= 1e-12
        assert ks[0] == pytest.approx(alignment_coefficient(spec, S).k_eta, abs=1e-12)


@given(regular_specs(), st.floats(0.0, 5.0))
def test_grand_coalition_agreement_is_exact(spec, x):
    vals = [cf_table(spec, k, x, spec.t0).grand_value for k in BASIC_KINDS]
    assert max(vals) - min(vals) == 0.0


@settings(max_examples=30)
@given(regular_specs(min_n=2), st.floats(0.0, 5.0))
def test_values_are_cubic_in_time_to_go(spec, x):
    """Fit a cubic in h through four evaluation times and compare coefficients."""
    H = spec.T - spec.t0
    hs = np.array([0.0, H / 3, 2 * H / 3, H])
    vander = np.vander(hs, 4, increasing=True)
    full = (1 << spec.n) - 1
    D_N, B_N = sum(spec.d), sum(spec.b)
    for m in range(1, full):
        S = Coalition(m)
        agg = coalition_aggregates(spec, S)
        D_c = D_N - agg.D
        s = agg.s
        expected_cubic = {
            "alpha": s * agg.D ** 2 / 6,
            "delta": (2 * D_c * agg.D + s * agg.D ** 2) / 6,
            "zeta": -s * D_N * (D_N - 2 * agg.D) / 6,
            "eta": (2 * s * D_N * agg.D + 2 * D_c * agg.D - s * D_N ** 2) / 6,
        }
        for kind, c3 in expected_cubic.items():
            vals = [cf_value(spec, kind, S, x, spec.T - h) for h in hs]
            coef = np.linalg.solve(vander, vals)
            expected = [0.0, -agg.D * x + agg.Btilde / 2, -B_N * agg.D / 2, c3]
            scale = 1.0 + np.max(np.abs(vals))
            assert np.allclose(coef, expected, atol=1e-9 * scale / min(1.0, H) ** 3)
