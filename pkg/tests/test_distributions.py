import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from didinvariance.distributions import (
    Binning,
    DiscreteDistribution,
    MonotoneTransform,
    SignedMeasure,
    align_supports,
    apply_transform,
    cdf,
    discretize,
    empirical_pmf,
    mean,
    total_variation,
    weighted_pmf,
)
from didinvariance.errors import DomainError, InputError, MonotonicityError


@st.composite
def pmfs(draw, max_size=8, support=None):
    if support is None:
        k = draw(st.integers(1, max_size))
        support = sorted(draw(st.sets(st.integers(-20, 20), min_size=k, max_size=k)))
    raw = draw(st.lists(st.integers(0, 10), min_size=len(support), max_size=len(support)))
    if sum(raw) == 0:
        raw[0] = 1
    m = np.array(raw, dtype=float)
    return DiscreteDistribution(np.array(support, dtype=float), m / m.sum())


class TestEmpiricalPmf:
    def test_weighted_masses(self):
        d = empirical_pmf([(0, 1), (1, 1), (1, 2)])
        assert d.support.tolist() == [0.0, 1.0]
        assert d.masses.tolist() == [0.25, 0.75]
        assert d.total_weight == 4.0

    def test_single_observation(self):
        d = empirical_pmf([(5, 3)])
        assert d.support.tolist() == [5.0]
        assert d.masses.tolist() == [1.0]

    @pytest.mark.parametrize(
        "obs", [[], [(math.nan, 1)], [(1.0, 0.0)], [(1.0, -2.0)], [(math.inf, 1)]]
    )
    def test_invalid(self, obs):
        with pytest.raises(InputError):
            empirical_pmf(obs)

    def test_arrays_match_pairs(self):
        y = [3.0, 1.0, 3.0, 2.0]
        w = [1.0, 2.0, 3.0, 4.0]
        assert weighted_pmf(y, w) == empirical_pmf(zip(y, w))


class TestDistributionInvariants:
    def test_rejects_bad_sum(self):
        with pytest.raises(InputError):
            DiscreteDistribution([0, 1], [0.5, 0.6])

    def test_rejects_negative_mass(self):
        with pytest.raises(InputError):
            DiscreteDistribution([0, 1, 2], [-0.1, 0.6, 0.5])

    def test_rejects_unsorted_support(self):
        with pytest.raises(InputError):
            DiscreteDistribution([1, 0], [0.5, 0.5])
        with pytest.raises(InputError):
            DiscreteDistribution([0, 0], [0.5, 0.5])

    def test_signed_measure_allows_negative(self):
        m = SignedMeasure([0, 1, 2], [-0.1, 0.6, 0.5])
        assert m.min_mass == -0.1
        assert not m.is_proper()

    def test_arrays_are_read_only(self):
        d = DiscreteDistribution([0, 1], [0.5, 0.5])
        with pytest.raises(ValueError):
            d.masses[0] = 1.0


class TestDiscretize:
    def test_same_bin(self):
        d = discretize([(7.10, 1), (7.20, 1)], bin_width=0.25, origin=0)
        assert d.support.tolist() == [7.0]
        assert d.masses.tolist() == [1.0]

    def test_left_closed_boundary(self):
        d = discretize([(7.25, 1)], bin_width=0.25, origin=0)
        assert d.support.tolist() == [7.25]

    def test_zero_bin_kept_apart(self):
        d = discretize([(0.0, 1), (0.10, 1)], bin_width=0.25, origin=0, zero_bin=True)
        assert len(d) == 2
        assert d.support[1] == 0.0
        assert d.support[0] == Binning(0.25, 0.0, True).zero_label
        assert d.masses.tolist() == [0.5, 0.5]

    def test_zero_bin_clash_is_an_error(self):
        with pytest.raises(InputError):
            Binning(0.25, 0.0, True).labels([-0.1])

    def test_float_drift_at_boundaries(self):
        # 0.3 / 0.1 < 3 in binary floating point; labels must stay consistent
        b = Binning(0.1)
        labels = b.labels([0.3, 0.7, 1.0])
        assert np.array_equal(b.labels(labels), labels)
        assert np.all(labels <= np.array([0.3, 0.7, 1.0]))

    @given(
        st.lists(st.floats(-50, 50, allow_nan=False), min_size=1, max_size=30),
        st.sampled_from([0.1, 0.25, 0.3, 1.0, 2.5]),
        st.floats(-1, 1),
        st.booleans(),
    )
    def test_idempotent(self, ys, width, origin, zero_bin):
        b = Binning(width, origin, zero_bin)
        try:
            once = b.labels(ys)
        except InputError:
            return
        # a wage bin labelled exactly 0.0 cannot be told apart from a zero outcome
        assume(not (zero_bin and np.any((once == 0.0) & (np.asarray(ys) != 0.0))))
        assert np.array_equal(b.labels(once), once)
        assert weighted_pmf(b.labels(once)) == weighted_pmf(once)


class TestAlign:
    def test_point_masses(self):
        a, b = align_supports([DiscreteDistribution.point_mass(0), DiscreteDistribution.point_mass(1)])
        assert a.support.tolist() == [0.0, 1.0]
        assert a.masses.tolist() == [1.0, 0.0]
        assert b.masses.tolist() == [0.0, 1.0]

    def test_single_unchanged(self):
        d = DiscreteDistribution([0, 2], [0.5, 0.5])
        assert align_supports([d])[0] == d

    def test_union(self):
        a, b = align_supports([DiscreteDistribution([0, 2], [0.5, 0.5]), DiscreteDistribution([1], [1.0])])
        assert a.support.tolist() == [0.0, 1.0, 2.0]
        assert a.masses.tolist() == [0.5, 0.0, 0.5]
        assert b.masses.tolist() == [0.0, 1.0, 0.0]

    def test_empty(self):
        with pytest.raises(InputError):
            align_supports([])

    @given(st.lists(pmfs(), min_size=1, max_size=4))
    def test_cdf_values_preserved(self, dists):
        for before, after in zip(dists, align_supports(dists)):
            np.testing.assert_allclose(cdf(after)(before.support), cdf(before).values, atol=1e-12)


class TestCdf:
    def test_prefix_sum(self):
        c = cdf(DiscreteDistribution([0, 1, 2], [0.3, 0.4, 0.3]))
        np.testing.assert_allclose(c.values, [0.3, 0.7, 1.0])
        assert c.is_monotone

    def test_point_mass(self):
        assert cdf(DiscreteDistribution.point_mass(3)).values.tolist() == [1.0]

    def test_signed(self):
        c = cdf(SignedMeasure([0, 1, 2], [-0.1, 0.6, 0.5]))
        np.testing.assert_allclose(c.values, [-0.1, 0.5, 1.0])
        assert not c.is_monotone

    def test_evaluation_between_points(self):
        c = cdf(DiscreteDistribution([0, 1, 2], [0.3, 0.4, 0.3]))
        np.testing.assert_allclose(c([-1, 0, 0.5, 1.5, 9]), [0, 0.3, 0.3, 0.7, 1.0])


class TestTotalVariation:
    def test_identical(self):
        d = DiscreteDistribution([0, 1], [0.3, 0.7])
        assert total_variation(d, d) == 0.0

    def test_disjoint(self):
        assert total_variation(DiscreteDistribution.point_mass(0), DiscreteDistribution.point_mass(1)) == 1.0

    def test_direct_sum(self):
        f1 = DiscreteDistribution([0, 1], [0.5, 0.5])
        f2 = DiscreteDistribution([0, 1], [0.25, 0.75])
        assert total_variation(f1, f2) == 0.25

    @given(pmfs(), pmfs(), pmfs())
    def test_metric(self, a, b, c):
        ab = total_variation(a, b)
        assert ab == pytest.approx(total_variation(b, a), abs=1e-15)
        assert 0.0 <= ab <= 1.0
        x, y = align_supports([a, b])
        half_l1 = 0.5 * np.abs(x.masses - y.masses).sum()
        assert ab == pytest.approx(half_l1, abs=1e-12)
        assert (ab == 0.0) == np.array_equal(x.masses, y.masses)
        assert total_variation(a, c) <= ab + total_variation(b, c) + 1e-12


class TestTransforms:
    def test_identity(self):
        d = DiscreteDistribution([0, 1, 2], [0.3, 0.4, 0.3])
        assert apply_transform(d, MonotoneTransform.identity()) == d

    def test_log(self):
        d = DiscreteDistribution([1, math.e], [0.5, 0.5])
        out = apply_transform(d, MonotoneTransform.log())
        np.testing.assert_allclose(out.support, [0.0, 1.0])
        assert out.masses.tolist() == [0.5, 0.5]

    def test_log_domain(self):
        with pytest.raises(DomainError):
            apply_transform(DiscreteDistribution([0, 1], [0.5, 0.5]), MonotoneTransform.log())

    def test_indicator_shift(self):
        g = MonotoneTransform.indicator_shift(1.0)
        np.testing.assert_array_equal(g([0.0, 1.0, 1.5]), [-1.0, 0.0, 1.5])

    def test_affine_needs_positive_slope(self):
        with pytest.raises(InputError):
            MonotoneTransform.affine(-1.0, 0.0)

    def test_table(self):
        g = MonotoneTransform.table([0, 1, 2], [0, 10, 11])
        np.testing.assert_allclose(g([0, 0.5, 1, 2]), [0, 5, 10, 11])
        with pytest.raises(DomainError):
            g([3.0])
        with pytest.raises(MonotonicityError):
            MonotoneTransform.table([0, 1], [1, 1])

    def test_collision(self):
        # a near-flat segment rounds distinct support points onto one value
        g = MonotoneTransform.table([0, 1, 2], [0, 1, 1 + 2**-52])
        d = DiscreteDistribution([1.0, 1.2], [0.5, 0.5])
        with pytest.raises(MonotonicityError):
            apply_transform(d, g)

    @given(
        pmfs(),
        st.sampled_from(["identity", "affine", "indicator_shift", "table"]),
        st.floats(0.1, 10),
        st.floats(-10, 10),
    )
    def test_preserves_masses_and_order(self, d, kind, a, b):
        g = {
            "identity": MonotoneTransform.identity(),
            "affine": MonotoneTransform.affine(a, b),
            "indicator_shift": MonotoneTransform.indicator_shift(b),
            "table": MonotoneTransform.table([-21, b, 21], [0, 1, 1 + a]),
        }[kind]
        out = apply_transform(d, g)
        assert np.array_equal(out.masses, d.masses)
        assert np.all(np.diff(out.support) > 0)


class TestMean:
    def test_values(self):
        assert mean(DiscreteDistribution.point_mass(5)) == 5
        assert mean(DiscreteDistribution([0, 1], [0.5, 0.5])) == 0.5
        assert mean(DiscreteDistribution([0, 1, 2], [0.3, 0.4, 0.3])) == pytest.approx(1.0, abs=1e-15)
