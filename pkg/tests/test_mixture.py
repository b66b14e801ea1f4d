import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from didinvariance.counterfactual import check_cdf_parallel
from didinvariance.distributions import DiscreteDistribution, total_variation
from didinvariance.errors import InputError
from didinvariance.mixture import (
    EXAMPLE3,
    Case3Spec,
    build_case3_quadruple,
    case3_representation,
    decompose,
    example3_oracle_mean,
    example3_quadruple,
    example3_table,
    reconstruct,
)
from didinvariance.panel import CELLS, FourCells

from helpers import pmf_arrays, random_case3, random_pmf

S3 = np.array([0.0, 1.0, 2.0])


def _d(*m):
    return DiscreteDistribution(S3, m)


class TestDecompose:
    def test_hand_example(self):
        dec = decompose(_d(0.5, 0.5, 0.0), _d(0.0, 0.5, 0.5))
        assert dec.theta == 0.5
        assert dec.f_min.masses.tolist() == [0.0, 1.0, 0.0]
        assert dec.f_tilde_1.masses.tolist() == [1.0, 0.0, 0.0]
        assert dec.f_tilde_2.masses.tolist() == [0.0, 0.0, 1.0]
        assert dec.degenerate_case == "none"

    def test_equal_pair(self):
        f = _d(0.2, 0.3, 0.5)
        dec = decompose(f, f)
        assert dec.theta == 0.0
        assert dec.degenerate_case == "theta_zero"
        assert dec.f_min == dec.f_tilde_1 == dec.f_tilde_2 == f
        assert reconstruct(dec) == (f, f)

    def test_disjoint(self):
        f1 = DiscreteDistribution([0, 1], [0.25, 0.75])
        f2 = DiscreteDistribution([2, 3], [0.5, 0.5])
        dec = decompose(f1, f2)
        assert dec.theta == 1.0
        assert dec.degenerate_case == "theta_one"
        assert dec.f_tilde_1.masses.tolist() == [0.25, 0.75, 0.0, 0.0]
        assert dec.f_tilde_2.masses.tolist() == [0.0, 0.0, 0.5, 0.5]
        assert dec.f_min.masses.tolist() == dec.f_tilde_1.masses.tolist()

    @given(st.integers(1, 7).flatmap(lambda k: st.tuples(pmf_arrays(k), pmf_arrays(k))))
    def test_round_trip(self, pair):
        support = np.arange(pair[0].size, dtype=float)
        f1, f2 = (DiscreteDistribution(support, m) for m in pair)
        dec = decompose(f1, f2)
        assert 0.0 <= dec.theta <= 1.0
        assert dec.theta == total_variation(f1, f2)
        r1, r2 = reconstruct(dec)
        np.testing.assert_allclose(r1.masses, f1.masses, atol=1e-12)
        np.testing.assert_allclose(r2.masses, f2.masses, atol=1e-12)

    def test_theta_depends_on_difference_only(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            k = int(rng.integers(2, 8))
            f1, f2 = random_pmf(rng, k), random_pmf(rng, k)
            # move mass eps from point i to point j in both, where both have room
            eps = 0.5 * min(f1.masses.max(), f2.masses.max())
            i = int(np.argmax(np.minimum(f1.masses, f2.masses)))
            room = min(f1.masses[i], f2.masses[i])
            if room == 0:
                continue
            shift = np.zeros(k)
            j = (i + 1) % k
            shift[i], shift[j] = -min(eps, room), min(eps, room)
            g1 = DiscreteDistribution(f1.support, f1.masses + shift)
            g2 = DiscreteDistribution(f2.support, f2.masses + shift)
            a, b = decompose(f1, f2), decompose(g1, g2)
            assert a.theta == pytest.approx(b.theta, abs=1e-12)
            if a.theta > 0:
                np.testing.assert_allclose(a.f_tilde_1.masses, b.f_tilde_1.masses, atol=1e-12)
                np.testing.assert_allclose(a.f_tilde_2.masses, b.f_tilde_2.masses, atol=1e-12)


class TestReconstruct:
    def test_hand_example(self):
        dec = decompose(_d(0.5, 0.5, 0.0), _d(0.0, 0.5, 0.5))
        r1, r2 = reconstruct(dec)
        assert r1.masses.tolist() == [0.5, 0.5, 0.0]
        assert r2.masses.tolist() == [0.0, 0.5, 0.5]


class TestBuild:
    def test_theta_one_is_random_assignment(self):
        rng = np.random.default_rng(0)
        cells, _ = random_case3(rng, theta=1.0)
        for t in (0, 1):
            assert cells.cell(0, t) == cells.cell(1, t)

    def test_theta_zero_is_stationary(self):
        rng = np.random.default_rng(1)
        cells, _ = random_case3(rng, theta=0.0)
        for d in (0, 1):
            assert cells.cell(d, 0) == cells.cell(d, 1)

    def test_theta_range(self):
        f = _d(1, 0, 0)
        with pytest.raises(InputError):
            Case3Spec(1.5, f, f, f, f)

    def test_example3_quadruple(self):
        cells = example3_quadruple(0.5)
        assert check_cdf_parallel(cells, 1e-12).holds
        # means of the binned laws sit within half a bin of the analytic ones
        table = example3_table()
        for d, name in ((0, "comparison"), (1, "treated")):
            for t, when in ((0, "pre"), (1, "post")):
                assert cells.means[d][t] == pytest.approx(table["levels", name][when], abs=0.26)

    def test_both_sides_reduce_to_g_difference(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            theta = rng.random()
            G0, G1, H0, H1 = (random_pmf(rng, 5) for _ in range(4))
            cells = build_case3_quadruple(Case3Spec(theta, G0, G1, H0, H1))
            target = theta * (G1.masses - G0.masses)
            np.testing.assert_allclose(cells.cell(1, 1).masses - cells.cell(1, 0).masses, target, atol=1e-15)
            np.testing.assert_allclose(cells.cell(0, 1).masses - cells.cell(0, 0).masses, target, atol=1e-15)


class TestRepresentation:
    def test_recovers_a_valid_spec(self):
        rng = np.random.default_rng(12)
        for _ in range(100):
            cells, _ = random_case3(rng)
            spec = case3_representation(cells, 1e-12)
            assert spec is not None
            rebuilt = build_case3_quadruple(spec)
            for d, t in CELLS:
                np.testing.assert_allclose(rebuilt.cell(d, t).masses, cells.cell(d, t).masses, atol=1e-12)

    def test_brute_force_equivalence(self):
        # every quadruple on two support points with masses in quarters
        grid = [DiscreteDistribution([0.0, 1.0], [1 - q / 4, q / 4]) for q in range(5)]
        for combo in itertools.product(grid, repeat=4):
            cells = FourCells.from_dists(*combo)
            holds = check_cdf_parallel(cells, 0.0).holds
            assert holds == (case3_representation(cells) is not None)


class TestOracleMeans:
    # mixture design means: levels 22.65, 33.12 / 51.10, 61.57; logs 2.50, 3.00 / 3.00, 3.50
    @pytest.mark.parametrize(
        "d, t, levels, logs",
        [(0, 0, 22.65, 2.50), (0, 1, 33.12, 3.00), (1, 0, 51.10, 3.00), (1, 1, 61.57, 3.50)],
    )
    def test_table(self, d, t, levels, logs):
        g, h = EXAMPLE3["G"][t], EXAMPLE3["H"][d]
        assert example3_oracle_mean(0.5, g, h) == pytest.approx(levels, abs=0.005)
        assert example3_oracle_mean(0.5, g, h, "log") == pytest.approx(logs, abs=0.005)

    def test_closed_form(self):
        assert example3_oracle_mean(0.5, (2, 1), (3, 1)) == 0.5 * math.exp(2.5) + 0.5 * math.exp(3.5)

    def test_changes_agree(self):
        table = example3_table()
        for transform, change in (("levels", 10.47), ("log", 0.50)):
            a = table[transform, "comparison"]["change"]
            b = table[transform, "treated"]["change"]
            assert a == pytest.approx(b, abs=1e-12)
            assert a == pytest.approx(change, abs=0.005)

    def test_unknown_transform(self):
        with pytest.raises(InputError):
            example3_oracle_mean(0.5, (2, 1), (3, 1), "sqrt")
