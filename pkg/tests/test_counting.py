import math

import pytest

from varpoints.catalog import CATALOG, ELLIPTIC, HYPERBOLA, PLANE, SURFACE
from varpoints.counting import (
    CongruenceSpec,
    admissible_classes,
    balancing_K,
    classical_lehmer_count,
    classical_lehmer_report,
    count_lehmer,
    count_M,
    count_visible,
    count_visible_lehmer,
    count_visible_via_moebius,
    lehmer_class_ratio_experiment,
    moebius_tail_sum,
)
from varpoints.errors import ValidationError
from varpoints.numtheory import gcd_tuple, phi_r, primes_in_range, zeta
from varpoints.region import BoxRegion
from varpoints.variety import VarietySpec, points_array


def all_classes(moduli):
    classes = [()]
    for a in moduli:
        classes = [c + (b,) for c in classes for b in range(a)]
    return classes


# -- Lehmer points ---------------------------------------------------------------

def test_classical_lehmer_p13():
    # inverse pairs mod 13 with opposite parity: 6 of them, split 3 + 3
    assert classical_lehmer_count(13) == 6
    for b in ((0, 1), (1, 0)):
        rep = count_lehmer(HYPERBOLA, 13, None, CongruenceSpec.make((2, 2), b))
        assert rep.exact == 3


def test_lehmer_even_odd_empty_at_p7():
    # the 6 inverse pairs mod 7 all have equal parity
    rep = count_lehmer(HYPERBOLA, 7, None, CongruenceSpec.make((2, 2), (0, 1)))
    assert rep.exact == 0


def test_lehmer_trivial_moduli_recover_point_count():
    for V in CATALOG:
        spec = CongruenceSpec.make((1,) * V.r, (0,) * V.r)
        for p in (7, 13):
            rep = count_lehmer(V, p, None, spec)
            assert rep.exact == points_array(V, p).shape[0]


def test_lehmer_main_term_and_budgets():
    spec = CongruenceSpec.make((2, 2), (0, 1))
    rep = count_lehmer(HYPERBOLA, 13, None, spec)
    assert rep.main_term == pytest.approx(13 / 4)
    # curve budget is primary for n = 1; both paper constants recorded
    assert rep.budget_formula.startswith("curve")
    assert rep.budget == pytest.approx(4 * 4 * math.sqrt(13) * math.log(13) ** 2)
    assert rep.extras["budget_proof"] == pytest.approx(
        4 * 17**3 * 13**0.5 * math.log(13) ** 2
    )
    assert rep.extras["budget_statement"] == pytest.approx(
        4 * 17**3 * 13**0.5 * math.log(13) ** 2
    )  # 2n+1 = n+r = 3 for a plane curve
    rep = count_visible(SURFACE, 7)
    assert rep.budget_formula.startswith("visible:")


def test_lehmer_partition_over_classes():
    regions = {
        2: BoxRegion.from_strings([["0", "2/3"], ["1/8", "1"]]),
        3: BoxRegion.from_strings([["0", "2/3"], ["1/8", "1"], ["0", "1"]]),
    }
    for V in CATALOG:
        for p in primes_in_range(3, 31):
            for region in (None, regions[V.r]):
                pts = points_array(V, p, region)
                for moduli in ((2,) * V.r, (2, 3, 4)[: V.r]):
                    if any(a % p == 0 for a in moduli):
                        continue
                    total = sum(
                        count_lehmer(
                            V, p, region, CongruenceSpec.make(moduli, b), points=pts
                        ).exact
                        for b in all_classes(moduli)
                    )
                    assert total == pts.shape[0], (V.label, p, moduli)


def test_lehmer_precondition_gcd():
    spec = CongruenceSpec.make((7, 2), (0, 1))
    with pytest.raises(ValidationError):
        count_lehmer(HYPERBOLA, 7, None, spec)


def test_congruence_spec_normalization():
    spec = CongruenceSpec.make((2, 3), (-1, 7))
    assert spec.residues == (1, 1)
    with pytest.raises(ValidationError):
        CongruenceSpec.make((0, 2), (0, 0))


def test_lehmer_region_respected():
    region = BoxRegion.from_strings([["0", "1/2"], ["0", "1"]])
    spec = CongruenceSpec.make((2, 2), (0, 1))
    rep = count_lehmer(HYPERBOLA, 13, region, spec)
    pts = [
        row
        for row in points_array(HYPERBOLA, 13).tolist()
        if region.contains(row, 13) and row[0] % 2 == 0 and row[1] % 2 == 1
    ]
    assert rep.exact == len(pts)
    assert rep.main_term == pytest.approx(0.5 * 13 / 4)


# -- M_Omega(k) and the Moebius route ------------------------------------------------

def test_count_M_table_p7():
    assert count_M(HYPERBOLA, 7, None, 1) == 6
    assert count_M(HYPERBOLA, 7, None, 2) == 3  # (2,4),(4,2),(6,6)
    assert count_M(HYPERBOLA, 7, None, 3) == 1  # (6,6)
    assert count_M(HYPERBOLA, 7, None, 5) == 0
    assert count_M(HYPERBOLA, 7, None, 6) == 1
    for V in (HYPERBOLA, PLANE):
        for p in (7, 13):
            assert count_M(V, p, None, p) == 0
            assert count_M(V, p, None, p + 5) == 0


def test_count_M_nonincreasing_under_divisibility():
    for V in (HYPERBOLA, PLANE, ELLIPTIC):
        for p in (7, 13):
            values = {k: count_M(V, p, None, k) for k in range(1, p + 1)}
            for k in range(1, p + 1):
                for kk in range(k, p + 1, k):
                    assert values[kk] <= values[k]


def test_moebius_sum_example_p7():
    # mu-weighted table: 6 - 3 - 1 - 0 + 1 = 3
    assert count_visible_via_moebius(HYPERBOLA, 7) == 3


def test_moebius_sum_example_plane_p3():
    # M(1) = 8, M(2) = 3
    assert count_M(PLANE, 3, None, 1) == 8
    assert count_M(PLANE, 3, None, 2) == 3
    assert count_visible_via_moebius(PLANE, 3) == 5


def test_moebius_equals_direct_everywhere():
    regions = {
        2: BoxRegion.from_strings([["0", "1/2"], ["1/3", "1"]]),
        3: BoxRegion.from_strings([["0", "1"], ["0", "2/3"], ["1/4", "1"]]),
    }
    for V in CATALOG:
        for p in primes_in_range(3, 31):
            for region in (None, regions[V.r]):
                pts = points_array(V, p, region)
                direct = count_visible(V, p, region, points=pts).exact
                via = count_visible_via_moebius(V, p, region, points=pts)
                assert direct == via, (V.label, p, region)


def test_origin_only_region_has_no_visible_points():
    region = BoxRegion.from_strings([["0", "1/7"], ["0", "1/7"]])
    assert count_visible(PLANE, 7, region).exact == 0
    assert count_visible_via_moebius(PLANE, 7, region) == 0


def test_moebius_tail_shape_bound():
    for V in CATALOG:
        if V.m == 0:
            continue  # needs a defining equation
        for p in primes_in_range(3, 31):
            pts = points_array(V, p)
            for K in (1, 2, 3, 5):
                tail = moebius_tail_sum(V, p, None, K, points=pts)
                assert tail <= V.deg * (p / K) ** V.r + V.deg, (V.label, p, K)


# -- visible points -------------------------------------------------------------------

def test_visible_examples():
    assert count_visible(HYPERBOLA, 7).exact == 3  # (1,1),(3,5),(5,3)
    assert count_visible(PLANE, 3).exact == 5


def test_visible_main_term():
    rep = count_visible(PLANE, 31)
    assert rep.main_term == pytest.approx(31**2 / zeta(2))


def test_appended_one_embedding_makes_all_points_visible():
    lifted = VarietySpec.from_texts(
        "hyperbola-lifted", 3, ["x1*x2 - 1", "x3 - 1"], 1, 2
    )
    for p in (7, 13, 31):
        pts = points_array(lifted, p)
        assert pts.shape[0] == p - 1
        assert count_visible(lifted, p, points=pts).exact == pts.shape[0]


# -- visible Lehmer points ---------------------------------------------------------------

def test_visible_lehmer_vanishing_class():
    for V in (HYPERBOLA, ELLIPTIC):
        rep = count_visible_lehmer(V, 7, None, 2, (0, 0))
        assert rep.exact == 0 and rep.main_term == 0
        assert rep.extras["vanishing_class"] is True
        # enumeration agrees with the theorem
        pts = points_array(V, 7)
        direct = [
            row for row in pts.tolist()
            if gcd_tuple(row) == 1 and row[0] % 2 == 0 and row[1] % 2 == 0
        ]
        assert not direct


def test_visible_lehmer_odd_odd_p7():
    rep = count_visible_lehmer(HYPERBOLA, 7, None, 2, (1, 1))
    assert rep.exact == 3
    assert rep.main_term == pytest.approx(7 / (zeta(2) * phi_r(2, 2)))


def test_visible_lehmer_trivial_modulus():
    for V in (HYPERBOLA, PLANE):
        for p in (7, 13):
            assert (
                count_visible_lehmer(V, p, None, 1, (0,) * V.r).exact
                == count_visible(V, p).exact
            )


def test_visible_class_partition():
    for V in CATALOG:
        for p in primes_in_range(3, 31):
            for a in (2, 3, 4):
                if p == a or math.gcd(a, p) != 1 or a >= p:
                    continue
                pts = points_array(V, p)
                visible = count_visible(V, p, points=pts).exact
                total = 0
                for b in all_classes((a,) * V.r):
                    rep = count_visible_lehmer(V, p, None, a, b, points=pts)
                    if gcd_tuple(b + (a,)) != 1:
                        assert rep.exact == 0
                    total += rep.exact
                assert total == visible, (V.label, p, a)


def test_visible_lehmer_preconditions():
    with pytest.raises(ValidationError):
        count_visible_lehmer(HYPERBOLA, 7, None, 7, (1, 1))  # gcd(a, p) != 1
    with pytest.raises(ValidationError):
        count_visible_lehmer(HYPERBOLA, 7, None, 9, (1, 1))  # a >= p


def test_visible_lehmer_budget_cases():
    rep = count_visible_lehmer(SURFACE, 7, None, 2, (1, 1, 1))
    assert rep.budget_formula.startswith("visible-lehmer-case1")  # n = 2 > 3/2
    rep = count_visible_lehmer(HYPERBOLA, 7, None, 2, (1, 1), delta_assert=-1)
    assert rep.budget_formula.startswith("visible-lehmer-case2")  # n = 1 <= r/2, case 2


# -- mixed-moduli class ratio ----------------------------------------------------------------

def test_admissible_classes_match_expected_lists():
    assert admissible_classes(2, 3, 1, 0) == [(1, 0), (1, 3), (5, 0), (5, 3)]
    assert admissible_classes(2, 3, 0, 1) == [(0, 1), (2, 1), (4, 1)]


def test_class_ratio_experiment_tends_to_four_thirds():
    ratio = lehmer_class_ratio_experiment(997)
    assert abs(ratio - 4 / 3) / (4 / 3) < 0.10


def test_class_ratio_requires_large_prime():
    with pytest.raises(ValidationError):
        lehmer_class_ratio_experiment(5)


# -- diagnostics ------------------------------------------------------------------------------

def test_balancing_K_examples():
    assert balancing_K(100, 2, 1) == pytest.approx(10.0)
    for p in (7, 101):
        assert balancing_K(p, 3, 2) == pytest.approx(p ** (1.5 / 4))
        assert balancing_K(p, 2, 2) == pytest.approx(p ** (1 / 6))
    with pytest.raises(ValidationError):
        balancing_K(7, 1, 1)
    with pytest.raises(ValidationError):
        balancing_K(7, 2, 3)


def test_classical_lehmer_regression_budget():
    for p in (13, 101, 499, 997, 4999):
        rep = classical_lehmer_report(p)
        assert abs(rep.exact - p / 2) <= math.sqrt(p) * math.log(p) ** 2
        assert rep.normalized <= 1.0
