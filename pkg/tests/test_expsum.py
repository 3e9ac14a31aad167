import cmath
import math
import random
from fractions import Fraction

import numpy as np
import pytest

from varpoints.catalog import CATALOG, HYPERBOLA, PLANE, SURFACE
from varpoints.errors import ValidationError
from varpoints.expsum import (
    all_frequency_vectors,
    complete_variety_sum,
    incomplete_progression_sum,
    katz_bound_check,
    kloosterman_bound,
    lemma1_total,
    parseval_sum,
    per_u_bound,
    variety_sum_sweep,
)
from varpoints.numtheory import primes_in_range
from varpoints.region import lattice_range
from varpoints.variety import points_array

F = Fraction


def brute_incomplete(p, interval, a, b, u):
    """Direct complex exponential sum, no tables."""
    lo, hi = lattice_range(interval, p)
    total = 0j
    for m in range(max(lo, 0), min(hi, p - 1) + 1):
        if m % a == b:
            total += cmath.exp(-2j * math.pi * u * m / p)
    return total


# -- incomplete progression sums ------------------------------------------------

def test_full_period_orthogonality():
    for p in (7, 13):
        for u in (1, 3, p - 1):
            assert abs(incomplete_progression_sum(p, (F(0), F(1)), 1, 0, u)) < 1e-9


def test_zero_frequency_counts_terms():
    assert incomplete_progression_sum(7, (F(0), F(1)), 1, 0, 0) == pytest.approx(7)
    assert incomplete_progression_sum(11, (F(0), F(1)), 3, 1, 0) == pytest.approx(4)


def test_two_term_example():
    got = incomplete_progression_sum(5, (F(0), F(2, 5)), 1, 0, 1)
    want = 1 + cmath.exp(-2j * math.pi / 5)
    assert abs(got - want) < 1e-12
    assert abs(abs(got) - 2 * math.cos(math.pi / 5)) < 1e-12


def test_incomplete_matches_brute_force():
    rng = random.Random(3)
    ends = sorted({F(n, d) for d in (1, 2, 3, 4) for n in range(d + 1)})
    for _ in range(200):
        p = rng.choice((7, 11, 13))
        a = rng.randint(1, 4)
        b = rng.randrange(a)
        u = rng.randrange(p)
        i = rng.randrange(len(ends) - 1)
        j = rng.randrange(i + 1, len(ends))
        got = incomplete_progression_sum(p, (ends[i], ends[j]), a, b, u)
        assert abs(got - brute_incomplete(p, (ends[i], ends[j]), a, b, u)) < 1e-9


# -- per-u bound -------------------------------------------------------------------

def test_per_u_bound_examples():
    assert per_u_bound(7, 1, 1) == pytest.approx(7.0)
    assert per_u_bound(7, 1, 4) == pytest.approx(7 / 3)  # least residue -3
    assert per_u_bound(11, 3, 4) == pytest.approx(11.0)  # 3*4 = 12 = 1 mod 11


def test_per_u_bound_errors():
    with pytest.raises(ValidationError):
        per_u_bound(7, 1, 0)
    with pytest.raises(ValidationError):
        per_u_bound(7, 14, 3)


def test_per_u_bound_dominates_incomplete_sums():
    ends = sorted({F(n, d) for d in (1, 2, 3, 4, 8) for n in range(d + 1)})
    for p in primes_in_range(3, 101):
        for a in (1, 2, 3):
            if math.gcd(a, p) != 1:
                continue
            for b in range(a):
                for i in range(0, len(ends) - 1, 3):
                    for j in range(i + 1, len(ends), 4):
                        for u in range(1, p, max(1, p // 7)):
                            mag = abs(
                                incomplete_progression_sum(p, (ends[i], ends[j]), a, b, u)
                            )
                            assert mag <= per_u_bound(p, a, u) + 1e-9


# -- lemma-1 certification ------------------------------------------------------------

def test_lemma1_example_p5():
    got = lemma1_total(5, (F(0), F(2, 5)), 1, 0)
    want = sum(2 * abs(math.cos(math.pi * u / 5)) for u in range(1, 5))
    assert got == pytest.approx(want, abs=1e-12)
    assert got <= 2 * 5 * math.log(5)


def test_lemma1_full_interval_unit_modulus_is_zero():
    for p in (7, 13, 31):
        assert lemma1_total(p, (F(0), F(1)), 1, 0) == pytest.approx(0.0, abs=1e-9)


def test_lemma1_matches_direct_summation():
    ends = sorted({F(n, d) for d in (1, 2, 3, 4) for n in range(d + 1)})
    for p in (7, 13, 31):
        for a in (1, 2, 3, 4):
            if math.gcd(a, p) != 1:
                continue
            for b in range(a):
                for i in range(0, len(ends) - 1, 2):
                    for j in range(i + 1, len(ends), 3):
                        interval = (ends[i], ends[j])
                        direct = math.fsum(
                            abs(incomplete_progression_sum(p, interval, a, b, u))
                            for u in range(1, p)
                        )
                        assert lemma1_total(p, interval, a, b) == pytest.approx(
                            direct, abs=1e-8
                        )


def test_lemma1_bound_holds_on_sample():
    ends = sorted({F(n, d) for d in (1, 2, 5, 8) for n in range(d + 1)})
    for p in (7, 31, 101, 499):
        bound = 2 * p * math.log(p)
        for a in (1, 2, 5, 10):
            if math.gcd(a, p) != 1:
                continue
            for b in range(0, a, 3):
                for i in range(len(ends) - 1):
                    assert lemma1_total(p, (ends[i], ends[i + 1]), a, b) <= bound


def test_lemma1_requires_coprime_modulus():
    with pytest.raises(ValidationError):
        lemma1_total(7, (F(0), F(1)), 7, 0)


# -- complete sums over varieties --------------------------------------------------------

def test_zero_frequency_gives_point_count():
    for V in CATALOG:
        for p in (7, 13):
            rec = complete_variety_sum(V, p, (0,) * V.r)
            assert rec.value == complex(points_array(V, p).shape[0])
            assert rec.value.imag == 0


def test_kloosterman_value_p7():
    rec = complete_variety_sum(HYPERBOLA, 7, (1, 1))
    want = 4 * math.cos(2 * math.pi / 7) + 2 * math.cos(4 * math.pi / 7)
    assert abs(rec.value - want) < 1e-9
    assert abs(rec.value.imag) < 1e-9


def test_conjugate_symmetry():
    for p in (7, 13):
        for u in ((1, 1), (2, 5), (3, 0)):
            s = complete_variety_sum(HYPERBOLA, p, u)
            neg = tuple((-c) % p for c in u)
            t = complete_variety_sum(HYPERBOLA, p, neg)
            assert abs(s.value - t.value.conjugate()) < 1e-12
            assert abs(s.magnitude - t.magnitude) < 1e-12


def test_bombieri_bound_value_and_ratio():
    rec = complete_variety_sum(HYPERBOLA, 13, (1, 1))
    assert rec.bound == pytest.approx(17**3 * 13**0.5)
    assert rec.bound_kind == "bombieri"
    assert 0 <= rec.ratio <= 1
    assert not rec.exceeds_bound


def test_sweep_matches_per_u_sums():
    for V in (HYPERBOLA, PLANE):
        for p in (7, 11):
            records = variety_sum_sweep(V, p)
            assert len(records) == p**2 - 1
            for rec in records[:: max(1, len(records) // 17)]:
                direct = complete_variety_sum(V, p, rec.u)
                assert abs(rec.value - direct.value) < 1e-9
    # r = 3 exercises the conjugate-mirror index arithmetic
    records = variety_sum_sweep(SURFACE, 5)
    assert len(records) == 5**3 - 1
    for rec in records:
        direct = complete_variety_sum(SURFACE, 5, rec.u)
        assert abs(rec.value - direct.value) < 1e-9


def test_sweep_explicit_u_list():
    us = np.array([[1, 1], [2, 3]], dtype=np.int64)
    records = variety_sum_sweep(HYPERBOLA, 7, us=us, bound_kind="weil-kloosterman")
    assert [rec.u for rec in records] == [(1, 1), (2, 3)]
    assert records[0].bound == pytest.approx(kloosterman_bound(7))


def test_parseval_identity():
    for V in CATALOG:
        for p in (5, 7, 11, 13):
            pts = points_array(V, p)
            lhs = parseval_sum(V, p, points=pts)
            rhs = float(p**V.r) * pts.shape[0]
            assert abs(lhs - rhs) <= 1e-6 * max(rhs, 1.0), (V.label, p)


def test_kloosterman_calibration_small():
    for p in primes_in_range(3, 31):
        records = variety_sum_sweep(HYPERBOLA, p)
        assert max(r.magnitude for r in records) <= kloosterman_bound(p) + 1e-9


# -- Katz bound checks -----------------------------------------------------------------------

def test_katz_requires_dim_two_and_nonzero_u():
    with pytest.raises(ValidationError):
        katz_bound_check(HYPERBOLA, 7, (1, 1), -1)  # dim 1
    with pytest.raises(ValidationError):
        katz_bound_check(SURFACE, 7, (0, 0, 0), -1)
    with pytest.raises(ValidationError):
        katz_bound_check(SURFACE, 7, (1, 1, 1), -2)


def test_katz_bound_formula():
    rec = katz_bound_check(SURFACE, 7, (1, 2, 3), -1)
    assert rec.bound == pytest.approx(17**5 * 7 ** (3 / 2) * 7 ** (-0.5))  # p^(n/2)
    assert rec.bound_kind == "katz"


def test_katz_surface_sampled_ratios_below_one():
    rng = random.Random(11)
    for p in (13, 53, 97):
        pts = points_array(SURFACE, p)
        for _ in range(40):
            u = tuple(rng.randrange(p) for _ in range(3))
            if not any(u):
                continue
            rec = katz_bound_check(SURFACE, p, u, -1, points=pts)
            assert rec.ratio <= 1.0, (p, u)


def test_all_frequency_vectors():
    us = all_frequency_vectors(5, 2)
    assert us.shape == (24, 2)
    assert us[0].tolist() == [0, 1]
    assert us[-1].tolist() == [4, 4]
