import random

import pytest

from varpoints.errors import ValidationError
from varpoints.polynomial import ParseError, Polynomial, parse, unparse


def terms_set(f):
    return {(m.coefficient, m.exponents) for m in f.terms}


# -- parsing -------------------------------------------------------------------

def test_parse_examples():
    assert terms_set(parse("x1*x2 - 1", 2)) == {(1, (1, 1)), (-1, (0, 0))}
    assert terms_set(parse("x1 + x1", 1)) == {(2, (1,))}
    assert terms_set(parse("x2^3 + x2 - x3", 3)) == {
        (1, (0, 3, 0)),
        (1, (0, 1, 0)),
        (-1, (0, 0, 1)),
    }


def test_parse_cancellation_and_constants():
    assert parse("x1 - x1", 1).is_zero
    assert parse("3 + 4", 1).constant_value() == 7
    assert parse("(x1 + 1)^2 - x1^2 - 2*x1 - 1", 1).is_zero


def test_parse_unary_minus_and_parens():
    assert terms_set(parse("-x1 + 2", 1)) == {(-1, (1,)), (2, (0,))}
    assert terms_set(parse("2*(x1 - 3)", 1)) == {(2, (1,)), (-6, (0,))}


def test_parse_syntax_error_position():
    with pytest.raises(ParseError) as err:
        parse("x1*&x2 - 1", 2)
    assert err.value.position == 3
    with pytest.raises(ParseError):
        parse("x1 +", 1)
    with pytest.raises(ParseError):
        parse("(x1", 1)


def test_parse_variable_out_of_range():
    with pytest.raises(ParseError):
        parse("x3 + 1", 2)


def test_parse_negative_exponent_rejected():
    with pytest.raises(ParseError):
        parse("x1^-2", 1)


def test_roundtrip_is_fixed_point():
    rng = random.Random(0)
    for _ in range(50):
        r = rng.randint(1, 3)
        raw = []
        for _ in range(rng.randint(1, 6)):
            coeff = rng.randint(-100, 100)
            exps = tuple(rng.randint(0, 4) for _ in range(r))
            raw.append((coeff, exps))
        f = Polynomial.from_terms(r, raw)
        text = unparse(f)
        g = parse(text, r)
        assert g == f
        assert unparse(g) == text


# -- evaluation ----------------------------------------------------------------

def eval_int(f, x):
    total = 0
    for coeff, exps in f.terms:
        v = coeff
        for xj, e in zip(x, exps):
            v *= xj**e
        total += v
    return total


def test_eval_mod_examples():
    f = parse("x1*x2 - 1", 2)
    assert f.eval_mod((3, 5), 7) == 0
    assert f.eval_mod((2, 2), 7) == 3
    g = parse("x2^2 - x1^3 - x1", 2)
    assert g.eval_mod((2, 0), 5) == 0  # 0 - 8 - 2 = -10 = 0 mod 5


def test_eval_mod_matches_integer_oracle_exhaustively():
    rng = random.Random(1)
    for p in (2, 3, 5, 7, 11, 13):
        for _ in range(5):
            r = rng.randint(1, 3)
            raw = [
                (rng.randint(-100, 100), tuple(rng.randint(0, 4) for _ in range(r)))
                for _ in range(rng.randint(1, 5))
            ]
            f = Polynomial.from_terms(r, raw)
            points = [()]
            for _ in range(r):
                points = [pt + (v,) for pt in points for v in range(p)]
            for x in points:
                assert f.eval_mod(x, p) == eval_int(f, x) % p


def test_eval_mod_dimension_mismatch():
    with pytest.raises(ValidationError):
        parse("x1 + x2", 2).eval_mod((1,), 7)


# -- partial substitution --------------------------------------------------------

def test_partial_fix_examples():
    f = parse("x1*x2 - 1", 2)
    g = f.partial_fix((3,), 7)
    assert g.r == 1
    assert terms_set(g) == {(3, (1,)), (6, (0,))}  # 3*y - 1 with -1 = 6 mod 7
    h = parse("x1 + x2", 2).partial_fix((0,), 5)
    assert terms_set(h) == {(1, (1,))}
    idf = parse("x1*x2 - 10", 2).partial_fix((), 7)
    assert terms_set(idf) == {(1, (1, 1)), (4, (0, 0))}


def test_partial_fix_concat_property():
    rng = random.Random(2)
    for _ in range(40):
        r = rng.randint(2, 4)
        p = rng.choice((5, 7, 11))
        raw = [
            (rng.randint(-50, 50), tuple(rng.randint(0, 3) for _ in range(r)))
            for _ in range(rng.randint(1, 5))
        ]
        f = Polynomial.from_terms(r, raw)
        k = rng.randint(0, r - 1)
        prefix = tuple(rng.randrange(p) for _ in range(k))
        suffix = tuple(rng.randrange(p) for _ in range(r - k))
        assert f.partial_fix(prefix, p).eval_mod(suffix, p) == f.eval_mod(
            prefix + suffix, p
        )


def test_partial_fix_rejects_full_prefix():
    with pytest.raises(ValidationError):
        parse("x1 + x2", 2).partial_fix((1, 2), 7)


# -- structure helpers -------------------------------------------------------------

def test_coefficients_in_last_variable():
    f = parse("x2^2 - x1^3 - x1", 2)
    split = f.coefficients_in(1)
    assert set(split) == {0, 2}
    assert terms_set(split[2]) == {(1, (0,))}
    assert terms_set(split[0]) == {(-1, (3,)), (-1, (1,))}


def test_total_degree_and_constants():
    assert parse("x1^2*x2 + x2", 2).total_degree() == 3
    assert parse("5", 2).constant_value() == 5
    assert parse("x1", 2).constant_value() is None
    assert Polynomial.from_terms(2, []).is_zero
