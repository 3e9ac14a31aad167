"""Sparse multivariate polynomials over the integers.

Grammar accepted by parse() (also the config file format for defining
varieties):

    expr   := ['-'] term (('+' | '-') term)*
    term   := factor ('*' factor)*
    factor := base ['^' INT]
    base   := INT | 'x' INDEX | '(' expr ')'

Variables are x1..xr; '^' takes a nonnegative integer literal. Like terms
are merged and zero terms dropped, so parsing always yields a canonical
form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .errors import ValidationError


class ParseError(ValidationError):
    """Syntax error in polynomial text; .position is the 0-based offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class Monomial(NamedTuple):
    coefficient: int
    exponents: tuple[int, ...]


@dataclass(frozen=True)
class Polynomial:
    """Canonical sparse polynomial: distinct exponent vectors, no zero
    coefficients, terms sorted descending by exponent vector."""

    r: int
    terms: tuple[Monomial, ...]

    @classmethod
    def from_terms(cls, r: int, raw_terms) -> "Polynomial":
        merged: dict[tuple[int, ...], int] = {}
        for coeff, exps in raw_terms:
            exps = tuple(exps)
            if len(exps) != r:
                raise ValidationError(
                    f"term exponent vector {exps} has length {len(exps)}, expected {r}"
                )
            if any(e < 0 for e in exps):
                raise ValidationError(f"negative exponent in term {exps}")
            merged[exps] = merged.get(exps, 0) + coeff
        terms = tuple(
            Monomial(c, e)
            for e, c in sorted(merged.items(), reverse=True)
            if c != 0
        )
        return cls(r, terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def constant_value(self) -> int | None:
        """The constant if this polynomial has no variable part, else None."""
        if self.is_zero:
            return 0
        if len(self.terms) == 1 and all(e == 0 for e in self.terms[0].exponents):
            return self.terms[0].coefficient
        return None

    def total_degree(self) -> int:
        if self.is_zero:
            return 0
        return max(sum(t.exponents) for t in self.terms)

    def degree_in(self, var: int) -> int:
        """Degree in variable index var (0-based); -1 for the zero polynomial."""
        if self.is_zero:
            return -1
        return max(t.exponents[var] for t in self.terms)

    def eval_mod(self, x, p: int) -> int:
        """f(x) mod p in [0, p-1]; coefficients reduced mod p first."""
        if len(x) != self.r:
            raise ValidationError(
                f"point has {len(x)} coordinates, polynomial has {self.r}"
            )
        total = 0
        for coeff, exps in self.terms:
            v = coeff % p
            for xj, e in zip(x, exps):
                if e:
                    v = v * pow(int(xj) % p, e, p) % p
            total = (total + v) % p
        return total

    def partial_fix(self, prefix, p: int) -> "Polynomial":
        """Substitute x1..x_len(prefix) and reduce coefficients mod p.

        The result lives in the remaining r - len(prefix) variables and
        satisfies  result.eval_mod(suffix, p) == self.eval_mod(prefix + suffix, p).
        """
        k = len(prefix)
        if k >= self.r and k > 0:
            raise ValidationError(f"prefix of length {k} leaves no free variables")
        raw = []
        for coeff, exps in self.terms:
            c = coeff % p
            for v, e in zip(prefix, exps[:k]):
                if e:
                    c = c * pow(int(v) % p, e, p) % p
            raw.append((c, exps[k:]))
        return Polynomial.from_terms(self.r - k, raw)

    def coefficients_in(self, var: int) -> dict[int, "Polynomial"]:
        """Split as a polynomial in x_{var+1}: degree -> coefficient
        polynomial in the remaining variables (var dropped)."""
        buckets: dict[int, list] = {}
        for coeff, exps in self.terms:
            d = exps[var]
            rest = exps[:var] + exps[var + 1 :]
            buckets.setdefault(d, []).append((coeff, rest))
        return {
            d: Polynomial.from_terms(self.r - 1, raw) for d, raw in buckets.items()
        }

    def __str__(self) -> str:
        return unparse(self)


def _format_monomial(m: Monomial) -> str:
    parts = []
    for j, e in enumerate(m.exponents):
        if e == 1:
            parts.append(f"x{j + 1}")
        elif e > 1:
            parts.append(f"x{j + 1}^{e}")
    c = m.coefficient
    if not parts:
        return str(c)
    body = "*".join(parts)
    if c == 1:
        return body
    if c == -1:
        return f"-{body}"
    return f"{c}*{body}"


def unparse(f: Polynomial) -> str:
    """Canonical text form; parse(unparse(f)) == f."""
    if f.is_zero:
        return "0"
    out = _format_monomial(f.terms[0])
    for m in f.terms[1:]:
        s = _format_monomial(m)
        out += f" - {s[1:]}" if s.startswith("-") else f" + {s}"
    return out


class _Tokenizer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take_int(self) -> int:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            raise ParseError("expected integer", start)
        return int(self.text[start : self.pos])


class _Parser:
    """Recursive descent over the grammar in the module docstring."""

    def __init__(self, text: str, r: int):
        self.tok = _Tokenizer(text)
        self.r = r

    def parse(self) -> Polynomial:
        f = self.expr()
        self.tok.skip_ws()
        if self.tok.pos != len(self.tok.text):
            raise ParseError(
                f"unexpected character {self.tok.text[self.tok.pos]!r}", self.tok.pos
            )
        return f

    def expr(self) -> Polynomial:
        if self.tok.peek() == "-":
            self.tok.pos += 1
            f = self._negate(self.term())
        else:
            f = self.term()
        while self.tok.peek() in ("+", "-"):
            op = self.tok.peek()
            self.tok.pos += 1
            g = self.term()
            if op == "-":
                g = self._negate(g)
            f = Polynomial.from_terms(
                self.r, [(m.coefficient, m.exponents) for m in f.terms + g.terms]
            )
        return f

    def term(self) -> Polynomial:
        f = self.factor()
        while self.tok.peek() == "*":
            self.tok.pos += 1
            f = self._multiply(f, self.factor())
        return f

    def factor(self) -> Polynomial:
        base = self.base()
        if self.tok.peek() == "^":
            self.tok.pos += 1
            if self.tok.peek() == "-":
                raise ParseError("exponent must be a nonnegative integer", self.tok.pos)
            e = self.tok.take_int()
            result = Polynomial.from_terms(self.r, [(1, (0,) * self.r)])
            for _ in range(e):
                result = self._multiply(result, base)
            return result
        return base

    def base(self) -> Polynomial:
        ch = self.tok.peek()
        if ch == "(":
            self.tok.pos += 1
            f = self.expr()
            if self.tok.peek() != ")":
                raise ParseError("expected ')'", self.tok.pos)
            self.tok.pos += 1
            return f
        if ch == "x":
            pos = self.tok.pos
            self.tok.pos += 1
            idx = self.tok.take_int()
            if not (1 <= idx <= self.r):
                raise ParseError(
                    f"variable x{idx} outside ambient dimension r={self.r}", pos
                )
            exps = [0] * self.r
            exps[idx - 1] = 1
            return Polynomial.from_terms(self.r, [(1, tuple(exps))])
        if ch.isdigit():
            n = self.tok.take_int()
            return Polynomial.from_terms(self.r, [(n, (0,) * self.r)])
        raise ParseError(
            f"expected integer, variable or '(', got {ch!r}" if ch else "unexpected end of input",
            self.tok.pos,
        )

    def _negate(self, f: Polynomial) -> Polynomial:
        return Polynomial.from_terms(
            self.r, [(-m.coefficient, m.exponents) for m in f.terms]
        )

    def _multiply(self, f: Polynomial, g: Polynomial) -> Polynomial:
        raw = []
        for cf, ef in f.terms:
            for cg, eg in g.terms:
                raw.append((cf * cg, tuple(a + b for a, b in zip(ef, eg))))
        return Polynomial.from_terms(self.r, raw)


def parse(text: str, r: int) -> Polynomial:
    """Parse polynomial text in variables x1..xr into canonical form."""
    if r < 1:
        raise ValidationError(f"ambient dimension must be >= 1, got {r}")
    return _Parser(text, r).parse()
