"""Sparse multivariate polynomials over the reals.

A polynomial is a finite map from integer exponent vectors to nonzero float
coefficients.  This module provides parsing and rendering of a small text
grammar, evaluation, homogenization, and the decomposition used by every
bound computation: constant term, degree-2d "diagonal" coefficients (the
pure powers X_i^2d), the set of remaining exponents, and the subset of those
whose terms are not squares of monomials.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Tuple


class ParseError(ValueError):
    """Malformed polynomial text; carries the character position."""

    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} (at position {position})")
        self.position = position


class ExponentVector(tuple):
    """Exponent vector of a single monomial: a tuple of nonnegative ints."""

    def __new__(cls, entries: Iterable[int]) -> "ExponentVector":
        vec = super().__new__(cls, (int(e) for e in entries))
        for e in vec:
            if e < 0:
                raise ValueError(f"negative exponent in {tuple(vec)}")
        return vec

    @property
    def n(self) -> int:
        return len(self)

    def total_degree(self) -> int:
        return sum(self)

    @property
    def n_nonzero(self) -> int:
        """Number of variables occurring in the monomial."""
        return sum(1 for e in self if e)

    def support(self) -> Tuple[int, ...]:
        return tuple(i for i, e in enumerate(self) if e)

    @classmethod
    def axis(cls, n: int, i: int, power: int = 1) -> "ExponentVector":
        """The vector power * e_i in n variables."""
        if not 0 <= i < n:
            raise ValueError(f"axis index {i} out of range for n={n}")
        return cls(power if j == i else 0 for j in range(n))

    def __repr__(self) -> str:
        return f"ExponentVector({tuple(self)})"


def _as_exponent(alpha, n: int) -> ExponentVector:
    vec = alpha if isinstance(alpha, ExponentVector) else ExponentVector(alpha)
    if len(vec) != n:
        raise ValueError(f"exponent vector {tuple(vec)} has length {len(vec)}, expected {n}")
    return vec


class SparsePolynomial:
    """Immutable sparse polynomial in ``n`` variables.

    Zero coefficients are never stored; the zero polynomial has an empty term
    map and degree 0 by convention.
    """

    __slots__ = ("_n", "_terms")

    def __init__(self, n: int, terms: Mapping) -> None:
        self._n = int(n)
        if self._n < 0:
            raise ValueError("variable count must be nonnegative")
        clean = {}
        for alpha, coeff in terms.items():
            vec = _as_exponent(alpha, self._n)
            c = float(coeff)
            if c != 0.0:
                clean[vec] = c
        self._terms = clean

    @classmethod
    def from_terms(cls, n: int, items: Iterable[Tuple[Iterable[int], float]]) -> "SparsePolynomial":
        """Build from (exponent, coefficient) pairs, merging duplicates."""
        acc: dict = {}
        for alpha, coeff in items:
            vec = _as_exponent(alpha, n)
            acc[vec] = acc.get(vec, 0.0) + float(coeff)
        return cls(n, acc)

    @classmethod
    def zero(cls, n: int) -> "SparsePolynomial":
        return cls(n, {})

    @property
    def n(self) -> int:
        return self._n

    @property
    def terms(self) -> Mapping[ExponentVector, float]:
        return MappingProxyType(self._terms)

    @property
    def degree(self) -> int:
        if not self._terms:
            return 0
        return max(a.total_degree() for a in self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_constant(self) -> bool:
        return self.degree == 0

    @property
    def is_form(self) -> bool:
        """True iff every term has total degree equal to the degree."""
        d = self.degree
        return all(a.total_degree() == d for a in self._terms)

    def coefficient(self, alpha) -> float:
        return self._terms.get(_as_exponent(alpha, self._n), 0.0)

    def add_constant(self, c: float) -> "SparsePolynomial":
        zero = ExponentVector((0,) * self._n)
        new = dict(self._terms)
        new[zero] = new.get(zero, 0.0) + float(c)
        return SparsePolynomial(self._n, new)

    def evaluate(self, point: Sequence[float]) -> float:
        return evaluate(self, point)

    def __iter__(self) -> Iterator[Tuple[ExponentVector, float]]:
        return iter(self._terms.items())

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparsePolynomial):
            return NotImplemented
        return self._n == other._n and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self._n, frozenset(self._terms.items())))

    def __repr__(self) -> str:
        return f"SparsePolynomial({self._n}, {self._terms!r})"

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True)
class DecompositionView:
    """Split of an even-degree polynomial into constant, diagonal and the rest.

    ``diag[i]`` is the coefficient of X_i^2d (0 when absent).  ``omega`` holds
    every other exponent with a nonzero coefficient; ``delta`` is the subset
    whose terms are not squares (negative coefficient or an odd exponent);
    ``delta_lt`` restricts ``delta`` to total degree < 2d.
    """

    f0: float
    diag: Tuple[float, ...]
    omega: frozenset
    delta: frozenset
    delta_lt: frozenset
    two_d: int

    @property
    def n(self) -> int:
        return len(self.diag)


# ---------------------------------------------------------------------------
# parsing / rendering
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
      | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
      | (?P<op>[-+*/^])
    """,
    re.VERBOSE,
)

_INT_RE = re.compile(r"\d+$")


def _tokenize(text: str):
    """Return (kind, value, position) triples; kind in {num, name, op}."""
    text = re.sub(r"#[^\n]*", lambda m: " " * len(m.group(0)), text)
    text = text.replace("−", "-")  # unicode minus
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(0), pos))
        pos = m.end()
    return tokens


def _natural_key(name: str):
    m = re.fullmatch(r"(.*?)(\d+)", name)
    if m:
        return (m.group(1), int(m.group(2)))
    return (name, -1)


def infer_variable_names(text: str) -> list:
    """Variable names appearing in the text, in natural sorted order."""
    seen = []
    for kind, value, _ in _tokenize(text):
        if kind == "name" and value not in seen:
            seen.append(value)
    return sorted(seen, key=_natural_key)


class _Parser:
    def __init__(self, tokens, index: Mapping[str, int], n: int):
        self.tokens = tokens
        self.index = index
        self.n = n
        self.k = 0

    def peek(self):
        return self.tokens[self.k] if self.k < len(self.tokens) else (None, None, -1)

    def next(self):
        tok = self.peek()
        self.k += 1
        return tok

    def expect_int(self, value: str, pos: int) -> int:
        if not _INT_RE.fullmatch(value):
            raise ParseError(f"fractional exponent {value!r}", pos)
        return int(value)

    def parse(self):
        items = []
        sign = 1.0
        kind, value, pos = self.peek()
        if kind == "op" and value in "+-":
            self.next()
            sign = -1.0 if value == "-" else 1.0
        while True:
            alpha, coeff = self.term()
            items.append((alpha, sign * coeff))
            kind, value, pos = self.peek()
            if kind is None:
                break
            if kind == "op" and value in "+-":
                self.next()
                sign = -1.0 if value == "-" else 1.0
            else:
                raise ParseError(f"expected '+' or '-', found {value!r}", pos)
        return items

    def term(self):
        coeff = 1.0
        exponents = [0] * self.n
        have_factor = False

        kind, value, pos = self.peek()
        if kind == "num":
            self.next()
            coeff = self.coefficient(value, pos)
            have_factor = True
            kind, value, pos = self.peek()
            if kind == "op" and value == "*":
                self.next()
                kind, value, pos = self.peek()
                if kind != "name":
                    raise ParseError("expected a variable after '*'", pos)

        while True:
            kind, value, pos = self.peek()
            if kind != "name":
                break
            self.next()
            if value not in self.index:
                raise ParseError(f"unknown variable {value!r}", pos)
            exp = 1
            kind2, value2, pos2 = self.peek()
            if kind2 == "op" and value2 == "^":
                self.next()
                kind3, value3, pos3 = self.peek()
                if kind3 == "op" and value3 == "-":
                    raise ParseError("negative exponent", pos3)
                if kind3 != "num":
                    raise ParseError("expected an integer exponent after '^'", pos3)
                self.next()
                exp = self.expect_int(value3, pos3)
            exponents[self.index[value]] += exp
            have_factor = True
            kind, value, pos = self.peek()
            if kind == "op" and value == "*":
                self.next()
                kind, value, pos = self.peek()
                if kind != "name":
                    raise ParseError("expected a variable after '*'", pos)

        if not have_factor:
            kind, value, pos = self.peek()
            raise ParseError(f"expected a term, found {value!r}", pos)
        return ExponentVector(exponents), coeff

    def coefficient(self, value: str, pos: int) -> float:
        kind, nxt, pos2 = self.peek()
        if kind == "op" and nxt == "/":
            self.next()
            kind3, denom, pos3 = self.peek()
            if kind3 != "num":
                raise ParseError("expected a denominator after '/'", pos3)
            self.next()
            if not (_INT_RE.fullmatch(value) and _INT_RE.fullmatch(denom)):
                raise ParseError("fractions must be integer/integer", pos)
            if int(denom) == 0:
                raise ParseError("zero denominator", pos3)
            return int(value) / int(denom)
        return float(value)


def parse_polynomial(text: str, var_names: Optional[Sequence[str]] = None) -> SparsePolynomial:
    """Parse polynomial text such as ``"X^4+Y^4-X^2*Y^2+X+Y"``.

    Terms are separated by + or -; a term is an optional coefficient
    (decimal literal or integer fraction p/q) followed by ``*``-separated
    variable powers.  With ``var_names`` unset, variables are discovered from
    the text and ordered naturally (X1 < X2 < X10, X < Y < Z); `#` starts a
    comment.  Like terms are merged and zero coefficients dropped.
    """
    tokens = _tokenize(text)
    if var_names is None:
        names = infer_variable_names(text)
    else:
        names = list(var_names)
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable names")
    index = {name: i for i, name in enumerate(names)}
    parser = _Parser(tokens, index, len(names))
    if not tokens:
        raise ParseError("empty input", 0)
    return SparsePolynomial.from_terms(len(names), parser.parse())


def _format_coefficient(c: float) -> str:
    if c == int(c) and abs(c) < 1e15:
        return str(int(c))
    return repr(c)


def render(f: SparsePolynomial, var_names: Optional[Sequence[str]] = None) -> str:
    """Canonical text form, graded-lexicographic descending term order."""
    if var_names is None:
        var_names = [f"X{i + 1}" for i in range(f.n)]
    if len(var_names) != f.n:
        raise ValueError("wrong number of variable names")
    if f.is_zero:
        return "0"

    def key(alpha: ExponentVector):
        return (-alpha.total_degree(), tuple(-e for e in alpha))

    pieces = []
    for alpha in sorted(f.terms, key=key):
        c = f.terms[alpha]
        factors = [
            var_names[i] if e == 1 else f"{var_names[i]}^{e}"
            for i, e in enumerate(alpha)
            if e
        ]
        mag = abs(c)
        if not factors:
            body = _format_coefficient(mag)
        elif mag == 1.0:
            body = "*".join(factors)
        else:
            body = "*".join([_format_coefficient(mag)] + factors)
        if not pieces:
            pieces.append(body if c > 0 else "-" + body)
        else:
            pieces.append(("+ " if c > 0 else "- ") + body)
    return " ".join(pieces)


# ---------------------------------------------------------------------------
# decomposition / homogenization / evaluation
# ---------------------------------------------------------------------------

def decompose(f: SparsePolynomial) -> DecompositionView:
    """Split f into constant, degree-2d diagonal, and the remaining exponents.

    Raises ValueError for constant or odd-degree input.
    """
    if f.is_constant:
        raise ValueError("cannot decompose a constant polynomial")
    deg = f.degree
    if deg % 2 != 0:
        raise ValueError(f"polynomial degree {deg} is odd")
    n = f.n
    zero = ExponentVector((0,) * n)
    diag_keys = {ExponentVector.axis(n, i, deg): i for i in range(n)}

    f0 = 0.0
    diag = [0.0] * n
    omega = set()
    delta = set()
    for alpha, c in f.terms.items():
        if alpha == zero:
            f0 = c
        elif alpha in diag_keys:
            diag[diag_keys[alpha]] = c
        else:
            omega.add(alpha)
            if c < 0 or any(e % 2 for e in alpha):
                delta.add(alpha)
    delta_lt = {a for a in delta if a.total_degree() < deg}
    return DecompositionView(
        f0=f0,
        diag=tuple(diag),
        omega=frozenset(omega),
        delta=frozenset(delta),
        delta_lt=frozenset(delta_lt),
        two_d=deg,
    )


def homogenize(f: SparsePolynomial) -> SparsePolynomial:
    """Lift f to a form in n+1 variables of the same total degree.

    Each term X^alpha picks up the new last variable to the power
    deg(f) - |alpha|; substituting 1 for that variable recovers f.
    """
    if f.is_constant:
        raise ValueError("cannot homogenize a constant polynomial")
    deg = f.degree
    return SparsePolynomial(
        f.n + 1,
        {
            ExponentVector(tuple(alpha) + (deg - alpha.total_degree(),)): c
            for alpha, c in f.terms.items()
        },
    )


def substitute_last(f: SparsePolynomial, value: float = 1.0) -> SparsePolynomial:
    """Substitute a constant for the last variable (inverse of homogenize at 1)."""
    if f.n == 0:
        raise ValueError("no variable to substitute")
    return SparsePolynomial.from_terms(
        f.n - 1,
        (
            (ExponentVector(alpha[:-1]), c * value ** alpha[-1])
            for alpha, c in f.terms.items()
        ),
    )


def evaluate(f: SparsePolynomial, point: Sequence[float]) -> float:
    """Evaluate f at the point, with the convention 0**0 = 1."""
    if len(point) != f.n:
        raise ValueError(f"point has length {len(point)}, expected {f.n}")
    xs = [float(x) for x in point]
    total = 0.0
    for alpha, c in f.terms.items():
        term = c
        for x, e in zip(xs, alpha):
            if e:
                term *= x ** e
        total += term
    return total
