"""Sparse multivariate polynomials over Q with a fixed lexicographic variable context.

Monomials are exponent tuples aligned with the context: position 0 is the
greatest variable in the lex order, so plain tuple comparison *is* the
monomial order. Coefficients are `fractions.Fraction` (exact, auto-reduced).
Polynomials are immutable once built; all arithmetic returns new objects.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator, Mapping, NamedTuple, Optional, Sequence, Union

Rational = Fraction
Monomial = tuple  # exponent tuple, one entry per context variable

# Variable block roles used throughout the system builders.
BLOCK_X = "decision-x"
BLOCK_Y = "objective-y"
BLOCK_SLACK = "slack"
BLOCK_GAMMA = "gamma"
BLOCK_NU = "nu"
BLOCK_LAMBDA = "lambda"
BLOCK_MU = "mu"
BLOCK_BETA = "beta"
BLOCK_OMEGA = "omega"
BLOCK_LAMBDA0 = "lambda0"


class ContextMismatchError(ValueError):
    """Raised when an operation mixes polynomials from different contexts."""


class UnknownVariableError(ValueError):
    """Raised when a variable name is not part of the context at hand."""


class PolynomialSyntaxError(ValueError):
    """Parse failure in polynomial text; `offset` is the byte position."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class Variable(NamedTuple):
    name: str
    block: str
    index: int  # position within its block, 0-based


class VarContext:
    """Ordered tuple of variables; position 0 is the greatest in lex order."""

    __slots__ = ("variables", "names", "_pos")

    def __init__(self, variables: Sequence[Variable]):
        self.variables = tuple(variables)
        self.names = tuple(v.name for v in self.variables)
        self._pos = {n: i for i, n in enumerate(self.names)}
        if len(self._pos) != len(self.names):
            raise ValueError("duplicate variable names in context")

    def __len__(self) -> int:
        return len(self.variables)

    def __eq__(self, other) -> bool:
        return isinstance(other, VarContext) and self.variables == other.variables

    def __hash__(self) -> int:
        return hash(self.variables)

    def __repr__(self) -> str:
        return "VarContext(%s)" % ", ".join(self.names)

    def position(self, name: str) -> int:
        try:
            return self._pos[name]
        except KeyError:
            raise UnknownVariableError(f"unknown variable {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._pos

    def block_of(self, name: str) -> str:
        return self.variables[self.position(name)].block

    def block_names(self, block: str) -> tuple:
        return tuple(v.name for v in self.variables if v.block == block)

    def is_trailing(self, names: Iterable[str]) -> bool:
        """True if `names` occupy exactly the last positions of the context."""
        pos = sorted(self.position(n) for n in names)
        return pos == list(range(len(self) - len(pos), len(self)))


def make_context(pairs: Sequence) -> VarContext:
    """Build a context from (name, block) pairs, numbering within each block."""
    counters: dict = {}
    vs = []
    for name, block in pairs:
        i = counters.get(block, 0)
        counters[block] = i + 1
        vs.append(Variable(name, block, i))
    return VarContext(vs)


def decision_context(n: int) -> VarContext:
    return make_context([(f"x{i + 1}", BLOCK_X) for i in range(n)])


# -- monomial helpers (exponent tuples) --------------------------------------

def monomial_mul(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x + y for x, y in zip(a, b))

def monomial_divides(a: Monomial, b: Monomial) -> bool:
    return all(x <= y for x, y in zip(a, b))

def monomial_div(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x - y for x, y in zip(a, b))

def monomial_lcm(a: Monomial, b: Monomial) -> Monomial:
    return tuple(max(x, y) for x, y in zip(a, b))


_ScalarLike = Union[int, Fraction]


class Polynomial:
    """Immutable sparse polynomial; terms map exponent tuples to Fractions."""

    __slots__ = ("context", "_terms", "_sorted")

    def __init__(self, context: VarContext, terms: Mapping[Monomial, _ScalarLike]):
        self.context = context
        clean = {}
        nv = len(context)
        for mono, c in terms.items():
            c = Fraction(c)
            if not c:
                continue
            if len(mono) != nv:
                raise ValueError("exponent tuple length does not match context")
            clean[mono] = c
        self._terms = clean
        self._sorted: Optional[list] = None

    # -- construction helpers --

    @classmethod
    def zero(cls, context: VarContext) -> "Polynomial":
        return cls(context, {})

    @classmethod
    def constant(cls, context: VarContext, c: _ScalarLike) -> "Polynomial":
        return cls(context, {(0,) * len(context): Fraction(c)})

    @classmethod
    def variable(cls, context: VarContext, name: str) -> "Polynomial":
        exps = [0] * len(context)
        exps[context.position(name)] = 1
        return cls(context, {tuple(exps): Fraction(1)})

    # -- inspection --

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def num_terms(self) -> int:
        return len(self._terms)

    def terms(self) -> Iterator:
        """Yield (monomial, coefficient) in strictly decreasing lex order."""
        if self._sorted is None:
            self._sorted = sorted(self._terms.items(), reverse=True)
        return iter(self._sorted)

    def terms_dict(self) -> dict:
        return dict(self._terms)

    def coefficient(self, mono: Monomial) -> Fraction:
        return self._terms.get(tuple(mono), Fraction(0))

    def leading_term(self):
        if not self._terms:
            raise ValueError("zero polynomial has no leading term")
        m = max(self._terms)
        return m, self._terms[m]

    def leading_monomial(self) -> Monomial:
        return self.leading_term()[0]

    def leading_coefficient(self) -> Fraction:
        return self.leading_term()[1]

    def constant_value(self) -> Fraction:
        """The value of a constant polynomial (raises if any variable occurs)."""
        if not self._terms:
            return Fraction(0)
        unit = (0,) * len(self.context)
        if list(self._terms) != [unit]:
            raise ValueError("polynomial is not constant")
        return self._terms[unit]

    def total_degree(self) -> int:
        if not self._terms:
            return 0
        return max(sum(m) for m in self._terms)

    def support(self) -> frozenset:
        """Names of variables appearing with a nonzero exponent."""
        used = set()
        for m in self._terms:
            for i, e in enumerate(m):
                if e:
                    used.add(i)
        return frozenset(self.context.names[i] for i in used)

    def support_positions(self) -> frozenset:
        used = set()
        for m in self._terms:
            for i, e in enumerate(m):
                if e:
                    used.add(i)
        return frozenset(used)

    # -- arithmetic --

    def _check(self, other: "Polynomial"):
        if self.context != other.context:
            raise ContextMismatchError("polynomials belong to different contexts")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self.context, other)
        self._check(other)
        terms = dict(self._terms)
        for m, c in other._terms.items():
            s = terms.get(m, 0) + c
            if s:
                terms[m] = s
            else:
                terms.pop(m, None)
        return Polynomial(self.context, terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.context, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self.context, other)
        return self.__add__(other.__neg__())

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return Polynomial.zero(self.context)
            return Polynomial(
                self.context, {m: c * other for m, c in self._terms.items()}
            )
        self._check(other)
        out: dict = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                s = out.get(m, 0) + c1 * c2
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return Polynomial(self.context, out)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative power of a polynomial")
        out = Polynomial.constant(self.context, 1)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base if e > 1 else base
            e >>= 1
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self.context, other)
        return (
            isinstance(other, Polynomial)
            and self.context == other.context
            and self._terms == other._terms
        )

    def __hash__(self) -> int:
        return hash((self.context, frozenset(self._terms.items())))

    # -- calculus and evaluation --

    def partial_derivative(self, name: str) -> "Polynomial":
        i = self.context.position(name)
        out = {}
        for m, c in self._terms.items():
            e = m[i]
            if e:
                dm = m[:i] + (e - 1,) + m[i + 1 :]
                s = out.get(dm, 0) + c * e
                if s:
                    out[dm] = s
                else:
                    out.pop(dm, None)
        return Polynomial(self.context, out)

    def evaluate(self, assignment: Mapping[str, _ScalarLike]) -> "Polynomial":
        """Substitute values for some variables; returns a polynomial over the
        same context with those exponents cleared."""
        pos = {}
        for name, val in assignment.items():
            pos[self.context.position(name)] = Fraction(val)
        out: dict = {}
        for m, c in self._terms.items():
            factor = c
            new = list(m)
            for i, val in pos.items():
                e = m[i]
                if e:
                    factor *= val ** e
                    new[i] = 0
            if not factor:
                continue
            key = tuple(new)
            s = out.get(key, 0) + factor
            if s:
                out[key] = s
            else:
                out.pop(key, None)
        return Polynomial(self.context, out)

    def univariate_view(self):
        """Return (name, coeffs low-to-high) if exactly one variable occurs,
        (None, [c]) for constants, or None if genuinely multivariate."""
        positions = self.support_positions()
        if len(positions) > 1:
            return None
        if not positions:
            return None, [self.constant_value()]
        i = next(iter(positions))
        deg = max(m[i] for m in self._terms)
        coeffs = [Fraction(0)] * (deg + 1)
        for m, c in self._terms.items():
            coeffs[m[i]] += c
        return self.context.names[i], coeffs

    def embed(self, new_context: VarContext) -> "Polynomial":
        """Rebind to a wider context by variable name; missing names are an error."""
        mapping = [new_context.position(n) for n in self.context.names]
        nv = len(new_context)
        out = {}
        for m, c in self._terms.items():
            exps = [0] * nv
            for src, e in enumerate(m):
                if e:
                    exps[mapping[src]] = e
            out[tuple(exps)] = c
        return Polynomial(new_context, out)

    # -- text form --

    def to_text(self) -> str:
        """Canonical text: terms in decreasing lex order, `c/d*v1^e1*...` with
        unit coefficients and exponents elided."""
        if not self._terms:
            return "0"
        chunks = []
        for m, c in self.terms():
            body = "*".join(
                n if e == 1 else f"{n}^{e}"
                for n, e in zip(self.context.names, m)
                if e
            )
            a = abs(c)
            if not body:
                text = str(a)
            elif a == 1:
                text = body
            else:
                text = f"{a}*{body}"
            chunks.append(("-" if c < 0 else "+", text))
        sign, first = chunks[0]
        s = ("-" if sign == "-" else "") + first
        for sign, text in chunks[1:]:
            s += f" {sign} {text}"
        return s

    def __repr__(self) -> str:
        return f"Polynomial({self.to_text()})"


def format_polynomial(p: Polynomial) -> str:
    return p.to_text()


# -- parsing -------------------------------------------------------------------

def _skip_ws(text: str, i: int) -> int:
    while i < len(text) and text[i] in " \t":
        i += 1
    return i


def _read_int(text: str, i: int) -> "tuple[int, int]":
    j = i
    while j < len(text) and text[j].isdigit():
        j += 1
    if j == i:
        raise PolynomialSyntaxError("expected a digit", i)
    return int(text[i:j]), j


def _read_name(text: str, i: int) -> "tuple[str, int]":
    j = i
    while j < len(text) and (text[j].isalnum() or text[j] == "_"):
        j += 1
    return text[i:j], j


def parse_polynomial(context: VarContext, text: str) -> Polynomial:
    """Parse the canonical/CLI expression grammar: terms of [coef][*var[^exp]...]
    joined by + and -, coef an integer or num/den. Raises PolynomialSyntaxError
    with the byte offset of the failure."""
    nv = len(context)
    terms: dict = {}
    i = _skip_ws(text, 0)
    if i == len(text):
        raise PolynomialSyntaxError("empty expression", i)
    first = True
    while i < len(text):
        sign = 1
        i = _skip_ws(text, i)
        if i < len(text) and text[i] in "+-":
            sign = -1 if text[i] == "-" else 1
            i = _skip_ws(text, i + 1)
        elif not first:
            raise PolynomialSyntaxError("expected + or - between terms", i)
        if i == len(text):
            raise PolynomialSyntaxError("dangling sign", i)
        first = False

        coeff = Fraction(sign)
        exps = [0] * nv
        saw_factor = False

        if text[i].isdigit():
            num, i = _read_int(text, i)
            den = 1
            if i < len(text) and text[i] == "/":
                den, i = _read_int(text, i + 1)
                if den == 0:
                    raise PolynomialSyntaxError("zero denominator", i - 1)
            coeff *= Fraction(num, den)
            saw_factor = True
            i = _skip_ws(text, i)
            while i < len(text) and text[i] == "*":
                i = _skip_ws(text, i + 1)
                i = _read_var(context, text, i, exps)
                i = _skip_ws(text, i)
        elif text[i].isalpha() or text[i] == "_":
            i = _read_var(context, text, i, exps)
            saw_factor = True
            i = _skip_ws(text, i)
            while i < len(text) and text[i] == "*":
                i = _skip_ws(text, i + 1)
                i = _read_var(context, text, i, exps)
                i = _skip_ws(text, i)
        if not saw_factor:
            raise PolynomialSyntaxError("expected a coefficient or variable", i)

        key = tuple(exps)
        s = terms.get(key, Fraction(0)) + coeff
        if s:
            terms[key] = s
        else:
            terms.pop(key, None)
        i = _skip_ws(text, i)
        if i < len(text) and text[i] not in "+-":
            raise PolynomialSyntaxError(f"stray token {text[i]!r}", i)
    return Polynomial(context, terms)


def _read_var(context: VarContext, text: str, i: int, exps: list) -> int:
    if i == len(text) or not (text[i].isalpha() or text[i] == "_"):
        raise PolynomialSyntaxError("expected a variable name", i)
    name, j = _read_name(text, i)
    try:
        pos = context.position(name)
    except UnknownVariableError:
        raise PolynomialSyntaxError(f"unknown variable {name!r}", i) from None
    e = 1
    if j < len(text) and text[j] == "^":
        e, j = _read_int(text, j + 1)
    exps[pos] += e
    return j
