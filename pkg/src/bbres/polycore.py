"""Sparse multivariate polynomials with complex coefficients.

A :class:`MultiPoly` lives in ``num_vars`` chart variables plus one reserved
slot for the deformation parameter ``t``. Every exponent tuple therefore has
length ``num_vars + 1`` and the last entry is the power of ``t``.

Values are immutable; all arithmetic returns new objects in canonical form
(merged exponents, negligible coefficients dropped).
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

__all__ = [
    "MultiPoly",
    "PolyParseError",
    "ZERO_THRESHOLD",
    "format_poly",
    "parse_poly",
    "poly_add",
    "poly_diff",
    "poly_eval",
    "poly_mul",
    "poly_substitute",
]

ZERO_THRESHOLD = 1e-14

Exponents = tuple[int, ...]


class PolyParseError(ValueError):
    """Raised for malformed polynomial text. ``position`` is a 0-based column."""

    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at column {position + 1}")


def _canonical(terms: Mapping[Exponents, complex]) -> dict[Exponents, complex]:
    live = {e: complex(c) for e, c in terms.items() if c != 0}
    if not live:
        return {}
    cutoff = ZERO_THRESHOLD * max(abs(c) for c in live.values())
    return {e: c for e, c in live.items() if abs(c) >= cutoff}


def _order_key(exps: Exponents):
    # parameter power outermost, then ascending total degree, then x > y > z
    chart = exps[:-1]
    return (exps[-1], sum(chart), tuple(-e for e in chart))


class MultiPoly:
    """Polynomial in ``num_vars`` chart variables and the parameter ``t``.

    ``terms`` maps exponent tuples of length ``num_vars + 1`` to complex
    coefficients. Construction canonicalizes: exact zeros and coefficients
    below ``ZERO_THRESHOLD`` times the largest modulus are dropped.
    """

    __slots__ = ("num_vars", "_terms", "_hash")

    def __init__(self, num_vars: int, terms: Mapping[Sequence[int], complex] | None = None):
        if num_vars < 1:
            raise ValueError("num_vars must be >= 1")
        merged: dict[Exponents, complex] = {}
        for exps, coeff in (terms or {}).items():
            key = tuple(int(e) for e in exps)
            if len(key) != num_vars + 1:
                raise ValueError(
                    f"exponent tuple {key} has length {len(key)}, expected {num_vars + 1}"
                )
            if any(e < 0 for e in key):
                raise ValueError(f"negative exponent in {key}")
            merged[key] = merged.get(key, 0) + complex(coeff)
        object.__setattr__(self, "num_vars", num_vars)
        object.__setattr__(self, "_terms", _canonical(merged))
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("MultiPoly is immutable")

    # -- constructors ----------------------------------------------------
    @classmethod
    def zero(cls, num_vars: int) -> "MultiPoly":
        return cls(num_vars)

    @classmethod
    def constant(cls, num_vars: int, value: complex) -> "MultiPoly":
        return cls(num_vars, {(0,) * (num_vars + 1): value})

    @classmethod
    def variable(cls, num_vars: int, index: int) -> "MultiPoly":
        """The monomial for chart variable ``index``; ``index == num_vars`` is ``t``."""
        if not 0 <= index <= num_vars:
            raise IndexError(f"variable index {index} out of range 0..{num_vars}")
        exps = [0] * (num_vars + 1)
        exps[index] = 1
        return cls(num_vars, {tuple(exps): 1})

    # -- inspection ------------------------------------------------------
    @property
    def terms(self) -> dict[Exponents, complex]:
        return dict(self._terms)

    def items(self):
        """Terms in canonical (printing) order."""
        return sorted(self._terms.items(), key=lambda kv: _order_key(kv[0]))

    @property
    def has_parameter(self) -> bool:
        return any(e[-1] > 0 for e in self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        """Total degree in the chart variables (the parameter does not count)."""
        if not self._terms:
            return -1
        return max(sum(e[:-1]) for e in self._terms)

    def degree_in(self, index: int) -> int:
        if not self._terms:
            return -1
        return max(e[index] for e in self._terms)

    def min_degree_in(self, index: int) -> int:
        if not self._terms:
            return 0
        return min(e[index] for e in self._terms)

    # -- arithmetic sugar --------------------------------------------------
    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            return other
        if isinstance(other, (int, float, complex)):
            return MultiPoly.constant(self.num_vars, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        return NotImplemented if other is NotImplemented else poly_add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.num_vars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        return NotImplemented if other is NotImplemented else poly_add(self, -other)

    def __rsub__(self, other):
        other = self._coerce(other)
        return NotImplemented if other is NotImplemented else poly_add(other, -self)

    def __mul__(self, other):
        other = self._coerce(other)
        return NotImplemented if other is NotImplemented else poly_mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = MultiPoly.constant(self.num_vars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.num_vars == other.num_vars and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(
                self, "_hash", hash((self.num_vars, frozenset(self._terms.items())))
            )
        return self._hash

    def allclose(self, other: "MultiPoly", rtol: float = 1e-12, atol: float = 0.0) -> bool:
        """Coefficient-wise comparison relative to the largest coefficient."""
        if self.num_vars != other.num_vars:
            return False
        keys = set(self._terms) | set(other._terms)
        scale = max([abs(c) for c in self._terms.values()] + [abs(c) for c in other._terms.values()] + [0.0])
        return all(
            abs(self._terms.get(k, 0) - other._terms.get(k, 0)) <= atol + rtol * scale
            for k in keys
        )

    def __repr__(self):
        names = [f"x{i}" for i in range(self.num_vars)]
        return f"MultiPoly({format_poly(self, names, 't')!r})"


def _check_arity(p: MultiPoly, q: MultiPoly) -> None:
    if p.num_vars != q.num_vars:
        raise ValueError(f"variable-count mismatch: {p.num_vars} vs {q.num_vars}")


def poly_add(p: MultiPoly, q: MultiPoly) -> MultiPoly:
    _check_arity(p, q)
    out = p.terms
    for e, c in q._terms.items():
        out[e] = out.get(e, 0) + c
    return MultiPoly(p.num_vars, out)


def poly_mul(p: MultiPoly, q: MultiPoly) -> MultiPoly:
    _check_arity(p, q)
    out: dict[Exponents, complex] = {}
    for e1, c1 in p._terms.items():
        for e2, c2 in q._terms.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = out.get(e, 0) + c1 * c2
    return MultiPoly(p.num_vars, out)


def poly_diff(p: MultiPoly, var_index: int) -> MultiPoly:
    """Formal partial derivative; ``var_index == num_vars`` differentiates in ``t``."""
    if not 0 <= var_index <= p.num_vars:
        raise IndexError(f"variable index {var_index} out of range 0..{p.num_vars}")
    out: dict[Exponents, complex] = {}
    for e, c in p._terms.items():
        k = e[var_index]
        if k == 0:
            continue
        lowered = list(e)
        lowered[var_index] = k - 1
        out[tuple(lowered)] = out.get(tuple(lowered), 0) + c * k
    return MultiPoly(p.num_vars, out)


def _horner(coeffs: dict[int, complex], x: complex) -> complex:
    top = max(coeffs)
    acc = 0j
    for k in range(top, -1, -1):
        acc = acc * x + coeffs.get(k, 0)
    return acc


def poly_eval(p: MultiPoly, point: Sequence[complex], t_value: complex = 0.0) -> complex:
    """Evaluate at ``point`` (length ``num_vars``) and ``t = t_value``.

    Nested Horner in the variable order x_0, x_1, ..., t: the polynomial is
    viewed as a univariate polynomial in x_0 whose coefficients are
    polynomials in the remaining variables, and so on.
    """
    if len(point) != p.num_vars:
        raise ValueError(f"point has length {len(point)}, expected {p.num_vars}")
    values = [complex(v) for v in point] + [complex(t_value)]
    if not p._terms:
        return 0j

    def rec(terms: list[tuple[Exponents, complex]], depth: int) -> complex:
        if depth == len(values):
            return sum((c for _, c in terms), 0j)
        buckets: dict[int, list] = {}
        for e, c in terms:
            buckets.setdefault(e[depth], []).append((e, c))
        inner = {k: rec(v, depth + 1) for k, v in buckets.items()}
        return _horner(inner, values[depth])

    return rec(list(p._terms.items()), 0)


def poly_substitute(
    p: MultiPoly,
    substitutions: Mapping[int, MultiPoly],
    denominator_var: int,
    denominator_power: int | Mapping[int, int] = 1,
) -> tuple[MultiPoly, int]:
    """Substitute ``x_i -> N_i / w**k_i`` and clear the denominator.

    ``substitutions`` maps chart-variable indices to numerators ``N_i`` and
    ``w`` is chart variable ``denominator_var``. Unsubstituted variables are
    kept as they are. Returns ``(q, e)`` with ``e >= 0`` minimal such that
    ``w**e * p(substituted) == q`` as polynomials.
    """
    n = p.num_vars
    if not 0 <= denominator_var < n:
        raise IndexError(f"denominator variable {denominator_var} out of range")
    for i, num in substitutions.items():
        if not 0 <= i < n:
            raise IndexError(f"substituted variable {i} out of range")
        if num.num_vars != n:
            raise ValueError("numerator arity does not match")
    if isinstance(denominator_power, Mapping):
        powers = {i: int(denominator_power.get(i, 1)) for i in substitutions}
    else:
        powers = {i: int(denominator_power) for i in substitutions}
    if p.is_zero:
        return p, 0

    one = MultiPoly.constant(n, 1)
    pieces = []
    for exps, coeff in p._terms.items():
        keep = list(exps)
        body = one
        shift = 0
        for i, num in substitutions.items():
            k = exps[i]
            if k:
                body = body * num**k
                shift += powers[i] * k
            keep[i] = 0
        body = body * MultiPoly(n, {tuple(keep): coeff})
        pieces.append((body, shift))

    top = max(s for _, s in pieces)
    raw = MultiPoly.zero(n)
    for body, shift in pieces:
        raw = raw + _shift(body, denominator_var, top - shift)
    if raw.is_zero:
        return raw, 0
    valuation = raw.min_degree_in(denominator_var)
    e = max(0, top - valuation)
    return _shift(raw, denominator_var, e - top), e


def _shift(p: MultiPoly, index: int, k: int) -> MultiPoly:
    """Multiply by ``x_index**k``; negative ``k`` must divide exactly."""
    if k == 0:
        return p
    out = {}
    for e, c in p._terms.items():
        lifted = list(e)
        lifted[index] += k
        if lifted[index] < 0:
            raise ValueError("monomial shift would produce a negative exponent")
        out[tuple(lifted)] = c
    return MultiPoly(p.num_vars, out)


# -- printing ---------------------------------------------------------------

def _format_real(x: float) -> str:
    if x == int(x) and abs(x) < 2**53:
        return str(int(x))
    return repr(x)


def _format_coeff(c: complex) -> tuple[str, bool]:
    """Return (magnitude text, negative) for a coefficient."""
    if c.imag == 0:
        return _format_real(abs(c.real)), c.real < 0
    if c.real == 0:
        return _format_real(abs(c.imag)) + "j", c.imag < 0
    return f"({_format_real(c.real)}{'+' if c.imag >= 0 else '-'}{_format_real(abs(c.imag))}j)", False


def format_poly(p: MultiPoly, variable_names: Sequence[str], parameter_name: str = "t") -> str:
    """Print in the expression grammar accepted by :func:`parse_poly`."""
    names = list(variable_names) + [parameter_name]
    if len(names) != p.num_vars + 1:
        raise ValueError("need one name per chart variable")
    if p.is_zero:
        return "0"
    chunks = []
    for exps, coeff in p.items():
        factors = [n if k == 1 else f"{n}^{k}" for n, k in zip(names, exps) if k]
        mag, negative = _format_coeff(coeff)
        if factors and mag == "1":
            body = "*".join(factors)
        else:
            body = "*".join([mag] + factors)
        if not chunks:
            chunks.append(("-" if negative else "") + body)
        else:
            chunks.append(("- " if negative else "+ ") + body)
    return " ".join(chunks)


# -- parsing ----------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?j?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            col = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise PolyParseError(f"unexpected character {text[col]!r}", col, text)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, names: dict[str, int], num_vars: int):
        self.text = text
        self.names = names
        self.n = num_vars
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, message, tok=None):
        tok = tok or self.peek()
        raise PolyParseError(message, tok[2], self.text)

    def expect_op(self, op):
        tok = self.peek()
        if tok[0] != "op" or tok[1] != op:
            self.fail(f"expected {op!r}")
        self.take()

    def parse(self) -> MultiPoly:
        result = self.expr()
        if self.peek()[0] != "end":
            tok = self.peek()
            if tok[0] in ("ident", "num") or tok[1] == "(":
                self.fail("implicit multiplication is not allowed; use '*'")
            self.fail(f"unexpected {tok[1]!r}")
        return result

    def expr(self) -> MultiPoly:
        tok = self.peek()
        sign = 1
        if tok[0] == "op" and tok[1] in "+-":
            self.take()
            sign = -1 if tok[1] == "-" else 1
        acc = self.term() * sign
        while True:
            tok = self.peek()
            if tok[0] == "op" and tok[1] in "+-":
                self.take()
                rhs = self.term()
                acc = acc + rhs if tok[1] == "+" else acc - rhs
            else:
                return acc

    def term(self) -> MultiPoly:
        acc = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] == "*":
            self.take()
            acc = acc * self.factor()
        return acc

    def factor(self) -> MultiPoly:
        base = self.base()
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "^":
            self.take()
            exp_tok = self.take()
            if exp_tok[0] != "num" or not exp_tok[1].isdigit():
                self.fail("exponent must be a non-negative integer", exp_tok)
            return base ** int(exp_tok[1])
        return base

    def base(self) -> MultiPoly:
        tok = self.take()
        kind, value, pos = tok
        if kind == "ident":
            if value not in self.names:
                raise PolyParseError(f"unknown identifier {value!r}", pos, self.text)
            return MultiPoly.variable(self.n, self.names[value])
        if kind == "num":
            return MultiPoly.constant(self.n, self.number(tok))
        if kind == "op" and value == "(":
            inner = self.expr()
            self.expect_op(")")
            return inner
        if kind == "end":
            self.fail("unexpected end of expression", tok)
        self.fail(f"unexpected {value!r}", tok)

    def number(self, tok) -> complex:
        text = tok[1]
        if text.endswith("j"):
            return complex(0, float(text[:-1]))
        if text.isdigit():
            nxt = self.peek()
            after = self.tokens[self.i + 1] if self.i + 1 < len(self.tokens) else None
            # integer '/' positive_integer is a single rational literal
            if nxt[0] == "op" and nxt[1] == "/" and after and after[0] == "num" and after[1].isdigit():
                if int(after[1]) == 0:
                    self.fail("division by zero", after)
                self.take()
                self.take()
                return complex(float(Fraction(int(text), int(after[1]))))
            return complex(int(text))
        return complex(float(text))


def parse_poly(
    text: str,
    variable_names: Sequence[str],
    parameter_name: str | None = "t",
) -> MultiPoly:
    """Parse ``text`` into a :class:`MultiPoly` over the given variable names.

    Grammar (ASCII, no implicit multiplication)::

        expr   := term (('+'|'-') term)*
        term   := factor ('*' factor)*
        factor := base ('^' nonneg_int)?
        base   := identifier | number | '(' expr ')'
        number := integer | integer '/' positive_integer | decimal

    A leading sign is allowed on an expression. Decimals may carry an
    exponent and a trailing ``j`` marks an imaginary literal.

    >>> parse_poly("3/2*x*y", ["x", "y"]).terms
    {(1, 1, 0): (1.5+0j)}
    """
    names = {name: i for i, name in enumerate(variable_names)}
    if len(names) != len(variable_names):
        raise ValueError("duplicate variable names")
    if parameter_name is not None:
        if parameter_name in names:
            raise ValueError(f"parameter name {parameter_name!r} clashes with a variable")
        names[parameter_name] = len(variable_names)
    return _Parser(text, names, len(variable_names)).parse()


def from_coefficients(coeffs: Iterable[complex]) -> MultiPoly:
    """Univariate polynomial from coefficients listed highest power first."""
    coeffs = list(coeffs)
    deg = len(coeffs) - 1
    return MultiPoly(1, {(deg - k, 0): c for k, c in enumerate(coeffs)})


def is_homogeneous(p: MultiPoly) -> bool:
    degs = {sum(e[:-1]) for e in p.terms}
    return len(degs) <= 1


def coefficient_scale(p: MultiPoly) -> float:
    return max((abs(c) for c in p.terms.values()), default=0.0)

