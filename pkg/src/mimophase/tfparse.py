"""Rational transfer matrices entered as text.

Grammar (whitespace and newlines are ignored)::

    matrix := row (';' row)*
    row    := expr (',' expr)*
    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary | unary)*      # juxtaposition multiplies
    unary  := ('+' | '-') unary | power
    power  := atom ('^' integer)?
    atom   := number | 's' | '(' expr ')'

so ``2/(s^2+2s+200)`` and ``(0.2s^3 + 0.5*s^2)/(s+1)`` are both accepted.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import NonProperEntry, NonSquare, PoleHit, TransferSyntaxError

__all__ = [
    "Polynomial",
    "RationalTransferMatrix",
    "parse_transfer_matrix",
    "format_transfer_matrix",
    "eval_tfm",
]


def _trim(c) -> tuple[float, ...]:
    c = [float(x) for x in np.atleast_1d(np.asarray(c, dtype=float))]
    while len(c) > 1 and c[-1] == 0.0:
        c.pop()
    return tuple(c) if c else (0.0,)


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial in ``s``; coefficients in ascending powers."""

    coeffs: tuple[float, ...]

    def __init__(self, coeffs):
        object.__setattr__(self, "coeffs", _trim(coeffs))

    @property
    def degree(self) -> int:
        return -1 if self.is_zero else len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return self.coeffs == (0.0,)

    @property
    def leading(self) -> float:
        return self.coeffs[-1]

    def __call__(self, s):
        return P.polyval(s, self.coeffs)

    def __add__(self, other):
        return Polynomial(P.polyadd(self.coeffs, other.coeffs))

    def __sub__(self, other):
        return Polynomial(P.polysub(self.coeffs, other.coeffs))

    def __mul__(self, other):
        return Polynomial(P.polymul(self.coeffs, other.coeffs))

    def __neg__(self):
        return Polynomial([-c for c in self.coeffs])

    def divmod(self, other):
        q, r = P.polydiv(self.coeffs, other.coeffs)
        return Polynomial(q), Polynomial(r)

    def monic(self):
        return Polynomial(np.asarray(self.coeffs) / self.leading)

    def abs_scale(self, s) -> float:
        """Sum of |c_k| |s|^k, the natural scale for cancellation checks."""
        return float(P.polyval(abs(s), np.abs(self.coeffs)))

    def to_text(self) -> str:
        terms = []
        for k, c in enumerate(self.coeffs):
            if c == 0.0:
                continue
            if k == 0:
                terms.append(repr(c))
            elif k == 1:
                terms.append(f"{c!r}*s")
            else:
                terms.append(f"{c!r}*s^{k}")
        return " + ".join(terms) if terms else "0"


ONE = Polynomial([1.0])


@dataclass(frozen=True)
class RationalTransferMatrix:
    """Square grid of (numerator, denominator) polynomial pairs."""

    entries: tuple[tuple[tuple[Polynomial, Polynomial], ...], ...]

    @property
    def size(self) -> int:
        return len(self.entries)

    def num(self, i, j) -> Polynomial:
        return self.entries[i][j][0]

    def den(self, i, j) -> Polynomial:
        return self.entries[i][j][1]

    def __call__(self, s):
        return eval_tfm(self, s)


def eval_tfm(tfm: RationalTransferMatrix, s) -> np.ndarray:
    """Entrywise evaluation at the complex point ``s``."""
    m = tfm.size
    out = np.empty((m, m), dtype=complex)
    for i in range(m):
        for j in range(m):
            num, den = tfm.entries[i][j]
            d = den(s)
            if abs(d) <= 1e-14 * den.abs_scale(s):
                raise PoleHit(f"denominator of entry ({i + 1},{j + 1}) vanishes at s={s}")
            out[i, j] = num(s) / d
    return out


# -- parsing -----------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<var>s)
  | (?P<op>[-+*/^(),;])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise TransferSyntaxError(
                f"unexpected character {text[pos]!r}", line, pos - line_start + 1
            )
        kind = m.lastgroup
        tok_text = m.group()
        if kind == "ws":
            for k, ch in enumerate(tok_text):
                if ch == "\n":
                    line += 1
                    line_start = pos + k + 1
        else:
            toks.append(_Tok(kind if kind != "op" else tok_text, tok_text, line, pos - line_start + 1))
        pos = m.end()
    toks.append(_Tok("end", "", line, pos - line_start + 1))
    return toks


class _Rat:
    """Unreduced rational value used during parsing."""

    __slots__ = ("num", "den")

    def __init__(self, num: Polynomial, den: Polynomial = ONE):
        self.num = num
        self.den = den

    def __add__(self, o):
        if self.den == o.den:
            return _Rat(self.num + o.num, self.den)
        return _Rat(self.num * o.den + o.num * self.den, self.den * o.den)

    def __neg__(self):
        return _Rat(-self.num, self.den)

    def __sub__(self, o):
        return self + (-o)

    def __mul__(self, o):
        return _Rat(self.num * o.num, self.den * o.den)

    def __truediv__(self, o):
        return _Rat(self.num * o.den, self.den * o.num)

    def power(self, k):
        num, den = ONE, ONE
        for _ in range(k):
            num, den = num * self.num, den * self.den
        return _Rat(num, den)


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        raise TransferSyntaxError(msg, tok.line, tok.col)

    def take(self, kind):
        if self.tok.kind != kind:
            found = self.tok.text or "end of input"
            self.error(f"expected {kind!r}, found {found!r}")
        t = self.tok
        self.i += 1
        return t

    def matrix(self):
        rows = [self.row()]
        while self.tok.kind == ";":
            self.i += 1
            rows.append(self.row())
        if self.tok.kind != "end":
            self.error(f"unexpected {self.tok.text!r}")
        return rows

    def row(self):
        entries = [self.entry()]
        while self.tok.kind == ",":
            self.i += 1
            entries.append(self.entry())
        return entries

    def entry(self):
        start = self.tok
        value = self.expr()
        if value.den.is_zero:
            self.error("division by the zero polynomial", start)
        return value, start

    def expr(self):
        value = self.term()
        while self.tok.kind in ("+", "-"):
            op = self.take(self.tok.kind).kind
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self):
        value = self.unary()
        while True:
            kind = self.tok.kind
            if kind == "*":
                self.i += 1
                value = value * self.unary()
            elif kind == "/":
                tok = self.take("/")
                rhs = self.unary()
                if rhs.num.is_zero:
                    self.error("division by zero", tok)
                value = value / rhs
            elif kind in ("var", "(", "num"):
                value = value * self.unary()
            else:
                return value

    def unary(self):
        if self.tok.kind == "-":
            self.i += 1
            return -self.unary()
        if self.tok.kind == "+":
            self.i += 1
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok.kind == "^":
            self.i += 1
            tok = self.take("num")
            if not tok.text.isdigit():
                self.error("exponent must be a nonnegative integer", tok)
            k = int(tok.text)
            base = base.power(k)
        return base

    def atom(self):
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return _Rat(Polynomial([float(tok.text)]))
        if tok.kind == "var":
            self.i += 1
            return _Rat(Polynomial([0.0, 1.0]))
        if tok.kind == "(":
            self.i += 1
            value = self.expr()
            self.take(")")
            return value
        self.error(f"unexpected {tok.text or 'end of input'!r}")


def parse_transfer_matrix(text: str) -> RationalTransferMatrix:
    """Parse the textual form of a square, proper rational matrix."""
    rows = _Parser(text).matrix()
    m = len(rows)
    if any(len(r) != m for r in rows):
        raise NonSquare(f"expected {m}x{m} entries, got row lengths {[len(r) for r in rows]}")
    entries = []
    for i, row in enumerate(rows):
        out_row = []
        for j, (value, tok) in enumerate(row):
            if value.num.degree > value.den.degree:
                raise NonProperEntry(
                    f"entry ({i + 1},{j + 1}) at line {tok.line}, column {tok.col} is improper"
                )
            out_row.append((value.num, value.den))
        entries.append(tuple(out_row))
    return RationalTransferMatrix(tuple(entries))


def format_transfer_matrix(tfm: RationalTransferMatrix) -> str:
    """Canonical text that parses back to the same structure."""
    return ";\n".join(
        ", ".join(f"({num.to_text()})/({den.to_text()})" for num, den in row)
        for row in tfm.entries
    )
