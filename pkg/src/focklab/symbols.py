"""Symbols on the complex plane: a small exact grammar.

A symbol is a finite sum of terms ``C * z^A * zb^B * gauss(S)`` meaning
``C z^A conj(z)^B exp(-S |z|^2)``, plus optionally a multiple of one
piecewise builtin:

* ``invz``        -- ``1/z`` for ``|z| >= 1`` and ``0`` inside the unit disk
* ``conj(invz)``  -- its complex conjugate

Printing is canonical and uses ``repr`` for every float, so
``parse(str(f)) == f`` holds bit for bit.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

INVZ = "inv_z_outside_unit"
CONJ_INVZ = "conj_inv_z_outside_unit"
_BUILTIN_CONJ = {INVZ: CONJ_INVZ, CONJ_INVZ: INVZ}


class SymbolSyntaxError(ValueError):
    pass


class Term(NamedTuple):
    coef: complex
    a: int
    b: int
    s: float


def _canonical(terms) -> tuple[Term, ...]:
    acc: dict[tuple[int, int, float], complex] = {}
    for t in terms:
        key = (int(t.a), int(t.b), float(t.s))
        acc[key] = acc.get(key, 0j) + complex(t.coef)
    out = [Term(c, a, b, s) for (a, b, s), c in acc.items() if c != 0]
    out.sort(key=lambda t: (t.s, t.a + t.b, t.b, t.a))
    return tuple(out)


@dataclass(frozen=True)
class SymbolFunction:
    terms: tuple[Term, ...] = ()
    builtin: str | None = None
    builtin_coef: complex = 0j

    def __post_init__(self):
        for t in self.terms:
            if t.a < 0 or t.b < 0 or not t.s >= 0:
                raise ValueError(f"invalid term {t}")
        if self.builtin is not None and self.builtin not in _BUILTIN_CONJ:
            raise ValueError(f"unknown builtin {self.builtin!r}")
        object.__setattr__(self, "terms", _canonical(self.terms))
        if self.builtin is None or self.builtin_coef == 0:
            object.__setattr__(self, "builtin", None)
            object.__setattr__(self, "builtin_coef", 0j)
        else:
            object.__setattr__(self, "builtin_coef", complex(self.builtin_coef))

    # construction helpers -------------------------------------------------
    @classmethod
    def monomial(cls, coef=1.0, a=0, b=0, s=0.0) -> SymbolFunction:
        return cls((Term(complex(coef), a, b, float(s)),))

    @classmethod
    def constant(cls, c) -> SymbolFunction:
        return cls.monomial(c)

    @classmethod
    def invz(cls, coef=1.0) -> SymbolFunction:
        return cls((), INVZ, complex(coef))

    # algebra ---------------------------------------------------------------
    def conjugate(self) -> SymbolFunction:
        terms = tuple(Term(t.coef.conjugate(), t.b, t.a, t.s) for t in self.terms)
        if self.builtin is None:
            return SymbolFunction(terms)
        return SymbolFunction(terms, _BUILTIN_CONJ[self.builtin], self.builtin_coef.conjugate())

    def scale(self, c) -> SymbolFunction:
        c = complex(c)
        terms = tuple(Term(t.coef * c, t.a, t.b, t.s) for t in self.terms)
        return SymbolFunction(terms, self.builtin, self.builtin_coef * c)

    def __add__(self, other: SymbolFunction) -> SymbolFunction:
        if self.builtin and other.builtin and self.builtin != other.builtin:
            raise SymbolSyntaxError("a symbol may carry only one builtin")
        builtin = self.builtin or other.builtin
        return SymbolFunction(self.terms + other.terms, builtin,
                              self.builtin_coef + other.builtin_coef)

    def __neg__(self) -> SymbolFunction:
        return self.scale(-1.0)

    def __sub__(self, other: SymbolFunction) -> SymbolFunction:
        return self + (-other)

    def __mul__(self, other: SymbolFunction) -> SymbolFunction:
        if self.builtin and other.builtin:
            raise SymbolSyntaxError("products of builtins are not supported")
        if self.builtin or other.builtin:
            b_sym, plain = (self, other) if self.builtin else (other, self)
            c = plain.as_constant()
            if c is None:
                raise SymbolSyntaxError("a builtin may only be multiplied by a constant")
            return b_sym.scale(c)
        terms = [Term(t.coef * u.coef, t.a + u.a, t.b + u.b, t.s + u.s)
                 for t in self.terms for u in other.terms]
        return SymbolFunction(tuple(terms))

    def as_constant(self) -> complex | None:
        if self.builtin is not None:
            return None
        if not self.terms:
            return 0j
        if len(self.terms) == 1 and self.terms[0][1:] == (0, 0, 0.0):
            return self.terms[0].coef
        return None

    # structure -------------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return not self.terms and self.builtin is None

    @property
    def is_holomorphic(self) -> bool:
        """Entire: no conj(z) factor, no envelope, no builtin."""
        return self.builtin is None and all(t.b == 0 and t.s == 0 for t in self.terms)

    @property
    def max_degree(self) -> int:
        return max((t.a + t.b for t in self.terms), default=0)

    @property
    def max_zbar_degree(self) -> int:
        return max((t.b for t in self.terms), default=0)

    # evaluation ------------------------------------------------------------
    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        if self.terms:
            zc = np.conj(z)
            r2 = (z * zc).real
            for t in self.terms:
                v = t.coef * z ** t.a * zc ** t.b
                if t.s:
                    v = v * np.exp(-t.s * r2)
                out += v
        if self.builtin is not None:
            outside = np.abs(z) >= 1.0
            safe = np.where(outside, z, 1.0)
            base = 1.0 / safe if self.builtin == INVZ else 1.0 / np.conj(safe)
            out += self.builtin_coef * np.where(outside, base, 0.0)
        return out

    # text ------------------------------------------------------------------
    def __str__(self) -> str:
        parts = [_format_term(t) for t in self.terms]
        if self.builtin is not None:
            name = "invz" if self.builtin == INVZ else "conj(invz)"
            parts.append(f"{_format_complex(self.builtin_coef)}*{name}")
        return " + ".join(parts) if parts else "0"


def _format_real(x: float) -> str:
    return repr(float(x))


def _format_complex(c: complex) -> str:
    im = _format_real(c.imag)
    sep = "" if im.startswith("-") else "+"
    return f"({_format_real(c.real)}{sep}{im}i)"


def _format_term(t: Term) -> str:
    out = [_format_complex(t.coef)]
    if t.a:
        out.append(f"z^{t.a}")
    if t.b:
        out.append(f"zb^{t.b}")
    if t.s:
        out.append(f"gauss({_format_real(t.s)})")
    return "*".join(out)


# ---------------------------------------------------------------------------
# parser

_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_TOKEN = re.compile(
    rf"""\s*(?:
        (?P<complex>\(\s*[+-]?{_NUM}\s*[+-]\s*{_NUM}\s*i\s*\))
      | (?P<imag>{_NUM}\s*i(?![a-z]))
      | (?P<num>{_NUM})
      | (?P<name>[a-z]+)
      | (?P<op>[-+*^()])
    )""",
    re.VERBOSE,
)
_COMPLEX_PARTS = re.compile(rf"\(\s*([+-]?{_NUM})\s*([+-])\s*({_NUM})\s*i\s*\)")


@dataclass
class _Parser:
    text: str
    tokens: list[tuple[str, str]] = field(default_factory=list)
    pos: int = 0

    def __post_init__(self):
        i, s = 0, self.text
        while i < len(s):
            if s[i:].strip() == "":
                break
            m = _TOKEN.match(s, i)
            if not m or m.end() == i:
                raise SymbolSyntaxError(f"unexpected character at {i} in {s!r}")
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind)))
            i = m.end()

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self, value=None):
        tok = self.peek()
        if tok[0] is None or (value is not None and tok[1] != value):
            raise SymbolSyntaxError(f"expected {value or 'token'} in {self.text!r}, got {tok[1]!r}")
        self.pos += 1
        return tok

    def parse(self) -> SymbolFunction:
        out = self.expr()
        if self.pos != len(self.tokens):
            raise SymbolSyntaxError(f"trailing input {self.peek()[1]!r} in {self.text!r}")
        return out

    def expr(self) -> SymbolFunction:
        sign = 1.0
        if self.peek() in (("op", "+"), ("op", "-")):
            sign = -1.0 if self.take()[1] == "-" else 1.0
        acc = self.term().scale(sign)
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            nxt = self.term()
            acc = acc + nxt if op == "+" else acc - nxt
        return acc

    def term(self) -> SymbolFunction:
        acc = self.factor()
        while self.peek() == ("op", "*"):
            self.take()
            acc = acc * self.factor()
        return acc

    def factor(self) -> SymbolFunction:
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            kind, val = self.take()
            if kind != "num" or not val.isdigit():
                raise SymbolSyntaxError(f"exponent must be a nonnegative integer, got {val!r}")
            out = SymbolFunction.constant(1.0)
            for _ in range(int(val)):
                out = out * base
            return out
        return base

    def atom(self) -> SymbolFunction:
        kind, val = self.take()
        if kind == "complex":
            re_, sign, im = _COMPLEX_PARTS.match(val).groups()
            imag = float(im) if sign == "+" else -float(im)
            return SymbolFunction.constant(complex(float(re_), imag))
        if kind == "imag":
            return SymbolFunction.constant(complex(0.0, float(val.rstrip("i").strip())))
        if kind == "num":
            return SymbolFunction.constant(float(val))
        if kind == "name":
            if val == "z":
                return SymbolFunction.monomial(1.0, a=1)
            if val == "zb":
                return SymbolFunction.monomial(1.0, b=1)
            if val == "invz":
                return SymbolFunction.invz()
            if val == "gauss":
                self.take("(")
                k, rate = self.take()
                if k != "num":
                    raise SymbolSyntaxError("gauss() takes a nonnegative real rate")
                self.take(")")
                return SymbolFunction.monomial(1.0, s=float(rate))
            if val == "conj":
                self.take("(")
                inner = self.expr()
                self.take(")")
                return inner.conjugate()
            raise SymbolSyntaxError(f"unknown name {val!r}")
        if (kind, val) == ("op", "("):
            inner = self.expr()
            self.take(")")
            return inner
        raise SymbolSyntaxError(f"unexpected token {val!r} in {self.text!r}")


def parse_symbol(text: str) -> SymbolFunction:
    """Parse the textual grammar, e.g. ``"zb*gauss(1)"`` or ``"(zb+z)*gauss(1)"``."""
    if text.strip() == "0":
        return SymbolFunction()
    return _Parser(text).parse()
